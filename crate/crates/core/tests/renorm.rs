use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rilab::bitset::Bitset;
use rilab::lattice::{BoxIndexer, Point};
use rilab::renorm::{
    decoupling_log_rhs, hierarchical_event, path_implies_hierarchical, trigger_certificate, RenormScheme, Verdict,
};

#[test]
fn lambda_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..40 {
        let d = rng.random_range(1..=3usize);
        let scheme = RenormScheme::new(rng.random_range(1..4), rng.random_range(2..5)).unwrap();
        let n = rng.random_range(1..=2u32);
        let x = Point::new((0..d).map(|_| rng.random_range(-20..20)).collect());
        let step = scheme.scale(n - 1).unwrap() as i32;
        let radius = scheme.scale(n).unwrap() as i32;
        let mut want = Vec::new();
        let mut c = vec![0i32; d];
        let lo: Vec<i32> = x.coords().iter().map(|v| v - radius).collect();
        let count = (2 * radius + 1) as usize;
        for i in 0..count.pow(d as u32) {
            let mut rem = i;
            for k in (0..d).rev() {
                c[k] = lo[k] + (rem % count) as i32;
                rem /= count;
            }
            if c.iter().all(|v| v.rem_euclid(step) == 0) {
                want.push(Point::new(c.clone()));
            }
        }
        assert_eq!(scheme.lambda(&x, n).unwrap(), want);
    }
    let s = RenormScheme::new(2, 3).unwrap();
    assert_eq!(s.lambda(&Point::origin(3), 2).unwrap().len(), 7usize.pow(3));
}

#[test]
fn passing_certificates_bound_every_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut passes = 0;
    for _ in 0..200 {
        let l0 = rng.random_range(2..6u32);
        let d = rng.random_range(2..5usize);
        let p = 10f64.powf(rng.random_range(-14.0..-1.0));
        let (e1, e2) = (p * rng.random::<f64>(), p * rng.random::<f64>());
        let r = trigger_certificate(p, l0, e1, e2, d, 20).unwrap();
        if r.verdict == Verdict::Pass {
            passes += 1;
            assert_eq!(r.bounds.len(), 21);
            for n in 0..=20 {
                let l = decoupling_log_rhs(p, n, l0, e1, e2, d).unwrap();
                assert!(l / std::f64::consts::LN_2 <= -(2f64.powi(n as i32)));
            }
        } else {
            assert!(r.lhs >= 0.5 && r.bounds.is_empty());
        }
    }
    assert!(passes > 20 && passes < 200);
}

#[test]
fn hierarchy_on_constant_seeds() {
    let s = RenormScheme::new(1, 3).unwrap();
    let x = Point::origin(2);
    for n in 0..3 {
        assert!(hierarchical_event(|_| Ok(true), &x, n, s).unwrap());
        assert!(!hierarchical_event(|_| Ok(false), &x, n, s).unwrap());
    }
    // only the center true: no pair at distance > L_n/100
    assert!(!hierarchical_event(|y| Ok(y.linf_norm() == 0), &x, 1, s).unwrap());
}

#[test]
fn connection_forces_hierarchical_event() {
    let scheme = RenormScheme::new(1, 3).unwrap();
    let ix = BoxIndexer::new(2, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut connected = 0;
    for k in 0..300 {
        let p = [0.5, 0.6, 0.7][k % 3];
        let mut occ = Bitset::new(ix.len());
        for i in 0..ix.len() {
            if rng.random_bool(p) {
                occ.set(i);
            }
        }
        let c = path_implies_hierarchical(&occ, &ix, 1, scheme).unwrap();
        assert!(c.holds, "witness {:?}", c.witness);
        connected += c.connected as usize;
    }
    assert!(connected > 30, "{connected}");
}
