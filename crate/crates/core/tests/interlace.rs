use rilab::interlace::container::{dump_json, read_container, write_container, StoredSample};
use rilab::interlace::{
    backward_acceptance, merge_occupancy, sample_interlacement, sample_many, vacuum_probability_test, ForwardPolicy,
    SampleOptions, WindowKernel,
};
use rilab::lattice::{LatticeBox, Point};
use rilab::potential::{capacity_auto, GreenTable, DEFAULT_TOL};
use rilab::rng::{stream_rng, try_par_trials};
use rilab::stats::{ExperimentEstimate, Z95};

fn kernel(n: u32) -> WindowKernel {
    WindowKernel::new(3, n, ForwardPolicy::Exact, DEFAULT_TOL).unwrap()
}

fn cap0() -> f64 {
    let mut t = GreenTable::new(3, DEFAULT_TOL).unwrap();
    capacity_auto(&[Point::origin(3)], &mut t).unwrap().capacity
}

#[test]
fn trajectory_count_has_poisson_mean() {
    let k = kernel(5);
    let counts: Vec<f64> = try_par_trials(1, 10_000, |_, rng| {
        sample_interlacement(&k, 1.0, rng, SampleOptions::default()).map(|s| s.n_k as f64)
    })
    .unwrap();
    let e = ExperimentEstimate::mean(&counts).unwrap();
    let cap = k.capacity().capacity;
    assert!((e.estimate - cap).abs() <= 3.0 * e.std_err, "{} vs {cap}", e.estimate);
}

#[test]
fn starts_lie_on_the_inner_boundary() {
    let k = kernel(3);
    let opts = SampleOptions { record_trajectories: true };
    for s in sample_many(&k, 2.0, 20, 5, opts).unwrap() {
        assert_eq!(s.trajectories.len() as u64, s.n_k);
        for t in &s.trajectories {
            assert_eq!(t.start.linf_norm(), 3);
            assert_eq!(t.forward[0], t.start);
        }
    }
}

#[test]
fn vacuum_law_at_higher_level() {
    let k = kernel(4);
    let mut t = GreenTable::new(3, DEFAULT_TOL).unwrap();
    for (i, a) in
        [vec![Point::origin(3)], vec![Point::origin(3), Point::new(vec![1, 1, 0])], LatticeBox::centered(3, 1).points()]
            .into_iter()
            .enumerate()
    {
        let cap = capacity_auto(&a, &mut t).unwrap();
        let r = vacuum_probability_test(&k, 2.0, &a, 20_000, 40 + i as u64, &cap).unwrap();
        assert!(r.consistent(), "set {i}: {} vs {}", r.estimate.estimate, r.reference);
    }
    let cap = capacity_auto(&[Point::origin(3)], &mut t).unwrap();
    let r = vacuum_probability_test(&k, 0.0, &[Point::origin(3)], 100, 1, &cap).unwrap();
    assert_eq!(r.estimate.estimate, 1.0);
}

#[test]
fn superposition_of_independent_levels() {
    let k = kernel(2);
    let origin = k.indexer().index_of(&[0, 0, 0]).unwrap();
    let empty = try_par_trials(3, 20_000, |_, rng| {
        let a = sample_interlacement(&k, 0.3, rng, SampleOptions::default())?;
        let b = sample_interlacement(&k, 0.7, rng, SampleOptions::default())?;
        Ok::<_, rilab::Error>(!merge_occupancy(&[&a, &b])?.get(origin))
    })
    .unwrap();
    let e = ExperimentEstimate::proportion(empty.iter().filter(|v| **v).count() as u64, 20_000).unwrap();
    let want = (-cap0()).exp();
    assert!((e.estimate - want).abs() <= 3.0 * e.std_err, "{} vs {want}", e.estimate);
}

#[test]
fn marginal_law_in_the_interior() {
    let k = kernel(4);
    let want = 1.0 - (-cap0()).exp();
    let sites: Vec<usize> = [[0, 0, 0], [1, -1, 2]].iter().map(|c| k.indexer().index_of(c).unwrap()).collect();
    let hits = try_par_trials(6, 20_000, |_, rng| {
        let s = sample_interlacement(&k, 1.0, rng, SampleOptions::default())?;
        Ok::<_, rilab::Error>(sites.iter().map(|&i| s.occupancy.get(i)).collect::<Vec<_>>())
    })
    .unwrap();
    for j in 0..sites.len() {
        let e = ExperimentEstimate::proportion(hits.iter().filter(|h| h[j]).count() as u64, 20_000).unwrap();
        assert!((e.estimate - want).abs() <= 3.0 * e.std_err, "site {j}: {} vs {want}", e.estimate);
    }
}

#[test]
fn occupancy_frequency_grows_with_level() {
    let k = kernel(3);
    let site = k.indexer().index_of(&[1, 0, 0]).unwrap();
    let mut prev: Option<ExperimentEstimate> = None;
    for (i, u) in [0.25, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let occ = try_par_trials(10 + i as u64, 4_000, |_, rng| {
            sample_interlacement(&k, u, rng, SampleOptions::default()).map(|s| s.occupancy.get(site))
        })
        .unwrap();
        let e = ExperimentEstimate::proportion(occ.iter().filter(|v| **v).count() as u64, 4_000).unwrap();
        if let Some(p) = &prev {
            let hw = Z95 * (p.std_err.powi(2) + e.std_err.powi(2)).sqrt();
            assert!(e.estimate >= p.estimate - 2.0 * hw, "u={u}");
        }
        prev = Some(e);
    }
}

#[test]
fn backward_acceptance_matches_equilibrium_measure() {
    let k = kernel(3);
    for c in [[3, 3, 3], [3, 3, 0], [3, 0, 0], [-3, 1, -2]] {
        let x = Point::new(c.to_vec());
        let e = backward_acceptance(&k, &x, 20_000, 7).unwrap();
        let want = k.capacity().mass(&x);
        assert!((e.estimate - want).abs() <= 3.0 * e.std_err, "{c:?}: {} vs {want}", e.estimate);
    }
}

#[test]
fn container_roundtrip_of_a_real_sample() {
    let k = kernel(3);
    let s = sample_interlacement(&k, 1.5, &mut stream_rng(9, 2), SampleOptions::default()).unwrap();
    let stored = StoredSample::from_sample(&s, 9, 2);
    let mut buf = Vec::new();
    write_container(&mut buf, &stored).unwrap();
    let back = read_container(&mut buf.as_slice()).unwrap();
    assert_eq!(back, stored);
    let json: serde_json::Value = serde_json::from_str(&dump_json(&back).unwrap()).unwrap();
    assert!(json.is_object());
}
