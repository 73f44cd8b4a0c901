use rilab::phase::{BisectOptions, CurveStatus, PhaseEngine, PhaseGridSpec, Selector};

fn engine() -> PhaseEngine {
    PhaseEngine::new(3, 2, 1e-10).unwrap()
}

#[test]
fn critical_curve_decreases_in_u1() {
    let e = engine();
    let opts = BisectOptions { p_star: 0.9, trials: 200, tolerance: 0.1, seed: 12, ..Default::default() };
    let a = e.curve_bisect(3.0, Selector::V, &opts).unwrap();
    let b = e.curve_bisect(4.0, Selector::V, &opts).unwrap();
    assert_eq!(a.status, CurveStatus::Bracketed);
    assert_eq!(b.status, CurveStatus::Bracketed);
    let ([_, hi_a], [lo_b, _]) = (a.bracket.unwrap(), b.bracket.unwrap());
    // the brackets may overlap; the u1 = 3 bracket must not lie below the u1 = 4 one
    assert!(hi_a >= lo_b - opts.tolerance, "{:?} vs {:?}", a.bracket, b.bracket);
}

#[test]
fn crossing_frequency_is_monotone_across_a_row() {
    let e = engine();
    let spec = PhaseGridSpec { u1: vec![3.0], u2: vec![0.0, 0.5, 1.0, 2.0, 4.0], trials: 300, seed: 2 };
    let cells = e.scan_grid(&spec, Selector::V).unwrap();
    for w in cells.windows(2) {
        let hw = rilab::stats::Z95 * (w[0].estimate.std_err.powi(2) + w[1].estimate.std_err.powi(2)).sqrt();
        assert!(w[1].estimate.estimate <= w[0].estimate.estimate + 2.0 * hw);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let e = engine();
    let spec = PhaseGridSpec { u1: vec![2.0, 3.0], u2: vec![1.0, 3.0], trials: 64, seed: 9 };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| e.scan_grid(&spec, Selector::V).unwrap())
    };
    assert_eq!(run(1), run(3));
    let opts = BisectOptions { trials: 50, seed: 4, ..Default::default() };
    assert_eq!(e.curve_bisect(3.0, Selector::V, &opts).unwrap(), e.curve_bisect(3.0, Selector::V, &opts).unwrap());
}
