use hidden_sat::generator::sample_instance;
use hidden_sat::solvers::first_descent_equals_uc;
use hidden_sat::uc::{uc_run_traced, uc_success_rate};
use hidden_sat::{GeneratorSpec, HiddenMode};

#[test]
fn zero_hidden_at_density_two_usually_succeeds() {
    let rate = uc_success_rate(HiddenMode::Zero, 10_000, &[2.0], 200, 2024).unwrap()[0].rate;
    assert!(rate.rate > 0.5, "{rate:?}");
}

#[test]
fn two_hidden_trace_follows_the_symmetric_profile() {
    let (n, r) = (100_000, 2.0);
    let inst = sample_instance(&GeneratorSpec::with_density(n, 3, r, HiddenMode::Two, 77)).unwrap();
    let (outcome, trace) = uc_run_traced(&inst.formula, Some(&inst.hidden[0]), 78, 500).unwrap();
    assert!(outcome.success);
    let nf = n as f64;
    let mut worst = (0.0f64, 0.0f64);
    for s in &trace.samples {
        let x = s.variables_set as f64 / nf;
        let s2: usize = s.s2.iter().sum();
        let predicted = 1.5 * r * x * (1.0 - x).powi(2);
        worst.0 = worst.0.max((s2 as f64 / nf - predicted).abs());
        worst.1 = worst.1.max((s.s2[0] as f64 - s.s2[2] as f64).abs() / nf);
    }
    assert!(worst.0 < 0.01 && worst.1 < 0.01, "{worst:?}");
}

#[test]
fn one_hidden_survives_longer_near_the_crossing() {
    let (n, trials, r) = (10_000, 300, 2.7);
    let zero = uc_success_rate(HiddenMode::Zero, n, &[r], trials, 27).unwrap()[0].rate;
    let one = uc_success_rate(HiddenMode::One, n, &[r], trials, 27).unwrap()[0].rate;
    assert!(one.rate > zero.rate, "one {one:?} zero {zero:?}");
}

#[test]
fn dpll_first_descent_replays_unit_clause() {
    for (i, r) in [1.5, 3.0, 4.26, 6.0].into_iter().enumerate() {
        for mode in HiddenMode::ALL {
            let inst = sample_instance(&GeneratorSpec::with_density(300, 3, r, mode, i as u64)).unwrap();
            for seed in 0..5 {
                assert!(first_descent_equals_uc(&inst.formula, seed).unwrap(), "r {r} {mode:?} seed {seed}");
            }
        }
    }
}
