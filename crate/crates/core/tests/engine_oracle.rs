//! Cross-checks of the exact engine against independently coded oracles: a
//! direct binomial sum for two-point supports, and the seeded Monte Carlo
//! estimator.

mod common;

use monotone_lab_core::presets::{all_preset_curves, Figure};
use monotone_lab_core::{
    fit, population_risk, sample_from_composition, Composition, Engine, LossKind, NRange,
};

/// Direct binomial expectation for a two-point support: Pascal-triangle
/// coefficients and plain powers, no shared log-weight machinery.
fn binomial_expected_risk(
    spec: &monotone_lab_core::LearnerSpec,
    dist: &monotone_lab_core::DiscreteDistribution,
    loss: &LossKind,
    n: u32,
) -> f64 {
    assert_eq!(dist.len(), 2);
    let q = dist.probs()[0];
    let n = n as usize;
    // Row n of Pascal's triangle.
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    let mut total = 0.0;
    for (k, coeff) in row.iter().enumerate() {
        let comp = Composition::from_counts(vec![k as u64, (n - k) as u64]);
        let sample = sample_from_composition(dist, &comp).unwrap();
        let h = fit(spec, &sample).unwrap();
        let risk = population_risk(dist, &h, loss).unwrap();
        total += coeff * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32) * risk;
    }
    total
}

#[test]
fn engine_matches_direct_binomial_sum_on_presets() {
    let engine = Engine::default();
    for preset in all_preset_curves() {
        if preset.distribution.len() != 2 {
            continue;
        }
        for n in [1u32, 3, 7, 15, 30] {
            let exact = engine
                .expected_risk(&preset.learner, &preset.distribution, &preset.loss, n)
                .unwrap();
            let direct =
                binomial_expected_risk(&preset.learner, &preset.distribution, &preset.loss, n);
            assert!(
                (exact - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                "{} n={n}: engine {exact} vs binomial {direct}",
                preset.name
            );
        }
    }
}

#[test]
fn monte_carlo_brackets_exact_engine_on_presets() {
    let engine = Engine::default();
    for (i, preset) in all_preset_curves().into_iter().enumerate() {
        for n in [1u32, 6] {
            let exact = engine
                .expected_risk(&preset.learner, &preset.distribution, &preset.loss, n)
                .unwrap();
            let est = engine
                .mc_expected_risk(
                    &preset.learner,
                    &preset.distribution,
                    &preset.loss,
                    n,
                    100_000,
                    1000 + i as u64,
                )
                .unwrap();
            assert!(
                (exact - est.mean).abs() <= 4.0 * est.std_error.max(1e-15),
                "{} n={n}: exact {exact}, mc {} +- {}",
                preset.name,
                est.mean,
                est.std_error
            );
        }
    }
}

#[test]
fn preset_curves_are_reproducible() {
    let engine = Engine::default();
    let range = NRange::new(1, 30).unwrap();
    for preset in Figure::Fig1b.curves() {
        let a = engine
            .learning_curve(&preset.learner, &preset.distribution, &preset.loss, range)
            .unwrap();
        let b = engine
            .learning_curve(&preset.learner, &preset.distribution, &preset.loss, range)
            .unwrap();
        assert_eq!(a, b);
    }
}
