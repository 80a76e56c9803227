//! Monotonicity verdicts for exact learning curves, the two-point margin test
//! for local nonmonotonicity, and the search for a mixing probability that
//! exhibits a risk increase.

use crate::curve::{Engine, LearningCurve, NRange};
use crate::domain::{
    population_risk, DataPoint, DiscreteDistribution, Hypothesis, LossKind, SpdMatrix,
};
use crate::error::{Error, Result};
use crate::learners::{fit, LearnerSpec, WeightedSample};
use crate::numeric::KahanSum;
use serde::{Deserialize, Serialize};

const LN_2PI: f64 = 1.8378770664093453;

/// Default absolute tolerance on risk deltas: the exact engine's only noise is
/// floating-point rounding.
pub const DEFAULT_DELTA_TOLERANCE: f64 = 1e-12;

/// Risk change from one more training point: E R(n+1) - E R(n).
/// Values above tolerance witness local nonmonotonicity at n.
pub fn local_delta(
    engine: &Engine,
    spec: &LearnerSpec,
    dist: &DiscreteDistribution,
    loss: &LossKind,
    n: u32,
) -> Result<f64> {
    let at_n = engine.expected_risk(spec, dist, loss, n)?;
    let at_n1 = engine.expected_risk(spec, dist, loss, n + 1)?;
    Ok(at_n1 - at_n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub n: u32,
    pub delta: f64,
}

/// Verdicts are restricted to the scanned range: a clean scan means no
/// violation was found on the tested sizes, not a universal certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    MonotoneOnRange,
    ViolationsFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub n_range: NRange,
    pub tolerance: f64,
    pub deltas: Vec<DeltaEntry>,
    pub violations: Vec<DeltaEntry>,
    pub verdict: Verdict,
}

impl MonotonicityReport {
    /// Deltas between consecutive curve entries; the curve must cover
    /// consecutive n. The report spans all but the last entry.
    pub fn from_curve(curve: &LearningCurve, tolerance: f64) -> Result<Self> {
        if curve.entries.len() < 2 {
            return Err(Error::invalid("need at least two curve entries for deltas"));
        }
        if curve.entries.windows(2).any(|w| w[1].n != w[0].n + 1) {
            return Err(Error::invalid("curve entries must cover consecutive n"));
        }
        let deltas: Vec<DeltaEntry> = curve
            .entries
            .windows(2)
            .map(|w| DeltaEntry {
                n: w[0].n,
                delta: w[1].risk - w[0].risk,
            })
            .collect();
        let violations: Vec<DeltaEntry> = deltas
            .iter()
            .copied()
            .filter(|d| d.delta > tolerance)
            .collect();
        let verdict = if violations.is_empty() {
            Verdict::MonotoneOnRange
        } else {
            Verdict::ViolationsFound
        };
        Ok(Self {
            n_range: NRange::new(deltas[0].n, deltas[deltas.len() - 1].n)?,
            tolerance,
            deltas,
            violations,
            verdict,
        })
    }

    pub fn is_monotone_on_range(&self) -> bool {
        self.verdict == Verdict::MonotoneOnRange
    }
}

/// Scan local deltas across a range of training-set sizes.
pub fn scan(
    engine: &Engine,
    spec: &LearnerSpec,
    dist: &DiscreteDistribution,
    loss: &LossKind,
    range: NRange,
    tolerance: f64,
) -> Result<MonotonicityReport> {
    let extended = NRange::new(range.start, range.end + 1)?;
    let curve = engine.learning_curve(spec, dist, loss, extended)?;
    MonotonicityReport::from_curve(&curve, tolerance)
}

/// A two-point domain {a, b} with a learner, a loss, and a target size n for
/// the local-nonmonotonicity margin test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointInstance {
    pub a: DataPoint,
    pub b: DataPoint,
    pub n: u32,
    pub learner: LearnerSpec,
    pub loss: LossKind,
}

impl TwoPointInstance {
    pub fn new(
        a: DataPoint,
        b: DataPoint,
        n: u32,
        learner: LearnerSpec,
        loss: LossKind,
    ) -> Result<Self> {
        if a.bitwise_eq(&b) {
            return Err(Error::invalid("the two domain points must differ"));
        }
        if n < 1 {
            return Err(Error::invalid("margin test needs n >= 1"));
        }
        Ok(Self {
            a,
            b,
            n,
            learner,
            loss,
        })
    }
}

/// Everything the margin test computes: the three fits on all-b and one-a
/// samples, their losses at b, the margin itself, and the crude per-step
/// learning-rate ratio (no verdict is attached to the ratio).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointReport {
    pub n: u32,
    /// Fit on n+1 copies of b.
    pub h_pure_b: Hypothesis,
    /// Fit on one a and n copies of b.
    pub h_mixed: Hypothesis,
    /// Fit on one a and n-1 copies of b.
    pub h_mixed_prev: Hypothesis,
    pub loss_b_pure: f64,
    pub loss_b_mixed: f64,
    pub loss_b_mixed_prev: f64,
    /// -loss_b_pure + (n+1) loss_b_mixed - n loss_b_mixed_prev; positive means
    /// the learner is not locally monotonic at n on {a, b} for some mixing
    /// probability.
    pub margin: f64,
    /// (loss_b_mixed - loss_b_pure / (n+1)) / loss_b_mixed_prev, or None when
    /// the denominator vanishes.
    pub learning_rate_ratio: Option<f64>,
}

/// Fit the three two-point samples and assemble the margin report.
pub fn two_point_report(inst: &TwoPointInstance) -> Result<TwoPointReport> {
    let n = inst.n;
    let fit_counts = |a_count: u32, b_count: u32| -> Result<Hypothesis> {
        let mut items = Vec::new();
        if a_count > 0 {
            items.push((inst.a.clone(), a_count as f64));
        }
        if b_count > 0 {
            items.push((inst.b.clone(), b_count as f64));
        }
        fit(&inst.learner, &WeightedSample::new(items)?)
    };
    let h_pure_b = fit_counts(0, n + 1)?;
    let h_mixed = fit_counts(1, n)?;
    let h_mixed_prev = fit_counts(1, n - 1)?;
    let loss_b_pure = crate::domain::loss_eval(&inst.loss, &inst.b, &h_pure_b)?;
    let loss_b_mixed = crate::domain::loss_eval(&inst.loss, &inst.b, &h_mixed)?;
    let loss_b_mixed_prev = crate::domain::loss_eval(&inst.loss, &inst.b, &h_mixed_prev)?;
    let margin = -loss_b_pure + (n as f64 + 1.0) * loss_b_mixed - n as f64 * loss_b_mixed_prev;
    let learning_rate_ratio = if loss_b_mixed_prev != 0.0 {
        Some((loss_b_mixed - loss_b_pure / (n as f64 + 1.0)) / loss_b_mixed_prev)
    } else {
        None
    };
    Ok(TwoPointReport {
        n,
        h_pure_b,
        h_mixed,
        h_mixed_prev,
        loss_b_pure,
        loss_b_mixed,
        loss_b_mixed_prev,
        margin,
        learning_rate_ratio,
    })
}

/// The margin alone; positive implies local nonmonotonicity at n on {a, b}.
pub fn two_point_margin(inst: &TwoPointInstance) -> Result<f64> {
    Ok(two_point_report(inst)?.margin)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QCounterexample {
    /// Probability of the point a.
    pub q: f64,
    /// Exact risk increase E R(n+1) - E R(n) achieved at q.
    pub delta: f64,
}

/// Search for a mixing probability q such that the exact risk difference at
/// `inst.n` on the distribution {a with probability q, b with 1 - q} is
/// positive.
///
/// A positive margin makes the difference positive for q small enough, so the
/// scan walks the geometric grid 2^-1, ..., 2^-40; the first hit is then
/// refined by a bracketed maximum search over ln q so the reported sign rests
/// on the largest delta found nearby. Returns None when no grid point works.
pub fn find_counterexample_q(
    engine: &Engine,
    inst: &TwoPointInstance,
) -> Result<Option<QCounterexample>> {
    let delta_at = |q: f64| -> Result<f64> {
        let dist = DiscreteDistribution::two_point(inst.a.clone(), q, inst.b.clone())?;
        local_delta(engine, &inst.learner, &dist, &inst.loss, inst.n)
    };
    for i in 1..=40u32 {
        let q = 2.0f64.powi(-(i as i32));
        let delta = delta_at(q)?;
        if delta > 0.0 {
            let mut best = QCounterexample { q, delta };
            let mut lo = (0.5 * q).ln();
            let mut hi = (2.0 * q).min(0.5).ln();
            for _ in 0..24 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                let d1 = delta_at(m1.exp())?;
                let d2 = delta_at(m2.exp())?;
                if d1 > best.delta {
                    best = QCounterexample {
                        q: m1.exp(),
                        delta: d1,
                    };
                }
                if d2 > best.delta {
                    best = QCounterexample {
                        q: m2.exp(),
                        delta: d2,
                    };
                }
                if d1 < d2 {
                    lo = m1;
                } else {
                    hi = m2;
                }
            }
            return Ok(Some(best));
        }
    }
    Ok(None)
}

/// Exact expected negative log-likelihood of the fixed-covariance Gaussian
/// mean estimator at sample size n:
/// d/2 ln(2 pi) + 1/2 ln|Sigma| + 1/2 (1 + 1/n) T, where T is the expected
/// squared Mahalanobis deviation of z from the distribution mean under
/// Sigma^{-1}. Strictly decreasing in n whenever T > 0.
pub fn gaussian_mean_closed_form(
    dist: &DiscreteDistribution,
    sigma: &SpdMatrix,
    n: u32,
) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid("closed form needs n >= 1"));
    }
    let d = sigma.dim();
    let mut mean = vec![KahanSum::new(); d];
    for (point, &p) in dist.points().iter().zip(dist.probs()) {
        let z = point
            .as_plain()
            .ok_or_else(|| Error::mismatch("closed form needs plain points"))?;
        if z.len() != d {
            return Err(Error::mismatch("point dimension does not match sigma"));
        }
        for (m, v) in mean.iter_mut().zip(z) {
            m.add(p * v);
        }
    }
    let mean: Vec<f64> = mean.iter().map(|m| m.value()).collect();
    let mut t = KahanSum::new();
    for (point, &p) in dist.points().iter().zip(dist.probs()) {
        let z = point.as_plain().unwrap();
        let diff: Vec<f64> = z.iter().zip(&mean).map(|(a, b)| a - b).collect();
        t.add(p * sigma.inv_quad_form(&diff));
    }
    Ok(0.5 * d as f64 * LN_2PI + 0.5 * sigma.ln_det() + 0.5 * (1.0 + 1.0 / n as f64) * t.value())
}

// Risk of the fitted hypothesis under the sampled distribution; used by tests.
#[allow(dead_code)]
pub(crate) fn risk_of_fit(
    spec: &LearnerSpec,
    dist: &DiscreteDistribution,
    loss: &LossKind,
    sample: &WeightedSample,
) -> Result<f64> {
    population_risk(dist, &fit(spec, sample)?, loss)
}
