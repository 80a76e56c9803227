//! Empirical risk minimizers: weighted closed-form solvers for every learner
//! the engine can evaluate, plus the population-weight fit that yields the
//! infinite-sample limit.
//!
//! Weighted empirical risk is `sum_i w_i l(z_i, h) / sum_i w_i`; minimizers do
//! not depend on the normalization, so solvers work with the unnormalized sum.
//! Ties among minimizers resolve to the minimum-norm element (the element of
//! smallest absolute value in one dimension).

use crate::domain::{
    DataPoint, DiscreteDistribution, Hypothesis, LookupTable, LossKind, SpdMatrix, TableEntry,
    TableKind,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::numeric::KahanSum;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative cutoff under which singular values of the normal system are
/// treated as zero when forming the pseudo-inverse.
pub const DEFAULT_PINV_CUTOFF: f64 = 1e-10;

// Relative slack for detecting exactly tied minimizers in the piecewise-linear
// solvers; far above accumulated rounding, far below any genuine gap.
const TIE_REL_TOL: f64 = 1e-9;

/// A multiset of data points with positive weights — the only training input
/// learners ever see. Integer counts of repeated points act as weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(DataPoint, f64)>", into = "Vec<(DataPoint, f64)>")]
pub struct WeightedSample {
    items: Vec<(DataPoint, f64)>,
}

impl TryFrom<Vec<(DataPoint, f64)>> for WeightedSample {
    type Error = Error;
    fn try_from(items: Vec<(DataPoint, f64)>) -> Result<Self> {
        WeightedSample::new(items)
    }
}

impl From<WeightedSample> for Vec<(DataPoint, f64)> {
    fn from(s: WeightedSample) -> Self {
        s.items
    }
}

impl WeightedSample {
    pub fn new(items: Vec<(DataPoint, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid("sample must contain at least one item"));
        }
        for (point, w) in &items {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::invalid(format!(
                    "sample weights must be finite and > 0, got {w}"
                )));
            }
            if !point.is_finite() {
                return Err(Error::invalid("sample points must be finite"));
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(DataPoint, f64)] {
        &self.items
    }

    pub fn total_weight(&self) -> f64 {
        let mut s = KahanSum::new();
        for (_, w) in &self.items {
            s.add(*w);
        }
        s.value()
    }

    /// Normalized weighted empirical risk of a hypothesis on this sample.
    pub fn empirical_risk(&self, h: &Hypothesis, loss: &LossKind) -> Result<f64> {
        let mut s = KahanSum::new();
        for (point, w) in &self.items {
            s.add(w * crate::domain::loss_eval(loss, point, h)?);
        }
        Ok(s.value() / self.total_weight())
    }
}

/// Which empirical risk minimizer to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    /// Weighted least squares, minimum-norm in the underdetermined case.
    /// With `ridge_lambda0 > 0` the penalty decays with sample size: fitting a
    /// sample of total weight n minimizes
    /// `sum_i w_i (x_i'w + c - y_i)^2 + (ridge_lambda0 / n) * |(w, c)|^2`.
    LinearSquared {
        #[serde(default)]
        intercept: bool,
        #[serde(default)]
        ridge_lambda0: f64,
    },
    /// One-dimensional least absolute deviations through the origin.
    LinearAbsolute,
    /// One-dimensional hinge-loss minimizer through the origin.
    LinearHinge,
    /// Mean of a Gaussian with fixed covariance `sigma`.
    GaussianMeanMle { sigma: SpdMatrix },
    /// Variance of a centered one-dimensional Gaussian.
    GaussianVarianceMle,
    /// Majority label per seen input, `default_label` elsewhere.
    Memorize { default_label: f64 },
    /// Majority label per fixed bin of a one-dimensional partition.
    Histogram {
        bin_edges: Vec<f64>,
        default_label: f64,
    },
}

impl LearnerSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::LinearSquared { ridge_lambda0, .. } => {
                if !ridge_lambda0.is_finite() || *ridge_lambda0 < 0.0 {
                    return Err(Error::invalid(format!(
                        "ridge_lambda0 must be finite and >= 0, got {ridge_lambda0}"
                    )));
                }
            }
            LearnerSpec::Memorize { default_label } => {
                if !default_label.is_finite() {
                    return Err(Error::invalid("default_label must be finite"));
                }
            }
            LearnerSpec::Histogram {
                bin_edges,
                default_label,
            } => {
                if !default_label.is_finite() {
                    return Err(Error::invalid("default_label must be finite"));
                }
                if bin_edges.iter().any(|e| !e.is_finite()) {
                    return Err(Error::invalid("bin edges must be finite"));
                }
                if bin_edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid("bin edges must be strictly increasing"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Fit the empirical risk minimizer for `spec` on a weighted sample.
pub fn fit(spec: &LearnerSpec, sample: &WeightedSample) -> Result<Hypothesis> {
    spec.validate()?;
    match spec {
        LearnerSpec::LinearSquared {
            intercept,
            ridge_lambda0,
        } => {
            let lambda = if *ridge_lambda0 > 0.0 {
                ridge_lambda0 / sample.total_weight()
            } else {
                0.0
            };
            fit_linear_squared(sample, *intercept, lambda)
        }
        LearnerSpec::LinearAbsolute => fit_linear_absolute(sample),
        LearnerSpec::LinearHinge => fit_linear_hinge(sample),
        LearnerSpec::GaussianMeanMle { .. } => fit_gaussian_mean(sample),
        LearnerSpec::GaussianVarianceMle => fit_gaussian_variance(sample),
        LearnerSpec::Memorize { default_label } => fit_memorize(sample, *default_label),
        LearnerSpec::Histogram {
            bin_edges,
            default_label,
        } => fit_histogram(sample, bin_edges, *default_label),
    }
}

/// Fit with weights equal to the distribution's probabilities: the hypothesis
/// the learner reaches in the infinite-sample limit. The ridge penalty decays
/// like 1/n, so the limit fit uses no penalty.
pub fn population_erm(spec: &LearnerSpec, dist: &DiscreteDistribution) -> Result<Hypothesis> {
    let items = dist
        .points()
        .iter()
        .cloned()
        .zip(dist.probs().iter().copied())
        .collect();
    let sample = WeightedSample::new(items)?;
    match spec {
        LearnerSpec::LinearSquared { intercept, .. } => {
            fit_linear_squared(&sample, *intercept, 0.0)
        }
        _ => fit(spec, &sample),
    }
}

fn labeled_items<'a>(sample: &'a WeightedSample, what: &str) -> Result<Vec<(&'a [f64], f64, f64)>> {
    let mut out = Vec::with_capacity(sample.items().len());
    let mut dim = None;
    for (point, w) in sample.items() {
        let (x, y) = point
            .as_labeled()
            .ok_or_else(|| Error::mismatch(format!("{what} requires labeled points")))?;
        match dim {
            None => dim = Some(x.len()),
            Some(d) if d != x.len() => {
                return Err(Error::mismatch(format!(
                    "{what}: inconsistent input dimensions {d} and {}",
                    x.len()
                )))
            }
            _ => {}
        }
        out.push((x, y, *w));
    }
    Ok(out)
}

/// Weighted least squares over the augmented parameter (weights, intercept).
///
/// With `lambda_effective = 0` this is the minimum-Euclidean-norm minimizer,
/// computed through the pseudo-inverse of the weighted normal system with
/// singular values below `DEFAULT_PINV_CUTOFF` times the largest treated as
/// zero. With `lambda_effective > 0` it is the unique minimizer of the
/// penalized objective `sum_i w_i (x_i'w + c - y_i)^2 + lambda |(w, c)|^2`.
pub fn fit_linear_squared(
    sample: &WeightedSample,
    intercept: bool,
    lambda_effective: f64,
) -> Result<Hypothesis> {
    fit_linear_squared_with_cutoff(sample, intercept, lambda_effective, DEFAULT_PINV_CUTOFF)
}

/// As [`fit_linear_squared`] with an explicit pseudo-inverse truncation cutoff.
pub fn fit_linear_squared_with_cutoff(
    sample: &WeightedSample,
    intercept: bool,
    lambda_effective: f64,
    pinv_rel_cutoff: f64,
) -> Result<Hypothesis> {
    if !lambda_effective.is_finite() || lambda_effective < 0.0 {
        return Err(Error::invalid("lambda_effective must be finite and >= 0"));
    }
    let items = labeled_items(sample, "least squares")?;
    let d = items[0].0.len();
    let p = d + usize::from(intercept);
    let m = items.len();
    // Augmented design rows (x_i, 1); weights stay separate so the usual
    // integer-count samples build exact Gram entries.
    let mut rows = vec![0.0; m * p];
    for (i, (x, _, _)) in items.iter().enumerate() {
        rows[i * p..i * p + d].copy_from_slice(x);
        if intercept {
            rows[i * p + d] = 1.0;
        }
    }
    let solution = if lambda_effective > 0.0 && m <= p {
        // Penalized fit with at most as many items as parameters: solve the
        // m-by-m system (X X' + lambda diag(1/w)) gamma = y and take
        // w = X' gamma. The solution stays in the row space, so it degrades
        // gracefully into the minimum-norm fit as lambda shrinks, with none of
        // the null-space noise amplification the normal equations suffer at
        // tiny lambda.
        let mut k = vec![0.0; m * m];
        let mut y = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                k[i * m + j] = linalg::dot(&rows[i * p..(i + 1) * p], &rows[j * p..(j + 1) * p]);
            }
            k[i * m + i] += lambda_effective / items[i].2;
            y[i] = items[i].1;
        }
        let l = linalg::cholesky(&k, m)
            .ok_or_else(|| Error::fit("penalized system is not positive definite"))?;
        let gamma = linalg::cholesky_solve(&l, m, &y);
        let mut w = vec![0.0; p];
        for i in 0..m {
            for r in 0..p {
                w[r] += gamma[i] * rows[i * p + r];
            }
        }
        w
    } else {
        let mut g = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        for (i, (_, y, weight)) in items.iter().enumerate() {
            let row = &rows[i * p..(i + 1) * p];
            for r in 0..p {
                for c in 0..p {
                    g[r * p + c] += weight * row[r] * row[c];
                }
                rhs[r] += weight * row[r] * y;
            }
        }
        if lambda_effective > 0.0 {
            for r in 0..p {
                g[r * p + r] += lambda_effective;
            }
            let l = linalg::cholesky(&g, p)
                .ok_or_else(|| Error::fit("penalized normal system is not positive definite"))?;
            linalg::cholesky_solve(&l, p, &rhs)
        } else {
            linalg::solve_min_norm(&g, &rhs, p, pinv_rel_cutoff)
        }
    };
    Ok(Hypothesis::Linear {
        weights: solution[..d].to_vec(),
        intercept: intercept.then(|| solution[d]),
    })
}

// Interval tie-break shared by the piecewise-linear solvers: the minimizer of
// smallest absolute value in [lo, hi].
fn min_abs_in_interval(lo: f64, hi: f64) -> f64 {
    if lo <= 0.0 && 0.0 <= hi {
        0.0
    } else if lo > 0.0 {
        lo
    } else {
        hi
    }
}

/// One-dimensional least absolute deviations through the origin.
///
/// Minimizes `sum_i w_i |x_i h - y_i| = sum_i (w_i |x_i|) |h - y_i / x_i|`, a
/// weighted median over the ratios. When the minimizer set is an interval the
/// element of smallest absolute value is returned.
pub fn fit_linear_absolute(sample: &WeightedSample) -> Result<Hypothesis> {
    let items = labeled_items(sample, "absolute-loss regression")?;
    if items[0].0.len() != 1 {
        return Err(Error::mismatch(
            "absolute-loss regression is implemented for dimension one",
        ));
    }
    let mut entries: Vec<(f64, f64)> = Vec::with_capacity(items.len());
    for (x, y, w) in &items {
        if x[0] == 0.0 {
            return Err(Error::fit("absolute-loss regression needs all x != 0"));
        }
        entries.push((y / x[0], w * x[0].abs()));
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Merge exactly repeated ratios so interval detection sees distinct knots.
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(entries.len());
    for (r, w) in entries {
        match merged.last_mut() {
            Some((pr, pw)) if *pr == r => *pw += w,
            _ => merged.push((r, w)),
        }
    }
    let mut total = KahanSum::new();
    for (_, w) in &merged {
        total.add(*w);
    }
    let total = total.value();
    let half = 0.5 * total;
    let tol = TIE_REL_TOL * total;
    let mut cum = KahanSum::new();
    for i in 0..merged.len() {
        cum.add(merged[i].1);
        let c = cum.value();
        if c >= half - tol {
            if (c - half).abs() <= tol && i + 1 < merged.len() {
                // Mass splits exactly: the risk is flat between consecutive knots.
                return Ok(h1(min_abs_in_interval(merged[i].0, merged[i + 1].0)));
            }
            return Ok(h1(merged[i].0));
        }
    }
    unreachable!("cumulative weight reaches the total");
}

fn h1(w: f64) -> Hypothesis {
    Hypothesis::Linear {
        weights: vec![w],
        intercept: None,
    }
}

/// One-dimensional hinge-loss minimizer through the origin.
///
/// The weighted hinge risk is convex piecewise-linear with breakpoints at
/// `1 / (y_i x_i)`; evaluating there and at zero covers every minimizer set,
/// and the element of smallest absolute value is returned.
pub fn fit_linear_hinge(sample: &WeightedSample) -> Result<Hypothesis> {
    let items = labeled_items(sample, "hinge-loss classification")?;
    if items[0].0.len() != 1 {
        return Err(Error::mismatch(
            "hinge-loss classification is implemented for dimension one",
        ));
    }
    let mut candidates = vec![0.0f64];
    for (x, y, _) in &items {
        if x[0] == 0.0 {
            return Err(Error::fit("hinge-loss classification needs all x != 0"));
        }
        if *y != 1.0 && *y != -1.0 {
            return Err(Error::mismatch(format!(
                "hinge loss requires labels in {{-1, +1}}, got {y}"
            )));
        }
        candidates.push(1.0 / (y * x[0]));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let risk_at = |h: f64| -> f64 {
        let mut s = KahanSum::new();
        for (x, y, w) in &items {
            s.add(w * (1.0 - y * x[0] * h).max(0.0));
        }
        s.value()
    };
    let risks: Vec<f64> = candidates.iter().map(|&c| risk_at(c)).collect();
    let min_risk = risks.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = TIE_REL_TOL * (1.0 + min_risk.abs());
    let mut best = f64::INFINITY;
    for (c, r) in candidates.iter().zip(&risks) {
        if *r <= min_risk + tol && c.abs() < best.abs() {
            best = *c;
        }
    }
    Ok(h1(best))
}

/// Weight-normalized mean of plain points.
pub fn fit_gaussian_mean(sample: &WeightedSample) -> Result<Hypothesis> {
    let mut dim = None;
    for (point, _) in sample.items() {
        let z = point
            .as_plain()
            .ok_or_else(|| Error::mismatch("mean estimation requires plain points"))?;
        match dim {
            None => dim = Some(z.len()),
            Some(d) if d != z.len() => {
                return Err(Error::mismatch("mean estimation: inconsistent dimensions"))
            }
            _ => {}
        }
    }
    let d = dim.unwrap();
    let total = sample.total_weight();
    let mut mean = vec![KahanSum::new(); d];
    for (point, w) in sample.items() {
        let z = point.as_plain().unwrap();
        for (m, v) in mean.iter_mut().zip(z) {
            m.add(w * v);
        }
    }
    Ok(Hypothesis::GaussianMean {
        mean: mean.iter().map(|m| m.value() / total).collect(),
    })
}

/// Maximum-likelihood variance of a centered Gaussian: the weight-normalized
/// mean of z^2. All points exactly zero leave the likelihood without a
/// maximizer over positive variances, which is a fit error.
pub fn fit_gaussian_variance(sample: &WeightedSample) -> Result<Hypothesis> {
    let mut acc = KahanSum::new();
    let mut all_zero = true;
    for (point, w) in sample.items() {
        let z = point
            .as_scalar()
            .ok_or_else(|| Error::mismatch("variance estimation requires scalar points"))?;
        all_zero &= z == 0.0;
        acc.add(w * z * z);
    }
    if all_zero {
        return Err(Error::fit(
            "variance estimation is undefined when every sample point is zero",
        ));
    }
    Ok(Hypothesis::GaussianVariance {
        variance: acc.value() / sample.total_weight(),
    })
}

// Per-label accumulated weight, keyed on the label's bit pattern so iteration
// order is deterministic.
type LabelWeights = BTreeMap<u64, (f64, f64)>;

// Weighted majority over exact label values; `None` signals a tie.
fn majority(labels: &LabelWeights) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    let mut tied = false;
    for &(label, weight) in labels.values() {
        match best {
            None => best = Some((label, weight)),
            Some((_, bw)) if weight > bw => {
                best = Some((label, weight));
                tied = false;
            }
            Some((_, bw)) if weight == bw => tied = true,
            _ => {}
        }
    }
    match best {
        Some((label, _)) if !tied => Some(label),
        _ => None,
    }
}

/// Memorize: map each distinct training input to its weight-majority label;
/// ties and unseen inputs yield the default label.
pub fn fit_memorize(sample: &WeightedSample, default_label: f64) -> Result<Hypothesis> {
    let items = labeled_items(sample, "memorize")?;
    let mut groups: BTreeMap<Vec<u64>, (Vec<f64>, LabelWeights)> = BTreeMap::new();
    for (x, y, w) in items {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        let entry = groups
            .entry(key)
            .or_insert_with(|| (x.to_vec(), BTreeMap::new()));
        entry.1.entry(y.to_bits()).or_insert((y, 0.0)).1 += w;
    }
    let entries = groups
        .into_values()
        .map(|(x, labels)| TableEntry {
            x,
            label: majority(&labels).unwrap_or(default_label),
        })
        .collect();
    Ok(Hypothesis::Lookup {
        table: LookupTable {
            kind: TableKind::Exact { entries },
            default_label,
        },
    })
}

/// Histogram rule over a fixed one-dimensional partition: each bin takes the
/// weight-majority label of the training points falling in it; ties and empty
/// bins fall back to the default label.
pub fn fit_histogram(
    sample: &WeightedSample,
    bin_edges: &[f64],
    default_label: f64,
) -> Result<Hypothesis> {
    if bin_edges.iter().any(|e| !e.is_finite()) || bin_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "bin edges must be finite and strictly increasing",
        ));
    }
    let items = labeled_items(sample, "histogram")?;
    if items[0].0.len() != 1 {
        return Err(Error::mismatch("histogram rule requires dimension one"));
    }
    let mut bins: Vec<LabelWeights> = vec![BTreeMap::new(); bin_edges.len() + 1];
    for (x, y, w) in items {
        let idx = bin_edges.partition_point(|&e| e <= x[0]);
        bins[idx].entry(y.to_bits()).or_insert((y, 0.0)).1 += w;
    }
    let labels = bins
        .iter()
        .map(|labels| {
            if labels.is_empty() {
                None
            } else {
                majority(labels)
            }
        })
        .collect();
    Ok(Hypothesis::Lookup {
        table: LookupTable {
            kind: TableKind::Binned {
                edges: bin_edges.to_vec(),
                labels,
            },
            default_label,
        },
    })
}
