//! Numerically exact learning curves.
//!
//! The expected risk of a learner at sample size n is an exact finite sum: a
//! training set drawn from a k-point distribution is fully described by how
//! many draws landed on each support point, so the expectation enumerates all
//! count vectors (compositions of n into k parts), weights each fitted
//! hypothesis' population risk by the multinomial probability of its
//! composition, and accumulates with compensated summation. Weights are
//! evaluated in log space so tiny probabilities survive intact.
//!
//! A seeded Monte Carlo estimator ships alongside as an independent oracle for
//! cross-checking the enumeration.

use crate::domain::{DiscreteDistribution, LossKind};
use crate::error::{Error, Result};
use crate::learners::{fit, LearnerSpec, WeightedSample};
use crate::numeric::{ln_factorial, KahanSum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How many training points landed on each support point; sums to n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    counts: Vec<u64>,
}

impl Composition {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }
}

impl std::fmt::Display for Composition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Number of compositions of n into k non-negative parts: C(n + k - 1, k - 1).
/// `None` on u128 overflow.
pub fn composition_count(n: u64, k: usize) -> Option<u128> {
    let mut result: u128 = 1;
    for i in 1..=(k as u128 - 1) {
        result = result.checked_mul(n as u128 + i)?;
        result /= i; // exact: result holds C(n + i, i)
    }
    Some(result)
}

/// Iterator over all compositions of n into k parts, first part descending
/// from n: (n,0,...,0), (n-1,1,0,...), ..., (0,...,0,n).
pub fn compositions(n: u64, k: usize) -> Compositions {
    assert!(k >= 1, "need at least one part");
    let mut first = vec![0u64; k];
    first[0] = n;
    Compositions { next: Some(first) }
}

pub struct Compositions {
    next: Option<Vec<u64>>,
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let current = self.next.take()?;
        let k = current.len();
        // Successor: move one unit from the rightmost non-terminal position
        // down, dumping everything to its right onto the next slot.
        let mut successor = None;
        for i in (0..k.saturating_sub(1)).rev() {
            if current[i] > 0 {
                let mut next = current.clone();
                let tail: u64 = next[i + 1..].iter().sum();
                next[i] -= 1;
                next[i + 1] = tail + 1;
                for c in next[i + 2..].iter_mut() {
                    *c = 0;
                }
                successor = Some(next);
                break;
            }
        }
        self.next = successor;
        Some(Composition { counts: current })
    }
}

/// ln of the multinomial sampling probability of a composition:
/// ln[ n! / prod c_i! * prod p_i^{c_i} ].
pub fn log_multinomial_weight(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len(), "counts and probs must align");
    let ln_probs: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
    log_weight_with(counts, &ln_probs)
}

fn log_weight_with(counts: &[u64], ln_probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut lw = ln_factorial(n);
    for (&c, &lp) in counts.iter().zip(ln_probs) {
        if c > 0 {
            lw += c as f64 * lp - ln_factorial(c);
        }
    }
    lw
}

/// Training sample realizing a composition: counts become integer weights,
/// zero-count support points are dropped.
pub fn sample_from_composition(
    dist: &DiscreteDistribution,
    comp: &Composition,
) -> Result<WeightedSample> {
    let items: Vec<_> = dist
        .points()
        .iter()
        .zip(comp.counts())
        .filter(|(_, &c)| c > 0)
        .map(|(p, &c)| (p.clone(), c as f64))
        .collect();
    WeightedSample::new(items)
}

/// Inclusive range of training-set sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange {
    pub start: u32,
    pub end: u32,
}

impl NRange {
    pub fn new(start: u32, end: u32) -> Result<Self> {
        if start < 1 || end < start {
            return Err(Error::invalid(format!(
                "n range must satisfy 1 <= start <= end, got [{start}, {end}]"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u32,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub learner: LearnerSpec,
    pub loss: LossKind,
    pub support_size: usize,
    pub distribution_digest: String,
    pub arithmetic: String,
}

/// Exact expected risk against training-set size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub entries: Vec<CurvePoint>,
    pub meta: CurveMeta,
}

impl LearningCurve {
    pub fn risks(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.risk).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// The exact-expectation engine. `max_compositions` bounds the enumeration so
/// infeasible (n, k) pairs fail loudly instead of grinding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Engine {
    pub max_compositions: u64,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            max_compositions: 10_000_000,
        }
    }
}

impl Engine {
    /// Exact E[R(A(S_n))] over all training sets of size n drawn from `dist`.
    ///
    /// Any fit failure aborts the whole expectation — skipping compositions
    /// would bias the sum — and the error names the offending composition.
    pub fn expected_risk(
        &self,
        spec: &LearnerSpec,
        dist: &DiscreteDistribution,
        loss: &LossKind,
        n: u32,
    ) -> Result<f64> {
        if n < 1 {
            return Err(Error::invalid("expected risk needs n >= 1"));
        }
        let k = dist.len();
        let needed = composition_count(n as u64, k).unwrap_or(u128::MAX);
        if needed > self.max_compositions as u128 {
            return Err(Error::Capacity {
                n,
                k,
                needed,
                cap: self.max_compositions,
            });
        }
        let ln_probs: Vec<f64> = dist.probs().iter().map(|p| p.ln()).collect();
        let mut acc = KahanSum::new();
        for comp in compositions(n as u64, k) {
            let lw = log_weight_with(comp.counts(), &ln_probs);
            let sample = sample_from_composition(dist, &comp)?;
            let hypothesis = fit(spec, &sample).map_err(|e| match e {
                Error::Fit(msg) => Error::Fit(format!("n={n}, composition {comp}: {msg}")),
                other => other,
            })?;
            let risk = crate::domain::population_risk(dist, &hypothesis, loss)?;
            acc.add(lw.exp() * risk);
        }
        Ok(acc.value())
    }

    /// Exact curve over an inclusive range of n. Entries are independent and
    /// evaluated in parallel; each entry's summation stays sequential, so the
    /// result is deterministic.
    pub fn learning_curve(
        &self,
        spec: &LearnerSpec,
        dist: &DiscreteDistribution,
        loss: &LossKind,
        range: NRange,
    ) -> Result<LearningCurve> {
        let ns: Vec<u32> = range.iter().collect();
        let entries = ns
            .par_iter()
            .map(|&n| {
                self.expected_risk(spec, dist, loss, n)
                    .map(|risk| CurvePoint { n, risk })
                    .map_err(|e| annotate_n(e, n))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LearningCurve {
            entries,
            meta: CurveMeta {
                learner: spec.clone(),
                loss: loss.clone(),
                support_size: dist.len(),
                distribution_digest: dist.digest(),
                arithmetic: "f64, log-space weights, compensated summation".to_string(),
            },
        })
    }

    /// Seeded Monte Carlo estimate of the same expectation: draw `replicates`
    /// training sets of size n, fit, average the population risk. Returns the
    /// mean and its standard error; identical seeds give identical output.
    pub fn mc_expected_risk(
        &self,
        spec: &LearnerSpec,
        dist: &DiscreteDistribution,
        loss: &LossKind,
        n: u32,
        replicates: u64,
        seed: u64,
    ) -> Result<McEstimate> {
        if n < 1 || replicates < 1 {
            return Err(Error::invalid(
                "Monte Carlo needs n >= 1 and replicates >= 1",
            ));
        }
        let k = dist.len();
        let mut cdf = Vec::with_capacity(k);
        let mut acc = 0.0;
        for &p in dist.probs() {
            acc += p;
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; k];
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for rep in 1..=replicates {
            counts.iter_mut().for_each(|c| *c = 0);
            for _ in 0..n {
                let u: f64 = rng.random();
                let idx = cdf.iter().position(|&c| u < c).unwrap_or(k - 1);
                counts[idx] += 1;
            }
            let comp = Composition {
                counts: counts.clone(),
            };
            let sample = sample_from_composition(dist, &comp)?;
            let hypothesis = fit(spec, &sample)?;
            let risk = crate::domain::population_risk(dist, &hypothesis, loss)?;
            let delta = risk - mean;
            mean += delta / rep as f64;
            m2 += delta * (risk - mean);
        }
        let std_error = if replicates > 1 {
            (m2 / (replicates - 1) as f64 / replicates as f64).sqrt()
        } else {
            0.0
        };
        Ok(McEstimate { mean, std_error })
    }
}

fn annotate_n(e: Error, n: u32) -> Error {
    match e {
        Error::Invalid(m) => Error::Invalid(format!("at n={n}: {m}")),
        Error::Mismatch(m) => Error::Mismatch(format!("at n={n}: {m}")),
        other => other,
    }
}
