//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

use monotone_lab_core::{DataPoint, DiscreteDistribution, SpdMatrix, WeightedSample};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Probabilities proportional to small positive integers: exactly summable and
/// bounded away from zero.
pub fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let counts: Vec<u32> = (0..k).map(|_| rng.random_range(1..=9)).collect();
    let total: u32 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Grid coordinate in [-1, 1] with spacing 0.25, optionally excluding zero.
pub fn grid_coord(rng: &mut ChaCha8Rng, nonzero: bool) -> f64 {
    loop {
        let v = rng.random_range(-4i32..=4) as f64 * 0.25;
        if !nonzero || v != 0.0 {
            return v;
        }
    }
}

/// Labeled distribution with pairwise-distinct inputs and labels in {-1, +1}:
/// each input carries exactly one label, so the memorize and histogram rules
/// are provably monotone on it.
pub fn random_realizable_distribution(rng: &mut ChaCha8Rng, max_k: usize) -> DiscreteDistribution {
    let k = rng.random_range(2..=max_k);
    let mut xs: Vec<f64> = Vec::new();
    while xs.len() < k {
        let v = grid_coord(rng, false);
        if !xs.contains(&v) {
            xs.push(v);
        }
    }
    let points = xs
        .iter()
        .map(|&x| {
            DataPoint::labeled1(
                x,
                if rng.random_range(0..2) == 0 {
                    -1.0
                } else {
                    1.0
                },
            )
        })
        .collect();
    let probs = random_probs(rng, k);
    DiscreteDistribution::new(points, probs).expect("generated distribution is valid")
}

/// Bin edges at midpoints between consecutive distinct support inputs, so each
/// support point sits in its own bin.
pub fn isolating_edges(dist: &DiscreteDistribution) -> Vec<f64> {
    let mut xs: Vec<f64> = dist
        .points()
        .iter()
        .map(|p| p.as_labeled().expect("labeled support").0[0])
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Plain-point distribution on a coordinate grid with at least two distinct
/// points, for the Gaussian-mean experiments.
pub fn random_plain_distribution(
    rng: &mut ChaCha8Rng,
    max_k: usize,
    dim: usize,
) -> DiscreteDistribution {
    let k = rng.random_range(2..=max_k);
    let mut points: Vec<DataPoint> = Vec::new();
    while points.len() < k {
        let z: Vec<f64> = (0..dim).map(|_| grid_coord(rng, false)).collect();
        let candidate = DataPoint::vector(z);
        if !points.iter().any(|p| p.bitwise_eq(&candidate)) {
            points.push(candidate);
        }
    }
    let probs = random_probs(rng, k);
    DiscreteDistribution::new(points, probs).expect("generated distribution is valid")
}

/// Random SPD covariance: diagonal entries in [0.5, 2], correlation in
/// {-0.25, 0, 0.25}.
pub fn random_spd(rng: &mut ChaCha8Rng, dim: usize) -> SpdMatrix {
    let diag: Vec<f64> = (0..dim)
        .map(|_| 0.5 + 0.5 * rng.random_range(0..=3) as f64)
        .collect();
    let mut rows = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        rows[i][i] = diag[i];
    }
    if dim == 2 {
        let rho = 0.25 * (rng.random_range(-1i32..=1) as f64);
        let off = rho * (diag[0] * diag[1]).sqrt();
        rows[0][1] = off;
        rows[1][0] = off;
    }
    SpdMatrix::new(rows).expect("generated covariance is SPD")
}

/// Random labeled sample on the coordinate grid; labels are {-1, +1} when
/// `pm_labels`, otherwise grid values. Inputs avoid zero when `nonzero_x`.
pub fn random_labeled_sample(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_items: usize,
    pm_labels: bool,
    nonzero_x: bool,
) -> WeightedSample {
    let m = rng.random_range(1..=max_items);
    let items = (0..m)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| grid_coord(rng, nonzero_x)).collect();
            let y = if pm_labels {
                if rng.random_range(0..2) == 0 {
                    -1.0
                } else {
                    1.0
                }
            } else {
                grid_coord(rng, false)
            };
            let w = 0.25 * rng.random_range(1..=16) as f64;
            (DataPoint::labeled(x, y), w)
        })
        .collect();
    WeightedSample::new(items).expect("generated sample is valid")
}

/// Random scalar plain-point sample.
pub fn random_scalar_sample(
    rng: &mut ChaCha8Rng,
    max_items: usize,
    nonzero_z: bool,
) -> WeightedSample {
    let m = rng.random_range(1..=max_items);
    let items = (0..m)
        .map(|_| {
            let z = grid_coord(rng, nonzero_z);
            let w = 0.25 * rng.random_range(1..=16) as f64;
            (DataPoint::scalar(z), w)
        })
        .collect();
    WeightedSample::new(items).expect("generated sample is valid")
}
