//! Domain types: data points, finite-support distributions, losses,
//! hypotheses, and the population risk functional.
//!
//! Everything here is immutable after construction and all operations are pure
//! functions, so the types can be shared freely across threads.

use crate::error::{Error, Result};
use crate::linalg;
use crate::numeric::KahanSum;
use serde::{Deserialize, Serialize};

const LN_2PI: f64 = 1.8378770664093453;

/// One element of the data domain: either a plain observation `z` in R^d, or a
/// labeled pair `(x, y)` for supervised losses. Scalars are plain observations
/// of dimension one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataPoint {
    Labeled {
        #[serde(with = "scalar_or_vec")]
        x: Vec<f64>,
        y: f64,
    },
    Plain {
        #[serde(with = "scalar_or_vec")]
        z: Vec<f64>,
    },
}

impl DataPoint {
    pub fn scalar(z: f64) -> Self {
        DataPoint::Plain { z: vec![z] }
    }

    pub fn vector(z: Vec<f64>) -> Self {
        DataPoint::Plain { z }
    }

    pub fn labeled(x: Vec<f64>, y: f64) -> Self {
        DataPoint::Labeled { x, y }
    }

    /// Convenience for the ubiquitous one-dimensional supervised case.
    pub fn labeled1(x: f64, y: f64) -> Self {
        DataPoint::Labeled { x: vec![x], y }
    }

    /// Dimension of the input part (x for labeled points, z otherwise).
    pub fn input_dim(&self) -> usize {
        match self {
            DataPoint::Labeled { x, .. } => x.len(),
            DataPoint::Plain { z } => z.len(),
        }
    }

    pub fn as_plain(&self) -> Option<&[f64]> {
        match self {
            DataPoint::Plain { z } => Some(z),
            DataPoint::Labeled { .. } => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            DataPoint::Plain { z } if z.len() == 1 => Some(z[0]),
            _ => None,
        }
    }

    pub fn as_labeled(&self) -> Option<(&[f64], f64)> {
        match self {
            DataPoint::Labeled { x, y } => Some((x, *y)),
            DataPoint::Plain { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            DataPoint::Labeled { x, y } => y.is_finite() && x.iter().all(|v| v.is_finite()),
            DataPoint::Plain { z } => z.iter().all(|v| v.is_finite()),
        }
    }

    fn same_shape(&self, other: &DataPoint) -> bool {
        matches!(
            (self, other),
            (DataPoint::Labeled { .. }, DataPoint::Labeled { .. })
                | (DataPoint::Plain { .. }, DataPoint::Plain { .. })
        ) && self.input_dim() == other.input_dim()
    }

    /// Bit-pattern key: support points are config constants, so distinctness
    /// and lookup use exact bitwise comparison rather than float tolerance.
    pub(crate) fn bits_key(&self) -> (u8, Vec<u64>) {
        match self {
            DataPoint::Plain { z } => (0, z.iter().map(|v| v.to_bits()).collect()),
            DataPoint::Labeled { x, y } => {
                let mut bits: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                bits.push(y.to_bits());
                (1, bits)
            }
        }
    }

    pub fn bitwise_eq(&self, other: &DataPoint) -> bool {
        self.bits_key() == other.bits_key()
    }
}

mod scalar_or_vec {
    //! Accept `1.0` or `[1.0, 2.0]` for point coordinates; emit the scalar
    //! form when the dimension is one.
    use serde::de::{self, Deserializer};
    use serde::ser::Serializer;
    use serde::{Deserialize, Serialize};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Scalar(f64),
        Vector(Vec<f64>),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Scalar(v) => Ok(vec![v]),
            Raw::Vector(v) if !v.is_empty() => Ok(v),
            Raw::Vector(_) => Err(de::Error::custom("coordinate vector must be non-empty")),
        }
    }

    pub fn serialize<S: Serializer>(v: &Vec<f64>, s: S) -> Result<S::Ok, S::Error> {
        if v.len() == 1 {
            v[0].serialize(s)
        } else {
            v.serialize(s)
        }
    }
}

/// A probability distribution with finite support.
///
/// Probabilities must be strictly positive and sum to one within 1e-12; they
/// are renormalized by their exact sum on construction. Support points must be
/// pairwise distinct (bitwise) and share one shape (variant and dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct DiscreteDistribution {
    points: Vec<DataPoint>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    points: Vec<DataPoint>,
    probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;
    fn try_from(raw: RawDistribution) -> Result<Self> {
        DiscreteDistribution::new(raw.points, raw.probs)
    }
}

impl From<DiscreteDistribution> for RawDistribution {
    fn from(d: DiscreteDistribution) -> Self {
        RawDistribution {
            points: d.points,
            probs: d.probs,
        }
    }
}

impl DiscreteDistribution {
    pub fn new(points: Vec<DataPoint>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("distribution needs at least one point"));
        }
        if points.len() != probs.len() {
            return Err(Error::invalid(format!(
                "{} points but {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        for p in &points {
            if !p.is_finite() {
                return Err(Error::invalid("support points must be finite"));
            }
            if !p.same_shape(&points[0]) {
                return Err(Error::invalid(
                    "all support points must share one variant and dimension",
                ));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i].bitwise_eq(&points[j]) {
                    return Err(Error::invalid(format!(
                        "support points {i} and {j} are identical"
                    )));
                }
            }
        }
        if probs.iter().any(|&p| !p.is_finite() || p <= 0.0) {
            return Err(Error::invalid("probabilities must be finite and > 0"));
        }
        let mut sum = KahanSum::new();
        for &p in &probs {
            sum.add(p);
        }
        let total = sum.value();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        let probs = probs.iter().map(|p| p / total).collect();
        Ok(Self { points, probs })
    }

    /// Two-point distribution `{a with probability q, b with 1 - q}`.
    pub fn two_point(a: DataPoint, q: f64, b: DataPoint) -> Result<Self> {
        Self::new(vec![a, b], vec![q, 1.0 - q])
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn input_dim(&self) -> usize {
        self.points[0].input_dim()
    }

    /// FNV-1a hash over point and probability bit patterns; identifies a
    /// distribution in curve metadata.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |b: u64| {
            for byte in b.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for p in &self.points {
            let (tag, bits) = p.bits_key();
            eat(tag as u64);
            for b in bits {
                eat(b);
            }
        }
        for p in &self.probs {
            eat(p.to_bits());
        }
        format!("{h:016x}")
    }
}

/// Symmetric positive definite matrix with its Cholesky factor cached.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SpdMatrix {
    dim: usize,
    data: Vec<f64>,
    chol: Vec<f64>,
    ln_det: f64,
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data == other.data
    }
}

impl TryFrom<Vec<Vec<f64>>> for SpdMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SpdMatrix::new(rows)
    }
}

impl From<SpdMatrix> for Vec<Vec<f64>> {
    fn from(m: SpdMatrix) -> Self {
        m.rows()
    }
}

impl SpdMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let data = check_square_symmetric(&rows)?;
        let dim = rows.len();
        let chol = linalg::cholesky(&data, dim)
            .ok_or_else(|| Error::invalid("matrix is not positive definite"))?;
        let ln_det = 2.0 * (0..dim).map(|i| chol[i * dim + i].ln()).sum::<f64>();
        Ok(Self {
            dim,
            data,
            chol,
            ln_det,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![vec![0.0; dim]; dim];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self::new(rows).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ln_det(&self) -> f64 {
        self.ln_det
    }

    /// v' Sigma^{-1} v via the cached factor.
    pub fn inv_quad_form(&self, v: &[f64]) -> f64 {
        let x = linalg::cholesky_solve(&self.chol, self.dim, v);
        linalg::dot(v, &x)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }
}

/// Symmetric positive semi-definite matrix (no inverse needed).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PsdMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl PartialEq for PsdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data == other.data
    }
}

impl TryFrom<Vec<Vec<f64>>> for PsdMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        PsdMatrix::new(rows)
    }
}

impl From<PsdMatrix> for Vec<Vec<f64>> {
    fn from(m: PsdMatrix) -> Self {
        (0..m.dim)
            .map(|i| m.data[i * m.dim..(i + 1) * m.dim].to_vec())
            .collect()
    }
}

impl PsdMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let data = check_square_symmetric(&rows)?;
        let dim = rows.len();
        let (values, _) = linalg::jacobi_eigen(&data, dim);
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if values.iter().any(|&v| v < -1e-12 * max_abs) {
            return Err(Error::invalid("matrix is not positive semi-definite"));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// v' Sigma v.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        linalg::dot(v, &linalg::mat_vec(&self.data, self.dim, v))
    }
}

fn check_square_symmetric(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = rows.len();
    if dim == 0 {
        return Err(Error::invalid("matrix must be non-empty"));
    }
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid("matrix must be square"));
    }
    let mut data = Vec::with_capacity(dim * dim);
    let mut max_abs = 0.0f64;
    for row in rows {
        for &v in row {
            if !v.is_finite() {
                return Err(Error::invalid("matrix entries must be finite"));
            }
            max_abs = max_abs.max(v.abs());
            data.push(v);
        }
    }
    for i in 0..dim {
        for j in i + 1..dim {
            if (data[i * dim + j] - data[j * dim + i]).abs() > 1e-12 * max_abs.max(1.0) {
                return Err(Error::invalid("matrix must be symmetric"));
            }
            // Symmetrize so downstream factorizations see an exactly symmetric matrix.
            let avg = 0.5 * (data[i * dim + j] + data[j * dim + i]);
            data[i * dim + j] = avg;
            data[j * dim + i] = avg;
        }
    }
    Ok(data)
}

/// The loss functions the learners optimize and are evaluated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    /// (x'w - y)^2 on labeled points with a linear hypothesis.
    Squared,
    /// |x'w - y| on labeled points with a linear hypothesis.
    Absolute,
    /// max(0, 1 - y x'w), labels in {-1, +1}.
    Hinge,
    /// 0/1 classification error; linear hypotheses predict sign(x'w + c)
    /// with sign(0) = +1, lookup hypotheses predict from their table.
    ZeroOne,
    /// Negative log-likelihood of N(mu, Sigma) with Sigma fixed.
    NllGaussianMean { sigma: SpdMatrix },
    /// Negative log-likelihood of N(0, sigma^2) in one dimension.
    NllGaussianVariance,
    /// (z - h)' Sigma (z - h) for a point hypothesis h.
    Mahalanobis { sigma: PsdMatrix },
}

/// A fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    Linear {
        weights: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intercept: Option<f64>,
    },
    GaussianMean {
        mean: Vec<f64>,
    },
    GaussianVariance {
        variance: f64,
    },
    Lookup {
        table: LookupTable,
    },
}

impl Hypothesis {
    /// Linear response x'w + c.
    pub fn linear_response(&self, x: &[f64]) -> Result<f64> {
        match self {
            Hypothesis::Linear { weights, intercept } => {
                if weights.len() != x.len() {
                    return Err(Error::mismatch(format!(
                        "linear hypothesis has dimension {}, point has {}",
                        weights.len(),
                        x.len()
                    )));
                }
                Ok(linalg::dot(weights, x) + intercept.unwrap_or(0.0))
            }
            _ => Err(Error::mismatch("expected a linear hypothesis")),
        }
    }

    /// Classification label for the zero-one loss.
    pub fn predict_label(&self, x: &[f64]) -> Result<f64> {
        match self {
            Hypothesis::Linear { .. } => {
                let r = self.linear_response(x)?;
                Ok(if r >= 0.0 { 1.0 } else { -1.0 })
            }
            Hypothesis::Lookup { table } => Ok(table.label_for(x)),
            _ => Err(Error::mismatch("hypothesis cannot classify")),
        }
    }
}

/// Classification table used by the memorize and histogram learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupTable {
    #[serde(flatten)]
    pub kind: TableKind,
    pub default_label: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "table", rename_all = "snake_case")]
pub enum TableKind {
    /// Exact-match table keyed on the input's bit pattern.
    Exact { entries: Vec<TableEntry> },
    /// One label per bin of a fixed one-dimensional partition; bin `i` is
    /// `[edges[i-1], edges[i])`, with the open ends below `edges[0]` and at or
    /// above the last edge. `None` marks empty or tied bins.
    Binned {
        edges: Vec<f64>,
        labels: Vec<Option<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    #[serde(with = "scalar_or_vec")]
    pub x: Vec<f64>,
    pub label: f64,
}

impl LookupTable {
    pub fn label_for(&self, x: &[f64]) -> f64 {
        match &self.kind {
            TableKind::Exact { entries } => {
                let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                entries
                    .iter()
                    .find(|e| {
                        e.x.len() == x.len()
                            && e.x.iter().map(|v| v.to_bits()).eq(key.iter().copied())
                    })
                    .map(|e| e.label)
                    .unwrap_or(self.default_label)
            }
            TableKind::Binned { edges, labels } => {
                let idx = edges.partition_point(|&e| e <= x[0]);
                labels[idx].unwrap_or(self.default_label)
            }
        }
    }
}

fn require_pm_one(y: f64, loss: &str) -> Result<()> {
    if y == 1.0 || y == -1.0 {
        Ok(())
    } else {
        Err(Error::mismatch(format!(
            "{loss} loss requires labels in {{-1, +1}}, got {y}"
        )))
    }
}

/// Pointwise loss of hypothesis `h` on point `z`.
pub fn loss_eval(loss: &LossKind, z: &DataPoint, h: &Hypothesis) -> Result<f64> {
    match loss {
        LossKind::Squared => {
            let (x, y) = z
                .as_labeled()
                .ok_or_else(|| Error::mismatch("squared loss needs labeled points"))?;
            let r = h.linear_response(x)? - y;
            Ok(r * r)
        }
        LossKind::Absolute => {
            let (x, y) = z
                .as_labeled()
                .ok_or_else(|| Error::mismatch("absolute loss needs labeled points"))?;
            Ok((h.linear_response(x)? - y).abs())
        }
        LossKind::Hinge => {
            let (x, y) = z
                .as_labeled()
                .ok_or_else(|| Error::mismatch("hinge loss needs labeled points"))?;
            require_pm_one(y, "hinge")?;
            Ok((1.0 - y * h.linear_response(x)?).max(0.0))
        }
        LossKind::ZeroOne => {
            let (x, y) = z
                .as_labeled()
                .ok_or_else(|| Error::mismatch("zero-one loss needs labeled points"))?;
            require_pm_one(y, "zero-one")?;
            Ok(if h.predict_label(x)? == y { 0.0 } else { 1.0 })
        }
        LossKind::NllGaussianMean { sigma } => {
            let z = z
                .as_plain()
                .ok_or_else(|| Error::mismatch("Gaussian-mean NLL needs plain points"))?;
            let mean = match h {
                Hypothesis::GaussianMean { mean } => mean,
                _ => return Err(Error::mismatch("Gaussian-mean NLL needs a mean hypothesis")),
            };
            if z.len() != sigma.dim() || mean.len() != sigma.dim() {
                return Err(Error::mismatch(format!(
                    "dimension mismatch: point {}, mean {}, sigma {}",
                    z.len(),
                    mean.len(),
                    sigma.dim()
                )));
            }
            let diff: Vec<f64> = z.iter().zip(mean).map(|(a, b)| a - b).collect();
            Ok(0.5 * sigma.dim() as f64 * LN_2PI
                + 0.5 * sigma.ln_det()
                + 0.5 * sigma.inv_quad_form(&diff))
        }
        LossKind::NllGaussianVariance => {
            let z = z
                .as_scalar()
                .ok_or_else(|| Error::mismatch("variance NLL needs scalar points"))?;
            let variance = match h {
                Hypothesis::GaussianVariance { variance } => *variance,
                _ => return Err(Error::mismatch("variance NLL needs a variance hypothesis")),
            };
            if !variance.is_finite() || variance <= 0.0 {
                return Err(Error::mismatch(format!(
                    "variance must be positive, got {variance}"
                )));
            }
            Ok(0.5 * variance.ln() + z * z / (2.0 * variance) + 0.5 * LN_2PI)
        }
        LossKind::Mahalanobis { sigma } => {
            let z = z
                .as_plain()
                .ok_or_else(|| Error::mismatch("Mahalanobis loss needs plain points"))?;
            let mean = match h {
                Hypothesis::GaussianMean { mean } => mean,
                _ => return Err(Error::mismatch("Mahalanobis loss needs a point hypothesis")),
            };
            if z.len() != sigma.dim() || mean.len() != sigma.dim() {
                return Err(Error::mismatch("dimension mismatch in Mahalanobis loss"));
            }
            let diff: Vec<f64> = z.iter().zip(mean).map(|(a, b)| a - b).collect();
            Ok(sigma.quad_form(&diff))
        }
    }
}

/// Population risk: the probability-weighted average loss over the support.
pub fn population_risk(
    dist: &DiscreteDistribution,
    h: &Hypothesis,
    loss: &LossKind,
) -> Result<f64> {
    let mut acc = KahanSum::new();
    for (point, &p) in dist.points().iter().zip(dist.probs()) {
        acc.add(p * loss_eval(loss, point, h)?);
    }
    Ok(acc.value())
}
