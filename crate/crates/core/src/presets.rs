//! Built-in experiment presets: the four one-dimensional setups whose exact
//! curves the tool reproduces, each a tiny finite-support distribution paired
//! with the learner and loss it stresses.

use crate::curve::NRange;
use crate::domain::{DataPoint, DiscreteDistribution, LossKind};
use crate::learners::LearnerSpec;

/// One curve to compute: a distribution, a learner, and the matching loss.
#[derive(Debug, Clone)]
pub struct PresetCurve {
    pub name: &'static str,
    pub distribution: DiscreteDistribution,
    pub learner: LearnerSpec,
    pub loss: LossKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Squared loss, no intercept, a rare far point: the curve climbs above
    /// the infinite-sample risk before converging.
    Fig1a,
    /// Absolute loss: a sawtooth curve with persistent risk increases.
    Fig1b,
    /// Squared loss with and without a 1/n ridge penalty: the plain fit is
    /// monotone, the penalized one is not.
    Fig1c,
    /// Squared loss with an intercept on three points: nonmonotone even
    /// though nothing is pinned to the origin.
    Fig1d,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig1a, Figure::Fig1b, Figure::Fig1c, Figure::Fig1d];

    pub fn id(&self) -> &'static str {
        match self {
            Figure::Fig1a => "fig1a",
            Figure::Fig1b => "fig1b",
            Figure::Fig1c => "fig1c",
            Figure::Fig1d => "fig1d",
        }
    }

    pub fn parse(s: &str) -> Option<Figure> {
        Figure::ALL.iter().copied().find(|f| f.id() == s)
    }

    /// Default size range for preset curves.
    pub fn default_range() -> NRange {
        NRange::new(1, 100).expect("static range is valid")
    }

    pub fn curves(&self) -> Vec<PresetCurve> {
        match self {
            Figure::Fig1a => vec![PresetCurve {
                name: "fig1a",
                distribution: two_point_ab(1e-5),
                learner: plain_squared(false, 0.0),
                loss: LossKind::Squared,
            }],
            Figure::Fig1b => vec![PresetCurve {
                name: "fig1b",
                distribution: two_point_ab(0.1),
                learner: LearnerSpec::LinearAbsolute,
                loss: LossKind::Absolute,
            }],
            Figure::Fig1c => vec![
                PresetCurve {
                    name: "fig1c_plain",
                    distribution: two_point_ab(0.01),
                    learner: plain_squared(false, 0.0),
                    loss: LossKind::Squared,
                },
                PresetCurve {
                    name: "fig1c_ridge",
                    distribution: two_point_ab(0.01),
                    learner: plain_squared(false, 0.01),
                    loss: LossKind::Squared,
                },
            ],
            Figure::Fig1d => vec![PresetCurve {
                name: "fig1d",
                distribution: DiscreteDistribution::new(
                    vec![
                        DataPoint::labeled1(1.0, 1.0),
                        DataPoint::labeled1(0.1, -1.0),
                        DataPoint::labeled1(-1.0, 1.0),
                    ],
                    vec![0.01, 0.01, 0.98],
                )
                .expect("static distribution is valid"),
                learner: plain_squared(true, 0.0),
                loss: LossKind::Squared,
            }],
        }
    }
}

/// Every preset curve across all figures (fig1c contributes two).
pub fn all_preset_curves() -> Vec<PresetCurve> {
    Figure::ALL.iter().flat_map(|f| f.curves()).collect()
}

// The shared two-point geometry: a = (1, 1), b = (0.1, 1), P(a) = q.
fn two_point_ab(q: f64) -> DiscreteDistribution {
    DiscreteDistribution::new(
        vec![DataPoint::labeled1(1.0, 1.0), DataPoint::labeled1(0.1, 1.0)],
        vec![q, 1.0 - q],
    )
    .expect("static distribution is valid")
}

fn plain_squared(intercept: bool, ridge_lambda0: f64) -> LearnerSpec {
    LearnerSpec::LinearSquared {
        intercept,
        ridge_lambda0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_well_formed() {
        let curves = all_preset_curves();
        assert_eq!(curves.len(), 5);
        for c in &curves {
            c.learner.validate().unwrap();
            assert!(c.distribution.len() >= 2);
        }
        assert_eq!(Figure::parse("fig1b"), Some(Figure::Fig1b));
        assert_eq!(Figure::parse("fig9"), None);
    }
}
