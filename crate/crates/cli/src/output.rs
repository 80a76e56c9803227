//! File emission: locale-independent CSV (17 significant digits, LF line
//! endings) and JSON documents.

use monotone_lab_core::{LearningCurve, McEstimate, MonotonicityReport};
use serde::Serialize;

/// Full-precision float formatting: 17 significant digits, '.' separator.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Curve CSV: `n,expected_risk,limit_risk` plus Monte Carlo columns when
/// estimates are attached.
pub fn curve_csv(curve: &LearningCurve, limit_risk: f64, mc: Option<&[McEstimate]>) -> String {
    let mut out = String::new();
    match mc {
        None => out.push_str("n,expected_risk,limit_risk\n"),
        Some(_) => out.push_str("n,expected_risk,limit_risk,mc_estimate,mc_std_error\n"),
    }
    for (i, entry) in curve.entries.iter().enumerate() {
        out.push_str(&entry.n.to_string());
        out.push(',');
        out.push_str(&fmt_f64(entry.risk));
        out.push(',');
        out.push_str(&fmt_f64(limit_risk));
        if let Some(estimates) = mc {
            out.push(',');
            out.push_str(&fmt_f64(estimates[i].mean));
            out.push(',');
            out.push_str(&fmt_f64(estimates[i].std_error));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct CurveEntryDoc {
    pub n: u32,
    pub expected_risk: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_std_error: Option<f64>,
}

#[derive(Serialize)]
pub struct CurveDoc<'a> {
    pub schema_version: u32,
    pub meta: &'a monotone_lab_core::CurveMeta,
    pub n_start: u32,
    pub n_end: u32,
    pub limit_risk: f64,
    pub entries: Vec<CurveEntryDoc>,
}

pub fn curve_json(curve: &LearningCurve, limit_risk: f64, mc: Option<&[McEstimate]>) -> String {
    let entries = curve
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| CurveEntryDoc {
            n: e.n,
            expected_risk: e.risk,
            mc_estimate: mc.map(|m| m[i].mean),
            mc_std_error: mc.map(|m| m[i].std_error),
        })
        .collect();
    let doc = CurveDoc {
        schema_version: crate::config::SCHEMA_VERSION,
        meta: &curve.meta,
        n_start: curve.entries.first().map(|e| e.n).unwrap_or(0),
        n_end: curve.entries.last().map(|e| e.n).unwrap_or(0),
        limit_risk,
        entries,
    };
    to_pretty_json(&doc)
}

#[derive(Serialize)]
pub struct CheckDoc<'a> {
    pub schema_version: u32,
    pub learner: &'a monotone_lab_core::LearnerSpec,
    pub loss: &'a monotone_lab_core::LossKind,
    pub distribution_digest: String,
    #[serde(flatten)]
    pub report: &'a MonotonicityReport,
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("document serializes");
    text.push('\n');
    text
}
