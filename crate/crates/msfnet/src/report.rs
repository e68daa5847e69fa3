//! Plain-text JSON reports for design and verification runs.

use serde::Serialize;

use msfnet_core::design::DesignResult;
use msfnet_core::msf::StableInterval;
use msfnet_core::verify::Verdict;

#[derive(Serialize)]
struct ModeEntry {
    lambda_re: f64,
    lambda_im: f64,
    mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_u: Option<f64>,
}

#[derive(Serialize)]
struct DesignReport<'a> {
    method: String,
    network: &'a str,
    nodes: usize,
    frobenius_norm: f64,
    trace: f64,
    link_count: usize,
    margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    matching_exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loop_gain: Option<Vec<f64>>,
    optimal: bool,
    modes: Vec<ModeEntry>,
    max_real_part: Option<f64>,
    verdict: &'static str,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn verdict_word(stable: bool) -> &'static str {
    if stable {
        "stable"
    } else {
        "unstable"
    }
}

pub fn design_report(design: &DesignResult, network: &str, optimal: bool) -> String {
    let intervals: Vec<Option<&StableInterval>> = if design.modes.is_empty() {
        vec![None; design.plant_eigenvalues.len()]
    } else {
        design.modes.iter().map(|m| Some(&m.interval)).collect()
    };
    let modes = design
        .plant_eigenvalues
        .iter()
        .zip(intervals)
        .enumerate()
        .map(|(i, (lambda, iv))| ModeEntry {
            lambda_re: lambda.re,
            lambda_im: lambda.im,
            mu: design.mode_gains.get(i).copied().unwrap_or(f64::NAN),
            f_l: iv.and_then(|iv| finite(iv.lower.value)),
            f_u: iv.and_then(|iv| finite(iv.upper.value)),
        })
        .collect();
    let report = DesignReport {
        method: design.method.to_string(),
        network,
        nodes: design.feedback.rows(),
        frobenius_norm: design.frobenius_norm,
        trace: design.trace(),
        link_count: design.link_count(),
        margin: design.margin,
        matching_exact: design.matching_exact,
        loop_gain: design.loop_gain.as_ref().map(|l| l.as_slice().to_vec()),
        optimal,
        modes,
        max_real_part: design.max_real_part.and_then(finite),
        verdict: verdict_word(design.verified),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    plant: &'a str,
    feedback: &'a str,
    system_dim: usize,
    max_real_part: f64,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulation: Option<SimulationSummary>,
}

#[derive(Serialize, Clone, Copy)]
pub struct SimulationSummary {
    pub t_end: f64,
    pub dt: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub diverged: bool,
}

pub fn verify_report(
    plant: &str,
    feedback: &str,
    system_dim: usize,
    verdict: &Verdict,
    simulation: Option<SimulationSummary>,
) -> String {
    let report = VerifyReport {
        plant,
        feedback,
        system_dim,
        max_real_part: verdict.max_real_part,
        verdict: verdict_word(verdict.stable),
        simulation,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use msfnet_core::design::design_weighted;
    use msfnet_core::graphs::{make_network, NetworkSpec};
    use msfnet_core::model::reference_plant;
    use msfnet_core::msf::IntervalSearch;
    use msfnet_core::verify::verify_design;

    #[test]
    fn weighted_report_fields() {
        let p = reference_plant();
        let b = make_network(&NetworkSpec::Complete { n: 8 }, 1.0).unwrap();
        let mut d = design_weighted(&p, &b, &IntervalSearch::default(), 0.01).unwrap();
        verify_design(&p, &b, &mut d).unwrap();
        let text = design_report(&d, "complete:8", true);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["method"], "weighted");
        assert_eq!(v["verdict"], "stable");
        assert_eq!(v["modes"].as_array().unwrap().len(), 8);
        assert!((v["frobenius_norm"].as_f64().unwrap() - 5.01).abs() < 1e-6);
        assert!(v.get("matching_exact").is_none());
    }
}
