//! CSV writers and the adjacency reader. Floats use Rust's shortest
//! round-trip formatting, so identical inputs give identical bytes.

use std::fmt::Write as _;

use msfnet_core::design::SweepRow;
use msfnet_core::msf::{MsfPoint, StableInterval};
use msfnet_core::verify::{ProbabilityEstimate, SimState};
use msfnet_core::Matrix;

/// `N` rows of `N` comma-separated decimals, no header. Entry `(i, j)` is
/// the link from node `j` into node `i`.
pub fn read_adjacency(text: &str) -> Result<Matrix, String> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            line.split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    tok.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| format!("line {}: `{tok}` is not a finite number", i + 1))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err("adjacency file is empty".into());
    }
    let m = Matrix::from_rows(&rows).map_err(|e| e.to_string())?;
    if !m.is_square() {
        return Err(format!("adjacency must be square, got {}x{}", m.rows(), m.cols()));
    }
    Ok(m)
}

pub fn write_adjacency(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn grid_csv(points: &[MsfPoint]) -> String {
    let mut out = String::from("lambda,mu,sigma\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.lambda.re, p.mu.re, p.sigma);
    }
    out
}

pub fn interval_csv(intervals: &[StableInterval]) -> String {
    let mut out = String::from("lambda_re,lambda_im,f_l,f_u,bounded_l,bounded_u\n");
    for iv in intervals {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            iv.lambda.re, iv.lambda.im, iv.lower.value, iv.upper.value, iv.lower.bounded, iv.upper.bounded
        );
    }
    out
}

/// Failed cells are left empty and explained in the `note` column.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,weighted_norm,matching_norm,note\n");
    for r in rows {
        let cell = |v: &Result<f64, String>| v.as_ref().map(|x| x.to_string()).unwrap_or_default();
        let note: Vec<&str> = [&r.weighted_norm, &r.matching_norm]
            .iter()
            .filter_map(|v| v.as_ref().err().map(String::as_str))
            .collect();
        let note = note.join("; ").replace([',', '\n'], " ");
        let _ = writeln!(out, "{},{},{},{}", r.n, cell(&r.weighted_norm), cell(&r.matching_norm), note);
    }
    out
}

pub fn trajectory_csv(states: &[SimState]) -> String {
    let dim = states.first().map_or(0, |s| s.x.len());
    let mut out = String::from("t");
    for i in 1..=dim {
        let _ = write!(out, ",x_{i}");
    }
    out.push('\n');
    for s in states {
        out.push_str(&s.t.to_string());
        for v in &s.x {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn probability_csv(p: f64, est: &ProbabilityEstimate) -> String {
    format!(
        "p,trials,stable_fraction,ci_low,ci_high\n{},{},{},{},{}\n",
        p, est.trials, est.fraction, est.ci_low, est.ci_high
    )
}
