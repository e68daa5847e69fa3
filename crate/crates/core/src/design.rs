//! Feedback-network synthesis.
//!
//! * [`design_weighted`]: per-mode minimal gains assembled in the plant
//!   network's own eigenbasis. Since `‖A‖_F² = tr(T*T)` for `A = Q T Qᴴ`,
//!   zeroing the off-diagonal of `T` and taking each `mu_i` as the point of
//!   its stable interval nearest the origin minimises the Frobenius norm.
//! * [`design_binary`]: fewest 0/1 links by branch and bound, with the full
//!   stacked spectrum as the feasibility test.
//! * [`design_matching`]: the `A = B` baseline with a coupling-cancelling gain.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;

use num_complex::Complex64;

use crate::eigen::spectral_abscissa;
use crate::graphs::{eigenvector_centrality, make_network, normality_defect, spectrum, Network, NetworkSpec};
use crate::linalg::{CMatrix, Matrix};
use crate::model::PlantModel;
use crate::msf::{stable_interval, IntervalSearch, StableInterval};
use crate::verify::build_closed_loop;
use crate::{Error, Result};

pub const DEFAULT_MARGIN: f64 = 0.01;

/// Largest `N * n` the binary search accepts.
pub const MAX_BINARY_STATE: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DesignMethod {
    Weighted,
    Binary,
    Matching,
}

impl fmt::Display for DesignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignMethod::Weighted => "weighted",
            DesignMethod::Binary => "binary",
            DesignMethod::Matching => "matching",
        })
    }
}

/// Per-mode record of a weighted design.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeRecord {
    pub lambda: Complex64,
    pub interval: StableInterval,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignResult {
    pub method: DesignMethod,
    /// Synthesized feedback adjacency `A`.
    pub feedback: Matrix,
    /// Feedback eigenvalue paired with each plant eigenvalue, in spectrum order.
    pub mode_gains: Vec<f64>,
    /// Plant eigenvalues `lambda_i` in spectrum order.
    pub plant_eigenvalues: Vec<Complex64>,
    /// Interval bookkeeping; populated by the weighted design only.
    pub modes: Vec<ModeRecord>,
    pub frobenius_norm: f64,
    pub margin: f64,
    /// Replacement for the model's `L` used by this design (matching only).
    pub loop_gain: Option<Matrix>,
    /// Whether the matching gain solves `R L = −H` exactly.
    pub matching_exact: Option<bool>,
    /// Set by [`crate::verify::verify_design`].
    pub verified: bool,
    pub max_real_part: Option<f64>,
}

impl DesignResult {
    fn new(method: DesignMethod, feedback: Matrix, mode_gains: Vec<f64>, plant_eigenvalues: Vec<Complex64>) -> Self {
        let frobenius_norm = feedback.frobenius_norm();
        Self {
            method,
            feedback,
            mode_gains,
            plant_eigenvalues,
            modes: Vec::new(),
            frobenius_norm,
            margin: 0.0,
            loop_gain: None,
            matching_exact: None,
            verified: false,
            max_real_part: None,
        }
    }

    pub fn trace(&self) -> f64 {
        self.feedback.trace()
    }

    /// `|‖A‖_F² − Σ mu_i²|`.
    pub fn trace_identity_defect(&self) -> f64 {
        let sum: f64 = self.mode_gains.iter().map(|m| m * m).sum();
        (self.frobenius_norm * self.frobenius_norm - sum).abs()
    }

    /// Number of nonzero off-diagonal entries of `A`.
    pub fn link_count(&self) -> usize {
        let n = self.feedback.rows();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.feedback[(i, j)] != 0.0)
            .count()
    }
}

/// Smallest-magnitude admissible gain inside `interval`: zero when the
/// interval strictly contains the origin, otherwise the nearer boundary
/// pushed `margin` inward (or the midpoint if the interval is narrower).
pub fn mode_gain(interval: &StableInterval, margin: f64) -> f64 {
    if interval.strictly_contains(0.0) {
        return 0.0;
    }
    let (lo, hi) = (interval.lower.value, interval.upper.value);
    let mid = lo + 0.5 * (hi - lo);
    if lo >= 0.0 {
        let g = lo + margin;
        if g < hi { g } else { mid }
    } else {
        let g = hi - margin;
        if g > lo { g } else { mid }
    }
}

/// Relative tolerance for accepting a non-symmetric plant network as normal.
const NORMALITY_TOL: f64 = 1e-8;

/// Frobenius-minimal weighted feedback network for `plant`.
pub fn design_weighted(
    model: &PlantModel,
    plant: &Network,
    search: &IntervalSearch,
    margin: f64,
) -> Result<DesignResult> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::BadParameter(format!("margin must be positive, got {margin}")));
    }
    if !plant.is_symmetric() {
        let a = plant.adjacency();
        let defect = normality_defect(a);
        if defect > NORMALITY_TOL * a.frobenius_norm_sq().max(1.0) {
            return Err(Error::NonNormalNetwork(defect));
        }
    }
    let sd = spectrum(plant)?;
    let mut modes = Vec::with_capacity(sd.eigenvalues.len());
    for &lambda in &sd.eigenvalues {
        let interval = stable_interval(model, lambda, search).map_err(|e| match e {
            Error::NoStableInterval { .. } => Error::Infeasible(format!(
                "mode lambda = {}{:+}i has no stable mu in [{}, {}]",
                lambda.re, lambda.im, search.mu_min, search.mu_max
            )),
            other => other,
        })?;
        modes.push(ModeRecord {
            lambda,
            interval,
            gain: mode_gain(&interval, margin),
        });
    }
    let gains: Vec<f64> = modes.iter().map(|m| m.gain).collect();

    let feedback = if sd.real_symmetric {
        let q = sd.real_basis();
        let n = q.rows();
        // mu_k * (q_ik * q_jk) keeps A exactly symmetric.
        Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| gains[k] * (q[(i, k)] * q[(j, k)])).sum()
        })
    } else {
        let mu: Vec<Complex64> = gains.iter().map(|&g| Complex64::new(g, 0.0)).collect();
        let a = sd
            .basis
            .matmul(&CMatrix::diagonal(&mu))?
            .matmul(&sd.basis.adjoint())?;
        let residue = a.im().frobenius_norm();
        if residue > 1e-8 * a.frobenius_norm().max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "designed feedback has imaginary residue {residue:e}"
            )));
        }
        a.re()
    };

    let mut result = DesignResult::new(DesignMethod::Weighted, feedback, gains, sd.eigenvalues);
    result.modes = modes;
    result.margin = margin;
    Ok(result)
}

/// `A = B` baseline. The loop gain is replaced by the least-squares
/// solution of `R L = −H`; the design is flagged inexact when that system
/// has no exact solution.
pub fn design_matching(model: &PlantModel, plant: &Network) -> Result<DesignResult> {
    let mg = model.matching_gain()?;
    let eigenvalues = spectrum(plant)?.eigenvalues;
    let gains = eigenvalues.iter().map(|z| z.re).collect();
    let mut result = DesignResult::new(DesignMethod::Matching, plant.adjacency().clone(), gains, eigenvalues);
    result.loop_gain = Some(mg.gain);
    result.matching_exact = Some(mg.exact);
    Ok(result)
}

/// Stability of the stacked system for a fixed binary feedback pattern.
pub fn binary_feasible(model: &PlantModel, plant: &Matrix, feedback: &Matrix) -> Result<bool> {
    let sys = build_closed_loop(model, plant, feedback)?;
    Ok(spectral_abscissa(sys.matrix())? < 0.0)
}

/// Off-diagonal link slots, upper triangle only when `symmetric`.
fn link_slots(n: usize, symmetric: bool) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| if symmetric { i < j } else { i != j })
        .collect()
}

fn pattern_matrix(n: usize, slots: &[(usize, usize)], on: &[bool], symmetric: bool) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for (&(i, j), &set) in slots.iter().zip(on) {
        if set {
            a[(i, j)] = 1.0;
            if symmetric {
                a[(j, i)] = 1.0;
            }
        }
    }
    a
}

struct BranchAndBound<'a> {
    model: &'a PlantModel,
    plant: &'a Matrix,
    slots: Vec<(usize, usize)>,
    symmetric: bool,
    assignment: Vec<bool>,
    best: Option<(usize, Vec<bool>)>,
    stop: &'a mut dyn FnMut() -> bool,
    timed_out: bool,
    error: Option<Error>,
}

impl BranchAndBound<'_> {
    /// Links contributed by one slot.
    fn weight(&self) -> usize {
        if self.symmetric { 2 } else { 1 }
    }

    fn explore(&mut self, depth: usize, committed: usize) {
        if self.timed_out || self.error.is_some() {
            return;
        }
        if let Some((best, _)) = &self.best {
            if committed >= *best {
                return;
            }
        }
        if depth == self.slots.len() {
            if (self.stop)() {
                self.timed_out = true;
                return;
            }
            let n = self.plant.rows();
            let a = pattern_matrix(n, &self.slots, &self.assignment, self.symmetric);
            match binary_feasible(self.model, self.plant, &a) {
                Ok(true) => self.best = Some((committed, self.assignment.clone())),
                Ok(false) => {}
                Err(e) => self.error = Some(e),
            }
            return;
        }
        // Link present first, so a feasible incumbent appears early.
        self.assignment[depth] = true;
        self.explore(depth + 1, committed + self.weight());
        self.assignment[depth] = false;
        self.explore(depth + 1, committed);
    }
}

/// Binary feedback network with the fewest links that makes the stacked
/// system stable, by depth-first branch and bound.
///
/// `should_stop` is polled before every leaf evaluation; returning `true`
/// aborts with [`Error::TimedOut`] carrying the incumbent.
pub fn design_binary(
    model: &PlantModel,
    plant: &Network,
    symmetric: bool,
    should_stop: &mut dyn FnMut() -> bool,
) -> Result<DesignResult> {
    let n = plant.size();
    if n * model.state_dim() > MAX_BINARY_STATE {
        return Err(Error::BadParameter(format!(
            "binary design needs N*n <= {MAX_BINARY_STATE}, got {}",
            n * model.state_dim()
        )));
    }
    let centrality = eigenvector_centrality(plant)?;
    let mut slots = link_slots(n, symmetric);
    // Stable sort keeps lexicographic order among ties.
    slots.sort_by(|&(a, b), &(c, d)| {
        (centrality[c] * centrality[d]).total_cmp(&(centrality[a] * centrality[b]))
    });

    let mut bb = BranchAndBound {
        model,
        plant: plant.adjacency(),
        assignment: vec![false; slots.len()],
        slots,
        symmetric,
        best: None,
        stop: should_stop,
        timed_out: false,
        error: None,
    };
    bb.explore(0, 0);
    if let Some(e) = bb.error {
        return Err(e);
    }

    let eigenvalues = spectrum(plant)?.eigenvalues;
    let build = |on: &[bool]| -> Result<DesignResult> {
        let a = pattern_matrix(n, &bb.slots, on, symmetric);
        let gains = if symmetric {
            spectrum(&Network::custom(a.clone())?)?
                .eigenvalues
                .iter()
                .map(|z| z.re)
                .collect()
        } else {
            Vec::new()
        };
        let mut r = DesignResult::new(DesignMethod::Binary, a, gains, eigenvalues.clone());
        r.verified = true;
        Ok(r)
    };

    match (&bb.best, bb.timed_out) {
        (Some((_, on)), false) => build(on),
        (Some((_, on)), true) => Err(Error::TimedOut(Some(Box::new(build(on)?)))),
        (None, true) => Err(Error::TimedOut(None)),
        (None, false) => Err(Error::Infeasible(String::from(
            "no binary feedback pattern stabilizes the network",
        ))),
    }
}

/// Plant-network family for norm sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepFamily {
    Complete,
    Ring { k: usize },
}

impl SweepFamily {
    pub fn spec(&self, n: usize) -> NetworkSpec {
        match *self {
            SweepFamily::Complete => NetworkSpec::Complete { n },
            SweepFamily::Ring { k } => NetworkSpec::Ring { n, k },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    /// `Err` carries the reason the weighted design failed at this size.
    pub weighted_norm: core::result::Result<f64, String>,
    pub matching_norm: core::result::Result<f64, String>,
}

/// Weighted and matching norms for one network size.
pub fn sweep_row(model: &PlantModel, family: SweepFamily, n: usize, search: &IntervalSearch, margin: f64) -> SweepRow {
    let plant = make_network(&family.spec(n), 1.0);
    let weighted_norm = plant
        .as_ref()
        .map_err(|e| format!("{e}"))
        .and_then(|p| design_weighted(model, p, search, margin).map(|d| d.frobenius_norm).map_err(|e| format!("{e}")));
    let matching_norm = plant
        .as_ref()
        .map_err(|e| format!("{e}"))
        .and_then(|p| design_matching(model, p).map(|d| d.frobenius_norm).map_err(|e| format!("{e}")));
    SweepRow {
        n,
        weighted_norm,
        matching_norm,
    }
}

/// Norm comparison across network sizes; failures are recorded per row.
pub fn norm_sweep(
    model: &PlantModel,
    family: SweepFamily,
    sizes: RangeInclusive<usize>,
    search: &IntervalSearch,
    margin: f64,
) -> Vec<SweepRow> {
    sizes.map(|n| sweep_row(model, family, n, search, margin)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_plant;
    use crate::msf::Boundary;

    fn complete(n: usize) -> Network {
        make_network(&NetworkSpec::Complete { n }, 1.0).unwrap()
    }

    fn interval(lo: f64, hi: f64) -> StableInterval {
        StableInterval {
            lambda: Complex64::new(0.0, 0.0),
            lower: Boundary { value: lo, bounded: true },
            upper: Boundary { value: hi, bounded: true },
        }
    }

    #[test]
    fn mode_gain_rules() {
        assert_eq!(mode_gain(&interval(-3.0, 50.0), 0.01), 0.0);
        assert_eq!(mode_gain(&interval(5.0, 50.0), 0.01), 5.01);
        assert_eq!(mode_gain(&interval(-8.0, -2.0), 0.5), -2.5);
        // Boundary at the origin is not strictly inside.
        assert_eq!(mode_gain(&interval(0.0, 3.0), 0.01), 0.01);
        // Narrow interval falls back to its midpoint.
        assert_eq!(mode_gain(&interval(1.0, 1.004), 0.01), 1.002);
    }

    #[test]
    fn weighted_complete_eight() {
        let p = reference_plant();
        let d = design_weighted(&p, &complete(8), &IntervalSearch::default(), 0.01).unwrap();
        assert!((d.mode_gains[0] - 5.01).abs() < 1e-6);
        assert!(d.mode_gains[1..].iter().all(|&m| m == 0.0));
        assert!((d.frobenius_norm - 5.01).abs() < 1e-6);
        assert!(d.feedback.asymmetry() == 0.0);
        assert!(d.trace_identity_defect() <= 1e-8 * 25.0);
        // Rank one along the all-ones vector: every entry is 5.01 / 8.
        for v in d.feedback.as_slice() {
            assert!((v - 5.01 / 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn weighted_zero_plant_needs_nothing() {
        let d = design_weighted(&reference_plant(), &Network::empty(5), &IntervalSearch::default(), 0.01).unwrap();
        assert_eq!(d.frobenius_norm, 0.0);
        assert!(d.mode_gains.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn weighted_rejects_non_normal_and_bad_margin() {
        let p = reference_plant();
        let path = Matrix::from_vec(3, 3, vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let err = design_weighted(&p, &Network::custom(path).unwrap(), &IntervalSearch::default(), 0.01).unwrap_err();
        assert!(matches!(err, Error::NonNormalNetwork(_)));
        assert!(design_weighted(&p, &complete(3), &IntervalSearch::default(), 0.0).is_err());
    }

    #[test]
    fn weighted_infeasible_names_mode() {
        let p = reference_plant();
        // lambda = 7 needs mu > 5, outside [-4, 4].
        let err = design_weighted(&p, &complete(8), &IntervalSearch::new(-4.0, 4.0), 0.01).unwrap_err();
        match err {
            Error::Infeasible(msg) => assert!(msg.contains("lambda = 7"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn weighted_directed_cycle_is_real() {
        let p = reference_plant();
        let n = 6;
        let adj = Matrix::from_fn(n, n, |i, j| if (j + 1) % n == i { 3.0 } else { 0.0 });
        let plant = Network::custom(adj).unwrap();
        let d = design_weighted(&p, &plant, &IntervalSearch::default(), 0.01).unwrap();
        // Modes are 3·exp(2πik/6); the complex pairs go through the complex sigma.
        assert!(d.frobenius_norm > 0.0);
        assert!(d.trace_identity_defect() < 1e-8 * d.frobenius_norm.powi(2).max(1.0));
    }

    #[test]
    fn matching_complete_eight() {
        let d = design_matching(&reference_plant(), &complete(8)).unwrap();
        assert!((d.frobenius_norm - libm::sqrt(56.0)).abs() < 1e-12);
        assert_eq!(d.matching_exact, Some(true));
        assert_eq!(d.link_count(), 56);
    }

    #[test]
    fn matching_empty_plant() {
        let d = design_matching(&reference_plant(), &Network::empty(4)).unwrap();
        assert_eq!(d.frobenius_norm, 0.0);
    }

    #[test]
    fn binary_trivial_when_uncoupled() {
        let p = reference_plant();
        let q = PlantModel::new(p.d().clone(), p.r().clone(), Matrix::zeros(2, 2), p.k().clone(), p.l().clone()).unwrap();
        let d = design_binary(&q, &complete(4), true, &mut || false).unwrap();
        assert_eq!(d.link_count(), 0);
        assert!(d.verified);
    }

    #[test]
    fn binary_complete_four_needs_links() {
        let p = reference_plant();
        let b = complete(4);
        let d = design_binary(&p, &b, true, &mut || false).unwrap();
        assert!(d.link_count() > 0);
        assert!(binary_feasible(&p, b.adjacency(), &d.feedback).unwrap());
        assert_eq!(d.feedback.asymmetry(), 0.0);
        for i in 0..4 {
            assert_eq!(d.feedback[(i, i)], 0.0);
        }
    }

    #[test]
    fn binary_timeout_carries_incumbent() {
        let p = reference_plant();
        let mut calls = 0;
        let err = design_binary(&p, &complete(4), true, &mut || {
            calls += 1;
            calls > 1
        })
        .unwrap_err();
        match err {
            Error::TimedOut(Some(best)) => assert_eq!(best.link_count(), 12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn binary_size_limit() {
        let p = reference_plant();
        assert!(matches!(
            design_binary(&p, &complete(129), true, &mut || false),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn sweep_rows() {
        let p = reference_plant();
        let rows = norm_sweep(&p, SweepFamily::Ring { k: 4 }, 5..=8, &IntervalSearch::default(), 0.01);
        assert_eq!(rows.len(), 4);
        let five_complete = sweep_row(&p, SweepFamily::Complete, 5, &IntervalSearch::default(), 0.01);
        assert_eq!(rows[0].weighted_norm, five_complete.weighted_norm);
        assert_eq!(rows[0].matching_norm, five_complete.matching_norm);
        let eight = &rows[3];
        assert!((eight.weighted_norm.as_ref().unwrap() - 2.01).abs() < 1e-6);
        assert!((eight.matching_norm.as_ref().unwrap() - libm::sqrt(32.0)).abs() < 1e-12);
    }

    #[test]
    fn sweep_records_bad_sizes() {
        let p = reference_plant();
        let rows = norm_sweep(&p, SweepFamily::Ring { k: 4 }, 3..=4, &IntervalSearch::default(), 0.01);
        assert!(rows.iter().all(|r| r.weighted_norm.is_err() && r.matching_norm.is_err()));
    }
}
