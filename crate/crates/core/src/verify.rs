//! Independent checks on a designed network: the full `Nn x Nn` spectrum,
//! agreement with the per-mode block spectra, time-domain decay, and Monte
//! Carlo stability frequency over random plant networks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::design::{design_binary, design_matching, design_weighted, DesignMethod, DesignResult};
use crate::eigen::{complex_eigenvalues, spectral_abscissa};
use crate::graphs::{make_network, spectrum, Network, NetworkSpec};
use crate::linalg::{CMatrix, Matrix};
use crate::model::PlantModel;
use crate::msf::{mode_matrix, IntervalSearch};
use crate::{Error, Result};

/// Stacked closed loop `x' = (I_N ⊗ F + B ⊗ H + A ⊗ G) x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopSystem {
    matrix: Matrix,
    nodes: usize,
    state_dim: usize,
}

impl ClosedLoopSystem {
    /// Wraps an arbitrary square system matrix as a single-node system.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "system matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let state_dim = matrix.rows();
        Ok(Self {
            matrix,
            nodes: 1,
            state_dim,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Assembles `I_N ⊗ F + B ⊗ H + A ⊗ G`. Block `(i, j)` carries
/// `b_ij H + a_ij G`, the coupling from node `j` into node `i`.
pub fn build_closed_loop(model: &PlantModel, plant: &Matrix, feedback: &Matrix) -> Result<ClosedLoopSystem> {
    if !plant.is_square() || plant.shape() != feedback.shape() {
        return Err(Error::DimensionMismatch(format!(
            "plant network is {}x{} and feedback network is {}x{}; both must be the same square size",
            plant.rows(),
            plant.cols(),
            feedback.rows(),
            feedback.cols()
        )));
    }
    let nodes = plant.rows();
    let n = model.state_dim();
    let (f, h, g) = (model.f(), model.h(), model.g());
    let mut m = Matrix::zeros(nodes * n, nodes * n);
    for bi in 0..nodes {
        for bj in 0..nodes {
            let b = plant[(bi, bj)];
            let a = feedback[(bi, bj)];
            let diag = bi == bj;
            for r in 0..n {
                for c in 0..n {
                    let mut v = b * h[(r, c)] + a * g[(r, c)];
                    if diag {
                        v += f[(r, c)];
                    }
                    m[(bi * n + r, bj * n + c)] = v;
                }
            }
        }
    }
    Ok(ClosedLoopSystem {
        matrix: m,
        nodes,
        state_dim: n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub max_real_part: f64,
    pub stable: bool,
}

/// Asymptotic stability: every eigenvalue strictly in the left half-plane.
pub fn spectral_verdict(system: &ClosedLoopSystem) -> Result<Verdict> {
    let max_real_part = spectral_abscissa(system.matrix())?;
    Ok(Verdict {
        max_real_part,
        stable: max_real_part < 0.0,
    })
}

/// Verdict for a designed feedback network on `plant`, honouring any loop
/// gain the design substituted.
pub fn verify_design(model: &PlantModel, plant: &Network, design: &mut DesignResult) -> Result<Verdict> {
    let effective = match &design.loop_gain {
        Some(l) => model.with_loop_gain(l.clone())?,
        None => model.clone(),
    };
    let system = build_closed_loop(&effective, plant.adjacency(), &design.feedback)?;
    let verdict = spectral_verdict(&system)?;
    design.verified = verdict.stable;
    design.max_real_part = Some(verdict.max_real_part);
    Ok(verdict)
}

/// Compares the spectrum of the stacked system built from
/// `A = Q diag(mu) Qᴴ` with the union of the block spectra of
/// `F + lambda_i H + mu_i G`. Returns the largest distance under a greedy
/// nearest-pair matching.
pub fn spectrum_union_check(model: &PlantModel, plant: &Network, mode_gains: &[Complex64]) -> Result<f64> {
    let nodes = plant.size();
    if mode_gains.len() != nodes {
        return Err(Error::DimensionMismatch(format!(
            "{} mode gains for a network of {nodes} nodes",
            mode_gains.len()
        )));
    }
    let sd = spectrum(plant)?;
    let q = &sd.basis;
    let feedback = q
        .matmul(&CMatrix::diagonal(mode_gains))?
        .matmul(&q.adjoint())?;

    let n = model.state_dim();
    let (f, h, g) = (model.f(), model.h(), model.g());
    let b = plant.adjacency();
    let mut stacked = CMatrix::zeros(nodes * n, nodes * n);
    for bi in 0..nodes {
        for bj in 0..nodes {
            for r in 0..n {
                for c in 0..n {
                    let mut v = feedback[(bi, bj)] * g[(r, c)] + Complex64::new(b[(bi, bj)] * h[(r, c)], 0.0);
                    if bi == bj {
                        v += f[(r, c)];
                    }
                    stacked[(bi * n + r, bj * n + c)] = v;
                }
            }
        }
    }
    let full = complex_eigenvalues(&stacked)?;

    let mut union = Vec::with_capacity(nodes * n);
    for (lambda, &mu) in sd.eigenvalues.iter().zip(mode_gains) {
        union.extend(complex_eigenvalues(&mode_matrix(model, *lambda, mu))?);
    }
    Ok(greedy_match_distance(&full, &union))
}

/// Max pair distance when each point of `a` takes its nearest unused point of `b`.
pub fn greedy_match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let (best, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal lengths");
        used[best] = true;
        worst = worst.max(d);
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Norm above which a trajectory is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<SimState>,
    /// Set when the state norm exceeded [`DIVERGENCE_NORM`]; integration stops there.
    pub diverged: bool,
}

impl Trajectory {
    pub fn last(&self) -> &SimState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

pub fn l2_norm(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

/// Default step `1e-3 / max(1, ‖F̃‖_∞)`.
pub fn default_dt(system: &ClosedLoopSystem) -> f64 {
    1e-3 / system.matrix().inf_norm().max(1.0)
}

/// Fixed-step classical RK4 integration of `x' = F̃ x` from `t = 0` to
/// `t_end`, keeping every `record_every`-th step plus the final state.
pub fn simulate(
    system: &ClosedLoopSystem,
    x0: &[f64],
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    let dim = system.dim();
    if x0.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {} but the system has dimension {dim}",
            x0.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) || !(t_end > dt && t_end.is_finite()) {
        return Err(Error::BadParameter(format!(
            "need 0 < dt < t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadParameter("initial state has a non-finite entry".into()));
    }
    let record_every = record_every.max(1);
    let a = system.matrix();
    let steps = libm::ceil(t_end / dt) as usize;
    let mut x = x0.to_vec();
    let mut states = vec![SimState { t: 0.0, x: x.clone() }];
    let mut tmp = vec![0.0; dim];
    let mut diverged = false;

    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * dt;
        let h = if step == steps { t_end - t_prev } else { dt };
        let k1 = a.matvec(&x);
        axpy(&x, &k1, h / 2.0, &mut tmp);
        let k2 = a.matvec(&tmp);
        axpy(&x, &k2, h / 2.0, &mut tmp);
        let k3 = a.matvec(&tmp);
        axpy(&x, &k3, h, &mut tmp);
        let k4 = a.matvec(&tmp);
        for i in 0..dim {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = if step == steps { t_end } else { step as f64 * dt };
        let norm = l2_norm(&x);
        if !(norm <= DIVERGENCE_NORM) {
            diverged = true;
            states.push(SimState { t, x: x.clone() });
            break;
        }
        if step % record_every == 0 || step == steps {
            states.push(SimState { t, x: x.clone() });
        }
    }
    Ok(Trajectory { states, diverged })
}

fn axpy(x: &[f64], k: &[f64], h: f64, out: &mut [f64]) {
    for ((o, &xi), &ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + h * ki;
    }
}

/// Settings shared by every Monte Carlo trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialConfig {
    pub nodes: usize,
    pub p: f64,
    pub coupling: f64,
    pub method: DesignMethod,
    pub search: IntervalSearch,
    pub margin: f64,
}

/// Samples an Erdős–Rényi plant network with `seed`, designs a feedback
/// network and reports whether the design exists and is stable.
pub fn stability_trial(model: &PlantModel, cfg: &TrialConfig, seed: u64) -> bool {
    let spec = NetworkSpec::ErdosRenyi {
        n: cfg.nodes,
        p: cfg.p,
        seed,
    };
    let Ok(plant) = make_network(&spec, cfg.coupling) else {
        return false;
    };
    let designed = match cfg.method {
        DesignMethod::Weighted => design_weighted(model, &plant, &cfg.search, cfg.margin),
        DesignMethod::Matching => design_matching(model, &plant),
        DesignMethod::Binary => design_binary(model, &plant, plant.is_symmetric(), &mut || false),
    };
    match designed {
        Ok(mut d) => verify_design(model, &plant, &mut d).map(|v| v.stable).unwrap_or(false),
        Err(_) => false,
    }
}

/// Seed of trial `index` under `master_seed`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    master_seed.wrapping_add(index)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityEstimate {
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
    /// 95% normal-approximation interval, clamped to `[0, 1]`.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ProbabilityEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let half = 1.96 * libm::sqrt(p * (1.0 - p) / n);
        Self {
            trials,
            successes,
            fraction: p,
            ci_low: (p - half).max(0.0),
            ci_high: (p + half).min(1.0),
        }
    }
}

/// Sequential Monte Carlo estimate; trial `k` uses `trial_seed(master_seed, k)`.
pub fn stability_probability(
    model: &PlantModel,
    cfg: &TrialConfig,
    trials: u64,
    master_seed: u64,
) -> Result<ProbabilityEstimate> {
    if trials == 0 {
        return Err(Error::BadParameter("need at least one trial".into()));
    }
    let successes = (0..trials)
        .filter(|&k| stability_trial(model, cfg, trial_seed(master_seed, k)))
        .count() as u64;
    Ok(ProbabilityEstimate::from_counts(successes, trials))
}
