//! Master stability function `sigma(lambda, mu)`: the largest real part of
//! the spectrum of `F + lambda H + mu G`. A network mode is stable when
//! `sigma < 0` at its eigenvalue pair.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::eigen::complex_eigenvalues;
use crate::linalg::CMatrix;
use crate::model::PlantModel;
use crate::roots::bisect;
use crate::{Error, Result};

pub const DEFAULT_SCAN_POINTS: usize = 400;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsfPoint {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub sigma: f64,
}

/// `F + lambda H + mu G` for one network mode.
pub fn mode_matrix(model: &PlantModel, lambda: Complex64, mu: Complex64) -> CMatrix {
    let (f, h, g) = (model.f(), model.h(), model.g());
    CMatrix::from_fn(f.rows(), f.cols(), |i, j| {
        lambda * h[(i, j)] + mu * g[(i, j)] + f[(i, j)]
    })
}

/// Master stability function at a single `(lambda, mu)` pair.
pub fn sigma(model: &PlantModel, lambda: Complex64, mu: Complex64) -> Result<f64> {
    let ev = complex_eigenvalues(&mode_matrix(model, lambda, mu))?;
    let s = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !s.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "sigma is not finite at lambda = {lambda}, mu = {mu}"
        )));
    }
    Ok(s)
}

/// Convenience wrapper for real `(lambda, mu)`.
pub fn sigma_real(model: &PlantModel, lambda: f64, mu: f64) -> Result<f64> {
    sigma(model, Complex64::new(lambda, 0.0), Complex64::new(mu, 0.0))
}

/// Evenly spaced sample positions on `[lo, hi]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::BadParameter(format!(
                "grid range [{lo}, {hi}] must be finite with lo < hi"
            )));
        }
        if steps < 2 {
            return Err(Error::BadParameter(format!(
                "grid needs at least 2 steps per axis, got {steps}"
            )));
        }
        Ok(Self { lo, hi, steps })
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * (k as f64) / ((self.steps - 1) as f64)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / ((self.steps - 1) as f64)
    }
}

/// Evaluates one grid point by flat row-major index (`lambda` outer, `mu` inner).
pub fn grid_point(model: &PlantModel, lambdas: &GridAxis, mus: &GridAxis, index: usize) -> Result<MsfPoint> {
    let lambda = Complex64::new(lambdas.value(index / mus.steps), 0.0);
    let mu = Complex64::new(mus.value(index % mus.steps), 0.0);
    let sigma = sigma(model, lambda, mu).map_err(|e| {
        Error::NumericalFailure(format!("at grid point (lambda = {}, mu = {}): {e}", lambda.re, mu.re))
    })?;
    Ok(MsfPoint { lambda, mu, sigma })
}

/// Row-major grid of `sigma` over a real `(lambda, mu)` rectangle.
pub fn sigma_grid(model: &PlantModel, lambdas: &GridAxis, mus: &GridAxis) -> Result<Vec<MsfPoint>> {
    (0..lambdas.steps * mus.steps)
        .map(|idx| grid_point(model, lambdas, mus, idx))
        .collect()
}

/// One end of a stable interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boundary {
    pub value: f64,
    /// `false` when `sigma` is still negative at the search-range endpoint,
    /// in which case `value` is that endpoint.
    pub bounded: bool,
}

/// Stable `mu` interval for one mode: `sigma(lambda, mu) < 0` for `mu`
/// strictly between `lower` and `upper`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableInterval {
    pub lambda: Complex64,
    pub lower: Boundary,
    pub upper: Boundary,
}

impl StableInterval {
    pub fn contains(&self, mu: f64) -> bool {
        self.lower.value <= mu && mu <= self.upper.value
    }

    pub fn strictly_contains(&self, mu: f64) -> bool {
        self.lower.value < mu && mu < self.upper.value
    }

    /// Distance from the origin to the closed interval.
    pub fn distance_to_origin(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else if self.lower.value > 0.0 {
            self.lower.value
        } else {
            -self.upper.value
        }
    }

    pub fn width(&self) -> f64 {
        self.upper.value - self.lower.value
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalSearch {
    pub mu_min: f64,
    pub mu_max: f64,
    pub scan_points: usize,
    pub tol: f64,
}

impl IntervalSearch {
    pub fn new(mu_min: f64, mu_max: f64) -> Self {
        Self {
            mu_min,
            mu_max,
            scan_points: DEFAULT_SCAN_POINTS,
            tol: DEFAULT_TOL,
        }
    }

    fn validate(&self) -> Result<GridAxis> {
        if !(self.mu_min.is_finite() && self.mu_max.is_finite()) || !(self.mu_min < 0.0 && 0.0 < self.mu_max) {
            return Err(Error::BadParameter(format!(
                "mu search range [{}, {}] must be finite and contain 0 in its interior",
                self.mu_min, self.mu_max
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::BadParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        GridAxis::new(self.mu_min, self.mu_max, self.scan_points)
    }
}

impl Default for IntervalSearch {
    fn default() -> Self {
        Self::new(-50.0, 50.0)
    }
}

/// Finds the maximal `mu` interval with `sigma(lambda, mu) < 0` that lies
/// closest to `mu = 0`, scanning `search.scan_points` samples and refining
/// each sign change by bisection.
pub fn stable_interval(model: &PlantModel, lambda: Complex64, search: &IntervalSearch) -> Result<StableInterval> {
    let axis = search.validate()?;
    let stable = |mu: f64| -> Result<bool> { Ok(sigma(model, lambda, Complex64::new(mu, 0.0))? < 0.0) };

    let flags: Vec<bool> = (0..axis.steps)
        .map(|k| stable(axis.value(k)))
        .collect::<Result<_>>()?;

    // Maximal runs of stable samples, as index ranges.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < flags.len() {
        if flags[k] {
            let start = k;
            while k + 1 < flags.len() && flags[k + 1] {
                k += 1;
            }
            runs.push((start, k));
        }
        k += 1;
    }
    if runs.is_empty() {
        return Err(Error::NoStableInterval {
            lambda_re: lambda.re,
            lambda_im: lambda.im,
            lo: search.mu_min,
            hi: search.mu_max,
        });
    }

    // Bisection failures surface after the scan; capture the first one.
    let mut failure: Option<Error> = None;
    let mut refine = |inside_k: usize, outside_k: usize| -> f64 {
        let (keep, _) = bisect(axis.value(inside_k), axis.value(outside_k), search.tol, |mu| {
            match stable(mu) {
                Ok(s) => s,
                Err(e) => {
                    failure.get_or_insert(e);
                    false
                }
            }
        });
        keep
    };

    let mut candidates: Vec<StableInterval> = Vec::with_capacity(runs.len());
    for &(start, end) in &runs {
        let lower = if start == 0 {
            Boundary { value: axis.lo, bounded: false }
        } else {
            Boundary { value: refine(start, start - 1), bounded: true }
        };
        let upper = if end + 1 == axis.steps {
            Boundary { value: axis.hi, bounded: false }
        } else {
            Boundary { value: refine(end, end + 1), bounded: true }
        };
        candidates.push(StableInterval { lambda, lower, upper });
    }
    if let Some(e) = failure {
        return Err(e);
    }

    let best = candidates
        .into_iter()
        .min_by(|a, b| {
            let nearest_negative = |s: &StableInterval| !(s.lower.value > 0.0);
            a.distance_to_origin()
                .total_cmp(&b.distance_to_origin())
                .then(nearest_negative(b).cmp(&nearest_negative(a)))
                .then(a.lower.value.total_cmp(&b.lower.value))
        })
        .expect("at least one run");
    Ok(best)
}
