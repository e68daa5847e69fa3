//! Plant-level matrices and the derived closed-loop local matrices.

use alloc::format;

use crate::linalg::{least_squares, spectral_norm, Matrix};
use crate::{Error, Result};

/// Residual above which a least-squares matching gain is reported as inexact.
pub const MATCHING_EXACT_TOL: f64 = 1e-9;

/// Identical plant shared by every node of the network.
///
/// `F = D + R K` is the locally closed loop; `G = R L` is the gain applied
/// to each neighbour state received over the feedback network.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantModel {
    d: Matrix,
    r: Matrix,
    h: Matrix,
    k: Matrix,
    l: Matrix,
    f: Matrix,
    g: Matrix,
}

impl PlantModel {
    /// Validates dimensions and derives `F` and `G`.
    pub fn new(d: Matrix, r: Matrix, h: Matrix, k: Matrix, l: Matrix) -> Result<Self> {
        let n = d.rows();
        let m = r.cols();
        let expect = |name: &str, mat: &Matrix, shape: (usize, usize), other: &str| {
            if mat.shape() == shape {
                Ok(())
            } else {
                Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{} but {other} requires {}x{}",
                    mat.rows(),
                    mat.cols(),
                    shape.0,
                    shape.1
                )))
            }
        };
        if !d.is_square() || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "D must be square and non-empty, got {}x{}",
                d.rows(),
                d.cols()
            )));
        }
        expect("R", &r, (n, m), "D")?;
        expect("H", &h, (n, n), "D")?;
        expect("K", &k, (m, n), "R and D")?;
        expect("L", &l, (m, n), "R and D")?;
        for (name, mat) in [("D", &d), ("R", &r), ("H", &h), ("K", &k), ("L", &l)] {
            if !mat.is_finite() {
                return Err(Error::BadParameter(format!("{name} has a non-finite entry")));
            }
        }
        let f = d.try_add(&r.matmul(&k)?)?;
        let g = r.matmul(&l)?;
        Ok(Self { d, r, h, k, l, f, g })
    }

    /// Same plant with the inter-node loop gain replaced.
    pub fn with_loop_gain(&self, l: Matrix) -> Result<Self> {
        Self::new(
            self.d.clone(),
            self.r.clone(),
            self.h.clone(),
            self.k.clone(),
            l,
        )
    }

    /// State dimension `n`.
    pub fn state_dim(&self) -> usize {
        self.d.rows()
    }

    /// Input dimension `m`.
    pub fn input_dim(&self) -> usize {
        self.r.cols()
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }
    pub fn r(&self) -> &Matrix {
        &self.r
    }
    pub fn h(&self) -> &Matrix {
        &self.h
    }
    pub fn k(&self) -> &Matrix {
        &self.k
    }
    pub fn l(&self) -> &Matrix {
        &self.l
    }
    pub fn f(&self) -> &Matrix {
        &self.f
    }
    pub fn g(&self) -> &Matrix {
        &self.g
    }

    /// `‖R L − H‖₂`, the defect of the printed matching condition.
    pub fn matching_defect(&self) -> f64 {
        // Shapes are validated at construction, so these cannot fail.
        let diff = self.g.try_sub(&self.h).expect("validated shapes");
        spectral_norm(&diff).unwrap_or(f64::NAN)
    }

    /// Gain `L` that cancels the plant coupling: least-squares solution of
    /// `R L = −H`. With `A = B` this removes `H` from every block.
    pub fn matching_gain(&self) -> Result<MatchingGain> {
        let (gain, residual) = least_squares(&self.r, &self.h.scale(-1.0))?;
        Ok(MatchingGain {
            gain,
            residual,
            exact: residual <= MATCHING_EXACT_TOL,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchingGain {
    pub gain: Matrix,
    /// `‖R L + H‖_F` at the least-squares optimum.
    pub residual: f64,
    pub exact: bool,
}

/// The two-state example plant: `D = [3 5; -1 0]`, `R = [1; 0]`,
/// `H = [1 0; 0 0]`, `K = -[5 0]`, `L = -[1 0]`.
pub fn reference_plant() -> PlantModel {
    let m = |rows: usize, cols: usize, v: &[f64]| {
        Matrix::from_vec(rows, cols, v.to_vec()).expect("literal shape")
    };
    PlantModel::new(
        m(2, 2, &[3.0, 5.0, -1.0, 0.0]),
        m(2, 1, &[1.0, 0.0]),
        m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        m(1, 2, &[-5.0, 0.0]),
        m(1, 2, &[-1.0, 0.0]),
    )
    .expect("reference plant is consistent")
}
