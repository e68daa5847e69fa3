//! Eigen-solvers: cyclic Jacobi for real symmetric matrices and a shifted
//! QR iteration producing the complex Schur form `A = Q T Qᴴ` for general
//! square matrices.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

use crate::linalg::{CMatrix, Matrix, Scalar};
use crate::{Error, Result};

const MAX_JACOBI_SWEEPS: usize = 100;
const QR_ITERS_PER_EIGENVALUE: usize = 60;

#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    /// Eigenvalues, in the order the solver produced them.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix.
///
/// Only the upper triangle is read.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut m = Matrix::from_fn(n, n, |i, j| if i <= j { a[(i, j)] } else { a[(j, i)] });
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if libm::sqrt(off) <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            return Ok(SymmetricEigen {
                values: m.diag(),
                vectors: v,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // Skip rotations that cannot change the diagonal.
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::hypot(1.0, theta))
                } else {
                    -1.0 / (-theta + libm::hypot(1.0, theta))
                };
                let c = 1.0 / libm::hypot(1.0, t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "Jacobi iteration did not converge in {MAX_JACOBI_SWEEPS} sweeps"
    )))
}

/// Complex Schur form: `A = Q T Qᴴ` with `Q` unitary and `T` upper triangular.
#[derive(Clone, Debug)]
pub struct ComplexSchur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl ComplexSchur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.t.diag()
    }
}

/// Plane rotation `[[c, s], [-conj(s), c]]` with real `c`.
#[derive(Clone, Copy, Debug)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    /// Rotation mapping `(f, g)` to `(r, 0)`.
    fn zeroing(f: Complex64, g: Complex64) -> Self {
        let gn = g.norm();
        if gn == 0.0 {
            return Self {
                c: 1.0,
                s: Complex64::zero(),
            };
        }
        let fn_ = f.norm();
        if fn_ == 0.0 {
            return Self {
                c: 0.0,
                s: g.conj() / gn,
            };
        }
        let r = libm::hypot(fn_, gn);
        Self {
            c: fn_ / r,
            s: (f / fn_) * g.conj() / r,
        }
    }

    /// Left-multiplies rows `p` and `p + 1` of `m`, restricted to columns `cols`.
    fn rotate_rows(&self, m: &mut CMatrix, p: usize, cols: core::ops::Range<usize>) {
        for j in cols {
            let a = m[(p, j)];
            let b = m[(p + 1, j)];
            m[(p, j)] = a * self.c + self.s * b;
            m[(p + 1, j)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// Right-multiplies columns `p` and `p + 1` of `m` by the adjoint, restricted to `rows`.
    fn rotate_cols(&self, m: &mut CMatrix, p: usize, rows: core::ops::Range<usize>) {
        for i in rows {
            let a = m[(i, p)];
            let b = m[(i, p + 1)];
            m[(i, p)] = a * self.c + b * self.s.conj();
            m[(i, p + 1)] = -a * self.s + b * self.c;
        }
    }
}

/// Householder reduction to upper Hessenberg form, optionally accumulating
/// the unitary similarity.
fn hessenberg(h: &mut CMatrix, mut q: Option<&mut CMatrix>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut v = alloc::vec![Complex64::zero(); n];
    for k in 0..n - 2 {
        let norm_sq: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum();
        let tail: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let norm = libm::sqrt(norm_sq);
        let phase = if x0.norm() == 0.0 {
            Complex64::one()
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = libm::sqrt((k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>());
        for i in k + 1..n {
            v[i] /= vnorm;
        }
        // H <- P H with P = I - 2 v vᴴ
        for j in 0..n {
            let mut dot = Complex64::zero();
            for i in k + 1..n {
                dot += v[i].conj() * h[(i, j)];
            }
            for i in k + 1..n {
                h[(i, j)] -= v[i] * dot * 2.0;
            }
        }
        // H <- H P
        for i in 0..n {
            let mut dot = Complex64::zero();
            for j in k + 1..n {
                dot += h[(i, j)] * v[j];
            }
            for j in k + 1..n {
                h[(i, j)] -= dot * v[j].conj() * 2.0;
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let mut dot = Complex64::zero();
                for j in k + 1..n {
                    dot += q[(i, j)] * v[j];
                }
                for j in k + 1..n {
                    q[(i, j)] -= dot * v[j].conj() * 2.0;
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::zero();
        }
    }
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR iteration on a Hessenberg matrix. With `q` present the full
/// triangular factor and the Schur vectors are maintained; otherwise only
/// the active window is updated, which suffices for eigenvalues.
fn hessenberg_qr(h: &mut CMatrix, mut q: Option<&mut CMatrix>) -> Result<()> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let full = q.is_some();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = QR_ITERS_PER_EIGENVALUE * n;
    let mut rots: Vec<Givens> = Vec::with_capacity(n);

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)];
            let mut scale = abs1(h[(lo, lo)]) + abs1(h[(lo - 1, lo - 1)]);
            if scale == 0.0 {
                scale = (0..=hi).map(|i| abs1(h[(i, i)])).sum::<f64>().max(f64::MIN_POSITIVE);
            }
            if abs1(sub) <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = Complex64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > budget {
            return Err(Error::NumericalFailure(format!(
                "QR iteration did not converge for a {n}x{n} matrix"
            )));
        }

        let shift = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(0.75, 0.5) * abs1(h[(hi, hi - 1)])
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        let col_end = if full { n } else { hi + 1 };
        let row_start = if full { 0 } else { lo };
        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        rots.clear();
        for k in lo..hi {
            let g = Givens::zeroing(h[(k, k)], h[(k + 1, k)]);
            g.rotate_rows(h, k, k..col_end);
            h[(k + 1, k)] = Complex64::zero();
            rots.push(g);
        }
        for (idx, g) in rots.iter().enumerate() {
            let k = lo + idx;
            g.rotate_cols(h, k, row_start..(k + 2).min(hi + 1));
            if let Some(q) = q.as_deref_mut() {
                g.rotate_cols(q, k, 0..n);
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(())
}

fn check_square_finite(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    Ok(())
}

/// Complex Schur decomposition of a general square matrix.
pub fn complex_schur(a: &CMatrix) -> Result<ComplexSchur> {
    check_square_finite(a)?;
    let n = a.rows();
    let mut t = a.clone();
    let mut q = CMatrix::identity(n);
    hessenberg(&mut t, Some(&mut q));
    hessenberg_qr(&mut t, Some(&mut q))?;
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = Complex64::zero();
        }
    }
    Ok(ComplexSchur { q, t })
}

/// Eigenvalues of a general complex matrix, in no particular order.
pub fn complex_eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    check_square_finite(a)?;
    let mut h = a.clone();
    hessenberg(&mut h, None);
    hessenberg_qr(&mut h, None)?;
    Ok(h.diag())
}

/// Eigenvalues of a general real matrix, in no particular order.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    complex_eigenvalues(&a.to_complex())
}

/// Largest real part over the spectrum of `a` (the spectral abscissa).
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Ordering used for every spectrum in the crate: descending real part,
/// ties broken by descending imaginary part.
pub fn spectral_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Swaps the adjacent diagonal entries `k` and `k + 1` of a Schur form.
fn swap_schur_pair(s: &mut ComplexSchur, k: usize) {
    let n = s.t.rows();
    let a = s.t[(k, k)];
    let b = s.t[(k, k + 1)];
    let c = s.t[(k + 1, k + 1)];
    if a == c {
        return;
    }
    // Eigenvector of the 2x2 block for eigenvalue c is (b, c - a).
    let g = Givens::zeroing(b, c - a);
    g.rotate_rows(&mut s.t, k, k..n);
    g.rotate_cols(&mut s.t, k, 0..k + 2);
    g.rotate_cols(&mut s.q, k, 0..n);
    s.t[(k + 1, k)] = Complex64::zero();
    s.t[(k, k)] = c;
    s.t[(k + 1, k + 1)] = a;
}

/// Reorders a Schur form so its diagonal follows [`spectral_order`].
pub fn sort_schur(s: &mut ComplexSchur) {
    let n = s.t.rows();
    // Bubble sort with adjacent swaps; n is small.
    for pass in 0..n {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1 + pass) {
            if spectral_order(&s.t[(k, k)], &s.t[(k + 1, k + 1)]) == Ordering::Greater {
                swap_schur_pair(s, k);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
}
