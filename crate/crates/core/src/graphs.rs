//! Plant and feedback network adjacency matrices and their spectra.
//!
//! Entry `(i, j)` of an adjacency matrix is the link *from* node `j`
//! *into* node `i`; it multiplies `x_j` in node `i`'s state equation.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::{complex_schur, sort_schur, spectral_order, symmetric_eigen};
use crate::linalg::{CMatrix, Matrix};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkKind {
    Complete,
    /// Ring lattice where every node links to its `k / 2` nearest neighbours on each side.
    RingRegular { k: usize },
    ErdosRenyi { p: f64, seed: u64 },
    Custom,
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkKind::Complete => write!(f, "complete"),
            NetworkKind::RingRegular { k } => write!(f, "ring-regular(k={k})"),
            NetworkKind::ErdosRenyi { p, seed } => write!(f, "erdos-renyi(p={p}, seed={seed})"),
            NetworkKind::Custom => write!(f, "custom"),
        }
    }
}

/// Generator recipe for [`make_network`].
#[derive(Clone, Debug, PartialEq)]
pub enum NetworkSpec {
    Complete { n: usize },
    Ring { n: usize, k: usize },
    ErdosRenyi { n: usize, p: f64, seed: u64 },
}

impl NetworkSpec {
    pub fn size(&self) -> usize {
        match *self {
            NetworkSpec::Complete { n } | NetworkSpec::Ring { n, .. } | NetworkSpec::ErdosRenyi { n, .. } => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    adjacency: Matrix,
    kind: NetworkKind,
    symmetric: bool,
}

impl Network {
    /// Wraps a plant-network or binary feedback adjacency matrix; the
    /// diagonal must be zero.
    pub fn custom(adjacency: Matrix) -> Result<Self> {
        let net = Self::weighted(adjacency)?;
        if let Some(i) = (0..net.size()).find(|&i| net.adjacency[(i, i)] != 0.0) {
            return Err(Error::BadParameter(format!(
                "adjacency has nonzero self-loop at node {i}"
            )));
        }
        Ok(net)
    }

    /// Wraps a designed weighted feedback matrix, which may carry a diagonal.
    pub fn weighted(adjacency: Matrix) -> Result<Self> {
        if !adjacency.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "adjacency must be square, got {}x{}",
                adjacency.rows(),
                adjacency.cols()
            )));
        }
        if !adjacency.is_finite() {
            return Err(Error::BadParameter("adjacency has a non-finite entry".into()));
        }
        let symmetric = adjacency.asymmetry() == 0.0;
        Ok(Self {
            adjacency,
            kind: NetworkKind::Custom,
            symmetric,
        })
    }

    /// The `N x N` all-zero network.
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: Matrix::zeros(n, n),
            kind: NetworkKind::Custom,
            symmetric: true,
        }
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    pub fn into_adjacency(self) -> Matrix {
        self.adjacency
    }

    pub fn size(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn kind(&self) -> &NetworkKind {
        &self.kind
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// In-degree of every node (row sums of the adjacency).
    pub fn in_degrees(&self) -> Vec<f64> {
        (0..self.size())
            .map(|i| self.adjacency.row(i).iter().sum())
            .collect()
    }

    /// Out-degree of every node (column sums of the adjacency).
    pub fn out_degrees(&self) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|j| (0..n).map(|i| self.adjacency[(i, j)]).sum())
            .collect()
    }

    /// Number of nonzero off-diagonal entries.
    pub fn link_count(&self) -> usize {
        let n = self.size();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.adjacency[(i, j)] != 0.0)
            .count()
    }
}

/// Builds a generated network with every entry multiplied by `coupling`.
pub fn make_network(spec: &NetworkSpec, coupling: f64) -> Result<Network> {
    let n = spec.size();
    if n < 2 {
        return Err(Error::BadParameter(format!("network needs N >= 2, got {n}")));
    }
    if !coupling.is_finite() {
        return Err(Error::BadParameter("coupling must be finite".into()));
    }
    let (adjacency, kind) = match *spec {
        NetworkSpec::Complete { n } => (
            Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { coupling }),
            NetworkKind::Complete,
        ),
        NetworkSpec::Ring { n, k } => {
            if k % 2 != 0 || k == 0 {
                return Err(Error::BadParameter(format!(
                    "ring degree k must be even and positive, got {k}"
                )));
            }
            if k >= n {
                return Err(Error::BadParameter(format!(
                    "ring degree k = {k} must be below N = {n}"
                )));
            }
            let half = k / 2;
            let adj = Matrix::from_fn(n, n, |i, j| {
                let d = i.abs_diff(j);
                let ring_dist = d.min(n - d);
                if ring_dist >= 1 && ring_dist <= half {
                    coupling
                } else {
                    0.0
                }
            });
            (adj, NetworkKind::RingRegular { k })
        }
        NetworkSpec::ErdosRenyi { n, p, seed } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::BadParameter(format!(
                    "edge probability must lie in [0, 1], got {p}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut adj = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < p {
                        adj[(i, j)] = coupling;
                        adj[(j, i)] = coupling;
                    }
                }
            }
            (adj, NetworkKind::ErdosRenyi { p, seed })
        }
    };
    Ok(Network {
        adjacency,
        kind,
        symmetric: true,
    })
}

/// Eigenvalues with a unitary basis `Q` and upper-triangular `T` such that
/// `adjacency = Q T Qᴴ` and `diag(T)` lists the eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub basis: CMatrix,
    pub triangular: CMatrix,
    /// Set when the decomposition came from the real symmetric solver, so
    /// `basis` is real orthogonal and `triangular` is diagonal.
    pub real_symmetric: bool,
}

impl SpectralDecomposition {
    /// Real part of the basis; exact when `real_symmetric` is set.
    pub fn real_basis(&self) -> Matrix {
        self.basis.re()
    }
}

/// Spectral decomposition with eigenvalues sorted by descending real part,
/// then descending imaginary part.
pub fn spectrum(network: &Network) -> Result<SpectralDecomposition> {
    let a = network.adjacency();
    let n = a.rows();
    if network.is_symmetric() {
        let eig = symmetric_eigen(a)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| eig.values[y].total_cmp(&eig.values[x]).then(x.cmp(&y)));
        let values: Vec<f64> = order.iter().map(|&k| eig.values[k]).collect();
        let basis = Matrix::from_fn(n, n, |i, j| eig.vectors[(i, order[j])]);
        return Ok(SpectralDecomposition {
            eigenvalues: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            basis: basis.to_complex(),
            triangular: Matrix::diagonal(&values).to_complex(),
            real_symmetric: true,
        });
    }
    let mut schur = complex_schur(&a.to_complex())?;
    sort_schur(&mut schur);
    let eigenvalues = schur.eigenvalues();
    debug_assert!(eigenvalues
        .windows(2)
        .all(|w| spectral_order(&w[0], &w[1]) != core::cmp::Ordering::Greater));
    Ok(SpectralDecomposition {
        eigenvalues,
        basis: schur.q,
        triangular: schur.t,
        real_symmetric: false,
    })
}

/// `‖A Aᵀ − Aᵀ A‖_F`, zero for normal matrices.
pub fn normality_defect(a: &Matrix) -> f64 {
    let at = a.transpose();
    match (a.matmul(&at), at.matmul(a)) {
        (Ok(x), Ok(y)) => x.try_sub(&y).map_or(f64::INFINITY, |d| d.frobenius_norm()),
        _ => f64::INFINITY,
    }
}

/// Leading eigenvector magnitudes of a symmetric network, used to rank
/// candidate links. Falls back to in-degrees for non-symmetric input.
pub fn eigenvector_centrality(network: &Network) -> Result<Vec<f64>> {
    if !network.is_symmetric() {
        return Ok(network.in_degrees());
    }
    let eig = symmetric_eigen(network.adjacency())?;
    let n = network.size();
    let top = (0..n)
        .max_by(|&x, &y| eig.values[x].total_cmp(&eig.values[y]).then(y.cmp(&x)))
        .unwrap_or(0);
    Ok((0..n).map(|i| eig.vectors[(i, top)].abs()).collect())
}
