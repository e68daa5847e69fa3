//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use msfnet_core::model::PlantModel;
use msfnet_core::{Complex64, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Roots of `s^2 - tr s + det`.
pub fn quadratic_roots(tr: Complex64, det: Complex64) -> [Complex64; 2] {
    let disc = (tr * tr - det * 4.0).sqrt();
    [(tr + disc) * 0.5, (tr - disc) * 0.5]
}

/// For the reference plant the mode block is `F + (lambda - mu) H` with
/// characteristic polynomial `s^2 - (nu - 2) s + 5`.
pub fn reference_sigma(lambda: Complex64, mu: Complex64) -> f64 {
    let nu = lambda - mu;
    let [a, b] = quadratic_roots(nu - 2.0, Complex64::new(5.0, 0.0));
    a.re.max(b.re)
}

/// Real-axis version of [`reference_sigma`], written out case by case.
pub fn reference_sigma_real(lambda: f64, mu: f64) -> f64 {
    let b = lambda - mu - 2.0;
    let disc = b * b - 20.0;
    if disc < 0.0 {
        b / 2.0
    } else {
        (b + disc.sqrt()) / 2.0
    }
}

/// Eigenvalues of `F + lambda H + mu G` for a two-state model, from trace
/// and determinant.
pub fn block_roots(model: &PlantModel, lambda: Complex64, mu: Complex64) -> [Complex64; 2] {
    let (f, h, g) = (model.f(), model.h(), model.g());
    let m = |i: usize, j: usize| Complex64::new(f[(i, j)], 0.0) + lambda * h[(i, j)] + mu * g[(i, j)];
    let tr = m(0, 0) + m(1, 1);
    let det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    quadratic_roots(tr, det)
}

/// Random two-state, single-input plant with entries in [-3, 3].
pub fn random_model2(rng: &mut ChaCha8Rng) -> PlantModel {
    let mut m = |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.gen_range(-3.0..3.0));
    PlantModel::new(m(2, 2), m(2, 1), m(2, 2), m(1, 2), m(1, 2)).unwrap()
}

/// Random symmetric matrix with zero diagonal; each pair is linked with
/// probability `p` and weight 1 or a uniform draw from [0.2, 2].
pub fn random_symmetric_network(rng: &mut ChaCha8Rng, n: usize, p: f64, weighted: bool) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                let w = if weighted { rng.gen_range(0.2..2.0) } else { 1.0 };
                a[(i, j)] = w;
                a[(j, i)] = w;
            }
        }
    }
    a
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-scale..scale);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// Stacked closed loop assembled entry by entry:
/// block (i, j) is `delta_ij F + b_ij H + a_ij G`.
pub fn stacked_closed_loop(model: &PlantModel, b: &Matrix, a: &Matrix) -> Matrix {
    let n = model.state_dim();
    let nodes = b.rows();
    let (f, h, g) = (model.f(), model.h(), model.g());
    Matrix::from_fn(nodes * n, nodes * n, |r, c| {
        let (bi, ri) = (r / n, r % n);
        let (bj, cj) = (c / n, c % n);
        let diag = if bi == bj { f[(ri, cj)] } else { 0.0 };
        diag + b[(bi, bj)] * h[(ri, cj)] + a[(bi, bj)] * g[(ri, cj)]
    })
}

/// Largest distance when every point of `a` is paired with its nearest
/// still-unused point of `b`.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(m: &Matrix<Complex64>) -> Complex64 {
    let n = m.rows();
    let mut a: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm())).unwrap();
        if a[piv][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
        }
    }
    det
}

/// Fewest links over every symmetric 0/1 feedback pattern that makes the
/// stacked system strictly stable, by plain enumeration.
pub fn exhaustive_binary_links(model: &PlantModel, b: &Matrix) -> Option<usize> {
    let n = b.rows();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut best: Option<usize> = None;
    for mask in 0u32..(1 << pairs.len()) {
        let links = 2 * mask.count_ones() as usize;
        if best.is_some_and(|b| links >= b) {
            continue;
        }
        let mut a = Matrix::zeros(n, n);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask & (1 << k) != 0 {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
        let closed = stacked_closed_loop(model, b, &a);
        if msfnet_core::eigen::spectral_abscissa(&closed).unwrap() < 0.0 {
            best = Some(links);
        }
    }
    best
}

/// Random small closed loop whose spectral abscissa stays clear of the
/// imaginary axis, so a finite simulation can tell the two cases apart.
/// Draws are repeated until the verdict equals `stable`.
pub fn concordance_instance(rng: &mut ChaCha8Rng, stable: bool) -> (msfnet_core::verify::ClosedLoopSystem, f64) {
    loop {
        let model = random_model2(rng);
        let nodes = rng.gen_range(2..=4);
        let b = random_symmetric_network(rng, nodes, 0.6, true);
        let a = random_symmetric(rng, nodes, 1.5);
        let system = msfnet_core::verify::build_closed_loop(&model, &b, &a).unwrap();
        let alpha = msfnet_core::eigen::spectral_abscissa(system.matrix()).unwrap();
        let clear = if stable { alpha < -0.02 && alpha > -20.0 } else { alpha > 0.1 };
        if clear {
            return (system, alpha);
        }
    }
}

/// Simulates from a random start for `20 / |alpha|` and checks the outcome
/// agrees with the sign of `alpha`: decay below 1% of the initial norm when
/// stable, growth or divergence otherwise.
pub fn simulation_agrees(system: &msfnet_core::verify::ClosedLoopSystem, alpha: f64, rng: &mut ChaCha8Rng) -> bool {
    let x0: Vec<f64> = (0..system.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let t_end = 20.0 / alpha.abs();
    let dt = (0.05 / system.matrix().inf_norm().max(1.0)).min(t_end / 100.0);
    let traj = msfnet_core::verify::simulate(system, &x0, t_end, dt, usize::MAX).unwrap();
    let n0 = msfnet_core::verify::l2_norm(&x0);
    let n1 = msfnet_core::verify::l2_norm(&traj.last().x);
    if alpha < 0.0 {
        !traj.diverged && n1 < 0.01 * n0
    } else {
        traj.diverged || n1 > n0
    }
}

/// Random jointly triangularizable instance for the spectrum-union check:
/// a model with up to three states, and either a symmetric weighted network
/// with real gains or a weighted directed cycle (normal, complex spectrum)
/// with complex gains.
pub fn union_instance(
    rng: &mut ChaCha8Rng,
    symmetric: bool,
) -> (PlantModel, msfnet_core::graphs::Network, Vec<Complex64>) {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=n);
    let mut g = |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0));
    let model = PlantModel::new(g(n, n), g(n, m), g(n, n), g(m, n), g(m, n)).unwrap();
    let nodes = rng.gen_range(2..=8);
    let b = if symmetric {
        random_symmetric_network(rng, nodes, 0.6, true)
    } else {
        let w = rng.gen_range(0.5..2.0);
        Matrix::from_fn(nodes, nodes, |i, j| if j == (i + 1) % nodes { w } else { 0.0 })
    };
    let gains = (0..nodes)
        .map(|_| {
            let im = if symmetric { 0.0 } else { rng.gen_range(-1.0..1.0) };
            Complex64::new(rng.gen_range(-3.0..3.0), im)
        })
        .collect();
    (model, msfnet_core::graphs::Network::custom(b).unwrap(), gains)
}
