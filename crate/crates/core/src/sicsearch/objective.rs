//! Tetrahedron objective on the single-plane Bloch curve.
//!
//! For two detectors the inner product of their measurement Bloch vectors is
//! `sech wᵢ sech wⱼ cos((wᵢ − wⱼ)ζ) + tanh wᵢ tanh wⱼ`, so the whole objective
//! is a smooth function of the five reals `(ζ, w₁, …, w₄)`.

use nalgebra::{SMatrix, Vector3};

use crate::wavefield::{bloch_of_w, sech};

pub(crate) const PAIRS: [(usize, usize); 6] = [(1, 0), (2, 0), (3, 0), (2, 1), (3, 1), (3, 2)];

pub type Jacobian = SMatrix<f64, 6, 5>;

/// The four measurement Bloch vectors at plane `zeta`.
pub fn bloch_vectors(zeta: f64, w: &[f64; 4]) -> [Vector3<f64>; 4] {
    [
        bloch_of_w(w[0], zeta),
        bloch_of_w(w[1], zeta),
        bloch_of_w(w[2], zeta),
        bloch_of_w(w[3], zeta),
    ]
}

/// The six residuals `sᵢ·sⱼ + 1/3`, `i > j`.
pub fn residuals(zeta: f64, w: &[f64; 4]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        out[k] = pair_dot(zeta, w[i], w[j]) + 1.0 / 3.0;
    }
    out
}

fn pair_dot(zeta: f64, a: f64, b: f64) -> f64 {
    sech(a) * sech(b) * ((a - b) * zeta).cos() + a.tanh() * b.tanh()
}

/// `f = Σ_{i>j} (sᵢ·sⱼ + 1/3)²`; zero exactly on a regular tetrahedron.
pub fn tetra_objective(zeta: f64, w: &[f64; 4]) -> f64 {
    residuals(zeta, w).iter().map(|r| r * r).sum()
}

/// Jacobian of [`residuals`] with columns `(ζ, w₁, w₂, w₃, w₄)`.
pub fn residual_jacobian(zeta: f64, w: &[f64; 4]) -> Jacobian {
    let mut jac = Jacobian::zeros();
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let (a, b) = (w[i], w[j]);
        let (sa, sb) = (sech(a), sech(b));
        let (ta, tb) = (a.tanh(), b.tanh());
        let (sin, cos) = ((a - b) * zeta).sin_cos();
        let ss = sa * sb;
        jac[(k, 0)] = -ss * (a - b) * sin;
        // d sech(x)/dx = −sech(x) tanh(x), d tanh(x)/dx = sech²(x)
        jac[(k, 1 + i)] = -ss * ta * cos - ss * zeta * sin + sa * sa * tb;
        jac[(k, 1 + j)] = -ss * tb * cos + ss * zeta * sin + sb * sb * ta;
    }
    jac
}

/// Gradient of [`tetra_objective`] in `(ζ, w₁, …, w₄)`.
pub fn objective_gradient(zeta: f64, w: &[f64; 4]) -> [f64; 5] {
    let r = residuals(zeta, w);
    let jac = residual_jacobian(zeta, w);
    let mut g = [0.0; 5];
    for (c, gc) in g.iter_mut().enumerate() {
        *gc = 2.0 * (0..6).map(|k| jac[(k, c)] * r[k]).sum::<f64>();
    }
    g
}

/// Gram matrix `sᵢ·sⱼ` of four vectors.
pub fn gram_matrix(s: &[Vector3<f64>; 4]) -> [[f64; 4]; 4] {
    let mut g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            g[i][j] = s[i].dot(&s[j]);
        }
    }
    g
}

/// Largest entrywise deviation from the tetrahedron Gram matrix
/// `(4/3)δᵢⱼ − 1/3`.
pub fn gram_max_error(s: &[Vector3<f64>; 4]) -> f64 {
    let g = gram_matrix(s);
    let mut worst: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { -1.0 / 3.0 };
            worst = worst.max((v - target).abs());
        }
    }
    worst
}
