//! Qubit states in Bloch-vector form.
//!
//! The 2×2 matrix convention used throughout the crate is
//! `ρ = ½(I + r·σ)`, so the upper-right element is `(r_x − i r_y)/2`. The
//! basis is `{|ψ₁⟩, |ψ₂⟩}`, the two slit modes.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on `|r| ≤ 1` accepted by [`BlochState::new`].
pub const PHYSICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub r: [f64; 3],
}

impl BlochState {
    /// Validated constructor; rejects `|r| > 1 + PHYSICAL_TOL`.
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let s = Self { r };
        let n = s.norm();
        if !n.is_finite() || n > 1.0 + PHYSICAL_TOL {
            return Err(Error::Unphysical(n));
        }
        Ok(s)
    }

    /// No physicality check. Used for raw estimates before projection.
    pub fn unchecked(r: [f64; 3]) -> Self {
        Self { r }
    }

    pub fn maximally_mixed() -> Self {
        Self { r: [0.0; 3] }
    }

    /// `|ψ₁⟩⟨ψ₁|`, the north pole.
    pub fn mode_one() -> Self {
        Self { r: [0.0, 0.0, 1.0] }
    }

    /// `|ψ₂⟩⟨ψ₂|`, the south pole.
    pub fn mode_two() -> Self {
        Self { r: [0.0, 0.0, -1.0] }
    }

    pub fn from_vector(v: &Vector3<f64>) -> Result<Self> {
        Self::new([v.x, v.y, v.z])
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.r[0], self.r[1], self.r[2])
    }

    pub fn norm(&self) -> f64 {
        self.vector().norm()
    }

    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + PHYSICAL_TOL
    }

    pub fn density_matrix(&self) -> Matrix2<Complex64> {
        bloch_matrix(&self.vector())
    }

    /// Inverse of [`BlochState::density_matrix`]; ignores any anti-Hermitian part.
    pub fn from_density_matrix(m: &Matrix2<Complex64>) -> Self {
        let tr = (m[(0, 0)] + m[(1, 1)]).re;
        let x = (m[(0, 1)].re + m[(1, 0)].re) / tr;
        let y = (m[(1, 0)].im - m[(0, 1)].im) / tr;
        let z = (m[(0, 0)].re - m[(1, 1)].re) / tr;
        Self { r: [x, y, z] }
    }

    /// Uniform on the unit sphere.
    pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = Vector3::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            );
            let n: f64 = v.norm();
            if n > 1e-12 {
                let u = v / n;
                return Self { r: [u.x, u.y, u.z] };
            }
        }
    }

    /// Uniform in the unit ball.
    pub fn random_mixed<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let dir = Self::random_pure(rng).vector();
        let radius = rng.random::<f64>().cbrt();
        let v = dir * radius;
        Self { r: [v.x, v.y, v.z] }
    }
}

/// `½(I + v·σ)` for an arbitrary real 3-vector.
pub fn bloch_matrix(v: &Vector3<f64>) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(0.5 * (1.0 + v.z), 0.0),
        Complex64::new(0.5 * v.x, -0.5 * v.y),
        Complex64::new(0.5 * v.x, 0.5 * v.y),
        Complex64::new(0.5 * (1.0 - v.z), 0.0),
    )
}

/// `Tr(a·b)` for 2×2 complex matrices.
pub fn trace_product(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Complex64 {
    (a * b).trace()
}
