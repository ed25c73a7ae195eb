//! Detector layouts, slit balancing and the four-outcome POVM.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TetraSolution;
use crate::bloch::bloch_matrix;
use crate::error::{Error, Result};
use crate::wavefield::{bloch_of_w, intensity_envelope, xi_of_w, PlanePoint, SlitConfig};

/// Default detector half-width in units of the slit width.
pub const DEFAULT_DELTA_XI: f64 = 1e-3;

/// Largest change of `w` allowed across one detector window.
pub const MAX_WINDOW_W_SPREAD: f64 = 1e-2;

/// Four point-like detectors on the plane `zeta0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorLayout {
    pub zeta0: f64,
    pub xi: [f64; 4],
    pub delta_xi: f64,
    pub delta: f64,
}

/// Change of `w` across a full window `[ξ − Δξ, ξ + Δξ]`.
pub fn point_detector_spread(delta_xi: f64, delta: f64, zeta: f64) -> f64 {
    4.0 * delta * delta_xi / (1.0 + zeta * zeta)
}

fn check_window(delta_xi: f64, delta: f64, zeta: f64) -> Result<()> {
    if !(delta_xi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "detector half-width must be positive, got {delta_xi}"
        )));
    }
    let spread = point_detector_spread(delta_xi, delta, zeta);
    if spread >= MAX_WINDOW_W_SPREAD {
        return Err(Error::InvalidParameter(format!(
            "detector half-width {delta_xi} spans {spread:.3e} in w, limit {MAX_WINDOW_W_SPREAD:e}"
        )));
    }
    Ok(())
}

impl DetectorLayout {
    pub fn new(zeta0: f64, xi: [f64; 4], delta_xi: f64, delta: f64) -> Result<Self> {
        SlitConfig::new(delta)?;
        if zeta0 < 0.0 || zeta0.is_nan() {
            return Err(Error::NegativeZeta(zeta0));
        }
        check_window(delta_xi, delta, zeta0)?;
        Ok(Self {
            zeta0,
            xi,
            delta_xi,
            delta,
        })
    }

    pub fn from_solution(sol: &TetraSolution, delta: f64, delta_xi: f64) -> Result<Self> {
        Self::new(sol.zeta, detector_positions(sol, delta)?, delta_xi, delta)
    }

    pub fn slit(&self) -> SlitConfig {
        SlitConfig { delta: self.delta }
    }

    /// Closed windows `[ξᵢ − Δξ, ξᵢ + Δξ]`.
    pub fn windows(&self) -> [(f64, f64); 4] {
        self.xi.map(|x| (x - self.delta_xi, x + self.delta_xi))
    }

    /// Fails with [`Error::OverlappingWindows`] if two windows intersect.
    pub fn check_disjoint(&self) -> Result<()> {
        let win = self.windows();
        for i in 0..4 {
            for j in (i + 1)..4 {
                if win[i].0 <= win[j].1 && win[j].0 <= win[i].1 {
                    return Err(Error::OverlappingWindows(i, j));
                }
            }
        }
        Ok(())
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Slit half-separation that equalizes the envelope at a symmetric pair of
/// detector pairs `±w₁, ±w₂` with `w₁ < w₂ < 0`.
pub fn balanced_delta(zeta: f64, w1: f64, w2: f64) -> Result<f64> {
    if !(w1 < w2 && w2 < 0.0) {
        return Err(Error::BalanceDomain { w1, w2 });
    }
    let num = (1.0 + zeta * zeta) * (w1 * w1 - w2 * w2);
    let den = ln_cosh(w1) - ln_cosh(w2);
    Ok(0.5 * (num / den).sqrt())
}

/// Balanced separation for a symmetric solution; `None` for asymmetric ones.
pub fn balance_solution(sol: &TetraSolution) -> Option<f64> {
    if !sol.is_symmetric() {
        return None;
    }
    balanced_delta(sol.zeta, sol.w[0], sol.w[1]).ok()
}

/// `ξᵢ = wᵢ(1 + ζ²)/(2δ)`, in the order of `sol.w`.
pub fn detector_positions(sol: &TetraSolution, delta: f64) -> Result<[f64; 4]> {
    let cfg = SlitConfig::new(delta)?;
    Ok(sol.w.map(|w| xi_of_w(w, sol.zeta, &cfg)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmElement {
    pub weight: f64,
    pub bloch: [f64; 3],
}

impl PovmElement {
    pub fn vector(&self) -> Vector3<f64> {
        Vector3::from(self.bloch)
    }

    /// `cᵢ · ½(I + sᵢ·σ)`.
    pub fn effect(&self) -> Matrix2<Complex64> {
        bloch_matrix(&self.vector()) * Complex64::new(self.weight, 0.0)
    }
}

/// Four weighted rank-1 effects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Povm4 {
    pub elements: [PovmElement; 4],
    /// Frobenius norm of `Σᵢ Eᵢ − I`.
    pub closure_residual: f64,
}

impl Povm4 {
    pub fn new(elements: [PovmElement; 4]) -> Self {
        let sum = elements
            .iter()
            .fold(Matrix2::<Complex64>::zeros(), |acc, e| acc + e.effect());
        let closure_residual = (sum - Matrix2::identity()).norm();
        Self {
            elements,
            closure_residual,
        }
    }

    /// Equal weights ½ on four given unit vectors.
    pub fn equal_weights(vectors: [Vector3<f64>; 4]) -> Self {
        Self::new(vectors.map(|v| PovmElement {
            weight: 0.5,
            bloch: [v.x, v.y, v.z],
        }))
    }

    pub fn weights(&self) -> [f64; 4] {
        self.elements.map(|e| e.weight)
    }

    pub fn vectors(&self) -> [Vector3<f64>; 4] {
        self.elements.map(|e| e.vector())
    }

    pub fn is_balanced(&self, tol: f64) -> bool {
        self.closure_residual <= tol && self.elements.iter().all(|e| (e.weight - 0.5).abs() <= tol)
    }
}

/// POVM realized by four windows of half-width `delta_xi` at the solution's
/// detector positions for slit half-separation `delta`.
///
/// Weights are `I(ξᵢ)Δξ / Σ` with `Σ = Σᵢ I(ξᵢ)Δξ / 2`, so they always sum
/// to 2.
pub fn build_povm(sol: &TetraSolution, delta: f64, delta_xi: f64) -> Result<Povm4> {
    let cfg = SlitConfig::new(delta)?;
    check_window(delta_xi, delta, sol.zeta)?;
    let xi = detector_positions(sol, delta)?;
    let intensity = xi.map(|x| {
        intensity_envelope(
            &PlanePoint {
                xi: x,
                zeta: sol.zeta,
            },
            &cfg,
        ) * delta_xi
    });
    let sigma: f64 = intensity.iter().sum::<f64>() / 2.0;
    let mut elements = [PovmElement {
        weight: 0.0,
        bloch: [0.0; 3],
    }; 4];
    for (k, e) in elements.iter_mut().enumerate() {
        let s = bloch_of_w(sol.w[k], sol.zeta);
        *e = PovmElement {
            weight: intensity[k] / sigma,
            bloch: [s.x, s.y, s.z],
        };
    }
    Ok(Povm4::new(elements))
}

/// Closure residual of [`build_povm`] across several slit separations.
pub fn closure_scan(
    sol: &TetraSolution,
    deltas: &[f64],
    delta_xi: f64,
) -> Result<Vec<(f64, f64)>> {
    deltas
        .iter()
        .map(|&d| build_povm(sol, d, delta_xi).map(|p| (d, p.closure_residual)))
        .collect()
}
