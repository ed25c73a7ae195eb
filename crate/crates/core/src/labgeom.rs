//! Laboratory lengths for a dimensionless design.
//!
//! Transverse lengths scale with the slit width `a`; axial lengths with the
//! Fresnel scale `z₀ = k a² = 2π a² / λ`. Everything is stored in meters.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sicsearch::{detector_positions, TetraSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalGeometry {
    /// Wavelength.
    pub lambda: f64,
    /// Slit width (standard deviation of the Gaussian slit).
    pub a: f64,
    /// Distance between slit centres, `2δa`.
    pub two_d: f64,
    /// Slit-to-detector distance, `ζ z₀`.
    pub z_det: f64,
    /// Detector positions, `ξᵢ a`.
    pub x: [f64; 4],
    /// Fresnel scale `2π a² / λ`.
    pub z0: f64,
}

/// Dimensionless design recovered by [`from_physical`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensionless {
    pub delta: f64,
    pub zeta: f64,
    pub xi: [f64; 4],
}

pub fn fresnel_scale(lambda: f64, a: f64) -> f64 {
    2.0 * PI * a * a / lambda
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

pub fn to_physical(sol: &TetraSolution, delta: f64, lambda: f64, a: f64) -> Result<PhysicalGeometry> {
    positive("wavelength", lambda)?;
    positive("slit width", a)?;
    let xi = detector_positions(sol, delta)?;
    let z0 = fresnel_scale(lambda, a);
    Ok(PhysicalGeometry {
        lambda,
        a,
        two_d: 2.0 * delta * a,
        z_det: sol.zeta * z0,
        x: xi.map(|v| v * a),
        z0,
    })
}

pub fn from_physical(geom: &PhysicalGeometry) -> Result<Dimensionless> {
    positive("wavelength", geom.lambda)?;
    positive("slit width", geom.a)?;
    positive("slit separation", geom.two_d)?;
    if !(geom.z_det >= 0.0) {
        return Err(Error::NegativeZeta(geom.z_det));
    }
    let z0 = fresnel_scale(geom.lambda, geom.a);
    Ok(Dimensionless {
        delta: geom.two_d / (2.0 * geom.a),
        zeta: geom.z_det / z0,
        xi: geom.x.map(|v| v / geom.a),
    })
}

/// Column names of [`PhysicalGeometry::table_row`].
pub const TABLE_HEADER: [&str; 6] = ["lambda_nm", "a_um", "two_d_um", "z_det_cm", "x3_um", "x4_um"];

impl PhysicalGeometry {
    /// `(λ, a, 2d, z_det, x₃, x₄)` in nm, μm, μm, cm, μm, μm.
    pub fn table_row(&self) -> [f64; 6] {
        [
            self.lambda * 1e9,
            self.a * 1e6,
            self.two_d * 1e6,
            self.z_det * 1e2,
            self.x[2] * 1e6,
            self.x[3] * 1e6,
        ]
    }
}

/// Length with a unit picked from its magnitude.
pub struct Length(pub f64);

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0;
        let a = m.abs();
        let (scale, unit) = if a == 0.0 {
            (1.0, "m")
        } else if a < 1e-6 {
            (1e9, "nm")
        } else if a < 1e-3 {
            (1e6, "μm")
        } else if a < 1e-2 {
            (1e3, "mm")
        } else if a < 1.0 {
            (1e2, "cm")
        } else {
            (1.0, "m")
        };
        let prec = f.precision().unwrap_or(3);
        write!(f, "{:.*} {}", prec, m * scale, unit)
    }
}

impl fmt::Display for PhysicalGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "λ = {:.0}, a = {:.1}, 2d = {:.0}, z_det = {:.2}, x₃ = {:.0}, x₄ = {:.0}",
            Length(self.lambda),
            Length(self.a),
            Length(self.two_d),
            Length(self.z_det),
            Length(self.x[2]),
            Length(self.x[3]),
        )
    }
}
