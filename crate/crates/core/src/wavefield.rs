//! Paraxial propagation of the two Gaussian slit modes.
//!
//! Coordinates are dimensionless: `ξ = x/a` across the beam and `ζ = z/z₀`
//! along it, with `z₀ = k a²`. Slit `k` is centred at `(−1)^k δ`, so slit 1
//! sits at `−δ` and slit 2 at `+δ`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::BlochState;
use crate::error::{Error, Result};
use crate::quad;

pub type ComplexAmplitude = Complex64;

/// Grid step used by [`default_grid`].
pub const DEFAULT_SPACING: f64 = 0.005;

/// Beam half-widths (in standard deviations) covered by [`default_grid`].
pub const DEFAULT_EXTENT_SIGMAS: f64 = 8.0;

/// Input samples with `|ψ|² / max|ψ|²` below this are dropped before the
/// Fresnel sum.
pub const DEFAULT_TRUNCATION: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitConfig {
    /// Half-separation of the slit centres in units of the slit width.
    pub delta: f64,
}

impl SlitConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidDelta(delta));
        }
        Ok(Self { delta })
    }

    /// Centre of slit `k` at the screen.
    pub fn center(&self, k: u8) -> Result<f64> {
        match k {
            1 => Ok(-self.delta),
            2 => Ok(self.delta),
            other => Err(Error::InvalidSlitIndex(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub xi: f64,
    pub zeta: f64,
}

impl PlanePoint {
    pub fn new(xi: f64, zeta: f64) -> Result<Self> {
        check_zeta(zeta)?;
        Ok(Self { xi, zeta })
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta < 0.0 || zeta.is_nan() {
        Err(Error::NegativeZeta(zeta))
    } else {
        Ok(())
    }
}

/// A complex field sampled on a uniform, strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Vec<f64>,
    values: Vec<ComplexAmplitude>,
    spacing: f64,
}

impl SampledField {
    pub fn new(grid: Vec<f64>, values: Vec<ComplexAmplitude>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidGrid("need at least two samples".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        let spacing = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid("spacing must be positive".into()));
        }
        let uniform = grid
            .windows(2)
            .all(|p| ((p[1] - p[0]) - spacing).abs() <= 1e-9 * spacing.max(1.0));
        if !uniform {
            return Err(Error::InvalidGrid("grid is not uniform".into()));
        }
        Ok(Self {
            grid,
            values,
            spacing,
        })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> ComplexAmplitude) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    /// Mode `k` propagated to `zeta`, sampled on `grid`.
    pub fn mode(k: u8, zeta: f64, cfg: &SlitConfig, grid: Vec<f64>) -> Result<Self> {
        cfg.center(k)?;
        check_zeta(zeta)?;
        let values = grid
            .iter()
            .map(|&xi| propagate_mode(k, &PlanePoint { xi, zeta }, cfg))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[ComplexAmplitude] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `∫|ψ|² dξ` by Simpson's rule.
    pub fn norm_squared(&self) -> f64 {
        let dens: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        quad::simpson(&dens, self.spacing)
    }

    /// `∫ conj(self)·other dξ`. Both fields must share a grid.
    pub fn inner(&self, other: &SampledField) -> Result<Complex64> {
        if self.grid.len() != other.grid.len()
            || (self.grid[0] - other.grid[0]).abs() > 1e-12
            || (self.spacing - other.spacing).abs() > 1e-12
        {
            return Err(Error::InvalidGrid("fields are on different grids".into()));
        }
        let re: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.conj() * b).re)
            .collect();
        let im: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.conj() * b).im)
            .collect();
        Ok(Complex64::new(
            quad::simpson(&re, self.spacing),
            quad::simpson(&im, self.spacing),
        ))
    }

    /// Same samples displaced by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            grid: self.grid.iter().map(|x| x + shift).collect(),
            values: self.values.clone(),
            spacing: self.spacing,
        }
    }
}

/// Symmetric grid covering both propagated modes out to
/// [`DEFAULT_EXTENT_SIGMAS`] standard deviations at plane `zeta`.
pub fn default_grid(zeta: f64, cfg: &SlitConfig) -> Vec<f64> {
    grid_with(zeta, cfg, DEFAULT_EXTENT_SIGMAS, DEFAULT_SPACING)
}

pub fn grid_with(zeta: f64, cfg: &SlitConfig, sigmas: f64, spacing: f64) -> Vec<f64> {
    let half = sigmas * ((1.0 + zeta * zeta) / 2.0).sqrt() + cfg.delta;
    quad::uniform_grid(-half, half, spacing)
}

/// Slit mode `k` at the screen: `π^(−1/4) exp(−(ξ − c_k)²/2)`.
pub fn slit_mode(k: u8, xi: f64, cfg: &SlitConfig) -> Result<ComplexAmplitude> {
    let c = cfg.center(k)?;
    let d = xi - c;
    Ok(Complex64::new(PI.powf(-0.25) * (-0.5 * d * d).exp(), 0.0))
}

/// Closed-form free propagation of slit mode `k` to the plane `p.zeta`.
pub fn propagate_mode(k: u8, p: &PlanePoint, cfg: &SlitConfig) -> Result<ComplexAmplitude> {
    check_zeta(p.zeta)?;
    let c = cfg.center(k)?;
    let zeta = p.zeta;
    let d = p.xi - c;
    let q = 1.0 + zeta * zeta;
    let exponent = -Complex64::new(1.0, -zeta) * (d * d / (2.0 * q));
    // principal branch of √(√π (1 + iζ))
    let denom = (Complex64::new(1.0, zeta) * PI.sqrt()).sqrt();
    Ok(exponent.exp() / denom)
}

/// `⟨ψ₁|ψ₂⟩ = e^(−δ²)`, independent of the plane.
pub fn mode_overlap(cfg: &SlitConfig) -> f64 {
    (-cfg.delta * cfg.delta).exp()
}

/// Fresnel integral of `field` to distance `zeta`, evaluated on the field's
/// own grid.
pub fn fresnel_propagate(field: &SampledField, zeta: f64) -> Result<SampledField> {
    fresnel_propagate_to(field, zeta, field.grid.clone())
}

/// Fresnel integral of `field` to distance `zeta`, evaluated at `out_grid`.
///
/// `zeta == 0` returns the input samples unchanged (the output grid is
/// ignored in that case).
pub fn fresnel_propagate_to(
    field: &SampledField,
    zeta: f64,
    out_grid: Vec<f64>,
) -> Result<SampledField> {
    fresnel_with(field, zeta, out_grid, 1, DEFAULT_TRUNCATION)
}

/// Like [`fresnel_propagate`] but fails with [`Error::GridTooCoarse`] when
/// the refinement error estimate exceeds `tol`.
pub fn fresnel_propagate_checked(
    field: &SampledField,
    zeta: f64,
    tol: f64,
) -> Result<SampledField> {
    let fine = fresnel_propagate(field, zeta)?;
    if zeta == 0.0 {
        return Ok(fine);
    }
    let estimate = error_between(&fine, field, zeta)?;
    if estimate > tol {
        return Err(Error::GridTooCoarse {
            estimate,
            tolerance: tol,
        });
    }
    Ok(fine)
}

/// Max-abs difference between the Fresnel sum on the full input grid and on
/// every second input sample.
pub fn fresnel_error_estimate(field: &SampledField, zeta: f64) -> Result<f64> {
    if zeta == 0.0 {
        return Ok(0.0);
    }
    let fine = fresnel_propagate(field, zeta)?;
    error_between(&fine, field, zeta)
}

fn error_between(fine: &SampledField, field: &SampledField, zeta: f64) -> Result<f64> {
    let coarse = fresnel_with(field, zeta, field.grid.clone(), 2, DEFAULT_TRUNCATION)?;
    Ok(fine
        .values
        .iter()
        .zip(&coarse.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

fn fresnel_with(
    field: &SampledField,
    zeta: f64,
    out_grid: Vec<f64>,
    stride: usize,
    truncation: f64,
) -> Result<SampledField> {
    check_zeta(zeta)?;
    if zeta == 0.0 {
        return Ok(field.clone());
    }
    let peak = field
        .values
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0, f64::max);
    let keep = |v: &Complex64| v.norm_sqr() > truncation * peak;
    let first = field.values.iter().position(keep).unwrap_or(0);
    let last = field
        .values
        .iter()
        .rposition(keep)
        .unwrap_or(field.values.len() - 1);

    // Subsample from `first`, ending on `last` whenever the stride allows.
    let idx: Vec<usize> = (first..=last).step_by(stride).collect();
    let h = field.spacing * stride as f64;
    let weights = simpson_weights(idx.len(), h);
    let src: Vec<(f64, Complex64)> = idx
        .iter()
        .zip(&weights)
        .map(|(&i, &wt)| (field.grid[i], field.values[i] * wt))
        .collect();

    let prefactor = (Complex64::new(0.0, 2.0 * PI * zeta)).sqrt().inv();
    let inv_two_zeta = 1.0 / (2.0 * zeta);
    let values: Vec<Complex64> = out_grid
        .par_iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(xp, v) in &src {
                let d = x - xp;
                acc += v * Complex64::cis(d * d * inv_two_zeta);
            }
            acc * prefactor
        })
        .collect();
    SampledField::new(out_grid, values)
}

fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    // Reuse the composite rule by integrating unit impulses.
    let mut w = vec![0.0; n];
    if n == 0 {
        return w;
    }
    let mut e = vec![0.0; n];
    for i in 0..n {
        e[i] = 1.0;
        w[i] = quad::simpson(&e, h);
        e[i] = 0.0;
    }
    w
}

/// `I(ξ, ζ) = |ψ₁|² + |ψ₂|²` in closed form.
pub fn intensity_envelope(p: &PlanePoint, cfg: &SlitConfig) -> f64 {
    let q = 1.0 + p.zeta * p.zeta;
    let w = w_of(p.xi, p.zeta, cfg);
    let a = w.abs();
    // 2 cosh(w) e^(−…) = e^(|w| − …)(1 + e^(−2|w|)) keeps the exponent bounded
    let log_part = -(p.xi * p.xi + cfg.delta * cfg.delta) / q + a;
    log_part.exp() * (1.0 + (-2.0 * a).exp()) / (PI * q).sqrt()
}

/// `w = 2ξδ/(1 + ζ²)`.
pub fn w_of(xi: f64, zeta: f64, cfg: &SlitConfig) -> f64 {
    2.0 * xi * cfg.delta / (1.0 + zeta * zeta)
}

/// Inverse of [`w_of`] in `ξ`.
pub fn xi_of_w(w: f64, zeta: f64, cfg: &SlitConfig) -> f64 {
    w * (1.0 + zeta * zeta) / (2.0 * cfg.delta)
}

/// `sech(w)` without overflow for large `|w|`.
pub fn sech(w: f64) -> f64 {
    let e = (-w.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Bloch vector of the measurement state at `w` on plane `zeta`:
/// `sech(w)·(cos wζ, sin wζ, −sinh w)`.
pub fn bloch_of_w(w: f64, zeta: f64) -> Vector3<f64> {
    let s = sech(w);
    let (sin, cos) = (w * zeta).sin_cos();
    Vector3::new(s * cos, s * sin, -w.tanh())
}

/// Measurement projector at `p`, in the `{|ψ₁⟩, |ψ₂⟩}` basis.
pub fn projector_of(p: &PlanePoint, cfg: &SlitConfig) -> Matrix2<Complex64> {
    let w = w_of(p.xi, p.zeta, cfg);
    let t = w.tanh();
    let off = Complex64::from_polar(0.5 * sech(w), -w * p.zeta);
    Matrix2::new(
        Complex64::new(0.5 * (1.0 - t), 0.0),
        off,
        off.conj(),
        Complex64::new(0.5 * (1.0 + t), 0.0),
    )
}

/// Photon detection density `I(ξ, ζ) · Tr(Π(ξ, ζ) ρ)`.
///
/// This integrates to [`detection_norm`] rather than exactly one because
/// the two slit modes overlap by `e^(−δ²)`.
pub fn detection_pdf(rho: &BlochState, p: &PlanePoint, cfg: &SlitConfig) -> Result<f64> {
    if !rho.is_physical() {
        return Err(Error::Unphysical(rho.norm()));
    }
    check_zeta(p.zeta)?;
    Ok(detection_pdf_unchecked(rho, p, cfg))
}

pub(crate) fn detection_pdf_unchecked(rho: &BlochState, p: &PlanePoint, cfg: &SlitConfig) -> f64 {
    let s = bloch_of_w(w_of(p.xi, p.zeta, cfg), p.zeta);
    let population = (0.5 * (1.0 + s.dot(&rho.vector()))).max(0.0);
    intensity_envelope(p, cfg) * population
}

/// `∫ detection_pdf dξ = 1 + r_x e^(−δ²)`.
pub fn detection_norm(rho: &BlochState, cfg: &SlitConfig) -> f64 {
    1.0 + rho.r[0] * mode_overlap(cfg)
}
