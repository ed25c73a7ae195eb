//! Multistart search for single-plane tetrahedron configurations.

use std::cmp::Ordering;

use nalgebra::SVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{objective_gradient, residual_jacobian, residuals, tetra_objective};
use super::{canonicalize, TetraSolution};
use crate::error::{Error, Result};

type Params = [f64; 5];

/// Knobs for [`search_tetrahedra`]. Defaults follow the documented search
/// box: `wᵢ ∈ [−3, 3]`, `f < 10⁻¹²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Exclusive lower end of the plane range.
    pub zeta_min: f64,
    /// Inclusive upper end of the plane range.
    pub zeta_max: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub tol: f64,
    /// Random starts draw each `wᵢ` uniformly from `[−w_bound, w_bound]`.
    pub w_bound: f64,
    /// Iteration cap of the gradient-descent stage.
    pub descent_iters: usize,
    /// Iteration cap of the Levenberg–Marquardt polish.
    pub polish_iters: usize,
    /// Max-abs distance in `(ζ, w)` under which two solutions are merged.
    pub dedup_threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            zeta_min: 0.0,
            zeta_max: 5.0,
            n_starts: 2000,
            seed: 7,
            tol: 1e-12,
            w_bound: 3.0,
            descent_iters: 300,
            polish_iters: 200,
            dedup_threshold: 1e-4,
        }
    }
}

impl SearchConfig {
    pub fn with_range(zeta_min: f64, zeta_max: f64) -> Self {
        Self {
            zeta_min,
            zeta_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.zeta_min >= 0.0
            && self.zeta_max > self.zeta_min
            && self.zeta_max.is_finite();
        if !ok {
            return Err(Error::InvalidRange(self.zeta_min, self.zeta_max));
        }
        if self.n_starts == 0 {
            return Err(Error::InvalidParameter("n_starts must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !(self.w_bound > 0.0) || !(self.dedup_threshold > 0.0) {
            return Err(Error::InvalidParameter(
                "tol, w_bound and dedup_threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn split(x: &Params) -> (f64, [f64; 4]) {
    (x[0], [x[1], x[2], x[3], x[4]])
}

fn f_at(x: &Params) -> f64 {
    let (z, w) = split(x);
    tetra_objective(z, &w)
}

/// Gradient descent with backtracking (halving, Armijo constant 10⁻⁴).
///
/// Stops on `f < tol`, gradient norm below 10⁻⁹, or `max_iters`.
pub fn gradient_descent(start: Params, tol: f64, max_iters: usize) -> Params {
    const ARMIJO: f64 = 1e-4;
    let mut x = start;
    let mut f = f_at(&x);
    let mut step = 1.0;
    for _ in 0..max_iters {
        if f < tol {
            break;
        }
        let (z, w) = split(&x);
        let g = objective_gradient(z, &w);
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2.sqrt() < 1e-9 {
            break;
        }
        let mut t = step * 2.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = x;
            for (xi, gi) in trial.iter_mut().zip(&g) {
                *xi -= t * gi;
            }
            let ft = f_at(&trial);
            if ft <= f - ARMIJO * t * g2 {
                x = trial;
                f = ft;
                step = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}

/// Levenberg–Marquardt on the six residuals `sᵢ·sⱼ + 1/3`.
pub fn polish(start: Params, max_iters: usize) -> Params {
    let mut x = start;
    let mut r = residual_vec(&x);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..max_iters {
        if cost < 1e-30 {
            break;
        }
        let (z, w) = split(&x);
        let jac = residual_jacobian(z, &w);
        let jtj = jac.transpose() * jac;
        let jtr = jac.transpose() * r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj;
            for d in 0..5 {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(dx) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = x;
            for (xi, di) in trial.iter_mut().zip(dx.iter()) {
                *xi += di;
            }
            let rt = residual_vec(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct < cost {
                let rel = (cost - ct) / cost;
                x = trial;
                r = rt;
                cost = ct;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                if dx.norm() < 1e-15 || rel < 1e-14 {
                    return x;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    x
}

fn residual_vec(x: &Params) -> SVector<f64, 6> {
    let (z, w) = split(x);
    SVector::<f64, 6>::from(residuals(z, &w))
}

/// Descent followed by polish from a single start; the result is
/// canonicalized with `ζ` folded to be nonnegative.
pub fn refine(start: Params, tol: f64, descent_iters: usize, polish_iters: usize) -> TetraSolution {
    let rough = gradient_descent(start, tol, descent_iters);
    let fine = polish(rough, polish_iters);
    // f(−ζ, w) = f(ζ, w): the sign of ζ only mirrors every s_y
    let (z, w) = split(&fine);
    let zeta = z.abs();
    canonicalize(&TetraSolution {
        zeta,
        w,
        residual: tetra_objective(zeta, &w),
    })
}

fn random_start(cfg: &SearchConfig, index: usize) -> Params {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let span = cfg.zeta_max - cfg.zeta_min;
    // (zeta_min, zeta_max]: 1 − U with U ∈ [0, 1)
    let zeta = cfg.zeta_min + span * (1.0 - rng.random::<f64>());
    let mut x = [zeta, 0.0, 0.0, 0.0, 0.0];
    for v in x.iter_mut().skip(1) {
        *v = rng.random_range(-cfg.w_bound..=cfg.w_bound);
    }
    x
}

fn accepted(sol: &TetraSolution, cfg: &SearchConfig) -> bool {
    sol.residual.is_finite()
        && sol.residual < cfg.tol
        && sol.zeta > cfg.zeta_min
        && sol.zeta <= cfg.zeta_max
        && sol.w.windows(2).all(|p| p[1] > p[0])
}

fn order(a: &TetraSolution, b: &TetraSolution) -> Ordering {
    a.zeta
        .total_cmp(&b.zeta)
        .then_with(|| {
            a.w.iter()
                .zip(&b.w)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| a.residual.total_cmp(&b.residual))
}

/// Sorts by `ζ` and merges solutions closer than `threshold` in max-abs
/// `(ζ, w)` distance, keeping the lowest-residual member of each cluster.
pub fn deduplicate(mut sols: Vec<TetraSolution>, threshold: f64) -> Vec<TetraSolution> {
    sols.sort_by(order);
    let mut out: Vec<TetraSolution> = Vec::new();
    for s in sols {
        match out.iter_mut().find(|o| o.distance(&s) < threshold) {
            Some(existing) => {
                if s.residual < existing.residual {
                    *existing = s;
                }
            }
            None => out.push(s),
        }
    }
    out.sort_by(order);
    out
}

/// Multistart search over `ζ ∈ (zeta_min, zeta_max]`.
///
/// Starts are independent and seeded from `(seed, start index)`, so the
/// result does not depend on how the work is scheduled.
pub fn search_tetrahedra(cfg: &SearchConfig) -> Result<Vec<TetraSolution>> {
    cfg.validate()?;
    let found: Vec<TetraSolution> = (0..cfg.n_starts)
        .into_par_iter()
        .map(|i| {
            refine(
                random_start(cfg, i),
                cfg.tol,
                cfg.descent_iters,
                cfg.polish_iters,
            )
        })
        .filter(|s| accepted(s, cfg))
        .collect();
    Ok(deduplicate(found, cfg.dedup_threshold))
}
