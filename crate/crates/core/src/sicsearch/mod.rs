//! Single-plane tetrahedron measurements: search, balancing and POVM
//! assembly.

mod objective;
mod povm;
mod search;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use objective::{
    bloch_vectors, gram_matrix, gram_max_error, objective_gradient, residual_jacobian, residuals,
    tetra_objective, Jacobian,
};
pub use povm::{
    balance_solution, balanced_delta, build_povm, closure_scan, detector_positions,
    point_detector_spread, DetectorLayout, Povm4, PovmElement, DEFAULT_DELTA_XI,
    MAX_WINDOW_W_SPREAD,
};
pub use search::{deduplicate, gradient_descent, polish, refine, search_tetrahedra, SearchConfig};

/// Starting point for the nearest-plane symmetric solution; polished by
/// [`reference_solution`].
pub const REFERENCE_GUESS: (f64, [f64; 4]) = (3.4678, [-1.0287, -0.268044, 0.268044, 1.0287]);

/// Tolerance on `|w₁ + w₄|` and `|w₂ + w₃|` for calling a solution symmetric.
pub const SYMMETRY_TOL: f64 = 1e-6;

/// One detection plane `ζ` and four ascending `w` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetraSolution {
    pub zeta: f64,
    pub w: [f64; 4],
    pub residual: f64,
}

impl TetraSolution {
    /// Builds a solution and evaluates its residual.
    pub fn new(zeta: f64, w: [f64; 4]) -> Self {
        Self {
            zeta,
            w,
            residual: tetra_objective(zeta, &w),
        }
    }

    /// Max-abs distance over `(ζ, w)`.
    pub fn distance(&self, other: &TetraSolution) -> f64 {
        let mut d = (self.zeta - other.zeta).abs();
        for (a, b) in self.w.iter().zip(&other.w) {
            d = d.max((a - b).abs());
        }
        d
    }

    /// Invariant under `ξ → −ξ` up to [`SYMMETRY_TOL`].
    pub fn is_symmetric(&self) -> bool {
        (self.w[0] + self.w[3]).abs() < SYMMETRY_TOL && (self.w[1] + self.w[2]).abs() < SYMMETRY_TOL
    }

    pub fn bloch_vectors(&self) -> [nalgebra::Vector3<f64>; 4] {
        bloch_vectors(self.zeta, &self.w)
    }

    pub fn gram_max_error(&self) -> f64 {
        gram_max_error(&self.bloch_vectors())
    }
}

/// Sorts `w` ascending and picks the lexicographically smaller of the
/// solution and its mirror image `(−w₄, −w₃, −w₂, −w₁)`.
pub fn canonicalize(sol: &TetraSolution) -> TetraSolution {
    let mut w = sol.w;
    w.sort_by(f64::total_cmp);
    let mirrored = [-w[3], -w[2], -w[1], -w[0]];
    let smaller = mirrored
        .iter()
        .zip(&w)
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        == Some(Ordering::Less);
    TetraSolution {
        w: if smaller { mirrored } else { w },
        ..*sol
    }
}

/// The `ζ ≈ 3.4678` symmetric solution polished to machine precision.
pub fn reference_solution() -> TetraSolution {
    let (zeta, w) = REFERENCE_GUESS;
    let x = polish([zeta, w[0], w[1], w[2], w[3]], 200);
    canonicalize(&TetraSolution::new(x[0], [x[1], x[2], x[3], x[4]]))
}

/// Serialized form of a catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub zeta: f64,
    pub w: [f64; 4],
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_balanced: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<[f64; 4]>,
    pub gram_max_error: f64,
}

impl SolutionRecord {
    /// Fills in the balanced separation and detector positions for
    /// symmetric solutions.
    pub fn from_solution(sol: &TetraSolution) -> Self {
        let delta_balanced = balance_solution(sol);
        let xi = delta_balanced.and_then(|d| detector_positions(sol, d).ok());
        Self {
            zeta: sol.zeta,
            w: sol.w,
            residual: sol.residual,
            delta_balanced,
            xi,
            gram_max_error: sol.gram_max_error(),
        }
    }

    pub fn solution(&self) -> TetraSolution {
        TetraSolution {
            zeta: self.zeta,
            w: self.w,
            residual: self.residual,
        }
    }
}
