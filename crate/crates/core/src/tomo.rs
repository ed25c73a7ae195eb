//! Photon-counting simulation and qubit state reconstruction for the
//! four-detector layout.
//!
//! Photon positions are drawn by inverse-CDF sampling of the detection
//! density on a fine table whose knots include every detector window edge.
//! Counting only needs the uniform variate compared against the CDF at those
//! edges, so [`simulate_counts`] reproduces `bin_counts(sample_positions(..))`
//! draw for draw without materializing positions.

use nalgebra::{Matrix2, Matrix4x3, Vector3, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{bloch_matrix, BlochState};
use crate::error::{Error, Result};
use crate::quad;
use crate::sicsearch::{DetectorLayout, Povm4};
use crate::wavefield::{
    default_grid, detection_norm, detection_pdf_unchecked, PlanePoint, SlitConfig,
};

/// Draws per deterministic RNG block. Block `b` uses ChaCha stream `b`.
pub const SAMPLE_BLOCK: usize = 1 << 16;

pub const MLE_MAX_ITERS: usize = 5000;
pub const MLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n: [u64; 4],
    pub n_discarded: u64,
    pub n_total: u64,
}

impl CountRecord {
    pub fn accepted(&self) -> u64 {
        self.n.iter().sum()
    }

    pub fn acceptance_fraction(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.accepted() as f64 / self.n_total as f64
        }
    }

    /// `nᵢ / Σn` over accepted photons.
    pub fn frequencies(&self) -> Result<[f64; 4]> {
        let acc = self.accepted();
        if acc == 0 {
            return Err(Error::NoCounts);
        }
        Ok(self.n.map(|k| k as f64 / acc as f64))
    }

    pub fn is_consistent(&self) -> bool {
        self.accepted() + self.n_discarded == self.n_total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LinearInversion,
    Mle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub r_hat: [f64; 3],
    pub method: Method,
    /// True when the physicality projection changed the estimate.
    pub projected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_unprojected: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_likelihood: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_distance: Option<f64>,
}

impl ReconstructionReport {
    pub fn state(&self) -> BlochState {
        BlochState::unchecked(self.r_hat)
    }

    /// Fills fidelity and trace distance against a known state.
    pub fn with_truth(mut self, truth: &BlochState) -> Self {
        let est = self.state();
        self.fidelity = Some(fidelity(&est, truth));
        self.trace_distance = Some(trace_distance(&est, truth));
        self
    }
}

/// `pᵢ = cᵢ · ½(1 + sᵢ·r)`.
pub fn ideal_probabilities(rho: &BlochState, povm: &Povm4) -> [f64; 4] {
    let r = rho.vector();
    povm.elements
        .map(|e| e.weight * 0.5 * (1.0 + e.vector().dot(&r)))
}

/// Outcome probabilities conditioned on the photon landing in some window.
pub fn conditional_probabilities(rho: &BlochState, povm: &Povm4) -> [f64; 4] {
    let p = ideal_probabilities(rho, povm);
    let total: f64 = p.iter().sum();
    p.map(|v| v / total)
}

/// Linear inversion from outcome frequencies.
///
/// `p_hat` is renormalized to sum to one and matched against the conditional
/// model `pᵢ ∝ cᵢ(1 + sᵢ·r)`, which stays linear in `r`:
/// `(cᵢsᵢ − p̂ᵢ Σⱼcⱼsⱼ)·r / 2 = p̂ᵢ − cᵢ/2` (using `Σcⱼ = 2`). For equal
/// weights this is the frame formula `r = 3 Σ p̂ᵢ sᵢ`. The result is not
/// projected.
pub fn linear_invert(p_hat: &[f64; 4], povm: &Povm4) -> Result<BlochState> {
    let total: f64 = p_hat.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoCounts);
    }
    let f = p_hat.map(|v| v / total);
    let c_sum: f64 = povm.weights().iter().sum();
    let drift: Vector3<f64> = povm
        .elements
        .iter()
        .fold(Vector3::zeros(), |acc, e| acc + e.vector() * e.weight);
    let mut a = Matrix4x3::<f64>::zeros();
    let mut b = Vector4::<f64>::zeros();
    for (i, e) in povm.elements.iter().enumerate() {
        let row = (e.vector() * e.weight - drift * f[i]) * 0.5;
        a.set_row(i, &row.transpose());
        b[i] = f[i] * c_sum * 0.5 - 0.5 * e.weight;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = 1e-10 * smax.max(f64::MIN_POSITIVE);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let flat: Vec<[f64; 3]> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= cutoff)
        .map(|(k, _)| [v_t[(k, 0)], v_t[(k, 1)], v_t[(k, 2)]])
        .collect();
    if !flat.is_empty() {
        return Err(Error::RankDeficient(flat));
    }
    let r = svd
        .solve(&b, cutoff)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(BlochState::unchecked([r[0], r[1], r[2]]))
}

/// Ideal-tetrahedron frame formula `r = 3 Σ p̂ᵢ sᵢ`, ignoring weights.
pub fn frame_invert(p_hat: &[f64; 4], povm: &Povm4) -> BlochState {
    let total: f64 = p_hat.iter().sum();
    let r = povm
        .elements
        .iter()
        .zip(p_hat)
        .fold(Vector3::zeros(), |acc, (e, p)| acc + e.vector() * (3.0 * p / total));
    BlochState::unchecked([r.x, r.y, r.z])
}

/// Rescales counts by `1/cᵢ` so an unbalanced layout looks balanced, then
/// applies the frame formula.
pub fn artificially_balanced(counts: &CountRecord, povm: &Povm4) -> Result<BlochState> {
    if counts.accepted() == 0 {
        return Err(Error::NoCounts);
    }
    let mut scaled = [0.0; 4];
    for (k, s) in scaled.iter_mut().enumerate() {
        *s = counts.n[k] as f64 / povm.elements[k].weight;
    }
    Ok(frame_invert(&scaled, povm))
}

/// Rescales onto the unit sphere when `|r| > 1`; returns whether it did.
///
/// Norms within a few ulps of one count as on the sphere, so the projection
/// is idempotent.
pub fn project_physical(r_hat: &[f64; 3]) -> (BlochState, bool) {
    let v = Vector3::from(*r_hat);
    let n = v.norm();
    if n <= 1.0 + 4.0 * f64::EPSILON {
        (BlochState::unchecked(*r_hat), false)
    } else {
        let u = v / n;
        (BlochState::unchecked([u.x, u.y, u.z]), true)
    }
}

/// Linear-inversion report from counts.
pub fn reconstruct_linear(counts: &CountRecord, povm: &Povm4) -> Result<ReconstructionReport> {
    let raw = linear_invert(&counts.frequencies()?, povm)?;
    Ok(linear_report(raw))
}

fn linear_report(raw: BlochState) -> ReconstructionReport {
    let (state, projected) = project_physical(&raw.r);
    ReconstructionReport {
        r_hat: state.r,
        method: Method::LinearInversion,
        projected,
        r_unprojected: Some(raw.r),
        iterations: None,
        log_likelihood: None,
        fidelity: None,
        trace_distance: None,
    }
}

/// Artificial-balance variant of [`reconstruct_linear`].
pub fn reconstruct_artificial(counts: &CountRecord, povm: &Povm4) -> Result<ReconstructionReport> {
    Ok(linear_report(artificially_balanced(counts, povm)?))
}

/// Result of [`mle_reconstruct`].
#[derive(Debug, Clone, PartialEq)]
pub struct MleEstimate {
    pub state: BlochState,
    pub iterations: usize,
    /// Per-photon log-likelihood after each iteration, starting with the
    /// initial state.
    pub trace: Vec<f64>,
}

impl MleEstimate {
    pub fn log_likelihood(&self) -> f64 {
        *self.trace.last().expect("trace holds the initial value")
    }

    pub fn report(&self) -> ReconstructionReport {
        ReconstructionReport {
            r_hat: self.state.r,
            method: Method::Mle,
            projected: false,
            r_unprojected: None,
            iterations: Some(self.iterations),
            log_likelihood: Some(self.log_likelihood()),
            fidelity: None,
            trace_distance: None,
        }
    }
}

/// Hermitian 2×2 matrix `a I + b·σ` raised to the power `−½`.
fn inv_sqrt_hermitian(m: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    let a = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let b = Vector3::new(m[(0, 1)].re, -m[(0, 1)].im, 0.5 * (m[(0, 0)].re - m[(1, 1)].re));
    let nb = b.norm();
    let (lp, lm) = (a + nb, a - nb);
    let (ip, im) = (lp.powf(-0.5), lm.powf(-0.5));
    let alpha = 0.5 * (ip + im);
    let beta = if nb > 0.0 { 0.5 * (ip - im) / nb } else { 0.0 };
    let s = b * beta;
    Matrix2::new(
        Complex64::new(alpha + s.z, 0.0),
        Complex64::new(s.x, -s.y),
        Complex64::new(s.x, s.y),
        Complex64::new(alpha - s.z, 0.0),
    )
}

fn normalize(m: Matrix2<Complex64>) -> Matrix2<Complex64> {
    let tr = m.trace().re;
    (m + m.adjoint()) * Complex64::new(0.5 / tr, 0.0)
}

fn log_likelihood(f: &[f64; 4], effects: &[Matrix2<Complex64>; 4], rho: &Matrix2<Complex64>) -> f64 {
    let mut l = 0.0;
    for (fi, e) in f.iter().zip(effects) {
        if *fi > 0.0 {
            l += fi * (e * rho).trace().re.ln();
        }
    }
    l
}

/// Iterative `RρR` maximum-likelihood estimate from window counts.
///
/// Counts are conditioned on acceptance, so the effects are first
/// renormalized to `G^(−½) Eᵢ G^(−½)` with `G = ΣEᵢ` (the identity for a
/// balanced layout); the estimate is mapped back afterwards. Each step is
/// the full `RρR` update when that raises the likelihood, otherwise a
/// diluted `(I + εR)ρ(I + εR)` step with halving `ε`, so the likelihood
/// never decreases. Iteration stops once a step moves the state by less
/// than `tol` (Frobenius norm).
pub fn mle_reconstruct(
    counts: &CountRecord,
    povm: &Povm4,
    max_iters: usize,
    tol: f64,
) -> Result<MleEstimate> {
    let f = counts.frequencies()?;
    let g = povm
        .elements
        .iter()
        .fold(Matrix2::<Complex64>::zeros(), |acc, e| acc + e.effect());
    let g_is = inv_sqrt_hermitian(&g);
    let effects: [Matrix2<Complex64>; 4] = povm.elements.map(|e| g_is * e.effect() * g_is);

    let identity = Matrix2::<Complex64>::identity();
    let mut sigma = identity * Complex64::new(0.5, 0.0);
    let probs = |s: &Matrix2<Complex64>| effects.map(|e| (e * s).trace().re);

    for (k, p) in probs(&sigma).iter().enumerate() {
        if *p <= 0.0 && f[k] > 0.0 {
            return Err(Error::ZeroProbabilityOutcome(k));
        }
    }

    let mut current = log_likelihood(&f, &effects, &sigma);
    let mut trace = vec![current];
    let mut iterations = 0;
    while iterations < max_iters {
        let p = probs(&sigma);
        let mut r_op = Matrix2::<Complex64>::zeros();
        for k in 0..4 {
            if f[k] > 0.0 {
                if p[k] <= 0.0 {
                    // regularize toward the maximally mixed state
                    sigma = normalize(sigma * Complex64::new(0.99, 0.0) + identity * Complex64::new(0.005, 0.0));
                    continue;
                }
                r_op += effects[k] * Complex64::new(f[k] / p[k], 0.0);
            }
        }
        let full = normalize(r_op * sigma * r_op);
        let mut next = full;
        let mut l_next = log_likelihood(&f, &effects, &next);
        let mut eps = 1.0;
        while !(l_next >= current) && eps > 1e-12 {
            let step = identity + r_op * Complex64::new(eps, 0.0);
            next = normalize(step * sigma * step);
            l_next = log_likelihood(&f, &effects, &next);
            eps *= 0.5;
        }
        iterations += 1;
        if !(l_next >= current) {
            // no ascent direction left at working precision
            trace.push(current);
            break;
        }
        let moved = (next - sigma).norm();
        sigma = next;
        current = l_next;
        trace.push(current);
        if moved < tol {
            break;
        }
    }

    let rho = normalize(g_is * sigma * g_is);
    let est = BlochState::from_density_matrix(&rho);
    let (state, _) = project_physical(&est.r);
    Ok(MleEstimate {
        state,
        iterations,
        trace,
    })
}

/// Uhlmann fidelity of two qubit states.
pub fn fidelity(a: &BlochState, b: &BlochState) -> f64 {
    let (ra, rb) = (a.vector(), b.vector());
    let mixed = ((1.0 - ra.norm_squared()).max(0.0) * (1.0 - rb.norm_squared()).max(0.0)).sqrt();
    (0.5 * (1.0 + ra.dot(&rb) + mixed)).clamp(0.0, 1.0)
}

/// Trace distance `|r_a − r_b| / 2`.
pub fn trace_distance(a: &BlochState, b: &BlochState) -> f64 {
    (0.5 * (a.vector() - b.vector()).norm()).clamp(0.0, 1.0)
}

/// Cumulative detection table for inverse-CDF sampling on one plane.
#[derive(Debug, Clone)]
pub struct SampleTable {
    knots: Vec<f64>,
    cdf: Vec<f64>,
    /// Unnormalized integral of the density over the table.
    mass: f64,
}

impl SampleTable {
    /// Table on the default grid for plane `zeta`, with `extra_knots` merged
    /// in so that their CDF values are exact table entries.
    pub fn new(rho: &BlochState, zeta: f64, cfg: &SlitConfig, extra_knots: &[f64]) -> Result<Self> {
        if !rho.is_physical() {
            return Err(Error::Unphysical(rho.norm()));
        }
        PlanePoint::new(0.0, zeta)?;
        let mut knots = default_grid(zeta, cfg);
        let (lo, hi) = (knots[0], knots[knots.len() - 1]);
        knots.extend(extra_knots.iter().copied().filter(|x| *x > lo && *x < hi));
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let pdf = |xi: f64| detection_pdf_unchecked(rho, &PlanePoint { xi, zeta }, cfg);
        let mut cdf = Vec::with_capacity(knots.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        let mut left = pdf(knots[0]);
        for pair in knots.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let right = pdf(b);
            acc += (b - a) / 6.0 * (left + 4.0 * pdf(0.5 * (a + b)) + right);
            cdf.push(acc);
            left = right;
        }
        let mass = acc;
        for v in cdf.iter_mut() {
            *v /= mass;
        }
        Ok(Self { knots, cdf, mass })
    }

    pub fn for_layout(rho: &BlochState, layout: &DetectorLayout) -> Result<Self> {
        let edges: Vec<f64> = layout
            .windows()
            .iter()
            .flat_map(|(a, b)| [*a, *b])
            .collect();
        Self::new(rho, layout.zeta0, &layout.slit(), &edges)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Normalized CDF at `x`, linear between knots.
    pub fn cdf_at(&self, x: f64) -> f64 {
        if x <= self.knots[0] {
            return 0.0;
        }
        let n = self.knots.len();
        if x >= self.knots[n - 1] {
            return 1.0;
        }
        let k = self.knots.partition_point(|v| *v <= x) - 1;
        let t = (x - self.knots[k]) / (self.knots[k + 1] - self.knots[k]);
        self.cdf[k] + t * (self.cdf[k + 1] - self.cdf[k])
    }

    /// Inverse CDF for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.cdf.len();
        let k = self.cdf.partition_point(|v| *v <= u).clamp(1, n - 1) - 1;
        let span = self.cdf[k + 1] - self.cdf[k];
        if span <= 0.0 {
            return self.knots[k];
        }
        let t = (u - self.cdf[k]) / span;
        self.knots[k] + t * (self.knots[k + 1] - self.knots[k])
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn blocks(n: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let count = n.div_ceil(SAMPLE_BLOCK);
    (0..count)
        .into_par_iter()
        .map(move |b| (b, SAMPLE_BLOCK.min(n - b * SAMPLE_BLOCK)))
}

/// `n` photon positions on the layout's plane, deterministic in `seed`.
pub fn sample_positions(
    rho: &BlochState,
    layout: &DetectorLayout,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let table = SampleTable::for_layout(rho, layout)?;
    let chunks: Vec<Vec<f64>> = blocks(n)
        .map(|(b, len)| {
            let mut rng = block_rng(seed, b);
            (0..len).map(|_| table.quantile(rng.random::<f64>())).collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Tallies positions into the four closed windows.
pub fn bin_counts(positions: &[f64], layout: &DetectorLayout) -> Result<CountRecord> {
    layout.check_disjoint()?;
    let windows = layout.windows();
    let mut n = [0u64; 4];
    let mut discarded = 0u64;
    for &x in positions {
        match windows.iter().position(|(a, b)| x >= *a && x <= *b) {
            Some(k) => n[k] += 1,
            None => discarded += 1,
        }
    }
    Ok(CountRecord {
        n,
        n_discarded: discarded,
        n_total: positions.len() as u64,
    })
}

/// Per-photon simulation of `n_total` detections, binned on the fly.
///
/// Uses the same random stream as [`sample_positions`], so for a given seed
/// the counts equal `bin_counts(sample_positions(..))`.
pub fn simulate_counts(
    rho: &BlochState,
    layout: &DetectorLayout,
    n_total: u64,
    seed: u64,
) -> Result<CountRecord> {
    layout.check_disjoint()?;
    let table = SampleTable::for_layout(rho, layout)?;
    let bounds = layout
        .windows()
        .map(|(a, b)| (table.cdf_at(a), table.cdf_at(b)));
    let n = usize::try_from(n_total)
        .map_err(|_| Error::InvalidParameter("photon count too large".into()))?;
    let partial: Vec<[u64; 4]> = blocks(n)
        .map(|(b, len)| {
            let mut rng = block_rng(seed, b);
            let mut local = [0u64; 4];
            for _ in 0..len {
                let u = rng.random::<f64>();
                if let Some(k) = bounds.iter().position(|(lo, hi)| u >= *lo && u <= *hi) {
                    local[k] += 1;
                }
            }
            local
        })
        .collect();
    let mut counts = [0u64; 4];
    for p in partial {
        for k in 0..4 {
            counts[k] += p[k];
        }
    }
    let accepted: u64 = counts.iter().sum();
    Ok(CountRecord {
        n: counts,
        n_discarded: n_total - accepted,
        n_total,
    })
}

/// Probability that one photon lands in each window, by direct quadrature of
/// the normalized detection density.
pub fn window_probabilities(rho: &BlochState, layout: &DetectorLayout) -> Result<[f64; 4]> {
    if !rho.is_physical() {
        return Err(Error::Unphysical(rho.norm()));
    }
    let cfg = layout.slit();
    let zeta = layout.zeta0;
    let norm = detection_norm(rho, &cfg);
    let pdf = |xi: f64| detection_pdf_unchecked(rho, &PlanePoint { xi, zeta }, &cfg);
    Ok(layout
        .windows()
        .map(|(a, b)| quad::simpson_fn(pdf, a, b, 64) / norm))
}

/// Counts drawn as one multinomial over the four windows and the discard
/// bin, with probabilities from [`window_probabilities`]. Same law as
/// [`simulate_counts`], cost independent of `n_total`.
pub fn simulate_counts_multinomial(
    rho: &BlochState,
    layout: &DetectorLayout,
    n_total: u64,
    seed: u64,
) -> Result<CountRecord> {
    layout.check_disjoint()?;
    let p = window_probabilities(rho, layout)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining = n_total;
    let mut mass_left = 1.0;
    let mut n = [0u64; 4];
    for k in 0..4 {
        if remaining == 0 {
            break;
        }
        let q = (p[k] / mass_left).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(&mut rng);
        n[k] = draw;
        remaining -= draw;
        mass_left -= p[k];
    }
    Ok(CountRecord {
        n,
        n_discarded: remaining,
        n_total,
    })
}

/// Effects `cᵢ ½(I + sᵢ·σ)` as matrices.
pub fn effects(povm: &Povm4) -> [Matrix2<Complex64>; 4] {
    povm.elements
        .map(|e| bloch_matrix(&e.vector()) * Complex64::new(e.weight, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::trace_product;
    use crate::sicsearch::{balance_solution, build_povm, reference_solution, DEFAULT_DELTA_XI};

    fn reference() -> (DetectorLayout, Povm4) {
        let sol = reference_solution();
        let d = balance_solution(&sol).unwrap();
        (
            DetectorLayout::from_solution(&sol, d, DEFAULT_DELTA_XI).unwrap(),
            build_povm(&sol, d, DEFAULT_DELTA_XI).unwrap(),
        )
    }

    #[test]
    fn probabilities_special_states() {
        let (_, povm) = reference();
        let p = ideal_probabilities(&BlochState::maximally_mixed(), &povm);
        for v in p {
            assert!((v - 0.25).abs() < 1e-12);
        }
        let s1 = povm.elements[0].bloch;
        let p = ideal_probabilities(&BlochState::unchecked(s1), &povm);
        assert!((p[0] - 0.5).abs() < 1e-12);
        for v in &p[1..] {
            assert!((v - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_match_matrix_trace() {
        let (_, povm) = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let eff = effects(&povm);
        for _ in 0..100 {
            let rho = BlochState::random_mixed(&mut rng);
            let p = ideal_probabilities(&rho, &povm);
            let m = rho.density_matrix();
            for k in 0..4 {
                let t = trace_product(&eff[k], &m);
                assert!((p[k] - t.re).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_inversion_special_cases() {
        let (_, povm) = reference();
        let r = linear_invert(&[0.25; 4], &povm).unwrap();
        assert!(r.norm() < 1e-12);
        let r = linear_invert(&[0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0], &povm).unwrap();
        let s1 = povm.elements[0].vector();
        assert!((r.vector() - s1).norm() < 1e-12);
        let fr = frame_invert(&[0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0], &povm);
        assert!((fr.vector() - s1).norm() < 1e-12);
    }

    #[test]
    fn linear_round_trip_unbalanced() {
        let sol = reference_solution();
        let povm = build_povm(&sol, 1.5, DEFAULT_DELTA_XI).unwrap();
        assert!(povm.closure_residual > 1e-2);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let rho = BlochState::random_mixed(&mut rng);
            let p = conditional_probabilities(&rho, &povm);
            let back = linear_invert(&p, &povm).unwrap();
            assert!((back.vector() - rho.vector()).norm() < 1e-10);
            // artificial balance is exact too on noiseless counts
            let counts = CountRecord {
                n: p.map(|v| (v * 1e12).round() as u64),
                n_discarded: 0,
                n_total: 0,
            };
            let art = artificially_balanced(&counts, &povm).unwrap();
            assert!((art.vector() - rho.vector()).norm() < 1e-6);
        }
    }

    #[test]
    fn coplanar_vectors_are_rank_deficient() {
        let flat = Povm4::equal_weights([
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(-1.0, 0.0, 0.0),
            Vector3::new(0.0, -1.0, 0.0),
        ]);
        match linear_invert(&[0.25; 4], &flat) {
            Err(Error::RankDeficient(dirs)) => {
                assert_eq!(dirs.len(), 1);
                assert!((dirs[0][2].abs() - 1.0).abs() < 1e-12);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn projection() {
        let (s, p) = project_physical(&[0.0, 0.0, 0.5]);
        assert_eq!((s.r, p), ([0.0, 0.0, 0.5], false));
        let (s, p) = project_physical(&[0.0, 0.0, 1.25]);
        assert_eq!((s.r, p), ([0.0, 0.0, 1.0], true));
        let (again, p2) = project_physical(&s.r);
        assert_eq!(again, s);
        assert!(!p2);
    }

    #[test]
    fn mle_uniform_counts() {
        let (_, povm) = reference();
        let counts = CountRecord {
            n: [250; 4],
            n_discarded: 0,
            n_total: 1000,
        };
        let est = mle_reconstruct(&counts, &povm, MLE_MAX_ITERS, MLE_TOL).unwrap();
        assert!(est.state.norm() < 1e-6);
    }

    #[test]
    fn mle_boundary_counts_stay_physical() {
        let (_, povm) = reference();
        let counts = CountRecord {
            n: [1000, 0, 0, 0],
            n_discarded: 0,
            n_total: 1000,
        };
        let lin = linear_invert(&counts.frequencies().unwrap(), &povm).unwrap();
        assert!((lin.norm() - 3.0).abs() < 1e-9);
        let est = mle_reconstruct(&counts, &povm, MLE_MAX_ITERS, MLE_TOL).unwrap();
        assert!(est.state.norm() <= 1.0 + 1e-12);
        assert!(est.trace.windows(2).all(|w| w[1] >= w[0]));
        // the most likely state points at the only firing detector
        assert!(est.state.vector().dot(&povm.elements[0].vector()) > 0.9);
    }

    #[test]
    fn mle_agrees_with_linear_on_exact_data() {
        let (_, povm) = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let rho = BlochState::random_mixed(&mut rng);
            let rho = BlochState::unchecked((rho.vector() * 0.95).into());
            let p = conditional_probabilities(&rho, &povm);
            let counts = CountRecord {
                n: p.map(|v| (v * 1e15).round() as u64),
                n_discarded: 0,
                n_total: 0,
            };
            let est = mle_reconstruct(&counts, &povm, MLE_MAX_ITERS, MLE_TOL).unwrap();
            let lin = linear_invert(&counts.frequencies().unwrap(), &povm).unwrap();
            assert!(
                (est.state.vector() - lin.vector()).norm() < 1e-6,
                "{:?} vs {:?} after {} iterations",
                est.state,
                lin,
                est.iterations
            );
            assert!(est.trace.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn mle_on_unbalanced_layout() {
        let sol = reference_solution();
        let povm = build_povm(&sol, 1.5, DEFAULT_DELTA_XI).unwrap();
        let rho = BlochState::new([0.2, -0.3, 0.4]).unwrap();
        let p = conditional_probabilities(&rho, &povm);
        let counts = CountRecord {
            n: p.map(|v| (v * 1e15).round() as u64),
            n_discarded: 0,
            n_total: 0,
        };
        let est = mle_reconstruct(&counts, &povm, MLE_MAX_ITERS, MLE_TOL).unwrap();
        assert!((est.state.vector() - rho.vector()).norm() < 1e-6);
    }

    #[test]
    fn no_counts_is_an_error() {
        let (_, povm) = reference();
        let empty = CountRecord {
            n: [0; 4],
            n_discarded: 10,
            n_total: 10,
        };
        assert_eq!(mle_reconstruct(&empty, &povm, 10, 1e-12).unwrap_err(), Error::NoCounts);
        assert_eq!(reconstruct_linear(&empty, &povm).unwrap_err(), Error::NoCounts);
    }

    #[test]
    fn metrics() {
        let a = BlochState::new([0.3, 0.1, -0.5]).unwrap();
        assert!((fidelity(&a, &a) - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(&a, &a), 0.0);
        let up = BlochState::mode_one();
        let down = BlochState::mode_two();
        assert!(fidelity(&up, &down).abs() < 1e-15);
        assert!((trace_distance(&up, &down) - 1.0).abs() < 1e-15);
        let mixed = BlochState::maximally_mixed();
        assert!((fidelity(&mixed, &up) - 0.5).abs() < 1e-15);
        assert!((trace_distance(&mixed, &up) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trace_distance_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..500 {
            let a = BlochState::random_mixed(&mut rng);
            let b = BlochState::random_mixed(&mut rng);
            let c = BlochState::random_mixed(&mut rng);
            assert!(trace_distance(&a, &c) <= trace_distance(&a, &b) + trace_distance(&b, &c) + 1e-15);
            let f = fidelity(&a, &b);
            assert!((0.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn bin_edge_cases() {
        let (layout, _) = reference();
        let empty = bin_counts(&[], &layout).unwrap();
        assert_eq!(empty.n, [0; 4]);
        assert_eq!(empty.n_discarded, 0);
        let one_each = bin_counts(&layout.xi, &layout).unwrap();
        assert_eq!(one_each.n, [1; 4]);
        let overlapping = DetectorLayout::new(3.0, [0.0, 0.001, 1.0, 2.0], 1e-3, 2.0).unwrap();
        assert!(bin_counts(&[0.0], &overlapping).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let (layout, _) = reference();
        let rho = BlochState::new([0.1, 0.2, 0.3]).unwrap();
        let a = sample_positions(&rho, &layout, 1000, 5).unwrap();
        let b = sample_positions(&rho, &layout, 1000, 5).unwrap();
        let c = sample_positions(&rho, &layout, 1000, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn streaming_counts_match_positions() {
        let (layout, _) = reference();
        let rho = BlochState::new([0.4, -0.2, 0.1]).unwrap();
        let n = 3 * SAMPLE_BLOCK + 17;
        let pos = sample_positions(&rho, &layout, n, 99).unwrap();
        let binned = bin_counts(&pos, &layout).unwrap();
        let streamed = simulate_counts(&rho, &layout, n as u64, 99).unwrap();
        assert_eq!(binned, streamed);
        assert!(streamed.is_consistent());
    }

    #[test]
    fn table_matches_window_quadrature() {
        let (layout, _) = reference();
        let rho = BlochState::new([-0.3, 0.5, 0.2]).unwrap();
        let table = SampleTable::for_layout(&rho, &layout).unwrap();
        let direct = window_probabilities(&rho, &layout).unwrap();
        for (k, (a, b)) in layout.windows().iter().enumerate() {
            let t = table.cdf_at(*b) - table.cdf_at(*a);
            assert!((t / direct[k] - 1.0).abs() < 1e-6, "{t} vs {}", direct[k]);
        }
        let norm = detection_norm(&rho, &layout.slit());
        assert!((table.mass() - norm).abs() < 1e-9);
    }

    #[test]
    fn multinomial_counts_are_consistent() {
        let (layout, _) = reference();
        let rho = BlochState::maximally_mixed();
        let c = simulate_counts_multinomial(&rho, &layout, 10_000_000, 3).unwrap();
        assert!(c.is_consistent());
        let again = simulate_counts_multinomial(&rho, &layout, 10_000_000, 3).unwrap();
        assert_eq!(c, again);
    }
}
