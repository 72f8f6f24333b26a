//! Constructive search for near-flat planes on non-fat bundles, curvature
//! scans and `Φ_t` variation sweeps.
//!
//! Every randomized routine takes an explicit seed. Independent tasks
//! (restarts, samples) derive their own streams from it, so results do not
//! depend on how rayon schedules them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bundle::{BundleTriple, FAT_THRESHOLD};
use crate::curvature::{k_m, CurvatureSample};
use crate::error::{Error, Result};
use crate::liealg::{AlgebraElement, GroupElement, LieAlgebra, Subspace};
use crate::metric::MetricSpec;

/// Threshold for a witness bracket and for "positive" curvature.
pub const WITNESS_TOL: f64 = 1e-8;
pub const POSITIVE_TOL: f64 = 1e-8;

const STREAM_RESTART: u64 = 1;
const STREAM_PERTURB: u64 = 2;
const STREAM_PROBE: u64 = 3;
const STREAM_SCAN: u64 = 4;
const STREAM_SWEEP: u64 = 5;

/// SplitMix64-style derivation of an independent seed per task.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

/// Parameters of the gradient ascent on `G`.
#[derive(Debug, Clone)]
pub struct AscentOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop when `|[Φ⁻¹X, X]|` falls below this.
    pub tolerance: f64,
    pub initial_step: f64,
    pub armijo: f64,
    /// Random unit directions for the second-order check.
    pub probes: usize,
    pub second_order_tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iterations: 10_000,
            tolerance: 1e-9,
            initial_step: 0.1,
            armijo: 1e-4,
            probes: 50,
            second_order_tol: 1e-8,
        }
    }
}

/// Result of maximizing `f(g) = ⟨Ad_{g⁻¹}X₀, Φ⁻¹Ad_{g⁻¹}X₀⟩`.
#[derive(Debug, Clone)]
pub struct Maximizer {
    pub g: GroupElement,
    pub value: f64,
    /// `|[Φ⁻¹X, X]|` at `g`.
    pub residual: f64,
    pub iterations: usize,
    pub restart: usize,
    /// Largest second-variation probe value; `≤ 0` at a local maximum.
    pub second_order_max: f64,
}

/// `f(g)`.
pub fn objective(alg: &LieAlgebra, metric: &MetricSpec, x0: &AlgebraElement, g: &GroupElement) -> f64 {
    let x = alg.ad_g(&g.inverse(), x0);
    x.dot(&metric.apply_phi_inv(&x))
}

/// Left-trivialized ascent direction `[Φ⁻¹X, X]`, half the gradient of `f`.
pub fn ascent_direction(alg: &LieAlgebra, metric: &MetricSpec, x0: &AlgebraElement, g: &GroupElement) -> AlgebraElement {
    let x = alg.ad_g(&g.inverse(), x0);
    alg.bracket(&metric.apply_phi_inv(&x), &x)
}

/// `⟨[Z,X],Φ⁻¹[Z,X]⟩ − ⟨[Z,Φ⁻¹X],[Z,X]⟩`, half the second derivative of
/// `f` along `g·e^{tZ}`.
pub fn second_variation(alg: &LieAlgebra, metric: &MetricSpec, x: &AlgebraElement, z: &AlgebraElement) -> f64 {
    let zx = alg.bracket(z, x);
    let zpx = alg.bracket(z, &metric.apply_phi_inv(x));
    zx.dot(&metric.apply_phi_inv(&zx)) - zpx.dot(&zx)
}

struct Restart {
    g: GroupElement,
    value: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
}

fn ascend(alg: &LieAlgebra, metric: &MetricSpec, x0: &AlgebraElement, start: GroupElement, opts: &AscentOptions) -> Restart {
    let mut g = start;
    let mut value = objective(alg, metric, x0, &g);
    let mut iterations = 0;
    loop {
        let dir = ascent_direction(alg, metric, x0, &g);
        let residual = dir.norm();
        if residual < opts.tolerance {
            return Restart { g, value, residual, iterations, converged: true };
        }
        if iterations >= opts.max_iterations {
            return Restart { g, value, residual, iterations, converged: false };
        }
        // df along g·exp(ηV) is 2η|V|² to first order.
        let slope = 2.0 * residual * residual;
        let mut eta = opts.initial_step;
        let mut accepted = None;
        while eta > 1e-14 {
            let trial = g.compose(&alg.exp(&(&dir * eta)));
            let f_trial = objective(alg, metric, x0, &trial);
            let sufficient = f_trial >= value + opts.armijo * eta * slope;
            // Once the predicted gain is below the resolution of `f`, accept
            // steps that keep `f` level and shrink the gradient instead.
            let level = (f_trial - value).abs() <= 64.0 * f64::EPSILON * value.abs().max(1.0)
                && ascent_direction(alg, metric, x0, &trial).norm() < residual;
            if sufficient || level {
                accepted = Some((trial, f_trial));
                break;
            }
            eta *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, f_trial)) => {
                g = if iterations % 64 == 0 { trial.reorthonormalized() } else { trial };
                value = f_trial;
            }
            // No ascent step at double precision: the residual is as small as
            // it can be made from here.
            None => return Restart { g, value, residual, iterations, converged: false },
        }
    }
}

/// Multi-start Riemannian gradient ascent for `f` on `G`.
pub fn maximize_f(metric: &MetricSpec, alg: &LieAlgebra, x0: &AlgebraElement, seed: u64) -> Result<Maximizer> {
    maximize_f_with(metric, alg, x0, seed, &AscentOptions::default())
}

pub fn maximize_f_with(
    metric: &MetricSpec,
    alg: &LieAlgebra,
    x0: &AlgebraElement,
    seed: u64,
    opts: &AscentOptions,
) -> Result<Maximizer> {
    alg.check(x0)?;
    if x0.is_zero(1e-14) {
        return Err(Error::Precondition("X₀ must be non-zero".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let runs: Vec<(usize, Restart)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            // The first restart starts at the identity.
            let start = if r == 0 {
                GroupElement::identity(alg.n())
            } else {
                alg.random_group_element(&mut rng_for(seed, STREAM_RESTART, r as u64))
            };
            (r, ascend(alg, metric, x0, start, opts))
        })
        .collect();

    let mut best_residual = f64::INFINITY;
    let mut best: Option<Maximizer> = None;
    for (r, run) in runs {
        best_residual = best_residual.min(run.residual);
        if !run.converged {
            continue;
        }
        let x = alg.ad_g(&run.g.inverse(), x0);
        let mut rng = rng_for(seed, STREAM_PROBE, r as u64);
        let second_order_max = (0..opts.probes)
            .map(|_| {
                let z = alg.random_element(&mut rng).normalized().expect("non-zero sample");
                second_variation(alg, metric, &x, &z)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if second_order_max > opts.second_order_tol {
            continue;
        }
        let better = best.as_ref().is_none_or(|b| run.value > b.value + 1e-14 * b.value.abs().max(1.0));
        if better {
            best = Some(Maximizer {
                g: run.g,
                value: run.value,
                residual: run.residual,
                iterations: run.iterations,
                restart: r,
                second_order_max,
            });
        }
    }
    best.ok_or(Error::ConvergenceFailure { best_residual })
}

/// A commuting unit pair `X ∈ 𝔪`, `Y ∈ 𝔭` from the fatness search.
pub fn find_commuting_pair(triple: &BundleTriple, seed: u64) -> Result<(AlgebraElement, AlgebraElement)> {
    let report = triple.fatness_deficit(seed)?;
    if report.deficit > FAT_THRESHOLD {
        return Err(Error::NoWitness { deficit: report.deficit });
    }
    if report.deficit >= WITNESS_TOL {
        return Err(Error::ConvergenceFailure { best_residual: report.deficit });
    }
    Ok((report.x, report.y))
}

/// Near-zero-curvature plane at a maximizer of `f`, with its residuals.
#[derive(Debug, Clone)]
pub struct ZeroPlaneCertificate {
    pub eps: f64,
    /// Fatness witness the plane was perturbed from.
    pub witness_x: AlgebraElement,
    pub witness_y: AlgebraElement,
    pub x0: AlgebraElement,
    pub y0: AlgebraElement,
    /// Whether `x0` and `y0` passed the genericity test.
    pub generic: bool,
    pub g0: GroupElement,
    pub f_value: f64,
    /// `|[Φ⁻¹X, X]|` with `X = Ad_{g₀⁻¹}X₀`.
    pub grad_residual: f64,
    /// `|[Y, Φ⁻¹X]|` with `Y = Ad_{g₀⁻¹}Y₀`.
    pub commute_residual: f64,
    pub second_order_max: f64,
    /// Second variation of `f` along `Z = Φ⁻¹Y`; `k_M` exceeds it only by
    /// terms that vanish with `eps`, and it is `≤ 0` at a maximum.
    pub second_variation_bound: f64,
    pub k_m_value: f64,
    pub sample: CurvatureSample,
    pub iterations: usize,
}

fn torus_for_witness(triple: &BundleTriple, wx: &AlgebraElement, wy: &AlgebraElement) -> Result<(Subspace, Subspace)> {
    let alg = triple.algebra();
    let torus = alg.maximal_abelian_containing(wx, wy)?;
    let mut joint = torus.elements();
    joint.extend(triple.k().elements());
    let joint = Subspace::span(alg.dim(), &joint)?;
    let meet = torus.dim() + triple.k().dim() - joint.dim();
    if meet > 0 {
        return Err(Error::UnsupportedConfiguration(format!(
            "the maximal torus through the witness meets 𝔨 in dimension {meet}"
        )));
    }
    let legal = torus.orthogonal_part(triple.k());
    Ok((torus, legal))
}

/// Runs the obstruction construction at perturbation scale `eps > 0`.
pub fn certify_zero_plane(triple: &BundleTriple, metric: &MetricSpec, eps: f64, seed: u64) -> Result<ZeroPlaneCertificate> {
    certify_zero_plane_with(triple, metric, eps, seed, &AscentOptions::default())
}

pub fn certify_zero_plane_with(
    triple: &BundleTriple,
    metric: &MetricSpec,
    eps: f64,
    seed: u64,
    opts: &AscentOptions,
) -> Result<ZeroPlaneCertificate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive (use the exact mode for eps = 0), got {eps}"
        )));
    }
    let alg = triple.algebra();
    let (wx, wy) = find_commuting_pair(triple, seed)?;
    let (torus, _) = torus_for_witness(triple, &wx, &wy)?;
    // Same stream for every eps, so a schedule perturbs along fixed directions.
    let mut rng = rng_for(seed, STREAM_PERTURB, 0);
    let x0 = alg.generic_perturb(&torus, &wx, eps, Some(triple.k()), &mut rng)?;
    let mut rng = rng_for(seed, STREAM_PERTURB, 1);
    let y0 = alg.generic_perturb(&torus, &wy, eps, Some(triple.k()), &mut rng)?;
    finish_certificate(triple, metric, eps, seed, opts, wx, wy, x0, y0, true)
}

/// The `eps = 0` run on the witness itself, without a genericity requirement.
pub fn certify_exact(triple: &BundleTriple, metric: &MetricSpec, seed: u64) -> Result<ZeroPlaneCertificate> {
    certify_exact_with(triple, metric, seed, &AscentOptions::default())
}

pub fn certify_exact_with(
    triple: &BundleTriple,
    metric: &MetricSpec,
    seed: u64,
    opts: &AscentOptions,
) -> Result<ZeroPlaneCertificate> {
    let alg = triple.algebra();
    let (wx, wy) = find_commuting_pair(triple, seed)?;
    torus_for_witness(triple, &wx, &wy)?;
    let generic = alg.is_generic(&wx) && alg.is_generic(&wy);
    finish_certificate(triple, metric, 0.0, seed, opts, wx.clone(), wy.clone(), wx, wy, generic)
}

#[allow(clippy::too_many_arguments)]
fn finish_certificate(
    triple: &BundleTriple,
    metric: &MetricSpec,
    eps: f64,
    seed: u64,
    opts: &AscentOptions,
    witness_x: AlgebraElement,
    witness_y: AlgebraElement,
    x0: AlgebraElement,
    y0: AlgebraElement,
    generic: bool,
) -> Result<ZeroPlaneCertificate> {
    let alg = triple.algebra();
    let max = maximize_f_with(metric, alg, &x0, seed, opts)?;
    let gi = max.g.inverse();
    let x = alg.ad_g(&gi, &x0);
    let y = alg.ad_g(&gi, &y0);
    let px = metric.apply_phi_inv(&x);
    let grad_residual = alg.bracket(&px, &x).norm();
    let commute_residual = alg.bracket(&y, &px).norm();
    let second_variation_bound = second_variation(alg, metric, &x, &metric.apply_phi_inv(&y));
    let sample = k_m(triple, metric, &max.g, &x0, &y0)?;
    Ok(ZeroPlaneCertificate {
        eps,
        witness_x,
        witness_y,
        x0,
        y0,
        generic,
        g0: max.g,
        f_value: max.value,
        grad_residual,
        commute_residual,
        second_order_max: max.second_order_max,
        second_variation_bound,
        k_m_value: sample.k_m,
        sample,
        iterations: max.iterations,
    })
}

/// Certificates along an eps schedule with a shared seed.
pub fn certify_schedule(
    triple: &BundleTriple,
    metric: &MetricSpec,
    schedule: &[f64],
    seed: u64,
) -> Result<Vec<ZeroPlaneCertificate>> {
    schedule
        .iter()
        .map(|&eps| {
            if eps == 0.0 {
                certify_exact(triple, metric, seed)
            } else {
                certify_zero_plane(triple, metric, eps, seed)
            }
        })
        .collect()
}

/// A random base point `exp(s·u)`, `u` unit and `s` uniform in `[0, π]`.
pub fn random_base_point<R: Rng + ?Sized>(alg: &LieAlgebra, rng: &mut R) -> GroupElement {
    let u = alg.random_element(rng).normalized().expect("non-zero sample");
    let s = std::f64::consts::PI * rng.random::<f64>();
    alg.exp(&(u * s))
}

/// A random `h₀`-orthonormal pair in `𝔤 ⊖ 𝔨`.
pub fn random_plane<R: Rng + ?Sized>(space: &Subspace, rng: &mut R) -> (AlgebraElement, AlgebraElement) {
    loop {
        let x = space.random_unit(rng).expect("plane space is non-empty");
        let y = space.random_unit(rng).expect("plane space is non-empty");
        let y = &y - &x * x.dot(&y);
        if let Some(y) = y.normalized().filter(|_| y.norm() > 1e-6) {
            return (x, y);
        }
    }
}

/// Summary of a curvature scan.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub floor: f64,
    pub witness: CurvatureSample,
    /// `k_M` of every sample, in sample order.
    pub values: Vec<f64>,
}

impl ScanResult {
    /// Equal-width histogram over `[min, max]` of the sampled values.
    pub fn histogram(&self, bins: usize) -> Vec<(f64, f64, usize)> {
        let bins = bins.max(1);
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let mut counts = vec![0usize; bins];
        for &v in &self.values {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        counts.into_iter().enumerate().map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c)).collect()
    }
}

fn min_sample(samples: Vec<CurvatureSample>) -> Option<CurvatureSample> {
    // First minimum in sample order, for determinism.
    samples.into_iter().reduce(|best, s| if s.k_m < best.k_m { s } else { best })
}

/// Minimum of `k_M` over `n_samples` random base points and planes.
pub fn min_curvature_scan(triple: &BundleTriple, metric: &MetricSpec, n_samples: usize, seed: u64) -> Result<ScanResult> {
    min_curvature_scan_with(triple, metric, n_samples, seed, &[])
}

/// As [`min_curvature_scan`], with extra `(g₀, X, Y)` planes evaluated
/// after the random ones.
pub fn min_curvature_scan_with(
    triple: &BundleTriple,
    metric: &MetricSpec,
    n_samples: usize,
    seed: u64,
    extra: &[(GroupElement, AlgebraElement, AlgebraElement)],
) -> Result<ScanResult> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let alg = triple.algebra();
    let space = triple.plane_space();
    let random: Vec<CurvatureSample> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, STREAM_SCAN, i as u64);
            let g0 = random_base_point(alg, &mut rng);
            let (x, y) = random_plane(&space, &mut rng);
            k_m(triple, metric, &g0, &x, &y)
        })
        .collect::<Result<_>>()?;
    let mut samples = random;
    for (g0, x, y) in extra {
        samples.push(k_m(triple, metric, g0, x, y)?);
    }
    let values = samples.iter().map(|s| s.k_m).collect();
    let witness = min_sample(samples).expect("at least one sample");
    Ok(ScanResult { floor: witness.k_m, witness, values })
}

/// Options for [`variation_sweep`].
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub base_points: usize,
    pub planes_per_point: usize,
    /// Adds the exact zero-plane certificate of each `Φ_t` to the floor
    /// when the bundle is not fat.
    pub inject_certificate: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { base_points: 200, planes_per_point: 50, inject_certificate: false }
    }
}

/// One row of a `Φ_t` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub floor: f64,
    /// Fraction of base points whose smallest sampled `k_M` exceeds `1e-8`.
    pub positive_fraction: f64,
    /// `k_M` of the injected certificate plane, when requested.
    pub certificate_k_m: Option<f64>,
}

/// Scans `M_t` for each `t` of the grid on a common set of base points and
/// planes.
pub fn variation_sweep(triple: &BundleTriple, t_grid: &[f64], opts: &SweepOptions, seed: u64) -> Result<Vec<SweepRow>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("t grid must not be empty".into()));
    }
    if opts.base_points == 0 || opts.planes_per_point == 0 {
        return Err(Error::InvalidArgument("base_points and planes_per_point must be at least 1".into()));
    }
    let metrics: Vec<MetricSpec> = t_grid.iter().map(|&t| MetricSpec::phi_t(triple, t)).collect::<Result<_>>()?;
    let alg = triple.algebra();
    let space = triple.plane_space();
    let inject = opts.inject_certificate && triple.m().dim() > 0 && !triple.fatness_deficit(seed)?.fat;

    let mut rows = Vec::with_capacity(t_grid.len());
    for (&t, metric) in t_grid.iter().zip(&metrics) {
        let minima: Vec<f64> = (0..opts.base_points)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(seed, STREAM_SWEEP, i as u64);
                let g0 = random_base_point(alg, &mut rng);
                let mut lowest = f64::INFINITY;
                for _ in 0..opts.planes_per_point {
                    let (x, y) = random_plane(&space, &mut rng);
                    lowest = lowest.min(k_m(triple, metric, &g0, &x, &y)?.k_m);
                }
                Ok(lowest)
            })
            .collect::<Result<_>>()?;
        let positive = minima.iter().filter(|&&v| v > POSITIVE_TOL).count();
        let mut floor = minima.iter().copied().fold(f64::INFINITY, f64::min);
        let certificate_k_m = if inject {
            let cert = certify_exact(triple, metric, seed)?;
            floor = floor.min(cert.k_m_value);
            Some(cert.k_m_value)
        } else {
            None
        };
        rows.push(SweepRow {
            t,
            floor,
            positive_fraction: positive as f64 / opts.base_points as f64,
            certificate_k_m,
        });
    }
    Ok(rows)
}
