//! Matrix-free hydrodynamic operators for N identical spheres.
//!
//! The mobility operator maps forces to rigid velocities,
//!
//!   (M G)_i = G_i/(6πR) + Σ_{j≠i} (Φ + (R²/6)ΔΦ)(X_i − X_j) G_j,
//!
//! and the resistance operator is its inverse, realized by the method of
//! reflections: the fixed-point iteration
//!
//!   G⁰_i = 6πR W_i,   G^{k+1}_i = 6πR (W_i − Σ_{j≠i} J(X_i − X_j) G^k_j)
//!
//! converges geometrically whenever the configuration is dilute (R³S₃
//! small). Everything is applied on the fly in O(N²) work and O(N) memory;
//! the 3N×3N matrices are never assembled.

mod forcerep;

pub use forcerep::{force_representation_check, ForceRepReport, StokesletSpec};

use crate::geometry::{stokes_drag, ConfigError, Configuration, Mat3, Vec3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub type ForceSet = Vec<Vec3>;
pub type VelocitySet = Vec<Vec3>;

/// Reflections are expected to contract comfortably below this value of
/// R³S₃; above it the solve may still converge but callers should warn.
pub const REFLECTIONS_DELTA: f64 = 0.1;

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error(transparent)]
    Inadmissible(#[from] ConfigError),
    #[error("velocity/force set has length {got}, configuration has {expect} particles")]
    LengthMismatch { got: usize, expect: usize },
    #[error("power iteration stagnated after {iters} iterations (partial: c_R ≈ {c_r_est}, C_R ≈ {big_c_r_est})")]
    SpectrumStagnation { iters: usize, c_r_est: f64, big_c_r_est: f64 },
    #[error("finite-difference signal {signal:.3e} is below the noise estimate {noise:.3e}; decrease h or increase separation")]
    GradientNoise { signal: f64, noise: f64 },
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_l2: f64,
    pub converged: bool,
    pub contraction_estimate: f64,
}

/// Extremal eigenvalue estimates of the resistance operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEstimate {
    /// Smallest eigenvalue c_R (coercivity constant).
    pub c_r_est: f64,
    /// Largest eigenvalue C_R (operator norm).
    pub big_c_r_est: f64,
    pub power_iters: usize,
}

/// Dilution parameter R³S₃ controlling the reflections contraction.
pub fn reflections_parameter(cfg: &Configuration) -> f64 {
    cfg.radius.powi(3) * cfg.singular_sum(3.0)
}

fn check_len(cfg: &Configuration, v: &[Vec3]) -> Result<(), MobilityError> {
    if v.len() != cfg.n() {
        return Err(MobilityError::LengthMismatch { got: v.len(), expect: cfg.n() });
    }
    Ok(())
}

/// Fused J(x)·g for J = Φ + (R²/6)ΔΦ, avoiding the 3×3 build.
#[inline]
fn corrected_apply(radius: f64, x: Vec3, g: Vec3) -> Vec3 {
    let r2 = x.norm_sq();
    let r = r2.sqrt();
    let r3 = r2 * r;
    let rr2 = radius * radius;
    let a = crate::geometry::FRAC_1_8PI * (1.0 / r + rr2 / (3.0 * r3));
    let b = crate::geometry::FRAC_1_8PI * (1.0 / r3 - rr2 / (r3 * r2));
    g * a + x * (b * x.dot(g))
}

/// Off-diagonal interaction sum Σ_{j≠i} J(X_i − X_j) G_j for every i.
fn offdiag_apply(cfg: &Configuration, forces: &[Vec3]) -> Vec<Vec3> {
    let pos = &cfg.positions;
    let radius = cfg.radius;
    (0..cfg.n())
        .into_par_iter()
        .map(|i| {
            let mut acc = Vec3::zero();
            for j in 0..pos.len() {
                if j != i {
                    acc += corrected_apply(radius, pos[i] - pos[j], forces[j]);
                }
            }
            acc
        })
        .collect()
}

fn l2_norm(v: &[Vec3]) -> f64 {
    v.iter().map(|x| x.norm_sq()).sum::<f64>().sqrt()
}

fn dot(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(*y)).sum()
}

/// Mobility apply: velocities generated by the given forces.
pub fn mobility_apply(cfg: &Configuration, forces: &[Vec3]) -> Result<VelocitySet, MobilityError> {
    cfg.ensure_admissible()?;
    check_len(cfg, forces)?;
    Ok(mobility_apply_unchecked(cfg, forces))
}

pub(crate) fn mobility_apply_unchecked(cfg: &Configuration, forces: &[Vec3]) -> VelocitySet {
    let drag = stokes_drag(cfg.radius);
    let mut out = offdiag_apply(cfg, forces);
    for (o, f) in out.iter_mut().zip(forces) {
        *o += *f / drag;
    }
    out
}

/// Resistance apply by the method of reflections: returns forces G with
/// ‖M G − W‖₂ ≤ tol·‖W‖₂ on convergence.
///
/// Non-convergence within `k_max` is not an error; the report carries
/// `converged = false` and the caller decides.
pub fn resistance_apply(
    cfg: &Configuration,
    velocities: &[Vec3],
    tol: f64,
    k_max: usize,
) -> Result<(ForceSet, SolveReport), MobilityError> {
    cfg.ensure_admissible()?;
    check_len(cfg, velocities)?;
    Ok(resistance_apply_unchecked(cfg, velocities, tol, k_max))
}

pub(crate) fn resistance_apply_unchecked(
    cfg: &Configuration,
    velocities: &[Vec3],
    tol: f64,
    k_max: usize,
) -> (ForceSet, SolveReport) {
    let drag = stokes_drag(cfg.radius);
    let w_norm = l2_norm(velocities);
    let mut g: Vec<Vec3> = velocities.iter().map(|w| *w * drag).collect();
    if w_norm == 0.0 {
        return (
            g,
            SolveReport { iterations: 1, residual_l2: 0.0, converged: true, contraction_estimate: 0.0 },
        );
    }
    let mut iterations = 1;
    let mut prev_diff = f64::NAN;
    let mut contraction = 0.0;
    loop {
        // G' = 6πR (W − J_off G); the mobility residual of the current
        // iterate is (G − G')/(6πR), so measuring convergence costs no
        // extra operator applies.
        let coupling = offdiag_apply(cfg, &g);
        let g_next: Vec<Vec3> = velocities
            .iter()
            .zip(&coupling)
            .map(|(w, c)| (*w - *c) * drag)
            .collect();
        let diff = g
            .iter()
            .zip(&g_next)
            .map(|(a, b)| (*a - *b).norm_sq())
            .sum::<f64>()
            .sqrt();
        let residual = diff / (drag * w_norm);
        if prev_diff.is_finite() && prev_diff > 0.0 {
            contraction = diff / prev_diff;
        }
        prev_diff = diff;
        if residual <= tol {
            return (
                g,
                SolveReport { iterations, residual_l2: residual, converged: true, contraction_estimate: contraction },
            );
        }
        g = g_next;
        iterations += 1;
        if iterations > k_max {
            return (
                g,
                SolveReport { iterations: k_max, residual_l2: residual, converged: false, contraction_estimate: contraction },
            );
        }
    }
}

/// Velocities that inertialess particles would assume at the positions of
/// `cfg`, i.e. the solve of 𝓡 Ṽ = ḡ/N against the reflections resistance:
/// Ṽ = M (ḡ/N). The report carries the measured residual
/// ‖𝓡 Ṽ − ḡ/N‖₂/‖ḡ/N‖₂ obtained by running the resistance solve on Ṽ.
pub fn inertialess_velocities(
    cfg: &Configuration,
    g: Vec3,
    tol: f64,
    k_max: usize,
) -> Result<(VelocitySet, SolveReport), MobilityError> {
    cfg.ensure_admissible()?;
    let v = inertialess_velocities_unchecked(cfg, g);
    let gravity: Vec<Vec3> = vec![g / cfg.n() as f64; cfg.n()];
    let (forces, mut report) = resistance_apply_unchecked(cfg, &v, tol, k_max);
    let g_norm = l2_norm(&gravity);
    let err = forces
        .iter()
        .zip(&gravity)
        .map(|(a, b)| (*a - *b).norm_sq())
        .sum::<f64>()
        .sqrt();
    report.residual_l2 = err / g_norm;
    report.converged = report.converged && report.residual_l2 <= tol.max(1e-12) * 10.0;
    Ok((v, report))
}

/// Same velocities without the verification solve; used inside integrators
/// where the residual is not recorded. Identical values to
/// [`inertialess_velocities`].
pub(crate) fn inertialess_velocities_unchecked(cfg: &Configuration, g: Vec3) -> VelocitySet {
    let forces: Vec<Vec3> = vec![g / cfg.n() as f64; cfg.n()];
    mobility_apply_unchecked(cfg, &forces)
}

/// Mean-field fluid velocity at particle i generated by the other
/// particles' forces: Σ_{j≠i} J(X_i − X_j) F_j.
pub fn mean_field_velocity(cfg: &Configuration, forces: &[Vec3], i: usize) -> Vec3 {
    let mut acc = Vec3::zero();
    for j in 0..cfg.n() {
        if j != i {
            acc += corrected_apply(cfg.radius, cfg.positions[i] - cfg.positions[j], forces[j]);
        }
    }
    acc
}

/// All mean-field velocities in one parallel pass.
pub fn mean_field_velocities(cfg: &Configuration, forces: &[Vec3]) -> Vec<Vec3> {
    offdiag_apply(cfg, forces)
}

const POWER_ITER_MAX: usize = 4000;
const POWER_ITER_RELTOL: f64 = 1e-5;

fn seeded_unit(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Vec3> = (0..n)
        .map(|_| Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = l2_norm(&v);
    for x in v.iter_mut() {
        *x = *x / norm;
    }
    v
}

fn power_iteration(
    n: usize,
    mut apply: impl FnMut(&[Vec3]) -> Vec<Vec3>,
) -> (f64, usize, bool) {
    let mut v = seeded_unit(n, 0x5eed_cafe);
    let mut rq_prev = f64::NAN;
    for k in 1..=POWER_ITER_MAX {
        let av = apply(&v);
        let rq = dot(&v, &av);
        let norm = l2_norm(&av);
        if norm == 0.0 {
            return (0.0, k, true);
        }
        for (x, y) in v.iter_mut().zip(&av) {
            *x = *y / norm;
        }
        if rq_prev.is_finite() && (rq - rq_prev).abs() <= POWER_ITER_RELTOL * rq.abs() {
            return (rq, k, true);
        }
        rq_prev = rq;
    }
    (rq_prev, POWER_ITER_MAX, false)
}

/// Extremal eigenvalues of the resistance operator to relative 1e-3:
/// the largest by power iteration on the resistance solve, the smallest as
/// the reciprocal of the largest mobility eigenvalue.
pub fn resistance_spectrum(cfg: &Configuration) -> Result<SpectrumEstimate, MobilityError> {
    cfg.ensure_admissible()?;
    let (mob_max, it_mob, ok_mob) = power_iteration(cfg.n(), |v| mobility_apply_unchecked(cfg, v));
    let (res_max, it_res, ok_res) = power_iteration(cfg.n(), |v| {
        resistance_apply_unchecked(cfg, v, 1e-12, 400).0
    });
    let est = SpectrumEstimate {
        c_r_est: 1.0 / mob_max,
        big_c_r_est: res_max,
        power_iters: it_mob + it_res,
    };
    if !(ok_mob && ok_res) {
        return Err(MobilityError::SpectrumStagnation {
            iters: est.power_iters,
            c_r_est: est.c_r_est,
            big_c_r_est: est.big_c_r_est,
        });
    }
    Ok(est)
}

/// Position Jacobian blocks A_ij = ∂Ṽ_i/∂Y_j of the inertialess velocities,
/// by central finite differences with step h.
pub fn inertialess_position_jacobian(
    cfg: &Configuration,
    g: Vec3,
    h: f64,
) -> Result<Vec<Vec<Mat3>>, MobilityError> {
    cfg.ensure_admissible()?;
    let n = cfg.n();
    let mut blocks = vec![vec![Mat3::zero(); n]; n];
    let mut work = cfg.clone();
    for j in 0..n {
        for axis in 0..3 {
            let mut e = Vec3::zero();
            match axis {
                0 => e.x = h,
                1 => e.y = h,
                _ => e.z = h,
            }
            let orig = work.positions[j];
            work.positions[j] = orig + e;
            let plus = inertialess_velocities_unchecked(&work, g);
            work.positions[j] = orig - e;
            let minus = inertialess_velocities_unchecked(&work, g);
            work.positions[j] = orig;
            for i in 0..n {
                let col = (plus[i] - minus[i]) / (2.0 * h);
                blocks[i][j].m[0][axis] = col.x;
                blocks[i][j].m[1][axis] = col.y;
                blocks[i][j].m[2][axis] = col.z;
            }
        }
    }
    Ok(blocks)
}

/// Operator-norm bound for ∇(𝓡⁻¹ḡ) via the blockwise row/column-sum
/// estimate ‖A‖ ≤ (max_i Σ_j ‖A_ij‖ · max_j Σ_i ‖A_ij‖)^{1/2}.
pub fn grad_inertialess_norm(cfg: &Configuration, g: Vec3, h: f64) -> Result<f64, MobilityError> {
    let blocks = inertialess_position_jacobian(cfg, g, h)?;
    let n = cfg.n();
    let norms: Vec<Vec<f64>> = blocks
        .iter()
        .map(|row| row.iter().map(|b| b.spectral_norm()).collect())
        .collect();
    let signal = norms
        .iter()
        .flat_map(|r| r.iter())
        .cloned()
        .fold(0.0f64, f64::max);
    // Cancellation noise of the central difference: eps·|Ṽ|/h per entry.
    let v = inertialess_velocities_unchecked(cfg, g);
    let scale = v.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
    let noise = f64::EPSILON * scale / h;
    if n > 1 && signal < 10.0 * noise {
        return Err(MobilityError::GradientNoise { signal, noise });
    }
    let row_max = norms
        .iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(0.0f64, f64::max);
    let col_max = (0..n)
        .map(|j| norms.iter().map(|r| r[j]).sum::<f64>())
        .fold(0.0f64, f64::max);
    Ok((row_max * col_max).sqrt())
}
