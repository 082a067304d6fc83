//! Force-representation (Stokes-law) validator.
//!
//! Constructs the annulus weight ω on A = B_d \ B_{d/2} from the classical
//! translating-sphere solution
//!
//!   Ψ[W](x) = (3r/(2|x|) − r³/(2|x|³)) (W×x)/2,
//!   𝒰[W]   = ∇×Ψ[W],
//!   𝒫[W](x) = (3r/2) (W·x)/|x|³,
//!
//! a radial polynomial cutoff η (≡1 on B_{d/2}, ≡0 outside B_d, value and
//! first two derivatives matched at both ends), and the stress divergence
//!
//!   ω = (|A|/(6πr)) Σ_i e_i ⊗ div σ[∇×(η Ψ[e_i]), η 𝒫[e_i]],
//!
//! with div σ taken by nested central differences. The validator then checks
//! (a) ⨍_A ω dx = Id against the quadrature, and (b) the surface identity
//!
//!   −∫_{∂B_r} σ[w] n dH² = 6πr ( ⨍_{∂B_r} w dH² − ⨍_A ω w dx )
//!
//! for a test field w that solves Stokes in B_d \ B_r exactly: the sphere's
//! own field plus one external Stokeslet. The left side is then known in
//! closed form (6πr W; the regular Stokeslet contributes no net flux).

use crate::geometry::{oseen, single_sphere_field, stokes_drag, Mat3, Vec3};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ForceRepError {
    #[error("force representation requires d ≥ 4r, got r = {r}, d = {d}")]
    BadGeometry { r: f64, d: f64 },
    #[error("resolution must satisfy 0 < spacing < d/8, got {0}")]
    BadResolution(f64),
}

/// A single external point force.
#[derive(Debug, Clone, Copy)]
pub struct StokesletSpec {
    pub position: Vec3,
    pub force: Vec3,
}

#[derive(Debug, Clone)]
pub struct ForceRepReport {
    /// ‖⨍_A ω dx − Id‖_F measured with the same quadrature that built ω.
    pub omega_mean_error: f64,
    /// sup over quadrature nodes of |ω|_F (boundedness of the weight).
    pub omega_sup: f64,
    /// Closed-form left side of the surface identity, 6πr·W.
    pub br_lhs: Vec3,
    /// Quadrature right side 6πr(⨍ w − ⨍ ω w).
    pub br_rhs: Vec3,
    /// |lhs − rhs| / |lhs|.
    pub br_residual_rel: f64,
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Radial transition: 1 on [0, d/2], 0 on [d, ∞). Septic smoothstep with
/// three matched derivatives at both ends (C³); anything less smooth leaves
/// a jump in η''' that degrades the nested-difference stress divergence to
/// first order in the step.
fn cutoff(s: f64, d: f64) -> (f64, f64) {
    let lo = 0.5 * d;
    if s <= lo {
        return (1.0, 0.0);
    }
    if s >= d {
        return (0.0, 0.0);
    }
    let t = (s - lo) / lo;
    let smooth = t.powi(4) * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
    let dsmooth = 140.0 * t.powi(3) * (1.0 - t).powi(3);
    (1.0 - smooth, -dsmooth / lo)
}

struct TestSolution {
    r: f64,
    d: f64,
    w: Vec3,
}

impl TestSolution {
    /// ∇×(η Ψ[W]) in closed form (the nested differences act on this).
    fn velocity(&self, x: Vec3) -> Vec3 {
        let s2 = x.norm_sq();
        let s = s2.sqrt();
        if s <= self.r {
            return self.w;
        }
        let (eta, deta) = cutoff(s, self.d);
        if eta == 0.0 && deta == 0.0 {
            return Vec3::zero();
        }
        let r = self.r;
        let f = 1.5 * r / s - 0.5 * r * r * r / (s2 * s);
        let fp = -1.5 * r / s2 + 1.5 * r * r * r / (s2 * s2);
        // η ∇×Ψ + ∇η × Ψ
        let curl_psi = self.w * f + (self.w * s - x * (self.w.dot(x) / s)) * (0.5 * fp);
        let grad_eta_cross = (self.w * s2 - x * self.w.dot(x)) * (0.5 * deta * f / s);
        curl_psi * eta + grad_eta_cross
    }

    /// η 𝒫[W], the cut-off Stokeslet pressure (3r/2)(W·x)/|x|³.
    fn pressure(&self, x: Vec3) -> f64 {
        let s2 = x.norm_sq();
        let s = s2.sqrt();
        let (eta, _) = cutoff(s, self.d);
        if eta == 0.0 {
            return 0.0;
        }
        eta * 1.5 * self.r * self.w.dot(x) / (s2 * s)
    }

    /// div σ[v, p] = Δv − ∇p by nested central differences with step h.
    fn div_stress(&self, x: Vec3, h: f64) -> Vec3 {
        let axes = [Vec3::new(h, 0.0, 0.0), Vec3::new(0.0, h, 0.0), Vec3::new(0.0, 0.0, h)];
        let center = self.velocity(x);
        let mut lap = Vec3::zero();
        let mut grad_p = Vec3::zero();
        for (k, e) in axes.iter().enumerate() {
            let vp = self.velocity(x + *e);
            let vm = self.velocity(x - *e);
            lap += (vp + vm - center * 2.0) / (h * h);
            let dp = (self.pressure(x + *e) - self.pressure(x - *e)) / (2.0 * h);
            match k {
                0 => grad_p.x = dp,
                1 => grad_p.y = dp,
                _ => grad_p.z = dp,
            }
        }
        lap - grad_p
    }
}

struct AnnulusQuadrature {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

fn annulus_quadrature(d: f64, n_r: usize, n_mu: usize, n_phi: usize) -> AnnulusQuadrature {
    let gl = gauss_legendre(n_mu);
    let r_lo = 0.5 * d;
    let dr = (d - r_lo) / n_r as f64;
    let g2 = 1.0 / 3.0f64.sqrt();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for ir in 0..n_r {
        let r_a = r_lo + ir as f64 * dr;
        let r_b = r_a + dr;
        // two-point Gauss per radial cell on the measure r² dr
        for gnode in [-g2, g2] {
            let rc = 0.5 * (r_a + r_b) + 0.5 * dr * gnode;
            let w_rad = rc * rc * 0.5 * dr;
            for &(mu, w_mu) in &gl {
                let sin_t = (1.0 - mu * mu).sqrt();
                for ip in 0..n_phi {
                    let phi = 2.0 * std::f64::consts::PI * ip as f64 / n_phi as f64;
                    nodes.push(Vec3::new(
                        rc * sin_t * phi.cos(),
                        rc * sin_t * phi.sin(),
                        rc * mu,
                    ));
                    weights.push(w_rad * w_mu * 2.0 * std::f64::consts::PI / n_phi as f64);
                }
            }
        }
    }
    AnnulusQuadrature { nodes, weights }
}

fn sphere_average(r: f64, n_mu: usize, n_phi: usize, f: impl Fn(Vec3) -> Vec3) -> Vec3 {
    let gl = gauss_legendre(n_mu);
    let mut acc = Vec3::zero();
    let mut total = 0.0;
    for &(mu, w_mu) in &gl {
        let sin_t = (1.0 - mu * mu).sqrt();
        for ip in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / n_phi as f64;
            let x = Vec3::new(r * sin_t * phi.cos(), r * sin_t * phi.sin(), r * mu);
            acc += f(x) * w_mu;
            total += w_mu;
        }
    }
    acc / total
}

const N_MU: usize = 24;
const N_PHI: usize = 32;
/// The nested-difference step is this fraction of the radial spacing; both
/// error sources then scale like spacing² with a constant small enough for
/// the d/200 reference grid.
const FD_FRACTION: f64 = 1.0 / 16.0;

/// Construct ω at the given resolution and validate both properties of the
/// force representation. `spacing` sets the radial cell size and the
/// finite-difference step; the residuals decay like spacing².
pub fn force_representation_check(
    r: f64,
    d: f64,
    spacing: f64,
    boundary_velocity: Vec3,
    external: Option<StokesletSpec>,
) -> Result<ForceRepReport, ForceRepError> {
    if !(d >= 4.0 * r) || !(r > 0.0) {
        return Err(ForceRepError::BadGeometry { r, d });
    }
    if !(spacing > 0.0 && spacing < d / 8.0) {
        return Err(ForceRepError::BadResolution(spacing));
    }
    let n_r = ((0.5 * d / spacing).round() as usize).max(4);
    let h_fd = spacing * FD_FRACTION;
    let quad = annulus_quadrature(d, n_r, N_MU, N_PHI);
    let volume: f64 = quad.weights.iter().sum();
    let basis = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ];
    let solutions: Vec<TestSolution> = basis
        .iter()
        .map(|e| TestSolution { r, d, w: *e })
        .collect();
    let prefactor = volume / stokes_drag(r);
    // ω rows: row i = div σ for boundary data e_i.
    let omegas: Vec<Mat3> = quad
        .nodes
        .par_iter()
        .map(|x| {
            let rows: Vec<Vec3> = solutions.iter().map(|s| s.div_stress(*x, h_fd)).collect();
            Mat3::from_rows(rows[0] * prefactor, rows[1] * prefactor, rows[2] * prefactor)
        })
        .collect();

    let mut mean = Mat3::zero();
    let mut omega_sup = 0.0f64;
    for (w, om) in quad.weights.iter().zip(&omegas) {
        mean = mean.add(&om.scale(*w));
        omega_sup = omega_sup.max(om.frobenius());
    }
    mean = mean.scale(1.0 / volume);
    let omega_mean_error = mean.sub(&Mat3::identity()).frobenius();

    // Surface identity for w = own field + optional external Stokeslet.
    let own_force = boundary_velocity * stokes_drag(r);
    let field = |x: Vec3| -> Vec3 {
        let mut v = single_sphere_field(own_force, r, x);
        if let Some(ext) = &external {
            v += oseen(x - ext.position).expect("stokeslet outside annulus").apply(ext.force);
        }
        v
    };
    let surface_avg = sphere_average(r, N_MU, N_PHI, field);
    let mut annulus_avg = Vec3::zero();
    for ((x, w), om) in quad.nodes.iter().zip(&quad.weights).zip(&omegas) {
        annulus_avg += om.apply(field(*x)) * *w;
    }
    annulus_avg = annulus_avg / volume;

    let br_lhs = boundary_velocity * stokes_drag(r);
    let br_rhs = (surface_avg - annulus_avg) * stokes_drag(r);
    let br_residual_rel = (br_lhs - br_rhs).norm() / br_lhs.norm().max(1e-300);

    Ok(ForceRepReport {
        omega_mean_error,
        omega_sup,
        br_lhs,
        br_rhs,
        br_residual_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(8);
        let total: f64 = gl.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-13);
        let x4: f64 = gl.iter().map(|(x, w)| w * x.powi(4)).sum();
        assert!((x4 - 0.4).abs() < 1e-13);
    }

    #[test]
    fn cutoff_matches_endpoints() {
        let d = 2.0;
        assert_eq!(cutoff(0.9, d), (1.0, 0.0));
        assert_eq!(cutoff(2.1, d), (0.0, 0.0));
        let (v, _) = cutoff(1.0 + 1e-12, d);
        assert!((v - 1.0).abs() < 1e-9);
        let (v, s) = cutoff(1.5, d);
        assert!((v - 0.5).abs() < 1e-12);
        assert!(s < 0.0);
    }

    #[test]
    fn translating_sphere_velocity_is_rigid_on_surface() {
        let sol = TestSolution { r: 0.5, d: 4.0, w: Vec3::new(1.0, -2.0, 0.5) };
        for dir in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.6, 0.0, 0.8)] {
            let v = sol.velocity(dir * 0.5000001);
            assert!((v - sol.w).norm() < 1e-5);
        }
    }

    /// Away from the cutoff shell the pair (𝒰, 𝒫) solves homogeneous
    /// Stokes, so the numerical div σ is pure truncation error of order h².
    #[test]
    fn stress_divergence_vanishes_where_cutoff_is_flat() {
        let sol = TestSolution { r: 0.25, d: 4.0, w: Vec3::new(0.0, 0.0, 1.0) };
        let x = Vec3::new(0.9, 0.3, -0.2); // |x| < d/2 = 2, η ≡ 1
        let coarse = sol.div_stress(x, 1e-3).norm();
        let fine = sol.div_stress(x, 5e-4).norm();
        assert!(coarse < 1e-5, "div σ too large: {coarse}");
        assert!(fine < 0.3 * coarse, "no h² decay: {coarse} -> {fine}");
    }
}
