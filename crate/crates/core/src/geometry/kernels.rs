//! Closed-form interaction kernels.
//!
//! The Oseen tensor
//!
//!   Φ(x) = (1/8π) (I/|x| + x⊗x/|x|³)
//!
//! is the fundamental solution of the steady Stokes equations. Its Laplacian
//! has the closed form ΔΦ(x) = (1/4π|x|³)(I − 3 x̂⊗x̂), so the velocity field
//! generated by a force G spread uniformly over the surface of a sphere of
//! radius R is
//!
//!   w(x) = G/(6πR)                      for |x| ≤ R,
//!   w(x) = (Φ(x) + (R²/6) ΔΦ(x)) G     for |x| > R,
//!
//! continuous across |x| = R. The finite-radius corrected kernel
//! Φ + (R²/6)ΔΦ is the pairwise building block of the mobility operators.
//!
//! The module also provides a small zoo of divergence-free interaction
//! kernels with tunable singularity exponent α, used by the binary
//! interaction systems.

use super::vec::{Mat3, Vec3};
use thiserror::Error;

pub const FRAC_1_8PI: f64 = 1.0 / (8.0 * std::f64::consts::PI);
pub const FRAC_1_4PI: f64 = 1.0 / (4.0 * std::f64::consts::PI);

/// Stokes drag coefficient 6πR for a sphere of radius `r`.
pub fn stokes_drag(r: f64) -> f64 {
    6.0 * std::f64::consts::PI * r
}

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("oseen tensor evaluated at the origin")]
    ZeroArgument,
    #[error("corrected kernel requires |x| > R, got |x| = {dist}, R = {radius}")]
    InsideSphere { dist: f64, radius: f64 },
}

/// Oseen tensor Φ(x). The caller is responsible for the convention Φ(0) = 0
/// where superpositions skip the self term.
pub fn oseen(x: Vec3) -> Result<Mat3, KernelError> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(KernelError::ZeroArgument);
    }
    let r = r2.sqrt();
    let a = FRAC_1_8PI / r;
    let b = FRAC_1_8PI / (r2 * r);
    let mut out = x.outer(x).scale(b);
    for i in 0..3 {
        out.m[i][i] += a;
    }
    Ok(out)
}

/// Laplacian of the Oseen tensor, ΔΦ(x) = (1/4π|x|³)(I − 3 x̂⊗x̂).
pub fn oseen_laplacian(x: Vec3) -> Result<Mat3, KernelError> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(KernelError::ZeroArgument);
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let a = FRAC_1_4PI / r3;
    let b = -3.0 * FRAC_1_4PI / (r3 * r2);
    let mut out = x.outer(x).scale(b);
    for i in 0..3 {
        out.m[i][i] += a;
    }
    Ok(out)
}

/// Finite-radius corrected kernel (Φ + (R²/6)ΔΦ)(x), valid for |x| > R.
///
/// At |x| = R the kernel equals I/(6πR), matching the rigid interior value
/// of [`single_sphere_field`].
pub fn corrected_kernel(radius: f64, x: Vec3) -> Result<Mat3, KernelError> {
    let r2 = x.norm_sq();
    if r2 <= radius * radius {
        return Err(KernelError::InsideSphere { dist: r2.sqrt(), radius });
    }
    Ok(corrected_kernel_unchecked(radius, x))
}

/// Same as [`corrected_kernel`] without the |x| > R precondition check.
/// Inner mobility loops validate admissibility once per configuration.
#[inline]
pub fn corrected_kernel_unchecked(radius: f64, x: Vec3) -> Mat3 {
    let r2 = x.norm_sq();
    let r = r2.sqrt();
    let r3 = r2 * r;
    let rr2 = radius * radius;
    // (1/8π) [ (1/r + R²/(3r³)) I + (1/r³ − R²/r⁵) x⊗x ]
    let a = FRAC_1_8PI * (1.0 / r + rr2 / (3.0 * r3));
    let b = FRAC_1_8PI * (1.0 / r3 - rr2 / (r3 * r2));
    let mut out = x.outer(x).scale(b);
    for i in 0..3 {
        out.m[i][i] += a;
    }
    out
}

/// Velocity field of a force G spread uniformly over the sphere surface
/// ∂B_R(0), evaluated at x. Total on R > 0.
pub fn single_sphere_field(force: Vec3, radius: f64, x: Vec3) -> Vec3 {
    if x.norm_sq() <= radius * radius {
        force / stokes_drag(radius)
    } else {
        corrected_kernel_unchecked(radius, x).apply(force)
    }
}

/// Dimension tag for the (C_α) kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelDim {
    Two,
    Three,
}

/// Concrete divergence-free kernel families with |K(x)| ≤ C/|x|^α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelForm {
    /// K(x) = c x⊥/|x|^{α+1} in the xy-plane.
    Rotational2d,
    /// K(x) = c (e×x)/|x|^{α+1} for a fixed axis e.
    Curl3d { axis: Vec3 },
    /// Rotational form with the singularity mollified on scale `length`:
    /// |x| replaced by sqrt(|x|² + length²) in the radial factor.
    Smoothed { length: f64 },
}

/// A kernel satisfying |K(x)| + |x||∇K(x)| ≤ C_K/|x|^α with div K = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CAlphaKernel {
    pub dim: KernelDim,
    pub alpha: f64,
    pub form: KernelForm,
    pub strength: f64,
}

impl CAlphaKernel {
    pub fn rotational_2d(alpha: f64, strength: f64) -> Self {
        assert!((0.0..1.0).contains(&alpha), "need α ∈ [0, d−1) with d = 2");
        CAlphaKernel {
            dim: KernelDim::Two,
            alpha,
            form: KernelForm::Rotational2d,
            strength,
        }
    }

    pub fn curl_3d(alpha: f64, strength: f64, axis: Vec3) -> Self {
        assert!((0.0..2.0).contains(&alpha), "need α ∈ [0, d−1) with d = 3");
        CAlphaKernel {
            dim: KernelDim::Three,
            alpha,
            strength,
            form: KernelForm::Curl3d { axis: axis.normalized() },
        }
    }

    pub fn smoothed_2d(alpha: f64, strength: f64, length: f64) -> Self {
        assert!(length > 0.0);
        CAlphaKernel {
            dim: KernelDim::Two,
            alpha,
            strength,
            form: KernelForm::Smoothed { length },
        }
    }

    /// Certified constant for the structural bound
    /// |K| + |x||∇K| ≤ C_K/|x|^α; checked numerically in the test suite.
    /// For both curl families |∇K|_F ≤ (√2 + α + 1)·strength/|x|^{α+1}.
    pub fn bound_constant(&self) -> f64 {
        self.strength * (4.0 + self.alpha)
    }

    /// Evaluate K(x). Returns the zero vector at x = 0 (the convention
    /// K(0) = 0 used by every pair sum).
    pub fn eval(&self, x: Vec3) -> Vec3 {
        let r2 = match self.dim {
            KernelDim::Two => x.x * x.x + x.y * x.y,
            KernelDim::Three => x.norm_sq(),
        };
        if r2 == 0.0 {
            return Vec3::zero();
        }
        match self.form {
            KernelForm::Rotational2d => {
                let r = r2.sqrt();
                x.perp_xy() * (self.strength / r.powf(self.alpha + 1.0))
            }
            KernelForm::Curl3d { axis } => {
                let r = r2.sqrt();
                axis.cross(x) * (self.strength / r.powf(self.alpha + 1.0))
            }
            KernelForm::Smoothed { length } => {
                let rho = (r2 + length * length).sqrt();
                x.perp_xy() * (self.strength / rho.powf(self.alpha + 1.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn fd_divergence(f: impl Fn(Vec3) -> Vec3, x: Vec3, h: f64) -> f64 {
        let e = [Vec3::new(h, 0.0, 0.0), Vec3::new(0.0, h, 0.0), Vec3::new(0.0, 0.0, h)];
        let mut div = 0.0;
        for (k, ek) in e.iter().enumerate() {
            let fp = f(x + *ek);
            let fm = f(x - *ek);
            let d = (fp - fm) / (2.0 * h);
            div += [d.x, d.y, d.z][k];
        }
        div
    }

    #[test]
    fn oseen_on_unit_axis() {
        let m = oseen(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((m.m[0][0] - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((m.m[1][1] - 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!((m.m[2][2] - 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!(m.m[0][1].abs() < 1e-16 && m.m[0][2].abs() < 1e-16);
    }

    #[test]
    fn oseen_even_symmetry() {
        let x = Vec3::new(0.3, -1.2, 0.7);
        let a = oseen(x).unwrap();
        let b = oseen(-x).unwrap();
        assert!(a.sub(&b).frobenius() < 1e-15);
    }

    #[test]
    fn oseen_zero_is_domain_error() {
        assert_eq!(oseen(Vec3::zero()).unwrap_err(), KernelError::ZeroArgument);
    }

    #[test]
    fn oseen_field_is_divergence_free() {
        let g = Vec3::new(0.0, 0.0, -1.0);
        let div = fd_divergence(|y| oseen(y).unwrap().apply(g), Vec3::new(1.0, 1.0, 1.0), 1e-4);
        assert!(div.abs() < 1e-6, "divergence {div}");
    }

    #[test]
    fn oseen_is_symmetric_psd() {
        let pts = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.3, -1.2, 0.7),
            Vec3::new(-2.0, 0.1, 0.1),
            Vec3::new(1e-3, 2e-3, -1e-3),
        ];
        for x in pts {
            let m = oseen(x).unwrap();
            assert!(m.max_asymmetry() < 1e-18);
            let eig = m.sym_eigenvalues();
            assert!(eig[0] >= -1e-12, "eigenvalue {} at {x:?}", eig[0]);
        }
    }

    #[test]
    fn oseen_laplacian_matches_finite_differences() {
        let x = Vec3::new(0.9, -0.4, 0.6);
        let h = 1e-4;
        let exact = oseen_laplacian(x).unwrap();
        let mut fd = Mat3::zero();
        let e = [Vec3::new(h, 0.0, 0.0), Vec3::new(0.0, h, 0.0), Vec3::new(0.0, 0.0, h)];
        for ek in e {
            let p = oseen(x + ek).unwrap();
            let m = oseen(x - ek).unwrap();
            let c = oseen(x).unwrap();
            fd = fd.add(&p.add(&m).sub(&c.scale(2.0)).scale(1.0 / (h * h)));
        }
        assert!(
            exact.sub(&fd).frobenius() < 1e-6,
            "Δ mismatch {}",
            exact.sub(&fd).frobenius()
        );
    }

    #[test]
    fn single_sphere_interior_value() {
        let g = Vec3::new(0.0, 0.0, -1.0);
        let w = single_sphere_field(g, 0.1, Vec3::new(0.0, 0.0, 0.05));
        let expect = g / (0.6 * PI);
        assert!((w - expect).norm() < 1e-12);
        assert!((w.z + 0.5305164769729845).abs() < 1e-12);
    }

    #[test]
    fn single_sphere_continuous_across_surface() {
        let g = Vec3::new(0.4, -1.0, 0.2);
        let r = 0.37;
        for dir in [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.3, 0.5, -0.81).normalized(),
        ] {
            let inner = single_sphere_field(g, r, dir * (r * (1.0 - 1e-8)));
            let outer = single_sphere_field(g, r, dir * (r * (1.0 + 1e-8)));
            assert!((inner - outer).norm() < 1e-6);
        }
    }

    #[test]
    fn single_sphere_far_field_is_oseen() {
        let g = Vec3::new(0.0, 0.0, -1.0);
        let r = 0.01;
        let x = Vec3::new(0.7, -0.3, 0.648).normalized() * (100.0 * r);
        let full = single_sphere_field(g, r, x);
        let stokeslet = oseen(x).unwrap().apply(g);
        assert!((full - stokeslet).norm() / stokeslet.norm() < 1e-3);
    }

    #[test]
    fn corrected_kernel_r_to_zero_limit() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let j = corrected_kernel(1e-9, x).unwrap();
        let phi = oseen(x).unwrap();
        assert!(j.sub(&phi).frobenius() < 1e-15);
    }

    #[test]
    fn corrected_kernel_even_and_guarded() {
        let x = Vec3::new(0.5, 0.2, -0.4);
        let j = corrected_kernel(0.1, x).unwrap();
        let jm = corrected_kernel(0.1, -x).unwrap();
        assert!(j.sub(&jm).frobenius() < 1e-15);
        assert!(corrected_kernel(0.7, x).is_err());
    }

    /// Cross-check the analytic ΔΦ inside the corrected kernel against a
    /// finite-difference Laplacian of Φ, entry by entry.
    #[test]
    fn corrected_kernel_axis_entry_vs_finite_differences() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let radius = 0.3;
        let j = corrected_kernel(radius, x).unwrap();
        let h = 1e-4;
        let mut lap = Mat3::zero();
        let e = [Vec3::new(h, 0.0, 0.0), Vec3::new(0.0, h, 0.0), Vec3::new(0.0, 0.0, h)];
        for ek in e {
            let p = oseen(x + ek).unwrap();
            let m = oseen(x - ek).unwrap();
            let c = oseen(x).unwrap();
            lap = lap.add(&p.add(&m).sub(&c.scale(2.0)).scale(1.0 / (h * h)));
        }
        let expect = oseen(x).unwrap().add(&lap.scale(radius * radius / 6.0));
        assert!((j.m[0][0] - expect.m[0][0]).abs() < 1e-6);
        assert!(j.sub(&expect).frobenius() < 1e-6);
    }

    #[test]
    fn corrected_kernel_rigid_on_surface() {
        // At |x| = R the corrected kernel degenerates to I/(6πR).
        let radius = 0.25;
        let x = Vec3::new(0.6, -0.64, 0.48).normalized() * (radius * (1.0 + 1e-12));
        let j = corrected_kernel(radius, x).unwrap();
        let expect = Mat3::identity().scale(1.0 / stokes_drag(radius));
        assert!(j.sub(&expect).frobenius() < 1e-9);
    }

    #[test]
    fn rotational_kernel_direct_substitution() {
        let k = CAlphaKernel::rotational_2d(0.0, 2.5);
        let v = k.eval(Vec3::new(1.0, 0.0, 0.0));
        assert!((v - Vec3::new(0.0, 2.5, 0.0)).norm() < 1e-15);
        assert_eq!(k.eval(Vec3::zero()), Vec3::zero());
    }

    #[test]
    fn kernels_are_divergence_free_numerically() {
        let kernels = [
            CAlphaKernel::rotational_2d(0.5, 1.0),
            CAlphaKernel::curl_3d(1.0, 1.3, Vec3::new(0.0, 0.0, 1.0)),
            CAlphaKernel::smoothed_2d(0.5, 1.0, 0.2),
        ];
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            // xorshift, plenty for sample points
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for k in kernels {
            for _ in 0..20 {
                let mut x = Vec3::new(next() * 4.0, next() * 4.0, next() * 4.0);
                if k.dim == KernelDim::Two {
                    x.z = 0.0;
                }
                if x.norm() < 0.3 {
                    x = x + Vec3::new(0.5, 0.5, 0.0);
                }
                let div = fd_divergence(|y| k.eval(y), x, 1e-5);
                assert!(div.abs() < 1e-6, "div {div} at {x:?} for {k:?}");
            }
        }
    }

    #[test]
    fn kernel_decay_and_gradient_bound() {
        let kernels = [
            CAlphaKernel::rotational_2d(0.5, 1.0),
            CAlphaKernel::curl_3d(0.8, 2.0, Vec3::new(0.0, 1.0, 0.0)),
        ];
        for k in kernels {
            for scale in [0.1, 1.0, 10.0] {
                let dirs = [
                    Vec3::new(1.0, 0.0, 0.0),
                    Vec3::new(0.6, 0.8, 0.0),
                    Vec3::new(0.0, 1.0, 0.0),
                ];
                for d in dirs {
                    let x = d * scale;
                    let r = x.norm();
                    // |K| |x|^α ≤ C_K
                    assert!(k.eval(x).norm() * r.powf(k.alpha) <= k.bound_constant() + 1e-12);
                    // |K| + |x| |∇K| ≤ C_K/|x|^α with a finite-difference ∇K
                    let h = 1e-6 * scale;
                    let mut grad_norm_sq = 0.0;
                    for e in [Vec3::new(h, 0.0, 0.0), Vec3::new(0.0, h, 0.0), Vec3::new(0.0, 0.0, h)] {
                        let d = (k.eval(x + e) - k.eval(x - e)) / (2.0 * h);
                        grad_norm_sq += d.norm_sq();
                    }
                    let lhs = k.eval(x).norm() + r * grad_norm_sq.sqrt();
                    assert!(
                        lhs <= k.bound_constant() / r.powf(k.alpha) * (1.0 + 1e-6),
                        "bound violated at scale {scale}: {lhs}"
                    );
                }
            }
        }
    }
}
