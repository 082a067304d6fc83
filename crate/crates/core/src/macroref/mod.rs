//! Particle-method reference solvers for the limiting transport equations.
//!
//! A macroscopic density is carried by quadrature markers with weights
//! (a [`WeightedCloud`]). The settling reference advects markers by the
//! ε-regularized velocity
//!
//!   u_*(x) + g/(6πγ) = Σ_m w_m Φ_ε(x − y_m) g + g/(6πγ),
//!
//! with the self term excluded when x is a marker; the binary-interaction
//! reference advects by (K ∗ σ)(x) = Σ_m w_m K(x − y_m). Both steppers are
//! midpoint RK2 and leave the weights untouched. With uniform weights and
//! ε = 0 the settling stepper is exactly the first-order microscopic limit
//! dynamics on the markers.

use crate::geometry::{CAlphaKernel, KernelDim, Vec3, FRAC_1_8PI};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MacroError {
    #[error("marker count must be ≥ 1, got {0}")]
    BadCount(usize),
    #[error("regularization ε must be nonnegative, got {0}")]
    BadEpsilon(f64),
    #[error("weights must be nonnegative and sum to 1 within 1e-12 (sum = {0})")]
    BadWeights(f64),
    #[error("evaluation point coincides with marker {0} and ε = 0")]
    OnMarker(usize),
    #[error("unsupported density family for this operation: {0}")]
    Unsupported(&'static str),
}

/// Initial density families for the reference solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySpec {
    Gaussian { sigma: f64, dim: u32 },
    UniformBall { radius: f64, dim: u32 },
    TwoBump { separation: f64, sigma: f64, dim: u32 },
}

impl DensitySpec {
    pub fn dim(&self) -> u32 {
        match *self {
            DensitySpec::Gaussian { dim, .. } => dim,
            DensitySpec::UniformBall { dim, .. } => dim,
            DensitySpec::TwoBump { dim, .. } => dim,
        }
    }

    /// Density value at a point (z ignored in 2d).
    pub fn value(&self, x: Vec3) -> f64 {
        match *self {
            DensitySpec::Gaussian { sigma, dim } => {
                let r2 = if dim == 2 { x.x * x.x + x.y * x.y } else { x.norm_sq() };
                let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(dim as f64 / 2.0);
                (-r2 / (2.0 * sigma * sigma)).exp() / norm
            }
            DensitySpec::UniformBall { radius, dim } => {
                let r2 = if dim == 2 { x.x * x.x + x.y * x.y } else { x.norm_sq() };
                if r2 <= radius * radius {
                    1.0 / ball_volume(radius, dim)
                } else {
                    0.0
                }
            }
            DensitySpec::TwoBump { separation, sigma, dim } => {
                let half = Vec3::new(0.5 * separation, 0.0, 0.0);
                let a = DensitySpec::Gaussian { sigma, dim };
                0.5 * (a.value(x - half) + a.value(x + half))
            }
        }
    }

    /// ‖ρ‖_{L^q}; exact for the gaussian and uniform-ball families, an upper
    /// bound for the two-bump mixture.
    pub fn lq_norm(&self, q: f64) -> f64 {
        match *self {
            DensitySpec::Gaussian { sigma, dim } => {
                let d = dim as f64;
                let peak = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-d / 2.0);
                if q.is_infinite() {
                    peak
                } else {
                    peak.powf(1.0 - 1.0 / q) * q.powf(-d / (2.0 * q))
                }
            }
            DensitySpec::UniformBall { radius, dim } => {
                let peak = 1.0 / ball_volume(radius, dim);
                if q.is_infinite() {
                    peak
                } else {
                    peak.powf(1.0 - 1.0 / q)
                }
            }
            DensitySpec::TwoBump { sigma, dim, .. } => {
                // ≤ the one-bump value at half mass, doubled mass share
                let one = DensitySpec::Gaussian { sigma, dim };
                if q.is_infinite() {
                    one.lq_norm(q)
                } else {
                    0.5f64.powf(1.0 - 1.0 / q) * one.lq_norm(q) * 2.0f64.powf(1.0 / q)
                }
            }
        }
    }

    fn bounding_half_width(&self) -> f64 {
        match *self {
            DensitySpec::Gaussian { sigma, .. } => 4.0 * sigma,
            DensitySpec::UniformBall { radius, .. } => radius,
            DensitySpec::TwoBump { separation, sigma, .. } => 0.5 * separation + 4.0 * sigma,
        }
    }
}

fn ball_volume(radius: f64, dim: u32) -> f64 {
    match dim {
        2 => std::f64::consts::PI * radius * radius,
        _ => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
    }
}

/// Quadrature markers with weights representing a macroscopic density.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCloud {
    pub markers: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub epsilon: f64,
}

impl WeightedCloud {
    pub fn new(markers: Vec<Vec3>, weights: Vec<f64>, epsilon: f64) -> Result<Self, MacroError> {
        if markers.is_empty() || markers.len() != weights.len() {
            return Err(MacroError::BadCount(markers.len()));
        }
        if !(epsilon >= 0.0) {
            return Err(MacroError::BadEpsilon(epsilon));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(MacroError::BadWeights(sum));
        }
        Ok(WeightedCloud { markers, weights, epsilon })
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// CSV dump (x,y,z,weight).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z,weight\n");
        for (m, w) in self.markers.iter().zip(&self.weights) {
            out.push_str(&format!("{},{},{},{}\n", m.x, m.y, m.z, w));
        }
        out
    }
}

/// Sampling mode for [`sample_cloud`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Tensor quadrature nodes with weights proportional to the density,
    /// support-truncated. The marker count is the largest per-axis cube
    /// not exceeding the request before truncation.
    Grid,
    /// Seeded iid draws with uniform weights.
    Iid,
}

/// Default ratio between ε and the marker spacing.
pub const EPSILON_FACTOR: f64 = 2.0;

/// Discretize ρ⁰ into a weighted cloud of roughly `count` markers.
pub fn sample_cloud(
    spec: &DensitySpec,
    count: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<WeightedCloud, MacroError> {
    sample_cloud_with_eps_factor(spec, count, mode, seed, EPSILON_FACTOR)
}

pub fn sample_cloud_with_eps_factor(
    spec: &DensitySpec,
    count: usize,
    mode: SampleMode,
    seed: u64,
    eps_factor: f64,
) -> Result<WeightedCloud, MacroError> {
    if count == 0 {
        return Err(MacroError::BadCount(0));
    }
    let dim = spec.dim();
    match mode {
        SampleMode::Grid => {
            let per_axis = (count as f64).powf(1.0 / dim as f64).round().max(1.0) as usize;
            let half = spec.bounding_half_width();
            let h = 2.0 * half / per_axis as f64;
            let mut markers = Vec::new();
            let mut weights = Vec::new();
            let coords: Vec<f64> = (0..per_axis)
                .map(|i| -half + (i as f64 + 0.5) * h)
                .collect();
            let mut push = |x: Vec3| {
                let w = spec.value(x);
                if w > 0.0 {
                    markers.push(x);
                    weights.push(w);
                }
            };
            if dim == 2 {
                for &x in &coords {
                    for &y in &coords {
                        push(Vec3::new(x, y, 0.0));
                    }
                }
            } else {
                for &x in &coords {
                    for &y in &coords {
                        for &z in &coords {
                            push(Vec3::new(x, y, z));
                        }
                    }
                }
            }
            let sum: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= sum;
            }
            WeightedCloud::new(markers, weights, eps_factor * h)
        }
        SampleMode::Iid => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let markers: Vec<Vec3> = (0..count).map(|_| draw(spec, &mut rng)).collect();
            let w = 1.0 / count as f64;
            let eps = eps_factor * (count as f64).powf(-1.0 / dim as f64)
                * 2.0
                * spec.bounding_half_width()
                / 2.0;
            WeightedCloud::new(markers, vec![w; count], eps)
        }
    }
}

fn draw(spec: &DensitySpec, rng: &mut ChaCha8Rng) -> Vec3 {
    match *spec {
        DensitySpec::Gaussian { sigma, dim } => {
            let mut normal = || {
                // Box-Muller
                let u1: f64 = rng.gen::<f64>().max(1e-300);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            };
            let z = if dim == 2 { 0.0 } else { normal() * sigma };
            Vec3::new(normal() * sigma, normal() * sigma, z)
        }
        DensitySpec::UniformBall { radius, dim } => loop {
            let x = Vec3::new(
                (rng.gen::<f64>() * 2.0 - 1.0) * radius,
                (rng.gen::<f64>() * 2.0 - 1.0) * radius,
                if dim == 2 { 0.0 } else { (rng.gen::<f64>() * 2.0 - 1.0) * radius },
            );
            if x.norm_sq() <= radius * radius {
                return x;
            }
        },
        DensitySpec::TwoBump { separation, sigma, dim } => {
            let side = if rng.gen::<bool>() { 0.5 } else { -0.5 };
            let center = Vec3::new(side * separation, 0.0, 0.0);
            let g = DensitySpec::Gaussian { sigma, dim };
            center + draw(&g, rng)
        }
    }
}

/// Regularized Oseen apply: Φ_ε(x)·g with |x| replaced by √(|x|²+ε²).
#[inline]
pub fn oseen_regularized_apply(eps: f64, x: Vec3, g: Vec3) -> Vec3 {
    let rho2 = x.norm_sq() + eps * eps;
    let rho = rho2.sqrt();
    g * (FRAC_1_8PI / rho) + x * (FRAC_1_8PI * x.dot(g) / (rho2 * rho))
}

/// Macroscopic advection velocity u_*(x) + g/(6πγ).
///
/// Errors if ε = 0 and x coincides with a marker; the marker steppers use
/// the self-excluded variant instead.
pub fn u_star(cloud: &WeightedCloud, x: Vec3, g: Vec3, gamma: f64) -> Result<Vec3, MacroError> {
    if cloud.epsilon == 0.0 {
        if let Some(i) = cloud.markers.iter().position(|m| (*m - x).norm_sq() == 0.0) {
            return Err(MacroError::OnMarker(i));
        }
    }
    let mut acc = g / (6.0 * std::f64::consts::PI * gamma);
    for (m, w) in cloud.markers.iter().zip(&cloud.weights) {
        acc += oseen_regularized_apply(cloud.epsilon, x - *m, g) * *w;
    }
    Ok(acc)
}

/// Marker advection velocities with self-exclusion (the convention
/// Φ(0) = 0). Positions may be a displaced copy of the cloud's markers.
fn settling_velocities(
    positions: &[Vec3],
    weights: &[f64],
    eps: f64,
    g: Vec3,
    gamma: f64,
) -> Vec<Vec3> {
    let drift = g / (6.0 * std::f64::consts::PI * gamma);
    (0..positions.len())
        .into_par_iter()
        .map(|m| {
            let mut acc = drift;
            for k in 0..positions.len() {
                if k != m {
                    acc += oseen_regularized_apply(eps, positions[m] - positions[k], g)
                        * weights[k];
                }
            }
            acc
        })
        .collect()
}

/// One midpoint (RK2) step of the settling reference dynamics. Weights are
/// conserved exactly.
pub fn transport_stokes_step(cloud: &WeightedCloud, g: Vec3, gamma: f64, dt: f64) -> WeightedCloud {
    let k1 = settling_velocities(&cloud.markers, &cloud.weights, cloud.epsilon, g, gamma);
    let mid: Vec<Vec3> = cloud
        .markers
        .iter()
        .zip(&k1)
        .map(|(y, v)| *y + *v * (0.5 * dt))
        .collect();
    let k2 = settling_velocities(&mid, &cloud.weights, cloud.epsilon, g, gamma);
    let markers = cloud
        .markers
        .iter()
        .zip(&k2)
        .map(|(y, v)| *y + *v * dt)
        .collect();
    WeightedCloud {
        markers,
        weights: cloud.weights.clone(),
        epsilon: cloud.epsilon,
    }
}

fn kernel_velocities(positions: &[Vec3], weights: &[f64], kernel: &CAlphaKernel) -> Vec<Vec3> {
    (0..positions.len())
        .into_par_iter()
        .map(|m| {
            let mut acc = Vec3::zero();
            for k in 0..positions.len() {
                if k != m {
                    acc += kernel.eval(positions[m] - positions[k]) * weights[k];
                }
            }
            acc
        })
        .collect()
}

/// One midpoint (RK2) step of the interaction-kernel continuity reference:
/// advection by (K ∗ σ)(x) with K(0) = 0.
pub fn k_equation_step(cloud: &WeightedCloud, kernel: &CAlphaKernel, dt: f64) -> WeightedCloud {
    let k1 = kernel_velocities(&cloud.markers, &cloud.weights, kernel);
    let mid: Vec<Vec3> = cloud
        .markers
        .iter()
        .zip(&k1)
        .map(|(y, v)| *y + *v * (0.5 * dt))
        .collect();
    let k2 = kernel_velocities(&mid, &cloud.weights, kernel);
    let markers = cloud
        .markers
        .iter()
        .zip(&k2)
        .map(|(y, v)| *y + *v * dt)
        .collect();
    WeightedCloud {
        markers,
        weights: cloud.weights.clone(),
        epsilon: cloud.epsilon,
    }
}

/// Macroscopic fluid velocity u_*(x) (no settling drift).
pub fn macroscopic_velocity_field(cloud: &WeightedCloud, g: Vec3, x: Vec3) -> Vec3 {
    let mut acc = Vec3::zero();
    for (m, w) in cloud.markers.iter().zip(&cloud.weights) {
        acc += oseen_regularized_apply(cloud.epsilon, x - *m, g) * *w;
    }
    acc
}

/// Microscopic fluid velocity: superposition of single-sphere fields of the
/// particle forces; inside a particle the rigid value V_i is returned.
pub fn microscopic_velocity_field(
    positions: &[Vec3],
    radius: f64,
    forces: &[Vec3],
    velocities: &[Vec3],
    x: Vec3,
) -> Vec3 {
    for (i, p) in positions.iter().enumerate() {
        if (x - *p).norm_sq() <= radius * radius {
            return velocities[i];
        }
    }
    let mut acc = Vec3::zero();
    for (p, f) in positions.iter().zip(forces) {
        acc += crate::geometry::single_sphere_field(*f, radius, x - *p);
    }
    acc
}
