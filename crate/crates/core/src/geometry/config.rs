//! Particle configurations and their distance statistics.
//!
//! Conventions: d_min = min_{i≠j} |X_i − X_j| (+∞ for a single particle),
//! d_ij = |X_i − X_j| for i ≠ j and d_ii = d_min. The singular sums
//! S_β = max_i Σ_{j≠i} d_ij^{−β} control every interaction estimate; the
//! full-sum variant including j = i never exceeds 2 S_β for N ≥ 2.

use super::vec::Vec3;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("configuration must contain at least one particle")]
    Empty,
    #[error("sphere radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("non-finite particle position at index {0}")]
    NonFinite(usize),
    #[error("overlapping spheres: d_min = {d_min} with contact distance {contact}")]
    Overlap { d_min: f64, contact: f64 },
}

/// Positions of N identical spheres of common radius R.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub positions: Vec<Vec3>,
    pub radius: f64,
}

impl Configuration {
    pub fn new(positions: Vec<Vec3>, radius: f64) -> Result<Self, ConfigError> {
        if positions.is_empty() {
            return Err(ConfigError::Empty);
        }
        if !(radius > 0.0) {
            return Err(ConfigError::BadRadius(radius));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(ConfigError::NonFinite(i));
        }
        Ok(Configuration { positions, radius })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Minimal pairwise distance; +∞ sentinel for N = 1 so that S_β = 0 and
    /// single-particle paths need no special casing.
    pub fn d_min(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return f64::INFINITY;
        }
        let pos = &self.positions;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = f64::INFINITY;
                for j in 0..n {
                    if j != i {
                        let d = (pos[i] - pos[j]).norm();
                        if d < best {
                            best = d;
                        }
                    }
                }
                best
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Closest pair (i, j, distance); `None` for N = 1.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let n = self.n();
        if n < 2 {
            return None;
        }
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (self.positions[i] - self.positions[j]).norm();
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        Some(best)
    }

    /// No-touch condition d_min > 2R.
    pub fn is_admissible(&self) -> bool {
        self.d_min() > 2.0 * self.radius
    }

    pub fn ensure_admissible(&self) -> Result<(), ConfigError> {
        let d_min = self.d_min();
        let contact = 2.0 * self.radius;
        if d_min > contact {
            Ok(())
        } else {
            Err(ConfigError::Overlap { d_min, contact })
        }
    }

    /// Distance statistics with the paper convention d_ii = d_min.
    pub fn pairwise_stats(&self) -> PairwiseStats<'_> {
        PairwiseStats { cfg: self, d_min: self.d_min() }
    }

    /// Singular sum S_β = max_i Σ_{j≠i} d_ij^{−β}. Zero for N = 1.
    pub fn singular_sum(&self, beta: f64) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let pos = &self.positions;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    if j != i {
                        acc += (pos[i] - pos[j]).norm().powf(-beta);
                    }
                }
                acc
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Full-sum variant max_i Σ_j d_ij^{−β} including j = i with d_ii = d_min.
    pub fn singular_sum_full(&self, beta: f64) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let d_min = self.d_min();
        let pos = &self.positions;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = d_min.powf(-beta);
                for j in 0..n {
                    if j != i {
                        acc += (pos[i] - pos[j]).norm().powf(-beta);
                    }
                }
                acc
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Accessor for d_ij with the d_ii = d_min convention.
pub struct PairwiseStats<'a> {
    cfg: &'a Configuration,
    d_min: f64,
}

impl PairwiseStats<'_> {
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.d_min
        } else {
            (self.cfg.positions[i] - self.cfg.positions[j]).norm()
        }
    }
}
