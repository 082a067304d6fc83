//! Exact optimal-transport distances between discrete measures, the coupled
//! trajectory functional η̄, and closed-form evaluators for the singular-sum
//! and initial-condition bounds.
//!
//! Exact solvers only: optimal assignment for equal-size uniform measures,
//! successive-shortest-path min-cost flow for the general Kantorovich LP,
//! and threshold/matching search for the bottleneck distance. No entropic
//! approximation is involved anywhere.

mod assignment;
mod bottleneck;
mod flow;

use crate::geometry::Vec3;
use thiserror::Error;

/// Default size cap for the general (weighted) Kantorovich solve.
pub const DEFAULT_LP_LIMIT: usize = 512;
/// Size cap for the equal-size assignment path.
pub const ASSIGNMENT_LIMIT: usize = 4096;

#[derive(Debug, Error)]
pub enum OtError {
    #[error("sizes {0} and {1} differ; use the weighted Kantorovich variant")]
    SizeMismatch(usize, usize),
    #[error("weights are not uniform (index {0}); use the weighted Kantorovich variant")]
    NotUniform(usize),
    #[error("instance {m}x{n} exceeds the configured LP limit {limit}; use the equal-size path or subsample")]
    AboveLimit { m: usize, n: usize, limit: usize },
    #[error("instance size {n} exceeds the assignment limit {limit}")]
    AboveAssignmentLimit { n: usize, limit: usize },
    #[error("weights must be nonnegative and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("empty measure")]
    Empty,
    #[error("order p must satisfy p ≥ 1, got {0}")]
    BadOrder(f64),
    #[error("p = ∞ is not supported by the weighted variant")]
    InfiniteOrderWeighted,
    #[error("parameter domain violated: {0}")]
    BadParameters(String),
    #[error("trajectories disagree on the time grid: {0} vs {1} samples")]
    GridMismatch(usize, usize),
}

/// Transport order: finite p or the bottleneck case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OtOrder {
    Finite(f64),
    Infinity,
}

/// A finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec3>, weights: Vec<f64>) -> Result<Self, OtError> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(OtError::Empty);
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > 1e-10 {
            return Err(OtError::BadWeights(sum));
        }
        Ok(DiscreteMeasure { points, weights })
    }

    /// Uniform measure on the given points.
    pub fn uniform(points: Vec<Vec3>) -> Result<Self, OtError> {
        if points.is_empty() {
            return Err(OtError::Empty);
        }
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        Ok(DiscreteMeasure { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn nonuniform_index(&self) -> Option<usize> {
        let w = 1.0 / self.len() as f64;
        self.weights
            .iter()
            .position(|x| (x - w).abs() > 1e-12 * w.max(1.0))
    }
}

/// An optimal coupling between two discrete measures.
#[derive(Debug, Clone)]
pub struct Matching {
    /// Sparse plan entries (i, j, mass).
    pub pairs: Vec<(usize, usize, f64)>,
    /// The transport distance W_p.
    pub cost: f64,
    pub order: OtOrder,
}

impl Matching {
    /// Worst marginal defect of the plan against the two measures.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut a = vec![0.0; mu.len()];
        let mut b = vec![0.0; nu.len()];
        for &(i, j, f) in &self.pairs {
            a[i] += f;
            b[j] += f;
        }
        let ea = a
            .iter()
            .zip(&mu.weights)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        let eb = b
            .iter()
            .zip(&nu.weights)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        ea.max(eb)
    }

    /// Recompute the distance from the stored plan (self-consistency).
    pub fn cost_from_plan(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        match self.order {
            OtOrder::Finite(p) => {
                let s: f64 = self
                    .pairs
                    .iter()
                    .map(|&(i, j, f)| f * (mu.points[i] - nu.points[j]).norm().powf(p))
                    .sum();
                s.powf(1.0 / p)
            }
            OtOrder::Infinity => self
                .pairs
                .iter()
                .map(|&(i, j, _)| (mu.points[i] - nu.points[j]).norm())
                .fold(0.0f64, f64::max),
        }
    }

    /// CSV rows (i, j, mass, displacement) for external inspection.
    pub fn to_csv(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> String {
        let mut out = String::from("i,j,mass,displacement\n");
        for &(i, j, f) in &self.pairs {
            let d = (mu.points[i] - nu.points[j]).norm();
            out.push_str(&format!("{i},{j},{f},{d}\n"));
        }
        out
    }
}

/// Exact W_p between equal-size uniform measures via optimal assignment;
/// p = ∞ delegates to the bottleneck solver.
pub fn wasserstein_p_equal(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    order: OtOrder,
) -> Result<(f64, Matching), OtError> {
    if mu.len() != nu.len() {
        return Err(OtError::SizeMismatch(mu.len(), nu.len()));
    }
    if let Some(i) = mu.nonuniform_index().or_else(|| nu.nonuniform_index()) {
        return Err(OtError::NotUniform(i));
    }
    let n = mu.len();
    if n > ASSIGNMENT_LIMIT {
        return Err(OtError::AboveAssignmentLimit { n, limit: ASSIGNMENT_LIMIT });
    }
    let mass = 1.0 / n as f64;
    match order {
        OtOrder::Infinity => {
            let (dist, col_of_row) = bottleneck::bottleneck_match(&mu.points, &nu.points);
            let pairs = col_of_row
                .iter()
                .enumerate()
                .map(|(i, &j)| (i, j, mass))
                .collect();
            Ok((dist, Matching { pairs, cost: dist, order }))
        }
        OtOrder::Finite(p) => {
            if p < 1.0 {
                return Err(OtError::BadOrder(p));
            }
            let xs = &mu.points;
            let ys = &nu.points;
            let cost_fn = |i: usize, j: usize| pair_cost(xs[i], ys[j], p);
            let (col_of_row, total) = assignment::solve_dense(n, cost_fn);
            let dist = (total / n as f64).powf(1.0 / p);
            let pairs = col_of_row
                .iter()
                .enumerate()
                .map(|(i, &j)| (i, j, mass))
                .collect();
            Ok((dist, Matching { pairs, cost: dist, order }))
        }
    }
}

#[inline]
fn pair_cost(x: Vec3, y: Vec3, p: f64) -> f64 {
    let d2 = (x - y).norm_sq();
    if p == 2.0 {
        d2
    } else if p == 1.0 {
        d2.sqrt()
    } else {
        d2.sqrt().powf(p)
    }
}

/// Exact W_p between arbitrary weighted measures (Kantorovich LP) with the
/// default size cap.
pub fn wasserstein_p_weighted(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<(f64, Matching), OtError> {
    wasserstein_p_weighted_with_limit(mu, nu, p, DEFAULT_LP_LIMIT)
}

/// Exact W_p between arbitrary weighted measures with an explicit size cap.
pub fn wasserstein_p_weighted_with_limit(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    limit: usize,
) -> Result<(f64, Matching), OtError> {
    if !p.is_finite() {
        return Err(OtError::InfiniteOrderWeighted);
    }
    if p < 1.0 {
        return Err(OtError::BadOrder(p));
    }
    if mu.len() > limit || nu.len() > limit {
        return Err(OtError::AboveLimit { m: mu.len(), n: nu.len(), limit });
    }
    let xs = &mu.points;
    let ys = &nu.points;
    let cost_fn = |i: usize, j: usize| pair_cost(xs[i], ys[j], p);
    let (pairs, total) = flow::transport(&mu.weights, &nu.weights, cost_fn);
    let dist = total.powf(1.0 / p);
    Ok((dist, Matching { pairs, cost: dist, order: OtOrder::Finite(p) }))
}

/// Bottleneck distance between equal-size uniform measures.
pub fn bottleneck_infty(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<(f64, Matching), OtError> {
    wasserstein_p_equal(mu, nu, OtOrder::Infinity)
}

/// Coupled trajectory functional: the t = 0 pairing is pushed along both
/// flows and η̄(t_k) = sup_{s ≤ t_k} (Σ mass |X_i(s) − y_j(s)|^p)^{1/p} is
/// returned for every recorded time. Trajectories are snapshot lists on a
/// shared grid.
pub fn coupled_eta(
    pairing: &Matching,
    micro: &[Vec<Vec3>],
    reference: &[Vec<Vec3>],
    order: OtOrder,
) -> Result<Vec<f64>, OtError> {
    if micro.len() != reference.len() {
        return Err(OtError::GridMismatch(micro.len(), reference.len()));
    }
    let mut out = Vec::with_capacity(micro.len());
    let mut running = 0.0f64;
    for (xs, ys) in micro.iter().zip(reference) {
        let snap = match order {
            OtOrder::Finite(p) => {
                let s: f64 = pairing
                    .pairs
                    .iter()
                    .map(|&(i, j, f)| f * (xs[i] - ys[j]).norm().powf(p))
                    .sum();
                s.powf(1.0 / p)
            }
            OtOrder::Infinity => pairing
                .pairs
                .iter()
                .map(|&(i, j, _)| (xs[i] - ys[j]).norm())
                .fold(0.0f64, f64::max),
        };
        running = running.max(snap);
        out.push(running);
    }
    Ok(out)
}

fn dual_exponent(q: f64) -> f64 {
    if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// Right-hand side of the singular-sum transport bound with unit constants:
/// an upper envelope for S_β/N in terms of ‖σ‖_q, W_p(σ_N, σ), N and d_min.
#[allow(clippy::too_many_arguments)]
pub fn sums_wasserstein_rhs(
    n: usize,
    d_min: f64,
    sigma_q_norm: f64,
    q: f64,
    p: f64,
    beta: f64,
    w_p: f64,
    dim: u32,
) -> Result<f64, OtError> {
    let d = dim as f64;
    if !(beta > 0.0 && beta < d) {
        return Err(OtError::BadParameters(format!(
            "need β ∈ (0, d): β = {beta}, d = {d}"
        )));
    }
    if !(q > d / (d - beta)) {
        return Err(OtError::BadParameters(format!(
            "need q > d/(d−β) = {}: q = {q}",
            d / (d - beta)
        )));
    }
    if !(p >= 1.0) {
        return Err(OtError::BadParameters(format!("need p ≥ 1: p = {p}")));
    }
    if !(d_min > 0.0) || n < 2 {
        return Err(OtError::BadParameters(format!(
            "need d_min > 0 and N ≥ 2: d_min = {d_min}, N = {n}"
        )));
    }
    let qp = dual_exponent(q);
    let nf = n as f64;
    let discrete = nf.powf(beta / d) * d_min.powf(beta);
    let term1 = sigma_q_norm.powf(beta * qp / d);
    if p.is_infinite() {
        // single second term with exponent (d−β)/q'
        let term2 = sigma_q_norm.powf((d - beta) / d) / discrete * w_p.powf((d - beta) / qp);
        return Ok(term1 + term2);
    }
    let term2 = sigma_q_norm.powf((d - beta) / d * (p * qp) / (d + p * qp)) / discrete
        * w_p.powf((d - beta) * p / (d + p * qp));
    let e3 = (beta + p) * qp / (d - beta + beta * qp + p * qp);
    let term3 = (sigma_q_norm.powf((d - beta) / d) / discrete).powf(e3)
        * w_p.powf((d - beta) * p / (d - beta + beta * qp + p * qp));
    Ok(term1 + term2 + term3)
}

/// Initial-condition smallness functional for the first-order mean-field
/// theorem: η₀^{p(d−α−1)/(d+pq′)} (1 + d_min(0)^{−(α+1)} N^{−(α+1)/d});
/// for p = ∞ the exponent degenerates to (d−α−1)/q′.
pub fn hauray_condition(
    eta0: f64,
    dmin0: f64,
    n: usize,
    p: f64,
    q: f64,
    alpha: f64,
    dim: u32,
) -> Result<f64, OtError> {
    let d = dim as f64;
    if !(alpha < d - 1.0) {
        return Err(OtError::BadParameters(format!(
            "need α < d − 1: α = {alpha}, d = {d}"
        )));
    }
    if !(q > d / (d - alpha - 1.0)) {
        return Err(OtError::BadParameters(format!(
            "need q > d/(d−α−1) = {}: q = {q}",
            d / (d - alpha - 1.0)
        )));
    }
    if !(eta0 >= 0.0 && dmin0 > 0.0 && n >= 1) {
        return Err(OtError::BadParameters(format!(
            "need η₀ ≥ 0, d_min(0) > 0: η₀ = {eta0}, d_min(0) = {dmin0}"
        )));
    }
    let qp = dual_exponent(q);
    let exponent = if p.is_infinite() {
        (d - alpha - 1.0) / qp
    } else {
        if p < 1.0 {
            return Err(OtError::BadParameters(format!("need p ≥ 1: p = {p}")));
        }
        p * (d - alpha - 1.0) / (d + p * qp)
    };
    let nf = n as f64;
    Ok(eta0.powf(exponent) * (1.0 + dmin0.powf(-(alpha + 1.0)) * nf.powf(-(alpha + 1.0) / d)))
}
