//! Mobility/resistance operator contracts: single-sphere laws, symmetry,
//! Neumann-series oracle, round trips, spectrum estimates and the position
//! gradient bound.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sediment_core::geometry::{single_sphere_field, stokes_drag};
use sediment_core::mobility::{
    grad_inertialess_norm, inertialess_position_jacobian, inertialess_velocities,
    mean_field_velocity, mobility_apply, resistance_apply, resistance_spectrum,
};
use sediment_core::{Configuration, Vec3};

fn rand_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.gen::<f64>() - 0.5,
        rng.gen::<f64>() - 0.5,
        rng.gen::<f64>() - 0.5,
    )
    .normalized()
}

/// Cloud with d_min kept well above the contact distance.
fn dilute_cloud(n: usize, radius: f64, seed: u64) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<Vec3> = Vec::new();
    while pos.len() < n {
        let cand = Vec3::new(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        );
        if pos.iter().all(|p| (*p - cand).norm() > 16.0 * radius) {
            pos.push(cand);
        }
    }
    Configuration::new(pos, radius).unwrap()
}

fn l2(v: &[Vec3]) -> f64 {
    v.iter().map(|x| x.norm_sq()).sum::<f64>().sqrt()
}

#[test]
fn single_particle_mobility_is_stokes_drag() {
    let cfg = Configuration::new(vec![Vec3::zero()], 0.2).unwrap();
    let g = Vec3::new(0.1, -0.7, 0.3);
    let v = mobility_apply(&cfg, &[g]).unwrap();
    assert!((v[0] - g / stokes_drag(0.2)).norm() < 1e-16);
}

#[test]
fn mobility_rejects_overlap() {
    let cfg = Configuration::new(vec![Vec3::zero(), Vec3::new(0.3, 0.0, 0.0)], 0.2).unwrap();
    assert!(mobility_apply(&cfg, &[Vec3::zero(), Vec3::zero()]).is_err());
}

#[test]
fn mobility_is_symmetric() {
    let cfg = dilute_cloud(5, 1e-3, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let g: Vec<Vec3> = (0..5).map(|_| rand_unit(&mut rng)).collect();
        let w: Vec<Vec3> = (0..5).map(|_| rand_unit(&mut rng)).collect();
        let mg = mobility_apply(&cfg, &g).unwrap();
        let mw = mobility_apply(&cfg, &w).unwrap();
        let a: f64 = w.iter().zip(&mg).map(|(x, y)| x.dot(*y)).sum();
        let b: f64 = g.iter().zip(&mw).map(|(x, y)| x.dot(*y)).sum();
        assert!((a - b).abs() < 1e-12 * a.abs().max(b.abs()).max(1.0));
    }
}

#[test]
fn two_spheres_match_hand_superposition() {
    let radius = 0.05;
    let x1 = Vec3::zero();
    let x2 = Vec3::new(0.8, 0.0, 0.0);
    let cfg = Configuration::new(vec![x1, x2], radius).unwrap();
    let g = Vec3::new(0.0, 0.0, -1.0);
    let v = mobility_apply(&cfg, &[g, g]).unwrap();
    // each sphere: own drag response plus the other's single-sphere field
    let expect1 = g / stokes_drag(radius) + single_sphere_field(g, radius, x1 - x2);
    assert!((v[0] - expect1).norm() < 1e-14);
    assert!((v[1] - expect1).norm() < 1e-14, "symmetric pair");
}

#[test]
fn resistance_single_particle_one_iteration() {
    let cfg = Configuration::new(vec![Vec3::zero()], 0.3).unwrap();
    let w = Vec3::new(1.0, 2.0, -0.5);
    let (g, report) = resistance_apply(&cfg, &[w], 1e-12, 50).unwrap();
    assert!((g[0] - w * stokes_drag(0.3)).norm() < 1e-15);
    assert_eq!(report.iterations, 1);
    assert!(report.converged);
    assert_eq!(report.residual_l2, 0.0);
}

#[test]
fn widely_separated_pair_is_independent() {
    let radius = 1e-4;
    let cfg = Configuration::new(vec![Vec3::zero(), Vec3::new(1.0, 0.0, 0.0)], radius).unwrap();
    let w = vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 0.0)];
    let (g, report) = resistance_apply(&cfg, &w, 1e-12, 100).unwrap();
    assert!(report.converged);
    for (gi, wi) in g.iter().zip(&w) {
        let free = *wi * stokes_drag(radius);
        assert!((*gi - free).norm() / free.norm() < 1e-3);
    }
}

#[test]
fn pair_truncation_vs_converged_neumann_series() {
    let radius = 0.05;
    let d = 10.0 * radius;
    let cfg = Configuration::new(vec![Vec3::zero(), Vec3::new(d, 0.0, 0.0)], radius).unwrap();
    let w = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
    let (oracle, rep) = resistance_apply(&cfg, &w, 1e-15, 200).unwrap();
    assert!(rep.converged);
    // k = 5 truncation: contraction ~ (3R/2d)^k leaves a ~1e-5 tail here
    let (g5, _) = resistance_apply(&cfg, &w, 0.0, 5).unwrap();
    let diff = g5
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (*a - *b).norm_sq())
        .sum::<f64>()
        .sqrt()
        / l2(&oracle);
    assert!(diff < 1e-4, "truncation error {diff}");
    assert!(diff > 1e-9, "five reflections should not be converged yet");
    // converged iterate satisfies the mobility round trip to solver precision
    let rt = mobility_apply(&cfg, &oracle).unwrap();
    let err = rt
        .iter()
        .zip(&w)
        .map(|(a, b)| (*a - *b).norm_sq())
        .sum::<f64>()
        .sqrt()
        / l2(&w);
    assert!(err < 1e-12);
}

#[test]
fn resistance_residual_decreases_monotonically() {
    let cfg = dilute_cloud(24, 2e-3, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let w: Vec<Vec3> = (0..24).map(|_| rand_unit(&mut rng)).collect();
    let mut residuals = Vec::new();
    for k in 1..10 {
        let (g, _) = resistance_apply(&cfg, &w, 0.0, k).unwrap();
        let rt = mobility_apply(&cfg, &g).unwrap();
        let r = rt
            .iter()
            .zip(&w)
            .map(|(a, b)| (*a - *b).norm_sq())
            .sum::<f64>()
            .sqrt();
        residuals.push(r);
    }
    for pair in residuals.windows(2) {
        assert!(pair[1] < pair[0], "residuals not monotone: {residuals:?}");
    }
}

#[test]
fn round_trip_and_positivity_on_random_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..10 {
        let n = 4 + (case % 5) * 8;
        let cfg = dilute_cloud(n, 5e-4, 100 + case as u64);
        let w: Vec<Vec3> = (0..n).map(|_| rand_unit(&mut rng)).collect();
        let (g, report) = resistance_apply(&cfg, &w, 1e-10, 200).unwrap();
        assert!(report.converged);
        let rt = mobility_apply(&cfg, &g).unwrap();
        let err = rt
            .iter()
            .zip(&w)
            .map(|(a, b)| (*a - *b).norm_sq())
            .sum::<f64>()
            .sqrt()
            / l2(&w);
        assert!(err < 1e-8, "round trip {err}");
        let quad: f64 = w.iter().zip(&g).map(|(a, b)| a.dot(*b)).sum();
        assert!(quad > 0.0, "⟨W, RW⟩ = {quad}");
    }
}

#[test]
fn inertialess_single_particle_law() {
    let radius = 0.2;
    let cfg = Configuration::new(vec![Vec3::zero()], radius).unwrap();
    let g = Vec3::new(0.0, 0.0, -1.0);
    let (v, report) = inertialess_velocities(&cfg, g, 1e-10, 100).unwrap();
    // gamma = N R; for N = 1 the settling speed is 1/(6π γ)
    let gamma = 1.0 * radius;
    assert!((v[0] - g / stokes_drag(gamma / radius * radius)).norm() < 1e-15);
    assert!((v[0].z + 1.0 / (6.0 * std::f64::consts::PI * gamma)).abs() < 1e-15);
    assert!(report.converged && report.residual_l2 < 1e-10);
}

#[test]
fn side_by_side_pair_settles_cooperatively() {
    let radius = 0.01;
    let n = 2.0;
    let cfg = Configuration::new(vec![Vec3::zero(), Vec3::new(0.5, 0.0, 0.0)], radius).unwrap();
    let g = Vec3::new(0.0, 0.0, -1.0);
    let (v, _) = inertialess_velocities(&cfg, g, 1e-10, 100).unwrap();
    let gamma = n * radius;
    let single_speed = 1.0 / (6.0 * std::f64::consts::PI * gamma);
    for vi in &v {
        assert!(vi.norm() > single_speed, "{} ≤ {single_speed}", vi.norm());
    }
}

#[test]
fn inertialess_residual_contract_on_random_cloud() {
    let cfg = dilute_cloud(64, 5e-4, 33);
    let (_, report) = inertialess_velocities(&cfg, Vec3::new(0.0, 0.0, -1.0), 1e-9, 200).unwrap();
    assert!(report.converged);
    assert!(report.residual_l2 <= 1e-9 * 10.0, "residual {}", report.residual_l2);
}

#[test]
fn spectrum_single_particle_is_stokes_drag() {
    let cfg = Configuration::new(vec![Vec3::zero()], 0.15).unwrap();
    let est = resistance_spectrum(&cfg).unwrap();
    let drag = stokes_drag(0.15);
    assert!((est.c_r_est - drag).abs() / drag < 1e-3);
    assert!((est.big_c_r_est - drag).abs() / drag < 1e-3);
}

#[test]
fn spectrum_ordering_and_rayleigh_consistency() {
    let cfg = dilute_cloud(32, 1e-3, 55);
    let est = resistance_spectrum(&cfg).unwrap();
    assert!(est.c_r_est <= est.big_c_r_est);
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    for _ in 0..20 {
        let w: Vec<Vec3> = (0..32).map(|_| rand_unit(&mut rng)).collect();
        let (g, _) = resistance_apply(&cfg, &w, 1e-12, 300).unwrap();
        let quad: f64 = w.iter().zip(&g).map(|(a, b)| a.dot(*b)).sum();
        let norm2: f64 = w.iter().map(|x| x.norm_sq()).sum();
        assert!(quad >= est.c_r_est * norm2 * (1.0 - 1e-2));
        assert!(quad <= est.big_c_r_est * norm2 * (1.0 + 1e-2));
    }
}

#[test]
fn gradient_norm_translation_invariance_and_single_particle() {
    let cfg1 = Configuration::new(vec![Vec3::zero()], 0.1).unwrap();
    let g = Vec3::new(0.0, 0.0, -1.0);
    let bound1 = grad_inertialess_norm(&cfg1, g, 1e-4).unwrap();
    assert!(bound1 <= 1e-6, "single particle bound {bound1}");

    let cfg = dilute_cloud(8, 1e-3, 77);
    let h = 1e-5;
    let b = grad_inertialess_norm(&cfg, g, h).unwrap();
    let shifted = Configuration::new(
        cfg.positions.iter().map(|p| *p + Vec3::new(5.0, -3.0, 2.0)).collect(),
        cfg.radius,
    )
    .unwrap();
    let b2 = grad_inertialess_norm(&shifted, g, h).unwrap();
    assert!((b - b2).abs() < 1e-8 * b.max(1.0), "{b} vs {b2}");
}

#[test]
fn gradient_blocks_antisymmetric_for_pair() {
    let cfg = Configuration::new(vec![Vec3::zero(), Vec3::new(0.4, 0.1, -0.2)], 1e-3).unwrap();
    let g = Vec3::new(0.0, 0.0, -1.0);
    let blocks = inertialess_position_jacobian(&cfg, g, 1e-6).unwrap();
    // translation invariance: ∂_{Y1} Ṽ1 = −∂_{Y2} Ṽ1
    let sum = blocks[0][0].add(&blocks[0][1]);
    assert!(
        sum.frobenius() < 1e-4 * blocks[0][1].frobenius().max(1e-30),
        "blocks not antisymmetric: {}",
        sum.frobenius()
    );
}

#[test]
fn mean_field_velocity_definitions() {
    let cfg1 = Configuration::new(vec![Vec3::zero()], 0.1).unwrap();
    assert_eq!(
        mean_field_velocity(&cfg1, &[Vec3::new(1.0, 0.0, 0.0)], 0),
        Vec3::zero()
    );

    let cfg = dilute_cloud(6, 1e-3, 91);
    let mut rng = ChaCha8Rng::seed_from_u64(92);
    let f: Vec<Vec3> = (0..6).map(|_| rand_unit(&mut rng)).collect();
    let v = mobility_apply(&cfg, &f).unwrap();
    for i in 0..6 {
        let mf = mean_field_velocity(&cfg, &f, i);
        let expect = v[i] - f[i] / stokes_drag(cfg.radius);
        assert!((mf - expect).norm() < 1e-12 * expect.norm().max(1e-30));
    }

    // pair along the line of centers: magnitude F/(4πd) to leading order
    let d = 2.0;
    let radius = 1e-4;
    let pair = Configuration::new(vec![Vec3::zero(), Vec3::new(d, 0.0, 0.0)], radius).unwrap();
    let force = Vec3::new(1.0, 0.0, 0.0);
    let mf = mean_field_velocity(&pair, &[Vec3::zero(), force], 0);
    let expect = force.norm() / (8.0 * std::f64::consts::PI * d) * 2.0;
    assert!((mf.norm() - expect).abs() / expect < 1e-6);
}
