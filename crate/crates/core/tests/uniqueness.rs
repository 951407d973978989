mod common;

use std::f64::consts::PI;

use common::{grid, psi_oracle, rel_err, solenoidal};
use fracmhd::random::{random_solenoidal, rng_from_seed};
use fracmhd::scheme::{preset_fields, Regime, SchemeConfig};
use fracmhd::spectral::gradient;
use fracmhd::uniqueness::*;
use fracmhd::{Grid, VectorField};

fn band_data(g: Grid, seed: u64) -> (VectorField, VectorField) {
    preset_fields(&"random-band(0,1,0.05)".parse().unwrap(), g, 1.0, seed).unwrap()
}

fn ge1(nu: f64) -> SchemeConfig {
    SchemeConfig::new(1.2, nu, 2, 16, 0.01, 30).with_dt(0.01 / 64.0)
}

fn lt1(nu: f64) -> SchemeConfig {
    SchemeConfig::new(0.6, nu, 2, 16, 0.01, 30)
        .with_dt(0.01 / 64.0)
        .with_sigma(1.5)
}

/// `∫ f·∇g·h` by direct quadrature on a grid fine enough to be exact.
fn advection_oracle(f: &VectorField, g: &VectorField, h: &VectorField) -> f64 {
    let fine = Grid::new(2, 2 * f.grid().n()).unwrap();
    let phys = |v: &fracmhd::SpectralField| v.resample(fine).unwrap().to_physical();
    let mut sum = 0.0;
    for a in 0..2 {
        let fa = phys(f.component(a));
        for c in 0..2 {
            let dg = phys(gradient(g.component(c)).component(a));
            let hc = phys(h.component(c));
            sum += fa
                .iter()
                .zip(&dg)
                .zip(&hc)
                .map(|((x, y), z)| x * y * z)
                .sum::<f64>();
        }
    }
    sum * fine.volume() / fine.len() as f64
}

#[test]
fn identical_data_has_zero_difference() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 1);
    let zero = VectorField::zeros(g);
    for cfg in [ge1(1.0), lt1(1.0)] {
        let pair = solve_pair(&cfg, &u0, &b0, &zero, &zero).unwrap();
        assert!(pair.energy().iter().all(|e| *e <= 1e-20));
        let q = q_decomposition(&pair, 0.005).unwrap();
        assert_eq!([q.q1, q.q2, q.q3, q.q4, q.q5], [0.0; 5]);
        let cert = gronwall_verify(&pair, &cfg).unwrap();
        assert!(cert.bound_satisfied);
        assert!(cert.final_energy() <= 1e-20);
    }
}

#[test]
fn difference_pair_matches_componentwise_differences() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 2);
    let du = mode_perturbation(g, &[1, 1], 1e-3).unwrap();
    let pair = solve_pair(&ge1(1.0), &u0, &b0, &du, &VectorField::zeros(g)).unwrap();
    for i in 0..pair.times().len() {
        let d = &pair.sol2.u.states()[i] - &pair.sol1.u.states()[i];
        assert!(common::max_vec_diff(&d, &pair.tilde_u.states()[i]) <= 1e-12);
        let d = &pair.sol2.b.states()[i] - &pair.sol1.b.states()[i];
        assert!(common::max_vec_diff(&d, &pair.tilde_b.states()[i]) <= 1e-12);
    }
    assert!(rel_err(pair.energy()[0], du.l2_norm().powi(2)) < 1e-12);
}

#[test]
fn magnetic_pairing_vanishes() {
    let g = grid(32);
    for seed in 0u64..6 {
        let f = |s: u64| random_solenoidal(g, 1.0, 15.0, 1.0, &mut rng_from_seed(10 * seed + s));
        let (u1, b1, b2, tu, tb) = (f(1), f(2), f(3), f(4), f(5));
        let q = q_terms(&u1, &b1, &b2, &tu, &tb).unwrap();
        assert!(q.q2_normalized <= 1e-11, "{}", q.q2_normalized);
        let oracle = [
            -advection_oracle(&tu, &u1, &tu),
            advection_oracle(&tb, &b1, &tu),
            -advection_oracle(&tu, &b1, &tb),
            advection_oracle(&tb, &u1, &tb),
        ];
        for (got, want) in [q.q1, q.q3, q.q4, q.q5].iter().zip(oracle) {
            assert!(
                (got - want).abs() < 1e-9 * (1.0 + want.abs()),
                "{got} vs {want}"
            );
        }
    }
}

#[test]
fn magnetic_terms_vanish_without_magnetic_field() {
    let g = grid(16);
    let (u0, _) = band_data(g, 3);
    let zero = VectorField::zeros(g);
    let du = mode_perturbation(g, &[1, 1], 1e-3).unwrap();
    let cfg = ge1(1.0);
    let pair = solve_pair(&cfg, &u0, &zero, &du, &zero).unwrap();
    for t in [0.0025, 0.005, 0.0075] {
        let q = q_decomposition(&pair, t).unwrap();
        assert_eq!([q.q2, q.q3, q.q4, q.q5], [0.0; 4]);
        assert!(q.q1 != 0.0);
        let bal = energy_balance(&pair, &cfg, t).unwrap();
        assert_eq!(bal.q_sum, q.q1);
    }
}

#[test]
fn energy_identity_closes_under_refinement() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 4);
    let du = mode_perturbation(g, &[1, 1], 1e-3).unwrap();
    let db = mode_perturbation(g, &[2, 1], 1e-3).unwrap();
    for base in [ge1(1.0), lt1(1.0)] {
        let gap = |steps: usize| {
            let cfg = base.clone().with_dt(0.01 / steps as f64);
            let pair = solve_pair(&cfg, &u0, &b0, &du, &db).unwrap();
            let bal = energy_balance(&pair, &cfg, 0.005).unwrap();
            (bal.lhs - bal.q_sum).abs() / bal.lhs.abs()
        };
        let (coarse, fine) = (gap(32), gap(64));
        assert!(fine < 0.6 * coarse || fine < 1e-6, "{coarse} -> {fine}");
        assert!(fine < 0.05, "{fine}");
    }
}

#[test]
fn perturbed_pair_obeys_gronwall() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 5);
    let du = mode_perturbation(g, &[1, 1], 1e-3).unwrap();
    let zero = VectorField::zeros(g);
    for cfg in [ge1(1.0), lt1(1.0)] {
        let pair = solve_pair(&cfg, &u0, &b0, &du, &zero).unwrap();
        let cert = gronwall_verify(&pair, &cfg).unwrap();
        assert!(cert.bound_satisfied);
        let last = cert.times.len() - 1;
        let e0 = cert.energy[0];
        assert!(cert.final_energy() <= (1.0 + cert.slack) * e0 * cert.growth_factor[last].exp());
        assert!(cert
            .integrability
            .iter()
            .all(|(_, v)| v.is_finite() && *v > 0.0));
        let mut buf = Vec::new();
        let q: Vec<QTerms> = cert
            .times
            .iter()
            .map(|t| q_decomposition(&pair, *t).unwrap())
            .collect();
        cert.write_csv(&mut buf, &q).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,energy,Q1,Q2,Q3,Q4,Q5,coefficient,bound_ok\n"));
        assert_eq!(text.lines().count(), cert.times.len() + 1);
    }
    assert!(gronwall_verify(
        &solve_pair(&ge1(1.0), &u0, &b0, &du, &zero).unwrap(),
        &lt1(1.0)
    )
    .is_err());
}

#[test]
fn more_viscosity_leaves_less_difference() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 6);
    let du = mode_perturbation(g, &[1, 1], 1e-3).unwrap();
    let zero = VectorField::zeros(g);
    for make in [ge1 as fn(f64) -> SchemeConfig, lt1] {
        let finals: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&nu| {
                let cfg = make(nu);
                let pair = solve_pair(&cfg, &u0, &b0, &du, &zero).unwrap();
                *pair.energy().last().unwrap()
            })
            .collect();
        assert!(
            finals[1] <= finals[0] && finals[2] <= finals[1],
            "{finals:?}"
        );
    }
}

#[test]
fn holder_coefficient_of_a_single_mode() {
    let g = grid(16);
    let a = 0.7;
    let u1 = mode_perturbation(g, &[0, 2], a).unwrap();
    let b1 = mode_perturbation(g, &[2, 0], 0.3).unwrap();
    let norm = |amp: f64| amp * PI * 2f64.sqrt();
    // Blocks 0 and 1 carry |k| = 2; every other block sees nothing.
    let weighted = |s: f64| -> f64 {
        (0..=1)
            .map(|j| (s * j as f64).exp2() * psi_oracle(2.0 / (j as f64).exp2()))
            .sum()
    };
    for (regime, alpha) in [(Regime::AlphaGE1, 1.2), (Regime::AlphaLT1, 0.6)] {
        let nu = 0.8;
        let h = holder_coefficient(regime, alpha, nu, &u1, &b1).unwrap();
        assert!(rel_err(h.grad_u_bound, norm(a) * weighted(2.0)) < 1e-12);
        assert!(rel_err(h.b_bound, norm(0.3) * weighted(2.0 - alpha)) < 1e-12);
        assert!(rel_err(h.value, 2.0 * h.grad_u_bound + 4.0 / nu * h.b_bound.powi(2)) < 1e-14);
        assert!(rel_err(h.grad_u_sup, 2.0 * a) < 1e-12);
        assert!(h.grad_u_bound >= h.grad_u_sup);
    }
    let zero = VectorField::zeros(g);
    let h = holder_coefficient(Regime::AlphaGE1, 1.2, 1.0, &zero, &zero).unwrap();
    assert_eq!(h.value, 0.0);
}

#[test]
fn bernstein_surrogate_dominates_grid_sup() {
    let g = grid(32);
    for seed in 0..8 {
        let u = solenoidal(g, 15.0, seed);
        for (regime, alpha) in [(Regime::AlphaGE1, 1.2), (Regime::AlphaLT1, 0.6)] {
            let h = holder_coefficient(regime, alpha, 1.0, &u, &u).unwrap();
            assert!(h.grad_u_bound >= h.grad_u_sup, "seed={seed}");
        }
    }
}

#[test]
fn holder_exponents() {
    assert!((holder_exponent(Regime::AlphaGE1, 1.2, 2).unwrap() - 2.5).abs() < 1e-12);
    assert!((holder_exponent(Regime::AlphaLT1, 0.5, 2).unwrap() - 4.0).abs() < 1e-12);
    let msg = holder_exponent(Regime::AlphaLT1, 1.0, 2)
        .unwrap_err()
        .to_string();
    assert!(msg.contains("1/p = 1/2 - alpha/d"), "{msg}");
    let g = grid(16);
    let u = solenoidal(g, 7.0, 1);
    assert!(holder_coefficient(Regime::AlphaLT1, 1.5, 1.0, &u, &u).is_err());
    assert!(holder_coefficient(Regime::AlphaGE1, 1.2, 0.0, &u, &u).is_err());
}
