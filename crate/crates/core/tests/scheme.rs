mod common;

use common::{chi_oracle, grid, max_vec_diff, rel_err, solenoidal, wave_vectors};
use fracmhd::littlewood_paley::{DyadicPartition, Flavor};
use fracmhd::norms::{besov_norm, NormSpec};
use fracmhd::random::{random_solenoidal, rng_from_seed};
use fracmhd::scheme::*;
use fracmhd::{Error, Grid, SpectralField, VectorField};

fn ge1(n: usize, horizon: f64) -> SchemeConfig {
    SchemeConfig::new(1.2, 1.0, 2, n, horizon, 3)
}

fn lt1(n: usize, horizon: f64) -> SchemeConfig {
    SchemeConfig::new(0.6, 1.0, 2, n, horizon, 3).with_sigma(1.5)
}

fn shear(g: Grid, k: i64, phase: f64) -> VectorField {
    let c = SpectralField::from_fn(g, |x| (k as f64 * x[1] + phase).sin());
    VectorField::new(vec![c, SpectralField::zeros(g)]).unwrap()
}

fn constant_vector(g: Grid, a: f64, b: f64) -> VectorField {
    VectorField::new(vec![
        SpectralField::from_fn(g, |_| a),
        SpectralField::from_fn(g, |_| b),
    ])
    .unwrap()
}

fn band_data(g: Grid, seed: u64) -> (VectorField, VectorField) {
    preset_fields(&"random-band(0,1,0.05)".parse().unwrap(), g, 1.0, seed).unwrap()
}

fn quiet() -> RunOptions {
    RunOptions {
        monitor: false,
        ..RunOptions::default()
    }
}

#[test]
fn config_limits_are_named() {
    let msg = SchemeConfig::new(1.75, 1.0, 3, 8, 0.1, 1)
        .validate()
        .unwrap_err()
        .to_string();
    assert!(msg.contains("alpha < 1 + d/4 = 1.75"), "{msg}");
    let c = SchemeConfig::new(0.5, 1.0, 3, 8, 0.1, 1).with_sigma(2.0);
    let msg = c.validate().unwrap_err().to_string();
    assert!(msg.contains("sigma > 1 + d/2 - alpha = 2"), "{msg}");
    assert!(c.with_sigma(2.01).validate().is_ok());
    let msg = SchemeConfig::new(0.5, 1.0, 2, 16, 0.1, 1)
        .validate()
        .unwrap_err()
        .to_string();
    assert!(msg.contains("no sigma"), "{msg}");
    assert!(SchemeConfig::new(1.2, 0.0, 2, 16, 0.1, 1)
        .validate()
        .is_err());
    assert!(SchemeConfig::new(1.2, 1.0, 4, 16, 0.1, 1)
        .validate()
        .is_err());
    assert!(ge1(16, 0.1).with_dt(0.2).validate().is_err());
    assert!(SchemeConfig::new(1.2, 1.0, 2, 16, 0.1, 0)
        .validate()
        .is_err());
}

#[test]
fn truncation_is_identity_past_the_last_block() {
    let g = grid(16);
    let (u, b) = (solenoidal(g, 7.0, 1), solenoidal(g, 7.0, 2));
    for flavor in [Flavor::Homogeneous, Flavor::Inhomogeneous] {
        let (su, sb) = truncate_initial(&u, &b, 10, flavor);
        assert!(max_vec_diff(&su, &u) < 1e-15);
        assert!(max_vec_diff(&sb, &b) < 1e-15);
    }
}

#[test]
fn truncation_removes_high_modes() {
    let g = grid(32);
    let u = shear(g, 8, 0.0);
    for flavor in [Flavor::Homogeneous, Flavor::Inhomogeneous] {
        let (su, sb) = truncate_initial(&u, &u, 0, flavor);
        assert!(su.max_abs_coeff() < 1e-15 && sb.max_abs_coeff() < 1e-15);
    }
}

#[test]
fn truncation_idempotent_outside_the_transition_shell() {
    let g = grid(32);
    let u = solenoidal(g, 15.0, 3);
    let n = 2;
    let scale = ((n + 1) as f64).exp2();
    let (once, _) = truncate_initial(&u, &u, n, Flavor::Inhomogeneous);
    let (twice, _) = truncate_initial(&once, &once, n, Flavor::Inhomogeneous);
    let ks = wave_vectors(g);
    for a in 0..2 {
        let (f, s1, s2) = (u.component(a), once.component(a), twice.component(a));
        for (i, k) in ks.iter().enumerate() {
            let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt() / scale;
            let (c, c1, c2) = (f.coeffs()[i], s1.coeffs()[i], s2.coeffs()[i]);
            assert!((c1 - c * chi_oracle(r)).norm() < 1e-14);
            let gap = (c2 - c1).norm();
            if r <= 0.75 || r >= 4.0 / 3.0 {
                assert!(gap < 1e-15, "k={k:?}");
            } else {
                assert!(gap <= 0.25 * c.norm() + 1e-15, "k={k:?}");
            }
        }
    }
}

#[test]
fn heat_substep_matches_closed_form() {
    let g = grid(16);
    let (alpha, nu, h) = (1.2, 0.5, 0.01);
    let u = shear(g, 2, 0.3);
    let zero = VectorField::zeros(g);
    let cfg = SchemeConfig::new(alpha, nu, 2, 16, 1.0, 1);
    let next = velocity_substep(&u, &zero, &cfg, h);
    let factor = (-nu * 2f64.powf(2.0 * alpha) * h).exp();
    assert!(max_vec_diff(&next, &(&u * factor)) < 1e-15);
}

#[test]
fn exponential_euler_exact_for_constant_forcing() {
    let g = grid(16);
    let u0 = &shear(g, 2, 0.0) + &constant_vector(g, 0.5, -0.25);
    let forcing = &shear(g, 3, 1.0) + &constant_vector(g, 1.0, 0.0);
    let (nu, h, steps) = (0.7, 0.02, 10);
    for alpha in [0.5, 1.0, 1.3] {
        let prop = Propagator::new(g, alpha, nu, h);
        let mut u = u0.clone();
        for _ in 0..steps {
            u = prop.advance(&u, &forcing);
        }
        let t = h * steps as f64;
        let ks = wave_vectors(g);
        for a in 0..2 {
            for (i, k) in ks.iter().enumerate() {
                let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                let lam = nu * r.powf(2.0 * alpha);
                let c0 = u0.component(a).coeffs()[i];
                let fc = forcing.component(a).coeffs()[i];
                let expect = if lam == 0.0 {
                    c0 + fc * t
                } else {
                    c0 * (-lam * t).exp() + fc * ((1.0 - (-lam * t).exp()) / lam)
                };
                let got = u.component(a).coeffs()[i];
                assert!((got - expect).norm() < 1e-13, "alpha={alpha} k={k:?}");
            }
        }
    }
}

fn assert_heat_evolution(cfg: &SchemeConfig, u0: &VectorField, b0: &VectorField) {
    let g = u0.grid();
    let zero = VectorField::zeros(g);
    let prev = IterateState::constant(zero.clone(), zero, cfg, 3).unwrap();
    let next = picard_step(&prev, u0, b0, cfg).unwrap();
    assert_eq!(next.n, 4);
    let (su, sb) = truncate_initial(u0, b0, 3, cfg.flavor());
    let ks = wave_vectors(g);
    for (t, (u, b)) in next
        .times()
        .iter()
        .zip(next.u.states().iter().zip(next.b.states()))
    {
        assert!(max_vec_diff(b, &sb) < 1e-15);
        for a in 0..2 {
            for (i, k) in ks.iter().enumerate() {
                let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                let expect =
                    su.component(a).coeffs()[i] * (-cfg.nu * r.powf(2.0 * cfg.alpha) * t).exp();
                assert!((u.component(a).coeffs()[i] - expect).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn zero_previous_iterate_gives_heat_flow() {
    let g = grid(16);
    let (u0, b0) = (solenoidal(g, 7.0, 4), solenoidal(g, 7.0, 5));
    assert_heat_evolution(&ge1(16, 0.05), &u0, &b0);
    assert_heat_evolution(&lt1(16, 0.05), &u0, &b0);
}

#[test]
fn zero_magnetic_data_stays_zero() {
    let g = grid(16);
    let u0 = solenoidal(g, 7.0, 6);
    let b0 = VectorField::zeros(g);
    for cfg in [ge1(16, 0.05), lt1(16, 0.05)] {
        let run = run_picard(&cfg, &u0, &b0, &quiet()).unwrap();
        assert!(run.last.b.states().iter().all(VectorField::is_zero));
        assert!(!run.last.u.last().is_zero());
    }
}

#[test]
fn means_are_conserved_in_the_coupled_scheme() {
    let g = grid(16);
    let u0 = &solenoidal(g, 7.0, 7) + &constant_vector(g, 0.2, -0.1);
    let b0 = &solenoidal(g, 7.0, 8) + &constant_vector(g, -0.3, 0.05);
    let cfg = lt1(16, 0.05);
    let prev = initial_iterate(&u0, &b0, &cfg).unwrap();
    let mut state = picard_step(&prev, &u0, &b0, &cfg).unwrap();
    state = picard_step(&state, &u0, &b0, &cfg).unwrap();
    for (u, b) in state.u.states().iter().zip(state.b.states()) {
        for a in 0..2 {
            assert!((u.component(a).mean() - u0.component(a).mean()).norm() < 1e-13);
            assert!((b.component(a).mean() - b0.component(a).mean()).norm() < 1e-13);
        }
    }
}

#[test]
fn coupled_transport_conserves_energy_as_dt_shrinks() {
    let g = grid(16);
    let w = random_solenoidal(g, 1.0, 5.0, 1.0, &mut rng_from_seed(9));
    let (u0, b0) = (solenoidal(g, 7.0, 10), solenoidal(g, 7.0, 11));
    // Largest one-step relative change of ‖b‖ and the accumulated change.
    let drift = |steps: usize| {
        let cfg = lt1(16, 0.5).with_dt(0.5 / steps as f64);
        let prev = IterateState::constant(w.clone(), VectorField::zeros(g), &cfg, 2).unwrap();
        let next = picard_step(&prev, &u0, &b0, &cfg).unwrap();
        let e: Vec<f64> = next.b.states().iter().map(VectorField::l2_norm).collect();
        let step = e
            .windows(2)
            .map(|p| (p[1] - p[0]).abs())
            .fold(0.0, f64::max)
            / e[0];
        (step, (e[steps] - e[0]).abs() / e[0])
    };
    let (coarse, fine) = (drift(64), drift(128));
    assert!(fine.0 < 0.3 * coarse.0, "{coarse:?} -> {fine:?}");
    assert!(fine.1 < 0.6 * coarse.1, "{coarse:?} -> {fine:?}");
    assert!(fine.1 < 5e-3);
}

#[test]
fn iterates_stay_solenoidal() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 12);
    for cfg in [ge1(16, 0.05), lt1(16, 0.05)] {
        let run = run_picard(&cfg, &u0, &b0, &quiet()).unwrap();
        for r in &run.records {
            assert!(r.max_divergence <= 1e-10, "{}", r.max_divergence);
        }
    }
}

#[test]
fn coupled_scheme_cancellation_and_coupling_vanish() {
    let g = grid(32);
    let cfg = lt1(32, 0.1);
    let f = |s| random_solenoidal(g, 1.0, 15.0, 1.0, &mut rng_from_seed(s));
    let (u, b, nu, nb) = (f(1), f(2), f(3), f(4));
    let lv = Levels {
        u: &u,
        b: &b,
        next_u: &nu,
        next_b: &nb,
    };
    let part = DyadicPartition::for_grid(g);
    for j in part.range(Flavor::Inhomogeneous) {
        let r = term_report_at(&lv, &cfg, j).unwrap();
        assert!(r.cancellation.unwrap() <= 1e-9, "j={j}");
        assert!(r.coupling_residual.unwrap() <= 1e-9, "j={j}");
        assert_eq!(r.terms.len(), 11);
        assert!(r.terms.iter().all(|t| t.1 >= 0.0));
    }
}

#[test]
fn term_reports_vanish_with_zero_previous_level() {
    let g = grid(16);
    let zero = VectorField::zeros(g);
    let (nu, nb) = (solenoidal(g, 7.0, 13), solenoidal(g, 7.0, 14));
    let lv = Levels {
        u: &zero,
        b: &zero,
        next_u: &nu,
        next_b: &nb,
    };
    for cfg in [ge1(16, 0.1), lt1(16, 0.1)] {
        for j in 0..=3 {
            let r = term_report_at(&lv, &cfg, j).unwrap();
            assert!(r.terms.iter().all(|t| t.1 == 0.0), "{:?}", r.terms);
            assert!(r.checks.iter().all(|c| c.nonlinear.abs() < 1e-14));
        }
    }
}

#[test]
fn velocity_only_level_leaves_magnetic_terms_zero() {
    let g = grid(16);
    let u = shear(g, 2, 0.0);
    let zero = VectorField::zeros(g);
    let (nu, nb) = (solenoidal(g, 7.0, 15), solenoidal(g, 7.0, 16));
    let lv = Levels {
        u: &u,
        b: &zero,
        next_u: &nu,
        next_b: &nb,
    };
    let r = term_report_at(&lv, &ge1(16, 0.1), 1).unwrap();
    for name in ["J4", "J5", "J6", "K4", "K5", "K6"] {
        assert_eq!(r.term(name), Some(0.0), "{name}");
    }
    assert!(r.term("J1").unwrap() > 0.0);
    assert!(r.term("J2").unwrap() > 0.0);
    assert!(matches!(
        term_report_at(&lv, &ge1(16, 0.1), 9),
        Err(Error::BlockOutOfRange { .. })
    ));
}

#[test]
fn finite_difference_rates_track_equation_rates() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 17);
    for cfg in [ge1(16, 0.05), lt1(16, 0.05)] {
        let run = run_picard(&cfg, &u0, &b0, &quiet()).unwrap();
        let prev = run.previous.as_ref().unwrap();
        for j in 0..=2 {
            let r = aprior_term_report(&run.last, prev, &cfg, j, 0.025).unwrap();
            assert_eq!(r.t, Some(0.025));
            for c in &r.checks {
                let fd = c.lhs_fd.unwrap();
                let scale = c.lhs.abs().max(c.bound).max(1e-12);
                assert!(
                    (fd - c.lhs).abs() <= 0.05 * scale,
                    "{} j={j}: {fd} vs {}",
                    c.name,
                    c.lhs
                );
            }
        }
        assert!(aprior_term_report(&run.last, &run.last, &cfg, 1, 0.0).is_err());
    }
}

#[test]
fn constant_stable_across_shells() {
    let cfg = ge1(32, 0.1);
    let m = measure_constant(&cfg, 6, 3, 5).unwrap();
    assert!(m.c.is_finite() && m.c > 0.0);
    assert_eq!(m.members, 6 + 3 * 3);
    let shells: Vec<f64> = m
        .per_block
        .iter()
        .filter(|(j, _)| *j >= 2)
        .map(|p| p.1)
        .collect();
    assert_eq!(shells.len(), 3);
    let (lo, hi) = shells
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi <= 2.0 * lo, "{shells:?}");
    assert_eq!(measure_constant(&cfg, 6, 3, 5).unwrap(), m);
}

#[test]
fn small_data_contracts() {
    let g = grid(32);
    let (u0, b0) = band_data(g, 1);
    let base = SchemeConfig::new(1.2, 1.0, 2, 32, 1.0, 6);
    let c = measure_constant(&base, 6, 3, 2).unwrap().c;
    let choice = choose_horizon(&base, &u0, &b0, 0.1, c, 1.0).unwrap();
    let cfg = base.with_horizon(choice.t);
    let run = run_picard(&cfg, &u0, &b0, &RunOptions::default()).unwrap();
    let fit = run.decay().unwrap();
    assert!(fit.ratio < 0.9 && fit.points >= 3, "{fit:?}");
    assert!(run.y_holds());
    assert_eq!(run.records.len(), 7);
}

#[test]
fn monitor_on_zero_and_constant_trajectories() {
    let g = grid(16);
    let cfg = ge1(16, 0.2);
    let zero = VectorField::zeros(g);
    let (u0, b0) = band_data(g, 3);
    let still = IterateState::constant(zero.clone(), zero.clone(), &cfg, 1).unwrap();
    let y = monitor_y(&still, &cfg, &u0, &b0, 0.1).unwrap();
    assert!(y.bounds.iter().all(|b| b.value == 0.0 && b.holds));

    let v = solenoidal(g, 7.0, 18);
    let held = IterateState::constant(v.clone(), zero, &cfg, 1).unwrap();
    let y = monitor_y(&held, &cfg, &u0, &b0, 0.1).unwrap();
    let h = Flavor::Homogeneous;
    let b = |s: f64| besov_norm(&v, &NormSpec::l2_sum(s, h)).unwrap();
    assert!(rel_err(y.value("u_L1_B(d/2+1)").unwrap(), 0.2 * b(2.0)) < 1e-12);
    assert!(rel_err(y.value("u_Linf_B(d/2+1-2a)").unwrap(), b(2.0 - 2.4)) < 1e-12);
    assert!(
        rel_err(
            y.value("u_L2_B(d/2+1-a)").unwrap(),
            0.2f64.sqrt() * b(2.0 - 1.2)
        ) < 1e-12
    );
    assert_eq!(y.value("b_Linf_B(d/2+1-a)"), Some(0.0));
}

#[test]
fn halving_the_horizon_shrinks_every_bound() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 19);
    for cfg in [
        ge1(16, 0.1).with_dt(0.1 / 64.0),
        lt1(16, 0.1).with_dt(0.1 / 64.0),
    ] {
        let half = cfg.clone().with_horizon(0.05).with_dt(cfg.step());
        assert_eq!(half.steps(), 32);
        let full = run_picard(&cfg, &u0, &b0, &RunOptions::default()).unwrap();
        let short = run_picard(&half, &u0, &b0, &RunOptions::default()).unwrap();
        assert_eq!(&full.last.u.states()[..33], short.last.u.states());
        assert_eq!(&full.last.b.states()[..33], short.last.b.states());
        for (a, b) in full.records.iter().zip(&short.records) {
            for (x, y) in
                a.y.as_ref()
                    .unwrap()
                    .bounds
                    .iter()
                    .zip(&b.y.as_ref().unwrap().bounds)
            {
                assert_eq!(x.name, y.name);
                assert!(y.value <= x.value * (1.0 + 1e-12), "{}", x.name);
            }
        }
    }
}

#[test]
fn blow_up_is_reported() {
    let g = grid(16);
    let (u0, b0) = preset_fields(&"taylor-green(200)".parse().unwrap(), g, 1.0, 0).unwrap();
    let cfg = SchemeConfig::new(1.0, 0.01, 2, 16, 2.0, 12).with_dt(2.0 / 64.0);
    match run_picard(&cfg, &u0, &b0, &quiet()) {
        Err(Error::Divergence { value, limit, .. }) => assert!(value > limit || value.is_nan()),
        other => panic!(
            "expected divergence, got {:?}",
            other.map(|r| r.differences())
        ),
    }
}

#[test]
fn horizon_recipe_meets_its_conditions() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 20);
    let cfg = ge1(16, 1.0);
    let ch = choose_horizon(&cfg, &u0, &b0, 0.1, 1.3, 1.0).unwrap();
    assert!(ch.t > 0.0 && ch.t <= 1.0);
    assert!(ch.c * ch.t * ch.m * ch.m <= ch.delta_used / 2.0 * (1.0 + 1e-12));
    assert!(ch.c * ch.t * ch.m <= 0.25 * (1.0 + 1e-12));
    let (a, b) = linear_heat_norms(&cfg, &u0, ch.t).unwrap();
    assert!(a <= ch.delta_used / 4.0 * (1.0 + 1e-9) && b <= ch.delta_used / 4.0 * (1.0 + 1e-9));
    assert!(ch
        .candidates
        .iter()
        .any(|(name, t)| *name == ch.limiting && *t == ch.t));

    let cfg = lt1(16, 1.0);
    let ch = choose_horizon(&cfg, &u0, &b0, 0.1, 1.5, 1.0).unwrap();
    assert!(ch.t.sqrt() * ch.c * ch.m <= 0.25 * (1.0 + 1e-12));

    let zero = VectorField::zeros(g);
    let ch = choose_horizon(&cfg, &zero, &zero, 0.1, 1.5, 0.7).unwrap();
    assert_eq!((ch.limiting, ch.t), ("cap", 0.7));
    assert!(choose_horizon(&cfg, &u0, &b0, 1.5, 1.5, 1.0).is_err());
    assert!(choose_horizon(&cfg, &u0, &b0, 0.1, 0.0, 1.0).is_err());
}

#[test]
fn csv_outputs_have_fixed_columns() {
    let g = grid(16);
    let (u0, b0) = band_data(g, 21);
    let cfg = ge1(16, 0.05).with_dt(0.05 / 16.0);
    let run = run_picard(&cfg, &u0, &b0, &RunOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_iteration_csv(&mut buf, &run, cfg.horizon).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,time,norm_name,value"));
    let rows = lines.count();
    let expect: usize = run
        .records
        .iter()
        .map(|r| {
            2 * r.l2_series.len()
                + r.difference.is_some() as usize
                + r.y.as_ref().unwrap().bounds.len()
        })
        .sum();
    assert_eq!(rows, expect);

    let mut buf = Vec::new();
    write_y_csv(&mut buf, &run).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("iter,regime,name,value,limit,holds,M,delta\n"));
    assert_eq!(text.lines().count(), 1 + 4 * run.records.len());
}

#[test]
fn presets_reject_bad_input() {
    let g = grid(16);
    assert!("random-band(0,1)".parse::<Preset>().is_err());
    assert!("random-band(0,x,1)".parse::<Preset>().is_err());
    assert!(preset_fields(&"random-band(0,3,1)".parse().unwrap(), g, 1.0, 0).is_err());
    assert!(preset_fields(&"random-band(2,1,1)".parse().unwrap(), g, 1.0, 0).is_err());
    let p: Preset = "random-band(0,1,0.05)".parse().unwrap();
    let a = preset_fields(&p, g, 1.0, 4).unwrap();
    let b = preset_fields(&p, g, 1.0, 4).unwrap();
    let c = preset_fields(&p, g, 1.0, 5).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let single = preset_fields(&"single-mode(2,1,0.3)".parse().unwrap(), g, 1.0, 0).unwrap();
    let coeff =
        single.0.component(0).coeff(&[2, 1]).norm() + single.0.component(1).coeff(&[2, 1]).norm();
    assert!(coeff > 0.0);
}
