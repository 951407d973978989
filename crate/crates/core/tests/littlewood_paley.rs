mod common;

use common::*;
use fracmhd::littlewood_paley::*;
use fracmhd::spectral::{inner_product, product};
use fracmhd::{Error, Grid, SpectralField};
use num_complex::Complex64;

#[test]
fn multipliers_match_the_construction() {
    for i in 0..=4000 {
        let r = i as f64 * 1e-3;
        assert!((phi(r) - chi_oracle(r)).abs() < 1e-15, "phi({r})");
        assert!((psi(r) - psi_oracle(r)).abs() < 1e-15, "psi({r})");
    }
}

#[test]
fn multiplier_examples() {
    assert_eq!(phi(0.0), 1.0);
    assert_eq!(psi(0.5), 0.0);
    let r = 1.0;
    let total = phi(r) + (0..40).map(|j| psi(r / 2f64.powi(j))).sum::<f64>();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn supports_are_respected() {
    for i in 0..20000 {
        let r = i as f64 * 5e-4;
        if r >= BALL_RADIUS {
            assert_eq!(phi(r), 0.0, "phi({r})");
        }
        if r <= ANNULUS_INNER || r >= ANNULUS_OUTER {
            assert_eq!(psi(r), 0.0, "psi({r})");
        }
        assert!((0.0..=1.0).contains(&phi(r)) && (0.0..=1.0).contains(&psi(r)));
    }
}

#[test]
fn inhomogeneous_partition_of_unity() {
    let worst = (0..10_000)
        .map(|i| {
            let r = i as f64 * 0.01;
            let s = phi(r) + (0..30).map(|j| psi(r / 2f64.powi(j))).sum::<f64>();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn homogeneous_completeness_over_resolvable_range() {
    let part = DyadicPartition::new(grid(64));
    let top = 2f64.powi(part.j_max());
    for i in 0..10_000 {
        let r = 1.0 + (top - 1.0) * i as f64 / 9999.0;
        let s: f64 = part
            .range(Flavor::Homogeneous)
            .map(|j| part.block_weight(j, Flavor::Homogeneous, r))
            .sum();
        assert!((s - 1.0).abs() <= 1e-12, "r={r} sum={s}");
    }
}

#[test]
fn j_max_is_the_largest_resolvable_block() {
    for (d, n) in [(2, 16), (2, 32), (2, 64), (2, 128), (3, 16)] {
        let g = Grid::new(d, n).unwrap();
        let kmax = (d as f64).sqrt() * n as f64 / 2.0;
        let expected = (-1..40)
            .filter(|&j| 3.0 * 2f64.powi(j - 2) <= kmax)
            .max()
            .unwrap();
        assert_eq!(DyadicPartition::new(g).j_max(), expected, "d={d} n={n}");
    }
    assert_eq!(DyadicPartition::new(grid(64)).j_max(), 5);
}

#[test]
fn unit_mode_lives_in_two_blocks() {
    let g = grid(32);
    let part = DyadicPartition::for_grid(g);
    let f = SpectralField::mode(g, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
    let mut total = 0.0;
    for j in part.range(Flavor::Inhomogeneous) {
        let w = delta_j(&part, &f, j, Flavor::Inhomogeneous)
            .coeff(&[1, 0])
            .re;
        match j {
            -1 => assert!((w - chi_oracle(1.0)).abs() < 1e-15),
            0 => assert!((w - psi_oracle(1.0)).abs() < 1e-15),
            _ => assert_eq!(w, 0.0, "block {j}"),
        }
        total += w;
    }
    assert!((total - 1.0).abs() < 1e-15);
}

#[test]
fn constant_field_blocks() {
    let g = grid(16);
    let part = DyadicPartition::for_grid(g);
    let c = SpectralField::from_fn(g, |_| 3.0);
    assert!(max_coeff_diff(&delta_j(&part, &c, -1, Flavor::Inhomogeneous), &c) < 1e-15);
    for j in 0..=part.j_max() {
        assert!(delta_j(&part, &c, j, Flavor::Inhomogeneous).is_zero());
    }
    for j in part.range(Flavor::Homogeneous) {
        assert!(delta_j(&part, &c, j, Flavor::Homogeneous).is_zero());
    }
    assert!(delta_j(&part, &c, -3, Flavor::Inhomogeneous).is_zero());
    assert!(max_coeff_diff(&s_j(&part, &c, 0, Flavor::Inhomogeneous), &c) < 1e-15);
}

#[test]
fn reconstruction_both_flavors() {
    for n in [32, 64] {
        let g = grid(n);
        for seed in 0..10 {
            let f = band(g, n as f64, seed);
            let inh = BlockedField::new(f.clone(), Flavor::Inhomogeneous).reconstruct();
            assert!(max_coeff_diff(&inh, &f) <= 1e-12 * f.max_abs_coeff());
            let mut mean_free = f.clone();
            mean_free = &mean_free - &SpectralField::from_fn(g, |_| f.mean().re);
            let hom = BlockedField::new(f.clone(), Flavor::Homogeneous).reconstruct();
            assert!(max_coeff_diff(&hom, &mean_free) <= 1e-12 * f.max_abs_coeff());
        }
    }
}

#[test]
fn telescoping_cutoffs() {
    let g = grid(32);
    let part = DyadicPartition::for_grid(g);
    let f = band(g, 32.0, 4);
    for flavor in [Flavor::Inhomogeneous, Flavor::Homogeneous] {
        let target = if flavor == Flavor::Homogeneous {
            &f - &SpectralField::from_fn(g, |_| f.mean().re)
        } else {
            f.clone()
        };
        for j in part.range(flavor) {
            let mut acc = s_j(&part, &f, j, flavor);
            for k in j..=part.j_max() {
                acc = &acc + &delta_j(&part, &f, k, flavor);
            }
            assert!(
                max_coeff_diff(&acc, &target) <= 1e-12 * f.max_abs_coeff(),
                "j={j}"
            );
        }
        let beyond = s_j(&part, &f, part.j_max() + 1, flavor);
        assert!(max_coeff_diff(&beyond, &target) <= 1e-12 * f.max_abs_coeff());
    }
}

#[test]
fn low_cutoff_annihilates_far_block() {
    let g = grid(32);
    let part = DyadicPartition::for_grid(g);
    let f = SpectralField::mode(g, &[12, 0], Complex64::new(1.0, 0.0)).unwrap();
    let low = s_j(&part, &f, 2, Flavor::Inhomogeneous);
    assert!(low.is_zero());
    assert!(delta_j(&part, &low, 3, Flavor::Inhomogeneous).is_zero());
}

#[test]
fn separated_blocks_are_orthogonal() {
    let g = grid(64);
    let part = DyadicPartition::for_grid(g);
    let f = band(g, 64.0, 5);
    let blocks = BlockedField::new(f.clone(), Flavor::Inhomogeneous);
    for j in blocks.range() {
        for k in blocks.range() {
            if (j - k).abs() >= 2 {
                let ip = inner_product(blocks.block(j).unwrap(), blocks.block(k).unwrap()).unwrap();
                assert_eq!(ip, 0.0, "j={j} k={k}");
            }
        }
    }
    for flavor in [Flavor::Inhomogeneous, Flavor::Homogeneous] {
        for j in part.range(flavor) {
            let dj = delta_j(&part, &f, j, flavor);
            let twice = delta_j(&part, &delta_tilde_j(&part, &f, j, flavor), j, flavor);
            assert!(
                max_coeff_diff(&twice, &dj) <= 1e-12 * f.max_abs_coeff(),
                "j={j}"
            );
        }
    }
}

#[test]
fn blocked_field_is_lazy_and_bounded() {
    let g = grid(16);
    let f = band(g, 8.0, 6);
    let b = BlockedField::new(f.clone(), Flavor::Homogeneous);
    let part = DyadicPartition::for_grid(g);
    assert_eq!(
        b.block(1).unwrap(),
        &delta_j(&part, &f, 1, Flavor::Homogeneous)
    );
    assert!(b.block(part.j_max() + 1).is_none());
    assert!(b.block(-3).is_none());
    assert!(matches!(
        part.check_block(-2, Flavor::Inhomogeneous),
        Err(Error::BlockOutOfRange { j: -2, lo: -1, .. })
    ));
    assert!(part.check_block(-2, Flavor::Homogeneous).is_ok());
}

#[test]
fn bony_with_constant_factor() {
    let g = grid(32);
    let one = SpectralField::from_fn(g, |_| 1.0);
    let h = band(g, 15.0, 7);
    let parts = bony_decompose(&one, &h).unwrap();
    assert!(max_coeff_diff(&parts.sum(), &h) <= 1e-12 * h.max_abs_coeff());
}

#[test]
fn bony_far_separated_modes() {
    let g = grid(64);
    let f = SpectralField::from_fn(g, |x| x[0].cos());
    let h = SpectralField::from_fn(g, |x| (16.0 * x[1]).cos());
    let parts = bony_decompose(&f, &h).unwrap();
    // |k_F| = 1 sits in blocks {-1, 0} and |k_G| = 16 in blocks {4, 5}: no overlap within one index.
    assert!(parts.high_high.max_abs_coeff() < 1e-15);
    assert!(parts.high_low.max_abs_coeff() < 1e-15);
    let full = product(&f, &h).unwrap();
    assert!(max_coeff_diff(&parts.low_high, &full) < 1e-14);
}

#[test]
fn bony_parts_sum_to_product() {
    for n in [32, 64] {
        let g = grid(n);
        for seed in 0..3 {
            let f = band(g, n as f64 / 2.0 - 1.0, 10 + seed);
            let h = band(g, n as f64 / 2.0 - 1.0, 20 + seed);
            let parts = bony_decompose(&f, &h).unwrap();
            let full = product(&f, &h).unwrap();
            assert!(max_coeff_diff(&parts.sum(), &full) <= 1e-12 * full.max_abs_coeff());
        }
    }
    assert!(bony_decompose(
        &SpectralField::zeros(grid(8)),
        &SpectralField::zeros(grid(16))
    )
    .is_err());
}
