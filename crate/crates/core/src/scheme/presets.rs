use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::random::{random_solenoidal, rng_from_seed};
use crate::spectral::{Grid, SpectralField, VectorField};

/// Named initial data.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    /// The Taylor–Green vortex with peak velocity `amplitude`.
    TaylorGreen { amplitude: f64 },
    /// Seeded solenoidal field on `max(1, 2^jlo) <= |k| <= 0.75·2^{jhi+1}`
    /// with RMS `amplitude`.
    RandomBand { jlo: i32, jhi: i32, amplitude: f64 },
    /// `amplitude · e_⊥ cos(k·x)` with `e_⊥` a unit vector orthogonal to `k`.
    SingleMode { k: Vec<i64>, amplitude: f64 },
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::TaylorGreen { amplitude } => write!(f, "taylor-green({amplitude})"),
            Preset::RandomBand {
                jlo,
                jhi,
                amplitude,
            } => {
                write!(f, "random-band({jlo},{jhi},{amplitude})")
            }
            Preset::SingleMode { k, amplitude } => {
                let ks: Vec<String> = k.iter().map(i64::to_string).collect();
                write!(f, "single-mode({},{amplitude})", ks.join(","))
            }
        }
    }
}

fn number<T: FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| invalid("initial_data", format!("cannot read {s:?} as a number")))
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], &s[i + 1..s.len() - 1]),
            _ => (s, ""),
        };
        let args: Vec<&str> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',').collect()
        };
        match (name.trim(), args.len()) {
            ("taylor-green", 0) => Ok(Preset::TaylorGreen { amplitude: 1.0 }),
            ("taylor-green", 1) => Ok(Preset::TaylorGreen {
                amplitude: number(args[0])?,
            }),
            ("random-band", 3) => Ok(Preset::RandomBand {
                jlo: number(args[0])?,
                jhi: number(args[1])?,
                amplitude: number(args[2])?,
            }),
            ("single-mode", n) if n >= 2 => Ok(Preset::SingleMode {
                k: args[..n - 1].iter().map(|a| number(a)).collect::<Result<_>>()?,
                amplitude: number(args[n - 1])?,
            }),
            _ => Err(invalid(
                "initial_data",
                format!(
                    "unknown preset {s:?}; expected taylor-green(A), random-band(jlo,jhi,A) or single-mode(k1,..,kd,A)"
                ),
            )),
        }
    }
}

fn taylor_green(grid: Grid, a: f64) -> VectorField {
    let comps = if grid.d() == 2 {
        vec![
            SpectralField::from_fn(grid, |x| a * x[0].sin() * x[1].cos()),
            SpectralField::from_fn(grid, |x| -a * x[0].cos() * x[1].sin()),
        ]
    } else {
        vec![
            SpectralField::from_fn(grid, |x| a * x[0].sin() * x[1].cos() * x[2].cos()),
            SpectralField::from_fn(grid, |x| -a * x[0].cos() * x[1].sin() * x[2].cos()),
            SpectralField::zeros(grid),
        ]
    };
    VectorField::new(comps).expect("components share a grid")
}

/// `(cos x₂, cos x₃, cos x₁)` (or `(cos x₂, cos x₁)` in 2D): solenoidal,
/// each component independent of its own coordinate.
fn shear_cells(grid: Grid, a: f64) -> VectorField {
    let d = grid.d();
    let comps = (0..d)
        .map(|i| {
            let axis = if d == 2 { 1 - i } else { (i + 1) % 3 };
            SpectralField::from_fn(grid, move |x| a * x[axis].cos())
        })
        .collect();
    VectorField::new(comps).expect("components share a grid")
}

fn orthogonal_unit(k: &[f64]) -> Vec<f64> {
    let v = if k.len() == 2 {
        vec![k[1], -k[0]]
    } else {
        // Cross with the axis least aligned with k.
        let i = (0..3)
            .min_by(|&a, &b| k[a].abs().partial_cmp(&k[b].abs()).expect("finite"))
            .expect("three axes");
        let mut e = [0.0; 3];
        e[i] = 1.0;
        vec![
            k[1] * e[2] - k[2] * e[1],
            k[2] * e[0] - k[0] * e[2],
            k[0] * e[1] - k[1] * e[0],
        ]
    };
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn mode_field(grid: Grid, k: &[i64], a: f64, phase: f64) -> Result<VectorField> {
    if k.len() != grid.d() {
        return Err(invalid(
            "initial_data",
            format!(
                "wave vector has {} entries on a {}-dimensional grid",
                k.len(),
                grid.d()
            ),
        ));
    }
    if k.iter().all(|&x| x == 0) {
        return Err(invalid("initial_data", "single-mode needs k != 0"));
    }
    let half = grid.n() as i64 / 2;
    if k.iter().any(|&x| x.abs() >= half) {
        return Err(invalid(
            "initial_data",
            format!("wave vector {k:?} is not resolved below the Nyquist index {half}"),
        ));
    }
    let kf: Vec<f64> = k.iter().map(|&x| x as f64).collect();
    let e = orthogonal_unit(&kf);
    let comps = e
        .iter()
        .map(|&ei| {
            let kf = kf.clone();
            SpectralField::from_fn(grid, move |x| {
                let arg: f64 = kf.iter().zip(x).map(|(k, x)| k * x).sum();
                a * ei * (arg + phase).cos()
            })
        })
        .collect();
    VectorField::new(comps)
}

/// Velocity and magnetic data of a preset. The magnetic field carries
/// `magnetic_scale` times the preset amplitude.
pub fn preset_fields(
    preset: &Preset,
    grid: Grid,
    magnetic_scale: f64,
    seed: u64,
) -> Result<(VectorField, VectorField)> {
    let (u, b) = match preset {
        Preset::TaylorGreen { amplitude } => (
            taylor_green(grid, *amplitude),
            shear_cells(grid, amplitude * magnetic_scale),
        ),
        Preset::RandomBand {
            jlo,
            jhi,
            amplitude,
        } => {
            if jhi < jlo {
                return Err(invalid("initial_data", format!("empty band {jlo}..{jhi}")));
            }
            let kmin = (*jlo as f64).exp2().max(1.0);
            let kmax = 0.75 * ((*jhi + 1) as f64).exp2();
            if kmax >= grid.n() as f64 / 2.0 {
                return Err(invalid(
                    "initial_data",
                    format!("band top {kmax} is not resolved on n = {}", grid.n()),
                ));
            }
            let mut rng = rng_from_seed(seed);
            let u = random_solenoidal(grid, kmin, kmax, *amplitude, &mut rng);
            let b = random_solenoidal(grid, kmin, kmax, amplitude * magnetic_scale, &mut rng);
            (u, b)
        }
        Preset::SingleMode { k, amplitude } => (
            mode_field(grid, k, *amplitude, 0.0)?,
            mode_field(
                grid,
                k,
                amplitude * magnetic_scale,
                std::f64::consts::FRAC_PI_2,
            )?,
        ),
    };
    let clean = |v: VectorField| crate::spectral::leray_project(&v);
    Ok((clean(u), clean(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in [
            "taylor-green(0.5)",
            "random-band(0,1,0.05)",
            "single-mode(2,1,0.3)",
        ] {
            let p: Preset = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("vortex(1)".parse::<Preset>().is_err());
    }

    #[test]
    fn presets_are_solenoidal() {
        let g = Grid::new(2, 16).unwrap();
        for s in [
            "taylor-green(1)",
            "random-band(0,1,0.1)",
            "single-mode(2,1,0.3)",
        ] {
            let (u, b) = preset_fields(&s.parse().unwrap(), g, 0.5, 3).unwrap();
            assert!(u.is_solenoidal() && b.is_solenoidal(), "{s}");
            assert!(!u.is_zero() && !b.is_zero());
        }
        let g3 = Grid::new(3, 8).unwrap();
        let (u, b) = preset_fields(&"single-mode(1,2,0,1)".parse().unwrap(), g3, 1.0, 0).unwrap();
        assert!(u.is_solenoidal() && b.is_solenoidal());
    }
}
