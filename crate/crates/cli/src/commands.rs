//! The four batch commands.

use std::fs::File;
use std::path::{Path, PathBuf};

use fracmhd::checks::{
    bernstein_ensemble, bernstein_interval, cancellation_ensemble, product_law_ensemble,
    stamp_ensemble_max, triple_product_ensemble, write_ratio_csv, EnsembleSummary, RatioReport,
    TripleEnsembleConfig,
};
use fracmhd::littlewood_paley::{DyadicPartition, Flavor};
use fracmhd::norms::{besov_norm, block_profile, lebesgue_norm_of, NormSpec};
use fracmhd::scheme::{
    choose_horizon, measure_constant, preset_fields, run_picard, write_iteration_csv, write_y_csv,
    Preset, RunOptions, SchemeConfig,
};
use fracmhd::spectral::snapshot::{read_vector_fields, write_fields};
use fracmhd::uniqueness::{
    energy_balance, gronwall_verify, mode_perturbation, q_decomposition, solve_pair, QTerms,
};
use fracmhd::{Grid, VectorField};
use serde_json::{json, Map, Value as Json};

use crate::manifest::{looks_like_preset, runtime_issue, Command, Manifest, Perturbation, Value};
use crate::output::{lib_io, write_atomic};
use crate::CliError;

/// Largest relative divergence accepted on any stored iterate.
pub const DIVERGENCE_TOL: f64 = 1e-10;
/// Largest normalized residual accepted for the vanishing pairings.
pub const PAIRING_TOL: f64 = 1e-11;
/// Final difference energy that counts as zero for identical data.
pub const ZERO_ENERGY: f64 = 1e-20;
/// Fitted ratio below which Picard differences count as contracting.
pub const CONTRACTION_RATIO: f64 = 0.9;
/// Differences above the rounding floor needed for a contraction verdict.
pub const CONTRACTION_POINTS: usize = 4;

/// What a command produced.
#[derive(Debug)]
pub struct Report {
    pub checks: Vec<(&'static str, bool)>,
    pub results: Json,
    pub config: Map<String, Json>,
    pub files: Vec<PathBuf>,
}

pub fn config_json(m: &Manifest) -> Map<String, Json> {
    let mut map = Map::new();
    for (k, v) in &m.params {
        let j = match v {
            Value::Float(x) => json!(x),
            Value::Int(x) => json!(x),
            Value::Text(s) => json!(s),
            Value::Auto => json!("auto"),
            Value::Floats(v) => json!(v),
            Value::Names(v) => json!(v),
        };
        map.insert(k.clone(), j);
    }
    map
}

fn grid_of(m: &Manifest) -> Result<Grid, CliError> {
    let d = m.usize("d").unwrap_or(2);
    let n = m.usize("n").unwrap_or(64);
    Ok(Grid::new(d, n)?)
}

/// Velocity and magnetic data from a preset or a snapshot file.
fn initial_fields(m: &Manifest, grid: Grid) -> Result<(VectorField, VectorField), CliError> {
    let text = m.text("initial_data").unwrap_or("random-band(0,1,0.05)");
    let scale = m.float("magnetic_scale").unwrap_or(1.0);
    if looks_like_preset(text) {
        let preset: Preset = text.parse()?;
        return Ok(preset_fields(&preset, grid, scale, m.seed)?);
    }
    let file = File::open(text)
        .map_err(|e| runtime_issue(format!("cannot open snapshot {text:?}: {e}")))?;
    let mut fields = read_vector_fields(file, 2)
        .map_err(|e| runtime_issue(format!("snapshot {text:?}: {e}")))?;
    let b = fields.pop().expect("two fields");
    let u = fields.pop().expect("two fields");
    if u.grid() != grid {
        return Err(runtime_issue(format!(
            "snapshot {text:?} is on d={} n={}, the manifest asks for d={} n={}",
            u.grid().d(),
            u.grid().n(),
            grid.d(),
            grid.n()
        ))
        .into());
    }
    Ok((u, &b * scale))
}

/// The scheme configuration with `T` resolved, and how it was resolved.
fn resolve_horizon(
    m: &Manifest,
    u0: &VectorField,
    b0: &VectorField,
) -> Result<(SchemeConfig, Json), CliError> {
    let t_max = m.float("t_max").unwrap_or(1.0);
    let base = m
        .scheme_config(Some(t_max))
        .ok_or_else(|| runtime_issue("incomplete scheme parameters"))?;
    if m.float("T").is_some() {
        return Ok((
            base.clone(),
            json!({"T": base.horizon, "dt": base.step(), "steps": base.steps(), "source": "manifest"}),
        ));
    }
    let delta = m.float("delta").unwrap_or(0.1);
    let (c, source, per_block) = match m.float("constant") {
        Some(c) => (c, "manifest", Json::Null),
        None => {
            let mc = measure_constant(
                &base,
                m.usize("ensemble").unwrap_or(20),
                m.usize("per_shell").unwrap_or(4),
                m.seed,
            )?;
            let blocks: Vec<Json> = mc.per_block.iter().map(|(j, x)| json!([j, x])).collect();
            (mc.c, "measured", Json::Array(blocks))
        }
    };
    let choice = choose_horizon(&base, u0, b0, delta, c, t_max)?;
    let mut cfg = base.with_horizon(choice.t);
    if let Some(dt) = m.float("dt") {
        cfg = cfg.with_dt(dt);
    }
    cfg.validate()?;
    let candidates: Map<String, Json> = choice
        .candidates
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    Ok((
        cfg.clone(),
        json!({
            "T": cfg.horizon,
            "dt": cfg.step(),
            "steps": cfg.steps(),
            "source": "recipe",
            "C": c,
            "C_source": source,
            "C_per_block": per_block,
            "M": choice.m,
            "delta": choice.delta,
            "delta_used": choice.delta_used,
            "limiting": choice.limiting,
            "candidates": candidates,
        }),
    ))
}

pub fn run_scheme(m: &Manifest, out: &Path) -> Result<Report, CliError> {
    let grid = grid_of(m)?;
    let (u0, b0) = initial_fields(m, grid)?;
    let (cfg, horizon) = resolve_horizon(m, &u0, &b0)?;
    let opts = RunOptions {
        delta: m.float("delta").unwrap_or(0.1),
        stop_below: m.float("stop_below"),
        monitor: true,
    };
    let run = run_picard(&cfg, &u0, &b0, &opts)?;
    let mut files = vec![
        write_atomic(out, "iterations.csv", |w| {
            write_iteration_csv(w, &run, cfg.horizon).map_err(lib_io)
        })?,
        write_atomic(out, "y_membership.csv", |w| {
            write_y_csv(w, &run).map_err(lib_io)
        })?,
    ];
    files.push(write_atomic(out, "final_state.field", |w| {
        write_fields(&mut &mut *w, &[run.last.u.last(), run.last.b.last()]).map_err(lib_io)
    })?);

    let max_div = run
        .records
        .iter()
        .map(|r| r.max_divergence)
        .fold(0.0, f64::max);
    let differences = run.differences();
    let decay = run.decay();
    let mut checks = vec![
        ("solenoidal", max_div <= DIVERGENCE_TOL),
        ("y_bounds", run.y_holds()),
    ];
    if differences.len() >= CONTRACTION_POINTS {
        checks.push((
            "contraction",
            decay.is_some_and(|f| f.ratio < CONTRACTION_RATIO && f.points >= CONTRACTION_POINTS),
        ));
    }
    let y: Vec<Json> = run
        .records
        .iter()
        .filter_map(|r| r.y.as_ref())
        .map(|y| {
            let bounds: Map<String, Json> = y
                .bounds
                .iter()
                .map(|b| {
                    (
                        b.name.clone(),
                        json!({"value": b.value, "limit": b.limit, "holds": b.holds}),
                    )
                })
                .collect();
            json!({"iteration": y.iteration, "M": y.m, "bounds": bounds})
        })
        .collect();
    let mut config = config_json(m);
    config.insert("regime".into(), json!(cfg.regime.to_string()));
    Ok(Report {
        checks,
        results: json!({
            "horizon": horizon,
            "iterations": run.records.len() - 1,
            "converged": run.converged,
            "differences": differences,
            "decay_fit": decay.map(|f| json!({"ratio": f.ratio, "points": f.points})),
            "max_divergence": max_div,
            "y": y,
        }),
        config,
        files,
    })
}

fn perturbations(m: &Manifest, grid: Grid) -> Result<(VectorField, VectorField, bool), CliError> {
    let zero = VectorField::zeros(grid);
    let p = Perturbation::parse(m.text("perturbation").unwrap_or("none"), grid.d())
        .map_err(runtime_issue)?;
    Ok(match p {
        Perturbation::None => (zero.clone(), zero, true),
        Perturbation::Mode { k, eps } => {
            let v = mode_perturbation(grid, &k, eps)?;
            match m.text("perturb").unwrap_or("u") {
                "b" => (zero, v, false),
                "both" => (v.clone(), v, false),
                _ => (v, zero, false),
            }
        }
    })
}

pub fn verify_uniqueness(m: &Manifest, out: &Path) -> Result<Report, CliError> {
    let grid = grid_of(m)?;
    let (u0, b0) = initial_fields(m, grid)?;
    let (cfg, horizon) = resolve_horizon(m, &u0, &b0)?;
    let (du, db, identical) = perturbations(m, grid)?;
    let pair = solve_pair(&cfg, &u0, &b0, &du, &db)?;
    let cert = gronwall_verify(&pair, &cfg)?;
    let q: Vec<QTerms> = pair
        .times()
        .iter()
        .map(|t| q_decomposition(&pair, *t))
        .collect::<fracmhd::Result<_>>()?;
    let files = vec![write_atomic(out, "uniqueness.csv", |w| {
        cert.write_csv(w, &q).map_err(lib_io)
    })?];
    let max_q2 = q.iter().map(|x| x.q2_normalized).fold(0.0, f64::max);
    let mid = pair.times()[pair.times().len() / 2];
    let balance = energy_balance(&pair, &cfg, mid)?;
    let last = cert.times.len() - 1;
    let mut checks = vec![
        ("gronwall", cert.bound_satisfied),
        ("q2_vanishes", max_q2 <= PAIRING_TOL),
    ];
    if identical {
        checks.push(("identical_zero", cert.final_energy() <= ZERO_ENERGY));
    }
    let integrability: Map<String, Json> = cert
        .integrability
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    let mut config = config_json(m);
    config.insert("regime".into(), json!(cfg.regime.to_string()));
    Ok(Report {
        checks,
        results: json!({
            "horizon": horizon,
            "iterations": [pair.sol1.n, pair.sol2.n],
            "energy": cert.final_energy(),
            "initial_energy": cert.energy[0],
            "growth_factor": cert.growth_factor[last],
            "bound_ok": cert.bound_satisfied,
            "slack": cert.slack,
            "max_q2_normalized": max_q2,
            "integrability": integrability,
            "energy_balance": {"t": balance.t, "lhs": balance.lhs, "q_sum": balance.q_sum},
        }),
        config,
        files,
    })
}

fn flavor_name(f: Flavor) -> &'static str {
    match f {
        Flavor::Homogeneous => "homogeneous",
        Flavor::Inhomogeneous => "inhomogeneous",
    }
}

fn summarize(reports: &[RatioReport]) -> Json {
    let s = EnsembleSummary::of(reports);
    let finite = |x: f64| if x.is_finite() { json!(x) } else { Json::Null };
    json!({
        "reports": s.members,
        "degenerate": s.degenerate,
        "max_ratio": finite(s.max_ratio),
        "min_ratio": finite(s.min_ratio),
    })
}

pub fn check_inequalities(m: &Manifest, out: &Path) -> Result<Report, CliError> {
    let grid = grid_of(m)?;
    let members = m.usize("members").unwrap_or(100);
    let wanted: Vec<String> = m
        .names("checks")
        .map(<[String]>::to_vec)
        .unwrap_or_default();
    let mut all: Vec<RatioReport> = Vec::new();
    let mut checks = Vec::new();
    let mut results = Map::new();

    if wanted.iter().any(|c| c == "bernstein") {
        let mut ok = true;
        let mut per_alpha = Map::new();
        for &alpha in m.floats("bernstein_alphas").unwrap_or(&[]) {
            let (lo, hi) = bernstein_interval(alpha);
            let reports = bernstein_ensemble(grid, alpha, members, m.seed)?;
            let mut group: Vec<RatioReport> = Vec::new();
            for r in reports {
                for x in [r.upper.ratio, r.lower.ratio].into_iter().flatten() {
                    ok &= x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12);
                }
                group.push(r.upper);
                group.push(r.lower);
            }
            stamp_ensemble_max(&mut group);
            let mut s = summarize(&group);
            s["interval"] = json!([lo, hi]);
            per_alpha.insert(alpha.to_string(), s);
            all.extend(group);
        }
        checks.push(("bernstein", ok));
        results.insert("bernstein".into(), Json::Object(per_alpha));
    }

    if wanted.iter().any(|c| c == "cancellation") {
        let mut worst: f64 = 0.0;
        let mut per_flavor = Map::new();
        for flavor in [Flavor::Inhomogeneous, Flavor::Homogeneous] {
            let reports = cancellation_ensemble(grid, members, m.seed, flavor)?;
            let mut group: Vec<RatioReport> = reports
                .iter()
                .map(|r| {
                    RatioReport::new(
                        "cancellation",
                        flavor_name(flavor),
                        r.j,
                        grid.n(),
                        r.residual,
                        r.scale,
                    )
                })
                .collect();
            let w = reports.iter().map(|r| r.normalized).fold(0.0, f64::max);
            worst = worst.max(w);
            stamp_ensemble_max(&mut group);
            per_flavor.insert(
                flavor_name(flavor).into(),
                json!({"reports": group.len(), "max_normalized": w}),
            );
            all.extend(group);
        }
        checks.push(("cancellation", worst <= PAIRING_TOL));
        results.insert("cancellation".into(), Json::Object(per_flavor));
    }

    if wanted.iter().any(|c| c == "triple") {
        let cfg = TripleEnsembleConfig::new(
            grid,
            m.usize("triple_broadband").unwrap_or(20),
            m.usize("triple_per_shell").unwrap_or(4),
            m.seed,
        );
        let reports = triple_product_ensemble(&cfg)?;
        let ok = reports.iter().filter_map(|r| r.ratio).all(f64::is_finite);
        let mut per_variant = Map::new();
        for v in &cfg.variants {
            let name = v.to_string();
            let mut group: Vec<RatioReport> = reports
                .iter()
                .filter(|r| r.variant == name)
                .cloned()
                .collect();
            stamp_ensemble_max(&mut group);
            let mut s = summarize(&group);
            let mut by_j: Vec<(i32, f64)> = Vec::new();
            for r in &group {
                if let Some(x) = r.ratio {
                    match by_j.iter_mut().find(|(j, _)| *j == r.j) {
                        Some(slot) => slot.1 = slot.1.max(x),
                        None => by_j.push((r.j, x)),
                    }
                }
            }
            by_j.sort_by_key(|p| p.0);
            s["max_by_j"] = json!(by_j);
            per_variant.insert(name, s);
            all.extend(group);
        }
        checks.push(("triple", ok));
        results.insert("triple".into(), Json::Object(per_variant));
    }

    if wanted.iter().any(|c| c == "product-law") {
        let (s1, s2, p) = (
            m.float("s1").unwrap_or(0.5),
            m.float("s2").unwrap_or(0.5),
            m.float("p").unwrap_or(2.0),
        );
        let mut group = product_law_ensemble(grid, s1, s2, p, members, m.seed)?;
        stamp_ensemble_max(&mut group);
        checks.push((
            "product-law",
            group.iter().filter_map(|r| r.ratio).all(f64::is_finite),
        ));
        results.insert("product-law".into(), summarize(&group));
        all.extend(group);
    }

    let files = vec![write_atomic(out, "ratios.csv", |w| {
        write_ratio_csv(w, &all).map_err(lib_io)
    })?];
    Ok(Report {
        checks,
        results: Json::Object(results),
        config: config_json(m),
        files,
    })
}

pub fn norms(m: &Manifest, out: &Path) -> Result<Report, CliError> {
    let grid = grid_of(m)?;
    let (u, b) = initial_fields(m, grid)?;
    let flavor = match m.text("flavor") {
        Some("inhomogeneous") => Flavor::Inhomogeneous,
        _ => Flavor::Homogeneous,
    };
    let (s, p, q) = (
        m.float("s").unwrap_or(0.0),
        m.float("p").unwrap_or(2.0),
        m.float("q").unwrap_or(1.0),
    );
    let spec = NormSpec::besov(s, p, q, flavor)?;
    let part = DyadicPartition::for_grid(grid);
    let mut rows: Vec<(String, String, Option<i32>, f64)> = Vec::new();
    let mut results = Map::new();
    let mut finite = true;
    let mut solenoidal = true;
    for (name, f) in [("u", &u), ("b", &b)] {
        let l2 = f.l2_norm();
        let linf = lebesgue_norm_of(f, f64::INFINITY)?;
        let besov = besov_norm(f, &spec)?;
        let div = f.divergence_residual();
        finite &= l2.is_finite() && linf.is_finite() && besov.is_finite();
        solenoidal &= div <= DIVERGENCE_TOL;
        rows.push((name.into(), "L2".into(), None, l2));
        rows.push((name.into(), "Linf".into(), None, linf));
        rows.push((name.into(), format!("B({s},{p},{q})"), None, besov));
        for (j, v) in part.range(flavor).zip(block_profile(&part, f, p, flavor)) {
            rows.push((name.into(), format!("block_L{p}"), Some(j), v));
        }
        results.insert(
            name.into(),
            json!({"L2": l2, "Linf": linf, "besov": besov, "divergence": div}),
        );
    }
    let files = vec![write_atomic(out, "norms.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["field", "name", "j", "value"])?;
        for (f, n, j, v) in &rows {
            c.write_record([
                f.clone(),
                n.clone(),
                j.map(|j| j.to_string()).unwrap_or_default(),
                format!("{v:e}"),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?];
    Ok(Report {
        checks: vec![("finite", finite), ("solenoidal", solenoidal)],
        results: Json::Object(results),
        config: config_json(m),
        files,
    })
}

pub fn dispatch(m: &Manifest, out: &Path) -> Result<Report, CliError> {
    match m.command {
        Command::RunScheme => run_scheme(m, out),
        Command::CheckInequalities => check_inequalities(m, out),
        Command::VerifyUniqueness => verify_uniqueness(m, out),
        Command::Norms => norms(m, out),
    }
}
