//! Run manifests: `key = value` lines with `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fracmhd::checks::product_law_hypotheses;
use fracmhd::scheme::{preset_fields, Preset, SchemeConfig};
use fracmhd::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    RunScheme,
    CheckInequalities,
    VerifyUniqueness,
    Norms,
}

impl Command {
    pub const ALL: [Command; 4] = [
        Command::RunScheme,
        Command::CheckInequalities,
        Command::VerifyUniqueness,
        Command::Norms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::RunScheme => "run-scheme",
            Command::CheckInequalities => "check-inequalities",
            Command::VerifyUniqueness => "verify-uniqueness",
            Command::Norms => "norms",
        }
    }

    fn keys(self) -> &'static [Key] {
        match self {
            Command::RunScheme => RUN_SCHEME,
            Command::CheckInequalities => CHECK_INEQUALITIES,
            Command::VerifyUniqueness => VERIFY_UNIQUENESS,
            Command::Norms => NORMS,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                format!(
                    "unknown command {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// A typed manifest value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Text(String),
    Auto,
    Floats(Vec<f64>),
    Names(Vec<String>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x}"),
            Value::Int(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
            Value::Auto => f.write_str("auto"),
            Value::Floats(v) => {
                let s: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&s.join(", "))
            }
            Value::Names(v) => f.write_str(&v.join(", ")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Float,
    Int,
    FloatOrAuto,
    Text,
    Choice(&'static [&'static str]),
    Floats,
    Names(&'static [&'static str]),
}

struct Key {
    name: &'static str,
    kind: Kind,
    default: Option<&'static str>,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>) -> Key {
    Key {
        name,
        kind,
        default,
    }
}

const REGIMES: &[&str] = &["alpha-ge1", "alpha-lt1"];
const FLAVORS: &[&str] = &["homogeneous", "inhomogeneous"];
const CHECKS: &[&str] = &["bernstein", "cancellation", "triple", "product-law"];
const TARGETS: &[&str] = &["u", "b", "both"];

const SCHEME_KEYS: [Key; 17] = [
    key("regime", Kind::Choice(REGIMES), None),
    key("alpha", Kind::Float, None),
    key("nu", Kind::Float, Some("1")),
    key("d", Kind::Int, Some("2")),
    key("n", Kind::Int, Some("64")),
    key("T", Kind::FloatOrAuto, Some("auto")),
    key("dt", Kind::FloatOrAuto, Some("auto")),
    key("n_iter", Kind::Int, Some("6")),
    key("sigma", Kind::Float, None),
    key("delta", Kind::Float, Some("0.1")),
    key("initial_data", Kind::Text, Some("random-band(0,1,0.05)")),
    key("magnetic_scale", Kind::Float, Some("1")),
    key("t_max", Kind::Float, Some("1")),
    key("constant", Kind::FloatOrAuto, Some("auto")),
    key("ensemble", Kind::Int, Some("20")),
    key("per_shell", Kind::Int, Some("4")),
    key("stop_below", Kind::Float, None),
];

const RUN_SCHEME: &[Key] = &SCHEME_KEYS;

const VERIFY_UNIQUENESS: &[Key] = &[
    key("regime", Kind::Choice(REGIMES), None),
    key("alpha", Kind::Float, None),
    key("nu", Kind::Float, Some("1")),
    key("d", Kind::Int, Some("2")),
    key("n", Kind::Int, Some("64")),
    key("T", Kind::FloatOrAuto, Some("auto")),
    key("dt", Kind::FloatOrAuto, Some("auto")),
    key("n_iter", Kind::Int, Some("40")),
    key("sigma", Kind::Float, None),
    key("delta", Kind::Float, Some("0.1")),
    key("initial_data", Kind::Text, Some("random-band(0,1,0.05)")),
    key("magnetic_scale", Kind::Float, Some("1")),
    key("t_max", Kind::Float, Some("1")),
    key("constant", Kind::FloatOrAuto, Some("auto")),
    key("ensemble", Kind::Int, Some("20")),
    key("per_shell", Kind::Int, Some("4")),
    key("perturbation", Kind::Text, Some("none")),
    key("perturb", Kind::Choice(TARGETS), Some("u")),
];

const CHECK_INEQUALITIES: &[Key] = &[
    key("d", Kind::Int, Some("2")),
    key("n", Kind::Int, Some("64")),
    key(
        "checks",
        Kind::Names(CHECKS),
        Some("bernstein, cancellation, triple, product-law"),
    ),
    key("members", Kind::Int, Some("100")),
    key("bernstein_alphas", Kind::Floats, Some("0, 0.5, 1, 1.5")),
    key("triple_broadband", Kind::Int, Some("20")),
    key("triple_per_shell", Kind::Int, Some("4")),
    key("s1", Kind::Float, Some("0.5")),
    key("s2", Kind::Float, Some("0.5")),
    key("p", Kind::Float, Some("2")),
];

const NORMS: &[Key] = &[
    key("d", Kind::Int, Some("2")),
    key("n", Kind::Int, Some("64")),
    key("initial_data", Kind::Text, Some("random-band(0,1,0.05)")),
    key("magnetic_scale", Kind::Float, Some("1")),
    key("s", Kind::Float, Some("0")),
    key("p", Kind::Float, Some("2")),
    key("q", Kind::Float, Some("1")),
    key("flavor", Kind::Choice(FLAVORS), Some("homogeneous")),
];

/// One problem found in a manifest, tied to a line when it has one.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ManifestIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestError {
    pub issues: Vec<ManifestIssue>,
}

impl ManifestError {
    fn single(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            issues: vec![ManifestIssue {
                line,
                message: message.into(),
            }],
        }
    }
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ManifestError {}

/// A validated manifest with every default applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub command: Command,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    pub params: BTreeMap<String, Value>,
}

const DEFAULT_OUTPUT: &str = "fracmhd-out";

fn parse_value(kind: Kind, raw: &str) -> Result<Value, String> {
    let float = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("expected a number, found {s:?}"))
    };
    match kind {
        Kind::Float => float(raw).map(Value::Float),
        Kind::Int => raw
            .parse::<u64>()
            .map(Value::Int)
            .map_err(|_| format!("expected a non-negative integer, found {raw:?}")),
        Kind::FloatOrAuto if raw == "auto" => Ok(Value::Auto),
        Kind::FloatOrAuto => float(raw)
            .map(Value::Float)
            .map_err(|e| format!("{e} or \"auto\"")),
        Kind::Text if raw.is_empty() => Err("empty value".into()),
        Kind::Text => Ok(Value::Text(raw.to_string())),
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok(Value::Text(raw.to_string()))
            } else {
                Err(format!(
                    "expected one of {}, found {raw:?}",
                    options.join(", ")
                ))
            }
        }
        Kind::Floats => raw
            .split(',')
            .map(float)
            .collect::<Result<_, _>>()
            .map(Value::Floats),
        Kind::Names(options) => {
            let names: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
            for n in &names {
                if !options.contains(&n.as_str()) {
                    return Err(format!(
                        "unknown entry {n:?} (expected {})",
                        options.join(", ")
                    ));
                }
            }
            Ok(Value::Names(names))
        }
    }
}

impl Manifest {
    pub fn float(&self, name: &str) -> Option<f64> {
        match self.params.get(name) {
            Some(Value::Float(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn int(&self, name: &str) -> Option<u64> {
        match self.params.get(name) {
            Some(Value::Int(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn usize(&self, name: &str) -> Option<usize> {
        self.int(name).and_then(|x| usize::try_from(x).ok())
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        match self.params.get(name) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn floats(&self, name: &str) -> Option<&[f64]> {
        match self.params.get(name) {
            Some(Value::Floats(v)) => Some(v),
            _ => None,
        }
    }

    pub fn names(&self, name: &str) -> Option<&[String]> {
        match self.params.get(name) {
            Some(Value::Names(v)) => Some(v),
            _ => None,
        }
    }

    /// The scheme configuration of a `run-scheme` or `verify-uniqueness`
    /// manifest. `horizon` replaces `T = auto`; `dt = auto` becomes `T/256`.
    pub fn scheme_config(&self, horizon: Option<f64>) -> Option<SchemeConfig> {
        let alpha = self.float("alpha")?;
        let t = self.float("T").or(horizon)?;
        let mut cfg = SchemeConfig::new(
            alpha,
            self.float("nu")?,
            self.usize("d")?,
            self.usize("n")?,
            t,
            self.usize("n_iter")?,
        );
        if let Some(dt) = self.float("dt") {
            cfg = cfg.with_dt(dt);
        }
        if let Some(s) = self.float("sigma") {
            cfg = cfg.with_sigma(s);
        }
        if let Some(r) = self.text("regime") {
            cfg.regime = r.parse().ok()?;
        }
        Some(cfg)
    }

    /// Serialize in canonical order; parsing the result gives back `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command = {}\n", self.command));
        out.push_str(&format!("output_dir = {}\n", self.output_dir.display()));
        out.push_str(&format!("seed = {}\n", self.seed));
        if let Some(t) = self.threads {
            out.push_str(&format!("threads = {t}\n"));
        }
        for k in self.command.keys() {
            if let Some(v) = self.params.get(k.name) {
                out.push_str(&format!("{} = {v}\n", k.name));
            }
        }
        out
    }
}

struct Entry {
    line: usize,
    value: String,
}

/// Parse and validate a manifest.
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let mut issues = Vec::new();
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            issues.push(ManifestIssue {
                line: Some(line),
                message: format!("expected `key = value`, found {content:?}"),
            });
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if let Some(prev) = entries.get(k) {
            issues.push(ManifestIssue {
                line: Some(line),
                message: format!("duplicate key `{k}` (first set on line {})", prev.line),
            });
            continue;
        }
        entries.insert(
            k.to_string(),
            Entry {
                line,
                value: v.to_string(),
            },
        );
    }
    let line_of = |k: &str| entries.get(k).map(|e| e.line);

    let command = match entries.get("command") {
        None => {
            issues.push(ManifestIssue {
                line: None,
                message: "missing key `command`".into(),
            });
            None
        }
        Some(e) => match e.value.parse::<Command>() {
            Ok(c) => Some(c),
            Err(m) => {
                issues.push(ManifestIssue {
                    line: Some(e.line),
                    message: m,
                });
                None
            }
        },
    };
    let Some(command) = command else {
        return Err(ManifestError { issues });
    };

    let mut seed = 0;
    if let Some(e) = entries.get("seed") {
        match e.value.parse() {
            Ok(s) => seed = s,
            Err(_) => issues.push(ManifestIssue {
                line: Some(e.line),
                message: format!("`seed` must be an unsigned integer, found {:?}", e.value),
            }),
        }
    }
    let mut threads = None;
    if let Some(e) = entries.get("threads") {
        match e.value.parse::<usize>() {
            Ok(t) if t > 0 => threads = Some(t),
            _ => issues.push(ManifestIssue {
                line: Some(e.line),
                message: format!("`threads` must be a positive integer, found {:?}", e.value),
            }),
        }
    }
    let output_dir = entries.get("output_dir").map_or_else(
        || PathBuf::from(DEFAULT_OUTPUT),
        |e| PathBuf::from(&e.value),
    );

    let keys = command.keys();
    let mut params = BTreeMap::new();
    for (name, e) in &entries {
        if matches!(name.as_str(), "command" | "seed" | "threads" | "output_dir") {
            continue;
        }
        match keys.iter().find(|k| k.name == name) {
            None => issues.push(ManifestIssue {
                line: Some(e.line),
                message: format!("unknown key `{name}` for {command}"),
            }),
            Some(k) => match parse_value(k.kind, &e.value) {
                Ok(v) => {
                    params.insert(name.clone(), v);
                }
                Err(m) => issues.push(ManifestIssue {
                    line: Some(e.line),
                    message: format!("`{name}`: {m}"),
                }),
            },
        }
    }
    for k in keys {
        if !params.contains_key(k.name) && !entries.contains_key(k.name) {
            if let Some(d) = k.default {
                params.insert(
                    k.name.to_string(),
                    parse_value(k.kind, d).expect("valid default"),
                );
            }
        }
    }
    if !issues.is_empty() {
        return Err(ManifestError { issues });
    }
    let m = Manifest {
        command,
        output_dir,
        seed,
        threads,
        params,
    };
    let issues = validate(&m, &line_of);
    if issues.is_empty() {
        Ok(m)
    } else {
        Err(ManifestError { issues })
    }
}

fn validate(m: &Manifest, line_of: &dyn Fn(&str) -> Option<usize>) -> Vec<ManifestIssue> {
    let mut issues = Vec::new();
    let mut fail = |k: &str, message: String| {
        issues.push(ManifestIssue {
            line: line_of(k),
            message,
        })
    };
    let positive = |fail: &mut dyn FnMut(&str, String), k: &str| {
        if let Some(x) = m.float(k) {
            if !(x > 0.0 && x.is_finite()) {
                fail(k, format!("`{k}` must be positive and finite, found {x}"));
            }
        }
    };
    let at_least_one = |fail: &mut dyn FnMut(&str, String), k: &str| {
        if m.int(k) == Some(0) {
            fail(k, format!("`{k}` must be at least 1"));
        }
    };
    let d = m.usize("d").unwrap_or(2);
    let n = m.usize("n").unwrap_or(0);
    let grid = match Grid::new(d, n) {
        Ok(g) if (2..=3).contains(&d) => Some(g),
        Ok(_) => {
            fail("d", format!("dimension {d} is not 2 or 3"));
            None
        }
        Err(e) => {
            fail("n", e.to_string());
            None
        }
    };

    match m.command {
        Command::RunScheme | Command::VerifyUniqueness => {
            if m.float("alpha").is_none() {
                fail("alpha", "missing key `alpha`".into());
                return issues;
            }
            for k in ["nu", "t_max", "stop_below"] {
                positive(&mut fail, k);
            }
            for k in ["T", "dt", "constant"] {
                positive(&mut fail, k);
            }
            for k in ["n_iter", "ensemble", "per_shell"] {
                at_least_one(&mut fail, k);
            }
            let delta = m.float("delta").unwrap_or(0.1);
            if !(delta > 0.0 && delta < 1.0) {
                fail(
                    "delta",
                    format!("`delta` must lie in (0, 1), found {delta}"),
                );
            }
            let scale = m.float("magnetic_scale").unwrap_or(1.0);
            if !(scale >= 0.0 && scale.is_finite()) {
                fail(
                    "magnetic_scale",
                    format!("`magnetic_scale` must be >= 0, found {scale}"),
                );
            }
            if let Some(cfg) = m.scheme_config(m.float("t_max")) {
                if let Err(e) = cfg.validate() {
                    let msg = e.to_string();
                    let named = ["regime", "dt", "T", "nu", "n_iter", "d", "n"]
                        .into_iter()
                        .find(|k| msg.contains(&format!("`{k}`")));
                    let k = if msg.contains("sigma") && line_of("sigma").is_some() {
                        "sigma"
                    } else if msg.contains("regime") {
                        "regime"
                    } else {
                        named.unwrap_or("alpha")
                    };
                    fail(k, msg);
                }
            }
            if let (Some(g), Some(text)) = (grid, m.text("initial_data")) {
                check_initial_data(text, g, &mut fail);
            }
            if m.command == Command::VerifyUniqueness {
                if let Some(p) = m.text("perturbation") {
                    if let Err(e) = Perturbation::parse(p, d) {
                        fail("perturbation", e);
                    }
                }
            }
        }
        Command::CheckInequalities => {
            for k in ["members", "triple_broadband", "triple_per_shell"] {
                at_least_one(&mut fail, k);
            }
            if let Some(alphas) = m.floats("bernstein_alphas") {
                if alphas.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                    fail(
                        "bernstein_alphas",
                        "every Bernstein alpha must be finite and >= 0".into(),
                    );
                }
            }
            let wants_product = m
                .names("checks")
                .is_some_and(|c| c.iter().any(|x| x == "product-law"));
            if wants_product {
                let (s1, s2, p) = (
                    m.float("s1").unwrap_or(0.0),
                    m.float("s2").unwrap_or(0.0),
                    m.float("p").unwrap_or(2.0),
                );
                if !(p >= 1.0) {
                    fail("p", format!("`p` must be >= 1, found {p}"));
                } else if let Err(e) = product_law_hypotheses(d, s1, s2, p) {
                    let msg = e.to_string();
                    let k = if msg.contains("s1 + s2") {
                        ["s1", "s2", "p"]
                            .into_iter()
                            .find(|k| line_of(k).is_some())
                            .unwrap_or("checks")
                    } else if msg.contains(": s2 =") {
                        "s2"
                    } else {
                        "s1"
                    };
                    fail(k, msg);
                }
            }
        }
        Command::Norms => {
            for k in ["p", "q"] {
                if let Some(x) = m.float(k) {
                    if !(x >= 1.0) {
                        fail(k, format!("`{k}` must be >= 1 (or inf), found {x}"));
                    }
                }
            }
            if m.float("s").is_some_and(|s| !s.is_finite()) {
                fail("s", "`s` must be finite".into());
            }
            if let (Some(g), Some(text)) = (grid, m.text("initial_data")) {
                check_initial_data(text, g, &mut fail);
            }
        }
    }
    issues
}

/// Presets are checked against the grid; anything else is a snapshot path,
/// checked when it is read.
fn check_initial_data(text: &str, grid: Grid, fail: &mut dyn FnMut(&str, String)) {
    if !looks_like_preset(text) {
        return;
    }
    match text.parse::<Preset>() {
        Err(e) => fail("initial_data", e.to_string()),
        Ok(p) => {
            if let Err(e) = preset_fields(&p, grid, 1.0, 0) {
                fail("initial_data", e.to_string());
            }
        }
    }
}

pub fn looks_like_preset(text: &str) -> bool {
    let name = text.split('(').next().unwrap_or("").trim();
    text.contains('(') || matches!(name, "taylor-green" | "random-band" | "single-mode")
}

/// A change of initial data for a uniqueness pair.
#[derive(Clone, Debug, PartialEq)]
pub enum Perturbation {
    None,
    Mode { k: Vec<i64>, eps: f64 },
}

impl Perturbation {
    /// `none` or `mode(k1,...,kd,eps)`.
    pub fn parse(text: &str, d: usize) -> Result<Self, String> {
        let text = text.trim();
        if text == "none" {
            return Ok(Perturbation::None);
        }
        let inner = text
            .strip_prefix("mode(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| {
                format!("perturbation {text:?} is neither `none` nor `mode(k1,...,kd,eps)`")
            })?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != d + 1 {
            return Err(format!(
                "perturbation {text:?} needs {d} wave numbers and an amplitude"
            ));
        }
        let k = parts[..d]
            .iter()
            .map(|s| {
                s.parse::<i64>()
                    .map_err(|_| format!("wave number {s:?} is not an integer"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let eps: f64 = parts[d]
            .parse()
            .map_err(|_| format!("amplitude {:?} is not a number", parts[d]))?;
        if k.iter().all(|x| *x == 0) {
            return Err("a mode perturbation needs a nonzero wave vector".into());
        }
        if !eps.is_finite() {
            return Err(format!("amplitude {eps} must be finite"));
        }
        Ok(Perturbation::Mode { k, eps })
    }
}

impl From<ManifestIssue> for ManifestError {
    fn from(issue: ManifestIssue) -> Self {
        Self {
            issues: vec![issue],
        }
    }
}

/// A manifest problem found only at run time, such as an unreadable snapshot.
pub fn runtime_issue(message: impl Into<String>) -> ManifestError {
    ManifestError::single(None, message)
}
