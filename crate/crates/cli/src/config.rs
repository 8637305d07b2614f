//! Line-oriented `section.key = value` configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("{key}: {message}")]
    Semantic { key: String, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax {
        line,
        message: message.into(),
    }
}

fn semantic(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Semantic {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Verify,
    PhysicalMomentum,
    ManualAdmixture,
    GravityZb,
}

impl FromStr for ScenarioKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "verify" => Ok(Self::Verify),
            "physical_momentum" => Ok(Self::PhysicalMomentum),
            "manual_admixture" => Ok(Self::ManualAdmixture),
            "gravity_zb" => Ok(Self::GravityZb),
            _ => Err(()),
        }
    }
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Verify => "verify",
            Self::PhysicalMomentum => "physical_momentum",
            Self::ManualAdmixture => "manual_admixture",
            Self::GravityZb => "gravity_zb",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub side_length: f64,
    pub grid_points: usize,
    pub n_max: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockConfig {
    pub cap: usize,
    pub norm_tol: f64,
    pub tol: f64,
    pub null_tol: f64,
    /// Generators of a negation-closed mode subset; the full cube if absent.
    pub modes: Option<Vec<[i32; 3]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub p: [i32; 3],
    pub q: [i32; 3],
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub samples: usize,
    pub periods: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub fock: FockConfig,
    pub kind: ScenarioKind,
    pub params: ScenarioParams,
    pub time: TimeConfig,
    pub output_dir: PathBuf,
}

/// Default subset for scenarios that need a dense physical subspace.
pub const DEFAULT_SUBSET: [[i32; 3]; 2] = [[0, 0, 1], [1, 0, 0]];

const KEYS: &[&str] = &[
    "geometry.L",
    "geometry.N",
    "geometry.n_max",
    "fock.N_tot",
    "fock.norm_tol",
    "fock.tol",
    "fock.null_tol",
    "fock.modes",
    "scenario.kind",
    "scenario.p",
    "scenario.q",
    "scenario.theta",
    "scenario.alpha",
    "scenario.beta",
    "scenario.eps_h",
    "time.samples",
    "time.periods",
    "output.dir",
];

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits the text into `key -> (value, line)` without interpreting values.
fn tokenize(text: &str) -> Result<BTreeMap<String, (String, usize)>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(syntax(line, format!("expected `key = value`, found `{body}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if !key.contains('.') || !key.split('.').all(is_ident) {
            return Err(syntax(line, format!("malformed key `{key}` (expected section.name)")));
        }
        if value.is_empty() {
            return Err(syntax(line, format!("missing value for `{key}`")));
        }
        if !KEYS.contains(&key) {
            return Err(semantic(key, format!("unknown key (line {line})")));
        }
        if let Some((_, first)) = out.insert(key.to_string(), (value.to_string(), line)) {
            return Err(syntax(line, format!("duplicate key `{key}` (first set on line {first})")));
        }
    }
    Ok(out)
}

/// Parses `(a, b, c)` groups separated by optional commas. Components stay
/// real here so off-lattice entries surface as semantic errors.
fn parse_triples(value: &str, line: usize) -> Result<Vec<[f64; 3]>, ConfigError> {
    let mut out = Vec::new();
    let mut rest = value.trim();
    while !rest.is_empty() {
        let Some(inner) = rest.strip_prefix('(') else {
            return Err(syntax(line, format!("expected `(x, y, z)`, found `{rest}`")));
        };
        let Some((body, tail)) = inner.split_once(')') else {
            return Err(syntax(line, "unclosed `(`"));
        };
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(syntax(line, format!("expected three components in `({body})`")));
        }
        let mut v = [0.0; 3];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| syntax(line, format!("`{part}` is not a number")))?;
        }
        out.push(v);
        rest = tail.trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    if out.is_empty() {
        return Err(syntax(line, "empty vector list"));
    }
    Ok(out)
}

fn lattice_vector(key: &str, v: [f64; 3]) -> Result<[i32; 3], ConfigError> {
    if v.iter().any(|c| c.fract() != 0.0 || c.abs() > 1e6) {
        return Err(semantic(
            key,
            format!("({}, {}, {}) is off the reciprocal lattice (integer components required)", v[0], v[1], v[2]),
        ));
    }
    Ok(v.map(|c| c as i32))
}

struct Values(BTreeMap<String, (String, usize)>);

impl Values {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.0.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn number<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| syntax(line, format!("`{v}` is not a valid value for `{key}`"))),
        }
    }

    fn vector(&self, key: &str, default: [i32; 3]) -> Result<[i32; 3], ConfigError> {
        let Some((v, line)) = self.raw(key) else {
            return Ok(default);
        };
        match parse_triples(v, line)?.as_slice() {
            [one] => lattice_vector(key, *one),
            _ => Err(syntax(line, format!("`{key}` takes a single vector"))),
        }
    }
}

fn positive(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(semantic(key, format!("must be positive and finite, got {x}")))
    }
}

fn in_cutoff(n: [i32; 3], n_max: i32) -> bool {
    n != [0, 0, 0] && n.iter().all(|c| c.abs() <= n_max)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let values = Values(tokenize(text)?);

    let kind = match values.raw("scenario.kind") {
        None => return Err(semantic("scenario.kind", "scenario.kind required")),
        Some((v, line)) => v.parse::<ScenarioKind>().map_err(|()| {
            syntax(
                line,
                format!("unknown scenario `{v}` (verify, physical_momentum, manual_admixture, gravity_zb)"),
            )
        })?,
    };

    let geometry = GeometryConfig {
        side_length: positive("geometry.L", values.number("geometry.L", 2.0 * PI)?)?,
        grid_points: values.number("geometry.N", 8)?,
        n_max: values.number("geometry.n_max", 1)?,
    };
    if geometry.n_max < 1 {
        return Err(semantic("geometry.n_max", "must be at least 1"));
    }
    let needed = 2 * geometry.n_max as usize + 2;
    if geometry.grid_points < needed {
        return Err(semantic(
            "geometry.N",
            format!("{} points cannot integrate n_max = {} exactly (need >= {needed})", geometry.grid_points, geometry.n_max),
        ));
    }

    let modes = match values.raw("fock.modes") {
        None => None,
        Some((v, line)) => {
            let mut gens = Vec::new();
            for t in parse_triples(v, line)? {
                let n = lattice_vector("fock.modes", t)?;
                if !in_cutoff(n, geometry.n_max) {
                    return Err(semantic("fock.modes", format!("{n:?} is zero or outside the cutoff n_max = {}", geometry.n_max)));
                }
                gens.push(n);
            }
            Some(gens)
        }
    };
    let fock = FockConfig {
        cap: values.number("fock.N_tot", 2)?,
        norm_tol: positive("fock.norm_tol", values.number("fock.norm_tol", 1e-10)?)?,
        tol: positive("fock.tol", values.number("fock.tol", 1e-10)?)?,
        null_tol: positive("fock.null_tol", values.number("fock.null_tol", 1e-9)?)?,
        modes,
    };
    if !(1..=4).contains(&fock.cap) {
        return Err(semantic("fock.N_tot", format!("must lie in 1..=4, got {}", fock.cap)));
    }

    let default_p = match kind {
        ScenarioKind::GravityZb => [1, 0, 0],
        _ => [0, 0, 1],
    };
    let params = ScenarioParams {
        p: values.vector("scenario.p", default_p)?,
        q: values.vector("scenario.q", [0, 0, 1])?,
        theta: values.number("scenario.theta", 0.1)?,
        alpha: values.number("scenario.alpha", 0.8)?,
        beta: values.number("scenario.beta", 0.6)?,
        eps_h: values.number("scenario.eps_h", 1e-3)?,
    };
    let in_set = |n: [i32; 3]| match &fock.modes {
        None => in_cutoff(n, geometry.n_max),
        Some(gens) => gens.iter().any(|g| *g == n || g.map(|c| -c) == n),
    };
    if !params.theta.is_finite() {
        return Err(semantic("scenario.theta", "must be finite"));
    }
    if !(params.alpha.is_finite() && params.beta.is_finite()) || params.alpha == 0.0 && params.beta == 0.0 {
        return Err(semantic("scenario.alpha", "alpha and beta must be finite and not both zero"));
    }
    if !(params.eps_h.is_finite() && params.eps_h.abs() <= photon_zb::gravity::WEAK_FIELD_LIMIT) {
        return Err(semantic("scenario.eps_h", format!("{} outside the weak-field range |eps_h| <= 0.1", params.eps_h)));
    }
    match kind {
        ScenarioKind::ManualAdmixture if !in_set(params.p) => {
            return Err(semantic("scenario.p", format!("{:?} is not a configured mode", params.p)));
        }
        ScenarioKind::GravityZb => {
            if !in_set(params.p) {
                return Err(semantic("scenario.p", format!("{:?} is not a configured mode", params.p)));
            }
            if params.q == [0, 0, 0] {
                return Err(semantic("scenario.q", "perturbation wavevector must be nonzero"));
            }
            // the pair partner and every mode the perturbation couples it to
            if let Some(n) = photon_zb::gravity::pair_coupling_shell(params.p, params.q)
                .into_iter()
                .find(|n| !in_set(*n))
            {
                return Err(semantic(
                    "scenario.q",
                    format!(
                        "q = {:?} couples the pair to {n:?}, which is not a configured mode \
                         (raise geometry.n_max or list it in fock.modes)",
                        params.q
                    ),
                ));
            }
        }
        _ => {}
    }

    let time = TimeConfig {
        samples: values.number("time.samples", 256)?,
        periods: values.number("time.periods", 4)?,
    };
    if time.samples < 4 {
        return Err(semantic("time.samples", "need at least 4 samples"));
    }
    if time.periods == 0 {
        return Err(semantic("time.periods", "must be at least 1"));
    }
    let output_dir = PathBuf::from(values.raw("output.dir").map_or(".", |(v, _)| v));

    Ok(ScenarioConfig {
        geometry,
        fock,
        kind,
        params,
        time,
        output_dir,
    })
}
