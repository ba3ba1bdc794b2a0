//! Scenario files (TOML) and the declarations they contain.
//!
//! Signals, densities, forcings and nonlinearities are written either as a
//! short string (`"sine:0.5,1"`, `"exp-left"`) or as a table with a `kind`
//! key. Shape errors surface during deserialisation so the TOML parser can
//! attach line numbers; file references are resolved later, relative to the
//! directory of the scenario file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use stepanov_core::fixedpoint::{SolverConfig, TimeGrid};
use stepanov_core::funcspace::{GridSignal, Harmonic};
use stepanov_core::measure::DensityTable;
use stepanov_core::nonlinearity::PointwiseMap;
use stepanov_core::{Forcing, Geometry, MeasureDensity, NonlinearitySpec, Signal, SpaceNorm, StepanovExponent};
use toml::{Table, Value};

use crate::error::CliError;

/// Reads and parses a scenario file; parse errors carry line numbers.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.to_string().trim_end())))
}

/// Reads an optional scenario file, falling back to the empty scenario.
pub fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    path.map_or_else(|| Ok(T::default()), load)
}

/// Directory against which file references of a scenario resolve.
pub fn base_dir(config: Option<&Path>) -> PathBuf {
    config
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve(base: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        base.join(file)
    }
}

pub fn required<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing `{key}` (give it as a flag or a scenario key)")))
}

fn number(v: &Value, what: &str) -> Result<f64, String> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(format!("{what} must be a number, got {}", other.type_str())),
    }
}

fn numbers(v: &Value, what: &str) -> Result<Vec<f64>, String> {
    match v {
        Value::Array(a) => a.iter().map(|x| number(x, what)).collect(),
        other => Err(format!("{what} must be an array of numbers, got {}", other.type_str())),
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("{what}: `{s}` is not a number")))
        .collect()
}

/// Consumes the keys of a declaration table and rejects leftovers.
struct Fields {
    kind: String,
    table: Table,
}

impl Fields {
    fn new(table: &Table, what: &str) -> Result<Self, String> {
        let mut table = table.clone();
        let kind = match table.remove("kind") {
            Some(Value::String(s)) => s,
            Some(other) => return Err(format!("{what} `kind` must be a string, got {}", other.type_str())),
            None => return Err(format!("{what} table needs a `kind` key")),
        };
        Ok(Self { kind, table })
    }

    fn take(&mut self, key: &str) -> Result<Value, String> {
        self.table
            .remove(key)
            .ok_or_else(|| format!("`{}` needs the key `{key}`", self.kind))
    }

    fn num(&mut self, key: &str) -> Result<f64, String> {
        let v = self.take(key)?;
        number(&v, key)
    }

    fn num_or(&mut self, key: &str, default: f64) -> Result<f64, String> {
        match self.table.remove(key) {
            Some(v) => number(&v, key),
            None => Ok(default),
        }
    }

    fn string(&mut self, key: &str) -> Result<String, String> {
        match self.take(key)? {
            Value::String(s) => Ok(s),
            other => Err(format!("`{key}` must be a string, got {}", other.type_str())),
        }
    }

    fn finish(self) -> Result<(), String> {
        match self.table.keys().next() {
            Some(k) => Err(format!("unknown key `{k}` for kind `{}`", self.kind)),
            None => Ok(()),
        }
    }
}

/// A declared signal before file references are loaded.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "Value")]
pub enum SignalDecl {
    Constant(f64),
    Harmonics { offset: f64, terms: Vec<(f64, f64, f64)> },
    Psi1 { alpha: f64, beta: f64 },
    ArctanShift,
    SpikeTrain { depth: u32, radius: f64 },
    Samples(PathBuf),
    Sum(Vec<SignalDecl>),
    Scaled(f64, Box<SignalDecl>),
    Shifted(f64, Box<SignalDecl>),
}

impl SignalDecl {
    /// Parses the short form: terms joined by `+`, each `tag` or `tag:args`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let terms: Vec<&str> = text.split('+').map(str::trim).collect();
        if terms.len() > 1 {
            return terms.into_iter().map(Self::parse_term).collect::<Result<_, _>>().map(SignalDecl::Sum);
        }
        Self::parse_term(terms[0])
    }

    fn parse_term(text: &str) -> Result<Self, String> {
        let (tag, args) = match text.split_once(':') {
            Some((t, a)) => (t.trim(), Some(a.trim())),
            None => (text, None),
        };
        let nums = |n: usize| -> Result<Vec<f64>, String> {
            let a = args.ok_or_else(|| format!("signal `{tag}` needs {n} argument(s), as `{tag}:...`"))?;
            let v = parse_list(a, tag)?;
            if v.len() != n {
                return Err(format!("signal `{tag}` takes {n} argument(s), got {}", v.len()));
            }
            Ok(v)
        };
        Ok(match tag {
            "constant" => SignalDecl::Constant(nums(1)?[0]),
            "sine" | "sin" | "cosine" | "cos" => {
                let (amplitude, omega) = match args {
                    None => (1.0, 1.0),
                    Some(_) => {
                        let v = nums(2)?;
                        (v[0], v[1])
                    }
                };
                let phase = if tag.starts_with('c') { std::f64::consts::FRAC_PI_2 } else { 0.0 };
                SignalDecl::Harmonics {
                    offset: 0.0,
                    terms: vec![(amplitude, omega, phase)],
                }
            }
            "psi1" => {
                let v = nums(2)?;
                SignalDecl::Psi1 { alpha: v[0], beta: v[1] }
            }
            "arctan-shift" | "phi2" => SignalDecl::ArctanShift,
            "spike-train" | "phi1" => {
                let v = nums(2)?;
                SignalDecl::SpikeTrain {
                    depth: depth(v[0])?,
                    radius: v[1],
                }
            }
            "samples" => SignalDecl::Samples(PathBuf::from(args.ok_or("`samples` needs a file, as `samples:path`")?)),
            other => {
                if let Ok(c) = other.parse::<f64>() {
                    SignalDecl::Constant(c)
                } else {
                    return Err(format!("unknown signal `{other}`"));
                }
            }
        })
    }

    fn from_table(table: &Table) -> Result<Self, String> {
        let mut f = Fields::new(table, "signal")?;
        let decl = match f.kind.as_str() {
            "constant" => SignalDecl::Constant(f.num("value")?),
            "sine" | "cosine" => {
                let amplitude = f.num_or("amplitude", 1.0)?;
                let omega = f.num_or("omega", 1.0)?;
                let shift = if f.kind == "cosine" { std::f64::consts::FRAC_PI_2 } else { 0.0 };
                let phase = f.num_or("phase", 0.0)? + shift;
                SignalDecl::Harmonics {
                    offset: 0.0,
                    terms: vec![(amplitude, omega, phase)],
                }
            }
            "quasi-periodic" => {
                let offset = f.num_or("offset", 0.0)?;
                let terms = match f.take("terms")? {
                    Value::Array(items) => items
                        .iter()
                        .map(|item| {
                            let Value::Table(t) = item else {
                                return Err("each quasi-periodic term is a table {amplitude, omega, phase}".to_string());
                            };
                            let mut g = Fields {
                                kind: "quasi-periodic term".into(),
                                table: t.clone(),
                            };
                            let term = (g.num("amplitude")?, g.num("omega")?, g.num_or("phase", 0.0)?);
                            g.finish()?;
                            Ok(term)
                        })
                        .collect::<Result<Vec<_>, String>>()?,
                    other => return Err(format!("`terms` must be an array, got {}", other.type_str())),
                };
                SignalDecl::Harmonics { offset, terms }
            }
            "psi1" => SignalDecl::Psi1 {
                alpha: f.num("alpha")?,
                beta: f.num("beta")?,
            },
            "arctan-shift" => SignalDecl::ArctanShift,
            "spike-train" => SignalDecl::SpikeTrain {
                depth: depth(f.num("depth")?)?,
                radius: f.num("radius")?,
            },
            "samples" => SignalDecl::Samples(PathBuf::from(f.string("file")?)),
            "sum" => match f.take("terms")? {
                Value::Array(items) => SignalDecl::Sum(items.into_iter().map(SignalDecl::try_from).collect::<Result<_, _>>()?),
                other => return Err(format!("`terms` must be an array, got {}", other.type_str())),
            },
            "scaled" => {
                let factor = f.num("factor")?;
                SignalDecl::Scaled(factor, Box::new(SignalDecl::try_from(f.take("signal")?)?))
            }
            "shifted" => {
                let shift = f.num("shift")?;
                SignalDecl::Shifted(shift, Box::new(SignalDecl::try_from(f.take("signal")?)?))
            }
            other => return Err(format!("unknown signal kind `{other}`")),
        };
        f.finish()?;
        Ok(decl)
    }

    pub fn build(&self, base: &Path) -> Result<Signal, CliError> {
        Ok(match self {
            SignalDecl::Constant(c) => Signal::Constant(*c),
            SignalDecl::Harmonics { offset, terms } => Signal::QuasiPeriodic {
                offset: *offset,
                terms: terms
                    .iter()
                    .map(|&(amplitude, omega, phase)| Harmonic { amplitude, omega, phase })
                    .collect(),
            },
            SignalDecl::Psi1 { alpha, beta } => Signal::psi1(*alpha, *beta)?,
            SignalDecl::ArctanShift => Signal::ArctanShift,
            SignalDecl::SpikeTrain { depth, radius } => Signal::spike_train(*depth, *radius)?,
            SignalDecl::Samples(file) => Signal::Grid(GridSignal::from_file(&resolve(base, file))?),
            SignalDecl::Sum(terms) => Signal::Sum(terms.iter().map(|t| t.build(base)).collect::<Result<_, _>>()?),
            SignalDecl::Scaled(c, s) => s.build(base)?.scaled(*c),
            SignalDecl::Shifted(tau, s) => s.build(base)?.shifted(*tau),
        })
    }
}

fn depth(v: f64) -> Result<u32, String> {
    if v.fract() == 0.0 && (1.0..=12.0).contains(&v) {
        Ok(v as u32)
    } else {
        Err(format!("spike-train depth must be an integer in 1..=12, got {v}"))
    }
}

impl TryFrom<Value> for SignalDecl {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, String> {
        match v {
            Value::String(s) => SignalDecl::parse(&s),
            Value::Float(_) | Value::Integer(_) => Ok(SignalDecl::Constant(number(&v, "signal")?)),
            Value::Table(t) => SignalDecl::from_table(&t),
            other => Err(format!("a signal is a string, number or table, got {}", other.type_str())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "Value")]
pub enum DensityDecl {
    Tag(String),
    Table { file: PathBuf, quasi_invariant: bool },
    Inline { breakpoints: Vec<f64>, values: Vec<f64>, quasi_invariant: bool },
}

impl DensityDecl {
    pub fn parse(text: &str) -> Result<Self, String> {
        match text.split_once(':') {
            Some(("table", file)) => Ok(DensityDecl::Table {
                file: PathBuf::from(file),
                quasi_invariant: false,
            }),
            _ => {
                MeasureDensity::from_tag(text).map_err(|e| e.to_string())?;
                Ok(DensityDecl::Tag(text.to_string()))
            }
        }
    }

    pub fn build(&self, base: &Path) -> Result<MeasureDensity, CliError> {
        Ok(match self {
            DensityDecl::Tag(t) => MeasureDensity::from_tag(t)?,
            DensityDecl::Table { file, quasi_invariant } => {
                let mut table = DensityTable::from_file(&resolve(base, file))?;
                table.asserted_quasi_invariant = *quasi_invariant;
                MeasureDensity::CustomTable(table)
            }
            DensityDecl::Inline {
                breakpoints,
                values,
                quasi_invariant,
            } => MeasureDensity::CustomTable(DensityTable::new(breakpoints.clone(), values.clone(), *quasi_invariant)?),
        })
    }
}

impl TryFrom<Value> for DensityDecl {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, String> {
        match v {
            Value::String(s) => DensityDecl::parse(&s),
            Value::Table(t) => {
                let mut f = Fields::new(&t, "density")?;
                let decl = match f.kind.as_str() {
                    "lebesgue" | "exp-left" => DensityDecl::Tag(f.kind.clone()),
                    "custom-table" => {
                        let quasi_invariant = match f.table.remove("quasi_invariant") {
                            Some(Value::Boolean(b)) => b,
                            Some(other) => return Err(format!("`quasi_invariant` must be a boolean, got {}", other.type_str())),
                            None => false,
                        };
                        if f.table.contains_key("file") {
                            DensityDecl::Table {
                                file: PathBuf::from(f.string("file")?),
                                quasi_invariant,
                            }
                        } else {
                            let breakpoints = numbers(&f.take("breakpoints")?, "breakpoints")?;
                            let values = numbers(&f.take("values")?, "values")?;
                            DensityDecl::Inline {
                                breakpoints,
                                values,
                                quasi_invariant,
                            }
                        }
                    }
                    other => return Err(format!("unknown density kind `{other}`")),
                };
                f.finish()?;
                Ok(decl)
            }
            other => Err(format!("a density is a string or table, got {}", other.type_str())),
        }
    }
}

/// Time signal times spatial profile.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "Value")]
pub struct ForcingDecl {
    pub signal: SignalDecl,
    pub profile: Vec<f64>,
}

impl ForcingDecl {
    pub fn build(&self, base: &Path) -> Result<Forcing, CliError> {
        Ok(Forcing::new(self.signal.build(base)?, self.profile.clone()))
    }
}

impl TryFrom<Value> for ForcingDecl {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, String> {
        match v {
            Value::Table(t) if t.contains_key("signal") => {
                let mut t = t;
                let signal = SignalDecl::try_from(t.remove("signal").expect("checked"))?;
                let profile = match t.remove("profile") {
                    Some(p) => numbers(&p, "profile")?,
                    None => vec![1.0],
                };
                if let Some(k) = t.keys().next() {
                    return Err(format!("unknown forcing key `{k}`"));
                }
                Ok(ForcingDecl { signal, profile })
            }
            other => Ok(ForcingDecl {
                signal: SignalDecl::try_from(other)?,
                profile: vec![1.0],
            }),
        }
    }
}

fn forcing_list(f: &mut Fields) -> Result<Vec<ForcingDecl>, String> {
    match f.table.remove("forcing") {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items.into_iter().map(ForcingDecl::try_from).collect(),
        Some(single) => Ok(vec![ForcingDecl::try_from(single)?]),
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "Value")]
pub enum NonlinearityDecl {
    Zero,
    MkSaturating { k: SignalDecl, r: Vec<f64>, forcing: Vec<ForcingDecl> },
    MkSaturatingV2 { k: SignalDecl, q: Vec<f64>, forcing: Vec<ForcingDecl> },
    Quadratic { b: SignalDecl, forcing: Vec<ForcingDecl> },
    Affine { a: SignalDecl, forcing: Vec<ForcingDecl> },
    /// Pointwise c(t)·x/(1 + |x|).
    SaturatingMap { c: SignalDecl },
}

impl NonlinearityDecl {
    pub fn build(&self, base: &Path) -> Result<NonlinearitySpec, CliError> {
        let forcings = |v: &[ForcingDecl]| v.iter().map(|f| f.build(base)).collect::<Result<Vec<_>, _>>();
        Ok(match self {
            NonlinearityDecl::Zero => NonlinearitySpec::Zero,
            NonlinearityDecl::MkSaturating { k, r, forcing } => NonlinearitySpec::MkSaturating {
                k: k.build(base)?,
                r: r.clone(),
                forcing: forcings(forcing)?,
            },
            NonlinearityDecl::MkSaturatingV2 { k, q, forcing } => NonlinearitySpec::MkSaturatingV2 {
                k: k.build(base)?,
                q: q.clone(),
                forcing: forcings(forcing)?,
            },
            NonlinearityDecl::Quadratic { b, forcing } => NonlinearitySpec::Quadratic {
                b: b.build(base)?,
                forcing: forcings(forcing)?,
            },
            NonlinearityDecl::Affine { a, forcing } => NonlinearitySpec::Affine {
                a: a.build(base)?,
                forcing: forcings(forcing)?,
            },
            NonlinearityDecl::SaturatingMap { c } => {
                let c = c.build(base)?;
                let coef = c.clone();
                let map = PointwiseMap::new("saturating-map", move |t, x| Ok(coef.value(t)? * x / (1.0 + x.abs())))
                    .with_lipschitz(c);
                NonlinearitySpec::Pointwise(map)
            }
        })
    }
}

impl TryFrom<Value> for NonlinearityDecl {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, String> {
        let table = match v {
            Value::String(s) if s == "zero" => return Ok(NonlinearityDecl::Zero),
            Value::Table(t) => t,
            other => return Err(format!("a nonlinearity is a table with a `kind`, got {}", other.type_str())),
        };
        let mut f = Fields::new(&table, "nonlinearity")?;
        let profile = |f: &mut Fields, key: &str| -> Result<Vec<f64>, String> {
            match f.table.remove(key) {
                Some(v) => numbers(&v, key),
                None => Ok(vec![1.0]),
            }
        };
        let decl = match f.kind.as_str() {
            "zero" => NonlinearityDecl::Zero,
            "mk-saturating" => NonlinearityDecl::MkSaturating {
                k: SignalDecl::try_from(f.take("k")?)?,
                r: profile(&mut f, "r")?,
                forcing: forcing_list(&mut f)?,
            },
            "mk-saturating-v2" => NonlinearityDecl::MkSaturatingV2 {
                k: SignalDecl::try_from(f.take("k")?)?,
                q: profile(&mut f, "q")?,
                forcing: forcing_list(&mut f)?,
            },
            "quadratic" => NonlinearityDecl::Quadratic {
                b: SignalDecl::try_from(f.take("b")?)?,
                forcing: forcing_list(&mut f)?,
            },
            "affine" => NonlinearityDecl::Affine {
                a: SignalDecl::try_from(f.take("a")?)?,
                forcing: forcing_list(&mut f)?,
            },
            "saturating-map" => NonlinearityDecl::SaturatingMap {
                c: SignalDecl::try_from(f.take("c")?)?,
            },
            other => return Err(format!("unknown nonlinearity kind `{other}`")),
        };
        f.finish()?;
        Ok(decl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDecl {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverDecl {
    pub tolerance: Option<f64>,
    pub max_iter: Option<usize>,
    pub t_trunc: Option<f64>,
    pub tail_tolerance: Option<f64>,
    pub quadrature_order: Option<usize>,
}

pub fn solver_config(grid: &GridDecl, solver: Option<&SolverDecl>) -> Result<SolverConfig, CliError> {
    let mut c = SolverConfig::new(TimeGrid::new(grid.t0, grid.t1, grid.h)?);
    if let Some(s) = solver {
        if let Some(v) = s.tolerance {
            c.tolerance = v;
        }
        if let Some(v) = s.max_iter {
            c.max_iterations = v;
        }
        c.t_trunc = s.t_trunc;
        c.tail_tolerance = s.tail_tolerance;
        if let Some(v) = s.quadrature_order {
            c.quadrature_order = v;
        }
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceDecl {
    Scalar,
    L2,
    Sup,
}

pub fn geometry(space: SpaceDecl, modes: usize) -> Result<Geometry, CliError> {
    Ok(match space {
        SpaceDecl::Scalar if modes == 1 => Geometry::Scalar,
        SpaceDecl::Scalar => return Err(CliError::Config(format!("space `scalar` needs one mode, got {modes}"))),
        SpaceDecl::L2 => Geometry::modal(modes, SpaceNorm::L2)?,
        SpaceDecl::Sup => Geometry::modal(modes, SpaceNorm::Sup)?,
    })
}

pub fn exponent(p: f64) -> Result<StepanovExponent, CliError> {
    Ok(StepanovExponent::new(p)?)
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDecl {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormScenario {
    pub name: Option<String>,
    pub signal: Option<SignalDecl>,
    pub p: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub step: Option<f64>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErgodicScenario {
    pub name: Option<String>,
    pub signal: Option<SignalDecl>,
    pub density: Option<DensityDecl>,
    pub p: Option<f64>,
    pub r: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationsScenario {
    pub name: Option<String>,
    pub signal: Option<SignalDecl>,
    pub epsilon: Option<f64>,
    pub p: Option<f64>,
    pub length: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub tau_step: Option<f64>,
    pub cell_step: Option<f64>,
    pub max_refined: Option<usize>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusScenario {
    pub name: Option<String>,
    pub signal: Option<SignalDecl>,
    pub window: Option<[f64; 2]>,
    pub delta: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlScenario {
    pub name: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub z: Option<Vec<f64>>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsScenario {
    pub name: Option<String>,
    pub gamma: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeScenario {
    pub name: Option<String>,
    pub map: Option<String>,
    pub range: Option<[f64; 2]>,
    pub grid: Option<usize>,
    pub epsilon: Option<Vec<f64>>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDecl {
    pub gamma: f64,
    /// Dirichlet spectrum k², k = 1..modes.
    pub modes: Option<usize>,
    pub spectrum: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracScenario {
    pub name: Option<String>,
    pub p: f64,
    pub space: Option<SpaceDecl>,
    pub kernel: KernelDecl,
    pub nonlinearity: NonlinearityDecl,
    pub initial: Option<SignalDecl>,
    pub grid: GridDecl,
    pub solver: Option<SolverDecl>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatScenario {
    pub name: Option<String>,
    pub gamma: f64,
    pub modes: usize,
    #[serde(default = "two")]
    pub p: f64,
    pub k: SignalDecl,
    pub r: Option<Vec<f64>>,
    #[serde(default)]
    pub forcing: Vec<ForcingDecl>,
    pub points: Option<usize>,
    pub grid: GridDecl,
    pub solver: Option<SolverDecl>,
    pub output: Option<OutputDecl>,
}

fn two() -> f64 {
    2.0
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyDecl {
    /// Constant rates; negative rates mark unstable modes.
    Autonomous { rates: Vec<f64> },
    /// Rates λ_k + a(t), with λ_k = k² when only `modes` is given.
    ScalarShifted {
        spectrum: Option<Vec<f64>>,
        modes: Option<usize>,
        a: SignalDecl,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomyDecl {
    #[serde(rename = "N", alias = "n")]
    pub n: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvoScenario {
    pub name: Option<String>,
    #[serde(default = "one")]
    pub p: f64,
    pub rho: f64,
    pub space: Option<SpaceDecl>,
    pub family: FamilyDecl,
    pub dichotomy: DichotomyDecl,
    /// Per-mode instability flags overriding the family default.
    pub split: Option<Vec<bool>>,
    pub nonlinearity: NonlinearityDecl,
    pub grid: GridDecl,
    pub solver: Option<SolverDecl>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LotkaScenario {
    pub name: Option<String>,
    pub a: SignalDecl,
    pub b: SignalDecl,
    #[serde(default)]
    pub c: Vec<ForcingDecl>,
    pub modes: usize,
    pub rho: f64,
    pub delta: Option<f64>,
    pub points: Option<usize>,
    pub grid: GridDecl,
    pub solver: Option<SolverDecl>,
    pub output: Option<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeScenario {
    pub name: Option<String>,
    pub nonlinearity: NonlinearityDecl,
    pub x: SignalDecl,
    pub x1: SignalDecl,
    pub density: DensityDecl,
    #[serde(default = "one")]
    pub p: f64,
    pub r: Vec<f64>,
    pub output: Option<OutputDecl>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_signals() {
        assert_eq!(SignalDecl::parse("constant:2").unwrap(), SignalDecl::Constant(2.0));
        assert_eq!(SignalDecl::parse("-1.5").unwrap(), SignalDecl::Constant(-1.5));
        assert_eq!(SignalDecl::parse("arctan-shift").unwrap(), SignalDecl::ArctanShift);
        let s = SignalDecl::parse("constant:2 + sine:0.5,1").unwrap().build(Path::new(".")).unwrap();
        assert!((s.value(1.0).unwrap() - (2.0 + 0.5 * 1f64.sin())).abs() < 1e-15);
        assert!(SignalDecl::parse("sine:1").is_err());
        assert!(SignalDecl::parse("wobble").is_err());
        assert!(SignalDecl::parse("spike-train:2.5,10").is_err());
    }

    #[test]
    fn table_signals() {
        let v: Value = toml::from_str::<Table>("s = { kind = \"cosine\", amplitude = 2, omega = 3 }").unwrap()["s"].clone();
        let s = SignalDecl::try_from(v).unwrap().build(Path::new(".")).unwrap();
        assert!((s.value(0.5).unwrap() - 2.0 * 1.5f64.cos()).abs() < 1e-15);
        let bad: Value = toml::from_str::<Table>("s = { kind = \"sine\", amp = 2 }").unwrap()["s"].clone();
        assert!(SignalDecl::try_from(bad).unwrap_err().contains("unknown key `amp`"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        #[derive(Debug, Deserialize)]
        #[allow(dead_code)]
        struct S {
            a: f64,
            signal: SignalDecl,
        }
        let err = toml::from_str::<S>("a = 1\n\nsignal = \"wobble\"\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("unknown signal `wobble`"), "{err}");
        let err = toml::from_str::<S>("a = 1\nsignal = [\n").unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn nonlinearity_tables() {
        let t: Table = toml::from_str(
            "[f]\nkind = \"mk-saturating\"\nk = 0.1\nr = [1.0, 0.0]\nforcing = [{ signal = \"cosine:0.1,1\", profile = [1.0, 0.0] }]\n",
        )
        .unwrap();
        let d = NonlinearityDecl::try_from(t["f"].clone()).unwrap();
        assert!(matches!(d, NonlinearityDecl::MkSaturating { ref r, ref forcing, .. } if r.len() == 2 && forcing.len() == 1));
        let t: Table = toml::from_str("[f]\nkind = \"mk-saturating\"\n").unwrap();
        assert!(NonlinearityDecl::try_from(t["f"].clone()).unwrap_err().contains("`k`"));
    }

    #[test]
    fn densities() {
        assert_eq!(DensityDecl::parse("exp-left").unwrap(), DensityDecl::Tag("exp-left".into()));
        assert!(DensityDecl::parse("gaussian").is_err());
        let t: Table = toml::from_str("d = { kind = \"custom-table\", breakpoints = [0, 1], values = [1, 2] }").unwrap();
        let d = DensityDecl::try_from(t["d"].clone()).unwrap().build(Path::new(".")).unwrap();
        assert_eq!(d.evaluate(1.5), 2.0);
    }
}
