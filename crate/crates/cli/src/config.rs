//! Run configuration: a TOML document with `--set` overrides applied before
//! validation.

use std::path::{Path, PathBuf};

use optomech::constants::Constants;
use optomech::decoherence::DecoherenceModel;
use optomech::feasibility::FeasibilityOptions;
use optomech::measurement::MethodChoice;
use optomech::oracle::OracleConfig;
use optomech::protocol::{Cavity, PhysParams};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::units::{parse_quantity, Dimension};
use crate::CliError;

/// Scalar fields of the `[params]` block.
pub const PARAM_FIELDS: &[(&str, Dimension)] = &[
    ("g0", Dimension::AngularFrequency),
    ("omega_m", Dimension::AngularFrequency),
    ("tau", Dimension::Time),
    ("beta", Dimension::Dimensionless),
    ("kappa", Dimension::AngularFrequency),
    ("mass", Dimension::Mass),
    ("q_m", Dimension::Dimensionless),
    ("temperature", Dimension::Temperature),
    ("n_th", Dimension::Dimensionless),
    ("dx", Dimension::Length),
    ("n_p", Dimension::Dimensionless),
];

/// Parameters a sweep axis may vary: the scalar fields plus `g_tau_beta`,
/// which rescales `g0` at fixed `τ` and `β`.
pub fn axis_dimension(name: &str) -> Option<Dimension> {
    if name == "g_tau_beta" {
        return Some(Dimension::Dimensionless);
    }
    PARAM_FIELDS.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
}

/// Set `name` on `params`; `name` must satisfy [`axis_dimension`].
pub fn set_param(params: &mut PhysParams, name: &str, value: f64) {
    match name {
        "g0" => params.g0 = value,
        "omega_m" => params.omega_m = value,
        "tau" => params.tau = value,
        "beta" => params.beta = value,
        "kappa" => params.kappa = value,
        "mass" => params.mass = value,
        "q_m" => params.q_m = value,
        "temperature" => params.temperature = value,
        "n_th" => params.n_th = value,
        "dx" => params.dx = value,
        "n_p" => params.n_p = value,
        "g_tau_beta" => *params = params.with_g_tau_beta(value),
        _ => unreachable!("unchecked parameter name {name}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Eid,
    Qg,
    Gic,
}

impl ModelName {
    pub const ALL: [ModelName; 3] = [ModelName::Eid, ModelName::Qg, ModelName::Gic];

    pub fn build(self, params: &PhysParams, constants: Constants) -> DecoherenceModel {
        let mut m = match self {
            ModelName::Eid => DecoherenceModel::eid_for(params),
            ModelName::Qg => DecoherenceModel::qg(),
            ModelName::Gic => DecoherenceModel::gic(),
        };
        m.constants = constants;
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Correlations,
    Visibility,
    Decay,
    Witness,
    Feasibility,
    Validate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSettings {
    pub enabled: bool,
    pub fock_cutoff: usize,
    /// sampled shots for `correlations`; 0 disables sampling
    pub shots: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            enabled: false,
            fock_cutoff: OracleConfig::default().fock_cutoff,
            shots: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let f = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.from + f * (self.to - self.from),
                    Scale::Log => (self.from.ln() + f * (self.to / self.from).ln()).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub target: Option<Target>,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: PhysParams,
    pub constants: Constants,
    pub models: Vec<ModelName>,
    pub method: MethodChoice,
    pub n_max: u32,
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
    pub seed: u64,
    pub oracle: OracleSettings,
    pub feasibility: FeasibilityOptions,
}

const TOP_LEVEL: &[&str] = &[
    "params",
    "constants",
    "models",
    "method",
    "n_max",
    "sweep",
    "output",
    "seed",
    "oracle",
    "feasibility",
];

fn table<'a>(v: &'a Value, path: &str) -> Result<&'a Table, CliError> {
    v.as_table()
        .ok_or_else(|| CliError::Config(format!("`{path}` must be a table")))
}

fn reject_unknown(t: &Table, allowed: &[&str], prefix: &str) -> Result<(), CliError> {
    match t.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(CliError::Config(format!("unknown key `{prefix}{k}`"))),
        None => Ok(()),
    }
}

fn quantity(v: &Value, dim: Dimension, path: &str) -> Result<f64, CliError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => parse_quantity(s, dim).map_err(|e| CliError::Config(format!("`{path}`: {e}"))),
        _ => Err(CliError::Config(format!("`{path}` must be a number or a quantity string"))),
    }
}

fn typed<T: serde::de::DeserializeOwned>(v: &Value, path: &str) -> Result<T, CliError> {
    v.clone()
        .try_into()
        .map_err(|e| CliError::Config(format!("`{path}`: {e}")))
}

fn parse_params(v: &Value) -> Result<PhysParams, CliError> {
    let t = table(v, "params")?;
    let mut allowed: Vec<&str> = PARAM_FIELDS.iter().map(|(n, _)| *n).collect();
    allowed.push("cavity");
    reject_unknown(t, &allowed, "params.")?;
    let mut p = PhysParams::reference_device();
    for (name, dim) in PARAM_FIELDS {
        let v = t
            .get(*name)
            .ok_or_else(|| CliError::Config(format!("missing required parameter `params.{name}`")))?;
        set_param(&mut p, name, quantity(v, *dim, &format!("params.{name}"))?);
    }
    p.cavity = match t.get("cavity") {
        None => None,
        Some(c) => {
            let ct = table(c, "params.cavity")?;
            reject_unknown(ct, &["omega_c", "length"], "params.cavity.")?;
            let get = |name: &str, dim| {
                ct.get(name)
                    .ok_or_else(|| CliError::Config(format!("missing required parameter `params.cavity.{name}`")))
                    .and_then(|v| quantity(v, dim, &format!("params.cavity.{name}")))
            };
            Some(Cavity {
                omega_c: get("omega_c", Dimension::Optical)?,
                length: get("length", Dimension::Length)?,
            })
        }
    };
    p.validate()?;
    Ok(p)
}

fn parse_sweep(v: &Value) -> Result<SweepConfig, CliError> {
    let t = table(v, "sweep")?;
    reject_unknown(t, &["target", "axes"], "sweep.")?;
    let target = t.get("target").map(|v| typed(v, "sweep.target")).transpose()?;
    let mut axes = Vec::new();
    let list = match t.get("axes") {
        Some(Value::Array(a)) => a.as_slice(),
        Some(_) => return Err(CliError::Config("`sweep.axes` must be an array of tables".into())),
        None => &[],
    };
    for (i, a) in list.iter().enumerate() {
        let path = format!("sweep.axes[{i}]");
        let at = table(a, &path)?;
        reject_unknown(at, &["name", "from", "to", "steps", "scale"], &format!("{path}."))?;
        let field = |k: &str| {
            at.get(k)
                .ok_or_else(|| CliError::Config(format!("missing `{path}.{k}`")))
        };
        let name: String = typed(field("name")?, &format!("{path}.name"))?;
        let dim = axis_dimension(&name)
            .ok_or_else(|| CliError::Config(format!("`{path}.name`: `{name}` is not a sweepable parameter")))?;
        let axis = Axis {
            from: quantity(field("from")?, dim, &format!("{path}.from"))?,
            to: quantity(field("to")?, dim, &format!("{path}.to"))?,
            steps: typed(field("steps")?, &format!("{path}.steps"))?,
            scale: at.get("scale").map(|v| typed(v, &format!("{path}.scale"))).transpose()?.unwrap_or_default(),
            name,
        };
        if axis.steps == 0 {
            return Err(CliError::Config(format!("`{path}.steps` must be >= 1")));
        }
        if axis.scale == Scale::Log && !(axis.from > 0.0 && axis.to > 0.0) {
            return Err(CliError::Config(format!("`{path}`: log axes need positive bounds")));
        }
        axes.push(axis);
    }
    Ok(SweepConfig { target, axes })
}

impl RunConfig {
    pub fn from_table(doc: &Table) -> Result<Self, CliError> {
        reject_unknown(doc, TOP_LEVEL, "")?;
        let params = parse_params(
            doc.get("params")
                .ok_or_else(|| CliError::Config("missing required block `[params]`".into()))?,
        )?;
        let constants: Constants = doc.get("constants").map(|v| typed(v, "constants")).transpose()?.unwrap_or_default();
        constants.validate()?;
        let cfg = RunConfig {
            params,
            constants,
            models: doc
                .get("models")
                .map(|v| typed(v, "models"))
                .transpose()?
                .unwrap_or_else(|| ModelName::ALL.to_vec()),
            method: doc.get("method").map(|v| typed(v, "method")).transpose()?.unwrap_or_default(),
            n_max: doc.get("n_max").map(|v| typed(v, "n_max")).transpose()?.unwrap_or(20),
            sweep: doc.get("sweep").map(parse_sweep).transpose()?,
            output: doc.get("output").map(|v| typed(v, "output")).transpose()?.unwrap_or_default(),
            seed: doc.get("seed").map(|v| typed(v, "seed")).transpose()?.unwrap_or(0),
            oracle: doc.get("oracle").map(|v| typed(v, "oracle")).transpose()?.unwrap_or_default(),
            feasibility: doc
                .get("feasibility")
                .map(|v| typed(v, "feasibility"))
                .transpose()?
                .unwrap_or_default(),
        };
        if cfg.oracle.enabled {
            OracleConfig::new(cfg.oracle.fock_cutoff)?;
        }
        if cfg.n_max == 0 {
            return Err(CliError::Config("`n_max` must be >= 1".into()));
        }
        Ok(cfg)
    }
}

/// Read `path` (or start from an empty document) and apply `overrides`.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            text.parse::<Table>()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Table::new(),
    };
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    RunConfig::from_table(&doc)
}

/// `name=value`; a bare parameter name means `params.name`. The value is
/// read as a TOML literal, falling back to a string.
pub fn apply_override(doc: &mut Table, text: &str) -> Result<(), CliError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set `{text}`: expected name=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let path: Vec<&str> = if !key.contains('.') && axis_dimension(key).is_some() && key != "g_tau_beta" {
        vec!["params", key]
    } else {
        key.split('.').collect()
    };
    let (last, parents) = path.split_last().expect("split yields at least one part");
    let mut cur = doc;
    for part in parents {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set `{key}`: `{part}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEVICE: &str = include_str!("../../../configs/device.toml");

    fn doc() -> Table {
        DEVICE.parse().unwrap()
    }

    #[test]
    fn device_config_matches_reference() {
        let cfg = RunConfig::from_table(&doc()).unwrap();
        let r = PhysParams::reference_device();
        let p = cfg.params;
        for (a, b) in [
            (p.g0, r.g0),
            (p.omega_m, r.omega_m),
            (p.tau, r.tau),
            (p.beta, r.beta),
            (p.kappa, r.kappa),
            (p.mass, r.mass),
            (p.q_m, r.q_m),
            (p.temperature, r.temperature),
            (p.n_p, r.n_p),
        ] {
            assert!((a / b - 1.0).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut d = doc();
        apply_override(&mut d, "params.colour=3").unwrap();
        let e = RunConfig::from_table(&d).unwrap_err().to_string();
        assert!(e.contains("params.colour"), "{e}");
        let mut d = doc();
        apply_override(&mut d, "oracle.cutoff=3").unwrap();
        assert!(RunConfig::from_table(&d).is_err());
        let mut d = doc();
        apply_override(&mut d, "extra=1").unwrap();
        assert!(RunConfig::from_table(&d).unwrap_err().to_string().contains("extra"));
    }

    #[test]
    fn missing_parameter_is_named() {
        let mut d = doc();
        d["params"].as_table_mut().unwrap().remove("kappa");
        let e = RunConfig::from_table(&d).unwrap_err().to_string();
        assert!(e.contains("params.kappa"), "{e}");
    }

    #[test]
    fn overrides() {
        let mut d = doc();
        apply_override(&mut d, "beta=200").unwrap();
        apply_override(&mut d, "params.temperature=20 mK").unwrap();
        apply_override(&mut d, "output.format=json").unwrap();
        apply_override(&mut d, "oracle.enabled=true").unwrap();
        let cfg = RunConfig::from_table(&d).unwrap();
        assert_eq!(cfg.params.beta, 200.0);
        assert!((cfg.params.temperature - 0.02).abs() < 1e-15);
        assert_eq!(cfg.output.format, Format::Json);
        assert!(cfg.oracle.enabled);
    }

    #[test]
    fn small_cutoff_rejected_when_oracle_enabled() {
        let mut d = doc();
        apply_override(&mut d, "oracle.fock_cutoff=8").unwrap();
        assert!(RunConfig::from_table(&d).is_ok());
        apply_override(&mut d, "oracle.enabled=true").unwrap();
        assert!(RunConfig::from_table(&d).is_err());
    }

    #[test]
    fn sweep_axes() {
        let mut d = doc();
        d.insert(
            "sweep".into(),
            r#"target = "witness"
               axes = [{ name = "g_tau_beta", from = 0.1, to = 10, steps = 3, scale = "log" },
                       { name = "temperature", from = "10 mK", to = "30 mK", steps = 3 }]"#
                .parse::<Table>()
                .unwrap()
                .into(),
        );
        let s = RunConfig::from_table(&d).unwrap().sweep.unwrap();
        assert_eq!(s.target, Some(Target::Witness));
        let v = s.axes[0].values();
        assert!((v[1] - 1.0).abs() < 1e-12 && (v[2] - 10.0).abs() < 1e-12);
        assert!((s.axes[1].values()[1] - 0.02).abs() < 1e-15);

        let mut bad = doc();
        bad.insert(
            "sweep".into(),
            r#"axes = [{ name = "colour", from = 0, to = 1, steps = 2 }]"#.parse::<Table>().unwrap().into(),
        );
        assert!(RunConfig::from_table(&bad).unwrap_err().to_string().contains("colour"));
    }
}
