//! Run configuration (TOML, strict keys) and the dataset CSV schema.
//!
//! Dataset files are canonical: header
//! `subject_id,product_id,treatment,block,switch_point,market_price`, rows sorted by
//! (subject, product, block with m before p), money with exactly two decimals, LF endings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audit::AuditGrid;
use crate::cohort::{is_cent_value, Block, Dataset, SubjectRecord, Treatment};
use crate::elicit::{Method, MplSpec, Scenario, ScenarioKind};
use crate::error::IoError;
use crate::model::{ModelSpec, UtilitySpec, WeightSpec};
use crate::regions::GridAxis;
use crate::stats::{AnalysisConfig, EqualValueRule, FixedEffects};

pub const DATASET_HEADER: &str = "subject_id,product_id,treatment,block,switch_point,market_price";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Check,
    Elicit,
    Simulate,
    Analyze,
    Regions,
}

impl Subcommand {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "check" => Some(Self::Check),
            "elicit" => Some(Self::Elicit),
            "simulate" => Some(Self::Simulate),
            "analyze" => Some(Self::Analyze),
            "regions" => Some(Self::Regions),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Check => "check",
            Self::Elicit => "elicit",
            Self::Simulate => "simulate",
            Self::Analyze => "analyze",
            Self::Regions => "regions",
        }
    }
}

/// Raw keys accepted in a config file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub subcommand: Option<String>,
    pub seed: Option<u64>,

    pub model: Option<String>,
    pub utility: Option<String>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub theta: Option<f64>,

    pub scenario: Option<String>,
    pub endowment: Option<f64>,
    pub extras: Option<Vec<f64>>,
    pub q: Option<f64>,
    pub method: Option<String>,
    pub tolerance: Option<f64>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_step: Option<f64>,

    pub audit_points: Option<usize>,
    pub audit_tolerance: Option<f64>,

    pub subjects: Option<usize>,
    pub mp_subjects: Option<usize>,
    pub noise_sd: Option<f64>,
    pub quality_min: Option<f64>,
    pub quality_max: Option<f64>,
    pub qualities: Option<Vec<f64>>,

    pub significance: Option<f64>,
    pub include_nonpositive: Option<bool>,
    pub equal_value_rule: Option<String>,
    pub outlier_cutoff: Option<f64>,
    pub fixed_effects: Option<String>,

    pub lq: Option<f64>,
    pub hq: Option<f64>,
    pub price_min: Option<f64>,
    pub price_max: Option<f64>,
    pub price_step: Option<f64>,

    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// Which scenario family a config names; endowment and extras are attached separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioChoice {
    M,
    Ignore,
    Separate,
    Combine,
}

impl ScenarioChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "m" | "m-money" => Some(Self::M),
            "ignore" | "p-ignore" => Some(Self::Ignore),
            "separate" | "p-separate" => Some(Self::Separate),
            "combine" | "p-combine" => Some(Self::Combine),
            _ => None,
        }
    }
}

/// Validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Option<Subcommand>,
    pub master_seed: u64,
    pub model: Option<ModelSpec>,
    pub scenario: Option<ScenarioChoice>,
    pub endowment: f64,
    pub extras: Vec<f64>,
    pub q: Option<f64>,
    pub method: Method,
    pub tolerance: f64,
    pub mpl: MplSpec,
    pub audit_grid: AuditGrid,
    pub subjects: usize,
    pub mp_subjects: usize,
    pub noise_sd: f64,
    pub quality_range: (f64, f64),
    pub qualities: Option<Vec<f64>>,
    pub analysis: AnalysisConfig,
    /// `None` runs every fixed-effect configuration.
    pub fixed_effects: Option<FixedEffects>,
    pub lq: Option<f64>,
    pub hq: Option<f64>,
    pub price_axis: GridAxis,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Scenario with endowment and extras attached; `default` applies when none is configured.
    pub fn scenario_or(&self, default: ScenarioChoice) -> Scenario {
        let kind = match self.scenario.unwrap_or(default) {
            ScenarioChoice::M => ScenarioKind::MMoney,
            ScenarioChoice::Ignore => ScenarioKind::PIgnore,
            ScenarioChoice::Separate => ScenarioKind::PSeparate {
                endowment: self.endowment,
            },
            ScenarioChoice::Combine => ScenarioKind::PCombine {
                endowment: self.endowment,
            },
        };
        Scenario::new(kind).with_extras(self.extras.clone())
    }
}

fn config_err(msg: impl Into<String>) -> IoError {
    IoError::Config(msg.into())
}

/// Builds a model from config keys. Parameters that the named family does not use are errors.
pub fn model_from_keys(raw: &RawConfig) -> Result<Option<ModelSpec>, IoError> {
    let Some(name) = raw.model.as_deref() else {
        let stray = [
            ("utility", raw.utility.is_some()),
            ("lambda", raw.lambda.is_some()),
            ("alpha", raw.alpha.is_some()),
            ("gamma", raw.gamma.is_some()),
            ("sigma", raw.sigma.is_some()),
            ("theta", raw.theta.is_some()),
        ];
        if let Some((key, _)) = stray.iter().find(|(_, set)| *set) {
            return Err(config_err(format!("`{key}` given without `model`")));
        }
        return Ok(None);
    };
    let (family, implied) = match name {
        "rn" => ("rn", None),
        "rn-linear" => ("rn", Some("linear")),
        "rn-kinked" => ("rn", Some("kinked")),
        "rn-power" => ("rn", Some("power")),
        "linear" | "pn" | "gpn" | "gpn-power" | "cc" | "ncc" => (name, None),
        other => return Err(config_err(format!("unknown model `{other}`"))),
    };
    let utility = match (implied, raw.utility.as_deref()) {
        (Some(i), Some(u)) if i != u => {
            return Err(config_err(format!("model `{name}` conflicts with utility `{u}`")))
        }
        (Some(i), _) => Some(i),
        (None, u) => u,
    };
    let mut used: Vec<&str> = Vec::new();
    let mut take = |key: &'static str, v: Option<f64>| {
        used.push(key);
        v
    };
    let require = |key: &str, v: Option<f64>| v.ok_or_else(|| config_err(format!("model `{name}` requires `{key}`")));

    let spec = match family {
        "rn" => {
            let gamma = take("gamma", raw.gamma).unwrap_or(0.0);
            let u = match utility.unwrap_or("linear") {
                "linear" => UtilitySpec::Linear,
                "kinked" => UtilitySpec::Kinked {
                    lambda: require("lambda", take("lambda", raw.lambda))?,
                },
                "power" => UtilitySpec::Power {
                    alpha: require("alpha", take("alpha", raw.alpha))?,
                },
                other => return Err(config_err(format!("unknown utility `{other}`"))),
            };
            ModelSpec::new(u, WeightSpec::RangeNorm { gamma })
        }
        "linear" => ModelSpec::new(UtilitySpec::Linear, WeightSpec::Constant),
        "pn" => Ok(ModelSpec::pn()),
        "gpn" => ModelSpec::gpn(take("sigma", raw.sigma).unwrap_or(1.0)),
        "gpn-power" => {
            let sigma = take("sigma", raw.sigma).unwrap_or(1.0);
            ModelSpec::gpn_power(sigma, require("alpha", take("alpha", raw.alpha))?)
        }
        "cc" => ModelSpec::cc(require("theta", take("theta", raw.theta))?),
        "ncc" => ModelSpec::ncc(require("theta", take("theta", raw.theta))?),
        _ => unreachable!("family names are matched above"),
    }
    .map_err(|e| config_err(e.to_string()))?;

    if family != "rn" {
        if let Some(u) = utility {
            let fits = matches!((family, u), ("linear" | "pn" | "gpn", "linear") | ("gpn-power", "power"));
            if !fits {
                return Err(config_err(format!("utility `{u}` does not apply to model `{name}`")));
            }
        }
    }
    let given = [
        ("lambda", raw.lambda.is_some()),
        ("alpha", raw.alpha.is_some()),
        ("gamma", raw.gamma.is_some()),
        ("sigma", raw.sigma.is_some()),
        ("theta", raw.theta.is_some()),
    ];
    for (key, set) in given {
        if set && !used.contains(&key) {
            let what = if spec.utility() == UtilitySpec::Linear && key == "lambda" {
                "a linear utility".to_string()
            } else {
                format!("model `{name}`")
            };
            return Err(config_err(format!("`{key}` does not apply to {what}")));
        }
    }
    Ok(Some(spec))
}

fn parse_enum<T>(key: &str, value: Option<&str>, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>, IoError> {
    value
        .map(|s| parse(s).ok_or_else(|| config_err(format!("invalid value `{s}` for `{key}`"))))
        .transpose()
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| config_err(e.message().to_string()))
    }

    pub fn validate(&self) -> Result<RunConfig, IoError> {
        let model = model_from_keys(self)?;
        let subcommand = parse_enum("subcommand", self.subcommand.as_deref(), Subcommand::parse)?;
        let scenario = parse_enum("scenario", self.scenario.as_deref(), ScenarioChoice::parse)?;
        let method = parse_enum("method", self.method.as_deref(), |s| match s {
            "rowscan" => Some(Method::RowScan),
            "bisect" => Some(Method::Bisection),
            _ => None,
        })?
        .unwrap_or(Method::RowScan);
        let mpl = MplSpec::new(
            self.grid_min.unwrap_or(0.01),
            self.grid_max.unwrap_or(10.0),
            self.grid_step.unwrap_or(0.01),
        )
        .map_err(|e| config_err(e.to_string()))?;
        let endowment = self.endowment.unwrap_or(10.0);
        if !(endowment.is_finite() && endowment > 0.0) {
            return Err(config_err(format!("endowment must be > 0, got {endowment}")));
        }
        let extras = self.extras.clone().unwrap_or_default();
        if extras.iter().any(|v| !v.is_finite()) {
            return Err(config_err("extras must be finite"));
        }
        if let Some(q) = self.q {
            if !(q.is_finite() && q >= 0.0) {
                return Err(config_err(format!("q must be nonnegative, got {q}")));
            }
        }
        let tolerance = self.tolerance.unwrap_or(1e-9);
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(config_err(format!("tolerance must be > 0, got {tolerance}")));
        }
        let audit_grid = AuditGrid::new(
            mpl.min_value(),
            mpl.max_value(),
            self.audit_points.unwrap_or(1000),
            self.audit_tolerance.unwrap_or(1e-9),
        )
        .map_err(|e| config_err(e.to_string()))?;

        let subjects = self.subjects.unwrap_or(85);
        if subjects == 0 {
            return Err(config_err("subjects must be at least 1"));
        }
        let mp_subjects = self.mp_subjects.unwrap_or(subjects.div_ceil(2));
        if mp_subjects > subjects {
            return Err(config_err(format!("mp_subjects {mp_subjects} exceeds subjects {subjects}")));
        }
        let noise_sd = self.noise_sd.unwrap_or(0.0);
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(config_err(format!("noise_sd must be >= 0, got {noise_sd}")));
        }
        let quality_range = (self.quality_min.unwrap_or(0.5), self.quality_max.unwrap_or(8.0));
        if !(quality_range.0.is_finite() && quality_range.0 >= 0.0 && quality_range.1 >= quality_range.0) {
            return Err(config_err(format!("invalid quality range {quality_range:?}")));
        }
        if let Some(list) = &self.qualities {
            if list.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
                return Err(config_err("qualities must be nonnegative"));
            }
        }

        let analysis = AnalysisConfig {
            include_nonpositive: self.include_nonpositive.unwrap_or(false),
            significance: self.significance.unwrap_or(0.05),
            equal_value_rule: parse_enum("equal_value_rule", self.equal_value_rule.as_deref(), EqualValueRule::parse)?
                .unwrap_or(EqualValueRule::Discard),
            outlier_cutoff: self.outlier_cutoff,
        };
        analysis.validate().map_err(|e| config_err(e.to_string()))?;
        let fixed_effects = parse_enum("fixed_effects", self.fixed_effects.as_deref(), FixedEffects::parse)?;

        let price_axis = GridAxis::new(
            self.price_min.unwrap_or(0.0),
            self.price_max.unwrap_or(25.0),
            self.price_step.unwrap_or(0.25),
        )
        .map_err(|e| config_err(e.to_string()))?;

        Ok(RunConfig {
            subcommand,
            master_seed: self.seed.unwrap_or(0),
            model,
            scenario,
            endowment,
            extras,
            q: self.q,
            method,
            tolerance,
            mpl,
            audit_grid,
            subjects,
            mp_subjects,
            noise_sd,
            quality_range,
            qualities: self.qualities.clone(),
            analysis,
            fixed_effects,
            lq: self.lq,
            hq: self.hq,
            price_axis,
            input: self.input.clone(),
            output: self.output.clone(),
        })
    }

    /// Canonical TOML rendering of the set keys; stable across runs.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`Self::canonical_toml`], hex encoded.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_toml().as_bytes());
        hash.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, IoError> {
    RawConfig::from_toml(text)?.validate()
}

/// Applies `key=value` overrides to config text. Values are read as TOML literals,
/// falling back to plain strings.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<RawConfig, IoError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| config_err(format!("override `{item}` is not key=value")))?;
        let key = key.trim();
        let value = value.trim();
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        table.insert(key.to_string(), parsed);
    }
    RawConfig::deserialize(table).map_err(|e| config_err(e.message().to_string()))
}

/// Money as text with exactly two decimals.
pub fn fmt_money(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Writes the dataset in canonical form. Records must be cent values in range.
pub fn format_dataset(dataset: &Dataset) -> Result<String, IoError> {
    dataset.validate().map_err(IoError::InvalidDataset)?;
    let mut records: Vec<&SubjectRecord> = dataset.records.iter().collect();
    records.sort_by_key(|r| r.key());
    let mut out = String::with_capacity(40 * (records.len() + 1));
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for r in records {
        if !is_cent_value(r.market_price) || r.market_price < 0.0 {
            return Err(IoError::InvalidDataset(format!(
                "market price {} of product {} is not a nonnegative cent value",
                r.market_price, r.product_id
            )));
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.subject_id,
            r.product_id,
            r.treatment.label(),
            r.block.label(),
            fmt_money(r.switch_point),
            fmt_money(r.market_price)
        );
    }
    Ok(out)
}

/// `d+.dd` exactly.
fn parse_money(field: &str, name: &str, line: usize) -> Result<f64, IoError> {
    let malformed = |reason: String| IoError::Malformed { line, reason };
    let valid = field
        .split_once('.')
        .is_some_and(|(int, frac)| {
            !int.is_empty()
                && int.bytes().all(|b| b.is_ascii_digit())
                && frac.len() == 2
                && frac.bytes().all(|b| b.is_ascii_digit())
        });
    if !valid {
        return Err(malformed(format!("{name} `{field}` must have exactly two decimals")));
    }
    field
        .parse::<f64>()
        .map_err(|e| malformed(format!("{name} `{field}`: {e}")))
}

fn parse_id(field: &str, name: &str, line: usize) -> Result<u32, IoError> {
    field.parse::<u32>().map_err(|_| IoError::Malformed {
        line,
        reason: format!("{name} `{field}` is not a nonnegative integer"),
    })
}

/// Parses dataset CSV text. Errors carry 1-based line numbers.
pub fn parse_dataset(text: &str) -> Result<Dataset, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| IoError::Malformed { line: 1, reason: e.to_string() })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != DATASET_HEADER {
        return Err(IoError::Malformed {
            line: 1,
            reason: format!("expected header `{DATASET_HEADER}`, found `{header}`"),
        });
    }
    let mut records = Vec::new();
    let mut lines: BTreeMap<(u32, u32, Block), usize> = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| IoError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let malformed = |reason: String| IoError::Malformed { line, reason };
        let subject_id = parse_id(&row[0], "subject_id", line)?;
        let product_id = parse_id(&row[1], "product_id", line)?;
        let treatment = Treatment::parse(&row[2])
            .ok_or_else(|| malformed(format!("treatment `{}` is not mp or pm", &row[2])))?;
        let block = Block::parse(&row[3]).ok_or_else(|| malformed(format!("block `{}` is not m or p", &row[3])))?;
        let switch_point = parse_money(&row[4], "switch_point", line)?;
        if !(0.01..=10.0).contains(&switch_point) {
            return Err(malformed(format!("switch_point {} outside [0.01, 10.00]", &row[4])));
        }
        let market_price = parse_money(&row[5], "market_price", line)?;
        if lines.insert((subject_id, product_id, block), line).is_some() {
            return Err(malformed(format!(
                "duplicate record for subject {subject_id} product {product_id} block {}",
                block.label()
            )));
        }
        records.push(SubjectRecord {
            subject_id,
            product_id,
            treatment,
            block,
            switch_point,
            market_price,
        });
    }
    let mut treatments: BTreeMap<u32, Treatment> = BTreeMap::new();
    for r in &records {
        let line = lines[&r.key()];
        let other = if r.block == Block::M { Block::P } else { Block::M };
        if !lines.contains_key(&(r.subject_id, r.product_id, other)) {
            return Err(IoError::Malformed {
                line,
                reason: format!(
                    "subject {} product {} has no {}-block record",
                    r.subject_id,
                    r.product_id,
                    other.label()
                ),
            });
        }
        if *treatments.entry(r.subject_id).or_insert(r.treatment) != r.treatment {
            return Err(IoError::Malformed {
                line,
                reason: format!("subject {} has more than one treatment", r.subject_id),
            });
        }
    }
    Ok(Dataset::from_records(records))
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| file_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|e| file_err(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset, IoError> {
    parse_dataset(&read_text(path)?)
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<(), IoError> {
    write_text(path, &format_dataset(dataset)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("subcommand = \"elicit\"\nmodel = \"rn-linear\"\nq = 5").unwrap();
        assert_eq!(c.subcommand, Some(Subcommand::Elicit));
        assert_eq!(c.model, Some(ModelSpec::rn_linear(0.0).unwrap()));
        assert_eq!(c.mpl, MplSpec::default());
        assert_eq!(c.endowment, 10.0);
        assert_eq!(c.analysis.significance, 0.05);
        assert_eq!(c.q, Some(5.0));
    }

    #[test]
    fn strict_and_consistent() {
        assert!(parse_config("bogus = 1").is_err());
        let e = parse_config("model = \"rn\"\nutility = \"linear\"\nlambda = 2.0").unwrap_err();
        assert!(e.to_string().contains("linear utility"), "{e}");
        assert!(parse_config("model = \"rn\"\ngamma = -1.5").is_err());
        assert!(parse_config("model = \"rn-kinked\"").is_err());
        assert!(parse_config("gamma = 0.5").is_err());
        assert!(parse_config("model = \"rn-kinked\"\nutility = \"power\"\nlambda = 2.0").is_err());
        let k = parse_config("model = \"rn\"\nutility = \"kinked\"\nlambda = 2.0\ngamma = -0.333333").unwrap();
        assert_eq!(k.model, Some(ModelSpec::rn_kinked(-0.333333, 2.0).unwrap()));
        assert_eq!(
            parse_config("model = \"gpn\"").unwrap().model,
            Some(ModelSpec::gpn(1.0).unwrap())
        );
    }

    #[test]
    fn overrides_merge() {
        let raw = apply_overrides("model = \"rn\"", &["gamma=-0.5".into(), "scenario=combine".into()]).unwrap();
        assert_eq!(raw.gamma, Some(-0.5));
        assert_eq!(raw.scenario.as_deref(), Some("combine"));
        assert!(apply_overrides("", &["nokey".into()]).is_err());
        assert_eq!(raw.digest(), raw.clone().digest());
    }

    #[test]
    fn dataset_round_trip() {
        let text = format!(
            "{DATASET_HEADER}\n1,1,mp,m,2.50,1.25\n1,1,mp,p,1.25,1.25\n2,1,pm,m,0.01,1.25\n2,1,pm,p,10.00,1.25\n"
        );
        let d = parse_dataset(&text).unwrap();
        assert_eq!(d.records.len(), 4);
        assert_eq!(format_dataset(&d).unwrap(), text);
    }

    #[test]
    fn dataset_rejections() {
        let bad = |row: &str| parse_dataset(&format!("{DATASET_HEADER}\n1,1,mp,m,2.50,1.00\n{row}\n")).unwrap_err();
        let e = bad("1,1,mp,p,10.005,1.00");
        assert!(matches!(e, IoError::Malformed { line: 3, .. }), "{e}");
        assert!(matches!(bad("1,1,mp,p,10.01,1.00"), IoError::Malformed { line: 3, .. }));
        assert!(matches!(bad("1,1,mp,q,1.00,1.00"), IoError::Malformed { line: 3, .. }));
        assert!(matches!(bad("1,1,mp,m,1.00,1.00"), IoError::Malformed { line: 3, .. }));
        assert!(matches!(bad("1,2,mp,m,1.00,1.00"), IoError::Malformed { .. }));
        assert!(matches!(bad("1,1,mp,p"), IoError::Malformed { line: 3, .. }));
        assert!(parse_dataset("a,b\n").is_err());
    }

    #[test]
    fn money_format() {
        assert_eq!(fmt_money(0.29), "0.29");
        assert_eq!(fmt_money(-0.0), "0.00");
        assert_eq!(fmt_money(7.0), "7.00");
    }
}
