//! Run configuration file.
//!
//! A TOML document with one table per concern. Every key has a default, so
//! an empty file is a valid configuration; unknown keys are rejected.
//! Relative data-file paths are resolved against the directory of the
//! configuration file at parse time, which keeps the echoed manifest
//! self-contained.
//!
//! ```toml
//! schema_version = 1
//!
//! [run]
//! mode = "adaptive"        # adaptive | genie | grid_sweep | bandwidth_split
//! slots = 50000
//! seed = 1
//!
//! [requirements]
//! theta_th = -0.5
//! d_max_s = 0.05
//! e_th = 0.8
//!
//! [compute.distribution]
//! kind = "histogram_file"
//! path = "measured_delays.csv"
//!
//! [[events]]
//! slot = 10000
//! set = "compute_offset"
//! value = 0.005
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compute::{ComputeDelayModel, DelayDistribution, Histogram, HistogramBin};
use crate::error::{Error, Result};
use crate::goal::{EntropyOracle, GoalRequirements, ParametricOracle, TableOracle};
use crate::optimizer::{DecisionMode, SolverConfig};
use crate::rf::{strictly_ascending, ChannelSampler, FadingParams, Geometry, Radio, RadioConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub meta: Meta,
    pub run: RunSettings,
    pub geometry: Geometry,
    pub fading: FadingParams,
    pub radio: RadioConfig,
    pub compute: ComputeConfig,
    pub oracle: OracleConfig,
    pub requirements: GoalRequirements,
    pub solver: SolverSettings,
    pub events: Vec<ScheduledEvent>,
    pub sweep: SweepSettings,
    pub grid: GridSettings,
    pub split: SplitSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            meta: Meta::default(),
            run: RunSettings::default(),
            geometry: Geometry::default(),
            fading: FadingParams::default(),
            radio: RadioConfig::default(),
            compute: ComputeConfig::default(),
            oracle: OracleConfig::default(),
            requirements: GoalRequirements::default(),
            solver: SolverSettings::default(),
            events: Vec::new(),
            sweep: SweepSettings::default(),
            grid: GridSettings::default(),
            split: SplitSettings::default(),
        }
    }
}

/// Free-form labels echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Meta {
    /// Experiment this configuration reproduces, e.g. "Figure 12".
    pub figure: String,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Adaptive,
    Genie,
    GridSweep,
    BandwidthSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub mode: RunMode,
    pub slots: u64,
    pub seed: u64,
    /// Window of the moving effectiveness and cost series.
    pub moving_window: usize,
    /// Simulated batches per PER level when estimating the success table.
    pub validation_samples: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            mode: RunMode::Adaptive,
            slots: 50_000,
            seed: 1,
            moving_window: 2000,
            validation_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComputeConfig {
    /// Systematic offset added to every draw, seconds.
    pub offset_s: f64,
    pub distribution: DistributionConfig,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            offset_s: 0.0,
            distribution: DistributionConfig::Synthetic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    /// Bundled synthetic histogram.
    Synthetic,
    HistogramFile { path: PathBuf },
    Histogram { bins: Vec<HistogramBin> },
    Uniform { low_s: f64, high_s: f64 },
    ShiftedExponential { shift_s: f64, mean_s: f64 },
    ShiftedGamma { shift_s: f64, shape: f64, scale_s: f64 },
}

impl ComputeConfig {
    pub fn build(&self) -> Result<ComputeDelayModel> {
        let dist = match &self.distribution {
            DistributionConfig::Synthetic => DelayDistribution::Histogram(Histogram::synthetic_default()),
            DistributionConfig::HistogramFile { path } => {
                DelayDistribution::Histogram(Histogram::from_csv_path(path)?)
            }
            DistributionConfig::Histogram { bins } => DelayDistribution::Histogram(Histogram::new(bins.clone())?),
            DistributionConfig::Uniform { low_s, high_s } => DelayDistribution::Uniform {
                low_s: *low_s,
                high_s: *high_s,
            },
            DistributionConfig::ShiftedExponential { shift_s, mean_s } => {
                DelayDistribution::ShiftedExponential {
                    shift_s: *shift_s,
                    mean_s: *mean_s,
                }
            }
            DistributionConfig::ShiftedGamma { shift_s, shape, scale_s } => DelayDistribution::ShiftedGamma {
                shift_s: *shift_s,
                shape: *shape,
                scale_s: *scale_s,
            },
        };
        ComputeDelayModel::new(dist)?
            .with_offset(self.offset_s)
            .map_err(|_| Error::validation("compute.offset_s", "must be >= 0"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleConfig {
    Parametric(ParametricOracle),
    Table {
        path: PathBuf,
        labels: u32,
        /// Defaults to the mean entropy of the lowest PER level.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h_min_nats: Option<f64>,
    },
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig::Parametric(ParametricOracle::default())
    }
}

impl OracleConfig {
    pub fn build(&self) -> Result<EntropyOracle> {
        match self {
            OracleConfig::Parametric(p) => {
                p.validate()?;
                Ok(EntropyOracle::Parametric(p.clone()))
            }
            OracleConfig::Table { path, labels, h_min_nats } => Ok(EntropyOracle::Table(
                TableOracle::from_csv_path(path, *labels, *h_min_nats)?,
            )),
        }
    }
}

/// Trade-off weight and decision restrictions of the adaptive controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// Weight of the DO rate, in 1/(bit/s).
    pub omega: f64,
    /// Pins the PER to this grid value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_per: Option<f64>,
    /// Pins the DO power to this grid value; requires `fixed_per`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_power_w: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            omega: 1e-8,
            fixed_per: None,
            fixed_power_w: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ThetaTh,
    ETh,
    DMax,
    ComputeOffset,
}

/// A parameter change taking effect at the start of `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledEvent {
    pub slot: u64,
    pub set: EventKind,
    pub value: f64,
}

/// Parameter lists iterated by the `frontier` and `sweep` commands.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSettings {
    /// Goal thresholds; empty means `requirements.theta_th` only.
    pub theta_th: Vec<f64>,
    /// Trade-off weights; empty means `solver.omega` only.
    pub omega: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAxis {
    /// Cells are (PER, DO power).
    Power,
    /// Cells are (PER, D_max) at a fixed DO power.
    Delay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSettings {
    pub axis: GridAxis,
    /// PER values; empty means `radio.per_grid`.
    pub per: Vec<f64>,
    /// DO powers of the power axis; empty means `radio.do_power_grid_w`.
    pub power_w: Vec<f64>,
    /// DO power of the delay axis.
    pub delay_axis_power_w: f64,
    /// D_max values of the delay axis.
    pub d_max_s: Vec<f64>,
    /// Effectiveness thresholds summarized per heat map.
    pub thresholds: Vec<f64>,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            axis: GridAxis::Power,
            per: Vec::new(),
            power_w: Vec::new(),
            delay_axis_power_w: 0.2,
            d_max_s: (0..=16).map(|k| (100 + 10 * k) as f64 / 4000.0).collect(),
            thresholds: vec![0.7, 0.8, 0.9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSettings {
    /// Candidate GO shares of the bandwidth, each in (0, 1].
    pub go_fractions: Vec<f64>,
}

impl Default for SplitSettings {
    fn default() -> Self {
        Self {
            go_fractions: (1..40).map(|k| k as f64 / 40.0).collect(),
        }
    }
}

impl ScenarioConfig {
    /// Parses a TOML document. Relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, origin: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_owned(),
            message: e.to_string().trim().replace('\n', " "),
        })?;
        if let Some(base) = base_dir {
            cfg.resolve_paths(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse {
            path: "<config>".into(),
            message: e.to_string(),
        })
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DistributionConfig::HistogramFile { path } = &mut self.compute.distribution {
            fix(path);
        }
        if let OracleConfig::Table { path, .. } = &mut self.oracle {
            fix(path);
        }
    }

    /// Checks every range constraint that does not require reading data files.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.run.slots < 1 {
            return Err(Error::validation("run.slots", "must be >= 1"));
        }
        if self.run.moving_window < 1 {
            return Err(Error::validation("run.moving_window", "must be >= 1"));
        }
        if self.run.validation_samples < 1 {
            return Err(Error::validation("run.validation_samples", "must be >= 1"));
        }
        self.geometry.validate()?;
        self.fading.validate()?;
        self.radio.validate()?;
        if !(self.compute.offset_s.is_finite() && self.compute.offset_s >= 0.0) {
            return Err(Error::validation("compute.offset_s", "must be >= 0"));
        }
        if let OracleConfig::Parametric(p) = &self.oracle {
            p.validate()?;
        }
        self.requirements.validate()?;
        if !(self.solver.omega.is_finite() && self.solver.omega >= 0.0) {
            return Err(Error::validation("solver.omega", "must be >= 0"));
        }
        self.decision_mode()?;
        for (k, w) in self.events.windows(2).enumerate() {
            if w[1].slot <= w[0].slot {
                return Err(Error::validation(
                    format!("events[{}].slot", k + 1),
                    "event slots must be strictly increasing",
                ));
            }
        }
        for (k, e) in self.events.iter().enumerate() {
            if e.slot >= self.run.slots {
                return Err(Error::validation(format!("events[{k}].slot"), "must be < run.slots"));
            }
            let key = format!("events[{k}].value");
            let ok = match e.set {
                EventKind::ThetaTh => e.value.is_finite(),
                EventKind::ETh => (0.0..1.0).contains(&e.value),
                EventKind::DMax => e.value.is_finite() && e.value > 0.0,
                EventKind::ComputeOffset => e.value.is_finite() && e.value >= 0.0,
            };
            if !ok {
                return Err(Error::validation(key, "out of range for the event kind"));
            }
        }
        if self.sweep.theta_th.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("sweep.theta_th", "must be finite"));
        }
        if self.sweep.omega.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::validation("sweep.omega", "must be >= 0"));
        }
        let g = &self.grid;
        if !g.per.is_empty() && (!strictly_ascending(&g.per) || !g.per.iter().all(|&p| p > 0.0 && p < 0.5)) {
            return Err(Error::validation("grid.per", "must be strictly ascending within (0, 0.5)"));
        }
        if !g.power_w.is_empty() && (!strictly_ascending(&g.power_w) || g.power_w[0] < 0.0) {
            return Err(Error::validation("grid.power_w", "must be strictly ascending and >= 0"));
        }
        if !(g.delay_axis_power_w.is_finite() && g.delay_axis_power_w >= 0.0) {
            return Err(Error::validation("grid.delay_axis_power_w", "must be >= 0"));
        }
        if g.axis == GridAxis::Delay && g.d_max_s.is_empty() {
            return Err(Error::validation("grid.d_max_s", "delay axis needs at least one value"));
        }
        if !strictly_ascending(&g.d_max_s) || g.d_max_s.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::validation("grid.d_max_s", "must be strictly ascending and >= 0"));
        }
        if g.thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::validation("grid.thresholds", "must lie in [0, 1]"));
        }
        if self.split.go_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(Error::validation("split.go_fractions", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Solver restriction implied by `run.mode` and the `solver.fixed_*` keys.
    pub fn decision_mode(&self) -> Result<DecisionMode> {
        let per_index = |v: f64| {
            grid_index(&self.radio.per_grid, v)
                .ok_or_else(|| Error::validation("solver.fixed_per", "not a value of radio.per_grid"))
        };
        let power_index = |v: f64| {
            grid_index(&self.radio.do_power_grid_w.values(), v).ok_or_else(|| {
                Error::validation("solver.fixed_power_w", "not a value of radio.do_power_grid_w")
            })
        };
        let mode = match (self.solver.fixed_per, self.solver.fixed_power_w) {
            (None, None) => DecisionMode::Approximate,
            (Some(p), None) => DecisionMode::FixedPer(per_index(p)?),
            (Some(p), Some(w)) => DecisionMode::FixedBoth(per_index(p)?, power_index(w)?),
            (None, Some(_)) => {
                return Err(Error::validation("solver.fixed_power_w", "requires solver.fixed_per"))
            }
        };
        if self.run.mode == RunMode::Genie {
            if mode != DecisionMode::Approximate {
                return Err(Error::validation("solver.fixed_per", "not allowed in genie mode"));
            }
            return Ok(DecisionMode::Genie);
        }
        Ok(mode)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        Ok(SolverConfig {
            omega: self.solver.omega,
            mode: self.decision_mode()?,
        })
    }

    /// Goal thresholds iterated by sweeps.
    pub fn theta_sweep(&self) -> Vec<f64> {
        if self.sweep.theta_th.is_empty() {
            vec![self.requirements.theta_th]
        } else {
            self.sweep.theta_th.clone()
        }
    }

    pub fn omega_sweep(&self) -> Vec<f64> {
        if self.sweep.omega.is_empty() {
            vec![self.solver.omega]
        } else {
            self.sweep.omega.clone()
        }
    }

    /// Data files and synthetic defaults the run depends on.
    pub fn synthetic_inputs(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.compute.distribution == DistributionConfig::Synthetic {
            out.push("compute-delay histogram");
        }
        if matches!(self.oracle, OracleConfig::Parametric(_)) {
            out.push("parametric entropy oracle");
        }
        out
    }
}

fn grid_index(grid: &[f64], v: f64) -> Option<usize> {
    grid.iter()
        .position(|&g| g == v || (g - v).abs() <= 1e-12 * g.abs().max(v.abs()))
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    ScenarioConfig::from_toml_str(&text, &path.display().to_string(), Some(base))
}

/// Validated runtime form of a configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub sampler: ChannelSampler,
    pub radio: Radio,
    pub compute: ComputeDelayModel,
    pub oracle: EntropyOracle,
    pub solver: SolverConfig,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            sampler: ChannelSampler::new(&config.geometry, &config.fading)?,
            radio: Radio::new(&config.radio)?,
            compute: config.compute.build()?,
            oracle: config.oracle.build()?,
            solver: config.solver_config()?,
            config: config.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let cfg = ScenarioConfig::from_toml_str("", "mem", None).unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ScenarioConfig::from_toml_str("[radio]\nbandwith_hz = 1e9\n", "mem", None).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        assert!(err.to_string().contains("bandwith_hz"));
        assert!(ScenarioConfig::from_toml_str("colour = 1\n", "mem", None).is_err());
    }

    #[test]
    fn negative_bandwidth_names_key() {
        let err = ScenarioConfig::from_toml_str("[radio]\nbandwidth_hz = -5.0\n", "mem", None).unwrap_err();
        match err {
            Error::Validation { key, .. } => assert_eq!(key, "radio.bandwidth_hz"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn default_round_trips() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_toml_string().unwrap();
        let back = ScenarioConfig::from_toml_str(&text, "mem", None).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn tagged_sections_parse() {
        let text = r#"
[compute]
offset_s = 0.002
[compute.distribution]
kind = "uniform"
low_s = 0.01
high_s = 0.02

[oracle]
kind = "parametric"
scale = 3.0

[[events]]
slot = 5
set = "compute_offset"
value = 0.005

[[events]]
slot = 9
set = "e_th"
value = 0.85
"#;
        let cfg = ScenarioConfig::from_toml_str(text, "mem", None).unwrap();
        assert_eq!(cfg.compute.distribution, DistributionConfig::Uniform { low_s: 0.01, high_s: 0.02 });
        match &cfg.oracle {
            OracleConfig::Parametric(p) => {
                assert_eq!(p.scale, 3.0);
                assert_eq!(p.h_min_nats, ParametricOracle::default().h_min_nats);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(cfg.events.len(), 2);
        let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string().unwrap(), "mem", None).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn unknown_key_in_tagged_table_rejected() {
        let text = "[compute.distribution]\nkind = \"uniform\"\nlow_s = 0.0\nhigh_s = 1.0\nmid_s = 0.5\n";
        assert!(ScenarioConfig::from_toml_str(text, "mem", None).is_err());
        let text = "[oracle]\nkind = \"parametric\"\nslope = 1.0\n";
        assert!(ScenarioConfig::from_toml_str(text, "mem", None).is_err());
    }

    #[test]
    fn events_must_increase() {
        let text = "[[events]]\nslot = 9\nset = \"d_max\"\nvalue = 0.05\n[[events]]\nslot = 9\nset = \"d_max\"\nvalue = 0.04\n";
        match ScenarioConfig::from_toml_str(text, "mem", None).unwrap_err() {
            Error::Validation { key, .. } => assert_eq!(key, "events[1].slot"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn fixed_decisions_must_be_on_grid() {
        let text = "[solver]\nfixed_per = 1e-3\n";
        let cfg = ScenarioConfig::from_toml_str(text, "mem", None).unwrap();
        assert_eq!(cfg.decision_mode().unwrap(), DecisionMode::FixedPer(7));
        assert!(ScenarioConfig::from_toml_str("[solver]\nfixed_per = 3e-3\n", "mem", None).is_err());
        assert!(ScenarioConfig::from_toml_str("[solver]\nfixed_power_w = 0.2\n", "mem", None).is_err());
        let cfg = ScenarioConfig::from_toml_str("[solver]\nfixed_per = 1e-7\nfixed_power_w = 0.2\n", "mem", None).unwrap();
        assert_eq!(cfg.decision_mode().unwrap(), DecisionMode::FixedBoth(0, 499));
    }

    #[test]
    fn relative_paths_resolve_against_base() {
        let text = "[compute.distribution]\nkind = \"histogram_file\"\npath = \"h.csv\"\n";
        let cfg = ScenarioConfig::from_toml_str(text, "mem", Some(Path::new("/data/x"))).unwrap();
        assert_eq!(
            cfg.compute.distribution,
            DistributionConfig::HistogramFile { path: PathBuf::from("/data/x/h.csv") }
        );
    }
}
