//! CSV and manifest writers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back with `str::parse::<f64>` reproduces the in-memory values
//! exactly. Infinite delays are written as `inf`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{GridAxis, ScenarioConfig};
use crate::error::{Error, Result};
use crate::optimizer::SuccessProbTable;
use crate::sim::{FrontierPoint, HeatmapData, SplitResult, TraceLog};

pub const TRACE_HEADER: [&str; 12] = [
    "slot", "gamma", "p_d_w", "theta", "d_tx_s", "d_comp_s", "d_tot_s", "success", "r_d_bps", "z", "mov_eff",
    "mov_cost",
];

/// Output directory of one command invocation.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    dir: PathBuf,
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

impl OutputBundle {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write_rows<I, R>(&self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.path(name);
        let csv_err = |e: csv::Error| Error::Csv {
            path: path.clone(),
            source: e,
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Resolved configuration preceded by comment lines. Only the comments
    /// vary between identical runs.
    pub fn write_manifest(&self, cfg: &ScenarioConfig, command: &str) -> Result<PathBuf> {
        let path = self.path("manifest.toml");
        let created = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let synthetic = cfg.synthetic_inputs();
        let mut text = format!(
            "# gocoexist {} manifest\n# command: {command}\n# figure: {}\n# seed: {}\n# created_unix_s: {created}\n",
            env!("CARGO_PKG_VERSION"),
            if cfg.meta.figure.is_empty() { "none" } else { &cfg.meta.figure },
            cfg.run.seed,
        );
        if !synthetic.is_empty() {
            text.push_str(&format!(
                "# synthetic inputs (calibration, not measured data): {}\n",
                synthetic.join(", ")
            ));
        }
        text.push('\n');
        text.push_str(&cfg.to_toml_string()?);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn write_trace(&self, log: &TraceLog) -> Result<PathBuf> {
        let mov_eff = log.moving_effectiveness();
        let mov_cost = log.moving_cost();
        self.write_rows(
            "trace.csv",
            &TRACE_HEADER,
            log.outcomes.iter().enumerate().map(|(t, o)| {
                vec![
                    o.slot.to_string(),
                    fmt(o.per),
                    fmt(o.power_w),
                    fmt(o.theta),
                    fmt(o.d_tx_s),
                    fmt(o.d_comp_s),
                    fmt(o.d_tot_s),
                    (o.success as u8).to_string(),
                    fmt(o.r_d_bps),
                    fmt(log.z[t]),
                    fmt_opt(mov_eff[t]),
                    fmt_opt(mov_cost[t]),
                ]
            }),
        )
    }

    /// Long-format cells, contour summary and per-cell components of one heat
    /// map. `y` is the goal cost on the power axis and `D_max` on the delay axis.
    pub fn write_heatmap(&self, data: &HeatmapData, tag: &str) -> Result<Vec<PathBuf>> {
        let y_of = |j: usize| match data.axis {
            GridAxis::Power => data.cost[j],
            GridAxis::Delay => data.y[j],
        };
        let cells = || {
            (0..data.pers.len()).flat_map(move |i| (0..data.y.len()).map(move |j| (i, j)))
        };
        let heat = self.write_rows(
            &format!("heatmap_{tag}.csv"),
            &["x", "y", "effectiveness"],
            cells().map(|(i, j)| vec![fmt(data.pers[i]), fmt(y_of(j)), fmt(data.effectiveness[i][j])]),
        )?;
        let contours = self.write_rows(
            &format!("contours_{tag}.csv"),
            &["threshold", "feasible_cell_count", "min_cost_in_region"],
            data.contours().into_iter().map(|c| {
                vec![
                    fmt(c.threshold),
                    c.feasible_cell_count.to_string(),
                    fmt_opt(c.min_cost.map(|m| m.2)),
                ]
            }),
        )?;
        let y_name = match data.axis {
            GridAxis::Power => "p_d_w",
            GridAxis::Delay => "d_max_s",
        };
        let components = self.write_rows(
            &format!("components_{tag}.csv"),
            &["theta_th", "gamma", y_name, "cost", "cost_se", "theta_only", "delay_only", "effectiveness"],
            cells().map(|(i, j)| {
                vec![
                    fmt(data.theta_th),
                    fmt(data.pers[i]),
                    fmt(data.y[j]),
                    fmt(data.cost[j]),
                    fmt(data.cost_se[j]),
                    fmt(data.theta_only[i]),
                    fmt(data.delay_only[i][j]),
                    fmt(data.effectiveness[i][j]),
                ]
            }),
        )?;
        Ok(vec![heat, contours, components])
    }

    /// One row per `(theta_th, omega)`; genie results sit next to the
    /// approximate ones.
    pub fn write_frontier(&self, points: &[FrontierPoint]) -> Result<PathBuf> {
        let mut rows = Vec::new();
        for p in points.iter().filter(|p| !p.genie) {
            let genie = points
                .iter()
                .find(|g| g.genie && g.theta_th == p.theta_th && g.omega == p.omega);
            rows.push(vec![
                fmt(p.theta_th),
                fmt(p.omega),
                fmt(p.effectiveness),
                fmt(p.cost),
                fmt(p.cost_se),
                fmt(p.mean_z),
                fmt(p.final_z_over_t),
                p.convergence_slot.map(|s| s.to_string()).unwrap_or_default(),
                fmt_opt(genie.map(|g| g.effectiveness)),
                fmt_opt(genie.map(|g| g.cost)),
                fmt_opt(genie.map(|g| g.cost_se)),
            ]);
        }
        self.write_rows(
            "frontier.csv",
            &[
                "theta_th",
                "omega",
                "effectiveness",
                "cost",
                "cost_se",
                "mean_z",
                "final_z_over_t",
                "convergence_slot",
                "genie_effectiveness",
                "genie_cost",
                "genie_cost_se",
            ],
            rows,
        )
    }

    pub fn write_split(&self, result: &SplitResult) -> Result<PathBuf> {
        self.write_rows(
            "split.csv",
            &["go_fraction", "go_bandwidth_hz", "effectiveness", "cost", "cost_se", "feasible", "best"],
            result.candidates.iter().enumerate().map(|(k, c)| {
                vec![
                    fmt(c.go_fraction),
                    fmt(c.go_bandwidth_hz),
                    fmt(c.effectiveness),
                    fmt(c.cost),
                    fmt(c.cost_se),
                    (c.feasible as u8).to_string(),
                    ((result.best == Some(k)) as u8).to_string(),
                ]
            }),
        )
    }

    pub fn write_table(&self, table: &SuccessProbTable, name: &str) -> Result<PathBuf> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        table.write_csv(file).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })?;
        Ok(path)
    }

    pub fn write_summary(&self, entries: &[(&str, String)]) -> Result<PathBuf> {
        self.write_rows(
            "summary.csv",
            &["key", "value"],
            entries.iter().map(|(k, v)| vec![k.to_string(), v.clone()]),
        )
    }
}

/// Parsed rows of a trace CSV, for round-trip checks and post-processing.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub slot: u64,
    pub gamma: f64,
    pub p_d_w: f64,
    pub theta: f64,
    pub d_tx_s: f64,
    pub d_comp_s: f64,
    pub d_tot_s: f64,
    pub success: bool,
    pub r_d_bps: f64,
    pub z: f64,
    pub mov_eff: Option<f64>,
    pub mov_cost: Option<f64>,
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let parse = |message: String| Error::Parse {
        path: path.display().to_string(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let headers = rdr.headers().map_err(|e| parse(e.to_string()))?.clone();
    if headers.iter().ne(TRACE_HEADER) {
        return Err(parse("unexpected trace header".into()));
    }
    let mut rows = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let r = record.map_err(|e| parse(e.to_string()))?;
        let f = |k: usize| r[k].parse::<f64>().map_err(|e| parse(format!("row {}: {e}", n + 2)));
        let opt = |k: usize| -> Result<Option<f64>> {
            if r[k].is_empty() {
                Ok(None)
            } else {
                f(k).map(Some)
            }
        };
        rows.push(TraceRow {
            slot: r[0].parse().map_err(|e| parse(format!("row {}: {e}", n + 2)))?,
            gamma: f(1)?,
            p_d_w: f(2)?,
            theta: f(3)?,
            d_tx_s: f(4)?,
            d_comp_s: f(5)?,
            d_tot_s: f(6)?,
            success: &r[7] == "1",
            r_d_bps: f(8)?,
            z: f(9)?,
            mov_eff: opt(10)?,
            mov_cost: opt(11)?,
        });
    }
    Ok(rows)
}
