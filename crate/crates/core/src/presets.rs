//! Named experiment protocols.

use crate::config::{EventKind, GridAxis, RunMode, ScenarioConfig, ScheduledEvent};
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 10] = [
    "default", "fig6", "fig7", "fig8", "fig9", "fig10a", "fig10b", "fig11", "fig12", "fig13",
];

/// Goal thresholds compared across the heat-map and frontier experiments.
pub const THETA_SWEEP: [f64; 3] = [-0.8, -0.5, -0.4];

/// Trade-off weights of the frontier experiments, in 1/(bit/s).
pub const OMEGA_SWEEP: [f64; 5] = [1e-11, 1e-10, 1e-9, 1e-8, 1e-7];

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    let theta_sweep = THETA_SWEEP.to_vec();
    match name {
        "default" => {
            cfg.meta.figure = "none".into();
            cfg.meta.description = "Adaptive controller with default parameters".into();
        }
        "fig6" => {
            cfg.meta.figure = "Figure 6".into();
            cfg.meta.description = "Goal-value-only effectiveness versus PER".into();
            cfg.run.mode = RunMode::GridSweep;
            cfg.grid.axis = GridAxis::Power;
            cfg.grid.power_w = vec![0.2];
            cfg.sweep.theta_th = theta_sweep;
        }
        "fig7" => {
            cfg.meta.figure = "Figure 7".into();
            cfg.meta.description = "Deadline-only effectiveness versus goal cost for a PER subset".into();
            cfg.run.mode = RunMode::GridSweep;
            cfg.grid.axis = GridAxis::Power;
            cfg.grid.per = vec![1e-7, 1e-4, 1e-3, 1e-2];
            cfg.requirements.d_max_s = 0.050;
        }
        "fig8" => {
            cfg.meta.figure = "Figure 8".into();
            cfg.meta.description = "Effectiveness heat maps over PER and D_max at P_d = 200 mW".into();
            cfg.run.mode = RunMode::GridSweep;
            cfg.grid.axis = GridAxis::Delay;
            cfg.grid.delay_axis_power_w = 0.2;
            cfg.sweep.theta_th = theta_sweep;
        }
        "fig9" => {
            cfg.meta.figure = "Figure 9".into();
            cfg.meta.description = "Effectiveness heat maps over PER and goal cost at D_max = 45 ms".into();
            cfg.run.mode = RunMode::GridSweep;
            cfg.grid.axis = GridAxis::Power;
            cfg.requirements.d_max_s = 0.045;
            cfg.sweep.theta_th = theta_sweep;
        }
        "fig10a" | "fig10b" => {
            let wide = name == "fig10a";
            cfg.meta.figure = if wide { "Figure 10a" } else { "Figure 10b" }.into();
            cfg.meta.description = format!(
                "Cost versus trade-off weight, sharing and splitting, W = {}",
                if wide { "1 GHz" } else { "500 MHz" }
            );
            cfg.radio.bandwidth_hz = if wide { 1e9 } else { 500e6 };
            cfg.requirements.e_th = 0.82;
            cfg.requirements.d_max_s = 0.045;
            cfg.sweep.theta_th = theta_sweep;
            cfg.sweep.omega = OMEGA_SWEEP.to_vec();
        }
        "fig11" => {
            cfg.meta.figure = "Figure 11".into();
            cfg.meta.description = "Fixed-decision heat maps against the adaptive controller at D_max = 45 ms".into();
            cfg.run.mode = RunMode::GridSweep;
            cfg.grid.axis = GridAxis::Power;
            cfg.grid.thresholds = vec![0.8];
            cfg.requirements.d_max_s = 0.045;
            cfg.requirements.e_th = 0.8;
            cfg.sweep.theta_th = theta_sweep;
        }
        "fig12" => {
            cfg.meta.figure = "Figure 12".into();
            cfg.meta.description = "Adaptation to goal-threshold and effectiveness-target changes".into();
            cfg.run.slots = 30_000;
            cfg.requirements.theta_th = -0.4;
            cfg.requirements.e_th = 0.8;
            cfg.requirements.d_max_s = 0.045;
            cfg.events = vec![
                ScheduledEvent { slot: 10_000, set: EventKind::ThetaTh, value: -0.5 },
                ScheduledEvent { slot: 20_000, set: EventKind::ETh, value: 0.85 },
            ];
        }
        "fig13" => {
            cfg.meta.figure = "Figure 13".into();
            cfg.meta.description = "Adaptation to computation-delay offsets".into();
            cfg.run.slots = 50_000;
            cfg.requirements.theta_th = -0.5;
            cfg.requirements.e_th = 0.8;
            cfg.requirements.d_max_s = 0.050;
            cfg.events = vec![
                ScheduledEvent { slot: 10_000, set: EventKind::ComputeOffset, value: 0.005 },
                ScheduledEvent { slot: 30_000, set: EventKind::ComputeOffset, value: 0.007 },
            ];
        }
        other => {
            return Err(Error::validation(
                "preset",
                format!("unknown preset `{other}`; expected one of {}", PRESET_NAMES.join(", ")),
            ))
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
