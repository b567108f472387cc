//! Slot-by-slot Monte Carlo engine.
//!
//! Slots are independent realizations. Every random quantity of slot `t` comes
//! from its own stream (see [`crate::rng`]):
//!
//! * the channel gains,
//! * the base computation delay (the systematic offset is added on top),
//! * one uniform that drives the inverse-CDF packet-error draw of every PER
//!   level, so error counts are non-decreasing in the PER,
//! * one oracle draw shared by every error fraction.
//!
//! As a result all runs of one seed see the same environment: grid cells,
//! split candidates, genie and approximate controllers, and the reference-rate
//! pass differ only through their decisions.

use crate::compute::ComputeDelayModel;
use crate::config::{EventKind, GridAxis, RunMode, Scenario, ScenarioConfig, ScheduledEvent};
use crate::error::{Error, Result};
use crate::goal::{goal_cost, goal_success, GoalOutcome, GoalRequirements, OracleDraw, PacketErrorSampler};
use crate::optimizer::{
    build_success_table, solve_slot, theoretical_bound_check, update_queue, DecisionMode, DriftCheck,
    SolverConfig, StabilityReport, SuccessProbTable, VirtualQueueState,
};
use crate::rf::{shannon_rate, ChannelRealization, Grid, Radio, RadioConfig};
use crate::rng::{stream, Purpose};
use rand::Rng;

/// Batches used for the batch-means standard error of a trace.
const SE_BATCHES: usize = 50;

/// Random environment of one slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotDraw {
    pub channel: ChannelRealization,
    /// Computation delay including the offset of the model it was drawn from.
    pub d_comp: f64,
    pub error_u: f64,
    pub oracle: OracleDraw,
}

pub fn slot_channel(s: &Scenario, t: u64) -> ChannelRealization {
    s.sampler.sample(&mut stream(s.config.run.seed, Purpose::Channel, t))
}

pub fn draw_slot(s: &Scenario, compute: &ComputeDelayModel, t: u64) -> SlotDraw {
    let seed = s.config.run.seed;
    SlotDraw {
        channel: slot_channel(s, t),
        d_comp: compute.sample(&mut stream(seed, Purpose::ComputeDelay, t)),
        error_u: stream(seed, Purpose::PacketErrors, t).random(),
        oracle: s.oracle.draw(&mut stream(seed, Purpose::EntropyNoise, t)),
    }
}

/// Goal value of a slot as a function of the PER.
#[derive(Debug, Clone)]
pub struct GoalValueModel {
    samplers: Vec<PacketErrorSampler>,
    packets: f64,
}

impl GoalValueModel {
    pub fn new(pers: &[f64], packets: u64) -> Result<Self> {
        Ok(Self {
            samplers: pers
                .iter()
                .map(|&g| PacketErrorSampler::new(packets, g))
                .collect::<Result<_>>()?,
            packets: packets as f64,
        })
    }

    pub fn theta(&self, s: &Scenario, per_index: usize, draw: &SlotDraw) -> f64 {
        let errors = self.samplers[per_index].quantile(draw.error_u);
        s.oracle.theta_for(errors as f64 / self.packets, draw.oracle)
    }
}

/// Average DO rate at maximum power with the GO user silent, over the run's
/// channel realizations.
pub fn reference_rate_avg(s: &Scenario) -> f64 {
    let slots = s.config.run.slots;
    (0..slots)
        .map(|t| s.radio.reference_rate(&slot_channel(s, t)))
        .sum::<f64>()
        / slots as f64
}

pub fn build_table(s: &Scenario, theta_th: f64, build_index: u64) -> Result<SuccessProbTable> {
    build_success_table(
        &s.oracle,
        &s.radio.pers,
        theta_th,
        s.radio.packets,
        s.config.run.validation_samples,
        &mut stream(s.config.run.seed, Purpose::SuccessTable, build_index),
    )
}

/// Parameters that events may change during a run.
#[derive(Debug, Clone)]
pub struct ScenarioState {
    pub requirements: GoalRequirements,
    pub compute: ComputeDelayModel,
    pub table: SuccessProbTable,
    pub table_builds: u64,
}

impl ScenarioState {
    pub fn new(s: &Scenario) -> Result<Self> {
        Ok(Self {
            requirements: s.config.requirements.clone(),
            compute: s.compute.clone(),
            table: build_table(s, s.config.requirements.theta_th, 0)?,
            table_builds: 1,
        })
    }
}

/// Applies every event scheduled for slot `t`. A goal-threshold change
/// rebuilds the success table.
pub fn apply_events(schedule: &[ScheduledEvent], t: u64, state: &mut ScenarioState, s: &Scenario) -> Result<()> {
    for e in schedule.iter().filter(|e| e.slot == t) {
        match e.set {
            EventKind::ThetaTh => {
                state.requirements.theta_th = e.value;
                state.table = build_table(s, e.value, state.table_builds)?;
                state.table_builds += 1;
            }
            EventKind::ETh => state.requirements.e_th = e.value,
            EventKind::DMax => state.requirements.d_max_s = e.value,
            EventKind::ComputeOffset => state.compute = state.compute.with_offset(e.value)?,
        }
    }
    Ok(())
}

/// Trailing-window means: element `i` averages `series[i..i + window]`.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 1 {
        return Err(Error::Domain("moving-average window must be >= 1".into()));
    }
    if window > series.len() {
        return Err(Error::Domain(format!(
            "window {window} exceeds series length {}",
            series.len()
        )));
    }
    let mut prefix = Vec::with_capacity(series.len() + 1);
    prefix.push(0.0);
    for v in series {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + v);
    }
    Ok((window..=series.len())
        .map(|end| (prefix[end] - prefix[end - window]) / window as f64)
        .collect())
}

/// [`moving_average`] aligned with the series: `None` until a full window exists.
pub fn aligned_moving_average(series: &[f64], window: usize) -> Vec<Option<f64>> {
    match moving_average(series, window) {
        Ok(m) => std::iter::repeat_n(None, window - 1).chain(m.into_iter().map(Some)).collect(),
        Err(_) => vec![None; series.len()],
    }
}

fn batch_means_se(series: &[f64]) -> f64 {
    let n = series.len();
    let batches = SE_BATCHES.min(n);
    if batches < 2 {
        return f64::NAN;
    }
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| series[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Per-slot record of an adaptive run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLog {
    pub outcomes: Vec<GoalOutcome>,
    /// Backlog after each slot's update.
    pub z: Vec<f64>,
    /// Effectiveness target active in each slot.
    pub e_th: Vec<f64>,
    pub rd_max_avg: f64,
    pub window: usize,
}

impl TraceLog {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn successes(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| if o.success { 1.0 } else { 0.0 }).collect()
    }

    pub fn effectiveness(&self) -> f64 {
        self.outcomes.iter().filter(|o| o.success).count() as f64 / self.len() as f64
    }

    pub fn mean_rate(&self) -> f64 {
        self.outcomes.iter().map(|o| o.r_d_bps).sum::<f64>() / self.len() as f64
    }

    pub fn cost(&self) -> f64 {
        goal_cost(self.mean_rate(), self.rd_max_avg).unwrap_or(f64::NAN)
    }

    /// Per-slot relative rate loss `1 - R_d,t / R_ref`.
    pub fn slot_costs(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| 1.0 - o.r_d_bps / self.rd_max_avg).collect()
    }

    /// Batch-means standard error of the cost.
    pub fn cost_standard_error(&self) -> f64 {
        batch_means_se(&self.slot_costs())
    }

    pub fn effectiveness_standard_error(&self) -> f64 {
        batch_means_se(&self.successes())
    }

    pub fn running_effectiveness(&self) -> Vec<f64> {
        let mut hits = 0usize;
        self.outcomes
            .iter()
            .enumerate()
            .map(|(t, o)| {
                hits += o.success as usize;
                hits as f64 / (t + 1) as f64
            })
            .collect()
    }

    pub fn moving_effectiveness(&self) -> Vec<Option<f64>> {
        aligned_moving_average(&self.successes(), self.window)
    }

    pub fn moving_cost(&self) -> Vec<Option<f64>> {
        aligned_moving_average(&self.slot_costs(), self.window)
    }

    pub fn z_before(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.z[t - 1]
        }
    }

    pub fn drift_checks(&self) -> impl Iterator<Item = DriftCheck> + '_ {
        (0..self.len()).map(|t| DriftCheck::new(self.z_before(t), self.z[t], self.outcomes[t].success, self.e_th[t]))
    }

    pub fn stability(&self) -> StabilityReport {
        theoretical_bound_check(&self.z)
    }

    /// First slot from which the moving effectiveness stays at or above
    /// `target - tolerance` until the end of the run.
    pub fn convergence_slot(&self, target: f64, tolerance: f64) -> Option<usize> {
        let moving = self.moving_effectiveness();
        let mut candidate = None;
        for (t, m) in moving.iter().enumerate() {
            match m {
                Some(v) if *v >= target - tolerance => {
                    candidate.get_or_insert(t);
                }
                _ => candidate = None,
            }
        }
        candidate
    }
}

/// Runs the adaptive (or genie) controller described by `cfg`.
pub fn run_adaptive(cfg: &ScenarioConfig) -> Result<TraceLog> {
    if !matches!(cfg.run.mode, RunMode::Adaptive | RunMode::Genie) {
        return Err(Error::validation("run.mode", "run_adaptive needs mode adaptive or genie"));
    }
    let s = Scenario::new(cfg)?;
    let rd_max = reference_rate_avg(&s);
    run_controller(&s, &s.solver, rd_max)
}

/// Adaptive run with an explicit solver configuration and reference rate.
pub fn run_controller(s: &Scenario, solver: &SolverConfig, rd_max_avg: f64) -> Result<TraceLog> {
    if !(rd_max_avg > 0.0) {
        return Err(Error::Domain("reference rate must be > 0".into()));
    }
    solver.validate(&s.radio)?;
    let slots = s.config.run.slots as usize;
    let goal = GoalValueModel::new(&s.radio.pers, s.radio.packets)?;
    let mut state = ScenarioState::new(s)?;
    let mut queue = VirtualQueueState::default();
    let mut log = TraceLog {
        outcomes: Vec::with_capacity(slots),
        z: Vec::with_capacity(slots),
        e_th: Vec::with_capacity(slots),
        rd_max_avg,
        window: s.config.run.moving_window,
    };
    let genie = solver.mode == DecisionMode::Genie;
    let mut thetas = vec![0.0; s.radio.pers.len()];

    for t in 0..slots as u64 {
        apply_events(&s.config.events, t, &mut state, s)?;
        let draw = draw_slot(s, &state.compute, t);
        if genie {
            for (i, th) in thetas.iter_mut().enumerate() {
                *th = goal.theta(s, i, &draw);
            }
        }
        let decision = solve_slot(
            queue.z,
            &draw.channel,
            draw.d_comp,
            &state.table,
            solver,
            &s.radio,
            &state.requirements,
            genie.then_some(thetas.as_slice()),
        )?;
        let i = decision.per_index;
        let theta = if genie { thetas[i] } else { goal.theta(s, i, &draw) };
        let d_tx = s.radio.go_tx_delay(&draw.channel, i, decision.power_w);
        let d_tot = d_tx + draw.d_comp;
        let success = goal_success(theta, &state.requirements, d_tot);
        queue = update_queue(queue, success, state.requirements.e_th);
        log.outcomes.push(GoalOutcome {
            slot: t,
            theta,
            d_tx_s: d_tx,
            d_comp_s: draw.d_comp,
            d_tot_s: d_tot,
            success,
            r_d_bps: s.radio.do_rate(&draw.channel, decision.power_w),
            per: decision.per,
            power_w: decision.power_w,
        });
        log.z.push(queue.z);
        log.e_th.push(state.requirements.e_th);
    }
    Ok(log)
}

/// Fixed-decision sweep over (PER, power) or (PER, D_max) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapData {
    pub axis: GridAxis,
    pub theta_th: f64,
    pub pers: Vec<f64>,
    /// DO powers (power axis) or D_max values (delay axis), ascending.
    pub y: Vec<f64>,
    /// `[per][y]`.
    pub effectiveness: Vec<Vec<f64>>,
    /// Deadline indicator only, `[per][y]`.
    pub delay_only: Vec<Vec<f64>>,
    /// Goal-value indicator only, per PER.
    pub theta_only: Vec<f64>,
    /// Goal cost per column.
    pub cost: Vec<f64>,
    pub cost_se: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub slots: u64,
}

/// Feasible region of one effectiveness threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSummary {
    pub threshold: f64,
    pub feasible_cell_count: usize,
    /// Cheapest feasible cell `(per index, y index, cost)`.
    pub min_cost: Option<(usize, usize, f64)>,
}

impl HeatmapData {
    pub fn feasible(&self, threshold: f64) -> Vec<Vec<bool>> {
        self.effectiveness
            .iter()
            .map(|row| row.iter().map(|&e| e >= threshold).collect())
            .collect()
    }

    pub fn contour(&self, threshold: f64) -> ContourSummary {
        let mut count = 0;
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, row) in self.effectiveness.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                if e >= threshold {
                    count += 1;
                    if best.is_none_or(|b| self.cost[j] < b.2) {
                        best = Some((i, j, self.cost[j]));
                    }
                }
            }
        }
        ContourSummary {
            threshold,
            feasible_cell_count: count,
            min_cost: best,
        }
    }

    pub fn contours(&self) -> Vec<ContourSummary> {
        self.thresholds.iter().map(|&t| self.contour(t)).collect()
    }
}

/// Grid sweep at `requirements.theta_th`.
pub fn run_grid(cfg: &ScenarioConfig) -> Result<HeatmapData> {
    let s = Scenario::new(cfg)?;
    Ok(run_grid_thresholds(&s, &[cfg.requirements.theta_th])?.remove(0))
}

/// Grid sweep evaluated for several goal thresholds in one pass.
pub fn run_grid_thresholds(s: &Scenario, thetas: &[f64]) -> Result<Vec<HeatmapData>> {
    let cfg = &s.config;
    let g = &cfg.grid;
    let pers = if g.per.is_empty() { s.radio.pers.clone() } else { g.per.clone() };
    let y = match g.axis {
        GridAxis::Power if g.power_w.is_empty() => s.radio.powers.clone(),
        GridAxis::Power => g.power_w.clone(),
        GridAxis::Delay => g.d_max_s.clone(),
    };
    // Radio whose PER grid is the sweep's PER list.
    let radio = Radio::new(&RadioConfig {
        per_grid: pers.clone(),
        ..cfg.radio.clone()
    })?;
    let goal = GoalValueModel::new(&pers, radio.packets)?;
    let (np, ny) = (pers.len(), y.len());
    let slots = cfg.run.slots;
    let rd_max = reference_rate_avg(s);

    let mut state = ScenarioState {
        requirements: cfg.requirements.clone(),
        compute: s.compute.clone(),
        table: SuccessProbTable {
            pers: pers.clone(),
            p_success: vec![1.0; np],
            n_samples: vec![0; np],
        },
        table_builds: 0,
    };
    let events: Vec<ScheduledEvent> = cfg
        .events
        .iter()
        .filter(|e| e.set != EventKind::ThetaTh)
        .copied()
        .collect();

    // Difference arrays over the y axis.
    let mut delay_diff = vec![vec![0i64; ny + 1]; np];
    let mut success_diff = vec![vec![vec![0i64; ny + 1]; np]; thetas.len()];
    let mut theta_hits = vec![vec![0u64; np]; thetas.len()];
    let mut rate_sum = vec![0.0; ny];
    let mut rate_sq = vec![0.0; ny];
    let mut theta_vals = vec![0.0; np];

    for t in 0..slots {
        apply_events(&events, t, &mut state, s)?;
        let draw = draw_slot(s, &state.compute, t);
        let ch = &draw.channel;
        for (i, v) in theta_vals.iter_mut().enumerate() {
            *v = goal.theta(s, i, &draw);
        }
        match g.axis {
            GridAxis::Power => {
                for (j, &p) in y.iter().enumerate() {
                    let c = 1.0 - radio.do_rate(ch, p) / rd_max;
                    rate_sum[j] += c;
                    rate_sq[j] += c * c;
                }
                let d_max = state.requirements.d_max_s;
                for i in 0..np {
                    let k = y.partition_point(|&p| radio.go_tx_delay(ch, i, p) + draw.d_comp <= d_max);
                    add_prefix(&mut delay_diff[i], 0, k);
                    for (m, &th) in thetas.iter().enumerate() {
                        if theta_vals[i] >= th {
                            add_prefix(&mut success_diff[m][i], 0, k);
                        }
                    }
                }
            }
            GridAxis::Delay => {
                let p = g.delay_axis_power_w;
                let c = 1.0 - radio.do_rate(ch, p) / rd_max;
                for j in 0..ny {
                    rate_sum[j] += c;
                    rate_sq[j] += c * c;
                }
                for i in 0..np {
                    let d_tot = radio.go_tx_delay(ch, i, p) + draw.d_comp;
                    let k = y.partition_point(|&d| d < d_tot);
                    add_prefix(&mut delay_diff[i], k, ny);
                    for (m, &th) in thetas.iter().enumerate() {
                        if theta_vals[i] >= th {
                            add_prefix(&mut success_diff[m][i], k, ny);
                        }
                    }
                }
            }
        }
        for (m, &th) in thetas.iter().enumerate() {
            for i in 0..np {
                if theta_vals[i] >= th {
                    theta_hits[m][i] += 1;
                }
            }
        }
    }

    let n = slots as f64;
    let integrate = |diff: &[i64]| -> Vec<f64> {
        let mut acc = 0i64;
        diff[..ny]
            .iter()
            .map(|d| {
                acc += d;
                acc as f64 / n
            })
            .collect()
    };
    let delay_only: Vec<Vec<f64>> = delay_diff.iter().map(|d| integrate(d)).collect();
    let cost: Vec<f64> = rate_sum.iter().map(|c| (c / n).clamp(0.0, 1.0)).collect();
    let cost_se: Vec<f64> = rate_sum
        .iter()
        .zip(&rate_sq)
        .map(|(s1, s2)| {
            let m = s1 / n;
            ((s2 / n - m * m).max(0.0) / n).sqrt()
        })
        .collect();
    Ok(thetas
        .iter()
        .enumerate()
        .map(|(m, &th)| HeatmapData {
            axis: g.axis,
            theta_th: th,
            pers: pers.clone(),
            y: y.clone(),
            effectiveness: success_diff[m].iter().map(|d| integrate(d)).collect(),
            delay_only: delay_only.clone(),
            theta_only: theta_hits[m].iter().map(|&h| h as f64 / n).collect(),
            cost: cost.clone(),
            cost_se: cost_se.clone(),
            thresholds: g.thresholds.clone(),
            slots,
        })
        .collect())
}

fn add_prefix(diff: &mut [i64], from: usize, to: usize) {
    if from < to {
        diff[from] += 1;
        diff[to] -= 1;
    }
}

/// One candidate of the bandwidth-splitting baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub go_fraction: f64,
    pub go_bandwidth_hz: f64,
    pub effectiveness: f64,
    pub cost: f64,
    pub cost_se: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub candidates: Vec<SplitCandidate>,
    pub e_th: f64,
    /// Index of the cheapest feasible candidate.
    pub best: Option<usize>,
}

impl SplitResult {
    pub fn best(&self) -> Result<&SplitCandidate> {
        self.best.map(|b| &self.candidates[b]).ok_or_else(|| {
            Error::Infeasible(format!(
                "no bandwidth split reaches goal-effectiveness {}",
                self.e_th
            ))
        })
    }
}

/// Orthogonal baseline: the GO link gets `f·W` free of interference and picks
/// the PER with the highest success probability that meets the deadline,
/// the DO link gets `(1-f)·W` at maximum power.
pub fn run_bandwidth_split(cfg: &ScenarioConfig) -> Result<SplitResult> {
    let s = Scenario::new(cfg)?;
    run_bandwidth_split_scenario(&s)
}

pub fn run_bandwidth_split_scenario(s: &Scenario) -> Result<SplitResult> {
    let cfg = &s.config;
    let w = cfg.radio.bandwidth_hz;
    let rd_max = reference_rate_avg(s);
    let goal = GoalValueModel::new(&s.radio.pers, s.radio.packets)?;
    let solver = SolverConfig {
        omega: 0.0,
        mode: DecisionMode::Approximate,
    };
    let p_max = s.radio.max_power();
    let mut candidates = Vec::new();
    for &f in &cfg.split.go_fractions {
        let go_radio = Radio::new(&RadioConfig {
            bandwidth_hz: f * w,
            do_power_grid_w: Grid::Values(vec![0.0]),
            ..cfg.radio.clone()
        })?;
        let do_w = (1.0 - f) * w;
        let do_noise = crate::rf::noise_power(cfg.radio.noise_psd_dbm_hz, do_w, cfg.radio.noise_figure_db);
        let mut state = ScenarioState::new(s)?;
        let mut hits = 0u64;
        let mut costs = Vec::with_capacity(cfg.run.slots as usize);
        for t in 0..cfg.run.slots {
            apply_events(&cfg.events, t, &mut state, s)?;
            let draw = draw_slot(s, &state.compute, t);
            let d = solve_slot(
                1.0,
                &draw.channel,
                draw.d_comp,
                &state.table,
                &solver,
                &go_radio,
                &state.requirements,
                None,
            )?;
            let theta = goal.theta(s, d.per_index, &draw);
            let d_tot = go_radio.go_tx_delay(&draw.channel, d.per_index, 0.0) + draw.d_comp;
            if goal_success(theta, &state.requirements, d_tot) {
                hits += 1;
            }
            let rate = if do_w > 0.0 {
                shannon_rate(draw.channel.dd * p_max / do_noise, do_w)
            } else {
                0.0
            };
            costs.push(1.0 - rate / rd_max);
        }
        let n = cfg.run.slots as f64;
        let effectiveness = hits as f64 / n;
        let cost = (costs.iter().sum::<f64>() / n).clamp(0.0, 1.0);
        candidates.push(SplitCandidate {
            go_fraction: f,
            go_bandwidth_hz: f * w,
            effectiveness,
            cost,
            cost_se: batch_means_se(&costs),
            feasible: effectiveness >= cfg.requirements.e_th,
        });
    }
    let best = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.feasible)
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost))
        .map(|(k, _)| k);
    Ok(SplitResult {
        candidates,
        e_th: cfg.requirements.e_th,
        best,
    })
}

/// One point of the cost/effectiveness trade-off.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub theta_th: f64,
    pub omega: f64,
    pub genie: bool,
    pub effectiveness: f64,
    pub cost: f64,
    pub cost_se: f64,
    pub mean_z: f64,
    pub final_z_over_t: f64,
    pub convergence_slot: Option<usize>,
}

impl FrontierPoint {
    fn from_trace(theta_th: f64, omega: f64, genie: bool, log: &TraceLog, e_th: f64) -> Self {
        Self {
            theta_th,
            omega,
            genie,
            effectiveness: log.effectiveness(),
            cost: log.cost(),
            cost_se: log.cost_standard_error(),
            mean_z: log.z.iter().sum::<f64>() / log.len() as f64,
            final_z_over_t: log.z.last().copied().unwrap_or(0.0) / log.len() as f64,
            convergence_slot: log.convergence_slot(e_th, 0.01),
        }
    }
}

/// Approximate and genie controllers for every goal threshold and weight.
pub fn run_frontier(cfg: &ScenarioConfig, omegas: &[f64]) -> Result<Vec<FrontierPoint>> {
    let mut points = Vec::new();
    let base = Scenario::new(cfg)?;
    let rd_max = reference_rate_avg(&base);
    for theta in cfg.theta_sweep() {
        let mut c = cfg.clone();
        c.requirements.theta_th = theta;
        c.run.mode = RunMode::Adaptive;
        c.solver.fixed_per = None;
        c.solver.fixed_power_w = None;
        let s = Scenario::new(&c)?;
        for &omega in omegas {
            for genie in [false, true] {
                let solver = SolverConfig {
                    omega,
                    mode: if genie { DecisionMode::Genie } else { DecisionMode::Approximate },
                };
                let log = run_controller(&s, &solver, rd_max)?;
                points.push(FrontierPoint::from_trace(theta, omega, genie, &log, c.requirements.e_th));
            }
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goal::ParametricOracle;
    use crate::config::OracleConfig;

    fn small(slots: u64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.run.slots = slots;
        cfg.run.validation_samples = 500;
        cfg.run.moving_window = 10.min(slots as usize);
        cfg
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[2.0; 6], 3).unwrap(), vec![2.0; 4]);
        assert_eq!(moving_average(&[1.0, 4.0, 2.0], 1).unwrap(), vec![1.0, 4.0, 2.0]);
        let step = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        assert_eq!(moving_average(&step, 2).unwrap(), vec![0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);
        let ramp = moving_average(&step, 4).unwrap();
        assert_eq!(ramp, vec![0.25, 0.5, 0.75, 1.0]);
        assert!(moving_average(&[1.0], 2).is_err());
        assert!(moving_average(&[1.0], 0).is_err());
        let aligned = aligned_moving_average(&step, 4);
        assert_eq!(aligned[2], None);
        assert_eq!(aligned[3], Some(0.25));
    }

    #[test]
    fn forced_success_single_slot() {
        let mut cfg = small(1);
        cfg.requirements.theta_th = -100.0;
        cfg.requirements.d_max_s = 10.0;
        cfg.requirements.e_th = 0.8;
        let log = run_adaptive(&cfg).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.z[0], 0.0);
        assert_eq!(log.effectiveness(), 1.0);
    }

    #[test]
    fn silent_go_user_has_zero_cost() {
        let mut cfg = small(300);
        cfg.radio.go_power_w = 0.0;
        cfg.requirements.e_th = 0.0;
        let log = run_adaptive(&cfg).unwrap();
        assert!((log.mean_rate() / log.rd_max_avg - 1.0).abs() < 1e-12);
        assert_eq!(log.cost(), 0.0);
    }

    #[test]
    fn events_apply_at_their_slot() {
        let mut cfg = small(40);
        cfg.events = vec![
            ScheduledEvent { slot: 10, set: EventKind::ComputeOffset, value: 0.005 },
            ScheduledEvent { slot: 20, set: EventKind::ETh, value: 0.85 },
            ScheduledEvent { slot: 30, set: EventKind::ThetaTh, value: -0.4 },
        ];
        let s = Scenario::new(&cfg).unwrap();
        let mut state = ScenarioState::new(&s).unwrap();
        let base = state.table.clone();
        let before = draw_slot(&s, &state.compute, 10).d_comp;
        apply_events(&cfg.events, 10, &mut state, &s).unwrap();
        let after = draw_slot(&s, &state.compute, 10).d_comp;
        assert!((after - before - 0.005).abs() < 1e-15);
        apply_events(&cfg.events, 11, &mut state, &s).unwrap();
        assert_eq!(state.compute.offset(), 0.005);
        apply_events(&cfg.events, 20, &mut state, &s).unwrap();
        assert_eq!(state.requirements.e_th, 0.85);
        apply_events(&cfg.events, 30, &mut state, &s).unwrap();
        assert_eq!(state.requirements.theta_th, -0.4);
        assert_ne!(state.table, base);
        let log = run_adaptive(&cfg).unwrap();
        assert_eq!(log.e_th[19], 0.8);
        assert_eq!(log.e_th[20], 0.85);
        assert_eq!(log.outcomes[10].d_comp_s, after);
    }

    #[test]
    fn adaptive_run_is_reproducible() {
        let cfg = small(200);
        assert_eq!(run_adaptive(&cfg).unwrap(), run_adaptive(&cfg).unwrap());
        let mut other = cfg.clone();
        other.run.seed = 2;
        assert_ne!(run_adaptive(&cfg).unwrap(), run_adaptive(&other).unwrap());
    }

    #[test]
    fn grid_delay_axis_extremes() {
        let mut cfg = small(400);
        cfg.run.mode = RunMode::GridSweep;
        cfg.oracle = OracleConfig::Parametric(ParametricOracle {
            noise_std_nats: 0.0,
            ..ParametricOracle::default()
        });
        cfg.grid.axis = GridAxis::Delay;
        cfg.grid.d_max_s = vec![0.0, 0.045, 10.0];
        let h = run_grid(&cfg).unwrap();
        assert_eq!(h.effectiveness.len(), 13);
        for row in &h.effectiveness {
            assert_eq!(row[0], 0.0);
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
        assert_eq!(h.effectiveness[0][2], 1.0);
    }

    #[test]
    fn split_extremes() {
        let mut cfg = small(300);
        cfg.run.mode = RunMode::BandwidthSplit;
        cfg.split.go_fractions = vec![0.2, 0.5, 1.0];
        let r = run_bandwidth_split(&cfg).unwrap();
        assert_eq!(r.candidates[2].cost, 1.0);
        assert!(r.candidates.windows(2).all(|w| w[0].effectiveness <= w[1].effectiveness + 0.02));
    }

    #[test]
    fn contour_of_empty_region() {
        let h = HeatmapData {
            axis: GridAxis::Power,
            theta_th: -0.4,
            pers: vec![1e-3, 1e-2],
            y: vec![0.0, 0.1],
            effectiveness: vec![vec![0.0; 2]; 2],
            delay_only: vec![vec![0.0; 2]; 2],
            theta_only: vec![0.0; 2],
            cost: vec![1.0, 0.5],
            cost_se: vec![0.0; 2],
            thresholds: vec![0.7],
            slots: 1,
        };
        let c = h.contour(0.7);
        assert_eq!(c.feasible_cell_count, 0);
        assert_eq!(c.min_cost, None);
    }
}
