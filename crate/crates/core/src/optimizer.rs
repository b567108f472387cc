//! Lyapunov drift-plus-penalty control of the GO effectiveness constraint.
//!
//! The long-term constraint `E{success} ≥ E_th` is tracked by the virtual queue
//!
//! ```text
//! Z_{t+1} = max(0, Z_t - success_t + E_th)
//! ```
//!
//! and every slot picks the PER `γ` and the DO power `P_d` minimizing
//!
//! ```text
//! -Z·p_succ(γ)·1{D_tx(γ, P_d) + D_comp ≤ D_max} - Ω·R_d(P_d)
//! ```
//!
//! where `p_succ(γ)` comes from a lookup table estimated offline.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::goal::{oracle_theta, EntropyOracle, GoalRequirements, PacketErrorSampler};
use crate::rf::{ChannelRealization, Radio};

/// Virtual queue backlog.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VirtualQueueState {
    pub z: f64,
}

impl VirtualQueueState {
    pub fn update(self, success: bool, e_th: f64) -> Self {
        update_queue(self, success, e_th)
    }
}

pub fn update_queue(state: VirtualQueueState, success: bool, e_th: f64) -> VirtualQueueState {
    let s = if success { 1.0 } else { 0.0 };
    VirtualQueueState {
        z: (state.z - s + e_th).max(0.0),
    }
}

/// Both sides of the per-slot Lyapunov drift inequality
/// `(Z'² - Z²)/2 ≤ B + Z·(E_th - success)` for one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftCheck {
    /// `(Z'² - Z²)/2`.
    pub drift: f64,
    /// `Z·(E_th - success)`.
    pub linear_term: f64,
    pub e_th: f64,
}

impl DriftCheck {
    pub fn new(z: f64, z_next: f64, success: bool, e_th: f64) -> Self {
        let s = if success { 1.0 } else { 0.0 };
        Self {
            drift: 0.5 * (z_next * z_next - z * z),
            linear_term: z * (e_th - s),
            e_th,
        }
    }

    fn holds_with(&self, b: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.drift.abs() + self.linear_term.abs());
        self.drift <= b + self.linear_term + slack
    }

    /// Bound with `B = (1 - E_th)²/2`. Valid on success slots, and on failure
    /// slots only when `E_th ≤ 1/2`.
    pub fn holds_success_constant(&self) -> bool {
        self.holds_with(0.5 * (1.0 - self.e_th).powi(2))
    }

    /// Bound with `B = max(E_th, 1 - E_th)²/2`, which covers both outcomes.
    pub fn holds(&self) -> bool {
        self.holds_with(0.5 * self.e_th.max(1.0 - self.e_th).powi(2))
    }
}

/// Estimated `Pr{Θ ≥ Θ_th | γ}` per PER level.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessProbTable {
    pub pers: Vec<f64>,
    pub p_success: Vec<f64>,
    pub n_samples: Vec<u64>,
}

impl SuccessProbTable {
    pub fn len(&self) -> usize {
        self.pers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pers.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Parse {
            path: "success table".into(),
            message: e.to_string(),
        };
        w.write_record(["per_level", "p_success", "n_samples"]).map_err(csv_err)?;
        for k in 0..self.len() {
            w.write_record([
                self.pers[k].to_string(),
                self.p_success[k].to_string(),
                self.n_samples[k].to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("success table", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let parse = |message: String| Error::Parse {
            path: origin.to_owned(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| parse(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        if headers != ["per_level", "p_success", "n_samples"] {
            return Err(parse(format!("unexpected header {}", headers.join(","))));
        }
        let mut table = SuccessProbTable {
            pers: Vec::new(),
            p_success: Vec::new(),
            n_samples: Vec::new(),
        };
        for (row, record) in rdr.deserialize::<(f64, f64, u64)>().enumerate() {
            let (per, p, n) = record.map_err(|e| parse(format!("row {}: {e}", row + 2)))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(parse(format!("row {}: p_success outside [0, 1]", row + 2)));
            }
            table.pers.push(per);
            table.p_success.push(p);
            table.n_samples.push(n);
        }
        Ok(table)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, &path.display().to_string())
    }
}

/// Weighted least-squares projection onto non-increasing sequences
/// (pool-adjacent-violators).
pub fn isotonic_non_increasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    // Blocks of (weighted mean, weight, count).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, c2) = blocks[blocks.len() - 1];
            let (m1, w1, c1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            let m = if w > 0.0 { (m1 * w1 + m2 * w2) / w } else { 0.5 * (m1 + m2) };
            blocks.push((m, w, c1 + c2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, c)| std::iter::repeat_n(m, c))
        .collect()
}

/// Monte Carlo estimate of `Pr{Θ ≥ θ_th | γ}` for each `γ`, projected to be
/// non-increasing in `γ`.
pub fn build_success_table<R: Rng + ?Sized>(
    oracle: &EntropyOracle,
    gamma_grid: &[f64],
    theta_th: f64,
    n_packets: u64,
    n_validation: u64,
    rng: &mut R,
) -> Result<SuccessProbTable> {
    if n_validation < 1 {
        return Err(Error::validation("run.validation_samples", "must be >= 1"));
    }
    if n_packets < 1 {
        return Err(Error::Domain("a batch needs at least one packet".into()));
    }
    let mut raw = Vec::with_capacity(gamma_grid.len());
    for &gamma in gamma_grid {
        let sampler = PacketErrorSampler::new(n_packets, gamma)?;
        let mut hits = 0u64;
        for _ in 0..n_validation {
            let errors = sampler.sample(rng);
            let theta = oracle_theta(oracle, errors as f64 / n_packets as f64, rng);
            if theta >= theta_th {
                hits += 1;
            }
        }
        raw.push(hits as f64 / n_validation as f64);
    }
    let weights = vec![n_validation as f64; raw.len()];
    Ok(SuccessProbTable {
        pers: gamma_grid.to_vec(),
        p_success: isotonic_non_increasing(&raw, &weights),
        n_samples: vec![n_validation; raw.len()],
    })
}

/// Per-slot drift-plus-penalty objective.
pub fn dpp_objective(z: f64, p_succ: f64, delay_ok: bool, r_d: f64, omega: f64) -> f64 {
    let ok = if delay_ok { 1.0 } else { 0.0 };
    -(z * p_succ * ok) - omega * r_d
}

/// Which decisions the solver may pick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionMode {
    /// Full grid search with table success probabilities.
    Approximate,
    /// Full grid search with the realized goal indicator per PER.
    Genie,
    /// PER fixed to the grid entry at this index, power adapted.
    FixedPer(usize),
    /// Both coordinates fixed to grid indices.
    FixedBoth(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub omega: f64,
    pub mode: DecisionMode,
}

impl SolverConfig {
    pub fn validate(&self, radio: &Radio) -> Result<()> {
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::validation("solver.omega", "must be >= 0"));
        }
        match self.mode {
            DecisionMode::FixedPer(i) if i >= radio.pers.len() => {
                Err(Error::validation("solver.fixed_per", "not on the PER grid"))
            }
            DecisionMode::FixedBoth(i, _) if i >= radio.pers.len() => {
                Err(Error::validation("solver.fixed_per", "not on the PER grid"))
            }
            DecisionMode::FixedBoth(_, j) if j >= radio.powers.len() => {
                Err(Error::validation("solver.fixed_power_w", "not on the power grid"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotDecision {
    pub per_index: usize,
    pub power_index: usize,
    pub per: f64,
    pub power_w: f64,
    pub objective: f64,
}

/// Minimizes the drift-plus-penalty objective over the decision grid.
///
/// Ties go to the lowest index in row-major order (PER ascending outer, power
/// ascending inner). The search exploits two monotonicities instead of
/// enumerating all cells: at fixed PER the deadline indicator is a prefix of
/// the ascending power grid, and `R_d` is non-decreasing in power, so each
/// row's objective is non-increasing on both sides of the prefix boundary.
/// The result is identical to plain enumeration.
pub fn solve_slot(
    z: f64,
    ch: &ChannelRealization,
    d_comp: f64,
    table: &SuccessProbTable,
    cfg: &SolverConfig,
    radio: &Radio,
    req: &GoalRequirements,
    genie_theta: Option<&[f64]>,
) -> Result<SlotDecision> {
    if radio.pers.is_empty() || radio.powers.is_empty() {
        return Err(Error::validation("radio", "empty decision grid"));
    }
    if table.len() != radio.pers.len() {
        return Err(Error::validation(
            "solver",
            "success table does not match the PER grid",
        ));
    }
    let (rows, cols) = match cfg.mode {
        DecisionMode::Approximate | DecisionMode::Genie => (0..radio.pers.len(), 0..radio.powers.len()),
        DecisionMode::FixedPer(i) => (i..i + 1, 0..radio.powers.len()),
        DecisionMode::FixedBoth(i, j) => (i..i + 1, j..j + 1),
    };
    if rows.end > radio.pers.len() || cols.end > radio.powers.len() {
        return Err(Error::validation("solver", "fixed decision not on the grid"));
    }
    let genie = match cfg.mode {
        DecisionMode::Genie => Some(genie_theta.ok_or_else(|| {
            Error::validation("solver.mode", "genie mode requires realized goal values")
        })?),
        _ => None,
    };

    let mut rates: Vec<Option<f64>> = vec![None; radio.powers.len()];
    let mut rate = |j: usize| -> f64 {
        *rates[j].get_or_insert_with(|| radio.do_rate(ch, radio.powers[j]))
    };

    let mut best: Option<SlotDecision> = None;
    for i in rows {
        let p = match genie {
            Some(theta) => {
                if theta[i] >= req.theta_th {
                    1.0
                } else {
                    0.0
                }
            }
            None => table.p_success[i],
        };
        let ok = |j: usize| radio.go_tx_delay(ch, i, radio.powers[j]) + d_comp <= req.d_max_s;
        let boundary = cols.start + partition_point(cols.clone(), ok);

        let mut row_best: Option<(usize, f64)> = None;
        for (segment, delay_ok) in [(cols.start..boundary, true), (boundary..cols.end, false)] {
            if segment.is_empty() {
                continue;
            }
            let min_value = dpp_objective(z, p, delay_ok, rate(segment.end - 1), cfg.omega);
            let first = segment.start
                + partition_point(segment.clone(), |j| {
                    dpp_objective(z, p, delay_ok, rate(j), cfg.omega) > min_value
                });
            let candidate = (first, dpp_objective(z, p, delay_ok, rate(first), cfg.omega));
            row_best = match row_best {
                Some(b) if b.1 <= candidate.1 => Some(b),
                _ => Some(candidate),
            };
        }
        let (j, value) = row_best.expect("non-empty row");
        if best.is_none_or(|b| value < b.objective) {
            best = Some(SlotDecision {
                per_index: i,
                power_index: j,
                per: radio.pers[i],
                power_w: radio.powers[j],
                objective: value,
            });
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// First index of `range` where `pred` is false, assuming `pred` holds on a
/// prefix. Returned as an offset from `range.start`.
fn partition_point(range: std::ops::Range<usize>, mut pred: impl FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (range.start, range.end);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo - range.start
}

/// Mean-rate stability diagnostic of a virtual queue trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `(t, Z_t / t)` at logarithmically spaced checkpoints.
    pub trajectory: Vec<(usize, f64)>,
    pub final_ratio: f64,
    pub stable: bool,
}

/// Reports `Z_t/t` along a trajectory and whether it trends to zero.
///
/// The run is called stable when the final ratio is below 0.01 or when it
/// has at least dropped by 40% over the second half of the run.
pub fn theoretical_bound_check(history: &[f64]) -> StabilityReport {
    let n = history.len();
    if n == 0 {
        return StabilityReport {
            trajectory: Vec::new(),
            final_ratio: 0.0,
            stable: true,
        };
    }
    let ratio = |t: usize| history[t - 1] / t as f64;
    let mut trajectory = Vec::new();
    let mut t = 1usize;
    while t < n {
        trajectory.push((t, ratio(t)));
        t *= 2;
    }
    trajectory.push((n, ratio(n)));
    let final_ratio = ratio(n);
    let half = (n / 2).max(1);
    let stable = final_ratio < 0.01 || final_ratio <= 0.6 * ratio(half);
    StabilityReport {
        trajectory,
        final_ratio,
        stable,
    }
}
