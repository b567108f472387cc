//! Helpers shared by integration test targets.
#![allow(dead_code)]

use gocoexist::goal::GoalRequirements;
use gocoexist::optimizer::{dpp_objective, SlotDecision, SuccessProbTable};
use gocoexist::rf::{ChannelRealization, ChannelSampler, FadingParams, Geometry, Grid, Radio, RadioConfig};
use rand::Rng;

/// Random solver instance on a reduced decision grid.
pub struct Instance {
    pub radio: Radio,
    pub channel: ChannelRealization,
    pub table: SuccessProbTable,
    pub req: GoalRequirements,
    pub z: f64,
    pub omega: f64,
    pub d_comp: f64,
    pub theta: Vec<f64>,
}

pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let n_per = rng.random_range(1..=13);
    let mut pers: Vec<f64> = (0..n_per).map(|_| 10f64.powf(rng.random_range(-7.0..-1.0))).collect();
    pers.sort_by(f64::total_cmp);
    pers.dedup();
    let points = rng.random_range(2..=60);
    let stop = rng.random_range(0.01..0.4);
    let config = RadioConfig {
        per_grid: pers,
        do_power_grid_w: Grid::Linear { start: 0.0, stop, points },
        ..RadioConfig::default()
    };
    let radio = Radio::new(&config).unwrap();
    let sampler = ChannelSampler::new(&Geometry::default(), &FadingParams::default()).unwrap();
    let channel = sampler.sample(rng);
    let mut p: Vec<f64> = (0..radio.pers.len()).map(|_| rng.random_range(0.0..=1.0)).collect();
    // Occasional exact ties in the success column.
    if rng.random_bool(0.3) {
        p.iter_mut().for_each(|v| *v = (*v * 4.0).round() / 4.0);
    }
    p.sort_by(|a, b| b.total_cmp(a));
    let table = SuccessProbTable {
        pers: radio.pers.clone(),
        p_success: p,
        n_samples: vec![1; radio.pers.len()],
    };
    let req = GoalRequirements {
        theta_th: -0.5,
        d_max_s: rng.random_range(0.02..0.08),
        e_th: 0.8,
    };
    let z = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..60.0) };
    let omega = if rng.random_bool(0.1) { 0.0 } else { 10f64.powf(rng.random_range(-11.0..-6.0)) };
    let theta = (0..radio.pers.len()).map(|_| rng.random_range(-1.0..0.2)).collect();
    Instance {
        radio,
        channel,
        table,
        req,
        z,
        omega,
        d_comp: rng.random_range(0.005..0.04),
        theta,
    }
}

/// Exhaustive row-major enumeration keeping the first strict minimum.
pub fn naive_solve(inst: &Instance, success: &[f64]) -> SlotDecision {
    let radio = &inst.radio;
    let mut best: Option<SlotDecision> = None;
    for (i, &per) in radio.pers.iter().enumerate() {
        for (j, &power_w) in radio.powers.iter().enumerate() {
            let delay_ok = radio.go_tx_delay(&inst.channel, i, power_w) + inst.d_comp <= inst.req.d_max_s;
            let r_d = radio.do_rate(&inst.channel, power_w);
            let objective = dpp_objective(inst.z, success[i], delay_ok, r_d, inst.omega);
            if best.is_none_or(|b| objective < b.objective) {
                best = Some(SlotDecision {
                    per_index: i,
                    power_index: j,
                    per,
                    power_w,
                    objective,
                });
            }
        }
    }
    best.unwrap()
}

pub fn genie_success(inst: &Instance) -> Vec<f64> {
    inst.theta
        .iter()
        .map(|&t| if t >= inst.req.theta_th { 1.0 } else { 0.0 })
        .collect()
}

/// Running sum helper: mean and batch-means standard error of `xs`.
pub fn mean_and_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (mean, (var / batches as f64).sqrt())
}
