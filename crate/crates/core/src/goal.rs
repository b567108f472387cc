//! Goal value, goal success and the accumulated metrics.
//!
//! The classifier at the edge is abstracted by an [`EntropyOracle`]: a
//! stochastic map from the realized fraction of errored packets to the batch
//! average classification entropy (nats). The goal value of a slot is the
//! negative relative entropy increase (NREI)
//!
//! ```text
//! Θ = -(H - H_min) / H_min
//! ```
//!
//! and a slot succeeds when `Θ ≥ Θ_th` and the end-to-end delay meets `D_max`.

use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Shannon entropy in nats with `0·ln 0 = 0`.
pub fn entropy(p: &[f64]) -> Result<f64> {
    if p.is_empty() || p.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Domain("entropy requires non-negative probabilities".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Domain(format!("probabilities sum to {total}, expected 1")));
    }
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    Ok(h.clamp(0.0, (p.len() as f64).ln()))
}

/// Arithmetic mean of per-pattern entropies.
pub fn batch_avg_entropy(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("batch is empty".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Negative relative entropy increase.
pub fn nrei(h: f64, h_min: f64) -> Result<f64> {
    if !(h_min > 0.0) {
        return Err(Error::Domain(format!("H_min must be > 0, got {h_min}")));
    }
    Ok(-(h - h_min) / h_min)
}

/// Inverse-CDF sampler of `Binomial(n, γ)`.
///
/// Driving every PER level of a slot with the same uniform yields error
/// counts that are non-decreasing in `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketErrorSampler {
    n: u64,
    offset: u64,
    cdf: Vec<f64>,
}

impl PacketErrorSampler {
    pub fn new(n: u64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Domain(format!("PER {gamma} outside [0, 1]")));
        }
        if gamma == 0.0 || gamma == 1.0 || n == 0 {
            let k = if gamma == 1.0 { n } else { 0 };
            return Ok(Self { n, offset: k, cdf: vec![1.0] });
        }
        let nf = n as f64;
        let mean = nf * gamma;
        let sd = (mean * (1.0 - gamma)).sqrt();
        let mode = (((nf + 1.0) * gamma).floor() as u64).min(n);
        let span = (12.0 * sd + 12.0).ceil() as u64;
        let lo = mode.saturating_sub(span);
        let hi = (mode + span).min(n);
        // pmf relative to the mode, by the ratio recurrence in both directions.
        let ratio = gamma / (1.0 - gamma);
        let len = (hi - lo + 1) as usize;
        let mut pmf = vec![0.0; len];
        let m = (mode - lo) as usize;
        pmf[m] = 1.0;
        for k in (lo..mode).rev() {
            let i = (k - lo) as usize;
            // p(k) = p(k+1)·(k+1) / ((n-k)·ratio)
            pmf[i] = pmf[i + 1] * (k + 1) as f64 / ((n - k) as f64 * ratio);
        }
        for k in mode + 1..=hi {
            let i = (k - lo) as usize;
            // p(k) = p(k-1)·(n-k+1)·ratio / k
            pmf[i] = pmf[i - 1] * (n - k + 1) as f64 * ratio / k as f64;
        }
        let total: f64 = pmf.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        *cdf.last_mut().expect("non-empty") = 1.0;
        Ok(Self { n, offset: lo, cdf })
    }

    pub fn trials(&self) -> u64 {
        self.n
    }

    /// Error count for the uniform `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> u64 {
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.offset + idx as u64
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.quantile(rng.random())
    }
}

/// Number of errored packets in a batch of `n_packets`.
pub fn sample_packet_errors<R: Rng + ?Sized>(n_packets: u64, gamma: f64, rng: &mut R) -> u64 {
    let gamma = gamma.clamp(0.0, 1.0);
    PacketErrorSampler::new(n_packets, gamma)
        .expect("clamped probability")
        .sample(rng)
}

/// Parametric oracle `H(f) = H_min·(1 + a·f^b) + ε`, `ε` a zero-mean Gaussian
/// truncated at `±truncation·σ`, clipped to `[0, ln L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParametricOracle {
    pub h_min_nats: f64,
    pub labels: u32,
    pub scale: f64,
    pub exponent: f64,
    pub noise_std_nats: f64,
    pub truncation_sigmas: f64,
}

impl Default for ParametricOracle {
    fn default() -> Self {
        Self {
            h_min_nats: 0.3,
            labels: 10,
            scale: 8.9,
            exponent: 0.65,
            noise_std_nats: 0.045,
            truncation_sigmas: 3.0,
        }
    }
}

impl ParametricOracle {
    pub fn validate(&self) -> Result<()> {
        if self.labels < 2 {
            return Err(Error::validation("oracle.labels", "must be >= 2"));
        }
        let h_max = (self.labels as f64).ln();
        if !(self.h_min_nats > 0.0 && self.h_min_nats <= h_max) {
            return Err(Error::validation("oracle.h_min_nats", "must lie in (0, ln labels]"));
        }
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(Error::validation("oracle.scale", "must be >= 0"));
        }
        if !(self.exponent.is_finite() && self.exponent > 0.0) {
            return Err(Error::validation("oracle.exponent", "must be > 0"));
        }
        if !(self.noise_std_nats.is_finite() && self.noise_std_nats >= 0.0) {
            return Err(Error::validation("oracle.noise_std_nats", "must be >= 0"));
        }
        if !(self.truncation_sigmas > 0.0) {
            return Err(Error::validation("oracle.truncation_sigmas", "must be > 0"));
        }
        Ok(())
    }

    /// Noise-free entropy at error fraction `f`.
    pub fn distortion(&self, f: f64) -> f64 {
        self.h_min_nats * (1.0 + self.scale * f.max(0.0).powf(self.exponent))
    }

    fn noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.noise_std_nats == 0.0 {
            return 0.0;
        }
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z.abs() <= self.truncation_sigmas {
                return z * self.noise_std_nats;
            }
        }
    }
}

/// Probability levels of the quantile-table format.
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Entropy distribution at one PER level of a table oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelDistribution {
    /// Sorted entropy samples, resampled uniformly.
    Samples(Vec<f64>),
    /// Entropy at [`QUANTILE_LEVELS`], interpolated linearly and extended
    /// linearly beyond the outer quantiles.
    Quantiles([f64; 5]),
}

impl LevelDistribution {
    fn knots(q: &[f64; 5]) -> ([f64; 7], [f64; 7]) {
        let u = [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0];
        let lo = q[0] - (q[1] - q[0]) / 0.2 * 0.05;
        let hi = q[4] + (q[4] - q[3]) / 0.2 * 0.05;
        (u, [lo, q[0], q[1], q[2], q[3], q[4], hi])
    }

    /// Inverse CDF at `u ∈ [0,1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            LevelDistribution::Samples(s) => {
                let idx = ((u * s.len() as f64) as usize).min(s.len() - 1);
                s[idx]
            }
            LevelDistribution::Quantiles(q) => {
                let (us, vs) = Self::knots(q);
                let k = us.partition_point(|&x| x <= u).clamp(1, us.len() - 1);
                let w = (u - us[k - 1]) / (us[k] - us[k - 1]);
                vs[k - 1] + w * (vs[k] - vs[k - 1])
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            LevelDistribution::Samples(s) => s.iter().sum::<f64>() / s.len() as f64,
            LevelDistribution::Quantiles(q) => {
                let (us, vs) = Self::knots(q);
                (1..us.len())
                    .map(|k| (us[k] - us[k - 1]) * 0.5 * (vs[k] + vs[k - 1]))
                    .sum()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableLevel {
    pub per: f64,
    pub dist: LevelDistribution,
}

/// Oracle driven by measured entropy distributions per PER level.
///
/// A draw uses one uniform `u` for every level. Level quantile functions are
/// replaced by their running maximum over ascending PER, which makes the
/// entropy stochastically non-decreasing in the error fraction, and the
/// entropy at an error fraction between two levels interpolates linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct TableOracle {
    levels: Vec<TableLevel>,
    h_min: f64,
    labels: u32,
}

impl TableOracle {
    pub fn new(mut levels: Vec<TableLevel>, labels: u32, h_min: Option<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::validation("oracle.table", "table has no PER levels"));
        }
        if labels < 2 {
            return Err(Error::validation("oracle.labels", "must be >= 2"));
        }
        levels.sort_by(|a, b| a.per.total_cmp(&b.per));
        let h_max = (labels as f64).ln();
        for level in &mut levels {
            if !(level.per >= 0.0 && level.per <= 1.0) {
                return Err(Error::validation("oracle.table", "per_level must lie in [0, 1]"));
            }
            match &mut level.dist {
                LevelDistribution::Samples(s) => {
                    if s.is_empty() {
                        return Err(Error::validation("oracle.table", "empty sample set"));
                    }
                    s.sort_by(f64::total_cmp);
                    if !s.iter().all(|&h| h >= 0.0 && h <= h_max) {
                        return Err(Error::validation(
                            "oracle.table",
                            "entropy samples must lie in [0, ln labels]",
                        ));
                    }
                }
                LevelDistribution::Quantiles(q) => {
                    if !q.iter().all(|&h| h >= 0.0 && h <= h_max) || !q.windows(2).all(|w| w[0] <= w[1]) {
                        return Err(Error::validation(
                            "oracle.table",
                            "quantiles must be non-decreasing within [0, ln labels]",
                        ));
                    }
                }
            }
        }
        if levels.windows(2).any(|w| w[0].per == w[1].per) {
            return Err(Error::validation("oracle.table", "duplicate per_level"));
        }
        let h_min = h_min.unwrap_or_else(|| levels[0].dist.mean());
        if !(h_min > 0.0 && h_min <= h_max) {
            return Err(Error::validation("oracle.h_min_nats", "must lie in (0, ln labels]"));
        }
        Ok(Self { levels, h_min, labels })
    }

    /// Reads either `per_level,sample_entropy` or
    /// `per_level,q05,q25,q50,q75,q95`.
    pub fn from_csv_reader<R: Read>(
        reader: R,
        origin: &str,
        labels: u32,
        h_min: Option<f64>,
    ) -> Result<Self> {
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
        let samples = headers == ["per_level", "sample_entropy"];
        let quantiles = headers == ["per_level", "q05", "q25", "q50", "q75", "q95"];
        if !samples && !quantiles {
            return Err(parse(format!("unrecognized header {}", headers.join(","))));
        }
        let mut levels: Vec<TableLevel> = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| parse(e.to_string()))?;
            let values = record
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse(format!("row {}: {e}", row + 2)))?;
            let per = values[0];
            if samples {
                match levels.iter_mut().find(|l| l.per == per) {
                    Some(TableLevel { dist: LevelDistribution::Samples(s), .. }) => s.push(values[1]),
                    _ => levels.push(TableLevel {
                        per,
                        dist: LevelDistribution::Samples(vec![values[1]]),
                    }),
                }
            } else {
                if levels.iter().any(|l| l.per == per) {
                    return Err(parse(format!("row {}: duplicate per_level {per}", row + 2)));
                }
                levels.push(TableLevel {
                    per,
                    dist: LevelDistribution::Quantiles([values[1], values[2], values[3], values[4], values[5]]),
                });
            }
        }
        Self::new(levels, labels, h_min)
    }

    pub fn from_csv_path(path: &Path, labels: u32, h_min: Option<f64>) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, &path.display().to_string(), labels, h_min)
    }

    pub fn levels(&self) -> &[TableLevel] {
        &self.levels
    }

    /// Entropy at error fraction `f` for the common uniform `u`.
    pub fn entropy_at(&self, f: f64, u: f64) -> f64 {
        let hi = self.levels.partition_point(|l| l.per <= f);
        let mut running = f64::NEG_INFINITY;
        let mut values = [0.0; 2];
        let upto = hi.min(self.levels.len() - 1);
        for (k, level) in self.levels.iter().enumerate().take(upto + 1) {
            running = running.max(level.dist.quantile(u));
            if k + 1 == upto {
                values[0] = running;
            }
            if k == upto {
                values[1] = running;
            }
        }
        let h = if hi == 0 || hi == self.levels.len() {
            values[1]
        } else {
            let (a, b) = (self.levels[hi - 1].per, self.levels[hi].per);
            let w = (f - a) / (b - a);
            (1.0 - w) * values[0] + w * values[1]
        };
        h.clamp(0.0, (self.labels as f64).ln())
    }
}

/// Stochastic map from error fraction to batch average entropy.
#[derive(Debug, Clone, PartialEq)]
pub enum EntropyOracle {
    Parametric(ParametricOracle),
    Table(TableOracle),
}

impl EntropyOracle {
    pub fn h_min(&self) -> f64 {
        match self {
            EntropyOracle::Parametric(p) => p.h_min_nats,
            EntropyOracle::Table(t) => t.h_min,
        }
    }

    pub fn labels(&self) -> u32 {
        match self {
            EntropyOracle::Parametric(p) => p.labels,
            EntropyOracle::Table(t) => t.labels,
        }
    }

    /// Randomness of one oracle draw, shared by every error fraction it is
    /// evaluated at.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> OracleDraw {
        match self {
            EntropyOracle::Parametric(p) => OracleDraw(p.noise(rng)),
            EntropyOracle::Table(_) => OracleDraw(rng.random()),
        }
    }

    /// Entropy at error fraction `f` for a given draw.
    pub fn entropy_for(&self, f: f64, draw: OracleDraw) -> f64 {
        match self {
            EntropyOracle::Parametric(p) => {
                (p.distortion(f) + draw.0).clamp(0.0, (p.labels as f64).ln())
            }
            EntropyOracle::Table(t) => t.entropy_at(f, draw.0),
        }
    }

    pub fn theta_for(&self, f: f64, draw: OracleDraw) -> f64 {
        -(self.entropy_for(f, draw) - self.h_min()) / self.h_min()
    }

    /// One batch-average entropy draw at error fraction `f`.
    pub fn sample_entropy<R: Rng + ?Sized>(&self, f: f64, rng: &mut R) -> f64 {
        let d = self.draw(rng);
        self.entropy_for(f, d)
    }
}

/// Noise term (parametric) or uniform (table) of one oracle draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDraw(pub f64);

/// Goal value Θ for one batch with realized error fraction `f`.
pub fn oracle_theta<R: Rng + ?Sized>(oracle: &EntropyOracle, f: f64, rng: &mut R) -> f64 {
    let d = oracle.draw(rng);
    oracle.theta_for(f, d)
}

/// Goal thresholds and the long-term effectiveness target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GoalRequirements {
    pub theta_th: f64,
    pub d_max_s: f64,
    pub e_th: f64,
}

impl Default for GoalRequirements {
    fn default() -> Self {
        Self {
            theta_th: -0.5,
            d_max_s: 0.050,
            e_th: 0.8,
        }
    }
}

impl GoalRequirements {
    pub fn validate(&self) -> Result<()> {
        if !self.theta_th.is_finite() {
            return Err(Error::validation("requirements.theta_th", "must be finite"));
        }
        if !(self.d_max_s.is_finite() && self.d_max_s > 0.0) {
            return Err(Error::validation("requirements.d_max_s", "must be > 0"));
        }
        if !(self.e_th >= 0.0 && self.e_th < 1.0) {
            return Err(Error::validation("requirements.e_th", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Realized outcome of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalOutcome {
    pub slot: u64,
    pub theta: f64,
    pub d_tx_s: f64,
    pub d_comp_s: f64,
    pub d_tot_s: f64,
    pub success: bool,
    pub r_d_bps: f64,
    pub per: f64,
    pub power_w: f64,
}

pub fn goal_success(theta: f64, req: &GoalRequirements, d_tot: f64) -> bool {
    theta >= req.theta_th && d_tot <= req.d_max_s
}

pub fn effectiveness(history: &[bool]) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::Domain("effectiveness of an empty history".into()));
    }
    Ok(history.iter().filter(|&&s| s).count() as f64 / history.len() as f64)
}

/// Relative DO rate loss against the reference rate, clamped to `[0, 1]`.
pub fn goal_cost(avg_rd: f64, rd_max_avg: f64) -> Result<f64> {
    if !(rd_max_avg > 0.0) {
        return Err(Error::Domain(format!("reference rate must be > 0, got {rd_max_avg}")));
    }
    Ok(((rd_max_avg - avg_rd) / rd_max_avg).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn noiseless(scale: f64, exponent: f64) -> EntropyOracle {
        EntropyOracle::Parametric(ParametricOracle {
            scale,
            exponent,
            noise_std_nats: 0.0,
            ..ParametricOracle::default()
        })
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[0.1; 10]).unwrap() - 10f64.ln()).abs() < 1e-12);
        assert_eq!(entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert!((entropy(&[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(entropy(&[0.5, 0.6]).is_err());
        assert!(entropy(&[-0.5, 1.5]).is_err());
    }

    #[test]
    fn batch_and_nrei_examples() {
        assert_eq!(batch_avg_entropy(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(batch_avg_entropy(&[0.0, 10f64.ln()]).unwrap(), 10f64.ln() / 2.0);
        assert!((batch_avg_entropy(&[0.7; 20]).unwrap() - 0.7).abs() < 1e-12);
        assert!(batch_avg_entropy(&[]).is_err());
        assert_eq!(nrei(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(nrei(0.6, 0.3).unwrap(), -1.0);
        assert!((nrei(0.45, 0.3).unwrap() + 0.5).abs() < 1e-12);
        assert!(nrei(0.1, 0.0).is_err());
    }

    #[test]
    fn packet_error_examples() {
        let mut rng = stream(1, Purpose::PacketErrors, 0);
        assert_eq!(sample_packet_errors(30720, 0.0, &mut rng), 0);
        assert_eq!(sample_packet_errors(30720, 1.0, &mut rng), 30720);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_packet_errors(30720, 1e-3, &mut rng) as f64)
            .sum::<f64>()
            / n as f64;
        assert!((mean / 30.72 - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn error_sampler_matches_binomial_pmf() {
        // Exact pmf by direct log-gamma evaluation.
        let (n, p) = (200u64, 0.03f64);
        let pmf = |k: u64| {
            let lg = |x: f64| libm::lgamma(x);
            (lg(n as f64 + 1.0) - lg(k as f64 + 1.0) - lg((n - k) as f64 + 1.0)
                + k as f64 * p.ln()
                + (n - k) as f64 * (1.0 - p).ln())
            .exp()
        };
        let s = PacketErrorSampler::new(n, p).unwrap();
        let mut cdf = 0.0;
        for k in 0..=14u64 {
            cdf += pmf(k);
            // Largest u mapping to k sits just below the cumulative mass.
            assert_eq!(s.quantile(cdf - 1e-12), k, "k={k}");
            assert_eq!(s.quantile((cdf + 1e-12).min(0.999_999_999)), (k + 1).min(n));
        }
    }

    #[test]
    fn error_counts_monotone_in_per() {
        let gammas = [1e-7, 1e-5, 1e-3, 4e-3, 2e-2];
        let samplers: Vec<_> = gammas.iter().map(|&g| PacketErrorSampler::new(30720, g).unwrap()).collect();
        let mut rng = stream(9, Purpose::PacketErrors, 0);
        for _ in 0..10_000 {
            let u: f64 = rng.random();
            let counts: Vec<u64> = samplers.iter().map(|s| s.quantile(u)).collect();
            assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(PacketErrorSampler::new(10, 1.5).is_err());
    }

    #[test]
    fn noiseless_oracle_examples() {
        let mut rng = stream(1, Purpose::EntropyNoise, 0);
        assert_eq!(oracle_theta(&noiseless(8.9, 0.65), 0.0, &mut rng), 0.0);
        let theta = oracle_theta(&noiseless(2.0, 1.0), 0.25, &mut rng);
        assert!((theta + 0.5).abs() < 1e-12);
    }

    #[test]
    fn parametric_noise_is_truncated() {
        let oracle = ParametricOracle::default();
        let mut rng = stream(2, Purpose::EntropyNoise, 0);
        for _ in 0..10_000 {
            let e = oracle.noise(&mut rng);
            assert!(e.abs() <= 3.0 * oracle.noise_std_nats);
        }
    }

    #[test]
    fn table_oracle_mean_matches_table() {
        let mut levels = Vec::new();
        let mut rng = stream(3, Purpose::EntropyNoise, 99);
        for (k, &per) in [1e-4, 1e-3, 1e-2].iter().enumerate() {
            let base = 0.3 + 0.2 * k as f64;
            let samples = (0..500).map(|_| base + 0.1 * rng.random::<f64>()).collect();
            levels.push(TableLevel { per, dist: LevelDistribution::Samples(samples) });
        }
        let table = TableOracle::new(levels, 10, None).unwrap();
        let level_mean = table.levels()[2].dist.mean();
        let oracle = EntropyOracle::Table(table);
        let h_min = oracle.h_min();
        let n = 100_000;
        let mut rng = stream(3, Purpose::EntropyNoise, 0);
        let mean = (0..n).map(|_| oracle_theta(&oracle, 1e-2, &mut rng)).sum::<f64>() / n as f64;
        let expected = -(level_mean - h_min) / h_min;
        assert!((mean / expected - 1.0).abs() < 0.01, "{mean} vs {expected}");
    }

    #[test]
    fn table_oracle_monotone_in_fraction_for_fixed_u() {
        let levels = vec![
            TableLevel { per: 1e-4, dist: LevelDistribution::Quantiles([0.3, 0.35, 0.4, 0.45, 0.5]) },
            // Deliberately lower than the previous level: running max restores order.
            TableLevel { per: 1e-3, dist: LevelDistribution::Quantiles([0.2, 0.3, 0.35, 0.4, 0.45]) },
            TableLevel { per: 1e-2, dist: LevelDistribution::Quantiles([0.6, 0.7, 0.8, 0.9, 1.0]) },
        ];
        let table = TableOracle::new(levels, 10, None).unwrap();
        for &u in &[0.0, 0.01, 0.3, 0.5, 0.9, 0.999] {
            let mut last = f64::NEG_INFINITY;
            for k in 0..=300 {
                let f = 0.03 * k as f64 / 300.0;
                let h = table.entropy_at(f, u);
                assert!(h >= last - 1e-15, "u={u} f={f}");
                last = h;
            }
        }
    }

    #[test]
    fn table_csv_formats() {
        let s = "per_level,sample_entropy\n1e-3,0.3\n1e-3,0.4\n1e-2,0.9\n";
        let t = TableOracle::from_csv_reader(s.as_bytes(), "x", 10, None).unwrap();
        assert_eq!(t.levels().len(), 2);
        assert!((t.h_min - 0.35).abs() < 1e-12);
        let q = "per_level,q05,q25,q50,q75,q95\n1e-3,0.3,0.32,0.35,0.37,0.4\n";
        let t = TableOracle::from_csv_reader(q.as_bytes(), "x", 10, Some(0.3)).unwrap();
        assert_eq!(t.h_min, 0.3);
        let bad = "per,h\n1,2\n";
        assert!(TableOracle::from_csv_reader(bad.as_bytes(), "x", 10, None).is_err());
    }

    #[test]
    fn success_and_metrics() {
        let req = GoalRequirements { theta_th: -0.4, d_max_s: 0.045, e_th: 0.8 };
        assert!(goal_success(0.0, &req, 0.010));
        assert!(!goal_success(-0.5, &req, 0.010));
        assert!(!goal_success(0.0, &req, f64::INFINITY));
        assert_eq!(effectiveness(&[true; 5]).unwrap(), 1.0);
        assert_eq!(effectiveness(&[true, false, true, false]).unwrap(), 0.5);
        assert!(effectiveness(&[]).is_err());
        assert_eq!(goal_cost(5.0, 5.0).unwrap(), 0.0);
        assert_eq!(goal_cost(0.0, 5.0).unwrap(), 1.0);
        assert!((goal_cost(0.94, 1.0).unwrap() - 0.06).abs() < 1e-12);
        assert_eq!(goal_cost(1.01, 1.0).unwrap(), 0.0);
        assert!(goal_cost(1.0, 0.0).is_err());
    }

    #[test]
    fn bernoulli_effectiveness() {
        let mut rng = stream(5, Purpose::EntropyNoise, 0);
        let history: Vec<bool> = (0..50_000).map(|_| rng.random::<f64>() < 0.8).collect();
        assert!((effectiveness(&history).unwrap() - 0.8).abs() < 0.01);
    }
}
