//! Edge-server computation delay.
//!
//! A delay model is a base distribution plus an additive systematic offset.
//! Histograms are piecewise uniform: a bin is drawn by its probability and the
//! value is then uniform inside the bin (a zero-width bin is a point mass).

use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramBin {
    #[serde(alias = "bin_low_s")]
    pub low_s: f64,
    #[serde(alias = "bin_high_s")]
    pub high_s: f64,
    pub prob: f64,
}

/// Empirical delay histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<HistogramBin>,
    cumulative: Vec<f64>,
}

/// Default synthetic histogram: 1 ms bins from 11 ms to 31 ms, right-skewed.
pub const SYNTHETIC_DEFAULT_CSV: &str = include_str!("../data/compute_delay_synthetic.csv");

impl Histogram {
    pub fn new(bins: Vec<HistogramBin>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::validation("compute.bins", "histogram has no bins"));
        }
        for (i, b) in bins.iter().enumerate() {
            if !(b.low_s.is_finite() && b.high_s.is_finite() && b.low_s >= 0.0) {
                return Err(Error::validation(
                    "compute.bins",
                    format!("bin {i}: edges must be finite and >= 0"),
                ));
            }
            if b.high_s < b.low_s {
                return Err(Error::validation(
                    "compute.bins",
                    format!("bin {i}: bin_high_s < bin_low_s"),
                ));
            }
            if !(b.prob.is_finite() && b.prob >= 0.0) {
                return Err(Error::validation(
                    "compute.bins",
                    format!("bin {i}: probability must be >= 0"),
                ));
            }
        }
        let total: f64 = bins.iter().map(|b| b.prob).sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::validation(
                "compute.bins",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        let mut acc = 0.0;
        let cumulative = bins
            .iter()
            .map(|b| {
                acc += b.prob;
                acc
            })
            .collect();
        Ok(Self { bins, cumulative })
    }

    /// Reads a `bin_low_s,bin_high_s,prob` CSV.
    pub fn from_csv_reader<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| parse_error(origin, e))?
            .iter()
            .map(str::to_owned)
            .collect::<Vec<_>>();
        if headers != ["bin_low_s", "bin_high_s", "prob"] {
            return Err(Error::Parse {
                path: origin.to_owned(),
                message: format!(
                    "expected header bin_low_s,bin_high_s,prob, found {}",
                    headers.join(",")
                ),
            });
        }
        let mut bins = Vec::new();
        for record in rdr.deserialize::<HistogramBin>() {
            bins.push(record.map_err(|e| parse_error(origin, e))?);
        }
        Self::new(bins)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub fn synthetic_default() -> Self {
        Self::from_csv_reader(SYNTHETIC_DEFAULT_CSV.as_bytes(), "builtin synthetic histogram")
            .expect("bundled histogram is valid")
    }

    pub fn bins(&self) -> &[HistogramBin] {
        &self.bins
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.bins.len() - 1);
        let b = self.bins[idx];
        let v: f64 = rng.random();
        if b.high_s == b.low_s {
            b.low_s
        } else {
            b.low_s + v * (b.high_s - b.low_s)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.bins
            .iter()
            .map(|b| {
                if x >= b.high_s {
                    b.prob
                } else if x < b.low_s {
                    0.0
                } else {
                    b.prob * (x - b.low_s) / (b.high_s - b.low_s)
                }
            })
            .sum::<f64>()
            .min(1.0)
    }

    pub fn mean(&self) -> f64 {
        self.bins.iter().map(|b| b.prob * 0.5 * (b.low_s + b.high_s)).sum()
    }

    pub fn min_support(&self) -> f64 {
        self.bins
            .iter()
            .filter(|b| b.prob > 0.0)
            .map(|b| b.low_s)
            .fold(f64::INFINITY, f64::min)
    }
}

fn parse_error(origin: &str, e: csv::Error) -> Error {
    Error::Parse {
        path: origin.to_owned(),
        message: e.to_string(),
    }
}

/// Base distribution of the computation delay.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayDistribution {
    Histogram(Histogram),
    Uniform { low_s: f64, high_s: f64 },
    ShiftedExponential { shift_s: f64, mean_s: f64 },
    ShiftedGamma { shift_s: f64, shape: f64, scale_s: f64 },
}

impl DelayDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| Err(Error::validation(key, reason));
        match *self {
            DelayDistribution::Histogram(_) => Ok(()),
            DelayDistribution::Uniform { low_s, high_s } => {
                if !(low_s.is_finite() && low_s >= 0.0 && high_s.is_finite() && high_s >= low_s) {
                    return bad("compute.distribution", "uniform requires 0 <= low_s <= high_s");
                }
                Ok(())
            }
            DelayDistribution::ShiftedExponential { shift_s, mean_s } => {
                if !(shift_s.is_finite() && shift_s >= 0.0) {
                    return bad("compute.distribution.shift_s", "must be >= 0");
                }
                if !(mean_s.is_finite() && mean_s > 0.0) {
                    return bad("compute.distribution.mean_s", "must be > 0");
                }
                Ok(())
            }
            DelayDistribution::ShiftedGamma { shift_s, shape, scale_s } => {
                if !(shift_s.is_finite() && shift_s >= 0.0) {
                    return bad("compute.distribution.shift_s", "must be >= 0");
                }
                if !(shape.is_finite() && shape > 0.0) {
                    return bad("compute.distribution.shape", "must be > 0");
                }
                if !(scale_s.is_finite() && scale_s > 0.0) {
                    return bad("compute.distribution.scale_s", "must be > 0");
                }
                Ok(())
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DelayDistribution::Histogram(h) => h.sample(rng),
            DelayDistribution::Uniform { low_s, high_s } => {
                let u: f64 = rng.random();
                low_s + u * (high_s - low_s)
            }
            DelayDistribution::ShiftedExponential { shift_s, mean_s } => {
                let e = Exp::new(1.0 / mean_s).expect("validated rate");
                shift_s + e.sample(rng)
            }
            DelayDistribution::ShiftedGamma { shift_s, shape, scale_s } => {
                let g = Gamma::new(*shape, *scale_s).expect("validated parameters");
                shift_s + g.sample(rng)
            }
        }
    }

    pub fn min_support(&self) -> f64 {
        match self {
            DelayDistribution::Histogram(h) => h.min_support(),
            DelayDistribution::Uniform { low_s, .. } => *low_s,
            DelayDistribution::ShiftedExponential { shift_s, .. } => *shift_s,
            DelayDistribution::ShiftedGamma { shift_s, .. } => *shift_s,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            DelayDistribution::Histogram(h) => h.mean(),
            DelayDistribution::Uniform { low_s, high_s } => 0.5 * (low_s + high_s),
            DelayDistribution::ShiftedExponential { shift_s, mean_s } => shift_s + mean_s,
            DelayDistribution::ShiftedGamma { shift_s, shape, scale_s } => shift_s + shape * scale_s,
        }
    }
}

/// Computation delay distribution with its current systematic offset.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeDelayModel {
    distribution: DelayDistribution,
    offset_s: f64,
}

impl ComputeDelayModel {
    pub fn new(distribution: DelayDistribution) -> Result<Self> {
        distribution.validate()?;
        Ok(Self {
            distribution,
            offset_s: 0.0,
        })
    }

    pub fn synthetic_default() -> Self {
        Self {
            distribution: DelayDistribution::Histogram(Histogram::synthetic_default()),
            offset_s: 0.0,
        }
    }

    pub fn distribution(&self) -> &DelayDistribution {
        &self.distribution
    }

    pub fn offset(&self) -> f64 {
        self.offset_s
    }

    /// Returns the model with its offset replaced by `offset_s`.
    pub fn with_offset(&self, offset_s: f64) -> Result<Self> {
        if !(offset_s.is_finite() && offset_s >= 0.0) {
            return Err(Error::Domain(format!(
                "compute offset must be finite and >= 0, got {offset_s}"
            )));
        }
        Ok(Self {
            distribution: self.distribution.clone(),
            offset_s,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.distribution.sample(rng) + self.offset_s
    }

    pub fn min_support(&self) -> f64 {
        self.distribution.min_support() + self.offset_s
    }

    pub fn mean(&self) -> f64 {
        self.distribution.mean() + self.offset_s
    }
}

pub fn sample_comp_delay<R: Rng + ?Sized>(model: &ComputeDelayModel, rng: &mut R) -> f64 {
    model.sample(rng)
}

pub fn set_offset(model: &ComputeDelayModel, offset_s: f64) -> Result<ComputeDelayModel> {
    model.with_offset(offset_s)
}
