//! Radio model: Rician SIMO channels with MRC combining, SINR, finite-blocklength
//! and Shannon rates, and transmission delay.
//!
//! Both access points carry a uniform linear array centred on the AP coordinate
//! with its axis along x. Channel vectors are
//!
//! ```text
//! h_ij = sqrt(1/β_ij) / sqrt(K+1) · (sqrt(K)·a_ij + n),   n ~ CN(0, I)
//! β_ij = 10^(L_ref/10) · (d_ij / d_ref)^α
//! ```
//!
//! where `a_ij` holds the per-element line-of-sight phases `exp(-j2π d_m/λ)`.
//! Each AP combines with `w_i = h_ii / ‖h_ii‖`, so only four scalar gains
//! survive: `g_ii = ‖h_ii‖²` and `g_ij = |h_ii^H h_ij|² / ‖h_ii‖²`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Positions (meters), array sizes and carrier of the two links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    pub ue_go: [f64; 2],
    pub ap_go: [f64; 2],
    pub ue_do: [f64; 2],
    pub ap_do: [f64; 2],
    pub antennas_go: usize,
    pub antennas_do: usize,
    /// Element spacing in wavelengths.
    pub spacing_wavelengths: f64,
    pub carrier_hz: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            ue_go: [5.0, 0.0],
            ap_go: [5.0, 20.0],
            ue_do: [8.0, 0.0],
            ap_do: [8.0, 20.0],
            antennas_go: 8,
            antennas_do: 8,
            spacing_wavelengths: 0.5,
            carrier_hz: 28e9,
        }
    }
}

impl Geometry {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn validate(&self) -> Result<()> {
        let points = [
            ("geometry.ue_go", self.ue_go),
            ("geometry.ap_go", self.ap_go),
            ("geometry.ue_do", self.ue_do),
            ("geometry.ap_do", self.ap_do),
        ];
        for (key, p) in points {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::validation(key, "coordinates must be finite"));
            }
        }
        if self.antennas_go < 1 {
            return Err(Error::validation("geometry.antennas_go", "must be >= 1"));
        }
        if self.antennas_do < 1 {
            return Err(Error::validation("geometry.antennas_do", "must be >= 1"));
        }
        if !(self.spacing_wavelengths.is_finite() && self.spacing_wavelengths >= 0.0) {
            return Err(Error::validation(
                "geometry.spacing_wavelengths",
                "must be finite and >= 0",
            ));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::validation("geometry.carrier_hz", "must be > 0"));
        }
        for (ap, ue) in [
            (self.ap_go, self.ue_go),
            (self.ap_go, self.ue_do),
            (self.ap_do, self.ue_do),
            (self.ap_do, self.ue_go),
        ] {
            if distance(ap, ue) <= 0.0 {
                return Err(Error::validation(
                    "geometry",
                    "every UE-AP distance must be > 0",
                ));
            }
        }
        Ok(())
    }

    /// Coordinates of the array elements of an AP at `center` with `m` elements.
    pub fn element_positions(&self, center: [f64; 2], m: usize) -> Vec<[f64; 2]> {
        let spacing = self.spacing_wavelengths * self.wavelength();
        let mid = (m as f64 - 1.0) / 2.0;
        (0..m)
            .map(|k| [center[0] + (k as f64 - mid) * spacing, center[1]])
            .collect()
    }
}

/// Large- and small-scale fading parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingParams {
    /// Rician factor K. `inf` gives a pure line-of-sight channel.
    pub rician_k: f64,
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    /// Path loss at the reference distance in dB.
    pub reference_loss_db: f64,
}

impl Default for FadingParams {
    fn default() -> Self {
        Self {
            rician_k: 3.0,
            path_loss_exponent: 4.0,
            reference_distance_m: 1.0,
            reference_loss_db: free_space_loss_db(28e9, 1.0),
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rician_k >= 0.0) {
            return Err(Error::validation("fading.rician_k", "must be >= 0"));
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent > 0.0) {
            return Err(Error::validation("fading.path_loss_exponent", "must be > 0"));
        }
        if !(self.reference_distance_m.is_finite() && self.reference_distance_m > 0.0) {
            return Err(Error::validation("fading.reference_distance_m", "must be > 0"));
        }
        if !self.reference_loss_db.is_finite() {
            return Err(Error::validation("fading.reference_loss_db", "must be finite"));
        }
        Ok(())
    }

    /// Linear path loss β at distance `d` meters.
    pub fn path_loss(&self, d: f64) -> f64 {
        10f64.powf(self.reference_loss_db / 10.0)
            * (d / self.reference_distance_m).powf(self.path_loss_exponent)
    }
}

/// Free-space path loss `20 log10(4π d / λ)` in dB.
pub fn free_space_loss_db(carrier_hz: f64, distance_m: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    20.0 * (4.0 * std::f64::consts::PI * distance_m / lambda).log10()
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Effective power gains after MRC combining.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    /// GO user to GO AP.
    pub gg: f64,
    /// DO user to GO AP (interference at the GO receiver).
    pub gd: f64,
    /// DO user to DO AP.
    pub dd: f64,
    /// GO user to DO AP (interference at the DO receiver).
    pub dg: f64,
}

#[derive(Debug, Clone)]
struct LinkModel {
    /// LOS term `sqrt(1/β)·sqrt(K/(K+1))·a`, one entry per element.
    los: Vec<Complex64>,
    /// Per-component standard deviation of the NLOS term.
    nlos_std: f64,
}

impl LinkModel {
    fn new(geometry: &Geometry, fading: &FadingParams, ap: [f64; 2], ue: [f64; 2], m: usize) -> Self {
        let lambda = geometry.wavelength();
        let amplitude = (1.0 / fading.path_loss(distance(ap, ue))).sqrt();
        let (los_w, nlos_w) = if fading.rician_k.is_infinite() {
            (1.0, 0.0)
        } else {
            let k = fading.rician_k;
            ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
        };
        let los = geometry
            .element_positions(ap, m)
            .into_iter()
            .map(|e| {
                let phase = -2.0 * std::f64::consts::PI * distance(e, ue) / lambda;
                Complex64::from_polar(amplitude * los_w, phase)
            })
            .collect();
        // CN(0,1) has variance 1/2 per real component.
        let nlos_std = amplitude * nlos_w * std::f64::consts::FRAC_1_SQRT_2;
        Self { los, nlos_std }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        for (o, l) in out.iter_mut().zip(&self.los) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *o = l + Complex64::new(re, im) * self.nlos_std;
        }
    }
}

/// Channel sampler with precomputed line-of-sight vectors and path losses.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    gg: LinkModel,
    gd: LinkModel,
    dd: LinkModel,
    dg: LinkModel,
}

impl ChannelSampler {
    pub fn new(geometry: &Geometry, fading: &FadingParams) -> Result<Self> {
        geometry.validate()?;
        fading.validate()?;
        let mg = geometry.antennas_go;
        let md = geometry.antennas_do;
        Ok(Self {
            gg: LinkModel::new(geometry, fading, geometry.ap_go, geometry.ue_go, mg),
            gd: LinkModel::new(geometry, fading, geometry.ap_go, geometry.ue_do, mg),
            dd: LinkModel::new(geometry, fading, geometry.ap_do, geometry.ue_do, md),
            dg: LinkModel::new(geometry, fading, geometry.ap_do, geometry.ue_go, md),
        })
    }

    /// Draws the four channel vectors and returns the combined gains.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let (gg, gd) = combine(&self.gg, &self.gd, rng);
        let (dd, dg) = combine(&self.dd, &self.dg, rng);
        ChannelRealization { gg, gd, dd, dg }
    }
}

fn combine<R: Rng + ?Sized>(own: &LinkModel, cross: &LinkModel, rng: &mut R) -> (f64, f64) {
    let m = own.los.len();
    let mut h_own = vec![Complex64::new(0.0, 0.0); m];
    let mut h_cross = vec![Complex64::new(0.0, 0.0); m];
    own.draw(rng, &mut h_own);
    cross.draw(rng, &mut h_cross);
    let norm_sq: f64 = h_own.iter().map(|h| h.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return (0.0, 0.0);
    }
    let inner: Complex64 = h_own.iter().zip(&h_cross).map(|(a, b)| a.conj() * b).sum();
    (norm_sq, inner.norm_sqr() / norm_sq)
}

/// One channel draw for the given geometry and fading.
pub fn sample_channel<R: Rng + ?Sized>(
    geometry: &Geometry,
    fading: &FadingParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    Ok(ChannelSampler::new(geometry, fading)?.sample(rng))
}

/// Thermal noise power in watts over `bandwidth_hz`.
pub fn noise_power(n0_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    10f64.powf((n0_dbm_hz + noise_figure_db - 30.0) / 10.0) * bandwidth_hz
}

/// SINR at the GO receiver.
pub fn sinr_go(ch: &ChannelRealization, p_g: f64, p_d: f64, noise_w: f64) -> f64 {
    ch.gg * p_g / (noise_w + ch.gd * p_d)
}

/// SINR at the DO receiver.
pub fn sinr_do(ch: &ChannelRealization, p_g: f64, p_d: f64, noise_w: f64) -> f64 {
    ch.dd * p_d / (noise_w + ch.dg * p_g)
}

/// Upper-tail standard normal probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of the Gaussian Q function.
///
/// Acklam's rational approximation of the normal quantile followed by one
/// Halley refinement against `erfc`, which brings the error to the level of
/// `erfc` itself.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("q_inv requires 0 < p < 1, got {p}")));
    }
    Ok(-normal_quantile(p))
}

fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley step on Φ(x) - p.
    let e = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Channel dispersion `V = 1 - 1/(1+sinr)²`.
pub fn channel_dispersion(sinr: f64) -> f64 {
    1.0 - 1.0 / ((1.0 + sinr) * (1.0 + sinr))
}

/// Finite-blocklength achievable rate in bits/s, clamped at 0.
pub fn fbl_rate(sinr: f64, bandwidth_hz: f64, blocklength: u32, gamma: f64) -> Result<f64> {
    Ok(fbl_rate_with_q(sinr, bandwidth_hz, blocklength, q_inv(gamma)?))
}

/// [`fbl_rate`] with `Q⁻¹(γ)` supplied by the caller.
pub fn fbl_rate_with_q(sinr: f64, bandwidth_hz: f64, blocklength: u32, q: f64) -> f64 {
    let v = channel_dispersion(sinr);
    let backoff = (v / blocklength as f64).sqrt() * q / std::f64::consts::LN_2;
    (bandwidth_hz * ((1.0 + sinr).log2() - backoff)).max(0.0)
}

/// Shannon rate in bits/s.
pub fn shannon_rate(sinr: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * (1.0 + sinr).log2()
}

/// Time to push `batch_bits` at `rate` bits/s; `f64::INFINITY` when the rate is 0.
pub fn tx_delay(batch_bits: f64, rate: f64) -> f64 {
    if batch_bits == 0.0 {
        0.0
    } else if rate <= 0.0 {
        f64::INFINITY
    } else {
        batch_bits / rate
    }
}

/// A finite ascending grid, either listed or evenly spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Linear { start: f64, stop: f64, points: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Linear { start, stop, points } => match *points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n)
                    .map(|k| {
                        if k == n - 1 {
                            *stop
                        } else {
                            start + (stop - start) * k as f64 / (n - 1) as f64
                        }
                    })
                    .collect(),
            },
        }
    }
}

/// Link budget, decision grids and traffic sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub go_power_w: f64,
    pub do_power_grid_w: Grid,
    pub per_grid: Vec<f64>,
    /// Channel uses per GO codeword.
    pub blocklength: u32,
    pub packet_bits: u64,
    pub pattern_bits: u64,
    pub batch_size: u64,
}

pub const DEFAULT_PER_GRID: [f64; 13] = [
    1e-7, 1e-6, 1e-5, 1e-4, 2e-4, 4e-4, 8e-4, 1e-3, 2e-3, 4e-3, 8e-3, 1e-2, 2e-2,
];

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 1e9,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 3.0,
            go_power_w: 0.1,
            do_power_grid_w: Grid::Linear {
                start: 0.0,
                stop: 0.2,
                points: 500,
            },
            per_grid: DEFAULT_PER_GRID.to_vec(),
            blocklength: 512,
            packet_bits: 256,
            pattern_bits: 64 * 64 * 3 * 32,
            batch_size: 20,
        }
    }
}

impl RadioConfig {
    pub fn batch_bits(&self) -> u64 {
        self.pattern_bits * self.batch_size
    }

    pub fn packets_per_batch(&self) -> u64 {
        self.batch_bits().div_ceil(self.packet_bits)
    }

    pub fn noise_w(&self) -> f64 {
        noise_power(self.noise_psd_dbm_hz, self.bandwidth_hz, self.noise_figure_db)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::validation("radio.bandwidth_hz", "must be > 0"));
        }
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(Error::validation("radio.noise_psd_dbm_hz", "must be finite"));
        }
        if !self.noise_figure_db.is_finite() {
            return Err(Error::validation("radio.noise_figure_db", "must be finite"));
        }
        if !(self.go_power_w.is_finite() && self.go_power_w >= 0.0) {
            return Err(Error::validation("radio.go_power_w", "must be >= 0"));
        }
        let powers = self.do_power_grid_w.values();
        if powers.is_empty() {
            return Err(Error::validation("radio.do_power_grid_w", "must not be empty"));
        }
        if powers[0] != 0.0 {
            return Err(Error::validation("radio.do_power_grid_w", "must start at 0"));
        }
        if !powers.iter().all(|p| p.is_finite()) || !strictly_ascending(&powers) {
            return Err(Error::validation(
                "radio.do_power_grid_w",
                "must be finite and strictly ascending",
            ));
        }
        if self.per_grid.is_empty() {
            return Err(Error::validation("radio.per_grid", "must not be empty"));
        }
        if !self.per_grid.iter().all(|&g| g > 0.0 && g < 0.5) {
            return Err(Error::validation("radio.per_grid", "values must lie in (0, 0.5)"));
        }
        if !strictly_ascending(&self.per_grid) {
            return Err(Error::validation("radio.per_grid", "must be strictly ascending"));
        }
        if self.blocklength < 1 {
            return Err(Error::validation("radio.blocklength", "must be >= 1"));
        }
        if self.packet_bits < 1 {
            return Err(Error::validation("radio.packet_bits", "must be >= 1"));
        }
        if self.pattern_bits < 1 {
            return Err(Error::validation("radio.pattern_bits", "must be >= 1"));
        }
        if self.batch_size < 1 {
            return Err(Error::validation("radio.batch_size", "must be >= 1"));
        }
        Ok(())
    }
}

pub(crate) fn strictly_ascending(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Validated radio parameters with the quantities the slot loop needs cached.
#[derive(Debug, Clone)]
pub struct Radio {
    pub config: RadioConfig,
    pub noise_w: f64,
    pub powers: Vec<f64>,
    pub pers: Vec<f64>,
    /// `Q⁻¹(γ)` per entry of `pers`.
    pub q: Vec<f64>,
    pub batch_bits: f64,
    pub packets: u64,
}

impl Radio {
    pub fn new(config: &RadioConfig) -> Result<Self> {
        config.validate()?;
        let pers = config.per_grid.clone();
        let q = pers.iter().map(|&g| q_inv(g)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            noise_w: config.noise_w(),
            powers: config.do_power_grid_w.values(),
            pers,
            q,
            batch_bits: config.batch_bits() as f64,
            packets: config.packets_per_batch(),
            config: config.clone(),
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.config.bandwidth_hz
    }

    pub fn max_power(&self) -> f64 {
        *self.powers.last().expect("validated non-empty")
    }

    /// GO transmission delay for PER index `per_index` under DO power `p_d`.
    pub fn go_tx_delay(&self, ch: &ChannelRealization, per_index: usize, p_d: f64) -> f64 {
        let s = sinr_go(ch, self.config.go_power_w, p_d, self.noise_w);
        let rate = fbl_rate_with_q(s, self.bandwidth(), self.config.blocklength, self.q[per_index]);
        tx_delay(self.batch_bits, rate)
    }

    /// DO Shannon rate under GO interference.
    pub fn do_rate(&self, ch: &ChannelRealization, p_d: f64) -> f64 {
        shannon_rate(sinr_do(ch, self.config.go_power_w, p_d, self.noise_w), self.bandwidth())
    }

    /// DO Shannon rate at maximum power with the GO user silent.
    pub fn reference_rate(&self, ch: &ChannelRealization) -> f64 {
        shannon_rate(sinr_do(ch, 0.0, self.max_power(), self.noise_w), self.bandwidth())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn noise_power_examples() {
        let one = noise_power(-174.0, 1.0, 0.0);
        assert!((one / 3.981e-21 - 1.0).abs() < 1e-3);
        assert!((noise_power(-174.0, 1e9, 3.0) / 7.943e-12 - 1.0).abs() < 1e-3);
        assert_eq!(noise_power(-174.0, 2.0, 0.0), 2.0 * one);
    }

    #[test]
    fn sinr_examples() {
        let ch = ChannelRealization { gg: 2.0, gd: 1.0, dd: 4.0, dg: 1.0 };
        assert_eq!(sinr_go(&ch, 1.0, 0.0, 1.0), 2.0);
        assert_eq!(sinr_go(&ch, 1.0, 1.0, 1.0), 1.0);
        assert_eq!(sinr_do(&ch, 0.0, 0.5, 2.0), 1.0);
        assert_eq!(sinr_do(&ch, 1.0, 0.0, 1.0), 0.0);
        let ch = ChannelRealization { gg: 1.0, gd: 1.0, dd: 1.0, dg: 1.0 };
        assert_eq!(sinr_do(&ch, 1.0, 1.0, 1.0), 0.5);
    }

    #[test]
    fn q_inv_reference_points() {
        assert_eq!(q_inv(0.5).unwrap(), 0.0);
        assert!((q_inv(0.158_655_253_931_457_05).unwrap() - 1.0).abs() < 1e-9);
        assert!((q_inv(1e-7).unwrap() - 5.1993).abs() < 1e-4);
        assert!(q_inv(0.0).is_err());
        assert!(q_inv(1.0).is_err());
        assert!(q_inv(f64::NAN).is_err());
    }

    #[test]
    fn q_inv_inverts_q_across_regions() {
        for &p in &[1e-9, 1e-7, 1e-3, 0.02, 0.0243, 0.1, 0.3, 0.7, 0.976, 0.99, 1.0 - 1e-9] {
            let x = q_inv(p).unwrap();
            let back = q_function(x);
            assert!((back / p - 1.0).abs() < 1e-9, "p={p} back={back}");
        }
    }

    #[test]
    fn rate_examples() {
        assert_eq!(shannon_rate(0.0, 5.0), 0.0);
        assert_eq!(shannon_rate(1.0, 1e6), 1e6);
        assert_eq!(shannon_rate(3.0, 1.0), 2.0);
        assert_eq!(fbl_rate(0.0, 1e9, 512, 1e-3).unwrap(), 0.0);
        assert_eq!(fbl_rate(7.0, 1e9, 512, 0.5).unwrap(), shannon_rate(7.0, 1e9));
        assert!(fbl_rate(1.0, 1.0, 512, 0.0).is_err());
    }

    #[test]
    fn dispersion_levels() {
        assert_eq!(channel_dispersion(0.0), 0.0);
        assert!(channel_dispersion(31.6) > 0.999);
        assert!(1.0 - channel_dispersion(10f64.powf(0.5)) < 0.1);
        assert!(channel_dispersion(1e6) < 1.0);
        assert!(channel_dispersion(1e12) <= 1.0);
    }

    #[test]
    fn tx_delay_examples() {
        let cfg = RadioConfig::default();
        assert_eq!(cfg.batch_bits(), 7_864_320);
        assert_eq!(cfg.packets_per_batch(), 30_720);
        assert_eq!(tx_delay(cfg.batch_bits() as f64, 1e9), 7.86432e-3);
        assert_eq!(tx_delay(0.0, 0.0), 0.0);
        assert_eq!(tx_delay(1.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn pure_los_unit_gain() {
        let geometry = Geometry {
            ue_go: [0.0, 0.0],
            ap_go: [0.0, 1.0],
            ue_do: [3.0, 0.0],
            ap_do: [3.0, 1.0],
            antennas_go: 1,
            antennas_do: 1,
            ..Geometry::default()
        };
        let fading = FadingParams {
            rician_k: f64::INFINITY,
            reference_loss_db: 0.0,
            ..FadingParams::default()
        };
        let mut rng = stream(1, Purpose::Channel, 0);
        let ch = sample_channel(&geometry, &fading, &mut rng).unwrap();
        assert!((ch.gg - 1.0).abs() < 1e-12);
        assert!((ch.dd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_mean_gain() {
        let geometry = Geometry::default();
        let fading = FadingParams { rician_k: 0.0, ..FadingParams::default() };
        let sampler = ChannelSampler::new(&geometry, &fading).unwrap();
        let beta = fading.path_loss(20.0);
        let mut rng = stream(2, Purpose::Channel, 0);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| sampler.sample(&mut rng).gg).sum::<f64>() / n as f64;
        assert!((mean * beta / 8.0 - 1.0).abs() < 0.01, "mean·β = {}", mean * beta);
    }

    #[test]
    fn linear_grid_hits_endpoints() {
        let g = Grid::Linear { start: 0.0, stop: 0.2, points: 500 }.values();
        assert_eq!(g.len(), 500);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[499], 0.2);
        assert!(strictly_ascending(&g));
    }

    #[test]
    fn validation_names_key() {
        let cfg = RadioConfig { bandwidth_hz: -1.0, ..RadioConfig::default() };
        match cfg.validate() {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "radio.bandwidth_hz"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
