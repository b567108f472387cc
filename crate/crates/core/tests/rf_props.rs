//! Link-level properties checked against independent reference computations.

use gocoexist::rf::{
    fbl_rate, noise_power, q_inv, shannon_rate, sinr_do, sinr_go, ChannelRealization, ChannelSampler, FadingParams,
    Geometry,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Upper-tail Gaussian probability by composite Simpson integration of the
/// density over `[x, x + 12]`.
fn q_by_quadrature(x: f64) -> f64 {
    let n = 20_000;
    let h = 12.0 / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = pdf(x) + pdf(x + 12.0);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * pdf(x + k as f64 * h);
    }
    acc * h / 3.0
}

/// Q⁻¹ by bisection on the quadrature oracle.
fn q_inv_by_bisection(p: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 7.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if q_by_quadrature(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn q_inv_matches_quadrature_oracle() {
    let mut worst: f64 = 0.0;
    for k in 0..=40 {
        // log-spaced over [1e-7, 0.5]
        let p = 10f64.powf(-7.0 + k as f64 * (7.0 + 0.5f64.log10()) / 40.0);
        worst = worst.max((q_inv(p).unwrap() - q_inv_by_bisection(p)).abs());
    }
    assert!(worst < 1e-6, "max |error| {worst}");
}

#[test]
fn fbl_at_half_is_shannon() {
    for &s in &[1e-3, 0.5, 1.0, 17.0, 1e4] {
        let f = fbl_rate(s, 1e9, 512, 0.5).unwrap();
        let c = shannon_rate(s, 1e9);
        assert!((f - c).abs() <= 1e-12 * c, "sinr {s}: {f} vs {c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fbl_non_decreasing_in_gamma(
        sinr in 1e-3f64..1e4,
        g1 in 1e-7f64..0.5,
        g2 in 1e-7f64..0.5,
        n in 64u32..4096,
    ) {
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(fbl_rate(sinr, 1e9, n, lo).unwrap() <= fbl_rate(sinr, 1e9, n, hi).unwrap());
    }
}

proptest! {
    #[test]
    fn fbl_non_decreasing_in_sinr(s1 in 1e-3f64..1e4, s2 in 1e-3f64..1e4, gamma in 1e-7f64..0.5) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(fbl_rate(lo, 1e9, 512, gamma).unwrap() <= fbl_rate(hi, 1e9, 512, gamma).unwrap());
    }

    #[test]
    fn sinr_monotone_in_powers(
        gg in 1e-12f64..1e-6, gd in 1e-12f64..1e-6, dd in 1e-12f64..1e-6, dg in 1e-12f64..1e-6,
        p1 in 0.0f64..0.2, p2 in 0.0f64..0.2,
    ) {
        let ch = ChannelRealization { gg, gd, dd, dg };
        let n = noise_power(-174.0, 1e9, 3.0);
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(sinr_go(&ch, 0.1, hi, n) <= sinr_go(&ch, 0.1, lo, n));
        prop_assert!(sinr_do(&ch, 0.1, lo, n) <= sinr_do(&ch, 0.1, hi, n));
        prop_assert!(sinr_do(&ch, hi, 0.2, n) <= sinr_do(&ch, lo, 0.2, n));
    }
}

/// Reference Rician draw: builds the array response from scratch and applies
/// MRC with the own-link channel.
struct ReferenceLink {
    mean: Vec<Complex64>,
    scatter: f64,
}

impl ReferenceLink {
    fn new(g: &Geometry, f: &FadingParams, ap: [f64; 2], ue: [f64; 2], m: usize) -> Self {
        let lambda = 299_792_458.0 / g.carrier_hz;
        let d = ((ap[0] - ue[0]).powi(2) + (ap[1] - ue[1]).powi(2)).sqrt();
        let loss_db = f.reference_loss_db + 10.0 * f.path_loss_exponent * (d / f.reference_distance_m).log10();
        let amp = 10f64.powf(-loss_db / 20.0);
        let k = f.rician_k;
        let mean = (0..m)
            .map(|i| {
                let x = ap[0] + (i as f64 - (m as f64 - 1.0) / 2.0) * g.spacing_wavelengths * lambda;
                let r = ((x - ue[0]).powi(2) + (ap[1] - ue[1]).powi(2)).sqrt();
                Complex64::from_polar(amp * (k / (k + 1.0)).sqrt(), -2.0 * std::f64::consts::PI * r / lambda)
            })
            .collect();
        Self {
            mean,
            scatter: amp * (1.0 / (k + 1.0)).sqrt(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        self.mean
            .iter()
            .map(|mu| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                mu + Complex64::new(re, im) * (self.scatter / 2f64.sqrt())
            })
            .collect()
    }
}

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn channel_gains_match_reference_sampler() {
    let g = Geometry::default();
    let f = FadingParams::default();
    let sampler = ChannelSampler::new(&g, &f).unwrap();
    let own = ReferenceLink::new(&g, &f, g.ap_go, g.ue_go, g.antennas_go);
    let cross = ReferenceLink::new(&g, &f, g.ap_go, g.ue_do, g.antennas_go);
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ours = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let ch = sampler.sample(&mut rng);
        ours.0.push(ch.gg);
        ours.1.push(ch.gd);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut reference = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let h = own.draw(&mut rng);
        let c = cross.draw(&mut rng);
        let norm: f64 = h.iter().map(|v| v.norm_sqr()).sum();
        let inner: Complex64 = h.iter().zip(&c).map(|(a, b)| a.conj() * b).sum();
        reference.0.push(norm);
        reference.1.push(inner.norm_sqr() / norm);
    }
    let d_own = ks_two_sample(ours.0, reference.0);
    let d_cross = ks_two_sample(ours.1, reference.1);
    assert!(d_own < 0.01, "own-link KS {d_own}");
    assert!(d_cross < 0.01, "cross-link KS {d_cross}");
}

#[test]
fn mrc_gain_of_identical_vectors() {
    // With a deterministic channel the cross gain collapses to |a^H b|²/‖a‖².
    let g = Geometry {
        ue_do: Geometry::default().ue_go,
        ..Geometry::default()
    };
    let f = FadingParams {
        rician_k: f64::INFINITY,
        ..FadingParams::default()
    };
    let ch = ChannelSampler::new(&g, &f).unwrap().sample(&mut ChaCha8Rng::seed_from_u64(0));
    assert!((ch.gd / ch.gg - 1.0).abs() < 1e-12);
}
