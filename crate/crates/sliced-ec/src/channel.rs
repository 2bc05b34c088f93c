//! Gaussian source plus additive Gaussian noise.
//!
//! Alice draws x ~ N(0, Sigma); Bob observes x' = x + eps with
//! eps ~ N(0, sigma). Everything downstream (quantization, slicing, leakage
//! accounting) is driven by the joint density of (X, X') that this module
//! owns, and by the conditional decomposition
//!
//!   f(x, x') = N(x'; 0, sqrt(Sigma^2 + sigma^2)) * N(x; mu(x'), s)
//!
//! with mu(x') = x' Sigma^2 / (Sigma^2 + sigma^2) and
//! s^2 = Sigma^2 sigma^2 / (Sigma^2 + sigma^2), which lets the inner x
//! integrals collapse to normal CDF differences.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Quadrature;
use crate::rng;
use crate::stats::{gaussian_entropy_bits, normal_pdf};

/// Number of combined standard deviations kept when truncating improper
/// integrals; the discarded tail mass is on the order of 1e-15.
pub const TAIL_SIGMAS: f64 = 8.0;

/// Default composite Gauss-Legendre resolution (order x panels) for the
/// integrals evaluated by the quantizer and slicing modules.
const QUAD_ORDER: usize = 24;
const QUAD_PANELS: usize = 32;

/// Source and noise standard deviations of the Gaussian channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannelParams")]
pub struct ChannelParams {
    sigma_source: f64,
    sigma_noise: f64,
}

#[derive(Deserialize)]
struct RawChannelParams {
    sigma_source: f64,
    sigma_noise: f64,
}

impl TryFrom<RawChannelParams> for ChannelParams {
    type Error = Error;
    fn try_from(raw: RawChannelParams) -> Result<Self> {
        ChannelParams::new(raw.sigma_source, raw.sigma_noise)
    }
}

impl ChannelParams {
    pub fn new(sigma_source: f64, sigma_noise: f64) -> Result<Self> {
        if !(sigma_source.is_finite() && sigma_source > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_source must be positive and finite, got {sigma_source}"
            )));
        }
        if !(sigma_noise.is_finite() && sigma_noise >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_noise must be non-negative and finite, got {sigma_noise}"
            )));
        }
        Ok(Self {
            sigma_source,
            sigma_noise,
        })
    }

    /// Channel with unit source variance and the noise level implied by the
    /// signal-to-noise ratio.
    pub fn from_snr(snr: f64) -> Result<Self> {
        Self::from_snr_with_source(snr, 1.0)
    }

    pub fn from_snr_with_source(snr: f64, sigma_source: f64) -> Result<Self> {
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "snr must be positive and finite, got {snr}"
            )));
        }
        Self::new(sigma_source, sigma_source / snr.sqrt())
    }

    pub fn sigma_source(&self) -> f64 {
        self.sigma_source
    }

    pub fn sigma_noise(&self) -> f64 {
        self.sigma_noise
    }

    /// Sigma^2 / sigma^2; infinite for a noiseless channel.
    pub fn snr(&self) -> f64 {
        let r = self.sigma_source / self.sigma_noise;
        r * r
    }

    /// Shannon capacity of the channel in bits, log2(1 + SNR) / 2.
    pub fn capacity_bits(&self) -> f64 {
        0.5 * (1.0 + self.snr()).log2()
    }

    /// Standard deviation of Bob's observation X'.
    pub fn observation_sd(&self) -> f64 {
        (self.sigma_source * self.sigma_source + self.sigma_noise * self.sigma_noise).sqrt()
    }

    /// Differential entropy of X' in bits.
    pub fn observation_entropy_bits(&self) -> f64 {
        gaussian_entropy_bits(self.observation_sd())
    }

    /// Mean of X conditioned on an observation x'.
    pub fn conditional_mean(&self, x_prime: f64) -> f64 {
        let vs = self.sigma_source * self.sigma_source;
        let vn = self.sigma_noise * self.sigma_noise;
        x_prime * vs / (vs + vn)
    }

    /// Standard deviation of X conditioned on X'.
    pub fn conditional_sd(&self) -> f64 {
        self.sigma_source * self.sigma_noise / self.observation_sd()
    }

    /// Quadrature covering the effective support of X'.
    pub fn observation_quadrature(&self) -> Quadrature {
        let l = TAIL_SIGMAS * self.observation_sd();
        Quadrature::composite_gauss_legendre(QUAD_ORDER, QUAD_PANELS, -l, l)
            .expect("static quadrature parameters are valid")
    }

    /// Quadrature covering the effective support of X.
    pub fn source_quadrature(&self) -> Quadrature {
        let l = TAIL_SIGMAS * self.sigma_source;
        Quadrature::composite_gauss_legendre(QUAD_ORDER, QUAD_PANELS, -l, l)
            .expect("static quadrature parameters are valid")
    }
}

/// One raw key element: Alice's value and Bob's noisy observation of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePair {
    pub x: f64,
    pub x_prime: f64,
}

/// Draws `count` correlated pairs. Identical seeds give identical output on
/// every platform.
pub fn sample_pairs(params: &ChannelParams, count: usize, seed: u64) -> Result<Vec<SamplePair>> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let mut rng = rng::seeded(seed);
    let mut out = Vec::with_capacity(count);
    let noiseless = params.sigma_noise == 0.0;
    for _ in 0..count {
        let z: f64 = StandardNormal.sample(&mut rng);
        let x = params.sigma_source * z;
        let x_prime = if noiseless {
            x
        } else {
            let e: f64 = StandardNormal.sample(&mut rng);
            x + params.sigma_noise * e
        };
        out.push(SamplePair { x, x_prime });
    }
    Ok(out)
}

/// Joint density f(x, x') of Alice's value and Bob's observation.
pub fn joint_density(params: &ChannelParams, x: f64, x_prime: f64) -> Result<f64> {
    if params.sigma_noise == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    Ok(normal_pdf(x, 0.0, params.sigma_source) * normal_pdf(x_prime, x, params.sigma_noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_1d, integrate_2d};
    use std::f64::consts::PI;

    fn snr3() -> ChannelParams {
        ChannelParams::from_snr(3.0).unwrap()
    }

    #[test]
    fn snr_is_ratio_of_variances() {
        let p = ChannelParams::new(1.0, 1.0 / 3f64.sqrt()).unwrap();
        assert!((p.snr() - 3.0).abs() < 1e-12);
        assert!((snr3().snr() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ChannelParams::new(0.0, 1.0).is_err());
        assert!(ChannelParams::new(-1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, -0.5).is_err());
        assert!(ChannelParams::from_snr(0.0).is_err());
        assert!(sample_pairs(&snr3(), 0, 1).is_err());
    }

    #[test]
    fn zero_noise_copies_x_exactly() {
        let p = ChannelParams::new(1.0, 0.0).unwrap();
        let pairs = sample_pairs(&p, 3, 7).unwrap();
        for pair in pairs {
            assert_eq!(pair.x, pair.x_prime);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = snr3();
        let a = sample_pairs(&p, 1000, 42).unwrap();
        let b = sample_pairs(&p, 1000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_pairs(&p, 1000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_correlation_matches_closed_form() {
        // corr(X, X') = Sigma / sqrt(Sigma^2 + sigma^2) = sqrt(3/4) at SNR 3.
        let p = snr3();
        let n = 1_000_000;
        let pairs = sample_pairs(&p, n, 1).unwrap();
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for pair in &pairs {
            sx += pair.x;
            sy += pair.x_prime;
            sxx += pair.x * pair.x;
            syy += pair.x_prime * pair.x_prime;
            sxy += pair.x * pair.x_prime;
        }
        let nf = n as f64;
        let cov = sxy / nf - sx / nf * sy / nf;
        let vx = sxx / nf - (sx / nf) * (sx / nf);
        let vy = syy / nf - (sy / nf) * (sy / nf);
        let corr = cov / (vx * vy).sqrt();
        assert!(
            (corr - (3.0f64 / 4.0).sqrt()).abs() < 0.003,
            "corr = {corr}"
        );
        // Empirical variance of x within 5 estimator standard errors of 1.
        let se = (2.0 / nf).sqrt();
        assert!((vx - 1.0).abs() < 5.0 * se, "var = {vx}");
    }

    #[test]
    fn joint_density_values() {
        let unit = ChannelParams::new(1.0, 1.0).unwrap();
        let v = joint_density(&unit, 0.0, 0.0).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-15);

        // Direct formula evaluated independently of the implementation.
        let p = snr3();
        let v = joint_density(&p, 0.5, 0.5).unwrap();
        let expect = 3f64.sqrt() / (2.0 * PI) * (-0.125f64).exp();
        assert!((v - expect).abs() < 1e-12, "got {v}, want {expect}");
    }

    #[test]
    fn joint_density_is_even() {
        let p = snr3();
        for &(x, xp) in &[(0.3, -1.2), (2.0, 0.1), (-0.7, -0.9)] {
            let a = joint_density(&p, x, xp).unwrap();
            let b = joint_density(&p, -x, -xp).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn joint_density_rejects_zero_noise() {
        let p = ChannelParams::new(1.0, 0.0).unwrap();
        assert!(matches!(
            joint_density(&p, 0.0, 0.0),
            Err(Error::DegenerateChannel)
        ));
    }

    #[test]
    fn joint_density_integrates_to_one() {
        let p = snr3();
        let qx = p.source_quadrature();
        let qy = p.observation_quadrature();
        let v = integrate_2d(|x, xp| joint_density(&p, x, xp).unwrap(), &qx, &qy).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn positive_x_negative_xprime_orthant_probability() {
        // For the bivariate normal with corr sqrt(3)/2 this orthant carries
        // 1/4 - asin(corr)/(2 pi) = 1/12.
        let p = snr3();
        let qx = Quadrature::composite_gauss_legendre(24, 32, 0.0, 8.0).unwrap();
        let qy =
            Quadrature::composite_gauss_legendre(24, 32, -8.0 * p.observation_sd(), 0.0).unwrap();
        let v = integrate_2d(|x, xp| joint_density(&p, x, xp).unwrap(), &qx, &qy).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn marginal_over_xprime_recovers_source_density() {
        let p = snr3();
        let qy = p.observation_quadrature();
        for k in 0..100 {
            let x = -3.0 + 6.0 * (k as f64) / 99.0;
            let marginal = integrate_1d(|xp| joint_density(&p, x, xp).unwrap(), &qy).unwrap();
            let expect = normal_pdf(x, 0.0, 1.0);
            assert!((marginal - expect).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn observation_entropy_matches_closed_form() {
        for &snr in &[1.0, 3.0, 15.0] {
            let p = ChannelParams::from_snr(snr).unwrap();
            let q = p.observation_quadrature();
            let sd = p.observation_sd();
            let h = integrate_1d(
                |xp| {
                    let f = normal_pdf(xp, 0.0, sd);
                    -f * f.log2()
                },
                &q,
            )
            .unwrap();
            assert!(
                (h - p.observation_entropy_bits()).abs() < 1e-6,
                "snr = {snr}"
            );
        }
    }
}
