//! Parametric starts: the pilot density `g(x, θ̂)` that the nonparametric
//! factor multiplies.

use crate::error::{Error, Result};
use crate::kernel::LN_SQRT_2PI;

/// Capability a parametric start must provide to the estimators and the
/// index selectors.
pub trait ParametricStart: Sync {
    fn ln_pdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn deriv1(&self, x: f64) -> f64;

    fn deriv2(&self, x: f64) -> f64;

    /// `g'(x)/g(x)`.
    fn q1(&self, x: f64) -> f64;

    /// `g''(x)/g(x)`.
    fn q2(&self, x: f64) -> f64;

    /// `(location, scale)` when the start is Gaussian, which unlocks the
    /// closed-form denominator.
    fn gaussian_params(&self) -> Option<(f64, f64)> {
        None
    }

    /// Typical spread, used to size integration ranges and grids.
    fn scale(&self) -> f64;
}

/// Gaussian start `φ_σ̂(x − μ̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStart {
    pub mu_hat: f64,
    pub sigma_hat: f64,
    /// Sample size of the fit; zero for starts built from known parameters.
    pub n: usize,
}

impl GaussianStart {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Gaussian start needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(Self {
            mu_hat: mu,
            sigma_hat: sigma,
            n: 0,
        })
    }

    /// Maximum likelihood fit: sample mean and the divisor-`n` variance.
    pub fn fit_mle(data: &[f64]) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::DegenerateSample(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateSample("non-finite observation".into()));
        }
        let mean = data.iter().sum::<f64>() / n as f64;
        let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        if !(var > 0.0) {
            return Err(Error::DegenerateSample("zero sample variance".into()));
        }
        Ok(Self {
            mu_hat: mean,
            sigma_hat: var.sqrt(),
            n,
        })
    }

    pub fn variance(&self) -> f64 {
        self.sigma_hat * self.sigma_hat
    }

    #[inline]
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mu_hat) / self.sigma_hat
    }
}

impl ParametricStart for GaussianStart {
    #[inline]
    fn ln_pdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        -0.5 * z * z - LN_SQRT_2PI - self.sigma_hat.ln()
    }

    fn deriv1(&self, x: f64) -> f64 {
        self.pdf(x) * self.q1(x)
    }

    fn deriv2(&self, x: f64) -> f64 {
        self.pdf(x) * self.q2(x)
    }

    #[inline]
    fn q1(&self, x: f64) -> f64 {
        -(x - self.mu_hat) / self.variance()
    }

    #[inline]
    fn q2(&self, x: f64) -> f64 {
        let v = self.variance();
        ((x - self.mu_hat).powi(2) - v) / (v * v)
    }

    fn gaussian_params(&self) -> Option<(f64, f64)> {
        Some((self.mu_hat, self.sigma_hat))
    }

    fn scale(&self) -> f64 {
        self.sigma_hat
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};
    use proptest::prelude::*;

    #[test]
    fn mle_examples() {
        let s = GaussianStart::fit_mle(&[-1.0, 1.0]).unwrap();
        assert_eq!(s.mu_hat, 0.0);
        assert!((s.variance() - 1.0).abs() < 1e-15);
        let s = GaussianStart::fit_mle(&[0.0, 0.0, 3.0]).unwrap();
        assert!((s.mu_hat - 1.0).abs() < 1e-15);
        assert!((s.variance() - 2.0).abs() < 1e-14);
        assert_eq!(s.n, 3);
    }

    #[test]
    fn degenerate_samples() {
        assert!(matches!(
            GaussianStart::fit_mle(&[1.0]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            GaussianStart::fit_mle(&[2.0, 2.0, 2.0]),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn pointwise_closed_forms() {
        let s = GaussianStart::new(0.4, 1.7).unwrap();
        let at_mode = 1.0 / (1.7 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((s.pdf(0.4) - at_mode).abs() < 1e-15);
        assert_eq!(s.deriv1(0.4), 0.0);
        assert_eq!(s.q1(0.4), 0.0);
        assert!((s.q2(0.4) + 1.0 / s.variance()).abs() < 1e-15);
        for &x in &[-2.0, 0.1, 1.3, 4.0] {
            let h = 1e-4;
            let fd = (s.deriv1(x + h) - s.deriv1(x - h)) / (2.0 * h);
            assert!((fd / s.deriv2(x) - 1.0).abs() < 1e-6);
            assert!((s.q2(x) - s.deriv2(x) / s.pdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn q2_identity_at_offset_point() {
        let s = GaussianStart::new(-0.3, 0.8).unwrap();
        let x = s.mu_hat + 0.7 * s.sigma_hat;
        let h = 1e-4;
        let dq1 = (s.q1(x + h) - s.q1(x - h)) / (2.0 * h);
        assert!((s.q2(x) - (dq1 + s.q1(x).powi(2))).abs() < 1e-6);
    }

    #[test]
    fn pdf_integrates_to_one() {
        let s = GaussianStart::new(2.0, 0.3).unwrap();
        let v = integrate(|x| s.pdf(x), &[-10.0, 2.0, 14.0], QuadOptions::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn translation_and_scale_equivariance(
            data in prop::collection::vec(-50.0f64..50.0, 3..40),
            shift in -100.0f64..100.0,
            c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        ) {
            let base = match GaussianStart::fit_mle(&data) {
                Ok(s) => s,
                Err(_) => return Ok(()),
            };
            prop_assume!(base.sigma_hat > 1e-6);
            let shifted: Vec<f64> = data.iter().map(|x| x + shift).collect();
            let s = GaussianStart::fit_mle(&shifted).unwrap();
            prop_assert!((s.mu_hat - base.mu_hat - shift).abs() < 1e-9 * (1.0 + shift.abs() + base.mu_hat.abs()));
            prop_assert!((s.sigma_hat / base.sigma_hat - 1.0).abs() < 1e-8);

            let scaled: Vec<f64> = data.iter().map(|x| c * x).collect();
            let s = GaussianStart::fit_mle(&scaled).unwrap();
            prop_assert!((s.mu_hat - c * base.mu_hat).abs() < 1e-9 * (1.0 + (c * base.mu_hat).abs()));
            prop_assert!((s.sigma_hat / (c.abs() * base.sigma_hat) - 1.0).abs() < 1e-10);
            let x = base.mu_hat + base.sigma_hat;
            prop_assert!((s.q1(c * x) - base.q1(x) / c).abs() < 1e-8 * (1.0 + base.q1(x).abs() / c.abs()));
        }
    }
}
