//! Gram–Charlier (Hermite) expansion of the sampling density about the
//! fitted Gaussian, used for the closed-form pilot coefficients `c̄` and as
//! the pilot for higher-order functionals.

use crate::error::{Error, Result};
use crate::kernel::{hermite_into, phi, SQRT_PI};
use crate::start::{GaussianStart, ParametricStart};
use crate::theory::BiasCoefficients;

/// Truncation order used by the selectors.
pub const DEFAULT_ORDER: usize = 5;

/// Sample Hermite moments `γ̂_k = n⁻¹ Σ He_k((X_i − μ̂)/σ̂)`, `k = 0..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteMoments {
    pub gamma_hat: Vec<f64>,
    pub m: usize,
    pub mu_hat: f64,
    pub sigma_hat: f64,
}

impl HermiteMoments {
    pub fn new(data: &[f64], m: usize) -> Result<Self> {
        let start = GaussianStart::fit_mle(data)?;
        Self::with_start(data, m, &start)
    }

    pub fn with_start(data: &[f64], m: usize, start: &GaussianStart) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParameter(format!(
                "Hermite truncation order must be at least 3, got {m}"
            )));
        }
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        let mut sums = vec![0.0; m + 1];
        let mut he = vec![0.0; m + 1];
        for &x in data {
            hermite_into(start.standardize(x), &mut he);
            for (s, v) in sums.iter_mut().zip(&he) {
                *s += v;
            }
        }
        let n = data.len() as f64;
        Ok(Self {
            gamma_hat: sums.into_iter().map(|s| s / n).collect(),
            m,
            mu_hat: start.mu_hat,
            sigma_hat: start.sigma_hat,
        })
    }

    /// Moments of an exactly Gaussian sample: `γ_0 = 1`, the rest zero.
    pub fn gaussian(m: usize, mu: f64, sigma: f64) -> Self {
        let mut gamma_hat = vec![0.0; m + 1];
        gamma_hat[0] = 1.0;
        Self {
            gamma_hat,
            m,
            mu_hat: mu,
            sigma_hat: sigma,
        }
    }

    pub fn gamma(&self, k: usize) -> f64 {
        self.gamma_hat.get(k).copied().unwrap_or(0.0)
    }
}

/// Closed-form bias coefficients of the order-5 Hermite expansion relative
/// to its own Gaussian. The `γ4²` coefficient of `c̄2` is kept at 32/57 even
/// though direct integration of the expansion gives 57/32.
pub fn c_bar(gamma3: f64, gamma4: f64, gamma5: f64, sigma: f64) -> Result<BiasCoefficients> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let scale = 1.0 / (sigma.powi(5) * SQRT_PI);
    let (g33, g44, g55, g35) = (
        gamma3 * gamma3,
        gamma4 * gamma4 / 9.0,
        gamma5 * gamma5 / 144.0,
        gamma3 * gamma5,
    );
    let c1 = g33 * (7.0 / 16.0) + g44 * (33.0 / 32.0) + g55 * (225.0 / 64.0)
        - g35 / 6.0 * (21.0 / 32.0);
    let c2 = g33 * (3.0 / 4.0) + g44 * (32.0 / 57.0) + g55 * (195.0 / 32.0)
        - g35 / 6.0 * (39.0 / 32.0);
    let c3 = g33 * (3.0 / 2.0) + g44 * (123.0 / 32.0) + g55 * (225.0 / 16.0) - g35 / 2.0;
    Ok(BiasCoefficients {
        c1: scale * c1,
        c2: scale * c2,
        c3: scale * c3,
    })
}

/// Hermite-expansion pilot for `f` and its derivatives, evaluated at the
/// sample points.
#[derive(Debug, Clone)]
pub struct HermitePilot<'a> {
    data: &'a [f64],
    pub moments: HermiteMoments,
    pub start: GaussianStart,
}

impl<'a> HermitePilot<'a> {
    pub fn new(data: &'a [f64], start: &GaussianStart, m: usize) -> Result<Self> {
        Ok(Self {
            data,
            moments: HermiteMoments::with_start(data, m, start)?,
            start: *start,
        })
    }

    /// The same pilot with every `γ̂_k`, `k ≥ 1`, set to zero.
    pub fn normal_reference(data: &'a [f64], start: &GaussianStart, m: usize) -> Self {
        Self {
            data,
            moments: HermiteMoments::gaussian(m, start.mu_hat, start.sigma_hat),
            start: *start,
        }
    }

    pub fn with_moments(data: &'a [f64], start: &GaussianStart, moments: HermiteMoments) -> Self {
        Self {
            data,
            moments,
            start: *start,
        }
    }

    /// `f̃^{(p)}(x) = (−1)^p σ̂^{−(p+1)} φ(z) Σ_{k=0}^{m} γ̂_k/k! He_{k+p}(z)`.
    pub fn derivative(&self, p: usize, x: f64) -> f64 {
        let m = self.moments.m;
        let z = self.start.standardize(x);
        let mut he = [0.0; 40];
        let he = &mut he[..=m + p];
        hermite_into(z, he);
        let mut acc = 0.0;
        let mut fact = 1.0;
        for k in 0..=m {
            if k > 0 {
                fact *= k as f64;
            }
            acc += self.moments.gamma(k) / fact * he[k + p];
        }
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        sign * phi(z) * acc / self.start.sigma_hat.powi(p as i32 + 1)
    }

    /// `n⁻¹ Σ f̃^{(p)}(X_i) w(X_i)`.
    pub fn expectation(&self, p: usize, w: impl Fn(f64) -> f64) -> f64 {
        let total: f64 = self.data.iter().map(|&x| self.derivative(p, x) * w(x)).sum();
        total / self.data.len() as f64
    }

    /// Pilot functional `ψ̃(p|r,s)`.
    pub fn psi(&self, p: usize, r: i32, s: i32) -> f64 {
        let st = self.start;
        self.expectation(p, |x| st.q1(x).powi(r) * st.q2(x).powi(s))
    }

    /// `Ñ[p] = ψ̃(p|2,1) − ψ̃(p+3|1,0) − ψ̃(p+2|0,1) − ψ̃(p+1|1,1)`.
    pub fn numerator(&self, p: usize) -> f64 {
        self.psi(p, 2, 1) - self.psi(p + 3, 1, 0) - self.psi(p + 2, 0, 1) - self.psi(p + 1, 1, 1)
    }

    /// `D̃[p] = ψ̃(p|4,0) − ψ̃(p+2|2,0) − 2ψ̃(p+1|1,1)`.
    pub fn denominator(&self, p: usize) -> f64 {
        self.psi(p, 4, 0) - self.psi(p + 2, 2, 0) - 2.0 * self.psi(p + 1, 1, 1)
    }
}

/// `ψ̃(p|r,s)` with the Hermite pilot of order `m` built from the MLE fit.
pub fn psi_tilde(data: &[f64], p: usize, r: i32, s: i32, m: usize) -> Result<f64> {
    let start = GaussianStart::fit_mle(data)?;
    Ok(HermitePilot::new(data, &start, m)?.psi(p, r, s))
}
