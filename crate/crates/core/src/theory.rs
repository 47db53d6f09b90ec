//! Asymptotic theory: the leading bias of `f̂_α`, its roughness
//! `R(f̂_α) = c1α² − 2c2α + c3`, the AMISE-optimal index `α_o = c2/c1`,
//! and AMISE-optimal bandwidths.

use crate::error::{Error, Result};
use crate::kernel::{hermite, Kernel};
use crate::quad::{self, QuadOptions};
use crate::start::{GaussianStart, ParametricStart};
use crate::zoo::{NormalMixture, SkewNormal, TrueDensity};

/// `c1` below this is treated as zero: the density lies in the model and the
/// O(h²) bias vanishes for every index.
pub const DEGENERATE_C1: f64 = 1e-14;

/// Half-width of the integration range in standard deviations.
const SPREAD: f64 = 12.0;

fn opts() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-18,
        max_subdivisions: 8000,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl BiasCoefficients {
    /// `R(f̂_α) = c1α² − 2c2α + c3`.
    pub fn roughness(&self, alpha: f64) -> f64 {
        self.c1 * alpha * alpha - 2.0 * self.c2 * alpha + self.c3
    }

    pub fn alpha_opt(&self) -> Result<f64> {
        if self.c1 <= DEGENERATE_C1 {
            return Err(Error::OptimalIndexUndefined { c1: self.c1 });
        }
        Ok(self.c2 / self.c1)
    }

    /// `min_α R(f̂_α) = c3 − c2²/c1`.
    pub fn r_min(&self) -> Result<f64> {
        if self.c1 <= DEGENERATE_C1 {
            return Err(Error::OptimalIndexUndefined { c1: self.c1 });
        }
        Ok((self.c3 - self.c2 * self.c2 / self.c1).max(0.0))
    }
}

/// `b1(x) = f''(x) − f(x) g0''(x)/g0(x)`.
pub fn b1(x: f64, truth: &TrueDensity, g0: &GaussianStart) -> f64 {
    truth.d2(x) - truth.pdf(x) * g0.q2(x)
}

/// `b2(x) = 2{g0'(x)f'(x)/g0(x) − f(x)(g0'(x)/g0(x))²}`.
pub fn b2(x: f64, truth: &TrueDensity, g0: &GaussianStart) -> f64 {
    let q1 = g0.q1(x);
    2.0 * (q1 * truth.d1(x) - truth.pdf(x) * q1 * q1)
}

/// `(b1, b2)` for a normal mixture written with Hermite polynomials of the
/// standardized arguments.
pub fn mixture_b(x: f64, mixture: &NormalMixture, g0: &GaussianStart) -> (f64, f64) {
    let (mu0, s0) = (g0.mu_hat, g0.sigma_hat);
    let u = (x - mu0) / s0;
    let (h1u, h2u) = (hermite(1, u), hermite(2, u));
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for (p, m, s) in mixture.components() {
        let z = (x - m) / s;
        let fi = crate::kernel::phi(z) / s;
        b1 += p * fi * (hermite(2, z) / (s * s) - h2u / (s0 * s0));
        b2 += p * fi * (h1u * hermite(1, z) / (s0 * s) - h1u * h1u / (s0 * s0));
    }
    (b1, 2.0 * b2)
}

/// `(b1, b2)` for a skew-normal truth with its least-false Gaussian.
pub fn skew_normal_b(x: f64, sn: &SkewNormal, g0: &GaussianStart) -> (f64, f64) {
    let (mu0, s0) = (g0.mu_hat, g0.sigma_hat);
    let u = (x - mu0) / s0;
    let phi = crate::kernel::phi(x);
    let cdf = crate::zoo::normal_cdf(sn.lambda * x);
    let b1 = 2.0 * phi * (sn.s2(x) - hermite(2, u) * cdf / (s0 * s0));
    let b2 = -4.0 * phi * (sn.s1(x) * u / s0 + u * u * cdf / (s0 * s0));
    (b1, b2)
}

/// The O(h²) bias bracket `(g0^{1−α}f)''/g0^{1−α} − f(g0^{2−α})''/g0^{2−α}`
/// expanded by the product rule, without going through `b1`/`b2`.
pub fn bias_bracket(x: f64, alpha: f64, truth: &TrueDensity, g0: &GaussianStart) -> f64 {
    let (f, f1, f2) = (truth.pdf(x), truth.d1(x), truth.d2(x));
    let (q1, q2) = (g0.q1(x), g0.q2(x));
    // (g^a)'/g^a = a q1,  (g^a)''/g^a = a(a−1) q1² + a q2
    let a = 1.0 - alpha;
    let b = 2.0 - alpha;
    let first = f2 + 2.0 * a * q1 * f1 + f * (a * (a - 1.0) * q1 * q1 + a * q2);
    let second = f * (b * (b - 1.0) * q1 * q1 + b * q2);
    first - second
}

/// `∫ [bias bracket]² dx` at a single index, by direct quadrature.
pub fn roughness_direct(truth: &TrueDensity, g0: &GaussianStart, alpha: f64) -> Result<f64> {
    quad::integrate(
        |x| bias_bracket(x, alpha, truth, g0).powi(2),
        &truth.breakpoints(SPREAD),
        opts(),
    )
}

pub fn bias_coefficients(truth: &TrueDensity, g0: &GaussianStart) -> Result<BiasCoefficients> {
    let v = quad::integrate_vec(
        |x| {
            let (a, b) = (b1(x, truth, g0), b2(x, truth, g0));
            [b * b, b * (a + b), (a + b) * (a + b)]
        },
        &truth.breakpoints(SPREAD),
        opts(),
    )?;
    Ok(BiasCoefficients {
        c1: v[0],
        c2: v[1],
        c3: v[2],
    })
}

/// `R(f̃) = ∫ {f''(x)}² dx`.
pub fn r_tilde(truth: &TrueDensity) -> Result<f64> {
    quad::integrate(|x| truth.d2(x).powi(2), &truth.breakpoints(SPREAD), opts())
}

pub fn alpha_opt(c: &BiasCoefficients) -> Result<f64> {
    c.alpha_opt()
}

pub fn r_min(c: &BiasCoefficients) -> Result<f64> {
    c.r_min()
}

/// Least-false Gaussian parameters and the `s1`, `s2` helpers of `SN(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormalTheory {
    pub mu0: f64,
    pub sigma0_sq: f64,
    pub density: SkewNormal,
}

impl SkewNormalTheory {
    pub fn s1(&self, x: f64) -> f64 {
        self.density.s1(x)
    }

    pub fn s2(&self, x: f64) -> f64 {
        self.density.s2(x)
    }
}

pub fn skew_normal_theory(lambda: f64) -> SkewNormalTheory {
    let density = SkewNormal::new(lambda);
    SkewNormalTheory {
        mu0: density.mean(),
        sigma0_sq: density.variance(),
        density,
    }
}

/// `AMISE = h⁴/4 μ²_{2,K} R + R(K)/(nh)`.
pub fn amise(r_value: f64, h: f64, n: usize, kernel: &Kernel) -> f64 {
    let mu2 = kernel.mu2();
    0.25 * h.powi(4) * mu2 * mu2 * r_value + kernel.r_k() / (n as f64 * h)
}

/// AMISE-optimal bandwidth `{R(K)/μ²_{2,K}}^{1/5} R^{−1/5} n^{−1/5}`.
pub fn h_opt(r_value: f64, n: usize, kernel: &Kernel) -> Result<f64> {
    if !(r_value > 0.0) || n == 0 {
        return Err(Error::BandwidthUndefined(r_value));
    }
    let mu2 = kernel.mu2();
    Ok((kernel.r_k() / (mu2 * mu2)).powf(0.2) * r_value.powf(-0.2) * (n as f64).powf(-0.2))
}

/// Minimum AMISE `(5/4){μ_{2,K} R(K)²}^{2/5} R^{1/5} n^{−4/5}`.
pub fn amise_min(r_value: f64, n: usize, kernel: &Kernel) -> f64 {
    1.25 * (kernel.mu2() * kernel.r_k().powi(2)).powf(0.4)
        * r_value.powf(0.2)
        * (n as f64).powf(-0.8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub density_id: String,
    /// `(α, R(f̂_α)/R(f̃))` for each requested index.
    pub ratios: Vec<(f64, f64)>,
    /// `α_o` and its ratio; `None` when the density is in the model.
    pub optimum: Option<(f64, f64)>,
    pub coefficients: BiasCoefficients,
    pub r_tilde: f64,
}

pub fn ratio_row(truth: &TrueDensity, alphas: &[f64]) -> Result<RatioRow> {
    let g0 = truth.least_false_start();
    let c = bias_coefficients(truth, &g0)?;
    let rt = r_tilde(truth)?;
    let ratios = alphas.iter().map(|a| (*a, c.roughness(*a) / rt)).collect();
    let optimum = match c.alpha_opt() {
        Ok(a) => Some((a, c.r_min()? / rt)),
        Err(Error::OptimalIndexUndefined { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RatioRow {
        density_id: truth.id(),
        ratios,
        optimum,
        coefficients: c,
        r_tilde: rt,
    })
}

pub fn ratio_table(densities: &[TrueDensity], alphas: &[f64]) -> Result<Vec<RatioRow>> {
    use rayon::prelude::*;
    densities.par_iter().map(|d| ratio_row(d, alphas)).collect()
}
