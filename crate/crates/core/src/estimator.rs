//! The traditional kernel estimator and the local L2-fitting family
//! `f̂_α(x) = g(x) · n⁻¹Σ K_h(X_i − x) g(X_i)^{1−α} / ∫ K_h(t − x) g(t)^{2−α} dt`.
//!
//! Everything that involves `g^{1−α}` or `g^{2−α}` is carried in log space:
//! for large `|α|` the start can be ~1e-80 in the tails and the powers
//! under- or overflow long before the ratio does.

use crate::error::{Error, Result};
use crate::kernel::{Kernel, LN_SQRT_2PI};
use crate::quad::{self, QuadOptions};
use crate::start::{GaussianStart, ParametricStart};

/// How the denominator integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenominatorRule {
    /// Closed form for a Gaussian kernel and start whenever it is valid,
    /// adaptive quadrature otherwise.
    #[default]
    Auto,
    /// Always integrate numerically.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig<S = GaussianStart> {
    pub alpha: f64,
    pub h: f64,
    pub kernel: Kernel,
    pub start: S,
    pub denominator: DenominatorRule,
}

impl<S: ParametricStart> EstimatorConfig<S> {
    pub fn new(alpha: f64, h: f64, start: S) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {h}"
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "index must be finite, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            h,
            kernel: Kernel::gaussian(),
            start,
            denominator: DenominatorRule::Auto,
        })
    }

    pub fn with_denominator(mut self, rule: DenominatorRule) -> Self {
        self.denominator = rule;
        self
    }

    /// `(μ̂, σ̂)` when the closed-form denominator applies:
    /// Gaussian kernel and start with `σ̂² − (α−2)h² > 0`.
    pub fn closed_form_params(&self) -> Option<(f64, f64)> {
        if !self.kernel.is_gaussian() {
            return None;
        }
        let (mu, sigma) = self.start.gaussian_params()?;
        let spread = sigma * sigma - (self.alpha - 2.0) * self.h * self.h;
        (spread > 0.0).then_some((mu, sigma))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate<S = GaussianStart> {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub config: EstimatorConfig<S>,
}

/// Traditional kernel density estimate `n⁻¹ Σ K_h(X_i − x)`.
pub fn kde(data: &[f64], h: f64, kernel: &Kernel, x: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    let sum: f64 = data
        .iter()
        .map(|xi| kernel.ln_density((xi - x) / h).exp())
        .sum();
    Ok(sum / (data.len() as f64 * h))
}

/// `ln I(β) = ln ∫ K_h(t − x) g(t)^{−β} dt` for a Gaussian kernel and start;
/// requires `σ² − βh² > 0`.
pub fn ln_gaussian_kernel_integral(beta: f64, x: f64, mu: f64, sigma: f64, h: f64) -> f64 {
    let spread = sigma * sigma - beta * h * h;
    beta * LN_SQRT_2PI + (beta + 1.0) * sigma.ln() - 0.5 * spread.ln()
        + beta * (x - mu).powi(2) / (2.0 * spread)
}

/// Log of the denominator `∫ K_h(t − x) g(t)^{2−α} dt`.
pub fn ln_denom_integral<S: ParametricStart>(x: f64, cfg: &EstimatorConfig<S>) -> Result<f64> {
    if cfg.denominator == DenominatorRule::Auto {
        if let Some((mu, sigma)) = cfg.closed_form_params() {
            return Ok(ln_gaussian_kernel_integral(
                cfg.alpha - 2.0,
                x,
                mu,
                sigma,
                cfg.h,
            ));
        }
    }
    ln_denom_quadrature(x, cfg)
}

pub fn denom_integral<S: ParametricStart>(x: f64, cfg: &EstimatorConfig<S>) -> Result<f64> {
    ln_denom_integral(x, cfg).map(f64::exp)
}

fn ln_denom_quadrature<S: ParametricStart>(x: f64, cfg: &EstimatorConfig<S>) -> Result<f64> {
    let h = cfg.h;
    let power = 2.0 - cfg.alpha;
    let ln_kh = |t: f64| cfg.kernel.ln_density((t - x) / h) - h.ln();
    let shift = ln_kh(x) + power * cfg.start.ln_pdf(x);
    let f = |t: f64| (ln_kh(t) + power * cfg.start.ln_pdf(t) - shift).exp();
    let divergent = || Error::DivergentDenominator {
        x,
        alpha: cfg.alpha,
        h,
    };

    let mut half = 8.0 * h;
    let mut previous: Option<f64> = None;
    for _ in 0..16 {
        let breaks = [x - half, x - h, x, x + h, x + half];
        let value = match quad::integrate(f, &breaks, QuadOptions::with_rel_tol(1e-13)) {
            Ok(v) if v > 0.0 && v.is_finite() => v,
            _ => return Err(divergent()),
        };
        let edge = (f(x - half) + f(x + half)) * half;
        if !edge.is_finite() {
            return Err(divergent());
        }
        if let Some(prev) = previous {
            if edge <= 1e-14 * value && (value - prev).abs() <= 1e-12 * value {
                return Ok(value.ln() + shift);
            }
        }
        previous = Some(value);
        half *= 2.0;
    }
    Err(divergent())
}

/// An estimator bound to a sample, with the per-observation log weights
/// `(1 − α) ln g(X_i)` precomputed.
#[derive(Debug, Clone)]
pub struct AlphaEstimator<'a, S = GaussianStart> {
    data: &'a [f64],
    cfg: &'a EstimatorConfig<S>,
    ln_weights: Vec<f64>,
}

impl<'a, S: ParametricStart> AlphaEstimator<'a, S> {
    pub fn new(data: &'a [f64], cfg: &'a EstimatorConfig<S>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        let ln_weights = data
            .iter()
            .map(|xi| (1.0 - cfg.alpha) * cfg.start.ln_pdf(*xi))
            .collect();
        Ok(Self {
            data,
            cfg,
            ln_weights,
        })
    }

    /// `ln( n⁻¹ Σ K_h(X_i − x) g(X_i)^{1−α} )`.
    pub fn ln_numerator(&self, x: f64) -> f64 {
        let h = self.cfg.h;
        let k = &self.cfg.kernel;
        let mut top = f64::NEG_INFINITY;
        for (xi, w) in self.data.iter().zip(&self.ln_weights) {
            top = top.max(k.ln_density((xi - x) / h) + w);
        }
        if top == f64::NEG_INFINITY {
            return top;
        }
        let sum: f64 = self
            .data
            .iter()
            .zip(&self.ln_weights)
            .map(|(xi, w)| (k.ln_density((xi - x) / h) + w - top).exp())
            .sum();
        top + sum.ln() - h.ln() - (self.data.len() as f64).ln()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let ln_num = self.ln_numerator(x);
        if ln_num == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let ln_den = ln_denom_integral(x, self.cfg)?;
        Ok((self.cfg.start.ln_pdf(x) + ln_num - ln_den).exp())
    }

    /// `f̂_α` at every point of `grid`.
    ///
    /// When the log weights span less than 600 nats they are rescaled once
    /// and each point costs a single pass over the data; otherwise every
    /// point falls back to the log-sum-exp path of [`Self::eval`].
    pub fn eval_many(&self, grid: &[f64]) -> Result<Vec<f64>> {
        let top = self.ln_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bottom = self.ln_weights.iter().copied().fold(f64::INFINITY, f64::min);
        if !(top - bottom < 600.0) {
            return grid.iter().map(|&x| self.eval(x)).collect();
        }
        let weights: Vec<f64> = self.ln_weights.iter().map(|w| (w - top).exp()).collect();
        let h = self.cfg.h;
        let k = &self.cfg.kernel;
        let ln_scale = top - h.ln() - (self.data.len() as f64).ln();
        grid.iter()
            .map(|&x| {
                let sum: f64 = self
                    .data
                    .iter()
                    .zip(&weights)
                    .map(|(xi, w)| k.ln_density((xi - x) / h).exp() * w)
                    .sum();
                if sum == 0.0 {
                    return Ok(0.0);
                }
                let ln_den = ln_denom_integral(x, self.cfg)?;
                Ok((self.cfg.start.ln_pdf(x) + sum.ln() + ln_scale - ln_den).exp())
            })
            .collect()
    }

    /// Adjustment factor `ξ̂(x)`, the minimizer of `Q_n(x, ·|α)`.
    pub fn adjustment(&self, x: f64) -> Result<f64> {
        let ln_num = self.ln_numerator(x);
        let ln_den = ln_denom_integral(x, self.cfg)?;
        Ok((ln_num - ln_den).exp())
    }
}

/// `f̂_α(x)`.
pub fn fhat_alpha<S: ParametricStart>(data: &[f64], x: f64, cfg: &EstimatorConfig<S>) -> Result<f64> {
    AlphaEstimator::new(data, cfg)?.eval(x)
}

/// The empirical local L2 criterion with the ξ-free term dropped:
/// `Q_n(x, ξ|α) = ξ² ∫K_h(t−x)g(t)^{2−α}dt − 2ξ n⁻¹Σ K_h(X_i−x)g(X_i)^{1−α}`.
pub fn criterion<S: ParametricStart>(
    data: &[f64],
    x: f64,
    xi: f64,
    cfg: &EstimatorConfig<S>,
) -> Result<f64> {
    let est = AlphaEstimator::new(data, cfg)?;
    let num = est.ln_numerator(x).exp();
    let den = denom_integral(x, cfg)?;
    Ok(xi * xi * den - 2.0 * xi * num)
}

/// Default evaluation grid: 401 points over
/// `[min − 4h − 4σ̂, max + 4h + 4σ̂]`.
pub fn default_grid(data: &[f64], h: f64, scale: f64) -> Vec<f64> {
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min) - 4.0 * h - 4.0 * scale;
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 4.0 * h + 4.0 * scale;
    linspace(lo, hi, 401)
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|i| lo + step * i as f64).collect()
        }
    }
}

pub fn fhat_curve<S: ParametricStart + Clone>(
    data: &[f64],
    cfg: &EstimatorConfig<S>,
    grid: &[f64],
) -> Result<DensityEstimate<S>> {
    let values = AlphaEstimator::new(data, cfg)?.eval_many(grid)?;
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        values,
        config: cfg.clone(),
    })
}

/// `∫ f̂_α(x) dx` by adaptive quadrature with a breakpoint at every
/// observation.
pub fn integral_of_estimate<S: ParametricStart>(data: &[f64], cfg: &EstimatorConfig<S>) -> Result<f64> {
    let est = AlphaEstimator::new(data, cfg)?;
    let h = cfg.h;
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut breaks: Vec<f64> = data.to_vec();
    breaks.extend([lo - 30.0 * h, lo - 10.0 * h, hi + 10.0 * h, hi + 30.0 * h]);
    let failure = std::cell::Cell::new(None);
    let value = quad::integrate(
        |x| match est.eval(x) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        },
        &breaks,
        QuadOptions {
            rel_tol: 1e-13,
            abs_tol: 1e-16,
            max_subdivisions: 20_000,
        },
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    value
}
