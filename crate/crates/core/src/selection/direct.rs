//! Direct index selector: closed-form pilot coefficients from the Hermite
//! expansion fix a bandwidth, and kernel estimates of the bias functions at
//! that bandwidth give the index. Also hosts the bias-adjusted final
//! bandwidth.

use super::hermite::{c_bar, HermiteMoments, DEFAULT_ORDER};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, SQRT_PI};
use crate::quad::{self, QuadOptions};
use crate::start::{GaussianStart, ParametricStart};
use crate::theory::{BiasCoefficients, DEGENERATE_C1};

/// Kernel terms beyond this many bandwidths are below 1e-31 of the peak.
const KERNEL_REACH: f64 = 12.0;

/// Kernel estimates `(f̃, f̃', f̃'')` at `x` from sorted data.
fn kernel_derivatives(sorted: &[f64], h: f64, x: f64) -> [f64; 3] {
    let lo = sorted.partition_point(|&v| v < x - KERNEL_REACH * h);
    let hi = sorted.partition_point(|&v| v <= x + KERNEL_REACH * h);
    let k = Kernel::gaussian();
    let mut acc = [0.0; 3];
    let mut d = [0.0; 3];
    for &xi in &sorted[lo..hi] {
        k.derivatives_into((x - xi) / h, &mut d);
        acc[0] += d[0];
        acc[1] += d[1];
        acc[2] += d[2];
    }
    let n = sorted.len() as f64;
    [acc[0] / (n * h), acc[1] / (n * h * h), acc[2] / (n * h * h * h)]
}

fn sorted_copy(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn bias_hats(sorted: &[f64], h: f64, start: &GaussianStart, x: f64) -> (f64, f64) {
    let [f, f1, f2] = kernel_derivatives(sorted, h, x);
    let (q1, q2) = (start.q1(x), start.q2(x));
    (f2 - f * q2, 2.0 * (f1 * q1 - f * q1 * q1))
}

/// `b̂1(x; h) = n⁻¹Σ[h⁻³K''((x−X_i)/h) − h⁻¹K((x−X_i)/h) g''(x)/g(x)]`.
pub fn b1_hat(x: f64, data: &[f64], h: f64, start: &GaussianStart) -> f64 {
    bias_hats(&sorted_copy(data), h, start, x).0
}

/// `b̂2(x; h) = 2n⁻¹Σ[h⁻²K'((x−X_i)/h) g'(x)/g(x) − h⁻¹K((x−X_i)/h)(g'(x)/g(x))²]`.
pub fn b2_hat(x: f64, data: &[f64], h: f64, start: &GaussianStart) -> f64 {
    bias_hats(&sorted_copy(data), h, start, x).1
}

/// Kernel estimates `(ĉ1(h), ĉ2(h), ĉ3(h))` integrated over the data range
/// extended by `5h + 5σ̂`.
pub fn c_hats(data: &[f64], h: f64, start: &GaussianStart) -> Result<BiasCoefficients> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    let sorted = sorted_copy(data);
    let pad = 5.0 * h + 5.0 * start.sigma_hat;
    let (lo, hi) = (sorted[0] - pad, sorted[sorted.len() - 1] + pad);
    let panels = (((hi - lo) / (2.0 * h)).ceil() as usize).clamp(8, 400);
    let breaks: Vec<f64> = (0..=panels)
        .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
        .collect();
    let v = quad::integrate_vec(
        |x| {
            let (b1, b2) = bias_hats(&sorted, h, start, x);
            [b2 * b2, b2 * (b1 + b2), (b1 + b2) * (b1 + b2)]
        },
        &breaks,
        QuadOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_subdivisions: 20_000,
        },
    )?;
    Ok(BiasCoefficients {
        c1: v[0],
        c2: v[1],
        c3: v[2],
    })
}

/// Output of the direct selector.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSelection {
    pub alpha: f64,
    pub h_bar: f64,
    pub moments: HermiteMoments,
    pub c_bar: BiasCoefficients,
    /// Kernel estimates at `h̄`, reused by [`h_final`].
    pub c_hat: BiasCoefficients,
    pub start: GaussianStart,
}

/// `h̄ = {R(K)/μ²_{2,K}}^{1/5} R̄^{−1/5} n^{−1/5}` with `R̄ = c̄3 − c̄2²/c̄1`.
pub fn h_bar(data: &[f64], start: &GaussianStart) -> Result<(f64, HermiteMoments, BiasCoefficients)> {
    let moments = HermiteMoments::with_start(data, DEFAULT_ORDER, start)?;
    let cb = c_bar(moments.gamma(3), moments.gamma(4), moments.gamma(5), start.sigma_hat)?;
    let scale = 1.0 / (start.sigma_hat.powi(5) * SQRT_PI);
    if !(cb.c1 > DEGENERATE_C1 * scale) {
        return Err(Error::SelectorDegenerate {
            reason: format!("pilot c1 = {:e} is not positive", cb.c1),
        });
    }
    let r_bar = cb.c3 - cb.c2 * cb.c2 / cb.c1;
    if !(r_bar > DEGENERATE_C1 * scale) {
        return Err(Error::SelectorDegenerate {
            reason: format!("pilot roughness {r_bar:e} is not positive"),
        });
    }
    let k = Kernel::gaussian();
    let h = (k.r_k() / k.mu2().powi(2)).powf(0.2) * r_bar.powf(-0.2) * (data.len() as f64).powf(-0.2);
    Ok((h, moments, cb))
}

/// Direct selector `α̂^{[1]} = ĉ2(h̄)/ĉ1(h̄)`.
pub fn alpha_hat_1(data: &[f64]) -> Result<DirectSelection> {
    let start = GaussianStart::fit_mle(data)?;
    alpha_hat_1_with(data, &start)
}

pub fn alpha_hat_1_with(data: &[f64], start: &GaussianStart) -> Result<DirectSelection> {
    let (h, moments, cb) = h_bar(data, start)?;
    let ch = c_hats(data, h, start)?;
    if !(ch.c1 > 0.0) || !ch.c2.is_finite() {
        return Err(Error::SelectorDegenerate {
            reason: format!("kernel estimate of c1 is {:e}", ch.c1),
        });
    }
    Ok(DirectSelection {
        alpha: ch.c2 / ch.c1,
        h_bar: h,
        moments,
        c_bar: cb,
        c_hat: ch,
        start: *start,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalBandwidth {
    pub h: f64,
    /// `R̂(α̂^{[1]}, h̄)`.
    pub r_hat: f64,
    /// `R†` before flooring.
    pub r_dagger: f64,
    /// True when `R†` fell below `0.01·R̂` and was clamped.
    pub floored: bool,
}

/// Bias-adjusted bandwidth
/// `ĥ = {R(K)/μ²_{2,K}}^{1/5} R†(α̂^{[1]}, h̄)^{−1/5} n^{−1/5}` with
/// `R† = n/(n−1){R̂ − R(K'')/(nh̄⁵)}` floored at `0.01·R̂`.
pub fn h_final_from(selection: &DirectSelection, n: usize) -> Result<FinalBandwidth> {
    let k = Kernel::gaussian();
    let r_hat = selection.c_hat.roughness(selection.alpha);
    let nf = n as f64;
    let r_k2 = 3.0 / (8.0 * SQRT_PI);
    let r_dagger = nf / (nf - 1.0) * (r_hat - r_k2 / (nf * selection.h_bar.powi(5)));
    let floor = 0.01 * r_hat;
    let floored = !(r_dagger >= floor);
    let r = if floored { floor } else { r_dagger };
    if !(r > 0.0) {
        return Err(Error::BandwidthUndefined(r));
    }
    Ok(FinalBandwidth {
        h: (k.r_k() / k.mu2().powi(2)).powf(0.2) * r.powf(-0.2) * nf.powf(-0.2),
        r_hat,
        r_dagger,
        floored,
    })
}

pub fn h_final(data: &[f64], start: &GaussianStart) -> Result<FinalBandwidth> {
    let sel = alpha_hat_1_with(data, start)?;
    h_final_from(&sel, data.len())
}
