//! Kernel U-statistics for the density functionals
//! `ψ(p|r,s) = E_f[f^{(p)}(X) q1(X)^r q2(X)^s]` and the bandwidth rules
//! built on them.

use rayon::prelude::*;

use super::hermite::HermitePilot;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, DEFAULT_MAX_ORDER};
use crate::start::{GaussianStart, ParametricStart};

/// `φ(z)` underflows to exactly zero beyond this, so skipping those pairs
/// leaves every sum bit-identical to the full double loop.
const UNDERFLOW_REACH: f64 = 38.7;

const ORDERS: usize = DEFAULT_MAX_ORDER + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalEstimate {
    pub value: f64,
    pub p: usize,
    pub r: i32,
    pub s: i32,
    pub g: f64,
}

/// Per-observation row sums `S_p(i) = Σ_{j≠i} L_g^{(p)}(X_i − X_j)` for all
/// `p ≤ max_order`, from which any `ψ̂_g(p|r,s)` is a weighted average.
///
/// Data are sorted once, so results do not depend on the input order, and
/// each row is summed serially in ascending `j`, so they do not depend on
/// the number of worker threads either.
#[derive(Debug, Clone)]
pub struct FunctionalTable {
    pub g: f64,
    max_order: usize,
    q1: Vec<f64>,
    q2: Vec<f64>,
    rows: Vec<[f64; ORDERS]>,
}

impl FunctionalTable {
    pub fn new(data: &[f64], g: f64, max_order: usize, start: &GaussianStart) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::DegenerateSample(format!(
                "U-statistic needs at least 2 observations, got {}",
                data.len()
            )));
        }
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {g}")));
        }
        if max_order > DEFAULT_MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order: max_order,
                max: DEFAULT_MAX_ORDER,
            });
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let kernel = Kernel::gaussian();
        let scale: Vec<f64> = (0..=max_order).map(|p| g.powi(-(p as i32 + 1))).collect();
        let reach = UNDERFLOW_REACH * g;
        let rows = (0..sorted.len())
            .into_par_iter()
            .map(|i| {
                let xi = sorted[i];
                let lo = sorted.partition_point(|&v| v < xi - reach);
                let hi = sorted.partition_point(|&v| v <= xi + reach);
                let mut acc = [0.0; ORDERS];
                let mut d = [0.0; ORDERS];
                for (j, &xj) in sorted.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    kernel.derivatives_into((xi - xj) / g, &mut d[..=max_order]);
                    for p in 0..=max_order {
                        acc[p] += d[p] * scale[p];
                    }
                }
                acc
            })
            .collect();
        Ok(Self {
            g,
            max_order,
            q1: sorted.iter().map(|&x| start.q1(x)).collect(),
            q2: sorted.iter().map(|&x| start.q2(x)).collect(),
            rows,
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `ψ̂_g(p|r,s)`.
    pub fn psi(&self, p: usize, r: i32, s: i32) -> f64 {
        assert!(p <= self.max_order, "order {p} not tabulated");
        let mut total = 0.0;
        for i in 0..self.rows.len() {
            total += self.q1[i].powi(r) * self.q2[i].powi(s) * self.rows[i][p];
        }
        let n = self.rows.len() as f64;
        total / (n * (n - 1.0))
    }

    /// `N̂_g[p] = ψ̂(p|2,1) − ψ̂(p+3|1,0) − ψ̂(p+2|0,1) − ψ̂(p+1|1,1)`.
    pub fn numerator(&self, p: usize) -> f64 {
        self.psi(p, 2, 1) - self.psi(p + 3, 1, 0) - self.psi(p + 2, 0, 1) - self.psi(p + 1, 1, 1)
    }

    /// `D̂_g[p] = ψ̂(p|4,0) − ψ̂(p+2|2,0) − 2ψ̂(p+1|1,1)`.
    pub fn denominator(&self, p: usize) -> f64 {
        self.psi(p, 4, 0) - self.psi(p + 2, 2, 0) - 2.0 * self.psi(p + 1, 1, 1)
    }

    /// Sum of the absolute terms of `D̂_g[p]`, the scale for degeneracy tests.
    pub fn denominator_scale(&self, p: usize) -> f64 {
        self.psi(p, 4, 0).abs() + self.psi(p + 2, 2, 0).abs() + 2.0 * self.psi(p + 1, 1, 1).abs()
    }
}

/// `ψ̂_g(p|r,s) = 1/(n(n−1)) Σ_{i≠j} q̂1(X_i)^r q̂2(X_i)^s L_g^{(p)}(X_i − X_j)`.
pub fn psi_hat(
    data: &[f64],
    p: usize,
    r: i32,
    s: i32,
    g: f64,
    start: &GaussianStart,
) -> Result<FunctionalEstimate> {
    let table = FunctionalTable::new(data, g, p, start)?;
    Ok(FunctionalEstimate {
        value: table.psi(p, r, s),
        p,
        r,
        s,
        g,
    })
}

/// Kernel moment constants for a pair of derivative orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LBrackets {
    pub p1: usize,
    pub p2: usize,
    /// `L^{[1]} = μ_{2,L^{(p1)}L^{(p1)}} + 4μ_{0,L^{(p2)}L^{(p2)}} + 4μ_{1,L^{(p1)}L^{(p2)}}`.
    pub l1: f64,
    /// `L^{[2]} = 4μ_{1,L^{(p1)}L^{(p2)}} + 2μ_{2,L^{(p1)}L^{(p1)}}`.
    pub l2: f64,
    /// `L^{[3]} = 4μ_{0,L^{(p2)}L^{(p2)}} + 2μ_{1,L^{(p1)}L^{(p2)}}`.
    pub l3: f64,
    pub mu2_p1p1: f64,
    pub mu0_p2p2: f64,
    pub mu1_p1p2: f64,
    pub mu2_p2p2: f64,
}

pub fn l_brackets(p1: usize, p2: usize) -> Result<LBrackets> {
    let k = Kernel::gaussian();
    let mu2_p1p1 = k.product_moment(2, p1, p1)?;
    let mu0_p2p2 = k.product_moment(0, p2, p2)?;
    let mu1_p1p2 = k.product_moment(1, p1, p2)?;
    let mu2_p2p2 = k.product_moment(2, p2, p2)?;
    Ok(LBrackets {
        p1,
        p2,
        l1: mu2_p1p1 + 4.0 * mu0_p2p2 + 4.0 * mu1_p1p2,
        l2: 4.0 * mu1_p1p2 + 2.0 * mu2_p1p1,
        l3: 4.0 * mu0_p2p2 + 2.0 * mu1_p1p2,
        mu2_p1p1,
        mu0_p2p2,
        mu1_p1p2,
        mu2_p2p2,
    })
}

impl LBrackets {
    /// `(a, b, c)` weights of `λ̂²_{p2|p1}` on `ψ̂(0|0,2)`, `ψ̂(0|2,1)`, `ψ̂(0|4,0)`.
    /// The last weight is `μ_{2,L^{(p2)}L^{(p2)}}`, kept in that form.
    pub fn lambda_weights(&self) -> [f64; 3] {
        [self.l1, -self.l2, self.mu2_p2p2]
    }

    /// Weights of `κ̂²_{p2}`.
    pub fn kappa_weights(&self) -> [f64; 3] {
        [0.0, 0.0, 4.0 * self.mu0_p2p2]
    }
}

/// `a ψ̂(0|0,2) + b ψ̂(0|2,1) + c ψ̂(0|4,0)` from a tabulated bandwidth.
pub fn combine(table: &FunctionalTable, w: [f64; 3]) -> f64 {
    w[0] * table.psi(0, 0, 2) + w[1] * table.psi(0, 2, 1) + w[2] * table.psi(0, 4, 0)
}

/// `(λ̂²_{p2|p1}(β), κ̂²_{p2}(β))`.
pub fn lambda_kappa_sq(
    data: &[f64],
    beta: f64,
    p1: usize,
    p2: usize,
    start: &GaussianStart,
) -> Result<(f64, f64)> {
    let l = l_brackets(p1, p2)?;
    let t = FunctionalTable::new(data, beta, 0, start)?;
    Ok((combine(&t, l.lambda_weights()), combine(&t, l.kappa_weights())))
}

/// Which pilot produced a `β_AMSE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaSource {
    Hermite,
    NormalReference,
    /// `σ̂ n^{−2/5}`, used when both pilots are degenerate.
    ScaleRule,
}

/// AMSE-optimal bandwidth for `aψ̂_β(0|0,2) + bψ̂_β(0|2,1) + cψ̂_β(0|4,0)`:
/// `[2R(L) E_f[f(aq2² + bq1²q2 + cq1⁴)²] / {aψ(2|0,2) + bψ(2|2,1) + cψ(2|4,0)}²]^{1/5} n^{−2/5}`
/// with the unknown functionals taken from `pilot`.
pub fn beta_amse_with(w: [f64; 3], pilot: &HermitePilot<'_>, n: usize) -> Option<f64> {
    let st = pilot.start;
    let weight = |x: f64| {
        let (q1, q2) = (st.q1(x), st.q2(x));
        w[0] * q2 * q2 + w[1] * q1 * q1 * q2 + w[2] * q1.powi(4)
    };
    let num = pilot.expectation(0, |x| weight(x).powi(2));
    let terms = [
        w[0] * pilot.psi(2, 0, 2),
        w[1] * pilot.psi(2, 2, 1),
        w[2] * pilot.psi(2, 4, 0),
    ];
    let den: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if !(num > 0.0) || !(den.abs() > 1e-9 * scale) || !den.is_finite() {
        return None;
    }
    let beta = (2.0 * Kernel::gaussian().r_k() * num / (den * den)).powf(0.2) * (n as f64).powf(-0.4);
    (beta > 0.0 && beta.is_finite()).then_some(beta)
}

/// `β_AMSE` with the Hermite pilot, falling back to the normal-reference
/// pilot and finally to `σ̂ n^{−2/5}`.
pub fn beta_amse(w: [f64; 3], pilot: &HermitePilot<'_>, data: &[f64]) -> (f64, BetaSource) {
    let n = data.len();
    if let Some(b) = beta_amse_with(w, pilot, n) {
        return (b, BetaSource::Hermite);
    }
    let normal = HermitePilot::normal_reference(data, &pilot.start, pilot.moments.m);
    if let Some(b) = beta_amse_with(w, &normal, n) {
        return (b, BetaSource::NormalReference);
    }
    (pilot.start.sigma_hat * (n as f64).powf(-0.4), BetaSource::ScaleRule)
}
