//! Multi-stage plug-in selection of `α` through the functionals `N` and `D`.
//!
//! Stage bandwidths are chained from a Hermite pilot of the sixth-order
//! functionals down to second order, and two index estimates come out: one
//! from a single bandwidth optimal for the relative error of the ratio, one
//! from separate bandwidths for numerator and denominator.

use super::functional::{beta_amse, combine, l_brackets, BetaSource, FunctionalTable, LBrackets};
use super::hermite::{HermitePilot, DEFAULT_ORDER};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::start::GaussianStart;

pub const MIN_PIPELINE_N: usize = 50;

/// One chained bandwidth: `g = (prefactor)^{1/root} n^{−2/root}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stage {
    /// Pilot bandwidth of the variance functional.
    pub beta: f64,
    pub beta_source: Option<BetaSource>,
    /// `λ̂²` or `κ̂²` at `beta`.
    pub variance_functional: f64,
    /// The squared-bias functional from the previous stage.
    pub bias_functional: f64,
    pub prefactor: f64,
    pub root: u32,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineTrace {
    pub n: usize,
    pub n_tilde_6: f64,
    pub d_tilde_6: f64,
    /// Numerator chain, stages 1..=3.
    pub numerator: [Stage; 3],
    /// Denominator chain, stages 1..=3.
    pub denominator: [Stage; 3],
    pub beta_0: f64,
    pub beta_0_source: Option<BetaSource>,
    /// `N̂_{g_n3}` and `D̂_{g_d3}`.
    pub n_hat: f64,
    pub d_hat: f64,
    pub g_amsre_star: f64,
    /// `N̂` and `D̂` at `g*`.
    pub n_star: f64,
    pub d_star: f64,
    pub alpha_hat_2: f64,
    pub alpha_hat_3: f64,
}

impl PipelineTrace {
    pub fn g_n(&self) -> [f64; 3] {
        self.numerator.map(|s| s.g)
    }

    pub fn g_d(&self) -> [f64; 3] {
        self.denominator.map(|s| s.g)
    }

    /// Every bandwidth in the trace, in pipeline order.
    pub fn bandwidths(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(14);
        for (a, b) in self.numerator.iter().zip(&self.denominator) {
            v.extend([a.beta, b.beta, a.g, b.g]);
        }
        v.extend([self.beta_0, self.g_amsre_star]);
        v
    }
}

struct Ctx<'a> {
    data: &'a [f64],
    start: GaussianStart,
    pilot: HermitePilot<'a>,
    n: f64,
    mu2: f64,
}

impl Ctx<'_> {
    fn table(&self, g: f64, max_order: usize) -> Result<FunctionalTable> {
        FunctionalTable::new(self.data, g, max_order, &self.start)
    }

    /// `[(c/2) V / (μ²_{2,L} B²)]^{1/root} n^{−2/root}` with `c = root − 4`.
    fn stage(&self, weights: [f64; 3], bias: f64, root: u32, trace: &PipelineTrace, name: &'static str) -> Result<Stage> {
        let (beta, src) = beta_amse(weights, &self.pilot, self.data);
        let v = combine(&self.table(beta, 0)?, weights);
        let prefactor = (root as f64 - 4.0) / 2.0 * v / (self.mu2 * self.mu2 * bias * bias);
        let g = prefactor.powf(1.0 / root as f64) * self.n.powf(-2.0 / root as f64);
        let stage = Stage {
            beta,
            beta_source: Some(src),
            variance_functional: v,
            bias_functional: bias,
            prefactor,
            root,
            g,
        };
        if !(g > 0.0 && g.is_finite()) {
            return Err(stage_failure(name, g, trace));
        }
        Ok(stage)
    }
}

fn stage_failure(stage: &'static str, value: f64, trace: &PipelineTrace) -> Error {
    Error::StageFailure {
        stage,
        value,
        trace: Box::new(trace.clone()),
    }
}

fn ratio(num: f64, den: f64, den_scale: f64, what: &str) -> Result<f64> {
    if !(den.abs() > 1e-12 * den_scale) || !den.is_finite() || !num.is_finite() {
        return Err(Error::SelectorDegenerate {
            reason: format!("{what}: denominator functional {den:e} is numerically zero"),
        });
    }
    Ok(1.0 + 0.5 * num / den)
}

/// Runs the six stages and returns `α̂^{[2]}`, `α̂^{[3]}` with every
/// intermediate quantity.
pub fn pipeline(data: &[f64], start: &GaussianStart) -> Result<PipelineTrace> {
    if data.len() < MIN_PIPELINE_N {
        return Err(Error::InvalidParameter(format!(
            "functional pipeline needs at least {MIN_PIPELINE_N} observations, got {}",
            data.len()
        )));
    }
    let kernel = Kernel::gaussian();
    let ctx = Ctx {
        data,
        start: *start,
        pilot: HermitePilot::new(data, start, DEFAULT_ORDER)?,
        n: data.len() as f64,
        mu2: kernel.mu2(),
    };
    let brackets: [LBrackets; 3] = [l_brackets(7, 6)?, l_brackets(5, 4)?, l_brackets(3, 2)?];
    let mut t = PipelineTrace {
        n: data.len(),
        ..Default::default()
    };

    // 1. Hermite pilots of the sixth-order functionals.
    t.n_tilde_6 = ctx.pilot.numerator(6);
    t.d_tilde_6 = ctx.pilot.denominator(6);

    // 2.–4. Chained numerator and denominator bandwidths.
    let names = [
        ("g_n1", "g_d1"),
        ("g_n2", "g_d2"),
        ("g_n3", "g_d3"),
    ];
    let roots = [17, 13, 9];
    let mut n_bias = t.n_tilde_6;
    let mut d_bias = t.d_tilde_6;
    for k in 0..3 {
        let l = &brackets[k];
        t.numerator[k] = ctx.stage(l.lambda_weights(), n_bias, roots[k], &t, names[k].0)?;
        t.denominator[k] = ctx.stage(l.kappa_weights(), d_bias, roots[k], &t, names[k].1)?;
        if k < 2 {
            // next stage's bias functional: order 4 after stage 1, order 2 after stage 2
            let p = 4 - 2 * k;
            n_bias = ctx.table(t.numerator[k].g, p + 3)?.numerator(p);
            d_bias = ctx.table(t.denominator[k].g, p + 2)?.denominator(p);
        }
    }

    // 5. Single AMSRE bandwidth for the ratio.
    let tn3 = ctx.table(t.numerator[2].g, 3)?;
    let td3 = ctx.table(t.denominator[2].g, 2)?;
    t.n_hat = tn3.numerator(0);
    t.d_hat = td3.denominator(0);
    let (nn, dd) = (t.n_hat, t.d_hat);
    // N̂_{g_n2}[2] and D̂_{g_d2}[2] are the stage-3 bias functionals
    let n2 = t.numerator[2].bias_functional;
    let d2 = t.denominator[2].bias_functional;
    let l = &brackets[2];
    let w0 = [
        dd * dd * l.l1,
        -(dd * dd * l.l2 + 2.0 * nn * dd * l.l3),
        dd * dd * l.mu2_p2p2 + 4.0 * nn * nn * l.mu0_p2p2 + 4.0 * nn * dd * l.mu1_p1p2,
    ];
    let (beta0, src0) = beta_amse(w0, &ctx.pilot, data);
    t.beta_0 = beta0;
    t.beta_0_source = Some(src0);
    let var = combine(&ctx.table(beta0, 0)?, w0);
    let cross = dd * n2 - nn * d2;
    t.g_amsre_star = (5.0 / (2.0 * ctx.mu2 * ctx.mu2 * cross * cross)).powf(1.0 / 9.0)
        * var.powf(1.0 / 9.0)
        * ctx.n.powf(-2.0 / 9.0);
    if !(t.g_amsre_star > 0.0 && t.g_amsre_star.is_finite()) {
        return Err(stage_failure("g_amsre_star", t.g_amsre_star, &t));
    }

    // 6. The two index estimates.
    let ts = ctx.table(t.g_amsre_star, 3)?;
    t.n_star = ts.numerator(0);
    t.d_star = ts.denominator(0);
    t.alpha_hat_2 = ratio(t.n_star, t.d_star, ts.denominator_scale(0), "alpha_hat_2")?;
    t.alpha_hat_3 = ratio(t.n_hat, t.d_hat, td3.denominator_scale(0), "alpha_hat_3")?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::mw_density;

    #[test]
    fn trace_is_positive_and_consistent() {
        let data = mw_density(6).unwrap().sample(400, 10);
        let start = GaussianStart::fit_mle(&data).unwrap();
        let t = pipeline(&data, &start).unwrap();
        assert!(t.bandwidths().iter().all(|g| *g > 0.0 && g.is_finite()));
        assert_eq!(t.alpha_hat_3 - 1.0, 0.5 * t.n_hat / t.d_hat);
        for (s, root) in t.numerator.iter().chain(&t.denominator).zip([17, 13, 9, 17, 13, 9]) {
            assert_eq!(s.root, root);
            let rebuilt = s.prefactor.powf(1.0 / root as f64) * 400f64.powf(-2.0 / root as f64);
            assert!((rebuilt / s.g - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn small_samples_rejected() {
        let data = mw_density(6).unwrap().sample(49, 1);
        let start = GaussianStart::fit_mle(&data).unwrap();
        assert!(matches!(pipeline(&data, &start), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn deterministic() {
        let data = mw_density(2).unwrap().sample(200, 2);
        let start = GaussianStart::fit_mle(&data).unwrap();
        assert_eq!(pipeline(&data, &start).unwrap(), pipeline(&data, &start).unwrap());
    }
}
