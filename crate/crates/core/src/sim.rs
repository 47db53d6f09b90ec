//! Monte Carlo harness: integrated squared error, MISE over seeded
//! replications, bandwidth grid search and MISE summaries.
//!
//! Replication `r` always draws its sample from stream `r` of the run seed,
//! so every estimator and every bandwidth sees the same samples and paired
//! comparisons are valid. Replications run in parallel but results are
//! collected in replication order before any reduction, which keeps every
//! number bit-identical whatever the worker count.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{kde, linspace, AlphaEstimator, DensityEstimate, EstimatorConfig};
use crate::kernel::Kernel;
use crate::quad::simpson;
use crate::selection::{select_alpha_or_fallback, Selector};
use crate::start::GaussianStart;
use crate::theory::bias_coefficients;
use crate::zoo::{rng_stream, TrueDensity};

/// Largest tolerated share of failed replications at one bandwidth.
pub const MAX_FAILURE_SHARE: f64 = 0.01;

const COARSE_POINTS: usize = 15;
const REFINE_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorRecipe {
    /// Traditional kernel estimator `f̃`.
    Kde,
    /// `f̂_α` with a fixed index.
    Alpha(f64),
    /// `f̂_α` at the AMISE-optimal index of the true density.
    IdealAlpha,
    /// `f̂_α` with the index chosen from each sample.
    Selected(Selector),
}

impl EstimatorRecipe {
    pub fn label(&self) -> String {
        match self {
            Self::Kde => "kde".into(),
            Self::Alpha(a) => format!("alpha{a}"),
            Self::IdealAlpha => "alpha_o".into(),
            Self::Selected(s) => format!("auto{}", s.index()),
        }
    }
}

/// Integration grid for ISE: the truth's effective support widened by `4h`,
/// with spacing a sixth of the smaller of `h` and the narrowest feature.
pub fn ise_grid(truth: &TrueDensity, h: f64) -> Vec<f64> {
    let (lo, hi) = truth.support();
    let (lo, hi) = (lo - 4.0 * h, hi + 4.0 * h);
    let step = h.min(truth.feature_scale()) / 6.0;
    let mut count = ((hi - lo) / step).ceil() as usize + 1;
    if count % 2 == 0 {
        count += 1;
    }
    linspace(lo, hi, count.max(3))
}

/// `∫(f̂ − f)²` by Simpson's rule over the estimate's (equispaced) grid.
pub fn ise_values(grid: &[f64], values: &[f64], truth: &TrueDensity) -> Result<f64> {
    if grid.len() < 3 || grid.len() != values.len() {
        return Err(Error::InvalidParameter("ISE needs at least 3 matching grid values".into()));
    }
    let sq: Vec<f64> = grid
        .iter()
        .zip(values)
        .map(|(x, v)| (v - truth.pdf(*x)).powi(2))
        .collect();
    let edge = sq[0].max(sq[sq.len() - 1]);
    if edge > 1e-8 {
        return Err(Error::GridTooNarrow(edge));
    }
    Ok(simpson(&sq, grid[1] - grid[0]))
}

pub fn ise<S>(estimate: &DensityEstimate<S>, truth: &TrueDensity) -> Result<f64> {
    ise_values(&estimate.grid, &estimate.values, truth)
}

/// `(median, 1.4826·MAD/√n)`.
pub fn robust_summary(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let med = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    (med, 1.4826 * median(&dev) / (values.len() as f64).sqrt())
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `(mean, standard error)` of finite values.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// A replication's sample with everything that does not depend on `h`.
#[derive(Debug, Clone)]
struct Prepared {
    data: Vec<f64>,
    start: Option<GaussianStart>,
    alpha: Option<f64>,
    fell_back: bool,
    failed: bool,
}

fn prepare(truth: &TrueDensity, recipe: EstimatorRecipe, ideal: Option<f64>, n: usize, seed: u64, rep: usize) -> Prepared {
    let data = truth.sample_with(n, &mut rng_stream(seed, rep as u64));
    let mut p = Prepared {
        data,
        start: None,
        alpha: None,
        fell_back: false,
        failed: false,
    };
    if recipe == EstimatorRecipe::Kde {
        return p;
    }
    let start = match GaussianStart::fit_mle(&p.data) {
        Ok(s) => s,
        Err(_) => {
            p.failed = true;
            return p;
        }
    };
    p.start = Some(start);
    p.alpha = match recipe {
        EstimatorRecipe::Kde => None,
        EstimatorRecipe::Alpha(a) => Some(a),
        EstimatorRecipe::IdealAlpha => ideal,
        EstimatorRecipe::Selected(sel) => match select_alpha_or_fallback(&p.data, &start, sel) {
            Ok((a, _, err)) => {
                p.fell_back = err.is_some();
                Some(a)
            }
            Err(_) => {
                p.failed = true;
                None
            }
        },
    };
    p
}

fn curve(p: &Prepared, h: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if p.failed {
        return Err(Error::SelectorDegenerate {
            reason: "replication could not be prepared".into(),
        });
    }
    match (p.start, p.alpha) {
        (Some(start), Some(alpha)) => {
            let cfg = EstimatorConfig::new(alpha, h, start)?;
            AlphaEstimator::new(&p.data, &cfg)?.eval_many(grid)
        }
        _ => {
            let k = Kernel::gaussian();
            grid.iter().map(|&x| kde(&p.data, h, &k, x)).collect()
        }
    }
}

fn ideal_alpha(truth: &TrueDensity, recipe: EstimatorRecipe) -> Result<Option<f64>> {
    if recipe != EstimatorRecipe::IdealAlpha {
        return Ok(None);
    }
    let c = bias_coefficients(truth, &truth.least_false_start())?;
    c.alpha_opt().map(Some)
}

/// Per-replication ISE at one bandwidth; failed replications are NaN.
fn ise_at(truth: &TrueDensity, prepared: &[Prepared], h: f64) -> Vec<f64> {
    let grid = ise_grid(truth, h);
    prepared
        .par_iter()
        .map(|p| {
            curve(p, h, &grid)
                .and_then(|v| ise_values(&grid, &v, truth))
                .unwrap_or(f64::NAN)
        })
        .collect()
}

fn prepare_all(truth: &TrueDensity, recipe: EstimatorRecipe, n: usize, reps: usize, seed: u64) -> Result<Vec<Prepared>> {
    if reps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 replications, got {reps}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need a sample size of at least 2, got {n}")));
    }
    let ideal = ideal_alpha(truth, recipe)?;
    Ok((0..reps)
        .into_par_iter()
        .map(|r| prepare(truth, recipe, ideal, n, seed, r))
        .collect())
}

/// Monte Carlo `(MISE, SE)` at a single bandwidth.
pub fn mise(truth: &TrueDensity, recipe: EstimatorRecipe, n: usize, h: f64, reps: usize, seed: u64) -> Result<(f64, f64)> {
    let prepared = prepare_all(truth, recipe, n, reps, seed)?;
    let ises = ise_at(truth, &prepared, h);
    let failed = ises.iter().filter(|v| !v.is_finite()).count();
    if failed as f64 > MAX_FAILURE_SHARE * reps as f64 {
        return Err(Error::TooManyFailures { failed, total: reps });
    }
    Ok(mean_se(&ises))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub density_id: String,
    pub estimator_label: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Bandwidths in increasing order.
    pub h_grid: Vec<f64>,
    /// MISE per bandwidth; NaN where more than 1% of replications failed.
    pub mise: Vec<f64>,
    pub se: Vec<f64>,
    pub median_ise: Vec<f64>,
    pub robust_se: Vec<f64>,
    pub failures: Vec<usize>,
    pub min_mise: f64,
    pub h_at_min: f64,
    /// Per-replication ISE at `h_at_min`, NaN for failed replications.
    pub best_ise: Vec<f64>,
    /// The coarse minimum sat on an end of the search interval.
    pub boundary: bool,
    /// Replications where the selector degenerated and `α = 2` was used.
    pub fallbacks: usize,
}

struct Evaluation {
    h: f64,
    ises: Vec<f64>,
    valid: bool,
    mise: f64,
}

fn evaluate(truth: &TrueDensity, prepared: &[Prepared], h: f64) -> Evaluation {
    let ises = ise_at(truth, prepared, h);
    let failed = ises.iter().filter(|v| !v.is_finite()).count();
    let valid = failed as f64 <= MAX_FAILURE_SHARE * prepared.len() as f64;
    let mise = if valid { mean_se(&ises).0 } else { f64::NAN };
    Evaluation { h, ises, valid, mise }
}

/// Index of the smallest valid MISE; ties go to the smaller bandwidth.
fn argmin(evals: &[Evaluation]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, e) in evals.iter().enumerate() {
        if !e.valid {
            continue;
        }
        match best {
            Some(b) if evals[b].mise < e.mise || (evals[b].mise == e.mise && evals[b].h <= e.h) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Log-spaced coarse search over `h_range` followed by one refinement pass
/// between the neighbours of the coarse minimizer.
pub fn grid_search(
    truth: &TrueDensity,
    recipe: EstimatorRecipe,
    n: usize,
    reps: usize,
    seed: u64,
    h_range: (f64, f64),
) -> Result<SimResult> {
    let (lo, hi) = h_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad bandwidth interval ({lo}, {hi})")));
    }
    let prepared = prepare_all(truth, recipe, n, reps, seed)?;
    let fallbacks = prepared.iter().filter(|p| p.fell_back).count();
    let ratio = (hi / lo).ln();
    let coarse: Vec<f64> = (0..COARSE_POINTS)
        .map(|i| lo * (ratio * i as f64 / (COARSE_POINTS - 1) as f64).exp())
        .collect();
    let mut evals: Vec<Evaluation> = coarse.iter().map(|&h| evaluate(truth, &prepared, h)).collect();
    let k = argmin(&evals).ok_or(Error::TooManyFailures {
        failed: reps,
        total: reps,
    })?;
    let boundary = k == 0 || k == COARSE_POINTS - 1;
    let (a, b) = (coarse[k.saturating_sub(1)], coarse[(k + 1).min(COARSE_POINTS - 1)]);
    let span = (b / a).ln();
    for j in 1..=REFINE_POINTS {
        let h = a * (span * j as f64 / (REFINE_POINTS + 1) as f64).exp();
        if evals.iter().any(|e| (e.h / h - 1.0).abs() < 1e-12) {
            continue;
        }
        evals.push(evaluate(truth, &prepared, h));
    }
    evals.sort_by(|x, y| x.h.total_cmp(&y.h));
    let best = argmin(&evals).expect("coarse minimum is still present");

    let mut out = SimResult {
        density_id: truth.id(),
        estimator_label: recipe.label(),
        n,
        reps,
        seed,
        h_grid: Vec::with_capacity(evals.len()),
        mise: Vec::with_capacity(evals.len()),
        se: Vec::with_capacity(evals.len()),
        median_ise: Vec::with_capacity(evals.len()),
        robust_se: Vec::with_capacity(evals.len()),
        failures: Vec::with_capacity(evals.len()),
        min_mise: evals[best].mise,
        h_at_min: evals[best].h,
        best_ise: evals[best].ises.clone(),
        boundary,
        fallbacks,
    };
    for e in &evals {
        let ok: Vec<f64> = e.ises.iter().copied().filter(|v| v.is_finite()).collect();
        let (_, se) = mean_se(&ok);
        let (med, rse) = robust_summary(&ok);
        out.h_grid.push(e.h);
        out.mise.push(e.mise);
        out.se.push(if e.valid { se } else { f64::NAN });
        out.median_ise.push(med);
        out.robust_se.push(rse);
        out.failures.push(e.ises.len() - ok.len());
    }
    Ok(out)
}

impl SimResult {
    /// Standard error at the minimizing bandwidth.
    pub fn se_at_min(&self) -> f64 {
        let i = self
            .h_grid
            .iter()
            .position(|h| *h == self.h_at_min)
            .expect("minimizer is on the grid");
        self.se[i]
    }
}

/// Mean and standard error of `ISE_a − ISE_b` over replications, each at
/// its own best bandwidth, using replications valid for both.
pub fn paired_difference(a: &SimResult, b: &SimResult) -> Result<(f64, f64)> {
    if a.reps != b.reps || a.seed != b.seed || a.n != b.n || a.density_id != b.density_id {
        return Err(Error::InvalidParameter(
            "paired comparison needs results from the same samples".into(),
        ));
    }
    let diffs: Vec<f64> = a
        .best_ise
        .iter()
        .zip(&b.best_ise)
        .map(|(x, y)| x - y)
        .filter(|d| d.is_finite())
        .collect();
    Ok(mean_se(&diffs))
}

/// Heuristic search interval around the normal-reference bandwidth of the
/// truth: `[0.1, 5]` times `σ0 (4/(3n))^{1/5}`.
pub fn default_h_range(truth: &TrueDensity, n: usize) -> (f64, f64) {
    let (_, var) = truth.kl_gaussian();
    let h = var.sqrt() * (4.0 / (3.0 * n as f64)).powf(0.2);
    (0.1 * h, 5.0 * h)
}

/// Long-format CSV: one row per (estimator, bandwidth).
pub fn results_csv(results: &[SimResult]) -> String {
    let mut s = String::from("density_id,estimator,h,mise,se,n,reps,seed\n");
    for r in results {
        for i in 0..r.h_grid.len() {
            let _ = writeln!(
                s,
                "{},{},{:.6e},{:.6e},{:.6e},{},{},{}",
                r.density_id, r.estimator_label, r.h_grid[i], r.mise[i], r.se[i], r.n, r.reps, r.seed
            );
        }
    }
    s
}

/// Plain-text summary: `10⁵ × min MISE (10⁵ × SE)` per estimator.
pub fn mise_summary(results: &[SimResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<10} {:<10} {:>14} {:>10} {:>6}", "density", "estimator", "minMISE*1e5", "h", "flags");
    for r in results {
        let mut flags = String::new();
        if r.boundary {
            flags.push('B');
        }
        if r.fallbacks > 0 {
            flags.push('F');
        }
        let _ = writeln!(
            s,
            "{:<10} {:<10} {:>14} {:>10.4} {:>6}",
            r.density_id,
            r.estimator_label,
            format!("{:.0} ({:.0})", r.min_mise * 1e5, r.se_at_min() * 1e5),
            r.h_at_min,
            flags
        );
    }
    s
}
