//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Integrands here are smooth and decay like Gaussians, so a finite range
//! split at caller-supplied breakpoints is enough: the breakpoints put
//! narrow features (sharp mixture components, kernel bumps) on panel
//! boundaries, with neighbours a few feature widths away so that no panel
//! is much wider than what it has to resolve, and the adaptive loop refines the panel with the largest
//! error estimate until the total error meets the tolerance.
//!
//! Integrands are `[f64; N]`-valued so several related integrals over the
//! same expensive evaluation can be computed in one pass.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_subdivisions: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

fn kronrod<const N: usize, F>(f: &F, a: f64, b: f64) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    for k in 0..N {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..N {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut error = 0.0_f64;
    for k in 0..N {
        kron[k] *= half;
        gauss[k] *= half;
        error = error.max((kron[k] - gauss[k]).abs());
    }
    Panel {
        a,
        b,
        value: kron,
        error,
    }
}

fn norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Integrates a vector-valued `f` over `[breaks[0], breaks[last]]`, using
/// every interior breakpoint as an initial panel boundary.
pub fn integrate_vec<const N: usize, F>(f: F, breaks: &[f64], opts: QuadOptions) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N],
{
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * a.abs().max(1.0));
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(
            "quadrature needs at least two distinct breakpoints".into(),
        ));
    }

    let mut panels: Vec<Panel<N>> = pts.windows(2).map(|w| kronrod(&f, w[0], w[1])).collect();
    let lower = pts[0];
    let upper = *pts.last().unwrap();

    loop {
        let mut total = [0.0; N];
        let mut err = 0.0;
        for p in &panels {
            for k in 0..N {
                total[k] += p.value[k];
            }
            err += p.error;
        }
        if !err.is_finite() || total.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature {
                lower,
                upper,
                value: norm(&total),
                error: err,
                subdivisions: panels.len(),
            });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * norm(&total)) {
            return Ok(total);
        }
        if panels.len() >= opts.max_subdivisions {
            return Err(Error::Quadrature {
                lower,
                upper,
                value: norm(&total),
                error: err,
                subdivisions: panels.len(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel can no longer be split in floating point.
            return Err(Error::Quadrature {
                lower,
                upper,
                value: norm(&total),
                error: err,
                subdivisions: panels.len() + 1,
            });
        }
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(f: F, breaks: &[f64], opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_vec(|x| [f(x)], breaks, opts).map(|v| v[0])
}

/// Fixed composite 15-point Kronrod rule with `panels` equal panels.
pub fn composite<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let width = (b - a) / panels as f64;
    let g = |x: f64| [f(x)];
    (0..panels)
        .map(|i| {
            let lo = a + width * i as f64;
            kronrod(&g, lo, lo + width).value[0]
        })
        .sum()
}

/// Composite Simpson rule on equispaced samples; falls back to a trapezoid
/// step for the last interval when the sample count is even.
pub fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * step * (values[0] + values[1]),
        _ => {
            let m = if n % 2 == 1 { n } else { n - 1 };
            let mut s = values[0] + values[m - 1];
            for (i, v) in values[1..m - 1].iter().enumerate() {
                s += if i % 2 == 0 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = s * step / 3.0;
            if m < n {
                total += 0.5 * step * (values[n - 2] + values[n - 1]);
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_is_exact_for_high_degree_polynomials() {
        let v = integrate(|x| x.powi(20), &[-1.0, 1.0], QuadOptions::default()).unwrap();
        assert!((v - 2.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let v = integrate(
            |x| (-0.5 * x * x).exp(),
            &[-40.0, 0.0, 40.0],
            QuadOptions::default(),
        )
        .unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn narrow_spike_found_through_breakpoint() {
        let s = 1e-3;
        let f = |x: f64| (-0.5 * ((x - 0.3) / s).powi(2)).exp();
        let breaks = [-5.0, 0.3 - 10.0 * s, 0.3, 0.3 + 10.0 * s, 5.0];
        let v = integrate(f, &breaks, QuadOptions::default()).unwrap();
        assert!((v / (s * (2.0 * std::f64::consts::PI).sqrt()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vector_integrand_shares_panels() {
        let v = integrate_vec(|x| [1.0, x, x * x], &[0.0, 1.0], QuadOptions::default()).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!((v[1] - 0.5).abs() < 1e-15);
        assert!((v[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate(|x| 1.0 / x, &[-1.0, 1.0], QuadOptions::default());
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let step = 0.1;
        let vals: Vec<f64> = (0..=10).map(|i| (i as f64 * step).powi(3)).collect();
        assert!((simpson(&vals, step) - 0.25).abs() < 1e-14);
    }
}
