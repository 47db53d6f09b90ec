//! Ground-truth densities: normal mixtures (including the fifteen standard
//! mixture test densities) and the skew-normal family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::{hermite_into, phi};
use crate::start::GaussianStart;

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// RNG stream `stream` of the experiment seeded with `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl NormalMixture {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != sds.len() {
            return Err(Error::InvalidParameter(
                "mixture needs equal, nonzero numbers of weights, means and sds".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) || sds.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidParameter(
                "mixture weights and sds must be positive".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            weights,
            means,
            sds,
        })
    }

    fn from_triples(parts: Vec<(f64, f64, f64)>) -> Self {
        let mut w: Vec<f64> = parts.iter().map(|p| p.0).collect();
        // Catalogue weights are exact fractions; renormalize away rounding.
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        Self {
            weights: w,
            means: parts.iter().map(|p| p.1).collect(),
            sds: parts.iter().map(|p| p.2).collect(),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.sds)
            .map(|((w, m), s)| (*w, *m, *s))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `k`-th derivative: `Σ p_i (-1)^k He_k(z_i) φ(z_i) / σ_i^{k+1}`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        let mut he = [0.0; 16];
        let mut acc = 0.0;
        for (w, m, s) in self.components() {
            let z = (x - m) / s;
            hermite_into(z, &mut he[..=k]);
            acc += w * he[k] * phi(z) / s.powi(k as i32 + 1);
        }
        if k % 2 == 0 {
            acc
        } else {
            -acc
        }
    }

    pub fn mean(&self) -> f64 {
        self.components().map(|(w, m, _)| w * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.components()
            .map(|(w, m, s)| w * (s * s + (m - mu).powi(2)))
            .sum()
    }

    fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut idx = self.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                idx = i;
                break;
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        self.means[idx] + self.sds[idx] * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormal {
    pub lambda: f64,
}

impl SkewNormal {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    /// `s1(x, λ) = λφ(λx) − He_1(x)Φ(λx)`, so that `f' = 2φ s1`.
    pub fn s1(&self, x: f64) -> f64 {
        let l = self.lambda;
        l * phi(l * x) - x * normal_cdf(l * x)
    }

    /// `s2(x, λ) = He_2(x)Φ(λx) − (λ³ + 2λ)He_1(x)φ(λx)`, so that `f'' = 2φ s2`.
    pub fn s2(&self, x: f64) -> f64 {
        let l = self.lambda;
        (x * x - 1.0) * normal_cdf(l * x) - (l.powi(3) + 2.0 * l) * x * phi(l * x)
    }

    /// `δ = λ/√(1+λ²)`, written so that huge `|λ|` does not overflow.
    pub fn delta(&self) -> f64 {
        self.lambda / 1f64.hypot(self.lambda)
    }

    pub fn mean(&self) -> f64 {
        (2.0 / std::f64::consts::PI).sqrt() * self.delta()
    }

    pub fn variance(&self) -> f64 {
        1.0 - 2.0 * self.delta().powi(2) / std::f64::consts::PI
    }

    fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        let delta = self.delta();
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        delta * z1.abs() + (1.0 - delta * delta).sqrt() * z2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrueDensity {
    Mixture { id: String, mixture: NormalMixture },
    SkewNormal(SkewNormal),
}

impl TrueDensity {
    pub fn id(&self) -> String {
        match self {
            TrueDensity::Mixture { id, .. } => id.clone(),
            TrueDensity::SkewNormal(s) => format!("sn{}", s.lambda),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            TrueDensity::Mixture { mixture, .. } => mixture.derivative(0, x),
            TrueDensity::SkewNormal(s) => 2.0 * phi(x) * normal_cdf(s.lambda * x),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            TrueDensity::Mixture { mixture, .. } => mixture.derivative(1, x),
            TrueDensity::SkewNormal(s) => 2.0 * phi(x) * s.s1(x),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            TrueDensity::Mixture { mixture, .. } => mixture.derivative(2, x),
            TrueDensity::SkewNormal(s) => 2.0 * phi(x) * s.s2(x),
        }
    }

    /// Mean and variance, i.e. the Kullback–Leibler optimal Gaussian.
    pub fn kl_gaussian(&self) -> (f64, f64) {
        match self {
            TrueDensity::Mixture { mixture, .. } => (mixture.mean(), mixture.variance()),
            TrueDensity::SkewNormal(s) => (s.mean(), s.variance()),
        }
    }

    /// The least-false Gaussian start `g0`.
    pub fn least_false_start(&self) -> GaussianStart {
        let (mu, var) = self.kl_gaussian();
        GaussianStart {
            mu_hat: mu,
            sigma_hat: var.sqrt(),
            n: 0,
        }
    }

    /// Quadrature breakpoints covering the density's effective support out
    /// to `spread` overall standard deviations, with extra points around
    /// every narrow feature.
    pub fn breakpoints(&self, spread: f64) -> Vec<f64> {
        let (mu, var) = self.kl_gaussian();
        let sd = var.sqrt();
        let (mut lo, mut hi) = (mu - spread * sd, mu + spread * sd);
        if let TrueDensity::Mixture { mixture, .. } = self {
            // a wide minor component can reach further than the overall spread
            for (_, m, s) in mixture.components() {
                lo = lo.min(m - spread * s);
                hi = hi.max(m + spread * s);
            }
        }
        let mut pts = vec![lo, mu, hi];
        match self {
            TrueDensity::Mixture { mixture, .. } => {
                for (_, m, s) in mixture.components() {
                    for k in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
                        pts.push(m + k * s);
                    }
                }
            }
            TrueDensity::SkewNormal(_) => {
                for k in -8..=8 {
                    pts.push(k as f64);
                }
            }
        }
        pts.retain(|p| *p >= lo && *p <= hi);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }

    /// Interval outside which the density's mass is negligible (< 1e-6).
    pub fn support(&self) -> (f64, f64) {
        match self {
            TrueDensity::Mixture { mixture, .. } => {
                let lo = mixture
                    .components()
                    .map(|(_, m, s)| m - 6.0 * s)
                    .fold(f64::INFINITY, f64::min);
                let hi = mixture
                    .components()
                    .map(|(_, m, s)| m + 6.0 * s)
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            TrueDensity::SkewNormal(s) => {
                let mu = s.mean();
                (-8.0 + mu.min(0.0), 8.0 + mu.max(0.0))
            }
        }
    }

    /// Smallest length scale of the density, used to size grids.
    pub fn feature_scale(&self) -> f64 {
        match self {
            TrueDensity::Mixture { mixture, .. } => {
                mixture.components().map(|c| c.2).fold(f64::INFINITY, f64::min)
            }
            TrueDensity::SkewNormal(s) => 1.0 / (1.0 + s.lambda.abs()).sqrt(),
        }
    }

    pub fn sample_with<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        match self {
            TrueDensity::Mixture { mixture, .. } => {
                (0..n).map(|_| mixture.sample_one(rng)).collect()
            }
            TrueDensity::SkewNormal(s) => (0..n).map(|_| s.sample_one(rng)).collect(),
        }
    }

    /// Deterministic sample: stream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(n, &mut rng_stream(seed, 0))
    }
}

/// One of the fifteen standard normal-mixture test densities.
pub fn marron_wand(id: usize) -> Result<NormalMixture> {
    let parts: Vec<(f64, f64, f64)> = match id {
        1 => vec![(1.0, 0.0, 1.0)],
        2 => vec![
            (0.2, 0.0, 1.0),
            (0.2, 0.5, 2.0 / 3.0),
            (0.6, 13.0 / 12.0, 5.0 / 9.0),
        ],
        3 => (0..8)
            .map(|l| {
                let r = (2.0_f64 / 3.0).powi(l);
                (1.0 / 8.0, 3.0 * (r - 1.0), r)
            })
            .collect(),
        4 => vec![(2.0 / 3.0, 0.0, 1.0), (1.0 / 3.0, 0.0, 0.1)],
        5 => vec![(0.1, 0.0, 1.0), (0.9, 0.0, 0.1)],
        6 => vec![(0.5, -1.0, 2.0 / 3.0), (0.5, 1.0, 2.0 / 3.0)],
        7 => vec![(0.5, -1.5, 0.5), (0.5, 1.5, 0.5)],
        8 => vec![(0.75, 0.0, 1.0), (0.25, 1.5, 1.0 / 3.0)],
        9 => vec![(0.45, -1.2, 0.6), (0.45, 1.2, 0.6), (0.1, 0.0, 0.25)],
        10 => std::iter::once((0.5, 0.0, 1.0))
            .chain((0..5).map(|l| (0.1, l as f64 / 2.0 - 1.0, 0.1)))
            .collect(),
        11 => [(0.49, -1.0, 2.0 / 3.0), (0.49, 1.0, 2.0 / 3.0)]
            .into_iter()
            .chain((0..7).map(|l| (1.0 / 350.0, (l as f64 - 3.0) / 2.0, 0.01)))
            .collect(),
        12 => std::iter::once((0.5, 0.0, 1.0))
            .chain((-2..=2).map(|l: i32| {
                (
                    2.0_f64.powi(1 - l) / 31.0,
                    l as f64 + 0.5,
                    2.0_f64.powi(-l) / 10.0,
                )
            }))
            .collect(),
        13 => (0..2)
            .map(|l| (0.46, 2.0 * l as f64 - 1.0, 2.0 / 3.0))
            .chain((1..=3).map(|l| (1.0 / 300.0, -(l as f64) / 2.0, 0.01)))
            .chain((1..=3).map(|l| (7.0 / 300.0, l as f64 / 2.0, 0.07)))
            .collect(),
        14 => (0..6)
            .map(|l| {
                (
                    2.0_f64.powi(5 - l) / 63.0,
                    (65.0 - 96.0 * 0.5_f64.powi(l)) / 21.0,
                    (32.0 / 63.0) / 2.0_f64.powi(l),
                )
            })
            .collect(),
        15 => (0..3)
            .map(|l| (2.0 / 7.0, (12.0 * l as f64 - 15.0) / 7.0, 2.0 / 7.0))
            .chain((8..=10).map(|l| (1.0 / 21.0, 2.0 * l as f64 / 7.0, 1.0 / 21.0)))
            .collect(),
        _ => return Err(Error::UnknownDensity(id.to_string())),
    };
    Ok(NormalMixture::from_triples(parts))
}

/// Density lookup by identifier: `mw1`..`mw15` (or a bare number) for the
/// mixtures, `sn<λ>` for skew-normals.
pub fn lookup(id: &str) -> Result<TrueDensity> {
    let id = id.trim();
    if let Some(l) = id.strip_prefix("sn") {
        let lambda: f64 = l
            .parse()
            .map_err(|_| Error::UnknownDensity(id.to_string()))?;
        if !lambda.is_finite() {
            return Err(Error::UnknownDensity(id.to_string()));
        }
        return Ok(TrueDensity::SkewNormal(SkewNormal::new(lambda)));
    }
    let num = id.strip_prefix("mw").unwrap_or(id);
    let k: usize = num
        .parse()
        .map_err(|_| Error::UnknownDensity(id.to_string()))?;
    mw_density(k)
}

pub fn mw_density(k: usize) -> Result<TrueDensity> {
    Ok(TrueDensity::Mixture {
        id: format!("mw{k}"),
        mixture: marron_wand(k)?,
    })
}

/// Catalogue rows `(id, component, weight, mean, sd)`.
pub fn catalogue() -> Vec<(usize, usize, f64, f64, f64)> {
    (1..=15)
        .flat_map(|id| {
            let m = marron_wand(id).expect("catalogue ids are valid");
            m.components()
                .enumerate()
                .map(|(c, (w, mu, s))| (id, c + 1, w, mu, s))
                .collect::<Vec<_>>()
        })
        .collect()
}
