//! Smoothing kernels, their derivatives and moment functionals.
//!
//! Derivatives of the Gaussian kernel follow from the probabilists' Hermite
//! polynomials, `d^p/dz^p φ(z) = (-1)^p He_p(z) φ(z)`, so all orders up to
//! `p` come out of a single three-term recurrence.

use crate::error::{Error, Result};
use crate::quad;

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
pub const SQRT_PI: f64 = 1.772_453_850_905_516;

pub const DEFAULT_MAX_ORDER: usize = 9;

/// Standard normal density.
#[inline]
pub fn phi(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Fills `out[k] = He_k(z)` for `k < out.len()`.
#[inline]
pub fn hermite_into(z: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = z;
    }
    for k in 1..out.len().saturating_sub(1) {
        out[k + 1] = z * out[k] - k as f64 * out[k - 1];
    }
}

/// Probabilists' Hermite polynomial `He_k(z)`.
pub fn hermite(k: usize, z: f64) -> f64 {
    let mut buf = vec![0.0; k + 1];
    hermite_into(z, &mut buf);
    buf[k]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelFamily {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kernel {
    family: KernelFamily,
    max_order: usize,
}

impl Default for Kernel {
    fn default() -> Self {
        Self::gaussian()
    }
}

impl Kernel {
    pub fn gaussian() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            max_order: DEFAULT_MAX_ORDER,
        }
    }

    pub fn with_max_order(family: KernelFamily, max_order: usize) -> Self {
        Self { family, max_order }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_gaussian(&self) -> bool {
        self.family == KernelFamily::Gaussian
    }

    fn check(&self, p: usize) -> Result<()> {
        if p > self.max_order {
            Err(Error::UnsupportedOrder {
                order: p,
                max: self.max_order,
            })
        } else {
            Ok(())
        }
    }

    /// `p`-th derivative of the kernel at `z`.
    pub fn evaluate(&self, p: usize, z: f64) -> Result<f64> {
        self.check(p)?;
        let mut buf = [0.0; DEFAULT_MAX_ORDER + 1];
        let mut heap;
        let out: &mut [f64] = if p < buf.len() {
            &mut buf[..=p]
        } else {
            heap = vec![0.0; p + 1];
            &mut heap
        };
        self.derivatives_into(z, out);
        Ok(out[p])
    }

    /// Fills `out[p]` with the `p`-th derivative at `z` for every
    /// `p < out.len()`. Orders are not checked against `max_order`.
    #[inline]
    pub fn derivatives_into(&self, z: f64, out: &mut [f64]) {
        match self.family {
            KernelFamily::Gaussian => {
                hermite_into(z, out);
                let d = phi(z);
                for (p, v) in out.iter_mut().enumerate() {
                    *v = if p % 2 == 0 { *v * d } else { -*v * d };
                }
            }
        }
    }

    /// Log of the kernel itself; used to keep weighted sums in log space.
    #[inline]
    pub fn ln_density(&self, z: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => -0.5 * z * z - LN_SQRT_2PI,
        }
    }

    /// `μ_{ℓ, L^{(p1)}} = ∫ z^ℓ L^{(p1)}(z) dz`.
    pub fn moment(&self, ell: u32, p1: usize) -> Result<f64> {
        self.check(p1)?;
        Ok(self.refine(|panels| self.moment_panels(ell, p1, None, panels)))
    }

    /// `μ_{ℓ, L^{(p1)} L^{(p2)}} = ∫ z^ℓ L^{(p1)}(z) L^{(p2)}(z) dz`.
    pub fn product_moment(&self, ell: u32, p1: usize, p2: usize) -> Result<f64> {
        self.check(p1)?;
        self.check(p2)?;
        Ok(self.refine(|panels| self.moment_panels(ell, p1, Some(p2), panels)))
    }

    /// `R(L^{(p)}) = ∫ {L^{(p)}(z)}² dz`.
    pub fn roughness(&self, p: usize) -> Result<f64> {
        self.product_moment(0, p, p)
    }

    /// `μ_{2,K}`.
    pub fn mu2(&self) -> f64 {
        match self.family {
            KernelFamily::Gaussian => 1.0,
        }
    }

    /// `R(K)`.
    pub fn r_k(&self) -> f64 {
        match self.family {
            KernelFamily::Gaussian => 0.5 / SQRT_PI,
        }
    }

    fn refine(&self, eval: impl Fn(usize) -> f64) -> f64 {
        let mut panels = 16;
        let mut prev = eval(panels);
        loop {
            panels *= 2;
            let next = eval(panels);
            if (next - prev).abs() <= 1e-10 * next.abs().max(1e-4) || panels >= 1 << 14 {
                return next;
            }
            prev = next;
        }
    }

    /// Moment integral on a fixed composite rule of `panels` panels over a
    /// symmetric range wide enough that the truncated tail is below 1e-12.
    pub fn moment_panels(&self, ell: u32, p1: usize, p2: Option<usize>, panels: usize) -> f64 {
        let top = p1.max(p2.unwrap_or(0));
        let integrand = |z: f64| {
            let mut buf = [0.0; 32];
            let d = &mut buf[..=top];
            self.derivatives_into(z, d);
            let v = match p2 {
                Some(q) => d[p1] * d[q],
                None => d[p1],
            };
            z.powi(ell as i32) * v
        };
        let range = self.truncation_radius(&integrand);
        quad::composite(integrand, -range, range, panels)
    }

    fn truncation_radius(&self, f: &impl Fn(f64) -> f64) -> f64 {
        let mut r: f64 = 8.0;
        // Tail mass beyond r is bounded by the integrand value there times a
        // Mills-ratio factor; for these polynomial-times-Gaussian integrands
        // a window of 4 units covers it generously.
        while (f(r).abs() + f(-r).abs()) * 4.0 > 1e-14 && r < 64.0 {
            r += 2.0;
        }
        r
    }
}
