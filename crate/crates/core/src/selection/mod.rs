//! Data-driven selection of the index `α` and of the final bandwidth.
//!
//! * [`alpha_hat_1`]: direct method, Hermite pilot plus kernel estimates of
//!   the bias functions. Suited to kurtotic densities.
//! * [`pipeline`]: plug-in estimates of the functional ratio `N/D`, giving
//!   `α̂^{[2]}` (one AMSRE bandwidth) and `α̂^{[3]}` (separate AMSE
//!   bandwidths). Suited to smoother densities.

pub mod direct;
pub mod functional;
pub mod hermite;
pub mod pipeline;

pub use direct::{alpha_hat_1, b1_hat, b2_hat, c_hats, h_final, h_final_from, DirectSelection, FinalBandwidth};
pub use functional::{
    beta_amse, l_brackets, lambda_kappa_sq, psi_hat, BetaSource, FunctionalEstimate,
    FunctionalTable, LBrackets,
};
pub use hermite::{c_bar, psi_tilde, HermiteMoments, HermitePilot};
pub use pipeline::{pipeline, PipelineTrace, Stage, MIN_PIPELINE_N};

use crate::error::{Error, Result};
use crate::start::GaussianStart;

/// Index used when a selector degenerates.
pub const FALLBACK_ALPHA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Direct,
    Amsre,
    SplitAmse,
}

impl Selector {
    pub fn from_index(k: u8) -> Option<Self> {
        match k {
            1 => Some(Self::Direct),
            2 => Some(Self::Amsre),
            3 => Some(Self::SplitAmse),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Direct => 1,
            Self::Amsre => 2,
            Self::SplitAmse => 3,
        }
    }
}

/// Selected index and whatever the selector recorded on the way.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    Direct(DirectSelection),
    Pipeline(Box<PipelineTrace>),
}

pub fn select_alpha(data: &[f64], start: &GaussianStart, selector: Selector) -> Result<(f64, Selection)> {
    match selector {
        Selector::Direct => {
            let s = direct::alpha_hat_1_with(data, start)?;
            Ok((s.alpha, Selection::Direct(s)))
        }
        Selector::Amsre | Selector::SplitAmse => {
            let t = pipeline(data, start)?;
            let a = if selector == Selector::Amsre { t.alpha_hat_2 } else { t.alpha_hat_3 };
            Ok((a, Selection::Pipeline(Box::new(t))))
        }
    }
}

/// Like [`select_alpha`], but a degenerate selector yields `α = 2`
/// together with the error that caused the fallback.
pub fn select_alpha_or_fallback(
    data: &[f64],
    start: &GaussianStart,
    selector: Selector,
) -> Result<(f64, Option<Selection>, Option<Error>)> {
    match select_alpha(data, start, selector) {
        Ok((a, s)) if a.is_finite() => Ok((a, Some(s), None)),
        Ok((a, _)) => Ok((
            FALLBACK_ALPHA,
            None,
            Some(Error::SelectorDegenerate {
                reason: format!("selected index {a} is not finite"),
            }),
        )),
        Err(e @ (Error::SelectorDegenerate { .. } | Error::StageFailure { .. } | Error::Quadrature { .. })) => {
            Ok((FALLBACK_ALPHA, None, Some(e)))
        }
        Err(e) => Err(e),
    }
}
