use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kernel derivative order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("empty data")]
    EmptyData,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {value:e}, \
         error {error:e} after {subdivisions} subdivisions"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error(
        "denominator integral diverges at x = {x} (alpha = {alpha}, h = {h}); \
         use a smaller alpha or a smaller bandwidth"
    )]
    DivergentDenominator { x: f64, alpha: f64, h: f64 },

    #[error("optimal index undefined: c1 = {c1:e} (true density lies in the parametric model)")]
    OptimalIndexUndefined { c1: f64 },

    #[error("bandwidth undefined: roughness {0:e} is not positive")]
    BandwidthUndefined(f64),

    #[error("index selector degenerate ({reason}); falling back to alpha = 2 is recommended")]
    SelectorDegenerate { reason: String },

    #[error("selector stage `{stage}` produced a non-positive bandwidth {value:e}")]
    StageFailure {
        stage: &'static str,
        value: f64,
        trace: Box<crate::selection::PipelineTrace>,
    },

    #[error("unknown density id `{0}`")]
    UnknownDensity(String),

    #[error("evaluation grid too narrow: boundary integrand {0:e} exceeds 1e-8")]
    GridTooNarrow(f64),

    #[error("{failed} of {total} replications failed (limit is 1%)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
