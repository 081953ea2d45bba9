//! Error taxonomy shared by all pipeline stages.

use thiserror::Error;

/// Errors produced by the analysis pipeline.
///
/// Variants are grouped by the stage that raises them so the CLI can map
/// them onto its exit-code taxonomy (parse / solver / spectrum / agreement).
#[derive(Debug, Error)]
pub enum Error {
    // ---- model construction / evaluation ----
    #[error("unknown built-in model `{0}`")]
    UnknownModel(String),
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: String,
    },
    #[error("model config parse error: {0}")]
    ConfigParse(String),
    #[error("dimension mismatch: expected vectors of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model domain error: {0}")]
    ModelDomain(String),

    // ---- critical-point analysis ----
    #[error(
        "branch tracking ambiguous at k = {k}: two candidates with overlap ratio within {ratio:.3}"
    )]
    BranchTracking { k: f64, ratio: f64 },
    #[error(
        "model is not at a bifurcation point: max Re eigenvalue at k = {k_star} is {max_re:.3e} (recenter mu by this offset)"
    )]
    NotAtBifurcation { k_star: f64, max_re: f64 },
    #[error("(H2) uniqueness violation: multiple near-neutral maxima at k = {0:?}")]
    NonUniqueCriticalWavenumber(Vec<f64>),

    // ---- cGL coefficients ----
    #[error("subcritical bifurcation: Re gamma = {0:.6e} >= 0; downstream analysis refused")]
    Subcritical(f64),
    #[error("degenerate resonance: S_eta singular at eta = {0} (harmonic {0}·k_* is critical)")]
    DegenerateResonance(i64),
    #[error("degenerate amplitude: alpha(kappa) = 0 at the existence-band edge")]
    DegenerateAmplitude,

    // ---- wave solver ----
    #[error("Newton failed to converge for the wave profile (eps = {eps}, kappa = {kappa}): residual {residual:.3e} after {iterations} iterations and continuation fallback")]
    NoWave {
        eps: f64,
        kappa: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("Fourier truncation too small: |U({m})| = {tail:.3e} exceeds 1e-3 |U(1)| = {head:.3e}; increase M")]
    Truncation { m: usize, tail: f64, head: f64 },
    #[error("parameters outside documented range: {0}")]
    OutOfRange(String),

    // ---- Bloch spectrum ----
    #[error("spectral curve tracking ambiguous at sigma = {0}")]
    CurveTracking(f64),
    #[error("remainder spectrum intrudes above -delta: max Re = {max_re:.3e} > {bound:.3e} at sigma = {sigma}")]
    GapViolation { sigma: f64, max_re: f64, bound: f64 },
    #[error("expansion fit ill-conditioned (condition number {0:.3e}); refine the sigma grid")]
    RefineGrid(f64),
    #[error("neither sideband convention matches the measured spectrum: {0}")]
    Disagreement(String),

    // ---- numerics ----
    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
