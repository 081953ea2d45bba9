//! Numerical laboratory for Turing bifurcations of evolution systems given in
//! spectral standard form.
//!
//! Given a system `u_t = L(mu) u + N(u)` represented by its Fourier symbol
//! `S(k, mu)` and multilinear Fourier forms `Qhat`, `Chat`, this crate
//! computes:
//! - the critical Turing data (critical wavenumber, eigenvalue derivatives,
//!   eigenvectors, frame speeds) and verifies the bifurcation hypotheses;
//! - the complex Ginzburg-Landau coefficients `a`, `b`, `c = gamma`, the
//!   existence and Eckhaus bands, and the exact linearized sideband spectrum
//!   of the amplitude equation;
//! - the bifurcating periodic traveling wave by Fourier-Galerkin Newton
//!   continuation;
//! - the Bloch/Floquet spectrum about that wave, the fitted critical spectral
//!   curves, their comparison against the amplitude-equation prediction, and
//!   the resulting diffusive-stability verdict.

pub mod bloch;
pub mod cgl;
pub mod config;
pub mod error;
pub mod linalg;
pub mod model;
pub mod turing;
pub mod wave;

pub use bloch::{
    assemble_bloch, bloch_sweep, fit_expansion, reduced_prediction, stability_analysis,
    stability_verdict,
    translation_mode, verify_agreement, AgreementReport, BlochMatrix, Convention,
    EpsSigmaConvention, ExpansionFit, ReducedPrediction, SpectralCurves, StabilityVerdict,
    SweepConfig, Verdict,
};
pub use cgl::{
    cgl_coefficients, cgl_sideband_eigenvalues, cgl_sideband_matrix, cgl_sideband_series,
    coefficients_from_abc, landau_constant, landau_constant_with_prefactor, normalize, s_eta,
    CGLCoefficients, NormalizedBands, SidebandSeries, GAMMA_PREFACTOR,
    GAMMA_PREFACTOR_ALTERNATIVE,
};
pub use config::ModelConfig;
pub use error::{Error, Result};
pub use linalg::C64;
pub use model::{builtin, builtin_with_kernel, ModelSpec, PhiHatTable, Symmetry, BUILTIN_NAMES};
pub use turing::{
    critical_branch, critical_data_at, default_k_grid, find_turing_point,
    spectral_identity_check, verify_hypotheses, CriticalData, HypothesisReport,
};
pub use wave::{
    second_order_modes, solve_wave, SecondOrderModes, WaveProfile, DEFAULT_MODES, DEFAULT_TOL,
};
