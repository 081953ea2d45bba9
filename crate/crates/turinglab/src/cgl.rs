//! Complex Ginzburg-Landau coefficients, Eckhaus/Benjamin-Feir-Newell bands,
//! normalized forms, and the exact linearized sideband spectrum of the
//! amplitude equation.
//!
//! The amplitude equation near onset is
//! `A_T = a A_XX + b A + c |A|^2 A` with
//! `a = -1/2 d_k^2 lambda(k_*, 0)`, `b = d_mu lambda(k_*, 0)`, and `c = gamma`
//! the Landau constant computed from the multilinear forms and the deflated
//! resolvents `S_eta`.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::model::ModelSpec;
use crate::turing::CriticalData;

/// Calibrated prefactor of the Landau-constant bracket.
///
/// Pinned by the Swift-Hohenberg amplitude oracle: the Newton wave amplitude
/// at band center is `2 eps / sqrt(3)`, which matches `eps * alpha(0)` only
/// for the prefactor 1/4 (the candidate 1/8 is off by sqrt(2)). The
/// calibration is re-derived by the acceptance suite.
pub const GAMMA_PREFACTOR: f64 = 0.25;
/// The rejected candidate prefactor, kept for reporting.
pub const GAMMA_PREFACTOR_ALTERNATIVE: f64 = 0.125;

/// Coefficients of the amplitude equation and everything derived from them.
#[derive(Debug, Clone, Serialize)]
pub struct CGLCoefficients {
    /// Diffusion coefficient `a = -1/2 d_k^2 lambda(k_*, 0)`.
    pub a: C64,
    /// Linear growth coefficient `b = d_mu lambda(k_*, 0)`.
    pub b: C64,
    /// Landau constant `c = gamma`.
    pub c: C64,
    /// The calibration constant actually used in `c`.
    pub gamma_prefactor: f64,
    /// Existence band edge `kappa_E^2 = Re b / Re a`.
    pub kappa_e_sq: f64,
    /// Eckhaus stability band edge `kappa_S^2`.
    pub kappa_s_sq: f64,
    /// Benjamin-Feir-Newell numerator; the stable band is nontrivial iff > 0.
    pub bfn: f64,
}

impl CGLCoefficients {
    /// Squared amplitude `alpha(kappa)^2 = (-Re b + Re a kappa^2) / Re c`.
    pub fn alpha_sq(&self, kappa: f64) -> f64 {
        (-self.b.re + self.a.re * kappa * kappa) / self.c.re
    }

    /// Amplitude `alpha(kappa) >= 0`; errors outside the existence band.
    /// Rounding-level negative `alpha^2` exactly at the band edge clamps to 0.
    pub fn alpha(&self, kappa: f64) -> Result<f64> {
        let a2 = self.alpha_sq(kappa);
        let scale = (self.b.re / self.c.re).abs().max(1.0);
        if a2 < 0.0 && a2 > -1e-12 * scale {
            return Ok(0.0);
        }
        if a2 < 0.0 {
            return Err(Error::OutOfRange(format!(
                "kappa^2 = {} outside the existence band kappa_E^2 = {}",
                kappa * kappa,
                self.kappa_e_sq
            )));
        }
        Ok(a2.sqrt())
    }

    /// Temporal frequency map
    /// `omega(kappa) = Im a kappa^2 - Im b - Im c alpha^2`.
    pub fn omega(&self, kappa: f64) -> f64 {
        self.a.im * kappa * kappa - self.b.im - self.c.im * self.alpha_sq(kappa)
    }
}

/// Deflated resolvent `S_eta = [S(eta k_*, 0) + i eta d_* k_*]^{-1}`,
/// defined for `eta` not in `{-1, +1}`.
pub fn s_eta(model: &ModelSpec, crit: &CriticalData, eta: i64) -> Result<Array2<C64>> {
    if eta == 1 || eta == -1 {
        return Err(Error::ModelDomain(
            "S_eta is undefined at the critical harmonics eta = +-1".into(),
        ));
    }
    let n = model.n;
    let s = model.eval_symbol(eta as f64 * crit.k_star, 0.0);
    let shift = C64::new(0.0, eta as f64 * crit.d_star * crit.k_star);
    let mat = &s + &(Array2::<C64>::eye(n) * shift);
    let inv = linalg::inv(&mat).map_err(|_| Error::DegenerateResonance(eta))?;
    if linalg::fro_norm(&inv) * linalg::fro_norm(&mat) > 1e12 {
        return Err(Error::DegenerateResonance(eta));
    }
    Ok(inv)
}

/// The Landau constant
/// `gamma = prefactor * ell [ 3 C(k_*,k_*,-k_*)(r,r,rbar)
///   - 4 Q(0,k_*)(S_0 Q(k_*,-k_*)(r,rbar), r)
///   - 2 Q(2k_*,-k_*)(S_2 Q(k_*,k_*)(r,r), rbar) ]`
/// with the calibrated prefactor [`GAMMA_PREFACTOR`].
pub fn landau_constant(model: &ModelSpec, crit: &CriticalData) -> Result<C64> {
    landau_constant_with_prefactor(model, crit, GAMMA_PREFACTOR)
}

/// The Landau constant with an explicit bracket prefactor (used by the
/// calibration test to evaluate both candidates).
pub fn landau_constant_with_prefactor(
    model: &ModelSpec,
    crit: &CriticalData,
    prefactor: f64,
) -> Result<C64> {
    let ks = crit.k_star;
    let r = crit.r_array();
    let rb = r.mapv(|z| z.conj());
    let ell = crit.ell_array();
    let mut bracket = Array1::<C64>::zeros(model.n);
    if model.has_cform() {
        let t3 = model.eval_cform(ks, ks, -ks, r.view(), r.view(), rb.view())?;
        bracket = bracket + t3.mapv(|z| z * 3.0);
    }
    if model.has_qform() {
        let s0 = s_eta(model, crit, 0)?;
        let s2 = s_eta(model, crit, 2)?;
        let q0 = model.eval_qform(ks, -ks, r.view(), rb.view())?;
        let t0 = model.eval_qform(0.0, ks, s0.dot(&q0).view(), r.view())?;
        let q2 = model.eval_qform(ks, ks, r.view(), r.view())?;
        let t2 = model.eval_qform(2.0 * ks, -ks, s2.dot(&q2).view(), rb.view())?;
        bracket = bracket - t0.mapv(|z| z * 4.0) - t2.mapv(|z| z * 2.0);
    }
    Ok(C64::new(prefactor, 0.0) * linalg::dot(&ell, &bracket))
}

/// Assemble the full coefficient record from the critical data.
///
/// Requires the supercritical signs `Re a > 0`, `Re b > 0`, `Re c < 0`;
/// a nonnegative `Re c` is a hard error because every downstream wave and
/// stability computation assumes supercriticality.
pub fn cgl_coefficients(model: &ModelSpec, crit: &CriticalData) -> Result<CGLCoefficients> {
    let a = -crit.d2_lambda_dk2 / 2.0;
    let b = crit.d_lambda_dmu;
    if a.re <= 0.0 || b.re <= 0.0 {
        return Err(Error::ModelDomain(format!(
            "supercritical analysis requires Re a > 0 and Re b > 0 (got a = {a}, b = {b})"
        )));
    }
    let c = landau_constant(model, crit)?;
    if c.re >= 0.0 {
        return Err(Error::Subcritical(c.re));
    }
    Ok(coefficients_from_abc(a, b, c))
}

/// Derive the bands from raw `(a, b, c)` (used for synthetic coefficient
/// suites as well as by [`cgl_coefficients`]).
pub fn coefficients_from_abc(a: C64, b: C64, c: C64) -> CGLCoefficients {
    let kappa_e_sq = b.re / a.re;
    let bfn = a.im * c.im * b.re * c.re + a.re * b.re * c.re * c.re;
    let denom = a.re * (2.0 * c.im * c.im * a.re + a.im * c.im * c.re + 3.0 * a.re * c.re * c.re);
    let kappa_s_sq = bfn / denom;
    CGLCoefficients {
        a,
        b,
        c,
        gamma_prefactor: GAMMA_PREFACTOR,
        kappa_e_sq,
        kappa_s_sq,
        bfn,
    }
}

/// Normalized-form data from Remark-style rescaling `a -> 1 + i alpha~`,
/// `b -> 1`, `c -> -1 - i beta~`.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizedBands {
    /// `alpha~ = Im a / Re a`.
    pub alpha_tilde: f64,
    /// `beta~ = Im c / Re c`.
    pub beta_tilde: f64,
    /// Normalized existence band (identically 1).
    pub kappa_e_sq_norm: f64,
    /// Normalized stable band
    /// `(1 + alpha~ beta~) / (3 + alpha~ beta~ + 2 beta~^2)`.
    pub kappa_s_sq_norm: f64,
}

/// Normalize the coefficients; the round trip
/// `kappa_s_sq_norm * kappa_e_sq == kappa_s_sq` holds to 1e-10 relative.
pub fn normalize(cgl: &CGLCoefficients) -> Result<NormalizedBands> {
    if cgl.a.re <= 0.0 || cgl.b.re <= 0.0 || cgl.c.re >= 0.0 {
        return Err(Error::ModelDomain(
            "normalization requires Re a > 0, Re b > 0, Re c < 0".into(),
        ));
    }
    let alpha_tilde = cgl.a.im / cgl.a.re;
    let beta_tilde = cgl.c.im / cgl.c.re;
    let kappa_s_sq_norm =
        (1.0 + alpha_tilde * beta_tilde) / (3.0 + alpha_tilde * beta_tilde + 2.0 * beta_tilde * beta_tilde);
    Ok(NormalizedBands {
        alpha_tilde,
        beta_tilde,
        kappa_e_sq_norm: 1.0,
        kappa_s_sq_norm,
    })
}

/// The 2x2 sideband matrix of the linearized amplitude equation at Bloch
/// frequency `sigma` about the `kappa`-wave:
/// `-sigma^2 [[a]] + i sigma [[2 i kappa a]] + [[2 alpha^2 Re c, 0], [2 alpha^2 Im c, 0]]`
/// acting on `(Re B, Im B)`. The sigma-linear term carries the explicit
/// factor i, so the assembled matrix is complex.
pub fn cgl_sideband_matrix(cgl: &CGLCoefficients, kappa: f64, sigma: f64) -> Result<Array2<C64>> {
    if kappa * kappa >= cgl.kappa_e_sq {
        return Err(Error::OutOfRange(format!(
            "kappa^2 = {} is outside the existence band {}",
            kappa * kappa,
            cgl.kappa_e_sq
        )));
    }
    let a2 = cgl.alpha_sq(kappa);
    let diff = linalg::realify(cgl.a);
    let drift = linalg::realify(C64::new(0.0, 2.0 * kappa) * cgl.a);
    let mut m = Array2::<C64>::zeros((2, 2));
    for i in 0..2 {
        for j in 0..2 {
            m[[i, j]] = C64::new(-sigma * sigma * diff[[i, j]], sigma * drift[[i, j]]);
        }
    }
    m[[0, 0]] += C64::new(2.0 * a2 * cgl.c.re, 0.0);
    m[[1, 0]] += C64::new(2.0 * a2 * cgl.c.im, 0.0);
    Ok(m)
}

/// Eigenvalues `(lambda_1, lambda_2)` of the sideband matrix, with `lambda_2`
/// the branch continuous with 0 at `sigma = 0` (matched by eigenvector
/// overlap with the translation mode `(0, 1)`).
pub fn cgl_sideband_eigenvalues(
    cgl: &CGLCoefficients,
    kappa: f64,
    sigma: f64,
) -> Result<(C64, C64)> {
    let m = cgl_sideband_matrix(cgl, kappa, sigma)?;
    let (l1, l2) = linalg::eig2(&m);
    // translation-mode component of the eigenvector (m01, lambda - m00):
    // overlap with (0,1) is |lambda - m00| / |v|
    let score = |lam: C64| {
        let v0 = m[[0, 1]];
        let v1 = lam - m[[0, 0]];
        let nrm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        if nrm == 0.0 {
            0.0
        } else {
            v1.norm() / nrm
        }
    };
    if score(l2) >= score(l1) {
        Ok((l1, l2))
    } else {
        Ok((l2, l1))
    }
}

/// Taylor coefficients of the two sideband eigenvalue branches about
/// `sigma = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct SidebandSeries {
    /// `lambda_1(0) = 2 alpha^2 Re c`.
    pub lambda1_at_0: f64,
    /// sigma-linear coefficient of `lambda_2`:
    /// `-2 i kappa (Im a - Im c Re a / Re c)`.
    pub c1: C64,
    /// sigma^2 coefficient of `lambda_2` (real):
    /// `-(2 kappa^2 Im c^2 Re a^2 + alpha^2 Im a Im c Re c^2
    ///    + Re a Re c^2 (2 kappa^2 Re a + alpha^2 Re c)) / (alpha^2 Re c^3)`.
    pub c2: f64,
}

/// Series coefficients of the sideband branches. Errors at the band edge
/// where `alpha = 0` (the quadratic coefficient divides by `alpha^2`).
pub fn cgl_sideband_series(cgl: &CGLCoefficients, kappa: f64) -> Result<SidebandSeries> {
    let a2 = cgl.alpha_sq(kappa);
    if a2 <= 0.0 {
        return Err(Error::DegenerateAmplitude);
    }
    let (ra, ia) = (cgl.a.re, cgl.a.im);
    let (rc, ic) = (cgl.c.re, cgl.c.im);
    let k2 = kappa * kappa;
    let c1 = C64::new(0.0, -2.0 * kappa * (ia - ic * ra / rc));
    let c2 = -(2.0 * k2 * ic * ic * ra * ra
        + a2 * ia * ic * rc * rc
        + ra * rc * rc * (2.0 * k2 * ra + a2 * rc))
        / (a2 * rc * rc * rc);
    Ok(SidebandSeries {
        lambda1_at_0: 2.0 * a2 * rc,
        c1,
        c2,
    })
}
