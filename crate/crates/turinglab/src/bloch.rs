//! Bloch/Floquet spectrum about a computed periodic wave: operator assembly,
//! sigma sweeps with curve tracking, expansion fits, the amplitude-equation
//! prediction, agreement checks, and the diffusive-stability verdict.
//!
//! The Bloch operator at Floquet exponent `sigma` acts on the Fourier modes
//! of a co-periodic perturbation; its diagonal blocks are
//! `S(k(eta + sigma), mu)` plus frame terms and its off-diagonal blocks come
//! from linearizing the nonlinearity about the wave profile. Its spectrum
//! over `|sigma| <= 1/2` is the whole-line spectrum of the linearized
//! operator; diffusive stability requires `Re lambda <= -theta sigma^2` on
//! the two critical curves and a fixed gap `-delta` for the rest.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::cgl::CGLCoefficients;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::model::ModelSpec;
use crate::turing::CriticalData;
use crate::wave::WaveProfile;

/// Frame convention for the `i sigma` scalar shift on the Bloch diagonal.
///
/// Both give identical real parts (they differ by an imaginary scalar), so
/// stability verdicts are convention-independent; the imaginary part of the
/// fitted linear coefficient differs by an exact computable shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Convention {
    /// Shift `i sigma k (d_* + k_* d_eps-slope)`: removes the extraneous
    /// first-order drift so the fitted `Im c1` is `O(eps)`.
    Modified,
    /// Shift `-i sigma Omega` (the plain co-moving-frame operator).
    Standard,
}

/// Which coefficient multiplies the `eps sigma` drift term of the reduced
/// 2x2 prediction matrix. The two candidates differ by sign and a factor 2;
/// the agreement report records which one matches measured spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EpsSigmaConvention {
    /// Drift term `-i eps sigma [[i kappa k_* lambda_kk]]` (matches measured
    /// spectra; the default).
    Halved,
    /// Drift term `+i eps sigma [[2 i kappa k_* lambda_kk]]`.
    Doubled,
}

/// Assembled Bloch operator at one Floquet exponent.
#[derive(Debug, Clone)]
pub struct BlochMatrix {
    /// Dense complex matrix of size `n (2M+1)`, mode blocks ordered
    /// `eta = -M..=M`.
    pub matrix: Array2<C64>,
    pub eps: f64,
    pub kappa: f64,
    pub sigma: f64,
    pub convention: Convention,
    /// Truncation order (matches the profile).
    pub m: usize,
    /// System dimension per block.
    pub n: usize,
}

/// The scalar frame shift multiplying `i sigma` on the diagonal.
fn frame_shift(crit: &CriticalData, profile: &WaveProfile, convention: Convention) -> f64 {
    match convention {
        // k (d_* + k_* * d_eps-slope); the slope form is kappa = 0 safe
        Convention::Modified => {
            profile.k * (crit.d_star + crit.k_star * crit.d_eps_slope)
        }
        Convention::Standard => -profile.omega,
    }
}

/// Assemble the Bloch operator about `profile` at Floquet exponent `sigma`.
pub fn assemble_bloch(
    model: &ModelSpec,
    crit: &CriticalData,
    profile: &WaveProfile,
    sigma: f64,
    convention: Convention,
) -> Result<BlochMatrix> {
    if sigma.abs() > 0.5 {
        return Err(Error::OutOfRange(format!(
            "|sigma| = {} > 1/2 (use the fundamental Floquet cell)",
            sigma.abs()
        )));
    }
    let n = model.n;
    let m = profile.m;
    let mi = m as i64;
    let k = profile.k;
    let mu = profile.mu;
    let nn = n * (2 * m + 1);
    let shift = frame_shift(crit, profile, convention);

    // full mode table U(d) for d in [-M, M]
    let modes: Vec<Array1<C64>> = (-mi..=mi).map(|d| profile.mode(d)).collect();
    let basis: Vec<Array1<C64>> = (0..n)
        .map(|j| {
            let mut b = Array1::<C64>::zeros(n);
            b[j] = C64::new(1.0, 0.0);
            b
        })
        .collect();

    let mut b = Array2::<C64>::zeros((nn, nn));
    for (bi, e) in (-mi..=mi).enumerate() {
        let row0 = n * bi;
        // diagonal block: S(k(e + sigma), mu) + (-i e Omega + i sigma shift) I
        let s = model.eval_symbol(k * (e as f64 + sigma), mu);
        let diag = C64::new(0.0, -(e as f64) * profile.omega + sigma * shift);
        for i in 0..n {
            for j in 0..n {
                b[[row0 + i, row0 + j]] = s[[i, j]];
            }
            b[[row0 + i, row0 + i]] += diag;
        }
        // linearized nonlinearity blocks
        for (bj, ep) in (-mi..=mi).enumerate() {
            let d = e - ep;
            if d < -mi || d > mi {
                continue;
            }
            let col0 = n * bj;
            let k_pert = k * (ep as f64 + sigma);
            if model.has_qform() {
                let ud = &modes[(d + mi) as usize];
                for (j, bv) in basis.iter().enumerate() {
                    let q = model.eval_qform(k * d as f64, k_pert, ud.view(), bv.view())?;
                    for i in 0..n {
                        b[[row0 + i, col0 + j]] += 2.0 * q[i];
                    }
                }
            }
            if model.has_cform() {
                for e1 in (d - mi).max(-mi)..=(d + mi).min(mi) {
                    let e2 = d - e1;
                    let u1 = &modes[(e1 + mi) as usize];
                    let u2 = &modes[(e2 + mi) as usize];
                    for (j, bv) in basis.iter().enumerate() {
                        let c = model.eval_cform(
                            k * e1 as f64,
                            k * e2 as f64,
                            k_pert,
                            u1.view(),
                            u2.view(),
                            bv.view(),
                        )?;
                        for i in 0..n {
                            b[[row0 + i, col0 + j]] += 3.0 * c[i];
                        }
                    }
                }
            }
        }
    }
    Ok(BlochMatrix {
        matrix: b,
        eps: profile.eps,
        kappa: profile.kappa,
        sigma,
        convention,
        m,
        n,
    })
}

/// The translation mode `d/dxi U`, whose Fourier blocks are `i eta U(eta)`;
/// it spans the kernel of the `sigma = 0` Bloch operator.
pub fn translation_mode(profile: &WaveProfile) -> Array1<C64> {
    let n = profile.modes[0].len();
    let mi = profile.m as i64;
    let mut t = Array1::<C64>::zeros(n * (2 * profile.m + 1));
    for (bi, e) in (-mi..=mi).enumerate() {
        let u = profile.mode(e);
        for i in 0..n {
            t[n * bi + i] = C64::new(0.0, e as f64) * u[i];
        }
    }
    let nrm = linalg::norm(&t);
    if nrm > 0.0 {
        t.mapv_inplace(|z| z / nrm);
    }
    t
}

/// Least-squares fit of the translation curve's small-sigma expansion.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionFit {
    /// sigma-linear coefficient of `lambda_2` (purely imaginary in theory).
    pub c1: C64,
    /// sigma^2 coefficient of `lambda_2`.
    pub c2: C64,
    /// sigma^3 nuisance coefficient absorbing the expansion remainder.
    pub c3: C64,
    /// `lambda_1(0)`.
    pub c0_1: C64,
    /// Root-mean-square fit residual over the fit window.
    pub residual: f64,
    /// True when `|Re c1|` exceeds 10x the fit residual — a violation of the
    /// no-real-linear-part property worth surfacing.
    pub re_c1_flagged: bool,
    /// Number of grid points used.
    pub points: usize,
}

/// Tracked critical spectral curves over a sigma grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralCurves {
    /// Sorted sigma grid.
    pub sigmas: Vec<f64>,
    /// Non-translation critical curve (`lambda_1(0) = 2 eps^2 alpha^2 Re gamma`).
    pub lambda1: Vec<C64>,
    /// Translation curve (`lambda_2(0) = 0`).
    pub lambda2: Vec<C64>,
    /// Max real part of the non-critical remainder spectrum per sigma.
    pub remainder_max_re: Vec<f64>,
    /// Verified remainder gap: remainder spectrum stays below `-delta`.
    pub delta: f64,
    pub convention: Convention,
    /// Filled in by `fit_expansion`.
    pub fit: Option<ExpansionFit>,
}

impl SpectralCurves {
    /// Value of a tracked curve at sigma = 0.
    pub fn at_zero(&self) -> Result<(C64, C64)> {
        let idx = self
            .sigmas
            .iter()
            .position(|&s| s == 0.0)
            .ok_or_else(|| Error::OutOfRange("grid does not contain sigma = 0".into()))?;
        Ok((self.lambda1[idx], self.lambda2[idx]))
    }
}

/// Sweep the Bloch spectrum over a symmetric sigma grid, tracking the two
/// critical curves by eigenvector overlap outward from `sigma = 0`.
///
/// The remainder spectrum must stay below `-delta` with
/// `delta = spectral_gap / 2`; an intrusion is a hard error because it
/// invalidates the two-curve decomposition.
pub fn bloch_sweep(
    model: &ModelSpec,
    crit: &CriticalData,
    profile: &WaveProfile,
    sigmas: &[f64],
    convention: Convention,
) -> Result<SpectralCurves> {
    let mut grid: Vec<f64> = sigmas.to_vec();
    if !grid.iter().any(|&s| s == 0.0) {
        grid.push(0.0);
    }
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    if grid.iter().any(|s| s.abs() > 0.5) {
        return Err(Error::OutOfRange("sigma grid exceeds |sigma| = 1/2".into()));
    }
    let delta = crit.spectral_gap / 2.0;

    let solve_at = |sigma: f64| -> Result<(Array1<C64>, Array2<C64>)> {
        let b = assemble_bloch(model, crit, profile, sigma, convention)?;
        let (w, v) = linalg::eig(&b.matrix)?;
        Ok((w, v))
    };

    // sigma = 0: identify the translation curve among the two largest-Re
    // eigenvalues by overlap with d/dxi U
    let (w0, v0) = solve_at(0.0)?;
    let mut order: Vec<usize> = (0..w0.len()).collect();
    order.sort_by(|&i, &j| w0[j].re.total_cmp(&w0[i].re));
    let (cand_a, cand_b) = (order[0], order[1]);
    let tvec = translation_mode(profile);
    let ov = |j: usize| linalg::overlap(&tvec, &v0.column(j).to_owned());
    let (j2, j1) = if ov(cand_a) >= ov(cand_b) {
        (cand_a, cand_b)
    } else {
        (cand_b, cand_a)
    };

    let npts = grid.len();
    let mut lambda1 = vec![C64::new(0.0, 0.0); npts];
    let mut lambda2 = vec![C64::new(0.0, 0.0); npts];
    let mut remainder = vec![0.0f64; npts];
    let zero_idx = grid.iter().position(|&s| s == 0.0).unwrap();

    let record = |idx_l1: usize,
                  idx_l2: usize,
                  w: &Array1<C64>,
                  pos: usize,
                  lambda1: &mut Vec<C64>,
                  lambda2: &mut Vec<C64>,
                  remainder: &mut Vec<f64>|
     -> Result<()> {
        lambda1[pos] = w[idx_l1];
        lambda2[pos] = w[idx_l2];
        let rem = w
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx_l1 && *i != idx_l2)
            .map(|(_, z)| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        remainder[pos] = rem;
        if rem > -delta {
            return Err(Error::GapViolation {
                sigma: grid[pos],
                max_re: rem,
                bound: -delta,
            });
        }
        Ok(())
    };
    record(j1, j2, &w0, zero_idx, &mut lambda1, &mut lambda2, &mut remainder)?;

    for dir in [1i64, -1i64] {
        let mut v1 = v0.column(j1).to_owned();
        let mut v2 = v0.column(j2).to_owned();
        let positions: Vec<usize> = if dir > 0 {
            (zero_idx + 1..npts).collect()
        } else {
            (0..zero_idx).rev().collect()
        };
        for pos in positions {
            let sigma = grid[pos];
            let (w, v) = solve_at(sigma)?;
            let (a1, r1) = linalg::match_by_overlap(&v, &v1)?;
            let (a2, r2) = linalg::match_by_overlap(&v, &v2)?;
            if a1 == a2 || r1 > 1.0 - 1e-9 || r2 > 1.0 - 1e-9 {
                return Err(Error::CurveTracking(sigma));
            }
            record(a1, a2, &w, pos, &mut lambda1, &mut lambda2, &mut remainder)?;
            v1 = v.column(a1).to_owned();
            v2 = v.column(a2).to_owned();
        }
    }

    Ok(SpectralCurves {
        sigmas: grid,
        lambda1,
        lambda2,
        remainder_max_re: remainder,
        delta,
        convention,
        fit: None,
    })
}

/// Fit `lambda_2(sigma) ~ c1 sigma + c2 sigma^2 + c3 sigma^3` on the
/// small-sigma window `eps^2/10 <= |sigma| <= eps/10`.
///
/// On a symmetric grid the plain cubic least squares is identical to fitting
/// the conjugation-symmetric odd part with `c1 sigma + c3 sigma^3` and the
/// even part with `c2 sigma^2`, because the cross-parity normal-equation
/// terms cancel. The window stays inside region 1 (`|sigma/eps| <= 1/10`);
/// wider windows leak the O(sigma^4) curvature into c2.
pub fn fit_expansion(curves: &SpectralCurves, eps: f64) -> Result<ExpansionFit> {
    let lo = eps * eps / 10.0 * (1.0 - 1e-9);
    let hi = eps / 10.0 * (1.0 + 1e-9);
    let mut pts: Vec<(f64, C64)> = curves
        .sigmas
        .iter()
        .zip(curves.lambda2.iter())
        .filter(|(s, _)| s.abs() >= lo && s.abs() <= hi)
        .map(|(&s, &l)| (s, l))
        .collect();
    if pts.len() < 7 {
        // fall back to everything inside |sigma| <= eps/2
        pts = curves
            .sigmas
            .iter()
            .zip(curves.lambda2.iter())
            .filter(|(s, _)| **s != 0.0 && s.abs() <= eps / 2.0)
            .map(|(&s, &l)| (s, l))
            .collect();
    }
    if pts.len() < 7 {
        return Err(Error::RefineGrid(eps / 2.0));
    }

    // column-scaled cubic Vandermonde normal equations
    let smax = pts.iter().map(|(s, _)| s.abs()).fold(0.0, f64::max);
    let mut gram = Array2::<f64>::zeros((3, 3));
    let mut rhs_re = Array1::<f64>::zeros(3);
    let mut rhs_im = Array1::<f64>::zeros(3);
    let col = |s: f64| [s / smax, (s / smax).powi(2), (s / smax).powi(3)];
    for (s, l) in &pts {
        let c = col(*s);
        for i in 0..3 {
            for j in 0..3 {
                gram[[i, j]] += c[i] * c[j];
            }
            rhs_re[i] += c[i] * l.re;
            rhs_im[i] += c[i] * l.im;
        }
    }
    // conditioning of the scaled design
    let gc = gram.mapv(|x| C64::new(x, 0.0));
    let ev = linalg::eigvals(&gc)?;
    let emax = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let emin = ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if emin <= 0.0 || (emax / emin).sqrt() > 1e8 {
        return Err(Error::RefineGrid(smax));
    }
    let sol_re = linalg::solve_real(&gram, &rhs_re)?;
    let sol_im = linalg::solve_real(&gram, &rhs_im)?;
    let coef = |i: usize| C64::new(sol_re[i], sol_im[i]) / smax.powi(i as i32 + 1);
    let (c1, c2, c3) = (coef(0), coef(1), coef(2));

    let mut ss = 0.0;
    for (s, l) in &pts {
        let pred = c1 * *s + c2 * (s * s) + c3 * (s * s * s);
        ss += (l - pred).norm_sqr();
    }
    let residual = (ss / pts.len() as f64).sqrt();
    let (c0_1, _) = curves.at_zero()?;
    Ok(ExpansionFit {
        c1,
        c2,
        c3,
        c0_1,
        residual,
        re_c1_flagged: c1.re.abs() > 10.0 * residual,
        points: pts.len(),
    })
}

/// Amplitude-equation prediction for the critical Bloch curves: the reduced
/// 2x2 matrix, its eigencurve through 0, and the closed-form expansion
/// coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedPrediction {
    /// The assembled 2x2 matrix at (`eps`, `kappa`, `sigma`), complex because
    /// of the `i sigma` drift term.
    #[serde(skip)]
    pub matrix: Array2<C64>,
    /// Eigenvalue of `matrix` continuing from 0 at `sigma = 0`.
    pub lambda: C64,
    /// Predicted `lambda_1(0) = 2 eps^2 alpha^2 gamma`.
    pub lambda1_pred: C64,
    /// Closed-form linear coefficient under the halved drift convention.
    pub c1_halved: C64,
    /// Closed-form linear coefficient under the doubled drift convention.
    pub c1_doubled: C64,
    /// Closed-form quadratic coefficient (drift-convention independent to
    /// leading order through the second-order perturbation term).
    pub c2: f64,
    /// Which drift convention `matrix` and `lambda` use.
    pub eps_sigma: EpsSigmaConvention,
    pub eps: f64,
    pub kappa: f64,
    pub sigma: f64,
}

/// Build the reduced prediction at one `sigma`.
///
/// The matrix is `M0 + sigma A1 + sigma^2 A2` with
/// `M0 = 2 eps^2 alpha^2 [[Re gamma, 0], [Im gamma, 0]]`,
/// `A2 = [[1/2 k_*^2 lambda_kk]]` (realified), and the drift
/// `A1 = -i eps [[i kappa k_* lambda_kk]]` (halved) or
/// `A1 = +i eps [[2 i kappa k_* lambda_kk]]` (doubled).
/// `C1 = L A1 R` and `C2 = L A2 R - L A1 (R_perp L_perp / lambda_perp) A1 R`
/// come from second-order eigenvalue perturbation about the 0 eigenvalue of
/// `M0` with `R = (0,1)`, `L = (-Im gamma / Re gamma, 1)`.
pub fn reduced_prediction(
    cgl: &CGLCoefficients,
    crit: &CriticalData,
    eps: f64,
    kappa: f64,
    sigma: f64,
    eps_sigma: EpsSigmaConvention,
) -> Result<ReducedPrediction> {
    if eps <= 0.0 || kappa * kappa >= cgl.kappa_e_sq {
        return Err(Error::OutOfRange(
            "reduced prediction needs eps > 0 and kappa inside the existence band".into(),
        ));
    }
    let gamma = cgl.c;
    let alpha2 = cgl.alpha_sq(kappa);
    let ks = crit.k_star;
    let lkk = crit.d2_lambda_dk2;

    let m0 = ndarray::array![
        [C64::new(2.0 * eps * eps * alpha2 * gamma.re, 0.0), C64::new(0.0, 0.0)],
        [C64::new(2.0 * eps * eps * alpha2 * gamma.im, 0.0), C64::new(0.0, 0.0)]
    ];
    let a2m = linalg::realify(lkk * (0.5 * ks * ks)).mapv(|x| C64::new(x, 0.0));
    let drift = |z: C64, pre: C64| -> Array2<C64> {
        linalg::realify(z).mapv(|x| pre * x)
    };
    let a1 = match eps_sigma {
        EpsSigmaConvention::Halved => drift(
            C64::new(0.0, kappa * ks) * lkk,
            C64::new(0.0, -eps),
        ),
        EpsSigmaConvention::Doubled => drift(
            C64::new(0.0, 2.0 * kappa * ks) * lkk,
            C64::new(0.0, eps),
        ),
    };
    let a1_of = |conv: EpsSigmaConvention| match conv {
        EpsSigmaConvention::Halved => drift(
            C64::new(0.0, kappa * ks) * lkk,
            C64::new(0.0, -eps),
        ),
        EpsSigmaConvention::Doubled => drift(
            C64::new(0.0, 2.0 * kappa * ks) * lkk,
            C64::new(0.0, eps),
        ),
    };

    // perturbation about the 0 eigenvalue of M0
    let lam_perp = 2.0 * eps * eps * alpha2 * gamma.re;
    let ratio = gamma.im / gamma.re;
    let l = ndarray::array![C64::new(-ratio, 0.0), C64::new(1.0, 0.0)];
    let r = ndarray::array![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let r_perp = ndarray::array![C64::new(1.0, 0.0), C64::new(ratio, 0.0)];
    let l_perp = ndarray::array![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let series = |a1m: &Array2<C64>| -> (C64, C64) {
        let a1r = a1m.dot(&r);
        let c1 = linalg::dot(&l, &a1r);
        let la1 = ndarray::array![
            l[0] * a1m[[0, 0]] + l[1] * a1m[[1, 0]],
            l[0] * a1m[[0, 1]] + l[1] * a1m[[1, 1]]
        ];
        let second = linalg::dot(&la1, &r_perp) * linalg::dot(&l_perp, &a1r)
            / C64::new(lam_perp, 0.0);
        let c2 = linalg::dot(&l, &a2m.dot(&r)) - second;
        (c1, c2)
    };
    let (c1_halved, _) = series(&a1_of(EpsSigmaConvention::Halved));
    let (c1_doubled, _) = series(&a1_of(EpsSigmaConvention::Doubled));
    let (_, c2_sel) = series(&a1);

    let mut m = m0;
    for i in 0..2 {
        for j in 0..2 {
            m[[i, j]] += a1[[i, j]] * sigma + a2m[[i, j]] * (sigma * sigma);
        }
    }
    // eigencurve through 0: the eigenvalue closer to the series prediction
    let (e1, e2) = linalg::eig2(&m);
    let approx = match eps_sigma {
        EpsSigmaConvention::Halved => c1_halved,
        EpsSigmaConvention::Doubled => c1_doubled,
    } * sigma
        + c2_sel * (sigma * sigma);
    let lambda = if (e1 - approx).norm() <= (e2 - approx).norm() {
        e1
    } else {
        e2
    };

    Ok(ReducedPrediction {
        matrix: m,
        lambda,
        lambda1_pred: gamma * (2.0 * eps * eps * alpha2),
        c1_halved,
        c1_doubled,
        c2: c2_sel.re,
        eps_sigma,
        eps,
        kappa,
        sigma,
    })
}

/// Comparison between a fitted Bloch sweep and the amplitude-equation
/// prediction.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    /// `|lambda_1(0) - 2 eps^2 alpha^2 Re gamma| / eps^2`.
    pub err_lambda1: f64,
    /// `|Im c1 - Im C1| / max(|C1|, eps^2)` for the halved drift convention.
    pub err_im_c1_halved: f64,
    /// Same for the doubled drift convention.
    pub err_im_c1_doubled: f64,
    /// `|Re c2 - Re C2| / max(|C2|, eps^2)`.
    pub err_re_c2: f64,
    /// Drift convention that matches the measured `Im c1`.
    pub matched: EpsSigmaConvention,
    /// Scale used to normalize the c1 errors.
    pub c1_scale: f64,
}

/// Tolerance factor: if neither drift convention matches the measured
/// `Im c1` within this relative error, the prediction pipeline is broken
/// and a hard disagreement error is raised.
const DISAGREEMENT_BUDGET: f64 = 0.9;

/// Compare a fitted sweep against the reduced prediction (which carries both
/// drift-convention closed forms) and adjudicate the convention.
pub fn verify_agreement(
    curves: &SpectralCurves,
    prediction: &ReducedPrediction,
    eps: f64,
) -> Result<AgreementReport> {
    let fit = curves
        .fit
        .as_ref()
        .ok_or_else(|| Error::Disagreement("sweep has no expansion fit".into()))?;
    let err_lambda1 =
        (fit.c0_1 - prediction.lambda1_pred).norm() / (eps * eps);
    let c1_scale = prediction
        .c1_halved
        .norm()
        .max(prediction.c1_doubled.norm())
        .max(eps * eps);
    let err_h = (fit.c1.im - prediction.c1_halved.im).abs() / c1_scale;
    let err_d = (fit.c1.im - prediction.c1_doubled.im).abs() / c1_scale;
    let c2_scale = prediction.c2.abs().max(eps * eps);
    let err_re_c2 = (fit.c2.re - prediction.c2).abs() / c2_scale;
    let matched = if err_h <= err_d {
        EpsSigmaConvention::Halved
    } else {
        EpsSigmaConvention::Doubled
    };
    if err_h.min(err_d) > DISAGREEMENT_BUDGET {
        return Err(Error::Disagreement(format!(
            "measured Im c1 = {} matches neither drift convention (halved {} err {err_h:.3}, doubled {} err {err_d:.3})",
            fit.c1.im, prediction.c1_halved.im, prediction.c1_doubled.im
        )));
    }
    Ok(AgreementReport {
        err_lambda1,
        err_im_c1_halved: err_h,
        err_im_c1_doubled: err_d,
        err_re_c2,
        matched,
        c1_scale,
    })
}

/// Sweep configuration for the stability verdict.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub convention: Convention,
    /// Region constant `C`: region 1 is `|sigma/eps| <= 1/C`, region 2 up to
    /// `C`, region 3 beyond.
    pub region_c: f64,
    /// Geometric points in region 1 (per sign).
    pub n1: usize,
    /// Linear points in region 2 (per sign).
    pub n2: usize,
    /// Linear points in region 3 (per sign).
    pub n3: usize,
    /// Outer sweep limit (at most 1/2).
    pub sigma_max: f64,
    /// Relative dead band around `kappa_S` inside which the verdict is
    /// inconclusive.
    pub dead_band: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            convention: Convention::Modified,
            region_c: 10.0,
            n1: 41,
            n2: 41,
            n3: 21,
            sigma_max: 0.5,
            dead_band: 0.05,
        }
    }
}

impl SweepConfig {
    /// The three-region sigma grid (symmetric, includes 0).
    pub fn grid(&self, eps: f64) -> Vec<f64> {
        let mut pos: Vec<f64> = Vec::new();
        let r1_lo = eps * eps / self.region_c;
        let r1_hi = eps / self.region_c;
        for i in 0..self.n1 {
            let t = i as f64 / (self.n1 - 1) as f64;
            pos.push(r1_lo * (r1_hi / r1_lo).powf(t));
        }
        let r2_hi = (eps * self.region_c).min(self.sigma_max);
        for i in 1..self.n2 {
            let t = i as f64 / (self.n2 - 1) as f64;
            pos.push(r1_hi + (r2_hi - r1_hi) * t);
        }
        if r2_hi < self.sigma_max {
            for i in 1..self.n3 {
                let t = i as f64 / (self.n3 - 1) as f64;
                pos.push(r2_hi + (self.sigma_max - r2_hi) * t);
            }
        }
        let mut grid: Vec<f64> = pos.iter().map(|&s| -s).collect();
        grid.push(0.0);
        grid.extend(pos);
        grid.sort_by(|a, b| a.total_cmp(b));
        grid.dedup();
        grid
    }
}

/// Diffusive-stability verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    DiffusivelyStable,
    Unstable,
    Inconclusive,
}

/// Result of the three-region stability analysis.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    /// Largest `theta >= 0` with `Re lambda <= -theta sigma^2` over the swept
    /// band (0 when unstable).
    pub theta: f64,
    /// Remainder-spectrum gap that was enforced.
    pub delta: f64,
    /// A sigma where some eigenvalue has positive real part, if any.
    pub witness_sigma: Option<f64>,
    /// Fitted small-sigma quadratic coefficient (region 1 diagnostic).
    pub re_c2: f64,
    /// Region diagnostics: small-sigma curvature, mid-band sign, outer decay.
    pub region1_ok: bool,
    pub region2_ok: bool,
    pub region3_ok: bool,
}

/// Run the full three-region diffusive-stability analysis about a converged
/// wave profile.
pub fn stability_verdict(
    model: &ModelSpec,
    crit: &CriticalData,
    cgl: &CGLCoefficients,
    profile: &WaveProfile,
    config: &SweepConfig,
) -> Result<StabilityVerdict> {
    Ok(stability_analysis(model, crit, cgl, profile, config)?.0)
}

/// Like [`stability_verdict`] but also returns the swept (and fitted)
/// spectral curves, so callers can serialize them without re-sweeping.
pub fn stability_analysis(
    model: &ModelSpec,
    crit: &CriticalData,
    cgl: &CGLCoefficients,
    profile: &WaveProfile,
    config: &SweepConfig,
) -> Result<(StabilityVerdict, SpectralCurves)> {
    if profile.residual > 1e-6 {
        return Err(Error::OutOfRange(format!(
            "profile residual {} too large for a trustworthy verdict",
            profile.residual
        )));
    }
    let eps = profile.eps;
    let grid = config.grid(eps);
    let mut curves = bloch_sweep(model, crit, profile, &grid, config.convention)?;
    let fit = fit_expansion(&curves, eps)?;
    let re_c2 = fit.c2.re;
    curves.fit = Some(fit);

    let r1_hi = eps / config.region_c;
    let r2_hi = eps * config.region_c;
    let mut witness: Option<f64> = None;
    let mut theta = f64::INFINITY;
    let mut region2_ok = true;
    let mut region3_ok = true;
    for (i, &s) in curves.sigmas.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let max_re = curves.lambda1[i].re.max(curves.lambda2[i].re);
        if max_re > 1e-12 && witness.is_none() {
            witness = Some(s);
        }
        theta = theta.min(-max_re / (s * s));
        let a = s.abs();
        if a > r1_hi && a <= r2_hi && max_re >= 0.0 {
            region2_ok = false;
        }
        if a > r2_hi && max_re >= 0.0 {
            region3_ok = false;
        }
    }
    if !theta.is_finite() {
        theta = 0.0;
    }
    let region1_ok = re_c2 < 0.0;

    let kappa_s = cgl.kappa_s_sq.max(0.0).sqrt();
    let in_dead_band =
        kappa_s > 0.0 && (profile.kappa.abs() - kappa_s).abs() <= config.dead_band * kappa_s;

    let verdict = if in_dead_band {
        Verdict::Inconclusive
    } else if witness.is_some() || !region1_ok {
        Verdict::Unstable
    } else if theta > 0.0 && region2_ok && region3_ok {
        Verdict::DiffusivelyStable
    } else {
        Verdict::Inconclusive
    };

    let verdict = StabilityVerdict {
        verdict,
        theta: theta.max(0.0),
        delta: curves.delta,
        witness_sigma: witness,
        re_c2,
        region1_ok,
        region2_ok,
        region3_ok,
    };
    Ok((verdict, curves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgl::cgl_coefficients;
    use crate::model::builtin;
    use crate::turing::find_turing_point;
    use std::collections::BTreeMap;

    fn setup(
        name: &str,
        eps: f64,
        kappa: f64,
        m: usize,
    ) -> (ModelSpec, CriticalData, CGLCoefficients, WaveProfile) {
        let model = builtin(name, &BTreeMap::new()).unwrap();
        let crit = find_turing_point(&model).unwrap();
        let cgl = cgl_coefficients(&model, &crit).unwrap();
        let profile =
            crate::wave::solve_wave(&model, &crit, &cgl, eps, kappa, m, 1e-10).unwrap();
        (model, crit, cgl, profile)
    }

    fn geo_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let mut g = vec![0.0];
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let s = lo * (hi / lo).powf(t);
            g.push(s);
            g.push(-s);
        }
        g
    }

    #[test]
    fn translation_zero_mode_at_sigma_zero() {
        let (model, crit, _cgl, profile) = setup("swift-hohenberg", 0.02, 0.0, 16);
        let b = assemble_bloch(&model, &crit, &profile, 0.0, Convention::Modified).unwrap();
        let (w, v) = linalg::eig(&b.matrix).unwrap();
        let scale = linalg::fro_norm(&b.matrix);
        let (imin, _) = w
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!(w[imin].norm() <= 1e-9 * scale, "smallest = {}", w[imin]);
        let t = translation_mode(&profile);
        assert!(linalg::overlap(&t, &v.column(imin).to_owned()) >= 0.999);
    }

    #[test]
    fn conjugation_reflection_identity() {
        // B(-sigma) equals the mode-reflected entrywise conjugate of B(sigma)
        let (model, crit, _cgl, profile) = setup("hadamard-burgers", 0.04, 0.15, 12);
        let sigma = 0.07;
        for conv in [Convention::Modified, Convention::Standard] {
            let bp = assemble_bloch(&model, &crit, &profile, sigma, conv).unwrap();
            let bm = assemble_bloch(&model, &crit, &profile, -sigma, conv).unwrap();
            let n = bp.n;
            let nn = n * (2 * bp.m + 1);
            let refl = |idx: usize| {
                let blk = idx / n;
                let i = idx % n;
                (2 * bp.m - blk) * n + i
            };
            let mut max_err = 0.0f64;
            for a in 0..nn {
                for b in 0..nn {
                    let err = (bm.matrix[[a, b]]
                        - bp.matrix[[refl(a), refl(b)]].conj())
                    .norm();
                    max_err = max_err.max(err);
                }
            }
            assert!(max_err < 1e-12, "identity violated: {max_err}");
        }
    }

    #[test]
    fn conventions_share_real_spectrum() {
        let (model, crit, _cgl, profile) = setup("hadamard-burgers", 0.04, 0.15, 12);
        let sigma = 0.03;
        let bm = assemble_bloch(&model, &crit, &profile, sigma, Convention::Modified).unwrap();
        let bs = assemble_bloch(&model, &crit, &profile, sigma, Convention::Standard).unwrap();
        let mut wm: Vec<f64> = linalg::eigvals(&bm.matrix)
            .unwrap()
            .iter()
            .map(|z| z.re)
            .collect();
        let mut ws: Vec<f64> = linalg::eigvals(&bs.matrix)
            .unwrap()
            .iter()
            .map(|z| z.re)
            .collect();
        wm.sort_by(|a, b| a.total_cmp(b));
        ws.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in wm.iter().zip(ws.iter()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn sh_sweep_matches_frozen_oracle() {
        let (model, crit, cgl, profile) = setup("swift-hohenberg", 0.02, 0.0, 16);
        let mut grid = geo_grid(0.02 * 0.02 / 10.0, 0.02 / 10.0, 21);
        grid.extend([0.001, -0.001, 0.005, -0.005]);
        let curves =
            bloch_sweep(&model, &crit, &profile, &grid, Convention::Modified).unwrap();
        let (l1, l2) = curves.at_zero().unwrap();
        assert!(l2.norm() < 1e-11, "lambda2(0) = {l2}");
        assert!((l1.re - (-0.0007999983333451694)).abs() < 1e-9);
        // frozen eigensolve values of the translation curve
        let at = |s: f64| {
            let i = curves.sigmas.iter().position(|&x| x == s).unwrap();
            curves.lambda2[i]
        };
        assert!((at(0.001).re - (-3.999999761627038e-6)).abs() < 1e-10);
        assert!((at(0.005).re - (-1.0000031296e-4)).abs() < 1e-8);
        let fit = fit_expansion(&curves, 0.02).unwrap();
        // reflection symmetry kills the linear coefficient entirely, and the
        // quadratic coefficient is the band-center value -Re a = -4
        assert!(fit.c1.norm() < 1e-7, "c1 = {}", fit.c1);
        assert!((fit.c2.re - (-4.0)).abs() < 5e-3, "c2 = {}", fit.c2);
        let _ = cgl;
    }

    #[test]
    fn sweep_conjugate_symmetry() {
        let (model, crit, _cgl, profile) = setup("hadamard-burgers", 0.02, 0.15, 12);
        let grid = geo_grid(2e-4, 0.01, 9);
        let curves =
            bloch_sweep(&model, &crit, &profile, &grid, Convention::Modified).unwrap();
        let npts = curves.sigmas.len();
        for i in 0..npts {
            let j = npts - 1 - i;
            assert!((curves.sigmas[i] + curves.sigmas[j]).abs() < 1e-15);
            assert!((curves.lambda1[i] - curves.lambda1[j].conj()).norm() < 1e-10);
            assert!((curves.lambda2[i] - curves.lambda2[j].conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn hadamard_burgers_fit_matches_frozen_oracle() {
        let (model, crit, cgl, profile) = setup("hadamard-burgers", 0.04, 0.15, 12);
        let grid = geo_grid(0.04 * 0.04 / 10.0, 0.04 / 10.0, 41);
        let mut curves =
            bloch_sweep(&model, &crit, &profile, &grid, Convention::Modified).unwrap();
        let fit = fit_expansion(&curves, 0.04).unwrap();
        assert!(
            (fit.c1.im - (-0.009920086384871935)).abs() < 5e-5,
            "c1 = {}",
            fit.c1
        );
        // on the region-1 window the quartic bias is gone and the fitted c2
        // sits within ~1% of the closed-form limit -0.87527 (the wide-window
        // fit would instead give -0.90386)
        assert!((fit.c2.re - (-0.8752656859828258)).abs() < 0.02, "c2 = {}", fit.c2);
        let (l1, _) = curves.at_zero().unwrap();
        assert!((l1.re - (-0.003125613940924451)).abs() < 1e-8);
        curves.fit = Some(fit);

        let pred = reduced_prediction(&cgl, &crit, 0.04, 0.15, 0.0, EpsSigmaConvention::Halved)
            .unwrap();
        // tolerances reflect the finite-difference accuracy of lambda_kk
        assert!((pred.c1_halved - C64::new(0.0, -0.009933446931199389)).norm() < 1e-6);
        assert!((pred.c2 - (-0.8752656859828258)).abs() < 1e-5);
        let report = verify_agreement(&curves, &pred, 0.04).unwrap();
        assert_eq!(report.matched, EpsSigmaConvention::Halved);
        assert!(report.err_im_c1_halved < 0.01);
        assert!(report.err_im_c1_doubled > 0.5);
    }

    #[test]
    fn convention_shift_is_exact_scalar() {
        // Im c1 differs between conventions by exactly the frame-shift scalar
        let (model, crit, _cgl, profile) = setup("hadamard-burgers", 0.04, 0.15, 12);
        let grid = geo_grid(0.04 * 0.04 / 10.0, 0.04 / 10.0, 21);
        let fit_for = |conv: Convention| {
            let curves = bloch_sweep(&model, &crit, &profile, &grid, conv).unwrap();
            fit_expansion(&curves, 0.04).unwrap().c1
        };
        let cm = fit_for(Convention::Modified);
        let cs = fit_for(Convention::Standard);
        let shift = -profile.omega - frame_shift(&crit, &profile, Convention::Modified);
        assert!(
            ((cs - cm).im - shift).abs() < 1e-6,
            "measured {} vs exact {}",
            (cs - cm).im,
            shift
        );
        assert!((cs - cm).re.abs() < 1e-8);
    }

    #[test]
    fn reduced_matrix_eigenvalues_at_sigma_zero() {
        let (_, crit, cgl, _) = setup("hadamard-burgers", 0.04, 0.15, 12);
        let p = reduced_prediction(&cgl, &crit, 0.04, 0.15, 0.0, EpsSigmaConvention::Halved)
            .unwrap();
        let (e1, e2) = linalg::eig2(&p.matrix);
        let expect = 2.0 * 0.04 * 0.04 * cgl.alpha_sq(0.15) * cgl.c.re;
        let (big, small) = if e1.norm() > e2.norm() { (e1, e2) } else { (e2, e1) };
        assert!(small.norm() < 1e-14);
        assert!((big - C64::new(expect, 0.0)).norm() < 1e-12);
        assert!(p.lambda.norm() < 1e-14);
    }

    #[test]
    fn real_case_prediction_reduces_to_eckhaus() {
        // Im gamma = Im lambda_kk = 0: C1 = 0 and C2 changes sign at
        // kappa^2 = kappa_E^2 / 3
        let (_, crit, cgl, _) = setup("swift-hohenberg", 0.02, 0.0, 16);
        let ks = cgl.kappa_s_sq.sqrt();
        let at = |kappa: f64| {
            reduced_prediction(&cgl, &crit, 0.02, kappa, 0.0, EpsSigmaConvention::Halved)
                .unwrap()
        };
        assert!(at(0.1).c1_halved.norm() < 1e-8);
        assert!(at(ks * 0.97).c2 < 0.0);
        assert!(at(ks * 1.03).c2 > 0.0);
    }

    #[test]
    fn sh_stability_verdict_flips_across_eckhaus() {
        let cfg = SweepConfig {
            n1: 21,
            n2: 21,
            n3: 11,
            ..SweepConfig::default()
        };
        let (model, crit, cgl, stable_p) = setup("swift-hohenberg", 0.02, 0.2, 16);
        let v = stability_verdict(&model, &crit, &cgl, &stable_p, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::DiffusivelyStable, "{v:?}");
        assert!(v.theta > 0.0);

        let (_, _, _, unstable_p) = setup("swift-hohenberg", 0.02, 0.34, 16);
        let v = stability_verdict(&model, &crit, &cgl, &unstable_p, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Unstable, "{v:?}");
        assert!(v.re_c2 > 0.0);

        let ks = cgl.kappa_s_sq.sqrt();
        let (_, _, _, edge_p) = setup("swift-hohenberg", 0.02, ks * 1.01, 16);
        let v = stability_verdict(&model, &crit, &cgl, &edge_p, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive, "{v:?}");
    }

    #[test]
    fn quartic_order_agreement_under_halving() {
        // with sigma = eps * sigma_hat fixed, |lambda - Lambda| / eps^4 stays
        // bounded as eps halves
        let sigma_hat = 0.05;
        let defect = |eps: f64| {
            let (model, crit, cgl, profile) = setup("hadamard-burgers", eps, 0.15, 12);
            let sigma = eps * sigma_hat;
            let grid = vec![0.0, sigma, -sigma];
            let curves =
                bloch_sweep(&model, &crit, &profile, &grid, Convention::Modified).unwrap();
            let i = curves.sigmas.iter().position(|&s| s == sigma).unwrap();
            let pred =
                reduced_prediction(&cgl, &crit, eps, 0.15, sigma, EpsSigmaConvention::Halved)
                    .unwrap();
            (curves.lambda2[i] - pred.lambda).norm() / eps.powi(4)
        };
        let d1 = defect(0.04);
        let d2 = defect(0.02);
        assert!(d2 <= 2.0 * d1, "defect ratio {d1} -> {d2}");
    }

    #[test]
    fn sigma_out_of_range_rejected() {
        let (model, crit, _cgl, profile) = setup("swift-hohenberg", 0.02, 0.0, 16);
        assert!(assemble_bloch(&model, &crit, &profile, 0.6, Convention::Modified).is_err());
    }
}
