//! Fourier-Galerkin Newton solver for the bifurcating periodic traveling
//! wave, plus the second-order mode checks.
//!
//! The wave `u(x, t) = U(kx - Omega t)` with `U` 2pi-periodic satisfies, mode
//! by mode in its Fourier coefficients `U(eta)`,
//! `S(k eta, mu) U(eta) + N(eta) - i eta Omega U(eta) = 0`,
//! where `N(eta)` collects the quadratic and cubic Fourier convolutions.
//! Reality `U(-eta) = conj U(eta)` halves the unknowns; the translation
//! degeneracy is removed by the phase condition `Im(ell . U(1)) = 0`.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::cgl::{s_eta, CGLCoefficients};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::model::ModelSpec;
use crate::turing::CriticalData;

/// Default truncation order; quadratic nonlinearities excite mode `eta` at
/// `O(eps^|eta|)`, so 16 modes are ample for `eps <= 0.1`.
pub const DEFAULT_MODES: usize = 16;
/// Default Newton residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Existence-band margin: requires `kappa^2 <= (1 - NU0) kappa_E^2`.
pub const NU0: f64 = 0.05;
/// Largest bifurcation parameter the solver accepts.
pub const EPS_MAX: f64 = 0.1;

const MAX_ITERS: usize = 50;
const FD_STEP: f64 = 1e-7;
/// Tail-decay requirement: `|U(M)| <= TAIL_RATIO |U(1)|`.
const TAIL_RATIO: f64 = 1e-3;

/// A converged periodic traveling-wave profile in Fourier representation.
#[derive(Debug, Clone, Serialize)]
pub struct WaveProfile {
    /// Bifurcation parameter (`mu = eps^2`).
    pub eps: f64,
    /// Sideband offset: the wavenumber is `k = k_* + eps kappa`.
    pub kappa: f64,
    /// Spatial wavenumber.
    pub k: f64,
    /// System parameter `mu = eps^2`.
    pub mu: f64,
    /// Fourier coefficients `U(eta)` for `eta = 0..=M`; negative modes are
    /// conjugates.
    pub modes: Vec<Vec<C64>>,
    /// Temporal frequency (wave speed is `-Omega / k`).
    #[serde(rename = "Omega")]
    pub omega: f64,
    /// Truncation order.
    #[serde(rename = "M")]
    pub m: usize,
    /// Final Newton residual (l2 norm).
    pub residual: f64,
    /// Measured amplitude `2 Re(ell . U(1)) / eps`, comparable to the
    /// amplitude-equation prediction `alpha(kappa)`.
    pub alpha_measured: f64,
}

impl WaveProfile {
    /// Fourier coefficient `U(eta)` for any `eta`, using reality for negative
    /// modes and zero beyond the truncation.
    pub fn mode(&self, eta: i64) -> Array1<C64> {
        let a = eta.unsigned_abs() as usize;
        if a > self.m {
            return Array1::zeros(self.modes[0].len());
        }
        let v = Array1::from(self.modes[a].clone());
        if eta < 0 {
            v.mapv(|z| z.conj())
        } else {
            v
        }
    }
}

/// Precomputed coefficient tensors of the quadratic and cubic convolutions at
/// a fixed wavenumber `k` (the forms depend on wavenumbers only, so they are
/// evaluated once per Newton solve and the iteration is pure arithmetic).
struct FormTables {
    n: usize,
    /// Per output mode `e` in `0..=M`: list of `(e1, tensor)` with
    /// `e2 = e - e1` and `tensor[i*n*n + j*n + l]` = component `i` of
    /// `Qhat(k e1, k e2)(b_j, b_l)`.
    q: Vec<Vec<(i64, Vec<C64>)>>,
    /// Per output mode `e`: list of `(e1, e2, tensor)` with `e3 = e - e1 - e2`
    /// and `tensor[((i n + j) n + l) n + p]` = component `i` of
    /// `Chat(...)(b_j, b_l, b_p)`.
    c: Vec<Vec<(i64, i64, Vec<C64>)>>,
}

impl FormTables {
    fn build(model: &ModelSpec, k: f64, m: i64) -> Result<FormTables> {
        let n = model.n;
        let basis: Vec<Array1<C64>> = (0..n)
            .map(|j| {
                let mut b = Array1::<C64>::zeros(n);
                b[j] = C64::new(1.0, 0.0);
                b
            })
            .collect();
        let mut q = Vec::with_capacity(m as usize + 1);
        let mut c = Vec::with_capacity(m as usize + 1);
        for e in 0..=m {
            let mut qe = Vec::new();
            if model.has_qform() {
                for e1 in (e - m).max(-m)..=(e + m).min(m) {
                    let e2 = e - e1;
                    let mut t = vec![C64::new(0.0, 0.0); n * n * n];
                    for j in 0..n {
                        for l in 0..n {
                            let out = model.eval_qform(
                                k * e1 as f64,
                                k * e2 as f64,
                                basis[j].view(),
                                basis[l].view(),
                            )?;
                            for i in 0..n {
                                t[(i * n + j) * n + l] = out[i];
                            }
                        }
                    }
                    qe.push((e1, t));
                }
            }
            q.push(qe);
            let mut ce = Vec::new();
            if model.has_cform() {
                for e1 in -m..=m {
                    for e2 in -m..=m {
                        let e3 = e - e1 - e2;
                        if e3 < -m || e3 > m {
                            continue;
                        }
                        let mut t = vec![C64::new(0.0, 0.0); n * n * n * n];
                        for j in 0..n {
                            for l in 0..n {
                                for p in 0..n {
                                    let out = model.eval_cform(
                                        k * e1 as f64,
                                        k * e2 as f64,
                                        k * e3 as f64,
                                        basis[j].view(),
                                        basis[l].view(),
                                        basis[p].view(),
                                    )?;
                                    for i in 0..n {
                                        t[(((i * n + j) * n) + l) * n + p] = out[i];
                                    }
                                }
                            }
                        }
                        ce.push((e1, e2, t));
                    }
                }
            }
            c.push(ce);
        }
        Ok(FormTables { n, q, c })
    }

    /// Nonlinear convolution `N(e)` given the full mode table
    /// `u[eta + M] = U(eta)`.
    fn convolve(&self, e: usize, u: &[Vec<C64>], m: i64) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (e1, t) in &self.q[e] {
            let u1 = &u[(e1 + m) as usize];
            let u2 = &u[(e as i64 - e1 + m) as usize];
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    for l in 0..n {
                        acc += t[(i * n + j) * n + l] * u1[j] * u2[l];
                    }
                }
                out[i] += acc;
            }
        }
        for (e1, e2, t) in &self.c[e] {
            let u1 = &u[(e1 + m) as usize];
            let u2 = &u[(e2 + m) as usize];
            let u3 = &u[(e as i64 - e1 - e2 + m) as usize];
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    for l in 0..n {
                        let ujl = u1[j] * u2[l];
                        for p in 0..n {
                            acc += t[(((i * n + j) * n) + l) * n + p] * ujl * u3[p];
                        }
                    }
                }
                out[i] += acc;
            }
        }
        out
    }
}

/// The packed real unknown vector: `U(0)` (real, n), then for each
/// `e = 1..=M` the real and imaginary parts of `U(e)` (2n), then `Omega`.
struct Packing {
    n: usize,
    m: usize,
}

impl Packing {
    fn len(&self) -> usize {
        self.n + 2 * self.n * self.m + 1
    }

    /// Full mode table `u[eta + M]` for `eta in [-M, M]`.
    fn unpack(&self, x: &Array1<f64>) -> (Vec<Vec<C64>>, f64) {
        let (n, m) = (self.n, self.m);
        let mut u = vec![vec![C64::new(0.0, 0.0); n]; 2 * m + 1];
        for i in 0..n {
            u[m][i] = C64::new(x[i], 0.0);
        }
        for e in 1..=m {
            let base = n + 2 * n * (e - 1);
            for i in 0..n {
                let z = C64::new(x[base + i], x[base + n + i]);
                u[m + e][i] = z;
                u[m - e][i] = z.conj();
            }
        }
        (u, x[self.len() - 1])
    }
}

struct WaveSystem {
    symbols: Vec<Array2<C64>>, // S(k e, mu) for e = 0..=M
    tables: FormTables,
    ell: Array1<C64>,
    pack: Packing,
}

impl WaveSystem {
    fn new(
        model: &ModelSpec,
        crit: &CriticalData,
        k: f64,
        mu: f64,
        m: usize,
    ) -> Result<Self> {
        let symbols = (0..=m)
            .map(|e| model.eval_symbol(k * e as f64, mu))
            .collect();
        Ok(WaveSystem {
            symbols,
            tables: FormTables::build(model, k, m as i64)?,
            ell: crit.ell_array(),
            pack: Packing { n: model.n, m },
        })
    }

    fn residual(&self, x: &Array1<f64>) -> Array1<f64> {
        let (n, m) = (self.pack.n, self.pack.m);
        let (u, omega) = self.pack.unpack(x);
        let mut f = Array1::<f64>::zeros(self.pack.len());
        for e in 0..=m {
            let nh = self.tables.convolve(e, &u, m as i64);
            let ue = &u[m + e];
            for i in 0..n {
                let mut fe = nh[i] - C64::new(0.0, e as f64 * omega) * ue[i];
                for j in 0..n {
                    fe += self.symbols[e][[i, j]] * ue[j];
                }
                if e == 0 {
                    f[i] = fe.re;
                } else {
                    let base = n + 2 * n * (e - 1);
                    f[base + i] = fe.re;
                    f[base + n + i] = fe.im;
                }
            }
        }
        // phase condition: Im(ell . U(1)) = 0
        let u1 = Array1::from(u[m + 1].clone());
        f[self.pack.len() - 1] = linalg::dot(&self.ell, &u1).im;
        f
    }

    /// Dense forward-difference Jacobian.
    fn jacobian(&self, x: &Array1<f64>, f0: &Array1<f64>) -> Array2<f64> {
        let nu = self.pack.len();
        let mut jac = Array2::<f64>::zeros((nu, nu));
        let mut xp = x.clone();
        for col in 0..nu {
            let h = FD_STEP * x[col].abs().max(1.0);
            xp[col] = x[col] + h;
            let fp = self.residual(&xp);
            xp[col] = x[col];
            for row in 0..nu {
                jac[[row, col]] = (fp[row] - f0[row]) / h;
            }
        }
        jac
    }

    /// Newton-iterate from `x`; returns the solution and its residual norm.
    fn newton(&self, mut x: Array1<f64>, tol: f64) -> std::result::Result<(Array1<f64>, f64), f64> {
        let mut best = f64::INFINITY;
        for _ in 0..MAX_ITERS {
            let f = self.residual(&x);
            let r = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            best = best.min(r);
            if r <= tol {
                return Ok((x, r));
            }
            let jac = self.jacobian(&x, &f);
            let dx = match linalg::solve_real(&jac, &f) {
                Ok(dx) => dx,
                Err(_) => return Err(best),
            };
            x = &x - &dx;
        }
        let r = self
            .residual(&x)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        if r <= tol {
            Ok((x, r))
        } else {
            Err(best.min(r))
        }
    }
}

/// Analytic initial guess: `U(1) = eps alpha(kappa) r / 2`, `Omega` from the
/// frequency expansion
/// `Omega = Im lambda + eps kappa Im d_k lambda - eps^2 omega(kappa) + O(eps^3)`.
fn initial_guess(
    crit: &CriticalData,
    cgl: &CGLCoefficients,
    eps: f64,
    kappa: f64,
    pack: &Packing,
) -> Result<Array1<f64>> {
    let alpha = cgl.alpha(kappa)?;
    let mut x = Array1::<f64>::zeros(pack.len());
    let r = crit.r_array();
    let base = pack.n;
    for i in 0..pack.n {
        let z = r[i] * (0.5 * eps * alpha);
        x[base + i] = z.re;
        x[base + pack.n + i] = z.im;
    }
    let omega0 = crit.lambda_at_kstar.im + eps * kappa * crit.d_lambda_dk.im
        - eps * eps * cgl.omega(kappa);
    x[pack.len() - 1] = omega0;
    Ok(x)
}

/// Solve for the periodic traveling wave at `(eps, kappa)` with truncation
/// order `m` and Newton tolerance `tol`.
///
/// Falls back to continuation in `eps` (4 steps from `eps/4`) if the direct
/// Newton solve stalls. The converged profile is phase-normalized so that
/// `ell . U(1)` is real and nonnegative.
pub fn solve_wave(
    model: &ModelSpec,
    crit: &CriticalData,
    cgl: &CGLCoefficients,
    eps: f64,
    kappa: f64,
    m: usize,
    tol: f64,
) -> Result<WaveProfile> {
    if !(eps >= 0.0 && eps <= EPS_MAX) {
        return Err(Error::OutOfRange(format!(
            "eps = {eps} outside [0, {EPS_MAX}]"
        )));
    }
    if kappa * kappa > (1.0 - NU0) * cgl.kappa_e_sq {
        return Err(Error::OutOfRange(format!(
            "kappa^2 = {} above the margin {} of the existence band",
            kappa * kappa,
            (1.0 - NU0) * cgl.kappa_e_sq
        )));
    }
    if m < 8 {
        return Err(Error::OutOfRange(format!("truncation order {m} < 8")));
    }
    let n = model.n;
    if eps == 0.0 {
        // trivial profile at the bifurcation point
        return Ok(WaveProfile {
            eps,
            kappa,
            k: crit.k_star,
            mu: 0.0,
            modes: vec![vec![C64::new(0.0, 0.0); n]; m + 1],
            omega: crit.lambda_at_kstar.im,
            m,
            residual: 0.0,
            alpha_measured: 0.0,
        });
    }

    let attempt = |eps_now: f64, x0: Array1<f64>| {
        let k = crit.k_star + eps_now * kappa;
        let mu = eps_now * eps_now;
        let sys = WaveSystem::new(model, crit, k, mu, m)?;
        match sys.newton(x0, tol) {
            Ok((x, r)) => Ok((x, r, sys)),
            Err(best) => Err(Error::NoWave {
                eps: eps_now,
                kappa,
                residual: best,
                iterations: MAX_ITERS,
            }),
        }
    };

    let pack = Packing { n, m };
    let direct = attempt(eps, initial_guess(crit, cgl, eps, kappa, &pack)?);
    let (x, residual, sys) = match direct {
        Ok(ok) => ok,
        Err(_) => {
            // continuation: march eps from eps/4 in 4 steps, rescaling modes
            // by the amplitude law (mode 1 scales like eps, mode eta like
            // eps^max(|eta|, 2); exponents capped at 8 to avoid underflow)
            let mut eps_prev = eps / 4.0;
            let mut state = attempt(eps_prev, initial_guess(crit, cgl, eps_prev, kappa, &pack)?)?;
            for step in 2..=4 {
                let eps_now = eps * step as f64 / 4.0;
                let ratio = eps_now / eps_prev;
                let mut x0 = state.0.clone();
                // rescale U(0) by ratio^2
                for i in 0..n {
                    x0[i] *= ratio * ratio;
                }
                for e in 1..=m {
                    let p = if e == 1 { 1 } else { e.clamp(2, 8) } as i32;
                    let s = ratio.powi(p);
                    let base = n + 2 * n * (e - 1);
                    for i in 0..2 * n {
                        x0[base + i] *= s;
                    }
                }
                // frequency predictor: analytic guess plus scaled correction
                let g_prev = initial_guess(crit, cgl, eps_prev, kappa, &pack)?;
                let g_now = initial_guess(crit, cgl, eps_now, kappa, &pack)?;
                let last = pack.len() - 1;
                x0[last] = g_now[last] + (x0[last] - g_prev[last]) * ratio * ratio;
                state = attempt(eps_now, x0)?;
                eps_prev = eps_now;
            }
            state
        }
    };

    let (mut u, omega) = pack.unpack(&x);
    // sign normalization: half-period translation if ell . U(1) < 0
    let u1 = Array1::from(u[m + 1].clone());
    let phase = linalg::dot(&sys.ell, &u1).re;
    if phase < 0.0 {
        for eta in 0..=(2 * m as i64) {
            let e = eta - m as i64;
            if e.rem_euclid(2) == 1 {
                for v in &mut u[eta as usize] {
                    *v = -*v;
                }
            }
        }
    }
    let modes: Vec<Vec<C64>> = (0..=m).map(|e| u[m + e].clone()).collect();
    let u1 = Array1::from(modes[1].clone());
    let alpha_measured = 2.0 * linalg::dot(&sys.ell, &u1).re / eps;

    let tail = modes[m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let head = modes[1].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if tail > TAIL_RATIO * head {
        return Err(Error::Truncation {
            m,
            tail,
            head,
        });
    }

    Ok(WaveProfile {
        eps,
        kappa,
        k: crit.k_star + eps * kappa,
        mu: eps * eps,
        modes,
        omega,
        m,
        residual,
        alpha_measured,
    })
}

/// Predicted second-order Fourier modes and their measured relative errors.
#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderModes {
    /// Predicted mean mode `m0 = -alpha^2 S_0 Qhat(k_*, -k_*)(r, rbar)`.
    pub m0: Vec<C64>,
    /// Predicted second harmonic
    /// `m2 = -1/2 alpha^2 S_2 Qhat(k_*, k_*)(r, r)`.
    pub m2: Vec<C64>,
    /// `|2 U(0)/eps^2 - m0| / max(|m0|, eps)`.
    pub err0: f64,
    /// `|2 U(2)/eps^2 - m2| / max(|m2|, eps)`.
    pub err2: f64,
}

/// Compare the converged profile's `{0, 2}` modes against the closed-form
/// second-order predictions. Uses the measured amplitude, so both errors
/// scale as `O(eps)` under `eps`-halving.
pub fn second_order_modes(
    model: &ModelSpec,
    crit: &CriticalData,
    profile: &WaveProfile,
) -> Result<SecondOrderModes> {
    if profile.eps < 1e-4 {
        return Err(Error::OutOfRange(format!(
            "eps = {} too small to divide out eps^2 meaningfully",
            profile.eps
        )));
    }
    let ks = crit.k_star;
    let r = crit.r_array();
    let rb = r.mapv(|z| z.conj());
    let a2 = profile.alpha_measured * profile.alpha_measured;
    let s0 = s_eta(model, crit, 0)?;
    let s2 = s_eta(model, crit, 2)?;
    let q0 = model.eval_qform(ks, -ks, r.view(), rb.view())?;
    let q2 = model.eval_qform(ks, ks, r.view(), r.view())?;
    let m0 = s0.dot(&q0).mapv(|z| z * (-a2));
    let m2 = s2.dot(&q2).mapv(|z| z * (-0.5 * a2));
    let eps2 = profile.eps * profile.eps;
    let rel = |pred: &Array1<C64>, eta: i64| {
        let measured = profile.mode(eta).mapv(|z| z * (2.0 / eps2));
        let diff = &measured - pred;
        linalg::norm(&diff) / linalg::norm(pred).max(profile.eps)
    };
    let err0 = rel(&m0, 0);
    let err2 = rel(&m2, 2);
    Ok(SecondOrderModes {
        m0: m0.to_vec(),
        m2: m2.to_vec(),
        err0,
        err2,
    })
}
