//! System representation: Fourier symbol plus wavenumber-dependent
//! bilinear/trilinear forms, and the built-in model zoo.
//!
//! A model is the standard-form evolution system `u_t = L(mu) u + N(u)`
//! described entirely spectrally:
//! - the linear part by its matrix symbol `S(k, mu)`,
//! - the nonlinearity by multilinear Fourier multiplier forms
//!   `Qhat(k1, k2)` and `Chat(k1, k2, k3)` with `N(u) = Q(u,u) + C(u,u,u)`
//!   up to quartic terms (which nothing downstream uses).
//!
//! The bifurcation parameter is always `mu = eps^2`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use ndarray::{array, Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Reflection symmetry class of a model.
///
/// `O2` models (reflection-symmetric, only even derivatives) bifurcate to
/// stationary patterns; `SO2` models are generically convective with a
/// nonzero temporal frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Symmetry {
    SO2,
    O2,
}

type SymbolFn = dyn Fn(f64, f64) -> Array2<C64> + Send + Sync;
type QFormFn =
    dyn Fn(f64, f64, ArrayView1<C64>, ArrayView1<C64>) -> Array1<C64> + Send + Sync;
type CFormFn = dyn Fn(f64, f64, f64, ArrayView1<C64>, ArrayView1<C64>, ArrayView1<C64>) -> Array1<C64>
    + Send
    + Sync;

/// A system in standard form, represented spectrally.
///
/// Immutable after construction; all evaluations are pure, so a `ModelSpec`
/// can be shared freely across threads.
#[derive(Clone)]
pub struct ModelSpec {
    /// State dimension.
    pub n: usize,
    /// Model name (built-in name or config-supplied).
    pub name: String,
    /// Reflection symmetry flag.
    pub symmetry: Symmetry,
    /// Metadata: parameter values the model was built with.
    pub parameters: BTreeMap<String, f64>,
    symbol: Arc<SymbolFn>,
    qform: Option<Arc<QFormFn>>,
    cform: Option<Arc<CFormFn>>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("symmetry", &self.symmetry)
            .field("parameters", &self.parameters)
            .field("qform", &self.qform.is_some())
            .field("cform", &self.cform.is_some())
            .finish()
    }
}

impl ModelSpec {
    /// Construct a model from its parts.
    pub fn new(
        n: usize,
        name: impl Into<String>,
        symmetry: Symmetry,
        parameters: BTreeMap<String, f64>,
        symbol: Arc<SymbolFn>,
        qform: Option<Arc<QFormFn>>,
        cform: Option<Arc<CFormFn>>,
    ) -> Self {
        ModelSpec {
            n,
            name: name.into(),
            symmetry,
            parameters,
            symbol,
            qform,
            cform,
        }
    }

    /// Evaluate the symbol `S(k, mu)`.
    ///
    /// In debug builds the reality symmetry `S(-k, mu) = conj(S(k, mu))` is
    /// spot-checked.
    pub fn eval_symbol(&self, k: f64, mu: f64) -> Array2<C64> {
        let s = (self.symbol)(k, mu);
        debug_assert_eq!(s.nrows(), self.n);
        debug_assert!(
            {
                let sm = (self.symbol)(-k, mu);
                let scale = crate::linalg::fro_norm(&s).max(1.0);
                sm.iter()
                    .zip(s.iter())
                    .all(|(a, b)| (a - b.conj()).norm() <= 1e-12 * scale)
            },
            "reality symmetry violated at k = {k}"
        );
        s
    }

    /// True if the model has a quadratic form.
    pub fn has_qform(&self) -> bool {
        self.qform.is_some()
    }

    /// True if the model has a cubic form.
    pub fn has_cform(&self) -> bool {
        self.cform.is_some()
    }

    fn check_dim(&self, v: &ArrayView1<C64>) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Evaluate the bilinear form `Qhat(k1, k2)(u, v)`; zero if absent.
    pub fn eval_qform(
        &self,
        k1: f64,
        k2: f64,
        u: ArrayView1<C64>,
        v: ArrayView1<C64>,
    ) -> Result<Array1<C64>> {
        self.check_dim(&u)?;
        self.check_dim(&v)?;
        Ok(match &self.qform {
            Some(q) => q(k1, k2, u, v),
            None => Array1::zeros(self.n),
        })
    }

    /// Evaluate the trilinear form `Chat(k1, k2, k3)(u, v, w)`; zero if absent.
    pub fn eval_cform(
        &self,
        k1: f64,
        k2: f64,
        k3: f64,
        u: ArrayView1<C64>,
        v: ArrayView1<C64>,
        w: ArrayView1<C64>,
    ) -> Result<Array1<C64>> {
        self.check_dim(&u)?;
        self.check_dim(&v)?;
        self.check_dim(&w)?;
        Ok(match &self.cform {
            Some(c) => c(k1, k2, k3, u, v, w),
            None => Array1::zeros(self.n),
        })
    }

    /// Central finite-difference step for symbol derivatives at wavenumber `k`.
    fn fd_step(k: f64) -> f64 {
        1e-5 * k.abs().max(1.0)
    }

    /// `S_k(k, mu)` by Richardson-extrapolated central differences
    /// (two step sizes, ratio 2).
    pub fn symbol_dk(&self, k: f64, mu: f64) -> Array2<C64> {
        let h = Self::fd_step(k);
        let d = |h: f64| {
            let sp = (self.symbol)(k + h, mu);
            let sm = (self.symbol)(k - h, mu);
            (sp - sm) / C64::new(2.0 * h, 0.0)
        };
        (d(h / 2.0) * C64::new(4.0, 0.0) - d(h)) / C64::new(3.0, 0.0)
    }

    /// `S_kk(k, mu)` by Richardson-extrapolated central differences.
    ///
    /// Uses a larger step than the first derivative: second differences
    /// amplify rounding noise by `1/h^2`, and with Richardson extrapolation
    /// the truncation error at `h = 1e-3` is already far below it.
    pub fn symbol_dkk(&self, k: f64, mu: f64) -> Array2<C64> {
        let h = 1e-3 * k.abs().max(1.0);
        let s0 = (self.symbol)(k, mu);
        let d = |h: f64| {
            let sp = (self.symbol)(k + h, mu);
            let sm = (self.symbol)(k - h, mu);
            (sp + sm - &s0 - &s0) / C64::new(h * h, 0.0)
        };
        (d(h / 2.0) * C64::new(4.0, 0.0) - d(h)) / C64::new(3.0, 0.0)
    }

    /// `S_mu(k, mu)` by Richardson-extrapolated central differences.
    pub fn symbol_dmu(&self, k: f64, mu: f64) -> Array2<C64> {
        let h = 1e-5;
        let d = |h: f64| {
            let sp = (self.symbol)(k, mu + h);
            let sm = (self.symbol)(k, mu - h);
            (sp - sm) / C64::new(2.0 * h, 0.0)
        };
        (d(h / 2.0) * C64::new(4.0, 0.0) - d(h)) / C64::new(3.0, 0.0)
    }
}

/// Tabulated Fourier transform of a convolution kernel: `(k, Re, Im)` samples
/// with linear interpolation between samples and zero extrapolation beyond.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhiHatTable {
    /// Samples sorted by wavenumber.
    pub samples: Vec<(f64, f64, f64)>,
}

impl PhiHatTable {
    pub fn new(mut samples: Vec<(f64, f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::ModelDomain("empty phi_hat table".into()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(PhiHatTable { samples })
    }

    /// Evaluate by linear interpolation; zero outside the tabulated range.
    pub fn eval(&self, k: f64) -> C64 {
        let s = &self.samples;
        if k < s[0].0 || k > s[s.len() - 1].0 {
            return C64::new(0.0, 0.0);
        }
        let j = s.partition_point(|p| p.0 <= k).min(s.len() - 1);
        if j == 0 {
            return C64::new(s[0].1, s[0].2);
        }
        let (k0, re0, im0) = s[j - 1];
        let (k1, re1, im1) = s[j];
        if k1 == k0 {
            return C64::new(re1, im1);
        }
        let t = (k - k0) / (k1 - k0);
        C64::new(re0 + t * (re1 - re0), im0 + t * (im1 - im0))
    }
}

fn get_param(
    params: &BTreeMap<String, f64>,
    name: &str,
    default: f64,
) -> f64 {
    params.get(name).copied().unwrap_or(default)
}

fn reject_unknown(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidParameter {
                name: key.clone(),
                value: params[key],
                reason: format!("not a parameter of this model (allowed: {allowed:?})"),
            });
        }
    }
    Ok(())
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Scalar Swift-Hohenberg: `S(k, mu) = mu - (1 - k^2)^2`, `C(u,v,w) = -uvw`.
fn swift_hohenberg(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    reject_unknown(params, &[])?;
    Ok(ModelSpec::new(
        1,
        "swift-hohenberg",
        Symmetry::O2,
        params.clone(),
        Arc::new(|k: f64, mu: f64| {
            let q = 1.0 - k * k;
            array![[c(mu - q * q)]]
        }),
        None,
        Some(Arc::new(|_k1, _k2, _k3, u: ArrayView1<C64>, v, w| {
            array![-u[0] * v[0] * w[0]]
        })),
    ))
}

/// Scalar heat equation `u_t = u_xx - u`: spectrum below -1 everywhere, so the
/// hypothesis checker must fail (H2). Diagnostic model only.
fn heat_scalar(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    reject_unknown(params, &[])?;
    Ok(ModelSpec::new(
        1,
        "heat-scalar",
        Symmetry::O2,
        params.clone(),
        Arc::new(|k: f64, mu: f64| array![[c(mu - 1.0 - k * k)]]),
        None,
        None,
    ))
}

/// Brusselator reaction-diffusion system at its Turing threshold.
///
/// `u_t = u_xx + A - (B+1)u + u^2 v`, `v_t = d v_xx + B u - u^2 v`,
/// linearized about the equilibrium `(A, B/A)` with `B = B_T + mu` and
/// `B_T = (1 + A/sqrt(d))^2` the critical value. The multilinear forms are
/// frozen at `mu = 0`; the `mu`-dependence of the equilibrium enters the wave
/// profile only at orders nothing downstream measures.
fn brusselator(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    reject_unknown(params, &["a", "d"])?;
    let a = get_param(params, "a", 2.0);
    let d = get_param(params, "d", 16.0);
    if a <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "a".into(),
            value: a,
            reason: "feed rate must be positive".into(),
        });
    }
    if d <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "d".into(),
            value: d,
            reason: "diffusion ratio must be positive".into(),
        });
    }
    let bt = (1.0 + a / d.sqrt()).powi(2);
    if bt >= 1.0 + a * a {
        return Err(Error::InvalidParameter {
            name: "d".into(),
            value: d,
            reason: format!(
                "Turing threshold B_T = {bt} is above the Hopf threshold {}; \
                 the uniform state is oscillatorily unstable",
                1.0 + a * a
            ),
        });
    }
    let u0 = a;
    let v0 = bt / a;
    let mut p = params.clone();
    p.insert("a".into(), a);
    p.insert("d".into(), d);
    p.insert("b_critical".into(), bt);
    Ok(ModelSpec::new(
        2,
        "brusselator",
        Symmetry::O2,
        p,
        Arc::new(move |k: f64, mu: f64| {
            let b = bt + mu;
            let k2 = k * k;
            array![
                [c(b - 1.0 - k2), c(a * a)],
                [c(-b), c(-a * a - d * k2)]
            ]
        }),
        Some(Arc::new(move |_k1, _k2, u: ArrayView1<C64>, v| {
            // quadratic part of (u0+p)^2 (v0+q): v0 p1 p2 + u0 (p1 q2 + p2 q1)
            let s = v0 * u[0] * v[0] + u0 * (u[0] * v[1] + v[0] * u[1]);
            array![s, -s]
        })),
        Some(Arc::new(move |_k1, _k2, _k3, u: ArrayView1<C64>, v, w| {
            // cubic part p^2 q, symmetrized over slots
            let s = (u[0] * v[0] * w[1] + u[0] * w[0] * v[1] + v[0] * w[0] * u[1])
                / c(3.0);
            array![s, -s]
        })),
    ))
}

/// Two-component system with Hadamard-product diffusive nonlinearity
/// `(1/2) d_x^2 (u o u)`, i.e. `Qhat(k1,k2)(u,v) = -(1/2)(k1+k2)^2 (u o v)`.
///
/// The matrices put the uniform state exactly at the Turing threshold with
/// `k_* = 1` and a supercritical (negative real) Landau constant.
fn hadamard_diffusive(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    reject_unknown(params, &[])?;
    let a_mat = [[6.2, -2.0], [21.632, -6.72]];
    let d_diag = [1.0, 1.6];
    Ok(ModelSpec::new(
        2,
        "hadamard-diffusive",
        Symmetry::O2,
        params.clone(),
        Arc::new(move |k: f64, mu: f64| {
            let k2 = k * k;
            array![
                [c(a_mat[0][0] + mu - k2 * d_diag[0]), c(a_mat[0][1])],
                [c(a_mat[1][0]), c(a_mat[1][1] + mu - k2 * d_diag[1])]
            ]
        }),
        Some(Arc::new(|k1: f64, k2: f64, u: ArrayView1<C64>, v| {
            let f = c(-0.5 * (k1 + k2) * (k1 + k2));
            array![f * u[0] * v[0], f * u[1] * v[1]]
        })),
        None,
    ))
}

/// Two-component convective system with Burgers-type nonlinearity
/// `(1/2) d_x (u o u)`, i.e. `Qhat(k1,k2)(u,v) = (i/2)(k1+k2)(u o v)`.
///
/// The symbol carries an odd first-order term `i k C` so that the critical
/// eigenvalue has nonzero imaginary part (genuinely convective bifurcation);
/// with a purely even real symbol the conjugate branch would also be critical
/// and the two-curve spectral decomposition would fail. The matrices are
/// pinned so that `k_* = 1` exactly and Re gamma < 0.
fn hadamard_burgers(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    reject_unknown(params, &[])?;
    let a_mat = [
        [-3.756184849733961, -0.12914018042100722],
        [-0.8594976553665452, -0.6942001975943022],
    ];
    let c_mat = [
        [-0.08307498266286804, -1.6125628993630596],
        [7.7784322862378925, -4.127129087375121],
    ];
    let d_diag = [3.0592708244459454, 0.7925394321675292];
    Ok(ModelSpec::new(
        2,
        "hadamard-burgers",
        Symmetry::SO2,
        params.clone(),
        Arc::new(move |k: f64, mu: f64| {
            let k2 = k * k;
            let mut s = Array2::<C64>::zeros((2, 2));
            for i in 0..2 {
                for j in 0..2 {
                    s[[i, j]] = c(a_mat[i][j]) + C64::new(0.0, k * c_mat[i][j]);
                }
                s[[i, i]] += c(mu - k2 * d_diag[i]);
            }
            s
        }),
        Some(Arc::new(|k1: f64, k2: f64, u: ArrayView1<C64>, v| {
            let f = C64::new(0.0, 0.5 * (k1 + k2));
            array![f * u[0] * v[0], f * u[1] * v[1]]
        })),
        None,
    ))
}

/// Scalar model with a Keller-Segel type nonlocal nonlinearity
/// `N_phi(u) = d_x(u d_x(phi * u))`, ingested through the Fourier transform
/// `phi_hat` of the kernel:
/// `Qhat(k1,k2)(u,v) = -(1/2)(k1+k2)(k1 phi_hat(k1) + k2 phi_hat(k2)) u v`.
///
/// The linear part is Swift-Hohenberg so the Turing hypotheses hold. The
/// default kernel transform is `phi_hat(k) = s / (1 + k^2)` (real and even,
/// so the model is reflection-symmetric); a tabulated `phi_hat` can be
/// supplied through the model config.
fn keller_segel(
    params: &BTreeMap<String, f64>,
    phi_hat: Option<PhiHatTable>,
) -> Result<ModelSpec> {
    reject_unknown(params, &["phi_scale"])?;
    let scale = get_param(params, "phi_scale", 1.0);
    let phi: Arc<dyn Fn(f64) -> C64 + Send + Sync> = match phi_hat {
        Some(table) => Arc::new(move |k: f64| table.eval(k) * c(scale)),
        None => Arc::new(move |k: f64| c(scale / (1.0 + k * k))),
    };
    Ok(ModelSpec::new(
        1,
        "keller-segel",
        Symmetry::O2,
        params.clone(),
        Arc::new(|k: f64, mu: f64| {
            let q = 1.0 - k * k;
            array![[c(mu - q * q)]]
        }),
        Some(Arc::new(move |k1: f64, k2: f64, u: ArrayView1<C64>, v| {
            let w = c(-0.5 * (k1 + k2)) * (c(k1) * phi(k1) + c(k2) * phi(k2));
            array![w * u[0] * v[0]]
        })),
        None,
    ))
}

/// Names of all built-in models.
pub const BUILTIN_NAMES: [&str; 6] = [
    "swift-hohenberg",
    "brusselator",
    "hadamard-diffusive",
    "hadamard-burgers",
    "keller-segel",
    "heat-scalar",
];

/// Construct a built-in model by name.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    builtin_with_kernel(name, params, None)
}

/// Construct a built-in model by name, with an optional tabulated kernel
/// transform (used by `keller-segel`).
pub fn builtin_with_kernel(
    name: &str,
    params: &BTreeMap<String, f64>,
    phi_hat: Option<PhiHatTable>,
) -> Result<ModelSpec> {
    match name {
        "swift-hohenberg" => swift_hohenberg(params),
        "brusselator" => brusselator(params),
        "hadamard-diffusive" => hadamard_diffusive(params),
        "hadamard-burgers" => hadamard_burgers(params),
        "keller-segel" => keller_segel(params, phi_hat),
        "heat-scalar" => heat_scalar(params),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro_norm;
    use ndarray::array;

    fn models() -> Vec<ModelSpec> {
        BUILTIN_NAMES
            .iter()
            .map(|n| builtin(n, &BTreeMap::new()).unwrap())
            .collect()
    }

    #[test]
    fn swift_hohenberg_symbol_values() {
        let m = builtin("swift-hohenberg", &BTreeMap::new()).unwrap();
        assert_eq!(m.eval_symbol(1.0, 0.0)[[0, 0]], c(0.0));
        assert_eq!(m.eval_symbol(0.0, 0.0)[[0, 0]], c(-1.0));
    }

    #[test]
    fn swift_hohenberg_cubic_form() {
        let m = builtin("swift-hohenberg", &BTreeMap::new()).unwrap();
        let one = array![c(1.0)];
        let out = m
            .eval_cform(1.0, 1.0, -1.0, one.view(), one.view(), one.view())
            .unwrap();
        assert_eq!(out[0], c(-1.0));
        // no quadratic term
        let q = m.eval_qform(0.3, 0.7, one.view(), one.view()).unwrap();
        assert_eq!(q[0], c(0.0));
    }

    #[test]
    fn reality_symmetry_on_random_samples() {
        // S(-k, mu) = conj(S(k, mu)) for every built-in on a deterministic
        // pseudo-random sample set.
        for m in models() {
            let mut state = 0x9e3779b97f4a7c15u64;
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 6.0 - 3.0
            };
            for _ in 0..100 {
                let k = next();
                let mu = 0.1 * next();
                let s = m.eval_symbol(k, mu);
                let sm = m.eval_symbol(-k, mu);
                let scale = fro_norm(&s).max(1e-300);
                let diff: f64 = sm
                    .iter()
                    .zip(s.iter())
                    .map(|(a, b)| (a - b.conj()).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(diff <= 1e-12 * scale, "{} at k={k}", m.name);
            }
        }
    }

    #[test]
    fn qform_reality_and_swap_symmetry() {
        for m in models() {
            if !m.has_qform() {
                continue;
            }
            let u: Array1<C64> = (0..m.n)
                .map(|i| C64::new(0.3 + i as f64, -0.2 * i as f64))
                .collect();
            let v: Array1<C64> = (0..m.n)
                .map(|i| C64::new(-0.7 + 0.5 * i as f64, 0.4))
                .collect();
            let (k1, k2) = (0.8, -1.7);
            let q = m.eval_qform(k1, k2, u.view(), v.view()).unwrap();
            // conjugate reality
            let qc = m
                .eval_qform(
                    -k1,
                    -k2,
                    u.mapv(|z| z.conj()).view(),
                    v.mapv(|z| z.conj()).view(),
                )
                .unwrap();
            // simultaneous swap of wavenumber and argument slots
            let qs = m.eval_qform(k2, k1, v.view(), u.view()).unwrap();
            for i in 0..m.n {
                assert!((qc[i] - q[i].conj()).norm() < 1e-12, "{}", m.name);
                assert!((qs[i] - q[i]).norm() < 1e-12, "{}", m.name);
            }
        }
    }

    #[test]
    fn qform_is_multilinear() {
        let m = builtin("hadamard-burgers", &BTreeMap::new()).unwrap();
        let u = array![C64::new(0.2, 0.1), C64::new(-0.4, 0.8)];
        let v = array![C64::new(1.0, -0.3), C64::new(0.5, 0.0)];
        let alpha = C64::new(-1.3, 0.7);
        let scaled = u.mapv(|z| z * alpha);
        let q1 = m.eval_qform(0.4, 1.1, scaled.view(), v.view()).unwrap();
        let q0 = m.eval_qform(0.4, 1.1, u.view(), v.view()).unwrap();
        for i in 0..2 {
            assert!((q1[i] - alpha * q0[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn local_forms_match_collocation() {
        // For the local polynomial nonlinearity of the Brusselator, summing the
        // forms over the modes of a trigonometric polynomial agrees with
        // pointwise evaluation of N on a collocation grid.
        let m = builtin("brusselator", &BTreeMap::new()).unwrap();
        let a = m.parameters["a"];
        let bt = m.parameters["b_critical"];
        let (u0, v0) = (a, bt / a);
        // trig polynomial with modes -2..2 (conjugate-symmetric coefficients)
        let modes: Vec<(i64, Array1<C64>)> = vec![
            (0, array![c(0.05), c(-0.02)]),
            (1, array![C64::new(0.03, 0.01), C64::new(-0.01, 0.02)]),
            (2, array![C64::new(-0.004, 0.006), C64::new(0.002, 0.001)]),
        ];
        let coeff = |eta: i64| -> Array1<C64> {
            for (e, v) in &modes {
                if *e == eta {
                    return v.clone();
                }
                if -*e == eta {
                    return v.mapv(|z| z.conj());
                }
            }
            Array1::zeros(2)
        };
        let nonlin = |p: f64, q: f64| {
            let s = v0 * p * p + 2.0 * u0 * p * q + p * p * q;
            (s, -s)
        };
        let npts = 64;
        for j in 0..npts {
            let x = 2.0 * std::f64::consts::PI * j as f64 / npts as f64;
            // pointwise field
            let mut w = [C64::new(0.0, 0.0); 2];
            for eta in -2..=2i64 {
                let ph = C64::from_polar(1.0, eta as f64 * x);
                let cf = coeff(eta);
                w[0] += cf[0] * ph;
                w[1] += cf[1] * ph;
            }
            let (n1, n2) = nonlin(w[0].re, w[1].re);
            // spectral: sum over mode pairs/triples
            let mut s = [C64::new(0.0, 0.0); 2];
            for e1 in -2..=2i64 {
                for e2 in -2..=2i64 {
                    let q = m
                        .eval_qform(e1 as f64, e2 as f64, coeff(e1).view(), coeff(e2).view())
                        .unwrap();
                    let ph = C64::from_polar(1.0, (e1 + e2) as f64 * x);
                    s[0] += q[0] * ph;
                    s[1] += q[1] * ph;
                    for e3 in -2..=2i64 {
                        let cc = m
                            .eval_cform(
                                e1 as f64,
                                e2 as f64,
                                e3 as f64,
                                coeff(e1).view(),
                                coeff(e2).view(),
                                coeff(e3).view(),
                            )
                            .unwrap();
                        let ph = C64::from_polar(1.0, (e1 + e2 + e3) as f64 * x);
                        s[0] += cc[0] * ph;
                        s[1] += cc[1] * ph;
                    }
                }
            }
            assert!((s[0].re - n1).abs() < 1e-10 && s[0].im.abs() < 1e-10);
            assert!((s[1].re - n2).abs() < 1e-10 && s[1].im.abs() < 1e-10);
        }
    }

    #[test]
    fn keller_segel_zero_kernel_kills_nonlinearity() {
        let table = PhiHatTable::new(vec![(-5.0, 0.0, 0.0), (5.0, 0.0, 0.0)]).unwrap();
        let m =
            builtin_with_kernel("keller-segel", &BTreeMap::new(), Some(table)).unwrap();
        let u = array![c(1.0)];
        let q = m.eval_qform(1.0, 2.0, u.view(), u.view()).unwrap();
        assert_eq!(q[0], c(0.0));
    }

    #[test]
    fn phi_table_interpolates_linearly_and_zero_extrapolates() {
        let t = PhiHatTable::new(vec![(0.0, 1.0, 0.0), (2.0, 3.0, -1.0)]).unwrap();
        assert_eq!(t.eval(1.0), C64::new(2.0, -0.5));
        assert_eq!(t.eval(2.0), C64::new(3.0, -1.0));
        assert_eq!(t.eval(2.5), C64::new(0.0, 0.0));
        assert_eq!(t.eval(-0.1), C64::new(0.0, 0.0));
    }

    #[test]
    fn burgers_qform_is_derivative_of_hadamard_square() {
        // Qhat(k1,k2) = (i/2)(k1+k2) (u o v): check against finite-difference
        // differentiation of N(u) = (1/2) d_x (u o u) on a sampled function.
        let m = builtin("hadamard-burgers", &BTreeMap::new()).unwrap();
        let (k1, k2) = (0.7, -0.2);
        let u = array![C64::new(0.3, 0.0), C64::new(-0.1, 0.0)];
        let q = m.eval_qform(k1, k2, u.view(), u.view()).unwrap();
        // N on w(x) = u e^{ik1 x} + u e^{ik2 x} has (k1+k2)-mode coefficient 2*Qhat(k1,k2)(u,u)
        let x = 0.37;
        let h = 1e-6;
        let w = |x: f64| {
            let e1 = C64::from_polar(1.0, k1 * x);
            let e2 = C64::from_polar(1.0, k2 * x);
            [u[0] * (e1 + e2), u[1] * (e1 + e2)]
        };
        let half_sq = |x: f64| {
            let v = w(x);
            [v[0] * v[0] / c(2.0), v[1] * v[1] / c(2.0)]
        };
        let (p, mm) = (half_sq(x + h), half_sq(x - h));
        for i in 0..2 {
            let deriv = (p[i] - mm[i]) / c(2.0 * h);
            // cross-term contribution at frequency k1+k2 is 2 Qhat(k1,k2)(u,u) e^{i(k1+k2)x};
            // same-frequency terms contribute at 2k1, 2k2
            let e11 = C64::from_polar(1.0, 2.0 * k1 * x) * C64::new(0.0, k1) * u[i] * u[i];
            let e22 = C64::from_polar(1.0, 2.0 * k2 * x) * C64::new(0.0, k2) * u[i] * u[i];
            let cross = deriv - e11 - e22;
            let expect = c(2.0) * q[i] * C64::from_polar(1.0, (k1 + k2) * x);
            assert!((cross - expect).norm() < 1e-6);
        }
    }
}
