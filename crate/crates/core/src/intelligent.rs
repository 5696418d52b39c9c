//! Robertson-Schrödinger intelligent states.
//!
//! The states solve `((1-lambda) A^+ + (1+lambda) A^-)|psi> = 2z|psi>`, which
//! is `(A - i lambda B)|psi> = sqrt(2) z |psi>` for the Hermitian pair `A`,
//! `B`. They are built in the Fock basis by the three-term recurrence of
//! that equation. Operator-product forms of the solution are not used; the
//! recurrence produces the same amplitudes without formal inverses.
//!
//! The analytic side covers the BG and KP representations. In the BG
//! picture `A^+ = z` and `A^- = z d^2/dz^2 + 2k d/dz`. In the KP picture
//! `A^- = d/dzeta` and `A^+ = zeta^2 d/dzeta + 2k zeta`. The eigenvalue
//! equation then becomes a second- or first-order ODE with closed-form
//! solutions ([`phi_bg`], [`phi_kp`]). The index `2k = e0 + 1` is the one
//! carried by the ladder; the printed forms are kept for comparison.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::coherent::IndexConvention;
use crate::error::{Error, Result};
use crate::model::{apply_lower, apply_raise, lower_element, raise_element, FockVector, LadderMatrices, ModelParams};
use crate::specfun::{hyp0f1, hyp1f1, log_gamma};

/// Tail mass above which [`is_state_fock`] logs a warning.
pub const IS_TAIL_WARN: f64 = 1e-10;

/// Floor of the denominator in `saturation_residual`.
pub const SATURATION_EPS: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsLabel {
    pub z: Complex64,
    pub lambda: Complex64,
    pub beta: f64,
}

impl IsLabel {
    pub fn new(z: Complex64, lambda: Complex64, beta: f64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite() && beta.is_finite()) {
            return Err(Error::domain("IsLabel::new", "non-finite label"));
        }
        check_lambda("IsLabel::new", lambda)?;
        Ok(IsLabel { z, lambda, beta })
    }
}

fn check_lambda(op: &'static str, lambda: Complex64) -> Result<()> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::domain(op, "non-finite lambda"));
    }
    if lambda == -ONE {
        return Err(Error::domain(op, "lambda = -1"));
    }
    if !(lambda.re > 0.0) {
        return Err(Error::domain(op, format!("Re(lambda) = {} <= 0", lambda.re)));
    }
    Ok(())
}

/// `s = sqrt((lambda - 1)/(lambda + 1))`, principal branch.
pub fn squeeze_s(lambda: Complex64) -> Complex64 {
    ((lambda - ONE) / (lambda + ONE)).sqrt()
}

/// `Re(lambda) > 0`; equivalently `|s| < 1`, since `|lambda - 1| < |lambda + 1|`
/// exactly on the right half-plane.
pub fn squeezing_domain_check(lambda: Complex64) -> bool {
    lambda.re > 0.0
}

/// Normalized intelligent state on `dim` levels.
///
/// The recurrence is seeded with `c_0 = e^{-i beta e0}` so that `lambda = 1`
/// reproduces the BG state coefficient by coefficient.
pub fn is_state_fock(label: &IsLabel, params: &ModelParams, dim: usize) -> Result<FockVector> {
    check_lambda("is_state_fock", label.lambda)?;
    if dim < 4 {
        return Err(Error::domain("is_state_fock", format!("truncation {dim} < 4")));
    }
    let p = params.with_beta(label.beta);
    let (lam, z) = (label.lambda, label.z);
    let mut c = vec![ZERO; dim];
    c[0] = Complex64::from_polar(1.0, -label.beta * p.e0());
    for n in 0..dim - 1 {
        let prev = if n == 0 {
            ZERO
        } else {
            (ONE - lam) * raise_element(n, &p) * c[n - 1]
        };
        c[n + 1] = (2.0 * z * c[n] - prev) / ((ONE + lam) * lower_element(n + 1, &p));
        // keep the running amplitudes away from overflow
        let big = c[n + 1].norm();
        if big > 1e150 {
            c.iter_mut().take(n + 2).for_each(|x| *x /= big);
        }
    }
    let norm = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroNorm);
    }
    let state = FockVector::new(c.into_iter().map(|x| x / norm).collect(), p)?;
    let tail = state.tail_mass();
    if tail > IS_TAIL_WARN {
        log::warn!("is_state_fock: truncation tail mass {tail:e} exceeds {IS_TAIL_WARN:e}");
    }
    Ok(state)
}

/// `|| ((1-lambda) A^+ + (1+lambda) A^- - 2z) psi ||` without the top row,
/// where truncation cuts the recurrence.
pub fn eigen_residual(state: &FockVector, z: Complex64, lambda: Complex64) -> f64 {
    let up = apply_raise(state);
    let down = apply_lower(state);
    let c = state.coeffs();
    let dim = c.len();
    (0..dim - 1)
        .map(|n| ((ONE - lambda) * up.coeffs()[n] + (ONE + lambda) * down.coeffs()[n] - 2.0 * z * c[n]).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Moments of `A`, `B`, `H` and both sides of the Robertson-Schrödinger
/// inequality `var_A var_B >= (|<[A,B]>|^2 + <F>^2)/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceReport {
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub mean_h: f64,
    /// `i((dA^+)^2 - (dA^-)^2)`
    pub mean_f: f64,
    /// `<{A,B}>/2 - <A><B>`
    pub covariance: f64,
    /// `<[A,B]>`, from the matrices.
    pub commutator_mean: Complex64,
    pub rs_lhs: f64,
    pub rs_rhs: f64,
    pub saturation_residual: f64,
}

fn mat_vec(m: &nalgebra::DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Normalization tolerance for [`variance_report`].
pub const NORM_TOL: f64 = 1e-10;

pub fn variance_report(state: &FockVector, m: &LadderMatrices) -> Result<VarianceReport> {
    if m.dim() != state.truncation() {
        return Err(Error::DimensionMismatch(m.dim(), state.truncation()));
    }
    if !m.params().same_model(state.params()) {
        return Err(Error::domain(
            "variance_report",
            "state and matrices belong to different models",
        ));
    }
    let norm2 = state.norm_sqr();
    if (norm2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm2));
    }
    let psi = state.coeffs();
    let a_psi = mat_vec(&m.a, psi);
    let b_psi = mat_vec(&m.b, psi);
    let up = mat_vec(&m.raise, psi);
    let down = mat_vec(&m.lower, psi);
    let h_psi = mat_vec(&m.hamiltonian, psi);

    let mean_a = inner(psi, &a_psi).re;
    let mean_b = inner(psi, &b_psi).re;
    let var_a = (inner(&a_psi, &a_psi).re - mean_a * mean_a).max(0.0);
    let var_b = (inner(&b_psi, &b_psi).re - mean_b * mean_b).max(0.0);
    let ab = inner(&a_psi, &b_psi);
    let covariance = ab.re - mean_a * mean_b;
    // <A B> - <B A> = 2i Im <A psi|B psi>
    let commutator_mean = Complex64::new(0.0, 2.0 * ab.im);

    // (A^+)^2 = A^+ A^+ and (A^-)^2 = A^- A^-, with (A^+)^dagger = A^-
    let up_mean = inner(psi, &up);
    let down_mean = inner(psi, &down);
    let var_up = inner(&down, &up) - up_mean * up_mean;
    let var_down = inner(&up, &down) - down_mean * down_mean;
    let mean_f = (Complex64::i() * (var_up - var_down)).re;

    let rs_lhs = var_a * var_b;
    let rs_rhs = 0.25 * (commutator_mean.norm_sqr() + mean_f * mean_f);
    Ok(VarianceReport {
        mean_a,
        mean_b,
        var_a,
        var_b,
        mean_h: inner(psi, &h_psi).re,
        mean_f,
        covariance,
        commutator_mean,
        rs_lhs,
        rs_rhs,
        saturation_residual: (rs_lhs - rs_rhs).abs() / rs_rhs.max(SATURATION_EPS),
    })
}

/// `(|lambda|/2, 1/(2|lambda|)) * sqrt(<H>^2 + <F>^2)`.
pub fn predicted_variances(report: &VarianceReport, lambda: Complex64) -> (f64, f64) {
    predicted_from(report.mean_h, report.mean_f, lambda)
}

/// Same prediction with `<H>` replaced by `|<[A,B]>|`, the quantity the
/// uncertainty bound actually involves.
pub fn predicted_variances_commutator(report: &VarianceReport, lambda: Complex64) -> (f64, f64) {
    predicted_from(report.commutator_mean.norm(), report.mean_f, lambda)
}

fn predicted_from(scale: f64, mean_f: f64, lambda: Complex64) -> (f64, f64) {
    let root = scale.hypot(mean_f);
    let l = lambda.norm();
    (0.5 * l * root, 0.5 * root / l)
}

/// Which of the two equivalent branches `kappa = +s` or `kappa = -s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }
}

fn check_finite(op: &'static str, v: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { op })
    }
}

/// BG-representation solution of the intelligent-state ODE
/// `(1+lambda)(z Phi'' + 2k Phi') + (1-lambda) z Phi = 2 z' Phi`, `2k = e0 + 1`.
pub fn phi_bg(zprime: Complex64, lambda: Complex64, z: Complex64, params: &ModelParams) -> Result<Complex64> {
    phi_bg_with(
        zprime,
        lambda,
        z,
        params,
        Branch::Upper,
        IndexConvention::LadderConsistent,
    )
}

/// `e^{kappa z} 1F1(k - z'/((1+lambda) kappa); 2k; -2 kappa z)` with
/// `kappa = +-s`; at `lambda = 1` the confluent limit `0F1(; 2k; z' z)`.
pub fn phi_bg_with(
    zprime: Complex64,
    lambda: Complex64,
    z: Complex64,
    params: &ModelParams,
    branch: Branch,
    conv: IndexConvention,
) -> Result<Complex64> {
    check_lambda("phi_bg", lambda)?;
    let b = conv.two_k(params);
    if lambda == ONE {
        return check_finite("phi_bg", hyp0f1(b, zprime * z)?);
    }
    let kappa = squeeze_s(lambda) * branch.sign();
    let a = Complex64::new(0.5 * b, 0.0) - zprime / ((ONE + lambda) * kappa);
    check_finite("phi_bg", (kappa * z).exp() * hyp1f1(a, b, -2.0 * kappa * z)?)
}

/// The typeset solution `exp(+-s z) 1F1(e0/2 +- z'; e0; -+s z)`, kept to
/// measure against its own ODE.
pub fn phi_bg_as_printed(
    zprime: Complex64,
    lambda: Complex64,
    z: Complex64,
    params: &ModelParams,
    branch: Branch,
) -> Result<Complex64> {
    check_lambda("phi_bg", lambda)?;
    let e0 = params.e0();
    let sg = branch.sign();
    let s = squeeze_s(lambda);
    let a = Complex64::new(0.5 * e0, 0.0) + sg * zprime;
    check_finite("phi_bg", (sg * s * z).exp() * hyp1f1(a, e0, -sg * s * z)?)
}

/// KP-representation solution of
/// `[(1-lambda) zeta^2 + (1+lambda)] Phi' + (1-lambda) 2k zeta Phi = 2 zeta' Phi`,
/// `2k = e0 + 1`; the normalization constant is left to the caller.
pub fn phi_kp(zetaprime: Complex64, lambda: Complex64, zeta: Complex64, params: &ModelParams) -> Result<Complex64> {
    phi_kp_with(zetaprime, lambda, zeta, params, IndexConvention::LadderConsistent)
}

/// `(1 + s zeta)^{-k + w} (1 - s zeta)^{-k - w}` with `w = zeta'/((1+lambda) s)`;
/// `e^{zeta' zeta}` at `lambda = 1`.
pub fn phi_kp_with(
    zetaprime: Complex64,
    lambda: Complex64,
    zeta: Complex64,
    params: &ModelParams,
    conv: IndexConvention,
) -> Result<Complex64> {
    check_lambda("phi_kp", lambda)?;
    if !(zeta.norm() < 1.0) {
        return Err(Error::domain("phi_kp", format!("|zeta| = {} >= 1", zeta.norm())));
    }
    if lambda == ONE {
        return check_finite("phi_kp", (zetaprime * zeta).exp());
    }
    let s = squeeze_s(lambda);
    let w = zetaprime / ((ONE + lambda) * s);
    let k = 0.5 * conv.two_k(params);
    kp_power_form(s, zeta, w - k, -w - k)
}

/// The typeset exponents `-e0/2 +- zeta'/sqrt(lambda^2 - 1)` (principal root).
pub fn phi_kp_as_printed(
    zetaprime: Complex64,
    lambda: Complex64,
    zeta: Complex64,
    params: &ModelParams,
) -> Result<Complex64> {
    check_lambda("phi_kp", lambda)?;
    if lambda == ONE {
        return Err(Error::Singularity { op: "phi_kp" });
    }
    let s = squeeze_s(lambda);
    let w = zetaprime / (lambda * lambda - ONE).sqrt();
    let h = 0.5 * params.e0();
    kp_power_form(s, zeta, w - h, -w - h)
}

fn kp_power_form(s: Complex64, zeta: Complex64, p_plus: Complex64, p_minus: Complex64) -> Result<Complex64> {
    let (u, v) = (ONE + s * zeta, ONE - s * zeta);
    if u.norm() < 1e-14 || v.norm() < 1e-14 {
        return Err(Error::Singularity { op: "phi_kp" });
    }
    check_finite("phi_kp", (p_plus * u.ln() + p_minus * v.ln()).exp())
}

/// Richardson-extrapolated central differences along the real direction.
///
/// Four halvings from `h0` give an `O(h0^8)` estimate. A base step of about
/// `1e-2` keeps the rounding error of the second difference near `1e-11`.
fn derivatives<F>(f: &F, z: Complex64, h0: f64) -> Result<(Complex64, Complex64, Complex64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    const LEVELS: usize = 4;
    let f0 = f(z)?;
    let mut d1 = [[ZERO; LEVELS]; LEVELS];
    let mut d2 = [[ZERO; LEVELS]; LEVELS];
    let mut h = h0;
    for i in 0..LEVELS {
        let zp = z + h;
        let zm = z - h;
        if zp == z || zm == z {
            return Err(Error::StepUnderflow { op: "ode_residual" });
        }
        let (fp, fm) = (f(zp)?, f(zm)?);
        d1[i][0] = (fp - fm) / (2.0 * h);
        d2[i][0] = (fp - 2.0 * f0 + fm) / (h * h);
        let mut factor = 4.0;
        for j in 1..=i {
            d1[i][j] = d1[i][j - 1] + (d1[i][j - 1] - d1[i - 1][j - 1]) / (factor - 1.0);
            d2[i][j] = d2[i][j - 1] + (d2[i][j - 1] - d2[i - 1][j - 1]) / (factor - 1.0);
            factor *= 4.0;
        }
        h *= 0.5;
    }
    Ok((f0, d1[LEVELS - 1][LEVELS - 1], d2[LEVELS - 1][LEVELS - 1]))
}

/// Base step of the finite-difference derivatives.
pub const FD_STEP: f64 = 1e-2;

fn relative(terms: &[Complex64]) -> f64 {
    let total: Complex64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.norm()).sum();
    if scale == 0.0 {
        0.0
    } else {
        total.norm() / scale
    }
}

/// Relative residual of `f` in `(1+lambda)(z f'' + b f') + (1-lambda) z f - 2 z' f = 0`.
pub fn bg_ode_residual_of<F>(f: F, zprime: Complex64, lambda: Complex64, z: Complex64, b: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let (v, d1, d2) = derivatives(&f, z, FD_STEP)?;
    Ok(relative(&[
        (ONE + lambda) * z * d2,
        (ONE + lambda) * b * d1,
        (ONE - lambda) * z * v,
        -2.0 * zprime * v,
    ]))
}

/// Relative residual of `f` in
/// `[(1-lambda) zeta^2 + (1+lambda)] f' + c zeta f - 2 zeta' f = 0`.
pub fn kp_ode_residual_of<F>(
    f: F,
    zetaprime: Complex64,
    lambda: Complex64,
    zeta: Complex64,
    c: Complex64,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let (v, d1, _) = derivatives(&f, zeta, FD_STEP)?;
    Ok(relative(&[
        (ONE - lambda) * zeta * zeta * d1,
        (ONE + lambda) * d1,
        c * zeta * v,
        -2.0 * zetaprime * v,
    ]))
}

/// Residual of [`phi_bg`] in its ODE (`2k = e0 + 1`).
pub fn ode_residual_bg(zprime: Complex64, lambda: Complex64, z: Complex64, params: &ModelParams) -> Result<f64> {
    let b = IndexConvention::LadderConsistent.two_k(params);
    bg_ode_residual_of(|x| phi_bg(zprime, lambda, x, params), zprime, lambda, z, b)
}

/// Residual of [`phi_kp`] in its ODE (`2k = e0 + 1`).
pub fn ode_residual_kp(zetaprime: Complex64, lambda: Complex64, zeta: Complex64, params: &ModelParams) -> Result<f64> {
    let two_k = IndexConvention::LadderConsistent.two_k(params);
    kp_ode_residual_of(
        |x| phi_kp(zetaprime, lambda, x, params),
        zetaprime,
        lambda,
        zeta,
        (ONE - lambda) * two_k,
    )
}

/// Analytic representation used by [`analytic_vs_fock_fidelity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Bg,
    Kp,
}

/// Threshold below which trailing Fock amplitudes are left out of the
/// analytic comparison.
const FIDELITY_MASS_FLOOR: f64 = 1e-30;

/// `a_n rho^n` by the trapezoidal rule on the circle `|z| = rho`; the
/// `rho^-n` factor is left to the caller, which rescales in log space.
fn cauchy_coefficient<F>(f: &F, n: usize, rho: f64, points: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut sum = ZERO;
    for j in 0..points {
        let theta = 2.0 * PI * j as f64 / points as f64;
        let w = Complex64::from_polar(rho, theta);
        sum += f(w)? * Complex64::from_polar(1.0, -(n as f64) * theta);
    }
    Ok(sum / points as f64)
}

/// Overlap modulus between the Fock-basis intelligent state and the one
/// reconstructed from the Taylor coefficients of [`phi_bg`] or [`phi_kp`].
///
/// Taylor coefficients come from Cauchy integrals on per-order circles
/// placed where the roundoff of the sampled function is smallest relative
/// to the coefficient sought.
pub fn analytic_vs_fock_fidelity(
    label: &IsLabel,
    params: &ModelParams,
    dim: usize,
    repr: Representation,
) -> Result<f64> {
    let fock = is_state_fock(label, params, dim)?;
    let p = *fock.params();
    let c = fock.coeffs();
    let n_cmp = c
        .iter()
        .rposition(|x| x.norm_sqr() > FIDELITY_MASS_FLOOR)
        .map_or(1, |i| i + 1);
    let points = (2 * n_cmp + 64).next_power_of_two();
    let s = squeeze_s(label.lambda).norm();
    let zp = label.z;
    let e0 = p.e0();
    let two_k = IndexConvention::LadderConsistent.two_k(&p);

    let mut recon = Vec::with_capacity(n_cmp);
    for n in 0..n_cmp {
        let nf = n.max(1) as f64;
        let (raw, rho) = match repr {
            Representation::Bg => {
                let rho = if label.lambda == ONE {
                    if zp.norm() > 0.0 {
                        nf * nf / zp.norm()
                    } else {
                        1.0
                    }
                } else {
                    nf / (2.0 * s)
                };
                let f = |x: Complex64| phi_bg(zp, label.lambda, x, &p);
                (cauchy_coefficient(&f, n, rho, points)?, rho)
            }
            Representation::Kp => {
                let rho = if label.lambda == ONE {
                    if zp.norm() > 0.0 {
                        (nf / zp.norm()).min(0.9)
                    } else {
                        0.5
                    }
                } else {
                    (0.8 / s).min(0.9)
                };
                let f = |x: Complex64| phi_kp(zp, label.lambda, x, &p);
                (cauchy_coefficient(&f, n, rho, points)?, rho)
            }
        };
        let nn = n as f64;
        // psi_n = a_n / g_n, with g_n the representation's basis weight
        let log_scale = match repr {
            Representation::Bg => 0.5 * (log_gamma(nn + 1.0)? + log_gamma(nn + 1.0 + e0)?),
            Representation::Kp => -0.5 * (log_gamma(two_k + nn)? - log_gamma(two_k)? - log_gamma(nn + 1.0)?),
        } - nn * rho.ln();
        let phase = Complex64::from_polar(1.0, -label.beta * p.energy(n));
        recon.push(raw * log_scale.exp() * phase);
    }
    let norm_r = recon.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let norm_f = c[..n_cmp].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !(norm_r > 0.0 && norm_r.is_finite()) {
        return Err(Error::NonConvergence {
            op: "analytic_vs_fock_fidelity",
            terms: points,
        });
    }
    let ov: Complex64 = recon.iter().zip(&c[..n_cmp]).map(|(a, b)| a.conj() * b).sum();
    Ok(ov.norm() / (norm_r * norm_f))
}

/// Largest relative defect of the BG differential realization
/// `A^+ = z`, `A^- = z d^2/dz^2 + b d/dz` against the ladder matrix elements
/// on `F_n(z) = z^n / sqrt(n! Gamma(n+1+e0))` for `n <= nmax` at `beta = 0`.
///
/// `b = e0 + 1` under [`IndexConvention::LadderConsistent`], the typeset
/// `b = e0` under [`IndexConvention::AsPrinted`].
pub fn intertwining_defect_bg(params: &ModelParams, nmax: usize, conv: IndexConvention) -> Result<f64> {
    let p = params.with_beta(0.0);
    let b = conv.two_k(&p);
    let e0 = p.e0();
    let basis = |n: usize, x: Complex64, deriv: u32| -> Result<Complex64> {
        let nf = n as f64;
        let norm = (-0.5 * (log_gamma(nf + 1.0)? + log_gamma(nf + 1.0 + e0)?)).exp();
        Ok(norm * monomial_derivative(n, x, deriv))
    };
    let mut worst: f64 = 0.0;
    for &x in SAMPLE_POINTS {
        for n in 0..=nmax {
            // A^- F_n = lower(n) F_{n-1}
            let lhs = x * basis(n, x, 2)? + b * basis(n, x, 1)?;
            let rhs = if n == 0 {
                ZERO
            } else {
                lower_element(n, &p) * basis(n - 1, x, 0)?
            };
            worst = worst.max(rel_defect(lhs, rhs));
            // A^+ F_n = raise(n+1) F_{n+1}
            let lhs = x * basis(n, x, 0)?;
            let rhs = raise_element(n + 1, &p) * basis(n + 1, x, 0)?;
            worst = worst.max(rel_defect(lhs, rhs));
        }
    }
    Ok(worst)
}

/// Largest relative defect of the KP differential realization at `beta = 0`.
///
/// Under [`IndexConvention::LadderConsistent`]: `A^- = d/dzeta`,
/// `A^+ = zeta^2 d/dzeta + 2k zeta` on
/// `G_n = sqrt(Gamma(2k+n)/(Gamma(2k) n!)) zeta^n` with `2k = e0 + 1`.
/// Under [`IndexConvention::AsPrinted`]: `A^+ = zeta^2 d^2/dzeta^2 + e0 zeta`
/// on `G_n = Gamma(e0+n)/(Gamma(e0) n!) zeta^n`.
pub fn intertwining_defect_kp(params: &ModelParams, nmax: usize, conv: IndexConvention) -> Result<f64> {
    let p = params.with_beta(0.0);
    let two_k = conv.two_k(&p);
    let weight = |n: usize| -> Result<f64> {
        let nf = n as f64;
        let log = log_gamma(two_k + nf)? - log_gamma(two_k)? - log_gamma(nf + 1.0)?;
        Ok(match conv {
            IndexConvention::LadderConsistent => (0.5 * log).exp(),
            IndexConvention::AsPrinted => log.exp(),
        })
    };
    let mut worst: f64 = 0.0;
    for &x in SAMPLE_POINTS {
        for n in 0..=nmax {
            let g = |m: usize, d: u32| -> Result<Complex64> { Ok(weight(m)? * monomial_derivative(m, x, d)) };
            let lhs = g(n, 1)?;
            let rhs = if n == 0 {
                ZERO
            } else {
                lower_element(n, &p) * g(n - 1, 0)?
            };
            worst = worst.max(rel_defect(lhs, rhs));
            let lhs = match conv {
                IndexConvention::LadderConsistent => x * x * g(n, 1)? + two_k * x * g(n, 0)?,
                IndexConvention::AsPrinted => x * x * g(n, 2)? + p.e0() * x * g(n, 0)?,
            };
            let rhs = raise_element(n + 1, &p) * g(n + 1, 0)?;
            worst = worst.max(rel_defect(lhs, rhs));
        }
    }
    Ok(worst)
}

const SAMPLE_POINTS: &[Complex64] = &[
    Complex64::new(0.3, 0.0),
    Complex64::new(0.5, 0.4),
    Complex64::new(-0.2, 0.7),
];

/// `d^k/dx^k x^n`.
fn monomial_derivative(n: usize, x: Complex64, k: u32) -> Complex64 {
    let k = k as usize;
    if k > n {
        return ZERO;
    }
    let falling: f64 = (0..k).map(|j| (n - j) as f64).product();
    x.powu((n - k) as u32) * falling
}

fn rel_defect(lhs: Complex64, rhs: Complex64) -> f64 {
    let scale = lhs.norm().max(rhs.norm());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / scale
    }
}
