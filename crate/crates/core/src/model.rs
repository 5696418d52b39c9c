//! The two-body Calogero instance: parameters, spectrum, eigenfunctions and
//! the truncated Fock-space realization of the ladder operators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::specfun::{laguerre, log_gamma};

/// Default Fock-space truncation.
pub const DEFAULT_TRUNCATION: usize = 200;

/// Constructors log a warning above this relative tail mass.
pub const TAIL_WARN_THRESHOLD: f64 = 1e-12;

/// `e0 = 1 + sqrt(1/4 + 2 eta^2)`.
pub fn e0_from_eta(eta: f64) -> Result<f64> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::domain("e0_from_eta", format!("eta = {eta} must be >= 0")));
    }
    Ok(1.0 + (0.25 + 2.0 * eta * eta).sqrt())
}

/// One Calogero instance. `e0` is always derived from `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    eta: f64,
    e0: f64,
    beta: f64,
}

impl ModelParams {
    pub fn new(eta: f64, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::domain(
                "ModelParams::new",
                format!("beta = {beta} is not finite"),
            ));
        }
        Ok(ModelParams {
            eta,
            e0: e0_from_eta(eta)?,
            beta,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Same model with a different phase label.
    pub fn with_beta(&self, beta: f64) -> Self {
        ModelParams { beta, ..*self }
    }

    /// `e_n = 2n + e0`.
    pub fn energy(&self, n: usize) -> f64 {
        2.0 * n as f64 + self.e0
    }

    /// Same model instance (identical coupling), any phase label.
    pub fn same_model(&self, other: &ModelParams) -> bool {
        self.e0 == other.e0
    }
}

pub fn energy(n: usize, params: &ModelParams) -> f64 {
    params.energy(n)
}

/// The phase function solving `f(1) + ... + f(n) = e_n`: `f(1) = e0 + 2`,
/// `f(n) = 2` otherwise.
///
/// The ladder matrices do not use this sequence; see [`phase_step`].
pub fn f_phase(n: usize, params: &ModelParams) -> Result<f64> {
    match n {
        0 => Err(Error::domain("f_phase", "n must be >= 1")),
        1 => Ok(params.e0 + 2.0),
        _ => Ok(2.0),
    }
}

/// Phase exponent carried by the `n-1 <-> n` ladder step: `e_n - e_{n-1} = 2`.
///
/// With this step the states `sum_n c_n e^{-i beta e_n} |n>` are exact
/// eigenvectors of the lowering operator and relabel under time evolution.
/// [`f_phase`] differs from it only at `n = 1`, where the extra `e0` would
/// break the eigenvector property of the vacuum component.
pub fn phase_step(n: usize, params: &ModelParams) -> f64 {
    debug_assert!(n >= 1);
    params.energy(n) - params.energy(n - 1)
}

/// `sqrt(n (n + e0))`, the modulus of `<n-1|A^-|n>`.
pub fn ladder_modulus(n: usize, params: &ModelParams) -> f64 {
    let n = n as f64;
    (n * (n + params.e0)).sqrt()
}

/// `<n-1|A^-|n> = sqrt(n (n + e0)) e^{+i beta step(n)}` for `n >= 1`.
pub fn lower_element(n: usize, params: &ModelParams) -> Complex64 {
    Complex64::from_polar(ladder_modulus(n, params), params.beta * phase_step(n, params))
}

/// `<n|A^+|n-1> = sqrt(n (n + e0)) e^{-i beta step(n)}` for `n >= 1`.
pub fn raise_element(n: usize, params: &ModelParams) -> Complex64 {
    lower_element(n, params).conj()
}

/// Normalized eigenfunction on the half line,
/// `(-1)^n sqrt(2 n!/Gamma(n+e0)) x^{e0-1/2} L_n^{e0-1}(x^2) e^{-x^2/2}`.
pub fn wavefunction(n: usize, x: f64, params: &ModelParams) -> Result<f64> {
    let bare = wavefunction_as_printed(n, x, params)?;
    Ok(bare * x.powf(params.e0 - 0.5))
}

/// The eigenfunction without the `x^{e0-1/2}` factor. Neither normalized nor
/// an eigenfunction; kept to quantify the correction.
pub fn wavefunction_as_printed(n: usize, x: f64, params: &ModelParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("wavefunction", format!("x = {x} must be > 0")));
    }
    let e0 = params.e0;
    let log_norm = 0.5 * (2f64.ln() + log_gamma(n as f64 + 1.0)? - log_gamma(n as f64 + e0)?);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * log_norm.exp() * laguerre(n, e0 - 1.0, x * x)? * (-0.5 * x * x).exp())
}

/// A state as a complex coefficient vector over `{Psi_0, ..., Psi_{N-1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    coeffs: Vec<Complex64>,
    params: ModelParams,
    lost_mass: f64,
}

impl FockVector {
    pub fn new(coeffs: Vec<Complex64>, params: ModelParams) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("FockVector::new", "empty coefficient vector"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::domain("FockVector::new", "non-finite amplitude"));
        }
        Ok(FockVector {
            coeffs,
            params,
            lost_mass: 0.0,
        })
    }

    /// Unit vector at level `n` in a basis of size `dim`.
    pub fn basis(n: usize, dim: usize, params: ModelParams) -> Result<Self> {
        if n >= dim {
            return Err(Error::domain(
                "FockVector::basis",
                format!("level {n} >= truncation {dim}"),
            ));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Self::new(coeffs, params)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `|c_{N-1}|^2 / sum |c_n|^2`.
    pub fn tail_mass(&self) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            0.0
        } else {
            self.coeffs[self.coeffs.len() - 1].norm_sqr() / total
        }
    }

    /// Squared amplitude dropped by truncating operator actions.
    pub fn lost_mass(&self) -> f64 {
        self.lost_mass
    }

    pub(crate) fn warn_on_tail(&self, what: &str) {
        let tail = self.tail_mass();
        if tail > TAIL_WARN_THRESHOLD {
            log::warn!("{what}: truncation tail mass {tail:e} exceeds {TAIL_WARN_THRESHOLD:e}");
        }
    }

    fn with_coeffs(&self, coeffs: Vec<Complex64>, lost: f64) -> FockVector {
        FockVector {
            coeffs,
            params: self.params,
            lost_mass: self.lost_mass + lost,
        }
    }

    fn check_compatible(&self, other: &FockVector) -> Result<()> {
        if self.truncation() != other.truncation() {
            return Err(Error::DimensionMismatch(self.truncation(), other.truncation()));
        }
        if !self.params.same_model(&other.params) {
            return Err(Error::domain("FockVector", "states belong to different models"));
        }
        Ok(())
    }
}

/// Dense matrices of `A^+`, `A^-`, `H`, `A`, `B` on the truncated basis.
#[derive(Debug, Clone)]
pub struct LadderMatrices {
    pub raise: DMatrix<Complex64>,
    pub lower: DMatrix<Complex64>,
    pub hamiltonian: DMatrix<Complex64>,
    /// `(A^+ + A^-)/sqrt 2`
    pub a: DMatrix<Complex64>,
    /// `(A^+ - A^-)/(i sqrt 2)`, the Hermitian combination.
    pub b: DMatrix<Complex64>,
    params: ModelParams,
}

impl LadderMatrices {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.raise.nrows()
    }

    /// `[A^-, A^+]`, computed from the matrices.
    pub fn commutator_lower_raise(&self) -> DMatrix<Complex64> {
        &self.lower * &self.raise - &self.raise * &self.lower
    }
}

pub fn ladder_matrices(params: &ModelParams, dim: usize) -> Result<LadderMatrices> {
    if dim < 2 {
        return Err(Error::domain("ladder_matrices", format!("truncation {dim} < 2")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut lower = DMatrix::from_element(dim, dim, zero);
    let mut raise = DMatrix::from_element(dim, dim, zero);
    let mut hamiltonian = DMatrix::from_element(dim, dim, zero);
    for n in 0..dim {
        hamiltonian[(n, n)] = Complex64::new(params.energy(n), 0.0);
        if n >= 1 {
            lower[(n - 1, n)] = lower_element(n, params);
            raise[(n, n - 1)] = raise_element(n, params);
        }
    }
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let a = (&raise + &lower) * s;
    let b = (&raise - &lower) * (s / Complex64::i());
    Ok(LadderMatrices {
        raise,
        lower,
        hamiltonian,
        a,
        b,
        params: *params,
    })
}

/// `A^+` on a state; the amplitude pushed past level `N-1` is dropped and
/// its squared modulus added to `lost_mass`.
pub fn apply_raise(state: &FockVector) -> FockVector {
    let c = state.coeffs();
    let dim = c.len();
    let p = state.params();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for n in 1..dim {
        out[n] = raise_element(n, p) * c[n - 1];
    }
    let lost = (raise_element(dim, p) * c[dim - 1]).norm_sqr();
    state.with_coeffs(out, lost)
}

pub fn apply_lower(state: &FockVector) -> FockVector {
    let c = state.coeffs();
    let dim = c.len();
    let p = state.params();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for n in 1..dim {
        out[n - 1] = lower_element(n, p) * c[n];
    }
    state.with_coeffs(out, 0.0)
}

pub fn apply_hamiltonian(state: &FockVector) -> FockVector {
    let p = state.params();
    let out = state
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| c * p.energy(n))
        .collect();
    state.with_coeffs(out, 0.0)
}

fn mat_vec(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `<s|M|s> / <s|s>`.
pub fn expectation(matrix: &DMatrix<Complex64>, state: &FockVector) -> Result<Complex64> {
    let dim = state.truncation();
    if matrix.nrows() != dim || matrix.ncols() != dim {
        return Err(Error::DimensionMismatch(matrix.nrows(), dim));
    }
    let norm = state.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(inner(state.coeffs(), &mat_vec(matrix, state.coeffs())) / norm)
}

/// `<s1|s2>`.
pub fn overlap(s1: &FockVector, s2: &FockVector) -> Result<Complex64> {
    s1.check_compatible(s2)?;
    Ok(inner(s1.coeffs(), s2.coeffs()))
}

pub fn normalize(state: &FockVector) -> Result<FockVector> {
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let coeffs = state.coeffs().iter().map(|c| c / norm).collect();
    Ok(state.with_coeffs(coeffs, 0.0))
}

/// `e^{-i H t}`: `c_n -> e^{-i (2n + e0) t} c_n`.
pub fn evolve(state: &FockVector, t: f64) -> FockVector {
    let p = state.params();
    let coeffs = state
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::from_polar(1.0, -p.energy(n) * t))
        .collect();
    state.with_coeffs(coeffs, 0.0)
}

/// Largest entry of `M - M^dagger`.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
