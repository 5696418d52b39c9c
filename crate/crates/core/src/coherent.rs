//! Barut-Girardello and Klauder-Perelomov coherent states.
//!
//! The BG family is the set of eigenvectors of `A^-`; the KP family is the
//! displaced vacuum `exp(z A^+ - conj(z) A^-)|Psi_0>`. Both carry the phase
//! label `beta` through `e^{-i beta e_n}` on the `n`-th amplitude.
//!
//! Closed forms on the KP side depend on the index `2k` of the underlying
//! discrete-series representation. The printed formulas use `2k = e0`; the
//! ladder matrices realize `2k = e0 + 1` (`[A^-, A^+] = 2n + 1 + e0`).
//! [`IndexConvention`] selects between them so that both can be measured.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::model::{ladder_matrices, FockVector, ModelParams};
use crate::quadrature::{gauss_laguerre, GaussRule};
use crate::specfun::{bessel_i, bessel_k, gamma, log_gamma};

/// Representation index used by the KP-side closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexConvention {
    /// `2k = e0`, as in the printed matrix element, measure and G_n.
    AsPrinted,
    /// `2k = e0 + 1`, the index carried by the Fock-space ladder.
    LadderConsistent,
}

impl IndexConvention {
    pub fn two_k(self, params: &ModelParams) -> f64 {
        match self {
            IndexConvention::AsPrinted => params.e0(),
            IndexConvention::LadderConsistent => params.e0() + 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BgLabel {
    pub z: Complex64,
    pub beta: f64,
}

impl BgLabel {
    pub fn new(z: Complex64, beta: f64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite() && beta.is_finite()) {
            return Err(Error::domain("BgLabel::new", "non-finite label"));
        }
        Ok(BgLabel { z, beta })
    }
}

/// Group parameter `z` with the derived `kappa = z sinh|z|/|z|` and
/// `zeta = kappa / sqrt(1 + |kappa|^2)` (so `zeta = e^{i arg z} tanh|z|`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpLabel {
    pub z: Complex64,
    pub kappa: Complex64,
    pub zeta: Complex64,
}

impl KpLabel {
    pub fn from_z(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain("KpLabel::from_z", "non-finite z"));
        }
        let r = z.norm();
        let kappa = if r == 0.0 { z } else { z * (r.sinh() / r) };
        let zeta = kappa / (1.0 + kappa.norm_sqr()).sqrt();
        Ok(KpLabel { z, kappa, zeta })
    }

    /// Inverse map from the disk variable, `|zeta| < 1`.
    pub fn from_zeta(zeta: Complex64) -> Result<Self> {
        let rho = zeta.norm();
        if !(rho < 1.0) {
            return Err(Error::domain("KpLabel::from_zeta", format!("|zeta| = {rho} >= 1")));
        }
        let z = if rho == 0.0 { zeta } else { zeta * (rho.atanh() / rho) };
        Self::from_z(z)
    }
}

fn polar_term(log_mod: f64, phase: f64) -> Complex64 {
    Complex64::from_polar(log_mod.exp(), phase)
}

/// `F_n(z, beta) = z^n e^{-i beta e_n} / sqrt(Gamma(n+1) Gamma(n+1+e0))`.
pub fn analytic_f(n: usize, z: Complex64, beta: f64, params: &ModelParams) -> Complex64 {
    let nf = n as f64;
    let log_den = 0.5 * (log_gamma(nf + 1.0).unwrap() + log_gamma(nf + 1.0 + params.e0()).unwrap());
    let phase = -beta * params.energy(n);
    if z == Complex64::new(0.0, 0.0) {
        return if n == 0 {
            polar_term(-log_den, phase)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    polar_term(nf * z.norm().ln() - log_den, nf * z.arg() + phase)
}

fn check_disk(op: &'static str, zeta: Complex64) -> Result<()> {
    if !(zeta.norm() < 1.0) {
        return Err(Error::domain(op, format!("|zeta| = {} >= 1", zeta.norm())));
    }
    Ok(())
}

/// `sqrt(Gamma(2k+n) / (Gamma(2k) n!))`.
fn kp_modulus(n: usize, two_k: f64) -> f64 {
    let nf = n as f64;
    (0.5 * (log_gamma(two_k + nf).unwrap() - log_gamma(two_k).unwrap() - log_gamma(nf + 1.0).unwrap())).exp()
}

fn zeta_power(n: usize, zeta: Complex64) -> Complex64 {
    if n == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        zeta.powu(n as u32)
    }
}

/// `G_n(zeta, beta) = zeta^n sqrt(Gamma(e0+n)/(Gamma(e0) n!)) e^{-i beta e_n}`.
pub fn analytic_g(n: usize, zeta: Complex64, beta: f64, params: &ModelParams) -> Result<Complex64> {
    analytic_g_with(n, zeta, beta, params, IndexConvention::AsPrinted)
}

pub fn analytic_g_with(
    n: usize,
    zeta: Complex64,
    beta: f64,
    params: &ModelParams,
    conv: IndexConvention,
) -> Result<Complex64> {
    check_disk("analytic_g", zeta)?;
    let phase = Complex64::from_polar(1.0, -beta * params.energy(n));
    Ok(zeta_power(n, zeta) * kp_modulus(n, conv.two_k(params)) * phase)
}

/// The printed G_n, with the bare Gamma ratio instead of its square root.
pub fn analytic_g_unrooted(n: usize, zeta: Complex64, beta: f64, params: &ModelParams) -> Result<Complex64> {
    check_disk("analytic_g", zeta)?;
    let m = kp_modulus(n, params.e0());
    let phase = Complex64::from_polar(1.0, -beta * params.energy(n));
    Ok(zeta_power(n, zeta) * (m * m) * phase)
}

/// Amplitude `<Psi_n|zeta>` of the KP state in the index-`2k` closed form,
/// `sqrt(Gamma(2k+n)/(Gamma(2k) n!)) zeta^n (1-|zeta|^2)^k e^{-i beta e_n}`.
pub fn kp_amplitude(
    n: usize,
    zeta: Complex64,
    beta: f64,
    params: &ModelParams,
    conv: IndexConvention,
) -> Result<Complex64> {
    let g = analytic_g_with(n, zeta, beta, params, conv)?;
    Ok(g * (1.0 - zeta.norm_sqr()).powf(0.5 * conv.two_k(params)))
}

/// `c_n` of a BG state before normalization; identical to [`analytic_f`].
pub fn bg_amplitude(n: usize, label: &BgLabel, params: &ModelParams) -> Complex64 {
    analytic_f(n, label.z, label.beta, params)
}

/// Normalized BG state `A^-|z, beta> = z|z, beta>` on `dim` levels.
///
/// Normalized by the explicit vector norm, so the result is exactly unit
/// length for the truncated basis. The returned state carries `label.beta`.
pub fn bg_state(label: &BgLabel, params: &ModelParams, dim: usize) -> Result<FockVector> {
    if dim < 2 {
        return Err(Error::domain("bg_state", format!("truncation {dim} < 2")));
    }
    let p = params.with_beta(label.beta);
    let coeffs: Vec<Complex64> = (0..dim).map(|n| bg_amplitude(n, label, &p)).collect();
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let state = FockVector::new(coeffs.into_iter().map(|c| c / norm).collect(), p)?;
    state.warn_on_tail("bg_state");
    Ok(state)
}

/// `N^2(r) = r^e0 / I_e0(2r)`, with the limit `Gamma(e0+1)` at `r = 0`.
pub fn bg_norm_constant(r: f64, params: &ModelParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain("bg_norm_constant", format!("r = {r} < 0")));
    }
    let e0 = params.e0();
    if r == 0.0 {
        return gamma(e0 + 1.0);
    }
    Ok(r.powf(e0) / bessel_i(e0, 2.0 * r)?)
}

/// Radial density of the BG measure, `(2/pi) I_e0(2r) K_e0(2r) r`.
pub fn bg_measure_weight(r: f64, params: &ModelParams) -> Result<f64> {
    bg_measure_weight_with_order(r, params, params.e0())
}

/// Same density with an arbitrary K order (the printed order is `e0/2`).
pub fn bg_measure_weight_with_order(r: f64, params: &ModelParams, k_order: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain("bg_measure_weight", format!("r = {r} must be > 0")));
    }
    Ok(2.0 / PI * bessel_i(params.e0(), 2.0 * r)? * bessel_k(k_order, 2.0 * r)? * r)
}

/// Tail-mass limit above which the displacement oracle refuses a result.
pub const KP_ORACLE_TAIL_LIMIT: f64 = 1e-8;

/// `exp(z A^+ - conj(z) A^-)|Psi_0>` by dense matrix exponential on the
/// truncated space. Ground truth for the KP closed forms.
pub fn kp_state_oracle(label: &KpLabel, params: &ModelParams, dim: usize) -> Result<FockVector> {
    let m = ladder_matrices(params, dim)?;
    let generator: DMatrix<Complex64> = &m.raise * label.z - &m.lower * label.z.conj();
    let u = expm(&generator);
    let coeffs: Vec<Complex64> = u.column(0).iter().copied().collect();
    let state = FockVector::new(coeffs, *params)?;
    let tail = state.tail_mass();
    if tail > KP_ORACLE_TAIL_LIMIT {
        return Err(Error::TruncationTail {
            tail,
            limit: KP_ORACLE_TAIL_LIMIT,
        });
    }
    state.warn_on_tail("kp_state_oracle");
    Ok(state)
}

/// The printed displacement matrix element
/// `sqrt(Gamma(e0+n)/(Gamma(e0) n!)) kappa^n (1+|kappa|^2)^{-(e0+n)/2} e^{-i beta e_n}`,
/// renormalized over the truncated basis.
pub fn kp_state_closed(label: &KpLabel, params: &ModelParams, dim: usize) -> Result<FockVector> {
    kp_state_closed_with(label, params, dim, IndexConvention::AsPrinted)
}

pub fn kp_state_closed_with(
    label: &KpLabel,
    params: &ModelParams,
    dim: usize,
    conv: IndexConvention,
) -> Result<FockVector> {
    if dim < 2 {
        return Err(Error::domain("kp_state_closed", format!("truncation {dim} < 2")));
    }
    let two_k = conv.two_k(params);
    let kappa = label.kappa;
    if !(kappa.re.is_finite() && kappa.im.is_finite()) {
        return Err(Error::domain("kp_state_closed", "kappa not finite"));
    }
    let log_base = (1.0 + kappa.norm_sqr()).ln();
    let coeffs: Vec<Complex64> = (0..dim)
        .map(|n| {
            let nf = n as f64;
            let phase = Complex64::from_polar(1.0, -params.beta() * params.energy(n));
            let power = if n == 0 {
                Complex64::new(1.0, 0.0)
            } else if kappa == Complex64::new(0.0, 0.0) {
                Complex64::new(0.0, 0.0)
            } else {
                polar_term(nf * kappa.norm().ln(), nf * kappa.arg())
            };
            power * kp_modulus(n, two_k) * (-(0.5 * two_k + 0.5 * nf) * log_base).exp() * phase
        })
        .collect();
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let state = FockVector::new(coeffs.into_iter().map(|c| c / norm).collect(), *params)?;
    state.warn_on_tail("kp_state_closed");
    Ok(state)
}

/// Disk measure density `(e0 - 1)/pi / (1 - |zeta|^2)^2`.
pub fn kp_measure_weight(zeta: Complex64, params: &ModelParams) -> Result<f64> {
    kp_measure_weight_with(zeta, params, IndexConvention::AsPrinted)
}

/// Disk measure density `(2k - 1)/pi / (1 - |zeta|^2)^2`.
pub fn kp_measure_weight_with(zeta: Complex64, params: &ModelParams, conv: IndexConvention) -> Result<f64> {
    check_disk("kp_measure_weight", zeta)?;
    let t = 1.0 - zeta.norm_sqr();
    Ok((conv.two_k(params) - 1.0) / PI / (t * t))
}

/// Nodes for [`laplace_map`]; the weight `u^{2k-1} e^{-u}` is absorbed into
/// a generalized Gauss-Laguerre rule.
pub const LAPLACE_NODES: usize = 128;

/// Gauss-Laguerre rule used by the Laplace-type transform for index `2k`.
pub fn laplace_rule(params: &ModelParams, conv: IndexConvention) -> Result<GaussRule> {
    gauss_laguerre(LAPLACE_NODES, conv.two_k(params) - 1.0)
}

/// `zeta^{-e0}/sqrt(Gamma(e0)) * int_0^inf z^{e0-1} F_n(z, beta) e^{-z/zeta} dz`
/// for real `0 < zeta < 1`.
pub fn laplace_map(n: usize, zeta: f64, beta: f64, params: &ModelParams) -> Result<Complex64> {
    let rule = laplace_rule(params, IndexConvention::AsPrinted)?;
    laplace_map_with_rule(n, zeta, beta, params, IndexConvention::AsPrinted, &rule)
}

/// The transform with kernel `z^{2k-1}` and prefactor `zeta^{-2k}/sqrt(Gamma(2k))`.
pub fn laplace_map_with_rule(
    n: usize,
    zeta: f64,
    beta: f64,
    params: &ModelParams,
    conv: IndexConvention,
    rule: &GaussRule,
) -> Result<Complex64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::domain("laplace_map", format!("zeta = {zeta} outside (0, 1)")));
    }
    let two_k = conv.two_k(params);
    // substituting z = zeta u turns zeta^{-2k} int z^{2k-1} F(z) e^{-z/zeta} dz
    // into int u^{2k-1} F(zeta u) e^{-u} du
    let sum: Complex64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&u, &w)| analytic_f(n, Complex64::new(zeta * u, 0.0), beta, params) * w)
        .sum();
    let value = sum / gamma(two_k)?.sqrt();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonConvergence {
            op: "laplace_map",
            terms: rule.len(),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_lower, evolve, overlap};
    use crate::quadrature::gauss_legendre;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(eta: f64, beta: f64) -> ModelParams {
        ModelParams::new(eta, beta).unwrap()
    }

    #[test]
    fn bg_vacuum_and_ratio() {
        let p = params(0.0, 0.0);
        let v = bg_state(&BgLabel::new(c(0.0, 0.0), 0.0).unwrap(), &p, 20).unwrap();
        assert!((v.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(v.coeffs()[1..].iter().all(|x| x.norm() == 0.0));

        let z = c(0.4, -0.3);
        let s = bg_state(&BgLabel::new(z, 0.0).unwrap(), &p, 40).unwrap();
        let ratio = s.coeffs()[1] / s.coeffs()[0];
        assert!((ratio - z / (1.0 + p.e0()).sqrt()).norm() < 1e-15);
    }

    #[test]
    fn bg_is_lowering_eigenvector() {
        for &beta in &[0.0, 0.7] {
            let p = params(1.0, beta);
            for &z in &[c(0.3, 0.0), c(-1.1, 0.9), c(0.0, 2.0), c(1.4, -1.4)] {
                let s = bg_state(&BgLabel::new(z, beta).unwrap(), &p, 200).unwrap();
                let low = apply_lower(&s);
                let res: f64 = low
                    .coeffs()
                    .iter()
                    .zip(s.coeffs())
                    .map(|(a, b)| (a - z * b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-10, "beta {beta} z {z}: {res}");
            }
        }
    }

    #[test]
    fn bg_temporal_stability() {
        let p = params(1.0, 0.3);
        let z = c(0.8, 0.5);
        let s = bg_state(&BgLabel::new(z, 0.3).unwrap(), &p, 200).unwrap();
        for &t in &[0.1, 1.0, PI] {
            let moved = evolve(&s, t);
            let relabeled = bg_state(&BgLabel::new(z, 0.3 + t).unwrap(), &p, 200).unwrap();
            let dev = moved
                .coeffs()
                .iter()
                .zip(relabeled.coeffs())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "t = {t}: {dev}");
        }
    }

    #[test]
    fn bg_continuity_and_phase_factorization() {
        let p = params(0.5, 0.2);
        let z = c(0.6, 0.8);
        let a = bg_state(&BgLabel::new(z, 0.2).unwrap(), &p, 100).unwrap();
        let b = bg_state(&BgLabel::new(z + c(1e-6, 0.0), 0.2).unwrap(), &p, 100).unwrap();
        let diff: f64 = a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-4);
        let r = bg_state(&BgLabel::new(c(z.norm(), 0.0), 0.2).unwrap(), &p, 100).unwrap();
        for (x, y) in a.coeffs().iter().zip(r.coeffs()) {
            assert!((x.norm() - y.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn norm_constant_against_series() {
        let p = params(0.0, 0.0);
        assert!((bg_norm_constant(0.0, &p).unwrap() - gamma(2.5).unwrap()).abs() < 1e-14);
        for &r in &[0.3, 1.0, 2.5, 6.0] {
            let series: f64 = (0..200).map(|n| analytic_f(n, c(r, 0.0), 0.0, &p).norm_sqr()).sum();
            let got = bg_norm_constant(r, &p).unwrap() * series;
            assert!((got - 1.0).abs() < 1e-13, "r = {r}: {got}");
        }
        let one = bg_norm_constant(1.0, &p).unwrap();
        assert!((one - 1.0 / bessel_i(1.5, 2.0).unwrap()).abs() < 1e-15);
        assert!(bg_norm_constant(-1.0, &p).is_err());
    }

    // int_0^inf x^{mu-1} K_nu(2x) dx = Gamma((mu+nu)/2) Gamma((mu-nu)/2) / 4
    fn mellin_k(mu: f64, nu: f64) -> f64 {
        0.25 * gamma(0.5 * (mu + nu)).unwrap() * gamma(0.5 * (mu - nu)).unwrap()
    }

    #[test]
    fn mellin_oracle_sanity() {
        // x^{3/2} K_{1/2}(2x) = sqrt(pi)/2 x e^{-2x}, integral sqrt(pi)/8
        let rule = gauss_legendre(256).unwrap().on_interval(0.0, 40.0);
        let num = rule.integrate(|x| x.powf(1.5) * bessel_k(0.5, 2.0 * x).unwrap());
        assert!((num - PI.sqrt() / 8.0).abs() < 1e-14);
        assert!((mellin_k(2.5, 0.5) - PI.sqrt() / 8.0).abs() < 1e-15);
    }

    #[test]
    fn bg_measure_moments() {
        let rule = gauss_legendre(256).unwrap().on_interval(0.0, 40.0);
        for &eta in &[0.0, 1.0] {
            let p = params(eta, 0.0);
            let e0 = p.e0();
            for n in 0..=8 {
                let got = rule.integrate(|r| 4.0 * r.powf(e0 + 2.0 * n as f64 + 1.0) * bessel_k(e0, 2.0 * r).unwrap());
                let want = gamma(n as f64 + 1.0).unwrap() * gamma(n as f64 + 1.0 + e0).unwrap();
                assert!(((got - want) / want).abs() < 1e-9, "eta {eta} n {n}");
                let mellin = 4.0 * mellin_k(e0 + 2.0 * n as f64 + 2.0, e0);
                assert!(((mellin - want) / want).abs() < 1e-12);
            }
        }
        let p = params(1.0, 0.0);
        for &r in &[1e-3, 0.5, 3.0, 15.0] {
            assert!(bg_measure_weight(r, &p).unwrap() > 0.0);
        }
        assert!(bg_measure_weight(0.0, &p).is_err());
    }

    #[test]
    fn kp_label_maps() {
        let l = KpLabel::from_z(c(0.0, 0.0)).unwrap();
        assert_eq!(l.kappa, c(0.0, 0.0));
        assert_eq!(l.zeta, c(0.0, 0.0));
        let z = c(0.5, 0.5);
        let l = KpLabel::from_z(z).unwrap();
        assert!((l.zeta.norm() - z.norm().tanh()).abs() < 1e-15);
        assert!((l.zeta.arg() - z.arg()).abs() < 1e-15);
        let back = KpLabel::from_zeta(l.zeta).unwrap();
        assert!((back.z - z).norm() < 1e-14);
        assert!(KpLabel::from_zeta(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn kp_oracle_unitary_and_vacuum() {
        let p = params(1.0, 0.0);
        let v = kp_state_oracle(&KpLabel::from_z(c(0.0, 0.0)).unwrap(), &p, 30).unwrap();
        assert!((v.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        let s = kp_state_oracle(&KpLabel::from_z(c(0.5, 0.5)).unwrap(), &p, 200).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kp_closed_form_against_oracle() {
        let p = params(1.0, 0.0);
        for &z in &[c(0.3, 0.0), c(0.0, 0.6), c(0.5, 0.5)] {
            let label = KpLabel::from_z(z).unwrap();
            let oracle = kp_state_oracle(&label, &p, 200).unwrap();
            let adopted = kp_state_closed_with(&label, &p, 200, IndexConvention::LadderConsistent).unwrap();
            let printed = kp_state_closed(&label, &p, 200).unwrap();
            let dev = |s: &FockVector| {
                s.coeffs()
                    .iter()
                    .zip(oracle.coeffs())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            };
            assert!(dev(&adopted) < 1e-12, "z {z}: {}", dev(&adopted));
            assert!(dev(&printed) > 1e-3, "z {z}: {}", dev(&printed));
        }
        let v = kp_state_closed(&KpLabel::from_z(c(0.0, 0.0)).unwrap(), &p, 10).unwrap();
        assert!((v.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((v.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kp_oracle_phase_with_beta() {
        let p = params(1.0, 0.7);
        let label = KpLabel::from_z(c(0.4, -0.2)).unwrap();
        let oracle = kp_state_oracle(&label, &p, 120).unwrap();
        let closed = kp_state_closed_with(&label, &p, 120, IndexConvention::LadderConsistent).unwrap();
        assert!((overlap(&closed, &oracle).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_functions() {
        let p = params(0.0, 0.0);
        let f0 = analytic_f(0, c(0.3, 0.1), 0.0, &p);
        assert!((f0.re - 1.0 / gamma(1.0 + p.e0()).unwrap().sqrt()).abs() < 1e-15);
        assert_eq!(analytic_f(3, c(0.0, 0.0), 0.0, &p), c(0.0, 0.0));
        let z = c(0.7, -0.4);
        for n in 2..10 {
            let r = analytic_f(n, z, 0.3, &p) / analytic_f(n - 1, z, 0.3, &p);
            let want = z * Complex64::from_polar(1.0, -0.6) / ((n as f64) * (n as f64 + p.e0())).sqrt();
            assert!((r - want).norm() < 1e-14);
        }
        assert!((analytic_g(0, c(0.2, 0.3), 0.0, &p).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let g1 = analytic_g(1, c(0.5, 0.0), 0.0, &p).unwrap();
        assert!((g1.re - 0.5 * 1.5f64.sqrt()).abs() < 1e-15);
        assert!(analytic_g(1, c(1.0, 0.0), 0.0, &p).is_err());
    }

    #[test]
    fn g_matches_kp_closed_coefficients() {
        // <zeta-bar|Psi_n> read off the closed-form state is G_n (1-|zeta|^2)^{e0/2}
        let p = params(1.0, 0.0);
        let label = KpLabel::from_z(c(0.35, 0.2)).unwrap();
        let closed = kp_state_closed(&label, &p, 200).unwrap();
        for n in 0..12 {
            let want = analytic_g(n, label.zeta, 0.0, &p).unwrap() * (1.0 - label.zeta.norm_sqr()).powf(0.5 * p.e0());
            assert!((closed.coeffs()[n] - want).norm() < 1e-14, "n {n}");
            let unrooted =
                analytic_g_unrooted(n, label.zeta, 0.0, &p).unwrap() * (1.0 - label.zeta.norm_sqr()).powf(0.5 * p.e0());
            if n >= 2 {
                assert!((closed.coeffs()[n] - unrooted).norm() > 1e-6, "n {n}");
            }
        }
    }

    #[test]
    fn kp_measure() {
        let p = params(1.0, 0.0);
        let w0 = kp_measure_weight(c(0.0, 0.0), &p).unwrap();
        assert!((w0 - (p.e0() - 1.0) / PI).abs() < 1e-15);
        let w1 = kp_measure_weight(c(0.3, 0.4), &p).unwrap();
        let w2 = kp_measure_weight(c(0.5, 0.0), &p).unwrap();
        assert!(w1 > w0);
        assert!((w1 - w2).abs() < 1e-15);
        assert!(kp_measure_weight(c(0.6, 0.8), &p).is_err());
    }

    #[test]
    fn laplace_map_gamma_oracle() {
        for &eta in &[0.0, 1.0] {
            let p = params(eta, 0.0);
            let e0 = p.e0();
            let v = laplace_map(0, 0.5, 0.0, &p).unwrap();
            assert!((v.re - 1.0 / e0.sqrt()).abs() < 1e-13);
            for n in 0..8 {
                let zeta: f64 = 0.3;
                let nf = n as f64;
                let want = zeta.powi(n as i32) * gamma(e0 + nf).unwrap()
                    / (gamma(e0).unwrap().sqrt() * (gamma(nf + 1.0).unwrap() * gamma(nf + 1.0 + e0).unwrap()).sqrt());
                let got = laplace_map(n, zeta, 0.0, &p).unwrap();
                assert!(((got.re - want) / want).abs() < 1e-12, "n {n}");
            }
        }
        let p = params(1.0, 0.0);
        assert!(laplace_map(0, 1.0, 0.0, &p).is_err());
    }
}
