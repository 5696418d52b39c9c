//! Scalar special functions used by the closed-form state representations.
//!
//! Everything here is a pure map from arguments to a value. Series are
//! summed until the magnitude of the latest term has stayed below
//! `rel_tol * |partial sum|` for three consecutive terms.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Real order of a Bessel/Laguerre family. NaN and infinities are rejected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RealOrder(f64);

impl RealOrder {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(RealOrder(value))
        } else {
            Err(Error::domain("RealOrder::new", format!("order {value} is not finite")))
        }
    }

    /// Same as [`RealOrder::new`] but additionally requires `value >= 0`.
    pub fn non_negative(value: f64) -> Result<Self> {
        let order = Self::new(value)?;
        if value < 0.0 {
            return Err(Error::domain("RealOrder::non_negative", format!("order {value} < 0")));
        }
        Ok(order)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Stopping rule for power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub rel_tol: f64,
}

impl SeriesControl {
    pub fn new(max_terms: usize, rel_tol: f64) -> Result<Self> {
        if max_terms == 0 || !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::domain(
                "SeriesControl::new",
                format!("max_terms = {max_terms}, rel_tol = {rel_tol}"),
            ));
        }
        Ok(SeriesControl { max_terms, rel_tol })
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            max_terms: 10_000,
            rel_tol: 1e-14,
        }
    }
}

/// Tracks the "three small terms in a row" stopping rule.
struct Stopper {
    tol: f64,
    small: u8,
}

impl Stopper {
    fn new(tol: f64) -> Self {
        Stopper { tol, small: 0 }
    }

    fn done(&mut self, term: f64, sum: f64) -> bool {
        if term <= self.tol * sum {
            self.small += 1;
        } else {
            self.small = 0;
        }
        self.small >= 3
    }
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Natural log of the gamma function for `x > 0`.
///
/// Stirling's series for `x >= 10`; smaller arguments are shifted up with
/// the functional equation.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "log_gamma",
            format!("x = {x} must be positive and finite"),
        ));
    }
    let mut shift = 1.0;
    let mut y = x;
    while y < 10.0 {
        shift *= y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360_360.0 + inv2 / 156.0))))));
    Ok((y - 0.5) * y.ln() - y + HALF_LN_2PI + series - shift.ln())
}

/// Gamma function for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    let value = log_gamma(x)?.exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { op: "gamma" })
    }
}

/// Generalized Laguerre polynomial `L_n^alpha(x)` by upward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > -1.0) {
        return Err(Error::domain("laguerre", format!("alpha = {alpha} must exceed -1")));
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Crossover between the ascending series and the large-argument expansion.
pub const BESSEL_I_ASYMPTOTIC_X: f64 = 30.0;

/// Modified Bessel function of the first kind `I_nu(x)`, `nu >= 0`, `x >= 0`.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    let nu = RealOrder::non_negative(nu)?.value();
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_i", format!("x = {x} must be non-negative")));
    }
    let value = if x > BESSEL_I_ASYMPTOTIC_X && x > nu * nu {
        bessel_i_asymptotic(nu, x)?
    } else {
        bessel_i_series(nu, x, &SeriesControl::default())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { op: "bessel_i" })
    }
}

/// Ascending series `sum_k (x/2)^(2k+nu) / (k! Gamma(k+nu+1))`.
pub fn bessel_i_series(nu: f64, x: f64, ctrl: &SeriesControl) -> Result<f64> {
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    let mut term = (nu * half.ln() - log_gamma(nu + 1.0)?).exp();
    if !term.is_finite() {
        return Err(Error::Overflow { op: "bessel_i" });
    }
    let q = half * half;
    let mut sum = term;
    let mut stop = Stopper::new(ctrl.rel_tol);
    for k in 0..ctrl.max_terms {
        let k = k as f64;
        term *= q / ((k + 1.0) * (k + nu + 1.0));
        sum += term;
        if stop.done(term, sum) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        op: "bessel_i",
        terms: ctrl.max_terms,
    })
}

/// Hankel expansion `e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k`.
pub fn bessel_i_asymptotic(nu: f64, x: f64) -> Result<f64> {
    if x > 709.0 {
        return Err(Error::Overflow { op: "bessel_i" });
    }
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(x.exp() / (2.0 * PI * x).sqrt() * sum)
}

// Chebyshev data for Temme's Gamma_1, Gamma_2 on |mu| <= 1/2 (GSL tables).
#[allow(clippy::excessive_precision)]
const TEMME_G1: [f64; 14] = [
    -1.145_164_083_662_683,
    0.006_360_853_113_470_842,
    0.001_862_451_930_072_068_5,
    0.000_152_833_085_873_453_5,
    0.000_017_017_464_011_802_04,
    -6.459_750_292_334_725e-7,
    -5.181_984_843_251_938e-8,
    4.518_909_289_485_818e-10,
    3.243_322_737_102_087e-11,
    6.830_943_402_494_752e-13,
    2.835_350_275_517_21e-14,
    -7.988_390_576_932_36e-16,
    -3.372_667_730_077_195e-17,
    -3.658_633_480_921_052e-20,
];

const TEMME_G2: [f64; 15] = [
    1.882_645_524_949_671_8,
    -0.077_490_658_396_167_52,
    -0.018_256_714_847_324_93,
    0.000_633_803_020_907_489_6,
    0.000_076_229_054_350_872_9,
    -9.550_164_756_172_044e-7,
    -8.892_726_810_788_635e-8,
    -1.952_133_477_231_961_4e-9,
    -9.400_305_273_588_516e-11,
    4.687_513_384_953_239e-12,
    2.265_853_574_692_576e-13,
    -1.172_550_969_848_801_5e-15,
    -7.044_133_820_024_552e-17,
    -2.437_787_831_010_769e-18,
    -7.522_524_321_821_69e-20,
];

fn chebyshev(coeffs: &[f64], y: f64) -> f64 {
    let y2 = 2.0 * y;
    let (mut d, mut dd) = (0.0, 0.0);
    for &c in coeffs[1..].iter().rev() {
        let tmp = d;
        d = y2 * d - dd + c;
        dd = tmp;
    }
    y * d - dd + 0.5 * coeffs[0]
}

/// Returns (Gamma(1+mu), Gamma(1-mu), Gamma_1, Gamma_2) for |mu| <= 1/2.
fn temme_gamma(mu: f64) -> (f64, f64, f64, f64) {
    let y = 4.0 * mu.abs() - 1.0;
    let g1 = chebyshev(&TEMME_G1, y);
    let g2 = chebyshev(&TEMME_G2, y);
    (1.0 / (g2 - mu * g1), 1.0 / (g2 + mu * g1), g1, g2)
}

/// `(K_mu(x), K_{mu+1}(x))` for |mu| <= 1/2, x <= 2, via Temme's series.
fn bessel_k_temme(mu: f64, x: f64) -> Result<(f64, f64)> {
    let half = 0.5 * x;
    let ln_half = half.ln();
    let half_pow = (mu * ln_half).exp();
    let pi_mu = PI * mu;
    let sigma = -mu * ln_half;
    let sinrat = if pi_mu.abs() < f64::EPSILON {
        1.0
    } else {
        pi_mu / pi_mu.sin()
    };
    let sinhrat = if sigma.abs() < f64::EPSILON {
        1.0
    } else {
        sigma.sinh() / sigma
    };
    let (gamma_plus, gamma_minus, g1, g2) = temme_gamma(mu);

    let mut f = sinrat * (sigma.cosh() * g1 - sinhrat * ln_half * g2);
    let mut p = 0.5 / half_pow * gamma_plus;
    let mut q = 0.5 * half_pow * gamma_minus;
    let mut c = 1.0;
    let mut sum0 = f;
    let mut sum1 = p;
    for k in 1..15_000 {
        let k = k as f64;
        f = (k * f + p + q) / (k * k - mu * mu);
        c *= half * half / k;
        p /= k - mu;
        q /= k + mu;
        let h = -k * f + p;
        let del0 = c * f;
        sum0 += del0;
        sum1 += c * h;
        if del0.abs() < 0.5 * sum0.abs() * f64::EPSILON {
            return Ok((sum0, sum1 * 2.0 / x));
        }
    }
    Err(Error::NonConvergence {
        op: "bessel_k",
        terms: 15_000,
    })
}

/// Scaled `(e^x K_mu(x), e^x K_{mu+1}(x))` for |mu| <= 1/2, x > 2, via
/// Steed's algorithm on the second continued fraction.
fn bessel_k_steed_scaled(mu: f64, x: f64) -> Result<(f64, f64)> {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q_prev = 0.0;
    let mut q = 1.0;
    let a1 = -(0.25 - mu * mu);
    let mut a = a1;
    let mut c = -a;
    let mut bq = -a;
    let mut s = 1.0 + bq * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let tmp = (q_prev - b * q) / a;
        q_prev = q;
        q = tmp;
        bq += c * q;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = bq * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            h *= -a1;
            let k_mu = (PI / (2.0 * x)).sqrt() / s;
            let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
            return Ok((k_mu, k_mu1));
        }
    }
    Err(Error::NonConvergence {
        op: "bessel_k",
        terms: 10_000,
    })
}

/// Modified Bessel function of the second kind `K_nu(x)`, `x > 0`.
///
/// `K` is even in `nu`, so negative orders are accepted. The order is split
/// as `nu = mu + m` with |mu| <= 1/2; `K_mu`, `K_{mu+1}` come from Temme's
/// series (x <= 2) or Steed's continued fraction (x > 2), then the forward
/// recurrence (stable for K) climbs to `nu`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let nu = RealOrder::new(nu)?.value().abs();
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_k", format!("x = {x} must be positive")));
    }
    let steps = (nu + 0.5).floor();
    let mu = nu - steps;
    let (mut k_lo, mut k_hi, scale) = if x <= 2.0 {
        let (a, b) = bessel_k_temme(mu, x)?;
        (a, b, 1.0)
    } else {
        let (a, b) = bessel_k_steed_scaled(mu, x)?;
        (a, b, (-x).exp())
    };
    for j in 0..steps as usize {
        let next = 2.0 * (mu + 1.0 + j as f64) / x * k_hi + k_lo;
        k_lo = k_hi;
        k_hi = next;
    }
    let value = k_lo * scale;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { op: "bessel_k" })
    }
}

fn check_b(op: &'static str, b: f64) -> Result<()> {
    if !b.is_finite() || (b <= 0.0 && b.fract() == 0.0) {
        return Err(Error::domain(op, format!("b = {b} is a non-positive integer")));
    }
    Ok(())
}

fn hyp1f1_series(a: Complex64, b: f64, x: Complex64, ctrl: &SeriesControl) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut stop = Stopper::new(ctrl.rel_tol);
    for k in 0..ctrl.max_terms {
        let k = k as f64;
        term *= (a + k) / ((b + k) * (k + 1.0)) * x;
        sum += term;
        if term == Complex64::new(0.0, 0.0) {
            // terminating series (a a non-positive integer)
            return Ok(sum);
        }
        if stop.done(term.norm(), sum.norm()) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        op: "hyp1f1",
        terms: ctrl.max_terms,
    })
}

/// Confluent hypergeometric function `1F1(a; b; x)` with default control.
pub fn hyp1f1(a: Complex64, b: f64, x: Complex64) -> Result<Complex64> {
    hyp1f1_with(a, b, x, &SeriesControl::default())
}

/// `1F1(a; b; x)`; for `Re x < 0` the sum is taken on the Kummer side
/// `e^x 1F1(b-a; b; -x)`.
pub fn hyp1f1_with(a: Complex64, b: f64, x: Complex64, ctrl: &SeriesControl) -> Result<Complex64> {
    check_b("hyp1f1", b)?;
    if x.re < 0.0 {
        Ok(x.exp() * hyp1f1_series(Complex64::new(b, 0.0) - a, b, -x, ctrl)?)
    } else {
        hyp1f1_series(a, b, x, ctrl)
    }
}

/// Direct power series of `1F1(a; b; x)` without the Kummer switch.
pub fn hyp1f1_direct(a: Complex64, b: f64, x: Complex64, ctrl: &SeriesControl) -> Result<Complex64> {
    check_b("hyp1f1", b)?;
    hyp1f1_series(a, b, x, ctrl)
}

/// Confluent limit function `0F1(; b; x)`.
pub fn hyp0f1(b: f64, x: Complex64) -> Result<Complex64> {
    check_b("hyp0f1", b)?;
    let ctrl = SeriesControl::default();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut stop = Stopper::new(ctrl.rel_tol);
    for k in 0..ctrl.max_terms {
        let k = k as f64;
        term *= x / ((b + k) * (k + 1.0));
        sum += term;
        if stop.done(term.norm(), sum.norm()) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        op: "hyp0f1",
        terms: ctrl.max_terms,
    })
}
