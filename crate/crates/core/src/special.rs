//! Scalar special functions used by the closed-form diffusion laws.
//!
//! The exponential integrals are evaluated as *scaled* functions
//! (`e^{-x} Ei(x)` and `e^{x} E1(x)`) wherever they are combined, so the
//! kernel `V(x)` never forms `e^{x}` as a separate factor.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::gauss::GaussLegendre;
use crate::thermal::ThermalContext;

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Positive root of Ei, split into a double and its residual.
const EI_ROOT_HI: f64 = 0.372_507_410_781_366_6;
const EI_ROOT_LO: f64 = 1.314_018_341_438_602_8e-17;
/// `e^{x0}/x0` at the root, the slope of Ei there.
const EI_ROOT_SLOPE: f64 = 3.896_215_733_907_167;
/// Half-width of the window around the root that is integrated directly.
const EI_ROOT_WINDOW: f64 = 0.1;

/// Beyond this argument the scaled exponential integrals use their asymptotic series.
const ASYMPTOTIC_SWITCH: f64 = 40.0;

fn root_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(24))
}

fn check_positive(func: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("argument must be finite and > 0, got {x}")))
    }
}

/// `sum_{k>=1} x^k / (k k!)`, the common power series of Ei and E1.
fn ei_power_tail(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= x / kf;
        let add = term / kf;
        sum += add;
        if add.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

/// `sum_k k! / x^k` truncated at its smallest term; `x` must be large.
fn asymptotic_factorial_series(x: f64, alternating: bool) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = term * k as f64 / x;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += if alternating && k % 2 == 1 { -term } else { term };
        if term <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

/// `e^{x} E1(x)` for x > 0.
pub fn scaled_e1(x: f64) -> Result<f64> {
    check_positive("scaled_e1", x)?;
    if x <= 1.0 {
        let e1 = -EULER_GAMMA - x.ln() - ei_power_tail(-x);
        return Ok(e1 * x.exp());
    }
    if x > ASYMPTOTIC_SWITCH {
        return Ok(asymptotic_factorial_series(x, true) / x);
    }
    // Modified Lentz evaluation of the continued fraction
    // E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...))).
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= 1e-16 {
            return Ok(h);
        }
    }
    Ok(h)
}

/// `e^{-x} Ei(x)` for x > 0, with Ei the principal-value integral.
pub fn scaled_ei(x: f64) -> Result<f64> {
    check_positive("scaled_ei", x)?;
    if x > ASYMPTOTIC_SWITCH {
        return Ok(asymptotic_factorial_series(x, false) / x);
    }
    Ok(ei_moderate(x) * (-x).exp())
}

/// Ei(x) for 0 < x <= ASYMPTOTIC_SWITCH.
fn ei_moderate(x: f64) -> f64 {
    if (x - EI_ROOT_HI).abs() < EI_ROOT_WINDOW {
        // Ei vanishes at the root: integrate e^s/s from the root to keep full
        // relative accuracy where the series would cancel.
        let integral = root_rule().integrate(|s| s.exp() / s, EI_ROOT_HI, x);
        return integral - EI_ROOT_LO * EI_ROOT_SLOPE;
    }
    EULER_GAMMA + x.ln() + ei_power_tail(x)
}

/// Principal-value exponential integral Ei(x) for x > 0.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    check_positive("exp_integral_ei", x)?;
    if x <= ASYMPTOTIC_SWITCH {
        return Ok(ei_moderate(x));
    }
    let scaled = asymptotic_factorial_series(x, false) / x;
    let value = scaled * x.exp();
    if value.is_finite() {
        Ok(value)
    } else {
        // e^x alone may overflow while the product would not.
        let half = (0.5 * x).exp();
        let value = scaled * half * half;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Overflow {
                func: "exp_integral_ei",
                x,
            })
        }
    }
}

/// E1(x) = -Ei(-x) for x > 0. Underflows gracefully to zero.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_positive("exp_integral_e1", x)?;
    if x <= 1.0 {
        return Ok(-EULER_GAMMA - x.ln() - ei_power_tail(-x));
    }
    let scaled = scaled_e1(x)?;
    let half = (-0.5 * x).exp();
    Ok(scaled * half * half)
}

/// The zero-temperature diffusion kernel
/// `V(x) = int_0^inf x^2 sin(u) / (x^2 + u^2) du = (x/2)[e^{-x} Ei(x) + e^{x} E1(x)]`.
///
/// `V` rises like `x^2 (1 - gamma_E - ln x)`, overshoots to about 1.140 near
/// x = 3.4, then settles to 1 from above as `1 + 2/x^2 + 24/x^4 + ...`.
pub fn v_function(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "v_function",
            format!("argument must be finite and >= 0, got {x}"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= 1.0 {
        // Expanded so the two logarithms cancel analytically:
        // e^{-x}Ei(x) + e^{x}E1(x) = -2(gamma + ln x) sinh x + e^{-x}A(x) - e^{x}A(-x).
        let log_part = -2.0 * (EULER_GAMMA + x.ln()) * x.sinh();
        let series = (-x).exp() * ei_power_tail(x) - x.exp() * ei_power_tail(-x);
        return Ok(0.5 * x * (log_part + series));
    }
    if x > ASYMPTOTIC_SWITCH {
        // Even terms of the two factorial series survive: sum_{k even} k!/x^k.
        let inv_sq = 1.0 / (x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            let next = term * (k + 1.0) * (k + 2.0) * inv_sq;
            if next >= term || next <= f64::EPSILON * sum {
                break;
            }
            term = next;
            sum += term;
            k += 2.0;
        }
        return Ok(sum);
    }
    Ok(0.5 * x * (scaled_ei(x)? + scaled_e1(x)?))
}

/// `coth(hbar*omega / 2 kB T)`, exactly 1 at zero temperature.
pub fn coth_thermal(omega: f64, ctx: &ThermalContext) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(
            "coth_thermal",
            format!("frequency must be > 0, got {omega}"),
        ));
    }
    if ctx.is_zero_temperature() {
        return Ok(1.0);
    }
    Ok(coth_reduced(ctx.hbar() * omega / (2.0 * ctx.kt())))
}

/// coth(y) for y > 0 with the Laurent series below 1e-2.
#[inline]
pub(crate) fn coth_reduced(y: f64) -> f64 {
    if y < 1e-2 {
        let y2 = y * y;
        1.0 / y + y / 3.0 - y * y2 / 45.0
    } else if y > 20.0 {
        1.0 + 2.0 * (-2.0 * y).exp()
    } else {
        1.0 / y.tanh()
    }
}

fn check_open_unit(func: &'static str, gamma: f64) -> Result<()> {
    if gamma > -1.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(
            func,
            format!("exponent must lie in (-1, 1), got {gamma}"),
        ))
    }
}

/// `cot(pi*gamma/2) / Gamma(gamma)` on (-1, 1).
///
/// Evaluated as `2 cos^2(pi*gamma/2) Gamma(1 - gamma) / pi` (reflection formula),
/// which is regular at gamma = 0 where it equals 2/pi.
pub fn cot_over_gamma(gamma: f64) -> Result<f64> {
    check_open_unit("cot_over_gamma", gamma)?;
    let c = (0.5 * PI * gamma).cos();
    Ok(2.0 * c * c * gamma_fn(1.0 - gamma) / PI)
}

/// Gamma(1 + gamma) for gamma in (-1, 1].
pub fn gamma_one_plus(gamma: f64) -> Result<f64> {
    if gamma > -1.0 && gamma <= 1.0 {
        Ok(gamma_fn(1.0 + gamma))
    } else {
        Err(Error::domain(
            "gamma_one_plus",
            format!("exponent must lie in (-1, 1], got {gamma}"),
        ))
    }
}

#[inline]
pub(crate) fn gamma_fn(x: f64) -> f64 {
    libm::tgamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // Reference values from 30-digit evaluations of the defining integrals.
    const EI_1: f64 = 1.895_117_816_355_936_8;
    const E1_1: f64 = 0.219_383_934_395_520_27;
    const V_1: f64 = 0.646_761_122_779_130_1;
    const V_100: f64 = 1.000_200_240_724_068_8;

    #[test]
    fn ei_and_e1_at_one() {
        assert!(rel(exp_integral_ei(1.0).unwrap(), EI_1) < 1e-14);
        assert!(rel(exp_integral_e1(1.0).unwrap(), E1_1) < 1e-14);
    }

    #[test]
    fn e1_small_argument_two_term_series() {
        let x: f64 = 1e-6;
        let two_term = -EULER_GAMMA - x.ln();
        // Next term of the series is +x; the residual must be of that order.
        let got = exp_integral_e1(x).unwrap();
        assert!((got - two_term - x).abs() < 1e-12);
        assert!(rel(got, two_term) < 1e-6);
    }

    #[test]
    fn ei_large_argument_leading_term() {
        let x = 500.0;
        let scaled = scaled_ei(x).unwrap();
        // The leading term alone is off by 1/x = 2e-3 here; the two-term form is tight.
        assert!(rel(scaled * x, 1.0) < 3e-3);
        assert!(rel(scaled * x, 1.0 + 1.0 / x) < 1e-5);
        assert!(rel(exp_integral_ei(x).unwrap().ln(), x - x.ln() + (scaled * x).ln()) < 1e-14);
    }

    #[test]
    fn ei_is_accurate_next_to_its_root() {
        // Ei(x0 + h) = h e^{x0}/x0 (1 + h (x0-1)/(2 x0) + ...)
        for h in [1e-3, 1e-5, -1e-4] {
            let x = EI_ROOT_HI + h;
            let x0 = EI_ROOT_HI;
            let approx = h * EI_ROOT_SLOPE * (1.0 + h * (x0 - 1.0) / (2.0 * x0));
            assert!(rel(exp_integral_ei(x).unwrap(), approx) < 1e-5, "h = {h}");
        }
    }

    #[test]
    fn series_and_fraction_agree_at_seams() {
        // E1: power series vs continued fraction either side of x = 1.
        let a = -EULER_GAMMA - 1.0f64.ln() - ei_power_tail(-1.0);
        let lentz = {
            let x = 1.0 + 1e-13;
            scaled_e1(x).unwrap() * (-x).exp()
        };
        assert!(rel(lentz, a) < 1e-12);
        // Ei: power series vs asymptotic series at the switch.
        let x = ASYMPTOTIC_SWITCH;
        let series = ei_moderate(x) * (-x).exp();
        let asym = asymptotic_factorial_series(x, false) / x;
        assert!(rel(series, asym) < 1e-13);
        // V: small-x expansion vs scaled closed form.
        let x = 1.0;
        let closed = 0.5 * x * (scaled_ei(x).unwrap() + scaled_e1(x).unwrap());
        assert!(rel(v_function(x).unwrap(), closed) < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(exp_integral_ei(0.0), Err(Error::Domain { .. })));
        assert!(matches!(exp_integral_e1(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(v_function(-1e-3), Err(Error::Domain { .. })));
        assert!(matches!(exp_integral_ei(800.0), Err(Error::Overflow { .. })));
        assert_eq!(exp_integral_e1(800.0).unwrap(), 0.0);
        assert!(cot_over_gamma(1.0).is_err());
        assert!(cot_over_gamma(-1.0).is_err());
        assert!(gamma_one_plus(-1.0).is_err());
        assert!(gamma_one_plus(1.0).is_ok());
        let ctx = ThermalContext::natural(1.0).unwrap();
        assert!(coth_thermal(0.0, &ctx).is_err());
    }

    #[test]
    fn v_reference_values() {
        assert_eq!(v_function(0.0).unwrap(), 0.0);
        assert!(rel(v_function(1.0).unwrap(), V_1) < 1e-12);
        assert!(rel(v_function(100.0).unwrap(), V_100) < 1e-12);
        assert!((v_function(100.0).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn v_small_argument_law() {
        let x: f64 = 1e-4;
        let ratio = v_function(x).unwrap() / (x * x);
        assert!(rel(ratio, 1.0 - EULER_GAMMA - x.ln()) < 1e-3);
    }

    #[test]
    fn v_large_argument_branch_is_continuous() {
        let below =
            0.5 * ASYMPTOTIC_SWITCH * (scaled_ei(ASYMPTOTIC_SWITCH).unwrap() + scaled_e1(ASYMPTOTIC_SWITCH).unwrap());
        let above = v_function(ASYMPTOTIC_SWITCH * (1.0 + 1e-15)).unwrap();
        assert!(rel(above, below) < 1e-13);
        let x = 1e4;
        assert!(rel(v_function(x).unwrap(), 1.0 + 2.0 / (x * x)) < 1e-14);
    }

    #[test]
    fn coth_cases() {
        let zero = ThermalContext::zero();
        assert_eq!(coth_thermal(3.7, &zero).unwrap(), 1.0);
        let ctx = ThermalContext::natural(0.5).unwrap();
        // y = omega / (2 T) = 1e-6
        let y: f64 = 1e-6;
        let got = coth_thermal(y, &ctx).unwrap();
        assert!(rel(got, 1.0 / y + y / 3.0) < 1e-12);
        // y = 1 against (e^2+1)/(e^2-1)
        let e2 = 2.0f64.exp();
        assert!(rel(coth_thermal(1.0, &ctx).unwrap(), (e2 + 1.0) / (e2 - 1.0)) < 1e-15);
    }

    #[test]
    fn coth_branches_meet() {
        for y in [1e-2, 20.0] {
            let lo = coth_reduced(y * (1.0 - 1e-12));
            let hi = coth_reduced(y * (1.0 + 1e-12));
            assert!(rel(lo, hi) < 1e-10, "y = {y}");
        }
    }

    #[test]
    fn cot_over_gamma_values() {
        assert!(rel(cot_over_gamma(0.0).unwrap(), 2.0 / PI) < 1e-15);
        assert!(cot_over_gamma(1.0 - 1e-6).unwrap().abs() < 1e-5);
        assert!(rel(cot_over_gamma(0.5).unwrap(), 1.0 / PI.sqrt()) < 1e-14);
        // direct evaluation away from zero
        for g in [-0.7, -0.3, 0.2, 0.6, 0.9] {
            let direct = 1.0 / (0.5 * PI * g).tan() / libm::tgamma(g);
            assert!(rel(cot_over_gamma(g).unwrap(), direct) < 1e-13, "gamma = {g}");
        }
    }

    #[test]
    fn gamma_one_plus_values() {
        assert_eq!(gamma_one_plus(0.0).unwrap(), 1.0);
        assert!(rel(gamma_one_plus(1.0).unwrap(), 1.0) < 1e-15);
        // Legendre duplication at z = 1/2: Gamma(1/2) Gamma(1) = 2^{0} sqrt(pi) Gamma(1)
        assert!(rel(gamma_one_plus(-0.5).unwrap(), PI.sqrt()) < 1e-14);
        // Reflection: Gamma(1+g) Gamma(1-g) = pi g / sin(pi g)
        for g in [0.1, 0.37, 0.8] {
            let lhs = gamma_one_plus(g).unwrap() * gamma_one_plus(-g).unwrap();
            assert!(rel(lhs, PI * g / (PI * g).sin()) < 1e-13);
        }
    }
}
