//! Semi-infinite oscillatory integrals `int_0^inf f(w) K(w t) dw`.
//!
//! The integral is rescaled to `u = w t` and cut at the zeros of the kernel
//! into half-period panels `[k pi, (k+1) pi]`:
//!
//! * the first panel carries the endpoint behaviour `f(w) ~ w^{-p}` and is
//!   integrated on a geometrically graded mesh toward `u = 0`, closing the
//!   innermost gap with the power-law remainder;
//! * panels below the caller's *asymptotic onset* frequency are summed
//!   directly, so every feature of `f` is resolved explicitly;
//! * beyond the onset the panel integrals form an eventually alternating
//!   sequence whose partial sums are accelerated with Wynn's epsilon
//!   algorithm on a sliding window.
//!
//! The same acceleration assigns the Abel value to conditionally divergent
//! tails, which is what [`integrate_zero_t_formal`] relies on.

use std::f64::consts::PI;

use crate::accel::{wynn_epsilon, CompensatedSum};
use crate::error::{Error, Result};
use crate::gauss::GaussLegendre;

/// Trigonometric factor of the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Sin,
    Cos,
    /// `1 - cos(w t)`, the mean-square-displacement kernel.
    OneMinusCos,
}

impl Kernel {
    #[inline]
    fn eval(self, u: f64) -> f64 {
        match self {
            Kernel::Sin => u.sin(),
            Kernel::Cos => u.cos(),
            Kernel::OneMinusCos => {
                let s = (0.5 * u).sin();
                2.0 * s * s
            }
        }
    }

    /// Power of `u` with which the kernel vanishes at the origin.
    fn origin_order(self) -> f64 {
        match self {
            Kernel::Sin => 1.0,
            Kernel::Cos => 0.0,
            Kernel::OneMinusCos => 2.0,
        }
    }
}

/// Tolerances and budgets for the oscillatory integrator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Budget for accelerated panels beyond the asymptotic onset.
    pub max_half_periods: usize,
    /// Gauss-Legendre nodes per panel.
    pub panel_order: usize,
    /// Number of even epsilon-table columns used by the accelerator.
    pub accel_depth: usize,
    /// `p` in `f(w) ~ w^{-p}` as `w -> 0`.
    pub endpoint_exponent: f64,
    /// Frequency beyond which `f` has no more structure than a smooth
    /// power-law tail. Panels below it are summed without acceleration.
    pub asymptotic_onset: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_half_periods: 10_000,
            panel_order: 15,
            accel_depth: 12,
            endpoint_exponent: 0.0,
            asymptotic_onset: 0.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_endpoint_exponent(mut self, p: f64) -> Self {
        self.endpoint_exponent = p;
        self
    }

    pub fn with_onset(mut self, omega: f64) -> Self {
        self.asymptotic_onset = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::domain("QuadratureSpec", msg));
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol));
        }
        if !(self.abs_tol >= 0.0) {
            return bad(format!("abs_tol must be >= 0, got {}", self.abs_tol));
        }
        if self.panel_order < 2 || self.panel_order > 64 {
            return bad(format!("panel_order must lie in [2, 64], got {}", self.panel_order));
        }
        if self.accel_depth < 2 {
            return bad(format!("accel_depth must be >= 2, got {}", self.accel_depth));
        }
        if self.max_half_periods < 4 * self.accel_depth {
            return bad(format!(
                "max_half_periods must be at least 4 * accel_depth = {}",
                4 * self.accel_depth
            ));
        }
        if !self.endpoint_exponent.is_finite() {
            return bad("endpoint_exponent must be finite".into());
        }
        if !(self.asymptotic_onset >= 0.0 && self.asymptotic_onset.is_finite()) {
            return bad(format!(
                "asymptotic_onset must be finite and >= 0, got {}",
                self.asymptotic_onset
            ));
        }
        Ok(())
    }
}

/// Outcome of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub err_estimate: f64,
    pub half_periods_used: usize,
    pub converged: bool,
}

impl IntegralResult {
    /// Turns an unconverged result into [`Error::NonConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                value: self.value,
                err_estimate: self.err_estimate,
                half_periods: self.half_periods_used,
            })
        }
    }

    /// Multiplies value and error by a constant.
    pub fn scaled(self, c: f64) -> Self {
        IntegralResult {
            value: self.value * c,
            err_estimate: self.err_estimate * c.abs(),
            ..self
        }
    }
}

/// Hard cap on directly summed panels below the onset.
const MAX_RESOLVED_PANELS: usize = 50_000_000;
/// Cap on graded levels toward either endpoint.
const MAX_LEVELS: usize = 400;

/// `int_0^inf f(w) K(w t) dw` for `f` decaying at infinity.
///
/// Terms of the accelerated tail must shrink; a non-decaying tail is
/// reported as [`Error::NonConvergence`]. Use [`integrate_zero_t_formal`]
/// when `f` tends to a nonzero constant.
pub fn integrate_oscillatory<F>(f: F, kernel: Kernel, t: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    Integrator::new(spec, kernel, t, true)?.run(&f)
}

/// Same as [`integrate_oscillatory`] but admits `f` tending to a constant at
/// infinity. The conditionally divergent tail is summed in the Abel sense,
/// i.e. the result equals `lim_{eps->0} int_0^inf f(w) e^{-eps w} K(w t) dw`.
/// For example `int_0^inf sin(w t) dw = 1/t`.
pub fn integrate_zero_t_formal<F>(f: F, kernel: Kernel, t: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    if kernel == Kernel::OneMinusCos {
        return Err(Error::domain(
            "integrate_zero_t_formal",
            "the 1 - cos kernel has no Abel-summable form for non-decaying f",
        ));
    }
    Integrator::new(spec, kernel, t, false)?.run(&f)
}

/// Non-oscillatory `int_0^inf f(w) dw` for `f ~ w^{-p}` at the origin
/// (`p < 1`) and `f` decaying faster than `1/w` at infinity.
///
/// `scale` is the frequency where `f` turns over; the integral is split
/// there into dyadic intervals graded toward both ends.
pub fn integrate_half_line<F>(f: F, scale: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    let p = spec.endpoint_exponent;
    if p >= 1.0 {
        return Err(Error::domain(
            "integrate_half_line",
            format!("endpoint exponent {p} is not integrable (needs p < 1)"),
        ));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(
            "integrate_half_line",
            format!("scale must be > 0, got {scale}"),
        ));
    }
    let rule = GaussLegendre::new(spec.panel_order);
    let tol = |v: f64| (spec.rel_tol * v.abs()).max(spec.abs_tol);
    let dyadic = |lo: f64| {
        let mut acc = 0.0;
        let h = 0.25 * lo;
        for i in 0..4 {
            let a = lo + i as f64 * h;
            acc += rule.integrate(&f, a, a + h);
        }
        acc
    };

    let mut total = CompensatedSum::new();
    let mut err = 0.0;
    let mut converged = true;

    // Inward: [s 2^{-j-1}, s 2^{-j}] with the pure power-law remainder.
    let ratio = 0.5f64.powf(1.0 - p);
    let mut hi = scale;
    let mut inward_done = false;
    let mut remainder = 0.0;
    for level in 0..MAX_LEVELS {
        let lo = 0.5 * hi;
        let piece = dyadic(lo);
        total.add(piece);
        hi = lo;
        remainder = piece * ratio / (1.0 - ratio);
        if level >= 4 && remainder.abs() <= (1e-3 * tol(total.value())).max(f64::EPSILON * total.magnitude()) {
            inward_done = true;
            break;
        }
    }
    total.add(remainder);
    err += 0.1 * remainder.abs();
    converged &= inward_done;

    // Outward: [s 2^j, s 2^{j+1}] until the geometric remainder is negligible.
    let mut lo = scale;
    let mut last = f64::NAN;
    let mut outward_done = false;
    for level in 0..MAX_LEVELS {
        let piece = dyadic(lo);
        total.add(piece);
        lo *= 2.0;
        if level >= 3 && last != 0.0 {
            let r = (piece / last).abs();
            if r < 1.0 {
                let rem = piece * r / (1.0 - r);
                if rem.abs() <= (1e-3 * tol(total.value())).max(f64::EPSILON * total.magnitude()) {
                    total.add(rem);
                    err += rem.abs();
                    outward_done = true;
                    break;
                }
            }
        }
        last = piece;
    }
    converged &= outward_done;

    let value = total.value();
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            value,
            err_estimate: f64::INFINITY,
            half_periods: 0,
        });
    }
    let err_estimate = err + 8.0 * f64::EPSILON * total.magnitude();
    Ok(IntegralResult {
        value,
        err_estimate,
        half_periods_used: 0,
        converged: converged && err_estimate <= tol(value).max(8.0 * f64::EPSILON * total.magnitude()),
    })
}

struct Integrator<'a> {
    spec: &'a QuadratureSpec,
    rule: GaussLegendre,
    kernel: Kernel,
    t: f64,
    strict: bool,
}

impl<'a> Integrator<'a> {
    fn new(spec: &'a QuadratureSpec, kernel: Kernel, t: f64, strict: bool) -> Result<Self> {
        spec.validate()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(
                "integrate_oscillatory",
                format!("time must be finite and > 0, got {t}"),
            ));
        }
        let q = kernel.origin_order() - spec.endpoint_exponent;
        if q <= -1.0 {
            return Err(Error::domain(
                "integrate_oscillatory",
                format!(
                    "endpoint exponent {} is not integrable against {kernel:?} (needs p < {})",
                    spec.endpoint_exponent,
                    kernel.origin_order() + 1.0
                ),
            ));
        }
        Ok(Integrator {
            spec,
            rule: GaussLegendre::new(spec.panel_order),
            kernel,
            t,
            strict,
        })
    }

    fn tol(&self, value: f64) -> f64 {
        (self.spec.rel_tol * value.abs()).max(self.spec.abs_tol)
    }

    /// Integrand in the rescaled variable, without the overall 1/t.
    #[inline]
    fn h<'f, F: Fn(f64) -> f64>(&self, f: &'f F) -> impl Fn(f64) -> f64 + 'f {
        let t = self.t;
        let kernel = self.kernel;
        move |u| f(u / t) * kernel.eval(u)
    }

    /// Panel `[k pi, (k+1) pi]` in the local variable `x = u - k pi`, so the
    /// kernel is evaluated at `x` exactly rather than at a large rounded `u`.
    fn panel<F: Fn(f64) -> f64>(&self, f: &F, k: usize) -> f64 {
        let a = k as f64 * PI;
        let t = self.t;
        let odd = k % 2 == 1;
        let sign = if odd { -1.0 } else { 1.0 };
        match self.kernel {
            Kernel::Sin => sign * self.rule.integrate(|x| f((a + x) / t) * x.sin(), 0.0, PI),
            Kernel::Cos => sign * self.rule.integrate(|x| f((a + x) / t) * x.cos(), 0.0, PI),
            Kernel::OneMinusCos => self.rule.integrate(
                |x| {
                    let s = if odd { (0.5 * x).cos() } else { (0.5 * x).sin() };
                    2.0 * s * s * f((a + x) / t)
                },
                0.0,
                PI,
            ),
        }
    }

    fn run<F: Fn(f64) -> f64>(&self, f: &F) -> Result<IntegralResult> {
        let (first, first_err) = self.first_panel(f)?;

        let onset_panels = (self.spec.asymptotic_onset * self.t / PI).ceil();
        if onset_panels > MAX_RESOLVED_PANELS as f64 {
            return Err(Error::NonConvergence {
                value: f64::NAN,
                err_estimate: f64::INFINITY,
                half_periods: MAX_RESOLVED_PANELS,
            });
        }
        let k0 = (onset_panels as usize).max(2);

        let mut resolved = CompensatedSum::new();
        resolved.add(first);
        for k in 1..k0 {
            resolved.add(self.panel(f, k));
        }

        let tail = match self.kernel {
            Kernel::OneMinusCos => {
                // int_A^inf g (1 - cos u) = int_A^inf g - int_A^inf g cos u
                let a = k0 as f64 * PI;
                let (plain, plain_err) = self.monotone_tail(f, a, resolved.value())?;
                let cos_tail = Integrator {
                    spec: self.spec,
                    rule: self.rule.clone(),
                    kernel: Kernel::Cos,
                    t: self.t,
                    strict: true,
                }
                .accelerated_tail(f, k0, resolved.value() + plain)?;
                TailResult {
                    value: plain - cos_tail.value,
                    err: plain_err + cos_tail.err,
                    panels: cos_tail.panels,
                    converged: cos_tail.converged,
                }
            }
            _ => self.accelerated_tail(f, k0, resolved.value())?,
        };

        let value = (resolved.value() + tail.value) / self.t;
        let rounding = 8.0 * f64::EPSILON * (resolved.magnitude() + tail.value.abs()) / self.t;
        let err_estimate = (first_err + tail.err) / self.t + rounding;
        if !value.is_finite() {
            return Err(Error::NonConvergence {
                value,
                err_estimate: f64::INFINITY,
                half_periods: k0 + tail.panels,
            });
        }
        let converged = tail.converged && err_estimate <= self.tol(value).max(rounding);
        Ok(IntegralResult {
            value,
            err_estimate,
            half_periods_used: k0 + tail.panels,
            converged,
        })
    }

    /// Integral over [0, pi] on the mesh `[pi 2^{-j-1}, pi 2^{-j}]`; the
    /// remaining sliver is closed with the geometric remainder of a pure
    /// power law `u^q`.
    fn first_panel<F: Fn(f64) -> f64>(&self, f: &F) -> Result<(f64, f64)> {
        let q = self.kernel.origin_order() - self.spec.endpoint_exponent;
        let ratio = 0.5f64.powf(q + 1.0);
        let h = self.h(f);
        let mut total = CompensatedSum::new();
        let mut hi = PI;
        let mut remainder = f64::INFINITY;
        for level in 0..MAX_LEVELS {
            let lo = 0.5 * hi;
            let piece = self.rule.integrate(&h, lo, hi);
            if !piece.is_finite() {
                return Err(Error::NonConvergence {
                    value: piece,
                    err_estimate: f64::INFINITY,
                    half_periods: 1,
                });
            }
            total.add(piece);
            hi = lo;
            remainder = piece * ratio / (1.0 - ratio);
            let small = 1e-3 * self.tol(total.value() / self.t) * self.t;
            if level >= 4 && remainder.abs() <= small.max(f64::EPSILON * total.magnitude()) {
                break;
            }
        }
        Ok((total.value() + remainder, 0.1 * remainder.abs()))
    }

    /// `int_a^inf g(u) du` on geometrically growing intervals.
    fn monotone_tail<F: Fn(f64) -> f64>(&self, f: &F, a: f64, scale: f64) -> Result<(f64, f64)> {
        let t = self.t;
        let g = move |u: f64| f(u / t);
        let mut total = CompensatedSum::new();
        let mut lo = a;
        let mut last = f64::NAN;
        let mut remainder = f64::INFINITY;
        for level in 0..MAX_LEVELS {
            let hi = 2.0 * lo;
            let piece = self.rule.integrate(g, lo, hi);
            total.add(piece);
            if level >= 3 && last != 0.0 {
                let r = (piece / last).abs();
                if r < 1.0 {
                    remainder = piece * r / (1.0 - r);
                    let small = 1e-3 * self.tol((scale + total.value()) / t) * t;
                    if remainder.abs() <= small.max(f64::EPSILON * total.magnitude()) {
                        return Ok((total.value() + remainder, remainder.abs()));
                    }
                }
            }
            last = piece;
            lo = hi;
        }
        Err(Error::NonConvergence {
            value: total.value(),
            err_estimate: remainder.abs(),
            half_periods: 0,
        })
    }

    /// Accelerated sum of panels `k0, k0+1, ...`; `base` is everything before
    /// (in the rescaled variable) and only sets the tolerance scale.
    fn accelerated_tail<F: Fn(f64) -> f64>(&self, f: &F, k0: usize, base: f64) -> Result<TailResult> {
        let depth = self.spec.accel_depth;
        let window = 2 * depth + 2;
        let step = (depth / 2).max(2);
        let budget = self.spec.max_half_periods;

        let mut sums: Vec<f64> = Vec::with_capacity(window + 8 * step);
        let mut terms: Vec<f64> = Vec::with_capacity(window + 8 * step);
        let mut running = CompensatedSum::new();
        let mut previous: Option<f64> = None;
        let mut best = TailResult {
            value: f64::NAN,
            err: f64::INFINITY,
            panels: 0,
            converged: false,
        };
        let mut k = k0;
        while k - k0 < budget {
            let a = self.panel(f, k);
            if !a.is_finite() {
                return Err(Error::NonConvergence {
                    value: a,
                    err_estimate: f64::INFINITY,
                    half_periods: k,
                });
            }
            running.add(a);
            sums.push(running.value());
            terms.push(a);
            k += 1;
            let n = sums.len();
            if n < window || !(n - window).is_multiple_of(step) {
                continue;
            }
            if self.strict {
                let first = terms[n - window].abs();
                let last = terms[n - 1].abs();
                if last > 0.0 && last >= first * (1.0 - 1e-12) {
                    return Err(Error::NonConvergence {
                        value: running.value(),
                        err_estimate: f64::INFINITY,
                        half_periods: k,
                    });
                }
            }
            let ex = wynn_epsilon(&sums[n - window..], Some(depth));
            if !ex.value.is_finite() {
                continue;
            }
            let drift = previous.map_or(f64::INFINITY, |p| (ex.value - p).abs());
            let err = ex.error.max(drift);
            previous = Some(ex.value);
            if err < best.err {
                best = TailResult {
                    value: ex.value,
                    err,
                    panels: n,
                    converged: false,
                };
            }
            // Partial sums become exact once terms drop below rounding.
            let floor = 4.0 * f64::EPSILON * running.magnitude();
            if err <= (1e-1 * self.tol((base + ex.value) / self.t) * self.t).max(floor) {
                best.converged = true;
                best.panels = n;
                return Ok(best);
            }
        }
        best.panels = k - k0;
        if best.value.is_nan() {
            best.value = running.value();
        }
        Ok(best)
    }
}

struct TailResult {
    value: f64,
    err: f64,
    panels: usize,
    converged: bool,
}

/// Partial sums `S_n = int_0^{(n+1) pi} f(u) sin(u) du` in the rescaled
/// variable, no acceleration.
#[cfg(test)]
fn half_period_partial_sums<F: Fn(f64) -> f64>(f: F, t: f64, spec: &QuadratureSpec, n: usize) -> Vec<f64> {
    let integ = Integrator::new(spec, Kernel::Sin, t, true).unwrap();
    let (first, _) = integ.first_panel(&f).unwrap();
    let mut s = first;
    let mut out = vec![s / t];
    for k in 1..n {
        s += integ.panel(&f, k);
        out.push(s / t);
    }
    out
}
