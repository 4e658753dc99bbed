//! Fluctuation-dissipation observables of a particle coupled to a bath.
//!
//! Every observable is a cosine or sine transform of `Im alpha(w + i0)`:
//!
//! | observable      | integrand                                  | kernel      |
//! |-----------------|--------------------------------------------|-------------|
//! | correlation     | `(hbar/pi) Im alpha coth`                  | `cos wt`    |
//! | `s(t)`          | `(2 hbar/pi) Im alpha coth`                | `1 - cos wt`|
//! | `ds/dt`         | `(2 hbar/pi) w Im alpha coth`              | `sin wt`    |
//! | commutator `C`  | `(2 hbar/pi) Im alpha`                     | `sin wt`    |
//!
//! with `coth = coth(hbar w / 2 kB T)`, set to 1 at `T = 0` before anything
//! else is done. The regular part of the spectrum goes to the oscillatory
//! quadrature; `delta'` and `delta` terms are evaluated in closed form.
//!
//! # Endpoint exponents
//!
//! Near `w = 0` the regular part behaves as `w^{-p_reg}` with `p_reg = 1` for
//! the Ohmic and QED baths and `1 + gamma` for the power law. The thermal
//! factor adds one power (`coth ~ 2kT/hbar w`) and the rate loses one
//! (the explicit `w`), so for example the finite-T Ohmic rate integrand tends
//! to a constant times `1/w` (p = 1) while the zero-T one is finite (p = 0).
//!
//! # Mass renormalization
//!
//! At maximal QED coupling (`m = 0`) the rate integrand tends to a constant
//! and its sine transform exists only in the Abel sense; it is evaluated
//! with [`integrate_zero_t_formal`]. The resulting `2 hbar tau_e/(pi M t)`
//! reads `1/t` as a principal value, and the finite-T form diverges as
//! `t -> 0`. Both are quantum effects of mass renormalization and are
//! returned as they are. The mean-square displacement itself is
//! ultraviolet divergent in that limit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bath::{BathModel, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, integrate_oscillatory, integrate_zero_t_formal, Kernel, QuadratureSpec};
use crate::special::{cot_over_gamma, coth_reduced, gamma_fn, v_function, EULER_GAMMA};
use crate::thermal::ThermalContext;

/// Onset of the accelerated tail in units of the bath frequency scale.
const ONSET_MODEL: f64 = 8.0;
/// Onset in units of `kB T / hbar`; `coth - 1 < 1e-8` beyond it.
const ONSET_THERMAL: f64 = 20.0;

/// Which fluctuation-dissipation integral to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// Symmetrized `<x(t) x(0)>`.
    Correlation,
    /// Mean-square displacement `s(t) = <[x(t) - x(0)]^2>`.
    Msd,
    /// `ds/dt`.
    MsdRate,
    /// `C(t)` with `[x(0), x(t)] = i C(t)`.
    Commutator,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Correlation => "correlation",
            Observable::Msd => "msd",
            Observable::MsdRate => "msd-rate",
            Observable::Commutator => "commutator",
        }
    }

    fn kernel(self) -> Kernel {
        match self {
            Observable::Correlation => Kernel::Cos,
            Observable::Msd => Kernel::OneMinusCos,
            Observable::MsdRate | Observable::Commutator => Kernel::Sin,
        }
    }

    fn prefactor(self, hbar: f64) -> f64 {
        match self {
            Observable::Correlation => hbar / PI,
            _ => 2.0 * hbar / PI,
        }
    }

    fn thermal(self) -> bool {
        self != Observable::Commutator
    }
}

/// A value with an absolute error estimate (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_estimate: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            err_estimate: 0.0,
        }
    }
}

/// Evaluates `obs` at lag `t`. The commutator ignores the temperature.
///
/// `spec` supplies tolerances and budgets; its endpoint exponent is replaced
/// by the model-derived one and its onset is raised to at least the bath and
/// thermal scales.
pub fn evaluate(
    model: &BathModel,
    ctx: &ThermalContext,
    obs: Observable,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    model.validate_params()?;
    if !t.is_finite() || t < 0.0 || (obs == Observable::MsdRate && t == 0.0) {
        let need = if obs == Observable::MsdRate { "> 0" } else { ">= 0" };
        return Err(Error::domain(
            obs.name(),
            format!("time must be finite and {need}, got {t}"),
        ));
    }
    if t == 0.0 && matches!(obs, Observable::Msd | Observable::Commutator) {
        return Ok(Estimate::exact(0.0));
    }
    let ctx = if obs.thermal() {
        *ctx
    } else {
        ThermalContext::with_units(0.0, ctx.hbar(), ctx.kb())?
    };
    let spectrum = model.im_alpha_boundary();

    let mut value = distributional_part(&spectrum, &ctx, obs, t)?;
    let mut err = 0.0;
    if spectrum.has_regular_part() {
        let r = regular_part(model, &spectrum, &ctx, obs, t, spec)?;
        value += r.value;
        err += r.err_estimate;
    }
    Ok(Estimate {
        value,
        err_estimate: err,
    })
}

/// Contribution of the `delta'` and `delta` terms of `Im alpha`.
fn distributional_part(spectrum: &SpectralDecomposition, ctx: &ThermalContext, obs: Observable, t: f64) -> Result<f64> {
    let hbar = ctx.hbar();
    let kt = ctx.kt();
    let mut total = 0.0;
    let c1 = spectrum.delta_prime_coeff;
    if c1 != 0.0 {
        // int_0^inf delta'(w) g(w) dw = -g'(0)/2, with g the full integrand.
        total += match obs {
            Observable::MsdRate => -c1 * 2.0 * kt * t / PI,
            Observable::Msd => -c1 * kt * t * t / PI,
            Observable::Commutator => -c1 * hbar * t / PI,
            Observable::Correlation => {
                return Err(Error::DivergentObservable(
                    "the equal-time variance of an unbound particle is infinite; use msd".into(),
                ))
            }
        };
    }
    for &(w0, weight) in &spectrum.delta_pairs {
        let coth = if obs.thermal() { coth_at(w0, ctx) } else { 1.0 };
        let kernel = match obs {
            Observable::Correlation => (w0 * t).cos(),
            Observable::Msd => 1.0 - (w0 * t).cos(),
            Observable::MsdRate => w0 * (w0 * t).sin(),
            Observable::Commutator => (w0 * t).sin(),
        };
        total += weight * obs.prefactor(hbar) * coth * kernel;
    }
    Ok(total)
}

#[inline]
fn coth_at(omega: f64, ctx: &ThermalContext) -> f64 {
    if ctx.is_zero_temperature() {
        1.0
    } else {
        coth_reduced(ctx.hbar() * omega / (2.0 * ctx.kt()))
    }
}

fn divergent(model: &BathModel, obs: Observable, why: &str) -> Error {
    Error::DivergentObservable(format!("{} for the {} model: {why}", obs.name(), model.name()))
}

fn regular_part(
    model: &BathModel,
    spectrum: &SpectralDecomposition,
    ctx: &ThermalContext,
    obs: Observable,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let thermal = obs.thermal() && !ctx.is_zero_temperature();
    let mut p = spectrum.regular_endpoint_exponent();
    if obs == Observable::MsdRate {
        p -= 1.0;
    }
    if thermal {
        p += 1.0;
    }
    let flat_tail = spectrum.rate_tail_is_flat();
    match obs {
        Observable::Correlation if p >= 1.0 => {
            return Err(divergent(
                model,
                obs,
                "infrared divergence of the cosine transform; use msd",
            ));
        }
        Observable::Msd | Observable::Correlation if flat_tail => {
            return Err(divergent(model, obs, "ultraviolet divergence at zero bare mass"));
        }
        _ => {}
    }

    let onset = (ONSET_MODEL * model.frequency_scale()).max(ONSET_THERMAL * ctx.thermal_frequency());
    let spec = spec
        .with_endpoint_exponent(p)
        .with_onset(spec.asymptotic_onset.max(onset));
    let hbar = ctx.hbar();
    let pre = obs.prefactor(hbar);
    let rate = obs == Observable::MsdRate;
    let use_coth = obs.thermal();
    let f = |w: f64| {
        let mut v = pre * spectrum.regular(w);
        if rate {
            v *= w;
        }
        if use_coth {
            v *= coth_at(w, ctx);
        }
        v
    };

    let result = if obs == Observable::Correlation && t == 0.0 {
        integrate_half_line(f, model.frequency_scale(), &spec)?
    } else if rate && flat_tail {
        integrate_zero_t_formal(f, obs.kernel(), t, &spec)?
    } else {
        integrate_oscillatory(f, obs.kernel(), t, &spec)?
    };
    let r = result.require_converged()?;
    Ok(Estimate {
        value: r.value,
        err_estimate: r.err_estimate,
    })
}

/// Symmetrized position correlation `<x(t)x(0) + x(0)x(t)>/2`.
///
/// Finite for the harmonic model and for the power law with `gamma < 0` at
/// zero temperature; every other model gives [`Error::DivergentObservable`].
pub fn position_correlation(
    model: &BathModel,
    ctx: &ThermalContext,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    evaluate(model, ctx, Observable::Correlation, t, spec)
}

/// Mean-square displacement `s(t)`; `s(0) = 0` exactly.
pub fn msd(model: &BathModel, ctx: &ThermalContext, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    evaluate(model, ctx, Observable::Msd, t, spec)
}

/// `ds/dt` for `t > 0`.
pub fn msd_rate(model: &BathModel, ctx: &ThermalContext, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    evaluate(model, ctx, Observable::MsdRate, t, spec)
}

/// `C(t)` where `[x(0), x(t)] = i C(t)`. Temperature independent.
pub fn commutator_magnitude(model: &BathModel, hbar: f64, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let ctx = ThermalContext::with_units(0.0, hbar, 1.0)?;
    evaluate(model, &ctx, Observable::Commutator, t, spec)
}

/// Exact zero-temperature `ds/dt`:
///
/// * Ohmic: `(2 hbar / pi zeta t) V(zeta t / m)`
/// * QED: `(2 hbar tau_e / pi M t) V((M - m) t / m tau_e)`, and
///   `2 hbar tau_e / (pi M t)` at `m = 0` (a principal value at `t = 0`)
/// * free particle: 0
/// * harmonic: `(hbar/m) sin(b t)`
///
/// The power law has no closed form and gives a domain error.
pub fn msd_rate_closed_zero_t(model: &BathModel, hbar: f64, t: f64) -> Result<f64> {
    model.validate_params()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(
            "msd_rate_closed_zero_t",
            format!("time must be > 0, got {t}"),
        ));
    }
    match *model {
        BathModel::Ohmic { zeta, mass } => Ok(2.0 * hbar / (PI * zeta * t) * v_function(zeta * t / mass)?),
        BathModel::Qed {
            renormalized_mass: big_m,
            bare_mass: m,
            tau_e,
        } => {
            let pre = 2.0 * hbar * tau_e / (PI * big_m * t);
            if m == 0.0 {
                Ok(pre)
            } else if m == big_m {
                Ok(0.0)
            } else {
                Ok(pre * v_function((big_m - m) * t / (m * tau_e))?)
            }
        }
        BathModel::FreeParticle { .. } => Ok(0.0),
        BathModel::Harmonic { mass, b } => Ok(hbar / mass * (b * t).sin()),
        BathModel::PowerLaw { .. } => Err(Error::domain(
            "msd_rate_closed_zero_t",
            "the power-law bath has no closed form; use msd_rate",
        )),
    }
}

/// Exact closed forms, where one exists, evaluated without quadrature.
/// Returns `Ok(None)` when there is none for this model and observable.
pub fn closed_form(model: &BathModel, ctx: &ThermalContext, obs: Observable, t: f64) -> Result<Option<f64>> {
    model.validate_params()?;
    let hbar = ctx.hbar();
    let kt = ctx.kt();
    let zero_t = ctx.is_zero_temperature();
    let value = match (*model, obs) {
        (BathModel::FreeParticle { mass }, Observable::Msd) => Some(kt * t * t / mass),
        (BathModel::FreeParticle { mass }, Observable::MsdRate) => Some(2.0 * kt * t / mass),
        (BathModel::FreeParticle { mass }, Observable::Commutator) => Some(hbar * t / mass),
        (BathModel::Harmonic { mass, b }, obs) => {
            let coth = if obs == Observable::Commutator {
                1.0
            } else {
                coth_at(b, ctx)
            };
            let a = hbar / (mass * b);
            Some(match obs {
                Observable::Correlation => 0.5 * a * coth * (b * t).cos(),
                Observable::Msd => a * coth * (1.0 - (b * t).cos()),
                Observable::MsdRate => hbar / mass * coth * (b * t).sin(),
                Observable::Commutator => a * (b * t).sin(),
            })
        }
        (
            BathModel::Qed {
                renormalized_mass: big_m,
                bare_mass: m,
                tau_e,
            },
            Observable::Commutator,
        ) => {
            if t == 0.0 {
                Some(0.0)
            } else if m == 0.0 {
                Some(hbar / big_m * (t + tau_e))
            } else {
                let a = (big_m - m) / (m * tau_e);
                Some(hbar / big_m * (t + tau_e * -(-a * t).exp_m1()))
            }
        }
        (
            BathModel::Qed {
                renormalized_mass: big_m,
                bare_mass,
                tau_e,
            },
            Observable::MsdRate,
        ) if bare_mass == 0.0 && t > 0.0 => {
            if zero_t {
                Some(2.0 * hbar * tau_e / (PI * big_m * t))
            } else {
                let y = PI * kt * t / hbar;
                Some(2.0 * kt / big_m * (t + tau_e * coth_reduced(y)))
            }
        }
        (BathModel::Ohmic { .. } | BathModel::Qed { .. }, Observable::MsdRate) if zero_t && t > 0.0 => {
            Some(msd_rate_closed_zero_t(model, hbar, t)?)
        }
        _ => None,
    };
    Ok(value)
}

/// Long-time law of `ds/dt` (validity `t` large against `m/zeta`,
/// `1/b`, `hbar/kB T`, `m tau_e/(M - m)`; not enforced).
///
/// Finite T: Ohmic `2kT/zeta`, power law `2kT t^gamma / (m b^{1-gamma} Gamma(1+gamma))`,
/// QED `(2kT/M)(t + tau_e)`, free particle `2kT t/M`.
/// Zero T: Ohmic `2 hbar/(pi zeta t)`, power law
/// `hbar cot(pi gamma/2) t^{gamma-1} / (Gamma(gamma) m b^{1-gamma})`,
/// QED `2 hbar tau_e/(pi M t)`, free particle 0. Harmonic: 0, the time average.
pub fn msd_rate_asymptotic(model: &BathModel, ctx: &ThermalContext, t: f64) -> f64 {
    let hbar = ctx.hbar();
    let kt = ctx.kt();
    if ctx.is_zero_temperature() {
        match *model {
            BathModel::Ohmic { zeta, .. } => 2.0 * hbar / (PI * zeta * t),
            BathModel::PowerLaw { gamma, b, mass } => {
                hbar * cot_over_gamma(gamma).unwrap_or(f64::NAN) * t.powf(gamma - 1.0) / (mass * b.powf(1.0 - gamma))
            }
            BathModel::Qed {
                renormalized_mass,
                bare_mass,
                tau_e,
            } => {
                if bare_mass == renormalized_mass {
                    0.0
                } else {
                    2.0 * hbar * tau_e / (PI * renormalized_mass * t)
                }
            }
            BathModel::FreeParticle { .. } | BathModel::Harmonic { .. } => 0.0,
        }
    } else {
        match *model {
            BathModel::Ohmic { zeta, .. } => 2.0 * kt / zeta,
            BathModel::PowerLaw { gamma, b, mass } => {
                2.0 * kt * t.powf(gamma) / (mass * b.powf(1.0 - gamma) * gamma_fn(1.0 + gamma))
            }
            BathModel::Qed {
                renormalized_mass,
                bare_mass,
                tau_e,
            } => {
                let tau = if bare_mass == renormalized_mass { 0.0 } else { tau_e };
                2.0 * kt / renormalized_mass * (t + tau)
            }
            BathModel::FreeParticle { mass } => 2.0 * kt * t / mass,
            BathModel::Harmonic { .. } => 0.0,
        }
    }
}

/// Long-time law of `s(t)`.
///
/// Zero T: Ohmic `(2 hbar/pi zeta)(ln(zeta t/m) + gamma_E)`, QED
/// `(2 hbar tau_e/pi M)(ln((M-m) t/m tau_e) + gamma_E)`, power law
/// `hbar cot(pi gamma/2) t^gamma / (gamma Gamma(gamma) m b^{1-gamma})` for
/// `gamma > 0` and the Ohmic log law at `gamma = 0`. For `gamma < 0` that
/// term is negative and decays; it is added to the finite plateau
/// `2 <x^2>`, which is computed by quadrature.
/// Finite T: Ohmic `2kT t/zeta`, power law
/// `2kT t^{1+gamma}/(m b^{1-gamma} Gamma(2+gamma))`, QED `(kT/M)(t^2 + 2 tau_e t)`.
/// Free particle `(kT/M) t^2` at every T; harmonic: the time average
/// `(hbar/m b) coth(hbar b/2kT)`.
///
/// QED at `m = 0` and zero T diverges.
pub fn msd_asymptotic(model: &BathModel, ctx: &ThermalContext, t: f64) -> Result<f64> {
    model.validate_params()?;
    let hbar = ctx.hbar();
    let kt = ctx.kt();
    let zero_t = ctx.is_zero_temperature();
    let log_law = |pre: f64, x: f64| pre * (x.ln() + EULER_GAMMA);
    Ok(match *model {
        BathModel::FreeParticle { mass } => kt * t * t / mass,
        BathModel::Harmonic { mass, b } => hbar / (mass * b) * coth_at(b, ctx),
        BathModel::Ohmic { zeta, mass } => {
            if zero_t {
                log_law(2.0 * hbar / (PI * zeta), zeta * t / mass)
            } else {
                2.0 * kt * t / zeta
            }
        }
        BathModel::Qed {
            renormalized_mass: big_m,
            bare_mass: m,
            tau_e,
        } => {
            if m == big_m {
                kt * t * t / big_m
            } else if !zero_t {
                kt / big_m * (t * t + 2.0 * tau_e * t)
            } else if m == 0.0 {
                return Err(divergent(
                    model,
                    Observable::Msd,
                    "ultraviolet divergence at zero bare mass",
                ));
            } else {
                log_law(2.0 * hbar * tau_e / (PI * big_m), (big_m - m) * t / (m * tau_e))
            }
        }
        BathModel::PowerLaw { gamma, b, mass } => {
            let scale = mass * b.powf(1.0 - gamma);
            if !zero_t {
                2.0 * kt * t.powf(1.0 + gamma) / (scale * gamma_fn(2.0 + gamma))
            } else if gamma == 0.0 {
                log_law(2.0 * hbar / (PI * mass * b), b * t)
            } else {
                let term = hbar * cot_over_gamma(gamma)? / (gamma * scale) * t.powf(gamma);
                if gamma > 0.0 {
                    term
                } else {
                    2.0 * equal_time_variance(model, ctx, &QuadratureSpec::default())? + term
                }
            }
        }
    })
}

/// `<x^2>` where it is finite: the harmonic model and the zero-T power
/// law with `gamma < 0`.
pub fn equal_time_variance(model: &BathModel, ctx: &ThermalContext, spec: &QuadratureSpec) -> Result<f64> {
    Ok(position_correlation(model, ctx, 0.0, spec)?.value)
}
