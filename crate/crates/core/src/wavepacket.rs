//! Width of a wave packet prepared by one Gaussian position measurement and
//! probed by a second one a time `t` later.
//!
//! The mean-square width is the four-term sum
//! `w^2(t) = s(t) + sigma1^2 + C(t)^2 / (4 sigma1^2) + sigma2^2`.
//! The commutator is purely imaginary, `[x(0), x(t)] = i C(t)`, so the term
//! `-[x(0), x(t)]^2 / 4 sigma1^2` is `+C^2 / 4 sigma1^2 >= 0`.
//!
//! The sum stays finite for unbound particles, where `<x^2>` itself diverges,
//! so `w^2` is always assembled from `s` and `C` rather than from moments of
//! the joint density. The density needs `<x^2>` and is available for the
//! harmonic model or with a caller-supplied variance.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bath::BathModel;
use crate::error::{Error, Result};
use crate::observables::{
    commutator_magnitude, equal_time_variance, msd, msd_asymptotic, position_correlation, Estimate,
};
use crate::quadrature::QuadratureSpec;
use crate::special::gamma_fn;
use crate::thermal::ThermalContext;

/// Instrument widths and the time between the two measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetup {
    sigma1: f64,
    sigma2: f64,
    t: f64,
}

impl MeasurementSetup {
    /// `sigma1 > 0` (the initial width cannot vanish), `sigma2 >= 0`, `t >= 0`.
    pub fn new(sigma1: f64, sigma2: f64, t: f64) -> Result<Self> {
        if !(sigma1 > 0.0 && sigma1.is_finite()) {
            return Err(Error::domain(
                "MeasurementSetup",
                format!("sigma1 must be > 0, got {sigma1}"),
            ));
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::domain(
                "MeasurementSetup",
                format!("sigma2 must be >= 0, got {sigma2}"),
            ));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::domain("MeasurementSetup", format!("t must be >= 0, got {t}")));
        }
        Ok(MeasurementSetup { sigma1, sigma2, t })
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.sigma1, self.sigma2, t)
    }
}

/// Mean-square packet width `w^2(t)`.
pub fn packet_width_sq(
    model: &BathModel,
    ctx: &ThermalContext,
    setup: &MeasurementSetup,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let s1sq = setup.sigma1 * setup.sigma1;
    let base = s1sq + setup.sigma2 * setup.sigma2;
    if setup.t == 0.0 {
        return Ok(Estimate::exact(base));
    }
    let s = msd(model, ctx, setup.t, spec)?;
    let c = commutator_magnitude(model, ctx.hbar(), setup.t, spec)?;
    Ok(Estimate {
        value: s.value + s1sq + c.value * c.value / (4.0 * s1sq) + setup.sigma2 * setup.sigma2,
        err_estimate: s.err_estimate + c.value.abs() * c.err_estimate / (2.0 * s1sq),
    })
}

/// Which term of `w^2` governs the long-time growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominantTerm {
    /// The mean-square displacement, growing as a power of `t`.
    Msd,
    /// The mean-square displacement, growing as `log t`.
    LogMsd,
    /// The commutator term `C^2 / 4 sigma1^2`.
    Uncertainty,
    /// Nothing grows; the width oscillates about a constant.
    Bounded,
}

impl DominantTerm {
    pub fn name(self) -> &'static str {
        match self {
            DominantTerm::Msd => "msd",
            DominantTerm::LogMsd => "log-msd",
            DominantTerm::Uncertainty => "uncertainty",
            DominantTerm::Bounded => "bounded",
        }
    }
}

impl fmt::Display for DominantTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Long-time commutator: `hbar t^gamma / (m b^{1-gamma} Gamma(1+gamma))` for
/// the power law (`hbar/zeta` for Ohmic), `(hbar/M)(t + tau_e)` for QED, and
/// the exact forms for the free particle and the oscillator.
pub fn commutator_asymptotic(model: &BathModel, hbar: f64, t: f64) -> f64 {
    match *model {
        BathModel::Ohmic { zeta, .. } => hbar / zeta,
        BathModel::PowerLaw { gamma, b, mass } => {
            hbar * t.powf(gamma) / (mass * b.powf(1.0 - gamma) * gamma_fn(1.0 + gamma))
        }
        BathModel::Qed {
            renormalized_mass,
            bare_mass,
            tau_e,
        } => {
            let tau = if bare_mass == renormalized_mass { 0.0 } else { tau_e };
            hbar / renormalized_mass * (t + tau)
        }
        BathModel::FreeParticle { mass } => hbar * t / mass,
        BathModel::Harmonic { mass, b } => hbar / (mass * b) * (b * t).sin(),
    }
}

/// Long-time `w^2` with the term that dominates it.
///
/// The mean-square displacement enters through its long-time law, except
/// at zero temperature for the Ohmic bath (and the power law at
/// `gamma = 0`), where only the leading `(2 hbar/pi zeta) log(zeta t/m)` is
/// kept. At finite temperature the displacement always wins for the
/// dissipative baths; for the free particle and QED both grow as `t^2` and
/// the larger coefficient is reported.
pub fn packet_width_asymptotic(
    model: &BathModel,
    ctx: &ThermalContext,
    setup: &MeasurementSetup,
) -> Result<(f64, DominantTerm)> {
    model.validate_params()?;
    let t = setup.t;
    let hbar = ctx.hbar();
    let s1sq = setup.sigma1 * setup.sigma1;
    let c = commutator_asymptotic(model, hbar, t);
    let rest = s1sq + c * c / (4.0 * s1sq) + setup.sigma2 * setup.sigma2;
    let zero_t = ctx.is_zero_temperature();

    let ohmic_log = |zeta: f64, mass: f64| 2.0 * hbar / (PI * zeta) * (zeta * t / mass).ln();
    let (s, tag) = match *model {
        BathModel::Ohmic { zeta, mass } if zero_t => (ohmic_log(zeta, mass), DominantTerm::LogMsd),
        BathModel::PowerLaw { gamma, b, mass } if zero_t => {
            if gamma == 0.0 {
                (ohmic_log(mass * b, mass), DominantTerm::LogMsd)
            } else if gamma < 0.0 {
                (msd_asymptotic(model, ctx, t)?, DominantTerm::Msd)
            } else {
                (msd_asymptotic(model, ctx, t)?, DominantTerm::Uncertainty)
            }
        }
        BathModel::Ohmic { .. } | BathModel::PowerLaw { .. } => (msd_asymptotic(model, ctx, t)?, DominantTerm::Msd),
        BathModel::Harmonic { .. } => (msd_asymptotic(model, ctx, t)?, DominantTerm::Bounded),
        BathModel::FreeParticle { mass }
        | BathModel::Qed {
            renormalized_mass: mass,
            ..
        } => {
            let s = msd_asymptotic(model, ctx, t)?;
            // Both terms grow as t^2; compare kT/M with hbar^2 / 4 M^2 sigma1^2.
            let classical = ctx.kt() / mass;
            let quantum = hbar * hbar / (4.0 * mass * mass * s1sq);
            let tag = if classical > quantum {
                DominantTerm::Msd
            } else {
                DominantTerm::Uncertainty
            };
            (s, tag)
        }
    };
    Ok((s + rest, tag))
}

/// Parameters of the bivariate Gaussian joint density of the two readings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointGaussianParams {
    /// Total width of the first reading.
    pub sigma: f64,
    /// Total width of the second reading.
    pub tau: f64,
    /// Correlation coefficient, `rho^2 < 1`.
    pub rho: f64,
}

impl JointGaussianParams {
    pub fn new(sigma: f64, tau: f64, rho: f64) -> Result<Self> {
        if !(sigma > 0.0 && tau > 0.0) {
            return Err(Error::domain(
                "JointGaussianParams",
                format!("widths must be > 0, got sigma = {sigma}, tau = {tau}"),
            ));
        }
        let rho_sq = rho * rho;
        if !(rho_sq < 1.0 - 1e-12) {
            return Err(Error::DegenerateGaussian { rho_sq });
        }
        Ok(JointGaussianParams { sigma, tau, rho })
    }

    pub fn density(&self, x1: f64, x2: f64) -> f64 {
        let (s, t, r) = (self.sigma, self.tau, self.rho);
        let one_minus = 1.0 - r * r;
        let q = x1 * x1 / (s * s) - 2.0 * r * x1 * x2 / (s * t) + x2 * x2 / (t * t);
        (-q / (2.0 * one_minus)).exp() / (2.0 * PI * s * t * one_minus.sqrt())
    }

    /// `<(x1 - x2)^2> = sigma^2 - 2 rho sigma tau + tau^2`.
    pub fn difference_second_moment(&self) -> f64 {
        self.sigma * self.sigma - 2.0 * self.rho * self.sigma * self.tau + self.tau * self.tau
    }
}

/// `sigma^2 = sigma1^2 + <x^2>`, `tau^2 = sigma2^2 + <x^2> + C^2/4 sigma1^2`,
/// `sigma tau rho = <x(t)x(0) + x(0)x(t)>/2`.
///
/// With `equal_time_var = None` the variance is computed, which only works
/// where it is finite (harmonic model, zero-T power law with `gamma < 0`).
/// A supplied variance acts as a regularization; the lag correlation is then
/// taken as `<x^2> - s(t)/2` so the density stays consistent with `s`.
pub fn joint_gaussian_params(
    model: &BathModel,
    ctx: &ThermalContext,
    setup: &MeasurementSetup,
    equal_time_var: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<JointGaussianParams> {
    let (var, corr) = match equal_time_var {
        Some(v) => {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(
                    "joint_density",
                    format!("equal-time variance must be >= 0, got {v}"),
                ));
            }
            (v, v - 0.5 * msd(model, ctx, setup.t, spec)?.value)
        }
        None => {
            let v = equal_time_variance(model, ctx, spec).map_err(|e| match e {
                Error::DivergentObservable(why) => Error::DivergentObservable(format!(
                    "{why}; supply the equal-time variance as a regularization parameter"
                )),
                other => other,
            })?;
            (v, position_correlation(model, ctx, setup.t, spec)?.value)
        }
    };
    let c = commutator_magnitude(model, ctx.hbar(), setup.t, spec)?.value;
    let s1sq = setup.sigma1 * setup.sigma1;
    let sigma = (s1sq + var).sqrt();
    let tau = (setup.sigma2 * setup.sigma2 + var + c * c / (4.0 * s1sq)).sqrt();
    JointGaussianParams::new(sigma, tau, corr / (sigma * tau))
}

/// Joint probability density `W(x1, x2)` of the two readings.
pub fn joint_density(
    model: &BathModel,
    ctx: &ThermalContext,
    setup: &MeasurementSetup,
    x1: f64,
    x2: f64,
    equal_time_var: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(joint_gaussian_params(model, ctx, setup, equal_time_var, spec)?.density(x1, x2))
}
