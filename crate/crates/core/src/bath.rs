//! Heat-bath memory kernels, the generalized susceptibility
//! `alpha(z) = 1 / (-m z^2 - i z mu(z))`, and the boundary spectrum
//! `Im alpha(w + i0)` split into a regular part and distributional terms.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A memory kernel and its parameters.
///
/// Field names follow the config schema: `mass` is the inertial (bare) mass
/// entering `-m z^2`, `renormalized_mass` is the physical mass of the QED model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BathModel {
    /// Constant friction `mu = zeta`.
    Ohmic { zeta: f64, mass: f64 },
    /// Colored noise `mu(z) = m b^{1-gamma} (-i z)^gamma` with -1 < gamma < 1.
    PowerLaw { gamma: f64, b: f64, mass: f64 },
    /// Harmonically bound particle, `alpha(z) = 1 / (m (b^2 - z^2))`.
    Harmonic { mass: f64, b: f64 },
    /// Nonrelativistic electron in the radiation field.
    Qed {
        renormalized_mass: f64,
        bare_mass: f64,
        tau_e: f64,
    },
    /// No coupling, `mu = 0`.
    FreeParticle { mass: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl BathModel {
    pub fn ohmic(zeta: f64, mass: f64) -> Result<Self> {
        let m = BathModel::Ohmic { zeta, mass };
        m.validate_params()?;
        Ok(m)
    }

    pub fn power_law(gamma: f64, b: f64, mass: f64) -> Result<Self> {
        let m = BathModel::PowerLaw { gamma, b, mass };
        m.validate_params()?;
        Ok(m)
    }

    pub fn harmonic(mass: f64, b: f64) -> Result<Self> {
        let m = BathModel::Harmonic { mass, b };
        m.validate_params()?;
        Ok(m)
    }

    pub fn qed(renormalized_mass: f64, bare_mass: f64, tau_e: f64) -> Result<Self> {
        let m = BathModel::Qed {
            renormalized_mass,
            bare_mass,
            tau_e,
        };
        m.validate_params()?;
        Ok(m)
    }

    pub fn free_particle(mass: f64) -> Result<Self> {
        let m = BathModel::FreeParticle { mass };
        m.validate_params()?;
        Ok(m)
    }

    /// Checks parameter ranges, including the second-law bound on `gamma`.
    pub fn validate_params(&self) -> Result<()> {
        match *self {
            BathModel::Ohmic { zeta, mass } => {
                positive("zeta", zeta)?;
                positive("mass", mass)
            }
            BathModel::PowerLaw { gamma, b, mass } => {
                positive("b", b)?;
                positive("mass", mass)?;
                power_law_range(gamma).map_err(Error::InvalidModel)
            }
            BathModel::Harmonic { mass, b } => {
                positive("mass", mass)?;
                positive("b", b)
            }
            BathModel::Qed {
                renormalized_mass,
                bare_mass,
                tau_e,
            } => {
                positive("renormalized_mass", renormalized_mass)?;
                positive("tau_e", tau_e)?;
                if !(bare_mass >= 0.0 && bare_mass <= renormalized_mass) {
                    return Err(Error::InvalidModel(format!(
                        "bare_mass must lie in [0, renormalized_mass = {renormalized_mass}], got {bare_mass}"
                    )));
                }
                Ok(())
            }
            BathModel::FreeParticle { mass } => positive("mass", mass),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BathModel::Ohmic { .. } => "ohmic",
            BathModel::PowerLaw { .. } => "power-law",
            BathModel::Harmonic { .. } => "harmonic",
            BathModel::Qed { .. } => "qed",
            BathModel::FreeParticle { .. } => "free-particle",
        }
    }

    /// Mass governing long-time inertia: `M` for QED and the free particle,
    /// the inertial mass otherwise.
    pub fn physical_mass(&self) -> f64 {
        match *self {
            BathModel::Ohmic { mass, .. }
            | BathModel::PowerLaw { mass, .. }
            | BathModel::Harmonic { mass, .. }
            | BathModel::FreeParticle { mass } => mass,
            BathModel::Qed { renormalized_mass, .. } => renormalized_mass,
        }
    }

    /// QED cutoff `Omega = (M - m) / (M tau_e)`.
    pub fn qed_cutoff(&self) -> Option<f64> {
        match *self {
            BathModel::Qed {
                renormalized_mass: big_m,
                bare_mass: m,
                tau_e,
            } => Some((big_m - m) / (big_m * tau_e)),
            _ => None,
        }
    }

    /// Characteristic frequency of the regular spectrum: the scale beyond
    /// which `Im alpha` is a smooth power-law tail.
    pub fn frequency_scale(&self) -> f64 {
        match *self {
            BathModel::Ohmic { zeta, mass } => zeta / mass,
            BathModel::PowerLaw { b, .. } | BathModel::Harmonic { b, .. } => b,
            BathModel::Qed {
                renormalized_mass: big_m,
                bare_mass: m,
                tau_e,
            } => {
                if m > 0.0 && m < big_m {
                    (big_m - m) / (m * tau_e)
                } else {
                    1.0 / tau_e
                }
            }
            BathModel::FreeParticle { .. } => 1.0,
        }
    }

    /// Fourier transform of the memory function, `mu(z)` for `Im z >= 0`
    /// (`Im z = 0` is read as the boundary value `w + i0`).
    pub fn mu_tilde(&self, z: Complex64) -> Result<Complex64> {
        check_upper("mu_tilde", z)?;
        match *self {
            BathModel::Ohmic { zeta, .. } => Ok(Complex64::new(zeta, 0.0)),
            BathModel::PowerLaw { gamma, b, mass } => Ok(mass * b.powf(1.0 - gamma) * minus_i_z_pow(z, gamma)?),
            BathModel::Harmonic { mass, b } => {
                if z == Complex64::new(0.0, 0.0) {
                    return Err(Error::Pole { z: format!("{z}") });
                }
                // Formal kernel m b^2 / (-i z), which reproduces alpha = 1/(m(b^2 - z^2)).
                Ok(mass * b * b / (-I * z))
            }
            BathModel::Qed {
                renormalized_mass: big_m,
                bare_mass: m,
                tau_e,
            } => {
                // (2e^2/3c^3) z Omega^2/(z + i Omega) with 2e^2/3c^3 = M tau_e and
                // Omega = (M - m)/(M tau_e), cleared of denominators:
                let dm = big_m - m;
                if dm == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(dm * dm * z / (big_m * tau_e * z + I * dm))
            }
            BathModel::FreeParticle { .. } => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    /// Generalized susceptibility `alpha(z)` for `Im z >= 0`.
    pub fn susceptibility(&self, z: Complex64) -> Result<Complex64> {
        check_upper("susceptibility", z)?;
        let alpha = match *self {
            BathModel::Harmonic { mass, b } => 1.0 / (mass * (b * b - z * z)),
            BathModel::Qed {
                renormalized_mass: big_m,
                bare_mass: m,
                tau_e,
            } => {
                let dm = big_m - m;
                (dm - I * big_m * z * tau_e) / (-big_m * z * z * (dm - I * m * z * tau_e))
            }
            BathModel::Ohmic { mass, .. } | BathModel::PowerLaw { mass, .. } | BathModel::FreeParticle { mass } => {
                let mu = self.mu_tilde(z)?;
                1.0 / (-mass * z * z - I * z * mu)
            }
        };
        if alpha.re.is_finite() && alpha.im.is_finite() {
            Ok(alpha)
        } else {
            Err(Error::Pole { z: format!("{z}") })
        }
    }

    /// `Im alpha(w + i0)` as regular part plus distributional coefficients.
    pub fn im_alpha_boundary(&self) -> SpectralDecomposition {
        let (delta_prime_coeff, delta_pairs) = match *self {
            BathModel::Qed { renormalized_mass, .. }
            | BathModel::FreeParticle {
                mass: renormalized_mass,
            } => (-PI / renormalized_mass, Vec::new()),
            BathModel::Harmonic { mass, b } => (0.0, vec![(b, PI / (2.0 * mass * b))]),
            _ => (0.0, Vec::new()),
        };
        SpectralDecomposition {
            model: *self,
            delta_prime_coeff,
            delta_pairs,
        }
    }
}

fn check_upper(func: &'static str, z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain(func, format!("argument must be finite, got {z}")));
    }
    if z.im < 0.0 {
        return Err(Error::domain(
            func,
            format!("argument must lie in the closed upper half plane, got {z}"),
        ));
    }
    Ok(())
}

/// `(-i z)^gamma` on the principal branch; `-i z` has nonnegative real part
/// for `Im z >= 0`, so the branch cut is never crossed.
fn minus_i_z_pow(z: Complex64, gamma: f64) -> Result<Complex64> {
    let w = -I * z;
    if w.norm() == 0.0 {
        return if gamma > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else if gamma == 0.0 {
            Ok(Complex64::new(1.0, 0.0))
        } else {
            Err(Error::domain(
                "mu_tilde",
                "(-iz)^gamma is infinite at z = 0 for gamma < 0",
            ))
        };
    }
    let (r, theta) = w.to_polar();
    Ok(Complex64::from_polar(r.powf(gamma), gamma * theta))
}

/// Range requirement -1 < gamma < 1 with a pointer to the limiting models.
fn power_law_range(gamma: f64) -> std::result::Result<(), String> {
    if gamma > -1.0 && gamma < 1.0 {
        return Ok(());
    }
    let hint = if gamma == -1.0 {
        " (gamma = -1 is a harmonically bound particle: use the harmonic model)"
    } else if gamma == 1.0 {
        " (gamma = 1 is a pure mass shift: use the free-particle or qed model)"
    } else {
        ""
    };
    Err(format!(
        "power-law exponent gamma = {gamma} violates positive-reality, admissible range is -1 < gamma < 1{hint}"
    ))
}

/// `Im alpha(w + i0)` on the half line `w >= 0`:
/// `regular(w) + delta_prime_coeff * delta'(w) + sum weight * delta(w - w0)`.
///
/// A distribution centred at `w = 0` integrated over `[0, inf)` carries half
/// its weight: `int_0^inf delta'(w) g(w) dw = -g'(0)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    model: BathModel,
    pub delta_prime_coeff: f64,
    pub delta_pairs: Vec<(f64, f64)>,
}

impl SpectralDecomposition {
    pub fn model(&self) -> &BathModel {
        &self.model
    }

    /// True unless the regular part vanishes identically.
    pub fn has_regular_part(&self) -> bool {
        match self.model {
            BathModel::Harmonic { .. } | BathModel::FreeParticle { .. } => false,
            BathModel::Qed {
                renormalized_mass,
                bare_mass,
                ..
            } => bare_mass < renormalized_mass,
            _ => true,
        }
    }

    /// `p` in `regular(w) ~ w^{-p}` as `w -> 0`.
    pub fn regular_endpoint_exponent(&self) -> f64 {
        match self.model {
            BathModel::PowerLaw { gamma, .. } => 1.0 + gamma,
            BathModel::Ohmic { .. } | BathModel::Qed { .. } => 1.0,
            _ => 0.0,
        }
    }

    /// Whether `w * regular(w)` tends to a nonzero constant as `w -> inf`
    /// (QED at maximal coupling), which makes the rate integral only
    /// Abel-summable.
    pub fn rate_tail_is_flat(&self) -> bool {
        matches!(self.model, BathModel::Qed { bare_mass, renormalized_mass, .. } if bare_mass == 0.0 && renormalized_mass > 0.0)
    }

    /// Smooth part of `Im alpha(w + i0)` for `w > 0`.
    pub fn regular(&self, omega: f64) -> f64 {
        match self.model {
            BathModel::Ohmic { zeta, mass } => zeta / (omega * (mass * mass * omega * omega + zeta * zeta)),
            BathModel::PowerLaw { gamma, b, mass } => {
                let x = (omega / b).powf(1.0 - gamma);
                let (s, c) = (FRAC_PI_2 * gamma).sin_cos();
                c / (mass * omega * omega * (x + 1.0 / x + 2.0 * s))
            }
            BathModel::Qed {
                renormalized_mass: big_m,
                bare_mass: m,
                tau_e,
            } => {
                let dm = big_m - m;
                let mw = m * omega * tau_e;
                dm * dm * tau_e / (big_m * omega * (dm * dm + mw * mw))
            }
            BathModel::Harmonic { .. } | BathModel::FreeParticle { .. } => 0.0,
        }
    }
}

/// Worst sample found by the positive-real validator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub z: Complex64,
    /// `Re mu` (interior/boundary sign checks) or the asymmetry
    /// `Re mu(-w) - Re mu(w)`, relative to `|mu|`.
    pub value: f64,
}

/// Outcome of [`validate_positive_real`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub model: BathModel,
    pub samples: usize,
    /// Parameter-range verdict, `Err` carries the diagnostic.
    pub range: std::result::Result<(), String>,
    /// Re mu(z) >= 0 at every interior sample.
    pub interior_ok: bool,
    /// Re mu(-w + i0) = Re mu(w + i0) >= 0 on the real-axis grid.
    pub boundary_ok: bool,
    pub worst: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.range.is_ok() && self.interior_ok && self.boundary_ok
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(
            f,
            "positive-real check for {} model: {:?}",
            self.model.name(),
            self.model
        )?;
        match &self.range {
            Ok(()) => writeln!(f, "  parameter range        pass")?,
            Err(msg) => writeln!(f, "  parameter range        FAIL  {msg}")?,
        }
        writeln!(
            f,
            "  Re mu(z) >= 0 (UHP)    {}  ({} samples)",
            mark(self.interior_ok),
            self.samples
        )?;
        writeln!(
            f,
            "  boundary symmetry      {}  ({} samples)",
            mark(self.boundary_ok),
            self.samples
        )?;
        if let Some(w) = &self.worst {
            writeln!(f, "  worst point: {} at z = {}, value {:e}", w.check, w.z, w.value)?;
        }
        write!(f, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Radical-inverse (van der Corput) sequence in the given base.
fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    let step = inv;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv *= step;
    }
    out
}

/// Checks the second-law requirement that `mu` be a positive real function:
/// parameter range, `Re mu >= 0` on a Halton grid in the upper half plane
/// spanning six decades around the model's frequency scale, and the
/// reality condition on a real-axis grid.
pub fn validate_positive_real(model: &BathModel, n_samples: usize) -> ValidationReport {
    let n = n_samples.max(16);
    let range = match model.validate_params() {
        Ok(()) => Ok(()),
        Err(Error::InvalidModel(msg)) => Err(msg),
        Err(e) => Err(e.to_string()),
    };
    let scale = {
        let s = model.frequency_scale();
        if s.is_finite() && s > 0.0 {
            s
        } else {
            1.0
        }
    };
    const TOL: f64 = 1e-12;
    let mut worst: Option<Violation> = None;
    let mut note = |v: Violation| {
        if worst.is_none_or(|w| v.value < w.value) {
            worst = Some(v);
        }
    };

    let mut interior_ok = true;
    for i in 1..=n {
        let r = scale * 10f64.powf(6.0 * radical_inverse(i, 2) - 3.0);
        let theta = PI * (radical_inverse(i, 3) * 0.998 + 0.001);
        let z = Complex64::from_polar(r, theta);
        match model.mu_tilde(z) {
            Ok(mu) => {
                let rel = mu.re / mu.norm().max(f64::MIN_POSITIVE);
                if !(rel >= -TOL) {
                    interior_ok = false;
                    note(Violation {
                        check: "Re mu < 0",
                        z,
                        value: rel,
                    });
                }
            }
            Err(_) => {
                interior_ok = false;
                note(Violation {
                    check: "mu undefined",
                    z,
                    value: f64::NEG_INFINITY,
                });
            }
        }
    }

    let mut boundary_ok = true;
    for i in 0..n {
        let omega = scale * 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64);
        let plus = model.mu_tilde(Complex64::new(omega, 0.0));
        let minus = model.mu_tilde(Complex64::new(-omega, 0.0));
        let z = Complex64::new(omega, 0.0);
        match (plus, minus) {
            (Ok(p), Ok(m)) => {
                let norm = p.norm().max(m.norm()).max(f64::MIN_POSITIVE);
                let sign = p.re.min(m.re) / norm;
                if !(sign >= -TOL) {
                    boundary_ok = false;
                    note(Violation {
                        check: "Re mu(w + i0) < 0",
                        z,
                        value: sign,
                    });
                }
                let asym = (p.re - m.re).abs() / norm;
                if !(asym <= 1e-10) {
                    boundary_ok = false;
                    note(Violation {
                        check: "Re mu(-w) != Re mu(w)",
                        z,
                        value: -asym,
                    });
                }
            }
            _ => {
                boundary_ok = false;
                note(Violation {
                    check: "mu undefined on the real axis",
                    z,
                    value: f64::NEG_INFINITY,
                });
            }
        }
    }

    ValidationReport {
        model: *model,
        samples: n,
        range,
        interior_ok,
        boundary_ok,
        worst,
    }
}
