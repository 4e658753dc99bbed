use crate::error::{Error, Result};

/// Temperature together with the unit constants that set the quantum and
/// thermal scales. Natural units (hbar = kB = 1) unless built with [`ThermalContext::with_units`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalContext {
    temperature: f64,
    hbar: f64,
    kb: f64,
    zero_t: bool,
}

impl ThermalContext {
    /// Natural units.
    pub fn natural(temperature: f64) -> Result<Self> {
        Self::with_units(temperature, 1.0, 1.0)
    }

    pub fn with_units(temperature: f64, hbar: f64, kb: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::domain(
                "ThermalContext",
                format!("temperature must be finite and >= 0, got {temperature}"),
            ));
        }
        if !(hbar > 0.0 && hbar.is_finite()) || !(kb > 0.0 && kb.is_finite()) {
            return Err(Error::domain(
                "ThermalContext",
                format!("hbar and kB must be positive, got hbar = {hbar}, kB = {kb}"),
            ));
        }
        Ok(ThermalContext {
            temperature,
            hbar,
            kb,
            zero_t: temperature == 0.0,
        })
    }

    /// T = 0 in natural units.
    pub fn zero() -> Self {
        ThermalContext {
            temperature: 0.0,
            hbar: 1.0,
            kb: 1.0,
            zero_t: true,
        }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn kb(&self) -> f64 {
        self.kb
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.zero_t
    }

    /// Thermal energy kB*T.
    pub fn kt(&self) -> f64 {
        self.kb * self.temperature
    }

    /// kB*T/hbar, the frequency above which thermal occupation dies out.
    /// Zero at T = 0.
    pub fn thermal_frequency(&self) -> f64 {
        self.kt() / self.hbar
    }

    /// Same constants, temperature replaced.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        Self::with_units(temperature, self.hbar, self.kb)
    }
}
