//! Cross-module identities with known answers.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use qbm_core::special::{gamma_one_plus, v_function};
use qbm_core::{
    integrate_oscillatory, joint_gaussian_params, packet_width_sq, BathModel, Kernel, MeasurementSetup, QuadratureSpec,
    ThermalContext,
};

use crate::{Exit, Outcome};

/// One row of the self-check table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Relative deviation, infinite when the computation itself failed.
    pub deviation: f64,
    pub tolerance: f64,
    pub note: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn row(name: String, outcome: qbm_core::Result<(f64, f64)>, tolerance: f64) -> Check {
    match outcome {
        Ok((got, want)) => Check {
            name,
            deviation: rel(got, want),
            tolerance,
            note: format!("{got:.12e} vs {want:.12e}"),
        },
        Err(e) => Check {
            name,
            deviation: f64::INFINITY,
            tolerance,
            note: e.to_string(),
        },
    }
}

/// `int_0^inf x^{-gamma-1} sin x dx = pi / (2 Gamma(1+gamma) cos(pi gamma/2))`.
fn sine_power(gamma: f64) -> Check {
    let spec = QuadratureSpec::default().with_endpoint_exponent(1.0 + gamma);
    let outcome = integrate_oscillatory(|x: f64| x.powf(-gamma - 1.0), Kernel::Sin, 1.0, &spec)
        .and_then(|r| r.require_converged())
        .and_then(|r| Ok((r.value, PI / (2.0 * gamma_one_plus(gamma)? * (PI * gamma / 2.0).cos()))));
    row(format!("sine-power identity, gamma = {gamma}"), outcome, 1e-6)
}

/// `V(x) = int_0^inf x^2 sin u / (x^2 + u^2) du` against the closed form.
fn v_consistency(x: f64) -> Check {
    let spec = QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 1e-15,
        ..QuadratureSpec::default()
    }
    .with_onset(8.0 * x);
    let outcome = integrate_oscillatory(|u: f64| x * x / (x * x + u * u), Kernel::Sin, 1.0, &spec)
        .and_then(|r| r.require_converged())
        .and_then(|r| Ok((r.value, v_function(x)?)));
    row(format!("V(x) closed form vs quadrature, x = {x}"), outcome, 1e-8)
}

/// The cutoff form `(z + i W)/(-m z^3 - i M W z^2)` with `W = (M - m)/(M tau_e)`,
/// the rearranged form in `(M, m, tau_e)`, and the model's susceptibility.
fn qed_forms(renormalized: f64, bare: f64, tau_e: f64) -> Check {
    let name = format!("QED parameterizations, M = {renormalized}, m = {bare}, tau_e = {tau_e}");
    let model = match BathModel::qed(renormalized, bare, tau_e) {
        Ok(m) => m,
        Err(e) => return row(name, Err(e), 1e-12),
    };
    let i = Complex64::i();
    let (big, small) = (renormalized, bare);
    let cutoff = (big - small) / (big * tau_e);
    let mut worst: f64 = 0.0;
    let mut note = String::new();
    for k in 0..12 {
        let r = tau_e.recip() * 10f64.powf(-3.0 + 0.5 * k as f64);
        let theta = PI * (0.05 + 0.9 * k as f64 / 11.0);
        let z = Complex64::from_polar(r, theta);
        let cut = (z + i * cutoff) / (-small * z * z * z - i * big * cutoff * z * z);
        let rearranged = (big - small - i * big * z * tau_e) / (-big * z * z * (big - small - i * small * z * tau_e));
        match model.susceptibility(z) {
            Ok(alpha) => {
                let d = ((alpha - cut).norm() / cut.norm()).max((rearranged - cut).norm() / cut.norm());
                worst = worst.max(d);
            }
            Err(e) => {
                worst = f64::INFINITY;
                note = e.to_string();
            }
        }
    }
    Check {
        name,
        deviation: worst,
        tolerance: 1e-12,
        note: if note.is_empty() {
            "12 points in the upper half plane".into()
        } else {
            note
        },
    }
}

/// Second moment of `x1 - x2` under the joint Gaussian against the packet width.
fn moment_identity(temp: f64) -> Check {
    let model = BathModel::Harmonic { mass: 1.0, b: 1.0 };
    let spec = QuadratureSpec::default();
    let outcome = ThermalContext::natural(temp).and_then(|ctx| {
        let setup = MeasurementSetup::new(0.5, 0.2, 1.7)?;
        let p = joint_gaussian_params(&model, &ctx, &setup, None, &spec)?;
        let w = packet_width_sq(&model, &ctx, &setup, &spec)?;
        Ok((p.difference_second_moment(), w.value))
    });
    row(format!("harmonic joint-density moment, T = {temp}"), outcome, 1e-10)
}

/// Every check, in table order.
pub fn run_checks() -> Vec<Check> {
    let mut checks: Vec<Check> = [-0.9, -0.5, 0.0, 0.5, 0.9].into_iter().map(sine_power).collect();
    checks.extend((1..=20).map(|k| v_consistency(0.25 * k as f64)));
    checks.extend([(1.0, 0.5, 1.0), (1.0, 0.0, 1.0), (2.0, 0.3, 0.1)].map(|(a, b, c)| qed_forms(a, b, c)));
    checks.extend([0.0, 0.5, 5.0].map(moment_identity));
    checks
}

/// Prints the pass/fail table.
pub fn cmd_selfcheck(report: &mut dyn Write) -> Outcome {
    let checks = run_checks();
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        writeln!(
            report,
            "{:<width$}  {}  dev {:.2e} (tol {:.0e})  {}",
            c.name,
            if c.passed() { "PASS" } else { "FAIL" },
            c.deviation,
            c.tolerance,
            c.note
        )?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    writeln!(report, "{} of {} checks passed", checks.len() - failed, checks.len())?;
    Ok(if failed == 0 {
        Exit::Success
    } else {
        Exit::SelfcheckFailed
    })
}
