//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Natural units (hbar = kB = 1) throughout.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qbm_core::special::{gamma_one_plus, v_function, EULER_GAMMA};
use qbm_core::{
    closed_form, commutator_magnitude, fit_anomalous_exponent, integrate_oscillatory, joint_gaussian_params, msd,
    msd_rate, packet_width_sq, time_grid, validate_positive_real, BathModel, Kernel, MeasurementSetup, Observable,
    ObservableSeries, QuadratureSpec, Spacing, ThermalContext,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn nat(temp: f64) -> ThermalContext {
    ThermalContext::natural(temp).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn series(
    model: &BathModel,
    ctx: &ThermalContext,
    obs: Observable,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<ObservableSeries, String> {
    let times = time_grid(lo, hi, n, Spacing::Log).map_err(|e| e.to_string())?;
    ObservableSeries::compute(model, ctx, obs, &times, &spec()).map_err(|e| e.to_string())
}

fn slope(s: &ObservableSeries) -> Result<f64, String> {
    fit_anomalous_exponent(s, 1.0).map_err(|e| e.to_string())
}

fn within_time(start: Instant, limit: Duration, detail: String, ok: bool) -> Outcome {
    let took = start.elapsed();
    check(
        ok && took < limit,
        format!("{detail}, {:.2} s (limit {} s)", took.as_secs_f64(), limit.as_secs()),
    )
}

fn c1_ohmic_normal_diffusion() -> Outcome {
    let start = Instant::now();
    let model = BathModel::ohmic(1.0, 1.0).unwrap();
    let s = series(&model, &nat(1.0), Observable::MsdRate, 1e2, 1e4, 30)?;
    let dev = s.values().iter().map(|v| rel(*v, 2.0)).fold(0.0, f64::max);
    let k = slope(&s)?;
    within_time(
        start,
        Duration::from_secs(10),
        format!("max |ds/dt - 2|/2 = {dev:.2e} (<= 1e-2), slope = {k:.2e} (|.| <= 0.02)"),
        dev <= 1e-2 && k.abs() <= 0.02,
    )
}

fn c2_ohmic_zero_t_exact() -> Outcome {
    let start = Instant::now();
    let model = BathModel::ohmic(1.0, 1.0).unwrap();
    let s = series(&model, &ThermalContext::zero(), Observable::MsdRate, 1e-2, 1e2, 30)?;
    let mut worst: f64 = 0.0;
    for (t, v) in s.times().iter().zip(s.values()) {
        let exact = 2.0 / (PI * t) * v_function(*t).unwrap();
        worst = worst.max(rel(*v, exact));
    }
    within_time(
        start,
        Duration::from_secs(10),
        format!("max rel dev from (2/pi t) V(t) = {worst:.2e} (<= 1e-6)"),
        worst <= 1e-6,
    )
}

fn c3_ohmic_log_law() -> Outcome {
    let model = BathModel::ohmic(1.0, 1.0).unwrap();
    let t = 1e4;
    let s = msd(&model, &ThermalContext::zero(), t, &spec())
        .map_err(|e| e.to_string())?
        .value;
    let law = 2.0 / PI * (t.ln() + EULER_GAMMA);
    let d = rel(s, law);
    check(
        d <= 1e-2,
        format!("s({t:e}) = {s:.6}, log law {law:.6}, rel dev {d:.2e} (<= 1e-2)"),
    )
}

fn c4_colored_noise_exponents() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    // At gamma = 1/2 the first correction to the rate is a constant, -2kT/(m b);
    // it falls as t^{-1/2} relative to the leading term, about 3% at t = 1e3.
    for (gamma, lo, hi) in [(-0.5, 1e2, 1e4), (0.5, 1e3, 1e5)] {
        let model = BathModel::power_law(gamma, 1.0, 1.0).unwrap();
        let s = series(&model, &nat(1.0), Observable::MsdRate, lo, hi, 24)?;
        let k = slope(&s)?;
        let n = s.len() - 1;
        let pref = s.values()[n] / s.times()[n].powf(gamma);
        let want = 2.0 / gamma_one_plus(gamma).unwrap();
        let d = rel(pref, want);
        ok &= (k - gamma).abs() <= 0.02 && d <= 0.02;
        notes.push(format!(
            "gamma {gamma}: slope {k:.4} (+-0.02), prefactor dev {d:.2e} (<= 0.02)"
        ));
    }
    check(ok, notes.join("; "))
}

fn c5_one_power_rule() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let z = ThermalContext::zero();
    for (gamma, lo, hi) in [(-0.5, 1e2, 1e4), (0.5, 1e3, 1e5)] {
        let model = BathModel::power_law(gamma, 1.0, 1.0).unwrap();
        let k = slope(&series(&model, &z, Observable::MsdRate, lo, hi, 24)?)?;
        ok &= (k - (gamma - 1.0)).abs() <= 0.05;
        notes.push(format!(
            "gamma {gamma}: zero-T slope {k:.4} (want {} +-0.05)",
            gamma - 1.0
        ));
    }
    // gamma = 0 against the Ohmic bath with zeta = m b, numerically and in the law.
    let pl = BathModel::power_law(0.0, 2.0, 1.5).unwrap();
    let ohm = BathModel::ohmic(3.0, 1.5).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.1, 1.0, 10.0, 100.0] {
        let a = msd_rate(&pl, &z, t, &spec()).map_err(|e| e.to_string())?.value;
        let b = msd_rate(&ohm, &z, t, &spec()).map_err(|e| e.to_string())?.value;
        worst = worst.max(rel(a, b));
    }
    let ohmic_pref = 2.0 / (PI * 3.0);
    for g in [-1e-3, 1e-3] {
        let pref = qbm_core::special::cot_over_gamma(g).unwrap() / (1.5 * 2f64.powf(1.0 - g));
        worst = worst.max(rel(pref, ohmic_pref));
    }
    ok &= worst <= 1e-2;
    notes.push(format!("gamma 0 vs Ohmic: {worst:.2e} (<= 1e-2)"));
    check(ok, notes.join("; "))
}

fn c6_harmonic_bound() -> Outcome {
    let mut worst_ulps: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    for temp in [0.0, 1.0] {
        let ctx = nat(temp);
        let (mass, b) = (1.0, 2.0);
        let model = BathModel::harmonic(mass, b).unwrap();
        let amp = (closed_form(&model, &ctx, Observable::MsdRate, PI / (2.0 * b))
            .unwrap()
            .unwrap())
        .abs();
        let times = time_grid(1e-3, 20.0 * PI / b, 2000, Spacing::Linear).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &t in &times {
            let pipe = msd_rate(&model, &ctx, t, &spec()).map_err(|e| e.to_string())?;
            let exact = closed_form(&model, &ctx, Observable::MsdRate, t).unwrap().unwrap();
            if pipe.err_estimate != 0.0 {
                return Err("the harmonic pipeline used quadrature".into());
            }
            worst_ulps = worst_ulps.max((pipe.value - exact).abs() / (f64::EPSILON * amp));
            x.push(b * t);
            y.push(pipe.value / amp);
        }
        worst_drift = worst_drift.max(qbm_core::series::linear_fit(&x, &y).0.abs());
    }
    check(
        worst_ulps <= 4.0 && worst_drift < 0.02,
        format!("pipeline vs closed form {worst_ulps:.1} ulp (<= 4), drift slope {worst_drift:.2e} (< 0.02)"),
    )
}

fn c7_free_particle() -> Outcome {
    let model = BathModel::free_particle(2.0).unwrap();
    let ctx = nat(1.5);
    let mut worst: f64 = 0.0;
    let mut zero_ok = true;
    for t in time_grid(1e-3, 1e3, 40, Spacing::Log).unwrap() {
        let s = msd(&model, &ctx, t, &spec()).map_err(|e| e.to_string())?;
        if s.err_estimate != 0.0 {
            return Err("free-particle msd used quadrature".into());
        }
        worst = worst.max(rel(s.value, 1.5 * t * t / 2.0));
        zero_ok &= msd(&model, &ThermalContext::zero(), t, &spec()).unwrap().value == 0.0;
    }
    check(
        worst <= 1e-14 && zero_ok,
        format!("max rel dev from (kT/M)t^2 = {worst:.1e} (<= 1e-14), zero-T s == 0: {zero_ok}"),
    )
}

fn c8_qed_maximal_coupling() -> Outcome {
    let model = BathModel::qed(1.0, 0.0, 1.0).unwrap();
    let ctx = nat(1.0);
    let s = series(&model, &ctx, Observable::MsdRate, 0.1, 100.0, 30)?;
    let mut worst: f64 = 0.0;
    for (t, v) in s.times().iter().zip(s.values()) {
        let exact = 2.0 * (t + 1.0 / (PI * t).tanh());
        worst = worst.max(rel(*v, exact));
    }
    let k = slope(&series(
        &model,
        &ThermalContext::zero(),
        Observable::MsdRate,
        1.0,
        100.0,
        20,
    )?)?;
    check(
        worst <= 1e-6 && (k + 1.0).abs() <= 0.02,
        format!("max rel dev from closed form {worst:.2e} (<= 1e-6), zero-T slope {k:.4} (-1 +-0.02)"),
    )
}

fn c9_qed_zero_t() -> Outcome {
    let model = BathModel::qed(1.0, 0.5, 1.0).unwrap();
    let z = ThermalContext::zero();
    let s = series(&model, &z, Observable::MsdRate, 1e-2, 1e2, 30)?;
    let mut worst: f64 = 0.0;
    for (t, v) in s.times().iter().zip(s.values()) {
        // (2 hbar tau_e / pi M t) V((M - m) t / m tau_e) with (M - m)/(m tau_e) = 1
        let exact = 2.0 / (PI * t) * v_function(*t).unwrap();
        worst = worst.max(rel(*v, exact));
    }
    let t = 1e3;
    let long = msd(&model, &z, t, &spec()).map_err(|e| e.to_string())?.value;
    let law = 2.0 / PI * (t.ln() + EULER_GAMMA);
    let d = rel(long, law);
    check(
        worst <= 1e-6 && d <= 1e-2,
        format!("max rel dev from V form {worst:.2e} (<= 1e-6); s(1e3) = {long:.6} vs {law:.6}, dev {d:.2e} (<= 1e-2)"),
    )
}

fn c10_commutators() -> Outcome {
    let free = BathModel::free_particle(3.0).unwrap();
    let mut free_worst: f64 = 0.0;
    for t in [1e-3, 0.5, 7.0, 1e4] {
        let c = commutator_magnitude(&free, 1.0, t, &spec())
            .map_err(|e| e.to_string())?
            .value;
        free_worst = free_worst.max(rel(c, t / 3.0));
    }
    let (big_m, m, tau) = (1.0, 0.5, 1.0);
    let qed = BathModel::qed(big_m, m, tau).unwrap();
    let mut qed_worst: f64 = 0.0;
    for t in time_grid(1e-3, 1e2, 20, Spacing::Log).unwrap() {
        let c = commutator_magnitude(&qed, 1.0, t, &spec())
            .map_err(|e| e.to_string())?
            .value;
        let exact = (t + tau * (1.0 - (-(big_m - m) * t / (m * tau)).exp())) / big_m;
        qed_worst = qed_worst.max(rel(c, exact));
    }
    let t0 = 1e-3 * m * tau / (big_m - m);
    let h = 1e-2 * t0;
    let cp = commutator_magnitude(&qed, 1.0, t0 + h, &spec())
        .map_err(|e| e.to_string())?
        .value;
    let cm = commutator_magnitude(&qed, 1.0, t0 - h, &spec())
        .map_err(|e| e.to_string())?
        .value;
    let dcdt = (cp - cm) / (2.0 * h);
    let d = rel(dcdt, 1.0 / m);
    check(
        free_worst <= 1e-14 && qed_worst <= 1e-6 && d <= 5e-3,
        format!(
            "free {free_worst:.1e} (<= 1e-14); QED vs closed form {qed_worst:.2e} (<= 1e-6); dC/dt = {dcdt:.6} vs hbar/m = {}, dev {d:.2e} (<= 5e-3)",
            1.0 / m
        ),
    )
}

fn c11_packet_width() -> Outcome {
    let model = BathModel::free_particle(2.0).unwrap();
    let sigma1: f64 = 0.3;
    let s1sq = sigma1 * sigma1;
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.1, 1.0, 10.0, 1e3] {
        let setup = MeasurementSetup::new(sigma1, 0.0, t).unwrap();
        let w = packet_width_sq(&model, &ThermalContext::zero(), &setup, &spec()).map_err(|e| e.to_string())?;
        let textbook = s1sq + t * t / (4.0 * 4.0 * s1sq);
        worst = worst.max(rel(w.value, textbook));
    }
    // Thermal vs uncertainty spreading at finite T.
    let kt = 0.7;
    let ctx = nat(kt);
    let t = 5.0;
    let classical = msd(&model, &ctx, t, &spec()).unwrap().value;
    let c = commutator_magnitude(&model, 1.0, t, &spec()).unwrap().value;
    let quantum = c * c / (4.0 * s1sq);
    let lambda_sq = 2.0 * PI / (2.0 * kt);
    let ratio = quantum / classical;
    let want = lambda_sq / (8.0 * PI * s1sq);
    let d = rel(ratio, want);
    check(
        worst <= 4.0 * f64::EPSILON && d <= 1e-10,
        format!("textbook spreading dev {worst:.1e}; uncertainty/thermal ratio {ratio:.12} vs lambda^2/(8 pi sigma1^2) = {want:.12}, dev {d:.1e} (<= 1e-10)"),
    )
}

/// `int int W(x1, x2) g(x1 - x2) dx1 dx2` in the variables `u = x1 - x2`,
/// `v = x1` (unit Jacobian) with composite Simpson over +-9 standard deviations.
fn moments(p: &qbm_core::JointGaussianParams, n: usize) -> (f64, f64) {
    let su = p.difference_second_moment().sqrt();
    let (ua, va) = (9.0 * su, 9.0 * p.sigma);
    let hu = 2.0 * ua / n as f64;
    let hv = 2.0 * va / n as f64;
    let w = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let (mut norm, mut second) = (0.0, 0.0);
    for i in 0..=n {
        let u = -ua + i as f64 * hu;
        let mut row = 0.0;
        for j in 0..=n {
            let v = -va + j as f64 * hv;
            row += w(j) * p.density(v, v - u);
        }
        norm += w(i) * row;
        second += w(i) * row * u * u;
    }
    let scale = hu * hv / 9.0;
    (norm * scale, second * scale)
}

fn c12_joint_density_moment() -> Outcome {
    let model = BathModel::harmonic(1.0, 1.0).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for temp in [0.0, 0.5, 5.0] {
        let ctx = nat(temp);
        let setup = MeasurementSetup::new(0.5, 0.2, 1.7).unwrap();
        let p = joint_gaussian_params(&model, &ctx, &setup, None, &spec()).map_err(|e| e.to_string())?;
        let (norm, second) = moments(&p, 800);
        let w = packet_width_sq(&model, &ctx, &setup, &spec())
            .map_err(|e| e.to_string())?
            .value;
        let d = rel(second, w);
        ok &= d <= 1e-6 && (norm - 1.0).abs() <= 1e-6;
        notes.push(format!("T={temp}: dev {d:.1e}, norm-1 {:.1e}", norm - 1.0));
    }
    check(ok, notes.join("; ") + " (<= 1e-6)")
}

fn c13_identity_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    for gamma in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let q = QuadratureSpec::default().with_endpoint_exponent(1.0 + gamma);
        let r = integrate_oscillatory(|x: f64| x.powf(-gamma - 1.0), Kernel::Sin, 1.0, &q)
            .and_then(|r| r.require_converged())
            .map_err(|e| format!("gamma {gamma}: {e}"))?;
        let want = PI / (2.0 * gamma_one_plus(gamma).unwrap() * (PI * gamma / 2.0).cos());
        worst = worst.max(rel(r.value, want));
    }
    let rejected = [-1.5, -1.0, 1.0, 1.2].iter().all(|&g| {
        !validate_positive_real(
            &BathModel::PowerLaw {
                gamma: g,
                b: 1.0,
                mass: 1.0,
            },
            64,
        )
        .passed()
    });
    let catalog = [
        BathModel::ohmic(1.0, 1.0).unwrap(),
        BathModel::power_law(-0.5, 1.0, 1.0).unwrap(),
        BathModel::power_law(0.5, 1.0, 1.0).unwrap(),
        BathModel::harmonic(1.0, 1.0).unwrap(),
        BathModel::qed(1.0, 0.5, 1.0).unwrap(),
        BathModel::qed(1.0, 0.0, 1.0).unwrap(),
        BathModel::free_particle(1.0).unwrap(),
    ];
    let accepted = catalog.iter().all(|m| validate_positive_real(m, 256).passed());
    check(
        worst <= 1e-6 && rejected && accepted,
        format!("sine-power identity max dev {worst:.2e} (<= 1e-6); rejects |gamma| >= 1: {rejected}; accepts catalog: {accepted}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("Ohmic normal diffusion", c1_ohmic_normal_diffusion),
        ("Ohmic zero-T exact rate", c2_ohmic_zero_t_exact),
        ("Ohmic zero-T log law", c3_ohmic_log_law),
        ("colored-noise exponents", c4_colored_noise_exponents),
        ("zero-T one-power rule", c5_one_power_rule),
        ("harmonic bound, no diffusion", c6_harmonic_bound),
        ("free particle", c7_free_particle),
        ("QED maximal coupling", c8_qed_maximal_coupling),
        ("QED zero-T general", c9_qed_zero_t),
        ("commutators", c10_commutators),
        ("wave-packet width", c11_packet_width),
        ("joint-density moment identity", c12_joint_density_moment),
        ("identity suite and validator", c13_identity_suite),
    ];
    let mut failed = 0;
    println!("\nacceptance criteria");
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} [{tag}] {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed\n", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
