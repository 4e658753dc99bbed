use std::f64::consts::PI;

use qbm_core::series::linear_fit;
use qbm_core::special::{gamma_one_plus, v_function, EULER_GAMMA};
use qbm_core::{
    closed_form, commutator_magnitude, evaluate, fit_anomalous_exponent, joint_gaussian_params, msd, msd_asymptotic,
    msd_rate, msd_rate_closed_zero_t, packet_width_asymptotic, packet_width_sq, position_correlation, time_grid,
    BathModel, DominantTerm, Error, JointGaussianParams, MeasurementSetup, Observable, ObservableSeries,
    QuadratureSpec, Spacing, ThermalContext,
};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn nat(temp: f64) -> ThermalContext {
    ThermalContext::natural(temp).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn harmonic_equal_time_correlation() {
    let (mass, b) = (2.0, 1.5);
    let model = BathModel::harmonic(mass, b).unwrap();
    for temp in [0.0, 0.4, 3.0] {
        let c = position_correlation(&model, &nat(temp), 0.0, &spec()).unwrap().value;
        let coth = if temp == 0.0 {
            1.0
        } else {
            1.0 / (b / (2.0 * temp)).tanh()
        };
        let want = coth / (2.0 * mass * b);
        assert!(rel(c, want) < 1e-14, "T={temp}: {c} vs {want}");
    }
}

#[test]
fn unbound_correlation_diverges() {
    let ohmic = BathModel::ohmic(1.0, 1.0).unwrap();
    for t in [0.0, 1.0] {
        assert!(matches!(
            position_correlation(&ohmic, &nat(1.0), t, &spec()),
            Err(Error::DivergentObservable(_))
        ));
    }
}

#[test]
fn zero_t_closed_rates() {
    // maximal coupling is approached continuously
    let t = 3.0;
    let limit = 2.0 * 1.0 / (PI * 1.0 * t);
    let mut last = f64::INFINITY;
    for bare in [1e-2, 1e-4, 1e-6] {
        let v = msd_rate_closed_zero_t(&BathModel::qed(1.0, bare, 1.0).unwrap(), 1.0, t).unwrap();
        let d = rel(v, limit);
        assert!(d < last, "m = {bare}: {v} vs {limit}");
        last = d;
    }
    assert!(last < 1e-4, "{last}");
    let at_zero = msd_rate_closed_zero_t(&BathModel::qed(1.0, 0.0, 1.0).unwrap(), 1.0, t).unwrap();
    assert!(rel(at_zero, limit) < 1e-15);

    assert_eq!(
        msd_rate_closed_zero_t(&BathModel::free_particle(1.0).unwrap(), 1.0, t).unwrap(),
        0.0
    );
    let h = msd_rate_closed_zero_t(&BathModel::harmonic(2.0, 0.5).unwrap(), 1.0, t).unwrap();
    assert!(rel(h, 0.5 * (0.5 * t).sin()) < 1e-15);
}

#[test]
fn ohmic_zero_t_rate_is_the_v_function() {
    let (zeta, mass) = (2.0, 0.5);
    let model = BathModel::ohmic(zeta, mass).unwrap();
    for t in time_grid(0.1, 100.0, 12, Spacing::Log).unwrap() {
        let q = msd_rate(&model, &ThermalContext::zero(), t, &spec()).unwrap().value;
        let want = 2.0 / (PI * zeta * t) * v_function(zeta * t / mass).unwrap();
        assert!(rel(q, want) < 1e-7, "t = {t}: {q} vs {want}");
    }
}

#[test]
fn ohmic_zero_t_log_law() {
    let model = BathModel::ohmic(1.0, 1.0).unwrap();
    let z = ThermalContext::zero();
    let s = msd(&model, &z, 1e3, &spec()).unwrap().value;
    let law = msd_asymptotic(&model, &z, 1e3).unwrap();
    assert!(rel(s, law) < 0.02, "{s} vs {law}");
    assert!(rel(law, 2.0 / PI * (1e3f64.ln() + EULER_GAMMA)) < 1e-15);
}

/// Composite Simpson in `ln t` of `f(t) dt` over `[lo, hi]`.
fn log_simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / n as f64;
    let g = |u: f64| {
        let t = u.exp();
        t * f(t)
    };
    let mut sum = g(a) + g(b);
    for i in 1..n {
        sum += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn qed_zero_t_msd_law_from_the_integrated_rate() {
    // M = 1, m = M/2, tau_e = 1: the integral of the closed rate up to t = 1e3
    // fixes where Euler's constant sits in the long-time law.
    let model = BathModel::qed(1.0, 0.5, 1.0).unwrap();
    let z = ThermalContext::zero();
    let t = 1e3;
    let integrated = log_simpson(|u| msd_rate_closed_zero_t(&model, 1.0, u).unwrap(), 1e-12, t, 40_000);
    let law = msd_asymptotic(&model, &z, t).unwrap();
    let want = 2.0 / PI * (t.ln() + EULER_GAMMA);
    assert!(rel(law, want) < 1e-15);
    assert!(rel(integrated, want) < 1e-5, "{integrated} vs {want}");
    let quad = msd(&model, &z, t, &spec()).unwrap().value;
    assert!(rel(quad, integrated) < 1e-6, "{quad} vs {integrated}");
}

#[test]
fn qed_finite_t_rate_grows_like_a_free_particle() {
    let (mass, temp) = (2.0, 0.7);
    let model = BathModel::qed(mass, 0.5, 1.0).unwrap();
    let times = time_grid(50.0, 100.0, 11, Spacing::Linear).unwrap();
    let rates: Vec<f64> = times
        .iter()
        .map(|&t| msd_rate(&model, &nat(temp), t, &spec()).unwrap().value)
        .collect();
    let (slope, _) = linear_fit(&times, &rates);
    assert!(rel(slope, 2.0 * temp / mass) < 1e-3, "{slope}");
}

#[test]
fn power_law_rate_prefactor() {
    let model = BathModel::power_law(0.5, 1.0, 1.0).unwrap();
    let law = qbm_core::msd_rate_asymptotic(&model, &nat(1.0), 1.0);
    assert!(rel(law, 2.0 / gamma_one_plus(0.5).unwrap()) < 1e-15);
}

#[test]
fn commutator_vanishes_at_zero_lag() {
    let models = [
        BathModel::ohmic(1.0, 1.0).unwrap(),
        BathModel::power_law(-0.5, 1.0, 1.0).unwrap(),
        BathModel::power_law(0.5, 1.0, 1.0).unwrap(),
        BathModel::harmonic(1.0, 1.0).unwrap(),
        BathModel::qed(1.0, 0.5, 1.0).unwrap(),
        BathModel::qed(1.0, 0.0, 1.0).unwrap(),
        BathModel::free_particle(1.0).unwrap(),
    ];
    for m in models {
        assert_eq!(commutator_magnitude(&m, 1.0, 0.0, &spec()).unwrap().value, 0.0, "{m:?}");
    }
}

#[test]
fn qed_commutator_limits() {
    let (big, small, tau) = (1.0, 0.25, 0.5);
    let model = BathModel::qed(big, small, tau).unwrap();
    let scale = small * tau / (big - small);
    let t = 200.0 * scale;
    let c = commutator_magnitude(&model, 1.0, t, &spec()).unwrap().value;
    assert!(rel(c, (t + tau) / big) < 1e-7, "{c}");
    // slope at the origin is hbar over the bare mass
    let h = 1e-4 * scale;
    let c = commutator_magnitude(&model, 1.0, h, &spec()).unwrap().value;
    assert!(rel(c / h, 1.0 / small) < 1e-3, "{}", c / h);
}

#[test]
fn free_particle_msd_slope() {
    let model = BathModel::free_particle(1.0).unwrap();
    let times = time_grid(0.1, 100.0, 20, Spacing::Log).unwrap();
    let s = ObservableSeries::compute(&model, &nat(1.0), Observable::Msd, &times, &spec()).unwrap();
    assert!((fit_anomalous_exponent(&s, 1.0).unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn thermal_wave_packet_terms() {
    let (mass, temp, sigma1, sigma2) = (2.0, 0.3, 0.8, 0.25);
    let model = BathModel::free_particle(mass).unwrap();
    for t in [0.0, 0.5, 7.0] {
        let setup = MeasurementSetup::new(sigma1, sigma2, t).unwrap();
        let w = packet_width_sq(&model, &nat(temp), &setup, &spec()).unwrap().value;
        let want =
            temp / mass * t * t + sigma1 * sigma1 + t * t / (4.0 * mass * mass * sigma1 * sigma1) + sigma2 * sigma2;
        assert!(rel(w, want) < 1e-15, "t = {t}: {w} vs {want}");
    }
}

#[test]
fn power_law_uncertainty_dominance() {
    let (sigma1, t) = (0.5, 1e8);
    let model = BathModel::power_law(0.5, 1.0, 1.0).unwrap();
    let setup = MeasurementSetup::new(sigma1, 0.0, t).unwrap();
    let (w, tag) = packet_width_asymptotic(&model, &ThermalContext::zero(), &setup).unwrap();
    assert_eq!(tag, DominantTerm::Uncertainty);
    let third = t / (4.0 * sigma1 * sigma1 * gamma_one_plus(0.5).unwrap().powi(2));
    assert!(rel(w, third) < 1e-3, "{w} vs {third}");
    let rest = msd_asymptotic(&model, &ThermalContext::zero(), t).unwrap() + sigma1 * sigma1;
    assert!(rel(w - third, rest) < 1e-6);
}

/// Trapezoid moments of `W` in `u = x1 - x2`, `v = x1` over a +-9 sd box:
/// `(normalization, <u^2>)`.
fn difference_moments(p: &JointGaussianParams, n: usize) -> (f64, f64) {
    let sd_u = p.difference_second_moment().sqrt();
    let (ua, va) = (9.0 * sd_u, 9.0 * p.sigma);
    let (hu, hv) = (2.0 * ua / n as f64, 2.0 * va / n as f64);
    let (mut norm, mut second) = (0.0, 0.0);
    for i in 0..=n {
        let u = -ua + i as f64 * hu;
        let wu = if i == 0 || i == n { 0.5 } else { 1.0 };
        let mut row = 0.0;
        for j in 0..=n {
            let v = -va + j as f64 * hv;
            let wv = if j == 0 || j == n { 0.5 } else { 1.0 };
            row += wv * p.density(v, v - u);
        }
        norm += wu * row;
        second += wu * row * u * u;
    }
    (norm * hu * hv, second * hu * hv)
}

#[test]
fn joint_density_reconstructs_the_width() {
    let model = BathModel::harmonic(1.0, 1.0).unwrap();
    for temp in [0.0, 0.5, 5.0] {
        for t in time_grid(0.1, 10.0, 10, Spacing::Log).unwrap() {
            let ctx = nat(temp);
            let setup = MeasurementSetup::new(0.5, 0.2, t).unwrap();
            let p = joint_gaussian_params(&model, &ctx, &setup, None, &spec()).unwrap();
            let (norm, second) = difference_moments(&p, 400);
            let w = packet_width_sq(&model, &ctx, &setup, &spec()).unwrap().value;
            assert!((norm - 1.0).abs() < 1e-6, "T={temp} t={t}: norm {norm}");
            assert!(rel(second, w) < 1e-8, "T={temp} t={t}: {second} vs {w}");
        }
    }
}

#[test]
fn short_lag_density_hugs_the_diagonal() {
    let model = BathModel::harmonic(1.0, 1.0).unwrap();
    let sigma = 0.5;
    let setup = MeasurementSetup::new(sigma, sigma, 1e-6).unwrap();
    let p = joint_gaussian_params(&model, &nat(1.0), &setup, None, &spec()).unwrap();
    let peak = p.density(0.0, 0.0);
    let d = 6.0 * (2.0 * sigma * sigma).sqrt();
    let off = p.density(d / 2.0, -d / 2.0);
    assert!(off / peak < 1e-6, "{}", off / peak);
    assert!(rel(off / peak, (-18.0f64).exp()) < 1e-3, "{}", off / peak);
}

#[test]
fn closed_form_paths_agree_with_quadrature() {
    let hot = nat(1.3);
    let cases = [
        (BathModel::qed(1.0, 0.0, 0.5).unwrap(), hot, Observable::MsdRate),
        (
            BathModel::qed(1.0, 0.3, 0.5).unwrap(),
            ThermalContext::zero(),
            Observable::MsdRate,
        ),
        (
            BathModel::ohmic(1.5, 1.0).unwrap(),
            ThermalContext::zero(),
            Observable::MsdRate,
        ),
        (BathModel::qed(1.0, 0.3, 0.5).unwrap(), hot, Observable::Commutator),
    ];
    for (model, ctx, obs) in cases {
        for t in [0.1, 1.0, 10.0] {
            let q = evaluate(&model, &ctx, obs, t, &spec()).unwrap().value;
            let c = closed_form(&model, &ctx, obs, t).unwrap().expect("closed form");
            assert!(rel(q, c) < 1e-6, "{model:?} {obs:?} t={t}: {q} vs {c}");
        }
    }
}
