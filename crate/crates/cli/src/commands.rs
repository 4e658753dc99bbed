//! `compute`, `validate` and `asymptote`.

use std::io::Write;

use qbm_core::{
    evaluate_grid, fit_anomalous_exponent, msd_asymptotic, msd_rate_asymptotic, packet_width_asymptotic,
    packet_width_sq, validate_positive_real, AsymptoteComparison, DominantTerm, Error, Estimate, MeasurementSetup,
    Observable, ObservableSeries, SeriesMeta,
};

use crate::config::{ObservableKind, Run, RunConfig, WidthMode};
use crate::{Exit, Failure, Outcome};

/// Samples per check in the positive-real validator.
pub const VALIDATION_SAMPLES: usize = 256;

type Point = qbm_core::Result<(Estimate, Option<DominantTerm>)>;

/// Errors that no grid point can recover from are reported as config problems.
fn fatal(points: &[Point]) -> Option<Failure> {
    points.iter().find_map(|p| match p {
        Err(e @ (Error::DivergentObservable(_) | Error::InvalidModel(_))) => {
            Some(Failure::usage(format!("observable: {e}")))
        }
        _ => None,
    })
}

fn width_points(run: &Run, mode: WidthMode, sigma1: f64, sigma2: f64) -> Vec<Point> {
    run.times
        .iter()
        .map(|&t| {
            let setup = MeasurementSetup::new(sigma1, sigma2, t)?;
            match mode {
                WidthMode::Exact => Ok((packet_width_sq(&run.model, &run.ctx, &setup, &run.spec)?, None)),
                WidthMode::Asymptotic => {
                    let (w, tag) = packet_width_asymptotic(&run.model, &run.ctx, &setup)?;
                    Ok((Estimate::exact(w), Some(tag)))
                }
            }
        })
        .collect()
}

/// Writes `t,value,err_estimate` rows (plus `dominant_term` for the
/// asymptotic width). Rows that fail carry an empty value and a line on `diag`.
pub fn cmd_compute(cfg: &RunConfig, out: &mut dyn Write, diag: &mut dyn Write) -> Outcome {
    let run = cfg.run()?;
    let (points, tagged) = match (run.observable.observable(), run.width) {
        (Some(obs), _) => {
            let points = evaluate_grid(&run.model, &run.ctx, obs, &run.times, &run.spec)
                .into_iter()
                .map(|p| p.map(|e| (e, None)))
                .collect();
            (points, false)
        }
        (None, Some(w)) => (
            width_points(&run, w.mode, w.sigma1, w.sigma2),
            w.mode == WidthMode::Asymptotic,
        ),
        (None, None) => return Err(Failure::usage("width: observable = \"width\" needs width.sigma1")),
    };
    if let Some(f) = fatal(&points) {
        return Err(f);
    }

    writeln!(
        out,
        "t,value,err_estimate{}",
        if tagged { ",dominant_term" } else { "" }
    )?;
    let mut failed = 0;
    for (t, p) in run.times.iter().zip(&points) {
        match p {
            Ok((e, tag)) => {
                write!(out, "{t:?},{:?},{:?}", e.value, e.err_estimate)?;
                if tagged {
                    write!(out, ",{}", tag.map_or("", |d| d.name()))?;
                }
                writeln!(out)?;
            }
            Err(e) => {
                failed += 1;
                writeln!(out, "{t:?},,{}", if tagged { "," } else { "" })?;
                writeln!(diag, "t = {t:?}: {e}")?;
            }
        }
    }
    out.flush()?;
    if failed > 0 {
        writeln!(diag, "{failed} of {} points failed", run.times.len())?;
        return Ok(Exit::NonConvergence);
    }
    Ok(Exit::Success)
}

/// Prints the positive-real report for the configured model.
pub fn cmd_validate(cfg: &RunConfig, report: &mut dyn Write) -> Outcome {
    let r = validate_positive_real(&cfg.model, VALIDATION_SAMPLES);
    writeln!(report, "{r}")?;
    Ok(if r.passed() {
        Exit::Success
    } else {
        Exit::ValidationFailed
    })
}

/// Compares the numeric series with its long-time law: CSV of
/// `t,numeric,asymptotic,deviation` on `out`, one summary line on `report`.
/// The expected slope is fitted from the law itself unless configured.
pub fn cmd_asymptote(cfg: &RunConfig, out: &mut dyn Write, report: &mut dyn Write, diag: &mut dyn Write) -> Outcome {
    let run = cfg.run()?;
    let obs = match run.observable {
        ObservableKind::Msd => Observable::Msd,
        ObservableKind::MsdRate => Observable::MsdRate,
        other => {
            return Err(Failure::usage(format!(
                "observable: asymptote compares msd or msd-rate, got \"{}\"",
                other.name()
            )))
        }
    };
    let points: Vec<Point> = evaluate_grid(&run.model, &run.ctx, obs, &run.times, &run.spec)
        .into_iter()
        .map(|p| p.map(|e| (e, None)))
        .collect();
    if let Some(f) = fatal(&points) {
        return Err(f);
    }
    let mut values = Vec::with_capacity(points.len());
    let mut errs = Vec::with_capacity(points.len());
    let mut failed = false;
    for (t, p) in run.times.iter().zip(points) {
        match p {
            Ok((e, _)) => {
                values.push(e.value);
                errs.push(e.err_estimate);
            }
            Err(e) => {
                failed = true;
                writeln!(diag, "t = {t:?}: {e}")?;
            }
        }
    }
    if failed {
        return Ok(Exit::NonConvergence);
    }

    let law = |t: f64| match obs {
        Observable::Msd => msd_asymptotic(&run.model, &run.ctx, t),
        _ => Ok(msd_rate_asymptotic(&run.model, &run.ctx, t)),
    };
    let law_values = run
        .times
        .iter()
        .map(|&t| law(t))
        .collect::<qbm_core::Result<Vec<f64>>>()
        .map_err(|e| Failure::usage(format!("observable: long-time law: {e}")))?;

    let meta = |label: &str| SeriesMeta {
        model: run.model,
        context: run.ctx,
        label: label.to_string(),
    };
    let series = ObservableSeries::new(run.times.clone(), values, errs, meta(obs.name()))
        .map_err(|e| Failure::usage(e.to_string()))?;
    let tail = cfg.asymptote.tail_fraction;
    let fitted = match fit_anomalous_exponent(&series, tail) {
        Ok(k) => k,
        Err(e @ Error::InsufficientData { .. }) => return Err(Failure::usage(format!("asymptote.tail_fraction: {e}"))),
        Err(e) => {
            writeln!(report, "# slope fit failed: {e}")?;
            return Ok(Exit::SlopeMismatch);
        }
    };
    let expected = match cfg.asymptote.expected_slope {
        Some(k) => k,
        None => {
            let n = run.times.len();
            let law_series = ObservableSeries::new(run.times.clone(), law_values.clone(), vec![0.0; n], meta("law"))
                .map_err(|e| Failure::usage(e.to_string()))?;
            fit_anomalous_exponent(&law_series, tail).map_err(|e| {
                Failure::usage(format!(
                    "asymptote.expected_slope: cannot fit the long-time law ({e}); set it explicitly"
                ))
            })?
        }
    };

    let at = |t: f64| {
        run.times
            .iter()
            .position(|&x| x == t)
            .map_or(f64::NAN, |i| law_values[i])
    };
    let cmp = AsymptoteComparison::new(&series, at, tail);
    writeln!(out, "t,numeric,asymptotic,deviation")?;
    for i in 0..cmp.times.len() {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?}",
            cmp.times[i], cmp.numeric[i], cmp.asymptotic[i], cmp.deviation[i]
        )?;
    }
    out.flush()?;

    let tol = cfg.asymptote.slope_tolerance;
    let ok = (fitted - expected).abs() <= tol;
    writeln!(
        report,
        "# fitted_slope = {fitted:.6}, expected_slope = {expected:.6}, tolerance = {tol}, max_tail_deviation = {:.3e}: {}",
        cmp.max_tail_deviation(),
        if ok { "PASS" } else { "FAIL" }
    )?;
    Ok(if ok { Exit::Success } else { Exit::SlopeMismatch })
}
