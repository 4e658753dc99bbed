//! Time grids, observable series and long-time comparisons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::BathModel;
use crate::error::{Error, Result};
use crate::observables::{evaluate, Estimate, Observable};
use crate::quadrature::QuadratureSpec;
use crate::thermal::ThermalContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

/// `n` points from `t_min` to `t_max` inclusive.
pub fn time_grid(t_min: f64, t_max: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err(Error::domain(
            "time_grid",
            format!("need 0 < t_min < t_max, got t_min = {t_min}, t_max = {t_max}"),
        ));
    }
    if n < 2 {
        return Err(Error::domain("time_grid", format!("need at least 2 points, got {n}")));
    }
    let last = (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| {
            let f = i as f64 / last;
            match spacing {
                Spacing::Linear => t_min + (t_max - t_min) * f,
                Spacing::Log => t_min * (t_max / t_min).powf(f),
            }
        })
        .collect();
    grid[0] = t_min;
    grid[n - 1] = t_max;
    Ok(grid)
}

/// Evaluates `obs` on every grid point in parallel; results are in grid order.
pub fn evaluate_grid(
    model: &BathModel,
    ctx: &ThermalContext,
    obs: Observable,
    times: &[f64],
    spec: &QuadratureSpec,
) -> Vec<Result<Estimate>> {
    times.par_iter().map(|&t| evaluate(model, ctx, obs, t, spec)).collect()
}

/// What a series was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMeta {
    pub model: BathModel,
    pub context: ThermalContext,
    pub label: String,
}

/// Values of an observable on a strictly increasing positive time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    err_estimates: Vec<f64>,
    pub meta: SeriesMeta,
}

impl ObservableSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, err_estimates: Vec<f64>, meta: SeriesMeta) -> Result<Self> {
        if times.len() != values.len() || times.len() != err_estimates.len() {
            return Err(Error::domain(
                "ObservableSeries",
                format!(
                    "length mismatch: {} times, {} values, {} error estimates",
                    times.len(),
                    values.len(),
                    err_estimates.len()
                ),
            ));
        }
        if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "ObservableSeries",
                "times must be positive and strictly increasing",
            ));
        }
        if err_estimates.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::domain("ObservableSeries", "error estimates must be nonnegative"));
        }
        Ok(ObservableSeries {
            times,
            values,
            err_estimates,
            meta,
        })
    }

    /// Evaluates `obs` on `times`; the first failing point aborts.
    pub fn compute(
        model: &BathModel,
        ctx: &ThermalContext,
        obs: Observable,
        times: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let points = evaluate_grid(model, ctx, obs, times, spec);
        let mut values = Vec::with_capacity(times.len());
        let mut errs = Vec::with_capacity(times.len());
        for p in points {
            let e = p?;
            values.push(e.value);
            errs.push(e.err_estimate);
        }
        Self::new(
            times.to_vec(),
            values,
            errs,
            SeriesMeta {
                model: *model,
                context: *ctx,
                label: obs.name().to_string(),
            },
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn err_estimates(&self) -> &[f64] {
        &self.err_estimates
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `log(value)` against `log(t)` over the last `tail_fraction` of
/// the points.
pub fn fit_anomalous_exponent(series: &ObservableSeries, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::domain(
            "fit_anomalous_exponent",
            format!("tail fraction must lie in (0, 1], got {tail_fraction}"),
        ));
    }
    const NEEDED: usize = 8;
    let n = series.len();
    let count = ((n as f64 * tail_fraction).round() as usize).min(n);
    if count < NEEDED {
        return Err(Error::InsufficientData {
            needed: NEEDED,
            got: count,
        });
    }
    let start = n - count;
    let mut lx = Vec::with_capacity(count);
    let mut ly = Vec::with_capacity(count);
    for i in start..n {
        let (t, v) = (series.times[i], series.values[i]);
        if !(v > 0.0) {
            return Err(Error::NonPositiveValues { t, value: v });
        }
        lx.push(t.ln());
        ly.push(v.ln());
    }
    Ok(linear_fit(&lx, &ly).0)
}

/// Numeric series next to its long-time law.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoteComparison {
    pub times: Vec<f64>,
    pub numeric: Vec<f64>,
    pub asymptotic: Vec<f64>,
    /// `|numeric - asymptotic| / max(|asymptotic|, floor)`.
    pub deviation: Vec<f64>,
    /// Log-log slope of the numeric tail; `None` when it cannot be fitted
    /// (too few points or non-positive values).
    pub fitted_slope: Option<f64>,
    pub tail_fraction: f64,
}

impl AsymptoteComparison {
    /// `floor` guards the relative deviation where the law vanishes; it is
    /// `1e-12` times the largest numeric magnitude.
    pub fn new(series: &ObservableSeries, asymptote: impl Fn(f64) -> f64, tail_fraction: f64) -> Self {
        let asymptotic: Vec<f64> = series.times.iter().map(|&t| asymptote(t)).collect();
        let scale = series.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = (1e-12 * scale).max(f64::MIN_POSITIVE);
        let deviation = series
            .values
            .iter()
            .zip(&asymptotic)
            .map(|(n, a)| (n - a).abs() / a.abs().max(floor))
            .collect();
        AsymptoteComparison {
            times: series.times.clone(),
            numeric: series.values.clone(),
            asymptotic,
            deviation,
            fitted_slope: fit_anomalous_exponent(series, tail_fraction).ok(),
            tail_fraction,
        }
    }

    /// Largest deviation over the fitted tail.
    pub fn max_tail_deviation(&self) -> f64 {
        let n = self.times.len();
        let count = ((n as f64 * self.tail_fraction).round() as usize).clamp(1, n.max(1));
        self.deviation[n - count..].iter().fold(0.0, |m: f64, d| m.max(*d))
    }
}
