//! Nonlinear acceleration of slowly convergent or alternating sequences.

/// An extrapolated limit together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    pub error: f64,
}

/// Wynn's epsilon algorithm (iterated Shanks transform) on a sequence of
/// partial sums. The even columns of the table are the limit estimates; the
/// estimate with the smallest change along its column is returned.
///
/// `max_depth` caps the number of even columns; `None` uses the whole table.
///
/// Converges for sums of geometric components and for eventually alternating
/// series with smoothly varying terms. For an exactly periodic sequence of
/// period two it returns the Abel/Cesaro mean.
pub fn wynn_epsilon(seq: &[f64], max_depth: Option<usize>) -> Extrapolation {
    let n = seq.len();
    match n {
        0 => {
            return Extrapolation {
                value: 0.0,
                error: f64::INFINITY,
            }
        }
        1 => {
            return Extrapolation {
                value: seq[0],
                error: f64::INFINITY,
            }
        }
        _ => {}
    }
    let mut best = Extrapolation {
        value: seq[n - 1],
        error: (seq[n - 1] - seq[n - 2]).abs(),
    };
    let max_col = max_depth.map_or(n - 1, |d| (2 * d).min(n - 1));

    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = seq.to_vec();
    for k in 1..=max_col {
        let len = n - k;
        let mut next = Vec::with_capacity(len);
        for i in 0..len {
            let d = cur[i + 1] - cur[i];
            let scale = cur[i + 1].abs().max(cur[i].abs());
            if d.abs() <= 1e3 * f64::MIN_POSITIVE || d.abs() <= 4.0 * f64::EPSILON * scale {
                // Column has stalled. An even column that stalls has converged
                // to working precision; an odd one would blow up the next even one.
                if (k - 1) % 2 == 0 {
                    let value = cur[i + 1];
                    let error = d.abs().max(2.0 * f64::EPSILON * value.abs());
                    if error <= best.error {
                        best = Extrapolation { value, error };
                    }
                }
                return best;
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        if k % 2 == 0 && len >= 2 {
            let value = next[len - 1];
            let error = (next[len - 1] - next[len - 2]).abs();
            if !value.is_finite() {
                return best;
            }
            if error <= best.error {
                best = Extrapolation { value, error };
            }
        }
        prev = cur;
        cur = next;
    }
    best
}

/// Running sum with Neumaier compensation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sum of magnitudes of everything added; sets the rounding floor.
    pub fn magnitude(&self) -> f64 {
        self.abs_sum
    }
}
