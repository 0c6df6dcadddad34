//! Log-space arithmetic and compensated summation.

/// Natural log of the smallest value treated as non-zero.
pub const LOG_TINY: f64 = -690.775_527_898_213_7; // ln(1e-300)

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Accumulates `ln Σ exp(x_i)` without overflow, rescaling when a larger term arrives.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    scaled: CompensatedSum,
}

impl Default for LogSum {
    fn default() -> Self {
        Self { max: f64::NEG_INFINITY, scaled: CompensatedSum::new() }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, log_x: f64) {
        if log_x == f64::NEG_INFINITY || self.max == f64::INFINITY {
            return;
        }
        if log_x == f64::INFINITY {
            self.max = f64::INFINITY;
            return;
        }
        if log_x > self.max {
            let factor = (self.max - log_x).exp();
            let old = self.scaled.value() * factor;
            self.scaled = CompensatedSum::new();
            self.scaled.add(old);
            self.max = log_x;
        }
        self.scaled.add((log_x - self.max).exp());
    }

    /// `ln` of the accumulated sum; `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.max.is_infinite() {
            self.max
        } else {
            self.max + self.scaled.value().ln()
        }
    }
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = LogSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `ln(1 - exp(x))` for `x <= 0`.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// A non-negative quantity carried in log space, flagged when it falls below 1e-300.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogValue {
    pub ln: f64,
}

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        Self { ln }
    }

    pub fn zero() -> Self {
        Self { ln: f64::NEG_INFINITY }
    }

    pub fn negligible(&self) -> bool {
        self.ln < LOG_TINY
    }

    /// Linear value, clamped to zero when negligible.
    pub fn value(&self) -> f64 {
        if self.negligible() {
            0.0
        } else {
            self.ln.exp()
        }
    }
}

impl std::fmt::Display for LogValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.negligible() {
            write!(f, "0")
        } else {
            write!(f, "{:.12e}", self.ln.exp())
        }
    }
}

/// Bisection root of a continuous function with a sign change on `[lo, hi]`.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Wilson score interval for a binomial proportion at z standard deviations.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Slope, intercept and residuals of the least-squares line through `(x, y)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    (slope, intercept, residuals)
}
