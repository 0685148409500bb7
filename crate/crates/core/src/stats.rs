//! Latency statistics: empirical and Gaussian CDFs, order-statistic block
//! latency, quantile gains, autocorrelation, and histograms.
//!
//! The central result used throughout: when a block is sent as `n` packets of
//! which any `k` reconstruct it, and per-packet delays are i.i.d. with CDF
//! `F`, the block completion time is the k-th order statistic of `n` draws,
//! with CDF
//!
//! ```text
//! P(T <= x) = sum for j in k..=n of C(n, j) F(x)^j (1 - F(x))^(n-j)
//! ```
//!
//! Binomial coefficients are evaluated in log space via the log-gamma
//! function, which is accurate over the supported range `n <= 1000`.

use alloc::vec::Vec;

/// Largest block size accepted by the order-statistic routines.
pub const MAX_ORDER_N: usize = 1000;

/// Errors from the statistics routines.
#[derive(Clone, Debug, PartialEq)]
pub enum StatsError {
    /// A sample set was empty.
    EmptySeries,
    /// A sample or parameter was NaN or infinite.
    NonFinite,
    /// A probability lay outside its valid range.
    InvalidProbability { p: f64 },
    /// Order-statistic indices must satisfy `1 <= k <= n`.
    InvalidOrder { k: usize, n: usize },
    /// `n` exceeds [`MAX_ORDER_N`].
    OrderTooLarge { n: usize },
    /// Standard deviation must be positive.
    InvalidScale { std: f64 },
    /// Autocorrelation of a constant series is undefined.
    ConstantSeries,
    /// The series is too short for the requested lag.
    SeriesTooShort { len: usize, max_lag: usize },
    /// A histogram needs at least one bin.
    InvalidBins,
}

impl core::fmt::Display for StatsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StatsError::EmptySeries => write!(f, "empty sample series"),
            StatsError::NonFinite => write!(f, "non-finite sample or parameter"),
            StatsError::InvalidProbability { p } => write!(f, "probability {p} out of range"),
            StatsError::InvalidOrder { k, n } => {
                write!(f, "order statistic requires 1 <= k <= n, got k={k} n={n}")
            }
            StatsError::OrderTooLarge { n } => {
                write!(f, "n={n} exceeds supported maximum {MAX_ORDER_N}")
            }
            StatsError::InvalidScale { std } => write!(f, "standard deviation {std} not positive"),
            StatsError::ConstantSeries => write!(f, "series has zero variance"),
            StatsError::SeriesTooShort { len, max_lag } => {
                write!(f, "series of length {len} too short for lag {max_lag}")
            }
            StatsError::InvalidBins => write!(f, "histogram needs at least one bin"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Empirical CDF backed by a sorted copy of the samples.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// Builds from raw samples; rejects empty or non-finite input.
    pub fn from_samples(samples: &[f64]) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::EmptySeries);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(EmpiricalCdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Sorted samples, ascending.
    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples less than or equal to `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v <= x);
        below as f64 / self.sorted.len() as f64
    }

    /// Quantile with linear interpolation between adjacent order statistics.
    pub fn quantile(&self, p: f64) -> Result<f64, StatsError> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(StatsError::InvalidProbability { p });
        }
        let n = self.sorted.len();
        if n == 1 {
            return Ok(self.sorted[0]);
        }
        let h = p * (n - 1) as f64;
        let i = h as usize;
        if i + 1 >= n {
            return Ok(self.sorted[n - 1]);
        }
        let frac = h - i as f64;
        Ok(self.sorted[i] + frac * (self.sorted[i + 1] - self.sorted[i]))
    }
}

/// A per-packet delay distribution: measured samples or an analytic model.
#[derive(Clone, Debug)]
pub enum Cdf {
    Empirical(EmpiricalCdf),
    Gaussian { mean: f64, std: f64 },
}

/// Common view over anything with a CDF and a quantile function.
pub trait CumulativeDistribution {
    /// `P(X <= x)`.
    fn cdf(&self, x: f64) -> f64;
    /// Smallest `x` with `P(X <= x) >= p`.
    fn quantile(&self, p: f64) -> Result<f64, StatsError>;
}

impl Cdf {
    /// Analytic Gaussian CDF; `std` must be positive.
    pub fn gaussian(mean: f64, std: f64) -> Result<Self, StatsError> {
        if !mean.is_finite() || !std.is_finite() {
            return Err(StatsError::NonFinite);
        }
        if std <= 0.0 {
            return Err(StatsError::InvalidScale { std });
        }
        Ok(Cdf::Gaussian { mean, std })
    }

    /// Empirical CDF from samples.
    pub fn from_samples(samples: &[f64]) -> Result<Self, StatsError> {
        Ok(Cdf::Empirical(EmpiricalCdf::from_samples(samples)?))
    }

    /// An interval certain to contain every quantile, used to seed bisection.
    fn support_bounds(&self) -> (f64, f64) {
        match self {
            Cdf::Empirical(e) => {
                let lo = e.sorted[0];
                let hi = e.sorted[e.sorted.len() - 1];
                (lo, hi)
            }
            Cdf::Gaussian { mean, std } => (mean - 40.0 * std, mean + 40.0 * std),
        }
    }
}

impl CumulativeDistribution for Cdf {
    fn cdf(&self, x: f64) -> f64 {
        match self {
            Cdf::Empirical(e) => e.eval(x),
            Cdf::Gaussian { mean, std } => {
                let z = (x - mean) / (std * core::f64::consts::SQRT_2);
                0.5 * (1.0 + libm::erf(z))
            }
        }
    }

    fn quantile(&self, p: f64) -> Result<f64, StatsError> {
        match self {
            Cdf::Empirical(e) => e.quantile(p),
            Cdf::Gaussian { .. } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(StatsError::InvalidProbability { p });
                }
                let (lo, hi) = self.support_bounds();
                Ok(bisect_quantile(|x| self.cdf(x), lo, hi, p))
            }
        }
    }
}

/// Natural log of the binomial coefficient `C(n, k)` via log-gamma.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    libm::lgamma((n + 1) as f64) - libm::lgamma((k + 1) as f64) - libm::lgamma((n - k + 1) as f64)
}

/// CDF of the k-th order statistic of `n` i.i.d. draws from `base`,
/// evaluated at `x`.
pub fn order_statistic_cdf(
    base: &Cdf,
    k: usize,
    n: usize,
    x: f64,
) -> Result<f64, StatsError> {
    OrderStatistic::new(base, k, n).map(|os| os.cdf(x))
}

/// Quantile of the k-th order statistic of `n` i.i.d. draws from `base`.
pub fn order_statistic_quantile(
    base: &Cdf,
    k: usize,
    n: usize,
    p: f64,
) -> Result<f64, StatsError> {
    OrderStatistic::new(base, k, n)?.quantile(p)
}

/// The k-th order statistic of `n` i.i.d. draws from a base distribution.
///
/// With `k = n` this is the maximum — the completion time of an uncoded
/// block of `n` packets. With `k < n` it models a coded block that is
/// reconstructable from any `k` of `n` symbols.
#[derive(Clone, Copy, Debug)]
pub struct OrderStatistic<'a> {
    base: &'a Cdf,
    k: usize,
    n: usize,
}

impl<'a> OrderStatistic<'a> {
    pub fn new(base: &'a Cdf, k: usize, n: usize) -> Result<Self, StatsError> {
        if k == 0 || k > n {
            return Err(StatsError::InvalidOrder { k, n });
        }
        if n > MAX_ORDER_N {
            return Err(StatsError::OrderTooLarge { n });
        }
        Ok(OrderStatistic { base, k, n })
    }
}

impl CumulativeDistribution for OrderStatistic<'_> {
    fn cdf(&self, x: f64) -> f64 {
        let f = self.base.cdf(x).clamp(0.0, 1.0);
        if f <= 0.0 {
            return 0.0;
        }
        if f >= 1.0 {
            return 1.0;
        }
        let (n, k) = (self.n as u64, self.k as u64);
        let ln_f = libm::log(f);
        let ln_g = libm::log(1.0 - f);
        let mut sum = 0.0;
        for j in k..=n {
            sum += libm::exp(ln_binomial(n, j) + j as f64 * ln_f + (n - j) as f64 * ln_g);
        }
        sum.clamp(0.0, 1.0)
    }

    fn quantile(&self, p: f64) -> Result<f64, StatsError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(StatsError::InvalidProbability { p });
        }
        let (lo, hi) = self.base.support_bounds();
        Ok(bisect_quantile(|x| self.cdf(x), lo, hi, p))
    }
}

/// Monotone bisection for the smallest `x` with `cdf(x) >= p`.
fn bisect_quantile<F: Fn(f64) -> f64>(cdf: F, mut lo: f64, mut hi: f64, p: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Latency gain at probability `p`: the uncoded quantile minus the coded
/// quantile. Positive when coding helps; antisymmetric in its arguments.
pub fn gain_at<A, B>(p: f64, uncoded: &A, coded: &B) -> Result<f64, StatsError>
where
    A: CumulativeDistribution,
    B: CumulativeDistribution,
{
    Ok(uncoded.quantile(p)? - coded.quantile(p)?)
}

/// Kolmogorov–Smirnov distance between an empirical CDF and a reference CDF:
/// the supremum of their pointwise difference.
pub fn ks_distance<F: Fn(f64) -> f64>(empirical: &EmpiricalCdf, reference: F) -> f64 {
    let n = empirical.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in empirical.samples().iter().enumerate() {
        let r = reference(x);
        sup = sup.max(r - i as f64 / n).max((i + 1) as f64 / n - r);
    }
    sup
}

/// Sample autocorrelation for lags `0..=max_lag`; `out[0]` is 1 by
/// construction.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>, StatsError> {
    if series.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if series.len() <= max_lag {
        return Err(StatsError::SeriesTooShort { len: series.len(), max_lag });
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let denom: f64 = series.iter().map(|v| (v - mean) * (v - mean)).sum();
    if denom <= 0.0 {
        return Err(StatsError::ConstantSeries);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let num: f64 = (0..n - lag)
            .map(|t| (series[t] - mean) * (series[t + lag] - mean))
            .sum();
        out.push(num / denom);
    }
    Ok(out)
}

/// Completion time of a block whose symbols arrived at `arrival_us` (`None`
/// marks a lost symbol): the k-th earliest arrival minus the send time, or
/// `None` when fewer than `k` symbols arrived.
pub fn block_latency(arrival_us: &[Option<u64>], k: usize, send_us: u64) -> Option<u64> {
    if k == 0 {
        return None;
    }
    let mut delivered: Vec<u64> = arrival_us.iter().flatten().copied().collect();
    if delivered.len() < k {
        return None;
    }
    delivered.sort_unstable();
    Some(delivered[k - 1].saturating_sub(send_us))
}

/// Fixed-width histogram over the sample range.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Half-open edges `[lo, hi)` of bin `i`; the last bin is closed.
    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + i as f64 * width, self.lo + (i + 1) as f64 * width)
    }
}

/// Builds a histogram of `bins` equal-width bins spanning the sample range.
/// A constant series widens its range by one unit so a single bin holds it.
pub fn histogram(series: &[f64], bins: usize) -> Result<Histogram, StatsError> {
    if bins == 0 {
        return Err(StatsError::InvalidBins);
    }
    if series.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let lo = series.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let mut counts = alloc::vec![0u64; bins];
    let scale = bins as f64 / (hi - lo);
    for &v in series {
        let mut bin = ((v - lo) * scale) as usize;
        if bin >= bins {
            bin = bins - 1;
        }
        counts[bin] += 1;
    }
    Ok(Histogram { lo, hi, counts })
}

/// Mean of a sample slice.
pub fn mean(series: &[f64]) -> Result<f64, StatsError> {
    if series.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    Ok(series.iter().sum::<f64>() / series.len() as f64)
}

/// Population variance of a sample slice.
pub fn variance(series: &[f64]) -> Result<f64, StatsError> {
    let m = mean(series)?;
    Ok(series.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / series.len() as f64)
}
