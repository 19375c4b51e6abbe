//! Non-parametric class-size estimators over a [`FrequencyHistogram`].
//!
//! All estimators read only `k`, `n`, `D` and the `f_i` counts. Formulas that
//! divide by the Good-Turing sample coverage `Ŝ = 1 - f₁/n` are undefined when
//! every observed entity is a singleton; such results are reported as
//! undefined estimates rather than errors.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::observations::FrequencyHistogram;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "JACK1")]
    Jack1,
    /// Second-order jackknife. Known to over-estimate on large samples and
    /// therefore not part of [`Method::DEFAULT`].
    #[serde(rename = "JACK2")]
    Jack2,
    #[serde(rename = "N1_UNIF")]
    N1Unif,
    #[serde(rename = "SOR")]
    Sor,
    #[serde(rename = "CHAO92")]
    Chao92,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Jack1,
        Method::Jack2,
        Method::N1Unif,
        Method::Sor,
        Method::Chao92,
    ];

    pub const DEFAULT: [Method; 4] = [Method::Jack1, Method::N1Unif, Method::Sor, Method::Chao92];

    pub fn name(self) -> &'static str {
        match self {
            Method::Jack1 => "JACK1",
            Method::Jack2 => "JACK2",
            Method::N1Unif => "N1_UNIF",
            Method::Sor => "SOR",
            Method::Chao92 => "CHAO92",
        }
    }

    pub fn is_experimental(self) -> bool {
        self == Method::Jack2
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| format!("unknown estimator `{s}` (expected one of JACK1, JACK2, N1_UNIF, SOR, CHAO92)"))
    }
}

/// How the squared coefficient of variation is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaReading {
    /// `max{N̂ Σ i(i−1)f_i / (n(n−1)) − 1, 0}`.
    #[default]
    Standard,
    /// `max{N̂ Σ i(i−1)f_i / (n(n−1) − 1), 0}`: the `−1` taken as part of the
    /// denominator. Kept for comparison only; it is not dimensionless.
    LiteralDenominator,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub gamma: GammaReading,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub method: Method,
    /// `None` when the formula is undefined for the histogram.
    pub value: Option<f64>,
}

impl Estimate {
    fn new(method: Method, value: Option<f64>) -> Self {
        debug_assert!(value.is_none_or(|v| v.is_finite() && v >= 0.0));
        Estimate { method, value }
    }

    pub fn defined(&self) -> bool {
        self.value.is_some()
    }
}

/// `D + (k−1)/k · f₁`.
pub fn jack1(h: &FrequencyHistogram) -> Estimate {
    let d = h.distinct() as f64;
    let f1 = h.singletons();
    if f1 == 0 {
        return Estimate::new(Method::Jack1, Some(d));
    }
    let k = h.k() as f64;
    Estimate::new(Method::Jack1, Some(d + (k - 1.0) / k * f1 as f64))
}

/// `D + (2k−3)/k · f₁ − (k−2)²/(k(k−1)) · f₂`, undefined for `k < 2`.
///
/// Unlike the other estimators this one can fall below `D` (when `f₂`
/// dominates `f₁`).
pub fn jack2(h: &FrequencyHistogram) -> Estimate {
    if h.k() < 2 {
        return Estimate::new(Method::Jack2, None);
    }
    let k = h.k() as f64;
    let d = h.distinct() as f64;
    let f1 = h.singletons() as f64;
    let f2 = h.doubletons() as f64;
    let value = d + (2.0 * k - 3.0) / k * f1 - (k - 2.0).powi(2) / (k * (k - 1.0)) * f2;
    Estimate::new(Method::Jack2, Some(value))
}

/// Good-Turing sample coverage `1 − f₁/n`; `None` for `n = 0`.
pub fn sample_coverage(h: &FrequencyHistogram) -> Option<f64> {
    if h.n() == 0 {
        return None;
    }
    Some(1.0 - h.singletons() as f64 / h.n() as f64)
}

fn coverage_estimate(h: &FrequencyHistogram) -> Option<f64> {
    let coverage = sample_coverage(h)?;
    (coverage > 0.0).then(|| h.distinct() as f64 / coverage)
}

/// `D / Ŝ`.
pub fn n1_unif(h: &FrequencyHistogram) -> Estimate {
    Estimate::new(Method::N1Unif, coverage_estimate(h))
}

/// Singleton count after clamping to two standard deviations above the mean
/// of the other non-zero frequency counts.
///
/// With fewer than three distinct observed frequencies the dispersion cannot
/// be estimated and `f₁` is returned unchanged.
pub fn clamped_singletons(h: &FrequencyHistogram) -> f64 {
    let f1 = h.singletons() as f64;
    let classes = h.frequencies().count();
    if classes < 3 {
        return f1;
    }
    let others: Vec<f64> = h
        .frequencies()
        .filter(|&(i, _)| i > 1)
        .map(|(_, f)| f as f64)
        .collect();
    let mean = others.iter().sum::<f64>() / (classes - 1) as f64;
    let var = others.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (classes - 2) as f64;
    f1.min(2.0 * var.sqrt() + mean)
}

/// `D / (1 − f̃₁/n)` with `f̃₁` from [`clamped_singletons`].
pub fn sor(h: &FrequencyHistogram) -> Estimate {
    if h.n() == 0 {
        return Estimate::new(Method::Sor, None);
    }
    let clamped = clamped_singletons(h);
    if clamped == h.singletons() as f64 {
        // Shares the exact floating-point path of N1-UNIF.
        return Estimate::new(Method::Sor, coverage_estimate(h));
    }
    let coverage = 1.0 - clamped / h.n() as f64;
    let value = (coverage > 0.0).then(|| h.distinct() as f64 / coverage);
    Estimate::new(Method::Sor, value)
}

/// Estimated squared coefficient of variation of the capture probabilities.
/// `None` when `n < 2` or the coverage is zero.
pub fn gamma_squared(h: &FrequencyHistogram) -> Option<f64> {
    gamma_squared_with(h, GammaReading::Standard)
}

pub fn gamma_squared_with(h: &FrequencyHistogram, reading: GammaReading) -> Option<f64> {
    if h.n() < 2 {
        return None;
    }
    let unif = coverage_estimate(h)?;
    let pairs: f64 = h
        .frequencies()
        .map(|(i, f)| (i as f64) * (i as f64 - 1.0) * f as f64)
        .sum();
    let n = h.n() as f64;
    let raw = match reading {
        GammaReading::Standard => unif * pairs / (n * (n - 1.0)) - 1.0,
        GammaReading::LiteralDenominator => unif * pairs / (n * (n - 1.0) - 1.0),
    };
    Some(raw.max(0.0))
}

/// `(D + f₁γ²) / Ŝ`.
pub fn chao92(h: &FrequencyHistogram) -> Estimate {
    chao92_with(h, GammaReading::Standard)
}

pub fn chao92_with(h: &FrequencyHistogram, reading: GammaReading) -> Estimate {
    let value = gamma_squared_with(h, reading).and_then(|gamma2| {
        let coverage = sample_coverage(h)?;
        let d = h.distinct() as f64;
        let f1 = h.singletons() as f64;
        Some((d + f1 * gamma2) / coverage)
    });
    Estimate::new(Method::Chao92, value)
}

pub fn estimate(h: &FrequencyHistogram, method: Method, options: EstimatorOptions) -> Estimate {
    match method {
        Method::Jack1 => jack1(h),
        Method::Jack2 => jack2(h),
        Method::N1Unif => n1_unif(h),
        Method::Sor => sor(h),
        Method::Chao92 => chao92_with(h, options.gamma),
    }
}

/// One estimate per requested method, ordered as in [`Method::ALL`].
pub fn estimate_all(
    h: &FrequencyHistogram,
    methods: &BTreeSet<Method>,
    options: EstimatorOptions,
) -> Vec<Estimate> {
    methods.iter().map(|&m| estimate(h, m, options)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hist(k: usize, f: &[(usize, u64)]) -> FrequencyHistogram {
        FrequencyHistogram::from_frequencies(k, f.iter().copied()).unwrap()
    }

    fn small() -> FrequencyHistogram {
        hist(2, &[(1, 2), (2, 1)])
    }

    fn skewed() -> FrequencyHistogram {
        hist(3, &[(1, 5), (2, 2), (3, 1)])
    }

    fn value(e: Estimate) -> f64 {
        e.value.expect("defined")
    }

    #[test]
    fn jack1_examples() {
        assert_eq!(value(jack1(&small())), 4.0);
        assert_eq!(value(jack1(&hist(3, &[(2, 4)]))), 4.0);
        assert_eq!(value(jack1(&hist(1, &[(1, 5)]))), 5.0);
        assert_eq!(value(jack1(&FrequencyHistogram::default())), 0.0);
    }

    #[test]
    fn jack2_examples() {
        assert_eq!(value(jack2(&small())), 4.0);
        assert_eq!(value(jack2(&hist(4, &[(3, 2), (4, 1)]))), 3.0);
        // 8 + 1·5 − (1/6)·2
        assert_abs_diff_eq!(value(jack2(&skewed())), 8.0 + 5.0 - 2.0 / 6.0, epsilon = 1e-12);
        assert!(!jack2(&hist(1, &[(1, 3)])).defined());
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(sample_coverage(&small()), Some(0.5));
        assert_eq!(sample_coverage(&hist(2, &[(2, 3)])), Some(1.0));
        assert_eq!(sample_coverage(&hist(2, &[(1, 3)])), Some(0.0));
        assert_eq!(sample_coverage(&FrequencyHistogram::default()), None);
    }

    #[test]
    fn n1_unif_examples() {
        assert_eq!(value(n1_unif(&small())), 6.0);
        assert_eq!(value(n1_unif(&hist(3, &[(2, 2), (3, 1)]))), 3.0);
        assert!(!n1_unif(&hist(3, &[(1, 4)])).defined());
        assert!(!n1_unif(&FrequencyHistogram::default()).defined());
    }

    #[test]
    fn sor_examples() {
        let h = skewed();
        let sigma = 0.5f64.sqrt();
        assert_abs_diff_eq!(clamped_singletons(&h), 2.0 * sigma + 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(value(sor(&h)), 10.566, epsilon = 1e-3);
        // two frequency classes: no clamp
        assert_eq!(value(sor(&small())), value(n1_unif(&small())));
        assert_eq!(value(sor(&hist(3, &[(2, 2), (3, 1)]))), 3.0);
    }

    #[test]
    fn sor_undefined_when_clamped_singletons_equal_n() {
        assert!(!sor(&hist(2, &[(1, 4)])).defined());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_squared(&small()), Some(0.0));
        let g = gamma_squared(&skewed()).unwrap();
        assert_abs_diff_eq!(g, (96.0 / 7.0) * 10.0 / 132.0 - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g, 0.0390, epsilon = 1e-4);
        assert_eq!(gamma_squared(&hist(2, &[(2, 1)])), Some(0.0));
        assert_eq!(gamma_squared(&hist(1, &[(1, 1)])), None);
        assert_eq!(gamma_squared(&hist(1, &[(1, 3)])), None);
    }

    #[test]
    fn literal_gamma_reading_differs() {
        let g = gamma_squared_with(&skewed(), GammaReading::LiteralDenominator).unwrap();
        assert_abs_diff_eq!(g, (96.0 / 7.0) * 10.0 / 131.0, epsilon = 1e-12);
    }

    #[test]
    fn chao92_examples() {
        assert_eq!(value(chao92(&small())), 6.0);
        assert_abs_diff_eq!(value(chao92(&skewed())), 14.048, epsilon = 1e-3);
        assert_eq!(value(chao92(&hist(3, &[(2, 2), (3, 1)]))), 3.0);
        assert!(!chao92(&hist(2, &[(1, 3)])).defined());
    }

    #[test]
    fn estimate_all_orders_and_keeps_undefined() {
        let all: BTreeSet<Method> = Method::ALL.into_iter().collect();
        let got = estimate_all(&small(), &all, EstimatorOptions::default());
        let values: Vec<(Method, Option<f64>)> = got.iter().map(|e| (e.method, e.value)).collect();
        assert_eq!(
            values,
            vec![
                (Method::Jack1, Some(4.0)),
                (Method::Jack2, Some(4.0)),
                (Method::N1Unif, Some(6.0)),
                (Method::Sor, Some(6.0)),
                (Method::Chao92, Some(6.0)),
            ]
        );

        let empty = estimate_all(&FrequencyHistogram::default(), &all, EstimatorOptions::default());
        assert_eq!(empty.len(), 5);
        assert_eq!(empty[0].value, Some(0.0));
        assert!(empty[1..].iter().all(|e| !e.defined()));

        let one = estimate_all(&small(), &BTreeSet::from([Method::Jack1]), EstimatorOptions::default());
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert_eq!("n1-unif".parse::<Method>().unwrap(), Method::N1Unif);
        assert!("chao1".parse::<Method>().is_err());
    }
}
