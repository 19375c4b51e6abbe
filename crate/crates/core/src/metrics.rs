//! Estimator quality metrics.
//!
//! `φ` weighs the absolute error of each period's estimate against a known
//! class size by the (1-based) period index, so recent periods count more.
//! `ρ` needs no ground truth: it is the mean relative gap between the estimate
//! and the distinct count over the last `w` periods. A class whose estimates
//! have collapsed onto the distinct count has converged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{Estimate, Method};
use crate::observations::FrequencyHistogram;

pub const DEFAULT_WINDOW: usize = 4;
pub const DEFAULT_LOW_THRESHOLD: f64 = 0.001;
pub const DEFAULT_HIGH_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("no defined estimates")]
    NoDefinedEstimates,
    #[error("ground truth must be positive")]
    NonPositiveTruth,
    #[error("window of {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("window must be at least 1")]
    EmptyWindow,
    #[error("estimate undefined at period {0}")]
    UndefinedInWindow(usize),
    #[error("no distinct entities at period {0}")]
    ZeroDistinctInWindow(usize),
    #[error("estimate and distinct series differ in length")]
    LengthMismatch,
}

/// Which periods enter the `ρ` sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoWindow {
    /// The last `w` periods, mean over `w` terms.
    #[default]
    LastW,
    /// Periods `k−w ..= k` (`w + 1` terms) divided by `w`. Comparison only.
    Inclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub period: usize,
    pub distinct: u64,
    pub observations: u64,
    pub singletons: u64,
    pub estimates: BTreeMap<Method, Option<f64>>,
}

/// Per-period estimates of one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSeries {
    pub class: String,
    pub records: Vec<SeriesRecord>,
}

impl EstimateSeries {
    pub fn from_histograms<F>(class: impl Into<String>, histograms: &[FrequencyHistogram], mut estimate: F) -> Self
    where
        F: FnMut(&FrequencyHistogram) -> Vec<Estimate>,
    {
        let records = histograms
            .iter()
            .enumerate()
            .map(|(period, h)| SeriesRecord {
                period,
                distinct: h.distinct(),
                observations: h.n(),
                singletons: h.singletons(),
                estimates: estimate(h).into_iter().map(|e| (e.method, e.value)).collect(),
            })
            .collect();
        let series = EstimateSeries {
            class: class.into(),
            records,
        };
        debug_assert!(series.records.windows(2).all(|w| w[0].distinct <= w[1].distinct));
        series
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn distincts(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.distinct).collect()
    }

    /// Values of `method`, `None` where undefined or not computed.
    pub fn values(&self, method: Method) -> Vec<Option<f64>> {
        self.records
            .iter()
            .map(|r| r.estimates.get(&method).copied().flatten())
            .collect()
    }

    /// The distinct count treated as an estimator (the lower-bound baseline).
    pub fn distinct_values(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| Some(r.distinct as f64)).collect()
    }

    pub fn last(&self) -> Option<&SeriesRecord> {
        self.records.last()
    }
}

/// Recency-weighted mean absolute error against `truth`.
///
/// Period `i` (1-based) has weight `i`; undefined estimates drop both their
/// term and their weight.
pub fn phi_error(estimates: &[Option<f64>], truth: f64) -> Result<f64, MetricError> {
    if !(truth > 0.0) {
        return Err(MetricError::NonPositiveTruth);
    }
    let mut weighted = 0.0;
    let mut weights = 0.0;
    for (idx, est) in estimates.iter().enumerate() {
        if let Some(v) = est {
            let w = (idx + 1) as f64;
            weighted += (v - truth).abs() * w;
            weights += w;
        }
    }
    if weights == 0.0 {
        return Err(MetricError::NoDefinedEstimates);
    }
    Ok(weighted / weights)
}

/// Mean relative gap `|N̂_i − D_i| / D_i` over the trailing window.
pub fn rho_convergence(
    estimates: &[Option<f64>],
    distinct: &[u64],
    window: usize,
    mode: RhoWindow,
) -> Result<f64, MetricError> {
    if estimates.len() != distinct.len() {
        return Err(MetricError::LengthMismatch);
    }
    if window == 0 {
        return Err(MetricError::EmptyWindow);
    }
    let terms = match mode {
        RhoWindow::LastW => window,
        RhoWindow::Inclusive => window + 1,
    };
    let len = estimates.len();
    if terms > len {
        return Err(MetricError::WindowTooLarge { window: terms, len });
    }
    let mut sum = 0.0;
    for idx in len - terms..len {
        let est = estimates[idx].ok_or(MetricError::UndefinedInWindow(idx))?;
        let d = distinct[idx];
        if d == 0 {
            return Err(MetricError::ZeroDistinctInWindow(idx));
        }
        let d = d as f64;
        sum += (est - d).abs() / d;
    }
    Ok(sum / window as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    Complete,
    Incomplete,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            low: DEFAULT_LOW_THRESHOLD,
            high: DEFAULT_HIGH_THRESHOLD,
        }
    }
}

impl Thresholds {
    pub fn classify(&self, rho: Option<f64>) -> Completeness {
        match rho {
            Some(r) if r < self.low => Completeness::Complete,
            Some(r) if r > self.high => Completeness::Incomplete,
            _ => Completeness::Indeterminate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub class: String,
    pub rho: f64,
    pub distinct: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ranking {
    /// `ρ` below the low threshold, ascending.
    pub complete: Vec<RankEntry>,
    /// `ρ` above the high threshold, descending.
    pub incomplete: Vec<RankEntry>,
    pub undefined: usize,
}

/// Partition classes into complete and incomplete candidates by `ρ`.
pub fn rank_by_convergence<I>(entries: I, thresholds: Thresholds) -> Ranking
where
    I: IntoIterator<Item = (String, Option<f64>, u64)>,
{
    let mut ranking = Ranking::default();
    for (class, rho, distinct) in entries {
        let Some(rho) = rho else {
            ranking.undefined += 1;
            continue;
        };
        let entry = RankEntry { class, rho, distinct };
        match thresholds.classify(Some(rho)) {
            Completeness::Complete => ranking.complete.push(entry),
            Completeness::Incomplete => ranking.incomplete.push(entry),
            Completeness::Indeterminate => {}
        }
    }
    ranking
        .complete
        .sort_by(|a, b| a.rho.total_cmp(&b.rho).then_with(|| a.class.cmp(&b.class)));
    ranking
        .incomplete
        .sort_by(|a, b| b.rho.total_cmp(&a.rho).then_with(|| a.class.cmp(&b.class)));
    ranking
}
