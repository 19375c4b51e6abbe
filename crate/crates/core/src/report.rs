//! Per-class reports: estimate series, convergence and optional error
//! against ground truth. Serialized one JSON object per line.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::{estimate_all, EstimatorOptions, GammaReading, Method};
use crate::metrics::{
    phi_error, rho_convergence, Completeness, EstimateSeries, RhoWindow, SeriesRecord, Thresholds,
    DEFAULT_WINDOW,
};
use crate::observations::{ObservationSet, PeriodizedObservations, DEFAULT_PERIOD_SECONDS, SECONDS_PER_DAY};
use crate::ontology::CompositeClassSpec;

/// Settings of an estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateConfig {
    pub period_length: i64,
    /// `None`: midnight UTC before the earliest mention.
    pub origin: Option<i64>,
    pub window: usize,
    pub methods: BTreeSet<Method>,
    pub thresholds: Thresholds,
    pub gamma: GammaReading,
    pub rho_window: RhoWindow,
    /// Classes with fewer observations in total are not reported.
    pub min_observations: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            period_length: DEFAULT_PERIOD_SECONDS,
            origin: None,
            window: DEFAULT_WINDOW,
            methods: Method::DEFAULT.into_iter().collect(),
            thresholds: Thresholds::default(),
            gamma: GammaReading::Standard,
            rho_window: RhoWindow::LastW,
            min_observations: 0,
        }
    }
}

/// Configuration as echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub period_days: f64,
    pub period_seconds: i64,
    pub origin: i64,
    pub window: usize,
    pub methods: Vec<Method>,
    pub thresholds: Thresholds,
    pub gamma: GammaReading,
    pub rho_window: RhoWindow,
    pub min_observations: u64,
}

impl ReportConfig {
    pub fn new(config: &EstimateConfig, origin: i64) -> Self {
        ReportConfig {
            period_days: config.period_length as f64 / SECONDS_PER_DAY as f64,
            period_seconds: config.period_length,
            origin,
            window: config.window,
            methods: config.methods.iter().copied().collect(),
            thresholds: config.thresholds,
            gamma: config.gamma,
            rho_window: config.rho_window,
            min_observations: config.min_observations,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounters {
    /// Unparseable input lines.
    pub malformed: u64,
    /// Mentions dated before the origin.
    pub before_origin: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite: Option<CompositeClassSpec>,
    pub config: ReportConfig,
    pub series: Vec<SeriesRecord>,
    pub rho: BTreeMap<Method, Option<f64>>,
    pub completeness: BTreeMap<Method, Completeness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub experimental: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<BTreeMap<Method, Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_distinct: Option<f64>,
    pub skipped: SkipCounters,
}

impl ClassReport {
    pub fn estimate_series(&self) -> EstimateSeries {
        EstimateSeries {
            class: self.class.clone(),
            records: self.series.clone(),
        }
    }

    /// Distinct count at the last period.
    pub fn final_distinct(&self) -> u64 {
        self.series.last().map_or(0, |r| r.distinct)
    }

    pub fn final_estimate(&self, method: Method) -> Option<f64> {
        self.series
            .last()
            .and_then(|r| r.estimates.get(&method).copied().flatten())
    }
}

pub fn build_report(
    obs: &PeriodizedObservations,
    config: &EstimateConfig,
    echo: &ReportConfig,
    ground_truth: Option<f64>,
    skipped: SkipCounters,
) -> ClassReport {
    let options = EstimatorOptions { gamma: config.gamma };
    let histograms = obs.series_histograms();
    let series = EstimateSeries::from_histograms(obs.class(), &histograms, |h| {
        estimate_all(h, &config.methods, options)
    });
    let distinct = series.distincts();

    let mut rho = BTreeMap::new();
    let mut completeness = BTreeMap::new();
    for &m in &config.methods {
        let r = rho_convergence(&series.values(m), &distinct, config.window, config.rho_window).ok();
        rho.insert(m, r);
        completeness.insert(m, config.thresholds.classify(r));
    }

    let (phi, phi_distinct) = match ground_truth {
        Some(truth) => {
            let phi = config
                .methods
                .iter()
                .map(|&m| (m, phi_error(&series.values(m), truth).ok()))
                .collect();
            (Some(phi), phi_error(&series.distinct_values(), truth).ok())
        }
        None => (None, None),
    };

    let composite = obs
        .class()
        .contains('[')
        .then(|| obs.class().parse::<CompositeClassSpec>().ok())
        .flatten();

    ClassReport {
        class: obs.class().to_owned(),
        composite,
        config: echo.clone(),
        series: series.records,
        rho,
        completeness,
        experimental: config.methods.iter().copied().filter(|m| m.is_experimental()).collect(),
        ground_truth,
        phi,
        phi_distinct,
        skipped,
    }
}

/// Reports for every class in `set`, ordered by class id.
pub fn build_reports(
    set: &ObservationSet,
    config: &EstimateConfig,
    ground_truth: &BTreeMap<String, f64>,
    malformed: u64,
) -> Vec<ClassReport> {
    let echo = ReportConfig::new(config, set.origin());
    let skipped = SkipCounters {
        malformed,
        before_origin: set.skipped_before_origin(),
    };
    let classes: Vec<&PeriodizedObservations> = set
        .classes()
        .filter(|o| o.total_observations() >= config.min_observations)
        .collect();
    classes
        .par_iter()
        .map(|obs| build_report(obs, config, &echo, ground_truth.get(obs.class()).copied(), skipped))
        .collect()
}

pub fn write_reports<W: Write>(mut out: W, reports: &[ClassReport]) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(serde_json::Error::io)?;
    }
    out.flush().map_err(serde_json::Error::io)?;
    Ok(())
}

pub fn read_reports<R: BufRead>(input: R) -> Result<Vec<ClassReport>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line.map_err(serde_json::Error::io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
