//! The four pipeline commands, independent of argument parsing.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::io::{self as formats, LineStats, MentionWriter};
use crate::metrics::{rank_by_convergence, RankEntry, Ranking, Thresholds};
use crate::observations::MentionAccumulator;
use crate::ontology::{CompositeClassSpec, LiteralRule, PropertyGraph, Resolver};
use crate::report::{build_reports, read_reports, write_reports, ClassReport, EstimateConfig};
use crate::simulator::{simulate, ScenarioFile, ScenarioSpec, GENERATOR};

#[derive(Clone, Debug)]
pub struct ResolveOptions {
    pub edits: PathBuf,
    pub ontology: PathBuf,
    pub properties: Option<PathBuf>,
    /// Empty: every class of every entity.
    pub classes: Vec<CompositeClassSpec>,
    pub literals: LiteralRule,
    pub output: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ResolveSummary {
    /// Non-blank edit lines, malformed ones included.
    pub edits_read: u64,
    /// Edits that produced at least one mention.
    pub edits_contributing: u64,
    /// Well-formed edits whose entities matched no requested class.
    pub edits_without_mentions: u64,
    pub edits_malformed: u64,
    pub mentions: u64,
    pub ontology: LineStats,
    pub properties: LineStats,
}

impl ResolveSummary {
    pub fn edits_skipped(&self) -> u64 {
        self.edits_without_mentions + self.edits_malformed
    }
}

pub fn resolve(opts: &ResolveOptions) -> Result<ResolveSummary> {
    let (index, ontology) = formats::read_ontology(&opts.ontology)?;
    let (graph, properties) = match &opts.properties {
        Some(p) => formats::read_property_graph(p)?,
        None => (PropertyGraph::new(), LineStats::default()),
    };
    let mut resolver = Resolver::new(&index).with_literal_rule(opts.literals.clone());
    if !opts.classes.is_empty() {
        resolver = resolver.with_classes(&opts.classes, &graph);
    }

    let mut writer = MentionWriter::create(&opts.output)?;
    let mut summary = ResolveSummary {
        ontology,
        properties,
        ..Default::default()
    };
    let mut write_err = None;
    let stats = formats::for_each_edit(&opts.edits, |edit| {
        let emitted = resolver.resolve_fields(edit.subject, edit.object, edit.timestamp, |e, c, t| {
            if write_err.is_none() {
                if let Err(err) = writer.write(e, c, t) {
                    write_err = Some(err);
                }
            }
        });
        summary.mentions += emitted as u64;
        if emitted > 0 {
            summary.edits_contributing += 1;
        } else {
            summary.edits_without_mentions += 1;
        }
    })?;
    if let Some(err) = write_err {
        return Err(err);
    }
    writer.finish()?;
    summary.edits_malformed = stats.malformed;
    summary.edits_read = stats.records + stats.malformed;
    debug_assert_eq!(
        summary.edits_read,
        summary.edits_contributing + summary.edits_skipped()
    );
    Ok(summary)
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    pub mentions: Vec<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub output: PathBuf,
    pub config: EstimateConfig,
}

#[derive(Debug)]
pub struct EstimateOutcome {
    pub reports: Vec<ClassReport>,
    pub mentions: LineStats,
    pub skipped_before_origin: u64,
}

/// Read mention files, estimate every class, and return the reports.
pub fn estimate_reports(
    mentions: &[PathBuf],
    ground_truth: Option<&Path>,
    config: &EstimateConfig,
) -> Result<EstimateOutcome> {
    let truth = match ground_truth {
        Some(p) => formats::read_ground_truth(p)?,
        None => BTreeMap::new(),
    };
    let mut acc = MentionAccumulator::new();
    let mut stats = LineStats::default();
    for path in mentions {
        stats.add(formats::read_mentions_into(path, &mut acc)?);
    }
    let set = acc.finish(config.origin, config.period_length)?;
    let reports = build_reports(&set, config, &truth, stats.malformed);
    Ok(EstimateOutcome {
        reports,
        mentions: stats,
        skipped_before_origin: set.skipped_before_origin(),
    })
}

pub fn estimate(opts: &EstimateOptions) -> Result<EstimateOutcome> {
    let outcome = estimate_reports(&opts.mentions, opts.ground_truth.as_deref(), &opts.config)?;
    let file = File::create(&opts.output).map_err(|e| Error::io(&opts.output, e))?;
    write_reports(BufWriter::new(file), &outcome.reports)?;
    Ok(outcome)
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationMetadata {
    pub generator: &'static str,
    pub seed: u64,
    pub class: String,
    pub population_size: usize,
    pub distribution: crate::simulator::Distribution,
    pub periods: usize,
    pub draws_per_period: usize,
    pub bursts: Vec<crate::simulator::Burst>,
    pub origin: i64,
    pub period_seconds: i64,
    pub mentions: usize,
    pub warnings: Vec<String>,
}

/// Sidecar path holding simulation metadata: `<output>.meta.json`.
pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn simulate_scenario(spec: &ScenarioSpec, output: &Path) -> Result<SimulationMetadata> {
    let sim = simulate(spec)?;
    let mut writer = MentionWriter::create(output)?;
    for m in &sim.mentions {
        writer.write_mention(m)?;
    }
    writer.finish()?;
    let meta = SimulationMetadata {
        generator: GENERATOR,
        seed: spec.seed,
        class: spec.class.clone(),
        population_size: spec.population.size(),
        distribution: spec.population.distribution(),
        periods: spec.periods,
        draws_per_period: spec.draws_per_period,
        bursts: spec.bursts.clone(),
        origin: spec.origin,
        period_seconds: spec.period_length,
        mentions: sim.mentions.len(),
        warnings: sim.warnings,
    };
    let meta_path = metadata_path(output);
    let file = File::create(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &meta)?;
    Ok(meta)
}

/// Simulate from a scenario file. The scenario is validated before any
/// output is created.
pub fn simulate_file(scenario: &Path, output: &Path) -> Result<SimulationMetadata> {
    let spec = ScenarioFile::load(scenario)?.into_spec()?;
    simulate_scenario(&spec, output)
}

#[derive(Clone, Debug)]
pub struct RankOptions {
    /// Report files or directories of `*.jsonl` reports.
    pub inputs: Vec<PathBuf>,
    pub thresholds: Thresholds,
    pub method: Method,
    pub output_dir: PathBuf,
}

#[derive(Debug, Default)]
pub struct RankOutcome {
    pub ranking: Ranking,
    pub warnings: Vec<String>,
    pub complete_path: PathBuf,
    pub incomplete_path: PathBuf,
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| Error::io(input, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn write_ranking(path: &Path, entries: &[RankEntry]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(["class", "rho", "distinct"])?;
    for e in entries {
        w.serialize(e)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Rank classes from report files by the `ρ` of one estimator and write
/// `complete.csv` and `incomplete.csv`. A class seen in several reports
/// keeps the last one read.
pub fn rank(opts: &RankOptions) -> Result<RankOutcome> {
    let mut latest: BTreeMap<String, ClassReport> = BTreeMap::new();
    let mut warnings = Vec::new();
    for path in expand_inputs(&opts.inputs)? {
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let reports = read_reports(BufReader::new(file)).map_err(|e| Error::parse(&path, e.to_string()))?;
        for r in reports {
            if latest.contains_key(&r.class) {
                let msg = format!("class {} reported again in {}; keeping the later report", r.class, path.display());
                log::warn!("{msg}");
                warnings.push(msg);
            }
            latest.insert(r.class.clone(), r);
        }
    }
    let ranking = rank_by_convergence(
        latest.into_values().map(|r| {
            let rho = r.rho.get(&opts.method).copied().flatten();
            let d = r.final_distinct();
            (r.class, rho, d)
        }),
        opts.thresholds,
    );
    fs::create_dir_all(&opts.output_dir).map_err(|e| Error::io(&opts.output_dir, e))?;
    let complete_path = opts.output_dir.join("complete.csv");
    let incomplete_path = opts.output_dir.join("incomplete.csv");
    write_ranking(&complete_path, &ranking.complete)?;
    write_ranking(&incomplete_path, &ranking.incomplete)?;
    Ok(RankOutcome {
        ranking,
        warnings,
        complete_path,
        incomplete_path,
    })
}
