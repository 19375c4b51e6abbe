use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use kgcensus::commands::{self, EstimateOptions, RankOptions, ResolveOptions};
use kgcensus::io::parse_timestamp;
use kgcensus::observations::SECONDS_PER_DAY;
use kgcensus::ontology::{parse_filter, CompositeClassSpec, LiteralRule};
use kgcensus::{EstimateConfig, GammaReading, Method, RhoWindow, Thresholds};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;

/// Estimate class sizes and completeness of a knowledge graph from its edit history.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "KGCENSUS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Join an edit history with the ontology and write per-class mentions.
    Resolve {
        #[arg(long)]
        edits: PathBuf,
        #[arg(long)]
        ontology: PathBuf,
        /// entity<TAB>property<TAB>target file for composite classes.
        #[arg(long)]
        properties: Option<PathBuf>,
        /// Restrict to a class (repeatable).
        #[arg(long = "class", value_name = "CLASS")]
        classes: Vec<String>,
        /// PROPERTY=TARGET filter on the preceding --class (repeatable).
        #[arg(long = "where", value_name = "P=V")]
        filters: Vec<String>,
        /// Regex an object must fully match to count as an entity
        /// (default: Q-ids).
        #[arg(long, conflicts_with = "no_literals")]
        entity_pattern: Option<String>,
        /// Treat every object as an entity.
        #[arg(long)]
        no_literals: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Estimate class sizes from mention files; one JSON report per class.
    Estimate {
        #[arg(required = true)]
        mentions: Vec<PathBuf>,
        #[arg(long, default_value_t = 30)]
        period_days: i64,
        /// Overrides --period-days.
        #[arg(long, hide = true)]
        period_seconds: Option<i64>,
        /// Epoch seconds or ISO-8601 (default: midnight before the first mention).
        #[arg(long)]
        origin: Option<String>,
        #[arg(long, default_value_t = 4)]
        window: usize,
        #[arg(long, value_delimiter = ',', default_value = "JACK1,N1_UNIF,SOR,CHAO92")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 0.001)]
        low: f64,
        #[arg(long, default_value_t = 0.1)]
        high: f64,
        /// class,N CSV.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        min_observations: u64,
        #[arg(long, value_enum, default_value_t = GammaArg::Standard)]
        gamma: GammaArg,
        #[arg(long, value_enum, default_value_t = RhoArg::LastW)]
        rho_window: RhoArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a synthetic mention file from a scenario.
    Simulate {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Split reported classes into complete and incomplete candidates.
    Rank {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.001)]
        low: f64,
        #[arg(long, default_value_t = 0.1)]
        high: f64,
        #[arg(long, default_value = "SOR")]
        method: Method,
        #[arg(short, long)]
        output_dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GammaArg {
    Standard,
    Literal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RhoArg {
    LastW,
    Inclusive,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

/// Pair every `--where` with the closest preceding `--class`.
fn class_specs(m: &ArgMatches) -> Result<Vec<CompositeClassSpec>, String> {
    let classes: Vec<(usize, &String)> = match (m.indices_of("classes"), m.get_many::<String>("classes")) {
        (Some(i), Some(v)) => i.zip(v).collect(),
        _ => Vec::new(),
    };
    let filters: Vec<(usize, &String)> = match (m.indices_of("filters"), m.get_many::<String>("filters")) {
        (Some(i), Some(v)) => i.zip(v).collect(),
        _ => Vec::new(),
    };
    let mut specs: Vec<CompositeClassSpec> = classes
        .iter()
        .map(|(_, c)| CompositeClassSpec::single(c.as_str()))
        .collect();
    for (idx, f) in filters {
        let owner = classes
            .iter()
            .rposition(|(ci, _)| *ci < idx)
            .ok_or_else(|| format!("--where {f} must follow a --class"))?;
        let (p, v) = parse_filter(f).ok_or_else(|| format!("invalid filter `{f}`, expected PROPERTY=TARGET"))?;
        specs[owner].filters.push((p, v));
    }
    Ok(specs)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return usage(e);
        }
    }

    let result = match cli.command {
        Command::Resolve {
            edits,
            ontology,
            properties,
            entity_pattern,
            no_literals,
            output,
            ..
        } => {
            let sub = matches.subcommand_matches("resolve").expect("resolve matches");
            let classes = match class_specs(sub) {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            let literals = match (entity_pattern, no_literals) {
                (Some(p), _) => match LiteralRule::pattern(&p) {
                    Ok(r) => r,
                    Err(e) => return usage(e),
                },
                (None, true) => LiteralRule::None,
                (None, false) => LiteralRule::ItemIds,
            };
            let opts = ResolveOptions {
                edits,
                ontology,
                properties,
                classes,
                literals,
                output,
            };
            commands::resolve(&opts).map(|s| {
                println!(
                    "edits read: {}, mentions emitted: {}, edits contributing: {}, edits skipped: {} ({} malformed, {} without mentions)",
                    s.edits_read,
                    s.mentions,
                    s.edits_contributing,
                    s.edits_skipped(),
                    s.edits_malformed,
                    s.edits_without_mentions
                );
                println!(
                    "ontology statements: {} ({} skipped)",
                    s.ontology.records, s.ontology.malformed
                );
            })
        }
        Command::Estimate {
            mentions,
            period_days,
            period_seconds,
            origin,
            window,
            methods,
            low,
            high,
            ground_truth,
            min_observations,
            gamma,
            rho_window,
            output,
        } => {
            let period_length = period_seconds.unwrap_or(period_days.saturating_mul(SECONDS_PER_DAY));
            if period_length <= 0 {
                return usage("period length must be positive");
            }
            if window == 0 {
                return usage("window must be at least 1");
            }
            if !(low <= high) {
                return usage("--low must not exceed --high");
            }
            let origin = match origin.as_deref().map(|o| parse_timestamp(o).ok_or(o)) {
                None => None,
                Some(Ok(t)) => Some(t),
                Some(Err(o)) => return usage(format!("invalid origin `{o}`")),
            };
            let config = EstimateConfig {
                period_length,
                origin,
                window,
                methods: methods.into_iter().collect::<BTreeSet<_>>(),
                thresholds: Thresholds { low, high },
                gamma: match gamma {
                    GammaArg::Standard => GammaReading::Standard,
                    GammaArg::Literal => GammaReading::LiteralDenominator,
                },
                rho_window: match rho_window {
                    RhoArg::LastW => RhoWindow::LastW,
                    RhoArg::Inclusive => RhoWindow::Inclusive,
                },
                min_observations,
            };
            let opts = EstimateOptions {
                mentions,
                ground_truth,
                output,
                config,
            };
            commands::estimate(&opts).map(|o| {
                println!(
                    "mentions read: {} ({} malformed, {} before origin), classes reported: {}",
                    o.mentions.records,
                    o.mentions.malformed,
                    o.skipped_before_origin,
                    o.reports.len()
                );
            })
        }
        Command::Simulate { scenario, output } => commands::simulate_file(&scenario, &output).map(|m| {
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote {} mentions (seed {}, {})",
                m.mentions, m.seed, m.generator
            );
        }),
        Command::Rank {
            reports,
            low,
            high,
            method,
            output_dir,
        } => {
            if !(low <= high) {
                return usage("--low must not exceed --high");
            }
            let opts = RankOptions {
                inputs: reports,
                thresholds: Thresholds { low, high },
                method,
                output_dir,
            };
            commands::rank(&opts).map(|o| {
                for w in &o.warnings {
                    eprintln!("warning: {w}");
                }
                println!(
                    "complete: {}, incomplete: {}, undefined rho: {}",
                    o.ranking.complete.len(),
                    o.ranking.incomplete.len(),
                    o.ranking.undefined
                );
            })
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
