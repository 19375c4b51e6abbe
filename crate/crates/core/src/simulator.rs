//! Synthetic closed populations with known size.
//!
//! Each sample period draws a fixed number of entities with replacement from
//! a multinomial over the population. Optional bursts inject a batch of
//! never-seen entities, each mentioned exactly once, the way a bulk import
//! would. Generation is a pure function of the scenario, seed included.
//!
//! Generator: ChaCha20 stream (`rand_chacha::ChaCha20Rng::seed_from_u64`).
//! A uniform variate in `[0, 1)` is `(next_u64() >> 11) · 2⁻⁵³`; a draw is the
//! first index whose cumulative probability exceeds it. Burst entities are
//! picked by a partial Fisher-Yates shuffle over the unseen indices in
//! ascending order, with bounded integers taken as the high 64 bits of
//! `next_u64() · bound`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observations::{FrequencyHistogram, Mention, DEFAULT_PERIOD_SECONDS, SECONDS_PER_DAY};

pub const GENERATOR: &str = "chacha20/rand_chacha-0.3/seed_from_u64; u53 inverse-cdf draws";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Uniform,
    Zipf { exponent: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Population {
    size: usize,
    distribution: Distribution,
    #[serde(skip)]
    probabilities: Vec<f64>,
}

impl Population {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn distribution(&self) -> Distribution {
        self.distribution
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

pub fn make_population(size: usize, distribution: Distribution) -> Result<Population> {
    if size == 0 {
        return Err(Error::InvalidPopulation("size must be at least 1".into()));
    }
    let weights: Vec<f64> = match distribution {
        Distribution::Uniform => vec![1.0; size],
        Distribution::Zipf { exponent } => {
            if !(exponent > 0.0 && exponent.is_finite()) {
                return Err(Error::InvalidPopulation(format!(
                    "zipf exponent must be positive, got {exponent}"
                )));
            }
            (1..=size).map(|i| (i as f64).powf(-exponent)).collect()
        }
    };
    let total: f64 = weights.iter().sum();
    let probabilities = weights.into_iter().map(|w| w / total).collect();
    Ok(Population {
        size,
        distribution,
        probabilities,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Burst {
    pub period: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub class: String,
    pub entity_prefix: String,
    pub population: Population,
    pub periods: usize,
    pub draws_per_period: usize,
    pub bursts: Vec<Burst>,
    pub seed: u64,
    pub origin: i64,
    pub period_length: i64,
}

impl ScenarioSpec {
    /// Scenario with default naming, origin 0 and 30-day periods.
    pub fn new(population: Population, periods: usize, draws_per_period: usize, seed: u64) -> Self {
        ScenarioSpec {
            class: "synthetic".into(),
            entity_prefix: "e".into(),
            population,
            periods,
            draws_per_period,
            bursts: Vec::new(),
            seed,
            origin: 0,
            period_length: DEFAULT_PERIOD_SECONDS,
        }
    }

    pub fn with_burst(mut self, period: usize, count: usize) -> Self {
        self.bursts.push(Burst { period, count });
        self
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.class = class.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.class.is_empty() || self.entity_prefix.is_empty() {
            return bad("class and entity prefix must be non-empty".into());
        }
        if self.periods == 0 {
            return bad("at least one period required".into());
        }
        if self.draws_per_period == 0 {
            return bad("draws_per_period must be positive".into());
        }
        if self.period_length <= 0 {
            return bad(format!("period length must be positive, got {}", self.period_length));
        }
        if self.origin < 0 {
            return bad(format!("origin must be non-negative, got {}", self.origin));
        }
        for b in &self.bursts {
            if b.period >= self.periods {
                return bad(format!("burst period {} not below {}", b.period, self.periods));
            }
            if b.count > self.population.size {
                return bad(format!(
                    "burst of {} exceeds population size {}",
                    b.count, self.population.size
                ));
            }
        }
        Ok(())
    }

    pub fn entity_name(&self, index: usize) -> String {
        format!("{}{}", self.entity_prefix, index)
    }

    /// Midpoint of period `p`.
    pub fn timestamp(&self, period: usize) -> i64 {
        self.origin + period as i64 * self.period_length + self.period_length / 2
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Simulation {
    pub mentions: Vec<Mention>,
    pub warnings: Vec<String>,
}

struct Draws {
    rng: ChaCha20Rng,
}

impl Draws {
    fn new(seed: u64) -> Self {
        Draws {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn below(&mut self, bound: usize) -> usize {
        ((u128::from(self.rng.next_u64()) * bound as u128) >> 64) as usize
    }
}

/// Mentions of one synthetic class, period by period: the regular draws,
/// then any burst entities.
pub fn simulate(spec: &ScenarioSpec) -> Result<Simulation> {
    spec.validate()?;
    let size = spec.population.size;
    let mut cumulative = Vec::with_capacity(size);
    let mut acc = 0.0;
    for p in &spec.population.probabilities {
        acc += p;
        cumulative.push(acc);
    }

    let mut bursts: BTreeMap<usize, usize> = BTreeMap::new();
    for b in &spec.bursts {
        *bursts.entry(b.period).or_default() += b.count;
    }

    let mut draws = Draws::new(spec.seed);
    let mut seen = vec![false; size];
    let mut sim = Simulation::default();
    sim.mentions.reserve(spec.periods * spec.draws_per_period);
    for period in 0..spec.periods {
        let ts = spec.timestamp(period);
        for _ in 0..spec.draws_per_period {
            let u = draws.unit();
            let idx = cumulative.partition_point(|&c| c <= u).min(size - 1);
            seen[idx] = true;
            sim.mentions.push(Mention {
                entity: spec.entity_name(idx),
                class: spec.class.clone(),
                timestamp: ts,
            });
        }
        if let Some(&requested) = bursts.get(&period) {
            let mut unseen: Vec<usize> = (0..size).filter(|&i| !seen[i]).collect();
            let count = requested.min(unseen.len());
            if count < requested {
                let msg = format!(
                    "burst at period {period} requested {requested} fresh entities, only {} unseen",
                    unseen.len()
                );
                log::warn!("{msg}");
                sim.warnings.push(msg);
            }
            for i in 0..count {
                let j = i + draws.below(unseen.len() - i);
                unseen.swap(i, j);
                let idx = unseen[i];
                seen[idx] = true;
                sim.mentions.push(Mention {
                    entity: spec.entity_name(idx),
                    class: spec.class.clone(),
                    timestamp: ts,
                });
            }
        }
    }
    Ok(sim)
}

/// Reference histogram computed by materializing per-period entity sets.
///
/// All mentions are treated as one class; mentions before `origin` are
/// ignored. Intended as a test oracle.
pub fn naive_frequency_count(mentions: &[Mention], origin: i64, period_length: i64) -> FrequencyHistogram {
    assert!(period_length > 0);
    let mut periods: BTreeMap<i64, BTreeSet<&str>> = BTreeMap::new();
    for m in mentions {
        if m.timestamp < origin {
            continue;
        }
        periods
            .entry((m.timestamp - origin) / period_length)
            .or_default()
            .insert(&m.entity);
    }
    let Some(&last) = periods.keys().next_back() else {
        return FrequencyHistogram::default();
    };
    let mut per_entity: BTreeMap<&str, usize> = BTreeMap::new();
    for entities in periods.values() {
        for e in entities {
            *per_entity.entry(e).or_default() += 1;
        }
    }
    let k = last as usize + 1;
    let mut f: BTreeMap<usize, u64> = BTreeMap::new();
    for x in per_entity.values() {
        *f.entry(*x).or_default() += 1;
    }
    FrequencyHistogram::from_frequencies(k, f).expect("counts bounded by k")
}

/// On-disk scenario (TOML).
///
/// ```toml
/// class = "volcano"        # optional, default "synthetic"
/// entity_prefix = "v"      # optional, default "e"
/// seed = 42
/// periods = 20
/// draws_per_period = 500
/// period_days = 30         # optional
/// origin = 0               # optional, epoch seconds
///
/// [population]
/// size = 1000
/// distribution = "zipf"    # or "uniform"
/// exponent = 1.5           # zipf only
///
/// [[burst]]
/// period = 10
/// count = 200
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_class")]
    pub class: String,
    #[serde(default = "default_prefix")]
    pub entity_prefix: String,
    pub seed: u64,
    pub periods: usize,
    pub draws_per_period: usize,
    #[serde(default = "default_period_days")]
    pub period_days: i64,
    #[serde(default)]
    pub origin: i64,
    pub population: PopulationFile,
    #[serde(default, rename = "burst")]
    pub bursts: Vec<Burst>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationFile {
    pub size: usize,
    pub distribution: DistributionKind,
    #[serde(default)]
    pub exponent: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    Zipf,
}

fn default_class() -> String {
    "synthetic".into()
}

fn default_prefix() -> String {
    "e".into()
}

fn default_period_days() -> i64 {
    DEFAULT_PERIOD_SECONDS / SECONDS_PER_DAY
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn into_spec(self) -> Result<ScenarioSpec> {
        let distribution = match (self.population.distribution, self.population.exponent) {
            (DistributionKind::Uniform, None) => Distribution::Uniform,
            (DistributionKind::Zipf, Some(exponent)) => Distribution::Zipf { exponent },
            (DistributionKind::Uniform, Some(_)) => {
                return Err(Error::InvalidScenario("uniform population takes no exponent".into()))
            }
            (DistributionKind::Zipf, None) => {
                return Err(Error::InvalidScenario("zipf population needs an exponent".into()))
            }
        };
        let population = make_population(self.population.size, distribution)
            .map_err(|e| Error::InvalidScenario(e.to_string()))?;
        let spec = ScenarioSpec {
            class: self.class,
            entity_prefix: self.entity_prefix,
            population,
            periods: self.periods,
            draws_per_period: self.draws_per_period,
            bursts: self.bursts,
            seed: self.seed,
            origin: self.origin,
            period_length: self
                .period_days
                .checked_mul(SECONDS_PER_DAY)
                .ok_or_else(|| Error::InvalidScenario("period_days overflows".into()))?,
        };
        spec.validate()?;
        Ok(spec)
    }
}
