//! Mentions, per-period observations and frequency-of-frequencies histograms.
//!
//! A [`Mention`] is one timestamped reference to an entity as a member of a
//! class. Mentions are bucketed into fixed-length sample periods counted from
//! an origin; within a period an entity is observed at most once per class.
//! Across the periods seen so far, `X_j` is the number of periods in which
//! entity `j` was observed and `f_i` the number of entities with `X_j = i`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intern::Interner;

pub const SECONDS_PER_DAY: i64 = 86_400;

/// 30 days.
pub const DEFAULT_PERIOD_SECONDS: i64 = 30 * SECONDS_PER_DAY;

/// Handle of an entity inside an [`ObservationSet`].
pub type EntityKey = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mention {
    pub entity: String,
    pub class: String,
    pub timestamp: i64,
}

impl Mention {
    pub fn new(entity: impl Into<String>, class: impl Into<String>, timestamp: i64) -> Result<Self> {
        let mention = Mention {
            entity: entity.into(),
            class: class.into(),
            timestamp,
        };
        if mention.entity.is_empty() || mention.class.is_empty() {
            return Err(Error::InvalidMention("empty entity or class".into()));
        }
        if timestamp < 0 {
            return Err(Error::InvalidMention(format!("negative timestamp {timestamp}")));
        }
        Ok(mention)
    }
}

/// Start of the UTC day containing `timestamp`.
pub fn midnight_utc(timestamp: i64) -> i64 {
    timestamp - timestamp.rem_euclid(SECONDS_PER_DAY)
}

/// Frequency-of-frequencies over the first `k` sample periods of a class.
///
/// `counts[i - 1]` holds `f_i`; `f_0` (the unseen instances) is never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FrequencyHistogram {
    k: usize,
    n: u64,
    distinct: u64,
    counts: Vec<u64>,
}

impl FrequencyHistogram {
    /// Histogram with `k` periods and the given `(i, f_i)` pairs. Repeated
    /// frequencies are summed; zero counts are ignored.
    pub fn from_frequencies<I>(k: usize, frequencies: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u64)>,
    {
        let mut counts = vec![0u64; k];
        for (i, f) in frequencies {
            if f == 0 {
                continue;
            }
            if i == 0 || i > k {
                return Err(Error::InvalidHistogram(format!(
                    "frequency {i} outside 1..={k}"
                )));
            }
            counts[i - 1] += f;
        }
        Ok(Self::from_counts(k, counts))
    }

    /// Histogram from per-entity observation counts `X_j` (zeros ignored).
    pub fn from_entity_counts<I>(k: usize, entity_counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        Self::from_frequencies(k, entity_counts.into_iter().map(|x| (x, 1)))
    }

    fn from_counts(k: usize, mut counts: Vec<u64>) -> Self {
        counts.resize(k, 0);
        let distinct = counts.iter().sum();
        let n = counts
            .iter()
            .enumerate()
            .map(|(idx, f)| (idx as u64 + 1) * f)
            .sum();
        let h = FrequencyHistogram {
            k,
            n,
            distinct,
            counts,
        };
        h.debug_check();
        h
    }

    fn debug_check(&self) {
        debug_assert_eq!(self.counts.len(), self.k);
        debug_assert_eq!(self.counts.iter().sum::<u64>(), self.distinct);
        debug_assert!(self.n >= self.distinct);
    }

    /// Number of sample periods.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Total observations.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Distinct entities observed.
    pub fn distinct(&self) -> u64 {
        self.distinct
    }

    /// `f_i`; zero outside `1..=k`.
    pub fn f(&self, i: usize) -> u64 {
        if i == 0 {
            return 0;
        }
        self.counts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn singletons(&self) -> u64 {
        self.f(1)
    }

    pub fn doubletons(&self) -> u64 {
        self.f(2)
    }

    /// Non-zero `(i, f_i)` pairs in increasing `i`.
    pub fn frequencies(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, f)| **f > 0)
            .map(|(idx, f)| (idx + 1, *f))
    }

    pub fn to_map(&self) -> BTreeMap<usize, u64> {
        self.frequencies().collect()
    }

    /// Every `f_i` multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        Self::from_counts(self.k, self.counts.iter().map(|f| f * factor).collect())
    }
}

/// Deduplicated per-period observations of one class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodizedObservations {
    class: String,
    origin: i64,
    period_length: i64,
    // Sorted, deduplicated entity keys per period.
    periods: Vec<Vec<EntityKey>>,
}

impl PeriodizedObservations {
    pub fn class(&self) -> &str {
        &self.class
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn period_length(&self) -> i64 {
        self.period_length
    }

    pub fn num_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn period(&self, index: usize) -> &[EntityKey] {
        &self.periods[index]
    }

    pub fn periods(&self) -> &[Vec<EntityKey>] {
        &self.periods
    }

    pub fn total_observations(&self) -> u64 {
        self.periods.iter().map(|p| p.len() as u64).sum()
    }

    /// Histogram over periods `0..=upto` inclusive.
    pub fn histogram_at(&self, upto: usize) -> Result<FrequencyHistogram> {
        if upto >= self.periods.len() {
            return Err(Error::PeriodOutOfRange {
                requested: upto,
                available: self.periods.len(),
            });
        }
        let mut seen: HashMap<EntityKey, usize> = HashMap::new();
        for period in &self.periods[..=upto] {
            for &e in period {
                *seen.entry(e).or_default() += 1;
            }
        }
        FrequencyHistogram::from_entity_counts(upto + 1, seen.into_values())
    }

    /// Cumulative histograms, element `i` equal to `histogram_at(i)`.
    pub fn series_histograms(&self) -> Vec<FrequencyHistogram> {
        let k = self.periods.len();
        let mut seen: HashMap<EntityKey, usize> = HashMap::new();
        let mut counts: Vec<u64> = Vec::with_capacity(k);
        let mut out = Vec::with_capacity(k);
        for (idx, period) in self.periods.iter().enumerate() {
            counts.push(0);
            for &e in period {
                let x = seen.entry(e).or_default();
                if *x > 0 {
                    counts[*x - 1] -= 1;
                }
                *x += 1;
                counts[*x - 1] += 1;
            }
            out.push(FrequencyHistogram::from_counts(idx + 1, counts.clone()));
        }
        out
    }
}

/// Per-class observations sharing one entity key space.
#[derive(Clone, Debug, Default)]
pub struct ObservationSet {
    entities: Interner,
    classes: BTreeMap<String, PeriodizedObservations>,
    origin: i64,
    period_length: i64,
    skipped_before_origin: u64,
}

impl ObservationSet {
    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn period_length(&self) -> i64 {
        self.period_length
    }

    /// Mentions dropped because their timestamp precedes the origin.
    pub fn skipped_before_origin(&self) -> u64 {
        self.skipped_before_origin
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn get(&self, class: &str) -> Option<&PeriodizedObservations> {
        self.classes.get(class)
    }

    /// Classes in lexicographic order.
    pub fn classes(&self) -> impl Iterator<Item = &PeriodizedObservations> {
        self.classes.values()
    }

    pub fn entity_name(&self, key: EntityKey) -> &str {
        self.entities.resolve(key)
    }

    /// Period sets of `class` with entity names resolved.
    pub fn named_periods(&self, class: &str) -> Option<Vec<BTreeSet<String>>> {
        let obs = self.classes.get(class)?;
        Some(
            obs.periods
                .iter()
                .map(|p| p.iter().map(|&e| self.entity_name(e).to_owned()).collect())
                .collect(),
        )
    }
}

/// Streaming collector of mentions.
///
/// Timestamps are kept raw until [`finish`](Self::finish) so the origin can be
/// derived from the whole stream.
#[derive(Clone, Debug, Default)]
pub struct MentionAccumulator {
    entities: Interner,
    classes: IndexMap<Box<str>, Vec<(i64, EntityKey)>>,
    min_timestamp: Option<i64>,
    mentions: u64,
}

impl MentionAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entity: &str, class: &str, timestamp: i64) {
        let e = self.entities.intern(entity);
        match self.classes.get_mut(class) {
            Some(v) => v.push((timestamp, e)),
            None => {
                self.classes.insert(class.into(), vec![(timestamp, e)]);
            }
        }
        self.min_timestamp = Some(self.min_timestamp.map_or(timestamp, |m| m.min(timestamp)));
        self.mentions += 1;
    }

    pub fn push_mention(&mut self, mention: &Mention) {
        self.push(&mention.entity, &mention.class, mention.timestamp);
    }

    pub fn mentions(&self) -> u64 {
        self.mentions
    }

    /// Earliest timestamp truncated to midnight UTC.
    pub fn default_origin(&self) -> Option<i64> {
        self.min_timestamp.map(midnight_utc)
    }

    /// Absorb another partial accumulator. Associative and commutative up to
    /// key numbering.
    pub fn merge(&mut self, other: MentionAccumulator) {
        let remap: Vec<EntityKey> = other
            .entities
            .iter()
            .map(|(_, name)| self.entities.intern(name))
            .collect();
        for (class, records) in other.classes {
            let target = self.classes.entry(class).or_default();
            target.extend(records.into_iter().map(|(t, e)| (t, remap[e as usize])));
        }
        self.min_timestamp = match (self.min_timestamp, other.min_timestamp) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.mentions += other.mentions;
    }

    /// Bucket everything into periods of `period_length` seconds starting at
    /// `origin` (default: [`default_origin`](Self::default_origin)).
    pub fn finish(self, origin: Option<i64>, period_length: i64) -> Result<ObservationSet> {
        if period_length <= 0 {
            return Err(Error::InvalidPeriodLength(period_length));
        }
        let origin = origin.or(self.default_origin()).unwrap_or(0);
        let classes: Vec<_> = self.classes.into_iter().collect();
        let built: Vec<(PeriodizedObservations, u64)> = classes
            .into_par_iter()
            .map(|(class, records)| bucket_class(class.into(), records, origin, period_length))
            .collect();
        let mut skipped = 0;
        let mut classes = BTreeMap::new();
        for (obs, class_skipped) in built {
            skipped += class_skipped;
            if !obs.periods.is_empty() {
                classes.insert(obs.class.clone(), obs);
            }
        }
        Ok(ObservationSet {
            entities: self.entities,
            classes,
            origin,
            period_length,
            skipped_before_origin: skipped,
        })
    }
}

fn bucket_class(
    class: String,
    records: Vec<(i64, EntityKey)>,
    origin: i64,
    period_length: i64,
) -> (PeriodizedObservations, u64) {
    let mut skipped = 0u64;
    let mut packed: Vec<u64> = Vec::with_capacity(records.len());
    for (t, e) in records {
        if t < origin {
            skipped += 1;
            continue;
        }
        match u32::try_from((t - origin) / period_length) {
            Ok(p) => packed.push((u64::from(p) << 32) | u64::from(e)),
            Err(_) => skipped += 1,
        }
    }
    packed.sort_unstable();
    packed.dedup();
    let num_periods = packed.last().map_or(0, |&x| (x >> 32) as usize + 1);
    let mut periods = vec![Vec::new(); num_periods];
    for x in packed {
        periods[(x >> 32) as usize].push(x as u32);
    }
    (
        PeriodizedObservations {
            class,
            origin,
            period_length,
            periods,
        },
        skipped,
    )
}

/// Bucket a mention stream with an explicit origin.
pub fn bucket_mentions<'a, I>(mentions: I, origin: i64, period_length: i64) -> Result<ObservationSet>
where
    I: IntoIterator<Item = &'a Mention>,
{
    let mut acc = MentionAccumulator::new();
    for m in mentions {
        acc.push_mention(m);
    }
    acc.finish(Some(origin), period_length)
}
