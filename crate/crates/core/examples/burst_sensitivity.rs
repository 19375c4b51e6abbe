// A bulk import of fresh entities and how each estimator reacts to it.

use std::collections::BTreeMap;
use std::error::Error;

use kgcensus::estimators::{estimate, EstimatorOptions};
use kgcensus::observations::bucket_mentions;
use kgcensus::simulator::{make_population, simulate, Distribution, ScenarioSpec};
use kgcensus::Method;

const BURST_PERIOD: usize = 10;

/// Relative change of each estimate from the period before the burst.
pub fn run_example() -> Result<BTreeMap<Method, f64>, Box<dyn Error>> {
    let population = make_population(1000, Distribution::Zipf { exponent: 1.5 })?;
    let spec = ScenarioSpec::new(population, 14, 200, 1).with_burst(BURST_PERIOD, 100);
    let sim = simulate(&spec)?;
    let set = bucket_mentions(sim.mentions.iter(), spec.origin, spec.period_length)?;
    let hs = set.get(&spec.class).ok_or("no observations")?.series_histograms();

    let mut jumps = BTreeMap::new();
    for m in Method::DEFAULT {
        let at = |i: usize| estimate(&hs[i], m, EstimatorOptions::default()).value;
        if let (Some(before), Some(after)) = (at(BURST_PERIOD - 1), at(BURST_PERIOD)) {
            println!("{m:<8} {before:8.1} -> {after:8.1}  ({:+.0}%)", 100.0 * (after / before - 1.0));
            jumps.insert(m, after / before - 1.0);
        }
    }
    Ok(jumps)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
