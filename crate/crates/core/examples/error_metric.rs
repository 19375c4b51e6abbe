// Recency-weighted error of each estimator on an under-sampled class.

use std::collections::BTreeMap;
use std::error::Error;

use kgcensus::estimators::{estimate, EstimatorOptions};
use kgcensus::metrics::phi_error;
use kgcensus::observations::bucket_mentions;
use kgcensus::simulator::{make_population, simulate, Distribution, ScenarioSpec};
use kgcensus::Method;

/// `phi` per method, with the distinct count under the key `"DISTINCT"`.
pub fn run_example() -> Result<BTreeMap<String, f64>, Box<dyn Error>> {
    let truth = 1000.0;
    let spec = ScenarioSpec::new(make_population(1000, Distribution::Uniform)?, 10, 120, 3);
    let sim = simulate(&spec)?;
    let set = bucket_mentions(sim.mentions.iter(), spec.origin, spec.period_length)?;
    let hs = set.get(&spec.class).ok_or("no observations")?.series_histograms();

    let mut phi = BTreeMap::new();
    let distinct: Vec<Option<f64>> = hs.iter().map(|h| Some(h.distinct() as f64)).collect();
    phi.insert("DISTINCT".to_owned(), phi_error(&distinct, truth)?);
    for m in Method::DEFAULT {
        let series: Vec<Option<f64>> = hs
            .iter()
            .map(|h| estimate(h, m, EstimatorOptions::default()).value)
            .collect();
        phi.insert(m.to_string(), phi_error(&series, truth)?);
    }
    println!("observed {} of {truth}", hs.last().map_or(0, |h| h.distinct()));
    for (name, v) in &phi {
        println!("{name:<9} phi = {v:.1}");
    }
    Ok(phi)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
