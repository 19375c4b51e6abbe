// Heavy sampling of a uniform population: estimates settle on the true size.

use std::error::Error;

use kgcensus::estimators::{estimate, EstimatorOptions};
use kgcensus::observations::bucket_mentions;
use kgcensus::simulator::{make_population, simulate, Distribution, ScenarioSpec};
use kgcensus::Method;

pub fn run_example() -> Result<(u64, f64, f64), Box<dyn Error>> {
    let spec = ScenarioSpec::new(make_population(1000, Distribution::Uniform)?, 20, 500, 42);
    let sim = simulate(&spec)?;
    let set = bucket_mentions(sim.mentions.iter(), spec.origin, spec.period_length)?;
    let obs = set.get(&spec.class).ok_or("no observations")?;
    let h = obs.histogram_at(obs.num_periods() - 1)?;
    let opt = EstimatorOptions::default();
    let n1 = estimate(&h, Method::N1Unif, opt).value.ok_or("undefined")?;
    let chao = estimate(&h, Method::Chao92, opt).value.ok_or("undefined")?;
    println!("true N 1000, distinct {}, N1_UNIF {n1:.1}, CHAO92 {chao:.1}", h.distinct());
    Ok((h.distinct(), n1, chao))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
