// Every estimator on a four-mention history spanning two periods.

use std::collections::BTreeMap;
use std::error::Error;

use kgcensus::estimators::{estimate_all, EstimatorOptions};
use kgcensus::observations::{bucket_mentions, Mention, DEFAULT_PERIOD_SECONDS};
use kgcensus::Method;

pub fn run_example() -> Result<BTreeMap<Method, Option<f64>>, Box<dyn Error>> {
    let p = DEFAULT_PERIOD_SECONDS;
    let mentions = [
        Mention::new("A", "C", 10)?,
        Mention::new("B", "C", 20)?,
        Mention::new("A", "C", p + 10)?,
        Mention::new("C", "C", p + 20)?,
    ];
    let set = bucket_mentions(mentions.iter(), 0, p)?;
    let h = set.get("C").ok_or("class C missing")?.histogram_at(1)?;
    println!("k={} D={} n={} f={:?}", h.k(), h.distinct(), h.n(), h.to_map());
    let methods = Method::ALL.into_iter().collect();
    let estimates: BTreeMap<Method, Option<f64>> = estimate_all(&h, &methods, EstimatorOptions::default())
        .into_iter()
        .map(|e| (e.method, e.value))
        .collect();
    for (m, v) in &estimates {
        println!("{m:<8} {v:?}");
    }
    Ok(estimates)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
