// Estimate two synthetic classes and split them by convergence.

use std::error::Error;

use kgcensus::commands::{estimate_reports, simulate_scenario};
use kgcensus::metrics::{rank_by_convergence, Ranking};
use kgcensus::simulator::{make_population, Distribution, ScenarioSpec};
use kgcensus::{EstimateConfig, Method};

pub fn run_example() -> Result<Ranking, Box<dyn Error>> {
    let dir = std::env::temp_dir().join(format!("kgcensus-ranking-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let mut saturated = ScenarioSpec::new(make_population(100, Distribution::Uniform)?, 20, 500, 7)
        .with_class("Saturated");
    saturated.entity_prefix = "s".into();
    let mut growing = ScenarioSpec::new(make_population(5000, Distribution::Uniform)?, 20, 100, 7)
        .with_class("Growing");
    growing.entity_prefix = "g".into();

    let files = [dir.join("saturated.csv"), dir.join("growing.csv")];
    simulate_scenario(&saturated, &files[0])?;
    simulate_scenario(&growing, &files[1])?;
    let outcome = estimate_reports(&files, None, &EstimateConfig::default())?;
    std::fs::remove_dir_all(&dir)?;

    let ranking = rank_by_convergence(
        outcome.reports.into_iter().map(|r| {
            let rho = r.rho.get(&Method::Sor).copied().flatten();
            let d = r.final_distinct();
            (r.class, rho, d)
        }),
        Default::default(),
    );
    for e in &ranking.complete {
        println!("complete   {:<10} rho={:.4} D={}", e.class, e.rho, e.distinct);
    }
    for e in &ranking.incomplete {
        println!("incomplete {:<10} rho={:.4} D={}", e.class, e.rho, e.distinct);
    }
    Ok(ranking)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
