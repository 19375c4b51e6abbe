// Turn a small edit history into per-class mentions.

use std::error::Error;

use kgcensus::ontology::{build_index, resolve_edits, EditRecord, Resolver};

pub fn run_example() -> Result<Vec<(String, String)>, Box<dyn Error>> {
    let index = build_index([
        ("Q243", "instanceOf", "Q4989906"),
        ("Q90", "instanceOf", "Q515"),
        ("Q515", "subclassOf", "Q486972"),
        ("Q1", "instanceOf", "Q5"),
    ]);
    let edit = |s: &str, p: &str, o: &str, t| EditRecord {
        subject: s.into(),
        property: p.into(),
        object: o.into(),
        timestamp: t,
        user: "example".into(),
    };
    let edits = [
        edit("Q243", "P131", "Q90", 1_600_000_000),
        edit("Q243", "P84", "Q1", 1_600_000_100),
        edit("Q90", "P1082", "2165423", 1_600_000_200),
    ];
    let resolver = Resolver::new(&index);
    let mentions = resolve_edits(edits.iter(), &resolver);
    for m in &mentions {
        println!("{:>6} {:<10} {}", m.entity, m.class, m.timestamp);
    }
    Ok(mentions.into_iter().map(|m| (m.entity, m.class)).collect())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
