// Restrict mentions to a class filtered by a property value.

use std::collections::BTreeSet;
use std::error::Error;

use kgcensus::ontology::{build_index, resolve_edits, CompositeClassSpec, EditRecord, PropertyGraph, Resolver};

pub fn run_example() -> Result<BTreeSet<String>, Box<dyn Error>> {
    let index = build_index([
        ("Q90", "P31", "Q515"),
        ("Q456", "P31", "Q515"),
        ("Q84", "P31", "Q515"),
    ]);
    let graph: PropertyGraph = [
        ("Q90", "P17", "Q142"),
        ("Q456", "P17", "Q142"),
        ("Q84", "P17", "Q145"),
    ]
    .into_iter()
    .collect();
    let french_cities: CompositeClassSpec = "Q515[P17=Q142]".parse()?;
    let resolver = Resolver::new(&index).with_classes(&[french_cities], &graph);

    let edits: Vec<EditRecord> = ["Q90", "Q456", "Q84", "Q90"]
        .iter()
        .enumerate()
        .map(|(i, s)| EditRecord {
            subject: s.to_string(),
            property: "P1082".into(),
            object: "1000".into(),
            timestamp: i as i64,
            user: "example".into(),
        })
        .collect();
    let mentions = resolve_edits(edits.iter(), &resolver);
    for m in &mentions {
        println!("{} in {}", m.entity, m.class);
    }
    Ok(mentions.into_iter().map(|m| m.entity).collect())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
