//! Class-size and completeness estimation for collaborative knowledge graphs.
//!
//! Edits of a knowledge graph mention entities; every mention of an entity
//! that is an instance of a class counts as a capture of that class member.
//! Grouping captures into sample periods turns the edit history into a
//! capture-recapture experiment, from which the true number of class members
//! is estimated with non-parametric species-richness estimators.
//!
//! The pipeline:
//!
//! 1. [`ontology`] resolves edits to per-class [`Mention`]s.
//! 2. [`observations`] buckets mentions into periods and builds cumulative
//!    [`FrequencyHistogram`]s.
//! 3. [`estimators`] turns each histogram into class-size estimates.
//! 4. [`metrics`] scores series of estimates (`φ` against ground truth, `ρ`
//!    for convergence without it).
//! 5. [`report`] assembles per-class reports; [`commands`] wires files together.
//!
//! [`simulator`] produces synthetic populations with known size.

pub mod commands;
pub mod error;
pub mod estimators;
pub mod intern;
pub mod io;
pub mod metrics;
pub mod observations;
pub mod ontology;
pub mod report;
pub mod simulator;

pub use error::{Error, Result};
pub use estimators::{Estimate, EstimatorOptions, GammaReading, Method};
pub use metrics::{Completeness, EstimateSeries, RhoWindow, Thresholds};
pub use observations::{FrequencyHistogram, Mention, MentionAccumulator, ObservationSet, PeriodizedObservations};
pub use ontology::{CompositeClassSpec, EditRecord, OntologyIndex, PropertyGraph, Resolver};
pub use report::{ClassReport, EstimateConfig};
pub use simulator::{Distribution, Population, ScenarioSpec};
