//! Randomized checking of the inequality registry.

pub mod instances;
pub mod registry;

pub use instances::{Instance, InstanceGenerator};
pub use registry::{run_registry, select, summarize, CheckEntry, CheckSummary, Context, Execution, REGISTRY};
