//! Robustness benchmarks for automated program repair.
//!
//! The crate rewrites function-level Java bug instances with eight
//! semantics-preserving transformations, tracks the annotated buggy line
//! through every edit, validates preservation by running the developer
//! tests, and scores repair models with execution-based metrics.

pub mod syntax;
pub mod harness;
pub mod transforms;
pub mod naming;
pub mod benchmark;
pub mod metrics;
pub mod evaluation;
pub mod report;
