//! Query catalog, data generation and benchmarking on top of `cardframe`.

pub mod catalog;
pub mod commands;
pub mod plan;
pub mod runner;

pub use catalog::{compare_results, QueryId};
pub use runner::{run_oracle, run_query, Failure, Knobs, RunReport};
