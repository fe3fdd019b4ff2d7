//! Problem files, bundled fixtures and report generation.

pub mod catalog;
pub mod problem;
pub mod run;

pub use catalog::{catalog, fixture, load_fixture, Fixture};
pub use problem::{
    build, load_problem, parse_problem, parse_spec, to_json, HarnessError, Problem, ProblemSpec, Violation,
};
pub use run::{inputs_digest, run, write_report, Cell, Operation, OutputFormat, RunOptions, RunReport, Table};
