//! sandboxeval probes an execution environment the way untrusted code
//! would: it enumerates what the sandbox exposes, predicts which filesystem
//! manipulations would succeed, and exercises bounded proxies for external
//! communication and dangerous operations. Each of the 51 catalog scenarios
//! is classified as accessed, denied, or unknown, and a run can be judged
//! against an expectation profile to produce a conformance verdict.
//!
//! The suite is built to be safe to run where it matters: probes mutate
//! nothing outside a scratch root, proxies are budgeted, and a sentinel
//! digest over protected regions is checked before and after every run.

pub mod cli;
pub mod executor;
pub mod model;
pub mod policy;
pub mod probes;
pub mod registry;
pub mod report;

pub use executor::{run_probe, run_suite, RunConfig};
pub use model::{
    Category, Evidence, ExecutionMode, Outcome, Policy, ProbeId, ProbeResult, ProbeSpec,
    RedactionLevel, RunReport, SafetyClass, Verdict, VerdictStatus,
};
pub use registry::{ProbeFilter, Registry};
