//! The catalyst construction and the end-to-end conversion pipelines.

pub mod bounds;
pub mod copies;
pub mod pipeline;
pub mod register;
pub mod report;
pub mod step3;
pub mod theorems;

pub use bounds::{correlation_bound, equality_case_shift, CorrelationBound};
pub use copies::{find_copy_count, Backend, CopyPlan};
pub use register::Register;
pub use report::{Attempt, ConversionReport, Theorem};
pub use step3::{build_catalyst, catalytic_convert, CatalystState};
pub use theorems::{run_theorem1, run_theorem2, run_theorem3};
