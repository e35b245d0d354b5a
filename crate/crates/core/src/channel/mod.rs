//! Gibbs-preserving measure-and-prepare channels and their verification.

pub mod controlled;
pub mod lemma1;
pub mod lemma2;
pub mod lemma3;
pub mod measure_prepare;
pub mod storage;
pub mod verify;

pub use controlled::{BlockChannel, LabelControlled, LabeledState};
pub use lemma1::{lemma1_build, Lemma1Channel};
pub use lemma2::{lemma2_build, with_storage_product, Lemma2, TernaryChannel, TernaryPlan};
pub use lemma3::{lemma3_build, Lemma3};
pub use measure_prepare::{choi, Branch, ChannelJson, IdentityMap, LinearMap, MeasurePrepareChannel};
pub use storage::WorkStorage;
pub use verify::{verify_cptp, verify_gibbs_preserving, Check, VerificationReport};
