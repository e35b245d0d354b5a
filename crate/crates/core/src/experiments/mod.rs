//! Reproducible runs: the eight-copy example, its `λ*` computation and random
//! campaigns.

pub mod appendix_d;
pub mod campaign;
pub mod toy;

pub use appendix_d::{appendix_d_lambda_star, LambdaStar};
pub use campaign::{random_campaign, CampaignConfig, CampaignSummary, InstanceOutcome, TheoremTally};
pub use toy::{toy_example, ToyReport};
