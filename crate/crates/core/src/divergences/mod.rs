//! Entropic quantities: relative entropy, max-relative entropy, optimal
//! hypothesis tests and their smoothed and asymptotic variants.

pub mod hypothesis;
pub mod relative;
pub mod smoothing;
pub mod stein;

pub use hypothesis::{
    classical_neyman_pearson, neyman_pearson_test, hypothesis_testing_divergence, iid_hypothesis_test, HypothesisTest,
    Route, TestSummary,
};
pub use relative::{
    entropy, free_energy, kl_divergence, kl_divergence_with, mutual_information, renyi_inf, renyi_inf_with,
    DivergenceValue,
};
pub use smoothing::{smoothed_renyi_inf, smoothed_renyi_inf_with, SmoothedInfInterval};
pub use stein::{stein_scan, stein_scan_pair, SteinRow};
