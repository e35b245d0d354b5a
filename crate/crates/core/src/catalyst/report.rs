use serde::Serialize;

use crate::channel::VerificationReport;
use crate::qops::json::MatrixJson;

use super::copies::Backend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem {
    #[serde(rename = "theorem1")]
    FreeEnergy,
    #[serde(rename = "theorem2")]
    WorkInvestment,
    #[serde(rename = "theorem3")]
    Relative,
}

/// One pass of the `ε̃` descent.
#[derive(Clone, Debug, Serialize)]
pub struct Attempt {
    pub eps_tilde: f64,
    pub copies: usize,
    pub output_error: f64,
    pub correlation: f64,
    pub correlation_bound: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConversionReport {
    pub theorem: Theorem,
    pub backend: Backend,
    /// `n` (or `m` for work investment).
    pub copies: usize,
    /// Requested output accuracy: `ε`, or `t` for work investment.
    pub eps: f64,
    pub delta: f64,
    /// Internal accuracy the accepted run was built for.
    pub eps_tilde: f64,
    pub eps_test: f64,
    pub eps_smooth: f64,
    /// Whether the target was first mixed towards `η'` to break a tie.
    pub equality_shift: bool,
    pub s_h: f64,
    pub s_inf: f64,
    pub catalyst_return_error: f64,
    pub output_error: f64,
    pub target_error: f64,
    pub correlation: f64,
    pub correlation_bound: f64,
    pub work_error: Option<f64>,
    pub work_bound: Option<f64>,
    pub gibbs_margin: f64,
    pub free_energy_in: f64,
    pub free_energy_out: f64,
    pub attempts: Vec<Attempt>,
    pub output_state: MatrixJson,
    pub checks: VerificationReport,
    pub passed: bool,
}

impl ConversionReport {
    /// Terminal summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{:?} via {:?} backend, copies = {}, eps~ = {:.3e}\n\
             output error {:.3e} (< {}), I_SC {:.3e} (< {}, bound {:.4e}), catalyst return {:.1e}\n",
            self.theorem,
            self.backend,
            self.copies,
            self.eps_tilde,
            self.output_error,
            self.eps,
            self.correlation,
            self.delta,
            self.correlation_bound,
            self.catalyst_return_error,
        );
        if let Some(w) = self.work_error {
            s.push_str(&format!("work error {w:.3e} (<= {:.3e})\n", self.work_bound.unwrap_or(f64::NAN)));
        }
        s.push_str(&self.checks.render());
        s.push_str(if self.passed { "PASS\n" } else { "FAIL\n" });
        s
    }
}
