use crate::divergences::kl_divergence_with;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::qops::linalg::binary_entropy;
use crate::qops::DensityOperator;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CorrelationBound {
    /// `2[-(1-ε)ln(1-ε) - ε ln(ε/d)]`.
    pub general: f64,
    /// `-ε ln ε - (1-ε) ln(1-ε)`, stated for qubits only.
    pub two_level: Option<f64>,
}

impl CorrelationBound {
    /// The tighter bound that applies to system dimension `d`.
    pub fn best(&self) -> f64 {
        self.two_level.map_or(self.general, |t| t.min(self.general))
    }
}

pub fn correlation_bound(eps: f64, d: usize) -> Result<CorrelationBound> {
    if !(eps > 0.0 && eps < 1.0) || d < 2 {
        return Err(Error::arg(format!("correlation bound needs 0 < ε < 1 and d >= 2, got ε={eps}, d={d}")));
    }
    let general = 2.0 * (-(1.0 - eps) * (1.0 - eps).ln() - eps * (eps / d as f64).ln());
    Ok(CorrelationBound { general, two_level: (d == 2).then(|| binary_entropy(eps)) })
}

/// `ρ'' = (1 - ε/2)ρ' + (ε/2)η'`, which lowers the divergence from `η'`
/// strictly unless `ρ' = η'`.
pub fn equality_case_shift(rho_p: &DensityOperator, eta_p: &DensityOperator, eps: f64) -> Result<DensityOperator> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::arg(format!("ε must lie in [0, 1), got {eps}")));
    }
    rho_p.mix(eps / 2.0, eta_p)
}

/// Divergence drop `S₁(ρ'‖η') - S₁(ρ''‖η')` achieved by the shift.
pub fn shift_gain(rho_p: &DensityOperator, eta_p: &DensityOperator, eps: f64, tol: &Tolerances) -> Result<f64> {
    let shifted = equality_case_shift(rho_p, eta_p, eps)?;
    Ok(kl_divergence_with(rho_p, eta_p, tol)?.value - kl_divergence_with(&shifted, eta_p, tol)?.value)
}
