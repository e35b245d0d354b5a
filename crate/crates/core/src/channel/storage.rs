use serde::Serialize;

use crate::error::{Error, Result};
use crate::qops::DensityOperator;

/// Two-level work storage with `E_a = 0` (basis index 0) and `E_b = w`
/// (basis index 1).
#[derive(Clone, Debug, Serialize)]
pub struct WorkStorage {
    pub w: f64,
    pub beta: f64,
    /// `Z = 1 + e^{-βw}`.
    pub z: f64,
    #[serde(skip)]
    pub omega_gibbs: DensityOperator,
}

impl WorkStorage {
    pub fn new(w: f64, beta: f64) -> Result<Self> {
        if !w.is_finite() || !(beta.is_finite() && beta > 0.0) {
            return Err(Error::arg(format!("work storage needs finite w and β > 0, got w={w}, β={beta}")));
        }
        let z = 1.0 + (-beta * w).exp();
        let omega_gibbs = DensityOperator::diagonal(&[1.0 / z, 1.0 - 1.0 / z])?;
        Ok(WorkStorage { w, beta, z, omega_gibbs })
    }

    pub fn beta_w(&self) -> f64 {
        self.beta * self.w
    }

    /// Gibbs weight of `|b⟩`, `e^{-βw}/Z`.
    pub fn p_b(&self) -> f64 {
        1.0 - 1.0 / self.z
    }

    /// `u|a⟩⟨a| + (1-u)|b⟩⟨b|`.
    pub fn partially_charged(u: f64) -> Result<DensityOperator> {
        DensityOperator::diagonal(&[u, 1.0 - u])
    }
}
