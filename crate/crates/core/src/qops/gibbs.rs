use super::linalg;
use super::operator::{DensityOperator, HermitianOperator, Operator};
use crate::error::{Error, Result};

/// A Hamiltonian at inverse temperature `β` and its thermal state.
#[derive(Clone, Debug)]
pub struct GibbsContext {
    pub hamiltonian: HermitianOperator,
    pub beta: f64,
    pub gibbs: DensityOperator,
}

impl GibbsContext {
    /// Wraps an already known thermal state, e.g. one read from a file. The
    /// Hamiltonian is reconstructed as `-ln(ρ_G)/β` up to a constant.
    pub fn from_state(gibbs: DensityOperator, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let e = gibbs.eigh();
        if e.values[0] <= 0.0 {
            return Err(Error::arg("a Gibbs state must have full rank"));
        }
        let h = e.map(|p| -p.ln() / beta);
        let hamiltonian = HermitianOperator::from_raw(gibbs.dims().to_vec(), linalg::hermitize(&h));
        Ok(GibbsContext { hamiltonian, beta, gibbs })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.gibbs
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::arg(format!("inverse temperature must be finite and positive, got {beta}")));
    }
    Ok(())
}

/// `e^{-βH}/Z`, computed from the spectrum of `H` with the ground energy
/// subtracted first so that large `βH` does not overflow.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<GibbsContext> {
    check_beta(beta)?;
    let boltzmann = |values: &[f64]| -> Vec<f64> {
        let e0 = values.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = values.iter().map(|&x| (-beta * (x - e0)).exp()).collect();
        let z: f64 = w.iter().sum();
        w.iter().map(|x| x / z).collect()
    };
    let m = if linalg::is_diagonal(h.matrix()) {
        let energies: Vec<f64> = (0..h.dim()).map(|i| h.matrix()[(i, i)].re).collect();
        linalg::diag(&boltzmann(&energies))
    } else {
        let mut e = h.eigh();
        e.values = boltzmann(&e.values);
        e.map(|x| x)
    };
    let gibbs = DensityOperator::from_raw(h.dims().to_vec(), m);
    Ok(GibbsContext { hamiltonian: h.clone(), beta, gibbs })
}

/// `ln Z` of `e^{-βH}`.
pub fn log_partition(h: &HermitianOperator, beta: f64) -> f64 {
    let v = linalg::eigvalsh(h.matrix());
    let e0 = v[0];
    -beta * e0 + v.iter().map(|&x| (-beta * (x - e0)).exp()).sum::<f64>().ln()
}
