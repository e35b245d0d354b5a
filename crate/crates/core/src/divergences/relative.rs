use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::qops::linalg::{self, CMatrix, Eigen};
use crate::qops::{partial_trace, DensityOperator, GibbsContext, Operator};

/// A divergence value together with whether it is infinite because the first
/// argument has weight outside the support of the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub support_violation: bool,
}

impl DivergenceValue {
    fn finite(value: f64) -> Self {
        DivergenceValue { value, support_violation: false }
    }

    const INFINITE: DivergenceValue = DivergenceValue { value: f64::INFINITY, support_violation: true };
}

fn same_dim(a: &impl Operator, b: &impl Operator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dim(format!("arguments have dimensions {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `Σ λ ln λ` over the positive part of a spectrum.
fn neg_entropy_of(values: &[f64]) -> f64 {
    values.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum()
}

/// Weight of `a` on the support of `b` and `Tr[a ln b]` restricted to it.
fn cross_term(a: &CMatrix, eb: &Eigen, tol: &Tolerances) -> (f64, f64) {
    let thr = tol.support * eb.spectral_norm();
    let mut mass = 0.0;
    let mut cross = 0.0;
    for (j, &s) in eb.values.iter().enumerate() {
        if s > thr {
            let v = eb.vectors.column(j);
            let w = (v.adjoint() * a * v)[(0, 0)].re;
            mass += w;
            cross += w * s.ln();
        }
    }
    (mass, cross)
}

/// `Tr[a(ln a - ln b)]` for positive semidefinite `a`, `b` that need not be
/// normalized. Infinite when `a` carries weight outside `supp(b)`.
pub fn relative_entropy_psd(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> DivergenceValue {
    let ta = linalg::trace_re(a);
    if ta <= 0.0 {
        return DivergenceValue::finite(0.0);
    }
    let eb = linalg::eigh(b);
    let (mass, cross) = cross_term(a, &eb, tol);
    if mass < ta * (1.0 - tol.support_mass) {
        return DivergenceValue::INFINITE;
    }
    DivergenceValue::finite(neg_entropy_of(&linalg::eigvalsh(a)) - cross)
}

/// Umegaki relative entropy `S₁(ρ‖σ)` in nats.
pub fn kl_divergence(rho: &DensityOperator, sigma: &DensityOperator) -> Result<DivergenceValue> {
    kl_divergence_with(rho, sigma, &Tolerances::DEFAULT)
}

pub fn kl_divergence_with(rho: &DensityOperator, sigma: &DensityOperator, tol: &Tolerances) -> Result<DivergenceValue> {
    same_dim(rho, sigma)?;
    Ok(relative_entropy_psd(rho.matrix(), sigma.matrix(), tol))
}

/// Max-relative entropy `S_∞(σ‖κ) = ln λ_max(κ^{-1/2} σ κ^{-1/2})`.
pub fn renyi_inf(sigma: &DensityOperator, kappa: &DensityOperator) -> Result<DivergenceValue> {
    renyi_inf_with(sigma, kappa, &Tolerances::DEFAULT)
}

pub fn renyi_inf_with(sigma: &DensityOperator, kappa: &DensityOperator, tol: &Tolerances) -> Result<DivergenceValue> {
    same_dim(sigma, kappa)?;
    Ok(max_ratio_psd(sigma.matrix(), kappa.matrix(), tol))
}

/// `ln λ_max(b^{-1/2} a b^{-1/2})` for PSD matrices; infinite outside the support.
pub fn max_ratio_psd(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> DivergenceValue {
    let eb = linalg::eigh(b);
    let (mass, _) = cross_term(a, &eb, tol);
    let ta = linalg::trace_re(a);
    if mass < ta * (1.0 - tol.support_mass) {
        return DivergenceValue::INFINITE;
    }
    let w = linalg::inv_sqrt_on_support(&eb, tol.support);
    let gamma = &w * a * &w;
    let top = linalg::eigvalsh(&gamma).last().copied().unwrap_or(0.0);
    DivergenceValue::finite(top.ln())
}

/// The eigen-decomposition of `Γ = κ^{-1/2} ρ κ^{-1/2}` on `supp(κ)` together
/// with the `κ`-weights `⟨g_i|κ|g_i⟩` of its eigenvectors.
pub struct WhitenedPair {
    pub gamma: Eigen,
    pub weights: Vec<f64>,
    pub kappa_sqrt: CMatrix,
    /// Weight of `ρ` outside `supp(κ)`.
    pub outside: f64,
}

pub fn whiten(rho: &CMatrix, kappa: &CMatrix, tol: &Tolerances) -> WhitenedPair {
    let ek = linalg::eigh(kappa);
    let (mass, _) = cross_term(rho, &ek, tol);
    let w = linalg::inv_sqrt_on_support(&ek, tol.support);
    let gamma = linalg::eigh(&(&w * rho * &w));
    let weights = (0..gamma.dim())
        .map(|j| {
            let g = gamma.vectors.column(j);
            (g.adjoint() * kappa * g)[(0, 0)].re
        })
        .collect();
    WhitenedPair { gamma, weights, kappa_sqrt: linalg::sqrt_psd(&ek), outside: linalg::trace_re(rho) - mass }
}

/// Von Neumann entropy in nats.
pub fn entropy(rho: &impl Operator) -> f64 {
    -neg_entropy_of(&linalg::eigvalsh(rho.matrix()))
}

/// `I(A:B)` where `A` is the listed subsystems and `B` the rest.
pub fn mutual_information(rho: &DensityOperator, cut: &[usize]) -> Result<f64> {
    let n = rho.dims().len();
    let rest: Vec<usize> = (0..n).filter(|k| !cut.contains(k)).collect();
    if cut.is_empty() || rest.is_empty() || cut.iter().any(|&k| k >= n) {
        return Err(Error::arg(format!("cut {cut:?} must be a proper nonempty subset of {n} subsystems")));
    }
    let a = partial_trace(rho, cut)?;
    let b = partial_trace(rho, &rest)?;
    Ok((entropy(&a) + entropy(&b) - entropy(rho)).max(0.0))
}

/// Non-equilibrium free energy relative to the Gibbs state, in units of
/// `kT`: `β(F(ρ) - F(ρ_G)) = S₁(ρ‖ρ_G)`.
pub fn free_energy(rho: &DensityOperator, ctx: &GibbsContext) -> Result<DivergenceValue> {
    kl_divergence(rho, &ctx.gibbs)
}
