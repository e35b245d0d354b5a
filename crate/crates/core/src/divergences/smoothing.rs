//! Bounds on the smoothed max-relative entropy
//! `S_∞^ε(ρ‖κ) = min{S_∞(ρ̃‖κ) : ½‖ρ̃ - ρ‖₁ ≤ ε}`.
//!
//! The upper bound is attained by an explicit witness; the lower bound comes
//! from tests `Q` via `S_∞(ρ̃‖κ) ≥ ln((Tr[Qρ] - ε)/Tr[Qκ])`. For commuting
//! pairs the two coincide.

use serde::Serialize;

use super::relative::{max_ratio_psd, whiten};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::qops::linalg::{self, CMatrix};
use crate::qops::{trace_distance, DensityOperator, Operator};

#[derive(Clone, Debug, Serialize)]
pub struct SmoothedInfInterval {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip)]
    pub witness: DensityOperator,
}

/// Clips the whitened spectrum `γ` at the level `λ ≥ 1` that removes `ε` of
/// `κ`-weighted mass, then fills the clipped mass back in proportionally to
/// the room `λ - γ_i` left below the level. Returns `λ` and the new values,
/// which satisfy `Σ w_i f_i = Σ w_i γ_i`, `f_i ≤ λ` and `Σ w_i |f_i - γ_i| ≤ 2ε`.
pub fn truncate_and_fill(gammas: &[f64], weights: &[f64], eps: f64) -> (f64, Vec<f64>) {
    let removed = |lam: f64| -> f64 { gammas.iter().zip(weights).map(|(&g, &w)| w * (g - lam).max(0.0)).sum() };
    let mut order: Vec<usize> = (0..gammas.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| gammas[b].total_cmp(&gammas[a]));
    let mut lam = 0.0;
    let (mut s, mut w) = (0.0, 0.0);
    for (pos, &i) in order.iter().enumerate() {
        s += weights[i] * gammas[i];
        w += weights[i];
        let next = order.get(pos + 1).map_or(0.0, |&j| gammas[j]);
        let cand = (s - eps) / w;
        if cand >= next {
            lam = cand.min(gammas[i]);
            break;
        }
    }
    if lam <= 1.0 || removed(1.0) <= eps {
        return (1.0, vec![1.0; gammas.len()]);
    }
    let slack: f64 = gammas.iter().zip(weights).map(|(&g, &w)| w * (lam - g).max(0.0)).sum();
    let theta = if slack > 0.0 { (removed(lam) / slack).min(1.0) } else { 0.0 };
    let filled = gammas.iter().map(|&g| if g >= lam { lam } else { g + theta * (lam - g) }).collect();
    (lam, filled)
}

fn test_bound(rho: &CMatrix, kappa: &CMatrix, q: &CMatrix, eps: f64) -> f64 {
    let a = linalg::trace_product(q, rho).re - eps;
    let b = linalg::trace_product(q, kappa).re;
    if a <= 0.0 {
        f64::NEG_INFINITY
    } else if b <= 0.0 {
        f64::INFINITY
    } else {
        (a / b).ln()
    }
}

pub fn smoothed_renyi_inf(rho: &DensityOperator, kappa: &DensityOperator, eps: f64) -> Result<SmoothedInfInterval> {
    smoothed_renyi_inf_with(rho, kappa, eps, &Tolerances::DEFAULT)
}

pub fn smoothed_renyi_inf_with(
    rho: &DensityOperator,
    kappa: &DensityOperator,
    eps: f64,
    tol: &Tolerances,
) -> Result<SmoothedInfInterval> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg(format!("ε must lie in (0,1), got {eps}")));
    }
    if rho.dim() != kappa.dim() {
        return Err(Error::dim("arguments have different dimensions"));
    }
    let (r, k) = (rho.matrix(), kappa.matrix());
    let wp = whiten(r, k, tol);

    let mut candidates: Vec<DensityOperator> = Vec::new();
    if wp.outside <= tol.support_mass {
        let (_, filled) = truncate_and_fill(&wp.gamma.values, &wp.weights, eps);
        let mut fe = wp.gamma.clone();
        fe.values = filled;
        let m = &wp.kappa_sqrt * fe.map(|x| x) * &wp.kappa_sqrt;
        if let Ok(w) = DensityOperator::from_psd(rho.dims().to_vec(), linalg::hermitize(&m)) {
            candidates.push(w);
        }
    }
    let d1 = trace_distance(rho, kappa)?;
    for s in [eps, (eps / d1.max(eps)).min(1.0)] {
        candidates.push(rho.mix(s, kappa)?);
    }
    let mut best: Option<(f64, DensityOperator)> = None;
    for cand in candidates {
        if trace_distance(&cand, rho)? > eps * (1.0 + 1e-9) + 1e-12 {
            continue;
        }
        let v = max_ratio_psd(cand.matrix(), k, tol).value;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, cand));
        }
    }
    let (upper, witness) = best.unwrap_or((f64::INFINITY, rho.clone()));

    let mut thresholds: Vec<f64> = wp.gamma.values.iter().copied().filter(|&g| g > 0.0).collect();
    let (gmin, gmax) = thresholds.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &g| (a.min(g), b.max(g)));
    if gmax > 0.0 {
        let steps = 48;
        for i in 0..=steps {
            thresholds.push(gmin * (gmax / gmin).powf(i as f64 / steps as f64) * 0.999_999);
        }
    }
    let mut lower = 0.0f64;
    for t in thresholds {
        let q = linalg::eigh(&(r - k.scale(t))).map(|x| if x > 0.0 { 1.0 } else { 0.0 });
        lower = lower.max(test_bound(r, k, &q, eps));
    }
    let top = wp.gamma.dim() - 1;
    let w = linalg::inv_sqrt_on_support(&linalg::eigh(k), tol.support);
    let phi = &w * wp.gamma.column(top);
    if phi.norm() > 0.0 {
        let q = linalg::outer(&phi.unscale(phi.norm()));
        lower = lower.max(test_bound(r, k, &q, eps));
    }
    Ok(SmoothedInfInterval { lower: lower.min(upper), upper, witness })
}
