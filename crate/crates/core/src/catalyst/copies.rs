//! Copy-count search: the smallest `n` at which an optimal test on
//! `ρ^{⊗n}` vs `η^{⊗n}` beats the max-relative entropy of an `n`-copy target
//! near `ρ'^{⊗n}`, with the error budget split between test and smoothing.

use serde::Serialize;

use crate::config::Tolerances;
use crate::divergences::hypothesis::common_eigenbasis;
use crate::divergences::smoothing::{smoothed_renyi_inf_with, truncate_and_fill};
use crate::divergences::{iid_hypothesis_test, renyi_inf_with, Route};
use crate::error::{Error, Result};
use crate::qops::linalg;
use crate::qops::{tensor_power, DensityOperator, Operator};
use crate::symmetric::{self, TypeDiagonal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Literal operators on every label block.
    Dense,
    /// Qubits, through irrep blocks and type classes.
    Symmetric,
    /// System copies dense, work storage classical.
    Cq,
}

/// An `n`-copy state `σ'` within the smoothing budget of `ρ'^{⊗n}`.
#[derive(Clone, Debug)]
pub enum Target {
    Dense(DensityOperator),
    Symmetric(TypeDiagonal),
}

/// Splits `(ε_test, ε_smooth)` tried at each copy count, in order.
pub fn budget_splits(eps: f64) -> [(f64, f64); 2] {
    [(eps, 0.0), (eps / 2.0, eps / 2.0)]
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub eps_test: f64,
    pub eps_smooth: f64,
    pub s_h: f64,
    pub s_inf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CopyPlan {
    pub n: usize,
    pub eps_test: f64,
    pub eps_smooth: f64,
    /// `S_H^{1-ε_test}(ρ^{⊗n}‖η^{⊗n})`.
    pub s_h: f64,
    /// `S_∞(σ'‖η'^{⊗n})` of the chosen target.
    pub s_inf: f64,
    pub route: Route,
    pub backend: Backend,
    pub trajectory: Vec<GapRow>,
    #[serde(skip)]
    pub target: Target,
}

/// Dense when every label block fits `max_pipeline_dim`, symmetric for
/// larger qubit registers.
pub fn choose_backend(d: usize, n: usize, tol: &Tolerances) -> Option<Backend> {
    let dense = (d as f64).powi(n as i32) <= tol.max_pipeline_dim as f64;
    if dense {
        Some(Backend::Dense)
    } else if d == 2 {
        Some(Backend::Symmetric)
    } else {
        None
    }
}

/// Qubit target in the frame of `(ρ', η')`: class values `γ₁^a γ₂^{n-a}`,
/// clipped and refilled when `eps_smooth > 0`.
pub fn symmetric_target(rho_p: &DensityOperator, eta_p: &DensityOperator, n: usize, eps_smooth: f64) -> Result<TypeDiagonal> {
    let eta = symmetric::qubit(eta_p)?;
    let (frame, g) = TypeDiagonal::frame_of(&symmetric::qubit(rho_p)?, &eta)?;
    let gammas: Vec<f64> = (0..=n).map(|a| g[0].powi(a as i32) * g[1].powi((n - a) as i32)).collect();
    let base = TypeDiagonal::new(&eta, frame, gammas.clone())?;
    if eps_smooth == 0.0 {
        return Ok(base);
    }
    let [h0, h1] = base.frame_traces();
    let weights: Vec<f64> =
        (0..=n).map(|a| linalg::binomial(n, a) * h0.powi(a as i32) * h1.powi((n - a) as i32)).collect();
    let (_, filled) = truncate_and_fill(&gammas, &weights, eps_smooth);
    Ok(base.with_weights(filled))
}

fn max_weight(t: &TypeDiagonal) -> f64 {
    t.weights().iter().copied().fold(0.0, f64::max)
}

/// The target for `n` copies on the given backend and its `S_∞` against `η'^{⊗n}`.
pub fn build_target(
    rho_p: &DensityOperator,
    eta_p: &DensityOperator,
    n: usize,
    eps_smooth: f64,
    backend: Backend,
    tol: &Tolerances,
) -> Result<(f64, Target)> {
    match backend {
        Backend::Symmetric => {
            let t = symmetric_target(rho_p, eta_p, n, eps_smooth)?;
            Ok((max_weight(&t).ln(), Target::Symmetric(t)))
        }
        Backend::Dense if eps_smooth == 0.0 => {
            let s = renyi_inf_with(rho_p, eta_p, tol)?.value * n as f64;
            Ok((s, Target::Dense(tensor_power(rho_p, n)?)))
        }
        Backend::Dense => {
            let rp = tensor_power(rho_p, n)?;
            let ep = tensor_power(eta_p, n)?;
            if rho_p.dim() == 2 {
                if let Ok(t) = symmetric_target(rho_p, eta_p, n, eps_smooth) {
                    let m = t.to_dense(tol.max_dim)?;
                    let w = DensityOperator::from_raw(rp.dims().to_vec(), m);
                    return Ok((max_weight(&t).ln(), Target::Dense(w)));
                }
            }
            let s = smoothed_renyi_inf_with(&rp, &ep, eps_smooth, tol)?;
            Ok((s.upper, Target::Dense(s.witness)))
        }
        Backend::Cq => Err(Error::arg("cq targets are built by the work-investment pipeline")),
    }
}

/// Scans `n = 1..=n_max` and returns the first feasible plan.
#[allow(clippy::too_many_arguments)]
pub fn find_copy_count(
    rho: &DensityOperator,
    eta: &DensityOperator,
    rho_p: &DensityOperator,
    eta_p: &DensityOperator,
    eps: f64,
    n_max: usize,
    tol: &Tolerances,
) -> Result<CopyPlan> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg(format!("ε must lie in (0, 1), got {eps}")));
    }
    if rho.dim() != eta.dim() || rho_p.dim() != eta_p.dim() || rho.dim() != rho_p.dim() {
        return Err(Error::dim("all four states must live on one system"));
    }
    let d = rho.dim();
    let mut trajectory = Vec::new();
    for n in 1..=n_max {
        let Some(backend) = choose_backend(d, n, tol) else {
            let dim = (d as f64).powi(n as i32).min(usize::MAX as f64) as usize;
            return Err(Error::SizeCap { dim, cap: tol.max_pipeline_dim });
        };
        for (eps_test, eps_smooth) in budget_splits(eps) {
            let test = iid_hypothesis_test(rho, eta, n, eps_test, tol)?;
            let (s_inf, target) = build_target(rho_p, eta_p, n, eps_smooth, backend, tol)?;
            trajectory.push(GapRow { n, eps_test, eps_smooth, s_h: test.divergence, s_inf });
            if test.divergence >= s_inf {
                return Ok(CopyPlan {
                    n,
                    eps_test,
                    eps_smooth,
                    s_h: test.divergence,
                    s_inf,
                    route: test.route,
                    backend,
                    trajectory,
                    target,
                });
            }
        }
    }
    let detail = trajectory
        .iter()
        .filter(|r| r.eps_smooth == 0.0)
        .map(|r| format!("n={}: S_H-S_inf={:.4}", r.n, r.s_h - r.s_inf))
        .collect::<Vec<_>>()
        .join(", ");
    Err(Error::CopiesInsufficient { limit: n_max, detail })
}

/// Whether the pair is classical in one common basis.
pub fn is_commuting(a: &DensityOperator, b: &DensityOperator) -> bool {
    common_eigenbasis(a.matrix(), b.matrix()).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::hypothesis::type_class_test;
    use crate::qops::random::random_classical_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> (DensityOperator, DensityOperator, DensityOperator) {
        (
            DensityOperator::diagonal(&[0.015, 0.985]).unwrap(),
            DensityOperator::diagonal(&[0.75, 0.25]).unwrap(),
            DensityOperator::plus(),
        )
    }

    #[test]
    fn toy_needs_eight_copies() {
        let (rho, g, plus) = toy();
        let plan = find_copy_count(&rho, &g, &plus, &g, 0.01, 12, &Tolerances::DEFAULT).unwrap();
        assert_eq!(plan.n, 8);
        assert_eq!(plan.eps_smooth, 0.0);
        assert!(plan.s_h >= (4f64.powi(8) / 25.0).ln());
        assert!((plan.s_inf - 8.0 * (8f64 / 3.0).ln()).abs() < 1e-12);
        assert_eq!(plan.backend, Backend::Dense);
    }

    #[test]
    fn identical_pairs_need_one_copy() {
        let (rho, g, _) = toy();
        let plan = find_copy_count(&rho, &g, &rho, &g, 0.05, 4, &Tolerances::DEFAULT).unwrap();
        assert_eq!(plan.n, 1);
    }

    #[test]
    fn classical_instances_agree_with_type_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let tol = Tolerances::DEFAULT;
        for _ in 0..10 {
            let p = random_classical_state(&mut rng, 2);
            let q = random_classical_state(&mut rng, 2);
            let pp = random_classical_state(&mut rng, 2);
            let Ok(plan) = find_copy_count(&p, &q, &pp, &q, 0.1, 12, &tol) else { continue };
            let diag = |x: &DensityOperator| vec![x.matrix()[(0, 0)].re, x.matrix()[(1, 1)].re];
            let oracle = type_class_test(&diag(&p), &diag(&q), plan.n, plan.eps_test);
            assert!((oracle.divergence - plan.s_h).abs() < 1e-9);
            // Unsmoothed max-relative entropy is additive over copies.
            if plan.eps_smooth == 0.0 {
                let r = diag(&pp).iter().zip(diag(&q)).map(|(a, b)| a / b).fold(0.0, f64::max);
                assert!((plan.s_inf - plan.n as f64 * r.ln()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn smoothed_targets_stay_in_the_ball() {
        let (rho, g, plus) = toy();
        let _ = rho;
        let mixed = plus.mix(0.2, &g).unwrap();
        for n in [3, 6] {
            let (s, t) = build_target(&mixed, &g, n, 0.02, Backend::Dense, &Tolerances::DEFAULT).unwrap();
            let Target::Dense(w) = t else { panic!("dense target expected") };
            let exact = tensor_power(&mixed, n).unwrap();
            assert!(crate::qops::trace_distance(&w, &exact).unwrap() <= 0.02 + 1e-12);
            let direct = renyi_inf_with(&w, &tensor_power(&g, n).unwrap(), &Tolerances::DEFAULT).unwrap().value;
            assert!((s - direct).abs() < 1e-9);
        }
    }
}
