//! Step-3 runs on a fixed copy count: the dense backend applies literal
//! channels to literal blocks, the symmetric backend tracks every block
//! through its type-class weights.

use crate::channel::{lemma1_build, verify_gibbs_preserving, BlockChannel, Check, VerificationReport};
use crate::config::Tolerances;
use crate::divergences::{entropy, iid_hypothesis_test, kl_divergence_with, HypothesisTest};
use crate::error::{Error, Result};
use crate::qops::linalg::{self, hermitize};
use crate::qops::{tensor_power, trace_distance, DensityOperator, Operator};
use crate::symmetric::{self, SymOp, TypeDiagonal};

use super::copies::Backend;
use super::register::{catalyst_marginal, labeled_distance, slot_mutual_information, system_marginal};
use super::step3::{attach, build_catalyst, catalytic_convert};

/// The two state pairs of a relative conversion `(ρ, η) → (ρ', η')`.
#[derive(Clone, Copy, Debug)]
pub struct Tracks<'a> {
    pub rho: &'a DensityOperator,
    pub eta: &'a DensityOperator,
    pub rho_p: &'a DensityOperator,
    pub eta_p: &'a DensityOperator,
}

/// Everything measured on one run, before the thresholds that depend on
/// `ε` and `δ` are applied.
#[derive(Clone, Debug)]
pub struct Measured {
    pub backend: Backend,
    pub copies: usize,
    pub catalyst_return_error: f64,
    /// `d₁(Tr_C τ, ρ')`.
    pub output_error: f64,
    /// `d₁(Ξ, ρ'^{⊗n})`.
    pub target_error: f64,
    pub correlation: f64,
    /// Distance of the processed reference track from `η' ⊗ d`.
    pub gibbs_margin: f64,
    /// `S₁(Tr_C τ ‖ η')`.
    pub free_energy_out: f64,
    pub output: DensityOperator,
    pub checks: VerificationReport,
}

const PIPELINE_CHOI_INPUT: usize = 8;

fn prefixed(report: VerificationReport, prefix: &str) -> VerificationReport {
    let mut out = VerificationReport::new();
    for mut c in report.checks {
        c.name = format!("{prefix}{}", c.name);
        out.push(c);
    }
    out
}

/// Step 3 with an arbitrary channel on `n` copies. The reference catalyst is
/// `d = (1/n) Σ_k η^{⊗k-1} ⊗ η'^{⊗n-k} ⊗ |k⟩⟨k|`.
pub fn run_with_channel<C>(tr: &Tracks, n: usize, channel: &C, tol: &Tolerances) -> Result<Measured>
where
    C: BlockChannel<DensityOperator> + ?Sized,
{
    let cap = tol.max_dim;
    let sigma = tensor_power(tr.rho, n)?;
    let xi = channel.apply_block(&sigma)?;
    let cat = build_catalyst(tr.rho, &xi, n, cap)?;
    let tau = catalytic_convert(tr.rho, &cat, channel, cap)?;

    let catalyst_return_error = labeled_distance(&catalyst_marginal(&tau)?, &cat.labels)?;
    let output = system_marginal(&tau)?;
    let output_error = trace_distance(&output, tr.rho_p)?;
    let correlation = slot_mutual_information(&tau)?;
    let target_error = trace_distance(&xi, &tensor_power(tr.rho_p, n)?)?;

    let reference = build_catalyst(tr.eta, &tensor_power(tr.eta_p, n)?, n, cap)?;
    let tau_eta = catalytic_convert(tr.eta, &reference, channel, cap)?;
    let gibbs_margin = labeled_distance(&tau_eta, &attach(tr.eta_p, &reference, cap)?)?;

    // Blocks are products, so inclusion holds factor by factor. Comparing the
    // blocks directly would misread products of small eigenvalues as zeros.
    let support = mass_outside(tr.rho, &support_projector(tr.eta, tol)) <= tol.support_mass
        && mass_outside(&xi, &power_matrix(&support_projector(tr.eta_p, tol), n)) <= tol.support_mass;

    let mut checks = VerificationReport::new();
    checks.push(Check::at_most("reference_track_exact", gibbs_margin, tol.channel));
    checks.push(Check::holds("support_inclusion", support));
    let free_energy_out = kl_divergence_with(&output, tr.eta_p, tol)?.value;
    Ok(Measured {
        backend: Backend::Dense,
        copies: n,
        catalyst_return_error,
        output_error,
        target_error,
        correlation,
        gibbs_margin,
        free_energy_out,
        output,
        checks,
    })
}

/// Builds the two-outcome channel from `test` and runs Step 3 densely.
pub fn run_dense(
    tr: &Tracks,
    n: usize,
    test: &HypothesisTest,
    target: &DensityOperator,
    tol: &Tolerances,
) -> Result<Measured> {
    let sigma = tensor_power(tr.rho, n)?;
    let kappa = tensor_power(tr.eta, n)?;
    let kappa_p = tensor_power(tr.eta_p, n)?;
    let l1 = lemma1_build(&sigma, &kappa, target, &kappa_p, test, tol)?;
    // Nonnegative effects and valid preparations already make a
    // measure-and-prepare map CP; the Choi diagnostic is kept for tiny runs.
    let vtol = Tolerances { max_choi_input: tol.max_choi_input.min(PIPELINE_CHOI_INPUT), ..tol.clone() };
    let channel_checks = prefixed(verify_gibbs_preserving(&l1.channel, &kappa, &kappa_p, &vtol), "channel_");
    let mut m = run_with_channel(tr, n, &l1.channel, tol)?;
    m.checks.extend(channel_checks);
    Ok(m)
}

fn qubit_state(q: &symmetric::Qubit) -> DensityOperator {
    DensityOperator::from_raw(vec![2], hermitize(&symmetric::to_dense(q)))
}

fn sym_distance(a: &SymOp, b: &SymOp) -> Result<f64> {
    Ok(0.5 * a.sub(b)?.trace_norm())
}

fn full_rank(x: &DensityOperator, tol: &Tolerances) -> bool {
    linalg::min_eigenvalue(x.matrix()) > tol.support
}

fn support_projector(x: &DensityOperator, tol: &Tolerances) -> linalg::CMatrix {
    linalg::support_projector(&x.eigh(), tol.support)
}

fn power_matrix(m: &linalg::CMatrix, n: usize) -> linalg::CMatrix {
    (1..n).fold(m.clone(), |acc, _| linalg::kron(&acc, m))
}

/// `1 - Tr[Πx]` for a density operator `x`.
fn mass_outside(x: &DensityOperator, proj: &linalg::CMatrix) -> f64 {
    1.0 - linalg::trace_product(proj, x.matrix()).re
}

/// Qubit run with `target` of type-diagonal form. With `p = Tr[Aρ^{⊗n}]` and
/// `b = Tr[Aη^{⊗n}]` the channel output is `Ξ = pσ' + (1-p)κ''`, whose class
/// weights are `x f + (1 - x)` with `x = (p - b)/(1 - b)`. The correlation
/// telescopes to `I = S(Tr_C τ) - S(Ξ)/n`.
pub fn run_symmetric(tr: &Tracks, target: &TypeDiagonal, eps_test: f64, tol: &Tolerances) -> Result<Measured> {
    let n = target.copies();
    if tr.rho.dim() != 2 {
        return Err(Error::dim("the symmetric backend handles qubits only"));
    }
    let test = iid_hypothesis_test(tr.rho, tr.eta, n, eps_test, tol)?;
    let p = 1.0 - test.alpha;
    let b = test.beta_val;
    let f_max = target.weights().iter().copied().fold(0.0, f64::max);
    let mut checks = VerificationReport::new();
    checks.push(Check::at_most("test_accepts", (1.0 - eps_test) - p, tol.alpha));
    checks.push(Check::at_most("kappa_pp_psd", b * f_max - 1.0, tol.psd));

    let kappa_pp: Vec<f64> = if 1.0 - b > tol.support {
        target.weights().iter().map(|f| (1.0 - b * f) / (1.0 - b)).collect()
    } else {
        vec![1.0; n + 1]
    };
    let mix = |w: f64| -> Vec<f64> { target.weights().iter().zip(&kappa_pp).map(|(f, k)| w * f + (1.0 - w) * k).collect() };
    let xi = target.with_weights(mix(p));

    let output = qubit_state(&xi.single()?);
    let output_error = trace_distance(&output, tr.rho_p)?;
    let correlation = (entropy(&output) - xi.entropy() / n as f64).max(0.0);
    let rho_p = symmetric::qubit(tr.rho_p)?;
    let target_error = sym_distance(&xi.blocks(), &SymOp::power(&rho_p, n))?;

    let mut returned = 0.0;
    let mut prev = xi.clone();
    for k in (1..n).rev() {
        let direct = xi.marginal(k)?;
        returned += sym_distance(&prev.marginal(k)?.blocks(), &direct.blocks())? / n as f64;
        prev = direct;
    }

    let eta_p = symmetric::qubit(tr.eta_p)?;
    let reference = target.with_weights(mix(b));
    let gibbs_margin = sym_distance(&reference.blocks(), &SymOp::power(&eta_p, n))?;
    checks.push(Check::at_most("reference_track_exact", gibbs_margin, tol.channel));
    let rho_inside = mass_outside(tr.rho, &support_projector(tr.eta, tol)) <= tol.support_mass;
    checks.push(Check::holds("support_inclusion", rho_inside && full_rank(tr.eta_p, tol)));

    let free_energy_out = kl_divergence_with(&output, tr.eta_p, tol)?.value;
    Ok(Measured {
        backend: Backend::Symmetric,
        copies: n,
        catalyst_return_error: returned,
        output_error,
        target_error,
        correlation,
        gibbs_margin,
        free_energy_out,
        output,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalyst::copies::symmetric_target;
    use crate::channel::IdentityMap;
    use crate::divergences::neyman_pearson_test;
    use crate::qops::random::random_state;
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
    fn toy_run_returns_the_catalyst() {
        let (rho, g, plus) = toy();
        let tr = Tracks { rho: &rho, eta: &g, rho_p: &plus, eta_p: &g };
        let tol = Tolerances::DEFAULT;
        let sigma = tensor_power(&rho, 8).unwrap();
        let kappa = tensor_power(&g, 8).unwrap();
        let test = neyman_pearson_test(&sigma, &kappa, 0.01).unwrap();
        let m = run_dense(&tr, 8, &test, &tensor_power(&plus, 8).unwrap(), &tol).unwrap();
        assert!(m.checks.passed, "{}", m.checks.render());
        assert!(m.catalyst_return_error <= 1e-10);
        assert!(m.output_error < 0.01);
        assert!(m.target_error <= 0.01 + 1e-9);
        assert!(m.correlation < 0.0560016);
    }

    #[test]
    fn correlation_telescopes() {
        // I = S(Tr_C τ) - S(Ξ)/n for any channel output Ξ.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_state(&mut rng, 2);
        let eta = random_state(&mut rng, 2);
        let prep = random_state(&mut rng, 8).with_dims(vec![2, 2, 2]).unwrap();
        let ch = crate::channel::MeasurePrepareChannel::constant(vec![2, 2, 2], prep.clone());
        let tr = Tracks { rho: &rho, eta: &eta, rho_p: &rho, eta_p: &eta };
        let m = run_with_channel(&tr, 3, &ch, &Tolerances::DEFAULT).unwrap();
        let closed = entropy(&m.output) - entropy(&prep) / 3.0;
        assert!((m.correlation - closed).abs() < 1e-10);
    }

    #[test]
    fn identity_channel_on_equal_pairs_is_exact() {
        let (rho, g, _) = toy();
        let tr = Tracks { rho: &rho, eta: &g, rho_p: &rho, eta_p: &g };
        let m = run_with_channel(&tr, 1, &IdentityMap::new(vec![2]), &Tolerances::DEFAULT).unwrap();
        assert!(m.checks.passed);
        assert!(m.output_error < 1e-15 && m.correlation < 1e-12 && m.catalyst_return_error < 1e-15);
    }

    #[test]
    fn symmetric_run_agrees_with_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let tol = Tolerances::DEFAULT;
        let (n, eps) = (5, 0.1);
        let mut compared = 0;
        for _ in 0..12 {
            let rho = random_state(&mut rng, 2);
            let eta = random_state(&mut rng, 2);
            let eta_p = random_state(&mut rng, 2);
            let rho_p = random_state(&mut rng, 2).mix(0.7, &eta_p).unwrap();
            let tr = Tracks { rho: &rho, eta: &eta, rho_p: &rho_p, eta_p: &eta_p };
            let target = symmetric_target(&rho_p, &eta_p, n, 0.0).unwrap();
            let sym = run_symmetric(&tr, &target, eps, &tol).unwrap();
            let sigma = tensor_power(&rho, n).unwrap();
            let kappa = tensor_power(&eta, n).unwrap();
            let test = neyman_pearson_test(&sigma, &kappa, eps).unwrap();
            let Ok(dense) = run_dense(&tr, n, &test, &tensor_power(&rho_p, n).unwrap(), &tol) else {
                // No two-outcome channel exists at this n; the symmetric run
                // has to flag the same positivity failure.
                assert!(!sym.checks.passed);
                continue;
            };
            compared += 1;
            assert!((dense.output_error - sym.output_error).abs() < 1e-7);
            assert!((dense.correlation - sym.correlation).abs() < 1e-7);
            assert!((dense.target_error - sym.target_error).abs() < 1e-7);
            assert!(sym.catalyst_return_error < 1e-12);
            assert!(sym.gibbs_margin < 1e-9);
        }
        assert!(compared >= 3, "only {compared} feasible instances");
    }
}
