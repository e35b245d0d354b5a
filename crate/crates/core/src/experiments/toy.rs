//! The eleven-qubit example: `ρ = diag(3/200, 197/200)` converted towards
//! `|+⟩⟨+|` at `β = 1`, `E = (0, ln 3)`, with eight copies, the projector `Q`
//! onto strings with at most one `|0⟩`, and an eight-valued label.

use num_rational::Ratio;
use serde::Serialize;

use crate::catalyst::pipeline::{run_dense, Tracks};
use crate::catalyst::{correlation_bound, run_theorem1, ConversionReport};
use crate::config::Tolerances;
use crate::divergences::HypothesisTest;
use crate::error::Result;
use crate::qops::linalg;
use crate::qops::{gibbs_state, tensor_power, DensityOperator, GibbsContext, HermitianOperator, Operator};

use super::appendix_d::{appendix_d_lambda_star, LambdaStar};

pub const COPIES: usize = 8;
pub const EPS: f64 = 0.01;
pub const DELTA: f64 = 0.06;

pub fn toy_context() -> GibbsContext {
    gibbs_state(&HermitianOperator::diagonal(&[0.0, 3f64.ln()]), 1.0).expect("finite toy Hamiltonian")
}

pub fn toy_state() -> DensityOperator {
    DensityOperator::diagonal(&[3.0 / 200.0, 197.0 / 200.0]).expect("valid toy state")
}

/// `Q` on eight qubits, diagonal in the computational basis.
pub fn projector_q() -> HermitianOperator {
    let d = 1usize << COPIES;
    let diag: Vec<f64> = (0..d).map(|x| if (x as u32).count_ones() as usize >= COPIES - 1 { 1.0 } else { 0.0 }).collect();
    HermitianOperator::from_raw(vec![2; COPIES], linalg::diag(&diag))
}

/// `Tr[Q p^{⊗8}]` for a diagonal qubit state with `Pr[0] = num/den`, exactly.
pub fn q_probability_exact(num: i128, den: i128) -> Ratio<i128> {
    let zero = Ratio::new(num, den);
    let one = Ratio::from_integer(1) - zero;
    one.pow(COPIES as i32) + Ratio::from_integer(COPIES as i128) * zero * one.pow(COPIES as i32 - 1)
}

fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct ToyReport {
    /// `Tr[Qρ^{⊗8}]`.
    pub p_first_kind: f64,
    pub p_exact: String,
    /// `Tr[Q ρ_G^{⊗8}]`.
    pub q_second_kind: f64,
    pub q_exact: String,
    pub q_bit_exact: bool,
    pub lambda_star: f64,
    pub lambda_schwarz: f64,
    /// Smallest eigenvalue of `ρ_G^{⊗8} - Tr[Qρ_G^{⊗8}] |+⟩⟨+|^{⊗8}`.
    pub zeta_margin: f64,
    pub output_error: f64,
    pub target_error: f64,
    pub catalyst_return_error: f64,
    pub gibbs_margin: f64,
    pub mutual_info: f64,
    pub mutual_info_bound: f64,
    pub channel_checks_pass: bool,
    /// The same conversion with the optimal test in place of `Q`.
    pub optimal: ConversionReport,
    pub all_pass: bool,
}

pub fn toy_example(tol: &Tolerances) -> Result<ToyReport> {
    let ctx = toy_context();
    let rho = toy_state();
    let plus = DensityOperator::plus();
    let q = projector_q();
    let sigma = tensor_power(&rho, COPIES)?;
    let kappa = tensor_power(&ctx.gibbs, COPIES)?;
    let target = tensor_power(&plus, COPIES)?;

    let p = sigma.expectation(q.matrix());
    let b = kappa.expectation(q.matrix());
    let p_exact = q_probability_exact(3, 200);
    let q_exact = q_probability_exact(3, 4);
    let q_bit_exact = b == 25.0 / 4f64.powi(8) && q_exact == Ratio::new(25, 1 << 16);

    let test = HypothesisTest { effect: q.clone(), alpha: 1.0 - p, beta_val: b, divergence: -b.ln() };
    let tr = Tracks { rho: &rho, eta: &ctx.gibbs, rho_p: &plus, eta_p: &ctx.gibbs };
    let m = run_dense(&tr, COPIES, &test, &target, tol)?;
    let zeta = kappa.matrix() - target.matrix().scale(b);
    let zeta_margin = linalg::min_eigenvalue(&zeta);

    let LambdaStar { schwarz, bisect, .. } = appendix_d_lambda_star()?;
    let bound = correlation_bound(EPS, 2)?.two_level.expect("qubit bound");
    let optimal = run_theorem1(&rho, &plus, &ctx, EPS, DELTA, 12, tol)?;

    let all_pass = (p - ratio_to_f64(p_exact)).abs() <= 1e-12
        && p > 1.0 - EPS
        && q_bit_exact
        && ((bisect - schwarz) / schwarz).abs() <= 1e-6
        && b < bisect
        && zeta_margin >= -tol.psd
        && m.checks.passed
        && m.output_error < EPS
        && m.output_error <= 1.0 - p + 1e-12
        && m.catalyst_return_error <= tol.catalyst_return
        && m.correlation < DELTA
        && m.correlation <= bound + 1e-9
        && optimal.passed;

    Ok(ToyReport {
        p_first_kind: p,
        p_exact: p_exact.to_string(),
        q_second_kind: b,
        q_exact: q_exact.to_string(),
        q_bit_exact,
        lambda_star: bisect,
        lambda_schwarz: schwarz,
        zeta_margin,
        output_error: m.output_error,
        target_error: m.target_error,
        catalyst_return_error: m.catalyst_return_error,
        gibbs_margin: m.gibbs_margin,
        mutual_info: m.correlation,
        mutual_info_bound: bound,
        channel_checks_pass: m.checks.passed,
        optimal,
        all_pass,
    })
}
