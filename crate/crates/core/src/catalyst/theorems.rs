//! End-to-end conversions. Each driver checks the free-energy condition,
//! picks a copy count, builds the channel and the catalyst, runs processes
//! I-III and measures every condition of the resulting state.
//!
//! The internal accuracy `ε̃` walks down `ε, ε/2, ε/4, ...` until the measured
//! output error, correlation and correlation bound all meet their targets.

use crate::channel::{
    lemma2_build, with_storage_product, BlockChannel, Check, IdentityMap, VerificationReport, WorkStorage,
};
use crate::config::Tolerances;
use crate::divergences::{kl_divergence_with, neyman_pearson_test};
use crate::error::{Error, Result};
use crate::qops::json::MatrixJson;
use crate::qops::{tensor_power, trace_distance, CqOperator, DensityOperator, GibbsContext, Operator};

use super::bounds::{correlation_bound, equality_case_shift};
use super::copies::{find_copy_count, Backend, CopyPlan, Target};
use super::pipeline::{run_dense, run_symmetric, run_with_channel, Measured, Tracks};
use super::register::{catalyst_marginal, labeled_distance, slot_mutual_information, system_marginal, Register};
use super::report::{Attempt, ConversionReport, Theorem};
use super::step3::{attach, build_catalyst, catalytic_convert};

/// Free-energy differences within this band count as equal.
pub const EQUALITY_BAND: f64 = 1e-9;
/// Slack on the correlation bound and on free-energy monotonicity.
pub const BOUND_SLACK: f64 = 1e-9;
pub const FREE_ENERGY_SLACK: f64 = 1e-6;
/// Halvings of `ε̃` tried before giving up.
pub const MAX_HALVINGS: usize = 6;

fn check_budget(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg(format!("ε must lie in (0, 1), got {eps}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::arg(format!("δ must be positive, got {delta}")));
    }
    Ok(())
}

pub fn run_theorem1(
    rho: &DensityOperator,
    rho_p: &DensityOperator,
    ctx: &GibbsContext,
    eps: f64,
    delta: f64,
    n_max: usize,
    tol: &Tolerances,
) -> Result<ConversionReport> {
    let mut r = run_theorem3(rho, rho_p, &ctx.gibbs, &ctx.gibbs, eps, delta, n_max, tol)?;
    r.theorem = Theorem::FreeEnergy;
    Ok(r)
}

fn run_plan(tr: &Tracks, plan: &CopyPlan, tol: &Tolerances) -> Result<Measured> {
    match &plan.target {
        Target::Dense(target) => {
            let sigma = tensor_power(tr.rho, plan.n)?;
            let kappa = tensor_power(tr.eta, plan.n)?;
            let test = neyman_pearson_test(&sigma, &kappa, plan.eps_test)?;
            run_dense(tr, plan.n, &test, target, tol)
        }
        Target::Symmetric(target) => run_symmetric(tr, target, plan.eps_test, tol),
    }
}

struct Thresholds {
    eps: f64,
    delta: f64,
    bound: f64,
}

impl Thresholds {
    fn accepts(&self, output_error: f64, correlation: f64) -> bool {
        output_error < self.eps && correlation < self.delta && correlation <= self.bound + BOUND_SLACK
    }

    fn checks(&self, m: &Measured, output_error: f64, free_energy_in: f64, tol: &Tolerances) -> VerificationReport {
        let mut c = VerificationReport::new();
        c.push(Check::at_most("catalyst_returned", m.catalyst_return_error, tol.catalyst_return));
        c.push(Check::below("output_error_below_eps", output_error, self.eps));
        c.push(Check::below("correlation_below_delta", m.correlation, self.delta));
        c.push(Check::at_most("correlation_within_bound", m.correlation, self.bound + BOUND_SLACK));
        c.push(Check::at_most("free_energy_monotone", m.free_energy_out - free_energy_in, FREE_ENERGY_SLACK));
        c
    }
}

/// Conversion of the pair `(ρ, η)` into `(ρ', η')` with a catalyst pair
/// `(c, d)`; the reference track is reproduced exactly.
#[allow(clippy::too_many_arguments)]
pub fn run_theorem3(
    rho: &DensityOperator,
    rho_p: &DensityOperator,
    eta: &DensityOperator,
    eta_p: &DensityOperator,
    eps: f64,
    delta: f64,
    n_max: usize,
    tol: &Tolerances,
) -> Result<ConversionReport> {
    check_budget(eps, delta)?;
    if rho.dim() != eta.dim() || rho_p.dim() != eta_p.dim() || rho.dim() != rho_p.dim() {
        return Err(Error::dim("all four states must live on one system"));
    }
    let source = kl_divergence_with(rho, eta, tol)?;
    if source.support_violation {
        return Err(Error::Refused("supp(ρ) is not contained in supp(η)".into()));
    }
    let free_energy_in = source.value;
    let target_div = kl_divergence_with(rho_p, eta_p, tol)?.value;
    let gap = free_energy_in - target_div;
    if !(gap >= -EQUALITY_BAND) {
        return Err(Error::Refused(format!(
            "S₁(ρ‖η) - S₁(ρ'‖η') = {gap:.6e} < 0: the relative entropy cannot increase, so no catalyst reaches ρ'"
        )));
    }
    let d = rho.dim();
    let th = Thresholds { eps, delta, bound: correlation_bound(eps, d)?.best() };

    if trace_distance(rho, rho_p)? <= 1e-12 && trace_distance(eta, eta_p)? <= 1e-12 {
        let tr = Tracks { rho, eta, rho_p, eta_p };
        let m = run_with_channel(&tr, 1, &IdentityMap::new(rho.dims().to_vec()), tol)?;
        let attempt = Attempt {
            eps_tilde: eps,
            copies: 1,
            output_error: m.output_error,
            correlation: m.correlation,
            correlation_bound: th.bound,
            accepted: th.accepts(m.output_error, m.correlation),
        };
        let checks = th.checks(&m, m.output_error, free_energy_in, tol);
        return Ok(assemble(Theorem::Relative, &m, checks, &th, eps, (eps, 0.0), (0.0, 0.0), false, free_energy_in, m.output_error, vec![attempt]));
    }

    let equality_shift = gap.abs() <= EQUALITY_BAND;
    let (inner_target, budget) = if equality_shift {
        (equality_case_shift(rho_p, eta_p, eps)?, eps / 2.0)
    } else {
        (rho_p.clone(), eps)
    };
    let tr = Tracks { rho, eta, rho_p: &inner_target, eta_p };

    let mut attempts = Vec::new();
    let mut last: Option<ConversionReport> = None;
    for j in 0..=MAX_HALVINGS {
        let eps_t = budget / f64::powi(2.0, j as i32);
        let plan = match find_copy_count(rho, eta, &inner_target, eta_p, eps_t, n_max, tol) {
            Ok(p) => p,
            Err(e @ Error::CopiesInsufficient { .. }) => match last {
                Some(mut r) => {
                    r.attempts = attempts;
                    return Ok(r);
                }
                None => return Err(e),
            },
            Err(e) => return Err(e),
        };
        let m = run_plan(&tr, &plan, tol)?;
        let output_error = trace_distance(&m.output, rho_p)?;
        let bound = correlation_bound(eps_t, d)?.best();
        let th = Thresholds { eps, delta, bound };
        let accepted = th.accepts(output_error, m.correlation);
        attempts.push(Attempt {
            eps_tilde: eps_t,
            copies: plan.n,
            output_error,
            correlation: m.correlation,
            correlation_bound: bound,
            accepted,
        });
        let mut checks = th.checks(&m, output_error, free_energy_in, tol);
        checks.push(Check::at_most("target_within_eps", m.target_error, eps_t + tol.alpha));
        let r = assemble(
            Theorem::Relative,
            &m,
            checks,
            &th,
            eps_t,
            (plan.eps_test, plan.eps_smooth),
            (plan.s_h, plan.s_inf),
            equality_shift,
            free_energy_in,
            output_error,
            attempts.clone(),
        );
        if accepted {
            return Ok(r);
        }
        last = Some(r);
    }
    Ok(last.expect("at least one attempt ran"))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    theorem: Theorem,
    m: &Measured,
    mut checks: VerificationReport,
    th: &Thresholds,
    eps_tilde: f64,
    (eps_test, eps_smooth): (f64, f64),
    (s_h, s_inf): (f64, f64),
    equality_shift: bool,
    free_energy_in: f64,
    output_error: f64,
    attempts: Vec<Attempt>,
) -> ConversionReport {
    checks.extend(m.checks.clone());
    ConversionReport {
        theorem,
        backend: m.backend,
        copies: m.copies,
        eps: th.eps,
        delta: th.delta,
        eps_tilde,
        eps_test,
        eps_smooth,
        equality_shift,
        s_h,
        s_inf,
        catalyst_return_error: m.catalyst_return_error,
        output_error,
        target_error: m.target_error,
        correlation: m.correlation,
        correlation_bound: th.bound,
        work_error: None,
        work_bound: None,
        gibbs_margin: m.gibbs_margin,
        free_energy_in,
        free_energy_out: m.free_energy_out,
        attempts,
        output_state: MatrixJson::from_operator(&m.output),
        passed: checks.passed,
        checks,
    }
}

fn storage_site(x: &DensityOperator) -> [f64; 2] {
    let m = x.matrix();
    [m[(0, 0)].re, m[(1, 1)].re]
}

/// Conversion that invests work `-w > 0` from a two-level storage. Every slot
/// of the copy register holds one system copy and one storage site; slot 0
/// is the system together with its own storage.
#[allow(clippy::too_many_arguments)]
pub fn run_theorem2(
    rho: &DensityOperator,
    rho_p: &DensityOperator,
    ctx: &GibbsContext,
    w: f64,
    t: f64,
    u: f64,
    delta: f64,
    m_max: usize,
    tol: &Tolerances,
) -> Result<ConversionReport> {
    check_budget(t, delta)?;
    if rho.dim() != ctx.gibbs.dim() || rho_p.dim() != rho.dim() {
        return Err(Error::dim("states and Gibbs state must live on one system"));
    }
    let storage = WorkStorage::new(w, ctx.beta)?;
    let cap = tol.max_dim;
    let d = rho.dim();
    let f_in = kl_divergence_with(rho, &ctx.gibbs, tol)?.value;
    let charged = DensityOperator::basis(2, 0);
    let work_in = kl_divergence_with(&charged, &storage.omega_gibbs, tol)?.value;
    let omega = WorkStorage::partially_charged(u)?;
    let omega_cq = CqOperator::classical_product(&[storage_site(&omega)]);
    let head = CqOperator::with_label(rho, 1, 0);
    let g_site = storage_site(&storage.omega_gibbs);
    let head_g = with_storage_product(&ctx.gibbs, g_site, 1)?;

    let mut attempts = Vec::new();
    let mut last: Option<ConversionReport> = None;
    for j in 0..=MAX_HALVINGS {
        let t_j = t / f64::powi(2.0, j as i32);
        let l2 = match lemma2_build(rho, rho_p, ctx, &storage, t_j, u, m_max, tol) {
            Ok(l) => l,
            Err(e @ (Error::CopiesInsufficient { .. } | Error::SizeCap { .. })) => match last {
                Some(mut r) => {
                    r.attempts = attempts;
                    return Ok(r);
                }
                None => return Err(e),
            },
            Err(e) => return Err(e),
        };
        let m = l2.plan().m;
        let channel = &l2.channel;
        let signal = CqOperator::with_label(&tensor_power(rho, m)?, m, 0);
        let xi = channel.apply_block(&signal)?;
        let cat = build_catalyst(&head, &xi, m, cap)?;
        let tau = catalytic_convert(&head, &cat, channel, cap)?;

        let catalyst_return_error = labeled_distance(&catalyst_marginal(&tau)?, &cat.labels)?;
        let slot0 = system_marginal(&tau)?;
        let output = slot0.partial_trace(&[0], &[])?.quantum_part()?;
        let work = slot0.partial_trace(&[], &[0])?.to_density()?;
        let output_error = trace_distance(&output, rho_p)?;
        let work_error = trace_distance(&work, &DensityOperator::basis(2, 1))?;
        let correlation = slot_mutual_information(&tau)?;
        let target_error = trace_distance(&l2.xi, &tensor_power(rho_p, m)?)?;

        let mut factor_defect: f64 = 0.0;
        for block in &tau.blocks {
            let k = block.slots();
            let rest = block.partial_trace(&(0..k).collect::<Vec<_>>(), &(1..k).collect::<Vec<_>>())?;
            factor_defect = factor_defect.max(block.distance(&omega_cq.tensor(&rest, cap)?)?);
        }

        let xi_g = with_storage_product(&tensor_power(&ctx.gibbs, m)?, g_site, m)?;
        let reference = build_catalyst(&head_g, &xi_g, m, cap)?;
        let tau_g = catalytic_convert(&head_g, &reference, channel, cap)?;
        let gibbs_margin = labeled_distance(&tau_g, &attach(&head_g, &reference, cap)?)?;

        let f_out = kl_divergence_with(&output, &ctx.gibbs, tol)?.value;
        let work_out = kl_divergence_with(&work, &storage.omega_gibbs, tol)?.value;
        let bound = correlation_bound(t_j, d)?.best();
        let th = Thresholds { eps: t, delta, bound };
        let accepted = th.accepts(output_error, correlation) && work_error <= u + tol.channel;
        attempts.push(Attempt { eps_tilde: t_j, copies: m, output_error, correlation, correlation_bound: bound, accepted });

        let mut checks = VerificationReport::new();
        for mut c in l2.report.checks.clone() {
            c.name = format!("channel_{}", c.name);
            checks.push(c);
        }
        checks.push(Check::at_most("catalyst_returned", catalyst_return_error, tol.catalyst_return));
        checks.push(Check::below("output_error_below_eps", output_error, t));
        checks.push(Check::below("correlation_below_delta", correlation, delta));
        checks.push(Check::at_most("correlation_within_bound", correlation, bound + BOUND_SLACK));
        checks.push(Check::at_most("work_error_at_most_u", work_error, u + tol.channel));
        checks.push(Check::at_most("storage_factorizes", factor_defect, tol.channel));
        checks.push(Check::at_most("reference_track_exact", gibbs_margin, tol.channel));
        checks.push(Check::at_most(
            "free_energy_monotone",
            (f_out + work_out) - (f_in + work_in),
            FREE_ENERGY_SLACK,
        ));
        let plan = l2.plan();
        let r = ConversionReport {
            theorem: Theorem::WorkInvestment,
            backend: Backend::Cq,
            copies: m,
            eps: t,
            delta,
            eps_tilde: t_j,
            eps_test: plan.eps,
            eps_smooth: 0.0,
            equality_shift: false,
            s_h: plan.s,
            s_inf: plan.s_prime,
            catalyst_return_error,
            output_error,
            target_error,
            correlation,
            correlation_bound: bound,
            work_error: Some(work_error),
            work_bound: Some(u),
            gibbs_margin,
            free_energy_in: f_in,
            free_energy_out: f_out,
            attempts: attempts.clone(),
            output_state: MatrixJson::from_operator(&output),
            passed: checks.passed,
            checks,
        };
        if accepted {
            return Ok(r);
        }
        last = Some(r);
    }
    Ok(last.expect("at least one attempt ran"))
}
