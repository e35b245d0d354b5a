//! One function per subcommand. Each returns what to print, what to write to
//! `--out`, and whether the run counts as passing.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::params::Params;
use crate::catalyst::{run_theorem1, run_theorem2, run_theorem3};
use crate::channel::{
    lemma1_build, lemma2_build, lemma3_build, verify_gibbs_preserving, ChannelJson, MeasurePrepareChannel,
    VerificationReport, WorkStorage,
};
use crate::config::Tolerances;
use crate::divergences::{
    kl_divergence_with, neyman_pearson_test, renyi_inf_with, smoothed_renyi_inf_with, stein::to_csv, stein_scan_pair,
};
use crate::error::{Error, Result};
use crate::experiments::toy::{toy_context, toy_state};
use crate::experiments::{appendix_d_lambda_star, random_campaign, toy_example, CampaignConfig};
use crate::qops::json::{read_state, MatrixJson};

pub enum Payload {
    Json(Value),
    Text(String),
}

pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub payload: Payload,
}

fn to_json(x: &impl Serialize) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn outcome(passed: bool, summary: String, payload: &impl Serialize) -> Result<Outcome> {
    Ok(Outcome { passed, summary, payload: Payload::Json(to_json(payload)?) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DivergenceKind {
    /// S₁, the relative entropy.
    Kl,
    /// S_∞, the max-relative entropy.
    Rinf,
    /// ε-smoothed S_∞, as an interval.
    Srinf,
    /// Hypothesis-testing divergence S_H^{1-ε}.
    Sh,
}

pub fn divergence(kind: DivergenceKind, eps: Option<f64>, a: &Path, b: &Path, tol: &Tolerances) -> Result<Outcome> {
    let rho = read_state(a, tol)?;
    let kappa = read_state(b, tol)?;
    let need_eps = || eps.ok_or_else(|| Error::arg("--eps is required for this divergence"));
    let (value, extra) = match kind {
        DivergenceKind::Kl => {
            let v = kl_divergence_with(&rho, &kappa, tol)?;
            (v.value, json!({ "support_violation": v.support_violation }))
        }
        DivergenceKind::Rinf => {
            let v = renyi_inf_with(&rho, &kappa, tol)?;
            (v.value, json!({ "support_violation": v.support_violation }))
        }
        DivergenceKind::Srinf => {
            let s = smoothed_renyi_inf_with(&rho, &kappa, need_eps()?, tol)?;
            let witness = MatrixJson::from_operator(&s.witness);
            (s.upper, json!({ "lower": s.lower, "upper": s.upper, "witness": witness }))
        }
        DivergenceKind::Sh => {
            let t = neyman_pearson_test(&rho, &kappa, need_eps()?)?;
            let effect = MatrixJson::from_operator(&t.effect);
            (t.divergence, json!({ "alpha": t.alpha, "beta_val": t.beta_val, "witness": effect }))
        }
    };
    let report = json!({
        "kind": format!("{kind:?}").to_lowercase(),
        "eps": eps,
        "value": value,
        "details": extra,
        "tolerances": tol,
    });
    let summary = match &report["details"] {
        d if d.get("lower").is_some() => format!("{:?} in [{}, {}]\n", kind, d["lower"], d["upper"]),
        _ => format!("{kind:?} = {value}\n"),
    };
    outcome(true, summary, &report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Construction {
    Lemma1,
    Lemma2,
    Lemma3,
}

#[derive(Serialize)]
struct Constructed {
    channel: ChannelJson,
    report: VerificationReport,
    details: Value,
}

fn constructed(channel: &MeasurePrepareChannel, report: VerificationReport, details: Value) -> Result<Outcome> {
    let summary = format!("{}{}\n", report.render(), if report.passed { "PASS" } else { "FAIL" });
    let passed = report.passed;
    outcome(passed, summary, &Constructed { channel: channel.to_json(), report, details })
}

pub fn construct(which: Construction, p: &Params, tol: &Tolerances) -> Result<Outcome> {
    match which {
        Construction::Lemma1 => {
            p.only("lemma1", &["sigma", "kappa", "sigma_p", "kappa_p", "eps"])?;
            let sigma = p.state(&p.sigma, "sigma", tol)?;
            let kappa = p.state(&p.kappa, "kappa", tol)?;
            let sigma_p = p.state(&p.sigma_p, "sigma_p", tol)?;
            let kappa_p = p.state(&p.kappa_p, "kappa_p", tol)?;
            let test = neyman_pearson_test(&sigma, &kappa, Params::scalar(p.eps, "eps")?)?;
            let l = lemma1_build(&sigma, &kappa, &sigma_p, &kappa_p, &test, tol)?;
            let report = verify_gibbs_preserving(&l.channel, &kappa, &kappa_p, tol);
            let details = json!({ "accept": l.accept, "b": l.b, "margin": l.margin, "divergence": test.divergence });
            constructed(&l.channel, report, details)
        }
        Construction::Lemma2 => {
            p.only("lemma2", &["rho", "rho_p", "hamiltonian", "gibbs", "beta", "w", "t", "u", "m_max"])?;
            let ctx = p.context(tol)?;
            let rho = p.state(&p.rho, "rho", tol)?;
            let rho_p = p.state(&p.rho_p, "rho_p", tol)?;
            let storage = WorkStorage::new(Params::scalar(p.w, "w")?, ctx.beta)?;
            let (t, u) = (Params::scalar(p.t, "t")?, Params::scalar(p.u, "u")?);
            let l = lemma2_build(&rho, &rho_p, &ctx, &storage, t, u, p.m_max.unwrap_or(12), tol)?;
            let channel = l.channel.to_measure_prepare(tol)?;
            constructed(&channel, l.report.clone(), to_json(l.plan())?)
        }
        Construction::Lemma3 => {
            p.only("lemma3", &["sigma", "sigma_p", "hamiltonian", "gibbs", "beta", "w", "eps"])?;
            let ctx = p.context(tol)?;
            let sigma = p.state(&p.sigma, "sigma", tol)?;
            let sigma_p = p.state(&p.sigma_p, "sigma_p", tol)?;
            let l = lemma3_build(&sigma, &sigma_p, &ctx, Params::scalar(p.w, "w")?, Params::scalar(p.eps, "eps")?, tol)?;
            constructed(&l.channel, l.report.clone(), to_json(&l)?)
        }
    }
}

pub fn verify(channel: &Path, gibbs: &Path, gibbs_out: Option<&Path>, tol: &Tolerances) -> Result<Outcome> {
    let text = std::fs::read_to_string(channel)?;
    let value: Value = serde_json::from_str(&text)?;
    // Accept both a bare channel and the output of `construct`.
    let cj: ChannelJson = serde_json::from_value(value.get("channel").cloned().unwrap_or(value))?;
    let ch = MeasurePrepareChannel::from_json(&cj, tol)?;
    let g_in = read_state(gibbs, tol)?;
    let g_out = match gibbs_out {
        Some(p) => read_state(p, tol)?,
        None => g_in.clone(),
    };
    let report = verify_gibbs_preserving(&ch, &g_in, &g_out, tol);
    let summary = format!("{}{}\n", report.render(), if report.passed { "PASS" } else { "FAIL" });
    outcome(report.passed, summary, &report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TheoremKind {
    Theorem1,
    Theorem2,
    Theorem3,
}

/// Values given on the command line take precedence over the parameter file.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConvertOverrides {
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub n_max: Option<usize>,
    pub m_max: Option<usize>,
}

pub fn convert(which: TheoremKind, p: &Params, o: ConvertOverrides, tol: &Tolerances) -> Result<Outcome> {
    let delta = Params::scalar(o.delta.or(p.delta), "delta")?;
    let report = match which {
        TheoremKind::Theorem1 => {
            p.only("theorem1", &["rho", "rho_p", "hamiltonian", "gibbs", "beta", "eps", "delta", "n_max"])?;
            let ctx = p.context(tol)?;
            let rho = p.state(&p.rho, "rho", tol)?;
            let rho_p = p.state(&p.rho_p, "rho_p", tol)?;
            let eps = Params::scalar(o.eps.or(p.eps), "eps")?;
            run_theorem1(&rho, &rho_p, &ctx, eps, delta, o.n_max.or(p.n_max).unwrap_or(12), tol)?
        }
        TheoremKind::Theorem3 => {
            p.only("theorem3", &["rho", "rho_p", "eta", "eta_p", "eps", "delta", "n_max"])?;
            let rho = p.state(&p.rho, "rho", tol)?;
            let rho_p = p.state(&p.rho_p, "rho_p", tol)?;
            let eta = p.state(&p.eta, "eta", tol)?;
            let eta_p = p.state(&p.eta_p, "eta_p", tol)?;
            let eps = Params::scalar(o.eps.or(p.eps), "eps")?;
            run_theorem3(&rho, &rho_p, &eta, &eta_p, eps, delta, o.n_max.or(p.n_max).unwrap_or(12), tol)?
        }
        TheoremKind::Theorem2 => {
            p.only("theorem2", &["rho", "rho_p", "hamiltonian", "gibbs", "beta", "w", "t", "u", "delta", "m_max"])?;
            let ctx = p.context(tol)?;
            let rho = p.state(&p.rho, "rho", tol)?;
            let rho_p = p.state(&p.rho_p, "rho_p", tol)?;
            let (w, u) = (Params::scalar(p.w, "w")?, Params::scalar(p.u, "u")?);
            let t = Params::scalar(o.eps.or(p.t), "t")?;
            run_theorem2(&rho, &rho_p, &ctx, w, t, u, delta, o.m_max.or(p.m_max).unwrap_or(12), tol)?
        }
    };
    outcome(report.passed, report.summary(), &report)
}

pub fn toy(tol: &Tolerances) -> Result<Outcome> {
    let r = toy_example(tol)?;
    let summary = format!(
        "Tr[Q rho^8] = {:.10} (exact {})\nTr[Q gibbs^8] = {:e} (exact {}, bit-exact {})\n\
         lambda* = {:.6e} (Schwarz {:.6e})\noutput error {:.6e}, I_SC {:.6e} <= {:.7}\n\
         catalyst return {:.1e}, Gibbs margin {:.1e}\n{}\n",
        r.p_first_kind,
        r.p_exact,
        r.q_second_kind,
        r.q_exact,
        r.q_bit_exact,
        r.lambda_star,
        r.lambda_schwarz,
        r.output_error,
        r.mutual_info,
        r.mutual_info_bound,
        r.catalyst_return_error,
        r.gibbs_margin,
        if r.all_pass { "PASS" } else { "FAIL" },
    );
    outcome(r.all_pass, summary, &r)
}

pub fn appendix_d() -> Result<Outcome> {
    let l = appendix_d_lambda_star()?;
    let passed = l.relative_gap <= 1e-6;
    let summary = format!(
        "lambda* Schwarz = {} = {:.10e}\nlambda* bisection = {:.10e} ({} steps)\nrelative gap {:.1e}\n{}\n",
        l.schwarz_exact,
        l.schwarz,
        l.bisect,
        l.bisection_steps,
        l.relative_gap,
        if passed { "PASS" } else { "FAIL" },
    );
    outcome(passed, summary, &l)
}

pub fn campaign(cfg: &CampaignConfig, tol: &Tolerances) -> Result<Outcome> {
    let s = random_campaign(cfg, tol)?;
    let line = |name: &str, t: &crate::experiments::TheoremTally| {
        format!(
            "{name}: {}/{} converted, max n {}, max catalyst return {:.1e}, max reference margin {:.1e}, refusals {}/{}\n",
            t.passed, t.instances, t.max_copies, t.max_catalyst_return_error, t.max_gibbs_margin, t.refusals_correct,
            t.refusals_checked
        )
    };
    let summary = format!(
        "{}{}{}\n",
        line("theorem1", &s.theorem1),
        line("theorem3", &s.theorem3),
        if s.all_pass { "PASS" } else { "FAIL" }
    );
    outcome(s.all_pass, summary, &s)
}

/// Defaults to the toy state against the toy Gibbs state.
pub fn stein(eps: f64, n_max: usize, a: Option<&Path>, b: Option<&Path>, tol: &Tolerances) -> Result<Outcome> {
    let rho = match a {
        Some(p) => read_state(p, tol)?,
        None => toy_state(),
    };
    let kappa = match b {
        Some(p) => read_state(p, tol)?,
        None => toy_context().gibbs,
    };
    let rows = stein_scan_pair(&rho, &kappa, eps, n_max, tol)?;
    let csv = to_csv(&rows);
    Ok(Outcome { passed: true, summary: csv.clone(), payload: Payload::Text(csv) })
}
