//! Seeded random conversions. Instance `i` draws from its own ChaCha stream,
//! so results do not depend on scheduling or on the instance count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalyst::{run_theorem1, run_theorem3, Backend, ConversionReport, Theorem};
use crate::config::Tolerances;
use crate::divergences::kl_divergence_with;
use crate::error::{Error, Result};
use crate::qops::random::{random_hamiltonian, random_state};
use crate::qops::{gibbs_state, DensityOperator};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub seed: u64,
    pub count: usize,
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
    pub n_max: usize,
    /// Smallest accepted `S₁(ρ‖η) - S₁(ρ'‖η')`.
    pub gap_min: f64,
    /// Draws allowed per instance before the instance is reported as skipped.
    pub max_draws: usize,
    /// Largest Hamiltonian eigenvalue for the free-energy instances (`β = 1`).
    pub energy_scale: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 0,
            count: 100,
            dim: 2,
            eps: 0.05,
            delta: 0.05,
            n_max: 12,
            gap_min: 0.3,
            max_draws: 10_000,
            energy_scale: 2.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub theorem: Theorem,
    pub gap: f64,
    pub draws: usize,
    pub copies: Option<usize>,
    pub backend: Option<Backend>,
    pub eps_tilde: Option<f64>,
    pub output_error: Option<f64>,
    pub correlation: Option<f64>,
    pub catalyst_return_error: Option<f64>,
    pub gibbs_margin: Option<f64>,
    pub passed: bool,
    pub error: Option<String>,
    /// Gap of the first negative-gap draw and whether it was refused.
    pub refusal: Option<(f64, bool)>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TheoremTally {
    pub instances: usize,
    pub passed: usize,
    pub max_copies: usize,
    pub max_output_error: f64,
    pub max_correlation: f64,
    pub max_catalyst_return_error: f64,
    pub max_gibbs_margin: f64,
    pub refusals_checked: usize,
    pub refusals_correct: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignSummary {
    pub config: CampaignConfig,
    pub theorem1: TheoremTally,
    pub theorem3: TheoremTally,
    pub all_pass: bool,
    pub instances: Vec<InstanceOutcome>,
}

struct Draw {
    rho: DensityOperator,
    rho_p: DensityOperator,
    eta: DensityOperator,
    eta_p: DensityOperator,
    gap: f64,
}

fn draw_pair(rng: &mut ChaCha8Rng, cfg: &CampaignConfig, theorem: Theorem, tol: &Tolerances) -> Result<Draw> {
    let d = cfg.dim;
    let (eta, eta_p) = match theorem {
        Theorem::FreeEnergy => {
            let g = gibbs_state(&random_hamiltonian(rng, d, cfg.energy_scale), 1.0)?.gibbs;
            (g.clone(), g)
        }
        _ => (random_state(rng, d), random_state(rng, d)),
    };
    let rho = random_state(rng, d);
    let rho_p = random_state(rng, d);
    let gap = kl_divergence_with(&rho, &eta, tol)?.value - kl_divergence_with(&rho_p, &eta_p, tol)?.value;
    Ok(Draw { rho, rho_p, eta, eta_p, gap })
}

fn convert(x: &Draw, theorem: Theorem, cfg: &CampaignConfig, tol: &Tolerances) -> Result<ConversionReport> {
    match theorem {
        Theorem::FreeEnergy => {
            let ctx = crate::qops::GibbsContext::from_state(x.eta.clone(), 1.0)?;
            run_theorem1(&x.rho, &x.rho_p, &ctx, cfg.eps, cfg.delta, cfg.n_max, tol)
        }
        _ => run_theorem3(&x.rho, &x.rho_p, &x.eta, &x.eta_p, cfg.eps, cfg.delta, cfg.n_max, tol),
    }
}

fn run_instance(index: usize, theorem: Theorem, cfg: &CampaignConfig, tol: &Tolerances) -> InstanceOutcome {
    let stream = 2 * index as u64 + u64::from(theorem != Theorem::FreeEnergy);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut out = InstanceOutcome {
        index,
        theorem,
        gap: f64::NAN,
        draws: 0,
        copies: None,
        backend: None,
        eps_tilde: None,
        output_error: None,
        correlation: None,
        catalyst_return_error: None,
        gibbs_margin: None,
        passed: false,
        error: None,
        refusal: None,
    };
    let chosen = loop {
        if out.draws == cfg.max_draws {
            out.error = Some(format!("no draw with gap >= {} in {} tries", cfg.gap_min, cfg.max_draws));
            return out;
        }
        out.draws += 1;
        let x = match draw_pair(&mut rng, cfg, theorem, tol) {
            Ok(x) => x,
            Err(e) => {
                out.error = Some(e.to_string());
                return out;
            }
        };
        if x.gap < 0.0 && out.refusal.is_none() {
            let refused = matches!(convert(&x, theorem, cfg, tol), Err(Error::Refused(_)));
            out.refusal = Some((x.gap, refused));
        }
        if x.gap >= cfg.gap_min {
            break x;
        }
    };
    out.gap = chosen.gap;
    match convert(&chosen, theorem, cfg, tol) {
        Ok(r) => {
            out.copies = Some(r.copies);
            out.backend = Some(r.backend);
            out.eps_tilde = Some(r.eps_tilde);
            out.output_error = Some(r.output_error);
            out.correlation = Some(r.correlation);
            out.catalyst_return_error = Some(r.catalyst_return_error);
            out.gibbs_margin = Some(r.gibbs_margin);
            out.passed = r.passed;
            if !r.passed {
                let failed: Vec<String> = r.checks.failures().map(|c| c.name.clone()).collect();
                out.error = Some(format!("failed checks: {}", failed.join(", ")));
            }
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

fn tally(outcomes: &[InstanceOutcome], theorem: Theorem) -> TheoremTally {
    let mut t = TheoremTally::default();
    for o in outcomes.iter().filter(|o| o.theorem == theorem) {
        t.instances += 1;
        t.passed += usize::from(o.passed);
        t.max_copies = t.max_copies.max(o.copies.unwrap_or(0));
        t.max_output_error = t.max_output_error.max(o.output_error.unwrap_or(0.0));
        t.max_correlation = t.max_correlation.max(o.correlation.unwrap_or(0.0));
        t.max_catalyst_return_error = t.max_catalyst_return_error.max(o.catalyst_return_error.unwrap_or(0.0));
        t.max_gibbs_margin = t.max_gibbs_margin.max(o.gibbs_margin.unwrap_or(0.0));
        if let Some((_, ok)) = o.refusal {
            t.refusals_checked += 1;
            t.refusals_correct += usize::from(ok);
        }
    }
    t
}

/// Runs `count` free-energy instances and `count` relative instances.
pub fn random_campaign(cfg: &CampaignConfig, tol: &Tolerances) -> Result<CampaignSummary> {
    if cfg.dim < 2 || cfg.count == 0 {
        return Err(Error::arg("campaign needs dim >= 2 and count >= 1"));
    }
    let jobs: Vec<(usize, Theorem)> = (0..cfg.count)
        .flat_map(|i| [(i, Theorem::FreeEnergy), (i, Theorem::Relative)])
        .collect();
    let instances: Vec<InstanceOutcome> = jobs.par_iter().map(|&(i, th)| run_instance(i, th, cfg, tol)).collect();
    let theorem1 = tally(&instances, Theorem::FreeEnergy);
    let theorem3 = tally(&instances, Theorem::Relative);
    let all_pass = [&theorem1, &theorem3]
        .iter()
        .all(|t| t.passed == t.instances && t.refusals_correct == t.refusals_checked);
    Ok(CampaignSummary { config: cfg.clone(), theorem1, theorem3, all_pass, instances })
}
