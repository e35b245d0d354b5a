//! Binary measure-and-prepare channel on `S ⊗ W` with a single two-level
//! work storage, covering work extraction (`w > 0`) as well as investment.

use serde::Serialize;

use super::measure_prepare::{Branch, MeasurePrepareChannel};
use super::storage::WorkStorage;
use super::verify::{verify_gibbs_preserving, Check, VerificationReport};
use crate::config::Tolerances;
use crate::divergences::{neyman_pearson_test, renyi_inf_with};
use crate::error::{Error, Result};
use crate::qops::linalg::{self, CMatrix};
use crate::qops::{tensor, trace_distance, DensityOperator, GibbsContext, HermitianOperator, Operator};

/// Scalar and operator margins of the two preparations, in the order
/// `ζ₁` on `σ_G⊗|a⟩⟨a|`, `ζ₁` on `σ_G⊗|b⟩⟨b|`, `ζ₂` on the `|a⟩` block,
/// `ζ₂` on the `|b⟩` block.
pub const MARGIN_NAMES: [&str; 4] =
    ["zeta1_gibbs_a_weight", "zeta1_gibbs_b_weight", "zeta2_a_block_psd", "zeta2_b_block_psd"];

#[derive(Clone, Debug, Serialize)]
pub struct Lemma3 {
    #[serde(skip)]
    pub channel: MeasurePrepareChannel,
    pub s: f64,
    pub s_prime: f64,
    pub q: f64,
    pub u: f64,
    /// Second-entry weight after the classical post-processing, `ε' = rε`.
    pub eps_prime: f64,
    pub margins: [f64; 4],
    /// `d₁(σ̃, σ')` and `d₁(Ω, |b⟩⟨b|)`, each below `2√(ε/q)`.
    pub output_errors: [f64; 2],
    pub report: VerificationReport,
}

pub fn lemma3_build(
    sigma: &DensityOperator,
    sigma_p: &DensityOperator,
    ctx: &GibbsContext,
    w: f64,
    eps: f64,
    tol: &Tolerances,
) -> Result<Lemma3> {
    let g = &ctx.gibbs;
    if sigma.dim() != g.dim() || sigma_p.dim() != g.dim() {
        return Err(Error::dim("σ, σ' and the Gibbs state must share one space"));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::arg(format!("ε must lie in (0, 1/2), got {eps}")));
    }
    let storage = WorkStorage::new(w, ctx.beta)?;
    let bw = storage.beta_w();
    let zz = storage.z;
    let pb = storage.p_b();

    let test = neyman_pearson_test(sigma, g, eps)?;
    let s = test.divergence;
    let s_prime = renyi_inf_with(sigma_p, g, tol)?.value;
    if !(s >= s_prime + bw) {
        return Err(Error::construction("S_H^{1-ε}(σ||σ_G) >= S_inf(σ'||σ_G) + βw", s - s_prime - bw));
    }
    let q = 1.0 - (-s_prime - bw).exp() / zz;
    let eps_cap = 0.5f64.min(4.0 * q.powi(5) / (1.0 + q).powi(2));
    if !(eps < eps_cap) {
        return Err(Error::construction("ε < min(1/2, 4q^5/(1+q)^2)", eps_cap - eps));
    }
    let u = (eps / q).sqrt();
    // Classical post-processing keeps outcome 1 and moves a fraction 1-r of
    // outcome 2 onto it, matching the Gibbs statistics to (1-q, q).
    let r = (zz - (-s_prime - bw).exp()) / (zz - (-s).exp());
    let ep = eps * r;
    let den = q - ep;

    let k1 = [(1.0 - u) * u * q, (1.0 - u) * (1.0 - u) * q, u * u * q - (1.0 - pb) * ep, u * (1.0 - u) * q - pb * ep];
    let k2 = [
        -(1.0 - q) * (1.0 - u) * u,
        -(1.0 - q) * (1.0 - u) * (1.0 - u),
        (1.0 - ep) * (1.0 - pb) - (1.0 - q) * u * u,
        (1.0 - ep) * pb - (1.0 - q) * u * (1.0 - u),
    ];
    let (sp, sg) = (sigma_p.matrix(), g.matrix());
    let block = |k: &[f64; 4], a_side: bool| -> CMatrix {
        let (i, j) = if a_side { (0, 2) } else { (1, 3) };
        (sp.scale(k[i]) + sg.scale(k[j])).unscale(den)
    };
    let margins = [
        k1[2] / den,
        k1[3] / den,
        linalg::min_eigenvalue(&block(&k2, true)),
        linalg::min_eigenvalue(&block(&k2, false)),
    ];
    for (name, &m) in MARGIN_NAMES.iter().zip(&margins) {
        if m < -tol.psd {
            return Err(Error::construction(*name, m));
        }
    }

    let cq = |k: &[f64; 4]| -> CMatrix {
        let mut out = CMatrix::zeros(2 * g.dim(), 2 * g.dim());
        out += linalg::kron(&block(k, true), &linalg::diag(&[1.0, 0.0]));
        out += linalg::kron(&block(k, false), &linalg::diag(&[0.0, 1.0]));
        linalg::hermitize(&out)
    };
    let mut dims = g.dims().to_vec();
    dims.push(2);
    let d = 2 * g.dim();
    let e1 = linalg::kron(test.effect.matrix(), &linalg::diag(&[1.0, 0.0]));
    let rest = CMatrix::identity(d, d) - &e1;
    let f1 = &e1 + rest.scale(1.0 - r);
    let f2 = rest.scale(r);
    let channel = MeasurePrepareChannel::new(
        dims.clone(),
        dims.clone(),
        vec![
            Branch { effect: HermitianOperator::from_raw(dims.clone(), f1), prep: DensityOperator::from_raw(dims.clone(), cq(&k1)) },
            Branch { effect: HermitianOperator::from_raw(dims.clone(), f2), prep: DensityOperator::from_raw(dims.clone(), cq(&k2)) },
        ],
    )?;

    let g_sw = tensor(&[g, &storage.omega_gibbs])?;
    let mut report = verify_gibbs_preserving(&channel, &g_sw, &g_sw, tol);
    for (name, &m) in MARGIN_NAMES.iter().zip(&margins) {
        report.push(Check::at_most(*name, -m, tol.psd));
    }
    let sigma_tilde = sigma_p.mix(u, g)?;
    let big_omega = WorkStorage::partially_charged(u)?;
    let out = channel.apply(&tensor(&[sigma, &DensityOperator::basis(2, 0)])?)?;
    let target = tensor(&[&sigma_tilde, &big_omega])?;
    report.push(Check::at_most("signal_output_product", trace_distance(&out, &target)?, tol.channel));
    let bound = 2.0 * u;
    let output_errors =
        [trace_distance(&sigma_tilde, sigma_p)?, trace_distance(&big_omega, &DensityOperator::basis(2, 1))?];
    report.push(Check::below("system_distance_below_2sqrt(eps/q)", output_errors[0], bound));
    report.push(Check::below("storage_distance_below_2sqrt(eps/q)", output_errors[1], bound));
    Ok(Lemma3 { channel, s, s_prime, q, u, eps_prime: ep, margins, output_errors, report })
}
