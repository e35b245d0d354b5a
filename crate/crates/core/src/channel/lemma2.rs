//! Ternary measure-and-prepare channel on `S^{⊗m} ⊗ W^{⊗m}` that invests
//! work from `m` storage qubits, each moving from `|a⟩` towards `|b⟩`.
//!
//! Preparations are cq states `Σ_y (v_{1y} σ' + v_{0y} σ_G) ⊗ |y⟩⟨y|` whose
//! coefficients depend on `y` only through the number `N_b` of `b`s, so a
//! plan stores `3 × 2 × (m+1)` numbers.

use serde::Serialize;

use super::measure_prepare::{Branch, MeasurePrepareChannel};
use super::storage::WorkStorage;
use super::verify::{Check, VerificationReport};
use crate::config::Tolerances;
use crate::divergences::{kl_divergence_with, neyman_pearson_test, renyi_inf_with};
use crate::error::{Error, Result};
use crate::qops::linalg::{self, CMatrix};
use crate::qops::{tensor_power, CqOperator, DensityOperator, GibbsContext, HermitianOperator, Operator};

/// Residual allowed in the coefficient identities.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct TernaryPlan {
    pub m: usize,
    /// `S_H^{1-ε}(σ‖σ_G)` realised by the test.
    pub s: f64,
    /// `S_∞(σ'‖σ_G)`.
    pub s_prime: f64,
    pub t: f64,
    pub u: f64,
    /// `ε = t/2`.
    pub eps: f64,
    pub beta_w: f64,
    pub z: f64,
    /// `v[i][j][N_b]` for outcome `i+1`, prepared flag `j` (1: `σ'`, 0: `σ_G`).
    pub v: [[Vec<f64>; 2]; 3],
}

impl TernaryPlan {
    pub fn new(m: usize, s: f64, s_prime: f64, t: f64, u: f64, beta_w: f64) -> Self {
        let eps = t / 2.0;
        let z = 1.0 + (-beta_w).exp();
        let zm1 = z.powi(m as i32) - 1.0;
        let es = (-s).exp();
        let base: Vec<f64> = (0..=m).map(|nb| u.powi((m - nb) as i32) * (1.0 - u).powi(nb as i32)).collect();
        let keep = (1.0 - t) / (1.0 - eps);
        let leak = (t - eps) / (1.0 - eps);
        let v = [
            [base.iter().map(|b| leak * b).collect(), base.iter().map(|b| keep * b).collect()],
            [base.clone(), vec![0.0; m + 1]],
            [
                base.iter()
                    .enumerate()
                    .map(|(nb, b)| ((-beta_w * nb as f64).exp() - es * leak * b - (1.0 - es) * b) / zm1)
                    .collect(),
                base.iter().map(|b| -es * keep * b / zm1).collect(),
            ],
        ];
        TernaryPlan { m, s, s_prime, t, u, eps, beta_w, z, v }
    }

    /// `u^{N_a}(1-u)^{N_b}`.
    pub fn base(&self, nb: usize) -> f64 {
        self.u.powi((self.m - nb) as i32) * (1.0 - self.u).powi(nb as i32)
    }

    /// `Σ_{j,y} v^i_{jy} - 1` for each outcome, counting each `N_b` class
    /// with its binomial multiplicity.
    pub fn normalization_residuals(&self) -> [f64; 3] {
        let m = self.m;
        let sum = |i: usize| -> f64 {
            (0..=m).map(|nb| linalg::binomial(m, nb) * (self.v[i][0][nb] + self.v[i][1][nb])).sum::<f64>() - 1.0
        };
        [sum(0), sum(1), sum(2)]
    }

    /// Largest residual per count class of the four mixture identities:
    /// signal input onto the `σ'` and `σ_G` parts, then Gibbs input onto the
    /// same two parts.
    pub fn identity_residuals(&self) -> [f64; 4] {
        let (eps, t) = (self.eps, self.t);
        let zm = self.z.powi(self.m as i32);
        let es = (-self.s).exp();
        let g = [es / zm, (1.0 - es) / zm, 1.0 - 1.0 / zm];
        let mut out = [0.0f64; 4];
        for nb in 0..=self.m {
            let b = self.base(nb);
            let v = |i: usize, j: usize| self.v[i][j][nb];
            let r = [
                (1.0 - eps) * v(0, 1) + eps * v(1, 1) - (1.0 - t) * b,
                (1.0 - eps) * v(0, 0) + eps * v(1, 0) - t * b,
                g[0] * v(0, 1) + g[1] * v(1, 1) + g[2] * v(2, 1),
                g[0] * v(0, 0) + g[1] * v(1, 0) + g[2] * v(2, 0) - (-self.beta_w * nb as f64).exp() / zm,
            ];
            for k in 0..4 {
                out[k] = out[k].max(r[k].abs());
            }
        }
        out
    }

    /// `min_{i,y} v^i_{0y} e^{-s'} + v^i_{1y}`: each preparation is positive
    /// semidefinite when this is nonnegative.
    pub fn psd_margin(&self) -> f64 {
        let e = (-self.s_prime).exp();
        (0..3)
            .flat_map(|i| (0..=self.m).map(move |nb| (i, nb)))
            .map(|(i, nb)| self.v[i][0][nb] * e + self.v[i][1][nb])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn report(&self, tol: &Tolerances) -> VerificationReport {
        let mut r = VerificationReport::new();
        let names = ["signal_to_target_part", "signal_to_gibbs_part", "gibbs_to_target_part", "gibbs_to_gibbs_part"];
        for (name, res) in names.iter().zip(self.identity_residuals()) {
            r.push(Check::at_most(*name, res, IDENTITY_TOL));
        }
        let norm = self.normalization_residuals().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        r.push(Check::at_most("normalization", norm, IDENTITY_TOL));
        r.push(Check::at_most("preparations_psd", -self.psd_margin(), tol.psd));
        r
    }
}

fn popcount(y: usize) -> usize {
    y.count_ones() as usize
}

/// The Lemma-2 channel in count-indexed form.
#[derive(Clone, Debug)]
pub struct TernaryChannel {
    pub plan: TernaryPlan,
    pub effect: HermitianOperator,
    pub sigma_p: DensityOperator,
    pub sigma_gibbs: DensityOperator,
}

impl TernaryChannel {
    fn check(&self, x: &CqOperator) -> Result<()> {
        if x.s_dims() != self.sigma_p.dims() || x.w_sites() != self.plan.m {
            return Err(Error::dim(format!(
                "ternary channel acts on S {:?} with {} storage sites, got S {:?} with {}",
                self.sigma_p.dims(),
                self.plan.m,
                x.s_dims(),
                x.w_sites()
            )));
        }
        Ok(())
    }

    /// Outcome probabilities of `{A⊗|a..a⟩⟨a..a|, (1-A)⊗|a..a⟩⟨a..a|, 1⊗(1-|a..a⟩⟨a..a|)}`.
    pub fn probabilities(&self, x: &CqOperator) -> Result<[f64; 3]> {
        self.check(x)?;
        let all_a = x.block(0);
        let p1 = linalg::trace_product(self.effect.matrix(), all_a).re;
        let p12 = linalg::trace_re(all_a);
        Ok([p1, p12 - p1, x.trace() - p12])
    }

    /// Coefficients `(c_1, c_0)` of `σ'` and `σ_G` in the output block with
    /// `N_b` storage qubits in `|b⟩`.
    fn output_coefficients(&self, p: &[f64; 3]) -> Vec<(f64, f64)> {
        (0..=self.plan.m)
            .map(|nb| {
                let v = &self.plan.v;
                let c1 = (0..3).map(|i| p[i] * v[i][1][nb]).sum();
                let c0 = (0..3).map(|i| p[i] * v[i][0][nb]).sum();
                (c1, c0)
            })
            .collect()
    }

    pub fn apply(&self, x: &CqOperator) -> Result<CqOperator> {
        let p = self.probabilities(x)?;
        let coef = self.output_coefficients(&p);
        let (sp, sg) = (self.sigma_p.matrix(), self.sigma_gibbs.matrix());
        let blocks = (0..1usize << self.plan.m)
            .map(|y| {
                let (c1, c0) = coef[popcount(y)];
                sp.scale(c1) + sg.scale(c0)
            })
            .collect();
        CqOperator::new(self.sigma_p.dims().to_vec(), self.plan.m, blocks)
    }

    /// The preparation for outcome `i` (0-based) as a cq state.
    pub fn preparation(&self, i: usize) -> Result<CqOperator> {
        let mut p = [0.0; 3];
        p[i] = 1.0;
        let coef = self.output_coefficients(&p);
        let blocks = (0..1usize << self.plan.m)
            .map(|y| {
                let (c1, c0) = coef[popcount(y)];
                self.sigma_p.matrix().scale(c1) + self.sigma_gibbs.matrix().scale(c0)
            })
            .collect();
        CqOperator::new(self.sigma_p.dims().to_vec(), self.plan.m, blocks)
    }

    /// Dense measure-and-prepare form on `S^{⊗m} ⊗ W^{⊗m}`.
    pub fn to_measure_prepare(&self, tol: &Tolerances) -> Result<MeasurePrepareChannel> {
        let ds = self.sigma_p.dim();
        let dw = 1usize << self.plan.m;
        if ds * dw > tol.max_dim {
            return Err(Error::SizeCap { dim: ds * dw, cap: tol.max_dim });
        }
        let mut proj = CMatrix::zeros(dw, dw);
        proj[(0, 0)] = linalg::ONE;
        let id_s = CMatrix::identity(ds, ds);
        let id_w = CMatrix::identity(dw, dw);
        let a = self.effect.matrix();
        let effects = [
            linalg::kron(a, &proj),
            linalg::kron(&(&id_s - a), &proj),
            linalg::kron(&id_s, &(&id_w - &proj)),
        ];
        let dims = self.preparation(0)?.dense_dims();
        let branches = effects
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                let prep = self.preparation(i)?;
                Ok(Branch {
                    effect: HermitianOperator::from_raw(dims.clone(), e),
                    prep: DensityOperator::from_raw(dims.clone(), prep.to_dense()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurePrepareChannel::new(dims.clone(), dims, branches)
    }
}

/// `X ⊗ ⊗_i diag(w_i)` with the same single-site distribution on every site.
pub fn with_storage_product(x: &DensityOperator, site: [f64; 2], m: usize) -> Result<CqOperator> {
    let blocks = (0..1usize << m)
        .map(|y| {
            let nb = popcount(y);
            x.matrix().scale(site[0].powi((m - nb) as i32) * site[1].powi(nb as i32))
        })
        .collect();
    CqOperator::new(x.dims().to_vec(), m, blocks)
}

#[derive(Clone, Debug)]
pub struct Lemma2 {
    pub channel: TernaryChannel,
    /// `Ξ = (1-t)σ' + tσ_G`.
    pub xi: DensityOperator,
    /// `ω = u|a⟩⟨a| + (1-u)|b⟩⟨b|`.
    pub omega: DensityOperator,
    pub report: VerificationReport,
}

impl Lemma2 {
    pub fn plan(&self) -> &TernaryPlan {
        &self.channel.plan
    }
}

/// Searches `m` upwards from `max(2, ⌈2e^{2βw}/u⌉)` for the first copy
/// count at which the test condition and all positivity conditions hold.
#[allow(clippy::too_many_arguments)]
pub fn lemma2_build(
    rho: &DensityOperator,
    rho_p: &DensityOperator,
    ctx: &GibbsContext,
    storage: &WorkStorage,
    t: f64,
    u: f64,
    m_max: usize,
    tol: &Tolerances,
) -> Result<Lemma2> {
    if storage.w >= 0.0 {
        return Err(Error::Refused(format!(
            "work storage gap w = {} is not negative; only work investment is covered",
            storage.w
        )));
    }
    if (storage.beta - ctx.beta).abs() > 1e-12 * ctx.beta {
        return Err(Error::arg("work storage and system must share one inverse temperature"));
    }
    let g = &ctx.gibbs;
    let bw = storage.beta_w();
    let f = kl_divergence_with(rho, g, tol)?.value;
    let fp = kl_divergence_with(rho_p, g, tol)?.value;
    if !(f > fp + bw) {
        return Err(Error::Refused(format!("F(ρ) - F(ρ') = {} does not exceed βw = {bw}", f - fp)));
    }
    if !(t > 0.0 && t < 0.5) {
        return Err(Error::arg(format!("t must lie in (0, 1/2), got {t}")));
    }
    let u_cap = (2.0 * bw).exp().min((bw).exp() / 2.0);
    if !(u > 0.0 && u < u_cap) {
        return Err(Error::arg(format!("u must lie in (0, min(e^(2βw), e^(βw)/2)) = (0, {u_cap}), got {u}")));
    }
    let m0 = ((2.0 * (2.0 * bw).exp() / u).ceil() as usize).max(2);
    let eps = t / 2.0;
    let mut last = String::from("no copy count tried");
    for m in m0..=m_max {
        let dense = (rho.dim() as f64).powi(m as i32) * (1u64 << m.min(62)) as f64;
        if dense > tol.max_dim as f64 {
            return Err(Error::SizeCap { dim: dense.min(usize::MAX as f64) as usize, cap: tol.max_dim });
        }
        let sigma = tensor_power(rho, m)?;
        let sigma_p = tensor_power(rho_p, m)?;
        let sigma_g = tensor_power(g, m)?;
        let test = neyman_pearson_test(&sigma, &sigma_g, eps)?;
        let s = test.divergence;
        let s_prime = renyi_inf_with(&sigma_p, &sigma_g, tol)?.value;
        let gap = s - (s_prime + m as f64 * bw);
        if gap < 0.0 {
            last = format!("m = {m}: S_H - S_inf - mβw = {gap:e}");
            continue;
        }
        let plan = TernaryPlan::new(m, s, s_prime, t, u, bw);
        if plan.psd_margin() < -tol.psd {
            last = format!("m = {m}: preparation positivity margin {:e}", plan.psd_margin());
            continue;
        }
        let channel = TernaryChannel { plan, effect: test.effect, sigma_p: sigma_p.clone(), sigma_gibbs: sigma_g.clone() };
        let xi = sigma_p.mix(t, &sigma_g)?;
        let omega = WorkStorage::partially_charged(u)?;
        let mut report = channel.plan.report(tol);
        let wg = storage.omega_gibbs.matrix();
        let gibbs_in = with_storage_product(&sigma_g, [wg[(0, 0)].re, wg[(1, 1)].re], m)?;
        let back = channel.apply(&gibbs_in)?.trace_distance(&gibbs_in)?;
        report.push(Check::at_most("gibbs_fixed_point", back, tol.channel));
        let signal = CqOperator::with_label(&sigma, m, 0);
        let target = with_storage_product(&xi, [u, 1.0 - u], m)?;
        let out = channel.apply(&signal)?.trace_distance(&target)?;
        report.push(Check::at_most("signal_output_product", out, tol.channel));
        report.push(Check::below("target_distance_below_t", crate::qops::trace_distance(&xi, &sigma_p)?, t));
        let work = crate::qops::trace_distance(&omega, &DensityOperator::basis(2, 1))?;
        report.push(Check::at_most("work_distance_at_most_u", work, u + tol.channel));
        return Ok(Lemma2 { channel, xi, omega, report });
    }
    Err(Error::CopiesInsufficient { limit: m_max, detail: last })
}
