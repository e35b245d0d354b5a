//! Optimal (Neyman-Pearson) tests and the hypothesis-testing divergence
//! `S_H^{1-ε}(σ‖κ) = -ln min{Tr[Qκ] : 0 ≤ Q ≤ 1, Tr[Qσ] ≥ 1-ε}`.
//!
//! Quantum tests are mixtures of two threshold projectors `P_{>0}(σ - tκ)`
//! bracketing the critical `t`, weighted so that the type-I error is `ε`
//! exactly. Commuting pairs take a classical route: outcomes sorted by
//! likelihood ratio with a fractional weight on the boundary tie class.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::qops::linalg::{self, CMatrix, Eigen};
use crate::qops::{DensityOperator, HermitianOperator, Operator};
use crate::symmetric::{self, SymOp};

#[derive(Clone, Debug)]
pub struct HypothesisTest {
    pub effect: HermitianOperator,
    /// `1 - Tr[Qσ]`.
    pub alpha: f64,
    /// `Tr[Qκ]`.
    pub beta_val: f64,
    /// `-ln β`.
    pub divergence: f64,
}

/// How an i.i.d. test was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Classical,
    Symmetric,
    Dense,
}

/// Errors of an optimal test without the effect operator itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestSummary {
    pub alpha: f64,
    pub beta_val: f64,
    pub divergence: f64,
    pub route: Route,
}

fn neg_ln(beta: f64) -> f64 {
    if beta > 0.0 {
        -beta.ln()
    } else {
        f64::INFINITY
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg(format!("ε must lie in (0,1), got {eps}")));
    }
    Ok(())
}

/// Threshold bracket found by bisection: tests at `t_lo` accept at least
/// `1-ε` of `σ`, tests at `t_hi` less.
struct Bracket<T> {
    lo: (f64, f64, T),
    hi: (f64, f64, T),
    gamma: f64,
}

/// `eval(t)` returns `(Tr[Q_t σ], Tr[Q_t κ], Q_t)` for the threshold test at `t`,
/// non-increasing in `t`. Returns `None` if even `t = 1e300` accepts `1-ε`
/// of `σ`, in which case the divergence is infinite.
fn bisect<T>(eval: impl Fn(f64) -> (f64, f64, T), eps: f64) -> Option<Bracket<T>> {
    let target = 1.0 - eps;
    let mut hi_t = 1.0;
    let mut hi = eval(hi_t);
    while hi.0 >= target {
        hi_t *= 16.0;
        if hi_t > 1e300 {
            return None;
        }
        hi = eval(hi_t);
    }
    let mut lo_t = hi_t;
    let mut lo;
    loop {
        lo_t /= 16.0;
        if lo_t < 1e-300 {
            lo_t = 0.0;
            lo = eval(0.0);
            break;
        }
        let cand = eval(lo_t);
        if cand.0 >= target {
            lo = cand;
            break;
        }
        hi_t = lo_t;
        hi = cand;
    }
    for _ in 0..200 {
        let mid = if lo_t == 0.0 { hi_t * 1e-3 } else { (lo_t * hi_t).sqrt() };
        if !(mid > lo_t && mid < hi_t) || hi_t <= lo_t * (1.0 + 1e-15) {
            break;
        }
        let m = eval(mid);
        if m.0 >= target {
            lo_t = mid;
            lo = m;
        } else {
            hi_t = mid;
            hi = m;
        }
    }
    let span = lo.0 - hi.0;
    let gamma = if span > 0.0 { ((target - hi.0) / span).clamp(0.0, 1.0) } else { 1.0 };
    Some(Bracket { lo, hi, gamma })
}

fn positive_projector(e: &Eigen) -> CMatrix {
    e.map(|x| if x > 0.0 { 1.0 } else { 0.0 })
}

/// Simultaneous eigenbasis of two commuting Hermitian matrices, if they commute.
pub fn common_eigenbasis(a: &CMatrix, b: &CMatrix) -> Option<(Vec<f64>, Vec<f64>, CMatrix)> {
    let scale = linalg::max_abs(a).max(linalg::max_abs(b)).max(1e-300);
    let comm = a * b - b * a;
    if linalg::max_abs(&comm) > 1e-12 * scale * scale {
        return None;
    }
    // An irrational mixing weight separates degenerate eigenspaces of `a`.
    let e = linalg::eigh(&(a + b.scale(0.754_877_666_246_692_7)));
    let v = &e.vectors;
    let da = v.adjoint() * a * v;
    let db = v.adjoint() * b * v;
    let n = a.nrows();
    let off = |m: &CMatrix| (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).fold(0.0f64, |acc, (i, j)| acc.max(m[(i, j)].norm()));
    if off(&da) > 1e-10 * scale || off(&db) > 1e-10 * scale {
        return None;
    }
    Some(((0..n).map(|i| da[(i, i)].re).collect(), (0..n).map(|i| db[(i, i)].re).collect(), v.clone()))
}

/// Classical optimal test: acceptance weight per outcome.
#[derive(Clone, Debug)]
pub struct ClassicalTest {
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub beta_val: f64,
}

fn ratio_key(p: f64, q: f64) -> f64 {
    if q > 0.0 {
        (p / q).ln()
    } else if p > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

fn same_class(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0))
}

/// Optimal test over a list of outcome classes given as `(log-ratio, p-mass, q-mass)`.
/// Returns per-class weights, `α` and `β`.
fn classical_np_classes(classes: &[(f64, f64, f64)], eps: f64) -> (Vec<f64>, f64, f64) {
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| classes[b].0.total_cmp(&classes[a].0));
    let target = 1.0 - eps;
    let mut weights = vec![0.0; classes.len()];
    let (mut pa, mut qa) = (0.0f64, 0.0f64);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pc, mut qc) = (0.0, 0.0);
        while j < order.len() && same_class(classes[order[i]].0, classes[order[j]].0) {
            pc += classes[order[j]].1;
            qc += classes[order[j]].2;
            j += 1;
        }
        let w = if pa + pc <= target { 1.0 } else if pc > 0.0 { ((target - pa) / pc).clamp(0.0, 1.0) } else { 0.0 };
        for &k in &order[i..j] {
            weights[k] = w;
        }
        pa += w * pc;
        qa += w * qc;
        if w < 1.0 {
            break;
        }
        i = j;
    }
    (weights, 1.0 - pa, qa)
}

/// Neyman-Pearson test between two distributions.
pub fn classical_neyman_pearson(p: &[f64], q: &[f64], eps: f64) -> Result<ClassicalTest> {
    check_eps(eps)?;
    if p.len() != q.len() {
        return Err(Error::dim("distributions differ in length"));
    }
    let classes: Vec<(f64, f64, f64)> = p.iter().zip(q).map(|(&a, &b)| (ratio_key(a, b), a, b)).collect();
    let (weights, alpha, beta) = classical_np_classes(&classes, eps);
    Ok(ClassicalTest { weights, alpha, beta_val: beta })
}

/// Optimal test for `σ` against `κ` at type-I error `ε`.
pub fn neyman_pearson_test(sigma: &DensityOperator, kappa: &DensityOperator, eps: f64) -> Result<HypothesisTest> {
    check_eps(eps)?;
    if sigma.dim() != kappa.dim() {
        return Err(Error::dim("hypotheses have different dimensions"));
    }
    if let Some((p, q, v)) = common_eigenbasis(sigma.matrix(), kappa.matrix()) {
        let t = classical_neyman_pearson(&p, &q, eps)?;
        let effect = if linalg::is_diagonal(&v) && v == CMatrix::identity(v.nrows(), v.nrows()) {
            linalg::diag(&t.weights)
        } else {
            &v * linalg::diag(&t.weights) * v.adjoint()
        };
        return Ok(HypothesisTest {
            effect: HermitianOperator::from_raw(sigma.dims().to_vec(), effect),
            alpha: t.alpha,
            beta_val: t.beta_val,
            divergence: neg_ln(t.beta_val),
        });
    }
    quantum_neyman_pearson_test(sigma, kappa, eps)
}

/// The quantum bisection route, also used as a cross-check on commuting pairs.
pub fn quantum_neyman_pearson_test(sigma: &DensityOperator, kappa: &DensityOperator, eps: f64) -> Result<HypothesisTest> {
    check_eps(eps)?;
    let (s, k) = (sigma.matrix(), kappa.matrix());
    let eval = |t: f64| {
        let q = positive_projector(&linalg::eigh(&(s - k.scale(t))));
        (linalg::trace_product(&q, s).re, linalg::trace_product(&q, k).re, q)
    };
    let dims = sigma.dims().to_vec();
    match bisect(eval, eps) {
        None => {
            // κ's kernel carries at least 1-ε of σ.
            let q = positive_projector(&linalg::eigh(&(s - k.scale(1e300))));
            let a = linalg::trace_product(&q, s).re;
            Ok(HypothesisTest {
                effect: HermitianOperator::from_raw(dims, q),
                alpha: 1.0 - a,
                beta_val: 0.0,
                divergence: f64::INFINITY,
            })
        }
        Some(b) => {
            let g = b.gamma;
            let effect = b.lo.2.scale(g) + b.hi.2.scale(1.0 - g);
            let accept = g * b.lo.0 + (1.0 - g) * b.hi.0;
            let beta = g * b.lo.1 + (1.0 - g) * b.hi.1;
            Ok(HypothesisTest {
                effect: HermitianOperator::from_raw(dims, effect),
                alpha: 1.0 - accept,
                beta_val: beta,
                divergence: neg_ln(beta),
            })
        }
    }
}

pub fn hypothesis_testing_divergence(sigma: &DensityOperator, kappa: &DensityOperator, eps: f64) -> Result<f64> {
    Ok(neyman_pearson_test(sigma, kappa, eps)?.divergence)
}

/// Optimal test between `σ^{⊗n}` and `κ^{⊗n}` without forming the tensor
/// powers when structure allows: type classes for commuting pairs, irrep
/// blocks for qubits, dense matrices otherwise (subject to the size cap).
pub fn iid_hypothesis_test(
    sigma: &DensityOperator,
    kappa: &DensityOperator,
    n: usize,
    eps: f64,
    tol: &Tolerances,
) -> Result<TestSummary> {
    check_eps(eps)?;
    if n == 0 {
        return Err(Error::arg("need at least one copy"));
    }
    if sigma.dim() != kappa.dim() {
        return Err(Error::dim("hypotheses have different dimensions"));
    }
    if let Some((p, q, _)) = common_eigenbasis(sigma.matrix(), kappa.matrix()) {
        return Ok(type_class_test(&p, &q, n, eps));
    }
    if sigma.dim() == 2 {
        return symmetric_test(&symmetric::qubit(sigma)?, &symmetric::qubit(kappa)?, n, eps);
    }
    let d = (sigma.dim() as f64).powi(n as i32);
    if d > tol.max_dim as f64 {
        return Err(Error::SizeCap { dim: d.min(usize::MAX as f64) as usize, cap: tol.max_dim });
    }
    let s = crate::qops::tensor_power(sigma, n)?;
    let k = crate::qops::tensor_power(kappa, n)?;
    let t = quantum_neyman_pearson_test(&s, &k, eps)?;
    Ok(TestSummary { alpha: t.alpha, beta_val: t.beta_val, divergence: t.divergence, route: Route::Dense })
}

/// Compositions of `n` into `d` nonnegative parts.
fn compositions(n: usize, d: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, d - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exact test between `p^{⊗n}` and `q^{⊗n}` aggregated over type classes.
pub fn type_class_test(p: &[f64], q: &[f64], n: usize, eps: f64) -> TestSummary {
    let lf = linalg::ln_factorials(n);
    let classes: Vec<(f64, f64, f64)> = compositions(n, p.len())
        .into_iter()
        .filter_map(|c| {
            let mut lr = 0.0;
            let (mut lp, mut lq) = (lf[n], lf[n]);
            for (i, &ci) in c.iter().enumerate() {
                lp -= lf[ci];
                lq -= lf[ci];
                if ci > 0 {
                    lp += ci as f64 * p[i].ln();
                    lq += ci as f64 * q[i].ln();
                    lr += ci as f64 * ratio_key(p[i], q[i]);
                }
            }
            let (pm, qm) = (lp.exp(), lq.exp());
            if pm == 0.0 && qm == 0.0 {
                return None;
            }
            if lr.is_nan() {
                lr = if pm > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
            }
            Some((lr, pm, qm))
        })
        .collect();
    let (_, alpha, beta) = classical_np_classes(&classes, eps);
    TestSummary { alpha, beta_val: beta, divergence: neg_ln(beta), route: Route::Classical }
}

/// Test between `σ^{⊗n}` and `κ^{⊗n}` for qubits, evaluated block by block.
pub fn symmetric_test(sigma: &symmetric::Qubit, kappa: &symmetric::Qubit, n: usize, eps: f64) -> Result<TestSummary> {
    let s = SymOp::power(sigma, n);
    let k = SymOp::power(kappa, n);
    Ok(blockwise_test(&s, &k, eps, Route::Symmetric))
}

pub fn blockwise_test(s: &SymOp, k: &SymOp, eps: f64, route: Route) -> TestSummary {
    let mult = s.multiplicities();
    let eval = |t: f64| {
        let parts: Vec<(f64, f64)> = s
            .blocks()
            .par_iter()
            .zip(k.blocks())
            .map(|(sb, kb)| {
                let q = positive_projector(&linalg::eigh(&(sb - kb.scale(t))));
                (linalg::trace_product(&q, sb).re, linalg::trace_product(&q, kb).re)
            })
            .collect();
        let a: f64 = parts.iter().zip(&mult).map(|(p, m)| m * p.0).sum();
        let b: f64 = parts.iter().zip(&mult).map(|(p, m)| m * p.1).sum();
        (a, b, ())
    };
    match bisect(eval, eps) {
        None => TestSummary { alpha: eps, beta_val: 0.0, divergence: f64::INFINITY, route },
        Some(b) => {
            let g = b.gamma;
            let accept = g * b.lo.0 + (1.0 - g) * b.hi.0;
            let beta = g * b.lo.1 + (1.0 - g) * b.hi.1;
            TestSummary { alpha: 1.0 - accept, beta_val: beta, divergence: neg_ln(beta), route }
        }
    }
}
