use rayon::prelude::*;
use serde::Serialize;

use super::hypothesis::{iid_hypothesis_test, Route};
use super::relative::kl_divergence_with;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::qops::{DensityOperator, GibbsContext};

/// One row of the convergence table `S_H^{1-ε}(ρ^{⊗n}‖κ^{⊗n})/n → S₁(ρ‖κ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteinRow {
    pub n: usize,
    pub rate: f64,
    /// `S₁(ρ‖κ) - rate`.
    pub gap_to_kl: f64,
    pub route: Route,
}

pub fn stein_scan(rho: &DensityOperator, ctx: &GibbsContext, eps: f64, n_max: usize, tol: &Tolerances) -> Result<Vec<SteinRow>> {
    stein_scan_pair(rho, &ctx.gibbs, eps, n_max, tol)
}

/// The same table against an arbitrary second state.
pub fn stein_scan_pair(
    rho: &DensityOperator,
    kappa: &DensityOperator,
    eps: f64,
    n_max: usize,
    tol: &Tolerances,
) -> Result<Vec<SteinRow>> {
    if n_max == 0 {
        return Err(Error::arg("n_max must be at least 1"));
    }
    let kl = kl_divergence_with(rho, kappa, tol)?.value;
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let t = iid_hypothesis_test(rho, kappa, n, eps, tol)?;
            let rate = t.divergence / n as f64;
            Ok(SteinRow { n, rate, gap_to_kl: kl - rate, route: t.route })
        })
        .collect()
}

pub fn to_csv(rows: &[SteinRow]) -> String {
    let mut out = String::from("n,rate,gap_to_kl\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.n, r.rate, r.gap_to_kl));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_approach_kl_from_below() {
        let p = DensityOperator::diagonal(&[0.015, 0.985]).unwrap();
        let ctx = crate::qops::gibbs_state(&crate::qops::HermitianOperator::diagonal(&[0.0, 3f64.ln()]), 1.0).unwrap();
        let rows = stein_scan(&p, &ctx, 0.01, 40, &Tolerances::DEFAULT).unwrap();
        assert_eq!(rows.len(), 40);
        assert!(rows.iter().all(|r| r.route == Route::Classical));
        assert!(rows[39].gap_to_kl < rows[7].gap_to_kl);
        assert!(rows[39].gap_to_kl > 0.0);
        let csv = to_csv(&rows);
        assert!(csv.starts_with("n,rate,gap_to_kl\n1,"));
    }
}
