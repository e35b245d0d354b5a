//! `λ* = max{λ : ρ_G^{⊗8} - λ|+⟩⟨+|^{⊗8} ≥ 0}` for the toy Gibbs state, by the
//! Schwarz-inequality formula and by bisection on positivity.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::Result;
use crate::qops::linalg::{self, binomial};
use crate::qops::{tensor_power, DensityOperator, Operator};

use super::toy::{toy_context, COPIES};

#[derive(Clone, Debug, Serialize)]
pub struct LambdaStar {
    /// `1/(2^8 Σ_i 3^{-N_i})`, `N_i` the number of zeros in string `i`.
    pub schwarz: f64,
    pub schwarz_exact: String,
    pub bisect: f64,
    pub relative_gap: f64,
    /// The same quantity for one copy.
    pub single_copy: f64,
    pub bisection_steps: usize,
}

/// `1/(2^n Σ_N C(n,N) 3^{-N})` as an exact fraction.
pub fn schwarz_exact(n: usize) -> Ratio<i128> {
    let sum: Ratio<i128> =
        (0..=n).map(|k| Ratio::new(binomial(n, k) as i128, 3i128.pow(k as u32))).fold(Ratio::from_integer(0), |a, b| a + b);
    (sum * Ratio::from_integer(1i128 << n)).recip()
}

/// Largest `λ` in `[0, hi]` with `a - λ b ≥ 0`, to relative precision `rel`.
pub fn psd_bisection(a: &DensityOperator, b: &DensityOperator, hi: f64, rel: f64) -> (f64, usize) {
    let feasible = |l: f64| linalg::min_eigenvalue(&(a.matrix() - b.matrix().scale(l))) >= 0.0;
    let (mut lo, mut hi) = (0.0, hi);
    let mut steps = 0;
    while hi - lo > rel * hi && steps < 200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    (lo, steps)
}

pub fn appendix_d_lambda_star() -> Result<LambdaStar> {
    let ctx = toy_context();
    let plus = DensityOperator::plus();
    let exact = schwarz_exact(COPIES);
    let schwarz = *exact.numer() as f64 / *exact.denom() as f64;
    let g = tensor_power(&ctx.gibbs, COPIES)?;
    let p = tensor_power(&plus, COPIES)?;
    let (bisect, bisection_steps) = psd_bisection(&g, &p, 1.0, 1e-10);
    let (single_copy, _) = psd_bisection(&ctx.gibbs, &plus, 1.0, 1e-12);
    Ok(LambdaStar {
        schwarz,
        schwarz_exact: exact.to_string(),
        bisect,
        relative_gap: ((bisect - schwarz) / schwarz).abs(),
        single_copy,
        bisection_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schwarz_value_is_three_eighths_to_the_eighth() {
        assert_eq!(schwarz_exact(8), Ratio::new(6561, 16_777_216));
        assert_eq!(schwarz_exact(1), Ratio::new(3, 8));
    }

    #[test]
    fn bisection_agrees_with_the_formula() {
        let l = appendix_d_lambda_star().unwrap();
        assert!(l.relative_gap <= 1e-6, "{l:?}");
        assert!((l.single_copy - 0.375).abs() < 1e-9);
        assert!(25.0 / 4f64.powi(8) < l.bisect);
    }
}
