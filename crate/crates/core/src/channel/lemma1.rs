//! Two-outcome measure-and-prepare channel sending `κ ↦ κ'` exactly and
//! `σ` to within the test's type-I error of `σ'`.

use super::measure_prepare::{Branch, MeasurePrepareChannel};
use crate::config::Tolerances;
use crate::divergences::HypothesisTest;
use crate::error::{Error, Result};
use crate::qops::linalg;
use crate::qops::{DensityOperator, HermitianOperator, Operator};

#[derive(Clone, Debug)]
pub struct Lemma1Channel {
    pub channel: MeasurePrepareChannel,
    /// `Tr[Aσ]`.
    pub accept: f64,
    /// `b = Tr[Aκ]`.
    pub b: f64,
    /// Smallest eigenvalue of `κ' - bσ'`; nonnegative up to rounding.
    pub margin: f64,
}

/// Effect `A` prepares `σ'`, effect `1 - A` prepares `κ'' = (κ' - bσ')/(1 - b)`.
pub fn lemma1_build(
    sigma: &DensityOperator,
    kappa: &DensityOperator,
    sigma_p: &DensityOperator,
    kappa_p: &DensityOperator,
    test: &HypothesisTest,
    tol: &Tolerances,
) -> Result<Lemma1Channel> {
    let a = &test.effect;
    if sigma.dim() != kappa.dim() || a.dim() != sigma.dim() {
        return Err(Error::dim("σ, κ and the test effect must share one space"));
    }
    if sigma_p.dim() != kappa_p.dim() {
        return Err(Error::dim("σ' and κ' must share one space"));
    }
    let accept = sigma.expectation(a.matrix());
    let b = kappa.expectation(a.matrix());
    let need = 1.0 - test.alpha;
    if accept < need - tol.alpha {
        return Err(Error::construction("Tr[A σ] >= 1 - ε", accept - need));
    }
    let rest = kappa_p.matrix() - sigma_p.matrix().scale(b);
    let (margin, _) = linalg::psd_margin(&rest);
    if margin < -tol.psd {
        return Err(Error::construction("Tr[A κ] <= exp(-S_inf(σ'||κ')), i.e. κ' - Tr[Aκ] σ' >= 0", margin));
    }
    let kappa_pp = if 1.0 - b <= tol.support {
        // b = 1 forces κ' = σ', and the second branch never fires on κ.
        kappa_p.clone()
    } else {
        DensityOperator::from_raw(kappa_p.dims().to_vec(), linalg::hermitize(&rest.unscale(1.0 - b)))
    };
    let complement = HermitianOperator::identity(a.dims().to_vec()).add_scaled(-1.0, a)?;
    let channel = MeasurePrepareChannel::new(
        a.dims().to_vec(),
        sigma_p.dims().to_vec(),
        vec![Branch { effect: a.clone(), prep: sigma_p.clone() }, Branch { effect: complement, prep: kappa_pp }],
    )?;
    Ok(Lemma1Channel { channel, accept, b, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::verify::verify_gibbs_preserving;
    use crate::divergences::{neyman_pearson_test, renyi_inf};
    use crate::qops::random::random_state;
    use crate::qops::trace_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_pairs_give_a_constant_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_state(&mut rng, 3);
        let t = random_state(&mut rng, 3);
        let test = neyman_pearson_test(&s, &random_state(&mut rng, 3), 0.2).unwrap();
        let l = lemma1_build(&s, &s, &t, &t, &test, &Tolerances::DEFAULT).unwrap();
        for b in l.channel.branches() {
            assert!(trace_distance(&b.prep, &t).unwrap() < 1e-12);
        }
    }

    #[test]
    fn random_feasible_instances() {
        let tol = Tolerances::DEFAULT;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut built = 0;
        for _ in 0..40 {
            let s = random_state(&mut rng, 2);
            let k = random_state(&mut rng, 2);
            let kp = random_state(&mut rng, 2);
            // σ' close to κ' keeps S_∞(σ'‖κ') small enough to be feasible.
            let sp = kp.mix(0.2, &random_state(&mut rng, 2)).unwrap();
            let test = neyman_pearson_test(&s, &k, 0.1).unwrap();
            if test.divergence < renyi_inf(&sp, &kp).unwrap().value {
                assert!(lemma1_build(&s, &k, &sp, &kp, &test, &tol).is_err());
                continue;
            }
            let l = lemma1_build(&s, &k, &sp, &kp, &test, &tol).unwrap();
            let r = verify_gibbs_preserving(&l.channel, &k, &kp, &tol);
            assert!(r.passed, "{}", r.render());
            let out = l.channel.apply(&s).unwrap();
            assert!(trace_distance(&out, &sp).unwrap() <= 1.0 - l.accept + 1e-12);
            built += 1;
        }
        assert!(built > 5);
    }
}
