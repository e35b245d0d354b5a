use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use catalyq::catalyst::{build_catalyst, correlation_bound, equality_case_shift};
use catalyq::channel::lemma1_build;
use catalyq::divergences::smoothing::truncate_and_fill;
use catalyq::divergences::{hypothesis_testing_divergence, kl_divergence, neyman_pearson_test, renyi_inf};
use catalyq::qops::json::{state_from_str, to_string};
use catalyq::qops::random::random_state;
use catalyq::qops::{tensor_power, trace_distance, DensityOperator, Operator};
use catalyq::Tolerances;

fn state(seed: u64, d: usize) -> DensityOperator {
    random_state(&mut ChaCha8Rng::seed_from_u64(seed), d)
}

fn pair(seed: u64, d: usize) -> (DensityOperator, DensityOperator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_state(&mut rng, d), random_state(&mut rng, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_state(&mut rng, d), random_state(&mut rng, d), random_state(&mut rng, d));
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn divergences_are_ordered(seed in any::<u64>(), d in 2usize..5, eps in 0.01f64..0.5) {
        let (rho, sigma) = pair(seed, d);
        let s1 = kl_divergence(&rho, &sigma).unwrap().value;
        let sinf = renyi_inf(&rho, &sigma).unwrap().value;
        let sh = hypothesis_testing_divergence(&rho, &sigma, eps).unwrap();
        prop_assert!(s1 >= -1e-12);
        prop_assert!(s1 <= sinf + 1e-9);
        // S_H^{1-ε} ≤ (S₁ + h(ε))/(1-ε).
        let h = -eps * eps.ln() - (1.0 - eps) * (1.0 - eps).ln();
        prop_assert!(sh <= (s1 + h) / (1.0 - eps) + 1e-9);
        prop_assert!(kl_divergence(&rho, &rho).unwrap().value.abs() < 1e-10);
    }

    #[test]
    fn hypothesis_divergence_grows_with_eps(seed in any::<u64>(), e1 in 0.01f64..0.3, de in 0.0f64..0.3) {
        let (rho, sigma) = pair(seed, 2);
        let a = hypothesis_testing_divergence(&rho, &sigma, e1).unwrap();
        let b = hypothesis_testing_divergence(&rho, &sigma, e1 + de).unwrap();
        prop_assert!(b >= a - 1e-9);
    }

    #[test]
    fn optimal_test_meets_its_type_one_error(seed in any::<u64>(), d in 2usize..5, eps in 0.01f64..0.5) {
        let (rho, sigma) = pair(seed, d);
        let t = neyman_pearson_test(&rho, &sigma, eps).unwrap();
        prop_assert!((t.alpha - eps).abs() < 1e-9 || t.alpha < eps);
        prop_assert!((1.0 - rho.expectation(t.effect.matrix()) - t.alpha).abs() < 1e-9);
        prop_assert!((sigma.expectation(t.effect.matrix()) - t.beta_val).abs() < 1e-9);
    }

    #[test]
    fn lemma1_output_obeys_the_mixture_bound(seed in any::<u64>(), d in 2usize..4, eps in 0.01f64..0.3, s in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sigma, kappa, kappa_p) = (random_state(&mut rng, d), random_state(&mut rng, d), random_state(&mut rng, d));
        let sigma_p = kappa_p.mix(s, &random_state(&mut rng, d)).unwrap();
        let test = neyman_pearson_test(&sigma, &kappa, eps).unwrap();
        prop_assume!(test.divergence >= renyi_inf(&sigma_p, &kappa_p).unwrap().value);
        let l = lemma1_build(&sigma, &kappa, &sigma_p, &kappa_p, &test, &Tolerances::DEFAULT).unwrap();
        let out = trace_distance(&l.channel.apply(&sigma).unwrap(), &sigma_p).unwrap();
        prop_assert!(out <= 1.0 - l.accept + 1e-12);
        prop_assert!(trace_distance(&l.channel.apply(&kappa).unwrap(), &kappa_p).unwrap() < 1e-9);
    }

    #[test]
    fn truncation_keeps_mass_and_stays_close(
        gammas in prop::collection::vec(0.01f64..20.0, 1..12),
        raw in prop::collection::vec(0.01f64..1.0, 12),
        eps in 0.0f64..0.5,
    ) {
        let total: f64 = raw.iter().take(gammas.len()).sum();
        let weights: Vec<f64> = raw.iter().take(gammas.len()).map(|w| w / total).collect();
        // Normalize Σ w γ = 1 as for a state whitened against κ.
        let mass: f64 = gammas.iter().zip(&weights).map(|(g, w)| g * w).sum();
        let gammas: Vec<f64> = gammas.iter().map(|g| g / mass).collect();
        let (lam, f) = truncate_and_fill(&gammas, &weights, eps);
        let new_mass: f64 = f.iter().zip(&weights).map(|(x, w)| x * w).sum();
        prop_assert!((new_mass - 1.0).abs() < 1e-9);
        prop_assert!(f.iter().all(|&x| x <= lam + 1e-9 && x >= -1e-12));
        let moved: f64 = f.iter().zip(&gammas).zip(&weights).map(|((a, b), w)| w * (a - b).abs()).sum();
        prop_assert!(moved <= 2.0 * eps + 1e-9);
    }

    #[test]
    fn correlation_bound_is_monotone(e1 in 0.001f64..0.2, de in 0.0f64..0.2, d in 2usize..6) {
        let a = correlation_bound(e1, d).unwrap();
        let b = correlation_bound(e1 + de, d).unwrap();
        prop_assert!(a.general >= 0.0 && a.general <= b.general + 1e-15);
        prop_assert_eq!(a.two_level.is_some(), d == 2);
    }

    #[test]
    fn equality_shift_lowers_the_divergence(seed in any::<u64>(), eps in 0.001f64..0.5) {
        let (rho_p, eta_p) = pair(seed, 2);
        let shifted = equality_case_shift(&rho_p, &eta_p, eps).unwrap();
        prop_assert!(trace_distance(&shifted, &rho_p).unwrap() <= eps / 2.0 + 1e-12);
        let before = kl_divergence(&rho_p, &eta_p).unwrap().value;
        let after = kl_divergence(&shifted, &eta_p).unwrap().value;
        prop_assert!(after < before);
    }

    #[test]
    fn catalyst_label_is_uniform(seed in any::<u64>(), n in 1usize..5) {
        let (rho, target) = pair(seed, 2);
        let xi = tensor_power(&target, n).unwrap();
        let c = build_catalyst(&rho, &xi, n, 4096).unwrap();
        prop_assert_eq!(c.labels.weights.len(), n);
        prop_assert!(c.labels.weights.iter().all(|&w| (w - 1.0 / n as f64).abs() < 1e-15));
    }

    #[test]
    fn json_round_trip_within_1e12(seed in any::<u64>(), d in 1usize..5) {
        let s = state(seed, d);
        let back = state_from_str(&to_string(&s), &Tolerances::DEFAULT).unwrap();
        prop_assert_eq!(back.dims(), s.dims());
        prop_assert!(back.matrix().iter().zip(s.matrix().iter()).all(|(a, b)| (a - b).norm() <= 1e-12));
    }
}
