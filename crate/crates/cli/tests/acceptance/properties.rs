//! Module invariants checked on random inputs with a fixed-seed proptest runner.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use drcc_core::discrepancy::DiscrepancyKind;
use drcc_core::distributions::{Distribution, Gaussian1, RingUniform, UniformBox};
use drcc_core::par;
use drcc_core::prl::{log_spaced, prl, prl_curve, worst_case_prob};
use drcc_core::rmpc::{run_experiment, RmpcExperiment};
use drcc_core::scenario::{self, ScenarioParams};

type Check = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[6; 32]))
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn kind() -> impl Strategy<Value = DiscrepancyKind> {
    prop::sample::select(DiscrepancyKind::ALL.to_vec())
}

fn prl_monotone_and_bounded() -> Check {
    run(256, (kind(), 0.0f64..1.0, 1e-4f64..1.0, 1e-4f64..1.0), |(k, r, e1, e2)| {
        let m = k.zero_radius() + r;
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = prl(k, m, lo).unwrap().eps_hat;
        let b = prl(k, m, hi).unwrap().eps_hat;
        prop_assert!(a <= b, "{k}: prl({lo}) = {a} > prl({hi}) = {b}");
        prop_assert!((0.0..=hi).contains(&b));
        Ok(())
    })
}

fn prl_shrinks_with_radius() -> Check {
    run(256, (kind(), 0.0f64..1.0, 0.0f64..1.0, 1e-4f64..1.0), |(k, r1, r2, eps)| {
        let (small, large) = (k.zero_radius() + r1.min(r2), k.zero_radius() + r1.max(r2));
        prop_assert!(prl(k, large, eps).unwrap().eps_hat <= prl(k, small, eps).unwrap().eps_hat);
        Ok(())
    })
}

fn prl_is_sound() -> Check {
    run(256, (kind(), 0.0f64..1.0, 1e-4f64..1.0), |(k, r, eps)| {
        let m = k.zero_radius() + r;
        let level = prl(k, m, eps).unwrap().eps_hat;
        if level > 0.0 {
            let worst = worst_case_prob(k, m, level);
            prop_assert!(worst <= eps * (1.0 + 1e-12) + 1e-15, "{k}: worst {worst} > eps {eps}");
        } else {
            // Saturated: events of vanishing nominal mass already reach ε.
            prop_assert!(worst_case_prob(k, m, 0.0) >= eps * (1.0 - 1e-9), "{k}: prl 0 but unsaturated");
        }
        // Maximal: a slightly larger nominal level breaks ε.
        let above = level * (1.0 + 1e-6) + 1e-12;
        if above < eps {
            prop_assert!(worst_case_prob(k, m, above) > eps, "{k}: prl {level} not maximal at eps {eps}");
        }
        Ok(())
    })
}

fn scenario_bound_monotone() -> Check {
    run(128, (10u64..3000, 1u64..6, 0.0f64..0.2, 0.0f64..0.2), |(n, d, e1, e2)| {
        let p = ScenarioParams::new(n, d).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (a, b) = (scenario::two_level_nominal(p, lo).unwrap(), scenario::two_level_nominal(p, hi).unwrap());
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b <= a + 1e-15);
        Ok(())
    })
}

/// d/dε (1 − F_N(ε)) is the beta density and d/dε (1 − F_N(ε/M)) the robust one.
fn densities_match_cdfs() -> Check {
    run(128, (50u64..2000, 1u64..4, 0.05f64..0.95, 1.0f64..5.0), |(n, d, u, m)| {
        let p = ScenarioParams::new(n, d).unwrap();
        // Place ε where the density is not negligible: around the mean d/(N+1).
        let eps = (u * 4.0 * d as f64 / n as f64).min(0.9);
        let h = 1e-6 * eps.max(1e-3);
        let fd = |f: &dyn Fn(f64) -> f64| (f(eps + h) - f(eps - h)) / (2.0 * h);
        let nominal = fd(&|e| 1.0 - scenario::two_level_nominal(p, e).unwrap());
        let density = scenario::beta_density_nominal(p, eps).unwrap();
        prop_assert!((nominal - density).abs() <= 1e-5 * density.max(1.0), "nominal {nominal} vs {density}");
        let robust = fd(&|e| 1.0 - scenario::two_level_dr(p, DiscrepancyKind::Rvd, m, e).unwrap());
        let density = scenario::dr_density_rvd(p, m, eps).unwrap();
        prop_assert!((robust - density).abs() <= 1e-5 * density.max(1.0), "robust {robust} vs {density}");
        Ok(())
    })
}

fn gaussian_pdf_is_cdf_derivative() -> Check {
    run(256, (-3.0f64..3.0, 0.2f64..3.0, -5.0f64..5.0), |(mu, sigma, x)| {
        let g = Gaussian1::new(mu, sigma).unwrap();
        let h = 1e-5 * sigma;
        let fd = (g.cdf(x + h) - g.cdf(x - h)) / (2.0 * h);
        prop_assert!((fd - g.pdf(x)).abs() <= 1e-7, "{fd} vs {}", g.pdf(x));
        Ok(())
    })
}

fn samples_stay_in_support() -> Check {
    let ring: Distribution = RingUniform::new(0.1, 0.2, 2).unwrap().into();
    let boxed: Distribution = UniformBox::symmetric(0.2, 2).unwrap().into();
    run(64, any::<u64>(), |seed| {
        for w in ring.sample(seed, 200) {
            prop_assert_eq!(ring.density(&w).unwrap(), 25.0);
            prop_assert!(boxed.support_contains(&w).unwrap());
        }
        prop_assert_eq!(ring.sample(seed, 5), ring.sample(seed, 5));
        Ok(())
    })
}

fn parallel_matches_sequential() -> Check {
    run(16, (kind(), 0.0f64..1.0), |(k, r)| {
        let grid = log_spaced(1e-4, 0.9, 64);
        let m = k.zero_radius() + r;
        let a = prl_curve(k, m, &grid).unwrap();
        let b = par::sequential(|| prl_curve(k, m, &grid).unwrap());
        prop_assert_eq!(a, b);
        Ok(())
    })?;
    run(4, any::<u64>(), |seed| {
        let exp = RmpcExperiment { n_trials: 4, n_eval: 500, n_scenarios: 100, seed, ..RmpcExperiment::default() };
        let a = run_experiment(&exp).unwrap();
        let b = par::sequential(|| run_experiment(&exp).unwrap());
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("prl monotone in eps and below eps", prl_monotone_and_bounded()),
        ("prl non-increasing in radius", prl_shrinks_with_radius()),
        ("prl is the largest sound level", prl_is_sound()),
        ("two-level bound monotone, in [0,1]", scenario_bound_monotone()),
        ("scenario densities are CDF derivatives", densities_match_cdfs()),
        ("Gaussian pdf is the CDF derivative", gaussian_pdf_is_cdf_derivative()),
        ("samples stay in support, seeded", samples_stay_in_support()),
        ("parallel equals sequential", parallel_matches_sequential()),
    ]
}
