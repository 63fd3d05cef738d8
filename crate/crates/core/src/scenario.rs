//! Scenario-approach guarantees, nominal and distributionally robust.
//!
//! With N i.i.d. scenarios and at most d support constraints, the violation
//! probability V of the scenario solution satisfies
//! ℙ{V > ε} ≤ F_N(ε) = Σ_{i<d} C(N,i) εⁱ (1−ε)^{N−i}. When scenarios come from
//! a nominal P̂ but the constraint is judged under any P in an ambiguity set,
//! the same bound holds at the perturbed risk level: ℙ{V_P > ε} ≤ F_N(ε̂(ε)).

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::discrepancy::DiscrepancyKind;
use crate::error::{Error, Result};
use crate::prl::{prl, worst_case_prob};
use crate::quadrature::{adaptive_simpson_pieces, Quadrature};
use crate::special::{self, ln_bernoulli_power, ln_choose};

/// Absolute tolerance of the expected-violation quadratures.
pub const EXPECTED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    /// Number of scenarios N.
    pub n_samples: u64,
    /// Upper bound d on the number of support constraints.
    pub support_dim: u64,
}

impl ScenarioParams {
    pub fn new(n_samples: u64, support_dim: u64) -> Result<Self> {
        if n_samples == 0 || support_dim == 0 || support_dim > n_samples {
            return Err(Error::invalid(format!(
                "scenario bounds need 1 <= d <= N, got N={n_samples} d={support_dim}"
            )));
        }
        Ok(Self { n_samples, support_dim })
    }

    /// d = horizon · number of inputs, the support bound of an MPC program
    /// whose decision is one input correction per step.
    pub fn for_mpc(n_samples: u64, horizon: u64, n_inputs: u64) -> Result<Self> {
        Self::new(n_samples, horizon * n_inputs)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("risk level must lie in [0, 1], got {eps}")));
    }
    Ok(())
}

/// Binomial pmf `C(N,l) αˡ (1−α)^{N−l}`, in log space.
pub fn binom_pmf(n: u64, l: u64, alpha: f64) -> f64 {
    special::binom_pmf(n, l, alpha)
}

/// F_N(ε) = Σ_{i=0}^{d−1} binom_pmf(N, i, ε).
pub fn two_level_nominal(p: ScenarioParams, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(binomial_lower_tail(p.n_samples, p.support_dim, eps))
}

fn binomial_lower_tail(n: u64, d: u64, eps: f64) -> f64 {
    let mut ln_c = 0.0;
    let mut sum = 0.0;
    for i in 0..d {
        if i > 0 {
            ln_c += ((n - i + 1) as f64 / i as f64).ln();
        }
        sum += (ln_c + ln_bernoulli_power(n, i, eps)).exp();
    }
    sum.min(1.0)
}

/// F_N(ε) through the regularized incomplete beta, I_{1−ε}(N−d+1, d).
pub fn two_level_nominal_beta(p: ScenarioParams, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let (n, d) = (p.n_samples as f64, p.support_dim as f64);
    Ok(beta_reg(n - d + 1.0, d, 1.0 - eps))
}

/// F_N(ε̂(ε)): confidence bound for violation under any member of the (kind, M) ball.
pub fn two_level_dr(p: ScenarioParams, kind: DiscrepancyKind, m: f64, eps: f64) -> Result<f64> {
    let r = prl(kind, m, eps)?;
    two_level_nominal(p, r.eps_hat)
}

/// Density d·C(N,d)·ε^{d−1}(1−ε)^{N−d} of the beta law bounding V.
pub fn beta_density_nominal(p: ScenarioParams, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(beta_density(p, eps))
}

fn beta_density(p: ScenarioParams, eps: f64) -> f64 {
    let (n, d) = (p.n_samples, p.support_dim);
    ((d as f64).ln() + ln_choose(n, d) + ln_bernoulli_power(n - 1, d - 1, eps)).exp()
}

/// Density of the RVD-robust bound, `beta_density(ε/M)/M`. It carries mass
/// 1 − F_N(1/M) on [0, 1]; the remaining F_N(1/M) sits at ε = 1.
pub fn dr_density_rvd(p: ScenarioParams, m: f64, eps: f64) -> Result<f64> {
    DiscrepancyKind::Rvd.validate_radius(m)?;
    check_eps(eps)?;
    Ok(beta_density(p, eps / m) / m)
}

/// Expected violation probability bound d/(N+1).
pub fn expected_nominal(p: ScenarioParams) -> f64 {
    p.support_dim as f64 / (p.n_samples as f64 + 1.0)
}

/// Closed-form expected violation bound for an RVD ball:
/// Σ_{i=d}^{N} pmf(N,i,1/M)·d/(i+1) + Σ_{i<d} pmf(N,i,1/M).
pub fn expected_dr_rvd(p: ScenarioParams, m: f64) -> Result<f64> {
    DiscrepancyKind::Rvd.validate_radius(m)?;
    let (n, d) = (p.n_samples, p.support_dim);
    let row = special::binom_pmf_row(n, 1.0 / m);
    let mut value = 0.0;
    for (i, pmf) in row.iter().enumerate() {
        let i = i as u64;
        value += if i < d { *pmf } else { pmf * d as f64 / (i as f64 + 1.0) };
    }
    Ok(value.min(1.0))
}

/// Risk level below which ε̂ = 0, i.e. the worst-case probability of a
/// nominally impossible event. Zero for the RVD, KL and χ².
pub fn saturation_point(kind: DiscrepancyKind, m: f64) -> f64 {
    worst_case_prob(kind, m, 0.0)
}

/// Knots for integrals over ε ∈ [0, 1]: the saturation point, then a
/// geometric ladder toward it so the sharp head of the integrand is resolved.
fn knots(eps0: f64) -> Vec<f64> {
    let mut k = vec![0.0];
    if eps0 > 0.0 && eps0 < 1.0 {
        k.push(eps0);
    }
    let start = eps0.clamp(0.0, 1.0);
    if start < 1.0 {
        let mut ladder: Vec<f64> = (1..=30).map(|j| start + (1.0 - start) * 0.5f64.powi(j)).collect();
        ladder.reverse();
        k.extend(ladder.into_iter().filter(|&x| x > start));
    }
    k.push(1.0);
    k.dedup();
    k
}

/// Expected violation bound ∫₀¹ F_N(ε̂(ε)) dε by adaptive Simpson.
pub fn expected_dr_numeric(p: ScenarioParams, kind: DiscrepancyKind, m: f64) -> Result<f64> {
    Ok(expected_dr_quadrature(p, kind, m)?.value)
}

/// [`expected_dr_numeric`] with evaluation count and convergence flag.
pub fn expected_dr_quadrature(p: ScenarioParams, kind: DiscrepancyKind, m: f64) -> Result<Quadrature> {
    kind.validate_radius(m)?;
    let integrand = |eps: f64| {
        let a = prl(kind, m, eps.clamp(0.0, 1.0)).map(|r| r.eps_hat).unwrap_or(0.0);
        binomial_lower_tail(p.n_samples, p.support_dim, a)
    };
    let q = adaptive_simpson_pieces(integrand, &knots(saturation_point(kind, m)), EXPECTED_TOL)?;
    Ok(Quadrature { value: q.value.clamp(0.0, 1.0), ..q })
}

/// The expected RVD bound split as atom plus density: F_N(1/M) (the mass the
/// robust law leaves at ε = 1) plus ∫₀¹ ε·dr_density_rvd(ε) dε.
pub fn expected_dr_rvd_decomposed(p: ScenarioParams, m: f64) -> Result<f64> {
    DiscrepancyKind::Rvd.validate_radius(m)?;
    let atom = binomial_lower_tail(p.n_samples, p.support_dim, 1.0 / m);
    let q = adaptive_simpson_pieces(|e| e * beta_density(p, e / m) / m, &knots(0.0), EXPECTED_TOL)?;
    Ok(atom + q.value)
}

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz band for `n` samples at
/// the given confidence: sqrt(ln(2/(1−confidence)) / (2n)).
pub fn dkw_epsilon(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}
