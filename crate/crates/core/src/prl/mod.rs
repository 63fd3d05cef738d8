//! Perturbed risk levels.
//!
//! For an ambiguity set A = {P : ρ(P, P̂) ≤ M}, the perturbed risk level
//! ε̂_A(ε) is the largest nominal risk level α such that every event with
//! ℙ_P̂(E) ≤ α has ℙ_P(E) ≤ ε for all P ∈ A.
//!
//! For φ-divergences the worst case over A of ℙ_P(E) only depends on
//! ℙ_P̂(E) through the divergence between two Bernoulli laws (merging outcomes
//! never increases a φ-divergence, and the Bernoulli pair itself is attained).
//! [`worst_case_prob`] solves that two-outcome problem and [`prl`] inverts it.
//! The reduction is checked against direct enumeration in [`oracle`].

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::discrepancy::{self, DiscrepancyKind};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::par;

pub use oracle::{soundness_violations, prl_bruteforce_oracle, OracleOptions, OracleReport};

/// Iteration cap shared by every bisection in this module.
pub const MAX_BISECTIONS: usize = 200;

/// A ball of radius `radius` around `nominal` under `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiguitySet {
    pub kind: DiscrepancyKind,
    pub radius: f64,
    pub nominal: Distribution,
}

impl AmbiguitySet {
    pub fn new(kind: DiscrepancyKind, radius: f64, nominal: Distribution) -> Result<Self> {
        kind.validate_radius(radius)?;
        nominal.validate()?;
        Ok(Self { kind, radius, nominal })
    }

    pub fn prl(&self, eps: f64) -> Result<PrlResult> {
        prl(self.kind, self.radius, eps)
    }

    /// ρ(P, P̂), closed form where one exists and by trapezoid otherwise.
    pub fn distance(&self, p: &Distribution) -> Result<f64> {
        if let (Distribution::Gaussian1(a), Distribution::Gaussian1(b)) = (p, &self.nominal) {
            match discrepancy::divergence_gaussian_1d(self.kind, a, b) {
                Err(Error::Unsupported(_)) => {}
                other => return other,
            }
        }
        if let (Distribution::GaussianNd(a), Distribution::GaussianNd(b)) = (p, &self.nominal) {
            if self.kind == DiscrepancyKind::Rvd {
                return discrepancy::rvd_gaussian_nd(a, b);
            }
        }
        discrepancy::divergence_numeric_default(self.kind, p, &self.nominal)
    }

    /// Whether `p` lies in the ball. Distributions at infinite RVD are outside.
    pub fn contains(&self, p: &Distribution) -> Result<bool> {
        match self.distance(p) {
            Ok(d) => Ok(d <= self.radius),
            Err(Error::DominanceViolation(_)) | Err(Error::SupportViolation { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrlResult {
    pub eps: f64,
    pub eps_hat: f64,
    pub kind: DiscrepancyKind,
    pub radius: f64,
}

impl PrlResult {
    /// ε̂/ε, or 0 at ε = 0.
    pub fn ratio(&self) -> f64 {
        if self.eps > 0.0 {
            self.eps_hat / self.eps
        } else {
            0.0
        }
    }
}

/// Divergence between Bernoulli(`beta`) (the member) and Bernoulli(`alpha`)
/// (the nominal), with 0·ln 0 = 0 and x/0 = ∞ for x > 0.
pub fn binary_divergence(kind: DiscrepancyKind, beta: f64, alpha: f64) -> f64 {
    discrepancy::divergence_discrete(kind, &[beta, 1.0 - beta], &[alpha, 1.0 - alpha])
}

/// Largest probability a member of the (kind, M) ball can give an event that
/// has nominal probability `alpha`.
pub fn worst_case_prob(kind: DiscrepancyKind, m: f64, alpha: f64) -> f64 {
    let alpha = alpha.clamp(0.0, 1.0);
    if alpha >= 1.0 {
        return 1.0;
    }
    if m <= kind.zero_radius() {
        return alpha;
    }
    match kind {
        DiscrepancyKind::Rvd => (m * alpha).min(1.0),
        DiscrepancyKind::TotalVariation => (alpha + m).min(1.0),
        _ => {
            if binary_divergence(kind, 1.0, alpha) <= m {
                return 1.0;
            }
            // d(·, α) increases on [α, 1]; keep d(lo) ≤ M < d(hi).
            let (mut lo, mut hi) = (alpha, 1.0);
            for _ in 0..MAX_BISECTIONS {
                if converged(lo, hi) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if binary_divergence(kind, mid, alpha) <= m {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // Upper endpoint: over-estimating the worst case is the safe side.
            // An infinite divergence there means nothing above `lo` is reachable.
            if binary_divergence(kind, hi, alpha).is_infinite() {
                lo
            } else {
                hi
            }
        }
    }
}

fn converged(lo: f64, hi: f64) -> bool {
    hi - lo <= 4.0 * f64::EPSILON * hi.abs()
}

/// Perturbed risk level ε̂ for the (kind, M) ball at risk level `eps`.
///
/// RVD: ε̂ = ε/M. Total variation: ε̂ = max(ε − M, 0). Other kinds: the
/// largest α ≤ ε with d(ε, α) ≥ M, which is exactly the largest α with
/// `worst_case_prob(kind, M, α) ≤ ε`. Bisection keeps the admissible
/// endpoint, so the result never exceeds the true level.
pub fn prl(kind: DiscrepancyKind, m: f64, eps: f64) -> Result<PrlResult> {
    kind.validate_radius(m)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("risk level must lie in [0, 1], got {eps}")));
    }
    let eps_hat = prl_value(kind, m, eps);
    Ok(PrlResult { eps, eps_hat, kind, radius: m })
}

fn prl_value(kind: DiscrepancyKind, m: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    if eps >= 1.0 || m <= kind.zero_radius() {
        return eps;
    }
    match kind {
        DiscrepancyKind::Rvd => eps / m,
        DiscrepancyKind::TotalVariation => (eps - m).max(0.0),
        _ => {
            if binary_divergence(kind, eps, 0.0) < m {
                // Even α → 0⁺ lets some member reach probability above ε.
                return 0.0;
            }
            let (mut lo, mut hi) = (0.0, eps);
            for _ in 0..MAX_BISECTIONS {
                if converged(lo, hi) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if binary_divergence(kind, eps, mid) >= m {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    }
}

/// Pointwise [`prl`] over `eps_grid`, in grid order.
pub fn prl_curve(kind: DiscrepancyKind, m: f64, eps_grid: &[f64]) -> Result<Vec<PrlResult>> {
    kind.validate_radius(m)?;
    if let Some(&bad) = eps_grid.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(Error::invalid(format!("curve grid values must lie in (0, 1], got {bad}")));
    }
    par::map_slice(eps_grid, |&e| prl(kind, m, e)).into_iter().collect()
}

/// `n` log-spaced points from `lo` to `hi`, both included.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == n => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use DiscrepancyKind::*;

    const PHI: [DiscrepancyKind; 5] = [KullbackLeibler, Hellinger, ChiSquared, ChiSquaredMemberWeighted, TotalVariation];

    #[test]
    fn worst_case_examples() {
        assert_relative_eq!(worst_case_prob(Rvd, 4.0, 0.1), 0.4, max_relative = 1e-15);
        for kind in PHI {
            assert_eq!(worst_case_prob(kind, 0.0, 0.3), 0.3);
        }
        assert_eq!(worst_case_prob(Rvd, 1.0, 0.3), 0.3);
        assert!(worst_case_prob(KullbackLeibler, 0.19, 0.0049) > 0.01);
        assert_eq!(worst_case_prob(KullbackLeibler, 0.19, 0.0), 0.0);
        assert_eq!(worst_case_prob(Rvd, 3.0, 0.0), 0.0);
        assert_eq!(worst_case_prob(ChiSquared, 0.5, 0.0), 0.0);
        let m = 0.2f64;
        assert_relative_eq!(
            worst_case_prob(Hellinger, m, 0.0),
            1.0 - (1.0 - m * m).powi(2),
            max_relative = 1e-14
        );
        assert_relative_eq!(worst_case_prob(TotalVariation, 0.24, 0.0), 0.24);
        for kind in DiscrepancyKind::ALL {
            assert_eq!(worst_case_prob(kind, kind.zero_radius() + 0.5, 1.0), 1.0);
        }
    }

    #[test]
    fn worst_case_sits_on_the_ball_boundary() {
        for kind in [KullbackLeibler, Hellinger, ChiSquared, ChiSquaredMemberWeighted] {
            for &(m, a) in &[(0.19, 0.0049), (0.05, 0.2), (0.3, 0.6)] {
                let b = worst_case_prob(kind, m, a);
                if b < 1.0 {
                    assert_relative_eq!(binary_divergence(kind, b, a), m, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn table_prl_values() {
        let r = prl(Rvd, 2.05, 0.01).unwrap();
        assert_relative_eq!(r.eps_hat, 0.01 / 2.05, max_relative = 1e-15);
        assert!((prl(ChiSquared, 0.36, 0.01).unwrap().eps_hat - 0.0003).abs() < 5e-4);
        assert!(prl(KullbackLeibler, 0.19, 0.01).unwrap().eps_hat < 5e-4);
        assert_eq!(prl(Hellinger, 0.23, 0.01).unwrap().eps_hat, 0.0);
        assert_eq!(prl(TotalVariation, 0.24, 0.01).unwrap().eps_hat, 0.0);
    }

    #[test]
    fn prl_inverts_worst_case() {
        for kind in [KullbackLeibler, Hellinger, ChiSquared, ChiSquaredMemberWeighted] {
            for &(m, eps) in &[(0.19, 0.35), (0.05, 0.1), (0.36, 0.5), (0.5, 0.9)] {
                let a = prl(kind, m, eps).unwrap().eps_hat;
                if a > 0.0 {
                    assert!(worst_case_prob(kind, m, a) <= eps * (1.0 + 1e-12), "{kind} {m} {eps}");
                    let above = a * (1.0 + 1e-9) + 1e-15;
                    assert!(worst_case_prob(kind, m, above) > eps, "{kind} {m} {eps}");
                }
            }
        }
    }

    #[test]
    fn degenerate_levels() {
        for kind in DiscrepancyKind::ALL {
            let m = kind.zero_radius() + 0.3;
            assert_eq!(prl(kind, m, 0.0).unwrap().eps_hat, 0.0);
            assert_eq!(prl(kind, m, 1.0).unwrap().eps_hat, 1.0);
            assert_eq!(prl(kind, kind.zero_radius(), 0.4).unwrap().eps_hat, 0.4);
        }
        assert!(prl(Rvd, 0.5, 0.1).is_err());
        assert!(prl(KullbackLeibler, -0.1, 0.1).is_err());
        assert!(prl(KullbackLeibler, 0.1, 1.5).is_err());
    }

    #[test]
    fn curve_shapes() {
        let grid = log_spaced(1e-4, 0.9, 60);
        assert_eq!(grid[0], 1e-4);
        assert_eq!(grid[59], 0.9);
        let rvd = prl_curve(Rvd, 2.05, &grid).unwrap();
        for r in &rvd {
            assert!((r.ratio() - 1.0 / 2.05).abs() < 1e-12);
        }
        let chi = prl_curve(ChiSquared, 0.36, &[0.01, 0.5]).unwrap();
        assert!(chi[1].ratio() > chi[0].ratio());
        for kind in DiscrepancyKind::ALL {
            for r in prl_curve(kind, kind.zero_radius() + 0.2, &grid).unwrap() {
                assert!(r.eps_hat <= r.eps);
            }
        }
        assert!(prl_curve(Rvd, 2.0, &[0.0]).is_err());
    }

    #[test]
    fn ambiguity_set_membership() {
        use crate::distributions::{Gaussian1, RingUniform, UniformBox};
        let nominal: Distribution = Gaussian1::new(0.0, 2.0).unwrap().into();
        let set = AmbiguitySet::new(Rvd, 2.1, nominal.clone()).unwrap();
        assert!(set.contains(&Gaussian1::new(0.5, 1.0).unwrap().into()).unwrap());
        assert!(!set.contains(&Gaussian1::new(0.0, 3.0).unwrap().into()).unwrap());
        let kl = AmbiguitySet::new(KullbackLeibler, 0.5, nominal).unwrap();
        assert_relative_eq!(
            kl.distance(&Gaussian1::new(0.0, 2.0).unwrap().into()).unwrap(),
            0.0
        );
        let boxed = AmbiguitySet::new(Rvd, 4.0, UniformBox::symmetric(0.2, 2).unwrap().into()).unwrap();
        assert!(boxed.contains(&RingUniform::new(0.1, 0.2, 2).unwrap().into()).unwrap());
        assert!(AmbiguitySet::new(Rvd, 0.9, boxed.nominal.clone()).is_err());
    }
}
