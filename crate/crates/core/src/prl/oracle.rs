//! Brute-force perturbed risk levels for small discrete ambiguity sets.
//!
//! Nothing here uses the two-outcome reduction. Ball members are enumerated
//! on the simplex grid {w : w_i = n_i/S, Σ n_i = S}, ball membership uses the
//! full k-atom divergence, and every one of the 2^k events is checked.
//!
//! A fixed k-atom nominal only has 2^k event probabilities, so its PRL is a
//! step function of the nominal level. To resolve α on a fine grid the
//! oracle instead scans nominals of the form "atom 0 has mass α, the other
//! atoms share 1 − α in the proportions of the given nominal".

use serde::{Deserialize, Serialize};

use super::AmbiguitySet;
use crate::discrepancy::{divergence_discrete, DiscrepancyKind};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::par;

/// Slack on probability comparisons, absorbing rounding in event sums.
const PROB_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    /// Simplex grid denominator S.
    pub simplex_steps: usize,
    /// Spacing of the α grid.
    pub alpha_step: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { simplex_steps: 2000, alpha_step: 1e-3 }
    }
}

impl OracleOptions {
    /// Defaults scaled to the atom count so each enumeration stays near 2·10⁶ members.
    pub fn for_atoms(k: usize) -> Self {
        let simplex_steps = match k {
            0..=2 => 2_000_000,
            3 => 2000,
            _ => 220,
        };
        Self { simplex_steps, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub eps_hat: f64,
    /// Spacing of the α grid the answer was taken from.
    pub resolution: f64,
    /// Ball members enumerated at the final admissible α.
    pub members_in_ball: usize,
}

/// Largest α on the grid {0, δ, 2δ, …} ∪ {ε} such that every enumerated
/// ball member gives every event of nominal mass ≤ α probability ≤ ε.
pub fn prl_bruteforce_oracle(set: &AmbiguitySet, eps: f64, opts: OracleOptions) -> Result<OracleReport> {
    let weights = nominal_weights(set)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("risk level must lie in [0, 1], got {eps}")));
    }
    if opts.simplex_steps == 0 || !(opts.alpha_step > 0.0) {
        return Err(Error::invalid("oracle needs simplex_steps >= 1 and alpha_step > 0"));
    }
    let rest: f64 = weights[1..].iter().sum();
    let proportions: Vec<f64> = if rest > 0.0 {
        weights[1..].iter().map(|w| w / rest).collect()
    } else {
        vec![1.0 / (weights.len() - 1) as f64; weights.len() - 1]
    };
    let n_steps = (eps / opts.alpha_step).floor() as usize;
    let mut alphas: Vec<f64> = (0..=n_steps).map(|j| j as f64 * opts.alpha_step).filter(|&a| a < eps).collect();
    alphas.push(eps);

    let nominal_at = |alpha: f64| -> Vec<f64> {
        let mut q = Vec::with_capacity(weights.len());
        q.push(alpha);
        q.extend(proportions.iter().map(|p| (1.0 - alpha) * p));
        q
    };
    let scan = |alpha: f64| scan_ball(set.kind, set.radius, &nominal_at(alpha), alpha, eps, opts.simplex_steps);

    // Admissibility is monotone in α: bisect for the last admissible index.
    let first = scan(alphas[0]);
    if first.violations > 0 {
        return Ok(OracleReport { eps_hat: 0.0, resolution: opts.alpha_step, members_in_ball: first.in_ball });
    }
    let last = alphas.len() - 1;
    let top = scan(alphas[last]);
    if top.violations == 0 {
        return Ok(OracleReport { eps_hat: alphas[last], resolution: opts.alpha_step, members_in_ball: top.in_ball });
    }
    let (mut lo, mut hi, mut lo_scan) = (0usize, last, first);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let s = scan(alphas[mid]);
        if s.violations == 0 {
            lo = mid;
            lo_scan = s;
        } else {
            hi = mid;
        }
    }
    Ok(OracleReport { eps_hat: alphas[lo], resolution: opts.alpha_step, members_in_ball: lo_scan.in_ball })
}

/// Number of (member, event) pairs that break the PRL implication for the
/// set's own nominal: enumerated members of the ball giving probability
/// above `eps` to an event of nominal mass ≤ `eps_hat`.
pub fn soundness_violations(set: &AmbiguitySet, eps: f64, eps_hat: f64, simplex_steps: usize) -> Result<usize> {
    let weights = nominal_weights(set)?;
    Ok(scan_ball(set.kind, set.radius, &weights, eps_hat, eps, simplex_steps).violations)
}

fn nominal_weights(set: &AmbiguitySet) -> Result<Vec<f64>> {
    match &set.nominal {
        Distribution::Discrete(d) if (2..=4).contains(&d.len()) => Ok(d.weights.clone()),
        Distribution::Discrete(d) => Err(Error::invalid(format!("oracle supports 2 to 4 atoms, got {}", d.len()))),
        _ => Err(Error::invalid("oracle needs a discrete nominal")),
    }
}

#[derive(Debug, Clone, Copy)]
struct Scan {
    in_ball: usize,
    violations: usize,
}

fn scan_ball(kind: DiscrepancyKind, m: f64, q: &[f64], level: f64, eps: f64, s: usize) -> Scan {
    let k = q.len();
    // Events whose nominal mass is at most `level`, as bit masks.
    let events: Vec<usize> = (1..(1usize << k))
        .filter(|&mask| event_mass(q, mask) <= level + PROB_SLACK)
        .collect();
    let parts = par::map_range(s + 1, |n0| {
        let mut scan = Scan { in_ball: 0, violations: 0 };
        let mut counts = vec![0usize; k];
        counts[0] = n0;
        let mut w = vec![0.0; k];
        enumerate_rest(&mut counts, 1, s - n0, &mut |counts| {
            for (wi, &c) in w.iter_mut().zip(counts.iter()) {
                *wi = c as f64 / s as f64;
            }
            if divergence_discrete(kind, &w, q) <= m {
                scan.in_ball += 1;
                scan.violations += events.iter().filter(|&&e| event_mass(&w, e) > eps + PROB_SLACK).count();
            }
        });
        scan
    });
    parts.into_iter().fold(Scan { in_ball: 0, violations: 0 }, |a, b| Scan {
        in_ball: a.in_ball + b.in_ball,
        violations: a.violations + b.violations,
    })
}

fn enumerate_rest(counts: &mut [usize], i: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
    if i + 1 == counts.len() {
        counts[i] = left;
        visit(counts);
        return;
    }
    for c in 0..=left {
        counts[i] = c;
        enumerate_rest(counts, i + 1, left - c, visit);
    }
}

fn event_mass(w: &[f64], mask: usize) -> f64 {
    w.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| x).sum()
}
