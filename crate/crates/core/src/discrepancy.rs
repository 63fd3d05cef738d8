//! Discrepancy functionals ρ(P, P̂) between an ambiguous distribution P and
//! a nominal P̂.
//!
//! Conventions, with f = f_P and g = f_P̂:
//!
//! | kind                         | value                              |
//! |------------------------------|------------------------------------|
//! | [`DiscrepancyKind::Rvd`]     | sup f/g over the support of P̂      |
//! | `KullbackLeibler`            | ∫ f ln(f/g)                        |
//! | `Hellinger`                  | H with H² = ½ ∫ (√f − √g)²         |
//! | `ChiSquared`                 | ∫ (f − g)² / g                     |
//! | `ChiSquaredMemberWeighted`   | ∫ (f − g)² / f                     |
//! | `TotalVariation`             | ½ ∫ \|f − g\|                      |
//!
//! Gaussian pairs have closed forms for the RVD, KL and Hellinger. Every kind
//! can be integrated with the tensor-product trapezoidal rule on a uniform
//! [`Grid1`] per dimension. Densities are handled in log space throughout so
//! far tails neither underflow nor produce 0/0.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDist, Distribution, Gaussian1, GaussianNd};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyKind {
    Rvd,
    KullbackLeibler,
    Hellinger,
    ChiSquared,
    /// χ² with the ambiguous density in the denominator. Not one of the
    /// five headline kinds; available for direction comparisons.
    ChiSquaredMemberWeighted,
    TotalVariation,
}

impl DiscrepancyKind {
    /// The five kinds compared throughout, in table order.
    pub const ALL: [DiscrepancyKind; 5] = [
        DiscrepancyKind::Rvd,
        DiscrepancyKind::KullbackLeibler,
        DiscrepancyKind::Hellinger,
        DiscrepancyKind::ChiSquared,
        DiscrepancyKind::TotalVariation,
    ];

    pub fn is_phi_divergence(self) -> bool {
        self != DiscrepancyKind::Rvd
    }

    /// Radius of the singleton ambiguity set.
    pub fn zero_radius(self) -> f64 {
        if self == DiscrepancyKind::Rvd {
            1.0
        } else {
            0.0
        }
    }

    pub fn validate_radius(self, m: f64) -> Result<()> {
        if !m.is_finite() || m < self.zero_radius() {
            return Err(Error::invalid(format!(
                "{self} radius must be finite and >= {}, got {m}",
                self.zero_radius()
            )));
        }
        Ok(())
    }

    pub fn name(self) -> &'static str {
        match self {
            DiscrepancyKind::Rvd => "rvd",
            DiscrepancyKind::KullbackLeibler => "kl",
            DiscrepancyKind::Hellinger => "hellinger",
            DiscrepancyKind::ChiSquared => "chi2",
            DiscrepancyKind::ChiSquaredMemberWeighted => "chi2-member",
            DiscrepancyKind::TotalVariation => "tv",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DiscrepancyKind::Rvd => "RVD",
            DiscrepancyKind::KullbackLeibler => "Kullback-Leibler",
            DiscrepancyKind::Hellinger => "Hellinger",
            DiscrepancyKind::ChiSquared => "chi^2",
            DiscrepancyKind::ChiSquaredMemberWeighted => "chi^2 (member-weighted)",
            DiscrepancyKind::TotalVariation => "Total variation",
        }
    }
}

impl fmt::Display for DiscrepancyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiscrepancyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "rvd" => DiscrepancyKind::Rvd,
            "kl" | "kullback-leibler" | "kullback_leibler" => DiscrepancyKind::KullbackLeibler,
            "hellinger" => DiscrepancyKind::Hellinger,
            "chi2" | "chi-squared" | "chi_squared" => DiscrepancyKind::ChiSquared,
            "chi2-member" | "chi_squared_member_weighted" => DiscrepancyKind::ChiSquaredMemberWeighted,
            "tv" | "total-variation" | "total_variation" => DiscrepancyKind::TotalVariation,
            other => return Err(Error::invalid(format!("unknown discrepancy kind '{other}'"))),
        })
    }
}

/// Uniform grid of `n` nodes on `[lo, hi]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1 {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

/// Nodes per dimension for default grids of 1-, 2- and higher-dimensional pairs.
pub const DEFAULT_NODES_1D: usize = 20_001;
pub const DEFAULT_NODES_2D: usize = 401;
pub const DEFAULT_NODES_ND: usize = 61;

/// Default half-width of a Gaussian grid, in standard deviations.
pub const GRID_SIGMAS: f64 = 10.0;

impl Grid1 {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || n < 2 {
            return Err(Error::invalid(format!("grid needs finite lo < hi and n >= 2, got [{lo}, {hi}] n={n}")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Same interval with `2n − 1` nodes (every old node kept).
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n - 1, ..*self }
    }

    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.step()
        } else {
            self.step()
        }
    }
}

/// Default per-dimension grids covering the supports of both distributions.
///
/// Gaussian coordinates span `[min μ − 10 max σ, max μ + 10 max σ]`; bounded
/// supports span the union of their bounding boxes.
pub fn default_grids(p: &Distribution, phat: &Distribution) -> Result<Vec<Grid1>> {
    check_same_dim(p, phat)?;
    if matches!(p, Distribution::Discrete(_)) || matches!(phat, Distribution::Discrete(_)) {
        return Err(Error::Unsupported("grid integration of a discrete law".into()));
    }
    let dim = p.dim();
    let n = match dim {
        1 => DEFAULT_NODES_1D,
        2 => DEFAULT_NODES_2D,
        _ => DEFAULT_NODES_ND,
    };
    let extent = |d: &Distribution, i: usize| -> (f64, f64) {
        if let Some(m) = d.gaussian_marginals() {
            let (mu, s) = m[i];
            (mu - GRID_SIGMAS * s, mu + GRID_SIGMAS * s)
        } else {
            let (lo, hi) = d.support_bounds().expect("non-Gaussian families are bounded");
            (lo[i], hi[i])
        }
    };
    (0..dim)
        .map(|i| {
            let (lo, hi) = match (p.gaussian_marginals(), phat.gaussian_marginals()) {
                (Some(a), Some(b)) => {
                    let s = a[i].1.max(b[i].1);
                    (a[i].0.min(b[i].0) - GRID_SIGMAS * s, a[i].0.max(b[i].0) + GRID_SIGMAS * s)
                }
                _ => {
                    let (a, b) = (extent(p, i), extent(phat, i));
                    (a.0.min(b.0), a.1.max(b.1))
                }
            };
            Grid1::new(lo, hi, n)
        })
        .collect()
}

fn check_same_dim(p: &Distribution, phat: &Distribution) -> Result<()> {
    if p.dim() != phat.dim() {
        return Err(Error::DimensionMismatch { expected: phat.dim(), got: p.dim() });
    }
    Ok(())
}

fn check_grids(p: &Distribution, grids: &[Grid1]) -> Result<()> {
    if grids.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: grids.len() });
    }
    for g in grids {
        Grid1::new(g.lo, g.hi, g.n)?;
    }
    Ok(())
}

/// Closed-form RVD between multivariate Gaussians.
///
/// Finite exactly when Σ⁻¹ − Σ̂⁻¹ is positive definite (or the two
/// distributions coincide); the supremum of the density ratio is attained at
/// `δ = (Σ⁻¹ − Σ̂⁻¹)⁻¹ (Σ⁻¹μ − Σ̂⁻¹μ̂)`.
pub fn rvd_gaussian_nd(p: &GaussianNd, phat: &GaussianNd) -> Result<f64> {
    if p.dim() != phat.dim() {
        return Err(Error::DimensionMismatch { expected: phat.dim(), got: p.dim() });
    }
    if p.mean() == phat.mean() && p.covariance() == phat.covariance() {
        return Ok(1.0);
    }
    let prec = p.precision();
    let prec_hat = phat.precision();
    let diff = &prec - &prec_hat;
    let diff = 0.5 * (&diff + diff.transpose());
    let chol = diff.clone().cholesky().ok_or_else(|| {
        Error::DominanceViolation("Sigma^-1 - Sigma_hat^-1 is not positive definite; the RVD is infinite".into())
    })?;
    let rhs: DVector<f64> = &prec * p.mean() - &prec_hat * phat.mean();
    let delta = chol.solve(&rhs);
    let quad = |prec: &DMatrix<f64>, mu: &DVector<f64>| {
        let d = &delta - mu;
        (d.transpose() * prec * &d)[(0, 0)]
    };
    let ln_m = 0.5 * (phat.ln_det() - p.ln_det()) - 0.5 * (quad(&prec, p.mean()) - quad(&prec_hat, phat.mean()));
    Ok(ln_m.exp())
}

/// Closed-form RVD between two univariate Gaussians:
/// `(σ̂/σ) exp(½ (μ̂ − μ)² / (σ̂² − σ²))`.
pub fn rvd_gaussian_1d(p: &Gaussian1, phat: &Gaussian1) -> Result<f64> {
    if p == phat {
        return Ok(1.0);
    }
    if !(phat.sigma > p.sigma) {
        return Err(Error::DominanceViolation(format!(
            "sigma_hat = {} must exceed sigma = {} for a finite RVD",
            phat.sigma, p.sigma
        )));
    }
    let dm = phat.mu - p.mu;
    Ok(phat.sigma / p.sigma * (0.5 * dm * dm / (phat.sigma * phat.sigma - p.sigma * p.sigma)).exp())
}

/// Closed forms for univariate Gaussian pairs (RVD, KL, Hellinger).
pub fn divergence_gaussian_1d(kind: DiscrepancyKind, p: &Gaussian1, phat: &Gaussian1) -> Result<f64> {
    let (m, s, mh, sh) = (p.mu, p.sigma, phat.mu, phat.sigma);
    match kind {
        DiscrepancyKind::Rvd => rvd_gaussian_1d(p, phat),
        DiscrepancyKind::KullbackLeibler => {
            Ok(((sh / s).ln() + (s * s + (m - mh) * (m - mh)) / (2.0 * sh * sh) - 0.5).max(0.0))
        }
        DiscrepancyKind::Hellinger => {
            let v = s * s + sh * sh;
            let bc = (2.0 * s * sh / v).sqrt() * (-(m - mh) * (m - mh) / (4.0 * v)).exp();
            Ok((1.0 - bc).max(0.0).sqrt())
        }
        other => Err(Error::Unsupported(other.label().into())),
    }
}

/// Supremum of f_P/f_P̂ over a tensor grid, refined around the best node by
/// cyclic golden-section search along each axis.
pub fn rvd_numeric(p: &Distribution, phat: &Distribution, grids: &[Grid1]) -> Result<f64> {
    check_same_dim(p, phat)?;
    check_grids(p, grids)?;
    let total: usize = grids.iter().map(|g| g.n).product();
    let outer = grids[0].n;
    let inner = total / outer;
    // Per outer slice: best (log ratio, flat index) or the first support violation.
    let slices = par::map_range(outer, |i0| -> Result<(f64, usize)> {
        let mut x = vec![0.0; grids.len()];
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for j in 0..inner {
            let flat = i0 * inner + j;
            fill_point(grids, flat, &mut x);
            let lp = p.ln_density_unchecked(&x);
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let lq = phat.ln_density_unchecked(&x);
            if lq == f64::NEG_INFINITY {
                return Err(Error::SupportViolation { point: x });
            }
            let r = lp - lq;
            if r > best.0 {
                best = (r, flat);
            }
        }
        Ok(best)
    });
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for s in slices {
        let s = s?;
        if s.0 > best.0 {
            best = s;
        }
    }
    if best.1 == usize::MAX {
        return Err(Error::invalid("grid does not meet the support of P"));
    }
    let mut x = vec![0.0; grids.len()];
    fill_point(grids, best.1, &mut x);
    let log_ratio = |y: &[f64]| {
        let lp = p.ln_density_unchecked(y);
        let lq = phat.ln_density_unchecked(y);
        if lp == f64::NEG_INFINITY || lq == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            lp - lq
        }
    };
    let mut value = best.0;
    let widths: Vec<f64> = grids.iter().map(Grid1::step).collect();
    for _sweep in 0..50 {
        let before = value;
        for (axis, w) in widths.iter().enumerate() {
            let c = x[axis];
            let (t, v) = golden_max(
                |t| {
                    let mut y = x.clone();
                    y[axis] = t;
                    log_ratio(&y)
                },
                c - w,
                c + w,
            );
            if v > value {
                value = v;
                x[axis] = t;
            }
        }
        if value - before <= 1e-15 * value.abs().max(1.0) {
            break;
        }
    }
    Ok(value.exp())
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn fill_point(grids: &[Grid1], mut flat: usize, x: &mut [f64]) {
    for (axis, g) in grids.iter().enumerate().rev() {
        x[axis] = g.node(flat % g.n);
        flat /= g.n;
    }
}

/// Trapezoidal approximation of ρ(P, P̂) on a tensor grid.
///
/// For [`DiscrepancyKind::Rvd`] this delegates to [`rvd_numeric`]. Two
/// discrete laws are compared atom by atom instead.
pub fn divergence_numeric(kind: DiscrepancyKind, p: &Distribution, phat: &Distribution, grids: &[Grid1]) -> Result<f64> {
    check_same_dim(p, phat)?;
    if let (Distribution::Discrete(a), Distribution::Discrete(b)) = (p, phat) {
        return divergence_discrete_dists(kind, a, b);
    }
    if kind == DiscrepancyKind::Rvd {
        return rvd_numeric(p, phat, grids);
    }
    check_grids(p, grids)?;
    let total: usize = grids.iter().map(|g| g.n).product();
    let outer = grids[0].n;
    let inner = total / outer;
    let slices = par::map_range(outer, |i0| -> Result<f64> {
        let mut x = vec![0.0; grids.len()];
        let mut acc = 0.0;
        for j in 0..inner {
            let mut flat = i0 * inner + j;
            let mut w = 1.0;
            for (axis, g) in grids.iter().enumerate().rev() {
                let idx = flat % g.n;
                x[axis] = g.node(idx);
                w *= g.weight(idx);
                flat /= g.n;
            }
            let lp = p.ln_density_unchecked(&x);
            let lq = phat.ln_density_unchecked(&x);
            match pointwise(kind, lp, lq) {
                Some(v) => acc += w * v,
                None => return Err(Error::SupportViolation { point: x }),
            }
        }
        Ok(acc)
    });
    let mut sum = 0.0;
    for s in slices {
        sum += s?;
    }
    Ok(finish(kind, sum))
}

/// [`divergence_numeric`] on the default grids.
pub fn divergence_numeric_default(kind: DiscrepancyKind, p: &Distribution, phat: &Distribution) -> Result<f64> {
    if let (Distribution::Discrete(a), Distribution::Discrete(b)) = (p, phat) {
        return divergence_discrete_dists(kind, a, b);
    }
    let grids = default_grids(p, phat)?;
    divergence_numeric(kind, p, phat, &grids)
}

/// Trapezoidal ρ on a 1-D uniform grid from precomputed log densities.
///
/// `ln_p[i]`, `ln_q[i]` are the log densities at node `i` of a grid with
/// spacing `step`. Returns `SupportViolation` at the first offending node.
pub fn divergence_on_nodes(kind: DiscrepancyKind, step: f64, ln_p: &[f64], ln_q: &[f64]) -> Result<f64> {
    assert_eq!(ln_p.len(), ln_q.len());
    let n = ln_p.len();
    if kind == DiscrepancyKind::Rvd {
        let mut best = f64::NEG_INFINITY;
        for (i, (&lp, &lq)) in ln_p.iter().zip(ln_q).enumerate() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            if lq == f64::NEG_INFINITY {
                return Err(Error::SupportViolation { point: vec![i as f64] });
            }
            best = best.max(lp - lq);
        }
        return Ok(best.exp());
    }
    let mut sum = 0.0;
    for (i, (&lp, &lq)) in ln_p.iter().zip(ln_q).enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 * step } else { step };
        match pointwise(kind, lp, lq) {
            Some(v) => sum += w * v,
            None => return Err(Error::SupportViolation { point: vec![i as f64] }),
        }
    }
    Ok(finish(kind, sum))
}

/// Integrand of a φ-divergence at one point, from log densities.
/// `None` flags f_P > 0 where f_P̂ = 0 for kinds that need absolute continuity.
fn pointwise(kind: DiscrepancyKind, lp: f64, lq: f64) -> Option<f64> {
    const NEG: f64 = f64::NEG_INFINITY;
    match kind {
        DiscrepancyKind::TotalVariation => Some(0.5 * (lp.exp() - lq.exp()).abs()),
        DiscrepancyKind::Hellinger => {
            let d = (0.5 * lp).exp() - (0.5 * lq).exp();
            Some(0.5 * d * d)
        }
        DiscrepancyKind::KullbackLeibler => match (lp == NEG, lq == NEG) {
            (true, _) => Some(0.0),
            (false, true) => None,
            (false, false) => Some(lp.exp() * (lp - lq)),
        },
        DiscrepancyKind::ChiSquared => match (lp == NEG, lq == NEG) {
            (true, true) => Some(0.0),
            (false, true) => None,
            _ => {
                let r = (lp - lq).exp();
                Some(lq.exp() * (r - 1.0) * (r - 1.0))
            }
        },
        DiscrepancyKind::ChiSquaredMemberWeighted => match (lp == NEG, lq == NEG) {
            (true, true) => Some(0.0),
            (true, false) => Some(f64::INFINITY),
            _ => {
                let s = (lq - lp).exp();
                Some(lp.exp() * (s - 1.0) * (s - 1.0))
            }
        },
        DiscrepancyKind::Rvd => unreachable!("the RVD is a supremum, not an integral"),
    }
}

fn finish(kind: DiscrepancyKind, sum: f64) -> f64 {
    let sum = sum.max(0.0);
    if kind == DiscrepancyKind::Hellinger {
        sum.sqrt()
    } else {
        sum
    }
}

/// ρ between two weight vectors on the same atoms. Returns `+inf` where the
/// divergence is unbounded (mass of P on an atom P̂ does not charge).
pub fn divergence_discrete(kind: DiscrepancyKind, p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    if kind == DiscrepancyKind::Rvd {
        let mut best: f64 = 0.0;
        for (&a, &b) in p.iter().zip(q) {
            if a > 0.0 {
                if b <= 0.0 {
                    return f64::INFINITY;
                }
                best = best.max(a / b);
            }
        }
        return best;
    }
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        sum += match kind {
            DiscrepancyKind::TotalVariation => 0.5 * (a - b).abs(),
            DiscrepancyKind::Hellinger => 0.5 * (a.sqrt() - b.sqrt()).powi(2),
            DiscrepancyKind::KullbackLeibler => {
                if a == 0.0 {
                    0.0
                } else if b == 0.0 {
                    return f64::INFINITY;
                } else {
                    a * (a / b).ln()
                }
            }
            DiscrepancyKind::ChiSquared => {
                if b == 0.0 {
                    if a == 0.0 {
                        0.0
                    } else {
                        return f64::INFINITY;
                    }
                } else {
                    (a - b) * (a - b) / b
                }
            }
            DiscrepancyKind::ChiSquaredMemberWeighted => {
                if a == 0.0 {
                    if b == 0.0 {
                        0.0
                    } else {
                        return f64::INFINITY;
                    }
                } else {
                    (a - b) * (a - b) / a
                }
            }
            DiscrepancyKind::Rvd => unreachable!(),
        };
    }
    finish(kind, sum)
}

fn divergence_discrete_dists(kind: DiscrepancyKind, p: &DiscreteDist, phat: &DiscreteDist) -> Result<f64> {
    let mut atoms: Vec<&Vec<f64>> = phat.atoms.iter().collect();
    for a in &p.atoms {
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    let weight = |d: &DiscreteDist, x: &Vec<f64>| d.atoms.iter().position(|a| a == x).map_or(0.0, |i| d.weights[i]);
    let pw: Vec<f64> = atoms.iter().map(|x| weight(p, x)).collect();
    let qw: Vec<f64> = atoms.iter().map(|x| weight(phat, x)).collect();
    let needs_cover = matches!(
        kind,
        DiscrepancyKind::Rvd | DiscrepancyKind::KullbackLeibler | DiscrepancyKind::ChiSquared
    );
    if needs_cover {
        if let Some(i) = (0..atoms.len()).find(|&i| pw[i] > 0.0 && qw[i] == 0.0) {
            return Err(Error::SupportViolation { point: atoms[i].clone() });
        }
    }
    Ok(divergence_discrete(kind, &pw, &qw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{RingUniform, UniformBox};
    use approx::assert_relative_eq;

    fn g1(mu: f64, sigma: f64) -> Gaussian1 {
        Gaussian1::new(mu, sigma).unwrap()
    }

    fn gnd(mu: &[f64], sigma: &[f64]) -> GaussianNd {
        let n = mu.len();
        GaussianNd::new(DVector::from_column_slice(mu), DMatrix::from_row_slice(n, n, sigma)).unwrap()
    }

    #[test]
    fn rvd_closed_form_examples() {
        let a = GaussianNd::from_gaussian1(g1(0.0, 1.0));
        assert_eq!(rvd_gaussian_nd(&a, &a).unwrap(), 1.0);
        let b = GaussianNd::from_gaussian1(g1(0.0, 2.0));
        assert_relative_eq!(rvd_gaussian_nd(&a, &b).unwrap(), 2.0, max_relative = 1e-14);
        let c = GaussianNd::from_gaussian1(g1(0.5, 1.0));
        let expected = 2.0 * (0.125f64 / 3.0).exp();
        assert_relative_eq!(rvd_gaussian_nd(&c, &b).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 2.0851, epsilon = 1e-4);
        assert_relative_eq!(rvd_gaussian_1d(&g1(0.5, 1.0), &g1(0.0, 2.0)).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn rvd_closed_form_matches_compact_identity() {
        // sup over δ of the log ratio equals ½ ln(det Σ̂/det Σ) + ½ Δμᵀ(Σ̂ − Σ)⁻¹Δμ.
        let p = gnd(&[0.3, -0.2], &[1.0, 0.2, 0.2, 0.5]);
        let q = gnd(&[-0.1, 0.4], &[3.0, -0.4, -0.4, 2.0]);
        let dm = DVector::from_vec(vec![0.4, -0.6]);
        let gap = q.covariance() - p.covariance();
        let quad = (dm.transpose() * gap.try_inverse().unwrap() * &dm)[(0, 0)];
        let expected = (0.5 * (q.ln_det() - p.ln_det()) + 0.5 * quad).exp();
        assert_relative_eq!(rvd_gaussian_nd(&p, &q).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn rvd_dominance_violations() {
        let p = GaussianNd::from_gaussian1(g1(0.0, 1.0));
        let q = GaussianNd::from_gaussian1(g1(0.0, 0.5));
        assert!(matches!(rvd_gaussian_nd(&p, &q), Err(Error::DominanceViolation(_))));
        let shifted = GaussianNd::from_gaussian1(g1(0.1, 1.0));
        assert!(matches!(rvd_gaussian_nd(&shifted, &p), Err(Error::DominanceViolation(_))));
        assert!(matches!(
            divergence_gaussian_1d(DiscrepancyKind::Rvd, &g1(0.0, 1.0), &g1(0.0, 0.5)),
            Err(Error::DominanceViolation(_))
        ));
        // Dominated along one axis only.
        let p2 = gnd(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        let q2 = gnd(&[0.0, 0.0], &[2.0, 0.0, 0.0, 0.5]);
        assert!(matches!(rvd_gaussian_nd(&p2, &q2), Err(Error::DominanceViolation(_))));
    }

    #[test]
    fn rvd_invariant_under_common_shift() {
        let p = gnd(&[0.3, -0.2], &[1.0, 0.2, 0.2, 0.5]);
        let q = gnd(&[-0.1, 0.4], &[3.0, -0.4, -0.4, 2.0]);
        let m0 = rvd_gaussian_nd(&p, &q).unwrap();
        let shift = [5.0, -7.5];
        let ps = gnd(&[0.3 + shift[0], -0.2 + shift[1]], &[1.0, 0.2, 0.2, 0.5]);
        let qs = gnd(&[-0.1 + shift[0], 0.4 + shift[1]], &[3.0, -0.4, -0.4, 2.0]);
        assert_relative_eq!(rvd_gaussian_nd(&ps, &qs).unwrap(), m0, max_relative = 1e-12);
    }

    #[test]
    fn rvd_numeric_ring_vs_box() {
        let ring: Distribution = RingUniform::new(0.1, 0.2, 2).unwrap().into();
        let sq: Distribution = UniformBox::symmetric(0.2, 2).unwrap().into();
        let grids = default_grids(&ring, &sq).unwrap();
        assert_relative_eq!(rvd_numeric(&ring, &sq, &grids).unwrap(), 4.0, max_relative = 1e-12);
        assert_relative_eq!(rvd_numeric(&sq, &sq, &grids).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn rvd_numeric_support_violation() {
        let wide: Distribution = UniformBox::symmetric(0.3, 1).unwrap().into();
        let narrow: Distribution = UniformBox::symmetric(0.2, 1).unwrap().into();
        let grids = default_grids(&wide, &narrow).unwrap();
        assert!(matches!(rvd_numeric(&wide, &narrow, &grids), Err(Error::SupportViolation { .. })));
        assert!(matches!(
            divergence_numeric(DiscrepancyKind::KullbackLeibler, &wide, &narrow, &grids),
            Err(Error::SupportViolation { .. })
        ));
        // TV and Hellinger do not need absolute continuity.
        let tv = divergence_numeric(DiscrepancyKind::TotalVariation, &wide, &narrow, &grids).unwrap();
        assert_relative_eq!(tv, 1.0 / 3.0, epsilon = 1e-3);
    }

    #[test]
    fn rvd_numeric_matches_closed_form_1d() {
        let p: Distribution = g1(0.5, 1.0).into();
        let q: Distribution = g1(0.0, 2.0).into();
        let grids = default_grids(&p, &q).unwrap();
        let closed = rvd_gaussian_1d(&g1(0.5, 1.0), &g1(0.0, 2.0)).unwrap();
        assert_relative_eq!(rvd_numeric(&p, &q, &grids).unwrap(), closed, max_relative = 1e-6);
    }

    #[test]
    fn kl_closed_form_against_trapezoid_oracle() {
        // Independent oracle: trapezoidal integration of f ln(f/g) written out here.
        let (p, q) = (g1(1.0, 1.0), g1(0.0, 1.0));
        let (lo, hi, n) = (-11.0, 12.0, 40_001);
        let h = (hi - lo) / (n - 1) as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let x = lo + i as f64 * h;
                let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                w * p.pdf(x) * (p.pdf(x) / q.pdf(x)).ln()
            })
            .sum();
        assert_relative_eq!(oracle, 0.5, max_relative = 1e-6);
        let closed = divergence_gaussian_1d(DiscrepancyKind::KullbackLeibler, &p, &q).unwrap();
        assert_relative_eq!(closed, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn identical_pairs_have_zero_divergence() {
        let p: Distribution = g1(0.2, 1.3).into();
        for kind in [
            DiscrepancyKind::KullbackLeibler,
            DiscrepancyKind::Hellinger,
            DiscrepancyKind::ChiSquared,
            DiscrepancyKind::ChiSquaredMemberWeighted,
            DiscrepancyKind::TotalVariation,
        ] {
            let v = divergence_numeric_default(kind, &p, &p).unwrap();
            assert!(v.abs() < 1e-12, "{kind}: {v}");
        }
        assert_eq!(divergence_gaussian_1d(DiscrepancyKind::KullbackLeibler, &g1(0.2, 1.3), &g1(0.2, 1.3)).unwrap(), 0.0);
        assert_eq!(divergence_gaussian_1d(DiscrepancyKind::Hellinger, &g1(0.2, 1.3), &g1(0.2, 1.3)).unwrap(), 0.0);
        let rvd = divergence_numeric_default(DiscrepancyKind::Rvd, &p, &p).unwrap();
        assert_relative_eq!(rvd, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn closed_forms_match_numeric() {
        let pairs = [(g1(0.0, 1.0), g1(0.05, 1.59)), (g1(0.7, 1.2), g1(-0.3, 1.9)), (g1(-1.0, 2.0), g1(0.1, 1.4))];
        for (a, b) in pairs {
            for kind in [DiscrepancyKind::KullbackLeibler, DiscrepancyKind::Hellinger] {
                let closed = divergence_gaussian_1d(kind, &a, &b).unwrap();
                let numeric = divergence_numeric_default(kind, &a.into(), &b.into()).unwrap();
                assert_relative_eq!(numeric, closed, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn unsupported_closed_forms() {
        for kind in [DiscrepancyKind::ChiSquared, DiscrepancyKind::TotalVariation] {
            assert!(matches!(
                divergence_gaussian_1d(kind, &g1(0.0, 1.0), &g1(0.0, 2.0)),
                Err(Error::Unsupported(_))
            ));
        }
    }

    #[test]
    fn grid_refinement_converges_monotonically() {
        let p: Distribution = g1(0.0, 1.0).into();
        let q: Distribution = g1(0.4, 1.7).into();
        for kind in [DiscrepancyKind::TotalVariation, DiscrepancyKind::ChiSquared, DiscrepancyKind::KullbackLeibler] {
            // Coarse enough that the trapezoid error is visible.
            let mut grid = Grid1::new(-10.0, 10.0, 161).unwrap();
            let mut prev = divergence_numeric(kind, &p, &q, &[grid]).unwrap();
            let mut prev_change = f64::INFINITY;
            for _ in 0..5 {
                grid = grid.refined();
                let v = divergence_numeric(kind, &p, &q, &[grid]).unwrap();
                let change = (v - prev).abs();
                if prev_change < 1e-13 {
                    // Smooth integrands hit rounding noise after a few levels.
                    break;
                }
                assert!(change < prev_change, "{kind}: change {change} after {prev_change}");
                prev_change = change;
                prev = v;
            }
        }
    }

    #[test]
    fn discrete_divergences() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.4, 0.4, 0.2];
        assert_relative_eq!(divergence_discrete(DiscrepancyKind::TotalVariation, &p, &q), 0.1, max_relative = 1e-14);
        assert_relative_eq!(divergence_discrete(DiscrepancyKind::Rvd, &p, &q), 1.25, max_relative = 1e-14);
        assert_relative_eq!(
            divergence_discrete(DiscrepancyKind::ChiSquared, &p, &q),
            0.01 / 0.4 + 0.01 / 0.4,
            max_relative = 1e-14
        );
        assert_eq!(divergence_discrete(DiscrepancyKind::KullbackLeibler, &[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        let a = DiscreteDist::on_integers(vec![0.5, 0.5]).unwrap();
        let b = DiscreteDist::on_integers(vec![0.25, 0.75]).unwrap();
        let v = divergence_numeric_default(DiscrepancyKind::Rvd, &a.into(), &b.into()).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in DiscrepancyKind::ALL {
            assert_eq!(kind.name().parse::<DiscrepancyKind>().unwrap(), kind);
        }
        assert!("wasserstein".parse::<DiscrepancyKind>().is_err());
    }
}
