//! Minimax fit of a nominal Gaussian to a finite family of Gaussians.
//!
//! Given members N(μ_i, σ_i), find (μ̂, σ̂) minimizing
//! g(μ̂, σ̂) = max_i ρ(N(μ_i, σ_i), N(μ̂, σ̂)). The radius of the smallest
//! ambiguity set around the fitted nominal that still holds every member
//! is then M = g(μ̂, σ̂).
//!
//! The search runs Nelder-Mead from a 3×3 grid of seeds, restarts from the
//! best vertex until the value stops improving, and finishes with a compass
//! search so no small axis or diagonal move can lower g.

use serde::{Deserialize, Serialize};

use crate::discrepancy::{self, DiscrepancyKind, GRID_SIGMAS};
use crate::distributions::Gaussian1;
use crate::error::{Error, Result};
use crate::par;
use crate::prl::prl;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianFamily {
    pub members: Vec<Gaussian1>,
}

impl GaussianFamily {
    pub fn new(members: Vec<Gaussian1>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("a Gaussian family needs at least one member"));
        }
        for m in &members {
            Gaussian1::new(m.mu, m.sigma)?;
        }
        Ok(Self { members })
    }

    /// Cartesian grid of equally spaced means and standard deviations,
    /// endpoints included.
    pub fn make_family_grid(mu_range: (f64, f64), sigma_range: (f64, f64), n_mu: usize, n_sigma: usize) -> Result<Self> {
        let axis = |(lo, hi): (f64, f64), n: usize| -> Result<Vec<f64>> {
            if n == 0 || hi < lo || (n == 1 && hi != lo) {
                return Err(Error::invalid(format!("bad grid axis [{lo}, {hi}] with {n} points")));
            }
            Ok((0..n)
                .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                .collect())
        };
        let mus = axis(mu_range, n_mu)?;
        let sigmas = axis(sigma_range, n_sigma)?;
        let mut members = Vec::with_capacity(n_mu * n_sigma);
        for &mu in &mus {
            for &sigma in &sigmas {
                members.push(Gaussian1::new(mu, sigma)?);
            }
        }
        Self::new(members)
    }

    /// The 25-member reference family: means uniform on [−1, 1] and
    /// standard deviations uniform on [1, 2], drawn once with a fixed seed.
    pub fn reference_draws() -> Self {
        const DRAWS: [(f64, f64); 25] = [
            (0.0976270078546495, 1.639921021327524),
            (0.43037873274483895, 1.1433532874090464),
            (0.20552675214328775, 1.944668917049584),
            (0.08976636599379373, 1.5218483217500718),
            (-0.15269040132219058, 1.4146619399905236),
            (0.29178822613331223, 1.264555612104627),
            (-0.12482557747461498, 1.7742336894342166),
            (0.7835460015641595, 1.4561503322165485),
            (0.9273255210020586, 1.5684339488686485),
            (-0.2331169623484446, 1.0187898004363551),
            (0.5834500761653292, 1.617635497075877),
            (0.05778983950580896, 1.6120957227224215),
            (0.13608912218786462, 1.616933996874757),
            (0.8511932765853221, 1.9437480785146242),
            (-0.8579278836042261, 1.6818202991034834),
            (-0.8257414005969186, 1.359507900573786),
            (-0.9595632051193486, 1.4370319537993415),
            (0.665239691095876, 1.697631195927265),
            (0.556313501899701, 1.0602254716292698),
            (0.7400242964936383, 1.6667667154456676),
            (0.957236684465528, 1.6706378696181594),
            (0.5983171284334472, 1.2103825610738408),
            (-0.07704127549413631, 1.1289262976548533),
            (0.5610583525729109, 1.3154283509241838),
            (-0.7634511482621336, 1.3637107709426226),
        ];
        Self { members: DRAWS.iter().map(|&(mu, sigma)| Gaussian1 { mu, sigma }).collect() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_sigma(&self) -> f64 {
        self.members.iter().map(|m| m.sigma).fold(f64::NEG_INFINITY, f64::max)
    }

    fn mu_range(&self) -> (f64, f64) {
        let lo = self.members.iter().map(|m| m.mu).fold(f64::INFINITY, f64::min);
        let hi = self.members.iter().map(|m| m.mu).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Stopping tolerance on g for each Nelder-Mead run and across restarts.
    pub tol: f64,
    pub max_iter: usize,
    /// Nodes of the integration grid used by kinds without a closed form.
    pub grid_nodes: usize,
    /// Largest σ̂ the search may visit; `None` leaves it unbounded.
    pub sigma_hat_max: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 4000, grid_nodes: discrepancy::DEFAULT_NODES_1D, sigma_hat_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: DiscrepancyKind,
    pub nominal: Gaussian1,
    pub radius: f64,
    /// ρ(member_i, nominal) in family order.
    pub achieved: Vec<f64>,
    pub evaluations: usize,
}

/// Evaluates g(μ̂, σ̂) for one kind and family.
pub struct Objective<'a> {
    kind: DiscrepancyKind,
    family: &'a GaussianFamily,
    grid: Option<GridCache>,
    sigma_cap: f64,
}

struct GridCache {
    nodes: Vec<f64>,
    step: f64,
    members: Vec<Vec<f64>>,
}

impl<'a> Objective<'a> {
    pub fn new(kind: DiscrepancyKind, family: &'a GaussianFamily, opts: &FitOptions) -> Result<Self> {
        let closed = matches!(
            kind,
            DiscrepancyKind::Rvd | DiscrepancyKind::KullbackLeibler | DiscrepancyKind::Hellinger
        );
        let grid = if closed {
            None
        } else {
            // One fixed grid per fit, wide enough for nominals up to twice the widest member.
            let (lo, hi) = family.mu_range();
            let pad = GRID_SIGMAS * 2.0 * family.max_sigma();
            let g = discrepancy::Grid1::new(lo - pad, hi + pad, opts.grid_nodes)?;
            let nodes = g.nodes();
            let members = family.members.iter().map(|m| nodes.iter().map(|&x| m.ln_pdf(x).exp()).collect()).collect();
            Some(GridCache { nodes, step: g.step(), members })
        };
        Ok(Self { kind, family, grid, sigma_cap: opts.sigma_hat_max.unwrap_or(f64::INFINITY) })
    }

    /// Per-member distances to N(μ̂, σ̂).
    pub fn achieved(&self, mu_hat: f64, sigma_hat: f64) -> Result<Vec<f64>> {
        let nominal = Gaussian1::new(mu_hat, sigma_hat)?;
        match &self.grid {
            None => self
                .family
                .members
                .iter()
                .map(|m| discrepancy::divergence_gaussian_1d(self.kind, m, &nominal))
                .collect(),
            Some(cache) => {
                let q: Vec<f64> = cache.nodes.iter().map(|&x| nominal.ln_pdf(x).exp()).collect();
                cache.members.iter().map(|p| trapezoid(self.kind, cache.step, p, &q)).collect()
            }
        }
    }

    /// g(μ̂, σ̂), or `+inf` where some member is not covered at finite radius.
    pub fn value(&self, mu_hat: f64, sigma_hat: f64) -> f64 {
        if !(sigma_hat > 0.0) || sigma_hat > self.sigma_cap || !mu_hat.is_finite() {
            return f64::INFINITY;
        }
        match self.achieved(mu_hat, sigma_hat) {
            Ok(v) => v.into_iter().fold(f64::NEG_INFINITY, f64::max),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Trapezoid rule for the integral kinds from densities on a shared grid.
/// Working with densities rather than logs keeps the inner loop free of `exp`.
fn trapezoid(kind: DiscrepancyKind, step: f64, p: &[f64], q: &[f64]) -> Result<f64> {
    let n = p.len();
    let mut sum = 0.0;
    for (i, (&f, &g)) in p.iter().zip(q).enumerate() {
        let v = match kind {
            DiscrepancyKind::TotalVariation => 0.5 * (f - g).abs(),
            DiscrepancyKind::ChiSquared if g > 0.0 => (f - g) * (f - g) / g,
            DiscrepancyKind::ChiSquaredMemberWeighted if f > 0.0 => (f - g) * (f - g) / f,
            DiscrepancyKind::ChiSquared | DiscrepancyKind::ChiSquaredMemberWeighted => {
                if f == g {
                    0.0
                } else {
                    return Err(Error::SupportViolation { point: vec![i as f64] });
                }
            }
            _ => return Err(Error::Unsupported(format!("{kind} has no trapezoid fit path"))),
        };
        sum += if i == 0 || i + 1 == n { 0.5 * step * v } else { step * v };
    }
    Ok(sum.max(0.0))
}

/// Fits the nominal Gaussian minimizing the largest member distance.
pub fn fit_nominal(kind: DiscrepancyKind, family: &GaussianFamily, opts: &FitOptions) -> Result<FitResult> {
    if family.is_empty() {
        return Err(Error::invalid("a Gaussian family needs at least one member"));
    }
    let sigma_max = family.max_sigma();
    if kind == DiscrepancyKind::Rvd {
        if let Some(cap) = opts.sigma_hat_max {
            if cap < sigma_max {
                return Err(Error::InfeasibleDominance { max_sigma: sigma_max });
            }
        }
    }
    let objective = Objective::new(kind, family, opts)?;
    // Search coordinates (μ̂, t). For the RVD σ̂ = σ_max + t², which keeps the
    // dominance condition σ̂ ≥ σ_max without a constraint; otherwise σ̂ = t.
    let to_sigma = |t: f64| if kind == DiscrepancyKind::Rvd { sigma_max + t * t } else { t };
    let g = |x: [f64; 2]| objective.value(x[0], to_sigma(x[1]));

    let (mu_lo, mu_hi) = family.mu_range();
    let sigma_min = family.members.iter().map(|m| m.sigma).fold(f64::INFINITY, f64::min);
    let mu_seeds = [mu_lo, 0.5 * (mu_lo + mu_hi), mu_hi];
    let t_seeds = if kind == DiscrepancyKind::Rvd {
        [0.1, 0.5, 1.0]
    } else {
        [sigma_min, 0.5 * (sigma_min + sigma_max), sigma_max]
    };
    let mut seeds: Vec<[f64; 2]> = Vec::with_capacity(9);
    for &m in &mu_seeds {
        for &t in &t_seeds {
            seeds.push([m, t]);
        }
    }

    let runs = par::map_slice(&seeds, |&x0| minimize(&g, x0, opts));
    let mut best = runs[0];
    let mut evaluations = 0;
    for r in &runs {
        evaluations += r.evals;
        if r.value < best.value {
            best = *r;
        }
    }
    // Members themselves are candidates (exact when the family has one member).
    for m in &family.members {
        let x = if kind == DiscrepancyKind::Rvd { [m.mu, 0.0] } else { [m.mu, m.sigma] };
        let v = g(x);
        evaluations += 1;
        if v < best.value {
            best = Run { x, value: v, evals: 0 };
        }
    }
    if !best.value.is_finite() {
        return Err(Error::invalid(format!("no finite {kind} radius found for this family")));
    }

    let mu_hat = best.x[0];
    let sigma_hat = to_sigma(best.x[1]);
    let achieved = objective.achieved(mu_hat, sigma_hat)?;
    let radius = achieved.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        kind,
        nominal: Gaussian1::new(mu_hat, sigma_hat)?,
        radius,
        achieved,
        evaluations: evaluations + best.evals,
    })
}

#[derive(Debug, Clone, Copy)]
struct Run {
    x: [f64; 2],
    value: f64,
    evals: usize,
}

/// Nelder-Mead with restarts from the incumbent, then compass polish.
fn minimize<F: Fn([f64; 2]) -> f64>(f: &F, x0: [f64; 2], opts: &FitOptions) -> Run {
    let mut run = nelder_mead(f, x0, 0.1, opts);
    for _ in 0..20 {
        let again = nelder_mead(f, run.x, 0.05, opts);
        let gain = run.value - again.value;
        run = Run { evals: run.evals + again.evals, ..if again.value < run.value { again } else { run } };
        if !(gain > opts.tol) {
            break;
        }
    }
    let polished = compass(f, run, opts.tol);
    Run { evals: run.evals + polished.evals, ..polished }
}

fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: &F, x0: [f64; 2], step: f64, opts: &FitOptions) -> Run {
    let mut simplex = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut values = simplex.map(|x| f(x));
    let mut evals = 3;
    for _ in 0..opts.max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let spread = values[2] - values[0];
        let size = (1..3)
            .map(|i| (simplex[i][0] - simplex[0][0]).abs().max((simplex[i][1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread <= opts.tol && size <= 1e-9) || size <= 1e-13 {
            break;
        }
        let centroid = [0.5 * (simplex[0][0] + simplex[1][0]), 0.5 * (simplex[0][1] + simplex[1][1])];
        let along = |t: f64| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            evals += 1;
            (simplex[2], values[2]) = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < values[1] {
            (simplex[2], values[2]) = (xr, fr);
        } else {
            let (xc, fc) = if fr < values[2] {
                let xc = along(-0.5);
                (xc, f(xc))
            } else {
                let xc = along(0.5);
                (xc, f(xc))
            };
            evals += 1;
            if fc < values[2].min(fr) {
                (simplex[2], values[2]) = (xc, fc);
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
                evals += 2;
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Run { x: simplex[best], value: values[best], evals }
}

/// Compass search over the axes and diagonals with shrinking steps.
fn compass<F: Fn([f64; 2]) -> f64>(f: &F, mut run: Run, tol: f64) -> Run {
    const DIRS: [[f64; 2]; 8] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];
    let mut evals = 0;
    let mut step = 1e-2;
    while step >= 1e-9 {
        let mut moved = false;
        for d in DIRS {
            let x = [run.x[0] + step * d[0], run.x[1] + step * d[1]];
            let v = f(x);
            evals += 1;
            if v < run.value - tol * 1e-3 {
                run.x = x;
                run.value = v;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Run { evals, ..run }
}

/// One row of the comparison table: fitted nominal, radius and PRL at `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub kind: DiscrepancyKind,
    pub mu_hat: f64,
    pub sigma_hat: f64,
    pub radius: f64,
    pub eps: f64,
    pub prl: f64,
}

/// Fits every kind in [`DiscrepancyKind::ALL`] and reports the PRL at `eps`.
pub fn comparison_table(family: &GaussianFamily, opts: &FitOptions, eps: f64) -> Result<Vec<TableRow>> {
    DiscrepancyKind::ALL
        .iter()
        .map(|&kind| {
            let fit = fit_nominal(kind, family, opts)?;
            let r = prl(kind, fit.radius, eps)?;
            Ok(TableRow {
                kind,
                mu_hat: fit.nominal.mu,
                sigma_hat: fit.nominal.sigma,
                radius: fit.radius,
                eps,
                prl: r.eps_hat,
            })
        })
        .collect()
}
