//! Probability distributions: densities, sampling and support membership.
//!
//! Four continuous families plus finite discrete laws. All values are
//! immutable after construction and safe to share across threads; sampling
//! is a pure function of `(seed, stream)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A point of the distribution's sample space.
pub type Point = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian1 {
    pub mu: f64,
    pub sigma: f64,
}

impl Gaussian1 {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::invalid(format!("Gaussian1 needs finite mu and sigma > 0, got ({mu}, {sigma})")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        -0.5 * z * z - self.sigma.ln() - LN_SQRT_2PI
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Φ((x − μ)/σ).
    pub fn cdf(&self, x: f64) -> f64 {
        0.5 * statrs::function::erf::erfc(-(x - self.mu) / (self.sigma * std::f64::consts::SQRT_2))
    }
}

/// Multivariate Gaussian with a precomputed Cholesky factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianNdSpec", into = "GaussianNdSpec")]
pub struct GaussianNd {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    chol: DMatrix<f64>,
    ln_det: f64,
}

/// Plain-data form of [`GaussianNd`] used on the wire.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianNdSpec {
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

impl TryFrom<GaussianNdSpec> for GaussianNd {
    type Error = Error;

    fn try_from(spec: GaussianNdSpec) -> Result<Self> {
        let n = spec.mu.len();
        if spec.sigma.len() != n || spec.sigma.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("GaussianNd sigma must be n x n with n = len(mu)"));
        }
        let sigma = DMatrix::from_fn(n, n, |i, j| spec.sigma[i][j]);
        GaussianNd::new(DVector::from_vec(spec.mu), sigma)
    }
}

impl From<GaussianNd> for GaussianNdSpec {
    fn from(g: GaussianNd) -> Self {
        let n = g.dim();
        GaussianNdSpec {
            mu: g.mu.iter().copied().collect(),
            sigma: (0..n).map(|i| (0..n).map(|j| g.sigma[(i, j)]).collect()).collect(),
        }
    }
}

impl GaussianNd {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let n = mu.len();
        if n == 0 || sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::invalid("GaussianNd needs a non-empty mean and a matching square covariance"));
        }
        if (&sigma - sigma.transpose()).amax() > 1e-12 * sigma.amax().max(1.0) {
            return Err(Error::invalid("GaussianNd covariance must be symmetric"));
        }
        let chol = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid("GaussianNd covariance must be positive definite"))?;
        let l = chol.l();
        let ln_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(Self { mu, sigma, chol: l, ln_det })
    }

    pub fn from_gaussian1(g: Gaussian1) -> Self {
        Self::new(DVector::from_element(1, g.mu), DMatrix::from_element(1, 1, g.sigma * g.sigma))
            .expect("sigma > 0 is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn ln_det(&self) -> f64 {
        self.ln_det
    }

    /// Lower Cholesky factor L with Σ = L Lᵀ.
    pub fn cholesky_l(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn precision(&self) -> DMatrix<f64> {
        let n = self.dim();
        let linv = self
            .chol
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("Cholesky factor is non-singular");
        linv.transpose() * linv
    }

    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let diff = DVector::from_iterator(n, x.iter().zip(self.mu.iter()).map(|(a, m)| a - m));
        let y = self.chol.solve_lower_triangular(&diff).expect("Cholesky factor is non-singular");
        -0.5 * y.norm_squared() - 0.5 * self.ln_det - n as f64 * LN_SQRT_2PI
    }

    fn sample_into(&self, rng: &mut StreamRng) -> Point {
        let n = self.dim();
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        (&self.mu + &self.chol * z).iter().copied().collect()
    }
}

/// Uniform law on the axis-aligned box `[lo, hi]` (closed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl UniformBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("UniformBox bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::invalid("UniformBox requires finite lo[i] < hi[i]"));
        }
        Ok(Self { lo, hi })
    }

    pub fn symmetric(half_width: f64, dim: usize) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }
}

/// Uniform law on `{w : inner < |w_i| <= outer for every i}`.
///
/// Each coordinate lives on two symmetric bands; the inner edge is excluded
/// and the outer edge included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingUniform {
    pub inner: f64,
    pub outer: f64,
    pub dim: usize,
}

impl RingUniform {
    pub fn new(inner: f64, outer: f64, dim: usize) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) || dim == 0 {
            return Err(Error::invalid("RingUniform needs 0 <= inner < outer and dim >= 1"));
        }
        Ok(Self { inner, outer, dim })
    }

    /// 1 / (2 (outer − inner))^dim.
    pub fn level(&self) -> f64 {
        (0.5 / (self.outer - self.inner)).powi(self.dim as i32)
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| {
            let a = v.abs();
            self.inner < a && a <= self.outer
        })
    }
}

/// Finite discrete law on distinct atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteDist {
    pub atoms: Vec<Point>,
    pub weights: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::invalid("DiscreteDist needs one weight per atom"));
        }
        let dim = atoms[0].len();
        if dim == 0 || atoms.iter().any(|a| a.len() != dim) {
            return Err(Error::invalid("DiscreteDist atoms must share a positive dimension"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("DiscreteDist weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("DiscreteDist weights sum to {total}, not 1")));
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].contains(a) {
                return Err(Error::invalid("DiscreteDist atoms must be distinct"));
            }
        }
        Ok(Self { atoms, weights })
    }

    /// Atoms `0, 1, …, k−1` on the real line with the given weights.
    pub fn on_integers(weights: Vec<f64>) -> Result<Self> {
        let atoms = (0..weights.len()).map(|i| vec![i as f64]).collect();
        Self::new(atoms, weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn mass_at(&self, x: &[f64]) -> f64 {
        self.atoms
            .iter()
            .position(|a| a.as_slice() == x)
            .map_or(0.0, |i| self.weights[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Distribution {
    Gaussian1(Gaussian1),
    GaussianNd(GaussianNd),
    UniformBox(UniformBox),
    RingUniform(RingUniform),
    Discrete(DiscreteDist),
}

impl From<Gaussian1> for Distribution {
    fn from(g: Gaussian1) -> Self {
        Distribution::Gaussian1(g)
    }
}

impl From<GaussianNd> for Distribution {
    fn from(g: GaussianNd) -> Self {
        Distribution::GaussianNd(g)
    }
}

impl From<UniformBox> for Distribution {
    fn from(b: UniformBox) -> Self {
        Distribution::UniformBox(b)
    }
}

impl From<RingUniform> for Distribution {
    fn from(r: RingUniform) -> Self {
        Distribution::RingUniform(r)
    }
}

impl From<DiscreteDist> for Distribution {
    fn from(d: DiscreteDist) -> Self {
        Distribution::Discrete(d)
    }
}

impl Distribution {
    pub fn dim(&self) -> usize {
        match self {
            Distribution::Gaussian1(_) => 1,
            Distribution::GaussianNd(g) => g.dim(),
            Distribution::UniformBox(b) => b.lo.len(),
            Distribution::RingUniform(r) => r.dim,
            Distribution::Discrete(d) => d.atoms[0].len(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Re-checks the constructor invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Gaussian1(g) => Gaussian1::new(g.mu, g.sigma).map(drop),
            Distribution::GaussianNd(_) => Ok(()),
            Distribution::UniformBox(b) => UniformBox::new(b.lo.clone(), b.hi.clone()).map(drop),
            Distribution::RingUniform(r) => RingUniform::new(r.inner, r.outer, r.dim).map(drop),
            Distribution::Discrete(d) => DiscreteDist::new(d.atoms.clone(), d.weights.clone()).map(drop),
        }
    }

    /// Natural log of the density; `-inf` outside the support.
    pub fn ln_density(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.ln_density_unchecked(x))
    }

    pub(crate) fn ln_density_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Distribution::Gaussian1(g) => g.ln_pdf(x[0]),
            Distribution::GaussianNd(g) => g.ln_pdf(x),
            Distribution::UniformBox(b) => {
                if b.contains(x) {
                    -b.volume().ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Distribution::RingUniform(r) => {
                if r.contains(x) {
                    r.level().ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Distribution::Discrete(d) => d.mass_at(x).ln(),
        }
    }

    /// Density at `x` (probability mass for discrete laws); zero off support.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            Distribution::Gaussian1(g) => g.pdf(x[0]),
            Distribution::UniformBox(b) => {
                if b.contains(x) {
                    b.lo.iter().zip(&b.hi).map(|(l, h)| (h - l).recip()).product()
                } else {
                    0.0
                }
            }
            Distribution::RingUniform(r) => {
                if r.contains(x) {
                    r.level()
                } else {
                    0.0
                }
            }
            Distribution::Discrete(d) => d.mass_at(x),
            Distribution::GaussianNd(g) => g.ln_pdf(x).exp(),
        })
    }

    /// Whether `x` lies in the support, i.e. has positive density.
    pub fn support_contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(match self {
            Distribution::Gaussian1(_) | Distribution::GaussianNd(_) => x.iter().all(|v| v.is_finite()),
            Distribution::UniformBox(b) => b.contains(x),
            Distribution::RingUniform(r) => r.contains(x),
            Distribution::Discrete(d) => d.mass_at(x) > 0.0,
        })
    }

    /// Per-dimension bounds of the support, `None` for unbounded families.
    pub fn support_bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Distribution::Gaussian1(_) | Distribution::GaussianNd(_) => None,
            Distribution::UniformBox(b) => Some((b.lo.clone(), b.hi.clone())),
            Distribution::RingUniform(r) => Some((vec![-r.outer; r.dim], vec![r.outer; r.dim])),
            Distribution::Discrete(d) => {
                let dim = d.atoms[0].len();
                let lo = (0..dim).map(|i| d.atoms.iter().map(|a| a[i]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..dim).map(|i| d.atoms.iter().map(|a| a[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
                Some((lo, hi))
            }
        }
    }

    /// Per-dimension (mean, standard deviation) for Gaussian families.
    pub fn gaussian_marginals(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Distribution::Gaussian1(g) => Some(vec![(g.mu, g.sigma)]),
            Distribution::GaussianNd(g) => Some(
                (0..g.dim())
                    .map(|i| (g.mean()[i], g.covariance()[(i, i)].sqrt()))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Draws one point.
    pub fn sample_one(&self, rng: &mut StreamRng) -> Point {
        match self {
            Distribution::Gaussian1(g) => {
                let z: f64 = rng.sample(StandardNormal);
                vec![g.mu + g.sigma * z]
            }
            Distribution::GaussianNd(g) => g.sample_into(rng),
            Distribution::UniformBox(b) => b
                .lo
                .iter()
                .zip(&b.hi)
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect(),
            Distribution::RingUniform(r) => (0..r.dim)
                .map(|_| {
                    // 1 - u lies in (0, 1], so the magnitude lands in (inner, outer].
                    let mag = r.inner + (r.outer - r.inner) * (1.0 - rng.random::<f64>());
                    if rng.random::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect(),
            Distribution::Discrete(d) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (atom, w) in d.atoms.iter().zip(&d.weights) {
                    acc += w;
                    if u < acc {
                        return atom.clone();
                    }
                }
                let last = d.weights.iter().rposition(|w| *w > 0.0).unwrap_or(d.len() - 1);
                d.atoms[last].clone()
            }
        }
    }

    /// `n` i.i.d. draws from stream 0 of `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<Point> {
        self.sample_stream(seed, 0, n)
    }

    /// `n` i.i.d. draws from stream `stream` of `seed`.
    pub fn sample_stream(&self, seed: u64, stream: u64, n: usize) -> Vec<Point> {
        let mut rng = stream_rng(seed, stream);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with(&self, rng: &mut StreamRng, n: usize) -> Vec<Point> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ring() -> Distribution {
        RingUniform::new(0.1, 0.2, 2).unwrap().into()
    }

    fn square() -> Distribution {
        UniformBox::symmetric(0.2, 2).unwrap().into()
    }

    #[test]
    fn densities_at_reference_points() {
        let g: Distribution = Gaussian1::new(0.0, 1.0).unwrap().into();
        assert_relative_eq!(g.density(&[0.0]).unwrap(), 0.398_942_280_401_432_7, max_relative = 1e-15);
        assert_relative_eq!(ring().density(&[0.15, -0.15]).unwrap(), 25.0, max_relative = 1e-12);
        assert_relative_eq!(square().density(&[0.0, 0.0]).unwrap(), 6.25, max_relative = 1e-12);
    }

    #[test]
    fn ring_boundaries() {
        let r = ring();
        assert!(!r.support_contains(&[0.05, 0.15]).unwrap());
        assert!(!r.support_contains(&[0.1, 0.15]).unwrap());
        assert!(r.support_contains(&[0.2, -0.2]).unwrap());
        assert!(!r.support_contains(&[0.2000001, 0.15]).unwrap());
        assert_eq!(r.density(&[0.1, 0.15]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert_eq!(
            square().density(&[0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
        assert!(ring().support_contains(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn gaussian_nd_contains_every_finite_point() {
        let g: Distribution = GaussianNd::new(DVector::from_vec(vec![0.0, 1.0]), DMatrix::identity(2, 2))
            .unwrap()
            .into();
        assert!(g.support_contains(&[1e6, -1e6]).unwrap());
        assert!(!g.support_contains(&[f64::NAN, 0.0]).unwrap());
    }

    #[test]
    fn gaussian_nd_matches_product_of_1d() {
        let g = GaussianNd::new(
            DVector::from_vec(vec![0.5, -1.0]),
            DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.25]),
        )
        .unwrap();
        let a = Gaussian1::new(0.5, 2.0).unwrap();
        let b = Gaussian1::new(-1.0, 0.5).unwrap();
        let x = [1.3, -0.7];
        assert_relative_eq!(g.ln_pdf(&x), a.ln_pdf(x[0]) + b.ln_pdf(x[1]), max_relative = 1e-13);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Gaussian1::new(0.0, 0.0).is_err());
        assert!(UniformBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(RingUniform::new(0.2, 0.1, 2).is_err());
        assert!(DiscreteDist::on_integers(vec![0.5, 0.4]).is_err());
        assert!(DiscreteDist::new(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5]).is_err());
        let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianNd::new(DVector::zeros(2), not_pd).is_err());
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        for d in [ring(), square(), Gaussian1::new(0.3, 2.0).unwrap().into()] {
            assert_eq!(d.sample(11, 64), d.sample(11, 64));
            assert_ne!(d.sample(11, 64), d.sample(12, 64));
        }
    }

    #[test]
    fn box_sample_mean_is_centred() {
        let n = 100_000;
        let pts = square().sample(5, n);
        let tol = 3.0 * (0.2 / 3f64.sqrt()) / (n as f64).sqrt();
        for i in 0..2 {
            let mean = pts.iter().map(|p| p[i]).sum::<f64>() / n as f64;
            assert!(mean.abs() < tol, "coordinate {i} mean {mean} outside ±{tol}");
        }
    }

    #[test]
    fn ring_samples_lie_in_support() {
        let r = ring();
        for p in r.sample(3, 20_000) {
            assert_eq!(r.density(&p).unwrap(), 25.0);
        }
    }

    #[test]
    fn box_covers_ring_support() {
        let (r, b) = (ring(), square());
        for p in r.sample(9, 20_000) {
            assert!(b.support_contains(&p).unwrap());
        }
        // The support's extreme corners are included too.
        for p in [[0.2, 0.2], [-0.2, 0.2], [0.2, -0.2], [-0.2, -0.2]] {
            assert!(r.support_contains(&p).unwrap() && b.support_contains(&p).unwrap());
        }
    }

    #[test]
    fn gaussian_sample_std() {
        let g: Distribution = Gaussian1::new(0.15, 2.03).unwrap().into();
        let n = 1_000_000;
        let xs: Vec<f64> = g.sample(21, n).into_iter().map(|p| p[0]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() / 2.03 - 1.0).abs() < 0.01);
    }

    #[test]
    fn gaussian_nd_sample_covariance() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 2.0]);
        let g: Distribution = GaussianNd::new(DVector::from_vec(vec![1.0, -1.0]), sigma.clone()).unwrap().into();
        let n = 200_000;
        let pts = g.sample(4, n);
        let m: Vec<f64> = (0..2).map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / n as f64).collect();
        let c01 = pts.iter().map(|p| (p[0] - m[0]) * (p[1] - m[1])).sum::<f64>() / n as f64;
        assert!((m[0] - 1.0).abs() < 0.02 && (m[1] + 1.0).abs() < 0.02);
        assert!((c01 - 0.6).abs() < 0.02);
    }

    #[test]
    fn discrete_sampling_frequencies() {
        let d: Distribution = DiscreteDist::on_integers(vec![0.2, 0.5, 0.3]).unwrap().into();
        let n = 100_000;
        let mut counts = [0usize; 3];
        for p in d.sample(8, n) {
            counts[p[0] as usize] += 1;
        }
        for (c, w) in counts.iter().zip([0.2, 0.5, 0.3]) {
            assert!((*c as f64 / n as f64 - w).abs() < 0.01);
        }
        assert_eq!(d.density(&[1.0]).unwrap(), 0.5);
        assert_eq!(d.density(&[1.5]).unwrap(), 0.0);
    }

    #[test]
    fn serde_round_trip_keeps_factorisation() {
        let g: Distribution = GaussianNd::new(
            DVector::from_vec(vec![0.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
        )
        .unwrap()
        .into();
        let s = serde_json::to_string(&g).unwrap();
        let back: Distribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let raw: Distribution = serde_json::from_str(r#"{"family":"gaussian1","mu":0,"sigma":-1}"#).unwrap();
        assert!(raw.validate().is_err());
        assert!(g.validate().is_ok());
    }
}
