//! Randomized MPC with sampled constraints, and its Monte Carlo check.
//!
//! The plant is x_{k+1} = A x_k + B u_k + w under u_k = K x_k + c_k, and the
//! decision is the correction sequence c. Each trial samples N disturbances
//! from the nominal law, solves the scenario program, then estimates the
//! probability that the open-loop plan violates the joint constraint under
//! both the nominal and the true law.
//!
//! Every bound of the program is affine in (c, ω), ω being the stacked
//! disturbance: a·c + h·ω ≤ g. All scenario copies of a row share `a`, so a
//! row only keeps its tightest copy, and the QP has at most 6·N_pred rows
//! whatever N is.

mod qp;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::discrepancy::DiscrepancyKind;
use crate::distributions::{Distribution, RingUniform, UniformBox};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{stream_rng, StreamRng};
use crate::scenario::{self, ScenarioParams};

/// A bound counts as violated when exceeded by more than this.
pub const VIOLATION_TOL: f64 = 1e-12;

/// Two inputs differing by more than this (max norm) are different solutions.
pub const SOLUTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSystem {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub k: [f64; 2],
}

impl Default for LinearSystem {
    /// Double integrator under a stabilizing feedback.
    fn default() -> Self {
        Self { a: [[1.0, 1.0], [0.0, 1.0]], b: [0.5, 1.0], k: [-0.43, -1.03] }
    }
}

impl LinearSystem {
    fn a_mat(&self) -> Matrix2<f64> {
        Matrix2::new(self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1])
    }

    /// Next state and applied input for state `x`, correction `c`, disturbance `w`.
    pub fn step(&self, x: [f64; 2], c: f64, w: [f64; 2]) -> ([f64; 2], f64) {
        let u = self.k[0] * x[0] + self.k[1] * x[1] + c;
        let next = self.a_mat() * Vector2::new(x[0], x[1]) + Vector2::new(self.b[0], self.b[1]) * u;
        ([next[0] + w[0], next[1] + w[1]], u)
    }

    fn validate(&self) -> Result<()> {
        let finite = self.a.iter().flatten().chain(&self.b).chain(&self.k).all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("system matrices must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSet {
    pub state_lo: [f64; 2],
    pub state_hi: [f64; 2],
    pub input_lo: f64,
    pub input_hi: f64,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self { state_lo: [-0.5, -0.5], state_hi: [2.0, 2.0], input_lo: -1.0, input_hi: 1.0 }
    }
}

impl ConstraintSet {
    /// No bounds at all.
    pub fn unbounded() -> Self {
        Self {
            state_lo: [f64::NEG_INFINITY; 2],
            state_hi: [f64::INFINITY; 2],
            input_lo: f64::NEG_INFINITY,
            input_hi: f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = (0..2).all(|i| self.state_lo[i] < self.state_hi[i]) && self.input_lo < self.input_hi;
        if !ok {
            return Err(Error::invalid("constraint bounds need lo < hi componentwise"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostWeights {
    /// State weight, symmetric positive semidefinite.
    pub q: [[f64; 2]; 2],
    /// Input weight, positive.
    pub r: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { q: [[1.0, 0.0], [0.0, 1.0]], r: 1.0 }
    }
}

impl CostWeights {
    fn validate(&self) -> Result<()> {
        let q = Matrix2::new(self.q[0][0], self.q[0][1], self.q[1][0], self.q[1][1]);
        if !(self.r > 0.0) || q != q.transpose() || !q.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("cost needs a symmetric Q and R > 0"));
        }
        if SymmetricEigen::new(q).eigenvalues.min() < -1e-12 {
            return Err(Error::invalid("cost weight Q must be positive semidefinite"));
        }
        Ok(())
    }
}

/// How a scenario's disturbance enters the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceModel {
    /// One draw w, added at every step.
    #[default]
    TimeInvariant,
    /// An independent draw per step.
    PerStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RmpcExperiment {
    pub system: LinearSystem,
    pub constraints: ConstraintSet,
    /// Prediction horizon N_pred, also the number of decision variables.
    pub horizon: usize,
    pub x0: [f64; 2],
    pub n_scenarios: usize,
    pub nominal: Distribution,
    pub truth: Distribution,
    /// RVD radius used for the robust overlays.
    pub m_rvd: f64,
    pub n_trials: usize,
    pub n_eval: usize,
    pub seed: u64,
    pub cost: CostWeights,
    pub disturbance: DisturbanceModel,
}

impl Default for RmpcExperiment {
    fn default() -> Self {
        Self {
            system: LinearSystem::default(),
            constraints: ConstraintSet::default(),
            horizon: 2,
            x0: [1.5, 0.4],
            n_scenarios: 1000,
            nominal: UniformBox::symmetric(0.2, 2).expect("valid box").into(),
            truth: RingUniform::new(0.1, 0.2, 2).expect("valid ring").into(),
            m_rvd: 4.0,
            n_trials: 800,
            n_eval: 40_000,
            seed: 0,
            cost: CostWeights::default(),
            disturbance: DisturbanceModel::TimeInvariant,
        }
    }
}

impl RmpcExperiment {
    /// The default experiment with 200 trials of 10⁴ evaluation draws.
    pub fn desk_scale() -> Self {
        Self { n_trials: 200, n_eval: 10_000, ..Self::default() }
    }

    /// Support dimension d = N_pred · n_u with one input.
    pub fn support_dim(&self) -> usize {
        self.horizon
    }

    pub fn scenario_params(&self) -> Result<ScenarioParams> {
        ScenarioParams::for_mpc(self.n_scenarios as u64, self.horizon as u64, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if self.n_scenarios < self.support_dim() {
            return Err(Error::invalid(format!(
                "need at least {} scenarios, got {}",
                self.support_dim(),
                self.n_scenarios
            )));
        }
        if self.n_trials == 0 || self.n_eval == 0 {
            return Err(Error::invalid("n_trials and n_eval must be at least 1"));
        }
        if !self.x0.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("x0 must be finite"));
        }
        DiscrepancyKind::Rvd.validate_radius(self.m_rvd)?;
        self.system.validate()?;
        self.constraints.validate()?;
        self.cost.validate()?;
        for d in [&self.nominal, &self.truth] {
            d.validate()?;
            if d.dim() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, got: d.dim() });
            }
        }
        Ok(())
    }

    /// Length of the stacked disturbance ω of one scenario.
    fn omega_len(&self) -> usize {
        match self.disturbance {
            DisturbanceModel::TimeInvariant => 2,
            DisturbanceModel::PerStep => 2 * self.horizon,
        }
    }

    fn draw_omega(&self, dist: &Distribution, rng: &mut StreamRng) -> Vec<f64> {
        match self.disturbance {
            DisturbanceModel::TimeInvariant => dist.sample_one(rng),
            DisturbanceModel::PerStep => (0..self.horizon).flat_map(|_| dist.sample_one(rng)).collect(),
        }
    }

    fn per_step(&self, omega: &[f64]) -> Vec<[f64; 2]> {
        match self.disturbance {
            DisturbanceModel::TimeInvariant => vec![[omega[0], omega[1]]; self.horizon],
            DisturbanceModel::PerStep => omega.chunks(2).map(|w| [w[0], w[1]]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// x_1 … x_{N_pred}.
    pub states: Vec<[f64; 2]>,
    /// u_0 … u_{N_pred−1}.
    pub inputs: Vec<f64>,
}

/// Rollout with the same disturbance `w` at every step.
pub fn rollout(sys: &LinearSystem, x0: [f64; 2], c: &[f64], w: [f64; 2]) -> Trajectory {
    rollout_per_step(sys, x0, c, &vec![w; c.len()])
}

/// Rollout with disturbance `ws[k]` entering at step k.
pub fn rollout_per_step(sys: &LinearSystem, x0: [f64; 2], c: &[f64], ws: &[[f64; 2]]) -> Trajectory {
    assert_eq!(c.len(), ws.len(), "one disturbance per step");
    let mut x = x0;
    let mut states = Vec::with_capacity(c.len());
    let mut inputs = Vec::with_capacity(c.len());
    for (&ck, &w) in c.iter().zip(ws) {
        let (next, u) = sys.step(x, ck, w);
        inputs.push(u);
        states.push(next);
        x = next;
    }
    Trajectory { states, inputs }
}

/// One bound of the program: a·c + h·ω ≤ g.
#[derive(Debug, Clone)]
struct Row {
    label: String,
    a: DVector<f64>,
    h: Vec<f64>,
    g: f64,
}

/// Prediction outputs (x_1..x_n componentwise, then u_0..u_{n−1}) as affine
/// functions of (c, ω), read off the rollout by linearity.
struct Outputs {
    offset: Vec<f64>,
    dc: Vec<Vec<f64>>,
    dw: Vec<Vec<f64>>,
}

fn flatten(t: &Trajectory) -> Vec<f64> {
    t.states.iter().flat_map(|s| *s).chain(t.inputs.iter().copied()).collect()
}

fn outputs(exp: &RmpcExperiment) -> Outputs {
    let n = exp.horizon;
    let m = exp.omega_len();
    let zero_c = vec![0.0; n];
    let zero_w = vec![0.0; m];
    let run = |x0: [f64; 2], c: &[f64], w: &[f64]| flatten(&rollout_per_step(&exp.system, x0, c, &exp.per_step(w)));
    let offset = run(exp.x0, &zero_c, &zero_w);
    let dc = (0..n)
        .map(|j| {
            let mut e = zero_c.clone();
            e[j] = 1.0;
            run([0.0; 2], &e, &zero_w)
        })
        .collect();
    let dw = (0..m)
        .map(|j| {
            let mut e = zero_w.clone();
            e[j] = 1.0;
            run([0.0; 2], &zero_c, &e)
        })
        .collect();
    Outputs { offset, dc, dw }
}

/// The deterministic part of a scenario program: cost and row templates.
pub struct ScenarioProgram {
    rows: Vec<Row>,
    h: DMatrix<f64>,
    f: DVector<f64>,
    horizon: usize,
}

impl ScenarioProgram {
    pub fn new(exp: &RmpcExperiment) -> Result<Self> {
        exp.validate()?;
        let n = exp.horizon;
        let out = outputs(exp);
        let n_out = out.offset.len();
        let coef = |i: usize| DVector::from_fn(n, |j, _| out.dc[j][i]);
        let dist = |i: usize| out.dw.iter().map(|d| d[i]).collect::<Vec<f64>>();

        let mut rows = Vec::new();
        let mut push = |label: String, i: usize, lo: f64, hi: f64| {
            if hi.is_finite() {
                rows.push(Row { label: format!("{label} <= {hi}"), a: coef(i), h: dist(i), g: hi - out.offset[i] });
            }
            if lo.is_finite() {
                let h = dist(i).into_iter().map(|v| -v).collect();
                rows.push(Row { label: format!("{label} >= {lo}"), a: -coef(i), h, g: out.offset[i] - lo });
            }
        };
        for k in 0..n {
            for comp in 0..2 {
                let (lo, hi) = (exp.constraints.state_lo[comp], exp.constraints.state_hi[comp]);
                push(format!("x{}[{}]", k + 1, comp), 2 * k + comp, lo, hi);
            }
        }
        for k in 0..n {
            push(format!("u{k}"), 2 * n + k, exp.constraints.input_lo, exp.constraints.input_hi);
        }

        // J = Σ x̄_kᵀQx̄_k + R Σ ū_k² = (y0 + Yc)ᵀW(y0 + Yc) over the nominal prediction.
        let y = DMatrix::from_fn(n_out, n, |i, j| out.dc[j][i]);
        let y0 = DVector::from_column_slice(&out.offset);
        let mut w = DMatrix::zeros(n_out, n_out);
        for k in 0..n {
            for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                w[(2 * k + r, 2 * k + c)] = exp.cost.q[r][c];
            }
            w[(2 * n + k, 2 * n + k)] = exp.cost.r;
        }
        let h = y.transpose() * &w * &y;
        let f = y.transpose() * &w * y0;
        Ok(Self { rows, h, f, horizon: n })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row_labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    /// Nominal-prediction cost of `c`, up to the constant term.
    pub fn cost(&self, c: &[f64]) -> f64 {
        qp::cost(&self.h, &self.f, &DVector::from_column_slice(c))
    }

    /// Minimizer of the cost without any constraint.
    pub fn unconstrained(&self) -> Vec<f64> {
        let c = self.h.clone().cholesky().expect("cost is strictly convex").solve(&-&self.f);
        c.iter().copied().collect()
    }

    /// Tightest right-hand side of every row over `scenarios`.
    pub fn tighten(&self, scenarios: &[Vec<f64>]) -> Tightened {
        let per_row = self
            .rows
            .iter()
            .map(|row| {
                let mut t = RowBound { best: f64::INFINITY, arg: usize::MAX, second: f64::INFINITY };
                for (j, omega) in scenarios.iter().enumerate() {
                    let rhs = row.g - row.h.iter().zip(omega).map(|(h, w)| h * w).sum::<f64>();
                    if rhs < t.best {
                        t.second = t.best;
                        t.best = rhs;
                        t.arg = j;
                    } else if rhs < t.second {
                        t.second = rhs;
                    }
                }
                t
            })
            .collect();
        Tightened { per_row }
    }

    /// Solves the program with the row bounds `b`.
    fn solve_bounds(&self, b: &[f64]) -> Result<Vec<f64>> {
        let a: Vec<DVector<f64>> = self.rows.iter().map(|r| r.a.clone()).collect();
        // A row without decision dependence is either always met or never.
        let mut blocking: Vec<String> = self
            .rows
            .iter()
            .zip(b)
            .filter(|(r, &bi)| r.a.amax() == 0.0 && bi < -qp::FEAS_TOL * (1.0 + bi.abs()))
            .map(|(r, _)| r.label.clone())
            .collect();
        if blocking.is_empty() {
            if let Some(sol) = qp::solve(&self.h, &self.f, &a, b) {
                return Ok(sol.c.iter().copied().collect());
            }
            let free = DVector::from_vec(self.unconstrained());
            blocking = self
                .rows
                .iter()
                .zip(b)
                .filter(|(r, &bi)| r.a.dot(&free) > bi)
                .map(|(r, _)| r.label.clone())
                .collect();
        }
        Err(Error::Infeasible { blocking })
    }

    /// c* for the given scenarios.
    pub fn solve(&self, scenarios: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.solve_tightened(&self.tighten(scenarios))
    }

    pub fn solve_tightened(&self, t: &Tightened) -> Result<Vec<f64>> {
        let b: Vec<f64> = t.per_row.iter().map(|r| r.best).collect();
        self.solve_bounds(&b)
    }

    /// Scenarios whose removal changes c*. Only scenarios attaining the
    /// tightest bound of an active row can matter; each is removed in turn.
    pub fn support_scenarios(&self, t: &Tightened, c_star: &[f64]) -> Result<Vec<usize>> {
        let c = DVector::from_column_slice(c_star);
        let mut candidates: Vec<usize> = self
            .rows
            .iter()
            .zip(&t.per_row)
            .filter(|(row, rb)| {
                rb.best.is_finite() && (row.a.dot(&c) - rb.best).abs() <= 1e-9 * (1.0 + rb.best.abs())
            })
            .map(|(_, rb)| rb.arg)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let mut support = Vec::new();
        for j in candidates {
            let b: Vec<f64> = t.per_row.iter().map(|r| if r.arg == j { r.second } else { r.best }).collect();
            let other = self.solve_bounds(&b)?;
            let moved = other.iter().zip(c_star).any(|(x, y)| (x - y).abs() > SOLUTION_TOL);
            if moved {
                support.push(j);
            }
        }
        Ok(support)
    }

    /// Largest amount by which `c` exceeds any bound for disturbance `omega`.
    pub fn max_excess(&self, c: &[f64], omega: &[f64]) -> f64 {
        let c = DVector::from_column_slice(c);
        self.rows
            .iter()
            .map(|r| r.a.dot(&c) + r.h.iter().zip(omega).map(|(h, w)| h * w).sum::<f64>() - r.g)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Per-row slack g − a·c, so that violation means h·ω − slack > tol.
    fn slacks(&self, c: &[f64]) -> Vec<f64> {
        let c = DVector::from_column_slice(c);
        self.rows.iter().map(|r| r.g - r.a.dot(&c)).collect()
    }

    fn violates(&self, slacks: &[f64], omega: &[f64]) -> bool {
        self.rows
            .iter()
            .zip(slacks)
            .any(|(r, s)| r.h.iter().zip(omega).map(|(h, w)| h * w).sum::<f64>() - s > VIOLATION_TOL)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

#[derive(Debug, Clone, Copy)]
struct RowBound {
    best: f64,
    arg: usize,
    second: f64,
}

/// Row bounds after taking the tightest scenario copy of every row.
#[derive(Debug, Clone)]
pub struct Tightened {
    per_row: Vec<RowBound>,
}

/// c* of the scenario program for `scenarios` (stacked disturbances).
pub fn solve_scenario_program(exp: &RmpcExperiment, scenarios: &[Vec<f64>]) -> Result<Vec<f64>> {
    ScenarioProgram::new(exp)?.solve(scenarios)
}

/// Fraction of `n_eval` draws from `dist` (stream 0 of `seed`) whose rollout
/// under `c` breaks the joint constraint.
pub fn violation_probability(exp: &RmpcExperiment, c: &[f64], dist: &Distribution, n_eval: usize, seed: u64) -> Result<f64> {
    if n_eval == 0 {
        return Err(Error::invalid("n_eval must be at least 1"));
    }
    let program = ScenarioProgram::new(exp)?;
    if c.len() != exp.horizon {
        return Err(Error::DimensionMismatch { expected: exp.horizon, got: c.len() });
    }
    Ok(estimate(exp, &program, c, dist, n_eval, &mut stream_rng(seed, 0)))
}

fn estimate(exp: &RmpcExperiment, program: &ScenarioProgram, c: &[f64], dist: &Distribution, n_eval: usize, rng: &mut StreamRng) -> f64 {
    let slacks = program.slacks(c);
    let hits = (0..n_eval).filter(|_| program.violates(&slacks, &exp.draw_omega(dist, rng))).count();
    hits as f64 / n_eval as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub c_star: Vec<f64>,
    pub support_count: usize,
    pub violation_nominal: f64,
    pub violation_truth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub feasible_trials: usize,
    pub mean_nominal: f64,
    pub stderr_nominal: f64,
    pub mean_truth: f64,
    pub stderr_truth: f64,
    pub max_support_count: usize,
    /// d/(N+1).
    pub expected_nominal: f64,
    /// Expected violation bound under every member of the RVD ball.
    pub expected_dr_rvd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: RmpcExperiment,
    pub support_dim: usize,
    pub trials: Vec<TrialOutcome>,
    /// Trials whose sampled program had no solution, with the blocking rows.
    pub infeasible: Vec<(usize, Vec<String>)>,
    pub summary: Summary,
}

/// Runs every trial. Trial t draws its scenarios from stream 2t and its
/// evaluation draws from stream 2t + 1; the nominal and truth estimates use
/// the same evaluation stream, so differences come from the laws alone.
pub fn run_experiment(exp: &RmpcExperiment) -> Result<ExperimentReport> {
    let program = ScenarioProgram::new(exp)?;
    let params = exp.scenario_params()?;
    let outcomes = par::map_range(exp.n_trials, |t| -> Result<std::result::Result<TrialOutcome, Vec<String>>> {
        let mut rng = stream_rng(exp.seed, 2 * t as u64);
        let scenarios: Vec<Vec<f64>> = (0..exp.n_scenarios).map(|_| exp.draw_omega(&exp.nominal, &mut rng)).collect();
        let tightened = program.tighten(&scenarios);
        let c_star = match program.solve_tightened(&tightened) {
            Ok(c) => c,
            Err(Error::Infeasible { blocking }) => return Ok(Err(blocking)),
            Err(e) => return Err(e),
        };
        let support_count = program.support_scenarios(&tightened, &c_star)?.len();
        let eval_stream = 2 * t as u64 + 1;
        let violation_nominal =
            estimate(exp, &program, &c_star, &exp.nominal, exp.n_eval, &mut stream_rng(exp.seed, eval_stream));
        let violation_truth =
            estimate(exp, &program, &c_star, &exp.truth, exp.n_eval, &mut stream_rng(exp.seed, eval_stream));
        Ok(Ok(TrialOutcome { trial: t, c_star, support_count, violation_nominal, violation_truth }))
    });

    let mut trials = Vec::new();
    let mut infeasible = Vec::new();
    for (t, o) in outcomes.into_iter().enumerate() {
        match o? {
            Ok(outcome) => trials.push(outcome),
            Err(blocking) => infeasible.push((t, blocking)),
        }
    }
    let (mean_nominal, stderr_nominal) = mean_stderr(trials.iter().map(|t| t.violation_nominal));
    let (mean_truth, stderr_truth) = mean_stderr(trials.iter().map(|t| t.violation_truth));
    let summary = Summary {
        feasible_trials: trials.len(),
        mean_nominal,
        stderr_nominal,
        mean_truth,
        stderr_truth,
        max_support_count: trials.iter().map(|t| t.support_count).max().unwrap_or(0),
        expected_nominal: scenario::expected_nominal(params),
        expected_dr_rvd: scenario::expected_dr_rvd(params, exp.m_rvd)?,
    };
    Ok(ExperimentReport { config: exp.clone(), support_dim: exp.support_dim(), trials, infeasible, summary })
}

fn mean_stderr(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` increasing edges. The last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return Err(Error::invalid(format!("histogram needs bins >= 1 and lo < hi, got {bins} on [{lo}, {hi}]")));
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            if v < lo || v > hi {
                continue;
            }
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Counts normalized to a density over the binned range.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c as f64 / (total * (e[1] - e[0])))
            .collect()
    }
}

/// Analytic curves at one risk level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub eps: f64,
    pub density_nominal: f64,
    pub density_dr_rvd: f64,
    /// 1 − F_N(ε): the bound on ℙ{V ≤ ε} read as a CDF.
    pub cdf_nominal: f64,
    /// 1 − F_N(ε/M).
    pub cdf_dr_rvd: f64,
}

/// Empirical survival functions against their analytic bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCheck {
    pub grid: Vec<f64>,
    pub band: f64,
    /// max over the grid of S_emp(ε) − bound(ε) − band; ≤ 0 means dominated.
    pub excess_nominal: f64,
    pub excess_truth: f64,
}

impl SurvivalCheck {
    pub fn nominal_dominated(&self) -> bool {
        self.excess_nominal <= 0.0
    }

    pub fn truth_dominated(&self) -> bool {
        self.excess_truth <= 0.0
    }
}

impl ExperimentReport {
    pub fn violations_nominal(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.violation_nominal).collect()
    }

    pub fn violations_truth(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.violation_truth).collect()
    }

    /// Upper end of the ε range shown: past every observation and three
    /// times the robust expected bound.
    pub fn eps_range(&self) -> f64 {
        let observed = self.violations_truth().into_iter().chain(self.violations_nominal()).fold(0.0, f64::max);
        (1.25 * observed).max(3.0 * self.summary.expected_dr_rvd).min(1.0)
    }

    /// Histograms of both estimates on shared bins over [0, eps_range].
    pub fn histograms(&self, bins: usize) -> Result<(Histogram, Histogram)> {
        let hi = self.eps_range();
        Ok((
            Histogram::new(&self.violations_nominal(), 0.0, hi, bins)?,
            Histogram::new(&self.violations_truth(), 0.0, hi, bins)?,
        ))
    }

    pub fn overlays(&self, grid: &[f64]) -> Result<Vec<OverlayRow>> {
        let p = self.config.scenario_params()?;
        let m = self.config.m_rvd;
        grid.iter()
            .map(|&eps| {
                Ok(OverlayRow {
                    eps,
                    density_nominal: scenario::beta_density_nominal(p, eps)?,
                    density_dr_rvd: scenario::dr_density_rvd(p, m, eps)?,
                    cdf_nominal: 1.0 - scenario::two_level_nominal(p, eps)?,
                    cdf_dr_rvd: 1.0 - scenario::two_level_dr(p, DiscrepancyKind::Rvd, m, eps)?,
                })
            })
            .collect()
    }

    /// Checks S_emp(ε) ≤ bound(ε) + DKW band on `n_grid` points of [0, eps_range].
    pub fn survival_check(&self, n_grid: usize, confidence: f64) -> Result<SurvivalCheck> {
        if n_grid < 2 || !(0.0..1.0).contains(&confidence) {
            return Err(Error::invalid("survival check needs n_grid >= 2 and confidence in [0, 1)"));
        }
        if self.trials.is_empty() {
            return Err(Error::invalid("no feasible trials to check"));
        }
        let p = self.config.scenario_params()?;
        let hi = self.eps_range();
        let grid: Vec<f64> = (0..n_grid).map(|i| hi * i as f64 / (n_grid - 1) as f64).collect();
        let band = scenario::dkw_epsilon(self.trials.len(), confidence);
        let survival = |v: &[f64], eps: f64| v.iter().filter(|&&x| x > eps).count() as f64 / v.len() as f64;
        let (nom, tru) = (self.violations_nominal(), self.violations_truth());
        let mut excess_nominal = f64::NEG_INFINITY;
        let mut excess_truth = f64::NEG_INFINITY;
        for &eps in &grid {
            let bn = scenario::two_level_nominal(p, eps)?;
            let bt = scenario::two_level_dr(p, DiscrepancyKind::Rvd, self.config.m_rvd, eps)?;
            excess_nominal = excess_nominal.max(survival(&nom, eps) - bn - band);
            excess_truth = excess_truth.max(survival(&tru, eps) - bt - band);
        }
        Ok(SurvivalCheck { grid, band, excess_nominal, excess_truth })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RmpcExperiment {
        RmpcExperiment { n_trials: 6, n_eval: 2000, n_scenarios: 200, ..RmpcExperiment::default() }
    }

    #[test]
    fn rollout_examples() {
        let sys = LinearSystem::default();
        let t = rollout(&sys, [0.0; 2], &[0.0, 0.0], [0.0; 2]);
        assert!(t.states.iter().flatten().chain(&t.inputs).all(|&v| v == 0.0));

        let t = rollout(&sys, [0.0; 2], &[0.0, 0.0], [0.1, 0.1]);
        assert_eq!(t.states[0], [0.1, 0.1]);
        // (A + BK) = [[1 − 0.215, 1 − 0.515], [−0.43, 1 − 1.03]].
        let x2 = [0.785 * 0.1 + 0.485 * 0.1 + 0.1, -0.43 * 0.1 - 0.03 * 0.1 + 0.1];
        assert!((t.states[1][0] - x2[0]).abs() < 1e-14 && (t.states[1][1] - x2[1]).abs() < 1e-14);

        let x0 = [1.5, 0.4];
        let t = rollout(&sys, x0, &[0.2, -0.1], [0.0; 2]);
        assert_eq!(t.inputs[0], -0.43 * 1.5 - 1.03 * 0.4 + 0.2);
    }

    #[test]
    fn affine_rows_match_rollout() {
        let exp = small();
        let program = ScenarioProgram::new(&exp).unwrap();
        assert_eq!(program.n_rows(), 12);
        let c = [0.3, -0.2];
        let w = [0.05, -0.12];
        let t = rollout(&exp.system, exp.x0, &c, w);
        let lim = exp.constraints;
        let mut worst = f64::NEG_INFINITY;
        for s in &t.states {
            for i in 0..2 {
                worst = worst.max(s[i] - lim.state_hi[i]).max(lim.state_lo[i] - s[i]);
            }
        }
        for &u in &t.inputs {
            worst = worst.max(u - lim.input_hi).max(lim.input_lo - u);
        }
        assert!((program.max_excess(&c, &w) - worst).abs() < 1e-14);
    }

    #[test]
    fn interior_optimum_is_unconstrained() {
        let exp = RmpcExperiment { constraints: ConstraintSet::unbounded(), ..small() };
        let program = ScenarioProgram::new(&exp).unwrap();
        assert_eq!(program.n_rows(), 0);
        let scenarios = exp.nominal.sample(1, 10);
        let c = program.solve(&scenarios).unwrap();
        let free = program.unconstrained();
        assert!(c.iter().zip(&free).all(|(a, b)| (a - b).abs() < 1e-12));
        assert_eq!(violation_probability(&exp, &c, &exp.truth, 500, 3).unwrap(), 0.0);
    }

    #[test]
    fn solution_meets_its_scenarios() {
        let exp = small();
        let program = ScenarioProgram::new(&exp).unwrap();
        let scenarios = exp.nominal.sample(11, exp.n_scenarios);
        let c = program.solve(&scenarios).unwrap();
        for w in &scenarios {
            assert!(program.max_excess(&c, w) <= 1e-9);
        }
        // The default start pushes the plan onto sampled bounds.
        let tightened = program.tighten(&scenarios);
        let support = program.support_scenarios(&tightened, &c).unwrap();
        assert!(!support.is_empty() && support.len() <= 2, "{support:?}");
    }

    #[test]
    fn infeasible_reports_blocking_rows() {
        let exp = RmpcExperiment {
            constraints: ConstraintSet { state_lo: [-0.01, -0.01], state_hi: [0.01, 0.01], ..ConstraintSet::default() },
            ..small()
        };
        let scenarios = exp.nominal.sample(2, 50);
        match solve_scenario_program(&exp, &scenarios) {
            Err(Error::Infeasible { blocking }) => assert!(!blocking.is_empty()),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn experiment_is_deterministic_and_truth_equal_nominal_coincides() {
        let exp = small();
        let a = run_experiment(&exp).unwrap();
        let b = par::sequential(|| run_experiment(&exp).unwrap());
        assert_eq!(a, b);

        let same = RmpcExperiment { truth: exp.nominal.clone(), m_rvd: 1.0, ..exp };
        let r = run_experiment(&same).unwrap();
        for t in &r.trials {
            assert_eq!(t.violation_nominal, t.violation_truth);
        }
    }

    #[test]
    fn per_step_model_runs() {
        let exp = RmpcExperiment { disturbance: DisturbanceModel::PerStep, ..small() };
        let r = run_experiment(&exp).unwrap();
        assert!(r.infeasible.is_empty());
        assert!(r.trials.iter().all(|t| t.support_count <= 2));
    }

    #[test]
    fn validation() {
        assert!(RmpcExperiment { horizon: 0, ..small() }.validate().is_err());
        assert!(RmpcExperiment { n_scenarios: 1, ..small() }.validate().is_err());
        let bad_q = CostWeights { q: [[1.0, 2.0], [2.0, 1.0]], r: 1.0 };
        assert!(RmpcExperiment { cost: bad_q, ..small() }.validate().is_err());
        let one_d = crate::distributions::Gaussian1::new(0.0, 1.0).unwrap().into();
        assert!(RmpcExperiment { truth: one_d, ..small() }.validate().is_err());
    }

    #[test]
    fn histogram_bins() {
        let h = Histogram::new(&[0.0, 0.1, 0.25, 0.5, 1.0, 2.0], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![2, 1, 1, 1]);
        assert_eq!(h.edges, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let area: f64 = h.densities().iter().zip(h.edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum();
        assert!((area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn config_roundtrip_and_defaults() {
        let exp = RmpcExperiment::desk_scale();
        let json = serde_json::to_string(&exp).unwrap();
        let back: RmpcExperiment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, exp);
        let partial: RmpcExperiment = serde_json::from_str(r#"{"n_trials": 5}"#).unwrap();
        assert_eq!(partial.n_trials, 5);
        assert_eq!(partial.horizon, 2);
        assert!(serde_json::from_str::<RmpcExperiment>(r#"{"n_trails": 5}"#).is_err());
    }
}
