use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use drcc_core::discrepancy::DiscrepancyKind;
use drcc_core::distributions::Gaussian1;
use drcc_core::nominal_fit::{comparison_table, fit_nominal, FitOptions, GaussianFamily};
use drcc_core::prl::{log_spaced, prl_curve};
use drcc_core::rmpc::{run_experiment, ExperimentReport, Histogram, RmpcExperiment, SurvivalCheck};
use drcc_core::scenario::{self, ScenarioParams};
use drcc_core::{prl, AmbiguitySet};

use crate::output::{emit, Table};
use crate::spec::parse_distribution;
use crate::{Cli, CliError, Command};

pub const OUT_DIR_ENV: &str = "DRCC_OUT_DIR";

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RvdArgs {
    /// Member distribution P.
    #[arg(long)]
    pub p: Option<String>,
    /// Nominal distribution P̂.
    #[arg(long)]
    pub phat: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrlArgs {
    /// rvd, kl, hellinger, chi2, chi2-member or tv.
    #[arg(long)]
    pub kind: Option<String>,
    /// Ambiguity radius M.
    #[arg(long)]
    pub m: Option<f64>,
    /// Risk level ε.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrlCurveArgs {
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub m: Option<f64>,
    /// Number of grid points (default 100).
    #[arg(long)]
    pub points: Option<usize>,
    /// Smallest risk level (default 1e-4).
    #[arg(long)]
    pub eps_min: Option<f64>,
    /// Largest risk level (default 0.9).
    #[arg(long)]
    pub eps_max: Option<f64>,
    /// Fit every kind to the reference family and emit all five curves.
    #[arg(long)]
    pub fig2: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitNominalArgs {
    #[arg(long)]
    pub kind: Option<String>,
    /// `reference` (default), `grid:MU_LO,MU_HI,SIGMA_LO,SIGMA_HI,N_MU,N_SIGMA`
    /// or `list:MU,SIGMA;MU,SIGMA;...`.
    #[arg(long)]
    pub family: Option<String>,
    /// Risk level for the reported PRL (default 0.01).
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Trapezoid nodes for kinds without a closed form.
    #[arg(long)]
    pub grid_nodes: Option<usize>,
    /// Fit all five kinds to the reference family.
    #[arg(long)]
    pub table1: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioBoundArgs {
    /// Number of scenarios N.
    #[arg(long)]
    pub n: Option<u64>,
    /// Support dimension d.
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Robust bound for this kind; nominal when omitted.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub m: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpectedBoundArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub d: Option<u64>,
    /// Nominal bound d/(N+1) when omitted.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub m: Option<f64>,
    /// Integrate numerically even where a closed form exists.
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RmpcArgs {
    /// 800 trials of 40000 evaluation draws instead of 200 of 10000.
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub eval: Option<usize>,
    /// Histogram bins.
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Directory for the histogram, overlay and report files.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
            Some(serde_json::from_str::<Value>(&text)?)
        }
        None => None,
    };
    let table = match &cli.command {
        Command::Rvd(a) => rvd(merged(a, &config)?)?,
        Command::Prl(a) => prl_cmd(merged(a, &config)?)?,
        Command::PrlCurve(a) => prl_curve_cmd(merged(a, &config)?)?,
        Command::FitNominal(a) => fit_cmd(merged(a, &config)?)?,
        Command::ScenarioBound(a) => scenario_bound(merged(a, &config)?)?,
        Command::ExpectedBound(a) => expected_bound(merged(a, &config)?)?,
        Command::Rmpc(a) => rmpc(a, cli.seed, &config)?,
    };
    emit(&table.render(cli.format)?, cli.output.as_deref())
}

/// Config values overlaid by every flag actually given.
fn merged<T: Serialize + DeserializeOwned>(flags: &T, config: &Option<Value>) -> Result<T, CliError> {
    let mut base = config_object(config)?;
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() && v != Value::Bool(false) {
                base.insert(k, v);
            }
        }
    }
    Ok(serde_json::from_value(Value::Object(base))?)
}

fn config_object(config: &Option<Value>) -> Result<Map<String, Value>, CliError> {
    match config {
        None => Ok(Map::new()),
        Some(Value::Object(m)) => Ok(m.clone()),
        Some(_) => Err(CliError::usage("config must be a JSON object")),
    }
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage(format!("missing --{flag}")))
}

fn kind(text: &str) -> Result<DiscrepancyKind, CliError> {
    text.parse().map_err(|e: drcc_core::Error| CliError::usage(e.to_string()))
}

fn rvd(a: RvdArgs) -> Result<Table, CliError> {
    let p = parse_distribution(&need(a.p, "p")?)?;
    let phat = parse_distribution(&need(a.phat, "phat")?)?;
    let set = AmbiguitySet::new(DiscrepancyKind::Rvd, 1.0, phat)?;
    let value = set.distance(&p)?;
    let mut t = Table::new(&["rvd"]);
    t.push(vec![value.into()]);
    Ok(t)
}

fn prl_cmd(a: PrlArgs) -> Result<Table, CliError> {
    let k = kind(&need(a.kind, "kind")?)?;
    let r = prl(k, need(a.m, "m")?, need(a.eps, "eps")?)?;
    let mut t = Table::new(&["kind", "m", "eps", "eps_hat"]);
    t.push(vec![k.name().into(), r.radius.into(), r.eps.into(), r.eps_hat.into()]);
    Ok(t)
}

fn prl_curve_cmd(a: PrlCurveArgs) -> Result<Table, CliError> {
    let (lo, hi, n) = (a.eps_min.unwrap_or(1e-4), a.eps_max.unwrap_or(0.9), a.points.unwrap_or(100));
    if !(lo > 0.0 && hi > lo && hi <= 1.0 && n >= 2) {
        return Err(CliError::usage("curve needs 0 < eps-min < eps-max <= 1 and at least 2 points"));
    }
    let grid = log_spaced(lo, hi, n);
    let curves: Vec<(DiscrepancyKind, f64)> = if a.fig2 {
        let family = GaussianFamily::reference_draws();
        DiscrepancyKind::ALL
            .iter()
            .map(|&k| Ok((k, fit_nominal(k, &family, &FitOptions::default())?.radius)))
            .collect::<Result<_, CliError>>()?
    } else {
        vec![(kind(&need(a.kind, "kind")?)?, need(a.m, "m")?)]
    };
    let mut t = Table::new(&["kind", "m", "eps", "eps_hat", "ratio"]);
    for (k, m) in curves {
        for r in prl_curve(k, m, &grid)? {
            t.push(vec![k.name().into(), m.into(), r.eps.into(), r.eps_hat.into(), r.ratio().into()]);
        }
    }
    Ok(t)
}

fn parse_family(text: &str) -> Result<GaussianFamily, CliError> {
    let nums = |body: &str, sep: char| -> Result<Vec<f64>, CliError> {
        body.split(sep)
            .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::usage(format!("bad number in family '{text}': {e}"))))
            .collect()
    };
    if text == "reference" {
        return Ok(GaussianFamily::reference_draws());
    }
    if let Some(body) = text.strip_prefix("grid:") {
        let v = nums(body, ',')?;
        if v.len() != 6 || v[4].fract() != 0.0 || v[5].fract() != 0.0 {
            return Err(CliError::usage("grid family needs MU_LO,MU_HI,SIGMA_LO,SIGMA_HI,N_MU,N_SIGMA"));
        }
        return Ok(GaussianFamily::make_family_grid((v[0], v[1]), (v[2], v[3]), v[4] as usize, v[5] as usize)?);
    }
    if let Some(body) = text.strip_prefix("list:") {
        let members = body
            .split(';')
            .map(|pair| {
                let v = nums(pair, ',')?;
                if v.len() != 2 {
                    return Err(CliError::usage(format!("family member '{pair}' needs MU,SIGMA")));
                }
                Ok(Gaussian1::new(v[0], v[1])?)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        return Ok(GaussianFamily::new(members)?);
    }
    Err(CliError::usage(format!("unknown family '{text}'")))
}

fn fit_cmd(a: FitNominalArgs) -> Result<Table, CliError> {
    let mut opts = FitOptions::default();
    if let Some(tol) = a.tol {
        opts.tol = tol;
    }
    if let Some(n) = a.grid_nodes {
        opts.grid_nodes = n;
    }
    let eps = a.eps.unwrap_or(0.01);
    let mut t = Table::new(&["kind", "mu_hat", "sigma_hat", "radius", "eps", "prl"]);
    if a.table1 {
        for r in comparison_table(&GaussianFamily::reference_draws(), &opts, eps)? {
            t.push(vec![r.kind.name().into(), r.mu_hat.into(), r.sigma_hat.into(), r.radius.into(), eps.into(), r.prl.into()]);
        }
        return Ok(t);
    }
    let k = kind(&need(a.kind, "kind")?)?;
    let family = parse_family(a.family.as_deref().unwrap_or("reference"))?;
    let fit = fit_nominal(k, &family, &opts)?;
    let level = prl(k, fit.radius, eps)?.eps_hat;
    t.push(vec![k.name().into(), fit.nominal.mu.into(), fit.nominal.sigma.into(), fit.radius.into(), eps.into(), level.into()]);
    Ok(t)
}

fn scenario_bound(a: ScenarioBoundArgs) -> Result<Table, CliError> {
    let p = ScenarioParams::new(need(a.n, "n")?, need(a.d, "d")?)?;
    let eps = need(a.eps, "eps")?;
    let (name, m, eps_hat) = match a.kind {
        Some(text) => {
            let k = kind(&text)?;
            let m = need(a.m, "m")?;
            (k.name(), m, prl(k, m, eps)?.eps_hat)
        }
        None => ("nominal", f64::NAN, eps),
    };
    let bound = scenario::two_level_nominal(p, eps_hat)?;
    let mut t = Table::new(&["n", "d", "kind", "m", "eps", "eps_hat", "bound"]);
    t.push(vec![p.n_samples.into(), p.support_dim.into(), name.into(), m.into(), eps.into(), eps_hat.into(), bound.into()]);
    Ok(t)
}

fn expected_bound(a: ExpectedBoundArgs) -> Result<Table, CliError> {
    let p = ScenarioParams::new(need(a.n, "n")?, need(a.d, "d")?)?;
    let (name, m, method, value) = match a.kind {
        None => ("nominal", f64::NAN, "closed", scenario::expected_nominal(p)),
        Some(text) => {
            let k = kind(&text)?;
            let m = need(a.m, "m")?;
            if k == DiscrepancyKind::Rvd && !a.numeric {
                (k.name(), m, "closed", scenario::expected_dr_rvd(p, m)?)
            } else {
                (k.name(), m, "numeric", scenario::expected_dr_numeric(p, k, m)?)
            }
        }
    };
    let mut t = Table::new(&["n", "d", "kind", "m", "method", "value"]);
    t.push(vec![p.n_samples.into(), p.support_dim.into(), name.into(), m.into(), method.into(), value.into()]);
    Ok(t)
}

/// Contents of `report.json`.
#[derive(Serialize)]
struct ReportFile<'a> {
    seed: u64,
    survival: &'a SurvivalCheck,
    report: &'a ExperimentReport,
}

/// Risk-level grid size for `overlays.csv`.
const OVERLAY_POINTS: usize = 201;
/// Grid size and confidence of the survival check in `report.json`.
const SURVIVAL_POINTS: usize = 100;
const SURVIVAL_CONFIDENCE: f64 = 0.999;

fn rmpc(a: &RmpcArgs, seed: Option<u64>, config: &Option<Value>) -> Result<Table, CliError> {
    let base = if a.full_scale { RmpcExperiment::default() } else { RmpcExperiment::desk_scale() };
    let Value::Object(mut fields) = serde_json::to_value(&base)? else {
        unreachable!("experiment serializes to an object")
    };
    fields.extend(config_object(config)?);
    let mut exp: RmpcExperiment = serde_json::from_value(Value::Object(fields))?;
    if let Some(s) = seed {
        exp.seed = s;
    }
    if let Some(n) = a.trials {
        exp.n_trials = n;
    }
    if let Some(n) = a.eval {
        exp.n_eval = n;
    }
    let report = run_experiment(&exp)?;
    let survival = report.survival_check(SURVIVAL_POINTS, SURVIVAL_CONFIDENCE)?;
    write_rmpc_files(&a.out_dir, &report, &survival, a.bins)?;

    let s = &report.summary;
    let mut t = Table::new(&[
        "trials",
        "feasible_trials",
        "mean_nominal",
        "stderr_nominal",
        "mean_truth",
        "stderr_truth",
        "expected_nominal",
        "expected_dr_rvd",
        "max_support_count",
        "dkw_band",
        "survival_excess_nominal",
        "survival_excess_truth",
    ]);
    t.push(vec![
        exp.n_trials.into(),
        s.feasible_trials.into(),
        s.mean_nominal.into(),
        s.stderr_nominal.into(),
        s.mean_truth.into(),
        s.stderr_truth.into(),
        s.expected_nominal.into(),
        s.expected_dr_rvd.into(),
        s.max_support_count.into(),
        survival.band.into(),
        survival.excess_nominal.into(),
        survival.excess_truth.into(),
    ]);
    Ok(t)
}

fn histogram_table(h: &Histogram) -> Table {
    let mut t = Table::new(&["bin_lo", "bin_hi", "count", "density"]);
    for ((e, &c), d) in h.edges.windows(2).zip(&h.counts).zip(h.densities()) {
        t.push(vec![e[0].into(), e[1].into(), c.into(), d.into()]);
    }
    t
}

fn write_rmpc_files(dir: &Path, report: &ExperimentReport, survival: &SurvivalCheck, bins: usize) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let (nominal, truth) = report.histograms(bins)?;
    std::fs::write(dir.join("histogram_nominal.csv"), histogram_table(&nominal).to_csv()?)?;
    std::fs::write(dir.join("histogram_truth.csv"), histogram_table(&truth).to_csv()?)?;

    let hi = report.eps_range();
    let grid: Vec<f64> = (0..OVERLAY_POINTS).map(|i| hi * i as f64 / (OVERLAY_POINTS - 1) as f64).collect();
    let mut t = Table::new(&["eps", "density_nominal", "density_dr_rvd", "cdf_nominal", "cdf_dr_rvd"]);
    for r in report.overlays(&grid)? {
        t.push(vec![r.eps.into(), r.density_nominal.into(), r.density_dr_rvd.into(), r.cdf_nominal.into(), r.cdf_dr_rvd.into()]);
    }
    std::fs::write(dir.join("overlays.csv"), t.to_csv()?)?;

    let file = ReportFile { seed: report.config.seed, survival, report };
    let mut json = serde_json::to_vec_pretty(&file)?;
    json.push(b'\n');
    std::fs::write(dir.join("report.json"), json)?;
    Ok(())
}
