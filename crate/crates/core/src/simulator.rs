//! Monte-Carlo sweeps over one scenario parameter.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{solve, Objective, Scheme, SolveReport, SolverOptions};
use crate::channel::{generate_scenario, ScenarioConfig};
use crate::error::{config, Result, WpcnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PMaxDbm,
    UsersK,
    SigmaEst2,
    /// Transmit and receive antennas at the power station, kept equal.
    NTNR,
    NU,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::PMaxDbm => "p_max_dbm",
            SweepVariable::UsersK => "users_k",
            SweepVariable::SigmaEst2 => "sigma_est2",
            SweepVariable::NTNR => "n_t_n_r",
            SweepVariable::NU => "n_u",
        }
    }

    fn integral(self) -> bool {
        matches!(self, SweepVariable::UsersK | SweepVariable::NTNR | SweepVariable::NU)
    }

    /// Copy of `base` with this variable set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        if self.integral() && !(value >= 1.0 && value.fract() == 0.0) {
            return Err(config(format!("{} needs positive integer values, got {value}", self.as_str())));
        }
        let n = value as usize;
        match self {
            SweepVariable::PMaxDbm => cfg.power.p_max_dbm = value,
            SweepVariable::UsersK => cfg.users.count = n,
            SweepVariable::SigmaEst2 => cfg.csi.sigma_est2 = value,
            SweepVariable::NTNR => {
                cfg.antennas.n_t = n;
                cfg.antennas.n_r = n;
            }
            SweepVariable::NU => cfg.antennas.n_u = n,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    pub objectives: Vec<Objective>,
    #[serde(default)]
    pub base_config: ScenarioConfig,
    #[serde(default)]
    pub seed: u64,
    /// Solver settings; `objective` and `scheme` are overridden per run.
    #[serde(default)]
    pub solver: SolverOptions,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| config(format!("sweep spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config("trials must be >= 1"));
        }
        if self.values.is_empty() {
            return Err(config("values must not be empty"));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(config("values must be strictly increasing"));
        }
        if self.schemes.is_empty() || self.objectives.is_empty() {
            return Err(config("at least one scheme and one objective are required"));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(config(format!("scheme {s} listed twice")));
            }
        }
        for (i, o) in self.objectives.iter().enumerate() {
            if self.objectives[..i].contains(o) {
                return Err(config(format!("objective {o} listed twice")));
            }
        }
        self.solver.validate()?;
        for &v in &self.values {
            self.variable.apply(&self.base_config, v)?;
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Channel seed of one trial; shared by every sweep value and scheme.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    splitmix64(seed ^ splitmix64(trial as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub value: f64,
    pub trial: usize,
    pub scheme: Scheme,
    pub objective: Objective,
    pub sum_achieved: f64,
    pub sum_predicted: f64,
    pub min_achieved: f64,
    pub min_predicted: f64,
    pub tau0: f64,
    pub rates: Vec<f64>,
}

impl TrialRow {
    fn from_report(value: f64, trial: usize, t_max: f64, r: &SolveReport) -> Self {
        TrialRow {
            value,
            trial,
            scheme: r.scheme,
            objective: r.objective,
            sum_achieved: r.achieved_sum / t_max,
            sum_predicted: r.sum_rate / t_max,
            min_achieved: r.achieved_min / t_max,
            min_predicted: r.min_rate / t_max,
            tau0: r.policy.tau0,
            rates: r.achieved_rates.iter().map(|x| x / t_max).collect(),
        }
    }

    pub fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::SumAchieved => self.sum_achieved,
            Metric::SumPredicted => self.sum_predicted,
            Metric::MinAchieved => self.min_achieved,
            Metric::MinPredicted => self.min_predicted,
            Metric::Tau0 => self.tau0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub variable: SweepVariable,
    pub rows: Vec<TrialRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    SumAchieved,
    SumPredicted,
    MinAchieved,
    MinPredicted,
    Tau0,
}

impl Metric {
    pub const ALL: [Metric; 5] =
        [Metric::SumAchieved, Metric::SumPredicted, Metric::MinAchieved, Metric::MinPredicted, Metric::Tau0];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SumAchieved => "sum_achieved",
            Metric::SumPredicted => "sum_predicted",
            Metric::MinAchieved => "min_achieved",
            Metric::MinPredicted => "min_predicted",
            Metric::Tau0 => "tau0",
        }
    }
}

fn run_trial(spec: &SweepSpec, vi: usize, trial: usize) -> Result<Vec<TrialRow>> {
    let value = spec.values[vi];
    let cfg = spec.variable.apply(&spec.base_config, value)?;
    let scn = generate_scenario(&cfg, trial_seed(spec.seed, trial))?;
    let mut rows = Vec::with_capacity(spec.schemes.len() * spec.objectives.len());
    for &scheme in &spec.schemes {
        for &objective in &spec.objectives {
            let opts = SolverOptions { scheme, objective, ..spec.solver.clone() };
            let r = solve(&scn, &opts)?;
            rows.push(TrialRow::from_report(value, trial, scn.t_max, &r));
        }
    }
    Ok(rows)
}

/// Runs every (value, trial, scheme, objective) combination.
///
/// Rows come back ordered by value, trial, scheme and objective regardless of
/// how many worker threads are used. `threads = None` uses rayon's default pool.
pub fn run_sweep(spec: &SweepSpec, threads: Option<usize>) -> Result<TrialTable> {
    spec.validate()?;
    let work: Vec<(usize, usize)> =
        (0..spec.values.len()).flat_map(|v| (0..spec.trials).map(move |t| (v, t))).collect();
    let run = || -> Result<Vec<TrialRow>> {
        let chunks: Vec<Result<Vec<TrialRow>>> = work.par_iter().map(|&(v, t)| run_trial(spec, v, t)).collect();
        let mut rows = Vec::new();
        for c in chunks {
            rows.extend(c?);
        }
        Ok(rows)
    };
    let rows = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(TrialTable { variable: spec.variable, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub scheme: String,
    pub objective: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Mean and standard error per (value, scheme, objective, metric), in table order.
pub fn summarize(table: &TrialTable) -> Result<Vec<SummaryRow>> {
    if table.rows.is_empty() {
        return Err(config("cannot summarize an empty table"));
    }
    let mut keys: Vec<(f64, Scheme, Objective)> = Vec::new();
    for r in &table.rows {
        let key = (r.value, r.scheme, r.objective);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut out = Vec::with_capacity(keys.len() * Metric::ALL.len());
    for (value, scheme, objective) in keys {
        let group: Vec<&TrialRow> =
            table.rows.iter().filter(|r| r.value == value && r.scheme == scheme && r.objective == objective).collect();
        for m in Metric::ALL {
            let xs: Vec<f64> = group.iter().map(|r| r.metric(m)).collect();
            let (mean, stderr) = mean_stderr(&xs);
            out.push(SummaryRow {
                sweep_var: table.variable.as_str().into(),
                sweep_value: value,
                scheme: scheme.as_str().into(),
                objective: objective.as_str().into(),
                metric: m.as_str().into(),
                mean,
                stderr,
                trials: xs.len(),
            });
        }
    }
    Ok(out)
}

/// Sample mean and standard error (n - 1 denominator); zero error for one sample.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Nine significant digits.
fn num(x: f64) -> String {
    format!("{x:.8e}")
}

const SUMMARY_HEADER: [&str; 8] =
    ["sweep_var", "sweep_value", "scheme", "objective", "metric", "mean", "stderr", "trials"];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> WpcnError + '_ {
    move |source| WpcnError::Csv { path: path.to_path_buf(), source }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> WpcnError + '_ {
    move |source| WpcnError::Io { path: path.to_path_buf(), source }
}

/// Writes the summary CSV; the header is always present.
pub fn write_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(SUMMARY_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.sweep_var.clone(),
            num(r.sweep_value),
            r.scheme.clone(),
            r.objective.clone(),
            r.metric.clone(),
            num(r.mean),
            num(r.stderr),
            r.trials.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Parses a summary CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(String::from).collect();
    if header != SUMMARY_HEADER {
        return Err(config(format!("{}: unexpected header {header:?}", path.display())));
    }
    let bad = |what: &str, line: usize| config(format!("{}: line {line}: bad {what}", path.display()));
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = i + 2;
        let f = |j: usize, what: &str| rec[j].parse::<f64>().map_err(|_| bad(what, line));
        out.push(SummaryRow {
            sweep_var: rec[0].to_string(),
            sweep_value: f(1, "sweep_value")?,
            scheme: rec[2].to_string(),
            objective: rec[3].to_string(),
            metric: rec[4].to_string(),
            mean: f(5, "mean")?,
            stderr: f(6, "stderr")?,
            trials: rec[7].parse().map_err(|_| bad("trials", line))?,
        });
    }
    Ok(out)
}

/// Writes one line per trial row; per-user rates are `;`-separated.
pub fn write_trials_csv(table: &TrialTable, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record([
        "sweep_var",
        "sweep_value",
        "trial",
        "scheme",
        "objective",
        "sum_achieved",
        "sum_predicted",
        "min_achieved",
        "min_predicted",
        "tau0",
        "rates",
    ])
    .map_err(csv_err(path))?;
    for r in &table.rows {
        let rates: Vec<String> = r.rates.iter().map(|&x| num(x)).collect();
        w.write_record([
            table.variable.as_str().to_string(),
            num(r.value),
            r.trial.to_string(),
            r.scheme.as_str().to_string(),
            r.objective.as_str().to_string(),
            num(r.sum_achieved),
            num(r.sum_predicted),
            num(r.min_achieved),
            num(r.min_predicted),
            num(r.tau0),
            rates.join(";"),
        ])
        .map_err(csv_err(path))?;
    }
    let mut inner = w.into_inner().map_err(|e| io_err(path)(e.into_error()))?;
    inner.flush().map_err(io_err(path))
}
