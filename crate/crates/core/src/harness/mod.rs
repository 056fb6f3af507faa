//! Scenario sweeps over the walk-chain parameters.
//!
//! A sweep runs every `(p_w11, p_w00)` cell for every seed under LLM+TS and
//! standard TS, then reduces the trials into percentile summaries, pooled
//! action histograms and cumulative-reward bands. Trials run in parallel; the
//! reduction happens in a fixed order so outputs do not depend on scheduling.

pub mod plot;
pub mod stats;

use std::fmt::{self, Write as _};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{DecisionFilter, FilterMode, LlmFilter, MockFilter, Trial, TrialConfig, TrialRecord};
use crate::bandit::TsConfig;
use crate::env::EnvParams;
use crate::error::{Error, Result};
use crate::llm::audit::AuditLog;
use crate::llm::client::{LlmClient, LlmClientConfig};
use crate::llm::prompt::DEFAULT_HISTORY_WINDOW;
use crate::walk::{ConstraintMode, WalkParams};

pub use stats::{nearest_rank, Quartiles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// LLM+TS.
    Hybrid,
    /// Thompson Sampling without the filter.
    Standard,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Hybrid => "hybrid",
            Mode::Standard => "standard",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub p_w11_values: Vec<f64>,
    /// Probability of staying in "cannot walk"; the chain uses
    /// `p_w01 = 1 - p_w00`.
    pub p_w00_values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub modes: Vec<Mode>,
    pub output_dir: PathBuf,
    /// Mock-oracle approval rate for hybrid runs without a live model.
    pub ambiguity_rate: f64,
    /// Query this endpoint instead of the mock oracle in hybrid runs.
    pub live_llm: Option<LlmClientConfig>,
    pub history_window: usize,
    pub eta_d: f64,
    pub eta_h: f64,
    pub constraint_mode: ConstraintMode,
    /// Replaces the built-in cannot-walk reasons when set.
    pub preference_file: Option<PathBuf>,
    pub env: EnvParams,
    pub ts: TsConfig,
    /// Write per-trial JSON-lines logs and filter audit logs.
    pub write_trials: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            p_w11_values: vec![0.7],
            p_w00_values: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            seeds: (0..10).collect(),
            modes: vec![Mode::Hybrid, Mode::Standard],
            output_dir: PathBuf::from("out"),
            ambiguity_rate: 0.06,
            live_llm: None,
            history_window: DEFAULT_HISTORY_WINDOW,
            eta_d: 0.1,
            eta_h: 0.1,
            constraint_mode: ConstraintMode::EveryStep,
            preference_file: None,
            env: EnvParams::default(),
            ts: TsConfig::default(),
            write_trials: true,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, values) in [("p_w11_values", &self.p_w11_values), ("p_w00_values", &self.p_w00_values)] {
            if values.is_empty() {
                return Err(Error::Config(format!("{name} is empty")));
            }
            if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::param(name, format!("{v} is outside [0, 1]")));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds given".into()));
        }
        if !(0.0..=1.0).contains(&self.ambiguity_rate) {
            return Err(Error::param("ambiguity_rate", format!("{} is outside [0, 1]", self.ambiguity_rate)));
        }
        self.env.validate()?;
        self.ts.validate()?;
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.p_w11_values
            .iter()
            .flat_map(|&p_w11| self.p_w00_values.iter().map(move |&p_w00| Cell { p_w11, p_w00 }))
            .collect()
    }

    fn walk_params(&self, cell: Cell, pool: &[String]) -> WalkParams {
        WalkParams {
            eta_d: self.eta_d,
            eta_h: self.eta_h,
            constraint_mode: self.constraint_mode,
            preference_pool: pool.to_vec(),
            ..WalkParams::from_stay_probabilities(cell.p_w11, cell.p_w00)
        }
    }

    pub fn trial_config(&self, cell: Cell, mode: Mode, seed: u64, pool: &[String]) -> TrialConfig {
        let filter = match (mode, &self.live_llm) {
            (Mode::Standard, _) => FilterMode::None,
            (Mode::Hybrid, Some(llm)) => FilterMode::LiveLlm(llm.clone()),
            (Mode::Hybrid, None) => FilterMode::MockOracle {
                ambiguity_rate: self.ambiguity_rate,
            },
        };
        TrialConfig {
            env: self.env.clone(),
            walk: self.walk_params(cell, pool),
            ts: self.ts.clone(),
            filter,
            history_window: self.history_window,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub p_w11: f64,
    pub p_w00: f64,
}

impl Cell {
    /// File-name stem, e.g. `pw11_0.7_pw00_0.1`.
    pub fn slug(&self) -> String {
        format!("pw11_{}_pw00_{}", self.p_w11, self.p_w00)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: Mode,
    /// Total reward of each trial, in seed order.
    pub totals: Vec<f64>,
    pub quartiles: Quartiles,
    /// Executed actions 0..=3 pooled over the cell's trials.
    pub action_counts: [usize; 4],
    pub steps: usize,
    /// Per-day quartiles of cumulative reward across trials.
    pub cumulative: Vec<Quartiles>,
    pub filter_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Cell,
    pub modes: Vec<ModeResult>,
}

impl CellResult {
    pub fn mode(&self, mode: Mode) -> Option<&ModeResult> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub cells: Vec<CellResult>,
}

impl AggregateResult {
    pub fn cell(&self, p_w11: f64, p_w00: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.cell.p_w11 == p_w11 && c.cell.p_w00 == p_w00)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("p_w11,p_w00,mode,median,q25,q75\n");
        for c in &self.cells {
            for m in &c.modes {
                let q = m.quartiles;
                let _ = writeln!(out, "{},{},{},{},{},{}", c.cell.p_w11, c.cell.p_w00, m.mode, q.median, q.q25, q.q75);
            }
        }
        out
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("p_w11,p_w00,mode,action,count\n");
        for c in &self.cells {
            for m in &c.modes {
                for (a, n) in m.action_counts.iter().enumerate() {
                    let _ = writeln!(out, "{},{},{},{a},{n}", c.cell.p_w11, c.cell.p_w00, m.mode);
                }
            }
        }
        out
    }

    pub fn cumulative_csv(cell: &CellResult) -> String {
        let mut out = String::from("t,mode,median,q25,q75\n");
        for m in &cell.modes {
            for (t, q) in m.cumulative.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{},{}", t + 1, m.mode, q.median, q.q25, q.q75);
            }
        }
        out
    }

    /// Writes `summary.csv`, `histogram.csv` and `cumulative/<cell>.csv`.
    pub fn write_csvs(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("summary.csv"), self.summary_csv().as_bytes())?;
        write_file(&dir.join("histogram.csv"), self.histogram_csv().as_bytes())?;
        let cum_dir = dir.join("cumulative");
        fs::create_dir_all(&cum_dir).map_err(|e| Error::io(&cum_dir, e))?;
        for c in &self.cells {
            let path = cum_dir.join(format!("{}.csv", c.cell.slug()));
            write_file(&path, Self::cumulative_csv(c).as_bytes())?;
        }
        Ok(())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Creates the directory and checks it accepts files.
fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

#[derive(Debug, Clone, Copy)]
struct Job {
    cell_index: usize,
    mode: Mode,
    seed: u64,
}

fn trial_stem(cell: Cell, mode: Mode, seed: u64) -> String {
    format!("{mode}_{}_seed_{seed}", cell.slug())
}

/// Runs every trial of the sweep, writes CSV summaries (and per-trial logs
/// when enabled) under `spec.output_dir`, and returns the aggregate.
pub fn run_sweep(spec: &SweepSpec) -> Result<AggregateResult> {
    spec.validate()?;
    ensure_writable(&spec.output_dir)?;
    let pool = match &spec.preference_file {
        Some(path) => crate::walk::load_pool(path)?,
        None => crate::walk::default_pool(),
    };
    let client = match (&spec.live_llm, spec.modes.contains(&Mode::Hybrid)) {
        (Some(cfg), true) => Some(Arc::new(LlmClient::from_env(cfg.clone())?)),
        _ => None,
    };
    let trials_dir = spec.output_dir.join("trials");
    if spec.write_trials {
        fs::create_dir_all(&trials_dir).map_err(|e| Error::io(&trials_dir, e))?;
    }

    let cells = spec.cells();
    let jobs: Vec<Job> = (0..cells.len())
        .flat_map(|cell_index| {
            spec.modes
                .iter()
                .flat_map(move |&mode| spec.seeds.iter().map(move |&seed| Job { cell_index, mode, seed }))
        })
        .collect();

    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|job| {
            let cell = cells[job.cell_index];
            let cfg = spec.trial_config(cell, job.mode, job.seed, &pool);
            let filter: Option<Box<dyn DecisionFilter>> = match (&cfg.filter, &client) {
                (FilterMode::None, _) => None,
                (FilterMode::LiveLlm(_), Some(client)) => Some(Box::new(LlmFilter::new(client.clone(), cfg.history_window))),
                (FilterMode::MockOracle { ambiguity_rate }, _) => Some(Box::new(MockFilter::new(*ambiguity_rate, cfg.seed))),
                (FilterMode::LiveLlm(_), None) => unreachable!("client is built whenever hybrid runs use a live model"),
            };
            let stem = trial_stem(cell, job.mode, job.seed);
            let mut trial = Trial::new(cfg, filter)?;
            if spec.write_trials && job.mode == Mode::Hybrid {
                trial = trial.with_audit(AuditLog::create(trials_dir.join(format!("{stem}.audit.jsonl")))?);
            }
            let record = trial.run()?;
            if spec.write_trials {
                let path = trials_dir.join(format!("{stem}.jsonl"));
                let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                let mut out = BufWriter::new(file);
                record.write_jsonl(&mut out)?;
                out.flush().map_err(|e| Error::io(&path, e))?;
            }
            Ok(record)
        })
        .collect::<Result<_>>()?;

    let result = aggregate(&cells, &jobs, &records, &spec.modes);
    result.write_csvs(&spec.output_dir)?;
    Ok(result)
}

fn aggregate(cells: &[Cell], jobs: &[Job], records: &[TrialRecord], modes: &[Mode]) -> AggregateResult {
    let cells = cells
        .iter()
        .enumerate()
        .map(|(ci, &cell)| {
            let modes = modes
                .iter()
                .map(|&mode| {
                    let trials: Vec<&TrialRecord> = jobs
                        .iter()
                        .zip(records)
                        .filter(|(j, _)| j.cell_index == ci && j.mode == mode)
                        .map(|(_, r)| r)
                        .collect();
                    reduce_mode(mode, &trials)
                })
                .collect();
            CellResult { cell, modes }
        })
        .collect();
    AggregateResult { cells }
}

/// Reduces one mode's trials. Trials that ended early hold their final
/// cumulative reward for the remaining days.
pub fn reduce_mode(mode: Mode, trials: &[&TrialRecord]) -> ModeResult {
    let totals: Vec<f64> = trials.iter().map(|r| r.total_reward).collect();
    let mut action_counts = [0usize; 4];
    for r in trials {
        for (acc, n) in action_counts.iter_mut().zip(r.action_counts()) {
            *acc += n;
        }
    }
    let curves: Vec<Vec<f64>> = trials.iter().map(|r| r.cumulative_rewards()).collect();
    let horizon = curves.iter().map(Vec::len).max().unwrap_or(0);
    let cumulative = (0..horizon)
        .filter_map(|t| {
            let at_t: Vec<f64> = curves
                .iter()
                .map(|c| c.get(t).or(c.last()).copied().unwrap_or(0.0))
                .collect();
            Quartiles::of(&at_t)
        })
        .collect();
    ModeResult {
        mode,
        quartiles: Quartiles::of(&totals).unwrap_or(Quartiles { median: f64::NAN, q25: f64::NAN, q75: f64::NAN }),
        totals,
        action_counts,
        steps: trials.iter().map(|r| r.steps.len()).sum(),
        cumulative,
        filter_calls: trials.iter().map(|r| r.filter_calls).sum(),
    }
}

/// Rebuilds the summary CSV from the per-trial JSON-lines logs in `dir`.
pub fn summary_from_trial_logs(spec: &SweepSpec) -> Result<String> {
    let trials_dir = spec.output_dir.join("trials");
    let mut out = String::from("p_w11,p_w00,mode,median,q25,q75\n");
    for cell in spec.cells() {
        for &mode in &spec.modes {
            let mut totals = Vec::with_capacity(spec.seeds.len());
            for &seed in &spec.seeds {
                let path = trials_dir.join(format!("{}.jsonl", trial_stem(cell, mode, seed)));
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let mut total = 0.0;
                for line in text.lines() {
                    let step: crate::agent::StepLog = serde_json::from_str(line)?;
                    total += step.reward;
                }
                totals.push(total);
            }
            let q = Quartiles::of(&totals).ok_or_else(|| Error::Config("no trials".into()))?;
            let _ = writeln!(out, "{},{},{},{},{},{}", cell.p_w11, cell.p_w00, mode, q.median, q.q25, q.q75);
        }
    }
    Ok(out)
}
