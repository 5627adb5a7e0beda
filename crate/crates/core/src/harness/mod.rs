//! Scenario runner: a JSON config names a scenario, its parameters and a
//! seed; the report echoes the config, lists per-trial certificates and ends
//! in a verdict.
//!
//! Trial `i` draws from `splitmix64(seed + i)`. Trials run on a rayon pool and
//! are collected in index order, so the report does not depend on the number
//! of jobs; only `aggregates.wall_time_ms` varies between runs.

mod scenarios;

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Strictness;
use crate::seed::trial_seed;
use crate::spaces::Exponent;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Unknown scenario, malformed JSON or out-of-range parameter.
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Topology,
    CkCover,
    CkxCover,
    CkFalsify,
    LpOperator,
    Hilbert,
    TransferOp,
    TransferCkx,
    LinfSum,
    LemmaScaling,
    Rescale,
    Complementation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Discrete,
    Lipschitz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Bcp,
    Ubcp,
}

/// Scenario parameters; every field is optional and falls back to a
/// per-scenario default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Isolated points of the convergent model.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent<f64>>,
    /// Domain exponent of operator scenarios, default `p`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Slope bound of the Lipschitz grid.
    #[serde(rename = "Lambda", skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<GridKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<FormKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dead_node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rigged: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Preset behind the CLI shortcuts `topology`, `ck`, `op`, `transfer`.
    pub fn preset(name: &str) -> Option<Self> {
        let params = match name {
            "topology" => Params {
                m: Some(3),
                big_n: Some(8),
                ..Params::default()
            },
            "ck" => Params {
                n: Some(8),
                lambda: Some(1.2),
                trials: Some(10_000),
                ..Params::default()
            },
            "op" => Params {
                n: Some(3),
                p: Some(Exponent::finite(2.0)),
                lambda: Some(1.1),
                trials: Some(1000),
                ..Params::default()
            },
            "transfer" => Params {
                n: Some(2),
                p: Some(Exponent::finite(2.0)),
                lambda: Some(1.1),
                trials: Some(1000),
                ..Params::default()
            },
            _ => return None,
        };
        let scenario = match name {
            "topology" => Scenario::Topology,
            "ck" => Scenario::CkCover,
            "op" => Scenario::LpOperator,
            _ => Scenario::TransferOp,
        };
        Some(ScenarioConfig {
            scenario,
            params,
            seed: 7,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Falsified,
    Degenerate,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass | Verdict::Degenerate => 0,
            Verdict::Falsified => 1,
            Verdict::Error => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    /// Inequality holds with slack above 1e-9.
    Certified,
    /// Holds, but with slack at most 1e-9.
    Degenerate,
    /// Not covered, and the sample is outside the covering's hypothesis.
    OutsideHypothesis,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<String>,
    pub status: TrialStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TrialRecord {
    pub(crate) fn new(trial: usize, seed: u64, status: TrialStatus) -> Self {
        TrialRecord {
            trial,
            seed,
            part: None,
            status,
            ball_index: None,
            distance: None,
            radius: None,
            margin: None,
            gap: None,
            note: None,
        }
    }

    /// Record for a ball certificate; status from the margin.
    pub(crate) fn covered(trial: usize, seed: u64, ball: usize, distance: f64, radius: f64) -> Self {
        let margin = radius - distance;
        let status = match Strictness::of_slack(margin) {
            Strictness::Verified => TrialStatus::Certified,
            Strictness::Degenerate => TrialStatus::Degenerate,
            Strictness::Violated => TrialStatus::Failed,
        };
        TrialRecord {
            ball_index: Some(ball),
            distance: Some(distance),
            radius: Some(radius),
            margin: Some(margin),
            ..TrialRecord::new(trial, seed, status)
        }
    }

    pub(crate) fn failed(trial: usize, seed: u64, note: impl Into<String>) -> Self {
        TrialRecord {
            note: Some(note.into()),
            ..TrialRecord::new(trial, seed, TrialStatus::Failed)
        }
    }

    pub(crate) fn part(mut self, part: &str) -> Self {
        self.part = Some(part.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub certified: usize,
    pub degenerate: usize,
    pub outside_hypothesis: usize,
    pub failed: usize,
    pub min_margin: Option<f64>,
    pub min_gap: Option<f64>,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ScenarioConfig,
    pub seed_derivation: String,
    pub verdict: Verdict,
    pub aggregates: Aggregates,
    /// Scenario-specific record: constants, coverings, witnesses.
    pub details: serde_json::Value,
    pub trials: Vec<TrialRecord>,
}

/// Scenario output before aggregation. `forced` overrides the verdict
/// derived from the trials (witness found, exact check failed).
pub(crate) struct Outcome {
    pub details: serde_json::Value,
    pub trials: Vec<TrialRecord>,
    pub forced: Option<Verdict>,
}

/// Runs `count` trials on the pool, trial `i` with seed `splitmix64(base + offset + i)`.
pub(crate) fn run_trials<F>(count: usize, base: u64, offset: usize, f: F) -> Vec<TrialRecord>
where
    F: Fn(usize, u64) -> TrialRecord + Sync,
{
    (offset..offset + count)
        .into_par_iter()
        .map(|i| f(i, trial_seed(base, i as u64)))
        .collect()
}

/// Runs the scenario on `jobs` worker threads (0: rayon's default).
pub fn run_scenario(cfg: &ScenarioConfig, jobs: usize) -> Result<Report, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| scenarios::dispatch(cfg))?;
    let wall = start.elapsed().as_secs_f64() * 1e3;
    Ok(assemble(cfg, outcome, wall))
}

fn assemble(cfg: &ScenarioConfig, out: Outcome, wall_time_ms: f64) -> Report {
    let count = |s: TrialStatus| out.trials.iter().filter(|t| t.status == s).count();
    let min = |f: fn(&TrialRecord) -> Option<f64>| out.trials.iter().filter_map(f).reduce(f64::min);
    let aggregates = Aggregates {
        trials: out.trials.len(),
        certified: count(TrialStatus::Certified),
        degenerate: count(TrialStatus::Degenerate),
        outside_hypothesis: count(TrialStatus::OutsideHypothesis),
        failed: count(TrialStatus::Failed),
        min_margin: min(|t| t.margin),
        min_gap: min(|t| t.gap),
        wall_time_ms,
    };
    let verdict = out.forced.unwrap_or(if aggregates.failed > 0 {
        Verdict::Falsified
    } else if aggregates.degenerate > 0 || aggregates.outside_hypothesis > 0 {
        Verdict::Degenerate
    } else {
        Verdict::Pass
    });
    Report {
        config: cfg.clone(),
        seed_derivation: "trial i uses splitmix64(seed + i)".into(),
        verdict,
        aggregates,
        details: out.details,
        trials: out.trials,
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per trial: `trial,part,status,ball_index,distance,radius,margin`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("trial,part,status,ball_index,distance,radius,margin\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for t in &self.trials {
            let status = serde_json::to_value(t.status).expect("enum");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                t.trial,
                t.part.as_deref().unwrap_or(""),
                status.as_str().unwrap_or(""),
                t.ball_index.map(|b| b.to_string()).unwrap_or_default(),
                opt(t.distance),
                opt(t.radius),
                opt(t.margin),
            );
        }
        s
    }

    /// JSON with the wall-time field zeroed, for reproducibility checks.
    pub fn to_json_without_wall_time(&self) -> String {
        let mut r = self.clone();
        r.aggregates.wall_time_ms = 0.0;
        r.to_json()
    }
}

/// Worker count: `BCPLAB_JOBS` if set and valid, else `flag`.
pub fn resolve_jobs(flag: Option<usize>) -> usize {
    std::env::var("BCPLAB_JOBS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .or(flag)
        .unwrap_or(0)
}
