//! One simulated participant: Thompson Sampling proposes a message, the
//! filter may veto it while the user cannot walk, and the environment, walk
//! chain and posteriors advance.

use std::io::Write;
use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::bandit::{ThompsonSampler, TsConfig};
use crate::env::{env_step, Action, EnvParams, EnvState};
use crate::error::{Error, Result};
use crate::llm::audit::{prompt_hash, AuditLog, AuditRecord};
use crate::llm::client::{LlmClient, LlmClientConfig};
use crate::llm::oracle::mock_oracle;
use crate::llm::parse::{parse_decision, Decision, Verdict};
use crate::llm::prompt::{build_prompt, PromptSpec, StateRow, DEFAULT_HISTORY_WINDOW};
use crate::rng::{substream, SimRng, Stream};
use crate::walk::{apply_constraint, walk_step, ConstraintMode, WalkParams, WalkState};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterMode {
    /// Standard Thompson Sampling.
    #[default]
    None,
    MockOracle { ambiguity_rate: f64 },
    LiveLlm(LlmClientConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    #[serde(default)]
    pub env: EnvParams,
    #[serde(default)]
    pub walk: WalkParams,
    #[serde(default)]
    pub ts: TsConfig,
    #[serde(default)]
    pub filter: FilterMode,
    #[serde(default = "default_history_window")]
    pub history_window: usize,
    pub seed: u64,
}

fn default_history_window() -> usize {
    DEFAULT_HISTORY_WINDOW
}

impl TrialConfig {
    pub fn new(seed: u64, filter: FilterMode) -> Self {
        Self {
            env: EnvParams::default(),
            walk: WalkParams::default(),
            ts: TsConfig::default(),
            filter,
            history_window: DEFAULT_HISTORY_WINDOW,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.walk.validate()?;
        self.ts.validate()?;
        if let FilterMode::MockOracle { ambiguity_rate } = self.filter {
            if !(0.0..=1.0).contains(&ambiguity_rate) {
                return Err(Error::param("ambiguity_rate", format!("{ambiguity_rate} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// What the filter sees when asked about a candidate message.
#[derive(Debug, Clone, Copy)]
pub struct FilterRequest<'a> {
    pub t: u32,
    pub candidate: Action,
    pub preference: &'a str,
    /// Completed days, oldest first.
    pub history: &'a [StateRow],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Consultation {
    pub decision: Decision,
    /// Present when a prompt was actually built.
    pub prompt: Option<String>,
}

/// Decides whether a candidate message is sent while a preference is active.
///
/// An `Err` other than [`Error::Config`] is treated as a failed consultation
/// and the candidate is executed unchanged.
pub trait DecisionFilter: Send {
    fn consult(&mut self, request: &FilterRequest<'_>) -> Result<Consultation>;
}

pub struct MockFilter {
    ambiguity_rate: f64,
    rng: SimRng,
}

impl MockFilter {
    pub fn new(ambiguity_rate: f64, seed: u64) -> Self {
        Self {
            ambiguity_rate,
            rng: substream(seed, Stream::Oracle),
        }
    }
}

impl DecisionFilter for MockFilter {
    fn consult(&mut self, request: &FilterRequest<'_>) -> Result<Consultation> {
        Ok(Consultation {
            decision: mock_oracle(Some(request.preference), self.ambiguity_rate, &mut self.rng),
            prompt: None,
        })
    }
}

pub struct LlmFilter {
    client: Arc<LlmClient>,
    history_window: usize,
}

impl LlmFilter {
    pub fn new(client: Arc<LlmClient>, history_window: usize) -> Self {
        Self { client, history_window }
    }

    pub fn prompt_for(&self, request: &FilterRequest<'_>) -> String {
        let mut spec = PromptSpec::new(request.history.to_vec(), request.preference);
        spec.history_window = self.history_window;
        build_prompt(&spec)
    }
}

impl DecisionFilter for LlmFilter {
    fn consult(&mut self, request: &FilterRequest<'_>) -> Result<Consultation> {
        let prompt = self.prompt_for(request);
        let raw = self.client.complete(&prompt)?;
        Ok(Consultation {
            decision: parse_decision(&raw),
            prompt: Some(prompt),
        })
    }
}

/// Builds the filter a config asks for. `None` means standard TS.
pub fn filter_for(cfg: &TrialConfig) -> Result<Option<Box<dyn DecisionFilter>>> {
    Ok(match &cfg.filter {
        FilterMode::None => None,
        FilterMode::MockOracle { ambiguity_rate } => Some(Box::new(MockFilter::new(*ambiguity_rate, cfg.seed))),
        FilterMode::LiveLlm(llm) => {
            let client = Arc::new(LlmClient::from_env(llm.clone())?);
            Some(Box::new(LlmFilter::new(client, cfg.history_window)))
        }
    })
}

/// One day of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    /// Day the action was taken.
    pub t: u32,
    pub candidate: Action,
    pub executed: Action,
    /// Filter verdict, when the filter was consulted.
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_error: Option<String>,
    /// Preference active when the action was chosen.
    pub preference: Option<String>,
    /// Walk state when the action was chosen.
    pub w: u8,
    /// Context probability the decision was based on.
    pub p: f64,
    /// True context the action acted on.
    pub c: u8,
    /// Habituation after the day, including the constraint.
    pub h: f64,
    /// Disengagement after the day, including the constraint.
    pub d: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub steps: Vec<StepLog>,
    pub total_reward: f64,
    pub terminated_early: bool,
    /// Number of times the filter was consulted.
    pub filter_calls: usize,
    pub posterior_updates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub steps: usize,
    pub total_reward: f64,
    pub terminated_early: bool,
    pub filter_calls: usize,
    pub action_counts: [usize; 4],
}

impl TrialRecord {
    pub fn action_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for s in &self.steps {
            counts[s.executed.index()] += 1;
        }
        counts
    }

    pub fn cumulative_rewards(&self) -> Vec<f64> {
        self.steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.reward;
                Some(*acc)
            })
            .collect()
    }

    pub fn summary(&self) -> TrialSummary {
        TrialSummary {
            seed: self.seed,
            steps: self.steps.len(),
            total_reward: self.total_reward,
            terminated_early: self.terminated_early,
            filter_calls: self.filter_calls,
            action_counts: self.action_counts(),
        }
    }

    /// One JSON object per step, one per line.
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for step in &self.steps {
            serde_json::to_writer(&mut out, step)?;
            out.write_all(b"\n").map_err(|e| Error::io("<trial log>", e))?;
        }
        Ok(())
    }
}

/// Mutable state of a running trial.
pub struct Trial {
    config: TrialConfig,
    env_state: EnvState,
    walk_state: WalkState,
    previous_w: u8,
    sampler: ThompsonSampler,
    env_rng: SimRng,
    walk_rng: SimRng,
    ts_rng: SimRng,
    filter: Option<Box<dyn DecisionFilter>>,
    audit: Option<AuditLog>,
    history: Vec<StateRow>,
    done: bool,
    filter_calls: usize,
}

impl Trial {
    pub fn new(config: TrialConfig, filter: Option<Box<dyn DecisionFilter>>) -> Result<Self> {
        config.validate()?;
        let mut env_rng = substream(config.seed, Stream::Environment);
        let env_state = EnvState::reset(&mut env_rng, &config.env)?;
        let sampler = ThompsonSampler::new(config.ts.clone())?;
        Ok(Self {
            walk_rng: substream(config.seed, Stream::Walk),
            ts_rng: substream(config.seed, Stream::Sampler),
            env_rng,
            env_state,
            walk_state: WalkState::can_walk(),
            previous_w: 1,
            sampler,
            filter,
            audit: None,
            history: Vec::new(),
            done: false,
            filter_calls: 0,
            config,
        })
    }

    pub fn with_audit(mut self, audit: AuditLog) -> Self {
        self.audit = Some(audit);
        self
    }

    pub fn env_state(&self) -> &EnvState {
        &self.env_state
    }

    pub fn walk_state(&self) -> &WalkState {
        &self.walk_state
    }

    /// Overrides the walk state, e.g. to start a trial in `w = 0`.
    pub fn set_walk_state(&mut self, walk: WalkState) -> Result<()> {
        if !walk.is_consistent() {
            return Err(Error::Usage("a preference must be present exactly when w = 0".into()));
        }
        self.previous_w = walk.w;
        self.walk_state = walk;
        Ok(())
    }

    pub fn sampler(&self) -> &ThompsonSampler {
        &self.sampler
    }

    pub fn sampler_mut(&mut self) -> &mut ThompsonSampler {
        &mut self.sampler
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn filter_calls(&self) -> usize {
        self.filter_calls
    }

    fn constraint_applies(&self) -> bool {
        self.walk_state.is_constrained()
            && match self.config.walk.constraint_mode {
                ConstraintMode::EveryStep => true,
                ConstraintMode::OnTransition => self.previous_w == 1,
            }
    }

    /// Runs the filter on a candidate, falling back to the candidate on
    /// anything except a configuration error.
    fn filtered(&mut self, candidate: Action) -> Result<(Action, Option<Verdict>, Option<String>)> {
        let preference = match (&self.walk_state.preference, candidate.sends_message()) {
            (Some(p), true) => p.clone(),
            _ => return Ok((candidate, None, None)),
        };
        let Some(filter) = self.filter.as_mut() else {
            return Ok((candidate, None, None));
        };
        self.filter_calls += 1;
        let t = self.env_state.t;
        let request = FilterRequest {
            t,
            candidate,
            preference: &preference,
            history: &self.history,
        };
        let (executed, verdict, error, record) = match filter.consult(&request) {
            Ok(c) => {
                let executed = if c.decision.verdict == Verdict::NotSend { Action::NONE } else { candidate };
                let record = AuditRecord {
                    t,
                    prompt_sha256: c.prompt.as_deref().map(prompt_hash).unwrap_or_default(),
                    raw: c.decision.raw.clone(),
                    verdict: c.decision.verdict,
                    error: None,
                };
                (executed, c.decision.verdict, None, record)
            }
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => {
                warn!("filter failed at t={t}, keeping candidate {candidate}: {e}");
                let record = AuditRecord {
                    t,
                    prompt_sha256: String::new(),
                    raw: String::new(),
                    verdict: Verdict::Unparseable,
                    error: Some(e.to_string()),
                };
                (candidate, Verdict::Unparseable, Some(e.to_string()), record)
            }
        };
        if let Some(audit) = self.audit.as_mut() {
            audit.append(&record)?;
        }
        Ok((executed, Some(verdict), error))
    }

    /// Advances one day.
    pub fn hybrid_step(&mut self) -> Result<StepLog> {
        if self.done {
            return Err(Error::Usage("trial already finished".into()));
        }
        let features = self.sampler.featurize(&self.env_state);
        let candidate = self.sampler.select(&features, &mut self.ts_rng)?;
        let (executed, verdict, filter_error) = self.filtered(candidate)?;

        let tr = env_step(&self.env_state, executed, &mut self.env_rng, &self.config.env)?;
        let (mut next, mut reward) = (tr.next, tr.reward);
        if self.constraint_applies() {
            (next, reward) = apply_constraint(&next, &self.config.walk);
        }
        let done = tr.done || next.is_terminal(&self.config.env);

        let next_walk = walk_step(&self.walk_state, &mut self.walk_rng, &self.config.walk)?;
        self.sampler.update(executed, &features, reward)?;

        let log = StepLog {
            t: self.env_state.t,
            candidate,
            executed,
            verdict,
            filter_error,
            preference: self.walk_state.preference.clone(),
            w: self.walk_state.w,
            p: self.env_state.p,
            c: self.env_state.c,
            h: next.h,
            d: next.d,
            reward,
        };
        self.history.push(StateRow {
            t: self.env_state.t,
            context: self.env_state.c,
            action: executed,
            reward,
            habituation: next.h,
            disengagement: next.d,
        });
        self.previous_w = self.walk_state.w;
        self.walk_state = next_walk;
        self.env_state = next;
        self.done = done;
        Ok(log)
    }

    pub fn run(mut self) -> Result<TrialRecord> {
        let mut steps = Vec::with_capacity(self.config.env.t_max as usize);
        while !self.done {
            steps.push(self.hybrid_step()?);
        }
        if let Some(audit) = self.audit.as_mut() {
            audit.flush()?;
        }
        Ok(TrialRecord {
            seed: self.config.seed,
            total_reward: steps.iter().map(|s| s.reward).sum(),
            terminated_early: self.env_state.t < self.config.env.t_max,
            steps,
            filter_calls: self.filter_calls,
            posterior_updates: self.sampler.updates,
        })
    }
}

/// Runs one trial to completion with the filter its config names.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialRecord> {
    Trial::new(cfg.clone(), filter_for(cfg)?)?.run()
}
