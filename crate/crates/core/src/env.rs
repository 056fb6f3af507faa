//! Base step-count behavioral dynamics.
//!
//! Each day the participant is in a binary context `c` that the agent only
//! observes through a noisy feature `x`. Messages raise habituation, badly
//! tailored messages raise disengagement risk, and the daily step count (the
//! reward) is a baseline plus a message effect attenuated by habituation.

use std::fmt;

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Intervention message type.
///
/// `0` sends nothing, `1` a generic message, `2` a message tailored to
/// context 0 and `3` a message tailored to context 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Action(u8);

impl Action {
    pub const NONE: Action = Action(0);
    pub const GENERIC: Action = Action(1);
    pub const TAILORED_0: Action = Action(2);
    pub const TAILORED_1: Action = Action(3);

    pub const COUNT: usize = 4;
    pub const ALL: [Action; 4] = [Self::NONE, Self::GENERIC, Self::TAILORED_0, Self::TAILORED_1];

    pub fn new(value: u8) -> Result<Self> {
        if (value as usize) < Self::COUNT {
            Ok(Action(value))
        } else {
            Err(Error::param("action", format!("{value} is not in 0..=3")))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn sends_message(self) -> bool {
        self.0 > 0
    }

    /// The tailored message that matches context `c`.
    pub fn tailored_for(c: u8) -> Action {
        Action(c + 2)
    }
}

impl TryFrom<u8> for Action {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        Action::new(value)
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvParams {
    /// Standard deviation of the context feature around the true context.
    pub sigma: f64,
    pub delta_h: f64,
    pub epsilon_h: f64,
    pub delta_d: f64,
    pub epsilon_d: f64,
    /// Baseline step count.
    pub m_s: f64,
    /// Gain of a generic message.
    pub rho1: f64,
    /// Gain of a correctly tailored message.
    pub rho2: f64,
    /// The episode ends once disengagement risk exceeds this value.
    pub d_threshold: f64,
    /// Maximum study length in days.
    pub t_max: u32,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            sigma: 0.4,
            delta_h: 0.1,
            epsilon_h: 0.05,
            delta_d: 0.1,
            epsilon_d: 0.4,
            m_s: 0.1,
            rho1: 50.0,
            rho2: 200.0,
            d_threshold: 1.1,
            t_max: 50,
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        for (name, v) in [
            ("delta_h", self.delta_h),
            ("epsilon_h", self.epsilon_h),
            ("delta_d", self.delta_d),
            ("epsilon_d", self.epsilon_d),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} is outside [0, 1]")));
            }
        }
        for (name, v) in [("m_s", self.m_s), ("rho1", self.rho1), ("rho2", self.rho2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be finite and >= 0")));
            }
        }
        if self.d_threshold.is_nan() {
            return Err(Error::param("d_threshold", "must not be NaN"));
        }
        if self.t_max == 0 {
            return Err(Error::param("t_max", "must be at least 1"));
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::param("sigma", format!("{sigma} must be finite and > 0")))
    }
}

/// Per-day behavioral state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub t: u32,
    /// True context.
    pub c: u8,
    /// Observed context feature.
    pub x: f64,
    /// Posterior probability of context 1 given `x`.
    pub p: f64,
    /// Inferred context.
    pub l: u8,
    pub h: f64,
    pub d: f64,
    pub s: f64,
}

impl EnvState {
    /// Day-0 state: a freshly sampled context, zero habituation,
    /// disengagement and step count.
    pub fn reset(rng: &mut SimRng, params: &EnvParams) -> Result<Self> {
        params.validate()?;
        let (c, x) = sample_context(rng, params.sigma)?;
        let (p, l) = infer_context(x, params.sigma)?;
        Ok(Self {
            t: 0,
            c,
            x,
            p,
            l,
            h: 0.0,
            d: 0.0,
            s: 0.0,
        })
    }

    pub fn is_terminal(&self, params: &EnvParams) -> bool {
        self.d > params.d_threshold || self.t >= params.t_max
    }
}

/// Draws a true context uniformly and its noisy feature.
pub fn sample_context(rng: &mut SimRng, sigma: f64) -> Result<(u8, f64)> {
    check_sigma(sigma)?;
    let c = u8::from(Bernoulli::new(0.5).expect("0.5 is a valid probability").sample(rng));
    let x = Normal::new(f64::from(c), sigma)
        .map_err(|e| Error::param("sigma", e.to_string()))?
        .sample(rng);
    Ok((c, x))
}

/// Bayes posterior `P(c = 1 | x)` under equal priors and unit-spaced
/// Gaussian likelihoods, with the inferred context `p > 0.5`.
pub fn infer_context(x: f64, sigma: f64) -> Result<(f64, u8)> {
    check_sigma(sigma)?;
    let logit = (2.0 * x - 1.0) / (2.0 * sigma * sigma);
    let p = if logit >= 0.0 {
        1.0 / (1.0 + (-logit).exp())
    } else {
        let e = logit.exp();
        e / (1.0 + e)
    };
    Ok((p, u8::from(p > 0.5)))
}

pub fn update_habituation(h: f64, a: Action, delta_h: f64, epsilon_h: f64) -> f64 {
    if a.sends_message() {
        (h + epsilon_h).min(1.0)
    } else {
        (1.0 - delta_h) * h
    }
}

/// `c` is the context the message was sent in.
pub fn update_disengagement(d: f64, a: Action, c: u8, delta_d: f64, epsilon_d: f64) -> f64 {
    if !a.sends_message() {
        d
    } else if a == Action::GENERIC || a == Action::tailored_for(c) {
        (1.0 - delta_d) * d
    } else {
        (d + epsilon_d).min(1.0)
    }
}

/// Step count after action `a` given the already-updated habituation.
pub fn step_count(h_next: f64, a: Action, c: u8, params: &EnvParams) -> f64 {
    if a == Action::GENERIC {
        params.m_s + (1.0 - h_next) * params.rho1
    } else if a == Action::tailored_for(c) {
        params.m_s + (1.0 - h_next) * params.rho2
    } else {
        params.m_s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub next: EnvState,
    pub reward: f64,
    pub done: bool,
}

/// Advances one day. The action acts on the current context; the next
/// context is drawn before habituation, disengagement and steps update.
pub fn env_step(state: &EnvState, a: Action, rng: &mut SimRng, params: &EnvParams) -> Result<Transition> {
    if state.is_terminal(params) {
        return Err(Error::Usage(format!(
            "step called on a terminated episode (t = {}, d = {})",
            state.t, state.d
        )));
    }
    let (c, x) = sample_context(rng, params.sigma)?;
    let (p, l) = infer_context(x, params.sigma)?;
    let h = update_habituation(state.h, a, params.delta_h, params.epsilon_h);
    let d = update_disengagement(state.d, a, state.c, params.delta_d, params.epsilon_d);
    let s = step_count(h, a, state.c, params);
    let next = EnvState {
        t: state.t + 1,
        c,
        x,
        p,
        l,
        h,
        d,
        s,
    };
    let done = next.is_terminal(params);
    Ok(Transition { next, reward: s, done })
}

/// Convenience for drawing a random action in tests and examples.
pub fn random_action<R: Rng + ?Sized>(rng: &mut R) -> Action {
    Action(rng.random_range(0..Action::COUNT as u8))
}
