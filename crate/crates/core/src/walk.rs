//! Hidden walk state and the "cannot walk" constraint.
//!
//! `w` follows a two-state Markov chain (`0` cannot walk, `1` can walk). On
//! entering `w = 0` a text preference is drawn from a pool of reasons; while
//! `w = 0` the constraint inflates habituation and disengagement and the day's
//! reward is zero.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::EnvState;
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub const DEFAULT_PREFERENCES: [&str; 20] = [
    "I am tired",
    "I do not want to walk",
    "I got an injury",
    "my leg is sore",
    "I have a headache",
    "the weather is bad",
    "I have a cold",
    "I feel unwell",
    "I have a prior commitment",
    "I have a blister",
    "I\u{2019}m feeling dizzy",
    "I twisted my ankle",
    "I am recovering from surgery",
    "I need to rest",
    "I have joint pain",
    "I\u{2019}m dealing with anxiety",
    "I have a family obligation",
    "I forgot my shoes",
    "I don\u{2019}t have anyone to walk with",
    "I have to finish my work first",
];

/// When the cannot-walk constraint inflates `h` and `d`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Every day spent in `w = 0`.
    #[default]
    EveryStep,
    /// Only on the day the user enters `w = 0`.
    OnTransition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkParams {
    /// `P(w' = 1 | w = 0)`.
    pub p_w01: f64,
    /// `P(w' = 1 | w = 1)`.
    pub p_w11: f64,
    /// Relative disengagement increase while constrained.
    pub eta_d: f64,
    /// Relative habituation increase while constrained.
    pub eta_h: f64,
    pub constraint_mode: ConstraintMode,
    pub preference_pool: Vec<String>,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self {
            p_w01: 0.9,
            p_w11: 0.7,
            eta_d: 0.1,
            eta_h: 0.1,
            constraint_mode: ConstraintMode::EveryStep,
            preference_pool: default_pool(),
        }
    }
}

impl WalkParams {
    /// Parameterization by the two "stay" probabilities.
    pub fn from_stay_probabilities(p_w11: f64, p_w00: f64) -> Self {
        Self {
            p_w11,
            p_w01: 1.0 - p_w00,
            ..Default::default()
        }
    }

    pub fn p_w00(&self) -> f64 {
        1.0 - self.p_w01
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_w01", self.p_w01),
            ("p_w11", self.p_w11),
            ("eta_d", self.eta_d),
            ("eta_h", self.eta_h),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} is outside [0, 1]")));
            }
        }
        if self.preference_pool.is_empty() {
            return Err(Error::Config("preference pool is empty".into()));
        }
        Ok(())
    }
}

pub fn default_pool() -> Vec<String> {
    DEFAULT_PREFERENCES.iter().map(|s| s.to_string()).collect()
}

/// Reads a preference pool, one entry per line. Blank lines are skipped.
pub fn load_pool(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pool: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if pool.is_empty() {
        return Err(Error::Config(format!("preference file {} has no entries", path.display())));
    }
    Ok(pool)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkState {
    pub w: u8,
    pub preference: Option<String>,
}

impl Default for WalkState {
    fn default() -> Self {
        Self::can_walk()
    }
}

impl WalkState {
    pub fn can_walk() -> Self {
        Self { w: 1, preference: None }
    }

    pub fn cannot_walk(preference: impl Into<String>) -> Self {
        Self {
            w: 0,
            preference: Some(preference.into()),
        }
    }

    pub fn is_constrained(&self) -> bool {
        self.w == 0
    }

    pub fn is_consistent(&self) -> bool {
        (self.w == 0) == self.preference.is_some()
    }
}

pub fn walk_transition(w: u8, rng: &mut SimRng, params: &WalkParams) -> u8 {
    let p_one = if w == 0 { params.p_w01 } else { params.p_w11 };
    u8::from(rng.random::<f64>() < p_one)
}

pub fn draw_preference(rng: &mut SimRng, pool: &[String]) -> Result<String> {
    if pool.is_empty() {
        return Err(Error::Config("cannot draw from an empty preference pool".into()));
    }
    Ok(pool[rng.random_range(0..pool.len())].clone())
}

/// Inflates `d` and `h` in proportion to their current value, capped at 1.
/// The returned reward replaces the day's step reward.
pub fn apply_constraint(state: &EnvState, params: &WalkParams) -> (EnvState, f64) {
    let mut next = state.clone();
    next.d = (state.d + params.eta_d * state.d).min(1.0);
    next.h = (state.h + params.eta_h * state.h).min(1.0);
    (next, 0.0)
}

pub fn walk_step(walk: &WalkState, rng: &mut SimRng, params: &WalkParams) -> Result<WalkState> {
    let w = walk_transition(walk.w, rng, params);
    let preference = match (walk.w, w) {
        (_, 1) => None,
        (0, _) => walk.preference.clone(),
        _ => Some(draw_preference(rng, &params.preference_pool)?),
    };
    Ok(WalkState { w, preference })
}
