use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::env::Action;

pub const DEFAULT_HISTORY_WINDOW: usize = 4;

pub const DEFAULT_DYNAMICS_DESCRIPTION: &str = "\
A mobile health app can send a message to the user to encourage the user to walk.
Each day the app either sends no message (action 0), a generic message (action 1), a message tailored to context 0 (action 2), or a message tailored to context 1 (action 3).
The user has a context (0 or 1), a habituation level and a disengagement risk, both between 0 and 1.
The reward is the number of steps the user walks that day.
Sending a message causes the habituation level to increase.
Not sending a message causes the habituation level to decrease.
An incorrectly tailored message causes the disengagement risk to increase.
A correctly tailored message causes the disengagement risk to decrease.
A high habituation level reduces the effect of a message on the step count.
If the disengagement risk becomes too high, the user leaves the study.";

pub const DEFAULT_QUESTION: &str = "\
Should the mobile health app send a message to the user?
Answer 'send' or 'not send' first, then give the reason in one sentence.";

/// One past day shown to the model: the context and action of day `t`, and
/// the reward, habituation and disengagement that followed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    pub t: u32,
    pub context: u8,
    pub action: Action,
    pub reward: f64,
    pub habituation: f64,
    pub disengagement: f64,
}

impl StateRow {
    fn render(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "day {}: context={}, action={}, reward={:.1}, habituation level={:.3}, disengagement risk={:.3}",
            self.t, self.context, self.action, self.reward, self.habituation, self.disengagement
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub dynamics_description: String,
    pub history_window: usize,
    /// Oldest first; the last row holds the current habituation and
    /// disengagement.
    pub state_rows: Vec<StateRow>,
    pub preference: String,
    pub question: String,
}

impl PromptSpec {
    pub fn new(state_rows: Vec<StateRow>, preference: impl Into<String>) -> Self {
        Self {
            dynamics_description: DEFAULT_DYNAMICS_DESCRIPTION.to_string(),
            history_window: DEFAULT_HISTORY_WINDOW,
            state_rows,
            preference: preference.into(),
            question: DEFAULT_QUESTION.to_string(),
        }
    }
}

/// Renders the prompt: description, the most recent `history_window` rows,
/// the user preference, then the question.
pub fn build_prompt(spec: &PromptSpec) -> String {
    let mut out = String::new();
    out.push_str(spec.dynamics_description.trim_end());
    out.push_str("\n\n");

    let start = spec.state_rows.len().saturating_sub(spec.history_window);
    let window = &spec.state_rows[start..];
    if !window.is_empty() {
        out.push_str("The user current state and previous data (oldest day first; the last line gives the current habituation level and disengagement risk):\n");
        for row in window {
            row.render(&mut out);
        }
        out.push('\n');
    }

    let _ = writeln!(out, "The user preference is \"{}\".", spec.preference);
    out.push('\n');
    out.push_str(spec.question.trim_end());
    out.push('\n');
    out
}
