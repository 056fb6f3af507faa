//! Seeded stand-in for the LLM.
//!
//! Given an active cannot-walk preference the oracle refuses to send, except
//! that with probability `ambiguity_rate` it approves, which mimics the model
//! misreading an ambiguous preference.

use rand::Rng;

use super::parse::{Decision, Verdict};
use crate::rng::SimRng;

pub fn mock_oracle(preference: Option<&str>, ambiguity_rate: f64, rng: &mut SimRng) -> Decision {
    let Some(preference) = preference else {
        // not consulted without a preference; approving keeps the candidate
        return Decision {
            verdict: Verdict::Send,
            reason: None,
            raw: "send".into(),
        };
    };
    let rate = ambiguity_rate.clamp(0.0, 1.0);
    let approve = rng.random::<f64>() < rate;
    let (verdict, reason) = if approve {
        (
            Verdict::Send,
            format!("The user said \"{preference}\", and a tailored message could be helpful."),
        )
    } else {
        (
            Verdict::NotSend,
            format!("The user said \"{preference}\", indicating they cannot walk."),
        )
    };
    let word = if approve { "send" } else { "not send" };
    Decision {
        verdict,
        raw: format!("{word}. {reason}"),
        reason: Some(reason),
    }
}
