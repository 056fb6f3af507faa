#![allow(dead_code)]

pub mod oracles;
pub mod stub_server;

use jitai_core::llm::Verdict;

/// Canned model responses and the label each must parse to.
pub const RESPONSE_FIXTURES: &[(&str, Verdict)] = &[
    // the three response styles reported for the validation runs
    ("not send. The user has a sore leg, indicating they cannot walk. The app should not send a message.", Verdict::NotSend),
    ("Not send. The user is feeling dizzy, which means they cannot walk, so the mobile health app should not send a message.", Verdict::NotSend),
    ("Send \u{2014} The user is expressing anxiety, and a tailored message could be helpful.", Verdict::Send),
    // affirmative
    ("send", Verdict::Send),
    ("SEND. A short reminder is fine today.", Verdict::Send),
    ("Decision: Send\nReason: the user only mentioned a prior commitment later in the day.", Verdict::Send),
    ("**Send**: habituation is low, so a message will still be effective.", Verdict::Send),
    ("Yes, send a message tailored to context 1.", Verdict::Send),
    // negated
    ("NOT SEND", Verdict::NotSend),
    ("Do not send. The user twisted their ankle.", Verdict::NotSend),
    ("don't send - the user needs to rest", Verdict::NotSend),
    ("Don\u{2019}t send: the user is recovering from surgery.", Verdict::NotSend),
    ("The app should not send a message because the user has joint pain.", Verdict::NotSend),
    ("I would advise not to send any message today.", Verdict::NotSend),
    ("Decision: NOT_SEND\nReason: the user forgot their shoes.", Verdict::NotSend),
    ("Never send a message while the user is injured.", Verdict::NotSend),
    ("\"not send\" - sending would only raise habituation.", Verdict::NotSend),
    // reason first
    ("Because the user has a headache, the app should not send a message.", Verdict::NotSend),
    ("The user is tired but can still walk, so the app should send a message.", Verdict::Send),
    ("Given that the weather is bad and the user cannot walk outside, do NOT send.", Verdict::NotSend),
    // mixed case and punctuation
    ("nOt SeNd!!!", Verdict::NotSend),
    ("Send!", Verdict::Send),
    // no decision
    ("maybe later", Verdict::Unparseable),
    ("", Verdict::Unparseable),
    ("I am not sure what the app should do.", Verdict::Unparseable),
    ("Sending a message causes the habituation level to increase.", Verdict::Unparseable),
    // contradictory: approval before refusal
    ("Send. On reflection, do not send.", Verdict::Unparseable),
];
