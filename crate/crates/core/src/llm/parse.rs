use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Send,
    NotSend,
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub reason: Option<String>,
    /// Full model output, kept for the audit log.
    pub raw: String,
}

/// Words that negate an immediately following (or next-but-one) "send".
const NEGATORS: &[&str] = &[
    "not", "don't", "dont", "never", "shouldn't", "shouldnt", "won't", "wont", "cannot", "can't", "cant",
    "mustn't", "mustnt", "doesn't", "doesnt", "didn't", "didnt",
];

/// A lowercased word and the byte offset just past it.
struct Word {
    text: String,
    end: usize,
}

fn words(raw: &str) -> impl Iterator<Item = Word> + '_ {
    let mut iter = raw.char_indices().peekable();
    std::iter::from_fn(move || {
        // skip separators
        while let Some(&(_, ch)) = iter.peek() {
            if ch.is_alphanumeric() {
                break;
            }
            iter.next();
        }
        let (start, _) = *iter.peek()?;
        let mut end = start;
        let mut text = String::new();
        while let Some(&(i, ch)) = iter.peek() {
            let apostrophe = matches!(ch, '\'' | '\u{2019}');
            if ch.is_alphanumeric() {
                text.extend(ch.to_lowercase());
            } else if apostrophe {
                text.push('\'');
            } else {
                break;
            }
            end = i + ch.len_utf8();
            iter.next();
        }
        let text = text.trim_end_matches('\'').to_string();
        Some(Word { text, end })
    })
}

fn is_negator(w: &str) -> bool {
    NEGATORS.contains(&w)
}

/// Classifies a model response.
///
/// Scans case-insensitively for the word "send". A "send" preceded by a
/// negation ("not send", "do not send", "don't send", "not to send") is a
/// refusal. The first refusal wins if it appears before any plain "send";
/// a plain "send" with no refusal anywhere is an approval; anything else is
/// unparseable. The reason is the text after the first decision word.
pub fn parse_decision(raw: &str) -> Decision {
    let mut first_send: Option<usize> = None;
    let mut first_refusal: Option<usize> = None;
    // last two words before the current one
    let mut prev: [String; 2] = [String::new(), String::new()];

    for word in words(raw) {
        if word.text == "send" {
            let negated = is_negator(&prev[1]) || (is_filler(&prev[1]) && is_negator(&prev[0]));
            if negated {
                first_refusal.get_or_insert(word.end);
            } else {
                first_send.get_or_insert(word.end);
            }
        }
        prev.swap(0, 1);
        prev[1] = word.text;
    }

    let (verdict, decision_end) = match (first_refusal, first_send) {
        (Some(n), Some(s)) if n < s => (Verdict::NotSend, Some(n)),
        (Some(n), None) => (Verdict::NotSend, Some(n)),
        (None, Some(s)) => (Verdict::Send, Some(s)),
        _ => (Verdict::Unparseable, None),
    };

    let reason = decision_end.and_then(|end| {
        let rest = raw[end..].trim_start_matches(|c: char| {
            c.is_whitespace() || matches!(c, '.' | ',' | ':' | ';' | '-' | '\u{2014}' | '\u{2013}' | '!' | '"' | '\'' | '*' | ')')
        });
        let rest = rest.trim_end();
        (!rest.is_empty()).then(|| rest.to_string())
    });

    Decision {
        verdict,
        reason,
        raw: raw.to_string(),
    }
}

/// Words allowed between a negator and "send", as in "not to send".
fn is_filler(w: &str) -> bool {
    matches!(w, "to" | "even" | "ever" | "yet" | "actually")
}
