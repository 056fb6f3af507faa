//! The LLM send/not-send filter: prompt construction, response parsing, a
//! seeded mock oracle for offline runs, and an OpenAI-style HTTP client.

pub mod audit;
pub mod client;
pub mod oracle;
pub mod parse;
pub mod prompt;

pub use audit::{AuditLog, AuditRecord};
pub use client::{query_llm, LlmClient, LlmClientConfig};
pub use oracle::mock_oracle;
pub use parse::{parse_decision, Decision, Verdict};
pub use prompt::{build_prompt, PromptSpec, StateRow};
