//! Loading a sweep description from disk and applying command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use jitai_core::harness::SweepSpec;
use jitai_core::llm::LlmClientConfig;
use jitai_core::{Error, Result};

/// Reads a TOML (`.toml`) or JSON (anything else) sweep description.
pub fn load(path: &Path) -> Result<SweepSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed_base: Option<u64>,
    pub out: Option<PathBuf>,
    pub live_llm: bool,
    pub api_key_env: Option<String>,
}

pub fn apply(mut spec: SweepSpec, o: &Overrides) -> Result<SweepSpec> {
    if let Some(base) = o.seed_base {
        spec.seeds = spec
            .seeds
            .iter()
            .map(|s| {
                s.checked_add(base)
                    .ok_or_else(|| Error::Config(format!("seed {s} + seed base {base} overflows")))
            })
            .collect::<Result<_>>()?;
    }
    if let Some(out) = &o.out {
        spec.output_dir = out.clone();
    }
    if o.live_llm && spec.live_llm.is_none() {
        spec.live_llm = Some(LlmClientConfig::default());
    }
    if let Some(var) = &o.api_key_env {
        match spec.live_llm.as_mut() {
            Some(cfg) => cfg.api_key_env_var = var.clone(),
            None => return Err(Error::Usage("--api-key-env needs --live-llm or an llm section".into())),
        }
    }
    Ok(spec)
}
