//! Scenario file loading.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use misinfo_core::scenario::ScenarioConfig;

/// Reads a TOML scenario; with no path, the three-community defaults.
pub fn load(path: Option<&Path>) -> Result<ScenarioConfig> {
    let Some(path) = path else {
        return Ok(ScenarioConfig::three_community());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn parse(text: &str) -> Result<ScenarioConfig> {
    Ok(toml::from_str(text)?)
}

/// `--out`, then the config's `output_dir`, then `MISINFO_OUT`, then `out`.
pub fn output_dir(flag: Option<&Path>, config: Option<&str>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = config {
        return PathBuf::from(p);
    }
    std::env::var_os("MISINFO_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}
