pub mod calibrate;
pub mod cost;
pub mod estimate;
pub mod finetune;
pub mod report;
pub mod serve;
pub mod simulate;
pub mod stress;

use std::path::{Path, PathBuf};

use anyhow::Context;
use peakq_core::domain::FleetFile;

/// Writes `content` to `out` when given, otherwise to stdout. File output
/// always ends with a newline so repeated runs are byte-comparable.
pub(crate) fn emit(out: Option<&PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let text = if content.ends_with('\n') {
                content.to_string()
            } else {
                format!("{content}\n")
            };
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

pub(crate) fn load_fleet_file(path: &Path) -> anyhow::Result<FleetFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    FleetFile::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
}

pub(crate) fn to_pretty_json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}
