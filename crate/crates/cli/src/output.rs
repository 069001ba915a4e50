use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Writes `contents` through a temporary file in the target directory and
/// renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// `foo.csv` → `foo.csv.config.json`
pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// `foo.json` → `foo.map.json`
pub fn map_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.map.json"))
}

/// A JSON object with the effective configuration added under `config`.
pub fn with_config<T: Serialize>(body: &T, config: &Value) -> Result<String> {
    let mut value = serde_json::to_value(body)?;
    match &mut value {
        Value::Object(map) => {
            map.insert("config".into(), config.clone());
        }
        other => {
            let inner = other.take();
            value = serde_json::json!({ "result": inner, "config": config });
        }
    }
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

/// JSON report to `out`, or to standard output.
pub fn emit_json(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Data file to `out` with a `.config.json` sidecar, or to standard output.
pub fn emit_data(out: Option<&Path>, text: &str, config: &Value) -> Result<()> {
    match out {
        Some(p) => {
            write_atomic(p, text)?;
            write_atomic(
                &sidecar_path(p, ".config.json"),
                &(serde_json::to_string_pretty(config)? + "\n"),
            )
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}
