//! `--config FILE`: key=value lines become long flags placed before the
//! explicit ones, so the command line overrides the file.

use std::ffi::OsString;
use std::path::PathBuf;

use crate::Failure;

/// Flags from a config file's text. `key=true` gives a bare switch and `key=false` drops it.
pub fn flags_from(text: &str) -> Result<Vec<OsString>, Failure> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("config line {}: expected key=value, got '{line}'", no + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(Failure::usage(format!("config line {}: invalid key '{key}'", no + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => out.push(format!("--{key}={value}").into()),
        }
    }
    Ok(out)
}

/// Removes `--config` from the arguments and splices the file's flags in after the subcommand.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path: Option<PathBuf> = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let p = it.next().ok_or_else(|| Failure::usage("--config needs a file".into()))?;
            path = Some(p.into());
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let flags = flags_from(&text)?;
    let at = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|i| i + 2).unwrap_or(rest.len());
    rest.splice(at..at, flags);
    Ok(rest)
}
