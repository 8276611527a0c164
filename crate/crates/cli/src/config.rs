//! Flat `key = value` config files.
//!
//! Keys are long flag names without the leading dashes. `[section]` headers
//! are ignored, `#` and `;` start comments. Boolean flags take `true` or
//! `false`. Values are spliced into the argument list right after the
//! subcommand, ahead of the flags given on the command line, which therefore
//! take precedence.

use std::ffi::OsString;
use std::fs;

use crate::error::{CliError, CliResult};

pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", n + 1))
        })?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn to_flags(pairs: Vec<(String, String)>) -> Vec<OsString> {
    let mut out = Vec::new();
    for (key, value) in pairs {
        match value.as_str() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    out
}

/// Removes `--config FILE` from `args` and splices the file's settings in
/// after the subcommand.
pub fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            let path = iter
                .next()
                .ok_or_else(|| CliError::Usage("--config requires a file".into()))?;
            config = Some(path);
        } else if let Some(path) = arg.to_str().and_then(|s| s.strip_prefix("--config=")) {
            config = Some(path.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| {
        CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy()))
    })?;
    let flags = to_flags(parse_config(&text)?);
    // argv[0], then the first non-flag token is the subcommand
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map_or(rest.len(), |i| i + 2);
    let tail = rest.split_off(at.min(rest.len()));
    rest.extend(flags);
    rest.extend(tail);
    Ok(rest)
}
