//! `key = value` config files merged underneath command-line flags.
//!
//! Each entry becomes `--key value`; `true` becomes a bare `--key` and
//! `false` drops the entry. Lines starting with `#` and blank lines are
//! skipped, and values may be wrapped in double quotes.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key = value, found {line:?}", lineno + 1);
        };
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            bail!("line {}: bad key {key:?}", lineno + 1);
        }
        let value = value.trim();
        let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value);
        entries.push((key.to_owned(), value.to_owned()));
    }
    Ok(entries)
}

pub fn to_args(entries: &[(String, String)]) -> Vec<OsString> {
    let mut args = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    args
}

pub fn load(path: &Path) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    Ok(to_args(&parse(&text).with_context(|| format!("in config {}", path.display()))?))
}

/// Pull `--config PATH` / `--config=PATH` out of `argv` and splice the file's
/// flags in right after the subcommand, so flags given later on the command
/// line take precedence.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let Some(path) = it.next() else { bail!("--config needs a path") };
            config = Some(path);
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(path.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let extra = load(Path::new(&path))?;
    // argv[0] is the program, argv[1] the subcommand.
    let split = rest.len().min(2);
    let mut out: Vec<OsString> = rest[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[split..]);
    Ok(out)
}
