//! `--config` files: flat `key=value` lines naming long flags.

use std::fs;

use anyhow::{bail, Context, Result};

fn has_flag(argv: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    let with_value = format!("--{key}=");
    // `-o` is the short form of both output flags.
    let short = matches!(key, "output" | "out-json");
    argv.iter()
        .any(|a| a == &long || a.starts_with(&with_value) || (short && a.starts_with("-o")))
}

/// Removes `--config FILE` from `argv` and appends the file's settings for
/// every flag not already given. `true` turns on a switch, `false` leaves it
/// off.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>> {
    let mut out = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(p) => path = Some(p),
                None => bail!("--config needs a file"),
            }
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            out.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(out);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{path}:{}: expected key=value", n + 1);
        };
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        if key.is_empty() {
            bail!("{path}:{}: empty key", n + 1);
        }
        if has_flag(&out, &key) {
            continue;
        }
        match value {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            v => {
                extra.push(format!("--{key}"));
                extra.push(v.to_string());
            }
        }
    }
    out.extend(extra);
    Ok(out)
}
