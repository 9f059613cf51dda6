//! Flat `key = value` config files. Each key is a long flag of the
//! subcommand; values given on the command line take precedence.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::failure::{CmdResult, Failure};

/// Parses a config file into flag tokens (`--key value`, or `--key` for
/// `true`). `false` entries are dropped.
pub fn parse_config(text: &str) -> CmdResult<Vec<OsString>> {
    let mut tokens = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(Failure::usage(format!("config line {}: bad key `{key}`", i + 1)));
        }
        match value {
            "true" => tokens.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                tokens.push(format!("--{key}").into());
                tokens.push(value.into());
            }
        }
    }
    Ok(tokens)
}

/// Pulls `--config PATH` out of `args` and splices the file's entries in
/// right after the subcommand name, ahead of the explicit flags.
pub fn expand_config_args(args: Vec<OsString>) -> CmdResult<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let path = iter.next().ok_or_else(|| Failure::usage("--config needs a path"))?;
            config = Some(path);
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(path.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", Path::new(&path).display())))?;
    let tokens = parse_config(&text)?;
    let sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 1)
        .ok_or_else(|| Failure::usage("--config given without a subcommand"))?;
    rest.splice(sub + 1..sub + 1, tokens);
    Ok(rest)
}

/// Renders resolved arguments in the config-file format, keys sorted.
pub fn render_config<T: Serialize>(args: &T) -> String {
    let value = serde_json::to_value(args).expect("arguments serialize");
    let mut out = String::new();
    if let Value::Object(map) = value {
        for (key, v) in map {
            let rendered = match v {
                Value::Null => continue,
                Value::Bool(b) => b.to_string(),
                Value::String(s) => s,
                Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
                other => scalar(&other),
            };
            out.push_str(&format!("{key} = {rendered}\n"));
        }
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_entries() {
        let text = "# comment\nepochs = 5\n\nhidden=10,10\nverbose = true\nquiet = false\n";
        let tokens = parse_config(text).unwrap();
        assert_eq!(tokens, os(&["--epochs", "5", "--hidden", "10,10", "--verbose"]));
        assert!(parse_config("epochs 5").is_err());
        assert!(parse_config("--epochs = 5").is_err());
    }

    #[test]
    fn splices_after_the_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        fs::write(&path, "epochs = 5\nseed = 2\n").unwrap();
        let args = os(&["wlda", "train-wlda", "--config", path.to_str().unwrap(), "--seed", "3"]);
        let out = expand_config_args(args).unwrap();
        assert_eq!(out, os(&["wlda", "train-wlda", "--epochs", "5", "--seed", "2", "--seed", "3"]));
        let missing = os(&["wlda", "generate", "--config", "/nonexistent/c.txt"]);
        assert!(matches!(expand_config_args(missing), Err(Failure::Usage(_))));
    }

    #[test]
    fn renders_sorted_and_skips_nulls() {
        #[derive(Serialize)]
        #[serde(rename_all = "kebab-case")]
        struct A {
            num_docs: usize,
            hidden: Vec<usize>,
            truth: Option<String>,
            fixed: bool,
        }
        let text = render_config(&A { num_docs: 3, hidden: vec![4, 5], truth: None, fixed: false });
        assert_eq!(text, "fixed = false\nhidden = 4,5\nnum-docs = 3\n");
    }
}
