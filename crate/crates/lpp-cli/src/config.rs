//! Flat `key=value` config files merged into the argument vector.
//!
//! A key `k` with value `v` becomes `--k v` unless `--k` already appears on the
//! command line, so explicit flags always win. Values `true` and the empty
//! string turn the key into a bare switch.

use std::fs;
use std::path::Path;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("config line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
}

/// Parses `key=value` lines; blank lines and lines starting with `#` are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: idx + 1, text: raw.to_string() });
        };
        let key = k.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax { line: idx + 1, text: raw.to_string() });
        }
        pairs.push((key.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Value of `--config` in `args`, in either `--config path` or `--config=path` form.
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn has_flag(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_eq = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&with_eq))
}

/// Returns `args` with the config file's entries appended and the `--config` flag removed.
pub fn merge(args: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| ConfigError::Read { path: path.clone(), message: e.to_string() })?;
    let pairs = parse(&text)?;

    let mut out = Vec::with_capacity(args.len() + 2 * pairs.len());
    let mut skip = false;
    for a in &args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--config" {
            skip = true;
            continue;
        }
        if a.starts_with("--config=") {
            continue;
        }
        out.push(a.clone());
    }
    for (k, v) in pairs {
        if k == "config" || has_flag(&out, &k) {
            continue;
        }
        out.push(format!("--{k}"));
        if !(v.is_empty() || v == "true") {
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_pairs_and_skips_comments() {
        let pairs = parse("# header\n\np = 0.5\nseed=7\n").unwrap();
        assert_eq!(pairs, vec![("p".into(), "0.5".into()), ("seed".into(), "7".into())]);
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert_eq!(parse("p 0.5").unwrap_err(), ConfigError::Syntax { line: 1, text: "p 0.5".into() });
        assert!(parse("=3").is_err());
    }

    #[test]
    fn command_line_wins_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "p=0.3\nseed=9\n").unwrap();
        let args = v(&["lpp", "euler", "rate", "--config", path.to_str().unwrap(), "--p", "0.5"]);
        let merged = merge(args).unwrap();
        assert_eq!(merged, v(&["lpp", "euler", "rate", "--p", "0.5", "--seed", "9"]));
    }

    #[test]
    fn without_config_args_are_untouched() {
        let args = v(&["lpp", "bounds", "--p", "0.5"]);
        assert_eq!(merge(args.clone()).unwrap(), args);
    }

    #[test]
    fn missing_file_is_reported() {
        let args = v(&["lpp", "bounds", "--config=/nonexistent/lpp.cfg"]);
        assert!(matches!(merge(args), Err(ConfigError::Read { .. })));
    }
}
