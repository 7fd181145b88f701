//! `--config` files: flat `key=value` lines whose keys are flag names
//! (`dim`, `--dim` and `dim_x` for `--dim-x` are all accepted). Blank lines
//! and lines starting with `#` are ignored.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::CommandFactory;

use crate::args::Cli;
use crate::Failure;

fn parse(text: &str, source: &Path) -> Result<Vec<(String, String)>, Failure> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Usage(format!(
                "{}:{}: expected key=value, got {line:?}",
                source.display(),
                i + 1
            )));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        pairs.push((key, value.trim().to_owned()));
    }
    Ok(pairs)
}

/// Value of `--config` among the subcommand's arguments.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Returns `args` with the values of the subcommand's `--config` file
/// inserted ahead of the command-line flags, so the latter take
/// precedence.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    if args.len() < 2 {
        return Ok(args);
    }
    let cli = Cli::command();
    let name = args[1].to_string_lossy().into_owned();
    let Some(command) = cli.find_subcommand(&name) else {
        return Ok(args);
    };
    let Some(path) = config_path(&args[2..]) else {
        return Ok(args);
    };
    let path = path.as_path();
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read --config {}: {e}", path.display())))?;
    let pairs = parse(&text, path)?;

    let known: Vec<&str> = command.get_arguments().filter_map(|a| a.get_long()).collect();
    let mut inserted = Vec::new();
    for (key, value) in pairs {
        if key == "config" || !known.contains(&key.as_str()) {
            return Err(Failure::Usage(format!(
                "{}: unknown key {key:?} for {name}",
                path.display()
            )));
        }
        inserted.push(OsString::from(format!("--{key}")));
        inserted.push(OsString::from(value));
    }
    // Subcommands take no global flags, so argument 1 is the subcommand.
    let mut out = args[..2].to_vec();
    out.extend(inserted);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_normalizes_keys() {
        let pairs = parse("# comment\n\ndim = 50\n--min_count=1\n", Path::new("c")).unwrap();
        assert_eq!(pairs, vec![("dim".into(), "50".into()), ("min-count".into(), "1".into())]);
        assert!(parse("dim 50", Path::new("c")).is_err());
    }

    #[test]
    fn finds_config_flag() {
        let args = |v: &[&str]| v.iter().map(OsString::from).collect::<Vec<_>>();
        assert_eq!(config_path(&args(&["--dim", "3", "--config", "a.cfg"])), Some(PathBuf::from("a.cfg")));
        assert_eq!(config_path(&args(&["--config=b.cfg"])), Some(PathBuf::from("b.cfg")));
        assert_eq!(config_path(&args(&["--", "--config", "x"])), None);
    }
}
