//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names of the chosen subcommand (underscores are
//! accepted for hyphens). A value from the file is used only when the flag
//! was not given on the command line.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command};

use crate::error::CliError;

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got `{line}`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((key, value));
    }
    Ok(out)
}

/// Command-line arguments to append so that file values fill unset flags.
pub fn extra_args(path: &Path, sub: &Command, matches: &ArgMatches) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut extra = Vec::new();
    for (key, value) in parse_pairs(&text)? {
        let arg =
            sub.get_arguments().find(|a| a.get_long() == Some(key.as_str()) && key != "config").ok_or_else(|| {
                CliError::Config(format!("unknown key `{key}` for `{}` in {}", sub.get_name(), path.display()))
            })?;
        if matches.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => extra.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                other => return Err(CliError::Config(format!("`{key}` expects true or false, got `{other}`"))),
            },
            _ => {
                extra.push(format!("--{key}").into());
                extra.push(value.into());
            }
        }
    }
    Ok(extra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_skip_comments_and_normalise_keys() {
        let p = parse_pairs("# chain\n draws = 500\nburn_in=50\n\nprior = \"dep-gamma\"\n").unwrap();
        assert_eq!(
            p,
            vec![("draws".into(), "500".into()), ("burn-in".into(), "50".into()), ("prior".into(), "dep-gamma".into())]
        );
        assert!(parse_pairs("draws 500").is_err());
    }
}
