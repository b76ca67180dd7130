//! Optional `key=value` configuration file. Keys use the long flag names
//! (underscores are accepted for dashes); command-line values take
//! precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::Context;

/// A problem with how the program was invoked, reported with exit status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "classes",
    "per-class",
    "length",
    "severity",
    "noise",
    "min-leaf",
    "k",
    "mu",
    "step",
    "iterations",
    "standardize",
    "unit-pull-weight",
    "knn-restricted-impostors",
    "test-per-class",
    "total-split",
    "metric",
    "test-sizes",
    "trials",
];

/// Alternative key spellings, mirroring the flag aliases.
const ALIASES: &[(&str, &str)] = &[("strict-eq16", "unit-pull-weight")];

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Settings> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Settings::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Settings, String> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
            let mut key = key.trim().replace('_', "-");
            if let Some(&(_, canonical)) = ALIASES.iter().find(|(alias, _)| *alias == key) {
                key = canonical.to_string();
            }
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}`", n + 1));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Settings { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        self.values.get(key).map(String::as_str)
    }

    /// Command-line value, else the file's value, else `default`.
    pub fn pick<T: FromStr>(&self, cli: Option<T>, key: &str, default: T) -> anyhow::Result<T> {
        Ok(self.pick_opt(cli, key)?.unwrap_or(default))
    }

    pub fn pick_opt<T: FromStr>(&self, cli: Option<T>, key: &str) -> anyhow::Result<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| usage(format!("config value `{key}={v}` is invalid")))
            })
            .transpose()
    }

    /// Like [`Settings::pick`] for values with a custom parser.
    pub fn pick_with<T>(
        &self,
        cli: Option<T>,
        key: &str,
        default: T,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> anyhow::Result<T> {
        if let Some(v) = cli {
            return Ok(v);
        }
        match self.raw(key) {
            Some(v) => parse(v).map_err(|e| usage(format!("config value `{key}={v}`: {e}"))),
            None => Ok(default),
        }
    }
}

/// `1..59` (inclusive), `5`, or comma-separated mixes such as `1,5,10..12`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: usize = a
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad range start in `{part}`"))?;
                let b: usize = b
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|_| format!("bad range end in `{part}`"))?;
                if a > b {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(
                part.parse()
                    .map_err(|_| format!("`{part}` is not a count"))?,
            ),
        }
    }
    if out.is_empty() {
        return Err("no values given".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_wins() {
        let s = Settings::parse("k = 3\nmu=0.2\n# comment\nstrict_eq16=true\n").unwrap();
        assert_eq!(s.pick(Some(5usize), "k", 1).unwrap(), 5);
        assert_eq!(s.pick(None, "k", 1usize).unwrap(), 3);
        assert_eq!(s.pick(None, "step", 0.01).unwrap(), 0.01);
        assert!(s.pick(None, "unit-pull-weight", false).unwrap());
        assert!(Settings::parse("bogus=1").is_err());
        assert!(Settings::parse("k").is_err());
        let bad = Settings::parse("k=x").unwrap();
        assert!(bad.pick(None, "k", 1usize).unwrap_err().is::<Usage>());
    }

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("1..59").unwrap().len(), 59);
        assert_eq!(parse_sizes("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_sizes("1,5, 10..11").unwrap(), vec![1, 5, 10, 11]);
        assert!(parse_sizes("3..1").is_err());
        assert!(parse_sizes("").is_err());
        assert!(parse_sizes("a").is_err());
    }
}
