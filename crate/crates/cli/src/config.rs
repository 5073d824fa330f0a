//! Minimal `key = value` configuration files with `[section]` headers.
//!
//! Keys before the first header live in the root section, named `""`.
//! Everything after `#` on a line is a comment. Duplicate keys and duplicate
//! sections are errors.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    sections: BTreeMap<String, Section>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    name: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut config = Config::default();
        config.sections.insert(String::new(), Section::default());
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
                    .ok_or_else(|| CliError::config(format!("line {lineno}: malformed section header")))?;
                if config.sections.contains_key(name) {
                    return Err(CliError::config(format!("line {lineno}: section [{name}] appears twice")));
                }
                config.sections.insert(name.to_string(), Section { name: name.to_string(), ..Default::default() });
                current = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {lineno}: expected `key = value`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::config(format!("line {lineno}: empty key")));
            }
            let section = config.sections.get_mut(&current).expect("current section exists");
            if section.entries.insert(key.to_string(), (lineno, value.trim().to_string())).is_some() {
                return Err(CliError::config(format!("line {lineno}: duplicate key `{key}`")));
            }
        }
        Ok(config)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    /// The root section; always present.
    pub fn root(&self) -> &Section {
        &self.sections[""]
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }
}

impl Section {
    fn label(&self, key: &str) -> String {
        if self.name.is_empty() {
            format!("`{key}`")
        } else {
            format!("`{}.{key}`", self.name)
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Parses `key` if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(format!("line {line}: cannot parse {} from `{v}`", self.label(key)))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?.ok_or_else(|| CliError::config(format!("missing {}", self.label(key))))
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some((line, v)) = self.entries.get(key) else { return Ok(None) };
        v.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
            .map_err(|_| CliError::config(format!("line {line}: {} must be a comma-separated list of numbers", self.label(key))))
    }

    /// Semicolon-separated list of `x, y` pairs.
    pub fn points(&self, key: &str) -> Result<Option<Vec<(f64, f64)>>, CliError> {
        let Some((line, v)) = self.entries.get(key) else { return Ok(None) };
        let err = || CliError::config(format!("line {line}: {} must be a list of `x, y` pairs separated by `;`", self.label(key)));
        v.split(';')
            .map(|pair| {
                let mut it = pair.split(',').map(|s| s.trim().parse::<f64>());
                match (it.next(), it.next(), it.next()) {
                    (Some(Ok(x)), Some(Ok(y)), None) => Ok((x, y)),
                    _ => Err(err()),
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Errors on any key not listed in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for (key, (line, _)) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::config(format!("line {line}: unknown key {}", self.label(key))));
            }
        }
        Ok(())
    }
}
