//! Scenario files: `[section]` headers followed by `key = value` lines.
//! `#` and `;` start comments. Keys are checked against the sections each
//! command understands, so a typo is an error rather than a silent default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use weyldyn::io::read_sampled_potential;
use weyldyn::potential::make_catalog_potential;
use weyldyn::{Potential, PotentialKind};

use crate::CliError;

#[derive(Debug, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    /// Directory relative paths in the file are resolved against.
    dir: PathBuf,
    /// Raw bytes, for the manifest hash.
    pub raw: Vec<u8>,
}

#[derive(Debug)]
struct Entry {
    line: usize,
    value: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(raw.clone())
            .map_err(|_| usage(format!("{} is not UTF-8", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut cfg = Self::parse(&text, dir)?;
        cfg.raw = raw;
        Ok(cfg)
    }

    pub fn parse(text: &str, dir: PathBuf) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| usage(format!("line {line_no}: unterminated section header")))?
                    .trim();
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("line {line_no}: expected `key = value`")))?;
            let section = current
                .as_ref()
                .ok_or_else(|| usage(format!("line {line_no}: key outside any section")))?;
            let entries = sections.get_mut(section).expect("section registered");
            let key = key.trim().to_string();
            if entries.contains_key(&key) {
                return Err(usage(format!("line {line_no}: duplicate key `{key}` in [{section}]")));
            }
            entries.insert(
                key,
                Entry {
                    line: line_no,
                    value: value.trim().to_string(),
                },
            );
        }
        Ok(Config {
            sections,
            dir,
            raw: text.as_bytes().to_vec(),
        })
    }

    /// Reject sections and keys that `allowed` does not list.
    pub fn restrict(&self, allowed: &[(&str, &[&str])]) -> Result<(), CliError> {
        for (section, entries) in &self.sections {
            let Some((_, keys)) = allowed.iter().find(|(s, _)| s == section) else {
                return Err(usage(format!("unknown section [{section}]")));
            };
            for (key, entry) in entries {
                if !keys.contains(&key.as_str()) {
                    return Err(usage(format!("line {}: unknown key `{key}` in [{section}]", entry.line)));
                }
            }
        }
        Ok(())
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section)?.get(key)
    }

    pub fn str(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        self.entry(section, key)
            .map(|e| parse_f64(&e.value).map_err(|m| usage(format!("line {}: [{section}] {key}: {m}", e.line))))
            .transpose()
    }

    pub fn f64_required(&self, section: &str, key: &str) -> Result<f64, CliError> {
        self.f64(section, key)?
            .ok_or_else(|| usage(format!("missing `{key}` in [{section}]")))
    }

    pub fn usize(&self, section: &str, key: &str) -> Result<Option<usize>, CliError> {
        self.entry(section, key)
            .map(|e| {
                e.value
                    .parse::<usize>()
                    .map_err(|err| usage(format!("line {}: [{section}] {key}: {err}", e.line)))
            })
            .transpose()
    }

    pub fn bool(&self, section: &str, key: &str) -> Result<Option<bool>, CliError> {
        self.entry(section, key)
            .map(|e| match e.value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(usage(format!("line {}: [{section}] {key}: not a boolean: `{other}`", e.line))),
            })
            .transpose()
    }

    /// Comma-separated reals.
    pub fn f64_list(&self, section: &str, key: &str) -> Result<Vec<f64>, CliError> {
        let Some(e) = self.entry(section, key) else {
            return Ok(Vec::new());
        };
        e.value
            .split(',')
            .map(|tok| parse_f64(tok.trim()).map_err(|m| usage(format!("line {}: [{section}] {key}: {m}", e.line))))
            .collect()
    }

    /// Comma-separated complex numbers written `re:im`.
    pub fn complex_list(&self, section: &str, key: &str) -> Result<Vec<Complex<f64>>, CliError> {
        let Some(e) = self.entry(section, key) else {
            return Ok(Vec::new());
        };
        e.value
            .split(',')
            .map(|tok| {
                let bad = || usage(format!("line {}: [{section}] {key}: expected `re:im`, got `{}`", e.line, tok.trim()));
                let (re, im) = tok.trim().split_once(':').ok_or_else(bad)?;
                Ok(Complex::new(
                    parse_f64(re.trim()).map_err(|_| bad())?,
                    parse_f64(im.trim()).map_err(|_| bad())?,
                ))
            })
            .collect()
    }

    /// The `[potential]` section: `kind` with `params`, or `file` for
    /// sampled data.
    pub fn potential(&self) -> Result<Potential<f64>, CliError> {
        if !self.has_section("potential") {
            return Err(usage("missing [potential] section"));
        }
        if let Some(file) = self.str("potential", "file") {
            let path = self.dir.join(file);
            return read_sampled_potential(&path)
                .map_err(|e| usage(format!("potential file {}: {e}", path.display())));
        }
        let kind: PotentialKind = self
            .str("potential", "kind")
            .ok_or_else(|| usage("[potential] needs `kind` or `file`"))?
            .parse()
            .map_err(|e| usage(format!("{e}")))?;
        let params = self.f64_list("potential", "params")?;
        make_catalog_potential(kind, &params).map_err(|e| usage(format!("[potential]: {e}")))
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Config {
        Config::parse(text, PathBuf::new()).unwrap()
    }

    #[test]
    fn sections_keys_and_comments() {
        let cfg = parse("# scenario\n[potential]\nkind = box ; inline\nparams = 1, 2\n\n[weyl]\nk = 0:2, 1.5:-0.5\nforce = yes\n");
        assert_eq!(cfg.str("potential", "kind"), Some("box"));
        assert_eq!(cfg.f64_list("potential", "params").unwrap(), vec![1.0, 2.0]);
        assert_eq!(
            cfg.complex_list("weyl", "k").unwrap(),
            vec![Complex::new(0.0, 2.0), Complex::new(1.5, -0.5)]
        );
        assert_eq!(cfg.bool("weyl", "force").unwrap(), Some(true));
        assert_eq!(cfg.f64("weyl", "missing").unwrap(), None);
        let p = cfg.potential().unwrap();
        assert_eq!(p.kind(), PotentialKind::ConstantBox);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["key = 1\n", "[a\nk = 1\n", "[a]\nnovalue\n", "[a]\nk = 1\nk = 2\n"] {
            assert!(Config::parse(bad, PathBuf::new()).is_err(), "{bad:?}");
        }
        let cfg = parse("[kernel]\nh = abc\n");
        assert!(cfg.f64("kernel", "h").is_err());
        assert!(cfg.restrict(&[("kernel", &["eta_max"])]).is_err());
        assert!(cfg.restrict(&[("kernel", &["h"])]).is_ok());
        assert!(parse("[other]\n").restrict(&[("kernel", &["h"])]).is_err());
        assert!(parse("[potential]\nkind = nope\n").potential().is_err());
        assert!(parse("[potential]\nfile = /nonexistent/q.txt\n").potential().is_err());
    }
}
