//! Key=value configuration with a fixed per-command schema.
//!
//! Precedence: built-in defaults, then the config file, then command-line
//! flags, then HOLDERCOVER_SEED for the `seed` key. Every getter rewrites
//! the stored string into the canonical rendering of the parsed value, so
//! the map embedded in a report reproduces the run exactly when fed back
//! through a config file.

use crate::error::CliError;
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn key(key: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, default, help }
}

/// Report destination and format, shared by every reporting command.
pub const OUTPUT_KEYS: [KeySpec; 2] = [
    key("out", "-", "report path, `-` for stdout"),
    key("format", "json", "report format: json or csv"),
];

#[derive(Debug)]
struct Entry {
    value: String,
    /// File coordinates when the value came from a config file and has not
    /// been canonicalized yet; parse errors then carry the line number.
    origin: Option<(String, usize)>,
}

#[derive(Debug)]
pub struct Config {
    values: BTreeMap<&'static str, Entry>,
}

fn parse_file(path: &Path) -> Result<Vec<(usize, String, String)>, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{shown}: {e}")))?;
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((k, v)) = trimmed.split_once('=') else {
            return Err(CliError::Config {
                path: shown,
                line: line_no,
                msg: format!("expected key=value, got `{trimmed}`"),
            });
        };
        entries.push((line_no, k.trim().to_string(), v.trim().to_string()));
    }
    if entries.is_empty() {
        return Err(CliError::Config {
            path: shown,
            line: 1,
            msg: "config file holds no key=value entries".into(),
        });
    }
    Ok(entries)
}

impl Config {
    pub fn resolve(
        schema: Vec<KeySpec>,
        file: Option<&Path>,
        flags: Vec<(&'static str, Option<String>)>,
    ) -> Result<Self, CliError> {
        let mut values: BTreeMap<&'static str, Entry> = BTreeMap::new();
        for spec in &schema {
            values.insert(
                spec.key,
                Entry {
                    value: spec.default.to_string(),
                    origin: None,
                },
            );
        }
        if let Some(path) = file {
            for (line, k, v) in parse_file(path)? {
                let Some(spec) = schema.iter().find(|s| s.key == k) else {
                    return Err(CliError::Config {
                        path: path.display().to_string(),
                        line,
                        msg: format!("unknown key `{k}`"),
                    });
                };
                values.insert(
                    spec.key,
                    Entry {
                        value: v,
                        origin: Some((path.display().to_string(), line)),
                    },
                );
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k, Entry { value: v, origin: None });
            }
        }
        if let Ok(seed) = std::env::var("HOLDERCOVER_SEED") {
            if let Some(spec) = schema.iter().find(|s| s.key == "seed") {
                values.insert(
                    spec.key,
                    Entry {
                        value: seed,
                        origin: None,
                    },
                );
            }
        }
        Ok(Config { values })
    }

    /// The resolved map for report embedding; canonical after all getters ran.
    pub fn entries(&self) -> BTreeMap<&str, &str> {
        self.values
            .iter()
            .map(|(k, e)| (*k, e.value.as_str()))
            .collect()
    }

    fn bad(&self, key: &'static str, why: impl std::fmt::Display) -> CliError {
        let entry = &self.values[key];
        match &entry.origin {
            Some((path, line)) => CliError::Config {
                path: path.clone(),
                line: *line,
                msg: format!("invalid value for `{key}`: {why}"),
            },
            None => CliError::Usage(format!("invalid value for `{key}`: {why}")),
        }
    }

    fn canonicalize(&mut self, key: &'static str, rendered: String) {
        self.values.insert(
            key,
            Entry {
                value: rendered,
                origin: None,
            },
        );
    }

    fn with<T>(
        &mut self,
        key: &'static str,
        parse: impl FnOnce(&str) -> Result<(T, String), String>,
    ) -> Result<T, CliError> {
        let raw = self.values[key].value.clone();
        match parse(raw.trim()) {
            Ok((v, rendered)) => {
                self.canonicalize(key, rendered);
                Ok(v)
            }
            Err(why) => Err(self.bad(key, why)),
        }
    }

    pub fn get_u32(&mut self, key: &'static str) -> Result<u32, CliError> {
        self.with(key, |s| {
            s.parse::<u32>()
                .map(|v| (v, v.to_string()))
                .map_err(|e| e.to_string())
        })
    }

    pub fn get_u64(&mut self, key: &'static str) -> Result<u64, CliError> {
        self.with(key, |s| {
            s.parse::<u64>()
                .map(|v| (v, v.to_string()))
                .map_err(|e| e.to_string())
        })
    }

    pub fn get_usize(&mut self, key: &'static str) -> Result<usize, CliError> {
        self.with(key, |s| {
            s.parse::<usize>()
                .map(|v| (v, v.to_string()))
                .map_err(|e| e.to_string())
        })
    }

    pub fn get_u8(&mut self, key: &'static str) -> Result<u8, CliError> {
        self.with(key, |s| {
            s.parse::<u8>()
                .map(|v| (v, v.to_string()))
                .map_err(|e| e.to_string())
        })
    }

    pub fn get_f64(&mut self, key: &'static str) -> Result<f64, CliError> {
        self.with(key, |s| {
            let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
            if !v.is_finite() {
                return Err("must be finite".into());
            }
            Ok((v, format!("{v}")))
        })
    }

    /// `none`, or a finite float.
    pub fn get_opt_f64(&mut self, key: &'static str) -> Result<Option<f64>, CliError> {
        self.with(key, |s| {
            if s == "none" {
                return Ok((None, "none".into()));
            }
            let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
            if !v.is_finite() {
                return Err("must be finite".into());
            }
            Ok((Some(v), format!("{v}")))
        })
    }

    /// `none`, or a comma-separated float pair `x,y`.
    pub fn get_opt_point(&mut self, key: &'static str) -> Result<Option<[f64; 2]>, CliError> {
        self.with(key, |s| {
            if s == "none" {
                return Ok((None, "none".into()));
            }
            let (a, b) = s
                .split_once(',')
                .ok_or_else(|| "expected x,y".to_string())?;
            let x: f64 = a.trim().parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
            let y: f64 = b.trim().parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
            if !(x.is_finite() && y.is_finite()) {
                return Err("must be finite".into());
            }
            Ok((Some([x, y]), format!("{x},{y}")))
        })
    }

    /// Comma-separated positive floats.
    pub fn get_f64_list(&mut self, key: &'static str) -> Result<Vec<f64>, CliError> {
        self.with(key, |s| {
            let mut out = Vec::new();
            for part in s.split(',') {
                let v: f64 = part
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| e.to_string())?;
                if !v.is_finite() {
                    return Err("must be finite".into());
                }
                out.push(v);
            }
            if out.is_empty() {
                return Err("list is empty".into());
            }
            let rendered = out
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",");
            Ok((out, rendered))
        })
    }

    /// Inclusive level window `lo:hi`.
    pub fn get_window(&mut self, key: &'static str) -> Result<(u32, u32), CliError> {
        self.with(key, |s| {
            let (a, b) = s.split_once(':').ok_or_else(|| "expected lo:hi".to_string())?;
            let lo: u32 = a.trim().parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
            let hi: u32 = b.trim().parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
            if lo > hi {
                return Err(format!("window is empty: {lo} > {hi}"));
            }
            Ok(((lo, hi), format!("{lo}:{hi}")))
        })
    }

    pub fn get_choice(
        &mut self,
        key: &'static str,
        allowed: &[&'static str],
    ) -> Result<&'static str, CliError> {
        self.with(key, |s| {
            allowed
                .iter()
                .find(|c| **c == s)
                .map(|c| (*c, c.to_string()))
                .ok_or_else(|| format!("expected one of {}", allowed.join(", ")))
        })
    }

    pub fn get_str(&mut self, key: &'static str) -> Result<String, CliError> {
        self.with(key, |s| Ok((s.to_string(), s.to_string())))
    }

    pub fn get_big_ratio(&mut self, key: &'static str) -> Result<BigRational, CliError> {
        self.with(key, |s| {
            let v = parse_big_ratio(s)?;
            Ok((v.clone(), v.to_string()))
        })
    }
}

/// `a/b`, an integer, or a plain decimal, parsed exactly.
pub fn parse_ratio(s: &str) -> Result<Ratio<i128>, String> {
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
        let d: i128 = d.trim().parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
        if d == 0 {
            return Err("zero denominator".into());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let whole: i128 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|e: std::num::ParseIntError| e.to_string())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err("bad decimal".into());
        }
        if frac.len() > 30 {
            return Err("decimal too long".into());
        }
        let num: i128 = frac.parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
        let den = 10i128
            .checked_pow(frac.len() as u32)
            .ok_or("decimal too long")?;
        let sign = if s.trim_start().starts_with('-') { -1 } else { 1 };
        return Ok(Ratio::from_integer(whole) + Ratio::new(sign * num, den));
    }
    let n: i128 = s.parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
    Ok(Ratio::from_integer(n))
}

pub fn parse_big_ratio(s: &str) -> Result<BigRational, String> {
    let r = parse_ratio(s)?;
    Ok(BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())))
}
