//! Minimal `key = value` text format used for models, configs and
//! ground-truth summaries. Lines starting with `#` and blank lines are
//! ignored; keys are unique; values keep internal whitespace.

use crate::error::{Error, Result};

/// Parsed pairs in file order.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Parse {
                line,
                message: format!("expected 'key = value', got '{trimmed}'"),
            });
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Parse { line, message: "empty key".into() });
        }
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(Error::Parse { line, message: format!("duplicate key '{key}'") });
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn render(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

pub fn get<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

pub fn require<'a>(pairs: &'a [(String, String)], key: &str) -> Result<&'a str> {
    get(pairs, key).ok_or_else(|| Error::Parse {
        line: 0,
        message: format!("missing key '{key}'"),
    })
}

pub fn require_f64(pairs: &[(String, String)], key: &str) -> Result<f64> {
    parse_f64(require(pairs, key)?, key)
}

pub fn require_usize(pairs: &[(String, String)], key: &str) -> Result<usize> {
    let raw = require(pairs, key)?;
    raw.parse().map_err(|_| Error::Parse {
        line: 0,
        message: format!("key '{key}': '{raw}' is not a non-negative integer"),
    })
}

pub fn require_bool(pairs: &[(String, String)], key: &str) -> Result<bool> {
    let raw = require(pairs, key)?;
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Parse {
            line: 0,
            message: format!("key '{key}': '{raw}' is not 'true' or 'false'"),
        }),
    }
}

pub fn parse_f64(raw: &str, key: &str) -> Result<f64> {
    let v: f64 = raw.parse().map_err(|_| Error::Parse {
        line: 0,
        message: format!("key '{key}': '{raw}' is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line: 0,
            message: format!("key '{key}': value must be finite"),
        });
    }
    Ok(v)
}

/// Comma-separated list of finite numbers.
pub fn parse_f64_list(raw: &str, key: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|part| parse_f64(part.trim(), key))
        .collect()
}

pub fn render_f64_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
