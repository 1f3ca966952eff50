//! Flat `key = value` files with `#` comments.

use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub(crate) fn parse(text: &str, path: &Path) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: "empty key".into(),
            });
        }
        out.push(Entry {
            line: i + 1,
            key: key.to_string(),
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

pub(crate) fn value<T: FromStr>(entry: &Entry, path: &Path) -> Result<T> {
    entry.value.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: entry.line,
        msg: format!("cannot parse '{}' for key '{}'", entry.value, entry.key),
    })
}

pub(crate) fn list<T: FromStr>(entry: &Entry, path: &Path) -> Result<Vec<T>> {
    entry
        .value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: entry.line,
                msg: format!("cannot parse list item '{s}' for key '{}'", entry.key),
            })
        })
        .collect()
}
