//! The `family:key=value:...` spec grammar shared by bodies and densities.

use crate::error::{Error, Result};

pub(crate) struct Entry<'a> {
    pub key: &'a str,
    pub value: &'a str,
    pub pos: usize,
}

pub(crate) struct Fields<'a> {
    pub family: &'a str,
    pub pos: usize,
    entries: Vec<Entry<'a>>,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

/// Splits `s` on top-level `:` (outside parentheses). `offset` is the position
/// of `s` within the original input, used in error messages.
pub(crate) fn parse_fields(s: &str, offset: usize) -> Result<Fields<'_>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(err(offset + i, "unbalanced ')'"));
                }
            }
            ':' if depth == 0 => {
                parts.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(err(offset + s.len(), "unbalanced '('"));
    }
    parts.push((start, &s[start..]));
    let (fpos, family) = parts[0];
    let family = family.trim();
    if family.is_empty() {
        return Err(err(offset + fpos, "missing family name"));
    }
    let mut entries = Vec::new();
    for &(p, part) in &parts[1..] {
        let Some(eq) = part.find('=') else {
            return Err(err(offset + p, format!("expected key=value, found '{part}'")));
        };
        let key = part[..eq].trim();
        if key.is_empty() {
            return Err(err(offset + p, "empty key"));
        }
        if entries.iter().any(|e: &Entry| e.key == key) {
            return Err(err(offset + p, format!("duplicate key '{key}'")));
        }
        entries.push(Entry { key, value: part[eq + 1..].trim(), pos: offset + p + eq + 1 });
    }
    Ok(Fields { family, pos: offset + fpos, entries })
}

impl<'a> Fields<'a> {
    pub fn get(&self, key: &str) -> Option<&Entry<'a>> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry<'a>> {
        self.get(key)
            .ok_or_else(|| err(self.pos, format!("{} requires '{key}='", self.family)))
    }

    /// Rejects keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        for e in &self.entries {
            if !allowed.contains(&e.key) {
                return Err(err(e.pos - e.key.len() - 1, format!("unknown key '{}' for {}", e.key, self.family)));
            }
        }
        Ok(())
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let e = self.require(key)?;
        e.value.parse().map_err(|_| err(e.pos, format!("'{}' is not a non-negative integer", e.value)))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let e = self.require(key)?;
        parse_f64(e.value, e.pos)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some(e) => parse_f64(e.value, e.pos),
            None => Ok(default),
        }
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.get(key) else { return Ok(None) };
        let mut out = Vec::new();
        let mut pos = e.pos;
        for item in e.value.split(',') {
            out.push(parse_f64(item.trim(), pos)?);
            pos += item.len() + 1;
        }
        Ok(Some(out))
    }

    /// A parenthesized nested spec; returns its text and absolute position.
    pub fn nested(&self, key: &str) -> Result<(&'a str, usize)> {
        let e = self.require(key)?;
        let v = e.value;
        if v.starts_with('(') && v.ends_with(')') {
            Ok((&v[1..v.len() - 1], e.pos + 1))
        } else {
            Err(err(e.pos, format!("'{key}' must be a parenthesized spec, e.g. {key}=(ball:n=3)")))
        }
    }
}

pub(crate) fn parse_f64(s: &str, pos: usize) -> Result<f64> {
    match s {
        "inf" | "infinity" | "Inf" => Ok(f64::INFINITY),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|x| !x.is_nan())
            .ok_or_else(|| err(pos, format!("'{s}' is not a number"))),
    }
}

/// Formats a float the way the grammar reads it back.
pub(crate) fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}
