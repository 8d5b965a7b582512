//! Group-spec and word grammars.
//!
//! Group specs: `A<n>`, `E8`, `C2^<n>`, `triangle <a> <b> <c>`,
//! `complete4:<m>`, `matrix [[..],[..]]` (`inf` for ∞).
//! Words: `s1s2s3`, `(s1s2s3)^10`, `id`, `w0`, optionally separated by
//! whitespace, `*` or `.`.

use super::{CoxeterMatrix, CoxeterSystem};
use crate::error::{Error, Result};

fn parse_entry(tok: &str) -> Result<u32> {
    let t = tok.trim();
    if t.eq_ignore_ascii_case("inf") || t == "∞" {
        return Ok(0);
    }
    let v: u32 = t.parse().map_err(|_| Error::Parse(format!("bad Coxeter entry `{t}`")))?;
    if v == 0 {
        return Err(Error::Parse("entry 0 is not allowed; write `inf` for ∞".into()));
    }
    Ok(v)
}

fn parse_count(t: &str, what: &str) -> Result<usize> {
    t.trim().parse().map_err(|_| Error::Parse(format!("bad {what} `{t}`")))
}

fn e8_matrix() -> Vec<Vec<u32>> {
    // Bourbaki labeling: 1-3-4-5-6-7-8 with 2 attached to 4.
    let edges = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)];
    let mut m = vec![vec![2u32; 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    for (a, b) in edges {
        m[a - 1][b - 1] = 3;
        m[b - 1][a - 1] = 3;
    }
    m
}

fn parse_matrix_literal(body: &str) -> Result<Vec<Vec<u32>>> {
    let s: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse("matrix literal must be [[..],..]".into()))?;
    let mut rows = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let r = rest.strip_prefix('[').ok_or_else(|| Error::Parse("expected `[` in matrix row".into()))?;
        let end = r.find(']').ok_or_else(|| Error::Parse("unterminated matrix row".into()))?;
        let row = r[..end].split(',').map(parse_entry).collect::<Result<Vec<_>>>()?;
        rows.push(row);
        rest = &r[end + 1..];
        rest = rest.strip_prefix(',').unwrap_or(rest);
    }
    Ok(rows)
}

pub fn parse_group_spec(text: &str) -> Result<CoxeterSystem> {
    let t = text.trim();
    let rows: Vec<Vec<u32>> = if let Some(rest) = t.strip_prefix("C2^") {
        let n = parse_count(rest, "C2 power")?;
        if n == 0 {
            return Err(Error::Parse("C2^0 has no generators".into()));
        }
        (0..n).map(|i| (0..n).map(|j| if i == j { 1 } else { 2 }).collect()).collect()
    } else if t == "E8" {
        e8_matrix()
    } else if let Some(rest) = t.strip_prefix("triangle") {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 3 || !rest.starts_with(char::is_whitespace) {
            return Err(Error::Parse("expected `triangle <a> <b> <c>`".into()));
        }
        let (a, b, c) = (parse_entry(parts[0])?, parse_entry(parts[1])?, parse_entry(parts[2])?);
        vec![vec![1, a, b], vec![a, 1, c], vec![b, c, 1]]
    } else if let Some(rest) = t.strip_prefix("complete4:") {
        let m = parse_entry(rest)?;
        (0..4).map(|i| (0..4).map(|j| if i == j { 1 } else { m }).collect()).collect()
    } else if let Some(rest) = t.strip_prefix("matrix") {
        parse_matrix_literal(rest)?
    } else if let Some(rest) = t.strip_prefix('A') {
        let n = parse_count(rest, "rank")?;
        if n == 0 {
            return Err(Error::Parse("A0 has no generators".into()));
        }
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1 } else if i.abs_diff(j) == 1 { 3 } else { 2 }).collect())
            .collect()
    } else {
        return Err(Error::Parse(format!("unrecognized group spec `{t}`")));
    };
    CoxeterSystem::new(t, CoxeterMatrix::new(rows)?)
}

struct WordParser<'a> {
    s: &'a [u8],
    pos: usize,
    sys: &'a CoxeterSystem,
}

impl WordParser<'_> {
    fn skip(&mut self) {
        while self.pos < self.s.len() && matches!(self.s[self.pos], b' ' | b'\t' | b'*' | b'.' | b',') {
            self.pos += 1;
        }
    }

    fn number(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse(format!("expected a number at offset {start}")));
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().map_err(|_| Error::Parse("number too large".into()))
    }

    fn sequence(&mut self, nested: bool) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        loop {
            self.skip();
            if self.pos >= self.s.len() {
                if nested {
                    return Err(Error::Parse("unbalanced `(`".into()));
                }
                return Ok(out);
            }
            let mut atom = match self.s[self.pos] {
                b')' if nested => {
                    self.pos += 1;
                    return Ok(out);
                }
                b'(' => {
                    self.pos += 1;
                    self.sequence(true)?
                }
                b's' => {
                    self.pos += 1;
                    let i = self.number()?;
                    if i == 0 || i > self.sys.rank() {
                        return Err(Error::Parse(format!("generator s{i} out of range 1..={}", self.sys.rank())));
                    }
                    vec![(i - 1) as u8]
                }
                _ if self.s[self.pos..].starts_with(b"id") => {
                    self.pos += 2;
                    Vec::new()
                }
                _ if self.s[self.pos..].starts_with(b"w0") => {
                    self.pos += 2;
                    self.sys.longest_element()?.word().to_vec()
                }
                c => return Err(Error::Parse(format!("unexpected `{}` at offset {}", c as char, self.pos))),
            };
            if self.pos < self.s.len() && self.s[self.pos] == b'^' {
                self.pos += 1;
                let k = self.number()?;
                if atom.len().saturating_mul(k) > 1 << 24 {
                    return Err(Error::Parse("word too long".into()));
                }
                atom = atom.repeat(k);
            }
            out.extend(atom);
        }
    }
}

/// Parses a word into 0-based generator indices (not reduced).
pub fn parse_word(sys: &CoxeterSystem, text: &str) -> Result<Vec<u8>> {
    WordParser { s: text.trim().as_bytes(), pos: 0, sys }.sequence(false)
}

/// `s1s2s3` form of a 0-based word; `id` for the empty word.
pub fn format_word(word: &[u8]) -> String {
    if word.is_empty() {
        return "id".into();
    }
    word.iter().map(|&i| format!("s{}", i + 1)).collect()
}
