//! Line-level lexing: sections, `key = value` entries and value tokens.

use super::ScenarioError;
use crate::pathspace::{Amplitude, Axis, PathRow, PathState, Spin, StateComponent};

#[derive(Debug, Clone)]
pub(super) struct Entry {
    pub line: usize,
    pub key: String,
    pub key_col: usize,
    pub value: String,
    pub value_col: usize,
}

#[derive(Debug, Clone)]
pub(super) struct Section {
    pub line: usize,
    pub name: String,
    pub arg: Option<String>,
    pub entries: Vec<Entry>,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits `text` into sections. `#` starts a comment anywhere on a line.
pub(super) fn sections(text: &str) -> Result<Vec<Section>, ScenarioError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(inner) = rest.strip_suffix(']') else {
                return Err(err(line, indent + 1, "section header is missing `]`"));
            };
            let mut words = inner.split_whitespace();
            let Some(name) = words.next() else {
                return Err(err(line, indent + 1, "empty section header"));
            };
            let arg = words.next().map(str::to_string);
            if words.next().is_some() {
                return Err(err(line, indent + 1, "section header takes at most one argument"));
            }
            out.push(Section {
                line,
                name: name.to_string(),
                arg,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(err(line, indent + 1, "expected `key = value` or a `[section]` header"));
        };
        let Some(section) = out.last_mut() else {
            return Err(err(line, indent + 1, "entry before the first section"));
        };
        let key = content[..eq].trim();
        if key.is_empty() {
            return Err(err(line, indent + 1, "missing key before `=`"));
        }
        let after = &content[eq + 1..];
        let value = after.trim();
        let lead = after.len() - after.trim_start().len();
        section.entries.push(Entry {
            line,
            key: key.to_string(),
            key_col: indent + 1,
            value: value.to_string(),
            value_col: eq + 2 + lead,
        });
    }
    Ok(out)
}

/// A whitespace-separated token with its 1-based column.
#[derive(Debug, Clone, Copy)]
pub(super) struct Token<'a> {
    pub col: usize,
    pub text: &'a str,
}

/// Tokens of an entry value; `|` is always a token of its own.
pub(super) fn tokens(entry: &Entry) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let v = entry.value.as_str();
    for (i, ch) in v.char_indices() {
        if ch.is_whitespace() || ch == '|' {
            if let Some(s) = start.take() {
                out.push(Token {
                    col: entry.value_col + s,
                    text: &v[s..i],
                });
            }
            if ch == '|' {
                out.push(Token {
                    col: entry.value_col + i,
                    text: "|",
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            col: entry.value_col + s,
            text: &v[s..],
        });
    }
    out
}

/// Cursor over the tokens of one entry.
pub(super) struct Cursor<'a> {
    line: usize,
    end_col: usize,
    toks: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(entry: &'a Entry) -> Self {
        Self {
            line: entry.line,
            end_col: entry.value_col + entry.value.len(),
            toks: tokens(entry),
            pos: 0,
        }
    }

    pub fn error_here(&self, message: impl Into<String>) -> ScenarioError {
        let col = self.toks.get(self.pos).map_or(self.end_col, |t| t.col);
        err(self.line, col, message)
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).map(|t| t.text)
    }

    pub fn next(&mut self, what: &str) -> Result<Token<'a>, ScenarioError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(*t)
            }
            None => Err(err(self.line, self.end_col, format!("expected {what}, found end of line"))),
        }
    }

    pub fn number(&mut self) -> Result<f64, ScenarioError> {
        let t = self.next("a number")?;
        match t.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(err(self.line, t.col, format!("expected a finite number, found `{}`", t.text))),
        }
    }

    /// Like [`Cursor::number`] but also accepts `inf` and `-inf`.
    pub fn bound(&mut self) -> Result<f64, ScenarioError> {
        let t = self.next("a number")?;
        match t.text.parse::<f64>() {
            Ok(v) if !v.is_nan() => Ok(v),
            _ => Err(err(self.line, t.col, format!("expected a number, found `{}`", t.text))),
        }
    }

    pub fn integer<T: std::str::FromStr>(&mut self) -> Result<T, ScenarioError> {
        let t = self.next("an integer")?;
        t.text
            .parse::<T>()
            .map_err(|_| err(self.line, t.col, format!("expected a nonnegative integer, found `{}`", t.text)))
    }

    pub fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, ScenarioError>
    where
        T::Err: std::fmt::Display,
    {
        let t = self.next(what)?;
        t.text
            .parse::<T>()
            .map_err(|e| err(self.line, t.col, e.to_string()))
    }

    pub fn word(&mut self, what: &str) -> Result<&'a str, ScenarioError> {
        Ok(self.next(what)?.text)
    }

    pub fn axis(&mut self) -> Result<Axis, ScenarioError> {
        match self.peek() {
            Some("x") => {
                self.pos += 1;
                Ok(Axis::X)
            }
            Some("y") => {
                self.pos += 1;
                Ok(Axis::Y)
            }
            Some("z") => {
                self.pos += 1;
                Ok(Axis::Z)
            }
            _ => {
                let col = self.toks.get(self.pos).map_or(self.end_col, |t| t.col);
                let v = [self.number()?, self.number()?, self.number()?];
                Axis::new(v).map_err(|e| err(self.line, col, e.to_string()))
            }
        }
    }

    pub fn finish(&self) -> Result<(), ScenarioError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(err(self.line, t.col, format!("unexpected `{}`", t.text))),
        }
    }

    fn state(&mut self) -> Result<PathState, ScenarioError> {
        let mut comps = Vec::new();
        let start = self.toks.get(self.pos).map_or(self.end_col, |t| t.col);
        while let Some(w) = self.peek() {
            if w == "|" {
                break;
            }
            let t = self.next("a component")?;
            let c = match t.text {
                "pos" => StateComponent::Position([self.number()?, self.number()?, self.number()?]),
                "mom" => StateComponent::Momentum([self.number()?, self.number()?, self.number()?]),
                "spin" => {
                    let l = self.next("a spin label")?;
                    let twice_m = Spin::parse_label(l.text)
                        .ok_or_else(|| err(self.line, l.col, format!("`{}` is not a spin label", l.text)))?;
                    let axis = self.axis()?;
                    StateComponent::Spin(Spin::new(twice_m, axis).map_err(|e| err(self.line, l.col, e.to_string()))?)
                }
                other => {
                    return Err(err(
                        self.line,
                        t.col,
                        format!("expected `pos`, `mom` or `spin`, found `{other}`"),
                    ))
                }
            };
            comps.push(c);
        }
        if comps.is_empty() {
            return Err(err(self.line, start, "empty path state"));
        }
        PathState::new(comps).map_err(|e| err(self.line, start, e.to_string()))
    }

    /// `RE IM | state | state ...` with exactly `width` states.
    pub fn row(&mut self, width: usize) -> Result<PathRow, ScenarioError> {
        let amplitude = Amplitude::new(self.number()?, self.number()?);
        let mut states = Vec::with_capacity(width);
        for _ in 0..width {
            let bar = self.next("`|`")?;
            if bar.text != "|" {
                return Err(err(self.line, bar.col, format!("expected `|`, found `{}`", bar.text)));
            }
            states.push(self.state()?);
        }
        self.finish()?;
        Ok(PathRow { states, amplitude })
    }
}

pub(super) fn render_row(row: &PathRow) -> String {
    let mut s = format!("{} {}", row.amplitude.re, row.amplitude.im);
    for st in &row.states {
        s.push_str(&format!(" | {st}"));
    }
    s
}
