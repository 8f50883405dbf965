//! Line-oriented experiment scripts.
//!
//! ```text
//! # Experiment I
//! source pure z +
//! sg x
//! detect
//! ```
//!
//! Grammar (keywords case-insensitive, `#` starts a comment):
//!
//! ```text
//! source := "source" ("unpolarized" | "pure" axis sign | "pure" "(" complex "," complex ")")
//! stage  := "sg" axis ["select" sign]
//! detect := "detect" ["shots" int ["seed" int]]
//! axis   := "x" | "y" | "z" | "axis" "(" angle "," angle ")"
//! sign   := "+" | "-"
//! angle  := number | [number ["*"]] "pi" ["/" number]
//! ```
//!
//! A script is one source line, one or more stage lines and a final detect
//! line, in that order. Angles are radians, `theta` in `[0, pi]` and `phi` in
//! `[0, 2pi)`. Complex literals look like `0.6`, `0.8i`, `1+1i` or `-i`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::apparatus::Axis;
use crate::engine::{ExperimentScript, Selection, Source, Stage};
use crate::spin::{make_ket, Sign, SpinError};

/// The three tandem experiments, as scripts.
pub const EXPERIMENT_I: &str = "# z+ beam into SG_x\nsource pure z +\nsg x\ndetect\n";
pub const EXPERIMENT_II: &str = "# z+ beam into SG_y\nsource pure z +\nsg y\ndetect\n";
pub const EXPERIMENT_III: &str = "# x+ beam into SG_y\nsource pure x +\nsg y\ndetect\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    /// 1-based column, in characters.
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        if !self.token.is_empty() {
            write!(f, " (at '{}')", self.token)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// A cursor over one line with the comment already stripped.
struct Line<'a> {
    number: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Line<'a> {
    fn new(number: usize, raw: &'a str) -> Self {
        let text = raw.split('#').next().unwrap_or("");
        Line { number, text, pos: 0 }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn column_at(&self, pos: usize) -> usize {
        self.text[..pos].chars().count() + 1
    }

    fn error_at(&self, pos: usize, token: &str, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.number,
            column: self.column_at(pos),
            message: message.into(),
            token: token.to_owned(),
        }
    }

    fn is_blank(&self) -> bool {
        self.text.trim().is_empty()
    }

    /// Next token: an alphanumeric word, or a single punctuation character.
    fn next_token(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let first = rest.chars().next()?;
        let len = if first.is_alphanumeric() || first == '.' || first == '_' {
            rest.find(|c: char| !(c.is_alphanumeric() || c == '.' || c == '_'))
                .unwrap_or(rest.len())
        } else {
            first.len_utf8()
        };
        let start = self.pos;
        self.pos += len;
        Some((start, &rest[..len]))
    }

    fn peek_token(&mut self) -> Option<(usize, &'a str)> {
        let saved = self.pos;
        let t = self.next_token();
        self.pos = saved;
        t
    }

    fn expect_token(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        self.next_token()
            .ok_or_else(|| self.error_at(self.text.len(), "", format!("expected {what}, found end of line")))
    }

    fn expect_punct(&mut self, punct: &str) -> Result<(), ParseError> {
        let (pos, tok) = self.expect_token(&format!("'{punct}'"))?;
        if tok == punct {
            Ok(())
        } else {
            Err(self.error_at(pos, tok, format!("expected '{punct}'")))
        }
    }

    /// Raw text up to (not including) the next `,` or `)`.
    fn take_field(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find([',', ')']).unwrap_or(rest.len());
        let start = self.pos;
        self.pos += len;
        (start, rest[..len].trim_end())
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        match self.next_token() {
            None => Ok(()),
            Some((pos, tok)) => Err(self.error_at(pos, tok, "unexpected trailing input")),
        }
    }
}

fn parse_sign(line: &mut Line<'_>) -> Result<Sign, ParseError> {
    let (pos, tok) = line.expect_token("'+' or '-'")?;
    match tok {
        "+" => Ok(Sign::Plus),
        "-" => Ok(Sign::Minus),
        other => Err(line.error_at(pos, other, "expected '+' or '-'")),
    }
}

fn parse_axis(line: &mut Line<'_>) -> Result<Axis, ParseError> {
    let (pos, tok) = line.expect_token("an axis")?;
    match tok.to_ascii_lowercase().as_str() {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        "axis" => {
            line.expect_punct("(")?;
            let theta = parse_angle(line)?;
            line.expect_punct(",")?;
            let phi = parse_angle(line)?;
            line.expect_punct(")")?;
            Axis::polar(theta, phi).map_err(|_| {
                line.error_at(
                    pos,
                    &line.text[pos..line.pos],
                    "angle out of range (theta in [0, pi], phi in [0, 2pi))",
                )
            })
        }
        _ => Err(line.error_at(pos, tok, "unknown axis; expected x, y, z or axis(theta, phi)")),
    }
}

/// Parses a standalone axis such as `y` or `axis(pi/2, 0)`.
pub fn parse_axis_str(text: &str) -> Result<Axis, ParseError> {
    let mut line = Line::new(1, text);
    let axis = parse_axis(&mut line)?;
    line.expect_end()?;
    Ok(axis)
}

fn parse_angle(line: &mut Line<'_>) -> Result<f64, ParseError> {
    let (pos, raw) = line.take_field();
    angle_value(raw).ok_or_else(|| line.error_at(pos, raw, "invalid angle"))
}

fn finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `number`, `pi`, `3pi/4`, `0.5*pi`, `pi/2`, `-pi/4`.
fn angle_value(raw: &str) -> Option<f64> {
    let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let Some(at) = s.find("pi") else {
        return finite(&s);
    };
    let coeff = s[..at].strip_suffix('*').unwrap_or(&s[..at]);
    let coeff = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => finite(c)?,
    };
    let rest = &s[at + 2..];
    let divisor = match rest {
        "" => 1.0,
        r => finite(r.strip_prefix('/')?)?,
    };
    let v = coeff * PI / divisor;
    v.is_finite().then_some(v)
}

/// `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
fn complex_value(raw: &str) -> Option<Complex64> {
    let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'I']) else {
        return finite(&s).map(|re| Complex64::new(re, 0.0));
    };
    // split before the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (finite(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => finite(v)?,
    };
    Some(Complex64::new(re, im))
}

fn parse_complex(line: &mut Line<'_>) -> Result<Complex64, ParseError> {
    let (pos, raw) = line.take_field();
    complex_value(raw).ok_or_else(|| line.error_at(pos, raw, "invalid complex amplitude"))
}

fn parse_source(line: &mut Line<'_>) -> Result<Source, ParseError> {
    let (pos, tok) = line.expect_token("'unpolarized' or 'pure'")?;
    match tok.to_ascii_lowercase().as_str() {
        "unpolarized" => Ok(Source::Unpolarized),
        "pure" => {
            if matches!(line.peek_token(), Some((_, "("))) {
                let (open, _) = line.next_token().expect("peeked");
                let plus = parse_complex(line)?;
                line.expect_punct(",")?;
                let minus = parse_complex(line)?;
                line.expect_punct(")")?;
                let ket = make_ket(plus, minus).map_err(|e| {
                    let msg = match e {
                        SpinError::ZeroVector => "amplitudes are both zero".to_owned(),
                        other => other.to_string(),
                    };
                    line.error_at(open, &line.text[open..line.pos], msg)
                })?;
                Ok(Source::Pure(ket))
            } else {
                let axis = parse_axis(line)?;
                let sign = parse_sign(line)?;
                Ok(Source::Eigenstate { axis, sign })
            }
        }
        other => Err(line.error_at(pos, other, "expected 'unpolarized' or 'pure'")),
    }
}

fn parse_stage(line: &mut Line<'_>) -> Result<Stage, ParseError> {
    let axis = parse_axis(line)?;
    let selection = match line.next_token() {
        None => return Ok(Stage::new(axis, Selection::KeepBoth)),
        Some((_, t)) if t.eq_ignore_ascii_case("select") => match parse_sign(line)? {
            Sign::Plus => Selection::KeepPlus,
            Sign::Minus => Selection::KeepMinus,
        },
        Some((pos, t)) => return Err(line.error_at(pos, t, "expected 'select' or end of line")),
    };
    Ok(Stage::new(axis, selection))
}

fn parse_int(line: &mut Line<'_>, what: &str) -> Result<u64, ParseError> {
    let (pos, tok) = line.expect_token(what)?;
    tok.parse::<u64>()
        .map_err(|_| line.error_at(pos, tok, format!("expected {what}")))
}

fn parse_detect(line: &mut Line<'_>) -> Result<(Option<u64>, Option<u64>), ParseError> {
    let Some((pos, tok)) = line.next_token() else {
        return Ok((None, None));
    };
    if !tok.eq_ignore_ascii_case("shots") {
        return Err(line.error_at(pos, tok, "expected 'shots' or end of line"));
    }
    let (shots_pos, _) = line.peek_token().unwrap_or((line.text.len(), ""));
    let shots = parse_int(line, "a shot count")?;
    if shots == 0 {
        return Err(line.error_at(shots_pos, "0", "shot count must be at least 1"));
    }
    let seed = match line.next_token() {
        None => None,
        Some((_, t)) if t.eq_ignore_ascii_case("seed") => Some(parse_int(line, "a 64-bit seed")?),
        Some((p, t)) => return Err(line.error_at(p, t, "expected 'seed' or end of line")),
    };
    Ok((Some(shots), seed))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Expect {
    Source,
    Stages,
    Done,
}

/// Parses a complete script.
pub fn parse_script(text: &str) -> Result<ExperimentScript, ParseError> {
    let mut source = None;
    let mut stages = Vec::new();
    let mut detect = None;
    let mut state = Expect::Source;
    let mut last_line = (1, 1);

    for (idx, raw) in text.lines().enumerate() {
        let mut line = Line::new(idx + 1, raw);
        if line.is_blank() {
            continue;
        }
        last_line = (idx + 1, line.text.trim_end().chars().count() + 1);
        let (pos, keyword) = line.next_token().expect("non-blank line has a token");
        let keyword_lc = keyword.to_ascii_lowercase();
        match (keyword_lc.as_str(), state) {
            ("source", Expect::Source) => {
                source = Some(parse_source(&mut line)?);
                state = Expect::Stages;
            }
            ("source", _) => return Err(line.error_at(pos, keyword, "duplicate source line")),
            ("sg", Expect::Stages) => stages.push(parse_stage(&mut line)?),
            ("sg", Expect::Source) => {
                return Err(line.error_at(pos, keyword, "stage before source line"))
            }
            ("sg", Expect::Done) => return Err(line.error_at(pos, keyword, "stage after detect")),
            ("detect", Expect::Stages) if stages.is_empty() => {
                return Err(line.error_at(pos, keyword, "detect before any sg stage"))
            }
            ("detect", Expect::Stages) => {
                detect = Some(parse_detect(&mut line)?);
                state = Expect::Done;
            }
            ("detect", Expect::Source) => {
                return Err(line.error_at(pos, keyword, "detect before source line"))
            }
            ("detect", Expect::Done) => {
                return Err(line.error_at(pos, keyword, "duplicate detect line"))
            }
            _ => {
                return Err(line.error_at(
                    pos,
                    keyword,
                    format!("unknown keyword '{keyword}'; expected source, sg or detect"),
                ))
            }
        }
        line.expect_end()?;
    }

    let missing = |message: &str| ParseError {
        line: last_line.0,
        column: last_line.1,
        message: message.to_owned(),
        token: String::new(),
    };
    let source = source.ok_or_else(|| missing("missing source line"))?;
    if stages.is_empty() {
        return Err(missing("missing sg stage"));
    }
    let (shots, seed) = detect.ok_or_else(|| missing("missing detect line"))?;
    Ok(ExperimentScript {
        source,
        stages,
        shots,
        seed,
    })
}

fn render_axis(axis: &Axis) -> String {
    axis.to_string()
}

fn render_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

/// Renders a script in the text format. `parse_script` of the output
/// yields the same script. A seed without a shot count is not expressible
/// and is dropped.
pub fn render_script(script: &ExperimentScript) -> String {
    let mut out = String::new();
    match &script.source {
        Source::Unpolarized => out.push_str("source unpolarized\n"),
        Source::Eigenstate { axis, sign } => {
            out.push_str(&format!("source pure {} {}\n", render_axis(axis), sign))
        }
        Source::Pure(k) => out.push_str(&format!(
            "source pure ({}, {})\n",
            render_complex(k.plus()),
            render_complex(k.minus())
        )),
    }
    for stage in &script.stages {
        out.push_str("sg ");
        out.push_str(&render_axis(&stage.axis));
        match stage.selection {
            Selection::KeepBoth => {}
            Selection::KeepPlus => out.push_str(" select +"),
            Selection::KeepMinus => out.push_str(" select -"),
        }
        out.push('\n');
    }
    out.push_str("detect");
    if let Some(shots) = script.shots {
        out.push_str(&format!(" shots {shots}"));
        if let Some(seed) = script.seed {
            out.push_str(&format!(" seed {seed}"));
        }
    }
    out.push('\n');
    out
}
