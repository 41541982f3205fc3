//! Text form of loops and loop sequences.
//!
//! ```text
//! sequence := loop (';' loop)*
//! loop     := ['@(' a1 ',' ... ',' ad ')'] step*
//! step     := '+k' | '-k' | 'x+' | 'x-' | 'y+' | 'y-' | 'z+' | 'z-'
//! ```
//!
//! Each loop must describe a closed path. Its nonbacktracking core is stored,
//! and loops whose core is null are dropped from the sequence.

use crate::error::LoopError;
use crate::lattice::{LatticeVector, Path, Step};
use crate::loops::{check_dim, nonbacktracking_core, Loop, LoopSequence};

#[derive(Debug)]
enum Token<'a> {
    Start(&'a str),
    Step(&'a str),
    Sep,
}

/// Splits the input into tokens with 1-based character columns.
fn tokenize(text: &str) -> Result<Vec<(usize, Token<'_>)>, LoopError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b';' {
            out.push((i + 1, Token::Sep));
            i += 1;
        } else if c == b'@' {
            let close = text[i..].find(')').map(|j| i + j).ok_or_else(|| LoopError::BadToken {
                position: i + 1,
                token: text[i..].to_string(),
                reason: "unterminated start vertex".into(),
            })?;
            out.push((i + 1, Token::Start(&text[i..=close])));
            i = close + 1;
        } else {
            let end = text[i..]
                .find(|ch: char| ch.is_ascii_whitespace() || ch == ';' || ch == '@')
                .map_or(text.len(), |j| i + j);
            out.push((i + 1, Token::Step(&text[i..end])));
            i = end;
        }
    }
    Ok(out)
}

fn parse_step(tok: &str, position: usize, dim: usize) -> Result<Step, LoopError> {
    let bad = |reason: &str| LoopError::BadToken {
        position,
        token: tok.to_string(),
        reason: reason.to_string(),
    };
    let (axis, positive) = match tok {
        "x+" => (1, true),
        "x-" => (1, false),
        "y+" => (2, true),
        "y-" => (2, false),
        "z+" => (3, true),
        "z-" => (3, false),
        _ => {
            let positive = match tok.as_bytes().first() {
                Some(b'+') => true,
                Some(b'-') => false,
                _ => return Err(bad("expected +k, -k or an axis alias")),
            };
            let axis: usize = tok[1..].parse().map_err(|_| bad("axis is not a positive integer"))?;
            (axis, positive)
        }
    };
    if axis == 0 || axis > dim {
        return Err(LoopError::AxisOutOfRange { position, axis, dim });
    }
    Ok(Step::new(axis, positive))
}

fn parse_start(tok: &str, position: usize, dim: usize) -> Result<LatticeVector, LoopError> {
    let bad = |reason: String| LoopError::BadToken { position, token: tok.to_string(), reason };
    let inner = tok
        .strip_prefix("@(")
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| bad("expected @(a1,...,ad)".into()))?;
    let coords = inner
        .split(',')
        .map(|c| c.trim().parse::<i32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| bad(format!("bad coordinate: {e}")))?;
    if coords.len() != dim {
        return Err(bad(format!("expected {dim} coordinates, got {}", coords.len())));
    }
    Ok(LatticeVector::new(&coords))
}

/// Parses the raw paths of a sequence without taking cores.
pub fn parse_paths(text: &str, dim: usize) -> Result<Vec<Path>, LoopError> {
    check_dim(dim)?;
    let mut paths = Vec::new();
    let mut start: Option<LatticeVector> = None;
    let mut steps = Vec::new();
    let mut seen_step = false;
    for (pos, tok) in tokenize(text)? {
        match tok {
            Token::Sep => {
                paths.push(Path::new(
                    start.take().unwrap_or_else(|| LatticeVector::origin(dim)),
                    std::mem::take(&mut steps),
                ));
                seen_step = false;
            }
            Token::Start(t) => {
                if start.is_some() || seen_step {
                    return Err(LoopError::BadToken {
                        position: pos,
                        token: t.to_string(),
                        reason: "start vertex must open a loop".into(),
                    });
                }
                start = Some(parse_start(t, pos, dim)?);
            }
            Token::Step(t) => {
                steps.push(parse_step(t, pos, dim)?);
                seen_step = true;
            }
        }
    }
    paths.push(Path::new(start.unwrap_or_else(|| LatticeVector::origin(dim)), steps));
    Ok(paths)
}

/// Parses a loop sequence and reduces every loop to its nonbacktracking core.
pub fn parse_loop_dsl(text: &str, dim: usize) -> Result<LoopSequence, LoopError> {
    let loops = parse_paths(text, dim)?
        .iter()
        .map(nonbacktracking_core)
        .collect::<Result<Vec<_>, _>>()?;
    LoopSequence::new(dim, loops)
}

/// Parses a single loop; a sequence with more than one loop is rejected.
pub fn parse_loop(text: &str, dim: usize) -> Result<Loop, LoopError> {
    let paths = parse_paths(text, dim)?;
    if paths.len() != 1 {
        return Err(LoopError::BadToken {
            position: 1,
            token: text.to_string(),
            reason: "expected a single loop".into(),
        });
    }
    nonbacktracking_core(&paths[0])
}

pub fn emit_loop(l: &Loop) -> String {
    if l.is_null() {
        return String::new();
    }
    let mut out = format!("@{}", l.start());
    for s in l.steps() {
        out.push(' ');
        out.push_str(&s.to_string());
    }
    out
}

pub fn emit_sequence(s: &LoopSequence) -> String {
    s.loops().iter().map(emit_loop).collect::<Vec<_>>().join(" ; ")
}
