//! Line-oriented TIN text format:
//!
//! ```text
//! TIN 1
//! domain xmin ymin xmax ymax
//! vertices N
//! x y z          (N lines; decimal or p/q)
//! triangles M
//! i j k          (M lines; 0-based, counterclockwise)
//! ```

use std::fmt::Write as _;

use super::{Point, Rect, Tin};
use crate::error::{Error, Result};
use crate::scalar::{parse_scalar, Scalar};

struct Lines<'a> {
    it: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.it.by_ref() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok((i + 1, toks));
            }
        }
        Err(Error::Parse { line: 0, msg: format!("unexpected end of input, expected {what}") })
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn scalar(line: usize, s: &str) -> Result<Scalar> {
    parse_scalar(s).map_err(|_| perr(line, format!("invalid number {s:?}")))
}

fn count(line: usize, toks: &[&str], key: &str) -> Result<usize> {
    if toks.len() != 2 || toks[0] != key {
        return Err(perr(line, format!("expected `{key} <count>`")));
    }
    toks[1].parse().map_err(|_| perr(line, format!("invalid count {:?}", toks[1])))
}

pub fn parse_tin(text: &str) -> Result<Tin> {
    let mut lines = Lines { it: text.lines().enumerate().peekable() };
    let (ln, toks) = lines.next("header")?;
    if toks != ["TIN", "1"] {
        return Err(perr(ln, "expected header `TIN 1`"));
    }
    let (ln, toks) = lines.next("domain")?;
    if toks.len() != 5 || toks[0] != "domain" {
        return Err(perr(ln, "expected `domain xmin ymin xmax ymax`"));
    }
    let b: Vec<Scalar> = toks[1..].iter().map(|s| scalar(ln, s)).collect::<Result<_>>()?;
    let domain = Rect::new(b[0].clone(), b[1].clone(), b[2].clone(), b[3].clone());
    if !domain.is_proper() {
        return Err(perr(ln, "domain rectangle is empty"));
    }

    let (ln, toks) = lines.next("vertex count")?;
    let n = count(ln, &toks, "vertices")?;
    let mut points = Vec::with_capacity(n);
    let mut heights = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, toks) = lines.next("vertex")?;
        if toks.len() != 3 {
            return Err(perr(ln, "expected `x y z`"));
        }
        points.push(Point::new(scalar(ln, toks[0])?, scalar(ln, toks[1])?));
        heights.push(scalar(ln, toks[2])?);
    }

    let (ln, toks) = lines.next("triangle count")?;
    let m = count(ln, &toks, "triangles")?;
    let mut triangles = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, toks) = lines.next("triangle")?;
        if toks.len() != 3 {
            return Err(perr(ln, "expected `i j k`"));
        }
        let mut tri = [0usize; 3];
        for (k, s) in toks.iter().enumerate() {
            tri[k] = s.parse().map_err(|_| perr(ln, format!("invalid index {s:?}")))?;
            if tri[k] >= n {
                return Err(perr(ln, format!("vertex index {} out of range", tri[k])));
            }
        }
        triangles.push(tri);
    }
    if let Some((i, l)) = lines.it.find(|(_, l)| !l.trim().is_empty()) {
        return Err(perr(i + 1, format!("trailing content {:?}", l.trim())));
    }
    Ok(Tin::new(points, heights, triangles, domain))
}

fn fmt_scalar(s: &Scalar) -> String {
    if s.is_integer() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

/// Serializes a TIN in the identity frame; sheared TINs are rejected.
pub fn write_tin(t: &Tin) -> Result<String> {
    if !t.frame.is_identity() {
        return Err(Error::InvalidParameter("cannot serialize a sheared TIN".into()));
    }
    let d = &t.domain;
    let mut s = String::new();
    writeln!(s, "TIN 1").unwrap();
    writeln!(s, "domain {} {} {} {}", fmt_scalar(&d.xmin), fmt_scalar(&d.ymin), fmt_scalar(&d.xmax), fmt_scalar(&d.ymax)).unwrap();
    writeln!(s, "vertices {}", t.points.len()).unwrap();
    for (p, z) in t.points.iter().zip(&t.heights) {
        writeln!(s, "{} {} {}", fmt_scalar(&p.x), fmt_scalar(&p.y), fmt_scalar(z)).unwrap();
    }
    writeln!(s, "triangles {}", t.triangles.len()).unwrap();
    for [a, b, c] in &t.triangles {
        writeln!(s, "{a} {b} {c}").unwrap();
    }
    Ok(s)
}
