//! Writer helpers and a reader for the subset of the CPLEX LP text format the
//! model writer emits.

use std::collections::{BTreeMap, BTreeSet};

use super::miqp::ConstraintSense;
use super::{ExactError, Result};
use crate::geometry::round_sig;

const COEF_DIGITS: usize = 12;

/// Fixed-point decimal with 12 significant digits and no trailing zeros.
pub fn format_coef(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let r = round_sig(x, COEF_DIGITS);
    let exponent = r.abs().log10().floor() as i64;
    let decimals = (COEF_DIGITS as i64 - 1 - exponent).clamp(0, 60) as usize;
    let mut s = format!("{r:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConstraint {
    pub name: String,
    pub terms: BTreeMap<String, f64>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedModel {
    pub sense: LpSense,
    pub linear: BTreeMap<String, f64>,
    /// Halved bracket coefficients, keyed by the factor names as written.
    pub quadratic: BTreeMap<(String, String), f64>,
    pub constraints: Vec<ParsedConstraint>,
    pub bounds: BTreeMap<String, (f64, Option<f64>)>,
    pub binaries: BTreeSet<String>,
    pub generals: BTreeSet<String>,
}

impl ParsedModel {
    /// Bounds with the format defaults `[0, +inf)` for undeclared names.
    pub fn bounds_of(&self, name: &str) -> (f64, Option<f64>) {
        self.bounds.get(name).copied().unwrap_or((0.0, None))
    }

    pub fn variable_names(&self) -> BTreeSet<&str> {
        let mut names: BTreeSet<&str> = BTreeSet::new();
        names.extend(self.linear.keys().map(String::as_str));
        for (a, b) in self.quadratic.keys() {
            names.insert(a);
            names.insert(b);
        }
        for c in &self.constraints {
            names.extend(c.terms.keys().map(String::as_str));
        }
        names.extend(self.bounds.keys().map(String::as_str));
        names.extend(self.binaries.iter().map(String::as_str));
        names.extend(self.generals.iter().map(String::as_str));
        names
    }

    /// Objective at the named point; every referenced name must be present.
    pub fn objective_value(&self, values: &BTreeMap<String, f64>) -> Result<f64> {
        let get = |n: &str| values.get(n).copied().ok_or_else(|| ExactError::Parse(format!("no value for {n}")));
        let mut total = 0.0;
        for (n, c) in &self.linear {
            total += c * get(n)?;
        }
        for ((a, b), c) in &self.quadratic {
            total += c * get(a)? * get(b)?;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Open,
    Close,
    Star,
    Slash,
    Caret,
    Sense(ConstraintSense),
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_.!\"#$%&(),;?@'`{}|~".contains(c)
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            '+' => (out.push(Tok::Plus), i += 1).1,
            '-' => (out.push(Tok::Minus), i += 1).1,
            ':' => (out.push(Tok::Colon), i += 1).1,
            '[' => (out.push(Tok::Open), i += 1).1,
            ']' => (out.push(Tok::Close), i += 1).1,
            '*' => (out.push(Tok::Star), i += 1).1,
            '/' => (out.push(Tok::Slash), i += 1).1,
            '^' => (out.push(Tok::Caret), i += 1).1,
            '<' | '>' | '=' => {
                let mut j = i + 1;
                let mut sense = match c {
                    '<' => ConstraintSense::Le,
                    '>' => ConstraintSense::Ge,
                    _ => ConstraintSense::Eq,
                };
                if j < chars.len() && matches!(chars[j], '<' | '>' | '=') {
                    if c == '=' {
                        sense = if chars[j] == '<' { ConstraintSense::Le } else if chars[j] == '>' { ConstraintSense::Ge } else { sense };
                    }
                    j += 1;
                }
                out.push(Tok::Sense(sense));
                i = j;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && matches!(chars[j], '+' | '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Tok::Num(s.parse().map_err(|_| ExactError::Parse(format!("bad number {s}")))?));
            }
            _ if is_name_char(c) => {
                let start = i;
                while i < chars.len() && is_name_char(chars[i]) {
                    i += 1;
                }
                out.push(Tok::Name(chars[start..i].iter().collect()));
            }
            _ => return Err(ExactError::Parse(format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_name(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Name(n)) => Ok(n),
            t => Err(ExactError::Parse(format!("expected a name, found {t:?}"))),
        }
    }

    fn label(&mut self) -> Option<String> {
        if let (Some(Tok::Name(n)), Some(Tok::Colon)) = (self.peek(), self.peek2()) {
            let n = n.clone();
            self.pos += 2;
            Some(n)
        } else {
            None
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        loop {
            match self.next() {
                Some(Tok::Plus) => {}
                Some(Tok::Minus) => sign = -sign,
                Some(Tok::Num(x)) => return Ok(sign * x),
                Some(Tok::Name(n)) if n.eq_ignore_ascii_case("inf") || n.eq_ignore_ascii_case("infinity") => {
                    return Ok(sign * f64::INFINITY)
                }
                t => return Err(ExactError::Parse(format!("expected a number, found {t:?}"))),
            }
        }
    }

    /// Reads `sign* [coef]` and returns the signed coefficient.
    fn coefficient(&mut self) -> f64 {
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Some(Tok::Plus) => self.pos += 1,
                Some(Tok::Minus) => {
                    sign = -sign;
                    self.pos += 1
                }
                Some(Tok::Num(x)) => {
                    let x = *x;
                    self.pos += 1;
                    return sign * x;
                }
                _ => return sign,
            }
        }
    }

    /// Linear and bracketed quadratic terms up to a sense token or a new label.
    fn expression(
        &mut self,
        linear: &mut BTreeMap<String, f64>,
        mut quadratic: Option<&mut BTreeMap<(String, String), f64>>,
    ) -> Result<()> {
        loop {
            match self.peek() {
                None | Some(Tok::Sense(_)) => return Ok(()),
                Some(Tok::Name(_)) if matches!(self.peek2(), Some(Tok::Colon)) => return Ok(()),
                _ => {}
            }
            let coef = self.coefficient();
            match self.next() {
                Some(Tok::Name(n)) => *linear.entry(n).or_insert(0.0) += coef,
                Some(Tok::Open) => {
                    let Some(q) = quadratic.as_deref_mut() else {
                        return Err(ExactError::Parse("quadratic terms are only read in the objective".into()));
                    };
                    let mut inner = BTreeMap::new();
                    loop {
                        if matches!(self.peek(), Some(Tok::Close)) {
                            self.pos += 1;
                            break;
                        }
                        let c = self.coefficient();
                        let a = self.expect_name()?;
                        let b = match self.next() {
                            Some(Tok::Star) => self.expect_name()?,
                            Some(Tok::Caret) => {
                                self.signed_number()?;
                                a.clone()
                            }
                            t => return Err(ExactError::Parse(format!("expected * or ^, found {t:?}"))),
                        };
                        *inner.entry((a, b)).or_insert(0.0) += c;
                    }
                    let divisor = if matches!(self.peek(), Some(Tok::Slash)) {
                        self.pos += 1;
                        self.signed_number()?
                    } else {
                        1.0
                    };
                    for (k, c) in inner {
                        *q.entry(k).or_insert(0.0) += coef * c / divisor;
                    }
                }
                t => return Err(ExactError::Parse(format!("unexpected token {t:?}"))),
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_of(line: &str) -> Option<(Section, Option<LpSense>)> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" => (Section::Objective, Some(LpSense::Maximize)),
        "minimize" | "minimise" | "minimum" | "min" => (Section::Objective, Some(LpSense::Minimize)),
        "subject to" | "such that" | "st" | "s.t." => (Section::Constraints, None),
        "bounds" | "bound" => (Section::Bounds, None),
        "binaries" | "binary" | "bin" => (Section::Binaries, None),
        "generals" | "general" | "gen" => (Section::Generals, None),
        "end" => (Section::End, None),
        _ => return None,
    })
}

/// Reads LP text: objective with an optional `[ ... ] / 2` quadratic part,
/// linear constraints, bounds, and integrality sections.
pub fn parse_lp(text: &str) -> Result<ParsedModel> {
    let mut section = Section::Preamble;
    let mut sense = None;
    let mut objective = String::new();
    let mut constraints = String::new();
    let mut bound_lines = Vec::new();
    let mut binaries = BTreeSet::new();
    let mut generals = BTreeSet::new();
    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some((s, dir)) = section_of(line) {
            section = s;
            if dir.is_some() {
                sense = dir;
            }
            continue;
        }
        match section {
            Section::Preamble => return Err(ExactError::Parse(format!("content before the objective: {line}"))),
            Section::Objective => (objective.push_str(line), objective.push('\n')).1,
            Section::Constraints => (constraints.push_str(line), constraints.push('\n')).1,
            Section::Bounds => bound_lines.push(line.to_string()),
            Section::Binaries => binaries.extend(line.split_whitespace().map(String::from)),
            Section::Generals => generals.extend(line.split_whitespace().map(String::from)),
            Section::End => return Err(ExactError::Parse("content after End".into())),
        }
    }
    let sense = sense.ok_or_else(|| ExactError::Parse("no objective section".into()))?;

    let mut obj = Cursor { toks: tokenize(&objective)?, pos: 0 };
    obj.label();
    let mut linear = BTreeMap::new();
    let mut quadratic = BTreeMap::new();
    obj.expression(&mut linear, Some(&mut quadratic))?;
    if !obj.done() {
        return Err(ExactError::Parse("trailing tokens in the objective".into()));
    }

    let mut rows = Vec::new();
    let mut cur = Cursor { toks: tokenize(&constraints)?, pos: 0 };
    while !cur.done() {
        let name = cur.label().unwrap_or_else(|| format!("R{}", rows.len() + 1));
        let mut terms = BTreeMap::new();
        cur.expression(&mut terms, None)?;
        let sense = match cur.next() {
            Some(Tok::Sense(s)) => s,
            t => return Err(ExactError::Parse(format!("constraint {name}: expected a sense, found {t:?}"))),
        };
        let rhs = cur.signed_number()?;
        rows.push(ParsedConstraint { name, terms, sense, rhs });
    }

    let mut bounds: BTreeMap<String, (f64, Option<f64>)> = BTreeMap::new();
    for line in bound_lines {
        let toks = tokenize(&line)?;
        let mut c = Cursor { toks, pos: 0 };
        let first_is_name = matches!(c.peek(), Some(Tok::Name(n)) if !n.eq_ignore_ascii_case("inf") && !n.eq_ignore_ascii_case("infinity"));
        if first_is_name {
            let name = c.expect_name()?;
            let entry = bounds.entry(name.clone()).or_insert((0.0, None));
            match c.next() {
                Some(Tok::Name(f)) if f.eq_ignore_ascii_case("free") => *entry = (f64::NEG_INFINITY, None),
                Some(Tok::Sense(s)) => {
                    let v = c.signed_number()?;
                    match s {
                        ConstraintSense::Le => entry.1 = Some(v).filter(|v| v.is_finite()),
                        ConstraintSense::Ge => entry.0 = v,
                        ConstraintSense::Eq => *entry = (v, Some(v)),
                    }
                }
                t => return Err(ExactError::Parse(format!("bound on {name}: unexpected {t:?}"))),
            }
        } else {
            let lo = c.signed_number()?;
            let s1 = c.next();
            let name = c.expect_name()?;
            let entry = bounds.entry(name.clone()).or_insert((0.0, None));
            match s1 {
                Some(Tok::Sense(ConstraintSense::Le)) => entry.0 = lo,
                Some(Tok::Sense(ConstraintSense::Ge)) => entry.1 = Some(lo).filter(|v| v.is_finite()),
                Some(Tok::Sense(ConstraintSense::Eq)) => *entry = (lo, Some(lo)),
                t => return Err(ExactError::Parse(format!("bound on {name}: unexpected {t:?}"))),
            }
            if !c.done() {
                match c.next() {
                    Some(Tok::Sense(ConstraintSense::Le)) => entry.1 = Some(c.signed_number()?).filter(|v| v.is_finite()),
                    t => return Err(ExactError::Parse(format!("bound on {name}: unexpected {t:?}"))),
                }
            }
        }
        if !c.done() {
            return Err(ExactError::Parse(format!("trailing tokens in bound line: {line}")));
        }
    }

    Ok(ParsedModel { sense, linear, quadratic, constraints: rows, bounds, binaries, generals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_use_twelve_significant_digits() {
        assert_eq!(format_coef(1.0), "1");
        assert_eq!(format_coef(0.5), "0.5");
        assert_eq!(format_coef(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_coef(123456.7890123456), "123456.789012");
        assert_eq!(format_coef(-2.5e-7), "-0.00000025");
        assert_eq!(format_coef(3e12), "3000000000000");
        assert_eq!(format_coef(0.0), "0");
    }

    #[test]
    fn parses_a_small_quadratic_model() {
        let text = "\\ comment\nMaximize\n obj: + 3 x - 2 y\n   + [ - 4 x * y + 2 z ^ 2 ] / 2\nSubject To\n c1: + x + y <= 1\n c2: x - z\n   >= -2.5\nBounds\n 0 <= z <= 4\n y >= 0\n x free\nBinaries\n y\nGenerals\n z\nEnd\n";
        let m = parse_lp(text).unwrap();
        assert_eq!(m.sense, LpSense::Maximize);
        assert_eq!(m.linear["x"], 3.0);
        assert_eq!(m.linear["y"], -2.0);
        assert_eq!(m.quadratic[&("x".to_string(), "y".to_string())], -2.0);
        assert_eq!(m.quadratic[&("z".to_string(), "z".to_string())], 1.0);
        assert_eq!(m.constraints.len(), 2);
        assert_eq!(m.constraints[1].rhs, -2.5);
        assert_eq!(m.constraints[1].terms["z"], -1.0);
        assert_eq!(m.constraints[1].sense, ConstraintSense::Ge);
        assert_eq!(m.bounds_of("z"), (0.0, Some(4.0)));
        assert_eq!(m.bounds_of("x").0, f64::NEG_INFINITY);
        assert!(m.binaries.contains("y") && m.generals.contains("z"));
        let vals: BTreeMap<String, f64> = [("x", 1.0), ("y", 1.0), ("z", 2.0)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        assert_eq!(m.objective_value(&vals).unwrap(), 3.0 - 2.0 - 2.0 + 4.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_lp("Subject To\n c: x <= 1\nEnd\n").is_err());
        assert!(parse_lp("Maximize\n obj: x\nSubject To\n c: x 1\nEnd\n").is_err());
    }
}
