//! Text form of series: `3/2*x1^2*y2*th1 - h*y1`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::model::{ModelConfig, ModelKind};
use super::monomial::{Monomial, MAX_DIM};
use super::rational::{self, Rational};
use super::series::FormalSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize, usize)>> {
        let mut lx = Lexer { src, toks: Vec::new() };
        lx.scan()?;
        Ok(lx.toks)
    }

    fn scan(&mut self) -> Result<()> {
        let chars: Vec<char> = self.src.chars().collect();
        let (mut line, mut col) = (1usize, 1usize);
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            let (l0, c0) = (line, col);
            if ch == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if ch.is_whitespace() {
                col += 1;
                i += 1;
                continue;
            }
            let tok = match ch {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                c if c.is_ascii_digit() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    col += i - start;
                    self.toks.push((Tok::Num(s.parse().expect("digits")), l0, c0));
                    continue;
                }
                c if c.is_ascii_alphabetic() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    col += i - start;
                    self.toks.push((Tok::Ident(s), l0, c0));
                    continue;
                }
                other => {
                    return Err(Error::Parse {
                        line: l0,
                        column: c0,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            self.toks.push((tok, l0, c0));
            col += 1;
            i += 1;
        }
        self.toks.push((Tok::End, line, col));
        Ok(())
    }
}

struct Parser<'m> {
    model: &'m ModelConfig,
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

enum Gen {
    Base(usize),
    Fiber(usize),
    Theta(usize),
    Hbar,
    T,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (tok, line, column) = &self.toks[self.pos];
        let shown = match tok {
            Tok::End => "end of input".to_string(),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
        };
        Err(Error::Parse {
            line: *line,
            column: *column,
            message: format!("{} (found {shown})", message.into()),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn series(&mut self) -> Result<FormalSeries> {
        let mut out = FormalSeries::zero(*self.model);
        let mut negate = false;
        match self.peek() {
            Tok::Minus => {
                self.bump();
                negate = true;
            }
            Tok::Plus => {
                self.bump();
            }
            _ => {}
        }
        loop {
            let (m, c) = self.term()?;
            out.add_term(m, if negate { -c } else { c });
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    negate = false;
                }
                Tok::Minus => {
                    self.bump();
                    negate = true;
                }
                Tok::End => return Ok(out),
                _ => return self.err("expected `+`, `-` or end of expression"),
            }
        }
    }

    fn term(&mut self) -> Result<(Monomial, Rational)> {
        let mut coeff = rational::one();
        let mut mono = Monomial::one();
        loop {
            match self.peek().clone() {
                Tok::Num(n) => {
                    self.bump();
                    let mut r = Rational::from_integer(n);
                    if *self.peek() == Tok::Slash {
                        self.bump();
                        match self.bump() {
                            Tok::Num(d) if !d.is_zero() => r /= Rational::from_integer(d),
                            _ => {
                                self.pos -= 1;
                                return self.err("expected nonzero denominator");
                            }
                        }
                    }
                    coeff *= r;
                }
                Tok::Ident(name) => {
                    let gen = self.generator(&name)?;
                    self.bump();
                    let exp = self.exponent()?;
                    match self.apply(&mut mono, gen, exp) {
                        Ok(Some(false)) => {}
                        Ok(Some(true)) => coeff = -coeff,
                        Ok(None) => coeff = rational::zero(),
                        Err(msg) => {
                            self.pos -= 1;
                            return self.err(msg);
                        }
                    }
                }
                _ => return self.err("expected coefficient or generator"),
            }
            if *self.peek() == Tok::Star {
                self.bump();
            } else {
                return Ok((mono, coeff));
            }
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        if *self.peek() != Tok::Caret {
            return Ok(1);
        }
        self.bump();
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(n) => {
                let v: i64 = match i64::try_from(&n) {
                    Ok(v) if v <= 1000 => v,
                    _ => return self.err("exponent too large"),
                };
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.err("expected exponent"),
        }
    }

    fn generator(&self, name: &str) -> Result<Gen> {
        let d = self.model.dim;
        let index = |prefix: &str| -> Option<usize> {
            let rest = name.strip_prefix(prefix)?;
            let i: usize = rest.parse().ok()?;
            (1..=d).contains(&i).then_some(i - 1)
        };
        let base = if self.model.kind == ModelKind::Torus { "u" } else { "x" };
        if name == "h" {
            return Ok(Gen::Hbar);
        }
        if name == "t" {
            return Ok(Gen::T);
        }
        if let Some(i) = index("th") {
            return Ok(Gen::Theta(i));
        }
        if let Some(i) = index(base) {
            return Ok(Gen::Base(i));
        }
        if let Some(i) = index("y") {
            return Ok(Gen::Fiber(i));
        }
        self.err(format!("unknown generator for a {d}-dimensional {base}-model"))
    }

    /// Multiplies `mono` by the generator power on the right. Returns the sign
    /// flip, or `None` when the product vanishes.
    fn apply(&self, mono: &mut Monomial, gen: Gen, exp: i64) -> std::result::Result<Option<bool>, String> {
        let torus = self.model.kind == ModelKind::Torus;
        if exp < 0 && !(torus && matches!(gen, Gen::Base(_))) {
            return Err("negative exponent only allowed on torus coordinates".into());
        }
        match gen {
            Gen::Base(i) => {
                let v = mono.base[i] as i64 + exp;
                mono.base[i] = i16::try_from(v).map_err(|_| "exponent too large".to_string())?;
            }
            Gen::Fiber(i) => {
                let v = mono.fiber[i] as i64 + exp;
                mono.fiber[i] = u8::try_from(v).map_err(|_| "exponent too large".to_string())?;
            }
            Gen::Hbar => {
                let v = mono.hbar as i64 + exp;
                mono.hbar = u8::try_from(v).map_err(|_| "exponent too large".to_string())?;
            }
            Gen::T => {
                let v = mono.t as i64 + exp;
                mono.t = u8::try_from(v).map_err(|_| "exponent too large".to_string())?;
            }
            Gen::Theta(i) => {
                if exp == 0 {
                    return Ok(Some(false));
                }
                if exp > 1 || mono.forms & (1 << i) != 0 {
                    return Ok(None);
                }
                let (m, neg) = mono
                    .mul(&Monomial::theta(i))
                    .expect("disjoint by check above");
                *mono = m;
                return Ok(Some(neg));
            }
        }
        Ok(Some(false))
    }
}

/// Parses a series in the given model.
pub fn parse_series(model: &ModelConfig, src: &str) -> Result<FormalSeries> {
    let toks = Lexer::run(src)?;
    let mut p = Parser {
        model,
        toks,
        pos: 0,
    };
    p.series()
}

fn gen_power(out: &mut Vec<String>, name: String, e: i64) {
    if e == 1 {
        out.push(name);
    } else {
        out.push(format!("{name}^{e}"));
    }
}

/// Prints a monomial with the model's coordinate names.
pub fn format_monomial(kind: ModelKind, m: &Monomial) -> String {
    let base = if kind == ModelKind::Torus { "u" } else { "x" };
    let mut parts = Vec::new();
    for i in 0..MAX_DIM {
        if m.base[i] != 0 {
            gen_power(&mut parts, format!("{base}{}", i + 1), m.base[i] as i64);
        }
    }
    for i in 0..MAX_DIM {
        if m.fiber[i] != 0 {
            gen_power(&mut parts, format!("y{}", i + 1), m.fiber[i] as i64);
        }
    }
    for i in 0..MAX_DIM {
        if m.forms & (1 << i) != 0 {
            parts.push(format!("th{}", i + 1));
        }
    }
    if m.hbar != 0 {
        gen_power(&mut parts, "h".into(), m.hbar as i64);
    }
    if m.t != 0 {
        gen_power(&mut parts, "t".into(), m.t as i64);
    }
    parts.join("*")
}

/// Canonical text; round-trips through `parse_series`.
pub fn format_series(s: &FormalSeries) -> String {
    if s.is_zero() {
        return "0".into();
    }
    let kind = s.model().kind;
    let mut out = String::new();
    for (k, (m, c)) in s.iter().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = format_monomial(kind, m);
        if mono.is_empty() {
            out.push_str(&rational::format(&abs));
        } else if abs.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&rational::format(&abs));
            out.push('*');
            out.push_str(&mono);
        }
    }
    out
}
