//! Input grammar for polynomial families.
//!
//! ```text
//! # comment
//! vars t, z1, z2, z3          (optional header line)
//! f = z2^4 + z3^3 + t*z1^2*z2^4*z3^3
//! ```
//!
//! An expression is a sum of signed terms `coef*t^k*z1^b1*...*zn^bn`; the
//! coefficient is a rational literal like `3/2` and every part may be
//! omitted (coefficient 1, exponent 1, absent variable 0). The `f =` prefix
//! is optional, whitespace is insignificant, `#` starts a comment. The
//! variable count is taken from the header when present and inferred from
//! the largest variable index otherwise.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::poly::{Expo, PolyFamily, Q, TPoly, Z};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(Z),
    Var(usize), // z-index, 1-based
    T,
    FName,
    Equals,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    End,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        match c {
            Some('\n') => {
                self.line += 1;
                self.col = 1;
            }
            Some(_) => self.col += 1,
            None => {}
        }
        c
    }

    fn tokens(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c == '#' {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(&c) = self.chars.peek() else {
                out.push(Spanned {
                    tok: Tok::End,
                    line,
                    col,
                });
                return Ok(out);
            };
            let tok = match c {
                '+' => {
                    self.bump();
                    Tok::Plus
                }
                '-' => {
                    self.bump();
                    Tok::Minus
                }
                '*' => {
                    self.bump();
                    Tok::Star
                }
                '^' => {
                    self.bump();
                    Tok::Caret
                }
                '/' => {
                    self.bump();
                    Tok::Slash
                }
                '=' => {
                    self.bump();
                    Tok::Equals
                }
                '0'..='9' => {
                    let mut digits = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_digit() {
                            digits.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Int(digits.parse::<BigInt>().unwrap())
                }
                c if c.is_ascii_alphabetic() => {
                    let mut ident = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() {
                            ident.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match ident.as_str() {
                        "t" => Tok::T,
                        "f" => Tok::FName,
                        s if s.starts_with('z') && s.len() > 1 => {
                            let idx: usize = s[1..]
                                .parse()
                                .map_err(|_| err(line, col, format!("bad variable `{s}`")))?;
                            if idx == 0 {
                                return Err(err(line, col, "variable indices start at z1"));
                            }
                            Tok::Var(idx)
                        }
                        s => return Err(err(line, col, format!("unexpected identifier `{s}`"))),
                    }
                }
                c => return Err(err(line, col, format!("unexpected character `{c}`"))),
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

/// Header: `vars t, z1, ..., zn` on its own line. Returns the declared n
/// and the remainder of the source.
fn split_header(src: &str) -> Result<(Option<usize>, String)> {
    let mut rest = String::new();
    let mut n_decl = None;
    let mut header_seen = false;
    let mut content_seen = false;
    for (lineno, raw) in src.lines().enumerate() {
        let stripped = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let trimmed = stripped.trim_start();
        if !header_seen && !content_seen && trimmed.starts_with("vars") {
            header_seen = true;
            let decl = trimmed.trim_start_matches("vars");
            let names: Vec<&str> = decl.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            if names.first() != Some(&"t") {
                return Err(err(lineno + 1, 1, "header must start with `vars t, z1, ...`"));
            }
            let mut n = 0usize;
            for (k, name) in names.iter().skip(1).enumerate() {
                let want = format!("z{}", k + 1);
                if *name != want {
                    return Err(err(
                        lineno + 1,
                        1,
                        format!("expected variable `{want}` in header, found `{name}`"),
                    ));
                }
                n = k + 1;
            }
            if n < 2 {
                return Err(err(
                    lineno + 1,
                    1,
                    format!("declared variable count {n} < 2"),
                ));
            }
            n_decl = Some(n);
            rest.push('\n');
        } else {
            if !trimmed.is_empty() {
                content_seen = true;
            }
            rest.push_str(raw);
            rest.push('\n');
        }
    }
    Ok((n_decl, rest))
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

/// One parsed raw term: sign, rational coefficient, t-power, z-exponents
/// keyed by 1-based variable index.
struct RawTerm {
    coeff: Q,
    t_pow: u32,
    z_pows: Vec<(usize, u32)>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let s = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        s
    }

    fn expect_exponent(&mut self) -> Result<u32> {
        let s = self.next();
        match s.tok {
            Tok::Int(v) => {
                u32::try_from(&v).map_err(|_| err(s.line, s.col, "exponent too large"))
            }
            Tok::Minus => Err(err(s.line, s.col, "negative exponent")),
            _ => Err(err(s.line, s.col, "expected exponent after `^`")),
        }
    }

    fn parse_factor_exponent(&mut self) -> Result<u32> {
        if self.peek().tok == Tok::Caret {
            self.next();
            self.expect_exponent()
        } else {
            Ok(1)
        }
    }

    fn parse_term(&mut self) -> Result<RawTerm> {
        let mut term = RawTerm {
            coeff: Q::one(),
            t_pow: 0,
            z_pows: Vec::new(),
        };
        loop {
            let s = self.next();
            match s.tok {
                Tok::Int(num) => {
                    let mut c = Q::from_integer(num);
                    if self.peek().tok == Tok::Slash {
                        self.next();
                        let d = self.next();
                        match d.tok {
                            Tok::Int(den) => {
                                if den.is_zero() {
                                    return Err(err(d.line, d.col, "zero denominator"));
                                }
                                c /= Q::from_integer(den);
                            }
                            _ => return Err(err(d.line, d.col, "expected denominator after `/`")),
                        }
                    }
                    if self.peek().tok == Tok::Caret {
                        return Err(err(s.line, s.col, "exponent on a numeric literal is not allowed"));
                    }
                    term.coeff *= c;
                }
                Tok::T => {
                    let e = self.parse_factor_exponent()?;
                    term.t_pow += e;
                }
                Tok::Var(idx) => {
                    let e = self.parse_factor_exponent()?;
                    term.z_pows.push((idx, e));
                }
                _ => return Err(err(s.line, s.col, "expected a coefficient, `t`, or a variable")),
            }
            if self.peek().tok == Tok::Star {
                self.next();
            } else {
                break;
            }
        }
        Ok(term)
    }

    fn parse_expr(&mut self) -> Result<Vec<(bool, RawTerm)>> {
        let mut terms = Vec::new();
        let mut negative = false;
        match self.peek().tok {
            Tok::Plus => {
                self.next();
            }
            Tok::Minus => {
                self.next();
                negative = true;
            }
            _ => {}
        }
        loop {
            terms.push((negative, self.parse_term()?));
            let s = self.peek().clone();
            match s.tok {
                Tok::End => break,
                Tok::Plus => {
                    self.next();
                    negative = false;
                }
                Tok::Minus => {
                    self.next();
                    negative = true;
                }
                _ => return Err(err(s.line, s.col, "expected `+`, `-`, or end of input")),
            }
        }
        Ok(terms)
    }
}

/// Parse a polynomial family from source text.
pub fn parse_family(src: &str) -> Result<PolyFamily> {
    parse_family_named(src, "f")
}

pub fn parse_family_named(src: &str, name: &str) -> Result<PolyFamily> {
    let (n_decl, body) = split_header(src)?;
    let toks = Lexer::new(&body).tokens()?;
    let mut parser = Parser { toks, pos: 0 };
    if parser.peek().tok == Tok::FName {
        parser.next();
        let s = parser.next();
        if s.tok != Tok::Equals {
            return Err(err(s.line, s.col, "expected `=` after `f`"));
        }
    }
    if parser.peek().tok == Tok::End {
        return Err(err(1, 1, "empty input"));
    }
    let signed_terms = parser.parse_expr()?;

    let n = match n_decl {
        Some(n) => n,
        None => {
            let max_idx = signed_terms
                .iter()
                .flat_map(|(_, t)| t.z_pows.iter().map(|&(idx, _)| idx))
                .max()
                .unwrap_or(0);
            if max_idx < 2 {
                return Err(err(1, 1, format!("declared variable count {max_idx} < 2")));
            }
            max_idx
        }
    };

    let mut terms: Vec<(Expo, TPoly)> = Vec::new();
    for (negative, raw) in signed_terms {
        let mut expo = vec![0u32; n];
        for (idx, e) in raw.z_pows {
            if idx > n {
                return Err(err(
                    1,
                    1,
                    format!("variable z{idx} exceeds declared count {n}"),
                ));
            }
            expo[idx - 1] += e;
        }
        let coeff = if negative { -raw.coeff } else { raw.coeff };
        let mut tcoeffs = vec![Q::zero(); raw.t_pow as usize + 1];
        tcoeffs[raw.t_pow as usize] = coeff;
        terms.push((Expo(expo), TPoly::from_coeffs(tcoeffs)));
    }

    let family = PolyFamily::from_terms(n, name, terms);
    if family.has_constant_term() {
        return Err(err(
            1,
            1,
            "constant term present: the family must satisfy f(t, 0) = 0",
        ));
    }
    Ok(family)
}

/// Canonical text form: header plus terms in lexicographic exponent order,
/// each coefficient expanded by ascending t-power. Parsing the output
/// reproduces the term map byte-for-byte.
impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vars t")?;
        for j in 1..=self.n() {
            write!(f, ", z{j}")?;
        }
        writeln!(f)?;
        write!(f, "f =")?;
        let mut first = true;
        for (e, c) in self.terms() {
            for (k, q) in c.coeffs().iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                let neg = q.is_negative();
                if first {
                    write!(f, " {}", if neg { "-" } else { "" })?;
                    first = false;
                } else {
                    write!(f, " {} ", if neg { "-" } else { "+" })?;
                }
                let mag = q.abs();
                let mut factors: Vec<String> = Vec::new();
                if !mag.is_one() || (k == 0 && e.is_zero()) {
                    factors.push(mag.to_string());
                }
                if k == 1 {
                    factors.push("t".to_string());
                } else if k > 1 {
                    factors.push(format!("t^{k}"));
                }
                for (j, &b) in e.0.iter().enumerate() {
                    match b {
                        0 => {}
                        1 => factors.push(format!("z{}", j + 1)),
                        _ => factors.push(format!("z{}^{}", j + 1, b)),
                    }
                }
                if factors.is_empty() {
                    factors.push(mag.to_string());
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        if first {
            write!(f, " 0")?;
        }
        writeln!(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q_int;

    #[test]
    fn example_family_parses() {
        let f = parse_family("z2^2 + z3^2 + t*z1^2*z2^2*z3^2").unwrap();
        assert_eq!(f.n(), 3);
        assert_eq!(f.term_count(), 3);
        let c = f.coefficient(&Expo(vec![2, 2, 2]));
        assert_eq!(c.coeffs(), &[q_int(0), q_int(1)]);
    }

    #[test]
    fn cancellation_collapses_terms() {
        let f = parse_family("z2^2 - z2^2 + z3^3").unwrap();
        assert_eq!(f.term_count(), 1);
    }

    #[test]
    fn constant_term_rejected() {
        let e = parse_family("1 + z2^2").unwrap_err();
        assert!(e.to_string().contains("constant term"));
        let e = parse_family("t + z2^2").unwrap_err();
        assert!(e.to_string().contains("constant term"));
    }

    #[test]
    fn negative_exponent_rejected() {
        let e = parse_family("z2^-3").unwrap_err();
        assert!(e.to_string().contains("negative exponent"));
    }

    #[test]
    fn too_few_variables_rejected() {
        assert!(parse_family("z1^2").is_err());
        assert!(parse_family("vars t, z1\nf = z1^2").is_err());
    }

    #[test]
    fn header_and_prefix_accepted() {
        let src = "# a family\nvars t, z1, z2, z3\nf = z2^4 + z3^3 + t*z1^2*z2^4*z3^3\n";
        let f = parse_family(src).unwrap();
        assert_eq!(f.n(), 3);
        assert_eq!(f.term_count(), 3);
    }

    #[test]
    fn rational_coefficients_and_merging() {
        let f = parse_family("3/2*z1*z2 - 1/2*z2*z1 + z1*z1*z2").unwrap();
        assert_eq!(f.term_count(), 2);
        assert_eq!(
            f.coefficient(&Expo(vec![1, 1])).as_constant().unwrap(),
            q_int(1)
        );
    }

    #[test]
    fn roundtrip_is_stable() {
        for src in [
            "z2^2 + z3^2 + t*z1^2*z2^2*z3^2",
            "vars t, z1, z2, z3\nf = z2^2+z3^2+z1*z2^2*z3^2+t*z1*z2^2",
            "-3/7*z1^2*z2 + t^2*z2^5 - z3^4 + z2^2",
        ] {
            let f = parse_family(src).unwrap();
            let printed = f.to_string();
            let g = parse_family(&printed).unwrap();
            assert_eq!(f.term_map(), g.term_map(), "roundtrip failed for {src}");
            assert_eq!(printed, g.to_string());
        }
    }
}
