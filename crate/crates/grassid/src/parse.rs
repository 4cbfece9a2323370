//! Parsing and printing for the polynomial grammar and the Grassmann element
//! syntax.
//!
//! Polynomial grammar: variables `y<i>`, `z<i>`, integer coefficients, the
//! field generator `a` (when t > 1), `^` powers, `*` or juxtaposition for
//! products, `[f,g,...]` left-normed commutators, parentheses, `+`/`-`.
//! Element syntax reuses the same expression grammar with generators `e<i>`,
//! e.g. `2*e1e2 + e3`; `1` denotes the unit.

use std::fmt;

use thiserror::Error;

use crate::field::{FieldParams, FieldScalar};
use crate::freealg::{commutator, FreeAlgError, FreePolynomial, Var, Word};
use crate::grassmann::{GrassmannAlgebra, GrassmannElement, GrassmannError};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("field generator `a` requires an extension field (t > 1)")]
    GeneratorInPrimeField,
    #[error("Grassmann generators e<i> are not valid in polynomials")]
    EgenInPolynomial,
    #[error("variables are not valid in element syntax")]
    VarInElement,
    #[error("exponent too large: {0}")]
    HugeExponent(u32),
    #[error(transparent)]
    Algebra(#[from] FreeAlgError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

/// Parsed expression tree, shared by the polynomial and element grammars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    Int(i64),
    /// The multiplicative generator `a` of GF(p^t), t > 1.
    FieldGen,
    Variable(Var),
    /// Grassmann generator `e<i>` (element syntax only).
    Egen(u32),
    Neg(Box<Ast>),
    Sum(Vec<Ast>),
    Product(Vec<Ast>),
    Power(Box<Ast>, u32),
    Commutator(Vec<Ast>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Int(i64),
    Y(u32),
    Z(u32),
    E(u32),
    A,
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((pos, Tok::Plus)),
            '-' => out.push((pos, Tok::Minus)),
            '*' => out.push((pos, Tok::Star)),
            '^' => out.push((pos, Tok::Caret)),
            '(' => out.push((pos, Tok::LParen)),
            ')' => out.push((pos, Tok::RParen)),
            '[' => out.push((pos, Tok::LBracket)),
            ']' => out.push((pos, Tok::RBracket)),
            ',' => out.push((pos, Tok::Comma)),
            '0'..='9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let n: i64 = input[i..j].parse().map_err(|_| ParseError::Syntax {
                    pos,
                    msg: "integer too large".into(),
                })?;
                out.push((pos, Tok::Int(n)));
                i = j;
                continue;
            }
            'y' | 'z' | 'e' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("`{c}` must be followed by an index"),
                    });
                }
                let n: u32 = input[i + 1..j].parse().map_err(|_| ParseError::Syntax {
                    pos,
                    msg: "index too large".into(),
                })?;
                if n == 0 {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "indices start at 1".into(),
                    });
                }
                out.push((
                    pos,
                    match c {
                        'y' => Tok::Y(n),
                        'z' => Tok::Z(n),
                        _ => Tok::E(n),
                    },
                ));
                i = j;
                continue;
            }
            'a' => out.push((pos, Tok::A)),
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    input_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks
            .get(self.at)
            .map(|&(p, _)| p)
            .unwrap_or(self.input_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(found) if found == t => Ok(()),
            _ => Err(ParseError::Syntax {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn parse_sum(&mut self) -> Result<Ast, ParseError> {
        let mut parts = Vec::new();
        let mut neg = false;
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            neg = true;
        } else if matches!(self.peek(), Some(Tok::Plus)) {
            self.bump();
        }
        let first = self.parse_product()?;
        parts.push(if neg { Ast::Neg(Box::new(first)) } else { first });
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    parts.push(self.parse_product()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.parse_product()?;
                    parts.push(Ast::Neg(Box::new(t)));
                }
                _ => break,
            }
        }
        if parts.len() == 1 {
            Ok(parts.pop().unwrap())
        } else {
            Ok(Ast::Sum(parts))
        }
    }

    fn parse_product(&mut self) -> Result<Ast, ParseError> {
        let mut factors = vec![self.parse_power()?];
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    factors.push(self.parse_power()?);
                }
                // juxtaposition
                Some(Tok::Int(_))
                | Some(Tok::Y(_))
                | Some(Tok::Z(_))
                | Some(Tok::E(_))
                | Some(Tok::A)
                | Some(Tok::LParen)
                | Some(Tok::LBracket) => {
                    factors.push(self.parse_power()?);
                }
                _ => break,
            }
        }
        if factors.len() == 1 {
            Ok(factors.pop().unwrap())
        } else {
            Ok(Ast::Product(factors))
        }
    }

    fn parse_power(&mut self) -> Result<Ast, ParseError> {
        let mut base = self.parse_atom()?;
        while matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Int(n)) if n >= 0 => {
                    if n > 4096 {
                        return Err(ParseError::HugeExponent(n as u32));
                    }
                    base = Ast::Power(Box::new(base), n as u32);
                }
                _ => {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "expected a non-negative integer exponent".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Ast, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Ast::Int(n)),
            Some(Tok::A) => Ok(Ast::FieldGen),
            Some(Tok::Y(i)) => Ok(Ast::Variable(Var::Y(i))),
            Some(Tok::Z(i)) => Ok(Ast::Variable(Var::Z(i))),
            Some(Tok::E(i)) => Ok(Ast::Egen(i)),
            Some(Tok::LParen) => {
                let inner = self.parse_sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::LBracket) => {
                let mut args = vec![self.parse_sum()?];
                while matches!(self.peek(), Some(Tok::Comma)) {
                    self.bump();
                    args.push(self.parse_sum()?);
                }
                self.expect(Tok::RBracket, "`]`")?;
                if args.len() < 2 {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "commutator needs at least 2 arguments".into(),
                    });
                }
                Ok(Ast::Commutator(args))
            }
            _ => Err(ParseError::Syntax {
                pos,
                msg: "expected a value".into(),
            }),
        }
    }
}

/// Parses an expression into an AST without choosing a target algebra.
pub fn parse_ast(input: &str) -> Result<Ast, ParseError> {
    let toks = lex(input)?;
    let mut p = Parser {
        toks,
        at: 0,
        input_len: input.len(),
    };
    let ast = p.parse_sum()?;
    if p.at != p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(ast)
}

fn field_gen(field: &FieldParams) -> Result<FieldScalar, ParseError> {
    if field.t() < 2 {
        return Err(ParseError::GeneratorInPrimeField);
    }
    Ok(field.scalar(&[0, 1]).expect("t >= 2"))
}

/// Lowers an AST to a free polynomial, expanding commutators into words.
pub fn ast_to_polynomial(ast: &Ast, field: &FieldParams) -> Result<FreePolynomial, ParseError> {
    match ast {
        Ast::Int(n) => Ok(FreePolynomial::monomial(
            field.clone(),
            Word::one(),
            field.from_int(*n),
        )),
        Ast::FieldGen => Ok(FreePolynomial::monomial(
            field.clone(),
            Word::one(),
            field_gen(field)?,
        )),
        Ast::Variable(v) => Ok(FreePolynomial::variable(field.clone(), *v)),
        Ast::Egen(_) => Err(ParseError::EgenInPolynomial),
        Ast::Neg(inner) => Ok(ast_to_polynomial(inner, field)?.neg()),
        Ast::Sum(parts) => {
            let mut acc = FreePolynomial::zero(field.clone());
            for p in parts {
                acc = acc.add(&ast_to_polynomial(p, field)?)?;
            }
            Ok(acc)
        }
        Ast::Product(parts) => {
            let mut acc = FreePolynomial::one(field.clone());
            for p in parts {
                acc = acc.mul(&ast_to_polynomial(p, field)?)?;
            }
            Ok(acc)
        }
        Ast::Power(base, e) => Ok(ast_to_polynomial(base, field)?.pow(*e)?),
        Ast::Commutator(args) => {
            let polys: Vec<_> = args
                .iter()
                .map(|a| ast_to_polynomial(a, field))
                .collect::<Result<_, _>>()?;
            Ok(commutator(&polys)?)
        }
    }
}

/// Parses a polynomial in the shared grammar.
pub fn parse_polynomial(input: &str, field: &FieldParams) -> Result<FreePolynomial, ParseError> {
    ast_to_polynomial(&parse_ast(input)?, field)
}

/// Lowers an AST to a Grassmann element (element syntax).
pub fn ast_to_element(
    ast: &Ast,
    algebra: &GrassmannAlgebra,
) -> Result<GrassmannElement, ParseError> {
    let field = algebra.field();
    match ast {
        Ast::Int(n) => Ok(algebra.scale(field.from_int(*n), &algebra.one())?),
        Ast::FieldGen => Ok(algebra.scale(field_gen(field)?, &algebra.one())?),
        Ast::Variable(_) => Err(ParseError::VarInElement),
        Ast::Egen(i) => {
            if *i > u16::MAX as u32 {
                return Err(ParseError::Syntax {
                    pos: 0,
                    msg: "generator index too large".into(),
                });
            }
            Ok(algebra.generator(*i as u16)?)
        }
        Ast::Neg(inner) => {
            let v = ast_to_element(inner, algebra)?;
            Ok(algebra.scale(field.from_int(-1), &v)?)
        }
        Ast::Sum(parts) => {
            let mut acc = algebra.zero();
            for p in parts {
                let v = ast_to_element(p, algebra)?;
                acc = algebra.add(&acc, &v)?;
            }
            Ok(acc)
        }
        Ast::Product(parts) => {
            let mut acc = algebra.one();
            for p in parts {
                let v = ast_to_element(p, algebra)?;
                acc = algebra.mul(&acc, &v)?;
            }
            Ok(acc)
        }
        Ast::Power(base, e) => {
            let v = ast_to_element(base, algebra)?;
            Ok(algebra.pow(&v, *e as u64)?)
        }
        Ast::Commutator(args) => {
            let vals: Vec<_> = args
                .iter()
                .map(|a| ast_to_element(a, algebra))
                .collect::<Result<Vec<_>, _>>()?;
            let mut acc = vals[0].clone();
            for b in &vals[1..] {
                let ab = algebra.mul(&acc, b)?;
                let ba = algebra.mul(b, &acc)?;
                acc = algebra.sub(&ab, &ba)?;
            }
            Ok(acc)
        }
    }
}

/// Parses a Grassmann element in the element syntax.
pub fn parse_element(
    input: &str,
    algebra: &GrassmannAlgebra,
) -> Result<GrassmannElement, ParseError> {
    ast_to_element(&parse_ast(input)?, algebra)
}

/// Splits a scalar for display: `(is_negative, magnitude)`. Constants above
/// p/2 render as negatives so that -1 prints as `-` rather than `p-1`.
pub fn balanced(c: &FieldScalar, _field: &FieldParams) -> (bool, FieldScalar) {
    c.balanced_parts()
}

pub(crate) fn format_free_polynomial(
    poly: &FreePolynomial,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    if poly.is_zero() {
        return write!(f, "0");
    }
    let field = poly.field();
    for (i, (w, c)) in poly.terms().enumerate() {
        let (neg, mag) = balanced(c, field);
        if i == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let mag_str = format!("{mag}");
        if w.is_empty() {
            write!(f, "{}", wrap(&mag_str))?;
        } else if mag_str == "1" {
            write!(f, "{w}")?;
        } else {
            write!(f, "{}*{w}", wrap(&mag_str))?;
        }
    }
    Ok(())
}

pub(crate) fn wrap(s: &str) -> String {
    if s.contains('+') || s.contains('-') {
        format!("({s})")
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::freealg::Var;

    fn f3() -> FieldParams {
        FieldParams::new(3, 1).unwrap()
    }

    #[test]
    fn parse_and_print_commutator() {
        let p = parse_polynomial("[y1,y2]", &f3()).unwrap();
        assert_eq!(p.to_string(), "y1*y2 - y2*y1");
    }

    #[test]
    fn powers_expand_in_print() {
        let p = parse_polynomial("z1^2", &f3()).unwrap();
        assert_eq!(p.to_string(), "z1*z1");
    }

    #[test]
    fn unary_commutator_rejected_with_position() {
        let err = parse_polynomial("[y1]", &f3()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: 0, .. }), "{err:?}");
    }

    #[test]
    fn whitespace_and_juxtaposition() {
        let a = parse_polynomial("z1^2*[y1,z2,y1] - 2*y1^4", &f3()).unwrap();
        let b = parse_polynomial("z1^2 [y1, z2, y1]   -   2 y1^4", &f3()).unwrap();
        assert_eq!(a, b);
        let c = parse_polynomial("[x1,x2][x3,x4]".replace('x', "z").as_str(), &f3()).unwrap();
        assert!(!c.is_zero());
    }

    #[test]
    fn coefficients_reduce_mod_p() {
        let a = parse_polynomial("4*y1", &f3()).unwrap();
        let b = parse_polynomial("y1", &f3()).unwrap();
        assert_eq!(a, b);
        let z = parse_polynomial("3*y1", &f3()).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn field_generator_requires_extension() {
        assert_eq!(
            parse_polynomial("a*y1", &f3()).unwrap_err(),
            ParseError::GeneratorInPrimeField
        );
        let f9 = FieldParams::new(3, 2).unwrap();
        let p = parse_polynomial("(a+2)*y1", &f9).unwrap();
        assert_eq!(p.num_terms(), 1);
    }

    #[test]
    fn roundtrip_print_parse() {
        let f = f3();
        for src in [
            "[y1,y2]",
            "z1^2*[y1,z2,y1] - 2*y1^4",
            "[z1,z2][z3,z4] + y1*z1*y1",
            "1 + y1 + y1*y1",
            "-y1 - 2*z1",
        ] {
            let p = parse_polynomial(src, &f).unwrap();
            let printed = p.to_string();
            let q = parse_polynomial(&printed, &f).unwrap();
            assert_eq!(p, q, "round-trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn element_parsing() {
        let alg = GrassmannAlgebra::new(f3(), 6).unwrap();
        let e = parse_element("2*e1e2 + e3", &alg).unwrap();
        assert_eq!(e.num_terms(), 2);
        assert_eq!(parse_element("1", &alg).unwrap(), alg.one());
        // e2*e1 = -e1e2
        let x = parse_element("e2e1", &alg).unwrap();
        let y = parse_element("-e1e2", &alg).unwrap();
        assert_eq!(x, y);
        // round-trip
        let printed = e.to_string();
        assert_eq!(parse_element(&printed, &alg).unwrap(), e);
    }

    #[test]
    fn variables_rejected_in_elements() {
        let alg = GrassmannAlgebra::new(f3(), 4).unwrap();
        assert_eq!(
            parse_element("y1", &alg).unwrap_err(),
            ParseError::VarInElement
        );
    }

    #[test]
    fn negative_coefficients_print_balanced() {
        let f = f3();
        let p = parse_polynomial("2*y1", &f).unwrap();
        assert_eq!(p.to_string(), "-y1");
        let q = parse_polynomial("y1 - y2", &f).unwrap();
        assert_eq!(q.to_string(), "y1 - y2");
    }

    #[test]
    fn substitute_word_order_example() {
        // z1*y1 parses to a single word with letters in written order
        let f = f3();
        let p = parse_polynomial("z1*y1", &f).unwrap();
        let w = Word(vec![Var::Z(1), Var::Y(1)]);
        assert!(p.coeff_of(&w).is_some());
    }
}
