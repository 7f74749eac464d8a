//! Ordinals below `w^w` in Cantor normal form.
//!
//! An ordinal is a finite sum `w^e1*c1 + w^e2*c2 + ...` with strictly
//! decreasing exponents and positive coefficients. The empty sum is `0`.
//! The textual form uses `w` for omega:
//!
//! ```text
//! ordinal := "0" | term ("+" term)*
//! term    := "w" ("^" nat)? ("*" nat)? | nat
//! nat     := [1-9][0-9]*
//! ```
//!
//! Parsing is strict: terms must already be in normal form, so `w+w` is an
//! error rather than being folded into `w*2`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("non-canonical ordinal at position {pos}: {msg}")]
    NonCanonical { pos: usize, msg: String },
    #[error("{0} is not a limit ordinal")]
    NotLimit(Ordinal),
}

impl OrdinalError {
    /// Byte offset of the offending character, when there is one.
    pub fn position(&self) -> Option<usize> {
        match self {
            OrdinalError::Syntax { pos, .. } | OrdinalError::NonCanonical { pos, .. } => Some(*pos),
            OrdinalError::NotLimit(_) => None,
        }
    }
}

/// One `w^exp * coeff` summand.
///
/// Field order matters: the derived `Ord` compares exponent first, then
/// coefficient, which is exactly the per-term order the ordinal comparison
/// needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub exp: u32,
    pub coeff: u64,
}

/// A countable ordinal below `w^w`.
///
/// The derived ordering is the ordinal ordering: term lists compare
/// lexicographically from the leading term, and a proper prefix is smaller.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

/// Zero, successor or limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Zero,
    Successor,
    Limit,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Zero => "zero",
            Kind::Successor => "successor",
            Kind::Limit => "limit",
        })
    }
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn omega() -> Self {
        Self::omega_pow(1)
    }

    /// `w^exp`.
    pub fn omega_pow(exp: u32) -> Self {
        Ordinal {
            terms: vec![Term { exp, coeff: 1 }],
        }
    }

    /// Builds an ordinal from `(exponent, coefficient)` pairs, rejecting
    /// anything that is not already in normal form.
    pub fn from_terms<I>(terms: I) -> Result<Self, OrdinalError>
    where
        I: IntoIterator<Item = (u32, u64)>,
    {
        let mut out: Vec<Term> = Vec::new();
        for (i, (exp, coeff)) in terms.into_iter().enumerate() {
            if coeff == 0 {
                return Err(OrdinalError::NonCanonical {
                    pos: i,
                    msg: "zero coefficient".into(),
                });
            }
            if let Some(prev) = out.last() {
                if prev.exp <= exp {
                    return Err(OrdinalError::NonCanonical {
                        pos: i,
                        msg: "exponents not strictly decreasing".into(),
                    });
                }
            }
            out.push(Term { exp, coeff });
        }
        Ok(Ordinal { terms: out })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff nonzero with no finite part. Zero is not a limit.
    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|t| t.exp > 0)
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|t| t.exp == 0)
    }

    pub fn kind(&self) -> Kind {
        if self.is_zero() {
            Kind::Zero
        } else if self.is_limit() {
            Kind::Limit
        } else {
            Kind::Successor
        }
    }

    /// The finite value, if this ordinal is below `w`.
    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [Term { exp: 0, coeff }] => Some(*coeff),
            _ => None,
        }
    }

    pub fn successor(&self) -> Self {
        let mut terms = self.terms.clone();
        match terms.last_mut() {
            Some(t) if t.exp == 0 => {
                t.coeff = t.coeff.checked_add(1).expect("ordinal coefficient overflow");
            }
            _ => terms.push(Term { exp: 0, coeff: 1 }),
        }
        Ordinal { terms }
    }

    /// Ordinal sum `self + rhs`. Not commutative: the terms of `self` below
    /// the leading exponent of `rhs` are absorbed.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = self.terms.iter().copied().take_while(|t| t.exp >= lead.exp).collect();
        match terms.last_mut() {
            Some(t) if t.exp == lead.exp => {
                t.coeff = t.coeff.checked_add(lead.coeff).expect("ordinal coefficient overflow");
                terms.extend_from_slice(&rhs.terms[1..]);
            }
            _ => terms.extend_from_slice(&rhs.terms),
        }
        Ordinal { terms }
    }

    /// The `n`-th element of the canonical fundamental sequence of a limit.
    ///
    /// Writing `self = rho + w^e*c`, the sequence is `rho + w*(c-1) + n` when
    /// `e = 1` and `rho + w^e*(c-1) + w^(e-1)*n` when `e >= 2`.
    pub fn fund_seq(&self, n: u64) -> Result<Ordinal, OrdinalError> {
        if !self.is_limit() {
            return Err(OrdinalError::NotLimit(self.clone()));
        }
        let mut terms = self.terms.clone();
        let last = terms.pop().expect("limit ordinals are nonzero");
        if last.coeff > 1 {
            terms.push(Term {
                exp: last.exp,
                coeff: last.coeff - 1,
            });
        }
        if n > 0 {
            terms.push(Term {
                exp: last.exp - 1,
                coeff: n,
            });
        }
        Ok(Ordinal { terms })
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![Term { exp: 0, coeff: n }],
            }
        }
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if t.exp == 0 {
                write!(f, "{}", t.coeff)?;
                continue;
            }
            f.write_str("w")?;
            if t.exp != 1 {
                write!(f, "^{}", t.exp)?;
            }
            if t.coeff != 1 {
                write!(f, "*{}", t.coeff)?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: impl Into<String>) -> OrdinalError {
        OrdinalError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn nat(&mut self) -> Result<u64, OrdinalError> {
        let start = self.pos;
        match self.peek() {
            Some(b'0') => {
                return Err(OrdinalError::NonCanonical {
                    pos: start,
                    msg: "zero or zero-padded number".into(),
                })
            }
            Some(b'1'..=b'9') => {}
            _ => return Err(self.syntax("expected a number")),
        }
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("digits are ascii")
            .parse::<u64>()
            .map_err(|_| OrdinalError::Syntax {
                pos: start,
                msg: "number too large".into(),
            })
    }

    fn term(&mut self) -> Result<Term, OrdinalError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let mut exp = 1u64;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    exp = self.nat()?;
                }
                let mut coeff = 1u64;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    coeff = self.nat()?;
                }
                let exp = u32::try_from(exp).map_err(|_| self.syntax("exponent too large"))?;
                Ok(Term { exp, coeff })
            }
            Some(b'0'..=b'9') => Ok(Term {
                exp: 0,
                coeff: self.nat()?,
            }),
            Some(_) => Err(self.syntax("expected 'w' or a number")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}

pub fn parse(text: &str) -> Result<Ordinal, OrdinalError> {
    if text == "0" {
        return Ok(Ordinal::zero());
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut terms: Vec<Term> = Vec::new();
    loop {
        let start = p.pos;
        let t = p.term()?;
        if let Some(prev) = terms.last() {
            if prev.exp <= t.exp {
                return Err(OrdinalError::NonCanonical {
                    pos: start,
                    msg: "exponents not strictly decreasing".into(),
                });
            }
        }
        terms.push(t);
        match p.peek() {
            None => break,
            Some(b'+') => p.pos += 1,
            Some(_) => return Err(p.syntax("expected '+' or end of input")),
        }
    }
    Ok(Ordinal { terms })
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct OrdinalVisitor;

        impl Visitor<'_> for OrdinalVisitor {
            type Value = Ordinal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an ordinal expression such as \"w^2*3+w+4\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Ordinal, E> {
                parse(v).map_err(E::custom)
            }
        }

        deserializer.deserialize_str(OrdinalVisitor)
    }
}

/// Three-way comparison; equivalent to `Ord::cmp`.
pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn terms(x: &Ordinal) -> Vec<(u32, u64)> {
        x.terms().iter().map(|t| (t.exp, t.coeff)).collect()
    }

    #[test]
    fn parse_examples() {
        assert!(o("0").is_zero());
        assert_eq!(terms(&o("w^2*3+w+4")), vec![(2, 3), (1, 1), (0, 4)]);
        assert!(matches!(parse("w+w"), Err(OrdinalError::NonCanonical { pos: 2, .. })));
    }

    #[test]
    fn parse_rejects_malformed() {
        for bad in [
            "", "w+", "+w", "3+w", "w^0", "w*0", "05", "w^2^3", "W", "w +1", "0+1", "1+1",
        ] {
            assert!(parse(bad).is_err(), "{bad:?} should fail");
        }
        assert_eq!(parse("wx").unwrap_err().position(), Some(1));
        assert_eq!(parse("w^").unwrap_err().position(), Some(2));
    }

    #[test]
    fn parse_accepts_explicit_ones() {
        assert_eq!(o("w^1*1"), Ordinal::omega());
        assert_eq!(o("w^1*1").to_string(), "w");
    }

    #[test]
    fn format_examples() {
        assert_eq!(Ordinal::zero().to_string(), "0");
        assert_eq!(Ordinal::from_terms([(1, 1)]).unwrap().to_string(), "w");
        assert_eq!(Ordinal::from_terms([(3, 2), (0, 5)]).unwrap().to_string(), "w^3*2+5");
    }

    #[test]
    fn from_terms_rejects_non_canonical() {
        assert!(Ordinal::from_terms([(1, 1), (1, 1)]).is_err());
        assert!(Ordinal::from_terms([(0, 1), (1, 1)]).is_err());
        assert!(Ordinal::from_terms([(2, 0)]).is_err());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&o("w"), &o("w")), Ordering::Equal);
        assert_eq!(compare(&o("w*2+3"), &o("w^2")), Ordering::Less);
        assert_eq!(compare(&o("w^3*2"), &o("w^3+w^2*5")), Ordering::Greater);
        assert!(o("w^2") < o("w^2+1"));
        assert!(Ordinal::zero() < o("1"));
    }

    #[test]
    fn successor_examples() {
        assert_eq!(Ordinal::zero().successor(), o("1"));
        assert_eq!(o("w").successor(), o("w+1"));
        assert_eq!(o("w^2+3").successor(), o("w^2+4"));
    }

    #[test]
    fn add_examples() {
        assert_eq!(o("1").add(&o("w")), o("w"));
        assert_eq!(o("w").add(&o("1")), o("w+1"));
        assert_eq!(o("w+1").add(&o("w")), o("w*2"));
        assert_eq!(o("w^2+w*3+7").add(&o("w^2*2+1")), o("w^2*3+1"));
        assert_eq!(o("w*2").add(&Ordinal::zero()), o("w*2"));
    }

    #[test]
    fn limit_classification() {
        assert!(!Ordinal::zero().is_limit());
        assert!(o("w").is_limit());
        assert!(!o("w^2+1").is_limit());
        assert_eq!(Ordinal::zero().kind(), Kind::Zero);
        assert_eq!(o("w^2+1").kind(), Kind::Successor);
    }

    #[test]
    fn fund_seq_examples() {
        assert_eq!(o("w").fund_seq(5).unwrap(), o("5"));
        assert_eq!(o("w*2").fund_seq(3).unwrap(), o("w+3"));
        assert_eq!(o("w^2").fund_seq(4).unwrap(), o("w*4"));
        assert_eq!(o("w").fund_seq(0).unwrap(), Ordinal::zero());
        assert_eq!(o("w^3*2+w^2").fund_seq(2).unwrap(), o("w^3*2+w*2"));
        assert!(matches!(o("w+1").fund_seq(1), Err(OrdinalError::NotLimit(_))));
        assert!(Ordinal::zero().fund_seq(1).is_err());
    }

    #[test]
    fn serde_as_string() {
        let x = o("w^2*3+w+4");
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, "\"w^2*3+w+4\"");
        let back: Ordinal = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<Ordinal>("\"w+w\"").is_err());
    }
}
