//! Concrete syntax for properties.
//!
//! ```text
//! formula := imp
//! imp     := or ( "->" imp )?
//! or      := and ( ("|" | "/") and )*
//! and     := unary ( "&" unary )*
//! unary   := "!" unary | ("AF"|"AG"|"EF"|"EG"|"AX"|"EX") unary
//!          | ("E"|"A") "[" imp "U" imp "]" | "(" imp ")" | atom
//! atom    := "leader(" idx ")" | "vid(" idx ")" "=" int
//!          | "mode(" idx ")" "=" ("active"|"relay") | "quiescent" | "true" | "false"
//! ```

use super::{CtlError, Formula};
use crate::protocol::{Atom, Mode};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Not,
    And,
    Or,
    Arrow,
    Eq,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, CtlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'!' => Tok::Not,
            b'&' => Tok::And,
            b'|' | b'/' => Tok::Or,
            b'=' => Tok::Eq,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..=i];
                let v = digits.parse().map_err(|_| CtlError::Syntax {
                    position: start,
                    message: format!("integer `{digits}` is too large"),
                })?;
                Tok::Int(v)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(CtlError::Syntax {
                    position: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, CtlError> {
        Err(CtlError::Syntax {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), CtlError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn imp(&mut self) -> Result<Formula, CtlError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, CtlError> {
        let mut f = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, CtlError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, CtlError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.imp()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                let op: Option<fn(Formula) -> Formula> = match name.as_str() {
                    "AF" => Some(Formula::af),
                    "AG" => Some(Formula::ag),
                    "AX" => Some(Formula::ax),
                    "EF" => Some(Formula::ef),
                    "EG" => Some(Formula::eg),
                    "EX" => Some(Formula::ex),
                    _ => None,
                };
                if let Some(op) = op {
                    self.pos += 1;
                    return Ok(op(self.unary()?));
                }
                if (name == "E" || name == "A")
                    && self.toks.get(self.pos + 1).map(|(_, t)| t) == Some(&Tok::LBracket)
                {
                    self.pos += 2;
                    let lhs = self.imp()?;
                    match self.bump() {
                        Some(Tok::Ident(u)) if u == "U" => {}
                        _ => {
                            self.pos -= 1;
                            return self.err("expected `U`");
                        }
                    }
                    let rhs = self.imp()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    return Ok(if name == "E" {
                        Formula::eu(lhs, rhs)
                    } else {
                        Formula::au(lhs, rhs)
                    });
                }
                self.atom()
            }
            Some(_) => self.err("expected a formula"),
            None => self.err("unexpected end of input"),
        }
    }

    fn index(&mut self) -> Result<usize, CtlError> {
        self.expect(Tok::LParen, "`(`")?;
        let Some(Tok::Int(i)) = self.bump() else {
            self.pos -= 1;
            return self.err("expected a node index");
        };
        self.expect(Tok::RParen, "`)`")?;
        let i = i as usize;
        if i >= self.n {
            return Err(CtlError::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(i)
    }

    fn atom(&mut self) -> Result<Formula, CtlError> {
        let Some(Tok::Ident(name)) = self.bump() else {
            self.pos -= 1;
            return self.err("expected an atom");
        };
        let atom = match name.as_str() {
            "true" | "TRUE" => return Ok(Formula::True),
            "false" | "FALSE" => return Ok(Formula::False),
            "quiescent" => Atom::Quiescent,
            "leader" => Atom::IsLeader(self.index()?),
            "vid" => {
                let i = self.index()?;
                self.expect(Tok::Eq, "`=`")?;
                match self.bump() {
                    Some(Tok::Int(k)) if k <= u8::MAX as u64 => Atom::VidEquals(i, k as u8),
                    _ => {
                        self.pos -= 1;
                        return self.err("expected a vid value in 0..=255");
                    }
                }
            }
            "mode" => {
                let i = self.index()?;
                self.expect(Tok::Eq, "`=`")?;
                match self.bump() {
                    Some(Tok::Ident(m)) if m == "active" => Atom::ModeIs(i, Mode::Active),
                    Some(Tok::Ident(m)) if m == "relay" => Atom::ModeIs(i, Mode::Relay),
                    _ => {
                        self.pos -= 1;
                        return self.err("expected `active` or `relay`");
                    }
                }
            }
            other => {
                self.pos -= 1;
                return self.err(format!("unknown atom `{other}`"));
            }
        };
        Ok(Formula::Atom(atom))
    }
}

/// Parses `text` for a ring of `n` nodes.
pub fn parse_formula(text: &str, n: usize) -> Result<Formula, CtlError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        end: text.len(),
        n,
    };
    let f = p.imp()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn leader(i: usize) -> Formula {
        Formula::atom(Atom::IsLeader(i))
    }

    #[test]
    fn eventual_leader() {
        let f = parse_formula("AF (leader(0) | leader(1))", 2).unwrap();
        assert_eq!(f, Formula::af(Formula::or(leader(0), leader(1))));
        // Slash is accepted as disjunction.
        assert_eq!(parse_formula("AF (leader(0) / leader(1))", 2).unwrap(), f);
    }

    #[test]
    fn max_vid_implication() {
        let f = parse_formula("AG (leader(0) -> vid(0)=2)", 3).unwrap();
        assert_eq!(
            f,
            Formula::ag(Formula::implies(leader(0), Formula::atom(Atom::VidEquals(0, 2))))
        );
    }

    #[test]
    fn index_out_of_range() {
        assert_eq!(
            parse_formula("leader(5)", 3),
            Err(CtlError::IndexOutOfRange { index: 5, n: 3 })
        );
    }

    #[test]
    fn precedence() {
        let f = parse_formula("!leader(0) & leader(1) | quiescent -> mode(1)=relay", 2).unwrap();
        let expected = Formula::implies(
            Formula::or(
                Formula::and(Formula::not(leader(0)), leader(1)),
                Formula::atom(Atom::Quiescent),
            ),
            Formula::atom(Atom::ModeIs(1, Mode::Relay)),
        );
        assert_eq!(f, expected);
        let f = parse_formula("a -> b", 1);
        assert!(matches!(f, Err(CtlError::Syntax { position: 0, .. })));
    }

    #[test]
    fn until_forms() {
        let f = parse_formula("E[ !leader(0) U leader(1) ] & A[true U quiescent]", 2).unwrap();
        assert_eq!(
            f,
            Formula::and(
                Formula::eu(Formula::not(leader(0)), leader(1)),
                Formula::au(Formula::True, Formula::atom(Atom::Quiescent)),
            )
        );
    }

    #[test]
    fn syntax_error_positions() {
        match parse_formula("AF (leader(0) | )", 2) {
            Err(CtlError::Syntax { position, .. }) => assert_eq!(position, 16),
            other => panic!("{other:?}"),
        }
        match parse_formula("leader(0) leader(1)", 2) {
            Err(CtlError::Syntax { position, message }) => {
                assert_eq!(position, 10);
                assert_eq!(message, "trailing input");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_formula("", 2), Err(CtlError::Syntax { position: 0, .. })));
        assert!(matches!(parse_formula("E[leader(0) leader(1)]", 2), Err(CtlError::Syntax { .. })));
        assert!(matches!(parse_formula("leader(0) # x", 2), Err(CtlError::Syntax { position: 10, .. })));
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            (0usize..3).prop_map(|i| Formula::atom(Atom::IsLeader(i))),
            (0usize..3, 0u8..5).prop_map(|(i, k)| Formula::atom(Atom::VidEquals(i, k))),
            (0usize..3, prop::bool::ANY).prop_map(|(i, r)| Formula::atom(Atom::ModeIs(
                i,
                if r { Mode::Relay } else { Mode::Active }
            ))),
            Just(Formula::atom(Atom::Quiescent)),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                inner.clone().prop_map(Formula::ex),
                inner.clone().prop_map(Formula::eg),
                inner.clone().prop_map(Formula::ef),
                inner.clone().prop_map(Formula::ax),
                inner.clone().prop_map(Formula::ag),
                inner.clone().prop_map(Formula::af),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::eu(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::au(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parses_back(f in arb_formula()) {
            prop_assert_eq!(parse_formula(&f.to_string(), 3).unwrap(), f);
        }
    }
}
