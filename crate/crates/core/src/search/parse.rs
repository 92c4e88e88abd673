//! Recursive-descent parser for rational functions in `t`.
//!
//! Grammar: `expr = term (('+' | '-') term)*`, `term = unary (('*' | '/') unary)*`,
//! `unary = ('+' | '-') unary | power`, `power = atom ('^' integer)?`,
//! `atom = integer | 't' | '(' expr ')'`. Exponents may carry a sign.

use rug::{Integer, Rational};

use super::poly::RatFunc;
use crate::error::{Error, Result};

pub fn parse_rational_function(src: &str) -> Result<RatFunc> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let f = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, reason: &str) -> Error {
        let found = match self.src.get(self.pos) {
            Some(&c) => format!("{reason} (found {:?})", c as char),
            None => format!("{reason} (found end of input)"),
        };
        Error::Parse {
            position: self.pos,
            reason: found,
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RatFunc> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RatFunc> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let rhs = self.unary()?;
                acc = acc.div(&rhs).ok_or(Error::Parse {
                    position: at,
                    reason: "division by zero".into(),
                })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RatFunc> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFunc> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        if !neg {
            self.eat(b'+');
        }
        let e = self.integer()?;
        if paren && !self.eat(b')') {
            return Err(self.err("expected ')' after exponent"));
        }
        let e = e
            .to_i32()
            .filter(|x| x.unsigned_abs() <= 64)
            .ok_or(Error::Parse {
                position: at,
                reason: "exponent out of range".into(),
            })?;
        base.pow(if neg { -e } else { e }).ok_or(Error::Parse {
            position: at,
            reason: "negative power of zero".into(),
        })
    }

    fn atom(&mut self) -> Result<RatFunc> {
        match self.peek() {
            Some(b't') => {
                self.pos += 1;
                Ok(RatFunc::t())
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => Ok(RatFunc::constant(Rational::from(self.integer()?))),
            _ => Err(self.err("expected a number, 't' or '('")),
        }
    }

    fn integer(&mut self) -> Result<Integer> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse as integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::poly::Poly;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn parses_polynomials_and_quotients() {
        let f = parse_rational_function("t^2/144").unwrap();
        assert_eq!(f.eval(&q(12, 1)), Some(q(1, 1)));
        let g = parse_rational_function(" ((1 + t)/(1 - t))^2 ").unwrap();
        assert_eq!(g.eval(&q(3, 1)), Some(q(4, 1)));
        assert_eq!(g.eval(&q(1, 1)), None);
        let h = parse_rational_function("-3/4 + t^-1").unwrap();
        assert_eq!(h.eval(&q(2, 1)), Some(q(-1, 4)));
        assert_eq!(parse_rational_function("2*t - 2*t").unwrap(), RatFunc::constant(q(0, 1)));
        assert_eq!(parse_rational_function("t+5").unwrap().num(), &Poly::from_ints(&[5, 1]));
    }

    #[test]
    fn reports_positions() {
        match parse_rational_function("1/ ") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 3),
            other => panic!("{other:?}"),
        }
        match parse_rational_function("t + * 2") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        match parse_rational_function("1/(t - t)") {
            Err(Error::Parse { position, reason }) => {
                assert_eq!(position, 1);
                assert!(reason.contains("zero"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_rational_function("(t").is_err());
        assert!(parse_rational_function("2t").is_err());
        assert!(parse_rational_function("x").is_err());
        assert!(parse_rational_function("t^999").is_err());
    }
}
