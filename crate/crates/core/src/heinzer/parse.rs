//! Text syntax for Laurent fractions: `3*x1^2*x2^-1`, sums and differences,
//! products, quotients, integer powers, and parentheses.

use super::{Coeff, ExpVec, HeinzerError, LaurentFrac, LaurentPoly};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err(pos: usize, message: impl Into<String>) -> HeinzerError {
    HeinzerError::Parse { pos, message: message.into() }
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
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

    fn integer(&mut self) -> Result<i64, HeinzerError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(err(start, "expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| err(start, "number out of range"))
    }

    fn expr<C: Coeff>(&mut self) -> Result<LaurentFrac<C>, HeinzerError> {
        let mut acc = if self.eat(b'-') {
            self.term()?.neg()
        } else {
            self.eat(b'+');
            self.term()?
        };
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

    fn term<C: Coeff>(&mut self) -> Result<LaurentFrac<C>, HeinzerError> {
        let mut acc = self.power()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.power()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let rhs = self.power()?;
                acc = acc.div(&rhs).map_err(|_| err(at, "division by zero"))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power<C: Coeff>(&mut self) -> Result<LaurentFrac<C>, HeinzerError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let neg = self.eat(b'-');
        let e = self.integer()?;
        let e = if neg { -e } else { e };
        base.pow(e).map_err(|_| err(at, "negative power of zero"))
    }

    fn atom<C: Coeff>(&mut self) -> Result<LaurentFrac<C>, HeinzerError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(err(self.pos, "expected `)`"));
                }
                Ok(inner)
            }
            Some(b'x') => {
                self.pos += 1;
                let at = self.pos;
                let i = self.integer()?;
                if i < 1 || i > u32::MAX as i64 {
                    return Err(err(at, "variable indices start at 1"));
                }
                Ok(LaurentFrac::monomial(ExpVec::unit(i as u32)))
            }
            Some(c) if c.is_ascii_digit() => {
                let at = self.pos;
                let n = self.integer()?;
                let c = C::from_ratio(n, 1).ok_or_else(|| err(at, "bad constant"))?;
                Ok(LaurentFrac::from_poly(LaurentPoly::constant(c)))
            }
            Some(c) => Err(err(self.pos, format!("unexpected `{}`", c as char))),
            None => Err(err(self.pos, "unexpected end of input")),
        }
    }
}

pub fn parse_frac<C: Coeff>(s: &str) -> Result<LaurentFrac<C>, HeinzerError> {
    let mut p = Parser { src: s.as_bytes(), pos: 0 };
    let f = p.expr()?;
    if p.peek().is_some() {
        return Err(err(p.pos, "trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = LaurentFrac<BigRational>;

    #[test]
    fn parses_terms_and_fractions() {
        let f: Q = parse_frac("3*x1^2*x2^-1 - 1/2").unwrap();
        assert_eq!(f, parse_frac("(6*x1^2 - x2)/(2*x2)").unwrap());
        let g: Q = parse_frac("(x1 + x2)/(x3)").unwrap();
        assert_eq!(g, parse_frac("x1*x3^-1 + x2*x3^-1").unwrap());
    }

    #[test]
    fn reports_positions() {
        assert_eq!(
            parse_frac::<BigRational>("x1 + * x2"),
            Err(HeinzerError::Parse { pos: 5, message: "unexpected `*`".into() })
        );
        assert!(matches!(parse_frac::<BigRational>("x0"), Err(HeinzerError::Parse { pos: 1, .. })));
        assert!(matches!(parse_frac::<BigRational>("1/(x1 - x1)"), Err(HeinzerError::Parse { pos: 1, .. })));
        assert!(matches!(parse_frac::<BigRational>("(x1"), Err(HeinzerError::Parse { pos: 3, .. })));
    }
}
