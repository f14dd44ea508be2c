//! Text grammar for symbol literals.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ['^' uint]
//! atom   := number ['i'] | 'i' | 'z'k ['~'] | 'conj(' 'z'k ')' | 'defect(' uint ')' | '(' expr ')'
//! number := decimal ['/' decimal]
//! ```

use num_complex::Complex;


use super::PolySymbol;
use crate::error::{Error, Result};
use crate::scalar::Real;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { pos, msg: msg.into() })
}

impl<'a> Parser<'a> {
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.pos, format!("expected '{}'", c as char))
        }
    }

    fn starts_with(&mut self, kw: &str) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(kw.as_bytes())
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return err(start, "expected an unsigned integer");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .or_else(|_| err(start, "integer out of range"))
    }

    fn decimal_end(&self, mut p: usize) -> usize {
        let s = self.src;
        while p < s.len() && (s[p].is_ascii_digit() || s[p] == b'.') {
            p += 1;
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                while q < s.len() && s[q].is_ascii_digit() {
                    q += 1;
                }
                p = q;
            }
        }
        p
    }

    fn number<R: Real>(&mut self) -> Result<Complex<R>> {
        let start = self.pos;
        let mut end = self.decimal_end(start);
        if end < self.src.len() && self.src[end] == b'/' {
            let den_end = self.decimal_end(end + 1);
            if den_end == end + 1 {
                return err(end + 1, "expected a denominator");
            }
            end = den_end;
        }
        let text = std::str::from_utf8(&self.src[start..end]).unwrap();
        let Some(v) = R::parse_literal(text) else {
            return err(start, format!("invalid number '{text}'"));
        };
        self.pos = end;
        if self.pos < self.src.len() && self.src[self.pos] == b'i' {
            self.pos += 1;
            Ok(Complex::new(R::zero(), v))
        } else {
            Ok(Complex::new(v, R::zero()))
        }
    }

    fn variable_index(&mut self) -> Result<usize> {
        let at = self.pos;
        let k = self.uint()? as usize;
        if k == 0 || k > self.n {
            return err(at, format!("variable index {k} outside 1..={}", self.n));
        }
        Ok(k - 1)
    }

    fn atom<R: Real>(&mut self) -> Result<PolySymbol<R>> {
        let n = self.n;
        match self.peek() {
            None => err(self.pos, "unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(PolySymbol::constant(n, self.number()?)),
            Some(b'i') => {
                self.pos += 1;
                Ok(PolySymbol::constant(n, Complex::new(R::zero(), R::one())))
            }
            Some(b'z') => {
                self.pos += 1;
                let k = self.variable_index()?;
                if self.pos < self.src.len() && self.src[self.pos] == b'~' {
                    self.pos += 1;
                    Ok(PolySymbol::zbar(n, k))
                } else {
                    Ok(PolySymbol::z(n, k))
                }
            }
            Some(b'c') if self.starts_with("conj") => {
                self.pos += 4;
                self.expect(b'(')?;
                if !self.eat(b'z') {
                    return err(self.pos, "conj() takes a variable zk");
                }
                let k = self.variable_index()?;
                self.expect(b')')?;
                Ok(PolySymbol::zbar(n, k))
            }
            Some(b'd') if self.starts_with("defect") => {
                self.pos += 6;
                self.expect(b'(')?;
                let m = self.uint()?;
                self.expect(b')')?;
                Ok(PolySymbol::defect_power(n, m))
            }
            Some(c) => err(self.pos, format!("unexpected character '{}'", c as char)),
        }
    }

    fn factor<R: Real>(&mut self) -> Result<PolySymbol<R>> {
        let a = self.atom()?;
        if self.eat(b'^') {
            let k = self.uint()?;
            return Ok(a.pow(k));
        }
        Ok(a)
    }

    fn term<R: Real>(&mut self) -> Result<PolySymbol<R>> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn expr<R: Real>(&mut self) -> Result<PolySymbol<R>> {
        let negate_first = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let first = self.term()?;
        let mut acc = if negate_first { -&first } else { first };
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                acc = &acc + &t;
            } else if self.eat(b'-') {
                let t = self.term()?;
                acc = &acc - &t;
            } else {
                break;
            }
        }
        Ok(acc)
    }
}

pub(super) fn parse_symbol<R: Real>(n: usize, text: &str) -> Result<PolySymbol<R>> {
    if n == 0 {
        return err(0, "dimension must be positive");
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0, n };
    let e = p.expr()?;
    if p.peek().is_some() {
        return err(p.pos, "trailing input");
    }
    Ok(e)
}
