use super::{BinOp, Expr, ExprError, Func};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent only when a digit follows, so `2e` stays `2 e`
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let x: f64 = text.parse().map_err(|_| ExprError::Syntax {
                offset: start,
                expected: vec!["number"],
                found: format!("`{text}`"),
            })?;
            out.push((Tok::Num(x), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let tok = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(ExprError::Syntax {
                        offset: start,
                        expected: vec!["number", "identifier", "operator", "parenthesis"],
                        found: format!("`{ch}`"),
                    });
                }
            };
            i += 1;
            out.push((tok, start));
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

const ATOM_START: &[&str] = &["number", "identifier", "`(`", "`-`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<X>(&self, expected: &[&'static str]) -> Result<X, ExprError> {
        Err(ExprError::Syntax {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::Ident(name) => {
                let (_, at) = self.bump();
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name).ok_or(ExprError::UnknownFunction {
                        name: name.clone(),
                        offset: at,
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    Ok(Expr::Ident(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            _ => self.fail(ATOM_START),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.fail(&["`)`", "operator"])
        }
    }
}

/// Parses a single expression.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(x: f64) -> Box<Expr> {
        Box::new(Expr::Num(x))
    }

    fn id(s: &str) -> Box<Expr> {
        Box::new(Expr::Ident(s.into()))
    }

    #[test]
    fn power_node() {
        assert_eq!(parse("v^2").unwrap(), Expr::Binary(BinOp::Pow, id("v"), num(2.0)));
    }

    #[test]
    fn double_caret_fails_at_second_caret() {
        let err = parse("v^^2").unwrap_err();
        assert_eq!(err.offset(), Some(2));
        match err {
            ExprError::Syntax { expected, .. } => assert!(expected.contains(&"number")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(
            parse("-v^2").unwrap(),
            Expr::Neg(Box::new(Expr::Binary(BinOp::Pow, id("v"), num(2.0))))
        );
        assert_eq!(
            parse("2^-1").unwrap(),
            Expr::Binary(BinOp::Pow, num(2.0), Box::new(Expr::Neg(num(1.0))))
        );
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(
            parse("a^b^c").unwrap(),
            Expr::Binary(
                BinOp::Pow,
                id("a"),
                Box::new(Expr::Binary(BinOp::Pow, id("b"), id("c")))
            )
        );
    }

    #[test]
    fn standard_precedence() {
        let e = parse("1+2*3-4/u").unwrap();
        assert_eq!(e.to_string(), "((1 + (2 * 3)) - (4 / u))");
    }

    #[test]
    fn exponent_literals_and_constant_e() {
        assert_eq!(parse("1.5e2").unwrap(), Expr::Num(150.0));
        assert_eq!(
            parse("2e").unwrap_err().offset(),
            Some(1),
            "`2e` is number then identifier without operator"
        );
        assert_eq!(parse("2*e").unwrap(), Expr::Binary(BinOp::Mul, num(2.0), id("e")));
    }

    #[test]
    fn unknown_function_and_trailing_garbage() {
        assert!(matches!(
            parse("foo(u)"),
            Err(ExprError::UnknownFunction { offset: 0, .. })
        ));
        assert_eq!(parse("u v").unwrap_err().offset(), Some(2));
        assert_eq!(parse("(u").unwrap_err().offset(), Some(2));
        assert_eq!(parse("u $ v").unwrap_err().offset(), Some(2));
        assert_eq!(parse("").unwrap_err().offset(), Some(0));
    }

    #[test]
    fn error_offsets_follow_position() {
        // the same defect moved right reports a larger offset
        let mut last = 0;
        for prefix in ["", "u+", "u+v*", "u+v*sin(u)-"] {
            let src = format!("{prefix}*2");
            let off = parse(&src).unwrap_err().offset().unwrap();
            assert!(off >= last);
            last = off;
        }
    }
}
