use super::{BinOp, DensityExpr, Expr, Func, ParseError, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

const OPERAND: &[&str] = &["number", "identifier", "("];
const FACTOR: &[&str] = &["-", "number", "identifier", "("];

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
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
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme = &text[start..i];
                match lexeme.parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push((start, Tok::Num(v))),
                    _ => {
                        return Err(ParseError::Syntax {
                            offset: start,
                            found: format!("malformed number `{lexeme}`"),
                            expected: vec!["number"],
                        });
                    }
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    found: format!("character `{ch}`"),
                    expected: FACTOR.to_vec(),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax { offset: self.offset(), found: self.peek().describe(), expected: expected.to_vec() }
    }

    // expr := term (("+"|"-") term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // term := factor (("*"|"/") factor)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // factor := ("-")? power
    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > 256 {
            return Err(ParseError::Syntax {
                offset: self.offset(),
                found: "nesting deeper than 256".into(),
                expected: vec![],
            });
        }
        let out = if *self.peek() == Tok::Minus {
            self.bump();
            self.power().map(|p| Expr::Neg(Box::new(p)))
        } else {
            self.power()
        };
        self.depth -= 1;
        out
    }

    // power := atom ("^" factor)?
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    // atom := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                let var = match name.as_str() {
                    "u" => Some(Expr::Var(Var::U)),
                    "v" => Some(Expr::Var(Var::V)),
                    "x" => Some(Expr::Var(Var::X)),
                    "y" => Some(Expr::Var(Var::Y)),
                    "pi" => Some(Expr::Pi),
                    _ => None,
                };
                if let Some(v) = var {
                    return Ok(v);
                }
                let func = match name.as_str() {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "sqrt" => Func::Sqrt,
                    "abs" => Func::Abs,
                    _ => return Err(ParseError::UnknownIdentifier { offset, name }),
                };
                if *self.peek() != Tok::LParen {
                    return Err(self.error(&["("]));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.error(OPERAND)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["+", "-", "*", "/", "^", ")"]))
        }
    }
}

/// Parses `text` into a [`DensityExpr`].
///
/// Precedence from loosest to tightest is `+ -`, `* /`, unary `-`, `^`.
/// Binary `+ - * /` associate to the left and `^` to the right.
pub fn parse_density(text: &str) -> Result<DensityExpr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    if *p.peek() == Tok::Eof {
        return Err(p.error(FACTOR));
    }
    let root = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["+", "-", "*", "/", "^", "end of input"]));
    }
    Ok(DensityExpr::from_expr(root))
}
