use super::{Arity, Expr, Func, Pred, Var};
use crate::scalar::{parse_decimal, QSqrt2};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("arity error at {position}: {message}")]
    Arity { position: usize, message: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. } | ParseError::Arity { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(String),
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Colon,
    Semi,
    Lt,
    Le,
    EqEq,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Ident(id) => format!("identifier `{id}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::EqEq => "==",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Number(_) | Tok::Ident(_) | Tok::Eof => "",
        }
    }
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { position, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
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
        let two = |next: u8| bytes.get(i + 1) == Some(&next);
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b':' => Tok::Colon,
            b';' => Tok::Semi,
            b'!' => Tok::Bang,
            b'<' if two(b'=') => {
                i += 1;
                Tok::Le
            }
            b'<' => Tok::Lt,
            b'=' if two(b'=') => {
                i += 1;
                Tok::EqEq
            }
            b'&' if two(b'&') => {
                i += 1;
                Tok::AndAnd
            }
            b'|' if two(b'|') => {
                i += 1;
                Tok::OrOr
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                out.push((Tok::Number(src[start..i].to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    arity: Arity,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected `{}`, found {}", tok.symbol(), self.peek().describe()),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(&Tok::Slash) {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let at = self.offset();
            return match self.bump() {
                Tok::Number(n) if n.bytes().all(|c| c.is_ascii_digit()) => n
                    .parse::<u32>()
                    .map(|e| Expr::Pow(Box::new(base), e))
                    .map_err(|_| syntax(at, format!("exponent `{n}` is too large"))),
                other => Err(syntax(
                    at,
                    format!("exponent must be a nonnegative integer literal, found {}", other.describe()),
                )),
            };
        }
        Ok(base)
    }

    fn var(&self, name: &str, at: usize) -> Result<Option<Var>, ParseError> {
        let var = match name {
            "a" => Var::A,
            "b" => Var::B,
            "x" => Var::X,
            _ => return Ok(None),
        };
        if !var.allowed_in(self.arity) {
            let expected = match self.arity {
                Arity::Univariate => "x",
                Arity::Bivariate => "a and b",
            };
            return Err(ParseError::Arity {
                position: at,
                message: format!("variable `{name}` is not allowed here; use {expected}"),
            });
        }
        Ok(Some(var))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Number(n) => parse_decimal(&n)
                .map(|q| Expr::Const(QSqrt2::from_rational(q)))
                .ok_or_else(|| syntax(at, format!("bad number `{n}`"))),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if name == "sqrt2" {
                    return Ok(Expr::Const(QSqrt2::sqrt2_times(1, 1)));
                }
                if name == "piecewise" {
                    return self.piecewise();
                }
                if let Some(var) = self.var(&name, at)? {
                    return Ok(Expr::Var(var));
                }
                if let Some(func) = Func::from_name(&name) {
                    self.expect(&Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                Err(syntax(at, format!("unknown identifier `{name}`")))
            }
            other => Err(syntax(at, format!("expected an operand, found {}", other.describe()))),
        }
    }

    fn piecewise(&mut self) -> Result<Expr, ParseError> {
        self.expect(&Tok::LBrace)?;
        let mut branches = Vec::new();
        loop {
            let guard = self.pred()?;
            self.expect(&Tok::Colon)?;
            let value = self.expr()?;
            branches.push((guard, value));
            if !self.eat(&Tok::Semi) {
                break;
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(Expr::Piecewise(branches))
    }

    fn pred(&mut self) -> Result<Pred, ParseError> {
        let mut lhs = self.pred_and()?;
        while self.eat(&Tok::OrOr) {
            lhs = Pred::Or(Box::new(lhs), Box::new(self.pred_and()?));
        }
        Ok(lhs)
    }

    fn pred_and(&mut self) -> Result<Pred, ParseError> {
        let mut lhs = self.pred_unary()?;
        while self.eat(&Tok::AndAnd) {
            lhs = Pred::And(Box::new(lhs), Box::new(self.pred_unary()?));
        }
        Ok(lhs)
    }

    fn pred_unary(&mut self) -> Result<Pred, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Pred::Not(Box::new(self.pred_unary()?)));
        }
        self.pred_atom()
    }

    fn pred_atom(&mut self) -> Result<Pred, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if name == "true" => {
                self.bump();
                Ok(Pred::True)
            }
            Tok::Ident(name) if name == "rat" => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let at = self.offset();
                let var = match self.bump() {
                    Tok::Ident(v) => self.var(&v, at)?,
                    _ => None,
                };
                let var = var.ok_or_else(|| syntax(at, "rat(...) takes a variable"))?;
                self.expect(&Tok::RParen)?;
                Ok(Pred::Rational(var))
            }
            Tok::LParen => {
                // `(` opens either an arithmetic operand or a grouped predicate.
                let save = self.pos;
                match self.comparison() {
                    Ok(p) => Ok(p),
                    Err(ParseError::Arity { position, message }) => {
                        Err(ParseError::Arity { position, message })
                    }
                    Err(_) => {
                        self.pos = save;
                        self.bump();
                        let inner = self.pred()?;
                        self.expect(&Tok::RParen)?;
                        Ok(inner)
                    }
                }
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<Pred, ParseError> {
        let lhs = self.expr()?;
        let at = self.offset();
        let op = self.bump();
        let rhs = match op {
            Tok::Lt | Tok::Le | Tok::EqEq => self.expr()?,
            other => {
                return Err(syntax(
                    at,
                    format!("expected a comparison operator, found {}", other.describe()),
                ))
            }
        };
        Ok(match op {
            Tok::Lt => Pred::Lt(lhs, rhs),
            Tok::Le => Pred::Le(lhs, rhs),
            _ => Pred::Eq(lhs, rhs),
        })
    }
}

/// Parses `source` as a function of `x` (univariate) or of `a`, `b`
/// (bivariate).
pub fn parse_expr(source: &str, arity: Arity) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    if toks.len() == 1 {
        return Err(syntax(0, "empty expression"));
    }
    let mut parser = Parser { toks, pos: 0, arity };
    let expr = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        return Err(syntax(
            parser.offset(),
            format!("unexpected {} after expression", parser.peek().describe()),
        ));
    }
    Ok(expr)
}
