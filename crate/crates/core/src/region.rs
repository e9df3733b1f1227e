//! Region expressions: comparisons of named columns against decimal literals,
//! combined with `and`, `or`, `not` and parentheses.
//!
//! ```text
//! v2 > -0.3333333333333333
//! abs(v2) > 0.25 and v1 > 0
//! not (v3 <= 0) or v1 == 1
//! ```
//!
//! Comparisons are exactly as written; boundary rows follow the stated
//! operator.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Cmp {
        column: String,
        abs: bool,
        op: CmpOp,
        value: f64,
    },
    And(Box<Region>, Box<Region>),
    Or(Box<Region>, Box<Region>),
    Not(Box<Region>),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Op(CmpOp),
    And,
    Or,
    Not,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            '&' => {
                out.push(Token::And);
                i += if chars.get(i + 1) == Some(&'&') { 2 } else { 1 };
            }
            '|' => {
                out.push(Token::Or);
                i += if chars.get(i + 1) == Some(&'|') { 2 } else { 1 };
            }
            '<' | '>' | '=' | '!' => {
                let two = chars.get(i + 1) == Some(&'=');
                let op = match (c, two) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    ('>', true) => CmpOp::Ge,
                    ('=', true) => CmpOp::Eq,
                    ('!', true) => CmpOp::Ne,
                    ('=', false) => CmpOp::Eq,
                    ('!', false) => {
                        out.push(Token::Not);
                        i += 1;
                        continue;
                    }
                    _ => unreachable!(),
                };
                out.push(Token::Op(op));
                i += if two { 2 } else { 1 };
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || matches!(chars[i], '.' | 'e' | 'E')
                        || (matches!(chars[i], '-' | '+') && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Region(format!("bad number `{text}`")))?;
                out.push(Token::Number(v));
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '.')) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(match word.to_ascii_lowercase().as_str() {
                    "and" => Token::And,
                    "or" => Token::Or,
                    "not" => Token::Not,
                    _ => Token::Ident(word),
                });
            }
            other => return Err(Error::Region(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn or(&mut self) -> Result<Region> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            lhs = Region::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Region> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            lhs = Region::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Region> {
        match self.peek() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Region::Not(Box::new(self.unary()?)))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.or()?;
                match self.next() {
                    Some(Token::Close) => Ok(inner),
                    _ => Err(Error::Region("missing `)`".into())),
                }
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<Region> {
        let (column, abs) = match self.next() {
            Some(Token::Ident(name)) if name.eq_ignore_ascii_case("abs") => {
                match (self.next(), self.next(), self.next()) {
                    (Some(Token::Open), Some(Token::Ident(col)), Some(Token::Close)) => (col, true),
                    _ => return Err(Error::Region("expected abs(<column>)".into())),
                }
            }
            Some(Token::Ident(name)) => (name, false),
            other => return Err(Error::Region(format!("expected a column name, found {other:?}"))),
        };
        let op = match self.next() {
            Some(Token::Op(op)) => op,
            other => return Err(Error::Region(format!("expected a comparison operator, found {other:?}"))),
        };
        let value = match self.next() {
            Some(Token::Number(v)) => v,
            other => return Err(Error::Region(format!("expected a number, found {other:?}"))),
        };
        Ok(Region::Cmp { column, abs, op, value })
    }
}

impl Region {
    pub fn parse(src: &str) -> Result<Region> {
        let mut p = Parser {
            tokens: tokenize(src)?,
            pos: 0,
        };
        if p.tokens.is_empty() {
            return Err(Error::Region("empty expression".into()));
        }
        let r = p.or()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Region(format!("trailing input after token {}", p.pos)));
        }
        Ok(r)
    }

    pub fn columns(&self) -> Vec<&str> {
        match self {
            Region::Cmp { column, .. } => vec![column.as_str()],
            Region::And(a, b) | Region::Or(a, b) => {
                let mut v = a.columns();
                v.extend(b.columns());
                v
            }
            Region::Not(a) => a.columns(),
        }
    }

    /// Evaluates the expression against one row; `lookup` maps a column name
    /// to its value.
    pub fn eval(&self, lookup: &impl Fn(&str) -> Option<f64>) -> Result<bool> {
        Ok(match self {
            Region::Cmp { column, abs, op, value } => {
                let x = lookup(column).ok_or_else(|| Error::Region(format!("unknown column `{column}`")))?;
                op.apply(if *abs { x.abs() } else { x }, *value)
            }
            Region::And(a, b) => a.eval(lookup)? && b.eval(lookup)?,
            Region::Or(a, b) => a.eval(lookup)? || b.eval(lookup)?,
            Region::Not(a) => !a.eval(lookup)?,
        })
    }

    /// Boolean mask over rows given named numeric columns.
    pub fn mask(&self, names: &[String], columns: &[Vec<f64>]) -> Result<Vec<bool>> {
        for c in self.columns() {
            if !names.iter().any(|n| n == c) {
                return Err(Error::Region(format!("unknown column `{c}`")));
            }
        }
        let n = columns.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| {
                self.eval(&|name: &str| names.iter().position(|n| n == name).map(|k| columns[k][i]))
            })
            .collect()
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Region::parse(s)
    }
}
