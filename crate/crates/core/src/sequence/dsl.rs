//! Recursive-descent parser for sequence specs.
//!
//! ```text
//! spec    := builtin | expr
//! builtin := IDENT [ "(" number { "," number } ")" ]
//! expr    := term (("+"|"-") term)*
//! term    := factor (("*"|"/") factor)*
//! factor  := base ["^" factor]
//! base    := NUMBER | "n" | IDENT "(" expr ")" | "(" expr ")"
//! ```
//!
//! Builtin names may contain hyphens (`even-pow2-sums`); inside
//! expressions identifiers cannot, so `n-1` is a subtraction.

use std::fmt;

use super::{Builtin, SequenceError, SequenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Floor,
    Log,
    Log10,
    Sqrt,
    Exp,
}

impl Func {
    const ALL: [(&'static str, Func); 5] = [
        ("floor", Func::Floor),
        ("log", Func::Log),
        ("log10", Func::Log10),
        ("sqrt", Func::Sqrt),
        ("exp", Func::Exp),
    ];

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.iter().find(|(n, _)| *n == name).map(|&(_, f)| f)
    }

    fn name(self) -> &'static str {
        Func::ALL.iter().find(|(_, f)| *f == self).unwrap().0
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Floor => v.floor(),
            Func::Log => v.ln(),
            Func::Log10 => v.log10(),
            Func::Sqrt => v.sqrt(),
            Func::Exp => v.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Formula AST over the single variable `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, n: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => n,
            Expr::Call(f, arg) => f.apply(arg.eval(n)),
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(n), r.eval(n));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "n"),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SequenceError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
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
            let lit = &text[start..i];
            let v = lit.parse::<f64>().map_err(|_| SequenceError::Parse {
                position: start,
                expected: vec!["number".into()],
                found: format!("`{lit}`"),
            })?;
            toks.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            toks.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(SequenceError::Parse {
                position: i,
                expected: vec!["operator, number, `n` or function".into()],
                found: format!("`{c}`"),
            });
        }
    }
    toks.push((text.len(), Tok::End));
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

const BASE_EXPECTED: [&str; 4] = ["number", "`n`", "function call", "`(`"];

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

    fn error(&self, expected: &[&str]) -> SequenceError {
        SequenceError::Parse {
            position: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), SequenceError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn expr(&mut self) -> Result<Expr, SequenceError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, SequenceError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, SequenceError> {
        let base = self.base()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, SequenceError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) if name == "n" => {
                self.bump();
                Ok(Expr::Var)
            }
            Tok::Ident(name) => {
                let Some(func) = Func::lookup(&name) else {
                    return Err(self.error(&["`n`", "floor", "log", "log10", "sqrt", "exp"]));
                };
                self.bump();
                self.expect_sym('(')?;
                let arg = self.expr()?;
                if *self.peek() == Tok::Sym(',') {
                    let mut found = 1;
                    while *self.peek() == Tok::Sym(',') {
                        self.bump();
                        self.expr()?;
                        found += 1;
                    }
                    return Err(SequenceError::Arity {
                        name,
                        expected: 1,
                        found,
                    });
                }
                self.expect_sym(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            _ => Err(self.error(&BASE_EXPECTED)),
        }
    }
}

/// Leading builtin-style name: letter-led segments joined by `-`.
fn leading_name(text: &str) -> &str {
    let bytes = text.as_bytes();
    let mut end = 0;
    let mut i = 0;
    loop {
        if i >= bytes.len() || !bytes[i].is_ascii_alphabetic() {
            break;
        }
        while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
            i += 1;
        }
        end = i;
        if i < bytes.len() && bytes[i] == b'-' {
            i += 1;
        } else {
            break;
        }
    }
    &text[..end]
}

fn is_builtin_call(text: &str) -> bool {
    let name = leading_name(text);
    if name.is_empty() {
        return false;
    }
    if Builtin::arity(name).is_some() {
        return true;
    }
    let first = name.split('-').next().unwrap();
    if name.contains('-') {
        return first != "n";
    }
    if first == "n" || Func::lookup(first).is_some() {
        return false;
    }
    let rest = text[name.len()..].trim_start();
    rest.is_empty() || rest.starts_with('(')
}

fn parse_builtin(text: &str) -> Result<SequenceSpec, SequenceError> {
    let name = leading_name(text);
    let Some(arity) = Builtin::arity(name) else {
        return Err(SequenceError::UnknownBuiltin {
            name: name.to_string(),
        });
    };
    let rest = &text[name.len()..];
    let toks = lex(rest)?
        .into_iter()
        .map(|(p, t)| (p + name.len(), t))
        .collect();
    let mut p = Parser { toks, pos: 0 };
    let mut args = Vec::new();
    if *p.peek() == Tok::Sym('(') {
        p.bump();
        loop {
            let Tok::Num(v) = *p.peek() else {
                return Err(p.error(&["number"]));
            };
            p.bump();
            args.push(v);
            match p.peek() {
                Tok::Sym(',') => {
                    p.bump();
                }
                Tok::Sym(')') => {
                    p.bump();
                    break;
                }
                _ => return Err(p.error(&["`,`", "`)`"])),
            }
        }
    }
    if *p.peek() != Tok::End {
        return Err(p.error(&["end of input"]));
    }
    if args.len() != arity {
        return Err(SequenceError::Arity {
            name: name.to_string(),
            expected: arity,
            found: args.len(),
        });
    }
    Builtin::from_parts(name, &args).map(SequenceSpec::Builtin)
}

/// Parses a builtin name or a formula in `n`.
pub fn parse_spec(text: &str) -> Result<SequenceSpec, SequenceError> {
    let lead = text.len() - text.trim_start().len();
    let body = text.trim_start();
    if is_builtin_call(body) {
        return parse_builtin(body).map_err(|e| e.shifted(lead));
    }
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let expr = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(SequenceSpec::Formula(expr))
}
