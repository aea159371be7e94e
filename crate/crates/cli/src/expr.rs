//! Arithmetic expressions in one variable `x`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := '-' exponent | power          (right associative)
//! primary  := number | 'x' | 'pi' | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos exp log abs sqrt sign` and `powabs(u, p) = |u|^(p-2) u`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    Sign,
    Powabs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sign" => Func::Sign,
            "powabs" => Func::Powabs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Sign => "sign",
            Func::Powabs => "powabs",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Powabs => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at byte {offset}; expected one of: {}", expected.join(", "))]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("`{expr}` is not finite at x = {x} (value {value})")]
pub struct EvalError {
    pub expr: String,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot differentiate `{0}`: the exponent of powabs must not depend on x")]
pub struct DiffError(pub String);

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
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
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value = text.parse::<f64>().map_err(|_| ParseError {
                offset: start,
                message: format!("malformed number `{text}`"),
                expected: vec!["number"],
            })?;
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ParseError {
                offset: i,
                message: format!("unexpected character `{c}`"),
                expected: vec!["number", "x", "pi", "function", "(", "operator"],
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            offset: self.offset(),
            message: message.into(),
            expected,
        }
    }

    fn expect(&mut self, c: char, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("found {}", describe(self.peek())), vec![expected]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exp = self.exponent()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.exponent()?)));
        }
        self.power()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        const START: &[&str] = &["number", "x", "pi", "function", "(", "-"];
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')', ")")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "pi" => Ok(Expr::Pi),
                _ => {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        offset,
                        message: format!("unknown identifier `{name}`"),
                        expected: vec![
                            "x", "pi", "sin", "cos", "exp", "log", "abs", "sqrt", "sign", "powabs",
                        ],
                    })?;
                    self.expect('(', "(")?;
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Sym(',') {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(')', ")")?;
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            offset,
                            message: format!(
                                "`{}` takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                            expected: vec![")"],
                        });
                    }
                    Ok(Expr::Call(func, args))
                }
            },
            other => Err(ParseError {
                offset,
                message: format!("found {}", describe(&other)),
                expected: START.to_vec(),
            }),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parses `text` into an expression tree.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(
            format!("unexpected {}", describe(p.peek())),
            vec!["operator", "end of input"],
        ));
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(a) => -a.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Abs => a.abs(),
                    Func::Sqrt => a.sqrt(),
                    Func::Sign => {
                        if a == 0.0 {
                            0.0
                        } else {
                            a.signum()
                        }
                    }
                    Func::Powabs => dualgap::function::signed_pow(a, args[1].eval(x)),
                }
            }
        }
    }

    /// Evaluates and rejects non-finite results.
    pub fn eval_checked(&self, x: f64) -> Result<f64, EvalError> {
        let value = self.eval(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError {
                expr: self.to_string(),
                x,
                value,
            })
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::X => true,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(a) => a.depends_on_x(),
            Expr::Bin(_, a, b) => a.depends_on_x() || b.depends_on_x(),
            Expr::Call(_, args) => args.iter().any(Expr::depends_on_x),
        }
    }

    /// Constant value, if the expression does not depend on `x`.
    pub fn as_constant(&self) -> Option<f64> {
        (!self.depends_on_x()).then(|| self.eval(0.0))
    }

    /// Symbolic derivative with respect to `x`.
    pub fn derivative(&self) -> Result<Expr, DiffError> {
        use Expr::*;
        Ok(match self {
            Num(_) | Pi => Num(0.0),
            X => Num(1.0),
            Neg(a) => neg(a.derivative()?),
            Bin(op, a, b) => {
                let (da, db) = (a.derivative()?, b.derivative()?);
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                    BinOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), pow(b, Num(2.0))),
                    BinOp::Pow => {
                        if !b.depends_on_x() {
                            mul(mul(b.clone(), pow(a, sub(b, Num(1.0)))), da)
                        } else {
                            let log_a = Call(Func::Log, vec![a.clone()]);
                            mul(
                                pow(a.clone(), b.clone()),
                                add(mul(db, log_a), div(mul(b, da), a)),
                            )
                        }
                    }
                }
            }
            Call(f, args) => {
                let a = args[0].clone();
                let da = a.derivative()?;
                let outer = match f {
                    Func::Sin => Call(Func::Cos, vec![a]),
                    Func::Cos => neg(Call(Func::Sin, vec![a])),
                    Func::Exp => Call(Func::Exp, vec![a]),
                    Func::Log => div(Num(1.0), a),
                    Func::Abs => Call(Func::Sign, vec![a]),
                    Func::Sqrt => div(Num(0.5), Call(Func::Sqrt, vec![a])),
                    Func::Sign => Num(0.0),
                    Func::Powabs => {
                        let p = args[1].clone();
                        if p.depends_on_x() {
                            return Err(DiffError(self.to_string()));
                        }
                        // d/du |u|^(p-2) u = (p-1) |u|^(p-2)
                        mul(
                            sub(p.clone(), Num(1.0)),
                            pow(Call(Func::Abs, vec![a]), sub(p, Num(2.0))),
                        )
                    }
                };
                mul(outer, da)
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "-{:?}", -v)?
                } else {
                    write!(f, "{v:?}")?
                }
            }
            Expr::X => f.write_str("x")?,
            Expr::Pi => f.write_str("pi")?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, 3)?;
            }
            Expr::Bin(op, a, b) => {
                let (sym, l, r) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => (" * ", 2, 3),
                    BinOp::Div => (" / ", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                a.write_at(f, l)?;
                f.write_str(sym)?;
                b.write_at(f, r)?;
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.write_at(f, 0)?;
                }
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

// Smart constructors with light constant folding.

fn num(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => Expr::Num(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(0.0), _) => Expr::Num(0.0),
        (_, Some(1.0)) => a,
        _ => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match num(&b) {
        Some(1.0) => a,
        Some(0.0) => Expr::Num(1.0),
        _ => Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(s: &str, x: f64) -> f64 {
        parse_expr(s).unwrap().eval(x)
    }

    #[test]
    fn examples() {
        assert_eq!(
            parse_expr("1+x").unwrap(),
            Expr::Bin(BinOp::Add, Box::new(Expr::Num(1.0)), Box::new(Expr::X))
        );
        assert_eq!(ev("1+x", 0.5), 1.5);
        assert!((ev("sin(2*pi*x)", 0.25) - 1.0).abs() < 1e-15);
        let want = 0.5f64.powf(0.2) * -0.5;
        assert!((ev("abs(x)^0.2 * x", -0.5) - want).abs() < 1e-15);
        assert!((want + 0.4353).abs() < 1e-4);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("8/4/2", 0.0), 1.0);
        assert_eq!(ev("1-2-3", 0.0), -4.0);
        assert_eq!(ev("2*3+4*5", 0.0), 26.0);
        assert_eq!(ev("-x*3", 2.0), -6.0);
        assert_eq!(ev("1.5e1 + 2E-1", 0.0), 15.2);
        assert_eq!(ev("powabs(x, 1.5)", -4.0), -2.0);
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_expr("1 + foo(x)").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.message.contains("foo"));
        let e = parse_expr("sin(x").unwrap_err();
        assert_eq!(e.offset, 5);
        assert_eq!(e.expected, vec![")"]);
        let e = parse_expr("2 * ").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(parse_expr("x $ 2").is_err());
        assert!(parse_expr("x 2").is_err());
        assert!(parse_expr("powabs(x)").is_err());
        assert!(parse_expr("").is_err());
    }

    #[test]
    fn eval_checked_reports_location() {
        let e = parse_expr("log(x)").unwrap();
        let err = e.eval_checked(0.0).unwrap_err();
        assert_eq!(err.x, 0.0);
        assert!(e.eval_checked(1.0).is_ok());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cases = [
            "sin(2*pi*x)",
            "x^3 - 2*x",
            "exp(-x) * cos(3*x)",
            "sqrt(1 + x^2)",
            "log(2 + x) / (1 + x)",
            "x^x",
            "abs(x - 0.3)^1.5",
            "powabs(sin(x) + 2, 1.2)",
            "2^x",
        ];
        for src in cases {
            let e = parse_expr(src).unwrap();
            let d = e.derivative().unwrap();
            for x in [0.4, 0.7, 1.3] {
                let h = 1e-6;
                let fd = (e.eval(x + h) - e.eval(x - h)) / (2.0 * h);
                assert!(
                    (fd - d.eval(x)).abs() < 1e-6 * fd.abs().max(1.0),
                    "{src} at {x}: {} vs {fd}",
                    d.eval(x)
                );
            }
        }
        assert!(parse_expr("powabs(x, x)").unwrap().derivative().is_err());
    }

    #[test]
    fn printed_derivative_reparses() {
        let d = parse_expr("sin(4*pi*x)")
            .unwrap()
            .derivative()
            .unwrap()
            .derivative()
            .unwrap();
        let again = parse_expr(&d.to_string()).unwrap();
        assert_eq!(again.eval(0.1), d.eval(0.1));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::X),
            Just(Expr::Pi),
        ];
        leaf.prop_recursive(5, 40, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expr::Call(Func::Sin, vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Powabs, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let text = e.to_string();
            let back = parse_expr(&text).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
