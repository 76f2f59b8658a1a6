//! Runtime expression trees for user-supplied potential functions, plus
//! forward-mode dual numbers for their first partial derivatives.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = { "-" } power ;
//! power   = atom [ "^" integer ] ;
//! atom    = number | ident "(" expr ")" | ident | "(" expr ")" ;
//! ident   = "exp" | "log" | "sin" | "cos" | "sqrt" | variable ;
//! number  = decimal or rational literal, e.g. 2, 0.5, 1e-3 ;
//! ```
//!
//! The variable set is supplied by the caller (the potential layer uses
//! `X`, `Y` for family functions and `Am`, `Bm`, `M` for custom
//! potentials). Domain violations (log of a non-positive argument, square
//! root of a negative, division by zero) are reported as errors, never
//! returned as NaN.

use std::fmt;

use crate::error::Error;

/// Supported unary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

/// A parsed expression over a fixed variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprTree {
    vars: Vec<String>,
    root: Node,
}

/// First-order jet with up to three independent directions. The value and
/// each stored partial obey the product and chain rules exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d: [f64; 3],
}

impl Dual2 {
    pub fn constant(v: f64) -> Self {
        Self { v, d: [0.0; 3] }
    }

    /// Seed for the variable carrying derivative direction `dir`.
    pub fn seed(v: f64, dir: usize) -> Self {
        let mut d = [0.0; 3];
        d[dir] = 1.0;
        Self { v, d }
    }

    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]],
        }
    }

    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]],
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d: [
                self.d[0] * o.v + self.v * o.d[0],
                self.d[1] * o.v + self.v * o.d[1],
                self.d[2] * o.v + self.v * o.d[2],
            ],
        }
    }

    fn neg(self) -> Self {
        Self {
            v: -self.v,
            d: [-self.d[0], -self.d[1], -self.d[2]],
        }
    }

    fn chain(self, v: f64, dv: f64) -> Self {
        Self {
            v,
            d: [dv * self.d[0], dv * self.d[1], dv * self.d[2]],
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, Error> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                out.push((i, Token::Op(c)));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit() || bytes[i] == b'.')
                {
                    i += 1;
                }
                // exponent part of a float literal
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
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| Error::Syntax {
                    position: start,
                    message: format!("bad number literal `{s}`"),
                })?;
                out.push((start, Token::Num(v)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Token::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(Error::Syntax {
                    position: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect_op(&mut self, c: char) -> Result<(), Error> {
        match self.bump() {
            Some(Token::Op(x)) if x == c => Ok(()),
            _ => Err(Error::Syntax {
                position: self.here(),
                message: format!("expected `{c}`"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Node, Error> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek() {
            let c = *c;
            self.bump();
            let rhs = self.term()?;
            lhs = if c == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, Error> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek() {
            let c = *c;
            self.bump();
            let rhs = self.unary()?;
            lhs = if c == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, Error> {
        if let Some(Token::Op('-')) = self.peek() {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, Error> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.bump();
            let mut sign = 1i32;
            if let Some(Token::Op('-')) = self.peek() {
                self.bump();
                sign = -1;
            }
            let pos = self.here();
            match self.bump() {
                Some(Token::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                    return Ok(Node::Pow(Box::new(base), sign * v as i32));
                }
                _ => {
                    return Err(Error::Syntax {
                        position: pos,
                        message: "exponent must be an integer literal".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, Error> {
        let pos = self.here();
        match self.bump() {
            Some(Token::Num(v)) => Ok(Node::Const(v)),
            Some(Token::Op('(')) => {
                let inner = self.expr()?;
                self.expect_op(')')?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect_op('(')?;
                    let arg = self.expr()?;
                    self.expect_op(')')?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => Err(Error::UnknownVariable(name)),
                }
            }
            _ => Err(Error::Syntax {
                position: pos,
                message: "expected a number, variable, function or `(`".into(),
            }),
        }
    }
}

/// Parse an expression over the two-variable family alphabet (X, Y).
pub fn parse_expr(text: &str) -> Result<ExprTree, Error> {
    parse_expr_with_vars(text, &["X", "Y"])
}

/// Parse an expression over a caller-chosen variable alphabet.
pub fn parse_expr_with_vars(text: &str, vars: &[&str]) -> Result<ExprTree, Error> {
    if vars.len() > 3 {
        return Err(Error::InvalidParameter(
            "at most three expression variables are supported".into(),
        ));
    }
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        vars,
        end: text.len(),
    };
    let root = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Syntax {
            position: p.here(),
            message: "trailing input".into(),
        });
    }
    Ok(ExprTree {
        vars: vars.iter().map(|s| s.to_string()).collect(),
        root,
    })
}

fn eval_node(node: &Node, vals: &[Dual2]) -> Result<Dual2, Error> {
    let domain = |ctx: &str, msg: String| Error::Domain {
        context: ctx.to_string(),
        message: msg,
    };
    Ok(match node {
        Node::Const(v) => Dual2::constant(*v),
        Node::Var(i) => vals[*i],
        Node::Add(a, b) => eval_node(a, vals)?.add(eval_node(b, vals)?),
        Node::Sub(a, b) => eval_node(a, vals)?.sub(eval_node(b, vals)?),
        Node::Mul(a, b) => eval_node(a, vals)?.mul(eval_node(b, vals)?),
        Node::Div(a, b) => {
            let num = eval_node(a, vals)?;
            let den = eval_node(b, vals)?;
            if den.v == 0.0 {
                return Err(domain("/", "division by zero".into()));
            }
            let inv = den.chain(1.0 / den.v, -1.0 / (den.v * den.v));
            num.mul(inv)
        }
        Node::Neg(a) => eval_node(a, vals)?.neg(),
        Node::Pow(a, n) => {
            let base = eval_node(a, vals)?;
            if *n < 0 && base.v == 0.0 {
                return Err(domain("^", "zero raised to a negative power".into()));
            }
            let dv = if *n == 0 {
                0.0
            } else {
                *n as f64 * base.v.powi(*n - 1)
            };
            base.chain(base.v.powi(*n), dv)
        }
        Node::Call(f, a) => {
            let x = eval_node(a, vals)?;
            match f {
                Func::Exp => x.chain(x.v.exp(), x.v.exp()),
                Func::Log => {
                    if x.v <= 0.0 {
                        return Err(domain("log", format!("argument {} is not positive", x.v)));
                    }
                    x.chain(x.v.ln(), 1.0 / x.v)
                }
                Func::Sin => x.chain(x.v.sin(), x.v.cos()),
                Func::Cos => x.chain(x.v.cos(), -x.v.sin()),
                Func::Sqrt => {
                    if x.v < 0.0 {
                        return Err(domain("sqrt", format!("argument {} is negative", x.v)));
                    }
                    if x.v == 0.0 && x.d != [0.0; 3] {
                        return Err(domain(
                            "sqrt",
                            "derivative singular at zero".into(),
                        ));
                    }
                    let r = x.v.sqrt();
                    x.chain(r, if r == 0.0 { 0.0 } else { 0.5 / r })
                }
            }
        }
    })
}

impl ExprTree {
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Evaluate with dual-number propagation; `vals[i]` is the jet assigned
    /// to variable i.
    pub fn eval_dual(&self, vals: &[Dual2]) -> Result<Dual2, Error> {
        if vals.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} variables",
                vals.len(),
                self.vars.len()
            )));
        }
        eval_node(&self.root, vals)
    }

    /// Plain value evaluation.
    pub fn eval(&self, vals: &[f64]) -> Result<f64, Error> {
        let jets: Vec<Dual2> = vals.iter().map(|&v| Dual2::constant(v)).collect();
        Ok(self.eval_dual(&jets)?.v)
    }

    /// Value and gradient with each variable seeded along its own direction.
    pub fn eval_grad(&self, vals: &[f64]) -> Result<(f64, Vec<f64>), Error> {
        let jets: Vec<Dual2> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual2::seed(v, i))
            .collect();
        let out = self.eval_dual(&jets)?;
        Ok((out.v, out.d[..self.vars.len()].to_vec()))
    }

    /// Canonical textual form; reparsing it reproduces the same tree.
    pub fn unparse(&self) -> String {
        let mut s = String::new();
        unparse_node(&self.root, &self.vars, 0, &mut s);
        s
    }
}

// prec: 0 additive context, 1 multiplicative, 2 unary/power operand
fn unparse_node(node: &Node, vars: &[String], prec: u8, out: &mut String) {
    use std::fmt::Write;
    let paren = |level: u8| prec > level;
    match node {
        Node::Const(v) => {
            let _ = write!(out, "{v}");
        }
        Node::Var(i) => out.push_str(&vars[*i]),
        Node::Add(a, b) => {
            if paren(0) {
                out.push('(');
            }
            unparse_node(a, vars, 0, out);
            out.push_str(" + ");
            unparse_node(b, vars, 1, out);
            if paren(0) {
                out.push(')');
            }
        }
        Node::Sub(a, b) => {
            if paren(0) {
                out.push('(');
            }
            unparse_node(a, vars, 0, out);
            out.push_str(" - ");
            unparse_node(b, vars, 1, out);
            if paren(0) {
                out.push(')');
            }
        }
        Node::Mul(a, b) => {
            if paren(1) {
                out.push('(');
            }
            unparse_node(a, vars, 1, out);
            out.push('*');
            unparse_node(b, vars, 2, out);
            if paren(1) {
                out.push(')');
            }
        }
        Node::Div(a, b) => {
            if paren(1) {
                out.push('(');
            }
            unparse_node(a, vars, 1, out);
            out.push('/');
            unparse_node(b, vars, 2, out);
            if paren(1) {
                out.push(')');
            }
        }
        Node::Neg(a) => {
            if paren(1) {
                out.push('(');
            }
            out.push('-');
            unparse_node(a, vars, 2, out);
            if paren(1) {
                out.push(')');
            }
        }
        Node::Pow(a, n) => {
            unparse_node(a, vars, 2, out);
            let _ = write!(out, "^{n}");
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            unparse_node(a, vars, 0, out);
            out.push(')');
        }
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.unparse())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_product_of_variables() {
        let t = parse_expr("X*Y").unwrap();
        let (v, g) = t.eval_grad(&[3.0, 5.0]).unwrap();
        assert_eq!(v, 15.0);
        assert_eq!(g, vec![5.0, 3.0]);
    }

    #[test]
    fn parse_cubic() {
        let t = parse_expr("Y^3 - 2*Y").unwrap();
        let (v, g) = t.eval_grad(&[0.0, 2.0]).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(g, vec![0.0, 10.0]);
    }

    #[test]
    fn unknown_identifier_rejected() {
        match parse_expr("Z+1") {
            Err(Error::UnknownVariable(name)) => assert_eq!(name, "Z"),
            other => panic!("expected unknown variable, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_expr("X + * Y") {
            Err(Error::Syntax { position, .. }) => assert!(position >= 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn log_domain_violation_reported() {
        let t = parse_expr("log(X)").unwrap();
        assert!(matches!(t.eval(&[-1.0, 0.0]), Err(Error::Domain { .. })));
        assert!(matches!(t.eval(&[0.0, 0.0]), Err(Error::Domain { .. })));
        assert!((t.eval(&[std::f64::consts::E, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_reported() {
        let t = parse_expr("1/(X - 1)").unwrap();
        assert!(matches!(t.eval(&[1.0, 0.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn dual_matches_finite_differences() {
        let exprs = [
            "exp(X)*sin(Y) + X^3/(1 + Y^2)",
            "sqrt(X^2 + 1) - cos(X*Y)",
            "log(2 + X) + Y^-2",
        ];
        let pts = [(0.3, 0.7), (-0.5, 1.2), (1.1, -0.4)];
        let h = 1e-6;
        for src in exprs {
            let t = parse_expr(src).unwrap();
            for (x, y) in pts {
                let (_, g) = t.eval_grad(&[x, y]).unwrap();
                let fx = (t.eval(&[x + h, y]).unwrap() - t.eval(&[x - h, y]).unwrap()) / (2.0 * h);
                let fy = (t.eval(&[x, y + h]).unwrap() - t.eval(&[x, y - h]).unwrap()) / (2.0 * h);
                assert!((g[0] - fx).abs() <= 1e-5 * (1.0 + fx.abs()), "{src} d/dX");
                assert!((g[1] - fy).abs() <= 1e-5 * (1.0 + fy.abs()), "{src} d/dY");
            }
        }
    }

    #[test]
    fn unparse_round_trips() {
        let sources = [
            "X*Y",
            "Y^3 - 2*Y",
            "-(X + Y)^2/(1 - X*Y)",
            "exp(log(X + 2))*sqrt(Y^2 + 1)",
            "X - (Y - 1) - 2",
        ];
        for src in sources {
            let t = parse_expr(src).unwrap();
            let back = parse_expr(&t.unparse()).unwrap();
            assert_eq!(t, back, "round trip of `{src}` via `{}`", t.unparse());
        }
    }

    #[test]
    fn custom_alphabet() {
        let t = parse_expr_with_vars("Am*Bm - M^2", &["Am", "Bm", "M"]).unwrap();
        let (v, g) = t.eval_grad(&[2.0, 3.0, 4.0]).unwrap();
        assert_eq!(v, -10.0);
        assert_eq!(g, vec![3.0, 2.0, -8.0]);
    }
}
