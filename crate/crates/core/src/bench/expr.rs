//! Objective expressions: an infix parser, a JSON tree form, evaluation and
//! forward-mode gradients.

use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
}

fn parse_err(context: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        context: context.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str, ctx: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| parse_err(ctx, format!("bad number '{text}' at column {}", start + 1)))?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(parse_err(ctx, format!("unexpected character '{c}' at column {}", i + 1)));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
    ctx: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(0, |t| t.1) + 1
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(parse_err(self.ctx, format!("expected '{c}' at column {}", self.column())))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // Unary minus binds looser than '^', so -x^2 = -(x^2).
    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(args)
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.column();
        match self.toks.get(self.pos).map(|t| t.0.clone()) {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(i) = variable_index(&name) {
                    if i == 0 || i > self.n {
                        return Err(parse_err(
                            self.ctx,
                            format!("variable '{name}' at column {col} is outside x1..x{}", self.n),
                        ));
                    }
                    return Ok(Expr::Var(i - 1));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
                    "e" if self.peek() != Some(&Tok::Op('(')) => return Ok(Expr::Const(std::f64::consts::E)),
                    _ => {}
                }
                let args = self.args()?;
                build_call(&name, args, self.ctx)
            }
            _ => Err(parse_err(self.ctx, format!("unexpected token at column {col}"))),
        }
    }
}

/// `x1`, `x_1` -> Some(1).
fn variable_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('x')?;
    let rest = rest.strip_prefix('_').unwrap_or(rest);
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn build_call(name: &str, mut args: Vec<Expr>, ctx: &str) -> Result<Expr> {
    let arity = |k: usize, args: &Vec<Expr>| -> Result<()> {
        if args.len() == k {
            Ok(())
        } else {
            Err(parse_err(ctx, format!("{name} takes {k} argument(s), got {}", args.len())))
        }
    };
    if let Some(f) = Func::from_name(name) {
        arity(1, &args)?;
        return Ok(Expr::Call(f, Box::new(args.remove(0))));
    }
    match name {
        "pow" => {
            arity(2, &args)?;
            let e = args.pop().expect("two args");
            let b = args.pop().expect("two args");
            Ok(Expr::Pow(Box::new(b), Box::new(e)))
        }
        "min" => Ok(Expr::Min(args)),
        "max" => Ok(Expr::Max(args)),
        _ => Err(parse_err(ctx, format!("unknown function '{name}'"))),
    }
}

impl Expr {
    /// Parses infix text over variables `x1..xn` (or `x_1..x_n`).
    pub fn parse(src: &str, n: usize, ctx: &str) -> Result<Expr> {
        let toks = tokenize(src, ctx)?;
        let mut p = Parser { toks, pos: 0, n, ctx };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(parse_err(ctx, format!("trailing input at column {}", p.column())));
        }
        Ok(e)
    }

    /// Parses either an infix string or a JSON tree such as
    /// `{"op": "+", "args": [{"var": 1}, 2.0]}`.
    pub fn from_json(v: &Value, n: usize, ctx: &str) -> Result<Expr> {
        match v {
            Value::String(s) => Expr::parse(s, n, ctx),
            Value::Number(x) => Ok(Expr::Const(x.as_f64().ok_or_else(|| parse_err(ctx, "bad number"))?)),
            Value::Object(map) => {
                if let Some(i) = map.get("var") {
                    let i = i
                        .as_u64()
                        .ok_or_else(|| parse_err(ctx, "'var' must be a positive integer"))? as usize;
                    if i == 0 || i > n {
                        return Err(parse_err(ctx, format!("variable {i} is outside 1..{n}")));
                    }
                    return Ok(Expr::Var(i - 1));
                }
                if let Some(c) = map.get("const") {
                    return Ok(Expr::Const(
                        c.as_f64().ok_or_else(|| parse_err(ctx, "'const' must be a number"))?,
                    ));
                }
                let op = map
                    .get("op")
                    .and_then(Value::as_str)
                    .ok_or_else(|| parse_err(ctx, "node needs 'var', 'const' or 'op'"))?;
                let args: Vec<Expr> = map
                    .get("args")
                    .and_then(Value::as_array)
                    .ok_or_else(|| parse_err(ctx, format!("operator '{op}' needs an 'args' array")))?
                    .iter()
                    .map(|a| Expr::from_json(a, n, ctx))
                    .collect::<Result<_>>()?;
                let binary = |args: Vec<Expr>, f: fn(Box<Expr>, Box<Expr>) -> Expr| -> Result<Expr> {
                    if args.len() < 2 {
                        return Err(parse_err(ctx, format!("operator '{op}' needs at least two arguments")));
                    }
                    let mut it = args.into_iter();
                    let first = it.next().expect("nonempty");
                    Ok(it.fold(first, |acc, e| f(Box::new(acc), Box::new(e))))
                };
                match op {
                    "+" => binary(args, Expr::Add),
                    "*" => binary(args, Expr::Mul),
                    "-" if args.len() == 1 => Ok(Expr::Neg(Box::new(args.into_iter().next().expect("one")))),
                    "-" => binary(args, Expr::Sub),
                    "/" => binary(args, Expr::Div),
                    "^" => build_call("pow", args, ctx),
                    other => build_call(other, args, ctx),
                }
            }
            _ => Err(parse_err(ctx, "objective must be a string, number or object")),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => pow(a.eval(x), b.eval(x)),
            Expr::Call(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Abs => v.abs(),
                    Func::Sqrt => v.sqrt(),
                }
            }
            Expr::Min(args) => args.iter().map(|a| a.eval(x)).fold(f64::INFINITY, f64::min),
            Expr::Max(args) => args.iter().map(|a| a.eval(x)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Value and gradient by forward-mode differentiation.
    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let n = x.len();
        match self {
            Expr::Const(c) => (*c, vec![0.0; n]),
            Expr::Var(i) => {
                let mut g = vec![0.0; n];
                g[*i] = 1.0;
                (x[*i], g)
            }
            Expr::Neg(a) => {
                let (v, g) = a.eval_grad(x);
                (-v, g.iter().map(|d| -d).collect())
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let (u, gu) = a.eval_grad(x);
                let (v, gv) = b.eval_grad(x);
                let s = if matches!(self, Expr::Add(..)) { 1.0 } else { -1.0 };
                (u + s * v, gu.iter().zip(&gv).map(|(p, q)| p + s * q).collect())
            }
            Expr::Mul(a, b) => {
                let (u, gu) = a.eval_grad(x);
                let (v, gv) = b.eval_grad(x);
                (u * v, gu.iter().zip(&gv).map(|(p, q)| p * v + u * q).collect())
            }
            Expr::Div(a, b) => {
                let (u, gu) = a.eval_grad(x);
                let (v, gv) = b.eval_grad(x);
                (u / v, gu.iter().zip(&gv).map(|(p, q)| (p * v - u * q) / (v * v)).collect())
            }
            Expr::Pow(a, b) => {
                let (u, gu) = a.eval_grad(x);
                let val = pow(u, b.eval(x));
                if let Expr::Const(k) = **b {
                    let d = if k == 0.0 { 0.0 } else { k * pow(u, k - 1.0) };
                    return (val, gu.iter().map(|p| d * p).collect());
                }
                let (v, gv) = b.eval_grad(x);
                let g = gu
                    .iter()
                    .zip(&gv)
                    .map(|(p, q)| {
                        let from_base = if *p == 0.0 { 0.0 } else { v * pow(u, v - 1.0) * p };
                        let from_exp = if *q == 0.0 { 0.0 } else { val * u.ln() * q };
                        from_base + from_exp
                    })
                    .collect();
                (val, g)
            }
            Expr::Call(f, a) => {
                let (u, gu) = a.eval_grad(x);
                let (v, d) = match f {
                    Func::Exp => (u.exp(), u.exp()),
                    Func::Log => (u.ln(), 1.0 / u),
                    Func::Sin => (u.sin(), u.cos()),
                    Func::Cos => (u.cos(), -u.sin()),
                    Func::Abs => (u.abs(), if u > 0.0 { 1.0 } else if u < 0.0 { -1.0 } else { 0.0 }),
                    Func::Sqrt => (u.sqrt(), 0.5 / u.sqrt()),
                };
                (v, gu.iter().map(|p| d * p).collect())
            }
            Expr::Min(args) | Expr::Max(args) => {
                let is_min = matches!(self, Expr::Min(_));
                let mut best: Option<(f64, Vec<f64>)> = None;
                for a in args {
                    let (v, g) = a.eval_grad(x);
                    let better = match &best {
                        None => true,
                        Some((b, _)) => (is_min && v < *b) || (!is_min && v > *b),
                    };
                    if better {
                        best = Some((v, g));
                    }
                }
                best.unwrap_or((if is_min { f64::INFINITY } else { f64::NEG_INFINITY }, vec![0.0; n]))
            }
        }
    }
}

/// `powi` for small integral exponents (exact for squares and cubes of
/// negative bases), `powf` otherwise.
fn pow(b: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 64.0 {
        b.powi(e as i32)
    } else {
        b.powf(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> Expr {
        Expr::parse(s, n, "test").unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(p("-x1^2", 1).eval(&[3.0]), -9.0);
        assert_eq!(p("2^3^2", 0).eval(&[]), 512.0);
        assert_eq!(p("1 - 2 - 3", 0).eval(&[]), -4.0);
        assert_eq!(p("8 / 4 / 2", 0).eval(&[]), 1.0);
        assert_eq!(p("x_1 * x2 + 1e-1", 2).eval(&[2.0, 3.0]), 6.1);
        assert_eq!(p("max(x1, -x1, 0.5) + min(1, 2)", 1).eval(&[-2.0]), 3.0);
        assert_eq!(p("(x1 - 1)^3", 1).eval(&[-1.0]), -8.0);
    }

    #[test]
    fn errors_name_the_column() {
        let e = Expr::parse("x1 + * 2", 1, "obj").unwrap_err();
        assert!(e.to_string().contains("column 6"), "{e}");
        assert!(Expr::parse("x3", 2, "obj").is_err());
        assert!(Expr::parse("foo(x1)", 1, "obj").is_err());
        assert!(Expr::parse("sin(x1, x1)", 1, "obj").is_err());
        assert!(Expr::parse("(x1", 1, "obj").is_err());
        assert!(Expr::parse("x1 x1", 1, "obj").is_err());
    }

    #[test]
    fn json_tree() {
        let v: Value = serde_json::from_str(
            r#"{"op": "+", "args": [{"op": "pow", "args": [{"var": 1}, 2]}, {"op": "sin", "args": [{"var": 2}]}, {"const": 1}]}"#,
        )
        .unwrap();
        let e = Expr::from_json(&v, 2, "t").unwrap();
        assert!((e.eval(&[2.0, 0.0]) - 5.0).abs() < 1e-15);
        let v: Value = serde_json::from_str(r#"{"op": "+", "args": [{"var": 3}, 1]}"#).unwrap();
        assert!(Expr::from_json(&v, 2, "t").is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let e = p(
            "100*(x2 - x1^2)^2 + (1 - x1)^2 + exp(x1*x2)/3 - log(2 + x1^2) + sin(x1)*cos(x2) + abs(x2 - 3) + x1^x2 + sqrt(1 + x2^2)",
            2,
        );
        let x = [0.7, 1.3];
        let (v, g) = e.eval_grad(&x);
        assert_eq!(v, e.eval(&x));
        for i in 0..2 {
            let h = 1e-6;
            let mut a = x;
            let mut b = x;
            a[i] += h;
            b[i] -= h;
            let fd = (e.eval(&a) - e.eval(&b)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5 * fd.abs().max(1.0), "{i}: {fd} vs {}", g[i]);
        }
    }
}
