//! Small arithmetic expression language for coefficient fields.
//!
//! Every coefficient of a symbol (drift, diffusion, jump intensity, stable
//! scale) is a scalar field over time `s` and space coordinates `x1..xd`,
//! written in a tiny expression grammar:
//!
//! ```text
//! expr   := add
//! add    := mul (('+' | '-') mul)*          left associative
//! mul    := unary (('*' | '/') unary)*      left associative
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?               right associative, binds above unary '-'
//! atom   := number | 'pi' | 's' | 'x<k>' | fn '(' args ')' | '(' expr ')'
//! ```
//!
//! Supported functions: `sin cos exp tanh abs sqrt min max step`, with
//! `step(u) = 1` for `u >= 0` and `0` otherwise (right-continuous, so
//! `step(0) = 1`). Piecewise coefficients are written through `step`;
//! there is no dedicated piecewise syntax.

use std::fmt;

use thiserror::Error;

/// Parse failure with 1-based character offset into the source text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("`{name}` takes {expected} argument(s), got {got} (offset {offset})")]
    WrongArity {
        name: String,
        expected: usize,
        got: usize,
        offset: usize,
    },
    #[error("variable `{name}` out of range at offset {offset}: valid variables are s, x1..x{dimension}")]
    VariableOutOfRange {
        name: String,
        dimension: usize,
        offset: usize,
    },
    #[error("empty expression")]
    Empty,
    #[error("expression nested too deeply at offset {offset}")]
    TooDeep { offset: usize },
}

/// Evaluation failure. Evaluation is total on finite inputs apart from
/// the domain errors below.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("sqrt of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("{base}^{exponent}: negative base with non-integer exponent")]
    PowDomain { base: f64, exponent: f64 },
    #[error("result is not finite")]
    NonFinite,
    #[error("point has dimension {got}, expression expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Evaluation failure during [`FieldExpr::bounds`], with the sample point attached.
#[derive(Debug, Clone, Error)]
#[error("field evaluation failed at s={s}, x={x:?}: {source}")]
pub struct BoundsError {
    pub s: f64,
    pub x: Vec<f64>,
    #[source]
    pub source: EvalError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Abs,
    Sqrt,
    Min,
    Max,
    Step,
}

impl Func {
    fn by_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            "step" => Func::Step,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
            Func::Step => "step",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Time,
    // 0-based coordinate index; surface syntax is 1-based (x1..xd)
    Coord(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed, immutable coefficient field over `(s, x1..xd)`.
///
/// Evaluation is pure and side-effect free; values may be shared freely
/// across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpr {
    root: Node,
    dimension: usize,
    source: String,
    uses_s: bool,
    uses_x: bool,
}

impl FieldExpr {
    /// Parse `text` as a field over `s, x1..x{dimension}`.
    pub fn parse(text: &str, dimension: usize) -> Result<FieldExpr, ParseError> {
        assert!(dimension >= 1, "dimension must be >= 1");
        let tokens = lex(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            dimension,
            depth: 0,
        };
        let root = parser.expr()?;
        parser.expect_eof()?;
        let mut uses_s = false;
        let mut uses_x = false;
        scan_vars(&root, &mut uses_s, &mut uses_x);
        Ok(FieldExpr {
            root,
            dimension,
            source: text.to_owned(),
            uses_s,
            uses_x,
        })
    }

    /// Evaluate at time `s` and point `x` (length must equal the dimension).
    pub fn eval(&self, s: f64, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.dimension {
            return Err(EvalError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        let v = eval_node(&self.root, s, x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Estimated (min, max) of the field over the box `s_range x x_ranges`.
    ///
    /// Samples a deterministic Halton sequence of `nsamples` points plus all
    /// box corners. This is a smoke estimate, not a certified enclosure.
    pub fn bounds(
        &self,
        s_range: (f64, f64),
        x_ranges: &[(f64, f64)],
        nsamples: usize,
    ) -> Result<(f64, f64), BoundsError> {
        assert!(nsamples >= 2, "nsamples must be >= 2");
        assert_eq!(x_ranges.len(), self.dimension, "x_ranges length mismatch");
        let axes: Vec<(f64, f64)> = std::iter::once(s_range)
            .chain(x_ranges.iter().copied())
            .collect();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut x = vec![0.0; self.dimension];
        let probe = |s: f64, x: &[f64], lo: &mut f64, hi: &mut f64| -> Result<(), BoundsError> {
            let v = self.eval(s, x).map_err(|source| BoundsError {
                s,
                x: x.to_vec(),
                source,
            })?;
            *lo = lo.min(v);
            *hi = hi.max(v);
            Ok(())
        };
        // corners first so degenerate boxes still see the exact endpoints
        for mask in 0..(1usize << axes.len()) {
            let s = pick(axes[0], mask & 1 != 0);
            for (i, r) in axes[1..].iter().enumerate() {
                x[i] = pick(*r, mask & (1 << (i + 1)) != 0);
            }
            probe(s, &x, &mut lo, &mut hi)?;
        }
        for k in 1..=nsamples {
            let s = lerp(axes[0], halton(k, PRIMES[0]));
            for (i, r) in axes[1..].iter().enumerate() {
                x[i] = lerp(*r, halton(k, PRIMES[i + 1]));
            }
            probe(s, &x, &mut lo, &mut hi)?;
        }
        Ok((lo, hi))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Original source text.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn depends_on_s(&self) -> bool {
        self.uses_s
    }

    pub fn depends_on_x(&self) -> bool {
        self.uses_x
    }

    /// `Some(value)` if the expression has no free variables and evaluates
    /// without error; used to detect structurally constant coefficients.
    pub fn constant_value(&self) -> Option<f64> {
        if self.uses_s || self.uses_x {
            return None;
        }
        self.eval(0.0, &vec![0.0; self.dimension]).ok()
    }
}

impl fmt::Display for FieldExpr {
    /// Canonical fully parenthesized form; parsing it back yields an
    /// expression tree that evaluates identically at every point.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root)
    }
}

fn pick(range: (f64, f64), upper: bool) -> f64 {
    if upper {
        range.1
    } else {
        range.0
    }
}

fn lerp(range: (f64, f64), t: f64) -> f64 {
    range.0 + (range.1 - range.0) * t
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical-inverse (van der Corput) value of `index` in the given base.
fn halton(index: usize, base: usize) -> f64 {
    let mut n = index;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    out
}

fn scan_vars(node: &Node, uses_s: &mut bool, uses_x: &mut bool) {
    match node {
        Node::Num(_) => {}
        Node::Time => *uses_s = true,
        Node::Coord(_) => *uses_x = true,
        Node::Neg(e) => scan_vars(e, uses_s, uses_x),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            scan_vars(a, uses_s, uses_x);
            scan_vars(b, uses_s, uses_x);
        }
        Node::Call(_, args) => {
            for a in args {
                scan_vars(a, uses_s, uses_x);
            }
        }
    }
}

fn eval_node(node: &Node, s: f64, x: &[f64]) -> Result<f64, EvalError> {
    Ok(match node {
        Node::Num(v) => *v,
        Node::Time => s,
        Node::Coord(i) => x[*i],
        Node::Neg(e) => -eval_node(e, s, x)?,
        Node::Add(a, b) => eval_node(a, s, x)? + eval_node(b, s, x)?,
        Node::Sub(a, b) => eval_node(a, s, x)? - eval_node(b, s, x)?,
        Node::Mul(a, b) => eval_node(a, s, x)? * eval_node(b, s, x)?,
        Node::Div(a, b) => {
            let num = eval_node(a, s, x)?;
            let den = eval_node(b, s, x)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            num / den
        }
        Node::Pow(a, b) => {
            let base = eval_node(a, s, x)?;
            let exponent = eval_node(b, s, x)?;
            if base < 0.0 && exponent.fract() != 0.0 {
                return Err(EvalError::PowDomain { base, exponent });
            }
            base.powf(exponent)
        }
        Node::Call(func, args) => {
            let a0 = eval_node(&args[0], s, x)?;
            match func {
                Func::Sin => a0.sin(),
                Func::Cos => a0.cos(),
                Func::Exp => a0.exp(),
                Func::Tanh => a0.tanh(),
                Func::Abs => a0.abs(),
                Func::Sqrt => {
                    if a0 < 0.0 {
                        return Err(EvalError::SqrtOfNegative(a0));
                    }
                    a0.sqrt()
                }
                Func::Step => {
                    if a0 >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Func::Min => a0.min(eval_node(&args[1], s, x)?),
                Func::Max => a0.max(eval_node(&args[1], s, x)?),
            }
        }
    })
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node) -> fmt::Result {
    match node {
        Node::Num(v) => {
            if *v < 0.0 {
                // cannot arise from parsing, but keep Display total
                write!(f, "({v})")
            } else {
                write!(f, "{v}")
            }
        }
        Node::Time => write!(f, "s"),
        Node::Coord(i) => write!(f, "x{}", i + 1),
        Node::Neg(e) => {
            write!(f, "(-")?;
            write_node(f, e)?;
            write!(f, ")")
        }
        Node::Add(a, b) => write_binary(f, a, " + ", b),
        Node::Sub(a, b) => write_binary(f, a, " - ", b),
        Node::Mul(a, b) => write_binary(f, a, " * ", b),
        Node::Div(a, b) => write_binary(f, a, " / ", b),
        Node::Pow(a, b) => write_binary(f, a, " ^ ", b),
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_node(f, a)?;
            }
            write!(f, ")")
        }
    }
}

fn write_binary(f: &mut fmt::Formatter<'_>, a: &Node, op: &str, b: &Node) -> fmt::Result {
    write!(f, "(")?;
    write_node(f, a)?;
    write!(f, "{op}")?;
    write_node(f, b)?;
    write!(f, ")")
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(v) => format!("number `{v}`"),
            TokKind::Ident(n) => format!("identifier `{n}`"),
            TokKind::Plus => "`+`".into(),
            TokKind::Minus => "`-`".into(),
            TokKind::Star => "`*`".into(),
            TokKind::Slash => "`/`".into(),
            TokKind::Caret => "`^`".into(),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::Comma => "`,`".into(),
            TokKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    // 1-based character offset of the token start
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    if chars.iter().all(|c| c.is_whitespace()) {
        return Err(ParseError::Empty);
    }
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let offset = i + 1;
        match c {
            c if c.is_whitespace() => {
                i += 1;
            }
            '+' => {
                tokens.push(Token { kind: TokKind::Plus, offset });
                i += 1;
            }
            '-' => {
                tokens.push(Token { kind: TokKind::Minus, offset });
                i += 1;
            }
            '*' => {
                tokens.push(Token { kind: TokKind::Star, offset });
                i += 1;
            }
            '/' => {
                tokens.push(Token { kind: TokKind::Slash, offset });
                i += 1;
            }
            '^' => {
                tokens.push(Token { kind: TokKind::Caret, offset });
                i += 1;
            }
            '(' => {
                tokens.push(Token { kind: TokKind::LParen, offset });
                i += 1;
            }
            ')' => {
                tokens.push(Token { kind: TokKind::RParen, offset });
                i += 1;
            }
            ',' => {
                tokens.push(Token { kind: TokKind::Comma, offset });
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
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
                    } else {
                        return Err(ParseError::Syntax {
                            offset: j + 1,
                            expected: "digit in exponent".into(),
                            found: found_at(&chars, j),
                        });
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                let value: f64 = lit.parse().expect("lexed numeric literal");
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        offset: start + 1,
                        expected: "numeric literal within f64 range".into(),
                        found: format!("`{lit}`"),
                    });
                }
                tokens.push(Token {
                    kind: TokKind::Num(value),
                    offset: start + 1,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                tokens.push(Token {
                    kind: TokKind::Ident(name),
                    offset: start + 1,
                });
            }
            other => {
                return Err(ParseError::Syntax {
                    offset,
                    expected: "a number, variable, function call, operator, or parenthesis".into(),
                    found: format!("`{other}`"),
                });
            }
        }
    }
    tokens.push(Token {
        kind: TokKind::Eof,
        offset: chars.len() + 1,
    });
    Ok(tokens)
}

fn found_at(chars: &[char], idx: usize) -> String {
    match chars.get(idx) {
        Some(c) => format!("`{c}`"),
        None => "end of input".into(),
    }
}

const MAX_DEPTH: usize = 256;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    dimension: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(ParseError::TooDeep {
                offset: self.peek().offset,
            })
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let mut lhs = self.mul()?;
        loop {
            match self.peek().kind {
                TokKind::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.mul()?));
                }
                TokKind::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.mul()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn mul(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                TokKind::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                TokKind::Slash => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let node = if matches!(self.peek().kind, TokKind::Minus) {
            self.bump();
            Node::Neg(Box::new(self.unary()?))
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(node)
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek().kind, TokKind::Caret) {
            self.bump();
            // right associative; exponent may carry a unary minus (2^-1)
            let exponent = self.unary()?;
            Ok(Node::Pow(Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let tok = self.bump();
        match tok.kind {
            TokKind::Num(v) => Ok(Node::Num(v)),
            TokKind::LParen => {
                self.enter()?;
                let inner = self.expr()?;
                self.expect(TokKind::RParen, "`)`")?;
                self.depth -= 1;
                Ok(inner)
            }
            TokKind::Ident(name) => self.ident(name, tok.offset),
            other => Err(ParseError::Syntax {
                offset: tok.offset,
                expected: "a number, variable, function call, `-`, or `(`".into(),
                found: other.describe(),
            }),
        }
    }

    fn ident(&mut self, name: String, offset: usize) -> Result<Node, ParseError> {
        if matches!(self.peek().kind, TokKind::LParen) {
            let func = Func::by_name(&name).ok_or_else(|| ParseError::UnknownFunction {
                name: name.clone(),
                offset,
            })?;
            self.bump(); // (
            let mut args = vec![self.expr()?];
            while matches!(self.peek().kind, TokKind::Comma) {
                self.bump();
                args.push(self.expr()?);
            }
            self.expect(TokKind::RParen, "`)`")?;
            if args.len() != func.arity() {
                return Err(ParseError::WrongArity {
                    name,
                    expected: func.arity(),
                    got: args.len(),
                    offset,
                });
            }
            return Ok(Node::Call(func, args));
        }
        match name.as_str() {
            "s" => Ok(Node::Time),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            _ => {
                if let Some(rest) = name.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                        let index: usize =
                            rest.parse().map_err(|_| ParseError::VariableOutOfRange {
                                name: name.clone(),
                                dimension: self.dimension,
                                offset,
                            })?;
                        if index == 0 || index > self.dimension {
                            return Err(ParseError::VariableOutOfRange {
                                name,
                                dimension: self.dimension,
                                offset,
                            });
                        }
                        return Ok(Node::Coord(index - 1));
                    }
                }
                if Func::by_name(&name).is_some() {
                    return Err(ParseError::Syntax {
                        offset: self.peek().offset,
                        expected: format!("`(` to open the argument list of `{name}`"),
                        found: self.peek().kind.describe(),
                    });
                }
                Err(ParseError::UnknownIdentifier { name, offset })
            }
        }
    }

    fn expect(&mut self, kind: TokKind, what: &str) -> Result<(), ParseError> {
        if self.peek().kind == kind {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                offset: self.peek().offset,
                expected: what.into(),
                found: self.peek().kind.describe(),
            })
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek().kind, TokKind::Eof) {
            Ok(())
        } else {
            Err(ParseError::Syntax {
                offset: self.peek().offset,
                expected: "an operator or end of input".into(),
                found: self.peek().kind.describe(),
            })
        }
    }
}
