//! Closed-form expressions in a single real variable `x`.
//!
//! Every x-dependent coefficient in the crate (potentials, gauge functions,
//! mass profiles, ladder-operator coefficients) is carried as an [`Expr`]
//! tree, so first and second derivatives are exact rather than numerical.
//!
//! Grammar accepted by [`Expr::parse`]:
//!
//! ```text
//! expr   := term  { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := "-" factor | power
//! power  := atom [ "^" factor ]              (right-associative)
//! atom   := NUMBER | "x" | NAME "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` binds tighter than `*`/`/`, and tighter than a prefix minus, so
//! `-x^2/2` means `-(x^2)/2`. Exponents may carry their own sign: `x^-2`.
//! Recognized functions: `sin cos tan sinh cosh tanh exp log sqrt abs sgn`
//! (`log` is the natural logarithm; `sgn` is the sign function with
//! `sgn(0) = 0`, used as the derivative of `abs`).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Unary functions available in the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sgn,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sgn => "sgn",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sgn" => Func::Sgn,
            _ => return None,
        })
    }
}

/// Expression tree over one real variable.
///
/// Trees are immutable after construction and all operations on them are
/// pure, so values can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// What went wrong while evaluating an expression at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    /// Power with negative base and non-integer exponent, or `0^negative`.
    PowDomain,
    /// Overflow to infinity or an otherwise non-finite result.
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogNonPositive => "log of a non-positive argument",
            DomainKind::SqrtNegative => "sqrt of a negative argument",
            DomainKind::PowDomain => "power outside its real domain",
            DomainKind::NonFinite => "non-finite result",
        };
        f.write_str(s)
    }
}

/// Evaluation failure, tagged with the point where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{kind} at x = {x}")]
pub struct EvalError {
    pub kind: DomainKind,
    pub x: f64,
}

/// Parse failure with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {found:?} at byte {offset}")]
    UnexpectedChar { found: char, offset: usize },
    #[error("malformed number at byte {offset}")]
    BadNumber { offset: usize },
    #[error("unknown function {name:?} at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unknown symbol {name:?} at byte {offset} (only the variable `x` is allowed)")]
    UnknownSymbol { name: String, offset: usize },
    #[error("expected {expected} at byte {offset}")]
    Expected { expected: &'static str, offset: usize },
    #[error("unbalanced parenthesis at byte {offset}")]
    Unbalanced { offset: usize },
    #[error("trailing input at byte {offset}")]
    Trailing { offset: usize },
}

/// Differentiation failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    /// `u^v` is differentiated only for exponents free of `x`.
    #[error("cannot differentiate a power with an x-dependent exponent")]
    NonConstantExponent,
}

// Smart constructors. They fold constant subtrees and drop neutral elements
// so that derivative trees stay compact; no other rewriting is performed and
// expression equality is always decided by evaluation, not by structure.
impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (Expr::Const(c), b) if c == 0.0 => b,
            (a, Expr::Const(c)) if c == 0.0 => a,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, Expr::Const(c)) if c == 0.0 => a,
            (Expr::Const(c), b) if c == 0.0 => Expr::neg(b),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (Expr::Const(c), _) | (_, Expr::Const(c)) if c == 0.0 => Expr::Const(0.0),
            (Expr::Const(c), b) if c == 1.0 => b,
            (a, Expr::Const(c)) if c == 1.0 => a,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if y != 0.0 => Expr::Const(x / y),
            (a, Expr::Const(c)) if c == 1.0 => a,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => {
                let v = x.powf(y);
                if v.is_finite() {
                    Expr::Const(v)
                } else {
                    Expr::Pow(Box::new(Expr::Const(x)), Box::new(Expr::Const(y)))
                }
            }
            (a, Expr::Const(c)) if c == 1.0 => a,
            (_, Expr::Const(c)) if c == 0.0 => Expr::Const(1.0),
            (a, b) => Expr::Pow(Box::new(a), Box::new(b)),
        }
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        if let Expr::Const(c) = arg {
            if let Ok(v) = apply_func(f, c, c) {
                return Expr::Const(v);
            }
        }
        Expr::Call(f, Box::new(arg))
    }

    /// Whether the tree references the variable `x` anywhere.
    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.contains_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.contains_var() || b.contains_var(),
        }
    }
}

fn apply_func(f: Func, arg: f64, x: f64) -> Result<f64, EvalError> {
    let v = match f {
        Func::Sin => arg.sin(),
        Func::Cos => arg.cos(),
        Func::Tan => arg.tan(),
        Func::Sinh => arg.sinh(),
        Func::Cosh => arg.cosh(),
        Func::Tanh => arg.tanh(),
        Func::Exp => arg.exp(),
        Func::Log => {
            if arg <= 0.0 {
                return Err(EvalError { kind: DomainKind::LogNonPositive, x });
            }
            arg.ln()
        }
        Func::Sqrt => {
            if arg < 0.0 {
                return Err(EvalError { kind: DomainKind::SqrtNegative, x });
            }
            arg.sqrt()
        }
        Func::Abs => arg.abs(),
        Func::Sgn => {
            if arg > 0.0 {
                1.0
            } else if arg < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError { kind: DomainKind::NonFinite, x })
    }
}

impl Expr {
    /// Evaluate at a point. Domain violations surface as [`EvalError`] with
    /// the offending `x`; every successful evaluation is finite.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(EvalError { kind: DomainKind::DivisionByZero, x });
                }
                a.eval(x)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                let exp = b.eval(x)?;
                let v = base.powf(exp);
                if v.is_nan() && !base.is_nan() && !exp.is_nan() {
                    return Err(EvalError { kind: DomainKind::PowDomain, x });
                }
                v
            }
            Expr::Call(f, arg) => apply_func(*f, arg.eval(x)?, x)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError { kind: DomainKind::NonFinite, x })
        }
    }

    /// Exact symbolic derivative.
    ///
    /// `u^v` requires an exponent free of `x` (all coefficient formulas in
    /// this crate satisfy that), `abs` differentiates to `sgn(u) * u'` with
    /// `sgn(0) = 0`, and `sgn` itself differentiates to zero away from the
    /// origin, which is taken as its derivative everywhere by the same
    /// convention.
    pub fn differentiate(&self) -> Result<Expr, DiffError> {
        let d = match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Neg(e) => Expr::neg(e.differentiate()?),
            Expr::Add(a, b) => Expr::add(a.differentiate()?, b.differentiate()?),
            Expr::Sub(a, b) => Expr::sub(a.differentiate()?, b.differentiate()?),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.differentiate()?, (**b).clone()),
                Expr::mul((**a).clone(), b.differentiate()?),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.differentiate()?, (**b).clone()),
                    Expr::mul((**a).clone(), b.differentiate()?),
                ),
                Expr::pow((**b).clone(), Expr::Const(2.0)),
            ),
            Expr::Pow(a, b) => {
                if b.contains_var() {
                    return Err(DiffError::NonConstantExponent);
                }
                // d(u^c) = c * u^(c-1) * u'
                Expr::mul(
                    Expr::mul(
                        (**b).clone(),
                        Expr::pow((**a).clone(), Expr::sub((**b).clone(), Expr::Const(1.0))),
                    ),
                    a.differentiate()?,
                )
            }
            Expr::Call(f, u) => {
                let du = u.differentiate()?;
                let u = (**u).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, u)),
                    Func::Tan => Expr::div(
                        Expr::Const(1.0),
                        Expr::pow(Expr::call(Func::Cos, u), Expr::Const(2.0)),
                    ),
                    Func::Sinh => Expr::call(Func::Cosh, u),
                    Func::Cosh => Expr::call(Func::Sinh, u),
                    Func::Tanh => Expr::div(
                        Expr::Const(1.0),
                        Expr::pow(Expr::call(Func::Cosh, u), Expr::Const(2.0)),
                    ),
                    Func::Exp => Expr::call(Func::Exp, u),
                    Func::Log => Expr::div(Expr::Const(1.0), u),
                    Func::Sqrt => Expr::div(
                        Expr::Const(1.0),
                        Expr::mul(Expr::Const(2.0), Expr::call(Func::Sqrt, u)),
                    ),
                    Func::Abs => Expr::call(Func::Sgn, u),
                    Func::Sgn => Expr::Const(0.0),
                };
                Expr::mul(outer, du)
            }
        };
        Ok(d)
    }

    /// Parse an expression string. See the module docs for the grammar.
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        Parser::new(text)?.parse_all()
    }
}

/// Wronskian `W(u, v) = u' v - u v'` as an expression tree.
pub fn wronskian(u: &Expr, v: &Expr) -> Result<Expr, DiffError> {
    Ok(Expr::sub(
        Expr::mul(u.differentiate()?, v.clone()),
        Expr::mul(u.clone(), v.differentiate()?),
    ))
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::Const(c)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

// ---------------------------------------------------------------------------
// Lexer and recursive-descent parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        let bytes = text.as_bytes();
        let mut tokens = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '+' => {
                    tokens.push((Token::Plus, i));
                    i += 1;
                }
                '-' => {
                    tokens.push((Token::Minus, i));
                    i += 1;
                }
                '*' => {
                    tokens.push((Token::Star, i));
                    i += 1;
                }
                '/' => {
                    tokens.push((Token::Slash, i));
                    i += 1;
                }
                '^' => {
                    tokens.push((Token::Caret, i));
                    i += 1;
                }
                '(' => {
                    tokens.push((Token::LParen, i));
                    i += 1;
                }
                ')' => {
                    tokens.push((Token::RParen, i));
                    i += 1;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i] == b'.' {
                        i += 1;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
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
                    let v: f64 = text[start..i]
                        .parse()
                        .map_err(|_| ParseError::BadNumber { offset: start })?;
                    tokens.push((Token::Number(v), start));
                }
                'a'..='z' | 'A'..='Z' | '_' => {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    tokens.push((Token::Ident(text[start..i].to_string()), start));
                }
                _ => return Err(ParseError::UnexpectedChar { found: c, offset: i }),
            }
        }
        if tokens.is_empty() {
            return Err(ParseError::Empty);
        }
        Ok(Parser { tokens, pos: 0, end: text.len() })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn parse_all(mut self) -> Result<Expr, ParseError> {
        let e = self.parse_expr()?;
        if self.pos < self.tokens.len() {
            return Err(ParseError::Trailing { offset: self.offset() });
        }
        Ok(e)
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    lhs = Expr::add(lhs, self.parse_term()?);
                }
                Some(Token::Minus) => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.parse_term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.parse_factor()?);
                }
                Some(Token::Slash) => {
                    self.bump();
                    lhs = Expr::div(lhs, self.parse_factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        if let Some(Token::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::neg(self.parse_factor()?));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.bump();
            let exp = self.parse_factor()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Token::Number(v)) => Ok(Expr::Const(v)),
            Some(Token::Ident(name)) => {
                if name == "x" {
                    return Ok(Expr::Var);
                }
                if let Some(f) = Func::from_name(&name) {
                    match self.peek() {
                        Some(Token::LParen) => {
                            self.bump();
                            let arg = self.parse_expr()?;
                            match self.bump() {
                                Some(Token::RParen) => Ok(Expr::call(f, arg)),
                                _ => Err(ParseError::Unbalanced { offset }),
                            }
                        }
                        _ => Err(ParseError::Expected {
                            expected: "`(` after function name",
                            offset: self.offset(),
                        }),
                    }
                } else if matches!(self.peek(), Some(Token::LParen)) {
                    Err(ParseError::UnknownFunction { name, offset })
                } else {
                    Err(ParseError::UnknownSymbol { name, offset })
                }
            }
            Some(Token::LParen) => {
                let e = self.parse_expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(ParseError::Unbalanced { offset }),
                }
            }
            _ => Err(ParseError::Expected { expected: "a value", offset }),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing. print -> parse reproduces the tree node for node, so evaluation
// of a reparsed expression performs the identical floating-point arithmetic.
// ---------------------------------------------------------------------------

// Precedence levels used for parenthesization: Add/Sub = 1, Mul/Div = 2,
// Neg = 3, Pow = 4, atoms = 5.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, needed: bool) -> fmt::Result {
            if needed {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("x"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                paren(f, e, precedence(e) < 3)
            }
            Expr::Add(a, b) => {
                paren(f, a, precedence(a) < 1)?;
                f.write_str(" + ")?;
                paren(f, b, precedence(b) <= 1)
            }
            Expr::Sub(a, b) => {
                paren(f, a, precedence(a) < 1)?;
                f.write_str(" - ")?;
                paren(f, b, precedence(b) <= 1)
            }
            Expr::Mul(a, b) => {
                paren(f, a, precedence(a) < 2)?;
                f.write_str("*")?;
                paren(f, b, precedence(b) <= 2)
            }
            Expr::Div(a, b) => {
                paren(f, a, precedence(a) < 2)?;
                f.write_str("/")?;
                paren(f, b, precedence(b) <= 2)
            }
            Expr::Pow(a, b) => {
                paren(f, a, precedence(a) < 5)?;
                f.write_str("^")?;
                paren(f, b, precedence(b) < 3)
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
