//! Scalar expressions in `t` and `eps`: parsing, evaluation, and symbolic
//! differentiation with respect to `t`.
//!
//! Expressions describe the coefficient matrix `A(t)`, the forcing `f(t)` and
//! integral kernels of boundary operators. Evaluation is complex-valued so
//! that `sqrt` and `log` of negative arguments follow the principal branch.

mod diff;
mod matrix;
mod parse;

use std::fmt;

use nalgebra::ComplexField;
use thiserror::Error;

use crate::scalar::{cplx, Cplx, Real};

pub use matrix::{sample_matrix, MatrixExpression};
pub use parse::parse;

/// Built-in functions of one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    /// `sign(x)`; appears in derivatives of `abs`, with `sign(0) = 0`.
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    Eps,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Power with an exponent that does not depend on `t`.
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at offset {offset} depends on t; only constant exponents are supported")]
    NonConstantExponent { offset: usize },
    #[error("{what} at t = {t}, eps = {eps}")]
    Domain { what: String, t: f64, eps: f64 },
    #[error("entry ({row}, {col}) at node {node} (t = {t}): {source}")]
    AtNode {
        row: usize,
        col: usize,
        node: usize,
        t: f64,
        source: Box<ExprError>,
    },
}

fn domain<R: Real>(what: &str, t: R, eps: R) -> ExprError {
    ExprError::Domain {
        what: what.to_string(),
        t: t.as_f64(),
        eps: eps.as_f64(),
    }
}

fn is_zero<R: Real>(z: Cplx<R>) -> bool {
    z.re == R::zero() && z.im == R::zero()
}

fn integer_exponent<R: Real>(e: Cplx<R>) -> Option<i32> {
    if e.im != R::zero() {
        return None;
    }
    let x = e.re.as_f64();
    (x.fract() == 0.0 && x.abs() <= 1024.0).then_some(x as i32)
}

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    pub fn depends_on_t(&self) -> bool {
        match self {
            Expr::T => true,
            Expr::Num(_) | Expr::Eps => false,
            Expr::Neg(u) | Expr::Call(_, u) => u.depends_on_t(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on_t() || b.depends_on_t()
            }
        }
    }

    pub fn depends_on_eps(&self) -> bool {
        match self {
            Expr::Eps => true,
            Expr::Num(_) | Expr::T => false,
            Expr::Neg(u) | Expr::Call(_, u) => u.depends_on_eps(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on_eps() || b.depends_on_eps()
            }
        }
    }

    /// Evaluates the expression at `(t, eps)`.
    pub fn eval<R: Real>(&self, t: R, eps: R) -> Result<Cplx<R>, ExprError> {
        Ok(match self {
            Expr::Num(x) => cplx(R::lit(*x)),
            Expr::T => cplx(t),
            Expr::Eps => cplx(eps),
            Expr::Neg(u) => -u.eval(t, eps)?,
            Expr::Add(a, b) => a.eval(t, eps)? + b.eval(t, eps)?,
            Expr::Sub(a, b) => a.eval(t, eps)? - b.eval(t, eps)?,
            Expr::Mul(a, b) => a.eval(t, eps)? * b.eval(t, eps)?,
            Expr::Div(a, b) => {
                let den = b.eval(t, eps)?;
                if is_zero(den) {
                    return Err(domain("division by zero", t, eps));
                }
                a.eval(t, eps)? / den
            }
            Expr::Pow(base, exponent) => pow(base.eval(t, eps)?, exponent.eval(t, eps)?)
                .ok_or_else(|| domain("zero raised to a negative power", t, eps))?,
            Expr::Call(f, u) => apply_func(*f, u.eval(t, eps)?).ok_or_else(|| domain("log of zero", t, eps))?,
        })
    }

    /// Real-valued evaluation in `f64`; `None` when the value is complex or fails.
    pub(crate) fn eval_real_f64(&self, t: f64, eps: f64) -> Option<f64> {
        let v = self.eval::<f64>(t, eps).ok()?;
        (v.im == 0.0 && v.re.is_finite()).then_some(v.re)
    }
}

fn pow<R: Real>(base: Cplx<R>, e: Cplx<R>) -> Option<Cplx<R>> {
    if is_zero(base) {
        return if is_zero(e) {
            Some(cplx(R::one()))
        } else if e.re > R::zero() {
            Some(cplx(R::zero()))
        } else {
            None
        };
    }
    if let Some(k) = integer_exponent(e) {
        return Some(ComplexField::powi(base, k));
    }
    if base.im == R::zero() && base.re > R::zero() && e.im == R::zero() {
        return Some(cplx(base.re.powf(e.re)));
    }
    Some(ComplexField::exp(ComplexField::ln(base) * e))
}

fn apply_func<R: Real>(f: Func, z: Cplx<R>) -> Option<Cplx<R>> {
    let real = z.im == R::zero();
    let x = z.re;
    Some(match f {
        Func::Sin if real => cplx(x.sin()),
        Func::Sin => ComplexField::sin(z),
        Func::Cos if real => cplx(x.cos()),
        Func::Cos => ComplexField::cos(z),
        Func::Exp if real => cplx(x.exp()),
        Func::Exp => ComplexField::exp(z),
        Func::Log => {
            if is_zero(z) {
                return None;
            }
            if real && x > R::zero() {
                cplx(x.ln())
            } else {
                ComplexField::ln(z)
            }
        }
        Func::Sqrt if real && x >= R::zero() => cplx(x.sqrt()),
        Func::Sqrt => ComplexField::sqrt(z),
        Func::Abs => cplx(ComplexField::modulus(z)),
        Func::Sign => {
            if is_zero(z) {
                cplx(R::zero())
            } else if real {
                cplx(x.signum())
            } else {
                z.unscale(ComplexField::modulus(z))
            }
        }
    })
}

// Smart constructors with constant folding and 0/1 identities.

fn fold(e: Expr) -> Expr {
    if e.depends_on_t() || e.depends_on_eps() {
        return e;
    }
    match e.eval_real_f64(0.0, 0.0) {
        Some(v) => Expr::Num(v),
        None => e,
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Num(x) => Expr::Num(-x),
            Expr::Neg(u) => *u,
            u => Expr::Neg(Box::new(u)),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Num(a), b) if a == 0.0 => b,
            (a, Expr::Num(b)) if b == 0.0 => a,
            (a, b) => fold(Expr::Add(Box::new(a), Box::new(b))),
        }
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (a, Expr::Num(b)) if b == 0.0 => a,
            (Expr::Num(a), b) if a == 0.0 => -b,
            (a, b) => fold(Expr::Sub(Box::new(a), Box::new(b))),
        }
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Num(a), _) | (_, Expr::Num(a)) if a == 0.0 => Expr::Num(0.0),
            (Expr::Num(a), b) if a == 1.0 => b,
            (a, Expr::Num(b)) if b == 1.0 => a,
            (a, b) => fold(Expr::Mul(Box::new(a), Box::new(b))),
        }
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (a, Expr::Num(b)) if b == 1.0 => a,
            (Expr::Num(a), Expr::Num(b)) if a == 0.0 && b != 0.0 => Expr::Num(0.0),
            (a, b) => fold(Expr::Div(Box::new(a), Box::new(b))),
        }
    }
}

impl Expr {
    pub fn pow(self, exponent: Expr) -> Expr {
        match exponent {
            Expr::Num(e) if e == 0.0 => Expr::Num(1.0),
            Expr::Num(e) if e == 1.0 => self,
            e => fold(Expr::Pow(Box::new(self), Box::new(e))),
        }
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        fold(Expr::Call(f, Box::new(arg)))
    }
}

/// Fully parenthesised, re-parseable rendering.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) => write!(f, "(-{:?})", -x),
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::T => f.write_str("t"),
            Expr::Eps => f.write_str("eps"),
            Expr::Neg(u) => write!(f, "(-{u})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, u) => write!(f, "{}({u})", func.name()),
        }
    }
}
