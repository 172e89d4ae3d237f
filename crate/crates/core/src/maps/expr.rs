use std::fmt;

use crate::error::{Error, Result};

/// Denominators (and bases of negative powers) below this magnitude trip the guard.
pub const DIVISION_GUARD: f64 = 1e-15;

/// Expression tree for one component of a map, or for a weight function of `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate `i` of the point argument.
    Var(usize),
    /// Grid abscissa of the `E`-discretization.
    GridT,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Abs(Box<Expr>),
    Exp(Box<Expr>),
}

/// Values bound to the free symbols during evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    pub point: &'a [f64],
    pub t: f64,
}

impl Expr {
    pub fn eval(&self, env: &Env<'_>) -> Result<f64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *env.point.get(*i).ok_or(Error::ArityMismatch {
                arity: i + 1,
                dimension: env.point.len(),
            })?,
            Expr::GridT => env.t,
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => {
                let num = a.eval(env)?;
                let den = b.eval(env)?;
                if den.abs() < DIVISION_GUARD {
                    return Err(Error::DivisionGuard { denominator: den });
                }
                num / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(env)?;
                if *n < 0 && base.abs() < DIVISION_GUARD {
                    return Err(Error::DivisionGuard { denominator: base });
                }
                base.powi(*n)
            }
            Expr::Abs(a) => a.eval(env)?.abs(),
            Expr::Exp(a) => a.eval(env)?.exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue)
        }
    }

    /// Largest coordinate index referenced, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::GridT => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Abs(a) | Expr::Exp(a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    pub fn uses_t(&self) -> bool {
        match self {
            Expr::GridT => true,
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Abs(a) | Expr::Exp(a) => a.uses_t(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_t() || b.uses_t()
            }
        }
    }
}

/// Fully parenthesized source form; parses back to an expression that
/// evaluates identically.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::GridT => f.write_str("t"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}
