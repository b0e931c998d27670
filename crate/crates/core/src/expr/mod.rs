//! Expression trees for holomorphic coefficient maps.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' nonneg-int)?
//! atom   := number | 'i' | identifier | 'exp' '(' expr ')' | '(' expr ')'
//! number := decimal, optional exponent, optional trailing 'i'
//! ```

mod holomap;
mod parser;
mod taylor;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::poly::{Cx, MultiPoly, PolyError};

pub use holomap::{base_names, HoloMap, Polydisc};
pub use parser::{parse_expr, parse_expr_with, ParseError};
pub use taylor::{taylor_series, taylor_truncate};

/// Denominators smaller than this in magnitude are treated as division by zero.
pub const MIN_DENOMINATOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("missing value for variable `{0}`")]
    MissingVariable(String),
    #[error("division by a value of magnitude {0:e}")]
    DivisionByZero(f64),
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("expression is not a polynomial: {0}")]
    NotPolynomial(String),
    #[error(
        "series division by a series with vanishing constant term (not analytic at the center)"
    )]
    NotAnalytic,
    #[error("Taylor truncation needs a univariate expression, found variables {0:?}")]
    NotUnivariate(Vec<String>),
    #[error("map expects {expected} base coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprTree {
    Const(Cx),
    Var(String),
    Add(Box<ExprTree>, Box<ExprTree>),
    Sub(Box<ExprTree>, Box<ExprTree>),
    Mul(Box<ExprTree>, Box<ExprTree>),
    Div(Box<ExprTree>, Box<ExprTree>),
    Pow(Box<ExprTree>, u32),
    Exp(Box<ExprTree>),
    Neg(Box<ExprTree>),
}

impl ExprTree {
    pub fn constant(c: Cx) -> Self {
        ExprTree::Const(c)
    }

    pub fn var(name: &str) -> Self {
        ExprTree::Var(name.to_string())
    }

    /// Sorted set of variable names.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            ExprTree::Const(_) => {}
            ExprTree::Var(v) => {
                out.insert(v.clone());
            }
            ExprTree::Add(a, b)
            | ExprTree::Sub(a, b)
            | ExprTree::Mul(a, b)
            | ExprTree::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ExprTree::Pow(a, _) | ExprTree::Exp(a) | ExprTree::Neg(a) => a.collect_vars(out),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ExprTree::Const(_) | ExprTree::Var(_) => 1,
            ExprTree::Add(a, b)
            | ExprTree::Sub(a, b)
            | ExprTree::Mul(a, b)
            | ExprTree::Div(a, b) => 1 + a.depth().max(b.depth()),
            ExprTree::Pow(a, _) | ExprTree::Exp(a) | ExprTree::Neg(a) => 1 + a.depth(),
        }
    }

    /// Recursive evaluation. Every variable in the tree must be assigned.
    pub fn eval(&self, point: &BTreeMap<String, Cx>) -> Result<Cx, ExprError> {
        self.eval_with(&|name| point.get(name).copied())
    }

    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<Cx>) -> Result<Cx, ExprError> {
        let v = match self {
            ExprTree::Const(c) => *c,
            ExprTree::Var(name) => {
                lookup(name).ok_or_else(|| ExprError::MissingVariable(name.clone()))?
            }
            ExprTree::Add(a, b) => a.eval_with(lookup)? + b.eval_with(lookup)?,
            ExprTree::Sub(a, b) => a.eval_with(lookup)? - b.eval_with(lookup)?,
            ExprTree::Mul(a, b) => a.eval_with(lookup)? * b.eval_with(lookup)?,
            ExprTree::Div(a, b) => {
                let num = a.eval_with(lookup)?;
                let den = b.eval_with(lookup)?;
                if den.norm() < MIN_DENOMINATOR {
                    return Err(ExprError::DivisionByZero(den.norm()));
                }
                num / den
            }
            ExprTree::Pow(a, k) => a.eval_with(lookup)?.powu(*k),
            ExprTree::Exp(a) => a.eval_with(lookup)?.exp(),
            ExprTree::Neg(a) => -a.eval_with(lookup)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite)
        }
    }

    /// Replaces variables by subtrees (variables not in `bindings` are kept).
    pub fn substitute(&self, bindings: &BTreeMap<String, ExprTree>) -> ExprTree {
        let bin = |a: &ExprTree, b: &ExprTree, f: fn(Box<ExprTree>, Box<ExprTree>) -> ExprTree| {
            f(
                Box::new(a.substitute(bindings)),
                Box::new(b.substitute(bindings)),
            )
        };
        match self {
            ExprTree::Const(c) => ExprTree::Const(*c),
            ExprTree::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            ExprTree::Add(a, b) => bin(a, b, ExprTree::Add),
            ExprTree::Sub(a, b) => bin(a, b, ExprTree::Sub),
            ExprTree::Mul(a, b) => bin(a, b, ExprTree::Mul),
            ExprTree::Div(a, b) => bin(a, b, ExprTree::Div),
            ExprTree::Pow(a, k) => ExprTree::Pow(Box::new(a.substitute(bindings)), *k),
            ExprTree::Exp(a) => ExprTree::Exp(Box::new(a.substitute(bindings))),
            ExprTree::Neg(a) => ExprTree::Neg(Box::new(a.substitute(bindings))),
        }
    }

    /// Converts to a polynomial over `vars`. Division is allowed only by
    /// constant subtrees, and `exp` only of constant subtrees.
    pub fn to_multipoly(&self, vars: &[impl AsRef<str>]) -> Result<MultiPoly, ExprError> {
        Ok(match self {
            ExprTree::Const(c) => MultiPoly::constant(vars, *c),
            ExprTree::Var(v) => MultiPoly::variable(vars, v)?,
            ExprTree::Add(a, b) => &a.to_multipoly(vars)? + &b.to_multipoly(vars)?,
            ExprTree::Sub(a, b) => &a.to_multipoly(vars)? - &b.to_multipoly(vars)?,
            ExprTree::Mul(a, b) => &a.to_multipoly(vars)? * &b.to_multipoly(vars)?,
            ExprTree::Div(a, b) => {
                let den = b.constant_value().ok_or_else(|| {
                    ExprError::NotPolynomial(format!("division by non-constant `{b}`"))
                })?;
                if den.norm() < MIN_DENOMINATOR {
                    return Err(ExprError::DivisionByZero(den.norm()));
                }
                a.to_multipoly(vars)?.scale_by(den.inv())
            }
            ExprTree::Pow(a, k) => a.to_multipoly(vars)?.pow(*k),
            ExprTree::Exp(a) => {
                let c = a.constant_value().ok_or_else(|| {
                    ExprError::NotPolynomial(format!("exp of non-constant `{a}`"))
                })?;
                MultiPoly::constant(vars, c.exp())
            }
            ExprTree::Neg(a) => -&a.to_multipoly(vars)?,
        })
    }

    /// Value of a variable-free subtree.
    pub fn constant_value(&self) -> Option<Cx> {
        if self.variables().is_empty() {
            self.eval_with(&|_| None).ok()
        } else {
            None
        }
    }

    /// Sum `c_k * (var - center)^k`, skipping zero coefficients.
    pub fn from_series(var: &str, center: Cx, coeffs: &[Cx]) -> ExprTree {
        let base = if center == Cx::new(0.0, 0.0) {
            ExprTree::var(var)
        } else {
            ExprTree::Sub(
                Box::new(ExprTree::var(var)),
                Box::new(ExprTree::Const(center)),
            )
        };
        let mut acc: Option<ExprTree> = None;
        for (k, &c) in coeffs.iter().enumerate() {
            if c == Cx::new(0.0, 0.0) {
                continue;
            }
            let term = match k {
                0 => ExprTree::Const(c),
                1 => ExprTree::Mul(Box::new(ExprTree::Const(c)), Box::new(base.clone())),
                _ => ExprTree::Mul(
                    Box::new(ExprTree::Const(c)),
                    Box::new(ExprTree::Pow(Box::new(base.clone()), k as u32)),
                ),
            };
            acc = Some(match acc {
                None => term,
                Some(prev) => ExprTree::Add(Box::new(prev), Box::new(term)),
            });
        }
        acc.unwrap_or(ExprTree::Const(Cx::new(0.0, 0.0)))
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprTree::Add(..) | ExprTree::Sub(..) => 1,
            ExprTree::Mul(..) | ExprTree::Div(..) => 2,
            ExprTree::Neg(..) => 3,
            ExprTree::Pow(..) => 4,
            ExprTree::Const(c) if c.re != 0.0 && c.im != 0.0 => 1,
            ExprTree::Const(c) if c.re.is_sign_negative() || c.im.is_sign_negative() => 3,
            ExprTree::Const(_) | ExprTree::Var(_) | ExprTree::Exp(_) => 5,
        }
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    // `{:?}` is the shortest round-tripping form and always contains a '.' or an exponent.
    write!(f, "{x:?}")
}

impl fmt::Display for ExprTree {
    /// Prints in the parser's grammar with the minimal parentheses needed for
    /// `parse(print(t)) == t`. Constants with both parts nonzero print as a
    /// parenthesized sum, so they re-parse as `Add`, not `Const`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &ExprTree, parens: bool| -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            ExprTree::Const(c) => {
                if c.im == 0.0 {
                    if c.re.is_sign_negative() {
                        write!(f, "-")?;
                    }
                    write_real(f, c.re.abs())
                } else if c.re == 0.0 {
                    if c.im.is_sign_negative() {
                        write!(f, "-")?;
                    }
                    write_real(f, c.im.abs())?;
                    write!(f, "i")
                } else {
                    write_real(f, c.re)?;
                    write!(f, "{}", if c.im < 0.0 { "-" } else { "+" })?;
                    write_real(f, c.im.abs())?;
                    write!(f, "i")
                }
            }
            ExprTree::Var(v) => write!(f, "{v}"),
            ExprTree::Add(a, b)
            | ExprTree::Sub(a, b)
            | ExprTree::Mul(a, b)
            | ExprTree::Div(a, b) => {
                let (op, prec) = match self {
                    ExprTree::Add(..) => ("+", 1),
                    ExprTree::Sub(..) => ("-", 1),
                    ExprTree::Mul(..) => ("*", 2),
                    _ => ("/", 2),
                };
                wrap(f, a, a.precedence() < prec)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.precedence() <= prec)
            }
            ExprTree::Pow(a, k) => {
                wrap(f, a, a.precedence() < 5)?;
                write!(f, "^{k}")
            }
            ExprTree::Exp(a) => write!(f, "exp({a})"),
            ExprTree::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, a.precedence() < 3)
            }
        }
    }
}
