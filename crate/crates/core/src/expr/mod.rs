//! Analytic maps `f: R^n -> R^p` written in a small expression language.
//!
//! A map is a `;`-separated list of component expressions over the variables
//! `x1..xn` (with `x, y, z, w` as aliases for `x1..x4` when `n <= 4`). Parsing
//! rejects anything that is not analytic at the origin, so every
//! [`AnalyticMap`] can be expanded into a Taylor series there.

mod eval;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub(crate) use eval::{fold, powu, Domain};

/// Elementary functions available in the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Atan,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree of a single component. Variables are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "-{:?}", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_child(f, 4)
            }
            Expr::Add(a, b) => {
                a.write_child(f, 1)?;
                f.write_str(" + ")?;
                b.write_child(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write_child(f, 1)?;
                f.write_str(" - ")?;
                b.write_child(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_child(f, 2)?;
                f.write_str("*")?;
                b.write_child(f, 3)
            }
            Expr::Div(a, b) => {
                a.write_child(f, 2)?;
                f.write_str("/")?;
                b.write_child(f, 3)
            }
            Expr::Pow(a, e) => {
                a.write_child(f, 5)?;
                write!(f, "^{e}")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("variable x{index} at {pos} exceeds arity {arity}")]
    ArityMismatch { pos: usize, index: usize, arity: usize },
    #[error("not analytic at the origin (at {pos}): {message}")]
    NotAnalytic { pos: usize, message: String },
    #[error("map has {components} components but only {arity} variables")]
    Codomain { components: usize, arity: usize },
    #[error("arity must be positive")]
    ZeroArity,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{func} is not defined (or not analytic) at argument {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("expected a point with {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// A parsed map `f = (f_1, ..., f_p): R^n -> R^p`, analytic at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMap {
    arity: usize,
    components: Vec<Expr>,
}

impl AnalyticMap {
    /// Parses `source` (components separated by `;`) over `arity` variables.
    pub fn parse(source: &str, arity: usize) -> Result<Self, ParseError> {
        if arity == 0 {
            return Err(ParseError::ZeroArity);
        }
        let components = parse::parse_map(source, arity)?;
        if components.len() > arity {
            return Err(ParseError::Codomain {
                components: components.len(),
                arity,
            });
        }
        Ok(Self { arity, components })
    }

    /// Builds a map from already-validated component trees.
    ///
    /// Panics if `components` is empty or longer than `arity`.
    pub fn from_components(arity: usize, components: Vec<Expr>) -> Self {
        assert!(!components.is_empty() && components.len() <= arity);
        Self { arity, components }
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn codomain(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Text form accepted by [`AnalyticMap::parse`].
    pub fn unparse(&self) -> String {
        self.to_string()
    }

    /// True when every component is the literal zero (degenerate map).
    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .all(|c| matches!(c, Expr::Num(v) if *v == 0.0))
    }

    pub fn vanishes_at_origin(&self) -> bool {
        match self.evaluate(&vec![0.0f64; self.arity]) {
            Ok(v) => v.iter().all(|c| c.abs() <= 1e-14),
            Err(_) => false,
        }
    }

    /// Stable hex digest of the canonical text form.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.arity.to_le_bytes());
        h.update(self.unparse().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn evaluate<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        self.check_dim(x.len())?;
        let dom = eval::ScalarDomain { x };
        self.components.iter().map(|c| fold(c, &dom)).collect()
    }

    /// Exact Jacobian by forward-mode differentiation of the expression trees.
    pub fn jacobian<T: Scalar>(&self, x: &[T]) -> Result<Matrix<T>, EvalError> {
        self.check_dim(x.len())?;
        let dom = eval::DualDomain { x };
        let mut jac = Matrix::zeros(self.codomain(), self.arity);
        for (i, c) in self.components.iter().enumerate() {
            let d = fold(c, &dom)?;
            jac.row_mut(i).copy_from_slice(&d.grad);
        }
        Ok(jac)
    }

    /// Value and Jacobian in a single pass.
    pub fn evaluate_with_jacobian<T: Scalar>(
        &self,
        x: &[T],
    ) -> Result<(Vec<T>, Matrix<T>), EvalError> {
        self.check_dim(x.len())?;
        let dom = eval::DualDomain { x };
        let mut jac = Matrix::zeros(self.codomain(), self.arity);
        let mut val = Vec::with_capacity(self.codomain());
        for (i, c) in self.components.iter().enumerate() {
            let d = fold(c, &dom)?;
            val.push(d.value);
            jac.row_mut(i).copy_from_slice(&d.grad);
        }
        Ok((val, jac))
    }

    fn check_dim(&self, got: usize) -> Result<(), EvalError> {
        if got != self.arity {
            return Err(EvalError::Dimension {
                expected: self.arity,
                got,
            });
        }
        Ok(())
    }
}

impl fmt::Display for AnalyticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
