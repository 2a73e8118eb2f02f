use super::{EvalError, Expr, Func};
use crate::scalar::Scalar;

/// An algebra the expression tree can be folded into: plain scalars,
/// first-order duals (Jacobians) or truncated power series (jets).
pub(crate) trait Domain {
    type Value;

    fn constant(&self, c: f64) -> Self::Value;
    fn var(&self, index: usize) -> Self::Value;
    fn neg(&self, a: Self::Value) -> Self::Value;
    fn add(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn sub(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn mul(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn div(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, EvalError>;
    fn powi(&self, a: Self::Value, e: u32) -> Self::Value;
    fn call(&self, f: Func, a: Self::Value) -> Result<Self::Value, EvalError>;
}

pub(crate) fn fold<D: Domain>(e: &Expr, d: &D) -> Result<D::Value, EvalError> {
    Ok(match e {
        Expr::Num(c) => d.constant(*c),
        Expr::Var(i) => d.var(*i),
        Expr::Neg(a) => {
            let a = fold(a, d)?;
            d.neg(a)
        }
        Expr::Add(a, b) => {
            let (a, b) = (fold(a, d)?, fold(b, d)?);
            d.add(a, b)
        }
        Expr::Sub(a, b) => {
            let (a, b) = (fold(a, d)?, fold(b, d)?);
            d.sub(a, b)
        }
        Expr::Mul(a, b) => {
            let (a, b) = (fold(a, d)?, fold(b, d)?);
            d.mul(a, b)
        }
        Expr::Div(a, b) => {
            let (a, b) = (fold(a, d)?, fold(b, d)?);
            d.div(a, b)?
        }
        Expr::Pow(a, k) => {
            let a = fold(a, d)?;
            d.powi(a, *k)
        }
        Expr::Call(f, a) => {
            let a = fold(a, d)?;
            d.call(*f, a)?
        }
    })
}

fn domain_err<T: Scalar>(func: &'static str, arg: T) -> EvalError {
    EvalError::Domain {
        func,
        arg: arg.to_f64_lossy(),
    }
}

/// Applies `f` to a scalar, rejecting arguments outside the real domain.
pub(crate) fn apply<T: Scalar>(f: Func, v: T) -> Result<T, EvalError> {
    let out = match f {
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
        Func::Tan => {
            if v.cos() == T::zero() {
                return Err(domain_err("tan", v));
            }
            v.tan()
        }
        Func::Exp => v.exp(),
        Func::Log => {
            if v <= T::zero() {
                return Err(domain_err("log", v));
            }
            v.ln()
        }
        Func::Sqrt => {
            if v < T::zero() {
                return Err(domain_err("sqrt", v));
            }
            v.sqrt()
        }
        Func::Sinh => v.sinh(),
        Func::Cosh => v.cosh(),
        Func::Atan => v.atan(),
    };
    Ok(out)
}

/// First derivative of `f` at `v` (the argument is already domain-checked).
fn derivative<T: Scalar>(f: Func, v: T) -> Result<T, EvalError> {
    Ok(match f {
        Func::Sin => v.cos(),
        Func::Cos => -v.sin(),
        Func::Tan => {
            let c = v.cos();
            T::one() / (c * c)
        }
        Func::Exp => v.exp(),
        Func::Log => T::one() / v,
        Func::Sqrt => {
            if v <= T::zero() {
                return Err(domain_err("sqrt", v));
            }
            T::lit(0.5) / v.sqrt()
        }
        Func::Sinh => v.cosh(),
        Func::Cosh => v.sinh(),
        Func::Atan => T::one() / (T::one() + v * v),
    })
}

pub(crate) struct ScalarDomain<'a, T> {
    pub x: &'a [T],
}

impl<T: Scalar> Domain for ScalarDomain<'_, T> {
    type Value = T;

    fn constant(&self, c: f64) -> T {
        T::lit(c)
    }

    fn var(&self, index: usize) -> T {
        self.x[index]
    }

    fn neg(&self, a: T) -> T {
        -a
    }

    fn add(&self, a: T, b: T) -> T {
        a + b
    }

    fn sub(&self, a: T, b: T) -> T {
        a - b
    }

    fn mul(&self, a: T, b: T) -> T {
        a * b
    }

    fn div(&self, a: T, b: T) -> Result<T, EvalError> {
        if b == T::zero() {
            return Err(domain_err("division", b));
        }
        Ok(a / b)
    }

    fn powi(&self, a: T, e: u32) -> T {
        powu(a, e)
    }

    fn call(&self, f: Func, a: T) -> Result<T, EvalError> {
        apply(f, a)
    }
}

/// Integer power by repeated multiplication (exact for small exponents,
/// independent of the platform `powi`).
pub(crate) fn powu<T: Scalar>(a: T, e: u32) -> T {
    let mut result = T::one();
    let mut base = a;
    let mut e = e;
    let mut first = true;
    while e > 0 {
        if e & 1 == 1 {
            result = if first { base } else { result * base };
            first = false;
        }
        e >>= 1;
        if e > 0 {
            base = base * base;
        }
    }
    result
}

#[derive(Debug, Clone)]
pub(crate) struct Dual<T> {
    pub value: T,
    pub grad: Vec<T>,
}

pub(crate) struct DualDomain<'a, T> {
    pub x: &'a [T],
}

impl<T: Scalar> DualDomain<'_, T> {
    fn chain(&self, a: Dual<T>, value: T, slope: T) -> Dual<T> {
        Dual {
            value,
            grad: a.grad.into_iter().map(|g| g * slope).collect(),
        }
    }
}

impl<T: Scalar> Domain for DualDomain<'_, T> {
    type Value = Dual<T>;

    fn constant(&self, c: f64) -> Dual<T> {
        Dual {
            value: T::lit(c),
            grad: vec![T::zero(); self.x.len()],
        }
    }

    fn var(&self, index: usize) -> Dual<T> {
        let mut grad = vec![T::zero(); self.x.len()];
        grad[index] = T::one();
        Dual {
            value: self.x[index],
            grad,
        }
    }

    fn neg(&self, a: Dual<T>) -> Dual<T> {
        let v = -a.value;
        self.chain(a, v, -T::one())
    }

    fn add(&self, mut a: Dual<T>, b: Dual<T>) -> Dual<T> {
        a.value += b.value;
        for (x, y) in a.grad.iter_mut().zip(b.grad) {
            *x += y;
        }
        a
    }

    fn sub(&self, mut a: Dual<T>, b: Dual<T>) -> Dual<T> {
        a.value -= b.value;
        for (x, y) in a.grad.iter_mut().zip(b.grad) {
            *x -= y;
        }
        a
    }

    fn mul(&self, a: Dual<T>, b: Dual<T>) -> Dual<T> {
        Dual {
            value: a.value * b.value,
            grad: a
                .grad
                .iter()
                .zip(&b.grad)
                .map(|(&ga, &gb)| ga * b.value + a.value * gb)
                .collect(),
        }
    }

    fn div(&self, a: Dual<T>, b: Dual<T>) -> Result<Dual<T>, EvalError> {
        if b.value == T::zero() {
            return Err(domain_err("division", b.value));
        }
        let q = a.value / b.value;
        Ok(Dual {
            value: q,
            grad: a
                .grad
                .iter()
                .zip(&b.grad)
                .map(|(&ga, &gb)| (ga - q * gb) / b.value)
                .collect(),
        })
    }

    fn powi(&self, a: Dual<T>, e: u32) -> Dual<T> {
        if e == 0 {
            return self.constant(1.0);
        }
        let value = powu(a.value, e);
        let slope = T::lit(e as f64) * powu(a.value, e - 1);
        self.chain(a, value, slope)
    }

    fn call(&self, f: Func, a: Dual<T>) -> Result<Dual<T>, EvalError> {
        let value = apply(f, a.value)?;
        let slope = derivative(f, a.value)?;
        Ok(self.chain(a, value, slope))
    }
}
