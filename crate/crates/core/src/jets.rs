//! Truncated multivariate power series (jets) and the Taylor truncation
//! `T^k f` of an analytic map at the origin.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::expr::{fold, powu, AnalyticMap, Domain, EvalError, Expr, Func};
use crate::scalar::Scalar;

/// Exponent vector `(e1, ..., en)`, ordered graded-lexicographically: by
/// total degree first, then with larger powers of earlier variables first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    pub fn zero(arity: usize) -> Self {
        Self(vec![0; arity])
    }

    pub fn unit(arity: usize, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        Self(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series arities differ: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error(transparent)]
    Domain(#[from] EvalError),
    #[error("invalid series: {0}")]
    Invalid(String),
}

/// Polynomial in `n` variables truncated at total degree `order`, stored
/// sparsely with no explicit zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    arity: usize,
    order: u32,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Scalar> TruncatedSeries<T> {
    pub fn zero(arity: usize, order: u32) -> Self {
        Self {
            arity,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, order: u32, c: T) -> Self {
        let mut s = Self::zero(arity, order);
        s.insert(MultiIndex::zero(arity), c);
        s
    }

    pub fn variable(arity: usize, order: u32, i: usize) -> Self {
        let mut s = Self::zero(arity, order);
        s.insert(MultiIndex::unit(arity, i), T::one());
        s
    }

    /// Builds a series from `(exponents, coefficient)` pairs, summing
    /// repeated indices and dropping terms above `order` and exact zeros.
    pub fn from_terms(
        arity: usize,
        order: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, T)>,
    ) -> Result<Self, SeriesError> {
        let mut acc: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != arity {
                return Err(SeriesError::Invalid(format!(
                    "exponent {e:?} does not have {arity} entries"
                )));
            }
            let idx = MultiIndex(e);
            if idx.degree() <= order {
                *acc.entry(idx).or_insert_with(T::zero) += c;
            }
        }
        acc.retain(|_, c| *c != T::zero());
        Ok(Self {
            arity,
            order,
            terms: acc,
        })
    }

    fn insert(&mut self, idx: MultiIndex, c: T) {
        if c != T::zero() && idx.degree() <= self.order {
            self.terms.insert(idx, c);
        }
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, T)> + '_ {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn coefficient(&self, exps: &[u32]) -> T {
        self.terms
            .get(&MultiIndex(exps.to_vec()))
            .copied()
            .unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.coefficient(&vec![0; self.arity])
    }

    /// Lowest total degree carried by a nonzero term.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().next().map(MultiIndex::degree)
    }

    /// Drops every term above degree `k` (and lowers the order to `k`).
    pub fn truncate(&self, k: u32) -> Self {
        let order = k.min(self.order);
        Self {
            arity: self.arity,
            order,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.degree() <= order)
                .map(|(e, &c)| (e.clone(), c))
                .collect(),
        }
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.0.iter()
                    .zip(x)
                    .fold(c, |acc, (&p, &xi)| acc * powu(xi, p))
            })
            .sum()
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.arity != other.arity {
            return Err(SeriesError::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.combine(other, -T::one())
    }

    fn combine(&self, other: &Self, sign: T) -> Result<Self, SeriesError> {
        self.check(other)?;
        let order = self.order.min(other.order);
        let mut terms: BTreeMap<MultiIndex, T> = self
            .terms
            .iter()
            .filter(|(e, _)| e.degree() <= order)
            .map(|(e, &c)| (e.clone(), c))
            .collect();
        for (e, &c) in other.terms.iter().filter(|(e, _)| e.degree() <= order) {
            let v = if sign == T::one() { c } else { -c };
            *terms.entry(e.clone()).or_insert_with(T::zero) += v;
        }
        terms.retain(|_, c| *c != T::zero());
        Ok(Self {
            arity: self.arity,
            order,
            terms,
        })
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = Self::zero(self.arity, self.order);
        for (e, &c) in &self.terms {
            out.insert(e.clone(), c * s);
        }
        out
    }

    /// Truncated product; the result has order `min(a.order, b.order)`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let order = self.order.min(other.order);
        let mut terms: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (ea, &ca) in &self.terms {
            let da = ea.degree();
            if da > order {
                break;
            }
            for (eb, &cb) in &other.terms {
                if da + eb.degree() > order {
                    break;
                }
                *terms.entry(ea.plus(eb)).or_insert_with(T::zero) += ca * cb;
            }
        }
        terms.retain(|_, c| *c != T::zero());
        Ok(Self {
            arity: self.arity,
            order,
            terms,
        })
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        self.mul(other).expect("same arity")
    }

    pub fn powu(&self, e: u32) -> Self {
        let mut result = Self::constant(self.arity, self.order, T::one());
        let mut base = self.clone();
        let mut e = e;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first {
                    base.clone()
                } else {
                    result.mul_unchecked(&base)
                };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    /// `F(c + u)` for a univariate `F` given its Taylor coefficients at the
    /// constant term `c`, where `self = c + u`.
    fn compose(&self, coeffs: &[T]) -> Self {
        let mut u = self.clone();
        u.terms.remove(&MultiIndex::zero(self.arity));
        let mut acc = Self::constant(self.arity, self.order, coeffs[coeffs.len() - 1]);
        for &a in coeffs[..coeffs.len() - 1].iter().rev() {
            acc = acc.mul_unchecked(&u);
            acc = acc
                .add(&Self::constant(self.arity, self.order, a))
                .expect("same arity");
        }
        acc
    }

    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let c = self.constant_term();
        if c == T::zero() {
            return Err(EvalError::Domain {
                func: "division",
                arg: 0.0,
            }
            .into());
        }
        let k = self.order as usize;
        // 1/(c+t) = sum (-1)^m t^m / c^(m+1)
        let mut coeffs = Vec::with_capacity(k + 1);
        let mut term = T::one() / c;
        for _ in 0..=k {
            coeffs.push(term);
            term = -term / c;
        }
        Ok(self.compose(&coeffs))
    }

    pub fn apply(&self, f: Func) -> Result<Self, SeriesError> {
        let coeffs = taylor_coefficients(f, self.constant_term(), self.order as usize)?;
        Ok(self.compose(&coeffs))
    }
}

impl<T: Scalar> fmt::Display for TruncatedSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            for (v, &p) in e.0.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{p}", v + 1)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord<T> {
    exp: Vec<u32>,
    coef: T,
}

#[derive(Serialize, Deserialize)]
struct SeriesRecord<T> {
    arity: usize,
    order: u32,
    terms: Vec<TermRecord<T>>,
}

impl<T: Scalar> Serialize for TruncatedSeries<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SeriesRecord {
            arity: self.arity,
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| TermRecord {
                    exp: e.0.clone(),
                    coef: c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for TruncatedSeries<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rec = SeriesRecord::<T>::deserialize(d)?;
        for t in &rec.terms {
            let deg: u32 = t.exp.iter().sum();
            if deg > rec.order {
                return Err(serde::de::Error::custom(format!(
                    "term {:?} exceeds order {}",
                    t.exp, rec.order
                )));
            }
        }
        TruncatedSeries::from_terms(
            rec.arity,
            rec.order,
            rec.terms.into_iter().map(|t| (t.exp, t.coef)),
        )
        .map_err(serde::de::Error::custom)
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, i| acc * i as f64)
}

/// Taylor coefficients `F^(m)(c) / m!`, `m = 0..=k`, of an elementary
/// function around `c`.
pub fn taylor_coefficients<T: Scalar>(f: Func, c: T, k: usize) -> Result<Vec<T>, EvalError> {
    let inv_fact = |m: usize| T::lit(1.0 / factorial(m));
    let mut a = Vec::with_capacity(k + 1);
    match f {
        Func::Exp => {
            let e = c.exp();
            a.extend((0..=k).map(|m| e * inv_fact(m)));
        }
        Func::Sin | Func::Cos => {
            let (s, co) = (c.sin(), c.cos());
            let cycle = if f == Func::Sin {
                [s, co, -s, -co]
            } else {
                [co, -s, -co, s]
            };
            a.extend((0..=k).map(|m| cycle[m % 4] * inv_fact(m)));
        }
        Func::Sinh | Func::Cosh => {
            let (sh, ch) = (c.sinh(), c.cosh());
            let (even, odd) = if f == Func::Sinh { (sh, ch) } else { (ch, sh) };
            a.extend((0..=k).map(|m| if m % 2 == 0 { even } else { odd } * inv_fact(m)));
        }
        Func::Log => {
            if c <= T::zero() {
                return Err(EvalError::Domain {
                    func: "log",
                    arg: c.to_f64_lossy(),
                });
            }
            a.push(c.ln());
            let mut pow = T::one();
            for m in 1..=k {
                pow *= c;
                let sign = if m % 2 == 1 { T::one() } else { -T::one() };
                a.push(sign / (T::lit(m as f64) * pow));
            }
        }
        Func::Sqrt => {
            if c <= T::zero() {
                return Err(EvalError::Domain {
                    func: "sqrt",
                    arg: c.to_f64_lossy(),
                });
            }
            let root = c.sqrt();
            let mut binom = T::one();
            let mut pow = T::one();
            a.push(root);
            for m in 1..=k {
                binom = binom * (T::lit(0.5) - T::lit((m - 1) as f64)) / T::lit(m as f64);
                pow *= c;
                a.push(binom * root / pow);
            }
        }
        Func::Tan => {
            if c.cos() == T::zero() {
                return Err(EvalError::Domain {
                    func: "tan",
                    arg: c.to_f64_lossy(),
                });
            }
            // tan' = 1 + tan^2
            a.push(c.tan());
            for m in 0..k {
                let mut s: T = (0..=m).map(|i| a[i] * a[m - i]).sum();
                if m == 0 {
                    s += T::one();
                }
                a.push(s / T::lit((m + 1) as f64));
            }
        }
        Func::Atan => {
            // atan' = 1/(q0 + q1 t + t^2) around c
            let q0 = T::one() + c * c;
            let q1 = c + c;
            let mut r: Vec<T> = Vec::with_capacity(k);
            for m in 0..k {
                let v = match m {
                    0 => T::one() / q0,
                    1 => -(q1 * r[0]) / q0,
                    _ => -(q1 * r[m - 1] + r[m - 2]) / q0,
                };
                r.push(v);
            }
            a.push(c.atan());
            for (m, rm) in r.into_iter().enumerate() {
                a.push(rm / T::lit((m + 1) as f64));
            }
        }
    }
    Ok(a)
}

struct SeriesDomain<T> {
    arity: usize,
    order: u32,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Scalar> Domain for SeriesDomain<T> {
    type Value = TruncatedSeries<T>;

    fn constant(&self, c: f64) -> Self::Value {
        TruncatedSeries::constant(self.arity, self.order, T::lit(c))
    }

    fn var(&self, index: usize) -> Self::Value {
        TruncatedSeries::variable(self.arity, self.order, index)
    }

    fn neg(&self, a: Self::Value) -> Self::Value {
        a.neg()
    }

    fn add(&self, a: Self::Value, b: Self::Value) -> Self::Value {
        a.add(&b).expect("same arity")
    }

    fn sub(&self, a: Self::Value, b: Self::Value) -> Self::Value {
        a.sub(&b).expect("same arity")
    }

    fn mul(&self, a: Self::Value, b: Self::Value) -> Self::Value {
        a.mul_unchecked(&b)
    }

    fn div(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, EvalError> {
        let r = b.reciprocal().map_err(|e| match e {
            SeriesError::Domain(d) => d,
            _ => unreachable!("reciprocal only fails on the domain"),
        })?;
        Ok(a.mul_unchecked(&r))
    }

    fn powi(&self, a: Self::Value, e: u32) -> Self::Value {
        a.powu(e)
    }

    fn call(&self, f: Func, a: Self::Value) -> Result<Self::Value, EvalError> {
        a.apply(f).map_err(|e| match e {
            SeriesError::Domain(d) => d,
            _ => unreachable!("composition only fails on the domain"),
        })
    }
}

/// Taylor polynomials of order `k` at the origin, one per component.
pub fn taylor<T: Scalar>(f: &AnalyticMap, k: u32) -> Result<Vec<TruncatedSeries<T>>, SeriesError> {
    let dom = SeriesDomain::<T> {
        arity: f.arity(),
        order: k,
        _scalar: std::marker::PhantomData,
    };
    f.components()
        .iter()
        .map(|c| fold(c, &dom).map_err(SeriesError::from))
        .collect()
}

pub fn series_mul<T: Scalar>(
    a: &TruncatedSeries<T>,
    b: &TruncatedSeries<T>,
) -> Result<TruncatedSeries<T>, SeriesError> {
    a.mul(b)
}

fn monomial(e: &MultiIndex) -> Option<Expr> {
    let mut out: Option<Expr> = None;
    for (i, &p) in e.0.iter().enumerate() {
        let factor = match p {
            0 => continue,
            1 => Expr::Var(i),
            _ => Expr::Pow(Box::new(Expr::Var(i)), p),
        };
        out = Some(match out {
            None => factor,
            Some(acc) => Expr::Mul(Box::new(acc), Box::new(factor)),
        });
    }
    out
}

/// Polynomial map whose components are the given series. An empty series
/// becomes the literal zero component, which [`AnalyticMap::is_zero`]
/// reports as degenerate.
///
/// Panics if `series` is empty or arities differ.
pub fn to_map<T: Scalar>(series: &[TruncatedSeries<T>]) -> AnalyticMap {
    assert!(!series.is_empty(), "to_map needs at least one component");
    let arity = series[0].arity;
    let comps = series
        .iter()
        .map(|s| {
            assert_eq!(s.arity, arity, "series arities differ");
            let mut acc: Option<Expr> = None;
            for (e, &c) in &s.terms {
                let c = c.to_f64_lossy();
                let mag = c.abs();
                let body = match monomial(e) {
                    None => Expr::Num(mag),
                    Some(m) if mag == 1.0 => m,
                    Some(m) => Expr::Mul(Box::new(Expr::Num(mag)), Box::new(m)),
                };
                acc = Some(match (acc, c < 0.0) {
                    (None, false) => body,
                    (None, true) => Expr::Neg(Box::new(body)),
                    (Some(a), false) => Expr::Add(Box::new(a), Box::new(body)),
                    (Some(a), true) => Expr::Sub(Box::new(a), Box::new(body)),
                });
            }
            acc.unwrap_or(Expr::Num(0.0))
        })
        .collect();
    AnalyticMap::from_components(arity, comps)
}

/// `T^k f` as an [`AnalyticMap`].
pub fn truncate_map(f: &AnalyticMap, k: u32) -> Result<AnalyticMap, SeriesError> {
    Ok(to_map(&taylor::<f64>(f, k)?))
}
