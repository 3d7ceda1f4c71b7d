//! The base field `K = Q(t)` with its `t`-adic valuation.
//!
//! Elements are stored as `t^order * num / den` where `num` and `den` are
//! coprime polynomials over `Q` with nonzero constant terms and `den(0) = 1`.
//! This form is unique, so structural equality is field equality and the
//! valuation is just `order`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::parse::{self, Expr, ParseError};

/// Exact rational numbers.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero in K")]
    DivisionByZero,
}

/// Dense univariate polynomial over `Q`, coefficients stored low degree first
/// with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<Q>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `c * x^k`.
    pub fn monomial(c: Q, k: usize) -> Self {
        let mut coeffs = vec![Q::zero(); k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Q> {
        self.coeffs.last()
    }

    /// Order of vanishing at zero; `None` for the zero polynomial.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub(crate) fn shift_down(&self, k: usize) -> Self {
        UniPoly::from_coeffs(self.coeffs[k..].to_vec())
    }

    /// Multiply by `x^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Q::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        UniPoly { coeffs }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(UniPoly::one(), |acc, _| &acc * self)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return UniPoly::zero();
        }
        UniPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// `p(x^e)`.
    pub fn inflate(&self, e: usize) -> Self {
        if e == 1 || self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![Q::zero(); (self.coeffs.len() - 1) * e + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * e] = c.clone();
        }
        UniPoly { coeffs }
    }

    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lead_inv = divisor.leading().unwrap().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![Q::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if !c.is_zero() {
                for (i, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + i] -= &c * d;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (UniPoly::from_coeffs(quot), UniPoly::from_coeffs(rem))
    }

    /// Monic greatest common divisor (zero iff both inputs are zero).
    ///
    /// Runs a primitive pseudo-remainder sequence on integer coefficients;
    /// plain Euclid over `Q` blows up on high degrees.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            let a = if self.is_zero() { other } else { self };
            return match a.leading() {
                Some(l) => a.scale(&l.recip()),
                None => a.clone(),
            };
        }
        if self.degree() == Some(0) || other.degree() == Some(0) {
            return UniPoly::one();
        }
        // One exact step over Q first: cheap, and it brings a large input
        // down to below the degree of a small one.
        let (big, small) = if self.coeffs.len() >= other.coeffs.len() { (self, other) } else { (other, self) };
        let r = big.div_rem(small).1;
        let mut a = primitive_integer(&small.coeffs);
        let mut b = if r.is_zero() { Vec::new() } else { primitive_integer(&r.coeffs) };
        while !b.is_empty() {
            let r = pseudo_remainder(&a, &b);
            a = b;
            b = if r.is_empty() { r } else { primitive_part(r) };
        }
        let lead = Q::from_integer(a.last().expect("nonzero gcd").clone());
        UniPoly::from_coeffs(a.into_iter().map(|c| Q::from_integer(c) / &lead).collect())
    }
}

/// Clear denominators and remove the content.
fn primitive_integer(coeffs: &[Q]) -> Vec<BigInt> {
    let l = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    primitive_part(coeffs.iter().map(|c| c.numer() * (&l / c.denom())).collect())
}

fn primitive_part(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in &mut v {
            *c /= &g;
        }
    }
    v
}

/// Remainder of `lc(b)^k a` by `b`; coefficient vectors are low degree
/// first with no trailing zeros, the result likewise (empty for zero).
fn pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let lb = b.last().expect("nonzero divisor");
    let mut r = a.to_vec();
    while r.len() >= b.len() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - b.len();
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &lr * c;
        }
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    r
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        UniPoly::from_coeffs(coeffs)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self + &(-rhs)
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(coeffs)
    }
}

/// Value of a valuation: a rational number or `+inf`.
///
/// The derived order puts every finite value below `Infinity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedValue {
    Finite(Q),
    Infinity,
}

impl ExtendedValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedValue::Infinity)
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtendedValue::Finite(v) => Some(v),
            ExtendedValue::Infinity => None,
        }
    }

    /// Multiply a finite value by a nonnegative rational; `inf` stays `inf`.
    pub fn scale(&self, c: &Q) -> ExtendedValue {
        match self {
            ExtendedValue::Finite(v) => ExtendedValue::Finite(v * c),
            ExtendedValue::Infinity => ExtendedValue::Infinity,
        }
    }
}

impl From<Q> for ExtendedValue {
    fn from(v: Q) -> Self {
        ExtendedValue::Finite(v)
    }
}

impl Add for ExtendedValue {
    type Output = ExtendedValue;
    fn add(self, rhs: ExtendedValue) -> ExtendedValue {
        match (self, rhs) {
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => ExtendedValue::Finite(a + b),
            _ => ExtendedValue::Infinity,
        }
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::Finite(v) => write!(f, "{v}"),
            ExtendedValue::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtendedValue {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ExtendedValue::Infinity);
        }
        parse_rational(s).map(ExtendedValue::Finite)
    }
}

/// Parse `"p"` or `"p/q"` exactly. Decimals are rejected.
pub fn parse_rational(s: &str) -> Result<Q, ParseError> {
    let s = s.trim();
    let bad = || ParseError::BadRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

/// An element of `K = Q(t)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseElement {
    order: i64,
    num: UniPoly,
    den: UniPoly,
}

impl BaseElement {
    pub fn zero() -> Self {
        BaseElement {
            order: 0,
            num: UniPoly::zero(),
            den: UniPoly::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::from_parts(0, UniPoly::constant(c), UniPoly::one())
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(qi(n))
    }

    /// The uniformizer `t`.
    pub fn t() -> Self {
        Self::t_pow(1)
    }

    pub fn t_pow(k: i64) -> Self {
        BaseElement {
            order: k,
            num: UniPoly::one(),
            den: UniPoly::one(),
        }
    }

    pub fn polynomial(p: UniPoly) -> Self {
        Self::from_parts(0, p, UniPoly::one())
    }

    /// `num / den` as polynomials in `t`.
    pub fn ratio(num: UniPoly, den: UniPoly) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::from_parts(0, num, den))
    }

    /// `t^order * num / den` for coprime `num`, `den` with nonzero constant
    /// terms; skips the gcd.
    pub(crate) fn from_coprime_parts(order: i64, num: UniPoly, den: UniPoly) -> Self {
        let c = den.coeffs()[0].recip();
        BaseElement {
            order,
            num: num.scale(&c),
            den: den.scale(&c),
        }
    }

    /// Canonicalize `t^order * num / den` (den nonzero).
    fn from_parts(order: i64, num: UniPoly, den: UniPoly) -> Self {
        let Some(num_ord) = num.order() else {
            return Self::zero();
        };
        let den_ord = den.order().expect("zero denominator");
        let num = num.shift_down(num_ord);
        let den = den.shift_down(den_ord);
        let order = order + num_ord as i64 - den_ord as i64;
        let g = num.gcd(&den);
        let (num, den) = if g.degree() == Some(0) {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        // den(0) != 0 after removing powers of t; scale it to 1.
        let c = den.coeffs()[0].recip();
        BaseElement {
            order,
            num: num.scale(&c),
            den: den.scale(&c),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The `t`-adic valuation; `+inf` at zero.
    pub fn valuation(&self) -> ExtendedValue {
        match self.order_of_vanishing() {
            Some(k) => ExtendedValue::Finite(qi(k)),
            None => ExtendedValue::Infinity,
        }
    }

    /// The canonical triple `(order, num, den)` with `self = t^order * num / den`.
    pub fn parts(&self) -> (i64, &UniPoly, &UniPoly) {
        (self.order, &self.num, &self.den)
    }

    /// Integer valuation of a nonzero element.
    pub fn order_of_vanishing(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.order)
    }

    /// The constant term of the unit part, i.e. the leading `t`-adic
    /// coefficient. Zero for the zero element.
    pub fn leading_coefficient(&self) -> Q {
        if self.is_zero() {
            Q::zero()
        } else {
            self.num.coeffs()[0].clone()
        }
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.is_zero() {
            return Some(Q::zero());
        }
        (self.order == 0 && self.num.degree() == Some(0) && self.den.degree() == Some(0))
            .then(|| self.num.coeffs()[0].clone())
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::from_parts(-self.order, self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, rhs: &BaseElement) -> Result<Self, FieldError> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut acc = BaseElement::one();
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Substitute `t -> t^e`. Used to embed `K` into `K(t^{1/e})`, whose
    /// elements are written in the new uniformizer.
    pub fn inflate(&self, e: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        BaseElement {
            order: self.order * e as i64,
            num: self.num.inflate(e),
            den: self.den.inflate(e),
        }
    }

    /// Parse the text syntax in the variable `t`, e.g. `"t^2*(2+t)/(3+t)"`.
    pub fn parse(s: &str) -> Result<Self, ParseError> {
        Self::parse_in(s, "t")
    }

    /// Parse with a different name for the uniformizer.
    pub fn parse_in(s: &str, var: &str) -> Result<Self, ParseError> {
        let expr = parse::parse_expr(s)?;
        Self::from_expr(&expr, var)
    }

    pub(crate) fn from_expr(expr: &Expr, var: &str) -> Result<Self, ParseError> {
        Ok(match expr {
            Expr::Int(n) => Self::constant(Q::from_integer(n.clone())),
            Expr::Var(name) if name == var => Self::t(),
            Expr::Var(name) => return Err(ParseError::UnknownVariable(name.clone())),
            Expr::Neg(a) => -&Self::from_expr(a, var)?,
            Expr::Add(a, b) => &Self::from_expr(a, var)? + &Self::from_expr(b, var)?,
            Expr::Sub(a, b) => &Self::from_expr(a, var)? - &Self::from_expr(b, var)?,
            Expr::Mul(a, b) => &Self::from_expr(a, var)? * &Self::from_expr(b, var)?,
            Expr::Div(a, b) => Self::from_expr(a, var)?
                .div(&Self::from_expr(b, var)?)
                .map_err(|_| ParseError::DivisionByZero)?,
            Expr::Pow(a, e) => Self::from_expr(a, var)?
                .pow(*e)
                .map_err(|_| ParseError::DivisionByZero)?,
        })
    }

    /// Render using `var` as the name of the uniformizer.
    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let num_is_one = self.num == UniPoly::one();
        let den_is_one = self.den == UniPoly::one();
        let mut factors = Vec::new();
        if self.order != 0 {
            factors.push(power_str(var, self.order));
        }
        if !num_is_one || factors.is_empty() {
            let s = poly_str(&self.num, var);
            let single = self.num.coeffs().iter().filter(|c| !c.is_zero()).count() == 1
                && !s.starts_with('-')
                && !s.contains('/');
            if self.num.degree() == Some(0) && !s.starts_with('-') {
                factors.insert(0, s);
            } else if (factors.is_empty() && den_is_one) || single {
                factors.push(s);
            } else {
                factors.push(format!("({s})"));
            }
        }
        let mut out = factors.join("*");
        if !den_is_one {
            out = format!("{out}/({})", poly_str(&self.den, var));
        }
        out
    }
}

fn power_str(var: &str, k: i64) -> String {
    match k {
        1 => var.to_string(),
        k if k < 0 => format!("{var}^({k})"),
        k => format!("{var}^{k}"),
    }
}

fn poly_str(p: &UniPoly, var: &str) -> String {
    let mut out = String::new();
    for (k, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = if k == 0 {
            None
        } else {
            Some(power_str(var, k as i64))
        };
        match (a.is_one(), mono) {
            (_, None) => out.push_str(&a.to_string()),
            (true, Some(m)) => out.push_str(&m),
            (false, Some(m)) => out.push_str(&format!("{a}*{m}")),
        }
    }
    out
}

impl fmt::Display for BaseElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("t"))
    }
}

impl FromStr for BaseElement {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        Self::parse(s)
    }
}

impl Add for &BaseElement {
    type Output = BaseElement;
    fn add(self, rhs: &BaseElement) -> BaseElement {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (lo, hi) = match self.order.cmp(&rhs.order) {
            Ordering::Greater => (rhs, self),
            _ => (self, rhs),
        };
        let gap = (hi.order - lo.order) as usize;
        if lo.den == hi.den {
            let num = &lo.num + &(&UniPoly::monomial(Q::one(), gap) * &hi.num);
            return BaseElement::from_parts(lo.order, num, lo.den.clone());
        }
        let shifted = &UniPoly::monomial(Q::one(), gap) * &(&hi.num * &lo.den);
        let num = &(&lo.num * &hi.den) + &shifted;
        BaseElement::from_parts(lo.order, num, &lo.den * &hi.den)
    }
}

impl Neg for &BaseElement {
    type Output = BaseElement;
    fn neg(self) -> BaseElement {
        BaseElement {
            order: self.order,
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Sub for &BaseElement {
    type Output = BaseElement;
    fn sub(self, rhs: &BaseElement) -> BaseElement {
        self + &(-rhs)
    }
}

impl Mul for &BaseElement {
    type Output = BaseElement;
    fn mul(self, rhs: &BaseElement) -> BaseElement {
        if self.is_zero() || rhs.is_zero() {
            return BaseElement::zero();
        }
        BaseElement::from_parts(
            self.order + rhs.order,
            &self.num * &rhs.num,
            &self.den * &rhs.den,
        )
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for BaseElement {
            type Output = BaseElement;
            fn $m(self, rhs: BaseElement) -> BaseElement {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for BaseElement {
    type Output = BaseElement;
    fn neg(self) -> BaseElement {
        -&self
    }
}
