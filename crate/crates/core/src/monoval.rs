//! Monomial valuations on `K[T1, ..., Tr]`.
//!
//! For weights `alpha` the valuation of `f = sum d_beta T^beta` is
//! `min_beta (v_K(d_beta) + alpha . beta)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::field::{qi, BaseElement, ExtendedValue, Q};
use crate::parse::{self, Expr, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonovalError {
    #[error("polynomial has arity {poly} but the weights have length {weights}")]
    ArityMismatch { poly: usize, weights: usize },
    #[error("weight alpha_{index} = {value} is negative")]
    NegativeWeight { index: usize, value: Q },
    #[error("{multiplicities} multiplicities for {weights} weights")]
    MultiplicityCount { weights: usize, multiplicities: usize },
    #[error("multiplicity N_{index} must be positive")]
    NonPositiveMultiplicity { index: usize },
    #[error("weights are not normalized: sum alpha_i N_i = {0}, expected 1")]
    NotNormalized(Q),
}

/// Exponent vector of a monomial `T^beta`.
pub type Exponent = Vec<u32>;

/// A polynomial in `T1..Tr` with coefficients in `K`. No zero coefficients
/// are stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultivariatePoly {
    arity: usize,
    terms: BTreeMap<Exponent, BaseElement>,
}

impl MultivariatePoly {
    pub fn zero(arity: usize) -> Self {
        MultivariatePoly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: BaseElement) -> Self {
        Self::monomial(vec![0; arity], c)
    }

    /// The variable `T_{i+1}` (zero-based index `i`).
    pub fn variable(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable index out of range");
        let mut e = vec![0; arity];
        e[i] = 1;
        Self::monomial(e, BaseElement::one())
    }

    pub fn monomial(exponent: Exponent, c: BaseElement) -> Self {
        let mut p = Self::zero(exponent.len());
        if !c.is_zero() {
            p.terms.insert(exponent, c);
        }
        p
    }

    /// Build from a list of terms, merging repeated exponents.
    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Exponent, BaseElement)>) -> Self {
        let mut p = Self::zero(arity);
        for (e, c) in terms {
            assert_eq!(e.len(), arity, "exponent length does not match arity");
            p.add_term(e, &c);
        }
        p
    }

    fn add_term(&mut self, e: Exponent, c: &BaseElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(existing) => {
                let sum = &*existing + c;
                if sum.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BaseElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BaseElement> {
        match self.terms.len() {
            0 => Some(BaseElement::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(e, _)| e.iter().all(|&x| x == 0))
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    /// Whether the variable with zero-based index `i` occurs.
    pub fn involves(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.arity, rhs.arity, "arity mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultivariatePoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.arity, rhs.arity, "arity mismatch");
        let mut out = Self::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, &(c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &BaseElement) -> Self {
        if c.is_zero() {
            return Self::zero(self.arity);
        }
        MultivariatePoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, d)| (e.clone(), d * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.arity, BaseElement::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Keep only the variables listed in `keep` (zero-based, increasing).
    /// Returns `None` if a dropped variable occurs in `self`.
    pub fn restrict(&self, keep: &[usize]) -> Option<Self> {
        let mut out = Self::zero(keep.len());
        for (e, c) in &self.terms {
            let dropped_occurs = (0..self.arity).any(|i| e[i] > 0 && !keep.contains(&i));
            if dropped_occurs {
                return None;
            }
            out.terms.insert(keep.iter().map(|&i| e[i]).collect(), c.clone());
        }
        Some(out)
    }

    /// Insert new variables: variable `i` of `self` becomes variable
    /// `positions[i]` of the result, which has arity `arity`.
    pub fn embed(&self, arity: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.arity);
        let mut out = Self::zero(arity);
        for (e, c) in &self.terms {
            let mut ne = vec![0; arity];
            for (i, &p) in positions.iter().enumerate() {
                ne[p] = e[i];
            }
            out.add_term(ne, c);
        }
        out
    }

    /// Normal form modulo the binomial relation `T^lead = value`: every
    /// monomial divisible by `T^lead` is rewritten until none is.
    pub fn reduce_by_relation(&self, lead: &[u32], value: &BaseElement) -> Self {
        assert_eq!(lead.len(), self.arity);
        assert!(lead.iter().any(|&x| x > 0), "relation must have a nonconstant lead");
        let mut out = Self::zero(self.arity);
        for (e, c) in &self.terms {
            let k = e
                .iter()
                .zip(lead)
                .filter(|(_, &l)| l > 0)
                .map(|(&x, &l)| x / l)
                .min()
                .unwrap_or(0);
            let ne: Exponent = e.iter().zip(lead).map(|(&x, &l)| x - k * l).collect();
            let nc = c * &value.pow(k as i64).expect("nonnegative power");
            out.add_term(ne, &nc);
        }
        out
    }

    /// Substitute `K`-values for every variable.
    pub fn evaluate(&self, values: &[BaseElement]) -> BaseElement {
        assert_eq!(values.len(), self.arity);
        let mut acc = BaseElement::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in values.iter().zip(e) {
                if k > 0 {
                    term = &term * &x.pow(k as i64).expect("nonnegative power");
                }
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Parse `T1..Tr` polynomials with coefficients in the `K` syntax,
    /// e.g. `"t + T1*T2^2"`.
    pub fn parse(s: &str, arity: usize) -> Result<Self, ParseError> {
        let expr = parse::parse_expr(s)?;
        Self::from_expr(&expr, arity)
    }

    fn from_expr(expr: &Expr, arity: usize) -> Result<Self, ParseError> {
        let rec = |e: &Expr| Self::from_expr(e, arity);
        Ok(match expr {
            Expr::Int(n) => Self::constant(arity, BaseElement::constant(Q::from_integer(n.clone()))),
            Expr::Var(name) if name == "t" => Self::constant(arity, BaseElement::t()),
            Expr::Var(name) => {
                let idx = name
                    .strip_prefix('T')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&i| (1..=arity).contains(&i))
                    .ok_or_else(|| ParseError::UnknownVariable(name.clone()))?;
                Self::variable(arity, idx - 1)
            }
            Expr::Neg(a) => rec(a)?.neg(),
            Expr::Add(a, b) => rec(a)?.add(&rec(b)?),
            Expr::Sub(a, b) => rec(a)?.sub(&rec(b)?),
            Expr::Mul(a, b) => rec(a)?.mul(&rec(b)?),
            Expr::Div(a, b) => {
                let d = rec(b)?.as_constant().ok_or(ParseError::NonConstantDivisor)?;
                let inv = d.inv().map_err(|_| ParseError::DivisionByZero)?;
                rec(a)?.scale(&inv)
            }
            Expr::Pow(a, e) => {
                let base = rec(a)?;
                if *e >= 0 {
                    base.pow(*e as u32)
                } else {
                    let c = base.as_constant().ok_or(ParseError::NegativePower)?;
                    let c = c.pow(*e).map_err(|_| ParseError::DivisionByZero)?;
                    Self::constant(arity, c)
                }
            }
        })
    }
}

impl fmt::Display for MultivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("T{}", i + 1)
                    } else {
                        format!("T{}^{}", i + 1, k)
                    }
                })
                .collect();
            match (c == &BaseElement::one(), mono.is_empty()) {
                (_, true) => write!(f, "({c})")?,
                (true, false) => f.write_str(&mono.join("*"))?,
                (false, false) => write!(f, "({c})*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

/// Weights `alpha` for a monomial valuation, optionally tied to
/// multiplicities `N_i` with `sum alpha_i N_i = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialWeights {
    alpha: Vec<Q>,
    multiplicities: Option<Vec<u32>>,
}

impl MonomialWeights {
    /// Free weights: only nonnegativity is enforced.
    pub fn new(alpha: Vec<Q>) -> Result<Self, MonovalError> {
        if let Some((index, value)) = alpha.iter().enumerate().find(|(_, a)| a.is_negative()) {
            return Err(MonovalError::NegativeWeight {
                index,
                value: value.clone(),
            });
        }
        Ok(MonomialWeights {
            alpha,
            multiplicities: None,
        })
    }

    /// Model-normalized weights.
    pub fn normalized(alpha: Vec<Q>, multiplicities: Vec<u32>) -> Result<Self, MonovalError> {
        let mut w = Self::new(alpha)?;
        if multiplicities.len() != w.alpha.len() {
            return Err(MonovalError::MultiplicityCount {
                weights: w.alpha.len(),
                multiplicities: multiplicities.len(),
            });
        }
        if let Some(index) = multiplicities.iter().position(|&n| n == 0) {
            return Err(MonovalError::NonPositiveMultiplicity { index });
        }
        let total: Q = w
            .alpha
            .iter()
            .zip(&multiplicities)
            .map(|(a, &n)| a * qi(n as i64))
            .sum();
        if !total.is_one() {
            return Err(MonovalError::NotNormalized(total));
        }
        w.multiplicities = Some(multiplicities);
        Ok(w)
    }

    pub fn alpha(&self) -> &[Q] {
        &self.alpha
    }

    pub fn multiplicities(&self) -> Option<&[u32]> {
        self.multiplicities.as_deref()
    }

    pub fn arity(&self) -> usize {
        self.alpha.len()
    }

    /// Always true: every representable weight tuple is rational, so the
    /// associated point is divisorial.
    pub fn is_divisorial(&self) -> bool {
        true
    }

    /// Zero-based indices with positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.alpha.len()).filter(|&i| !self.alpha[i].is_zero()).collect()
    }

    /// Drop the coordinates with `alpha_i = 0`.
    pub fn restrict_to_support(&self) -> MonomialWeights {
        let keep = self.support();
        MonomialWeights {
            alpha: keep.iter().map(|&i| self.alpha[i].clone()).collect(),
            multiplicities: self
                .multiplicities
                .as_ref()
                .map(|n| keep.iter().map(|&i| n[i]).collect()),
        }
    }

    /// Evaluate the monomial valuation on `f`.
    pub fn eval(&self, f: &MultivariatePoly) -> Result<ExtendedValue, MonovalError> {
        if f.arity() != self.arity() {
            return Err(MonovalError::ArityMismatch {
                poly: f.arity(),
                weights: self.arity(),
            });
        }
        Ok(f.terms()
            .map(|(beta, d)| {
                let dot: Q = self
                    .alpha
                    .iter()
                    .zip(beta)
                    .filter(|(_, &b)| b > 0)
                    .map(|(a, &b)| a * qi(b as i64))
                    .sum();
                d.valuation() + ExtendedValue::Finite(dot)
            })
            .min()
            .unwrap_or(ExtendedValue::Infinity))
    }
}

/// Free-function form of [`MonomialWeights::eval`].
pub fn eval(w: &MonomialWeights, f: &MultivariatePoly) -> Result<ExtendedValue, MonovalError> {
    w.eval(f)
}
