//! The deformation retraction of `Spec R[T1,T2]/(T1^N1 T2^N2 - t)` onto its
//! skeleton, evaluated exactly.
//!
//! For a point `x` with coordinates `x1, x2` and a polynomial `f`, write
//! `V^j f(x1 V^M2, x2 V^-M1) = sum_i c_i (V - 1)^i`. At flow time `s`
//! (radius `exp(-s)`) the valuation of `f` at `H(x, s)` is
//! `min_i (v(c_i) + i s)`. Time `s = inf` is the identity and `s = 0` is
//! the retraction onto the skeleton.
//!
//! Rigid points may have coordinates in `K(t^(1/e))`; such coordinates are
//! stored as rational functions in `u = t^(1/e)` and valuations are divided
//! by `e`. Points of the skeleton are handled through [`TwistedElement`]s,
//! which model the residue field of a monomial point.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComponentSpec, ModelDescription, MonomialPointData, StratumSpec};
use crate::field::{qi, BaseElement, ExtendedValue, UniPoly, Q};
use crate::monoval::MultivariatePoly;
use crate::parse::ParseError;

/// Stratum id of the intersection point of `E1` and `E2`.
pub const EDGE: &str = "O";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("multiplicities must be positive (got N1 = {0}, N2 = {1})")]
    NonPositiveMultiplicity(i64, i64),
    #[error("ramification index must be positive")]
    ZeroRamification,
    #[error("point does not satisfy x1^{n1} * x2^{n2} = t")]
    RelationViolated { n1: u32, n2: u32 },
    #[error("coordinate x{coordinate} has negative valuation {valuation}; the point is outside the tube |T1|, |T2| <= 1")]
    OutsideTube { coordinate: u8, valuation: Q },
    #[error("polynomial must be in T1, T2 (arity {0} given)")]
    Arity(usize),
    #[error("edge weights must be nonnegative with alpha1 N1 + alpha2 N2 = 1 (got sum {0})")]
    Normalization(Q),
    #[error("monomial data must live on E1, E2 or {EDGE}, got {0}")]
    UnknownStratum(String),
    #[error("flow time must be nonnegative or inf")]
    NegativeTime,
}

/// `Spec R[T1,T2]/(T1^N1 T2^N2 - t)` with `c = gcd(N1, N2)`, `M_i = N_i / c`
/// and a Bezout pair `a1 M1 + a2 M2 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicModel {
    n1: u32,
    n2: u32,
    gcd: u32,
    m1: u32,
    m2: u32,
    a1: i64,
    a2: i64,
}

impl BasicModel {
    pub fn new(n1: i64, n2: i64) -> Result<Self, FlowError> {
        if n1 < 1 || n2 < 1 || n1 > u32::MAX as i64 || n2 > u32::MAX as i64 {
            return Err(FlowError::NonPositiveMultiplicity(n1, n2));
        }
        let c = n1.gcd(&n2);
        let (m1, m2) = (n1 / c, n2 / c);
        let eg = m1.extended_gcd(&m2);
        debug_assert_eq!(eg.gcd, 1);
        Ok(BasicModel {
            n1: n1 as u32,
            n2: n2 as u32,
            gcd: c as u32,
            m1: m1 as u32,
            m2: m2 as u32,
            a1: eg.x,
            a2: eg.y,
        })
    }

    pub fn multiplicities(&self) -> (u32, u32) {
        (self.n1, self.n2)
    }

    pub fn gcd(&self) -> u32 {
        self.gcd
    }

    pub fn reduced(&self) -> (u32, u32) {
        (self.m1, self.m2)
    }

    pub fn bezout(&self) -> (i64, i64) {
        (self.a1, self.a2)
    }

    /// The model as a combinatorial description: `E1`, `E2` and the edge `O`.
    pub fn model_description(&self) -> ModelDescription {
        ModelDescription {
            components: vec![
                ComponentSpec {
                    id: "E1".into(),
                    multiplicity: self.n1 as i64,
                },
                ComponentSpec {
                    id: "E2".into(),
                    multiplicity: self.n2 as i64,
                },
            ],
            strata: vec![
                StratumSpec {
                    id: "E1".into(),
                    components: vec!["E1".into()],
                    faces: BTreeMap::new(),
                },
                StratumSpec {
                    id: "E2".into(),
                    components: vec!["E2".into()],
                    faces: BTreeMap::new(),
                },
                StratumSpec {
                    id: EDGE.into(),
                    components: vec!["E1".into(), "E2".into()],
                    faces: [("E1".into(), "E2".into()), ("E2".into(), "E1".into())].into(),
                },
            ],
        }
    }

    /// The relation monomial `T1^N1 T2^N2` as an exponent.
    pub fn relation_exponent(&self) -> [u32; 2] {
        [self.n1, self.n2]
    }

    /// Reduce `f` modulo `T1^N1 T2^N2 = t`.
    pub fn reduce(&self, f: &MultivariatePoly) -> MultivariatePoly {
        f.reduce_by_relation(&self.relation_exponent(), &BaseElement::t())
    }

    /// Read weights `(alpha1, alpha2)` off monomial data on `E1`, `E2` or `O`.
    pub fn edge_weights(&self, d: &MonomialPointData) -> Result<(Q, Q), FlowError> {
        let allowed: &[&str] = match d.stratum.as_str() {
            "E1" => &["E1"],
            "E2" => &["E2"],
            EDGE => &["E1", "E2"],
            other => return Err(FlowError::UnknownStratum(other.to_string())),
        };
        if d.alpha.keys().any(|k| !allowed.contains(&k.as_str())) {
            return Err(FlowError::UnknownStratum(d.stratum.clone()));
        }
        let get = |k: &str| d.alpha.get(k).cloned().unwrap_or_else(Q::zero);
        let alpha = (get("E1"), get("E2"));
        self.check_weights(&alpha)?;
        Ok(alpha)
    }

    fn check_weights(&self, (a1, a2): &(Q, Q)) -> Result<(), FlowError> {
        let sum = a1 * qi(self.n1 as i64) + a2 * qi(self.n2 as i64);
        if a1.is_negative() || a2.is_negative() || !sum.is_one() {
            return Err(FlowError::Normalization(sum));
        }
        Ok(())
    }
}

/// Flow time `s = -ln(radius)`; `inf` is the identity end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowTime {
    Finite(Q),
    Infinity,
}

impl FlowTime {
    pub fn finite(s: Q) -> Result<Self, FlowError> {
        if s.is_negative() {
            return Err(FlowError::NegativeTime);
        }
        Ok(FlowTime::Finite(s))
    }

    pub fn zero() -> Self {
        FlowTime::Finite(Q::zero())
    }
}

impl FromStr for FlowTime {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        match s.parse::<ExtendedValue>()? {
            ExtendedValue::Infinity => Ok(FlowTime::Infinity),
            ExtendedValue::Finite(v) if !v.is_negative() => Ok(FlowTime::Finite(v)),
            ExtendedValue::Finite(_) => Err(ParseError::BadRational(s.to_string())),
        }
    }
}

impl fmt::Display for FlowTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowTime::Finite(v) => write!(f, "{v}"),
            FlowTime::Infinity => f.write_str("inf"),
        }
    }
}

/// A point of the generic fiber with `|T1|, |T2| <= 1` and coordinates in
/// `K(t^(1/e))`, written in `u = t^(1/e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidPoint {
    x1: BaseElement,
    x2: BaseElement,
    ramification: u32,
}

impl RigidPoint {
    /// A `K`-rational point.
    pub fn new(bm: &BasicModel, x1: BaseElement, x2: BaseElement) -> Result<Self, FlowError> {
        Self::over_extension(bm, x1, x2, 1)
    }

    /// A point over `K(u)`, `u^e = t`; `x1, x2` are rational functions in `u`.
    pub fn over_extension(bm: &BasicModel, x1: BaseElement, x2: BaseElement, e: u32) -> Result<Self, FlowError> {
        if e == 0 {
            return Err(FlowError::ZeroRamification);
        }
        let lhs = &x1.pow(bm.n1 as i64).expect("nonnegative") * &x2.pow(bm.n2 as i64).expect("nonnegative");
        if lhs != BaseElement::t_pow(e as i64) {
            return Err(FlowError::RelationViolated { n1: bm.n1, n2: bm.n2 });
        }
        let p = RigidPoint { x1, x2, ramification: e };
        let (v1, v2) = p.coordinate_valuations();
        for (coordinate, valuation) in [(1, v1), (2, v2)] {
            if valuation.is_negative() {
                return Err(FlowError::OutsideTube { coordinate, valuation });
            }
        }
        Ok(p)
    }

    pub fn coordinates(&self) -> (&BaseElement, &BaseElement) {
        (&self.x1, &self.x2)
    }

    pub fn ramification(&self) -> u32 {
        self.ramification
    }

    /// Name of the variable the coordinates are written in.
    pub fn variable(&self) -> &'static str {
        if self.ramification == 1 {
            "t"
        } else {
            "u"
        }
    }

    /// Valuation of an element of `K(u)`, normalized so that `v(t) = 1`.
    pub fn normalized_valuation(&self, x: &BaseElement) -> ExtendedValue {
        x.valuation().scale(&Q::new(BigInt::one(), BigInt::from(self.ramification)))
    }

    pub fn coordinate_valuations(&self) -> (Q, Q) {
        let v = |x: &BaseElement| {
            self.normalized_valuation(x)
                .finite()
                .cloned()
                .expect("coordinates are nonzero")
        };
        (v(&self.x1), v(&self.x2))
    }

    /// `f(x1, x2)` as an element of `K(u)`.
    pub fn evaluate(&self, f: &MultivariatePoly) -> BaseElement {
        let e = self.ramification as usize;
        let lifted = MultivariatePoly::from_terms(f.arity(), f.terms().map(|(b, c)| (b.clone(), c.inflate(e))));
        lifted.evaluate(&[self.x1.clone(), self.x2.clone()])
    }

    /// Valuation of `f` at the point itself.
    pub fn valuation_of(&self, f: &MultivariatePoly) -> ExtendedValue {
        self.normalized_valuation(&self.evaluate(f))
    }
}

/// An element `sum d_pq x1^p x2^q` of the residue field of a monomial point,
/// kept in the normal form `0 <= p < N1` using `x1^N1 x2^N2 = t`. Distinct
/// normal-form monomials are independent over `K`, so the valuation is the
/// minimum over terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistedElement {
    n1: u32,
    n2: u32,
    terms: BTreeMap<(u32, i64), BaseElement>,
}

impl TwistedElement {
    pub fn zero(bm: &BasicModel) -> Self {
        TwistedElement {
            n1: bm.n1,
            n2: bm.n2,
            terms: BTreeMap::new(),
        }
    }

    /// `d * x1^p * x2^q`, normalized.
    pub fn monomial(bm: &BasicModel, p: i64, q: i64, d: BaseElement) -> Self {
        let mut out = Self::zero(bm);
        out.add_monomial(p, q, d);
        out
    }

    fn add_monomial(&mut self, p: i64, q: i64, d: BaseElement) {
        if d.is_zero() {
            return;
        }
        let k = Integer::div_floor(&p, &(self.n1 as i64));
        let key = ((p - k * self.n1 as i64) as u32, q - k * self.n2 as i64);
        let d = &d * &BaseElement::t_pow(k);
        match self.terms.get_mut(&key) {
            Some(existing) => {
                let sum = &*existing + &d;
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(key, d);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&(p, q), d) in &rhs.terms {
            out.add_monomial(p as i64, q, d.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return TwistedElement {
                terms: BTreeMap::new(),
                ..self.clone()
            };
        }
        let c = BaseElement::constant(c.clone());
        TwistedElement {
            terms: self.terms.iter().map(|(k, d)| (*k, d * &c)).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = TwistedElement {
            terms: BTreeMap::new(),
            ..self.clone()
        };
        for (&(p1, q1), d1) in &self.terms {
            for (&(p2, q2), d2) in &rhs.terms {
                out.add_monomial(p1 as i64 + p2 as i64, q1 + q2, d1 * d2);
            }
        }
        out
    }

    /// Valuation at the monomial point with `v(x1) = alpha1`, `v(x2) = alpha2`.
    pub fn valuation(&self, alpha: &(Q, Q)) -> ExtendedValue {
        self.terms
            .iter()
            .map(|(&(p, q), d)| {
                d.valuation() + ExtendedValue::Finite(&alpha.0 * qi(p as i64) + &alpha.1 * qi(q))
            })
            .min()
            .unwrap_or(ExtendedValue::Infinity)
    }
}

impl fmt::Display for TwistedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(p, q), d)| {
                let mut s = format!("({d})");
                if p != 0 {
                    s.push_str(&format!("*x1^{p}"));
                }
                if q != 0 {
                    s.push_str(&format!("*x2^({q})"));
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// One Taylor coefficient `c_i` with its valuation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub i: usize,
    #[serde(rename = "vK", with = "crate::serial::ext_str")]
    pub valuation: ExtendedValue,
    #[serde(rename = "c")]
    pub coefficient: String,
}

/// The value of `f` along the flow together with the expansion it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowExpansion {
    #[serde(with = "crate::serial::ext_str")]
    pub value: ExtendedValue,
    /// Power of `V` used to clear denominators.
    pub shift: i64,
    pub terms: Vec<ExpansionTerm>,
}

impl FlowExpansion {
    /// Re-evaluate the same expansion at another time.
    pub fn value_at(&self, s: &FlowTime) -> ExtendedValue {
        min_over_terms(self.terms.iter().map(|t| (t.i, &t.valuation)), s)
    }
}

fn min_over_terms<'a>(terms: impl Iterator<Item = (usize, &'a ExtendedValue)>, s: &FlowTime) -> ExtendedValue {
    terms
        .map(|(i, v)| match s {
            FlowTime::Finite(s) => v.clone() + ExtendedValue::Finite(s * qi(i as i64)),
            FlowTime::Infinity if i == 0 => v.clone(),
            FlowTime::Infinity => ExtendedValue::Infinity,
        })
        .min()
        .unwrap_or(ExtendedValue::Infinity)
}

fn binomial(n: usize, k: usize) -> Q {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Q::from_integer(acc)
}

/// Terms `(p, q, d)` of `f` grouped by the exponent of `V` they land on.
type Groups = BTreeMap<usize, Vec<(u32, u32, BaseElement)>>;

/// Substitute `T1 -> x1 V^M2`, `T2 -> x2 V^-M1` term by term and return the
/// shift `j` and the map `k -> [(p, q, d)]` of exponents of `V` after
/// multiplying by `V^j`.
fn substitute(bm: &BasicModel, f: &MultivariatePoly) -> Result<(i64, Groups), FlowError> {
    if f.arity() != 2 {
        return Err(FlowError::Arity(f.arity()));
    }
    let vexp = |e: &[u32]| e[0] as i64 * bm.m2 as i64 - e[1] as i64 * bm.m1 as i64;
    let shift = f.terms().map(|(e, _)| -vexp(e)).max().unwrap_or(0).max(0);
    let mut out: BTreeMap<usize, Vec<(u32, u32, BaseElement)>> = BTreeMap::new();
    for (e, d) in f.terms() {
        let k = (vexp(e) + shift) as usize;
        out.entry(k).or_default().push((e[0], e[1], d.clone()));
    }
    Ok((shift, out))
}

/// Taylor coefficients at `V = 1` of `sum_k b_k V^k`.
fn taylor<C>(b: &BTreeMap<usize, C>, zero: impl Fn() -> C, axpy: impl Fn(&C, &Q, &C) -> C) -> Vec<C> {
    let top = b.keys().next_back().copied().unwrap_or(0);
    (0..=top)
        .map(|i| {
            b.range(i..)
                .fold(zero(), |acc, (&k, bk)| axpy(&acc, &binomial(k, i), bk))
        })
        .collect()
}

/// Valuation of `f` at `H(x, s)` for a rigid point `x`.
///
/// All terms are brought over one common denominator `D` (with `D(0) != 0`)
/// and the expansion is done on numerators, so no polynomial gcd is needed
/// until the coefficients are printed.
pub fn flow_value(bm: &BasicModel, x: &RigidPoint, s: &FlowTime, f: &MultivariatePoly) -> Result<FlowExpansion, FlowError> {
    let (shift, groups) = substitute(bm, f)?;
    let e = x.ramification as usize;
    // Each denominator is a product of powers of a few atoms: the
    // denominators of the coefficients and of x1, x2. The common
    // denominator takes every atom to its largest exponent.
    let mut atoms: Vec<(UniPoly, u32)> = Vec::new();
    let mut raw = Vec::new();
    for (k, terms) in groups {
        for (p, q, d) in terms {
            let d = d.inflate(e);
            let (o0, n0, d0) = d.parts();
            let (o1, n1, d1) = x.x1.parts();
            let (o2, n2, d2) = x.x2.parts();
            let mut own: Vec<(usize, u32)> = Vec::new();
            for (atom, exp) in [(d0, 1), (d1, p), (d2, q)] {
                if exp == 0 || atom.degree() == Some(0) {
                    continue;
                }
                let idx = atoms.iter().position(|(a, _)| a == atom).unwrap_or_else(|| {
                    atoms.push((atom.clone(), 0));
                    atoms.len() - 1
                });
                match own.iter_mut().find(|(i, _)| *i == idx) {
                    Some((_, x)) => *x += exp,
                    None => own.push((idx, exp)),
                }
            }
            for &(i, x) in &own {
                atoms[i].1 = atoms[i].1.max(x);
            }
            let num = &(n0 * &n1.pow(p)) * &n2.pow(q);
            raw.push((k, o0 + o1 * p as i64 + o2 * q as i64, num, own));
        }
    }
    let low = raw.iter().map(|r| r.1).min().unwrap_or(0);
    let mut b: BTreeMap<usize, UniPoly> = BTreeMap::new();
    for (k, o, num, own) in raw {
        let cofactor = atoms.iter().enumerate().fold(UniPoly::one(), |acc, (i, (a, max))| {
            let have = own.iter().find(|(j, _)| *j == i).map_or(0, |(_, x)| *x);
            &acc * &a.pow(max - have)
        });
        let term = (&num * &cofactor).shift_up((o - low) as usize);
        let slot = b.entry(k).or_insert_with(UniPoly::zero);
        *slot = &*slot + &term;
    }
    let coeffs = taylor(&b, UniPoly::zero, |acc, c, bk| acc + &bk.scale(c));
    let mut terms = Vec::new();
    for (i, c) in coeffs.into_iter().enumerate() {
        let Some(ord) = c.order() else { continue };
        terms.push(ExpansionTerm {
            i,
            valuation: ExtendedValue::Finite(Q::new(BigInt::from(low + ord as i64), BigInt::from(x.ramification))),
            coefficient: lowest_terms(low + ord as i64, c.shift_down(ord), &atoms).display_in(x.variable()),
        });
    }
    let value = min_over_terms(terms.iter().map(|t| (t.i, &t.valuation)), s);
    Ok(FlowExpansion { value, shift, terms })
}

/// `t^order * num / prod a^m` in canonical form, cancelling against one
/// atom at a time.
fn lowest_terms(order: i64, mut num: UniPoly, atoms: &[(UniPoly, u32)]) -> BaseElement {
    let mut den = UniPoly::one();
    for (a, m) in atoms {
        // a^m = prod_steps h * (a / h); each h leaves num and den together.
        let mut kept = UniPoly::one();
        for step in 0..*m {
            let h = num.gcd(a);
            if h.degree() == Some(0) {
                kept = &kept * &a.pow(m - step);
                break;
            }
            num = num.div_rem(&h).0;
            kept = &kept * &a.div_rem(&h).0;
        }
        den = &den * &kept;
    }
    BaseElement::from_coprime_parts(order, num, den)
}

/// Valuation of `f` at `H(x, s)` for the monomial point `x` with
/// `v(T1) = alpha1`, `v(T2) = alpha2`. The result does not depend on `s`.
pub fn flow_value_monomial(
    bm: &BasicModel,
    alpha: &(Q, Q),
    s: &FlowTime,
    f: &MultivariatePoly,
) -> Result<FlowExpansion, FlowError> {
    bm.check_weights(alpha)?;
    let (shift, groups) = substitute(bm, f)?;
    let b: BTreeMap<usize, TwistedElement> = groups
        .into_iter()
        .map(|(k, terms)| {
            let mut acc = TwistedElement::zero(bm);
            for (p, q, d) in terms {
                acc.add_monomial(p as i64, q as i64, d);
            }
            (k, acc)
        })
        .collect();
    let coeffs = taylor(&b, || TwistedElement::zero(bm), |acc, c, bk| acc.add(&bk.scale(c)));
    let terms: Vec<ExpansionTerm> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| ExpansionTerm {
            i,
            valuation: c.valuation(alpha),
            coefficient: c.to_string(),
        })
        .collect();
    let value = min_over_terms(terms.iter().map(|t| (t.i, &t.valuation)), s);
    Ok(FlowExpansion { value, shift, terms })
}

/// The image of `x` under the retraction: the monomial datum
/// `(v(x1), v(x2))` on the edge.
pub fn retract_point(x: &RigidPoint) -> MonomialPointData {
    let (a1, a2) = x.coordinate_valuations();
    MonomialPointData {
        stratum: EDGE.to_string(),
        alpha: [("E1".to_string(), a1), ("E2".to_string(), a2)].into(),
    }
}
