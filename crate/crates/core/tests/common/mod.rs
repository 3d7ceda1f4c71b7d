#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use sncd::field::{q, qi, UniPoly};
use sncd::{
    build_complex, BaseElement, BasicModel, DualComplex, ExtendedValue, ModelDescription, MonomialWeights,
    MultivariatePoly, PluricanonicalForm, Q, RigidPoint,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn complex(name: &str) -> DualComplex {
    build_complex(&ModelDescription::from_json(&read_fixture(name)).unwrap()).unwrap()
}

pub fn form(name: &str) -> PluricanonicalForm {
    PluricanonicalForm::from_json(&read_fixture(name)).unwrap()
}

/// Model and form fixture pairs used by the weight checks.
pub const PAIRS: &[(&str, &str)] = &[
    ("star-curve.json", "unit-form-4.json"),
    ("planes.json", "unit-form-3.json"),
    ("planes.json", "planes-form-horizontal.json"),
    ("kulikov-k3.json", "kulikov-form.json"),
    ("cycle.json", "unit-form-3.json"),
    ("chain.json", "chain-form-balanced.json"),
    ("chain.json", "chain-form-flat.json"),
    ("disconnected-argmin.json", "unit-form-3.json"),
];

/// A field element kept next to the raw data it was built from, so the
/// valuation can be read off without going through the library.
#[derive(Debug, Clone)]
pub struct RawElement {
    pub shift: i64,
    pub num: Vec<i64>,
    pub den: Vec<i64>,
}

impl RawElement {
    pub fn build(&self) -> BaseElement {
        let poly = |c: &[i64]| UniPoly::from_coeffs(c.iter().map(|&x| qi(x)).collect());
        let r = BaseElement::ratio(poly(&self.num), poly(&self.den)).unwrap();
        &r * &BaseElement::t_pow(self.shift)
    }

    /// Oracle: shift plus the index of the first nonzero numerator
    /// coefficient (the denominator is a unit).
    pub fn valuation(&self) -> ExtendedValue {
        match self.num.iter().position(|&c| c != 0) {
            Some(i) => ExtendedValue::Finite(qi(self.shift + i as i64)),
            None => ExtendedValue::Infinity,
        }
    }
}

pub fn random_raw(rng: &mut impl Rng) -> RawElement {
    let len = rng.gen_range(1..=4);
    let mut num: Vec<i64> = (0..len).map(|_| rng.gen_range(-3..=3)).collect();
    if rng.gen_bool(0.9) && num.iter().all(|&c| c == 0) {
        num[0] = 1;
    }
    let mut den: Vec<i64> = vec![*[1, -1, 2, 3].choose(rng).unwrap()];
    for _ in 0..rng.gen_range(0..=2) {
        den.push(rng.gen_range(-2..=2));
    }
    RawElement {
        shift: rng.gen_range(-2..=3),
        num,
        den,
    }
}

pub fn random_nonzero(rng: &mut impl Rng) -> BaseElement {
    loop {
        let r = random_raw(rng);
        if !r.valuation().is_infinite() {
            return r.build();
        }
    }
}

/// A unit of `Q[[t]]`: `(1 + a t) / (1 + b t)` times a constant.
pub fn random_unit(rng: &mut impl Rng) -> BaseElement {
    let c = *[1, -1, 2, -3].choose(rng).unwrap();
    let num = UniPoly::from_coeffs(vec![qi(c), qi(rng.gen_range(-3..=3))]);
    let den = UniPoly::from_coeffs(vec![qi(1), qi(rng.gen_range(-3..=3))]);
    BaseElement::ratio(num, den).unwrap()
}

pub fn random_poly(rng: &mut impl Rng, arity: usize, max_terms: usize, max_exp: u32) -> MultivariatePoly {
    let n = rng.gen_range(1..=max_terms);
    MultivariatePoly::from_terms(
        arity,
        (0..n).map(|_| {
            let e: Vec<u32> = (0..arity).map(|_| rng.gen_range(0..=max_exp)).collect();
            (e, random_nonzero(rng))
        }),
    )
}

pub fn random_rational(rng: &mut impl Rng, max: i64) -> Q {
    let d = rng.gen_range(1..=12);
    q(rng.gen_range(0..=max * d), d)
}

pub fn random_weights(rng: &mut impl Rng, arity: usize) -> MonomialWeights {
    MonomialWeights::new((0..arity).map(|_| random_rational(rng, 3)).collect()).unwrap()
}

/// Oracle for the monomial valuation: minimum of `v(d) + alpha . beta`
/// computed from the term list.
pub fn monomial_oracle(alpha: &[Q], f: &MultivariatePoly) -> ExtendedValue {
    let mut best = ExtendedValue::Infinity;
    for (beta, d) in f.terms() {
        let v = match d.valuation() {
            ExtendedValue::Finite(v) => v,
            ExtendedValue::Infinity => continue,
        };
        let mut acc = v;
        for (a, &b) in alpha.iter().zip(beta) {
            acc += a * qi(b as i64);
        }
        let cand = ExtendedValue::Finite(acc);
        if cand < best {
            best = cand;
        }
    }
    best
}

/// Random model: simplices chosen as closures of random vertex sets, one
/// stratum per set, plus the occasional second edge over the same pair.
pub fn random_model(rng: &mut impl Rng) -> ModelDescription {
    loop {
        if let Some(m) = try_random_model(rng) {
            return m;
        }
    }
}

fn try_random_model(rng: &mut impl Rng) -> Option<ModelDescription> {
    let n = rng.gen_range(2..=6usize);
    let names: Vec<String> = (1..=n).map(|i| format!("E{i}")).collect();
    let mut sets: BTreeSet<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for _ in 0..rng.gen_range(1..=4) {
        let k = *[2, 2, 3, 3, 4].choose(rng).unwrap();
        if k > n {
            continue;
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        let mut top = idx[..k].to_vec();
        top.sort();
        for mask in 1u32..(1 << k) {
            sets.insert((0..k).filter(|b| mask & (1 << b) != 0).map(|b| top[b]).collect());
        }
    }
    let name_of = |s: &[usize]| -> String {
        if s.len() == 1 {
            names[s[0]].clone()
        } else {
            format!("C{}", s.iter().map(|i| (i + 1).to_string()).collect::<String>())
        }
    };
    let mut strata = Vec::new();
    for s in &sets {
        let faces: BTreeMap<String, String> = if s.len() == 1 {
            BTreeMap::new()
        } else {
            s.iter()
                .map(|&j| {
                    let rest: Vec<usize> = s.iter().copied().filter(|&i| i != j).collect();
                    (names[j].clone(), name_of(&rest))
                })
                .collect()
        };
        strata.push(serde_json::json!({
            "id": name_of(s),
            "components": s.iter().map(|&i| names[i].clone()).collect::<Vec<_>>(),
            "faces": faces,
        }));
    }
    // A second edge over a pair that bounds no triangle.
    let lonely: Vec<&Vec<usize>> = sets
        .iter()
        .filter(|s| s.len() == 2 && !sets.iter().any(|t| t.len() == 3 && s.iter().all(|i| t.contains(i))))
        .collect();
    if let Some(e) = lonely.choose(rng).filter(|_| rng.gen_bool(0.3)) {
        strata.push(serde_json::json!({
            "id": format!("{}b", name_of(e)),
            "components": [names[e[0]].clone(), names[e[1]].clone()],
            "faces": { names[e[0]].clone(): names[e[1]].clone(), names[e[1]].clone(): names[e[0]].clone() },
        }));
    }
    if strata.len() > 15 {
        return None;
    }
    let components: Vec<_> = names
        .iter()
        .map(|id| serde_json::json!({ "id": id, "multiplicity": rng.gen_range(1..=4) }))
        .collect();
    let v = serde_json::json!({ "components": components, "strata": strata });
    Some(ModelDescription::from_json(&v.to_string()).unwrap())
}

/// Random form on `c`: several components share a target weight so that
/// ties occur, and horizontal flags are closed under passing to cofaces.
pub fn random_form(rng: &mut impl Rng, c: &DualComplex) -> PluricanonicalForm {
    let m = rng.gen_range(1..=3);
    let target = rng.gen_range(0..=2i64);
    let vertical = c
        .components()
        .map(|(id, n)| {
            let nu = if rng.gen_bool(0.6) {
                target * n as i64 - m
            } else {
                rng.gen_range(-2..=5)
            };
            (id.to_string(), nu)
        })
        .collect();
    let higher: Vec<String> = c
        .simplices()
        .filter(|s| s.dimension() > 0)
        .map(|s| s.id.clone())
        .collect();
    let mut horizontal = BTreeSet::new();
    if rng.gen_bool(0.5) {
        if let Some(seed) = higher.choose(rng) {
            for s in c.simplices() {
                if c.is_face(seed, &s.id) {
                    horizontal.insert(s.id.clone());
                }
            }
        }
    }
    PluricanonicalForm { m, vertical, horizontal }
}

/// Every barycentric vector with positive coordinates and common
/// denominator at most `max_den`, for `k` vertices.
pub fn interior_grid(k: usize, max_den: i64) -> Vec<Vec<Q>> {
    fn compositions(total: i64, parts: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=(total - parts as i64 + 1) {
            prefix.push(first);
            compositions(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in (k as i64)..=max_den {
        let mut raw = Vec::new();
        compositions(d, k, &mut Vec::new(), &mut raw);
        for c in raw {
            let v: Vec<Q> = c.iter().map(|&x| q(x, d)).collect();
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
    }
    out
}

/// `prod T_j^(nu_j + m)` split into numerator and denominator monomials.
pub fn local_equation(exponents: &[i64]) -> (MultivariatePoly, MultivariatePoly) {
    let pos: Vec<u32> = exponents.iter().map(|&e| e.max(0) as u32).collect();
    let neg: Vec<u32> = exponents.iter().map(|&e| (-e).max(0) as u32).collect();
    (
        MultivariatePoly::monomial(pos, BaseElement::one()),
        MultivariatePoly::monomial(neg, BaseElement::one()),
    )
}

/// Weight oracle at `alpha` on a face: valuation of the local equation,
/// using `v(f/g) = v(f) - v(g)`.
pub fn weight_oracle(alpha: &[Q], exponents: &[i64]) -> Q {
    let (num, den) = local_equation(exponents);
    let w = MonomialWeights::new(alpha.to_vec()).unwrap();
    let a = w.eval(&num).unwrap();
    let b = w.eval(&den).unwrap();
    a.finite().unwrap() - b.finite().unwrap()
}

/// A rigid point on `T1^N1 T2^N2 = t` over `K(u)`, `u^e = t`:
/// `x1 = u^a w^N2`, `x2 = u^b w^-N1` with `N1 a + N2 b = e`.
pub fn random_rigid(rng: &mut impl Rng, bm: &BasicModel) -> RigidPoint {
    let (n1, n2) = bm.multiplicities();
    let (a, b) = loop {
        let a = rng.gen_range(0..=3i64);
        let b = rng.gen_range(0..=3i64);
        if a + b > 0 {
            break (a, b);
        }
    };
    let e = n1 as i64 * a + n2 as i64 * b;
    let w = random_unit(rng);
    let x1 = &BaseElement::t_pow(a) * &w.pow(n2 as i64).unwrap();
    let x2 = &BaseElement::t_pow(b) * &w.pow(-(n1 as i64)).unwrap();
    RigidPoint::over_extension(bm, x1, x2, e as u32).unwrap()
}

/// Coefficient for rigid-point flows: `c t^k (1 + a t) / D` with `D` from
/// a small pool, so that denominators repeat once inflated.
pub fn random_flow_coefficient(rng: &mut impl Rng) -> BaseElement {
    let c = *[1, -1, 2, -3, 5].choose(rng).unwrap();
    let num = UniPoly::from_coeffs(vec![qi(c), qi(rng.gen_range(-3..=3))]);
    let den = match rng.gen_range(0..4) {
        0 => UniPoly::from_coeffs(vec![qi(1), qi(1)]),
        1 => UniPoly::from_coeffs(vec![qi(1), qi(-2)]),
        _ => UniPoly::one(),
    };
    &BaseElement::ratio(num, den).unwrap() * &BaseElement::t_pow(rng.gen_range(-1..=2))
}

/// Random `f` in `T1, T2`; with `reduced`, no term is divisible by
/// `T1^N1 T2^N2`.
pub fn random_flow_poly(rng: &mut impl Rng, bm: &BasicModel, reduced: bool, max_terms: usize) -> MultivariatePoly {
    let (n1, n2) = bm.multiplicities();
    let n = rng.gen_range(1..=max_terms);
    let mut terms = Vec::new();
    while terms.len() < n {
        let e = vec![rng.gen_range(0..=4u32), rng.gen_range(0..=4u32)];
        if reduced && e[0] >= n1 && e[1] >= n2 {
            continue;
        }
        terms.push((e, random_flow_coefficient(rng)));
    }
    MultivariatePoly::from_terms(2, terms)
}

/// Random `f` in `T1, T2` with no term divisible by `T1^N1 T2^N2`, and
/// general coefficients.
pub fn random_reduced(rng: &mut impl Rng, bm: &BasicModel) -> MultivariatePoly {
    let (n1, n2) = bm.multiplicities();
    let n = rng.gen_range(1..=4);
    let mut terms = Vec::new();
    while terms.len() < n {
        let e = vec![rng.gen_range(0..=4u32), rng.gen_range(0..=4u32)];
        if e[0] >= n1 && e[1] >= n2 {
            continue;
        }
        terms.push((e, random_nonzero(rng)));
    }
    MultivariatePoly::from_terms(2, terms)
}

/// Random edge weights with `alpha1 N1 + alpha2 N2 = 1`.
pub fn random_edge_weights(rng: &mut impl Rng, bm: &BasicModel) -> (Q, Q) {
    let (n1, n2) = bm.multiplicities();
    let d = rng.gen_range(1..=12);
    let k = rng.gen_range(0..=d);
    let beta1 = q(k, d);
    let beta2 = qi(1) - &beta1;
    (beta1 / qi(n1 as i64), beta2 / qi(n2 as i64))
}
