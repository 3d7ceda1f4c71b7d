//! Weight functions of pluricanonical forms on the skeleton of a model, the
//! Kontsevich–Soibelman skeleton of a form and the essential skeleton of a
//! list of forms, plus the connectivity and pseudo-manifold passes run on
//! the resulting subcomplexes.
//!
//! On a face over `J` the weight at barycentric point `beta` is
//! `sum_j beta_j (nu_j + m) / N_j`, the monomial valuation of the local
//! equation `prod_j T_j^(nu_j + m)` at `alpha_j = beta_j / N_j`. The value
//! is affine on each face not flagged horizontal; on flagged faces the
//! true weight is strictly larger and only the bound is reported.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{DualComplex, PointError, SkeletonPoint, Subcomplex};
use crate::field::{qi, Q};

/// Level `m`, vertical multiplicities `nu_i` and the strata flagged as lying
/// in the Zariski closure of the horizontal part of the divisor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluricanonicalForm {
    pub m: i64,
    pub vertical: BTreeMap<String, i64>,
    #[serde(default)]
    pub horizontal: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("pluricanonical level m = {0} must be positive")]
    NonPositiveLevel(i64),
    #[error("no vertical multiplicity given for component {0}")]
    MissingVertical(String),
    #[error("vertical multiplicity given for unknown component {0}")]
    UnknownComponent(String),
    #[error("horizontal flag on unknown stratum {0}")]
    UnknownStratum(String),
    #[error("vertex stratum {0} is flagged horizontal")]
    HorizontalVertex(String),
    #[error("stratum {flagged} is flagged horizontal but the deeper stratum {missing} is not")]
    NotDownwardClosed { flagged: String, missing: String },
}

impl FormError {
    pub fn subject(&self) -> String {
        match self {
            FormError::NonPositiveLevel(m) => format!("m={m}"),
            FormError::MissingVertical(s)
            | FormError::UnknownComponent(s)
            | FormError::UnknownStratum(s)
            | FormError::HorizontalVertex(s) => s.clone(),
            FormError::NotDownwardClosed { flagged, .. } => flagged.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Point(#[from] PointError),
    #[error("the essential skeleton needs at least one form")]
    EmptyFormList,
}

impl PluricanonicalForm {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Every invariant violation against the given complex.
    pub fn violations(&self, c: &DualComplex) -> Vec<FormError> {
        let mut errs = Vec::new();
        if self.m < 1 {
            errs.push(FormError::NonPositiveLevel(self.m));
        }
        for (id, _) in c.components() {
            if !self.vertical.contains_key(id) {
                errs.push(FormError::MissingVertical(id.to_string()));
            }
        }
        for id in self.vertical.keys() {
            if c.multiplicity(id).is_none() {
                errs.push(FormError::UnknownComponent(id.clone()));
            }
        }
        for id in &self.horizontal {
            let Some(s) = c.simplex(id) else {
                errs.push(FormError::UnknownStratum(id.clone()));
                continue;
            };
            if s.dimension() == 0 {
                errs.push(FormError::HorizontalVertex(id.clone()));
            }
            for deeper in c.simplices() {
                if c.is_face(id, &deeper.id) && !self.horizontal.contains(&deeper.id) {
                    errs.push(FormError::NotDownwardClosed {
                        flagged: id.clone(),
                        missing: deeper.id.clone(),
                    });
                }
            }
        }
        errs
    }

    /// The form `lambda * omega` with `v_K(lambda) = c`: `nu_i -> nu_i + c N_i`.
    pub fn scaled_by_valuation(&self, c: &DualComplex, shift: i64) -> Self {
        let mut out = self.clone();
        for (id, nu) in out.vertical.iter_mut() {
            if let Some(n) = c.multiplicity(id) {
                *nu += shift * n as i64;
            }
        }
        out
    }

    /// The `k`-th tensor power: `(m, nu) -> (k m, k nu)`, flags unchanged.
    pub fn tensor_power(&self, k: i64) -> Self {
        PluricanonicalForm {
            m: self.m * k,
            vertical: self.vertical.iter().map(|(id, nu)| (id.clone(), nu * k)).collect(),
            horizontal: self.horizontal.clone(),
        }
    }
}

/// `(nu + m) / N` for a component of multiplicity `N`.
pub fn divisorial_weight(n: u32, nu: i64, m: i64) -> Q {
    assert!(n >= 1 && m >= 1, "N and m must be positive");
    Q::new((nu + m).into(), (n as i64).into())
}

/// The weight at a point, or a strict lower bound on a horizontal face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightValue {
    Exact(Q),
    StrictLowerBound(Q),
}

impl WeightValue {
    pub fn value(&self) -> &Q {
        match self {
            WeightValue::Exact(v) | WeightValue::StrictLowerBound(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, WeightValue::Exact(_))
    }
}

/// A form checked against a complex, with its vertex weights precomputed.
#[derive(Debug, Clone)]
pub struct Weighting<'a> {
    complex: &'a DualComplex,
    form: &'a PluricanonicalForm,
    vertex_weight: BTreeMap<&'a str, Q>,
    global: Q,
}

impl<'a> Weighting<'a> {
    pub fn new(complex: &'a DualComplex, form: &'a PluricanonicalForm) -> Result<Self, FormError> {
        if let Some(e) = form.violations(complex).into_iter().next() {
            return Err(e);
        }
        let vertex_weight: BTreeMap<&str, Q> = complex
            .components()
            .map(|(id, n)| (id, divisorial_weight(n, form.vertical[id], form.m)))
            .collect();
        let global = vertex_weight
            .values()
            .min()
            .cloned()
            .unwrap_or_else(|| qi(0));
        Ok(Weighting {
            complex,
            form,
            vertex_weight,
            global,
        })
    }

    /// `(nu_i + m) / N_i` for a component.
    pub fn component_weight(&self, component: &str) -> Option<&Q> {
        self.vertex_weight.get(component)
    }

    /// Minimum of the divisorial weights over all components.
    pub fn global_weight(&self) -> &Q {
        &self.global
    }

    pub fn weight_at(&self, p: &SkeletonPoint) -> Result<WeightValue, PointError> {
        let d = self.complex.phi(p)?;
        let value: Q = d
            .alpha
            .iter()
            .map(|(c, a)| a * qi(self.form.vertical[c] + self.form.m))
            .sum();
        Ok(if self.form.horizontal.contains(&d.stratum) {
            WeightValue::StrictLowerBound(value)
        } else {
            WeightValue::Exact(value)
        })
    }

    /// A face is essential when every vertex attains the global weight and
    /// the face is not flagged horizontal.
    pub fn is_essential(&self, stratum: &str) -> bool {
        let Some(s) = self.complex.simplex(stratum) else {
            return false;
        };
        !self.form.horizontal.contains(stratum)
            && s.vertices.iter().all(|v| self.vertex_weight[v.as_str()] == self.global)
    }

    pub fn ks_skeleton(&self) -> Subcomplex {
        let ids: Vec<String> = self
            .complex
            .stratum_ids()
            .filter(|id| self.is_essential(id))
            .map(str::to_string)
            .collect();
        Subcomplex::new(self.complex, ids).expect("essential faces form a subcomplex")
    }
}

pub fn global_weight(c: &DualComplex, form: &PluricanonicalForm) -> Result<Q, FormError> {
    Ok(Weighting::new(c, form)?.global_weight().clone())
}

pub fn weight_at(c: &DualComplex, form: &PluricanonicalForm, p: &SkeletonPoint) -> Result<WeightValue, WeightError> {
    Ok(Weighting::new(c, form)?.weight_at(p)?)
}

pub fn ks_skeleton(c: &DualComplex, form: &PluricanonicalForm) -> Result<Subcomplex, FormError> {
    Ok(Weighting::new(c, form)?.ks_skeleton())
}

/// Union of the Kontsevich–Soibelman skeleta of the supplied forms. This is
/// contained in the essential skeleton and equals it only if the forms
/// generate enough of the pluricanonical ring.
pub fn essential_skeleton(c: &DualComplex, forms: &[PluricanonicalForm]) -> Result<Subcomplex, WeightError> {
    if forms.is_empty() {
        return Err(WeightError::EmptyFormList);
    }
    let mut acc = Subcomplex::empty();
    for f in forms {
        acc = acc.union(&ks_skeleton(c, f)?);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Connected,
    Disconnected { components: usize },
    /// The empty subcomplex; counted as connected.
    Empty,
}

impl Connectivity {
    pub fn is_connected(self) -> bool {
        !matches!(self, Connectivity::Disconnected { .. })
    }
}

pub fn connectivity(c: &DualComplex, s: &Subcomplex) -> Connectivity {
    match c.connected_components(Some(s)).len() {
        0 => Connectivity::Empty,
        1 => Connectivity::Connected,
        n => Connectivity::Disconnected { components: n },
    }
}

pub fn is_connected(c: &DualComplex, s: &Subcomplex) -> bool {
    connectivity(c, s).is_connected()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoManifoldReport {
    pub holds: bool,
    pub dimension: Option<usize>,
    /// Set for the conventions: the empty subcomplex (fails) and a single
    /// vertex (passes).
    pub degenerate: bool,
}

pub fn pseudomanifold_report(c: &DualComplex, s: &Subcomplex) -> PseudoManifoldReport {
    let simplices: Vec<_> = s.strata().iter().filter_map(|id| c.simplex(id)).collect();
    let Some(d) = simplices.iter().map(|x| x.dimension()).max() else {
        return PseudoManifoldReport {
            holds: false,
            dimension: None,
            degenerate: true,
        };
    };
    if d == 0 {
        return PseudoManifoldReport {
            holds: simplices.len() == 1,
            dimension: Some(0),
            degenerate: true,
        };
    }
    let top: Vec<_> = simplices.iter().filter(|x| x.dimension() == d).collect();
    let pure = simplices
        .iter()
        .all(|x| top.iter().any(|t| c.is_face(&x.id, &t.id)));

    // (d-1)-face -> indices of the top simplices containing it.
    let mut cofaces: BTreeMap<&str, Vec<usize>> = simplices
        .iter()
        .filter(|x| x.dimension() + 1 == d)
        .map(|x| (x.id.as_str(), Vec::new()))
        .collect();
    for (i, t) in top.iter().enumerate() {
        for f in t.faces.values() {
            if let Some(v) = cofaces.get_mut(f.as_str()) {
                v.push(i);
            }
        }
    }
    let two_sided = cofaces.values().all(|v| v.len() == 2);

    let mut parent: Vec<usize> = (0..top.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for v in cofaces.values() {
        for w in v.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let roots: BTreeSet<usize> = (0..top.len()).map(|i| find(&mut parent, i)).collect();

    PseudoManifoldReport {
        holds: pure && two_sided && roots.len() == 1,
        dimension: Some(d),
        degenerate: false,
    }
}

pub fn is_closed_pseudomanifold(c: &DualComplex, s: &Subcomplex) -> bool {
    pseudomanifold_report(c, s).holds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, ModelDescription};
    use crate::field::q;

    fn chain() -> DualComplex {
        build_complex(
            &ModelDescription::from_json(
                r#"{"components":[{"id":"E1","multiplicity":1},{"id":"E2","multiplicity":2},{"id":"E3","multiplicity":3}],
                "strata":[{"id":"E1","components":["E1"]},{"id":"E2","components":["E2"]},{"id":"E3","components":["E3"]},
                {"id":"C12","components":["E1","E2"],"faces":{"E1":"E2","E2":"E1"}},
                {"id":"C23","components":["E2","E3"],"faces":{"E2":"E3","E3":"E2"}}]}"#,
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn form(nu: &[(&str, i64)], horizontal: &[&str]) -> PluricanonicalForm {
        PluricanonicalForm {
            m: 1,
            vertical: nu.iter().map(|(c, v)| (c.to_string(), *v)).collect(),
            horizontal: horizontal.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn divisorial_examples() {
        assert_eq!(divisorial_weight(1, 0, 1), qi(1));
        assert_eq!(divisorial_weight(2, 1, 1), qi(1));
        assert_eq!(divisorial_weight(3, 2, 1), qi(1));
        assert_eq!(divisorial_weight(3, 0, 1), q(1, 3));
    }

    #[test]
    fn chain_weights() {
        let c = chain();
        let balanced = form(&[("E1", 0), ("E2", 1), ("E3", 2)], &[]);
        assert_eq!(global_weight(&c, &balanced).unwrap(), qi(1));
        assert_eq!(ks_skeleton(&c, &balanced).unwrap(), Subcomplex::full(&c));

        let flat = form(&[("E1", 0), ("E2", 0), ("E3", 0)], &[]);
        assert_eq!(global_weight(&c, &flat).unwrap(), q(1, 3));
        let ks = ks_skeleton(&c, &flat).unwrap();
        assert_eq!(ks.strata().iter().collect::<Vec<_>>(), ["E3"]);
    }

    #[test]
    fn weight_at_examples() {
        let c = chain();
        let f = form(&[("E1", 0), ("E2", 1), ("E3", 2)], &[]);
        let p = SkeletonPoint {
            stratum: "C12".into(),
            barycentric: [("E1".to_string(), q(1, 2)), ("E2".to_string(), q(1, 2))].into(),
        };
        assert_eq!(weight_at(&c, &f, &p).unwrap(), WeightValue::Exact(qi(1)));

        let v = SkeletonPoint {
            stratum: "E3".into(),
            barycentric: [("E3".to_string(), qi(1))].into(),
        };
        assert_eq!(weight_at(&c, &f, &v).unwrap(), WeightValue::Exact(divisorial_weight(3, 2, 1)));

        let h = form(&[("E1", 0), ("E2", 1), ("E3", 2)], &["C12"]);
        assert_eq!(weight_at(&c, &h, &p).unwrap(), WeightValue::StrictLowerBound(qi(1)));
        // The flagged edge drops out of the skeleton, its vertices stay.
        let ks = ks_skeleton(&c, &h).unwrap();
        assert!(!ks.contains("C12") && ks.contains("E1") && ks.contains("C23"));
    }

    #[test]
    fn boundary_points_use_the_face() {
        let c = chain();
        let h = form(&[("E1", 0), ("E2", 1), ("E3", 2)], &["C12"]);
        let p = SkeletonPoint {
            stratum: "C12".into(),
            barycentric: [("E1".to_string(), qi(0)), ("E2".to_string(), qi(1))].into(),
        };
        assert_eq!(weight_at(&c, &h, &p).unwrap(), WeightValue::Exact(qi(1)));
    }

    #[test]
    fn form_validation() {
        let c = chain();
        let errs = form(&[("E1", 0), ("E2", 1)], &["E1"]).violations(&c);
        assert!(errs.contains(&FormError::MissingVertical("E3".into())));
        assert!(errs.contains(&FormError::HorizontalVertex("E1".into())));
        let mut f = form(&[("E1", 0), ("E2", 1), ("E3", 0), ("E9", 0)], &["nope"]);
        f.m = 0;
        let errs = f.violations(&c);
        assert!(errs.contains(&FormError::NonPositiveLevel(0)));
        assert!(errs.contains(&FormError::UnknownComponent("E9".into())));
        assert!(errs.contains(&FormError::UnknownStratum("nope".into())));
    }

    #[test]
    fn essential_union_and_empty() {
        let c = chain();
        let a = form(&[("E1", 0), ("E2", 1), ("E3", 3)], &[]);
        let b = form(&[("E1", 0), ("E2", 0), ("E3", 0)], &[]);
        let ks_a = ks_skeleton(&c, &a).unwrap();
        assert_eq!(essential_skeleton(&c, std::slice::from_ref(&a)).unwrap(), ks_a);
        let u = essential_skeleton(&c, &[a, b]).unwrap();
        assert_eq!(u.strata().iter().collect::<Vec<_>>(), ["C12", "E1", "E2", "E3"]);
        assert_eq!(essential_skeleton(&c, &[]), Err(WeightError::EmptyFormList));
    }

    #[test]
    fn topology_passes() {
        let c = chain();
        assert_eq!(connectivity(&c, &Subcomplex::empty()), Connectivity::Empty);
        assert!(is_connected(&c, &Subcomplex::empty()));
        let two = Subcomplex::closure_of(&c, ["E1", "E3"]).unwrap();
        assert_eq!(connectivity(&c, &two), Connectivity::Disconnected { components: 2 });
        let one = Subcomplex::closure_of(&c, ["E2"]).unwrap();
        assert!(is_closed_pseudomanifold(&c, &one));
        assert!(pseudomanifold_report(&c, &one).degenerate);
        assert!(!is_closed_pseudomanifold(&c, &two));
        assert!(!is_closed_pseudomanifold(&c, &Subcomplex::full(&c)));
        assert!(!is_closed_pseudomanifold(&c, &Subcomplex::empty()));
    }
}
