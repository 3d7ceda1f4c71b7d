//! Combinatorial sncd models, their dual intersection complexes, and the
//! coordinate maps between barycentric points and monomial-point data.
//!
//! A model lists the components `E_i` with multiplicities `N_i` and the
//! strata (connected components of the intersections `E_J`) together with
//! face maps: for each `j` in `J` the stratum over `J \ {j}` containing it.
//! The dual complex has one `(|J| - 1)`-simplex per stratum. Several strata
//! may share a vertex set, so it is a finite simplicial set rather than a
//! simplicial complex in the strict sense.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{qi, Q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub id: String,
    pub multiplicity: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumSpec {
    pub id: String,
    pub components: Vec<String>,
    /// Removed component id -> id of the parent stratum.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub faces: BTreeMap<String, String>,
}

/// Input description of an sncd model, as read from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDescription {
    pub components: Vec<ComponentSpec>,
    pub strata: Vec<StratumSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("component {0} is declared more than once")]
    DuplicateComponent(String),
    #[error("component {component} has multiplicity {multiplicity}; multiplicities must be positive")]
    NonPositiveMultiplicity { component: String, multiplicity: i64 },
    #[error("stratum {0} is declared more than once")]
    DuplicateStratum(String),
    #[error("stratum {0} has an empty component set")]
    EmptyStratum(String),
    #[error("stratum {stratum} refers to unknown component {component}")]
    UnknownComponent { stratum: String, component: String },
    #[error("stratum {stratum} lists component {component} twice")]
    RepeatedComponent { stratum: String, component: String },
    #[error("component {0} has no stratum of its own")]
    MissingComponentStratum(String),
    #[error("component {component} has more than one vertex stratum: {first}, {second}")]
    DuplicateComponentStratum {
        component: String,
        first: String,
        second: String,
    },
    #[error("stratum {stratum} has no face map entry for removing {removed}")]
    MissingFace { stratum: String, removed: String },
    #[error("stratum {stratum} has a face map entry for {removed}, which is not one of its removable components")]
    UnexpectedFace { stratum: String, removed: String },
    #[error("stratum {stratum}: face map target {target} (removing {removed}) does not exist")]
    DanglingFace {
        stratum: String,
        removed: String,
        target: String,
    },
    #[error("stratum {stratum}: face map target {target} (removing {removed}) has the wrong component set")]
    FaceMismatch {
        stratum: String,
        removed: String,
        target: String,
    },
    #[error("stratum {stratum} is not simplicially compatible: removing {first} then {second} gives {via_first}, but the other order gives {via_second}")]
    Incompatible {
        stratum: String,
        first: String,
        second: String,
        via_first: String,
        via_second: String,
    },
}

impl ModelError {
    /// The stratum or component the error is about.
    pub fn subject(&self) -> &str {
        use ModelError::*;
        match self {
            DuplicateComponent(s) | DuplicateStratum(s) | EmptyStratum(s) | MissingComponentStratum(s) => s,
            NonPositiveMultiplicity { component, .. } | DuplicateComponentStratum { component, .. } => component,
            UnknownComponent { stratum, .. }
            | RepeatedComponent { stratum, .. }
            | MissingFace { stratum, .. }
            | UnexpectedFace { stratum, .. }
            | DanglingFace { stratum, .. }
            | FaceMismatch { stratum, .. }
            | Incompatible { stratum, .. } => stratum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PointError {
    #[error("unknown stratum {0}")]
    UnknownStratum(String),
    #[error("coordinates on stratum {stratum} must be indexed by exactly its components")]
    WrongCoordinates { stratum: String },
    #[error("negative coordinate for {component} on stratum {stratum}")]
    NegativeCoordinate { stratum: String, component: String },
    #[error("barycentric coordinates on stratum {stratum} sum to {sum}, expected 1")]
    BarycentricSum { stratum: String, sum: Q },
    #[error("monomial data on stratum {stratum} has sum alpha_j N_j = {sum}, expected 1")]
    Normalization { stratum: String, sum: Q },
}

impl ModelDescription {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Every invariant violation, in a stable order.
    pub fn violations(&self) -> Vec<ModelError> {
        let mut errs = Vec::new();
        let mut comps = BTreeSet::new();
        for c in &self.components {
            if !comps.insert(c.id.as_str()) {
                errs.push(ModelError::DuplicateComponent(c.id.clone()));
            }
            if c.multiplicity < 1 {
                errs.push(ModelError::NonPositiveMultiplicity {
                    component: c.id.clone(),
                    multiplicity: c.multiplicity,
                });
            }
        }

        let mut by_id: BTreeMap<&str, &StratumSpec> = BTreeMap::new();
        let mut well_formed: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let mut vertex_of: BTreeMap<&str, &str> = BTreeMap::new();
        for s in &self.strata {
            if by_id.contains_key(s.id.as_str()) {
                errs.push(ModelError::DuplicateStratum(s.id.clone()));
                continue;
            }
            by_id.insert(s.id.as_str(), s);
            if s.components.is_empty() {
                errs.push(ModelError::EmptyStratum(s.id.clone()));
                continue;
            }
            let mut set = BTreeSet::new();
            let mut ok = true;
            for c in &s.components {
                if !comps.contains(c.as_str()) {
                    errs.push(ModelError::UnknownComponent {
                        stratum: s.id.clone(),
                        component: c.clone(),
                    });
                    ok = false;
                } else if !set.insert(c.as_str()) {
                    errs.push(ModelError::RepeatedComponent {
                        stratum: s.id.clone(),
                        component: c.clone(),
                    });
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            if set.len() == 1 {
                let c = *set.iter().next().unwrap();
                if let Some(first) = vertex_of.insert(c, s.id.as_str()) {
                    errs.push(ModelError::DuplicateComponentStratum {
                        component: c.to_string(),
                        first: first.to_string(),
                        second: s.id.clone(),
                    });
                    vertex_of.insert(c, first);
                }
            }
            well_formed.insert(s.id.as_str(), set);
        }
        for c in &self.components {
            if !vertex_of.contains_key(c.id.as_str()) {
                errs.push(ModelError::MissingComponentStratum(c.id.clone()));
            }
        }

        // Face maps: presence, targets, component sets.
        let mut good_faces: BTreeMap<&str, BTreeMap<&str, &str>> = BTreeMap::new();
        for s in &self.strata {
            let Some(set) = well_formed.get(s.id.as_str()) else {
                continue;
            };
            if by_id.get(s.id.as_str()).map(|x| std::ptr::eq(*x, s)) != Some(true) {
                continue;
            }
            let removable: BTreeSet<&str> = if set.len() >= 2 { set.clone() } else { BTreeSet::new() };
            for removed in s.faces.keys() {
                if !removable.contains(removed.as_str()) {
                    errs.push(ModelError::UnexpectedFace {
                        stratum: s.id.clone(),
                        removed: removed.clone(),
                    });
                }
            }
            let mut faces = BTreeMap::new();
            for &j in &removable {
                let Some(target) = s.faces.get(j) else {
                    errs.push(ModelError::MissingFace {
                        stratum: s.id.clone(),
                        removed: j.to_string(),
                    });
                    continue;
                };
                let Some(tset) = well_formed.get(target.as_str()) else {
                    errs.push(ModelError::DanglingFace {
                        stratum: s.id.clone(),
                        removed: j.to_string(),
                        target: target.clone(),
                    });
                    continue;
                };
                let mut expected = set.clone();
                expected.remove(j);
                if *tset != expected {
                    errs.push(ModelError::FaceMismatch {
                        stratum: s.id.clone(),
                        removed: j.to_string(),
                        target: target.clone(),
                    });
                    continue;
                }
                faces.insert(j, target.as_str());
            }
            good_faces.insert(s.id.as_str(), faces);
        }

        // Commuting squares.
        for s in &self.strata {
            let Some(faces) = good_faces.get(s.id.as_str()) else {
                continue;
            };
            let set = &well_formed[s.id.as_str()];
            if set.len() < 3 || faces.len() != set.len() {
                continue;
            }
            let ids: Vec<&str> = set.iter().copied().collect();
            for (a, &j) in ids.iter().enumerate() {
                for &k in &ids[a + 1..] {
                    let via = |first: &str, second: &str| -> Option<&str> {
                        let mid = faces.get(first)?;
                        good_faces.get(mid)?.get(second).copied()
                    };
                    if let (Some(x), Some(y)) = (via(j, k), via(k, j)) {
                        if x != y {
                            errs.push(ModelError::Incompatible {
                                stratum: s.id.clone(),
                                first: j.to_string(),
                                second: k.to_string(),
                                via_first: x.to_string(),
                                via_second: y.to_string(),
                            });
                        }
                    }
                }
            }
        }
        errs
    }
}

/// One simplex of the dual complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Simplex {
    pub id: String,
    /// Component ids, in model order.
    pub vertices: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub faces: BTreeMap<String, String>,
}

impl Simplex {
    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// The dual intersection complex of a validated model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualComplex {
    components: Vec<(String, u32)>,
    simplices: BTreeMap<String, Simplex>,
    closure: BTreeMap<String, BTreeSet<String>>,
    vertex_of: BTreeMap<String, String>,
}

/// Build the dual complex, rejecting the model on its first violation.
pub fn build_complex(model: &ModelDescription) -> Result<DualComplex, ModelError> {
    if let Some(e) = model.violations().into_iter().next() {
        return Err(e);
    }
    let order: BTreeMap<&str, usize> = model
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect();
    let mut simplices = BTreeMap::new();
    let mut vertex_of = BTreeMap::new();
    for s in &model.strata {
        let mut vertices = s.components.clone();
        vertices.sort_by_key(|c| order[c.as_str()]);
        if vertices.len() == 1 {
            vertex_of.insert(vertices[0].clone(), s.id.clone());
        }
        simplices.insert(
            s.id.clone(),
            Simplex {
                id: s.id.clone(),
                vertices,
                faces: s.faces.clone(),
            },
        );
    }

    // Closure by increasing dimension so parents are done first.
    let mut by_dim: Vec<&Simplex> = simplices.values().collect();
    by_dim.sort_by_key(|s| s.vertices.len());
    let mut closure: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for s in by_dim {
        let mut set = BTreeSet::from([s.id.clone()]);
        for parent in s.faces.values() {
            set.extend(closure[parent].iter().cloned());
        }
        closure.insert(s.id.clone(), set);
    }

    Ok(DualComplex {
        components: model
            .components
            .iter()
            .map(|c| (c.id.clone(), c.multiplicity as u32))
            .collect(),
        simplices,
        closure,
        vertex_of,
    })
}

impl DualComplex {
    pub fn components(&self) -> impl Iterator<Item = (&str, u32)> {
        self.components.iter().map(|(id, n)| (id.as_str(), *n))
    }

    pub fn multiplicity(&self, component: &str) -> Option<u32> {
        self.components
            .iter()
            .find(|(id, _)| id == component)
            .map(|(_, n)| *n)
    }

    pub fn simplex(&self, id: &str) -> Option<&Simplex> {
        self.simplices.get(id)
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.values()
    }

    pub fn stratum_ids(&self) -> impl Iterator<Item = &str> {
        self.simplices.keys().map(String::as_str)
    }

    /// Stratum id of the vertex for a component.
    pub fn vertex(&self, component: &str) -> Option<&str> {
        self.vertex_of.get(component).map(String::as_str)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_of.len()
    }

    pub fn count_of_dimension(&self, d: usize) -> usize {
        self.simplices.values().filter(|s| s.dimension() == d).count()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.simplices.values().map(Simplex::dimension).max()
    }

    /// All faces of a stratum, itself included.
    pub fn closure(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.closure.get(id)
    }

    pub fn is_face(&self, face: &str, of: &str) -> bool {
        self.closure.get(of).is_some_and(|c| c.contains(face))
    }

    /// Follow face maps removing each listed component in turn.
    pub fn face_along<'a>(
        &'a self,
        stratum: &'a str,
        removed: impl IntoIterator<Item = &'a str>,
    ) -> Option<&'a str> {
        let mut cur = stratum;
        for j in removed {
            cur = self.simplices.get(cur)?.faces.get(j)?.as_str();
        }
        Some(cur)
    }

    /// Graphviz rendering: one node per component, one edge per 1-simplex,
    /// higher simplices as comments.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph dual_complex {\n");
        for (id, n) in &self.components {
            let _ = writeln!(out, "  \"{id}\" [label=\"{id} (N={n})\"];");
        }
        for s in self.simplices.values().filter(|s| s.dimension() == 1) {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [label=\"{}\"];",
                s.vertices[0], s.vertices[1], s.id
            );
        }
        let mut higher: Vec<&Simplex> = self.simplices.values().filter(|s| s.dimension() >= 2).collect();
        higher.sort_by(|a, b| a.dimension().cmp(&b.dimension()).then(a.id.cmp(&b.id)));
        for s in higher {
            let _ = writeln!(
                out,
                "  // {}-simplex {}: {}",
                s.dimension(),
                s.id,
                s.vertices.join(" ")
            );
        }
        out.push_str("}\n");
        out
    }

    fn check_coordinates(
        &self,
        stratum: &str,
        coords: &BTreeMap<String, Q>,
    ) -> Result<&Simplex, PointError> {
        let s = self
            .simplex(stratum)
            .ok_or_else(|| PointError::UnknownStratum(stratum.to_string()))?;
        let keys: BTreeSet<&str> = coords.keys().map(String::as_str).collect();
        let want: BTreeSet<&str> = s.vertices.iter().map(String::as_str).collect();
        if keys != want {
            return Err(PointError::WrongCoordinates {
                stratum: stratum.to_string(),
            });
        }
        if let Some((c, _)) = coords.iter().find(|(_, v)| v.is_negative()) {
            return Err(PointError::NegativeCoordinate {
                stratum: stratum.to_string(),
                component: c.clone(),
            });
        }
        Ok(s)
    }

    fn n(&self, component: &str) -> Q {
        qi(self.multiplicity(component).expect("validated component") as i64)
    }

    /// Map a barycentric point to monomial-point data. Zero coordinates are
    /// first removed by moving to the face along those components.
    pub fn phi(&self, p: &SkeletonPoint) -> Result<MonomialPointData, PointError> {
        self.check_coordinates(&p.stratum, &p.barycentric)?;
        let sum: Q = p.barycentric.values().sum();
        if !sum.is_one() {
            return Err(PointError::BarycentricSum {
                stratum: p.stratum.clone(),
                sum,
            });
        }
        let zeros = p.barycentric.iter().filter(|(_, b)| b.is_zero()).map(|(c, _)| c.as_str());
        let target = self.face_along(&p.stratum, zeros).expect("validated face maps");
        let alpha = p
            .barycentric
            .iter()
            .filter(|(_, b)| !b.is_zero())
            .map(|(c, b)| (c.clone(), b / self.n(c)))
            .collect();
        Ok(MonomialPointData {
            stratum: target.to_string(),
            alpha,
        })
    }

    /// Inverse of [`phi`](Self::phi): `beta_j = alpha_j N_j`, after
    /// stripping zero weights.
    pub fn phi_inverse(&self, d: &MonomialPointData) -> Result<SkeletonPoint, PointError> {
        self.check_coordinates(&d.stratum, &d.alpha)?;
        let sum: Q = d.alpha.iter().map(|(c, a)| a * self.n(c)).sum();
        if !sum.is_one() {
            return Err(PointError::Normalization {
                stratum: d.stratum.clone(),
                sum,
            });
        }
        let zeros = d.alpha.iter().filter(|(_, a)| a.is_zero()).map(|(c, _)| c.as_str());
        let target = self.face_along(&d.stratum, zeros).expect("validated face maps");
        let barycentric = d
            .alpha
            .iter()
            .filter(|(_, a)| !a.is_zero())
            .map(|(c, a)| (c.clone(), a * self.n(c)))
            .collect();
        Ok(SkeletonPoint {
            stratum: target.to_string(),
            barycentric,
        })
    }

    /// The combinatorial retraction: the skeleton point carrying the given
    /// valuations of the local equations through the center stratum.
    pub fn retract(&self, center: &str, alpha: &BTreeMap<String, Q>) -> Result<SkeletonPoint, PointError> {
        self.phi_inverse(&MonomialPointData {
            stratum: center.to_string(),
            alpha: alpha.clone(),
        })
    }

    /// Partition the strata of `sub` (or of the whole complex) by
    /// connectivity of the 1-skeleton.
    pub fn connected_components(&self, sub: Option<&Subcomplex>) -> Vec<BTreeSet<String>> {
        let in_scope = |id: &str| sub.is_none_or(|s| s.contains(id));
        let verts: Vec<&str> = self
            .simplices
            .values()
            .filter(|s| s.dimension() == 0 && in_scope(&s.id))
            .map(|s| s.vertices[0].as_str())
            .collect();
        let index: BTreeMap<&str, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut parent: Vec<usize> = (0..verts.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for s in self.simplices.values().filter(|s| s.dimension() == 1 && in_scope(&s.id)) {
            let (Some(&a), Some(&b)) = (index.get(s.vertices[0].as_str()), index.get(s.vertices[1].as_str())) else {
                continue;
            };
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for s in self.simplices.values().filter(|s| in_scope(&s.id)) {
            if let Some(&i) = index.get(s.vertices[0].as_str()) {
                let root = find(&mut parent, i);
                groups.entry(root).or_default().insert(s.id.clone());
            }
        }
        let mut out: Vec<BTreeSet<String>> = groups.into_values().collect();
        out.sort();
        out
    }
}

/// A point of the complex: a stratum and rational barycentric coordinates
/// indexed by its components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonPoint {
    pub stratum: String,
    #[serde(with = "crate::serial::q_map")]
    pub barycentric: BTreeMap<String, Q>,
}

/// Data of a monomial point: a stratum and the valuations `alpha_j` of the
/// local equations of its components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialPointData {
    pub stratum: String,
    #[serde(with = "crate::serial::q_map")]
    pub alpha: BTreeMap<String, Q>,
}

/// A face-closed set of strata.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Subcomplex {
    strata: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubcomplexError {
    #[error("unknown stratum {0}")]
    UnknownStratum(String),
    #[error("stratum {face} is a face of {of} but is missing")]
    NotFaceClosed { face: String, of: String },
}

impl Subcomplex {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full(c: &DualComplex) -> Self {
        Subcomplex {
            strata: c.stratum_ids().map(str::to_string).collect(),
        }
    }

    /// The smallest subcomplex containing the given strata.
    pub fn closure_of<'a>(c: &DualComplex, ids: impl IntoIterator<Item = &'a str>) -> Result<Self, SubcomplexError> {
        let mut strata = BTreeSet::new();
        for id in ids {
            let cl = c
                .closure(id)
                .ok_or_else(|| SubcomplexError::UnknownStratum(id.to_string()))?;
            strata.extend(cl.iter().cloned());
        }
        Ok(Subcomplex { strata })
    }

    /// Accept `ids` only if they already form a subcomplex.
    pub fn new(c: &DualComplex, ids: impl IntoIterator<Item = String>) -> Result<Self, SubcomplexError> {
        let strata: BTreeSet<String> = ids.into_iter().collect();
        for id in &strata {
            let cl = c
                .closure(id)
                .ok_or_else(|| SubcomplexError::UnknownStratum(id.clone()))?;
            if let Some(face) = cl.iter().find(|f| !strata.contains(*f)) {
                return Err(SubcomplexError::NotFaceClosed {
                    face: face.clone(),
                    of: id.clone(),
                });
            }
        }
        Ok(Subcomplex { strata })
    }

    pub fn strata(&self) -> &BTreeSet<String> {
        &self.strata
    }

    pub fn contains(&self, id: &str) -> bool {
        self.strata.contains(id)
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn union(&self, other: &Subcomplex) -> Subcomplex {
        Subcomplex {
            strata: self.strata.union(&other.strata).cloned().collect(),
        }
    }
}
