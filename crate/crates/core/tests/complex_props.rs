mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sncd::field::{q, qi};
use sncd::{build_complex, MonomialPointData, MonomialWeights, SkeletonPoint, Subcomplex, Q};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn one_simplex_per_stratum(seed: u64) {
        let model = random_model(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(model.violations().is_empty());
        let c = build_complex(&model).unwrap();
        prop_assert_eq!(c.simplices().count(), model.strata.len());
        prop_assert_eq!(c.vertex_count(), model.components.len());
        for s in &model.strata {
            prop_assert_eq!(c.simplex(&s.id).unwrap().dimension(), s.components.len() - 1);
        }
    }

    #[test]
    fn faces_compose(seed: u64) {
        let c = build_complex(&random_model(&mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        for s in c.simplices() {
            let closure = c.closure(&s.id).unwrap();
            for f in s.faces.values() {
                for g in c.closure(f).unwrap() {
                    prop_assert!(closure.contains(g));
                }
            }
            for a in &s.vertices {
                for b in &s.vertices {
                    if a != b && s.vertices.len() >= 3 {
                        prop_assert_eq!(c.face_along(&s.id, [a.as_str(), b.as_str()]), c.face_along(&s.id, [b.as_str(), a.as_str()]));
                    }
                }
            }
        }
    }

    #[test]
    fn phi_is_a_bijection_on_rational_points(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = build_complex(&random_model(&mut rng)).unwrap();
        for s in c.simplices() {
            let raw: Vec<i64> = s.vertices.iter().map(|_| rng.gen_range(1..=12)).collect();
            let total: i64 = raw.iter().sum();
            let p = SkeletonPoint {
                stratum: s.id.clone(),
                barycentric: s.vertices.iter().cloned().zip(raw.iter().map(|&x| q(x, total))).collect(),
            };
            let d = c.phi(&p).unwrap();
            prop_assert_eq!(&d.stratum, &s.id);
            let sum: Q = d.alpha.iter().map(|(v, a)| a * qi(c.multiplicity(v).unwrap() as i64)).sum();
            prop_assert_eq!(sum, qi(1));
            prop_assert_eq!(c.phi_inverse(&d).unwrap(), p.clone());
            let back = c.phi(&c.phi_inverse(&d).unwrap()).unwrap();
            prop_assert_eq!(back, d);
        }
    }

    /// A point with some zero coordinates lands on the face spanned by the
    /// others, and monomial values there agree with the restricted weights.
    #[test]
    fn phi_respects_faces(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = build_complex(&random_model(&mut rng)).unwrap();
        for s in c.simplices().filter(|s| s.vertices.len() >= 2) {
            let k = s.vertices.len();
            let mut raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=12)).collect();
            let dropped = rng.gen_range(0..k);
            raw[dropped] = 0;
            let total: i64 = raw.iter().sum();
            let p = SkeletonPoint {
                stratum: s.id.clone(),
                barycentric: s.vertices.iter().cloned().zip(raw.iter().map(|&x| q(x, total))).collect(),
            };
            let d = c.phi(&p).unwrap();
            prop_assert_eq!(d.stratum.as_str(), s.faces[&s.vertices[dropped]].as_str());
            prop_assert!(!d.alpha.contains_key(&s.vertices[dropped]));

            let alpha: Vec<Q> = s.vertices.iter().zip(&raw)
                .map(|(v, &x)| q(x, total) / qi(c.multiplicity(v).unwrap() as i64))
                .collect();
            let w = MonomialWeights::new(alpha).unwrap();
            let support = w.support();
            let f = random_poly(&mut rng, support.len(), 4, 3);
            let on_face = MonomialWeights::new(support.iter().map(|&i| d.alpha[&s.vertices[i]].clone()).collect()).unwrap();
            prop_assert_eq!(w.restrict_to_support(), on_face.clone());
            prop_assert_eq!(w.eval(&f.embed(k, &support)).unwrap(), on_face.eval(&f).unwrap());
        }
    }

    #[test]
    fn components_partition_the_complex(seed: u64) {
        let c = build_complex(&random_model(&mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        let parts = c.connected_components(None);
        let all: BTreeSet<String> = c.stratum_ids().map(str::to_string).collect();
        let union: BTreeSet<String> = parts.iter().flatten().cloned().collect();
        prop_assert_eq!(union, all);
        prop_assert_eq!(parts.iter().map(BTreeSet::len).sum::<usize>(), c.simplices().count());
        for part in &parts {
            prop_assert!(Subcomplex::new(&c, part.iter().cloned()).is_ok());
        }
    }
}

#[test]
fn closure_and_non_closed_sets() {
    let c = complex("planes.json");
    let s = Subcomplex::closure_of(&c, ["C12"]).unwrap();
    let expected: BTreeSet<String> = ["C12", "E1", "E2"].map(String::from).into();
    assert_eq!(s.strata(), &expected);
    assert!(Subcomplex::new(&c, ["C12".to_string()]).is_err());
}

#[test]
fn retract_reads_off_the_center() {
    let c = complex("chain.json");
    let alpha: BTreeMap<String, Q> = [("E1".into(), q(1, 4)), ("E2".into(), q(3, 8))].into();
    let p = c.retract("C12", &alpha).unwrap();
    assert_eq!(p.barycentric["E1"], q(1, 4));
    assert_eq!(p.barycentric["E2"], q(3, 4));
    let bad = MonomialPointData {
        stratum: "C12".into(),
        alpha: [("E1".into(), q(1, 2)), ("E2".into(), q(1, 2))].into(),
    };
    assert!(c.phi_inverse(&bad).is_err());
}
