mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sncd::field::{q, qi};
use sncd::{ExtendedValue, MonomialWeights, MultivariatePoly, Q};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn combine(l: &Q, a: &ExtendedValue, b: &ExtendedValue) -> ExtendedValue {
    a.scale(l) + b.scale(&(qi(1) - l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn eval_matches_oracle(seed: u64, arity in 1usize..=4) {
        let mut r = rng(seed);
        let w = random_weights(&mut r, arity);
        let f = random_poly(&mut r, arity, 5, 3);
        prop_assert_eq!(w.eval(&f).unwrap(), monomial_oracle(w.alpha(), &f));
    }

    #[test]
    fn multiplicative_and_ultrametric(seed: u64, arity in 1usize..=4) {
        let mut r = rng(seed);
        let w = random_weights(&mut r, arity);
        let f = random_poly(&mut r, arity, 4, 3);
        let g = random_poly(&mut r, arity, 4, 3);
        let (vf, vg) = (w.eval(&f).unwrap(), w.eval(&g).unwrap());
        prop_assert_eq!(w.eval(&f.mul(&g)).unwrap(), vf.clone() + vg.clone());
        let vs = w.eval(&f.add(&g)).unwrap();
        let lo = vf.clone().min(vg.clone());
        prop_assert!(vs >= lo);
        if vf != vg {
            prop_assert_eq!(vs, lo);
        }
    }

    #[test]
    fn concave_in_the_weights(seed: u64, arity in 1usize..=4, k in 0i64..=6) {
        let mut r = rng(seed);
        let (w1, w2) = (random_weights(&mut r, arity), random_weights(&mut r, arity));
        let f = random_poly(&mut r, arity, 5, 3);
        let l = q(k, 6);
        let mixed: Vec<Q> = w1.alpha().iter().zip(w2.alpha())
            .map(|(a, b)| &l * a + (qi(1) - &l) * b)
            .collect();
        let wm = MonomialWeights::new(mixed).unwrap();
        let lhs = wm.eval(&f).unwrap();
        prop_assert!(lhs >= combine(&l, &w1.eval(&f).unwrap(), &w2.eval(&f).unwrap()));
    }

    #[test]
    fn monotone_in_the_weights(seed: u64, arity in 1usize..=4) {
        let mut r = rng(seed);
        let w = random_weights(&mut r, arity);
        let bump = random_weights(&mut r, arity);
        let bigger: Vec<Q> = w.alpha().iter().zip(bump.alpha()).map(|(a, b)| a + b).collect();
        let f = random_poly(&mut r, arity, 5, 3);
        prop_assert!(w.eval(&f).unwrap() <= MonomialWeights::new(bigger).unwrap().eval(&f).unwrap());
    }

    /// Dropping zero weights and the variables they carry does not change
    /// the value, and moving off the boundary changes it continuously.
    #[test]
    fn boundary_rule(seed: u64, arity in 2usize..=4, zero in 0usize..4, n in 1i64..40) {
        let zero = zero % arity;
        let mut r = rng(seed);
        let mut alpha = random_weights(&mut r, arity).alpha().to_vec();
        alpha[zero] = qi(0);
        let w = MonomialWeights::new(alpha.clone()).unwrap();
        let support = w.support();
        let face = w.restrict_to_support();

        let g = random_poly(&mut r, support.len().max(1), 4, 3);
        if !support.is_empty() {
            let lifted = g.embed(arity, &support);
            prop_assert_eq!(lifted.restrict(&support).unwrap(), g.clone());
            prop_assert_eq!(w.eval(&lifted).unwrap(), face.eval(&g).unwrap());
        }

        let f = random_poly(&mut r, arity, 4, 3);
        let eps = q(1, n);
        let mut moved = alpha;
        moved[zero] = eps.clone();
        let near = MonomialWeights::new(moved).unwrap().eval(&f).unwrap();
        let at = w.eval(&f).unwrap();
        let top = f.terms().map(|(b, _)| b[zero]).max().unwrap_or(0);
        prop_assert!(near >= at);
        prop_assert!(near <= at + ExtendedValue::Finite(eps * qi(top as i64)));
    }

    #[test]
    fn parse_round_trips(seed: u64, arity in 1usize..=4) {
        let f = random_poly(&mut rng(seed), arity, 4, 3);
        prop_assert_eq!(MultivariatePoly::parse(&f.to_string(), arity).unwrap(), f);
    }
}

#[test]
fn normalized_weights_are_checked() {
    assert!(MonomialWeights::normalized(vec![q(1, 2), q(1, 4)], vec![1, 2]).is_ok());
    assert!(MonomialWeights::normalized(vec![q(1, 2), q(1, 2)], vec![1, 2]).is_err());
    assert!(MonomialWeights::new(vec![q(-1, 2)]).is_err());
}
