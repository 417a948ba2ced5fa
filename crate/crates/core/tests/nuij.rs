mod common;

use common::random_monic_form;
use hyperbolicity::corpus::{corpus, hermite_cubic, nuij_cubic, Expectation};
use hyperbolicity::nuij::{npath_discriminant, nuij_path, nuij_verdict};
use hyperbolicity::polyring::{normalize_at_point, rat, rat_to_f64};
use hyperbolicity::sampler::{Falsifier, SamplerOptions};
use hyperbolicity::structmats::{discriminant, univariate_view};
use hyperbolicity::verdict::{Status, VerdictOptions};
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn endpoint_one_is_the_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=3);
        let f = random_monic_form(&mut rng, d, n);
        let path = nuij_path(&f, None).unwrap();
        assert_eq!(path.at(&rat(1, 1)), f);
    }
}

#[test]
fn endpoint_zero_forgets_the_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for d in 1..=4 {
        for n in 1..=3 {
            let a = random_monic_form(&mut rng, d, n);
            let b = random_monic_form(&mut rng, d, n);
            let na = nuij_path(&a, None).unwrap().at(&rat(0, 1));
            let nb = nuij_path(&b, None).unwrap().at(&rat(0, 1));
            assert_eq!(na, nb, "d = {d}, n = {n}");
        }
    }
}

#[test]
fn discriminant_at_one_is_the_discriminant() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..20 {
        let d = rng.random_range(2..=4);
        let n = rng.random_range(1..=2);
        let f = random_monic_form(&mut rng, d, n);
        let disc_n = npath_discriminant(&f, None).unwrap();
        let at_one = disc_n.specialize(0, &rat(1, 1));
        let direct = discriminant(&univariate_view(&f, 0).unwrap()).unwrap();
        assert_eq!(at_one, direct);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn discriminant_at_zero_is_positive(
        seed in any::<u64>(),
        d in 2u32..=4,
        a in prop::collection::vec((-20i64..=20, 1i64..=7), 1..=3),
    ) {
        prop_assume!(a.iter().any(|&(p, _)| p != 0));
        let n = a.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_monic_form(&mut rng, d, n);
        let disc = npath_discriminant(&f, None).unwrap();
        let mut pt = vec![rat(0, 1)];
        pt.extend(a.iter().map(|&(p, q)| rat(p, q)));
        prop_assert!(disc.evaluate(&pt).unwrap().is_positive());
    }
}

/// Hyperbolic inputs stay real rooted along the whole path.
#[test]
fn path_preserves_real_rootedness() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for entry in corpus(4, 9) {
        if entry.expect == Expectation::NotHyperbolic {
            continue;
        }
        let g = normalize_at_point(&entry.poly, &entry.point).unwrap();
        let Ok(path) = nuij_path(&g, None) else { continue };
        let n = path.num_x();
        if n == 0 || path.degree < 2 || path.degree > 4 {
            continue;
        }
        for _ in 0..4 {
            let s = rat(rng.random_range(0..=16), 16);
            let fz = Falsifier::new(&path.at(&s), SamplerOptions::default()).unwrap();
            for _ in 0..5 {
                let a: Vec<BigRational> =
                    (0..n).map(|_| rat(rng.random_range(-9..=9), 4)).collect();
                assert!(!fz.confirm(&a).unwrap(), "{} at s = {s}", entry.name);
                let af: Vec<f64> = a.iter().map(rat_to_f64).collect();
                assert!(fz.check_direction(&af, 0).is_none());
            }
        }
    }
}

#[test]
fn cubic_discriminant_spot_coefficients() {
    let d = npath_discriminant(&nuij_cubic(), Some(4)).unwrap();
    assert_eq!(d.coeff_of(&[6, 6, 0]), rat(29469, 4));
    assert_eq!(d.coeff_of(&[0, 0, 6]), rat(5184, 1));
    assert_eq!(d.coeff_of(&[0, 4, 2]), rat(20736, 1));
}

#[test]
fn verdicts_on_fixed_forms() {
    let opts = VerdictOptions {
        samples: 300,
        ..VerdictOptions::default()
    };
    let quartic = hyperbolicity::corpus::quartic();
    let e = hyperbolicity::Point::unit(3);
    let v = nuij_verdict(&quartic, &e, &opts).unwrap();
    assert_eq!(v.status, Status::NotHyperbolic);
    assert!(v.witness.as_ref().unwrap().exact_confirmation);

    let v = nuij_verdict(&hyperbolicity::corpus::cone(2), &e, &opts).unwrap();
    assert_eq!(v.status, Status::Hyperbolic);

    // never refuted, whatever the certificate search concludes
    let v = nuij_verdict(&hermite_cubic(), &e, &opts).unwrap();
    assert_ne!(v.status, Status::NotHyperbolic);
}
