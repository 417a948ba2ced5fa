mod common;

use common::{distinct_roots, random_monic_form, random_rooted_univariate, strs};
use hyperbolicity::polyring::{parse_poly, rat, MultiPoly};
use hyperbolicity::structmats::{
    discriminant, hermite_matrix, rank_signature, sylvester_resultant, univariate_view,
};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn hermite_matrix_is_hankel(seed in any::<u64>(), d in 1u32..=4, n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_monic_form(&mut rng, d, n);
        let h = hermite_matrix(&f, 0).unwrap();
        let d = d as usize;
        for i in 0..d {
            for j in 0..d {
                // every entry equals the one in the first row or last column
                // on the same anti-diagonal
                let k = i + j;
                let (a, b) = if k < d { (0, k) } else { (k - d + 1, d - 1) };
                prop_assert_eq!(h.entry(i, j), h.entry(a, b));
            }
        }
    }
}

#[test]
fn rank_and_signature_count_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let u = random_rooted_univariate(&mut rng, 6);
        let h = hermite_matrix(&u.poly, 0).unwrap();
        let (rank, sig) = rank_signature(&h, &[]).unwrap();
        assert_eq!(rank, distinct_roots(&u.poly), "{}", u.poly);
        assert_eq!(rank, u.distinct, "{}", u.poly);
        assert_eq!(sig, u.real as i64, "{}", u.poly);
    }
}

fn random_in_t(rng: &mut impl Rng, deg: u32) -> MultiPoly {
    // monic in t, coefficients linear in x
    let v = strs(&["t", "x"]);
    let mut text = format!("t^{deg}");
    for k in 0..deg {
        let a: i64 = rng.random_range(-4..=4);
        let b: i64 = rng.random_range(-4..=4);
        text.push_str(&format!(" + ({a}*x + {b})*t^{k}"));
    }
    parse_poly(&text, &v).unwrap()
}

#[test]
fn resultant_detects_common_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let c = random_in_t(&mut rng, 1);
        let (da, db) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let a = random_in_t(&mut rng, da);
        let b = random_in_t(&mut rng, db);
        let g = univariate_view(&(&a * &c), 0).unwrap();
        let h = univariate_view(&(&b * &c), 0).unwrap();
        assert!(sylvester_resultant(&g, &h).unwrap().is_zero());

        let r = sylvester_resultant(
            &univariate_view(&a, 0).unwrap(),
            &univariate_view(&b, 0).unwrap(),
        )
        .unwrap();
        if r.is_zero() {
            continue;
        }
        // a nonzero resultant vanishes at finitely many x
        let nonzero = (0..10)
            .filter(|k| !r.evaluate(&[rat(*k, 3)]).unwrap().is_zero())
            .count();
        assert!(nonzero >= 10 - r.total_degree().unwrap() as usize);
    }
}

#[test]
fn coprime_linear_factors_give_nonzero_resultant() {
    let v = strs(&["t", "x"]);
    let a = parse_poly("(t - x)*(t - 2*x)", &v).unwrap();
    let b = parse_poly("(t + x)*(t - 3)", &v).unwrap();
    let r = sylvester_resultant(&univariate_view(&a, 0).unwrap(), &univariate_view(&b, 0).unwrap())
        .unwrap();
    // product of a(root of b): (-2x)(-3x)(3 - x)(3 - 2x)
    let expect = parse_poly("6*x^2*(3 - x)*(3 - 2*x)", &strs(&["x"])).unwrap();
    assert_eq!(r, expect);
}

#[test]
fn discriminant_matches_classical_formulas() {
    let v = strs(&["t", "a", "b", "c"]);
    let q = parse_poly("t^2 + a*t + b", &v).unwrap();
    let dq = discriminant(&univariate_view(&q, 0).unwrap()).unwrap();
    assert_eq!(dq, parse_poly("a^2 - 4*b", &strs(&["a", "b", "c"])).unwrap());

    let cubic = parse_poly("t^3 + a*t^2 + b*t + c", &v).unwrap();
    let view = univariate_view(&cubic, 0).unwrap();
    let dc = discriminant(&view).unwrap();
    let classical = parse_poly(
        "a^2*b^2 - 4*b^3 - 4*a^3*c - 27*c^2 + 18*a*b*c",
        &strs(&["a", "b", "c"]),
    )
    .unwrap();
    assert_eq!(dc, classical);
    // d = 3: (-1)^3 Res(f, f')
    let res = sylvester_resultant(&view, &view.derivative().unwrap()).unwrap();
    assert_eq!(dc, -res);
}

/// The printed sum of squares for the discriminant of `F_c`, `c = b^2`,
/// carries an extra factor `b^6`.
#[test]
fn f_c_discriminant_is_a_scaled_sum_of_squares() {
    use hyperbolicity::corpus::f_c;
    let v = strs(&["x", "y"]);
    for (p, q) in [(1, 1), (2, 1), (1, 2), (3, 2), (-2, 3)] {
        let b = rat(p, q);
        let f = f_c(&(&b * &b)).scale(&rat(-1, 1));
        let delta = discriminant(&univariate_view(&f, 0).unwrap()).unwrap();
        let b2 = &b * &b;
        let pw = |k: i32| num_traits::pow(b.clone(), k as usize);
        let printed = parse_poly(
            &format!(
                "({})^2*x^6 + ({})*x^2*y^4 + 20*({})*x^4*y^2 + 4*({})*y^6 \
                 + 12*({})*x^2*y^4 + 12*({})*x^4*y^2",
                &pw(6) * rat(2, 1) - rat(2, 1),
                pw(10),
                pw(8),
                pw(6),
                pw(4),
                b2,
            ),
            &v,
        )
        .unwrap();
        assert_eq!(delta.scale(&pw(6)), printed, "b = {b}");
    }
}
