#![allow(dead_code)]

use hyperbolicity::polyring::{rat, Monomial, MultiPoly};
use proptest::prelude::*;
use rand::Rng;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

pub fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Homogeneous form of degree `d` in `n + 1` variables with the given
/// coefficients, cycled over the degree-`d` monomials.
pub fn form_from(nv: usize, d: u32, coeffs: &[(i64, i64)]) -> MultiPoly {
    let monos = Monomial::all_of_degree(nv, d);
    MultiPoly::from_terms(
        nv,
        monos
            .into_iter()
            .zip(coeffs.iter().cycle())
            .map(|(m, &(p, q))| (m, rat(p, q))),
    )
}

/// Random form normalized at `(1, 0, ..., 0)`: the `x0^d` coefficient is 1.
pub fn random_monic_form(rng: &mut impl Rng, d: u32, n: usize) -> MultiPoly {
    let nv = n + 1;
    let monos = Monomial::all_of_degree(nv, d);
    MultiPoly::from_terms(
        nv,
        monos.into_iter().map(|m| {
            let c = if m.exps()[0] == d {
                rat(1, 1)
            } else {
                rat(rng.random_range(-5..=5), rng.random_range(1..=3))
            };
            (m, c)
        }),
    )
}

pub fn arb_rational() -> impl Strategy<Value = (i64, i64)> {
    (-9i64..=9, 1i64..=4)
}

/// Sparse polynomial in `nv` variables with total degree at most 3.
pub fn arb_poly(nv: usize) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0u32..=2, nv), arb_rational()), 0..5).prop_map(
        move |terms| {
            MultiPoly::from_terms(
                nv,
                terms
                    .into_iter()
                    .map(|(e, (p, q))| (Monomial::new(e), rat(p, q))),
            )
        },
    )
}

/// `(d, n, form)` with `1 <= d <= max_d`, `1 <= n <= max_n`, nonzero.
pub fn arb_form(max_d: u32, max_n: usize) -> impl Strategy<Value = (u32, usize, MultiPoly)> {
    (1..=max_d, 1..=max_n)
        .prop_flat_map(|(d, n)| {
            (
                Just(d),
                Just(n),
                prop::collection::vec(arb_rational(), 1..12),
            )
        })
        .prop_map(|(d, n, coeffs)| (d, n, form_from(n + 1, d, &coeffs)))
        .prop_filter("nonzero", |(_, _, f)| !f.is_zero())
}

/// Monic univariate in one variable with a known factorization.
pub struct RootedUni {
    pub poly: MultiPoly,
    pub distinct: usize,
    pub real: usize,
}

/// Product of random real linear factors and irreducible real quadratics,
/// with repetitions, of degree `1..=max_d`.
pub fn random_rooted_univariate(rng: &mut impl Rng, max_d: u32) -> RootedUni {
    use num_rational::BigRational;
    let d = rng.random_range(1..=max_d);
    let t = MultiPoly::var(1, 0);
    let mut poly = MultiPoly::one(1);
    let mut deg = 0;
    let mut reals: Vec<BigRational> = Vec::new();
    let mut pairs: Vec<(BigRational, BigRational)> = Vec::new();
    while deg < d {
        let room = d - deg;
        let mult = if rng.random_bool(0.3) { 2 } else { 1 };
        if room >= 2 && rng.random_bool(0.4) {
            let b = rat(rng.random_range(-3..=3), rng.random_range(1..=2));
            let c = &b * &b / rat(4, 1) + rat(rng.random_range(1..=4), rng.random_range(1..=3));
            let q = &(&(&t * &t) + &t.scale(&b)) + &MultiPoly::constant(1, c.clone());
            let times = if room >= 4 { mult } else { 1 };
            for _ in 0..times {
                poly = &poly * &q;
            }
            deg += 2 * times;
            if !pairs.contains(&(b.clone(), c.clone())) {
                pairs.push((b, c));
            }
        } else {
            let r = rat(rng.random_range(-3..=3), rng.random_range(1..=2));
            let lin = &t - &MultiPoly::constant(1, r.clone());
            let times = mult.min(room);
            for _ in 0..times {
                poly = &poly * &lin;
            }
            deg += times;
            if !reals.contains(&r) {
                reals.push(r);
            }
        }
    }
    RootedUni {
        poly,
        distinct: reals.len() + 2 * pairs.len(),
        real: reals.len(),
    }
}

/// Ascending dense coefficients of a univariate in one variable.
pub fn dense(p: &MultiPoly) -> Vec<num_rational::BigRational> {
    let d = p.degree_in(0).unwrap_or(0);
    (0..=d).map(|k| p.coeff_of(&[k])).collect()
}

fn trim(mut a: Vec<num_rational::BigRational>) -> Vec<num_rational::BigRational> {
    use num_traits::Zero;
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn rem(a: &[num_rational::BigRational], b: &[num_rational::BigRational]) -> Vec<num_rational::BigRational> {
    let mut r = a.to_vec();
    let lb = b.last().unwrap().clone();
    while r.len() >= b.len() {
        let q = r.last().unwrap() / &lb;
        let shift = r.len() - b.len();
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &q * c;
        }
        r.pop();
        r = trim(r);
    }
    r
}

/// Degree of `gcd(a, b)` by the Euclidean algorithm over the rationals.
pub fn gcd_degree(a: &[num_rational::BigRational], b: &[num_rational::BigRational]) -> usize {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(&a, &b);
        a = b;
        b = r;
    }
    a.len().saturating_sub(1)
}

/// Number of distinct complex roots: `deg f - deg gcd(f, f')`.
pub fn distinct_roots(p: &MultiPoly) -> usize {
    let f = dense(p);
    let df: Vec<_> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * rat(k as i64, 1))
        .collect();
    f.len() - 1 - gcd_degree(&f, &df)
}

/// `sum multiplier * generator` of a certificate in floating point.
pub fn reconstruct_f64(
    cert: &hyperbolicity::certify::IdentityCertificate,
) -> std::collections::BTreeMap<Monomial, f64> {
    use hyperbolicity::certify::MultiplierBlock;
    use hyperbolicity::polyring::rat_to_f64;
    let mut out: std::collections::BTreeMap<Monomial, f64> = Default::default();
    let mut add = |mult: Vec<(Monomial, f64)>, gen: &MultiPoly| {
        for (m, c) in &mult {
            for (g, gc) in gen.terms() {
                *out.entry(m.mul(g)).or_default() += c * rat_to_f64(gc);
            }
        }
    };
    for b in &cert.blocks {
        match b {
            MultiplierBlock::Sos { generator, gram } => {
                add(gram.float_polynomial_coeffs().into_iter().collect(), generator)
            }
            MultiplierBlock::Free {
                generator,
                monomials,
                coeffs,
                ..
            } => add(
                monomials.iter().cloned().zip(coeffs.iter().copied()).collect(),
                generator,
            ),
        }
    }
    out
}

/// Max coefficient gap between a reconstruction and `target`, relative to
/// `max(1, max |target coeff|)`.
pub fn relative_gap(recon: &std::collections::BTreeMap<Monomial, f64>, target: &MultiPoly) -> f64 {
    use hyperbolicity::polyring::rat_to_f64;
    let mut diff = recon.clone();
    for (m, c) in target.terms() {
        *diff.entry(m.clone()).or_default() -= rat_to_f64(c);
    }
    let scale = rat_to_f64(&target.max_abs_coeff()).max(1.0);
    diff.values().fold(0.0f64, |a, v| a.max(v.abs())) / scale
}

/// Random form of degree `deg` in `(x1, x2)` as a polynomial in `(t2, x1, x2)`.
pub fn random_coeff(rng: &mut impl Rng, deg: u32) -> MultiPoly {
    MultiPoly::from_terms(
        3,
        Monomial::all_of_degree(2, deg).into_iter().map(|m| {
            let mut e = vec![0];
            e.extend_from_slice(m.exps());
            (Monomial::new(e), rat(rng.random_range(-4..=4), 1))
        }),
    )
}

/// `t^d + f1 t^{d-1} + ... + fd` as a form in `(x0, x1, x2)`.
pub fn assemble(fs: &[MultiPoly]) -> MultiPoly {
    let d = fs.len() as u32;
    let mut out = MultiPoly::monomial(3, Monomial::new(vec![d, 0, 0]), rat(1, 1));
    for (k, f) in fs.iter().enumerate() {
        let x0 = MultiPoly::var(3, 0).pow(d - 1 - k as u32);
        // f lives in (t2, x1, x2) with no t2, same slots as (x0, x1, x2)
        out += &(&x0 * f);
    }
    out
}

