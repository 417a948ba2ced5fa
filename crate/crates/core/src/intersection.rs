//! Real/imaginary-part pipeline. With `x_0 = t_1 + i t_2`, the form has a
//! non-real root in some direction iff `f_re` and `f_im` share a real zero
//! with `t_2 ≠ 0`; the resultant in `t_1` factors as `t_2^p R_F`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::certify::{
    float_json, monomials_up_to, weighted_sos_identity, IdentitySpec, IdentityTerm,
};
use crate::error::{Error, Result};
use crate::polyring::{rat, rat_to_f64, Monomial, MultiPoly, Point};
use crate::structmats::{sylvester_resultant, univariate_view};
use crate::verdict::{combine, Certificate, Method, Prepared, Verdict, VerdictOptions};

/// `f(t_1 + i t_2, x) = f_re + i f_im`, both in `(t_1, t_2, x_1, ..., x_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPair {
    pub f_re: MultiPoly,
    pub f_im: MultiPoly,
}

/// `Res_{t_1}(f_re, f_im) = t_2^p R_F`, polynomials in `(t_2, x_1, ..., x_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultantFactorization {
    pub p: u32,
    pub r_f: MultiPoly,
    pub full: MultiPoly,
}

/// Substitutes `x_0 ↦ t_1 + i t_2` in a form normalized at `(1, 0, ..., 0)`.
pub fn complex_split(g: &MultiPoly) -> SplitPair {
    let n = g.num_vars() - 1;
    let nv = n + 2;
    let mut re: BTreeMap<Monomial, BigRational> = BTreeMap::new();
    let mut im: BTreeMap<Monomial, BigRational> = BTreeMap::new();
    for (m, c) in g.terms() {
        let k = m.exps()[0];
        for j in 0..=k {
            let coeff = c * BigRational::from_integer(binomial(BigInt::from(k), BigInt::from(j)));
            let mut e = Vec::with_capacity(nv);
            e.push(k - j);
            e.push(j);
            e.extend_from_slice(&m.exps()[1..]);
            let mono = Monomial::new(e);
            // i^j cycles through 1, i, -1, -i
            let (target, neg) = match j % 4 {
                0 => (&mut re, false),
                1 => (&mut im, false),
                2 => (&mut re, true),
                _ => (&mut im, true),
            };
            let slot = target.entry(mono).or_insert_with(BigRational::zero);
            if neg {
                *slot -= coeff;
            } else {
                *slot += coeff;
            }
        }
    }
    SplitPair {
        f_re: MultiPoly::from_terms(nv, re),
        f_im: MultiPoly::from_terms(nv, im),
    }
}

/// Resultant of the split pair in `t_1` with the maximal power of `t_2`
/// divided out.
pub fn resultant_factor(g: &MultiPoly) -> Result<ResultantFactorization> {
    if g.total_degree().unwrap_or(0) < 1 {
        return Err(Error::DegreeTooSmall {
            needed: 1,
            found: 0,
        });
    }
    let sp = complex_split(g);
    let a = univariate_view(&sp.f_re, 0)?;
    let b = univariate_view(&sp.f_im, 0)?;
    let full = sylvester_resultant(&a, &b)?;
    if full.is_zero() {
        return Err(Error::DegenerateResultant);
    }
    let p = full.min_degree_in(0).unwrap_or(0);
    let nv = full.num_vars();
    let mut e = vec![0u32; nv];
    e[0] = p;
    let t2p = MultiPoly::monomial(nv, Monomial::new(e), BigRational::one());
    let r_f = full.exact_div(&t2p)?;
    Ok(ResultantFactorization { p, r_f, full })
}

/// `R_F` with `u = t_2^2` substituted, in `(u, x_1, ..., x_n)`.
pub fn resultant_in_u(fac: &ResultantFactorization) -> Result<MultiPoly> {
    if !fac.r_f.is_even_in(0) {
        return Err(Error::InvalidInput("R_F is not even in t2".into()));
    }
    Ok(fac.r_f.halve_exponents(0))
}

/// Deterministic generic sample points `(u, x)` with `u > 0`.
fn sample_points(nv: usize) -> impl Iterator<Item = Vec<BigRational>> {
    const P: [i64; 8] = [3, 5, 7, 11, 13, 17, 19, 23];
    (0..16usize).map(move |k| {
        (0..nv)
            .map(|i| {
                if i == 0 {
                    rat(1 + k as i64, 2)
                } else {
                    rat(((i * 7 + k * 3) % 11) as i64 - 5, P[(i + k) % 8])
                }
            })
            .collect()
    })
}

/// Sign of `R` at a generic point with `u > 0`.
pub fn candidate_sign(r: &MultiPoly) -> Option<i32> {
    for pt in sample_points(r.num_vars()) {
        let v = r.evaluate(&pt).ok()?;
        if !v.is_zero() {
            return Some(if v.is_positive() { 1 } else { -1 });
        }
    }
    None
}

/// Weighted-homogeneous monomials in `(u, x)` with weight 2 on `u`.
fn weighted_basis(nv: usize, degree: u32) -> Vec<Monomial> {
    let mut w = vec![1u32; nv];
    w[0] = 2;
    monomials_up_to(nv, degree, Some(&w))
        .into_iter()
        .filter(|m| m.weighted_degree(&w) == degree)
        .collect()
}

pub fn intersection_verdict(f: &MultiPoly, e: &Point, opts: &VerdictOptions) -> Result<Verdict> {
    let prep = Prepared::new(f, e, opts)?;
    let g = prep.normalized.clone();
    let mut names = vec!["u".to_string()];
    names.extend(prep.x_names());
    let tols = opts.tols.clone();
    combine(&prep, Method::Intersection, opts, move || {
        let mut diag: BTreeMap<String, Value> = BTreeMap::new();
        let fac = resultant_factor(&g)?;
        let r = resultant_in_u(&fac)?;
        diag.insert("p".into(), json!(fac.p));
        let nv = r.num_vars();
        let Some(sign) = candidate_sign(&r) else {
            return Ok(Err((
                "R_F vanishes at every sample point".to_string(),
                diag,
            )));
        };
        diag.insert("candidate_sign".into(), json!(sign));
        let k = r.degree_in(0).unwrap_or(0);
        let mut w = vec![1u32; nv];
        w[0] = 2;
        let wdeg = r
            .terms()
            .map(|(m, _)| m.weighted_degree(&w))
            .max()
            .unwrap_or(0);
        let homogeneous = r.terms().all(|(m, _)| m.weighted_degree(&w) == wdeg);
        if !homogeneous || wdeg % 2 == 1 {
            return Ok(Err((
                "R_F has no even weighted-homogeneous shape".to_string(),
                diag,
            )));
        }
        let sr = r.scale(&BigRational::from_integer(sign.into()));
        // leading coefficient in u as a polynomial in x
        let lead = MultiPoly::from_terms(
            nv,
            sr.terms()
                .filter(|(m, _)| m.exps()[0] == k)
                .map(|(m, c)| (m.clone(), c.clone())),
        );
        let lead_scale = {
            let c = lead.constant_term().abs();
            if c.is_zero() {
                lead.max_abs_coeff()
            } else {
                c
            }
        };
        let mut uk = vec![0u32; nv];
        uk[0] = k;
        let uk = MultiPoly::monomial(nv, Monomial::new(uk), BigRational::one());
        let u = MultiPoly::var(nv, 0);
        let b0 = weighted_basis(nv, wdeg / 2);
        let b1 = if wdeg >= 2 {
            weighted_basis(nv, (wdeg - 2) / 2)
        } else {
            vec![]
        };
        let mut attempts = Vec::new();
        let mut solver_failed = false;
        for factor in [rat(1, 1), rat(1, 100), rat(1, 10000)] {
            let eps = &lead_scale * &factor;
            let target = &sr - &uk.scale(&eps);
            let mut terms = vec![IdentityTerm::sos(MultiPoly::one(nv)).with_basis(b0.clone())];
            if !b1.is_empty() {
                terms.push(IdentityTerm::sos(u.clone()).with_basis(b1.clone()));
            }
            let spec = IdentitySpec {
                target,
                terms,
                degree_bound: wdeg,
                weights: Some(w.clone()),
                vars: names.clone(),
            };
            let out = weighted_sos_identity(&spec, &tols)?;
            match out {
                Ok(cert) => {
                    attempts.push(
                        json!({"epsilon": float_json(rat_to_f64(&eps)), "result": "feasible"}),
                    );
                    diag.insert("epsilon_attempts".into(), json!(attempts));
                    diag.insert("K".into(), json!(k));
                    return Ok(Ok((Certificate::Identity(cert), diag)));
                }
                Err(fail) => {
                    solver_failed |=
                        matches!(fail, crate::certify::CertifyFailure::NumericFailure(_));
                    attempts.push(json!({"epsilon": float_json(rat_to_f64(&eps)), "result": fail.to_string()}));
                }
            }
        }
        diag.insert("epsilon_attempts".into(), json!(attempts));
        let what = if solver_failed {
            "unresolved"
        } else {
            "infeasible"
        };
        Ok(Err((
            format!("strict-positivity certificate {what} at degree {wdeg}"),
            diag,
        )))
    })
}

/// Real Nullstellensatz route: search `sigma + q_1 f_re + q_2 f_im +
/// q_3 (1 - y t_2) = -1` in `(t_1, t_2, x, y)` with all terms of degree at
/// most `D`. Success proves the system has no real zero; failure is never a
/// refutation.
pub fn nullsatz_verdict(f: &MultiPoly, e: &Point, opts: &VerdictOptions) -> Result<Verdict> {
    let prep = Prepared::new(f, e, opts)?;
    let d = prep.degree;
    let bound = opts.degree_bound.unwrap_or(2 * d + 2);
    let g = prep.normalized.clone();
    let mut names = vec!["t1".to_string(), "t2".to_string()];
    names.extend(prep.x_names());
    names.push("y".to_string());
    let tols = opts.tols.clone();
    combine(&prep, Method::Nullsatz, opts, move || {
        let mut diag: BTreeMap<String, Value> = BTreeMap::new();
        diag.insert("degree_bound".into(), json!(bound));
        let sp = complex_split(&g);
        let nv = sp.f_re.num_vars() + 1;
        let lift: Vec<usize> = (0..nv - 1).collect();
        let f_re = sp.f_re.remap(&lift, nv);
        let f_im = sp.f_im.remap(&lift, nv);
        let y_t2 = &MultiPoly::var(nv, nv - 1) * &MultiPoly::var(nv, 1);
        let third = &MultiPoly::one(nv) - &y_t2;
        if f_re.total_degree().unwrap_or(0) > bound {
            return Ok(Err((
                format!("degree bound {bound} below the input degree"),
                diag,
            )));
        }
        let spec = IdentitySpec {
            target: MultiPoly::from_int(nv, -1),
            terms: vec![
                IdentityTerm::sos(MultiPoly::one(nv)),
                IdentityTerm::free(f_re),
                IdentityTerm::free(f_im),
                IdentityTerm::free(third),
            ],
            degree_bound: bound,
            weights: None,
            vars: names.clone(),
        };
        match weighted_sos_identity(&spec, &tols)? {
            Ok(cert) => Ok(Ok((Certificate::Identity(cert), diag))),
            Err(fail) => {
                diag.insert("solver".into(), json!(fail.to_string()));
                Ok(Err((
                    format!("no Nullstellensatz certificate at degree bound {bound}"),
                    diag,
                )))
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;
    use crate::verdict::Status;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn p(text: &str, vars: &[&str]) -> MultiPoly {
        parse_poly(text, &names(vars)).unwrap()
    }

    #[test]
    fn split_of_square() {
        let sp = complex_split(&p("x0^2", &["x0"]));
        assert_eq!(sp.f_re, p("t1^2 - t2^2", &["t1", "t2"]));
        assert_eq!(sp.f_im, p("2*t1*t2", &["t1", "t2"]));
    }

    #[test]
    fn split_of_generic_cubic() {
        let v = ["x0", "f1", "f2", "f3"];
        let sp = complex_split(&p("x0^3 + f1*x0^2 + f2*x0 + f3", &v));
        let w = ["t1", "t2", "f1", "f2", "f3"];
        assert_eq!(sp.f_im, p("3*t1^2*t2 + 2*t1*t2*f1 + t2*f2 - t2^3", &w));
        assert!(sp.f_re.is_even_in(1));
        assert!(sp.f_im.is_odd_in(1));
    }

    #[test]
    fn quadric_factorization() {
        let fac = resultant_factor(&p("x0^2 - x1^2", &["x0", "x1"])).unwrap();
        assert_eq!(fac.p, 2);
        assert_eq!(fac.r_f, p("-4*x1^2 - 4*t2^2", &["t2", "x1"]));
        assert_eq!(fac.full, p("-4*t2^2*x1^2 - 4*t2^4", &["t2", "x1"]));
    }

    #[test]
    fn linear_form() {
        let fac = resultant_factor(&p("x0 + 3*x1", &["x0", "x1"])).unwrap();
        assert_eq!(fac.p, 1);
        assert_eq!(fac.r_f, MultiPoly::one(2));
    }

    #[test]
    fn cone_intersection_certificate() {
        let f = p("x0^2 - x1^2 - x2^2", &["x0", "x1", "x2"]);
        let opts = VerdictOptions {
            samples: 100,
            ..Default::default()
        };
        let v = intersection_verdict(&f, &Point::unit(3), &opts).unwrap();
        assert_eq!(v.status, Status::Hyperbolic, "{:?}", v.reason);
    }

    #[test]
    fn square_nullstellensatz() {
        let f = p("x0^2", &["x0"]);
        let opts = VerdictOptions {
            samples: 10,
            ..Default::default()
        };
        let v = nullsatz_verdict(&f, &Point::unit(1), &opts).unwrap();
        assert_eq!(v.status, Status::Hyperbolic, "{:?}", v.reason);
    }
}
