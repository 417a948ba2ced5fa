//! Hermite-form pipeline: `F` is hyperbolic at `(1, 0, ..., 0)` iff its
//! Hermite matrix is positive semidefinite everywhere, relaxed to an SOS
//! certificate of the Hermite form `u^T H u`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::certify::{sos_decompose, BasisRule, CertifyFailure};
use crate::error::Result;
use crate::polyring::{Monomial, MultiPoly, Point};
use crate::structmats::hermite_form;
use crate::verdict::{combine, Certificate, Method, Prepared, Verdict, VerdictOptions};

/// SOS search data for the Hermite form of a normalized `g`, multiplied by
/// `(sum x_i^2)^k`.
pub struct HermiteProblem {
    pub target: MultiPoly,
    pub basis: Vec<Monomial>,
    pub vars: Vec<String>,
}

/// Basis `{u_j * mu : deg mu = j - 1 + k}` in `(x_1..x_n, u_1..u_d)`.
pub fn hermite_basis(n: usize, d: usize, k: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for j in 0..d {
        let degs = if n == 0 {
            if j == 0 && k == 0 {
                vec![Monomial::one(0)]
            } else {
                vec![]
            }
        } else {
            Monomial::all_of_degree(n, j as u32 + k)
        };
        for mu in degs {
            let mut e = mu.exps().to_vec();
            e.resize(n + d, 0);
            e[n + j] = 1;
            out.push(Monomial::new(e));
        }
    }
    out
}

pub fn hermite_problem(g: &MultiPoly, x_names: &[String], k: u32) -> Result<HermiteProblem> {
    let h = hermite_form(g)?;
    let n = g.num_vars() - 1;
    let d = h.num_vars() - n;
    let target = if n == 0 || k == 0 {
        h
    } else {
        let sq = (0..n).fold(MultiPoly::zero(n + d), |acc, i| {
            let xi = MultiPoly::var(n + d, i);
            &acc + &(&xi * &xi)
        });
        &h * &sq.pow(k)
    };
    let mut vars = x_names.to_vec();
    vars.extend((1..=d).map(|j| format!("u{j}")));
    Ok(HermiteProblem {
        target,
        basis: hermite_basis(n, d, k),
        vars,
    })
}

pub fn hermite_verdict(f: &MultiPoly, e: &Point, opts: &VerdictOptions) -> Result<Verdict> {
    let prep = Prepared::new(f, e, opts)?;
    let ks: Vec<u32> = match opts.sos_degree {
        Some(k) => vec![k],
        None if prep.num_x() == 0 => vec![0],
        None => vec![0, 1],
    };
    let x_names = prep.x_names();
    let g = prep.normalized.clone();
    let tols = opts.tols.clone();
    let n = prep.num_x();
    let mut v = combine(&prep, Method::Hermite, opts, move || {
        let mut diag: BTreeMap<String, Value> = BTreeMap::new();
        let mut attempts = Vec::new();
        let mut last_degree = 0;
        for &k in &ks {
            let prob = hermite_problem(&g, &x_names, k)?;
            last_degree = prob.target.total_degree().unwrap_or(0);
            let out = sos_decompose(
                &prob.target,
                &prob.vars,
                &BasisRule::Explicit(prob.basis.clone()),
                &tols,
            )?;
            match out {
                Ok(cert) => {
                    attempts.push(
                        json!({"k": k, "basis_size": prob.basis.len(), "result": "feasible"}),
                    );
                    diag.insert("sos_attempts".into(), json!(attempts));
                    diag.insert("sos_multiplier_exponent".into(), json!(k));
                    return Ok(Ok((Certificate::Gram(cert), diag)));
                }
                Err(fail) => {
                    attempts.push(
                        json!({"k": k, "basis_size": prob.basis.len(), "result": fail.to_string()}),
                    );
                    if let CertifyFailure::NumericFailure(_) = fail {
                        diag.insert("solver_failure".into(), json!(true));
                    }
                }
            }
        }
        diag.insert("sos_attempts".into(), json!(attempts));
        let reason = if diag.contains_key("solver_failure") {
            format!("sos-unresolved-at-degree-{last_degree}")
        } else {
            format!("sos-infeasible-at-degree-{last_degree}")
        };
        Ok(Err((reason, diag)))
    })?;
    if n <= 2 {
        v.note(
            "sos_relaxation",
            "exact for at most two variables besides x0; an infeasible search is evidence, not a refutation",
        );
    } else {
        v.note("sos_relaxation", "sufficient only");
    }
    Ok(v)
}
