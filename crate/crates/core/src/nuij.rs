//! Nuij-path pipeline: deform a normalized form to a fixed strictly
//! hyperbolic one and certify that the discriminant stays nonnegative along
//! the way.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::certify::rounding::approx_rational;
use crate::certify::{
    float_json, monomials_up_to, weighted_sos_identity, CertifyFailure, IdentityCertificate,
    IdentitySpec, IdentityTerm, Tolerances,
};
use crate::error::{Error, Result};
use crate::polyring::{format_rational, rat, rat_to_f64, Monomial, MultiPoly, Point};
use crate::sampler::Falsifier;
use crate::structmats::{discriminant, univariate_view};
use crate::verdict::{combine, Certificate, Method, Prepared, Status, Verdict, VerdictOptions};

/// `N_s(F)` with `s` formal, in `(t, x_1, ..., x_n, s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuijPath {
    pub poly: MultiPoly,
    pub degree: u32,
    /// Applications of each `T^{x_i}`.
    pub applications: u32,
    pub source: MultiPoly,
}

impl NuijPath {
    pub fn num_x(&self) -> usize {
        self.source.num_vars() - 1
    }

    /// Index of `s` in `poly`.
    pub fn s_var(&self) -> usize {
        self.poly.num_vars() - 1
    }

    /// `N_s(F)` at a fixed rational `s`, in `(t, x)`.
    pub fn at(&self, s: &BigRational) -> MultiPoly {
        self.poly.specialize(self.s_var(), s)
    }

    /// Discriminant in `t`, as a polynomial in `(s, x_1, ..., x_n)`.
    pub fn discriminant(&self) -> Result<MultiPoly> {
        let v = univariate_view(&self.poly, 0)?;
        let disc = discriminant(&v)?;
        // coefficient ring is (x_1..x_n, s)
        let n = self.num_x();
        let mapping: Vec<usize> = (0..n).map(|i| i + 1).chain(std::iter::once(0)).collect();
        Ok(disc.remap(&mapping, n + 1))
    }
}

/// `T^ℓ_s : F ↦ F + s ℓ ∂F/∂t`, with `t` the first variable. `ell` and `s`
/// live in the ring of `f`; `s` may be a constant or a formal expression.
pub fn nuij_t(f: &MultiPoly, ell: &MultiPoly, s: &MultiPoly) -> Result<MultiPoly> {
    let linear = ell
        .terms()
        .all(|(m, _)| m.degree() == 1 && m.exps()[0] == 0);
    if !linear || ell.num_vars() != f.num_vars() {
        return Err(Error::NotLinear);
    }
    Ok(f + &(&(s * ell) * &f.partial_derivative(0)))
}

/// Builds `N_s = H_{1-s} G_s` on a normalized form. `applications` is the
/// number of times each `T^{x_i}_{1-s}` is applied (default: the degree).
pub fn nuij_path(f: &MultiPoly, applications: Option<u32>) -> Result<NuijPath> {
    let d = f.homogeneous_degree()?;
    let nv = f.num_vars();
    let mut e0 = vec![BigRational::zero(); nv];
    e0[0] = rat(1, 1);
    if f.evaluate(&e0)? != rat(1, 1) {
        return Err(Error::NotMonic);
    }
    let k = applications.unwrap_or(d);
    let n = nv - 1;
    let m = nv + 1;
    let s = MultiPoly::var(m, n + 1);
    // G_s: x_i -> s x_i
    let subs: Vec<MultiPoly> = (0..nv)
        .map(|i| {
            let v = MultiPoly::var(m, i);
            if i == 0 {
                v
            } else {
                &v * &s
            }
        })
        .collect();
    let mut poly = f.compose(&subs);
    let one_minus_s = &MultiPoly::one(m) - &s;
    // rightmost factor first: x_n, then down to x_1
    for i in (1..=n).rev() {
        let ell = MultiPoly::var(m, i);
        for _ in 0..k {
            poly = nuij_t(&poly, &ell, &one_minus_s)?;
        }
    }
    Ok(NuijPath {
        poly,
        degree: d,
        applications: k,
        source: f.clone(),
    })
}

/// `Δ_N(F)` in `(s, x_1, ..., x_n)`.
pub fn npath_discriminant(f: &MultiPoly, applications: Option<u32>) -> Result<MultiPoly> {
    let path = nuij_path(f, applications)?;
    if path.degree < 2 {
        return Err(Error::DegreeTooSmall {
            needed: 2,
            found: path.degree,
        });
    }
    path.discriminant()
}

fn strip_generator(nv: usize) -> MultiPoly {
    let s = MultiPoly::var(nv, 0);
    &s - &(&s * &s)
}

/// Monomials `s^i x^mu` with `i <= s_max` and `|mu| = xdeg`, `s` first.
fn biform_basis(nx: usize, s_max: u32, xdeg: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for mu in Monomial::all_of_degree(nx, xdeg) {
        for i in 0..=s_max {
            let mut e = vec![i];
            e.extend_from_slice(mu.exps());
            out.push(Monomial::new(e));
        }
    }
    out
}

/// Monomials `s^i y^j` with `i <= s_max`, `j <= y_max` (no `y` when
/// `nv == 1`).
fn box_basis(nv: usize, s_max: u32, y_max: u32) -> Vec<Monomial> {
    let y_max = if nv > 1 { y_max } else { 0 };
    let mut out = Vec::new();
    for j in 0..=y_max {
        for i in 0..=s_max {
            let mut e = vec![i];
            if nv > 1 {
                e.push(j);
            }
            out.push(Monomial::new(e));
        }
    }
    out
}

struct StripProblem {
    target: MultiPoly,
    /// Positive weight multiplied by the margin.
    margin_form: MultiPoly,
    vars: Vec<String>,
    /// Returns the bases of `sigma_1`, `sigma_2` for a degree level.
    bases: Box<dyn Fn(u32) -> (Vec<Monomial>, Vec<Monomial>) + Send>,
    start: u32,
    variant: &'static str,
}

fn strip_problem(disc: &MultiPoly, x_names: &[String]) -> StripProblem {
    let n = disc.num_vars() - 1;
    if n <= 2 {
        // dehomogenize the last x
        let target = disc.specialize(n, &rat(1, 1));
        let nv = target.num_vars();
        let mut vars = vec!["s".to_string()];
        vars.extend(x_names.iter().take(n - 1).cloned());
        let sdeg = target.degree_in(0).unwrap_or(0);
        let ydeg = if nv > 1 {
            target.degree_in(1).unwrap_or(0)
        } else {
            0
        };
        StripProblem {
            margin_form: MultiPoly::one(nv),
            target,
            vars,
            bases: Box::new(move |d| {
                (
                    box_basis(nv, d / 2, ydeg / 2),
                    box_basis(nv, d.saturating_sub(2) / 2, ydeg / 2),
                )
            }),
            start: sdeg + sdeg % 2,
            variant: "dehomogenized strip",
        }
    } else {
        let xdeg = disc
            .terms()
            .map(|(m, _)| m.degree() - m.exps()[0])
            .max()
            .unwrap_or(0);
        let sdeg = disc.degree_in(0).unwrap_or(0);
        let nv = n + 1;
        let sq = (1..nv).fold(MultiPoly::zero(nv), |acc, i| {
            let x = MultiPoly::var(nv, i);
            &acc + &(&x * &x)
        });
        let mut vars = vec!["s".to_string()];
        vars.extend(x_names.iter().cloned());
        StripProblem {
            target: disc.clone(),
            margin_form: sq.pow(xdeg / 2),
            vars,
            bases: Box::new(move |d| {
                (
                    biform_basis(n, d / 2, xdeg / 2),
                    biform_basis(n, d.saturating_sub(2) / 2, xdeg / 2),
                )
            }),
            start: sdeg + sdeg % 2,
            variant: "homogeneous weighted strip (sufficient only)",
        }
    }
}

/// Float evaluation whose value exceeds a generous rounding bound.
fn clearly_positive(p: &MultiPoly, pt: &[BigRational]) -> bool {
    let x: Vec<f64> = pt.iter().map(rat_to_f64).collect();
    let (mut value, mut bound) = (0.0f64, 0.0f64);
    for (m, c) in p.terms() {
        let term = m
            .exps()
            .iter()
            .zip(&x)
            .fold(rat_to_f64(c), |acc, (&e, xi)| acc * xi.powi(e as i32));
        value += term;
        bound += term.abs();
    }
    value.is_finite() && value > 1e-9 * bound
}

/// Looks for a point of the strip with `Δ_N < 0` and tries to turn its
/// direction into a confirmed witness.
fn sign_change_witness(
    disc: &MultiPoly,
    fz: &Falsifier,
    seed: u64,
    tries: usize,
) -> (usize, Option<crate::sampler::Witness>) {
    let n = disc.num_vars() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX / 2);
    let mut negatives = 0;
    for i in 0..tries {
        let s: f64 = rng.random_range(0.0..1.0);
        let a: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let a: Vec<f64> = a.into_iter().map(|x| x / norm).collect();
        let mut pt = vec![approx_rational(s, 10_000)];
        pt.extend(a.iter().map(|v| approx_rational(*v, 10_000)));
        if clearly_positive(disc, &pt) {
            continue;
        }
        let Ok(v) = disc.evaluate(&pt) else { continue };
        if !v.is_negative() {
            continue;
        }
        negatives += 1;
        if let Some(w) = fz.check_direction(&a, i) {
            return (negatives, Some(w));
        }
    }
    (negatives, None)
}

struct StripOutcome {
    certificate: Option<IdentityCertificate>,
    attempts: Vec<Value>,
    nonneg_failed: bool,
}

/// Degree hierarchy for `target - delta * margin = sigma_1 + sigma_2 s(1 - s)`:
/// plain nonnegativity first, then the strict margin.
/// Levels whose Gram blocks exceed `max_gram` rows in total are skipped.
fn strip_search(
    prob: &StripProblem,
    rounds: u32,
    max_gram: usize,
    tols: &Tolerances,
) -> Result<StripOutcome> {
    let nv = prob.target.num_vars();
    let gen = strip_generator(nv);
    let scale = rat_to_f64(&prob.target.max_abs_coeff()).max(1.0);
    let margins: Vec<BigRational> = [1e-6]
        .iter()
        .map(|m| approx_rational(m * scale, 1_000_000))
        .collect();
    let mut out = StripOutcome {
        certificate: None,
        attempts: Vec::new(),
        nonneg_failed: false,
    };
    for r in 0..rounds {
        let level = prob.start + 2 * r;
        let (b1, b2) = (prob.bases)(level);
        let gram_size = b1.len() + b2.len();
        if gram_size > max_gram {
            out.attempts.push(json!({
                "degree": level,
                "gram_size": gram_size,
                "result": format!("skipped, Gram size exceeds the budget {max_gram}"),
            }));
            break;
        }
        for delta in std::iter::once(BigRational::zero()).chain(margins.iter().cloned()) {
            let mut terms = vec![IdentityTerm::sos(MultiPoly::one(nv)).with_basis(b1.clone())];
            if !b2.is_empty() {
                terms.push(IdentityTerm::sos(gen.clone()).with_basis(b2.clone()));
            }
            let spec = IdentitySpec {
                target: &prob.target - &prob.margin_form.scale(&delta),
                terms,
                degree_bound: level + 2,
                weights: None,
                vars: prob.vars.clone(),
            };
            let res = weighted_sos_identity(&spec, tols)?;
            // a floating certificate only shows strictness when the margin
            // dominates the worst-case coefficient error
            let terms_bound = monomials_up_to(nv, level + 2, None).len() as f64;
            let dominated = |c: &IdentityCertificate| {
                c.exact || c.residual * terms_bound <= 0.5 * rat_to_f64(&delta) / scale
            };
            let mut attempt = json!({
                "degree": level,
                "gram_size": gram_size,
                "delta": format_rational(&delta),
                "result": match &res {
                    Ok(c) if !delta.is_zero() && !dominated(c) => {
                        "feasible within tolerance, margin not dominated".to_string()
                    }
                    Ok(_) => "feasible".to_string(),
                    Err(f) => f.to_string(),
                },
            });
            if let Ok(c) = &res {
                attempt["residual"] = float_json(c.residual);
                attempt["exact"] = json!(c.exact);
            }
            out.attempts.push(attempt);
            match res {
                Ok(cert) if !delta.is_zero() && dominated(&cert) => {
                    out.certificate = Some(cert);
                    return Ok(out);
                }
                Ok(_) => {}
                Err(CertifyFailure::Infeasible(_)) if delta.is_zero() => {
                    out.nonneg_failed = true;
                    break;
                }
                Err(_) if delta.is_zero() => break,
                Err(_) => {}
            }
        }
    }
    Ok(out)
}

/// `Δ_N(s, 1, 0)` for two variables: the direction the dehomogenization
/// `x_2 = 1` misses.
fn boundary_slice(disc: &MultiPoly) -> StripProblem {
    let target = disc.specialize(2, &rat(0, 1)).specialize(1, &rat(1, 1));
    let sdeg = target.degree_in(0).unwrap_or(0);
    StripProblem {
        target,
        margin_form: MultiPoly::one(1),
        vars: vec!["s".into()],
        bases: Box::new(|d| {
            (
                box_basis(1, d / 2, 0),
                box_basis(1, d.saturating_sub(2) / 2, 0),
            )
        }),
        start: sdeg + sdeg % 2,
        variant: "boundary slice",
    }
}

pub fn nuij_verdict(f: &MultiPoly, e: &Point, opts: &VerdictOptions) -> Result<Verdict> {
    let prep = Prepared::new(f, e, opts)?;
    let n = prep.num_x();
    if n == 0 || prep.degree < 2 {
        let mut v = Verdict::unknown(
            Method::Nuij,
            "the discriminant route needs n >= 1 and degree >= 2",
        );
        v.note("degree", prep.degree);
        return Ok(v);
    }
    let disc = npath_discriminant(&prep.normalized, opts.nuij_applications)?;
    // exact sign sampling first; a negative value rules out every certificate
    let fz = Falsifier::new(&prep.normalized, opts.sampler())?;
    let tries = opts.samples.min(500);
    let (negatives, sign_witness) = sign_change_witness(&disc, &fz, opts.seed, tries);
    let prob = strip_problem(&disc, &prep.x_names());
    let slice = (n == 2).then(|| boundary_slice(&disc));
    let tols = opts.tols.clone();
    let rounds = opts.nuij_rounds.max(1);
    let max_gram = opts.nuij_max_gram;
    let mut v = combine(&prep, Method::Nuij, opts, move || {
        let mut diag: BTreeMap<String, Value> = BTreeMap::new();
        diag.insert("strip_variant".into(), json!(prob.variant));
        if negatives > 0 {
            return Ok(Err((
                format!("the N-path discriminant is negative at {negatives} sampled strip points"),
                diag,
            )));
        }
        let main = strip_search(&prob, rounds, max_gram, &tols)?;
        diag.insert("strip_attempts".into(), json!(main.attempts));
        let Some(cert) = main.certificate else {
            let reason = if main.nonneg_failed {
                "no nonnegativity certificate on the strip"
            } else {
                "no strict positivity certificate on the strip"
            };
            return Ok(Err((format!("{reason} after {rounds} rounds"), diag)));
        };
        if let Some(slice) = &slice {
            let side = strip_search(slice, rounds, max_gram, &tols)?;
            diag.insert("boundary_slice_attempts".into(), json!(side.attempts));
            match side.certificate {
                Some(c) => {
                    diag.insert("boundary_slice_certificate".into(), c.to_json());
                }
                None => {
                    return Ok(Err((
                        "no strict positivity certificate on the boundary slice".to_string(),
                        diag,
                    )));
                }
            }
        }
        Ok(Ok((Certificate::Identity(cert), diag)))
    })?;
    v.note(
        "applications",
        opts.nuij_applications.unwrap_or(prep.degree),
    );
    v.note(
        "sign_change_samples",
        json!({"tries": tries, "negative": negatives}),
    );
    if v.status == Status::Unknown {
        if let Some(w) = sign_witness {
            let diagnostics = std::mem::take(&mut v.diagnostics);
            let original = prep.original_direction(&w.direction_rational);
            v = Verdict::not_hyperbolic(Method::Nuij, w);
            v.witness_original = Some(original);
            v.diagnostics = diagnostics;
        }
    }
    Ok(v)
}
