//! Sum-of-squares certificates: Gram-matrix formulations, identities with
//! SOS and free multipliers, and their numeric and exact solutions.

pub mod rounding;
pub mod sdp;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::polyring::{format_rational, rat_to_f64, Monomial, MultiPoly};
use rounding::{round_and_project, ExactRow, ExactSolution, ExactSystem};
use sdp::{psd_feasibility, SdpOutcome, SolverOptions};

#[derive(Clone, Debug)]
pub struct Tolerances {
    pub psd_tol: f64,
    pub id_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    /// Denominator cap for rational rounding.
    pub rounding_den: u64,
    /// Exact projection is skipped above this many constraint rows.
    pub exact_max_rows: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd_tol: 1e-7,
            id_tol: 1e-6,
            step_tol: 1e-9,
            max_iter: 200,
            rounding_den: 1_000_000,
            exact_max_rows: 200,
        }
    }
}

/// Gram matrix `G ⪰ 0` with `basis^T G basis` equal to one SOS multiplier.
#[derive(Clone, Debug)]
pub struct GramCertificate {
    pub vars: Vec<String>,
    pub basis: Vec<Monomial>,
    pub gram: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    /// Max coefficient error of the identity this block belongs to, divided
    /// by `max(1, max |target coeff|)`.
    pub residual: f64,
    pub exact: Option<Vec<Vec<BigRational>>>,
}

impl GramCertificate {
    /// `basis^T G basis` with the rounded rational Gram, when present.
    pub fn exact_polynomial(&self) -> Option<MultiPoly> {
        let g = self.exact.as_ref()?;
        Some(gram_polynomial(&self.basis, g, self.vars.len()))
    }

    pub fn float_polynomial_coeffs(&self) -> BTreeMap<Monomial, f64> {
        let mut out: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (i, mi) in self.basis.iter().enumerate() {
            for (j, mj) in self.basis.iter().enumerate() {
                *out.entry(mi.mul(mj)).or_default() += self.gram[i][j];
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "basis": self.basis.iter().map(|m| m.format(&self.vars)).collect::<Vec<_>>(),
            "gram": self.gram.iter().map(|r| r.iter().map(|v| float_json(*v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "residual": float_json(self.residual),
            "min_eigenvalue": float_json(self.min_eigenvalue),
            "exact": self.exact.as_ref().map(|g| g
                .iter()
                .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>()),
        })
    }
}

/// JSON number with 17 significant digits (non-finite values become null).
pub fn float_json(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let text = format!("{v:.16e}");
    text.parse::<serde_json::Number>()
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn gram_polynomial(basis: &[Monomial], g: &[Vec<BigRational>], num_vars: usize) -> MultiPoly {
    let mut terms: BTreeMap<Monomial, BigRational> = BTreeMap::new();
    for (i, mi) in basis.iter().enumerate() {
        for (j, mj) in basis.iter().enumerate() {
            if !g[i][j].is_zero() {
                *terms.entry(mi.mul(mj)).or_insert_with(BigRational::zero) += &g[i][j];
            }
        }
    }
    MultiPoly::from_terms(num_vars, terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiplierKind {
    Sos,
    Free,
}

/// One summand `multiplier * generator` of an identity.
#[derive(Clone, Debug)]
pub struct IdentityTerm {
    pub generator: MultiPoly,
    pub kind: MultiplierKind,
    /// Half-degree basis for SOS multipliers, monomial support for free
    /// ones. Derived from the degree bound when absent.
    pub basis: Option<Vec<Monomial>>,
}

impl IdentityTerm {
    pub fn sos(generator: MultiPoly) -> Self {
        IdentityTerm {
            generator,
            kind: MultiplierKind::Sos,
            basis: None,
        }
    }

    pub fn free(generator: MultiPoly) -> Self {
        IdentityTerm {
            generator,
            kind: MultiplierKind::Free,
            basis: None,
        }
    }

    pub fn with_basis(mut self, basis: Vec<Monomial>) -> Self {
        self.basis = Some(basis);
        self
    }
}

/// `target = sum_i multiplier_i * generator_i`, multipliers of bounded degree.
#[derive(Clone, Debug)]
pub struct IdentitySpec {
    pub target: MultiPoly,
    pub terms: Vec<IdentityTerm>,
    pub degree_bound: u32,
    /// Variable weights for degrees (all 1 when absent).
    pub weights: Option<Vec<u32>>,
    pub vars: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum MultiplierBlock {
    Sos {
        generator: MultiPoly,
        gram: GramCertificate,
    },
    Free {
        generator: MultiPoly,
        monomials: Vec<Monomial>,
        coeffs: Vec<f64>,
        exact: Option<MultiPoly>,
    },
}

#[derive(Clone, Debug)]
pub struct IdentityCertificate {
    pub vars: Vec<String>,
    pub blocks: Vec<MultiplierBlock>,
    /// Same relative convention as [`GramCertificate::residual`].
    pub residual: f64,
    /// True when the rounded rational identity was re-verified exactly.
    pub exact: bool,
}

impl IdentityCertificate {
    /// Reassembles `sum multiplier * generator` from the exact blocks.
    pub fn exact_sum(&self) -> Option<MultiPoly> {
        let n = self.vars.len();
        let mut acc = MultiPoly::zero(n);
        for b in &self.blocks {
            match b {
                MultiplierBlock::Sos { generator, gram } => {
                    acc += &(&gram.exact_polynomial()? * generator);
                }
                MultiplierBlock::Free {
                    generator, exact, ..
                } => {
                    acc += &(exact.as_ref()? * generator);
                }
            }
        }
        Some(acc)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| match b {
                MultiplierBlock::Sos { gram, .. } => Some(gram.min_eigenvalue),
                _ => None,
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Value {
        let blocks: Vec<Value> = self
            .blocks
            .iter()
            .map(|b| match b {
                MultiplierBlock::Sos { generator, gram } => {
                    let mut v = gram.to_json();
                    v["kind"] = json!("sos");
                    v["generator"] = json!(generator.format(&self.vars));
                    v
                }
                MultiplierBlock::Free {
                    generator,
                    monomials,
                    coeffs,
                    exact,
                } => json!({
                    "kind": "free",
                    "generator": generator.format(&self.vars),
                    "monomials": monomials.iter().map(|m| m.format(&self.vars)).collect::<Vec<_>>(),
                    "coeffs": coeffs.iter().map(|c| float_json(*c)).collect::<Vec<_>>(),
                    "exact": exact.as_ref().map(|p| p.format(&self.vars)),
                }),
            })
            .collect();
        json!({
            "vars": self.vars,
            "blocks": blocks,
            "residual": float_json(self.residual),
            "min_eigenvalue": float_json(self.min_eigenvalue()),
            "exact": self.exact,
        })
    }
}

/// Dual evidence of infeasibility: a linear functional `L` on coefficients
/// with `L(target) = -1` that is nonnegative (up to `max_eigenvalue`) on
/// every admissible `multiplier * generator`.
#[derive(Clone, Debug)]
pub struct DualNote {
    pub functional: Vec<(Monomial, f64)>,
    /// Largest eigenvalue of `-M_L` over all SOS blocks, `M_L` the moment
    /// matrices of `L`; at most `farkas_tol` when the note was accepted.
    pub max_eigenvalue: f64,
    pub free_residual: f64,
}

#[derive(Clone, Debug)]
pub enum CertifyFailure {
    Infeasible(DualNote),
    NumericFailure(String),
}

impl std::fmt::Display for CertifyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CertifyFailure::Infeasible(n) => write!(
                f,
                "infeasible (separating functional on {} monomials, eigenvalue slack {:.3e})",
                n.functional.len(),
                n.max_eigenvalue
            ),
            CertifyFailure::NumericFailure(s) => write!(f, "solver failure: {s}"),
        }
    }
}

fn weighted_degree(m: &Monomial, w: Option<&[u32]>) -> u32 {
    match w {
        Some(w) => m.weighted_degree(w),
        None => m.degree(),
    }
}

fn poly_weighted_degree(p: &MultiPoly, w: Option<&[u32]>) -> u32 {
    p.terms()
        .map(|(m, _)| weighted_degree(m, w))
        .max()
        .unwrap_or(0)
}

/// Monomials of weighted degree at most `bound`.
pub fn monomials_up_to(num_vars: usize, bound: u32, weights: Option<&[u32]>) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut e = vec![0u32; num_vars];
    fn rec(i: usize, left: u32, e: &mut Vec<u32>, w: Option<&[u32]>, out: &mut Vec<Monomial>) {
        if i == e.len() {
            out.push(Monomial::new(e.clone()));
            return;
        }
        let wi = w.map_or(1, |w| w[i].max(1));
        let mut k = 0;
        while k * wi <= left {
            e[i] = k;
            rec(i + 1, left - k * wi, e, w, out);
            k += 1;
        }
        e[i] = 0;
    }
    rec(0, bound, &mut e, weights, &mut out);
    out.sort();
    out
}

/// Half-degree basis for an SOS target, pruned by the exponent box: each
/// exponent of a basis monomial lies within half the target's range.
pub fn half_degree_basis(target: &MultiPoly) -> Vec<Monomial> {
    let n = target.num_vars();
    let Some(deg) = target.total_degree() else {
        return vec![];
    };
    let homogeneous = target.terms().all(|(m, _)| m.degree() == deg);
    let lo: Vec<u32> = (0..n)
        .map(|v| target.min_degree_in(v).unwrap_or(0))
        .collect();
    let hi: Vec<u32> = (0..n).map(|v| target.degree_in(v).unwrap_or(0)).collect();
    let cand = if homogeneous {
        Monomial::all_of_degree(n, deg / 2)
    } else {
        Monomial::all_up_to_degree(n, deg / 2)
    };
    cand.into_iter()
        .filter(|m| {
            m.exps()
                .iter()
                .enumerate()
                .all(|(v, &e)| 2 * e >= lo[v] && 2 * e <= hi[v])
        })
        .collect()
}

struct Layout {
    bases: Vec<Vec<Monomial>>,
    system: ExactSystem,
    row_monomials: Vec<Monomial>,
    /// Per term: block index (SOS) or free offset (free).
    slots: Vec<usize>,
}

fn build_layout(spec: &IdentitySpec) -> Result<Layout> {
    let n = spec.target.num_vars();
    let w = spec.weights.as_deref();
    if spec.vars.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: spec.vars.len(),
        });
    }
    let mut rows: BTreeMap<Monomial, ExactRow> = BTreeMap::new();
    for (m, _) in spec.target.terms() {
        rows.entry(m.clone()).or_default();
    }
    let mut bases = Vec::new();
    let mut block_sizes = Vec::new();
    let mut slots = Vec::new();
    let mut num_free = 0;
    for term in &spec.terms {
        if term.generator.num_vars() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: term.generator.num_vars(),
            });
        }
        if term.generator.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let gdeg = poly_weighted_degree(&term.generator, w);
        if gdeg > spec.degree_bound {
            return Err(Error::InvalidInput(format!(
                "generator degree {gdeg} exceeds the degree bound {}",
                spec.degree_bound
            )));
        }
        let left = spec.degree_bound - gdeg;
        match term.kind {
            MultiplierKind::Sos => {
                let basis = term
                    .basis
                    .clone()
                    .unwrap_or_else(|| monomials_up_to(n, left / 2, w));
                let b = block_sizes.len();
                for i in 0..basis.len() {
                    for j in i..basis.len() {
                        let mij = basis[i].mul(&basis[j]);
                        for (gm, gc) in term.generator.terms() {
                            rows.entry(mij.mul(gm)).or_default().entries.push((
                                b,
                                i,
                                j,
                                gc.clone(),
                            ));
                        }
                    }
                }
                slots.push(b);
                block_sizes.push(basis.len());
                bases.push(basis);
            }
            MultiplierKind::Free => {
                let mons = term
                    .basis
                    .clone()
                    .unwrap_or_else(|| monomials_up_to(n, left, w));
                for (k, mu) in mons.iter().enumerate() {
                    for (gm, gc) in term.generator.terms() {
                        rows.entry(mu.mul(gm))
                            .or_default()
                            .free
                            .push((num_free + k, gc.clone()));
                    }
                }
                slots.push(num_free);
                num_free += mons.len();
                bases.push(mons);
            }
        }
    }
    let mut exact_rows = Vec::with_capacity(rows.len());
    let mut rhs = Vec::with_capacity(rows.len());
    let mut row_monomials = Vec::with_capacity(rows.len());
    for (m, mut r) in rows {
        r.entries = merge_entries(r.entries);
        r.free = merge_free(r.free);
        rhs.push(spec.target.coeff(&m));
        row_monomials.push(m);
        exact_rows.push(r);
    }
    Ok(Layout {
        bases,
        system: ExactSystem {
            block_sizes,
            num_free,
            rows: exact_rows,
            rhs,
        },
        row_monomials,
        slots,
    })
}

fn merge_entries(
    e: Vec<(usize, usize, usize, BigRational)>,
) -> Vec<(usize, usize, usize, BigRational)> {
    let mut map: BTreeMap<(usize, usize, usize), BigRational> = BTreeMap::new();
    for (b, i, j, v) in e {
        *map.entry((b, i, j)).or_insert_with(BigRational::zero) += v;
    }
    map.into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|((b, i, j), v)| (b, i, j, v))
        .collect()
}

fn merge_free(e: Vec<(usize, BigRational)>) -> Vec<(usize, BigRational)> {
    let mut map: BTreeMap<usize, BigRational> = BTreeMap::new();
    for (j, v) in e {
        *map.entry(j).or_insert_with(BigRational::zero) += v;
    }
    map.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

fn free_poly(mons: &[Monomial], coeffs: &[BigRational], n: usize) -> MultiPoly {
    MultiPoly::from_terms(n, mons.iter().cloned().zip(coeffs.iter().cloned()))
}

/// Solves `target = sum multiplier * generator` with SOS multipliers Gram
/// matrices and free multipliers of bounded degree.
pub fn weighted_sos_identity(
    spec: &IdentitySpec,
    tols: &Tolerances,
) -> Result<std::result::Result<IdentityCertificate, CertifyFailure>> {
    let layout = build_layout(spec)?;
    let n = spec.target.num_vars();
    // the solver works on the target divided by its largest coefficient;
    // residuals and eigenvalue checks below are relative to that scale
    let scale = rat_to_f64(&spec.target.max_abs_coeff()).max(1.0);
    let opts = SolverOptions {
        feas_tol: (0.1 * tols.id_tol).min(tols.step_tol * 2.0),
        farkas_tol: 1e-8,
        max_iter: tols.max_iter,
        accept_tol: tols.id_tol,
    };
    let mut problem = layout.system.to_float();
    for b in &mut problem.rhs {
        *b /= scale;
    }
    let outcome = match psd_feasibility(&problem, &opts) {
        Ok(o) => o,
        Err(Error::NumericFailure(s)) => return Ok(Err(CertifyFailure::NumericFailure(s))),
        Err(e) => return Err(e),
    };
    let sol = match outcome {
        SdpOutcome::Infeasible(c) => {
            let functional = layout
                .row_monomials
                .iter()
                .zip(&c.y)
                .filter(|(_, y)| **y != 0.0)
                .map(|(m, y)| (m.clone(), -y / scale))
                .collect();
            return Ok(Err(CertifyFailure::Infeasible(DualNote {
                functional,
                max_eigenvalue: c.max_eigenvalue,
                free_residual: c.free_residual,
            })));
        }
        SdpOutcome::Feasible(mut s) => {
            for b in &mut s.blocks {
                *b *= scale;
            }
            for v in &mut s.free {
                *v *= scale;
            }
            s
        }
    };
    let residual = layout.system.residual_f64(&sol.blocks, &sol.free) / scale;
    let min_eig = sdp::min_eigenvalue(&sol.blocks);
    if residual > tols.id_tol || min_eig < -tols.psd_tol * scale {
        return Ok(Err(CertifyFailure::NumericFailure(format!(
            "solution outside tolerances (residual {residual:.3e}, min eigenvalue {min_eig:.3e})"
        ))));
    }
    let exact: Option<ExactSolution> = round_and_project(
        &layout.system,
        &sol.blocks,
        &sol.free,
        tols.rounding_den,
        tols.exact_max_rows,
    );
    let mut blocks = Vec::with_capacity(spec.terms.len());
    for (t, term) in spec.terms.iter().enumerate() {
        let slot = layout.slots[t];
        let basis = layout.bases[t].clone();
        match term.kind {
            MultiplierKind::Sos => {
                let g: &DMatrix<f64> = &sol.blocks[slot];
                blocks.push(MultiplierBlock::Sos {
                    generator: term.generator.clone(),
                    gram: GramCertificate {
                        vars: spec.vars.clone(),
                        gram: (0..g.nrows())
                            .map(|i| {
                                (0..g.ncols())
                                    .map(|j| 0.5 * (g[(i, j)] + g[(j, i)]))
                                    .collect()
                            })
                            .collect(),
                        min_eigenvalue: sdp::min_eigenvalue(std::slice::from_ref(g)),
                        residual,
                        exact: exact.as_ref().map(|e| e.blocks[slot].clone()),
                        basis,
                    },
                });
            }
            MultiplierKind::Free => {
                let len = basis.len();
                blocks.push(MultiplierBlock::Free {
                    generator: term.generator.clone(),
                    coeffs: sol.free[slot..slot + len].to_vec(),
                    exact: exact
                        .as_ref()
                        .map(|e| free_poly(&basis, &e.free[slot..slot + len], n)),
                    monomials: basis,
                });
            }
        }
    }
    let mut cert = IdentityCertificate {
        vars: spec.vars.clone(),
        blocks,
        residual,
        exact: false,
    };
    if exact.is_some() {
        // independent re-verification in the polynomial ring
        if cert.exact_sum().as_ref() == Some(&spec.target) {
            cert.exact = true;
        } else {
            strip_exact(&mut cert);
        }
    }
    Ok(Ok(cert))
}

fn strip_exact(cert: &mut IdentityCertificate) {
    for b in &mut cert.blocks {
        match b {
            MultiplierBlock::Sos { gram, .. } => gram.exact = None,
            MultiplierBlock::Free { exact, .. } => *exact = None,
        }
    }
}

/// Basis selection for a plain SOS decomposition.
#[derive(Clone, Debug)]
pub enum BasisRule {
    /// Half-degree monomials inside the exponent box of the target.
    HalfDegree,
    Explicit(Vec<Monomial>),
}

/// Finds a Gram certificate `T = b^T G b`, `G ⪰ 0`.
pub fn sos_decompose(
    target: &MultiPoly,
    vars: &[String],
    rule: &BasisRule,
    tols: &Tolerances,
) -> Result<std::result::Result<GramCertificate, CertifyFailure>> {
    let n = target.num_vars();
    let basis = match rule {
        BasisRule::HalfDegree => half_degree_basis(target),
        BasisRule::Explicit(b) => b.clone(),
    };
    let bound = basis.iter().map(|m| 2 * m.degree()).max().unwrap_or(0);
    let spec = IdentitySpec {
        target: target.clone(),
        terms: vec![IdentityTerm::sos(MultiPoly::one(n)).with_basis(basis)],
        degree_bound: bound,
        weights: None,
        vars: vars.to_vec(),
    };
    Ok(
        weighted_sos_identity(&spec, tols)?.map(|c| match c.blocks.into_iter().next() {
            Some(MultiplierBlock::Sos { gram, .. }) => gram,
            _ => unreachable!("single SOS block"),
        }),
    )
}

/// Checks a rational Gram matrix against a target exactly.
pub fn verify_gram_exact(target: &MultiPoly, basis: &[Monomial], g: &[Vec<BigRational>]) -> bool {
    let psd = crate::structmats::inertia(g).is_psd();
    psd && gram_polynomial(basis, g, target.num_vars()) == *target
}

/// Coefficient scale used by margins: the largest absolute coefficient.
pub fn coefficient_scale(p: &MultiPoly) -> f64 {
    rat_to_f64(&p.max_abs_coeff())
}
