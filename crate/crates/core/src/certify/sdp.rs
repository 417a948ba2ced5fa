//! Block-diagonal semidefinite feasibility solver.
//!
//! Finds `X = diag(X_1, ..., X_r) ⪰ 0` and a free vector `f` with
//! `<A_k, X> + (B f)_k = b_k` for every row `k`, or a Farkas vector `y` with
//! `b^T y = 1`, `sum_k y_k A_k ⪯ 0` and `B^T y = 0`.
//!
//! The iteration is an infeasible-start primal-dual path-following method
//! (HKM direction, Mehrotra predictor-corrector) on
//!
//! ```text
//! min tr(X)  s.t.  A(X) + B f = b,  X ⪰ 0
//! max b^T y  s.t.  I - A*(y) ⪰ 0,   B^T y = 0
//! ```
//!
//! It stops at the first primal-feasible iterate, which is still interior.
//! A primal-infeasible problem makes the dual unbounded, and the normalized
//! dual iterate is returned as the Farkas vector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One equality constraint. Matrix entries are `(block, i, j, value)`; an
/// off-diagonal entry stands for both `(i, j)` and `(j, i)`.
#[derive(Clone, Debug, Default)]
pub struct SdpRow {
    pub entries: Vec<(usize, usize, usize, f64)>,
    pub free: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    pub block_sizes: Vec<usize>,
    pub num_free: usize,
    pub rows: Vec<SdpRow>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Maximum primal residual (original units) accepted as feasible.
    pub feas_tol: f64,
    /// Threshold on `λmax(A*(y))` and `|B^T y|` for a normalized Farkas vector.
    pub farkas_tol: f64,
    pub max_iter: usize,
    /// When the iteration breaks down, the best iterate is still returned if
    /// its residual is within this bound.
    pub accept_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-9,
            farkas_tol: 1e-8,
            max_iter: 200,
            accept_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub blocks: Vec<DMatrix<f64>>,
    pub free: Vec<f64>,
    pub iterations: usize,
    /// Max absolute primal residual in original units.
    pub residual: f64,
}

/// Farkas vector in the original row scaling, normalized to `b^T y = 1`.
#[derive(Clone, Debug)]
pub struct FarkasCertificate {
    pub y: Vec<f64>,
    /// Largest eigenvalue of `sum_k y_k A_k` over all blocks (should be ≤ 0).
    pub max_eigenvalue: f64,
    /// `max |B^T y|` (should be 0).
    pub free_residual: f64,
}

#[derive(Clone, Debug)]
pub enum SdpOutcome {
    Feasible(SdpSolution),
    Infeasible(FarkasCertificate),
}

const STEP_FRACTION: f64 = 0.95;

/// Row `k` expanded to directed entries grouped by block.
struct ScaledRow {
    entries: Vec<(usize, usize, usize, f64)>,
    free: Vec<(usize, f64)>,
}

struct Scaled {
    rows: Vec<ScaledRow>,
    rhs: DVector<f64>,
    scale: Vec<f64>,
    /// Original index of each kept row.
    origin: Vec<usize>,
}

fn preprocess(p: &SdpProblem) -> std::result::Result<Scaled, FarkasCertificate> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut scale = Vec::new();
    let mut origin = Vec::new();
    for (k, row) in p.rows.iter().enumerate() {
        let mut merged: std::collections::BTreeMap<(usize, usize, usize), f64> = Default::default();
        for &(b, i, j, v) in &row.entries {
            let key = if i <= j { (b, i, j) } else { (b, j, i) };
            *merged.entry(key).or_default() += v;
        }
        let mut free: std::collections::BTreeMap<usize, f64> = Default::default();
        for &(j, v) in &row.free {
            *free.entry(j).or_default() += v;
        }
        let s = merged
            .values()
            .chain(free.values())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if s == 0.0 {
            if p.rhs[k] != 0.0 {
                let mut y = vec![0.0; p.rows.len()];
                y[k] = 1.0 / p.rhs[k];
                return Err(FarkasCertificate {
                    y,
                    max_eigenvalue: 0.0,
                    free_residual: 0.0,
                });
            }
            continue;
        }
        let mut entries = Vec::new();
        for ((b, i, j), v) in merged {
            if v == 0.0 {
                continue;
            }
            entries.push((b, i, j, v / s));
            if i != j {
                entries.push((b, j, i, v / s));
            }
        }
        rows.push(ScaledRow {
            entries,
            free: free
                .into_iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|(j, v)| (j, v / s))
                .collect(),
        });
        rhs.push(p.rhs[k] / s);
        scale.push(s);
        origin.push(k);
    }
    Ok(Scaled {
        rows,
        rhs: DVector::from_vec(rhs),
        scale,
        origin,
    })
}

struct Ops<'a> {
    rows: &'a [ScaledRow],
    sizes: &'a [usize],
    nf: usize,
}

impl Ops<'_> {
    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|r| {
                r.entries
                    .iter()
                    .map(|&(b, i, j, v)| v * x[b][(i, j)])
                    .sum::<f64>()
            }),
        )
    }

    fn apply_free(&self, f: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|r| r.free.iter().map(|&(j, v)| v * f[j]).sum::<f64>()),
        )
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (k, r) in self.rows.iter().enumerate() {
            if y[k] == 0.0 {
                continue;
            }
            for &(b, i, j, v) in &r.entries {
                out[b][(i, j)] += v * y[k];
            }
        }
        out
    }

    fn adjoint_free(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.nf);
        for (k, r) in self.rows.iter().enumerate() {
            for &(j, v) in &r.free {
                out[j] += v * y[k];
            }
        }
        out
    }

    /// `<A_k, A_l> + <B_k, B_l>` for all row pairs.
    fn row_gram(&self) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut pos: std::collections::HashMap<(usize, usize, usize), Vec<(usize, f64)>> =
            Default::default();
        let mut fpos: std::collections::HashMap<usize, Vec<(usize, f64)>> = Default::default();
        for (k, r) in self.rows.iter().enumerate() {
            for &(b, i, j, v) in &r.entries {
                pos.entry((b, i, j)).or_default().push((k, v));
            }
            for &(j, v) in &r.free {
                fpos.entry(j).or_default().push((k, v));
            }
        }
        let mut g = DMatrix::zeros(m, m);
        for list in pos.values().chain(fpos.values()) {
            for &(a, va) in list {
                for &(b, vb) in list {
                    g[(a, b)] += va * vb;
                }
            }
        }
        g
    }

    /// Schur complement `M_kl = tr(A_k X A_l W)`.
    fn schur(&self, x: &[DMatrix<f64>], w: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut out = DMatrix::zeros(m, m);
        for k in 0..m {
            for l in k..m {
                let mut acc = 0.0;
                for &(b, i, j, v) in &self.rows[k].entries {
                    for &(b2, p, q, u) in &self.rows[l].entries {
                        if b == b2 {
                            acc += v * u * x[b][(j, p)] * w[b][(q, i)];
                        }
                    }
                }
                out[(k, l)] = acc;
                out[(l, k)] = acc;
            }
        }
        out
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite if `dX ⪰ 0`).
fn max_step(x: &[DMatrix<f64>], dx: &[DMatrix<f64>]) -> Result<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        if xb.nrows() == 0 {
            continue;
        }
        let chol = xb
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NumericFailure("iterate lost definiteness".into()))?;
        let l = chol.l();
        let linv = l
            .solve_lower_triangular(&DMatrix::identity(xb.nrows(), xb.nrows()))
            .ok_or_else(|| Error::NumericFailure("singular Cholesky factor".into()))?;
        let s = &linv * db * linv.transpose();
        let lmin = sym(s).symmetric_eigenvalues().min();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    Ok(alpha)
}

fn max_eigenvalue(blocks: &[DMatrix<f64>]) -> f64 {
    blocks
        .iter()
        .filter(|b| b.nrows() > 0)
        .map(|b| sym(b.clone()).symmetric_eigenvalues().max())
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn min_eigenvalue(blocks: &[DMatrix<f64>]) -> f64 {
    blocks
        .iter()
        .filter(|b| b.nrows() > 0)
        .map(|b| sym(b.clone()).symmetric_eigenvalues().min())
        .fold(f64::INFINITY, f64::min)
}

/// Solves the feasibility problem. `Err` means the iteration failed to reach
/// either conclusion; it never stands for infeasibility.
pub fn psd_feasibility(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpOutcome> {
    if p.rows.len() != p.rhs.len() {
        return Err(Error::InvalidInput(
            "row and right-hand side counts differ".into(),
        ));
    }
    let sc = match preprocess(p) {
        Ok(s) => s,
        Err(cert) => return Ok(SdpOutcome::Infeasible(cert)),
    };
    let ops = Ops {
        rows: &sc.rows,
        sizes: &p.block_sizes,
        nf: p.num_free,
    };
    let m = sc.rows.len();
    let nf = p.num_free;
    let dim: usize = p.block_sizes.iter().sum();
    let ident: Vec<DMatrix<f64>> = p
        .block_sizes
        .iter()
        .map(|&n| DMatrix::identity(n, n))
        .collect();

    let mut x = ident.clone();
    let mut z = ident.clone();
    let mut y = DVector::zeros(m);
    let mut f = DVector::zeros(nf);
    let mut best: Option<SdpSolution> = None;
    let mut gram_lu = None;
    // least-norm correction onto the affine constraints; kept only when the
    // blocks stay positive definite
    let mut project = |x: &[DMatrix<f64>], f: &DVector<f64>, it: usize| -> Option<SdpSolution> {
        let lu = gram_lu.get_or_insert_with(|| {
            let mut g = ops.row_gram();
            let scale = g.diagonal().amax().max(1.0);
            for k in 0..m {
                g[(k, k)] += 1e-14 * scale;
            }
            g.lu()
        });
        let mut xp = x.to_vec();
        let mut fp = f.clone();
        for _ in 0..3 {
            let r = &sc.rhs - ops.apply(&xp) - ops.apply_free(&fp);
            let lam = lu.solve(&r)?;
            let corr = ops.adjoint(&lam);
            for b in 0..xp.len() {
                xp[b] += &corr[b];
                xp[b] = sym(xp[b].clone());
            }
            fp += ops.adjoint_free(&lam);
        }
        let r = &sc.rhs - ops.apply(&xp) - ops.apply_free(&fp);
        let res = r
            .iter()
            .zip(&sc.scale)
            .fold(0.0f64, |a, (r, s)| a.max((r * s).abs()));
        let definite = xp.iter().all(|b| b.nrows() == 0 || b.clone().cholesky().is_some());
        (res <= opts.feas_tol && definite).then(|| SdpSolution {
            blocks: xp,
            free: fp.iter().copied().collect(),
            iterations: it,
            residual: res,
        })
    };
    let fallback = |best: Option<SdpSolution>, err: Error| -> Result<SdpOutcome> {
        match best {
            Some(b) if b.residual <= opts.accept_tol => Ok(SdpOutcome::Feasible(b)),
            _ => Err(err),
        }
    };

    for it in 0..opts.max_iter {
        let rp = &sc.rhs - ops.apply(&x) - ops.apply_free(&f);
        let orig_res = rp
            .iter()
            .zip(&sc.scale)
            .fold(0.0f64, |a, (r, s)| a.max((r * s).abs()));
        let current = || SdpSolution {
            blocks: x.clone(),
            free: f.iter().copied().collect(),
            iterations: it,
            residual: orig_res,
        };
        if orig_res <= opts.feas_tol {
            return Ok(SdpOutcome::Feasible(current()));
        }
        if orig_res <= opts.accept_tol {
            if let Some(sol) = project(&x, &f, it) {
                return Ok(SdpOutcome::Feasible(sol));
            }
        }
        if best.as_ref().is_none_or(|b| orig_res < b.residual) {
            best = Some(current());
        }
        let by = sc.rhs.dot(&y);
        if by > 0.0 {
            let yh = &y / by;
            let lmax = max_eigenvalue(&ops.adjoint(&yh));
            let fres = ops.adjoint_free(&yh).amax();
            if lmax <= opts.farkas_tol && fres <= opts.farkas_tol {
                let mut yo = vec![0.0; p.rows.len()];
                for (k, &o) in sc.origin.iter().enumerate() {
                    yo[o] = yh[k] / sc.scale[k];
                }
                return Ok(SdpOutcome::Infeasible(FarkasCertificate {
                    y: yo,
                    max_eigenvalue: lmax,
                    free_residual: fres,
                }));
            }
        }

        let step = (|| -> Result<()> {
            let aty = ops.adjoint(&y);
            let rd: Vec<DMatrix<f64>> = (0..x.len()).map(|b| &ident[b] - &aty[b] - &z[b]).collect();
            let rf = -ops.adjoint_free(&y);
            let mut w = Vec::with_capacity(z.len());
            for zb in &z {
                let inv = if zb.nrows() == 0 {
                    zb.clone()
                } else {
                    zb.clone()
                        .cholesky()
                        .ok_or_else(|| {
                            Error::NumericFailure("dual slack lost definiteness".into())
                        })?
                        .inverse()
                };
                w.push(inv);
            }
            let mu = inner(&x, &z) / dim.max(1) as f64;

            let schur = ops.schur(&x, &w);
            let diag_scale = (0..m).fold(1.0f64, |a, k| a.max(schur[(k, k)].abs()));
            let mut kkt = DMatrix::zeros(m + nf, m + nf);
            kkt.view_mut((0, 0), (m, m)).copy_from(&schur);
            for k in 0..m {
                for &(j, v) in &sc.rows[k].free {
                    kkt[(k, m + j)] += v;
                    kkt[(m + j, k)] += v;
                }
            }
            let mut reg = kkt.clone();
            for k in 0..m {
                reg[(k, k)] += 1e-13 * diag_scale;
            }
            for j in 0..nf {
                reg[(m + j, m + j)] -= 1e-13;
            }
            let lu = reg.lu();
            // the regularized factorization with iterative refinement
            // against the exact system
            let solve = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
                let mut sol = lu.solve(rhs)?;
                for _ in 0..3 {
                    let r = rhs - &kkt * &sol;
                    sol += lu.solve(&r)?;
                }
                Some(sol)
            };

            let direction = |smu: f64, corr: Option<&[DMatrix<f64>]>| -> Result<Direction> {
                let base: Vec<DMatrix<f64>> = (0..x.len())
                    .map(|b| {
                        let mut t = &x[b] * &rd[b];
                        if let Some(c) = corr {
                            t += &c[b];
                        }
                        &w[b] * smu - &x[b] - sym(t * &w[b])
                    })
                    .collect();
                let h = &rp - ops.apply(&base);
                let mut rhs = DVector::zeros(m + nf);
                rhs.rows_mut(0, m).copy_from(&h);
                rhs.rows_mut(m, nf).copy_from(&rf);
                let sol = solve(&rhs)
                    .ok_or_else(|| Error::NumericFailure("singular Newton system".into()))?;
                let dy = sol.rows(0, m).into_owned();
                let df = sol.rows(m, nf).into_owned();
                let atdy = ops.adjoint(&dy);
                let dz: Vec<DMatrix<f64>> = (0..x.len()).map(|b| &rd[b] - &atdy[b]).collect();
                let dx: Vec<DMatrix<f64>> = (0..x.len())
                    .map(|b| {
                        let mut t = &x[b] * &dz[b];
                        if let Some(c) = corr {
                            t += &c[b];
                        }
                        &w[b] * smu - &x[b] - sym(t * &w[b])
                    })
                    .collect();
                Ok(Direction { dx, dy, df, dz })
            };

            let pred = direction(0.0, None)?;
            let ap = max_step(&x, &pred.dx)?.min(1.0);
            let ad = max_step(&z, &pred.dz)?.min(1.0);
            let xa: Vec<DMatrix<f64>> = (0..x.len()).map(|b| &x[b] + &pred.dx[b] * ap).collect();
            let za: Vec<DMatrix<f64>> = (0..x.len()).map(|b| &z[b] + &pred.dz[b] * ad).collect();
            let mu_aff = inner(&xa, &za) / dim.max(1) as f64;
            let sigma = if mu > 0.0 {
                (mu_aff / mu).clamp(0.0, 1.0).powi(3)
            } else {
                0.0
            };
            let corr: Vec<DMatrix<f64>> = (0..x.len()).map(|b| &pred.dx[b] * &pred.dz[b]).collect();
            let d = direction(sigma * mu, Some(&corr))?;

            let ap = (STEP_FRACTION * max_step(&x, &d.dx)?).min(1.0);
            let ad = (STEP_FRACTION * max_step(&z, &d.dz)?).min(1.0);
            for b in 0..x.len() {
                x[b] += &d.dx[b] * ap;
                x[b] = sym(x[b].clone());
                z[b] += &d.dz[b] * ad;
                z[b] = sym(z[b].clone());
            }
            f += &d.df * ap;
            y += &d.dy * ad;
            if !y.iter().chain(f.iter()).all(|v| v.is_finite()) {
                return Err(Error::NumericFailure("non-finite iterate".into()));
            }
            Ok(())
        })();
        if let Err(e) = step {
            return fallback(best, e);
        }
    }
    fallback(
        best,
        Error::NumericFailure(format!("no conclusion after {} iterations", opts.max_iter)),
    )
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    df: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
}
