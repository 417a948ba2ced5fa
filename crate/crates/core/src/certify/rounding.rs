//! Exact constraint systems and rational rounding of numeric solutions.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::sdp::{SdpProblem, SdpRow};
use crate::polyring::rat_to_f64;
use crate::structmats::inertia;

/// Constraint row with exact data; entries `(block, i, j, v)` with `i <= j`,
/// an off-diagonal entry standing for both positions.
#[derive(Clone, Debug, Default)]
pub struct ExactRow {
    pub entries: Vec<(usize, usize, usize, BigRational)>,
    pub free: Vec<(usize, BigRational)>,
}

#[derive(Clone, Debug, Default)]
pub struct ExactSystem {
    pub block_sizes: Vec<usize>,
    pub num_free: usize,
    pub rows: Vec<ExactRow>,
    pub rhs: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub blocks: Vec<Vec<Vec<BigRational>>>,
    pub free: Vec<BigRational>,
}

impl ExactSystem {
    pub fn to_float(&self) -> SdpProblem {
        SdpProblem {
            block_sizes: self.block_sizes.clone(),
            num_free: self.num_free,
            rows: self
                .rows
                .iter()
                .map(|r| SdpRow {
                    entries: r
                        .entries
                        .iter()
                        .map(|(b, i, j, v)| (*b, *i, *j, rat_to_f64(v)))
                        .collect(),
                    free: r.free.iter().map(|(j, v)| (*j, rat_to_f64(v))).collect(),
                })
                .collect(),
            rhs: self.rhs.iter().map(rat_to_f64).collect(),
        }
    }

    /// Largest absolute row residual of a floating solution.
    pub fn residual_f64(&self, blocks: &[DMatrix<f64>], free: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| {
                let mut acc = -rat_to_f64(b);
                for (bl, i, j, v) in &r.entries {
                    let mult = if i == j { 1.0 } else { 2.0 };
                    acc += mult * rat_to_f64(v) * blocks[*bl][(*i, *j)];
                }
                for (j, v) in &r.free {
                    acc += rat_to_f64(v) * free[*j];
                }
                acc.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Exact row residuals `b - A(G) - B f`.
    pub fn residual_exact(&self, sol: &ExactSolution) -> Vec<BigRational> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| {
                let mut acc = b.clone();
                for (bl, i, j, v) in &r.entries {
                    let g = &sol.blocks[*bl][*i][*j];
                    if i == j {
                        acc -= v * g;
                    } else {
                        acc -= v * g * BigRational::from_integer(2.into());
                    }
                }
                for (j, v) in &r.free {
                    acc -= v * &sol.free[*j];
                }
                acc
            })
            .collect()
    }
}

/// Best rational approximation with denominator at most `max_den`, by
/// continued fractions.
pub fn approx_rational(x: f64, max_den: u64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let neg = x < 0.0;
    let mut r = x.abs();
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e18 {
            break;
        }
        let a_i = a as i128;
        let h2 = a_i * h1 + h0;
        let k2 = a_i * k1 + k0;
        if k2 > max_den as i128 {
            // semiconvergent check: keep the previous convergent
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return BigRational::zero();
    }
    let v = BigRational::new(BigInt::from(h1), BigInt::from(k1));
    if neg {
        -v
    } else {
        v
    }
}

/// Solves `K λ = r` exactly, returning any solution when `K` is singular
/// but the system is consistent.
fn solve_consistent(
    mut k: Vec<Vec<BigRational>>,
    mut r: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let n = r.len();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&i| !k[i][col].is_zero()) else {
            continue;
        };
        k.swap(p, row);
        r.swap(p, row);
        let pv = k[row][col].clone();
        for i in 0..n {
            if i == row || k[i][col].is_zero() {
                continue;
            }
            let f = &k[i][col] / &pv;
            for j in col..n {
                if k[row][j].is_zero() {
                    continue;
                }
                let d = &f * &k[row][j];
                k[i][j] -= d;
            }
            let d = &f * &r[row];
            r[i] -= d;
        }
        pivots.push((row, col));
        row += 1;
        if row == n {
            break;
        }
    }
    if r[row..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, c) in pivots {
        x[c] = &r[i] / &k[i][c];
    }
    Some(x)
}

/// Rounds a numeric solution, projects it exactly onto the affine
/// constraints (minimum Frobenius-norm correction) and accepts it when every
/// block is exactly positive semidefinite.
pub fn round_and_project(
    sys: &ExactSystem,
    blocks: &[DMatrix<f64>],
    free: &[f64],
    max_den: u64,
    max_rows: usize,
) -> Option<ExactSolution> {
    let m = sys.rows.len();
    if m > max_rows {
        return None;
    }
    let mut sol = ExactSolution {
        blocks: blocks
            .iter()
            .map(|b| {
                let n = b.nrows();
                let mut g = vec![vec![BigRational::zero(); n]; n];
                for i in 0..n {
                    for j in i..n {
                        let v = approx_rational(0.5 * (b[(i, j)] + b[(j, i)]), max_den);
                        g[j][i] = v.clone();
                        g[i][j] = v;
                    }
                }
                g
            })
            .collect(),
        free: free.iter().map(|v| approx_rational(*v, max_den)).collect(),
    };
    let res = sys.residual_exact(&sol);
    if res.iter().any(|v| !v.is_zero()) {
        let two = BigRational::from_integer(2.into());
        // Gram matrix of the rows under the Frobenius inner product
        let mut pos: std::collections::HashMap<(usize, usize, usize), Vec<(usize, BigRational)>> =
            Default::default();
        for (kk, r) in sys.rows.iter().enumerate() {
            for (b, i, j, v) in &r.entries {
                pos.entry((*b, *i, *j)).or_default().push((kk, v.clone()));
            }
        }
        let mut fpos: std::collections::HashMap<usize, Vec<(usize, BigRational)>> =
            Default::default();
        for (kk, r) in sys.rows.iter().enumerate() {
            for (j, v) in &r.free {
                fpos.entry(*j).or_default().push((kk, v.clone()));
            }
        }
        let mut gram = vec![vec![BigRational::zero(); m]; m];
        for ((_, i, j), list) in &pos {
            let mult = if i == j {
                BigRational::from_integer(1.into())
            } else {
                two.clone()
            };
            for (a, va) in list {
                for (b, vb) in list {
                    gram[*a][*b] += va * vb * &mult;
                }
            }
        }
        for list in fpos.values() {
            for (a, va) in list {
                for (b, vb) in list {
                    gram[*a][*b] += va * vb;
                }
            }
        }
        let lambda = solve_consistent(gram, res)?;
        for (kk, r) in sys.rows.iter().enumerate() {
            if lambda[kk].is_zero() {
                continue;
            }
            for (b, i, j, v) in &r.entries {
                let d = v * &lambda[kk];
                sol.blocks[*b][*i][*j] += d.clone();
                if i != j {
                    sol.blocks[*b][*j][*i] += d;
                }
            }
            for (j, v) in &r.free {
                sol.free[*j] += v * &lambda[kk];
            }
        }
        if sys.residual_exact(&sol).iter().any(|v| !v.is_zero()) {
            return None;
        }
    }
    // cheap rejection before exact elimination: oversized entries or a
    // clearly negative floating eigenvalue
    for g in &sol.blocks {
        let big = g
            .iter()
            .flatten()
            .any(|v| v.numer().bits() + v.denom().bits() > MAX_BITS);
        if big || float_min_eigenvalue(g) < -1e-9 {
            return None;
        }
    }
    for g in &sol.blocks {
        if !inertia(g).is_psd() {
            return None;
        }
    }
    Some(sol)
}

const MAX_BITS: u64 = 2048;

fn float_min_eigenvalue(g: &[Vec<BigRational>]) -> f64 {
    let n = g.len();
    if n == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| rat_to_f64(&g[i][j]));
    let scale = m.amax().max(1.0);
    m.symmetric_eigenvalues().min() / scale
}

/// Largest absolute entry, as a float.
pub fn max_abs(values: &[BigRational]) -> f64 {
    values
        .iter()
        .map(|v| rat_to_f64(&v.abs()))
        .fold(0.0, f64::max)
}
