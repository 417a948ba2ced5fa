//! Univariate views, power sums, Hermite matrices, Sylvester resultants,
//! discriminants and exact inertia of rational symmetric matrices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polyring::{Monomial, MultiPoly};

/// A polynomial seen as univariate in one distinguished variable.
///
/// `coeffs[j]` is the coefficient of `var^j`, a polynomial in the remaining
/// variables (the distinguished variable removed, order otherwise kept).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPolyView {
    var: usize,
    coeffs: Vec<MultiPoly>,
}

impl UniPolyView {
    /// Builds a view from coefficients; trailing zero coefficients are trimmed.
    pub fn from_coeffs(var: usize, mut coeffs: Vec<MultiPoly>) -> Result<Self> {
        while coeffs.last().is_some_and(MultiPoly::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(UniPolyView { var, coeffs })
    }

    pub fn var(&self) -> usize {
        self.var
    }

    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    pub fn leading(&self) -> &MultiPoly {
        self.coeffs.last().unwrap()
    }

    /// Number of variables of the coefficient ring.
    pub fn coeff_vars(&self) -> usize {
        self.coeffs[0].num_vars()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().as_constant().is_some_and(|c| c.is_one())
    }

    /// Formal derivative with respect to the distinguished variable.
    pub fn derivative(&self) -> Result<UniPolyView> {
        let n = self.coeff_vars();
        let coeffs: Vec<MultiPoly> = if self.coeffs.len() == 1 {
            vec![MultiPoly::zero(n)]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c.scale(&BigRational::from_integer(BigInt::from(j))))
                .collect()
        };
        UniPolyView::from_coeffs(self.var, coeffs)
    }

    /// Reassembles `sum_j coeffs[j] * var^j` in the full ring.
    pub fn reassemble(&self) -> MultiPoly {
        let n = self.coeff_vars() + 1;
        let mapping: Vec<usize> = (0..n - 1)
            .map(|i| if i < self.var { i } else { i + 1 })
            .collect();
        let mut acc = MultiPoly::zero(n);
        for (j, c) in self.coeffs.iter().enumerate() {
            let lifted = c.remap(&mapping, n);
            let mut e = vec![0u32; n];
            e[self.var] = j as u32;
            acc += &lifted.mul_monomial(&Monomial::new(e), &BigRational::one());
        }
        acc
    }

    /// Evaluates each coefficient at a floating point, giving the ascending
    /// coefficient list of a numeric univariate polynomial.
    pub fn evaluate_coeffs_f64(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.coeffs.iter().map(|c| c.evaluate_f64(point)).collect()
    }

    pub fn evaluate_coeffs(&self, point: &[BigRational]) -> Result<Vec<BigRational>> {
        self.coeffs.iter().map(|c| c.evaluate(point)).collect()
    }
}

/// Extracts the coefficients of `f` with respect to variable `var`.
pub fn univariate_view(f: &MultiPoly, var: usize) -> Result<UniPolyView> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = f.num_vars();
    assert!(var < n, "variable index out of range");
    let deg = f.degree_in(var).unwrap() as usize;
    let mut buckets: Vec<Vec<(Monomial, BigRational)>> = vec![Vec::new(); deg + 1];
    for (m, c) in f.terms() {
        let mut e = m.exps().to_vec();
        let j = e.remove(var) as usize;
        buckets[j].push((Monomial::new(e), c.clone()));
    }
    let coeffs = buckets
        .into_iter()
        .map(|b| MultiPoly::from_terms(n - 1, b))
        .collect();
    UniPolyView::from_coeffs(var, coeffs)
}

/// Power sums `N_0, ..., N_m` of the roots of a monic polynomial, by the
/// Newton identities.
pub fn newton_power_sums(v: &UniPolyView, m: usize) -> Result<Vec<MultiPoly>> {
    if !v.is_monic() {
        return Err(Error::NotMonic);
    }
    let d = v.degree() as usize;
    let n = v.coeff_vars();
    // f = t^d + a_1 t^{d-1} + ... + a_d
    let a: Vec<MultiPoly> = (0..=d).map(|k| v.coeffs[d - k].clone()).collect();
    let mut p: Vec<MultiPoly> = Vec::with_capacity(m + 1);
    p.push(MultiPoly::from_int(n, d as i64));
    for k in 1..=m {
        // p_k = -(a_1 p_{k-1} + ... + a_{min(k-1,d)} p_{k-min}) - k a_k  (k <= d)
        let mut acc = MultiPoly::zero(n);
        for i in 1..=k.min(d) {
            if i == k {
                acc += &a[k].scale(&BigRational::from_integer(BigInt::from(k)));
            } else {
                acc += &(&a[i] * &p[k - i]);
            }
        }
        p.push(-acc);
    }
    Ok(p)
}

/// Symmetric matrix with polynomial entries, stored as its upper triangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrixPoly {
    dim: usize,
    upper: Vec<MultiPoly>,
}

impl SymMatrixPoly {
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.dim - i * (i + 1) / 2 + j
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> MultiPoly) -> Self {
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                upper.push(f(i, j));
            }
        }
        SymMatrixPoly { dim, upper }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &MultiPoly {
        &self.upper[self.index(i, j)]
    }

    /// The rational matrix obtained by evaluating every entry at `point`.
    pub fn evaluate(&self, point: &[BigRational]) -> Result<Vec<Vec<BigRational>>> {
        let mut out = vec![vec![BigRational::zero(); self.dim]; self.dim];
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.entry(i, j).evaluate(point)?;
                out[j][i] = v.clone();
                out[i][j] = v;
            }
        }
        Ok(out)
    }
}

/// Hermite matrix of `f` with respect to `var`: the Hankel matrix of power
/// sums `N_{i+j}` of the roots in `var`, entries in the remaining variables.
pub fn hermite_matrix(f: &MultiPoly, var: usize) -> Result<SymMatrixPoly> {
    let v = univariate_view(f, var)?;
    let d = v.degree() as usize;
    if d == 0 {
        return Err(Error::DegreeTooSmall {
            needed: 1,
            found: 0,
        });
    }
    let sums = newton_power_sums(&v, 2 * d - 2)?;
    Ok(SymMatrixPoly::from_fn(d, |i, j| sums[i + j].clone()))
}

/// Hermite form `u^T H u` of a form normalized at `(1, 0, ..., 0)`, as a
/// polynomial in `(x_1, ..., x_n, u_1, ..., u_d)`.
pub fn hermite_form(f: &MultiPoly) -> Result<MultiPoly> {
    let h = hermite_matrix(f, 0)?;
    Ok(quadratic_form(&h))
}

/// `u^T H u` in the ring of H's entries extended by `dim` new variables.
pub fn quadratic_form(h: &SymMatrixPoly) -> MultiPoly {
    let d = h.dim();
    let n = h.entry(0, 0).num_vars();
    let total = n + d;
    let mapping: Vec<usize> = (0..n).collect();
    let mut acc = MultiPoly::zero(total);
    for i in 0..d {
        for j in i..d {
            let entry = h.entry(i, j);
            if entry.is_zero() {
                continue;
            }
            let mut e = vec![0u32; total];
            e[n + i] += 1;
            e[n + j] += 1;
            let c = if i == j {
                BigRational::one()
            } else {
                BigRational::from_integer(2.into())
            };
            acc += &entry
                .remap(&mapping, total)
                .mul_monomial(&Monomial::new(e), &c);
        }
    }
    acc
}

/// Sylvester matrix of `g` (degree m) and `h` (degree n): the first n columns
/// hold shifted ascending coefficient vectors of `g`, the last m columns those
/// of `h`.
pub fn sylvester_matrix(g: &UniPolyView, h: &UniPolyView) -> Result<Vec<Vec<MultiPoly>>> {
    let nv = g.coeff_vars();
    if h.coeff_vars() != nv {
        return Err(Error::InvalidInput(
            "resultant arguments have different coefficient rings".into(),
        ));
    }
    let m = g.degree() as usize;
    let n = h.degree() as usize;
    if m == 0 && n == 0 {
        return Err(Error::ConstantResultantArguments);
    }
    let size = m + n;
    let mut mat = vec![vec![MultiPoly::zero(nv); size]; size];
    for col in 0..n {
        for (i, c) in g.coeffs().iter().enumerate() {
            mat[col + i][col] = c.clone();
        }
    }
    for col in 0..m {
        for (i, c) in h.coeffs().iter().enumerate() {
            mat[col + i][n + col] = c.clone();
        }
    }
    Ok(mat)
}

/// Resultant of `g` and `h` in their shared distinguished variable.
pub fn sylvester_resultant(g: &UniPolyView, h: &UniPolyView) -> Result<MultiPoly> {
    let mat = sylvester_matrix(g, h)?;
    Ok(determinant(mat, g.coeff_vars()))
}

/// Determinant of a square polynomial matrix: cofactor expansion up to
/// dimension 4, fraction-free Bareiss elimination beyond.
pub fn determinant(mat: Vec<Vec<MultiPoly>>, num_vars: usize) -> MultiPoly {
    if mat.len() <= 4 {
        det_cofactor(&mat, num_vars)
    } else {
        det_bareiss(mat, num_vars)
    }
}

/// Cofactor expansion along the first row.
pub fn det_cofactor(mat: &[Vec<MultiPoly>], num_vars: usize) -> MultiPoly {
    let n = mat.len();
    match n {
        0 => MultiPoly::one(num_vars),
        1 => mat[0][0].clone(),
        2 => &(&mat[0][0] * &mat[1][1]) - &(&mat[0][1] * &mat[1][0]),
        _ => {
            let mut acc = MultiPoly::zero(num_vars);
            for col in 0..n {
                if mat[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<MultiPoly>> = mat[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = &mat[0][col] * &det_cofactor(&minor, num_vars);
                if col % 2 == 0 {
                    acc += &term;
                } else {
                    acc -= &term;
                }
            }
            acc
        }
    }
}

/// Fraction-free (Bareiss) elimination with row pivoting.
pub fn det_bareiss(mut mat: Vec<Vec<MultiPoly>>, num_vars: usize) -> MultiPoly {
    let n = mat.len();
    if n == 0 {
        return MultiPoly::one(num_vars);
    }
    let mut negate = false;
    let mut prev = MultiPoly::one(num_vars);
    for k in 0..n - 1 {
        // sparsest nonzero pivot in column k
        let pivot = (k..n)
            .filter(|&r| !mat[r][k].is_zero())
            .min_by_key(|&r| mat[r][k].num_terms());
        let Some(p) = pivot else {
            return MultiPoly::zero(num_vars);
        };
        if p != k {
            mat.swap(p, k);
            negate = !negate;
        }
        let (head, tail) = mat.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pkk = &pivot_row[k];
        tail.par_iter_mut().for_each(|row| {
            let rik = row[k].clone();
            for j in k + 1..n {
                let mut v = &row[j] * pkk;
                if !rik.is_zero() && !pivot_row[j].is_zero() {
                    v -= &(&rik * &pivot_row[j]);
                }
                row[j] = v.exact_div(&prev).expect("Bareiss quotient is exact");
            }
            row[k] = MultiPoly::zero(num_vars);
        });
        prev = mat[k][k].clone();
    }
    let det = mat[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Discriminant of a monic univariate, `(-1)^{d(d-1)/2} Res(f, f')`.
pub fn discriminant(v: &UniPolyView) -> Result<MultiPoly> {
    let d = v.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall {
            needed: 2,
            found: d,
        });
    }
    if !v.is_monic() {
        return Err(Error::NotMonic);
    }
    let res = sylvester_resultant(v, &v.derivative()?)?;
    Ok(if (d * (d - 1) / 2) % 2 == 1 {
        -res
    } else {
        res
    })
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn rank(&self) -> usize {
        self.positive + self.negative
    }

    pub fn signature(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }

    pub fn is_psd(&self) -> bool {
        self.negative == 0
    }
}

/// Exact inertia of a rational symmetric matrix by symmetric elimination
/// (congruence transformations only).
pub fn inertia(mat: &[Vec<BigRational>]) -> Inertia {
    let n = mat.len();
    let mut a: Vec<Vec<BigRational>> = mat.to_vec();
    let mut pos = 0;
    let mut neg = 0;
    let mut k = 0;
    while k < n {
        let diag = (k..n).find(|&i| !a[i][i].is_zero());
        let piv = match diag {
            Some(i) => i,
            None => {
                let off = (k..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[i][j].is_zero());
                let Some((i, j)) = off else { break };
                // row_i += row_j, col_i += col_j: new a_ii = 2 a_ij
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[i][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][i] += v;
                }
                i
            }
        };
        if piv != k {
            a.swap(piv, k);
            for row in a.iter_mut() {
                row.swap(piv, k);
            }
        }
        let p = a[k][k].clone();
        if p > BigRational::zero() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for j in k + 1..n {
                if a[k][j].is_zero() {
                    continue;
                }
                let delta = &f * &a[k][j];
                a[i][j] -= delta;
            }
            a[i][k] = BigRational::zero();
        }
        for j in k + 1..n {
            a[k][j] = BigRational::zero();
        }
        k += 1;
    }
    Inertia {
        positive: pos,
        negative: neg,
        zero: n - pos - neg,
    }
}

/// Rank and signature of `H(a)`.
pub fn rank_signature(h: &SymMatrixPoly, a: &[BigRational]) -> Result<(usize, i64)> {
    let m = h.evaluate(a)?;
    let inr = inertia(&m);
    Ok((inr.rank(), inr.signature()))
}
