//! Exact sparse multivariate polynomials over the rationals.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded lexicographic in the declared variable order. Iteration therefore
//! runs from the smallest to the largest monomial and the leading term is the
//! last entry. Zero coefficients are never stored, so structural equality is
//! polynomial equality.

mod parse;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use parse::{parse_poly, ParseError, ParseErrorKind};

use crate::error::{Error, Result};

/// Exponent vector of a monomial. Ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn var(num_vars: usize, index: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Degree under per-variable weights.
    pub fn weighted_degree(&self, weights: &[u32]) -> u32 {
        self.0.iter().zip(weights).map(|(e, w)| e * w).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }

    /// Renders the monomial as `x0^2*x1`, or `1` for the unit monomial.
    pub fn format(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    names[i].clone()
                } else {
                    format!("{}^{}", names[i], e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// All monomials in `num_vars` variables of total degree exactly `degree`,
    /// in ascending graded-lex order.
    pub fn all_of_degree(num_vars: usize, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; num_vars];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            let n = cur.len();
            if i + 1 == n {
                cur[i] = left;
                out.push(Monomial(cur.clone()));
                cur[i] = 0;
                return;
            }
            for e in 0..=left {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        if num_vars == 0 {
            if degree == 0 {
                out.push(Monomial(Vec::new()));
            }
            return out;
        }
        rec(0, degree, &mut cur, &mut out);
        out.sort();
        out
    }

    /// All monomials of total degree at most `degree`, ascending.
    pub fn all_up_to_degree(num_vars: usize, degree: u32) -> Vec<Monomial> {
        (0..=degree)
            .flat_map(|d| Monomial::all_of_degree(num_vars, d))
            .collect()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A point with rational coordinates, e.g. a hyperbolicity direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point(pub Vec<BigRational>);

impl Point {
    pub fn new(coords: Vec<BigRational>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(
            coords
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    /// `(1, 0, ..., 0)` in `len` coordinates.
    pub fn unit(len: usize) -> Self {
        let mut c = vec![BigRational::zero(); len];
        c[0] = BigRational::one();
        Point(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

/// Parses a rational literal `p` or `p/q`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: `{text}`"));
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::InvalidInput(format!("zero denominator in `{text}`")));
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = text.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(p))
        }
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator or denominator beyond f64 range: scale both down
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Result of the homogeneity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    Homogeneous(u32),
    NotHomogeneous,
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiPoly {
    num_vars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl MultiPoly {
    pub fn zero(num_vars: usize) -> Self {
        MultiPoly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(num_vars: usize) -> Self {
        MultiPoly::constant(num_vars, BigRational::one())
    }

    pub fn constant(num_vars: usize, c: BigRational) -> Self {
        let mut p = MultiPoly::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(num_vars), c);
        }
        p
    }

    pub fn from_int(num_vars: usize, c: i64) -> Self {
        MultiPoly::constant(num_vars, BigRational::from_integer(c.into()))
    }

    pub fn var(num_vars: usize, index: usize) -> Self {
        assert!(index < num_vars, "variable index out of range");
        MultiPoly::monomial(num_vars, Monomial::var(num_vars, index), BigRational::one())
    }

    pub fn monomial(num_vars: usize, m: Monomial, c: BigRational) -> Self {
        assert_eq!(m.num_vars(), num_vars, "monomial arity mismatch");
        let mut p = MultiPoly::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing
    /// duplicates and dropping zeros.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, BigRational)>,
    {
        let mut p = MultiPoly::zero(num_vars);
        for (m, c) in terms {
            assert_eq!(m.num_vars(), num_vars, "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeff_of(&self, exps: &[u32]) -> BigRational {
        self.coeff(&Monomial(exps.to_vec()))
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Constant term.
    pub fn constant_term(&self) -> BigRational {
        self.coeff(&Monomial::one(self.num_vars))
    }

    /// `Some(c)` when the polynomial is the constant `c` (zero included).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).max()
    }

    /// Smallest exponent of `var` over all terms.
    pub fn min_degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).min()
    }

    pub fn max_abs_coeff(&self) -> BigRational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_arity(&self, other: &MultiPoly) {
        assert_eq!(
            self.num_vars, other.num_vars,
            "polynomials live in rings with different numbers of variables"
        );
    }

    pub fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.num_vars);
        }
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.num_vars);
        }
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> MultiPoly {
        let mut result = MultiPoly::one(self.num_vars);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Power with a signed exponent; negative exponents are rejected.
    pub fn try_pow(&self, exp: i64) -> Result<MultiPoly> {
        let e = u32::try_from(exp).map_err(|_| Error::NegativeExponent(exp))?;
        Ok(self.pow(e))
    }

    /// Exact quotient `self / divisor`; fails when the remainder is nonzero.
    pub fn exact_div(&self, divisor: &MultiPoly) -> Result<MultiPoly> {
        self.check_arity(divisor);
        let (lm, lc) = divisor.leading_term().ok_or(Error::DivisionByZero)?;
        if let Some(c) = divisor.as_constant() {
            return Ok(self.scale(&c.recip()));
        }
        let lc_inv = lc.recip();
        let mut rem = self.terms.clone();
        let mut quot = MultiPoly::zero(self.num_vars);
        while let Some((m, c)) = rem.iter().next_back() {
            if !lm.divides(m) {
                return Err(Error::InexactDivision);
            }
            let qm = lm.quotient_of(m);
            let qc = c * &lc_inv;
            for (dm, dc) in &divisor.terms {
                let key = dm.mul(&qm);
                let delta = dc * &qc;
                use std::collections::btree_map::Entry;
                match rem.entry(key) {
                    Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                    Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                }
            }
            quot.terms.insert(qm, qc);
        }
        Ok(quot)
    }

    pub fn partial_derivative(&self, var: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[var] -= 1;
            out.terms
                .insert(nm, c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.num_vars {
            return Err(Error::ArityMismatch {
                expected: self.num_vars,
                found: point.len(),
            });
        }
        let mut powers: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]; self.num_vars];
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = &mut powers[i];
                while pw.len() <= e as usize {
                    let next = pw.last().unwrap() * &point[i];
                    pw.push(next);
                }
                v *= &pw[e as usize];
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Floating-point evaluation.
    pub fn evaluate_f64(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.num_vars {
            return Err(Error::ArityMismatch {
                expected: self.num_vars,
                found: point.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(point)
                    .fold(rat_to_f64(c), |acc, (&e, &x)| acc * x.powi(e as i32))
            })
            .sum())
    }

    pub fn homogeneity(&self) -> Result<Homogeneity> {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        let first = degrees.next().ok_or(Error::ZeroPolynomial)?;
        if degrees.all(|d| d == first) {
            Ok(Homogeneity::Homogeneous(first))
        } else {
            Ok(Homogeneity::NotHomogeneous)
        }
    }

    /// Degree of a homogeneous polynomial, or an error.
    pub fn homogeneous_degree(&self) -> Result<u32> {
        match self.homogeneity()? {
            Homogeneity::Homogeneous(d) => Ok(d),
            Homogeneity::NotHomogeneous => Err(Error::NotHomogeneous),
        }
    }

    /// Substitutes `subs[i]` for variable `i`. All substitutes must share a
    /// ring; the result lives in that ring.
    pub fn compose(&self, subs: &[MultiPoly]) -> MultiPoly {
        assert_eq!(subs.len(), self.num_vars, "one substitute per variable");
        let target_vars = subs.first().map(|s| s.num_vars).unwrap_or(0);
        let mut powers: Vec<Vec<MultiPoly>> = subs
            .iter()
            .map(|s| vec![MultiPoly::one(s.num_vars), s.clone()])
            .collect();
        let mut acc = MultiPoly::zero(target_vars);
        for (m, c) in &self.terms {
            let mut term = MultiPoly::constant(target_vars, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = &mut powers[i];
                while pw.len() <= e as usize {
                    let next = pw.last().unwrap() * &subs[i];
                    pw.push(next);
                }
                term = &term * &pw[e as usize];
            }
            acc += &term;
        }
        acc
    }

    /// Substitutes a rational value for one variable and drops it.
    pub fn specialize(&self, var: usize, value: &BigRational) -> MultiPoly {
        let mut out = MultiPoly::zero(self.num_vars - 1);
        for (m, c) in &self.terms {
            let e = m.0[var];
            let mut nm = m.0.clone();
            nm.remove(var);
            let v = if e == 0 {
                c.clone()
            } else {
                c * num_traits::pow(value.clone(), e as usize)
            };
            out.add_term(Monomial(nm), v);
        }
        out
    }

    /// Re-embeds into a ring with `new_num_vars` variables, sending variable
    /// `i` to `mapping[i]`.
    pub fn remap(&self, mapping: &[usize], new_num_vars: usize) -> MultiPoly {
        assert_eq!(mapping.len(), self.num_vars);
        let mut out = MultiPoly::zero(new_num_vars);
        for (m, c) in &self.terms {
            let mut nm = vec![0u32; new_num_vars];
            for (i, &e) in m.0.iter().enumerate() {
                nm[mapping[i]] += e;
            }
            out.add_term(Monomial(nm), c.clone());
        }
        out
    }

    /// Removes a variable that does not occur.
    pub fn drop_var(&self, var: usize) -> Result<MultiPoly> {
        if self.degree_in(var).unwrap_or(0) > 0 {
            return Err(Error::InvalidInput(format!(
                "variable {var} occurs and cannot be dropped"
            )));
        }
        Ok(self.specialize(var, &BigRational::zero()))
    }

    /// Substitutes `var -> -var`.
    pub fn negate_var(&self, var: usize) -> MultiPoly {
        MultiPoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let c = if m.0[var] % 2 == 1 { -c } else { c.clone() };
                    (m.clone(), c)
                })
                .collect(),
        }
    }

    /// True when only even powers of `var` occur.
    pub fn is_even_in(&self, var: usize) -> bool {
        self.terms.keys().all(|m| m.0[var] % 2 == 0)
    }

    /// True when only odd powers of `var` occur.
    pub fn is_odd_in(&self, var: usize) -> bool {
        self.terms.keys().all(|m| m.0[var] % 2 == 1)
    }

    /// Replaces `var^(2k)` by `var^k`. Requires `is_even_in(var)`.
    pub fn halve_exponents(&self, var: usize) -> MultiPoly {
        assert!(self.is_even_in(var));
        MultiPoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut nm = m.clone();
                    nm.0[var] /= 2;
                    (nm, c.clone())
                })
                .collect(),
        }
    }

    /// Least common multiple of coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Human-readable form with the given variable names, descending
    /// graded-lex order. Round-trips through [`parse_poly`].
    pub fn format(&self, names: &[impl AsRef<str>]) -> String {
        let names: Vec<String> = names.iter().map(|n| n.as_ref().to_string()).collect();
        assert!(names.len() >= self.num_vars, "not enough variable names");
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                out.push_str(&format_rational(&a));
            } else {
                if !a.is_one() {
                    out.push_str(&format_rational(&a));
                    out.push('*');
                }
                out.push_str(&m.format(&names));
            }
        }
        out
    }

    /// Default variable names `x0, x1, ...`.
    pub fn default_names(num_vars: usize) -> Vec<String> {
        (0..num_vars).map(|i| format!("x{i}")).collect()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(&MultiPoly::default_names(self.num_vars)))
    }
}

impl<'a> std::ops::AddAssign<&'a MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &'a MultiPoly) {
        self.check_arity(rhs);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<'a> std::ops::SubAssign<&'a MultiPoly> for MultiPoly {
    fn sub_assign(&mut self, rhs: &'a MultiPoly) {
        self.check_arity(rhs);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &'a MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &'a MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.check_arity(rhs);
        if self.is_zero() || rhs.is_zero() {
            return MultiPoly::zero(self.num_vars);
        }
        let mut acc: HashMap<Monomial, BigRational> =
            HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let prod = ca * cb;
                acc.entry(ma.mul(mb))
                    .and_modify(|c| *c += &prod)
                    .or_insert(prod);
            }
        }
        MultiPoly {
            num_vars: self.num_vars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: &'a MultiPoly) -> MultiPoly {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Reduces hyperbolicity at `e` to hyperbolicity at `(1, 0, ..., 0)`.
///
/// Returns `G = F(M y) / F(e)` where the first column of `M` is `e` and the
/// remaining columns are the standard basis vectors of every coordinate other
/// than the pivot (first nonzero entry) of `e`, in increasing order.
pub fn normalize_at_point(f: &MultiPoly, e: &Point) -> Result<MultiPoly> {
    let n = f.num_vars();
    if e.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: e.len(),
        });
    }
    if e.is_zero() {
        return Err(Error::ZeroDirection);
    }
    f.homogeneous_degree()?;
    let fe = f.evaluate(&e.0)?;
    if fe.is_zero() {
        return Err(Error::NotAdmissible);
    }
    let m = completion_matrix(e);
    // x_i = sum_j M[i][j] y_j
    let subs: Vec<MultiPoly> = (0..n)
        .map(|i| MultiPoly::from_terms(n, (0..n).map(|j| (Monomial::var(n, j), m[i][j].clone()))))
        .collect();
    Ok(f.compose(&subs).scale(&fe.recip()))
}

/// The invertible matrix used by [`normalize_at_point`].
pub fn completion_matrix(e: &Point) -> Vec<Vec<BigRational>> {
    let n = e.len();
    let pivot =
        e.0.iter()
            .position(|c| !c.is_zero())
            .expect("nonzero point");
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        m[i][0] = e.0[i].clone();
    }
    let mut col = 1;
    for k in (0..n).filter(|&k| k != pivot) {
        m[k][col] = BigRational::one();
        col += 1;
    }
    m
}
