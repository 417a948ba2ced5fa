//! Randomized falsification: sample directions, find non-real roots of
//! `t ↦ F(t, a)` numerically, and confirm them exactly with the Hermite matrix.

use nalgebra::{Complex, DMatrix, Schur};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::certify::float_json;
use crate::certify::rounding::approx_rational;
use crate::error::{Error, Result};
use crate::polyring::{format_rational, rat_to_f64, MultiPoly};
use crate::structmats::{
    hermite_matrix, rank_signature, univariate_view, SymMatrixPoly, UniPolyView,
};

#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<Complex<f64>>,
    /// Max coefficient difference between the input and `prod (t - r)`,
    /// relative to `1 + max |coeff|`.
    pub backward_error: f64,
}

/// Complex roots of a monic polynomial given by ascending coefficients
/// (`coeffs[d] = 1`), as eigenvalues of its companion matrix.
pub fn roots_univariate(coeffs: &[f64]) -> Result<RootSet> {
    if coeffs.len() < 2 {
        return Err(Error::DegreeTooSmall {
            needed: 1,
            found: 0,
        });
    }
    let d = coeffs.len() - 1;
    if coeffs[d] != 1.0 {
        return Err(Error::NotMonic);
    }
    // exact zero roots are split off; the eigensolver stalls on nilpotent blocks
    let z = coeffs.iter().take_while(|v| **v == 0.0).count().min(d);
    let mut roots = vec![Complex::new(0.0, 0.0); z];
    let m = d - z;
    if m > 0 {
        let tail = &coeffs[z..];
        let mut c = DMatrix::<f64>::zeros(m, m);
        for i in 1..m {
            c[(i, i - 1)] = 1.0;
        }
        for i in 0..m {
            c[(i, m - 1)] = -tail[i];
        }
        let schur = Schur::try_new(c, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::NumericFailure("eigenvalue iteration did not converge".into()))?;
        roots.extend(schur.complex_eigenvalues().iter().copied());
    }
    // recompose prod (t - r_i)
    let mut prod = vec![Complex::new(1.0, 0.0)];
    for r in &roots {
        let mut next = vec![Complex::new(0.0, 0.0); prod.len() + 1];
        for (k, p) in prod.iter().enumerate() {
            next[k + 1] += p;
            next[k] -= p * r;
        }
        prod = next;
    }
    let scale = 1.0 + coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let backward_error = prod
        .iter()
        .zip(coeffs)
        .map(|(p, c)| (p - Complex::new(*c, 0.0)).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(RootSet {
        roots,
        backward_error,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Unit direction `a` in the normalized coordinates `(x_1, ..., x_n)`.
    pub direction: Vec<f64>,
    /// Rational rounding of `a`; the exact confirmation refers to this vector.
    pub direction_rational: Vec<BigRational>,
    /// A root of `t ↦ F(t, a_rat)` with the largest imaginary part.
    pub root: Complex<f64>,
    pub im_margin: f64,
    pub exact_confirmation: bool,
    pub sample_index: usize,
}

impl Witness {
    pub fn to_json(&self) -> Value {
        json!({
            "direction": self.direction.iter().map(|v| float_json(*v)).collect::<Vec<_>>(),
            "direction_rational": self.direction_rational.iter().map(format_rational).collect::<Vec<_>>(),
            "root": {"re": float_json(self.root.re), "im": float_json(self.root.im)},
            "im_margin": float_json(self.im_margin),
            "exact_confirmation": self.exact_confirmation,
            "sample": self.sample_index,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SamplerOptions {
    pub samples: usize,
    pub seed: u64,
    /// A root is flagged non-real when `|Im| > im_tol * (1 + |root|)`.
    pub im_tol: f64,
    /// Denominator cap when rounding `a` for exact confirmation.
    pub max_den: u64,
    /// Relative noise added to the evaluated coefficients. Only used to test
    /// that noisy numerics never produce a confirmed witness.
    pub noise: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            samples: 2000,
            seed: 42,
            im_tol: 1e-7,
            max_den: 10_000,
            noise: 0.0,
        }
    }
}

/// Precomputed data for one normalized form.
pub struct Falsifier {
    view: UniPolyView,
    hermite: SymMatrixPoly,
    opts: SamplerOptions,
}

const CHUNK: usize = 64;

impl Falsifier {
    /// `f` must be normalized at `(1, 0, ..., 0)`.
    pub fn new(f: &MultiPoly, opts: SamplerOptions) -> Result<Self> {
        let view = univariate_view(f, 0)?;
        if !view.is_monic() {
            return Err(Error::NotMonic);
        }
        let hermite = hermite_matrix(f, 0)?;
        Ok(Falsifier {
            view,
            hermite,
            opts,
        })
    }

    pub fn num_directions(&self) -> usize {
        self.view.coeff_vars()
    }

    /// Exact test: does `t ↦ F(t, a)` have a non-real root? True iff the
    /// Hermite matrix at `a` has rank (distinct roots) above its signature
    /// (distinct real roots).
    pub fn confirm(&self, a: &[BigRational]) -> Result<bool> {
        let (rank, sig) = rank_signature(&self.hermite, a)?;
        Ok(rank as i64 > sig)
    }

    fn direction(&self, index: usize) -> Vec<f64> {
        let n = self.num_directions();
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        rng.set_stream(index as u64);
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Checks one direction; returns a confirmed witness or nothing.
    pub fn check_direction(&self, a: &[f64], index: usize) -> Option<Witness> {
        let mut coeffs = self.view.evaluate_coeffs_f64(a).ok()?;
        if self.opts.noise > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x9e37_79b9);
            rng.set_stream(index as u64);
            let d = coeffs.len() - 1;
            for c in &mut coeffs[..d] {
                let e: f64 = rng.sample(StandardNormal);
                *c += self.opts.noise * e * (1.0 + c.abs());
            }
        }
        let rs = roots_univariate(&coeffs).ok()?;
        let flagged = rs
            .roots
            .iter()
            .any(|r| r.im.abs() > self.opts.im_tol * (1.0 + r.norm()));
        if !flagged {
            return None;
        }
        let a_rat: Vec<BigRational> = a
            .iter()
            .map(|v| approx_rational(*v, self.opts.max_den))
            .collect();
        if !self.confirm(&a_rat).ok()? {
            return None;
        }
        let a_f: Vec<f64> = a_rat.iter().map(rat_to_f64).collect();
        let exact_coeffs = self.view.evaluate_coeffs_f64(&a_f).ok()?;
        let roots = roots_univariate(&exact_coeffs).ok()?.roots;
        let root = roots
            .iter()
            .copied()
            .max_by(|x, y| x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))?;
        Some(Witness {
            direction: a.to_vec(),
            direction_rational: a_rat,
            root,
            im_margin: root.im.abs() / (1.0 + root.norm()),
            exact_confirmation: true,
            sample_index: index,
        })
    }

    /// Deterministic search over `opts.samples` directions; the confirmed
    /// witness with the smallest sample index wins.
    pub fn find_witness(&self) -> Option<Witness> {
        if self.num_directions() == 0 || self.view.degree() < 2 {
            return None;
        }
        let total = self.opts.samples;
        let mut start = 0;
        while start < total {
            let end = (start + CHUNK).min(total);
            let hit = (start..end)
                .into_par_iter()
                .find_map_first(|i| self.check_direction(&self.direction(i), i));
            if hit.is_some() {
                return hit;
            }
            start = end;
        }
        None
    }
}

/// Convenience wrapper: search for a witness of non-hyperbolicity of a form
/// normalized at `(1, 0, ..., 0)`.
pub fn find_witness(f: &MultiPoly, opts: &SamplerOptions) -> Result<Option<Witness>> {
    Ok(Falsifier::new(f, opts.clone())?.find_witness())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{parse_poly, rat};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn roots_of_simple_polynomials() {
        let r = sorted(roots_univariate(&[-1.0, 0.0, 1.0]).unwrap().roots);
        assert!((r[0].re + 1.0).abs() < 1e-12 && (r[1].re - 1.0).abs() < 1e-12);

        let rs = roots_univariate(&[-1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(rs.backward_error < 1e-12);
        let r = sorted(rs.roots);
        let expect = [(-1.0, 0.0), (0.0, -1.0), (0.0, 1.0), (1.0, 0.0)];
        for (z, (re, im)) in r.iter().zip(expect) {
            assert!(
                (z.re - re).abs() < 1e-10 && (z.im - im).abs() < 1e-10,
                "{z}"
            );
        }
        assert!(roots_univariate(&[1.0]).is_err());
        assert!(roots_univariate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn cubic_direction_has_three_real_roots() {
        let v = names(&["x0", "x1", "x2"]);
        let f = parse_poly("x0^3 - 1/2*x0^2*x1 - x0*x1^2 - 1/2*x0*x2^2 + 1/2*x1^3", &v).unwrap();
        let fz = Falsifier::new(&f, SamplerOptions::default()).unwrap();
        let rs = roots_univariate(&[0.5, -1.5, -0.5, 1.0]).unwrap();
        assert!(rs.roots.iter().all(|r| r.im.abs() < 1e-9));
        assert!(!fz.confirm(&[rat(1, 1), rat(1, 1)]).unwrap());
        let (rank, sig) = rank_signature(&fz.hermite, &[rat(1, 1), rat(1, 1)]).unwrap();
        assert_eq!((rank, sig), (3, 3));
    }

    #[test]
    fn quartic_witness_at_axis() {
        let v = names(&["x0", "x1", "x2"]);
        let f = parse_poly("x0^4 - x1^4 - x2^4", &v).unwrap();
        let fz = Falsifier::new(&f, SamplerOptions::default()).unwrap();
        let w = fz.check_direction(&[1.0, 0.0], 0).unwrap();
        assert!(w.exact_confirmation);
        assert!((w.root.im - 1.0).abs() < 1e-9 && w.root.re.abs() < 1e-9);
        assert!(fz.find_witness().is_some());
    }

    #[test]
    fn cone_has_no_witness() {
        let v = names(&["x0", "x1", "x2"]);
        let f = parse_poly("x0^2 - x1^2 - x2^2", &v).unwrap();
        let opts = SamplerOptions {
            samples: 500,
            ..Default::default()
        };
        assert!(find_witness(&f, &opts).unwrap().is_none());
    }

    #[test]
    fn search_is_deterministic() {
        let v = names(&["x0", "x1", "x2"]);
        let f = parse_poly("x0^4 - x1^4 - x2^4", &v).unwrap();
        let opts = SamplerOptions {
            samples: 300,
            seed: 9,
            ..Default::default()
        };
        let a = find_witness(&f, &opts).unwrap();
        let b = find_witness(&f, &opts).unwrap();
        assert_eq!(a, b);
    }
}
