//! Verdicts shared by all pipelines.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::certify::{GramCertificate, IdentityCertificate, Tolerances};
use crate::error::{Error, Result};
use crate::polyring::{completion_matrix, format_rational, normalize_at_point, MultiPoly, Point};
use crate::sampler::{Falsifier, SamplerOptions, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Hyperbolic,
    NotHyperbolic,
    Unknown,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Hyperbolic => "hyperbolic",
            Status::NotHyperbolic => "not_hyperbolic",
            Status::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Hermite,
    Intersection,
    Nullsatz,
    Nuij,
    Auto,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hermite => "hermite",
            Method::Intersection => "intersection",
            Method::Nullsatz => "nullsatz",
            Method::Nuij => "nuij",
            Method::Auto => "auto",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hermite" => Ok(Method::Hermite),
            "intersection" => Ok(Method::Intersection),
            "nullsatz" => Ok(Method::Nullsatz),
            "nuij" => Ok(Method::Nuij),
            "auto" => Ok(Method::Auto),
            _ => Err(Error::InvalidInput(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Certificate {
    Gram(GramCertificate),
    Identity(IdentityCertificate),
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Gram(g) => {
                let mut v = g.to_json();
                v["kind"] = json!("gram");
                v
            }
            Certificate::Identity(c) => {
                let mut v = c.to_json();
                v["kind"] = json!("identity");
                v
            }
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            Certificate::Gram(g) => g.residual,
            Certificate::Identity(c) => c.residual,
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            Certificate::Gram(g) => g.exact.is_some(),
            Certificate::Identity(c) => c.exact,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub status: Status,
    pub method: Method,
    pub certificate: Option<Certificate>,
    pub witness: Option<Witness>,
    /// Witness direction `b` in the input coordinates: `F(t e - b)` has a
    /// non-real root.
    pub witness_original: Option<Vec<BigRational>>,
    pub reason: Option<String>,
    pub diagnostics: BTreeMap<String, Value>,
}

impl Verdict {
    pub fn hyperbolic(method: Method, cert: Certificate) -> Self {
        Verdict {
            status: Status::Hyperbolic,
            method,
            certificate: Some(cert),
            witness: None,
            witness_original: None,
            reason: None,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn not_hyperbolic(method: Method, witness: Witness) -> Self {
        Verdict {
            status: Status::NotHyperbolic,
            method,
            certificate: None,
            witness: Some(witness),
            witness_original: None,
            reason: None,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn unknown(method: Method, reason: impl Into<String>) -> Self {
        Verdict {
            status: Status::Unknown,
            method,
            certificate: None,
            witness: None,
            witness_original: None,
            reason: Some(reason.into()),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn is_certified(&self) -> bool {
        self.status != Status::Unknown
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }

    pub fn to_json(&self) -> Value {
        let mut diag = serde_json::Map::new();
        for (k, v) in &self.diagnostics {
            diag.insert(k.clone(), v.clone());
        }
        let mut out = json!({
            "method": self.method.as_str(),
            "verdict": self.status.as_str(),
            "diagnostics": Value::Object(diag),
        });
        if let Some(c) = &self.certificate {
            out["certificate"] = c.to_json();
        }
        if let Some(w) = &self.witness {
            let mut wj = w.to_json();
            if let Some(b) = &self.witness_original {
                wj["direction_original"] = json!(b.iter().map(format_rational).collect::<Vec<_>>());
            }
            out["witness"] = wj;
        }
        if let Some(r) = &self.reason {
            out["reason"] = json!(r);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct VerdictOptions {
    pub samples: usize,
    pub seed: u64,
    /// Hermite: exponent `k` of the `(sum x_i^2)^k` multiplier. When absent,
    /// `k = 0` is tried, then `k = 1`.
    pub sos_degree: Option<u32>,
    /// Nullstellensatz degree bound (default `2 deg F + 2`).
    pub degree_bound: Option<u32>,
    pub tols: Tolerances,
    /// Nuij: applications of each operator (default: the degree).
    pub nuij_applications: Option<u32>,
    pub nuij_rounds: u32,
    /// Nuij: largest total Gram size attempted in the strip search.
    pub nuij_max_gram: usize,
    /// Variable names of the input, used in certificates.
    pub vars: Option<Vec<String>>,
    /// Sampler coefficient noise (testing only).
    pub noise: f64,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions {
            samples: 2000,
            seed: 42,
            sos_degree: None,
            degree_bound: None,
            tols: Tolerances::default(),
            nuij_applications: None,
            nuij_rounds: 3,
            nuij_max_gram: 64,
            vars: None,
            noise: 0.0,
        }
    }
}

impl VerdictOptions {
    pub fn sampler(&self) -> SamplerOptions {
        SamplerOptions {
            samples: self.samples,
            seed: self.seed,
            noise: self.noise,
            ..SamplerOptions::default()
        }
    }
}

/// Normalized input shared by the pipelines.
pub struct Prepared {
    pub original: MultiPoly,
    pub point: Point,
    pub normalized: MultiPoly,
    pub degree: u32,
    /// Names of the normalized coordinates `x_0, ..., x_n`.
    pub names: Vec<String>,
}

impl Prepared {
    pub fn new(f: &MultiPoly, e: &Point, opts: &VerdictOptions) -> Result<Self> {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let degree = f.homogeneous_degree()?;
        let normalized = normalize_at_point(f, e)?;
        let n = f.num_vars();
        let is_e0 = e.0.iter().enumerate().all(|(i, c)| {
            if i == 0 {
                c == &BigRational::from_integer(1.into())
            } else {
                c.is_zero()
            }
        });
        let names = match &opts.vars {
            Some(v) if is_e0 && v.len() == n => v.clone(),
            _ => (0..n).map(|i| format!("y{i}")).collect(),
        };
        Ok(Prepared {
            original: f.clone(),
            point: e.clone(),
            normalized,
            degree,
            names,
        })
    }

    pub fn num_x(&self) -> usize {
        self.normalized.num_vars() - 1
    }

    pub fn x_names(&self) -> Vec<String> {
        self.names[1..].to_vec()
    }

    /// `b = -M (0, a)`, so that `F(t e - b)` is a positive multiple of
    /// `G(t, a)` up to the factor `F(e)`.
    pub fn original_direction(&self, a: &[BigRational]) -> Vec<BigRational> {
        let m = completion_matrix(&self.point);
        let n = m.len();
        (0..n)
            .map(|i| {
                let mut acc = BigRational::zero();
                for (j, aj) in a.iter().enumerate() {
                    acc += &m[i][j + 1] * aj;
                }
                -acc
            })
            .collect()
    }
}

/// Runs a certificate search and the falsifier concurrently and merges the
/// results. A confirmed witness is exact, so it takes precedence over a
/// floating-point certificate; the conflict is recorded.
pub fn combine<C>(
    prep: &Prepared,
    method: Method,
    opts: &VerdictOptions,
    certify: C,
) -> Result<Verdict>
where
    C: FnOnce() -> Result<
            std::result::Result<
                (Certificate, BTreeMap<String, Value>),
                (String, BTreeMap<String, Value>),
            >,
        > + Send,
{
    let sampler_opts = opts.sampler();
    let (cert_out, (witness, sample_ms)) = rayon::join(
        || {
            let t = Instant::now();
            (certify(), t.elapsed().as_secs_f64() * 1e3)
        },
        || {
            let t = Instant::now();
            let w = Falsifier::new(&prep.normalized, sampler_opts).map(|f| f.find_witness());
            (w, t.elapsed().as_secs_f64() * 1e3)
        },
    );
    let (cert_res, cert_ms) = cert_out;
    let cert_res = cert_res?;
    let witness = witness?;
    let mut diag: BTreeMap<String, Value> = BTreeMap::new();
    let mut verdict = match (&cert_res, witness) {
        (_, Some(w)) => {
            let mut v = Verdict::not_hyperbolic(method, w.clone());
            v.witness_original = Some(prep.original_direction(&w.direction_rational));
            if let Ok((c, _)) = &cert_res {
                v.note(
                    "conflict",
                    format!(
                        "a floating-point certificate (residual {:.3e}) was found alongside an exactly confirmed witness",
                        c.residual()
                    ),
                );
            }
            v
        }
        (Ok((c, _)), None) => Verdict::hyperbolic(method, c.clone()),
        (Err((reason, _)), None) => Verdict::unknown(
            method,
            format!("{reason}, no witness in {} samples", opts.samples),
        ),
    };
    match cert_res {
        Ok((_, d)) | Err((_, d)) => diag.extend(d),
    }
    diag.insert(
        "timings_ms".into(),
        json!({"certify": crate::certify::float_json(cert_ms), "sampler": crate::certify::float_json(sample_ms)}),
    );
    diag.insert("seed".into(), json!(opts.seed));
    diag.insert("samples".into(), json!(opts.samples));
    diag.insert("degree".into(), json!(prep.degree));
    verdict.diagnostics.extend(diag);
    Ok(verdict)
}
