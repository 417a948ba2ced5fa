//! Built-in test forms with known ground truth, and the `auto` strategy.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Result;
use crate::hermite::hermite_verdict;
use crate::intersection::{intersection_verdict, nullsatz_verdict};
use crate::nuij::nuij_verdict;
use crate::polyring::{parse_poly, rat, MultiPoly, Point};
use crate::verdict::{Method, Status, Verdict, VerdictOptions};

/// What a verdict on a corpus entry may be.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    /// Must be certified hyperbolic.
    Hyperbolic,
    /// Must be refuted with a confirmed witness.
    NotHyperbolic,
    /// Hyperbolic, possibly only on the boundary: any verdict except a
    /// refutation.
    NeverRefuted,
}

impl Expectation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Expectation::Hyperbolic => "hyperbolic",
            Expectation::NotHyperbolic => "not_hyperbolic",
            Expectation::NeverRefuted => "never_refuted",
        }
    }

    pub fn accepts(&self, status: Status) -> bool {
        match self {
            Expectation::Hyperbolic => status == Status::Hyperbolic,
            Expectation::NotHyperbolic => status == Status::NotHyperbolic,
            Expectation::NeverRefuted => status != Status::NotHyperbolic,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub poly: MultiPoly,
    pub vars: Vec<String>,
    pub point: Point,
    pub expect: Expectation,
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn entry(name: impl Into<String>, text: &str, n: usize, expect: Expectation) -> CorpusEntry {
    let vars = names(n);
    CorpusEntry {
        name: name.into(),
        poly: parse_poly(text, &vars).expect("corpus polynomial parses"),
        vars,
        point: Point::unit(n),
        expect,
    }
}

/// `x0 x2^2 - (x1 - x0/c)(x1^2 - c x0^2)`.
pub fn f_c(c: &BigRational) -> MultiPoly {
    let x = |i| MultiPoly::var(3, i);
    let x0 = x(0);
    let lin = &x(1) - &x0.scale(&c.recip());
    let quad = &(&x(1) * &x(1)) - &(&x0 * &x0).scale(c);
    &(&x0 * &(&x(2) * &x(2))) - &(&lin * &quad)
}

/// `x0^2 - x1^2 - ... - xn^2`.
pub fn cone(n: usize) -> MultiPoly {
    let mut text = "x0^2".to_string();
    for i in 1..=n {
        text.push_str(&format!(" - x{i}^2"));
    }
    parse_poly(&text, &names(n + 1)).expect("cone parses")
}

pub fn quartic() -> MultiPoly {
    parse_poly("x0^4 - x1^4 - x2^4", &names(3)).unwrap()
}

/// Hyperbolic cubic used for the Hermite-form example.
pub fn hermite_cubic() -> MultiPoly {
    parse_poly(
        "x0^3 - 1/2*x0^2*x1 - x0*x1^2 - 1/2*x0*x2^2 + 1/2*x1^3",
        &names(3),
    )
    .unwrap()
}

/// Hyperbolic cubic used for the N-path discriminant example; the same
/// form as [`hermite_cubic`] with `t = x0`.
pub fn nuij_cubic() -> MultiPoly {
    hermite_cubic()
}

/// Product of `d` random linear forms `x0 + sum c_i x_i` in `n + 1`
/// variables, small integer coefficients. Hyperbolic at `(1, 0, ..., 0)`.
pub fn random_linear_product(rng: &mut impl Rng, d: usize, n: usize) -> MultiPoly {
    let nv = n + 1;
    let mut acc = MultiPoly::one(nv);
    for _ in 0..d {
        let mut lin = MultiPoly::var(nv, 0);
        for i in 1..nv {
            let c: i64 = rng.random_range(-3..=3);
            lin += &MultiPoly::var(nv, i).scale(&rat(c, 1));
        }
        acc = &acc * &lin;
    }
    acc
}

/// The fixed corpus: ground-truth families and `random` seeded products.
pub fn corpus(random: usize, seed: u64) -> Vec<CorpusEntry> {
    let mut out = vec![
        CorpusEntry {
            name: "F_c c=2".into(),
            poly: f_c(&rat(2, 1)),
            vars: names(3),
            point: Point::unit(3),
            expect: Expectation::Hyperbolic,
        },
        CorpusEntry {
            name: "F_c c=1/2".into(),
            poly: f_c(&rat(1, 2)),
            vars: names(3),
            point: Point::unit(3),
            expect: Expectation::Hyperbolic,
        },
        CorpusEntry {
            name: "F_c c=1".into(),
            poly: f_c(&rat(1, 1)),
            vars: names(3),
            point: Point::unit(3),
            expect: Expectation::NeverRefuted,
        },
        CorpusEntry {
            name: "F_c c=-1".into(),
            poly: f_c(&rat(-1, 1)),
            vars: names(3),
            point: Point::unit(3),
            expect: Expectation::NotHyperbolic,
        },
    ];
    for n in 1..=4 {
        out.push(CorpusEntry {
            name: format!("cone n={n}"),
            poly: cone(n),
            vars: names(n + 1),
            point: Point::unit(n + 1),
            expect: Expectation::Hyperbolic,
        });
    }
    out.push(entry(
        "quartic",
        "x0^4 - x1^4 - x2^4",
        3,
        Expectation::NotHyperbolic,
    ));
    out.push(CorpusEntry {
        name: "hermite cubic".into(),
        poly: hermite_cubic(),
        vars: names(3),
        point: Point::unit(3),
        expect: Expectation::Hyperbolic,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..random {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=3);
        out.push(CorpusEntry {
            name: format!("linear product #{k} (d={d}, n={n})"),
            poly: random_linear_product(&mut rng, d, n),
            vars: names(n + 1),
            point: Point::unit(n + 1),
            expect: Expectation::NeverRefuted,
        });
    }
    out
}

/// Runs one method; `Auto` tries Hermite, then intersection, then Nuij and
/// stops at the first certified verdict.
pub fn run_method(
    f: &MultiPoly,
    e: &Point,
    method: Method,
    opts: &VerdictOptions,
) -> Result<Verdict> {
    match method {
        Method::Hermite => hermite_verdict(f, e, opts),
        Method::Intersection => intersection_verdict(f, e, opts),
        Method::Nullsatz => nullsatz_verdict(f, e, opts),
        Method::Nuij => nuij_verdict(f, e, opts),
        Method::Auto => {
            let mut reasons = Vec::new();
            let mut last = None;
            for m in [Method::Hermite, Method::Intersection, Method::Nuij] {
                let v = run_method(f, e, m, opts)?;
                if v.is_certified() {
                    let mut v = v;
                    v.note("auto_tried", json!(reasons));
                    return Ok(v);
                }
                reasons.push(json!({"method": m.as_str(), "reason": v.reason.clone()}));
                last = Some(v);
            }
            let mut v = last.expect("at least one method ran");
            v.method = Method::Auto;
            v.reason = Some("no method produced a certified verdict".into());
            v.note("auto_tried", json!(reasons));
            Ok(v)
        }
    }
}

/// One row of a corpus run.
#[derive(Clone, Debug)]
pub struct CorpusRow {
    pub name: String,
    pub expect: Expectation,
    pub verdicts: Vec<Verdict>,
}

impl CorpusRow {
    /// Ground truth respected by the methods taken together, no
    /// contradiction, and every refutation carries a confirmed witness.
    pub fn passed(&self) -> bool {
        let any = |st: Status| self.verdicts.iter().any(|v| v.status == st);
        let truth = match self.expect {
            Expectation::Hyperbolic => any(Status::Hyperbolic),
            Expectation::NotHyperbolic => any(Status::NotHyperbolic),
            Expectation::NeverRefuted => !any(Status::NotHyperbolic),
        };
        let confirmed = self
            .verdicts
            .iter()
            .filter(|v| v.status == Status::NotHyperbolic)
            .all(|v| v.witness.as_ref().is_some_and(|w| w.exact_confirmation));
        truth && confirmed && !self.contradictory()
    }

    /// A certified hyperbolic and a certified non-hyperbolic verdict.
    pub fn contradictory(&self) -> bool {
        let h = self.verdicts.iter().any(|v| v.status == Status::Hyperbolic);
        let n = self
            .verdicts
            .iter()
            .any(|v| v.status == Status::NotHyperbolic);
        h && n
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "expect": self.expect.as_str(),
            "passed": self.passed(),
            "verdicts": self.verdicts.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Runs every entry through each of `methods`.
pub fn run_corpus(
    entries: &[CorpusEntry],
    methods: &[Method],
    opts: &VerdictOptions,
) -> Result<Vec<CorpusRow>> {
    entries
        .iter()
        .map(|e| {
            let mut o = opts.clone();
            o.vars = Some(e.vars.clone());
            let verdicts = methods
                .iter()
                .map(|m| run_method(&e.poly, &e.point, *m, &o))
                .collect::<Result<Vec<_>>>()?;
            Ok(CorpusRow {
                name: e.name.clone(),
                expect: e.expect,
                verdicts,
            })
        })
        .collect()
}
