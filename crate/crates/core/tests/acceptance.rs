//! Acceptance checks, one line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{
    assemble, distinct_roots, random_coeff, random_monic_form, random_rooted_univariate, strs,
};
use hyperbolicity::certify::{sos_decompose, BasisRule, Tolerances};
use hyperbolicity::corpus::{corpus, hermite_cubic, nuij_cubic, quartic, run_corpus, Expectation};
use hyperbolicity::intersection::resultant_factor;
use hyperbolicity::nuij::{npath_discriminant, nuij_path};
use hyperbolicity::polyring::{normalize_at_point, parse_poly, rat, Monomial, MultiPoly};
use hyperbolicity::sampler::{find_witness, SamplerOptions};
use hyperbolicity::structmats::{
    discriminant, hermite_form, hermite_matrix, rank_signature, univariate_view,
};
use hyperbolicity::verdict::{Method, Status, VerdictOptions};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn hermite_vars() -> Vec<String> {
    strs(&["x1", "x2", "u1", "u2", "u3"])
}

fn c1_hermite_golden() -> Check {
    let got = hermite_form(&hermite_cubic()).map_err(|e| e.to_string())?;
    let expected = parse_poly(
        "3*u1^2 + u1*u2*x1 + 9/4*u2^2*x1^2 + 9/2*u1*u3*x1^2 + 1/4*u2*u3*x1^3 \
         + 33/16*u3^2*x1^4 + u2^2*x2^2 + 2*u1*u3*x2^2 + 3/2*u2*u3*x1*x2^2 \
         + 5/2*u3^2*x1^2*x2^2 + 1/2*u3^2*x2^4",
        &hermite_vars(),
    )
    .unwrap();
    ensure!(got == expected, "form differs: {}", got.format(&hermite_vars()));
    Ok(format!("{} terms, exact", got.num_terms()))
}

fn c2_paper_certificate() -> Check {
    let v = hermite_vars();
    let h = hermite_form(&hermite_cubic()).map_err(|e| e.to_string())?;
    let replay = parse_poly(
        "3*(3/4*x1^2*u3 + 1/3*x2^2*u3 + 1/6*x1*u2 + u1)^2 \
         + 13/6*(-3/26*x1^2*u3 + 1/26*x2^2*u3 + x1*u2)^2 \
         + (x1*x2*u3 + 1/2*x2*u2)^2 + 3/4*x2^2*u2^2 \
         + 9/26*(x1^2*u3 + 1/36*x2^2*u3)^2 + 47/288*x2^4*u3^2",
        &v,
    )
    .unwrap();
    ensure!(replay == h, "printed decomposition differs by {}", (&replay - &h).format(&v));
    // basis u_j * (monomials of degree j - 1 in x)
    let basis: Vec<Monomial> = (1..=3u32)
        .flat_map(|j| {
            Monomial::all_of_degree(2, j - 1).into_iter().map(move |mu| {
                let mut e = mu.exps().to_vec();
                e.extend([0, 0, 0]);
                e[1 + j as usize] = 1;
                Monomial::new(e)
            })
        })
        .collect();
    let cert = sos_decompose(&h, &v, &BasisRule::Explicit(basis), &Tolerances::default())
        .map_err(|e| e.to_string())?
        .map_err(|f| format!("solver found no Gram: {f:?}"))?;
    ensure!(cert.residual <= 1e-6, "Gram residual {:.3e}", cert.residual);
    Ok(format!("replay exact, solver residual {:.1e}", cert.residual))
}

fn c3_quadratic_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let t2 = MultiPoly::var(3, 0);
    let t2sq = &t2 * &t2;
    for _ in 0..20 {
        let f1 = random_coeff(&mut rng, 1);
        let f2 = random_coeff(&mut rng, 2);
        let fac = resultant_factor(&assemble(&[f1.clone(), f2.clone()])).map_err(|e| e.to_string())?;
        let inner = &(&f2.scale(&rat(4, 1)) - &(&f1 * &f1)) - &t2sq.scale(&rat(4, 1));
        ensure!(fac.full == &t2sq * &inner, "identity fails");
    }
    Ok("20/20 exact".into())
}

fn c4_cubic_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let t2 = MultiPoly::var(3, 0);
    let t2sq = &t2 * &t2;
    for _ in 0..20 {
        let fs: Vec<MultiPoly> = (1..=3).map(|k| random_coeff(&mut rng, k)).collect();
        let g = assemble(&fs);
        let fac = resultant_factor(&g).map_err(|e| e.to_string())?;
        let delta = discriminant(&univariate_view(&g, 0).unwrap())
            .unwrap()
            .remap(&[1, 2], 3);
        let q = &(&fs[0] * &fs[0]) - &fs[1].scale(&rat(3, 1));
        let bracket = &(&(&delta + &(&t2sq * &(&q * &q)).scale(&rat(4, 1)))
            + &(&t2sq.pow(2) * &q).scale(&rat(32, 1)))
            + &t2sq.pow(3).scale(&rat(64, 1));
        ensure!(fac.full == -(&t2.pow(3) * &bracket), "identity fails");
    }
    Ok("20/20 exact".into())
}

fn c5_quartic_golden() -> Check {
    let fac = resultant_factor(&quartic()).map_err(|e| e.to_string())?;
    let v = strs(&["t2", "x1", "x2"]);
    let expect = parse_poly("256*(t2^4 - x1^4 - x2^4)*(4*t2^4 + x1^4 + x2^4)^2", &v).unwrap();
    let sign = if fac.r_f == expect {
        "+"
    } else if fac.r_f == -expect.clone() {
        "-"
    } else {
        return Err(format!("R_F = {}", fac.r_f.format(&v)));
    };
    Ok(format!("match with sign {sign}"))
}

fn c6_factorization_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (mut checked, mut tries) = (0, 0);
    while checked < 100 {
        tries += 1;
        ensure!(tries < 1000, "too many degenerate draws");
        let d = rng.random_range(1..=5);
        let n = rng.random_range(1..=3);
        let g = random_monic_form(&mut rng, d, n);
        let Ok(fac) = resultant_factor(&g) else { continue };
        checked += 1;
        ensure!(fac.p >= d && (fac.p - d) % 2 == 0, "p = {} for d = {d}", fac.p);
        ensure!(!fac.r_f.specialize(0, &rat(0, 1)).is_zero(), "t2 divides R_F");
        ensure!(fac.r_f.is_even_in(0), "R_F not even in t2");
        let sign = if d % 2 == 0 { rat(1, 1) } else { rat(-1, 1) };
        ensure!(fac.full.negate_var(0) == fac.full.scale(&sign), "parity of Res");
    }
    Ok(format!("100 forms ({} skipped)", tries - checked))
}

fn c7_nuij_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=3);
        let f = random_monic_form(&mut rng, d, n);
        let path = nuij_path(&f, None).map_err(|e| e.to_string())?;
        ensure!(path.at(&rat(1, 1)) == f, "N_1(F) != F");
    }
    for d in 1..=4 {
        for n in 1..=3 {
            let a = random_monic_form(&mut rng, d, n);
            let b = random_monic_form(&mut rng, d, n);
            let na = nuij_path(&a, None).unwrap().at(&rat(0, 1));
            let nb = nuij_path(&b, None).unwrap().at(&rat(0, 1));
            ensure!(na == nb, "N_0 depends on F at d = {d}, n = {n}");
        }
    }
    for _ in 0..20 {
        let d = rng.random_range(2..=4);
        let n = rng.random_range(1..=2);
        let f = random_monic_form(&mut rng, d, n);
        let dn = npath_discriminant(&f, None).map_err(|e| e.to_string())?;
        let direct = discriminant(&univariate_view(&f, 0).unwrap()).unwrap();
        ensure!(dn.specialize(0, &rat(1, 1)) == direct, "Delta_N(1, x) != Delta(F)");
    }
    for _ in 0..100 {
        let d = rng.random_range(2..=4);
        let n = rng.random_range(1..=3);
        let f = random_monic_form(&mut rng, d, n);
        let dn = npath_discriminant(&f, None).map_err(|e| e.to_string())?;
        let a: Vec<BigRational> = loop {
            let a: Vec<BigRational> = (0..n)
                .map(|_| rat(rng.random_range(-20..=20), rng.random_range(1..=7)))
                .collect();
            if a.iter().any(|v| !v.is_zero()) {
                break a;
            }
        };
        let mut pt = vec![rat(0, 1)];
        pt.extend(a);
        ensure!(dn.evaluate(&pt).unwrap().is_positive(), "Delta_N(0, a) <= 0");
    }
    Ok("50 + 12 + 20 + 100 cases exact".into())
}

const PRINTED_DN: &str = "29469/4*s^6*x1^6 + 51283/2*s^6*x1^4*x2^2 - 3316*s^6*x1^3*x2^3 \
    + 392497/16*s^6*x1^2*x2^4 - 36*s^6*x1*x2^5 + 12169/2*s^6*x2^6 \
    - 39350*s^5*x1^6 - 143390*s^5*x1^4*x2^2 + 20316*s^5*x1^3*x2^3 - 139200*s^5*x1^2*x2^4 \
    + 108*s^5*x1*x2^5 - 34632*s^5*x2^6 \
    + 89581*s^4*x1^6 + 338905*s^4*x1^4*x2^2 - 51420*s^4*x1^3*x2^3 + 332832*s^4*x1^2*x2^4 \
    - 108*s^4*x1*x2^5 + 82980*s^4*x2^6 \
    - 111308*s^3*x1^6 - 433116*s^3*x1^4*x2^2 + 68980*s^3*x1^3*x2^3 - 429120*s^3*x1^2*x2^4 \
    + 36*s^3*x1*x2^5 - 107136*s^3*x2^6 \
    + 79632*s^2*x1^6 + 315648*s^2*x1^4*x2^2 - 51840*s^2*x1^3*x2^3 + 314640*s^2*x1^2*x2^4 \
    + 78624*s^2*x2^6 - 31104*s*x1^6 - 124416*s*x1^4*x2^2 + 20736*s*x1^3*x2^3 \
    - 124416*s*x1^2*x2^4 - 31104*s*x2^6 + 5184*x1^6 + 20736*x1^4*x2^2 \
    - 3456*x1^3*x2^3 + 20736*x1^2*x2^4 + 5184*x2^6";

fn c8_npath_golden() -> Check {
    let v = strs(&["s", "x1", "x2"]);
    let printed = parse_poly(PRINTED_DN, &v).unwrap();
    let got = npath_discriminant(&nuij_cubic(), Some(4)).map_err(|e| e.to_string())?;
    if got == printed {
        return Ok(format!("full equality, {} terms", got.num_terms()));
    }
    let agree = printed
        .terms()
        .filter(|(m, c)| got.coeff_of(m.exps()) == **c)
        .count();
    ensure!(got.coeff_of(&[6, 6, 0]) == rat(29469, 4), "s^6 x1^6 differs");
    ensure!(got.coeff_of(&[0, 0, 6]) == rat(5184, 1), "x2^6 differs");
    ensure!(agree >= 8, "only {agree} printed terms agree");
    Ok(format!(
        "{agree}/{} printed terms agree, full polynomial differs",
        printed.num_terms()
    ))
}

fn c9_verdict_corpus() -> Check {
    let opts = VerdictOptions {
        samples: 500,
        ..VerdictOptions::default()
    };
    let entries = corpus(20, 42);
    let methods = [Method::Hermite, Method::Intersection, Method::Nuij];
    let rows = run_corpus(&entries, &methods, &opts).map_err(|e| e.to_string())?;
    for row in &rows {
        let st: Vec<&str> = row.verdicts.iter().map(|v| v.status.as_str()).collect();
        ensure!(!row.contradictory(), "{}: contradictory {st:?}", row.name);
        ensure!(row.passed(), "{}: {st:?} against {}", row.name, row.expect.as_str());
        if row.name.starts_with("cone") {
            ensure!(
                row.verdicts.iter().all(|v| v.status == Status::Hyperbolic),
                "{}: {st:?}, all three methods must certify",
                row.name
            );
        }
    }
    let randoms = rows.iter().filter(|r| r.name.starts_with("linear product")).count();
    ensure!(randoms == 20, "{randoms} random products");
    Ok(format!("{} entries x 3 methods, no contradiction", rows.len()))
}

fn c10_rank_signature() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let u = random_rooted_univariate(&mut rng, 6);
        let h = hermite_matrix(&u.poly, 0).map_err(|e| e.to_string())?;
        let (rank, sig) = rank_signature(&h, &[]).map_err(|e| e.to_string())?;
        ensure!(rank == distinct_roots(&u.poly), "rank {rank} vs gcd oracle on {}", u.poly);
        ensure!(rank == u.distinct, "rank {rank} vs {} distinct on {}", u.distinct, u.poly);
        ensure!(sig == u.real as i64, "signature {sig} vs {} real on {}", u.real, u.poly);
    }
    Ok("200/200".into())
}

fn c11_sampler_soundness() -> Check {
    let opts = VerdictOptions {
        samples: 500,
        ..VerdictOptions::default()
    };
    let entries = corpus(20, 42);
    let methods = [Method::Hermite, Method::Intersection, Method::Nuij, Method::Auto];
    let rows = run_corpus(&entries, &methods, &opts).map_err(|e| e.to_string())?;
    let mut refutations = 0;
    for row in &rows {
        for v in row.verdicts.iter().filter(|v| v.status == Status::NotHyperbolic) {
            refutations += 1;
            ensure!(
                v.witness.as_ref().is_some_and(|w| w.exact_confirmation),
                "{}: unconfirmed refutation",
                row.name
            );
        }
    }
    let sopts = SamplerOptions {
        samples: 500,
        seed: 7,
        ..SamplerOptions::default()
    };
    for e in entries.iter().filter(|e| e.expect == Expectation::NotHyperbolic) {
        let g = normalize_at_point(&e.poly, &e.point).unwrap();
        let a = find_witness(&g, &sopts).map_err(|e| e.to_string())?;
        let b = find_witness(&g, &sopts).map_err(|e| e.to_string())?;
        ensure!(a.is_some() && a == b, "{}: nondeterministic witness", e.name);
    }
    let again = run_corpus(&entries[..10], &methods, &opts).map_err(|e| e.to_string())?;
    for (x, y) in rows.iter().zip(&again) {
        for (vx, vy) in x.verdicts.iter().zip(&y.verdicts) {
            ensure!(
                vx.status == vy.status && vx.witness == vy.witness,
                "{}: verdict changed between runs",
                x.name
            );
        }
    }
    Ok(format!("{refutations} refutations confirmed, reruns identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("Hermite form golden", c1_hermite_golden),
        ("printed SOS replay and solver Gram", c2_paper_certificate),
        ("quadratic resultant identity", c3_quadratic_identity),
        ("cubic resultant identity", c4_cubic_identity),
        ("quartic R_F golden", c5_quartic_golden),
        ("factorization invariants", c6_factorization_invariants),
        ("Nuij identities", c7_nuij_identities),
        ("N-path discriminant golden", c8_npath_golden),
        ("verdict corpus", c9_verdict_corpus),
        ("rank/signature oracle", c10_rank_signature),
        ("sampler soundness", c11_sampler_soundness),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of 11 passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
