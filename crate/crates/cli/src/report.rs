//! Report assembly: the JSON schema shape and the plain-text summaries.

use std::fmt::Write;

use serde_json::{json, Value};

use hyperbolicity::certify::float_json;
use hyperbolicity::corpus::CorpusRow;
use hyperbolicity::polyring::format_rational;
use hyperbolicity::verdict::{Method, Status, Verdict, VerdictOptions};

pub fn exit_code(status: Status) -> u8 {
    match status {
        Status::Hyperbolic => 0,
        Status::NotHyperbolic => 1,
        Status::Unknown => 2,
    }
}

/// `{input, method, verdict, certificate?, witness?, diagnostics}` with
/// `timings_ms`, `seed` and `parameters` always present.
pub fn verdict_report(input: &Value, v: &Verdict, opts: &VerdictOptions, total_ms: f64) -> Value {
    let mut out = v.to_json();
    out["input"] = input.clone();
    let diag = out["diagnostics"]
        .as_object_mut()
        .expect("diagnostics is an object");
    let timings = diag.entry("timings_ms").or_insert_with(|| json!({}));
    if total_ms.is_finite() {
        timings["total"] = float_json(total_ms);
    }
    diag.insert("seed".into(), json!(opts.seed));
    diag.insert(
        "parameters".into(),
        json!({
            "samples": opts.samples,
            "sos_degree": opts.sos_degree,
            "degree_bound": opts.degree_bound,
            "tol": float_json(opts.tols.id_tol),
            "psd_tol": float_json(opts.tols.psd_tol),
            "nuij_applications": opts.nuij_applications,
        }),
    );
    out
}

pub fn verdict_text(v: &Verdict, opts: &VerdictOptions) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {}", v.status);
    let _ = writeln!(s, "method: {}", v.method);
    if let Some(c) = &v.certificate {
        let _ = writeln!(
            s,
            "certificate: residual {:.3e}, {}",
            c.residual(),
            if c.is_exact() {
                "exact rational identity"
            } else {
                "floating point"
            }
        );
    }
    if let Some(w) = &v.witness {
        let dir = v
            .witness_original
            .as_ref()
            .unwrap_or(&w.direction_rational);
        let dir: Vec<String> = dir.iter().map(format_rational).collect();
        let _ = writeln!(s, "witness direction: ({})", dir.join(", "));
        let _ = writeln!(
            s,
            "non-real root: {:.6} {} {:.6}i (confirmed exactly: {})",
            w.root.re,
            if w.root.im < 0.0 { '-' } else { '+' },
            w.root.im.abs(),
            w.exact_confirmation
        );
    }
    if let Some(r) = &v.reason {
        let _ = writeln!(s, "reason: {r}");
    }
    let _ = writeln!(s, "seed: {}", opts.seed);
    s
}

pub fn corpus_table(rows: &[CorpusRow], methods: &[Method]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut s = String::new();
    let _ = write!(s, "{:width$}  {:15}", "name", "expect");
    for m in methods {
        let _ = write!(s, "  {:15}", m.as_str());
    }
    let _ = writeln!(s, "  result");
    for r in rows {
        let _ = write!(s, "{:width$}  {:15}", r.name, r.expect.as_str());
        for v in &r.verdicts {
            let _ = write!(s, "  {:15}", v.status.as_str());
        }
        let _ = writeln!(s, "  {}", if r.passed() { "PASS" } else { "FAIL" });
    }
    s
}
