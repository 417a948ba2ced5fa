use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hyperbolicity::certify::Tolerances;
use hyperbolicity::corpus::{corpus, run_corpus, run_method};
use hyperbolicity::intersection::resultant_factor;
use hyperbolicity::nuij::npath_discriminant;
use hyperbolicity::polyring::{format_rational, normalize_at_point, parse_rational};
use hyperbolicity::structmats::{hermite_form, hermite_matrix};
use hyperbolicity::verdict::{Method, VerdictOptions};
use hyperbolicity::{parse_poly, Error, MultiPoly, Point};

mod report;

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "hyperbolicity", version, about = "Test real forms for hyperbolicity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide hyperbolicity at a point (exit 0 hyperbolic, 1 not, 2 unknown).
    Check(CheckArgs),
    /// Print p and R_F of the real/imaginary resultant.
    Resultant(InputArgs),
    /// Print the Hermite matrix and its quadratic form.
    Hermite(InputArgs),
    /// Print the discriminant of the Nuij path.
    Nuij(NuijArgs),
    /// Run the built-in corpus through every method.
    Corpus(CorpusArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Polynomial text, e.g. "x0^2 - x1^2".
    #[arg(long, conflicts_with = "poly_file", required_unless_present = "poly_file")]
    poly: Option<String>,
    /// File holding the polynomial text.
    #[arg(long)]
    poly_file: Option<std::path::PathBuf>,
    /// Comma-separated variable names; inferred when omitted.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// Comma-separated rational coordinates of the point (default 1,0,...,0).
    #[arg(long, value_delimiter = ',')]
    point: Option<Vec<String>>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Sampler directions.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Hermite multiplier exponent k in (sum x_i^2)^k.
    #[arg(long)]
    sos_degree: Option<u32>,
    /// Nullstellensatz degree bound.
    #[arg(long)]
    degree_bound: Option<u32>,
    /// Relative identity tolerance of floating certificates.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, default_value = "auto",
          value_parser = ["hermite", "intersection", "nullsatz", "nuij", "auto"])]
    method: String,
    /// Applications of each Nuij operator (default: the degree).
    #[arg(long)]
    applications: Option<u32>,
}

#[derive(Args)]
struct NuijArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    applications: Option<u32>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Random linear-product members.
    #[arg(long, default_value_t = 20)]
    random: usize,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

/// A parsed polynomial with its variables and point.
struct Input {
    text: String,
    vars: Vec<String>,
    poly: MultiPoly,
    point: Point,
}

impl Input {
    fn to_json(&self) -> Value {
        json!({
            "poly": self.text,
            "vars": self.vars,
            "point": self.point.0.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }
}

/// `x0..xk` when every identifier has that shape, otherwise the sorted
/// distinct identifiers.
fn infer_vars(text: &str) -> Vec<String> {
    let mut idents: Vec<String> = Vec::new();
    let mut cur = String::new();
    for ch in text.chars().chain(std::iter::once(' ')) {
        if ch.is_ascii_alphabetic() || ch == '_' || (!cur.is_empty() && ch.is_ascii_digit()) {
            cur.push(ch);
        } else if !cur.is_empty() {
            let name = std::mem::take(&mut cur);
            if !idents.contains(&name) {
                idents.push(name);
            }
        }
    }
    let indexed: Option<Vec<usize>> = idents
        .iter()
        .map(|v| v.strip_prefix('x').and_then(|k| k.parse().ok()))
        .collect();
    match indexed {
        Some(ix) if !ix.is_empty() => {
            let max = *ix.iter().max().unwrap();
            (0..=max).map(|i| format!("x{i}")).collect()
        }
        _ => {
            idents.sort();
            idents
        }
    }
}

fn read_input(args: &InputArgs) -> Result<Input, String> {
    let text = match (&args.poly, &args.poly_file) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?
            .trim()
            .to_string(),
        (None, None) => return Err("one of --poly or --poly-file is required".into()),
    };
    let vars = args.vars.clone().unwrap_or_else(|| infer_vars(&text));
    if vars.is_empty() {
        return Err("no variables given or found".into());
    }
    let poly = parse_poly(&text, &vars).map_err(|e| {
        format!("parse error: {e}\n  {text}\n  {:>w$}", "^", w = e.position + 1)
    })?;
    let point = match &args.point {
        Some(coords) => Point::new(
            coords
                .iter()
                .map(|c| parse_rational(c).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?,
        ),
        None => Point::unit(vars.len()),
    };
    if point.len() != vars.len() {
        return Err(format!(
            "point has {} coordinates but there are {} variables",
            point.len(),
            vars.len()
        ));
    }
    Ok(Input {
        text,
        vars,
        poly,
        point,
    })
}

fn options(solve: &SolveArgs, vars: &[String]) -> Result<VerdictOptions, String> {
    let mut tols = Tolerances::default();
    if let Some(tol) = solve.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err("--tol must be positive".into());
        }
        tols.id_tol = tol;
        tols.psd_tol = tols.psd_tol.min(tol);
    }
    Ok(VerdictOptions {
        samples: solve.samples,
        seed: solve.seed,
        sos_degree: solve.sos_degree,
        degree_bound: solve.degree_bound,
        tols,
        vars: Some(vars.to_vec()),
        ..VerdictOptions::default()
    })
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

/// Invalid input is a usage error; numerical trouble leaves the question open.
fn failure(err: Error) -> ExitCode {
    match err {
        Error::NumericFailure(_) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        _ => usage(err),
    }
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn check(args: CheckArgs) -> ExitCode {
    let input = match read_input(&args.input) {
        Ok(i) => i,
        Err(e) => return usage(e),
    };
    let mut opts = match options(&args.solve, &input.vars) {
        Ok(o) => o,
        Err(e) => return usage(e),
    };
    opts.nuij_applications = args.applications;
    let method: Method = args.method.parse().expect("clap restricts the method");
    let start = Instant::now();
    let verdict = match run_method(&input.poly, &input.point, method, &opts) {
        Ok(v) => v,
        Err(e) => return failure(e),
    };
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    let rep = report::verdict_report(&input.to_json(), &verdict, &opts, total_ms);
    if args.input.json {
        emit(&rep);
    } else {
        print!("{}", report::verdict_text(&verdict, &opts));
    }
    ExitCode::from(report::exit_code(verdict.status))
}

fn normalized(input: &Input) -> Result<MultiPoly, ExitCode> {
    normalize_at_point(&input.poly, &input.point).map_err(failure)
}

fn resultant(args: InputArgs) -> ExitCode {
    let input = match read_input(&args) {
        Ok(i) => i,
        Err(e) => return usage(e),
    };
    let g = match normalized(&input) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let fac = match resultant_factor(&g) {
        Ok(f) => f,
        Err(e) => return failure(e),
    };
    let mut names = vec!["t2".to_string()];
    names.extend(input.vars[1..].iter().cloned());
    if args.json {
        emit(&json!({
            "input": input.to_json(),
            "p": fac.p,
            "r_f": fac.r_f.format(&names),
            "resultant": fac.full.format(&names),
        }));
    } else {
        println!("p = {}", fac.p);
        println!("R_F = {}", fac.r_f.format(&names));
    }
    ExitCode::SUCCESS
}

fn hermite(args: InputArgs) -> ExitCode {
    let input = match read_input(&args) {
        Ok(i) => i,
        Err(e) => return usage(e),
    };
    let g = match normalized(&input) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let (h, form) = match hermite_matrix(&g, 0).and_then(|h| Ok((h, hermite_form(&g)?))) {
        Ok(r) => r,
        Err(e) => return failure(e),
    };
    // H lives in (x_1..x_n); the form adds u_1..u_d
    let x_names = &input.vars[1..];
    let d = h.dim();
    let mut form_names = x_names.to_vec();
    form_names.extend((1..=d).map(|j| format!("u{j}")));
    let matrix: Vec<Vec<String>> = (0..d)
        .map(|i| (0..d).map(|j| strip_t(h.entry(i, j), x_names)).collect())
        .collect();
    if args.json {
        emit(&json!({
            "input": input.to_json(),
            "matrix": matrix,
            "form": form.format(&form_names),
        }));
    } else {
        println!("H =");
        for row in &matrix {
            println!("  [{}]", row.join(", "));
        }
        println!("form = {}", form.format(&form_names));
    }
    ExitCode::SUCCESS
}

/// Formats an entry of `H`, which carries no `t`.
fn strip_t(p: &MultiPoly, x_names: &[String]) -> String {
    if p.num_vars() == x_names.len() {
        p.format(x_names)
    } else {
        let mut names = vec!["t".to_string()];
        names.extend(x_names.iter().cloned());
        p.format(&names)
    }
}

fn nuij(args: NuijArgs) -> ExitCode {
    let input = match read_input(&args.input) {
        Ok(i) => i,
        Err(e) => return usage(e),
    };
    let g = match normalized(&input) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let disc = match npath_discriminant(&g, args.applications) {
        Ok(d) => d,
        Err(e) => return failure(e),
    };
    let mut names = vec!["s".to_string()];
    names.extend(input.vars[1..].iter().cloned());
    if args.input.json {
        emit(&json!({
            "input": input.to_json(),
            "applications": args.applications,
            "discriminant": disc.format(&names),
            "terms": disc.num_terms(),
        }));
    } else {
        println!("{}", disc.format(&names));
    }
    ExitCode::SUCCESS
}

fn run_corpus_cmd(args: CorpusArgs) -> ExitCode {
    let entries = corpus(args.random, args.seed);
    let opts = VerdictOptions {
        samples: args.samples,
        seed: args.seed,
        ..VerdictOptions::default()
    };
    let methods = [Method::Hermite, Method::Intersection, Method::Nuij];
    let start = Instant::now();
    let rows = match run_corpus(&entries, &methods, &opts) {
        Ok(r) => r,
        Err(e) => return failure(e),
    };
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    let passed = rows.iter().all(|r| r.passed());
    if args.json {
        let entries_json: Vec<Value> = rows
            .iter()
            .zip(&entries)
            .map(|(row, e)| {
                let input = json!({
                    "poly": e.poly.format(&e.vars),
                    "vars": e.vars,
                    "point": e.point.0.iter().map(format_rational).collect::<Vec<_>>(),
                });
                json!({
                    "name": row.name,
                    "expect": row.expect.as_str(),
                    "passed": row.passed(),
                    "reports": row
                        .verdicts
                        .iter()
                        .map(|v| report::verdict_report(&input, v, &opts, f64::NAN))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        emit(&json!({
            "seed": args.seed,
            "passed": passed,
            "timings_ms": {"total": hyperbolicity::certify::float_json(total_ms)},
            "entries": entries_json,
        }));
    } else {
        print!("{}", report::corpus_table(&rows, &methods));
        println!(
            "{} of {} entries passed in {:.1} s (seed {})",
            rows.iter().filter(|r| r.passed()).count(),
            rows.len(),
            total_ms / 1e3,
            args.seed
        );
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Check(a) => check(a),
        Command::Resultant(a) => resultant(a),
        Command::Hermite(a) => hermite(a),
        Command::Nuij(a) => nuij(a),
        Command::Corpus(a) => run_corpus_cmd(a),
    }
}
