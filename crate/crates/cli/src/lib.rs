//! Command-line front end for `qmaxent`.
//!
//! [`run`] parses the arguments, computes the full output in memory and only
//! then writes it, so a failing invocation never leaves partial output.

#![forbid(unsafe_code)]

mod args;
mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;
use qmaxent::bell::BellLabel;
use qmaxent::entangle::{criterion_verdict, scan_region};
use qmaxent::inference::{infer_state, to_density_matrix, validate_constraints, ConstraintSet};
use qmaxent::measures::{mutual_entropy, mutual_entropy_closed_form, DivergenceOrder};
use qmaxent::oracle::{compare_states, maxent_general_oracle, maxent_split_oracle};
use qmaxent::thermo::{entropy_of_state, free_energy, legendre_report};
use qmaxent::Error;
use serde_json::Value;

use args::{Cli, Command, Data, OracleChoice, Output};
use render::{num, object, opt_num};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Golden-section tolerance used by `verify --oracle split`.
pub const SPLIT_TOL: f64 = 1e-10;
/// Largest spectrum difference accepted from the split oracle.
pub const SPLIT_PASS_TOL: f64 = 1e-7;
/// Largest entropy excess over the closed form accepted from the general oracle.
pub const GENERAL_PASS_TOL: f64 = 1e-6;

const FALSIFIER_NOTE: &str = "the general oracle is a local search from one random start; \
passing means it did not find a higher-entropy state, not that the closed form is proven optimal";

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument { .. } => EXIT_USAGE,
            Error::QOutOfDomain { .. }
            | Error::BOutOfRange { .. }
            | Error::SigmaOutOfRange { .. }
            | Error::UncertaintyViolated { .. }
            | Error::BoundaryDivergence { .. }
            | Error::StencilOutOfDomain { .. }
            | Error::SingularReference { .. }
            | Error::SupportMismatch { .. }
            | Error::ShannonLimit { .. }
            | Error::EmptyGrid => EXIT_DOMAIN,
            Error::BudgetExhausted { .. } => EXIT_VERIFY,
            _ => EXIT_IO,
        };
        Failure::new(code, e.to_string())
    }
}

/// Rendered output and its destination.
struct Rendered {
    body: String,
    out: Option<std::path::PathBuf>,
    code: i32,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output and diagnostic streams.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    match write!(stdout, "{}", e.render()) {
                        Ok(()) => EXIT_OK,
                        Err(_) => EXIT_IO,
                    }
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => diagnose(
                    stderr,
                    EXIT_USAGE,
                    "a subcommand is required: infer, scan, mutual, thermo or verify (see --help)",
                ),
                _ => {
                    let rendered = e.render().to_string();
                    let line = rendered
                        .lines()
                        .take_while(|l| !l.starts_with("Usage:"))
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with("For more information"))
                        .collect::<Vec<_>>()
                        .join(" ");
                    diagnose(stderr, EXIT_USAGE, line.trim_start_matches("error: "))
                }
            };
        }
    };

    match dispatch(cli.command) {
        Ok(r) => match emit(&r, stdout) {
            Ok(()) => r.code,
            Err(f) => diagnose(stderr, f.code, &f.message),
        },
        Err(f) => diagnose(stderr, f.code, &f.message),
    }
}

fn diagnose(stderr: &mut dyn Write, code: i32, message: &str) -> i32 {
    let line = message.replace('\n', " ");
    let _ = writeln!(stderr, "qmaxent: error: {line}");
    code
}

fn emit(r: &Rendered, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &r.out {
        Some(path) => write_file(path, r.body.as_bytes()),
        None => stdout
            .write_all(r.body.as_bytes())
            .and_then(|()| stdout.flush())
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write to standard output: {e}"))),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn dispatch(cmd: Command) -> Result<Rendered, Failure> {
    match cmd {
        Command::Infer(a) => {
            let v = infer_report(&constraints(&a.data)?)?;
            Ok(structured(&v, &a.output, EXIT_OK))
        }
        Command::Scan(a) => scan(a),
        Command::Mutual(a) => {
            let c = constraints(&a.data)?;
            let order = DivergenceOrder::or_q(a.qprime, c.q())?;
            let s = infer_state(&c);
            let k = mutual_entropy(&to_density_matrix(&s), order)?;
            let v = object([
                ("b_q", num(c.b_q())),
                ("closed_form", num(mutual_entropy_closed_form(&s, order))),
                ("mutual_entropy", num(k.value)),
                ("q", num(c.q())),
                ("qprime", num(order.value())),
                ("sigma2_q", num(c.sigma2_q())),
            ]);
            Ok(structured(&v, &a.output, EXIT_OK))
        }
        Command::Thermo(a) => {
            let c = constraints(&a.data)?;
            let report = legendre_report(&c, a.fd_step)?;
            let v = render::round_floats(serde_json::to_value(report).expect("report serializes"));
            Ok(structured(&v, &a.output, EXIT_OK))
        }
        Command::Verify(a) => {
            let c = constraints(&a.data)?;
            let (v, passed) = match a.oracle {
                OracleChoice::Split => verify_split(&c)?,
                OracleChoice::General => verify_general(&c, a.seed, a.budget)?,
            };
            let code = if passed { EXIT_OK } else { EXIT_VERIFY };
            Ok(structured(&v, &a.output, code))
        }
    }
}

fn constraints(d: &Data) -> Result<ConstraintSet, Failure> {
    Ok(validate_constraints(d.q, d.b, d.sigma2)?)
}

fn structured(v: &Value, o: &Output, code: i32) -> Rendered {
    Rendered {
        body: if o.json { render::json(v) } else { render::text(v) },
        out: o.out.clone(),
        code,
    }
}

fn infer_report(c: &ConstraintSet) -> Result<Value, Failure> {
    let s = infer_state(c);
    let thermo = match free_energy(&s) {
        Ok(t) => Some(t),
        Err(Error::BoundaryDivergence { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let eigenvalues = Value::Object(
        BellLabel::ALL
            .iter()
            .map(|&l| (l.name().to_string(), num(s.eigenvalue(l))))
            .collect(),
    );
    let w = s.weights;
    Ok(object([
        ("F_q", opt_num(thermo.map(|t| t.f_q))),
        ("S_q", num(entropy_of_state(&s))),
        ("Z_q", num(s.z_q)),
        ("b_q", num(c.b_q())),
        ("c_q", num(s.c_q)),
        ("eigenvalues", eigenvalues),
        ("entangled", Value::Bool(criterion_verdict(&s).entangled)),
        ("lambda_1", opt_num(thermo.map(|t| t.multipliers.lambda_1))),
        ("lambda_2", opt_num(thermo.map(|t| t.multipliers.lambda_2))),
        ("lambda_max", num(s.lambda_max())),
        ("q", num(c.q())),
        ("sigma2_q", num(c.sigma2_q())),
        (
            "weights",
            object([
                ("w_minus", num(w.w_minus)),
                ("w_plus", num(w.w_plus)),
                ("w_zero", num(w.w_zero)),
            ]),
        ),
    ]))
}

fn scan(a: args::ScanArgs) -> Result<Rendered, Failure> {
    if a.grid < 2 {
        return Err(Failure::new(
            EXIT_USAGE,
            format!("--grid must be at least 2, got {}", a.grid),
        ));
    }
    if a.threads == Some(0) {
        return Err(Failure::new(EXIT_USAGE, "--threads must be at least 1"));
    }
    if !(a.q.is_finite() && a.q > 0.0) {
        return Err(Error::QOutOfDomain { q: a.q }.into());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = a.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot start worker pool: {e}")))?;
    let grid = pool.install(|| scan_region(a.q, a.grid))?;
    Ok(Rendered {
        body: grid.to_csv(),
        out: a.out,
        code: EXIT_OK,
    })
}

fn spectrum(e: [f64; 4]) -> Value {
    Value::Array(e.iter().map(|&x| num(x)).collect())
}

fn verify_split(c: &ConstraintSet) -> Result<(Value, bool), Failure> {
    let s = infer_state(c);
    let r = maxent_split_oracle(c, SPLIT_TOL)?;
    let diff = compare_states(&s, &r);
    let passed = diff < SPLIT_PASS_TOL;
    let v = object([
        ("achieved_entropy", num(r.achieved_entropy)),
        ("closed_form_eigenvalues", spectrum(sorted_desc(s.eigenvalues()))),
        ("closed_form_entropy", num(entropy_of_state(&s))),
        ("constraint_residual", num(r.constraint_residual)),
        ("iterations", Value::from(r.iterations)),
        ("max_eigenvalue_difference", num(diff)),
        ("oracle", Value::from("split")),
        ("oracle_eigenvalues", spectrum(r.eigenvalues)),
        ("passed", Value::Bool(passed)),
        ("split_weight", opt_num(r.split)),
        ("tolerance", num(SPLIT_PASS_TOL)),
    ]);
    Ok((v, passed))
}

fn verify_general(c: &ConstraintSet, seed: u64, budget: usize) -> Result<(Value, bool), Failure> {
    let s = infer_state(c);
    if !s.is_interior() {
        return Err(Failure::new(
            EXIT_DOMAIN,
            format!(
                "the general oracle needs an interior point, but b_q = {}, sigma2_q = {} lies on the boundary of the data domain",
                c.b_q(),
                c.sigma2_q()
            ),
        ));
    }
    let closed = entropy_of_state(&s);
    let r = maxent_general_oracle(c, seed, budget)?;
    let excess = r.achieved_entropy - closed;
    let passed = excess <= GENERAL_PASS_TOL;
    let v = object([
        ("achieved_entropy", num(r.achieved_entropy)),
        ("budget", Value::from(budget)),
        ("closed_form_entropy", num(closed)),
        ("constraint_residual", num(r.constraint_residual)),
        ("evaluations", Value::from(r.evaluations)),
        ("excess_entropy", num(excess)),
        ("iterations", Value::from(r.iterations)),
        ("limitation", Value::from(FALSIFIER_NOTE)),
        ("max_eigenvalue_difference", num(compare_states(&s, &r))),
        ("oracle", Value::from("general")),
        ("oracle_eigenvalues", spectrum(r.eigenvalues)),
        ("passed", Value::Bool(passed)),
        ("seed", Value::from(seed)),
        ("tolerance", num(GENERAL_PASS_TOL)),
    ]);
    Ok((v, passed))
}

fn sorted_desc(mut e: [f64; 4]) -> [f64; 4] {
    e.sort_by(|a, b| b.total_cmp(a));
    e
}
