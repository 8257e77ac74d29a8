//! Command-line front end. Every subcommand reads one matrix file (CSV or
//! JSON), runs the shared computation and prints text or JSON.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::bench::{http, RegistryConfig, SessionRegistry};
use crate::compute::{compute, eig_report, ComputeArgs, ComputeOp};
use crate::echelon::PivotStrategy;
use crate::eigen::charpoly_cost_demo;
use crate::error::Error;
use crate::factor::LuPivoting;
use crate::matrix::{AnyMatrix, Matrix};
use crate::scalar::Domain;

#[derive(Debug, Parser)]
#[command(name = "matrixfirst", version, about = "Matrix-first linear algebra with step traces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Matrix file: CSV rows, or JSON {"rows","cols","data"}.
    #[arg(long = "in", global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Read entries as floats. Without it only integers and p/q are accepted.
    #[arg(long, global = true)]
    pub float: bool,
    #[arg(long, global = true, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Relative pivot threshold for floats.
    #[arg(long, global = true, env = "MATRIXFIRST_TOL")]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also print the recorded row operations.
    #[arg(long, global = true)]
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    FirstNonzero,
    Partial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PivotingArg {
    None,
    FirstNonzero,
    Partial,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Row echelon form with pivots and free columns.
    Ref,
    /// Reduced row echelon form.
    Rref,
    /// Solve A x = b.
    Solve {
        /// Right-hand side, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Inverse by Gauss-Jordan.
    Inv,
    /// Do the columns form a basis of a space of dimension `dim`?
    BasisCheck {
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Matrix of A in the basis given by the columns of another matrix.
    ChangeBasis {
        #[arg(long, value_name = "PATH")]
        basis: PathBuf,
    },
    /// LR factorization P A = L R.
    Lu {
        #[arg(long, value_enum)]
        pivoting: Option<PivotingArg>,
    },
    /// Determinant via LR, checked against the permutation sum for n <= 6.
    Det,
    /// Householder QR.
    Qr,
    /// Orthogonality loss of classical Gram-Schmidt against Householder QR.
    GsCompare {
        /// Use the n x n Hilbert matrix instead of --in.
        #[arg(long)]
        hilbert: Option<usize>,
    },
    /// Least-squares solution of A x = b.
    Lstsq {
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Minimal polynomial by Krylov iteration.
    Minpoly,
    /// Eigenvalues by Francis QR, certified against the minimal polynomial.
    Eig {
        #[arg(long)]
        max_sweeps: Option<usize>,
    },
    /// Krylov iterates of b until the first dependency.
    Krylov {
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Term count and time of the n!-term determinant expansion.
    CharpolyCost {
        #[arg(long)]
        n: usize,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, default_value_t = 24.0)]
        ttl_hours: f64,
        /// Append-only session log; existing sessions in it are restored.
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
    },
}

/// Parses `argv` and runs the command. Returns the exit code: 0 on success,
/// 1 when the mathematics says no, 2 when the input could not be used.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let code = if e.is_usage() { 2 } else { 1 };
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn domain(g: &GlobalOpts) -> Domain {
    if g.float {
        Domain::Float
    } else {
        Domain::Rational
    }
}

fn read_matrix(path: &Option<PathBuf>, g: &GlobalOpts) -> Result<AnyMatrix, Failure> {
    let path = path.as_ref().ok_or_else(|| Failure::Usage("--in <PATH> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(AnyMatrix::parse(&text, domain(g))?)
}

fn vector_arg(text: &str) -> Value {
    Value::Array(text.split(',').map(|t| Value::String(t.trim().to_string())).collect())
}

fn compute_args(g: &GlobalOpts) -> Result<ComputeArgs, Failure> {
    if let Some(t) = g.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    Ok(ComputeArgs {
        domain: Some(domain(g)),
        strategy: g.strategy.map(|s| match s {
            StrategyArg::FirstNonzero => PivotStrategy::FirstNonzero,
            StrategyArg::Partial => PivotStrategy::PartialPivot,
        }),
        tol: g.tol,
        trace: g.trace,
        ..ComputeArgs::default()
    })
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let g = &cli.global;
    let mut args = compute_args(g)?;
    let op = match &cli.command {
        Command::Ref => ComputeOp::Ref,
        Command::Rref => ComputeOp::Rref,
        Command::Solve { b } => {
            args.b = Some(vector_arg(b));
            ComputeOp::Solve
        }
        Command::Inv => ComputeOp::Inv,
        Command::BasisCheck { dim } => {
            args.dim = *dim;
            ComputeOp::BasisCheck
        }
        Command::ChangeBasis { basis } => {
            let u = read_matrix(&Some(basis.clone()), g)?;
            args.basis = Some(u.to_json());
            ComputeOp::ChangeBasis
        }
        Command::Lu { pivoting } => {
            args.pivoting = pivoting.map(|p| match p {
                PivotingArg::None => LuPivoting::None,
                PivotingArg::FirstNonzero => LuPivoting::FirstNonzero,
                PivotingArg::Partial => LuPivoting::Partial,
            });
            ComputeOp::Lu
        }
        Command::Det => ComputeOp::Det,
        Command::Qr => ComputeOp::Qr,
        Command::GsCompare { hilbert } => {
            let m = match (hilbert, &g.input) {
                (Some(n), _) => AnyMatrix::Float(Matrix::hilbert(*n)),
                (None, Some(_)) => read_matrix(&g.input, g)?,
                (None, None) => AnyMatrix::Float(Matrix::hilbert(10)),
            };
            let v = compute(ComputeOp::GsCompare, &m, &args)?;
            return emit(out, g, ComputeOp::GsCompare, &v);
        }
        Command::Lstsq { b } => {
            args.b = Some(vector_arg(b));
            ComputeOp::Lstsq
        }
        Command::Minpoly => ComputeOp::Minpoly,
        Command::Eig { max_sweeps } => {
            let m = read_matrix(&g.input, g)?;
            let report = eig_report(&m, *max_sweeps)?;
            let v = serde_json::to_value(&report).expect("serializable");
            return emit(out, g, ComputeOp::Eig, &v);
        }
        Command::Krylov { b } => {
            args.b = Some(vector_arg(b));
            ComputeOp::Krylov
        }
        Command::CharpolyCost { n } => {
            let cost = charpoly_cost_demo(*n, g.seed)?;
            if g.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&cost).expect("serializable")).ok();
            } else {
                writeln!(out, "n = {}: {} signed products, {:?}", cost.n, cost.permutation_terms, cost.wallclock).ok();
            }
            return Ok(0);
        }
        Command::Serve { addr, ttl_hours, log } => return serve(*addr, *ttl_hours, log.clone(), out),
    };
    let m = read_matrix(&g.input, g)?;
    let v = compute(op, &m, &args)?;
    emit(out, g, op, &v)
}

fn serve(addr: SocketAddr, ttl_hours: f64, log: Option<PathBuf>, out: &mut dyn Write) -> Result<i32, Failure> {
    if !(ttl_hours > 0.0 && ttl_hours.is_finite()) {
        return Err(Failure::Usage(format!("--ttl-hours must be positive, got {ttl_hours}")));
    }
    let config = RegistryConfig { idle_ttl: Duration::from_secs_f64(ttl_hours * 3600.0), log_path: log.clone() };
    let registry = match log {
        Some(_) => SessionRegistry::recover(config)?,
        None => SessionRegistry::new(config)?,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(out, "listening on http://{addr}").ok();
    out.flush().ok();
    runtime
        .block_on(http::serve(addr, Arc::new(registry)))
        .map_err(|e| Failure::Usage(format!("serve: {e}")))?;
    Ok(0)
}

/// Prints the result; an inconsistent system is a failed request, exit 1.
fn emit(out: &mut dyn Write, g: &GlobalOpts, op: ComputeOp, v: &Value) -> Result<i32, Failure> {
    let code = match (op, v.get("kind").and_then(Value::as_str)) {
        (ComputeOp::Solve, Some("Inconsistent")) => 1,
        _ => 0,
    };
    if g.json {
        writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable")).ok();
    } else {
        let mut text = String::new();
        render(&mut text, op, v);
        write!(out, "{text}").ok();
    }
    Ok(code)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn is_matrix(v: &Value) -> bool {
    v.get("rows").is_some() && v.get("cols").is_some() && v.get("data").is_some()
}

fn grid(rows: &[Value]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.as_array().map(|r| r.iter().map(scalar_text).collect()).unwrap_or_default())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut s = String::new();
    for row in cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        s.push_str(&format!("  [ {} ]\n", line.join("  ")));
    }
    s
}

fn render(s: &mut String, op: ComputeOp, v: &Value) {
    if op == ComputeOp::Eig {
        render_eig(s, v);
        return;
    }
    if op == ComputeOp::Solve {
        match v["kind"].as_str() {
            Some("Unique") => s.push_str("unique solution\n"),
            Some("Parametric") => s.push_str("infinitely many solutions\n"),
            _ => s.push_str(&format!("inconsistent: row {} reads 0 = nonzero\n", v["witness_row"])),
        }
    }
    let Some(obj) = v.as_object() else {
        s.push_str(&format!("{}\n", scalar_text(v)));
        return;
    };
    for (key, val) in obj {
        if key == "kind" {
            continue;
        }
        if key == "trace" {
            render_trace(s, val);
        } else if is_matrix(val) {
            s.push_str(&format!("{key}:\n{}", grid(val["data"].as_array().map(Vec::as_slice).unwrap_or(&[]))));
        } else if let Some(items) = val.as_array() {
            let parts: Vec<String> = items.iter().map(compact).collect();
            s.push_str(&format!("{key}: [{}]\n", parts.join(", ")));
        } else {
            s.push_str(&format!("{key}: {}\n", scalar_text(val)));
        }
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::Array(items) => format!("({})", items.iter().map(compact).collect::<Vec<_>>().join(", ")),
        Value::Object(_) => v.to_string(),
        other => scalar_text(other),
    }
}

fn render_trace(s: &mut String, trace: &Value) {
    let steps = trace["steps"].as_array().cloned().unwrap_or_default();
    s.push_str(&format!("trace: {} steps\n", steps.len()));
    for (k, step) in steps.iter().enumerate() {
        s.push_str(&format!("step {}: {} ({})\n", k + 1, describe_op(&step["op"]), scalar_text(&step["annotation"])));
        s.push_str(&grid(step["after"].as_array().map(Vec::as_slice).unwrap_or(&[])));
    }
}

fn describe_op(op: &Value) -> String {
    match op["kind"].as_str() {
        Some("Swap") => format!("R{} <-> R{}", op["i"], op["j"]),
        Some("Scale") => format!("R{0} <- ({1}) R{0}", op["i"], scalar_text(&op["factor"])),
        Some("AddMultiple") => {
            format!("R{0} <- R{0} + ({1}) R{2}", op["dst"], scalar_text(&op["factor"]), op["src"])
        }
        _ => op.to_string(),
    }
}

fn render_eig(s: &mut String, v: &Value) {
    if let Some(p) = v["minpoly"].as_str() {
        s.push_str(&format!("minimal polynomial: {p}\n"));
    }
    s.push_str("eigenvalue                      mult  residual   minpoly residual\n");
    let empty = Vec::new();
    let vals = v["eigenvalues"].as_array().unwrap_or(&empty);
    for (k, e) in vals.iter().enumerate() {
        let re = e["re"].as_f64().unwrap_or(f64::NAN);
        let im = e["im"].as_f64().unwrap_or(f64::NAN);
        let z = if im == 0.0 { format!("{re:.12}") } else { format!("{re:.12} {:+.12}i", im) };
        let mp = v["minpoly_residuals"].get(k).and_then(Value::as_f64).map(|x| format!("{x:.2e}")).unwrap_or("-".into());
        let mult = e["mult"].to_string();
        let res = v["residuals"][k].as_f64().map(|x| format!("{x:.2e}")).unwrap_or("-".into());
        s.push_str(&format!("{z:<32}{mult:<6}{res:<11}{mp}\n"));
    }
    s.push_str(&format!("QR sweeps: {}\n", v["iterations"]));
}

/// Entry point for the binary.
pub fn main_exit_code() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("matrixfirst").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    #[test]
    fn ref_json_on_identity() {
        let dir = tempfile::tempdir().unwrap();
        let a = file(&dir, "a.csv", "1,0\n0,1\n");
        let (code, out, _) = run_cli(&["ref", "--in", &a, "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pivots"], json!([[0, 0], [1, 1]]));
    }

    #[test]
    fn singular_inverse_exits_one() {
        let dir = tempfile::tempdir().unwrap();
        let a = file(&dir, "s.csv", "1,2\n2,4\n");
        let (code, _, err) = run_cli(&["inv", "--in", &a]);
        assert_eq!(code, 1);
        assert!(err.contains("rank 1") && err.contains("[1]"), "{err}");
    }

    #[test]
    fn usage_errors_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let a = file(&dir, "f.csv", "0.5,1\n");
        assert_eq!(run_cli(&["ref", "--in", &a]).0, 2);
        assert_eq!(run_cli(&["ref", "--in", &a, "--float"]).0, 0);
        assert_eq!(run_cli(&["ref"]).0, 2);
        assert_eq!(run_cli(&["frobnicate"]).0, 2);
        assert_eq!(run_cli(&["ref", "--in", "/nonexistent/x.csv"]).0, 2);
        assert_eq!(run_cli(&["ref", "--in", &a, "--float", "--tol", "0"]).0, 2);
    }

    #[test]
    fn inconsistent_solve_exits_one() {
        let dir = tempfile::tempdir().unwrap();
        let a = file(&dir, "a.csv", "1,2\n2,4\n");
        let (code, out, _) = run_cli(&["solve", "--in", &a, "--b", "1,1"]);
        assert_eq!(code, 1);
        assert!(out.contains("inconsistent"));
        assert_eq!(run_cli(&["solve", "--in", &a, "--b", "1,2"]).0, 0);
    }

    #[test]
    fn eig_text_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let a = file(&dir, "sym.csv", "2,1\n1,2\n");
        let (code, out, _) = run_cli(&["eig", "--in", &a, "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["minpoly"], "x^2 - 4x + 3");
        assert!((v["eigenvalues"][0]["re"].as_f64().unwrap() - 3.0).abs() < 1e-12);
        let (code, out, _) = run_cli(&["eig", "--in", &a]);
        assert_eq!(code, 0);
        assert!(out.contains("x^2 - 4x + 3"));
    }

    #[test]
    fn trace_flag_prints_steps() {
        let dir = tempfile::tempdir().unwrap();
        let a = file(&dir, "a.csv", "0,1\n1,0\n");
        let (_, out, _) = run_cli(&["ref", "--in", &a, "--trace"]);
        assert!(out.contains("trace: 1 steps") && out.contains("R0 <-> R1"), "{out}");
    }

    #[test]
    fn charpoly_cost_guard() {
        let (code, out, _) = run_cli(&["charpoly-cost", "--n", "5", "--json"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"permutation_terms\": 120"));
        assert_eq!(run_cli(&["charpoly-cost", "--n", "9"]).0, 1);
    }
}
