#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use slhnet::json::{to_canonical_string, SCHEMA};
use slhnet::netdsl::{self, CompiledNetwork};
use slhnet::operator::{c64, max_abs, CMat, HURWITZ_MARGIN};
use slhnet::sim::{convergence_study, parse_time_grid, ConvergenceConfig, DEFAULT_CUTOFF, DEFAULT_KS, DEFAULT_THRESHOLD};
use slhnet::slh::{check_commutativity, check_preconditions, feedback_reduce_triple, Verdict};
use slhnet::Error;

#[derive(Parser)]
#[command(name = "slhnet", version, about = "Feedback reduction and adiabatic elimination for quantum feedback networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Close every feedback loop and write the reduced model.
    Reduce(Common),
    /// Close the loops, then eliminate the oscillators.
    Eliminate(Common),
    /// Compare eliminate-then-feedback with feedback-then-eliminate.
    CheckCommute(Common),
    /// Compare finite-k dynamics with the limit model.
    Converge(ConvergeArgs),
    /// Evaluate the hypotheses only.
    Validate(Common),
    /// Reprint a network in canonical form.
    Print(PrintArgs),
}

#[derive(Args)]
struct Common {
    /// Network description (.slh).
    file: PathBuf,
    /// Agreement tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Scaling parameters, comma separated and increasing.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KS)]
    k: Vec<f64>,
    /// Fock levels per oscillator.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    /// Time grid `start:stop:step`.
    #[arg(long = "t", default_value = "0:5:0.05")]
    t: String,
    /// Largest accepted error at the largest k.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Slow basis state the system starts in.
    #[arg(long, default_value_t = 0)]
    initial: usize,
    /// Also write (k, t, observable, value) rows here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct PrintArgs {
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exit {
    Pass = 0,
    Parse = 1,
    IllPosed = 2,
    Precondition = 3,
    Mismatch = 4,
    Internal = 5,
}

struct Failure {
    code: Exit,
    message: String,
}

impl Failure {
    fn new(code: Exit, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::IllPosed(_) => Exit::IllPosed,
            Error::Precondition(_)
            | Error::Singular { .. }
            | Error::NotWellDefined(_)
            | Error::NotUnitary { .. }
            | Error::NotHermitian { .. } => Exit::Precondition,
            Error::InvalidArgument(_) => Exit::Parse,
            _ => Exit::Internal,
        };
        Failure::new(code, e.to_string())
    }
}

/// A finished run: what to print and how to exit.
struct Outcome {
    report: Value,
    table: String,
    code: Exit,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Exit::Parse as u8),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("slhnet: error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}

fn run(cli: Cli) -> Result<Exit, Failure> {
    let (common, outcome) = match &cli.command {
        Command::Print(args) => return print_cmd(args),
        Command::Reduce(c) => (c, reduce(c)?),
        Command::Eliminate(c) => (c, eliminate(c)?),
        Command::CheckCommute(c) => (c, check_commute(c)?),
        Command::Validate(c) => (c, validate(c)?),
        Command::Converge(args) => (&args.common, converge(args)?),
    };
    let text = match common.format {
        Format::Json => {
            let mut s = to_canonical_string(&outcome.report).map_err(|e| Failure::new(Exit::Internal, e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Table => outcome.table,
    };
    emit(common.out.as_deref(), &text)?;
    Ok(outcome.code)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(Exit::Internal, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(Exit::Parse, format!("{}: {e}", path.display())))
}

fn diagnostics(path: &Path, d: &netdsl::Diagnostics) -> Failure {
    let lines: Vec<String> = d.0.iter().map(|x| format!("{}:{x}", path.display())).collect();
    Failure::new(Exit::Parse, format!("{} diagnostic(s)\n{}", d.0.len(), lines.join("\n")))
}

fn load(c: &Common) -> Result<CompiledNetwork, Failure> {
    if !(c.tol > 0.0) {
        return Err(Failure::new(Exit::Parse, "--tol must be positive"));
    }
    let text = read(&c.file)?;
    let spec = netdsl::parse(&text).map_err(|d| diagnostics(&c.file, &d))?;
    netdsl::compile(&spec).map_err(|d| diagnostics(&c.file, &d))
}

fn header(command: &str, c: &Common) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("file".into(), json!(c.file.display().to_string()));
    m
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, Failure> {
    serde_json::to_value(x).map_err(|e| Failure::new(Exit::Internal, e.to_string()))
}

fn externals(net: &CompiledNetwork) -> Value {
    net.external_names().into_iter().map(|(i, o)| json!({"input": i, "output": o})).collect()
}

fn print_cmd(args: &PrintArgs) -> Result<Exit, Failure> {
    let text = read(&args.file)?;
    let spec = netdsl::parse(&text).map_err(|d| diagnostics(&args.file, &d))?;
    emit(args.out.as_deref(), &netdsl::print(&spec))?;
    Ok(Exit::Pass)
}

fn reduce(c: &Common) -> Result<Outcome, Failure> {
    let net = load(c)?;
    let mut r = header("reduce", c);
    r.insert("externals".into(), externals(&net));
    let table;
    if let Some(t) = &net.triple {
        let red = feedback_reduce_triple(t, &net.wiring)?;
        table = table::triple("reduced triple", &red);
        r.insert("kind".into(), json!("triple"));
        r.insert("triple".into(), to_value(&red)?);
    } else {
        let red = net.open.feedback_reduce(&net.wiring)?;
        table = table::model("reduced model", &red);
        r.insert("kind".into(), json!("oscillator_model"));
        r.insert("strictly_hurwitz".into(), json!(red.is_strictly_hurwitz(HURWITZ_MARGIN)));
        r.insert("a_condition".into(), json!(red.a_condition()));
        r.insert("model".into(), to_value(&red)?);
    }
    Ok(Outcome { report: Value::Object(r), table, code: Exit::Pass })
}

fn eliminate(c: &Common) -> Result<Outcome, Failure> {
    let net = load(c)?;
    let reduced = net.open.feedback_reduce(&net.wiring)?;
    let elim = reduced.eliminate()?;
    let t = &elim.triple;
    let scale = 1.0 + max_abs(t.k()).max(max_abs(t.l()));
    let pass = elim.residuals.unitarity <= c.tol && elim.residuals.damping <= c.tol * scale;
    let mut r = header("eliminate", c);
    r.insert("externals".into(), externals(&net));
    r.insert("oscillators".into(), json!(reduced.oscillators()));
    r.insert("strictly_hurwitz".into(), json!(elim.strictly_hurwitz));
    r.insert("a_condition".into(), json!(elim.a_condition));
    r.insert("residuals".into(), to_value(&elim.residuals)?);
    r.insert("warnings".into(), json!(elim.warnings));
    r.insert("tol".into(), json!(c.tol));
    r.insert("pass".into(), json!(pass));
    r.insert("triple".into(), to_value(t)?);
    let mut table = table::triple("limit triple", t);
    table += &format!(
        "unitarity residual  {:.3e}\ndamping residual    {:.3e}\nstrictly Hurwitz    {}\n",
        elim.residuals.unitarity, elim.residuals.damping, elim.strictly_hurwitz
    );
    table += &table::warnings(&elim.warnings);
    let code = if pass { Exit::Pass } else { Exit::Mismatch };
    Ok(Outcome { report: Value::Object(r), table, code })
}

fn check_commute(c: &Common) -> Result<Outcome, Failure> {
    let net = load(c)?;
    let rep = check_commutativity(&net.components, &net.wiring, c.tol)?;
    let mut r = header("check-commute", c);
    r.insert("externals".into(), externals(&net));
    for (k, v) in to_value(&rep)?.as_object().cloned().unwrap_or_default() {
        r.insert(k, v);
    }
    let code = match rep.verdict {
        Verdict::Agree => Exit::Pass,
        Verdict::Disagree => Exit::Mismatch,
        Verdict::HypothesesNotMet => Exit::Precondition,
    };
    let mut table = table::preconditions(&rep.preconditions);
    if let Some(d) = rep.max_block_diff {
        table += &format!("max |ΔS|  {:.3e}\nmax |ΔL|  {:.3e}\nmax |ΔK|  {:.3e}\n", d.s, d.l, d.k);
    }
    table += &format!("verdict   {:?} (tol {:e})\n", rep.verdict, rep.tol);
    Ok(Outcome { report: Value::Object(r), table, code })
}

fn validate(c: &Common) -> Result<Outcome, Failure> {
    let net = load(c)?;
    let pre = check_preconditions(&net.components, &net.wiring)?;
    let mut r = header("validate", c);
    r.insert("preconditions".into(), to_value(&pre)?);
    r.insert("pass".into(), json!(pre.all_hold()));
    let code = if pre.all_hold() { Exit::Pass } else { Exit::Precondition };
    Ok(Outcome { report: Value::Object(r), table: table::preconditions(&pre), code })
}

/// `|i⟩⟨i|` and the real and imaginary parts of `|i⟩⟨j|`, `i < j`.
fn hermitian_basis(d: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for i in 0..d {
        let mut p = CMat::zeros(d, d);
        p[(i, i)] = c64(1.0, 0.0);
        out.push(p);
        for j in i + 1..d {
            let mut x = CMat::zeros(d, d);
            x[(i, j)] = c64(1.0, 0.0);
            x[(j, i)] = c64(1.0, 0.0);
            out.push(x);
            let mut y = CMat::zeros(d, d);
            y[(i, j)] = c64(0.0, -1.0);
            y[(j, i)] = c64(0.0, 1.0);
            out.push(y);
        }
    }
    out
}

fn converge(args: &ConvergeArgs) -> Result<Outcome, Failure> {
    let c = &args.common;
    let t_grid = parse_time_grid(&args.t).map_err(|e| Failure::new(Exit::Parse, e.to_string()))?;
    let net = load(c)?;
    let d = net.open.dim();
    if args.initial >= d {
        return Err(Failure::new(Exit::Parse, format!("--initial {} but the slow space has dimension {d}", args.initial)));
    }
    let mut initial = CMat::zeros(d, d);
    initial[(args.initial, args.initial)] = c64(1.0, 0.0);
    let cfg = ConvergenceConfig {
        ks: args.k.clone(),
        cutoff: args.cutoff,
        observables: hermitian_basis(d),
        t_grid,
        initial,
        threshold: args.threshold,
    };
    let rep = convergence_study(&net.open, &net.wiring, &cfg)?;
    if let Some(p) = &args.csv {
        fs::write(p, rep.to_csv()).map_err(|e| Failure::new(Exit::Internal, format!("{}: {e}", p.display())))?;
    }
    let mut r = header("converge", c);
    for (k, v) in to_value(&rep)?.as_object().cloned().unwrap_or_default() {
        r.insert(k, v);
    }
    let code = if rep.pass { Exit::Pass } else { Exit::Mismatch };
    Ok(Outcome { report: Value::Object(r), table: rep.to_table(), code })
}
