//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 verification mismatch or audit failure.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::json;

use crate::error::Error;
use crate::fixtures::{self, FIGURE_DEGREES};
use crate::graph::{self, build_cgraph, Method};
use crate::nmatrix::{
    ball_support, n1, nd_oracle, nd_recurrence, reciprocity_check, MatrixSource, NeighborMatrix, DEFAULT_BUDGET,
};
use crate::orbits::{burnside_valency, census_group_order, jordan_census, valency_closed_form, OrderType, TypeTag};

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "btq", version, about = "Quotient graphs of Bruhat-Tits trees over F_p(t)")]
pub struct Cli {
    /// Worker threads (BTQ_THREADS takes precedence).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Neighbor-count matrix N_d on a window.
    Nmatrix(NmatrixArgs),
    /// C-graph (or S-graph) on a window.
    Graph(GraphArgs),
    /// Consistency checks.
    Verify(VerifyArgs),
    /// Classes containing an iterated suborder.
    Ball(BallArgs),
    /// Valency of an order type from the closed form and by Burnside.
    Valency(ValencyArgs),
}

#[derive(Args, Debug)]
pub struct Common {
    #[arg(long)]
    pub p: u32,
    /// Output path; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    pub output: String,
    /// Largest residue field enumerated.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatrixMethod {
    Recurrence,
    Oracle,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct NmatrixArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub deg: u32,
    #[arg(long, default_value_t = 12)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = MatrixMethod::Recurrence)]
    pub method: MatrixMethod,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Json)]
    pub format: MatrixFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphMethod {
    Bruteforce,
    ClosedForm,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub deg: u32,
    #[arg(long, default_value_t = 12)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = GraphMethod::Bruteforce)]
    pub method: GraphMethod,
    #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
    pub format: GraphFormat,
    /// Emit the parity double cover instead.
    #[arg(long)]
    pub sgraph: bool,
    /// Run valency, parity, component and neighbor-count audits.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub reciprocity: bool,
    #[arg(long)]
    pub burnside: bool,
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub fixtures: bool,
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long, default_value_t = 3)]
    pub maxdeg: u32,
    #[arg(long)]
    pub deg1: Option<u32>,
    #[arg(long)]
    pub deg2: Option<u32>,
    #[arg(long, default_value_t = 12)]
    pub window: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Args, Debug)]
pub struct BallArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub start: usize,
    /// Comma-separated `degree:radius` steps, applied in order.
    #[arg(long, default_value = "")]
    pub steps: String,
    /// Class window; defaults to the reach of the schedule.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Args, Debug)]
pub struct ValencyArgs {
    #[arg(long = "type")]
    pub tag: TypeTag,
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub r: u32,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Mismatch(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvariantViolation(_) => Failure::Mismatch(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let threads = std::env::var("BTQ_THREADS").ok().and_then(|v| v.parse().ok()).or(cli.threads);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            EXIT_MISMATCH
        }
        Err(Failure::Io(msg)) => {
            eprintln!("io error: {msg}");
            EXIT_IO
        }
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Nmatrix(a) => cmd_nmatrix(a),
        Command::Graph(a) => cmd_graph(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Ball(a) => cmd_ball(a),
        Command::Valency(a) => cmd_valency(a),
    }
}

/// Writes to stdout, or atomically to `path` via a sibling temp file.
fn emit(path: &str, text: &str) -> CmdResult {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        return out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()));
    }
    let target = PathBuf::from(path);
    let dir = target.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| Failure::Io(format!("{path}: {e}"));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(())
}

fn check_matrix_config(p: u32, d: u32, window: usize) -> CmdResult {
    crate::arith::PrimeField::new(p)?;
    if d == 0 {
        return Err(Error::InvalidDegree(0).into());
    }
    if window < d as usize + 1 {
        return Err(Error::WindowTooSmall { window, needed: d as usize + 1 }.into());
    }
    Ok(())
}

fn check_budget(p: u32, d: u32, budget: u128) -> CmdResult {
    let needed = (p as u128).checked_pow(d).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget }.into());
    }
    Ok(())
}

fn matrix_text(m: &NeighborMatrix<BigInt>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

fn render_matrix(m: &NeighborMatrix<BigInt>, format: MatrixFormat) -> String {
    match format {
        MatrixFormat::Json => serde_json::to_string_pretty(&m.to_json()).expect("serializable") + "\n",
        MatrixFormat::Text => matrix_text(m),
    }
}

fn cmd_nmatrix(a: NmatrixArgs) -> CmdResult {
    let (p, d, w) = (a.common.p, a.deg, a.window);
    check_matrix_config(p, d, w)?;
    if a.method != MatrixMethod::Recurrence {
        check_budget(p, d, a.common.budget)?;
    }
    let text = match a.method {
        MatrixMethod::Recurrence => render_matrix(&nd_recurrence(p, d, w)?, a.format),
        MatrixMethod::Oracle => render_matrix(&nd_oracle(p, d, w, a.common.budget)?, a.format),
        MatrixMethod::Both => {
            let rec = nd_recurrence::<BigInt>(p, d, w)?;
            let ora = nd_oracle::<BigInt>(p, d, w, a.common.budget)?;
            let text = match a.format {
                MatrixFormat::Json => {
                    let v = json!({ "recurrence": rec.to_json(), "oracle": ora.to_json() });
                    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
                }
                MatrixFormat::Text => format!("# recurrence\n{}# oracle\n{}", matrix_text(&rec), matrix_text(&ora)),
            };
            emit(&a.common.output, &text)?;
            if let Some((i, j)) = rec.first_difference(&ora) {
                return Err(Failure::Mismatch(format!(
                    "N_{d}({i}, {j}): recurrence {}, oracle {}",
                    rec.get(i, j),
                    ora.get(i, j)
                )));
            }
            return Ok(());
        }
    };
    emit(&a.common.output, &text)
}

fn cmd_graph(a: GraphArgs) -> CmdResult {
    let (p, d, w) = (a.common.p, a.deg, a.window);
    check_matrix_config(p, d, w)?;
    let method = match a.method {
        GraphMethod::Bruteforce => {
            check_budget(p, d, a.common.budget)?;
            Method::Bruteforce
        }
        GraphMethod::ClosedForm => Method::ClosedForm,
    };
    let g = build_cgraph(p, d, w, method, a.common.budget)?;
    let failures = if a.audit {
        check_budget(p, d, a.common.budget)?;
        graph::audit(&g, a.common.budget)?
    } else {
        Vec::new()
    };
    let shown = if a.sgraph { g.derive_sgraph() } else { g };
    let text = match a.format {
        GraphFormat::Dot => shown.to_dot(),
        GraphFormat::Json => shown.to_json() + "\n",
    };
    emit(&a.common.output, &text)?;
    if !failures.is_empty() {
        return Err(Failure::Mismatch(failures.join("; ")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Warn,
    Fail,
}

struct Report {
    lines: Vec<(Status, String)>,
}

impl Report {
    fn push(&mut self, status: Status, msg: String) {
        self.lines.push((status, msg));
    }

    fn failed(&self) -> Vec<&str> {
        self.lines.iter().filter(|(s, _)| *s == Status::Fail).map(|(_, m)| m.as_str()).collect()
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (s, m) in &self.lines {
            let tag = match s {
                Status::Pass => "PASS",
                Status::Warn => "WARN",
                Status::Fail => "FAIL",
            };
            let _ = writeln!(out, "{tag} {m}");
        }
        out
    }
}

fn verify_reciprocity(a: &VerifyArgs, r: &mut Report) -> CmdResult {
    let pairs: Vec<(u32, u32)> = match (a.deg1, a.deg2) {
        (Some(x), Some(y)) => vec![(x, y)],
        (None, None) => (1..=a.maxdeg).flat_map(|x| (x + 1..=a.maxdeg).map(move |y| (x, y))).collect(),
        _ => return Err(Failure::Config("--deg1 and --deg2 go together".into())),
    };
    for (d1, d2) in pairs {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidDegree(0).into());
        }
        let window = a.window.max((d1 + d2) as usize + 2);
        let needed = (a.p as u128).checked_pow(d1.max(d2)).unwrap_or(u128::MAX);
        let source = if needed <= a.budget { MatrixSource::Oracle } else { MatrixSource::Recurrence };
        let rep = reciprocity_check(a.p, d1, d2, window, source, a.budget)?;
        let name = format!("reciprocity p={} d1={d1} d2={d2} ({source:?}, interior {})", a.p, rep.interior);
        if rep.pass {
            r.push(Status::Pass, name);
        } else {
            r.push(
                Status::Fail,
                format!("{name}: first mismatch {:?}, max discrepancy {}", rep.first_mismatch, rep.max_discrepancy),
            );
        }
    }
    Ok(())
}

fn verify_burnside(r: &mut Report) {
    let mut bad = Vec::new();
    let mut checked = 0;
    for p in [2u32, 3, 5, 7] {
        for n in 1..=6u32 {
            for tag in [TypeTag::I, TypeTag::II, TypeTag::III, TypeTag::IV] {
                let rs: Vec<u32> = match tag {
                    TypeTag::I | TypeTag::IV => vec![0],
                    _ => (1..=n).collect(),
                };
                for rr in rs {
                    let t = OrderType { tag, r: rr };
                    checked += 1;
                    match (valency_closed_form(t, p, n), burnside_valency(t, p, n)) {
                        (Ok(a), Ok(b)) if a == b => {}
                        (a, b) => bad.push(format!("{tag} p={p} N={n} r={rr}: {a:?} vs {b:?}")),
                    }
                }
            }
        }
        let gl2 = BigInt::from((p * p - 1) * (p * p - p));
        if census_group_order(OrderType { tag: TypeTag::I, r: 0 }, p) != gl2 {
            bad.push(format!("type I census at p={p} does not sum to |GL_2|"));
        }
    }
    if bad.is_empty() {
        r.push(Status::Pass, format!("burnside: {checked} (type, p, N, r) cases agree"));
    } else {
        r.push(Status::Fail, format!("burnside: {}", bad.join("; ")));
    }
}

fn verify_oracle(a: &VerifyArgs, r: &mut Report) -> CmdResult {
    for d in 1..=a.maxdeg {
        let window = a.window.max(d as usize + 1);
        if (a.p as u128).checked_pow(d).unwrap_or(u128::MAX) > a.budget {
            r.push(Status::Warn, format!("oracle p={} d={d}: skipped, beyond budget", a.p));
            continue;
        }
        let rec = nd_recurrence::<BigInt>(a.p, d, window)?;
        let ora = nd_oracle::<BigInt>(a.p, d, window, a.budget)?;
        match rec.first_difference(&ora) {
            None => r.push(Status::Pass, format!("oracle p={} d={d} window={window}", a.p)),
            Some((i, j)) => r.push(
                Status::Fail,
                format!("oracle p={} d={d}: entry ({i}, {j}) {} vs {}", a.p, rec.get(i, j), ora.get(i, j)),
            ),
        }
    }
    Ok(())
}

fn verify_fixtures(a: &VerifyArgs, r: &mut Report) -> CmdResult {
    let p = a.p;
    let n = n1::<BigInt>(p, 6)?;
    let pb = BigInt::from(p);
    let n1_ok = *n.get(0, 1) == &pb + 1
        && (1..6).all(|i| *n.get(i, i - 1) == pb && (i + 1 >= 6 || *n.get(i, i + 1) == BigInt::from(1)));
    r.push(if n1_ok { Status::Pass } else { Status::Fail }, format!("fixture N_1 p={p}"));

    let n6 = nd_recurrence::<BigInt>(p, 6, 8)?;
    let want = [
        pb.pow(5) * (&pb - 1),
        pb.pow(3) * (&pb * &pb - 1),
        &pb * (&pb * &pb - 1),
        &pb + 1,
    ];
    let n6_ok = (0..4).all(|k| *n6.get(0, 2 * k) == want[k]) && (0..4).all(|k| n6.get(0, 2 * k + 1) == &BigInt::from(0));
    r.push(if n6_ok { Status::Pass } else { Status::Fail }, format!("fixture N_6 row 0 p={p}"));

    let ball = ball_support(p, 7, &[(4, 1)], 24)?;
    let ball_ok = ball == BTreeSet::from([3, 7, 11]);
    r.push(if ball_ok { Status::Pass } else { Status::Fail }, format!("fixture containment {{3, 7, 11}}: {ball:?}"));

    for d in FIGURE_DEGREES {
        if (p as u128).checked_pow(d).unwrap_or(u128::MAX) > a.budget {
            r.push(Status::Warn, format!("figure d={d} p={p}: skipped, beyond budget"));
            continue;
        }
        let window = a.window.max(2 * d as usize + 2);
        let g = build_cgraph(p, d, window, Method::Bruteforce, a.budget)?;
        let fig = fixtures::figure(d).expect("listed degree");
        let rep = fixtures::compare(&g, &fig);
        let name = format!("figure d={d} p={p} window={window}");
        if rep.structural_pass() {
            r.push(Status::Pass, name.clone());
        } else {
            r.push(Status::Fail, format!("{name}: {}", rep.mismatches.join("; ")));
        }
        for diff in &rep.loop_diffs {
            let note = if diff.within_tolerance() { "within label tolerance" } else { "outside label tolerance" };
            r.push(
                Status::Warn,
                format!("{name}: loop at D_{} has {} orbit ends, figure label {} ({note})", diff.i, diff.computed, diff.label),
            );
        }
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    crate::arith::PrimeField::new(a.p)?;
    let any = a.reciprocity || a.burnside || a.oracle || a.fixtures;
    let all = a.all || !any;
    let mut report = Report { lines: Vec::new() };
    if all || a.reciprocity {
        verify_reciprocity(&a, &mut report)?;
    }
    if all || a.burnside {
        verify_burnside(&mut report);
    }
    if all || a.oracle {
        verify_oracle(&a, &mut report)?;
    }
    if all || a.fixtures {
        verify_fixtures(&a, &mut report)?;
    }
    emit(&a.output, &report.render())?;
    let failed = report.failed();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{} check(s) failed: {}", failed.len(), failed.join(" | "))))
    }
}

/// Parses `"4:1,5:1"` into `[(4, 1), (5, 1)]`.
pub fn parse_steps(s: &str) -> crate::Result<Vec<(u32, usize)>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (d, r) = t.split_once(':').ok_or_else(|| Error::Parse(format!("step {t:?} is not degree:radius")))?;
            let d: u32 = d.trim().parse().map_err(|_| Error::Parse(format!("bad degree in {t:?}")))?;
            let r: usize = r.trim().parse().map_err(|_| Error::Parse(format!("bad radius in {t:?}")))?;
            if d == 0 {
                return Err(Error::InvalidDegree(0));
            }
            Ok((d, r))
        })
        .collect()
}

fn cmd_ball(a: BallArgs) -> CmdResult {
    crate::arith::PrimeField::new(a.p)?;
    let steps = parse_steps(&a.steps)?;
    let reach = a.start + steps.iter().map(|&(d, t)| d as usize * t).sum::<usize>() + 1;
    let window = a.window.unwrap_or(reach);
    if window < reach {
        return Err(Error::WindowTooSmall { window, needed: reach }.into());
    }
    let set = ball_support(a.p, a.start, &steps, window)?;
    let items: Vec<String> = set.iter().map(|c| c.to_string()).collect();
    emit(&a.output, &format!("{{{}}}\n", items.join(", ")))
}

fn cmd_valency(a: ValencyArgs) -> CmdResult {
    let t = OrderType { tag: a.tag, r: a.r };
    crate::arith::PrimeField::new(a.p)?;
    let closed = valency_closed_form(t, a.p, a.n)?;
    let burnside = burnside_valency(t, a.p, a.n)?;
    let census: Vec<String> = jordan_census(t, a.p).iter().map(|c| c.to_string()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "type {} p={} N={} r={}", a.tag, a.p, a.n, a.r);
    let _ = writeln!(out, "valency {closed}");
    let _ = writeln!(out, "burnside {burnside}");
    let _ = writeln!(out, "census {} (order {})", census.join(" "), census_group_order(t, a.p));
    emit("-", &out)?;
    if closed != burnside {
        return Err(Failure::Mismatch(format!("closed form {closed} vs burnside {burnside}")));
    }
    Ok(())
}
