//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 enumeration budget
//! exceeded, 3 verification failed.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounds::{
    bad_configuration_scan, check_binomial_factorization, find_parallelograms, neighbor_bound, parallelogram_bound,
    ScanOptions,
};
use crate::gf::{field_for_order, make_field, prime_power_parts, FieldSpec};
use crate::pointfile::{parse_point, read_points};
use crate::ringgeo::{are_agl_equivalent, element_order, in_b, lines_through, neighbors_of, Direction, RingPoint};
use crate::search::{local_swap_search, random_search, EvalMode, SearchConfig, SearchLedger, SearchStrategy};
use crate::torcode::{
    build_generator, min_distance, weight_distribution, CodeError, EnumOptions, ExponentSet, Strategy, DEFAULT_BUDGET,
};

pub const SCHEMA: u32 = 1;
pub const BUDGET_ENV: &str = "TORGEO_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "torgeo", version, about = "Generalized toric codes and the geometry of (Z/(q-1))^2")]
pub struct Cli {
    /// Emit a single JSON document on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel enumeration.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a finite field's modulus and exp table.
    Field(FieldArgs),
    /// Points, lines and neighbors of the plane over Z/r.
    Geom(GeomArgs),
    /// Test AGL(2, Z/r) equivalence of two point sets.
    Equiv(EquivArgs),
    /// Exact parameters [n, k, d] of C_S(F_q).
    Code(CodeArgs),
    /// Geometric upper bounds on d and bad-configuration flags.
    Bounds(BoundsArgs),
    /// Check factorization identities on the torus.
    Verify(VerifyArgs),
    /// Seeded search for exponent sets with large d.
    Search(SearchArgs),
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[arg(long, conflicts_with_all = ["p", "r"], required_unless_present = "p")]
    q: Option<u32>,
    #[arg(long, requires = "r")]
    p: Option<u32>,
    #[arg(long, requires = "p")]
    r: Option<u32>,
    /// Monic modulus coefficients c0,c1,...,c_r (lowest degree first).
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u32>>,
}

#[derive(Args, Debug)]
struct ModulusArgs {
    /// Ring modulus.
    #[arg(long, conflicts_with = "q", required_unless_present = "q")]
    r: Option<u32>,
    /// Field order; the ring is Z/(q-1).
    #[arg(long)]
    q: Option<u32>,
}

impl ModulusArgs {
    fn modulus(&self) -> Result<u32, Failure> {
        match (self.r, self.q) {
            (Some(r), _) => Ok(r),
            (None, Some(q)) if q >= 3 => Ok(q - 1),
            (None, Some(q)) => Err(Failure::usage(format!("--q {q} gives a ring with fewer than 2 elements"))),
            (None, None) => Err(Failure::usage("one of --r or --q is required")),
        }
    }
}

#[derive(Args, Debug)]
struct GeomArgs {
    #[command(flatten)]
    ring: ModulusArgs,
    #[command(subcommand)]
    query: GeomQuery,
}

#[derive(Subcommand, Debug)]
enum GeomQuery {
    /// All lines through two points.
    Lines {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// All neighbors of a point.
    Neighbors {
        #[arg(long)]
        p: String,
    },
    /// Additive order of a vector and whether it lies in B.
    Order {
        #[arg(long)]
        p: String,
    },
}

#[derive(Args, Debug)]
struct EquivArgs {
    #[command(flatten)]
    ring: ModulusArgs,
    #[arg(long)]
    s1: PathBuf,
    #[arg(long)]
    s2: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Full,
    ScalarClass,
    Parallel,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Full => Strategy::Full,
            StrategyArg::ScalarClass => Strategy::ScalarClass,
            StrategyArg::Parallel => Strategy::Parallel,
        }
    }
}

#[derive(Args, Debug)]
struct CodeArgs {
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Exponent-set file.
    #[arg(long)]
    s: PathBuf,
    #[arg(long, value_enum, default_value = "scalar-class")]
    strategy: StrategyArg,
    /// Include the weight distribution.
    #[arg(long)]
    dist: bool,
    /// Include a minimum-weight message.
    #[arg(long)]
    witness: bool,
    /// Symbol-operation budget (overrides TORGEO_BUDGET).
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    s: PathBuf,
    /// Also flag triples made collinear by the Frobenius map.
    #[arg(long)]
    scan_frobenius: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(subcommand)]
    what: VerifyWhat,
}

#[derive(Subcommand, Debug)]
enum VerifyWhat {
    /// x^a y^b - 1 = Π_{ζ^N = 1} (x^u y^v - ζ) on the torus, with N(q-1) zeros.
    Factexact {
        #[arg(long)]
        q: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        w: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SearchStrategyArg {
    Random,
    Local,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EvalArg {
    Exact,
    BoundFirst,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    iters: u64,
    #[arg(long, value_enum, default_value = "random")]
    strategy: SearchStrategyArg,
    #[arg(long = "eval", value_enum, default_value = "bound-first")]
    eval_mode: EvalArg,
    /// Start set for local search; extra seed population for random search.
    #[arg(long)]
    start: Option<PathBuf>,
    /// JSON Lines ledger, one record per exact evaluation.
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Exactly evaluate pruned candidates and check them against their bound.
    #[arg(long)]
    audit: bool,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }
}

impl From<CodeError> for Failure {
    fn from(e: CodeError) -> Self {
        let code = match e {
            CodeError::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::usage(e.to_string())
            }
        }
    )*};
}

usage_from!(
    crate::gf::GfError,
    crate::ringgeo::GeomError,
    crate::bounds::BoundsError,
    crate::pointfile::PointFileError,
    std::io::Error
);

impl From<crate::search::SearchError> for Failure {
    fn from(e: crate::search::SearchError) -> Self {
        match e {
            crate::search::SearchError::Code(c) => c.into(),
            other => Failure::usage(other.to_string()),
        }
    }
}

struct Ctx<'a> {
    json: bool,
    threads: Option<usize>,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, mut doc: Value) -> Result<(), Failure> {
        if let Value::Object(map) = &mut doc {
            map.insert("schema".into(), json!(SCHEMA));
        }
        writeln!(self.out, "{}", serde_json::to_string(&doc).expect("serializable"))?;
        Ok(())
    }

    fn line(&mut self, text: impl AsRef<str>) -> Result<(), Failure> {
        writeln!(self.out, "{}", text.as_ref())?;
        Ok(())
    }

    fn enumeration(&self, strategy: Strategy, budget: Option<u64>) -> Result<EnumOptions, Failure> {
        let mut opts = EnumOptions::with_strategy(strategy);
        opts.budget = resolve_budget(budget)?;
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(Failure::usage("--threads must be positive"));
            }
            opts.threads = t;
        }
        Ok(opts)
    }
}

fn resolve_budget(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => {
            let v = v.trim().replace('_', "");
            v.parse::<u64>()
                .or_else(|_| v.parse::<f64>().map(|f| f as u64).map_err(|_| ()))
                .map_err(|_| Failure::usage(format!("{BUDGET_ENV}={v} is not a number")))
        }
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn ring_point(text: &str, r: u32) -> Result<RingPoint, Failure> {
    let coords = parse_point(text).map_err(Failure::usage)?;
    Ok(RingPoint::new(&coords, r)?)
}

fn load_set(path: &Path, q: u32, m: usize) -> Result<ExponentSet, Failure> {
    let raw = read_points(path)?;
    Ok(ExponentSet::new(q, m, &raw)?)
}

fn load_ring_points(path: &Path, r: u32) -> Result<Vec<RingPoint>, Failure> {
    read_points(path)?
        .iter()
        .map(|c| RingPoint::new(c, r).map_err(Failure::from))
        .collect()
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut ctx = Ctx {
        json: cli.json,
        threads: cli.threads,
        out,
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "torgeo: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx<'_>) -> Result<i32, Failure> {
    match cmd {
        Command::Field(a) => field(a, ctx),
        Command::Geom(a) => geom(a, ctx),
        Command::Equiv(a) => equiv(a, ctx),
        Command::Code(a) => code(a, ctx),
        Command::Bounds(a) => bounds(a, ctx),
        Command::Verify(a) => verify(a, ctx),
        Command::Search(a) => search(a, ctx),
    }
}

fn field(a: FieldArgs, ctx: &mut Ctx<'_>) -> Result<i32, Failure> {
    let (p, r) = match (a.q, a.p, a.r) {
        (Some(q), _, _) => prime_power_parts(q).ok_or_else(|| Failure::usage(format!("{q} is not a prime power")))?,
        (None, Some(p), Some(r)) => (p, r),
        _ => return Err(Failure::usage("give --q or both --p and --r")),
    };
    let f: FieldSpec = make_field(p, r, a.modulus.as_deref())?;
    let table: Vec<Vec<u32>> = f.exp_table().iter().map(|&x| f.coefficients(f.from_packed(x))).collect();
    if ctx.json {
        return ctx
            .emit(json!({
                "q": f.order(),
                "p": p,
                "r": r,
                "modulus": f.modulus(),
                "exp": table,
            }))
            .map(|_| EXIT_OK);
    }
    ctx.line(format!("q = {} = {}^{}", f.order(), p, r))?;
    ctx.line(format!("modulus: {}", f.modulus_string()))?;
    ctx.line("i\talpha^i (c0,c1,...)")?;
    for (i, c) in table.iter().enumerate() {
        let coeffs: Vec<String> = c.iter().map(u32::to_string).collect();
        ctx.line(format!("{i}\t{}", coeffs.join(",")))?;
    }
    Ok(EXIT_OK)
}

fn geom(a: GeomArgs, ctx: &mut Ctx<'_>) -> Result<i32, Failure> {
    let r = a.ring.modulus()?;
    match a.query {
        GeomQuery::Lines { p, q } => {
            let (p, q) = (ring_point(&p, r)?, ring_point(&q, r)?);
            let lines = lines_through(&p, &q)?;
            if ctx.json {
                let items: Vec<Value> = lines
                    .iter()
                    .map(|l| json!({"base": l.base(), "direction": l.direction(), "points": l.points()}))
                    .collect();
                return ctx.emit(json!({"r": r, "count": lines.len(), "lines": items})).map(|_| EXIT_OK);
            }
            ctx.line(format!("{} lines through {p} and {q} mod {r}", lines.len()))?;
            for l in &lines {
                let pts: Vec<String> = l.points().iter().map(|x| x.to_string()).collect();
                ctx.line(format!("{} + R{}: {}", l.base(), l.direction(), pts.join(" ")))?;
            }
        }
        GeomQuery::Neighbors { p } => {
            let p = ring_point(&p, r)?;
            let nbrs = neighbors_of(&p)?;
            if ctx.json {
                return ctx.emit(json!({"r": r, "point": p, "neighbors": nbrs})).map(|_| EXIT_OK);
            }
            ctx.line(format!("{} neighbors of {p} mod {r}", nbrs.len()))?;
            let pts: Vec<String> = nbrs.iter().map(|x| x.to_string()).collect();
            ctx.line(pts.join(" "))?;
        }
        GeomQuery::Order { p } => {
            let p = ring_point(&p, r)?;
            let order = element_order(&p)?;
            if ctx.json {
                return ctx.emit(json!({"r": r, "point": p, "order": order, "in_b": in_b(&p)})).map(|_| EXIT_OK);
            }
            ctx.line(format!("{p} mod {r}: order {order}, in B: {}", in_b(&p)))?;
        }
    }
    Ok(EXIT_OK)
}

fn equiv(a: EquivArgs, ctx: &mut Ctx<'_>) -> Result<i32, Failure> {
    let r = a.ring.modulus()?;
    let s1 = load_ring_points(&a.s1, r)?;
    let s2 = load_ring_points(&a.s2, r)?;
    let map = are_agl_equivalent(&s1, &s2)?;
    if ctx.json {
        let doc = match &map {
            Some(t) => json!({
                "equivalent": true,
                "matrix": [[t.matrix_entry(0, 0), t.matrix_entry(0, 1)], [t.matrix_entry(1, 0), t.matrix_entry(1, 1)]],
                "translation": t.translation(),
            }),
            None => json!({"equivalent": false}),
        };
        return ctx.emit(doc).map(|_| EXIT_OK);
    }
    match map {
        Some(t) => ctx.line(format!(
            "equivalent: w -> [[{}, {}], [{}, {}]] w + {}",
            t.matrix_entry(0, 0),
            t.matrix_entry(0, 1),
            t.matrix_entry(1, 0),
            t.matrix_entry(1, 1),
            t.translation()
        ))?,
        None => ctx.line("not equivalent")?,
    }
    Ok(EXIT_OK)
}

fn code(a: CodeArgs, ctx: &mut Ctx<'_>) -> Result<i32, Failure> {
    let field = field_for_order(a.q)?;
    let s = load_set(&a.s, a.q, a.m)?;
    let opts = ctx.enumeration(a.strategy.into(), a.budget)?;
    let g = build_generator(&s, &field)?;
    let report = if a.dist {
        weight_distribution(&g, &field, &opts)?
    } else {
        min_distance(&g, &field, &opts)?
    };
    let mut doc = json!({
        "n": report.n,
        "k": report.k,
        "d": report.d,
        "method": report.method,
        "codewords": report.codewords,
        "seconds": report.elapsed.as_secs_f64(),
    });
    if let Some(w) = &report.weight_distribution {
        doc["weights"] = json!(w);
    }
    if a.witness {
        doc["witness"] = json!(report.witness);
    }
    ctx.emit(doc)?;
    Ok(EXIT_OK)
}

fn bounds(a: BoundsArgs, ctx: &mut Ctx<'_>) -> Result<i32, Failure> {
    let s = load_set(&a.s, a.q, 2)?;
    let scan = bad_configuration_scan(
        &s,
        ScanOptions {
            frobenius: a.scan_frobenius,
        },
    )?;
    ctx.emit(json!({
        "q": a.q,
        "n": (a.q as u64 - 1).pow(2),
        "k": s.len(),
        "best_bound": scan.best_bound(),
        "neighbor_bound": neighbor_bound(&s)?,
        "parallelogram_bound": parallelogram_bound(&s)?,
        "reports": scan.reports,
        "parallelograms": find_parallelograms(&s)?,
        "collinear": scan.collinear,
        "frobenius": scan.frobenius,
        "flags": scan.flag_count(),
    }))?;
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs, ctx: &mut Ctx<'_>) -> Result<i32, Failure> {
    match a.what {
        VerifyWhat::Factexact { q, a, b, n, w } => {
            let field = field_for_order(q)?;
            let dir = Direction::new(ring_point(&w, q - 1)?)?;
            let check = check_binomial_factorization(a, b, n, &dir, &field)?;
            let ok = check.holds(field.group_order() as usize);
            if ctx.json {
                ctx.emit(json!({"holds": ok, "check": check}))?;
            } else {
                ctx.line(format!(
                    "x^{a} y^{b} - 1 = prod over zeta^{n} = 1 of (x^u y^v - zeta), (u,v) = {dir}: {}",
                    if ok { "holds" } else { "FAILS" }
                ))?;
                ctx.line(format!("zeros: {} (expected {})", check.zeros, check.expected_zeros))?;
            }
            Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
        }
    }
}

fn search(a: SearchArgs, ctx: &mut Ctx<'_>) -> Result<i32, Failure> {
    let mut cfg = SearchConfig::new(a.q, a.m, a.k, a.seed, a.iters);
    cfg.strategy = match a.strategy {
        SearchStrategyArg::Random => SearchStrategy::Random,
        SearchStrategyArg::Local => SearchStrategy::LocalSwap,
    };
    cfg.eval_mode = match a.eval_mode {
        EvalArg::Exact => EvalMode::Exact,
        EvalArg::BoundFirst => EvalMode::BoundFirst,
    };
    cfg.audit = a.audit;
    cfg.enumeration = ctx.enumeration(Strategy::ScalarClass, a.budget)?;
    let start = a.start.as_ref().map(|p| load_set(p, a.q, a.m)).transpose()?;
    let mut ledger = match &a.ledger {
        Some(path) => SearchLedger::with_writer(Box::new(BufWriter::new(File::create(path)?))),
        None => SearchLedger::new(),
    };
    let outcome = match cfg.strategy {
        SearchStrategy::Random => {
            cfg.initial.extend(start);
            random_search(&cfg, &mut ledger)?
        }
        SearchStrategy::LocalSwap => {
            let start = start.ok_or_else(|| Failure::usage("--strategy local needs --start"))?;
            local_swap_search(&cfg, &start, &mut ledger)?
        }
    };
    if ctx.json {
        ctx.emit(json!({
            "q": a.q,
            "m": a.m,
            "n": outcome.report.n,
            "k": outcome.report.k,
            "d": outcome.report.d,
            "s": outcome.best,
            "seed": a.seed,
            "evaluations": outcome.evaluations,
            "pruned": outcome.pruned,
            "duplicates": outcome.duplicates,
            "audit_violations": outcome.audit_violations,
        }))?;
    } else {
        let pts: Vec<String> = outcome.best.iter().map(|p| p.to_string()).collect();
        ctx.line(format!(
            "[{}, {}, {}] S = {{{}}}",
            outcome.report.n,
            outcome.report.k,
            outcome.report.d,
            pts.join(", ")
        ))?;
        ctx.line(format!(
            "evaluated {}, pruned {}, duplicates {}",
            outcome.evaluations, outcome.pruned, outcome.duplicates
        ))?;
    }
    if a.audit && !outcome.audit_violations.is_empty() {
        return Ok(EXIT_VERIFY);
    }
    Ok(EXIT_OK)
}
