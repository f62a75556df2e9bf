//! The `dmmcodes` command line. [`run`] takes the arguments and two sinks
//! and returns the process exit code, so tests can drive it in-process.
//!
//! Exit codes: 0 ok, 2 usage or parameter error, 3 golden or oracle
//! mismatch, 4 capacity limit, 5 recovery failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::codec::{build_system, matmul, CodecError, CodedProduct, Matrix};
use crate::constructions::{
    better_box_db_prime, d_size, db_size, half_hyperbolic_set, ConstructionError, Solution,
};
use crate::exponents::{hyp2_size, hyp_set, hyp_size, ExponentError, ExponentSet, ExponentVector, DEFAULT_LIMIT};
use crate::field::{Field, FieldError};
use crate::simulator::{run as simulate, ConstructionSpec, DChoice, SimConfig, SimError, WorkerStatus};
use crate::tables::{check, TableId, ALL_TABLES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;
pub const EXIT_RECOVERY: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "dmmcodes", version, about = "Multivariate polynomial and matdot codes over finite fields")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed override for `simulate`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap on enumeration sizes.
    #[arg(long, global = true)]
    limit: Option<u64>,
    /// Write the main output here (the transcript for `simulate`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parameters of one construction.
    Params {
        #[command(subcommand)]
        construction: ConstructionArgs,
    },
    /// Regenerate a parameter table (T1..T8, or `all`) and diff it against
    /// the bundled copy.
    Table { id: String },
    /// List an exponent set.
    Enum {
        #[command(subcommand)]
        set: SetArgs,
    },
    /// Run a simulation from a config file.
    Simulate {
        config: PathBuf,
        /// `key=value` override, repeatable.
        #[arg(long = "set")]
        overrides: Vec<String>,
    },
    /// Run the oracle-equivalence checks.
    Selftest,
}

#[derive(Args, Debug, Clone)]
struct Shape {
    #[arg(long)]
    q: u64,
    /// Number of variables; a single `--m` value is repeated `l` times.
    #[arg(long)]
    l: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
enum ConstructionArgs {
    PolyBox {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
    },
    BetterBox {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long = "F")]
        f: u64,
    },
    SepVars {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        mprime: usize,
        #[arg(long)]
        nprime: usize,
        #[arg(long = "F")]
        f: Option<u64>,
        #[arg(long = "FA")]
        fa: Option<u64>,
        #[arg(long = "FB")]
        fb: Option<u64>,
    },
    MatdotBox {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
    },
    MatdotHalf {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        l: usize,
        #[arg(long = "F")]
        f: u64,
        #[arg(long, value_delimiter = ',', conflicts_with = "best_d")]
        d: Option<Vec<u32>>,
        /// Search all `d` for the largest set instead of using the corner.
        #[arg(long = "best-d")]
        best_d: bool,
    },
}

#[derive(Subcommand, Debug)]
enum SetArgs {
    /// `Hyp_q(F, l)`.
    Hyp {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        l: usize,
        #[arg(long = "F")]
        f: u64,
        #[arg(long)]
        stats: bool,
    },
    /// Half hyperbolic set for `(F, d)`.
    Half {
        #[arg(long)]
        q: u64,
        #[arg(long = "F")]
        f: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<u32>,
        #[arg(long)]
        stats: bool,
    },
    /// Box below `m`.
    Box {
        #[arg(long)]
        q: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long)]
        stats: bool,
    },
    /// Both degree sets of a construction, in the solution text form.
    Solution {
        #[command(subcommand)]
        construction: ConstructionArgs,
    },
}

/// Error carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn is_capacity(e: &(dyn std::error::Error + 'static)) -> bool {
    let mut cur: Option<&(dyn std::error::Error + 'static)> = Some(e);
    while let Some(err) = cur {
        if matches!(err.downcast_ref::<ExponentError>(), Some(ExponentError::Capacity { .. }))
            || matches!(err.downcast_ref::<ConstructionError>(), Some(ConstructionError::Capacity { .. }))
            || matches!(err.downcast_ref::<CodecError>(), Some(CodecError::Capacity { .. }))
            || matches!(err.downcast_ref::<FieldError>(), Some(FieldError::Capacity { .. }))
        {
            return true;
        }
        cur = err.source();
        // transparent wrappers forward `source` to the inner error's source,
        // so also look through the known wrappers directly
        if let Some(ConstructionError::Exponent(inner)) = err.downcast_ref::<ConstructionError>() {
            cur = Some(inner);
        }
    }
    false
}

macro_rules! impl_from_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                let code = if is_capacity(&e) { EXIT_CAPACITY } else { EXIT_USAGE };
                Failure { code, message: e.to_string() }
            }
        }
    )*};
}

impl_from_error!(ExponentError, ConstructionError, CodecError, FieldError);

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match &e {
            SimError::Infeasible { .. } => EXIT_RECOVERY,
            SimError::Construction(c) if is_capacity(c) => EXIT_CAPACITY,
            SimError::Codec(c) if is_capacity(c) => EXIT_CAPACITY,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

struct Ctx<'a> {
    json: bool,
    seed: Option<u64>,
    limit: u64,
    out: Option<PathBuf>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    /// Sends the main output to `--out` if given, else stdout.
    fn emit(&mut self, text: &str) -> std::io::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text),
            None => self.stdout.write_all(text.as_bytes()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<'a, I, T>(args: I, stdout: &'a mut dyn Write, stderr: &'a mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let mut ctx = Ctx {
        json: cli.json,
        seed: cli.seed,
        limit: cli.limit.unwrap_or(DEFAULT_LIMIT),
        out: cli.out,
        stdout,
        stderr,
    };
    let result = match cli.command {
        Command::Params { construction } => cmd_params(&mut ctx, &construction),
        Command::Table { id } => cmd_table(&mut ctx, &id),
        Command::Enum { set } => cmd_enum(&mut ctx, &set),
        Command::Simulate { config, overrides } => cmd_simulate(&mut ctx, &config, &overrides),
        Command::Selftest => cmd_selftest(&mut ctx),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(ctx.stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn expand(v: &[u32], l: Option<usize>, what: &str) -> Result<Vec<u32>, Failure> {
    match l {
        Some(l) if v.len() == 1 => Ok(vec![v[0]; l]),
        Some(l) if v.len() != l => Err(Failure::usage(format!(
            "--{what} has {} entries but --l is {l}",
            v.len()
        ))),
        _ => Ok(v.to_vec()),
    }
}

fn to_spec(args: &ConstructionArgs) -> Result<(u64, ConstructionSpec), Failure> {
    Ok(match args {
        ConstructionArgs::PolyBox { shape, m, n } => (
            shape.q,
            ConstructionSpec::PolyBox {
                m: expand(m, shape.l, "m")?,
                n: expand(n, shape.l, "n")?,
            },
        ),
        ConstructionArgs::BetterBox { shape, m, f } => (
            shape.q,
            ConstructionSpec::BetterBox {
                m: expand(m, shape.l, "m")?,
                f: *f,
            },
        ),
        ConstructionArgs::SepVars { q, mprime, nprime, f, fa, fb } => {
            let fa = fa.or(*f).ok_or_else(|| Failure::usage("sep-vars needs --F or --FA"))?;
            let fb = fb.or(*f).ok_or_else(|| Failure::usage("sep-vars needs --F or --FB"))?;
            (
                *q,
                ConstructionSpec::SepVars {
                    m_prime: *mprime,
                    n_prime: *nprime,
                    fa,
                    fb,
                },
            )
        }
        ConstructionArgs::MatdotBox { shape, m } => (
            shape.q,
            ConstructionSpec::MatdotBox {
                m: expand(m, shape.l, "m")?,
            },
        ),
        ConstructionArgs::MatdotHalf { q, l, f, d, best_d } => {
            let d = match (d, best_d) {
                (_, true) => DChoice::Best,
                (Some(d), _) => DChoice::Explicit(ExponentVector(expand(d, Some(*l), "d")?)),
                (None, false) => DChoice::Corner,
            };
            (*q, ConstructionSpec::MatdotHalf { l: *l, f: *f, d })
        }
    })
}

#[derive(Serialize)]
struct ParamsOut {
    construction: String,
    kind: &'static str,
    q: u64,
    l: usize,
    m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(rename = "FB")]
    fb: u64,
    #[serde(rename = "FB_witness")]
    witness: String,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    design: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<String>,
    #[serde(rename = "k+1")]
    threshold: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<u64>,
    #[serde(rename = "N")]
    workers: u64,
}

fn cmd_params(ctx: &mut Ctx, args: &ConstructionArgs) -> Outcome {
    let (q, spec) = to_spec(args)?;
    Field::of_order(q)?;
    let sol = spec.resolve_limited(q, ctx.limit)?;
    let mut out = ParamsOut {
        construction: spec.to_string(),
        kind: "poly",
        q,
        l: sol.l(),
        m: sol.da().len(),
        n: None,
        fb: sol.fb().value,
        witness: sol.fb().witness.to_string(),
        design: None,
        d: None,
        threshold: sol.recovery_threshold(),
        xi: None,
        workers: q.pow(sol.l() as u32),
    };
    match &sol {
        Solution::Poly(p) => {
            out.n = Some(p.n());
            out.xi = p.xi;
        }
        Solution::Matdot(m) => {
            out.kind = "matdot";
            out.design = m.design;
            out.d = Some(m.d.to_string());
        }
    }
    let text = if ctx.json {
        serde_json::to_string_pretty(&out).expect("plain data") + "\n"
    } else {
        let mut s = format!("construction={}\nq={}\nl={}\nm={}\n", out.construction, q, out.l, out.m);
        if let Some(n) = out.n {
            s.push_str(&format!("n={n}\n"));
        }
        if let Some(d) = &out.d {
            s.push_str(&format!("d={d}\n"));
        }
        if let Some(f) = out.design {
            s.push_str(&format!("F={f}\n"));
        }
        s.push_str(&format!("FB={} at {}\nk+1={}\n", out.fb, out.witness, out.threshold));
        if let Some(xi) = out.xi {
            s.push_str(&format!("xi={xi}\n"));
        }
        s.push_str(&format!("N={}\n", out.workers));
        s
    };
    ctx.emit(&text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TableOut {
    id: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    matches_golden: bool,
    diffs: Vec<String>,
}

fn cmd_table(ctx: &mut Ctx, id: &str) -> Outcome {
    let ids: Vec<TableId> = if id.eq_ignore_ascii_case("all") {
        ALL_TABLES.to_vec()
    } else {
        vec![id.parse().map_err(Failure::usage)?]
    };
    let mut text = String::new();
    let mut json = Vec::new();
    let mut mismatch = false;
    for id in ids {
        let (table, diffs) = check(id)?;
        if !diffs.is_empty() {
            mismatch = true;
            writeln!(ctx.stderr, "{id}: {} cell(s) differ from the bundled copy", diffs.len())?;
            for d in &diffs {
                writeln!(ctx.stderr, "  {d}")?;
            }
        }
        if ctx.json {
            json.push(TableOut {
                id: id.to_string(),
                header: table.header.clone(),
                rows: table.rows.clone(),
                matches_golden: diffs.is_empty(),
                diffs: diffs.iter().map(|d| d.to_string()).collect(),
            });
        } else {
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&table.to_tsv());
        }
    }
    if ctx.json {
        text = serde_json::to_string_pretty(&json).expect("plain data") + "\n";
    }
    ctx.emit(&text)?;
    Ok(if mismatch { EXIT_MISMATCH } else { EXIT_OK })
}

#[derive(Serialize)]
struct SetStats {
    size: usize,
    fb: Option<u64>,
    fb_witness: Option<String>,
    support: Vec<usize>,
    members: Option<Vec<String>>,
}

fn cmd_enum(ctx: &mut Ctx, args: &SetArgs) -> Outcome {
    let (set, stats) = match args {
        SetArgs::Hyp { q, l, f, stats } => (hyp_set(*q, *l, *f, ctx.limit)?, *stats),
        SetArgs::Half { q, f, d, stats } => (half_hyperbolic_set(*q, *f, &ExponentVector(d.clone()))?, *stats),
        SetArgs::Box { q, m, stats } => (ExponentSet::boxed(*q, m)?, *stats),
        SetArgs::Solution { construction } => {
            let (q, spec) = to_spec(construction)?;
            let sol = spec.resolve_limited(q, ctx.limit)?;
            ctx.emit(&sol.to_text())?;
            return Ok(EXIT_OK);
        }
    };
    let fb = set.fb().ok();
    let out = SetStats {
        size: set.len(),
        fb: fb.as_ref().map(|f| f.value),
        fb_witness: fb.as_ref().map(|f| f.witness.to_string()),
        support: set.support().iter().map(|i| i + 1).collect(),
        members: (!stats).then(|| set.iter().map(|v| v.to_string()).collect()),
    };
    let text = if ctx.json {
        serde_json::to_string_pretty(&out).expect("plain data") + "\n"
    } else if stats {
        format!(
            "size={}\nfb={}\nsupport={}\n",
            out.size,
            match (&out.fb, &out.fb_witness) {
                (Some(v), Some(w)) => format!("{v} at {w}"),
                _ => "-".into(),
            },
            out.support.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        )
    } else {
        set.to_text()
    };
    ctx.emit(&text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimOut {
    success: bool,
    workers: usize,
    threshold: usize,
    kappa: usize,
    responses_used: usize,
    deficit: usize,
    stragglers: Vec<usize>,
    decoded_equals_oracle: bool,
    solver_ops: u64,
    apply_ops: u64,
    elements_sent: u64,
    elements_returned: u64,
    sharpness: Option<usize>,
    warnings: Vec<String>,
    error: Option<String>,
}

fn cmd_simulate(ctx: &mut Ctx, path: &Path, overrides: &[String]) -> Outcome {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = SimConfig::parse(&text)?;
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("override {o:?} is not key=value")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    let report = simulate(&cfg)?;
    if ctx.json {
        let out = SimOut {
            success: report.success,
            workers: report.workers,
            threshold: report.threshold,
            kappa: report.kappa,
            responses_used: report.responses_used,
            deficit: report.deficit,
            stragglers: report
                .statuses
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == WorkerStatus::Straggler)
                .map(|(i, _)| i)
                .collect(),
            decoded_equals_oracle: report.decoded_equals_oracle,
            solver_ops: report.stats.solver_ops,
            apply_ops: report.stats.apply_ops,
            elements_sent: report.elements_sent,
            elements_returned: report.elements_returned,
            sharpness: report.sharpness,
            warnings: report.warnings.clone(),
            error: report.error.clone(),
        };
        writeln!(ctx.stdout, "{}", serde_json::to_string_pretty(&out).expect("plain data"))?;
    } else {
        ctx.stdout.write_all(report.summary().as_bytes())?;
    }
    if let Some(out) = &ctx.out {
        std::fs::write(out, report.transcript_text())?;
    }
    Ok(if report.success { EXIT_OK } else { EXIT_RECOVERY })
}

type Check = (&'static str, fn() -> Result<(), String>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_field() -> Result<(), String> {
    for q in [2u64, 3, 4, 5, 8, 9, 16, 25] {
        let f = Field::of_order(q).map_err(|e| e.to_string())?;
        let qq = q as u32;
        for a in 0..qq {
            for b in 0..qq {
                ensure(f.add(f.sub(a, b), b) == a, || format!("GF({q}): a - b + b != a"))?;
                ensure(f.mul(a, b) == f.mul(b, a), || format!("GF({q}): mul not commutative"))?;
                for c in 0..qq {
                    let lhs = f.mul(a, f.add(b, c));
                    let rhs = f.add(f.mul(a, b), f.mul(a, c));
                    ensure(lhs == rhs, || format!("GF({q}): distributivity fails at {a},{b},{c}"))?;
                }
            }
            if a != 0 {
                let inv = f.inv(a).map_err(|e| e.to_string())?;
                ensure(f.mul(a, inv) == 1, || format!("GF({q}): bad inverse of {a}"))?;
            }
        }
    }
    Ok(())
}

fn check_hyp() -> Result<(), String> {
    for q in 2..=6u64 {
        for l in 1..=3usize {
            for f in 0..=q.pow(l as u32) + 1 {
                let n = hyp_set(q, l, f, DEFAULT_LIMIT).map_err(|e| e.to_string())?.len() as u64;
                ensure(n == hyp_size(q, l, f), || format!("hyp q={q} l={l} F={f}"))?;
            }
        }
    }
    for l in 1..=10usize {
        for f in 0..=(1u64 << l) {
            ensure(hyp2_size(l, f) == hyp_size(2, l, f), || format!("hyp2 l={l} F={f}"))?;
        }
    }
    Ok(())
}

fn check_recurrences() -> Result<(), String> {
    for q in 2..=7u64 {
        for l in 1..=2usize {
            let side = q as u32;
            let mut m = vec![1u32; l];
            loop {
                for f in 1..=q.pow(l as u32) {
                    let n = better_box_db_prime(q, &m, f).map_err(|e| e.to_string())?.len() as u64;
                    ensure(n == db_size(q, &m, f), || format!("db_size q={q} m={m:?} F={f}"))?;
                }
                if !next_vec(&mut m, 1, side) {
                    break;
                }
            }
            let half = q.div_ceil(2) as u32;
            let mut d = vec![0u32; l];
            loop {
                for f in 0..=q.pow(l as u32) {
                    let n = half_hyperbolic_set(q, f, &ExponentVector(d.clone()))
                        .map_err(|e| e.to_string())?
                        .len() as u64;
                    ensure(n == d_size(q, f, f, &d), || format!("d_size q={q} d={d:?} F={f}"))?;
                }
                if !next_vec(&mut d, 0, half - 1) {
                    break;
                }
            }
        }
    }
    Ok(())
}

/// Odometer over `[lo, hi]^l`.
fn next_vec(v: &mut [u32], lo: u32, hi: u32) -> bool {
    for x in v.iter_mut().rev() {
        if *x < hi {
            *x += 1;
            return true;
        }
        *x = lo;
    }
    false
}

fn check_tables() -> Result<(), String> {
    for id in ALL_TABLES {
        let (_, diffs) = check(id).map_err(|e| e.to_string())?;
        ensure(diffs.is_empty(), || format!("{id}: {}", diffs[0]))?;
    }
    Ok(())
}

fn check_codec() -> Result<(), String> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let specs = [
        (7u64, "poly-box m=2,2 n=3,3"),
        (7, "better-box m=2,2 F=16"),
        (2, "sep-vars mprime=3 nprime=3 F=2"),
        (7, "matdot-box m=2,3"),
        (8, "matdot-half l=2 F=9"),
    ];
    for (q, spec) in specs {
        let err = |e: &dyn std::fmt::Display| format!("{spec}: {e}");
        let spec_v: ConstructionSpec = spec.parse().map_err(|e| err(&e))?;
        let sol = spec_v.resolve(q).map_err(|e| err(&e))?;
        let field = Field::of_order(q).map_err(|e| err(&e))?;
        let a = Matrix::random(&field, 5, 6, &mut rng);
        let b = Matrix::random(&field, 6, 4, &mut rng);
        let coded = CodedProduct::new(&sol, &a, &b).map_err(|e| err(&e))?;
        let pts = field.enumerate_points(sol.l(), DEFAULT_LIMIT).map_err(|e| err(&e))?;
        let sum = sol.da().minkowski_sum_q(sol.db()).map_err(|e| err(&e))?;
        let sys = build_system(&field, &sum, pts.clone()).map_err(|e| err(&e))?;
        let mut responses: Vec<_> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| coded.payload(i, p).map(|w| w.compute()))
            .collect::<Result<_, _>>()
            .map_err(|e| err(&e))?;
        let oracle = matmul(&a, &b).map_err(|e| err(&e))?;
        let k1 = sol.recovery_threshold() as usize;
        for _ in 0..10 {
            responses.shuffle(&mut rng);
            let (got, _) = coded.decode(&sys, &responses[..k1]).map_err(|e| err(&e))?;
            ensure(got == oracle, || format!("{spec}: decoded product differs"))?;
        }
    }
    Ok(())
}

const CHECKS: [Check; 5] = [
    ("field arithmetic", check_field),
    ("hyperbolic sizes", check_hyp),
    ("size recurrences", check_recurrences),
    ("tables", check_tables),
    ("end-to-end decoding", check_codec),
];

fn cmd_selftest(ctx: &mut Ctx) -> Outcome {
    let mut failed = 0;
    let mut lines = String::new();
    for (name, f) in CHECKS {
        match f() {
            Ok(()) => lines.push_str(&format!("ok   {name}\n")),
            Err(e) => {
                failed += 1;
                lines.push_str(&format!("FAIL {name}: {e}\n"));
            }
        }
    }
    ctx.emit(&lines)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_MISMATCH })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("dmmcodes").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["table", "T9"]).0, EXIT_USAGE);
        assert_eq!(call(&["params", "poly-box", "--q", "6", "--m", "1", "--n", "1"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn capacity() {
        let (code, _, err) = call(&["enum", "hyp", "--q", "2", "--l", "30", "--F", "1"]);
        assert_eq!(code, EXIT_CAPACITY, "{err}");
        let (code, _, _) = call(&["--limit", "10", "enum", "hyp", "--q", "4", "--l", "2", "--F", "1"]);
        assert_eq!(code, EXIT_CAPACITY);
    }
}
