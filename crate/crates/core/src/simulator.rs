//! Deterministic master/worker simulation of a coded product.
//!
//! Randomness comes from a single `ChaCha8Rng` seeded with
//! `seed_from_u64(seed)`. Draws happen in a fixed order: the entries of `A`
//! (row-major), then those of `B`, then the straggler model's draws. Time is
//! counted in integer ticks; the master takes completions ordered by
//! `(tick, worker index)` and stops at the `(k+1)`-th.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{build_system, matmul, transcript_line, CodecError, CodedProduct, DecodeStats, InterpolationSystem, Matrix, WorkerResponse};
use crate::constructions::{
    better_box, box_matdot, box_poly, corner_d, half_hyperbolic, search_best_d, sep_vars_limited, ConstructionError, Solution,
};
use crate::exponents::{total, ExponentVector, DEFAULT_LIMIT};
use crate::field::{Field, FieldError, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible plan: {workers} workers but the recovery threshold is {threshold}")]
    Infeasible { workers: u64, threshold: u64 },
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

type Result<T> = std::result::Result<T, SimError>;

/// Which `d` a half hyperbolic construction uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DChoice {
    Corner,
    Best,
    Explicit(ExponentVector),
}

/// A construction with its parameters, resolved against a field order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstructionSpec {
    PolyBox { m: Vec<u32>, n: Vec<u32> },
    BetterBox { m: Vec<u32>, f: u64 },
    SepVars { m_prime: usize, n_prime: usize, fa: u64, fb: u64 },
    MatdotBox { m: Vec<u32> },
    MatdotHalf { l: usize, f: u64, d: DChoice },
}

fn parse_list(s: &str) -> std::result::Result<Vec<u32>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| format!("bad list {s:?}")))
        .collect()
}

fn join(v: &[u32]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ConstructionSpec {
    pub fn resolve(&self, q: u64) -> std::result::Result<Solution, ConstructionError> {
        self.resolve_limited(q, DEFAULT_LIMIT)
    }

    /// As [`resolve`](Self::resolve), with a cap on enumeration sizes.
    pub fn resolve_limited(&self, q: u64, limit: u64) -> std::result::Result<Solution, ConstructionError> {
        Ok(match self {
            ConstructionSpec::PolyBox { m, n } => Solution::Poly(box_poly(q, m, n)?),
            ConstructionSpec::BetterBox { m, f } => Solution::Poly(better_box(q, m, *f)?),
            ConstructionSpec::SepVars { m_prime, n_prime, fa, fb } => {
                Solution::Poly(sep_vars_limited(q, *m_prime, *n_prime, *fa, *fb, limit)?)
            }
            ConstructionSpec::MatdotBox { m } => Solution::Matdot(box_matdot(q, m)?),
            ConstructionSpec::MatdotHalf { l, f, d } => {
                let d = match d {
                    DChoice::Corner => corner_d(q, *l),
                    DChoice::Best => search_best_d(q, *l, *f, limit)?.0,
                    DChoice::Explicit(d) => d.clone(),
                };
                Solution::Matdot(half_hyperbolic(q, *f, &d)?)
            }
        })
    }
}

impl fmt::Display for ConstructionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionSpec::PolyBox { m, n } => write!(f, "poly-box m={} n={}", join(m), join(n)),
            ConstructionSpec::BetterBox { m, f: ff } => write!(f, "better-box m={} F={ff}", join(m)),
            ConstructionSpec::SepVars { m_prime, n_prime, fa, fb } => {
                write!(f, "sep-vars mprime={m_prime} nprime={n_prime} FA={fa} FB={fb}")
            }
            ConstructionSpec::MatdotBox { m } => write!(f, "matdot-box m={}", join(m)),
            ConstructionSpec::MatdotHalf { l, f: ff, d } => {
                let d = match d {
                    DChoice::Corner => "corner".to_string(),
                    DChoice::Best => "best".to_string(),
                    DChoice::Explicit(d) => join(&d.0),
                };
                write!(f, "matdot-half l={l} F={ff} d={d}")
            }
        }
    }
}

impl std::str::FromStr for ConstructionSpec {
    type Err = SimError;

    /// `poly-box m=2,2 n=6,6`, `better-box m=2,2 F=64`,
    /// `sep-vars mprime=5 nprime=5 F=8` (or `FA=`/`FB=`), `matdot-box m=3,3`,
    /// `matdot-half l=3 F=57 [d=corner|best|3,3,3]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| SimError::Config(m);
        let mut words = s.split_whitespace();
        let kind = words.next().ok_or_else(|| bad("empty construction".into()))?;
        let mut kv = std::collections::HashMap::new();
        for w in words {
            let (k, v) = w.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {w:?}")))?;
            kv.insert(k, v);
        }
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| bad(format!("{kind} needs {k}=")));
        let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(format!("bad {k}="))) };
        let list = |k: &str| -> Result<Vec<u32>> { parse_list(get(k)?).map_err(bad) };
        Ok(match kind {
            "poly-box" => ConstructionSpec::PolyBox { m: list("m")?, n: list("n")? },
            "better-box" => ConstructionSpec::BetterBox { m: list("m")?, f: num("F")? },
            "sep-vars" => {
                let both = num("F").ok();
                let fa = num("FA").ok().or(both).ok_or_else(|| bad("sep-vars needs F= or FA=".into()))?;
                let fb = num("FB").ok().or(both).ok_or_else(|| bad("sep-vars needs F= or FB=".into()))?;
                ConstructionSpec::SepVars {
                    m_prime: num("mprime")? as usize,
                    n_prime: num("nprime")? as usize,
                    fa,
                    fb,
                }
            }
            "matdot-box" => ConstructionSpec::MatdotBox { m: list("m")? },
            "matdot-half" => {
                let d = match kv.get("d").copied() {
                    None | Some("corner") => DChoice::Corner,
                    Some("best") => DChoice::Best,
                    Some(v) => DChoice::Explicit(ExponentVector(parse_list(v).map_err(bad)?)),
                };
                ConstructionSpec::MatdotHalf {
                    l: num("l")? as usize,
                    f: num("F")?,
                    d,
                }
            }
            other => return Err(bad(format!("unknown construction {other:?}"))),
        })
    }
}

/// Which workers fail to answer, and when the others do.
#[derive(Clone, Debug, PartialEq)]
pub enum StragglerModel {
    None,
    /// These worker indices never respond.
    Adversarial(BTreeSet<usize>),
    /// This many workers, chosen uniformly from the seed, never respond.
    AdversarialCount(usize),
    /// Each worker independently fails with this probability.
    RandomDrop(f64),
    /// Completion tick is geometric with this success probability per tick,
    /// capped at [`LATENCY_CAP`].
    Latency(f64),
}

pub const LATENCY_CAP: u64 = 10_000;

impl StragglerModel {
    pub fn kind(&self) -> &'static str {
        match self {
            StragglerModel::None => "none",
            StragglerModel::Adversarial(_) | StragglerModel::AdversarialCount(_) => "adversarial",
            StragglerModel::RandomDrop(_) => "random",
            StragglerModel::Latency(_) => "latency",
        }
    }

    pub fn param(&self) -> String {
        match self {
            StragglerModel::None => String::new(),
            StragglerModel::Adversarial(s) => s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            StragglerModel::AdversarialCount(c) => format!("count:{c}"),
            StragglerModel::RandomDrop(p) | StragglerModel::Latency(p) => p.to_string(),
        }
    }

    pub fn parse(kind: &str, param: &str) -> Result<Self> {
        let bad = || SimError::Config(format!("bad straggler param {param:?} for kind {kind}"));
        let prob = || -> Result<f64> {
            let p: f64 = param.trim().parse().map_err(|_| bad())?;
            if (0.0..=1.0).contains(&p) {
                Ok(p)
            } else {
                Err(bad())
            }
        };
        match kind.trim() {
            "none" => Ok(StragglerModel::None),
            "adversarial" => {
                let param = param.trim();
                if let Some(c) = param.strip_prefix("count:") {
                    return Ok(StragglerModel::AdversarialCount(c.parse().map_err(|_| bad())?));
                }
                if param.is_empty() {
                    return Ok(StragglerModel::Adversarial(BTreeSet::new()));
                }
                param
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()
                    .map(StragglerModel::Adversarial)
            }
            "random" => Ok(StragglerModel::RandomDrop(prob()?)),
            "latency" => {
                let p = prob()?;
                if p == 0.0 {
                    return Err(bad());
                }
                Ok(StragglerModel::Latency(p))
            }
            other => Err(SimError::Config(format!("unknown straggler kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub field: Field,
    pub construction: ConstructionSpec,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    /// Worker count; `None` means all `q^l` points.
    pub workers: Option<u64>,
    pub straggler: StragglerModel,
    pub seed: u64,
    /// Random orderings tried by the sharpness probe; 0 disables it.
    pub trials: usize,
}

pub const CONFIG_KEYS: [&str; 10] = [
    "field",
    "construction",
    "r",
    "s",
    "t",
    "N",
    "straggler.kind",
    "straggler.param",
    "seed",
    "trials",
];

impl SimConfig {
    pub fn new(field: Field, construction: ConstructionSpec) -> Self {
        SimConfig {
            field,
            construction,
            r: 4,
            s: 4,
            t: 4,
            workers: None,
            straggler: StragglerModel::None,
            seed: 0,
            trials: 0,
        }
    }

    /// Flat `key = value` lines; `#` starts a comment. `field` and
    /// `construction` are required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SimError::Config(format!("line {}: expected key = value", no + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let find = |k: &str| pairs.iter().rev().find(|p| p.0 == k).map(|p| p.1.clone());
        let field: Field = find("field")
            .ok_or_else(|| SimError::Config("missing field".into()))?
            .parse()?;
        let construction = find("construction")
            .ok_or_else(|| SimError::Config("missing construction".into()))?
            .parse()?;
        let mut cfg = SimConfig::new(field, construction);
        let mut kind = None;
        let mut param = String::new();
        for (k, v) in &pairs {
            match k.as_str() {
                "field" | "construction" => {}
                "straggler.kind" => kind = Some(v.clone()),
                "straggler.param" => param = v.clone(),
                _ => cfg.set(k, v)?,
            }
        }
        if let Some(kind) = kind {
            cfg.straggler = StragglerModel::parse(&kind, &param)?;
        }
        Ok(cfg)
    }

    /// Applies one override. `straggler.kind` resets the model with an empty
    /// parameter; set `straggler.param` afterwards.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<u64> {
            v.trim()
                .parse()
                .map_err(|_| SimError::Config(format!("bad value {v:?} for {key}")))
        };
        match key {
            "field" => self.field = value.parse()?,
            "construction" => self.construction = value.parse()?,
            "r" => self.r = num(value)? as usize,
            "s" => self.s = num(value)? as usize,
            "t" => self.t = num(value)? as usize,
            "N" => self.workers = Some(num(value)?),
            "seed" => self.seed = num(value)?,
            "trials" => self.trials = num(value)? as usize,
            "straggler.kind" => self.straggler = StragglerModel::parse(value, "")
                .or_else(|_| StragglerModel::parse(value, "0.5"))?,
            "straggler.param" => self.straggler = StragglerModel::parse(self.straggler.kind(), value)?,
            other => return Err(SimError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "field = {}\nconstruction = {}\nr = {}\ns = {}\nt = {}\n",
            self.field, self.construction, self.r, self.s, self.t
        );
        if let Some(n) = self.workers {
            s.push_str(&format!("N = {n}\n"));
        }
        s.push_str(&format!("straggler.kind = {}\n", self.straggler.kind()));
        let p = self.straggler.param();
        if !p.is_empty() {
            s.push_str(&format!("straggler.param = {p}\n"));
        }
        s.push_str(&format!("seed = {}\ntrials = {}\n", self.seed, self.trials));
        s
    }
}

/// Everything fixed before any worker runs.
#[derive(Clone, Debug)]
pub struct Plan {
    pub solution: Solution,
    pub warnings: Vec<String>,
    pub workers: usize,
    /// `k + 1`.
    pub threshold: usize,
    pub kappa: usize,
    pub system: InterpolationSystem,
    pub a: Matrix,
    pub b: Matrix,
    pub coded: CodedProduct,
}

impl Plan {
    pub fn points(&self) -> &[Point] {
        self.system.points()
    }

    /// Field elements sent to one worker.
    pub fn payload_size(&self) -> usize {
        let (ar, ac) = self.coded.pa.dims();
        let (br, bc) = self.coded.pb.dims();
        ar * ac + br * bc
    }

    pub fn response(&self, i: usize) -> WorkerResponse {
        self.coded
            .payload(i, &self.points()[i])
            .expect("points match the solution's dimension")
            .compute()
    }
}

/// Resolves the construction and the first `N` points, builds the
/// interpolation system and the operands. Consumes the `A`, `B` draws of
/// `rng`.
pub fn plan_with(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Result<Plan> {
    let q = cfg.field.order();
    let mut solution = cfg.construction.resolve(q)?;
    let mut warnings = Vec::new();
    if let Solution::Matdot(m) = &solution {
        if let Some(p) = m.project() {
            warnings.push(format!(
                "d = {} is zero in coordinates {:?}; dropped them (l = {} -> {})",
                m.d,
                m.removable_coordinates().iter().map(|i| i + 1).collect::<Vec<_>>(),
                m.l,
                p.l
            ));
            solution = Solution::Matdot(p);
        }
    }
    let l = solution.l();
    let max = total(q, l);
    let workers = cfg.workers.unwrap_or(max);
    if workers > max {
        return Err(SimError::Config(format!("N = {workers} exceeds q^l = {max}")));
    }
    let threshold = solution.recovery_threshold();
    if workers < threshold {
        return Err(SimError::Infeasible { workers, threshold });
    }
    if cfg.r == 0 || cfg.s == 0 || cfg.t == 0 {
        return Err(SimError::Config("matrix dimensions must be positive".into()));
    }
    let points: Vec<Point> = (0..workers).map(|i| cfg.field.point(i, l)).collect();
    let sum = solution.da().minkowski_sum_q(solution.db()).map_err(CodecError::from)?;
    let system = build_system(&cfg.field, &sum, points)?;
    let a = Matrix::random(&cfg.field, cfg.r, cfg.s, rng);
    let b = Matrix::random(&cfg.field, cfg.s, cfg.t, rng);
    let coded = CodedProduct::new(&solution, &a, &b)?;
    Ok(Plan {
        kappa: system.kappa(),
        solution,
        warnings,
        workers: workers as usize,
        threshold: threshold as usize,
        system,
        a,
        b,
        coded,
    })
}

pub fn plan(cfg: &SimConfig) -> Result<Plan> {
    plan_with(cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkerStatus {
    /// Answered at this tick and was used.
    Used(u64),
    /// Answered at this tick, after the master stopped listening.
    Late(u64),
    Straggler,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseTimes {
    pub plan: Duration,
    pub workers: Duration,
    pub decode: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub success: bool,
    pub workers: usize,
    pub threshold: usize,
    pub kappa: usize,
    pub responses_used: usize,
    /// Responses missing to reach the threshold, on failure.
    pub deficit: usize,
    pub statuses: Vec<WorkerStatus>,
    pub decoded_equals_oracle: bool,
    pub stats: DecodeStats,
    /// Field elements sent to workers plus those returned by used workers.
    pub elements_sent: u64,
    pub elements_returned: u64,
    /// Fewest responses that reached rank `κ` over the probe's orderings.
    pub sharpness: Option<usize>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    /// One line per used response, in arrival order.
    pub transcript: Vec<String>,
    pub times: PhaseTimes,
}

impl SimReport {
    /// Human-readable summary; excludes wall time so it is reproducible.
    pub fn summary(&self) -> String {
        let stragglers = self.statuses.iter().filter(|s| **s == WorkerStatus::Straggler).count();
        let late = self.statuses.iter().filter(|s| matches!(s, WorkerStatus::Late(_))).count();
        let mut s = format!(
            "success: {}\nworkers: {}\nrecovery threshold: {}\nkappa: {}\nresponses used: {}\nstragglers: {}\nlate: {}\ndecoded equals oracle: {}\nsolver ops: {}\napply ops: {}\nelements sent: {}\nelements returned: {}\n",
            self.success,
            self.workers,
            self.threshold,
            self.kappa,
            self.responses_used,
            stragglers,
            late,
            self.decoded_equals_oracle,
            self.stats.solver_ops,
            self.stats.apply_ops,
            self.elements_sent,
            self.elements_returned,
        );
        if !self.success {
            s.push_str(&format!("deficit: {}\n", self.deficit));
        }
        if let Some(m) = self.sharpness {
            s.push_str(&format!("fewest responses reaching full rank: {m}\n"));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("error: {e}\n"));
        }
        s
    }

    pub fn transcript_text(&self) -> String {
        let mut s = self.transcript.join("\n");
        s.push('\n');
        s
    }
}

fn completion_ticks(model: &StragglerModel, n: usize, rng: &mut ChaCha8Rng) -> Vec<Option<u64>> {
    match model {
        StragglerModel::None => vec![Some(0); n],
        StragglerModel::Adversarial(set) => (0..n).map(|i| (!set.contains(&i)).then_some(0)).collect(),
        StragglerModel::AdversarialCount(c) => {
            let mut ticks = vec![Some(0); n];
            for i in index::sample(rng, n, (*c).min(n)) {
                ticks[i] = None;
            }
            ticks
        }
        StragglerModel::RandomDrop(p) => (0..n).map(|_| (!rng.gen_bool(*p)).then_some(0)).collect(),
        StragglerModel::Latency(p) => (0..n)
            .map(|_| {
                let mut t = 0;
                while t < LATENCY_CAP && !rng.gen_bool(*p) {
                    t += 1;
                }
                Some(t)
            })
            .collect(),
    }
}

/// Runs a planned simulation. Never fails: problems end up in the report.
pub fn execute(plan: &Plan, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> SimReport {
    let n = plan.workers;
    let ticks = completion_ticks(&cfg.straggler, n, rng);
    let mut arrivals: Vec<(u64, usize)> = ticks
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (t, i)))
        .collect();
    arrivals.sort_unstable();
    let used = arrivals.len().min(plan.threshold);
    let mut statuses = vec![WorkerStatus::Straggler; n];
    for (pos, &(t, i)) in arrivals.iter().enumerate() {
        statuses[i] = if pos < used {
            WorkerStatus::Used(t)
        } else {
            WorkerStatus::Late(t)
        };
    }

    let start = Instant::now();
    let responses: Vec<WorkerResponse> = arrivals[..used].iter().map(|&(_, i)| plan.response(i)).collect();
    let worker_time = start.elapsed();
    let transcript = responses
        .iter()
        .map(|r| transcript_line(&plan.points()[r.index], r))
        .collect();
    let product_size = responses.first().map_or(0, |r| r.product.entries().len() as u64);

    let start = Instant::now();
    let mut report = SimReport {
        success: false,
        workers: n,
        threshold: plan.threshold,
        kappa: plan.kappa,
        responses_used: used,
        deficit: plan.threshold - used,
        statuses,
        decoded_equals_oracle: false,
        stats: DecodeStats::default(),
        elements_sent: (plan.payload_size() * n) as u64,
        elements_returned: product_size * used as u64,
        sharpness: None,
        warnings: plan.warnings.clone(),
        error: None,
        transcript,
        times: PhaseTimes::default(),
    };
    if used < plan.threshold {
        report.error = Some(format!(
            "only {used} of {n} workers responded; {} needed",
            plan.threshold
        ));
    } else {
        match plan.coded.decode(&plan.system, &responses) {
            Ok((c, stats)) => {
                report.stats = stats;
                report.decoded_equals_oracle = matmul(&plan.a, &plan.b).is_ok_and(|o| o == c);
                report.success = report.decoded_equals_oracle;
                if !report.success {
                    report.error = Some("decoded product differs from the oracle".into());
                }
            }
            Err(e) => report.error = Some(e.to_string()),
        }
    }
    report.times.workers = worker_time;
    report.times.decode = start.elapsed();

    if cfg.trials > 0 {
        let mut order: Vec<usize> = (0..n).collect();
        let mut best: Option<usize> = None;
        for _ in 0..cfg.trials {
            order.shuffle(rng);
            if let Some(k) = plan.system.needed(order.iter().copied()) {
                best = Some(best.map_or(k, |b| b.min(k)));
            }
        }
        report.sharpness = best;
    }
    report
}

/// Plans and runs one simulation from `(cfg, cfg.seed)`.
pub fn run(cfg: &SimConfig) -> Result<SimReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = Instant::now();
    let plan = plan_with(cfg, &mut rng)?;
    let plan_time = start.elapsed();
    let mut report = execute(&plan, cfg, &mut rng);
    report.times.plan = plan_time;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    pub overrides: Vec<(String, String)>,
    pub seed: u64,
    pub outcome: std::result::Result<CellSummary, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSummary {
    pub success: bool,
    pub threshold: usize,
    pub kappa: usize,
    pub responses_used: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    /// Fraction of cells that ran and succeeded; `None` for an empty grid.
    pub fn success_rate(&self) -> Option<f64> {
        if self.cells.is_empty() {
            return None;
        }
        let ok = self
            .cells
            .iter()
            .filter(|c| c.outcome.as_ref().is_ok_and(|s| s.success))
            .count();
        Some(ok as f64 / self.cells.len() as f64)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("index\toverrides\tseed\tstatus\tk+1\tkappa\tused\n");
        for c in &self.cells {
            let ov = c.overrides.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
            match &c.outcome {
                Ok(x) => s.push_str(&format!(
                    "{}\t{ov}\t{}\t{}\t{}\t{}\t{}\n",
                    c.index,
                    c.seed,
                    if x.success { "ok" } else { "failed" },
                    x.threshold,
                    x.kappa,
                    x.responses_used
                )),
                Err(e) => s.push_str(&format!("{}\t{ov}\t{}\terror: {e}\t\t\t\n", c.index, c.seed)),
            }
        }
        s
    }
}

/// One run per grid point, each with `seed ^ index`. A cell that cannot be
/// configured or planned records its error and the sweep moves on.
pub fn sweep(template: &SimConfig, grid: &[Vec<(String, String)>]) -> SweepTable {
    let cells = grid
        .iter()
        .enumerate()
        .map(|(index, overrides)| {
            let seed = template.seed ^ index as u64;
            let outcome = (|| {
                let mut cfg = template.clone();
                for (k, v) in overrides {
                    cfg.set(k, v)?;
                }
                cfg.seed = seed;
                let r = run(&cfg)?;
                Ok::<_, SimError>(CellSummary {
                    success: r.success,
                    threshold: r.threshold,
                    kappa: r.kappa,
                    responses_used: r.responses_used,
                })
            })()
            .map_err(|e| e.to_string());
            SweepCell {
                index,
                overrides: overrides.clone(),
                seed,
                outcome,
            }
        })
        .collect();
    SweepTable { cells }
}
