use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use riemann_wp::fo::{SolverConfig, SolverError};
use riemann_wp::num::{parse_rational, zero};
use riemann_wp::riemann::{encode_nondet_with, Kind, NondetOptions, Polarity, TransformError, TransformerKind, DEFAULT_NODE_CAP};
use riemann_wp::sim::estimate_wp;
use riemann_wp::syntax::{check_expr_functions, parse_expr, parse_source, DomainDecl, Expr, Source};
use riemann_wp::verify::{
    check_bound, check_subinvariant_wlp, check_superinvariant, cwp_upper_bound, refute_lower_bound_wlp, refute_upper_bound, Budget,
    CwpOutcome, Direction, Options, VerifyError,
};
use riemann_wp::State;
use serde::Deserialize;

use crate::report::{Report, EXIT_INTERNAL, EXIT_USAGE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    VerifyBound,
    VerifyInvariant,
    VerifySubinvariantWlp,
    CwpBound,
    Refute,
    Simulate,
    Encode,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::VerifyBound => "verify-bound",
            TaskKind::VerifyInvariant => "verify-invariant",
            TaskKind::VerifySubinvariantWlp => "verify-subinvariant-wlp",
            TaskKind::CwpBound => "cwp-bound",
            TaskKind::Refute => "refute",
            TaskKind::Simulate => "simulate",
            TaskKind::Encode => "encode",
        }
    }
}

/// One unit of work, from a task file or from command-line flags.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Task {
    pub name: Option<String>,
    pub kind: TaskKind,
    pub program: PathBuf,
    pub post: Option<String>,
    /// Upper or lower bound for verify-bound and refute.
    pub bound: Option<String>,
    /// Loop invariant; defaults to the loop's `@invariant` annotation.
    pub invariant: Option<String>,
    /// Subinvariant of `wlp(1)` for cwp-bound.
    pub denominator: Option<String>,
    pub n: Option<u32>,
    /// Partition size for the denominator of cwp-bound.
    pub n_den: Option<u32>,
    /// uwp, lwp, uwlp or lwlp; verify-bound only.
    pub transformer: Option<String>,
    /// upper or lower; verify-bound and refute.
    pub direction: Option<String>,
    /// Extra `domain` declarations, in surface syntax.
    pub domain: Option<String>,
    /// Which loop an invariant belongs to, counting from 0.
    pub loop_index: Option<usize>,
    /// Initial state for simulate; undeclared variables start at 0.
    #[serde(default)]
    pub state: BTreeMap<String, String>,
    pub samples: Option<u64>,
    pub max_steps: Option<u64>,
    pub max_n: Option<u32>,
    pub max_nodes: Option<u64>,
    pub polarity: Option<String>,
    /// Encode the liberal transformer.
    #[serde(default)]
    pub liberal: bool,
    pub assume_bounded: Option<bool>,
    pub seed: Option<u64>,
    pub timeout: Option<u64>,
}

impl Task {
    pub fn new(kind: TaskKind, program: PathBuf) -> Task {
        Task {
            name: None,
            kind,
            program,
            post: None,
            bound: None,
            invariant: None,
            denominator: None,
            n: None,
            n_den: None,
            transformer: None,
            direction: None,
            domain: None,
            loop_index: None,
            state: BTreeMap::new(),
            samples: None,
            max_steps: None,
            max_n: None,
            max_nodes: None,
            polarity: None,
            liberal: false,
            assume_bounded: None,
            seed: None,
            timeout: None,
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let file = self.program.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            format!("{} {}", self.kind.name(), file)
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(rename = "task", default)]
    pub tasks: Vec<Task>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Defaults {
    pub solver: Option<PathBuf>,
    pub timeout: Option<u64>,
    pub seed: Option<u64>,
    pub assume_bounded: Option<bool>,
    pub debug_dir: Option<PathBuf>,
}

impl TaskFile {
    /// Reads a TOML task file; program paths are taken relative to it.
    pub fn load(path: &Path) -> Result<TaskFile, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let mut tf: TaskFile = toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for t in &mut tf.tasks {
            if t.program.is_relative() {
                t.program = base.join(&t.program);
            }
        }
        Ok(tf)
    }
}

/// Settings shared by every task in a run.
#[derive(Clone, Debug)]
pub struct Settings {
    pub solver: Option<PathBuf>,
    pub timeout: u64,
    pub seed: Option<u64>,
    pub debug_dir: Option<PathBuf>,
    pub assume_bounded: bool,
}

impl Default for Settings {
    fn default() -> Settings {
        Settings { solver: None, timeout: 180, seed: None, debug_dir: None, assume_bounded: false }
    }
}

impl Settings {
    pub fn overlay(&mut self, d: &Defaults) {
        if let Some(s) = &d.solver {
            self.solver.get_or_insert(s.clone());
        }
        if let Some(t) = d.timeout {
            self.timeout = t;
        }
        if self.seed.is_none() {
            self.seed = d.seed;
        }
        if let Some(b) = d.assume_bounded {
            self.assume_bounded |= b;
        }
        if self.debug_dir.is_none() {
            self.debug_dir = d.debug_dir.clone();
        }
    }
}

/// A task that could not produce a verdict.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_INTERNAL, message: message.into() }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Failure {
        match e {
            VerifyError::Solver(SolverError::Spawn { .. } | SolverError::Failed(_) | SolverError::Internal(_)) => {
                Failure::internal(e.to_string())
            }
            e => Failure::usage(e.to_string()),
        }
    }
}

const DEFAULT_N: u32 = 16;
const DEFAULT_SAMPLES: u64 = 100_000;
const DEFAULT_MAX_STEPS: u64 = 1_000_000;

pub fn run_task(t: &Task, settings: &Settings) -> Report {
    let label = t.label();
    match run_inner(t, settings, &label) {
        Ok(r) => r,
        Err(f) => Report::error(&label, f.code, f.message),
    }
}

fn run_inner(t: &Task, settings: &Settings, label: &str) -> Result<Report, Failure> {
    let src = load_source(&t.program)?;
    let mut domains = src.domains.clone();
    if let Some(text) = &t.domain {
        domains.extend(parse_domains(text)?);
    }
    let opts = options(t, settings, domains.clone())?;
    let expr = |what: &str, text: &Option<String>| -> Result<Expr, Failure> {
        let text = text.as_deref().ok_or_else(|| Failure::usage(format!("{} needs --{what}", t.kind.name())))?;
        let e = parse_expr(text).map_err(|e| Failure::usage(format!("--{what}: {e}")))?;
        check_expr_functions(&e, &domains).map_err(|e| Failure::usage(format!("--{what}: {e}")))?;
        Ok(e)
    };
    let n = t.n.unwrap_or(DEFAULT_N);
    if n == 0 || t.n_den == Some(0) {
        return Err(Failure::usage("partition sizes must be at least 1"));
    }
    let verdict = |r: Result<_, VerifyError>| -> Result<Report, Failure> {
        match r {
            Ok(v) => Ok(Report::from_verdict(label, &v)),
            Err(VerifyError::Transform(e @ TransformError::TooLarge { .. })) => {
                let mut r = Report::error(label, 2, e.to_string());
                r.status = "unknown".into();
                Ok(r)
            }
            Err(e) => Err(e.into()),
        }
    };
    match t.kind {
        TaskKind::VerifyBound => {
            let (f, g) = (expr("post", &t.post)?, expr("bound", &t.bound)?);
            let direction = direction(t)?;
            let kind = match &t.transformer {
                Some(k) => k.parse::<Kind>().map_err(Failure::usage)?,
                None if direction == Direction::Upper => Kind::Uwp,
                None => Kind::Lwp,
            };
            verdict(check_bound(direction, TransformerKind::new(kind, n), &src.program, &f, &g, &opts))
        }
        TaskKind::VerifyInvariant | TaskKind::VerifySubinvariantWlp => {
            let f = expr("post", &t.post)?;
            let lp = pick_loop(&src, t)?;
            let inv = match &t.invariant {
                Some(_) => expr("invariant", &t.invariant)?,
                None => lp.invariant.clone().ok_or_else(|| Failure::usage("the loop has no @invariant; pass --invariant"))?,
            };
            if t.kind == TaskKind::VerifyInvariant {
                verdict(check_superinvariant(n, &lp, &f, &inv, &opts))
            } else {
                verdict(check_subinvariant_wlp(n, &lp, &f, &inv, &opts))
            }
        }
        TaskKind::CwpBound => {
            let f = expr("post", &t.post)?;
            let lp = pick_loop(&src, t)?;
            let num = match &t.invariant {
                Some(_) => expr("invariant", &t.invariant)?,
                None => lp.invariant.clone().ok_or_else(|| Failure::usage("cwp-bound needs --invariant"))?,
            };
            let den = expr("denominator", &t.denominator)?;
            match cwp_upper_bound(&lp, &f, &num, n, &den, t.n_den.unwrap_or(n), &opts)? {
                CwpOutcome::Bound(b) => Ok(Report::from_cwp(label, &b)),
                CwpOutcome::Failed(v) => Ok(Report::from_verdict(label, &v)),
            }
        }
        TaskKind::Refute => {
            let (f, g) = (expr("post", &t.post)?, expr("bound", &t.bound)?);
            let mut budget = Budget::default();
            if let Some(m) = t.max_n {
                budget.max_n = m.max(1);
            }
            if let Some(m) = t.max_nodes {
                budget.max_nodes = m;
            }
            let r = match direction(t)? {
                Direction::Upper => refute_upper_bound(&src.program, &f, &g, &budget, &opts),
                Direction::Lower => refute_lower_bound_wlp(&src.program, &f, &g, &budget, &opts),
            };
            verdict(r)
        }
        TaskKind::Simulate => {
            let f = expr("post", &t.post)?;
            if !f.functions().is_empty() {
                return Err(Failure::usage("simulate cannot evaluate domain functions"));
            }
            let s0 = initial_state(&src, &t.state)?;
            let seed = t.seed.or(settings.seed).unwrap_or(0);
            let e = estimate_wp(
                &src.program,
                &f,
                &s0,
                t.samples.unwrap_or(DEFAULT_SAMPLES),
                seed,
                t.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            )
            .map_err(|e| Failure::usage(e.to_string()))?;
            Ok(Report::from_estimate(label, &e))
        }
        TaskKind::Encode => {
            let polarity = match &t.polarity {
                Some(p) => p.parse::<Polarity>().map_err(Failure::usage)?,
                None => Polarity::Angelic,
            };
            let post = t.post.as_ref().map(|_| expr("post", &t.post)).transpose()?;
            let pre = t.bound.as_ref().map(|_| expr("bound", &t.bound)).transpose()?;
            let name = t.program.file_stem().map(|s| s.to_string_lossy().replace(['-', '.'], "_"));
            let nd = NondetOptions { name, pre, post, liberal: t.liberal };
            Ok(Report::encoded(label, n, encode_nondet_with(&src.program, n, polarity, &nd)))
        }
    }
}

fn options(t: &Task, settings: &Settings, domains: Vec<DomainDecl>) -> Result<Options, Failure> {
    let mut solver = match &settings.solver {
        Some(p) => SolverConfig::with_path(p.to_string_lossy()),
        None => SolverConfig::default(),
    };
    solver.timeout = Duration::from_secs(t.timeout.unwrap_or(settings.timeout).max(1));
    solver.seed = t.seed.or(settings.seed);
    solver.debug_dir = settings.debug_dir.clone();
    let node_cap = t.max_nodes.unwrap_or(DEFAULT_NODE_CAP);
    Ok(Options { solver, domains, assume_bounded: t.assume_bounded.unwrap_or(settings.assume_bounded), node_cap })
}

fn direction(t: &Task) -> Result<Direction, Failure> {
    match &t.direction {
        Some(d) => d.parse().map_err(Failure::usage),
        None => Ok(Direction::Upper),
    }
}

fn load_source(path: &Path) -> Result<Source, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_source(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_domains(text: &str) -> Result<Vec<DomainDecl>, Failure> {
    let src = parse_source(&format!("{text}\nskip")).map_err(|e| Failure::usage(format!("domain block: {e}")))?;
    Ok(src.domains)
}

fn pick_loop(src: &Source, t: &Task) -> Result<riemann_wp::syntax::Loop, Failure> {
    let loops = src.program.loops();
    let i = t.loop_index.unwrap_or(0);
    loops.get(i).map(|l| (*l).clone()).ok_or_else(|| {
        if loops.is_empty() {
            Failure::usage(format!("{} has no loop", t.program.display()))
        } else {
            Failure::usage(format!("loop index {i} out of range ({} loops)", loops.len()))
        }
    })
}

fn initial_state(src: &Source, given: &BTreeMap<String, String>) -> Result<State, Failure> {
    let mut s: State = src.program.vars().into_iter().map(|v| (v, zero())).collect();
    for v in src.vars.iter().flatten() {
        s.insert(v.clone(), zero());
    }
    for (k, v) in given {
        let q = parse_rational(v).ok_or_else(|| Failure::usage(format!("--state: `{v}` is not a number")))?;
        if q < zero() {
            return Err(Failure::usage(format!("--state: {k} must be nonnegative")));
        }
        s.insert(k.clone(), q);
    }
    Ok(s)
}

/// Parses `x=1, y=1/2`.
pub fn parse_state_arg(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Failure::usage(format!("--state: expected name=value, got `{part}`")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}
