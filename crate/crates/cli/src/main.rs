//! `rwp`: verify, refute and simulate probabilistic programs.
//!
//! Exit codes: 0 verified, 1 refuted, 2 unknown, 64 usage, 70 internal.
//! A task file run exits with the largest code among its tasks.

mod report;
mod task;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use report::{Report, EXIT_INTERNAL, EXIT_USAGE};
use task::{parse_state_arg, run_task, Settings, Task, TaskFile, TaskKind};

#[derive(Parser, Debug)]
#[command(name = "rwp", version, about = "Riemann-sum weakest pre-expectation verifier")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Solver binary; defaults to $RWP_SOLVER or z3.
    #[arg(long, global = true)]
    solver: Option<PathBuf>,
    /// Per-query solver timeout in seconds.
    #[arg(long, global = true, default_value_t = 180)]
    timeout: u64,
    /// Print a JSON report instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    /// Solver and sampler seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Take 1-boundedness of liberal post-expectations on trust.
    #[arg(long, global = true)]
    assume_bounded: bool,
    /// Concurrent tasks for `run`.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write every solver script and answer here.
    #[arg(long, global = true)]
    debug_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Common {
    /// Program file.
    program: PathBuf,
    /// Post-expectation.
    #[arg(long)]
    post: Option<String>,
    /// Partition size.
    #[arg(long)]
    n: Option<u32>,
    /// Extra domain declarations, as a file.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Node cap for pre-expectations.
    #[arg(long)]
    max_nodes: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check T(C)(post) <= bound (upper) or bound <= T(C)(post) (lower).
    VerifyBound {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: String,
        /// upper or lower.
        #[arg(long, default_value = "upper")]
        direction: String,
        /// uwp, lwp, uwlp or lwlp; defaults to uwp or lwp by direction.
        #[arg(long)]
        transformer: Option<String>,
    },
    /// Check a uwp superinvariant of a loop.
    VerifyInvariant {
        #[command(flatten)]
        common: Common,
        /// Defaults to the loop's @invariant.
        #[arg(long)]
        invariant: Option<String>,
        #[arg(long = "loop", value_name = "INDEX")]
        loop_index: Option<usize>,
    },
    /// Check an lwlp subinvariant of a loop.
    VerifySubinvariantWlp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        invariant: Option<String>,
        #[arg(long = "loop", value_name = "INDEX")]
        loop_index: Option<usize>,
    },
    /// Bound the conditional expectation of a loop by I / J.
    CwpBound {
        #[command(flatten)]
        common: Common,
        /// Superinvariant I for wp(post).
        #[arg(long)]
        invariant: Option<String>,
        /// Subinvariant J for wlp(1).
        #[arg(long)]
        denominator: String,
        /// Partition size for J; defaults to --n.
        #[arg(long)]
        n_den: Option<u32>,
        #[arg(long = "loop", value_name = "INDEX")]
        loop_index: Option<usize>,
    },
    /// Search for a state refuting wp(post) <= bound (or bound <= wlp(post)
    /// with --direction lower) by unrolling and refining together.
    Refute {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: String,
        #[arg(long, default_value = "upper")]
        direction: String,
        /// Largest unrolling depth and partition size.
        #[arg(long)]
        max_n: Option<u32>,
    },
    /// Estimate wp(post) by sampling.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Initial state, e.g. `i=1, M=4`; other variables start at 0.
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Print the nondeterministic encoding of the Riemann transformer.
    Encode {
        #[command(flatten)]
        common: Common,
        /// angelic (upper) or demonic (lower).
        #[arg(long, default_value = "angelic")]
        polarity: String,
        /// Bound to state as the pre.
        #[arg(long)]
        bound: Option<String>,
        /// Encode the liberal transformer.
        #[arg(long)]
        liberal: bool,
        /// Write the encoding here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run every task of a TOML task file.
    Run { tasks: PathBuf },
}

fn common_task(kind: TaskKind, c: Common) -> Result<Task, task::Failure> {
    let mut t = Task::new(kind, c.program);
    t.post = c.post;
    t.n = c.n;
    t.max_nodes = c.max_nodes;
    if let Some(path) = c.domain {
        let text = std::fs::read_to_string(&path).map_err(|e| task::Failure::usage(format!("{}: {e}", path.display())))?;
        t.domain = Some(text);
    }
    Ok(t)
}

fn build(command: Command) -> Result<(Vec<Task>, Option<PathBuf>, Option<task::Defaults>), task::Failure> {
    let one = |t: Task| Ok((vec![t], None, None));
    match command {
        Command::VerifyBound { common, bound, direction, transformer } => {
            let mut t = common_task(TaskKind::VerifyBound, common)?;
            t.bound = Some(bound);
            t.direction = Some(direction);
            t.transformer = transformer;
            one(t)
        }
        Command::VerifyInvariant { common, invariant, loop_index } => {
            let mut t = common_task(TaskKind::VerifyInvariant, common)?;
            t.invariant = invariant;
            t.loop_index = loop_index;
            one(t)
        }
        Command::VerifySubinvariantWlp { common, invariant, loop_index } => {
            let mut t = common_task(TaskKind::VerifySubinvariantWlp, common)?;
            t.invariant = invariant;
            t.loop_index = loop_index;
            one(t)
        }
        Command::CwpBound { common, invariant, denominator, n_den, loop_index } => {
            let mut t = common_task(TaskKind::CwpBound, common)?;
            t.invariant = invariant;
            t.denominator = Some(denominator);
            t.n_den = n_den;
            t.loop_index = loop_index;
            one(t)
        }
        Command::Refute { common, bound, direction, max_n } => {
            let mut t = common_task(TaskKind::Refute, common)?;
            t.bound = Some(bound);
            t.direction = Some(direction);
            t.max_n = max_n;
            one(t)
        }
        Command::Simulate { common, state, samples, max_steps } => {
            let mut t = common_task(TaskKind::Simulate, common)?;
            if let Some(s) = state {
                t.state = parse_state_arg(&s)?;
            }
            t.samples = Some(samples);
            t.max_steps = max_steps;
            one(t)
        }
        Command::Encode { common, polarity, bound, liberal, output } => {
            let mut t = common_task(TaskKind::Encode, common)?;
            t.polarity = Some(polarity);
            t.bound = bound;
            t.liberal = liberal;
            Ok((vec![t], output, None))
        }
        Command::Run { tasks } => {
            let tf = TaskFile::load(&tasks)?;
            Ok((tf.tasks, None, Some(tf.defaults)))
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let g = cli.global;
    let many = matches!(cli.command, Command::Run { .. });
    let (tasks, output, defaults) = match build(cli.command) {
        Ok(x) => x,
        Err(f) => {
            eprintln!("rwp: {}", f.message);
            return f.code;
        }
    };
    let mut settings = Settings { solver: g.solver, timeout: g.timeout, seed: g.seed, debug_dir: g.debug_dir, assume_bounded: g.assume_bounded };
    if let Some(d) = &defaults {
        settings.overlay(d);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(g.jobs.unwrap_or(1).max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("rwp: {e}");
            return EXIT_INTERNAL;
        }
    };
    let mut reports: Vec<Report> = pool.install(|| tasks.par_iter().map(|t| run_task(t, &settings)).collect());

    if let Some(path) = output {
        for r in &mut reports {
            if let Some(text) = &r.encoding {
                if let Err(e) = std::fs::write(&path, text) {
                    *r = Report::error(&r.task, EXIT_USAGE, format!("{}: {e}", path.display()));
                } else if !g.json {
                    r.encoding = None;
                    r.notes.push(format!("written to {}", path.display()));
                }
            }
        }
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if g.json {
        let text = if many { serde_json::to_string_pretty(&reports) } else { serde_json::to_string_pretty(&reports[0]) };
        let _ = writeln!(out, "{}", text.expect("reports serialize"));
    } else {
        for r in &reports {
            match &r.encoding {
                Some(text) => {
                    let _ = write!(out, "{text}");
                }
                None if r.status == "error" => eprintln!("rwp: {}: {}", r.task, r.reason.as_deref().unwrap_or("")),
                None => {
                    let _ = writeln!(out, "{r}");
                }
            }
        }
    }
    reports.iter().map(|r| r.exit_code).max().unwrap_or(0)
}
