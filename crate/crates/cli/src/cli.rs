use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loopforge_core::ring::Rational;
use loopforge_core::solve::{emit_smtlib, NumberSort};
use loopforge_core::universal::LinearOutcome;
use loopforge_core::verify::{simulate_loop_with, verify_invariants_with, verify_universal, SimulateOptions};

use crate::bench::{problem_files, run_all, table, write_jsonl};
use crate::pipeline::{run, smt_job, GenStatus, NonzeroChoice, Settings, Status, SIM_STEPS, SIM_WORD_LIMIT};
use crate::problem::load;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "loopforge", version, about = "Synthesize loops from polynomial invariants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the coefficient system of a template and optionally solve it.
    Synth(SynthArgs),
    /// Verify a concrete loop against its invariants.
    Check(CheckArgs),
    /// Run every `*.loop` file in a directory.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SortArg {
    Int,
    Real,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum NonzeroArg {
    Any,
    PerBranch,
    None,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Solver command line; the problem is written to its stdin.
    #[arg(long, env = "LOOPFORGE_SOLVER", default_value = "z3 -in")]
    pub solver_cmd: String,
    /// Seconds allowed for generation and for each solver call.
    #[arg(long, default_value_t = 300)]
    pub timeout: u64,
    #[arg(long, value_enum, default_value = "int")]
    pub sort: SortArg,
    #[arg(long, value_enum, default_value = "any")]
    pub nonzero: NonzeroArg,
    /// Classify the coefficient set as finite, infinite or empty.
    #[arg(long)]
    pub finiteness: bool,
    #[arg(long, default_value_t = loopforge_core::invariant::DEFAULT_MAX_ROUNDS)]
    pub max_rounds: usize,
    /// Seed for sampled simulation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn settings(&self, solve: bool) -> Settings {
        Settings {
            solver_cmd: self.solver_cmd.clone(),
            timeout: Duration::from_secs(self.timeout),
            sort: match self.sort {
                SortArg::Int => NumberSort::Integer,
                SortArg::Real => NumberSort::Real,
            },
            nonzero: match self.nonzero {
                NonzeroArg::Any => NonzeroChoice::Any,
                NonzeroArg::PerBranch => NonzeroChoice::PerBranch,
                NonzeroArg::None => NonzeroChoice::None,
            },
            finiteness: self.finiteness,
            max_rounds: self.max_rounds,
            seed: self.seed,
            solve,
        }
    }
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    pub file: PathBuf,
    /// Call the solver and verify the loop it yields.
    #[arg(long)]
    pub solve: bool,
    /// Write the SMT-LIB problem to this path (`-` for stdout).
    #[arg(long)]
    pub emit_smt: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = SIM_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = SIM_WORD_LIMIT)]
    pub words: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub dir: PathBuf,
    /// Worker threads; defaults to the number of processors.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write one JSON object per problem to this path.
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
    /// Only generate and classify; skip the solver.
    #[arg(long)]
    pub no_solve: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// Runs a parsed command, writing to `out` and `err`; returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let r = match &cli.command {
        Command::Synth(a) => synth(a, out, err),
        Command::Check(a) => check(a, out, err),
        Command::Bench(a) => bench(a, out, err),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn join(v: &[Rational]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn synth(a: &SynthArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let prob = load(&a.file)?;
    if prob.template().is_none() {
        return Err(format!("{}: no template; use `check` for concrete loops", a.file.display()).into());
    }
    let settings = a.solver.settings(a.solve);
    let o = run(&prob, &settings);
    let sh = o.shape;
    writeln!(out, "problem: {} ({})", prob.name, o.mode)?;
    writeln!(out, "shape: n={} m={} d={} D={} l={}", sh.n, sh.m, sh.d, sh.big_d, sh.l)?;
    match &o.gen_status {
        GenStatus::Ok => writeln!(out, "generation: {:.3}s", o.gen_time.as_secs_f64())?,
        GenStatus::TimeLimit => writeln!(out, "generation: TL")?,
        GenStatus::Failed(e) => {
            writeln!(err, "generation failed: {e}")?;
            return Ok(EXIT_USAGE);
        }
    }
    let Some(sys) = &o.system else {
        return Ok(EXIT_FAIL);
    };
    writeln!(out, "equations: {}", sys.len())?;
    write!(out, "{sys}")?;
    match &o.affine {
        Some(LinearOutcome::Infeasible) => writeln!(out, "affine space: empty")?,
        Some(LinearOutcome::Affine(space)) => {
            writeln!(out, "affine space: dim {} in {} unknowns", space.dim(), space.ambient_dim())?;
            writeln!(out, "  point: ({})", join(&space.particular))?;
            for b in &space.basis {
                writeln!(out, "  direction: ({})", join(b))?;
            }
        }
        None => {}
    }
    if let Some(f) = &o.finiteness {
        writeln!(out, "finiteness: {f}")?;
    }
    if let Some(path) = &a.emit_smt {
        let text = emit_smtlib(&smt_job(sys, &prob, &settings))?;
        if path.as_os_str() == "-" {
            write!(out, "{text}")?;
        } else {
            std::fs::write(path, text)?;
        }
    }
    let Some(status) = o.status else {
        return Ok(EXIT_OK);
    };
    writeln!(out, "status: {status}")?;
    if let Some(t) = o.solver_time {
        writeln!(out, "solver: {:.3}s", t.as_secs_f64())?;
    }
    if let Some(n) = &o.note {
        writeln!(out, "note: {n}")?;
    }
    if let Some(m) = &o.model {
        let vals: Vec<String> = m.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "model: {}", vals.join(" "))?;
    }
    if let Some(lp) = &o.found {
        write!(out, "{lp}")?;
    }
    for r in &o.reports {
        writeln!(out, "{r}")?;
    }
    Ok(match status {
        Status::Error => EXIT_USAGE,
        s if s.is_success() && o.verdict() == "pass" => EXIT_OK,
        _ => EXIT_FAIL,
    })
}

fn check(a: &CheckArgs, out: &mut dyn Write, _err: &mut dyn Write) -> CmdResult {
    let prob = load(&a.file)?;
    let lp = prob.concrete_loop()?;
    let mut reports = vec![verify_universal(&lp, &prob.invariants)?];
    if lp.initial.is_some() {
        reports.push(verify_invariants_with(&lp, &prob.invariants, &Default::default())?);
        let opts = SimulateOptions { steps: a.steps, word_limit: a.words, seed: a.seed };
        reports.push(simulate_loop_with(&lp, &prob.invariants, &opts)?);
    }
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    // with an initial value, identity is sufficient but not necessary
    let passed = if lp.initial.is_some() { reports[1..].iter().all(|r| r.passed) } else { reports[0].passed };
    writeln!(out, "verdict: {}", if passed { "pass" } else { "fail" })?;
    Ok(if passed { EXIT_OK } else { EXIT_FAIL })
}

fn bench(a: &BenchArgs, out: &mut dyn Write, _err: &mut dyn Write) -> CmdResult {
    let files = problem_files(&a.dir)?;
    let jobs = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = run_all(&files, &a.solver.settings(!a.no_solve), jobs);
    write!(out, "{}", table(&rows))?;
    if let Some(p) = &a.jsonl {
        let mut w = BufWriter::new(File::create(p)?);
        write_jsonl(&rows, &mut w)?;
        w.flush()?;
    }
    Ok(EXIT_OK)
}

pub fn main_with_args(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    execute(&cli, &mut io::stdout().lock(), &mut io::stderr().lock())
}
