//! Generate, solve and verify one problem.

use std::fmt;
use std::time::{Duration, Instant};

use loopforge_core::groebner::{Budget, GroebnerError};
use loopforge_core::invariant::{InvariantError, InvariantOptions};
use loopforge_core::ring::{Polynomial, Rational};
use loopforge_core::solve::{
    classify_finiteness_with, render_prefix, run_smt, symbol, Finiteness, NonzeroPolicy, NumberSort, SmtJob, SolveError, SolveStatus,
};
use loopforge_core::synth::{
    generate_loops_with, instantiate_loop, Assignment, ConcreteLoop, GenerateOptions, Guard, PolynomialSystem,
    SynthError, SynthesisProblem,
};
use loopforge_core::universal::{compute_loops_linear_universal, compute_loops_universal, LinearOutcome};
use loopforge_core::verify::{
    simulate_loop_with, verify_invariants_with, verify_universal, SimulateOptions, VerificationReport, VerifyError,
};

use crate::problem::{Mode, Problem, Shape};

pub const SIM_STEPS: usize = 8;
pub const SIM_WORD_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonzeroChoice {
    #[default]
    Any,
    PerBranch,
    None,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub solver_cmd: String,
    pub timeout: Duration,
    pub sort: NumberSort,
    pub nonzero: NonzeroChoice,
    pub finiteness: bool,
    pub max_rounds: usize,
    pub seed: u64,
    pub solve: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            solver_cmd: "z3 -in".into(),
            timeout: Duration::from_secs(loopforge_core::solve::DEFAULT_TIMEOUT_SECS),
            sort: NumberSort::Integer,
            nonzero: NonzeroChoice::Any,
            finiteness: false,
            max_rounds: loopforge_core::invariant::DEFAULT_MAX_ROUNDS,
            seed: 0,
            solve: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
    TimeLimit,
    NoInput,
    Identity,
    Error,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
            Status::TimeLimit => "TL",
            Status::NoInput => "NI",
            Status::Identity => "Id",
            Status::Error => "error",
        }
    }

    /// A loop was found and verified.
    pub fn is_success(self) -> bool {
        matches!(self, Status::Sat | Status::Identity)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenStatus {
    Ok,
    TimeLimit,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FinitenessFlag {
    Known(Finiteness),
    TimeLimit,
}

impl fmt::Display for FinitenessFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinitenessFlag::Known(k) => write!(f, "{k}"),
            FinitenessFlag::TimeLimit => f.write_str("TL"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub shape: Shape,
    pub mode: Mode,
    pub gen_time: Duration,
    pub gen_status: GenStatus,
    pub system: Option<PolynomialSystem>,
    pub affine: Option<LinearOutcome>,
    pub finiteness: Option<FinitenessFlag>,
    pub status: Option<Status>,
    pub solver_time: Option<Duration>,
    pub model: Option<Assignment>,
    pub found: Option<ConcreteLoop>,
    pub reports: Vec<VerificationReport>,
    pub note: Option<String>,
}

impl Outcome {
    /// `pass`, `fail`, or `-` when nothing was verified.
    pub fn verdict(&self) -> &'static str {
        if self.reports.is_empty() {
            "-"
        } else if self.reports.iter().all(|r| r.passed) {
            "pass"
        } else {
            "fail"
        }
    }
}

fn synth_deadline(e: &SynthError) -> bool {
    matches!(
        e,
        SynthError::Groebner(GroebnerError::Deadline)
            | SynthError::Invariant(InvariantError::Groebner(GroebnerError::Deadline))
    )
}

/// SMT job for `sys` under the chosen nonzero policy.
pub fn smt_job(sys: &PolynomialSystem, prob: &Problem, settings: &Settings) -> SmtJob {
    let mut job = SmtJob::new(sys.clone());
    job.sort = settings.sort;
    job.timeout = settings.timeout;
    let names = prob.template().map(|t| t.coefficient_names().to_vec()).unwrap_or_default();
    let declared = |n: &String| sys.ctx.index_of(n).is_some();
    let branch_groups: Vec<Vec<String>> =
        names.iter().map(|b| b.iter().flatten().filter(|n| declared(n)).cloned().collect()).collect();
    let guard_group: Vec<String> = sys
        .ctx
        .names()
        .iter()
        .enumerate()
        .filter(|(i, _)| sys.ctx.class(*i) == loopforge_core::ring::VarClass::GuardCoeff)
        .map(|(_, n)| n.clone())
        .collect();
    let mut groups = match settings.nonzero {
        NonzeroChoice::None => Vec::new(),
        NonzeroChoice::Any => vec![branch_groups.concat()],
        NonzeroChoice::PerBranch => branch_groups,
    };
    if settings.nonzero != NonzeroChoice::None && !guard_group.is_empty() {
        groups.push(guard_group);
    }
    groups.retain(|g| !g.is_empty());
    job.nonzero = if groups.is_empty() { NonzeroPolicy::None } else { NonzeroPolicy::PerGroup(groups) };
    job
}

fn exclude(sys: &PolynomialSystem, model: &Assignment, names: &[String], sort: NumberSort) -> String {
    let parts: Vec<String> = names
        .iter()
        .map(|n| {
            let lit = render_prefix(&Polynomial::constant(&sys.ctx, model[n].clone()), sort);
            format!("(not (= {} {lit}))", symbol(n))
        })
        .collect();
    format!("(or {} false)", parts.join(" "))
}

pub fn run(prob: &Problem, settings: &Settings) -> Outcome {
    let mut out = Outcome {
        shape: prob.shape(),
        mode: prob.mode,
        gen_time: Duration::ZERO,
        gen_status: GenStatus::Ok,
        system: None,
        affine: None,
        finiteness: None,
        status: None,
        solver_time: None,
        model: None,
        found: None,
        reports: Vec::new(),
        note: None,
    };
    let Some(template) = prob.template() else {
        out.gen_status = GenStatus::Failed("the file gives a concrete loop; use `check`".into());
        out.status = settings.solve.then_some(Status::Error);
        return out;
    };

    let start = Instant::now();
    let budget = Budget::until(start + settings.timeout);
    let mut synth_prob: Option<SynthesisProblem> = None;
    let generated: Result<PolynomialSystem, GenStatus> = match prob.mode {
        Mode::General => match prob.synthesis_problem() {
            Err(e) => Err(GenStatus::Failed(e)),
            Ok(sp) => {
                let opts = GenerateOptions {
                    invariant: InvariantOptions { max_rounds: settings.max_rounds, budget: budget.clone(), ..Default::default() },
                    dedup: false,
                };
                let r = generate_loops_with(&sp, &opts);
                synth_prob = Some(sp);
                r.map_err(|e| if synth_deadline(&e) { GenStatus::TimeLimit } else { GenStatus::Failed(e.to_string()) })
            }
        },
        Mode::Universal | Mode::UniversalLinear => {
            if matches!(prob.guard, Guard::Template(_)) {
                Err(GenStatus::Failed("guard templates need mode general".into()))
            } else {
                compute_loops_universal(&prob.invariants, template).map_err(|e| GenStatus::Failed(e.to_string()))
            }
        }
    };
    if prob.mode == Mode::UniversalLinear && generated.is_ok() {
        match compute_loops_linear_universal(&prob.invariants, template) {
            Ok(a) => out.affine = Some(a),
            Err(e) => {
                out.gen_status = GenStatus::Failed(e.to_string());
            }
        }
    }
    out.gen_time = start.elapsed();
    let sys = match generated {
        Ok(s) => s,
        Err(g) => {
            out.status = settings.solve.then_some(if g == GenStatus::TimeLimit { Status::NoInput } else { Status::Error });
            out.gen_status = g;
            return out;
        }
    };
    if out.gen_status != GenStatus::Ok {
        out.status = settings.solve.then_some(Status::Error);
        out.system = Some(sys);
        return out;
    }

    if settings.finiteness {
        let b = Budget::until(Instant::now() + settings.timeout);
        out.finiteness = Some(match classify_finiteness_with(&sys, &b) {
            Ok(f) => FinitenessFlag::Known(f),
            Err(SolveError::Groebner(GroebnerError::Deadline)) => FinitenessFlag::TimeLimit,
            Err(e) => {
                out.note = Some(e.to_string());
                FinitenessFlag::TimeLimit
            }
        });
    }
    out.system = Some(sys.clone());
    if !settings.solve {
        return out;
    }

    let solve_start = Instant::now();
    let found = find_point(prob, &sys, &out.affine, settings);
    out.solver_time = Some(solve_start.elapsed());
    let (status, model) = match found {
        Ok(x) => x,
        Err(e) => {
            out.status = Some(Status::Error);
            out.note = Some(e);
            return out;
        }
    };
    out.status = Some(status);
    let Some(model) = model else {
        return out;
    };

    let checked = match prob.mode {
        Mode::General => check_general(synth_prob.as_ref().unwrap(), &model, prob, settings),
        _ => check_universal(prob, &model, settings),
    };
    out.model = Some(model);
    match checked {
        Ok((lp, reports)) => {
            out.found = Some(lp);
            out.reports = reports;
            if out.verdict() != "pass" {
                out.status = Some(Status::Unknown);
                out.note = Some("solver point failed verification".into());
            }
        }
        Err(e) => {
            out.status = Some(Status::Unknown);
            out.note = Some(format!("verification error: {e}"));
        }
    }
    out
}

/// A point of the coefficient set, or the reason there is none.
fn find_point(
    prob: &Problem,
    sys: &PolynomialSystem,
    affine: &Option<LinearOutcome>,
    settings: &Settings,
) -> Result<(Status, Option<Assignment>), String> {
    let template = prob.template().unwrap();
    let coeffs: Vec<String> = template.coefficient_names().iter().flatten().flatten().cloned().collect();
    let is_identity = |a: &Assignment| template.instantiate(a).is_ok_and(|maps| maps.iter().all(|m| m.is_identity()));

    if let Some(aff) = affine {
        let LinearOutcome::Affine(space) = aff else {
            return Ok((Status::Unsat, None));
        };
        let mut a = space.to_assignment(&space.particular);
        if is_identity(&a) {
            if space.dim() == 0 {
                return Ok((Status::Identity, Some(a)));
            }
            let mut c = vec![Rational::from_integer(0.into()); space.dim()];
            c[0] = Rational::from_integer(1.into());
            a = space.to_assignment(&space.point(&c).map_err(|e| e.to_string())?);
        }
        return Ok((Status::Sat, Some(a)));
    }

    if sys.is_empty() {
        // every coefficient vector works
        let a: Assignment = sys.ctx.names().iter().map(|n| (n.clone(), Rational::from_integer(1.into()))).collect();
        return Ok((Status::Sat, Some(a)));
    }
    let mut job = smt_job(sys, prob, settings);
    let first = run_smt(&job, &settings.solver_cmd).map_err(|e| e.to_string())?;
    let model = match first.status {
        SolveStatus::Sat(m) => m,
        SolveStatus::Unsat => return Ok((Status::Unsat, None)),
        SolveStatus::Unknown => return Ok((Status::Unknown, None)),
        SolveStatus::Timeout => return Ok((Status::TimeLimit, None)),
    };
    if !is_identity(&model) {
        return Ok((Status::Sat, Some(model)));
    }
    let present: Vec<String> = coeffs.into_iter().filter(|n| sys.ctx.index_of(n).is_some()).collect();
    job.extra.push(exclude(sys, &model, &present, settings.sort));
    match run_smt(&job, &settings.solver_cmd).map_err(|e| e.to_string())?.status {
        SolveStatus::Sat(other) => Ok((Status::Sat, Some(other))),
        SolveStatus::Unsat => Ok((Status::Identity, Some(model))),
        _ => Ok((Status::Sat, Some(model))),
    }
}

fn check_general(
    sp: &SynthesisProblem,
    model: &Assignment,
    prob: &Problem,
    settings: &Settings,
) -> Result<(ConcreteLoop, Vec<VerificationReport>), String> {
    let lp = instantiate_loop(sp, model).map_err(|e| e.to_string())?;
    let opts = InvariantOptions { max_rounds: settings.max_rounds, ..Default::default() };
    let member = verify_invariants_with(&lp, &prob.invariants, &opts).map_err(|e: VerifyError| e.to_string())?;
    let sim = simulate_loop_with(
        &lp,
        &prob.invariants,
        &SimulateOptions { steps: SIM_STEPS, word_limit: SIM_WORD_LIMIT, seed: settings.seed },
    )
    .map_err(|e| e.to_string())?;
    Ok((lp, vec![member, sim]))
}

fn check_universal(
    prob: &Problem,
    model: &Assignment,
    settings: &Settings,
) -> Result<(ConcreteLoop, Vec<VerificationReport>), String> {
    let template = prob.template().unwrap();
    let maps = template.instantiate(model).map_err(|e| e.to_string())?;
    let guard = match &prob.guard {
        Guard::Poly(h) => h.clone(),
        _ => Polynomial::one(&prob.ctx),
    };
    let lp = ConcreteLoop::new(&prob.ctx, prob.initial.clone(), guard, maps).map_err(|e| e.to_string())?;
    let mut reports = vec![verify_universal(&lp, &prob.invariants).map_err(|e| e.to_string())?];
    if let Some(a) = &prob.initial {
        let shifted: Vec<Polynomial> = prob
            .invariants
            .iter()
            .map(|g| g - &Polynomial::constant(&prob.ctx, g.evaluate(a)))
            .collect();
        let opts = SimulateOptions { steps: SIM_STEPS, word_limit: SIM_WORD_LIMIT, seed: settings.seed };
        reports.push(simulate_loop_with(&lp, &shifted, &opts).map_err(|e| e.to_string())?);
    }
    Ok((lp, reports))
}
