//! Finding points of generated systems: SMT-LIB export and an external solver
//! driver, finiteness classification, and a complete rational solver for
//! zero-dimensional systems.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::groebner::{buchberger_with, solution_count, Budget, GroebnerError, MonomialOrder, SolutionCount};
use crate::ring::{Polynomial, Rational, VarContext};
use crate::synth::{Assignment, PolynomialSystem};

pub const DEFAULT_TIMEOUT_SECS: u64 = 300;
pub const DEFAULT_ROOT_CANDIDATE_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("the system has no equations")]
    EmptySystem,
    #[error("solver command `{0}` could not be started: {1}")]
    SolverNotFound(String, String),
    #[error("solver I/O failed: {0}")]
    Io(String),
    #[error("malformed solver answer: {reason}\n{raw}")]
    MalformedModel { reason: String, raw: String },
    #[error("solver model violates equation `{0}`")]
    UnsoundModel(String),
    #[error("the system is not zero-dimensional")]
    NotZeroDimensional,
    #[error("rational root search needs more than {0} candidates")]
    CapExceeded(u64),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumberSort {
    #[default]
    Integer,
    Real,
}

/// Extra assertion ruling out trivial solutions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum NonzeroPolicy {
    /// Some unknown is nonzero.
    #[default]
    AnyUnknown,
    /// In every group some unknown is nonzero.
    PerGroup(Vec<Vec<String>>),
    None,
    /// Raw SMT-LIB assertions, each emitted as `(assert …)`.
    Custom(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmtJob {
    pub system: PolynomialSystem,
    pub sort: NumberSort,
    pub nonzero: NonzeroPolicy,
    /// Further raw assertions, emitted after the nonzero policy.
    pub extra: Vec<String>,
    pub timeout: Duration,
}

impl SmtJob {
    pub fn new(system: PolynomialSystem) -> Self {
        SmtJob {
            system,
            sort: NumberSort::default(),
            nonzero: NonzeroPolicy::default(),
            extra: Vec::new(),
            timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Sat(Assignment),
    Unsat,
    Unknown,
    Timeout,
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Sat(_) => "sat",
            SolveStatus::Unsat => "unsat",
            SolveStatus::Unknown => "unknown",
            SolveStatus::Timeout => "TL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub wall_time: Duration,
}

const RESERVED: &[&str] = &[
    "and", "or", "not", "xor", "ite", "let", "forall", "exists", "true", "false", "distinct", "assert", "par", "as", "_",
    "!", "div", "mod", "abs",
];

/// `name` as an SMT-LIB symbol, quoted when needed.
pub fn symbol(name: &str) -> String {
    let plain = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain && !RESERVED.contains(&name) {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn literal(n: &BigInt, sort: NumberSort) -> String {
    let s = match sort {
        NumberSort::Integer => n.abs().to_string(),
        NumberSort::Real => format!("{}.0", n.abs()),
    };
    if n.is_negative() {
        format!("(- {s})")
    } else {
        s
    }
}

/// Integer multiple of `p` with the denominators cleared.
fn cleared(p: &Polynomial) -> Vec<(Vec<(usize, u32)>, BigInt)> {
    let den = p.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    p.terms()
        .rev()
        .map(|(m, c)| (m.iter().collect(), (c * Rational::from_integer(den.clone())).to_integer()))
        .collect()
}

fn render_term(ctx: &VarContext, m: &[(usize, u32)], c: &BigInt, sort: NumberSort) -> String {
    let mut factors = Vec::new();
    if !c.is_one() || m.is_empty() {
        factors.push(literal(c, sort));
    }
    for &(v, e) in m {
        for _ in 0..e {
            factors.push(symbol(ctx.name(v)));
        }
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        format!("(* {})", factors.join(" "))
    }
}

fn sum(parts: Vec<String>) -> String {
    if parts.len() == 1 {
        parts.into_iter().next().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

/// Prefix form of `p` times the lcm of its denominators.
pub fn render_prefix(p: &Polynomial, sort: NumberSort) -> String {
    let ctx = p.context();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (m, c) in cleared(p) {
        if c.is_negative() {
            neg.push(render_term(ctx, &m, &-c, sort));
        } else {
            pos.push(render_term(ctx, &m, &c, sort));
        }
    }
    match (pos.is_empty(), neg.is_empty()) {
        (true, true) => literal(&BigInt::zero(), sort),
        (false, true) => sum(pos),
        (true, false) => format!("(- {})", sum(neg)),
        (false, false) => format!("(- {} {})", sum(pos), neg.join(" ")),
    }
}

/// SMT-LIB 2.6 script asserting every equation and the nonzero policy.
pub fn emit_smtlib(job: &SmtJob) -> Result<String, SolveError> {
    let sys = &job.system;
    if sys.is_empty() {
        return Err(SolveError::EmptySystem);
    }
    let (logic, sort) = match job.sort {
        NumberSort::Integer => ("QF_NIA", "Int"),
        NumberSort::Real => ("QF_NRA", "Real"),
    };
    let zero = literal(&BigInt::zero(), job.sort);
    let mut out = String::new();
    writeln!(out, "(set-logic {logic})").unwrap();
    for name in sys.ctx.names() {
        writeln!(out, "(declare-const {} {sort})", symbol(name)).unwrap();
    }
    for e in &sys.equations {
        writeln!(out, "(assert (= {} {zero}))", render_prefix(e, job.sort)).unwrap();
    }
    let nonzero = |names: &[String]| -> String {
        let parts: Vec<String> = names.iter().map(|n| format!("(not (= {} {zero}))", symbol(n))).collect();
        match parts.len() {
            0 => "false".to_string(),
            1 => parts[0].clone(),
            _ => format!("(or {})", parts.join(" ")),
        }
    };
    match &job.nonzero {
        NonzeroPolicy::AnyUnknown => writeln!(out, "(assert {})", nonzero(sys.ctx.names())).unwrap(),
        NonzeroPolicy::PerGroup(groups) => {
            for g in groups {
                writeln!(out, "(assert {})", nonzero(g)).unwrap();
            }
        }
        NonzeroPolicy::None => {}
        NonzeroPolicy::Custom(asserts) => {
            for a in asserts {
                writeln!(out, "(assert {a})").unwrap();
            }
        }
    }
    for a in &job.extra {
        writeln!(out, "(assert {a})").unwrap();
    }
    writeln!(out, "(check-sat)").unwrap();
    writeln!(out, "(get-model)").unwrap();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' | ')' => {
                toks.push(c.to_string());
                chars.next();
            }
            '|' => {
                chars.next();
                let mut s = String::new();
                for d in chars.by_ref() {
                    if d == '|' {
                        break;
                    }
                    s.push(d);
                }
                toks.push(s);
            }
            '"' => {
                chars.next();
                let mut s = String::from("\"");
                for d in chars.by_ref() {
                    s.push(d);
                    if d == '"' {
                        break;
                    }
                }
                toks.push(s);
            }
            ';' => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                toks.push(s);
            }
        }
    }
    toks
}

pub(crate) fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in tokenize(text) {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack.last_mut().ok_or("unbalanced `)`")?.push(Sexp::List(done));
            }
            _ => stack.last_mut().unwrap().push(Sexp::Atom(t)),
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

fn value(e: &Sexp) -> Result<Rational, String> {
    match e {
        Sexp::Atom(a) => {
            if let Some((i, f)) = a.split_once('.') {
                let digits = format!("{i}{f}");
                let n: BigInt = digits.parse().map_err(|_| format!("bad decimal `{a}`"))?;
                Ok(Rational::new(n, num_traits::pow(BigInt::from(10), f.len())))
            } else {
                a.parse::<BigInt>().map(Rational::from_integer).map_err(|_| format!("bad numeral `{a}`"))
            }
        }
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Ok(-value(x)?),
            [Sexp::Atom(op), x, y] if op == "/" => {
                let d = value(y)?;
                if d.is_zero() {
                    return Err("division by zero in model".into());
                }
                Ok(value(x)? / d)
            }
            [Sexp::Atom(op), x, rest @ ..] if op == "-" => {
                let mut acc = value(x)?;
                for r in rest {
                    acc -= value(r)?;
                }
                Ok(acc)
            }
            _ => Err("unsupported model value".into()),
        },
    }
}

fn collect_defs(e: &Sexp, out: &mut Assignment) -> Result<(), String> {
    if let Sexp::List(items) = e {
        if let [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), _sort, v] = items.as_slice() {
            if kw == "define-fun" && args.is_empty() {
                out.insert(name.clone(), value(v)?);
                return Ok(());
            }
        }
        for i in items {
            collect_defs(i, out)?;
        }
    }
    Ok(())
}

/// Status and, when `sat`, the model of a solver transcript.
pub(crate) fn parse_answer(raw: &str) -> Result<SolveStatus, String> {
    let text = raw.trim_start();
    let (head, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    match head {
        "sat" => {
            let mut model = Assignment::new();
            for e in parse_sexps(rest)? {
                if let Sexp::List(items) = &e {
                    if matches!(items.first(), Some(Sexp::Atom(a)) if a == "error") {
                        return Err("solver reported an error".into());
                    }
                }
                collect_defs(&e, &mut model)?;
            }
            Ok(SolveStatus::Sat(model))
        }
        "unsat" => Ok(SolveStatus::Unsat),
        "unknown" => Ok(SolveStatus::Unknown),
        "" => Err("empty answer".into()),
        other => Err(format!("unexpected status `{other}`")),
    }
}

/// Runs `solver_command` (split on whitespace) on the job's script. A `sat`
/// model is completed with zeros for unknowns the solver left out and then
/// checked against every equation.
pub fn run_smt(job: &SmtJob, solver_command: &str) -> Result<SolveOutcome, SolveError> {
    let script = emit_smtlib(job)?;
    let mut parts = solver_command.split_whitespace();
    let prog = parts.next().ok_or_else(|| SolveError::SolverNotFound(solver_command.into(), "empty command".into()))?;
    let start = Instant::now();
    let mut child = Command::new(prog)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SolveError::SolverNotFound(solver_command.into(), e.to_string()))?;
    let mut stdin = child.stdin.take().unwrap();
    let writer = thread::spawn(move || stdin.write_all(script.as_bytes()));
    let mut stdout = child.stdout.take().unwrap();
    let reader = thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let deadline = start + job.timeout;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                let _ = writer.join();
                let _ = reader.join();
                return Ok(SolveOutcome { status: SolveStatus::Timeout, wall_time: start.elapsed() });
            }
            Ok(None) => thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(SolveError::Io(e.to_string())),
        }
    }
    let wall_time = start.elapsed();
    // a solver that exits early may close its input first
    let _ = writer.join();
    let raw = reader
        .join()
        .map_err(|_| SolveError::Io("reader thread panicked".into()))?
        .map_err(|e| SolveError::Io(e.to_string()))?;
    let status = parse_answer(&raw).map_err(|reason| SolveError::MalformedModel { reason, raw: raw.clone() })?;
    let status = match status {
        SolveStatus::Sat(mut model) => {
            let sys = &job.system;
            model.retain(|k, _| sys.ctx.index_of(k).is_some());
            for n in sys.ctx.names() {
                model.entry(n.clone()).or_insert_with(Rational::zero);
            }
            if job.sort == NumberSort::Integer && model.values().any(|v| !v.is_integer()) {
                return Err(SolveError::MalformedModel { reason: "non-integer value under integer sort".into(), raw });
            }
            check_model(sys, &model)?;
            SolveStatus::Sat(model)
        }
        s => s,
    };
    Ok(SolveOutcome { status, wall_time })
}

/// Every equation vanishes exactly at `model`.
pub fn check_model(sys: &PolynomialSystem, model: &Assignment) -> Result<(), SolveError> {
    let pt: Vec<Rational> = sys.ctx.names().iter().map(|n| model.get(n).cloned().unwrap_or_else(Rational::zero)).collect();
    for e in &sys.equations {
        if !e.evaluate(&pt).is_zero() {
            return Err(SolveError::UnsoundModel(e.to_string()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Finiteness {
    Finite(u64),
    Infinite,
    Empty,
}

impl std::fmt::Display for Finiteness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Finiteness::Finite(n) => write!(f, "{n}"),
            Finiteness::Infinite => write!(f, "inf"),
            Finiteness::Empty => write!(f, "0"),
        }
    }
}

pub fn classify_finiteness(sys: &PolynomialSystem) -> Result<Finiteness, SolveError> {
    classify_finiteness_with(sys, &Budget::unlimited())
}

/// Number of complex solutions counted with multiplicity.
pub fn classify_finiteness_with(sys: &PolynomialSystem, budget: &Budget) -> Result<Finiteness, SolveError> {
    let gb = buchberger_with(&sys.ctx, &sys.equations, MonomialOrder::Grevlex, budget)?;
    if gb.is_unit() {
        return Ok(Finiteness::Empty);
    }
    Ok(match solution_count(&gb) {
        SolutionCount::Finite(n) => Finiteness::Finite(n),
        SolutionCount::Infinite => Finiteness::Infinite,
    })
}

pub fn solve_zero_dim_rational(sys: &PolynomialSystem) -> Result<Vec<Vec<Rational>>, SolveError> {
    solve_zero_dim_rational_with(sys, DEFAULT_ROOT_CANDIDATE_CAP, &Budget::unlimited())
}

/// All rational points of a zero-dimensional system, in lexicographic order.
pub fn solve_zero_dim_rational_with(
    sys: &PolynomialSystem,
    cap: u64,
    budget: &Budget,
) -> Result<Vec<Vec<Rational>>, SolveError> {
    match classify_finiteness_with(sys, budget)? {
        Finiteness::Empty => return Ok(Vec::new()),
        Finiteness::Infinite => return Err(SolveError::NotZeroDimensional),
        Finiteness::Finite(_) => {}
    }
    let mut out = solve_rec(&sys.ctx, &sys.equations, cap, budget)?;
    out.sort();
    out.dedup();
    Ok(out)
}

fn solve_rec(ctx: &VarContext, eqs: &[Polynomial], cap: u64, budget: &Budget) -> Result<Vec<Vec<Rational>>, SolveError> {
    let n = ctx.len();
    let gb = buchberger_with(ctx, eqs, MonomialOrder::Lex, budget)?;
    if gb.is_unit() {
        return Ok(Vec::new());
    }
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    let last = n - 1;
    let uni = gb
        .generators()
        .iter()
        .find(|g| g.uses_only(|v| v == last))
        .ok_or(SolveError::NotZeroDimensional)?;
    let keep: Vec<usize> = (0..last).collect();
    let sub = ctx.restrict(&keep);
    let mut out = Vec::new();
    for r in rational_roots(uni, cap)? {
        budget.check()?;
        let reduced: Vec<Polynomial> = gb
            .generators()
            .iter()
            .map(|g| g.eval_partial(&[(last, r.clone())]).move_to(&sub, |i| (i < last).then_some(i)))
            .filter(|g| !g.is_zero())
            .collect();
        for mut pt in solve_rec(&sub, &reduced, cap, budget)? {
            pt.push(r.clone());
            out.push(pt);
        }
    }
    Ok(out)
}

/// Rational roots of a univariate polynomial, without multiplicity.
pub fn rational_roots(p: &Polynomial, cap: u64) -> Result<Vec<Rational>, SolveError> {
    let den = p.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    let deg = p.total_degree().unwrap_or(0) as usize;
    let mut coeffs = vec![BigInt::zero(); deg + 1];
    for (m, c) in p.terms() {
        coeffs[m.degree() as usize] = (c * Rational::from_integer(den.clone())).to_integer();
    }
    let mut roots = Vec::new();
    let low = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
    if low > 0 {
        roots.push(Rational::zero());
    }
    let coeffs = &coeffs[low..];
    if coeffs.len() > 1 {
        let a0 = &coeffs[0];
        let ad = &coeffs[coeffs.len() - 1];
        let ps = divisors(a0, cap)?;
        let qs = divisors(ad, cap)?;
        let count = 2 * ps.len() as u64 * qs.len() as u64;
        if count > cap {
            return Err(SolveError::CapExceeded(cap));
        }
        let mut cands: Vec<Rational> = Vec::new();
        for pp in &ps {
            for q in &qs {
                let r = Rational::new(pp.clone(), q.clone());
                cands.push(-r.clone());
                cands.push(r);
            }
        }
        cands.sort();
        cands.dedup();
        for r in cands {
            let mut acc = Rational::zero();
            for c in coeffs.iter().rev() {
                acc = acc * &r + Rational::from_integer(c.clone());
            }
            if acc.is_zero() {
                roots.push(r);
            }
        }
    }
    roots.sort();
    Ok(roots)
}

/// Positive divisors of `n ≠ 0` by trial division, at most `cap` steps.
fn divisors(n: &BigInt, cap: u64) -> Result<Vec<BigInt>, SolveError> {
    let mut m = n.abs();
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut d = BigInt::from(2);
    let mut steps = 0u64;
    while &d * &d <= m {
        steps += 1;
        if steps > cap {
            return Err(SolveError::CapExceeded(cap));
        }
        let mut e = 0;
        while (&m % &d).is_zero() {
            m /= &d;
            e += 1;
        }
        if e > 0 {
            factors.push((d.clone(), e));
        }
        d += 1;
    }
    if m > BigInt::one() {
        factors.push((m, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (f, e) in factors {
        let mut next = Vec::new();
        for x in &divs {
            let mut pw = BigInt::one();
            for _ in 0..=e {
                next.push(x * &pw);
                pw *= &f;
            }
        }
        if next.len() as u64 > cap {
            return Err(SolveError::CapExceeded(cap));
        }
        divs = next;
    }
    Ok(divs)
}
