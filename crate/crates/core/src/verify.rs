//! Independent checks that a concrete loop satisfies its invariants: exact
//! polynomial identity, invariant-set membership of the initial value, and
//! exact simulation over branch words.

use std::fmt;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::invariant::{invariant_set_with, InvariantError, InvariantOptions};
use crate::par;
use crate::ring::{compose_one, PolyMap, Polynomial, Rational, RingError, VarClass};
use crate::synth::ConcreteLoop;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("the loop has no concrete initial value")]
    NoInitial,
    #[error("initial value has {got} entries, expected {expected}")]
    InitialLength { got: usize, expected: usize },
    #[error("word limit must be at least 1")]
    WordLimit,
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    UniversalIdentity,
    InvariantSetMembership,
    Simulation,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::UniversalIdentity => "universal-identity",
            Method::InvariantSetMembership => "invariant-set-membership",
            Method::Simulation => "simulation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// `g_i ∘ F_j − g_i ≠ 0`.
    Identity { invariant: usize, branch: usize, residual: Polynomial },
    /// A generator of the invariant set not vanishing at `(a, 1)`.
    Generator { generator: Polynomial, value: Rational },
    /// `g_i` fails at the state reached after `step` steps of `word`.
    Trace { word: Vec<usize>, step: usize, state: Vec<Rational>, invariant: usize, value: Rational },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Identity { invariant, branch, residual } => {
                write!(f, "g{} o F{} - g{} = {residual}", invariant + 1, branch + 1, invariant + 1)
            }
            Witness::Generator { generator, value } => write!(f, "{generator} evaluates to {value}"),
            Witness::Trace { word, step, state, invariant, value } => {
                let w: Vec<String> = word[..*step].iter().map(|b| (b + 1).to_string()).collect();
                let s: Vec<String> = state.iter().map(|v| v.to_string()).collect();
                write!(f, "after [{}] state ({}) gives g{} = {value}", w.join(" "), s.join(", "), invariant + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub method: Method,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    /// Number of branch words examined by simulation.
    pub words: usize,
    /// Seed used when words were sampled rather than enumerated.
    pub seed: Option<u64>,
}

impl VerificationReport {
    fn new(method: Method, witnesses: Vec<Witness>) -> Self {
        VerificationReport { method, passed: witnesses.is_empty(), witnesses, words: 0, seed: None }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.method, if self.passed { "pass" } else { "fail" })?;
        for w in &self.witnesses {
            write!(f, "\n  {w}")?;
        }
        Ok(())
    }
}

/// Pass iff `g_i ∘ F_j = g_i` for every invariant and branch.
pub fn verify_universal(lp: &ConcreteLoop, g: &[Polynomial]) -> Result<VerificationReport, VerifyError> {
    let mut witnesses = Vec::new();
    for (j, f) in lp.maps.iter().enumerate() {
        for (i, gi) in g.iter().enumerate() {
            let residual = compose_one(gi, f)?.try_sub(gi)?;
            if !residual.is_zero() {
                witnesses.push(Witness::Identity { invariant: i, branch: j, residual });
            }
        }
    }
    Ok(VerificationReport::new(Method::UniversalIdentity, witnesses))
}

pub fn verify_invariants(lp: &ConcreteLoop, g: &[Polynomial]) -> Result<VerificationReport, VerifyError> {
    verify_invariants_with(lp, g, &InvariantOptions::default())
}

/// Computes the invariant set of `(z g_1, …, z g_m)` under the maps
/// `(x, z) ↦ (F_i(x), z h(x))` and evaluates its generators at `(a, 1)`.
pub fn verify_invariants_with(
    lp: &ConcreteLoop,
    g: &[Polynomial],
    opts: &InvariantOptions,
) -> Result<VerificationReport, VerifyError> {
    let a = initial(lp)?;
    let ctx = &lp.ctx;
    let zname = ctx.fresh_name("z");
    let ext = ctx.extend([(zname, VarClass::GuardFlag)])?;
    let flag = ctx.len();
    let lift = |p: &Polynomial| p.move_to(&ext, Some);
    let z = Polynomial::var(&ext, flag);
    let zh = &z * &lift(&lp.guard);
    let maps = lp
        .maps
        .iter()
        .map(|m| PolyMap::new(&ext, m.components().iter().map(lift).collect())?.with_extra(flag, zh.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let zg: Vec<Polynomial> = g.iter().map(|gi| &z * &lift(gi)).filter(|p| !p.is_zero()).collect();
    if zg.is_empty() {
        return Ok(VerificationReport::new(Method::InvariantSetMembership, Vec::new()));
    }
    let set = invariant_set_with(&zg, &maps, opts)?;
    let mut point = a.to_vec();
    point.push(Rational::one());
    let witnesses = set
        .generators
        .into_iter()
        .filter_map(|q| {
            let value = q.evaluate(&point);
            (!value.is_zero()).then_some(Witness::Generator { generator: q, value })
        })
        .collect();
    Ok(VerificationReport::new(Method::InvariantSetMembership, witnesses))
}

fn initial(lp: &ConcreteLoop) -> Result<&[Rational], VerifyError> {
    let a = lp.initial.as_deref().ok_or(VerifyError::NoInitial)?;
    if a.len() != lp.ctx.len() {
        return Err(VerifyError::InitialLength { got: a.len(), expected: lp.ctx.len() });
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulateOptions {
    pub steps: usize,
    pub word_limit: usize,
    pub seed: u64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions { steps: 8, word_limit: 256, seed: 0 }
    }
}

pub fn simulate_loop(
    lp: &ConcreteLoop,
    g: &[Polynomial],
    steps: usize,
    word_limit: usize,
) -> Result<VerificationReport, VerifyError> {
    simulate_loop_with(lp, g, &SimulateOptions { steps, word_limit, ..Default::default() })
}

/// Runs the loop exactly along branch words of length `steps`: every word
/// when there are at most `word_limit` of them, otherwise `word_limit` words
/// drawn with `seed`. Each visited state must satisfy every `g_i`; a word
/// ends early at the first state where the guard vanishes.
pub fn simulate_loop_with(
    lp: &ConcreteLoop,
    g: &[Polynomial],
    opts: &SimulateOptions,
) -> Result<VerificationReport, VerifyError> {
    if opts.word_limit < 1 {
        return Err(VerifyError::WordLimit);
    }
    let a = initial(lp)?.to_vec();
    let k = lp.maps.len();
    let total = (k as u128).checked_pow(opts.steps as u32);
    let enumerate = total.is_some_and(|t| t <= opts.word_limit as u128);
    let check = |word: &[usize], step: usize, state: &[Rational]| -> Option<Witness> {
        g.iter().enumerate().find_map(|(i, gi)| {
            let value = gi.evaluate(state);
            (!value.is_zero()).then(|| Witness::Trace {
                word: word.to_vec(),
                step,
                state: state.to_vec(),
                invariant: i,
                value,
            })
        })
    };

    if enumerate {
        // breadth first; words sharing a prefix share its states
        let mut level: Vec<(Vec<usize>, Vec<Rational>)> = vec![(Vec::new(), a)];
        let mut words = 0;
        for step in 0..=opts.steps {
            let results = par::map(&level, |(w, s)| check(w, step, s).map(Err).unwrap_or(Ok(lp.guard.evaluate(s).is_zero())));
            let mut next = Vec::new();
            for ((w, s), r) in level.iter().zip(results) {
                match r {
                    Err(wit) => {
                        let mut rep = VerificationReport::new(Method::Simulation, vec![wit]);
                        rep.words = words + 1;
                        return Ok(rep);
                    }
                    Ok(true) => words += k.pow((opts.steps - step) as u32),
                    Ok(false) if step == opts.steps => words += 1,
                    Ok(false) => {
                        for (b, f) in lp.maps.iter().enumerate() {
                            let mut nw = w.clone();
                            nw.push(b);
                            next.push((nw, f.apply(s)));
                        }
                    }
                }
            }
            level = next;
        }
        let mut rep = VerificationReport::new(Method::Simulation, Vec::new());
        rep.words = words;
        return Ok(rep);
    }

    let mut rng = StdRng::seed_from_u64(opts.seed);
    let words: Vec<Vec<usize>> =
        (0..opts.word_limit).map(|_| (0..opts.steps).map(|_| rng.gen_range(0..k)).collect()).collect();
    let results = par::map(&words, |w| {
        let mut s = a.clone();
        for step in 0..=opts.steps {
            if let Some(wit) = check(w, step, &s) {
                return Some(wit);
            }
            if step == opts.steps || lp.guard.evaluate(&s).is_zero() {
                break;
            }
            s = lp.maps[w[step]].apply(&s);
        }
        None
    });
    let witnesses: Vec<Witness> = results.into_iter().flatten().take(1).collect();
    let mut rep = VerificationReport::new(Method::Simulation, witnesses);
    rep.words = words.len();
    rep.seed = Some(opts.seed);
    Ok(rep)
}

#[cfg(test)]
mod tests;
