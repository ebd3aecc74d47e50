//! Invariant sets of polynomial maps: the largest subset of `V(g)` whose whole
//! forward orbit stays in `V(g)`, for one map or for every word over several.

use thiserror::Error;

use crate::groebner::{Budget, GroebnerError, RadicalOracle};
use crate::par;
use crate::ring::{compose, PolyMap, Polynomial, RingError, VarContext};

pub const DEFAULT_MAX_ROUNDS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("no fixed point after {rounds} rounds")]
    RoundCap { rounds: usize, trace: Vec<Vec<Polynomial>> },
    #[error("at least one map is required")]
    NoMaps,
    #[error("max_rounds must be at least 1")]
    ZeroRounds,
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone)]
pub struct InvariantOptions {
    pub max_rounds: usize,
    /// Drop composed polynomials already in the radical of the accumulated set
    /// instead of adding the whole round.
    pub prune: bool,
    pub budget: Budget,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        InvariantOptions { max_rounds: DEFAULT_MAX_ROUNDS, prune: false, budget: Budget::unlimited() }
    }
}

/// Where a generator came from: `g[invariant] ∘ F_word`, with `word[0]` the
/// map applied first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub invariant: usize,
    pub word: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct InvariantSetResult {
    pub generators: Vec<Polynomial>,
    pub provenance: Vec<Provenance>,
    /// Number of radical-membership checks performed.
    pub rounds: usize,
    /// The composed sequence tested in each round.
    pub trace: Vec<Vec<Polynomial>>,
}

pub fn invariant_set(g: &[Polynomial], f: &PolyMap, max_rounds: usize) -> Result<InvariantSetResult, InvariantError> {
    invariant_set_with(g, std::slice::from_ref(f), &InvariantOptions { max_rounds, ..Default::default() })
}

pub fn invariant_set_branch(g: &[Polynomial], fs: &[PolyMap], max_rounds: usize) -> Result<InvariantSetResult, InvariantError> {
    invariant_set_with(g, fs, &InvariantOptions { max_rounds, ..Default::default() })
}

pub fn invariant_set_with(g: &[Polynomial], fs: &[PolyMap], opts: &InvariantOptions) -> Result<InvariantSetResult, InvariantError> {
    let ctx = fs.first().ok_or(InvariantError::NoMaps)?.context().clone();
    if opts.max_rounds == 0 {
        return Err(InvariantError::ZeroRounds);
    }
    if fs.iter().any(|f| !f.context().same(&ctx)) || g.iter().any(|p| !p.context().same(&ctx)) {
        return Err(RingError::ContextMismatch.into());
    }
    let budget = &opts.budget;

    let mut generators: Vec<Polynomial> = Vec::new();
    let mut provenance = Vec::new();
    for (i, p) in g.iter().enumerate() {
        if !p.is_zero() {
            generators.push(p.clone());
            provenance.push(Provenance { invariant: i, word: Vec::new() });
        }
    }
    let mut oracle = RadicalOracle::new(&ctx, &generators, budget)?;
    let mut work: Vec<(Polynomial, Provenance)> = generators.iter().cloned().zip(provenance.iter().cloned()).collect();
    let mut trace = Vec::new();
    let mut rounds = 0;

    loop {
        if rounds == opts.max_rounds {
            return Err(InvariantError::RoundCap { rounds, trace });
        }
        rounds += 1;
        let next = step(&work, fs, budget)?;
        trace.push(next.iter().map(|(p, _)| p.clone()).collect());
        let polys: Vec<Polynomial> = next.iter().map(|(p, _)| p.clone()).collect();

        let fresh: Vec<(Polynomial, Provenance)> = if opts.prune {
            let inside = par::try_map(&polys, |p| oracle.contains(p, budget))?;
            next.into_iter().zip(inside).filter(|(_, ok)| !ok).map(|(x, _)| x).collect()
        } else if oracle.contains_all(&polys, budget)? {
            Vec::new()
        } else {
            next
        };
        if fresh.is_empty() {
            return Ok(InvariantSetResult { generators, provenance, rounds, trace });
        }
        let added: Vec<Polynomial> = fresh.iter().map(|(p, _)| p.clone()).collect();
        oracle = oracle.extended(&added, budget)?;
        for (p, pv) in &fresh {
            generators.push(p.clone());
            provenance.push(pv.clone());
        }
        work = fresh;
    }
}

/// Compose every working polynomial with every map, dropping zeros.
fn step(
    work: &[(Polynomial, Provenance)],
    fs: &[PolyMap],
    budget: &Budget,
) -> Result<Vec<(Polynomial, Provenance)>, InvariantError> {
    budget.check()?;
    let polys: Vec<Polynomial> = work.iter().map(|(p, _)| p.clone()).collect();
    let per_map = par::try_map(fs, |f| compose(&polys, f))?;
    let mut out = Vec::new();
    for (j, composed) in per_map.into_iter().enumerate() {
        for (p, (_, pv)) in composed.into_iter().zip(work) {
            if p.is_zero() {
                continue;
            }
            let mut word = Vec::with_capacity(pv.word.len() + 1);
            word.push(j);
            word.extend_from_slice(&pv.word);
            out.push((p, Provenance { invariant: pv.invariant, word }));
        }
    }
    Ok(out)
}

/// Re-check the termination condition: composing every generator with every
/// map stays inside the radical of the generators.
pub fn is_fixed_point(generators: &[Polynomial], fs: &[PolyMap], budget: &Budget) -> Result<bool, InvariantError> {
    let Some(f0) = fs.first() else {
        return Err(InvariantError::NoMaps);
    };
    let ctx: VarContext = f0.context().clone();
    let oracle = RadicalOracle::new(&ctx, generators, budget)?;
    for f in fs {
        let composed: Vec<Polynomial> = compose(generators, f)?.into_iter().filter(|p| !p.is_zero()).collect();
        if !oracle.contains_all(&composed, budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}
