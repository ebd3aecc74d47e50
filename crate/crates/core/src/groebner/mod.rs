//! Gröbner bases: normal forms, ideal and radical membership, dimension and
//! elimination.

mod engine;
mod order;

use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::par;
use crate::ring::{Monomial, Polynomial, Rational, RingError, VarClass, VarContext};
use engine::{from_ipoly, to_ipoly, Engine, IPoly, Outcome};

pub use order::MonomialOrder;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroebnerError {
    #[error("computation interrupted: deadline reached")]
    Deadline,
    #[error("computation cancelled")]
    Cancelled,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Cooperative limit on a computation: an optional deadline and an optional
/// shared cancellation flag. Long-running loops poll it.
#[derive(Debug, Clone, Default)]
pub struct Budget {
    deadline: Option<Instant>,
    cancel: Option<Arc<AtomicBool>>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn until(deadline: Instant) -> Self {
        Budget { deadline: Some(deadline), cancel: None }
    }

    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }

    pub fn check(&self) -> Result<(), GroebnerError> {
        if let Some(flag) = &self.cancel {
            if flag.load(AtomicOrdering::Relaxed) {
                return Err(GroebnerError::Cancelled);
            }
        }
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(GroebnerError::Deadline),
            _ => Ok(()),
        }
    }
}

/// Reduced Gröbner basis of an ideal for a fixed context and order.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    order: MonomialOrder,
    ctx: VarContext,
    gens: Vec<Polynomial>,
    source: Vec<Polynomial>,
    internal: Vec<IPoly>,
}

impl GroebnerBasis {
    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn context(&self) -> &VarContext {
        &self.ctx
    }

    /// Monic reduced generators, ascending by leading monomial.
    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn source_generators(&self) -> &[Polynomial] {
        &self.source
    }

    /// The ideal is the whole ring.
    pub fn is_unit(&self) -> bool {
        self.gens.len() == 1 && self.gens[0].is_constant()
    }

    /// The zero ideal.
    pub fn is_zero_ideal(&self) -> bool {
        self.gens.is_empty()
    }

    /// Leading monomials under this basis's order, as dense exponent vectors.
    pub fn leading_exponents(&self) -> Vec<Vec<u32>> {
        self.internal.iter().map(|p| p.lm()[1..].to_vec()).collect()
    }

    /// Leading monomial of each generator (under this basis's order).
    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.internal.iter().map(|p| Monomial::from_dense(&p.lm()[1..])).collect()
    }

    pub fn contains(&self, p: &Polynomial) -> Result<bool, GroebnerError> {
        Ok(normal_form(p, self)?.is_zero())
    }

    fn engine<'b>(&self, budget: &'b Budget) -> Engine<'b> {
        let mut e = Engine::new(self.order, budget);
        e.seed_basis(self.internal.clone());
        e
    }
}

fn finish(ctx: &VarContext, order: MonomialOrder, source: Vec<Polynomial>, internal: Vec<IPoly>) -> GroebnerBasis {
    let gens = internal
        .iter()
        .map(|p| {
            let lc = Rational::from_integer(p.lc().clone());
            from_ipoly(p, ctx, &lc)
        })
        .collect();
    GroebnerBasis { order, ctx: ctx.clone(), gens, source, internal }
}

fn check_ctx(ctx: &VarContext, ps: &[Polynomial]) -> Result<(), GroebnerError> {
    if ps.iter().any(|p| !p.context().same(ctx)) {
        return Err(RingError::ContextMismatch.into());
    }
    Ok(())
}

/// Reduced Gröbner basis of `⟨gens⟩` over `ctx`.
pub fn buchberger(ctx: &VarContext, gens: &[Polynomial], order: MonomialOrder) -> Result<GroebnerBasis, GroebnerError> {
    buchberger_with(ctx, gens, order, &Budget::unlimited())
}

pub fn buchberger_with(
    ctx: &VarContext,
    gens: &[Polynomial],
    order: MonomialOrder,
    budget: &Budget,
) -> Result<GroebnerBasis, GroebnerError> {
    check_ctx(ctx, gens)?;
    let n = ctx.len();
    let mut eng = Engine::new(order, budget);
    let inputs = gens.iter().map(|g| to_ipoly(g, n, order).0).collect();
    eng.add_and_run(inputs, false)?;
    let reduced = eng.reduced_basis()?;
    Ok(finish(ctx, order, gens.to_vec(), reduced))
}

/// Extend a basis by more generators, reusing the pairs already processed.
pub fn extend_basis(gb: &GroebnerBasis, more: &[Polynomial], budget: &Budget) -> Result<GroebnerBasis, GroebnerError> {
    check_ctx(&gb.ctx, more)?;
    let n = gb.ctx.len();
    let mut eng = gb.engine(budget);
    let inputs = more.iter().map(|g| to_ipoly(g, n, gb.order).0).collect();
    eng.add_and_run(inputs, false)?;
    let reduced = eng.reduced_basis()?;
    let mut source = gb.source.clone();
    source.extend_from_slice(more);
    Ok(finish(&gb.ctx, gb.order, source, reduced))
}

/// Remainder of `p` on division by `gb`; zero iff `p ∈ ⟨gb⟩`.
pub fn normal_form(p: &Polynomial, gb: &GroebnerBasis) -> Result<Polynomial, GroebnerError> {
    check_ctx(&gb.ctx, std::slice::from_ref(p))?;
    if p.is_zero() {
        return Ok(p.clone());
    }
    let budget = Budget::unlimited();
    let mut eng = gb.engine(&budget);
    let (ip, s0) = to_ipoly(p, gb.ctx.len(), gb.order);
    let (r, s1) = eng.reduce(ip, true)?;
    Ok(from_ipoly(&r, &gb.ctx, &(s0 * s1)))
}

fn reduces_to_zero(p: &Polynomial, gb: &GroebnerBasis, budget: &Budget) -> Result<bool, GroebnerError> {
    if p.is_zero() {
        return Ok(true);
    }
    let mut eng = gb.engine(budget);
    let (ip, _) = to_ipoly(p, gb.ctx.len(), gb.order);
    Ok(eng.reduce(ip, false)?.0.is_zero())
}

/// Every S-polynomial of the generators reduces to zero.
pub fn satisfies_buchberger_criterion(gb: &GroebnerBasis) -> Result<bool, GroebnerError> {
    let g = &gb.gens;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            let s = s_polynomial(&g[i], &g[j], gb)?;
            if !normal_form(&s, gb)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// S-polynomial of two generators under the basis's order, computed directly
/// with rational arithmetic.
pub fn s_polynomial(f: &Polynomial, g: &Polynomial, gb: &GroebnerBasis) -> Result<Polynomial, GroebnerError> {
    let n = gb.ctx.len();
    let lead = |p: &Polynomial| -> (Monomial, Rational) {
        let (ip, s) = to_ipoly(p, n, gb.order);
        let m = Monomial::from_dense(&ip.lm()[1..]);
        let c = Rational::from_integer(ip.lc().clone()) / s;
        (m, c)
    };
    let (mf, cf) = lead(f);
    let (mg, cg) = lead(g);
    let l = Monomial::from_pairs((0..n).map(|i| (i, mf.exponent(i).max(mg.exponent(i)))));
    let qf = Monomial::from_pairs((0..n).map(|i| (i, l.exponent(i) - mf.exponent(i))));
    let qg = Monomial::from_pairs((0..n).map(|i| (i, l.exponent(i) - mg.exponent(i))));
    Ok(f.mul_monomial(&qf, &cf.recip()).try_sub(&g.mul_monomial(&qg, &cg.recip()))?)
}

/// Prepared radical-membership oracle for `√⟨S⟩`.
///
/// Holds a grevlex basis of `S` in the context extended by a fresh auxiliary
/// variable `t` placed last. Queries use the Rabinowitsch test: `p ∈ √⟨S⟩`
/// iff `1 ∈ ⟨S, 1 − t·p⟩`.
#[derive(Clone, Debug)]
pub struct RadicalOracle {
    base: VarContext,
    ext: VarContext,
    t: usize,
    gb: GroebnerBasis,
}

impl RadicalOracle {
    pub fn new(ctx: &VarContext, s: &[Polynomial], budget: &Budget) -> Result<Self, GroebnerError> {
        check_ctx(ctx, s)?;
        let tname = ctx.fresh_name("t");
        let ext = ctx.extend([(tname, VarClass::Auxiliary)])?;
        let lifted: Vec<Polynomial> = s.iter().map(|p| p.move_to(&ext, Some)).collect();
        let gb = buchberger_with(&ext, &lifted, MonomialOrder::Grevlex, budget)?;
        Ok(RadicalOracle { base: ctx.clone(), t: ctx.len(), ext, gb })
    }

    /// Oracle for `S ∪ more`, reusing the existing basis.
    pub fn extended(&self, more: &[Polynomial], budget: &Budget) -> Result<Self, GroebnerError> {
        check_ctx(&self.base, more)?;
        let lifted: Vec<Polynomial> = more.iter().map(|p| p.move_to(&self.ext, Some)).collect();
        let gb = extend_basis(&self.gb, &lifted, budget)?;
        Ok(RadicalOracle { base: self.base.clone(), ext: self.ext.clone(), t: self.t, gb })
    }

    /// The ideal is the whole ring (the variety is empty).
    pub fn is_unit(&self) -> bool {
        self.gb.is_unit()
    }

    /// Basis of `⟨S⟩` (in the context extended by `t`).
    pub fn basis(&self) -> &GroebnerBasis {
        &self.gb
    }

    pub fn contains(&self, p: &Polynomial, budget: &Budget) -> Result<bool, GroebnerError> {
        check_ctx(&self.base, std::slice::from_ref(p))?;
        if p.is_zero() || self.gb.is_unit() {
            return Ok(true);
        }
        let lifted = p.move_to(&self.ext, Some);
        // plain membership first: cheap and sufficient
        if reduces_to_zero(&lifted, &self.gb, budget)? {
            return Ok(true);
        }
        let t = Polynomial::var(&self.ext, self.t);
        let rab = Polynomial::one(&self.ext) - &t * &lifted;
        let mut eng = self.gb.engine(budget);
        let (ip, _) = to_ipoly(&rab, self.ext.len(), MonomialOrder::Grevlex);
        Ok(eng.add_and_run(vec![ip], true)? == Outcome::Unit)
    }

    /// True iff every polynomial lies in the radical. Checks run in parallel
    /// when the `parallel` feature is on and stop at the first failure.
    pub fn contains_all(&self, ps: &[Polynomial], budget: &Budget) -> Result<bool, GroebnerError> {
        par::try_all(ps, |p| self.contains(p, budget))
    }
}

/// `polys ⊂ √⟨s⟩`.
pub fn in_radical(polys: &[Polynomial], s: &[Polynomial]) -> Result<bool, GroebnerError> {
    in_radical_with(polys, s, &Budget::unlimited())
}

pub fn in_radical_with(polys: &[Polynomial], s: &[Polynomial], budget: &Budget) -> Result<bool, GroebnerError> {
    let Some(first) = polys.first().or(s.first()) else {
        return Ok(true);
    };
    let ctx = first.context().clone();
    let oracle = RadicalOracle::new(&ctx, s, budget)?;
    oracle.contains_all(polys, budget)
}

/// Number of points of the variety counted with multiplicity, or infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionCount {
    Finite(u64),
    Infinite,
}

/// Every variable has a pure power among the leading monomials.
pub fn is_zero_dimensional(gb: &GroebnerBasis) -> bool {
    if gb.is_unit() {
        return true;
    }
    let lms = gb.leading_exponents();
    (0..gb.ctx.len()).all(|v| {
        lms.iter()
            .any(|e| e[v] > 0 && e.iter().enumerate().all(|(k, &x)| k == v || x == 0))
    })
}

/// Number of standard monomials (dimension of the quotient ring) when finite.
/// The unit ideal has zero solutions.
pub fn solution_count(gb: &GroebnerBasis) -> SolutionCount {
    if gb.is_unit() {
        return SolutionCount::Finite(0);
    }
    if !is_zero_dimensional(gb) {
        return SolutionCount::Infinite;
    }
    let n = gb.ctx.len();
    let lms = gb.leading_exponents();
    let bound: Vec<u32> = (0..n)
        .map(|v| {
            lms.iter()
                .filter(|e| e.iter().enumerate().all(|(k, &x)| k == v || x == 0))
                .map(|e| e[v])
                .min()
                .unwrap()
        })
        .collect();
    let mut cur = vec![0u32; n];
    SolutionCount::Finite(count_standard(&lms, &bound, &mut cur, 0))
}

fn count_standard(lms: &[Vec<u32>], bound: &[u32], cur: &mut Vec<u32>, var: usize) -> u64 {
    if var == bound.len() {
        return 1;
    }
    let mut total = 0;
    for e in 0..bound[var] {
        cur[var] = e;
        // with later variables at zero, divisibility only grows as they grow
        let blocked = lms.iter().any(|m| m.iter().zip(cur.iter()).all(|(a, b)| a <= b));
        if blocked {
            break;
        }
        total += count_standard(lms, bound, cur, var + 1);
    }
    cur[var] = 0;
    total
}

/// Generators of `⟨gens⟩ ∩ ℚ[last k variables]`, expressed in the original
/// context.
pub fn elimination_ideal(ctx: &VarContext, gens: &[Polynomial], keep_last_k: usize) -> Result<Vec<Polynomial>, GroebnerError> {
    let n = ctx.len();
    let front = n.saturating_sub(keep_last_k);
    let order = if front == 0 { MonomialOrder::Grevlex } else { MonomialOrder::Block { front } };
    let gb = buchberger(ctx, gens, order)?;
    Ok(gb
        .gens
        .into_iter()
        .filter(|g| g.uses_only(|i| i >= front))
        .collect())
}
