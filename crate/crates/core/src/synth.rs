//! Loop synthesis: templates, the extended self-maps that carry the unknown
//! coefficients and the guard flag, generation of the defining system of the
//! coefficient set, and instantiation of concrete loops from solutions.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::groebner::{buchberger, normal_form, GroebnerError, MonomialOrder};
use crate::invariant::{invariant_set_with, InvariantError, InvariantOptions, Provenance};
use crate::ring::{PolyMap, Polynomial, Rational, RingError, VarClass, VarContext};

/// Values for named unknowns.
pub type Assignment = BTreeMap<String, Rational>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("no value for unknown `{0}`")]
    MissingBinding(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Per-branch, per-variable generator lists: branch `i` updates program
/// variable `j` to an unknown linear combination of `branches[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopTemplate {
    ctx: VarContext,
    branches: Vec<Vec<Vec<Polynomial>>>,
    names: Vec<Vec<Vec<String>>>,
}

impl LoopTemplate {
    pub fn new(ctx: &VarContext, branches: Vec<Vec<Vec<Polynomial>>>) -> Result<Self, SynthError> {
        let prog = ctx.program_indices();
        if branches.is_empty() {
            return Err(SynthError::Invalid("a template needs at least one branch".into()));
        }
        for (i, b) in branches.iter().enumerate() {
            if b.len() != prog.len() {
                return Err(SynthError::Invalid(format!(
                    "branch {} has {} variable lines, expected {}",
                    i + 1,
                    b.len(),
                    prog.len()
                )));
            }
            for gens in b {
                for f in gens {
                    if !f.context().same(ctx) {
                        return Err(RingError::ContextMismatch.into());
                    }
                    if !f.uses_only(|v| prog.contains(&v)) {
                        return Err(SynthError::Invalid(format!("generator `{f}` uses a non-program variable")));
                    }
                }
            }
        }
        // y1, y2, … numbered by branch, then variable, then generator
        let mut counter = 0;
        let mut names = Vec::new();
        for b in &branches {
            let mut per_var = Vec::new();
            for gens in b {
                let mut ns = Vec::new();
                for _ in gens {
                    counter += 1;
                    let name = ctx.fresh_name(&format!("y{counter}"));
                    ns.push(name);
                }
                per_var.push(ns);
            }
            names.push(per_var);
        }
        Ok(LoopTemplate { ctx: ctx.clone(), branches, names })
    }

    /// `coefficient_names()[i][j][l]` names the unknown multiplying generator
    /// `l` of variable `j` in branch `i`.
    pub fn coefficient_names(&self) -> &[Vec<Vec<String>>] {
        &self.names
    }

    /// Branch maps with the coefficients taken from `values`.
    pub fn instantiate(&self, values: &Assignment) -> Result<Vec<PolyMap>, SynthError> {
        let mut maps = Vec::new();
        for (branch, names) in self.branches.iter().zip(&self.names) {
            let mut comps = Vec::new();
            for (gens, ns) in branch.iter().zip(names) {
                let mut c = Polynomial::zero(&self.ctx);
                for (f, n) in gens.iter().zip(ns) {
                    let v = values.get(n).ok_or_else(|| SynthError::MissingBinding(n.clone()))?;
                    c.accumulate(&f.scale(v));
                }
                comps.push(c);
            }
            maps.push(PolyMap::new(&self.ctx, comps)?);
        }
        Ok(maps)
    }

    pub fn context(&self) -> &VarContext {
        &self.ctx
    }

    pub fn branches(&self) -> &[Vec<Vec<Polynomial>>] {
        &self.branches
    }

    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    /// Total number of coefficient unknowns over all branches.
    pub fn num_coefficients(&self) -> usize {
        self.branches.iter().flatten().map(|g| g.len()).sum()
    }

    /// Maximal total degree of a generator.
    pub fn degree(&self) -> u32 {
        self.branches.iter().flatten().flatten().filter_map(|f| f.total_degree()).max().unwrap_or(0)
    }

    /// Number of generators of the first branch.
    pub fn generator_count(&self) -> usize {
        self.branches[0].iter().map(|g| g.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// `h = 1`: the loop never exits.
    Always,
    Poly(Polynomial),
    /// `h = w_1 h_1 + … + w_r h_r` with unknown `w`.
    Template(Vec<Polynomial>),
}

impl Guard {
    /// Several inequations `h_1 ≠ 0, …` folded into their product.
    pub fn product(ctx: &VarContext, hs: &[Polynomial]) -> Guard {
        if hs.is_empty() {
            return Guard::Always;
        }
        let mut h = Polynomial::one(ctx);
        for f in hs {
            h = &h * f;
        }
        Guard::Poly(h)
    }
}

/// Names and positions of the unknowns of a problem. All indices refer to
/// `ctx`, which holds only unknowns: initial values (when not given), then
/// template coefficients, then guard coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownLayout {
    pub ctx: VarContext,
    pub initial: Vec<usize>,
    /// `coeffs[i][j][l]` is the unknown multiplying generator `l` of
    /// variable `j` in branch `i`.
    pub coeffs: Vec<Vec<Vec<usize>>>,
    pub guard: Vec<usize>,
}

impl UnknownLayout {
    fn build(prog: &VarContext, template: &LoopTemplate, with_initial: bool, guard_coeffs: usize) -> Result<Self, SynthError> {
        let ynames: Vec<String> = template.names.iter().flatten().flatten().cloned().collect();
        let mut taken = prog.extend(ynames.iter().map(|n| (n.clone(), VarClass::Coefficient)))?;
        let mut fresh = |stem: String, class: VarClass| -> Result<String, SynthError> {
            let name = taken.fresh_name(&stem);
            taken = taken.extend([(name.clone(), class)])?;
            Ok(name)
        };
        let mut names: Vec<(String, VarClass)> = Vec::new();
        let mut initial = Vec::new();
        if with_initial {
            for j in 0..prog.program_indices().len() {
                initial.push(names.len());
                names.push((fresh(format!("a{}", j + 1), VarClass::Auxiliary)?, VarClass::Auxiliary));
            }
        }
        let mut coeffs = Vec::new();
        for b in &template.names {
            let mut per_var = Vec::new();
            for gens in b {
                let mut ids = Vec::new();
                for n in gens {
                    ids.push(names.len());
                    names.push((n.clone(), VarClass::Coefficient));
                }
                per_var.push(ids);
            }
            coeffs.push(per_var);
        }
        let mut guard = Vec::new();
        for q in 0..guard_coeffs {
            guard.push(names.len());
            names.push((fresh(format!("w{}", q + 1), VarClass::GuardCoeff)?, VarClass::GuardCoeff));
        }
        Ok(UnknownLayout { ctx: VarContext::new(names)?, initial, coeffs, guard })
    }

    pub fn coefficient_indices(&self) -> Vec<usize> {
        self.coeffs.iter().flatten().flatten().copied().collect()
    }
}

/// One synthesis job: find loops of the template's shape satisfying the
/// invariants, from a given or unknown initial value.
#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    ctx: VarContext,
    invariants: Vec<Polynomial>,
    template: LoopTemplate,
    guard: Guard,
    initial: Option<Vec<Rational>>,
    layout: UnknownLayout,
}

impl SynthesisProblem {
    pub fn new(
        invariants: Vec<Polynomial>,
        template: LoopTemplate,
        guard: Guard,
        initial: Option<Vec<Rational>>,
    ) -> Result<Self, SynthError> {
        let ctx = template.context().clone();
        let prog = ctx.program_indices();
        if invariants.is_empty() {
            return Err(SynthError::Invalid("at least one invariant is required".into()));
        }
        for g in &invariants {
            if !g.context().same(&ctx) {
                return Err(RingError::ContextMismatch.into());
            }
            if g.is_zero() {
                return Err(SynthError::Invalid("the zero polynomial is not a useful invariant".into()));
            }
            if !g.uses_only(|v| prog.contains(&v)) {
                return Err(SynthError::Invalid(format!("invariant `{g}` uses a non-program variable")));
            }
        }
        let guard_polys: &[Polynomial] = match &guard {
            Guard::Always => &[],
            Guard::Poly(h) => std::slice::from_ref(h),
            Guard::Template(hs) => hs,
        };
        for h in guard_polys {
            if !h.context().same(&ctx) {
                return Err(RingError::ContextMismatch.into());
            }
            if !h.uses_only(|v| prog.contains(&v)) {
                return Err(SynthError::Invalid(format!("guard `{h}` uses a non-program variable")));
            }
        }
        if let Some(a) = &initial {
            if a.len() != prog.len() {
                return Err(SynthError::Invalid(format!("initial value has {} entries, expected {}", a.len(), prog.len())));
            }
        }
        let guard_coeffs = match &guard {
            Guard::Template(hs) => hs.len(),
            _ => 0,
        };
        let layout = UnknownLayout::build(&ctx, &template, initial.is_none(), guard_coeffs)?;
        Ok(SynthesisProblem { ctx, invariants, template, guard, initial, layout })
    }

    pub fn context(&self) -> &VarContext {
        &self.ctx
    }

    pub fn invariants(&self) -> &[Polynomial] {
        &self.invariants
    }

    pub fn template(&self) -> &LoopTemplate {
        &self.template
    }

    pub fn guard(&self) -> &Guard {
        &self.guard
    }

    pub fn initial(&self) -> Option<&[Rational]> {
        self.initial.as_deref()
    }

    pub fn unknowns(&self) -> &UnknownLayout {
        &self.layout
    }
}

/// The extended maps `H_{i,h}` with the context they live in.
#[derive(Debug, Clone)]
pub struct ExtendedMaps {
    pub ctx: VarContext,
    pub maps: Vec<PolyMap>,
    /// Index of the guard flag `z`.
    pub flag: usize,
    /// Position in `ctx` of each unknown of the layout (initial-value unknowns
    /// map to the program variables).
    pub unknown_positions: Vec<usize>,
}

/// `H_{i,h}(x, y, z, w) = (Σ_l y_{i,j,l} f_{i,j,l}(x))_j, y, z·h(x, w), w)`.
pub fn build_extended_maps(prob: &SynthesisProblem) -> Result<ExtendedMaps, SynthError> {
    let prog = prob.ctx.clone();
    let lay = &prob.layout;
    let n = prog.len();
    let mut vars: Vec<(String, VarClass)> = Vec::new();
    let mut unknown_positions = vec![usize::MAX; lay.ctx.len()];
    for (j, &a) in lay.initial.iter().enumerate() {
        unknown_positions[a] = prog.program_indices()[j];
    }
    for &y in &lay.coefficient_indices() {
        unknown_positions[y] = n + vars.len();
        vars.push((lay.ctx.name(y).to_string(), VarClass::Coefficient));
    }
    let mut probe = prog.extend(vars.clone())?;
    for &w in &lay.guard {
        probe = probe.extend([(lay.ctx.name(w).to_string(), VarClass::GuardCoeff)])?;
    }
    let zname = probe.fresh_name("z");
    let flag = n + vars.len();
    vars.push((zname, VarClass::GuardFlag));
    for &w in &lay.guard {
        unknown_positions[w] = n + vars.len();
        vars.push((lay.ctx.name(w).to_string(), VarClass::GuardCoeff));
    }
    let ext = prog.extend(vars)?;
    let lift = |p: &Polynomial| p.move_to(&ext, Some);

    let h = match &prob.guard {
        Guard::Always => None,
        Guard::Poly(h) => Some(lift(h)),
        Guard::Template(hs) => {
            let mut acc = Polynomial::zero(&ext);
            for (q, hq) in hs.iter().enumerate() {
                let w = Polynomial::var(&ext, unknown_positions[lay.guard[q]]);
                acc.accumulate(&(&w * &lift(hq)));
            }
            Some(acc)
        }
    };
    let z = Polynomial::var(&ext, flag);
    let mut maps = Vec::new();
    for (i, branch) in prob.template.branches().iter().enumerate() {
        let mut comps = Vec::new();
        for (j, gens) in branch.iter().enumerate() {
            let mut c = Polynomial::zero(&ext);
            for (l, f) in gens.iter().enumerate() {
                let y = Polynomial::var(&ext, unknown_positions[lay.coeffs[i][j][l]]);
                c.accumulate(&(&y * &lift(f)));
            }
            comps.push(c);
        }
        let mut m = PolyMap::new(&ext, comps)?;
        if let Some(h) = &h {
            m = m.with_extra(flag, &z * h)?;
        }
        maps.push(m);
    }
    Ok(ExtendedMaps { ctx: ext, maps, flag, unknown_positions })
}

/// Polynomial equations in the unknowns of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSystem {
    pub ctx: VarContext,
    pub equations: Vec<Polynomial>,
    /// Source of each equation, when it came from an invariant-set computation.
    pub provenance: Vec<Option<Provenance>>,
}

impl PolynomialSystem {
    pub fn new(ctx: &VarContext, equations: Vec<Polynomial>) -> Self {
        let provenance = vec![None; equations.len()];
        PolynomialSystem { ctx: ctx.clone(), equations, provenance }
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// The assignment as a point of `ctx`, requiring every unknown.
    pub fn point(&self, values: &Assignment) -> Result<Vec<Rational>, SynthError> {
        self.ctx
            .names()
            .iter()
            .map(|n| values.get(n).cloned().ok_or_else(|| SynthError::MissingBinding(n.clone())))
            .collect()
    }

    /// Every equation vanishes at the assignment.
    pub fn is_satisfied_by(&self, values: &Assignment) -> Result<bool, SynthError> {
        let pt = self.point(values)?;
        Ok(self.equations.iter().all(|e| e.evaluate(&pt).is_zero()))
    }
}

impl fmt::Display for PolynomialSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "unknowns: {}", self.ctx.names().join(" "))?;
        for e in &self.equations {
            writeln!(f, "{e} = 0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenerateOptions {
    pub invariant: InvariantOptions,
    /// Drop equations that lie in the ideal of the others.
    pub dedup: bool,
}

/// Defining equations of the coefficient set of `prob`.
pub fn generate_loops(prob: &SynthesisProblem) -> Result<PolynomialSystem, SynthError> {
    generate_loops_with(prob, &GenerateOptions::default())
}

pub fn generate_loops_with(prob: &SynthesisProblem, opts: &GenerateOptions) -> Result<PolynomialSystem, SynthError> {
    let ext = build_extended_maps(prob)?;
    let z = Polynomial::var(&ext.ctx, ext.flag);
    let zg: Vec<Polynomial> = prob.invariants.iter().map(|g| &z * &g.move_to(&ext.ctx, Some)).collect();
    let res = invariant_set_with(&zg, &ext.maps, &opts.invariant)?;

    let mut bindings = vec![(ext.flag, Rational::one())];
    if let Some(a) = &prob.initial {
        for (j, v) in prob.ctx.program_indices().into_iter().zip(a) {
            bindings.push((j, v.clone()));
        }
    }
    let mut back = vec![None; ext.ctx.len()];
    for (u, &pos) in ext.unknown_positions.iter().enumerate() {
        back[pos] = Some(u);
    }
    let lay = &prob.layout;
    let mut equations = Vec::new();
    let mut provenance = Vec::new();
    for (q, pv) in res.generators.iter().zip(res.provenance) {
        let p = q.eval_partial(&bindings).move_to(&lay.ctx, |i| back[i]);
        if !p.is_zero() {
            equations.push(p);
            provenance.push(Some(pv));
        }
    }
    let mut sys = PolynomialSystem { ctx: lay.ctx.clone(), equations, provenance };
    if opts.dedup {
        sys = dedup_system(sys)?;
    }
    Ok(sys)
}

/// Remove, one at a time, equations lying in the ideal of the remaining ones.
fn dedup_system(mut sys: PolynomialSystem) -> Result<PolynomialSystem, SynthError> {
    let mut k = sys.equations.len();
    while k > 0 {
        k -= 1;
        let others: Vec<Polynomial> =
            sys.equations.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, e)| e.clone()).collect();
        let gb = buchberger(&sys.ctx, &others, MonomialOrder::Grevlex)?;
        if normal_form(&sys.equations[k], &gb)?.is_zero() {
            sys.equations.remove(k);
            sys.provenance.remove(k);
        }
    }
    Ok(sys)
}

/// A loop with concrete data: `x := a; while h(x) ≠ 0: x := F_i(x)` for a
/// nondeterministically chosen branch `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteLoop {
    pub ctx: VarContext,
    pub initial: Option<Vec<Rational>>,
    pub guard: Polynomial,
    pub maps: Vec<PolyMap>,
}

impl ConcreteLoop {
    pub fn new(ctx: &VarContext, initial: Option<Vec<Rational>>, guard: Polynomial, maps: Vec<PolyMap>) -> Result<Self, SynthError> {
        if maps.is_empty() {
            return Err(SynthError::Invalid("a loop needs at least one branch".into()));
        }
        if !guard.context().same(ctx) || maps.iter().any(|m| !m.context().same(ctx)) {
            return Err(RingError::ContextMismatch.into());
        }
        Ok(ConcreteLoop { ctx: ctx.clone(), initial, guard, maps })
    }

    /// Every branch is the identity map.
    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|m| m.is_identity())
    }
}

impl fmt::Display for ConcreteLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(a) = &self.initial {
            let vals: Vec<String> = a.iter().map(|v| v.to_string()).collect();
            writeln!(f, "initial: {}", vals.join(" "))?;
        }
        writeln!(f, "guard: {}", self.guard)?;
        let prog = self.ctx.program_indices();
        for m in &self.maps {
            writeln!(f, "branch:")?;
            for (j, c) in prog.iter().zip(m.components()) {
                writeln!(f, "  {} := {}", self.ctx.name(*j), c)?;
            }
        }
        Ok(())
    }
}

/// Concrete loop obtained by plugging a solution into the template.
pub fn instantiate_loop(prob: &SynthesisProblem, solution: &Assignment) -> Result<ConcreteLoop, SynthError> {
    let lay = &prob.layout;
    let value = |u: usize| -> Result<Rational, SynthError> {
        let name = lay.ctx.name(u);
        solution.get(name).cloned().ok_or_else(|| SynthError::MissingBinding(name.to_string()))
    };
    let ctx = &prob.ctx;
    let initial = match &prob.initial {
        Some(a) => Some(a.clone()),
        None => Some(lay.initial.iter().map(|&u| value(u)).collect::<Result<Vec<_>, _>>()?),
    };
    let guard = match &prob.guard {
        Guard::Always => Polynomial::one(ctx),
        Guard::Poly(h) => h.clone(),
        Guard::Template(hs) => {
            let mut acc = Polynomial::zero(ctx);
            for (q, hq) in hs.iter().enumerate() {
                acc.accumulate(&hq.scale(&value(lay.guard[q])?));
            }
            acc
        }
    };
    let maps = prob.template.instantiate(solution)?;
    ConcreteLoop::new(ctx, initial, guard, maps)
}

#[cfg(test)]
pub(crate) mod tests;
