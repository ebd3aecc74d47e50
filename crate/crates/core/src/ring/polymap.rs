use std::collections::HashMap;
use std::fmt;

use super::{Polynomial, Rational, RingError, VarContext};

/// Polynomial self-map of a context.
///
/// `components[j]` is the image of the `j`-th program variable. Variables of
/// other classes are left fixed unless they appear in `extra`, which is how the
/// guard flag `z ↦ z·h` is carried.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyMap {
    ctx: VarContext,
    components: Vec<Polynomial>,
    extra: Vec<(usize, Polynomial)>,
}

impl PolyMap {
    pub fn new(ctx: &VarContext, components: Vec<Polynomial>) -> Result<Self, RingError> {
        let expected = ctx.program_indices().len();
        if components.len() != expected {
            return Err(RingError::MapArity { expected, got: components.len() });
        }
        if components.iter().any(|c| !c.context().same(ctx)) {
            return Err(RingError::ContextMismatch);
        }
        Ok(PolyMap { ctx: ctx.clone(), components, extra: Vec::new() })
    }

    pub fn identity(ctx: &VarContext) -> Self {
        let comps = ctx.program_indices().into_iter().map(|i| Polynomial::var(ctx, i)).collect();
        PolyMap { ctx: ctx.clone(), components: comps, extra: Vec::new() }
    }

    /// Also map the non-program variable `var` to `image`.
    pub fn with_extra(mut self, var: usize, image: Polynomial) -> Result<Self, RingError> {
        if !image.context().same(&self.ctx) {
            return Err(RingError::ContextMismatch);
        }
        self.extra.retain(|(v, _)| *v != var);
        self.extra.push((var, image));
        Ok(self)
    }

    pub fn context(&self) -> &VarContext {
        &self.ctx
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn extra(&self) -> &[(usize, Polynomial)] {
        &self.extra
    }

    /// `(variable index, image)` for every variable this map moves.
    fn images(&self) -> Vec<(usize, &Polynomial)> {
        let mut out: Vec<(usize, &Polynomial)> =
            self.ctx.program_indices().into_iter().zip(self.components.iter()).collect();
        out.extend(self.extra.iter().map(|(v, p)| (*v, p)));
        out
    }

    pub fn is_identity(&self) -> bool {
        self.images().iter().all(|(v, p)| **p == Polynomial::var(&self.ctx, *v))
    }

    /// Image of a full point.
    pub fn apply(&self, point: &[Rational]) -> Vec<Rational> {
        let mut out = point.to_vec();
        for (v, p) in self.images() {
            out[v] = p.evaluate(point);
        }
        out
    }

    /// `self ∘ inner`, i.e. `x ↦ self(inner(x))`.
    pub fn after(&self, inner: &PolyMap) -> Result<PolyMap, RingError> {
        if !self.ctx.same(&inner.ctx) {
            return Err(RingError::ContextMismatch);
        }
        let components = compose(&self.components, inner)?;
        let extra_imgs: Vec<Polynomial> = self.extra.iter().map(|(_, p)| p.clone()).collect();
        let extra_comp = compose(&extra_imgs, inner)?;
        let mut extra: Vec<(usize, Polynomial)> =
            self.extra.iter().map(|(v, _)| *v).zip(extra_comp).collect();
        for (v, p) in &inner.extra {
            if !extra.iter().any(|(w, _)| w == v) {
                extra.push((*v, p.clone()));
            }
        }
        Ok(PolyMap { ctx: self.ctx.clone(), components, extra })
    }
}

impl fmt::Debug for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.components.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        for (v, p) in &self.extra {
            write!(f, "; {} <- {}", self.ctx.name(*v), p)?;
        }
        write!(f, ")")
    }
}

struct PowerCache<'a> {
    base: HashMap<usize, &'a Polynomial>,
    powers: HashMap<usize, Vec<Polynomial>>,
}

impl<'a> PowerCache<'a> {
    fn get(&mut self, var: usize, e: u32) -> &Polynomial {
        let base = self.base[&var];
        let list = self
            .powers
            .entry(var)
            .or_insert_with(|| vec![Polynomial::one(base.context()), base.clone()]);
        while list.len() <= e as usize {
            let next = list.last().unwrap() * base;
            list.push(next);
        }
        &list[e as usize]
    }
}

/// `g(F(x))` for a single polynomial.
pub fn compose_one(g: &Polynomial, map: &PolyMap) -> Result<Polynomial, RingError> {
    Ok(compose(std::slice::from_ref(g), map)?.pop().unwrap())
}

/// `(g_1(F(x)), …, g_m(F(x)))`. Only variables moved by `map` are substituted.
pub fn compose(gs: &[Polynomial], map: &PolyMap) -> Result<Vec<Polynomial>, RingError> {
    if gs.iter().any(|g| !g.context().same(&map.ctx)) {
        return Err(RingError::ContextMismatch);
    }
    let images = map.images();
    let moved: Vec<usize> = images.iter().map(|(v, _)| *v).collect();
    let mut cache = PowerCache { base: images.into_iter().collect(), powers: HashMap::new() };
    let ctx = &map.ctx;
    let mut out = Vec::with_capacity(gs.len());
    for g in gs {
        // Group terms by their fixed part so each product of powers is built once.
        let mut acc = Polynomial::zero(ctx);
        for (m, c) in g.terms() {
            let (mv, fixed) = m.split(|i| moved.contains(&i));
            let mut prod: Option<Polynomial> = None;
            for (v, e) in mv.iter() {
                let pw = cache.get(v, e);
                prod = Some(match prod {
                    None => pw.clone(),
                    Some(q) => &q * pw,
                });
            }
            let term = match prod {
                None => Polynomial::monomial(ctx, fixed, c.clone()),
                Some(q) => q.mul_monomial(&fixed, c),
            };
            acc.accumulate(&term);
        }
        out.push(acc);
    }
    Ok(out)
}

impl Polynomial {
    pub fn compose(&self, map: &PolyMap) -> Result<Polynomial, RingError> {
        compose_one(self, map)
    }
}
