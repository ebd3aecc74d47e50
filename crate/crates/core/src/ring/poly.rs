use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Monomial, Rational, RingError, VarClass, VarContext};

/// Sparse polynomial with exact rational coefficients over a [`VarContext`].
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    ctx: VarContext,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(ctx: &VarContext) -> Self {
        Polynomial { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ctx: &VarContext) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn constant(ctx: &VarContext, c: Rational) -> Self {
        Self::monomial(ctx, Monomial::one(), c)
    }

    pub fn var(ctx: &VarContext, idx: usize) -> Self {
        assert!(idx < ctx.len(), "variable index out of range");
        Self::monomial(ctx, Monomial::var(idx), Rational::one())
    }

    pub fn var_named(ctx: &VarContext, name: &str) -> Result<Self, RingError> {
        Ok(Self::var(ctx, ctx.require(name)?))
    }

    pub fn monomial(ctx: &VarContext, m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { ctx: ctx.clone(), terms }
    }

    /// Build from terms, merging duplicates and dropping zeros.
    pub fn from_terms(ctx: &VarContext, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::zero(ctx);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn context(&self) -> &VarContext {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending grevlex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest term under grevlex.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Total degree restricted to the variables selected by `pick`.
    pub fn degree_in(&self, pick: impl Fn(usize) -> bool) -> Option<u32> {
        self.terms
            .keys()
            .map(|m| m.iter().filter(|&(i, _)| pick(i)).map(|(_, e)| e).sum())
            .max()
    }

    /// Indices of variables that occur with a nonzero exponent.
    pub fn support_vars(&self) -> Vec<usize> {
        let mut seen = vec![false; self.ctx.len()];
        for m in self.terms.keys() {
            for (i, _) in m.iter() {
                seen[i] = true;
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).collect()
    }

    pub fn uses_only(&self, pick: impl Fn(usize) -> bool) -> bool {
        self.terms.keys().all(|m| m.iter().all(|(i, _)| pick(i)))
    }

    fn check(&self, other: &Polynomial) -> Result<(), RingError> {
        if self.ctx.same(&other.ctx) {
            Ok(())
        } else {
            Err(RingError::ContextMismatch)
        }
    }

    /// In-place `self += other`; panics across contexts.
    pub fn accumulate(&mut self, other: &Polynomial) {
        assert!(self.ctx.same(&other.ctx), "polynomial arithmetic across contexts");
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial, RingError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial, RingError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial, RingError> {
        self.check(other)?;
        let mut out = Polynomial::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Value at a full point (one rational per context variable).
    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.ctx.len(), "point dimension does not match context");
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, e) in m.iter() {
                t *= num_traits::pow(point[i].clone(), e as usize);
            }
            acc += t;
        }
        acc
    }

    /// Partial evaluation keeping the context unchanged.
    pub fn eval_partial(&self, bindings: &[(usize, Rational)]) -> Polynomial {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut values: Vec<Option<&Rational>> = vec![None; self.ctx.len()];
        for (i, v) in bindings {
            values[*i] = Some(v);
        }
        let mut out = Polynomial::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (i, e) in m.iter() {
                match values[i] {
                    Some(v) => coeff *= num_traits::pow(v.clone(), e as usize),
                    None => rest.push((i, e)),
                }
            }
            out.add_term(Monomial::from_pairs(rest), coeff);
        }
        out
    }

    /// Partial evaluation by variable name; the result lives in the context
    /// restricted to the unbound variables.
    pub fn substitute(&self, bindings: &[(&str, Rational)]) -> Result<Polynomial, RingError> {
        let mut idx = Vec::with_capacity(bindings.len());
        for (name, v) in bindings {
            idx.push((self.ctx.require(name)?, v.clone()));
        }
        let bound: Vec<usize> = idx.iter().map(|b| b.0).collect();
        let keep: Vec<usize> = (0..self.ctx.len()).filter(|i| !bound.contains(i)).collect();
        let sub = self.ctx.restrict(&keep);
        Ok(self.eval_partial(&idx).move_to(&sub, |i| keep.iter().position(|&k| k == i)))
    }

    /// Re-express in `target`, mapping each used variable through `map`.
    /// Panics if a used variable has no image.
    pub fn move_to(&self, target: &VarContext, map: impl Fn(usize) -> Option<usize>) -> Polynomial {
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let nm = m.remap(|i| map(i).unwrap_or_else(|| panic!("variable `{}` has no image", self.ctx.name(i))));
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Embed into `target` by matching variable names.
    pub fn embed(&self, target: &VarContext) -> Result<Polynomial, RingError> {
        let mut map = Vec::with_capacity(self.ctx.len());
        for name in self.ctx.names() {
            map.push(target.index_of(name));
        }
        for i in self.support_vars() {
            if map[i].is_none() {
                return Err(RingError::UnknownVariable(self.ctx.name(i).to_string()));
            }
        }
        Ok(self.move_to(target, |i| map[i]))
    }

    /// Multiply by the lcm of denominators and divide by the gcd of numerators,
    /// making the leading coefficient positive. Zero stays zero.
    pub fn primitive(&self) -> Polynomial {
        let Some((_, lc)) = self.leading_term() else {
            return self.clone();
        };
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
        let mut f = Rational::new(den, num);
        if lc.is_negative() {
            f = -f;
        }
        self.scale(&f)
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            Some((_, lc)) => self.scale(&lc.recip()),
            None => self.clone(),
        }
    }

    pub fn all_integer(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

/// Coefficients of `p` viewed as a polynomial in the variables `vars`, paired
/// with the corresponding monomial in those variables, in ascending grevlex
/// order of that monomial. Zero coefficients never appear.
pub fn coefficient_map(p: &Polynomial, vars: &[usize]) -> Vec<(Monomial, Polynomial)> {
    let mut groups: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (xm, rest) = m.split(|i| vars.contains(&i));
        groups
            .entry(xm)
            .or_insert_with(|| Polynomial::zero(p.context()))
            .add_term(rest, c.clone());
    }
    groups.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Coefficient polynomials of `p` with respect to `vars` (see [`coefficient_map`]).
pub fn coefficients_wrt(p: &Polynomial, vars: &[usize]) -> Vec<Polynomial> {
    coefficient_map(p, vars).into_iter().map(|(_, c)| c).collect()
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomial arithmetic across contexts")
            }
        }
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial arithmetic across contexts")
    }
}

impl Add<&Polynomial> for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: &Polynomial) -> Polynomial {
        self.accumulate(rhs);
        self
    }
}

impl Add<Polynomial> for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self.accumulate(&rhs);
        self
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

fn write_coeff_monomial(f: &mut fmt::Formatter<'_>, ctx: &VarContext, m: &Monomial, c: &Rational) -> fmt::Result {
    let abs = c.abs();
    let mut parts: Vec<String> = Vec::new();
    if !abs.is_one() || m.is_one() {
        parts.push(abs.to_string());
    }
    for (i, e) in m.iter() {
        if e == 1 {
            parts.push(ctx.name(i).to_string());
        } else {
            parts.push(format!("{}^{}", ctx.name(i), e));
        }
    }
    write!(f, "{}", parts.join("*"))
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write_coeff_monomial(f, &self.ctx, m, c)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl VarContext {
    /// Convenience: every variable of `class` as a polynomial.
    pub fn vars_of_class(&self, class: VarClass) -> Vec<Polynomial> {
        self.indices_of_class(class).into_iter().map(|i| Polynomial::var(self, i)).collect()
    }
}
