//! Buchberger's algorithm over integer coefficients.
//!
//! Polynomials are kept primitive (content removed) with dense exponent
//! vectors whose slot 0 caches the total degree. Reduction is fraction-free:
//! `p ← a·p − b·m·g` with `a, b` coprime.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::order::{cmp_dense, MonomialOrder};
use super::{Budget, GroebnerError};
use crate::ring::{Monomial, Polynomial, Rational, VarContext};

pub(crate) type Exp = Box<[u32]>;

#[derive(Clone, Debug)]
pub(crate) struct IPoly {
    /// Sorted strictly descending in the engine's order.
    pub terms: Vec<(Exp, BigInt)>,
}

impl IPoly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0[0] == 0
    }

    pub fn lm(&self) -> &Exp {
        &self.terms[0].0
    }

    pub fn lc(&self) -> &BigInt {
        &self.terms[0].1
    }

    fn make_primitive(&mut self) {
        if self.terms.is_empty() {
            return;
        }
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        if self.terms[0].1.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for (_, c) in self.terms.iter_mut() {
                *c /= &g;
            }
        }
    }
}

pub(crate) fn sev(e: &[u32]) -> u64 {
    let mut s = 0u64;
    for (k, &x) in e[1..].iter().enumerate() {
        if x > 0 {
            s |= 1 << (k % 64);
        }
    }
    s
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a[1..].iter().zip(&b[1..]).all(|(x, y)| x <= y)
}

fn quotient(b: &[u32], a: &[u32]) -> Exp {
    let mut out: Vec<u32> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    out[0] = out[1..].iter().sum();
    out.into_boxed_slice()
}

fn mul_exp(a: &[u32], b: &[u32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>().into_boxed_slice()
}

fn lcm_exp(a: &[u32], b: &[u32]) -> Exp {
    let mut out: Vec<u32> = a.iter().zip(b).map(|(x, y)| *x.max(y)).collect();
    out[0] = out[1..].iter().sum();
    out.into_boxed_slice()
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a[1..].iter().zip(&b[1..]).all(|(x, y)| *x == 0 || *y == 0)
}

/// Conversion between ring polynomials and engine polynomials.
pub(crate) fn to_ipoly(p: &Polynomial, nvars: usize, order: MonomialOrder) -> (IPoly, Rational) {
    let mut den = BigInt::one();
    for (_, c) in p.terms() {
        den = den.lcm(c.denom());
    }
    let mut terms: Vec<(Exp, BigInt)> = p
        .terms()
        .map(|(m, c)| {
            let mut e = vec![0u32; nvars + 1];
            for (i, x) in m.iter() {
                e[i + 1] = x;
            }
            e[0] = m.degree();
            let v = c.numer() * (&den / c.denom());
            (e.into_boxed_slice(), v)
        })
        .collect();
    terms.sort_by(|a, b| cmp_dense(order, &b.0, &a.0));
    let mut ip = IPoly { terms };
    // track the factor relating `ip` to `p`: ip = scale · p
    let before = ip.terms.first().map(|t| t.1.clone());
    ip.make_primitive();
    let scale = match (before, ip.terms.first()) {
        (Some(b), Some(a)) => Rational::new(a.1.clone(), b) * Rational::from_integer(den),
        _ => Rational::one(),
    };
    (ip, scale)
}

pub(crate) fn from_ipoly(ip: &IPoly, ctx: &VarContext, scale: &Rational) -> Polynomial {
    Polynomial::from_terms(
        ctx,
        ip.terms
            .iter()
            .map(|(e, c)| (Monomial::from_dense(&e[1..]), Rational::from_integer(c.clone()) / scale)),
    )
}

#[derive(Debug, Clone)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Exp,
}

#[derive(Debug, PartialEq, Eq, Clone, Copy)]
pub(crate) enum Outcome {
    Basis,
    /// A nonzero constant was derived; the ideal is the whole ring.
    Unit,
}

pub(crate) struct Engine<'b> {
    pub order: MonomialOrder,
    pub polys: Vec<IPoly>,
    sevs: Vec<u64>,
    /// Indices of the current (Gebauer–Möller) basis.
    pub basis: Vec<usize>,
    pairs: Vec<Pair>,
    budget: &'b Budget,
    steps: u64,
}

impl<'b> Engine<'b> {
    pub fn new(order: MonomialOrder, budget: &'b Budget) -> Self {
        Engine { order, polys: Vec::new(), sevs: Vec::new(), basis: Vec::new(), pairs: Vec::new(), budget, steps: 0 }
    }

    /// Seed with polynomials already known to form a reduced Gröbner basis.
    pub fn seed_basis(&mut self, gb: Vec<IPoly>) {
        for p in gb {
            let idx = self.polys.len();
            self.sevs.push(sev(p.lm()));
            self.polys.push(p);
            self.basis.push(idx);
        }
    }

    fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        cmp_dense(self.order, a, b)
    }

    fn tick(&mut self) -> Result<(), GroebnerError> {
        self.steps += 1;
        if self.steps.is_multiple_of(64) {
            self.budget.check()?;
        }
        Ok(())
    }

    fn find_divisor(&self, e: &[u32], s: u64) -> Option<usize> {
        self.basis
            .iter()
            .copied()
            .find(|&k| self.sevs[k] & !s == 0 && divides(self.polys[k].lm(), e))
    }

    /// `a·p[from..] − b·(m·g)[1..]`, both sides already sorted.
    fn sub_mul(&self, p: &[(Exp, BigInt)], a: &BigInt, m: &[u32], b: &BigInt, g: &[(Exp, BigInt)]) -> Vec<(Exp, BigInt)> {
        let mut out = Vec::with_capacity(p.len() + g.len());
        let (mut i, mut j) = (0, 0);
        let mut gt: Option<Exp> = g.first().map(|t| mul_exp(&t.0, m));
        while i < p.len() || j < g.len() {
            let ord = match (i < p.len(), &gt) {
                (true, Some(ge)) => self.cmp(&p[i].0, ge),
                (true, None) => Ordering::Greater,
                (false, _) => Ordering::Less,
            };
            match ord {
                Ordering::Greater => {
                    out.push((p[i].0.clone(), &p[i].1 * a));
                    i += 1;
                }
                Ordering::Less => {
                    out.push((gt.take().unwrap(), -(&g[j].1 * b)));
                    j += 1;
                    gt = g.get(j).map(|t| mul_exp(&t.0, m));
                }
                Ordering::Equal => {
                    let c = &p[i].1 * a - &g[j].1 * b;
                    let e = gt.take().unwrap();
                    if !c.is_zero() {
                        out.push((e, c));
                    }
                    i += 1;
                    j += 1;
                    gt = g.get(j).map(|t| mul_exp(&t.0, m));
                }
            }
        }
        out
    }

    /// Reduce `p` modulo the current basis. With `full`, every term is
    /// reduced; otherwise only the leading term. Returns the remainder and the
    /// factor `s` with `remainder = s · (p − Σ q_k g_k)`.
    pub fn reduce(&mut self, p: IPoly, full: bool) -> Result<(IPoly, Rational), GroebnerError> {
        let mut cur = p.terms;
        let mut rem: Vec<(Exp, BigInt)> = Vec::new();
        let mut scale = Rational::one();
        let mut since_content = 0u32;
        while let Some((e, c)) = cur.first() {
            self.tick()?;
            match self.find_divisor(e, sev(e)) {
                Some(k) => {
                    let g = &self.polys[k];
                    let gc = g.lc();
                    let d = c.gcd(gc);
                    let a = gc / &d;
                    let b = c / &d;
                    let m = quotient(e, g.lm());
                    let (a, b) = if a.is_negative() { (-a, -b) } else { (a, b) };
                    if !a.is_one() {
                        for t in rem.iter_mut() {
                            t.1 *= &a;
                        }
                        scale *= Rational::from_integer(a.clone());
                    }
                    cur = self.sub_mul(&cur[1..], &a, &m, &b, &g.terms[1..]);
                    since_content += 1;
                    if since_content >= 8 {
                        since_content = 0;
                        let mut gg = BigInt::zero();
                        for t in rem.iter().chain(cur.iter()) {
                            gg = gg.gcd(&t.1);
                            if gg.is_one() {
                                break;
                            }
                        }
                        if !gg.is_zero() && !gg.is_one() {
                            for t in rem.iter_mut().chain(cur.iter_mut()) {
                                t.1 /= &gg;
                            }
                            scale /= Rational::from_integer(gg);
                        }
                    }
                }
                None => {
                    if !full {
                        break;
                    }
                    let t = cur.remove(0);
                    rem.push(t);
                    // Amortise the front removal by draining in chunks.
                    while let Some((e2, _)) = cur.first() {
                        if self.find_divisor(e2, sev(e2)).is_some() {
                            break;
                        }
                        rem.push(cur.remove(0));
                    }
                }
            }
        }
        rem.extend(cur);
        let mut out = IPoly { terms: rem };
        if let Some(first) = out.terms.first().map(|t| t.1.clone()) {
            out.make_primitive();
            scale *= Rational::new(out.terms[0].1.clone(), first);
        }
        Ok((out, scale))
    }

    fn spoly(&self, pair: &Pair) -> IPoly {
        let (f, g) = (&self.polys[pair.i], &self.polys[pair.j]);
        let d = f.lc().gcd(g.lc());
        let a = g.lc() / &d;
        let b = f.lc() / &d;
        let mf = quotient(&pair.lcm, f.lm());
        let mg = quotient(&pair.lcm, g.lm());
        let left: Vec<(Exp, BigInt)> = f.terms[1..].iter().map(|(e, c)| (mul_exp(e, &mf), c * &a)).collect();
        let terms = self.sub_mul(&left, &BigInt::one(), &mg, &b, &g.terms[1..]);
        let mut p = IPoly { terms };
        p.make_primitive();
        p
    }

    /// Gebauer–Möller installation of a new basis element.
    fn insert(&mut self, h: IPoly) {
        let hidx = self.polys.len();
        let hlm = h.lm().clone();
        self.sevs.push(sev(&hlm));
        self.polys.push(h);

        let mut cands: Vec<(usize, Exp, bool)> = self
            .basis
            .iter()
            .map(|&g| {
                let glm = self.polys[g].lm();
                (g, lcm_exp(glm, &hlm), coprime(glm, &hlm))
            })
            .collect();
        // Chain criterion among the new pairs (criterion M and F).
        cands.sort_by(|a, b| a.1[0].cmp(&b.1[0]).then_with(|| self.cmp(&a.1, &b.1)));
        let mut kept: Vec<(usize, Exp, bool)> = Vec::new();
        for c in cands {
            if kept.iter().any(|k| divides(&k.1, &c.1)) {
                // an equal lcm already kept: if this one is coprime, mark kept as such
                if let Some(k) = kept.iter_mut().find(|k| k.1 == c.1) {
                    k.2 |= c.2;
                }
                continue;
            }
            kept.push(c);
        }
        let new_pairs: Vec<Pair> = kept
            .into_iter()
            .filter(|c| !c.2)
            .map(|(g, lcm, _)| Pair { i: g, j: hidx, lcm })
            .collect();

        // Criterion B on old pairs.
        let polys = &self.polys;
        self.pairs.retain(|p| {
            if !divides(&hlm, &p.lcm) {
                return true;
            }
            let l1 = lcm_exp(polys[p.i].lm(), &hlm);
            let l2 = lcm_exp(polys[p.j].lm(), &hlm);
            l1 == p.lcm || l2 == p.lcm
        });
        self.pairs.extend(new_pairs);

        self.basis.retain(|&g| !divides(&hlm, polys[g].lm()));
        self.basis.push(hidx);
    }

    fn select(&mut self) -> Option<Pair> {
        if self.pairs.is_empty() {
            return None;
        }
        let mut best = 0;
        for k in 1..self.pairs.len() {
            let (a, b) = (&self.pairs[k].lcm, &self.pairs[best].lcm);
            if a[0] < b[0] || (a[0] == b[0] && self.cmp(a, b) == Ordering::Less) {
                best = k;
            }
        }
        Some(self.pairs.swap_remove(best))
    }

    /// Add generators (which need not be reduced) and run to completion.
    pub fn add_and_run(&mut self, gens: Vec<IPoly>, stop_on_unit: bool) -> Result<Outcome, GroebnerError> {
        let mut gens: Vec<IPoly> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        gens.sort_by(|a, b| self.cmp(a.lm(), b.lm()));
        for g in gens {
            let (r, _) = self.reduce(g, true)?;
            if r.is_zero() {
                continue;
            }
            if r.is_constant() {
                self.install_unit(r);
                if stop_on_unit {
                    return Ok(Outcome::Unit);
                }
                continue;
            }
            self.insert(r);
        }
        while let Some(pair) = self.select() {
            self.budget.check()?;
            let s = self.spoly(&pair);
            if s.is_zero() {
                continue;
            }
            let (h, _) = self.reduce(s, true)?;
            if h.is_zero() {
                continue;
            }
            if h.is_constant() {
                self.install_unit(h);
                return Ok(Outcome::Unit);
            }
            self.insert(h);
        }
        if self.basis.iter().any(|&k| self.polys[k].is_constant()) {
            return Ok(Outcome::Unit);
        }
        Ok(Outcome::Basis)
    }

    fn install_unit(&mut self, mut u: IPoly) {
        u.terms[0].1 = BigInt::one();
        let idx = self.polys.len();
        self.sevs.push(0);
        self.polys.push(u);
        self.basis = vec![idx];
        self.pairs.clear();
    }

    /// Reduced basis: minimal, inter-reduced, primitive; sorted ascending by
    /// leading monomial.
    pub fn reduced_basis(&mut self) -> Result<Vec<IPoly>, GroebnerError> {
        let mut idx: Vec<usize> = self.basis.clone();
        idx.sort_by(|&a, &b| self.cmp(self.polys[a].lm(), self.polys[b].lm()));
        // minimality
        let mut minimal: Vec<usize> = Vec::new();
        for &k in &idx {
            let lm = self.polys[k].lm();
            if !minimal.iter().any(|&m| divides(self.polys[m].lm(), lm)) {
                minimal.push(k);
            }
        }
        let mut out = Vec::with_capacity(minimal.len());
        for (pos, &k) in minimal.iter().enumerate() {
            let others: Vec<usize> = minimal.iter().enumerate().filter(|(q, _)| *q != pos).map(|(_, &m)| m).collect();
            let saved = std::mem::replace(&mut self.basis, others);
            let p = self.polys[k].clone();
            // keep the leading term, reduce the tail
            let head = IPoly { terms: vec![p.terms[0].clone()] };
            let tail = IPoly { terms: p.terms[1..].to_vec() };
            let (rt, s) = self.reduce(tail, true)?;
            self.basis = saved;
            // head·s + rt, with s = integer-ish factor; rescale to integers
            let mut terms = Vec::with_capacity(rt.terms.len() + 1);
            let sn = s.numer().clone();
            let sd = s.denom().clone();
            terms.push((head.terms[0].0.clone(), &head.terms[0].1 * &sn));
            for (e, c) in rt.terms {
                terms.push((e, c * &sd));
            }
            let mut r = IPoly { terms };
            r.make_primitive();
            out.push(r);
        }
        Ok(out)
    }
}
