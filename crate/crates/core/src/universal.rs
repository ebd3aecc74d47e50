//! Universally inductive invariants: `g ∘ F_j = g` for every branch, decided
//! by coefficient comparison alone, and the affine solution space when every
//! invariant is affine.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::par;
use crate::ring::{coefficients_wrt, compose_one, Monomial, PolyMap, Polynomial, Rational, RingError, VarClass, VarContext};
use crate::synth::{Assignment, LoopTemplate, PolynomialSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UniversalError {
    #[error("invariant `{0}` is not affine")]
    NotAffine(String),
    #[error("equation `{0}` is not linear in the unknowns")]
    NotLinear(String),
    #[error("no invariants given")]
    NoInvariants,
    #[error("vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Context holding only the template coefficients, named as in
/// [`LoopTemplate::coefficient_names`].
pub fn coefficient_context(template: &LoopTemplate) -> Result<VarContext, UniversalError> {
    let names = template.coefficient_names().iter().flatten().flatten().map(|n| (n.clone(), VarClass::Coefficient));
    Ok(VarContext::new(names)?)
}

/// The distinct (up to scalar) nonzero coefficients of `g_i ∘ F_j − g_i` with
/// respect to the program variables, over all invariants and branches.
pub fn compute_loops_universal(g: &[Polynomial], template: &LoopTemplate) -> Result<PolynomialSystem, UniversalError> {
    if g.is_empty() {
        return Err(UniversalError::NoInvariants);
    }
    let prog = template.context();
    for gi in g {
        if !gi.context().same(prog) {
            return Err(RingError::ContextMismatch.into());
        }
    }
    let unknowns = coefficient_context(template)?;
    let n = prog.len();
    let ext = prog.extend(unknowns.names().iter().map(|s| (s.clone(), VarClass::Coefficient)))?;
    let lift = |p: &Polynomial| p.move_to(&ext, Some);
    let xs: Vec<usize> = (0..n).collect();

    let mut next = n;
    let mut maps = Vec::new();
    for branch in template.branches() {
        let mut comps = Vec::new();
        for gens in branch {
            let mut c = Polynomial::zero(&ext);
            for f in gens {
                c.accumulate(&(&Polynomial::var(&ext, next) * &lift(f)));
                next += 1;
            }
            comps.push(c);
        }
        maps.push(PolyMap::new(&ext, comps)?);
    }

    let pairs: Vec<(&PolyMap, &Polynomial)> = maps.iter().flat_map(|m| g.iter().map(move |gi| (m, gi))).collect();
    let diffs = par::try_map(&pairs, |(m, gi)| -> Result<Vec<Polynomial>, RingError> {
        let gl = lift(gi);
        let d = compose_one(&gl, m)?.try_sub(&gl)?;
        Ok(coefficients_wrt(&d, &xs)
            .into_iter()
            .map(|c| c.move_to(&unknowns, |i| i.checked_sub(n)))
            .collect())
    })?;

    let mut seen = HashSet::new();
    let mut equations = Vec::new();
    for c in diffs.into_iter().flatten() {
        if seen.insert(c.primitive().to_string()) {
            equations.push(c);
        }
    }
    Ok(PolynomialSystem::new(&unknowns, equations))
}

/// `particular + span(basis)` in coordinates ordered as `unknowns`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSpace {
    pub unknowns: VarContext,
    pub particular: Vec<Rational>,
    pub basis: Vec<Vec<Rational>>,
}

impl AffineSpace {
    pub fn ambient_dim(&self) -> usize {
        self.particular.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `particular + Σ c_i basis_i`.
    pub fn point(&self, c: &[Rational]) -> Result<Vec<Rational>, UniversalError> {
        if c.len() != self.basis.len() {
            return Err(UniversalError::Length { got: c.len(), expected: self.basis.len() });
        }
        let mut p = self.particular.clone();
        for (ci, b) in c.iter().zip(&self.basis) {
            for (pk, bk) in p.iter_mut().zip(b) {
                *pk += ci * bk;
            }
        }
        Ok(p)
    }

    /// `v` lies in the space.
    pub fn contains(&self, v: &[Rational]) -> Result<bool, UniversalError> {
        if v.len() != self.ambient_dim() {
            return Err(UniversalError::Length { got: v.len(), expected: self.ambient_dim() });
        }
        let d: Vec<Rational> = v.iter().zip(&self.particular).map(|(a, b)| a - b).collect();
        Ok(in_span(&self.basis, &d))
    }

    /// `v` lies in the direction space `span(basis)`.
    pub fn contains_direction(&self, v: &[Rational]) -> Result<bool, UniversalError> {
        if v.len() != self.ambient_dim() {
            return Err(UniversalError::Length { got: v.len(), expected: self.ambient_dim() });
        }
        Ok(in_span(&self.basis, v))
    }

    pub fn to_assignment(&self, v: &[Rational]) -> Assignment {
        self.unknowns.names().iter().cloned().zip(v.iter().cloned()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearOutcome {
    /// No loop of the given shape has the invariants.
    Infeasible,
    Affine(AffineSpace),
}

/// The coefficient set for affine invariants, as an affine space.
pub fn compute_loops_linear_universal(g: &[Polynomial], template: &LoopTemplate) -> Result<LinearOutcome, UniversalError> {
    for gi in g {
        if gi.total_degree().unwrap_or(0) > 1 {
            return Err(UniversalError::NotAffine(gi.to_string()));
        }
    }
    let sys = compute_loops_universal(g, template)?;
    let Some(particular) = solve_linear(&sys)? else {
        return Ok(LinearOutcome::Infeasible);
    };
    let basis = nullspace_basis(&sys)?;
    Ok(LinearOutcome::Affine(AffineSpace { unknowns: sys.ctx.clone(), particular, basis }))
}

/// A solution of a linear system with every free unknown set to zero, or
/// `None` if the system is inconsistent.
pub fn solve_linear(sys: &PolynomialSystem) -> Result<Option<Vec<Rational>>, UniversalError> {
    let e = Echelon::of(sys)?;
    if !e.consistent() {
        return Ok(None);
    }
    Ok(Some(e.back_substitute(None)))
}

/// Basis of the homogeneous solution space: one vector per free unknown,
/// with that unknown 1 and the other free unknowns 0.
pub fn nullspace_basis(sys: &PolynomialSystem) -> Result<Vec<Vec<Rational>>, UniversalError> {
    let e = Echelon::of(sys)?;
    Ok(e.free_columns().into_iter().map(|f| e.back_substitute(Some(f))).collect())
}

/// Rank over the rationals.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let width = rows.first().map_or(0, |r| r.len());
    bareiss(rows.iter().map(|r| clear_denominators(r)).collect(), width).1.len()
}

fn in_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    let mut rows = basis.to_vec();
    let r = rank(&rows);
    rows.push(v.to_vec());
    rank(&rows) == r
}

/// Row echelon form of the augmented integer matrix `[A | b]` of `A y = b`.
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    ncols: usize,
}

impl Echelon {
    fn of(sys: &PolynomialSystem) -> Result<Self, UniversalError> {
        let ncols = sys.ctx.len();
        let mut rows = Vec::new();
        for e in &sys.equations {
            if e.total_degree().unwrap_or(0) > 1 {
                return Err(UniversalError::NotLinear(e.to_string()));
            }
            let mut row: Vec<Rational> = (0..ncols).map(|i| e.coefficient(&Monomial::var(i))).collect();
            row.push(-e.constant_term());
            rows.push(clear_denominators(&row));
        }
        let (rows, pivots) = bareiss(rows, ncols);
        Ok(Echelon { rows, pivots, ncols })
    }

    fn consistent(&self) -> bool {
        self.rows[self.pivots.len()..].iter().all(|r| r[self.ncols].is_zero())
    }

    fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// With `free = None` solves `A y = b` with free unknowns 0; with
    /// `Some(f)` solves `A y = 0` with `y_f = 1` and the other free unknowns 0.
    fn back_substitute(&self, free: Option<usize>) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.ncols];
        if let Some(f) = free {
            y[f] = Rational::one();
        }
        for (r, &c) in self.pivots.iter().enumerate().rev() {
            let row = &self.rows[r];
            let mut acc = match free {
                None => Rational::from_integer(row[self.ncols].clone()),
                Some(_) => Rational::zero(),
            };
            for k in c + 1..self.ncols {
                if !row[k].is_zero() {
                    acc -= Rational::from_integer(row[k].clone()) * &y[k];
                }
            }
            y[c] = acc / Rational::from_integer(row[c].clone());
        }
        y
    }
}

fn clear_denominators(row: &[Rational]) -> Vec<BigInt> {
    let den = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    row.iter().map(|c| (c * Rational::from_integer(den.clone())).to_integer()).collect()
}

/// Fraction-free Gaussian elimination pivoting on the first `pivot_cols`
/// columns. Returns the echelon rows and the pivot columns.
fn bareiss(mut m: Vec<Vec<BigInt>>, pivot_cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let nrows = m.len();
    let width = m.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (head, tail) = m.split_at_mut(r + 1);
        let piv = &head[r];
        for row in tail.iter_mut() {
            for k in c + 1..width {
                let v = &piv[c] * &row[k] - &row[c] * &piv[k];
                debug_assert!((&v % &prev).is_zero());
                row[k] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

#[cfg(test)]
pub(crate) mod tests;
