use super::*;
use crate::ring::{parse_poly, rat};
use proptest::prelude::*;

fn prog(names: &[&str]) -> VarContext {
    VarContext::program(names.iter().copied()).unwrap()
}

fn p(s: &str, c: &VarContext) -> Polynomial {
    parse_poly(s, c).unwrap()
}

fn template(c: &VarContext, branches: &[&[&[&str]]]) -> LoopTemplate {
    let b = branches
        .iter()
        .map(|br| br.iter().map(|gens| gens.iter().map(|s| p(s, c)).collect()).collect())
        .collect();
    LoopTemplate::new(c, b).unwrap()
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| rat(x)).collect()
}

fn same_up_to_scalar(a: &Polynomial, b: &Polynomial) -> bool {
    a.primitive() == b.primitive()
}

pub(crate) fn markov() -> (Vec<Polynomial>, LoopTemplate) {
    let c = prog(&["x1", "x2", "x3"]);
    let t = template(
        &c,
        &[
            &[&["x1", "x2"], &["x1*x2", "x3", "x1^2"], &["x2", "x3"]],
            &[&["x1", "x2"], &["x2*x3", "x1", "x2^2"], &["x2", "x3"]],
        ],
    );
    (vec![p("x1^2 + x2^2 + x3^2 - 3*x1*x2*x3", &c)], t)
}

pub(crate) fn markov_solution() -> Assignment {
    let v = [-1, 0, 3, -1, 0, -1, 0, 0, -1, 3, -1, 0, 0, -1];
    v.iter().enumerate().map(|(i, &x)| (format!("y{}", i + 1), rat(x))).collect()
}

fn affine_example() -> (Vec<Polynomial>, LoopTemplate) {
    let c = prog(&["x1", "x2"]);
    let t = template(&c, &[&[&["x1^2", "x1", "x2"], &["x1^2", "x1", "x2"]], &[&["x1", "x2"], &["x1", "x2"]]]);
    (vec![p("x1 - x2 + 1", &c)], t)
}

fn system(c: &VarContext, eqs: &[&str]) -> PolynomialSystem {
    PolynomialSystem::new(c, eqs.iter().map(|s| p(s, c)).collect())
}

#[test]
fn markov_has_32_equations() {
    let (g, t) = markov();
    let sys = compute_loops_universal(&g, &t).unwrap();
    assert_eq!(sys.len(), 32);
    let names: Vec<&str> = sys.ctx.names().iter().map(|s| s.as_str()).collect();
    assert_eq!(names, (1..=14).map(|i| format!("y{i}")).collect::<Vec<_>>());
    for printed in [
        "3*y1*y3*y6 + 3*y2*y5*y6 - y3^2",
        "3*y8*y10*y13 + 3*y8*y12*y14",
        "y5^2",
        "y14^2 - 1",
        "y1^2 - 1",
    ] {
        let e = p(printed, &sys.ctx);
        assert!(sys.equations.iter().any(|q| same_up_to_scalar(q, &e)), "missing {printed}");
    }
    for (i, a) in sys.equations.iter().enumerate() {
        for b in &sys.equations[i + 1..] {
            assert!(!same_up_to_scalar(a, b));
        }
    }
    assert!(sys.is_satisfied_by(&markov_solution()).unwrap());
}

#[test]
fn markov_solution_is_inductive() {
    let (g, t) = markov();
    for m in t.instantiate(&markov_solution()).unwrap() {
        assert_eq!(compose_one(&g[0], &m).unwrap(), g[0]);
    }
    let c = t.context();
    let maps = t.instantiate(&markov_solution()).unwrap();
    assert_eq!(maps[0].components()[1], p("3*x1*x2 - x3", c));
    assert_eq!(maps[1].components()[1], p("3*x2*x3 - x1", c));
}

#[test]
fn single_identity_coefficient() {
    let c = prog(&["x1"]);
    let t = template(&c, &[&[&["x1"]]]);
    let sys = compute_loops_universal(&[p("x1", &c)], &t).unwrap();
    assert_eq!(sys.equations, vec![p("y1 - 1", &sys.ctx)]);
}

#[test]
fn identity_only_template() {
    let c = prog(&["x1", "x2", "x3"]);
    let t = template(&c, &[&[&["x1"], &["x2"], &["x3"]]]);
    let sys = compute_loops_universal(&[p("x1 + 2*x2", &c)], &t).unwrap();
    assert_eq!(sys.len(), 2);
    for e in ["y1 - 1", "y2 - 1"] {
        assert!(sys.equations.iter().any(|q| same_up_to_scalar(q, &p(e, &sys.ctx))));
    }
}

#[test]
fn affine_example_space() {
    let (g, t) = affine_example();
    let sys = compute_loops_universal(&g, &t).unwrap();
    assert_eq!(sys.len(), 5);
    let LinearOutcome::Affine(space) = compute_loops_linear_universal(&g, &t).unwrap() else {
        panic!("infeasible");
    };
    assert_eq!(space.ambient_dim(), 10);
    assert_eq!(space.dim(), 5);
    let v = ints(&[0, 1, -1, 0, 0, 0, 1, -1, 0, 0]);
    assert!(space.contains(&v).unwrap());
    let paper_basis: Vec<Vec<Rational>> = [
        [1, 0, 0, 1, 0, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 0, 1, 0],
        [0, 0, 0, 0, 0, 0, 0, 1, 0, 1],
    ]
    .iter()
    .map(|b| ints(b))
    .collect();
    for b in &paper_basis {
        assert!(space.contains_direction(b).unwrap());
    }
    let paper = AffineSpace { unknowns: space.unknowns.clone(), particular: v, basis: paper_basis };
    for b in &space.basis {
        assert!(paper.contains_direction(b).unwrap());
    }
    assert!(paper.contains(&space.particular).unwrap());
    assert_eq!(space.particular, ints(&[0, 1, -1, 0, 0, 0, 1, -1, 0, 0]));
}

#[test]
fn invariant_forces_identity() {
    let c = prog(&["x1"]);
    let t = template(&c, &[&[&["x1", "1"]]]);
    let sys = compute_loops_universal(&[p("x1", &c)], &t).unwrap();
    assert_eq!(sys.equations, vec![p("y2", &sys.ctx), p("y1 - 1", &sys.ctx)]);
    let LinearOutcome::Affine(space) = compute_loops_linear_universal(&[p("x1", &c)], &t).unwrap() else {
        panic!("infeasible");
    };
    assert_eq!(space.particular, ints(&[1, 0]));
    assert!(space.basis.is_empty());
}

#[test]
fn infeasible_shape() {
    let c = prog(&["x1"]);
    let t = template(&c, &[&[&["x1^2"]]]);
    let g = [p("x1 + 1", &c)];
    // y1 x1^2 + 1 = x1 + 1 has no solution
    assert_eq!(compute_loops_linear_universal(&g, &t).unwrap(), LinearOutcome::Infeasible);
}

#[test]
fn nonaffine_rejected() {
    let (g, t) = markov();
    assert!(matches!(compute_loops_linear_universal(&g, &t), Err(UniversalError::NotAffine(_))));
}

#[test]
fn two_by_two_solve() {
    let c = prog(&["y1", "y2"]);
    let sys = system(&c, &["y1 + y2 - 1", "y1 - y2"]);
    let half = Rational::new(1.into(), 2.into());
    assert_eq!(solve_linear(&sys).unwrap(), Some(vec![half.clone(), half]));
    assert!(nullspace_basis(&sys).unwrap().is_empty());
}

#[test]
fn empty_and_zero_rows() {
    let c = prog(&["y1", "y2", "y3"]);
    for sys in [PolynomialSystem::new(&c, vec![]), system(&c, &["y1 - y1"])] {
        assert_eq!(solve_linear(&sys).unwrap(), Some(ints(&[0, 0, 0])));
        assert_eq!(nullspace_basis(&sys).unwrap(), vec![ints(&[1, 0, 0]), ints(&[0, 1, 0]), ints(&[0, 0, 1])]);
    }
}

#[test]
fn inconsistent_and_nonlinear() {
    let c = prog(&["y1", "y2"]);
    assert_eq!(solve_linear(&system(&c, &["y1 + y2", "2*y1 + 2*y2 - 1"])).unwrap(), None);
    assert!(matches!(solve_linear(&system(&c, &["y1*y2"])), Err(UniversalError::NotLinear(_))));
}

#[test]
fn rational_coefficients() {
    let c = prog(&["y1", "y2"]);
    let sys = system(&c, &["1/2*y1 + 1/3*y2 - 1", "y1 - 1/4"]);
    let v = solve_linear(&sys).unwrap().unwrap();
    assert_eq!(v[0], Rational::new(1.into(), 4.into()));
    assert_eq!(v[1], Rational::new(21.into(), 8.into()));
}

/// Reduced row echelon rank with plain rational arithmetic.
fn oracle_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    let width = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for k in 0..width {
            m[r][k] = &m[r][k] / &pivot;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..width {
                    let d = &f * &m[r][k];
                    m[i][k] -= d;
                }
            }
        }
        r += 1;
    }
    r
}

fn linear_system() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..5).prop_flat_map(|n| (Just(n), prop::collection::vec(prop::collection::vec(-3i64..=3, n + 1), 0..5)))
}

fn as_system(n: usize, rows: &[Vec<i64>]) -> PolynomialSystem {
    let c = VarContext::program((1..=n).map(|i| format!("y{i}"))).unwrap();
    let eqs = rows
        .iter()
        .map(|r| {
            let mut e = Polynomial::constant(&c, rat(r[n]));
            for (i, &a) in r[..n].iter().enumerate() {
                e.accumulate(&Polynomial::var(&c, i).scale(&rat(a)));
            }
            e
        })
        .collect();
    PolynomialSystem::new(&c, eqs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_space_solves_system((n, rows) in linear_system(), cs in prop::collection::vec(-5i64..=5, 5)) {
        let sys = as_system(n, &rows);
        let a: Vec<Vec<Rational>> = rows.iter().map(|r| ints(&r[..n])).collect();
        let ab: Vec<Vec<Rational>> = rows.iter().map(|r| ints(r)).collect();
        let consistent = oracle_rank(&a) == oracle_rank(&ab);
        let sol = solve_linear(&sys).unwrap();
        prop_assert_eq!(sol.is_some(), consistent);
        let basis = nullspace_basis(&sys).unwrap();
        prop_assert_eq!(basis.len(), n - oracle_rank(&a));
        prop_assert_eq!(oracle_rank(&basis), basis.len());
        if let Some(v) = sol {
            let space = AffineSpace { unknowns: sys.ctx.clone(), particular: v, basis };
            let c: Vec<Rational> = cs[..space.dim()].iter().map(|&x| rat(x)).collect();
            let pt = space.point(&c).unwrap();
            prop_assert!(sys.equations.iter().all(|e| e.evaluate(&pt).is_zero()));
            prop_assert!(space.contains(&pt).unwrap());
        }
    }

    #[test]
    fn locus_is_inductiveness(vals in prop::collection::vec(-1i64..=1, 5)) {
        let c = prog(&["x1", "x2"]);
        let t = template(&c, &[&[&["x1", "1"], &["x2", "x1", "1"]]]);
        let g = p("x1^2 - x2", &c);
        let sys = compute_loops_universal(std::slice::from_ref(&g), &t).unwrap();
        let a: Assignment = vals.iter().enumerate().map(|(i, &v)| (format!("y{}", i + 1), rat(v))).collect();
        let m = &t.instantiate(&a).unwrap()[0];
        prop_assert_eq!(sys.is_satisfied_by(&a).unwrap(), compose_one(&g, m).unwrap() == g);
    }

    #[test]
    fn affine_example_points_are_inductive(cs in prop::collection::vec(-4i64..=4, 5)) {
        let (g, t) = affine_example();
        let LinearOutcome::Affine(space) = compute_loops_linear_universal(&g, &t).unwrap() else { unreachable!() };
        let c: Vec<Rational> = cs.iter().map(|&x| rat(x)).collect();
        let a = space.to_assignment(&space.point(&c).unwrap());
        for m in t.instantiate(&a).unwrap() {
            prop_assert_eq!(compose_one(&g[0], &m).unwrap(), g[0].clone());
        }
    }
}
