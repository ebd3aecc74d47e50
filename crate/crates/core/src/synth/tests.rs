use super::*;
use crate::groebner::in_radical;
use crate::invariant::invariant_set_with;
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

fn assignment(pairs: &[(&str, i64)]) -> Assignment {
    pairs.iter().map(|(n, v)| (n.to_string(), rat(*v))).collect()
}

/// Cubic template with initial value (1, 1, -1) and two invariants.
pub(crate) fn cubic_problem() -> SynthesisProblem {
    let c = prog(&["x1", "x2", "x3"]);
    let t = template(&c, &[&[&["x1^3", "x2^2"], &["x1", "x2^2"], &["x1"]]]);
    let g = vec![p("x2^2 - x1", &c), p("x3^3 + 2*x2^2 - x1", &c)];
    SynthesisProblem::new(g, t, Guard::Always, Some(vec![rat(1), rat(1), rat(-1)])).unwrap()
}

/// Two affine branches preserving `2*x1 - x2^2`, initial value unknown.
pub(crate) fn branching_problem() -> SynthesisProblem {
    let c = prog(&["x1", "x2"]);
    let t = template(&c, &[&[&["x1", "1"], &["x2"]], &[&["x2", "1"], &["x1"]]]);
    SynthesisProblem::new(vec![p("2*x1 - x2^2", &c)], t, Guard::Always, None).unwrap()
}

fn same_up_to_scalar(a: &Polynomial, b: &Polynomial) -> bool {
    a.primitive() == b.primitive()
}

#[test]
fn extended_map_of_cubic_template() {
    let prob = cubic_problem();
    let ext = build_extended_maps(&prob).unwrap();
    let c = &ext.ctx;
    assert_eq!(c.names(), &["x1", "x2", "x3", "y1", "y2", "y3", "y4", "y5", "z"]);
    let h = &ext.maps[0];
    assert_eq!(h.components(), &[p("y1*x1^3 + y2*x2^2", c), p("y3*x1 + y4*x2^2", c), p("y5*x1", c)]);
    assert!(h.extra().is_empty());
}

#[test]
fn extended_maps_of_branching_template() {
    let prob = branching_problem();
    let ext = build_extended_maps(&prob).unwrap();
    let c = &ext.ctx;
    assert_eq!(ext.maps[0].components(), &[p("y1*x1 + y2", c), p("y3*x2", c)]);
    assert_eq!(ext.maps[1].components(), &[p("y4*x2 + y5", c), p("y6*x1", c)]);
    assert_eq!(prob.unknowns().ctx.names(), &["a1", "a2", "y1", "y2", "y3", "y4", "y5", "y6"]);
}

#[test]
fn unit_guard_moves_flag_to_itself() {
    let c = prog(&["x1"]);
    let t = template(&c, &[&[&["x1"]]]);
    let prob = SynthesisProblem::new(vec![p("x1", &c)], t, Guard::Poly(Polynomial::one(&c)), None).unwrap();
    let ext = build_extended_maps(&prob).unwrap();
    let z = Polynomial::var(&ext.ctx, ext.flag);
    assert_eq!(ext.maps[0].extra(), &[(ext.flag, z)]);
}

#[test]
fn guard_template_adds_unknowns() {
    let c = prog(&["x1", "x2"]);
    let t = template(&c, &[&[&["x1"], &["x2"]]]);
    let guard = Guard::Template(vec![p("x1", &c), p("x2 - 1", &c)]);
    let prob = SynthesisProblem::new(vec![p("x1 - x2", &c)], t, guard, Some(vec![rat(0), rat(0)])).unwrap();
    assert_eq!(prob.unknowns().ctx.names(), &["y1", "y2", "w1", "w2"]);
    let ext = build_extended_maps(&prob).unwrap();
    let e = &ext.ctx;
    assert_eq!(e.names(), &["x1", "x2", "y1", "y2", "z", "w1", "w2"]);
    assert_eq!(ext.maps[0].extra()[0].1, p("z*(w1*x1 + w2*(x2 - 1))", e));
    let sys = generate_loops(&prob).unwrap();
    assert_eq!(sys.ctx.names(), prob.unknowns().ctx.names());
    let sol = assignment(&[("y1", 1), ("y2", 1), ("w1", 2), ("w2", 0)]);
    let lp = instantiate_loop(&prob, &sol).unwrap();
    assert_eq!(lp.guard, p("2*x1", &c));
}

#[test]
fn names_avoid_program_variables() {
    let c = prog(&["y1", "z", "a1"]);
    let t = template(&c, &[&[&["y1"], &["z"], &["a1"]]]);
    let prob = SynthesisProblem::new(vec![p("y1 - z", &c)], t, Guard::Always, None).unwrap();
    let names = prob.unknowns().ctx.names().to_vec();
    for n in &names {
        assert!(c.index_of(n).is_none(), "{n} collides");
    }
    let ext = build_extended_maps(&prob).unwrap();
    assert_ne!(ext.ctx.name(ext.flag), "z");
    generate_loops(&prob).unwrap();
}

#[test]
fn invalid_problems_rejected() {
    let c = prog(&["x1", "x2"]);
    let t = template(&c, &[&[&["x1"], &["x2"]]]);
    assert!(SynthesisProblem::new(vec![], t.clone(), Guard::Always, None).is_err());
    assert!(SynthesisProblem::new(vec![Polynomial::zero(&c)], t.clone(), Guard::Always, None).is_err());
    assert!(SynthesisProblem::new(vec![p("x1", &c)], t, Guard::Always, Some(vec![rat(1)])).is_err());
    assert!(LoopTemplate::new(&c, vec![vec![vec![p("x1", &c)]]]).is_err());
}

#[test]
fn cubic_system_matches_printed_equations() {
    let prob = cubic_problem();
    let sys = generate_loops(&prob).unwrap();
    let u = &sys.ctx;
    assert_eq!(sys.len(), 4);
    let p1 = p("(y3+y4)^2 - y1 - y2", u);
    let p2 = p("y5^3 + 2*(y3+y4)^2 - y1 - y2", u);
    assert!(sys.equations.iter().any(|e| same_up_to_scalar(e, &p1)));
    assert!(sys.equations.iter().any(|e| same_up_to_scalar(e, &p2)));
}

#[test]
fn constant_guard_gives_the_same_system() {
    let base = cubic_problem();
    let c = base.context().clone();
    let prob = SynthesisProblem::new(
        base.invariants().to_vec(),
        base.template().clone(),
        Guard::Poly(p("3", &c)),
        base.initial().map(|a| a.to_vec()),
    )
    .unwrap();
    let a = generate_loops(&base).unwrap();
    let b = generate_loops(&prob).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.equations.iter().zip(&b.equations) {
        assert!(same_up_to_scalar(x, y));
    }
}

#[test]
fn branching_system_contains_printed_samples() {
    let prob = branching_problem();
    let sys = generate_loops(&prob).unwrap();
    let u = &sys.ctx;
    let samples = [
        "2*a1 - a2^2",
        "2*y1*a1 + 2*y2 - y3^2*a2^2",
        "2*y4*a2 + 2*y5 - y6^2*a1^2",
        "2*y1^2*a1 + 2*y1*y2 + 2*y2 - y3^4*a2^2",
        "2*y1*y4*a2 + 2*y1*y5 + 2*y2 - y3^2*y6^2*a1^2",
        "-y1^2*y6^2*a1^2 - 2*y1*y2*y6^2*a1 - y2^2*y6^2 + 2*y3*y4*a2 + 2*y5",
    ];
    let samples: Vec<Polynomial> = samples.iter().map(|s| p(s, u)).collect();
    assert!(in_radical(&samples, &sys.equations).unwrap());
}

#[test]
fn instantiation_of_printed_solutions() {
    let prob = cubic_problem();
    let c = prob.context().clone();
    let lp = instantiate_loop(&prob, &assignment(&[("y1", 1), ("y2", 0), ("y3", 1), ("y4", 0), ("y5", -1)])).unwrap();
    assert_eq!(lp.maps[0].components(), &[p("x1^3", &c), p("x1", &c), p("-x1", &c)]);
    assert_eq!(lp.guard, Polynomial::one(&c));
    assert_eq!(lp.initial, Some(vec![rat(1), rat(1), rat(-1)]));
    let zero = instantiate_loop(&prob, &assignment(&[("y1", 0), ("y2", 0), ("y3", 0), ("y4", 0), ("y5", 0)])).unwrap();
    assert!(zero.maps[0].components().iter().all(|f| f.is_zero()));
    let err = instantiate_loop(&prob, &assignment(&[("y1", 0)])).unwrap_err();
    assert_eq!(err, SynthError::MissingBinding("y2".into()));
}

#[test]
fn markov_instantiation() {
    let c = prog(&["x1", "x2", "x3"]);
    let t = template(
        &c,
        &[
            &[&["x1", "x2"], &["x1*x2", "x3", "x1^2"], &["x2", "x3"]],
            &[&["x1", "x2"], &["x2*x3", "x1", "x2^2"], &["x2", "x3"]],
        ],
    );
    let prob = SynthesisProblem::new(vec![p("x1^2 + x2^2 + x3^2 - 3*x1*x2*x3", &c)], t, Guard::Always, Some(vec![rat(1), rat(1), rat(2)])).unwrap();
    let mut sol = Assignment::new();
    for k in 1..=14 {
        let v = match k {
            2 | 5 | 7 | 8 | 12 | 13 => 0,
            3 | 10 => 3,
            _ => -1,
        };
        sol.insert(format!("y{k}"), rat(v));
    }
    let lp = instantiate_loop(&prob, &sol).unwrap();
    assert_eq!(lp.maps[0].components(), &[p("-x1", &c), p("3*x1*x2 - x3", &c), p("-x2", &c)]);
    assert_eq!(lp.maps[1].components(), &[p("-x2", &c), p("3*x2*x3 - x1", &c), p("-x3", &c)]);
}

#[test]
fn dedup_keeps_the_ideal() {
    let prob = cubic_problem();
    let raw = generate_loops(&prob).unwrap();
    let opts = GenerateOptions { dedup: true, ..Default::default() };
    let small = generate_loops_with(&prob, &opts).unwrap();
    assert!(small.len() <= raw.len());
    assert!(in_radical(&raw.equations, &small.equations).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn substitution_commutes_with_evaluation(b in proptest::collection::vec(-4i64..5, 5)) {
        let prob = cubic_problem();
        let ext = build_extended_maps(&prob).unwrap();
        let z = Polynomial::var(&ext.ctx, ext.flag);
        let zg: Vec<Polynomial> = prob.invariants().iter().map(|g| &z * &g.move_to(&ext.ctx, Some)).collect();
        let res = invariant_set_with(&zg, &ext.maps, &InvariantOptions::default()).unwrap();
        let sys = generate_loops(&prob).unwrap();
        // full point (a, b, 1)
        let mut full = vec![rat(1), rat(1), rat(-1)];
        full.extend(b.iter().map(|&v| rat(v)));
        full.push(rat(1));
        let yb: Vec<Rational> = b.iter().map(|&v| rat(v)).collect();
        let values: Vec<Rational> = res.generators.iter().map(|q| q.evaluate(&full)).collect();
        let mut k = 0;
        for (q, val) in res.generators.iter().zip(values) {
            let sub = q.eval_partial(&[(ext.flag, rat(1)), (0, rat(1)), (1, rat(1)), (2, rat(-1))]);
            if sub.is_zero() {
                prop_assert!(val.is_zero());
                continue;
            }
            prop_assert_eq!(sys.equations[k].evaluate(&yb), val);
            k += 1;
        }
        prop_assert_eq!(k, sys.len());
    }
}
