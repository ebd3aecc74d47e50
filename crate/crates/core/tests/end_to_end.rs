use loopforge_core::groebner::in_radical;
use loopforge_core::ring::{parse_poly, rat, Polynomial, Rational, VarContext};
use loopforge_core::solve::{classify_finiteness, run_smt, Finiteness, SmtJob, SolveStatus};
use loopforge_core::synth::{
    generate_loops, instantiate_loop, Assignment, Guard, LoopTemplate, PolynomialSystem, SynthesisProblem,
};
use loopforge_core::verify::{simulate_loop, verify_invariants};
use proptest::prelude::*;
use std::sync::OnceLock;

fn template(c: &VarContext, branches: &[&[&[&str]]]) -> LoopTemplate {
    let b = branches
        .iter()
        .map(|br| br.iter().map(|gens| gens.iter().map(|s| parse_poly(s, c).unwrap()).collect()).collect())
        .collect();
    LoopTemplate::new(c, b).unwrap()
}

fn cubic() -> &'static (SynthesisProblem, PolynomialSystem) {
    static CELL: OnceLock<(SynthesisProblem, PolynomialSystem)> = OnceLock::new();
    CELL.get_or_init(|| {
        let c = VarContext::program(["x1", "x2", "x3"]).unwrap();
        let t = template(&c, &[&[&["x1^3", "x2^2"], &["x1", "x2^2"], &["x1"]]]);
        let g = ["x2^2 - x1", "x3^3 + 2*x2^2 - x1"].iter().map(|s| parse_poly(s, &c).unwrap()).collect();
        let prob = SynthesisProblem::new(g, t, Guard::Always, Some(vec![rat(1), rat(1), rat(-1)])).unwrap();
        let sys = generate_loops(&prob).unwrap();
        (prob, sys)
    })
}

fn ys(v: [Rational; 5]) -> Assignment {
    v.into_iter().enumerate().map(|(i, x)| (format!("y{}", i + 1), x)).collect()
}

fn solver() -> String {
    std::env::var("LOOPFORGE_SOLVER").unwrap_or_else(|_| "z3 -in".into())
}

#[test]
fn cubic_coefficient_set_is_infinite() {
    let (_, sys) = cubic();
    assert_eq!(classify_finiteness(sys).unwrap(), Finiteness::Infinite);
}

#[test]
fn cubic_solver_point_gives_a_valid_loop() {
    let (prob, sys) = cubic();
    let out = run_smt(&SmtJob::new(sys.clone()), &solver()).unwrap();
    let SolveStatus::Sat(model) = out.status else { panic!("{:?}", out.status) };
    assert!(sys.is_satisfied_by(&model).unwrap());
    let lp = instantiate_loop(prob, &model).unwrap();
    assert!(verify_invariants(&lp, prob.invariants()).unwrap().passed);
    assert!(simulate_loop(&lp, prob.invariants(), 8, 256).unwrap().passed);
}

#[test]
fn branching_system_without_initial_value() {
    let c = VarContext::program(["x1", "x2"]).unwrap();
    let t = template(&c, &[&[&["x1", "1"], &["x2"]], &[&["x2", "1"], &["x1"]]]);
    let g = vec![parse_poly("2*x1 - x2^2", &c).unwrap()];
    let prob = SynthesisProblem::new(g.clone(), t, Guard::Always, None).unwrap();
    let sys = generate_loops(&prob).unwrap();
    // branch one is the identity, branch two sends everything to the origin
    let mut a: Assignment = Assignment::new();
    for (k, v) in [("a1", 0), ("a2", 0), ("y1", 1), ("y2", 0), ("y3", 1), ("y4", 0), ("y5", 0), ("y6", 0)] {
        a.insert(k.into(), rat(v));
    }
    assert!(sys.is_satisfied_by(&a).unwrap());
    let lp = instantiate_loop(&prob, &a).unwrap();
    assert!(verify_invariants(&lp, &g).unwrap().passed);
    assert!(simulate_loop(&lp, &g, 8, 256).unwrap().passed);
    // a start off the invariant variety is rejected
    a.insert("a1".into(), rat(1));
    assert!(!sys.is_satisfied_by(&a).unwrap());
}

#[test]
fn generated_ideal_is_independent_of_guard_scaling() {
    let (prob, sys) = cubic();
    let c = prob.context().clone();
    let scaled = SynthesisProblem::new(
        prob.invariants().to_vec(),
        prob.template().clone(),
        Guard::Poly(Polynomial::constant(&c, rat(-7))),
        prob.initial().map(<[_]>::to_vec),
    )
    .unwrap();
    let other = generate_loops(&scaled).unwrap();
    assert!(in_radical(&other.equations, &sys.equations).unwrap());
    assert!(in_radical(&sys.equations, &other.equations).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_component_families_are_valid(m1 in -4i64..=4, m2 in -4i64..=4, d1 in 1i64..=3, d2 in 1i64..=3, which in 0usize..3) {
        let (prob, sys) = cubic();
        let mu1 = Rational::new(m1.into(), d1.into());
        let mu2 = Rational::new(m2.into(), d2.into());
        let one = rat(1);
        let point = match which {
            0 => [mu1.clone(), -mu1, mu2.clone(), -mu2, rat(0)],
            1 => [mu1.clone(), &one - &mu1, mu2.clone(), &one - &mu2, rat(-1)],
            _ => [mu1.clone(), &one - &mu1, mu2.clone(), -(&one + &mu2), rat(-1)],
        };
        let a = ys(point);
        prop_assert!(sys.is_satisfied_by(&a).unwrap());
        let lp = instantiate_loop(prob, &a).unwrap();
        prop_assert!(verify_invariants(&lp, prob.invariants()).unwrap().passed);
        prop_assert!(simulate_loop(&lp, prob.invariants(), 4, 16).unwrap().passed);
    }
}
