use super::*;
use crate::ring::{parse_poly, rat, VarContext};
use crate::universal::tests::{markov, markov_solution};
use proptest::prelude::*;

fn prog(names: &[&str]) -> VarContext {
    VarContext::program(names.iter().copied()).unwrap()
}

fn p(s: &str, c: &VarContext) -> Polynomial {
    parse_poly(s, c).unwrap()
}

fn looped(c: &VarContext, initial: Option<&[i64]>, guard: &str, branches: &[&[&str]]) -> ConcreteLoop {
    let maps = branches
        .iter()
        .map(|b| PolyMap::new(c, b.iter().map(|s| p(s, c)).collect()).unwrap())
        .collect();
    let initial = initial.map(|a| a.iter().map(|&v| rat(v)).collect());
    ConcreteLoop::new(c, initial, p(guard, c), maps).unwrap()
}

fn markov_loop() -> (ConcreteLoop, Vec<Polynomial>) {
    let (g, t) = markov();
    let maps = t.instantiate(&markov_solution()).unwrap();
    let c = t.context();
    let lp = ConcreteLoop::new(c, Some(vec![rat(1), rat(1), rat(2)]), Polynomial::one(c), maps).unwrap();
    (lp, g)
}

#[test]
fn markov_is_universal() {
    let (lp, g) = markov_loop();
    let rep = verify_universal(&lp, &g).unwrap();
    assert!(rep.passed, "{rep}");
    assert_eq!(rep.method, Method::UniversalIdentity);
}

#[test]
fn identity_is_universal() {
    let c = prog(&["x1", "x2"]);
    let lp = looped(&c, None, "1", &[&["x1", "x2"]]);
    assert!(verify_universal(&lp, &[p("x1^3 - 7*x1*x2 + 2", &c)]).unwrap().passed);
}

#[test]
fn translation_breaks_identity() {
    let c = prog(&["x1"]);
    let lp = looped(&c, None, "1", &[&["x1 + 1"]]);
    let rep = verify_universal(&lp, &[p("x1", &c)]).unwrap();
    assert!(!rep.passed);
    assert_eq!(rep.witnesses, vec![Witness::Identity { invariant: 0, branch: 0, residual: p("1", &c) }]);
}

#[test]
fn cubic_instance_membership() {
    let c = prog(&["x1", "x2", "x3"]);
    let g = vec![p("x2^2 - x1", &c), p("x3^3 + 2*x2^2 - x1", &c)];
    let good = looped(&c, Some(&[1, 1, -1]), "1", &[&["x1^3 - x2^2", "x1 - x2^2", "0"]]);
    let rep = verify_invariants(&good, &g).unwrap();
    assert!(rep.passed, "{rep}");
    let bad = looped(&c, Some(&[1, 2, -1]), "1", &[&["x1^3 - x2^2", "x1 - x2^2", "0"]]);
    let rep = verify_invariants(&bad, &g).unwrap();
    assert!(!rep.passed);
    assert!(rep.witnesses.iter().any(|w| matches!(w, Witness::Generator { value, .. } if *value == rat(3))));
    assert!(!simulate_loop(&bad, &g, 0, 1).unwrap().passed);
}

#[test]
fn identity_loop_membership() {
    let c = prog(&["x1", "x2"]);
    let lp = looped(&c, Some(&[2, 4]), "1", &[&["x1", "x2"]]);
    assert!(verify_invariants(&lp, &[p("x1^2 - x2", &c)]).unwrap().passed);
}

#[test]
fn missing_initial_value() {
    let c = prog(&["x1"]);
    let lp = looped(&c, None, "1", &[&["x1"]]);
    assert_eq!(verify_invariants(&lp, &[p("x1", &c)]), Err(VerifyError::NoInitial));
    assert_eq!(simulate_loop(&lp, &[p("x1", &c)], 3, 8), Err(VerifyError::NoInitial));
}

#[test]
fn markov_simulation_visits_triples() {
    let (lp, g) = markov_loop();
    let rep = simulate_loop(&lp, &g, 6, 64).unwrap();
    assert!(rep.passed, "{rep}");
    assert_eq!(rep.words, 64);
    assert_eq!(rep.seed, None);
    // independent replay of one word
    let mut s = vec![rat(1), rat(1), rat(2)];
    for b in [0, 1, 1, 0, 1, 0] {
        s = lp.maps[b].apply(&s);
        let (x, y, z) = (&s[0], &s[1], &s[2]);
        assert!((x * x + y * y + z * z - rat(3) * x * y * z).is_zero());
    }
}

#[test]
fn violation_at_step_zero() {
    let c = prog(&["x1"]);
    let lp = looped(&c, Some(&[1]), "1", &[&["x1"]]);
    let rep = simulate_loop(&lp, &[p("x1 - 2", &c)], 4, 16).unwrap();
    assert!(!rep.passed);
    let Witness::Trace { step, value, .. } = &rep.witnesses[0] else { panic!() };
    assert_eq!((*step, value.clone()), (0, rat(-1)));
}

#[test]
fn guard_stops_immediately() {
    let c = prog(&["x1", "x2"]);
    let g = [p("x2", &c)];
    let guarded = looped(&c, Some(&[0, 0]), "x1", &[&["x1 + 1", "x2 + 5"]]);
    assert!(simulate_loop(&guarded, &g, 5, 32).unwrap().passed);
    assert!(verify_invariants(&guarded, &g).unwrap().passed);
    let open = looped(&c, Some(&[0, 0]), "1", &[&["x1 + 1", "x2 + 5"]]);
    let rep = simulate_loop(&open, &g, 5, 32).unwrap();
    assert!(!rep.passed);
    let Witness::Trace { step, .. } = &rep.witnesses[0] else { panic!() };
    assert_eq!(*step, 1);
    assert!(!verify_invariants(&open, &g).unwrap().passed);
}

#[test]
fn guard_exit_after_some_steps() {
    // x1 counts down to 0; x2 stays 0 only while the loop runs
    let c = prog(&["x1", "x2"]);
    let lp = looped(&c, Some(&[3, 0]), "x1", &[&["x1 - 1", "x2"]]);
    let g = [p("x2*x1", &c)];
    assert!(simulate_loop(&lp, &g, 6, 8).unwrap().passed);
    assert!(verify_invariants(&lp, &g).unwrap().passed);
}

#[test]
fn word_limit_and_sampling() {
    let (lp, g) = markov_loop();
    assert_eq!(simulate_loop(&lp, &g, 3, 0), Err(VerifyError::WordLimit));
    let opts = SimulateOptions { steps: 12, word_limit: 20, seed: 7 };
    let a = simulate_loop_with(&lp, &g, &opts).unwrap();
    assert!(a.passed);
    assert_eq!((a.words, a.seed), (20, Some(7)));
    assert_eq!(simulate_loop_with(&lp, &g, &opts).unwrap(), a);
}

#[test]
fn perturbed_markov_fails() {
    let (g, t) = markov();
    let mut sol = markov_solution();
    sol.insert("y3".into(), rat(2));
    let c = t.context();
    let lp = ConcreteLoop::new(c, Some(vec![rat(1), rat(1), rat(2)]), Polynomial::one(c), t.instantiate(&sol).unwrap()).unwrap();
    assert!(!verify_universal(&lp, &g).unwrap().passed);
    assert!(!simulate_loop(&lp, &g, 4, 16).unwrap().passed);
}

fn small_loop() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, usize)> {
    (prop::collection::vec(-2i64..=2, 4), prop::collection::vec(-2i64..=2, 2), 0usize..3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn membership_implies_simulation((m, a, gi) in small_loop()) {
        let c = prog(&["x1", "x2"]);
        let f1 = format!("{}*x1 + {}*x2", m[0], m[1]);
        let f2 = format!("{}*x1 + {}*x2", m[2], m[3]);
        let lp = looped(&c, Some(&a), "1", &[&[&f1, &f2]]);
        let g = [["x1 - x2", "x1^2 - x2^2", "x1*x2"][gi]];
        let g: Vec<Polynomial> = g.iter().map(|s| p(s, &c)).collect();
        let member = verify_invariants(&lp, &g).unwrap();
        let sim = simulate_loop(&lp, &g, 8, 256).unwrap();
        if member.passed {
            prop_assert!(sim.passed);
        }
        // a single linear branch over two variables: 8 steps see the whole orbit's ideal
        prop_assert_eq!(member.passed, sim.passed);
    }

    #[test]
    fn universal_implies_inductive(a in prop::collection::vec(-3i64..=3, 3)) {
        let (lp, g) = markov_loop();
        let start: Vec<Rational> = a.iter().map(|&v| rat(v)).collect();
        let shifted = &g[0] - &Polynomial::constant(&lp.ctx, g[0].evaluate(&start));
        let lp = ConcreteLoop { initial: Some(start), ..lp };
        prop_assert!(verify_universal(&lp, std::slice::from_ref(&shifted)).unwrap().passed);
        prop_assert!(simulate_loop(&lp, std::slice::from_ref(&shifted), 5, 32).unwrap().passed);
    }
}
