use std::path::Path;

use loopforge_cli::pipeline::{run, smt_job, NonzeroChoice, Settings, Status};
use loopforge_cli::problem::{load, parse, Mode};
use loopforge_core::solve::{NonzeroPolicy, NumberSort};

fn settings() -> Settings {
    let solver_cmd = std::env::var("LOOPFORGE_SOLVER").unwrap_or_else(|_| "z3 -in".into());
    Settings { solver_cmd, solve: true, ..Settings::default() }
}

fn corpus(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

#[test]
fn identity_detected_through_the_solver() {
    let mut prob = load(&corpus("identity_only.loop")).unwrap();
    prob.mode = Mode::Universal;
    let o = run(&prob, &settings());
    assert_eq!(o.status, Some(Status::Identity));
    assert!(o.found.unwrap().is_identity());
}

#[test]
fn non_identity_preferred_when_available() {
    let text = "vars: x1 x2\ninvariants:\n  x1 + x2\nbranch:\n  x1 <- { x1, x2 }\n  x2 <- { x1, x2 }\nmode: universal\n";
    let prob = parse(text, "swap", "swap.loop").unwrap();
    let o = run(&prob, &settings());
    assert_eq!(o.status, Some(Status::Sat));
    assert!(!o.found.unwrap().is_identity());
}

#[test]
fn per_branch_groups_follow_the_template() {
    let prob = load(&corpus("markov_triples.loop")).unwrap();
    let o = run(&prob, &Settings::default());
    let sys = o.system.unwrap();
    let s = Settings { nonzero: NonzeroChoice::PerBranch, ..Settings::default() };
    let NonzeroPolicy::PerGroup(groups) = smt_job(&sys, &prob, &s).nonzero else { panic!() };
    assert_eq!(groups.len(), 2);
    assert_eq!(groups[0].len(), 7);
    assert_eq!(groups[1][0], "y8");
    let none = Settings { nonzero: NonzeroChoice::None, ..Settings::default() };
    assert_eq!(smt_job(&sys, &prob, &none).nonzero, NonzeroPolicy::None);
}

#[test]
fn real_sort_still_verifies() {
    let prob = load(&corpus("cubic.loop")).unwrap();
    let o = run(&prob, &Settings { sort: NumberSort::Real, ..settings() });
    assert_eq!(o.status, Some(Status::Sat), "{:?}", o.note);
    assert_eq!(o.verdict(), "pass");
}

#[test]
fn unsat_structure() {
    // x1 must stay 1 but the only generator is x1^2 scaled: x1 -> y*x1^2 with y != 0 keeps x1 - 1
    // only for y = 1, and then g o F - g = x1^2 - x1 is not zero
    let text = "vars: x1\ninvariants:\n  x1 - 1\nbranch:\n  x1 <- { x1^2 }\nmode: universal\n";
    let prob = parse(text, "u", "u.loop").unwrap();
    let o = run(&prob, &settings());
    assert_eq!(o.status, Some(Status::Unsat));
    assert_eq!(o.verdict(), "-");
}

#[test]
fn guard_template_needs_general_mode() {
    let text = "vars: x\nguard: template: x\ninvariants:\n  x\nbranch:\n  x <- { x }\nmode: universal\n";
    let prob = parse(text, "g", "g.loop").unwrap();
    let o = run(&prob, &settings());
    assert_eq!(o.status, Some(Status::Error));
}
