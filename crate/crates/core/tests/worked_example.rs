use ldlf::afw::build_afw;
use ldlf::automata::{afw_to_nfa, bounded_difference, dfa_from_dot, nfa_to_dfa, DEFAULT_STATE_CAP};
use ldlf::formula::{parse, running_example};
use ldlf::mso::{eval_mso, standard_translation, closure_encoding, Assignment};
use ldlf::semantics::{models, rel};
use ldlf::trace::{alphabet, enumerate_traces};
use ldlf::{Dialect, Formula, PathExpr, Trace};

const REFERENCE: &str = include_str!("fixtures/reference_dfa.dot");

fn accepted() -> Trace {
    Trace::from_names(&[&["b"], &["a", "b"], &["b"]])
}

fn rejected() -> Trace {
    Trace::from_names(&[&["b"], &["a"], &["b"]])
}

#[test]
fn running_example_parses_from_both_dialects() {
    let f = running_example();
    assert_eq!(parse("<(([step*] b)?) ; step> a", Dialect::Canonical).unwrap(), f);
    assert_eq!(parse("(? (* &t .>* b) ;; &t) .>? a", Dialect::TheoryGrammar).unwrap(), f);
}

#[test]
fn every_engine_separates_the_two_traces() {
    let f = running_example();
    let afw = build_afw(&f);
    let nfa = afw_to_nfa(&afw);
    let dfa = nfa_to_dfa(&nfa, DEFAULT_STATE_CAP).unwrap();
    let min = dfa.minimize();
    let st = standard_translation("t", &f);
    let enc = closure_encoding("t", &f);
    let at0 = Assignment::new().with_fo("t", 0);
    for (t, expected) in [(accepted(), true), (rejected(), false)] {
        assert_eq!(models(&t, &f), expected);
        assert_eq!(afw.accepts(&t), expected);
        assert_eq!(nfa.accepts(&t), expected);
        assert_eq!(dfa.accepts(&t), expected);
        assert_eq!(min.accepts(&t), expected);
        assert_eq!(eval_mso(&t, &st, &at0).unwrap(), expected);
        assert_eq!(eval_mso(&t, &enc, &at0).unwrap(), expected);
    }
}

#[test]
fn afw_has_three_reachable_states() {
    assert_eq!(build_afw(&running_example()).num_states(), 3);
}

#[test]
fn minimized_dfa_matches_the_reference_machine() {
    let reference = dfa_from_dot(REFERENCE).unwrap();
    assert_eq!(reference.num_states(), 4);
    assert!(reference.is_deterministic_and_complete());
    assert!(reference.accepts(&accepted()));
    assert!(!reference.accepts(&rejected()));

    let dfa = nfa_to_dfa(&afw_to_nfa(&build_afw(&running_example())), DEFAULT_STATE_CAP).unwrap();
    let min = dfa.minimize();
    assert_eq!(min.num_states(), 4);
    assert_eq!(bounded_difference(&min, &reference, 5).unwrap(), None);
    assert_eq!(bounded_difference(&dfa, &reference, 5).unwrap(), None);
}

#[test]
fn reference_machine_facts_mark_the_accepting_state() {
    let reference = dfa_from_dot(REFERENCE).unwrap();
    let facts = reference.to_facts();
    let accepting = reference.labels.iter().position(|l| l == "4").unwrap();
    assert!(facts.contains(&format!("final_state({}).", accepting)), "{facts}");
}

#[test]
fn six_short_traces_satisfy_the_running_example() {
    let f = running_example();
    let count = enumerate_traces(&alphabet(&["a", "b"]), 3)
        .unwrap()
        .filter(|t| models(t, &f))
        .count();
    assert_eq!(count, 6);
}

#[test]
fn relation_examples() {
    let three = Trace::from_names(&[&[], &[], &[]]);
    assert_eq!(rel(&PathExpr::Step, &three).pairs(), [(0, 1), (1, 2)].into());
    let two = Trace::from_names(&[&[], &[]]);
    assert_eq!(rel(&PathExpr::star(PathExpr::Step), &two).pairs(), [(0, 0), (0, 1), (1, 1)].into());
    let b_then_empty = Trace::from_names(&[&["b"], &[]]);
    let p = PathExpr::star(PathExpr::seq(PathExpr::test(Formula::atom("b")), PathExpr::Step));
    assert_eq!(rel(&p, &b_then_empty).pairs(), [(0, 0), (0, 1), (1, 1)].into());
}
