use std::collections::BTreeSet;
use std::sync::Arc;

use ldlf::afw::build_afw;
use ldlf::automata::{afw_to_nfa, nfa_to_dfa, DEFAULT_STATE_CAP};
use ldlf::formula::{closure, desugar, desugar_path, is_core, is_nnf, nnf, parse, print};
use ldlf::mso::{eval_mso, st_p, standard_translation, closure_encoding, Assignment, FoVar, VarGen};
use ldlf::semantics::{rel, sat, truth_all, Evaluator};
use ldlf::trace::{alphabet, enumerate_traces, trace_count};
use ldlf::{Atom, Dialect, Formula, PathExpr, Trace};
use proptest::prelude::*;

fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![Just(Formula::atom("a")), Just(Formula::atom("b"))]
}

fn formula_with(depth: u32) -> BoxedStrategy<Formula> {
    let leaf = prop_oneof![
        4 => atom(),
        1 => Just(Formula::True),
        1 => Just(Formula::False),
        1 => Just(Formula::Final),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        let path = path_over(inner.clone().boxed());
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (path.clone(), inner.clone()).prop_map(|(p, f)| Formula::diamond(p, f)),
            (path, inner.clone()).prop_map(|(p, f)| Formula::boxed(p, f)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::weak_next),
            inner.clone().prop_map(Formula::eventually),
            inner.clone().prop_map(Formula::always),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::until(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::release(l, r)),
        ]
    })
    .boxed()
}

fn path_over(f: BoxedStrategy<Formula>) -> BoxedStrategy<PathExpr> {
    let leaf = prop_oneof![
        2 => Just(PathExpr::Step),
        1 => f.clone().prop_map(PathExpr::test),
        1 => atom().prop_map(PathExpr::prop),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| PathExpr::choice(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| PathExpr::seq(l, r)),
            inner.prop_map(PathExpr::star),
        ]
    })
    .boxed()
}

/// Formulas built only from constructors that have a theory-grammar token.
fn theory_formula() -> BoxedStrategy<Formula> {
    let leaf = prop_oneof![4 => atom(), 1 => Just(Formula::True), 1 => Just(Formula::False)];
    leaf.prop_recursive(3, 24, 2, |inner| {
        let path_leaf = prop_oneof![
            2 => Just(PathExpr::Step),
            1 => inner.clone().prop_map(PathExpr::test),
            1 => atom().prop_map(PathExpr::prop),
        ];
        let path = path_leaf.prop_recursive(2, 8, 2, |p| {
            prop_oneof![
                (p.clone(), p.clone()).prop_map(|(l, r)| PathExpr::choice(l, r)),
                (p.clone(), p.clone()).prop_map(|(l, r)| PathExpr::seq(l, r)),
                p.prop_map(PathExpr::star),
            ]
        });
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (path.clone(), inner.clone()).prop_map(|(p, f)| Formula::diamond(p, f)),
            (path, inner.clone()).prop_map(|(p, f)| Formula::boxed(p, f)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::or(l, r)),
        ]
    })
    .boxed()
}

fn formula() -> BoxedStrategy<Formula> {
    formula_with(3)
}

fn small_formula() -> BoxedStrategy<Formula> {
    formula_with(2)
}

fn path() -> BoxedStrategy<PathExpr> {
    path_over(small_formula())
}

fn trace(max_len: usize, atoms: &'static [&'static str]) -> impl Strategy<Value = Trace> {
    let n = atoms.len();
    prop::collection::vec(prop::collection::vec(any::<bool>(), n), 1..=max_len).prop_map(move |rows| {
        let states: Vec<Vec<&str>> = rows
            .iter()
            .map(|row| atoms.iter().zip(row).filter(|(_, &on)| on).map(|(a, _)| *a).collect())
            .collect();
        let refs: Vec<&[&str]> = states.iter().map(Vec::as_slice).collect();
        Trace::from_names(&refs).with_alphabet(alphabet(atoms))
    })
}

fn traces(max_len: usize) -> Vec<Trace> {
    enumerate_traces(&alphabet(&["a", "b"]), max_len).unwrap().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonical_round_trip(f in formula()) {
        let text = print(&f, Dialect::Canonical);
        prop_assert_eq!(parse(&text, Dialect::Canonical).unwrap(), f, "{}", text);
    }

    #[test]
    fn theory_round_trip(f in theory_formula()) {
        let text = print(&f, Dialect::TheoryGrammar);
        prop_assert_eq!(parse(&text, Dialect::TheoryGrammar).unwrap(), f, "{}", text);
    }

    #[test]
    fn theory_printing_of_derived_operators_is_stable(f in formula(), t in trace(4, &["a", "b"])) {
        let text = print(&f, Dialect::TheoryGrammar);
        let back = parse(&text, Dialect::TheoryGrammar).unwrap();
        prop_assert_eq!(print(&back, Dialect::TheoryGrammar), text);
        prop_assert_eq!(truth_all(&t, &back), truth_all(&t, &f));
    }

    #[test]
    fn desugar_and_nnf_shapes(f in formula()) {
        let core = desugar(&f);
        prop_assert!(is_core(&core));
        let n = nnf(&core);
        prop_assert!(is_core(&n));
        prop_assert!(is_nnf(&n));
    }

    #[test]
    fn negations_are_in_closure(f in formula()) {
        let cl = closure(&desugar(&f));
        let members: BTreeSet<&Formula> = cl.iter().collect();
        for psi in &cl {
            if !matches!(psi, Formula::Neg(_)) {
                let neg = Formula::Neg(Arc::new(psi.clone()));
                prop_assert!(members.contains(&neg), "missing negation of {}", psi);
            }
        }
    }

    #[test]
    fn memoization_is_transparent(f in formula(), t in trace(5, &["a", "b"])) {
        let core = desugar(&f);
        let cached = Evaluator::with_memo(&t, true).truth(&core);
        let plain = Evaluator::with_memo(&t, false).truth(&core);
        prop_assert_eq!(cached, plain);
    }

    #[test]
    fn rel_never_goes_backward(p in path(), t in trace(6, &["a", "b"])) {
        let r = rel(&desugar_path(&p), &t);
        for (x, y) in r.pairs() {
            prop_assert!(x <= y && y < t.len());
        }
    }

    #[test]
    fn star_is_least_reflexive_transitive_fixpoint(p in path(), t in trace(5, &["a", "b"])) {
        let body = desugar_path(&p);
        let base = rel(&body, &t).pairs();
        let star = rel(&PathExpr::star(body), &t).pairs();
        prop_assert!(base.is_subset(&star));
        let mut expected: BTreeSet<(usize, usize)> = (0..t.len()).map(|i| (i, i)).collect();
        loop {
            let step: BTreeSet<(usize, usize)> = expected
                .iter()
                .flat_map(|&(x, y)| base.iter().filter(move |&&(u, _)| u == y).map(move |&(_, z)| (x, z)))
                .collect();
            let before = expected.len();
            expected.extend(step);
            if expected.len() == before {
                break;
            }
        }
        prop_assert_eq!(star, expected);
    }

    #[test]
    fn validities_hold_on_random_traces(
        p1 in path(),
        p2 in path(),
        f in small_formula(),
        t in trace(8, &["a", "b", "c"]),
    ) {
        for (i, v) in validities(&p1, &p2, &f).iter().enumerate() {
            prop_assert!(truth_all(&t, v).iter().all(|&b| b), "item {} fails: {} on {:?}", i + 1, v, t);
        }
    }

    #[test]
    fn letter_marks_last_only_at_the_end(t in trace(6, &["a", "b", "c"])) {
        for i in 0..t.len() {
            let letter = t.letter_at(i).unwrap();
            prop_assert_eq!(letter.holds(&ldlf::Symbol::Last), i + 1 == t.len());
        }
        prop_assert!(t.letter_at(t.len()).is_err());
    }

    #[test]
    fn trace_json_round_trip(t in trace(6, &["a", "b", "c"])) {
        let back = Trace::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back.states(), t.states());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn automata_agree_with_semantics(f in small_formula(), t in trace(5, &["a", "b"])) {
        let afw = build_afw(&f);
        let nfa = afw_to_nfa(&afw);
        let dfa = nfa_to_dfa(&nfa, DEFAULT_STATE_CAP).unwrap();
        let min = dfa.minimize();
        let expected = sat(&t, 0, &f).unwrap();
        prop_assert_eq!(afw.accepts(&t), expected);
        prop_assert_eq!(nfa.accepts(&t), expected);
        prop_assert_eq!(dfa.accepts(&t), expected);
        prop_assert_eq!(min.accepts(&t), expected);
    }

    #[test]
    fn dfas_are_deterministic_complete_and_minimal(f in small_formula()) {
        let dfa = nfa_to_dfa(&afw_to_nfa(&build_afw(&f)), DEFAULT_STATE_CAP).unwrap();
        prop_assert!(dfa.is_deterministic_and_complete());
        let min = dfa.minimize();
        prop_assert!(min.is_deterministic_and_complete());
        prop_assert!(min.num_states() <= dfa.num_states());
        prop_assert_eq!(min.minimize().num_states(), min.num_states());
        prop_assert!(ldlf::automata::bounded_difference(&dfa, &min, 4).unwrap().is_none());
    }

    #[test]
    fn mso_translations_are_fresh_and_adequate(f in small_formula(), t in trace(3, &["a", "b"])) {
        let st = standard_translation("t", &f);
        let enc = closure_encoding("t", &f);
        prop_assert!(st.rebound_names().is_empty());
        prop_assert!(enc.rebound_names().is_empty());
        for k in 0..t.len() {
            let at = Assignment::new().with_fo("t", k);
            let expected = sat(&t, k, &f).unwrap();
            prop_assert_eq!(eval_mso(&t, &st, &at).unwrap(), expected);
            prop_assert_eq!(eval_mso(&t, &enc, &at).unwrap(), expected);
        }
    }

    #[test]
    fn path_translation_matches_relation(p in path(), t in trace(3, &["a", "b"])) {
        let (x, y) = (FoVar::new("x"), FoVar::new("y"));
        let mut g = VarGen::new();
        g.reserve("x");
        g.reserve("y");
        let psi = st_p(&x, &y, &p, &mut g);
        let r = rel(&desugar_path(&p), &t);
        for k in 0..t.len() {
            for d in 0..t.len() {
                let at = Assignment::new().with_fo("x", k).with_fo("y", d);
                prop_assert_eq!(eval_mso(&t, &psi, &at).unwrap(), r.contains(k, d), "({}, {})", k, d);
            }
        }
    }
}

/// The six valid equivalences relating modalities over compound paths.
fn validities(p1: &PathExpr, p2: &PathExpr, f: &Formula) -> Vec<Formula> {
    let iff = |l: Formula, r: Formula| Formula::and(Formula::implies(l.clone(), r.clone()), Formula::implies(r, l));
    let dia = |p: &PathExpr, g: Formula| Formula::diamond(p.clone(), g);
    let bx = |p: &PathExpr, g: Formula| Formula::boxed(p.clone(), g);
    let choice = PathExpr::choice(p1.clone(), p2.clone());
    let seq = PathExpr::seq(p1.clone(), p2.clone());
    let star = PathExpr::star(p1.clone());
    let f = f.clone();
    vec![
        iff(bx(&choice, f.clone()), Formula::and(bx(p1, f.clone()), bx(p2, f.clone()))),
        iff(dia(&choice, f.clone()), Formula::or(dia(p1, f.clone()), dia(p2, f.clone()))),
        iff(bx(&seq, f.clone()), bx(p1, bx(p2, f.clone()))),
        iff(dia(&seq, f.clone()), dia(p1, dia(p2, f.clone()))),
        iff(bx(&star, f.clone()), Formula::and(f.clone(), bx(p1, bx(&star, f.clone())))),
        iff(dia(&star, f.clone()), Formula::or(f.clone(), dia(p1, dia(&star, f)))),
    ]
}

#[test]
fn enumeration_matches_closed_form() {
    for n in 0..=3 {
        let names = ["a", "b", "c"];
        let alpha = alphabet(&names[..n]);
        for len in 1..=4 {
            let all: Vec<Trace> = enumerate_traces(&alpha, len).unwrap().collect();
            assert_eq!(all.len() as u128, trace_count(n, len));
            let distinct: BTreeSet<Vec<BTreeSet<Atom>>> = all.iter().map(|t| t.states().to_vec()).collect();
            assert_eq!(distinct.len(), all.len());
        }
    }
    assert_eq!(trace_count(2, 2), 20);
    assert_eq!(trace_count(2, 3), 84);
}

#[test]
fn nnf_preserves_truth_on_corpus() {
    let all = traces(3);
    for entry in ldlf::corpus::corpus() {
        let n = nnf(&desugar(&entry.formula));
        for t in &all {
            assert_eq!(truth_all(t, &entry.formula)[0], truth_all(t, &n)[0], "{} on {:?}", entry.name, t);
        }
    }
}

#[test]
fn eventually_matches_reachability() {
    let f = Formula::eventually(Formula::atom("a"));
    let a = Atom::new("a").unwrap();
    for t in traces(4) {
        assert_eq!(sat(&t, 0, &f).unwrap(), (0..t.len()).any(|i| t.holds(i, &a)));
    }
}
