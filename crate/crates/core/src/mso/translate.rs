use std::collections::HashMap;

use super::{FoVar, Mso, SoVar, VarGen};
use crate::formula::{desugar, desugar_path, positive_closure, Formula, PathExpr};

/// Standard translation of a formula evaluated at `w`.
pub fn st_m(w: &FoVar, f: &Formula, g: &mut VarGen) -> Mso {
    use Formula as F;
    match f {
        F::True => Mso::True,
        F::False => Mso::False,
        F::Prop(a) => Mso::member(SoVar::Pred(a.clone()), w),
        F::Neg(a) => Mso::not(st_m(w, a, g)),
        F::And(a, b) => Mso::and(st_m(w, a, g), st_m(w, b, g)),
        F::Or(a, b) => Mso::or(st_m(w, a, g), st_m(w, b, g)),
        F::Implies(a, b) => Mso::implies(st_m(w, a, g), st_m(w, b, g)),
        F::Box(p, a) => {
            let v = g.fo("v");
            let path = st_p(w, &v, p, g);
            Mso::forall_fo(v.clone(), Mso::implies(path, st_m(&v, a, g)))
        }
        F::Diamond(p, a) => {
            let v = g.fo("v");
            let path = st_p(w, &v, p, g);
            Mso::exists_fo(v.clone(), Mso::and(path, st_m(&v, a, g)))
        }
        _ => st_m(w, &desugar(f), g),
    }
}

/// Standard translation of a path between `w` and `v`.
pub fn st_p(w: &FoVar, v: &FoVar, p: &PathExpr, g: &mut VarGen) -> Mso {
    match p {
        PathExpr::Step => Mso::Next(v.clone(), w.clone()),
        PathExpr::Test(f) => Mso::and(st_m(w, f, g), Mso::Eq(w.clone(), v.clone())),
        PathExpr::Choice(a, b) => Mso::or(st_p(w, v, a, g), st_p(w, v, b, g)),
        PathExpr::Seq(a, b) => {
            let u = g.fo("v");
            let left = st_p(w, &u, a, g);
            let right = st_p(&u, v, b, g);
            Mso::exists_fo(u, Mso::and(left, right))
        }
        PathExpr::Star(q) => {
            let set = g.so("X");
            let x = g.fo("x");
            let y = g.fo("y");
            let regular = Mso::forall_fo(
                x.clone(),
                Mso::forall_fo(
                    y.clone(),
                    Mso::implies(Mso::SuccIn(set.clone(), x.clone(), y.clone()), st_p(&x, &y, q, g)),
                ),
            );
            Mso::exists_so(
                set.clone(),
                Mso::and_all([
                    Mso::member(set.clone(), w),
                    Mso::member(set.clone(), v),
                    Mso::Bound(set, w.clone(), v.clone()),
                    regular,
                ]),
            )
        }
        PathExpr::Prop(_) => st_p(w, v, &desugar_path(p), g),
    }
}

/// `st_m` at a free variable named `var`, with a fresh generator.
pub fn standard_translation(var: &str, f: &Formula) -> Mso {
    let mut g = VarGen::new();
    g.reserve(var);
    st_m(&FoVar::new(var), f, &mut g)
}

/// `mso_enc` at a free variable named `var`, with a fresh generator.
pub fn closure_encoding(var: &str, f: &Formula) -> Mso {
    let mut g = VarGen::new();
    g.reserve(var);
    mso_enc(&FoVar::new(var), f, &mut g)
}

/// Closure encoding: one existentially quantified predicate per non-atomic
/// member of the positive closure, each constrained pointwise.
pub fn mso_enc(t: &FoVar, f: &Formula, g: &mut VarGen) -> Mso {
    let f = without_nullable_stars(&desugar(f));
    let members: Vec<Formula> = positive_closure(&f)
        .into_iter()
        .filter(|m| !matches!(m, Formula::True | Formula::False | Formula::Prop(_)))
        .collect();
    let preds: HashMap<Formula, SoVar> = members.iter().map(|m| (m.clone(), g.so("Q"))).collect();
    let at = |m: &Formula, x: &FoVar| -> Mso {
        match m {
            Formula::True => Mso::True,
            Formula::False => Mso::False,
            Formula::Prop(a) => Mso::member(SoVar::Pred(a.clone()), x),
            _ => Mso::member(preds[m].clone(), x),
        }
    };
    let head = at(&f, t);
    if members.is_empty() {
        return head;
    }
    let x = g.fo("x");
    let rows: Vec<Mso> = members
        .iter()
        .map(|m| Mso::iff(at(m, &x), row(m, &x, g, &at)))
        .collect();
    let mut out = Mso::and(head, Mso::forall_fo(x, Mso::and_all(rows)));
    for m in members.iter().rev() {
        out = Mso::exists_so(preds[m].clone(), out);
    }
    out
}

/// Right-hand side of the constraint for closure member `m` at `x`.
fn row(m: &Formula, x: &FoVar, g: &mut VarGen, at: &impl Fn(&Formula, &FoVar) -> Mso) -> Mso {
    use Formula as F;
    let (diamond, p, psi) = match m {
        F::Neg(a) => return Mso::not(at(a, x)),
        F::Diamond(p, a) => (true, p, a),
        F::Box(p, a) => (false, p, a),
        _ => unreachable!("closure member outside the core: {m}"),
    };
    let modal = |p: &PathExpr, a: Formula| Formula::modal_with(diamond, p.clone().into(), a.into());
    let join = |l: Mso, r: Mso| if diamond { Mso::or(l, r) } else { Mso::and(l, r) };
    match p.as_ref() {
        PathExpr::Step => {
            let y = g.fo("y");
            let next = Mso::Next(y.clone(), x.clone());
            if diamond {
                Mso::exists_fo(y.clone(), Mso::and(next, at(psi, &y)))
            } else {
                Mso::forall_fo(y.clone(), Mso::implies(next, at(psi, &y)))
            }
        }
        PathExpr::Test(c) => {
            if diamond {
                Mso::and(at(c, x), at(psi, x))
            } else {
                Mso::implies(at(c, x), at(psi, x))
            }
        }
        PathExpr::Choice(a, b) => join(at(&modal(a, psi.as_ref().clone()), x), at(&modal(b, psi.as_ref().clone()), x)),
        PathExpr::Seq(a, b) => at(&modal(a, modal(b, psi.as_ref().clone())), x),
        PathExpr::Star(q) => join(at(psi, x), at(&modal(q, m.clone()), x)),
        PathExpr::Prop(_) => unreachable!("desugared before encoding"),
    }
}

/// Rewrites `rho*` with a body that can finish without a step into an
/// equivalent star over the step-consuming part of the body, or `tt?` when
/// there is none. Afterwards every star body consumes at least one step.
pub fn without_nullable_stars(f: &Formula) -> Formula {
    use Formula as F;
    match f {
        F::Neg(a) => F::neg(without_nullable_stars(a)),
        F::Diamond(p, a) => F::diamond(rewrite_path(p), without_nullable_stars(a)),
        F::Box(p, a) => F::boxed(rewrite_path(p), without_nullable_stars(a)),
        F::True | F::False | F::Prop(_) => f.clone(),
        _ => without_nullable_stars(&desugar(f)),
    }
}

fn rewrite_path(p: &PathExpr) -> PathExpr {
    match p {
        PathExpr::Step => PathExpr::Step,
        PathExpr::Test(f) => PathExpr::test(without_nullable_stars(f)),
        PathExpr::Choice(a, b) => PathExpr::choice(rewrite_path(a), rewrite_path(b)),
        PathExpr::Seq(a, b) => PathExpr::seq(rewrite_path(a), rewrite_path(b)),
        PathExpr::Star(q) => {
            let q = rewrite_path(q);
            if !nullable(&q) {
                PathExpr::star(q)
            } else {
                match moving(&q) {
                    Some(r) => PathExpr::star(r),
                    None => PathExpr::test(Formula::True),
                }
            }
        }
        PathExpr::Prop(_) => rewrite_path(&desugar_path(p)),
    }
}

fn nullable(p: &PathExpr) -> bool {
    match p {
        PathExpr::Step | PathExpr::Prop(_) => false,
        PathExpr::Test(_) | PathExpr::Star(_) => true,
        PathExpr::Choice(a, b) => nullable(a) || nullable(b),
        PathExpr::Seq(a, b) => nullable(a) && nullable(b),
    }
}

fn either(a: Option<PathExpr>, b: Option<PathExpr>) -> Option<PathExpr> {
    match (a, b) {
        (Some(a), Some(b)) => Some(PathExpr::choice(a, b)),
        (a, b) => a.or(b),
    }
}

/// A test-only path relating exactly the pairs `(k,k)` of `p`.
fn staying(p: &PathExpr) -> Option<PathExpr> {
    match p {
        PathExpr::Step | PathExpr::Prop(_) => None,
        PathExpr::Test(_) => Some(p.clone()),
        PathExpr::Star(_) => Some(PathExpr::test(Formula::True)),
        PathExpr::Choice(a, b) => either(staying(a), staying(b)),
        PathExpr::Seq(a, b) => Some(PathExpr::seq(staying(a)?, staying(b)?)),
    }
}

/// A path relating exactly the pairs `(k,d)` of `p` with `k < d`. Its stars
/// are those of `p`, whose bodies are assumed already rewritten.
fn moving(p: &PathExpr) -> Option<PathExpr> {
    if !nullable(p) {
        return Some(p.clone());
    }
    match p {
        PathExpr::Test(_) => None,
        PathExpr::Choice(a, b) => either(moving(a), moving(b)),
        PathExpr::Seq(a, b) => either(
            moving(a).map(|a1| PathExpr::seq(a1, b.as_ref().clone())),
            staying(a).and_then(|a0| moving(b).map(|b1| PathExpr::seq(a0, b1))),
        ),
        PathExpr::Star(q) => moving(q).map(|q1| PathExpr::seq(q1, p.clone())),
        PathExpr::Step | PathExpr::Prop(_) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::running_example;

    fn v(n: &str) -> FoVar {
        FoVar::new(n)
    }

    fn pred(n: &str) -> SoVar {
        SoVar::Pred(crate::Atom::new(n).unwrap())
    }

    #[test]
    fn step_is_successor() {
        let mut g = VarGen::new();
        assert_eq!(st_p(&v("w"), &v("v"), &PathExpr::Step, &mut g), Mso::Next(v("v"), v("w")));
    }

    #[test]
    fn running_example_standard_translation() {
        let got = standard_translation("t", &running_example());
        let x = SoVar::Var("X".into());
        let star = Mso::exists_so(
            x.clone(),
            Mso::and_all([
                Mso::member(x.clone(), &v("t")),
                Mso::member(x.clone(), &v("c")),
                Mso::Bound(x.clone(), v("t"), v("c")),
                Mso::forall_fo(
                    v("x"),
                    Mso::forall_fo(
                        v("y"),
                        Mso::implies(Mso::SuccIn(x, v("x"), v("y")), Mso::Next(v("y"), v("x"))),
                    ),
                ),
            ]),
        );
        let always_b = Mso::forall_fo(v("c"), Mso::implies(star, Mso::member(pred("b"), &v("c"))));
        let expected = Mso::exists_fo(
            v("a0"),
            Mso::and(
                Mso::exists_fo(
                    v("b0"),
                    Mso::and(Mso::and(always_b, Mso::Eq(v("t"), v("b0"))), Mso::Next(v("a0"), v("b0"))),
                ),
                Mso::member(pred("a"), &v("a0")),
            ),
        );
        assert!(got.alpha_eq(&expected), "{got}");
        assert!(got.rebound_names().is_empty());
    }

    #[test]
    fn atom_encoding_has_no_predicates() {
        let got = closure_encoding("t", &Formula::atom("a"));
        assert_eq!(got, Mso::member(pred("a"), &v("t")));
    }

    #[test]
    fn running_example_encoding_rows() {
        let got = closure_encoding("t", &running_example());
        let q = |i: usize| SoVar::Var(format!("Q{i}"));
        let m = |i: usize, x: &str| Mso::member(q(i), &v(x));
        let rows = Mso::and_all([
            Mso::iff(m(0, "x"), m(1, "x")),
            Mso::iff(m(1, "x"), Mso::and(m(2, "x"), m(4, "x"))),
            Mso::iff(m(2, "x"), Mso::and(Mso::member(pred("b"), &v("x")), m(3, "x"))),
            Mso::iff(
                m(3, "x"),
                Mso::forall_fo(v("y"), Mso::implies(Mso::Next(v("y"), v("x")), m(2, "y"))),
            ),
            Mso::iff(
                m(4, "x"),
                Mso::exists_fo(v("y"), Mso::and(Mso::Next(v("y"), v("x")), Mso::member(pred("a"), &v("y")))),
            ),
        ]);
        let mut expected = Mso::and(m(0, "t"), Mso::forall_fo(v("x"), rows));
        for i in (0..5).rev() {
            expected = Mso::exists_so(q(i), expected);
        }
        assert!(got.alpha_eq(&expected), "{got}");
        assert!(got.rebound_names().is_empty());
    }

    #[test]
    fn nullable_star_rewrite() {
        let a = || Formula::atom("a");
        // <(a?)*> b  ==  <tt?> b
        let f = Formula::diamond(PathExpr::star(PathExpr::test(a())), Formula::atom("b"));
        assert_eq!(
            without_nullable_stars(&f),
            Formula::diamond(PathExpr::test(Formula::True), Formula::atom("b"))
        );
        // (a? + step)*  ==  (step)*
        let f = Formula::diamond(
            PathExpr::star(PathExpr::choice(PathExpr::test(a()), PathExpr::Step)),
            Formula::atom("b"),
        );
        assert_eq!(
            without_nullable_stars(&f),
            Formula::diamond(PathExpr::star(PathExpr::Step), Formula::atom("b"))
        );
        // Stars whose bodies always take a step are left alone.
        assert_eq!(without_nullable_stars(&running_example()), running_example());
    }
}
