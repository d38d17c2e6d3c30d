use std::sync::Arc;

use super::{Formula, PathExpr};

/// Rewrites every derived operator into diamonds, boxes and tests.
///
/// Negation is kept as a node; everything else ends up as `tt`, `ff`,
/// atoms, `<rho>`, `[rho]` over paths built from `step`, tests, `+`, `;`, `*`.
pub fn desugar(f: &Formula) -> Formula {
    use Formula as F;
    match f {
        F::True | F::False | F::Prop(_) => f.clone(),
        F::Neg(g) => F::neg(desugar(g)),
        F::Diamond(p, g) => F::diamond(desugar_path(p), desugar(g)),
        F::Box(p, g) => F::boxed(desugar_path(p), desugar(g)),
        F::And(l, r) => F::diamond(PathExpr::test(desugar(l)), desugar(r)),
        F::Or(l, r) => F::diamond(
            PathExpr::choice(PathExpr::test(desugar(l)), PathExpr::test(desugar(r))),
            F::True,
        ),
        F::Implies(l, r) => F::boxed(PathExpr::test(desugar(l)), desugar(r)),
        F::Next(g) => F::diamond(PathExpr::Step, desugar(g)),
        F::WeakNext(g) => F::boxed(PathExpr::Step, desugar(g)),
        F::Final => F::boxed(PathExpr::Step, F::False),
        F::Eventually(g) => F::diamond(PathExpr::star(PathExpr::Step), desugar(g)),
        F::Always(g) => F::boxed(PathExpr::star(PathExpr::Step), desugar(g)),
        F::Until(l, r) => F::diamond(
            PathExpr::star(PathExpr::seq(PathExpr::test(desugar(l)), PathExpr::Step)),
            desugar(r),
        ),
        F::Release(l, r) => {
            let l = l.as_ref().clone();
            let r = r.as_ref().clone();
            desugar(&F::or(
                F::until(r.clone(), F::and(l, r.clone())),
                F::always(r),
            ))
        }
    }
}

pub fn desugar_path(p: &PathExpr) -> PathExpr {
    match p {
        PathExpr::Step => PathExpr::Step,
        PathExpr::Test(f) => PathExpr::test(desugar(f)),
        PathExpr::Choice(l, r) => PathExpr::choice(desugar_path(l), desugar_path(r)),
        PathExpr::Seq(l, r) => PathExpr::seq(desugar_path(l), desugar_path(r)),
        PathExpr::Star(q) => PathExpr::star(desugar_path(q)),
        PathExpr::Prop(f) => PathExpr::seq(PathExpr::test(desugar(f)), PathExpr::Step),
    }
}

/// Negation normal form.
///
/// Core input stays core. Derived operators are also accepted and pushed
/// through their duals, so `!(a & b)` becomes `!a | !b`.
pub fn nnf(f: &Formula) -> Formula {
    positive(f)
}

pub fn nnf_path(p: &PathExpr) -> PathExpr {
    match p {
        PathExpr::Step => PathExpr::Step,
        PathExpr::Test(f) => PathExpr::test(positive(f)),
        PathExpr::Prop(f) => PathExpr::prop(positive(f)),
        PathExpr::Choice(l, r) => PathExpr::choice(nnf_path(l), nnf_path(r)),
        PathExpr::Seq(l, r) => PathExpr::seq(nnf_path(l), nnf_path(r)),
        PathExpr::Star(q) => PathExpr::star(nnf_path(q)),
    }
}

fn positive(f: &Formula) -> Formula {
    use Formula as F;
    match f {
        F::True | F::False | F::Prop(_) | F::Final => f.clone(),
        F::Neg(g) => negative(g),
        F::Diamond(p, g) => F::diamond(nnf_path(p), positive(g)),
        F::Box(p, g) => F::boxed(nnf_path(p), positive(g)),
        F::And(l, r) => F::and(positive(l), positive(r)),
        F::Or(l, r) => F::or(positive(l), positive(r)),
        F::Implies(l, r) => F::or(negative(l), positive(r)),
        F::Next(g) => F::next(positive(g)),
        F::WeakNext(g) => F::weak_next(positive(g)),
        F::Eventually(g) => F::eventually(positive(g)),
        F::Always(g) => F::always(positive(g)),
        F::Until(l, r) => F::until(positive(l), positive(r)),
        F::Release(l, r) => F::release(positive(l), positive(r)),
    }
}

/// NNF of the negation of `f`.
fn negative(f: &Formula) -> Formula {
    use Formula as F;
    match f {
        F::True => F::False,
        F::False => F::True,
        F::Prop(_) => F::Neg(Arc::new(f.clone())),
        F::Neg(g) => positive(g),
        F::Diamond(p, g) => F::boxed(nnf_path(p), negative(g)),
        F::Box(p, g) => F::diamond(nnf_path(p), negative(g)),
        F::And(l, r) => F::or(negative(l), negative(r)),
        F::Or(l, r) => F::and(negative(l), negative(r)),
        F::Implies(l, r) => F::and(positive(l), negative(r)),
        F::Next(g) => F::weak_next(negative(g)),
        F::WeakNext(g) => F::next(negative(g)),
        F::Eventually(g) => F::always(negative(g)),
        F::Always(g) => F::eventually(negative(g)),
        F::Final => F::next(F::True),
        F::Until(l, r) => F::release(negative(l), negative(r)),
        F::Release(l, r) => F::until(negative(l), negative(r)),
    }
}

/// True iff the path contains no `step`, i.e. it only relates a point to itself.
pub fn is_test_only(p: &PathExpr) -> bool {
    match p {
        PathExpr::Step | PathExpr::Prop(_) => false,
        PathExpr::Test(_) => true,
        PathExpr::Choice(l, r) | PathExpr::Seq(l, r) => is_test_only(l) && is_test_only(r),
        PathExpr::Star(q) => is_test_only(q),
    }
}

/// Only `tt`, `ff`, atoms, negation, diamonds and boxes over sugar-free paths.
pub fn is_core(f: &Formula) -> bool {
    use Formula as F;
    match f {
        F::True | F::False | F::Prop(_) => true,
        F::Neg(g) => is_core(g),
        F::Diamond(p, g) | F::Box(p, g) => is_core_path(p) && is_core(g),
        _ => false,
    }
}

fn is_core_path(p: &PathExpr) -> bool {
    match p {
        PathExpr::Step => true,
        PathExpr::Test(f) => is_core(f),
        PathExpr::Choice(l, r) | PathExpr::Seq(l, r) => is_core_path(l) && is_core_path(r),
        PathExpr::Star(q) => is_core_path(q),
        PathExpr::Prop(_) => false,
    }
}

/// Negation only directly above atoms, no implications; tests included.
pub fn is_nnf(f: &Formula) -> bool {
    use Formula as F;
    match f {
        F::True | F::False | F::Prop(_) | F::Final => true,
        F::Neg(g) => matches!(g.as_ref(), F::Prop(_)),
        F::Implies(..) => false,
        F::Diamond(p, g) | F::Box(p, g) => is_nnf_path(p) && is_nnf(g),
        F::And(l, r) | F::Or(l, r) | F::Until(l, r) | F::Release(l, r) => is_nnf(l) && is_nnf(r),
        F::Next(g) | F::WeakNext(g) | F::Eventually(g) | F::Always(g) => is_nnf(g),
    }
}

fn is_nnf_path(p: &PathExpr) -> bool {
    match p {
        PathExpr::Step => true,
        PathExpr::Test(f) | PathExpr::Prop(f) => is_nnf(f),
        PathExpr::Choice(l, r) | PathExpr::Seq(l, r) => is_nnf_path(l) && is_nnf_path(r),
        PathExpr::Star(q) => is_nnf_path(q),
    }
}
