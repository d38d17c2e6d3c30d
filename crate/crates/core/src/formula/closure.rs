use std::collections::HashSet;
use std::sync::Arc;

use super::transform::desugar_path;
use super::{Formula, PathExpr};

/// Fischer-Ladner closure of a core formula.
///
/// Members appear in discovery order: a depth-first preorder in which a
/// modality is first decomposed along its path and then continues with its
/// argument. Boxes are unfolded like diamonds. The step carries the implicit
/// test `tt?`, so `<step>psi` and `[step]psi` contribute `tt`. The negations
/// demanded by the closure rules are appended after all positive members, in
/// the same order.
pub fn closure(f: &Formula) -> Vec<Formula> {
    let positive = positive_closure(f);
    let mut seen: HashSet<Formula> = positive.iter().cloned().collect();
    let mut out = positive.clone();
    for g in &positive {
        if matches!(g, Formula::Neg(_)) {
            continue;
        }
        let n = Formula::Neg(Arc::new(g.clone()));
        if seen.insert(n.clone()) {
            out.push(n);
        }
    }
    out
}

/// The closure without the added negations.
pub fn positive_closure(f: &Formula) -> Vec<Formula> {
    let mut walker = Walker::default();
    walker.visit(f);
    walker.order
}

#[derive(Default)]
struct Walker {
    seen: HashSet<Formula>,
    order: Vec<Formula>,
}

impl Walker {
    fn visit(&mut self, f: &Formula) {
        if !self.seen.insert(f.clone()) {
            return;
        }
        self.order.push(f.clone());
        match f {
            Formula::Neg(g) => self.visit(g),
            Formula::Diamond(p, g) => self.modal(true, p, g),
            Formula::Box(p, g) => self.modal(false, p, g),
            _ => {}
        }
    }

    fn modal(&mut self, diamond: bool, p: &Arc<PathExpr>, g: &Arc<Formula>) {
        match p.as_ref() {
            PathExpr::Step => self.visit(&Formula::True),
            PathExpr::Test(t) => self.visit(t),
            PathExpr::Seq(p1, p2) => {
                let inner = Formula::modal_with(diamond, p2.clone(), g.clone());
                self.visit(&Formula::modal_with(diamond, p1.clone(), Arc::new(inner)));
            }
            PathExpr::Choice(p1, p2) => {
                self.visit(&Formula::modal_with(diamond, p1.clone(), g.clone()));
                self.visit(&Formula::modal_with(diamond, p2.clone(), g.clone()));
            }
            PathExpr::Star(q) => {
                let again = Formula::modal_with(diamond, p.clone(), g.clone());
                self.visit(&Formula::modal_with(diamond, q.clone(), Arc::new(again)));
            }
            PathExpr::Prop(_) => {
                // Walk the desugared shape without recording it as a member.
                self.modal(diamond, &Arc::new(desugar_path(p)), g);
                return;
            }
        }
        self.visit(g);
    }
}

impl Formula {
    /// `<p> g` when `diamond`, `[p] g` otherwise.
    pub fn modal_with(diamond: bool, p: Arc<PathExpr>, g: Arc<Formula>) -> Formula {
        if diamond {
            Formula::Diamond(p, g)
        } else {
            Formula::Box(p, g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::running_example;

    fn a() -> Formula {
        Formula::atom("a")
    }

    #[test]
    fn closure_of_atom() {
        assert_eq!(closure(&a()), vec![a(), Formula::neg(a())]);
    }

    #[test]
    fn running_example_positive_members_in_listing_order() {
        let b = Formula::atom("b");
        let always_b = Formula::boxed(PathExpr::star(PathExpr::Step), b.clone());
        let next_a = Formula::diamond(PathExpr::Step, a());
        let expected = vec![
            running_example(),
            Formula::diamond(PathExpr::test(always_b.clone()), next_a.clone()),
            always_b.clone(),
            Formula::boxed(PathExpr::Step, always_b),
            Formula::True,
            b,
            next_a,
            a(),
        ];
        assert_eq!(positive_closure(&running_example()), expected);
        let full = closure(&running_example());
        assert_eq!(full.len(), 16);
        assert_eq!(full[8], Formula::neg(running_example()));
    }

    #[test]
    fn eventually_unfolds() {
        let f = Formula::diamond(PathExpr::star(PathExpr::Step), a());
        let cl = closure(&f);
        let unfolded = Formula::diamond(PathExpr::Step, f.clone());
        for m in [f.clone(), unfolded.clone(), a()] {
            assert!(cl.contains(&m), "missing {m}");
            assert!(cl.contains(&Formula::neg(m)));
        }
    }

    #[test]
    fn negated_members_are_not_negated_again() {
        let f = Formula::neg(a());
        let cl = closure(&f);
        assert_eq!(cl, vec![Formula::neg(a()), a()]);
    }
}
