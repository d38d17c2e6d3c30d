//! Reduced ordered decision trees over user atoms.
//!
//! Used to split overlapping guards into disjoint, exhaustive cubes and as
//! a canonical form when comparing transition functions.

use std::collections::HashMap;

use crate::atom::{Atom, Symbol};
use crate::guard::Guard;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree<T> {
    Leaf(T),
    /// Branch on `atoms[i]`: absent, then present.
    Node(usize, Box<Tree<T>>, Box<Tree<T>>),
}

/// Builds the tree of `leaf` over the letters distinguished by `guards`.
///
/// `guards` must not mention `last`. At every leaf each guard is either
/// implied or contradicted by the cube passed to `leaf`.
pub fn build<T: Clone + Eq>(
    atoms: &[Atom],
    guards: &[Guard],
    leaf: &mut impl FnMut(&Guard) -> T,
) -> Tree<T> {
    let mut cube = Guard::top();
    let all: Vec<&Guard> = guards.iter().collect();
    go(atoms, 0, &mut cube, &all, leaf)
}

fn go<T: Clone + Eq>(
    atoms: &[Atom],
    from: usize,
    cube: &mut Guard,
    guards: &[&Guard],
    leaf: &mut impl FnMut(&Guard) -> T,
) -> Tree<T> {
    let live: Vec<&Guard> = guards.iter().copied().filter(|g| g.compatible(cube)).collect();
    let next = (from..atoms.len()).find(|&i| {
        let s = Symbol::Atom(atoms[i].clone());
        cube.get(&s).is_none() && live.iter().any(|g| g.get(&s).is_some())
    });
    let Some(i) = next else {
        return Tree::Leaf(leaf(cube));
    };
    let s = Symbol::Atom(atoms[i].clone());
    let saved = cube.clone();
    cube.insert(s.clone(), false);
    let lo = go(atoms, i + 1, cube, &live, leaf);
    *cube = saved.clone();
    cube.insert(s, true);
    let hi = go(atoms, i + 1, cube, &live, leaf);
    *cube = saved;
    if lo == hi {
        lo
    } else {
        Tree::Node(i, Box::new(lo), Box::new(hi))
    }
}

/// Bit positions of at most 64 atoms, for guard tests on `u64` masks.
pub(super) struct MaskIndex(HashMap<Atom, usize>);

impl MaskIndex {
    pub(super) fn new(atoms: &[Atom]) -> Option<MaskIndex> {
        (atoms.len() <= 64).then(|| MaskIndex(atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect()))
    }

    /// `(present, absent)` masks of the atom literals of `g`; `last` and
    /// unknown atoms are ignored.
    pub(super) fn masks(&self, g: &Guard) -> (u64, u64) {
        let mut m = (0u64, 0u64);
        for (s, positive) in g.literals() {
            if let Some(&i) = match s {
                Symbol::Atom(a) => self.0.get(a),
                Symbol::Last => None,
            } {
                if positive {
                    m.0 |= 1 << i;
                } else {
                    m.1 |= 1 << i;
                }
            }
        }
        m
    }
}

pub(super) fn compatible(x: (u64, u64), y: (u64, u64)) -> bool {
    x.0 & y.1 == 0 && x.1 & y.0 == 0
}

/// Like [`build`] for at most 64 atoms, with guards and cubes as
/// `(present, absent)` bitmasks over atom indices.
pub fn build_masked<T: Clone + Eq>(
    n_atoms: usize,
    guards: &[(u64, u64)],
    leaf: &mut impl FnMut(u64, u64) -> T,
) -> Tree<T> {
    assert!(n_atoms <= 64, "masked trees support at most 64 atoms");
    let all: Vec<(u64, u64)> = guards.to_vec();
    go_masked(n_atoms, 0, (0, 0), &all, leaf)
}

fn go_masked<T: Clone + Eq>(
    n_atoms: usize,
    from: usize,
    cube: (u64, u64),
    guards: &[(u64, u64)],
    leaf: &mut impl FnMut(u64, u64) -> T,
) -> Tree<T> {
    let live: Vec<(u64, u64)> = guards
        .iter()
        .copied()
        .filter(|(p, n)| p & cube.1 == 0 && n & cube.0 == 0)
        .collect();
    let fixed = cube.0 | cube.1;
    let mentioned = live.iter().fold(0u64, |m, (p, n)| m | p | n) & !fixed;
    let next = (from..n_atoms).find(|&i| mentioned >> i & 1 == 1);
    let Some(i) = next else {
        return Tree::Leaf(leaf(cube.0, cube.1));
    };
    let bit = 1u64 << i;
    let lo = go_masked(n_atoms, i + 1, (cube.0, cube.1 | bit), &live, leaf);
    let hi = go_masked(n_atoms, i + 1, (cube.0 | bit, cube.1), &live, leaf);
    if lo == hi {
        lo
    } else {
        Tree::Node(i, Box::new(lo), Box::new(hi))
    }
}

/// The tree of a function given as disjoint cubes; letters outside every
/// cube map to `default`.
pub fn from_cubes<T: Clone + Eq>(atoms: &[Atom], cubes: &[(Guard, T)], default: T) -> Tree<T> {
    let all: Vec<&(Guard, T)> = cubes.iter().collect();
    split(atoms, 0, &all, &default)
}

fn split<T: Clone + Eq>(atoms: &[Atom], from: usize, cubes: &[&(Guard, T)], default: &T) -> Tree<T> {
    let next = (from..atoms.len()).find(|&i| {
        let s = Symbol::Atom(atoms[i].clone());
        cubes.iter().any(|(g, _)| g.get(&s).is_some())
    });
    let Some(i) = next else {
        return Tree::Leaf(cubes.first().map_or_else(|| default.clone(), |(_, t)| t.clone()));
    };
    let s = Symbol::Atom(atoms[i].clone());
    let lo: Vec<&(Guard, T)> = cubes.iter().copied().filter(|(g, _)| g.get(&s) != Some(true)).collect();
    let hi: Vec<&(Guard, T)> = cubes.iter().copied().filter(|(g, _)| g.get(&s) != Some(false)).collect();
    let lo = split(atoms, i + 1, &lo, default);
    let hi = split(atoms, i + 1, &hi, default);
    if lo == hi {
        lo
    } else {
        Tree::Node(i, Box::new(lo), Box::new(hi))
    }
}

impl<T: Clone> Tree<T> {
    /// The leaves with the cubes leading to them, absent-branch first.
    pub fn cubes(&self, atoms: &[Atom]) -> Vec<(Guard, T)> {
        let mut out = Vec::new();
        self.walk(atoms, Guard::top(), &mut out);
        out
    }

    fn walk(&self, atoms: &[Atom], cube: Guard, out: &mut Vec<(Guard, T)>) {
        match self {
            Tree::Leaf(t) => out.push((cube, t.clone())),
            Tree::Node(i, lo, hi) => {
                let s = Symbol::Atom(atoms[*i].clone());
                let mut c = cube.clone();
                c.insert(s.clone(), false);
                lo.walk(atoms, c, out);
                let mut c = cube;
                c.insert(s, true);
                hi.walk(atoms, c, out);
            }
        }
    }

    pub fn map<U>(&self, f: &mut impl FnMut(&T) -> U) -> Tree<U> {
        match self {
            Tree::Leaf(t) => Tree::Leaf(f(t)),
            Tree::Node(i, lo, hi) => Tree::Node(*i, Box::new(lo.map(f)), Box::new(hi.map(f))),
        }
    }
}

impl<T: Clone + Eq> Tree<T> {
    /// Collapses branches whose children became equal (after a `map`).
    pub fn reduce(self) -> Tree<T> {
        match self {
            Tree::Leaf(t) => Tree::Leaf(t),
            Tree::Node(i, lo, hi) => {
                let lo = lo.reduce();
                let hi = hi.reduce();
                if lo == hi {
                    lo
                } else {
                    Tree::Node(i, Box::new(lo), Box::new(hi))
                }
            }
        }
    }
}
