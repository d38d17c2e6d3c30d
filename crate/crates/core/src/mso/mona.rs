use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write;

use super::{FoVar, Mso, SoVar};
use crate::atom::Atom;

/// Prefix added to atom names that clash with a MONA keyword or with a
/// variable of the formula.
pub const MONA_PREFIX: &str = "at_";

const KEYWORDS: &[&str] = &[
    "all0", "all1", "all2", "allpos", "assert", "const", "defaultwhere1", "defaultwhere2", "empty", "ex0", "ex1",
    "ex2", "execute", "export", "false", "guide", "import", "in", "include", "inter", "lastpos", "let0", "let1",
    "let2", "m2l", "m2l-str", "m2l-tree", "macro", "max", "min", "notin", "pred", "restrict", "root", "sub",
    "setminus", "true", "tree", "union", "universe", "var0", "var1", "var2", "variant", "verify", "where", "ws1s",
    "ws2s", "prefix", "sometype", "type",
];

/// Renders `psi` as an M2L-STR program over `alphabet`.
///
/// Every atom becomes a free `var2`. Free first-order variables are bound
/// to the first position. Macros are expanded and every compound
/// subformula is parenthesized.
pub fn emit_mona(psi: &Mso, alphabet: &BTreeSet<Atom>) -> String {
    let (free_fo, _) = psi.free_vars();
    let mut body = psi.clone();
    for x in free_fo.iter().rev() {
        body = Mso::exists_fo(x.clone(), Mso::and(Mso::First(x.clone()), body));
    }
    let body = body.expand();

    let mut taken = variable_names(&body);
    taken.extend(KEYWORDS.iter().map(|k| k.to_string()));
    let mut names: BTreeMap<Atom, String> = BTreeMap::new();
    let mut atoms: BTreeSet<Atom> = alphabet.clone();
    atoms.extend(psi.free_vars().1.into_iter().filter_map(|s| match s {
        SoVar::Pred(a) => Some(a),
        SoVar::Var(_) => None,
    }));
    for a in &atoms {
        let mut name = a.name().to_string();
        while taken.contains(&name) {
            name = format!("{MONA_PREFIX}{name}");
        }
        taken.insert(name.clone());
        names.insert(a.clone(), name);
    }

    let mut out = String::from("m2l-str;\n");
    if !names.is_empty() {
        let decl: Vec<&str> = names.values().map(String::as_str).collect();
        writeln!(out, "var2 {};", decl.join(", ")).unwrap();
    }
    let mut text = String::new();
    write_formula(&body, &names, &mut text);
    writeln!(out, "{text};").unwrap();
    out
}

/// Names of all non-atom variables in `f`.
fn variable_names(f: &Mso) -> HashSet<String> {
    let mut out = HashSet::new();
    f.visit_vars(&mut |name, _| {
        out.insert(name.to_string());
    });
    for s in f.free_vars().1 {
        if let SoVar::Pred(a) = s {
            out.remove(a.name());
        }
    }
    out
}

fn so_name(s: &SoVar, names: &BTreeMap<Atom, String>) -> String {
    match s {
        SoVar::Pred(a) => names[a].clone(),
        SoVar::Var(v) => v.clone(),
    }
}

fn write_formula(f: &Mso, names: &BTreeMap<Atom, String>, out: &mut String) {
    let fo = |x: &FoVar| x.0.clone();
    match f {
        Mso::True => out.push_str("true"),
        Mso::False => out.push_str("false"),
        Mso::Member(s, x) => write!(out, "{} in {}", fo(x), so_name(s, names)).unwrap(),
        Mso::Less(x, y) => write!(out, "{} < {}", fo(x), fo(y)).unwrap(),
        Mso::Not(a) => {
            out.push_str("~(");
            write_formula(a, names, out);
            out.push(')');
        }
        Mso::And(a, b) | Mso::Or(a, b) | Mso::Implies(a, b) | Mso::Iff(a, b) => {
            let op = match f {
                Mso::And(..) => "&",
                Mso::Or(..) => "|",
                Mso::Implies(..) => "=>",
                _ => "<=>",
            };
            out.push('(');
            write_formula(a, names, out);
            write!(out, " {op} ").unwrap();
            write_formula(b, names, out);
            out.push(')');
        }
        Mso::ExistsFo(x, a) | Mso::ForallFo(x, a) => {
            let q = if matches!(f, Mso::ExistsFo(..)) { "ex1" } else { "all1" };
            write!(out, "({q} {}: ", fo(x)).unwrap();
            write_formula(a, names, out);
            out.push(')');
        }
        Mso::ExistsSo(x, a) | Mso::ForallSo(x, a) => {
            let q = if matches!(f, Mso::ExistsSo(..)) { "ex2" } else { "all2" };
            write!(out, "({q} {}: ", so_name(x, names)).unwrap();
            write_formula(a, names, out);
            out.push(')');
        }
        _ => unreachable!("macros are expanded before emission"),
    }
}
