//! The clingo theory-term dialect.
//!
//! Terms are parsed without types first and then read as a formula or a
//! path depending on where they occur. Operator table, weakest first:
//! `|` and `&` (left), `.>?` and `.>*` (right), `+` and `;;` (left), and
//! the prefixes `~`, `?`, `*`. Derived operators that have no token of
//! their own are printed after one level of desugaring.

use super::{Formula, ParseError, PathExpr, Pos};
use crate::atom::{is_identifier, Atom, LAST};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Step,
    Neg,
    Test,
    Star,
    Plus,
    Seq,
    Diamond,
    Box,
    And,
    Or,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        let s = match self {
            Tok::Ident(s) => return format!("atom `{s}`"),
            Tok::Eof => return "end of input".to_string(),
            Tok::True => "&true",
            Tok::False => "&false",
            Tok::Step => "&t",
            Tok::Neg => "~",
            Tok::Test => "?",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Seq => ";;",
            Tok::Diamond => ".>?",
            Tok::Box => ".>*",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::LParen => "(",
            Tok::RParen => ")",
        };
        format!("`{s}`")
    }

    /// Binding power and right-associativity of infix operators.
    fn infix(&self) -> Option<(u8, bool)> {
        match self {
            Tok::Or => Some((1, false)),
            Tok::And => Some((2, false)),
            Tok::Diamond | Tok::Box => Some((3, true)),
            Tok::Plus => Some((4, false)),
            Tok::Seq => Some((5, false)),
            _ => None,
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let word_end = |from: usize| {
            let mut j = from;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            j
        };
        if c.is_ascii_alphabetic() || c == '_' {
            let end = word_end(i);
            let word: String = chars[i..end].iter().collect();
            col += end - i;
            i = end;
            out.push((Tok::Ident(word), pos));
            continue;
        }
        if c == '&' && chars.get(i + 1).is_some_and(|d| d.is_ascii_alphabetic()) {
            let end = word_end(i + 1);
            let word: String = chars[i + 1..end].iter().collect();
            let tok = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                "t" => Tok::Step,
                _ => {
                    return Err(ParseError::Misplaced {
                        pos,
                        message: format!("unknown constant `&{word}`"),
                    })
                }
            };
            col += end - i;
            i = end;
            out.push((tok, pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, width) = if rest.starts_with(".>?") {
            (Tok::Diamond, 3)
        } else if rest.starts_with(".>*") {
            (Tok::Box, 3)
        } else if rest.starts_with(";;") {
            (Tok::Seq, 2)
        } else {
            match c {
                '~' => (Tok::Neg, 1),
                '?' => (Tok::Test, 1),
                '*' => (Tok::Star, 1),
                '+' => (Tok::Plus, 1),
                '&' => (Tok::And, 1),
                '|' => (Tok::Or, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                _ => return Err(ParseError::Lex { pos, found: c }),
            }
        };
        out.push((tok, pos));
        i += width;
        col += width;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

#[derive(Debug)]
enum Term {
    Leaf(Tok, Pos),
    Prefix(Tok, Pos, Box<Term>),
    Infix(Tok, Pos, Box<Term>, Box<Term>),
}

impl Term {
    fn pos(&self) -> Pos {
        match self {
            Term::Leaf(_, p) | Term::Prefix(_, p, _) | Term::Infix(_, p, _, _) => *p,
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError::Unexpected {
            pos: self.pos(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn term(&mut self, min: u8) -> Result<Term, ParseError> {
        let mut lhs = self.prefix()?;
        while let Some((bp, right)) = self.peek().infix() {
            if bp < min {
                break;
            }
            let (op, pos) = self.bump();
            let rhs = self.term(if right { bp } else { bp + 1 })?;
            lhs = Term::Infix(op, pos, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Neg | Tok::Test | Tok::Star => {
                let (op, pos) = self.bump();
                let arg = self.prefix()?;
                Ok(Term::Prefix(op, pos, Box::new(arg)))
            }
            Tok::Ident(_) | Tok::True | Tok::False | Tok::Step => {
                let (t, pos) = self.bump();
                Ok(Term::Leaf(t, pos))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term(0)?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(&[
                        "`)`", "`|`", "`&`", "`.>?`", "`.>*`", "`+`", "`;;`",
                    ]));
                }
                self.bump();
                Ok(t)
            }
            _ => Err(self.unexpected(&[
                "atom", "`&true`", "`&false`", "`&t`", "`~`", "`?`", "`*`", "`(`",
            ])),
        }
    }
}

pub fn parse_theory(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let t = p.term(0)?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["end of input", "`|`", "`&`", "`.>?`", "`.>*`"]));
    }
    to_formula(&t)
}

fn misplaced(pos: Pos, what: &str) -> ParseError {
    ParseError::Misplaced {
        pos,
        message: format!("{what} can only occur inside a path"),
    }
}

fn to_formula(t: &Term) -> Result<Formula, ParseError> {
    match t {
        Term::Leaf(Tok::True, _) => Ok(Formula::True),
        Term::Leaf(Tok::False, _) => Ok(Formula::False),
        Term::Leaf(Tok::Ident(name), pos) => atom_at(name, *pos).map(Formula::Prop),
        Term::Leaf(_, pos) => Err(misplaced(*pos, "`&t`")),
        Term::Prefix(Tok::Neg, _, g) => Ok(Formula::neg(to_formula(g)?)),
        Term::Prefix(op, pos, _) => Err(misplaced(*pos, &op.describe())),
        Term::Infix(op, pos, l, r) => match op {
            Tok::And => Ok(Formula::and(to_formula(l)?, to_formula(r)?)),
            Tok::Or => Ok(Formula::or(to_formula(l)?, to_formula(r)?)),
            Tok::Diamond => Ok(Formula::diamond(to_path(l)?, to_formula(r)?)),
            Tok::Box => Ok(Formula::boxed(to_path(l)?, to_formula(r)?)),
            _ => Err(misplaced(*pos, &op.describe())),
        },
    }
}

fn to_path(t: &Term) -> Result<PathExpr, ParseError> {
    match t {
        Term::Leaf(Tok::Step, _) => Ok(PathExpr::Step),
        Term::Prefix(Tok::Test, _, g) => Ok(PathExpr::test(to_formula(g)?)),
        Term::Prefix(Tok::Star, _, g) => Ok(PathExpr::star(to_path(g)?)),
        Term::Infix(Tok::Plus, _, l, r) => Ok(PathExpr::choice(to_path(l)?, to_path(r)?)),
        Term::Infix(Tok::Seq, _, l, r) => Ok(PathExpr::seq(to_path(l)?, to_path(r)?)),
        other => to_formula(other).map(PathExpr::prop).map_err(|e| match e {
            ParseError::Misplaced { .. } => ParseError::Misplaced {
                pos: other.pos(),
                message: "expected a path or a formula".to_string(),
            },
            e => e,
        }),
    }
}

fn atom_at(name: &str, pos: Pos) -> Result<Atom, ParseError> {
    if name == LAST {
        return Err(ParseError::ReservedAtom { pos });
    }
    if !is_identifier(name) {
        return Err(ParseError::Misplaced {
            pos,
            message: format!("`{name}` is not an atom (atoms start with a lowercase letter)"),
        });
    }
    Atom::new(name).map_err(|_| ParseError::ReservedAtom { pos })
}

const OR: u8 = 1;
const AND: u8 = 2;
const MODAL: u8 = 3;
const CHOICE: u8 = 4;
const SEQ: u8 = 5;
const PREFIX: u8 = 6;
const PRIMARY: u8 = 7;

pub fn print_theory(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, 0, &mut out);
    out
}

/// One level of desugaring for operators without a theory token.
fn unfold(f: &Formula) -> Option<Formula> {
    use Formula as F;
    let g = |x: &std::sync::Arc<Formula>| x.as_ref().clone();
    Some(match f {
        F::Implies(l, r) => F::boxed(PathExpr::test(g(l)), g(r)),
        F::Next(x) => F::diamond(PathExpr::Step, g(x)),
        F::WeakNext(x) => F::boxed(PathExpr::Step, g(x)),
        F::Final => F::boxed(PathExpr::Step, F::False),
        F::Eventually(x) => F::diamond(PathExpr::star(PathExpr::Step), g(x)),
        F::Always(x) => F::boxed(PathExpr::star(PathExpr::Step), g(x)),
        F::Until(l, r) => F::diamond(
            PathExpr::star(PathExpr::seq(PathExpr::test(g(l)), PathExpr::Step)),
            g(r),
        ),
        F::Release(l, r) => F::or(
            F::until(g(r), F::and(g(l), g(r))),
            F::always(g(r)),
        ),
        _ => return None,
    })
}

fn formula_level(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        Formula::Diamond(..) | Formula::Box(..) => MODAL,
        Formula::Neg(_) => PREFIX,
        _ => PRIMARY,
    }
}

fn write_formula(f: &Formula, min: u8, out: &mut String) {
    if let Some(u) = unfold(f) {
        return write_formula(&u, min, out);
    }
    let paren = formula_level(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("&true"),
        Formula::False => out.push_str("&false"),
        Formula::Prop(a) => out.push_str(a.name()),
        Formula::Neg(g) => {
            out.push('~');
            write_formula(g, PREFIX, out);
        }
        Formula::Or(l, r) => {
            write_formula(l, OR, out);
            out.push_str(" | ");
            write_formula(r, OR + 1, out);
        }
        Formula::And(l, r) => {
            write_formula(l, AND, out);
            out.push_str(" & ");
            write_formula(r, AND + 1, out);
        }
        Formula::Diamond(p, g) | Formula::Box(p, g) => {
            write_path(p, MODAL + 1, out);
            out.push_str(if matches!(f, Formula::Diamond(..)) { " .>? " } else { " .>* " });
            write_formula(g, MODAL, out);
        }
        _ => unreachable!("derived operators are unfolded above"),
    }
    if paren {
        out.push(')');
    }
}

fn write_path(p: &PathExpr, min: u8, out: &mut String) {
    let level = match p {
        PathExpr::Choice(..) => CHOICE,
        PathExpr::Seq(..) => SEQ,
        PathExpr::Test(_) | PathExpr::Star(_) => PREFIX,
        PathExpr::Step => PRIMARY,
        PathExpr::Prop(f) => {
            // A formula in path position always needs its own parentheses
            // unless it is atomic.
            if matches!(f.as_ref(), Formula::Prop(_) | Formula::True | Formula::False) {
                PRIMARY
            } else {
                0
            }
        }
    };
    let paren = level < min;
    if paren {
        out.push('(');
    }
    match p {
        PathExpr::Step => out.push_str("&t"),
        PathExpr::Test(f) => {
            out.push_str("? ");
            write_formula(f, PREFIX, out);
        }
        PathExpr::Star(q) => {
            out.push_str("* ");
            write_path(q, PREFIX, out);
        }
        PathExpr::Choice(l, r) => {
            write_path(l, CHOICE, out);
            out.push_str(" + ");
            write_path(r, CHOICE + 1, out);
        }
        PathExpr::Seq(l, r) => {
            write_path(l, SEQ, out);
            out.push_str(" ;; ");
            write_path(r, SEQ + 1, out);
        }
        PathExpr::Prop(f) => write_formula(f, 0, out),
    }
    if paren {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::running_example;

    #[test]
    fn running_example_round_trips() {
        let text = print_theory(&running_example());
        assert_eq!(text, "? (* &t .>* b) ;; &t .>? a");
        assert_eq!(parse_theory(&text).unwrap(), running_example());
    }

    #[test]
    fn prefix_binds_tighter_than_modal() {
        let f = parse_theory("* &t .>* b").unwrap();
        assert_eq!(
            f,
            Formula::boxed(PathExpr::star(PathExpr::Step), Formula::atom("b"))
        );
    }

    #[test]
    fn until_prints_with_diamond_token() {
        let u = Formula::until(Formula::atom("a"), Formula::atom("b"));
        let text = print_theory(&u);
        assert!(text.contains(".>?"));
        assert_eq!(parse_theory(&text).unwrap(), crate::formula::desugar(&u));
    }

    #[test]
    fn step_outside_path_is_misplaced() {
        assert!(matches!(parse_theory("&t & a"), Err(ParseError::Misplaced { .. })));
        assert!(matches!(parse_theory("? a"), Err(ParseError::Misplaced { .. })));
        assert!(matches!(parse_theory("last"), Err(ParseError::ReservedAtom { .. })));
    }

    #[test]
    fn bare_formula_in_path_is_prop_path() {
        let f = parse_theory("a ;; (b & c) .>? &true").unwrap();
        assert_eq!(
            f,
            Formula::diamond(
                PathExpr::seq(
                    PathExpr::prop(Formula::atom("a")),
                    PathExpr::prop(Formula::and(Formula::atom("b"), Formula::atom("c")))
                ),
                Formula::True
            )
        );
        assert_eq!(parse_theory(&print_theory(&f)).unwrap(), f);
    }
}
