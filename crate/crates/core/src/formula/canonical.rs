//! The canonical textual syntax.
//!
//! Binding from weakest to strongest: `->` (right), `|`, `&`, the prefix
//! operators `!`, `X`, `wX`, `<>`, `[]`, then `U` and `R` (right), then the
//! modalities `<rho> phi` / `[rho] phi` and primaries (`tt`, `ff`, `end`,
//! atoms, parentheses). Paths: `+` weakest, then `;`, postfix `*`, and the
//! primaries `step`, `(phi)?`, a parenthesized path, or a bare formula that
//! stands for `phi? ; step`.

use std::sync::Arc;

use super::{Formula, ParseError, PathExpr, Pos};
use crate::atom::{is_identifier, Atom, LAST};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Tt,
    Ff,
    End,
    Step,
    Next,
    WeakNext,
    Until,
    Release,
    Bang,
    Amp,
    Bar,
    Arrow,
    Diamond,
    Square,
    Lt,
    Gt,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Question,
    Star,
    Plus,
    Semi,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("atom `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &str {
        match self {
            Tok::Ident(s) => s,
            Tok::Tt => "tt",
            Tok::Ff => "ff",
            Tok::End => "end",
            Tok::Step => "step",
            Tok::Next => "X",
            Tok::WeakNext => "wX",
            Tok::Until => "U",
            Tok::Release => "R",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::Diamond => "<>",
            Tok::Square => "[]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Question => "?",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Semi => ";",
            Tok::Eof => "",
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
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "tt" => Tok::Tt,
                "ff" => Tok::Ff,
                "end" => Tok::End,
                "step" => Tok::Step,
                "X" => Tok::Next,
                "wX" => Tok::WeakNext,
                "U" => Tok::Until,
                "R" => Tok::Release,
                _ => Tok::Ident(word),
            };
            out.push((tok, pos));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('<', Some('>')) => (Tok::Diamond, 2),
            ('[', Some(']')) => (Tok::Square, 2),
            ('!', _) => (Tok::Bang, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Bar, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('?', _) => (Tok::Question, 1),
            ('*', _) => (Tok::Star, 1),
            ('+', _) => (Tok::Plus, 1),
            (';', _) => (Tok::Semi, 1),
            _ => return Err(ParseError::Lex { pos, found: c }),
        };
        out.push((tok, pos));
        i += width;
        col += width;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

pub fn parse_canonical(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let f = p.formula()?;
    p.expect(Tok::Eof, &["end of input"])?;
    Ok(f)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

const PREFIX_STARTS: [&str; 5] = ["`!`", "`X`", "`wX`", "`<>`", "`[]`"];
const PRIMARY_STARTS: [&str; 8] = ["atom", "`tt`", "`ff`", "`end`", "`(`", "`<`", "`[`", "`step`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError::Unexpected {
            pos: self.pos(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, t: Tok, expected: &[&str]) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix_op(&self) -> Option<fn(Formula) -> Formula> {
        match self.peek() {
            Tok::Bang => Some(Formula::neg),
            Tok::Next => Some(Formula::next),
            Tok::WeakNext => Some(Formula::weak_next),
            Tok::Diamond => Some(Formula::eventually),
            Tok::Square => Some(Formula::always),
            _ => None,
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if let Some(op) = self.prefix_op() {
            self.bump();
            let inner = self.unary()?;
            return Ok(op(inner));
        }
        self.until()
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.modal()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                let rhs = self.until()?;
                Ok(Formula::until(lhs, rhs))
            }
            Tok::Release => {
                self.bump();
                let rhs = self.until()?;
                Ok(Formula::release(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    /// Operand of a modality: prefix operators, modalities and primaries.
    fn modal_operand(&mut self) -> Result<Formula, ParseError> {
        if let Some(op) = self.prefix_op() {
            self.bump();
            let inner = self.modal_operand()?;
            return Ok(op(inner));
        }
        self.modal()
    }

    fn modal(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Lt => {
                self.bump();
                let path = self.path()?;
                self.expect(Tok::Gt, &["`>`", "`+`", "`;`", "`*`"])?;
                let body = self.modal_operand()?;
                Ok(Formula::diamond(path, body))
            }
            Tok::LBrack => {
                self.bump();
                let path = self.path()?;
                self.expect(Tok::RBrack, &["`]`", "`+`", "`;`", "`*`"])?;
                let body = self.modal_operand()?;
                Ok(Formula::boxed(path, body))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Tt => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ff => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::End => {
                self.bump();
                Ok(Formula::Final)
            }
            Tok::Ident(name) => {
                self.bump();
                atom_at(&name, pos).map(Formula::Prop)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, &["`)`", "`&`", "`|`", "`->`", "`U`", "`R`"])?;
                Ok(f)
            }
            _ => {
                let mut expected: Vec<&str> = PRIMARY_STARTS.to_vec();
                expected.retain(|s| *s != "`step`");
                expected.extend(PREFIX_STARTS);
                Err(self.unexpected(&expected))
            }
        }
    }

    fn path(&mut self) -> Result<PathExpr, ParseError> {
        let mut lhs = self.path_seq()?;
        while self.eat(&Tok::Plus) {
            let rhs = self.path_seq()?;
            lhs = PathExpr::choice(lhs, rhs);
        }
        Ok(lhs)
    }

    fn path_seq(&mut self) -> Result<PathExpr, ParseError> {
        let mut lhs = self.path_postfix()?;
        while self.eat(&Tok::Semi) {
            let rhs = self.path_postfix()?;
            lhs = PathExpr::seq(lhs, rhs);
        }
        Ok(lhs)
    }

    fn path_postfix(&mut self) -> Result<PathExpr, ParseError> {
        let mut p = self.path_primary()?;
        while self.eat(&Tok::Star) {
            p = PathExpr::star(p);
        }
        Ok(p)
    }

    fn path_primary(&mut self) -> Result<PathExpr, ParseError> {
        match self.peek() {
            Tok::Step => {
                self.bump();
                Ok(PathExpr::Step)
            }
            Tok::LParen => {
                let start = self.at;
                self.bump();
                // `(phi)?` or `(phi)` first, then a parenthesized path.
                let as_formula = self.formula().and_then(|f| {
                    self.expect(Tok::RParen, &["`)`"])?;
                    Ok(f)
                });
                match as_formula {
                    Ok(f) => {
                        if self.eat(&Tok::Question) {
                            Ok(PathExpr::test(f))
                        } else {
                            Ok(PathExpr::prop(f))
                        }
                    }
                    Err(formula_err) => {
                        let formula_at = self.at;
                        self.at = start + 1;
                        let as_path = self.path().and_then(|p| {
                            self.expect(Tok::RParen, &["`)`", "`+`", "`;`", "`*`"])?;
                            Ok(p)
                        });
                        match as_path {
                            Ok(p) => Ok(p),
                            Err(path_err) => {
                                if formula_at > self.at {
                                    Err(formula_err)
                                } else {
                                    Err(path_err)
                                }
                            }
                        }
                    }
                }
            }
            _ => {
                if self.prefix_op().is_some()
                    || matches!(
                        self.peek(),
                        Tok::Ident(_) | Tok::Tt | Tok::Ff | Tok::End | Tok::Lt | Tok::LBrack
                    )
                {
                    let f = self.modal_operand()?;
                    Ok(PathExpr::prop(f))
                } else {
                    let mut expected: Vec<&str> = PRIMARY_STARTS.to_vec();
                    expected.extend(PREFIX_STARTS);
                    Err(self.unexpected(&expected))
                }
            }
        }
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

// Printer precedence levels, weakest first.
const IMPLIES: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const UNARY: u8 = 3;
const UNTIL: u8 = 4;
const MODAL: u8 = 5;
const PRIMARY: u8 = 6;

pub fn print_canonical(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, IMPLIES, &mut out);
    out
}

pub(super) fn print_path(p: &PathExpr) -> String {
    let mut out = String::new();
    write_path(p, 0, &mut out);
    out
}

fn level(f: &Formula) -> u8 {
    use Formula as F;
    match f {
        F::Implies(..) => IMPLIES,
        F::Or(..) => OR,
        F::And(..) => AND,
        F::Neg(_) | F::Next(_) | F::WeakNext(_) | F::Eventually(_) | F::Always(_) => UNARY,
        F::Until(..) | F::Release(..) => UNTIL,
        F::Diamond(..) | F::Box(..) => MODAL,
        F::True | F::False | F::Prop(_) | F::Final => PRIMARY,
    }
}

fn write_formula(f: &Formula, min: u8, out: &mut String) {
    use Formula as F;
    let paren = level(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        F::True => out.push_str("tt"),
        F::False => out.push_str("ff"),
        F::Final => out.push_str("end"),
        F::Prop(a) => out.push_str(a.name()),
        F::Implies(l, r) => binary(l, OR, " -> ", r, IMPLIES, out),
        F::Or(l, r) => binary(l, OR, " | ", r, AND, out),
        F::And(l, r) => binary(l, AND, " & ", r, UNARY, out),
        F::Until(l, r) => binary(l, MODAL, " U ", r, UNTIL, out),
        F::Release(l, r) => binary(l, MODAL, " R ", r, UNTIL, out),
        F::Neg(g) => {
            out.push('!');
            write_formula(g, UNARY, out);
        }
        F::Next(g) => prefix("X ", g, out),
        F::WeakNext(g) => prefix("wX ", g, out),
        F::Eventually(g) => prefix("<> ", g, out),
        F::Always(g) => prefix("[] ", g, out),
        F::Diamond(p, g) => {
            out.push('<');
            write_path(p, 0, out);
            out.push_str("> ");
            write_formula(g, MODAL, out);
        }
        F::Box(p, g) => {
            out.push('[');
            write_path(p, 0, out);
            out.push_str("] ");
            write_formula(g, MODAL, out);
        }
    }
    if paren {
        out.push(')');
    }
}

fn binary(l: &Formula, lmin: u8, op: &str, r: &Formula, rmin: u8, out: &mut String) {
    write_formula(l, lmin, out);
    out.push_str(op);
    write_formula(r, rmin, out);
}

fn prefix(op: &str, g: &Arc<Formula>, out: &mut String) {
    out.push_str(op);
    write_formula(g, UNARY, out);
}

fn path_level(p: &PathExpr) -> u8 {
    match p {
        PathExpr::Choice(..) => 0,
        PathExpr::Seq(..) => 1,
        PathExpr::Star(_) => 2,
        PathExpr::Step | PathExpr::Test(_) | PathExpr::Prop(_) => 3,
    }
}

fn write_path(p: &PathExpr, min: u8, out: &mut String) {
    let paren = path_level(p) < min;
    if paren {
        out.push('(');
    }
    match p {
        PathExpr::Step => out.push_str("step"),
        PathExpr::Choice(l, r) => {
            write_path(l, 0, out);
            out.push_str(" + ");
            write_path(r, 1, out);
        }
        PathExpr::Seq(l, r) => {
            write_path(l, 1, out);
            out.push_str(" ; ");
            write_path(r, 2, out);
        }
        PathExpr::Star(q) => {
            write_path(q, 3, out);
            out.push('*');
        }
        PathExpr::Test(f) => {
            out.push_str("((");
            write_formula(f, IMPLIES, out);
            out.push_str(")?)");
        }
        PathExpr::Prop(f) => match f.as_ref() {
            Formula::Prop(_) | Formula::True | Formula::False => write_formula(f, PRIMARY, out),
            _ => {
                out.push('(');
                write_formula(f, IMPLIES, out);
                out.push(')');
            }
        },
    }
    if paren {
        out.push(')');
    }
}
