//! Boolean target expressions over matrix properties, e.g.
//! `binormal & cs & !sq.binormal`.
//!
//! Atoms may be prefixed by `sq.` (the square), `al.` (Aluthge transform) or
//! `du.` (Duggal transform). Operators are `!`, `&`, `|` and parentheses, with
//! the usual precedence. Evaluation is three-valued: an inconclusive complex
//! symmetry or paranormality verdict is unknown, and a target matches only
//! when it evaluates to true.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::facts::{Facts, Operand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Normal,
    Quasinormal,
    Hyponormal,
    Binormal,
    Paranormal,
    Centered,
    Cs,
    Psd,
    Involution,
    Unitary,
    SelfAdjoint,
    WeightedPermutation,
}

impl Atom {
    const NAMES: [(&'static str, Atom); 12] = [
        ("normal", Atom::Normal),
        ("quasinormal", Atom::Quasinormal),
        ("hyponormal", Atom::Hyponormal),
        ("binormal", Atom::Binormal),
        ("paranormal", Atom::Paranormal),
        ("centered", Atom::Centered),
        ("cs", Atom::Cs),
        ("psd", Atom::Psd),
        ("involution", Atom::Involution),
        ("unitary", Atom::Unitary),
        ("self_adjoint", Atom::SelfAdjoint),
        ("weighted_permutation", Atom::WeightedPermutation),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, a)| *a == self).map(|(n, _)| *n).expect("every atom is named")
    }

    fn cost(self) -> u32 {
        match self {
            Atom::Cs => 100,
            Atom::Paranormal => 20,
            Atom::Centered => 5,
            Atom::Hyponormal | Atom::Psd => 3,
            _ => 1,
        }
    }

    fn eval(self, op: Operand, facts: &Facts) -> Option<bool> {
        match self {
            Atom::Normal => facts.normal(op).ok().map(|w| w.holds),
            Atom::Quasinormal => facts.quasinormal(op).ok().map(|w| w.holds),
            Atom::Binormal => facts.binormal(op).ok().map(|w| w.holds),
            Atom::Hyponormal => facts.hyponormal(op).ok().map(|h| h.holds),
            Atom::Paranormal => facts.paranormal(op).ok().and_then(|p| p.decided()),
            Atom::Centered => facts.centered(op).ok().map(|c| c.holds),
            Atom::Cs => facts.cs(op).ok().and_then(|v| v.decided()),
            Atom::Psd => facts.structure(op).ok().map(|s| s.is_psd),
            Atom::Involution => facts.structure(op).ok().map(|s| s.is_involution),
            Atom::Unitary => facts.structure(op).ok().map(|s| s.is_unitary),
            Atom::SelfAdjoint => facts.structure(op).ok().map(|s| s.is_self_adjoint),
            Atom::WeightedPermutation => facts.structure(op).ok().map(|s| s.is_weighted_permutation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Atom(Operand, Atom),
    Not(Box<Target>),
    And(Vec<Target>),
    Or(Vec<Target>),
}

impl Target {
    fn cost(&self) -> u32 {
        match self {
            Target::Atom(op, a) => a.cost() + if matches!(op, Operand::Aluthge | Operand::Duggal) { 1 } else { 0 },
            Target::Not(t) => t.cost(),
            Target::And(v) | Target::Or(v) => v.iter().map(Target::cost).sum(),
        }
    }

    /// Kleene evaluation; operands of `&` and `|` are visited cheapest first
    /// and evaluation stops once the result is forced.
    pub fn eval(&self, facts: &Facts) -> Option<bool> {
        match self {
            Target::Atom(op, a) => a.eval(*op, facts),
            Target::Not(t) => t.eval(facts).map(|b| !b),
            Target::And(v) => kleene(v, facts, false),
            Target::Or(v) => kleene(v, facts, true),
        }
    }

    pub fn matches(&self, facts: &Facts) -> bool {
        self.eval(facts) == Some(true)
    }
}

/// `dominant` is the value that forces the result (`false` for and, `true` for or).
fn kleene(items: &[Target], facts: &Facts, dominant: bool) -> Option<bool> {
    let mut order: Vec<&Target> = items.iter().collect();
    order.sort_by_key(|t| t.cost());
    let mut unknown = false;
    for t in order {
        match t.eval(facts) {
            Some(b) if b == dominant => return Some(dominant),
            Some(_) => {}
            None => unknown = true,
        }
    }
    if unknown {
        None
    } else {
        Some(!dominant)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, v: &[Target], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (k, t) in v.iter().enumerate() {
                if k > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")
        };
        match self {
            Target::Atom(op, a) => write!(f, "{}{}", op.prefix(), a.name()),
            Target::Not(t) => write!(f, "!{t}"),
            Target::And(v) => join(f, v, " & "),
            Target::Or(v) => join(f, v, " | "),
        }
    }
}

struct Parser<'s> {
    src: &'s str,
    pos: usize,
}

impl<'s> Parser<'s> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(OpError::InvalidTarget(format!("{msg} at offset {} in `{}`", self.pos, self.src)))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Target> {
        let mut v = vec![self.and()?];
        while self.eat('|') {
            v.push(self.and()?);
        }
        Ok(if v.len() == 1 { v.pop().expect("one item") } else { Target::Or(v) })
    }

    fn and(&mut self) -> Result<Target> {
        let mut v = vec![self.unary()?];
        while self.eat('&') {
            v.push(self.unary()?);
        }
        Ok(if v.len() == 1 { v.pop().expect("one item") } else { Target::And(v) })
    }

    fn unary(&mut self) -> Result<Target> {
        if self.eat('!') {
            return Ok(Target::Not(Box::new(self.unary()?)));
        }
        if self.eat('(') {
            let t = self.or()?;
            if !self.eat(')') {
                return self.err("expected `)`");
            }
            return Ok(t);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Target> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '.'))
            .unwrap_or(rest.len());
        if len == 0 {
            return self.err("expected a property name");
        }
        let word = &rest[..len];
        let (op, name) = match word.split_once('.') {
            None => (Operand::T, word),
            Some(("sq", n)) => (Operand::Square, n),
            Some(("al", n)) => (Operand::Aluthge, n),
            Some(("du", n)) => (Operand::Duggal, n),
            Some(_) => return self.err(&format!("unknown operand prefix in `{word}`")),
        };
        let Some(&(_, atom)) = Atom::NAMES.iter().find(|(n, _)| *n == name) else {
            return self.err(&format!("unknown property `{name}`"));
        };
        self.pos += len;
        Ok(Target::Atom(op, atom))
    }
}

impl FromStr for Target {
    type Err = OpError;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let t = p.or()?;
        p.skip_ws();
        if p.pos != s.len() {
            return p.err("unexpected trailing input");
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ComplexMatrix, Tolerances};
    use crate::symmetry::OracleConfig;

    #[test]
    fn parses_with_precedence() {
        let t: Target = "binormal & cs | !sq.binormal".parse().unwrap();
        assert_eq!(t.to_string(), "((binormal & cs) | !sq.binormal)");
        let t: Target = "binormal & (cs | al.normal)".parse().unwrap();
        assert_eq!(t.to_string(), "(binormal & (cs | al.normal))");
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "binormal &", "(cs", "xx.cs", "weird", "cs cs"] {
            assert!(matches!(bad.parse::<Target>(), Err(OpError::InvalidTarget(_))), "{bad}");
        }
    }

    #[test]
    fn evaluates_on_example() {
        let tol = Tolerances::default();
        let e = ComplexMatrix::from_real_rows(&[[-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        let facts = Facts::new(e, &tol, OracleConfig::default());
        assert!("binormal & cs & !sq.binormal".parse::<Target>().unwrap().matches(&facts));
        assert!(!"normal & !binormal".parse::<Target>().unwrap().matches(&facts));
    }
}
