//! Bi-traces: lists of input/output message pairs recording what an
//! observer has exchanged with two processes.

mod consistency;
mod order;
mod respect;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::terms::{FreeNames, Message, Name, NameSets, SubstitutionPair};
use crate::theory::ObserverTheory;

pub use consistency::{bitrace_consistent_bounded, TraceConsistency, TraceConsistencyCache, TraceFault};
pub use order::{bitrace_order, default_budget, OrderKind, OrderWitness};
pub use respect::{derivable_pairs, enumerate_respectful, is_respectful, respects, NotRespectful};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mark {
    Input,
    Output,
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::Input => "i",
            Mark::Output => "o",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IOPair {
    pub left: Message,
    pub right: Message,
    pub mark: Mark,
}

impl IOPair {
    pub fn new(left: Message, right: Message, mark: Mark) -> Self {
        IOPair { left, right, mark }
    }

    pub fn input(left: Message, right: Message) -> Self {
        IOPair::new(left, right, Mark::Input)
    }

    pub fn output(left: Message, right: Message) -> Self {
        IOPair::new(left, right, Mark::Output)
    }

    pub fn apply(&self, sp: &SubstitutionPair) -> IOPair {
        IOPair::new(
            self.left.apply(&sp.first),
            self.right.apply(&sp.second),
            self.mark,
        )
    }

    pub fn swap(&self) -> IOPair {
        IOPair::new(self.right.clone(), self.left.clone(), self.mark)
    }
}

impl FreeNames for IOPair {
    fn collect_free(&self, acc: &mut NameSets) {
        self.left.collect_free(acc);
        self.right.collect_free(acc);
    }
}

impl fmt::Display for IOPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})^{}", self.left, self.right, self.mark)
    }
}

/// An output pair mentions a name that no earlier pair introduced.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("output pair at position {index} mentions names not introduced earlier: {}", fmt_names(.names))]
pub struct ScopingError {
    pub index: usize,
    pub names: Vec<Name>,
}

fn fmt_names(names: &[Name]) -> String {
    names.iter().map(Name::to_string).collect::<Vec<_>>().join(", ")
}

/// A validated bi-trace. Names of an output pair always occur in an earlier
/// pair; rigid names may first appear in an output.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BiTrace {
    entries: Vec<IOPair>,
}

pub fn validate_bitrace(entries: Vec<IOPair>) -> Result<BiTrace, ScopingError> {
    let mut seen = BTreeSet::new();
    for (index, e) in entries.iter().enumerate() {
        let names = e.free_names().names;
        if e.mark == Mark::Output {
            let missing: Vec<Name> = names.difference(&seen).cloned().collect();
            if !missing.is_empty() {
                return Err(ScopingError {
                    index,
                    names: missing,
                });
            }
        }
        seen.extend(names);
    }
    Ok(BiTrace { entries })
}

impl BiTrace {
    pub fn empty() -> Self {
        BiTrace::default()
    }

    /// Skips validation; callers guarantee output scoping.
    pub(crate) fn from_entries_unchecked(entries: Vec<IOPair>) -> Self {
        BiTrace { entries }
    }

    pub fn entries(&self) -> &[IOPair] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prefix(&self, k: usize) -> BiTrace {
        BiTrace {
            entries: self.entries[..k].to_vec(),
        }
    }

    /// `self.e`, checked for output scoping.
    pub fn extended(&self, e: IOPair) -> Result<BiTrace, ScopingError> {
        if e.mark == Mark::Output {
            let known = self.free_names().names;
            let missing: Vec<Name> = e.free_names().names.difference(&known).cloned().collect();
            if !missing.is_empty() {
                return Err(ScopingError {
                    index: self.len(),
                    names: missing,
                });
            }
        }
        let mut entries = self.entries.clone();
        entries.push(e);
        Ok(BiTrace { entries })
    }

    /// Element-wise application; scoping is preserved.
    pub fn apply(&self, sp: &SubstitutionPair) -> BiTrace {
        if sp.is_identity() {
            return self.clone();
        }
        BiTrace {
            entries: self.entries.iter().map(|e| e.apply(sp)).collect(),
        }
    }

    pub fn inverse(&self) -> BiTrace {
        BiTrace {
            entries: self.entries.iter().map(IOPair::swap).collect(),
        }
    }

    /// `{h}`: the pairs of the trace as a set.
    pub fn underlying_theory(&self) -> ObserverTheory {
        self.entries
            .iter()
            .map(|e| (e.left.clone(), e.right.clone()))
            .collect()
    }

    /// Side 1 is the left projection, any other value the right one.
    pub fn project(&self, side: u8) -> Vec<(Message, Mark)> {
        self.entries
            .iter()
            .map(|e| {
                (
                    if side == 1 {
                        e.left.clone()
                    } else {
                        e.right.clone()
                    },
                    e.mark,
                )
            })
            .collect()
    }

    /// Only input pairs of identical names.
    pub fn is_universal(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.mark == Mark::Input && e.left == e.right && e.left.as_name().is_some())
    }

    /// `(x₁,x₁)ⁱ…(xₙ,xₙ)ⁱ` over `names` in order.
    pub fn universal(names: impl IntoIterator<Item = Name>) -> BiTrace {
        BiTrace {
            entries: names
                .into_iter()
                .map(|x| IOPair::input(Message::Name(x.clone()), Message::Name(x)))
                .collect(),
        }
    }

    /// One `i: M <-> N` / `o: M <-> N` line per entry.
    pub fn to_file_format(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}: {} <-> {}\n", e.mark, e.left, e.right))
            .collect()
    }
}

pub fn inverse_bitrace(h: &BiTrace) -> BiTrace {
    h.inverse()
}

pub fn underlying_theory(h: &BiTrace) -> ObserverTheory {
    h.underlying_theory()
}

pub fn project(h: &BiTrace, side: u8) -> Vec<(Message, Mark)> {
    h.project(side)
}

/// Position-wise composition; defined when lengths, middle components and
/// marks agree.
pub fn compose_bitraces(h1: &BiTrace, h2: &BiTrace) -> Option<BiTrace> {
    if h1.len() != h2.len() {
        return None;
    }
    let entries = h1
        .entries
        .iter()
        .zip(&h2.entries)
        .map(|(a, b)| {
            (a.right == b.left && a.mark == b.mark)
                .then(|| IOPair::new(a.left.clone(), b.right.clone(), a.mark))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(BiTrace { entries })
}

impl FreeNames for BiTrace {
    fn collect_free(&self, acc: &mut NameSets) {
        for e in &self.entries {
            e.collect_free(acc);
        }
    }
}

impl fmt::Display for BiTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("[]");
        }
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BiTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_bitrace, parse_message};

    fn bt(s: &str) -> BiTrace {
        parse_bitrace(s).unwrap()
    }
    fn m(s: &str) -> Message {
        parse_message(s).unwrap()
    }

    #[test]
    fn scoping() {
        assert!(validate_bitrace(vec![]).is_ok());
        assert!(validate_bitrace(vec![
            IOPair::input(m("x"), m("x")),
            IOPair::output(m("enc(x,#k)"), m("enc(x,#k)")),
        ])
        .is_ok());
        let e = validate_bitrace(vec![IOPair::output(m("enc(x,#k)"), m("enc(x,#k)"))]).unwrap_err();
        assert_eq!(e.index, 0);
    }

    #[test]
    fn theory_inverse_projection() {
        let h = bt("o: #a <-> #b\ni: #a <-> #b");
        assert_eq!(h.underlying_theory().len(), 1);
        assert_eq!(bt("i: #a <-> #b").inverse(), bt("i: #b <-> #a"));
        assert_eq!(bt("o: #a <-> #b").project(1), vec![(m("#a"), Mark::Output)]);
        assert_eq!(h.inverse().inverse(), h);
    }

    #[test]
    fn composition() {
        assert_eq!(
            compose_bitraces(&bt("i: #a <-> #b"), &bt("i: #b <-> #c")),
            Some(bt("i: #a <-> #c"))
        );
        assert_eq!(compose_bitraces(&bt("i: #a <-> #b"), &bt("o: #b <-> #c")), None);
        assert_eq!(
            compose_bitraces(&bt("i: #a <-> #b\no: #x <-> #y"), &bt("i: #b <-> #c")),
            None
        );
    }

    #[test]
    fn rendering() {
        assert_eq!(bt("").to_string(), "[]");
        assert_eq!(bt("i: x <-> x\no: #a <-> #b").to_string(), "(x,x)^i.(#a,#b)^o");
        let h = bt("i: x <-> x\no: pr(x,#a) <-> #b");
        assert_eq!(bt(&h.to_file_format()), h);
    }

    #[test]
    fn universal_traces() {
        let h = BiTrace::universal([Name::new("x").unwrap(), Name::new("y").unwrap()]);
        assert!(h.is_universal());
        assert!(!bt("o: #a <-> #a").is_universal());
    }
}
