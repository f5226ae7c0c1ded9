//! Observer theories: message equivalence and synthesis by proof search,
//! cut, rewriting to irreducible form, consistency, composition.

mod consistency;
mod cut;
mod proof;
mod rewrite;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::terms::{FreeNames, Message, NameSets, Substitution, SubstitutionPair};

pub use consistency::{is_consistent, is_consistent_oracle, Consistency, ConsistencyViolation};
pub use cut::{cut, cut_with_context, CutError};
pub use proof::{
    entails_equiv, entails_synth, equivalents, prove_equiv, prove_synth, Derivation, Entry, EquivKnowledge,
    InvalidDerivation, Rule, Sequent, SynthKnowledge,
};
pub use rewrite::{normalize, redexes, reduce_step, rewrite_at};

/// A finite set of message pairs.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObserverTheory {
    pairs: BTreeSet<(Message, Message)>,
}

/// A finite set of messages.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MessageSet {
    msgs: BTreeSet<Message>,
}

impl ObserverTheory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, left: Message, right: Message) -> bool {
        self.pairs.insert((left, right))
    }

    pub fn remove(&mut self, pair: &(Message, Message)) -> bool {
        self.pairs.remove(pair)
    }

    pub fn contains(&self, left: &Message, right: &Message) -> bool {
        // Avoids cloning into a tuple key.
        self.pairs.iter().any(|(l, r)| l == left && r == right)
    }

    pub fn contains_pair(&self, pair: &(Message, Message)) -> bool {
        self.pairs.contains(pair)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Message, Message)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &BTreeSet<(Message, Message)> {
        &self.pairs
    }

    pub fn first_projection(&self) -> MessageSet {
        self.pairs.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn second_projection(&self) -> MessageSet {
        self.pairs.iter().map(|(_, r)| r.clone()).collect()
    }

    pub fn union(&self, other: &ObserverTheory) -> ObserverTheory {
        self.pairs.union(&other.pairs).cloned().collect()
    }

    pub fn is_subset(&self, other: &ObserverTheory) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Applies `sp.first` to left components and `sp.second` to right ones.
    pub fn apply(&self, sp: &SubstitutionPair) -> ObserverTheory {
        self.pairs
            .iter()
            .map(|(l, r)| (l.apply(&sp.first), r.apply(&sp.second)))
            .collect()
    }

    /// Every pair swapped.
    pub fn inverse(&self) -> ObserverTheory {
        inverse_theory(self)
    }

    /// Subterms of every message in the theory.
    pub fn subterms(&self) -> BTreeSet<Message> {
        let mut acc = BTreeSet::new();
        for (l, r) in &self.pairs {
            l.subterms(&mut acc);
            r.subterms(&mut acc);
        }
        acc
    }
}

impl FromIterator<(Message, Message)> for ObserverTheory {
    fn from_iter<I: IntoIterator<Item = (Message, Message)>>(iter: I) -> Self {
        ObserverTheory {
            pairs: iter.into_iter().collect(),
        }
    }
}

impl FreeNames for ObserverTheory {
    fn collect_free(&self, acc: &mut NameSets) {
        for p in &self.pairs {
            p.collect_free(acc);
        }
    }
}

impl fmt::Display for ObserverTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, r)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l} <-> {r}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ObserverTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl MessageSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, m: Message) -> bool {
        self.msgs.insert(m)
    }

    pub fn contains(&self, m: &Message) -> bool {
        self.msgs.contains(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Message> {
        self.msgs.iter()
    }

    pub fn len(&self) -> usize {
        self.msgs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.msgs.is_empty()
    }

    pub fn messages(&self) -> &BTreeSet<Message> {
        &self.msgs
    }

    pub fn apply(&self, s: &Substitution) -> MessageSet {
        self.msgs.iter().map(|m| m.apply(s)).collect()
    }
}

impl FromIterator<Message> for MessageSet {
    fn from_iter<I: IntoIterator<Item = Message>>(iter: I) -> Self {
        MessageSet {
            msgs: iter.into_iter().collect(),
        }
    }
}

impl FreeNames for MessageSet {
    fn collect_free(&self, acc: &mut NameSets) {
        for m in &self.msgs {
            m.collect_free(acc);
        }
    }
}

impl fmt::Display for MessageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.msgs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for MessageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn inverse_theory(gamma: &ObserverTheory) -> ObserverTheory {
    gamma.iter().map(|(l, r)| (r.clone(), l.clone())).collect()
}

/// `{(Mᵢ,Rᵢ)}` for `g1 = {(Mᵢ,Nᵢ)}` and `g2 = {(Nᵢ,Rᵢ)}` with the `Nᵢ`
/// pairwise distinct on both sides; absent otherwise.
pub fn compose_theories(g1: &ObserverTheory, g2: &ObserverTheory) -> Option<ObserverTheory> {
    let mut left_of: BTreeMap<&Message, &Message> = BTreeMap::new();
    for (m, n) in g1.iter() {
        if left_of.insert(n, m).is_some() {
            return None;
        }
    }
    let mut right_of: BTreeMap<&Message, &Message> = BTreeMap::new();
    for (n, r) in g2.iter() {
        if right_of.insert(n, r).is_some() {
            return None;
        }
    }
    if !left_of.keys().eq(right_of.keys()) {
        return None;
    }
    Some(
        left_of
            .iter()
            .map(|(n, m)| ((*m).clone(), right_of[n].clone()))
            .collect(),
    )
}
