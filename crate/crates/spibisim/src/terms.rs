//! Messages, names, substitutions and free-name computations.
//!
//! Messages are built from names, rigid names, pairing and shared-key
//! encryption. Names are the instantiable variables; rigid names behave as
//! constants that no substitution touches.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Rejected identifier text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier `{0}`: expected [a-zA-Z][a-zA-Z0-9_]*")]
pub struct InvalidIdentifier(pub String);

fn check_ident(s: &str) -> Result<(), InvalidIdentifier> {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return Err(InvalidIdentifier(s.to_string())),
    }
    if chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(())
    } else {
        Err(InvalidIdentifier(s.to_string()))
    }
}

/// An instantiable name (`x`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

/// A rigid name (`#a`); never in the domain of a substitution.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RigidName(Arc<str>);

impl Name {
    pub fn new(id: &str) -> Result<Self, InvalidIdentifier> {
        check_ident(id)?;
        Ok(Name(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Unchecked; for internal placeholder names that cannot clash with
    /// parsed identifiers.
    pub(crate) fn raw(id: &str) -> Self {
        Name(Arc::from(id))
    }
}

impl RigidName {
    /// `id` excludes the leading `#`.
    pub fn new(id: &str) -> Result<Self, InvalidIdentifier> {
        check_ident(id)?;
        Ok(RigidName(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for RigidName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Debug for RigidName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Smallest `stem{n}` (stem = `base` without trailing digits) rejected by `taken`.
pub fn fresh_ident(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "n" } else { stem };
    (0u64..)
        .map(|n| format!("{stem}{n}"))
        .find(|cand| !taken(cand))
        .expect("unbounded suffix space")
}

/// Fresh name avoiding `avoid`.
pub fn fresh_name(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    let id = fresh_ident(base.as_str(), |s| avoid.iter().any(|n| n.as_str() == s));
    Name(Arc::from(id.as_str()))
}

/// Fresh rigid name avoiding `avoid`.
pub fn fresh_rigid_name(base: &str, avoid: &BTreeSet<RigidName>) -> RigidName {
    let id = fresh_ident(base, |s| avoid.iter().any(|n| n.as_str() == s));
    RigidName(Arc::from(id.as_str()))
}

/// A message term. The derived order compares the constructor tag first,
/// then fields left to right, with identifiers compared last at the leaves.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Message {
    Name(Name),
    Rigid(RigidName),
    Pair(Arc<Message>, Arc<Message>),
    Enc(Arc<Message>, Arc<Message>),
}

/// Constructor tag of a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    Name,
    Rigid,
    Pair,
    Enc,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::Name => "name",
            MessageKind::Rigid => "rigid name",
            MessageKind::Pair => "pair",
            MessageKind::Enc => "encryption",
        })
    }
}

impl Message {
    pub fn name(n: Name) -> Self {
        Message::Name(n)
    }

    pub fn rigid(r: RigidName) -> Self {
        Message::Rigid(r)
    }

    pub fn pair(left: Message, right: Message) -> Self {
        Message::Pair(Arc::new(left), Arc::new(right))
    }

    pub fn enc(body: Message, key: Message) -> Self {
        Message::Enc(Arc::new(body), Arc::new(key))
    }

    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Name(_) => MessageKind::Name,
            Message::Rigid(_) => MessageKind::Rigid,
            Message::Pair(..) => MessageKind::Pair,
            Message::Enc(..) => MessageKind::Enc,
        }
    }

    pub fn as_name(&self) -> Option<&Name> {
        match self {
            Message::Name(n) => Some(n),
            _ => None,
        }
    }

    /// Constructor depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Message::Name(_) | Message::Rigid(_) => 0,
            Message::Pair(a, b) | Message::Enc(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Message::Name(_) | Message::Rigid(_) => 1,
            Message::Pair(a, b) | Message::Enc(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// All subterms including `self`.
    pub fn subterms(&self, acc: &mut BTreeSet<Message>) {
        if acc.insert(self.clone()) {
            if let Message::Pair(a, b) | Message::Enc(a, b) = self {
                a.subterms(acc);
                b.subterms(acc);
            }
        }
    }

    pub fn is_subterm_of(&self, other: &Message) -> bool {
        if self == other {
            return true;
        }
        match other {
            Message::Pair(a, b) | Message::Enc(a, b) => self.is_subterm_of(a) || self.is_subterm_of(b),
            _ => false,
        }
    }

    pub fn apply(&self, s: &Substitution) -> Message {
        if s.is_empty() {
            return self.clone();
        }
        self.map_atoms(&|m| match m {
            Message::Name(n) => s.get(n).cloned(),
            _ => None,
        })
    }

    /// Replaces rigid names per `map`; everything else is unchanged.
    pub fn rename_rigid(&self, map: &BTreeMap<RigidName, Message>) -> Message {
        if map.is_empty() {
            return self.clone();
        }
        self.map_atoms(&|m| match m {
            Message::Rigid(r) => map.get(r).cloned(),
            _ => None,
        })
    }

    /// Simultaneous replacement of atoms; `f` returns `None` to keep an atom.
    pub fn map_atoms(&self, f: &dyn Fn(&Message) -> Option<Message>) -> Message {
        match self {
            Message::Name(_) | Message::Rigid(_) => f(self).unwrap_or_else(|| self.clone()),
            Message::Pair(a, b) => Message::pair(a.map_atoms(f), b.map_atoms(f)),
            Message::Enc(a, b) => Message::enc(a.map_atoms(f), b.map_atoms(f)),
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Name(n) => write!(f, "{n}"),
            Message::Rigid(r) => write!(f, "{r}"),
            Message::Pair(a, b) => write!(f, "pr({a},{b})"),
            Message::Enc(a, b) => write!(f, "enc({a},{b})"),
        }
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Simultaneous substitution of messages for names. Identity bindings are
/// never stored, so the key set is exactly the domain.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    bindings: BTreeMap<Name, Message>,
}

impl Substitution {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn singleton(x: Name, m: Message) -> Self {
        let mut s = Self::default();
        s.bind(x, m);
        s
    }

    /// Sets `x ↦ m`, dropping the binding when `m` is `x` itself.
    pub fn bind(&mut self, x: Name, m: Message) {
        if m.as_name() == Some(&x) {
            self.bindings.remove(&x);
        } else {
            self.bindings.insert(x, m);
        }
    }

    pub fn get(&self, x: &Name) -> Option<&Message> {
        self.bindings.get(x)
    }

    /// Image of `x`, which is `x` itself outside the domain.
    pub fn image(&self, x: &Name) -> Message {
        self.get(x).cloned().unwrap_or_else(|| Message::Name(x.clone()))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> {
        self.bindings.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Message)> {
        self.bindings.iter()
    }

    /// Free names and rigid names of the range.
    pub fn range_free_names(&self) -> NameSets {
        let mut acc = NameSets::default();
        for m in self.bindings.values() {
            m.collect_free(&mut acc);
        }
        acc
    }

    /// `self` then `then`: applying the result equals applying `self` then `then`.
    pub fn compose(&self, then: &Substitution) -> Substitution {
        let mut out = Substitution::default();
        for (x, m) in &self.bindings {
            out.bind(x.clone(), m.apply(then));
        }
        for (x, m) in &then.bindings {
            if !self.bindings.contains_key(x) {
                out.bind(x.clone(), m.clone());
            }
        }
        out
    }

    pub fn restrict(&self, names: &BTreeSet<Name>) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(x, _)| names.contains(*x))
                .map(|(x, m)| (x.clone(), m.clone()))
                .collect(),
        }
    }

    /// Bindings except those for `names`.
    pub fn without(&self, names: &[&Name]) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(x, _)| !names.contains(x))
                .map(|(x, m)| (x.clone(), m.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bindings.is_empty() {
            return f.write_str("[]");
        }
        f.write_str("[")?;
        for (i, (x, m)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} := {m}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromIterator<(Name, Message)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Name, Message)>>(iter: I) -> Self {
        let mut s = Substitution::default();
        for (x, m) in iter {
            s.bind(x, m);
        }
        s
    }
}

/// One substitution per side of a bi-trace.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SubstitutionPair {
    pub first: Substitution,
    pub second: Substitution,
}

impl SubstitutionPair {
    pub fn new(first: Substitution, second: Substitution) -> Self {
        SubstitutionPair { first, second }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.first.is_empty() && self.second.is_empty()
    }

    pub fn compose(&self, then: &SubstitutionPair) -> SubstitutionPair {
        SubstitutionPair {
            first: self.first.compose(&then.first),
            second: self.second.compose(&then.second),
        }
    }

    pub fn swap(&self) -> SubstitutionPair {
        SubstitutionPair {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

impl fmt::Display for SubstitutionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// Free names and free rigid names of some expression.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct NameSets {
    pub names: BTreeSet<Name>,
    pub rigids: BTreeSet<RigidName>,
}

impl NameSets {
    pub fn extend(&mut self, other: &NameSets) {
        self.names.extend(other.names.iter().cloned());
        self.rigids.extend(other.rigids.iter().cloned());
    }

    pub fn is_subset(&self, other: &NameSets) -> bool {
        self.names.is_subset(&other.names) && self.rigids.is_subset(&other.rigids)
    }
}

/// Expressions with free names.
pub trait FreeNames {
    fn collect_free(&self, acc: &mut NameSets);

    fn free_names(&self) -> NameSets {
        let mut acc = NameSets::default();
        self.collect_free(&mut acc);
        acc
    }

    /// True iff no rigid name occurs free.
    fn is_pure(&self) -> bool {
        self.free_names().rigids.is_empty()
    }
}

impl FreeNames for Message {
    fn collect_free(&self, acc: &mut NameSets) {
        match self {
            Message::Name(n) => {
                if !acc.names.contains(n) {
                    acc.names.insert(n.clone());
                }
            }
            Message::Rigid(r) => {
                if !acc.rigids.contains(r) {
                    acc.rigids.insert(r.clone());
                }
            }
            Message::Pair(a, b) | Message::Enc(a, b) => {
                a.collect_free(acc);
                b.collect_free(acc);
            }
        }
    }
}

impl<T: FreeNames> FreeNames for [T] {
    fn collect_free(&self, acc: &mut NameSets) {
        for t in self {
            t.collect_free(acc);
        }
    }
}

impl<T: FreeNames + ?Sized> FreeNames for &T {
    fn collect_free(&self, acc: &mut NameSets) {
        (**self).collect_free(acc);
    }
}

impl<A: FreeNames, B: FreeNames> FreeNames for (A, B) {
    fn collect_free(&self, acc: &mut NameSets) {
        self.0.collect_free(acc);
        self.1.collect_free(acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Message {
        Message::Name(Name::new(s).unwrap())
    }
    fn r(s: &str) -> Message {
        Message::Rigid(RigidName::new(s).unwrap())
    }
    fn nm(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    #[test]
    fn identifiers_are_checked() {
        assert!(Name::new("x1_y").is_ok());
        assert!(Name::new("").is_err());
        assert!(Name::new("1x").is_err());
        assert!(RigidName::new("#a").is_err());
    }

    #[test]
    fn empty_substitution_is_identity() {
        assert_eq!(n("x").apply(&Substitution::identity()), n("x"));
    }

    #[test]
    fn direct_replacement() {
        let s = Substitution::singleton(nm("x"), r("k"));
        assert_eq!(
            Message::pair(n("x"), r("a")).apply(&s),
            Message::pair(r("k"), r("a"))
        );
    }

    #[test]
    fn application_is_simultaneous() {
        let s: Substitution = [(nm("x"), n("y")), (nm("y"), r("a"))].into_iter().collect();
        assert_eq!(
            Message::enc(n("x"), n("y")).apply(&s),
            Message::enc(n("y"), r("a"))
        );
    }

    #[test]
    fn composition_examples() {
        let t = Substitution::singleton(nm("x"), n("y"));
        let s = Substitution::singleton(nm("y"), r("a"));
        let expected: Substitution = [(nm("x"), r("a")), (nm("y"), r("a"))].into_iter().collect();
        assert_eq!(t.compose(&s), expected);
        assert_eq!(Substitution::identity().compose(&s), s);
        let xa = Substitution::singleton(nm("x"), r("a"));
        assert_eq!(xa.compose(&Substitution::identity()), xa);
    }

    #[test]
    fn identity_bindings_are_dropped() {
        let s = Substitution::singleton(nm("x"), n("x"));
        assert!(s.is_empty());
        let t = Substitution::singleton(nm("x"), n("y"));
        let back = Substitution::singleton(nm("y"), n("x"));
        assert_eq!(t.compose(&back), Substitution::singleton(nm("y"), n("x")));
    }

    #[test]
    fn restrict_examples() {
        let s: Substitution = [(nm("x"), r("a")), (nm("y"), r("b"))].into_iter().collect();
        let only_x: BTreeSet<Name> = [nm("x")].into();
        assert_eq!(s.restrict(&only_x), Substitution::singleton(nm("x"), r("a")));
        assert!(Substitution::identity().restrict(&only_x).is_empty());
        assert!(Substitution::singleton(nm("x"), r("a"))
            .restrict(&BTreeSet::new())
            .is_empty());
    }

    #[test]
    fn free_names_of_message() {
        let fns = Message::enc(n("x"), r("k")).free_names();
        assert_eq!(fns.names, [nm("x")].into());
        assert_eq!(fns.rigids, [RigidName::new("k").unwrap()].into());
    }

    #[test]
    fn order_is_tag_first() {
        assert!(n("z") < r("a"));
        assert!(r("z") < Message::pair(n("a"), n("a")));
        assert!(Message::pair(r("z"), r("z")) < Message::enc(n("a"), n("a")));
    }

    #[test]
    fn fresh_suffixes() {
        let taken = ["c0".to_string()];
        assert_eq!(fresh_ident("c", |s| taken.iter().any(|t| t == s)), "c1");
        assert_eq!(fresh_ident("c", |_| false), "c0");
        assert_eq!(fresh_ident("k12", |_| false), "k0");
    }
}
