//! Open bisimulation: traced process pairs, relations over them, and a
//! bounded checker with up-to techniques.

mod check;
mod distinguish;
mod saturate;
mod upto;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bitrace::{compose_bitraces, BiTrace};
use crate::process::{Action, Process};
use crate::terms::{fresh_ident, FreeNames, Name, NameSets, RigidName, Substitution, SubstitutionPair};
use crate::theory::EquivKnowledge;

pub use check::check_relation;
pub use distinguish::{bounded_distinguisher, Distinguisher};
pub use saturate::saturate;
pub use upto::{up_to_member, Justification};

/// `h ⊢ P R Q`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TracedTriple {
    pub trace: BiTrace,
    pub left: Process,
    pub right: Process,
}

impl TracedTriple {
    pub fn new(trace: BiTrace, left: Process, right: Process) -> Self {
        TracedTriple { trace, left, right }
    }

    /// `(h⁻¹, Q, P)`.
    pub fn inverse(&self) -> TracedTriple {
        TracedTriple::new(self.trace.inverse(), self.right.clone(), self.left.clone())
    }

    /// Names of both processes occur in the trace.
    pub fn is_traced_pair(&self) -> bool {
        let known = self.trace.free_names().names;
        (&self.left, &self.right).free_names().names.is_subset(&known)
    }

    /// Identity up to renaming of bound names.
    pub fn alpha_eq(&self, other: &TracedTriple) -> bool {
        self.trace == other.trace && self.left.alpha_eq(&other.left) && self.right.alpha_eq(&other.right)
    }

    fn key(&self) -> (BiTrace, Process, Process) {
        (self.trace.clone(), self.left.canonical(), self.right.canonical())
    }
}

impl FreeNames for TracedTriple {
    fn collect_free(&self, acc: &mut NameSets) {
        self.trace.collect_free(acc);
        self.left.collect_free(acc);
        self.right.collect_free(acc);
    }
}

impl fmt::Display for TracedTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {} ~ {}", self.trace, self.left, self.right)
    }
}

impl fmt::Debug for TracedTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite set of traced pairs in insertion order, without α-duplicates.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct TracedRelation {
    triples: Vec<TracedTriple>,
}

impl TracedRelation {
    pub fn new(triples: Vec<TracedTriple>) -> Self {
        let mut r = TracedRelation::default();
        for t in triples {
            r.insert(t);
        }
        r
    }

    /// Adds `t` unless an α-equivalent triple is present.
    pub fn insert(&mut self, t: TracedTriple) -> bool {
        if self.triples.iter().any(|u| u.alpha_eq(&t)) {
            return false;
        }
        self.triples.push(t);
        true
    }

    pub fn triples(&self) -> &[TracedTriple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Each triple followed by its inverse, duplicates dropped.
    pub fn symmetric_closure(&self) -> Vec<TracedTriple> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in &self.triples {
            for u in [t.clone(), t.inverse()] {
                if seen.insert(u.key()) {
                    out.push(u);
                }
            }
        }
        out
    }

    pub fn inverse(&self) -> TracedRelation {
        TracedRelation::new(self.triples.iter().map(TracedTriple::inverse).collect())
    }

    /// `.rel` text that parses back to this relation.
    pub fn to_file_format(&self) -> String {
        let mut out = String::new();
        for t in &self.triples {
            out.push_str("pair\n  bitrace:\n");
            for line in t.trace.to_file_format().lines() {
                out.push_str("    ");
                out.push_str(line);
                out.push('\n');
            }
            out.push_str(&format!("  left: {}\n  right: {}\n", t.left, t.right));
        }
        out
    }
}

impl fmt::Debug for TracedRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.triples).finish()
    }
}

/// `R₁ ∘ R₂`: `(h₁∘h₂, P, R)` for `h₁ ⊢ P R₁ Q` and `h₂ ⊢ Q R₂ R` with
/// composable traces and α-equal middle processes.
pub fn compose_relations(r1: &TracedRelation, r2: &TracedRelation) -> TracedRelation {
    let mut out = TracedRelation::default();
    for a in &r1.triples {
        for b in &r2.triples {
            if !a.right.alpha_eq(&b.left) {
                continue;
            }
            if let Some(trace) = compose_bitraces(&a.trace, &b.trace) {
                out.insert(TracedTriple::new(trace, a.left.clone(), b.right.clone()));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UpToRule {
    Structural,
    Weakening,
    Contraction,
    Substitution,
    InjectiveRenaming,
    FlexRigid,
    Restriction,
    Parallel,
}

impl UpToRule {
    pub const ALL: [UpToRule; 8] = [
        UpToRule::Structural,
        UpToRule::Weakening,
        UpToRule::Contraction,
        UpToRule::Substitution,
        UpToRule::InjectiveRenaming,
        UpToRule::FlexRigid,
        UpToRule::Restriction,
        UpToRule::Parallel,
    ];

    /// Short tag used on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            UpToRule::Structural => "eq",
            UpToRule::Weakening => "w",
            UpToRule::Contraction => "c",
            UpToRule::Substitution => "s",
            UpToRule::InjectiveRenaming => "i",
            UpToRule::FlexRigid => "f",
            UpToRule::Restriction => "r",
            UpToRule::Parallel => "p",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            UpToRule::Structural => "structural",
            UpToRule::Weakening => "weakening",
            UpToRule::Contraction => "contraction",
            UpToRule::Substitution => "substitution",
            UpToRule::InjectiveRenaming => "injective-renaming",
            UpToRule::FlexRigid => "flex-rigid",
            UpToRule::Restriction => "restriction",
            UpToRule::Parallel => "parallel",
        }
    }

    /// Comma-separated tags, e.g. `c,s`; the empty string is no rules.
    pub fn parse_list(s: &str) -> Result<BTreeSet<UpToRule>, UnknownUpToRule> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for UpToRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.long_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown up-to rule `{0}` (expected one of eq, w, c, s, i, f, r, p)")]
pub struct UnknownUpToRule(pub String);

impl FromStr for UpToRule {
    type Err = UnknownUpToRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UpToRule::ALL
            .into_iter()
            .find(|r| r.tag() == s || r.long_name() == s)
            .ok_or_else(|| UnknownUpToRule(s.to_string()))
    }
}

/// A pure context `R` for the parallel rule; `domain` lists the names the
/// rule instantiates and must cover `fn(R)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelContext {
    pub process: Process,
    pub domain: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub subst_depth: usize,
    pub up_to_rules: BTreeSet<UpToRule>,
    /// Bound on rule applications in one justification.
    pub closure_budget: usize,
    pub parallel_contexts: Vec<ParallelContext>,
    /// Accept `(h, P, P)` for traces with identical projections.
    pub reflexive_base: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            subst_depth: 1,
            up_to_rules: BTreeSet::new(),
            closure_budget: 6,
            parallel_contexts: Vec::new(),
            reflexive_base: true,
        }
    }
}

impl CheckConfig {
    pub fn with_rules(mut self, rules: impl IntoIterator<Item = UpToRule>) -> Self {
        self.up_to_rules = rules.into_iter().collect();
        self
    }

    pub fn uses(&self, rule: UpToRule) -> bool {
        self.up_to_rules.contains(&rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    VerifiedUpToBound {
        depth: usize,
        obligations: usize,
    },
    Counterexample {
        triple: Box<TracedTriple>,
        subst: SubstitutionPair,
        action: Action,
        reason: String,
    },
    RelationIllFormed {
        position: usize,
        reason: String,
    },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::VerifiedUpToBound { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::VerifiedUpToBound { depth, obligations } => {
                write!(
                    f,
                    "VerifiedUpToBound (subst depth {depth}, {obligations} obligations)"
                )
            }
            Verdict::Counterexample {
                triple,
                subst,
                action,
                reason,
            } => {
                writeln!(f, "Counterexample")?;
                writeln!(f, "  triple: {triple}")?;
                writeln!(f, "  substitution: {subst}")?;
                writeln!(f, "  action: {action}")?;
                write!(f, "  reason: {reason}")
            }
            Verdict::RelationIllFormed { position, reason } => {
                write!(f, "RelationIllFormed at pair {position}: {reason}")
            }
        }
    }
}

/// Per-obligation source of fresh rigid names: never yields a name in the
/// exclusion set or one it yielded before.
#[derive(Debug, Clone, Default)]
pub struct FreshSupply {
    excluded: BTreeSet<RigidName>,
}

impl FreshSupply {
    pub fn new(excluded: BTreeSet<RigidName>) -> Self {
        FreshSupply { excluded }
    }

    /// `#base{n}` for the smallest unused `n`.
    pub fn fresh_rigid(&mut self, base: &str) -> RigidName {
        let id = fresh_ident(base, |s| self.excluded.iter().any(|r| r.as_str() == s));
        let r = RigidName::new(&id).expect("suffixing an identifier keeps it valid");
        self.excluded.insert(r.clone());
        r
    }

    /// `#base` itself when unused, otherwise [`FreshSupply::fresh_rigid`].
    pub fn prefer(&mut self, base: &str) -> RigidName {
        match RigidName::new(base) {
            Ok(r) if !self.excluded.contains(&r) => {
                self.excluded.insert(r.clone());
                r
            }
            _ => self.fresh_rigid(base),
        }
    }
}

pub fn fresh_rigid(supply: &mut FreshSupply, base: &str) -> RigidName {
    supply.fresh_rigid(base)
}

/// `σ₁ ↔_h σ₂`: equal domains, and each pair of images is related by `h`
/// and uses only names of `h`.
pub fn equiv_subst(s1: &Substitution, s2: &Substitution, h: &BiTrace) -> bool {
    let d1: BTreeSet<&Name> = s1.domain().collect();
    let d2: BTreeSet<&Name> = s2.domain().collect();
    if d1 != d2 {
        return false;
    }
    let known = h.free_names().names;
    let know = EquivKnowledge::new(&h.underlying_theory());
    d1.into_iter().all(|x| {
        let (a, b) = (s1.image(x), s2.image(x));
        (&a, &b).free_names().names.is_subset(&known) && know.entails(&a, &b)
    })
}
