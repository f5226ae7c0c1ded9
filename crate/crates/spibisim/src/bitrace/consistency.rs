//! Bi-trace consistency, with the quantification over respectful
//! substitutions cut down to the bounded enumeration.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{enumerate_respectful, BiTrace, Mark};
use crate::terms::SubstitutionPair;
use crate::theory::{entails_equiv, is_consistent, ConsistencyViolation};

/// Why an extension step fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceFault {
    /// The prefix does not derive the input pair.
    InputNotDerivable,
    /// An instantiated prefix plus the output pair is an inconsistent theory.
    Theory(ConsistencyViolation),
}

impl fmt::Display for TraceFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceFault::InputNotDerivable => f.write_str("input pair not derivable from its prefix"),
            TraceFault::Theory(v) => write!(f, "instantiated theory inconsistent, {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceConsistency {
    ConsistentUpTo {
        depth: usize,
    },
    Inconsistent {
        position: usize,
        witness: SubstitutionPair,
        fault: TraceFault,
    },
}

impl TraceConsistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, TraceConsistency::ConsistentUpTo { .. })
    }
}

impl fmt::Display for TraceConsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceConsistency::ConsistentUpTo { depth } => {
                write!(f, "consistent up to substitution depth {depth}")
            }
            TraceConsistency::Inconsistent {
                position,
                witness,
                fault,
            } => {
                write!(f, "inconsistent at position {position} under {witness}: {fault}")
            }
        }
    }
}

/// Memo of verdicts per trace at one depth.
#[derive(Debug, Default)]
pub struct TraceConsistencyCache {
    depth: usize,
    verdicts: HashMap<BiTrace, TraceConsistency>,
}

impl TraceConsistencyCache {
    pub fn new(depth: usize) -> Self {
        TraceConsistencyCache {
            depth,
            verdicts: HashMap::new(),
        }
    }

    pub fn check(&mut self, h: &BiTrace) -> TraceConsistency {
        if let Some(v) = self.verdicts.get(h) {
            return v.clone();
        }
        let verdict = self.compute(h);
        self.verdicts.insert(h.clone(), verdict.clone());
        verdict
    }

    fn compute(&mut self, h: &BiTrace) -> TraceConsistency {
        let depth = self.depth;
        let Some(last) = h.entries().last() else {
            return TraceConsistency::ConsistentUpTo { depth };
        };
        let k = h.len() - 1;
        let prefix = h.prefix(k);
        let before = self.check(&prefix);
        if !before.is_consistent() {
            return before;
        }
        match last.mark {
            Mark::Input => {
                if !entails_equiv(&prefix.underlying_theory(), &last.left, &last.right) {
                    return TraceConsistency::Inconsistent {
                        position: k,
                        witness: SubstitutionPair::identity(),
                        fault: TraceFault::InputNotDerivable,
                    };
                }
            }
            Mark::Output => {
                for sp in enumerate_respectful(&prefix, depth, &BTreeSet::new()) {
                    let verdict = is_consistent(&h.apply(&sp).underlying_theory());
                    // Only a consistent instantiated prefix makes the clause bite.
                    if let Some(v) = verdict.violation {
                        if self.check(&prefix.apply(&sp)).is_consistent() {
                            return TraceConsistency::Inconsistent {
                                position: k,
                                witness: sp,
                                fault: TraceFault::Theory(v),
                            };
                        }
                    }
                }
            }
        }
        TraceConsistency::ConsistentUpTo { depth }
    }
}

pub fn bitrace_consistent_bounded(h: &BiTrace, depth: usize) -> TraceConsistency {
    TraceConsistencyCache::new(depth).check(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_bitrace, parse_message};
    use crate::terms::{Name, Substitution};

    fn bt(s: &str) -> BiTrace {
        parse_bitrace(s).unwrap()
    }

    #[test]
    fn small_cases() {
        assert!(bitrace_consistent_bounded(&BiTrace::empty(), 0).is_consistent());
        assert!(bitrace_consistent_bounded(&bt("i: x <-> x"), 0).is_consistent());
        let v = bitrace_consistent_bounded(&bt("i: #a <-> #a"), 0);
        assert!(matches!(
            v,
            TraceConsistency::Inconsistent {
                fault: TraceFault::InputNotDerivable,
                ..
            }
        ));
    }

    #[test]
    fn instantiation_exposes_inconsistency() {
        let h = bt("o: #a <-> #a\no: #b <-> #b\ni: x <-> x\n\
                    o: enc(x,#k) <-> enc(#a,#k)\no: enc(#b,#k) <-> enc(x,#k)");
        let TraceConsistency::Inconsistent {
            position,
            witness,
            fault,
        } = bitrace_consistent_bounded(&h, 0)
        else {
            panic!("expected inconsistency")
        };
        assert_eq!(position, 4);
        assert!(matches!(fault, TraceFault::Theory(_)));
        assert!(!witness.is_identity());
        // Identifying x with #b is also a witness.
        let s = Substitution::singleton(Name::new("x").unwrap(), parse_message("#b").unwrap());
        let b = SubstitutionPair::new(s.clone(), s);
        assert!(!is_consistent(&h.apply(&b).underlying_theory()).is_consistent());
        // Without instantiation the theory itself is consistent.
        assert!(is_consistent(&h.underlying_theory()).is_consistent());
    }

    #[test]
    fn prefixes_of_consistent_traces() {
        let h = bt("o: enc(#a,#k) <-> enc(#b,#k)\ni: x <-> x\no: pr(x,#c) <-> pr(x,#d)");
        assert!(bitrace_consistent_bounded(&h, 1).is_consistent());
        for k in 0..h.len() {
            assert!(bitrace_consistent_bounded(&h.prefix(k), 1).is_consistent());
        }
    }
}
