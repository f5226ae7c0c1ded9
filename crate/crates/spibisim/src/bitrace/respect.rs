//! Respectful substitution pairs: checking and bounded enumeration.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{BiTrace, Mark};
use crate::terms::{FreeNames, Message, Name, SubstitutionPair};
use crate::theory::{EquivKnowledge, ObserverTheory, SynthKnowledge};

/// First input position and name at which respectfulness fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("instantiated prefix before position {position} cannot relate the images of `{name}`")]
pub struct NotRespectful {
    pub position: usize,
    pub name: Name,
}

/// Checks that at every input pair, the images of its names are related by
/// the instantiated prefix.
pub fn respects(sp: &SubstitutionPair, h: &BiTrace) -> Result<(), NotRespectful> {
    if sp.is_identity() {
        return Ok(());
    }
    let mut prefix = ObserverTheory::new();
    for (position, e) in h.entries().iter().enumerate() {
        if e.mark == Mark::Input {
            let moved: Vec<Name> = e
                .free_names()
                .names
                .into_iter()
                .filter(|x| sp.first.get(x).is_some() || sp.second.get(x).is_some())
                .collect();
            if !moved.is_empty() {
                let know = EquivKnowledge::new(&prefix);
                for x in moved {
                    if !know.entails(&sp.first.image(&x), &sp.second.image(&x)) {
                        return Err(NotRespectful { position, name: x });
                    }
                }
            }
        }
        let inst = e.apply(sp);
        prefix.insert(inst.left, inst.right);
    }
    Ok(())
}

pub fn is_respectful(sp: &SubstitutionPair, h: &BiTrace) -> bool {
    respects(sp, h).is_ok()
}

/// Derivable pairs `(M, N)` with `M` built from the analysed first
/// projection by at most `depth` rounds of pairing and encryption.
pub fn derivable_pairs(gamma: &ObserverTheory, depth: usize) -> Vec<(Message, Message)> {
    let know = EquivKnowledge::new(gamma);
    let synth = SynthKnowledge::new(&gamma.first_projection());
    let mut seen: BTreeSet<(Message, Message)> = BTreeSet::new();
    for m in synth.analysed() {
        for n in know.equivalents(&m) {
            seen.insert((m.clone(), n));
        }
    }
    for _ in 0..depth {
        let current: Vec<(Message, Message)> = seen.iter().cloned().collect();
        for (a, c) in &current {
            for (b, d) in &current {
                seen.insert((
                    Message::pair(a.clone(), b.clone()),
                    Message::pair(c.clone(), d.clone()),
                ));
                seen.insert((
                    Message::enc(a.clone(), b.clone()),
                    Message::enc(c.clone(), d.clone()),
                ));
            }
        }
    }
    seen.into_iter().collect()
}

/// Respectful pairs over the names of `h`, built left to right: each name
/// first introduced by an input pair is either kept, identified with a
/// known or extra name, or mapped to a derivable pair of the instantiated
/// prefix (see [`derivable_pairs`]). The first element is always the
/// identity pair and the order is deterministic.
pub fn enumerate_respectful(
    h: &BiTrace,
    depth: usize,
    extra_names: &BTreeSet<Name>,
) -> Vec<SubstitutionPair> {
    let mut out = Vec::new();
    extend(
        h,
        depth,
        extra_names,
        0,
        SubstitutionPair::identity(),
        &mut BTreeSet::new(),
        &mut out,
    );
    debug_assert!(out.iter().all(|sp| is_respectful(sp, h)));
    out
}

fn extend(
    h: &BiTrace,
    depth: usize,
    extra: &BTreeSet<Name>,
    from: usize,
    sp: SubstitutionPair,
    introduced: &mut BTreeSet<Name>,
    out: &mut Vec<SubstitutionPair>,
) {
    let entries = h.entries();
    let Some(k) = (from..entries.len()).find(|&k| {
        entries[k].mark == Mark::Input
            && entries[k]
                .free_names()
                .names
                .iter()
                .any(|x| !introduced.contains(x))
    }) else {
        out.push(sp);
        return;
    };
    let fresh: Vec<Name> = entries[k]
        .free_names()
        .names
        .into_iter()
        .filter(|x| !introduced.contains(x))
        .collect();
    let earlier: BTreeSet<Name> = h.prefix(k).free_names().names;
    let mut new_introduced = introduced.clone();
    new_introduced.extend(fresh.iter().cloned());
    // Names of the prefix are introduced by inputs, so `introduced` already
    // covers them.
    debug_assert!(earlier.is_subset(introduced));

    let inst = h.prefix(k).apply(&sp);
    let mut names: BTreeSet<Name> = inst.free_names().names;
    names.extend(extra.iter().cloned());
    let mut candidates: Vec<Option<(Message, Message)>> = vec![None];
    for n in &names {
        candidates.push(Some((Message::Name(n.clone()), Message::Name(n.clone()))));
    }
    for (l, r) in derivable_pairs(&inst.underlying_theory(), depth) {
        if l.as_name().is_none() {
            candidates.push(Some((l, r)));
        }
    }

    let mut choice = vec![0usize; fresh.len()];
    loop {
        let mut next = sp.clone();
        let mut ok = true;
        for (x, &c) in fresh.iter().zip(&choice) {
            match &candidates[c] {
                None => {}
                Some((l, r)) => {
                    if l.as_name() == Some(x) && r.as_name() == Some(x) {
                        ok = false;
                    }
                    next.first.bind(x.clone(), l.clone());
                    next.second.bind(x.clone(), r.clone());
                }
            }
        }
        if ok {
            extend(h, depth, extra, k + 1, next, &mut new_introduced.clone(), out);
        }
        // Odometer over the candidate indices, last name fastest.
        let mut i = fresh.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < candidates.len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_bitrace, parse_message};
    use crate::terms::Substitution;

    fn bt(s: &str) -> BiTrace {
        parse_bitrace(s).unwrap()
    }
    fn m(s: &str) -> Message {
        parse_message(s).unwrap()
    }
    fn both(x: &str, v: &str) -> SubstitutionPair {
        let s = Substitution::singleton(Name::new(x).unwrap(), m(v));
        SubstitutionPair::new(s.clone(), s)
    }

    #[test]
    fn identity_is_respectful() {
        assert!(is_respectful(
            &SubstitutionPair::identity(),
            &bt("i: x <-> y\no: x <-> y")
        ));
    }

    #[test]
    fn distinctions() {
        let h = bt("i: x <-> x\no: #a <-> #a\ni: y <-> y\no: #b <-> #b");
        assert!(is_respectful(&both("y", "x"), &h));
        assert!(is_respectful(&both("y", "#a"), &h));
        let e = respects(&both("x", "#a"), &h).unwrap_err();
        assert_eq!(e.position, 0);
        assert!(!is_respectful(&both("y", "#b"), &h));
    }

    #[test]
    fn enumeration_examples() {
        let only = enumerate_respectful(&bt("i: x <-> x"), 0, &BTreeSet::new());
        assert_eq!(only, vec![SubstitutionPair::identity()]);
        let all = enumerate_respectful(&bt("o: #a <-> #a\ni: x <-> x"), 0, &BTreeSet::new());
        assert!(all.contains(&both("x", "#a")));
        assert_eq!(all[0], SubstitutionPair::identity());
    }

    #[test]
    fn enumeration_identifies_names() {
        let h = bt("i: x <-> x\no: #a <-> #a\ni: y <-> y\no: #b <-> #b");
        let all = enumerate_respectful(&h, 0, &BTreeSet::new());
        assert!(all.contains(&both("y", "x")));
        assert!(all.contains(&both("y", "#a")));
        assert!(!all
            .iter()
            .any(|sp| sp.first.get(&Name::new("x").unwrap()).is_some()));
        assert!(all.iter().all(|sp| is_respectful(sp, &h)));
    }

    #[test]
    fn deeper_enumeration_builds_messages() {
        let h = bt("o: #a <-> #b\ni: x <-> x");
        let all = enumerate_respectful(&h, 1, &BTreeSet::new());
        let x = Name::new("x").unwrap();
        assert!(all.iter().any(
            |sp| sp.first.get(&x) == Some(&m("pr(#a,#a)")) && sp.second.get(&x) == Some(&m("pr(#b,#b)"))
        ));
    }
}
