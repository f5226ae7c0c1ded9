//! The weakening, contraction and flex-rigid orders on bi-traces and their
//! reflexive-transitive closures.

use std::collections::BTreeSet;

use super::{BiTrace, IOPair, Mark};
use crate::terms::{FreeNames, Message, Name, RigidName, Substitution, SubstitutionPair};
use crate::theory::EquivKnowledge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrderKind {
    Weakening,
    Contraction,
    FlexRigid,
}

/// Evidence for `h ⊑ h'`: the number of one-step relations chained, and for
/// flex-rigid chains the substitution `θ` sending each reversed name to its
/// rigid name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderWitness {
    pub steps: usize,
    pub theta: Substitution,
}

/// Twice the longer trace length.
pub fn default_budget(h: &BiTrace, hp: &BiTrace) -> usize {
    2 * h.len().max(hp.len())
}

/// Decides `h ⊑ hp` for `kind` within `budget` one-step relations; a witness
/// with `steps == 1` is the one-step relation itself.
pub fn bitrace_order(h: &BiTrace, hp: &BiTrace, kind: OrderKind, budget: usize) -> Option<OrderWitness> {
    let steps = match kind {
        // h ⊑_w hp: hp is h with extra pairs whose names occur before them.
        OrderKind::Weakening => {
            let covered = |k: usize| {
                let known = hp.prefix(k).free_names().names;
                hp.entries()[k].free_names().names.is_subset(&known)
            };
            embeds(hp.entries(), h.entries(), covered)?
        }
        // h ⊑_c hp: h is hp with extra pairs derivable from their prefix.
        OrderKind::Contraction => {
            let covered = |k: usize| {
                let e = &h.entries()[k];
                EquivKnowledge::new(&h.prefix(k).underlying_theory()).entails(&e.left, &e.right)
            };
            embeds(h.entries(), hp.entries(), covered)?
        }
        OrderKind::FlexRigid => return flex_rigid(h, hp).filter(|w| w.steps <= budget),
    };
    (steps <= budget).then(|| OrderWitness {
        steps,
        theta: Substitution::identity(),
    })
}

/// Whether `short` is a subsequence of `long` whose skipped positions are
/// all `covered`; returns the number skipped.
fn embeds(long: &[IOPair], short: &[IOPair], covered: impl Fn(usize) -> bool) -> Option<usize> {
    let (n, m) = (long.len(), short.len());
    if m > n {
        return None;
    }
    let cover: Vec<bool> = (0..n).map(&covered).collect();
    // ok[i][j]: long[j..] can absorb short[i..].
    let mut ok = vec![vec![false; n + 1]; m + 1];
    ok[m][n] = true;
    for j in (0..n).rev() {
        ok[m][j] = cover[j] && ok[m][j + 1];
    }
    for i in (0..m).rev() {
        for j in (0..n).rev() {
            ok[i][j] = (cover[j] && ok[i][j + 1]) || (short[i] == long[j] && ok[i + 1][j + 1]);
        }
    }
    ok[0][0].then_some(n - m)
}

/// `h` is `hp` with some name inputs `(x,x)ⁱ` reversed into fresh rigid
/// outputs `(#c,#c)ᵒ` and `x` replaced by `#c` afterwards.
fn flex_rigid(h: &BiTrace, hp: &BiTrace) -> Option<OrderWitness> {
    if h.len() != hp.len() {
        return None;
    }
    let mut theta = Substitution::identity();
    let mut flips = Vec::new();
    let mut rigids: BTreeSet<RigidName> = BTreeSet::new();
    for (k, (a, b)) in h.entries().iter().zip(hp.entries()).enumerate() {
        if let (Some(c), Some(x)) = (reversed_rigid(a), reversed_name(b)) {
            if a.mark == Mark::Output && b.mark == Mark::Input && !rigids.contains(&c) {
                if hp.prefix(k).free_names().names.contains(&x) || theta.get(&x).is_some() {
                    return None;
                }
                rigids.insert(c.clone());
                theta.bind(x, Message::Rigid(c));
                flips.push(k);
            }
        }
    }
    // The reversed rigid names are fresh for the trace they replace names in.
    let hp_rigids = hp.free_names().rigids;
    if rigids.iter().any(|c| hp_rigids.contains(c)) {
        return None;
    }
    let sp = SubstitutionPair::new(theta.clone(), theta.clone());
    for (k, (a, b)) in h.entries().iter().zip(hp.entries()).enumerate() {
        if flips.contains(&k) {
            continue;
        }
        if *a != b.apply(&sp) {
            return None;
        }
    }
    Some(OrderWitness {
        steps: flips.len(),
        theta,
    })
}

fn reversed_rigid(e: &IOPair) -> Option<RigidName> {
    match (&e.left, &e.right) {
        (Message::Rigid(a), Message::Rigid(b)) if a == b => Some(a.clone()),
        _ => None,
    }
}

fn reversed_name(e: &IOPair) -> Option<Name> {
    match (&e.left, &e.right) {
        (Message::Name(a), Message::Name(b)) if a == b => Some(a.clone()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_bitrace;

    fn bt(s: &str) -> BiTrace {
        parse_bitrace(s).unwrap()
    }

    #[test]
    fn weakening() {
        let w = bitrace_order(
            &bt("o: #a <-> #a"),
            &bt("o: #a <-> #a\ni: #a <-> #a"),
            OrderKind::Weakening,
            2,
        );
        assert_eq!(w.map(|w| w.steps), Some(1));
        assert!(bitrace_order(
            &bt("i: x <-> x"),
            &bt("i: x <-> x\ni: y <-> y"),
            OrderKind::Weakening,
            2
        )
        .is_none());
        let h = bt("i: x <-> x");
        assert_eq!(
            bitrace_order(&h, &h, OrderKind::Weakening, 0).map(|w| w.steps),
            Some(0)
        );
    }

    #[test]
    fn contraction() {
        let w = bitrace_order(
            &bt("o: #a <-> #a\ni: #a <-> #a"),
            &bt("o: #a <-> #a"),
            OrderKind::Contraction,
            2,
        );
        assert_eq!(w.map(|w| w.steps), Some(1));
        assert!(bitrace_order(
            &bt("o: #a <-> #a\no: #b <-> #b"),
            &bt("o: #a <-> #a"),
            OrderKind::Contraction,
            2
        )
        .is_none());
    }

    #[test]
    fn flex_rigid_reversal() {
        let h = bt("o: #a <-> #a\no: #c <-> #c\no: enc(#c,#a) <-> enc(#c,#a)");
        let hp = bt("o: #a <-> #a\ni: x <-> x\no: enc(x,#a) <-> enc(x,#a)");
        let w = bitrace_order(&h, &hp, OrderKind::FlexRigid, 2).unwrap();
        assert_eq!(w.steps, 1);
        assert_eq!(w.theta.to_string(), "[x := #c]");
        // #a is not fresh for the trace.
        let h = bt("o: #a <-> #a\no: #a <-> #a\no: enc(#a,#a) <-> enc(#a,#a)");
        assert!(bitrace_order(&h, &hp, OrderKind::FlexRigid, 2).is_none());
    }

    #[test]
    fn budget_limits_chains() {
        let h = bt("o: #a <-> #a");
        let hp = bt("o: #a <-> #a\ni: #a <-> #a\ni: #a <-> #a");
        assert!(bitrace_order(&h, &hp, OrderKind::Weakening, 1).is_none());
        assert_eq!(
            bitrace_order(&h, &hp, OrderKind::Weakening, default_budget(&h, &hp)).map(|w| w.steps),
            Some(2)
        );
    }
}
