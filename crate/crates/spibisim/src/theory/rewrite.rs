//! Rewriting theories by decomposing pairs and decryptable encryptions.

use super::{entails_equiv, ObserverTheory};
use crate::terms::Message;

fn components(p: &(Message, Message)) -> Option<((Message, Message), (Message, Message))> {
    match p {
        (Message::Pair(a, b), Message::Pair(c, d)) | (Message::Enc(a, b), Message::Enc(c, d)) => {
            Some((((**a).clone(), (**c).clone()), ((**b).clone(), (**d).clone())))
        }
        _ => None,
    }
}

/// Every redex of `gamma`, in ascending pair order. Pair-pair entries are
/// always redexes; enc-enc entries only when `gamma` derives the key pair.
pub fn redexes(gamma: &ObserverTheory) -> Vec<(Message, Message)> {
    gamma
        .iter()
        .filter(|p| match p {
            (Message::Pair(..), Message::Pair(..)) => true,
            (Message::Enc(_, k1), Message::Enc(_, k2)) => entails_equiv(gamma, k1, k2),
            _ => false,
        })
        .cloned()
        .collect()
}

/// Rewrites at `redex`, which must be one of [`redexes`]`(gamma)`.
pub fn rewrite_at(gamma: &ObserverTheory, redex: &(Message, Message)) -> Option<ObserverTheory> {
    if !gamma.contains_pair(redex) {
        return None;
    }
    let (a, b) = components(redex)?;
    if let (Message::Enc(_, k1), Message::Enc(_, k2)) = redex {
        if !entails_equiv(gamma, k1, k2) {
            return None;
        }
    }
    let mut out = gamma.clone();
    out.remove(redex);
    out.insert(a.0, a.1);
    out.insert(b.0, b.1);
    Some(out)
}

/// One rewrite at the smallest redex, or `None` when irreducible.
pub fn reduce_step(gamma: &ObserverTheory) -> Option<ObserverTheory> {
    let first = redexes(gamma).into_iter().next()?;
    rewrite_at(gamma, &first)
}

/// The irreducible form `Γ↓`.
pub fn normalize(gamma: &ObserverTheory) -> ObserverTheory {
    let mut cur = gamma.clone();
    while let Some(next) = reduce_step(&cur) {
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_theory;

    fn thy(s: &str) -> ObserverTheory {
        parse_theory(s).unwrap()
    }

    #[test]
    fn pair_rule_is_unconditional() {
        assert_eq!(
            reduce_step(&thy("pr(#a,x) <-> pr(#b,x)")),
            Some(thy("#a <-> #b\nx <-> x"))
        );
    }

    #[test]
    fn encryption_needs_key() {
        assert_eq!(reduce_step(&thy("enc(#a,#k) <-> enc(#b,#k)")), None);
        assert_eq!(
            reduce_step(&thy("enc(#a,#k) <-> enc(#b,#k)\n#k <-> #k")),
            Some(thy("#a <-> #b\n#k <-> #k"))
        );
    }

    #[test]
    fn normal_forms() {
        assert!(normalize(&ObserverTheory::new()).is_empty());
        assert_eq!(
            normalize(&thy("pr(pr(#a,#b),x) <-> pr(pr(#c,#d),x)")),
            thy("#a <-> #c\n#b <-> #d\nx <-> x")
        );
        assert_eq!(
            normalize(&thy("enc(#a,#k) <-> enc(#b,#k)\n#k <-> #k")),
            thy("#a <-> #b\n#k <-> #k")
        );
    }

    #[test]
    fn compound_key_by_right_rules() {
        let g = thy("enc(#a, enc(#k,#k)) <-> enc(#a, enc(#k,#k))\n#k <-> #k");
        assert!(reduce_step(&g).is_some());
    }
}
