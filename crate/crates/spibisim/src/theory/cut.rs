//! Cut for equivalence derivations, by induction on the left derivation.

use thiserror::Error;

use super::proof::{Derivation, Entry, Rule, Sequent};
use super::ObserverTheory;
use crate::terms::Message;

type Pair = (Message, Message);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutError {
    #[error("cut expects equivalence derivations")]
    NotEquivalence,
    #[error("cut pair {left} <-> {right} is not in the context of the right derivation")]
    CutPairMissing { left: Message, right: Message },
    #[error("right derivation context is not the given context plus the cut pair")]
    ContextMismatch,
    #[error("invalid input derivation: {0}")]
    Invalid(#[from] super::InvalidDerivation),
}

/// From `d1: Γ ⊢ M ↔ N` and `d2: Δ ∪ {(M,N)} ⊢ R ↔ T`, builds `Γ ∪ Δ ⊢ R ↔ T`
/// where `Δ` is the context of `d2` without the cut pair.
pub fn cut(d1: &Derivation, d2: &Derivation) -> Result<Derivation, CutError> {
    let (_, m, n) = d1.equiv_parts().ok_or(CutError::NotEquivalence)?;
    let (ctx2, _, _) = d2.equiv_parts().ok_or(CutError::NotEquivalence)?;
    let pair = (m.clone(), n.clone());
    if !ctx2.contains_pair(&pair) {
        return Err(CutError::CutPairMissing {
            left: pair.0,
            right: pair.1,
        });
    }
    let mut delta = ctx2.clone();
    delta.remove(&pair);
    cut_with_context(d1, d2, &delta)
}

/// As [`cut`] with `Δ` explicit; when the cut pair already lies in `Δ` the
/// result is `d2` weakened by `Γ`.
pub fn cut_with_context(
    d1: &Derivation,
    d2: &Derivation,
    delta: &ObserverTheory,
) -> Result<Derivation, CutError> {
    d1.validate()?;
    d2.validate()?;
    let out = cut_rec(d1, d2, delta)?;
    debug_assert!(out.validate().is_ok(), "cut produced an invalid derivation");
    Ok(out)
}

fn cut_rec(d1: &Derivation, d2: &Derivation, delta: &ObserverTheory) -> Result<Derivation, CutError> {
    let (gamma, m, n) = d1.equiv_parts().ok_or(CutError::NotEquivalence)?;
    let (ctx2, _, _) = d2.equiv_parts().ok_or(CutError::NotEquivalence)?;
    let pair = (m.clone(), n.clone());
    let mut expected = delta.clone();
    expected.insert(pair.0.clone(), pair.1.clone());
    if *ctx2 != expected {
        return Err(CutError::ContextMismatch);
    }
    if delta.contains_pair(&pair) {
        return Ok(weaken(d2, gamma));
    }
    let gamma_delta = gamma.union(delta);
    match d1.rule {
        Rule::Var => Ok(weaken(&replace(d2, &pair, &[]), gamma)),
        Rule::Id => Ok(weaken(d2, gamma)),
        Rule::Pl | Rule::El => {
            let (principal, a, b) = left_principal(d1).expect("validated left node");
            let main = d1.premises.last().expect("validated left node");
            let above = cut_rec(main, d2, delta)?;
            if gamma_delta.contains_pair(&a) && gamma_delta.contains_pair(&b) {
                return Ok(above);
            }
            let mut premises = Vec::new();
            if d1.rule == Rule::El {
                premises.push(weaken(&d1.premises[0], delta));
            }
            premises.push(above);
            let (_, r, t) = d2.equiv_parts().expect("checked");
            Ok(Derivation {
                rule: d1.rule,
                conclusion: equiv(&gamma_delta, r, t),
                premises,
                principal: Some(Entry::Pair(principal.0, principal.1)),
            })
        }
        Rule::Pr | Rule::Er => {
            let (c1, c2) = components(&pair).expect("validated right node");
            let inverted = replace(d2, &pair, &[c1.clone(), c2.clone()]);
            let mut delta1 = delta.clone();
            delta1.insert(c2.0.clone(), c2.1.clone());
            let first = cut_rec(&d1.premises[0], &inverted, &delta1)?;
            cut_rec(&d1.premises[1], &first, &gamma_delta)
        }
    }
}

fn equiv(ctx: &ObserverTheory, l: &Message, r: &Message) -> Sequent {
    Sequent::Equiv {
        theory: ctx.clone(),
        left: l.clone(),
        right: r.clone(),
    }
}

fn components(p: &Pair) -> Option<(Pair, Pair)> {
    match p {
        (Message::Pair(a, b), Message::Pair(c, d)) | (Message::Enc(a, b), Message::Enc(c, d)) => {
            Some((((**a).clone(), (**c).clone()), ((**b).clone(), (**d).clone())))
        }
        _ => None,
    }
}

/// Principal pair and its components for a `pl`/`el` node.
fn left_principal(d: &Derivation) -> Option<(Pair, Pair, Pair)> {
    let (ctx, _, _) = d.equiv_parts()?;
    let (main_ctx, _, _) = d.premises.last()?.equiv_parts()?;
    let fits = |p: &Pair| -> Option<(Pair, Pair, Pair)> {
        let (a, b) = components(p)?;
        let is_pair = matches!(p.0, Message::Pair(..));
        if is_pair != (d.rule == Rule::Pl) || !ctx.contains_pair(p) {
            return None;
        }
        let mut ext = ctx.clone();
        ext.insert(a.0.clone(), a.1.clone());
        ext.insert(b.0.clone(), b.1.clone());
        if ext != *main_ctx {
            return None;
        }
        if d.rule == Rule::El {
            let (_, kl, kr) = d.premises[0].equiv_parts()?;
            if (kl, kr) != (&b.0, &b.1) {
                return None;
            }
        }
        Some((p.clone(), a, b))
    };
    match &d.principal {
        Some(Entry::Pair(l, r)) => fits(&(l.clone(), r.clone())),
        Some(Entry::Msg(_)) => None,
        None => ctx.iter().find_map(fits),
    }
}

/// Adds `extra` to every context.
fn weaken(d: &Derivation, extra: &ObserverTheory) -> Derivation {
    let (ctx, l, r) = d.equiv_parts().expect("equivalence derivation");
    Derivation {
        rule: d.rule,
        conclusion: equiv(&ctx.union(extra), l, r),
        premises: d.premises.iter().map(|p| weaken(p, extra)).collect(),
        principal: d.principal.clone(),
    }
}

/// Replaces the context entry `p` by `comps` (its components, or nothing for
/// a name identity) throughout `d`, which must hold `p` in its root context.
fn replace(d: &Derivation, p: &Pair, comps: &[Pair]) -> Derivation {
    let (ctx, l, r) = d.equiv_parts().expect("equivalence derivation");
    let mut new_ctx = ctx.clone();
    new_ctx.remove(p);
    for c in comps {
        new_ctx.insert(c.0.clone(), c.1.clone());
    }
    let comps_theory: ObserverTheory = comps.iter().cloned().collect();
    match d.rule {
        Rule::Id if (l, r) == (&p.0, &p.1) => {
            let leaf = |rule, goal: &Pair| Derivation {
                rule,
                conclusion: equiv(&new_ctx, &goal.0, &goal.1),
                premises: Vec::new(),
                principal: None,
            };
            if comps.is_empty() {
                return leaf(Rule::Var, p);
            }
            let rule = if matches!(p.0, Message::Pair(..)) {
                Rule::Pr
            } else {
                Rule::Er
            };
            Derivation {
                rule,
                conclusion: equiv(&new_ctx, l, r),
                premises: comps.iter().map(|c| leaf(Rule::Id, c)).collect(),
                principal: None,
            }
        }
        Rule::Pl | Rule::El => {
            let (principal, a, b) = left_principal(d).expect("valid left node");
            let main = d.premises.last().expect("valid left node");
            if principal == *p {
                return replace(main, p, comps);
            }
            let mut premises = Vec::new();
            if d.rule == Rule::El {
                premises.push(replace(&d.premises[0], p, comps));
            }
            if a == *p || b == *p {
                premises.push(weaken(main, &comps_theory));
            } else {
                premises.push(replace(main, p, comps));
            }
            Derivation {
                rule: d.rule,
                conclusion: equiv(&new_ctx, l, r),
                premises,
                principal: Some(Entry::Pair(principal.0, principal.1)),
            }
        }
        _ => Derivation {
            rule: d.rule,
            conclusion: equiv(&new_ctx, l, r),
            premises: d.premises.iter().map(|q| replace(q, p, comps)).collect(),
            principal: d.principal.clone(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_message, parse_theory};
    use crate::theory::{entails_equiv, prove_equiv};

    fn m(s: &str) -> Message {
        parse_message(s).unwrap()
    }
    fn thy(s: &str) -> ObserverTheory {
        parse_theory(s).unwrap()
    }

    #[test]
    fn cut_through_identity() {
        let d1 = prove_equiv(&thy("#a <-> #b"), &m("#a"), &m("#b")).unwrap();
        let d2 = prove_equiv(&thy("#a <-> #b"), &m("pr(#a,x)"), &m("pr(#b,x)")).unwrap();
        let out = cut(&d1, &d2).unwrap();
        out.validate().unwrap();
        let (ctx, l, r) = out.equiv_parts().unwrap();
        assert_eq!(*ctx, thy("#a <-> #b"));
        assert!(entails_equiv(ctx, l, r));
    }

    #[test]
    fn cut_pair_already_in_delta_weakens() {
        let d1 = prove_equiv(&thy("#c <-> #d"), &m("#c"), &m("#d")).unwrap();
        let d2 = prove_equiv(&thy("#c <-> #d\n#e <-> #f"), &m("#e"), &m("#f")).unwrap();
        let delta = thy("#c <-> #d\n#e <-> #f");
        let out = cut_with_context(&d1, &d2, &delta).unwrap();
        out.validate().unwrap();
        assert_eq!(*out.equiv_parts().unwrap().0, delta);
    }

    #[test]
    fn cut_of_name_identity_strengthens() {
        let d1 = prove_equiv(&ObserverTheory::new(), &m("x"), &m("x")).unwrap();
        let d2 = prove_equiv(&thy("x <-> x"), &m("enc(x,#k)"), &m("enc(x,#k)"));
        // #k ↔ #k is not derivable, so add it to both sides of the cut.
        assert!(d2.is_none());
        let d2 = prove_equiv(&thy("x <-> x\n#k <-> #k"), &m("enc(x,#k)"), &m("enc(x,#k)")).unwrap();
        let out = cut(&d1, &d2).unwrap();
        out.validate().unwrap();
        assert_eq!(*out.equiv_parts().unwrap().0, thy("#k <-> #k"));
    }

    #[test]
    fn cut_with_pair_and_encryption() {
        let g = thy("enc(pr(#a,#b),#k) <-> enc(pr(#c,#d),#k)\n#k <-> #k");
        let d1 = prove_equiv(&g, &m("pr(#a,#b)"), &m("pr(#c,#d)")).unwrap();
        let delta2 = thy("pr(#a,#b) <-> pr(#c,#d)");
        let d2 = prove_equiv(&delta2, &m("enc(#b,#a)"), &m("enc(#d,#c)")).unwrap();
        let out = cut(&d1, &d2).unwrap();
        out.validate().unwrap();
        let (ctx, l, r) = out.equiv_parts().unwrap();
        assert_eq!(*ctx, g);
        assert!(entails_equiv(ctx, l, r));
    }

    #[test]
    fn missing_cut_pair_is_rejected() {
        let d1 = prove_equiv(&thy("#a <-> #b"), &m("#a"), &m("#b")).unwrap();
        let d2 = prove_equiv(&ObserverTheory::new(), &m("x"), &m("x")).unwrap();
        assert!(matches!(cut(&d1, &d2), Err(CutError::CutPairMissing { .. })));
    }
}
