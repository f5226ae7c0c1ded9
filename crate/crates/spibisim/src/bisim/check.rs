//! The open bisimulation clauses, checked over the bounded enumeration of
//! respectful substitution pairs.

use std::collections::BTreeSet;

use super::upto::{Justification, Search};
use super::{CheckConfig, FreshSupply, TracedRelation, TracedTriple, Verdict};
use crate::bitrace::{enumerate_respectful, BiTrace, IOPair};
use crate::process::{step, Action, Agent, Process};
use crate::terms::{fresh_name, FreeNames, Message, Name, Substitution};
use crate::theory::{is_consistent, EquivKnowledge, SynthKnowledge};

pub fn check_relation(r: &TracedRelation, cfg: &CheckConfig) -> Verdict {
    run(r, cfg, &mut |_, _| {})
}

/// Checks every obligation in order, reporting each discharged target and
/// its justification to `on_match`.
pub(crate) fn run(
    r: &TracedRelation,
    cfg: &CheckConfig,
    on_match: &mut dyn FnMut(&TracedTriple, &Justification),
) -> Verdict {
    if let Some(bad) = ill_formed(r, cfg) {
        return bad;
    }
    let members = r.symmetric_closure();
    let mut search = Search::new(&members, cfg);
    let mut obligations = 0;
    for t in &members {
        for sp in enumerate_respectful(&t.trace, cfg.subst_depth, &BTreeSet::new()) {
            let h = t.trace.apply(&sp);
            let p = t.left.apply(&sp.first);
            let q = t.right.apply(&sp.second);
            let ctx = Obligation::new(&h, &p, &q);
            let right_moves = step(&q);
            for (action, agent) in step(&p) {
                if !ctx.observable(&action) {
                    continue;
                }
                obligations += 1;
                if let Err(reason) = ctx.answer(&action, &agent, &right_moves, &mut search, on_match) {
                    return Verdict::Counterexample {
                        triple: Box::new(t.clone()),
                        subst: sp,
                        action,
                        reason,
                    };
                }
            }
        }
    }
    Verdict::VerifiedUpToBound {
        depth: cfg.subst_depth,
        obligations,
    }
}

fn ill_formed(r: &TracedRelation, cfg: &CheckConfig) -> Option<Verdict> {
    let fail = |position: usize, reason: String| Some(Verdict::RelationIllFormed { position, reason });
    if cfg.closure_budget == 0 {
        return fail(0, "closure budget must be at least 1".into());
    }
    for (position, t) in r.triples().iter().enumerate() {
        if t.left.has_replication() || t.right.has_replication() {
            return fail(position, "replication is not supported by the checker".into());
        }
        if !t.is_traced_pair() {
            let known = t.trace.free_names().names;
            let missing: Vec<String> = (&t.left, &t.right)
                .free_names()
                .names
                .difference(&known)
                .map(Name::to_string)
                .collect();
            return fail(
                position,
                format!("process names not in the bi-trace: {}", missing.join(", ")),
            );
        }
        if let Some(v) = is_consistent(&t.trace.underlying_theory()).violation {
            return fail(position, format!("bi-trace theory is inconsistent, {v}"));
        }
        let verdict = crate::bitrace::bitrace_consistent_bounded(&t.trace, cfg.subst_depth);
        if !verdict.is_consistent() {
            return fail(position, format!("bi-trace is {verdict}"));
        }
    }
    None
}

/// One instantiated triple `(hθ, Pθ₁, Qθ₂)`.
struct Obligation<'a> {
    h: &'a BiTrace,
    p: &'a Process,
    q: &'a Process,
    know: EquivKnowledge,
    synth: SynthKnowledge,
}

impl<'a> Obligation<'a> {
    fn new(h: &'a BiTrace, p: &'a Process, q: &'a Process) -> Self {
        let theory = h.underlying_theory();
        Obligation {
            h,
            p,
            q,
            know: EquivKnowledge::new(&theory),
            synth: SynthKnowledge::new(&theory.first_projection()),
        }
    }

    /// Silent moves always count; visible ones only on channels the
    /// observer can build.
    fn observable(&self, action: &Action) -> bool {
        match action {
            Action::Tau => true,
            Action::In(m) | Action::OutBar(m) => self.synth.derives(m),
        }
    }

    fn answer(
        &self,
        action: &Action,
        agent: &Agent,
        right_moves: &[(Action, Agent)],
        search: &mut Search<'_>,
        on_match: &mut dyn FnMut(&TracedTriple, &Justification),
    ) -> Result<(), String> {
        let mut candidates = 0;
        for (b, other) in right_moves {
            let Some(target) = self.target(action, agent, b, other) else {
                continue;
            };
            candidates += 1;
            if !search.trace_ok(&target.trace) {
                continue;
            }
            if let Some(j) = search.justify(&target) {
                on_match(&target, &j);
                return Ok(());
            }
        }
        let what = match action {
            Action::Tau => "silent move".to_string(),
            Action::In(m) => format!("input on {m}"),
            Action::OutBar(m) => format!("output on {m}"),
        };
        Err(if candidates == 0 {
            format!("the right process has no move matching the left {what}")
        } else {
            format!("no right move matching the left {what} leads to a consistent pair in the closure")
        })
    }

    /// The continuation triple when `b` answers `a`, if the labels fit.
    fn target(&self, a: &Action, left: &Agent, b: &Action, right: &Agent) -> Option<TracedTriple> {
        match (a, left, b, right) {
            (Action::Tau, Agent::Proc(p1), Action::Tau, Agent::Proc(q1)) => {
                Some(TracedTriple::new(self.h.clone(), p1.clone(), q1.clone()))
            }
            (
                Action::In(m),
                Agent::Abs { binder: x1, body: p1 },
                Action::In(n),
                Agent::Abs { binder: x2, body: q1 },
            ) if self.know.entails(m, n) => {
                let x = self.fresh_binder(x1);
                let trace = self
                    .h
                    .extended(IOPair::input(m.clone(), n.clone()))
                    .and_then(|h| {
                        h.extended(IOPair::input(Message::Name(x.clone()), Message::Name(x.clone())))
                    })
                    .ok()?;
                Some(TracedTriple::new(
                    trace,
                    instantiate(p1, x1, &x),
                    instantiate(q1, x2, &x),
                ))
            }
            (
                Action::OutBar(m),
                Agent::Concr {
                    restricted: xs,
                    msg: m1,
                    cont: p1,
                },
                Action::OutBar(n),
                Agent::Concr {
                    restricted: ys,
                    msg: n1,
                    cont: q1,
                },
            ) if self.know.entails(m, n) => {
                let (cs, ds) = self.fresh_rigids(xs, ys);
                let trace = self
                    .h
                    .extended(IOPair::input(m.clone(), n.clone()))
                    .and_then(|h| h.extended(IOPair::output(m1.apply(&cs), n1.apply(&ds))))
                    .ok()?;
                Some(TracedTriple::new(trace, p1.apply(&cs), q1.apply(&ds)))
            }
            _ => None,
        }
    }

    /// The left binder itself when it is not free in the triple, otherwise
    /// the first suffixed variant; both continuations use it.
    fn fresh_binder(&self, base: &Name) -> Name {
        let mut avoid = self.h.free_names().names;
        avoid.extend((self.p, self.q).free_names().names);
        if avoid.contains(base) {
            fresh_name(base, &avoid)
        } else {
            base.clone()
        }
    }

    /// Rigid names for the extruded names of both sides, fresh for the
    /// triple. The i-th name on each side gets the same rigid name.
    fn fresh_rigids(&self, xs: &[Name], ys: &[Name]) -> (Substitution, Substitution) {
        let mut excluded = self.h.free_names().rigids;
        excluded.extend((self.p, self.q).free_names().rigids);
        let mut supply = FreshSupply::new(excluded);
        let mut drawn = Vec::new();
        for k in 0..xs.len().max(ys.len()) {
            let base = xs
                .get(k)
                .or_else(|| ys.get(k))
                .expect("k below the longer length");
            drawn.push(Message::Rigid(supply.prefer(base.as_str())));
        }
        let bind = |names: &[Name]| names.iter().cloned().zip(drawn.iter().cloned()).collect();
        (bind(xs), bind(ys))
    }
}

fn instantiate(body: &Process, binder: &Name, x: &Name) -> Process {
    if binder == x {
        body.clone()
    } else {
        body.apply(&Substitution::singleton(binder.clone(), Message::Name(x.clone())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::UpToRule;
    use crate::syntax::{parse_bitrace, parse_process, parse_relation};

    fn triple(h: &str, p: &str, q: &str) -> TracedTriple {
        TracedTriple::new(
            parse_bitrace(h).unwrap(),
            parse_process(p).unwrap(),
            parse_process(q).unwrap(),
        )
    }

    fn cfg(tags: &str, depth: usize) -> CheckConfig {
        CheckConfig {
            subst_depth: depth,
            reflexive_base: false,
            ..CheckConfig::default()
        }
        .with_rules(UpToRule::parse_list(tags).unwrap())
    }

    #[test]
    fn direct_mismatch() {
        let r = TracedRelation::new(vec![triple("o: #a <-> #a", "out(#a,#n).0", "0")]);
        let Verdict::Counterexample { action, .. } = check_relation(&r, &cfg("", 1)) else {
            panic!("expected a counterexample")
        };
        assert_eq!(action.to_string(), "~#a");
    }

    #[test]
    fn hidden_match_is_stuck() {
        let r = TracedRelation::new(vec![triple(
            "o: enc(#a,#k) <-> enc(#a,#k)\ni: x <-> x",
            "[x = #a]out(#a,x).0",
            "0",
        )]);
        assert!(check_relation(&r, &cfg("", 1)).is_verified());
        assert!(check_relation(&r, &cfg("", 2)).is_verified());
    }

    #[test]
    fn undetectable_channels_are_ignored() {
        let r = TracedRelation::new(vec![triple("o: #a <-> #a", "out(#b,#b).0", "0")]);
        assert!(check_relation(&r, &cfg("", 1)).is_verified());
    }

    #[test]
    fn ill_formed_relations() {
        let r = TracedRelation::new(vec![triple("o: #a <-> #a", "out(y,#a).0", "0")]);
        assert!(matches!(
            check_relation(&r, &cfg("", 1)),
            Verdict::RelationIllFormed { position: 0, .. }
        ));
        let r = TracedRelation::new(vec![triple("", "!0", "0")]);
        assert!(matches!(
            check_relation(&r, &cfg("", 1)),
            Verdict::RelationIllFormed { .. }
        ));
        let r = TracedRelation::new(vec![triple("o: #a <-> pr(#a,#a)", "0", "0")]);
        assert!(matches!(
            check_relation(&r, &cfg("", 1)),
            Verdict::RelationIllFormed { .. }
        ));
    }

    #[test]
    fn reflexive_base() {
        let r = TracedRelation::new(vec![triple(
            "i: a <-> a\ni: b <-> b",
            "in(a,y).out(y,b).0 | out(a,b).0",
            "in(a,y).out(y,b).0 | out(a,b).0",
        )]);
        let with = CheckConfig {
            reflexive_base: true,
            ..cfg("", 1)
        };
        assert!(check_relation(&r, &with).is_verified());
        assert!(!check_relation(&r, &cfg("", 1)).is_verified());
    }

    #[test]
    fn worked_relation() {
        let r = parse_relation(include_str!("../../../../fixtures/leaky-receiver.rel")).unwrap();
        let v = check_relation(&r, &cfg("c,s", 1));
        assert!(v.is_verified(), "{v}");
        assert!(!check_relation(&r, &cfg("", 1)).is_verified());
        assert_eq!(check_relation(&r.inverse(), &cfg("c,s", 1)), v);
    }
}
