//! Membership in the up-to closure of a relation, by bounded backward
//! search.
//!
//! Trace-level rules (injective renaming, substitution, flex-rigid reversal,
//! weakening, contraction) are found together by aligning a member trace
//! with the target trace; restriction and parallel composition peel the
//! target processes and recurse.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::{CheckConfig, FreshSupply, ParallelContext, TracedRelation, TracedTriple, UpToRule};
use crate::bitrace::{respects, BiTrace, IOPair, Mark, TraceConsistencyCache};
use crate::process::{struct_equiv, Process};
use crate::terms::{FreeNames, Message, Name, RigidName, Substitution, SubstitutionPair};
use crate::theory::{is_consistent, EquivKnowledge};

/// Cap on rigid-name assignments tried per restriction peel.
const MAX_RESTRICTION_CHOICES: usize = 256;

/// How a target triple belongs to the closure: the index of the member in
/// the symmetric closure it comes from, and the rules applied to it in
/// order. `reflexive` marks the identity relation on reflexive traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Justification {
    pub member: Option<usize>,
    pub rules: Vec<UpToRule>,
    pub reflexive: bool,
}

impl Justification {
    /// Justified by a member as it stands.
    pub fn is_direct(&self) -> bool {
        !self.reflexive && self.rules.is_empty()
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = Vec::new();
        if self.reflexive {
            parts.push("reflexivity");
        } else if self.rules.is_empty() {
            parts.push("member");
        }
        parts.extend(self.rules.iter().map(|r| r.long_name()));
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Searches for a justification of `target` in the up-to closure of `r`
/// under the rules of `cfg`.
pub fn up_to_member(target: &TracedTriple, r: &TracedRelation, cfg: &CheckConfig) -> Option<Justification> {
    let members = r.symmetric_closure();
    Search::new(&members, cfg).justify(target)
}

pub(crate) struct Search<'a> {
    members: &'a [TracedTriple],
    cfg: &'a CheckConfig,
    traces: TraceConsistencyCache,
    theories: HashMap<BiTrace, bool>,
}

impl<'a> Search<'a> {
    pub(crate) fn new(members: &'a [TracedTriple], cfg: &'a CheckConfig) -> Self {
        Search {
            members,
            cfg,
            traces: TraceConsistencyCache::new(cfg.subst_depth),
            theories: HashMap::new(),
        }
    }

    /// Underlying theory consistent and bi-trace consistent at the
    /// configured depth.
    pub(crate) fn trace_ok(&mut self, h: &BiTrace) -> bool {
        let theory_ok = *self
            .theories
            .entry(h.clone())
            .or_insert_with(|| is_consistent(&h.underlying_theory()).is_consistent());
        theory_ok && self.traces.check(h).is_consistent()
    }

    pub(crate) fn justify(&mut self, target: &TracedTriple) -> Option<Justification> {
        self.justify_within(target, self.cfg.closure_budget)
    }

    fn justify_within(&mut self, target: &TracedTriple, budget: usize) -> Option<Justification> {
        if self.cfg.reflexive_base && self.reflexive(target) {
            return Some(Justification {
                member: None,
                rules: Vec::new(),
                reflexive: true,
            });
        }
        let cover = self.contraction_cover(&target.trace);
        for (idx, m) in self.members.iter().enumerate() {
            if let Some(rules) = self.align(m, target, &cover, budget) {
                return Some(Justification {
                    member: Some(idx),
                    rules,
                    reflexive: false,
                });
            }
        }
        if budget == 0 {
            return None;
        }
        if self.cfg.uses(UpToRule::Restriction) {
            if let Some(j) = self.restriction(target, budget) {
                return Some(j);
            }
        }
        if self.cfg.uses(UpToRule::Parallel) {
            for ctx in self.cfg.parallel_contexts.clone() {
                if let Some(j) = self.parallel(target, &ctx, budget) {
                    return Some(j);
                }
            }
        }
        None
    }

    /// `(h, P, P)` with identical trace projections is in the identity
    /// relation, which is an open bisimulation.
    fn reflexive(&mut self, t: &TracedTriple) -> bool {
        t.trace.entries().iter().all(|e| e.left == e.right)
            && t.left.alpha_eq(&t.right)
            && t.is_traced_pair()
            && self.trace_ok(&t.trace)
    }

    /// Target positions removable by contraction: derivable from the pairs
    /// before them.
    fn contraction_cover(&self, h: &BiTrace) -> Vec<bool> {
        if !self.cfg.uses(UpToRule::Contraction) {
            return vec![false; h.len()];
        }
        (0..h.len())
            .map(|k| {
                let e = &h.entries()[k];
                EquivKnowledge::new(&h.prefix(k).underlying_theory()).entails(&e.left, &e.right)
            })
            .collect()
    }

    fn align(
        &mut self,
        m: &TracedTriple,
        t: &TracedTriple,
        cover: &[bool],
        budget: usize,
    ) -> Option<Vec<UpToRule>> {
        let mut found = None;
        let mut st = Alignment::default();
        self.extend_alignment(m, t, cover, budget, 0, 0, &mut st, &mut found);
        found
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_alignment(
        &mut self,
        m: &TracedTriple,
        t: &TracedTriple,
        cover: &[bool],
        budget: usize,
        i: usize,
        j: usize,
        st: &mut Alignment,
        found: &mut Option<Vec<UpToRule>>,
    ) {
        if found.is_some() || st.order_steps() > budget {
            return;
        }
        let (me, te) = (m.trace.entries(), t.trace.entries());
        if i == me.len() && j == te.len() {
            *found = self.finish(m, t, st, budget);
            return;
        }
        let allow_s = self.cfg.uses(UpToRule::Substitution);
        let allow_i = self.cfg.uses(UpToRule::InjectiveRenaming);
        if i < me.len() && j < te.len() {
            let (a, b) = (&me[i], &te[j]);
            if a.mark == b.mark {
                let mut next = st.clone();
                if match_msg(&a.left, &b.left, &mut next.th1, &mut next.rho1, allow_s, allow_i)
                    && match_msg(
                        &a.right,
                        &b.right,
                        &mut next.th2,
                        &mut next.rho2,
                        allow_s,
                        allow_i,
                    )
                {
                    self.extend_alignment(m, t, cover, budget, i + 1, j + 1, &mut next, found);
                }
            }
            if self.cfg.uses(UpToRule::FlexRigid) {
                if let (Some(x), Some(c)) = (flexible(a), reversed(b)) {
                    let unbound = !st.th1.contains_key(&x) && !st.th2.contains_key(&x);
                    if unbound && !st.flips.iter().any(|(_, _, d)| *d == c) {
                        let mut next = st.clone();
                        next.th1.insert(x.clone(), Message::Rigid(c.clone()));
                        next.th2.insert(x.clone(), Message::Rigid(c.clone()));
                        next.flips.push((i, x, c));
                        self.extend_alignment(m, t, cover, budget, i + 1, j + 1, &mut next, found);
                    }
                }
            }
        }
        if j < te.len() && cover[j] {
            let mut next = st.clone();
            next.cskip.push(j);
            self.extend_alignment(m, t, cover, budget, i, j + 1, &mut next, found);
        }
        if i < me.len() && self.cfg.uses(UpToRule::Weakening) {
            let mut next = st.clone();
            next.wskip.push(i);
            self.extend_alignment(m, t, cover, budget, i + 1, j, &mut next, found);
        }
    }

    /// Checks the side conditions of a complete alignment and returns the
    /// rule chain it witnesses.
    fn finish(
        &mut self,
        m: &TracedTriple,
        t: &TracedTriple,
        st: &Alignment,
        budget: usize,
    ) -> Option<Vec<UpToRule>> {
        let mut rho1 = st.rho1.clone();
        let mut rho2 = st.rho2.clone();
        let procs_rigids = |p: &Process| p.free_names().rigids;
        if !extend_injective(
            &mut rho1,
            procs_rigids(&m.left)
                .into_iter()
                .chain(m.trace.free_names().rigids),
        ) || !extend_injective(
            &mut rho2,
            procs_rigids(&m.right)
                .into_iter()
                .chain(m.trace.free_names().rigids),
        ) {
            return None;
        }
        let renamed = rho1.iter().any(|(a, b)| a != b) || rho2.iter().any(|(a, b)| a != b);
        let as_msgs = |rho: &BTreeMap<RigidName, RigidName>| -> BTreeMap<RigidName, Message> {
            rho.iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.clone(), Message::Rigid(b.clone())))
                .collect()
        };
        let (r1, r2) = (as_msgs(&rho1), as_msgs(&rho2));
        let h_rho = BiTrace::from_entries_unchecked(
            m.trace
                .entries()
                .iter()
                .map(|e| IOPair::new(e.left.rename_rigid(&r1), e.right.rename_rigid(&r2), e.mark))
                .collect(),
        );

        let flipped: BTreeSet<&Name> = st.flips.iter().map(|(_, x, _)| x).collect();
        let subst_part = |th: &BTreeMap<Name, Message>| -> Substitution {
            th.iter()
                .filter(|(x, v)| !flipped.contains(x) && v.as_name() != Some(x))
                .map(|(x, v)| (x.clone(), v.clone()))
                .collect()
        };
        let theta = SubstitutionPair::new(subst_part(&st.th1), subst_part(&st.th2));
        let substituted = !theta.is_identity();
        if substituted && respects(&theta, &h_rho).is_err() {
            return None;
        }
        let h_s = h_rho.apply(&theta);

        // Flex-rigid reversal: fresh rigid names replace names first input at
        // the flipped positions.
        let flip: Substitution = st
            .flips
            .iter()
            .map(|(_, x, c)| (x.clone(), Message::Rigid(c.clone())))
            .collect();
        let h_s_rigids = h_s.free_names().rigids;
        for (k, x, c) in &st.flips {
            if h_s.prefix(*k).free_names().names.contains(x) || h_s_rigids.contains(c) {
                return None;
            }
        }
        let flip_pair = SubstitutionPair::new(flip.clone(), flip.clone());
        let h_f = BiTrace::from_entries_unchecked(
            h_s.entries()
                .iter()
                .enumerate()
                .map(|(k, e)| match st.flips.iter().find(|(i, _, _)| *i == k) {
                    Some((_, _, c)) => IOPair::output(Message::Rigid(c.clone()), Message::Rigid(c.clone())),
                    None => e.apply(&flip_pair),
                })
                .collect(),
        );

        // Weakening drops member pairs whose names are already known.
        for &k in &st.wskip {
            let known = h_f.prefix(k).free_names().names;
            if !h_f.entries()[k].free_names().names.is_subset(&known) {
                return None;
            }
        }

        let left = m.left.rename_rigid(&r1).apply(&theta.first).apply(&flip);
        let right = m.right.rename_rigid(&r2).apply(&theta.second).apply(&flip);
        let mut structural = false;
        for (mine, theirs) in [(&left, &t.left), (&right, &t.right)] {
            if mine.alpha_eq(theirs) {
                continue;
            }
            if self.cfg.uses(UpToRule::Structural) && struct_equiv(mine, theirs).unwrap_or(false) {
                structural = true;
            } else {
                return None;
            }
        }

        let steps =
            usize::from(renamed) + usize::from(substituted) + st.order_steps() + usize::from(structural);
        if steps > budget {
            return None;
        }
        if !(st.wskip.is_empty() && st.cskip.is_empty()) && !self.trace_ok(&t.trace) {
            return None;
        }
        let mut rules = Vec::new();
        let mut push = |on: bool, r: UpToRule| {
            if on {
                rules.push(r)
            }
        };
        push(renamed, UpToRule::InjectiveRenaming);
        push(substituted, UpToRule::Substitution);
        push(!st.flips.is_empty(), UpToRule::FlexRigid);
        push(!st.wskip.is_empty(), UpToRule::Weakening);
        push(!st.cskip.is_empty(), UpToRule::Contraction);
        push(structural, UpToRule::Structural);
        Some(rules)
    }

    /// `h ⊢ νx⃗.P ~ νy⃗.Q` from `h ⊢ P[c⃗/x⃗] ~ Q[d⃗/y⃗]` with rigid names not
    /// free in the respective side.
    fn restriction(&mut self, t: &TracedTriple, budget: usize) -> Option<Justification> {
        let (xs, p0) = leading_restrictions(&t.left);
        let (ys, q0) = leading_restrictions(&t.right);
        if xs.is_empty() && ys.is_empty() {
            return None;
        }
        let mut pool: BTreeSet<RigidName> = BTreeSet::new();
        for m in self.members {
            pool.extend(m.free_names().rigids);
        }
        let mut supply = FreshSupply::new(pool.iter().cloned().chain(t.free_names().rigids).collect());
        for x in xs.iter().chain(&ys) {
            pool.insert(supply.prefer(x.as_str()));
        }
        let side_rigids = |proj: u8, p: &Process| {
            let mut used: BTreeSet<RigidName> = p.free_names().rigids;
            for (msg, _) in t.trace.project(proj) {
                used.extend(msg.free_names().rigids);
            }
            used
        };
        let left_choices = injective_choices(&xs, &pool, &side_rigids(1, &p0));
        let right_choices = injective_choices(&ys, &pool, &side_rigids(2, &q0));
        for cs in &left_choices {
            for ds in &right_choices {
                let inner = TracedTriple::new(t.trace.clone(), p0.apply(cs), q0.apply(ds));
                if let Some(mut j) = self.justify_within(&inner, budget - 1) {
                    j.rules.push(UpToRule::Restriction);
                    return Some(j);
                }
            }
        }
        None
    }

    /// `h ⊢ A ~ B` with `A ≡ P | Rσ₁`, `B ≡ Q | Rσ₂`, `σ₁ ↔_h σ₂` and
    /// `h ⊢ P ~ Q` justified recursively.
    fn parallel(&mut self, t: &TracedTriple, ctx: &ParallelContext, budget: usize) -> Option<Justification> {
        let domain: BTreeSet<Name> = ctx.domain.iter().cloned().collect();
        let fr = ctx.process.free_names();
        if !fr.rigids.is_empty() || !fr.names.is_subset(&domain) {
            return None;
        }
        let pattern = par_components(&ctx.process);
        let lefts = split_matches(&pattern, &par_components(&t.left), &fr.names);
        let rights = split_matches(&pattern, &par_components(&t.right), &fr.names);
        for (s1, p) in &lefts {
            for (s2, q) in &rights {
                if !equiv_images(s1, s2, &fr.names, &t.trace) {
                    continue;
                }
                let inner = TracedTriple::new(t.trace.clone(), p.clone(), q.clone());
                if let Some(mut j) = self.justify_within(&inner, budget - 1) {
                    j.rules.push(UpToRule::Parallel);
                    return Some(j);
                }
            }
        }
        None
    }
}

/// Partial alignment of a member trace with a target trace.
#[derive(Debug, Clone, Default)]
struct Alignment {
    th1: BTreeMap<Name, Message>,
    th2: BTreeMap<Name, Message>,
    rho1: BTreeMap<RigidName, RigidName>,
    rho2: BTreeMap<RigidName, RigidName>,
    /// (member position, name, rigid name) for each reversal.
    flips: Vec<(usize, Name, RigidName)>,
    wskip: Vec<usize>,
    cskip: Vec<usize>,
}

impl Alignment {
    fn order_steps(&self) -> usize {
        self.flips.len() + self.wskip.len() + self.cskip.len()
    }
}

/// One-sided matching of a member message against a target message.
fn match_msg(
    pat: &Message,
    tgt: &Message,
    th: &mut BTreeMap<Name, Message>,
    rho: &mut BTreeMap<RigidName, RigidName>,
    allow_s: bool,
    allow_i: bool,
) -> bool {
    match (pat, tgt) {
        (Message::Name(x), _) => match th.get(x) {
            Some(v) => v == tgt,
            None if allow_s || tgt.as_name() == Some(x) => {
                th.insert(x.clone(), tgt.clone());
                true
            }
            None => false,
        },
        (Message::Rigid(a), Message::Rigid(b)) => match rho.get(a) {
            Some(v) => v == b,
            None if (allow_i || a == b) && !rho.values().any(|v| v == b) => {
                rho.insert(a.clone(), b.clone());
                true
            }
            None => false,
        },
        (Message::Pair(a1, a2), Message::Pair(b1, b2)) | (Message::Enc(a1, a2), Message::Enc(b1, b2)) => {
            match_msg(a1, b1, th, rho, allow_s, allow_i) && match_msg(a2, b2, th, rho, allow_s, allow_i)
        }
        _ => false,
    }
}

/// Adds identity bindings for `extra` rigid names, failing if that breaks
/// injectivity.
fn extend_injective(
    rho: &mut BTreeMap<RigidName, RigidName>,
    extra: impl IntoIterator<Item = RigidName>,
) -> bool {
    for a in extra {
        if rho.contains_key(&a) {
            continue;
        }
        if rho.values().any(|v| *v == a) {
            return false;
        }
        rho.insert(a.clone(), a);
    }
    true
}

fn flexible(e: &IOPair) -> Option<Name> {
    match (&e.left, &e.right, e.mark) {
        (Message::Name(a), Message::Name(b), Mark::Input) if a == b => Some(a.clone()),
        _ => None,
    }
}

fn reversed(e: &IOPair) -> Option<RigidName> {
    match (&e.left, &e.right, e.mark) {
        (Message::Rigid(a), Message::Rigid(b), Mark::Output) if a == b => Some(a.clone()),
        _ => None,
    }
}

fn leading_restrictions(p: &Process) -> (Vec<Name>, Process) {
    let mut binders = Vec::new();
    let mut cur = p;
    while let Process::Restrict { binder, body } = cur {
        binders.push(binder.clone());
        cur = body;
    }
    (binders, cur.clone())
}

/// Substitutions sending `xs` injectively to rigid names of `pool` outside
/// `avoid`, in a deterministic order.
fn injective_choices(
    xs: &[Name],
    pool: &BTreeSet<RigidName>,
    avoid: &BTreeSet<RigidName>,
) -> Vec<Substitution> {
    let usable: Vec<&RigidName> = pool.iter().filter(|c| !avoid.contains(*c)).collect();
    let mut out = Vec::new();
    let mut chosen: Vec<&RigidName> = Vec::new();
    fn go<'p>(
        xs: &[Name],
        usable: &[&'p RigidName],
        chosen: &mut Vec<&'p RigidName>,
        out: &mut Vec<Substitution>,
    ) {
        if out.len() >= MAX_RESTRICTION_CHOICES {
            return;
        }
        if chosen.len() == xs.len() {
            out.push(
                xs.iter()
                    .cloned()
                    .zip(chosen.iter().map(|c| Message::Rigid((*c).clone())))
                    .collect(),
            );
            return;
        }
        for c in usable {
            if !chosen.contains(c) {
                chosen.push(c);
                go(xs, usable, chosen, out);
                chosen.pop();
            }
        }
    }
    go(xs, &usable, &mut chosen, &mut out);
    out
}

fn par_components(p: &Process) -> Vec<Process> {
    match p {
        Process::Par { left, right } => {
            let mut v = par_components(left);
            v.extend(par_components(right));
            v
        }
        Process::Nil => Vec::new(),
        other => vec![other.clone()],
    }
}

fn par_of(components: Vec<Process>) -> Process {
    components
        .into_iter()
        .reduce(Process::par)
        .unwrap_or(Process::Nil)
}

/// Images of pattern variables; a variable may be bound to itself.
type Images = BTreeMap<Name, Message>;

/// `σ₁ ↔_h σ₂` over `vars`, reading unbound variables as themselves.
fn equiv_images(s1: &Images, s2: &Images, vars: &BTreeSet<Name>, h: &BiTrace) -> bool {
    let known = h.free_names().names;
    let know = EquivKnowledge::new(&h.underlying_theory());
    let image = |s: &Images, x: &Name| s.get(x).cloned().unwrap_or_else(|| Message::Name(x.clone()));
    vars.iter().all(|x| {
        let (u, v) = (image(s1, x), image(s2, x));
        (&u, &v).free_names().names.is_subset(&known) && know.entails(&u, &v)
    })
}

/// Ways to match every pattern component against a distinct target
/// component; yields the substitution and the left-over process.
fn split_matches(pattern: &[Process], target: &[Process], vars: &BTreeSet<Name>) -> Vec<(Images, Process)> {
    let mut out = Vec::new();
    let mut used = vec![false; target.len()];
    fn go(
        pattern: &[Process],
        target: &[Process],
        vars: &BTreeSet<Name>,
        used: &mut Vec<bool>,
        sigma: &BTreeMap<Name, Message>,
        out: &mut Vec<(Images, Process)>,
    ) {
        let Some((first, rest)) = pattern.split_first() else {
            let left_over = target
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(p, _)| p.clone())
                .collect();
            out.push((sigma.clone(), par_of(left_over)));
            return;
        };
        for k in 0..target.len() {
            if used[k] {
                continue;
            }
            let mut s = sigma.clone();
            if match_process(first, &target[k], vars, &mut s, &mut Vec::new()) {
                used[k] = true;
                go(rest, target, vars, used, &s, out);
                used[k] = false;
            }
        }
    }
    go(pattern, target, vars, &mut used, &BTreeMap::new(), &mut out);
    out
}

/// One-sided matching of processes; `bound` pairs pattern binders with
/// target binders, innermost last.
fn match_process(
    pat: &Process,
    tgt: &Process,
    vars: &BTreeSet<Name>,
    sigma: &mut BTreeMap<Name, Message>,
    bound: &mut Vec<(Name, Name)>,
) -> bool {
    let msg = |a: &Message, b: &Message, sigma: &mut BTreeMap<Name, Message>, bound: &[(Name, Name)]| {
        match_term(a, b, vars, sigma, bound)
    };
    let under = |binders: Vec<(Name, Name)>,
                 p: &Process,
                 q: &Process,
                 sigma: &mut BTreeMap<Name, Message>,
                 bound: &mut Vec<(Name, Name)>| {
        let n = binders.len();
        bound.extend(binders);
        let ok = match_process(p, q, vars, sigma, bound);
        bound.truncate(bound.len() - n);
        ok
    };
    match (pat, tgt) {
        (Process::Nil, Process::Nil) => true,
        (
            Process::Output {
                chan: c1,
                msg: m1,
                cont: k1,
            },
            Process::Output {
                chan: c2,
                msg: m2,
                cont: k2,
            },
        ) => {
            msg(c1, c2, sigma, bound)
                && msg(m1, m2, sigma, bound)
                && match_process(k1, k2, vars, sigma, bound)
        }
        (
            Process::Input {
                chan: c1,
                binder: b1,
                cont: k1,
            },
            Process::Input {
                chan: c2,
                binder: b2,
                cont: k2,
            },
        ) => msg(c1, c2, sigma, bound) && under(vec![(b1.clone(), b2.clone())], k1, k2, sigma, bound),
        (Process::Par { left: l1, right: r1 }, Process::Par { left: l2, right: r2 }) => {
            match_process(l1, l2, vars, sigma, bound) && match_process(r1, r2, vars, sigma, bound)
        }
        (Process::Restrict { binder: b1, body: p1 }, Process::Restrict { binder: b2, body: p2 }) => {
            under(vec![(b1.clone(), b2.clone())], p1, p2, sigma, bound)
        }
        (Process::Bang { body: p1 }, Process::Bang { body: p2 }) => match_process(p1, p2, vars, sigma, bound),
        (
            Process::Match {
                m1: a1,
                m2: a2,
                cont: k1,
            },
            Process::Match {
                m1: b1,
                m2: b2,
                cont: k2,
            },
        ) => {
            msg(a1, b1, sigma, bound)
                && msg(a2, b2, sigma, bound)
                && match_process(k1, k2, vars, sigma, bound)
        }
        (
            Process::Let {
                b1: x1,
                b2: y1,
                src: s1,
                cont: k1,
            },
            Process::Let {
                b1: x2,
                b2: y2,
                src: s2,
                cont: k2,
            },
        ) => {
            msg(s1, s2, sigma, bound)
                && under(
                    vec![(x1.clone(), x2.clone()), (y1.clone(), y2.clone())],
                    k1,
                    k2,
                    sigma,
                    bound,
                )
        }
        (
            Process::Case {
                src: s1,
                binder: x1,
                key: e1,
                cont: k1,
            },
            Process::Case {
                src: s2,
                binder: x2,
                key: e2,
                cont: k2,
            },
        ) => {
            msg(s1, s2, sigma, bound)
                && msg(e1, e2, sigma, bound)
                && under(vec![(x1.clone(), x2.clone())], k1, k2, sigma, bound)
        }
        _ => false,
    }
}

fn match_term(
    pat: &Message,
    tgt: &Message,
    vars: &BTreeSet<Name>,
    sigma: &mut BTreeMap<Name, Message>,
    bound: &[(Name, Name)],
) -> bool {
    match (pat, tgt) {
        (Message::Name(x), _) => {
            if let Some((_, y)) = bound.iter().rev().find(|(b, _)| b == x) {
                return tgt.as_name() == Some(y);
            }
            // Free images may not mention names bound in the target.
            let captured = tgt
                .free_names()
                .names
                .iter()
                .any(|n| bound.iter().any(|(_, y)| y == n));
            if captured {
                return false;
            }
            if vars.contains(x) {
                match sigma.get(x) {
                    Some(v) => v == tgt,
                    None => {
                        sigma.insert(x.clone(), tgt.clone());
                        true
                    }
                }
            } else {
                tgt.as_name() == Some(x)
            }
        }
        (Message::Rigid(a), Message::Rigid(b)) => a == b,
        (Message::Pair(a1, a2), Message::Pair(b1, b2)) | (Message::Enc(a1, a2), Message::Enc(b1, b2)) => {
            match_term(a1, b1, vars, sigma, bound) && match_term(a2, b2, vars, sigma, bound)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_bitrace, parse_process, parse_relation};

    fn triple(h: &str, p: &str, q: &str) -> TracedTriple {
        TracedTriple::new(
            parse_bitrace(h).unwrap(),
            parse_process(p).unwrap(),
            parse_process(q).unwrap(),
        )
    }

    fn rules(tags: &str) -> CheckConfig {
        CheckConfig {
            reflexive_base: false,
            ..CheckConfig::default()
        }
        .with_rules(UpToRule::parse_list(tags).unwrap())
    }

    #[test]
    fn members_justify_themselves() {
        let t = triple("o: #a <-> #b", "out(#a,#a).0", "out(#b,#b).0");
        let r = TracedRelation::new(vec![t.clone()]);
        let j = up_to_member(&t, &r, &rules("")).unwrap();
        assert_eq!(j.to_string(), "[member]");
        let renamed = triple("o: #a <-> #b", "nu k. out(#a,k).0", "nu k. out(#b,k).0");
        let r = TracedRelation::new(vec![triple(
            "o: #a <-> #b",
            "nu n. out(#a,n).0",
            "nu m. out(#b,m).0",
        )]);
        assert!(up_to_member(&renamed, &r, &rules("")).is_some());
    }

    #[test]
    fn contraction_adds_derivable_pairs() {
        let r = TracedRelation::new(vec![triple("o: #a <-> #b", "0", "0")]);
        let t = triple("o: #a <-> #b\ni: #a <-> #b", "0", "0");
        assert!(up_to_member(&t, &r, &rules("")).is_none());
        assert_eq!(
            up_to_member(&t, &r, &rules("c")).unwrap().to_string(),
            "[contraction]"
        );
        let bad = triple("o: #a <-> #b\ni: #b <-> #b", "0", "0");
        assert!(up_to_member(&bad, &r, &rules("c")).is_none());
    }

    #[test]
    fn substitution_matches_members() {
        let r = TracedRelation::new(vec![triple(
            "o: #a <-> #a\ni: x <-> x",
            "out(#a,x).0",
            "out(#a,x).0",
        )]);
        let t = triple("o: #a <-> #a\ni: #a <-> #a", "out(#a,#a).0", "out(#a,#a).0");
        assert_eq!(
            up_to_member(&t, &r, &rules("s")).unwrap().to_string(),
            "[substitution]"
        );
        // #b is not derivable at the input, so the instance is not respectful.
        let t = triple("o: #a <-> #a\ni: #b <-> #b", "out(#a,#b).0", "out(#a,#b).0");
        assert!(up_to_member(&t, &r, &rules("s")).is_none());
    }

    #[test]
    fn weakening_renaming_flex_rigid() {
        let r = TracedRelation::new(vec![triple("i: x <-> x\no: x <-> x", "0", "0")]);
        let t = triple("i: x <-> x", "0", "0");
        assert_eq!(
            up_to_member(&t, &r, &rules("w")).unwrap().to_string(),
            "[weakening]"
        );

        let r = TracedRelation::new(vec![triple("o: #a <-> #b", "out(#a,#a).0", "out(#b,#b).0")]);
        let t = triple("o: #c <-> #b", "out(#c,#c).0", "out(#b,#b).0");
        assert!(up_to_member(&t, &r, &rules("")).is_none());
        assert_eq!(
            up_to_member(&t, &r, &rules("i")).unwrap().to_string(),
            "[injective-renaming]"
        );

        let r = TracedRelation::new(vec![triple("i: x <-> x", "out(x,x).0", "out(x,x).0")]);
        let t = triple("o: #c <-> #c", "out(#c,#c).0", "out(#c,#c).0");
        assert_eq!(
            up_to_member(&t, &r, &rules("f")).unwrap().to_string(),
            "[flex-rigid]"
        );
    }

    #[test]
    fn structural_restriction_parallel() {
        let r = TracedRelation::new(vec![triple("o: #a <-> #a", "out(#a,#a).0 | 0", "0 | 0")]);
        let t = triple("o: #a <-> #a", "0 | out(#a,#a).0", "0");
        assert_eq!(
            up_to_member(&t, &r, &rules("eq")).unwrap().to_string(),
            "[structural]"
        );

        let r = TracedRelation::new(vec![triple("o: #a <-> #a", "out(#a,#k).0", "out(#a,#k).0")]);
        let t = triple("o: #a <-> #a", "nu k. out(#a,k).0", "nu n. out(#a,n).0");
        assert_eq!(
            up_to_member(&t, &r, &rules("r")).unwrap().to_string(),
            "[restriction]"
        );

        let base = triple("o: #a <-> #b", "out(#a,#a).0", "out(#b,#b).0");
        let r = TracedRelation::new(vec![base]);
        let mut cfg = rules("p");
        cfg.parallel_contexts = vec![ParallelContext {
            process: parse_process("out(z,z).0").unwrap(),
            domain: vec![Name::new("z").unwrap()],
        }];
        let t = triple(
            "o: #a <-> #b",
            "out(#a,#a).0 | out(#a,#a).0",
            "out(#b,#b).0 | out(#b,#b).0",
        );
        assert_eq!(up_to_member(&t, &r, &cfg).unwrap().to_string(), "[parallel]");
    }

    #[test]
    fn worked_relation_continuations() {
        let r = parse_relation(include_str!("../../../../fixtures/leaky-receiver.rel")).unwrap();
        let direct = triple(
            "o: #a <-> #a\ni: #a <-> #a\no: enc(#a,#k) <-> enc(#a,#k)\n\
             o: enc(#m,enc(#a,#k)) <-> enc(#m,enc(#a,#k))\ni: #m <-> #m\no: #a <-> #a",
            "0",
            "0",
        );
        assert_eq!(
            up_to_member(&direct, &r, &rules("c,s")).unwrap().to_string(),
            "[member]"
        );
        let instance = triple(
            "o: #a <-> #a\ni: #a <-> #a\ni: #a <-> #a\no: enc(#a,#k) <-> enc(#a,#k)",
            "nu m. out(#a,enc(m,enc(#a,#k))).out(m,#a).0",
            "nu m. out(#a,enc(m,enc(#a,#k))).[#a = #a]out(m,#a).0",
        );
        let j = up_to_member(&instance, &r, &rules("c,s")).unwrap();
        assert_eq!(j.rules, vec![UpToRule::Substitution, UpToRule::Contraction]);
    }
}
