//! Spi-calculus processes, agents and actions.
//!
//! Comparison of processes is up to renaming of bound names; the
//! [`Process::canonical`] form renames binders positionally so that
//! α-equivalent processes become syntactically equal.

mod explore;
mod semantics;
mod structural;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::terms::{fresh_name, FreeNames, Message, Name, NameSets, RigidName, Substitution};

pub use explore::{bounded_traces, reachable_states, TraceEvent};
pub use semantics::{compose_agent, interact, reduce, restrict_agent, step, AgentSide};
pub use structural::{agent_normal_form, normal_form, struct_equiv, struct_equiv_agents};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcessError {
    #[error("replication is not supported here")]
    ReplicationUnsupported,
    #[error("interaction needs an abstraction and a concretion")]
    NotInteractable,
}

/// A spi-calculus process.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    Output {
        chan: Message,
        msg: Message,
        cont: Arc<Process>,
    },
    Input {
        chan: Message,
        binder: Name,
        cont: Arc<Process>,
    },
    Par {
        left: Arc<Process>,
        right: Arc<Process>,
    },
    Restrict {
        binder: Name,
        body: Arc<Process>,
    },
    Bang {
        body: Arc<Process>,
    },
    Match {
        m1: Message,
        m2: Message,
        cont: Arc<Process>,
    },
    Let {
        b1: Name,
        b2: Name,
        src: Message,
        cont: Arc<Process>,
    },
    Case {
        src: Message,
        binder: Name,
        key: Message,
        cont: Arc<Process>,
    },
}

/// Target of a transition.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Agent {
    Proc(Process),
    Abs {
        binder: Name,
        body: Process,
    },
    Concr {
        restricted: Vec<Name>,
        msg: Message,
        cont: Process,
    },
}

/// Transition label: silent, input on a channel, or output on a channel.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Tau,
    In(Message),
    OutBar(Message),
}

impl Process {
    pub fn output(chan: Message, msg: Message, cont: Process) -> Self {
        Process::Output {
            chan,
            msg,
            cont: Arc::new(cont),
        }
    }

    pub fn input(chan: Message, binder: Name, cont: Process) -> Self {
        Process::Input {
            chan,
            binder,
            cont: Arc::new(cont),
        }
    }

    pub fn par(left: Process, right: Process) -> Self {
        Process::Par {
            left: Arc::new(left),
            right: Arc::new(right),
        }
    }

    pub fn restrict(binder: Name, body: Process) -> Self {
        Process::Restrict {
            binder,
            body: Arc::new(body),
        }
    }

    /// `(ν x₁)…(ν xₙ)body`, `x₁` outermost.
    pub fn restrict_all(binders: &[Name], body: Process) -> Self {
        binders
            .iter()
            .rev()
            .fold(body, |acc, x| Process::restrict(x.clone(), acc))
    }

    pub fn bang(body: Process) -> Self {
        Process::Bang { body: Arc::new(body) }
    }

    pub fn matching(m1: Message, m2: Message, cont: Process) -> Self {
        Process::Match {
            m1,
            m2,
            cont: Arc::new(cont),
        }
    }

    pub fn let_pair(b1: Name, b2: Name, src: Message, cont: Process) -> Self {
        Process::Let {
            b1,
            b2,
            src,
            cont: Arc::new(cont),
        }
    }

    pub fn case(src: Message, binder: Name, key: Message, cont: Process) -> Self {
        Process::Case {
            src,
            binder,
            key,
            cont: Arc::new(cont),
        }
    }

    pub fn has_replication(&self) -> bool {
        match self {
            Process::Nil => false,
            Process::Bang { .. } => true,
            Process::Par { left, right } => left.has_replication() || right.has_replication(),
            Process::Output { cont, .. }
            | Process::Input { cont, .. }
            | Process::Match { cont, .. }
            | Process::Let { cont, .. }
            | Process::Case { cont, .. } => cont.has_replication(),
            Process::Restrict { body, .. } => body.has_replication(),
        }
    }

    /// Capture-avoiding simultaneous substitution of names.
    pub fn apply(&self, s: &Substitution) -> Process {
        if s.is_empty() {
            return self.clone();
        }
        self.replace(&Replacement::from_subst(s))
    }

    /// Capture-avoiding replacement of rigid names by messages.
    pub fn rename_rigid(&self, map: &BTreeMap<RigidName, Message>) -> Process {
        if map.is_empty() {
            return self.clone();
        }
        self.replace(&Replacement {
            names: BTreeMap::new(),
            rigids: map.clone(),
        })
    }

    pub(crate) fn replace(&self, r: &Replacement) -> Process {
        if r.is_empty() {
            return self.clone();
        }
        match self {
            Process::Nil => Process::Nil,
            Process::Output { chan, msg, cont } => Process::output(r.msg(chan), r.msg(msg), cont.replace(r)),
            Process::Input { chan, binder, cont } => {
                let (inner, bs) = r.enter(&[binder], cont);
                Process::input(r.msg(chan), bs[0].clone(), cont.replace(&inner))
            }
            Process::Par { left, right } => Process::par(left.replace(r), right.replace(r)),
            Process::Restrict { binder, body } => {
                let (inner, bs) = r.enter(&[binder], body);
                Process::restrict(bs[0].clone(), body.replace(&inner))
            }
            Process::Bang { body } => Process::bang(body.replace(r)),
            Process::Match { m1, m2, cont } => Process::matching(r.msg(m1), r.msg(m2), cont.replace(r)),
            Process::Let { b1, b2, src, cont } => {
                let (inner, bs) = r.enter(&[b1, b2], cont);
                Process::let_pair(bs[0].clone(), bs[1].clone(), r.msg(src), cont.replace(&inner))
            }
            Process::Case {
                src,
                binder,
                key,
                cont,
            } => {
                let (inner, bs) = r.enter(&[binder], cont);
                Process::case(r.msg(src), bs[0].clone(), r.msg(key), cont.replace(&inner))
            }
        }
    }

    /// Positional renaming of every binder; α-equivalent processes map to
    /// the same term.
    pub fn canonical(&self) -> Process {
        let mut counter = 0;
        canon(self, &BTreeMap::new(), &mut counter)
    }

    pub fn alpha_eq(&self, other: &Process) -> bool {
        self == other || self.canonical() == other.canonical()
    }

    /// All names occurring anywhere, bound or free.
    pub fn all_names(&self, acc: &mut BTreeSet<Name>) {
        let msg = |m: &Message, acc: &mut BTreeSet<Name>| acc.extend(m.free_names().names);
        match self {
            Process::Nil => {}
            Process::Output { chan, msg: m, cont } => {
                msg(chan, acc);
                msg(m, acc);
                cont.all_names(acc);
            }
            Process::Input { chan, binder, cont } => {
                msg(chan, acc);
                acc.insert(binder.clone());
                cont.all_names(acc);
            }
            Process::Par { left, right } => {
                left.all_names(acc);
                right.all_names(acc);
            }
            Process::Restrict { binder, body } => {
                acc.insert(binder.clone());
                body.all_names(acc);
            }
            Process::Bang { body } => body.all_names(acc),
            Process::Match { m1, m2, cont } => {
                msg(m1, acc);
                msg(m2, acc);
                cont.all_names(acc);
            }
            Process::Let { b1, b2, src, cont } => {
                acc.insert(b1.clone());
                acc.insert(b2.clone());
                msg(src, acc);
                cont.all_names(acc);
            }
            Process::Case {
                src,
                binder,
                key,
                cont,
            } => {
                msg(src, acc);
                acc.insert(binder.clone());
                msg(key, acc);
                cont.all_names(acc);
            }
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Process::Nil => 1,
            Process::Par { left, right } => 1 + left.size() + right.size(),
            Process::Restrict { body, .. } | Process::Bang { body } => 1 + body.size(),
            Process::Output { cont, .. }
            | Process::Input { cont, .. }
            | Process::Match { cont, .. }
            | Process::Let { cont, .. }
            | Process::Case { cont, .. } => 1 + cont.size(),
        }
    }
}

fn canon_msg(m: &Message, env: &BTreeMap<Name, Name>) -> Message {
    if env.is_empty() {
        return m.clone();
    }
    m.map_atoms(&|a| match a {
        Message::Name(n) => env.get(n).map(|b| Message::Name(b.clone())),
        _ => None,
    })
}

fn canon(p: &Process, env: &BTreeMap<Name, Name>, counter: &mut usize) -> Process {
    let bind = |env: &BTreeMap<Name, Name>, x: &Name, counter: &mut usize| {
        let mut inner = env.clone();
        let fresh = Name::raw(&format!("%{counter}"));
        *counter += 1;
        inner.insert(x.clone(), fresh.clone());
        (inner, fresh)
    };
    match p {
        Process::Nil => Process::Nil,
        Process::Output { chan, msg, cont } => Process::output(
            canon_msg(chan, env),
            canon_msg(msg, env),
            canon(cont, env, counter),
        ),
        Process::Input { chan, binder, cont } => {
            let chan = canon_msg(chan, env);
            let (inner, b) = bind(env, binder, counter);
            Process::input(chan, b, canon(cont, &inner, counter))
        }
        Process::Par { left, right } => {
            let l = canon(left, env, counter);
            Process::par(l, canon(right, env, counter))
        }
        Process::Restrict { binder, body } => {
            let (inner, b) = bind(env, binder, counter);
            Process::restrict(b, canon(body, &inner, counter))
        }
        Process::Bang { body } => Process::bang(canon(body, env, counter)),
        Process::Match { m1, m2, cont } => {
            Process::matching(canon_msg(m1, env), canon_msg(m2, env), canon(cont, env, counter))
        }
        Process::Let { b1, b2, src, cont } => {
            let src = canon_msg(src, env);
            let (inner, c1) = bind(env, b1, counter);
            let (inner, c2) = bind(&inner, b2, counter);
            Process::let_pair(c1, c2, src, canon(cont, &inner, counter))
        }
        Process::Case {
            src,
            binder,
            key,
            cont,
        } => {
            let src = canon_msg(src, env);
            let key = canon_msg(key, env);
            let (inner, b) = bind(env, binder, counter);
            Process::case(src, b, key, canon(cont, &inner, counter))
        }
    }
}

/// Simultaneous replacement of names and rigid names by messages, renaming
/// binders that would capture a name of the range.
#[derive(Clone, Debug, Default)]
pub(crate) struct Replacement {
    pub names: BTreeMap<Name, Message>,
    pub rigids: BTreeMap<RigidName, Message>,
}

impl Replacement {
    pub fn from_subst(s: &Substitution) -> Self {
        Replacement {
            names: s.iter().map(|(x, m)| (x.clone(), m.clone())).collect(),
            rigids: BTreeMap::new(),
        }
    }

    fn is_empty(&self) -> bool {
        self.names.is_empty() && self.rigids.is_empty()
    }

    pub fn msg(&self, m: &Message) -> Message {
        if self.is_empty() {
            return m.clone();
        }
        m.map_atoms(&|a| match a {
            Message::Name(n) => self.names.get(n).cloned(),
            Message::Rigid(r) => self.rigids.get(r).cloned(),
            _ => None,
        })
    }

    fn range_names(&self) -> BTreeSet<Name> {
        let mut acc = NameSets::default();
        for m in self.names.values().chain(self.rigids.values()) {
            m.collect_free(&mut acc);
        }
        acc.names
    }

    /// Replacement for the scope of `binders` over `body`, with the binders
    /// to use there.
    fn enter(&self, binders: &[&Name], body: &Process) -> (Replacement, Vec<Name>) {
        let mut inner = self.clone();
        for b in binders {
            inner.names.remove(*b);
        }
        let range = inner.range_names();
        let mut avoid: BTreeSet<Name> = range.clone();
        avoid.extend(body.free_names().names);
        avoid.extend(inner.names.keys().cloned());
        avoid.extend(binders.iter().map(|b| (*b).clone()));
        let mut out: Vec<Name> = Vec::new();
        let mut renames = Vec::new();
        for b in binders {
            if range.contains(*b) {
                if let Some(pos) = binders.iter().position(|o| o == b) {
                    if pos < out.len() {
                        out.push(out[pos].clone());
                        continue;
                    }
                }
                let fresh = fresh_name(b, &avoid);
                avoid.insert(fresh.clone());
                renames.push(((*b).clone(), fresh.clone()));
                out.push(fresh);
            } else {
                out.push((*b).clone());
            }
        }
        for (b, fresh) in renames {
            inner.names.insert(b, Message::Name(fresh));
        }
        (inner, out)
    }
}

impl FreeNames for Process {
    fn collect_free(&self, acc: &mut NameSets) {
        let inner = |binders: &[&Name], p: &Process, acc: &mut NameSets| {
            let mut sub = p.free_names();
            for b in binders {
                sub.names.remove(*b);
            }
            acc.extend(&sub);
        };
        match self {
            Process::Nil => {}
            Process::Output { chan, msg, cont } => {
                chan.collect_free(acc);
                msg.collect_free(acc);
                cont.collect_free(acc);
            }
            Process::Input { chan, binder, cont } => {
                chan.collect_free(acc);
                inner(&[binder], cont, acc);
            }
            Process::Par { left, right } => {
                left.collect_free(acc);
                right.collect_free(acc);
            }
            Process::Restrict { binder, body } => inner(&[binder], body, acc),
            Process::Bang { body } => body.collect_free(acc),
            Process::Match { m1, m2, cont } => {
                m1.collect_free(acc);
                m2.collect_free(acc);
                cont.collect_free(acc);
            }
            Process::Let { b1, b2, src, cont } => {
                src.collect_free(acc);
                inner(&[b1, b2], cont, acc);
            }
            Process::Case {
                src,
                binder,
                key,
                cont,
            } => {
                src.collect_free(acc);
                key.collect_free(acc);
                inner(&[binder], cont, acc);
            }
        }
    }
}

impl FreeNames for Agent {
    fn collect_free(&self, acc: &mut NameSets) {
        match self {
            Agent::Proc(p) => p.collect_free(acc),
            Agent::Abs { binder, body } => {
                let mut sub = body.free_names();
                sub.names.remove(binder);
                acc.extend(&sub);
            }
            Agent::Concr {
                restricted,
                msg,
                cont,
            } => {
                let mut sub = msg.free_names();
                sub.extend(&cont.free_names());
                for y in restricted {
                    sub.names.remove(y);
                }
                acc.extend(&sub);
            }
        }
    }
}

impl FreeNames for Action {
    fn collect_free(&self, acc: &mut NameSets) {
        match self {
            Action::Tau => {}
            Action::In(m) | Action::OutBar(m) => m.collect_free(acc),
        }
    }
}

impl Agent {
    /// Positional renaming of binders, as for processes.
    pub fn canonical(&self) -> Agent {
        match self {
            Agent::Proc(p) => Agent::Proc(p.canonical()),
            Agent::Abs { binder, body } => {
                let p =
                    Process::input(Message::Name(Name::raw("%")), binder.clone(), body.clone()).canonical();
                match p {
                    Process::Input { binder, cont, .. } => Agent::Abs {
                        binder,
                        body: (*cont).clone(),
                    },
                    _ => unreachable!("canonical form keeps the outer constructor"),
                }
            }
            Agent::Concr {
                restricted,
                msg,
                cont,
            } => {
                let env: BTreeMap<Name, Name> = restricted
                    .iter()
                    .enumerate()
                    .map(|(i, y)| (y.clone(), Name::raw(&format!("%c{i}"))))
                    .collect();
                let r = Replacement {
                    names: env
                        .iter()
                        .map(|(k, v)| (k.clone(), Message::Name(v.clone())))
                        .collect(),
                    rigids: BTreeMap::new(),
                };
                // Restricted names are distinct, so a plain replacement is exact.
                let renamed: Vec<Name> = restricted.iter().map(|y| env[y].clone()).collect();
                Agent::Concr {
                    restricted: renamed,
                    msg: r.msg(msg),
                    cont: cont.replace(&r).canonical(),
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &Agent) -> bool {
        self == other || self.canonical() == other.canonical()
    }

    pub fn apply(&self, s: &Substitution) -> Agent {
        match self {
            Agent::Proc(p) => Agent::Proc(p.apply(s)),
            Agent::Abs { binder, body } => {
                match Process::input(Message::Name(Name::raw("%")), binder.clone(), body.clone()).apply(s) {
                    Process::Input { binder, cont, .. } => Agent::Abs {
                        binder,
                        body: (*cont).clone(),
                    },
                    _ => unreachable!("substitution keeps the outer constructor"),
                }
            }
            Agent::Concr {
                restricted,
                msg,
                cont,
            } => {
                let mut avoid = s.range_free_names().names;
                avoid.extend(s.domain().cloned());
                let (ys, m, q) = semantics::freshen_concretion(restricted, msg, cont, &avoid);
                Agent::Concr {
                    restricted: ys,
                    msg: m.apply(s),
                    cont: q.apply(s),
                }
            }
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => f.write_str("tau"),
            Action::In(m) => write!(f, "{m}"),
            Action::OutBar(m) => write!(f, "~{m}"),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Precedence-aware printing; `parse(print(p))` is α-equivalent to `p`.
impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prefix_body(p: &Process, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if matches!(p, Process::Par { .. }) {
                write!(f, "({p})")
            } else {
                write!(f, "{p}")
            }
        }
        match self {
            Process::Nil => f.write_str("0"),
            Process::Output { chan, msg, cont } => {
                write!(f, "out({chan},{msg}).")?;
                prefix_body(cont, f)
            }
            Process::Input { chan, binder, cont } => {
                write!(f, "in({chan},{binder}).")?;
                prefix_body(cont, f)
            }
            Process::Par { left, right } => {
                write!(f, "{left} | ")?;
                prefix_body(right, f)
            }
            Process::Restrict { binder, body } => {
                write!(f, "nu {binder}. ")?;
                prefix_body(body, f)
            }
            Process::Bang { body } => {
                f.write_str("!")?;
                prefix_body(body, f)
            }
            Process::Match { m1, m2, cont } => {
                write!(f, "[{m1} = {m2}]")?;
                prefix_body(cont, f)
            }
            Process::Let { b1, b2, src, cont } => {
                write!(f, "let ({b1},{b2}) = {src} in ")?;
                prefix_body(cont, f)
            }
            Process::Case {
                src,
                binder,
                key,
                cont,
            } => {
                write!(f, "case {src} of {{{binder}}}{key} in ")?;
                prefix_body(cont, f)
            }
        }
    }
}

impl fmt::Debug for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Bodies of abstractions and concretions are bracketed when parallel.
impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scoped = |p: &Process| match p {
            Process::Par { .. } => format!("({p})"),
            _ => p.to_string(),
        };
        match self {
            Agent::Proc(p) => write!(f, "{p}"),
            Agent::Abs { binder, body } => write!(f, "({binder}){}", scoped(body)),
            Agent::Concr {
                restricted,
                msg,
                cont,
            } => {
                if !restricted.is_empty() {
                    f.write_str("nu ")?;
                    for (i, y) in restricted.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{y}")?;
                    }
                    f.write_str(". ")?;
                }
                write!(f, "<{msg}>{}", scoped(cont))
            }
        }
    }
}

impl fmt::Debug for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_message, parse_process};

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }
    fn nm(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    #[test]
    fn free_names_respect_binders() {
        let fns = p("nu x. out(#a, x).0").free_names();
        assert!(fns.names.is_empty());
        assert_eq!(fns.rigids.len(), 1);
        let fns = p("in(#a, x). out(#a, pr(x, y)).0").free_names();
        assert_eq!(fns.names, [nm("y")].into());
    }

    #[test]
    fn purity() {
        assert!(p("out(a, b).0").is_pure());
        assert!(!p("out(#a, b).0").is_pure());
        assert!(p("nu x. 0").is_pure());
    }

    #[test]
    fn substitution_avoids_capture() {
        let s = Substitution::singleton(nm("y"), Message::Name(nm("x")));
        let out = p("in(#a, x). out(x, y).0").apply(&s);
        assert!(out.alpha_eq(&p("in(#a, z). out(z, x).0")));
        assert!(!out.alpha_eq(&p("in(#a, x). out(x, x).0")));
    }

    #[test]
    fn alpha_equivalence() {
        assert!(p("nu k. out(#a, k).0").alpha_eq(&p("nu j. out(#a, j).0")));
        assert!(!p("nu k. out(#a, k).0").alpha_eq(&p("nu j. out(#a, k).0")));
        assert!(p("let (x,y) = #m in out(x,y).0").alpha_eq(&p("let (u,v) = #m in out(u,v).0")));
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "0",
            "in(#a,x).out(#a,x).0",
            "nu k. out(#a,enc(x,k)).0 | 0",
            "out(a,b).(0 | 0)",
            "!in(a,x).0 | [x = #b]0",
            "let (x,y) = pr(#a,#b) in out(x,y).0",
            "case enc(#m,#k) of {x}#k in (out(x,x).0 | 0)",
            "0 | (0 | 0)",
        ] {
            let q = p(s);
            assert!(p(&q.to_string()).alpha_eq(&q), "{s}");
        }
    }

    #[test]
    fn rigid_renaming_keeps_structure() {
        let map: BTreeMap<RigidName, Message> =
            [(RigidName::new("c").unwrap(), parse_message("x").unwrap())].into();
        let out = p("in(#a, x). out(#c, x).0").rename_rigid(&map);
        assert!(out.alpha_eq(&p("in(#a, z). out(x, z).0")));
    }
}
