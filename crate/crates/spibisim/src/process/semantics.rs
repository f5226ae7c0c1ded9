//! Reduction, one-step transitions, agent composition and interaction.

use std::collections::{BTreeMap, BTreeSet};

use super::{Action, Agent, Process, ProcessError, Replacement};
use crate::terms::{fresh_name, FreeNames, Message, Name, Substitution};

/// Where the agent sits in a composition with a process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentSide {
    /// `A | R`
    Left,
    /// `R | A`
    Right,
}

/// One top-level application of `>`.
pub fn reduce(p: &Process) -> Option<Process> {
    match p {
        Process::Bang { body } => Some(Process::par((**body).clone(), p.clone())),
        Process::Match { m1, m2, cont } if m1 == m2 => Some((**cont).clone()),
        Process::Let {
            b1,
            b2,
            src: Message::Pair(m, n),
            cont,
        } => {
            // Sequential substitution P[M/x][N/y]: when x = y the second wins.
            let mut s = Substitution::identity();
            s.bind(b1.clone(), (**m).clone());
            s.bind(b2.clone(), (**n).clone());
            Some(cont.apply(&s))
        }
        Process::Case {
            src: Message::Enc(m, k),
            binder,
            key,
            cont,
        } if **k == *key => Some(cont.apply(&Substitution::singleton(binder.clone(), (**m).clone()))),
        _ => None,
    }
}

/// Every one-step transition, deduplicated up to α-equivalence and sorted
/// by action, then canonical agent.
pub fn step(p: &Process) -> Vec<(Action, Agent)> {
    let mut raw = Vec::new();
    transitions(p, &mut raw);
    let mut keyed: BTreeMap<(Action, Agent), Agent> = BTreeMap::new();
    for (a, ag) in raw {
        keyed.entry((a, ag.canonical())).or_insert(ag);
    }
    keyed.into_iter().map(|((a, _), ag)| (a, ag)).collect()
}

fn transitions(p: &Process, out: &mut Vec<(Action, Agent)>) {
    match p {
        Process::Nil => {}
        Process::Output { chan, msg, cont } => out.push((
            Action::OutBar(chan.clone()),
            Agent::Concr {
                restricted: Vec::new(),
                msg: msg.clone(),
                cont: (**cont).clone(),
            },
        )),
        Process::Input { chan, binder, cont } => out.push((
            Action::In(chan.clone()),
            Agent::Abs {
                binder: binder.clone(),
                body: (**cont).clone(),
            },
        )),
        Process::Par { left, right } => {
            let mut lt = Vec::new();
            let mut rt = Vec::new();
            transitions(left, &mut lt);
            transitions(right, &mut rt);
            for (la, lag) in &lt {
                for (ra, rag) in &rt {
                    let comm = match (la, ra) {
                        (Action::In(m), Action::OutBar(n)) | (Action::OutBar(m), Action::In(n)) => m == n,
                        _ => false,
                    };
                    if comm {
                        let q = interact(lag, rag).expect("abstraction meets concretion");
                        out.push((Action::Tau, Agent::Proc(q)));
                    }
                }
            }
            for (a, ag) in lt {
                out.push((a, compose_agent(right, &ag, AgentSide::Left)));
            }
            for (a, ag) in rt {
                out.push((a, compose_agent(left, &ag, AgentSide::Right)));
            }
        }
        Process::Restrict { binder, body } => {
            let mut inner = Vec::new();
            transitions(body, &mut inner);
            for (a, ag) in inner {
                if !a.free_names().names.contains(binder) {
                    out.push((a, restrict_agent(binder, &ag)));
                }
            }
        }
        Process::Bang { body } => {
            // One unfolding per step: the `!P` copy contributes no moves here.
            let mut inner = Vec::new();
            transitions(body, &mut inner);
            for (a, ag) in inner {
                out.push((a, compose_agent(p, &ag, AgentSide::Left)));
            }
        }
        Process::Match { .. } | Process::Let { .. } | Process::Case { .. } => {
            if let Some(q) = reduce(p) {
                transitions(&q, out);
            }
        }
    }
}

fn rename_name(p: &Process, from: &Name, to: &Name) -> Process {
    p.apply(&Substitution::singleton(from.clone(), Message::Name(to.clone())))
}

/// Renames restricted names of a concretion that occur in `avoid`.
pub(crate) fn freshen_concretion(
    ys: &[Name],
    msg: &Message,
    cont: &Process,
    avoid: &BTreeSet<Name>,
) -> (Vec<Name>, Message, Process) {
    if ys.iter().all(|y| !avoid.contains(y)) {
        return (ys.to_vec(), msg.clone(), cont.clone());
    }
    let mut taken = avoid.clone();
    taken.extend(ys.iter().cloned());
    taken.extend(msg.free_names().names);
    taken.extend(cont.free_names().names);
    let mut r = Replacement::default();
    let mut renamed = Vec::with_capacity(ys.len());
    for y in ys {
        if avoid.contains(y) {
            let fresh = fresh_name(y, &taken);
            taken.insert(fresh.clone());
            r.names.insert(y.clone(), Message::Name(fresh.clone()));
            renamed.push(fresh);
        } else {
            renamed.push(y.clone());
        }
    }
    (renamed, r.msg(msg), cont.replace(&r))
}

/// `A | R` or `R | A`, α-renaming the agent's binders away from `fn(R)`.
pub fn compose_agent(r: &Process, a: &Agent, side: AgentSide) -> Agent {
    let join = |x: Process| match side {
        AgentSide::Left => Process::par(x, r.clone()),
        AgentSide::Right => Process::par(r.clone(), x),
    };
    let fr = r.free_names().names;
    match a {
        Agent::Proc(p) => Agent::Proc(join(p.clone())),
        Agent::Abs { binder, body } => {
            if fr.contains(binder) {
                let mut taken = fr.clone();
                taken.extend(body.free_names().names);
                let fresh = fresh_name(binder, &taken);
                Agent::Abs {
                    binder: fresh.clone(),
                    body: join(rename_name(body, binder, &fresh)),
                }
            } else {
                Agent::Abs {
                    binder: binder.clone(),
                    body: join(body.clone()),
                }
            }
        }
        Agent::Concr {
            restricted,
            msg,
            cont,
        } => {
            let (ys, m, q) = freshen_concretion(restricted, msg, cont, &fr);
            Agent::Concr {
                restricted: ys,
                msg: m,
                cont: join(q),
            }
        }
    }
}

/// `(ν x)A`.
pub fn restrict_agent(x: &Name, a: &Agent) -> Agent {
    match a {
        Agent::Proc(p) => Agent::Proc(Process::restrict(x.clone(), p.clone())),
        Agent::Abs { binder, body } => {
            if binder == x {
                let mut taken = body.free_names().names;
                taken.insert(x.clone());
                let fresh = fresh_name(binder, &taken);
                let body = rename_name(body, binder, &fresh);
                Agent::Abs {
                    binder: fresh,
                    body: Process::restrict(x.clone(), body),
                }
            } else {
                Agent::Abs {
                    binder: binder.clone(),
                    body: Process::restrict(x.clone(), body.clone()),
                }
            }
        }
        Agent::Concr {
            restricted,
            msg,
            cont,
        } => {
            if restricted.contains(x) {
                a.clone()
            } else if msg.free_names().names.contains(x) {
                let mut ys = vec![x.clone()];
                ys.extend(restricted.iter().cloned());
                Agent::Concr {
                    restricted: ys,
                    msg: msg.clone(),
                    cont: cont.clone(),
                }
            } else {
                Agent::Concr {
                    restricted: restricted.clone(),
                    msg: msg.clone(),
                    cont: Process::restrict(x.clone(), cont.clone()),
                }
            }
        }
    }
}

/// `F @ C` when `first` is the abstraction, `C @ F` when it is the
/// concretion.
pub fn interact(first: &Agent, second: &Agent) -> Result<Process, ProcessError> {
    let (abs, concr, abs_first) = match (first, second) {
        (Agent::Abs { .. }, Agent::Concr { .. }) => (first, second, true),
        (Agent::Concr { .. }, Agent::Abs { .. }) => (second, first, false),
        _ => return Err(ProcessError::NotInteractable),
    };
    let (
        Agent::Abs { binder, body },
        Agent::Concr {
            restricted,
            msg,
            cont,
        },
    ) = (abs, concr)
    else {
        unreachable!("matched above")
    };
    let avoid = abs.free_names().names;
    let (ys, m, q) = freshen_concretion(restricted, msg, cont, &avoid);
    let received = body.apply(&Substitution::singleton(binder.clone(), m));
    let inner = if abs_first {
        Process::par(received, q)
    } else {
        Process::par(q, received)
    };
    Ok(Process::restrict_all(&ys, inner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }
    fn nm(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    #[test]
    fn reductions() {
        assert_eq!(reduce(&p("[#a = #a]0")), Some(Process::Nil));
        assert_eq!(
            reduce(&p("let (x,y) = pr(#a,#b) in out(x,y).0")),
            Some(p("out(#a,#b).0"))
        );
        assert_eq!(
            reduce(&p("case enc(#m,#k) of {x}#k in out(x,x).0")),
            Some(p("out(#m,#m).0"))
        );
        assert_eq!(reduce(&p("case enc(#m,#k) of {x}#j in out(x,x).0")), None);
        assert_eq!(reduce(&p("[#a = #b]0")), None);
        assert_eq!(reduce(&p("!0")), Some(p("0 | !0")));
    }

    #[test]
    fn let_substitution_is_simultaneous() {
        assert_eq!(
            reduce(&p("let (x,y) = pr(y,x) in out(x,y).0")),
            Some(p("out(y,x).0"))
        );
    }

    #[test]
    fn prefix_transitions() {
        let ts = step(&p("in(#a,x).0"));
        assert_eq!(ts.len(), 1);
        assert_eq!(
            ts[0].0,
            Action::In(Message::rigid(crate::terms::RigidName::new("a").unwrap()))
        );
        assert_eq!(
            ts[0].1,
            Agent::Abs {
                binder: nm("x"),
                body: Process::Nil
            }
        );
        let ts = step(&p("out(#a,#n).0"));
        assert_eq!(ts.len(), 1);
        assert!(matches!(&ts[0].1, Agent::Concr { restricted, .. } if restricted.is_empty()));
    }

    #[test]
    fn communication_in_parallel() {
        let ts = step(&p("in(#a,x).0 | out(#a,#n).0"));
        assert_eq!(ts.len(), 3);
        assert!(ts.contains(&(Action::Tau, Agent::Proc(p("0 | 0")))));
    }

    #[test]
    fn restriction_extrudes_into_concretion() {
        let ts = step(&p("nu k. out(#a, k).0"));
        assert_eq!(ts.len(), 1);
        let Agent::Concr {
            restricted,
            msg,
            cont,
        } = &ts[0].1
        else {
            panic!("concretion")
        };
        assert_eq!(restricted, &vec![nm("k")]);
        assert_eq!(msg, &Message::Name(nm("k")));
        assert_eq!(cont, &Process::Nil);
    }

    #[test]
    fn restriction_blocks_private_channel() {
        assert!(step(&p("nu a. out(a, #n).0")).is_empty());
        assert_eq!(step(&p("nu a. (out(a, #n).0 | in(a,x).0)")).len(), 1);
    }

    #[test]
    fn interactions() {
        let f = Agent::Abs {
            binder: nm("x"),
            body: p("out(x,x).0"),
        };
        let c = Agent::Concr {
            restricted: vec![],
            msg: p_msg("#n"),
            cont: Process::Nil,
        };
        assert_eq!(interact(&f, &c).unwrap(), p("out(#n,#n).0 | 0"));
        assert_eq!(interact(&c, &f).unwrap(), p("0 | out(#n,#n).0"));
        let f = Agent::Abs {
            binder: nm("x"),
            body: Process::Nil,
        };
        let c = Agent::Concr {
            restricted: vec![nm("k")],
            msg: p_msg("k"),
            cont: Process::Nil,
        };
        assert_eq!(interact(&f, &c).unwrap(), p("nu k. (0 | 0)"));
        // A restricted name clashing with the abstraction is renamed.
        let f = Agent::Abs {
            binder: nm("x"),
            body: p("out(k,x).0"),
        };
        let out = interact(&f, &c).unwrap();
        assert!(out.alpha_eq(&p("nu j. (out(k,j).0 | 0)")));
        assert!(interact(&f, &f).is_err());
    }

    #[test]
    fn composition_renames_binders() {
        let r = p("out(x,#a).0");
        let a = Agent::Abs {
            binder: nm("x"),
            body: p("out(x,x).0"),
        };
        let composed = compose_agent(&r, &a, AgentSide::Right);
        assert_eq!(
            composed,
            Agent::Abs {
                binder: nm("x0"),
                body: p("out(x,#a).0 | out(x0,x0).0")
            }
        );
    }

    #[test]
    fn bang_unfolds_once() {
        let ts = step(&p("!out(#a,#b).0"));
        assert_eq!(ts.len(), 1);
        let ts = step(&p("!in(#a,x).0 | out(#a,#b).0"));
        assert!(ts.iter().any(|(a, _)| *a == Action::Tau));
    }

    fn p_msg(s: &str) -> Message {
        crate::syntax::parse_message(s).unwrap()
    }
}
