//! Bounded exploration of the transition graph.

use std::collections::BTreeSet;
use std::fmt;

use super::{step, Action, Agent, Process};
use crate::terms::{fresh_name, FreeNames, Message, Name, Substitution};

/// One visible or silent event of a symbolic trace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TraceEvent {
    Tau,
    /// Input on `chan`, the received value kept symbolic as `binder`.
    In {
        chan: Message,
        binder: Name,
    },
    /// Output on `chan` of `msg`, extruding `extruded`.
    Out {
        chan: Message,
        extruded: Vec<Name>,
        msg: Message,
    },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Tau => f.write_str("tau"),
            TraceEvent::In { chan, binder } => write!(f, "{chan}({binder})"),
            TraceEvent::Out { chan, extruded, msg } => {
                write!(f, "~{chan}<")?;
                if !extruded.is_empty() {
                    let ys: Vec<String> = extruded.iter().map(|y| y.to_string()).collect();
                    write!(f, "nu {}. ", ys.join(","))?;
                }
                write!(f, "{msg}>")
            }
        }
    }
}

/// Continues past a transition: inputs keep the binder as a free name and
/// outputs open their restrictions, renaming away from `used`.
fn open(agent: &Agent, used: &BTreeSet<Name>) -> (Vec<Name>, Option<Message>, Process) {
    match agent {
        Agent::Proc(p) => (Vec::new(), None, p.clone()),
        Agent::Abs { binder, body } => {
            if used.contains(binder) {
                let mut taken = used.clone();
                taken.extend(body.free_names().names);
                let fresh = fresh_name(binder, &taken);
                let body = body.apply(&Substitution::singleton(
                    binder.clone(),
                    Message::Name(fresh.clone()),
                ));
                (vec![fresh], None, body)
            } else {
                (vec![binder.clone()], None, body.clone())
            }
        }
        Agent::Concr {
            restricted,
            msg,
            cont,
        } => {
            let (ys, m, q) = super::semantics::freshen_concretion(restricted, msg, cont, used);
            (ys, Some(m), q)
        }
    }
}

/// All symbolic traces of at most `depth` events that cannot be extended
/// within the bound.
pub fn bounded_traces(p: &Process, depth: usize) -> BTreeSet<Vec<TraceEvent>> {
    let mut out = BTreeSet::new();
    let used = p.free_names().names;
    walk(p, depth, &used, &mut Vec::new(), &mut out);
    out
}

fn walk(
    p: &Process,
    depth: usize,
    used: &BTreeSet<Name>,
    prefix: &mut Vec<TraceEvent>,
    out: &mut BTreeSet<Vec<TraceEvent>>,
) {
    let moves = if depth == 0 { Vec::new() } else { step(p) };
    if moves.is_empty() {
        out.insert(prefix.clone());
        return;
    }
    for (action, agent) in moves {
        let (introduced, msg, next) = open(&agent, used);
        let event = match (action, msg) {
            (Action::Tau, _) => TraceEvent::Tau,
            (Action::In(chan), _) => TraceEvent::In {
                chan,
                binder: introduced[0].clone(),
            },
            (Action::OutBar(chan), Some(msg)) => TraceEvent::Out {
                chan,
                extruded: introduced.clone(),
                msg,
            },
            (Action::OutBar(_), None) => unreachable!("output transitions yield concretions"),
        };
        let mut used = used.clone();
        used.extend(introduced);
        prefix.push(event);
        walk(&next, depth - 1, &used, prefix, out);
        prefix.pop();
    }
}

/// Processes reachable by at most `depth` silent steps, `p` included.
pub fn reachable_states(p: &Process, depth: usize) -> Vec<Process> {
    let mut seen: BTreeSet<Process> = BTreeSet::new();
    let mut order = Vec::new();
    let mut frontier = vec![p.clone()];
    seen.insert(p.canonical());
    order.push(p.clone());
    for _ in 0..depth {
        let mut next = Vec::new();
        for q in &frontier {
            for (a, ag) in step(q) {
                if let (Action::Tau, Agent::Proc(r)) = (a, ag) {
                    if seen.insert(r.canonical()) {
                        order.push(r.clone());
                        next.push(r);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    #[test]
    fn traces_of_a_sequence() {
        let ts = bounded_traces(&p("in(a,x).out(a,x).0"), 3);
        assert_eq!(ts.len(), 1);
        let t = ts.into_iter().next().unwrap();
        let shown: Vec<String> = t.iter().map(|e| e.to_string()).collect();
        assert_eq!(shown, ["a(x)", "~a<x>"]);
    }

    #[test]
    fn repeated_binders_are_renamed() {
        let ts = bounded_traces(&p("in(a,x).in(a,x).0"), 2);
        let t = ts.into_iter().next().unwrap();
        assert_eq!(t[1].to_string(), "a(x0)");
    }

    #[test]
    fn extrusion_is_shown() {
        let ts = bounded_traces(&p("nu k. out(a,k).0"), 1);
        assert_eq!(ts.into_iter().next().unwrap()[0].to_string(), "~a<nu k. k>");
    }

    #[test]
    fn depth_bounds_replication() {
        let ts = bounded_traces(&p("!out(a,b).0"), 2);
        assert!(ts.iter().all(|t| t.len() == 2));
    }

    #[test]
    fn silent_reachability() {
        let states = reachable_states(&p("in(a,x).out(x,x).0 | out(a,b).0"), 3);
        assert_eq!(states.len(), 2);
    }
}
