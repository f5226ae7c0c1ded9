//! A bounded search for observers that separate two pure processes by
//! their barbs. Finding none proves nothing.

use std::collections::BTreeSet;

use crate::process::{reachable_states, step, Action, Process};
use crate::terms::{fresh_name, FreeNames, Message, Name};

/// Hard cap on observers tried, to keep deep searches bounded in time.
const MAX_OBSERVERS: usize = 20_000;

/// An observer, a barb exactly one side can reach with it, and the
/// observer's own visible prefixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distinguisher {
    pub observer: Process,
    pub barb: Action,
    pub trace: Vec<Action>,
}

/// Tries observers made of at most `depth` prefixes: inputs on channels the
/// processes output on, outputs on channels they input on, and decryption
/// or splitting of received values. Returns the first observer, in order of
/// size, under which the weak barbs of `p | R` and `q | R` differ.
pub fn bounded_distinguisher(p: &Process, q: &Process, depth: usize) -> Option<Distinguisher> {
    let family = Family::new(p, q);
    let mut prefixes = Vec::new();
    let mut tried = 0;
    for size in 0..=depth {
        if let Some(d) = family.search(p, q, size, &mut prefixes, &mut tried) {
            return Some(d);
        }
    }
    None
}

#[derive(Debug, Clone)]
enum Prefix {
    In { chan: Message, var: Name },
    Out { chan: Message, msg: Message },
    Case { src: Name, var: Name, key: Message },
    Split { src: Name, first: Name, second: Name },
}

struct Family {
    names: Vec<Message>,
    listen_on: Vec<Message>,
    send_on: Vec<Message>,
    taken: BTreeSet<Name>,
}

impl Family {
    fn new(p: &Process, q: &Process) -> Self {
        let free = (p, q).free_names().names;
        let mut taken = BTreeSet::new();
        p.all_names(&mut taken);
        q.all_names(&mut taken);
        let extra = fresh_name(&Name::new("w").expect("valid identifier"), &taken);
        taken.insert(extra.clone());
        let mut names: Vec<Message> = free.iter().cloned().map(Message::Name).collect();
        names.push(Message::Name(extra));
        let (mut outs, mut ins) = (BTreeSet::new(), BTreeSet::new());
        channels(p, &mut outs, &mut ins);
        channels(q, &mut outs, &mut ins);
        let keep = |set: BTreeSet<Name>| {
            set.into_iter()
                .filter(|n| free.contains(n))
                .map(Message::Name)
                .collect()
        };
        Family {
            names,
            listen_on: keep(outs),
            send_on: keep(ins),
            taken,
        }
    }

    fn search(
        &self,
        p: &Process,
        q: &Process,
        size: usize,
        prefixes: &mut Vec<Prefix>,
        tried: &mut usize,
    ) -> Option<Distinguisher> {
        if prefixes.len() == size {
            *tried += 1;
            return self.judge(p, q, prefixes);
        }
        for next in self.candidates(prefixes) {
            if *tried >= MAX_OBSERVERS {
                return None;
            }
            prefixes.push(next);
            let found = self.search(p, q, size, prefixes, tried);
            prefixes.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn candidates(&self, so_far: &[Prefix]) -> Vec<Prefix> {
        let vars: Vec<Name> = so_far
            .iter()
            .flat_map(|p| match p {
                Prefix::In { var, .. } | Prefix::Case { var, .. } => vec![var.clone()],
                Prefix::Split { first, second, .. } => vec![first.clone(), second.clone()],
                Prefix::Out { .. } => vec![],
            })
            .collect();
        let mut taken = self.taken.clone();
        taken.extend(vars.iter().cloned());
        let z = Name::new("z").expect("valid identifier");
        let v1 = fresh_name(&z, &taken);
        taken.insert(v1.clone());
        let v2 = fresh_name(&z, &taken);

        let var_msgs: Vec<Message> = vars.iter().cloned().map(Message::Name).collect();
        let atoms: Vec<Message> = self.names.iter().chain(&var_msgs).cloned().collect();
        let mut messages = atoms.clone();
        for v in &var_msgs {
            for a in &atoms {
                messages.push(Message::pair(v.clone(), a.clone()));
                messages.push(Message::enc(v.clone(), a.clone()));
                if a != v {
                    messages.push(Message::pair(a.clone(), v.clone()));
                    messages.push(Message::enc(a.clone(), v.clone()));
                }
            }
        }

        let mut out = Vec::new();
        for chan in self.listen_on.iter().chain(&var_msgs) {
            out.push(Prefix::In {
                chan: chan.clone(),
                var: v1.clone(),
            });
        }
        for chan in self.send_on.iter().chain(&var_msgs) {
            for msg in &messages {
                out.push(Prefix::Out {
                    chan: chan.clone(),
                    msg: msg.clone(),
                });
            }
        }
        for src in &vars {
            for key in &atoms {
                out.push(Prefix::Case {
                    src: src.clone(),
                    var: v1.clone(),
                    key: key.clone(),
                });
            }
            out.push(Prefix::Split {
                src: src.clone(),
                first: v1.clone(),
                second: v2.clone(),
            });
        }
        out
    }

    fn judge(&self, p: &Process, q: &Process, prefixes: &[Prefix]) -> Option<Distinguisher> {
        let observer = build(prefixes);
        let left = weak_barbs(p, &observer);
        let right = weak_barbs(q, &observer);
        let barb = left.symmetric_difference(&right).next()?.clone();
        let trace = prefixes
            .iter()
            .filter_map(|p| match p {
                Prefix::In { chan, .. } => Some(Action::In(chan.clone())),
                Prefix::Out { chan, .. } => Some(Action::OutBar(chan.clone())),
                _ => None,
            })
            .collect();
        Some(Distinguisher {
            observer,
            barb,
            trace,
        })
    }
}

fn build(prefixes: &[Prefix]) -> Process {
    prefixes.iter().rev().fold(Process::Nil, |cont, p| match p {
        Prefix::In { chan, var } => Process::input(chan.clone(), var.clone(), cont),
        Prefix::Out { chan, msg } => Process::output(chan.clone(), msg.clone(), cont),
        Prefix::Case { src, var, key } => {
            Process::case(Message::Name(src.clone()), var.clone(), key.clone(), cont)
        }
        Prefix::Split { src, first, second } => {
            Process::let_pair(first.clone(), second.clone(), Message::Name(src.clone()), cont)
        }
    })
}

/// Name barbs of every state silently reachable from `p | r`.
fn weak_barbs(p: &Process, r: &Process) -> BTreeSet<Action> {
    let sys = Process::par(p.clone(), r.clone());
    let bound = if sys.has_replication() { 8 } else { sys.size() };
    let mut barbs = BTreeSet::new();
    for s in reachable_states(&sys, bound) {
        for (a, _) in step(&s) {
            if let Action::In(Message::Name(_)) | Action::OutBar(Message::Name(_)) = a {
                barbs.insert(a);
            }
        }
    }
    barbs
}

/// Free-standing channel names of output and input prefixes.
fn channels(p: &Process, outs: &mut BTreeSet<Name>, ins: &mut BTreeSet<Name>) {
    match p {
        Process::Nil => {}
        Process::Output { chan, cont, .. } => {
            if let Message::Name(n) = chan {
                outs.insert(n.clone());
            }
            channels(cont, outs, ins);
        }
        Process::Input { chan, cont, .. } => {
            if let Message::Name(n) = chan {
                ins.insert(n.clone());
            }
            channels(cont, outs, ins);
        }
        Process::Par { left, right } => {
            channels(left, outs, ins);
            channels(right, outs, ins);
        }
        Process::Restrict { body, .. } | Process::Bang { body } => channels(body, outs, ins),
        Process::Match { cont, .. } | Process::Let { cont, .. } | Process::Case { cont, .. } => {
            channels(cont, outs, ins)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_process;

    fn proc(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    #[test]
    fn immediate_barb() {
        let d = bounded_distinguisher(&proc("out(a,b).0"), &proc("0"), 1).unwrap();
        assert_eq!(d.observer, Process::Nil);
        assert_eq!(d.barb.to_string(), "~a");
        assert!(d.trace.is_empty());
    }

    #[test]
    fn encrypted_payloads_hide() {
        let p = proc("nu x. out(a, enc(b,x)).0");
        let q = proc("nu x. out(a, enc(c,x)).0");
        assert!(bounded_distinguisher(&p, &q, 3).is_none());
    }

    #[test]
    fn identical_processes() {
        let p = proc("in(a,x).out(x,a).0 | out(a,b).0");
        assert!(bounded_distinguisher(&p, &p, 2).is_none());
    }

    #[test]
    fn observer_feeds_a_name() {
        let p = proc("in(a,x).[x = b]out(c,c).0");
        let q = proc("in(a,x).0");
        let d = bounded_distinguisher(&p, &q, 1).unwrap();
        assert_eq!(d.barb.to_string(), "~c");
        assert_eq!(d.trace.len(), 1);
    }
}
