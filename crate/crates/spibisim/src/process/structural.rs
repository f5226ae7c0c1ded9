//! Canonical forms for structural equivalence of replication-free processes.
//!
//! The canonical form settles top-level reductions, flattens `|` and `ν`
//! into restricted groups of prime components, drops unused restrictions and
//! sorts everything under the total order on processes. Equal canonical forms
//! imply structural equivalence; the converse is not claimed.

use std::collections::{BTreeMap, BTreeSet};

use super::{reduce, Agent, Process, ProcessError, Replacement};
use crate::terms::{FreeNames, Message, Name};

/// Permutation search is exhaustive up to this many names per group.
const MAX_PERMUTED: usize = 6;

pub fn struct_equiv(p: &Process, q: &Process) -> Result<bool, ProcessError> {
    Ok(normal_form(p)? == normal_form(q)?)
}

pub fn struct_equiv_agents(a: &Agent, b: &Agent) -> Result<bool, ProcessError> {
    Ok(agent_normal_form(a)? == agent_normal_form(b)?)
}

/// Canonical representative of the structural-equivalence class of `p`.
pub fn normal_form(p: &Process) -> Result<Process, ProcessError> {
    if p.has_replication() {
        return Err(ProcessError::ReplicationUnsupported);
    }
    Ok(canonical_unchecked(p))
}

pub fn agent_normal_form(a: &Agent) -> Result<Agent, ProcessError> {
    match a {
        Agent::Proc(p) => Ok(Agent::Proc(normal_form(p)?)),
        Agent::Abs { binder, body } => Ok(Agent::Abs {
            binder: binder.clone(),
            body: normal_form(body)?,
        }
        .canonical()),
        Agent::Concr {
            restricted,
            msg,
            cont,
        } => {
            if cont.has_replication() {
                return Err(ProcessError::ReplicationUnsupported);
            }
            let mut best: Option<Agent> = None;
            for perm in orders(restricted) {
                let r = placeholder_map(&perm, "%y");
                let cand = Agent::Concr {
                    restricted: (0..perm.len()).map(|i| Name::raw(&format!("%y{i}"))).collect(),
                    msg: r.msg(msg),
                    cont: canonical_unchecked(&cont.replace(&r)),
                };
                if best.as_ref().is_none_or(|b| cand < *b) {
                    best = Some(cand);
                }
            }
            Ok(best.expect("at least one ordering"))
        }
    }
}

fn placeholder_map(order: &[Name], prefix: &str) -> Replacement {
    Replacement {
        names: order
            .iter()
            .enumerate()
            .map(|(i, y)| (y.clone(), Message::Name(Name::raw(&format!("{prefix}{i}")))))
            .collect(),
        rigids: BTreeMap::new(),
    }
}

/// All orderings of `names` when few, otherwise just the given one.
fn orders(names: &[Name]) -> Vec<Vec<Name>> {
    if names.len() > MAX_PERMUTED {
        return vec![names.to_vec()];
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; names.len()];
    permute(names, &mut used, &mut cur, &mut out);
    out
}

fn permute(names: &[Name], used: &mut [bool], cur: &mut Vec<Name>, out: &mut Vec<Vec<Name>>) {
    if cur.len() == names.len() {
        out.push(cur.clone());
        return;
    }
    for i in 0..names.len() {
        if !used[i] {
            used[i] = true;
            cur.push(names[i].clone());
            permute(names, used, cur, out);
            cur.pop();
            used[i] = false;
        }
    }
}

fn canonical_unchecked(p: &Process) -> Process {
    let settled = settle(p);
    let mut counter = 0;
    let mut binders = Vec::new();
    let mut comps = Vec::new();
    flatten(&settled, &mut counter, &mut binders, &mut comps);
    let used: BTreeSet<Name> = comps.iter().flat_map(|c| c.free_names().names).collect();
    binders.retain(|b| used.contains(b));
    let mut items: Vec<Process> = groups(&binders, comps)
        .into_iter()
        .map(|(bs, cs)| group_form(&bs, cs).canonical())
        .collect();
    items.sort();
    items
        .into_iter()
        .reduce(Process::par)
        .unwrap_or(Process::Nil)
        .canonical()
}

/// Applies `>` at every position reachable through `|` and `ν` until none fires.
fn settle(p: &Process) -> Process {
    match p {
        Process::Par { left, right } => Process::par(settle(left), settle(right)),
        Process::Restrict { binder, body } => Process::restrict(binder.clone(), settle(body)),
        _ => match reduce(p) {
            Some(q) => settle(&q),
            None => p.clone(),
        },
    }
}

/// Pulls every top-level restriction out with a unique binder; components
/// are the remaining non-`0` prime processes.
fn flatten(p: &Process, counter: &mut usize, binders: &mut Vec<Name>, comps: &mut Vec<Process>) {
    match p {
        Process::Nil => {}
        Process::Par { left, right } => {
            flatten(left, counter, binders, comps);
            flatten(right, counter, binders, comps);
        }
        Process::Restrict { binder, body } => {
            let fresh = Name::raw(&format!("%r{counter}"));
            *counter += 1;
            let renamed = body.replace(&Replacement {
                names: [(binder.clone(), Message::Name(fresh.clone()))].into(),
                rigids: BTreeMap::new(),
            });
            binders.push(fresh);
            flatten(&renamed, counter, binders, comps);
        }
        _ => comps.push(p.clone()),
    }
}

/// Connected components of the "shares a binder" relation.
fn groups(binders: &[Name], comps: Vec<Process>) -> Vec<(Vec<Name>, Vec<Process>)> {
    let fns: Vec<BTreeSet<Name>> = comps
        .iter()
        .map(|c| {
            c.free_names()
                .names
                .into_iter()
                .filter(|n| binders.contains(n))
                .collect()
        })
        .collect();
    let mut parent: Vec<usize> = (0..comps.len()).collect();
    fn root(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            if !fns[i].is_disjoint(&fns[j]) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut by_root: BTreeMap<usize, (BTreeSet<Name>, Vec<Process>)> = BTreeMap::new();
    for (i, c) in comps.into_iter().enumerate() {
        let r = root(&mut parent, i);
        let entry = by_root.entry(r).or_default();
        entry.0.extend(fns[i].iter().cloned());
        entry.1.push(c);
    }
    by_root
        .into_values()
        .map(|(bs, cs)| (binders.iter().filter(|b| bs.contains(*b)).cloned().collect(), cs))
        .collect()
}

/// `(ν bs)(c₁ | … | cₙ)` with the binder order and component order chosen
/// to minimise the result.
fn group_form(bs: &[Name], comps: Vec<Process>) -> Process {
    let mut best: Option<Process> = None;
    for perm in orders(bs) {
        let r = placeholder_map(&perm, "%g");
        let mut cs: Vec<Process> = comps.iter().map(|c| c.replace(&r).canonical()).collect();
        cs.sort();
        let names: Vec<Name> = (0..perm.len()).map(|i| Name::raw(&format!("%g{i}"))).collect();
        let body = cs.into_iter().reduce(Process::par).unwrap_or(Process::Nil);
        let cand = Process::restrict_all(&names, body);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    best.expect("at least one ordering")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }
    fn se(a: &str, b: &str) -> bool {
        struct_equiv(&p(a), &p(b)).unwrap()
    }

    #[test]
    fn unit_and_commutativity() {
        assert!(se("out(#a,#b).0 | 0", "out(#a,#b).0"));
        assert!(se("out(#a,#b).0 | in(#a,x).0", "in(#a,y).0 | out(#a,#b).0"));
        assert!(se(
            "(0 | out(a,b).0) | out(c,d).0",
            "out(c,d).0 | (out(a,b).0 | 0)"
        ));
    }

    #[test]
    fn scope_extrusion() {
        assert!(se(
            "nu x. (out(#a,#b).0 | out(#a,x).0)",
            "out(#a,#b).0 | nu x. out(#a,x).0"
        ));
        assert!(!se(
            "nu x. (out(#a,x).0 | out(#a,x).0)",
            "nu x. out(#a,x).0 | nu x. out(#a,x).0"
        ));
        assert!(se("nu x. nu y. out(x,y).0", "nu y. nu x. out(x,y).0"));
        assert!(se("nu x. 0", "0"));
    }

    #[test]
    fn reductions_are_absorbed() {
        assert!(se("[#a = #a]out(#a,#b).0", "out(#a,#b).0"));
        assert!(se("let (x,y) = pr(#a,#b) in out(x,y).0", "out(#a,#b).0"));
    }

    #[test]
    fn distinct_processes() {
        assert!(!se("out(#a,#b).0", "out(#a,#c).0"));
        assert!(!se("out(#a,#b).(0 | 0)", "out(#a,#b).0"));
    }

    #[test]
    fn binder_symmetry_in_groups() {
        assert!(se(
            "nu x. nu y. (out(a,x).0 | out(a,y).0 | out(x,y).0)",
            "nu x. nu y. (out(a,y).0 | out(a,x).0 | out(x,y).0)"
        ));
    }

    #[test]
    fn replication_is_rejected() {
        assert_eq!(
            struct_equiv(&p("!0"), &p("0")),
            Err(ProcessError::ReplicationUnsupported)
        );
    }

    #[test]
    fn concretion_permutation() {
        let x = Name::new("x").unwrap();
        let y = Name::new("y").unwrap();
        let msg = crate::syntax::parse_message("pr(x,y)").unwrap();
        let a = Agent::Concr {
            restricted: vec![x.clone(), y.clone()],
            msg: msg.clone(),
            cont: Process::Nil,
        };
        let b = Agent::Concr {
            restricted: vec![y, x],
            msg,
            cont: Process::Nil,
        };
        assert!(struct_equiv_agents(&a, &b).unwrap());
    }
}
