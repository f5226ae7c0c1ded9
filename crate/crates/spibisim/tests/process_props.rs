mod common;

use proptest::prelude::*;
use spibisim::process::{step, struct_equiv, struct_equiv_agents, Action, Agent, Process};
use spibisim::terms::FreeNames;

use common::*;

fn actions(p: &Process) -> Vec<Action> {
    let mut out: Vec<Action> = step(p).into_iter().map(|(a, _)| a).collect();
    out.sort();
    out.dedup();
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn parallel_commutation_keeps_moves(p in process(false, 4), q in process(false, 4)) {
        let (pq, qp) = (Process::par(p.clone(), q.clone()), Process::par(q, p));
        prop_assert_eq!(struct_equiv(&pq, &qp), Ok(true));
        prop_assert_eq!(actions(&pq), actions(&qp));
        let right = step(&qp);
        for (a, agent) in step(&pq) {
            let matched = right.iter().any(|(b, other)| *b == a && struct_equiv_agents(&agent, other) == Ok(true));
            prop_assert!(matched, "{} -> {}", a, agent);
        }
    }

    #[test]
    fn concretions_do_not_capture_channel_names(p in process(false, 5)) {
        for (a, agent) in step(&p) {
            if let (Action::OutBar(chan), Agent::Concr { restricted, .. }) = (&a, &agent) {
                let free = chan.free_names().names;
                prop_assert!(restricted.iter().all(|y| !free.contains(y)), "{} -> {}", a, agent);
            }
        }
    }

    #[test]
    fn pure_processes_make_pure_moves(p in process(true, 5)) {
        prop_assert!(p.is_pure());
        for (a, agent) in step(&p) {
            let pure_action = match &a {
                Action::Tau => true,
                Action::In(m) | Action::OutBar(m) => m.is_pure() && m.as_name().is_some(),
            };
            prop_assert!(pure_action && agent.is_pure(), "{} -> {}", a, agent);
        }
    }
}
