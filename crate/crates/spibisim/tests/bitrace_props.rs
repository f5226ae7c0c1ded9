mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use spibisim::bitrace::{
    bitrace_consistent_bounded, compose_bitraces, enumerate_respectful, is_respectful, BiTrace,
};
use spibisim::terms::{FreeNames, SubstitutionPair};
use spibisim::theory::{compose_theories, is_consistent};

use common::*;

fn consistent(h: &BiTrace) -> bool {
    bitrace_consistent_bounded(h, 1).is_consistent()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    #[test]
    fn identity_pair_is_respectful(h in bitrace(5)) {
        prop_assert!(is_respectful(&SubstitutionPair::identity(), &h));
    }

    #[test]
    fn respectful_pairs_compose(h in bitrace(4)) {
        for sp in enumerate_respectful(&h, 1, &BTreeSet::new()).into_iter().take(6) {
            let hs = h.apply(&sp);
            for sq in enumerate_respectful(&hs, 1, &BTreeSet::new()).into_iter().take(6) {
                prop_assert!(is_respectful(&sp.compose(&sq), &h), "{} then {} on {}", sp, sq, h);
            }
        }
    }

    #[test]
    fn respectful_instances_stay_consistent(h in bitrace(4)) {
        prop_assume!(consistent(&h));
        for sp in enumerate_respectful(&h, 1, &BTreeSet::new()) {
            prop_assert!(consistent(&h.apply(&sp)), "{} under {}", h, sp);
        }
    }

    #[test]
    fn consistency_is_prefix_closed(h in bitrace(5)) {
        prop_assume!(consistent(&h));
        for k in 0..h.len() {
            prop_assert!(consistent(&h.prefix(k)));
        }
    }

    #[test]
    fn consistent_traces_have_consistent_theories_and_balanced_names(h in bitrace(5)) {
        prop_assume!(consistent(&h));
        prop_assert!(is_consistent(&h.underlying_theory()).is_consistent());
        let names = |side: u8| -> BTreeSet<_> {
            h.project(side).iter().flat_map(|(m, _)| m.free_names().names).collect()
        };
        prop_assert_eq!(names(1), names(2));
    }

    #[test]
    fn composition_with_inverse(h in bitrace(4)) {
        prop_assume!(consistent(&h));
        let back = h.inverse();
        let composed = compose_bitraces(&h, &back).expect("middle components agree");
        prop_assert!(consistent(&composed), "{}", composed);
        if let Some(g) = compose_theories(&h.underlying_theory(), &back.underlying_theory()) {
            prop_assert_eq!(g, composed.underlying_theory());
        }
    }
}
