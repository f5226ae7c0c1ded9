mod common;

use proptest::prelude::*;
use spibisim::terms::{FreeNames, Substitution};

use common::*;

proptest! {
    #[test]
    fn identity_substitution_is_neutral(m in message(3)) {
        prop_assert_eq!(m.apply(&Substitution::identity()), m);
    }

    #[test]
    fn composition_law(m in message(3), t in substitution(2), s in substitution(2)) {
        prop_assert_eq!(m.apply(&t.compose(&s)), m.apply(&t).apply(&s));
    }

    #[test]
    fn restricting_to_domain_is_neutral(s in substitution(2)) {
        let dom = s.domain().cloned().collect();
        prop_assert_eq!(s.restrict(&dom), s);
    }

    #[test]
    fn rigid_free_ranges_add_no_rigids(m in message(3), s in substitution(2)) {
        prop_assume!(s.range_free_names().rigids.is_empty());
        let before = m.free_names().rigids;
        prop_assert!(m.apply(&s).free_names().rigids.is_subset(&before));
    }
}
