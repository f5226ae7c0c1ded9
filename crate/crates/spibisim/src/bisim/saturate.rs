//! Manual saturation: turning a relation checked up to some rules into one
//! that needs no rules at all.

use super::check::run;
use super::{CheckConfig, TracedRelation};

/// Adds every continuation the checker justified only through up-to rules
/// as an explicit member, until nothing new appears or `max_rounds` passes.
/// The result is meant to be checked with the rules switched off.
pub fn saturate(r: &TracedRelation, cfg: &CheckConfig, max_rounds: usize) -> TracedRelation {
    let mut current = r.clone();
    for _ in 0..max_rounds {
        let mut added = Vec::new();
        run(&current, cfg, &mut |target, j| {
            if !j.is_direct() {
                added.push(target.clone());
            }
        });
        let mut grew = false;
        for t in added {
            grew |= current.insert(t);
        }
        if !grew {
            break;
        }
    }
    current
}
