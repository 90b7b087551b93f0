use std::collections::BTreeSet;

use proptest::prelude::*;
use repairbench_core::naming::{select_name, NameCandidate};

fn candidates(scored: &[(String, u32)]) -> Vec<NameCandidate> {
    scored
        .iter()
        .map(|(n, s)| NameCandidate {
            name: n.clone(),
            score: *s as f64,
        })
        .collect()
}

fn distinct_scored() -> impl Strategy<Value = Vec<(String, u32)>> {
    prop::collection::btree_map("[a-z]{1,6}", 0u32..1000, 1..8)
        .prop_map(|m| {
            let mut seen = BTreeSet::new();
            m.into_iter().filter(|(_, s)| seen.insert(*s)).collect::<Vec<_>>()
        })
        .prop_filter("non-empty", |v| !v.is_empty())
}

proptest! {
    #[test]
    fn choice_is_the_best_free_candidate(scored in distinct_scored(), taken in prop::collection::btree_set("[a-z]{1,6}", 0..6)) {
        let chosen = select_name(&candidates(&scored), &taken);
        let free_best = scored.iter().filter(|(n, _)| !taken.contains(n)).max_by_key(|(_, s)| *s);
        match free_best {
            Some((name, _)) => prop_assert_eq!(&chosen, name),
            None => {
                prop_assert!(!taken.contains(&chosen));
                let top = &scored.iter().max_by_key(|(_, s)| *s).unwrap().0;
                prop_assert!(chosen.starts_with(top.as_str()));
            }
        }
    }

    #[test]
    fn choice_ignores_candidate_order(scored in distinct_scored(), taken in prop::collection::btree_set("[a-z]{1,6}", 0..6), seed in any::<u64>()) {
        let mut shuffled = scored.clone();
        let len = shuffled.len();
        shuffled.rotate_left((seed as usize) % len);
        shuffled.reverse();
        prop_assert_eq!(select_name(&candidates(&scored), &taken), select_name(&candidates(&shuffled), &taken));
    }

    #[test]
    fn choice_ignores_dominated_additions(scored in distinct_scored(), extra in "[a-z]{1,6}") {
        let taken = BTreeSet::new();
        let before = select_name(&candidates(&scored), &taken);
        let mut more = scored.clone();
        let min = scored.iter().map(|(_, s)| *s).min().unwrap();
        if min > 0 && !scored.iter().any(|(n, _)| n == &extra) {
            more.push((extra, min - 1));
            prop_assert_eq!(before, select_name(&candidates(&more), &taken));
        }
    }
}
