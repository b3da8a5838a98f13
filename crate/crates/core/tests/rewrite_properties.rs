use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ccg_core::gen::DerivationGen;
use ccg_core::oracle::explore_rewrites;
use ccg_core::rewrite::{contract, find_redexes, is_normal_form, normalize, standard_strategies, RewriteStrategy};
use ccg_core::{sem_equiv, Derivation, RuleConfig};

fn random(seed: u64, internal: usize) -> Derivation {
    DerivationGen::new(ChaCha8Rng::seed_from_u64(seed)).derivation(internal)
}

fn rules() -> RuleConfig {
    RuleConfig::with_max_degree(usize::MAX)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn each_contraction_drops_sigma_by_left_left_size_plus_one(seed in any::<u64>(), n in 1usize..=12) {
        let d = random(seed, n);
        for p in find_redexes(&d) {
            let a = d.at(&p).unwrap().as_node().unwrap().left.as_node().unwrap().left.internal_count();
            let after = contract(&d, &p, &rules()).unwrap();
            prop_assert_eq!(d.sigma() - after.sigma(), a + 1);
            prop_assert_eq!(after.internal_count(), d.internal_count());
        }
    }

    #[test]
    fn strategies_agree_and_respect_bounds(seed in any::<u64>(), n in 0usize..=12) {
        let d = random(seed, n);
        let mut forms = BTreeSet::new();
        for s in standard_strategies(10) {
            let r = normalize(&d, s, &rules()).unwrap();
            prop_assert!(r.steps <= n * n.saturating_sub(1) / 2);
            if s == RewriteStrategy::RootFirst {
                prop_assert!(r.steps <= n);
            }
            prop_assert!(r.sigma_trace.windows(2).all(|w| w[1] < w[0]));
            prop_assert!(is_normal_form(&r.normal_form));
            prop_assert_eq!(r.normal_form.cat(), d.cat());
            prop_assert_eq!(r.normal_form.frontier(), d.frontier());
            prop_assert!(sem_equiv(d.sem(), r.normal_form.sem(), d.cat().arity()).unwrap());
            forms.insert(r.normal_form);
        }
        prop_assert_eq!(forms.len(), 1);
    }

    #[test]
    fn every_rewrite_sequence_meets_at_one_normal_form(seed in any::<u64>(), n in 0usize..=5) {
        let d = random(seed, n);
        let e = explore_rewrites(&d, &rules()).unwrap();
        prop_assert_eq!(e.normal_forms.len(), 1);
        prop_assert!(e.max_length() <= n * n.saturating_sub(1) / 2);
    }
}
