mod support;

use std::collections::{BTreeMap, BTreeSet};

use kbc_core::kb::LoadOptions;
use kbc_core::learned::{restrict_model, Restriction};
use kbc_core::miner::{MiningContext, OperatorSet};
use kbc_core::oracles::PopularitySet;
use kbc_core::predict::{bucket_report, filter_predictions, mine_fact_rules, predict_facts, FactMiningConfig};
use kbc_core::rule::{Var, X, Y};
use kbc_core::{
    mine, Atom, AugmentedKb, CompletenessLabel, GoldStandard, KnowledgeBase, MiningConfig, Polarity, Rule, RuleModel,
    Sampling,
};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::naive::{random_case, NaiveContext, NaiveKb, RandomCase, Triple};

fn build(facts: &[Triple]) -> KnowledgeBase {
    KnowledgeBase::from_facts(facts.iter().map(|(s, r, o)| (s.as_str(), r.as_str(), o.as_str()))).unwrap()
}

fn case(seed: u64, size: usize) -> RandomCase {
    random_case(&mut ChaCha8Rng::seed_from_u64(seed), size)
}

fn gold_of(case: &RandomCase) -> GoldStandard {
    GoldStandard::from_labels(
        case.labels.iter().map(|(e, r, l)| CompletenessLabel {
            entity: e.clone(),
            relation: r.clone(),
            label: *l,
        }),
        Sampling::Uniform,
    )
    .unwrap()
}

fn config() -> MiningConfig {
    MiningConfig {
        min_support: 2,
        min_confidence: 0.0,
        popularity_percentile: 0.1,
        ..Default::default()
    }
}

fn keyed(rules: &[Rule]) -> BTreeSet<(String, usize, u64)> {
    rules
        .iter()
        .map(|r| (r.to_string(), r.support, r.confidence.to_bits()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn functionality_matches_a_scan(seed in any::<u64>(), size in 10usize..400) {
        let c = case(seed, size);
        let kb = build(&c.facts);
        let mut pairs: BTreeMap<&str, BTreeSet<(&str, &str)>> = BTreeMap::new();
        for (s, r, o) in &c.facts {
            pairs.entry(r.as_str()).or_default().insert((s.as_str(), o.as_str()));
        }
        for (r, p) in pairs {
            let subjects: BTreeSet<&str> = p.iter().map(|x| x.0).collect();
            prop_assert_eq!(kb.functionality(r).unwrap(), Ratio::new(subjects.len() as u64, p.len() as u64));
        }
    }

    #[test]
    fn dump_and_reload_preserve_facts(seed in any::<u64>(), size in 0usize..300) {
        let c = case(seed, size);
        let kb = build(&c.facts);
        let mut out = Vec::new();
        kb.write_tsv(&mut out).unwrap();
        let (back, report) = KnowledgeBase::from_reader(out.as_slice(), "dump", &LoadOptions::default()).unwrap();
        let facts = |kb: &KnowledgeBase| kb.facts().collect::<BTreeSet<_>>();
        prop_assert_eq!(facts(&kb), facts(&back));
        prop_assert_eq!(report.facts, kb.len());
    }

    #[test]
    fn class_membership_is_transitive(seed in any::<u64>(), size in 10usize..200) {
        let c = case(seed, size);
        let kb = build(&c.facts);
        let naive = NaiveKb::new(&c.facts);
        for e in naive.entities() {
            for class in ["C0", "C1", "C2", "C3", "C4"] {
                prop_assert_eq!(kb.is_instance(e, class), naive.is_instance(e, class), "{} {}", e, class);
            }
        }
    }

    #[test]
    fn popularity_matches_a_ranking(seed in any::<u64>(), size in 10usize..300, p in 0.01f64..0.5) {
        let c = case(seed, size);
        let kb = build(&c.facts);
        let set = PopularitySet::compute(&kb, p).unwrap();
        let naive = NaiveKb::new(&c.facts).popular(p);
        let got: BTreeSet<String> = kb.entities().filter(|e| set.is_popular(&kb, e)).map(String::from).collect();
        prop_assert_eq!(got, naive);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn refinements_never_raise_support(seed in any::<u64>(), size in 30usize..200) {
        let c = case(seed, size);
        let (kb, old) = (build(&c.facts), build(&c.old));
        let aug = AugmentedKb::new(&kb, Some(&old), 0.1).unwrap();
        let gold = gold_of(&c);
        let ctx = MiningContext::new(&aug, &gold, MiningConfig { min_support: 1, ..config() }).unwrap();
        let mut frontier: Vec<Rule> = ["r0", "r1"]
            .iter()
            .flat_map(|r| [Polarity::Complete, Polarity::Incomplete].map(|p| {
                let mut rule = Rule::new(Vec::new(), Atom::completeness(p, *r));
                ctx.measure(&mut rule);
                rule
            }))
            .collect();
        for _ in 0..2 {
            let mut next = Vec::new();
            for parent in &frontier {
                for child in ctx.refine(parent) {
                    prop_assert!(child.support <= parent.support, "{} -> {}", parent, child);
                    next.push(child);
                }
            }
            next.truncate(200);
            frontier = next;
        }
    }

    #[test]
    fn restricted_models_match_restricted_mining(seed in any::<u64>(), size in 30usize..250) {
        let c = case(seed, size);
        let (kb, old) = (build(&c.facts), build(&c.old));
        let gold = gold_of(&c);
        let full = RuleModel::new(mine(&kb, Some(&old), &gold, &config()).unwrap(), config()).unwrap();
        for (mode, ops) in [(Restriction::StarOnly, OperatorSet::star_only()), (Restriction::ClassOnly, OperatorSet::class_only())] {
            let restricted = restrict_model(&full, mode);
            let direct = mine(&kb, Some(&old), &gold, &MiningConfig { operators: ops, ..config() }).unwrap();
            prop_assert_eq!(keyed(&restricted.rules()), keyed(&direct));
        }
    }

    #[test]
    fn fact_rule_support_counts_head_pairs(seed in any::<u64>(), size in 30usize..300) {
        let c = case(seed, size);
        let kb = build(&c.facts);
        let naive = NaiveKb::new(&c.facts);
        let ctx = NaiveContext::new(&naive, None, 0.1);
        let rules = mine_fact_rules(&kb, &FactMiningConfig { min_support: 2, min_confidence: 0.0, ..Default::default() }).unwrap();
        for rule in &rules {
            prop_assert!(rule.is_closed());
            let Atom::Relation { relation, .. } = &rule.head else { panic!("relational head expected") };
            let support = naive
                .facts
                .iter()
                .filter(|f| &f.1 == relation)
                .filter(|f| ctx.holds_with(&rule.body, &[(X, &f.0), (Y, &f.2)]))
                .count();
            prop_assert_eq!(rule.support, support, "{}", rule);
        }
    }

    #[test]
    fn filtering_only_removes(seed in any::<u64>(), size in 30usize..300) {
        let c = case(seed, size);
        let kb = build(&c.facts);
        let rules = mine_fact_rules(&kb, &FactMiningConfig { min_support: 2, ..Default::default() }).unwrap();
        let preds = predict_facts(&kb, &rules).unwrap();
        for p in &preds {
            prop_assert!(!kb.contains(&p.fact.subject, &p.fact.relation, &p.fact.object));
            prop_assert!((0.0..=1.0).contains(&p.confidence));
        }
        let aug = AugmentedKb::new(&kb, None, 0.1).unwrap();
        let gold = gold_of(&c);
        let model = RuleModel::new(mine(&kb, None, &gold, &config()).unwrap(), config()).unwrap();
        let filtered = filter_predictions(&preds, &aug, &model);
        prop_assert_eq!(filtered.len(), preds.len());
        for (f, p) in filtered.iter().zip(&preds) {
            prop_assert_eq!(&f.prediction, p);
        }
        let report = bucket_report(&filtered, None);
        prop_assert_eq!(report.buckets.iter().map(|b| b.predictions).sum::<usize>(), preds.len());
        prop_assert_eq!(report.buckets.iter().map(|b| b.kept).sum::<usize>(), filtered.iter().filter(|f| f.kept).count());
    }
}

#[test]
fn naive_binding_helper_is_consistent() {
    let c = case(3, 100);
    let naive = NaiveKb::new(&c.facts);
    let ctx = NaiveContext::new(&naive, None, 0.1);
    let body = vec![Atom::relational(
        "r0",
        kbc_core::Term::Var(X),
        kbc_core::Term::Var(2 as Var),
    )];
    for e in naive.entities() {
        assert_eq!(ctx.body_holds(&body, e), ctx.holds_with(&body, &[(X, e)]));
    }
}
