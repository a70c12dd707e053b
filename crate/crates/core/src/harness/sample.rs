use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::oracles::{CompletenessLabel, GoldStandard, Label, Sampling};

pub const DEFAULT_SAMPLE_SIZE: usize = 200;

/// Below this fraction of subjects with an object, sampling is stratified.
pub const BIASED_THRESHOLD: f64 = 0.1;

/// Draws a labeled sample for one relation.
///
/// Uniform when at least [`BIASED_THRESHOLD`] of the population has an
/// object; otherwise half the sample comes from each stratum and the
/// population proportions are recorded for de-biasing.
pub fn sample(
    population: &GoldStandard,
    relation: &str,
    kb: &KnowledgeBase,
    size: usize,
    seed: u64,
) -> Result<GoldStandard> {
    let pop: Vec<CompletenessLabel> = population.for_relation(relation).labels().collect();
    if pop.is_empty() {
        return Err(Error::EmptyPopulation(relation.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut with, mut without): (Vec<_>, Vec<_>) = pop
        .iter()
        .cloned()
        .partition(|l| kb.object_count(&l.entity, &l.relation) > 0);
    let total = pop.len() as f64;
    let fraction = with.len() as f64 / total;

    if fraction >= BIASED_THRESHOLD {
        let mut all = pop;
        all.shuffle(&mut rng);
        all.truncate(size);
        return GoldStandard::from_labels(all, Sampling::Uniform);
    }

    let half = size / 2;
    with.shuffle(&mut rng);
    without.shuffle(&mut rng);
    with.truncate(half);
    without.truncate(size - half);
    let sampling = Sampling::Biased {
        has_object: fraction,
        no_object: 1.0 - fraction,
    };
    GoldStandard::from_labels(with.into_iter().chain(without), sampling)
}

/// Labels grouped by (relation, label), each group shuffled.
fn shuffled_groups(gold: &GoldStandard, rng: &mut ChaCha8Rng) -> Vec<Vec<CompletenessLabel>> {
    let mut groups: BTreeMap<(String, Label), Vec<CompletenessLabel>> = BTreeMap::new();
    for l in gold.labels() {
        groups.entry((l.relation.clone(), l.label)).or_default().push(l);
    }
    groups
        .into_values()
        .map(|mut g| {
            g.shuffle(rng);
            g
        })
        .collect()
}

/// Splits each (relation, label) group so that `train_fraction` of it goes
/// to the training side. Both sides keep the sampling metadata.
pub fn split_train_test(gold: &GoldStandard, train_fraction: f64, seed: u64) -> (GoldStandard, GoldStandard) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for group in shuffled_groups(gold, &mut rng) {
        let n = (group.len() as f64 * train_fraction).round() as usize;
        let mut group = group;
        test.extend(group.split_off(n.min(group.len())));
        train.extend(group);
    }
    (gold.with_labels(train), gold.with_labels(test))
}

/// `(training, validation)` pairs for k-fold cross-validation. Labels are
/// shuffled per group and dealt round-robin, so each fold sees both labels
/// whenever the group is at least `k` large.
pub fn cv_folds(gold: &GoldStandard, k: usize, seed: u64) -> Result<Vec<(GoldStandard, GoldStandard)>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<CompletenessLabel>> = vec![Vec::new(); k];
    let mut next = 0;
    for group in shuffled_groups(gold, &mut rng) {
        for l in group {
            folds[next % k].push(l);
            next += 1;
        }
    }
    Ok((0..k)
        .map(|i| {
            let train = folds
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, f)| f.iter().cloned());
            (gold.with_labels(train), gold.with_labels(folds[i].iter().cloned()))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn population(n: usize, with_objects: usize) -> (KnowledgeBase, GoldStandard) {
        let mut b = KnowledgeBase::builder();
        let mut gold = GoldStandard::default();
        for i in 0..n {
            let e = format!("e{i:05}");
            b.add(&e, "type", "Person").unwrap();
            if i < with_objects {
                b.add(&e, "r", "o").unwrap();
            }
            gold.insert(&e, "r", Label::from_bool(i % 3 == 0)).unwrap();
        }
        (b.build().unwrap(), gold)
    }

    #[test]
    fn sparse_relation_is_sampled_by_strata() {
        let (kb, pop) = population(10_000, 100);
        let s = sample(&pop, "r", &kb, 200, 7).unwrap();
        assert_eq!(s.len(), 200);
        match s.sampling() {
            Sampling::Biased { has_object, no_object } => {
                assert!((has_object - 0.01).abs() < 1e-12);
                assert!((no_object - 0.99).abs() < 1e-12);
            }
            Sampling::Uniform => panic!("expected a biased sample"),
        }
        let with = s.labels().filter(|l| kb.object_count(&l.entity, "r") > 0).count();
        assert_eq!(with, 100);
    }

    #[test]
    fn dense_relation_is_sampled_uniformly() {
        let (kb, pop) = population(1000, 500);
        let s = sample(&pop, "r", &kb, 200, 7).unwrap();
        assert_eq!(s.len(), 200);
        assert_eq!(s.sampling(), Sampling::Uniform);
        assert_eq!(s, sample(&pop, "r", &kb, 200, 7).unwrap());
        assert_ne!(s, sample(&pop, "r", &kb, 200, 8).unwrap());
    }

    #[test]
    fn small_stratum_is_taken_whole() {
        let (kb, pop) = population(1000, 20);
        let s = sample(&pop, "r", &kb, 200, 1).unwrap();
        assert_eq!(s.labels().filter(|l| kb.object_count(&l.entity, "r") > 0).count(), 20);
        assert_eq!(s.len(), 120);
    }

    #[test]
    fn empty_population_is_an_error() {
        let (kb, pop) = population(10, 5);
        assert!(sample(&pop, "other", &kb, 10, 1).is_err());
    }

    #[test]
    fn split_and_folds_partition_the_gold() {
        let (_, gold) = population(103, 0);
        let all: BTreeSet<String> = gold.labels().map(|l| l.entity).collect();
        let (train, test) = split_train_test(&gold, 0.8, 3);
        let tr: BTreeSet<String> = train.labels().map(|l| l.entity).collect();
        let te: BTreeSet<String> = test.labels().map(|l| l.entity).collect();
        assert!(tr.is_disjoint(&te));
        assert_eq!(&tr | &te, all);
        assert!(test.count(Label::Complete) > 0 && test.count(Label::Incomplete) > 0);

        let folds = cv_folds(&train, 4, 3).unwrap();
        let mut seen = BTreeSet::new();
        for (fit, val) in &folds {
            assert_eq!(fit.len() + val.len(), train.len());
            for l in val.labels() {
                assert!(seen.insert(l.entity));
            }
        }
        assert_eq!(seen, tr);
    }
}
