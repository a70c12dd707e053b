//! Fixtures shared by the benchmarks.

use kbc_core::{GoldStandard, KnowledgeBase, Scenario, SynthData};

pub fn dataset(scenario: Scenario, entities: usize) -> SynthData {
    scenario.generate(entities, 42).expect("built-in scenarios are valid")
}

/// The observed KB serialized as TSV, for load benchmarks.
pub fn tsv(kb: &KnowledgeBase) -> Vec<u8> {
    let mut out = Vec::new();
    kb.write_tsv(&mut out).expect("writing to memory");
    out
}

pub fn labels_for(data: &SynthData, relation: &str) -> GoldStandard {
    data.gold.for_relation(relation)
}
