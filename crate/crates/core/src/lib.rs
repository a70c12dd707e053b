//! Knowledge-base completeness prediction.
//!
//! The crate loads triple dumps into an indexed [`KnowledgeBase`], implements
//! the simple and parameterized completeness oracles, mines completeness rules
//! with a breadth-first refinement search, turns them into a learned oracle,
//! and uses that oracle to filter fact predictions.

pub mod engine;
pub mod error;
pub mod harness;
pub mod kb;
pub mod learned;
pub mod miner;
pub mod oracles;
pub mod predict;
pub mod rule;
pub mod synth;

pub use engine::AugmentedKb;
pub use error::{Error, Result};
pub use kb::{load_kb, load_kb_pair, Fact, KnowledgeBase, LoadOptions, LoadReport, RelationStats, Vocabulary};
pub use learned::{predict, predict_all, restrict_model, AmieOracle, Restriction, RuleModel, Verdict};
pub use miner::{mine, MiningConfig, MiningContext, Operator, OperatorSet};
pub use oracles::{
    evaluate_oracle, ClassExpr, CompletenessLabel, CompletenessOracle, GoldStandard, Label, OracleDecision,
    OracleReport, Sampling,
};
pub use predict::{
    bucket_report, filter_predictions, mine_fact_rules, predict_facts, BucketReport, FactMiningConfig,
    FilteredPrediction, Prediction,
};
pub use rule::{parse_rule, parse_rules, write_rules, Atom, Polarity, Rule, Term};
pub use synth::{generate, Scenario, SynthData, SynthSpec};
