//! Simple and parameterized completeness oracles.
//!
//! Every oracle is a pure predicate over (entity, relation) given an immutable
//! KB. None of them look at gold labels.

mod eval;
mod gold;

use std::collections::HashSet;

pub use eval::{evaluate_oracle, write_report_tsv, OracleDecision, OracleReport};
pub use gold::{CompletenessLabel, GoldStandard, Label, Sampling};

use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, TermId};

/// A Boolean guess whether the KB knows all objects of `entity` for `relation`.
pub trait CompletenessOracle: Sync {
    fn name(&self) -> String;
    fn is_complete(&self, entity: &str, relation: &str) -> bool;

    /// One decision per labeled pair of `gold`.
    fn decide(&self, gold: &GoldStandard) -> Vec<OracleDecision> {
        gold.labels()
            .map(|l| OracleDecision {
                entity: l.entity.clone(),
                relation: l.relation.clone(),
                predicted_complete: self.is_complete(&l.entity, &l.relation),
            })
            .collect()
    }
}

pub fn cwa(_entity: &str, _relation: &str) -> bool {
    true
}

pub fn pca(kb: &KnowledgeBase, entity: &str, relation: &str) -> bool {
    kb.object_count(entity, relation) > 0
}

pub fn card_k(kb: &KnowledgeBase, entity: &str, relation: &str, k: usize) -> bool {
    kb.object_count(entity, relation) >= k
}

pub fn popularity(kb: &KnowledgeBase, entity: &str, _relation: &str, percentile: f64) -> Result<bool> {
    Ok(PopularitySet::compute(kb, percentile)?.is_popular(kb, entity))
}

/// True iff the object sets in both snapshots agree. Entities unknown to the
/// old snapshot count as changed.
pub fn no_change(kb: &KnowledgeBase, old: &KnowledgeBase, entity: &str, relation: &str) -> bool {
    old.mentions(entity) && kb.objects(entity, relation) == old.objects(entity, relation)
}

pub fn star(kb: &KnowledgeBase, entity: &str, relation: &str, pattern: &[String]) -> Result<bool> {
    validate_star(relation, pattern)?;
    Ok(pattern.iter().all(|r| kb.object_count(entity, r) > 0))
}

fn validate_star(relation: &str, pattern: &[String]) -> Result<()> {
    if pattern.is_empty() {
        return Err(Error::InvalidParameter(
            "star pattern needs at least one relation".into(),
        ));
    }
    if pattern.iter().any(|r| r == relation) {
        return Err(Error::InvalidParameter(format!(
            "star pattern must not contain the queried relation `{relation}`"
        )));
    }
    Ok(())
}

/// A plain class or a `base ∧ ¬excluded` expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassExpr {
    Plain(String),
    Negated { base: String, excluded: String },
}

impl ClassExpr {
    pub fn validate(&self, kb: &KnowledgeBase) -> Result<()> {
        match self {
            ClassExpr::Plain(_) => Ok(()),
            ClassExpr::Negated { base, excluded } => {
                if excluded != base && kb.is_subclass_of(excluded, base) {
                    Ok(())
                } else {
                    Err(Error::InvalidClassExpression {
                        base: base.clone(),
                        negated: excluded.clone(),
                    })
                }
            }
        }
    }

    fn matches(&self, kb: &KnowledgeBase, entity: &str) -> bool {
        match self {
            ClassExpr::Plain(c) => kb.is_instance(entity, c),
            ClassExpr::Negated { base, excluded } => kb.is_instance(entity, base) && !kb.is_instance(entity, excluded),
        }
    }
}

impl std::fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassExpr::Plain(c) => write!(f, "{c}"),
            ClassExpr::Negated { base, excluded } => write!(f, "{base}&!{excluded}"),
        }
    }
}

pub fn class_oracle(kb: &KnowledgeBase, entity: &str, _relation: &str, expr: &ClassExpr) -> Result<bool> {
    expr.validate(kb)?;
    Ok(expr.matches(kb, entity))
}

/// The entities ranked within the top `percentile` by number of facts.
///
/// The population is [`KnowledgeBase::entities`]; the cut keeps the first
/// `ceil(percentile * N)` entities ordered by descending fact count, ties
/// broken by entity name.
#[derive(Debug, Clone)]
pub struct PopularitySet {
    percentile: f64,
    members: HashSet<TermId>,
}

impl PopularitySet {
    pub fn compute(kb: &KnowledgeBase, percentile: f64) -> Result<Self> {
        if !(percentile > 0.0 && percentile < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "popularity percentile must lie in (0, 1), got {percentile}"
            )));
        }
        let mut ranked: Vec<(usize, &str, TermId)> = kb
            .entity_ids()
            .iter()
            .map(|&e| (kb.fact_count_of(e), kb.term_name(e), e))
            .collect();
        ranked.sort_unstable_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        let cut = (percentile * ranked.len() as f64 - 1e-9).ceil().max(0.0) as usize;
        let members = ranked.into_iter().take(cut).map(|(_, _, id)| id).collect();
        Ok(PopularitySet { percentile, members })
    }

    pub fn percentile(&self) -> f64 {
        self.percentile
    }

    pub fn contains(&self, id: TermId) -> bool {
        self.members.contains(&id)
    }

    pub fn is_popular(&self, kb: &KnowledgeBase, entity: &str) -> bool {
        kb.term_id(entity).is_some_and(|id| self.contains(id))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub struct Cwa;

impl CompletenessOracle for Cwa {
    fn name(&self) -> String {
        "CWA".into()
    }
    fn is_complete(&self, entity: &str, relation: &str) -> bool {
        cwa(entity, relation)
    }
}

pub struct Pca<'a>(pub &'a KnowledgeBase);

impl CompletenessOracle for Pca<'_> {
    fn name(&self) -> String {
        "PCA".into()
    }
    fn is_complete(&self, entity: &str, relation: &str) -> bool {
        pca(self.0, entity, relation)
    }
}

pub struct Cardinality<'a> {
    pub kb: &'a KnowledgeBase,
    pub k: usize,
}

impl CompletenessOracle for Cardinality<'_> {
    fn name(&self) -> String {
        format!("card_{}", self.k)
    }
    fn is_complete(&self, entity: &str, relation: &str) -> bool {
        card_k(self.kb, entity, relation, self.k)
    }
}

pub struct Popularity<'a> {
    kb: &'a KnowledgeBase,
    set: PopularitySet,
}

impl<'a> Popularity<'a> {
    pub fn new(kb: &'a KnowledgeBase, percentile: f64) -> Result<Self> {
        Ok(Popularity {
            kb,
            set: PopularitySet::compute(kb, percentile)?,
        })
    }
}

impl CompletenessOracle for Popularity<'_> {
    fn name(&self) -> String {
        "Popularity".into()
    }
    fn is_complete(&self, entity: &str, _relation: &str) -> bool {
        self.set.is_popular(self.kb, entity)
    }
}

pub struct NoChange<'a> {
    pub kb: &'a KnowledgeBase,
    pub old: &'a KnowledgeBase,
}

impl CompletenessOracle for NoChange<'_> {
    fn name(&self) -> String {
        "No-change".into()
    }
    fn is_complete(&self, entity: &str, relation: &str) -> bool {
        no_change(self.kb, self.old, entity, relation)
    }
}

pub struct Star<'a> {
    kb: &'a KnowledgeBase,
    pattern: Vec<String>,
}

impl<'a> Star<'a> {
    pub fn new(kb: &'a KnowledgeBase, relation: &str, pattern: Vec<String>) -> Result<Self> {
        validate_star(relation, &pattern)?;
        Ok(Star { kb, pattern })
    }
}

impl CompletenessOracle for Star<'_> {
    fn name(&self) -> String {
        format!("star[{}]", self.pattern.join(","))
    }
    fn is_complete(&self, entity: &str, _relation: &str) -> bool {
        self.pattern.iter().all(|r| self.kb.object_count(entity, r) > 0)
    }
}

pub struct Class<'a> {
    kb: &'a KnowledgeBase,
    expr: ClassExpr,
}

impl<'a> Class<'a> {
    pub fn new(kb: &'a KnowledgeBase, expr: ClassExpr) -> Result<Self> {
        expr.validate(kb)?;
        Ok(Class { kb, expr })
    }
}

impl CompletenessOracle for Class<'_> {
    fn name(&self) -> String {
        format!("class[{}]", self.expr)
    }
    fn is_complete(&self, entity: &str, _relation: &str) -> bool {
        self.expr.matches(self.kb, entity)
    }
}
