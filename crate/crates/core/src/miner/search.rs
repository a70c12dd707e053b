use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use super::operators::{x_atom_holds, Check, Refinement};
use super::{MiningConfig, Operator};
use crate::engine::{AugmentedKb, Binding, CompiledBody};
use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, TermId};
use crate::oracles::{GoldStandard, Label};
use crate::rule::{Atom, Polarity, Rule, X};

#[derive(Debug, Clone)]
struct Labeled {
    id: Option<TermId>,
}

#[derive(Debug, Default, Clone)]
struct HeadLabels {
    complete: Vec<Labeled>,
    incomplete: Vec<Labeled>,
}

impl HeadLabels {
    fn of(&self, polarity: Polarity) -> &[Labeled] {
        match polarity {
            Polarity::Complete => &self.complete,
            Polarity::Incomplete => &self.incomplete,
        }
    }
}

/// A rule with the labeled examples (indices into the head's label lists)
/// its body covers.
#[derive(Debug, Clone)]
struct Candidate {
    rule: Rule,
    pos: Vec<u32>,
    neg: Vec<u32>,
}

/// Training labels and configuration bound to one augmented KB.
#[derive(Debug)]
pub struct MiningContext<'a> {
    aug: &'a AugmentedKb<'a>,
    config: MiningConfig,
    labels: BTreeMap<String, HeadLabels>,
    body_relations: Vec<String>,
}

impl<'a> MiningContext<'a> {
    pub fn new(aug: &'a AugmentedKb<'a>, training: &GoldStandard, config: MiningConfig) -> Result<Self> {
        config.validate()?;
        if training.is_empty() {
            return Err(Error::EmptyTraining);
        }
        let kb = aug.kb();
        let mut labels: BTreeMap<String, HeadLabels> = BTreeMap::new();
        for l in training.labels() {
            let entry = labels.entry(l.relation).or_default();
            let item = Labeled {
                id: kb.term_id(&l.entity),
            };
            match l.label {
                Label::Complete => entry.complete.push(item),
                Label::Incomplete => entry.incomplete.push(item),
            }
        }
        let mut body_relations: Vec<String> = kb
            .relation_ids()
            .filter(|&r| !kb.is_schema_relation(r))
            .map(|r| kb.relation_name(r).to_string())
            .collect();
        body_relations.sort();
        Ok(MiningContext {
            aug,
            config,
            labels,
            body_relations,
        })
    }

    pub fn aug(&self) -> &'a AugmentedKb<'a> {
        self.aug
    }

    pub fn config(&self) -> &MiningConfig {
        &self.config
    }

    pub(super) fn body_relations(&self) -> impl Iterator<Item = &str> {
        self.body_relations.iter().map(String::as_str)
    }

    /// Relations with at least one training label, sorted.
    pub fn head_relations(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }

    fn examples(&self, relation: &str, polarity: Polarity) -> &[Labeled] {
        self.labels.get(relation).map_or(&[], |l| l.of(polarity))
    }

    fn body_matches(&self, body: &[Atom], examples: &[Labeled], within: impl Iterator<Item = u32>) -> Vec<u32> {
        let compiled = CompiledBody::compile(self.aug, body);
        if compiled.is_unsatisfiable() {
            return Vec::new();
        }
        within
            .filter(|&i| match examples[i as usize].id {
                Some(e) => {
                    let mut b = Binding::default();
                    b.set(X, e);
                    compiled.satisfiable(self.aug, &mut b)
                }
                None => self.aug.body_holds_unknown(body),
            })
            .collect()
    }

    fn matches(&self, rule: &Rule, polarity: Polarity) -> Vec<u32> {
        let Some((_, relation)) = rule.completeness_head() else {
            return Vec::new();
        };
        let examples = self.examples(relation, polarity);
        self.body_matches(&rule.body, examples, 0..examples.len() as u32)
    }

    /// Distinct `?x` satisfying body and head.
    pub fn support(&self, rule: &Rule) -> usize {
        match rule.completeness_head() {
            Some((polarity, _)) => self.matches(rule, polarity).len(),
            None => 0,
        }
    }

    /// Support of the same body with the opposite head polarity.
    pub fn counter_support(&self, rule: &Rule) -> usize {
        match rule.completeness_head() {
            Some((polarity, _)) => self.matches(rule, polarity.opposite()).len(),
            None => 0,
        }
    }

    /// `None` when the body matches no labeled example at all.
    pub fn confidence(&self, rule: &Rule) -> Option<f64> {
        ratio(self.support(rule), self.counter_support(rule))
    }

    /// Fills in support and confidence (0 when undefined).
    pub fn measure(&self, rule: &mut Rule) {
        rule.support = self.support(rule);
        rule.confidence = self.confidence(rule).unwrap_or(0.0);
    }

    fn matched_ids(&self, rule: &Rule) -> Vec<Option<TermId>> {
        let Some((polarity, relation)) = rule.completeness_head() else {
            return Vec::new();
        };
        let examples = self.examples(relation, polarity);
        self.matches(rule, polarity)
            .into_iter()
            .map(|i| examples[i as usize].id)
            .collect()
    }

    fn finish(&self, rule: &Rule, refinements: Vec<Refinement>) -> Vec<Rule> {
        refinements
            .into_iter()
            .map(|r| {
                let mut child = Rule::new(r.body, rule.head.clone());
                child.provenance = rule.provenance.clone();
                child.provenance.push(r.op);
                self.measure(&mut child);
                child
            })
            .collect()
    }

    pub fn refine_dangling(&self, rule: &Rule) -> Vec<Rule> {
        self.finish(rule, self.dangling(rule))
    }

    pub fn refine_closing(&self, rule: &Rule) -> Vec<Rule> {
        self.finish(rule, self.closing(rule))
    }

    pub fn refine_instantiated(&self, rule: &Rule) -> Vec<Rule> {
        let matched = self.matched_ids(rule);
        self.finish(rule, self.instantiated(rule, &matched))
    }

    pub fn op_add_type(&self, rule: &Rule) -> Vec<Rule> {
        self.finish(rule, self.add_type(rule))
    }

    pub fn op_specialize_type(&self, rule: &Rule) -> Vec<Rule> {
        self.finish(rule, self.specialize_type(rule))
    }

    pub fn op_add_negated_type(&self, rule: &Rule) -> Vec<Rule> {
        self.finish(rule, self.add_negated_type(rule))
    }

    pub fn op_add_cardinality(&self, rule: &Rule) -> Vec<Rule> {
        self.finish(rule, self.add_cardinality(rule))
    }

    pub fn op_tighten_cardinality(&self, rule: &Rule) -> Vec<Rule> {
        let matched = self.matched_ids(rule);
        self.finish(rule, self.tighten_cardinality(rule, &matched))
    }

    /// All one-step refinements of `rule` under the configured operators.
    pub fn refine(&self, rule: &Rule) -> Vec<Rule> {
        let matched = self.matched_ids(rule);
        self.finish(rule, self.refinements(rule, &matched))
    }

    fn expand(&self, cand: &Candidate, pos_ex: &[Labeled], neg_ex: &[Labeled]) -> Vec<Candidate> {
        let matched: Vec<Option<TermId>> = cand.pos.iter().map(|&i| pos_ex[i as usize].id).collect();
        let min_support = self.config.min_support;
        self.refinements(&cand.rule, &matched)
            .into_iter()
            .filter_map(|r| {
                let (pos, neg) = match &r.check {
                    Check::XAtom(atom) => {
                        let keep = |ex: &[Labeled], idx: &[u32]| -> Vec<u32> {
                            idx.iter()
                                .copied()
                                .filter(|&i| x_atom_holds(self.aug, atom, ex[i as usize].id))
                                .collect()
                        };
                        let pos = keep(pos_ex, &cand.pos);
                        if pos.len() < min_support {
                            return None;
                        }
                        (pos, keep(neg_ex, &cand.neg))
                    }
                    Check::Full => {
                        let pos = self.body_matches(&r.body, pos_ex, cand.pos.iter().copied());
                        if pos.len() < min_support {
                            return None;
                        }
                        let neg = self.body_matches(&r.body, neg_ex, cand.neg.iter().copied());
                        (pos, neg)
                    }
                };
                let mut rule = Rule::new(r.body, cand.rule.head.clone());
                rule.provenance = cand.rule.provenance.clone();
                rule.provenance.push(r.op);
                rule.canonicalize();
                rule.support = pos.len();
                rule.confidence = ratio(pos.len(), neg.len()).unwrap_or(0.0);
                Some(Candidate { rule, pos, neg })
            })
            .collect()
    }

    /// Breadth-first search from `⇒ polarity(?x, relation)`.
    pub fn mine_head(&self, relation: &str, polarity: Polarity) -> Vec<Rule> {
        let pos_ex = self.examples(relation, polarity);
        let neg_ex = self.examples(relation, polarity.opposite());
        if pos_ex.len() < self.config.min_support {
            return Vec::new();
        }
        let mut root = Rule::new(Vec::new(), Atom::completeness(polarity, relation));
        root.support = pos_ex.len();
        root.confidence = ratio(pos_ex.len(), neg_ex.len()).unwrap_or(0.0);
        let root = Candidate {
            rule: root,
            pos: (0..pos_ex.len() as u32).collect(),
            neg: (0..neg_ex.len() as u32).collect(),
        };

        let mut seen: HashSet<(Vec<Atom>, Atom)> = HashSet::new();
        seen.insert(root.rule.canonical_key());
        let mut frontier = vec![root];
        let mut out = Vec::new();
        while !frontier.is_empty() {
            out.extend(
                frontier
                    .iter()
                    .filter(|c| self.accepts(&c.rule))
                    .map(|c| c.rule.clone()),
            );
            let mut children: Vec<Candidate> = frontier
                .par_iter()
                .flat_map_iter(|c| self.expand(c, pos_ex, neg_ex))
                .collect();
            children.sort_by(|a, b| (&a.rule.body, &a.rule.provenance).cmp(&(&b.rule.body, &b.rule.provenance)));
            frontier = children
                .into_iter()
                .filter(|c| seen.insert((c.rule.body.clone(), c.rule.head.clone())))
                .collect();
        }
        out
    }

    fn accepts(&self, rule: &Rule) -> bool {
        rule.support >= self.config.min_support && rule.confidence + 1e-12 >= self.config.min_confidence
    }

    /// Mines every labeled relation in both polarities.
    pub fn mine(&self) -> Vec<Rule> {
        let heads: Vec<(&str, Polarity)> = self
            .head_relations()
            .flat_map(|r| [(r, Polarity::Complete), (r, Polarity::Incomplete)])
            .collect();
        let mut rules: Vec<Rule> = heads.par_iter().flat_map_iter(|&(r, p)| self.mine_head(r, p)).collect();
        sort_rules(&mut rules);
        rules
    }
}

fn ratio(support: usize, counter: usize) -> Option<f64> {
    let total = support + counter;
    (total > 0).then(|| support as f64 / total as f64)
}

/// Descending confidence, then support, then rule text.
pub fn sort_rules(rules: &mut [Rule]) {
    let mut keyed: Vec<(String, Rule)> = rules.iter().map(|r| (r.to_string(), r.clone())).collect();
    keyed.sort_by(|(ta, a), (tb, b)| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(b.support.cmp(&a.support))
            .then_with(|| ta.cmp(tb))
    });
    for (slot, (_, r)) in rules.iter_mut().zip(keyed) {
        *slot = r;
    }
}

/// Builds the augmented KB and mines all completeness rules.
pub fn mine(
    kb: &KnowledgeBase,
    old: Option<&KnowledgeBase>,
    training: &GoldStandard,
    config: &MiningConfig,
) -> Result<Vec<Rule>> {
    let aug = AugmentedKb::new(kb, old, config.popularity_percentile)?;
    let mut config = config.clone();
    if old.is_none() {
        config.operators.remove(Operator::InstantiateUnchanged);
    }
    let ctx = MiningContext::new(&aug, training, config)?;
    Ok(ctx.mine())
}
