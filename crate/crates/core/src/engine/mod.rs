//! Rule evaluation over a KB augmented with derived `isPopular` and
//! `hasNotChanged` facts.

mod join;

use std::collections::HashSet;

pub(crate) use join::{Binding, CompiledBody};

use crate::error::Result;
use crate::kb::{KnowledgeBase, RelId, TermId};
use crate::oracles::PopularitySet;
use crate::rule::{Atom, Var};

pub const DEFAULT_POPULARITY_PERCENTILE: f64 = 0.05;

/// A KB plus the special facts the completeness atoms refer to.
#[derive(Debug, Clone)]
pub struct AugmentedKb<'a> {
    kb: &'a KnowledgeBase,
    popular: PopularitySet,
    /// `(relation, entity)` pairs whose object set matches the old snapshot.
    unchanged: Option<HashSet<(RelId, TermId)>>,
    /// Relations present in both snapshots, sorted by name.
    compared_relations: Vec<RelId>,
}

impl<'a> AugmentedKb<'a> {
    pub fn new(kb: &'a KnowledgeBase, old: Option<&KnowledgeBase>, popularity_percentile: f64) -> Result<Self> {
        let popular = PopularitySet::compute(kb, popularity_percentile)?;
        let (unchanged, compared_relations) = match old {
            Some(old) => {
                let (set, rels) = materialize_unchanged(kb, old);
                (Some(set), rels)
            }
            None => (None, Vec::new()),
        };
        Ok(AugmentedKb {
            kb,
            popular,
            unchanged,
            compared_relations,
        })
    }

    pub fn kb(&self) -> &'a KnowledgeBase {
        self.kb
    }

    pub fn has_old_snapshot(&self) -> bool {
        self.unchanged.is_some()
    }

    pub fn popular(&self) -> &PopularitySet {
        &self.popular
    }

    pub fn is_popular_id(&self, e: TermId) -> bool {
        self.popular.contains(e)
    }

    pub fn is_unchanged_id(&self, e: TermId, r: Option<RelId>) -> bool {
        match (&self.unchanged, r) {
            (Some(set), Some(r)) => set.contains(&(r, e)),
            _ => false,
        }
    }

    pub fn compared_relations(&self) -> &[RelId] {
        &self.compared_relations
    }

    /// Whether `body` holds for some assignment with `?x = entity`.
    pub fn body_holds(&self, body: &[Atom], entity: &str) -> bool {
        let Some(e) = self.kb.term_id(entity) else {
            // Unknown entities can still satisfy atoms such as lessThan or notype.
            return self.body_holds_unknown(body);
        };
        let compiled = CompiledBody::compile(self, body);
        let mut binding = Binding::default();
        binding.set(crate::rule::X, e);
        compiled.satisfiable(self, &mut binding)
    }

    pub(crate) fn body_holds_unknown(&self, body: &[Atom]) -> bool {
        // An entity absent from the KB has no facts, types or popularity.
        body.iter().all(|a| match a {
            Atom::NoType { .. } => true,
            Atom::LessThan { bound, .. } => *bound > 0,
            _ => false,
        }) && body.iter().all(|a| a.vars().all(|v: Var| v == crate::rule::X))
    }
}

fn materialize_unchanged(kb: &KnowledgeBase, old: &KnowledgeBase) -> (HashSet<(RelId, TermId)>, Vec<RelId>) {
    let mut relations: Vec<RelId> = kb
        .relation_ids()
        .filter(|&r| !kb.is_schema_relation(r))
        .filter(|&r| old.relation_id(kb.relation_name(r)).is_some())
        .collect();
    relations.sort_by(|a, b| kb.relation_name(*a).cmp(kb.relation_name(*b)));

    let mut out = HashSet::new();
    for &e in kb.entity_ids() {
        let name = kb.term_name(e);
        let Some(old_e) = old.term_id(name) else { continue };
        if old.fact_count_of(old_e) == 0 {
            continue;
        }
        for &r in &relations {
            let old_r = old.relation_id(kb.relation_name(r)).expect("filtered above");
            let new_objs = kb.objects_of(e, r);
            let old_objs = old.objects_of(old_e, old_r);
            if new_objs.len() != old_objs.len() {
                continue;
            }
            let mut a: Vec<&str> = new_objs.iter().map(|&o| kb.term_name(o)).collect();
            let mut b: Vec<&str> = old_objs.iter().map(|&o| old.term_name(o)).collect();
            a.sort_unstable();
            b.sort_unstable();
            if a == b {
                out.insert((r, e));
            }
        }
    }
    (out, relations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::no_change;

    #[test]
    fn unchanged_matches_no_change_oracle() {
        let old = KnowledgeBase::from_facts([
            ("e", "citizenOf", "fr"),
            ("f", "citizenOf", "fr"),
            ("h", "livesIn", "x"),
        ])
        .unwrap();
        let new = KnowledgeBase::from_facts([
            ("e", "citizenOf", "fr"),
            ("f", "citizenOf", "fr"),
            ("f", "citizenOf", "de"),
            ("g", "citizenOf", "it"),
            ("h", "livesIn", "x"),
        ])
        .unwrap();
        let aug = AugmentedKb::new(&new, Some(&old), 0.5).unwrap();
        let r = new.relation_id("citizenOf");
        for e in ["e", "f", "g", "h"] {
            let id = new.term_id(e).unwrap();
            assert_eq!(aug.is_unchanged_id(id, r), no_change(&new, &old, e, "citizenOf"), "{e}");
        }
    }
}
