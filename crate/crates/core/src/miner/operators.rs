use std::collections::BTreeMap;

use super::search::MiningContext;
use super::Operator;
use crate::engine::AugmentedKb;
use crate::kb::TermId;
use crate::rule::{Atom, Rule, Term, Var, X};

/// How a refined body's matches follow from its parent's.
#[derive(Debug, Clone)]
pub(super) enum Check {
    /// The new body holds iff the parent body holds and this `?x` atom holds.
    XAtom(Atom),
    /// A relational atom was added; the body must be re-joined.
    Full,
}

#[derive(Debug, Clone)]
pub(super) struct Refinement {
    pub body: Vec<Atom>,
    pub op: Operator,
    pub check: Check,
}

impl Refinement {
    fn added(rule: &Rule, atom: Atom, op: Operator) -> Self {
        let mut body = rule.body.clone();
        let check = match atom {
            Atom::Relation { .. } => Check::Full,
            _ => Check::XAtom(atom.clone()),
        };
        body.push(atom);
        Refinement { body, op, check }
    }

    fn replaced(rule: &Rule, index: usize, atom: Atom, op: Operator) -> Self {
        let mut body = rule.body.clone();
        body[index] = atom.clone();
        Refinement {
            body,
            op,
            check: Check::XAtom(atom),
        }
    }
}

/// Evaluates a special atom whose only variable is bound to `e`.
/// `None` stands for an entity the KB has never seen.
pub(super) fn x_atom_holds(aug: &AugmentedKb<'_>, atom: &Atom, e: Option<TermId>) -> bool {
    let kb = aug.kb();
    let Some(e) = e else {
        return match atom {
            Atom::NoType { .. } => true,
            Atom::LessThan { bound, .. } => *bound > 0,
            _ => false,
        };
    };
    let count = |relation: &str| kb.relation_id(relation).map_or(0, |r| kb.objects_of(e, r).len());
    match atom {
        Atom::Type { class, .. } => kb.term_id(class).is_some_and(|c| kb.is_instance_id(e, c)),
        Atom::NoType { class, .. } => kb.term_id(class).is_none_or(|c| !kb.is_instance_id(e, c)),
        Atom::LessThan { relation, bound, .. } => count(relation) < *bound,
        Atom::MoreThan { relation, bound, .. } => count(relation) > *bound,
        Atom::IsPopular { .. } => aug.is_popular_id(e),
        Atom::HasNotChanged { relation, .. } => aug.is_unchanged_id(e, kb.relation_id(relation)),
        Atom::Relation { .. } | Atom::Completeness { .. } => false,
    }
}

fn type_classes(rule: &Rule) -> impl Iterator<Item = (usize, &str)> {
    rule.body.iter().enumerate().filter_map(|(i, a)| match a {
        Atom::Type { var: X, class } => Some((i, class.as_str())),
        _ => None,
    })
}

fn has_notype(rule: &Rule, class: &str) -> bool {
    rule.body
        .iter()
        .any(|a| matches!(a, Atom::NoType { var: X, class: c } if c == class))
}

fn has_cardinality(rule: &Rule, relation: &str) -> bool {
    rule.body.iter().any(|a| match a {
        Atom::LessThan {
            var: X, relation: r, ..
        }
        | Atom::MoreThan {
            var: X, relation: r, ..
        } => r == relation,
        _ => false,
    })
}

fn relational_count(rule: &Rule) -> usize {
    rule.body.iter().filter(|a| matches!(a, Atom::Relation { .. })).count()
}

fn var_atom(relation: &str, s: Var, o: Var) -> Atom {
    Atom::relational(relation, Term::Var(s), Term::Var(o))
}

impl MiningContext<'_> {
    fn head_relation<'r>(&self, rule: &'r Rule) -> &'r str {
        rule.head.relation().unwrap_or_default()
    }

    fn can_grow(&self, rule: &Rule) -> bool {
        rule.body.len() < self.config().max_body_atoms
    }

    fn can_add_relational(&self, rule: &Rule) -> bool {
        self.can_grow(rule) && relational_count(rule) < self.config().star_size
    }

    /// An atom `r(v, w)` where `w` occurs nowhere else already says what
    /// `r(v, fresh)` would.
    fn dangling_is_redundant(rule: &Rule, relation: &str, v: Var, subject_side: bool) -> bool {
        rule.body.iter().any(|a| match a {
            Atom::Relation {
                relation: r,
                subject: Term::Var(s),
                object: Term::Var(o),
            } if r == relation => {
                let (join, other) = if subject_side { (*s, *o) } else { (*o, *s) };
                join == v && other != v && rule.occurrences(other) == 1
            }
            _ => false,
        })
    }

    pub(super) fn dangling(&self, rule: &Rule) -> Vec<Refinement> {
        if !self.can_add_relational(rule) {
            return Vec::new();
        }
        let head = self.head_relation(rule);
        let fresh = rule.next_var();
        let vars = rule.all_vars();
        let mut out = Vec::new();
        for relation in self.body_relations() {
            if relation == head {
                continue;
            }
            for &v in &vars {
                if !Self::dangling_is_redundant(rule, relation, v, true) {
                    out.push(Refinement::added(
                        rule,
                        var_atom(relation, v, fresh),
                        Operator::Dangling,
                    ));
                }
                if !Self::dangling_is_redundant(rule, relation, v, false) {
                    out.push(Refinement::added(
                        rule,
                        var_atom(relation, fresh, v),
                        Operator::Dangling,
                    ));
                }
            }
        }
        out
    }

    pub(super) fn closing(&self, rule: &Rule) -> Vec<Refinement> {
        if !self.can_add_relational(rule) {
            return Vec::new();
        }
        let head = self.head_relation(rule);
        let vars = rule.all_vars();
        let mut out = Vec::new();
        for relation in self.body_relations() {
            if relation == head {
                continue;
            }
            for &a in &vars {
                for &b in &vars {
                    if a == b {
                        continue;
                    }
                    let atom = var_atom(relation, a, b);
                    if !rule.body.contains(&atom) {
                        out.push(Refinement::added(rule, atom, Operator::Closing));
                    }
                }
            }
        }
        out
    }

    /// `type`, `notype`, `isPopular` and `hasNotChanged` atoms on `?x`.
    /// Type constants come from the classes of the currently matched
    /// examples so that only supported instantiations are tried.
    pub(super) fn instantiated(&self, rule: &Rule, matched: &[Option<TermId>]) -> Vec<Refinement> {
        if !self.can_grow(rule) {
            return Vec::new();
        }
        let ops = &self.config().operators;
        let aug = self.aug();
        let kb = aug.kb();
        let head = self.head_relation(rule);
        let mut out = Vec::new();

        if ops.contains(Operator::InstantiateType) {
            let existing: Vec<TermId> = type_classes(rule).filter_map(|(_, c)| kb.term_id(c)).collect();
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for e in matched.iter().flatten() {
                for c in kb.classes_of(*e) {
                    *counts.entry(kb.term_name(c)).or_default() += 1;
                }
            }
            for (class, n) in counts {
                if n < self.config().min_support {
                    continue;
                }
                let c = kb.term_id(class).expect("class names come from the KB");
                if existing
                    .iter()
                    .any(|&t| kb.is_subclass_id(t, c) || kb.is_subclass_id(c, t))
                {
                    continue;
                }
                let atom = Atom::Type {
                    var: X,
                    class: class.to_string(),
                };
                out.push(Refinement::added(rule, atom, Operator::InstantiateType));
            }
            // notype only narrows an existing type atom.
            for (_, base) in type_classes(rule) {
                let Some(base) = kb.term_id(base) else { continue };
                for sub in kb.descendants_of(base) {
                    let name = kb.term_name(sub);
                    if sub == base || has_notype(rule, name) {
                        continue;
                    }
                    let excluded = matched.iter().flatten().filter(|&&e| kb.is_instance_id(e, sub)).count();
                    if excluded == 0 {
                        continue;
                    }
                    let atom = Atom::NoType {
                        var: X,
                        class: name.to_string(),
                    };
                    out.push(Refinement::added(rule, atom, Operator::InstantiateType));
                }
            }
        }

        if ops.contains(Operator::InstantiatePopular) && !rule.body.iter().any(|a| matches!(a, Atom::IsPopular { .. }))
        {
            out.push(Refinement::added(
                rule,
                Atom::IsPopular { var: X },
                Operator::InstantiatePopular,
            ));
        }

        if ops.contains(Operator::InstantiateUnchanged) && aug.has_old_snapshot() {
            for &r in aug.compared_relations() {
                let name = kb.relation_name(r);
                if name == head {
                    continue;
                }
                let atom = Atom::HasNotChanged {
                    var: X,
                    relation: name.to_string(),
                };
                if !rule.body.contains(&atom) {
                    out.push(Refinement::added(rule, atom, Operator::InstantiateUnchanged));
                }
            }
        }
        out
    }

    pub(super) fn add_type(&self, rule: &Rule) -> Vec<Refinement> {
        if !self.can_grow(rule) || type_classes(rule).next().is_some() {
            return Vec::new();
        }
        let Some(domain) = self.aug().kb().domain_of(self.head_relation(rule)) else {
            return Vec::new();
        };
        let atom = Atom::Type {
            var: X,
            class: domain.to_string(),
        };
        vec![Refinement::added(rule, atom, Operator::AddType)]
    }

    pub(super) fn specialize_type(&self, rule: &Rule) -> Vec<Refinement> {
        let kb = self.aug().kb();
        let mut out = Vec::new();
        for (i, class) in type_classes(rule) {
            for sub in kb.direct_subclasses(class) {
                if type_classes(rule).any(|(_, c)| c == sub) {
                    continue;
                }
                let atom = Atom::Type {
                    var: X,
                    class: sub.to_string(),
                };
                out.push(Refinement::replaced(rule, i, atom, Operator::SpecializeType));
            }
        }
        out
    }

    pub(super) fn add_negated_type(&self, rule: &Rule) -> Vec<Refinement> {
        if !self.can_grow(rule) {
            return Vec::new();
        }
        let kb = self.aug().kb();
        let mut out = Vec::new();
        for (_, class) in type_classes(rule) {
            for sub in kb.direct_subclasses(class) {
                if has_notype(rule, sub) {
                    continue;
                }
                let atom = Atom::NoType {
                    var: X,
                    class: sub.to_string(),
                };
                out.push(Refinement::added(rule, atom, Operator::AddNegatedType));
            }
        }
        out
    }

    pub(super) fn add_cardinality(&self, rule: &Rule) -> Vec<Refinement> {
        let head = self.head_relation(rule);
        if !self.can_grow(rule) || has_cardinality(rule, head) {
            return Vec::new();
        }
        let kb = self.aug().kb();
        let kmax = kb.relation_id(head).map_or(0, |r| kb.max_objects(r));
        if kmax == 0 {
            return Vec::new();
        }
        let more = Atom::MoreThan {
            var: X,
            relation: head.to_string(),
            bound: 0,
        };
        let less = Atom::LessThan {
            var: X,
            relation: head.to_string(),
            bound: kmax,
        };
        vec![
            Refinement::added(rule, more, Operator::AddCardinality),
            Refinement::added(rule, less, Operator::AddCardinality),
        ]
    }

    /// Moves each cardinality bound to the nearest value that lowers support.
    /// `matched` are the examples the rule currently covers.
    pub(super) fn tighten_cardinality(&self, rule: &Rule, matched: &[Option<TermId>]) -> Vec<Refinement> {
        let kb = self.aug().kb();
        let kmax = |relation: &str| kb.relation_id(relation).map_or(0, |r| kb.max_objects(r));
        let counts = |relation: &str| -> Vec<usize> {
            let r = kb.relation_id(relation);
            matched
                .iter()
                .map(|e| match (e, r) {
                    (Some(e), Some(r)) => kb.objects_of(*e, r).len(),
                    _ => 0,
                })
                .collect()
        };
        let support = matched.len();
        let mut out = Vec::new();
        for (i, atom) in rule.body.iter().enumerate() {
            match atom {
                Atom::LessThan { var, relation, bound } => {
                    let counts = counts(relation);
                    let tightened = (1..*bound)
                        .rev()
                        .find(|&k| counts.iter().filter(|&&n| n < k).count() < support);
                    if let Some(k) = tightened {
                        let atom = Atom::LessThan {
                            var: *var,
                            relation: relation.clone(),
                            bound: k,
                        };
                        out.push(Refinement::replaced(rule, i, atom, Operator::TightenCardinality));
                    }
                }
                Atom::MoreThan { var, relation, bound } => {
                    let counts = counts(relation);
                    let top = kmax(relation);
                    let tightened = (*bound + 1..top).find(|&k| counts.iter().filter(|&&n| n > k).count() < support);
                    if let Some(k) = tightened {
                        let atom = Atom::MoreThan {
                            var: *var,
                            relation: relation.clone(),
                            bound: k,
                        };
                        out.push(Refinement::replaced(rule, i, atom, Operator::TightenCardinality));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Every refinement the enabled operators produce for `rule`.
    pub(super) fn refinements(&self, rule: &Rule, matched: &[Option<TermId>]) -> Vec<Refinement> {
        let ops = &self.config().operators;
        let mut out = Vec::new();
        if ops.contains(Operator::Dangling) {
            out.extend(self.dangling(rule));
        }
        if ops.contains(Operator::Closing) {
            out.extend(self.closing(rule));
        }
        out.extend(self.instantiated(rule, matched));
        if ops.contains(Operator::AddType) {
            out.extend(self.add_type(rule));
        }
        if ops.contains(Operator::SpecializeType) {
            out.extend(self.specialize_type(rule));
        }
        if ops.contains(Operator::AddNegatedType) {
            out.extend(self.add_negated_type(rule));
        }
        if ops.contains(Operator::AddCardinality) {
            out.extend(self.add_cardinality(rule));
        }
        if ops.contains(Operator::TightenCardinality) {
            out.extend(self.tighten_cardinality(rule, matched));
        }
        out
    }
}
