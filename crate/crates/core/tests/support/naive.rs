//! Reference evaluator that works on raw triples with linear scans and no
//! indexes, plus a random case generator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use kbc_core::rule::Var;
use kbc_core::{Atom, Label, Polarity, Rule, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Triple = (String, String, String);

pub struct NaiveKb {
    pub facts: Vec<Triple>,
    by_relation: BTreeMap<String, Vec<(String, String)>>,
    by_subject: BTreeMap<(String, String), BTreeSet<String>>,
    by_object: BTreeMap<(String, String), BTreeSet<String>>,
    entities: BTreeSet<String>,
    closure: BTreeMap<String, BTreeSet<String>>,
}

impl NaiveKb {
    pub fn new(facts: &[Triple]) -> Self {
        let mut facts = facts.to_vec();
        facts.sort();
        facts.dedup();
        let mut kb = NaiveKb {
            facts,
            by_relation: BTreeMap::new(),
            by_subject: BTreeMap::new(),
            by_object: BTreeMap::new(),
            entities: BTreeSet::new(),
            closure: BTreeMap::new(),
        };
        for f in &kb.facts {
            kb.by_relation
                .entry(f.1.clone())
                .or_default()
                .push((f.0.clone(), f.2.clone()));
            kb.by_subject
                .entry((f.0.clone(), f.1.clone()))
                .or_default()
                .insert(f.2.clone());
            kb.by_object
                .entry((f.2.clone(), f.1.clone()))
                .or_default()
                .insert(f.0.clone());
        }
        kb.entities = kb.compute_entities().into_iter().map(String::from).collect();
        let classes: BTreeSet<String> = kb
            .facts
            .iter()
            .filter(|f| f.1 == "type" || f.1 == "subclassOf")
            .flat_map(|f| [f.0.clone(), f.2.clone()])
            .collect();
        kb.closure = classes.into_iter().map(|c| (c.clone(), kb.superclasses(&c))).collect();
        kb
    }

    fn pairs(&self, r: &str) -> &[(String, String)] {
        self.by_relation.get(r).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn objects(&self, s: &str, r: &str) -> BTreeSet<&str> {
        self.by_subject
            .get(&(s.to_string(), r.to_string()))
            .map(|o| o.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn subjects(&self, r: &str, o: &str) -> BTreeSet<&str> {
        self.by_object
            .get(&(o.to_string(), r.to_string()))
            .map(|s| s.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn mentions(&self, t: &str) -> bool {
        self.facts.iter().any(|f| f.0 == t || f.2 == t)
    }

    fn fact_count(&self, t: &str) -> usize {
        self.facts.iter().filter(|f| f.0 == t || f.2 == t).count()
    }

    fn is_schema(r: &str) -> bool {
        r == "type" || r == "subclassOf" || r == "domain"
    }

    pub fn entities(&self) -> BTreeSet<&str> {
        self.entities.iter().map(String::as_str).collect()
    }

    fn compute_entities(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for f in &self.facts {
            if f.1 == "subclassOf" || f.1 == "domain" {
                continue;
            }
            out.insert(f.0.as_str());
            if f.1 != "type" {
                out.insert(f.2.as_str());
            }
        }
        out
    }

    fn superclasses(&self, class: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([class.to_string()]);
        let mut todo = vec![class.to_string()];
        while let Some(c) = todo.pop() {
            for f in &self.facts {
                if f.1 == "subclassOf" && f.0 == c && seen.insert(f.2.clone()) {
                    todo.push(f.2.clone());
                }
            }
        }
        seen
    }

    pub fn is_instance(&self, e: &str, class: &str) -> bool {
        self.objects(e, "type")
            .into_iter()
            .any(|t| self.closure[t].contains(class))
    }

    pub fn popular(&self, percentile: f64) -> BTreeSet<String> {
        let mut ranked: Vec<(usize, &str)> = self.entities().into_iter().map(|e| (self.fact_count(e), e)).collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        let mut cut = 0;
        while (cut as f64) < percentile * ranked.len() as f64 - 1e-9 {
            cut += 1;
        }
        ranked.into_iter().take(cut).map(|(_, e)| e.to_string()).collect()
    }

    fn has_relation(&self, r: &str) -> bool {
        !self.pairs(r).is_empty()
    }
}

pub struct NaiveContext<'a> {
    pub kb: &'a NaiveKb,
    pub old: Option<&'a NaiveKb>,
    pub popular: BTreeSet<String>,
}

impl<'a> NaiveContext<'a> {
    pub fn new(kb: &'a NaiveKb, old: Option<&'a NaiveKb>, percentile: f64) -> Self {
        NaiveContext {
            kb,
            old,
            popular: kb.popular(percentile),
        }
    }

    fn unchanged(&self, e: &str, r: &str) -> bool {
        let Some(old) = self.old else { return false };
        !NaiveKb::is_schema(r)
            && self.kb.has_relation(r)
            && old.has_relation(r)
            && self.kb.entities.contains(e)
            && old.mentions(e)
            && self.kb.objects(e, r) == old.objects(e, r)
    }

    fn unary(&self, atom: &Atom, b: &BTreeMap<Var, &str>) -> bool {
        let v = |var: &Var| b[var];
        match atom {
            Atom::Type { var, class } => self.kb.is_instance(v(var), class),
            Atom::NoType { var, class } => !self.kb.is_instance(v(var), class),
            Atom::LessThan { var, relation, bound } => self.kb.objects(v(var), relation).len() < *bound,
            Atom::MoreThan { var, relation, bound } => self.kb.objects(v(var), relation).len() > *bound,
            Atom::IsPopular { var } => self.popular.contains(v(var)),
            Atom::HasNotChanged { var, relation } => self.unchanged(v(var), relation),
            _ => unreachable!(),
        }
    }

    /// Backtracking over relational atoms, taking next an atom with an
    /// argument already fixed when there is one.
    fn search<'s>(&'s self, rel: &[&'s Atom], rest: &[&Atom], b: &mut BTreeMap<Var, &'s str>) -> bool {
        if rel.is_empty() {
            return rest.iter().all(|a| self.unary(a, b));
        }
        let value = |t: &'s Term, b: &BTreeMap<Var, &'s str>| match t {
            Term::Const(c) => Some(c.as_str()),
            Term::Var(v) => b.get(v).copied(),
        };
        let pick = rel
            .iter()
            .position(|&a| matches!(a, Atom::Relation { subject, object, .. } if value(subject, b).is_some() || value(object, b).is_some()))
            .unwrap_or(0);
        let mut tail: Vec<&Atom> = rel.to_vec();
        let first = tail.remove(pick);
        let Atom::Relation {
            relation,
            subject,
            object,
        } = first
        else {
            unreachable!()
        };
        let candidates: Vec<(&str, &str)> = match (value(subject, b), value(object, b)) {
            (Some(s), _) => self.kb.objects(s, relation).into_iter().map(|o| (s, o)).collect(),
            (None, Some(o)) => self.kb.subjects(relation, o).into_iter().map(|s| (s, o)).collect(),
            (None, None) => self
                .kb
                .pairs(relation)
                .iter()
                .map(|(s, o)| (s.as_str(), o.as_str()))
                .collect(),
        };
        for (fs, fo) in candidates {
            let mut added = Vec::new();
            let mut ok = true;
            for (term, v) in [(subject, fs), (object, fo)] {
                match term {
                    Term::Const(c) => ok &= c == v,
                    Term::Var(var) => match b.get(var) {
                        Some(cur) => ok &= *cur == v,
                        None => {
                            b.insert(*var, v);
                            added.push(*var);
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            let found = ok && self.search(&tail, rest, b);
            for v in added {
                b.remove(&v);
            }
            if found {
                return true;
            }
        }
        false
    }

    pub fn body_holds(&self, body: &[Atom], x: &str) -> bool {
        self.holds_with(body, &[(0, x)])
    }

    /// Whether some assignment extending `fixed` satisfies `body`.
    pub fn holds_with(&self, body: &[Atom], fixed: &[(Var, &str)]) -> bool {
        let (rel, rest): (Vec<&Atom>, Vec<&Atom>) = body.iter().partition(|a| matches!(a, Atom::Relation { .. }));
        let mut b: BTreeMap<Var, &str> = fixed.iter().copied().collect();
        self.search(&rel, &rest, &mut b)
    }

    /// `(support, confidence)` of a completeness rule over `labels`.
    pub fn measure(&self, rule: &Rule, labels: &[(String, String, Label)]) -> (usize, Option<f64>) {
        let Atom::Completeness { polarity, relation, .. } = &rule.head else {
            panic!("not a completeness rule")
        };
        let (mut support, mut counter) = (0, 0);
        for (e, r, l) in labels {
            if r != relation || !self.body_holds(&rule.body, e) {
                continue;
            }
            let positive = l.is_complete() == (*polarity == Polarity::Complete);
            if positive {
                support += 1;
            } else {
                counter += 1;
            }
        }
        let total = support + counter;
        (support, (total > 0).then(|| support as f64 / total as f64))
    }
}

pub struct RandomCase {
    pub facts: Vec<Triple>,
    pub old: Vec<Triple>,
    pub labels: Vec<(String, String, Label)>,
}

fn t(s: &str, r: &str, o: &str) -> Triple {
    (s.to_string(), r.to_string(), o.to_string())
}

/// A random KB of about `size` facts over four relations and a small class
/// hierarchy, an older snapshot, and labels for `r0` and `r1`.
pub fn random_case<R: Rng>(rng: &mut R, size: usize) -> RandomCase {
    let n_entities = (size / 5).max(6);
    let entities: Vec<String> = (0..n_entities).map(|i| format!("e{i}")).collect();
    let classes = ["C0", "C1", "C2", "C3", "C4"];
    let mut facts = Vec::new();
    for i in 1..classes.len() {
        let parent = classes[rng.gen_range(0..i)];
        facts.push(t(classes[i], "subclassOf", parent));
    }
    for e in &entities {
        for _ in 0..rng.gen_range(0..=2) {
            facts.push(t(e, "type", classes.choose(rng).unwrap()));
        }
    }
    let relations = ["r0", "r1", "r2", "r3"];
    while facts.len() < size {
        let r = relations.choose(rng).unwrap();
        let s = entities.choose(rng).unwrap();
        let o = if rng.gen_bool(0.3) {
            format!("v{}", rng.gen_range(0..5))
        } else {
            entities.choose(rng).unwrap().clone()
        };
        facts.push(t(s, r, &o));
    }
    let mut old: Vec<Triple> = facts.iter().filter(|_| rng.gen_bool(0.8)).cloned().collect();
    for _ in 0..size / 20 {
        old.push(t(entities.choose(rng).unwrap(), relations.choose(rng).unwrap(), "v0"));
    }
    let mut labels = Vec::new();
    for r in ["r0", "r1"] {
        for e in entities.iter().chain([&"ghost".to_string()]) {
            if rng.gen_bool(0.6) {
                let label = if rng.gen_bool(0.5) {
                    Label::Complete
                } else {
                    Label::Incomplete
                };
                labels.push((e.clone(), r.to_string(), label));
            }
        }
    }
    RandomCase { facts, old, labels }
}
