//! Immutable in-memory knowledge base.
//!
//! Facts are interned into [`TermId`]/[`RelId`] handles and indexed three ways:
//! by (relation, subject), by (relation, object) and by relation. The
//! `type`/`subclassOf`/`domain` relations are additionally compiled into a
//! class hierarchy with a precomputed ancestor closure.

mod intern;
mod load;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::Ratio;

pub use intern::{RelId, TermId};
pub use load::{load_kb, load_kb_pair, LoadOptions, LoadReport};

use crate::error::{Error, Result};
use intern::Interner;

/// One `relation(subject, object)` triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl Fact {
    pub fn new(subject: impl Into<String>, relation: impl Into<String>, object: impl Into<String>) -> Self {
        Fact {
            subject: subject.into(),
            relation: relation.into(),
            object: object.into(),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.relation, self.subject, self.object)
    }
}

/// Names of the relations that carry schema information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub type_relation: String,
    pub subclass_relation: String,
    pub domain_relation: String,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary {
            type_relation: "type".into(),
            subclass_relation: "subclassOf".into(),
            domain_relation: "domain".into(),
        }
    }
}

/// Per-relation counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationStats {
    pub relation: String,
    pub distinct_subjects: usize,
    pub pair_count: usize,
    pub max_objects_per_subject: usize,
}

impl RelationStats {
    pub fn functionality(&self) -> Ratio<u64> {
        Ratio::new(self.distinct_subjects as u64, self.pair_count as u64)
    }
}

#[derive(Debug, Default, Clone)]
struct RelationIndex {
    /// Sorted, unique (subject, object) pairs.
    pairs: Vec<(TermId, TermId)>,
    /// Sorted, unique subjects.
    subjects: Vec<TermId>,
    by_subject: HashMap<TermId, Vec<TermId>>,
    by_object: HashMap<TermId, Vec<TermId>>,
    max_objects: usize,
}

#[derive(Debug, Default, Clone)]
struct Schema {
    type_rel: Option<RelId>,
    subclass_rel: Option<RelId>,
    domain_rel: Option<RelId>,
    /// class -> sorted reflexive-transitive superclasses
    ancestors: HashMap<TermId, Vec<TermId>>,
    domains: HashMap<RelId, TermId>,
}

/// Accumulates facts before building an immutable [`KnowledgeBase`].
#[derive(Debug, Default)]
pub struct KbBuilder {
    vocabulary: Vocabulary,
    inverted: BTreeSet<String>,
    terms: Interner,
    relations: Interner,
    triples: Vec<(RelId, TermId, TermId)>,
    declared_domains: Vec<(String, String)>,
}

impl KbBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vocabulary(vocabulary: Vocabulary) -> Self {
        KbBuilder {
            vocabulary,
            ..Self::default()
        }
    }

    /// Swap subject and object of every subsequently added fact of `relation`.
    pub fn invert(&mut self, relation: impl Into<String>) -> &mut Self {
        self.inverted.insert(relation.into());
        self
    }

    pub fn declare_domain(&mut self, relation: impl Into<String>, class: impl Into<String>) -> &mut Self {
        self.declared_domains.push((relation.into(), class.into()));
        self
    }

    pub fn add(&mut self, subject: &str, relation: &str, object: &str) -> Result<&mut Self> {
        if subject.is_empty() || relation.is_empty() || object.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "fact ({subject:?}, {relation:?}, {object:?}) has an empty field"
            )));
        }
        let (s, o) = if self.inverted.contains(relation) {
            (object, subject)
        } else {
            (subject, object)
        };
        let r = RelId(self.relations.intern(relation));
        let s = TermId(self.terms.intern(s));
        let o = TermId(self.terms.intern(o));
        self.triples.push((r, s, o));
        Ok(self)
    }

    pub fn add_fact(&mut self, fact: &Fact) -> Result<&mut Self> {
        self.add(&fact.subject, &fact.relation, &fact.object)
    }

    pub fn build(self) -> Result<KnowledgeBase> {
        let KbBuilder {
            vocabulary,
            inverted: _,
            mut terms,
            mut relations,
            mut triples,
            declared_domains,
        } = self;

        triples.sort_unstable();
        triples.dedup();

        let mut per_relation = vec![RelationIndex::default(); relations.len()];
        for &(r, s, o) in &triples {
            per_relation[r.index()].pairs.push((s, o));
        }
        for index in &mut per_relation {
            index.pairs.sort_unstable();
            for &(s, o) in &index.pairs {
                index.by_subject.entry(s).or_default().push(o);
                index.by_object.entry(o).or_default().push(s);
            }
            for objs in index.by_subject.values_mut() {
                objs.sort_unstable();
            }
            for subs in index.by_object.values_mut() {
                subs.sort_unstable();
            }
            index.subjects = index.by_subject.keys().copied().collect();
            index.subjects.sort_unstable();
            index.max_objects = index.by_subject.values().map(Vec::len).max().unwrap_or(0);
        }

        let lookup = |name: &str| relations.get(name).map(RelId);
        let type_rel = lookup(&vocabulary.type_relation);
        let subclass_rel = lookup(&vocabulary.subclass_relation);
        let domain_rel = lookup(&vocabulary.domain_relation);

        // Declared domains get interned even when the class has no instances.
        let mut domains = HashMap::new();
        if let Some(d) = domain_rel {
            for &(s, o) in &per_relation[d.index()].pairs {
                let rel = RelId(relations.intern(terms.resolve(s.0)));
                domains.insert(rel, o);
            }
        }
        for (rel, class) in &declared_domains {
            let rel = RelId(relations.intern(rel));
            let class = TermId(terms.intern(class));
            domains.insert(rel, class);
        }
        per_relation.resize_with(relations.len(), RelationIndex::default);

        let ancestors = match subclass_rel {
            Some(sc) => class_closure(
                &per_relation[sc.index()],
                type_rel.map(|t| &per_relation[t.index()]),
                &terms,
            )?,
            None => HashMap::new(),
        };

        let mut fact_counts: HashMap<TermId, usize> = HashMap::new();
        let mut entities: BTreeSet<TermId> = BTreeSet::new();
        for &(r, s, o) in &triples {
            *fact_counts.entry(s).or_default() += 1;
            if o != s {
                *fact_counts.entry(o).or_default() += 1;
            }
            if Some(r) == subclass_rel || Some(r) == domain_rel {
                continue;
            }
            entities.insert(s);
            if Some(r) != type_rel {
                entities.insert(o);
            }
        }

        Ok(KnowledgeBase {
            vocabulary,
            terms,
            relations,
            triples,
            per_relation,
            schema: Schema {
                type_rel,
                subclass_rel,
                domain_rel,
                ancestors,
                domains,
            },
            fact_counts,
            entities: entities.into_iter().collect(),
        })
    }
}

/// Reflexive-transitive superclass closure for every class mentioned in the
/// hierarchy or as the object of a type assertion. Rejects cycles.
fn class_closure(
    subclass: &RelationIndex,
    types: Option<&RelationIndex>,
    terms: &Interner,
) -> Result<HashMap<TermId, Vec<TermId>>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }

    fn visit(
        class: TermId,
        subclass: &RelationIndex,
        marks: &mut HashMap<TermId, Mark>,
        out: &mut HashMap<TermId, Vec<TermId>>,
        terms: &Interner,
    ) -> Result<()> {
        match marks.get(&class) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Open) => {
                return Err(Error::SubclassCycle {
                    member: terms.resolve(class.0).to_string(),
                })
            }
            None => {}
        }
        marks.insert(class, Mark::Open);
        let mut closure = vec![class];
        if let Some(supers) = subclass.by_subject.get(&class) {
            for &sup in supers {
                visit(sup, subclass, marks, out, terms)?;
                closure.extend_from_slice(&out[&sup]);
            }
        }
        closure.sort_unstable();
        closure.dedup();
        out.insert(class, closure);
        marks.insert(class, Mark::Done);
        Ok(())
    }

    let mut marks = HashMap::new();
    let mut out = HashMap::new();
    let mut roots: Vec<TermId> = subclass.pairs.iter().flat_map(|&(s, o)| [s, o]).collect();
    if let Some(types) = types {
        roots.extend(types.by_object.keys().copied());
    }
    roots.sort_unstable();
    roots.dedup();
    for class in roots {
        visit(class, subclass, &mut marks, &mut out, terms)?;
    }
    Ok(out)
}

/// An immutable, indexed fact collection.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    vocabulary: Vocabulary,
    terms: Interner,
    relations: Interner,
    triples: Vec<(RelId, TermId, TermId)>,
    per_relation: Vec<RelationIndex>,
    schema: Schema,
    fact_counts: HashMap<TermId, usize>,
    entities: Vec<TermId>,
}

const EMPTY: &[TermId] = &[];

impl KnowledgeBase {
    pub fn builder() -> KbBuilder {
        KbBuilder::new()
    }

    pub fn from_facts<'a, I>(facts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut builder = KbBuilder::new();
        for (s, r, o) in facts {
            builder.add(s, r, o)?;
        }
        builder.build()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn facts(&self) -> impl Iterator<Item = Fact> + '_ {
        self.triples.iter().map(|&(r, s, o)| Fact {
            subject: self.term_name(s).to_string(),
            relation: self.relation_name(r).to_string(),
            object: self.term_name(o).to_string(),
        })
    }

    pub fn contains(&self, subject: &str, relation: &str, object: &str) -> bool {
        match (self.term_id(subject), self.relation_id(relation), self.term_id(object)) {
            (Some(s), Some(r), Some(o)) => self.contains_ids(s, r, o),
            _ => false,
        }
    }

    /// Relations that have at least one fact, in name order.
    pub fn relations(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self
            .per_relation
            .iter()
            .enumerate()
            .filter(|(_, idx)| !idx.pairs.is_empty())
            .map(|(i, _)| self.relations.resolve(i as u32))
            .collect();
        names.sort_unstable();
        names
    }

    pub fn objects(&self, subject: &str, relation: &str) -> BTreeSet<&str> {
        match (self.term_id(subject), self.relation_id(relation)) {
            (Some(s), Some(r)) => self.objects_of(s, r).iter().map(|&o| self.term_name(o)).collect(),
            _ => BTreeSet::new(),
        }
    }

    pub fn object_count(&self, subject: &str, relation: &str) -> usize {
        match (self.term_id(subject), self.relation_id(relation)) {
            (Some(s), Some(r)) => self.objects_of(s, r).len(),
            _ => 0,
        }
    }

    pub fn subjects(&self, relation: &str) -> BTreeSet<&str> {
        self.relation_id(relation)
            .map(|r| self.subjects_of(r).iter().map(|&s| self.term_name(s)).collect())
            .unwrap_or_default()
    }

    pub fn relation_stats(&self, relation: &str) -> Result<RelationStats> {
        let index = self
            .relation_id(relation)
            .map(|r| &self.per_relation[r.index()])
            .filter(|idx| !idx.pairs.is_empty())
            .ok_or_else(|| Error::UndefinedRelation(relation.to_string()))?;
        Ok(RelationStats {
            relation: relation.to_string(),
            distinct_subjects: index.subjects.len(),
            pair_count: index.pairs.len(),
            max_objects_per_subject: index.max_objects,
        })
    }

    /// Distinct subjects over (subject, object) pairs.
    pub fn functionality(&self, relation: &str) -> Result<Ratio<u64>> {
        self.relation_stats(relation).map(|s| s.functionality())
    }

    /// Entities of the KB: subjects and objects of instance-level facts.
    /// Classes only reached through type assertions are not entities.
    pub fn entities(&self) -> impl Iterator<Item = &str> + '_ {
        self.entities.iter().map(|&e| self.term_name(e))
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    /// Whether the term occurs anywhere in the KB.
    pub fn mentions(&self, term: &str) -> bool {
        self.term_id(term).is_some_and(|t| self.fact_counts.contains_key(&t))
    }

    /// Number of facts in which `term` occurs as subject or object.
    pub fn fact_count(&self, term: &str) -> usize {
        self.term_id(term).map(|t| self.fact_count_of(t)).unwrap_or(0)
    }

    pub fn domain_of(&self, relation: &str) -> Option<&str> {
        self.relation_id(relation)
            .and_then(|r| self.schema.domains.get(&r))
            .map(|&c| self.term_name(c))
    }

    pub fn is_instance(&self, entity: &str, class: &str) -> bool {
        match (self.term_id(entity), self.term_id(class)) {
            (Some(e), Some(c)) => self.is_instance_id(e, c),
            _ => false,
        }
    }

    /// Reflexive-transitive subclass test.
    pub fn is_subclass_of(&self, sub: &str, sup: &str) -> bool {
        match (self.term_id(sub), self.term_id(sup)) {
            (Some(a), Some(b)) if a == b => true,
            (Some(a), Some(b)) => self.is_subclass_id(a, b),
            _ => false,
        }
    }

    pub fn direct_subclasses(&self, class: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .term_id(class)
            .map(|c| {
                self.direct_subclasses_of(c)
                    .iter()
                    .map(|&s| self.term_name(s))
                    .collect()
            })
            .unwrap_or_default();
        out.sort_unstable();
        out
    }

    /// All entities with a type path to `class` through zero or more subclass edges.
    pub fn instances_of(&self, class: &str) -> BTreeSet<&str> {
        self.term_id(class)
            .map(|c| self.instances_of_id(c).into_iter().map(|e| self.term_name(e)).collect())
            .unwrap_or_default()
    }

    pub fn declared_types(&self, entity: &str) -> BTreeSet<&str> {
        self.term_id(entity)
            .map(|e| self.declared_types_of(e).iter().map(|&c| self.term_name(c)).collect())
            .unwrap_or_default()
    }

    /// Writes every fact as `subject TAB relation TAB object`, sorted by name.
    /// Inverted relations are written in their stored orientation.
    /// Entities a relation is judged on: instances of its domain class, or
    /// every subject of an instance or type fact when no domain is known.
    /// Sorted by name.
    pub fn evaluation_domain(&self, relation: &str) -> Vec<&str> {
        let ids: Vec<TermId> = match self.relation_id(relation).and_then(|r| self.domain_id(r)) {
            Some(class) => self.instances_of_id(class),
            None => self
                .relation_ids()
                .filter(|&r| Some(r) != self.schema.subclass_rel && Some(r) != self.schema.domain_rel)
                .flat_map(|r| self.subjects_of(r).iter().copied())
                .collect(),
        };
        let mut names: Vec<&str> = ids.into_iter().map(|t| self.term_name(t)).collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    pub fn write_tsv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut facts: Vec<Fact> = self.facts().collect();
        facts.sort();
        for f in facts {
            writeln!(w, "{}\t{}\t{}", f.subject, f.relation, f.object)?;
        }
        Ok(())
    }

    // ---- id-level access used by the oracles and the rule engine ----

    pub fn term_id(&self, name: &str) -> Option<TermId> {
        self.terms.get(name).map(TermId)
    }

    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.relations.get(name).map(RelId)
    }

    pub fn term_name(&self, id: TermId) -> &str {
        self.terms.resolve(id.0)
    }

    pub fn relation_name(&self, id: RelId) -> &str {
        self.relations.resolve(id.0)
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = RelId> + '_ {
        (0..self.per_relation.len() as u32)
            .map(RelId)
            .filter(|r| !self.per_relation[r.index()].pairs.is_empty())
    }

    pub fn entity_ids(&self) -> &[TermId] {
        &self.entities
    }

    pub fn is_schema_relation(&self, r: RelId) -> bool {
        Some(r) == self.schema.type_rel || Some(r) == self.schema.subclass_rel || Some(r) == self.schema.domain_rel
    }

    pub fn type_relation_id(&self) -> Option<RelId> {
        self.schema.type_rel
    }

    pub fn contains_ids(&self, s: TermId, r: RelId, o: TermId) -> bool {
        self.objects_of(s, r).binary_search(&o).is_ok()
    }

    pub fn objects_of(&self, s: TermId, r: RelId) -> &[TermId] {
        self.per_relation
            .get(r.index())
            .and_then(|idx| idx.by_subject.get(&s))
            .map(Vec::as_slice)
            .unwrap_or(EMPTY)
    }

    pub fn subjects_with_object(&self, r: RelId, o: TermId) -> &[TermId] {
        self.per_relation
            .get(r.index())
            .and_then(|idx| idx.by_object.get(&o))
            .map(Vec::as_slice)
            .unwrap_or(EMPTY)
    }

    pub fn pairs_of(&self, r: RelId) -> &[(TermId, TermId)] {
        self.per_relation
            .get(r.index())
            .map(|i| i.pairs.as_slice())
            .unwrap_or(&[])
    }

    pub fn subjects_of(&self, r: RelId) -> &[TermId] {
        self.per_relation
            .get(r.index())
            .map(|i| i.subjects.as_slice())
            .unwrap_or(EMPTY)
    }

    pub fn max_objects(&self, r: RelId) -> usize {
        self.per_relation.get(r.index()).map(|i| i.max_objects).unwrap_or(0)
    }

    pub fn fact_count_of(&self, t: TermId) -> usize {
        self.fact_counts.get(&t).copied().unwrap_or(0)
    }

    pub fn domain_id(&self, r: RelId) -> Option<TermId> {
        self.schema.domains.get(&r).copied()
    }

    pub fn declared_types_of(&self, e: TermId) -> &[TermId] {
        match self.schema.type_rel {
            Some(t) => self.objects_of(e, t),
            None => EMPTY,
        }
    }

    /// Every class the entity belongs to, including inherited superclasses. Sorted.
    pub fn classes_of(&self, e: TermId) -> Vec<TermId> {
        let mut out = Vec::new();
        for &t in self.declared_types_of(e) {
            match self.schema.ancestors.get(&t) {
                Some(anc) => out.extend_from_slice(anc),
                None => out.push(t),
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_subclass_id(&self, sub: TermId, sup: TermId) -> bool {
        if sub == sup {
            return true;
        }
        self.schema
            .ancestors
            .get(&sub)
            .is_some_and(|a| a.binary_search(&sup).is_ok())
    }

    pub fn is_instance_id(&self, e: TermId, class: TermId) -> bool {
        self.declared_types_of(e).iter().any(|&t| self.is_subclass_id(t, class))
    }

    pub fn direct_subclasses_of(&self, class: TermId) -> &[TermId] {
        match self.schema.subclass_rel {
            Some(sc) => self.subjects_with_object(sc, class),
            None => EMPTY,
        }
    }

    /// Reflexive-transitive subclasses of `class`, sorted.
    pub fn descendants_of(&self, class: TermId) -> Vec<TermId> {
        let mut out = vec![class];
        let mut stack = vec![class];
        while let Some(c) = stack.pop() {
            for &sub in self.direct_subclasses_of(c) {
                if !out.contains(&sub) {
                    out.push(sub);
                    stack.push(sub);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn instances_of_id(&self, class: TermId) -> Vec<TermId> {
        let Some(type_rel) = self.schema.type_rel else {
            return Vec::new();
        };
        let mut out: Vec<TermId> = self
            .descendants_of(class)
            .into_iter()
            .flat_map(|c| self.subjects_with_object(type_rel, c).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}
