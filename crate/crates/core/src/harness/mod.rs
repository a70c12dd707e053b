//! Experimental protocol: gold-standard generation, sampling, model
//! selection by cross-validated grid search, and report tables.

mod grid;
mod report;
mod sample;

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use grid::{cv_mean_f1, train_and_select, Grid, GridPoint, Selection, TrainOptions, TrainedRelation};
pub use report::{
    evaluate_suite, restrictions, write_markdown, write_tsv, RelationReport, SuiteModels, ORACLE_COLUMNS,
};
pub use sample::{cv_folds, sample, split_train_test, BIASED_THRESHOLD, DEFAULT_SAMPLE_SIZE};

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::oracles::{GoldStandard, Label};

/// How many objects every subject in a relation's domain must have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationCategory {
    ExactlyOne,
    AtLeastOne,
    AtMostOne,
    ZeroOrMore,
    ExactlyTwo,
}

impl RelationCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationCategory::ExactlyOne => "exactly-one",
            RelationCategory::AtLeastOne => "at-least-one",
            RelationCategory::AtMostOne => "at-most-one",
            RelationCategory::ZeroOrMore => "zero-or-more",
            RelationCategory::ExactlyTwo => "exactly-two",
        }
    }
}

impl fmt::Display for RelationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            RelationCategory::ExactlyOne,
            RelationCategory::AtLeastOne,
            RelationCategory::AtMostOne,
            RelationCategory::ZeroOrMore,
            RelationCategory::ExactlyTwo,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown relation category `{s}`")))
    }
}

/// One line of a relations config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDecl {
    pub relation: String,
    pub category: RelationCategory,
    pub domain: Option<String>,
}

/// Parses `relation TAB category [TAB domain-class]` lines; `#` starts a comment.
pub fn parse_relations<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<RelationDecl>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) || fields[0].is_empty() {
            return Err(Error::parse(
                source_name,
                i + 1,
                "expected `relation TAB category [TAB domain-class]`",
            ));
        }
        let category = fields[1]
            .parse()
            .map_err(|e: Error| Error::parse(source_name, i + 1, e.to_string()))?;
        let domain = fields
            .get(2)
            .filter(|d| !d.is_empty() && **d != "-")
            .map(|d| d.to_string());
        out.push(RelationDecl {
            relation: fields[0].to_string(),
            category,
            domain,
        });
    }
    Ok(out)
}

pub fn load_relations(path: impl AsRef<Path>) -> Result<Vec<RelationDecl>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_relations(BufReader::new(file), &path.display().to_string())
}

/// Labels derivable from the relation's category alone, over the
/// relation's evaluation domain.
pub fn autogen_gold(kb: &KnowledgeBase, relation: &str, category: RelationCategory) -> Result<GoldStandard> {
    let mut gold = GoldStandard::default();
    for e in kb.evaluation_domain(relation) {
        let n = kb.object_count(e, relation);
        let label = match category {
            RelationCategory::ExactlyOne => Some(Label::from_bool(n >= 1)),
            RelationCategory::AtLeastOne => (n == 0).then_some(Label::Incomplete),
            RelationCategory::AtMostOne => (n == 1).then_some(Label::Complete),
            RelationCategory::ExactlyTwo => match n {
                0 | 1 => Some(Label::Incomplete),
                2 => Some(Label::Complete),
                _ => None,
            },
            RelationCategory::ZeroOrMore => return Err(Error::UnsupportedCategory(relation.to_string())),
        };
        if let Some(label) = label {
            gold.insert(e, relation, label)?;
        }
    }
    Ok(gold)
}

/// Labels from a reference fact set taken as ground truth: a subject is
/// complete iff the KB knows every reference object. With
/// `drop_kb_superset`, subjects for which the KB knows objects the reference
/// lacks are left out.
pub fn gold_from_reference(
    kb: &KnowledgeBase,
    reference: &KnowledgeBase,
    relation: &str,
    drop_kb_superset: bool,
) -> Result<GoldStandard> {
    let mut subjects: BTreeSet<&str> = reference.evaluation_domain(relation).into_iter().collect();
    subjects.extend(reference.subjects(relation));
    let mut gold = GoldStandard::default();
    for s in subjects {
        let truth = reference.objects(s, relation);
        let known = kb.objects(s, relation);
        if drop_kb_superset && !known.is_subset(&truth) {
            continue;
        }
        gold.insert(s, relation, Label::from_bool(known.is_superset(&truth)))?;
    }
    Ok(gold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_roundtrip() {
        for s in [
            "exactly-one",
            "at-least-one",
            "at-most-one",
            "zero-or-more",
            "exactly-two",
        ] {
            assert_eq!(s.parse::<RelationCategory>().unwrap().to_string(), s);
        }
        assert!("sometimes".parse::<RelationCategory>().is_err());
    }

    #[test]
    fn relations_file() {
        let text = "# rel\tcat\tdomain\nhasGender\texactly-one\tPerson\ndiedIn\tat-most-one\n";
        let decls = parse_relations(text.as_bytes(), "rels").unwrap();
        assert_eq!(decls.len(), 2);
        assert_eq!(decls[0].domain.as_deref(), Some("Person"));
        assert_eq!(decls[1].category, RelationCategory::AtMostOne);
        assert!(parse_relations("x\n".as_bytes(), "rels").is_err());
    }

    fn people() -> KnowledgeBase {
        let mut b = KnowledgeBase::builder();
        for p in ["p1", "p2", "p3", "p4"] {
            b.add(p, "type", "Person").unwrap();
        }
        for r in ["hasGender", "diedIn", "hasParent", "hasChild"] {
            b.declare_domain(r, "Person");
        }
        b.add("p1", "hasGender", "f").unwrap();
        b.add("p2", "diedIn", "paris").unwrap();
        b.add("p3", "diedIn", "rome").unwrap();
        b.add("p3", "diedIn", "oslo").unwrap();
        b.add("p1", "hasParent", "m").unwrap();
        b.add("p2", "hasParent", "m").unwrap();
        b.add("p2", "hasParent", "f").unwrap();
        b.build().unwrap()
    }

    #[test]
    fn autogen_rules() {
        let kb = people();
        let g = autogen_gold(&kb, "hasGender", RelationCategory::ExactlyOne).unwrap();
        assert_eq!(g.get("p1", "hasGender"), Some(Label::Complete));
        assert_eq!(g.get("p2", "hasGender"), Some(Label::Incomplete));
        assert_eq!(g.len(), 4);

        let g = autogen_gold(&kb, "diedIn", RelationCategory::AtMostOne).unwrap();
        assert_eq!(g.get("p2", "diedIn"), Some(Label::Complete));
        assert_eq!(g.len(), 1);

        let g = autogen_gold(&kb, "hasParent", RelationCategory::ExactlyTwo).unwrap();
        assert_eq!(g.get("p1", "hasParent"), Some(Label::Incomplete));
        assert_eq!(g.get("p2", "hasParent"), Some(Label::Complete));
        assert_eq!(g.get("p4", "hasParent"), Some(Label::Incomplete));

        let g = autogen_gold(&kb, "hasGender", RelationCategory::AtLeastOne).unwrap();
        assert_eq!(g.count(Label::Complete), 0);
        assert_eq!(g.count(Label::Incomplete), 3);

        assert!(matches!(
            autogen_gold(&kb, "hasChild", RelationCategory::ZeroOrMore),
            Err(Error::UnsupportedCategory(_))
        ));
    }

    #[test]
    fn reference_gold() {
        let reference = KnowledgeBase::from_facts([
            ("a", "flight", "x"),
            ("a", "flight", "y"),
            ("b", "flight", "x"),
            ("c", "flight", "x"),
        ])
        .unwrap();
        let kb = KnowledgeBase::from_facts([
            ("a", "flight", "x"),
            ("b", "flight", "x"),
            ("c", "flight", "x"),
            ("c", "flight", "z"),
        ])
        .unwrap();
        let g = gold_from_reference(&kb, &reference, "flight", false).unwrap();
        assert_eq!(g.get("a", "flight"), Some(Label::Incomplete));
        assert_eq!(g.get("b", "flight"), Some(Label::Complete));
        assert_eq!(g.get("c", "flight"), Some(Label::Complete));
        let g = gold_from_reference(&kb, &reference, "flight", true).unwrap();
        assert_eq!(g.get("c", "flight"), None);
        assert_eq!(g.len(), 2);
    }
}
