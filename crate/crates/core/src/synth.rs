//! Synthetic (ideal, observed) KB pairs with exact completeness labels.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::RelationCategory;
use crate::kb::{KbBuilder, KnowledgeBase, Vocabulary};
use crate::oracles::{GoldStandard, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    #[serde(default)]
    pub parent: Option<String>,
    /// Share of the parent's instances (or of all entities) in this class.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub name: String,
    pub category: RelationCategory,
    /// Probability that a true fact is missing from the observed KB.
    #[serde(default)]
    pub erasure: f64,
    #[serde(default)]
    pub domain: Option<String>,
    /// Members of this class have no true objects.
    #[serde(default)]
    pub empty_for: Option<String>,
    /// Probability of having any object, for at-most-one and zero-or-more.
    #[serde(default = "one")]
    pub coverage: f64,
    /// Upper bound for at-least-one and zero-or-more.
    #[serde(default = "three")]
    pub max_objects: usize,
    #[serde(default = "fifty")]
    pub object_pool: usize,
}

fn one() -> f64 {
    1.0
}

fn three() -> usize {
    3
}

fn fifty() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    #[serde(default)]
    pub seed: u64,
    pub entities: usize,
    #[serde(default)]
    pub classes: Vec<ClassSpec>,
    pub relations: Vec<RelationSpec>,
}

fn unit(name: &str, what: &str, v: f64, closed: bool) -> Result<()> {
    let ok = if closed {
        (0.0..=1.0).contains(&v)
    } else {
        (0.0..1.0).contains(&v)
    };
    if ok {
        Ok(())
    } else {
        let hi = if closed { "1]" } else { "1)" };
        Err(Error::InvalidParameter(format!(
            "{name}: {what} {v} is outside [0, {hi}"
        )))
    }
}

impl SynthSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("synth spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.entities == 0 {
            return Err(Error::InvalidParameter("synth spec needs at least one entity".into()));
        }
        let schema = Vocabulary::default();
        let mut classes: Vec<&str> = Vec::new();
        for c in &self.classes {
            unit(&c.name, "fraction", c.fraction, true)?;
            if classes.contains(&c.name.as_str()) {
                return Err(Error::InvalidParameter(format!("class `{}` declared twice", c.name)));
            }
            if let Some(p) = &c.parent {
                if !classes.contains(&p.as_str()) {
                    return Err(Error::InvalidParameter(format!(
                        "class `{}` names parent `{p}` before it is declared",
                        c.name
                    )));
                }
            }
            classes.push(&c.name);
        }
        let mut seen: Vec<&str> = Vec::new();
        for r in &self.relations {
            let name = r.name.as_str();
            if seen.contains(&name) {
                return Err(Error::InvalidParameter(format!("relation `{name}` declared twice")));
            }
            if [
                &schema.type_relation,
                &schema.subclass_relation,
                &schema.domain_relation,
            ]
            .contains(&&r.name)
            {
                return Err(Error::InvalidParameter(format!("`{name}` is a schema relation")));
            }
            seen.push(name);
            unit(name, "erasure", r.erasure, false)?;
            unit(name, "coverage", r.coverage, true)?;
            for class in r.domain.iter().chain(&r.empty_for) {
                if !classes.contains(&class.as_str()) {
                    return Err(Error::InvalidParameter(format!("{name}: unknown class `{class}`")));
                }
            }
            if r.max_objects == 0 {
                return Err(Error::InvalidParameter(format!("{name}: max-objects must be positive")));
            }
            let needed = match r.category {
                RelationCategory::ExactlyTwo => 2,
                RelationCategory::AtLeastOne | RelationCategory::ZeroOrMore => r.max_objects,
                _ => 1,
            };
            if r.object_pool < needed {
                return Err(Error::InvalidParameter(format!(
                    "{name}: object pool of {} cannot supply {needed} distinct objects",
                    r.object_pool
                )));
            }
        }
        Ok(())
    }
}

/// A generated pair and its exact labels.
#[derive(Debug)]
pub struct SynthData {
    pub ideal: KnowledgeBase,
    pub observed: KnowledgeBase,
    pub gold: GoldStandard,
}

impl SynthData {
    /// Writes `ideal.tsv`, `observed.tsv` and `gold.tsv` into `dir`.
    pub fn write_outputs(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, kb) in [("ideal.tsv", &self.ideal), ("observed.tsv", &self.observed)] {
            let path = dir.join(name);
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            kb.write_tsv(std::io::BufWriter::new(file))
                .map_err(|e| Error::io(&path, e))?;
        }
        self.gold.save(dir.join("gold.tsv"))
    }
}

fn entity_names(n: usize) -> Vec<String> {
    let width = n.to_string().len();
    (0..n).map(|i| format!("e{i:0width$}")).collect()
}

/// Labels `complete(s, r)` iff the observed objects include every ideal one.
pub fn exact_gold<'a>(
    ideal: &KnowledgeBase,
    observed: &KnowledgeBase,
    domains: impl IntoIterator<Item = (&'a str, Vec<&'a str>)>,
) -> Result<GoldStandard> {
    let mut gold = GoldStandard::default();
    for (relation, entities) in domains {
        for e in entities {
            let complete = observed.objects(e, relation).is_superset(&ideal.objects(e, relation));
            gold.insert(e, relation, Label::from_bool(complete))?;
        }
    }
    Ok(gold)
}

struct Pair {
    ideal: KbBuilder,
    observed: KbBuilder,
}

impl Pair {
    fn new() -> Self {
        Pair {
            ideal: KbBuilder::new(),
            observed: KbBuilder::new(),
        }
    }

    fn both(&mut self, s: &str, r: &str, o: &str) -> Result<()> {
        self.ideal.add(s, r, o)?;
        self.observed.add(s, r, o)?;
        Ok(())
    }

    fn maybe(&mut self, s: &str, r: &str, o: &str, erasure: f64, rng: &mut ChaCha8Rng) -> Result<()> {
        self.ideal.add(s, r, o)?;
        if !rng.gen_bool(erasure) {
            self.observed.add(s, r, o)?;
        }
        Ok(())
    }

    fn build(self) -> Result<(KnowledgeBase, KnowledgeBase)> {
        Ok((self.ideal.build()?, self.observed.build()?))
    }
}

/// Samples the ideal KB from `spec` and erases facts to get the observed one.
pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let vocab = Vocabulary::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let entities = entity_names(spec.entities);
    let mut pair = Pair::new();

    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for class in &spec.classes {
        let pool: Vec<usize> = match &class.parent {
            Some(p) => {
                pair.both(&class.name, &vocab.subclass_relation, p)?;
                members[p.as_str()].clone()
            }
            None => (0..entities.len()).collect(),
        };
        let chosen: Vec<usize> = pool.into_iter().filter(|_| rng.gen_bool(class.fraction)).collect();
        for &i in &chosen {
            pair.both(&entities[i], &vocab.type_relation, &class.name)?;
        }
        members.insert(&class.name, chosen);
    }

    let mut domains: Vec<(&str, Vec<usize>)> = Vec::new();
    for rel in &spec.relations {
        let domain: Vec<usize> = match &rel.domain {
            Some(c) => {
                pair.both(&rel.name, &vocab.domain_relation, c)?;
                members[c.as_str()].clone()
            }
            None => (0..entities.len()).collect(),
        };
        let empty: Vec<usize> = rel
            .empty_for
            .as_ref()
            .map(|c| members[c.as_str()].clone())
            .unwrap_or_default();
        let pool: Vec<String> = (0..rel.object_pool).map(|i| format!("{}_{i}", rel.name)).collect();
        for &i in &domain {
            let n = match rel.category {
                RelationCategory::ExactlyOne => 1,
                RelationCategory::ExactlyTwo => 2,
                RelationCategory::AtMostOne => rng.gen_bool(rel.coverage) as usize,
                RelationCategory::AtLeastOne => rng.gen_range(1..=rel.max_objects),
                RelationCategory::ZeroOrMore => {
                    if rng.gen_bool(rel.coverage) {
                        rng.gen_range(1..=rel.max_objects)
                    } else {
                        0
                    }
                }
            };
            if n == 0 || empty.binary_search(&i).is_ok() {
                continue;
            }
            for o in pool.choose_multiple(&mut rng, n) {
                pair.maybe(&entities[i], &rel.name, o, rel.erasure, &mut rng)?;
            }
        }
        domains.push((&rel.name, domain));
    }

    let (ideal, observed) = pair.build()?;
    let gold = exact_gold(
        &ideal,
        &observed,
        domains
            .iter()
            .map(|(r, d)| (*r, d.iter().map(|&i| entities[i].as_str()).collect())),
    )?;
    Ok(SynthData { ideal, observed, gold })
}

/// Couples who usually share a city. With probability `noise` a spouse lives
/// elsewhere; each `livesIn` fact is erased with probability `erasure`.
/// Only `livesIn` is labeled.
pub fn co_residence(couples: usize, erasure: f64, noise: f64, seed: u64) -> Result<SynthData> {
    unit("livesIn", "erasure", erasure, false)?;
    unit("livesIn", "noise", noise, true)?;
    if couples == 0 {
        return Err(Error::InvalidParameter("need at least one couple".into()));
    }
    let vocab = Vocabulary::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cities: Vec<String> = (0..(couples / 10).max(5)).map(|i| format!("city{i}")).collect();
    let width = couples.to_string().len();
    let mut pair = Pair::new();
    pair.both("livesIn", &vocab.domain_relation, "Person")?;
    let mut people = Vec::new();
    for i in 0..couples {
        let (a, b) = (format!("a{i:0width$}"), format!("b{i:0width$}"));
        for p in [&a, &b] {
            pair.both(p, &vocab.type_relation, "Person")?;
        }
        pair.both(&a, "marriedTo", &b)?;
        pair.both(&b, "marriedTo", &a)?;
        let home = cities.choose(&mut rng).expect("cities");
        let other = if rng.gen_bool(noise) {
            cities.choose(&mut rng).expect("cities")
        } else {
            home
        };
        pair.maybe(&a, "livesIn", home, erasure, &mut rng)?;
        pair.maybe(&b, "livesIn", other, erasure, &mut rng)?;
        people.push(a);
        people.push(b);
    }
    let (ideal, observed) = pair.build()?;
    let gold = exact_gold(
        &ideal,
        &observed,
        [("livesIn", people.iter().map(String::as_str).collect())],
    )?;
    Ok(SynthData { ideal, observed, gold })
}

/// Ready-made data sets, each isolating one completeness pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// A functional relation: complete exactly when one object is known.
    PcaFunctional,
    /// `diedIn` is empty for members of `LivingPeople`.
    LivingPeople,
    /// Everyone has two parents.
    HasParent,
    /// About 1% of entities have any `wonAward` object.
    Sparse,
    /// Spouses share a city.
    CoResidence,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::PcaFunctional,
        Scenario::LivingPeople,
        Scenario::HasParent,
        Scenario::Sparse,
        Scenario::CoResidence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::PcaFunctional => "pca-functional",
            Scenario::LivingPeople => "living-people",
            Scenario::HasParent => "has-parent",
            Scenario::Sparse => "sparse",
            Scenario::CoResidence => "co-residence",
        }
    }

    pub fn default_entities(self) -> usize {
        match self {
            Scenario::Sparse => 10_000,
            _ => 1_000,
        }
    }

    /// The generating spec; `None` for scenarios built by a dedicated routine.
    pub fn spec(self, entities: usize, seed: u64) -> Option<SynthSpec> {
        let person = || ClassSpec {
            name: "Person".into(),
            parent: None,
            fraction: 1.0,
        };
        let rel = |name: &str, category, erasure| RelationSpec {
            name: name.into(),
            category,
            erasure,
            domain: Some("Person".into()),
            empty_for: None,
            coverage: 1.0,
            max_objects: 3,
            object_pool: 50,
        };
        let (classes, relations) = match self {
            Scenario::PcaFunctional => (
                vec![person()],
                vec![
                    rel("hasNationality", RelationCategory::ExactlyOne, 0.4),
                    RelationSpec {
                        coverage: 0.7,
                        ..rel("bornIn", RelationCategory::AtMostOne, 0.2)
                    },
                ],
            ),
            Scenario::LivingPeople => (
                vec![
                    person(),
                    ClassSpec {
                        name: "LivingPeople".into(),
                        parent: Some("Person".into()),
                        fraction: 0.5,
                    },
                ],
                vec![
                    RelationSpec {
                        empty_for: Some("LivingPeople".into()),
                        ..rel("diedIn", RelationCategory::AtMostOne, 0.6)
                    },
                    rel("bornIn", RelationCategory::ExactlyOne, 0.1),
                ],
            ),
            Scenario::HasParent => (
                vec![person()],
                vec![RelationSpec {
                    object_pool: 500,
                    ..rel("hasParent", RelationCategory::ExactlyTwo, 0.3)
                }],
            ),
            Scenario::Sparse => (
                vec![person()],
                vec![RelationSpec {
                    coverage: 0.016,
                    max_objects: 2,
                    ..rel("wonAward", RelationCategory::ZeroOrMore, 0.5)
                }],
            ),
            Scenario::CoResidence => return None,
        };
        Some(SynthSpec {
            seed,
            entities,
            classes,
            relations,
        })
    }

    pub fn generate(self, entities: usize, seed: u64) -> Result<SynthData> {
        match self.spec(entities, seed) {
            Some(spec) => generate(&spec),
            None => co_residence(entities.div_ceil(2), 0.3, 0.1, seed),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(erasure: f64) -> SynthSpec {
        SynthSpec {
            seed: 3,
            entities: 200,
            classes: vec![ClassSpec {
                name: "Person".into(),
                parent: None,
                fraction: 1.0,
            }],
            relations: vec![RelationSpec {
                name: "r".into(),
                category: RelationCategory::AtLeastOne,
                erasure,
                domain: Some("Person".into()),
                empty_for: None,
                coverage: 1.0,
                max_objects: 3,
                object_pool: 10,
            }],
        }
    }

    #[test]
    fn no_erasure_means_all_complete() {
        let data = generate(&small(0.0)).unwrap();
        assert_eq!(data.gold.len(), 200);
        assert_eq!(data.gold.count(Label::Incomplete), 0);
        assert_eq!(data.ideal.len(), data.observed.len());
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(generate(&small(1.0)).is_err());
        assert!(generate(&SynthSpec {
            entities: 0,
            ..small(0.1)
        })
        .is_err());
        let mut s = small(0.1);
        s.relations[0].domain = Some("Nobody".into());
        assert!(s.validate().is_err());
        let mut s = small(0.1);
        s.relations[0].object_pool = 2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn observed_is_a_subset_and_gold_is_exact() {
        let data = generate(&small(0.3)).unwrap();
        for f in data.observed.facts() {
            assert!(data.ideal.contains(&f.subject, &f.relation, &f.object));
        }
        for l in data.gold.labels() {
            let missing = data
                .ideal
                .objects(&l.entity, "r")
                .difference(&data.observed.objects(&l.entity, "r"))
                .count();
            assert_eq!(l.label.is_complete(), missing == 0);
        }
    }

    #[test]
    fn functional_erasure_rate_shows_in_labels() {
        let data = Scenario::PcaFunctional.generate(1000, 11).unwrap();
        let labels = data.gold.for_relation("hasNationality");
        let frac = labels.count(Label::Complete) as f64 / labels.len() as f64;
        assert!((frac - 0.6).abs() <= 0.05, "{frac}");
    }

    #[test]
    fn scenarios_are_deterministic() {
        for s in Scenario::ALL {
            let a = s.generate(300, 5).unwrap();
            let b = s.generate(300, 5).unwrap();
            let dump = |kb: &KnowledgeBase| {
                let mut v = Vec::new();
                kb.write_tsv(&mut v).unwrap();
                v
            };
            assert_eq!(dump(&a.observed), dump(&b.observed), "{s}");
            assert_eq!(a.gold, b.gold);
            assert_eq!(s.to_string().parse::<Scenario>().unwrap(), s);
        }
    }

    #[test]
    fn living_people_have_no_death_place() {
        let data = Scenario::LivingPeople.generate(400, 2).unwrap();
        for e in data.ideal.instances_of("LivingPeople") {
            assert_eq!(data.ideal.object_count(e, "diedIn"), 0);
            assert_eq!(data.gold.get(e, "diedIn"), Some(Label::Complete));
        }
        assert_eq!(data.observed.domain_of("diedIn"), Some("Person"));
    }

    #[test]
    fn spec_toml_roundtrip() {
        let spec = Scenario::LivingPeople.spec(100, 9).unwrap();
        assert_eq!(SynthSpec::from_toml(&spec.to_toml()).unwrap(), spec);
        let text = "entities = 5\n[[relations]]\nname = \"r\"\ncategory = \"exactly-one\"\nerasure = 0.2\n";
        let spec = SynthSpec::from_toml(text).unwrap();
        assert_eq!(spec.relations[0].object_pool, 50);
        assert!(SynthSpec::from_toml("entities = 5\nrelations = []\nbogus = 1\n").is_err());
    }

    #[test]
    fn co_residence_shape() {
        let data = co_residence(100, 0.3, 0.0, 1).unwrap();
        assert_eq!(data.gold.len(), 200);
        for i in 0..100 {
            let (a, b) = (format!("a{i:03}"), format!("b{i:03}"));
            assert!(data.observed.contains(&a, "marriedTo", &b));
            assert_eq!(data.ideal.objects(&a, "livesIn"), data.ideal.objects(&b, "livesIn"));
        }
    }
}
