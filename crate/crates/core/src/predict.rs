//! Ordinary closed Horn rules over KB relations, the facts they predict,
//! and completeness-based filtering of those predictions.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::engine::{AugmentedKb, Binding, CompiledBody};
use crate::error::{Error, Result};
use crate::kb::{Fact, KnowledgeBase, RelId, TermId};
use crate::learned::{self, RuleModel};
use crate::miner::{sort_rules, Operator};
use crate::rule::{Atom, Rule, Term, Var, X, Y};

const MAX_FACT_BODY: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct FactMiningConfig {
    pub min_support: usize,
    pub min_confidence: f64,
    pub max_body_atoms: usize,
    /// PCA confidence; plain confidence otherwise.
    pub pca: bool,
    /// Also try atoms with a constant object.
    pub instantiate: bool,
}

impl Default for FactMiningConfig {
    fn default() -> Self {
        FactMiningConfig {
            min_support: 10,
            min_confidence: 0.1,
            max_body_atoms: 2,
            pca: true,
            instantiate: false,
        }
    }
}

impl FactMiningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_support == 0 {
            return Err(Error::InvalidParameter("min-support must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(Error::InvalidParameter(format!(
                "min-confidence {} is outside [0, 1]",
                self.min_confidence
            )));
        }
        if !(1..=MAX_FACT_BODY).contains(&self.max_body_atoms) {
            return Err(Error::InvalidParameter(format!(
                "max-body-atoms for fact rules must be in 1..={MAX_FACT_BODY}"
            )));
        }
        Ok(())
    }
}

struct Candidate {
    rule: Rule,
    /// Indices into the head relation's pairs satisfying the body.
    matched: Vec<u32>,
}

struct FactMiner<'a> {
    aug: &'a AugmentedKb<'a>,
    config: &'a FactMiningConfig,
    relations: Vec<RelId>,
}

fn var_atom(kb: &KnowledgeBase, r: RelId, s: Var, o: Var) -> Atom {
    Atom::relational(kb.relation_name(r), Term::Var(s), Term::Var(o))
}

/// Variables that appear in exactly one atom, head included.
fn open_vars(rule: &Rule) -> usize {
    rule.all_vars().into_iter().filter(|&v| rule.occurrences(v) < 2).count()
}

impl<'a> FactMiner<'a> {
    fn refinements(&self, rule: &Rule) -> Vec<(Atom, Operator)> {
        let kb = self.aug.kb();
        let vars = rule.all_vars();
        let fresh = rule.next_var();
        let mut out = Vec::new();
        for &r in &self.relations {
            for &a in &vars {
                for &b in &vars {
                    if a != b {
                        out.push((var_atom(kb, r, a, b), Operator::Closing));
                    }
                }
                out.push((var_atom(kb, r, a, fresh), Operator::Dangling));
                out.push((var_atom(kb, r, fresh, a), Operator::Dangling));
                if self.config.instantiate {
                    for c in self.frequent_objects(r) {
                        out.push((
                            Atom::relational(kb.relation_name(r), Term::Var(a), Term::Const(kb.term_name(c).into())),
                            Operator::Dangling,
                        ));
                    }
                }
            }
        }
        out.retain(|(atom, _)| *atom != rule.head && !rule.body.contains(atom));
        out
    }

    fn frequent_objects(&self, r: RelId) -> Vec<TermId> {
        let kb = self.aug.kb();
        let mut objects: Vec<TermId> = kb.pairs_of(r).iter().map(|&(_, o)| o).collect();
        objects.sort_unstable();
        objects.dedup();
        objects.retain(|&o| kb.subjects_with_object(r, o).len() >= self.config.min_support);
        objects
    }

    fn expand(&self, parent: &Candidate, pairs: &[(TermId, TermId)]) -> Vec<Candidate> {
        if parent.rule.body.len() >= self.config.max_body_atoms {
            return Vec::new();
        }
        let remaining = self.config.max_body_atoms - parent.rule.body.len() - 1;
        let mut out = Vec::new();
        for (atom, op) in self.refinements(&parent.rule) {
            let mut body = parent.rule.body.clone();
            body.push(atom);
            let mut rule = Rule::new(body, parent.rule.head.clone());
            if open_vars(&rule) > 2 * remaining {
                continue;
            }
            let compiled = CompiledBody::compile(self.aug, &rule.body);
            let mut binding = Binding::default();
            let matched: Vec<u32> = parent
                .matched
                .iter()
                .copied()
                .filter(|&i| {
                    let (s, o) = pairs[i as usize];
                    binding.set(X, s);
                    binding.set(Y, o);
                    compiled.satisfiable(self.aug, &mut binding)
                })
                .collect();
            if matched.len() < self.config.min_support {
                continue;
            }
            rule.support = matched.len();
            rule.provenance = parent.rule.provenance.clone();
            rule.provenance.push(op);
            rule.canonicalize();
            out.push(Candidate { rule, matched });
        }
        out
    }

    fn confidence(&self, rule: &Rule, head: RelId) -> f64 {
        let denominator = body_pairs(self.aug, &rule.body, self.config.pca.then_some(head)).len();
        if denominator == 0 {
            0.0
        } else {
            rule.support as f64 / denominator as f64
        }
    }

    fn mine_head(&self, head: RelId) -> Vec<Rule> {
        let kb = self.aug.kb();
        let pairs = kb.pairs_of(head);
        if pairs.len() < self.config.min_support {
            return Vec::new();
        }
        let root = Candidate {
            rule: Rule::new(Vec::new(), var_atom(kb, head, X, Y)),
            matched: (0..pairs.len() as u32).collect(),
        };
        let mut seen: HashSet<(Vec<Atom>, Atom)> = HashSet::new();
        let mut frontier = vec![root];
        let mut out = Vec::new();
        while !frontier.is_empty() {
            let mut children: Vec<Candidate> = frontier.par_iter().flat_map_iter(|c| self.expand(c, pairs)).collect();
            children.sort_by(|a, b| (&a.rule.body, &a.rule.provenance).cmp(&(&b.rule.body, &b.rule.provenance)));
            frontier = children
                .into_iter()
                .filter(|c| seen.insert((c.rule.body.clone(), c.rule.head.clone())))
                .collect();
            let mut emitted: Vec<Rule> = frontier
                .par_iter()
                .filter(|c| c.rule.is_closed())
                .filter_map(|c| {
                    let mut rule = c.rule.clone();
                    rule.confidence = self.confidence(&rule, head);
                    (rule.confidence + 1e-12 >= self.config.min_confidence).then_some(rule)
                })
                .collect();
            out.append(&mut emitted);
        }
        out
    }
}

/// Distinct `(?x, ?y)` bindings of `body`. With `pca_head`, only subjects
/// that have some object for that relation count.
fn body_pairs(aug: &AugmentedKb<'_>, body: &[Atom], pca_head: Option<RelId>) -> HashSet<Vec<TermId>> {
    let compiled = CompiledBody::compile(aug, body);
    let mut binding = Binding::default();
    match pca_head {
        None => compiled.project(aug, &mut binding, &[X, Y]),
        Some(r) => {
            let kb = aug.kb();
            let mut out = HashSet::new();
            for &s in kb.subjects_of(r) {
                binding.set(X, s);
                for ys in compiled.project(aug, &mut binding, &[Y]) {
                    out.insert(vec![s, ys[0]]);
                }
            }
            out
        }
    }
}

/// Mines closed rules `body ⇒ r(?x, ?y)` for every non-schema relation.
pub fn mine_fact_rules(kb: &KnowledgeBase, config: &FactMiningConfig) -> Result<Vec<Rule>> {
    config.validate()?;
    let aug = AugmentedKb::new(kb, None, crate::engine::DEFAULT_POPULARITY_PERCENTILE)?;
    let mut relations: Vec<RelId> = kb.relation_ids().filter(|&r| !kb.is_schema_relation(r)).collect();
    relations.sort_by(|a, b| kb.relation_name(*a).cmp(kb.relation_name(*b)));
    let miner = FactMiner {
        aug: &aug,
        config,
        relations: relations.clone(),
    };
    let mut rules: Vec<Rule> = relations.par_iter().flat_map_iter(|&r| miner.mine_head(r)).collect();
    sort_rules(&mut rules);
    Ok(rules)
}

/// A fact absent from the KB that some rule derives.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub fact: Fact,
    /// Highest confidence among the producing rules.
    pub confidence: f64,
    /// Indices into the rule slice passed to [`predict_facts`].
    pub rules: Vec<usize>,
}

/// Applies every rule with a relational head. Output is sorted by fact.
pub fn predict_facts(kb: &KnowledgeBase, rules: &[Rule]) -> Result<Vec<Prediction>> {
    let aug = AugmentedKb::new(kb, None, crate::engine::DEFAULT_POPULARITY_PERCENTILE)?;
    let per_rule: Vec<Vec<(Fact, f64, usize)>> = rules
        .par_iter()
        .enumerate()
        .map(|(i, rule)| {
            let Atom::Relation {
                relation,
                subject: Term::Var(sv),
                object: Term::Var(ov),
            } = &rule.head
            else {
                return Vec::new();
            };
            let compiled = CompiledBody::compile(&aug, &rule.body);
            let mut binding = Binding::default();
            compiled
                .project(&aug, &mut binding, &[*sv, *ov])
                .into_iter()
                .filter_map(|b| {
                    let (s, o) = (kb.term_name(b[0]), kb.term_name(b[1]));
                    (!kb.contains(s, relation, o)).then(|| (Fact::new(s, relation.as_str(), o), rule.confidence, i))
                })
                .collect()
        })
        .collect();

    let mut merged: BTreeMap<Fact, Prediction> = BTreeMap::new();
    for (fact, confidence, i) in per_rule.into_iter().flatten() {
        let p = merged.entry(fact.clone()).or_insert_with(|| Prediction {
            fact,
            confidence,
            rules: Vec::new(),
        });
        p.confidence = p.confidence.max(confidence);
        p.rules.push(i);
    }
    Ok(merged
        .into_values()
        .map(|mut p| {
            p.rules.sort_unstable();
            p
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredPrediction {
    pub prediction: Prediction,
    pub kept: bool,
}

/// Marks `r(s, o)` as filtered whenever the model asserts `complete(s, r)`.
/// Relations without rules pass through.
pub fn filter_predictions(
    predictions: &[Prediction],
    aug: &AugmentedKb<'_>,
    model: &RuleModel,
) -> Vec<FilteredPrediction> {
    predictions
        .par_iter()
        .map(|p| FilteredPrediction {
            kept: !learned::predict(aug, model, &p.fact.subject, &p.fact.relation),
            prediction: p.clone(),
        })
        .collect()
}

/// Every prediction kept.
pub fn unfiltered(predictions: &[Prediction]) -> Vec<FilteredPrediction> {
    predictions
        .iter()
        .map(|p| FilteredPrediction {
            prediction: p.clone(),
            kept: true,
        })
        .collect()
}

pub fn write_predictions<W: Write>(mut w: W, predictions: &[FilteredPrediction]) -> std::io::Result<()> {
    for p in predictions {
        let f = &p.prediction.fact;
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            f.subject,
            f.relation,
            f.object,
            p.prediction.confidence,
            if p.kept { "kept" } else { "filtered" }
        )?;
    }
    Ok(())
}

/// Reads `subject TAB relation TAB object TAB confidence [TAB kept|filtered]`.
/// Producing rules are not stored, so `rules` comes back empty.
pub fn read_predictions<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<FilteredPrediction>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if !(4..=5).contains(&f.len()) {
            return Err(Error::parse(source_name, i + 1, "expected 4 or 5 tab-separated fields"));
        }
        let confidence: f64 = f[3]
            .parse()
            .ok()
            .filter(|c: &f64| (0.0..=1.0).contains(c))
            .ok_or_else(|| Error::parse(source_name, i + 1, format!("bad confidence `{}`", f[3])))?;
        let kept = match f.get(4) {
            None | Some(&"kept") => true,
            Some(&"filtered") => false,
            Some(other) => {
                return Err(Error::parse(
                    source_name,
                    i + 1,
                    format!("expected kept or filtered, got `{other}`"),
                ))
            }
        };
        out.push(FilteredPrediction {
            prediction: Prediction {
                fact: Fact::new(f[0], f[1], f[2]),
                confidence,
                rules: Vec::new(),
            },
            kept,
        });
    }
    Ok(out)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<FilteredPrediction>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictions(BufReader::new(file), &path.display().to_string())
}

pub const BUCKETS: usize = 10;

/// Predictions with confidence in `[lo, hi)`; the top bucket also takes 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Bucket {
    pub lo: f64,
    pub hi: f64,
    pub predictions: usize,
    pub kept: usize,
    /// Present only when a reference KB was given.
    pub correct: Option<usize>,
    pub kept_correct: Option<usize>,
    /// Totals over this bucket and every bucket above it.
    pub cumulative_predictions: usize,
    pub cumulative_kept: usize,
    pub cumulative_correct: Option<usize>,
    pub cumulative_kept_correct: Option<usize>,
}

fn ratio(num: Option<usize>, den: usize) -> Option<f64> {
    num.filter(|_| den > 0).map(|n| n as f64 / den as f64)
}

impl Bucket {
    pub fn precision(&self) -> Option<f64> {
        ratio(self.correct, self.predictions)
    }

    pub fn kept_precision(&self) -> Option<f64> {
        ratio(self.kept_correct, self.kept)
    }

    pub fn cumulative_precision(&self) -> Option<f64> {
        ratio(self.cumulative_correct, self.cumulative_predictions)
    }

    pub fn cumulative_kept_precision(&self) -> Option<f64> {
        ratio(self.cumulative_kept_correct, self.cumulative_kept)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketReport {
    /// Highest confidence first.
    pub buckets: Vec<Bucket>,
    /// Share of correct predictions that the filter removed.
    pub removed_correct_fraction: Option<f64>,
}

fn bucket_index(confidence: f64) -> usize {
    ((confidence * BUCKETS as f64 + 1e-9).floor().max(0.0) as usize).min(BUCKETS - 1)
}

/// Per-bucket counts, with precision against `reference` when given.
pub fn bucket_report(predictions: &[FilteredPrediction], reference: Option<&KnowledgeBase>) -> BucketReport {
    let mut counts = [[0usize; 4]; BUCKETS];
    for p in predictions {
        let f = &p.prediction.fact;
        let correct = reference.is_some_and(|r| r.contains(&f.subject, &f.relation, &f.object));
        let c = &mut counts[bucket_index(p.prediction.confidence)];
        c[0] += 1;
        c[1] += p.kept as usize;
        c[2] += correct as usize;
        c[3] += (correct && p.kept) as usize;
    }
    let known = |n: usize| reference.map(|_| n);
    let mut cum = [0usize; 4];
    let buckets = (0..BUCKETS)
        .rev()
        .map(|i| {
            let c = counts[i];
            for k in 0..4 {
                cum[k] += c[k];
            }
            Bucket {
                lo: i as f64 / BUCKETS as f64,
                hi: (i + 1) as f64 / BUCKETS as f64,
                predictions: c[0],
                kept: c[1],
                correct: known(c[2]),
                kept_correct: known(c[3]),
                cumulative_predictions: cum[0],
                cumulative_kept: cum[1],
                cumulative_correct: known(cum[2]),
                cumulative_kept_correct: known(cum[3]),
            }
        })
        .collect();
    BucketReport {
        buckets,
        removed_correct_fraction: ratio(known(cum[2] - cum[3]), cum[2]),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or("NA".into(), |v| format!("{v:.4}"))
}

const BUCKET_HEADER: [&str; 9] = [
    "bucket",
    "predictions",
    "kept",
    "precision",
    "kept_precision",
    "cum_predictions",
    "cum_kept",
    "cum_precision",
    "cum_kept_precision",
];

fn bucket_cells(b: &Bucket) -> Vec<String> {
    let interval = if b.hi >= 1.0 {
        format!("[{:.1},{:.1}]", b.lo, b.hi)
    } else {
        format!("[{:.1},{:.1})", b.lo, b.hi)
    };
    vec![
        interval,
        b.predictions.to_string(),
        b.kept.to_string(),
        cell(b.precision()),
        cell(b.kept_precision()),
        b.cumulative_predictions.to_string(),
        b.cumulative_kept.to_string(),
        cell(b.cumulative_precision()),
        cell(b.cumulative_kept_precision()),
    ]
}

pub fn write_bucket_tsv<W: Write>(mut w: W, report: &BucketReport) -> std::io::Result<()> {
    writeln!(w, "{}", BUCKET_HEADER.join("\t"))?;
    for b in &report.buckets {
        writeln!(w, "{}", bucket_cells(b).join("\t"))?;
    }
    writeln!(
        w,
        "# removed_correct_fraction\t{}",
        cell(report.removed_correct_fraction)
    )
}

pub fn write_bucket_markdown<W: Write>(mut w: W, report: &BucketReport) -> std::io::Result<()> {
    writeln!(w, "| {} |", BUCKET_HEADER.join(" | "))?;
    writeln!(w, "|{}", "---|".repeat(BUCKET_HEADER.len()))?;
    for b in &report.buckets {
        writeln!(w, "| {} |", bucket_cells(b).join(" | "))?;
    }
    writeln!(
        w,
        "\nCorrect predictions removed by the filter: {}",
        cell(report.removed_correct_fraction)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::MiningConfig;
    use crate::rule::parse_rule;

    fn rule(text: &str) -> Rule {
        parse_rule(&format!("{text}\t0\t1")).unwrap()
    }

    fn couples() -> KnowledgeBase {
        let mut b = KnowledgeBase::builder();
        for i in 0..30 {
            let (h, w, city) = (format!("h{i:02}"), format!("w{i:02}"), format!("c{}", i % 5));
            b.add(&h, "marriedTo", &w).unwrap();
            b.add(&w, "marriedTo", &h).unwrap();
            b.add(&h, "livesIn", &city).unwrap();
            if i < 25 {
                b.add(&w, "livesIn", &city).unwrap();
            }
        }
        b.build().unwrap()
    }

    fn config() -> FactMiningConfig {
        FactMiningConfig {
            min_support: 5,
            min_confidence: 0.5,
            ..Default::default()
        }
    }

    #[test]
    fn co_residence_rule_is_mined() {
        let kb = couples();
        let rules = mine_fact_rules(&kb, &config()).unwrap();
        let texts: Vec<String> = rules.iter().map(|r| r.to_string()).collect();
        let found = rules.iter().find(|r| {
            r.body.len() == 2
                && r.head.relation() == Some("livesIn")
                && r.body.iter().any(|a| a.relation() == Some("marriedTo"))
                && r.body.iter().any(|a| a.relation() == Some("livesIn"))
                && r.confidence > 0.99
        });
        assert!(found.is_some(), "{texts:#?}");
        assert!(rules.iter().all(Rule::is_closed));
        assert!(rules.iter().all(|r| r.support >= 5 && r.confidence + 1e-12 >= 0.5));
    }

    #[test]
    fn spouse_residence_is_predicted() {
        let kb = couples();
        let r = rule("marriedTo(?x,?z) ∧ livesIn(?z,?y) ⇒ livesIn(?x,?y)");
        let preds = predict_facts(&kb, &[r]).unwrap();
        assert_eq!(preds.len(), 5);
        assert!(preds.iter().any(|p| p.fact == Fact::new("w27", "livesIn", "c2")));
        assert!(preds
            .iter()
            .all(|p| !kb.contains(&p.fact.subject, &p.fact.relation, &p.fact.object)));
    }

    #[test]
    fn predictions_take_the_highest_confidence() {
        let kb = couples();
        let mut a = rule("marriedTo(?x,?z) ∧ livesIn(?z,?y) ⇒ livesIn(?x,?y)");
        let mut b = rule("marriedTo(?z,?x) ∧ livesIn(?z,?y) ⇒ livesIn(?x,?y)");
        a.confidence = 0.6;
        b.confidence = 0.8;
        let preds = predict_facts(&kb, &[a, b]).unwrap();
        assert_eq!(preds.len(), 5);
        for p in preds {
            assert_eq!(p.confidence, 0.8);
            assert_eq!(p.rules, vec![0, 1]);
        }
    }

    #[test]
    fn filter_drops_only_asserted_complete_pairs() {
        let mut b = KnowledgeBase::builder();
        b.add("ann", "hasParent", "p1").unwrap();
        b.add("ann", "hasParent", "p2").unwrap();
        b.add("bob", "hasParent", "p1").unwrap();
        let kb = b.build().unwrap();
        let aug = AugmentedKb::new(&kb, None, 0.05).unwrap();
        let r = rule("moreThan_1(?x,hasParent) ⇒ complete(?x,hasParent)");
        let model = RuleModel::new(vec![r], MiningConfig::default()).unwrap();
        let p = |s: &str, r: &str| Prediction {
            fact: Fact::new(s, r, "p3"),
            confidence: 0.5,
            rules: vec![],
        };
        let preds = vec![p("ann", "hasParent"), p("bob", "hasParent"), p("ann", "livesIn")];
        let out = filter_predictions(&preds, &aug, &model);
        assert_eq!(out.iter().map(|f| f.kept).collect::<Vec<_>>(), vec![false, true, true]);
        for (f, p) in out.iter().zip(&preds) {
            assert_eq!(&f.prediction, p);
        }
    }

    fn fp(s: &str, conf: f64, kept: bool) -> FilteredPrediction {
        FilteredPrediction {
            prediction: Prediction {
                fact: Fact::new(s, "r", "o"),
                confidence: conf,
                rules: vec![],
            },
            kept,
        }
    }

    #[test]
    fn buckets_partition_and_accumulate() {
        let reference = KnowledgeBase::from_facts([("a", "r", "o"), ("b", "r", "o"), ("c", "r", "o")]).unwrap();
        let preds = vec![
            fp("a", 1.0, true),
            fp("b", 0.95, false),
            fp("c", 0.3, true),
            fp("d", 0.3, true),
            fp("e", 0.05, false),
        ];
        let report = bucket_report(&preds, Some(&reference));
        assert_eq!(report.buckets.len(), BUCKETS);
        assert_eq!(report.buckets.iter().map(|b| b.predictions).sum::<usize>(), preds.len());
        let top = &report.buckets[0];
        assert_eq!((top.predictions, top.kept, top.correct), (2, 1, Some(2)));
        assert_eq!(top.kept_precision(), Some(1.0));
        let b3 = &report.buckets[BUCKETS - 1 - 3];
        assert_eq!(b3.precision(), Some(0.5));
        assert_eq!(b3.cumulative_predictions, 4);
        assert_eq!(b3.cumulative_precision(), Some(0.75));
        assert_eq!(report.buckets.last().unwrap().cumulative_predictions, 5);
        assert_eq!(report.removed_correct_fraction, Some(1.0 / 3.0));
        for w in report.buckets.windows(2) {
            assert!(w[1].cumulative_predictions >= w[0].cumulative_predictions);
        }
    }

    #[test]
    fn empty_and_unreferenced_reports() {
        let report = bucket_report(&[], None);
        assert_eq!(report.buckets.len(), BUCKETS);
        assert!(report
            .buckets
            .iter()
            .all(|b| b.predictions == 0 && b.precision().is_none()));
        let report = bucket_report(&[fp("a", 0.5, true)], None);
        assert_eq!(report.buckets[4].predictions, 1);
        assert_eq!(report.removed_correct_fraction, None);
    }

    #[test]
    fn predictions_tsv_roundtrip() {
        let preds = vec![fp("a", 0.25, true), fp("b", 1.0, false)];
        let mut out = Vec::new();
        write_predictions(&mut out, &preds).unwrap();
        let back = read_predictions(out.as_slice(), "p").unwrap();
        assert_eq!(back, preds);
        assert!(read_predictions("a\tr\to\t2\n".as_bytes(), "p").is_err());
        assert!(read_predictions("a\tr\to\t0.5\tmaybe\n".as_bytes(), "p").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(FactMiningConfig::default().validate().is_ok());
        for bad in [
            FactMiningConfig {
                min_support: 0,
                ..Default::default()
            },
            FactMiningConfig {
                min_confidence: 1.5,
                ..Default::default()
            },
            FactMiningConfig {
                max_body_atoms: 9,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
