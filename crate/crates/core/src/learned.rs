//! The learned completeness oracle: a mined rule set plus the decision rule
//! that weighs firing `complete` rules against firing `incomplete` rules.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::engine::{AugmentedKb, Binding, CompiledBody};
use crate::error::{Error, Result};
use crate::miner::{sort_rules, MiningConfig};
use crate::oracles::{CompletenessOracle, OracleDecision};
use crate::rule::{parse_rule, write_rules, Atom, Polarity, Rule, X};

/// Completeness rules grouped by head relation and polarity.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleModel {
    by_head: BTreeMap<(String, Polarity), Vec<Rule>>,
    config: MiningConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// Bodies made of relational atoms only.
    StarOnly,
    /// Bodies made of `type` and `notype` atoms only.
    ClassOnly,
}

impl RuleModel {
    pub fn new(rules: Vec<Rule>, config: MiningConfig) -> Result<Self> {
        let mut by_head: BTreeMap<(String, Polarity), Vec<Rule>> = BTreeMap::new();
        for rule in rules {
            let Some((polarity, relation)) = rule.completeness_head() else {
                return Err(Error::InvalidParameter(format!("not a completeness rule: {rule}")));
            };
            by_head.entry((relation.to_string(), polarity)).or_default().push(rule);
        }
        for rules in by_head.values_mut() {
            sort_rules(rules);
        }
        Ok(RuleModel { by_head, config })
    }

    pub fn config(&self) -> &MiningConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.by_head.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rules_for(&self, relation: &str, polarity: Polarity) -> &[Rule] {
        self.by_head
            .get(&(relation.to_string(), polarity))
            .map_or(&[], Vec::as_slice)
    }

    /// All rules in output order.
    pub fn rules(&self) -> Vec<Rule> {
        let mut all: Vec<Rule> = self.by_head.values().flatten().cloned().collect();
        sort_rules(&mut all);
        all
    }

    pub fn relations(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.by_head.keys().map(|(r, _)| r.as_str()).collect();
        out.dedup();
        out
    }

    /// Rules meeting stricter thresholds, with the config updated to match.
    pub fn with_thresholds(&self, min_support: usize, min_confidence: f64) -> RuleModel {
        let config = MiningConfig {
            min_support,
            min_confidence,
            ..self.config.clone()
        };
        self.filtered(config, |r| {
            r.support >= min_support && r.confidence + 1e-12 >= min_confidence
        })
    }

    fn filtered(&self, config: MiningConfig, keep: impl Fn(&Rule) -> bool) -> RuleModel {
        let by_head = self
            .by_head
            .iter()
            .map(|(k, rules)| (k.clone(), rules.iter().filter(|r| keep(r)).cloned().collect::<Vec<_>>()))
            .filter(|(_, rules)| !rules.is_empty())
            .collect();
        RuleModel { by_head, config }
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.config.to_header())?;
        write_rules(w, &self.rules())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads a rule file. The `# config` header is optional; without it the
    /// default config is recorded.
    pub fn from_reader<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut config = MiningConfig::default();
        let mut rules = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let line = line.trim_end_matches('\r');
            if line.starts_with("# config") {
                config = MiningConfig::from_header(line)?;
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let rule = parse_rule(line).map_err(|m| Error::parse(source_name, i + 1, m))?;
            rules.push(rule);
        }
        RuleModel::new(rules, config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        RuleModel::from_reader(BufReader::new(file), &path.display().to_string())
    }
}

pub(crate) fn allowed(mode: Restriction, atom: &Atom) -> bool {
    match mode {
        Restriction::StarOnly => matches!(atom, Atom::Relation { .. }),
        Restriction::ClassOnly => matches!(atom, Atom::Type { .. } | Atom::NoType { .. }),
    }
}

/// Keeps only rules whose bodies use the atoms of one oracle family.
pub fn restrict_model(model: &RuleModel, mode: Restriction) -> RuleModel {
    model.filtered(model.config.clone(), |r| r.body.iter().all(|a| allowed(mode, a)))
}

/// Why the oracle answered the way it did for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub predicted_complete: bool,
    /// Best firing complete rule as (confidence, support).
    pub best_complete: Option<(f64, usize)>,
    pub best_incomplete: Option<(f64, usize)>,
}

impl Verdict {
    /// Only incomplete rules fired: the model actively asserts incompleteness.
    pub fn asserts_incomplete(&self) -> bool {
        self.best_complete.is_none() && self.best_incomplete.is_some()
    }
}

pub(crate) fn decide(best_complete: Option<(f64, usize)>, best_incomplete: Option<(f64, usize)>) -> bool {
    match (best_complete, best_incomplete) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some((cc, sc)), Some((ci, si))) => cc > ci || (cc == ci && sc > si),
    }
}

pub(crate) fn better(a: Option<(f64, usize)>, rule: &Rule) -> Option<(f64, usize)> {
    let cand = (rule.confidence, rule.support);
    match a {
        Some(best) if best.0 > cand.0 || (best.0 == cand.0 && best.1 >= cand.1) => Some(best),
        _ => Some(cand),
    }
}

struct CompiledRule {
    body: CompiledBody,
    rule: Rule,
}

/// A rule model compiled against one augmented KB.
pub struct AmieOracle<'a> {
    aug: &'a AugmentedKb<'a>,
    name: String,
    compiled: BTreeMap<(String, Polarity), Vec<CompiledRule>>,
}

impl<'a> AmieOracle<'a> {
    pub fn new(aug: &'a AugmentedKb<'a>, model: &RuleModel) -> Self {
        AmieOracle::named(aug, model, "AMIE")
    }

    pub fn named(aug: &'a AugmentedKb<'a>, model: &RuleModel, name: &str) -> Self {
        let compiled = model
            .by_head
            .iter()
            .map(|(k, rules)| {
                let compiled = rules
                    .iter()
                    .map(|r| CompiledRule {
                        body: CompiledBody::compile(aug, &r.body),
                        rule: r.clone(),
                    })
                    .collect();
                (k.clone(), compiled)
            })
            .collect();
        AmieOracle {
            aug,
            name: name.to_string(),
            compiled,
        }
    }

    fn best(&self, entity: &str, relation: &str, polarity: Polarity) -> Option<(f64, usize)> {
        let rules = self.compiled.get(&(relation.to_string(), polarity))?;
        let id = self.aug.kb().term_id(entity);
        let mut best = None;
        for c in rules {
            let fires = match id {
                Some(e) => {
                    let mut b = Binding::default();
                    b.set(X, e);
                    c.body.satisfiable(self.aug, &mut b)
                }
                None => self.aug.body_holds_unknown(&c.rule.body),
            };
            if fires {
                best = better(best, &c.rule);
            }
        }
        best
    }

    pub fn verdict(&self, entity: &str, relation: &str) -> Verdict {
        let best_complete = self.best(entity, relation, Polarity::Complete);
        let best_incomplete = self.best(entity, relation, Polarity::Incomplete);
        Verdict {
            predicted_complete: decide(best_complete, best_incomplete),
            best_complete,
            best_incomplete,
        }
    }

    /// One decision per entity of the relation's evaluation domain.
    pub fn predict_all(&self, relation: &str) -> Vec<OracleDecision> {
        self.aug
            .kb()
            .evaluation_domain(relation)
            .into_iter()
            .map(|e| OracleDecision {
                entity: e.to_string(),
                relation: relation.to_string(),
                predicted_complete: self.is_complete(e, relation),
            })
            .collect()
    }
}

impl CompletenessOracle for AmieOracle<'_> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn is_complete(&self, entity: &str, relation: &str) -> bool {
        self.verdict(entity, relation).predicted_complete
    }
}

pub fn predict(aug: &AugmentedKb<'_>, model: &RuleModel, entity: &str, relation: &str) -> bool {
    let mut best = [None, None];
    for (i, polarity) in [Polarity::Complete, Polarity::Incomplete].into_iter().enumerate() {
        for rule in model.rules_for(relation, polarity) {
            if aug.body_holds(&rule.body, entity) {
                best[i] = better(best[i], rule);
            }
        }
    }
    decide(best[0], best[1])
}

pub fn predict_all(aug: &AugmentedKb<'_>, model: &RuleModel, relation: &str) -> Vec<OracleDecision> {
    AmieOracle::new(aug, model).predict_all(relation)
}
