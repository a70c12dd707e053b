use rayon::prelude::*;

use super::sample::{cv_folds, split_train_test};
use crate::engine::{AugmentedKb, Binding, CompiledBody};
use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::learned::{allowed, better, decide, restrict_model, Restriction, RuleModel};
use crate::miner::{MiningConfig, MiningContext, Operator};
use crate::oracles::{evaluate_oracle, GoldStandard, Label, OracleDecision};
use crate::rule::{Polarity, Rule, X};

/// Threshold values tried during model selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub supports: Vec<usize>,
    pub confidences: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            supports: (1..=10).map(|i| i * 10).collect(),
            confidences: (3..=10).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

impl Grid {
    pub fn points(&self) -> Vec<(usize, f64)> {
        self.supports
            .iter()
            .flat_map(|&s| self.confidences.iter().map(move |&c| (s, c)))
            .collect()
    }

    fn lowest(&self) -> Result<(usize, f64)> {
        let s = self.supports.iter().copied().min();
        let c = self.confidences.iter().copied().min_by(f64::total_cmp);
        match (s, c) {
            (Some(s), Some(c)) => Ok((s, c)),
            _ => Err(Error::InvalidParameter("empty threshold grid".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub min_support: usize,
    pub min_confidence: f64,
    /// Mean cross-validated F1.
    pub f1: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub folds: usize,
    pub grid: Grid,
    /// Everything but the thresholds, which come from the grid.
    pub base: MiningConfig,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            folds: 4,
            grid: Grid::default(),
            base: MiningConfig::default(),
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub model: RuleModel,
    pub point: GridPoint,
}

/// Models chosen for one relation, plus the split they were chosen on.
#[derive(Debug, Clone)]
pub struct TrainedRelation {
    pub relation: String,
    pub train: GoldStandard,
    pub test: GoldStandard,
    pub amie: Selection,
    pub star: Selection,
    pub class: Selection,
}

/// Which rules fire on which validation examples, computed once per fold so
/// that every grid point reuses it.
struct FiringTable {
    rules: Vec<Rule>,
    /// `fires[e][i]`: rule `i` fires on example `e`.
    fires: Vec<Vec<bool>>,
    entities: Vec<(String, String)>,
}

impl FiringTable {
    fn new(aug: &AugmentedKb<'_>, model: &RuleModel, validation: &GoldStandard) -> Self {
        let kb = aug.kb();
        let rules = model.rules();
        let compiled: Vec<CompiledBody> = rules.iter().map(|r| CompiledBody::compile(aug, &r.body)).collect();
        let entities: Vec<(String, String)> = validation.labels().map(|l| (l.entity, l.relation)).collect();
        let fires = entities
            .iter()
            .map(|(e, rel)| {
                let id = kb.term_id(e);
                rules
                    .iter()
                    .zip(&compiled)
                    .map(|(rule, body)| {
                        rule.completeness_head().map(|h| h.1) == Some(rel.as_str())
                            && match id {
                                Some(x) => {
                                    let mut b = Binding::default();
                                    b.set(X, x);
                                    body.satisfiable(aug, &mut b)
                                }
                                None => aug.body_holds_unknown(&rule.body),
                            }
                    })
                    .collect()
            })
            .collect();
        FiringTable { rules, fires, entities }
    }

    fn decisions(&self, min_support: usize, min_confidence: f64, mode: Option<Restriction>) -> Vec<OracleDecision> {
        let keep: Vec<bool> = self
            .rules
            .iter()
            .map(|r| {
                r.support >= min_support
                    && r.confidence + 1e-12 >= min_confidence
                    && mode.is_none_or(|m| r.body.iter().all(|a| allowed(m, a)))
            })
            .collect();
        self.entities
            .iter()
            .zip(&self.fires)
            .map(|((e, rel), fires)| {
                let (mut c, mut i) = (None, None);
                for (k, rule) in self.rules.iter().enumerate() {
                    if !(keep[k] && fires[k]) {
                        continue;
                    }
                    match rule.completeness_head() {
                        Some((Polarity::Complete, _)) => c = better(c, rule),
                        _ => i = better(i, rule),
                    }
                }
                OracleDecision {
                    entity: e.clone(),
                    relation: rel.clone(),
                    predicted_complete: decide(c, i),
                }
            })
            .collect()
    }
}

fn mine_model(aug: &AugmentedKb<'_>, training: &GoldStandard, config: &MiningConfig) -> Result<RuleModel> {
    if training.is_empty() {
        return RuleModel::new(Vec::new(), config.clone());
    }
    let ctx = MiningContext::new(aug, training, config.clone())?;
    RuleModel::new(ctx.mine(), config.clone())
}

/// Mean F1 over folds of the model each fold mined, cut at one grid point.
pub fn cv_mean_f1(kb: &KnowledgeBase, folds: &[(&GoldStandard, &[OracleDecision])]) -> Result<f64> {
    let mut sum = 0.0;
    for (gold, decisions) in folds {
        sum += evaluate_oracle("AMIE", decisions, gold, kb)?.f1_or_zero();
    }
    Ok(sum / folds.len().max(1) as f64)
}

fn select(
    kb: &KnowledgeBase,
    grid: &Grid,
    folds: &[(GoldStandard, FiringTable)],
    mode: Option<Restriction>,
) -> Result<GridPoint> {
    let mut best: Option<GridPoint> = None;
    for (s, c) in grid.points() {
        let decisions: Vec<Vec<OracleDecision>> = folds.iter().map(|(_, t)| t.decisions(s, c, mode)).collect();
        let tables: Vec<(&GoldStandard, &[OracleDecision])> = folds
            .iter()
            .zip(&decisions)
            .map(|((g, _), d)| (g, d.as_slice()))
            .collect();
        let f1 = cv_mean_f1(kb, &tables)?;
        let point = GridPoint {
            min_support: s,
            min_confidence: c,
            f1,
        };
        let replace = match best {
            None => true,
            Some(b) if f1 > b.f1 + 1e-12 => true,
            Some(b) if (f1 - b.f1).abs() <= 1e-12 => s > b.min_support || (s == b.min_support && c > b.min_confidence),
            _ => false,
        };
        if replace {
            best = Some(point);
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("empty threshold grid".into()))
}

/// Splits the relation's labels 80/20, picks thresholds by k-fold
/// cross-validation on the training part and retrains there. The held-out
/// part is returned untouched for a separate evaluation.
///
/// The full model and the star-only and class-only restrictions each get
/// their own grid point. Ties prefer the higher support threshold, then the
/// higher confidence threshold.
pub fn train_and_select(
    kb: &KnowledgeBase,
    old: Option<&KnowledgeBase>,
    gold: &GoldStandard,
    relation: &str,
    options: &TrainOptions,
) -> Result<TrainedRelation> {
    let gold = gold.for_relation(relation);
    for label in [Label::Complete, Label::Incomplete] {
        let n = gold.count(label);
        if n < options.folds {
            return Err(Error::InsufficientLabels {
                relation: relation.to_string(),
                detail: format!("{n} {label} labels, need at least {}", options.folds),
            });
        }
    }

    let (min_support, min_confidence) = options.grid.lowest()?;
    let mut config = MiningConfig {
        min_support,
        min_confidence,
        ..options.base.clone()
    };
    if old.is_none() {
        config.operators.remove(Operator::InstantiateUnchanged);
    }
    let aug = AugmentedKb::new(kb, old, config.popularity_percentile)?;

    let (train, test) = split_train_test(&gold, options.train_fraction, options.seed);
    let folds = cv_folds(&train, options.folds, options.seed.wrapping_add(1))?;
    let fold_models: Vec<RuleModel> = folds
        .par_iter()
        .map(|(fit, _)| mine_model(&aug, fit, &config))
        .collect::<Result<_>>()?;
    let final_model = mine_model(&aug, &train, &config)?;
    if final_model.is_empty() && fold_models.iter().all(RuleModel::is_empty) {
        return Err(Error::EmptyModel(relation.to_string()));
    }

    let tables: Vec<(GoldStandard, FiringTable)> = folds
        .into_par_iter()
        .zip(fold_models.par_iter())
        .map(|((_, val), model)| {
            let table = FiringTable::new(&aug, model, &val);
            (val, table)
        })
        .collect();

    let choose = |mode: Option<Restriction>| -> Result<Selection> {
        let point = select(kb, &options.grid, &tables, mode)?;
        let model = final_model.with_thresholds(point.min_support, point.min_confidence);
        let model = match mode {
            Some(m) => restrict_model(&model, m),
            None => model,
        };
        Ok(Selection { model, point })
    };

    Ok(TrainedRelation {
        relation: relation.to_string(),
        amie: choose(None)?,
        star: choose(Some(Restriction::StarOnly))?,
        class: choose(Some(Restriction::ClassOnly))?,
        train,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::Atom;

    /// hasNationality is functional; half the people lost it.
    fn functional() -> (KnowledgeBase, GoldStandard) {
        let mut b = KnowledgeBase::builder();
        let mut gold = GoldStandard::default();
        for i in 0..200 {
            let e = format!("p{i:03}");
            b.add(&e, "type", "Person").unwrap();
            if i % 2 == 0 {
                b.add(&e, "hasNationality", "fr").unwrap();
            }
            gold.insert(&e, "hasNationality", Label::from_bool(i % 2 == 0)).unwrap();
        }
        b.declare_domain("hasNationality", "Person");
        (b.build().unwrap(), gold)
    }

    fn small_options() -> TrainOptions {
        TrainOptions {
            grid: Grid {
                supports: vec![10, 20],
                confidences: vec![0.5, 1.0],
            },
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn grid_defaults() {
        let g = Grid::default();
        assert_eq!(g.supports, [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]);
        assert_eq!(g.confidences.len(), 8);
        assert_eq!(g.points().len(), 80);
    }

    #[test]
    fn selects_the_pca_rule_and_the_strictest_tied_point() {
        let (kb, gold) = functional();
        let trained = train_and_select(&kb, None, &gold, "hasNationality", &small_options()).unwrap();
        assert_eq!(trained.amie.point.f1, 1.0);
        assert_eq!(
            (trained.amie.point.min_support, trained.amie.point.min_confidence),
            (20, 1.0)
        );
        let pca = Atom::MoreThan {
            var: X,
            relation: "hasNationality".into(),
            bound: 0,
        };
        assert!(trained
            .amie
            .model
            .rules_for("hasNationality", Polarity::Complete)
            .iter()
            .any(|r| r.body == [pca.clone()]));
        assert_eq!(trained.train.len() + trained.test.len(), gold.len());
        assert_eq!(trained.test.len(), 40);
    }

    #[test]
    fn too_few_labels_names_the_relation() {
        let (kb, _) = functional();
        let mut gold = GoldStandard::default();
        gold.insert("p000", "hasNationality", Label::Complete).unwrap();
        match train_and_select(&kb, None, &gold, "hasNationality", &small_options()) {
            Err(Error::InsufficientLabels { relation, .. }) => assert_eq!(relation, "hasNationality"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unminable_relation_reports_empty_model() {
        let (kb, _) = functional();
        let mut gold = GoldStandard::default();
        for i in 0..8 {
            gold.insert(format!("p{i:03}"), "hasNationality", Label::from_bool(i % 2 == 0))
                .unwrap();
        }
        assert!(matches!(
            train_and_select(&kb, None, &gold, "hasNationality", &small_options()),
            Err(Error::EmptyModel(_))
        ));
    }
}
