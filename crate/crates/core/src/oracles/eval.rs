use std::collections::HashMap;
use std::io::Write;

use super::gold::{GoldStandard, Sampling};
use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleDecision {
    pub entity: String,
    pub relation: String,
    pub predicted_complete: bool,
}

/// Precision, recall and F1 of one oracle on one gold standard. Counts are
/// stratum-weighted sums; `None` marks an undefined ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub oracle: String,
    pub relation: String,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub true_positives: f64,
    pub predicted_positives: f64,
    pub actual_positives: f64,
}

impl OracleReport {
    /// F1 with undefined cells read as zero, for model selection.
    pub fn f1_or_zero(&self) -> f64 {
        self.f1.unwrap_or(0.0)
    }
}

fn f1_score(precision: Option<f64>, recall: Option<f64>) -> Option<f64> {
    match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        (None, _) => Some(0.0),
        (Some(_), None) => None,
    }
}

/// Scores `decisions` against `gold`.
///
/// For a biased gold standard each labeled pair is weighted by
/// `population proportion / sample proportion` of its stratum, the stratum
/// being whether the subject has any object for the relation in `kb`.
pub fn evaluate_oracle(
    oracle: &str,
    decisions: &[OracleDecision],
    gold: &GoldStandard,
    kb: &KnowledgeBase,
) -> Result<OracleReport> {
    let lookup: HashMap<(&str, &str), bool> = decisions
        .iter()
        .map(|d| ((d.entity.as_str(), d.relation.as_str()), d.predicted_complete))
        .collect();

    let weights = match gold.sampling() {
        Sampling::Uniform => None,
        Sampling::Biased { has_object, no_object } => {
            let total = gold.len() as f64;
            let with = gold
                .labels()
                .filter(|l| kb.object_count(&l.entity, &l.relation) > 0)
                .count() as f64;
            let without = total - with;
            let w = |pop: f64, n: f64| if n > 0.0 { pop / (n / total) } else { 0.0 };
            Some((w(has_object, with), w(no_object, without)))
        }
    };

    let (mut tp, mut pp, mut ap) = (0.0, 0.0, 0.0);
    for l in gold.labels() {
        let predicted =
            *lookup
                .get(&(l.entity.as_str(), l.relation.as_str()))
                .ok_or_else(|| Error::MissingDecision {
                    entity: l.entity.clone(),
                    relation: l.relation.clone(),
                })?;
        let weight = match weights {
            None => 1.0,
            Some((with, without)) => {
                if kb.object_count(&l.entity, &l.relation) > 0 {
                    with
                } else {
                    without
                }
            }
        };
        let complete = l.label.is_complete();
        if predicted {
            pp += weight;
        }
        if complete {
            ap += weight;
        }
        if predicted && complete {
            tp += weight;
        }
    }

    let precision = (pp > 0.0).then(|| tp / pp);
    let recall = (ap > 0.0).then(|| tp / ap);
    Ok(OracleReport {
        oracle: oracle.to_string(),
        relation: gold.relation_name(),
        precision,
        recall,
        f1: f1_score(precision, recall),
        true_positives: tp,
        predicted_positives: pp,
        actual_positives: ap,
    })
}

pub(crate) fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.4}"),
        None => "NA".to_string(),
    }
}

/// `oracle TAB relation TAB precision TAB recall TAB f1`, `NA` for undefined cells.
pub fn write_report_tsv<W: Write>(mut w: W, reports: &[OracleReport]) -> std::io::Result<()> {
    writeln!(w, "oracle\trelation\tprecision\trecall\tf1")?;
    for r in reports {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            r.oracle,
            r.relation,
            fmt_cell(r.precision),
            fmt_cell(r.recall),
            fmt_cell(r.f1)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{cwa, pca, Label};

    fn kb_t() -> KnowledgeBase {
        KnowledgeBase::from_facts([
            ("alice", "citizenOf", "fr"),
            ("bob", "citizenOf", "fr"),
            ("bob", "citizenOf", "de"),
        ])
        .unwrap()
    }

    fn gold_t() -> GoldStandard {
        let mut g = GoldStandard::default();
        g.insert("alice", "citizenOf", Label::Complete).unwrap();
        g.insert("bob", "citizenOf", Label::Complete).unwrap();
        g.insert("carol", "citizenOf", Label::Incomplete).unwrap();
        g
    }

    fn decide(gold: &GoldStandard, f: impl Fn(&str, &str) -> bool) -> Vec<OracleDecision> {
        gold.labels()
            .map(|l| OracleDecision {
                predicted_complete: f(&l.entity, &l.relation),
                entity: l.entity,
                relation: l.relation,
            })
            .collect()
    }

    #[test]
    fn pca_and_cwa_on_kb_t() {
        let kb = kb_t();
        let gold = gold_t();
        let r = evaluate_oracle("PCA", &decide(&gold, |e, r| pca(&kb, e, r)), &gold, &kb).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (Some(1.0), Some(1.0), Some(1.0)));
        let r = evaluate_oracle("CWA", &decide(&gold, cwa), &gold, &kb).unwrap();
        assert!((r.precision.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.recall, Some(1.0));
        assert!((r.f1.unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn no_predictions_is_undefined_precision() {
        let kb = kb_t();
        let gold = gold_t();
        let r = evaluate_oracle("none", &decide(&gold, |_, _| false), &gold, &kb).unwrap();
        assert_eq!(r.precision, None);
        assert_eq!(r.f1, Some(0.0));
        assert_eq!(r.recall, Some(0.0));
    }

    #[test]
    fn missing_decision_is_an_error() {
        let kb = kb_t();
        let gold = gold_t();
        let mut d = decide(&gold, cwa);
        d.pop();
        assert!(matches!(
            evaluate_oracle("x", &d, &gold, &kb),
            Err(Error::MissingDecision { .. })
        ));
    }

    #[test]
    fn stratum_weights() {
        // 100 labeled subjects with an object, 100 without; population 1% / 99%.
        let mut facts = Vec::new();
        let mut gold = GoldStandard::new(Sampling::Uniform);
        for i in 0..100 {
            facts.push(format!("h{i}"));
            gold.insert(format!("h{i}"), "r", Label::Complete).unwrap();
            gold.insert(format!("n{i}"), "r", Label::Incomplete).unwrap();
        }
        gold.set_sampling(Sampling::Biased {
            has_object: 0.01,
            no_object: 0.99,
        })
        .unwrap();
        let kb = KnowledgeBase::from_facts(facts.iter().map(|s| (s.as_str(), "r", "o"))).unwrap();
        let r = evaluate_oracle("CWA", &decide(&gold, cwa), &gold, &kb).unwrap();
        // every pair predicted: pp = 100 * 0.01/0.5 + 100 * 0.99/0.5
        assert!((r.predicted_positives - 200.0).abs() < 1e-9);
        assert!((r.true_positives - 2.0).abs() < 1e-9);
        assert!((r.precision.unwrap() - 0.01).abs() < 1e-12);
    }
}
