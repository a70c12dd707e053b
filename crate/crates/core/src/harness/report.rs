use std::io::Write;

use super::grid::TrainedRelation;
use crate::engine::AugmentedKb;
use crate::error::Result;
use crate::kb::KnowledgeBase;
use crate::learned::{restrict_model, AmieOracle, Restriction, RuleModel};
use crate::oracles::{
    evaluate_oracle, write_report_tsv, Cardinality, CompletenessOracle, Cwa, GoldStandard, NoChange, OracleReport, Pca,
    Popularity, Sampling,
};

pub const ORACLE_COLUMNS: [&str; 8] = [
    "CWA",
    "PCA",
    "card_2",
    "Popularity",
    "No-change",
    "Star",
    "Class",
    "AMIE",
];

/// One row of the oracle tables.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    pub relation: String,
    /// Scores are de-biased estimates from a stratified sample.
    pub biased: bool,
    /// `(column, report)`, by default in [`ORACLE_COLUMNS`] order. The
    /// report is `None` when the oracle could not run (no old snapshot, no
    /// trained model).
    pub columns: Vec<(&'static str, Option<OracleReport>)>,
}

impl RelationReport {
    pub fn get(&self, column: &str) -> Option<&OracleReport> {
        self.columns
            .iter()
            .find(|(c, _)| *c == column)
            .and_then(|(_, r)| r.as_ref())
    }

    /// Keeps the named columns (case-insensitive); `all` keeps everything.
    pub fn retain(&mut self, names: &[String]) -> Result<()> {
        if names.iter().any(|n| n.eq_ignore_ascii_case("all")) {
            return Ok(());
        }
        for n in names {
            if !ORACLE_COLUMNS.iter().any(|c| c.eq_ignore_ascii_case(n)) {
                return Err(crate::error::Error::InvalidParameter(format!(
                    "unknown oracle `{n}`; expected `all` or one of {}",
                    ORACLE_COLUMNS.join(", ")
                )));
            }
        }
        self.columns
            .retain(|(c, _)| names.iter().any(|n| c.eq_ignore_ascii_case(n)));
        Ok(())
    }
}

/// The learned models behind the Star, Class and AMIE columns.
#[derive(Debug, Clone, Copy)]
pub struct SuiteModels<'m> {
    pub star: &'m RuleModel,
    pub class: &'m RuleModel,
    pub amie: &'m RuleModel,
}

impl TrainedRelation {
    pub fn models(&self) -> SuiteModels<'_> {
        SuiteModels {
            star: &self.star.model,
            class: &self.class.model,
            amie: &self.amie.model,
        }
    }
}

/// A full model and its two restrictions, all at the full model's thresholds.
pub fn restrictions(model: &RuleModel) -> (RuleModel, RuleModel) {
    (
        restrict_model(model, Restriction::StarOnly),
        restrict_model(model, Restriction::ClassOnly),
    )
}

fn score(oracle: &dyn CompletenessOracle, name: &str, gold: &GoldStandard, kb: &KnowledgeBase) -> Result<OracleReport> {
    evaluate_oracle(name, &oracle.decide(gold), gold, kb)
}

/// Evaluates every oracle on `gold`'s labels for `relation`.
pub fn evaluate_suite(
    aug: &AugmentedKb<'_>,
    old: Option<&KnowledgeBase>,
    gold: &GoldStandard,
    relation: &str,
    models: Option<SuiteModels<'_>>,
) -> Result<RelationReport> {
    let kb = aug.kb();
    let gold = gold.for_relation(relation);
    let popularity = Popularity::new(kb, aug.popular().percentile())?;
    let mut reports = vec![
        Some(score(&Cwa, "CWA", &gold, kb)?),
        Some(score(&Pca(kb), "PCA", &gold, kb)?),
        Some(score(&Cardinality { kb, k: 2 }, "card_2", &gold, kb)?),
        Some(score(&popularity, "Popularity", &gold, kb)?),
    ];
    reports.push(match old {
        Some(old) => Some(score(&NoChange { kb, old }, "No-change", &gold, kb)?),
        None => None,
    });
    for (name, pick) in [("Star", 0), ("Class", 1), ("AMIE", 2)] {
        reports.push(match models {
            Some(m) => {
                let model = [m.star, m.class, m.amie][pick];
                Some(score(&AmieOracle::named(aug, model, name), name, &gold, kb)?)
            }
            None => None,
        });
    }
    Ok(RelationReport {
        relation: relation.to_string(),
        biased: matches!(gold.sampling(), Sampling::Biased { .. }),
        columns: ORACLE_COLUMNS.into_iter().zip(reports).collect(),
    })
}

/// Flat `oracle TAB relation TAB precision TAB recall TAB f1` rows.
pub fn write_tsv<W: Write>(w: W, rows: &[RelationReport]) -> std::io::Result<()> {
    let reports: Vec<OracleReport> = rows
        .iter()
        .flat_map(|r| r.columns.iter().filter_map(|(_, rep)| rep.clone()))
        .collect();
    write_report_tsv(w, &reports)
}

fn pct(v: f64) -> String {
    format!("{:.2}", v)
}

fn pr_cell(r: &Option<OracleReport>) -> String {
    match r {
        Some(OracleReport {
            precision: Some(p),
            recall,
            ..
        }) => format!("{} / {}", pct(*p), recall.map_or("NA".into(), pct)),
        _ => "NA".into(),
    }
}

fn f1_cell(r: &Option<OracleReport>) -> String {
    match r {
        Some(r) => r.f1.map_or("NA".into(), pct),
        None => "NA".into(),
    }
}

fn table<W: Write>(
    w: &mut W,
    rows: &[RelationReport],
    cell: fn(&Option<OracleReport>) -> String,
) -> std::io::Result<()> {
    let names: Vec<&str> = rows
        .first()
        .map(|r| r.columns.iter().map(|c| c.0).collect())
        .unwrap_or_default();
    writeln!(w, "| Relation | {} |", names.join(" | "))?;
    writeln!(w, "|---|{}", "---|".repeat(names.len()))?;
    for row in rows {
        let mark = if row.biased { "*" } else { "" };
        let cells: Vec<String> = row.columns.iter().map(|(_, r)| cell(r)).collect();
        writeln!(w, "| {}{} | {} |", row.relation, mark, cells.join(" | "))?;
    }
    Ok(())
}

/// Precision/recall and F1 tables. Relations marked `*` were evaluated on a
/// biased sample.
pub fn write_markdown<W: Write>(mut w: W, rows: &[RelationReport]) -> std::io::Result<()> {
    writeln!(w, "## Precision / recall\n")?;
    table(&mut w, rows, pr_cell)?;
    writeln!(w, "\n## F1\n")?;
    table(&mut w, rows, f1_cell)?;
    if rows.iter().any(|r| r.biased) {
        writeln!(w, "\n`*` biased sample; scores are de-biased estimates.")?;
    }
    Ok(())
}
