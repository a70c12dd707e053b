use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use kbc_core::harness::{
    autogen_gold, evaluate_suite, load_relations, restrictions, sample, split_train_test, train_and_select,
    write_markdown, write_tsv, Grid, RelationCategory, RelationDecl, RelationReport, SuiteModels, TrainOptions,
};
use kbc_core::kb::{load_kb, Vocabulary};
use kbc_core::predict::{
    bucket_report, filter_predictions, load_predictions, mine_fact_rules, predict_facts, unfiltered,
    write_bucket_markdown, write_bucket_tsv, write_predictions, FactMiningConfig,
};
use kbc_core::{
    mine, write_rules, AugmentedKb, GoldStandard, KnowledgeBase, LoadOptions, MiningConfig, Operator, OperatorSet,
    RuleModel, Sampling, Scenario, SynthSpec,
};

use crate::{
    Cli, Command, EvalArgs, Format, GenSynthArgs, GoldArgs, GridArgs, KbArgs, MineArgs, MiningArgs, ScenarioName,
};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenSynth(a) => gen_synth(cli, a),
        Command::Mine(a) => cmd_mine(cli, a),
        Command::Eval(a) => eval(cli, a),
        Command::Grid(a) => grid(cli, a),
        Command::PredictFacts(a) => {
            let kb = load(cli, &a.kb, &[])?;
            let config = FactMiningConfig {
                min_support: a.support,
                min_confidence: a.confidence,
                max_body_atoms: a.max_body,
                pca: !a.cwa_confidence,
                instantiate: a.instantiate,
            };
            let rules = mine_fact_rules(&kb, &config)?;
            if let Some(path) = &a.rules_out {
                write_file(path, |w| write_rules(w, &rules))?;
            }
            let preds = predict_facts(&kb, &rules)?;
            eprintln!("{} rules, {} predictions", rules.len(), preds.len());
            emit(a.out.as_deref(), |w| write_predictions(w, &unfiltered(&preds)))
        }
        Command::FilterFacts(a) => {
            let (kb, old) = load_pair(cli, &a.kb, &[])?;
            let mut rules = Vec::new();
            let mut config = None;
            for path in &a.model {
                let m = RuleModel::load(path)?;
                config.get_or_insert_with(|| m.config().clone());
                rules.extend(m.rules());
            }
            let model = RuleModel::new(rules, config.unwrap_or_default())?;
            let aug = AugmentedKb::new(&kb, old.as_ref(), model.config().popularity_percentile)?;
            let preds: Vec<_> = load_predictions(&a.predictions)?
                .into_iter()
                .map(|p| p.prediction)
                .collect();
            let out = filter_predictions(&preds, &aug, &model);
            eprintln!(
                "{} of {} predictions kept",
                out.iter().filter(|p| p.kept).count(),
                out.len()
            );
            emit(a.out.as_deref(), |w| write_predictions(w, &out))
        }
        Command::Report(a) => {
            let preds = load_predictions(&a.predictions)?;
            let ideal = a.ideal.as_ref().map(|p| load(cli, p, &[])).transpose()?;
            let report = bucket_report(&preds, ideal.as_ref());
            emit(a.out.as_deref(), |w| match a.format {
                Format::Markdown => write_bucket_markdown(w, &report),
                Format::Tsv => write_bucket_tsv(w, &report),
            })
        }
    }
}

fn load_options(cli: &Cli, domains: &[RelationDecl]) -> LoadOptions {
    LoadOptions {
        vocabulary: Vocabulary {
            type_relation: cli.type_relation.clone(),
            subclass_relation: cli.subclass_relation.clone(),
            ..Vocabulary::default()
        },
        invert: cli.invert.iter().cloned().collect(),
        domains: domains
            .iter()
            .filter_map(|d| d.domain.clone().map(|c| (d.relation.clone(), c)))
            .collect(),
    }
}

fn load(cli: &Cli, path: &Path, decls: &[RelationDecl]) -> Result<KnowledgeBase> {
    let (kb, report) = load_kb(path, &load_options(cli, decls))?;
    eprintln!(
        "{}: {} lines, {} facts, {} entities",
        path.display(),
        report.lines,
        report.facts,
        report.entities
    );
    Ok(kb)
}

fn load_pair(cli: &Cli, args: &KbArgs, decls: &[RelationDecl]) -> Result<(KnowledgeBase, Option<KnowledgeBase>)> {
    let kb = load(cli, &args.kb, decls)?;
    let old = args.old_kb.as_ref().map(|p| load(cli, p, decls)).transpose()?;
    Ok((kb, old))
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|()| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

/// Writes to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match path {
        Some(p) => write_file(p, f),
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w).and_then(|()| w.flush()).context("writing to stdout")
        }
    }
}

fn seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(0)
}

fn gen_synth(cli: &Cli, a: &GenSynthArgs) -> Result<()> {
    let data = match (&a.spec, a.scenario) {
        (Some(path), _) => {
            let mut spec = SynthSpec::load(path)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            if let Some(n) = a.entities {
                spec.entities = n;
            }
            kbc_core::generate(&spec)?
        }
        (None, Some(name)) => {
            let scenario = match name {
                ScenarioName::PcaFunctional => Scenario::PcaFunctional,
                ScenarioName::LivingPeople => Scenario::LivingPeople,
                ScenarioName::HasParent => Scenario::HasParent,
                ScenarioName::Sparse => Scenario::Sparse,
                ScenarioName::CoResidence => Scenario::CoResidence,
            };
            scenario.generate(a.entities.unwrap_or(scenario.default_entities()), seed(cli))?
        }
        (None, None) => bail!("one of --spec or --scenario is required"),
    };
    data.write_outputs(&a.out)?;
    eprintln!(
        "wrote {} ideal facts, {} observed facts, {} labels to {}",
        data.ideal.len(),
        data.observed.len(),
        data.gold.len(),
        a.out.display()
    );
    Ok(())
}

/// Mining settings as they appear in a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConfigFile {
    min_support: Option<usize>,
    min_confidence: Option<f64>,
    max_body_atoms: Option<usize>,
    star_size: Option<usize>,
    popularity_percentile: Option<f64>,
    operators: Option<Vec<String>>,
}

fn operators(names: &[String]) -> Result<OperatorSet> {
    Ok(names
        .iter()
        .map(|n| n.parse::<Operator>())
        .collect::<Result<OperatorSet, _>>()?)
}

fn mining_config(a: &MiningArgs) -> Result<MiningConfig> {
    let file: ConfigFile = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => ConfigFile::default(),
    };
    let mut c = MiningConfig::default();
    c.min_support = a.support.or(file.min_support).unwrap_or(c.min_support);
    c.min_confidence = a.confidence.or(file.min_confidence).unwrap_or(c.min_confidence);
    c.max_body_atoms = a.max_body.or(file.max_body_atoms).unwrap_or(c.max_body_atoms);
    c.star_size = a.star_size.or(file.star_size).unwrap_or(c.star_size);
    c.popularity_percentile = a
        .popularity
        .or(file.popularity_percentile)
        .unwrap_or(c.popularity_percentile);
    if let Some(ops) = a.operators.as_ref().or(file.operators.as_ref()) {
        c.operators = operators(ops)?;
    }
    c.validate()?;
    Ok(c)
}

/// Relation declarations, the KB pair, and labels grouped by relation.
struct Labeled {
    kb: KnowledgeBase,
    old: Option<KnowledgeBase>,
    per_relation: Vec<(String, GoldStandard)>,
}

fn labeled(cli: &Cli, kb_args: &KbArgs, g: &GoldArgs) -> Result<Labeled> {
    let decls = g
        .relations
        .as_ref()
        .map(load_relations)
        .transpose()?
        .unwrap_or_default();
    let (kb, old) = load_pair(cli, kb_args, &decls)?;
    let gold = g.gold.as_ref().map(GoldStandard::load).transpose()?;
    if gold.is_none() && decls.is_empty() {
        bail!("labels needed: pass --gold or --relations");
    }
    let mut relations: Vec<String> = if !g.only.is_empty() {
        g.only.clone()
    } else if !decls.is_empty() {
        decls.iter().map(|d| d.relation.clone()).collect()
    } else {
        gold.as_ref()
            .map(|g| g.relations().into_iter().map(String::from).collect())
            .unwrap_or_default()
    };
    relations.dedup();

    let mut per_relation = Vec::new();
    for (i, rel) in relations.iter().enumerate() {
        let labels = match &gold {
            Some(gold) => gold.for_relation(rel),
            None => {
                let decl = decls
                    .iter()
                    .find(|d| &d.relation == rel)
                    .with_context(|| format!("relation `{rel}` is not in the relations file"))?;
                if decl.category == RelationCategory::ZeroOrMore {
                    eprintln!("skipping `{rel}`: zero-or-more relations need labels from --gold");
                    continue;
                }
                autogen_gold(&kb, rel, decl.category)?
            }
        };
        if labels.is_empty() {
            eprintln!("skipping `{rel}`: no labels");
            continue;
        }
        let labels = match g.sample {
            Some(n) => sample(&labels, rel, &kb, n, seed(cli).wrapping_add(i as u64))?,
            None => labels,
        };
        per_relation.push((rel.clone(), labels));
    }
    Ok(Labeled { kb, old, per_relation })
}

fn merged(per_relation: &[(String, GoldStandard)]) -> Result<GoldStandard> {
    Ok(GoldStandard::from_labels(
        per_relation.iter().flat_map(|(_, g)| g.labels()),
        Sampling::Uniform,
    )?)
}

fn cmd_mine(cli: &Cli, a: &MineArgs) -> Result<()> {
    let config = mining_config(&a.mining)?;
    let data = labeled(cli, &a.kb, &a.gold)?;
    let training = merged(&data.per_relation)?;
    let rules = mine(&data.kb, data.old.as_ref(), &training, &config)?;
    eprintln!("{} rules", rules.len());
    let model = RuleModel::new(rules, config)?;
    emit(a.out.as_deref(), |w| model.write(w))
}

fn write_rows(rows: &[RelationReport], format: Format, out: Option<&Path>) -> Result<()> {
    emit(out, |w| match format {
        Format::Markdown => write_markdown(w, rows),
        Format::Tsv => write_tsv(w, rows),
    })
}

fn eval(cli: &Cli, a: &EvalArgs) -> Result<()> {
    let data = labeled(cli, &a.kb, &a.gold)?;
    let model = a.model.as_ref().map(RuleModel::load).transpose()?;
    let restricted = model.as_ref().map(restrictions);
    let models = model
        .as_ref()
        .zip(restricted.as_ref())
        .map(|(amie, (star, class))| SuiteModels { star, class, amie });
    let aug = AugmentedKb::new(&data.kb, data.old.as_ref(), a.popularity)?;
    let mut rows = Vec::new();
    for (rel, gold) in &data.per_relation {
        let mut row = evaluate_suite(&aug, data.old.as_ref(), gold, rel, models)?;
        row.retain(&a.oracle)?;
        rows.push(row);
    }
    write_rows(&rows, a.format, a.out.as_deref())
}

fn file_stem(relation: &str) -> String {
    relation
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn grid(cli: &Cli, a: &GridArgs) -> Result<()> {
    let base = mining_config(&a.mining)?;
    let data = labeled(cli, &a.kb, &a.gold)?;
    let mut grid = Grid::default();
    if let Some(s) = &a.supports {
        grid.supports = s.clone();
    }
    if let Some(c) = &a.confidences {
        grid.confidences = c.clone();
    }
    let options = TrainOptions {
        folds: a.folds,
        grid,
        base: base.clone(),
        train_fraction: a.train_fraction,
        seed: seed(cli),
    };
    let dir: PathBuf = a.out.clone();
    for sub in ["models", "test"] {
        std::fs::create_dir_all(dir.join(sub)).with_context(|| format!("creating {}", dir.join(sub).display()))?;
    }
    let aug = AugmentedKb::new(&data.kb, data.old.as_ref(), base.popularity_percentile)?;
    let mut rows = Vec::new();
    let mut selected = String::from("relation\tmodel\tmin_support\tmin_confidence\tcv_f1\n");
    for (rel, gold) in &data.per_relation {
        let stem = file_stem(rel);
        let row = match train_and_select(&data.kb, data.old.as_ref(), gold, rel, &options) {
            Ok(t) => {
                for (name, s) in [("amie", &t.amie), ("star", &t.star), ("class", &t.class)] {
                    s.model.save(dir.join("models").join(format!("{stem}.{name}.rules")))?;
                    let p = &s.point;
                    selected.push_str(&format!(
                        "{rel}\t{name}\t{}\t{}\t{:.4}\n",
                        p.min_support, p.min_confidence, p.f1
                    ));
                }
                t.test.save(dir.join("test").join(format!("{stem}.tsv")))?;
                evaluate_suite(&aug, data.old.as_ref(), &t.test, rel, Some(t.models()))?
            }
            Err(e) => {
                eprintln!("`{rel}`: no learned model ({e}); reporting the fixed oracles only");
                let (_, test) = split_train_test(gold, a.train_fraction, seed(cli));
                test.save(dir.join("test").join(format!("{stem}.tsv")))?;
                evaluate_suite(&aug, data.old.as_ref(), &test, rel, None)?
            }
        };
        rows.push(row);
    }
    write_file(&dir.join("selected.tsv"), |w| w.write_all(selected.as_bytes()))?;
    write_rows(&rows, Format::Markdown, Some(&dir.join("report.md")))?;
    write_rows(&rows, Format::Tsv, Some(&dir.join("report.tsv")))?;
    let stdout = std::io::stdout();
    write_markdown(stdout.lock(), &rows).context("writing to stdout")
}
