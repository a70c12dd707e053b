use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Complete,
    Incomplete,
}

impl Label {
    pub fn is_complete(self) -> bool {
        self == Label::Complete
    }

    pub fn from_bool(complete: bool) -> Self {
        if complete {
            Label::Complete
        } else {
            Label::Incomplete
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Complete => "complete",
            Label::Incomplete => "incomplete",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "complete" => Ok(Label::Complete),
            "incomplete" => Ok(Label::Incomplete),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessLabel {
    pub entity: String,
    pub relation: String,
    pub label: Label,
}

/// How the labeled pairs were drawn from the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    Uniform,
    /// Two strata split by whether the subject has any object for the
    /// relation; the values are the population proportions of each stratum.
    Biased {
        has_object: f64,
        no_object: f64,
    },
}

/// Labeled completeness assertions, at most one per (entity, relation).
#[derive(Debug, Clone, PartialEq)]
pub struct GoldStandard {
    labels: BTreeMap<(String, String), Label>,
    sampling: Sampling,
}

impl Default for GoldStandard {
    fn default() -> Self {
        GoldStandard::new(Sampling::Uniform)
    }
}

impl GoldStandard {
    pub fn new(sampling: Sampling) -> Self {
        GoldStandard {
            labels: BTreeMap::new(),
            sampling,
        }
    }

    pub fn from_labels<I>(labels: I, sampling: Sampling) -> Result<Self>
    where
        I: IntoIterator<Item = CompletenessLabel>,
    {
        let mut gold = GoldStandard::new(sampling);
        for l in labels {
            gold.insert(l.entity, l.relation, l.label)?;
        }
        Ok(gold)
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn set_sampling(&mut self, sampling: Sampling) -> Result<()> {
        if let Sampling::Biased { has_object, no_object } = sampling {
            if !(0.0..=1.0).contains(&has_object) || !(0.0..=1.0).contains(&no_object) {
                return Err(Error::InvalidParameter(format!(
                    "stratum weights must lie in [0, 1], got ({has_object}, {no_object})"
                )));
            }
        }
        self.sampling = sampling;
        Ok(())
    }

    /// Adds a label; re-adding an identical label is a no-op, a conflicting one an error.
    pub fn insert(&mut self, entity: impl Into<String>, relation: impl Into<String>, label: Label) -> Result<()> {
        let key = (relation.into(), entity.into());
        match self.labels.get(&key) {
            Some(&existing) if existing != label => Err(Error::ConflictingLabel {
                entity: key.1,
                relation: key.0,
            }),
            _ => {
                self.labels.insert(key, label);
                Ok(())
            }
        }
    }

    pub fn get(&self, entity: &str, relation: &str) -> Option<Label> {
        self.labels.get(&(relation.to_string(), entity.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels ordered by (relation, entity).
    pub fn labels(&self) -> impl Iterator<Item = CompletenessLabel> + '_ {
        self.labels.iter().map(|((r, e), &label)| CompletenessLabel {
            entity: e.clone(),
            relation: r.clone(),
            label,
        })
    }

    pub fn relations(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.labels.keys().map(|(r, _)| r.as_str()).collect();
        out.dedup();
        out
    }

    /// Single relation name, or a comma-joined list when mixed.
    pub fn relation_name(&self) -> String {
        self.relations().join(",")
    }

    pub fn for_relation(&self, relation: &str) -> GoldStandard {
        GoldStandard {
            labels: self
                .labels
                .iter()
                .filter(|((r, _), _)| r == relation)
                .map(|(k, &v)| (k.clone(), v))
                .collect(),
            sampling: self.sampling,
        }
    }

    /// Same sampling metadata, restricted to the given labels.
    pub fn with_labels(&self, labels: impl IntoIterator<Item = CompletenessLabel>) -> GoldStandard {
        GoldStandard {
            labels: labels.into_iter().map(|l| ((l.relation, l.entity), l.label)).collect(),
            sampling: self.sampling,
        }
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.values().filter(|&&l| l == label).count()
    }

    pub fn entities_with(&self, relation: &str, label: Label) -> impl Iterator<Item = &str> + '_ {
        let relation = relation.to_string();
        self.labels
            .iter()
            .filter(move |((r, _), &l)| *r == relation && l == label)
            .map(|((_, e), _)| e.as_str())
    }

    /// Parses `entity TAB relation TAB label`; an optional
    /// `#strata TAB has-object TAB no-object` line marks a biased sample.
    pub fn from_reader<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut gold = GoldStandard::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            let lineno = idx + 1;
            if let Some(rest) = line.strip_prefix("#strata") {
                let fields: Vec<&str> = rest.split('\t').filter(|f| !f.is_empty()).collect();
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse(source_name, lineno, format!("bad stratum weight `{s}`: {e}")))
                };
                if fields.len() != 2 {
                    return Err(Error::parse(source_name, lineno, "#strata needs two weights"));
                }
                gold.set_sampling(Sampling::Biased {
                    has_object: parse(fields[0])?,
                    no_object: parse(fields[1])?,
                })
                .map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    "expected `entity TAB relation TAB complete|incomplete`",
                ));
            }
            let label: Label = fields[2]
                .parse()
                .map_err(|m: String| Error::parse(source_name, lineno, m))?;
            gold.insert(fields[0], fields[1], label)
                .map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        }
        Ok(gold)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file), &path.display().to_string())
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        if let Sampling::Biased { has_object, no_object } = self.sampling {
            writeln!(w, "#strata\t{has_object}\t{no_object}")?;
        }
        for ((r, e), label) in &self.labels {
            writeln!(w, "{e}\t{r}\t{label}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_tsv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}
