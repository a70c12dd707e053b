use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{KbBuilder, KnowledgeBase, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub vocabulary: Vocabulary,
    /// Relations whose facts are stored with subject and object swapped.
    pub invert: BTreeSet<String>,
    /// Extra `(relation, domain class)` declarations.
    pub domains: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub facts: usize,
    pub entities: usize,
}

impl KnowledgeBase {
    /// Parses `subject TAB relation TAB object` lines. Lines starting with `#`
    /// and blank lines are skipped.
    pub fn from_reader<R: BufRead>(reader: R, source_name: &str, options: &LoadOptions) -> Result<(Self, LoadReport)> {
        let mut builder = KbBuilder::with_vocabulary(options.vocabulary.clone());
        for rel in &options.invert {
            builder.invert(rel.clone());
        }
        for (rel, class) in &options.domains {
            builder.declare_domain(rel.clone(), class.clone());
        }

        let mut lines = 0;
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source_name, e))?;
            lines += 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    source_name,
                    idx + 1,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            }
            if fields.iter().any(|f| f.is_empty()) {
                return Err(Error::parse(source_name, idx + 1, "empty field"));
            }
            builder.add(fields[0], fields[1], fields[2])?;
        }
        let kb = builder.build()?;
        let report = LoadReport {
            lines,
            facts: kb.len(),
            entities: kb.entity_count(),
        };
        Ok((kb, report))
    }
}

pub fn load_kb(path: impl AsRef<Path>, options: &LoadOptions) -> Result<(KnowledgeBase, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    KnowledgeBase::from_reader(BufReader::new(file), &path.display().to_string(), options)
}

/// Loads the current KB and, when given, an older snapshot with the same options.
pub fn load_kb_pair(
    path: impl AsRef<Path>,
    old_path: Option<&Path>,
    options: &LoadOptions,
) -> Result<(KnowledgeBase, Option<KnowledgeBase>, LoadReport)> {
    let (kb, report) = load_kb(path, options)?;
    let old = old_path.map(|p| load_kb(p, options).map(|(kb, _)| kb)).transpose()?;
    Ok((kb, old, report))
}
