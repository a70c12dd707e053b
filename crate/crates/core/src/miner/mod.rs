//! Horn-rule mining with completeness heads `complete(?x, r)` /
//! `incomplete(?x, r)`.
//!
//! Search starts at the empty-body rule for every labeled relation and
//! polarity and applies refinement operators breadth-first. Candidates below
//! the support threshold are dropped.

mod operators;
mod search;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use search::{mine, sort_rules, MiningContext};

use crate::engine::DEFAULT_POPULARITY_PERCENTILE;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Dangling,
    Closing,
    InstantiateType,
    InstantiatePopular,
    InstantiateUnchanged,
    AddType,
    SpecializeType,
    AddNegatedType,
    AddCardinality,
    TightenCardinality,
}

impl Operator {
    pub const ALL: [Operator; 10] = [
        Operator::Dangling,
        Operator::Closing,
        Operator::InstantiateType,
        Operator::InstantiatePopular,
        Operator::InstantiateUnchanged,
        Operator::AddType,
        Operator::SpecializeType,
        Operator::AddNegatedType,
        Operator::AddCardinality,
        Operator::TightenCardinality,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Operator::Dangling => "dangling",
            Operator::Closing => "closing",
            Operator::InstantiateType => "instantiate-type",
            Operator::InstantiatePopular => "instantiate-popular",
            Operator::InstantiateUnchanged => "instantiate-unchanged",
            Operator::AddType => "add-type",
            Operator::SpecializeType => "specialize-type",
            Operator::AddNegatedType => "add-negated-type",
            Operator::AddCardinality => "add-cardinality",
            Operator::TightenCardinality => "tighten-cardinality",
        }
    }

    /// Operators that keep the body length unchanged.
    pub fn replaces_atom(self) -> bool {
        matches!(self, Operator::SpecializeType | Operator::TightenCardinality)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Operator::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown operator `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSet(BTreeSet<Operator>);

impl OperatorSet {
    pub fn all() -> Self {
        OperatorSet(Operator::ALL.into_iter().collect())
    }

    /// Relational atoms only.
    pub fn star_only() -> Self {
        OperatorSet([Operator::Dangling, Operator::Closing].into_iter().collect())
    }

    /// Type and notype atoms only.
    pub fn class_only() -> Self {
        OperatorSet(
            [
                Operator::InstantiateType,
                Operator::AddType,
                Operator::SpecializeType,
                Operator::AddNegatedType,
            ]
            .into_iter()
            .collect(),
        )
    }

    pub fn contains(&self, op: Operator) -> bool {
        self.0.contains(&op)
    }

    pub fn remove(&mut self, op: Operator) {
        self.0.remove(&op);
    }

    pub fn iter(&self) -> impl Iterator<Item = Operator> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<Operator> for OperatorSet {
    fn from_iter<I: IntoIterator<Item = Operator>>(iter: I) -> Self {
        OperatorSet(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningConfig {
    pub min_support: usize,
    pub min_confidence: f64,
    /// Body atoms, head excluded.
    pub max_body_atoms: usize,
    pub operators: OperatorSet,
    /// Maximum number of relational atoms in a body.
    pub star_size: usize,
    pub popularity_percentile: f64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            min_support: 10,
            min_confidence: 0.3,
            max_body_atoms: 3,
            operators: OperatorSet::all(),
            star_size: 3,
            popularity_percentile: DEFAULT_POPULARITY_PERCENTILE,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_support < 1 {
            return Err(Error::InvalidParameter("min-support must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(Error::InvalidParameter(format!(
                "min-confidence must lie in [0, 1], got {}",
                self.min_confidence
            )));
        }
        if !(self.popularity_percentile > 0.0 && self.popularity_percentile < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "popularity percentile must lie in (0, 1), got {}",
                self.popularity_percentile
            )));
        }
        Ok(())
    }

    /// One-line `key=value` rendering used as the rule-file header.
    pub fn to_header(&self) -> String {
        let ops: Vec<&str> = self.operators.iter().map(Operator::as_str).collect();
        format!(
            "# config min-support={} min-confidence={} max-body-atoms={} star-size={} popularity-percentile={} operators={}",
            self.min_support,
            self.min_confidence,
            self.max_body_atoms,
            self.star_size,
            self.popularity_percentile,
            ops.join(",")
        )
    }

    pub fn from_header(line: &str) -> Result<Self> {
        let rest = line
            .strip_prefix("# config")
            .ok_or_else(|| Error::InvalidParameter("not a config header".into()))?;
        let mut config = MiningConfig::default();
        let bad = |k: &str, v: &str| Error::InvalidParameter(format!("bad value `{v}` for `{k}`"));
        for pair in rest.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("bad config entry `{pair}`")))?;
            match k {
                "min-support" => config.min_support = v.parse().map_err(|_| bad(k, v))?,
                "min-confidence" => config.min_confidence = v.parse().map_err(|_| bad(k, v))?,
                "max-body-atoms" => config.max_body_atoms = v.parse().map_err(|_| bad(k, v))?,
                "star-size" => config.star_size = v.parse().map_err(|_| bad(k, v))?,
                "popularity-percentile" => config.popularity_percentile = v.parse().map_err(|_| bad(k, v))?,
                "operators" => {
                    config.operators = if v.is_empty() {
                        OperatorSet(BTreeSet::new())
                    } else {
                        v.split(',').map(str::parse).collect::<Result<_>>()?
                    }
                }
                _ => return Err(Error::InvalidParameter(format!("unknown config key `{k}`"))),
            }
        }
        config.validate()?;
        Ok(config)
    }
}


#[cfg(test)]
mod config_tests {
    use super::*;

    #[test]
    fn header_roundtrip() {
        let mut config = MiningConfig {
            min_support: 20,
            min_confidence: 0.7,
            ..Default::default()
        };
        config.operators.remove(Operator::InstantiatePopular);
        let back = MiningConfig::from_header(&config.to_header()).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn validation() {
        assert!(MiningConfig {
            min_support: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(MiningConfig {
            min_confidence: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
