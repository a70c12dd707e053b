//! Horn rules over KB relations and the completeness-specific atom kinds.

mod format;

use std::fmt;

pub use format::{parse_rule, parse_rules, write_rules};

use crate::miner::Operator;

/// Variable index. `0` is the head subject `?x`; fact rules use `1` for `?y`.
pub type Var = u8;

pub const X: Var = 0;
pub const Y: Var = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(String),
}

impl Term {
    pub fn var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Complete,
    Incomplete,
}

impl Polarity {
    pub fn opposite(self) -> Self {
        match self {
            Polarity::Complete => Polarity::Incomplete,
            Polarity::Incomplete => Polarity::Complete,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Complete => "complete",
            Polarity::Incomplete => "incomplete",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The variant order is the canonical body order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Relation {
        relation: String,
        subject: Term,
        object: Term,
    },
    NoType {
        var: Var,
        class: String,
    },
    Type {
        var: Var,
        class: String,
    },
    /// Fewer than `bound` objects for `relation`.
    LessThan {
        var: Var,
        relation: String,
        bound: usize,
    },
    /// More than `bound` objects for `relation`.
    MoreThan {
        var: Var,
        relation: String,
        bound: usize,
    },
    IsPopular {
        var: Var,
    },
    HasNotChanged {
        var: Var,
        relation: String,
    },
    Completeness {
        polarity: Polarity,
        var: Var,
        relation: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomKind {
    Relational,
    Type,
    NoType,
    Cardinality,
    Popularity,
    Change,
    Completeness,
}

impl Atom {
    pub fn relational(relation: impl Into<String>, subject: Term, object: Term) -> Self {
        Atom::Relation {
            relation: relation.into(),
            subject,
            object,
        }
    }

    pub fn completeness(polarity: Polarity, relation: impl Into<String>) -> Self {
        Atom::Completeness {
            polarity,
            var: X,
            relation: relation.into(),
        }
    }

    pub fn kind(&self) -> AtomKind {
        match self {
            Atom::Relation { .. } => AtomKind::Relational,
            Atom::Type { .. } => AtomKind::Type,
            Atom::NoType { .. } => AtomKind::NoType,
            Atom::LessThan { .. } | Atom::MoreThan { .. } => AtomKind::Cardinality,
            Atom::IsPopular { .. } => AtomKind::Popularity,
            Atom::HasNotChanged { .. } => AtomKind::Change,
            Atom::Completeness { .. } => AtomKind::Completeness,
        }
    }

    /// Variables in argument order; a relational atom may repeat one.
    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        let (a, b) = match self {
            Atom::Relation { subject, object, .. } => (subject.var(), object.var()),
            Atom::NoType { var, .. }
            | Atom::Type { var, .. }
            | Atom::LessThan { var, .. }
            | Atom::MoreThan { var, .. }
            | Atom::IsPopular { var }
            | Atom::HasNotChanged { var, .. }
            | Atom::Completeness { var, .. } => (Some(*var), None),
        };
        a.into_iter().chain(b)
    }

    /// The relation an atom talks about, if any (classes excluded).
    pub fn relation(&self) -> Option<&str> {
        match self {
            Atom::Relation { relation, .. }
            | Atom::LessThan { relation, .. }
            | Atom::MoreThan { relation, .. }
            | Atom::HasNotChanged { relation, .. }
            | Atom::Completeness { relation, .. } => Some(relation),
            _ => None,
        }
    }

    pub(crate) fn map_vars(&self, f: impl Fn(Var) -> Var) -> Atom {
        let term = |t: &Term| match t {
            Term::Var(v) => Term::Var(f(*v)),
            c => c.clone(),
        };
        match self {
            Atom::Relation {
                relation,
                subject,
                object,
            } => Atom::Relation {
                relation: relation.clone(),
                subject: term(subject),
                object: term(object),
            },
            Atom::NoType { var, class } => Atom::NoType {
                var: f(*var),
                class: class.clone(),
            },
            Atom::Type { var, class } => Atom::Type {
                var: f(*var),
                class: class.clone(),
            },
            Atom::LessThan { var, relation, bound } => Atom::LessThan {
                var: f(*var),
                relation: relation.clone(),
                bound: *bound,
            },
            Atom::MoreThan { var, relation, bound } => Atom::MoreThan {
                var: f(*var),
                relation: relation.clone(),
                bound: *bound,
            },
            Atom::IsPopular { var } => Atom::IsPopular { var: f(*var) },
            Atom::HasNotChanged { var, relation } => Atom::HasNotChanged {
                var: f(*var),
                relation: relation.clone(),
            },
            Atom::Completeness {
                polarity,
                var,
                relation,
            } => Atom::Completeness {
                polarity: *polarity,
                var: f(*var),
                relation: relation.clone(),
            },
        }
    }
}

/// `body ⇒ head` with its measures.
#[derive(Debug, Clone)]
pub struct Rule {
    pub body: Vec<Atom>,
    pub head: Atom,
    pub support: usize,
    pub confidence: f64,
    /// Operators applied, in order, starting from the empty-body rule.
    pub provenance: Vec<Operator>,
}

/// Provenance is a derivation trace, not part of a rule's identity.
impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.body == other.body
            && self.head == other.head
            && self.support == other.support
            && self.confidence.to_bits() == other.confidence.to_bits()
    }
}

impl Rule {
    pub fn new(body: Vec<Atom>, head: Atom) -> Self {
        Rule {
            body,
            head,
            support: 0,
            confidence: 0.0,
            provenance: Vec::new(),
        }
    }

    /// Polarity and relation of a completeness head.
    pub fn completeness_head(&self) -> Option<(Polarity, &str)> {
        match &self.head {
            Atom::Completeness { polarity, relation, .. } => Some((*polarity, relation)),
            _ => None,
        }
    }

    pub fn body_vars(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = self.body.iter().flat_map(Atom::vars).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn all_vars(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = self
            .body
            .iter()
            .chain(std::iter::once(&self.head))
            .flat_map(Atom::vars)
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Occurrences of `var` across body and head.
    pub fn occurrences(&self, var: Var) -> usize {
        self.body
            .iter()
            .chain(std::iter::once(&self.head))
            .flat_map(Atom::vars)
            .filter(|&v| v == var)
            .count()
    }

    /// Every variable appears in at least two atoms.
    pub fn is_closed(&self) -> bool {
        self.all_vars().into_iter().all(|v| {
            self.body
                .iter()
                .chain(std::iter::once(&self.head))
                .filter(|a| a.vars().any(|w| w == v))
                .count()
                >= 2
        })
    }

    pub fn next_var(&self) -> Var {
        self.all_vars().last().map(|v| v + 1).unwrap_or(0)
    }

    /// Renames body-only variables and sorts the body so that rules equal up
    /// to renaming and reordering compare equal.
    pub fn canonicalize(&mut self) {
        let (body, head) = canonical_form(&self.body, &self.head);
        self.body = body;
        self.head = head;
    }

    pub fn canonical_key(&self) -> (Vec<Atom>, Atom) {
        canonical_form(&self.body, &self.head)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format::render_rule_text(self))
    }
}

fn canonical_form(body: &[Atom], head: &Atom) -> (Vec<Atom>, Atom) {
    let mut head_vars: Vec<Var> = Vec::new();
    for v in head.vars() {
        if !head_vars.contains(&v) {
            head_vars.push(v);
        }
    }
    let mut free: Vec<Var> = Vec::new();
    for v in body.iter().flat_map(Atom::vars) {
        if !head_vars.contains(&v) && !free.contains(&v) {
            free.push(v);
        }
    }
    let base = head_vars.len() as Var;
    let rename_head = |v: Var| head_vars.iter().position(|&h| h == v).map(|i| i as Var);
    let head = head.map_vars(|v| rename_head(v).unwrap_or(v));

    let mut best: Option<Vec<Atom>> = None;
    let mut perm: Vec<usize> = (0..free.len()).collect();
    loop {
        let mut candidate: Vec<Atom> = body
            .iter()
            .map(|a| {
                a.map_vars(|v| match rename_head(v) {
                    Some(h) => h,
                    None => base + perm[free.iter().position(|&f| f == v).unwrap()] as Var,
                })
            })
            .collect();
        candidate.sort();
        candidate.dedup();
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    (best.unwrap_or_default(), head)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
