use std::collections::HashSet;

use super::AugmentedKb;
use crate::kb::{RelId, TermId};
use crate::rule::{Atom, Term, Var};

const MAX_VARS: usize = 12;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Binding([Option<TermId>; MAX_VARS]);

impl Binding {
    pub fn get(&self, v: Var) -> Option<TermId> {
        self.0[v as usize]
    }

    pub fn set(&mut self, v: Var, t: TermId) {
        self.0[v as usize] = Some(t);
    }

    pub fn clear(&mut self, v: Var) {
        self.0[v as usize] = None;
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Var(Var),
    Const(TermId),
}

#[derive(Debug, Clone)]
enum CAtom {
    Rel {
        r: RelId,
        s: Slot,
        o: Slot,
    },
    Type {
        v: Var,
        c: TermId,
    },
    NoType {
        v: Var,
        c: Option<TermId>,
    },
    Less {
        v: Var,
        r: Option<RelId>,
        n: usize,
    },
    More {
        v: Var,
        r: Option<RelId>,
        n: usize,
    },
    Popular {
        v: Var,
    },
    Unchanged {
        v: Var,
        r: Option<RelId>,
    },
    /// An atom no binding satisfies (unknown relation, class or constant).
    Never,
}

impl CAtom {
    fn vars(&self) -> [Option<Var>; 2] {
        match *self {
            CAtom::Rel { s, o, .. } => {
                let f = |x: Slot| match x {
                    Slot::Var(v) => Some(v),
                    Slot::Const(_) => None,
                };
                [f(s), f(o)]
            }
            CAtom::Type { v, .. }
            | CAtom::NoType { v, .. }
            | CAtom::Less { v, .. }
            | CAtom::More { v, .. }
            | CAtom::Popular { v }
            | CAtom::Unchanged { v, .. } => [Some(v), None],
            CAtom::Never => [None, None],
        }
    }
}

/// A rule body resolved against one augmented KB.
#[derive(Debug, Clone)]
pub(crate) struct CompiledBody {
    atoms: Vec<CAtom>,
}

impl CompiledBody {
    pub fn compile(aug: &AugmentedKb<'_>, body: &[Atom]) -> Self {
        let kb = aug.kb();
        let slot = |t: &Term| match t {
            Term::Var(v) => Some(Slot::Var(*v)),
            Term::Const(c) => kb.term_id(c).map(Slot::Const),
        };
        let atoms = body
            .iter()
            .map(|a| match a {
                Atom::Relation {
                    relation,
                    subject,
                    object,
                } => match (kb.relation_id(relation), slot(subject), slot(object)) {
                    (Some(r), Some(s), Some(o)) => CAtom::Rel { r, s, o },
                    _ => CAtom::Never,
                },
                Atom::Type { var, class } => match kb.term_id(class) {
                    Some(c) => CAtom::Type { v: *var, c },
                    None => CAtom::Never,
                },
                Atom::NoType { var, class } => CAtom::NoType {
                    v: *var,
                    c: kb.term_id(class),
                },
                Atom::LessThan { var, relation, bound } => CAtom::Less {
                    v: *var,
                    r: kb.relation_id(relation),
                    n: *bound,
                },
                Atom::MoreThan { var, relation, bound } => CAtom::More {
                    v: *var,
                    r: kb.relation_id(relation),
                    n: *bound,
                },
                Atom::IsPopular { var } => CAtom::Popular { v: *var },
                Atom::HasNotChanged { var, relation } => CAtom::Unchanged {
                    v: *var,
                    r: kb.relation_id(relation),
                },
                Atom::Completeness { .. } => CAtom::Never,
            })
            .collect();
        CompiledBody { atoms }
    }

    pub fn is_unsatisfiable(&self) -> bool {
        self.atoms.iter().any(|a| matches!(a, CAtom::Never))
    }

    /// Existential check under the given partial binding. The binding is
    /// restored before returning.
    pub fn satisfiable(&self, aug: &AugmentedKb<'_>, binding: &mut Binding) -> bool {
        if self.is_unsatisfiable() {
            return false;
        }
        let mut done = vec![false; self.atoms.len()];
        solve(aug, &self.atoms, &mut done, binding)
    }

    /// All distinct values of `proj` over satisfying assignments.
    pub fn project(&self, aug: &AugmentedKb<'_>, binding: &mut Binding, proj: &[Var]) -> HashSet<Vec<TermId>> {
        let mut out = HashSet::new();
        if self.is_unsatisfiable() {
            return out;
        }
        let mut done = vec![false; self.atoms.len()];
        project(aug, &self.atoms, &mut done, binding, proj, &mut out);
        out
    }
}

fn bound(binding: &Binding, s: Slot) -> Option<TermId> {
    match s {
        Slot::Var(v) => binding.get(v),
        Slot::Const(c) => Some(c),
    }
}

/// Tests a fully bound atom.
fn check(aug: &AugmentedKb<'_>, atom: &CAtom, b: &Binding) -> bool {
    let kb = aug.kb();
    let count = |v: Var, r: Option<RelId>| r.map(|r| kb.objects_of(b.get(v).unwrap(), r).len()).unwrap_or(0);
    match *atom {
        CAtom::Rel { r, s, o } => kb.contains_ids(bound(b, s).unwrap(), r, bound(b, o).unwrap()),
        CAtom::Type { v, c } => kb.is_instance_id(b.get(v).unwrap(), c),
        CAtom::NoType { v, c } => c.is_none_or(|c| !kb.is_instance_id(b.get(v).unwrap(), c)),
        CAtom::Less { v, r, n } => count(v, r) < n,
        CAtom::More { v, r, n } => count(v, r) > n,
        CAtom::Popular { v } => aug.is_popular_id(b.get(v).unwrap()),
        CAtom::Unchanged { v, r } => aug.is_unchanged_id(b.get(v).unwrap(), r),
        CAtom::Never => false,
    }
}

fn is_bound(atom: &CAtom, b: &Binding) -> bool {
    atom.vars().iter().flatten().all(|&v| b.get(v).is_some())
}

/// Estimated fan-out of enumerating an atom with unbound variables.
fn cost(aug: &AugmentedKb<'_>, atom: &CAtom, b: &Binding) -> usize {
    let kb = aug.kb();
    match *atom {
        CAtom::Rel { r, s, o } => match (bound(b, s), bound(b, o)) {
            (Some(s), None) => kb.objects_of(s, r).len(),
            (None, Some(o)) => kb.subjects_with_object(r, o).len(),
            _ => kb.pairs_of(r).len(),
        },
        CAtom::Type { .. } => kb.entity_count() / 2 + 1,
        _ => kb.entity_count() + 1,
    }
}

/// Picks the next atom: a fully bound one if any, else the cheapest to enumerate.
fn pick(aug: &AugmentedKb<'_>, atoms: &[CAtom], done: &[bool], b: &Binding) -> Option<(usize, bool)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, a) in atoms.iter().enumerate() {
        if done[i] {
            continue;
        }
        if is_bound(a, b) {
            return Some((i, true));
        }
        let c = cost(aug, a, b);
        if best.is_none_or(|(_, bc)| c < bc) {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| (i, false))
}

/// Calls `f` for each extension of `b` satisfying the atom; `f` returns true to stop.
fn expand(aug: &AugmentedKb<'_>, atom: &CAtom, b: &mut Binding, f: &mut dyn FnMut(&mut Binding) -> bool) -> bool {
    let kb = aug.kb();
    match *atom {
        CAtom::Rel { r, s, o } => {
            let (sv, ov) = (bound(b, s), bound(b, o));
            match (sv, ov) {
                (Some(st), None) => {
                    let Slot::Var(ovar) = o else { unreachable!() };
                    for &x in kb.objects_of(st, r) {
                        b.set(ovar, x);
                        if f(b) {
                            b.clear(ovar);
                            return true;
                        }
                    }
                    b.clear(ovar);
                }
                (None, Some(ot)) => {
                    let Slot::Var(svar) = s else { unreachable!() };
                    for &x in kb.subjects_with_object(r, ot) {
                        b.set(svar, x);
                        if f(b) {
                            b.clear(svar);
                            return true;
                        }
                    }
                    b.clear(svar);
                }
                (None, None) => {
                    let (Slot::Var(svar), Slot::Var(ovar)) = (s, o) else {
                        unreachable!()
                    };
                    for &(x, y) in kb.pairs_of(r) {
                        if svar == ovar && x != y {
                            continue;
                        }
                        b.set(svar, x);
                        b.set(ovar, y);
                        if f(b) {
                            b.clear(svar);
                            b.clear(ovar);
                            return true;
                        }
                    }
                    b.clear(svar);
                    b.clear(ovar);
                }
                (Some(_), Some(_)) => unreachable!("bound atoms are checked, not expanded"),
            }
            false
        }
        CAtom::Never => false,
        _ => {
            let v = atom.vars()[0].expect("special atoms carry a variable");
            let candidates: Vec<TermId> = match *atom {
                CAtom::Type { c, .. } => kb.instances_of_id(c),
                _ => kb.entity_ids().to_vec(),
            };
            for x in candidates {
                b.set(v, x);
                if check(aug, atom, b) && f(b) {
                    b.clear(v);
                    return true;
                }
            }
            b.clear(v);
            false
        }
    }
}

fn solve(aug: &AugmentedKb<'_>, atoms: &[CAtom], done: &mut [bool], b: &mut Binding) -> bool {
    let Some((i, is_check)) = pick(aug, atoms, done, b) else {
        return true;
    };
    done[i] = true;
    let ok = if is_check {
        check(aug, &atoms[i], b) && solve(aug, atoms, done, b)
    } else {
        expand(aug, &atoms[i], b, &mut |b| solve(aug, atoms, done, b))
    };
    done[i] = false;
    ok
}

fn project(
    aug: &AugmentedKb<'_>,
    atoms: &[CAtom],
    done: &mut [bool],
    b: &mut Binding,
    proj: &[Var],
    out: &mut HashSet<Vec<TermId>>,
) {
    if proj.iter().all(|&v| b.get(v).is_some()) {
        let key: Vec<TermId> = proj.iter().map(|&v| b.get(v).unwrap()).collect();
        if !out.contains(&key) && solve(aug, atoms, done, b) {
            out.insert(key);
        }
        return;
    }
    let Some((i, is_check)) = pick(aug, atoms, done, b) else {
        // Projection variable not mentioned in the body; nothing to enumerate.
        return;
    };
    done[i] = true;
    if is_check {
        if check(aug, &atoms[i], b) {
            project(aug, atoms, done, b, proj, out);
        }
    } else {
        expand(aug, &atoms[i], b, &mut |b| {
            project(aug, atoms, done, b, proj, out);
            false
        });
    }
    done[i] = false;
}
