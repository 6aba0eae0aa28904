//! Non-contrastive explanations: sufficient and necessary reasons.
//!
//! A possible sufficient reason for a formula taking value `v` is a
//! subset-minimal set of signed atoms that forces the formula to `v` whatever
//! the remaining atoms are (a prime implicant of the formula or of its
//! negation). Sufficient reasons are the ones that actually hold for the
//! model/plan pair; the necessary reason is a minimum hitting set of them.
//!
//! Prime implicants are built bottom-up over the formula tree, treating
//! atoms as independent boolean variables:
//!
//! * forcing a conjunction true: the minimal consistent unions of the
//!   conjuncts' implicants;
//! * forcing a disjunction true: the union of the disjuncts' implicants,
//!   closed under consensus when disjuncts share atoms.
//!
//! When only implicants consistent with the actual situation are wanted, the
//! conjunctive case filters before multiplying, which keeps principle
//! formulas linear-ish instead of exponential in their atom count.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::moral::{Formula, MoralAtom, Situation};
use crate::planning::{Plan, PlanningModel, SearchLimits};
use crate::principles::{judge, Judgment, Principle};

/// An atom asserted true (`positive`) or false.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedAtom {
    pub atom: MoralAtom,
    pub positive: bool,
}

impl SignedAtom {
    pub fn new(atom: MoralAtom, positive: bool) -> Self {
        SignedAtom { atom, positive }
    }

    pub fn render(&self, model: &PlanningModel) -> String {
        if self.positive {
            self.atom.render(model)
        } else {
            format!("¬{}", self.atom.render(model))
        }
    }

    /// Accepts an optional leading negation (`¬`, `!`, `~`, `not `).
    pub fn parse(text: &str, model: &PlanningModel) -> Result<Self> {
        let (positive, rest) = crate::planning::split_negation(text.trim());
        Ok(SignedAtom {
            atom: MoralAtom::parse(rest, model)?,
            positive,
        })
    }
}

impl Ord for SignedAtom {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.atom, !self.positive).cmp(&(&other.atom, !other.positive))
    }
}

impl PartialOrd for SignedAtom {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReasonKind {
    PossibleSufficient,
    Sufficient,
    Necessary,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReasonSet {
    pub literals: BTreeSet<SignedAtom>,
    pub kind: ReasonKind,
}

impl ReasonSet {
    pub fn new(kind: ReasonKind, literals: impl IntoIterator<Item = SignedAtom>) -> Self {
        ReasonSet {
            literals: literals.into_iter().collect(),
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: &SignedAtom) -> bool {
        self.literals.contains(lit)
    }

    pub fn render(&self, model: &PlanningModel) -> String {
        let parts: Vec<String> = self.literals.iter().map(|l| l.render(model)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoralExplanation {
    pub judgment: Judgment,
    pub sufficient: Vec<ReasonSet>,
    /// The selected minimum hitting set (lexicographically first).
    pub necessary: ReasonSet,
    /// Every minimum hitting set, including `necessary`.
    pub necessary_alternatives: Vec<ReasonSet>,
}

/// Caps for reason extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReasonLimits {
    /// Atoms allowed in a sub-formula that needs consensus closure.
    pub max_atoms: usize,
    /// Largest intermediate family of implicants.
    pub max_sets: usize,
}

impl Default for ReasonLimits {
    fn default() -> Self {
        ReasonLimits {
            max_atoms: 20,
            max_sets: 1 << 16,
        }
    }
}

// Sorted by atom index; at most one literal per atom.
type Term = Vec<(u32, bool)>;

struct Implicants<'a> {
    index: HashMap<&'a MoralAtom, u32>,
    actual: Option<Vec<bool>>,
    limits: ReasonLimits,
}

impl<'a> Implicants<'a> {
    fn new(atoms: &'a [MoralAtom], actual: Option<Vec<bool>>, limits: ReasonLimits) -> Self {
        let index = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a, i as u32))
            .collect();
        Implicants {
            index,
            actual,
            limits,
        }
    }

    fn atom_set(&self, f: &Formula, out: &mut BTreeSet<u32>) {
        match f {
            Formula::Atom(a) => {
                out.insert(self.index[a]);
            }
            Formula::Not(g) => self.atom_set(g, out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| self.atom_set(g, out)),
            Formula::Implies(a, b) => {
                self.atom_set(a, out);
                self.atom_set(b, out);
            }
        }
    }

    /// Prime implicants of `f == target`; restricted to the actual valuation
    /// when `restricted` is set.
    fn primes(&self, f: &Formula, target: bool, restricted: bool) -> Result<Vec<Term>> {
        match f {
            Formula::Atom(a) => {
                let i = self.index[a];
                let allowed = !restricted
                    || self
                        .actual
                        .as_ref()
                        .is_none_or(|actual| actual[i as usize] == target);
                Ok(if allowed { vec![vec![(i, target)]] } else { vec![] })
            }
            Formula::Not(g) => self.primes(g, !target, restricted),
            Formula::And(gs) => {
                let parts: Vec<(&Formula, bool)> = gs.iter().map(|g| (g, target)).collect();
                if target {
                    self.product(&parts, restricted)
                } else {
                    self.disjunction(&parts, restricted)
                }
            }
            Formula::Or(gs) => {
                let parts: Vec<(&Formula, bool)> = gs.iter().map(|g| (g, target)).collect();
                if target {
                    self.disjunction(&parts, restricted)
                } else {
                    self.product(&parts, restricted)
                }
            }
            Formula::Implies(a, b) => {
                let parts = [(a.as_ref(), !target), (b.as_ref(), target)];
                if target {
                    self.disjunction(&parts, restricted)
                } else {
                    self.product(&parts, restricted)
                }
            }
        }
    }

    /// Every part must reach its value.
    fn product(&self, parts: &[(&Formula, bool)], restricted: bool) -> Result<Vec<Term>> {
        let mut acc: Vec<Term> = vec![Vec::new()];
        for &(f, value) in parts {
            let fam = self.primes(f, value, restricted)?;
            let mut next = Vec::with_capacity(acc.len() * fam.len().max(1));
            for a in &acc {
                for b in &fam {
                    if let Some(u) = merge(a, b) {
                        next.push(u);
                    }
                }
            }
            acc = absorb(next);
            if acc.len() > self.limits.max_sets {
                return Err(Error::ResourceLimit {
                    what: "implicant family size",
                    limit: self.limits.max_sets,
                });
            }
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    /// At least one part must reach its value.
    fn disjunction(&self, parts: &[(&Formula, bool)], restricted: bool) -> Result<Vec<Term>> {
        let mut seen = BTreeSet::new();
        let mut disjoint = true;
        for &(f, _) in parts {
            let mut s = BTreeSet::new();
            self.atom_set(f, &mut s);
            if !seen.is_disjoint(&s) {
                disjoint = false;
            }
            seen.extend(s);
        }
        if disjoint {
            let mut all = Vec::new();
            for &(f, value) in parts {
                all.extend(self.primes(f, value, restricted)?);
            }
            return Ok(absorb(all));
        }
        if seen.len() > self.limits.max_atoms {
            return Err(Error::ResourceLimit {
                what: "atoms under consensus closure",
                limit: self.limits.max_atoms,
            });
        }
        let mut all = Vec::new();
        for &(f, value) in parts {
            all.extend(self.primes(f, value, false)?);
        }
        let closed = self.consensus_closure(all)?;
        Ok(match (&self.actual, restricted) {
            (Some(actual), true) => closed
                .into_iter()
                .filter(|t| t.iter().all(|&(i, v)| actual[i as usize] == v))
                .collect(),
            _ => closed,
        })
    }

    fn consensus_closure(&self, terms: Vec<Term>) -> Result<Vec<Term>> {
        let mut terms = absorb(terms);
        loop {
            let mut fresh: Vec<Term> = Vec::new();
            for i in 0..terms.len() {
                for j in i + 1..terms.len() {
                    if let Some(c) = consensus(&terms[i], &terms[j]) {
                        let covered = terms
                            .iter()
                            .chain(fresh.iter())
                            .any(|t| is_subset(t, &c));
                        if !covered {
                            fresh.push(c);
                        }
                    }
                }
            }
            if fresh.is_empty() {
                return Ok(terms);
            }
            terms.extend(fresh);
            terms = absorb(terms);
            if terms.len() > self.limits.max_sets {
                return Err(Error::ResourceLimit {
                    what: "implicant family size",
                    limit: self.limits.max_sets,
                });
            }
        }
    }
}

fn merge(a: &Term, b: &Term) -> Option<Term> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                if a[i].1 != b[j].1 {
                    return None;
                }
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some(out)
}

fn consensus(a: &Term, b: &Term) -> Option<Term> {
    let mut clash = None;
    for &(i, v) in a {
        if let Ok(k) = b.binary_search_by_key(&i, |&(j, _)| j) {
            if b[k].1 != v {
                if clash.is_some() {
                    return None;
                }
                clash = Some(i);
            }
        }
    }
    let clash = clash?;
    let strip = |t: &Term| -> Term { t.iter().copied().filter(|&(i, _)| i != clash).collect() };
    merge(&strip(a), &strip(b))
}

fn is_subset(small: &Term, big: &Term) -> bool {
    small.len() <= big.len() && small.iter().all(|l| big.binary_search(l).is_ok())
}

/// Deduplicates and drops every term that contains another.
fn absorb(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    terms.dedup();
    let mut kept: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        if !kept.iter().any(|k| is_subset(k, &t)) {
            kept.push(t);
        }
    }
    kept
}

fn to_reason_sets(atoms: &[MoralAtom], terms: Vec<Term>, kind: ReasonKind) -> Vec<ReasonSet> {
    let mut sets: Vec<ReasonSet> = terms
        .into_iter()
        .map(|t| {
            ReasonSet::new(
                kind,
                t.into_iter()
                    .map(|(i, v)| SignedAtom::new(atoms[i as usize].clone(), v)),
            )
        })
        .collect();
    sort_family(&mut sets);
    sets
}

fn sort_family(sets: &mut [ReasonSet]) {
    sets.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.literals.iter().cmp(b.literals.iter()))
    });
}

pub fn minimal_entailing_sets(formula: &Formula, target: bool) -> Result<Vec<ReasonSet>> {
    minimal_entailing_sets_with(formula, target, &ReasonLimits::default())
}

/// All subset-minimal sets of signed atoms forcing `formula` to `target`.
pub fn minimal_entailing_sets_with(
    formula: &Formula,
    target: bool,
    limits: &ReasonLimits,
) -> Result<Vec<ReasonSet>> {
    let atoms: Vec<MoralAtom> = formula.atoms().into_iter().collect();
    let engine = Implicants::new(&atoms, None, *limits);
    let terms = engine.primes(formula, target, false)?;
    Ok(to_reason_sets(&atoms, terms, ReasonKind::PossibleSufficient))
}

pub fn sufficient_reasons(model: &PlanningModel, plan: &Plan, formula: &Formula) -> Result<Vec<ReasonSet>> {
    let situation = Situation::new(model, plan)?;
    sufficient_for(&situation, formula, &ReasonLimits::default())
}

/// Minimal sets forcing the formula's actual value whose every literal holds
/// in the situation.
pub(crate) fn sufficient_for(
    situation: &Situation<'_>,
    formula: &Formula,
    limits: &ReasonLimits,
) -> Result<Vec<ReasonSet>> {
    let atoms: Vec<MoralAtom> = formula.atoms().into_iter().collect();
    let actual: Vec<bool> = atoms.iter().map(|a| situation.holds(a)).collect();
    let value = formula.eval_with(&mut |a| situation.holds(a));
    let engine = Implicants::new(&atoms, Some(actual), *limits);
    let terms = engine.primes(formula, value, true)?;
    Ok(to_reason_sets(&atoms, terms, ReasonKind::Sufficient))
}

/// Every minimum-cardinality hitting set of `family`, in lexicographic order
/// of their sorted literals.
pub fn minimum_hitting_sets(family: &[ReasonSet]) -> Result<Vec<ReasonSet>> {
    if family.is_empty() || family.iter().any(ReasonSet::is_empty) {
        return Err(Error::EmptyFamily);
    }
    let universe: Vec<SignedAtom> = family
        .iter()
        .flat_map(|s| s.literals.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let members: Vec<Vec<usize>> = family
        .iter()
        .map(|s| {
            s.literals
                .iter()
                .map(|l| universe.binary_search(l).expect("in universe"))
                .collect()
        })
        .collect();
    for k in 1..=universe.len() {
        let mut found = BTreeSet::new();
        let mut chosen = Vec::new();
        hit(&members, k, &mut chosen, &mut found);
        if !found.is_empty() {
            return Ok(found
                .into_iter()
                .map(|idx: Vec<usize>| {
                    ReasonSet::new(
                        ReasonKind::Necessary,
                        idx.into_iter().map(|i| universe[i].clone()),
                    )
                })
                .collect());
        }
    }
    unreachable!("the universe itself hits every member")
}

fn hit(members: &[Vec<usize>], budget: usize, chosen: &mut Vec<usize>, found: &mut BTreeSet<Vec<usize>>) {
    let unhit = members
        .iter()
        .filter(|m| !m.iter().any(|e| chosen.contains(e)))
        .min_by_key(|m| m.len());
    match unhit {
        None => {
            let mut s = chosen.clone();
            s.sort_unstable();
            found.insert(s);
        }
        Some(m) if budget > 0 => {
            for &e in m {
                chosen.push(e);
                hit(members, budget - 1, chosen, found);
                chosen.pop();
            }
        }
        Some(_) => {}
    }
}

/// The lexicographically first minimum hitting set.
pub fn minimal_hitting_set(family: &[ReasonSet]) -> Result<ReasonSet> {
    Ok(minimum_hitting_sets(family)?.remove(0))
}

pub fn explain(principle: Principle, model: &PlanningModel, plan: &Plan) -> Result<MoralExplanation> {
    let situation = Situation::new(model, plan)?;
    explain_in(principle, &situation, &SearchLimits::default(), &ReasonLimits::default())
}

pub(crate) fn explain_in(
    principle: Principle,
    situation: &Situation<'_>,
    search: &SearchLimits,
    limits: &ReasonLimits,
) -> Result<MoralExplanation> {
    let judgment = judge(principle, situation, search)?;
    let sufficient = sufficient_for(situation, &judgment.formula, limits)?;
    // A verdict forced by no atom at all (e.g. the empty conjunction).
    let (necessary, necessary_alternatives) = if sufficient.iter().any(ReasonSet::is_empty) {
        let empty = ReasonSet::new(ReasonKind::Necessary, []);
        (empty.clone(), vec![empty])
    } else {
        let all = minimum_hitting_sets(&sufficient)?;
        (all[0].clone(), all)
    };
    Ok(MoralExplanation {
        judgment,
        sufficient,
        necessary,
        necessary_alternatives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::trolley;
    use crate::moral::Subject;
    use crate::planning::ModelBuilder;

    fn bad(label: &str) -> MoralAtom {
        MoralAtom::Bad(Subject::Action(label.into()))
    }

    fn sa(atom: MoralAtom, positive: bool) -> SignedAtom {
        SignedAtom::new(atom, positive)
    }

    fn sets(family: &[ReasonSet]) -> Vec<Vec<SignedAtom>> {
        family
            .iter()
            .map(|s| s.literals.iter().cloned().collect())
            .collect()
    }

    fn worked_example() -> (PlanningModel, Plan) {
        let m = ModelBuilder::new()
            .variable("g")
            .action("a1", &[], &[])
            .action("a2", &[], &[])
            .action("a3", &[], &["g"])
            .goal_literal("g")
            .action_utility("a1", 1)
            .action_utility("a2", -1)
            .action_utility("a3", -2)
            .build()
            .unwrap();
        (m, Plan::parse("a1 a2 a3"))
    }

    #[test]
    fn conflict_sets_of_deontic_conjunction() {
        let f = Formula::And(
            ["a1", "a2", "a3"]
                .iter()
                .map(|a| Formula::not(Formula::atom(bad(a))))
                .collect(),
        );
        let got = minimal_entailing_sets(&f, false).unwrap();
        assert_eq!(
            sets(&got),
            vec![
                vec![sa(bad("a1"), true)],
                vec![sa(bad("a2"), true)],
                vec![sa(bad("a3"), true)]
            ]
        );
    }

    #[test]
    fn single_atom_implicant() {
        let f = Formula::atom(bad("x"));
        assert_eq!(
            sets(&minimal_entailing_sets(&f, true).unwrap()),
            vec![vec![sa(bad("x"), true)]]
        );
    }

    #[test]
    fn harm_clause_implicants() {
        let m = trolley();
        let p = m.parse_literal("1willdie").unwrap();
        let b = MoralAtom::Bad(Subject::Fact(p));
        let c = MoralAtom::Caused(p);
        let f = Formula::implies(Formula::atom(b.clone()), Formula::not(Formula::atom(c.clone())));
        assert_eq!(
            sets(&minimal_entailing_sets(&f, true).unwrap()),
            vec![vec![sa(c, false)], vec![sa(b, false)]]
        );
    }

    #[test]
    fn shared_atoms_use_consensus() {
        // (x ∨ y) ∧ (¬x ∨ z): primes x z, ¬x y, y z.
        let x = Formula::atom(bad("x"));
        let y = Formula::atom(bad("y"));
        let z = Formula::atom(bad("z"));
        let f = Formula::And(vec![
            Formula::Or(vec![x.clone(), y.clone()]),
            Formula::Or(vec![Formula::not(x.clone()), z.clone()]),
        ]);
        assert_eq!(minimal_entailing_sets(&f, true).unwrap().len(), 3);
        // x ∨ ¬x is forced by nothing.
        let taut = Formula::Or(vec![x.clone(), Formula::not(x)]);
        let got = minimal_entailing_sets(&taut, true).unwrap();
        assert_eq!(got.len(), 1);
        assert!(got[0].is_empty());
        let _ = (y, z);
    }

    #[test]
    fn worked_example_reasons() {
        let (m, plan) = worked_example();
        let e = explain(Principle::Deontology, &m, &plan).unwrap();
        assert!(!e.judgment.permissible);
        assert_eq!(
            sets(&e.sufficient),
            vec![vec![sa(bad("a2"), true)], vec![sa(bad("a3"), true)]]
        );
        assert_eq!(
            e.necessary.literals.iter().cloned().collect::<Vec<_>>(),
            vec![sa(bad("a2"), true), sa(bad("a3"), true)]
        );
    }

    #[test]
    fn hitting_set_examples() {
        let phi = sa(bad("phi"), true);
        let psi = sa(bad("psi"), true);
        let chi = sa(bad("chi"), true);
        let one = [ReasonSet::new(ReasonKind::Sufficient, [phi.clone()])];
        assert_eq!(minimal_hitting_set(&one).unwrap().literals.len(), 1);
        let fam = [
            ReasonSet::new(ReasonKind::Sufficient, [phi.clone(), psi.clone()]),
            ReasonSet::new(ReasonKind::Sufficient, [psi.clone(), chi]),
        ];
        let h = minimal_hitting_set(&fam).unwrap();
        assert_eq!(h.literals.into_iter().collect::<Vec<_>>(), vec![psi]);
        assert_eq!(minimal_hitting_set(&[]), Err(Error::EmptyFamily));
    }

    #[test]
    fn trolley_step_four_reasons() {
        let m = trolley();
        let refrain = explain(Principle::DoNoHarm, &m, &Plan::parse("refrain")).unwrap();
        let not_caused_five = SignedAtom::parse("¬Caused(5willdie)", &m).unwrap();
        assert!(refrain.judgment.permissible);
        assert!(refrain.necessary.contains(&not_caused_five));
        assert!(refrain
            .sufficient
            .iter()
            .all(|s| s.contains(&not_caused_five)));

        let pull = explain(Principle::DoNoHarm, &m, &Plan::parse("pull")).unwrap();
        assert!(!pull.judgment.permissible);
        assert_eq!(pull.necessary.render(&m), "{Caused(1willdie)}");
        assert_eq!(pull.necessary_alternatives.len(), 2);

        let util = explain(Principle::Utilitarianism, &m, &Plan::parse("pull")).unwrap();
        let geq = SignedAtom::parse(
            "GEq(1willdie ∧ ¬5willdie ∧ done, ¬1willdie ∧ 5willdie ∧ done)",
            &m,
        )
        .unwrap();
        assert!(util.judgment.permissible);
        assert!(util.necessary.contains(&geq));
    }

    #[test]
    fn empty_plan_deontology_has_no_reason_atoms() {
        let m = ModelBuilder::new()
            .variable("g")
            .initially_true(["g"])
            .goal_literal("g")
            .build()
            .unwrap();
        let e = explain(Principle::Deontology, &m, &Plan::empty()).unwrap();
        assert!(e.judgment.permissible);
        assert!(e.necessary.is_empty());
    }
}
