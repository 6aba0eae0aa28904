//! Utility valuations and the moral action query language.
//!
//! Atoms talk about the sign of an action's or fact's utility, about which
//! facts a plan caused, and about utility comparisons between conjunctions of
//! facts. Formulas combine atoms with the usual connectives and are checked
//! against a model/plan pair.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::planning::{simulate, split_negation, Literal, Plan, PlanningModel, State, Trace};

const SCALE: i64 = 1_000_000;

/// Exact utility value, stored as an integer number of millionths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Utility(i64);

impl Utility {
    pub const ZERO: Utility = Utility(0);

    pub fn from_micros(micros: i64) -> Self {
        Utility(micros)
    }

    pub fn micros(self) -> i64 {
        self.0
    }

    /// Rounds to six decimal places.
    pub fn from_f64(value: f64) -> Result<Self> {
        let scaled = (value * SCALE as f64).round();
        if !scaled.is_finite() || scaled.abs() > (i64::MAX / 4) as f64 {
            return Err(Error::InvalidModel(format!("utility {value} out of range")));
        }
        Ok(Utility(scaled as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl From<i32> for Utility {
    fn from(v: i32) -> Self {
        Utility(v as i64 * SCALE)
    }
}

impl From<i64> for Utility {
    fn from(v: i64) -> Self {
        Utility(v * SCALE)
    }
}

impl Add for Utility {
    type Output = Utility;
    fn add(self, rhs: Utility) -> Utility {
        Utility(self.0 + rhs.0)
    }
}

impl Sub for Utility {
    type Output = Utility;
    fn sub(self, rhs: Utility) -> Utility {
        Utility(self.0 - rhs.0)
    }
}

impl Neg for Utility {
    type Output = Utility;
    fn neg(self) -> Utility {
        Utility(-self.0)
    }
}

impl Sum for Utility {
    fn sum<I: Iterator<Item = Utility>>(iter: I) -> Utility {
        iter.fold(Utility::ZERO, Add::add)
    }
}

impl fmt::Display for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / SCALE as u64;
        let frac = abs % SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Utility {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 % SCALE == 0 {
            s.serialize_i64(self.0 / SCALE)
        } else {
            s.serialize_f64(self.to_f64())
        }
    }
}

impl<'de> Deserialize<'de> for Utility {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Utility::from_f64(v).map_err(serde::de::Error::custom)
    }
}

/// Utilities of every action (by label) and of both polarities of every
/// variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UtilityFunction {
    actions: BTreeMap<String, Utility>,
    // [negative, positive] per variable
    facts: Vec<[Utility; 2]>,
}

impl UtilityFunction {
    pub fn zeros(model: &PlanningModel) -> Self {
        UtilityFunction {
            actions: model
                .actions()
                .iter()
                .map(|a| (a.label.clone(), Utility::ZERO))
                .collect(),
            facts: vec![[Utility::ZERO; 2]; model.variables().len()],
        }
    }

    pub fn action(&self, label: &str) -> Utility {
        self.actions.get(label).copied().unwrap_or_default()
    }

    pub fn fact(&self, lit: Literal) -> Utility {
        self.facts
            .get(lit.var.index())
            .map(|u| u[lit.positive as usize])
            .unwrap_or_default()
    }

    pub fn action_utilities(&self) -> &BTreeMap<String, Utility> {
        &self.actions
    }

    pub(crate) fn set_action(&mut self, label: &str, u: Utility) {
        self.actions.insert(label.to_string(), u);
    }

    pub(crate) fn set_fact(&mut self, lit: Literal, u: Utility) {
        self.facts[lit.var.index()][lit.positive as usize] = u;
    }

    pub(crate) fn push_variable(&mut self) {
        self.facts.push([Utility::ZERO; 2]);
    }

    pub(crate) fn remove_action(&mut self, label: &str) {
        self.actions.remove(label);
    }
}

/// Sum of fact utilities over a consistent set of literals.
pub fn utility_of_conjunction(
    utilities: &UtilityFunction,
    literals: impl IntoIterator<Item = Literal>,
) -> Result<Utility> {
    let lits: BTreeSet<Literal> = literals.into_iter().collect();
    if lits.iter().any(|l| lits.contains(&l.negate())) {
        return Err(Error::Contradiction("conjunction".into()));
    }
    Ok(lits.into_iter().map(|l| utilities.fact(l)).sum())
}

/// What a Good/Bad/Neutral atom is about.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Action(String),
    Fact(Literal),
}

/// Nonempty, contradiction-free conjunction of facts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conjunction(BTreeSet<Literal>);

impl Conjunction {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self> {
        let set: BTreeSet<Literal> = literals.into_iter().collect();
        if set.is_empty() {
            return Err(Error::Syntax("empty conjunction".into()));
        }
        if set.iter().any(|l| set.contains(&l.negate())) {
            return Err(Error::Contradiction("conjunction".into()));
        }
        Ok(Conjunction(set))
    }

    pub fn of_state(state: &State) -> Self {
        Conjunction(state.literals().collect())
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.0.iter().copied()
    }

    pub fn utility(&self, utilities: &UtilityFunction) -> Utility {
        self.0.iter().map(|&l| utilities.fact(l)).sum()
    }
}

/// Leaf of the query language. Variant order is the canonical atom order
/// used for deterministic tie-breaking.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoralAtom {
    Caused(Literal),
    GEq(Conjunction, Conjunction),
    Bad(Subject),
    Good(Subject),
    Neutral(Subject),
}

impl MoralAtom {
    pub fn render(&self, model: &PlanningModel) -> String {
        let subject = |s: &Subject| match s {
            Subject::Action(label) => label.clone(),
            Subject::Fact(l) => model.literal_name(*l),
        };
        let conj = |c: &Conjunction| {
            c.literals()
                .map(|l| model.literal_name(l))
                .collect::<Vec<_>>()
                .join(" ∧ ")
        };
        match self {
            MoralAtom::Caused(l) => format!("Caused({})", model.literal_name(*l)),
            MoralAtom::GEq(a, b) => format!("GEq({}, {})", conj(a), conj(b)),
            MoralAtom::Bad(s) => format!("Bad({})", subject(s)),
            MoralAtom::Good(s) => format!("Good({})", subject(s)),
            MoralAtom::Neutral(s) => format!("Neutral({})", subject(s)),
        }
    }

    /// Parses the textual form produced by [`MoralAtom::render`].
    pub fn parse(text: &str, model: &PlanningModel) -> Result<Self> {
        let text = text.trim();
        let open = text
            .find('(')
            .ok_or_else(|| Error::Syntax(format!("expected `Kind(...)`, got `{text}`")))?;
        if !text.ends_with(')') {
            return Err(Error::Syntax(format!("missing `)` in `{text}`")));
        }
        let kind = text[..open].trim();
        let body = &text[open + 1..text.len() - 1];
        let subject = |body: &str| -> Result<Subject> {
            let (positive, name) = split_negation(body.trim());
            if model.action(name).is_some() {
                if !positive {
                    return Err(Error::Syntax(format!(
                        "negated action label `{}` has no utility",
                        body.trim()
                    )));
                }
                return Ok(Subject::Action(name.to_string()));
            }
            Ok(Subject::Fact(model.parse_literal(body)?))
        };
        let conjunction = |body: &str| -> Result<Conjunction> {
            let lits = body
                .split(['∧', '&'])
                .map(|s| model.parse_literal(s))
                .collect::<Result<Vec<_>>>()?;
            Conjunction::new(lits)
        };
        match kind {
            "Good" => Ok(MoralAtom::Good(subject(body)?)),
            "Bad" => Ok(MoralAtom::Bad(subject(body)?)),
            "Neutral" => Ok(MoralAtom::Neutral(subject(body)?)),
            "Caused" => Ok(MoralAtom::Caused(model.parse_literal(body)?)),
            "GEq" => {
                let (lhs, rhs) = body
                    .split_once(',')
                    .ok_or_else(|| Error::Syntax(format!("GEq needs two operands: `{text}`")))?;
                Ok(MoralAtom::GEq(conjunction(lhs)?, conjunction(rhs)?))
            }
            other => Err(Error::Syntax(format!("unknown atom kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(MoralAtom),
    Not(Box<Formula>),
    /// Empty conjunction is ⊤.
    And(Vec<Formula>),
    /// Empty disjunction is ⊥.
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn top() -> Self {
        Formula::And(Vec::new())
    }

    pub fn atom(atom: MoralAtom) -> Self {
        Formula::Atom(atom)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Distinct atom leaves.
    pub fn atoms(&self) -> BTreeSet<MoralAtom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<MoralAtom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
            Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluates under an arbitrary atom valuation.
    pub fn eval_with(&self, value: &mut impl FnMut(&MoralAtom) -> bool) -> bool {
        match self {
            Formula::Atom(a) => value(a),
            Formula::Not(f) => !f.eval_with(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval_with(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval_with(value)),
            Formula::Implies(a, b) => !a.eval_with(value) || b.eval_with(value),
        }
    }

    pub fn render(&self, model: &PlanningModel) -> String {
        match self {
            Formula::Atom(a) => a.render(model),
            Formula::Not(f) => match **f {
                Formula::Atom(_) | Formula::Not(_) => format!("¬{}", f.render(model)),
                _ => format!("¬({})", f.render(model)),
            },
            Formula::And(fs) if fs.is_empty() => "⊤".into(),
            Formula::Or(fs) if fs.is_empty() => "⊥".into(),
            Formula::And(fs) => join(fs, " ∧ ", model),
            Formula::Or(fs) => join(fs, " ∨ ", model),
            Formula::Implies(a, b) => {
                format!("{} → {}", wrap(a, model), wrap(b, model))
            }
        }
    }
}

fn wrap(f: &Formula, model: &PlanningModel) -> String {
    match f {
        Formula::Atom(_) | Formula::Not(_) => f.render(model),
        Formula::And(fs) | Formula::Or(fs) if fs.is_empty() => f.render(model),
        _ => format!("({})", f.render(model)),
    }
}

fn join(fs: &[Formula], sep: &str, model: &PlanningModel) -> String {
    if fs.len() == 1 {
        return fs[0].render(model);
    }
    fs.iter()
        .map(|f| wrap(f, model))
        .collect::<Vec<_>>()
        .join(sep)
}

/// A model/plan pair with its execution trace, against which atoms are
/// checked.
pub struct Situation<'a> {
    model: &'a PlanningModel,
    plan: &'a Plan,
    trace: Trace,
    produced: HashSet<Literal>,
}

impl<'a> Situation<'a> {
    /// Fails if the plan is not applicable in the model.
    pub fn new(model: &'a PlanningModel, plan: &'a Plan) -> Result<Self> {
        let trace = simulate(model, plan)?;
        let produced = plan
            .steps
            .iter()
            .filter_map(|label| model.action(label))
            .flat_map(|a| a.eff.literals().iter().copied())
            .collect();
        Ok(Situation {
            model,
            plan,
            trace,
            produced,
        })
    }

    pub fn model(&self) -> &PlanningModel {
        self.model
    }

    pub fn plan(&self) -> &Plan {
        self.plan
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn final_state(&self) -> &State {
        self.trace.last()
    }

    fn subject_utility(&self, s: &Subject) -> Utility {
        match s {
            Subject::Action(label) => self.model.utilities().action(label),
            Subject::Fact(l) => self.model.fact_utility(*l),
        }
    }

    pub fn holds(&self, atom: &MoralAtom) -> bool {
        let u = self.model.utilities();
        match atom {
            MoralAtom::Good(s) => self.subject_utility(s).is_positive(),
            MoralAtom::Bad(s) => self.subject_utility(s).is_negative(),
            MoralAtom::Neutral(s) => self.subject_utility(s).is_zero(),
            MoralAtom::GEq(a, b) => a.utility(u) >= b.utility(u),
            MoralAtom::Caused(l) => self.final_state().entails(*l) && self.produced.contains(l),
        }
    }

    pub fn evaluate(&self, formula: &Formula) -> bool {
        formula.eval_with(&mut |a| self.holds(a))
    }
}

pub fn holds_atom(model: &PlanningModel, plan: &Plan, atom: &MoralAtom) -> Result<bool> {
    Ok(Situation::new(model, plan)?.holds(atom))
}

pub fn evaluate(model: &PlanningModel, plan: &Plan, formula: &Formula) -> Result<bool> {
    Ok(Situation::new(model, plan)?.evaluate(formula))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::trolley;

    fn lits(m: &PlanningModel, names: &[&str]) -> Vec<Literal> {
        names.iter().map(|n| m.parse_literal(n).unwrap()).collect()
    }

    fn atom(m: &PlanningModel, text: &str) -> MoralAtom {
        MoralAtom::parse(text, m).unwrap()
    }

    #[test]
    fn conjunction_utilities() {
        let m = trolley();
        let u = m.utilities();
        assert_eq!(
            utility_of_conjunction(u, lits(&m, &["¬5willdie", "1willdie", "done"])).unwrap(),
            Utility::from(4)
        );
        assert_eq!(
            utility_of_conjunction(u, lits(&m, &["5willdie", "¬1willdie", "¬done"])).unwrap(),
            Utility::from(-4)
        );
        assert_eq!(utility_of_conjunction(u, []).unwrap(), Utility::ZERO);
        assert!(utility_of_conjunction(u, lits(&m, &["done", "¬done"])).is_err());
    }

    #[test]
    fn trolley_atoms() {
        let m = trolley();
        let pull = Plan::from_labels(["pull"]);
        let refrain = Plan::from_labels(["refrain"]);
        assert!(holds_atom(&m, &pull, &atom(&m, "Caused(1willdie)")).unwrap());
        assert!(!holds_atom(&m, &refrain, &atom(&m, "Caused(5willdie)")).unwrap());
        for p in [&pull, &refrain] {
            assert!(holds_atom(&m, p, &atom(&m, "Neutral(pull)")).unwrap());
        }
        let geq = atom(
            &m,
            "GEq(¬5willdie ∧ 1willdie ∧ done, 5willdie ∧ ¬1willdie ∧ done)",
        );
        assert!(holds_atom(&m, &pull, &geq).unwrap());
    }

    #[test]
    fn bad_means_negative_utility() {
        let m = trolley();
        let p = Plan::from_labels(["pull"]);
        assert!(holds_atom(&m, &p, &atom(&m, "Bad(1willdie)")).unwrap());
        assert!(!holds_atom(&m, &p, &atom(&m, "Bad(¬1willdie)")).unwrap());
        assert!(holds_atom(&m, &p, &atom(&m, "Good(¬5willdie)")).unwrap());
    }

    #[test]
    fn evaluate_examples() {
        let m = trolley();
        let refrain = Plan::from_labels(["refrain"]);
        let pull = Plan::from_labels(["pull"]);
        let not_bad = Formula::not(Formula::atom(atom(&m, "Bad(refrain)")));
        assert!(evaluate(&m, &refrain, &not_bad).unwrap());
        let phi = Formula::atom(atom(&m, "Caused(done)"));
        let taut = Formula::Or(vec![phi.clone(), Formula::not(phi)]);
        assert!(evaluate(&m, &pull, &taut).unwrap());
        let harm = Formula::implies(
            Formula::atom(atom(&m, "Bad(1willdie)")),
            Formula::not(Formula::atom(atom(&m, "Caused(1willdie)"))),
        );
        assert!(!evaluate(&m, &pull, &harm).unwrap());
    }

    #[test]
    fn inapplicable_plan_is_an_error() {
        let m = trolley();
        let bogus = Plan::from_labels(["fly"]);
        assert!(evaluate(&m, &bogus, &Formula::top()).is_err());
    }

    #[test]
    fn atoms_are_deduplicated() {
        let m = trolley();
        let bad = Formula::atom(atom(&m, "Bad(1willdie)"));
        let f = Formula::implies(
            bad.clone(),
            Formula::And(vec![
                bad,
                Formula::not(Formula::atom(atom(&m, "Caused(1willdie)"))),
            ]),
        );
        assert_eq!(f.atoms().len(), 2);
        let single = Formula::atom(atom(&m, "Good(pull)"));
        assert_eq!(single.atoms().len(), 1);
    }

    #[test]
    fn parse_rejects_negated_action() {
        let m = trolley();
        assert!(MoralAtom::parse("Bad(¬pull)", &m).is_err());
        assert!(MoralAtom::parse("Caused(nothing)", &m).is_err());
        assert!(MoralAtom::parse("GEq(done ∧ ¬done, done)", &m).is_err());
        let a = atom(&m, "GEq(done & 1willdie, ¬done)");
        assert_eq!(atom(&m, &a.render(&m)), a);
    }

    #[test]
    fn utility_display() {
        assert_eq!(Utility::from(-5).to_string(), "-5");
        assert_eq!(Utility::from_f64(0.25).unwrap().to_string(), "0.25");
        assert_eq!(Utility::from_f64(-1.5).unwrap().to_string(), "-1.5");
    }
}
