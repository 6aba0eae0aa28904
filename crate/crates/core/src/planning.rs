//! Propositional planning models, execution semantics and exhaustive search.
//!
//! Models are small and explicit: states are total boolean assignments over
//! the declared variables, actions are precondition/effect pairs of literals,
//! and goals are sets of clauses. All search here is breadth-first over
//! explicit states, so unsolvability answers are exact.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dialogue::VerbalizationTable;
use crate::error::{Error, Result};
use crate::moral::{Utility, UtilityFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A state variable or its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: VarId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: VarId) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: VarId) -> Self {
        Literal {
            var,
            positive: false,
        }
    }

    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }
}

// Declaration order of the variable, positive polarity first.
impl Ord for Literal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.var, !self.positive).cmp(&(other.var, !other.positive))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Total assignment of the model's variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    values: Vec<bool>,
}

impl State {
    pub fn all_false(len: usize) -> Self {
        State {
            values: vec![false; len],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Self {
        State { values }
    }

    /// State whose `i`-th variable is bit `i` of `bits`.
    pub(crate) fn from_bits(bits: u64, len: usize) -> Self {
        State {
            values: (0..len).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: VarId) -> bool {
        self.values[var.0]
    }

    pub fn set(&mut self, lit: Literal) {
        self.values[lit.var.0] = lit.positive;
    }

    pub fn entails(&self, lit: Literal) -> bool {
        self.values[lit.var.0] == lit.positive
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// The `|V|` literals that hold in this state, in declaration order.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| Literal {
            var: VarId(i),
            positive: v,
        })
    }

    pub(crate) fn push(&mut self, value: bool) {
        self.values.push(value);
    }

    pub(crate) fn truncated(&self, len: usize) -> State {
        State {
            values: self.values[..len].to_vec(),
        }
    }
}

/// Conjunction of literals with no variable repeated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PartialState {
    literals: Vec<Literal>,
}

impl PartialState {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self> {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort();
        literals.dedup();
        if literals.windows(2).any(|w| w[0].var == w[1].var) {
            return Err(Error::Contradiction("partial state".into()));
        }
        Ok(PartialState { literals })
    }

    pub fn empty() -> Self {
        PartialState::default()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.binary_search(&lit).is_ok()
    }

    pub fn mentions(&self, var: VarId) -> bool {
        self.literals.iter().any(|l| l.var == var)
    }

    pub fn satisfied_by(&self, state: &State) -> bool {
        self.literals.iter().all(|&l| state.entails(l))
    }

    pub(crate) fn insert(&mut self, lit: Literal) -> Result<()> {
        if self.mentions(lit.var) {
            return Err(Error::Contradiction("partial state".into()));
        }
        self.literals.push(lit);
        self.literals.sort();
        Ok(())
    }
}

/// Goal in clause form. A purely conjunctive goal has only unit clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoalCondition {
    clauses: Vec<Vec<Literal>>,
}

impl GoalCondition {
    pub fn conjunction(literals: impl IntoIterator<Item = Literal>) -> Self {
        let mut g = GoalCondition::default();
        for l in literals {
            g.clauses.push(vec![l]);
        }
        g
    }

    pub fn new(clauses: impl IntoIterator<Item = Vec<Literal>>) -> Result<Self> {
        let mut g = GoalCondition::default();
        for c in clauses {
            g.add_clause(c)?;
        }
        Ok(g)
    }

    pub(crate) fn add_clause(&mut self, mut clause: Vec<Literal>) -> Result<()> {
        if clause.is_empty() {
            return Err(Error::InvalidModel("empty goal clause".into()));
        }
        clause.sort();
        clause.dedup();
        if !self.clauses.contains(&clause) {
            self.clauses.push(clause);
        }
        Ok(())
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn is_conjunctive(&self) -> bool {
        self.clauses.iter().all(|c| c.len() == 1)
    }

    pub fn satisfied_by(&self, state: &State) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| state.entails(l)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub label: String,
    pub pre: PartialState,
    pub eff: PartialState,
    pub verbalization: Option<String>,
}

impl Action {
    pub fn is_applicable(&self, state: &State) -> bool {
        self.pre.satisfied_by(state)
    }

    /// Successor state; callers check applicability first.
    pub fn apply_unchecked(&self, state: &State) -> State {
        let mut next = state.clone();
        for &l in self.eff.literals() {
            next.set(l);
        }
        next
    }
}

/// An ordered sequence of action labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Plan {
    pub steps: Vec<String>,
}

impl Plan {
    pub fn empty() -> Self {
        Plan::default()
    }

    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Plan {
            steps: labels.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses `a, b c` style lists (commas and/or whitespace).
    pub fn parse(text: &str) -> Self {
        Plan::from_labels(
            text.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty()),
        )
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.steps.iter().any(|s| s == label)
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("<empty>");
        }
        f.write_str(&self.steps.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<State>,
}

impl Trace {
    pub fn initial(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trace is never empty")
    }
}

/// Caps for explicit-state search. Exceeding one is an error, never an
/// approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_variables: usize,
    pub max_states: usize,
    pub max_sequences: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_variables: 20,
            max_states: 1 << 22,
            max_sequences: 1 << 22,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanningModel {
    pub(crate) name: Option<String>,
    pub(crate) variables: Vec<String>,
    pub(crate) actions: Vec<Action>,
    pub(crate) initial: State,
    pub(crate) goal: GoalCondition,
    pub(crate) utilities: UtilityFunction,
    pub(crate) verbalizations: VerbalizationTable,
}

impl PlanningModel {
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    pub fn goal(&self) -> &GoalCondition {
        &self.goal
    }

    pub fn utilities(&self) -> &UtilityFunction {
        &self.utilities
    }

    pub fn verbalizations(&self) -> &VerbalizationTable {
        &self.verbalizations
    }

    pub fn set_verbalizations(&mut self, table: VerbalizationTable) {
        self.verbalizations = table;
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v == name).map(VarId)
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.variables[var.0]
    }

    pub fn action(&self, label: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.label == label)
    }

    pub(crate) fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.label == label)
    }

    /// Parses `v`, `¬v`, `!v`, `~v` or `not v`.
    pub fn parse_literal(&self, text: &str) -> Result<Literal> {
        let (positive, name) = split_negation(text.trim());
        let var = self
            .var_id(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        Ok(Literal { var, positive })
    }

    pub fn literal_name(&self, lit: Literal) -> String {
        if lit.positive {
            self.var_name(lit.var).to_string()
        } else {
            format!("¬{}", self.var_name(lit.var))
        }
    }

    pub fn is_goal_state(&self, state: &State) -> bool {
        self.goal.satisfied_by(state)
    }

    pub fn fact_utility(&self, lit: Literal) -> Utility {
        self.utilities.fact(lit)
    }

    /// Utility of a complete state: the sum over the facts it entails.
    pub fn state_utility(&self, state: &State) -> Utility {
        state.literals().map(|l| self.utilities.fact(l)).sum()
    }

    /// Labels in lexicographic order with their indices.
    pub(crate) fn actions_by_label(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.actions.len()).collect();
        order.sort_by(|&a, &b| self.actions[a].label.cmp(&self.actions[b].label));
        order
    }

    /// Structural checks shared by the builder and the compilations.
    pub(crate) fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        for v in &self.variables {
            check_identifier(v)?;
            if !names.insert(v.as_str()) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        let mut labels = HashSet::new();
        for a in &self.actions {
            check_identifier(&a.label)?;
            if names.contains(a.label.as_str()) {
                return Err(Error::NameCollision(a.label.clone()));
            }
            if !labels.insert(a.label.as_str()) {
                return Err(Error::DuplicateAction(a.label.clone()));
            }
            let in_range = |l: &Literal| l.var.0 < self.variables.len();
            if !a.pre.literals().iter().all(in_range) || !a.eff.literals().iter().all(in_range) {
                return Err(Error::InvalidModel(format!(
                    "action `{}` refers to an undeclared variable",
                    a.label
                )));
            }
        }
        if self.initial.len() != self.variables.len() {
            return Err(Error::InvalidModel(
                "initial state is not total over the variables".into(),
            ));
        }
        if self
            .goal
            .clauses()
            .iter()
            .flatten()
            .any(|l| l.var.0 >= self.variables.len())
        {
            return Err(Error::InvalidModel(
                "goal refers to an undeclared variable".into(),
            ));
        }
        let units: Vec<Literal> = self
            .goal
            .clauses()
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| c[0])
            .collect();
        if units.iter().any(|l| units.contains(&l.negate())) {
            return Err(Error::Contradiction("goal".into()));
        }
        Ok(())
    }
}

pub(crate) fn split_negation(text: &str) -> (bool, &str) {
    for prefix in ["¬", "!", "~"] {
        if let Some(rest) = text.strip_prefix(prefix) {
            return (false, rest.trim_start());
        }
    }
    if let Some(rest) = text.strip_prefix("not ") {
        return (false, rest.trim_start());
    }
    (true, text)
}

pub(crate) fn check_identifier(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidName(name.to_string()))
    }
}

/// String-keyed construction of a [`PlanningModel`].
///
/// Utilities not given explicitly default to zero.
#[derive(Clone, Debug, Default)]
pub struct ModelBuilder {
    name: Option<String>,
    variables: Vec<String>,
    actions: Vec<(String, Vec<String>, Vec<String>, Option<String>)>,
    initially_true: Vec<String>,
    goal: Vec<Vec<String>>,
    action_utilities: Vec<(String, Utility)>,
    fact_utilities: Vec<(String, Utility)>,
    verbalizations: Option<crate::dialogue::VerbalizationSpec>,
    allow_disjunctive_goal: bool,
}

impl ModelBuilder {
    pub fn new() -> Self {
        ModelBuilder::default()
    }

    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn variable(mut self, name: impl Into<String>) -> Self {
        self.variables.push(name.into());
        self
    }

    pub fn variables<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.variables.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn action(mut self, label: &str, pre: &[&str], eff: &[&str]) -> Self {
        self.actions.push((
            label.to_string(),
            pre.iter().map(|s| s.to_string()).collect(),
            eff.iter().map(|s| s.to_string()).collect(),
            None,
        ));
        self
    }

    pub fn action_owned(
        mut self,
        label: String,
        pre: Vec<String>,
        eff: Vec<String>,
        verbalization: Option<String>,
    ) -> Self {
        self.actions.push((label, pre, eff, verbalization));
        self
    }

    pub fn verbalize_action(mut self, label: &str, phrase: &str) -> Self {
        if let Some(a) = self.actions.iter_mut().find(|a| a.0 == label) {
            a.3 = Some(phrase.to_string());
        }
        self
    }

    pub fn initially_true<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.initially_true.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn goal_literal(mut self, lit: &str) -> Self {
        self.goal.push(vec![lit.to_string()]);
        self
    }

    pub fn goal_clause(mut self, clause: Vec<String>) -> Self {
        self.goal.push(clause);
        self
    }

    pub fn allow_disjunctive_goal(mut self, allow: bool) -> Self {
        self.allow_disjunctive_goal = allow;
        self
    }

    pub fn action_utility(mut self, label: &str, value: impl Into<Utility>) -> Self {
        self.action_utilities.push((label.to_string(), value.into()));
        self
    }

    pub fn fact_utility(mut self, literal: &str, value: impl Into<Utility>) -> Self {
        self.fact_utilities.push((literal.to_string(), value.into()));
        self
    }

    pub fn verbalizations(mut self, spec: crate::dialogue::VerbalizationSpec) -> Self {
        self.verbalizations = Some(spec);
        self
    }

    pub fn build(self) -> Result<PlanningModel> {
        let mut model = PlanningModel {
            name: self.name,
            variables: self.variables,
            actions: Vec::new(),
            initial: State::all_false(0),
            goal: GoalCondition::default(),
            utilities: UtilityFunction::default(),
            verbalizations: VerbalizationTable::default(),
        };
        // Names first so literals can resolve.
        let mut seen = HashSet::new();
        for v in &model.variables {
            check_identifier(v)?;
            if !seen.insert(v.clone()) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        let parse_all = |model: &PlanningModel, lits: &[String], what: &str| -> Result<PartialState> {
            let parsed = lits
                .iter()
                .map(|s| model.parse_literal(s))
                .collect::<Result<Vec<_>>>()?;
            PartialState::new(parsed).map_err(|_| Error::Contradiction(what.to_string()))
        };
        let mut actions = Vec::with_capacity(self.actions.len());
        for (label, pre, eff, verbalization) in &self.actions {
            actions.push(Action {
                label: label.clone(),
                pre: parse_all(&model, pre, &format!("precondition of `{label}`"))?,
                eff: parse_all(&model, eff, &format!("effect of `{label}`"))?,
                verbalization: verbalization.clone(),
            });
        }
        let mut initial = State::all_false(model.variables.len());
        for name in &self.initially_true {
            let var = model
                .var_id(name)
                .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
            initial.set(Literal::pos(var));
        }
        let mut goal = GoalCondition::default();
        for clause in &self.goal {
            if clause.len() > 1 && !self.allow_disjunctive_goal {
                return Err(Error::InvalidModel(
                    "disjunctive goal clauses are only allowed in restricted models".into(),
                ));
            }
            let lits = clause
                .iter()
                .map(|s| model.parse_literal(s))
                .collect::<Result<Vec<_>>>()?;
            goal.add_clause(lits)?;
        }
        model.actions = actions;
        model.initial = initial;
        model.goal = goal;
        model.utilities = UtilityFunction::zeros(&model);
        for (label, u) in &self.action_utilities {
            if model.action(label).is_none() {
                return Err(Error::UnknownAction(label.clone()));
            }
            model.utilities.set_action(label, *u);
        }
        for (lit, u) in &self.fact_utilities {
            let l = model.parse_literal(lit)?;
            model.utilities.set_fact(l, *u);
        }
        model.validate()?;
        if let Some(spec) = self.verbalizations {
            model.verbalizations = spec.resolve(&model)?;
        }
        Ok(model)
    }
}

pub fn is_applicable(action: &Action, state: &State) -> bool {
    action.is_applicable(state)
}

pub fn apply(action: &Action, state: &State) -> Result<State> {
    if !action.is_applicable(state) {
        return Err(Error::Inapplicable {
            step: 0,
            action: action.label.clone(),
        });
    }
    Ok(action.apply_unchecked(state))
}

/// Executes `plan` from the initial state, failing at the first
/// inapplicable step.
pub fn simulate(model: &PlanningModel, plan: &Plan) -> Result<Trace> {
    let mut states = Vec::with_capacity(plan.len() + 1);
    states.push(model.initial.clone());
    for (step, label) in plan.steps.iter().enumerate() {
        let action = model
            .action(label)
            .ok_or_else(|| Error::UnknownAction(label.clone()))?;
        let current = states.last().expect("nonempty");
        if !action.is_applicable(current) {
            return Err(Error::Inapplicable {
                step,
                action: label.clone(),
            });
        }
        let next = action.apply_unchecked(current);
        states.push(next);
    }
    Ok(Trace { states })
}

pub fn is_plan(model: &PlanningModel, plan: &Plan) -> bool {
    match simulate(model, plan) {
        Ok(trace) => model.is_goal_state(trace.last()),
        Err(_) => false,
    }
}

pub fn reachable_states(model: &PlanningModel) -> Result<Vec<State>> {
    reachable_states_with(model, &SearchLimits::default())
}

/// Every state reachable from the initial state, in breadth-first discovery
/// order (initial state first).
pub fn reachable_states_with(model: &PlanningModel, limits: &SearchLimits) -> Result<Vec<State>> {
    if model.variables.len() > limits.max_variables {
        return Err(Error::ResourceLimit {
            what: "variables for reachability",
            limit: limits.max_variables,
        });
    }
    let order = model.actions_by_label();
    let mut seen: HashSet<State> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(model.initial.clone());
    queue.push_back(model.initial.clone());
    while let Some(state) = queue.pop_front() {
        for &i in &order {
            let a = &model.actions[i];
            if a.is_applicable(&state) {
                let next = a.apply_unchecked(&state);
                if seen.insert(next.clone()) {
                    if seen.len() > limits.max_states {
                        return Err(Error::ResourceLimit {
                            what: "reachable states",
                            limit: limits.max_states,
                        });
                    }
                    queue.push_back(next);
                }
            }
        }
        out.push(state);
    }
    Ok(out)
}

pub fn find_plan(model: &PlanningModel) -> Result<Option<Plan>> {
    find_plan_with(model, &SearchLimits::default())
}

/// Breadth-first search returning the shortest plan; among shortest plans the
/// lexicographically smallest sequence of labels wins.
pub fn find_plan_with(model: &PlanningModel, limits: &SearchLimits) -> Result<Option<Plan>> {
    let order = model.actions_by_label();
    // (state, parent index, action index)
    let mut nodes: Vec<(State, usize, usize)> = vec![(model.initial.clone(), usize::MAX, 0)];
    let mut index: HashMap<State, usize> = HashMap::new();
    index.insert(model.initial.clone(), 0);
    let mut head = 0;
    while head < nodes.len() {
        let state = nodes[head].0.clone();
        if model.is_goal_state(&state) {
            let mut steps = Vec::new();
            let mut cur = head;
            while nodes[cur].1 != usize::MAX {
                steps.push(model.actions[nodes[cur].2].label.clone());
                cur = nodes[cur].1;
            }
            steps.reverse();
            return Ok(Some(Plan { steps }));
        }
        for &i in &order {
            let a = &model.actions[i];
            if a.is_applicable(&state) {
                let next = a.apply_unchecked(&state);
                if !index.contains_key(&next) {
                    if nodes.len() >= limits.max_states {
                        return Err(Error::ResourceLimit {
                            what: "search states",
                            limit: limits.max_states,
                        });
                    }
                    index.insert(next.clone(), nodes.len());
                    nodes.push((next, head, i));
                }
            }
        }
        head += 1;
    }
    Ok(None)
}

pub fn all_plans(model: &PlanningModel, max_len: usize) -> Result<Vec<Plan>> {
    all_plans_with(model, max_len, &SearchLimits::default())
}

/// Every applicable, goal-reaching action sequence of length at most
/// `max_len`, ordered by length and then label sequence.
pub fn all_plans_with(
    model: &PlanningModel,
    max_len: usize,
    limits: &SearchLimits,
) -> Result<Vec<Plan>> {
    let order = model.actions_by_label();
    let mut out = Vec::new();
    let mut visited = 0usize;
    let mut prefix = Vec::new();
    // Depth-first per length bound keeps the output grouped by length.
    for len in 0..=max_len {
        enumerate(
            model,
            &order,
            &model.initial,
            len,
            &mut prefix,
            &mut out,
            &mut visited,
            limits,
        )?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    model: &PlanningModel,
    order: &[usize],
    state: &State,
    remaining: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Plan>,
    visited: &mut usize,
    limits: &SearchLimits,
) -> Result<()> {
    *visited += 1;
    if *visited > limits.max_sequences {
        return Err(Error::ResourceLimit {
            what: "enumerated sequences",
            limit: limits.max_sequences,
        });
    }
    if remaining == 0 {
        if model.is_goal_state(state) {
            out.push(Plan {
                steps: prefix
                    .iter()
                    .map(|&i| model.actions[i].label.clone())
                    .collect(),
            });
        }
        return Ok(());
    }
    for &i in order {
        let a = &model.actions[i];
        if a.is_applicable(state) {
            let next = a.apply_unchecked(state);
            prefix.push(i);
            enumerate(model, order, &next, remaining - 1, prefix, out, visited, limits)?;
            prefix.pop();
        }
    }
    Ok(())
}
