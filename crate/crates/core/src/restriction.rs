//! Model restrictions: compiling a principle or a contrast case into a model
//! whose plans all satisfy it.
//!
//! Compilations only ever append variables, so a plan of a restricted model
//! is projected back onto the original by ignoring the fresh variables. The
//! labels are unchanged.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planning::{
    check_identifier, find_plan_with, reachable_states_with, GoalCondition, Literal, Plan, PlanningModel,
    SearchLimits, State, VarId,
};
use crate::principles::Principle;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintProperty {
    Principle { principle: Principle },
    Include { action: String },
    Exclude { action: String },
    Before { first: String, second: String },
}

impl ConstraintProperty {
    pub fn principle(p: Principle) -> Self {
        ConstraintProperty::Principle { principle: p }
    }

    pub fn include(action: impl Into<String>) -> Self {
        ConstraintProperty::Include {
            action: action.into(),
        }
    }

    pub fn exclude(action: impl Into<String>) -> Self {
        ConstraintProperty::Exclude {
            action: action.into(),
        }
    }

    pub fn before(first: impl Into<String>, second: impl Into<String>) -> Self {
        ConstraintProperty::Before {
            first: first.into(),
            second: second.into(),
        }
    }

    /// Action labels the constraint mentions.
    pub fn labels(&self) -> Vec<&str> {
        match self {
            ConstraintProperty::Principle { .. } => Vec::new(),
            ConstraintProperty::Include { action } | ConstraintProperty::Exclude { action } => {
                vec![action]
            }
            ConstraintProperty::Before { first, second } => vec![first, second],
        }
    }

    pub fn is_question(&self) -> bool {
        !matches!(self, ConstraintProperty::Principle { .. })
    }

    /// Whether a plan has the shape a question constraint asks for. Principle
    /// constraints are not plan-shape predicates and always return true here.
    pub fn shape_holds(&self, plan: &Plan) -> bool {
        let first = |label: &str| plan.steps.iter().position(|s| s == label);
        match self {
            ConstraintProperty::Principle { .. } => true,
            ConstraintProperty::Include { action } => plan.contains(action),
            ConstraintProperty::Exclude { action } => !plan.contains(action),
            ConstraintProperty::Before { first: a, second: b } => match (first(a), first(b)) {
                (Some(i), Some(j)) => i < j,
                _ => false,
            },
        }
    }
}

impl fmt::Display for ConstraintProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintProperty::Principle { principle } => write!(f, "principle {principle}"),
            ConstraintProperty::Include { action } => write!(f, "include {action}"),
            ConstraintProperty::Exclude { action } => write!(f, "exclude {action}"),
            ConstraintProperty::Before { first, second } => write!(f, "{first} before {second}"),
        }
    }
}

/// A restricted model together with how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct HModel {
    pub model: PlanningModel,
    pub applied: Vec<ConstraintProperty>,
    pub original: Arc<PlanningModel>,
}

impl HModel {
    pub fn unrestricted(model: PlanningModel) -> Self {
        HModel {
            original: Arc::new(model.clone()),
            model,
            applied: Vec::new(),
        }
    }

    /// Variables added by the compilations, in creation order.
    pub fn fresh_variables(&self) -> &[String] {
        &self.model.variables()[self.original.variables().len()..]
    }

    /// Drops the fresh variables from a state of the restricted model.
    pub fn project_state(&self, state: &State) -> State {
        state.truncated(self.original.variables().len())
    }

    fn then(self, model: PlanningModel, c: ConstraintProperty) -> HModel {
        let mut applied = self.applied;
        applied.push(c);
        HModel {
            model,
            applied,
            original: self.original,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RestrictionOutcome {
    Restricted(HModel),
    Impermissible,
}

impl RestrictionOutcome {
    pub fn hmodel(&self) -> Option<&HModel> {
        match self {
            RestrictionOutcome::Restricted(h) => Some(h),
            RestrictionOutcome::Impermissible => None,
        }
    }

    pub fn into_hmodel(self) -> Option<HModel> {
        match self {
            RestrictionOutcome::Restricted(h) => Some(h),
            RestrictionOutcome::Impermissible => None,
        }
    }
}

fn add_fresh_variable(model: &mut PlanningModel, name: String) -> Result<VarId> {
    check_identifier(&name)?;
    if model.var_id(&name).is_some() || model.action(&name).is_some() {
        return Err(Error::NameCollision(name));
    }
    model.variables.push(name);
    model.initial.push(false);
    model.utilities.push_variable();
    Ok(VarId(model.variables.len() - 1))
}

pub(crate) fn deontology_model(model: &PlanningModel) -> PlanningModel {
    let mut out = model.clone();
    let utilities = &model.utilities;
    out.actions
        .retain(|a| !utilities.action(&a.label).is_negative());
    for a in &model.actions {
        if out.action(&a.label).is_none() {
            out.utilities.remove_action(&a.label);
        }
    }
    out
}

/// Removes every action with negative utility.
pub fn restrict_deontology(model: &PlanningModel) -> HModel {
    HModel::unrestricted(model.clone()).then(
        deontology_model(model),
        ConstraintProperty::principle(Principle::Deontology),
    )
}

/// One candidate goal considered by the utilitarian search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub state: State,
    pub utility: crate::moral::Utility,
    pub satisfies_goal: bool,
    pub solvable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UtilitarianSearch {
    pub outcome: RestrictionOutcome,
    /// Candidates in the order they were tried.
    pub candidates: Vec<Candidate>,
}

/// Searches complete candidate goal states in nonincreasing utility order
/// (goal-satisfying ones first among ties). The first candidate some plan
/// reaches decides: if it satisfies the original goal it becomes the new
/// goal, otherwise the model has no utilitarian-permissible plan.
pub fn utilitarian_search(model: &PlanningModel, limits: &SearchLimits) -> Result<UtilitarianSearch> {
    let outcome_model = utilitarian_model(model, limits)?;
    Ok(UtilitarianSearch {
        outcome: match outcome_model.0 {
            Some(m) => RestrictionOutcome::Restricted(HModel::unrestricted(model.clone()).then(
                m,
                ConstraintProperty::principle(Principle::Utilitarianism),
            )),
            None => RestrictionOutcome::Impermissible,
        },
        candidates: outcome_model.1,
    })
}

pub(crate) fn utilitarian_model(
    model: &PlanningModel,
    limits: &SearchLimits,
) -> Result<(Option<PlanningModel>, Vec<Candidate>)> {
    let n = model.variables.len();
    if n > limits.max_variables || n >= 63 {
        return Err(Error::ResourceLimit {
            what: "variables for candidate goal states",
            limit: limits.max_variables,
        });
    }
    let reachable: std::collections::HashSet<State> =
        reachable_states_with(model, limits)?.into_iter().collect();
    let mut candidates: Vec<(crate::moral::Utility, bool, u64)> = (0..1u64 << n)
        .map(|bits| {
            let s = State::from_bits(bits, n);
            (model.state_utility(&s), model.is_goal_state(&s), bits)
        })
        .collect();
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    let mut log = Vec::new();
    for (utility, satisfies_goal, bits) in candidates {
        let state = State::from_bits(bits, n);
        let solvable = reachable.contains(&state);
        log.push(Candidate {
            state: state.clone(),
            utility,
            satisfies_goal,
            solvable,
        });
        if solvable {
            if satisfies_goal {
                let mut out = model.clone();
                out.goal = GoalCondition::conjunction(state.literals());
                return Ok((Some(out), log));
            }
            return Ok((None, log));
        }
    }
    Ok((None, log))
}

pub fn restrict_utilitarianism(model: &PlanningModel) -> Result<RestrictionOutcome> {
    Ok(utilitarian_search(model, &SearchLimits::default())?.outcome)
}

pub(crate) fn do_no_harm_model(model: &PlanningModel) -> Result<PlanningModel> {
    let mut out = model.clone();
    let n = model.variables.len();
    for v in 0..n {
        for positive in [true, false] {
            let bad = Literal {
                var: VarId(v),
                positive,
            };
            if !model.fact_utility(bad).is_negative() {
                continue;
            }
            let name = if positive {
                format!("produced_{}", model.variables[v])
            } else {
                format!("produced_not_{}", model.variables[v])
            };
            let produced = add_fresh_variable(&mut out, name)?;
            out.goal
                .add_clause(vec![bad.negate(), Literal::neg(produced)])?;
            for action in out.actions.iter_mut() {
                if action.eff.contains(bad) {
                    action.eff.insert(Literal::pos(produced))?;
                } else if action.eff.contains(bad.negate()) {
                    action.eff.insert(Literal::neg(produced))?;
                }
            }
        }
    }
    Ok(out)
}

/// Tracks, for every bad fact, whether the last action touching it produced
/// it, and forbids ending with a produced bad fact.
pub fn restrict_do_no_harm(model: &PlanningModel) -> Result<HModel> {
    Ok(HModel::unrestricted(model.clone()).then(
        do_no_harm_model(model)?,
        ConstraintProperty::principle(Principle::DoNoHarm),
    ))
}

fn executed_marker(out: &mut PlanningModel, label: &str) -> Result<VarId> {
    let idx = out
        .action_index(label)
        .ok_or_else(|| Error::UnknownAction(label.to_string()))?;
    let var = add_fresh_variable(out, format!("executed_{label}"))?;
    out.actions[idx].eff.insert(Literal::pos(var))?;
    Ok(var)
}

pub(crate) fn question_model(model: &PlanningModel, c: &ConstraintProperty) -> Result<PlanningModel> {
    let mut out = model.clone();
    match c {
        ConstraintProperty::Principle { .. } => {
            return Err(Error::InvalidConstraint(
                "principle constraints are not questions".into(),
            ))
        }
        ConstraintProperty::Include { action } => {
            let var = executed_marker(&mut out, action)?;
            out.goal.add_clause(vec![Literal::pos(var)])?;
        }
        ConstraintProperty::Exclude { action } => {
            let idx = out
                .action_index(action)
                .ok_or_else(|| Error::UnknownAction(action.clone()))?;
            out.actions.remove(idx);
            out.utilities.remove_action(action);
        }
        ConstraintProperty::Before { first, second } => {
            if first == second {
                return Err(Error::InvalidConstraint(format!(
                    "`{first}` cannot precede itself"
                )));
            }
            if out.action(second).is_none() {
                return Err(Error::UnknownAction(second.clone()));
            }
            let ran_first = executed_marker(&mut out, first)?;
            let ran_second = executed_marker(&mut out, second)?;
            let idx = out.action_index(second).expect("checked above");
            out.actions[idx].pre.insert(Literal::pos(ran_first))?;
            out.goal.add_clause(vec![Literal::pos(ran_second)])?;
        }
    }
    Ok(out)
}

/// Compiles an include/exclude/ordering constraint.
pub fn restrict_question(model: &PlanningModel, c: &ConstraintProperty) -> Result<HModel> {
    Ok(HModel::unrestricted(model.clone()).then(question_model(model, c)?, c.clone()))
}

pub fn restrict(model: &PlanningModel, constraints: &[ConstraintProperty]) -> Result<RestrictionOutcome> {
    restrict_with(model, constraints, &SearchLimits::default())
}

/// Applies the constraints left to right. An impermissible utilitarian
/// search stops the fold.
pub fn restrict_with(
    model: &PlanningModel,
    constraints: &[ConstraintProperty],
    limits: &SearchLimits,
) -> Result<RestrictionOutcome> {
    let mut h = HModel::unrestricted(model.clone());
    for c in constraints {
        let next = match c {
            ConstraintProperty::Principle { principle } => match principle {
                Principle::Deontology => deontology_model(&h.model),
                Principle::DoNoHarm => do_no_harm_model(&h.model)?,
                Principle::Utilitarianism => match utilitarian_model(&h.model, limits)?.0 {
                    Some(m) => m,
                    None => return Ok(RestrictionOutcome::Impermissible),
                },
            },
            _ => question_model(&h.model, c)?,
        };
        h = h.then(next, c.clone());
    }
    Ok(RestrictionOutcome::Restricted(h))
}

/// Goal-satisfying reachable states of maximal utility, each as the goal of
/// a copy of the model, in the order Algorithm 1 would try them. Empty when
/// no best reachable state satisfies the goal.
pub(crate) fn utilitarian_optima(
    model: &PlanningModel,
    limits: &SearchLimits,
) -> Result<Vec<PlanningModel>> {
    let reachable = reachable_states_with(model, limits)?;
    let best = reachable.iter().map(|s| model.state_utility(s)).max();
    let key = |s: &State| -> u64 {
        s.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| (v as u64) << i)
            .sum()
    };
    let mut states: Vec<&State> = reachable
        .iter()
        .filter(|s| Some(model.state_utility(s)) == best && model.is_goal_state(s))
        .collect();
    states.sort_by_key(|s| key(s));
    Ok(states
        .into_iter()
        .map(|s| {
            let mut out = model.clone();
            out.goal = GoalCondition::conjunction(s.literals());
            out
        })
        .collect())
}

/// Shortest plan satisfying `constraints` that is permissible under
/// `principle`. The principle is compiled before the constraints, so it is
/// judged against the unconstrained model; every utilitarian optimum is
/// tried, not only the first.
pub fn permissible_plan_with(
    model: &PlanningModel,
    principle: Principle,
    constraints: &[ConstraintProperty],
    limits: &SearchLimits,
) -> Result<Option<Plan>> {
    let bases = match principle {
        Principle::Utilitarianism => utilitarian_optima(model, limits)?,
        p => restrict_with(model, &[ConstraintProperty::principle(p)], limits)?
            .into_hmodel()
            .map(|h| h.model)
            .into_iter()
            .collect(),
    };
    for c in constraints {
        if let Some(l) = c.labels().into_iter().find(|l| model.action(l).is_none()) {
            return Err(Error::UnknownAction(l.to_string()));
        }
    }
    let mut best: Option<Plan> = None;
    'bases: for base in bases {
        // Deontology may have removed actions the constraints mention.
        let mut kept = Vec::new();
        for c in constraints {
            if c.labels().iter().all(|l| base.action(l).is_some()) {
                kept.push(c.clone());
            } else if !matches!(c, ConstraintProperty::Exclude { .. }) {
                continue 'bases;
            }
        }
        let Some(h) = restrict_with(&base, &kept, limits)?.into_hmodel() else {
            continue;
        };
        if let Some(plan) = find_plan_with(&h.model, limits)? {
            let shorter = best
                .as_ref()
                .is_none_or(|b| (plan.len(), &plan.steps) < (b.len(), &b.steps));
            if shorter {
                best = Some(plan);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::trolley;
    use crate::planning::{all_plans, find_plan, is_plan, simulate, ModelBuilder};

    fn labels(m: &PlanningModel) -> Vec<&str> {
        m.actions().iter().map(|a| a.label.as_str()).collect()
    }

    #[test]
    fn deontology_keeps_neutral_actions() {
        assert_eq!(labels(&restrict_deontology(&trolley()).model), ["pull", "refrain"]);
        let m = ModelBuilder::new()
            .variable("x")
            .action("a", &[], &[])
            .action("b", &[], &[])
            .action_utility("a", 1)
            .action_utility("b", -1)
            .build()
            .unwrap();
        assert_eq!(labels(&restrict_deontology(&m).model), ["a"]);
        let all_bad = ModelBuilder::new()
            .variable("x")
            .action("a", &[], &[])
            .action_utility("a", -1)
            .build()
            .unwrap();
        assert!(restrict_deontology(&all_bad).model.actions().is_empty());
    }

    #[test]
    fn utilitarian_search_on_trolley() {
        let m = trolley();
        let search = utilitarian_search(&m, &SearchLimits::default()).unwrap();
        let h = search.outcome.hmodel().expect("restricted");
        let goal: Vec<String> = h
            .model
            .goal()
            .clauses()
            .iter()
            .map(|c| m.literal_name(c[0]))
            .collect();
        assert_eq!(goal, ["¬5willdie", "1willdie", "done"]);
        // Two utility-6 candidates are unreachable before the winner.
        let tried: Vec<(i64, bool)> = search
            .candidates
            .iter()
            .map(|c| (c.utility.micros() / 1_000_000, c.solvable))
            .collect();
        assert_eq!(tried, [(6, false), (6, false), (4, true)]);
        assert!(search.candidates[0].satisfies_goal);
        assert_eq!(all_plans(&h.model, 1).unwrap(), vec![Plan::parse("pull")]);
    }

    #[test]
    fn utilitarian_counterexample_is_impermissible() {
        let m = ModelBuilder::new()
            .variable("v")
            .action("unset", &[], &["¬v"])
            .initially_true(["v"])
            .goal_literal("v")
            .fact_utility("¬v", 1)
            .build()
            .unwrap();
        assert_eq!(
            restrict_utilitarianism(&m).unwrap(),
            RestrictionOutcome::Impermissible
        );
    }

    #[test]
    fn utilitarian_initial_state_already_best() {
        let m = ModelBuilder::new()
            .variable("v")
            .action("unset", &[], &["¬v"])
            .initially_true(["v"])
            .goal_literal("v")
            .fact_utility("v", 1)
            .build()
            .unwrap();
        let h = restrict_utilitarianism(&m).unwrap().into_hmodel().unwrap();
        assert_eq!(find_plan(&h.model).unwrap(), Some(Plan::empty()));
    }

    #[test]
    fn do_no_harm_compilation_of_trolley() {
        let m = trolley();
        let h = restrict_do_no_harm(&m).unwrap();
        assert_eq!(h.fresh_variables(), ["produced_5willdie", "produced_1willdie"]);
        let hm = &h.model;
        let pull = hm.action("pull").unwrap();
        assert!(pull.eff.contains(hm.parse_literal("¬produced_5willdie").unwrap()));
        assert!(pull.eff.contains(hm.parse_literal("produced_1willdie").unwrap()));
        assert_eq!(hm.action("refrain").unwrap().eff.literals().len(), 1);
        assert_eq!(hm.goal().clauses().len(), 3);
        assert!(!hm.initial().get(hm.var_id("produced_1willdie").unwrap()));
        assert!(is_plan(hm, &Plan::parse("refrain")));
        assert!(!is_plan(hm, &Plan::parse("pull")));
        let t = simulate(hm, &Plan::parse("pull")).unwrap();
        assert!(simulate(&m, &Plan::parse("pull")).unwrap().last() == &h.project_state(t.last()));
    }

    #[test]
    fn do_no_harm_without_bad_facts_is_identity() {
        let m = ModelBuilder::new()
            .variable("x")
            .action("a", &[], &["x"])
            .goal_literal("x")
            .build()
            .unwrap();
        assert_eq!(restrict_do_no_harm(&m).unwrap().model, m);
    }

    #[test]
    fn do_no_harm_name_collision() {
        let m = ModelBuilder::new()
            .variables(["x", "produced_x"])
            .fact_utility("x", -1)
            .build()
            .unwrap();
        assert!(matches!(restrict_do_no_harm(&m), Err(Error::NameCollision(_))));
        let twice = restrict_do_no_harm(&trolley()).unwrap();
        assert!(restrict_do_no_harm(&twice.model).is_err());
    }

    #[test]
    fn question_compilations() {
        let m = trolley();
        let inc = restrict_question(&m, &ConstraintProperty::include("pull")).unwrap();
        for p in all_plans(&inc.model, 3).unwrap() {
            assert!(p.contains("pull"));
            assert!(is_plan(&m, &p));
        }
        let exc = restrict_question(&m, &ConstraintProperty::exclude("pull")).unwrap();
        assert_eq!(
            all_plans(&exc.model, 2).unwrap(),
            vec![Plan::parse("refrain"), Plan::parse("refrain refrain")]
        );
        let ord = restrict_question(&m, &ConstraintProperty::before("refrain", "pull")).unwrap();
        let c = ConstraintProperty::before("refrain", "pull");
        let plans = all_plans(&ord.model, 3).unwrap();
        assert!(!plans.is_empty());
        assert!(plans.iter().all(|p| c.shape_holds(p)));
        assert!(matches!(
            restrict_question(&m, &ConstraintProperty::include("fly")),
            Err(Error::UnknownAction(_))
        ));
        assert!(restrict_question(&m, &ConstraintProperty::before("pull", "pull")).is_err());
    }

    #[test]
    fn restrict_folds_question_then_principle() {
        let m = trolley();
        let dnh = restrict(
            &m,
            &[
                ConstraintProperty::include("pull"),
                ConstraintProperty::principle(Principle::DoNoHarm),
            ],
        )
        .unwrap();
        assert_eq!(find_plan(&dnh.hmodel().unwrap().model).unwrap(), None);
        let util = restrict(
            &m,
            &[
                ConstraintProperty::include("pull"),
                ConstraintProperty::principle(Principle::Utilitarianism),
            ],
        )
        .unwrap();
        let plan = find_plan(&util.hmodel().unwrap().model).unwrap().unwrap();
        assert!(plan.contains("pull"));
        let same = restrict(&m, &[]).unwrap();
        assert_eq!(same.hmodel().unwrap().model, m);
    }

    #[test]
    fn every_utilitarian_optimum_is_tried() {
        // Two equally good goal states; only the second is reachable with b,
        // and Algorithm 1 alone would commit to the first.
        let m = ModelBuilder::new()
            .variables(["x", "y", "g"])
            .action("a", &["¬y"], &["x", "g"])
            .action("b", &["¬x"], &["y", "g"])
            .goal_literal("g")
            .fact_utility("x", 1)
            .fact_utility("y", 1)
            .build()
            .unwrap();
        let first = restrict(&m, &[ConstraintProperty::principle(Principle::Utilitarianism)])
            .unwrap()
            .into_hmodel()
            .unwrap();
        let include_b = [ConstraintProperty::include("b")];
        assert!(restrict(&first.model, &include_b)
            .unwrap()
            .into_hmodel()
            .map(|h| find_plan(&h.model).unwrap())
            .unwrap()
            .is_none());
        let plan = permissible_plan_with(
            &m,
            Principle::Utilitarianism,
            &include_b,
            &SearchLimits::default(),
        )
        .unwrap();
        assert_eq!(plan, Some(Plan::parse("b")));
    }
}
