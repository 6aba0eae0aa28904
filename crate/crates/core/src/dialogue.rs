//! Iterative contrastive explanation.
//!
//! A [`Session`] holds a model and the plan currently on the table. Each
//! question names a contrast case (include, exclude or order actions) and a
//! principle; the engine restricts the model with both, falls back to the
//! contrast case alone when the principle cannot be met, and explains the
//! original plan and the alternative side by side.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moral::{MoralAtom, Situation, Subject};
use crate::planning::{find_plan_with, is_plan, Plan, PlanningModel, SearchLimits};
use crate::principles::Principle;
use crate::reasons::{explain_in, MoralExplanation, ReasonKind, ReasonLimits, ReasonSet, SignedAtom};
use crate::restriction::{permissible_plan_with, restrict_with, ConstraintProperty};

/// Verbalizations as written in a model document (string keys).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbalizationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub actions: BTreeMap<String, String>,
    /// Keyed by signed atom, e.g. `¬Caused(5willdie)`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub atoms: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub principles: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty_plan: Option<String>,
}

impl VerbalizationSpec {
    pub(crate) fn resolve(&self, model: &PlanningModel) -> Result<VerbalizationTable> {
        let mut table = VerbalizationTable {
            subject: self.subject.clone(),
            empty_plan: self.empty_plan.clone(),
            ..VerbalizationTable::default()
        };
        for a in model.actions() {
            if let Some(v) = &a.verbalization {
                table.actions.insert(a.label.clone(), v.clone());
            }
        }
        table
            .actions
            .extend(self.actions.iter().map(|(k, v)| (k.clone(), v.clone())));
        for (key, phrase) in &self.atoms {
            table
                .atoms
                .insert(SignedAtom::parse(key, model)?, phrase.clone());
        }
        for (key, name) in &self.principles {
            table.principles.insert(key.parse()?, name.clone());
        }
        Ok(table)
    }
}

/// Phrases used to render explanations. Anything missing falls back to a
/// symbolic rendering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerbalizationTable {
    pub subject: Option<String>,
    /// Infinitive phrases per action label.
    pub actions: BTreeMap<String, String>,
    pub atoms: BTreeMap<SignedAtom, String>,
    pub principles: BTreeMap<Principle, String>,
    pub empty_plan: Option<String>,
}

impl VerbalizationTable {
    pub fn to_spec(&self, model: &PlanningModel) -> VerbalizationSpec {
        VerbalizationSpec {
            subject: self.subject.clone(),
            actions: self
                .actions
                .iter()
                .filter(|(label, phrase)| {
                    model
                        .action(label)
                        .is_none_or(|a| a.verbalization.as_ref() != Some(*phrase))
                })
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            atoms: self
                .atoms
                .iter()
                .map(|(k, v)| (k.render(model), v.clone()))
                .collect(),
            principles: self
                .principles
                .iter()
                .map(|(k, v)| (k.key().to_string(), v.clone()))
                .collect(),
            empty_plan: self.empty_plan.clone(),
        }
    }

    fn subject(&self) -> &str {
        self.subject.as_deref().unwrap_or("the agent")
    }

    fn principle(&self, p: Principle) -> String {
        self.principles
            .get(&p)
            .cloned()
            .unwrap_or_else(|| p.key().to_string())
    }

    fn plan_phrase(&self, plan: &Plan) -> String {
        if plan.is_empty() {
            return self
                .empty_plan
                .clone()
                .unwrap_or_else(|| "do nothing".into());
        }
        plan.steps
            .iter()
            .map(|l| self.actions.get(l).cloned().unwrap_or_else(|| l.clone()))
            .collect::<Vec<_>>()
            .join(", then ")
    }

    fn reasons_phrase(&self, reasons: &ReasonSet, model: &PlanningModel) -> String {
        let shown = presented_reasons(reasons);
        if shown.is_empty() {
            return "⊤".into();
        }
        shown
            .iter()
            .map(|l| {
                self.atoms
                    .get(*l)
                    .cloned()
                    .unwrap_or_else(|| l.render(model))
            })
            .collect::<Vec<_>>()
            .join(" and ")
    }
}

/// Drops Bad/¬Bad literals about a fact whose Caused literal is also present.
pub fn presented_reasons(reasons: &ReasonSet) -> Vec<&SignedAtom> {
    let caused: Vec<_> = reasons
        .literals
        .iter()
        .filter_map(|l| match &l.atom {
            MoralAtom::Caused(f) => Some(*f),
            _ => None,
        })
        .collect();
    reasons
        .literals
        .iter()
        .filter(|l| !matches!(&l.atom, MoralAtom::Bad(Subject::Fact(f)) if caused.contains(f)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastiveQuestion {
    pub constraint: ConstraintProperty,
    pub principle: Principle,
}

impl ContrastiveQuestion {
    pub fn new(constraint: ConstraintProperty, principle: Principle) -> Result<Self> {
        if !constraint.is_question() {
            return Err(Error::InvalidConstraint(
                "a contrast case must include, exclude or order actions".into(),
            ));
        }
        Ok(ContrastiveQuestion {
            constraint,
            principle,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContrastiveExplanation {
    pub question: ContrastiveQuestion,
    pub original_plan: Plan,
    pub original: MoralExplanation,
    /// Plan of the restricted model, which is also a plan of the original.
    pub hplan: Plan,
    pub alternative: MoralExplanation,
    /// The principle constraint had to be dropped to find `hplan`.
    pub fallback_used: bool,
    /// Necessary reasons only on the original side, and only on the
    /// alternative side.
    pub difference: (ReasonSet, ReasonSet),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Exchange {
    pub question: ContrastiveQuestion,
    pub explanation: ContrastiveExplanation,
}

/// Single-owner dialogue state.
#[derive(Clone, Debug)]
pub struct Session {
    model: Arc<PlanningModel>,
    current_plan: Plan,
    active_principle: Principle,
    history: Vec<Exchange>,
    search: SearchLimits,
    reasons: ReasonLimits,
}

impl Session {
    pub fn new(model: Arc<PlanningModel>, plan: Plan, active_principle: Principle) -> Result<Self> {
        check_plan(&model, &plan)?;
        Ok(Session {
            model,
            current_plan: plan,
            active_principle,
            history: Vec::new(),
            search: SearchLimits::default(),
            reasons: ReasonLimits::default(),
        })
    }

    /// Opens a session on the plan the planner proposes. With a principle the
    /// plan comes from the restricted model when one exists.
    pub fn start(model: Arc<PlanningModel>, principle: Option<Principle>) -> Result<Self> {
        let search = SearchLimits::default();
        let plan = match principle {
            Some(p) => permissible_plan_with(&model, p, &[], &search)?,
            None => None,
        };
        let plan = match plan {
            Some(p) => p,
            None => find_plan_with(&model, &search)?.ok_or(Error::NotAPlan)?,
        };
        Session::new(model, plan, principle.unwrap_or(Principle::Deontology))
    }

    pub fn model(&self) -> &Arc<PlanningModel> {
        &self.model
    }

    pub fn current_plan(&self) -> &Plan {
        &self.current_plan
    }

    pub fn active_principle(&self) -> Principle {
        self.active_principle
    }

    pub fn set_active_principle(&mut self, p: Principle) {
        self.active_principle = p;
    }

    pub fn history(&self) -> &[Exchange] {
        &self.history
    }

    pub fn explain_current(&self, principle: Principle) -> Result<MoralExplanation> {
        let situation = Situation::new(&self.model, &self.current_plan)?;
        explain_in(principle, &situation, &self.search, &self.reasons)
    }

    /// Answers "why the current plan rather than one satisfying the
    /// contrast case?" and records the exchange.
    pub fn ask(&mut self, question: ContrastiveQuestion) -> Result<ContrastiveExplanation> {
        if !question.constraint.is_question() {
            return Err(Error::InvalidConstraint(
                "a contrast case must include, exclude or order actions".into(),
            ));
        }
        let model = &*self.model;
        let mut hplan = permissible_plan_with(
            model,
            question.principle,
            std::slice::from_ref(&question.constraint),
            &self.search,
        )?;
        let fallback_used = hplan.is_none();
        if fallback_used {
            let h = restrict_with(model, std::slice::from_ref(&question.constraint), &self.search)?
                .into_hmodel()
                .expect("question constraints always compile");
            hplan = find_plan_with(&h.model, &self.search)?;
        }
        let hplan = hplan.ok_or(Error::ContrastCaseInfeasible)?;
        if !is_plan(model, &hplan) {
            return Err(Error::InvariantViolation(format!(
                "restricted plan `{hplan}` is not a plan of the original model"
            )));
        }
        if !question.constraint.shape_holds(&hplan) {
            return Err(Error::InvariantViolation(format!(
                "restricted plan `{hplan}` does not satisfy `{}`",
                question.constraint
            )));
        }

        let original = self.explain_current(self.active_principle)?;
        let alt_situation = Situation::new(model, &hplan)?;
        let alternative = explain_in(question.principle, &alt_situation, &self.search, &self.reasons)?;
        if !fallback_used && !alternative.judgment.permissible {
            return Err(Error::InvariantViolation(
                "plan of the principled restriction is impermissible".into(),
            ));
        }
        let only = |a: &ReasonSet, b: &ReasonSet| {
            ReasonSet::new(
                ReasonKind::Necessary,
                a.literals.iter().filter(|l| !b.contains(l)).cloned(),
            )
        };
        let difference = (
            only(&original.necessary, &alternative.necessary),
            only(&alternative.necessary, &original.necessary),
        );
        let explanation = ContrastiveExplanation {
            question: question.clone(),
            original_plan: self.current_plan.clone(),
            original,
            hplan,
            alternative,
            fallback_used,
            difference,
        };
        self.history.push(Exchange {
            question,
            explanation: explanation.clone(),
        });
        Ok(explanation)
    }

    /// Replaces the current plan; the history is kept.
    pub fn adopt(&mut self, plan: Plan) -> Result<()> {
        check_plan(&self.model, &plan)?;
        self.current_plan = plan;
        Ok(())
    }
}

/// Unknown labels are reported as such rather than as a failed plan.
fn check_plan(model: &PlanningModel, plan: &Plan) -> Result<()> {
    if let Some(bad) = plan.steps.iter().find(|l| model.action(l).is_none()) {
        return Err(Error::UnknownAction(bad.clone()));
    }
    if !is_plan(model, plan) {
        return Err(Error::NotAPlan);
    }
    Ok(())
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn verdict(e: &MoralExplanation) -> &'static str {
    if e.judgment.permissible {
        "permissible"
    } else {
        "impermissible"
    }
}

/// Two-part English rendering of a contrastive explanation.
pub fn render(ce: &ContrastiveExplanation, table: &VerbalizationTable, model: &PlanningModel) -> String {
    let subject = table.subject();
    format!(
        "{} could {}. This would be {} under the {} principle because {}. \
         Alternatively, {} could {}. Doing so is {} under the {} principle because {}.",
        capitalize(subject),
        table.plan_phrase(&ce.original_plan),
        verdict(&ce.original),
        table.principle(ce.original.judgment.principle),
        table.reasons_phrase(&ce.original.necessary, model),
        subject,
        table.plan_phrase(&ce.hplan),
        verdict(&ce.alternative),
        table.principle(ce.alternative.judgment.principle),
        table.reasons_phrase(&ce.alternative.necessary, model),
    )
}

/// One-sentence rendering of a single explanation.
pub fn render_single(
    plan: &Plan,
    e: &MoralExplanation,
    table: &VerbalizationTable,
    model: &PlanningModel,
) -> String {
    format!(
        "{} could {}. Doing so is {} under the {} principle because {}.",
        capitalize(table.subject()),
        table.plan_phrase(plan),
        verdict(e),
        table.principle(e.judgment.principle),
        table.reasons_phrase(&e.necessary, model),
    )
}
