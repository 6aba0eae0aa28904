//! Serializable, model-rendered snapshots of results.
//!
//! Atoms are rendered with the model's names; nothing is recomputed.

use serde::{Deserialize, Serialize};

use crate::dialogue::{render, ContrastiveExplanation, ContrastiveQuestion, Session, VerbalizationTable};
use crate::planning::{Plan, PlanningModel};
use crate::principles::Principle;
use crate::reasons::{MoralExplanation, ReasonSet};

fn strings(set: &ReasonSet, model: &PlanningModel) -> Vec<String> {
    set.literals.iter().map(|l| l.render(model)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplanationView {
    pub principle: Principle,
    pub permissible: bool,
    pub formula: String,
    pub sufficient: Vec<Vec<String>>,
    pub necessary: Vec<String>,
    pub necessary_alternatives: Vec<Vec<String>>,
}

impl ExplanationView {
    pub fn new(e: &MoralExplanation, model: &PlanningModel) -> Self {
        ExplanationView {
            principle: e.judgment.principle,
            permissible: e.judgment.permissible,
            formula: e.judgment.formula.render(model),
            sufficient: e.sufficient.iter().map(|s| strings(s, model)).collect(),
            necessary: strings(&e.necessary, model),
            necessary_alternatives: e
                .necessary_alternatives
                .iter()
                .map(|s| strings(s, model))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceView {
    pub original_only: Vec<String>,
    pub alternative_only: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveView {
    pub question: ContrastiveQuestion,
    pub original_plan: Plan,
    pub hplan: Plan,
    pub fallback_used: bool,
    pub original: ExplanationView,
    pub alternative: ExplanationView,
    pub difference: DifferenceView,
    pub rendered: String,
}

impl ContrastiveView {
    pub fn new(ce: &ContrastiveExplanation, model: &PlanningModel, table: &VerbalizationTable) -> Self {
        ContrastiveView {
            question: ce.question.clone(),
            original_plan: ce.original_plan.clone(),
            hplan: ce.hplan.clone(),
            fallback_used: ce.fallback_used,
            original: ExplanationView::new(&ce.original, model),
            alternative: ExplanationView::new(&ce.alternative, model),
            difference: DifferenceView {
                original_only: strings(&ce.difference.0, model),
                alternative_only: strings(&ce.difference.1, model),
            },
            rendered: render(ce, table, model),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub current_plan: Plan,
    pub active_principle: Principle,
    /// The current plan explained under every principle.
    pub judgments: Vec<ExplanationView>,
    pub history: Vec<ContrastiveView>,
}

impl SessionView {
    pub fn new(session: &Session) -> crate::Result<Self> {
        let model = session.model();
        let table = model.verbalizations();
        Ok(SessionView {
            current_plan: session.current_plan().clone(),
            active_principle: session.active_principle(),
            judgments: Principle::ALL
                .into_iter()
                .map(|p| Ok(ExplanationView::new(&session.explain_current(p)?, model)))
                .collect::<crate::Result<_>>()?,
            history: session
                .history()
                .iter()
                .map(|x| ContrastiveView::new(&x.explanation, model, table))
                .collect(),
        })
    }
}
