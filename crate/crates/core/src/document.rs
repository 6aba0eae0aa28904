//! JSON model documents.
//!
//! Restricted models use the same layout plus a `provenance` block holding
//! the original model and the constraints that were compiled in.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dialogue::VerbalizationSpec;
use crate::error::{Error, Result};
use crate::moral::Utility;
use crate::planning::{Literal, ModelBuilder, PlanningModel, VarId};
use crate::restriction::{ConstraintProperty, HModel};

const TROLLEY: &str = include_str!("../data/trolley.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub variables: Vec<String>,
    pub actions: Vec<ActionDocument>,
    /// Variables true in the initial state.
    #[serde(default)]
    pub init: Vec<String>,
    pub goal: Vec<GoalEntry>,
    #[serde(default)]
    pub utilities: UtilitiesDocument,
    #[serde(default, skip_serializing_if = "is_default")]
    pub verbalizations: VerbalizationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDocument {
    pub label: String,
    #[serde(default)]
    pub pre: Vec<String>,
    #[serde(default)]
    pub eff: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbalization: Option<String>,
}

/// A goal literal, or a disjunctive clause (restricted models only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GoalEntry {
    Literal(String),
    Clause(Vec<String>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitiesDocument {
    #[serde(default)]
    pub actions: BTreeMap<String, Utility>,
    /// Signed literal to utility; omitted facts are worth zero.
    #[serde(default)]
    pub facts: BTreeMap<String, Utility>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub original: Box<ModelDocument>,
    pub applied: Vec<ConstraintProperty>,
    pub fresh_variables: Vec<String>,
}

impl ModelDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_model(model: &PlanningModel) -> Self {
        let lits = |ls: &[Literal]| ls.iter().map(|l| model.literal_name(*l)).collect();
        let u = model.utilities();
        let mut facts = BTreeMap::new();
        for i in 0..model.variables().len() {
            for lit in [Literal::pos(VarId(i)), Literal::neg(VarId(i))] {
                let v = u.fact(lit);
                if !v.is_zero() {
                    facts.insert(model.literal_name(lit), v);
                }
            }
        }
        ModelDocument {
            name: model.name().map(str::to_string),
            variables: model.variables().to_vec(),
            actions: model
                .actions()
                .iter()
                .map(|a| ActionDocument {
                    label: a.label.clone(),
                    pre: lits(a.pre.literals()),
                    eff: lits(a.eff.literals()),
                    verbalization: a.verbalization.clone(),
                })
                .collect(),
            init: model
                .initial()
                .literals()
                .filter(|l| l.positive)
                .map(|l| model.var_name(l.var).to_string())
                .collect(),
            goal: model
                .goal()
                .clauses()
                .iter()
                .map(|c| match c.as_slice() {
                    [l] => GoalEntry::Literal(model.literal_name(*l)),
                    _ => GoalEntry::Clause(lits(c)),
                })
                .collect(),
            utilities: UtilitiesDocument {
                actions: u
                    .action_utilities()
                    .iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, v)| (k.clone(), *v))
                    .collect(),
                facts,
            },
            verbalizations: model.verbalizations().to_spec(model),
            provenance: None,
        }
    }

    pub fn from_hmodel(h: &HModel) -> Self {
        let mut doc = ModelDocument::from_model(&h.model);
        doc.provenance = Some(Provenance {
            original: Box::new(ModelDocument::from_model(&h.original)),
            applied: h.applied.clone(),
            fresh_variables: h.fresh_variables().to_vec(),
        });
        doc
    }

    pub fn to_model(&self) -> Result<PlanningModel> {
        let mut b = ModelBuilder::new()
            .variables(self.variables.iter().cloned())
            .initially_true(self.init.iter().cloned())
            .allow_disjunctive_goal(self.provenance.is_some())
            .verbalizations(self.verbalizations.clone());
        if let Some(name) = &self.name {
            b = b.name(name.clone());
        }
        for a in &self.actions {
            b = b.action_owned(
                a.label.clone(),
                a.pre.clone(),
                a.eff.clone(),
                a.verbalization.clone(),
            );
        }
        for g in &self.goal {
            b = match g {
                GoalEntry::Literal(l) => b.goal_literal(l),
                GoalEntry::Clause(c) => b.goal_clause(c.clone()),
            };
        }
        for (label, v) in &self.utilities.actions {
            b = b.action_utility(label, *v);
        }
        for (lit, v) in &self.utilities.facts {
            b = b.fact_utility(lit, *v);
        }
        b.build()
    }

    /// Rebuilds the restricted model; the document must carry provenance.
    pub fn to_hmodel(&self) -> Result<HModel> {
        let prov = self
            .provenance
            .as_ref()
            .ok_or_else(|| Error::InvalidModel("document has no provenance block".into()))?;
        let model = self.to_model()?;
        let original = prov.original.to_model()?;
        let n = original.variables().len();
        if model.variables().len() < n
            || model.variables()[..n] != *original.variables()
            || model.variables()[n..] != *prov.fresh_variables
        {
            return Err(Error::InvalidModel(
                "restricted variables must extend the original ones by the fresh variables".into(),
            ));
        }
        Ok(HModel {
            model,
            applied: prov.applied.clone(),
            original: Arc::new(original),
        })
    }
}

pub fn parse_model(text: &str) -> Result<PlanningModel> {
    ModelDocument::parse(text)?.to_model()
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PlanningModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

pub fn load_hmodel(path: impl AsRef<Path>) -> Result<HModel> {
    let text = std::fs::read_to_string(path)?;
    ModelDocument::parse(&text)?.to_hmodel()
}

pub fn write_model(model: &PlanningModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, ModelDocument::from_model(model).to_json())?;
    Ok(())
}

pub fn write_hmodel(h: &HModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, ModelDocument::from_hmodel(h).to_json())?;
    Ok(())
}

/// The bundled trolley document text.
pub fn trolley_json() -> &'static str {
    TROLLEY
}

/// The trolley problem: pull the lever to save five and kill one, or refrain.
pub fn trolley() -> PlanningModel {
    parse_model(TROLLEY).expect("bundled trolley model is valid")
}
