//! Ethical principles as formulas over a model/plan pair.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moral::{Conjunction, Formula, MoralAtom, Situation, Subject};
use crate::planning::{reachable_states_with, Plan, PlanningModel, SearchLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Principle {
    Deontology,
    Utilitarianism,
    DoNoHarm,
}

impl Principle {
    pub const ALL: [Principle; 3] = [
        Principle::Deontology,
        Principle::Utilitarianism,
        Principle::DoNoHarm,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Principle::Deontology => "deontology",
            Principle::Utilitarianism => "utilitarianism",
            Principle::DoNoHarm => "do-no-harm",
        }
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Principle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "deontology" | "act-deontology" | "(act-)deontology" => Ok(Principle::Deontology),
            "utilitarianism" | "utilitarian" => Ok(Principle::Utilitarianism),
            "do-no-harm" | "donoharm" | "dnh" => Ok(Principle::DoNoHarm),
            other => Err(Error::Syntax(format!("unknown principle `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Judgment {
    pub principle: Principle,
    pub permissible: bool,
    /// The instantiated condition the verdict was checked against.
    pub formula: Formula,
}

pub fn principle_formula(principle: Principle, model: &PlanningModel, plan: &Plan) -> Result<Formula> {
    let situation = Situation::new(model, plan)?;
    formula_for(principle, &situation, &SearchLimits::default())
}

pub(crate) fn formula_for(
    principle: Principle,
    situation: &Situation<'_>,
    limits: &SearchLimits,
) -> Result<Formula> {
    let mut conjuncts: Vec<Formula> = Vec::new();
    let mut push = |f: Formula| {
        if !conjuncts.contains(&f) {
            conjuncts.push(f);
        }
    };
    match principle {
        Principle::Deontology => {
            for label in &situation.plan().steps {
                push(Formula::not(Formula::atom(MoralAtom::Bad(Subject::Action(
                    label.clone(),
                )))));
            }
        }
        Principle::Utilitarianism => {
            let last = Conjunction::of_state(situation.final_state());
            for s in reachable_states_with(situation.model(), limits)? {
                push(Formula::atom(MoralAtom::GEq(
                    last.clone(),
                    Conjunction::of_state(&s),
                )));
            }
        }
        Principle::DoNoHarm => {
            for lit in situation.final_state().literals() {
                push(Formula::implies(
                    Formula::atom(MoralAtom::Bad(Subject::Fact(lit))),
                    Formula::not(Formula::atom(MoralAtom::Caused(lit))),
                ));
            }
        }
    }
    Ok(Formula::And(conjuncts))
}

pub fn permissible(principle: Principle, model: &PlanningModel, plan: &Plan) -> Result<Judgment> {
    let situation = Situation::new(model, plan)?;
    judge(principle, &situation, &SearchLimits::default())
}

pub(crate) fn judge(
    principle: Principle,
    situation: &Situation<'_>,
    limits: &SearchLimits,
) -> Result<Judgment> {
    let formula = formula_for(principle, situation, limits)?;
    Ok(Judgment {
        principle,
        permissible: situation.evaluate(&formula),
        formula,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::trolley;
    use crate::planning::ModelBuilder;

    fn verdict(p: Principle, plan: &str) -> bool {
        permissible(p, &trolley(), &Plan::parse(plan))
            .unwrap()
            .permissible
    }

    #[test]
    fn trolley_matrix() {
        assert!(verdict(Principle::Deontology, "refrain"));
        assert!(!verdict(Principle::Utilitarianism, "refrain"));
        assert!(verdict(Principle::DoNoHarm, "refrain"));
        assert!(verdict(Principle::Deontology, "pull"));
        assert!(verdict(Principle::Utilitarianism, "pull"));
        assert!(!verdict(Principle::DoNoHarm, "pull"));
    }

    #[test]
    fn deontology_formula_for_pull() {
        let m = trolley();
        let f = principle_formula(Principle::Deontology, &m, &Plan::parse("pull")).unwrap();
        assert_eq!(f.render(&m), "¬Bad(pull)");
        let empty = principle_formula(Principle::Deontology, &m, &Plan::empty()).unwrap();
        assert_eq!(empty, Formula::top());
    }

    #[test]
    fn do_no_harm_formula_for_refrain() {
        let m = trolley();
        let f = principle_formula(Principle::DoNoHarm, &m, &Plan::parse("refrain")).unwrap();
        assert_eq!(
            f.render(&m),
            "(Bad(5willdie) → ¬Caused(5willdie)) ∧ (Bad(¬1willdie) → ¬Caused(¬1willdie)) ∧ (Bad(done) → ¬Caused(done))"
        );
    }

    #[test]
    fn utilitarian_formula_has_one_conjunct_per_reachable_state() {
        let m = trolley();
        let f = principle_formula(Principle::Utilitarianism, &m, &Plan::parse("pull")).unwrap();
        match f {
            Formula::And(cs) => assert_eq!(cs.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_action_is_deontologically_impermissible() {
        let m = ModelBuilder::new()
            .variable("g")
            .action("lie", &[], &["g"])
            .goal_literal("g")
            .action_utility("lie", -1)
            .build()
            .unwrap();
        let j = permissible(Principle::Deontology, &m, &Plan::parse("lie")).unwrap();
        assert!(!j.permissible);
    }

    #[test]
    fn principle_names_parse() {
        assert_eq!("do-no-harm".parse::<Principle>().unwrap(), Principle::DoNoHarm);
        assert_eq!("Utilitarianism".parse::<Principle>().unwrap(), Principle::Utilitarianism);
        assert!("kantian".parse::<Principle>().is_err());
    }
}
