use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use moralplan::document::{parse_model, ModelDocument};
use moralplan::moral::{Conjunction, Formula, MoralAtom, Situation, Subject};
use moralplan::planning::{
    all_plans, apply, find_plan, is_plan, reachable_states, simulate, Literal, Plan, PlanningModel,
    State,
};
use moralplan::principles::{permissible, Principle};
use moralplan::reasons::{explain, sufficient_reasons, SignedAtom};
use moralplan::verify::random_model;

fn model_from(seed: u64, vars: usize) -> PlanningModel {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed), vars, 4)
}

/// Every applicable action sequence up to `len`, with its final state.
fn sequences(m: &PlanningModel, len: usize) -> Vec<(Plan, State)> {
    let mut out = vec![(Plan::empty(), m.initial().clone())];
    let mut frontier = out.clone();
    for _ in 0..len {
        let mut next = Vec::new();
        for (plan, state) in &frontier {
            for a in m.actions() {
                if let Ok(s) = apply(a, state) {
                    let mut steps = plan.steps.clone();
                    steps.push(a.label.clone());
                    next.push((Plan::from_labels(steps), s));
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn lits(m: &PlanningModel) -> Vec<Literal> {
    (0..m.variables().len())
        .flat_map(|i| {
            let l = m.parse_literal(&m.variables()[i]).unwrap();
            [l, l.negate()]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulation_is_deterministic_and_framed(seed in any::<u64>()) {
        let m = model_from(seed, 5);
        for (plan, _) in sequences(&m, 3) {
            let a = simulate(&m, &plan).unwrap();
            prop_assert_eq!(&a, &simulate(&m, &plan).unwrap());
            for (i, label) in plan.steps.iter().enumerate() {
                let act = m.action(label).unwrap();
                let (before, after) = (&a.states[i], &a.states[i + 1]);
                for l in lits(&m) {
                    if !act.eff.mentions(l.var) {
                        prop_assert_eq!(before.get(l.var), after.get(l.var));
                    }
                }
            }
        }
    }

    #[test]
    fn is_plan_matches_all_plans(seed in any::<u64>()) {
        let m = model_from(seed, 5);
        let plans = all_plans(&m, 3).unwrap();
        for (plan, _) in sequences(&m, 3) {
            prop_assert_eq!(is_plan(&m, &plan), plans.contains(&plan));
        }
    }

    #[test]
    fn find_plan_agrees_with_diameter_bound(seed in any::<u64>()) {
        let m = model_from(seed, 3);
        let bound = 1 << m.variables().len();
        let found = find_plan(&m).unwrap();
        let plans = all_plans(&m, bound).unwrap();
        prop_assert_eq!(found.is_none(), plans.is_empty());
        if let Some(p) = found {
            prop_assert_eq!(Some(&p), plans.first());
        }
    }

    #[test]
    fn reachable_states_are_sequence_finals(seed in any::<u64>()) {
        let m = model_from(seed, 5);
        let reachable: HashSet<State> = reachable_states(&m).unwrap().into_iter().collect();
        let finals: HashSet<State> = sequences(&m, 4).into_iter().map(|(_, s)| s).collect();
        prop_assert!(finals.is_subset(&reachable));
        if reachable.len() <= 5 {
            // Every state is within |reachable| - 1 steps.
            prop_assert_eq!(finals, reachable);
        }
    }

    #[test]
    fn valence_is_a_trichotomy(seed in any::<u64>()) {
        let m = model_from(seed, 4);
        let Some(plan) = all_plans(&m, 3).unwrap().into_iter().next() else { return Ok(()); };
        let s = Situation::new(&m, &plan).unwrap();
        let subjects = m.actions().iter().map(|a| Subject::Action(a.label.clone()))
            .chain(lits(&m).into_iter().map(Subject::Fact));
        for sub in subjects {
            let n = [MoralAtom::Good(sub.clone()), MoralAtom::Bad(sub.clone()), MoralAtom::Neutral(sub)]
                .iter().filter(|a| s.holds(a)).count();
            prop_assert_eq!(n, 1);
        }
    }

    #[test]
    fn geq_is_a_total_preorder(seed in any::<u64>()) {
        let m = model_from(seed, 4);
        let plan = Plan::empty();
        let Ok(s) = Situation::new(&m, &plan) else { return Ok(()); };
        let states = reachable_states(&m).unwrap();
        let cs: Vec<Conjunction> = states.iter().map(Conjunction::of_state).collect();
        let geq = |a: &Conjunction, b: &Conjunction| s.holds(&MoralAtom::GEq(a.clone(), b.clone()));
        for a in &cs {
            prop_assert!(geq(a, a));
            for b in &cs {
                prop_assert!(geq(a, b) || geq(b, a));
                for c in &cs {
                    if geq(a, b) && geq(b, c) {
                        prop_assert!(geq(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn caused_needs_a_producing_step(seed in any::<u64>()) {
        let m = model_from(seed, 4);
        for plan in all_plans(&m, 3).unwrap() {
            let s = Situation::new(&m, &plan).unwrap();
            for l in lits(&m) {
                let produced = plan.steps.iter().any(|a| m.action(a).unwrap().eff.contains(l));
                if !produced {
                    prop_assert!(!s.holds(&MoralAtom::Caused(l)));
                }
            }
        }
    }

    #[test]
    fn harmless_plans_are_permissible(seed in any::<u64>()) {
        let m = model_from(seed, 4);
        for plan in all_plans(&m, 3).unwrap() {
            let acts: Vec<_> = plan.steps.iter().map(|l| m.action(l).unwrap()).collect();
            if acts.iter().all(|a| !m.utilities().action(&a.label).is_negative()) {
                prop_assert!(permissible(Principle::Deontology, &m, &plan).unwrap().permissible);
            }
            let harmless = acts.iter().all(|a| {
                a.eff.literals().iter().all(|l| !m.fact_utility(*l).is_negative())
            });
            if harmless {
                prop_assert!(permissible(Principle::DoNoHarm, &m, &plan).unwrap().permissible);
            }
        }
    }

    #[test]
    fn conjunction_of_literals(seed in any::<u64>(), flips in prop::collection::vec(any::<bool>(), 8)) {
        let m = model_from(seed, 4);
        let Some(plan) = all_plans(&m, 2).unwrap().into_iter().next() else { return Ok(()); };
        let s = Situation::new(&m, &plan).unwrap();
        let conjuncts: Vec<SignedAtom> = lits(&m)
            .into_iter()
            .map(MoralAtom::Caused)
            .zip(flips)
            .map(|(a, flip)| {
                let v = s.holds(&a);
                SignedAtom::new(a, v != flip)
            })
            .collect();
        let f = Formula::And(conjuncts.iter().map(|l| {
            let atom = Formula::atom(l.atom.clone());
            if l.positive { atom } else { Formula::not(atom) }
        }).collect());
        let violated: Vec<SignedAtom> = conjuncts
            .iter()
            .filter(|l| s.holds(&l.atom) != l.positive)
            .map(|l| SignedAtom::new(l.atom.clone(), !l.positive))
            .collect();
        let family: HashSet<Vec<SignedAtom>> = sufficient_reasons(&m, &plan, &f)
            .unwrap()
            .iter()
            .map(|r| r.literals.iter().cloned().collect())
            .collect();
        if violated.is_empty() {
            // True: only all conjuncts together force it.
            let mut all = conjuncts.clone();
            all.sort();
            prop_assert_eq!(family, HashSet::from([all]));
        } else {
            // False: each violated conjunct alone forces it, and the
            // necessary reason is their union.
            let singletons: HashSet<Vec<SignedAtom>> = violated.iter().map(|l| vec![l.clone()]).collect();
            prop_assert_eq!(family, singletons);
            let family: Vec<_> = sufficient_reasons(&m, &plan, &f).unwrap();
            let necessary = moralplan::reasons::minimal_hitting_set(&family).unwrap();
            prop_assert_eq!(necessary.literals.len(), violated.len());
        }
    }

    #[test]
    fn explanations_are_deterministic(seed in any::<u64>()) {
        let m = model_from(seed, 3);
        for plan in all_plans(&m, 2).unwrap().into_iter().take(3) {
            for p in Principle::ALL {
                prop_assert_eq!(explain(p, &m, &plan).unwrap(), explain(p, &m, &plan).unwrap());
            }
        }
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let m = model_from(seed, 4);
        let text = ModelDocument::from_model(&m).to_json();
        prop_assert_eq!(parse_model(&text).unwrap(), m);
    }
}
