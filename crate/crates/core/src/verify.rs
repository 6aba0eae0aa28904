//! Brute-force cross-checks on small random models.
//!
//! Every fast path in the crate is compared against a naive oracle here:
//! restrictions against `all_plans`, formula evaluation against direct
//! substitution, prime implicants against cube enumeration, and hitting
//! sets against subset enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dialogue::{ContrastiveQuestion, Session};
use crate::error::{Error, Result};
use crate::moral::{holds_atom, Conjunction, Formula, MoralAtom, Situation, Subject};
use crate::planning::{
    all_plans, find_plan, reachable_states, Literal, ModelBuilder, Plan, PlanningModel, VarId,
};
use crate::principles::{permissible, Principle};
use crate::reasons::{
    explain, minimal_entailing_sets, minimum_hitting_sets, sufficient_reasons, ReasonSet, SignedAtom,
};
use crate::restriction::{restrict, ConstraintProperty, RestrictionOutcome};

/// Largest formula for which prime implicants are compared exactly.
const EXACT_ATOMS: usize = 6;
/// Largest formula for which returned reasons are checked for forcing.
const FORCING_ATOMS: usize = 12;
/// Largest hitting-set universe enumerated exhaustively.
const HITTING_UNIVERSE: usize = 10;
/// Plans per model that get the expensive reason checks.
const EXPLAINED_PLANS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: usize,
    pub max_len: usize,
    pub max_variables: usize,
    pub max_actions: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            count: 200,
            max_len: 4,
            max_variables: 4,
            max_actions: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Index of the random model, `None` for a user-supplied one.
    pub model: Option<usize>,
    pub property: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub models: usize,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn merge(&mut self, other: Report) {
        self.models += other.models;
        self.checks += other.checks;
        self.violations.extend(other.violations);
    }
}

struct Checker<'a> {
    model: &'a PlanningModel,
    index: Option<usize>,
    report: Report,
}

impl Checker<'_> {
    fn check(&mut self, property: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        self.report.checks += 1;
        if !ok {
            self.report.violations.push(Violation {
                model: self.index,
                property,
                detail: detail(),
            });
        }
    }
}

/// A random model with integer utilities in [-2, 2].
pub fn random_model(rng: &mut impl Rng, max_variables: usize, max_actions: usize) -> PlanningModel {
    let nv = rng.gen_range(1..=max_variables.max(1));
    let na = rng.gen_range(1..=max_actions.max(1));
    let vars: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
    let lit = |var: usize, positive: bool| {
        if positive {
            vars[var].clone()
        } else {
            format!("¬{}", vars[var])
        }
    };
    let pick = |rng: &mut ChaCha8Rng, max: usize| -> Vec<String> {
        let mut idx: Vec<usize> = (0..nv).collect();
        idx.shuffle(rng);
        let k = rng.gen_range(0..=max.min(nv));
        idx[..k].iter().map(|&v| lit(v, rng.gen())).collect()
    };
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut b = ModelBuilder::new().variables(vars.iter().cloned());
    for a in 0..na {
        let pre = pick(&mut local, 1);
        let mut eff = pick(&mut local, 2);
        if eff.is_empty() {
            eff = pick(&mut local, 1);
        }
        b = b.action_owned(format!("a{a}"), pre, eff, None);
    }
    let init: Vec<String> = vars.iter().filter(|_| local.gen()).cloned().collect();
    b = b.initially_true(init);
    for g in pick(&mut local, 2) {
        b = b.goal_literal(&g);
    }
    for a in 0..na {
        b = b.action_utility(&format!("a{a}"), local.gen_range(-2..=2i64));
    }
    for v in 0..nv {
        for positive in [true, false] {
            b = b.fact_utility(&lit(v, positive), local.gen_range(-2..=2i64));
        }
    }
    b.build().expect("generated models are well formed")
}

/// Runs every check on one model; `seed` drives the random formulas.
pub fn check_model(model: &PlanningModel, max_len: usize, seed: u64) -> Result<Report> {
    check_indexed(model, None, max_len, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn check_indexed(
    model: &PlanningModel,
    index: Option<usize>,
    max_len: usize,
    rng: &mut impl Rng,
) -> Result<Report> {
    let mut c = Checker {
        model,
        index,
        report: Report {
            models: 1,
            ..Report::default()
        },
    };
    let plans = all_plans(model, max_len)?;
    check_restrictions(&mut c, &plans, max_len)?;
    check_utilitarian_max(&mut c, &plans)?;
    let mut sample = plans.clone();
    sample.shuffle(rng);
    sample.truncate(EXPLAINED_PLANS);
    for plan in &sample {
        check_evaluation(&mut c, plan, rng)?;
        check_primes(&mut c, plan, rng)?;
        for p in Principle::ALL {
            check_explanation(&mut c, plan, p)?;
        }
    }
    check_dialogue(&mut c, &plans)?;
    Ok(c.report)
}

/// Propositions 1 to 3 for every principle restriction.
fn check_restrictions(c: &mut Checker<'_>, plans: &[Plan], max_len: usize) -> Result<()> {
    let model = c.model;
    for p in Principle::ALL {
        let allowed: Vec<&Plan> = plans
            .iter()
            .map(|plan| Ok((plan, permissible(p, model, plan)?.permissible)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter_map(|(plan, ok)| ok.then_some(plan))
            .collect();
        match restrict(model, &[ConstraintProperty::principle(p)])? {
            RestrictionOutcome::Impermissible => {
                c.check("weak completeness", allowed.is_empty(), || {
                    format!("{p}: Impermissible but `{}` is permissible", allowed[0])
                });
            }
            RestrictionOutcome::Restricted(h) => {
                for hplan in all_plans(&h.model, max_len)? {
                    let is_plan = plans.contains(&hplan);
                    c.check("soundness: plan of original", is_plan, || {
                        format!("{p}: `{hplan}` solves the restriction only")
                    });
                    if is_plan {
                        let ok = permissible(p, model, &hplan)?.permissible;
                        c.check("soundness: permissible", ok, || {
                            format!("{p}: `{hplan}` is impermissible")
                        });
                    }
                }
                if find_plan(&h.model)?.is_none() {
                    c.check("weak completeness", allowed.is_empty(), || {
                        format!("{p}: restriction unsolvable but `{}` is permissible", allowed[0])
                    });
                }
            }
        }
    }
    Ok(())
}

fn check_utilitarian_max(c: &mut Checker<'_>, plans: &[Plan]) -> Result<()> {
    let model = c.model;
    let best = reachable_states(model)?
        .iter()
        .map(|s| model.state_utility(s))
        .max()
        .expect("the initial state is reachable");
    for plan in plans {
        let situation = Situation::new(model, plan)?;
        let direct = model.state_utility(situation.final_state()) == best;
        let judged = permissible(Principle::Utilitarianism, model, plan)?.permissible;
        c.check("utilitarian maximum", direct == judged, || {
            format!("`{plan}`: verdict {judged}, direct {direct}")
        });
    }
    Ok(())
}

fn substitute(f: &Formula, values: &BTreeMap<MoralAtom, bool>) -> bool {
    match f {
        Formula::Atom(a) => values[a],
        Formula::Not(g) => !substitute(g, values),
        Formula::And(gs) => gs.iter().all(|g| substitute(g, values)),
        Formula::Or(gs) => gs.iter().any(|g| substitute(g, values)),
        Formula::Implies(a, b) => !substitute(a, values) || substitute(b, values),
    }
}

fn atom_pool(model: &PlanningModel, rng: &mut impl Rng) -> Vec<MoralAtom> {
    let n = model.variables().len();
    let lits: Vec<Literal> = (0..n)
        .flat_map(|v| [Literal::pos(VarId(v)), Literal::neg(VarId(v))])
        .collect();
    let mut pool = Vec::new();
    for a in model.actions() {
        let s = Subject::Action(a.label.clone());
        pool.push(MoralAtom::Bad(s.clone()));
        pool.push(MoralAtom::Good(s.clone()));
        pool.push(MoralAtom::Neutral(s));
    }
    for &l in &lits {
        pool.push(MoralAtom::Caused(l));
        pool.push(MoralAtom::Bad(Subject::Fact(l)));
        pool.push(MoralAtom::Good(Subject::Fact(l)));
    }
    let conj = |rng: &mut dyn rand::RngCore| {
        let k = rng.gen_range(1..=n);
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(rng);
        Conjunction::new(vars[..k].iter().map(|&v| Literal {
            var: VarId(v),
            positive: rng.gen(),
        }))
        .expect("distinct variables")
    };
    for _ in 0..3 {
        let (a, b) = (conj(rng), conj(rng));
        pool.push(MoralAtom::GEq(a, b));
    }
    pool
}

fn random_formula(atoms: &[MoralAtom], depth: usize, rng: &mut impl Rng) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return Formula::atom(atoms.choose(rng).expect("nonempty pool").clone());
    }
    let sub = |rng: &mut _| random_formula(atoms, depth - 1, rng);
    match rng.gen_range(0..4) {
        0 => Formula::not(sub(rng)),
        1 => Formula::And((0..rng.gen_range(0..=3)).map(|_| sub(rng)).collect()),
        2 => Formula::Or((0..rng.gen_range(0..=3)).map(|_| sub(rng)).collect()),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

fn random_formulas(model: &PlanningModel, rng: &mut impl Rng) -> Vec<Formula> {
    let mut pool = atom_pool(model, rng);
    pool.shuffle(rng);
    let k = rng.gen_range(1..=EXACT_ATOMS.min(pool.len()));
    let atoms = &pool[..k];
    (0..4).map(|_| random_formula(atoms, 3, rng)).collect()
}

fn check_evaluation(c: &mut Checker<'_>, plan: &Plan, rng: &mut impl Rng) -> Result<()> {
    let model = c.model;
    for f in random_formulas(model, rng) {
        let values = f
            .atoms()
            .into_iter()
            .map(|a| Ok((a.clone(), holds_atom(model, plan, &a)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let direct = substitute(&f, &values);
        let fast = crate::moral::evaluate(model, plan, &f)?;
        c.check("evaluate vs substitution", direct == fast, || {
            format!("`{plan}`: {}", f.render(model))
        });
    }
    Ok(())
}

type Cube = BTreeSet<SignedAtom>;

/// Whether fixing `cube` forces `f` to `target` under every completion.
fn forces(f: &Formula, atoms: &[MoralAtom], cube: &Cube, target: bool) -> bool {
    let fixed: BTreeMap<&MoralAtom, bool> = cube.iter().map(|l| (&l.atom, l.positive)).collect();
    let free: Vec<&MoralAtom> = atoms.iter().filter(|a| !fixed.contains_key(a)).collect();
    (0u64..1 << free.len()).all(|bits| {
        let mut values: BTreeMap<MoralAtom, bool> =
            fixed.iter().map(|(a, v)| ((*a).clone(), *v)).collect();
        for (i, a) in free.iter().enumerate() {
            values.insert((*a).clone(), bits >> i & 1 == 1);
        }
        substitute(f, &values) == target
    })
}

/// Prime implicants of `f` (or its negation) by enumerating all 3^k cubes.
fn oracle_primes(f: &Formula, target: bool) -> BTreeSet<Cube> {
    let atoms: Vec<MoralAtom> = f.atoms().into_iter().collect();
    let mut forcing = Vec::new();
    let total = 3usize.pow(atoms.len() as u32);
    for code in 0..total {
        let mut cube = Cube::new();
        let mut rest = code;
        for a in &atoms {
            match rest % 3 {
                1 => {
                    cube.insert(SignedAtom::new(a.clone(), true));
                }
                2 => {
                    cube.insert(SignedAtom::new(a.clone(), false));
                }
                _ => {}
            }
            rest /= 3;
        }
        if forces(f, &atoms, &cube, target) {
            forcing.push(cube);
        }
    }
    forcing
        .iter()
        .filter(|c| !forcing.iter().any(|d| d.len() < c.len() && d.is_subset(c)))
        .cloned()
        .collect()
}

fn as_cubes(family: &[ReasonSet]) -> BTreeSet<Cube> {
    family.iter().map(|s| s.literals.clone()).collect()
}

fn check_primes(c: &mut Checker<'_>, plan: &Plan, rng: &mut impl Rng) -> Result<()> {
    let model = c.model;
    let situation = Situation::new(model, plan)?;
    for f in random_formulas(model, rng) {
        for target in [true, false] {
            let fast = as_cubes(&minimal_entailing_sets(&f, target)?);
            let slow = oracle_primes(&f, target);
            c.check("prime implicants", fast == slow, || {
                format!("{} = {target}", f.render(model))
            });
        }
        let value = situation.evaluate(&f);
        let fast = as_cubes(&sufficient_reasons(model, plan, &f)?);
        let slow: BTreeSet<Cube> = oracle_primes(&f, value)
            .into_iter()
            .filter(|cube| cube.iter().all(|l| situation.holds(&l.atom) == l.positive))
            .collect();
        c.check("sufficient reasons", fast == slow, || {
            format!("`{plan}`: {}", f.render(model))
        });
    }
    Ok(())
}

fn check_explanation(c: &mut Checker<'_>, plan: &Plan, p: Principle) -> Result<()> {
    let model = c.model;
    let e = explain(p, model, plan)?;
    let situation = Situation::new(model, plan)?;
    let f = &e.judgment.formula;
    let atoms: Vec<MoralAtom> = f.atoms().into_iter().collect();
    let value = e.judgment.permissible;
    for s in &e.sufficient {
        let holds = s.literals.iter().all(|l| situation.holds(&l.atom) == l.positive);
        c.check("sufficient reason holds", holds, || {
            format!("{p} `{plan}`: {}", s.render(model))
        });
        if atoms.len() <= FORCING_ATOMS {
            c.check("sufficient reason forces", forces(f, &atoms, &s.literals, value), || {
                format!("{p} `{plan}`: {}", s.render(model))
            });
            for l in &s.literals {
                let mut smaller = s.literals.clone();
                smaller.remove(l);
                c.check(
                    "sufficient reason minimal",
                    !forces(f, &atoms, &smaller, value),
                    || format!("{p} `{plan}`: {} without {}", s.render(model), l.render(model)),
                );
            }
        }
    }
    if atoms.len() <= EXACT_ATOMS {
        let slow: BTreeSet<Cube> = oracle_primes(f, value)
            .into_iter()
            .filter(|cube| cube.iter().all(|l| situation.holds(&l.atom) == l.positive))
            .collect();
        c.check("sufficient reasons exact", as_cubes(&e.sufficient) == slow, || {
            format!("{p} `{plan}`")
        });
    }
    if e.sufficient.iter().any(ReasonSet::is_empty) {
        c.check("trivial verdict has empty necessary reason", e.necessary.is_empty(), || {
            format!("{p} `{plan}`")
        });
        return Ok(());
    }
    check_hitting(c, &e.sufficient, &e.necessary_alternatives, || format!("{p} `{plan}`"));
    c.check(
        "necessary reason is the first minimum",
        e.necessary_alternatives.first() == Some(&e.necessary),
        || format!("{p} `{plan}`"),
    );
    Ok(())
}

fn check_hitting(
    c: &mut Checker<'_>,
    family: &[ReasonSet],
    minimum: &[ReasonSet],
    context: impl Fn() -> String,
) {
    let universe: Vec<&SignedAtom> = family
        .iter()
        .flat_map(|s| s.literals.iter())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for h in minimum {
        let hits = family
            .iter()
            .all(|s| s.literals.iter().any(|l| h.contains(l)));
        c.check("hitting set hits", hits, &context);
        for l in &h.literals {
            let mut smaller = h.literals.clone();
            smaller.remove(l);
            let still = family
                .iter()
                .all(|s| s.literals.iter().any(|x| smaller.contains(x)));
            c.check("hitting set minimal", !still, &context);
        }
    }
    if universe.len() > HITTING_UNIVERSE {
        return;
    }
    let mut best: Option<usize> = None;
    let mut all_min: BTreeSet<Cube> = BTreeSet::new();
    for bits in 0u32..1 << universe.len() {
        let chosen: Cube = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, l)| (*l).clone())
            .collect();
        if !family.iter().all(|s| s.literals.iter().any(|l| chosen.contains(l))) {
            continue;
        }
        match best {
            Some(b) if chosen.len() > b => {}
            Some(b) if chosen.len() == b => {
                all_min.insert(chosen);
            }
            _ => {
                best = Some(chosen.len());
                all_min = BTreeSet::from([chosen]);
            }
        }
    }
    c.check("minimum hitting sets exact", as_cubes(minimum) == all_min, &context);
}

/// Fallback and shape invariants of the dialogue on include/exclude questions.
fn check_dialogue(c: &mut Checker<'_>, plans: &[Plan]) -> Result<()> {
    let model = c.model;
    let Some(start) = plans.first() else {
        return Ok(());
    };
    let shared = Arc::new(model.clone());
    for a in model.actions() {
        for constraint in [
            ConstraintProperty::include(a.label.clone()),
            ConstraintProperty::exclude(a.label.clone()),
        ] {
            for p in Principle::ALL {
                let mut session = Session::new(shared.clone(), start.clone(), p)?;
                let q = ContrastiveQuestion::new(constraint.clone(), p)?;
                let shaped: Vec<&Plan> = plans.iter().filter(|x| constraint.shape_holds(x)).collect();
                match session.ask(q) {
                    Err(Error::ContrastCaseInfeasible) => {
                        c.check("infeasible contrast case", shaped.is_empty(), || {
                            format!("{constraint}: `{}` exists", shaped[0])
                        });
                    }
                    Err(e) => return Err(e),
                    Ok(ce) => {
                        c.check("alternative shape", constraint.shape_holds(&ce.hplan), || {
                            format!("{constraint}: `{}`", ce.hplan)
                        });
                        if ce.fallback_used {
                            for x in &shaped {
                                let ok = permissible(p, model, x)?.permissible;
                                c.check("fallback only when nothing is permissible", !ok, || {
                                    format!("{constraint} under {p}: `{x}` is permissible")
                                });
                            }
                        } else {
                            c.check("alternative permissible", ce.alternative.judgment.permissible, || {
                                format!("{constraint} under {p}: `{}`", ce.hplan)
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Minimum hitting sets of random small families against subset enumeration.
fn check_random_families(c: &mut Checker<'_>, rng: &mut impl Rng) -> Result<()> {
    let atoms: Vec<MoralAtom> = (0..5)
        .map(|i| MoralAtom::Bad(Subject::Action(format!("x{i}"))))
        .collect();
    for _ in 0..4 {
        let family: Vec<ReasonSet> = (0..rng.gen_range(1..=5))
            .map(|_| {
                let k = rng.gen_range(1..=3);
                ReasonSet::new(
                    crate::reasons::ReasonKind::Sufficient,
                    (0..k).map(|_| {
                        SignedAtom::new(atoms.choose(rng).expect("nonempty").clone(), rng.gen())
                    }),
                )
            })
            .collect();
        let minimum = minimum_hitting_sets(&family)?;
        check_hitting(c, &family, &minimum, || format!("{family:?}"));
    }
    Ok(())
}

/// The seeded random suite. Model `i` is generated from `seed + i`, so a
/// failure can be replayed alone.
pub fn run_suite(config: &SuiteConfig) -> Result<Report> {
    let mut report = Report::default();
    for i in 0..config.count {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(i as u64));
        let model = random_model(&mut rng, config.max_variables, config.max_actions);
        let mut part = check_indexed(&model, Some(i), config.max_len, &mut rng)?;
        let mut c = Checker {
            model: &model,
            index: Some(i),
            report: Report::default(),
        };
        check_random_families(&mut c, &mut rng)?;
        part.merge(c.report);
        report.merge(part);
    }
    Ok(report)
}
