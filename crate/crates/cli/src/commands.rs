//! Subcommands of the `moralplan` binary.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use moralplan::dialogue::{render_single, ContrastiveQuestion, Session};
use moralplan::document::{load_model, ModelDocument};
use moralplan::planning::find_plan;
use moralplan::principles::Principle;
use moralplan::reasons::explain;
use moralplan::restriction::{restrict, ConstraintProperty, RestrictionOutcome};
use moralplan::verify::{check_model, run_suite, Report, SuiteConfig};
use moralplan::view::ContrastiveView;
use moralplan::{Error, Plan, PlanningModel};

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Parser)]
#[command(name = "moralplan", version, about = "Moral permissibility of plans, with contrastive explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Judge a plan under one principle and print the necessary reason.
    Judge {
        model: PathBuf,
        /// Comma or space separated action labels.
        plan: String,
        #[arg(long, short)]
        principle: Principle,
    },
    /// Print the shortest plan (ties broken by label).
    Plan { model: PathBuf },
    /// Compile constraints into the model and print the restricted document.
    Restrict {
        model: PathBuf,
        #[command(flatten)]
        constraints: ConstraintArgs,
        /// Write the document here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sufficient and necessary reasons for a plan's verdict.
    Explain {
        model: PathBuf,
        plan: String,
        #[arg(long, short)]
        principle: Principle,
    },
    /// Interactive contrastive dialogue on standard input.
    Dialogue {
        model: PathBuf,
        /// Starting plan; defaults to the planner's proposal.
        #[arg(long)]
        plan: Option<String>,
        /// Principle the current plan is defended under.
        #[arg(long, short)]
        principle: Option<Principle>,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, env = "MORALPLAN_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Brute-force soundness and completeness checks.
    Verify {
        model: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random models in addition to the given one.
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(Debug, Default, Args)]
pub struct ConstraintArgs {
    #[arg(long, short)]
    pub principle: Option<Principle>,
    #[arg(long, value_name = "ACTION")]
    pub include: Vec<String>,
    #[arg(long, value_name = "ACTION")]
    pub exclude: Vec<String>,
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    pub before: Vec<String>,
}

impl ConstraintArgs {
    /// Contrast cases first, then the principle.
    pub fn constraints(&self) -> Vec<ConstraintProperty> {
        let mut out: Vec<ConstraintProperty> = self
            .include
            .iter()
            .map(ConstraintProperty::include)
            .chain(self.exclude.iter().map(ConstraintProperty::exclude))
            .collect();
        out.extend(
            self.before
                .chunks(2)
                .map(|pair| ConstraintProperty::before(&pair[0], &pair[1])),
        );
        out.extend(self.principle.map(ConstraintProperty::principle));
        out
    }
}

/// Outcome of a command that ran without error.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Ran fine but the answer is negative (no plan, verification failed).
    Negative,
}

fn verdict(permissible: bool) -> &'static str {
    if permissible {
        "permissible"
    } else {
        "impermissible"
    }
}

fn reasons(set: &moralplan::reasons::ReasonSet, model: &PlanningModel) -> String {
    set.render(model)
}

fn print_report(out: &mut dyn Write, label: &str, r: &Report) -> std::io::Result<()> {
    writeln!(
        out,
        "{label}: {} model(s), {} checks, {} violation(s)",
        r.models,
        r.checks,
        r.violations.len()
    )?;
    for v in &r.violations {
        match v.model {
            Some(i) => writeln!(out, "  model {i}: {}: {}", v.property, v.detail)?,
            None => writeln!(out, "  {}: {}", v.property, v.detail)?,
        }
    }
    Ok(())
}

/// Runs everything except `serve`.
pub fn run(command: Command, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<Status, Error> {
    match command {
        Command::Judge {
            model,
            plan,
            principle,
        } => {
            let m = load_model(model)?;
            let e = explain(principle, &m, &Plan::parse(&plan))?;
            writeln!(out, "{}", verdict(e.judgment.permissible))?;
            writeln!(out, "necessary: {}", reasons(&e.necessary, &m))?;
        }
        Command::Plan { model } => {
            let m = load_model(model)?;
            match find_plan(&m)? {
                Some(p) => writeln!(out, "{p}")?,
                None => {
                    writeln!(out, "no plan")?;
                    return Ok(Status::Negative);
                }
            }
        }
        Command::Restrict {
            model,
            constraints,
            output,
        } => {
            let m = load_model(model)?;
            match restrict(&m, &constraints.constraints())? {
                RestrictionOutcome::Impermissible => writeln!(out, "Impermissible")?,
                RestrictionOutcome::Restricted(h) => {
                    let text = ModelDocument::from_hmodel(&h).to_json();
                    match output {
                        Some(path) => std::fs::write(path, text + "\n")?,
                        None => writeln!(out, "{text}")?,
                    }
                }
            }
        }
        Command::Explain {
            model,
            plan,
            principle,
        } => {
            let m = load_model(model)?;
            let plan = Plan::parse(&plan);
            let e = explain(principle, &m, &plan)?;
            writeln!(out, "{} under {principle}", verdict(e.judgment.permissible))?;
            writeln!(out, "formula: {}", e.judgment.formula.render(&m))?;
            writeln!(out, "sufficient reasons:")?;
            for s in &e.sufficient {
                writeln!(out, "  {}", reasons(s, &m))?;
            }
            writeln!(out, "necessary: {}", reasons(&e.necessary, &m))?;
            if e.necessary_alternatives.len() > 1 {
                writeln!(out, "other minimum hitting sets:")?;
                for s in &e.necessary_alternatives[1..] {
                    writeln!(out, "  {}", reasons(s, &m))?;
                }
            }
            writeln!(out, "{}", render_single(&plan, &e, m.verbalizations(), &m))?;
        }
        Command::Dialogue {
            model,
            plan,
            principle,
        } => {
            let m = Arc::new(load_model(model)?);
            let session = match plan {
                Some(p) => Session::new(m, Plan::parse(&p), principle.unwrap_or(Principle::Deontology))?,
                None => Session::start(m, principle)?,
            };
            dialogue(session, input, out)?;
        }
        Command::Verify {
            model,
            max_len,
            seed,
            count,
        } => {
            let m = load_model(model)?;
            let own = check_model(&m, max_len, seed)?;
            print_report(out, "model", &own)?;
            let suite = run_suite(&SuiteConfig {
                seed,
                count,
                max_len,
                ..SuiteConfig::default()
            })?;
            print_report(out, "random suite", &suite)?;
            if !(own.passed() && suite.passed()) {
                return Ok(Status::Negative);
            }
        }
        Command::Serve { .. } => {
            return Err(Error::InvalidConstraint("serve is handled by the binary".into()))
        }
    }
    Ok(Status::Ok)
}

const DIALOGUE_HELP: &str = "commands:
  ask include|exclude ACTION PRINCIPLE
  ask before FIRST SECOND PRINCIPLE
  adopt PLAN
  principle PRINCIPLE
  plan | judge | history | help | quit";

fn parse_question(words: &[&str]) -> Result<ContrastiveQuestion, Error> {
    let usage = || Error::Syntax(format!("usage: {}", DIALOGUE_HELP.lines().nth(1).unwrap().trim()));
    let (constraint, principle) = match words {
        ["include", a, p] => (ConstraintProperty::include(*a), p),
        ["exclude", a, p] => (ConstraintProperty::exclude(*a), p),
        ["before", a, b, p] => (ConstraintProperty::before(*a, *b), p),
        _ => return Err(usage()),
    };
    ContrastiveQuestion::new(constraint, principle.parse()?)
}

fn dialogue_step(session: &mut Session, line: &str, out: &mut dyn Write) -> Result<bool, Error> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let model = session.model().clone();
    match words.as_slice() {
        [] => {}
        ["quit" | "exit"] => return Ok(false),
        ["help"] => writeln!(out, "{DIALOGUE_HELP}")?,
        ["plan"] => writeln!(out, "{}", session.current_plan())?,
        ["judge"] => {
            for p in Principle::ALL {
                let e = session.explain_current(p)?;
                writeln!(
                    out,
                    "{p}: {} {}",
                    verdict(e.judgment.permissible),
                    reasons(&e.necessary, &model)
                )?;
            }
        }
        ["history"] => {
            for (i, x) in session.history().iter().enumerate() {
                let q = &x.question;
                writeln!(out, "{}. {} under {}: {}", i + 1, q.constraint, q.principle, x.explanation.hplan)?;
            }
        }
        ["principle", p] => {
            session.set_active_principle(p.parse()?);
            writeln!(out, "active principle: {}", session.active_principle())?;
        }
        ["adopt", rest @ ..] => {
            session.adopt(Plan::parse(&rest.join(" ")))?;
            writeln!(out, "current plan: {}", session.current_plan())?;
        }
        ["ask", rest @ ..] => {
            let q = parse_question(rest)?;
            let ce = session.ask(q)?;
            let view = ContrastiveView::new(&ce, &model, model.verbalizations());
            if view.fallback_used {
                writeln!(
                    out,
                    "(no plan satisfying your suggestion is permissible under {}; showing one anyway)",
                    view.question.principle
                )?;
            }
            writeln!(out, "{}", view.rendered)?;
        }
        _ => writeln!(out, "unknown command; type `help`")?,
    }
    Ok(true)
}

/// Reads commands line by line until `quit` or end of input. Errors in a
/// single command are reported and the loop continues.
pub fn dialogue(mut session: Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), Error> {
    writeln!(
        out,
        "current plan: {} (defended under {})",
        session.current_plan(),
        session.active_principle()
    )?;
    let mut line = String::new();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        match dialogue_step(&mut session, line.trim(), out) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => writeln!(out, "error: {e}")?,
        }
    }
    Ok(())
}
