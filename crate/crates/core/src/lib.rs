//! Moral permissibility of action plans.
//!
//! The crate judges propositional STRIPS-style plans under three ethical
//! principles (act-deontology, utilitarianism and do-no-harm), extracts
//! sufficient and necessary reasons for each verdict, compiles principles and
//! user contrast cases into restricted planning models, and drives an
//! iterative "why A rather than B?" dialogue on top of those pieces.
//!
//! ```
//! use moralplan::{document, principles::{permissible, Principle}, Plan};
//!
//! let model = document::trolley();
//! let refrain = Plan::from_labels(["refrain"]);
//! let verdict = permissible(Principle::Utilitarianism, &model, &refrain).unwrap();
//! assert!(!verdict.permissible);
//! ```

pub mod dialogue;
pub mod document;
pub mod error;
pub mod moral;
pub mod planning;
pub mod principles;
pub mod reasons;
pub mod restriction;
pub mod verify;
pub mod view;

pub use error::{Error, Result};
pub use moral::{Conjunction, Formula, MoralAtom, Subject, Utility, UtilityFunction};
pub use planning::{
    Action, GoalCondition, Literal, ModelBuilder, PartialState, Plan, PlanningModel, SearchLimits,
    State, Trace, VarId,
};
