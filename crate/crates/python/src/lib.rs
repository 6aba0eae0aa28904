//! Python bindings.
//!
//! Results that are structured documents on the Rust side (explanations,
//! contrastive answers, session snapshots) cross over as plain dicts built
//! from their JSON form, so Python sees the same shapes as the HTTP API.

use std::sync::Arc;

use moralplan::dialogue::{self, ContrastiveQuestion};
use moralplan::document::{self, ModelDocument};
use moralplan::planning::{find_plan, is_plan};
use moralplan::principles::{permissible, Principle};
use moralplan::reasons::explain;
use moralplan::restriction::{restrict, ConstraintProperty, HModel, RestrictionOutcome};
use moralplan::view::{ContrastiveView, ExplanationView, SessionView};
use moralplan::{Plan, PlanningModel};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(moralplan_py, MoralplanError, PyValueError, "Engine error; `code` names the kind.");

fn err(e: moralplan::Error) -> PyErr {
    let code = e.code();
    let exc = MoralplanError::new_err(e.to_string());
    Python::attach(|py| {
        let _ = exc.value(py).setattr("code", code);
    });
    exc
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| err(e.into()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn principle(name: &str) -> PyResult<Principle> {
    name.parse().map_err(err)
}

fn plan(steps: Vec<String>) -> Plan {
    Plan::from_labels(steps)
}

/// A planning model, possibly the result of a restriction.
#[pyclass(frozen, module = "moralplan_py")]
struct Model {
    inner: Arc<PlanningModel>,
    restricted: Option<Arc<HModel>>,
}

impl Model {
    fn plain(m: PlanningModel) -> Self {
        Model {
            inner: Arc::new(m),
            restricted: None,
        }
    }
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| err(e.into()))?;
        let doc = ModelDocument::parse(&text).map_err(err)?;
        if doc.provenance.is_none() {
            return doc.to_model().map(Model::plain).map_err(err);
        }
        let h = doc.to_hmodel().map_err(err)?;
        Ok(Model {
            inner: Arc::new(h.model.clone()),
            restricted: Some(Arc::new(h)),
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        document::parse_model(text).map(Model::plain).map_err(err)
    }

    /// The bundled trolley scenario.
    #[staticmethod]
    fn trolley() -> Self {
        Model::plain(document::trolley())
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_string)
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.inner.variables().to_vec()
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.inner.actions().iter().map(|a| a.label.clone()).collect()
    }

    /// Constraints compiled into this model, as dicts.
    #[getter]
    fn applied<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let applied: &[ConstraintProperty] = self.restricted.as_ref().map_or(&[], |h| &h.applied);
        to_py(py, &applied)
    }

    /// Shortest plan, ties broken by label, or None.
    fn find_plan(&self, py: Python<'_>) -> PyResult<Option<Vec<String>>> {
        let m = self.inner.clone();
        let found = py.detach(move || find_plan(&m)).map_err(err)?;
        Ok(found.map(|p| p.steps))
    }

    fn is_plan(&self, steps: Vec<String>) -> bool {
        is_plan(&self.inner, &plan(steps))
    }

    fn permissible(&self, steps: Vec<String>, principle_name: &str) -> PyResult<bool> {
        let p = principle(principle_name)?;
        Ok(permissible(p, &self.inner, &plan(steps)).map_err(err)?.permissible)
    }

    /// Verdict, formula, sufficient reasons and necessary reasons.
    fn explain<'py>(&self, py: Python<'py>, steps: Vec<String>, principle_name: &str) -> PyResult<Bound<'py, PyAny>> {
        let p = principle(principle_name)?;
        let m = self.inner.clone();
        let plan = plan(steps);
        let e = py.detach(|| explain(p, &m, &plan)).map_err(err)?;
        to_py(py, &ExplanationView::new(&e, &self.inner))
    }

    /// One sentence in the model's own words.
    fn render(&self, py: Python<'_>, steps: Vec<String>, principle_name: &str) -> PyResult<String> {
        let p = principle(principle_name)?;
        let m = self.inner.clone();
        let plan = plan(steps);
        let e = py.detach(|| explain(p, &m, &plan)).map_err(err)?;
        Ok(dialogue::render_single(&plan, &e, m.verbalizations(), &m))
    }

    /// Compiles contrast cases, then the principle. Returns None when the
    /// principle leaves no permissible plan.
    #[pyo3(signature = (principle=None, include=Vec::new(), exclude=Vec::new(), before=Vec::new()))]
    fn restrict(
        &self,
        py: Python<'_>,
        principle: Option<&str>,
        include: Vec<String>,
        exclude: Vec<String>,
        before: Vec<(String, String)>,
    ) -> PyResult<Option<Model>> {
        let mut constraints: Vec<ConstraintProperty> = include
            .into_iter()
            .map(ConstraintProperty::include)
            .chain(exclude.into_iter().map(ConstraintProperty::exclude))
            .chain(before.into_iter().map(|(a, b)| ConstraintProperty::before(a, b)))
            .collect();
        if let Some(p) = principle {
            constraints.push(ConstraintProperty::principle(self::principle(p)?));
        }
        let m = self.inner.clone();
        match py.detach(|| restrict(&m, &constraints)).map_err(err)? {
            RestrictionOutcome::Impermissible => Ok(None),
            RestrictionOutcome::Restricted(h) => Ok(Some(Model {
                inner: Arc::new(h.model.clone()),
                restricted: Some(Arc::new(h)),
            })),
        }
    }

    fn to_json(&self) -> String {
        match &self.restricted {
            Some(h) => ModelDocument::from_hmodel(h).to_json(),
            None => ModelDocument::from_model(&self.inner).to_json(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Model({:?}, variables={}, actions={})",
            self.inner.name().unwrap_or(""),
            self.inner.variables().len(),
            self.inner.actions().len()
        )
    }
}

/// An iterative "why this plan rather than that one?" dialogue.
#[pyclass(module = "moralplan_py")]
struct Session {
    inner: dialogue::Session,
}

#[pymethods]
impl Session {
    /// Without a plan the session starts from a permissible plan under
    /// `principle` (deontology by default).
    #[new]
    #[pyo3(signature = (model, plan=None, principle=None))]
    fn new(model: &Model, plan: Option<Vec<String>>, principle: Option<&str>) -> PyResult<Self> {
        let p = principle.map(self::principle).transpose()?;
        let m = model.inner.clone();
        let inner = match plan {
            Some(steps) => dialogue::Session::new(m, self::plan(steps), p.unwrap_or(Principle::Deontology)),
            None => dialogue::Session::start(m, p),
        }
        .map_err(err)?;
        Ok(Session { inner })
    }

    #[getter]
    fn current_plan(&self) -> Vec<String> {
        self.inner.current_plan().steps.clone()
    }

    #[getter]
    fn active_principle(&self) -> String {
        self.inner.active_principle().to_string()
    }

    #[setter]
    fn set_active_principle(&mut self, name: &str) -> PyResult<()> {
        self.inner.set_active_principle(principle(name)?);
        Ok(())
    }

    /// Exactly one of `include`, `exclude` or `before` names the contrast case.
    #[pyo3(signature = (principle, *, include=None, exclude=None, before=None))]
    fn ask<'py>(
        &mut self,
        py: Python<'py>,
        principle: &str,
        include: Option<String>,
        exclude: Option<String>,
        before: Option<(String, String)>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let constraint = match (include, exclude, before) {
            (Some(a), None, None) => ConstraintProperty::include(a),
            (None, Some(a), None) => ConstraintProperty::exclude(a),
            (None, None, Some((a, b))) => ConstraintProperty::before(a, b),
            _ => return Err(PyValueError::new_err("give exactly one of include, exclude, before")),
        };
        let q = ContrastiveQuestion::new(constraint, self::principle(principle)?).map_err(err)?;
        let inner = &mut self.inner;
        let ce = py.detach(|| inner.ask(q)).map_err(err)?;
        let model = self.inner.model();
        to_py(py, &ContrastiveView::new(&ce, model, model.verbalizations()))
    }

    fn adopt(&mut self, steps: Vec<String>) -> PyResult<()> {
        self.inner.adopt(plan(steps)).map_err(err)
    }

    /// Answered questions, oldest first.
    #[getter]
    fn history<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &SessionView::new(&self.inner).map_err(err)?)?.get_item("history")
    }

    /// Current plan, its judgments under every principle, and the history.
    fn view<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &SessionView::new(&self.inner).map_err(err)?)
    }
}

#[pymodule]
pub fn moralplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Session>()?;
    m.add("MoralplanError", m.py().get_type::<MoralplanError>())?;
    m.add("PRINCIPLES", Principle::ALL.map(|p| p.to_string()).to_vec())?;
    Ok(())
}
