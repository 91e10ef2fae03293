//! Box-constrained minimisation: BFGS with finite-difference gradients,
//! Nelder-Mead, and the BFGS → Nelder-Mead → BFGS pipeline.
//!
//! Every optimiser works through an [`Evaluator`], which projects points onto
//! the box, evaluates batches concurrently, and appends to a single
//! evaluation log in deterministic order.

mod bfgs;
mod nelder_mead;
mod pipeline;

pub use bfgs::{bfgs_with_gradient, central_gradient, quasi_newton_minimize, BfgsOptions};
pub use nelder_mead::{nelder_mead_minimize, NelderMeadOptions};
pub use pipeline::{bnb_pipeline, PipelineConfig};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("objective failed at evaluation {index} during {stage}: {message}")]
    Objective { stage: String, index: usize, message: String },
    #[error("objective returned a non-finite value at evaluation {index} during {stage}")]
    NonFinite { stage: String, index: usize },
    #[error("invalid optimiser configuration: {0}")]
    Config(String),
}

/// A scalar function of a real vector. Evaluations may run concurrently.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Result<f64, String>;
}

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, String> {
        Ok((self.f)(x))
    }
}

/// Per-coordinate closed intervals; infinite ends allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(dim: usize) -> Self {
        Self { lower: vec![f64::NEG_INFINITY; dim], upper: vec![f64::INFINITY; dim] }
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OptimizeError> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(OptimizeError::Config("bounds must satisfy lower <= upper".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((v, &l), &u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(l, u);
        }
    }

    pub fn projected(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.project(&mut y);
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub index: usize,
    pub value: f64,
    pub stage: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    ValueTolerance,
    SimplexSpread,
    MaxIterations,
    MaxEvaluations,
    LineSearchFailed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    pub name: String,
    pub iterations: usize,
    pub evaluations: usize,
    pub start_value: f64,
    pub best_value: f64,
    pub stop: StopReason,
    /// Per-iteration best value.
    pub history: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub initial_value: f64,
    pub evaluations: usize,
    pub stages: Vec<StageLog>,
    pub log: Vec<EvalRecord>,
}

impl OptimizerReport {
    /// Running minimum of the evaluation log.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.log
            .iter()
            .map(|r| {
                best = best.min(r.value);
                best
            })
            .collect()
    }
}

/// Evaluation front end shared by all optimisers.
pub struct Evaluator<'a, O: Objective + ?Sized> {
    objective: &'a O,
    bounds: Bounds,
    stage: String,
    log: Vec<EvalRecord>,
    best: Option<(f64, Vec<f64>)>,
}

impl<'a, O: Objective + ?Sized> Evaluator<'a, O> {
    pub fn new(objective: &'a O, bounds: Bounds) -> Result<Self, OptimizeError> {
        if bounds.dim() != objective.dim() {
            return Err(OptimizeError::Config(format!(
                "bounds have {} coordinates, objective has {}",
                bounds.dim(),
                objective.dim()
            )));
        }
        Ok(Self { objective, bounds, stage: String::new(), log: Vec::new(), best: None })
    }

    pub fn set_stage(&mut self, name: &str) {
        self.stage = name.to_string();
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn count(&self) -> usize {
        self.log.len()
    }

    pub fn best(&self) -> Option<&(f64, Vec<f64>)> {
        self.best.as_ref()
    }

    /// Evaluates an already projected point.
    pub fn eval(&mut self, x: &[f64]) -> Result<f64, OptimizeError> {
        Ok(self.eval_batch(&[x.to_vec()])?[0])
    }

    /// Evaluates already projected points concurrently; results and log
    /// entries are in input order.
    pub fn eval_batch(&mut self, xs: &[Vec<f64>]) -> Result<Vec<f64>, OptimizeError> {
        let objective = self.objective;
        let results: Vec<Result<f64, String>> = if xs.len() > 1 {
            xs.par_iter().map(|x| objective.evaluate(x)).collect()
        } else {
            xs.iter().map(|x| objective.evaluate(x)).collect()
        };
        let mut values = Vec::with_capacity(xs.len());
        for (x, r) in xs.iter().zip(results) {
            let index = self.log.len();
            let value = r.map_err(|message| OptimizeError::Objective { stage: self.stage.clone(), index, message })?;
            if !value.is_finite() {
                return Err(OptimizeError::NonFinite { stage: self.stage.clone(), index });
            }
            self.log.push(EvalRecord { index, value, stage: self.stage.clone() });
            if self.best.as_ref().is_none_or(|(b, _)| value < *b) {
                self.best = Some((value, x.clone()));
            }
            values.push(value);
        }
        Ok(values)
    }

    pub fn into_log(self) -> Vec<EvalRecord> {
        self.log
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Builds a report from a finished evaluator and its stage logs.
pub(crate) fn finish<O: Objective + ?Sized>(
    ev: Evaluator<'_, O>,
    initial_value: f64,
    fallback_x: Vec<f64>,
    stages: Vec<StageLog>,
) -> OptimizerReport {
    let (best_value, best_x) = ev.best().cloned().unwrap_or((initial_value, fallback_x));
    let log = ev.into_log();
    OptimizerReport { best_x, best_value, initial_value, evaluations: log.len(), stages, log }
}
