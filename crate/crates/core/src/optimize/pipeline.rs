//! BFGS → Nelder-Mead → BFGS, each stage starting from the best point so far.

use serde::{Deserialize, Serialize};

use super::bfgs::bfgs_stage;
use super::nelder_mead::nelder_mead_stage;
use super::{finish, BfgsOptions, Bounds, Evaluator, NelderMeadOptions, Objective, OptimizeError, OptimizerReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// First BFGS layer, 3–6 depending on problem size.
    pub stage1_max_iter: usize,
    pub nm_max_iter: usize,
    pub nm_max_fev: usize,
    pub stage3_max_iter: usize,
    pub tol: f64,
    pub rel_step: f64,
    /// Budget multiplier applied when the objective is noisy.
    pub noisy_budget_factor: usize,
    /// Dimension-dependent Nelder-Mead coefficients.
    pub nm_adaptive: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stage1_max_iter: 4,
            nm_max_iter: 300,
            nm_max_fev: 300,
            stage3_max_iter: 2,
            tol: 1e-4,
            rel_step: 1e-6,
            noisy_budget_factor: 3,
            nm_adaptive: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.stage1_max_iter == 0 || self.nm_max_iter == 0 || self.nm_max_fev == 0 || self.stage3_max_iter == 0 {
            return Err(OptimizeError::Config("all stage budgets must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !(self.rel_step > 0.0) || self.noisy_budget_factor == 0 {
            return Err(OptimizeError::Config("tol, rel_step and noisy_budget_factor must be positive".into()));
        }
        Ok(())
    }

    /// Budgets scaled for a noisy objective.
    pub fn scaled(&self, noisy: bool) -> Self {
        if !noisy {
            return self.clone();
        }
        let k = self.noisy_budget_factor;
        Self {
            stage1_max_iter: self.stage1_max_iter * k,
            nm_max_iter: self.nm_max_iter * k,
            nm_max_fev: self.nm_max_fev * k,
            stage3_max_iter: self.stage3_max_iter * k,
            ..self.clone()
        }
    }
}

/// Runs the three stages. Stage failures are recorded in their logs and the
/// best point found so far is returned; only a failure of the initial
/// evaluation is an error.
pub fn bnb_pipeline<O: Objective + ?Sized>(
    obj: &O,
    guess: &[f64],
    bounds: Option<Bounds>,
    cfg: &PipelineConfig,
) -> Result<OptimizerReport, OptimizeError> {
    cfg.validate()?;
    let bounds = bounds.unwrap_or_else(|| Bounds::unbounded(obj.dim()));
    let mut ev = Evaluator::new(obj, bounds)?;
    ev.set_stage("initial");
    let start = ev.bounds().projected(guess);
    let f0 = ev.eval(&start)?;

    let bfgs = |max_iter| BfgsOptions { max_iter, tol: cfg.tol, rel_step: cfg.rel_step, ..BfgsOptions::default() };
    let nm = NelderMeadOptions {
        max_iter: cfg.nm_max_iter,
        max_fev: cfg.nm_max_fev,
        tol: cfg.tol,
        adaptive: cfg.nm_adaptive,
        ..NelderMeadOptions::default()
    };

    let mut stages = Vec::with_capacity(3);
    let current = |ev: &Evaluator<'_, O>| ev.best().cloned().expect("initial point evaluated");

    stages.push(bfgs_stage(&mut ev, "bfgs_1", &start, f0, &bfgs(cfg.stage1_max_iter)));
    let (f1, x1) = current(&ev);
    stages.push(nelder_mead_stage(&mut ev, "nelder_mead", &x1, f1, &nm));
    let (f2, x2) = current(&ev);
    stages.push(bfgs_stage(&mut ev, "bfgs_2", &x2, f2, &bfgs(cfg.stage3_max_iter)));
    Ok(finish(ev, f0, start, stages))
}
