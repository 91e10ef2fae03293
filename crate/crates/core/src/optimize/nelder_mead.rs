//! Nelder-Mead simplex with reflection 1, expansion 2, contraction ½ and
//! shrink ½, or optionally the dimension-dependent coefficients of Gao and
//! Han.

use serde::{Deserialize, Serialize};

use super::{finish, Bounds, Evaluator, Objective, OptimizeError, OptimizerReport, StageLog, StopReason};

#[derive(Clone, Copy)]
struct Coefficients {
    rho: f64,
    chi: f64,
    psi: f64,
    sigma: f64,
}

impl Coefficients {
    fn new(dim: usize, adaptive: bool) -> Self {
        if adaptive {
            let n = dim.max(1) as f64;
            Self { rho: 1.0, chi: 1.0 + 2.0 / n, psi: 0.75 - 1.0 / (2.0 * n), sigma: 1.0 - 1.0 / n }
        } else {
            Self { rho: 1.0, chi: 2.0, psi: 0.5, sigma: 0.5 }
        }
    }
}
const NONZERO_DELTA: f64 = 0.05;
const ZERO_DELTA: f64 = 0.00025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    pub max_fev: usize,
    /// Stops once the spread of function values over the simplex is at most
    /// this (and the vertex spread is within `xtol`).
    pub tol: f64,
    /// Largest coordinate distance from the best vertex allowed at
    /// convergence. Infinite by default, so only function values decide.
    pub xtol: f64,
    /// Use dimension-dependent coefficients instead of the standard ones.
    pub adaptive: bool,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iter: 300, max_fev: 300, tol: 1e-4, xtol: f64::INFINITY, adaptive: false }
    }
}

fn affine(a: &[f64], wa: f64, b: &[f64], wb: f64, bounds: &Bounds) -> Vec<f64> {
    let mut x: Vec<f64> = a.iter().zip(b).map(|(p, q)| wa * p + wb * q).collect();
    bounds.project(&mut x);
    x
}

fn initial_simplex(x0: &[f64], bounds: &Bounds) -> Vec<Vec<f64>> {
    let mut simplex = vec![x0.to_vec()];
    for k in 0..x0.len() {
        let mut y = x0.to_vec();
        let step = if x0[k] != 0.0 { NONZERO_DELTA * x0[k] } else { ZERO_DELTA };
        y[k] = (x0[k] + step).clamp(bounds.lower[k], bounds.upper[k]);
        if y[k] == x0[k] {
            y[k] = (x0[k] - step).clamp(bounds.lower[k], bounds.upper[k]);
        }
        simplex.push(y);
    }
    simplex
}

fn sort_simplex(sim: &mut Vec<Vec<f64>>, f: &mut Vec<f64>) {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[a].total_cmp(&f[b]));
    *sim = order.iter().map(|&i| sim[i].clone()).collect();
    *f = order.iter().map(|&i| f[i]).collect();
}

fn run<O: Objective + ?Sized>(
    ev: &mut Evaluator<'_, O>,
    x0: &[f64],
    f0: f64,
    opts: &NelderMeadOptions,
    history: &mut Vec<f64>,
) -> Result<(usize, StopReason), OptimizeError> {
    let n = x0.len();
    let bounds = ev.bounds().clone();
    let start = ev.count();
    let used = |ev: &Evaluator<'_, O>| ev.count() - start;

    let mut sim = initial_simplex(x0, &bounds);
    let mut f = vec![f0];
    f.extend(ev.eval_batch(&sim[1..])?);
    sort_simplex(&mut sim, &mut f);

    let Coefficients { rho, chi, psi, sigma } = Coefficients::new(n, opts.adaptive);
    let mut iterations = 0;
    loop {
        let spread = f.iter().map(|v| (v - f[0]).abs()).fold(0.0, f64::max);
        let x_spread =
            sim[1..].iter().flat_map(|p| p.iter().zip(&sim[0]).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        if spread <= opts.tol && x_spread <= opts.xtol {
            return Ok((iterations, StopReason::SimplexSpread));
        }
        if iterations >= opts.max_iter {
            return Ok((iterations, StopReason::MaxIterations));
        }
        if used(ev) >= opts.max_fev {
            return Ok((iterations, StopReason::MaxEvaluations));
        }

        let mut xbar = vec![0.0; n];
        for p in &sim[..n] {
            for (c, v) in xbar.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let worst = sim[n].clone();
        let xr = affine(&xbar, 1.0 + rho, &worst, -rho, &bounds);
        let fr = ev.eval(&xr)?;

        let mut shrink = false;
        if fr < f[0] {
            let xe = affine(&xbar, 1.0 + rho * chi, &worst, -rho * chi, &bounds);
            let fe = ev.eval(&xe)?;
            if fe < fr {
                sim[n] = xe;
                f[n] = fe;
            } else {
                sim[n] = xr;
                f[n] = fr;
            }
        } else if fr < f[n - 1] {
            sim[n] = xr;
            f[n] = fr;
        } else if fr < f[n] {
            let xc = affine(&xbar, 1.0 + psi * rho, &worst, -psi * rho, &bounds);
            let fc = ev.eval(&xc)?;
            if fc <= fr {
                sim[n] = xc;
                f[n] = fc;
            } else {
                shrink = true;
            }
        } else {
            let xcc = affine(&xbar, 1.0 - psi, &worst, psi, &bounds);
            let fcc = ev.eval(&xcc)?;
            if fcc < f[n] {
                sim[n] = xcc;
                f[n] = fcc;
            } else {
                shrink = true;
            }
        }
        if shrink {
            let best = sim[0].clone();
            for p in sim.iter_mut().skip(1) {
                *p = affine(&best, 1.0 - sigma, p, sigma, &bounds);
            }
            let values = ev.eval_batch(&sim[1..])?;
            f[1..].copy_from_slice(&values);
        }
        sort_simplex(&mut sim, &mut f);
        iterations += 1;
        history.push(f[0]);
    }
}

pub(crate) fn nelder_mead_stage<O: Objective + ?Sized>(
    ev: &mut Evaluator<'_, O>,
    name: &str,
    x0: &[f64],
    f0: f64,
    opts: &NelderMeadOptions,
) -> StageLog {
    ev.set_stage(name);
    let before = ev.count();
    let x0 = ev.bounds().projected(x0);
    let mut history = Vec::new();
    let result = run(ev, &x0, f0, opts, &mut history);
    let evaluations = ev.count() - before;
    let best_value = ev.best().map_or(f0, |b| b.0.min(f0));
    let (iterations, stop, error) = match result {
        Ok((it, stop)) => (it, stop, None),
        Err(e) => (history.len(), StopReason::Failed, Some(e.to_string())),
    };
    StageLog { name: name.to_string(), iterations, evaluations, start_value: f0, best_value, stop, history, error }
}

pub fn nelder_mead_minimize<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    bounds: Option<Bounds>,
    opts: &NelderMeadOptions,
) -> Result<OptimizerReport, OptimizeError> {
    if opts.max_iter == 0 || opts.max_fev == 0 {
        return Err(OptimizeError::Config("Nelder-Mead budgets must be at least 1".into()));
    }
    let bounds = bounds.unwrap_or_else(|| Bounds::unbounded(obj.dim()));
    let mut ev = Evaluator::new(obj, bounds)?;
    ev.set_stage("nelder_mead");
    let start = ev.bounds().projected(x0);
    let f0 = ev.eval(&start)?;
    let log = nelder_mead_stage(&mut ev, "nelder_mead", &start, f0, opts);
    if let Some(msg) = &log.error {
        return Err(OptimizeError::Objective { stage: "nelder_mead".into(), index: ev.count(), message: msg.clone() });
    }
    Ok(finish(ev, f0, start, vec![log]))
}
