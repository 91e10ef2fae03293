//! BFGS with the inverse-Hessian update
//! `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, `ρ = 1 / (yᵀ s)`,
//! and a backtracking Armijo line search.

use serde::{Deserialize, Serialize};

use super::{dot, finish, norm_inf, Bounds, Evaluator, Objective, OptimizeError, StageLog, StopReason};

const ARMIJO_C1: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stops when the projected gradient's max-norm or the per-iteration
    /// decrease falls below this.
    pub tol: f64,
    /// Central-difference step is `rel_step · max(1, |x_i|)`.
    pub rel_step: f64,
    pub max_backtracks: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-6, rel_step: 1e-6, max_backtracks: 20 }
    }
}

/// What the core iteration needs from a problem.
trait Smooth {
    type Error;
    fn value(&mut self, x: &[f64]) -> Result<f64, Self::Error>;
    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, Self::Error>;
    fn bounds(&self) -> Option<&Bounds>;
}

struct Outcome {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    stop: StopReason,
    history: Vec<f64>,
}

/// Zeroes gradient components that point out of an active bound, so the
/// stopping test sees only feasible descent.
fn projected_gradient(g: &[f64], x: &[f64], bounds: Option<&Bounds>) -> Vec<f64> {
    let mut pg = g.to_vec();
    if let Some(b) = bounds {
        for i in 0..pg.len() {
            if (x[i] <= b.lower[i] && pg[i] > 0.0) || (x[i] >= b.upper[i] && pg[i] < 0.0) {
                pg[i] = 0.0;
            }
        }
    }
    pg
}

fn core<S: Smooth>(
    problem: &mut S,
    x0: Vec<f64>,
    f0: f64,
    max_iter: usize,
    gtol: f64,
    ftol: f64,
    max_backtracks: usize,
) -> Result<Outcome, S::Error> {
    let n = x0.len();
    let mut x = x0;
    let mut f = f0;
    let mut g = problem.gradient(&x)?;
    let mut h = identity(n);
    let mut scaled = false;
    let mut history = Vec::new();

    for iteration in 0..max_iter {
        let pg = projected_gradient(&g, &x, problem.bounds());
        if norm_inf(&pg) < gtol {
            return Ok(Outcome { x, f, iterations: iteration, stop: StopReason::GradientTolerance, history });
        }
        let mut p = mat_vec(&h, &g).into_iter().map(|v| -v).collect::<Vec<_>>();
        if let Some(b) = problem.bounds() {
            for i in 0..n {
                if (x[i] <= b.lower[i] && p[i] < 0.0) || (x[i] >= b.upper[i] && p[i] > 0.0) {
                    p[i] = 0.0;
                }
            }
        }
        if dot(&p, &pg) >= 0.0 {
            h = identity(n);
            scaled = false;
            p = pg.iter().map(|v| -v).collect();
        }
        let mut alpha = if scaled { 1.0 } else { (1.0 / dot(&pg, &pg).sqrt()).min(1.0) };

        let mut accepted = None;
        for _ in 0..=max_backtracks {
            let mut trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + alpha * pi).collect();
            if let Some(b) = problem.bounds() {
                b.project(&mut trial);
            }
            let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            if s.iter().all(|v| *v == 0.0) {
                break;
            }
            let ft = problem.value(&trial)?;
            if ft <= f + ARMIJO_C1 * dot(&g, &s) {
                accepted = Some((trial, ft, s));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new, s)) = accepted else {
            return Ok(Outcome { x, f, iterations: iteration, stop: StopReason::LineSearchFailed, history });
        };

        let g_new = problem.gradient(&x_new)?;
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ys = dot(&y, &s);
        let yy = dot(&y, &y);
        // A gradient change at finite-difference noise level carries no
        // curvature information.
        let noise = 1e-8 * norm_inf(&g).max(norm_inf(&g_new)).max(f64::MIN_POSITIVE);
        if norm_inf(&y) > noise && ys > 1e-12 * yy.sqrt() * dot(&s, &s).sqrt() {
            if !scaled {
                let gamma = ys / yy;
                h.iter_mut().flatten().for_each(|v| *v *= gamma);
                scaled = true;
            }
            bfgs_update(&mut h, &s, &y, 1.0 / ys);
        }
        let decrease = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(f);
        if decrease.abs() < ftol {
            return Ok(Outcome { x, f, iterations: iteration + 1, stop: StopReason::ValueTolerance, history });
        }
    }
    let pg = projected_gradient(&g, &x, problem.bounds());
    let stop = if norm_inf(&pg) < gtol { StopReason::GradientTolerance } else { StopReason::MaxIterations };
    Ok(Outcome { x, f, iterations: max_iter, stop, history })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, expanded as
/// `H − ρ (s (Hy)ᵀ + (Hy) sᵀ) + (ρ² yᵀHy + ρ) s sᵀ` for symmetric H.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], rho: f64) {
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    let c = rho * rho * yhy + rho;
    for i in 0..s.len() {
        for j in 0..s.len() {
            h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + c * s[i] * s[j];
        }
    }
}

/// Central-difference stencil around `x`, clipped to the bounds. Returns the
/// 2·dim points (plus, minus interleaved) and the per-coordinate spans.
fn stencil(x: &[f64], bounds: &Bounds, rel_step: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut points = Vec::with_capacity(2 * x.len());
    let mut spans = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1.0);
        let hi = (x[i] + h).min(bounds.upper[i]);
        let lo = (x[i] - h).max(bounds.lower[i]);
        let mut plus = x.to_vec();
        plus[i] = hi;
        let mut minus = x.to_vec();
        minus[i] = lo;
        points.push(plus);
        points.push(minus);
        spans.push(hi - lo);
    }
    (points, spans)
}

fn from_stencil(values: &[f64], spans: &[f64]) -> Vec<f64> {
    spans
        .iter()
        .enumerate()
        .map(|(i, &d)| if d > 0.0 { (values[2 * i] - values[2 * i + 1]) / d } else { 0.0 })
        .collect()
}

/// Central-difference gradient of `obj` at `x`, evaluated concurrently.
pub fn central_gradient<O: Objective + ?Sized>(obj: &O, x: &[f64], rel_step: f64) -> Result<Vec<f64>, String> {
    use rayon::prelude::*;
    let (points, spans) = stencil(x, &Bounds::unbounded(x.len()), rel_step);
    let values = points.par_iter().map(|p| obj.evaluate(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(from_stencil(&values, &spans))
}

struct Numerical<'e, 'o, O: Objective + ?Sized> {
    ev: &'e mut Evaluator<'o, O>,
    rel_step: f64,
}

impl<O: Objective + ?Sized> Smooth for Numerical<'_, '_, O> {
    type Error = OptimizeError;

    fn value(&mut self, x: &[f64]) -> Result<f64, OptimizeError> {
        self.ev.eval(x)
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OptimizeError> {
        let (points, spans) = stencil(x, self.ev.bounds(), self.rel_step);
        let values = self.ev.eval_batch(&points)?;
        Ok(from_stencil(&values, &spans))
    }

    fn bounds(&self) -> Option<&Bounds> {
        Some(self.ev.bounds())
    }
}

/// Runs one BFGS stage on a shared evaluator, starting from `x0` with known
/// value `f0`. Failures end the stage and are recorded in the log.
pub(crate) fn bfgs_stage<O: Objective + ?Sized>(
    ev: &mut Evaluator<'_, O>,
    name: &str,
    x0: &[f64],
    f0: f64,
    opts: &BfgsOptions,
) -> StageLog {
    ev.set_stage(name);
    let before = ev.count();
    let x0 = ev.bounds().projected(x0);
    let mut problem = Numerical { ev, rel_step: opts.rel_step };
    let result = core(&mut problem, x0, f0, opts.max_iter, opts.tol, opts.tol, opts.max_backtracks);
    let evaluations = ev.count() - before;
    let best_value = ev.best().map_or(f0, |b| b.0.min(f0));
    match result {
        Ok(out) => StageLog {
            name: name.to_string(),
            iterations: out.iterations,
            evaluations,
            start_value: f0,
            best_value: best_value.min(out.f),
            stop: out.stop,
            history: out.history,
            error: None,
        },
        Err(e) => StageLog {
            name: name.to_string(),
            iterations: 0,
            evaluations,
            start_value: f0,
            best_value,
            stop: StopReason::Failed,
            history: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// BFGS with central-difference gradients over an optional box.
pub fn quasi_newton_minimize<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    bounds: Option<Bounds>,
    opts: &BfgsOptions,
) -> Result<super::OptimizerReport, OptimizeError> {
    if opts.max_iter == 0 {
        return Err(OptimizeError::Config("max_iter must be at least 1".into()));
    }
    let bounds = bounds.unwrap_or_else(|| Bounds::unbounded(obj.dim()));
    let mut ev = Evaluator::new(obj, bounds)?;
    ev.set_stage("bfgs");
    let start = ev.bounds().projected(x0);
    let f0 = ev.eval(&start)?;
    let log = bfgs_stage(&mut ev, "bfgs", &start, f0, opts);
    if let Some(msg) = &log.error {
        return Err(OptimizeError::Objective { stage: "bfgs".into(), index: ev.count(), message: msg.clone() });
    }
    Ok(finish(ev, f0, start, vec![log]))
}

struct Analytic<F> {
    f: F,
    grad: Vec<f64>,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Smooth for Analytic<F> {
    type Error = std::convert::Infallible;

    fn value(&mut self, x: &[f64]) -> Result<f64, Self::Error> {
        Ok((self.f)(x, &mut self.grad))
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, Self::Error> {
        (self.f)(x, &mut self.grad);
        Ok(self.grad.clone())
    }

    fn bounds(&self) -> Option<&Bounds> {
        None
    }
}

/// Unconstrained BFGS for a function that fills its own gradient. Returns
/// the final point and value.
pub fn bfgs_with_gradient<F>(f: F, x0: &[f64], max_iter: usize, gtol: f64) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let mut problem = Analytic { f, grad: vec![0.0; x0.len()] };
    let f0 = match problem.value(x0) {
        Ok(v) => v,
        Err(never) => match never {},
    };
    match core(&mut problem, x0.to_vec(), f0, max_iter, gtol, 0.0, 60) {
        Ok(out) => (out.x, out.f),
        Err(never) => match never {},
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::FnObjective;

    fn opts(max_iter: usize, tol: f64) -> BfgsOptions {
        BfgsOptions { max_iter, tol, ..BfgsOptions::default() }
    }

    #[test]
    fn one_dimensional_quadratic() {
        let obj = FnObjective::new(1, |x: &[f64]| (x[0] - 3.0).powi(2));
        let r = quasi_newton_minimize(&obj, &[0.0], None, &opts(50, 1e-10)).unwrap();
        assert!((r.best_x[0] - 3.0).abs() < 1e-6, "{:?}", r.best_x);
    }

    #[test]
    fn anisotropic_quadratic() {
        let obj = FnObjective::new(2, |x: &[f64]| x[0] * x[0] + 10.0 * x[1] * x[1]);
        let r = quasi_newton_minimize(&obj, &[3.0, -2.0], None, &opts(100, 1e-10)).unwrap();
        assert!(r.best_x.iter().all(|v| v.abs() < 1e-6), "{:?}", r.best_x);
    }

    #[test]
    fn rosenbrock() {
        let obj = FnObjective::new(2, |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let r = quasi_newton_minimize(&obj, &[-1.2, 1.0], None, &opts(2000, 1e-12)).unwrap();
        assert!((r.best_x[0] - 1.0).abs() < 1e-4 && (r.best_x[1] - 1.0).abs() < 1e-4, "{:?}", r.best_x);
    }

    #[test]
    fn respects_bounds() {
        let obj = FnObjective::new(1, |x: &[f64]| (x[0] + 2.0).powi(2));
        let b = Bounds::new(vec![0.0], vec![5.0]).unwrap();
        let r = quasi_newton_minimize(&obj, &[4.0], Some(b), &opts(50, 1e-10)).unwrap();
        assert_eq!(r.best_x, vec![0.0]);
    }

    #[test]
    fn update_satisfies_secant_condition() {
        let mut h = identity(3);
        let s = [0.3, -0.1, 0.7];
        let y = [0.5, 0.2, 0.9];
        bfgs_update(&mut h, &s, &y, 1.0 / dot(&s, &y));
        let hy = mat_vec(&h, &y);
        for (a, b) in hy.iter().zip(&s) {
            assert!((a - b).abs() < 1e-12);
        }
        // Direct product form as an oracle.
        let rho = 1.0 / dot(&s, &y);
        let n = 3;
        let left: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - rho * s[i] * y[j]).collect()).collect();
        let mut expected = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                // left · I · leftᵀ + ρ s sᵀ
                expected[i][j] = (0..n).map(|k| left[i][k] * left[j][k]).sum::<f64>() + rho * s[i] * s[j];
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert!((h[i][j] - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_variant() {
        let (x, f) = bfgs_with_gradient(
            |x, g| {
                g[0] = 2.0 * (x[0] - 1.0);
                g[1] = 20.0 * (x[1] + 2.0);
                (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2)
            },
            &[5.0, 5.0],
            200,
            1e-12,
        );
        assert!((x[0] - 1.0).abs() < 1e-8 && (x[1] + 2.0).abs() < 1e-8 && f < 1e-15);
    }
}
