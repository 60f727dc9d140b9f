use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result};

/// A scalar function to minimize.
pub trait Objective {
    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    /// Evaluates several points; results must come back in input order.
    /// Override to evaluate concurrently.
    fn evaluate_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.evaluate(x)).collect()
    }
}

impl<F: Fn(&[f64]) -> Result<f64>> Objective for F {
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Collapsed when every vertex lies within this distance of the best one
    /// in every coordinate; converged if also...
    pub x_tolerance: f64,
    /// ...and the misfit spread over the simplex is below this.
    pub f_tolerance: f64,
    /// Stop as soon as the best value reaches this.
    pub target: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Iterations without improvement of the best value before a restart.
    pub stall_iterations: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 500,
            x_tolerance: 1e-3,
            f_tolerance: 1e-4,
            target: 0.0,
            initial_step: 0.25,
            stall_iterations: 0,
            max_restarts: 3,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Initial,
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
    Restart,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub evaluations: usize,
    pub step: StepKind,
    pub best: f64,
    pub simplex_size: f64,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub initial_value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
}

struct Counter<'a, O: Objective + ?Sized> {
    objective: &'a O,
    lower: &'a [f64],
    upper: &'a [f64],
    evaluations: usize,
}

impl<O: Objective + ?Sized> Counter<'_, O> {
    fn project(&self, mut x: Vec<f64>) -> Vec<f64> {
        for ((v, &lo), &hi) in x.iter_mut().zip(self.lower).zip(self.upper) {
            *v = v.clamp(lo, hi);
        }
        x
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        checked(self.objective.evaluate(x)?)
    }

    fn eval_batch(&mut self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.evaluations += xs.len();
        self.objective.evaluate_batch(xs)?.into_iter().map(checked).collect()
    }
}

fn checked(v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(Error::InvalidCalibration("objective returned NaN".into()))
    } else {
        Ok(v)
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Box-constrained Nelder-Mead with the standard coefficients (reflection 1,
/// expansion 2, contraction and shrink 1/2). Trial points are projected onto
/// the box; the accepted best value never increases.
///
/// A simplex that has collapsed below `x_tolerance`, or has not improved for
/// `stall_iterations`, is rebuilt around the best point with a smaller,
/// randomly oriented shape. The search ends once a collapsed simplex also
/// satisfies `f_tolerance` and the last restart gained less than that.
pub fn nelder_mead<O: Objective + ?Sized>(
    objective: &O,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    options: &NelderMeadOptions,
) -> Result<NelderMeadReport> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidCalibration("nothing to fit".into()));
    }
    if lower.len() != n || upper.len() != n {
        return Err(Error::InvalidCalibration("bounds do not match the parameter count".into()));
    }
    for i in 0..n {
        if !(lower[i] <= x0[i] && x0[i] <= upper[i]) || !lower[i].is_finite() || !upper[i].is_finite() {
            return Err(Error::InvalidCalibration(alloc::format!(
                "start value {} of parameter {i} lies outside [{}, {}]",
                x0[i],
                lower[i],
                upper[i]
            )));
        }
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 2.0, 0.5, 0.5);
    let stall_limit = if options.stall_iterations == 0 { 20 * n } else { options.stall_iterations };

    let mut counter = Counter {
        objective,
        lower,
        upper,
        evaluations: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut history = Vec::new();

    let build = |center: &[f64], steps: &[f64], counter: &Counter<O>| -> Vec<Vec<f64>> {
        let mut vertices = vec![center.to_vec()];
        for i in 0..n {
            let mut v = center.to_vec();
            let s = steps[i];
            v[i] = if center[i] + s <= upper[i] || center[i] - s < lower[i] {
                center[i] + s
            } else {
                center[i] - s
            };
            vertices.push(counter.project(v));
        }
        vertices
    };

    let initial_value = counter.eval(x0)?;
    let steps = vec![options.initial_step; n];
    let mut vertices = build(x0, &steps, &counter);
    let mut values = vec![initial_value];
    values.extend(counter.eval_batch(&vertices[1..])?);
    let mut simplex: Vec<(Vec<f64>, f64)> = vertices.drain(..).zip(values).collect();

    let mut iterations = 0;
    let mut restarts = 0;
    let mut stalled = 0;
    let mut converged = false;
    let mut step = StepKind::Initial;
    let mut best_seen = f64::INFINITY;
    let mut best_at_restart = f64::INFINITY;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread = simplex[n].1 - best;
        history.push(IterationRecord {
            iteration: iterations,
            evaluations: counter.evaluations,
            step,
            best,
            simplex_size: size,
            spread,
        });
        if best <= options.target {
            converged = true;
            break;
        }
        let collapsed = size < options.x_tolerance;
        if collapsed && spread < options.f_tolerance && (restarts >= options.max_restarts || best_at_restart - best < options.f_tolerance) {
            converged = true;
            break;
        }
        if counter.evaluations >= options.max_evaluations {
            break;
        }
        if best < best_seen {
            best_seen = best;
            stalled = 0;
        } else {
            stalled += 1;
        }
        iterations += 1;

        if (collapsed || stalled >= stall_limit) && restarts < options.max_restarts {
            best_at_restart = best;
            // Fresh, randomly oriented simplex around the best point.
            restarts += 1;
            stalled = 0;
            let scale = options.initial_step * 0.5f64.powi(restarts as i32);
            let steps: Vec<f64> = (0..n)
                .map(|_| {
                    let sign = if rng.next_u32() & 1 == 0 { 1.0 } else { -1.0 };
                    sign * scale * (0.5 + uniform(&mut rng))
                })
                .collect();
            let center = simplex[0].0.clone();
            let vertices = build(&center, &steps, &counter);
            let values = counter.eval_batch(&vertices[1..])?;
            let best_vertex = simplex.swap_remove(0);
            simplex = core::iter::once(best_vertex).chain(vertices.into_iter().skip(1).zip(values)).collect();
            step = StepKind::Restart;
            continue;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / nf)
            .collect();
        let towards = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + t * (c - w)).collect()
        };
        let worst = simplex[n].0.clone();
        let (f_worst, f_second) = (simplex[n].1, simplex[n - 1].1);

        let xr = counter.project(towards(alpha, &worst));
        let fr = counter.eval(&xr)?;
        let mut shrink = false;
        if fr < best {
            let xe = counter.project(towards(alpha * beta, &worst));
            let fe = counter.eval(&xe)?;
            if fe < fr {
                simplex[n] = (xe, fe);
                step = StepKind::Expand;
            } else {
                simplex[n] = (xr, fr);
                step = StepKind::Reflect;
            }
        } else if fr < f_second {
            simplex[n] = (xr, fr);
            step = StepKind::Reflect;
        } else if fr < f_worst {
            let xc = counter.project(towards(alpha * gamma, &worst));
            let fc = counter.eval(&xc)?;
            if fc <= fr {
                simplex[n] = (xc, fc);
                step = StepKind::ContractOutside;
            } else {
                shrink = true;
            }
        } else {
            let xc = counter.project(towards(-gamma, &worst));
            let fc = counter.eval(&xc)?;
            if fc < f_worst {
                simplex[n] = (xc, fc);
                step = StepKind::ContractInside;
            } else {
                shrink = true;
            }
        }
        if shrink {
            let anchor = simplex[0].0.clone();
            let moved: Vec<Vec<f64>> = simplex[1..]
                .iter()
                .map(|(v, _)| anchor.iter().zip(v).map(|(a, x)| a + delta * (x - a)).collect())
                .collect();
            let values = counter.eval_batch(&moved)?;
            for (slot, (v, f)) in simplex[1..].iter_mut().zip(moved.into_iter().zip(values)) {
                *slot = (v, f);
            }
            step = StepKind::Shrink;
        }
    }

    let (x, value) = simplex.swap_remove(0);
    Ok(NelderMeadReport {
        x,
        value,
        initial_value,
        evaluations: counter.evaluations,
        iterations,
        restarts,
        converged,
        history,
    })
}
