//! Fitting effective conductivities and the Robin coefficient to measured
//! cooldown traces.
//!
//! The misfit is a weighted sum over sensor groups of the mean squared
//! temperature residual (°C²), with the simulation resampled at the
//! measurement times. Parameters are optimized in log space, which equalizes
//! scales across parameters spanning four decades.

mod nelder_mead;

use alloc::string::String;
use alloc::vec::Vec;

// Float math is inherent only on recent toolchains.
#[allow(unused_imports)]
use num_traits::Float;

pub use nelder_mead::{
    nelder_mead, IterationRecord, NelderMeadOptions, NelderMeadReport, Objective, StepKind,
};

use crate::analysis::{resample, sensor_group_mean};
use crate::fem::BoundarySpec;
use crate::materials::MaterialTable;
use crate::mesh::Mesh;
use crate::transient::{run_scenario, ScenarioSpec, TemperatureTrace};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ParameterTarget {
    /// Effective isotropic conductivity of a region, W/°C/m.
    EffectiveConductivity(String),
    /// Coefficient of the Robin entry on a boundary tag, W/°C/m.
    RobinCoefficient(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationParameter {
    pub target: ParameterTarget,
    pub lower: f64,
    pub upper: f64,
}

impl CalibrationParameter {
    /// Conductivity bounded to `[0.1, 10] x reference`.
    pub fn conductivity(region: &str, reference: f64) -> Self {
        Self {
            target: ParameterTarget::EffectiveConductivity(region.into()),
            lower: 0.1 * reference,
            upper: 10.0 * reference,
        }
    }

    /// Robin coefficient bounded to `[0.001, 10]`.
    pub fn robin(tag: &str) -> Self {
        Self {
            target: ParameterTarget::RobinCoefficient(tag.into()),
            lower: 0.001,
            upper: 10.0,
        }
    }

    pub fn name(&self) -> String {
        match &self.target {
            ParameterTarget::EffectiveConductivity(r) => alloc::format!("lambda_eff({r})"),
            ParameterTarget::RobinCoefficient(t) => alloc::format!("h({t})"),
        }
    }
}

/// Measured trace of a sensor group and the model probes whose mean it is
/// compared against.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredGroup {
    pub name: String,
    pub probe_ids: Vec<String>,
    pub measured: TemperatureTrace,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct CalibrationProblem<'a> {
    pub mesh: &'a Mesh,
    pub materials: MaterialTable,
    pub boundary: BoundarySpec,
    pub scenario: ScenarioSpec,
    pub parameters: Vec<CalibrationParameter>,
    pub groups: Vec<MeasuredGroup>,
}

impl<'a> CalibrationProblem<'a> {
    pub fn validate(&self) -> Result<()> {
        if self.parameters.is_empty() {
            return Err(Error::InvalidCalibration("nothing to fit".into()));
        }
        for p in &self.parameters {
            if !(p.lower > 0.0 && p.upper >= p.lower && p.upper.is_finite()) {
                return Err(Error::InvalidCalibration(alloc::format!(
                    "bounds of {} must be finite and positive",
                    p.name()
                )));
            }
            match &p.target {
                ParameterTarget::EffectiveConductivity(r) => {
                    self.materials.get(r).ok_or_else(|| Error::UnknownTag(r.clone()))?;
                }
                ParameterTarget::RobinCoefficient(t) => {
                    if !self.boundary.robin.contains_key(t) {
                        return Err(Error::InvalidCalibration(alloc::format!("no Robin condition on `{t}`")));
                    }
                }
            }
        }
        if self.groups.is_empty() {
            return Err(Error::InvalidCalibration("no measured groups".into()));
        }
        for g in &self.groups {
            if !(g.weight >= 0.0 && g.weight.is_finite()) {
                return Err(Error::InvalidCalibration(alloc::format!("weight of `{}` must be nonnegative", g.name)));
            }
            if g.probe_ids.is_empty() {
                return Err(Error::InvalidCalibration(alloc::format!("group `{}` names no probes", g.name)));
            }
            for id in &g.probe_ids {
                if !self.scenario.probes.iter().any(|p| &p.id == id) {
                    return Err(Error::InvalidCalibration(alloc::format!(
                        "group `{}` refers to unknown probe `{id}`",
                        g.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Current values of the fitted parameters in the problem's tables.
    pub fn current_values(&self) -> Result<Vec<f64>> {
        self.parameters
            .iter()
            .map(|p| match &p.target {
                ParameterTarget::EffectiveConductivity(r) => {
                    let entry = self.materials.get(r).ok_or_else(|| Error::UnknownTag(r.clone()))?;
                    match entry.material.active_conductivity() {
                        crate::materials::Conductivity::Isotropic(k) => Ok(k),
                        crate::materials::Conductivity::Polar { radial, tangential } => {
                            Ok((radial * tangential).sqrt())
                        }
                    }
                }
                ParameterTarget::RobinCoefficient(t) => self
                    .boundary
                    .robin
                    .get(t)
                    .map(|e| e.coefficient)
                    .ok_or_else(|| Error::UnknownTag(t.clone())),
            })
            .collect()
    }

    /// Material table and boundary spec with `params` applied.
    pub fn apply(&self, params: &[f64]) -> Result<(MaterialTable, BoundarySpec)> {
        if params.len() != self.parameters.len() {
            return Err(Error::InvalidCalibration("parameter vector has the wrong length".into()));
        }
        let mut materials = self.materials.clone();
        let mut boundary = self.boundary.clone();
        for (p, &v) in self.parameters.iter().zip(params) {
            match &p.target {
                ParameterTarget::EffectiveConductivity(r) => materials.set_effective_conductivity(r, v)?,
                ParameterTarget::RobinCoefficient(t) => {
                    boundary
                        .robin
                        .get_mut(t)
                        .ok_or_else(|| Error::UnknownTag(t.clone()))?
                        .coefficient = v;
                }
            }
        }
        Ok((materials, boundary))
    }

    /// Simulated group traces at `params`, in group order.
    pub fn simulate_groups(&self, params: &[f64]) -> Result<Vec<TemperatureTrace>> {
        let (materials, boundary) = self.apply(params)?;
        let result = run_scenario(self.mesh, &materials, &boundary, &self.scenario)?;
        self.groups
            .iter()
            .map(|g| {
                let members: Vec<TemperatureTrace> = g
                    .probe_ids
                    .iter()
                    .map(|id| result.trace(id).cloned().ok_or_else(|| Error::UnknownTag(id.clone())))
                    .collect::<Result<_>>()?;
                sensor_group_mean(g.name.clone(), &members)
            })
            .collect()
    }

    /// Mean squared residual of each group, °C².
    pub fn group_residuals(&self, params: &[f64]) -> Result<Vec<f64>> {
        let simulated = self.simulate_groups(params)?;
        self.groups
            .iter()
            .zip(&simulated)
            .map(|(g, sim)| {
                let model = resample(sim, g.measured.times())?;
                let n = model.len() as f64;
                Ok(model
                    .iter()
                    .zip(g.measured.temperatures())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / n)
            })
            .collect()
    }

    pub fn misfit(&self, params: &[f64]) -> Result<f64> {
        misfit(params, self)
    }
}

/// Weighted sum of per-group mean squared residuals, °C².
pub fn misfit(params: &[f64], problem: &CalibrationProblem) -> Result<f64> {
    for (p, &v) in problem.parameters.iter().zip(params) {
        if !(v >= p.lower && v <= p.upper) {
            return Err(Error::InvalidCalibration(alloc::format!(
                "{} = {v} lies outside [{}, {}]",
                p.name(),
                p.lower,
                p.upper
            )));
        }
    }
    if problem.groups.iter().all(|g| g.weight == 0.0) {
        log::warn!("all group weights are zero; the misfit is identically zero");
        return Ok(0.0);
    }
    let residuals = problem.group_residuals(params)?;
    Ok(problem.groups.iter().zip(residuals).map(|(g, r)| g.weight * r).sum())
}

/// The problem seen by the optimizer: log-transformed parameters.
pub struct LogObjective<'p, 'a> {
    pub problem: &'p CalibrationProblem<'a>,
}

impl LogObjective<'_, '_> {
    pub fn to_natural(&self, y: &[f64]) -> Vec<f64> {
        // Clamp guards against exp/ln round-off at the bounds.
        y.iter()
            .zip(&self.problem.parameters)
            .map(|(v, p)| v.exp().clamp(p.lower, p.upper))
            .collect()
    }
}

impl Objective for LogObjective<'_, '_> {
    fn evaluate(&self, y: &[f64]) -> Result<f64> {
        misfit(&self.to_natural(y), self.problem)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub misfit: f64,
    pub initial_misfit: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Root-mean-square residual per group at the fitted point, °C.
    pub group_rms: Vec<(String, f64)>,
    pub history: Vec<IterationRecord>,
}

/// Fits the problem from `initial` using the serial objective.
pub fn fit(problem: &CalibrationProblem, initial: &[f64], options: &NelderMeadOptions) -> Result<CalibrationResult> {
    let objective = LogObjective { problem };
    fit_with(problem, &objective, initial, options)
}

/// Like [`fit`], with a caller-supplied objective over log parameters (for
/// example one that evaluates simplex batches concurrently).
pub fn fit_with<O: Objective + ?Sized>(
    problem: &CalibrationProblem,
    objective: &O,
    initial: &[f64],
    options: &NelderMeadOptions,
) -> Result<CalibrationResult> {
    problem.validate()?;
    if initial.len() != problem.parameters.len() {
        return Err(Error::InvalidCalibration("initial vector has the wrong length".into()));
    }
    let lower: Vec<f64> = problem.parameters.iter().map(|p| p.lower.ln()).collect();
    let upper: Vec<f64> = problem.parameters.iter().map(|p| p.upper.ln()).collect();
    let y0: Vec<f64> = initial
        .iter()
        .zip(problem.parameters.iter())
        .map(|(&v, p)| {
            if !(v >= p.lower && v <= p.upper) {
                return Err(Error::InvalidCalibration(alloc::format!(
                    "initial {} = {v} lies outside [{}, {}]",
                    p.name(),
                    p.lower,
                    p.upper
                )));
            }
            Ok(v.ln().clamp(p.lower.ln(), p.upper.ln()))
        })
        .collect::<Result<_>>()?;
    let report = nelder_mead(objective, &y0, &lower, &upper, options)?;
    let params = LogObjective { problem }.to_natural(&report.x);
    let residuals = if problem.groups.iter().all(|g| g.weight == 0.0) {
        alloc::vec![0.0; problem.groups.len()]
    } else {
        problem.group_residuals(&params)?
    };
    Ok(CalibrationResult {
        names: problem.parameters.iter().map(CalibrationParameter::name).collect(),
        params,
        misfit: report.value,
        initial_misfit: report.initial_value,
        evaluations: report.evaluations,
        iterations: report.iterations,
        converged: report.converged,
        group_rms: problem
            .groups
            .iter()
            .zip(residuals)
            .map(|(g, r)| (g.name.clone(), r.sqrt()))
            .collect(),
        history: report.history,
    })
}
