//! Configuration-driven runs shared by the CLI and the tests.

use machtherm_core::analysis::{relative_error, sensor_group_mean, time_constant};
use machtherm_core::calibrate::{
    fit_with, CalibrationProblem, CalibrationResult, LogObjective, MeasuredGroup, Objective,
};
use machtherm_core::fem::BoundarySpec;
use machtherm_core::materials::MaterialTable;
use machtherm_core::mesh::{build_machine_mesh, Mesh};
use machtherm_core::transient::{run_scenario, ScenarioResult, TemperatureTrace};
use rayon::prelude::*;

use crate::config::{ParameterKind, RunConfig};
use crate::Error;

/// The parametric machine at the configured level, or the configured MSH file.
pub fn load_mesh(config: &RunConfig) -> Result<Mesh, Error> {
    match &config.geometry.mesh_file {
        Some(path) => crate::io::read_msh(path),
        None => build_machine_mesh(&config.geometry.machine(), config.geometry.resolution_level)
            .map_err(Error::core("mesh")),
    }
}

pub struct Simulation {
    pub result: ScenarioResult,
    /// Sensor-group means, in configuration order.
    pub groups: Vec<TemperatureTrace>,
}

pub fn materials_and_boundary(config: &RunConfig) -> Result<(MaterialTable, BoundarySpec), Error> {
    Ok((config.materials.table()?, config.boundaries.spec()?))
}

pub fn simulate(config: &RunConfig, mesh: &Mesh) -> Result<Simulation, Error> {
    let (materials, boundary) = materials_and_boundary(config)?;
    let scenario = config.scenario_spec(&config.geometry.machine())?;
    let result = run_scenario(mesh, &materials, &boundary, &scenario).map_err(Error::core("transient"))?;
    let groups = group_traces(config, &result.traces)?;
    Ok(Simulation { result, groups })
}

/// Averages probe traces into the configured sensor groups.
pub fn group_traces(config: &RunConfig, traces: &[TemperatureTrace]) -> Result<Vec<TemperatureTrace>, Error> {
    config
        .probes
        .groups
        .iter()
        .map(|g| {
            let members: Vec<TemperatureTrace> = g
                .members
                .iter()
                .map(|id| {
                    traces
                        .iter()
                        .find(|t| &t.probe_id == id)
                        .cloned()
                        .ok_or_else(|| Error::Config(format!("group `{}`: no trace for probe `{id}`", g.name)))
                })
                .collect::<Result<_, _>>()?;
            sensor_group_mean(g.name.clone(), &members).map_err(Error::core("analysis"))
        })
        .collect()
}

/// One row of the time-constant comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeConstantRow {
    pub domain: String,
    pub initial_temperature: f64,
    pub tau_meas_min: f64,
    pub tau_sim_min: f64,
    pub rel_error_percent: f64,
}

impl TimeConstantRow {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.domain.clone(),
            self.initial_temperature.to_string(),
            format!("{:.4}", self.tau_meas_min),
            format!("{:.4}", self.tau_sim_min),
            format!("{:.3}", self.rel_error_percent),
        ]
    }
}

pub const TIME_CONSTANT_HEADER: [&str; 5] =
    ["domain", "initial_temperature_C", "tau_meas_min", "tau_sim_min", "rel_error_percent"];

/// Compares time constants of every group present in both `simulated`
/// and `measured` (matched by the group's measured id).
pub fn compare_time_constants(
    config: &RunConfig,
    simulated: &[TemperatureTrace],
    measured: &[TemperatureTrace],
) -> Result<Vec<TimeConstantRow>, Error> {
    let t_init = config.scenario.initial_temperature_C;
    let ambient = config.boundaries.ambient()?;
    let mut rows = Vec::new();
    for g in &config.probes.groups {
        let (Some(sim), Some(meas)) = (
            simulated.iter().find(|t| t.probe_id == g.name),
            measured.iter().find(|t| t.probe_id == g.measured_id()),
        ) else {
            continue;
        };
        let tau_sim = time_constant(sim, t_init, ambient).map_err(Error::core("analysis"))?.tau;
        let tau_meas = time_constant(meas, t_init, ambient).map_err(Error::core("analysis"))?.tau;
        let err = relative_error(tau_meas, tau_sim).map_err(Error::core("analysis"))?;
        rows.push(TimeConstantRow {
            domain: g.name.clone(),
            initial_temperature: t_init,
            tau_meas_min: tau_meas / 60.0,
            tau_sim_min: tau_sim / 60.0,
            rel_error_percent: 100.0 * err,
        });
    }
    if rows.is_empty() {
        return Err(Error::Config("no sensor group has both a simulated and a measured trace".into()));
    }
    Ok(rows)
}

/// Builds the calibration problem: configured parameters, groups with
/// measured traces and their weights.
pub fn calibration_problem<'a>(
    config: &RunConfig,
    mesh: &'a Mesh,
    measured: &[TemperatureTrace],
) -> Result<CalibrationProblem<'a>, Error> {
    let (materials, boundary) = materials_and_boundary(config)?;
    if config.calibration.parameters.is_empty() {
        return Err(Error::Config("calibration.parameters: nothing to fit".into()));
    }
    if config
        .calibration
        .parameters
        .iter()
        .any(|p| p.kind == ParameterKind::Robin && !boundary.robin.contains_key(&p.target))
    {
        return Err(Error::Config(
            "calibration.parameters: the Robin coefficient can only be fitted when boundaries.robin_coefficient_W_per_mC is positive".into(),
        ));
    }
    let groups: Vec<MeasuredGroup> = config
        .probes
        .groups
        .iter()
        .filter_map(|g| {
            measured.iter().find(|t| t.probe_id == g.measured_id()).map(|m| MeasuredGroup {
                name: g.name.clone(),
                probe_ids: g.members.clone(),
                measured: m.clone(),
                weight: config.calibration.weights.get(&g.name).copied().unwrap_or(1.0),
            })
        })
        .collect();
    if groups.is_empty() {
        return Err(Error::Config("no measured trace matches a sensor group".into()));
    }
    let problem = CalibrationProblem {
        mesh,
        materials,
        boundary,
        scenario: config.scenario_spec(&config.geometry.machine())?,
        parameters: config.calibration.parameters()?,
        groups,
    };
    problem.validate().map_err(Error::core("calibrate"))?;
    Ok(problem)
}

/// Start vector: configured initial values, otherwise the problem's tables.
pub fn initial_values(config: &RunConfig, problem: &CalibrationProblem) -> Result<Vec<f64>, Error> {
    let current = problem.current_values().map_err(Error::core("calibrate"))?;
    Ok(config
        .calibration
        .parameters
        .iter()
        .zip(current)
        .map(|(p, c)| p.initial.unwrap_or(c))
        .collect())
}

/// Log-space objective whose simplex batches are evaluated on the rayon pool.
pub struct ParallelObjective<'p, 'a> {
    pub inner: LogObjective<'p, 'a>,
}

impl Objective for ParallelObjective<'_, '_> {
    fn evaluate(&self, x: &[f64]) -> machtherm_core::Result<f64> {
        self.inner.evaluate(x)
    }

    fn evaluate_batch(&self, xs: &[Vec<f64>]) -> machtherm_core::Result<Vec<f64>> {
        xs.par_iter().map(|x| self.inner.evaluate(x)).collect()
    }
}

/// Fits the problem; results do not depend on the number of threads.
pub fn calibrate(config: &RunConfig, problem: &CalibrationProblem) -> Result<CalibrationResult, Error> {
    let initial = initial_values(config, problem)?;
    let objective = ParallelObjective {
        inner: LogObjective { problem },
    };
    let result =
        fit_with(problem, &objective, &initial, &config.calibration.options()).map_err(Error::core("calibrate"))?;
    if !result.converged {
        log::warn!(
            "calibrate: stopped after {} evaluations without meeting the tolerances",
            result.evaluations
        );
    }
    Ok(result)
}

pub const PARAMETER_HEADER: [&str; 4] = ["domain", "parameter", "value", "unit"];

/// Fitted values as `domain,parameter,value,unit` rows.
pub fn parameter_rows(problem: &CalibrationProblem, result: &CalibrationResult) -> Vec<Vec<String>> {
    use machtherm_core::calibrate::ParameterTarget;
    problem
        .parameters
        .iter()
        .zip(&result.params)
        .map(|(p, v)| match &p.target {
            ParameterTarget::EffectiveConductivity(r) => {
                vec![r.clone(), "lambda_eff".into(), v.to_string(), "W/(m*C)".into()]
            }
            ParameterTarget::RobinCoefficient(t) => vec![t.clone(), "h".into(), v.to_string(), "W/(m*C)".into()],
        })
        .collect()
}

pub const CONVERGENCE_HEADER: [&str; 6] = ["iteration", "evaluations", "step", "best_C2", "simplex_size", "spread_C2"];

pub fn convergence_rows(result: &CalibrationResult) -> Vec<Vec<String>> {
    result
        .history
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                r.evaluations.to_string(),
                format!("{:?}", r.step).to_lowercase(),
                format!("{:e}", r.best),
                format!("{:e}", r.simplex_size),
                format!("{:e}", r.spread),
            ]
        })
        .collect()
}
