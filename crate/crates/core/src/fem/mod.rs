//! Linear-triangle discretization of the heat equation
//! `c_v dT/dt - div(L grad T) = q` with Dirichlet, adiabatic and Robin
//! boundaries, and steady-state solves.
//!
//! Dirichlet conditions are enforced by symmetric elimination: constrained
//! unknowns leave the solve and their coupling moves to the right-hand side.

mod assembly;
mod boundary;

use alloc::vec;
use alloc::vec::Vec;

pub use assembly::{
    assemble_load, assemble_mass, assemble_stiffness, element_mass, element_stiffness, unit_region_load, SourceSpec,
};
pub use boundary::{
    assemble_robin, BoundarySpec, Discretization, Elimination, LinearSystem, RobinEntry, RobinPlacement,
};

use crate::mesh::{Mesh, ProbeLocation};
use crate::solver::{LinearSolver, PreparedSolver};
use crate::{Error, Result};

/// Nodal temperatures, °C.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureField {
    values: Vec<f64>,
}

impl TemperatureField {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::InvalidArgument(alloc::format!(
                "field has {} values for {} nodes",
                values.len(),
                mesh.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field contains non-finite values".into()));
        }
        Ok(Self { values })
    }

    pub fn uniform(mesh: &Mesh, value: f64) -> Self {
        Self {
            values: vec![value; mesh.node_count()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, mesh: &Mesh, probe: &ProbeLocation) -> f64 {
        probe.interpolate(mesh, &self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Heat flows into the domain over one step or at steady state, W per meter
/// of depth. `storage` should equal the sum of the other three.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HeatBalance {
    pub storage: f64,
    pub source: f64,
    pub robin: f64,
    pub dirichlet: f64,
}

impl HeatBalance {
    pub fn residual(&self) -> f64 {
        self.storage - (self.source + self.robin + self.dirichlet)
    }

    /// Residual relative to the largest term (zero when all terms vanish).
    pub fn relative_residual(&self) -> f64 {
        let scale = [self.storage, self.source, self.robin, self.dirichlet]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            0.0
        } else {
            self.residual().abs() / scale
        }
    }
}

/// Solves `K T = f` under the system's constraints.
pub fn solve_steady(system: &LinearSystem, solver: LinearSolver) -> Result<Vec<f64>> {
    if system.constraints.is_empty() && !system.has_robin {
        return Err(Error::SingularSystem(
            "no Dirichlet or Robin condition; temperature is undetermined".into(),
        ));
    }
    let n = system.dim();
    let constrained: Vec<usize> = system.constraints.keys().copied().collect();
    let values: Vec<f64> = system.constraints.values().copied().collect();
    let elim = Elimination::new(n, &constrained);
    let mut t = vec![0.0; n];
    for (&c, &v) in constrained.iter().zip(&values) {
        t[c] = v;
    }
    if elim.free().is_empty() {
        return Ok(t);
    }
    let rhs = elim.reduced_rhs(&system.stiffness, &system.load, &values);
    let reduced = elim.reduce(&system.stiffness);
    let guess = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    let mut x = vec![guess; reduced.dim()];
    PreparedSolver::new(reduced, solver)?.solve(&rhs, &mut x)?;
    elim.scatter(&x, &mut t);
    Ok(t)
}

/// Steady heat balance of `system` at the field `t`.
pub fn steady_heat_balance(system: &LinearSystem, t: &[f64]) -> HeatBalance {
    let kt = system.stiffness.mul_vec(t);
    let rt = system.robin_stiffness.mul_vec(t);
    let robin: f64 = system.robin_load.iter().zip(&rt).map(|(f, k)| f - k).sum();
    let source: f64 = system.load.iter().zip(&system.robin_load).map(|(f, r)| f - r).sum();
    let dirichlet: f64 = system.constraints.keys().map(|&c| kt[c] - system.load[c]).sum();
    HeatBalance {
        storage: 0.0,
        source,
        robin,
        dirichlet,
    }
}
