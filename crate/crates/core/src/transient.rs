//! Theta-method time integration of scheduled scenarios.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::fem::{solve_steady, BoundarySpec, Discretization, Elimination, HeatBalance, SourceSpec};
use crate::materials::MaterialTable;
use crate::mesh::{locate_probe, names, Mesh, ProbeLocation, TagKind};
use crate::schedule::Schedule;
use crate::solver::{LinearSolver, PreparedSolver};
use crate::sparse::CsrMatrix;
use crate::{Error, Point, Result};

/// Samples of one probe (or sensor group) over time.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureTrace {
    pub probe_id: String,
    times: Vec<f64>,
    temperatures: Vec<f64>,
}

impl TemperatureTrace {
    pub fn new(probe_id: impl Into<String>, times: Vec<f64>, temperatures: Vec<f64>) -> Result<Self> {
        if times.len() != temperatures.len() {
            return Err(Error::InvalidTrace("times and temperatures differ in length".into()));
        }
        if times.is_empty() {
            return Err(Error::InvalidTrace("trace is empty".into()));
        }
        if times.iter().chain(&temperatures).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrace("trace contains non-finite samples".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTrace("sample times must be strictly increasing".into()));
        }
        Ok(Self {
            probe_id: probe_id.into(),
            times,
            temperatures,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation at `t`; `None` outside the sampled range.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let (ts, vs) = (&self.times, &self.temperatures);
        if t < ts[0] || t > ts[ts.len() - 1] {
            return None;
        }
        let k = ts.partition_point(|&s| s < t);
        if ts[k] == t {
            return Some(vs[k]);
        }
        let w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
        Some(vs[k - 1] + w * (vs[k] - vs[k - 1]))
    }
}

/// One theta-method step of `M dT/dt + K T = f` without constraints:
/// `(M/dt + theta K) T1 = (M/dt - (1 - theta) K) T0 + theta f1 + (1 - theta) f0`.
pub fn step_theta(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    f_n: &[f64],
    f_n1: &[f64],
    t_n: &[f64],
    dt: f64,
    theta: f64,
) -> Result<Vec<f64>> {
    let stepper = ThetaStepper::new(mass, stiffness, &[], dt, theta, LinearSolver::default())?;
    stepper.step(stiffness, f_n, f_n1, t_n, &[])
}

/// Theta stepper with a fixed set of Dirichlet nodes, reusing the solver
/// setup across steps.
///
/// Steps solve for the increment `d = T1 - T0`, so the solver tolerance
/// applies to the change over one step rather than to the whole field.
#[derive(Clone, Debug)]
pub struct ThetaStepper {
    system: CsrMatrix,
    mass: CsrMatrix,
    elim: Elimination,
    solver: Option<PreparedSolver>,
    dt: f64,
    theta: f64,
}

impl ThetaStepper {
    pub fn new(
        mass: &CsrMatrix,
        stiffness: &CsrMatrix,
        constrained: &[usize],
        dt: f64,
        theta: f64,
        solver: LinearSolver,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidScenario(alloc::format!("time step must be positive, got {dt}")));
        }
        if !(0.5..=1.0).contains(&theta) {
            return Err(Error::InvalidScenario(alloc::format!("theta must lie in [0.5, 1], got {theta}")));
        }
        let system = mass.linear_combination(1.0 / dt, stiffness, theta)?;
        let elim = Elimination::new(mass.dim(), constrained);
        let solver = if elim.free().is_empty() {
            None
        } else {
            Some(PreparedSolver::new(elim.reduce(&system), solver)?)
        };
        Ok(Self {
            system,
            mass: mass.clone(),
            elim,
            solver,
            dt,
            theta,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Advances `t_n` by one step; `dirichlet_next` holds the constrained
    /// values at the new time, in the stepper's constrained-node order.
    pub fn step(
        &self,
        stiffness: &CsrMatrix,
        f_n: &[f64],
        f_n1: &[f64],
        t_n: &[f64],
        dirichlet_next: &[f64],
    ) -> Result<Vec<f64>> {
        let n = t_n.len();
        let theta = self.theta;
        let kt = stiffness.mul_vec(t_n);
        let rhs: Vec<f64> = (0..n)
            .map(|i| theta * f_n1[i] + (1.0 - theta) * f_n[i] - kt[i])
            .collect();
        let jumps: Vec<f64> = self
            .elim
            .constrained()
            .iter()
            .zip(dirichlet_next)
            .map(|(&c, &g)| g - t_n[c])
            .collect();
        let mut next = t_n.to_vec();
        for (&c, &g) in self.elim.constrained().iter().zip(dirichlet_next) {
            next[c] = g;
        }
        if let Some(solver) = &self.solver {
            let reduced = self.elim.reduced_rhs(&self.system, &rhs, &jumps);
            let mut delta = vec![0.0; reduced.len()];
            solver.solve(&reduced, &mut delta)?;
            for (&i, d) in self.elim.free().iter().zip(delta) {
                next[i] += d;
            }
        }
        Ok(next)
    }

    /// Heat balance of the step `t_n -> t_n1`. `source_*` and `robin_*` are
    /// the two parts of the load at either end of the step.
    #[allow(clippy::too_many_arguments)]
    pub fn heat_balance(
        &self,
        stiffness: &CsrMatrix,
        robin: &CsrMatrix,
        source: (&[f64], &[f64]),
        robin_load: (&[f64], &[f64]),
        t_n: &[f64],
        t_n1: &[f64],
    ) -> HeatBalance {
        let theta = self.theta;
        let blend = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (1.0 - theta) * x + theta * y).collect() };
        let delta: Vec<f64> = t_n1.iter().zip(t_n).map(|(a, b)| a - b).collect();
        let t_theta = blend(t_n, t_n1);
        let s = blend(source.0, source.1);
        let r = blend(robin_load.0, robin_load.1);
        let m_delta = self.mass.mul_vec(&delta);
        let kt = stiffness.mul_vec(&t_theta);
        let rt = robin.mul_vec(&t_theta);
        let dirichlet = self
            .elim
            .constrained()
            .iter()
            .map(|&c| m_delta[c] / self.dt + kt[c] - s[c] - r[c])
            .sum();
        HeatBalance {
            storage: m_delta.iter().sum::<f64>() / self.dt,
            source: s.iter().sum(),
            robin: r.iter().zip(&rt).map(|(a, b)| a - b).sum(),
            dirichlet,
        }
    }
}

/// Joule heating from total machine power `power` (W): uniform density over
/// all conductor regions of the modelled fraction,
/// `q = P * fraction / (A_conductors * axial_length)`.
pub fn joule_source_from_power(power: &Schedule, mesh: &Mesh, axial_length: f64, fraction: f64) -> Result<SourceSpec> {
    if power.min_value() < 0.0 {
        return Err(Error::InvalidScenario("power must be nonnegative".into()));
    }
    if !(axial_length > 0.0 && axial_length.is_finite()) {
        return Err(Error::InvalidScenario("axial length must be positive".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidScenario("model fraction must lie in (0, 1]".into()));
    }
    let conductors: Vec<_> = names::CONDUCTORS
        .iter()
        .filter_map(|name| mesh.tags().require(name, TagKind::Region).ok().map(|id| (*name, id)))
        .collect();
    let area: f64 = conductors.iter().map(|&(_, id)| mesh.region_area(id)).sum();
    if !(area > 0.0) {
        return Err(Error::InvalidScenario("mesh has no conductor area to carry the Joule source".into()));
    }
    let density = power.scaled(fraction / (area * axial_length));
    let mut spec = SourceSpec::new();
    for (name, _) in conductors {
        spec.set(name, density.clone());
    }
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Uniform(f64),
    Field(Vec<f64>),
    /// Steady state under the loads and boundary values at `t = 0`.
    Steady,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub id: String,
    pub point: Point,
}

impl Probe {
    pub fn new(id: impl Into<String>, point: Point) -> Self {
        Self { id: id.into(), point }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub initial: InitialCondition,
    /// Total electrical power of the whole machine, converted to Joule heat
    /// in the conductors.
    pub power: Schedule,
    pub t_end: f64,
    pub dt: f64,
    pub theta: f64,
    pub probes: Vec<Probe>,
    /// Active length, m.
    pub axial_length: f64,
    pub model_fraction: f64,
    /// Keep a field snapshot every this many steps (and at `t = 0`).
    pub snapshot_every: Option<usize>,
    pub solver: LinearSolver,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            initial: InitialCondition::Uniform(26.0),
            power: Schedule::constant(0.0),
            t_end: 3600.0,
            dt: 1.0,
            theta: 1.0,
            probes: Vec::new(),
            axial_length: DEFAULT_AXIAL_LENGTH_M,
            model_fraction: 0.25,
            snapshot_every: None,
            solver: LinearSolver::default(),
        }
    }
}

/// Default active length of the machine, m. Not published; a plausible value
/// for a 3.7 kW frame.
pub const DEFAULT_AXIAL_LENGTH_M: f64 = 0.125;

impl ScenarioSpec {
    pub fn step_count(&self) -> usize {
        num_traits::Float::floor(self.t_end / self.dt + 1e-9) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidScenario("time step must be positive".into()));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(Error::InvalidScenario("end time must be at least one time step".into()));
        }
        if !(self.axial_length > 0.0 && self.axial_length.is_finite()) {
            return Err(Error::InvalidScenario("axial length must be positive".into()));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::InvalidScenario("theta must lie in [0.5, 1]".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::InvalidScenario("snapshot interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub traces: Vec<TemperatureTrace>,
    pub snapshots: Vec<Snapshot>,
    /// Heat balance of every step.
    pub balances: Vec<HeatBalance>,
    pub final_field: Vec<f64>,
}

impl ScenarioResult {
    pub fn trace(&self, probe_id: &str) -> Option<&TemperatureTrace> {
        self.traces.iter().find(|t| t.probe_id == probe_id)
    }

    pub fn worst_balance(&self) -> f64 {
        self.balances
            .iter()
            .map(HeatBalance::relative_residual)
            .fold(0.0, f64::max)
    }
}

/// Integrates `scenario` from `t = 0` to `t_end`, sampling every probe at
/// every step.
pub fn run_scenario(
    mesh: &Mesh,
    materials: &MaterialTable,
    boundary: &BoundarySpec,
    scenario: &ScenarioSpec,
) -> Result<ScenarioResult> {
    scenario.validate()?;
    let sources = if scenario.power.is_constant() && scenario.power.value(0.0) == 0.0 {
        SourceSpec::new()
    } else {
        joule_source_from_power(&scenario.power, mesh, scenario.axial_length, scenario.model_fraction)?
    };
    let disc = Discretization::new(mesh, materials, boundary, &sources)?;
    if disc.constrained_nodes().is_empty() && !disc.has_robin() && !sources.is_zero() {
        log::warn!("no heat can leave the domain; temperatures will grow without bound");
    }
    let probes: Vec<ProbeLocation> = scenario
        .probes
        .iter()
        .map(|p| locate_probe(mesh, p.point))
        .collect::<Result<_>>()?;

    let mut field = match &scenario.initial {
        InitialCondition::Uniform(v) => vec![*v; mesh.node_count()],
        InitialCondition::Field(values) => {
            if values.len() != mesh.node_count() || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidScenario("initial field does not match the mesh".into()));
            }
            values.clone()
        }
        InitialCondition::Steady => solve_steady(&disc.system_at(0.0)?, scenario.solver)?,
    };
    // The initial field is reported as given; Dirichlet values enter with the
    // first step, so a jacket step acts as an instantaneous change.
    let stepper = ThetaStepper::new(
        &disc.mass,
        &disc.stiffness,
        disc.constrained_nodes(),
        scenario.dt,
        scenario.theta,
        scenario.solver,
    )?;

    let steps = scenario.step_count();
    let mut times = Vec::with_capacity(steps + 1);
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); probes.len()];
    let mut snapshots = Vec::new();
    let mut balances = Vec::with_capacity(steps);
    let record = |field: &[f64], samples: &mut Vec<Vec<f64>>| {
        for (s, p) in samples.iter_mut().zip(&probes) {
            s.push(p.interpolate(mesh, field));
        }
    };
    times.push(0.0);
    record(&field, &mut samples);
    if scenario.snapshot_every.is_some() {
        snapshots.push(Snapshot {
            time: 0.0,
            values: field.clone(),
        });
    }

    let mut source_n = disc.source_load(0.0);
    let mut robin_n = disc.robin_load(0.0);
    for k in 1..=steps {
        let t = k as f64 * scenario.dt;
        let source_n1 = disc.source_load(t);
        let robin_n1 = disc.robin_load(t);
        let f_n: Vec<f64> = source_n.iter().zip(&robin_n).map(|(a, b)| a + b).collect();
        let f_n1: Vec<f64> = source_n1.iter().zip(&robin_n1).map(|(a, b)| a + b).collect();
        let next = stepper.step(&disc.stiffness, &f_n, &f_n1, &field, &disc.dirichlet_values(t)?)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem(alloc::format!("non-finite temperature at t = {t} s")));
        }
        balances.push(stepper.heat_balance(
            &disc.stiffness,
            &disc.robin,
            (&source_n, &source_n1),
            (&robin_n, &robin_n1),
            &field,
            &next,
        ));
        field = next;
        source_n = source_n1;
        robin_n = robin_n1;
        times.push(t);
        record(&field, &mut samples);
        if let Some(every) = scenario.snapshot_every {
            if k % every == 0 {
                snapshots.push(Snapshot {
                    time: t,
                    values: field.clone(),
                });
            }
        }
    }

    let traces = scenario
        .probes
        .iter()
        .zip(samples)
        .map(|(p, s)| TemperatureTrace::new(p.id.clone(), times.clone(), s))
        .collect::<Result<_>>()?;
    Ok(ScenarioResult {
        traces,
        snapshots,
        balances,
        final_field: field,
    })
}
