//! Run configuration: one TOML document, validated before any computation.
//!
//! Every physical quantity carries its unit in the key name. Unknown keys
//! are rejected. Omitted keys take the defaults below, which describe the
//! invented reference machine and a 93 °C cooldown.
//!
//! ```toml
//! [geometry]
//! resolution_level = 1
//! stator_outer_radius_m = 0.0775
//!
//! [materials]
//! base = "fitted"                     # or "literature"
//! [materials.regions.stator_yoke]
//! effective_conductivity_W_per_mC = 24.0
//!
//! [boundaries]
//! jacket_temperature_C = 26.0
//! robin_coefficient_W_per_mC = 0.235
//!
//! [scenario]
//! initial_temperature_C = 93.0
//! t_end_s = 3600.0
//! dt_s = 1.0
//!
//! [[probes.points]]
//! id = "upper"
//! preset = "upper_layer"
//!
//! [[probes.groups]]
//! name = "slot"
//! members = ["upper", "lower"]
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use machtherm_core::calibrate::{CalibrationParameter, NelderMeadOptions};
use machtherm_core::fem::{BoundarySpec, RobinEntry, RobinPlacement};
use machtherm_core::materials::{fitted_defaults, literature_defaults, Conductivity, MaterialTable, Provenance};
use machtherm_core::mesh::{names, MachineGeometry};
use machtherm_core::schedule::Schedule;
use machtherm_core::solver::{LinearSolver, DEFAULT_CG_TOLERANCE};
use machtherm_core::transient::{InitialCondition, Probe, ScenarioSpec, DEFAULT_AXIAL_LENGTH_M};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Error;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub materials: MaterialsConfig,
    pub boundaries: BoundariesConfig,
    pub scenario: ScenarioConfig,
    pub probes: ProbesConfig,
    pub calibration: CalibrationConfig,
    pub output: OutputConfig,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Read this MSH file instead of meshing the parametric machine.
    pub mesh_file: Option<PathBuf>,
    pub resolution_level: usize,
    pub shaft_radius_m: f64,
    pub rotor_yoke_outer_radius_m: f64,
    pub air_gap_thickness_m: f64,
    pub stator_inner_radius_m: f64,
    pub stator_outer_radius_m: f64,
    pub slot_count: usize,
    pub slot_width_m: f64,
    pub slot_depth_m: f64,
    pub slot_bore_offset_m: f64,
    pub slot_liner_thickness_m: f64,
    pub layer_separator_thickness_m: f64,
    pub conductors_per_slot: usize,
    pub conductor_radius_m: f64,
    pub cage_bar_count: usize,
    pub cage_bar_radius_m: f64,
    pub cage_bar_depth_m: f64,
    pub model_fraction: f64,
    pub element_size_m: f64,
    pub conductor_segments: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = MachineGeometry::default();
        Self {
            mesh_file: None,
            resolution_level: 1,
            shaft_radius_m: g.shaft_radius,
            rotor_yoke_outer_radius_m: g.rotor_yoke_outer_radius,
            air_gap_thickness_m: g.air_gap_thickness,
            stator_inner_radius_m: g.stator_inner_radius,
            stator_outer_radius_m: g.stator_outer_radius,
            slot_count: g.slot_count,
            slot_width_m: g.slot_width,
            slot_depth_m: g.slot_depth,
            slot_bore_offset_m: g.slot_bore_offset,
            slot_liner_thickness_m: g.slot_liner_thickness,
            layer_separator_thickness_m: g.layer_separator_thickness,
            conductors_per_slot: g.conductors_per_slot,
            conductor_radius_m: g.conductor_radius,
            cage_bar_count: g.cage_bar_count,
            cage_bar_radius_m: g.cage_bar_radius,
            cage_bar_depth_m: g.cage_bar_depth,
            model_fraction: g.model_fraction,
            element_size_m: g.element_size,
            conductor_segments: g.conductor_segments,
        }
    }
}

impl GeometryConfig {
    pub fn machine(&self) -> MachineGeometry {
        MachineGeometry {
            shaft_radius: self.shaft_radius_m,
            rotor_yoke_outer_radius: self.rotor_yoke_outer_radius_m,
            air_gap_thickness: self.air_gap_thickness_m,
            stator_inner_radius: self.stator_inner_radius_m,
            stator_outer_radius: self.stator_outer_radius_m,
            slot_count: self.slot_count,
            slot_width: self.slot_width_m,
            slot_depth: self.slot_depth_m,
            slot_bore_offset: self.slot_bore_offset_m,
            slot_liner_thickness: self.slot_liner_thickness_m,
            layer_separator_thickness: self.layer_separator_thickness_m,
            conductors_per_slot: self.conductors_per_slot,
            conductor_radius: self.conductor_radius_m,
            cage_bar_count: self.cage_bar_count,
            cage_bar_radius: self.cage_bar_radius_m,
            cage_bar_depth: self.cage_bar_depth_m,
            model_fraction: self.model_fraction,
            element_size: self.element_size_m,
            conductor_segments: self.conductor_segments,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialBase {
    Literature,
    #[default]
    Fitted,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialsConfig {
    pub base: MaterialBase,
    /// Per-region overrides of the base table.
    pub regions: BTreeMap<String, RegionOverride>,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionOverride {
    pub heat_capacity_J_per_m3C: Option<f64>,
    pub conductivity_W_per_mC: Option<f64>,
    pub radial_conductivity_W_per_mC: Option<f64>,
    pub tangential_conductivity_W_per_mC: Option<f64>,
    pub effective_conductivity_W_per_mC: Option<f64>,
}

impl MaterialsConfig {
    pub fn table(&self) -> Result<MaterialTable, Error> {
        let mut table = match self.base {
            MaterialBase::Literature => literature_defaults(),
            MaterialBase::Fitted => fitted_defaults(),
        };
        for (region, o) in &self.regions {
            let entry = table
                .get(region)
                .ok_or_else(|| Error::Config(format!("materials.regions: unknown region `{region}`")))?;
            let mut m = entry.material;
            if let Some(c) = o.heat_capacity_J_per_m3C {
                m.heat_capacity = c;
            }
            match (o.conductivity_W_per_mC, o.radial_conductivity_W_per_mC, o.tangential_conductivity_W_per_mC) {
                (None, None, None) => {}
                (Some(k), None, None) => m.conductivity = Conductivity::Isotropic(k),
                (None, Some(radial), Some(tangential)) => m.conductivity = Conductivity::Polar { radial, tangential },
                _ => {
                    return Err(Error::Config(format!(
                        "materials.regions.{region}: give either conductivity_W_per_mC or both radial and tangential conductivities"
                    )))
                }
            }
            if o.effective_conductivity_W_per_mC.is_some() {
                m.effective_conductivity = o.effective_conductivity_W_per_mC;
            }
            table
                .insert(region, m, Provenance::User)
                .map_err(|e| Error::Config(format!("materials.regions.{region}: {e}")))?;
        }
        Ok(table)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Edge integral on the shaft-surface circle.
    #[default]
    Edges,
    /// Volumetric sink spread over the shaft region.
    Volume,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperaturePoint {
    pub time_s: f64,
    pub temperature_C: f64,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundariesConfig {
    pub jacket_temperature_C: f64,
    /// Piecewise-linear jacket temperature; overrides the constant.
    pub jacket_schedule: Option<Vec<TemperaturePoint>>,
    /// Zero disables the shaft Robin term.
    pub robin_coefficient_W_per_mC: f64,
    /// Defaults to the jacket temperature.
    pub robin_reference_C: Option<f64>,
    pub robin_placement: Placement,
}

impl Default for BoundariesConfig {
    fn default() -> Self {
        Self {
            jacket_temperature_C: 26.0,
            jacket_schedule: None,
            robin_coefficient_W_per_mC: machtherm_core::materials::FITTED_ROBIN_COEFFICIENT,
            robin_reference_C: None,
            robin_placement: Placement::Edges,
        }
    }
}

impl BoundariesConfig {
    pub fn jacket(&self) -> Result<Schedule, Error> {
        match &self.jacket_schedule {
            None => Ok(Schedule::constant(self.jacket_temperature_C)),
            Some(points) => Schedule::new(points.iter().map(|p| (p.time_s, p.temperature_C)).collect())
                .map_err(|e| Error::Config(format!("boundaries.jacket_schedule: {e}"))),
        }
    }

    /// Ambient temperature used for time constants: the final jacket value.
    pub fn ambient(&self) -> Result<f64, Error> {
        let s = self.jacket()?;
        Ok(s.points().last().map(|p| p.1).unwrap_or(self.jacket_temperature_C))
    }

    pub fn spec(&self) -> Result<BoundarySpec, Error> {
        let mut spec = BoundarySpec::new()
            .with_dirichlet(names::JACKET, self.jacket()?)
            .with_adiabatic(names::SYMMETRY_CUT);
        if self.robin_coefficient_W_per_mC < 0.0 {
            return Err(Error::Config("boundaries.robin_coefficient_W_per_mC must be nonnegative".into()));
        }
        if self.robin_coefficient_W_per_mC > 0.0 {
            let reference = Schedule::constant(self.robin_reference_C.unwrap_or(self.jacket_temperature_C));
            let placement = match self.robin_placement {
                Placement::Edges => RobinPlacement::Edges,
                Placement::Volume => RobinPlacement::Volume {
                    region: names::SHAFT.into(),
                },
            };
            spec = spec.with_robin(
                names::SHAFT_SURFACE,
                RobinEntry {
                    coefficient: self.robin_coefficient_W_per_mC,
                    reference,
                    placement,
                },
            );
        } else {
            spec = spec.with_adiabatic(names::SHAFT_SURFACE);
        }
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    #[default]
    Uniform,
    /// Steady state of the scenario's loads at t = 0.
    Steady,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Cg,
    Cholesky,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerPoint {
    pub time_s: f64,
    pub power_W: f64,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub initial: InitialKind,
    pub initial_temperature_C: f64,
    /// Joule power of the whole machine.
    pub power_W: f64,
    /// Piecewise-linear power; overrides the constant.
    pub power_schedule: Option<Vec<PowerPoint>>,
    pub t_end_s: f64,
    pub dt_s: f64,
    pub theta: f64,
    pub axial_length_m: f64,
    pub solver: SolverKind,
    pub cg_tolerance: f64,
    /// Write a field snapshot every this many steps.
    pub snapshot_every_steps: Option<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            initial: InitialKind::Uniform,
            initial_temperature_C: 93.0,
            power_W: 0.0,
            power_schedule: None,
            t_end_s: 3600.0,
            dt_s: 1.0,
            theta: 1.0,
            axial_length_m: DEFAULT_AXIAL_LENGTH_M,
            solver: SolverKind::Cg,
            cg_tolerance: DEFAULT_CG_TOLERANCE,
            snapshot_every_steps: None,
        }
    }
}

impl ScenarioConfig {
    pub fn solver(&self) -> LinearSolver {
        match self.solver {
            SolverKind::Cg => LinearSolver::ConjugateGradient {
                tolerance: self.cg_tolerance,
                max_iterations: 20_000,
            },
            SolverKind::Cholesky => LinearSolver::Cholesky,
        }
    }

    pub fn power(&self) -> Result<Schedule, Error> {
        match &self.power_schedule {
            None => Ok(Schedule::constant(self.power_W)),
            Some(points) => Schedule::new(points.iter().map(|p| (p.time_s, p.power_W)).collect())
                .map_err(|e| Error::Config(format!("scenario.power_schedule: {e}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbePreset {
    UpperLayer,
    LowerLayer,
    StatorYoke,
    RotorSurface,
    RotorYoke,
    Shaft,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbePoint {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<ProbePreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_m: Option<f64>,
}

/// Probes averaged into one measured sensor group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeGroup {
    pub name: String,
    pub members: Vec<String>,
    /// Probe id of this group in measured CSV files; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_id: Option<String>,
}

impl ProbeGroup {
    pub fn measured_id(&self) -> &str {
        self.measured_id.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbesConfig {
    pub points: Vec<ProbePoint>,
    pub groups: Vec<ProbeGroup>,
}

fn preset(id: &str, p: ProbePreset) -> ProbePoint {
    ProbePoint {
        id: id.into(),
        preset: Some(p),
        x_m: None,
        y_m: None,
    }
}

impl Default for ProbesConfig {
    fn default() -> Self {
        let group = |name: &str, members: &[&str]| ProbeGroup {
            name: name.into(),
            members: members.iter().map(|s| s.to_string()).collect(),
            measured_id: None,
        };
        Self {
            points: vec![
                preset("upper_layer", ProbePreset::UpperLayer),
                preset("lower_layer", ProbePreset::LowerLayer),
                preset("stator_yoke", ProbePreset::StatorYoke),
                preset("rotor_surface", ProbePreset::RotorSurface),
                preset("rotor_yoke", ProbePreset::RotorYoke),
                preset("shaft", ProbePreset::Shaft),
            ],
            groups: vec![
                group("slot", &["upper_layer", "lower_layer"]),
                group("stator_yoke", &["stator_yoke"]),
                group("rotor", &["rotor_surface"]),
            ],
        }
    }
}

impl ProbesConfig {
    pub fn probes(&self, geometry: &MachineGeometry) -> Result<Vec<Probe>, Error> {
        let mut seen = std::collections::BTreeSet::new();
        self.points
            .iter()
            .map(|p| {
                if !seen.insert(p.id.as_str()) {
                    return Err(Error::Config(format!("probes.points: id `{}` appears twice", p.id)));
                }
                let point = match (p.preset, p.x_m, p.y_m) {
                    (Some(preset), None, None) => match preset {
                        ProbePreset::UpperLayer => geometry.upper_layer_probe(),
                        ProbePreset::LowerLayer => geometry.lower_layer_probe(),
                        ProbePreset::StatorYoke => geometry.stator_yoke_probe(),
                        ProbePreset::RotorSurface => geometry.rotor_surface_probe(),
                        ProbePreset::RotorYoke => geometry.rotor_yoke_probe(),
                        ProbePreset::Shaft => geometry.shaft_probe(),
                    },
                    (None, Some(x), Some(y)) => [x, y],
                    _ => {
                        return Err(Error::Config(format!(
                            "probes.points `{}`: give either a preset or both x_m and y_m",
                            p.id
                        )))
                    }
                };
                Ok(Probe::new(p.id.clone(), point))
            })
            .collect()
    }

    pub fn validate_groups(&self) -> Result<(), Error> {
        let mut names = std::collections::BTreeSet::new();
        for g in &self.groups {
            if !names.insert(g.name.as_str()) {
                return Err(Error::Config(format!("probes.groups: `{}` appears twice", g.name)));
            }
            if g.members.is_empty() {
                return Err(Error::Config(format!("probes.groups `{}` has no members", g.name)));
            }
            for m in &g.members {
                if !self.points.iter().any(|p| &p.id == m) {
                    return Err(Error::Config(format!("probes.groups `{}`: unknown probe `{m}`", g.name)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterKind {
    Conductivity,
    Robin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterConfig {
    pub kind: ParameterKind,
    /// Region name for conductivities, boundary tag for the Robin term.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    /// Start value; defaults to the value in the material table or boundaries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<f64>,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    /// Measured traces (`time_s,probe_id,temperature_C`).
    pub measured_csv: Option<PathBuf>,
    pub parameters: Vec<ParameterConfig>,
    /// Misfit weight per group name; missing groups weigh 1.
    pub weights: BTreeMap<String, f64>,
    pub max_evaluations: usize,
    pub x_tolerance: f64,
    pub f_tolerance_C2: f64,
    /// Stop once the misfit reaches this.
    pub target_misfit_C2: f64,
    pub initial_step: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let nm = NelderMeadOptions::default();
        let param = |kind, target: &str| ParameterConfig {
            kind,
            target: target.into(),
            lower: None,
            upper: None,
            initial: None,
        };
        Self {
            measured_csv: None,
            parameters: vec![
                param(ParameterKind::Conductivity, names::STATOR_YOKE),
                param(ParameterKind::Conductivity, names::ROTOR_YOKE),
                param(ParameterKind::Conductivity, names::AIR_GAP),
                param(ParameterKind::Robin, names::SHAFT_SURFACE),
            ],
            weights: BTreeMap::new(),
            max_evaluations: nm.max_evaluations,
            x_tolerance: nm.x_tolerance,
            f_tolerance_C2: nm.f_tolerance,
            target_misfit_C2: nm.target,
            initial_step: nm.initial_step,
            max_restarts: nm.max_restarts,
            seed: nm.seed,
        }
    }
}

impl CalibrationConfig {
    pub fn options(&self) -> NelderMeadOptions {
        NelderMeadOptions {
            max_evaluations: self.max_evaluations,
            x_tolerance: self.x_tolerance,
            f_tolerance: self.f_tolerance_C2,
            target: self.target_misfit_C2,
            initial_step: self.initial_step,
            max_restarts: self.max_restarts,
            seed: self.seed,
            ..NelderMeadOptions::default()
        }
    }

    /// Parameters with bounds resolved against the literature table.
    pub fn parameters(&self) -> Result<Vec<CalibrationParameter>, Error> {
        let literature = literature_defaults();
        self.parameters
            .iter()
            .map(|p| {
                let mut param = match p.kind {
                    ParameterKind::Conductivity => {
                        let entry = literature.get(&p.target).ok_or_else(|| {
                            Error::Config(format!("calibration.parameters: unknown region `{}`", p.target))
                        })?;
                        let reference = match entry.material.active_conductivity() {
                            Conductivity::Isotropic(k) => k,
                            Conductivity::Polar { radial, tangential } => (radial * tangential).sqrt(),
                        };
                        CalibrationParameter::conductivity(&p.target, reference)
                    }
                    ParameterKind::Robin => CalibrationParameter::robin(&p.target),
                };
                if let Some(l) = p.lower {
                    param.lower = l;
                }
                if let Some(u) = p.upper {
                    param.upper = u;
                }
                Ok(param)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write snapshots as legacy VTK files next to the CSV.
    pub vtk: bool,
    /// Write the mesh used by `simulate` and `calibrate`.
    pub mesh: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { vtk: true, mesh: false }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Checks that do not need a mesh.
    pub fn validate(&self) -> Result<(), Error> {
        if self.geometry.resolution_level == 0 {
            return Err(Error::Config("geometry.resolution_level must be at least 1".into()));
        }
        self.materials.table()?;
        self.boundaries.spec()?;
        self.scenario.power()?;
        self.probes.probes(&self.geometry.machine())?;
        self.probes.validate_groups()?;
        for (g, w) in &self.calibration.weights {
            if !self.probes.groups.iter().any(|x| &x.name == g) {
                return Err(Error::Config(format!("calibration.weights: unknown group `{g}`")));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Config(format!("calibration.weights.{g} must be nonnegative")));
            }
        }
        self.calibration.parameters()?;
        self.scenario_spec(&self.geometry.machine())?
            .validate()
            .map_err(|e| Error::Config(format!("scenario: {e}")))?;
        Ok(())
    }

    pub fn scenario_spec(&self, geometry: &MachineGeometry) -> Result<ScenarioSpec, Error> {
        let s = &self.scenario;
        Ok(ScenarioSpec {
            initial: match s.initial {
                InitialKind::Uniform => InitialCondition::Uniform(s.initial_temperature_C),
                InitialKind::Steady => InitialCondition::Steady,
            },
            power: s.power()?,
            t_end: s.t_end_s,
            dt: s.dt_s,
            theta: s.theta,
            probes: self.probes.probes(geometry)?,
            axial_length: s.axial_length_m,
            model_fraction: geometry.model_fraction,
            snapshot_every: s.snapshot_every_steps,
            solver: s.solver(),
        })
    }

    /// Canonical TOML of the fully defaulted configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of [`canonical`](Self::canonical): formatting, key order and
    /// spelled-out defaults do not change it.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::from_toml("[scenario]\nt_end = 10.0\n").unwrap_err();
        assert!(e.to_string().contains("t_end"), "{e}");
        assert!(RunConfig::from_toml("[nonsense]\n").is_err());
    }

    #[test]
    fn hash_ignores_formatting_and_defaults() {
        let a = RunConfig::from_toml("[scenario]\ndt_s = 1.0\n").unwrap();
        let b = RunConfig::from_toml("# comment\n[scenario]\n  dt_s=1\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::from_toml("[scenario]\ndt_s = 2.0\n").unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn canonical_form_parses_back() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.canonical()).unwrap(), c);
    }

    #[test]
    fn probe_needs_preset_or_coordinates() {
        let text = "[[probes.points]]\nid = \"p\"\nx_m = 0.01\n";
        assert!(RunConfig::from_toml(text).is_err());
    }

    #[test]
    fn group_members_must_exist() {
        let text = "[[probes.points]]\nid = \"p\"\npreset = \"shaft\"\n[[probes.groups]]\nname = \"g\"\nmembers = [\"q\"]\n";
        let e = RunConfig::from_toml(text).unwrap_err();
        assert!(e.to_string().contains("unknown probe"), "{e}");
    }
}
