use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::assembly::{assemble_mass, assemble_stiffness, element_mass, unit_region_load, SourceSpec};
use crate::materials::MaterialTable;
use crate::mesh::{Mesh, TagKind};
use crate::schedule::Schedule;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Where a Robin condition acts.
#[derive(Clone, Debug, PartialEq)]
pub enum RobinPlacement {
    /// Edge integrals over the tagged edge set (boundary or interior).
    Edges,
    /// Equivalent volumetric sink over `region`: the edge conductance
    /// `h * |edges|` is spread uniformly over the region area.
    Volume { region: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobinEntry {
    /// Heat-transfer coefficient, W/°C/m (per edge length and unit depth).
    pub coefficient: f64,
    pub reference: Schedule,
    pub placement: RobinPlacement,
}

impl RobinEntry {
    pub fn on_edges(coefficient: f64, reference: Schedule) -> Self {
        Self {
            coefficient,
            reference,
            placement: RobinPlacement::Edges,
        }
    }
}

/// Boundary conditions by tag name. Tags not listed anywhere are treated as
/// adiabatic, with a warning.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundarySpec {
    pub dirichlet: BTreeMap<String, Schedule>,
    pub adiabatic: BTreeSet<String>,
    pub robin: BTreeMap<String, RobinEntry>,
}

impl BoundarySpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dirichlet(mut self, tag: &str, value: Schedule) -> Self {
        self.dirichlet.insert(tag.to_string(), value);
        self
    }

    pub fn with_adiabatic(mut self, tag: &str) -> Self {
        self.adiabatic.insert(tag.to_string());
        self
    }

    pub fn with_robin(mut self, tag: &str, entry: RobinEntry) -> Self {
        self.robin.insert(tag.to_string(), entry);
        self
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let mut seen = BTreeSet::new();
        let names = self
            .dirichlet
            .keys()
            .chain(self.adiabatic.iter())
            .chain(self.robin.keys());
        for name in names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidBoundary(alloc::format!(
                    "tag `{name}` appears in more than one category"
                )));
            }
            mesh.tags().require(name, TagKind::Boundary)?;
        }
        for (name, entry) in &self.robin {
            if !(entry.coefficient.is_finite() && entry.coefficient > 0.0) {
                return Err(Error::InvalidBoundary(alloc::format!(
                    "Robin coefficient on `{name}` must be positive, got {}",
                    entry.coefficient
                )));
            }
            if let RobinPlacement::Volume { region } = &entry.placement {
                mesh.tags().require(region, TagKind::Region)?;
            }
        }
        for tag in mesh.tags().iter() {
            if tag.kind == TagKind::Boundary && !seen.contains(tag.name.as_str()) {
                log::warn!("boundary `{}` has no condition; treating it as adiabatic", tag.name);
            }
        }
        Ok(())
    }
}

/// Robin contribution `(K_add, f_add)` of `entry` on the edge set `tag` at
/// time `t`.
pub fn assemble_robin(mesh: &Mesh, tag: &str, entry: &RobinEntry, t: f64) -> Result<(CsrMatrix, Vec<f64>)> {
    let (k, unit) = robin_parts(mesh, tag, entry)?;
    let t_ref = entry.reference.value(t);
    Ok((k, unit.iter().map(|u| u * t_ref).collect()))
}

/// Robin matrix and the load produced by a unit reference temperature.
fn robin_parts(mesh: &Mesh, tag: &str, entry: &RobinEntry) -> Result<(CsrMatrix, Vec<f64>)> {
    let h = entry.coefficient;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidBoundary(alloc::format!("Robin coefficient must be positive, got {h}")));
    }
    let id = mesh.tags().require(tag, TagKind::Boundary)?;
    let mut k = CsrMatrix::from_mesh_pattern(mesh);
    let mut f = vec![0.0; mesh.node_count()];
    match &entry.placement {
        RobinPlacement::Edges => {
            for edge in mesh.edges_with_tag(id) {
                let hl = h * mesh.edge_length(edge);
                k.add_block(&edge, &[[hl / 3.0, hl / 6.0], [hl / 6.0, hl / 3.0]]);
                f[edge[0]] += hl / 2.0;
                f[edge[1]] += hl / 2.0;
            }
        }
        RobinPlacement::Volume { region } => {
            let length: f64 = mesh.edges_with_tag(id).map(|e| mesh.edge_length(e)).sum();
            let rid = mesh.tags().require(region, TagKind::Region)?;
            let area = mesh.region_area(rid);
            if !(area > 0.0) {
                return Err(Error::InvalidBoundary(alloc::format!("region `{region}` is empty")));
            }
            let hv = h * length / area;
            for e in 0..mesh.element_count() {
                if mesh.element_region()[e] == rid {
                    k.add_block(&mesh.elements()[e], &element_mass(mesh.element_area(e), hv));
                }
            }
            for (fi, ui) in f.iter_mut().zip(unit_region_load(mesh, region)?) {
                *fi = hv * ui;
            }
        }
    }
    Ok((k, f))
}

/// Assembled operators with constraints at one instant.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    /// Conduction plus Robin terms.
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Source plus Robin load.
    pub load: Vec<f64>,
    pub constraints: BTreeMap<usize, f64>,
    /// Robin part of `stiffness` and `load`, kept for heat balances.
    pub robin_stiffness: CsrMatrix,
    pub robin_load: Vec<f64>,
    pub has_robin: bool,
}

impl LinearSystem {
    pub fn assemble(
        mesh: &Mesh,
        materials: &MaterialTable,
        boundary: &BoundarySpec,
        sources: &SourceSpec,
        t: f64,
    ) -> Result<Self> {
        Discretization::new(mesh, materials, boundary, sources)?.system_at(t)
    }

    /// Constrains every node on boundary `tag` to `value`.
    pub fn apply_dirichlet(&mut self, mesh: &Mesh, tag: &str, value: f64) -> Result<()> {
        let id = mesh.tags().require(tag, TagKind::Boundary)?;
        for node in mesh.nodes_with_tag(id) {
            self.constrain(node, value)?;
        }
        Ok(())
    }

    pub fn constrain(&mut self, node: usize, value: f64) -> Result<()> {
        if node >= self.load.len() || !value.is_finite() {
            return Err(Error::InvalidBoundary(alloc::format!("bad constraint {value} on node {node}")));
        }
        match self.constraints.get(&node) {
            Some(&first) if first != value => Err(Error::ConflictingDirichlet {
                node,
                first,
                second: value,
            }),
            _ => {
                self.constraints.insert(node, value);
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.load.len()
    }
}

/// Time-independent operators plus the pieces needed to evaluate loads and
/// constraints at any time.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub conduction: CsrMatrix,
    pub robin: CsrMatrix,
    /// `conduction + robin`.
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    sources: Vec<(Schedule, Vec<f64>)>,
    robin_loads: Vec<(Schedule, Vec<f64>)>,
    dirichlet: Vec<(String, Schedule, Vec<usize>)>,
    constrained: Vec<usize>,
    has_robin: bool,
}

impl Discretization {
    pub fn new(mesh: &Mesh, materials: &MaterialTable, boundary: &BoundarySpec, sources: &SourceSpec) -> Result<Self> {
        materials.check_coverage(mesh)?;
        boundary.validate(mesh)?;
        sources.validate(mesh)?;
        let conduction = assemble_stiffness(mesh, materials)?;
        let mass = assemble_mass(mesh, materials)?;
        let mut robin = conduction.zeros_like();
        let mut robin_loads = Vec::new();
        for (tag, entry) in &boundary.robin {
            let (k, unit) = robin_parts(mesh, tag, entry)?;
            robin = robin.linear_combination(1.0, &k, 1.0)?;
            robin_loads.push((entry.reference.clone(), unit));
        }
        let stiffness = conduction.linear_combination(1.0, &robin, 1.0)?;
        let source_loads = sources
            .regions
            .iter()
            .map(|(region, s)| Ok((s.clone(), unit_region_load(mesh, region)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut dirichlet = Vec::new();
        let mut constrained = BTreeSet::new();
        for (tag, schedule) in &boundary.dirichlet {
            let nodes = mesh.nodes_with_tag(mesh.tags().require(tag, TagKind::Boundary)?);
            constrained.extend(nodes.iter().copied());
            dirichlet.push((tag.clone(), schedule.clone(), nodes));
        }
        Ok(Self {
            conduction,
            robin,
            stiffness,
            mass,
            sources: source_loads,
            robin_loads,
            dirichlet,
            constrained: constrained.into_iter().collect(),
            has_robin: !boundary.robin.is_empty(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// Sorted Dirichlet nodes.
    pub fn constrained_nodes(&self) -> &[usize] {
        &self.constrained
    }

    pub fn has_robin(&self) -> bool {
        self.has_robin
    }

    pub fn source_load(&self, t: f64) -> Vec<f64> {
        weighted_sum(self.dim(), &self.sources, t)
    }

    pub fn robin_load(&self, t: f64) -> Vec<f64> {
        weighted_sum(self.dim(), &self.robin_loads, t)
    }

    /// Source plus Robin load.
    pub fn load(&self, t: f64) -> Vec<f64> {
        let mut f = self.source_load(t);
        for (a, b) in f.iter_mut().zip(self.robin_load(t)) {
            *a += b;
        }
        f
    }

    /// Dirichlet values aligned with [`constrained_nodes`](Self::constrained_nodes).
    pub fn dirichlet_values(&self, t: f64) -> Result<Vec<f64>> {
        let mut values: BTreeMap<usize, f64> = BTreeMap::new();
        for (_, schedule, nodes) in &self.dirichlet {
            let v = schedule.value(t);
            for &n in nodes {
                if let Some(&first) = values.get(&n) {
                    if first != v {
                        return Err(Error::ConflictingDirichlet { node: n, first, second: v });
                    }
                }
                values.insert(n, v);
            }
        }
        Ok(values.into_values().collect())
    }

    pub fn system_at(&self, t: f64) -> Result<LinearSystem> {
        let values = self.dirichlet_values(t)?;
        Ok(LinearSystem {
            stiffness: self.stiffness.clone(),
            mass: self.mass.clone(),
            load: self.load(t),
            constraints: self.constrained.iter().copied().zip(values).collect(),
            robin_stiffness: self.robin.clone(),
            robin_load: self.robin_load(t),
            has_robin: self.has_robin,
        })
    }
}

fn weighted_sum(n: usize, parts: &[(Schedule, Vec<f64>)], t: f64) -> Vec<f64> {
    let mut f = vec![0.0; n];
    for (schedule, unit) in parts {
        let w = schedule.value(t);
        if w != 0.0 {
            for (a, b) in f.iter_mut().zip(unit) {
                *a += w * b;
            }
        }
    }
    f
}

/// Splits unknowns into free and constrained sets.
#[derive(Clone, Debug)]
pub struct Elimination {
    free: Vec<usize>,
    map: Vec<Option<usize>>,
    constrained: Vec<usize>,
}

impl Elimination {
    /// `constrained` must be sorted and deduplicated.
    pub fn new(n: usize, constrained: &[usize]) -> Self {
        let mut is_constrained = vec![false; n];
        for &c in constrained {
            is_constrained[c] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !is_constrained[i]).collect();
        let mut map = vec![None; n];
        for (k, &i) in free.iter().enumerate() {
            map[i] = Some(k);
        }
        Self {
            free,
            map,
            constrained: constrained.to_vec(),
        }
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    /// Free-free block of `a`.
    pub fn reduce(&self, a: &CsrMatrix) -> CsrMatrix {
        a.submatrix(&self.free, &self.map)
    }

    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    pub fn scatter(&self, reduced: &[f64], full: &mut [f64]) {
        for (&i, &v) in self.free.iter().zip(reduced) {
            full[i] = v;
        }
    }

    /// Free rows of `b - A x_c`, where `x_c` carries `values` on the
    /// constrained nodes and zero elsewhere.
    pub fn reduced_rhs(&self, a: &CsrMatrix, b: &[f64], values: &[f64]) -> Vec<f64> {
        let mut xc = vec![0.0; a.dim()];
        for (&c, &v) in self.constrained.iter().zip(values) {
            xc[c] = v;
        }
        self.free
            .iter()
            .map(|&i| {
                let coupling: f64 = a.row(i).map(|(j, v)| v * xc[j]).sum();
                b[i] - coupling
            })
            .collect()
    }
}
