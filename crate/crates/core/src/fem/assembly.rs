use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::materials::{MaterialTable, Tensor2};
use crate::mesh::{Mesh, TagKind};
use crate::schedule::Schedule;
use crate::sparse::CsrMatrix;
use crate::{Error, Point, Result};

/// Volumetric heat sources per region, W/m³.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceSpec {
    pub regions: BTreeMap<String, Schedule>,
}

impl SourceSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn uniform(region: &str, value: f64) -> Self {
        let mut s = Self::new();
        s.set(region, Schedule::constant(value));
        s
    }

    pub fn set(&mut self, region: &str, density: Schedule) {
        self.regions.insert(region.to_string(), density);
    }

    pub fn is_zero(&self) -> bool {
        self.regions.values().all(|s| s.is_constant() && s.value(0.0) == 0.0)
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        for name in self.regions.keys() {
            mesh.tags().require(name, TagKind::Region)?;
        }
        Ok(())
    }
}

/// Gradient coefficients `(b_i, c_i)` with `grad phi_i = (b_i, c_i) / (2A)`.
fn gradients(v: [Point; 3]) -> [[f64; 2]; 3] {
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [v[j][1] - v[k][1], v[k][0] - v[j][0]];
    }
    g
}

/// P1 stiffness block `A grad(phi_i) . L grad(phi_j)` of one triangle.
pub fn element_stiffness(vertices: [Point; 3], area: f64, tensor: Tensor2) -> [[f64; 3]; 3] {
    let g = gradients(vertices);
    let scale = 1.0 / (4.0 * area);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        let lg = [
            tensor[0][0] * g[i][0] + tensor[0][1] * g[i][1],
            tensor[1][0] * g[i][0] + tensor[1][1] * g[i][1],
        ];
        for j in 0..3 {
            k[i][j] = scale * (lg[0] * g[j][0] + lg[1] * g[j][1]);
        }
    }
    k
}

/// Consistent P1 mass block of one triangle.
pub fn element_mass(area: f64, heat_capacity: f64) -> [[f64; 3]; 3] {
    let d = heat_capacity * area / 6.0;
    let o = heat_capacity * area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

fn region_name(mesh: &Mesh, e: usize) -> &str {
    mesh.tags().name(mesh.element_region()[e]).unwrap_or_default()
}

/// Global stiffness (conduction only). Polar tensors are rotated at each
/// element centroid.
pub fn assemble_stiffness(mesh: &Mesh, materials: &MaterialTable) -> Result<CsrMatrix> {
    let mut k = CsrMatrix::from_mesh_pattern(mesh);
    for e in 0..mesh.element_count() {
        let material = materials.resolve(region_name(mesh, e))?;
        let area = mesh.element_area(e);
        if !(area > 0.0) {
            return Err(Error::DegenerateElement { element: e, area });
        }
        let tensor = material.conductivity.tensor_at(mesh.element_centroid(e));
        let det = tensor[0][0] * tensor[1][1] - tensor[0][1] * tensor[1][0];
        if !(tensor[0][0] > 0.0 && det > 0.0) || tensor[0][1] != tensor[1][0] {
            return Err(Error::InvalidMaterial {
                region: region_name(mesh, e).to_string(),
                reason: "conductivity tensor is not symmetric positive definite".into(),
            });
        }
        let block = element_stiffness(mesh.element_vertices(e), area, tensor);
        k.add_block(&mesh.elements()[e], &block);
    }
    Ok(k)
}

pub fn assemble_mass(mesh: &Mesh, materials: &MaterialTable) -> Result<CsrMatrix> {
    let mut m = CsrMatrix::from_mesh_pattern(mesh);
    for e in 0..mesh.element_count() {
        let material = materials.resolve(region_name(mesh, e))?;
        let area = mesh.element_area(e);
        if !(area > 0.0) {
            return Err(Error::DegenerateElement { element: e, area });
        }
        m.add_block(&mesh.elements()[e], &element_mass(area, material.heat_capacity));
    }
    Ok(m)
}

/// Load vector of a unit source density over `region`.
pub fn unit_region_load(mesh: &Mesh, region: &str) -> Result<Vec<f64>> {
    let id = mesh.tags().require(region, TagKind::Region)?;
    let mut f = vec![0.0; mesh.node_count()];
    for e in 0..mesh.element_count() {
        if mesh.element_region()[e] == id {
            let share = mesh.element_area(e) / 3.0;
            for &i in &mesh.elements()[e] {
                f[i] += share;
            }
        }
    }
    Ok(f)
}

/// Lumped P1 source load at time `t`.
pub fn assemble_load(mesh: &Mesh, sources: &SourceSpec, t: f64) -> Result<Vec<f64>> {
    sources.validate(mesh)?;
    let mut f = vec![0.0; mesh.node_count()];
    for e in 0..mesh.element_count() {
        if let Some(schedule) = sources.regions.get(region_name(mesh, e)) {
            let share = schedule.value(t) * mesh.element_area(e) / 3.0;
            for &i in &mesh.elements()[e] {
                f[i] += share;
            }
        }
    }
    Ok(f)
}
