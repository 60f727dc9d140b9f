//! Thermal material parameters per mesh region.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

// Float math is inherent only on recent toolchains.
#[allow(unused_imports)]
use num_traits::Float;

use crate::mesh::{names, Mesh, TagKind};
use crate::{Error, Point, Result};

/// Heat-transfer coefficient of the shaft Robin condition obtained by fitting, W/°C/m.
pub const FITTED_ROBIN_COEFFICIENT: f64 = 0.235;

/// In-plane thermal conductivity, W/°C/m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Conductivity {
    Isotropic(f64),
    /// Principal axes aligned with the local radial and tangential directions.
    Polar { radial: f64, tangential: f64 },
}

/// Symmetric 2x2 conductivity tensor `[[xx, xy], [xy, yy]]`.
pub type Tensor2 = [[f64; 2]; 2];

impl Conductivity {
    /// Cartesian tensor at `point`; polar axes are taken about the origin.
    pub fn tensor_at(&self, point: Point) -> Tensor2 {
        match *self {
            Conductivity::Isotropic(k) => [[k, 0.0], [0.0, k]],
            Conductivity::Polar { radial, tangential } => {
                let r = (point[0] * point[0] + point[1] * point[1]).sqrt();
                let (c, s) = if r > 0.0 { (point[0] / r, point[1] / r) } else { (1.0, 0.0) };
                let xy = (radial - tangential) * c * s;
                [
                    [radial * c * c + tangential * s * s, xy],
                    [xy, radial * s * s + tangential * c * c],
                ]
            }
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Conductivity::Isotropic(k) => k.is_finite() && k > 0.0,
            Conductivity::Polar { radial, tangential } => {
                radial.is_finite() && tangential.is_finite() && radial > 0.0 && tangential > 0.0
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Conductivity::Isotropic(k) => Conductivity::Isotropic(k * factor),
            Conductivity::Polar { radial, tangential } => Conductivity::Polar {
                radial: radial * factor,
                tangential: tangential * factor,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialRegion {
    /// Volumetric heat capacity, J/°C/m³.
    pub heat_capacity: f64,
    pub conductivity: Conductivity,
    /// Out-of-plane conductivity. Kept for reference; the 2D assembly ignores it.
    pub axial_conductivity: Option<f64>,
    /// Effective isotropic conductivity; replaces `conductivity` when set.
    pub effective_conductivity: Option<f64>,
}

impl MaterialRegion {
    pub fn isotropic(heat_capacity: f64, conductivity: f64) -> Self {
        Self {
            heat_capacity,
            conductivity: Conductivity::Isotropic(conductivity),
            axial_conductivity: None,
            effective_conductivity: None,
        }
    }

    fn validate(&self, region: &str) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidMaterial {
                region: region.to_string(),
                reason: reason.to_string(),
            })
        };
        if !(self.heat_capacity.is_finite() && self.heat_capacity > 0.0) {
            return bad("heat capacity must be positive");
        }
        if !self.conductivity.is_valid() {
            return bad("conductivity entries must be positive");
        }
        if self.axial_conductivity.is_some_and(|k| !(k.is_finite() && k > 0.0)) {
            return bad("axial conductivity must be positive");
        }
        if self.effective_conductivity.is_some_and(|k| !(k.is_finite() && k > 0.0)) {
            return bad("effective conductivity must be positive");
        }
        Ok(())
    }

    /// Conductivity used in assembly: the effective value if present.
    pub fn active_conductivity(&self) -> Conductivity {
        match self.effective_conductivity {
            Some(k) => Conductivity::Isotropic(k),
            None => self.conductivity,
        }
    }
}

/// Where a table entry's values come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Literature,
    Fitted,
    User,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Literature => "literature",
            Provenance::Fitted => "fitted",
            Provenance::User => "user",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialEntry {
    pub material: MaterialRegion,
    pub provenance: Provenance,
}

/// Material parameters resolved for assembly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedMaterial {
    pub heat_capacity: f64,
    pub conductivity: Conductivity,
}

/// Region name to material mapping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MaterialTable {
    entries: BTreeMap<String, MaterialEntry>,
}

impl MaterialTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces the entry for `region`.
    pub fn insert(&mut self, region: &str, material: MaterialRegion, provenance: Provenance) -> Result<()> {
        material.validate(region)?;
        self.entries.insert(
            region.to_string(),
            MaterialEntry {
                material,
                provenance,
            },
        );
        Ok(())
    }

    pub fn get(&self, region: &str) -> Option<&MaterialEntry> {
        self.entries.get(region)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MaterialEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sets the effective conductivity of `region`, marking the entry as fitted.
    pub fn set_effective_conductivity(&mut self, region: &str, value: f64) -> Result<()> {
        let entry = self
            .entries
            .get_mut(region)
            .ok_or_else(|| Error::UnknownTag(region.to_string()))?;
        let mut material = entry.material;
        material.effective_conductivity = Some(value);
        material.validate(region)?;
        entry.material = material;
        entry.provenance = Provenance::Fitted;
        Ok(())
    }

    /// Effective heat capacity and conductivity of `region`.
    pub fn resolve(&self, region: &str) -> Result<ResolvedMaterial> {
        let entry = self
            .entries
            .get(region)
            .ok_or_else(|| Error::UnknownTag(region.to_string()))?;
        Ok(ResolvedMaterial {
            heat_capacity: entry.material.heat_capacity,
            conductivity: entry.material.active_conductivity(),
        })
    }

    /// Checks that every region used by `mesh` has an entry; entries naming
    /// regions absent from the mesh are reported as a warning.
    pub fn check_coverage(&self, mesh: &Mesh) -> Result<()> {
        for id in mesh.used_regions() {
            let name = mesh.tags().name(id).unwrap_or_default();
            if !self.entries.contains_key(name) {
                return Err(Error::InvalidMaterial {
                    region: name.to_string(),
                    reason: "region has no material entry".into(),
                });
            }
        }
        for name in self.entries.keys() {
            if mesh.tags().require(name, TagKind::Region).is_err() {
                log::warn!("material `{name}` does not match any region of the mesh");
            }
        }
        Ok(())
    }
}

/// Handbook values for the aluminium cage, which has no published row.
pub const CAGE_ALUMINIUM: MaterialRegion = MaterialRegion {
    heat_capacity: 2.422e6,
    conductivity: Conductivity::Isotropic(237.0),
    axial_conductivity: None,
    effective_conductivity: None,
};

/// Material parameters from manufacturer data and literature.
///
/// Both winding layers use the conductor row and the slot insulation the
/// insulation row. The cage carries aluminium handbook values tagged as
/// user-provided.
pub fn literature_defaults() -> MaterialTable {
    let lamination = MaterialRegion {
        heat_capacity: 3.925e6,
        conductivity: Conductivity::Isotropic(40.0),
        axial_conductivity: Some(2.5),
        effective_conductivity: None,
    };
    let conductor = MaterialRegion::isotropic(3.435e6, 398.0);
    let rows = [
        (names::STATOR_YOKE, lamination, Provenance::Literature),
        (names::ROTOR_YOKE, lamination, Provenance::Literature),
        (names::CONDUCTOR_UPPER, conductor, Provenance::Literature),
        (names::CONDUCTOR_LOWER, conductor, Provenance::Literature),
        (names::SLOT_INSULATION, MaterialRegion::isotropic(7.905e6, 0.7), Provenance::Literature),
        (names::AIR_GAP, MaterialRegion::isotropic(1.210e3, 0.026), Provenance::Literature),
        (names::SHAFT, MaterialRegion::isotropic(3.777e6, 59.6), Provenance::Literature),
        (names::CAGE, CAGE_ALUMINIUM, Provenance::User),
    ];
    let mut table = MaterialTable::new();
    for (region, material, provenance) in rows {
        table
            .insert(region, material, provenance)
            .expect("default materials are valid");
    }
    table
}

/// Literature table with the fitted effective conductivities applied.
///
/// The matching Robin coefficient is [`FITTED_ROBIN_COEFFICIENT`].
pub fn fitted_defaults() -> MaterialTable {
    let mut table = literature_defaults();
    for (region, value) in [
        (names::STATOR_YOKE, 24.0),
        (names::ROTOR_YOKE, 16.0),
        (names::AIR_GAP, 0.052),
        (names::SHAFT, 59.6),
    ] {
        table
            .set_effective_conductivity(region, value)
            .expect("fitted materials are valid");
    }
    table
}

/// Convenience wrapper matching [`MaterialTable::resolve`].
pub fn resolve(table: &MaterialTable, region: &str) -> Result<ResolvedMaterial> {
    table.resolve(region)
}
