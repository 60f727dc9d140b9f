//! Parametric mesher for a symmetric sector of an induction-machine cross-section.
//!
//! The sector is bounded by two radial symmetry cuts and the cooling-jacket
//! arc. Layer interfaces (shaft surface, rotor surface, stator bore) are
//! polygonal arcs, slots are rectangles aligned with their centre line, and
//! conductors and cage bars are regular polygons. All of these are inserted
//! as constraint edges into a constrained Delaunay triangulation, which is
//! then refined to the requested element size and a minimum angle. Triangles
//! are classified by centroid against the same polygons, so every region
//! boundary is matched exactly by mesh edges.
//!
//! None of the default dimensions are measured data; they describe a
//! plausible 3.7 kW, four-pole, 36-slot machine.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

// Float math is inherent only on recent toolchains.
#[allow(unused_imports)]
use num_traits::Float;
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use super::{Mesh, TagKind, TagRegistry, TaggedLine};
use crate::{Error, Point, Result};

/// Region and boundary tag names used by [`build_machine_mesh`].
pub mod names {
    pub const SHAFT: &str = "shaft";
    pub const ROTOR_YOKE: &str = "rotor_yoke";
    pub const CAGE: &str = "cage";
    pub const AIR_GAP: &str = "air_gap";
    pub const STATOR_YOKE: &str = "stator_yoke";
    pub const SLOT_INSULATION: &str = "slot_insulation";
    pub const CONDUCTOR_UPPER: &str = "conductor_upper";
    pub const CONDUCTOR_LOWER: &str = "conductor_lower";

    pub const JACKET: &str = "jacket";
    pub const SYMMETRY_CUT: &str = "symmetry_cut";
    pub const SHAFT_SURFACE: &str = "shaft_surface";

    pub const REGIONS: [&str; 8] = [
        SHAFT,
        ROTOR_YOKE,
        CAGE,
        AIR_GAP,
        STATOR_YOKE,
        SLOT_INSULATION,
        CONDUCTOR_UPPER,
        CONDUCTOR_LOWER,
    ];
    pub const BOUNDARIES: [&str; 3] = [JACKET, SYMMETRY_CUT, SHAFT_SURFACE];
    pub const CONDUCTORS: [&str; 2] = [CONDUCTOR_UPPER, CONDUCTOR_LOWER];
}

/// Largest chord sagitta allowed on layer arcs at level 1, as a fraction of
/// the arc radius.
const MAX_RELATIVE_SAGITTA: f64 = 1.0 / 103.0;

/// Smallest number of polygon sides for a conductor at level 1.
pub const MIN_CONDUCTOR_SEGMENTS: usize = 8;

/// Dimensions of the machine cross-section and meshing controls. Lengths in meters.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineGeometry {
    pub shaft_radius: f64,
    pub rotor_yoke_outer_radius: f64,
    pub air_gap_thickness: f64,
    pub stator_inner_radius: f64,
    pub stator_outer_radius: f64,
    pub slot_count: usize,
    /// Tangential width of the rectangular slot.
    pub slot_width: f64,
    /// Radial depth of the slot.
    pub slot_depth: f64,
    /// Iron between the bore and the top of the slot.
    pub slot_bore_offset: f64,
    /// Insulation between the slot wall and the conductor bundle.
    pub slot_liner_thickness: f64,
    /// Insulation between the upper and lower winding layer.
    pub layer_separator_thickness: f64,
    pub conductors_per_slot: usize,
    pub conductor_radius: f64,
    /// Number of cage bars in the full machine; zero omits the cage.
    pub cage_bar_count: usize,
    pub cage_bar_radius: f64,
    /// Distance from the rotor surface to the bar centres.
    pub cage_bar_depth: f64,
    /// Modelled fraction of the full cross-section (0.25 for a quadrant).
    pub model_fraction: f64,
    /// Target element edge length away from small features, at level 1.
    pub element_size: f64,
    /// Polygon sides per conductor at level 1.
    pub conductor_segments: usize,
}

impl Default for MachineGeometry {
    fn default() -> Self {
        Self {
            shaft_radius: 0.016,
            rotor_yoke_outer_radius: 0.0472,
            air_gap_thickness: 0.0003,
            stator_inner_radius: 0.0475,
            stator_outer_radius: 0.0775,
            slot_count: 36,
            slot_width: 0.006,
            slot_depth: 0.017,
            slot_bore_offset: 0.0008,
            slot_liner_thickness: 0.0003,
            layer_separator_thickness: 0.001,
            conductors_per_slot: 18,
            conductor_radius: 0.00075,
            cage_bar_count: 28,
            cage_bar_radius: 0.0025,
            cage_bar_depth: 0.0035,
            model_fraction: 0.25,
            element_size: 0.001,
            conductor_segments: MIN_CONDUCTOR_SEGMENTS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layer {
    Upper,
    Lower,
}

/// A regular polygon standing in for a circle.
#[derive(Clone, Debug)]
struct Disk {
    centre: Point,
    radius: f64,
    vertices: Vec<Point>,
}

impl Disk {
    fn new(centre: Point, radius: f64, sides: usize, phase: f64) -> Self {
        let vertices = (0..sides)
            .map(|k| {
                let phi = phase + 2.0 * PI * k as f64 / sides as f64;
                [centre[0] + radius * phi.cos(), centre[1] + radius * phi.sin()]
            })
            .collect();
        Self { centre, radius, vertices }
    }

    fn contains(&self, p: Point) -> bool {
        let (dx, dy) = (p[0] - self.centre[0], p[1] - self.centre[1]);
        dx * dx + dy * dy < self.radius * self.radius && convex_contains(&self.vertices, p)
    }
}

/// Strict containment in a counterclockwise convex polygon.
fn convex_contains(poly: &[Point], p: Point) -> bool {
    (0..poly.len()).all(|k| {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) > 0.0
    })
}

/// Polygonal arc of `radius` from angle 0 to `sector`, split into `segments` chords.
#[derive(Clone, Copy, Debug)]
struct Arc {
    radius: f64,
    segments: usize,
    sector: f64,
}

impl Arc {
    fn vertex(&self, k: usize) -> Point {
        let phi = self.sector * k as f64 / self.segments as f64;
        [self.radius * phi.cos(), self.radius * phi.sin()]
    }

    /// Whether `p` (inside the sector) lies on the origin side of the arc polygon.
    fn encloses(&self, p: Point) -> bool {
        let phi = p[1].atan2(p[0]).clamp(0.0, self.sector);
        let k = ((phi / self.sector * self.segments as f64) as usize).min(self.segments - 1);
        let (a, b) = (self.vertex(k), self.vertex(k + 1));
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) > 0.0
    }
}

struct Slot {
    corners: [Point; 4],
    conductors: Vec<(Layer, Disk)>,
}

/// Fully resolved layout of every feature in the modelled sector.
struct Layout {
    sector: f64,
    arcs: [Arc; 4],
    slots: Vec<Slot>,
    bars: Vec<Disk>,
}

impl MachineGeometry {
    /// Angle of the modelled sector.
    pub fn sector_angle(&self) -> f64 {
        2.0 * PI * self.model_fraction
    }

    fn sectors(&self) -> Result<usize> {
        let k = 1.0 / self.model_fraction;
        if !(self.model_fraction > 0.0) || (k - k.round()).abs() > 1e-9 || k.round() < 2.0 {
            return Err(Error::InfeasibleGeometry(format!(
                "model_fraction {} is not 1/k for an integer k >= 2",
                self.model_fraction
            )));
        }
        Ok(k.round() as usize)
    }

    pub fn slots_in_model(&self) -> usize {
        self.sectors().map_or(0, |k| self.slot_count / k)
    }

    /// Polar angle of the centre line of slot `k` within the sector.
    pub fn slot_angle(&self, k: usize) -> f64 {
        self.sector_angle() * (k as f64 + 0.5) / self.slots_in_model() as f64
    }

    fn slot_top(&self) -> f64 {
        self.stator_inner_radius + self.slot_bore_offset
    }

    fn layer_height(&self) -> f64 {
        (self.slot_depth - 2.0 * self.slot_liner_thickness - self.layer_separator_thickness) / 2.0
    }

    /// Radial position (from the slot top) of the centre of a winding layer.
    fn layer_centre_depth(&self, layer: Layer) -> f64 {
        let h = self.layer_height();
        match layer {
            Layer::Upper => self.slot_liner_thickness + 0.5 * h,
            Layer::Lower => self.slot_liner_thickness + 1.5 * h + self.layer_separator_thickness,
        }
    }

    fn slot_point(&self, slot: usize, depth: f64, offset: f64) -> Point {
        let theta = self.slot_angle(slot);
        let (er, et) = ([theta.cos(), theta.sin()], [-theta.sin(), theta.cos()]);
        let u = self.slot_top() + depth;
        [u * er[0] + offset * et[0], u * er[1] + offset * et[1]]
    }

    /// Centre of the upper winding layer of the middle slot of the model.
    pub fn upper_layer_probe(&self) -> Point {
        self.slot_point(self.slots_in_model() / 2, self.layer_centre_depth(Layer::Upper), 0.0)
    }

    /// Centre of the lower winding layer of the middle slot of the model.
    pub fn lower_layer_probe(&self) -> Point {
        self.slot_point(self.slots_in_model() / 2, self.layer_centre_depth(Layer::Lower), 0.0)
    }

    /// Stator yoke behind the middle slot, halfway between slot bottom and jacket.
    pub fn stator_yoke_probe(&self) -> Point {
        let theta = self.slot_angle(self.slots_in_model() / 2);
        let r = 0.5 * (self.slot_top() + self.slot_depth + self.stator_outer_radius);
        [r * theta.cos(), r * theta.sin()]
    }

    /// Rotor iron just below the rotor surface, between two cage bars.
    pub fn rotor_surface_probe(&self) -> Point {
        let mut theta = 0.5 * self.sector_angle();
        if self.cage_bar_count > 0 {
            let bars = self.cage_bar_count / self.sectors().unwrap_or(1);
            let pitch = self.sector_angle() / bars.max(1) as f64;
            // Bars sit at half-integer pitches; step to the nearest integer pitch.
            theta = (theta / pitch).round() * pitch;
            if theta <= 0.0 || theta >= self.sector_angle() {
                theta = pitch;
            }
        }
        let r = self.rotor_yoke_outer_radius - 0.25 * (self.rotor_yoke_outer_radius - self.shaft_radius).min(0.002);
        [r * theta.cos(), r * theta.sin()]
    }

    /// Middle of the rotor yoke on the sector bisector.
    pub fn rotor_yoke_probe(&self) -> Point {
        let theta = 0.5 * self.sector_angle() + 0.25 * self.sector_angle() / self.slots_in_model().max(1) as f64;
        let inner = if self.cage_bar_count > 0 {
            self.rotor_yoke_outer_radius - self.cage_bar_depth - self.cage_bar_radius
        } else {
            self.rotor_yoke_outer_radius
        };
        let r = 0.5 * (self.shaft_radius + inner);
        [r * theta.cos(), r * theta.sin()]
    }

    /// Shaft, halfway to its surface on the sector bisector.
    pub fn shaft_probe(&self) -> Point {
        let theta = 0.5 * self.sector_angle();
        let r = 0.5 * self.shaft_radius;
        [r * theta.cos(), r * theta.sin()]
    }

    /// Checks the geometric invariants and resolves every feature.
    fn layout(&self, level: usize) -> Result<Layout> {
        let infeasible = |msg: alloc::string::String| Err(Error::InfeasibleGeometry(msg));
        let sectors = self.sectors()?;
        let sector = self.sector_angle();
        let radii = [
            ("shaft_radius", self.shaft_radius),
            ("rotor_yoke_outer_radius", self.rotor_yoke_outer_radius),
            ("stator_inner_radius", self.stator_inner_radius),
            ("stator_outer_radius", self.stator_outer_radius),
        ];
        if radii.iter().any(|(_, r)| !(r.is_finite() && *r > 0.0)) {
            return infeasible("all radii must be finite and positive".into());
        }
        for w in radii.windows(2) {
            if !(w[0].1 < w[1].1) {
                return infeasible(format!("{} must be smaller than {}", w[0].0, w[1].0));
            }
        }
        let gap = self.stator_inner_radius - self.rotor_yoke_outer_radius;
        if !(self.air_gap_thickness > 0.0) || (gap - self.air_gap_thickness).abs() > 1e-9 {
            return infeasible(format!(
                "air_gap_thickness {} must equal stator_inner_radius - rotor_yoke_outer_radius = {}",
                self.air_gap_thickness, gap
            ));
        }
        if self.slot_count == 0 || self.slot_count % sectors != 0 {
            return infeasible(format!(
                "slot_count {} is not a positive multiple of {sectors}",
                self.slot_count
            ));
        }
        if self.cage_bar_count % sectors != 0 {
            return infeasible(format!(
                "cage_bar_count {} is not a multiple of {sectors}",
                self.cage_bar_count
            ));
        }
        if self.conductor_segments < MIN_CONDUCTOR_SEGMENTS {
            return infeasible(format!(
                "resolution too coarse to resolve a conductor: {} segments, need at least {MIN_CONDUCTOR_SEGMENTS}",
                self.conductor_segments
            ));
        }
        if !(self.element_size > 0.0) {
            return infeasible("element_size must be positive".into());
        }
        let refine = 1usize << (level - 1);

        let sagitta_segments = |radius: f64, size: f64| -> usize {
            let max_angle = 2.0 * (1.0 - MAX_RELATIVE_SAGITTA).acos();
            let by_sagitta = (sector / max_angle).ceil() as usize;
            let by_size = (sector * radius / size).ceil() as usize;
            by_sagitta.max(by_size).max(1) * refine
        };
        let gap_size = self.element_size.min(2.0 * self.air_gap_thickness);
        let arcs = [
            Arc { radius: self.shaft_radius, segments: sagitta_segments(self.shaft_radius, self.element_size), sector },
            Arc { radius: self.rotor_yoke_outer_radius, segments: sagitta_segments(self.rotor_yoke_outer_radius, gap_size), sector },
            Arc { radius: self.stator_inner_radius, segments: sagitta_segments(self.stator_inner_radius, gap_size), sector },
            Arc { radius: self.stator_outer_radius, segments: sagitta_segments(self.stator_outer_radius, self.element_size), sector },
        ];

        // Slots.
        let n_slots = self.slot_count / sectors;
        let (w, d, liner) = (self.slot_width, self.slot_depth, self.slot_liner_thickness);
        if !(w > 0.0 && d > 0.0 && liner >= 0.0 && self.slot_bore_offset > 0.0) {
            return infeasible("slot width, depth and bore offset must be positive".into());
        }
        let top = self.slot_top();
        let bottom_corner = ((top + d).powi(2) + (w / 2.0).powi(2)).sqrt();
        if bottom_corner >= self.stator_outer_radius {
            return infeasible(format!(
                "slots exceed the stator annulus: slot corner at r = {bottom_corner:.6} m, jacket at {:.6} m",
                self.stator_outer_radius
            ));
        }
        let half_pitch = 0.5 * sector / n_slots as f64;
        if (w / 2.0) >= top * half_pitch.sin() {
            return infeasible(format!(
                "slots overlap: slot width {w} leaves no tooth at the slot top (pitch half-angle {half_pitch:.4} rad)"
            ));
        }
        let h_layer = self.layer_height();
        if self.conductors_per_slot > 0 && !(h_layer > 0.0) {
            return infeasible("slot too shallow for two winding layers".into());
        }
        let sides = self.conductor_segments * refine;
        let per_layer = [
            (Layer::Upper, self.conductors_per_slot.div_ceil(2)),
            (Layer::Lower, self.conductors_per_slot / 2),
        ];
        let inner_width = w - 2.0 * liner;
        let mut slots = Vec::with_capacity(n_slots);
        for s in 0..n_slots {
            let corners = [
                self.slot_point(s, 0.0, -w / 2.0),
                self.slot_point(s, d, -w / 2.0),
                self.slot_point(s, d, w / 2.0),
                self.slot_point(s, 0.0, w / 2.0),
            ];
            let mut conductors = Vec::new();
            for (layer, count) in per_layer {
                if count == 0 {
                    continue;
                }
                let cols = ((count as f64 * inner_width / h_layer).sqrt().round() as usize).clamp(1, count);
                let rows = count.div_ceil(cols);
                let (cell_w, cell_h) = (inner_width / cols as f64, h_layer / rows as f64);
                if !(2.0 * self.conductor_radius < cell_w.min(cell_h)) {
                    return infeasible(format!(
                        "{count} conductors of radius {} do not fit a {:.6} m x {:.6} m winding layer ({rows} x {cols} cells)",
                        self.conductor_radius, inner_width, h_layer
                    ));
                }
                let layer_top = self.layer_centre_depth(layer) - 0.5 * h_layer;
                for i in 0..count {
                    let (row, col) = (i / cols, i % cols);
                    let in_row = if row + 1 == rows { count - row * cols } else { cols };
                    let v = (col as f64 - 0.5 * (in_row as f64 - 1.0)) * cell_w;
                    let u = layer_top + (row as f64 + 0.5) * cell_h;
                    let centre = self.slot_point(s, u, v);
                    conductors.push((layer, Disk::new(centre, self.conductor_radius, sides, self.slot_angle(s))));
                }
            }
            slots.push(Slot { corners, conductors });
        }

        // Cage bars.
        let mut bars = Vec::new();
        if self.cage_bar_count > 0 {
            let n_bars = self.cage_bar_count / sectors;
            let centre_r = self.rotor_yoke_outer_radius - self.cage_bar_depth;
            let rb = self.cage_bar_radius;
            if !(rb > 0.0) || centre_r + rb >= self.rotor_yoke_outer_radius || centre_r - rb <= self.shaft_radius {
                return infeasible(format!(
                    "cage bars (radius {rb}, centre radius {centre_r}) must lie strictly inside the rotor yoke"
                ));
            }
            let half = 0.5 * sector / n_bars as f64;
            if rb >= centre_r * half.sin() {
                return infeasible("cage bars overlap each other or the symmetry cuts".into());
            }
            let bar_sides = {
                let max_angle = 2.0 * (1.0 - MAX_RELATIVE_SAGITTA).acos();
                ((2.0 * PI / max_angle).ceil() as usize).max(MIN_CONDUCTOR_SEGMENTS) * refine
            };
            for b in 0..n_bars {
                let phi = sector * (b as f64 + 0.5) / n_bars as f64;
                bars.push(Disk::new([centre_r * phi.cos(), centre_r * phi.sin()], rb, bar_sides, phi));
            }
        }
        Ok(Layout { sector, arcs, slots, bars })
    }
}

/// Index-based polyline collector for the constrained triangulation.
#[derive(Default)]
struct Pslg {
    vertices: Vec<Point2<f64>>,
    edges: Vec<[usize; 2]>,
}

impl Pslg {
    fn vertex(&mut self, p: Point) -> usize {
        self.vertices.push(Point2::new(p[0], p[1]));
        self.vertices.len() - 1
    }

    fn chain(&mut self, ids: &[usize], closed: bool) {
        for w in ids.windows(2) {
            self.edges.push([w[0], w[1]]);
        }
        if closed && ids.len() > 2 {
            self.edges.push([ids[ids.len() - 1], ids[0]]);
        }
    }

    /// Straight segment from `a` to `b` subdivided to at most `size`, returning
    /// the indices of the interior points (endpoints excluded).
    fn subdivide(&mut self, a: Point, b: Point, size: f64) -> Vec<usize> {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let n = ((len / size).ceil() as usize).max(1);
        (1..n)
            .map(|k| {
                let t = k as f64 / n as f64;
                self.vertex([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
            })
            .collect()
    }
}

/// Meshes the modelled sector of `geometry` at `resolution_level` (>= 1).
///
/// Each level halves the element size and doubles the number of sides of
/// every arc and polygon, so element counts grow about fourfold.
pub fn build_machine_mesh(geometry: &MachineGeometry, resolution_level: usize) -> Result<Mesh> {
    if resolution_level == 0 {
        return Err(Error::InvalidArgument("resolution_level must be at least 1".into()));
    }
    let layout = geometry.layout(resolution_level)?;
    let refine = (1usize << (resolution_level - 1)) as f64;
    let size = geometry.element_size / refine;
    let sector = layout.sector;
    // Snapped so that cuts along an axis or diagonal are exactly collinear.
    let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let (c, s) = (snap(sector.cos()), snap(sector.sin()));
    let cut_dir = [[1.0, 0.0], if (c - s).abs() < 1e-15 { [c, c] } else { [c, s] }];

    let mut pslg = Pslg::default();
    let origin = pslg.vertex([0.0, 0.0]);

    // Both symmetry cuts with a vertex at every layer radius; arc endpoints reuse them.
    let mut cut_vertices = [vec![origin], vec![origin]];
    for (c, dir) in cut_dir.iter().enumerate() {
        let mut prev = [0.0, 0.0];
        for (i, arc) in layout.arcs.iter().enumerate() {
            let p = [arc.radius * dir[0], arc.radius * dir[1]];
            let seg = if i == 2 { size.min(2.0 * geometry.air_gap_thickness) } else { size };
            let mids = pslg.subdivide(prev, p, seg);
            cut_vertices[c].extend(mids);
            cut_vertices[c].push(pslg.vertex(p));
            prev = p;
        }
        let ids = cut_vertices[c].clone();
        pslg.chain(&ids, false);
    }
    let endpoint = |c: usize, i: usize, cuts: &[Vec<usize>; 2], pslg: &Pslg| -> usize {
        // The i-th layer vertex on cut c, found by radius.
        let target = layout.arcs[i].radius;
        *cuts[c]
            .iter()
            .find(|&&v| {
                let p = pslg.vertices[v];
                ((p.x * p.x + p.y * p.y).sqrt() - target).abs() < 1e-12 * target
            })
            .expect("cut carries a vertex at every layer radius")
    };
    for i in 0..layout.arcs.len() {
        let arc = layout.arcs[i];
        let mut ids = vec![endpoint(0, i, &cut_vertices, &pslg)];
        for k in 1..arc.segments {
            ids.push(pslg.vertex(arc.vertex(k)));
        }
        ids.push(endpoint(1, i, &cut_vertices, &pslg));
        pslg.chain(&ids, false);
    }
    for slot in &layout.slots {
        let mut ids = Vec::new();
        for k in 0..4 {
            let (a, b) = (slot.corners[k], slot.corners[(k + 1) % 4]);
            ids.push(pslg.vertex(a));
            let mids = pslg.subdivide(a, b, size);
            ids.extend(mids);
        }
        pslg.chain(&ids, true);
        for (_, disk) in &slot.conductors {
            let ids: Vec<usize> = disk.vertices.iter().map(|&p| pslg.vertex(p)).collect();
            pslg.chain(&ids, true);
        }
    }
    for bar in &layout.bars {
        let ids: Vec<usize> = bar.vertices.iter().map(|&p| pslg.vertex(p)).collect();
        pslg.chain(&ids, true);
    }

    let input_vertices = pslg.vertices.len();
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::bulk_load_cdt(pslg.vertices, pslg.edges)
            .map_err(|e| Error::InfeasibleGeometry(format!("constraint insertion failed: {e:?}")))?;
    let max_area = 0.25 * 3.0f64.sqrt() * size * size;
    let result = cdt.refine(
        RefinementParameters::new()
            .with_angle_limit(AngleLimit::from_deg(25.0))
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(50 * input_vertices),
    );
    if !result.refinement_complete {
        log::warn!("mesh refinement stopped at its vertex budget; quality targets may be missed");
    }

    let nodes: Vec<Point> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    // Cuts at other angles are collinear only up to round-off, which leaves
    // slivers between the hull and the boundary chain; drop them.
    let mut excluded = BTreeSet::new();
    let mut stack: Vec<_> = cdt
        .undirected_edges()
        .filter(|e| !e.is_constraint_edge())
        .flat_map(|e| {
            let de = e.as_directed();
            [de.face(), de.rev().face()]
        })
        .filter_map(|f| f.as_inner().map(|f| f.fix()))
        .collect();
    stack.retain(|&f| {
        cdt.face(f).adjacent_edges().iter().any(|e| !e.is_constraint_edge() && e.rev().face().is_outer())
    });
    while let Some(f) = stack.pop() {
        if !excluded.insert(f.index()) {
            continue;
        }
        for e in cdt.face(f).adjacent_edges() {
            if !e.is_constraint_edge() {
                if let Some(g) = e.rev().face().as_inner() {
                    stack.push(g.fix());
                }
            }
        }
    }
    if !excluded.is_empty() {
        log::warn!("dropped {} sliver triangles outside the symmetry cuts", excluded.len());
    }
    let mut element_of_face = vec![usize::MAX; cdt.num_all_faces()];
    let mut elements: Vec<[usize; 3]> = Vec::new();
    for f in cdt.inner_faces() {
        if excluded.contains(&f.fix().index()) {
            continue;
        }
        let [a, b, c] = f.vertices();
        element_of_face[f.fix().index()] = elements.len();
        elements.push([a.fix().index(), b.fix().index(), c.fix().index()]);
    }

    let mut tags = TagRegistry::new();
    let region_ids: Vec<_> = names::REGIONS
        .iter()
        .map(|n| tags.declare(TagKind::Region, n))
        .collect::<Result<_>>()?;
    let [jacket, cut, shaft_surface] = [
        tags.declare(TagKind::Boundary, names::JACKET)?,
        tags.declare(TagKind::Boundary, names::SYMMETRY_CUT)?,
        tags.declare(TagKind::Boundary, names::SHAFT_SURFACE)?,
    ];
    let region_of = |name: &str| region_ids[names::REGIONS.iter().position(|n| *n == name).unwrap()];

    let classify = |p: Point| -> super::TagId {
        for slot in &layout.slots {
            for (layer, disk) in &slot.conductors {
                if disk.contains(p) {
                    return match layer {
                        Layer::Upper => region_of(names::CONDUCTOR_UPPER),
                        Layer::Lower => region_of(names::CONDUCTOR_LOWER),
                    };
                }
            }
            if convex_contains(&slot.corners, p) {
                return region_of(names::SLOT_INSULATION);
            }
        }
        if layout.bars.iter().any(|b| b.contains(p)) {
            return region_of(names::CAGE);
        }
        let [shaft, rotor, bore, _] = layout.arcs;
        if shaft.encloses(p) {
            region_of(names::SHAFT)
        } else if rotor.encloses(p) {
            region_of(names::ROTOR_YOKE)
        } else if bore.encloses(p) {
            region_of(names::AIR_GAP)
        } else {
            region_of(names::STATOR_YOKE)
        }
    };
    let regions: Vec<_> = elements
        .iter()
        .map(|t| {
            let c = [
                (nodes[t[0]][0] + nodes[t[1]][0] + nodes[t[2]][0]) / 3.0,
                (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) / 3.0,
            ];
            classify(c)
        })
        .collect();

    let tol = 1e-9 * geometry.stator_outer_radius;
    let on_cut = |p: Point| {
        cut_dir
            .iter()
            .any(|d| (d[0] * p[1] - d[1] * p[0]).abs() <= tol && d[0] * p[0] + d[1] * p[1] >= -tol)
    };
    let shaft_region = region_of(names::SHAFT);
    let mut lines = Vec::new();
    for edge in cdt.undirected_edges() {
        let [a, b] = edge.vertices();
        let (i, j) = (a.fix().index(), b.fix().index());
        let de = edge.as_directed();
        let side = |f: Option<usize>| f.map(|f| element_of_face[f]).filter(|&e| e != usize::MAX);
        let (f0, f1) = (de.face().as_inner().map(|f| f.fix().index()), de.rev().face().as_inner().map(|f| f.fix().index()));
        match (side(f0), side(f1)) {
            (Some(e0), Some(e1)) => {
                if (regions[e0] == shaft_region) != (regions[e1] == shaft_region) {
                    lines.push(TaggedLine { nodes: [i, j], tag: shaft_surface });
                }
            }
            (Some(_), None) | (None, Some(_)) => {
                let tag = if on_cut(nodes[i]) && on_cut(nodes[j]) { cut } else { jacket };
                lines.push(TaggedLine { nodes: [i, j], tag });
            }
            (None, None) => {}
        }
    }
    Mesh::new(nodes, elements, regions, lines, tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> MachineGeometry {
        MachineGeometry {
            slot_count: 4,
            conductors_per_slot: 1,
            cage_bar_count: 4,
            ..MachineGeometry::default()
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut g = MachineGeometry::default();
        g.slot_depth = 0.03;
        assert!(matches!(build_machine_mesh(&g, 1), Err(Error::InfeasibleGeometry(_))));
        let mut g = MachineGeometry::default();
        g.slot_count = 30;
        assert!(matches!(build_machine_mesh(&g, 1), Err(Error::InfeasibleGeometry(_))));
        let mut g = MachineGeometry::default();
        g.conductor_segments = 6;
        assert!(matches!(build_machine_mesh(&g, 1), Err(Error::InfeasibleGeometry(_))));
        let mut g = MachineGeometry::default();
        g.shaft_radius = 0.05;
        assert!(matches!(build_machine_mesh(&g, 1), Err(Error::InfeasibleGeometry(_))));
        let mut g = MachineGeometry::default();
        g.conductor_radius = 0.002;
        assert!(matches!(build_machine_mesh(&g, 1), Err(Error::InfeasibleGeometry(_))));
        assert!(build_machine_mesh(&MachineGeometry::default(), 0).is_err());
    }

    #[test]
    fn arc_segments_respect_sagitta() {
        let g = MachineGeometry::default();
        let layout = g.layout(1).unwrap();
        for arc in layout.arcs {
            let half = 0.5 * arc.sector / arc.segments as f64;
            let sagitta = arc.radius * (1.0 - half.cos());
            assert!(sagitta < arc.radius * MAX_RELATIVE_SAGITTA);
        }
    }

    #[test]
    fn conductors_fit_inside_slots() {
        let g = MachineGeometry::default();
        let layout = g.layout(1).unwrap();
        assert_eq!(layout.slots.len(), 9);
        for slot in &layout.slots {
            assert_eq!(slot.conductors.len(), 18);
            for (k, (_, a)) in slot.conductors.iter().enumerate() {
                for v in &a.vertices {
                    assert!(convex_contains(&slot.corners, *v));
                }
                for (_, b) in &slot.conductors[k + 1..] {
                    let d = ((a.centre[0] - b.centre[0]).powi(2) + (a.centre[1] - b.centre[1]).powi(2)).sqrt();
                    assert!(d > a.radius + b.radius);
                }
            }
        }
    }

    #[test]
    fn minimal_machine_has_one_slot_and_conductor() {
        let mesh = build_machine_mesh(&minimal(), 1).unwrap();
        let tags = mesh.tags();
        let upper = tags.id(names::CONDUCTOR_UPPER).unwrap();
        let lower = tags.id(names::CONDUCTOR_LOWER).unwrap();
        assert!(mesh.region_area(upper) > 0.0);
        assert_eq!(mesh.region_area(lower), 0.0);
        let r = minimal().conductor_radius;
        let octagon = 0.5 * 8.0 * r * r * (2.0 * PI / 8.0).sin();
        assert!((mesh.region_area(upper) - octagon).abs() < 1e-12 * octagon.max(1e-30) + 1e-18);
    }
}
