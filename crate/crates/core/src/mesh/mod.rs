//! Tagged linear-triangle meshes.
//!
//! A [`Mesh`] is immutable once built. All constructors funnel through
//! [`Mesh::new`], which validates connectivity, computes edge adjacency and
//! outward normals, and splits tagged line elements into true boundary edges
//! (one adjacent triangle) and interface edges (two adjacent triangles).

mod machine;
mod msh;
mod probe;
pub mod shapes;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

// Float math is inherent only on recent toolchains.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Point, Result};

pub use machine::{build_machine_mesh, names, MachineGeometry};
pub use msh::{parse_msh, serialize_msh};
pub use probe::{locate_probe, ProbeLocation};

/// Numeric identifier of a physical group (region or boundary tag).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagId(pub u32);

/// Whether a tag names a set of triangles or a set of edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TagKind {
    Region,
    Boundary,
}

impl TagKind {
    /// Topological dimension of the tagged entities.
    pub fn dimension(self) -> u32 {
        match self {
            TagKind::Region => 2,
            TagKind::Boundary => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TagEntry {
    pub id: TagId,
    pub kind: TagKind,
    pub name: String,
}

/// Declared region and boundary tags, in declaration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TagRegistry {
    entries: Vec<TagEntry>,
}

impl TagRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `name` with the next free numeric id.
    pub fn declare(&mut self, kind: TagKind, name: &str) -> Result<TagId> {
        let next = self.entries.iter().map(|e| e.id.0).max().unwrap_or(0) + 1;
        self.insert(TagId(next), kind, name)?;
        Ok(TagId(next))
    }

    pub fn insert(&mut self, id: TagId, kind: TagKind, name: &str) -> Result<()> {
        if name.is_empty() {
            return Err(Error::InvalidMesh("empty tag name".into()));
        }
        if self.entries.iter().any(|e| e.id == id) {
            return Err(Error::InvalidMesh(format!("tag id {} declared twice", id.0)));
        }
        if self.entries.iter().any(|e| e.name == name) {
            return Err(Error::InvalidMesh(format!("tag name `{name}` declared twice")));
        }
        self.entries.push(TagEntry {
            id,
            kind,
            name: name.to_string(),
        });
        Ok(())
    }

    pub fn get(&self, id: TagId) -> Option<&TagEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn id(&self, name: &str) -> Option<TagId> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.id)
    }

    pub fn name(&self, id: TagId) -> Option<&str> {
        self.get(id).map(|e| e.name.as_str())
    }

    /// Looks up `name` and checks that it has the expected kind.
    pub fn require(&self, name: &str, kind: TagKind) -> Result<TagId> {
        match self.entries.iter().find(|e| e.name == name) {
            Some(e) if e.kind == kind => Ok(e.id),
            _ => Err(Error::UnknownTag(name.to_string())),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &TagEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An edge on the geometric boundary of the mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: TagId,
    /// The single triangle owning this edge.
    pub element: usize,
    /// Outward unit normal.
    pub normal: Point,
}

/// A tagged edge shared by two triangles, such as the shaft surface.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceEdge {
    pub nodes: [usize; 2],
    pub tag: TagId,
    /// Adjacent triangles, lower index first.
    pub elements: [usize; 2],
    /// Unit normal pointing from `elements[0]` towards `elements[1]`.
    pub normal: Point,
}

/// A tagged line element as read from a file or produced by a mesher,
/// before adjacency is known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaggedLine {
    pub nodes: [usize; 2],
    pub tag: TagId,
}

/// Tagged triangular discretization of a planar domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<[usize; 3]>,
    element_region: Vec<TagId>,
    boundary_edges: Vec<BoundaryEdge>,
    interface_edges: Vec<InterfaceEdge>,
    tags: TagRegistry,
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds and validates a mesh.
    ///
    /// Triangles must be counterclockwise with positive area. Each tagged
    /// line must coincide with an edge of one triangle (boundary edge) or
    /// two triangles (interface edge).
    pub fn new(
        nodes: Vec<Point>,
        elements: Vec<[usize; 3]>,
        element_region: Vec<TagId>,
        lines: Vec<TaggedLine>,
        tags: TagRegistry,
    ) -> Result<Self> {
        if element_region.len() != elements.len() {
            return Err(Error::InvalidMesh(format!(
                "{} elements but {} region tags",
                elements.len(),
                element_region.len()
            )));
        }
        if let Some(p) = nodes.iter().find(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::InvalidMesh(format!("non-finite node coordinate {p:?}")));
        }
        let n = nodes.len();
        for (e, tri) in elements.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} references missing node {bad}"
                )));
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { element: e, area });
            }
        }
        for (e, &tag) in element_region.iter().enumerate() {
            match tags.get(tag) {
                Some(entry) if entry.kind == TagKind::Region => {}
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} carries undeclared region tag {}",
                        tag.0
                    )))
                }
            }
        }

        let mut adjacency: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (e, tri) in elements.iter().enumerate() {
            for k in 0..3 {
                adjacency
                    .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                    .or_default()
                    .push(e);
            }
        }
        if let Some((edge, owners)) = adjacency.iter().find(|(_, v)| v.len() > 2) {
            return Err(Error::InvalidMesh(format!(
                "edge {edge:?} shared by {} triangles",
                owners.len()
            )));
        }

        let centroid = |e: usize| -> Point {
            let t = elements[e];
            [
                (nodes[t[0]][0] + nodes[t[1]][0] + nodes[t[2]][0]) / 3.0,
                (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) / 3.0,
            ]
        };
        let unit_normal = |a: Point, b: Point, away_from: Point| -> Point {
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = (dx * dx + dy * dy).sqrt();
            let mut nrm = [dy / len, -dx / len];
            let mid = [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
            if nrm[0] * (mid[0] - away_from[0]) + nrm[1] * (mid[1] - away_from[1]) < 0.0 {
                nrm = [-nrm[0], -nrm[1]];
            }
            nrm
        };

        let mut boundary_edges = Vec::new();
        let mut interface_edges = Vec::new();
        let mut seen = BTreeMap::new();
        for line in lines {
            let [a, b] = line.nodes;
            if a >= n || b >= n {
                return Err(Error::InvalidMesh(format!(
                    "line {:?} references a missing node",
                    line.nodes
                )));
            }
            match tags.get(line.tag) {
                Some(entry) if entry.kind == TagKind::Boundary => {}
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "line {:?} carries undeclared boundary tag {}",
                        line.nodes, line.tag.0
                    )))
                }
            }
            if let Some(prev) = seen.insert(edge_key(a, b), line.tag) {
                return Err(Error::InvalidMesh(format!(
                    "edge {:?} tagged twice ({} and {})",
                    line.nodes, prev.0, line.tag.0
                )));
            }
            match adjacency.get(&edge_key(a, b)).map(Vec::as_slice) {
                Some(&[e]) => boundary_edges.push(BoundaryEdge {
                    nodes: line.nodes,
                    tag: line.tag,
                    element: e,
                    normal: unit_normal(nodes[a], nodes[b], centroid(e)),
                }),
                Some(&[e0, e1]) => {
                    let (e0, e1) = if e0 < e1 { (e0, e1) } else { (e1, e0) };
                    interface_edges.push(InterfaceEdge {
                        nodes: line.nodes,
                        tag: line.tag,
                        elements: [e0, e1],
                        normal: unit_normal(nodes[a], nodes[b], centroid(e0)),
                    })
                }
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "line {:?} is not an edge of any triangle",
                        line.nodes
                    )))
                }
            }
        }

        // Tagged boundary edges must form chains: no node may join more than two.
        let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
        for edge in &boundary_edges {
            for &v in &edge.nodes {
                *degree.entry(v).or_default() += 1;
            }
        }
        if let Some((v, d)) = degree.iter().find(|(_, &d)| d > 2) {
            return Err(Error::InvalidMesh(format!(
                "boundary node {v} joins {d} boundary edges"
            )));
        }

        Ok(Self {
            nodes,
            elements,
            element_region,
            boundary_edges,
            interface_edges,
            tags,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn element_region(&self) -> &[TagId] {
        &self.element_region
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn interface_edges(&self) -> &[InterfaceEdge] {
        &self.interface_edges
    }

    pub fn tags(&self) -> &TagRegistry {
        &self.tags
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element_vertices(&self, e: usize) -> [Point; 3] {
        let t = self.elements[e];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.element_vertices(e);
        signed_area(a, b, c)
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        let [a, b, c] = self.element_vertices(e);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    /// Area of all triangles carrying `region`.
    pub fn region_area(&self, region: TagId) -> f64 {
        (0..self.elements.len())
            .filter(|&e| self.element_region[e] == region)
            .map(|e| self.element_area(e))
            .sum()
    }

    /// Region tags that actually occur on some triangle, in registry order.
    pub fn used_regions(&self) -> Vec<TagId> {
        self.tags
            .iter()
            .filter(|t| t.kind == TagKind::Region && self.element_region.contains(&t.id))
            .map(|t| t.id)
            .collect()
    }

    /// Node pairs of every boundary or interface edge carrying `tag`.
    pub fn edges_with_tag(&self, tag: TagId) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.boundary_edges
            .iter()
            .filter(move |e| e.tag == tag)
            .map(|e| e.nodes)
            .chain(
                self.interface_edges
                    .iter()
                    .filter(move |e| e.tag == tag)
                    .map(|e| e.nodes),
            )
    }

    /// Sorted, deduplicated nodes touched by edges carrying `tag`.
    pub fn nodes_with_tag(&self, tag: TagId) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges_with_tag(tag).flatten().collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn edge_length(&self, edge: [usize; 2]) -> f64 {
        let (a, b) = (self.nodes[edge[0]], self.nodes[edge[1]]);
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// Node pairs of all edges with exactly one adjacent triangle, tagged or not.
    pub fn geometric_boundary(&self) -> Vec<[usize; 2]> {
        let mut count: BTreeMap<(usize, usize), ([usize; 2], usize)> = BTreeMap::new();
        for tri in &self.elements {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                count.entry(edge_key(a, b)).or_insert(([a, b], 0)).1 += 1;
            }
        }
        count
            .into_values()
            .filter(|&(_, c)| c == 1)
            .map(|(e, _)| e)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_square() -> Mesh {
        let mut tags = TagRegistry::new();
        let dom = tags.declare(TagKind::Region, "domain").unwrap();
        let wall = tags.declare(TagKind::Boundary, "wall").unwrap();
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let lines = [[0, 1], [1, 2], [2, 3], [3, 0]]
            .iter()
            .map(|&nodes| TaggedLine { nodes, tag: wall })
            .collect();
        Mesh::new(nodes, vec![[0, 1, 2], [0, 2, 3]], vec![dom; 2], lines, tags).unwrap()
    }

    #[test]
    fn unit_square_counts_and_area() {
        let m = unit_square();
        assert_eq!(m.node_count(), 4);
        assert_eq!(m.element_count(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert!(m.interface_edges().is_empty());
        assert_eq!(m.total_area(), 1.0);
    }

    #[test]
    fn boundary_normals_point_outward() {
        let m = unit_square();
        for edge in m.boundary_edges() {
            let len = (edge.normal[0].powi(2) + edge.normal[1].powi(2)).sqrt();
            assert!((len - 1.0).abs() < 1e-12);
            let a = m.nodes()[edge.nodes[0]];
            let c = m.element_centroid(edge.element);
            assert!(edge.normal[0] * (a[0] - c[0]) + edge.normal[1] * (a[1] - c[1]) > 0.0);
        }
    }

    #[test]
    fn interior_line_becomes_interface() {
        let mut tags = TagRegistry::new();
        let dom = tags.declare(TagKind::Region, "domain").unwrap();
        let cut = tags.declare(TagKind::Boundary, "diagonal").unwrap();
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let m = Mesh::new(
            nodes,
            vec![[0, 1, 2], [0, 2, 3]],
            vec![dom; 2],
            vec![TaggedLine { nodes: [0, 2], tag: cut }],
            tags,
        )
        .unwrap();
        assert_eq!(m.interface_edges().len(), 1);
        let iface = &m.interface_edges()[0];
        assert_eq!(iface.elements, [0, 1]);
        // From element 0 (below the diagonal) towards element 1.
        assert!(iface.normal[1] > 0.0 && iface.normal[0] < 0.0);
    }

    #[test]
    fn rejects_clockwise_and_dangling() {
        let mut tags = TagRegistry::new();
        let dom = tags.declare(TagKind::Region, "domain").unwrap();
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = Mesh::new(nodes.clone(), vec![[0, 2, 1]], vec![dom], vec![], tags.clone());
        assert!(matches!(err, Err(Error::DegenerateElement { .. })));
        let err = Mesh::new(nodes, vec![[0, 1, 7]], vec![dom], vec![], tags);
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_line_off_mesh() {
        let mut tags = TagRegistry::new();
        let dom = tags.declare(TagKind::Region, "domain").unwrap();
        let wall = tags.declare(TagKind::Boundary, "wall").unwrap();
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 2.0]];
        let err = Mesh::new(
            nodes,
            vec![[0, 1, 2]],
            vec![dom],
            vec![TaggedLine { nodes: [0, 3], tag: wall }],
            tags,
        );
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut tags = TagRegistry::new();
        tags.declare(TagKind::Region, "a").unwrap();
        assert!(tags.declare(TagKind::Boundary, "a").is_err());
        assert!(tags.insert(TagId(1), TagKind::Boundary, "b").is_err());
        assert_eq!(tags.require("a", TagKind::Region).unwrap(), TagId(1));
        assert!(tags.require("a", TagKind::Boundary).is_err());
    }
}
