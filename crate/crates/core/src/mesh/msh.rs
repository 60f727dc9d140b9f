//! Reader and writer for the ASCII MSH 2.2 subset used by the toolkit.
//!
//! Grammar (whitespace-separated tokens, one record per line):
//!
//! ```text
//! $MeshFormat
//! 2.2 0 8
//! $EndMeshFormat
//! $PhysicalNames
//! <count>
//! <dimension> <id> "<name>"          dimension 1 = boundary, 2 = region
//! $EndPhysicalNames
//! $Nodes
//! <count>
//! <node-id> <x> <y> <z>              z must be 0
//! $EndNodes
//! $Elements
//! <count>
//! <elm-id> <type> <ntags> <physical> [<tag>...] <node-id>...
//! $EndElements
//! ```
//!
//! Element types are 1 (two-node line) and 2 (three-node triangle); anything
//! else is rejected. Every element must carry a declared physical group.
//! Sections other than these four are skipped. Node ids need not be
//! contiguous. Clockwise triangles are reoriented with a warning.
//!
//! The writer numbers nodes and elements from 1, emits lines (boundary
//! edges, then interface edges) before triangles, and prints coordinates in
//! shortest round-trip form, so `parse_msh(serialize_msh(m)) == m`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{signed_area, Mesh, TagId, TagKind, TagRegistry, TaggedLine};
use crate::{Error, Point, Result};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: core::iter::Enumerate<core::str::Lines<'a>>,
    current: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line, trimmed.
    fn next(&mut self) -> Option<&'a str> {
        for (i, l) in self.inner.by_ref() {
            self.current = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Some(l);
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<&'a str> {
        self.next().ok_or_else(|| err(self.current, format!("unexpected end of file, expected {what}")))
    }

    fn count(&mut self, section: &str) -> Result<usize> {
        let l = self.expect(section)?;
        l.parse().map_err(|_| err(self.current, format!("bad {section} count `{l}`")))
    }

    fn end(&mut self, marker: &str) -> Result<()> {
        let l = self.expect(marker)?;
        if l != marker {
            return Err(err(self.current, format!("expected {marker}, found `{l}`")));
        }
        Ok(())
    }
}

fn number<T: core::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| err(line, format!("bad {what} `{tok}`")))
}

/// Parses an MSH 2.2 ASCII mesh.
pub fn parse_msh(bytes: &[u8]) -> Result<Mesh> {
    let text = core::str::from_utf8(bytes).map_err(|e| err(0, format!("not UTF-8: {e}")))?;
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        current: 0,
    };

    let mut format_seen = false;
    let mut names: Vec<(u32, TagId, String)> = Vec::new();
    let mut node_index: BTreeMap<u64, usize> = BTreeMap::new();
    let mut nodes: Vec<Point> = Vec::new();
    let mut raw_elements: Vec<(usize, u32, u32, Vec<u64>)> = Vec::new();

    while let Some(header) = lines.next() {
        let at = lines.current;
        match header {
            "$MeshFormat" => {
                let l = lines.expect("format line")?;
                let mut tok = l.split_whitespace();
                let version = tok.next().unwrap_or("");
                if version != "2.2" {
                    return Err(err(lines.current, format!("unsupported MSH version `{version}`, need 2.2")));
                }
                let file_type: u32 = number(tok.next(), lines.current, "file type")?;
                if file_type != 0 {
                    return Err(err(lines.current, "binary MSH is not supported"));
                }
                lines.end("$EndMeshFormat")?;
                format_seen = true;
            }
            "$PhysicalNames" => {
                let n = lines.count("physical name")?;
                for _ in 0..n {
                    let l = lines.expect("physical name")?;
                    let line = lines.current;
                    let mut tok = l.splitn(3, char::is_whitespace);
                    let dim: u32 = number(tok.next(), line, "dimension")?;
                    let id: u32 = number(tok.next(), line, "physical id")?;
                    let name = tok.next().map(str::trim).unwrap_or("");
                    let name = name
                        .strip_prefix('"')
                        .and_then(|s| s.strip_suffix('"'))
                        .ok_or_else(|| err(line, format!("physical name `{name}` must be quoted")))?;
                    if !(dim == 1 || dim == 2) {
                        return Err(err(line, format!("physical group `{name}` has dimension {dim}, need 1 or 2")));
                    }
                    names.push((dim, TagId(id), name.to_string()));
                }
                lines.end("$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let n = lines.count("node")?;
                nodes.reserve(n);
                for _ in 0..n {
                    let l = lines.expect("node")?;
                    let line = lines.current;
                    let mut tok = l.split_whitespace();
                    let id: u64 = number(tok.next(), line, "node id")?;
                    let x: f64 = number(tok.next(), line, "x coordinate")?;
                    let y: f64 = number(tok.next(), line, "y coordinate")?;
                    let z: f64 = number(tok.next(), line, "z coordinate")?;
                    if z != 0.0 {
                        return Err(err(line, format!("node {id} has z = {z}; the mesh must be planar")));
                    }
                    if node_index.insert(id, nodes.len()).is_some() {
                        return Err(err(line, format!("node id {id} appears twice")));
                    }
                    nodes.push([x, y]);
                }
                lines.end("$EndNodes")?;
            }
            "$Elements" => {
                let n = lines.count("element")?;
                for _ in 0..n {
                    let l = lines.expect("element")?;
                    let line = lines.current;
                    let mut tok = l.split_whitespace();
                    let _id: u64 = number(tok.next(), line, "element id")?;
                    let kind: u32 = number(tok.next(), line, "element type")?;
                    let arity = match kind {
                        1 => 2,
                        2 => 3,
                        other => return Err(err(line, format!("unknown element type {other}"))),
                    };
                    let ntags: usize = number(tok.next(), line, "tag count")?;
                    let tags: Vec<u32> = (0..ntags)
                        .map(|_| number(tok.next(), line, "element tag"))
                        .collect::<Result<_>>()?;
                    let physical = match tags.first() {
                        Some(&p) if p != 0 => p,
                        _ => return Err(err(line, "element has no physical group")),
                    };
                    let ids: Vec<u64> = (0..arity)
                        .map(|_| number(tok.next(), line, "node reference"))
                        .collect::<Result<_>>()?;
                    if tok.next().is_some() {
                        return Err(err(line, "trailing tokens after element nodes"));
                    }
                    raw_elements.push((line, kind, physical, ids));
                }
                lines.end("$EndElements")?;
            }
            other if other.starts_with("$End") => {
                return Err(err(at, format!("unmatched `{other}`")));
            }
            other if other.starts_with('$') => {
                let end = format!("$End{}", &other[1..]);
                loop {
                    if lines.expect(&end)? == end {
                        break;
                    }
                }
            }
            other => return Err(err(at, format!("expected a section header, found `{other}`"))),
        }
    }
    if !format_seen {
        return Err(err(0, "missing $MeshFormat section"));
    }

    let mut registry = TagRegistry::new();
    for (dim, id, name) in &names {
        let kind = if *dim == 2 { TagKind::Region } else { TagKind::Boundary };
        registry.insert(*id, kind, name)?;
    }

    let mut elements = Vec::new();
    let mut regions = Vec::new();
    let mut lines_out = Vec::new();
    let mut flipped = 0usize;
    for (line, kind, physical, ids) in raw_elements {
        let expected = if kind == 2 { TagKind::Region } else { TagKind::Boundary };
        match registry.get(TagId(physical)) {
            Some(e) if e.kind == expected => {}
            Some(e) => {
                return Err(err(
                    line,
                    format!("physical group `{}` has the wrong dimension for element type {kind}", e.name),
                ))
            }
            None => return Err(err(line, format!("physical group {physical} is not declared in $PhysicalNames"))),
        }
        let idx: Vec<usize> = ids
            .iter()
            .map(|id| {
                node_index
                    .get(id)
                    .copied()
                    .ok_or_else(|| err(line, format!("element references missing node {id}")))
            })
            .collect::<Result<_>>()?;
        if kind == 2 {
            let mut tri = [idx[0], idx[1], idx[2]];
            if signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]) < 0.0 {
                tri.swap(1, 2);
                flipped += 1;
            }
            elements.push(tri);
            regions.push(TagId(physical));
        } else {
            lines_out.push(TaggedLine {
                nodes: [idx[0], idx[1]],
                tag: TagId(physical),
            });
        }
    }
    if flipped > 0 {
        log::warn!("reoriented {flipped} clockwise triangles");
    }
    Mesh::new(nodes, elements, regions, lines_out, registry)
}

/// Writes `mesh` as MSH 2.2 ASCII.
pub fn serialize_msh(mesh: &Mesh) -> Vec<u8> {
    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = write_msh(mesh, &mut out);
    out.into_bytes()
}

fn write_msh(mesh: &Mesh, out: &mut String) -> core::fmt::Result {
    writeln!(out, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;
    writeln!(out, "$PhysicalNames\n{}", mesh.tags().len())?;
    for e in mesh.tags().iter() {
        writeln!(out, "{} {} \"{}\"", e.kind.dimension(), e.id.0, e.name)?;
    }
    writeln!(out, "$EndPhysicalNames")?;
    writeln!(out, "$Nodes\n{}", mesh.node_count())?;
    for (i, p) in mesh.nodes().iter().enumerate() {
        writeln!(out, "{} {:e} {:e} 0", i + 1, p[0], p[1])?;
    }
    writeln!(out, "$EndNodes")?;
    let lines: Vec<([usize; 2], TagId)> = mesh
        .boundary_edges()
        .iter()
        .map(|e| (e.nodes, e.tag))
        .chain(mesh.interface_edges().iter().map(|e| (e.nodes, e.tag)))
        .collect();
    writeln!(out, "$Elements\n{}", lines.len() + mesh.element_count())?;
    let mut id = 0;
    for (nodes, tag) in &lines {
        id += 1;
        writeln!(out, "{id} 1 2 {} {} {} {}", tag.0, tag.0, nodes[0] + 1, nodes[1] + 1)?;
    }
    for (tri, tag) in mesh.elements().iter().zip(mesh.element_region()) {
        id += 1;
        writeln!(out, "{id} 2 2 {} {} {} {} {}", tag.0, tag.0, tri[0] + 1, tri[1] + 1, tri[2] + 1)?;
    }
    writeln!(out, "$EndElements")
}
