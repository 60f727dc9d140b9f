//! Structured meshes of simple shapes, used for verification problems.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

// Float math is inherent only on recent toolchains.
#[allow(unused_imports)]
use num_traits::Float;

use super::{Mesh, TagKind, TagRegistry, TaggedLine};
use crate::{Error, Point, Result};

/// Axis-aligned `width` x `height` rectangle with its lower-left corner at
/// the origin, split into `nx` x `ny` cells of two triangles each.
///
/// Region `domain`; boundaries `bottom`, `right`, `top`, `left`.
pub fn rectangle(width: f64, height: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 || !(width > 0.0) || !(height > 0.0) {
        return Err(Error::InvalidArgument("rectangle needs positive size and cell counts".into()));
    }
    let mut tags = TagRegistry::new();
    let domain = tags.declare(TagKind::Region, "domain")?;
    let bottom = tags.declare(TagKind::Boundary, "bottom")?;
    let right = tags.declare(TagKind::Boundary, "right")?;
    let top = tags.declare(TagKind::Boundary, "top")?;
    let left = tags.declare(TagKind::Boundary, "left")?;

    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push([a, b, c]);
            elements.push([a, c, d]);
        }
    }
    let mut lines = Vec::new();
    for i in 0..nx {
        lines.push(TaggedLine { nodes: [id(i, 0), id(i + 1, 0)], tag: bottom });
    }
    for j in 0..ny {
        lines.push(TaggedLine { nodes: [id(nx, j), id(nx, j + 1)], tag: right });
    }
    for i in (0..nx).rev() {
        lines.push(TaggedLine { nodes: [id(i + 1, ny), id(i, ny)], tag: top });
    }
    for j in (0..ny).rev() {
        lines.push(TaggedLine { nodes: [id(0, j + 1), id(0, j)], tag: left });
    }
    let regions = vec![domain; elements.len()];
    Mesh::new(nodes, elements, regions, lines, tags)
}

/// Full annulus between `inner` and `outer` radius with `layers` radial
/// layers and `segments` nodes per ring.
///
/// Region `annulus`; boundaries `inner`, `outer`.
pub fn annulus(inner: f64, outer: f64, layers: usize, segments: usize) -> Result<Mesh> {
    if !(inner > 0.0 && outer > inner) || layers == 0 || segments < 3 {
        return Err(Error::InvalidArgument("annulus needs 0 < inner < outer, layers >= 1, segments >= 3".into()));
    }
    let mut tags = TagRegistry::new();
    let region = tags.declare(TagKind::Region, "annulus")?;
    let inner_tag = tags.declare(TagKind::Boundary, "inner")?;
    let outer_tag = tags.declare(TagKind::Boundary, "outer")?;

    let mut nodes = Vec::new();
    let mut rings = Vec::new();
    for k in 0..=layers {
        // Geometric spacing keeps cells near the inner ring roughly square.
        let r = inner * (outer / inner).powf(k as f64 / layers as f64);
        rings.push(ring(&mut nodes, r, segments, 0.0));
    }
    let mut elements = Vec::new();
    for k in 0..layers {
        stitch(&nodes, &rings[k], &rings[k + 1], &mut elements);
    }
    let mut lines = closed_loop(&rings[0], inner_tag);
    lines.extend(closed_loop(&rings[layers], outer_tag));
    let regions = vec![region; elements.len()];
    Mesh::new(nodes, elements, regions, lines, tags)
}

/// Disk of `radius` centred at the origin: a centre node surrounded by
/// `rings` rings, ring `k` holding `6k` nodes.
///
/// Region `disk`; boundary `rim`.
pub fn disk(radius: f64, rings: usize) -> Result<Mesh> {
    if !(radius > 0.0) || rings == 0 {
        return Err(Error::InvalidArgument("disk needs a positive radius and at least one ring".into()));
    }
    let mut tags = TagRegistry::new();
    let region = tags.declare(TagKind::Region, "disk")?;
    let rim = tags.declare(TagKind::Boundary, "rim")?;

    let mut nodes = vec![[0.0, 0.0]];
    let mut elements = Vec::new();
    let mut previous = ring(&mut nodes, radius / rings as f64, 6, 0.0);
    for k in 0..6 {
        elements.push([0, previous[k], previous[(k + 1) % 6]]);
    }
    for k in 2..=rings {
        let current = ring(&mut nodes, radius * k as f64 / rings as f64, 6 * k, 0.0);
        stitch(&nodes, &previous, &current, &mut elements);
        previous = current;
    }
    let lines = closed_loop(&previous, rim);
    let regions = vec![region; elements.len()];
    Mesh::new(nodes, elements, regions, lines, tags)
}

fn ring(nodes: &mut Vec<Point>, radius: f64, count: usize, offset: f64) -> Vec<usize> {
    (0..count)
        .map(|m| {
            let phi = offset + 2.0 * PI * m as f64 / count as f64;
            nodes.push([radius * phi.cos(), radius * phi.sin()]);
            nodes.len() - 1
        })
        .collect()
}

fn closed_loop(ring: &[usize], tag: super::TagId) -> Vec<TaggedLine> {
    (0..ring.len())
        .map(|k| TaggedLine {
            nodes: [ring[k], ring[(k + 1) % ring.len()]],
            tag,
        })
        .collect()
}

/// Triangulates the band between two closed, counterclockwise rings whose
/// first nodes sit at polar angle zero, always advancing along the ring
/// whose next node has the smaller angle.
fn stitch(nodes: &[Point], inner: &[usize], outer: &[usize], elements: &mut Vec<[usize; 3]>) {
    let angle = |ring: &[usize], k: usize| -> f64 {
        if k == ring.len() {
            return 2.0 * PI;
        }
        let p = nodes[ring[k]];
        let a = p[1].atan2(p[0]);
        if a < -1e-12 {
            a + 2.0 * PI
        } else {
            a.max(0.0)
        }
    };
    let (mut i, mut j) = (0, 0);
    while i < inner.len() || j < outer.len() {
        let next_inner = if i < inner.len() { angle(inner, i + 1) } else { f64::INFINITY };
        let next_outer = if j < outer.len() { angle(outer, j + 1) } else { f64::INFINITY };
        let (a, b) = (inner[i % inner.len()], outer[j % outer.len()]);
        if next_inner <= next_outer {
            elements.push([a, b, inner[(i + 1) % inner.len()]]);
            i += 1;
        } else {
            elements.push([a, b, outer[(j + 1) % outer.len()]]);
            j += 1;
        }
    }
}
