//! Properties of the parametric machine mesh.

use std::f64::consts::PI;

use machtherm_core::mesh::{build_machine_mesh, locate_probe, names, MachineGeometry, Mesh, TagKind};
use machtherm_core::Error;

fn region_area(mesh: &Mesh, name: &str) -> f64 {
    mesh.region_area(mesh.tags().require(name, TagKind::Region).unwrap())
}

fn region_at(mesh: &Mesh, p: [f64; 2]) -> String {
    let loc = locate_probe(mesh, p).unwrap();
    mesh.tags().name(mesh.element_region()[loc.element]).unwrap().to_string()
}

#[test]
fn level_one_machine() {
    let g = MachineGeometry::default();
    let mesh = build_machine_mesh(&g, 1).unwrap();
    let sector = g.sector_angle();

    // Polygonal arcs lose a little area; level 1 is within 0.5 %.
    let total = 0.5 * sector * g.stator_outer_radius.powi(2);
    assert!((mesh.total_area() - total).abs() < 5e-3 * total, "{} vs {total}", mesh.total_area());
    let gap = 0.5 * sector * (g.stator_inner_radius.powi(2) - g.rotor_yoke_outer_radius.powi(2));
    assert!((region_area(&mesh, names::AIR_GAP) - gap).abs() < 0.02 * gap);
    let shaft = 0.5 * sector * g.shaft_radius.powi(2);
    assert!((region_area(&mesh, names::SHAFT) - shaft).abs() < 5e-3 * shaft);
    for name in names::REGIONS {
        assert!(region_area(&mesh, name) > 0.0, "{name}");
    }

    for e in 0..mesh.element_count() {
        assert!(mesh.element_area(e) > 0.0);
    }
    for edge in mesh.boundary_edges() {
        let n = edge.normal;
        assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-12);
        // Outward: away from the adjacent element's centroid.
        let c = mesh.element_centroid(edge.element);
        let a = mesh.nodes()[edge.nodes[0]];
        assert!((a[0] - c[0]) * n[0] + (a[1] - c[1]) * n[1] > 0.0);
    }

    // Jacket edges lie on the outer circle, cut edges on the two cut lines.
    let jacket = mesh.tags().require(names::JACKET, TagKind::Boundary).unwrap();
    let cut = mesh.tags().require(names::SYMMETRY_CUT, TagKind::Boundary).unwrap();
    let mut jacket_length = 0.0;
    for edge in mesh.boundary_edges() {
        if edge.tag == jacket {
            jacket_length += mesh.edge_length(edge.nodes);
            for &v in &edge.nodes {
                let p = mesh.nodes()[v];
                // Refinement may split chords; split points sit within a sagitta.
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                assert!(r <= g.stator_outer_radius + 1e-12 && r > g.stator_outer_radius - 1e-5, "{r}");
            }
        } else if edge.tag == cut {
            for &v in &edge.nodes {
                let p = mesh.nodes()[v];
                let on_x = p[1].abs() < 1e-12;
                let on_y = p[0].abs() < 1e-12;
                assert!(on_x || on_y, "{p:?}");
            }
        }
    }
    assert!((jacket_length - sector * g.stator_outer_radius).abs() < 1e-3 * sector * g.stator_outer_radius);
    let shaft_tag = mesh.tags().require(names::SHAFT_SURFACE, TagKind::Boundary).unwrap();
    let shaft_length: f64 = mesh.edges_with_tag(shaft_tag).map(|e| mesh.edge_length(e)).sum();
    assert!((shaft_length - sector * g.shaft_radius).abs() < 1e-3 * sector * g.shaft_radius);

    assert_eq!(region_at(&mesh, g.upper_layer_probe()), names::CONDUCTOR_UPPER);
    assert_eq!(region_at(&mesh, g.lower_layer_probe()), names::CONDUCTOR_LOWER);
    assert_eq!(region_at(&mesh, g.stator_yoke_probe()), names::STATOR_YOKE);
    assert_eq!(region_at(&mesh, g.rotor_surface_probe()), names::ROTOR_YOKE);
    assert_eq!(region_at(&mesh, g.rotor_yoke_probe()), names::ROTOR_YOKE);
    assert_eq!(region_at(&mesh, g.shaft_probe()), names::SHAFT);
}

#[test]
fn refinement_grows_by_a_bounded_factor() {
    let g = MachineGeometry::default();
    let counts: Vec<usize> = (1..=3).map(|l| build_machine_mesh(&g, l).unwrap().element_count()).collect();
    for w in counts.windows(2) {
        let ratio = w[1] as f64 / w[0] as f64;
        assert!((3.0..=6.0).contains(&ratio), "{counts:?}");
    }
    // Level 2 resolves the section area within 1 %.
    let total = 0.5 * g.sector_angle() * g.stator_outer_radius.powi(2);
    let fine = build_machine_mesh(&g, 2).unwrap();
    assert!((fine.total_area() - total).abs() < 1e-2 * total);
}

#[test]
fn meshing_is_deterministic() {
    let g = MachineGeometry {
        element_size: 0.003,
        ..MachineGeometry::default()
    };
    assert_eq!(build_machine_mesh(&g, 1).unwrap(), build_machine_mesh(&g, 1).unwrap());
}

#[test]
fn other_fractions_and_minimal_geometry() {
    let half = MachineGeometry {
        model_fraction: 0.5,
        element_size: 0.003,
        ..MachineGeometry::default()
    };
    let mesh = build_machine_mesh(&half, 1).unwrap();
    let total = PI * 0.5 * half.stator_outer_radius.powi(2);
    assert!((mesh.total_area() - total).abs() < 5e-3 * total);

    let bare = MachineGeometry {
        slot_count: 4,
        conductors_per_slot: 1,
        cage_bar_count: 0,
        element_size: 0.004,
        ..MachineGeometry::default()
    };
    let mesh = build_machine_mesh(&bare, 1).unwrap();
    assert_eq!(region_area(&mesh, names::CAGE), 0.0);
    assert!(region_area(&mesh, names::CONDUCTOR_UPPER) > 0.0);
}

#[test]
fn infeasible_geometry_is_reported() {
    let cases = [
        MachineGeometry {
            air_gap_thickness: 0.001,
            ..MachineGeometry::default()
        },
        MachineGeometry {
            model_fraction: 0.3,
            ..MachineGeometry::default()
        },
        MachineGeometry {
            conductors_per_slot: 400,
            ..MachineGeometry::default()
        },
        MachineGeometry {
            stator_outer_radius: 0.06,
            ..MachineGeometry::default()
        },
    ];
    for g in cases {
        assert!(matches!(build_machine_mesh(&g, 1), Err(Error::InfeasibleGeometry(_))), "{g:?}");
    }
    assert!(build_machine_mesh(&MachineGeometry::default(), 0).is_err());
}
