//! Acceptance criteria 1-9, run in sequence so the calibration timing is
//! not disturbed by the other checks. Every criterion prints one line,
//! written straight to stderr so it shows even when output is captured.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use machtherm::config::{ParameterConfig, ParameterKind, ProbeGroup, RunConfig, SolverKind};
use machtherm::core::analysis::{relative_error, time_constant, REFERENCE_TIME_CONSTANTS};
use machtherm::core::fem::{assemble_mass, solve_steady, BoundarySpec, LinearSystem, RobinEntry, SourceSpec};
use machtherm::core::materials::{MaterialRegion, MaterialTable, Provenance};
use machtherm::core::mesh::{shapes, Mesh, TagId, TagKind, TaggedLine, TagRegistry};
use machtherm::core::schedule::Schedule;
use machtherm::core::solver::LinearSolver;
use machtherm::core::transient::{run_scenario, InitialCondition, Probe, ScenarioSpec, TemperatureTrace};
use machtherm::{io, pipeline};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, title: &str, outcome: &Outcome) {
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n} [{verdict}] {title}: {}", outcome.detail);
}

fn table(region: &str, c: f64, k: f64) -> MaterialTable {
    let mut t = MaterialTable::new();
    t.insert(region, MaterialRegion::isotropic(c, k), Provenance::User).unwrap();
    t
}

fn exponential(id: &str, tau: f64, t_init: f64, ambient: f64, t_end: f64) -> TemperatureTrace {
    let times: Vec<f64> = (0..=t_end as usize).map(|k| k as f64).collect();
    let temps = times.iter().map(|t| ambient + (t_init - ambient) * (-t / tau).exp()).collect();
    TemperatureTrace::new(id, times, temps).unwrap()
}

/// Published cooldown rows re-evaluated by the analysis pipeline.
fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slot_93 = f64::NAN;
    for row in REFERENCE_TIME_CONSTANTS {
        let mut config = RunConfig::default();
        config.scenario.initial_temperature_C = row.initial_temperature;
        let t_end = 6.0 * 60.0 * row.tau_meas_min.max(row.tau_sim_min);
        let measured = [exponential(row.domain, 60.0 * row.tau_meas_min, row.initial_temperature, 26.0, t_end)];
        let simulated = [exponential(row.domain, 60.0 * row.tau_sim_min, row.initial_temperature, 26.0, t_end)];
        let rows = pipeline::compare_time_constants(&config, &simulated, &measured).unwrap();
        let eps = rows[0].rel_error_percent;
        worst = worst.max((eps - row.rel_error_percent).abs());
        if row.initial_temperature == 93.0 && row.domain == "slot" {
            slot_93 = eps;
            let direct = 100.0 * relative_error(row.tau_meas_min, row.tau_sim_min).unwrap();
            assert!((direct - eps).abs() < 0.01);
        }
    }
    Outcome {
        pass: worst <= 0.4 && (slot_93 - 0.57).abs() < 0.005,
        detail: format!("worst |eps - stated| = {worst:.3} pp (limit 0.4); 93 °C slot eps = {slot_93:.3} %"),
    }
}

fn annulus_error(level: u32) -> f64 {
    let s = 1 << (level - 1);
    let mesh = shapes::annulus(0.02, 0.08, 8 * s, 48 * s).unwrap();
    let (ri, ro, ti, to) = (0.02, 0.08, 80.0, 20.0);
    let bc = BoundarySpec::new()
        .with_dirichlet("inner", Schedule::constant(ti))
        .with_dirichlet("outer", Schedule::constant(to));
    let system = LinearSystem::assemble(&mesh, &table("annulus", 1.0, 3.0), &bc, &SourceSpec::new(), 0.0).unwrap();
    let t = solve_steady(&system, LinearSolver::Cholesky).unwrap();
    let worst = mesh
        .nodes()
        .iter()
        .zip(&t)
        .map(|(p, v)| {
            let r = p[0].hypot(p[1]);
            (v - (ti + (to - ti) * (r / ri).ln() / (ro / ri).ln())).abs()
        })
        .fold(0.0, f64::max);
    worst / (ti - to)
}

/// L2 error of `u = sin(pi x) sin(pi y) + x y` on an `n` x `n` grid.
fn mms_error(n: usize) -> f64 {
    let k = 2.0;
    let mesh = shapes::rectangle(1.0, 1.0, n, n).unwrap();
    let exact = |p: &[f64; 2]| (PI * p[0]).sin() * (PI * p[1]).sin() + p[0] * p[1];
    let materials = table("domain", 1.0, k);
    let mut system = LinearSystem::assemble(&mesh, &materials, &BoundarySpec::new(), &SourceSpec::new(), 0.0).unwrap();
    let mass = assemble_mass(&mesh, &materials).unwrap();
    let f: Vec<f64> =
        mesh.nodes().iter().map(|p| 2.0 * k * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin()).collect();
    system.load = mass.mul_vec(&f);
    for name in ["bottom", "right", "top", "left"] {
        let tag = mesh.tags().require(name, TagKind::Boundary).unwrap();
        for node in mesh.nodes_with_tag(tag) {
            system.constrain(node, exact(&mesh.nodes()[node])).unwrap();
        }
    }
    let t = solve_steady(&system, LinearSolver::Cholesky).unwrap();
    let e: Vec<f64> = mesh.nodes().iter().zip(&t).map(|(p, v)| v - exact(p)).collect();
    e.iter().zip(mass.mul_vec(&e)).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

fn criterion_2() -> Outcome {
    let annulus = annulus_error(2);
    let errors: Vec<f64> = [8, 16, 32, 64].iter().map(|&n| mms_error(n)).collect();
    let order = errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);
    Outcome {
        pass: annulus < 1e-3 && order >= 1.8,
        detail: format!("annulus max error {annulus:.2e} x dT at level 2 (limit 1e-3); MMS order {order:.3} (min 1.8)"),
    }
}

fn criterion_3() -> Outcome {
    let (r, c, k, h) = (0.05, 4.0e6, 50.0, 20.0);
    let biot = h * r / k;
    let tau = c * r / (2.0 * h);
    let mesh = shapes::disk(r, 8).unwrap();
    let bc = BoundarySpec::new().with_robin("rim", RobinEntry::on_edges(h, Schedule::constant(20.0)));
    let scenario = ScenarioSpec {
        initial: InitialCondition::Uniform(80.0),
        t_end: 3.0 * tau,
        dt: 5.0,
        probes: vec![Probe::new("centre", [0.0, 0.0])],
        solver: LinearSolver::Cholesky,
        ..ScenarioSpec::default()
    };
    let result = run_scenario(&mesh, &table("disk", c, k), &bc, &scenario).unwrap();
    let fitted = time_constant(result.trace("centre").unwrap(), 80.0, 20.0).unwrap().tau;
    let err = (fitted - tau).abs() / tau;
    Outcome {
        pass: biot < 0.05 && err < 0.02,
        detail: format!("Bi = {biot:.3}, tau {fitted:.1} s vs lumped {tau:.1} s, error {:.3} % (limit 2 %)", 100.0 * err),
    }
}

fn criterion_4() -> Outcome {
    let worst = (0..=60)
        .map(|k| 60.0 * 60f64.powf(k as f64 / 60.0))
        .map(|tau| {
            let trace = exponential("x", tau, 93.0, 26.0, 5.0 * tau);
            ((time_constant(&trace, 93.0, 26.0).unwrap().tau - tau) / tau).abs()
        })
        .fold(0.0, f64::max);
    Outcome {
        pass: worst < 1e-3,
        detail: format!("worst relative error {:.2e} over tau in [60, 3600] s (limit 1e-3)", worst),
    }
}

/// Level-1 machine with fitted materials and the default probes.
fn machine_config() -> RunConfig {
    let mut c = RunConfig::default();
    c.scenario.solver = SolverKind::Cholesky;
    c
}

fn criterion_5(mesh: &Mesh) -> Outcome {
    let rise = |power: f64| {
        let mut c = machine_config();
        c.scenario.initial_temperature_C = 26.0;
        c.scenario.power_W = power;
        c.scenario.dt_s = 10.0;
        let sim = pipeline::simulate(&c, mesh).unwrap();
        let slot = sim.groups.iter().find(|g| g.probe_id == "slot").unwrap();
        slot.temperatures().last().unwrap() - 26.0
    };
    let (a, b) = (rise(200.0), rise(300.0));
    let ratio = b / a;
    let measured = 22.0 / 14.0;
    let band = 1.4..=1.65;
    Outcome {
        pass: (ratio - 1.5).abs() < 1e-8 && band.contains(&1.5) && band.contains(&measured),
        detail: format!(
            "slot rise {a:.3} K at 200 W, {b:.3} K at 300 W, ratio {ratio:.10}; measured 22/14 = {measured:.3} in [1.4, 1.65]"
        ),
    }
}

fn criterion_6(mesh: &Mesh) -> Outcome {
    let c = machine_config();
    let sim = pipeline::simulate(&c, mesh).unwrap();
    let tau = |name: &str| {
        let g = sim.groups.iter().find(|g| g.probe_id == name).unwrap();
        time_constant(g, 93.0, 26.0).unwrap().tau
    };
    let (yoke, slot, rotor) = (tau("stator_yoke"), tau("slot"), tau("rotor"));
    Outcome {
        pass: yoke < slot && slot < rotor,
        detail: format!("tau stator yoke {yoke:.1} s < slot {slot:.1} s < rotor {rotor:.1} s"),
    }
}

/// Synthetic measurements from the fitted model, refitted from literature values.
fn criterion_7(mesh: &Mesh) -> Outcome {
    let mut c = machine_config();
    c.scenario.dt_s = 10.0;
    c.probes.groups.push(ProbeGroup {
        name: "shaft".into(),
        members: vec!["shaft".into()],
        measured_id: None,
    });
    let truth = pipeline::simulate(&c, mesh).unwrap().groups;

    let mut fit = c.clone();
    fit.materials.base = machtherm::config::MaterialBase::Literature;
    fit.boundaries.robin_coefficient_W_per_mC = 0.1;
    fit.calibration.max_evaluations = 293; // checked between iterations; one costs at most 6 more
    fit.calibration.f_tolerance_C2 = 1e-10;
    fit.calibration.target_misfit_C2 = 1e-8;
    let expected = [24.0, 16.0, 0.052, 0.235];
    assert_eq!(fit.calibration.parameters.len(), 4);
    assert!(matches!(fit.calibration.parameters[3], ParameterConfig { kind: ParameterKind::Robin, .. }));

    let start = Instant::now();
    let problem = pipeline::calibration_problem(&fit, mesh, &truth).unwrap();
    let result = pipeline::calibrate(&fit, &problem).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let worst = result
        .params
        .iter()
        .zip(expected)
        .map(|(p, e)| (p / e - 1.0).abs())
        .fold(0.0, f64::max);
    Outcome {
        pass: worst < 0.02 && result.evaluations < 300 && elapsed < 600.0,
        detail: format!(
            "params {:?}, worst deviation {:.2} % (limit 2 %), {} evaluations (limit < 300), {elapsed:.0} s (limit 600)",
            result.params.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            100.0 * worst,
            result.evaluations
        ),
    }
}

fn criterion_8(mesh: &Mesh) -> Outcome {
    let mut c = machine_config();
    c.scenario.power_schedule = Some(vec![
        machtherm::config::PowerPoint { time_s: 0.0, power_W: 0.0 },
        machtherm::config::PowerPoint { time_s: 300.0, power_W: 300.0 },
        machtherm::config::PowerPoint { time_s: 900.0, power_W: 100.0 },
    ]);
    c.scenario.t_end_s = 1200.0;
    c.scenario.dt_s = 2.0;
    let sim = pipeline::simulate(&c, mesh).unwrap();
    let worst = sim.result.worst_balance();
    Outcome {
        pass: worst < 1e-8,
        detail: format!("worst relative heat-balance residual {worst:.2e} over {} steps (limit 1e-8)", sim.result.balances.len()),
    }
}

/// A jittered grid with boundary lines and an optional second region.
fn random_mesh(nx: usize, ny: usize, scale: f64, jitter: &[f64], split: usize) -> Mesh {
    let mut tags = TagRegistry::new();
    let a = tags.declare(TagKind::Region, "a").unwrap();
    let b = tags.declare(TagKind::Region, "b").unwrap();
    let edge = tags.declare(TagKind::Boundary, "edge").unwrap();
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let interior = i > 0 && j > 0 && i < nx && j < ny;
            // Below 1/(2√2) of a cell, so no triangle can fold over its diagonal.
            let w = if interior { 0.2 * jitter[(i + 7 * j) % jitter.len()] } else { 0.0 };
            nodes.push([scale * (i as f64 + w), scale * (j as f64 - w)]);
        }
    }
    let mut elements = Vec::new();
    let mut regions = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let r: TagId = if i < split { b } else { a };
            elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            elements.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            regions.extend([r, r]);
        }
    }
    let mut lines = Vec::new();
    for i in 0..nx {
        lines.push(TaggedLine { nodes: [id(i, 0), id(i + 1, 0)], tag: edge });
        lines.push(TaggedLine { nodes: [id(i + 1, ny), id(i, ny)], tag: edge });
    }
    Mesh::new(nodes, elements, regions, lines, tags).unwrap()
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.msh");
    let config = Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    let mut runner = TestRunner::new_with_rng(config, rng);
    let count = std::cell::Cell::new(0usize);
    let strategy = (1usize..10, 1usize..10, 1e-5..1e2f64, prop::collection::vec(-1.0..1.0f64, 1..16), 0usize..10);
    let result = runner.run(&strategy, |(nx, ny, scale, jitter, split)| {
        let mesh = random_mesh(nx, ny, scale, &jitter, split);
        io::write_msh(&path, &mesh).unwrap();
        let back = io::read_msh(&path).unwrap();
        count.set(count.get() + 1);
        prop_assert_eq!(back, mesh);
        Ok(())
    });
    Outcome {
        pass: result.is_ok() && count.get() >= 100,
        detail: match result {
            Ok(()) => format!("{} random meshes survived write/read unchanged", count.get()),
            Err(e) => format!("round trip broke: {e}"),
        },
    }
}

#[test]
fn acceptance_criteria() {
    let mesh = pipeline::load_mesh(&machine_config()).unwrap();
    let criteria: [(usize, &str, Box<dyn Fn() -> Outcome + '_>); 9] = [
        (1, "published relative errors", Box::new(criterion_1)),
        (2, "annulus profile and manufactured-solution order", Box::new(criterion_2)),
        (3, "lumped Robin disk time constant", Box::new(criterion_3)),
        (4, "time-constant extraction", Box::new(criterion_4)),
        (5, "linearity of the temperature rise in power", Box::new(|| criterion_5(&mesh))),
        (6, "time-constant ordering with fitted materials", Box::new(|| criterion_6(&mesh))),
        (7, "calibration recovers the fitted parameters", Box::new(|| criterion_7(&mesh))),
        (8, "backward-Euler heat balance", Box::new(|| criterion_8(&mesh))),
        (9, "MSH round trip of random meshes", Box::new(criterion_9)),
    ];
    let mut failed = Vec::new();
    for (n, title, check) in &criteria {
        let outcome = check();
        report(*n, title, &outcome);
        if !outcome.pass {
            failed.push(*n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
