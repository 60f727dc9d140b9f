//! Time-integration oracles: lumped cooling, temporal order, heat balance,
//! linearity in the source and stationarity of steady states.

use machtherm_core::analysis::time_constant;
use machtherm_core::fem::{BoundarySpec, RobinEntry, RobinPlacement};
use machtherm_core::materials::{literature_defaults, MaterialRegion, MaterialTable, Provenance};
use machtherm_core::mesh::{build_machine_mesh, names, shapes, MachineGeometry, Mesh};
use machtherm_core::schedule::Schedule;
use machtherm_core::solver::LinearSolver;
use machtherm_core::transient::{run_scenario, InitialCondition, Probe, ScenarioSpec};

fn table(region: &str, c: f64, k: f64) -> MaterialTable {
    let mut t = MaterialTable::new();
    t.insert(region, MaterialRegion::isotropic(c, k), Provenance::User).unwrap();
    t
}

// Disk of radius R with Biot number hR/k = 0.02: tau = c R / (2 h).
const R: f64 = 0.05;
const C: f64 = 4.0e6;
const K: f64 = 50.0;
const H: f64 = 20.0;

fn disk_cooldown(placement: RobinPlacement, dt: f64, theta: f64, t_end: f64) -> (Mesh, Vec<f64>, Vec<f64>) {
    disk_run(placement, dt, theta, t_end, Schedule::constant(20.0), 80.0)
}

fn disk_run(
    placement: RobinPlacement,
    dt: f64,
    theta: f64,
    t_end: f64,
    reference: Schedule,
    initial: f64,
) -> (Mesh, Vec<f64>, Vec<f64>) {
    let mesh = shapes::disk(R, 8).unwrap();
    let bc = BoundarySpec::new().with_robin(
        "rim",
        RobinEntry {
            coefficient: H,
            reference,
            placement,
        },
    );
    let scenario = ScenarioSpec {
        initial: InitialCondition::Uniform(initial),
        t_end,
        dt,
        theta,
        probes: vec![Probe::new("centre", [0.0, 0.0])],
        solver: LinearSolver::Cholesky,
        ..ScenarioSpec::default()
    };
    let r = run_scenario(&mesh, &table("disk", C, K), &bc, &scenario).unwrap();
    let trace = r.trace("centre").unwrap();
    (mesh, trace.times().to_vec(), trace.temperatures().to_vec())
}

#[test]
fn lumped_disk_time_constant() {
    let tau = C * R / (2.0 * H);
    assert!(H * R / K < 0.05);
    for placement in [RobinPlacement::Edges, RobinPlacement::Volume { region: "disk".into() }] {
        let (_, times, temps) = disk_cooldown(placement.clone(), 10.0, 1.0, 3.0 * tau);
        let trace = machtherm_core::transient::TemperatureTrace::new("c", times, temps).unwrap();
        let fitted = time_constant(&trace, 80.0, 20.0).unwrap().tau;
        assert!(((fitted - tau) / tau).abs() < 0.02, "{placement:?}: tau {fitted} vs {tau}");
    }
}

#[test]
fn temporal_convergence_orders() {
    // Heating from equilibrium by a ramped ambient: the data are compatible
    // at t = 0, so Crank-Nicolson is not spoiled by undamped stiff modes.
    let t_end = 2000.0;
    let ramp = Schedule::new(vec![(0.0, 20.0), (t_end, 80.0)]).unwrap();
    let run = |dt: f64, theta: f64| *disk_run(RobinPlacement::Edges, dt, theta, t_end, ramp.clone(), 20.0).2.last().unwrap();
    let last = run(0.5, 0.5);
    for (theta, min_order) in [(1.0, 0.9), (0.5, 1.8)] {
        let errors: Vec<f64> = [100.0, 50.0, 25.0]
            .iter()
            .map(|&dt| (run(dt, theta) - last).abs())
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > min_order, "theta {theta}: order {order:.3} from {errors:?}");
        }
    }
}

fn minimal_machine() -> (MachineGeometry, Mesh) {
    let g = MachineGeometry {
        slot_count: 4,
        conductors_per_slot: 2,
        cage_bar_count: 4,
        element_size: 0.003,
        ..MachineGeometry::default()
    };
    let mesh = build_machine_mesh(&g, 1).unwrap();
    (g, mesh)
}

fn machine_boundary(jacket: Schedule) -> BoundarySpec {
    BoundarySpec::new()
        .with_dirichlet(names::JACKET, jacket)
        .with_adiabatic(names::SYMMETRY_CUT)
        .with_robin(names::SHAFT_SURFACE, RobinEntry::on_edges(0.235, Schedule::constant(26.0)))
}

#[test]
fn heat_balance_closes_every_step() {
    let (g, mesh) = minimal_machine();
    let power = Schedule::new(vec![(0.0, 0.0), (100.0, 300.0), (400.0, 300.0), (500.0, 50.0)]).unwrap();
    let jacket = Schedule::new(vec![(0.0, 26.0), (300.0, 40.0)]).unwrap();
    for (theta, solver) in [
        (1.0, LinearSolver::Cholesky),
        (0.5, LinearSolver::Cholesky),
        (
            1.0,
            LinearSolver::ConjugateGradient {
                tolerance: 1e-12,
                max_iterations: 20_000,
            },
        ),
    ] {
        let scenario = ScenarioSpec {
            initial: InitialCondition::Uniform(60.0),
            power: power.clone(),
            t_end: 600.0,
            dt: 5.0,
            theta,
            probes: vec![Probe::new("slot", g.upper_layer_probe())],
            solver,
            ..ScenarioSpec::default()
        };
        let r = run_scenario(&mesh, &literature_defaults(), &machine_boundary(jacket.clone()), &scenario).unwrap();
        assert_eq!(r.balances.len(), 120);
        assert!(r.worst_balance() < 1e-8, "theta {theta}: {}", r.worst_balance());
    }
}

#[test]
fn rise_is_linear_in_power() {
    let (g, mesh) = minimal_machine();
    let rise = |power: f64| {
        let scenario = ScenarioSpec {
            initial: InitialCondition::Uniform(26.0),
            power: Schedule::constant(power),
            t_end: 900.0,
            dt: 10.0,
            probes: vec![Probe::new("slot", g.upper_layer_probe()), Probe::new("rotor", g.rotor_surface_probe())],
            solver: LinearSolver::Cholesky,
            ..ScenarioSpec::default()
        };
        let r = run_scenario(&mesh, &literature_defaults(), &machine_boundary(Schedule::constant(26.0)), &scenario)
            .unwrap();
        r.traces
            .iter()
            .map(|t| t.temperatures().last().unwrap() - 26.0)
            .collect::<Vec<f64>>()
    };
    let (a, b) = (rise(200.0), rise(300.0));
    for (x, y) in a.iter().zip(&b) {
        assert!(*x > 0.0);
        assert!((y / x - 1.5).abs() < 1e-8, "{y} / {x}");
    }
}

#[test]
fn steady_start_stays_steady() {
    let (g, mesh) = minimal_machine();
    let scenario = ScenarioSpec {
        initial: InitialCondition::Steady,
        power: Schedule::constant(150.0),
        t_end: 200.0,
        dt: 20.0,
        probes: vec![Probe::new("slot", g.upper_layer_probe())],
        solver: LinearSolver::Cholesky,
        ..ScenarioSpec::default()
    };
    let r = run_scenario(&mesh, &literature_defaults(), &machine_boundary(Schedule::constant(26.0)), &scenario).unwrap();
    let t = r.trace("slot").unwrap().temperatures();
    assert!(t[0] > 30.0);
    assert!(t.iter().all(|v| (v - t[0]).abs() < 1e-8 * t[0]), "{t:?}");
}

#[test]
fn equilibrium_is_preserved() {
    let (g, mesh) = minimal_machine();
    let scenario = ScenarioSpec {
        initial: InitialCondition::Uniform(26.0),
        t_end: 100.0,
        dt: 10.0,
        probes: vec![Probe::new("shaft", g.shaft_probe())],
        ..ScenarioSpec::default()
    };
    let r = run_scenario(&mesh, &literature_defaults(), &machine_boundary(Schedule::constant(26.0)), &scenario).unwrap();
    assert!(r.final_field.iter().all(|v| (v - 26.0).abs() < 1e-9));
}

#[test]
fn bad_scenarios_are_rejected() {
    let mesh = shapes::disk(1.0, 2).unwrap();
    let bc = BoundarySpec::new().with_dirichlet("rim", Schedule::constant(0.0));
    let m = table("disk", 1.0, 1.0);
    for s in [
        ScenarioSpec { dt: 0.0, ..ScenarioSpec::default() },
        ScenarioSpec { theta: 0.3, ..ScenarioSpec::default() },
        ScenarioSpec { t_end: 0.5, ..ScenarioSpec::default() },
    ] {
        assert!(run_scenario(&mesh, &m, &bc, &s).is_err());
    }
    let outside = ScenarioSpec {
        probes: vec![Probe::new("far", [5.0, 5.0])],
        t_end: 2.0,
        ..ScenarioSpec::default()
    };
    assert!(run_scenario(&mesh, &m, &bc, &outside).is_err());
}
