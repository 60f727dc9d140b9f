//! The command-line front end: outputs, determinism and exit codes.

use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[geometry]
element_size_m = 0.004
slot_count = 4
conductors_per_slot = 2
cage_bar_count = 4

[scenario]
t_end_s = 60.0
dt_s = 5.0
solver = "cholesky"
snapshot_every_steps = 6
"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_machtherm"))
        .args(["--config", path.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_is_deterministic_and_writes_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run(d.path(), SMALL, &["simulate"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join("out").join(f)).unwrap();
    for f in ["traces.csv", "groups.csv", "final_field.csv", "field_00001.vtk"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    let traces = String::from_utf8(read(&a, "traces.csv")).unwrap();
    assert!(traces.starts_with("time_s,probe_id,temperature_C\n"));
    let vtk = String::from_utf8(read(&a, "field_00001.vtk")).unwrap();
    assert!(vtk.contains("CELL_TYPES") && vtk.contains("SCALARS temperature double 1"));
    let manifest: serde_json::Value = serde_json::from_slice(&read(&a, "manifest.json")).unwrap();
    let other: serde_json::Value = serde_json::from_slice(&read(&b, "manifest.json")).unwrap();
    assert_eq!(manifest["config_sha256"], other["config_sha256"]);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn mesh_command_writes_readable_msh() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), SMALL, &["mesh"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mesh = machtherm::io::read_msh(&d.path().join("out/mesh.msh")).unwrap();
    assert!(mesh.element_count() > 100);

    // The written file can replace the parametric mesh.
    let config = format!("[geometry]\nmesh_file = {:?}\n", d.path().join("out/mesh.msh"));
    let o = run(d.path(), &format!("{config}\n[scenario]\nt_end_s = 10.0\ndt_s = 5.0\n"), &["simulate"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn analyze_and_calibrate_round_trip() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(d.path(), SMALL, &["simulate"]).status.success());
    let measured = d.path().join("measured.csv");
    std::fs::copy(d.path().join("out/groups.csv"), &measured).unwrap();

    let o = run(d.path(), SMALL, &["analyze", "--measured", measured.to_str().unwrap()]);
    // A one-minute cooldown never reaches the threshold: a numerical error.
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("analysis"), "{}", stderr(&o));

    let long = SMALL.replace("t_end_s = 60.0", "t_end_s = 1500.0").replace("dt_s = 5.0", "dt_s = 30.0");
    assert!(run(d.path(), &long, &["simulate"]).status.success());
    std::fs::copy(d.path().join("out/groups.csv"), &measured).unwrap();
    let o = run(d.path(), &long, &["analyze", "--measured", measured.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(d.path().join("out/time_constants.csv")).unwrap();
    assert!(table.starts_with("domain,initial_temperature_C,tau_meas_min,tau_sim_min,rel_error_percent\n"));
    assert!(table.contains("slot,93,"), "{table}");

    let fit = format!(
        "{long}\n[calibration]\nmax_evaluations = 200\nx_tolerance = 1e-3\nf_tolerance_C2 = 1e-6\n\
         [[calibration.parameters]]\nkind = \"conductivity\"\ntarget = \"stator_yoke\"\ninitial = 30.0\n"
    );
    let o = run(d.path(), &fit, &["calibrate", "--measured", measured.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let params = std::fs::read_to_string(d.path().join("out/parameters.csv")).unwrap();
    let value: f64 = params.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((value / 24.0 - 1.0).abs() < 0.01, "{params}");

    let starved = fit.replace("max_evaluations = 200", "max_evaluations = 3");
    let o = run(d.path(), &starved, &["calibrate", "--measured", measured.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn input_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "[scenario]\nt_end = 5.0\n", &["simulate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("config"), "{}", stderr(&o));

    let o = run(d.path(), "[geometry]\nslot_depth_m = 0.03\n", &["mesh"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mesh: infeasible geometry"), "{}", stderr(&o));

    let empty = d.path().join("empty.csv");
    std::fs::write(&empty, "time_s,probe_id,temperature_C\n").unwrap();
    let o = run(d.path(), SMALL, &["analyze", "--measured", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no samples"), "{}", stderr(&o));

    let nothing = format!("{SMALL}\n[calibration]\nparameters = []\n");
    let o = run(d.path(), &nothing, &["calibrate", "--measured", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(d.path(), SMALL, &["calibrate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--measured"), "{}", stderr(&o));
}

#[test]
fn dump_materials_lists_every_region() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "[materials]\nbase = \"literature\"\n", &["dump-materials"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("air_gap,literature,1210,0.026,"), "{text}");
    let o = run(d.path(), "", &["dump-materials"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("stator_yoke,fitted,3925000,40,24"));
}
