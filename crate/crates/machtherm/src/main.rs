use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use machtherm::core::materials::Conductivity;
use machtherm::core::mesh::Mesh;
use machtherm::io::{self, Manifest};
use machtherm::pipeline::{self, CONVERGENCE_HEADER, PARAMETER_HEADER, TIME_CONSTANT_HEADER};
use machtherm::{Error, RunConfig};

/// Transient thermal FEM of an induction-machine cross-section.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides calibration.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for batch objective evaluation (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh the machine (or read the configured MSH file) and write it out.
    Mesh,
    /// Run the configured scenario and write probe traces and fields.
    Simulate,
    /// Compare time constants of simulated and measured traces.
    Analyze {
        /// Simulated traces; the scenario is run when omitted.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        measured: PathBuf,
    },
    /// Fit effective parameters to measured traces.
    Calibrate {
        /// Overrides calibration.measured_csv.
        #[arg(long)]
        measured: Option<PathBuf>,
    },
    /// Print the material table in effect.
    DumpMaterials,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Mesh => "mesh",
            Command::Simulate => "simulate",
            Command::Analyze { .. } => "analyze",
            Command::Calibrate { .. } => "calibrate",
            Command::DumpMaterials => "dump-materials",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let start = Instant::now();
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.calibration.seed = seed;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    if let Command::DumpMaterials = cli.command {
        return dump_materials(&config);
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let outputs = match &cli.command {
        Command::Mesh => mesh(&config, &cli.out)?,
        Command::Simulate => simulate(&config, &cli.out)?,
        Command::Analyze { traces, measured } => analyze(&config, &cli.out, traces.as_deref(), measured)?,
        Command::Calibrate { measured } => calibrate(&config, &cli.out, measured.as_deref(), start)?,
        Command::DumpMaterials => unreachable!(),
    };
    manifest(&cli, &config, outputs, start).write(&cli.out)
}

fn manifest(cli: &Cli, config: &RunConfig, outputs: Vec<String>, start: Instant) -> Manifest {
    Manifest {
        command: cli.command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: config.hash(),
        seed: config.calibration.seed,
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
    }
}

fn describe(mesh: &Mesh) {
    log::info!("mesh: {} nodes, {} elements", mesh.node_count(), mesh.element_count());
    for region in mesh.used_regions() {
        let name = mesh.tags().name(region).unwrap_or("?");
        log::info!("  {name}: {:.6e} m²", mesh.region_area(region));
    }
}

fn mesh(config: &RunConfig, out: &Path) -> Result<Vec<String>, Error> {
    let mesh = pipeline::load_mesh(config)?;
    describe(&mesh);
    io::write_msh(&out.join("mesh.msh"), &mesh)?;
    Ok(vec!["mesh.msh".into()])
}

fn simulate(config: &RunConfig, out: &Path) -> Result<Vec<String>, Error> {
    let mesh = pipeline::load_mesh(config)?;
    describe(&mesh);
    let sim = pipeline::simulate(config, &mesh)?;
    log::info!("worst relative heat-balance residual {:.3e}", sim.result.worst_balance());
    let mut outputs = vec!["traces.csv".to_string(), "groups.csv".into(), "final_field.csv".into()];
    io::write_traces(&out.join("traces.csv"), &sim.result.traces)?;
    io::write_traces(&out.join("groups.csv"), &sim.groups)?;
    io::write_node_field(&out.join("final_field.csv"), &mesh, &sim.result.final_field)?;
    for (k, snap) in sim.result.snapshots.iter().enumerate() {
        let name = format!("field_{k:05}.csv");
        io::write_node_field(&out.join(&name), &mesh, &snap.values)?;
        outputs.push(name);
        if config.output.vtk {
            let name = format!("field_{k:05}.vtk");
            io::write_vtk(&out.join(&name), &mesh, &snap.values, &format!("t = {} s", snap.time))?;
            outputs.push(name);
        }
    }
    if config.output.mesh {
        io::write_msh(&out.join("mesh.msh"), &mesh)?;
        outputs.push("mesh.msh".into());
    }
    Ok(outputs)
}

fn analyze(config: &RunConfig, out: &Path, traces: Option<&Path>, measured: &Path) -> Result<Vec<String>, Error> {
    let measured = io::read_traces(measured)?;
    let simulated = match traces {
        Some(path) => {
            let traces = io::read_traces(path)?;
            // Accept either probe traces or already averaged groups.
            if config.probes.groups.iter().all(|g| traces.iter().any(|t| t.probe_id == g.name)) {
                traces
            } else {
                pipeline::group_traces(config, &traces)?
            }
        }
        None => pipeline::simulate(config, &pipeline::load_mesh(config)?)?.groups,
    };
    let rows = pipeline::compare_time_constants(config, &simulated, &measured)?;
    for r in &rows {
        println!(
            "{:<12} tau_meas {:>8.3} min  tau_sim {:>8.3} min  error {:>6.2} %",
            r.domain, r.tau_meas_min, r.tau_sim_min, r.rel_error_percent
        );
    }
    let fields: Vec<Vec<String>> = rows.iter().map(|r| r.fields()).collect();
    io::write_table(&out.join("time_constants.csv"), &TIME_CONSTANT_HEADER, &fields)?;
    Ok(vec!["time_constants.csv".into()])
}

fn calibrate(config: &RunConfig, out: &Path, measured: Option<&Path>, start: Instant) -> Result<Vec<String>, Error> {
    let path = measured
        .map(Path::to_path_buf)
        .or_else(|| config.calibration.measured_csv.clone())
        .ok_or_else(|| Error::Config("calibrate needs --measured or calibration.measured_csv".into()))?;
    let measured = io::read_traces(&path)?;
    let mesh = pipeline::load_mesh(config)?;
    describe(&mesh);
    let problem = pipeline::calibration_problem(config, &mesh, &measured)?;
    let result = pipeline::calibrate(config, &problem)?;
    for (name, v) in result.names.iter().zip(&result.params) {
        println!("{name:<28} {v:.6}");
    }
    println!(
        "misfit {:.3e} °C² (from {:.3e}) after {} evaluations, {:.1} s",
        result.misfit,
        result.initial_misfit,
        result.evaluations,
        start.elapsed().as_secs_f64()
    );
    io::write_table(&out.join("parameters.csv"), &PARAMETER_HEADER, &pipeline::parameter_rows(&problem, &result))?;
    io::write_table(&out.join("convergence.csv"), &CONVERGENCE_HEADER, &pipeline::convergence_rows(&result))?;
    if !result.converged {
        return Err(Error::NotConverged {
            evaluations: result.evaluations,
            misfit: result.misfit,
        });
    }
    Ok(vec!["parameters.csv".into(), "convergence.csv".into()])
}

fn dump_materials(config: &RunConfig) -> Result<(), Error> {
    let table = config.materials.table()?;
    println!("region,provenance,heat_capacity_J_per_m3C,conductivity_W_per_mC,effective_conductivity_W_per_mC");
    for (region, entry) in table.iter() {
        let m = entry.material;
        let k = match m.conductivity {
            Conductivity::Isotropic(k) => k.to_string(),
            Conductivity::Polar { radial, tangential } => format!("r{radial}/t{tangential}"),
        };
        let eff = m.effective_conductivity.map(|v| v.to_string()).unwrap_or_default();
        println!("{region},{},{},{k},{eff}", entry.provenance.as_str(), m.heat_capacity);
    }
    Ok(())
}
