//! Files: CSV traces and reports, node fields, legacy VTK, MSH and the run
//! manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use machtherm_core::mesh::Mesh;
use machtherm_core::transient::TemperatureTrace;
use serde::{Deserialize, Serialize};

use crate::Error;

#[allow(non_snake_case)]
#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    time_s: f64,
    probe_id: String,
    temperature_C: f64,
}

/// Reads a long-format trace file (`time_s,probe_id,temperature_C`).
///
/// Traces come back in order of first appearance; each probe's rows must
/// have strictly increasing times.
pub fn read_traces(path: &Path) -> Result<Vec<TemperatureTrace>, Error> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_traces_from(file).map_err(|m| Error::input(path, m))
}

fn read_traces_from(reader: impl std::io::Read) -> Result<Vec<TemperatureTrace>, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut order: Vec<String> = Vec::new();
    let mut samples: std::collections::HashMap<String, (Vec<f64>, Vec<f64>)> = Default::default();
    for (k, row) in rdr.deserialize::<TraceRow>().enumerate() {
        let row = row.map_err(|e| format!("row {}: {e}", k + 2))?;
        let entry = samples.entry(row.probe_id.clone()).or_insert_with(|| {
            order.push(row.probe_id.clone());
            Default::default()
        });
        entry.0.push(row.time_s);
        entry.1.push(row.temperature_C);
    }
    if order.is_empty() {
        return Err("no samples".into());
    }
    order
        .into_iter()
        .map(|id| {
            let (t, v) = samples.remove(&id).unwrap_or_default();
            TemperatureTrace::new(id.clone(), t, v).map_err(|e| format!("probe `{id}`: {e}"))
        })
        .collect()
}

pub fn write_traces(path: &Path, traces: &[TemperatureTrace]) -> Result<(), Error> {
    let mut w = csv_writer(path)?;
    for trace in traces {
        for (&t, &v) in trace.times().iter().zip(trace.temperatures()) {
            w.serialize(TraceRow {
                time_s: t,
                probe_id: trace.probe_id.clone(),
                temperature_C: v,
            })
            .map_err(|e| Error::input(path, e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, Error> {
    csv::Writer::from_path(path).map_err(|e| Error::input(path, e.to_string()))
}

/// Writes `header` then `rows`, each already formatted as fields.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Error> {
    let mut w = csv_writer(path)?;
    let fail = |e: csv::Error| Error::input(path, e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `node_id,x,y,T` with node ids from 1, matching the MSH numbering.
pub fn write_node_field(path: &Path, mesh: &Mesh, values: &[f64]) -> Result<(), Error> {
    let rows: Vec<Vec<String>> = mesh
        .nodes()
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (p, v))| vec![(i + 1).to_string(), p[0].to_string(), p[1].to_string(), v.to_string()])
        .collect();
    write_table(path, &["node_id", "x", "y", "T"], &rows)
}

/// Legacy ASCII VTK unstructured grid with nodal temperature and the
/// region tag per cell.
pub fn write_vtk(path: &Path, mesh: &Mesh, values: &[f64], title: &str) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let n = mesh.node_count();
    let m = mesh.element_count();
    writeln!(w, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").map_err(io)?;
    writeln!(w, "POINTS {n} double").map_err(io)?;
    for p in mesh.nodes() {
        writeln!(w, "{} {} 0", p[0], p[1]).map_err(io)?;
    }
    writeln!(w, "CELLS {m} {}", 4 * m).map_err(io)?;
    for e in mesh.elements() {
        writeln!(w, "3 {} {} {}", e[0], e[1], e[2]).map_err(io)?;
    }
    writeln!(w, "CELL_TYPES {m}").map_err(io)?;
    for _ in 0..m {
        writeln!(w, "5").map_err(io)?;
    }
    writeln!(w, "POINT_DATA {n}\nSCALARS temperature double 1\nLOOKUP_TABLE default").map_err(io)?;
    for v in values {
        writeln!(w, "{v}").map_err(io)?;
    }
    writeln!(w, "CELL_DATA {m}\nSCALARS region int 1\nLOOKUP_TABLE default").map_err(io)?;
    for r in mesh.element_region() {
        writeln!(w, "{}", r.0).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_msh(path: &Path) -> Result<Mesh, Error> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    machtherm_core::mesh::parse_msh(&bytes).map_err(|e| Error::input(path, e.to_string()))
}

pub fn write_msh(path: &Path, mesh: &Mesh) -> Result<(), Error> {
    std::fs::write(path, machtherm_core::mesh::serialize_msh(mesh)).map_err(|e| Error::io(path, e))
}

/// Provenance of one command run, written as `manifest.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), Error> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traces_group_by_probe_in_order() {
        let text = "time_s,probe_id,temperature_C\n0,b,2\n0,a,1\n1,b,3\n1,a,0.5\n";
        let t = read_traces_from(text.as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].probe_id, "b");
        assert_eq!(t[1].temperatures(), &[1.0, 0.5]);
    }

    #[test]
    fn empty_and_malformed_files_fail() {
        assert!(read_traces_from("time_s,probe_id,temperature_C\n".as_bytes()).is_err());
        assert!(read_traces_from("".as_bytes()).is_err());
        let e = read_traces_from("time_s,probe_id,temperature_C\n0,a,x\n".as_bytes()).unwrap_err();
        assert!(e.contains("row 2"), "{e}");
        assert!(read_traces_from("time_s,probe_id,temperature_C\n1,a,1\n0,a,1\n".as_bytes()).is_err());
    }
}
