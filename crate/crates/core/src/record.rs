//! Record CSV files and run-to-run comparison.
//!
//! A record file starts with a `# dualtilt record v1 <name>` line followed by
//! an RFC 4180 table with the columns of [`columns`]. Angles are in radians,
//! spin rates in rad/s, everything else SI. Floats are written with Rust's
//! shortest round-trip formatting, so a written record reads back
//! bit-identical.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::{Vector3, Vector6};

use crate::actuation::{ActuatorState, Vec18, N_ACT, N_PROPS};
use crate::dynamics::PlatformState;
use crate::error::{Error, Result};
use crate::sim::{RecordRow, RunRecord};

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &str = "# dualtilt record v";

const WRENCH: [&str; 6] = ["fx", "fy", "fz", "tx", "ty", "tz"];

/// Column names, in file order.
pub fn columns() -> Vec<String> {
    let mut c: Vec<String> = vec!["t".into()];
    let xyz = |p: &str| ["x", "y", "z"].map(|a| format!("{p}{a}"));
    let rpy = |s: &str| ["roll", "pitch", "yaw"].map(|a| format!("{a}{s}"));
    c.extend(xyz("p"));
    c.extend(xyz("v"));
    c.extend(rpy(""));
    c.extend(rpy("_rate"));
    c.extend(xyz("pd_"));
    c.extend(rpy("_d"));
    for block in ["alpha", "beta", "omega"] {
        c.extend((1..=N_PROPS).map(|i| format!("{block}{i}")));
    }
    for prefix in ["cmd", "u", "uvc"] {
        c.extend(WRENCH.map(|w| format!("{prefix}_{w}")));
    }
    c.extend(["J", "norm_uy", "norm_uj", "sigma_min", "rank_deficient"].map(String::from));
    for block in ["alpha", "beta", "omega"] {
        c.extend((1..=N_PROPS).map(|i| format!("sat_{block}{i}")));
    }
    c
}

/// Index of the first wrench (`u_v`) column.
pub fn wrench_column() -> usize {
    columns().iter().position(|c| c == "u_fx").expect("schema has u_fx")
}

pub fn row_values(r: &RecordRow) -> Vec<f64> {
    let mut v = Vec::with_capacity(78);
    v.push(r.time);
    for vec3 in [
        &r.platform.position,
        &r.platform.velocity,
        &r.platform.euler,
        &r.platform.euler_rate,
        &r.reference_position,
        &r.reference_euler,
    ] {
        v.extend(vec3.iter());
    }
    v.extend(r.actuators.0.iter());
    for w in [&r.command, &r.wrench, &r.filtered_command] {
        v.extend(w.iter());
    }
    v.extend([r.objective, r.norm_uy, r.norm_uj, r.sigma_min, r.rank_deficient as u8 as f64]);
    v.extend(r.saturated.iter().map(|&s| s as u8 as f64));
    v
}

fn row_from_values(v: &[f64]) -> RecordRow {
    let v3 = |i: usize| Vector3::new(v[i], v[i + 1], v[i + 2]);
    let v6 = |i: usize| Vector6::from_column_slice(&v[i..i + 6]);
    let base = 19;
    RecordRow {
        time: v[0],
        platform: PlatformState { position: v3(1), velocity: v3(4), euler: v3(7), euler_rate: v3(10) },
        reference_position: v3(13),
        reference_euler: v3(16),
        actuators: ActuatorState(Vec18::from_column_slice(&v[base..base + N_ACT])),
        command: v6(base + 18),
        wrench: v6(base + 24),
        filtered_command: v6(base + 30),
        objective: v[base + 36],
        norm_uy: v[base + 37],
        norm_uj: v[base + 38],
        sigma_min: v[base + 39],
        rank_deficient: v[base + 40] != 0.0,
        saturated: std::array::from_fn(|i| v[base + 41 + i] != 0.0),
    }
}

/// Writes every `every`-th row (the last row is always kept).
pub fn write_record<W: Write>(record: &RunRecord, mut writer: W, every: usize) -> Result<()> {
    let every = every.max(1);
    writeln!(writer, "{MAGIC}{SCHEMA_VERSION} {}", record.name.replace(['\n', '\r'], " "))?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(columns())?;
    let last = record.rows.len().saturating_sub(1);
    let mut field = String::new();
    for (k, row) in record.rows.iter().enumerate() {
        if k % every != 0 && k != last {
            continue;
        }
        let fields: Vec<String> = row_values(row)
            .into_iter()
            .map(|x| {
                field.clear();
                let _ = write!(field, "{x}");
                field.clone()
            })
            .collect();
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_record(record: &RunRecord, path: &Path, every: usize) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_record(record, std::io::BufWriter::new(file), every)
}

pub fn read_record<R: Read>(reader: R) -> Result<RunRecord> {
    let mut reader = BufReader::new(reader);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let rest = first
        .trim_end()
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Record("missing record header line".into()))?;
    let (version, name) = rest.split_once(' ').unwrap_or((rest, ""));
    if version.parse::<u32>().ok() != Some(SCHEMA_VERSION) {
        return Err(Error::Record(format!("unsupported record version {version:?}")));
    }

    let mut r = csv::Reader::from_reader(reader);
    let expected = columns();
    let header = r.headers()?.clone();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != b) {
        return Err(Error::Record(format!(
            "column schema mismatch: expected {} columns starting t, px, ...; got {}",
            expected.len(),
            header.len()
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let values = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Record(format!("data row {}: {e}", line + 1)))?;
        rows.push(row_from_values(&values));
    }
    let dt = if rows.len() >= 2 { rows[1].time - rows[0].time } else { 0.0 };
    Ok(RunRecord { name: name.to_string(), dt, rows, ..Default::default() })
}

pub fn load_record(path: &Path) -> Result<RunRecord> {
    let file = std::fs::File::open(path)?;
    read_record(file).map_err(|e| match e {
        Error::Record(msg) => Error::Record(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDiff {
    pub name: String,
    pub max_abs: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub a: String,
    pub b: String,
    pub rows: usize,
    pub columns: Vec<ColumnDiff>,
    /// Largest `‖u_v,a − u_v,b‖` over the run and when it happened.
    pub wrench_max: f64,
    pub wrench_max_time: f64,
}

impl CompareReport {
    pub fn column(&self, name: &str) -> Option<&ColumnDiff> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "compare {} vs {} ({} rows)", self.a, self.b, self.rows);
        let _ = writeln!(
            out,
            "wrench max |u_a - u_b| = {:.3e} at t = {:.3} s",
            self.wrench_max, self.wrench_max_time
        );
        let _ = writeln!(out, "{:<16}{:>14}{:>14}", "column", "max_abs", "rms");
        for c in &self.columns {
            let _ = writeln!(out, "{:<16}{:>14.6e}{:>14.6e}", c.name, c.max_abs, c.rms);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["column", "max_abs", "rms"])?;
        for c in &self.columns {
            w.write_record([c.name.clone(), c.max_abs.to_string(), c.rms.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-column differences between two records on the same time grid.
pub fn compare_runs(a: &RunRecord, b: &RunRecord) -> Result<CompareReport> {
    if a.rows.len() != b.rows.len() {
        return Err(Error::GridMismatch(format!("{} rows vs {} rows", a.rows.len(), b.rows.len())));
    }
    if let Some((ra, rb)) = a.rows.iter().zip(&b.rows).find(|(ra, rb)| (ra.time - rb.time).abs() > 1e-9) {
        return Err(Error::GridMismatch(format!("sample at t = {} vs t = {}", ra.time, rb.time)));
    }
    let names = columns();
    let n = a.rows.len();
    let mut max_abs = vec![0.0f64; names.len()];
    let mut sq = vec![0.0f64; names.len()];
    let (mut wrench_max, mut wrench_max_time) = (0.0, 0.0);
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        for (k, (x, y)) in row_values(ra).iter().zip(row_values(rb)).enumerate() {
            let d = (x - y).abs();
            max_abs[k] = max_abs[k].max(d);
            sq[k] += d * d;
        }
        let dw = (ra.wrench - rb.wrench).norm();
        if dw > wrench_max {
            wrench_max = dw;
            wrench_max_time = ra.time;
        }
    }
    let columns = names
        .into_iter()
        .zip(max_abs.into_iter().zip(sq))
        .skip(1)
        .map(|(name, (m, s))| ColumnDiff { name, max_abs: m, rms: if n > 0 { (s / n as f64).sqrt() } else { 0.0 } })
        .collect();
    Ok(CompareReport { a: a.name.clone(), b: b.name.clone(), rows: n, columns, wrench_max, wrench_max_time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::sim::run;

    fn short_hover() -> RunRecord {
        let mut c = ScenarioConfig::hover();
        c.sim.duration = 0.05;
        run(&c.to_scenario().unwrap()).unwrap()
    }

    #[test]
    fn schema_width() {
        let c = columns();
        assert_eq!(c.len(), 78);
        assert_eq!(row_values(&short_hover().rows[0]).len(), c.len());
        assert_eq!(c[wrench_column()], "u_fx");
        let mut sorted = c.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), c.len(), "duplicate column names");
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let rec = short_hover();
        let mut buf = Vec::new();
        write_record(&rec, &mut buf, 1).unwrap();
        let back = read_record(buf.as_slice()).unwrap();
        assert_eq!(back.name, rec.name);
        assert_eq!(back.rows, rec.rows);
    }

    #[test]
    fn decimation_keeps_last_row() {
        let rec = short_hover();
        let mut buf = Vec::new();
        write_record(&rec, &mut buf, 20).unwrap();
        let back = read_record(buf.as_slice()).unwrap();
        let times: Vec<f64> = back.rows.iter().map(|r| r.time).collect();
        assert_eq!(times.len(), 4);
        assert_eq!(times.last(), rec.rows.last().map(|r| &r.time));
    }

    #[test]
    fn names_with_commas_survive() {
        let mut rec = short_hover();
        rec.name = "a, \"quoted\" run".into();
        let mut buf = Vec::new();
        write_record(&rec, &mut buf, 1).unwrap();
        assert_eq!(read_record(buf.as_slice()).unwrap().name, rec.name);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(matches!(read_record("t,x\n0,1\n".as_bytes()), Err(Error::Record(_))));
        assert!(matches!(read_record("# dualtilt record v9 x\nt\n".as_bytes()), Err(Error::Record(_))));
        assert!(matches!(read_record("# dualtilt record v1 x\nt,px\n0,0\n".as_bytes()), Err(Error::Record(_))));
    }

    #[test]
    fn compare_self_is_zero() {
        let rec = short_hover();
        let rep = compare_runs(&rec, &rec).unwrap();
        assert!(rep.columns.iter().all(|c| c.max_abs == 0.0 && c.rms == 0.0));
        assert_eq!(rep.wrench_max, 0.0);
        assert_eq!(rep.columns.len(), columns().len() - 1);
    }

    #[test]
    fn compare_detects_grid_mismatch() {
        let a = short_hover();
        let mut b = a.clone();
        b.rows.pop();
        assert!(matches!(compare_runs(&a, &b), Err(Error::GridMismatch(_))));
        let mut c = a.clone();
        c.rows[3].time += 1e-3;
        assert!(matches!(compare_runs(&a, &c), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn compare_reports_column_offsets() {
        let a = short_hover();
        let mut b = a.clone();
        for r in &mut b.rows {
            r.wrench[2] += 0.5;
            r.actuators.0[0] += 0.25;
        }
        let rep = compare_runs(&a, &b).unwrap();
        assert!((rep.column("u_fz").unwrap().max_abs - 0.5).abs() < 1e-12);
        assert!((rep.column("alpha1").unwrap().rms - 0.25).abs() < 1e-12);
        assert!((rep.wrench_max - 0.5).abs() < 1e-12);
        assert_eq!(rep.column("px").unwrap().max_abs, 0.0);
    }
}
