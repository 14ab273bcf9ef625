//! Config-to-artifacts plumbing shared by the command-line tool and tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::analysis::{objective_series, run_table, time_average, RunTable, TableReport};
use crate::config::{IntegratorName, ScenarioConfig};
use crate::error::{Error, Result};
use crate::record::save_record;
use crate::sim::{run, RunRecord};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "DUALTILT_OUT";

pub const RECORD_FILE: &str = "record.csv";
pub const TABLE_FILE: &str = "table.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ScenarioConfig) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("--dt must be positive, got {dt}")));
            }
            config.sim.dt = dt;
        }
        if let Some(t) = self.duration {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("--duration must be non-negative, got {t}")));
            }
            config.sim.duration = t;
        }
        Ok(())
    }
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub rows: usize,
    pub dt: f64,
    pub duration: f64,
    pub window_start: f64,
    pub max_position_error: f64,
    pub max_attitude_error: f64,
    pub max_wrench_error: f64,
    pub mean_objective: Option<f64>,
    pub saturated_rows: usize,
    pub rank_deficient_rows: usize,
    pub wall_time: Duration,
}

impl RunSummary {
    pub fn new(record: &RunRecord, window_start: f64, wall_time: Duration) -> Self {
        let end = record.rows.last().map_or(0.0, |r| r.time);
        let max = |f: &dyn Fn(&crate::sim::RecordRow) -> f64| record.window(window_start).map(f).fold(0.0, f64::max);
        Self {
            name: record.name.clone(),
            rows: record.len(),
            dt: record.dt,
            duration: end,
            window_start,
            max_position_error: max(&|r| r.position_error().norm()),
            max_attitude_error: max(&|r| r.attitude_error().norm()),
            max_wrench_error: max(&|r| r.wrench_error().norm()),
            mean_objective: time_average(&objective_series(record), window_start, end),
            saturated_rows: record.saturation_events(),
            rank_deficient_rows: record.rank_deficient_events(),
            wall_time,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario          {}", self.name);
        let _ = writeln!(s, "rows              {} (dt {} s, t_end {} s)", self.rows, self.dt, self.duration);
        let _ = writeln!(s, "wall time         {:.3} s", self.wall_time.as_secs_f64());
        let _ = writeln!(s, "window            t >= {} s", self.window_start);
        let _ = writeln!(s, "max |e_p|         {:.6e} m", self.max_position_error);
        let _ = writeln!(s, "max |e_delta|     {:.6e} rad", self.max_attitude_error);
        let _ = writeln!(s, "max |u_v - u_v*|  {:.6e}", self.max_wrench_error);
        match self.mean_objective {
            Some(j) => {
                let _ = writeln!(s, "mean J            {j:.6}");
            }
            None => {
                let _ = writeln!(s, "mean J            n/a");
            }
        }
        let _ = writeln!(s, "saturated rows    {}", self.saturated_rows);
        let _ = writeln!(s, "rank-deficient    {}", self.rank_deficient_rows);
        s
    }
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub record: RunRecord,
    pub summary: RunSummary,
    /// Present for periodic references whose run reaches past the window.
    pub table: Option<RunTable>,
    pub dir: PathBuf,
}

fn integrator_line(config: &ScenarioConfig, record: &RunRecord) -> String {
    let s = record.stats;
    match config.sim.integrator {
        IntegratorName::Rk4 => format!("integrator        rk4, {} sub-steps per sample\n", config.sim.substeps),
        name => format!(
            "integrator        {name:?} tol {:e}: {} accepted / {} rejected steps, {} evaluations\n",
            config.sim.tolerance, s.accepted, s.rejected, s.evaluations
        )
        .to_lowercase(),
    }
}

/// Runs one config and writes record, table and summary under
/// `out_root/<output.dir>`.
pub fn run_config(config: &ScenarioConfig, out_root: &Path) -> Result<RunArtifacts> {
    let scenario = config.to_scenario()?;
    let dir = config.output_dir(out_root);
    std::fs::create_dir_all(&dir)?;

    let start = Instant::now();
    let outcome = run(&scenario);
    let wall = start.elapsed();
    let (record, failure) = match outcome {
        Ok(r) => (r, None),
        Err(abort) => (abort.partial, Some(abort.error)),
    };
    save_record(&record, &dir.join(RECORD_FILE), config.output.record_every)?;

    let window = config.output.window_start;
    let summary = RunSummary::new(&record, window, wall);
    let mut text = summary.to_text();
    text.push_str(&integrator_line(config, &record));

    let end = record.rows.last().map_or(0.0, |r| r.time);
    let table = match (config.fit_frequency(), &failure) {
        (Some(freq), None) if end > window => match run_table(&record, window, freq) {
            Ok(t) => Some(t),
            Err(e) => {
                let _ = writeln!(text, "table             not produced: {e}");
                None
            }
        },
        _ => None,
    };
    if let Some(t) = &table {
        let report = TableReport { window_start: window, frequency: config.fit_frequency().unwrap_or_default(), runs: vec![t.clone()] };
        report.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join(TABLE_FILE))?))?;
        text.push('\n');
        text.push_str(&report.to_text());
    }
    if let Some(e) = &failure {
        let _ = writeln!(text, "ABORTED           {e}");
    }
    std::fs::write(dir.join(SUMMARY_FILE), &text)?;

    match failure {
        Some(e) => Err(e),
        None => Ok(RunArtifacts { record, summary, table, dir }),
    }
}

/// Config files (`*.toml`) in `dir`, sorted by name.
pub fn configs_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Runs every config concurrently, one thread per config. Results come back
/// in input order.
pub fn run_batch(configs: &[ScenarioConfig], out_root: &Path) -> Vec<Result<RunArtifacts>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_config(c, out_root))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Config("run thread panicked".into()))))
            .collect()
    })
}
