//! Steady-state cosine fits, amplitude/offset tables and run comparison.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};

use crate::actuation::{N_PROPS, ALPHA, BETA, OMEGA};
use crate::error::{Error, Result};
use crate::sim::RunRecord;

/// Start of the steady-state window used for the tables [s].
pub const STEADY_STATE_START: f64 = 10.0;
/// Normal-matrix condition number above which a fit is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// `x(t) ≈ amplitude · cos(frequency · t + phase) + offset`.
///
/// The phase is folded into `(−π/2, π/2]` and the sign carried by the
/// amplitude, so signals in antiphase get amplitudes of opposite sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineFit {
    pub amplitude: f64,
    pub offset: f64,
    pub phase: f64,
    pub frequency: f64,
    pub residual_rms: f64,
}

impl CosineFit {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitude: self.amplitude * factor,
            offset: self.offset * factor,
            residual_rms: self.residual_rms * factor.abs(),
            ..*self
        }
    }
}

/// Linear least squares on `{cos ωt, sin ωt, 1}` at a fixed frequency.
pub fn cosine_fit(times: &[f64], values: &[f64], frequency: f64) -> Result<CosineFit> {
    if times.len() != values.len() {
        return Err(Error::InsufficientData(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 samples, got {}", times.len())));
    }
    if !(frequency > 0.0) {
        return Err(Error::InvalidParameter(format!("fit frequency must be positive, got {frequency}")));
    }
    let (t_min, t_max) = times
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    let period = std::f64::consts::TAU / frequency;
    if t_max - t_min < period * (1.0 - 1e-9) {
        return Err(Error::InsufficientData(format!(
            "samples span {:.4} s, less than one period ({period:.4} s)",
            t_max - t_min
        )));
    }

    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (&t, &x) in times.iter().zip(values) {
        let (s, c) = (frequency * t).sin_cos();
        let phi = Vector3::new(c, s, 1.0);
        normal += phi * phi.transpose();
        rhs += phi * x;
    }
    let eig = normal.symmetric_eigen().eigenvalues;
    let condition = eig.max() / eig.min();
    if !(condition.is_finite() && condition > 0.0 && condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let coeffs = normal
        .cholesky()
        .ok_or(Error::IllConditioned(condition))?
        .solve(&rhs);
    let (a, b, offset) = (coeffs.x, coeffs.y, coeffs.z);

    let sq: f64 = times
        .iter()
        .zip(values)
        .map(|(&t, &x)| {
            let (s, c) = (frequency * t).sin_cos();
            (x - (a * c + b * s + offset)).powi(2)
        })
        .sum();

    // a cos + b sin = R cos(ωt + φ) with a = R cos φ, b = −R sin φ
    let radius = a.hypot(b);
    let mut phase = (-b).atan2(a);
    let mut amplitude = radius;
    let half = std::f64::consts::FRAC_PI_2;
    if phase > half {
        phase -= std::f64::consts::PI;
        amplitude = -radius;
    } else if phase <= -half {
        phase += std::f64::consts::PI;
        amplitude = -radius;
    }

    Ok(CosineFit {
        amplitude,
        offset,
        phase,
        frequency,
        residual_rms: (sq / times.len() as f64).sqrt(),
    })
}

/// Actuator variable block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Alpha,
    Beta,
    Omega,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Alpha, Block::Beta, Block::Omega];

    pub fn offset(self) -> usize {
        match self {
            Block::Alpha => ALPHA,
            Block::Beta => BETA,
            Block::Omega => OMEGA,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Block::Alpha => "alpha",
            Block::Beta => "beta",
            Block::Omega => "omega",
        }
    }

    /// Reporting unit: degrees for tilt angles, rad/s for spin rates.
    pub fn unit(self) -> &'static str {
        match self {
            Block::Omega => "rad/s",
            _ => "deg",
        }
    }

    fn scale(self) -> f64 {
        match self {
            Block::Omega => 1.0,
            _ => 180.0 / std::f64::consts::PI,
        }
    }
}

/// Fits for an opposite propeller pair `(i, i+3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFit {
    pub block: Block,
    /// Zero-based index of the first propeller (0, 1 or 2).
    pub first_index: usize,
    pub first: CosineFit,
    pub second: CosineFit,
}

impl PairFit {
    pub fn label(&self) -> String {
        let i = self.first_index + 1;
        format!("[{s}{i},{s}{}]", i + 3, s = self.block.symbol())
    }

    /// Largest deviation from `second = −first`, relative to the amplitude.
    pub fn antisymmetry_error(&self) -> f64 {
        let scale = self.first.amplitude.abs().max(self.second.amplitude.abs()).max(1e-12);
        let amp = (self.first.amplitude + self.second.amplitude).abs();
        let off = (self.first.offset + self.second.offset).abs();
        amp.max(off) / scale
    }
}

/// Per-record pair fits for every block.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTable {
    pub name: String,
    pub pairs: Vec<PairFit>,
}

impl RunTable {
    pub fn pair(&self, block: Block, first_index: usize) -> Option<&PairFit> {
        self.pairs.iter().find(|p| p.block == block && p.first_index == first_index)
    }

    pub fn block(&self, block: Block) -> impl Iterator<Item = &PairFit> {
        self.pairs.iter().filter(move |p| p.block == block)
    }

    /// All six fits of one block, propeller order.
    pub fn fits(&self, block: Block) -> Vec<CosineFit> {
        let mut out = vec![None; N_PROPS];
        for p in self.block(block) {
            out[p.first_index] = Some(p.first);
            out[p.first_index + 3] = Some(p.second);
        }
        out.into_iter().flatten().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub window_start: f64,
    pub frequency: f64,
    pub runs: Vec<RunTable>,
}

/// Fits every actuator component of one record over `[window_start, T]`.
pub fn run_table(record: &RunRecord, window_start: f64, frequency: f64) -> Result<RunTable> {
    let rows: Vec<_> = record.window(window_start).collect();
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let mut pairs = Vec::with_capacity(9);
    for block in Block::ALL {
        for i in 0..3 {
            let fit = |k: usize| -> Result<CosineFit> {
                let values: Vec<f64> = rows.iter().map(|r| r.actuators.0[block.offset() + k]).collect();
                Ok(cosine_fit(&times, &values, frequency)?.scaled(block.scale()))
            };
            pairs.push(PairFit { block, first_index: i, first: fit(i)?, second: fit(i + 3)? });
        }
    }
    Ok(RunTable { name: record.name.clone(), pairs })
}

/// Amplitude/offset table over several runs, one column per run.
pub fn table_report(records: &[RunRecord], window_start: f64, frequency: f64) -> Result<TableReport> {
    let runs = records
        .iter()
        .map(|r| run_table(r, window_start, frequency))
        .collect::<Result<Vec<_>>>()?;
    Ok(TableReport { window_start, frequency, runs })
}

impl TableReport {
    /// Aligned plain-text rendering, pairs as rows and runs as columns.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "steady-state cosine fit, window t >= {} s, frequency {} rad/s",
            self.window_start, self.frequency
        );
        let width = 34;
        let _ = write!(out, "{:<24}{:<8}", "pair", "");
        for run in &self.runs {
            let _ = write!(out, "{:>width$}", run.name);
        }
        out.push('\n');
        let Some(first) = self.runs.first() else { return out };
        for (k, pair) in first.pairs.iter().enumerate() {
            let label = format!("{} [{}]", pair.label(), pair.block.unit());
            for (what, get) in [
                ("amp", (|f: &CosineFit| f.amplitude) as fn(&CosineFit) -> f64),
                ("offset", |f: &CosineFit| f.offset),
            ] {
                let name = if what == "amp" { label.as_str() } else { "" };
                let _ = write!(out, "{name:<24}{what:<8}");
                for run in &self.runs {
                    let p = &run.pairs[k];
                    let cell = format!("[{:.4}, {:.4}]", get(&p.first), get(&p.second));
                    let _ = write!(out, "{cell:>width$}");
                }
                out.push('\n');
            }
        }
        out
    }

    /// One CSV row per (run, pair).
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "run",
            "pair",
            "unit",
            "amplitude_first",
            "amplitude_second",
            "offset_first",
            "offset_second",
            "phase_first",
            "phase_second",
            "residual_rms_first",
            "residual_rms_second",
        ])?;
        for run in &self.runs {
            for p in &run.pairs {
                w.write_record([
                    run.name.clone(),
                    p.label(),
                    p.block.unit().to_string(),
                    p.first.amplitude.to_string(),
                    p.second.amplitude.to_string(),
                    p.first.offset.to_string(),
                    p.second.offset.to_string(),
                    p.first.phase.to_string(),
                    p.second.phase.to_string(),
                    p.first.residual_rms.to_string(),
                    p.second.residual_rms.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `(t, J(sat x_a))` for every row.
pub fn objective_series(record: &RunRecord) -> Vec<(f64, f64)> {
    record.rows.iter().map(|r| (r.time, r.objective)).collect()
}

/// Trapezoidal time average of a series over `[start, end]`.
pub fn time_average(series: &[(f64, f64)], start: f64, end: f64) -> Option<f64> {
    let pts: Vec<_> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= start - 1e-9 && t <= end + 1e-9)
        .collect();
    if pts.len() < 2 {
        return pts.first().map(|p| p.1);
    }
    let area: f64 = pts.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    Some(area / (pts[pts.len() - 1].0 - pts[0].0))
}
