use nalgebra::{SMatrix, Vector3};

use dualtilt::actuation::{total_wrench, wrench_jacobian, ActuatorState, ALPHA, BETA, N_ACT, N_PROPS, OMEGA};
use dualtilt::analysis::{table_report, TableReport};
use dualtilt::config::ScenarioConfig;
use dualtilt::error::{Error, Result};
use dualtilt::linalg::GramFactor;
use dualtilt::objective::ObjectiveKind;
use dualtilt::sim::{run, RunRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct CircleSettings {
    pub gamma_j: f64,
    pub objective: String,
    pub duration: f64,
    /// Keep every n-th sample for plotting.
    pub every: usize,
}

#[derive(Debug, Clone)]
pub struct CircleRun {
    pub times: Vec<f64>,
    pub actuators: Vec<[f64; N_ACT]>,
    pub position: Vec<Vector3<f64>>,
    pub objective: Vec<f64>,
    pub summary: String,
    record: RunRecord,
    frequency: f64,
}

pub fn objective_kind(name: &str) -> Result<ObjectiveKind> {
    match name {
        "symmetric" => Ok(ObjectiveKind::Symmetric),
        "alpha" => Ok(ObjectiveKind::Alpha),
        "beta" => Ok(ObjectiveKind::Beta),
        other => Err(Error::Config(format!("unknown objective {other:?}"))),
    }
}

pub fn simulate_circle(s: &CircleSettings) -> Result<CircleRun> {
    if !(s.duration > 0.0 && s.duration <= 60.0) {
        return Err(Error::Config(format!("duration must be in (0, 60] s, got {}", s.duration)));
    }
    let mut config = ScenarioConfig::circle(s.gamma_j, objective_kind(&s.objective)?);
    config.sim.duration = s.duration;
    let frequency = config.fit_frequency().unwrap_or(0.8);
    let record = run(&config.to_scenario()?).map_err(|a| a.error)?;

    let every = s.every.max(1);
    let last = record.len() - 1;
    let kept: Vec<_> = record.rows.iter().enumerate().filter(|(k, _)| k % every == 0 || *k == last).map(|(_, r)| r).collect();
    let max_ep = record.rows.iter().map(|r| r.position_error().norm()).fold(0.0, f64::max);
    let summary = format!(
        "{}: {} samples, max |e_p| {:.3e} m, final J {:.2}, {} integrator steps",
        record.name,
        record.len(),
        max_ep,
        record.rows[last].objective,
        record.stats.accepted
    );
    Ok(CircleRun {
        times: kept.iter().map(|r| r.time).collect(),
        actuators: kept.iter().map(|r| r.actuators.0.into()).collect(),
        position: kept.iter().map(|r| r.platform.position).collect(),
        objective: kept.iter().map(|r| r.objective).collect(),
        summary,
        record,
        frequency,
    })
}

impl CircleRun {
    /// Tilts in degrees, spins in rad/s.
    pub fn actuator(&self, block: usize, propeller: usize) -> Vec<f64> {
        let (offset, scale) = match block {
            0 => (ALPHA, 180.0 / std::f64::consts::PI),
            1 => (BETA, 180.0 / std::f64::consts::PI),
            _ => (OMEGA, 1.0),
        };
        let j = offset + propeller.min(N_PROPS - 1);
        self.actuators.iter().map(|x| x[j] * scale).collect()
    }

    pub fn report(&self, window: f64) -> Result<TableReport> {
        table_report(std::slice::from_ref(&self.record), window, self.frequency)
    }

    pub fn table(&self, window: f64) -> Result<String> {
        Ok(self.report(window)?.to_text())
    }
}

/// Wrench of the default hexarotor with all propellers at the same tilts and
/// spin magnitude (spin signs alternate), followed by the smallest singular
/// value of the wrench Jacobian.
pub fn explore_wrench(alpha_deg: f64, beta_deg: f64, spin: f64) -> [f64; 7] {
    let s = ScenarioConfig::default().to_scenario().expect("default scenario is valid");
    let x = uniform_state(alpha_deg, beta_deg, spin);
    let w = total_wrench(&x, &s.bounds, &s.props).to_vector();
    let jac: SMatrix<f64, 6, N_ACT> = wrench_jacobian(&x, &s.bounds, &s.props);
    let sigma = GramFactor::new(&jac).sigma_min;
    [w[0], w[1], w[2], w[3], w[4], w[5], sigma]
}

/// The actuator state the explorer evaluates, for tests and display.
pub fn uniform_state(alpha_deg: f64, beta_deg: f64, spin: f64) -> ActuatorState {
    let s = ScenarioConfig::default().to_scenario().expect("default scenario is valid");
    ActuatorState::from_parts(
        [alpha_deg.to_radians(); N_PROPS],
        [beta_deg.to_radians(); N_PROPS],
        std::array::from_fn(|i| s.props[i].spin.sign() * spin.abs()),
    )
}
