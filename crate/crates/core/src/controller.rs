//! High-level tracking controller producing the commanded body wrench.
//!
//! With ideal actuation the closed loop reduces to decoupled second-order
//! error dynamics `ë + K_D ė + K_P e = 0` in position and Euler angles.

use nalgebra::{Matrix3, Vector3, Vector6};

use crate::actuation::Wrench;
use crate::dynamics::{check_chart, euler_rate_matrix, euler_rate_matrix_dot, rotation_wb, PlatformParams, PlatformState};
use crate::error::{Error, Result};

/// Diagonal PD gains for position and attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    pub kp: Vector3<f64>,
    pub kd: Vector3<f64>,
    pub kp_att: Vector3<f64>,
    pub kd_att: Vector3<f64>,
}

impl ControllerGains {
    pub fn new(kp: Vector3<f64>, kd: Vector3<f64>, kp_att: Vector3<f64>, kd_att: Vector3<f64>) -> Result<Self> {
        for (name, g) in [("kp", kp), ("kd", kd), ("kp_att", kp_att), ("kd_att", kd_att)] {
            if g.iter().any(|&k| !(k > 0.0)) {
                return Err(Error::InvalidParameter(format!("gain {name} must be positive, got {g:?}")));
            }
        }
        Ok(Self { kp, kd, kp_att, kd_att })
    }

    /// Same proportional and derivative gain on every axis.
    pub fn uniform(kp: f64, kd: f64) -> Result<Self> {
        let (p, d) = (Vector3::repeat(kp), Vector3::repeat(kd));
        Self::new(p, d, p, d)
    }
}

/// Desired pose and its first two derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub time: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub euler: Vector3<f64>,
    pub euler_rate: Vector3<f64>,
    pub euler_accel: Vector3<f64>,
}

impl ReferenceSample {
    pub fn stationary(time: f64, position: Vector3<f64>, euler: Vector3<f64>) -> Self {
        Self {
            time,
            position,
            velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
            euler,
            euler_rate: Vector3::zeros(),
            euler_accel: Vector3::zeros(),
        }
    }
}

/// Errors are reference minus state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingErrors {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub euler: Vector3<f64>,
    pub euler_rate: Vector3<f64>,
}

pub fn tracking_errors(state: &PlatformState, reference: &ReferenceSample) -> TrackingErrors {
    TrackingErrors {
        position: reference.position - state.position,
        velocity: reference.velocity - state.velocity,
        euler: reference.euler - state.euler,
        euler_rate: reference.euler_rate - state.euler_rate,
    }
}

/// Commanded wrench `u_v* = (f_c, τ_c)` in the body frame.
pub fn wrench_command(
    state: &PlatformState,
    reference: &ReferenceSample,
    gains: &ControllerGains,
    platform: &PlatformParams,
) -> Result<Wrench> {
    check_chart(&state.euler)?;
    let e = tracking_errors(state, reference);
    let r = rotation_wb(&state.euler);

    let accel = reference.acceleration
        + gains.kd.component_mul(&e.velocity)
        + gains.kp.component_mul(&e.position)
        + Vector3::z() * platform.gravity;
    let force = r.transpose() * accel * platform.mass;

    let j: &Matrix3<f64> = &platform.inertia;
    let w = euler_rate_matrix(&state.euler);
    let w_dot = euler_rate_matrix_dot(&state.euler, &state.euler_rate);
    let omega = w * state.euler_rate;
    let euler_accel =
        reference.euler_accel + gains.kd_att.component_mul(&e.euler_rate) + gains.kp_att.component_mul(&e.euler);
    let torque = j * w * euler_accel + j * w_dot * state.euler_rate + omega.cross(&(j * omega));

    Ok(Wrench::new(force, torque))
}

/// Causal estimate of the command rate by one-step backward difference.
#[derive(Debug, Clone)]
pub struct CommandDerivative {
    dt: f64,
    previous: Option<Vector6<f64>>,
}

impl CommandDerivative {
    pub fn new(dt: f64) -> Self {
        Self { dt, previous: None }
    }

    /// Feeds the newest command and returns the rate estimate; the first
    /// sample yields zero.
    pub fn update(&mut self, command: &Wrench) -> Wrench {
        let v = command.to_vector();
        let rate = match self.previous {
            Some(prev) => (v - prev) / self.dt,
            None => Vector6::zeros(),
        };
        self.previous = Some(v);
        Wrench::from_vector(&rate)
    }
}
