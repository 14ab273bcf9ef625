//! Newton-Euler rigid-body dynamics written in Euler-rate coordinates.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::actuation::Wrench;
use crate::error::{Error, Result};

/// Below this `|cos θ|` the Euler-rate map is treated as singular.
pub const SINGULARITY_COS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformParams {
    /// Mass [kg].
    pub mass: f64,
    /// Inertia tensor about the CoM, body frame [kg m²].
    pub inertia: Matrix3<f64>,
    /// Gravitational acceleration [m/s²].
    pub gravity: f64,
}

impl PlatformParams {
    pub fn new(mass: f64, inertia: Matrix3<f64>, gravity: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if (inertia - inertia.transpose()).norm() > 1e-12 * inertia.norm() {
            return Err(Error::InvalidParameter("inertia tensor must be symmetric".into()));
        }
        if inertia.cholesky().is_none() {
            return Err(Error::InvalidParameter("inertia tensor must be positive definite".into()));
        }
        Ok(Self { mass, inertia, gravity })
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }
}

/// Position/velocity of the CoM in the world frame plus roll-pitch-yaw angles
/// and their rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlatformState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub euler: Vector3<f64>,
    pub euler_rate: Vector3<f64>,
}

impl PlatformState {
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self { position, ..Default::default() }
    }

    pub fn is_finite(&self) -> bool {
        [self.position, self.velocity, self.euler, self.euler_rate]
            .iter()
            .all(|v| v.iter().all(|c| c.is_finite()))
    }

    /// `self + h * d`, used by the integrator stages.
    pub fn advanced(&self, d: &PlatformDerivative, h: f64) -> Self {
        Self {
            position: self.position + d.velocity * h,
            velocity: self.velocity + d.acceleration * h,
            euler: self.euler + d.euler_rate * h,
            euler_rate: self.euler_rate + d.euler_accel * h,
        }
    }
}

/// Time derivative of a [`PlatformState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlatformDerivative {
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub euler_rate: Vector3<f64>,
    pub euler_accel: Vector3<f64>,
}

/// Body-to-world rotation `R_z(ψ) R_y(θ) R_x(ρ)` for `δ = (ρ, θ, ψ)`.
pub fn rotation_wb(euler: &Vector3<f64>) -> Matrix3<f64> {
    Rotation3::from_euler_angles(euler.x, euler.y, euler.z).into_inner()
}

/// `W(δ)` mapping Euler rates to body angular velocity.
pub fn euler_rate_matrix(euler: &Vector3<f64>) -> Matrix3<f64> {
    let (sr, cr) = euler.x.sin_cos();
    let (st, ct) = euler.y.sin_cos();
    Matrix3::new(
        1.0, 0.0, -st, //
        0.0, cr, ct * sr, //
        0.0, -sr, ct * cr,
    )
}

/// Time derivative of `W(δ)` along the Euler rates.
pub fn euler_rate_matrix_dot(euler: &Vector3<f64>, euler_rate: &Vector3<f64>) -> Matrix3<f64> {
    let (sr, cr) = euler.x.sin_cos();
    let (st, ct) = euler.y.sin_cos();
    let (dr, dt) = (euler_rate.x, euler_rate.y);
    Matrix3::new(
        0.0, 0.0, -ct * dt, //
        0.0, -sr * dr, -st * sr * dt + ct * cr * dr, //
        0.0, -cr * dr, -st * cr * dt - ct * sr * dr,
    )
}

pub(crate) fn check_chart(euler: &Vector3<f64>) -> Result<()> {
    let c = euler.y.cos();
    if c.abs() < SINGULARITY_COS || !c.is_finite() {
        return Err(Error::KinematicSingularity { cos_pitch: c.abs() });
    }
    Ok(())
}

/// State derivative of the platform under a body-frame wrench.
pub fn dynamics(state: &PlatformState, wrench: &Wrench, params: &PlatformParams) -> Result<PlatformDerivative> {
    check_chart(&state.euler)?;
    let r = rotation_wb(&state.euler);
    let acceleration = r * wrench.force / params.mass - Vector3::z() * params.gravity;

    let w = euler_rate_matrix(&state.euler);
    let w_dot = euler_rate_matrix_dot(&state.euler, &state.euler_rate);
    let omega = w * state.euler_rate;
    let j = &params.inertia;
    let omega_dot = j
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("singular inertia".into()))?
        * (wrench.torque - omega.cross(&(j * omega)));
    let euler_accel = w
        .try_inverse()
        .ok_or(Error::KinematicSingularity { cos_pitch: state.euler.y.cos().abs() })?
        * (omega_dot - w_dot * state.euler_rate);

    Ok(PlatformDerivative {
        velocity: state.velocity,
        acceleration,
        euler_rate: state.euler_rate,
        euler_accel,
    })
}
