//! Analytic reference trajectories with exact first and second derivatives.

use nalgebra::Vector3;

use crate::controller::ReferenceSample;

/// Horizontal circle `r (cos c t, sin c t)` at a fixed altitude and attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleTrajectory {
    /// Radius [m].
    pub radius: f64,
    /// Angular rate [1/s].
    pub rate: f64,
    /// Altitude [m].
    pub altitude: f64,
    /// Constant attitude reference (roll, pitch, yaw) [rad].
    pub attitude: Vector3<f64>,
}

impl CircleTrajectory {
    pub fn new(radius: f64, rate: f64) -> Self {
        Self { radius, rate, altitude: 0.0, attitude: Vector3::zeros() }
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.rate.abs()
    }

    pub fn sample(&self, t: f64) -> ReferenceSample {
        let (s, c) = (self.rate * t).sin_cos();
        let (r, w) = (self.radius, self.rate);
        ReferenceSample {
            time: t,
            position: Vector3::new(r * c, r * s, self.altitude),
            velocity: Vector3::new(-r * w * s, r * w * c, 0.0),
            acceleration: Vector3::new(-r * w * w * c, -r * w * w * s, 0.0),
            euler: self.attitude,
            euler_rate: Vector3::zeros(),
            euler_accel: Vector3::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// Hold a fixed pose.
    Hover { position: Vector3<f64>, attitude: Vector3<f64> },
    /// Jump from one pose to another at `switch_time`; derivatives stay zero.
    Step {
        from: Vector3<f64>,
        to: Vector3<f64>,
        attitude: Vector3<f64>,
        switch_time: f64,
    },
    Circle(CircleTrajectory),
}

impl Reference {
    pub fn sample(&self, t: f64) -> ReferenceSample {
        match *self {
            Reference::Hover { position, attitude } => ReferenceSample::stationary(t, position, attitude),
            Reference::Step { from, to, attitude, switch_time } => {
                let p = if t < switch_time { from } else { to };
                ReferenceSample::stationary(t, p, attitude)
            }
            Reference::Circle(c) => c.sample(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn circle_start() {
        let s = CircleTrajectory::new(2.0, 0.8).sample(0.0);
        assert_relative_eq!(s.position, Vector3::new(2.0, 0.0, 0.0));
        assert_relative_eq!(s.velocity, Vector3::new(0.0, 1.6, 0.0), epsilon = 1e-15);
        assert_relative_eq!(s.acceleration, Vector3::new(-1.28, 0.0, 0.0), epsilon = 1e-15);
        assert_eq!(s.euler, Vector3::zeros());
    }

    #[test]
    fn zero_radius_is_hover() {
        let c = CircleTrajectory::new(0.0, 0.8);
        for t in [0.0, 1.3, 17.0] {
            let s = c.sample(t);
            assert_eq!(s.position.norm() + s.velocity.norm() + s.acceleration.norm(), 0.0);
        }
    }

    #[test]
    fn periodic() {
        let c = CircleTrajectory::new(2.0, 0.8);
        let a = c.sample(0.0);
        let b = c.sample(c.period());
        assert_relative_eq!(a.position, b.position, epsilon = 1e-12);
        assert_relative_eq!(a.velocity, b.velocity, epsilon = 1e-12);
        assert_relative_eq!(a.acceleration, b.acceleration, epsilon = 1e-12);
    }

    #[test]
    fn step_switches() {
        let r = Reference::Step {
            from: Vector3::zeros(),
            to: Vector3::new(1.0, 0.0, 0.0),
            attitude: Vector3::zeros(),
            switch_time: 1.0,
        };
        assert_eq!(r.sample(0.5).position, Vector3::zeros());
        assert_eq!(r.sample(1.0).position, Vector3::x());
        assert_eq!(r.sample(1.0).velocity, Vector3::zeros());
    }

    proptest! {
        #[test]
        fn radius_and_derivatives(t in 0.0..100.0f64, r in 0.0..5.0f64, w in 0.1..2.0f64) {
            let c = CircleTrajectory::new(r, w);
            let s = c.sample(t);
            prop_assert!((s.position.norm() - r).abs() < 1e-12);
            let h = 1e-5;
            let fd_v = (c.sample(t + h).position - c.sample(t - h).position) / (2.0 * h);
            let fd_a = (c.sample(t + h).velocity - c.sample(t - h).velocity) / (2.0 * h);
            // round-off in sin(ωt) grows with t
            let tol = 1e-9 * (1.0 + t) * (1.0 + r * w * w);
            prop_assert!((fd_v - s.velocity).norm() < tol);
            prop_assert!((fd_a - s.acceleration).norm() < tol);
        }
    }
}
