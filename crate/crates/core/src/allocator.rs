//! Dynamic control allocation.
//!
//! The actuator state integrates `ẋ = u_y − u_j`, where `u_y` imposes the
//! first-order wrench dynamics `u̇_v = γ_p (u_{v,c} − u_v)` and `u_j` descends
//! the secondary objective inside the null space of the effective output
//! Jacobian `M = ∇h(sat x) ∇sat(x)`, so it leaves the wrench untouched.

use nalgebra::{Matrix6, Vector6};

use crate::actuation::{
    sat_gradient_diag, total_wrench, wrench_jacobian, ActuatorState, Mat6x18, PropellerSet, SaturationBox, Vec18, N_ACT,
};
use crate::error::{Error, Result};
use crate::linalg::GramFactor;
use crate::objective::ObjectiveSpec;

/// Saturation-gradient value used outside the box unless configured otherwise.
pub const DEFAULT_SAT_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct AllocatorParams {
    gamma_p: f64,
    gamma_j: f64,
    gain: Matrix6<f64>,
    sat_eps: f64,
    objective: ObjectiveSpec,
}

impl AllocatorParams {
    /// Validates the gains; `−γ_p (I + K)` must be Hurwitz.
    pub fn new(gamma_p: f64, gamma_j: f64, gain: Matrix6<f64>, sat_eps: f64, objective: ObjectiveSpec) -> Result<Self> {
        if !(gamma_p > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_p must be positive, got {gamma_p}")));
        }
        if !(gamma_j >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_j must be non-negative, got {gamma_j}")));
        }
        if !(sat_eps > 0.0) {
            return Err(Error::InvalidParameter(format!("saturation epsilon must be positive, got {sat_eps}")));
        }
        let closed = -(Matrix6::identity() + gain) * gamma_p;
        let eig = closed.complex_eigenvalues();
        if let Some(bad) = eig.iter().find(|l| !(l.re < 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "wrench error dynamics A - BK not Hurwitz (eigenvalue {bad})"
            )));
        }
        Ok(Self { gamma_p, gamma_j, gain, sat_eps, objective })
    }

    pub fn gamma_p(&self) -> f64 {
        self.gamma_p
    }

    pub fn gamma_j(&self) -> f64 {
        self.gamma_j
    }

    pub fn gain(&self) -> &Matrix6<f64> {
        &self.gain
    }

    pub fn sat_eps(&self) -> f64 {
        self.sat_eps
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn with_gamma_j(&self, gamma_j: f64) -> Result<Self> {
        Self::new(self.gamma_p, gamma_j, self.gain, self.sat_eps, self.objective)
    }

    /// Convergence rate matrix of the wrench error, `A − BK`.
    pub fn error_dynamics(&self) -> Matrix6<f64> {
        -(Matrix6::identity() + self.gain) * self.gamma_p
    }
}

/// `u_{v,c} = u_v* + u̇_v*/γ_p − K (u_v − u_v*)`.
pub fn command_filter(command: &Vector6<f64>, command_rate: &Vector6<f64>, wrench: &Vector6<f64>, params: &AllocatorParams) -> Vector6<f64> {
    command + command_rate / params.gamma_p - params.gain * (wrench - command)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocatorDiagnostics {
    pub saturated: [bool; N_ACT],
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank_deficient: bool,
    pub norm_uy: f64,
    pub norm_uj: f64,
}

impl AllocatorDiagnostics {
    pub fn saturated_count(&self) -> usize {
        self.saturated.iter().filter(|&&s| s).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocatorOutput {
    /// Actuator control `u_a = u_y − u_j`.
    pub control: Vec18,
    pub u_y: Vec18,
    pub u_j: Vec18,
    /// Wrench currently produced, `h_a(sat x)`.
    pub wrench: Vector6<f64>,
    /// Filtered command `u_{v,c}`.
    pub filtered_command: Vector6<f64>,
    /// Effective output Jacobian `∇h(sat x) ∇sat(x)`.
    pub effective_jacobian: Mat6x18,
    pub diagnostics: AllocatorDiagnostics,
}

/// One evaluation of the allocation law.
pub fn allocator_step(
    x: &ActuatorState,
    command: &Vector6<f64>,
    command_rate: &Vector6<f64>,
    bounds: &SaturationBox,
    props: &PropellerSet,
    params: &AllocatorParams,
) -> AllocatorOutput {
    let gate = sat_gradient_diag(x, bounds, params.sat_eps);
    let jac = wrench_jacobian(x, bounds, props);
    let effective = Mat6x18::from_fn(|r, c| jac[(r, c)] * gate[c]);

    let wrench = total_wrench(x, bounds, props).to_vector();
    let filtered_command = command_filter(command, command_rate, &wrench, params);

    let pinv = GramFactor::new(&effective);
    let u_y = pinv.pinv_apply(&(filtered_command - wrench)) * params.gamma_p;

    let u_j = if params.gamma_j > 0.0 {
        let grad = params.objective.gradient(x).component_mul(&gate);
        pinv.project(&grad) * params.gamma_j
    } else {
        Vec18::zeros()
    };

    let diagnostics = AllocatorDiagnostics {
        saturated: bounds.saturation_flags(x),
        sigma_min: pinv.sigma_min,
        sigma_max: pinv.sigma_max,
        rank_deficient: pinv.rank_deficient,
        norm_uy: u_y.norm(),
        norm_uj: u_j.norm(),
    };

    AllocatorOutput {
        control: u_y - u_j,
        u_y,
        u_j,
        wrench,
        filtered_command,
        effective_jacobian: effective,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuation::{star_hexarotor, ALPHA, BETA, OMEGA};
    use crate::objective::{ObjectiveKind, ObjectiveWeights};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn setup(gamma_j: f64) -> (PropellerSet, SaturationBox, AllocatorParams) {
        let props = star_hexarotor(0.246, 8.59e-6, 1.37e-7).unwrap();
        let bounds = SaturationBox::hexarotor(&props, 30f64.to_radians(), 100.0, 1000.0).unwrap();
        let weights = ObjectiveWeights { alpha: 750.0, beta: 750.0, omega: 1.0 / 200.0 };
        let objective = ObjectiveSpec::new(ObjectiveKind::Symmetric, weights, &bounds).unwrap();
        let params = AllocatorParams::new(5.0, gamma_j, Matrix6::identity() * 3.0, DEFAULT_SAT_EPS, objective).unwrap();
        (props, bounds, params)
    }

    fn hover_spin() -> f64 {
        (2.0_f64 * 9.81 / (6.0 * 8.59e-6)).sqrt()
    }

    #[test]
    fn non_hurwitz_gain_rejected() {
        let (_, _, p) = setup(0.0);
        let bad = AllocatorParams::new(5.0, 0.0, Matrix6::identity() * -2.0, 1e-3, *p.objective());
        assert!(bad.is_err());
        // K = -0.5 I still leaves -γ_p(I + K) stable
        assert!(AllocatorParams::new(5.0, 0.0, Matrix6::identity() * -0.5, 1e-3, *p.objective()).is_ok());
        assert!(AllocatorParams::new(0.0, 0.0, Matrix6::identity(), 1e-3, *p.objective()).is_err());
    }

    #[test]
    fn filter_steady_state() {
        let (_, _, p) = setup(0.0);
        let u = Vector6::new(0.3, -0.2, 19.62, 0.01, 0.0, -0.02);
        assert_relative_eq!(command_filter(&u, &Vector6::zeros(), &u, &p), u, epsilon = 1e-15);
    }

    #[test]
    fn filter_error_rate() {
        // with u̇_v = γ_p (u_vc − u_v) the error decays at γ_p(1 + k) = 20
        let (_, _, p) = setup(0.0);
        let u = Vector6::new(0.0, 0.0, 19.62, 0.0, 0.0, 0.0);
        let e = Vector6::new(0.1, -0.2, 0.3, 0.01, 0.02, -0.03);
        let filtered = command_filter(&u, &Vector6::zeros(), &(u + e), &p);
        let err_rate = (filtered - (u + e)) * p.gamma_p();
        assert_relative_eq!(err_rate, -e * 20.0, epsilon = 1e-12);
        assert_relative_eq!(p.error_dynamics(), -Matrix6::identity() * 20.0);
    }

    #[test]
    fn filter_ramp_feedforward() {
        let (_, _, p) = setup(0.0);
        let u = Vector6::new(1.0, 2.0, 3.0, 0.1, 0.2, 0.3);
        let slope = Vector6::new(0.5, 0.0, -1.0, 0.0, 0.25, 0.0);
        assert_relative_eq!(command_filter(&u, &slope, &u, &p), u + slope / 5.0, epsilon = 1e-15);
    }

    #[test]
    fn idle_at_matched_wrench() {
        let (props, bounds, params) = setup(0.0);
        let x = ActuatorState::collinear(&props, hover_spin());
        let w = total_wrench(&x, &bounds, &props).to_vector();
        let out = allocator_step(&x, &w, &Vector6::zeros(), &bounds, &props, &params);
        assert!(out.control.norm() < 1e-9);
        assert_eq!(out.diagnostics.saturated_count(), 0);
    }

    #[test]
    fn tracking_term_imposes_first_order_dynamics() {
        let (props, bounds, params) = setup(0.0);
        let x = ActuatorState::collinear(&props, hover_spin());
        let target = Vector6::new(0.5, -0.3, 20.5, 0.02, -0.01, 0.03);
        let out = allocator_step(&x, &target, &Vector6::zeros(), &bounds, &props, &params);
        let wrench_rate = out.effective_jacobian * out.control;
        assert_relative_eq!(wrench_rate, (out.filtered_command - out.wrench) * 5.0, epsilon = 1e-9);
    }

    #[test]
    fn saturated_column_is_scaled() {
        let (props, bounds, params) = setup(10.0);
        let x = ActuatorState::collinear(&props, hover_spin());
        let mut sat = x;
        sat.0[BETA + 2] = 0.7;
        let mut clamped = x;
        clamped.0[BETA + 2] = 30f64.to_radians();
        let u = Vector6::new(0.0, 0.0, 19.62, 0.0, 0.0, 0.0);
        let a = allocator_step(&sat, &u, &Vector6::zeros(), &bounds, &props, &params);
        let b = allocator_step(&clamped, &u, &Vector6::zeros(), &bounds, &props, &params);
        for c in 0..N_ACT {
            let scale = if c == BETA + 2 { 1e-3 } else { 1.0 };
            for r in 0..6 {
                assert_relative_eq!(
                    a.effective_jacobian[(r, c)],
                    b.effective_jacobian[(r, c)] * scale,
                    epsilon = 1e-15
                );
            }
        }
        assert!(a.diagnostics.saturated[BETA + 2]);
        assert_eq!(a.diagnostics.saturated_count(), 1);
    }

    proptest! {
        #[test]
        fn optimization_term_stays_in_null_space(
            a in proptest::array::uniform6(-0.6..0.6f64),
            b in proptest::array::uniform6(-0.6..0.6f64),
            w in proptest::array::uniform6(50.0..1100.0f64),
            fz in 10.0..30.0f64,
        ) {
            let (props, bounds, params) = setup(10.0);
            let omega = std::array::from_fn(|i| props[i].spin.sign() * w[i]);
            let x = ActuatorState::from_parts(a, b, omega);
            let u = Vector6::new(0.2, 0.1, fz, 0.0, 0.01, 0.0);
            let out = allocator_step(&x, &u, &Vector6::zeros(), &bounds, &props, &params);
            prop_assume!(!out.diagnostics.rank_deficient);
            let grad = params.objective().gradient(&x);
            let leak = (out.effective_jacobian * out.u_j).norm();
            prop_assert!(leak <= 1e-9 * (params.gamma_j() * grad.norm()).max(1.0), "leak {}", leak);
            prop_assert!(out.control.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn zero_gamma_j_disables_optimization() {
        let (props, bounds, params) = setup(0.0);
        let mut x = ActuatorState::collinear(&props, 700.0);
        x.0[ALPHA] = 0.2;
        x.0[OMEGA + 3] = -650.0;
        let out = allocator_step(&x, &Vector6::new(0.0, 0.0, 19.62, 0.0, 0.0, 0.0), &Vector6::zeros(), &bounds, &props, &params);
        assert_eq!(out.u_j, Vec18::zeros());
    }
}
