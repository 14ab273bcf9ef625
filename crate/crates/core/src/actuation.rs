//! Propeller geometry, wrench synthesis and the saturation operators of the
//! 18-state actuator system.
//!
//! The actuator state is laid out as `(α₁..α₆, β₁..β₆, ω₁..ω₆)`: cant angles,
//! dihedral angles and signed spin rates. Every Jacobian in the crate uses the
//! same column ordering.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SMatrix, SVector, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of propellers on the star-shaped hexarotor.
pub const N_PROPS: usize = 6;
/// Dimension of the actuator state.
pub const N_ACT: usize = 3 * N_PROPS;

pub type Vec18 = SVector<f64, N_ACT>;
pub type Mat6x18 = SMatrix<f64, 6, N_ACT>;
pub type Mat18 = SMatrix<f64, N_ACT, N_ACT>;

/// Offset of the cant-angle block in the state vector.
pub const ALPHA: usize = 0;
/// Offset of the dihedral-angle block.
pub const BETA: usize = N_PROPS;
/// Offset of the spin-rate block.
pub const OMEGA: usize = 2 * N_PROPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinDirection {
    Ccw,
    Cw,
}

impl SpinDirection {
    /// `+1` for counter-clockwise, `-1` for clockwise propellers.
    pub fn sign(self) -> f64 {
        match self {
            SpinDirection::Ccw => 1.0,
            SpinDirection::Cw => -1.0,
        }
    }

    /// Odd-numbered propellers (1-based) spin counter-clockwise.
    pub fn alternating(index: usize) -> Self {
        if index.is_multiple_of(2) {
            SpinDirection::Ccw
        } else {
            SpinDirection::Cw
        }
    }
}

/// Geometry and aerodynamic coefficients of one propeller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropellerParams {
    /// Zero-based propeller index.
    pub index: usize,
    /// Arm angle about the body z axis [rad].
    pub arm_angle: f64,
    /// Arm length [m].
    pub arm_length: f64,
    /// Thrust coefficient [N s²].
    pub force_coeff: f64,
    /// Drag torque coefficient [N m s²].
    pub drag_coeff: f64,
    pub spin: SpinDirection,
}

pub type PropellerSet = [PropellerParams; N_PROPS];

/// Builds the six propellers of a star-shaped hexarotor: arms every 60°, the
/// first aligned with body x, alternating spin directions starting with CCW.
pub fn star_hexarotor(arm_length: f64, force_coeff: f64, drag_coeff: f64) -> Result<PropellerSet> {
    if !(arm_length > 0.0 && force_coeff > 0.0 && drag_coeff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "propeller constants must be positive (l={arm_length}, c_f={force_coeff}, c_tau={drag_coeff})"
        )));
    }
    Ok(std::array::from_fn(|i| PropellerParams {
        index: i,
        arm_angle: i as f64 * PI / 3.0,
        arm_length,
        force_coeff,
        drag_coeff,
        spin: SpinDirection::alternating(i),
    }))
}

/// Body-frame wrench: force [N] and torque [N m].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Self {
        Self { force, torque }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            force: v.fixed_rows::<3>(0).into_owned(),
            torque: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    /// Stacked `(f, τ)` 6-vector.
    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.force);
        v.fixed_rows_mut::<3>(3).copy_from(&self.torque);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|c| c.is_finite())
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.torque + rhs.torque)
    }
}

impl std::ops::Sub for Wrench {
    type Output = Wrench;
    fn sub(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force - rhs.force, self.torque - rhs.torque)
    }
}

impl std::iter::Sum for Wrench {
    fn sum<I: Iterator<Item = Wrench>>(iter: I) -> Wrench {
        iter.fold(Wrench::zero(), |acc, w| acc + w)
    }
}

/// The 18-component actuator state `(α, β, ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorState(pub Vec18);

impl ActuatorState {
    pub fn from_parts(alpha: [f64; N_PROPS], beta: [f64; N_PROPS], omega: [f64; N_PROPS]) -> Self {
        let mut v = Vec18::zeros();
        for i in 0..N_PROPS {
            v[ALPHA + i] = alpha[i];
            v[BETA + i] = beta[i];
            v[OMEGA + i] = omega[i];
        }
        Self(v)
    }

    /// All tilts zero, every propeller spinning at `magnitude` in its own
    /// direction.
    pub fn collinear(props: &PropellerSet, magnitude: f64) -> Self {
        let omega = std::array::from_fn(|i| props[i].spin.sign() * magnitude);
        Self::from_parts([0.0; N_PROPS], [0.0; N_PROPS], omega)
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.0[ALPHA + i]
    }

    pub fn beta(&self, i: usize) -> f64 {
        self.0[BETA + i]
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.0[OMEGA + i]
    }

    pub fn as_vector(&self) -> &Vec18 {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

/// Per-component lower/upper bounds on the actuator state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationBox {
    lower: Vec18,
    upper: Vec18,
}

impl SaturationBox {
    pub fn new(lower: Vec18, upper: Vec18) -> Result<Self> {
        for j in 0..N_ACT {
            if !(lower[j] < upper[j]) {
                return Err(Error::InvalidParameter(format!(
                    "saturation bound {j}: lower {} must be below upper {}",
                    lower[j], upper[j]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Symmetric tilt bounds `±tilt` [rad] and spin magnitudes in
    /// `[spin_min, spin_max]`; the signed spin interval follows each
    /// propeller's direction, so a propeller can never reverse.
    pub fn hexarotor(props: &PropellerSet, tilt: f64, spin_min: f64, spin_max: f64) -> Result<Self> {
        Self::hexarotor_asymmetric(props, tilt, tilt, spin_min, spin_max)
    }

    /// Like [`SaturationBox::hexarotor`] with independent bounds for the cant
    /// and dihedral angles.
    pub fn hexarotor_asymmetric(
        props: &PropellerSet,
        alpha_max: f64,
        beta_max: f64,
        spin_min: f64,
        spin_max: f64,
    ) -> Result<Self> {
        if !(spin_min >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spin magnitude lower bound must be non-negative, got {spin_min}"
            )));
        }
        let mut lower = Vec18::zeros();
        let mut upper = Vec18::zeros();
        for (i, p) in props.iter().enumerate() {
            lower[ALPHA + i] = -alpha_max;
            upper[ALPHA + i] = alpha_max;
            lower[BETA + i] = -beta_max;
            upper[BETA + i] = beta_max;
            match p.spin {
                SpinDirection::Ccw => {
                    lower[OMEGA + i] = spin_min;
                    upper[OMEGA + i] = spin_max;
                }
                SpinDirection::Cw => {
                    lower[OMEGA + i] = -spin_max;
                    upper[OMEGA + i] = -spin_min;
                }
            }
        }
        Self::new(lower, upper)
    }

    pub fn lower(&self) -> &Vec18 {
        &self.lower
    }

    pub fn upper(&self) -> &Vec18 {
        &self.upper
    }

    pub fn midpoint(&self) -> Vec18 {
        (self.upper + self.lower) * 0.5
    }

    pub fn width(&self) -> Vec18 {
        self.upper - self.lower
    }

    /// Whether component `j` of `x` lies on the closed interval.
    pub fn contains_component(&self, j: usize, value: f64) -> bool {
        self.lower[j] <= value && value <= self.upper[j]
    }

    pub fn is_admissible(&self, x: &ActuatorState) -> bool {
        (0..N_ACT).all(|j| self.contains_component(j, x.0[j]))
    }

    /// Flags for components lying outside their interval.
    pub fn saturation_flags(&self, x: &ActuatorState) -> [bool; N_ACT] {
        std::array::from_fn(|j| !self.contains_component(j, x.0[j]))
    }
}

/// Componentwise clamp onto the box.
pub fn saturate(x: &ActuatorState, bounds: &SaturationBox) -> ActuatorState {
    ActuatorState(Vec18::from_fn(|j, _| x.0[j].clamp(bounds.lower[j], bounds.upper[j])))
}

/// Diagonal of the ε-regularized saturation gradient: 1 on the closed
/// interval, `eps` outside.
pub fn sat_gradient_diag(x: &ActuatorState, bounds: &SaturationBox, eps: f64) -> Vec18 {
    Vec18::from_fn(|j, _| if bounds.contains_component(j, x.0[j]) { 1.0 } else { eps })
}

/// The saturation gradient as a full 18×18 diagonal matrix.
pub fn sat_gradient(x: &ActuatorState, bounds: &SaturationBox, eps: f64) -> Mat18 {
    Mat18::from_diagonal(&sat_gradient_diag(x, bounds, eps))
}

fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Tilted spin axis before the arm rotation, `R_y(β) R_x(α) ê₃`, and its
/// partial derivatives with respect to α and β.
fn local_axis(alpha: f64, beta: f64) -> [Vector3<f64>; 3] {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    [
        Vector3::new(sb * ca, -sa, cb * ca),
        Vector3::new(-sb * sa, -ca, -cb * sa),
        Vector3::new(cb * ca, 0.0, -sb * ca),
    ]
}

/// Propeller centre `p_i` and unit spin axis `z_i` in the body frame.
pub fn propeller_pose(params: &PropellerParams, alpha: f64, beta: f64) -> (Vector3<f64>, Vector3<f64>) {
    let rz = rot_z(params.arm_angle);
    let position = rz * Vector3::new(params.arm_length, 0.0, 0.0);
    let [axis, _, _] = local_axis(alpha, beta);
    (position, rz * axis)
}

/// Force and torque of a single propeller about the body origin.
///
/// Thrust is `c_f ω²` along `+z_i` regardless of spin direction; the drag
/// torque `-c_τ ω|ω| z_i` takes its sign from the signed spin rate.
pub fn propeller_wrench(params: &PropellerParams, alpha: f64, beta: f64, omega: f64) -> Wrench {
    let (p, z) = propeller_pose(params, alpha, beta);
    let force = z * (params.force_coeff * omega * omega);
    let torque = -z * (params.drag_coeff * omega * omega.abs()) + p.cross(&force);
    Wrench::new(force, torque)
}

/// Wrench produced by the saturated state, `h_a(sat(x))`.
pub fn total_wrench(x: &ActuatorState, bounds: &SaturationBox, props: &PropellerSet) -> Wrench {
    let xs = saturate(x, bounds);
    raw_wrench(&xs, props)
}

/// Wrench of a state taken as-is (no saturation).
pub fn raw_wrench(x: &ActuatorState, props: &PropellerSet) -> Wrench {
    props
        .iter()
        .map(|p| propeller_wrench(p, x.alpha(p.index), x.beta(p.index), x.omega(p.index)))
        .sum()
}

/// Analytic Jacobian of the output map `h_a` evaluated at `sat(x)`.
///
/// The ∇sat gating is not included; the allocator applies it separately.
pub fn wrench_jacobian(x: &ActuatorState, bounds: &SaturationBox, props: &PropellerSet) -> Mat6x18 {
    let xs = saturate(x, bounds);
    let mut jac = Mat6x18::zeros();
    for p in props {
        let i = p.index;
        let (alpha, beta, omega) = (xs.alpha(i), xs.beta(i), xs.omega(i));
        let rz = rot_z(p.arm_angle);
        let pos = rz * Vector3::new(p.arm_length, 0.0, 0.0);
        let [axis, d_alpha, d_beta] = local_axis(alpha, beta).map(|v| rz * v);

        let thrust = p.force_coeff * omega * omega;
        let drag = p.drag_coeff * omega * omega.abs();

        let mut set_col = |col: usize, df: Vector3<f64>, dt: Vector3<f64>| {
            jac.fixed_view_mut::<3, 1>(0, col).copy_from(&df);
            jac.fixed_view_mut::<3, 1>(3, col).copy_from(&dt);
        };

        for (col, dz) in [(ALPHA + i, d_alpha), (BETA + i, d_beta)] {
            let df = dz * thrust;
            set_col(col, df, -dz * drag + pos.cross(&df));
        }
        let df = axis * (2.0 * p.force_coeff * omega);
        let dt = -axis * (2.0 * p.drag_coeff * omega.abs()) + pos.cross(&df);
        set_col(OMEGA + i, df, dt);
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const CF: f64 = 8.59e-6;
    const CT: f64 = 1.37e-7;
    const ARM: f64 = 0.246;

    fn props() -> PropellerSet {
        star_hexarotor(ARM, CF, CT).unwrap()
    }

    fn default_box() -> SaturationBox {
        SaturationBox::hexarotor(&props(), 30f64.to_radians(), 100.0, 1000.0).unwrap()
    }

    fn hover_spin() -> f64 {
        (2.0 * 9.81 / (6.0 * CF)).sqrt()
    }

    /// Independent rotation oracle: Rodrigues' formula about a unit axis.
    fn rodrigues(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
        let k = axis.cross_matrix();
        Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
    }

    #[test]
    fn pose_identity_tilt() {
        let (p, z) = propeller_pose(&props()[0], 0.0, 0.0);
        assert_relative_eq!(p, Vector3::new(0.246, 0.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(z, Vector3::z(), epsilon = 1e-15);
    }

    #[test]
    fn pose_dihedral_quarter_turn() {
        let (_, z) = propeller_pose(&props()[0], 0.0, PI / 2.0);
        assert_relative_eq!(z, Vector3::x(), epsilon = 1e-15);
    }

    #[test]
    fn pose_second_arm_cant() {
        let pr = props()[1];
        let (p, z) = propeller_pose(&pr, PI / 6.0, 0.0);
        let oracle = rodrigues(Vector3::z(), PI / 3.0) * rodrigues(Vector3::x(), PI / 6.0) * Vector3::z();
        assert_relative_eq!(z, oracle, epsilon = 1e-12);
        assert_relative_eq!(z, Vector3::new(0.4330127, -0.25, 0.8660254), epsilon = 1e-6);
        assert_relative_eq!(p.norm(), ARM, epsilon = 1e-15);
        assert_eq!(p.z, 0.0);
    }

    #[test]
    fn zero_spin_gives_zero_wrench() {
        let w = propeller_wrench(&props()[0], 0.3, -0.2, 0.0);
        assert_eq!(w, Wrench::zero());
    }

    #[test]
    fn single_propeller_thrust() {
        let w = propeller_wrench(&props()[0], 0.0, 0.0, 616.99);
        assert_relative_eq!(w.force, Vector3::new(0.0, 0.0, CF * 616.99 * 616.99), epsilon = 1e-12);
        assert_relative_eq!(w.force.z, 3.270, epsilon = 1e-3);
    }

    #[test]
    fn drag_torques_oppose_between_neighbours() {
        let ps = props();
        let w1 = propeller_wrench(&ps[0], 0.0, 0.0, 600.0);
        let w2 = propeller_wrench(&ps[1], 0.0, 0.0, -600.0);
        assert!(w1.torque.z * w2.torque.z < 0.0);
    }

    #[test]
    fn hover_wrench_balances_weight() {
        let ps = props();
        let x = ActuatorState::collinear(&ps, hover_spin());
        let w = total_wrench(&x, &default_box(), &ps);
        // brute-force oracle: explicit sum of thrust along z
        let expected: f64 = (0..6).map(|_| CF * hover_spin().powi(2)).sum();
        assert_relative_eq!(w.force, Vector3::new(0.0, 0.0, expected), epsilon = 1e-9);
        assert_relative_eq!(w.force.z, 19.62, epsilon = 1e-9);
        assert!(w.torque.norm() < 1e-9);
    }

    #[test]
    fn all_stopped_gives_zero_wrench() {
        let w = raw_wrench(&ActuatorState(Vec18::zeros()), &props());
        assert_eq!(w, Wrench::zero());
    }

    #[test]
    fn saturation_applied_before_output() {
        let ps = props();
        let bounds = default_box();
        let mut x = ActuatorState::collinear(&ps, 550.0);
        x.0[ALPHA + 2] = 45f64.to_radians();
        let mut clamped = x;
        clamped.0[ALPHA + 2] = 30f64.to_radians();
        assert_eq!(total_wrench(&x, &bounds, &ps), total_wrench(&clamped, &bounds, &ps));
    }

    #[test]
    fn saturate_clamps_components() {
        let ps = props();
        let bounds = default_box();
        let interior = ActuatorState::collinear(&ps, 600.0);
        assert_eq!(saturate(&interior, &bounds), interior);

        let mut x = interior;
        x.0[ALPHA] = 40f64.to_radians();
        x.0[OMEGA] = 50.0;
        let s = saturate(&x, &bounds);
        assert_relative_eq!(s.alpha(0), 30f64.to_radians());
        assert_eq!(s.omega(0), 100.0);
        assert_eq!(saturate(&s, &bounds), s);
    }

    #[test]
    fn spin_intervals_follow_direction() {
        let bounds = default_box();
        assert_eq!((bounds.lower()[OMEGA], bounds.upper()[OMEGA]), (100.0, 1000.0));
        assert_eq!((bounds.lower()[OMEGA + 1], bounds.upper()[OMEGA + 1]), (-1000.0, -100.0));
    }

    #[test]
    fn inverted_box_rejected() {
        let mut lo = Vec18::zeros();
        let hi = Vec18::repeat(1.0);
        lo[4] = 1.0;
        assert!(SaturationBox::new(lo, hi).is_err());
    }

    #[test]
    fn sat_gradient_cases() {
        let ps = props();
        let bounds = default_box();
        let x = ActuatorState::collinear(&ps, 600.0);
        assert_eq!(sat_gradient(&x, &bounds, 1e-3), Mat18::identity());

        let mut one = x;
        one.0[BETA + 3] = -0.9;
        let g = sat_gradient(&one, &bounds, 1e-3);
        let mut expected = Mat18::identity();
        expected[(BETA + 3, BETA + 3)] = 1e-3;
        assert_eq!(g, expected);

        // a component sitting exactly on its bound is still inside
        let mut edge = x;
        edge.0[OMEGA] = 1000.0;
        assert_eq!(sat_gradient_diag(&edge, &bounds, 1e-3)[OMEGA], 1.0);

        let all = ActuatorState(Vec18::repeat(5000.0));
        assert_eq!(sat_gradient(&all, &bounds, 1e-3), Mat18::identity() * 1e-3);
    }

    #[test]
    fn hover_spin_columns() {
        let ps = props();
        let x = ActuatorState::collinear(&ps, hover_spin());
        let jac = wrench_jacobian(&x, &default_box(), &ps);
        for i in 0..6 {
            let col = jac.column(OMEGA + i);
            assert_relative_eq!(col[0], 0.0, epsilon = 1e-15);
            assert_relative_eq!(col[1], 0.0, epsilon = 1e-15);
            assert_relative_eq!(col[2].abs(), 2.0 * CF * hover_spin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn opposite_arms_mirror_moment_torque() {
        let ps = props();
        for i in 0..3 {
            let a = propeller_wrench(&ps[i], 0.2, -0.1, 600.0);
            let b = propeller_wrench(&ps[i + 3], 0.2, -0.1, 600.0);
            let (pa, _) = propeller_pose(&ps[i], 0.2, -0.1);
            let (pb, _) = propeller_pose(&ps[i + 3], 0.2, -0.1);
            assert_relative_eq!(pa, -pb, epsilon = 1e-15);
            // same local tilt rotated by π: horizontal force flips, vertical stays
            assert_relative_eq!(a.force.xy(), -b.force.xy(), epsilon = 1e-12);
            assert_relative_eq!(a.force.z, b.force.z, epsilon = 1e-12);
            let arm_a = pa.cross(&a.force);
            let arm_b = pb.cross(&b.force);
            assert_relative_eq!(arm_a.xy(), -arm_b.xy(), epsilon = 1e-12);
            assert_relative_eq!(arm_a.z, arm_b.z, epsilon = 1e-12);
        }
    }
}
