//! Fixed-step closed-loop simulation of the platform, actuator system,
//! high-level controller and allocator.
//!
//! The controller is sampled every `dt`: its wrench command and the
//! backward-difference command rate are held over the sample interval. The
//! platform and actuator states are advanced jointly over that interval,
//! evaluating the allocator law wherever the integrator needs a derivative.
//!
//! With the null-space term active the allocator is stiff: its Jacobian
//! scales like `γ_j |∇J| / σ_min` and reaches 1e4 1/s on the reference
//! scenarios, so holding `u_a` over a 1 ms sample diverges. The default is
//! therefore an error-controlled embedded pair inside each sample; fixed-step
//! RK4 is available for convergence studies. The integrated actuator state is never
//! clamped; saturation only enters through the output map and `∇sat`.

use nalgebra::{SVector, Vector3, Vector6};

use crate::actuation::{total_wrench, ActuatorState, PropellerSet, SaturationBox, N_ACT};
use crate::allocator::{allocator_step, AllocatorOutput, AllocatorParams};
use crate::controller::{wrench_command, CommandDerivative, ControllerGains, ReferenceSample};
use crate::dynamics::{dynamics, PlatformParams, PlatformState};
use crate::error::{Error, Result};
use crate::integrator::{rk4_step, AdaptiveStepper, RosenbrockStepper, StepStats, BOGACKI_SHAMPINE, DORMAND_PRINCE};
use crate::trajectory::Reference;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub platform: PlatformParams,
    pub props: PropellerSet,
    pub bounds: SaturationBox,
    pub gains: ControllerGains,
    pub allocator: AllocatorParams,
    pub reference: Reference,
    pub initial_platform: PlatformState,
    pub initial_actuators: ActuatorState,
    /// Duration [s].
    pub duration: f64,
    /// Step [s].
    pub dt: f64,
    pub integration: Integration,
}

/// How the continuous dynamics are advanced between two samples. The
/// controller output and its rate are held over the sample interval in
/// every case; the allocator law is evaluated wherever the integrator needs
/// a derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integration {
    /// Classical RK4 with `substeps` equal steps per sample.
    Rk4 { substeps: usize },
    /// Bogacki-Shampine 3(2) with error control.
    Bs32 { tolerance: f64 },
    /// Dormand-Prince 5(4) with error control.
    Dp54 { tolerance: f64 },
    /// Linearly implicit Rosenbrock 2(3) with error control, for stiff
    /// objectives (narrow saturation boxes).
    Ros23 { tolerance: f64 },
}

impl Default for Integration {
    fn default() -> Self {
        Integration::Bs32 { tolerance: DEFAULT_TOLERANCE }
    }
}

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {}", self.dt)));
        }
        match self.integration {
            Integration::Rk4 { substeps: 0 } => {
                return Err(Error::InvalidParameter("substeps must be at least 1".into()));
            }
            Integration::Bs32 { tolerance } | Integration::Dp54 { tolerance } | Integration::Ros23 { tolerance } if !(tolerance > 0.0) => {
                return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
            }
            _ => {}
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidParameter(format!("duration must be non-negative, got {}", self.duration)));
        }
        if !self.bounds.is_admissible(&self.initial_actuators) {
            return Err(Error::InvalidParameter("initial actuator state lies outside the saturation box".into()));
        }
        Ok(())
    }

    /// Number of integration steps; the record has one more row.
    pub fn steps(&self) -> usize {
        // tolerate representation error in T/Δt
        (self.duration / self.dt + 1e-9).floor() as usize
    }
}

/// One sampled instant of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub time: f64,
    pub platform: PlatformState,
    pub actuators: ActuatorState,
    pub reference_position: Vector3<f64>,
    pub reference_euler: Vector3<f64>,
    /// `u_v*`.
    pub command: Vector6<f64>,
    /// `u_v = h_a(sat x_a)`.
    pub wrench: Vector6<f64>,
    /// `u_{v,c}`.
    pub filtered_command: Vector6<f64>,
    pub norm_uy: f64,
    pub norm_uj: f64,
    /// `J(sat x_a)`.
    pub objective: f64,
    pub saturated: [bool; N_ACT],
    pub sigma_min: f64,
    pub rank_deficient: bool,
}

impl RecordRow {
    pub fn position_error(&self) -> Vector3<f64> {
        self.reference_position - self.platform.position
    }

    pub fn attitude_error(&self) -> Vector3<f64> {
        self.reference_euler - self.platform.euler
    }

    pub fn wrench_error(&self) -> Vector6<f64> {
        self.wrench - self.command
    }
}

/// Time series produced by [`run`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub name: String,
    pub dt: f64,
    pub rows: Vec<RecordRow>,
    /// Adaptive integrator work; zero for fixed-step runs and loaded records.
    pub stats: StepStats,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }

    /// Rows with `time >= start`.
    pub fn window(&self, start: f64) -> impl Iterator<Item = &RecordRow> {
        self.rows.iter().filter(move |r| r.time >= start - 1e-9)
    }

    pub fn saturation_events(&self) -> usize {
        self.rows.iter().filter(|r| r.saturated.iter().any(|&s| s)).count()
    }

    pub fn rank_deficient_events(&self) -> usize {
        self.rows.iter().filter(|r| r.rank_deficient).count()
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug)]
pub struct SimAbort {
    pub error: Error,
    pub partial: RunRecord,
}

impl std::fmt::Display for SimAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} rows recorded)", self.error, self.partial.len())
    }
}

impl std::error::Error for SimAbort {}

impl From<SimAbort> for Error {
    fn from(a: SimAbort) -> Self {
        a.error
    }
}

/// Joint platform/actuator state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub platform: PlatformState,
    pub actuators: ActuatorState,
}

/// Controller and allocator evaluation at the start of a step.
#[derive(Debug, Clone)]
pub struct StepInputs {
    pub reference: ReferenceSample,
    pub command: Vector6<f64>,
    pub command_rate: Vector6<f64>,
    pub allocation: AllocatorOutput,
}

/// Flat layout used by the integrators: `p, v, δ, δ̇, x_a`.
type Flat = SVector<f64, 30>;

fn flatten(s: &SimState) -> Flat {
    let mut y = Flat::zeros();
    y.fixed_rows_mut::<3>(0).copy_from(&s.platform.position);
    y.fixed_rows_mut::<3>(3).copy_from(&s.platform.velocity);
    y.fixed_rows_mut::<3>(6).copy_from(&s.platform.euler);
    y.fixed_rows_mut::<3>(9).copy_from(&s.platform.euler_rate);
    y.fixed_rows_mut::<N_ACT>(12).copy_from(&s.actuators.0);
    y
}

fn unflatten(y: &Flat) -> SimState {
    SimState {
        platform: PlatformState {
            position: y.fixed_rows::<3>(0).into_owned(),
            velocity: y.fixed_rows::<3>(3).into_owned(),
            euler: y.fixed_rows::<3>(6).into_owned(),
            euler_rate: y.fixed_rows::<3>(9).into_owned(),
        },
        actuators: ActuatorState(y.fixed_rows::<N_ACT>(12).into_owned()),
    }
}

/// Stateful stepper owning the command-rate estimator and, for adaptive
/// integration, the step size carried between samples.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    scenario: &'a Scenario,
    derivative: CommandDerivative,
    stepper: Stepper,
}

#[derive(Debug, Clone)]
enum Stepper {
    Fixed(usize),
    Explicit(AdaptiveStepper),
    Rosenbrock(RosenbrockStepper),
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let stepper = match scenario.integration {
            Integration::Rk4 { substeps } => Stepper::Fixed(substeps),
            Integration::Bs32 { tolerance } => Stepper::Explicit(AdaptiveStepper::new(&BOGACKI_SHAMPINE, tolerance, tolerance)?),
            Integration::Dp54 { tolerance } => Stepper::Explicit(AdaptiveStepper::new(&DORMAND_PRINCE, tolerance, tolerance)?),
            Integration::Ros23 { tolerance } => Stepper::Rosenbrock(RosenbrockStepper::new(tolerance, tolerance)?),
        };
        Ok(Self { scenario, derivative: CommandDerivative::new(scenario.dt), stepper })
    }

    /// Integrator statistics; zero for fixed-step RK4.
    pub fn stats(&self) -> StepStats {
        match &self.stepper {
            Stepper::Fixed(_) => StepStats::default(),
            Stepper::Explicit(s) => s.stats,
            Stepper::Rosenbrock(s) => s.stats,
        }
    }

    /// Controller, command-rate and allocator evaluation at time `t`.
    pub fn evaluate(&mut self, state: &SimState, t: f64) -> Result<StepInputs> {
        let sc = self.scenario;
        let reference = sc.reference.sample(t);
        let command = wrench_command(&state.platform, &reference, &sc.gains, &sc.platform)?;
        let command_rate = self.derivative.update(&command).to_vector();
        let command = command.to_vector();
        let allocation = allocator_step(
            &state.actuators,
            &command,
            &command_rate,
            &sc.bounds,
            &sc.props,
            &sc.allocator,
        );
        Ok(StepInputs { reference, command, command_rate, allocation })
    }

    /// Advances from `t` to `t + dt` with the controller output in `inputs`
    /// held.
    pub fn integrate(&mut self, state: &SimState, t: f64, inputs: &StepInputs) -> Result<SimState> {
        let sc = self.scenario;
        let mut f = |_t: f64, y: &Flat| -> Result<Flat> {
            let s = unflatten(y);
            let w = total_wrench(&s.actuators, &sc.bounds, &sc.props);
            let d = dynamics(&s.platform, &w, &sc.platform)?;
            let u = allocator_step(&s.actuators, &inputs.command, &inputs.command_rate, &sc.bounds, &sc.props, &sc.allocator)
                .control;
            let mut dy = Flat::zeros();
            dy.fixed_rows_mut::<3>(0).copy_from(&d.velocity);
            dy.fixed_rows_mut::<3>(3).copy_from(&d.acceleration);
            dy.fixed_rows_mut::<3>(6).copy_from(&d.euler_rate);
            dy.fixed_rows_mut::<3>(9).copy_from(&d.euler_accel);
            dy.fixed_rows_mut::<N_ACT>(12).copy_from(&u);
            Ok(dy)
        };
        let y0 = flatten(state);
        let y = match &mut self.stepper {
            Stepper::Explicit(stepper) => stepper.advance(&mut f, t, t + sc.dt, &y0)?,
            Stepper::Rosenbrock(stepper) => stepper.advance(&mut f, t, t + sc.dt, &y0)?,
            Stepper::Fixed(substeps) => {
                let h = sc.dt / *substeps as f64;
                let mut y = y0;
                for k in 0..*substeps {
                    y = rk4_step(&mut f, t + k as f64 * h, &y, h)?;
                }
                y
            }
        };
        let next = unflatten(&y);
        if !next.platform.is_finite() {
            return Err(Error::NonFinite("platform state"));
        }
        if !next.actuators.is_finite() {
            return Err(Error::NonFinite("actuator state"));
        }
        Ok(next)
    }

    /// Evaluates the loop at `t`, returns the record row and the state at
    /// `t + Δt`.
    pub fn step(&mut self, state: &SimState, t: f64) -> Result<(SimState, RecordRow)> {
        let inputs = self.evaluate(state, t)?;
        let row = self.row(state, t, &inputs);
        let next = self.integrate(state, t, &inputs)?;
        Ok((next, row))
    }

    fn row(&self, state: &SimState, t: f64, inputs: &StepInputs) -> RecordRow {
        let a = &inputs.allocation;
        RecordRow {
            time: t,
            platform: state.platform,
            actuators: state.actuators,
            reference_position: inputs.reference.position,
            reference_euler: inputs.reference.euler,
            command: inputs.command,
            wrench: a.wrench,
            filtered_command: a.filtered_command,
            norm_uy: a.diagnostics.norm_uy,
            norm_uj: a.diagnostics.norm_uj,
            objective: self.scenario.allocator.objective().value(&state.actuators),
            saturated: a.diagnostics.saturated,
            sigma_min: a.diagnostics.sigma_min,
            rank_deficient: a.diagnostics.rank_deficient,
        }
    }
}

/// Runs the scenario to completion. Identical scenarios give bit-identical
/// records.
pub fn run(scenario: &Scenario) -> std::result::Result<RunRecord, SimAbort> {
    let mut record = RunRecord { name: scenario.name.clone(), dt: scenario.dt, ..Default::default() };
    if let Err(error) = scenario.validate() {
        return Err(SimAbort { error, partial: record });
    }
    let steps = scenario.steps();
    record.rows.reserve(steps + 1);

    let mut sim = match Simulator::new(scenario) {
        Ok(s) => s,
        Err(error) => return Err(SimAbort { error, partial: record }),
    };
    let mut state = SimState { platform: scenario.initial_platform, actuators: scenario.initial_actuators };
    for k in 0..=steps {
        let t = k as f64 * scenario.dt;
        let abort = |error: Error, partial: RunRecord| SimAbort {
            error: Error::Aborted { time: t, cause: Box::new(error) },
            partial,
        };
        record.stats = sim.stats();
        let inputs = match sim.evaluate(&state, t) {
            Ok(i) => i,
            Err(e) => return Err(abort(e, record)),
        };
        record.rows.push(sim.row(&state, t, &inputs));
        if k == steps {
            break;
        }
        state = match sim.integrate(&state, t, &inputs) {
            Ok(s) => s,
            Err(e) => return Err(abort(e, record)),
        };
    }
    Ok(record)
}

/// Response of the actuator subsystem alone to a constant wrench command:
/// `(t, u_v − u_v*)` samples of the wrench error every `dt`.
pub fn actuator_step_response(
    initial: &ActuatorState,
    command: &Vector6<f64>,
    bounds: &SaturationBox,
    props: &PropellerSet,
    params: &AllocatorParams,
    dt: f64,
    duration: f64,
) -> Result<Vec<(f64, Vector6<f64>)>> {
    let steps = (duration / dt + 1e-9).floor() as usize;
    // same stiffness as in a full run, so same error-controlled stepping
    let mut stepper = AdaptiveStepper::new(&BOGACKI_SHAMPINE, DEFAULT_TOLERANCE, DEFAULT_TOLERANCE)?;
    let mut f = |_t: f64, x: &SVector<f64, N_ACT>| -> Result<SVector<f64, N_ACT>> {
        Ok(allocator_step(&ActuatorState(*x), command, &Vector6::zeros(), bounds, props, params).control)
    };
    let mut x = initial.0;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let err = total_wrench(&ActuatorState(x), bounds, props).to_vector() - command;
        out.push((t, err));
        if k < steps {
            x = stepper.advance(&mut f, t, t + dt, &x)?;
        }
    }
    Ok(out)
}
