//! Scenario configuration files (TOML).
//!
//! Angles are given in degrees and converted to radians when the scenario is
//! built; spin rates are in rad/s. Every section and key is required unless
//! marked optional, and unknown keys are rejected. [`ScenarioConfig::default`]
//! is the reference setup: 2 kg star hexarotor on a 2 m circle at 0.8 rad/s.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::actuation::{star_hexarotor, ActuatorState, SaturationBox, SpinDirection, N_PROPS};
use crate::allocator::AllocatorParams;
use crate::controller::ControllerGains;
use crate::dynamics::{PlatformParams, PlatformState};
use crate::error::{Error, Result};
use crate::objective::{ObjectiveKind, ObjectiveSpec, ObjectiveWeights};
use crate::sim::{Integration, Scenario};
use crate::trajectory::{CircleTrajectory, Reference};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub platform: PlatformSection,
    pub propellers: PropellerSection,
    pub saturation: SaturationSection,
    pub controller: ControllerSection,
    pub allocator: AllocatorSection,
    pub trajectory: TrajectorySection,
    pub initial: InitialSection,
    pub sim: SimSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformSection {
    /// [kg]
    pub mass: f64,
    /// Principal inertia diagonal [kg m²].
    pub inertia: [f64; 3],
    /// [m/s²]
    pub gravity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropellerSection {
    /// [m]
    pub arm_length: f64,
    /// [N s²]
    pub force_coeff: f64,
    /// [N m s²]
    pub drag_coeff: f64,
    /// Spin direction per propeller, e.g. `["ccw", "cw", ...]`.
    pub spin: [SpinDirection; N_PROPS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturationSection {
    /// Symmetric cant-angle bound [deg].
    pub alpha_deg: f64,
    /// Symmetric dihedral-angle bound [deg].
    pub beta_deg: f64,
    /// Spin-rate magnitude bounds [rad/s].
    pub spin_min: f64,
    pub spin_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub kp: [f64; 3],
    pub kd: [f64; 3],
    pub kp_att: [f64; 3],
    pub kd_att: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocatorSection {
    pub gamma_p: f64,
    pub gamma_j: f64,
    /// Diagonal of the wrench-error gain K.
    pub k: [f64; 6],
    /// Saturation-gradient value outside the box.
    pub sat_eps: f64,
    pub objective: ObjectiveKind,
    pub mu_alpha: f64,
    pub mu_beta: f64,
    pub mu_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum TrajectorySection {
    Circle {
        radius: f64,
        rate: f64,
        altitude: f64,
        attitude_deg: [f64; 3],
    },
    Hover {
        position: [f64; 3],
        attitude_deg: [f64; 3],
    },
    Step {
        from: [f64; 3],
        to: [f64; 3],
        switch_time: f64,
        attitude_deg: [f64; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub position: [f64; 3],
    pub attitude_deg: [f64; 3],
    pub alpha_deg: [f64; N_PROPS],
    pub beta_deg: [f64; N_PROPS],
    /// Spin magnitude [rad/s]; omitted means the collinear hover value
    /// `√(mg / 6c_f)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// [s]
    pub duration: f64,
    /// [s]
    pub dt: f64,
    /// `bs32` (default), `dp54`, `ros23` or `rk4`.
    #[serde(default)]
    pub integrator: IntegratorName,
    /// Error tolerance of the adaptive integrators.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// RK4 steps per `dt`.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorName {
    #[default]
    Bs32,
    Dp54,
    Ros23,
    Rk4,
}

fn default_tolerance() -> f64 {
    crate::sim::DEFAULT_TOLERANCE
}

fn default_substeps() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory, relative to the output root.
    pub dir: String,
    /// Start of the steady-state fit window [s].
    pub window_start: f64,
    /// Write every n-th row to the record CSV.
    pub record_every: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "circle_gj10".into(),
            platform: PlatformSection { mass: 2.0, inertia: [0.0217, 0.0217, 0.04], gravity: 9.81 },
            propellers: PropellerSection {
                arm_length: 0.246,
                force_coeff: 8.59e-6,
                drag_coeff: 1.37e-7,
                spin: std::array::from_fn(SpinDirection::alternating),
            },
            saturation: SaturationSection { alpha_deg: 30.0, beta_deg: 30.0, spin_min: 100.0, spin_max: 1000.0 },
            controller: ControllerSection { kp: [2.0; 3], kd: [1.5; 3], kp_att: [2.0; 3], kd_att: [1.5; 3] },
            allocator: AllocatorSection {
                gamma_p: 5.0,
                gamma_j: 10.0,
                k: [3.0; 6],
                sat_eps: 1e-3,
                objective: ObjectiveKind::Symmetric,
                mu_alpha: 750.0,
                mu_beta: 750.0,
                mu_omega: 1.0 / 200.0,
            },
            trajectory: TrajectorySection::Circle { radius: 2.0, rate: 0.8, altitude: 0.0, attitude_deg: [0.0; 3] },
            initial: InitialSection {
                position: [2.0, 0.0, 0.0],
                attitude_deg: [0.0; 3],
                alpha_deg: [0.0; N_PROPS],
                beta_deg: [0.0; N_PROPS],
                spin: None,
            },
            sim: SimSection {
                duration: 30.0,
                dt: 1e-3,
                integrator: IntegratorName::default(),
                tolerance: default_tolerance(),
                substeps: default_substeps(),
            },
            output: OutputSection { dir: "circle_gj10".into(), window_start: 10.0, record_every: 1 },
        }
    }
}

fn deg(v: [f64; 3]) -> Vector3<f64> {
    Vector3::from(v).map(f64::to_radians)
}

impl ScenarioConfig {
    /// Reference circle with the given optimization gain and objective.
    pub fn circle(gamma_j: f64, objective: ObjectiveKind) -> Self {
        let mut c = Self::default();
        let tag = match objective {
            ObjectiveKind::Symmetric => format!("circle_gj{gamma_j}"),
            ObjectiveKind::Alpha => "circle_jalpha".into(),
            ObjectiveKind::Beta => "circle_jbeta".into(),
        };
        c.name = tag.clone();
        c.output.dir = tag;
        c.allocator.gamma_j = gamma_j;
        c.allocator.objective = objective;
        c
    }

    /// Static hover at the circle's starting point.
    pub fn hover() -> Self {
        let mut c = Self {
            name: "hover".into(),
            trajectory: TrajectorySection::Hover { position: [2.0, 0.0, 0.0], attitude_deg: [0.0; 3] },
            ..Self::default()
        };
        c.output.dir = "hover".into();
        c.sim.duration = 10.0;
        c
    }

    pub fn parse(source: &str) -> Result<Self> {
        let config: Self = toml::from_str(source).map_err(|e| Error::Config(e.to_string()))?;
        config.check().map_err(|(section, key, msg)| {
            let at = locate_key(source, section, key).map(|l| format!("line {l}: ")).unwrap_or_default();
            Error::Config(format!("{at}{section}.{key}: {msg}"))
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path)?;
        Self::parse(&source).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Range checks that serde cannot express, reported as (section, key, message).
    fn check(&self) -> std::result::Result<(), (&'static str, &'static str, String)> {
        let positive = |section, key, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err((section, key, format!("must be positive, got {v}")))
            }
        };
        positive("sim", "dt", self.sim.dt)?;
        if self.sim.substeps == 0 {
            return Err(("sim", "substeps", "must be at least 1".into()));
        }
        positive("sim", "tolerance", self.sim.tolerance)?;
        if !(self.sim.duration >= 0.0 && self.sim.duration.is_finite()) {
            return Err(("sim", "duration", format!("must be non-negative, got {}", self.sim.duration)));
        }
        positive("platform", "mass", self.platform.mass)?;
        positive("platform", "gravity", self.platform.gravity)?;
        if self.platform.inertia.iter().any(|&j| !(j > 0.0)) {
            return Err(("platform", "inertia", "entries must be positive".into()));
        }
        positive("propellers", "arm_length", self.propellers.arm_length)?;
        positive("propellers", "force_coeff", self.propellers.force_coeff)?;
        positive("propellers", "drag_coeff", self.propellers.drag_coeff)?;
        positive("saturation", "alpha_deg", self.saturation.alpha_deg)?;
        positive("saturation", "beta_deg", self.saturation.beta_deg)?;
        if !(self.saturation.spin_min >= 0.0 && self.saturation.spin_min < self.saturation.spin_max) {
            return Err(("saturation", "spin_min", "must satisfy 0 <= spin_min < spin_max".into()));
        }
        for (key, g) in [
            ("kp", self.controller.kp),
            ("kd", self.controller.kd),
            ("kp_att", self.controller.kp_att),
            ("kd_att", self.controller.kd_att),
        ] {
            if g.iter().any(|&k| !(k > 0.0)) {
                return Err(("controller", key, "gains must be positive".into()));
            }
        }
        positive("allocator", "gamma_p", self.allocator.gamma_p)?;
        if !(self.allocator.gamma_j >= 0.0) {
            return Err(("allocator", "gamma_j", format!("must be non-negative, got {}", self.allocator.gamma_j)));
        }
        positive("allocator", "sat_eps", self.allocator.sat_eps)?;
        positive("allocator", "mu_alpha", self.allocator.mu_alpha)?;
        positive("allocator", "mu_beta", self.allocator.mu_beta)?;
        positive("allocator", "mu_omega", self.allocator.mu_omega)?;
        if let TrajectorySection::Circle { radius, rate, .. } = self.trajectory {
            if !(radius >= 0.0) {
                return Err(("trajectory", "radius", "must be non-negative".into()));
            }
            positive("trajectory", "rate", rate)?;
        }
        if let Some(s) = self.initial.spin {
            positive("initial", "spin", s)?;
        }
        if self.output.record_every == 0 {
            return Err(("output", "record_every", "must be at least 1".into()));
        }
        Ok(())
    }

    /// Rate used for the steady-state fits: the circle rate, if any.
    pub fn fit_frequency(&self) -> Option<f64> {
        match self.trajectory {
            TrajectorySection::Circle { rate, .. } => Some(rate),
            _ => None,
        }
    }

    pub fn hover_spin(&self) -> f64 {
        (self.platform.mass * self.platform.gravity / (6.0 * self.propellers.force_coeff)).sqrt()
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        let p = &self.platform;
        let platform = PlatformParams::new(p.mass, Matrix3::from_diagonal(&Vector3::from(p.inertia)), p.gravity)?;

        let pr = &self.propellers;
        let mut props = star_hexarotor(pr.arm_length, pr.force_coeff, pr.drag_coeff)?;
        for (prop, spin) in props.iter_mut().zip(pr.spin) {
            prop.spin = spin;
        }

        let s = &self.saturation;
        let bounds = SaturationBox::hexarotor_asymmetric(
            &props,
            s.alpha_deg.to_radians(),
            s.beta_deg.to_radians(),
            s.spin_min,
            s.spin_max,
        )?;

        let c = &self.controller;
        let gains = ControllerGains::new(c.kp.into(), c.kd.into(), c.kp_att.into(), c.kd_att.into())?;

        let a = &self.allocator;
        let weights = ObjectiveWeights { alpha: a.mu_alpha, beta: a.mu_beta, omega: a.mu_omega };
        let objective = ObjectiveSpec::new(a.objective, weights, &bounds)?;
        let allocator = AllocatorParams::new(
            a.gamma_p,
            a.gamma_j,
            Matrix6::from_diagonal(&Vector6::from(a.k)),
            a.sat_eps,
            objective,
        )?;

        let reference = match self.trajectory {
            TrajectorySection::Circle { radius, rate, altitude, attitude_deg } => Reference::Circle(CircleTrajectory {
                radius,
                rate,
                altitude,
                attitude: deg(attitude_deg),
            }),
            TrajectorySection::Hover { position, attitude_deg } => Reference::Hover {
                position: position.into(),
                attitude: deg(attitude_deg),
            },
            TrajectorySection::Step { from, to, switch_time, attitude_deg } => Reference::Step {
                from: from.into(),
                to: to.into(),
                attitude: deg(attitude_deg),
                switch_time,
            },
        };

        let init = &self.initial;
        let initial_platform = PlatformState {
            position: init.position.into(),
            euler: deg(init.attitude_deg),
            ..Default::default()
        };
        let magnitude = init.spin.unwrap_or_else(|| self.hover_spin());
        let initial_actuators = ActuatorState::from_parts(
            init.alpha_deg.map(f64::to_radians),
            init.beta_deg.map(f64::to_radians),
            std::array::from_fn(|i| props[i].spin.sign() * magnitude),
        );

        let scenario = Scenario {
            name: self.name.clone(),
            platform,
            props,
            bounds,
            gains,
            allocator,
            reference,
            initial_platform,
            initial_actuators,
            duration: self.sim.duration,
            dt: self.sim.dt,
            integration: match self.sim.integrator {
                IntegratorName::Bs32 => Integration::Bs32 { tolerance: self.sim.tolerance },
                IntegratorName::Dp54 => Integration::Dp54 { tolerance: self.sim.tolerance },
                IntegratorName::Ros23 => Integration::Ros23 { tolerance: self.sim.tolerance },
                IntegratorName::Rk4 => Integration::Rk4 { substeps: self.sim.substeps },
            },
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Output directory for this scenario under `root`.
    pub fn output_dir(&self, root: &Path) -> PathBuf {
        root.join(&self.output.dir)
    }
}

/// 1-based line of `key = ...` inside `[section]`, if present.
fn locate_key(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (n, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}
