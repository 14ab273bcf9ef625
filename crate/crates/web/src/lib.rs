//! wasm-bindgen front end for the browser demo. The `demo` module holds the
//! logic and is tested natively; this file only adapts types for JS.

pub mod demo;

use wasm_bindgen::prelude::*;

use crate::demo::{CircleRun, CircleSettings};

/// A finished circle run held on the wasm side.
#[wasm_bindgen]
pub struct Run {
    inner: CircleRun,
}

#[wasm_bindgen]
impl Run {
    pub fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    /// One actuator component over time: block 0 = alpha, 1 = beta, 2 = omega.
    pub fn actuator(&self, block: usize, propeller: usize) -> Vec<f64> {
        self.inner.actuator(block, propeller)
    }

    pub fn position_x(&self) -> Vec<f64> {
        self.inner.position.iter().map(|p| p[0]).collect()
    }

    pub fn position_y(&self) -> Vec<f64> {
        self.inner.position.iter().map(|p| p[1]).collect()
    }

    pub fn objective(&self) -> Vec<f64> {
        self.inner.objective.clone()
    }

    pub fn summary(&self) -> String {
        self.inner.summary.clone()
    }

    /// Amplitude/offset table over `t >= window`.
    pub fn table(&self, window: f64) -> Result<String, JsError> {
        self.inner.table(window).map_err(|e| JsError::new(&e.to_string()))
    }
}

/// Simulates the reference circle. `objective` is "symmetric", "alpha" or "beta".
#[wasm_bindgen]
pub fn simulate_circle(gamma_j: f64, objective: &str, duration: f64, every: usize) -> Result<Run, JsError> {
    let settings = CircleSettings { gamma_j, objective: objective.to_string(), duration, every };
    demo::simulate_circle(&settings).map(|inner| Run { inner }).map_err(|e| JsError::new(&e.to_string()))
}

/// Wrench `[fx, fy, fz, tx, ty, tz, sigma_min]` for a uniform actuator setting,
/// with every propeller at the same tilts and spin magnitude.
#[wasm_bindgen]
pub fn explore_wrench(alpha_deg: f64, beta_deg: f64, spin: f64) -> Vec<f64> {
    demo::explore_wrench(alpha_deg, beta_deg, spin).to_vec()
}
