//! Secondary objectives optimized by the allocator in the output null space.
//!
//! `J(x) = Σᵢ μ_α (α̃ᵢ/Δα)^{n_α} + μ_β (β̃ᵢ/Δβ)^{n_β} + μ_ω ωᵢ²`, where `x̃` is the
//! offset from the middle of the saturation interval and `Δx` its width.
//! Both the value and the gradient are evaluated at `sat(x)`.

use serde::{Deserialize, Serialize};

use crate::actuation::{saturate, ActuatorState, SaturationBox, Vec18, ALPHA, BETA, N_PROPS, OMEGA};
use crate::error::{Error, Result};

/// Which tilt block gets the quadratic (steeper near centre) penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// Sixth power on both tilt blocks.
    Symmetric,
    /// Quadratic on α, sixth power on β: keeps α near the centre.
    Alpha,
    /// Sixth power on α, quadratic on β.
    Beta,
}

impl ObjectiveKind {
    pub fn exponents(self) -> (i32, i32) {
        match self {
            ObjectiveKind::Symmetric => (6, 6),
            ObjectiveKind::Alpha => (2, 6),
            ObjectiveKind::Beta => (6, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    alpha_exp: i32,
    beta_exp: i32,
    weights: ObjectiveWeights,
    bounds: SaturationBox,
    midpoint: Vec18,
    width: Vec18,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, weights: ObjectiveWeights, bounds: &SaturationBox) -> Result<Self> {
        let (a, b) = kind.exponents();
        Self::with_exponents(a, b, weights, bounds)
    }

    pub fn with_exponents(alpha_exp: i32, beta_exp: i32, weights: ObjectiveWeights, bounds: &SaturationBox) -> Result<Self> {
        for e in [alpha_exp, beta_exp] {
            if e < 2 || e % 2 != 0 {
                return Err(Error::InvalidParameter(format!("objective exponent must be even and >= 2, got {e}")));
            }
        }
        if !(weights.alpha > 0.0 && weights.beta > 0.0 && weights.omega > 0.0) {
            return Err(Error::InvalidParameter(format!("objective weights must be positive, got {weights:?}")));
        }
        Ok(Self {
            alpha_exp,
            beta_exp,
            weights,
            bounds: *bounds,
            midpoint: bounds.midpoint(),
            width: bounds.width(),
        })
    }

    pub fn exponents(&self) -> (i32, i32) {
        (self.alpha_exp, self.beta_exp)
    }

    pub fn weights(&self) -> &ObjectiveWeights {
        &self.weights
    }

    /// `J(sat(x))`.
    pub fn value(&self, x: &ActuatorState) -> f64 {
        let xs = saturate(x, &self.bounds).0;
        (0..N_PROPS)
            .map(|i| {
                let a = (xs[ALPHA + i] - self.midpoint[ALPHA + i]) / self.width[ALPHA + i];
                let b = (xs[BETA + i] - self.midpoint[BETA + i]) / self.width[BETA + i];
                let w = xs[OMEGA + i];
                self.weights.alpha * a.powi(self.alpha_exp)
                    + self.weights.beta * b.powi(self.beta_exp)
                    + self.weights.omega * w * w
            })
            .sum()
    }

    /// `∇J` evaluated at `sat(x)`.
    pub fn gradient(&self, x: &ActuatorState) -> Vec18 {
        let xs = saturate(x, &self.bounds).0;
        let mut g = Vec18::zeros();
        let tilt = |j: usize, n: i32, mu: f64| {
            let w = self.width[j];
            n as f64 * mu * (xs[j] - self.midpoint[j]).powi(n - 1) / w.powi(n)
        };
        for i in 0..N_PROPS {
            g[ALPHA + i] = tilt(ALPHA + i, self.alpha_exp, self.weights.alpha);
            g[BETA + i] = tilt(BETA + i, self.beta_exp, self.weights.beta);
            g[OMEGA + i] = 2.0 * self.weights.omega * xs[OMEGA + i];
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuation::star_hexarotor;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const HOVER_SPIN: f64 = 616.9878;

    fn bounds() -> SaturationBox {
        let props = star_hexarotor(0.246, 8.59e-6, 1.37e-7).unwrap();
        SaturationBox::hexarotor(&props, 30f64.to_radians(), 100.0, 1000.0).unwrap()
    }

    fn weights() -> ObjectiveWeights {
        ObjectiveWeights { alpha: 750.0, beta: 750.0, omega: 1.0 / 200.0 }
    }

    fn spec(kind: ObjectiveKind) -> ObjectiveSpec {
        ObjectiveSpec::new(kind, weights(), &bounds()).unwrap()
    }

    fn hover() -> ActuatorState {
        let props = star_hexarotor(0.246, 8.59e-6, 1.37e-7).unwrap();
        ActuatorState::collinear(&props, HOVER_SPIN)
    }

    #[test]
    fn zero_at_centre_with_spin_stopped() {
        // spins pinned to their lower bound still contribute; compare against
        // the bare tilt terms by using an unbounded spin range
        let mut lo = *bounds().lower();
        let mut hi = *bounds().upper();
        for i in 0..N_PROPS {
            lo[OMEGA + i] = -1000.0;
            hi[OMEGA + i] = 1000.0;
        }
        let b = SaturationBox::new(lo, hi).unwrap();
        let s = ObjectiveSpec::new(ObjectiveKind::Symmetric, weights(), &b).unwrap();
        assert_eq!(s.value(&ActuatorState(Vec18::zeros())), 0.0);
    }

    #[test]
    fn hover_value() {
        let v = spec(ObjectiveKind::Symmetric).value(&hover());
        assert_relative_eq!(v, 6.0 / 200.0 * HOVER_SPIN * HOVER_SPIN, epsilon = 1e-9);
        assert_relative_eq!(v, 11420.2, epsilon = 0.1);
    }

    #[test]
    fn quarter_width_cant_offset() {
        let s = spec(ObjectiveKind::Symmetric);
        let mut x = hover();
        x.0[ALPHA] = 15f64.to_radians();
        let added = s.value(&x) - s.value(&hover());
        assert_relative_eq!(added, 750.0 * 0.25f64.powi(6), epsilon = 1e-9);
        assert_relative_eq!(added, 0.1831, epsilon = 1e-4);
    }

    #[test]
    fn gradient_spot_values() {
        let s = spec(ObjectiveKind::Symmetric);
        let mut x = hover();
        x.0[OMEGA] = 616.99;
        let g = s.gradient(&x);
        for j in 0..2 * N_PROPS {
            assert_eq!(g[j], 0.0);
        }
        assert_relative_eq!(g[OMEGA], 6.1699, epsilon = 1e-9);
    }

    #[test]
    fn asymmetric_exponents() {
        assert_eq!(spec(ObjectiveKind::Alpha).exponents(), (2, 6));
        assert_eq!(spec(ObjectiveKind::Beta).exponents(), (6, 2));
        let mut x = hover();
        x.0[ALPHA] = 0.1;
        x.0[BETA] = 0.1;
        let g = spec(ObjectiveKind::Alpha).gradient(&x);
        assert!(g[ALPHA] > g[BETA]);
    }

    #[test]
    fn rejects_bad_exponents_and_weights() {
        assert!(ObjectiveSpec::with_exponents(3, 6, weights(), &bounds()).is_err());
        assert!(ObjectiveSpec::with_exponents(0, 6, weights(), &bounds()).is_err());
        let w = ObjectiveWeights { omega: 0.0, ..weights() };
        assert!(ObjectiveSpec::new(ObjectiveKind::Symmetric, w, &bounds()).is_err());
    }

    fn tilt() -> impl Strategy<Value = f64> {
        -0.5..0.5f64
    }

    proptest! {
        #[test]
        fn gradient_matches_central_differences(
            a in proptest::array::uniform6(tilt()),
            b in proptest::array::uniform6(tilt()),
            w in proptest::array::uniform6(150.0..950.0f64),
            kind in prop_oneof![Just(ObjectiveKind::Symmetric), Just(ObjectiveKind::Alpha), Just(ObjectiveKind::Beta)],
        ) {
            let props = star_hexarotor(0.246, 8.59e-6, 1.37e-7).unwrap();
            let omega = std::array::from_fn(|i| props[i].spin.sign() * w[i]);
            let x = ActuatorState::from_parts(a, b, omega);
            let s = spec(kind);
            let g = s.gradient(&x);
            // five-point stencil: the spin terms make J ~ 1e4, so a short
            // central difference drowns in round-off
            let scale = g.norm();
            for j in 0..18 {
                let h = 1e-4;
                let at = |d: f64| {
                    let mut xp = x;
                    xp.0[j] += d;
                    s.value(&xp)
                };
                let fd = (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
                prop_assert!((fd - g[j]).abs() / scale < 1e-6, "component {}: fd {} analytic {}", j, fd, g[j]);
            }
        }
    }
}
