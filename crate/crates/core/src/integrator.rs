//! Explicit Runge-Kutta integrators on fixed-size state vectors.
//!
//! Fixed-step classical RK4 and adaptive embedded pairs (Bogacki-Shampine
//! 3(2), Dormand-Prince 5(4)) with a standard elementary step-size
//! controller. The adaptive stepper keeps its step size between calls so a
//! sampled-data loop can hand it one sample interval at a time.

use nalgebra::{Const, DimMin, SMatrix, SVector};

use crate::error::{Error, Result};

/// One classical RK4 step.
pub fn rk4_step<const N: usize, F>(f: &mut F, t: f64, y: &SVector<f64, N>, h: f64) -> Result<SVector<f64, N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + h / 2.0, &(y + k1 * (h / 2.0)))?;
    let k3 = f(t + h / 2.0, &(y + k2 * (h / 2.0)))?;
    let k4 = f(t + h, &(y + k3 * h))?;
    Ok(y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
}

/// Butcher tableau of an embedded explicit pair. `a` is stored row-major,
/// strictly lower triangular; `b` gives the propagated solution and `e` the
/// difference between the two embedded solutions.
#[derive(Debug)]
pub struct Tableau {
    pub stages: usize,
    pub c: &'static [f64],
    pub a: &'static [&'static [f64]],
    pub b: &'static [f64],
    pub e: &'static [f64],
    /// Order of the lower-order solution; the controller uses `1/(q+1)`.
    pub error_order: u32,
}

pub const BOGACKI_SHAMPINE: Tableau = Tableau {
    stages: 4,
    c: &[0.0, 0.5, 0.75, 1.0],
    a: &[&[], &[0.5], &[0.0, 0.75], &[2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0]],
    b: &[2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0],
    e: &[2.0 / 9.0 - 7.0 / 24.0, 1.0 / 3.0 - 0.25, 4.0 / 9.0 - 1.0 / 3.0, -0.125],
    error_order: 2,
};

pub const DORMAND_PRINCE: Tableau = Tableau {
    stages: 7,
    c: &[0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0],
    a: &[
        &[],
        &[0.2],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ],
    b: &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0],
    e: &[
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ],
    error_order: 4,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

/// Adaptive stepper with mixed absolute/relative error control.
#[derive(Debug, Clone)]
pub struct AdaptiveStepper {
    tableau: &'static Tableau,
    rtol: f64,
    atol: f64,
    h: Option<f64>,
    pub stats: StepStats,
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const H_MIN: f64 = 1e-12;
const MAX_STEPS: usize = 1_000_000;

impl AdaptiveStepper {
    pub fn new(tableau: &'static Tableau, rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerances must be positive, got rtol {rtol}, atol {atol}")));
        }
        Ok(Self { tableau, rtol, atol, h: None, stats: StepStats::default() })
    }

    /// Integrates from `t0` to `t1`, landing exactly on `t1`.
    pub fn advance<const N: usize, F>(&mut self, f: &mut F, t0: f64, t1: f64, y0: &SVector<f64, N>) -> Result<SVector<f64, N>>
    where
        F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
    {
        let tab = self.tableau;
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(*y0);
        }
        let mut t = t0;
        let mut y = *y0;
        let mut h = self.h.unwrap_or(span).min(span);
        let mut k: Vec<SVector<f64, N>> = vec![SVector::zeros(); tab.stages];
        // first-same-as-last: the final stage is f at the new point
        let fsal = tab.a[tab.stages - 1] == &tab.b[..tab.stages - 1] && tab.c[tab.stages - 1] == 1.0;
        let mut reuse: Option<SVector<f64, N>> = None;
        for _ in 0..MAX_STEPS {
            let last = t + h >= t1 - 1e-12 * span;
            let unclipped = h;
            if last {
                h = t1 - t;
            }
            k[0] = match reuse.take() {
                Some(k0) => k0,
                None => {
                    self.stats.evaluations += 1;
                    f(t, &y)?
                }
            };
            for s in 1..tab.stages {
                let mut ys = y;
                for (j, a) in tab.a[s].iter().enumerate() {
                    if *a != 0.0 {
                        ys += k[j] * (a * h);
                    }
                }
                k[s] = f(t + tab.c[s] * h, &ys)?;
            }
            self.stats.evaluations += tab.stages as u64 - 1;

            let mut next = y;
            let mut err = SVector::<f64, N>::zeros();
            // b, e and k are parallel arrays
            #[allow(clippy::needless_range_loop)]
            for s in 0..tab.stages {
                if tab.b[s] != 0.0 {
                    next += k[s] * (tab.b[s] * h);
                }
                if tab.e[s] != 0.0 {
                    err += k[s] * (tab.e[s] * h);
                }
            }
            let norm = (err
                .iter()
                .zip(y.iter().zip(next.iter()))
                .map(|(e, (a, b))| {
                    let scale = self.atol + self.rtol * a.abs().max(b.abs());
                    (e / scale).powi(2)
                })
                .sum::<f64>()
                / N as f64)
                .sqrt();
            if !norm.is_finite() {
                return Err(Error::NonFinite("integrator error estimate"));
            }

            let fac = if norm == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * norm.powf(-1.0 / (tab.error_order as f64 + 1.0))).clamp(FAC_MIN, FAC_MAX)
            };
            if norm <= 1.0 {
                self.stats.accepted += 1;
                t = if last { t1 } else { t + h };
                y = next;
                if fsal {
                    reuse = Some(k[tab.stages - 1]);
                }
                let proposal = h * fac;
                if last {
                    // a clipped final piece says little about the next interval
                    self.h = Some(if fac >= 1.0 { proposal.max(unclipped) } else { proposal });
                    return Ok(y);
                }
                h = proposal;
                self.h = Some(h);
            } else {
                self.stats.rejected += 1;
                h *= fac.min(1.0);
                if h < H_MIN {
                    return Err(Error::StepUnderflow { time: t });
                }
            }
        }
        Err(Error::StepUnderflow { time: t })
    }
}

/// Linearly implicit Rosenbrock 2(3) pair of Shampine and Reichelt, with a
/// forward-difference Jacobian refreshed every step. L-stable, so the step
/// size follows accuracy rather than the fastest decaying mode.
#[derive(Debug, Clone)]
pub struct RosenbrockStepper {
    rtol: f64,
    atol: f64,
    h: Option<f64>,
    pub stats: StepStats,
}

impl RosenbrockStepper {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerances must be positive, got rtol {rtol}, atol {atol}")));
        }
        Ok(Self { rtol, atol, h: None, stats: StepStats::default() })
    }

    fn jacobian<const N: usize, F>(&mut self, f: &mut F, t: f64, y: &SVector<f64, N>, fy: &SVector<f64, N>) -> Result<SMatrix<f64, N, N>>
    where
        F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
    {
        let mut jac = SMatrix::<f64, N, N>::zeros();
        for j in 0..N {
            let delta = f64::EPSILON.sqrt() * y[j].abs().max(self.atol / self.rtol).max(1e-6);
            let mut yp = *y;
            yp[j] += delta;
            let col = (f(t, &yp)? - fy) / delta;
            jac.set_column(j, &col);
        }
        self.stats.evaluations += N as u64;
        Ok(jac)
    }

    /// Integrates from `t0` to `t1`. The system must be autonomous over the
    /// interval; the time argument is passed through but `∂f/∂t` is not
    /// accounted for.
    pub fn advance<const N: usize, F>(&mut self, f: &mut F, t0: f64, t1: f64, y0: &SVector<f64, N>) -> Result<SVector<f64, N>>
    where
        F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
        Const<N>: DimMin<Const<N>, Output = Const<N>>,
    {
        let d = 1.0 / (2.0 + std::f64::consts::SQRT_2);
        let e32 = 6.0 + std::f64::consts::SQRT_2;
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(*y0);
        }
        let mut t = t0;
        let mut y = *y0;
        let mut h = self.h.unwrap_or(span).min(span);
        let mut f0 = f(t, &y)?;
        self.stats.evaluations += 1;
        let mut jac = self.jacobian(f, t, &y, &f0)?;
        for _ in 0..MAX_STEPS {
            let last = t + h >= t1 - 1e-12 * span;
            let unclipped = h;
            if last {
                h = t1 - t;
            }
            let w = SMatrix::<f64, N, N>::identity() - jac * (h * d);
            let lu = w.lu();
            let solve = |v: SVector<f64, N>| lu.solve(&v).ok_or(Error::NonFinite("Rosenbrock iteration matrix"));
            let k1 = solve(f0)?;
            let f1 = f(t + 0.5 * h, &(y + k1 * (0.5 * h)))?;
            let k2 = solve(f1 - k1)? + k1;
            let next = y + k2 * h;
            let f2 = f(t + h, &next)?;
            let k3 = solve(f2 - (k2 - f1) * e32 - (k1 - f0) * 2.0)?;
            self.stats.evaluations += 2;
            let err = (k1 - k2 * 2.0 + k3) * (h / 6.0);

            let norm = err
                .iter()
                .zip(y.iter().zip(next.iter()))
                .map(|(e, (a, b))| {
                    let scale = self.atol + self.rtol * a.abs().max(b.abs());
                    (e / scale).abs()
                })
                .fold(0.0, f64::max);
            if !norm.is_finite() {
                return Err(Error::NonFinite("integrator error estimate"));
            }
            let fac = if norm == 0.0 { FAC_MAX } else { (SAFETY * norm.powf(-1.0 / 3.0)).clamp(FAC_MIN, FAC_MAX) };
            if norm <= 1.0 {
                self.stats.accepted += 1;
                t = if last { t1 } else { t + h };
                y = next;
                let proposal = h * fac;
                if last {
                    self.h = Some(if fac >= 1.0 { proposal.max(unclipped) } else { proposal });
                    return Ok(y);
                }
                h = proposal;
                self.h = Some(h);
                f0 = f2;
                jac = self.jacobian(f, t, &y, &f0)?;
            } else {
                self.stats.rejected += 1;
                h *= fac.min(1.0);
                if h < H_MIN {
                    return Err(Error::StepUnderflow { time: t });
                }
            }
        }
        Err(Error::StepUnderflow { time: t })
    }
}
