use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{check_positive, invalid, Error, Result};
use crate::series::{check_grid, TimeSeries};

/// Scalar types an ODE state vector can hold.
pub trait OdeElement:
    Copy + Default + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self>
{
    fn is_finite(self) -> bool;
    fn magnitude(self) -> f64;
}

impl OdeElement for f64 {
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl OdeElement for Complex64 {
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMethod {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4,
    /// Dormand–Prince 5(4) with per-step error control; `dt` is the first trial step.
    Adaptive { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeStepperConfig {
    dt: f64,
    method: StepMethod,
}

impl OdeStepperConfig {
    pub fn rk4(dt: f64) -> Result<Self> {
        check_positive("dt", dt)?;
        Ok(Self {
            dt,
            method: StepMethod::Rk4,
        })
    }

    pub fn adaptive(dt: f64, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        check_positive("dt", dt)?;
        check_positive("abs_tol", abs_tol)?;
        check_positive("rel_tol", rel_tol)?;
        Ok(Self {
            dt,
            method: StepMethod::Adaptive { abs_tol, rel_tol },
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn method(&self) -> StepMethod {
        self.method
    }
}

/// Integrates `dy/dt = rhs(t, y)` and records the full state at each grid time.
///
/// The first sample is `y0` itself, attributed to `t_grid[0]`.
pub fn integrate_ode<T, F>(
    rhs: F,
    y0: &[T],
    t_grid: &[f64],
    cfg: &OdeStepperConfig,
) -> Result<TimeSeries<Vec<T>>>
where
    T: OdeElement,
    F: FnMut(f64, &[T], &mut [T]),
{
    integrate_ode_observed(rhs, y0, t_grid, cfg, |_, y| Ok(y.to_vec()))
}

/// Like [`integrate_ode`] but stores only what `observe` extracts from each state.
pub fn integrate_ode_observed<T, F, O, S>(
    mut rhs: F,
    y0: &[T],
    t_grid: &[f64],
    cfg: &OdeStepperConfig,
    mut observe: O,
) -> Result<TimeSeries<S>>
where
    T: OdeElement,
    F: FnMut(f64, &[T], &mut [T]),
    O: FnMut(f64, &[T]) -> Result<S>,
{
    check_grid(t_grid)?;
    let mut y = y0.to_vec();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationDiverged { t: t_grid[0] });
    }
    let mut stepper = OdeStepper::new(y.len(), *cfg);
    let mut samples = Vec::with_capacity(t_grid.len());
    samples.push(observe(t_grid[0], &y)?);
    for w in t_grid.windows(2) {
        stepper.advance(&mut rhs, w[0], w[1], &mut y)?;
        samples.push(observe(w[1], &y)?);
    }
    TimeSeries::new(t_grid.to_vec(), samples)
}

/// Reusable stepping workspace for a state of fixed dimension.
#[derive(Debug, Clone)]
pub struct OdeStepper<T> {
    cfg: OdeStepperConfig,
    stages: [Vec<T>; 7],
    scratch: Vec<T>,
    trial: Vec<T>,
    /// Step size carried between calls in adaptive mode.
    h_next: f64,
}

impl<T: OdeElement> OdeStepper<T> {
    pub fn new(dim: usize, cfg: OdeStepperConfig) -> Self {
        let zeros = || vec![T::default(); dim];
        Self {
            cfg,
            stages: std::array::from_fn(|_| zeros()),
            scratch: zeros(),
            trial: zeros(),
            h_next: cfg.dt,
        }
    }

    /// Moves `y` from `t0` to `t1`.
    pub fn advance<F>(&mut self, rhs: &mut F, t0: f64, t1: f64, y: &mut [T]) -> Result<()>
    where
        F: FnMut(f64, &[T], &mut [T]),
    {
        if y.len() != self.scratch.len() {
            return Err(Error::Shape(format!(
                "stepper built for dimension {}, state has {}",
                self.scratch.len(),
                y.len()
            )));
        }
        if !(t1 > t0) {
            return Err(invalid(format!("cannot step from {t0} to {t1}")));
        }
        match self.cfg.method {
            StepMethod::Rk4 => {
                let gap = t1 - t0;
                // The 1e-9 slack keeps an exact multiple of dt from gaining a sliver step.
                let n = ((gap / self.cfg.dt) * (1.0 - 1e-9)).ceil().max(1.0) as usize;
                let h = gap / n as f64;
                for k in 0..n {
                    let t = t0 + h * k as f64;
                    self.rk4_step(rhs, t, h, y);
                    if y.iter().any(|v| !v.is_finite()) {
                        return Err(Error::IntegrationDiverged { t: t + h });
                    }
                }
                Ok(())
            }
            StepMethod::Adaptive { abs_tol, rel_tol } => {
                self.dopri_span(rhs, t0, t1, y, abs_tol, rel_tol)
            }
        }
    }

    fn rk4_step<F>(&mut self, rhs: &mut F, t: f64, h: f64, y: &mut [T])
    where
        F: FnMut(f64, &[T], &mut [T]),
    {
        let [k1, k2, k3, k4, ..] = &mut self.stages;
        let tmp = &mut self.scratch;
        rhs(t, y, k1);
        for i in 0..y.len() {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, tmp, k2);
        for i in 0..y.len() {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, tmp, k3);
        for i in 0..y.len() {
            tmp[i] = y[i] + k3[i] * h;
        }
        rhs(t + h, tmp, k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] = y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * w;
        }
    }

    fn dopri_span<F>(
        &mut self,
        rhs: &mut F,
        t0: f64,
        t1: f64,
        y: &mut [T],
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<()>
    where
        F: FnMut(f64, &[T], &mut [T]),
    {
        let mut t = t0;
        let mut h = self.h_next.min(t1 - t0);
        while t < t1 {
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            let err = self.dopri_trial(rhs, t, h, y, abs_tol, rel_tol);
            if !err.is_finite() {
                if h < 1e-14 * t1.abs().max(1.0) {
                    return Err(Error::IntegrationDiverged { t });
                }
                h *= 0.25;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&self.trial);
                if !last {
                    self.h_next = h * factor;
                }
                h *= factor;
            } else {
                h *= factor;
                if h < 1e-14 * t1.abs().max(1.0) {
                    return Err(Error::IntegrationUnstable {
                        t,
                        quantity: "adaptive step size",
                        deviation: h,
                    });
                }
            }
        }
        Ok(())
    }

    /// One Dormand–Prince trial step into `self.trial`; returns the scaled error norm.
    fn dopri_trial<F>(
        &mut self,
        rhs: &mut F,
        t: f64,
        h: f64,
        y: &[T],
        abs_tol: f64,
        rel_tol: f64,
    ) -> f64
    where
        F: FnMut(f64, &[T], &mut [T]),
    {
        const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
        const A: [&[f64]; 7] = [
            &[],
            &[0.2],
            &[3.0 / 40.0, 9.0 / 40.0],
            &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
            &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
            &[
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
            ],
            &[
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
            ],
        ];
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let n = y.len();
        for s in 0..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in A[s].iter().enumerate() {
                    if *a != 0.0 {
                        acc = acc + self.stages[j][i] * (a * h);
                    }
                }
                self.scratch[i] = acc;
            }
            if s == 6 {
                self.trial.copy_from_slice(&self.scratch);
            }
            rhs(t + C[s] * h, &self.scratch, &mut self.stages[s]);
        }
        let mut sum = 0.0;
        for i in 0..n {
            let mut e = T::default();
            for (s, w) in E.iter().enumerate() {
                if *w != 0.0 {
                    e = e + self.stages[s][i] * (w * h);
                }
            }
            let scale = abs_tol + rel_tol * y[i].magnitude().max(self.trial[i].magnitude());
            let r = e.magnitude() / scale;
            sum += r * r;
        }
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0];
    }

    #[test]
    fn zero_field_keeps_state() {
        let cfg = OdeStepperConfig::rk4(0.1).unwrap();
        let v = [1.5, -2.0, 0.25];
        let out = integrate_ode(|_, _, dy: &mut [f64]| dy.fill(0.0), &v, &[0.0, 0.3, 7.0], &cfg)
            .unwrap();
        assert!(out.samples.iter().all(|s| s == &v));
    }

    #[test]
    fn exponential_decay() {
        let cfg = OdeStepperConfig::rk4(1e-3).unwrap();
        let out = integrate_ode(decay, &[1.0], &[0.0, 1.0], &cfg).unwrap();
        assert!((out.samples[1][0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |dt: f64| {
            let cfg = OdeStepperConfig::rk4(dt).unwrap();
            let out = integrate_ode(decay, &[1.0], &[0.0, 1.0], &cfg).unwrap();
            (out.samples[1][0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio >= 15.0 && (ratio - 16.0).abs() < 1.6, "ratio {ratio}");
    }

    #[test]
    fn harmonic_energy_drift() {
        let cfg = OdeStepperConfig::rk4(1e-3).unwrap();
        let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let out = integrate_ode(rhs, &[1.0, 0.0], &[0.0, 100.0], &cfg).unwrap();
        let s = &out.samples[1];
        let energy = 0.5 * (s[0] * s[0] + s[1] * s[1]);
        assert!((energy - 0.5).abs() / 0.5 < 1e-8);
        // Exact rotation solution.
        assert!((s[0] - 100f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn divergence_is_reported_with_time() {
        let cfg = OdeStepperConfig::rk4(1e-2).unwrap();
        // y' = y^2 blows up at t = 1 from y(0) = 1.
        let err = integrate_ode(
            |_, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0],
            &[1.0],
            &[0.0, 2.0],
            &cfg,
        )
        .unwrap_err();
        match err {
            Error::IntegrationDiverged { t } => assert!(t > 0.9 && t < 1.2, "t = {t}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adaptive_matches_exact() {
        let cfg = OdeStepperConfig::adaptive(0.1, 1e-12, 1e-10).unwrap();
        let grid = [0.0, 0.5, 1.0, 5.0];
        let out = integrate_ode(decay, &[1.0], &grid, &cfg).unwrap();
        for (t, s) in out.iter() {
            assert!((s[0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn complex_state_rotates() {
        let cfg = OdeStepperConfig::rk4(1e-3).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let out = integrate_ode(
            |_, y: &[Complex64], dy: &mut [Complex64]| dy[0] = -i * y[0],
            &[Complex64::new(1.0, 0.0)],
            &[0.0, 2.0],
            &cfg,
        )
        .unwrap();
        let z = out.samples[1][0];
        assert!((z - Complex64::new(2f64.cos(), -(2f64.sin()))).norm() < 1e-10);
    }

    #[test]
    fn bad_grid_rejected() {
        let cfg = OdeStepperConfig::rk4(0.1).unwrap();
        assert!(integrate_ode(decay, &[1.0], &[0.0, 0.0], &cfg).is_err());
        assert!(OdeStepperConfig::rk4(0.0).is_err());
    }
}
