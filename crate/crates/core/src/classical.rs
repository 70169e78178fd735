//! Classical active particles in one dimension: run-and-tumble driven by a
//! telegraph process, active Brownian motion, and the active
//! Ornstein–Uhlenbeck particle. Closed-form variances plus Langevin
//! simulators used as oracles.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{check_nonneg, check_positive, invalid, Result};
use crate::numerics::{integrate_sde_em, RngStream, SampleMoments, StreamRng};
use crate::series::{check_grid, TimeSeries};
use crate::trajectories::ensemble_stats;

/// Two-state process on `{−1, +1}`: `−1 → +1` at rate `up`, `+1 → −1` at rate `down`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Telegraph {
    up: f64,
    down: f64,
}

/// Where a telegraph path starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TelegraphStart {
    Fixed(f64),
    /// Draw `+1` with probability `(1 + m)/2`.
    Mixed(f64),
    Stationary,
}

/// A sampled telegraph path: its value at each grid time and its integral
/// over each grid interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphPath {
    pub values: Vec<f64>,
    pub integrals: Vec<f64>,
    /// Times of the switches, in order.
    pub switches: Vec<f64>,
}

impl Telegraph {
    pub fn new(up: f64, down: f64) -> Result<Self> {
        check_nonneg("gamma_up", up)?;
        check_nonneg("gamma_down", down)?;
        check_positive("gamma_up + gamma_down", up + down)?;
        Ok(Self { up, down })
    }

    pub fn relaxation_rate(&self) -> f64 {
        self.up + self.down
    }

    pub fn stationary_mean(&self) -> f64 {
        (self.up - self.down) / (self.up + self.down)
    }

    /// Exit rate from `state`.
    pub fn exit_rate(&self, state: f64) -> f64 {
        if state > 0.0 {
            self.down
        } else {
            self.up
        }
    }

    /// Exponential holding time in `state`; infinite if that state is absorbing.
    pub fn holding_time(&self, state: f64, rng: &mut StreamRng) -> f64 {
        let e: f64 = rng.sample(Exp1);
        e / self.exit_rate(state)
    }

    pub fn initial_state(&self, start: TelegraphStart, rng: &mut StreamRng) -> Result<f64> {
        let mean = match start {
            TelegraphStart::Fixed(s) if s == 1.0 || s == -1.0 => return Ok(s),
            TelegraphStart::Fixed(s) => {
                return Err(invalid(format!("telegraph state must be ±1, got {s}")))
            }
            TelegraphStart::Mixed(m) => m,
            TelegraphStart::Stationary => self.stationary_mean(),
        };
        if !(-1.0..=1.0).contains(&mean) {
            return Err(invalid(format!("polarisation {mean} outside [-1, 1]")));
        }
        let u: f64 = rng.random();
        Ok(if u < 0.5 * (1.0 + mean) { 1.0 } else { -1.0 })
    }

    /// Exact event-driven path sampled on `t_grid`.
    pub fn path(
        &self,
        start: TelegraphStart,
        t_grid: &[f64],
        rng: &mut StreamRng,
    ) -> Result<TelegraphPath> {
        check_grid(t_grid)?;
        let mut state = self.initial_state(start, rng)?;
        let mut now = t_grid[0];
        let mut next = now + self.holding_time(state, rng);
        let mut values = Vec::with_capacity(t_grid.len());
        let mut integrals = Vec::with_capacity(t_grid.len().saturating_sub(1));
        let mut switches = Vec::new();
        values.push(state);
        for &end in &t_grid[1..] {
            let mut area = 0.0;
            while next <= end {
                area += state * (next - now);
                now = next;
                state = -state;
                switches.push(now);
                next = now + self.holding_time(state, rng);
            }
            area += state * (end - now);
            now = end;
            values.push(state);
            integrals.push(area);
        }
        Ok(TelegraphPath {
            values,
            integrals,
            switches,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtdParams {
    pub v0: f64,
    pub d: f64,
    pub telegraph: Telegraph,
}

impl RtdParams {
    pub fn new(v0: f64, d: f64, gamma_up: f64, gamma_down: f64) -> Result<Self> {
        if !v0.is_finite() {
            return Err(invalid("v0 must be finite"));
        }
        check_nonneg("D", d)?;
        Ok(Self {
            v0,
            d,
            telegraph: Telegraph::new(gamma_up, gamma_down)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbpParams {
    pub v0: f64,
    pub d1: f64,
    pub d2: f64,
}

impl AbpParams {
    pub fn new(v0: f64, d1: f64, d2: f64) -> Result<Self> {
        if !v0.is_finite() {
            return Err(invalid("v0 must be finite"));
        }
        check_nonneg("D1", d1)?;
        check_positive("D2", d2)?;
        Ok(Self { v0, d1, d2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoupParams {
    pub d: f64,
    pub d_u: f64,
    pub tau: f64,
}

impl AoupParams {
    pub fn new(d: f64, d_u: f64, tau: f64) -> Result<Self> {
        check_nonneg("D", d)?;
        check_nonneg("D_u", d_u)?;
        check_positive("tau", tau)?;
        Ok(Self { d, d_u, tau })
    }
}

/// `D + v₀²(1 − m∞²)/Γ₊`.
pub fn rtd_diffusion(p: &RtdParams) -> f64 {
    let m = p.telegraph.stationary_mean();
    p.d + p.v0 * p.v0 * (1.0 - m * m) / p.telegraph.relaxation_rate()
}

/// Position variance with the telegraph started in its stationary mixture.
pub fn rtd_variance(t: f64, p: &RtdParams) -> f64 {
    let g = p.telegraph.relaxation_rate();
    let m = p.telegraph.stationary_mean();
    2.0 * p.d * t + 2.0 * p.v0 * p.v0 * (1.0 - m * m) / g * (t + (-g * t).exp_m1() / g)
}

/// Stationary connected autocorrelation `(1 − m∞²) e^{−Γ₊t}`.
pub fn telegraph_correlation(t: f64, tel: &Telegraph) -> f64 {
    let m = tel.stationary_mean();
    (1.0 - m * m) * (-tel.relaxation_rate() * t).exp()
}

/// `2D₁t + (v₀²/D₂)t + (v₀²/D₂²)(e^{−D₂t} − 1)`, orientation uniform at `t = 0`.
pub fn abp_variance(t: f64, p: &AbpParams) -> f64 {
    let a = p.v0 * p.v0 / p.d2;
    2.0 * p.d1 * t + a * t + a / p.d2 * (-p.d2 * t).exp_m1()
}

/// `D₁ + v₀²/2D₂`.
pub fn abp_diffusion(p: &AbpParams) -> f64 {
    p.d1 + p.v0 * p.v0 / (2.0 * p.d2)
}

/// `2Dt + 2D_u(t − τ(1 − e^{−t/τ}))`, active velocity stationary at `t = 0`.
pub fn aoup_variance(t: f64, p: &AoupParams) -> f64 {
    2.0 * p.d * t + 2.0 * p.d_u * (t + p.tau * (-t / p.tau).exp_m1())
}

/// `D + D_u`.
pub fn aoup_diffusion(p: &AoupParams) -> f64 {
    p.d + p.d_u
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LangevinModel {
    Rtd(RtdParams),
    Abp(AbpParams),
    Aoup(AoupParams),
}

impl LangevinModel {
    pub fn analytic_variance(&self, t: f64) -> f64 {
        match self {
            Self::Rtd(p) => rtd_variance(t, p),
            Self::Abp(p) => abp_variance(t, p),
            Self::Aoup(p) => aoup_variance(t, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinConfig {
    pub n_traj: usize,
    pub seed: u64,
    /// Euler–Maruyama step for the continuous degrees of freedom.
    pub dt: f64,
}

impl LangevinConfig {
    pub fn new(n_traj: usize, seed: u64, dt: f64) -> Result<Self> {
        if n_traj < 2 {
            return Err(invalid("an ensemble needs at least 2 trajectories"));
        }
        check_positive("dt", dt)?;
        Ok(Self { n_traj, seed, dt })
    }
}

/// One displacement path `x(t) − x(t₀)` of `model` on `t_grid`.
pub fn langevin_path(
    model: &LangevinModel,
    t_grid: &[f64],
    dt: f64,
    rng: &mut StreamRng,
) -> Result<TimeSeries<f64>> {
    check_grid(t_grid)?;
    match model {
        LangevinModel::Rtd(p) => {
            // Switching is exact; the Brownian part is additive, so one Gaussian
            // per grid interval is already exact.
            let path = p.telegraph.path(TelegraphStart::Stationary, t_grid, rng)?;
            let mut x = 0.0;
            let mut xs = Vec::with_capacity(t_grid.len());
            xs.push(0.0);
            for (k, w) in t_grid.windows(2).enumerate() {
                let n: f64 = rng.sample(StandardNormal);
                x += p.v0 * path.integrals[k] + (2.0 * p.d * (w[1] - w[0])).sqrt() * n;
                xs.push(x);
            }
            TimeSeries::new(t_grid.to_vec(), xs)
        }
        LangevinModel::Abp(p) => {
            let theta0 = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let (v0, a1, a2) = (p.v0, (2.0 * p.d1).sqrt(), (2.0 * p.d2).sqrt());
            let out = integrate_sde_em(
                |_, y: &[f64], a: &mut [f64]| {
                    a[0] = v0 * y[1].cos();
                    a[1] = 0.0;
                },
                |_, _, dw: &[f64], dy: &mut [f64]| {
                    dy[0] += a1 * dw[0];
                    dy[1] += a2 * dw[1];
                },
                2,
                &[0.0, theta0],
                t_grid,
                rng,
                dt,
            )?;
            Ok(out.map(|y| y[0]))
        }
        LangevinModel::Aoup(p) => {
            let u0 = (p.d_u / p.tau).sqrt() * rng.sample::<f64, _>(StandardNormal);
            let (tau, a1, a2) = (p.tau, (2.0 * p.d).sqrt(), (2.0 * p.d_u).sqrt() / p.tau);
            let out = integrate_sde_em(
                |_, y: &[f64], a: &mut [f64]| {
                    a[0] = y[1];
                    a[1] = -y[1] / tau;
                },
                |_, _, dw: &[f64], dy: &mut [f64]| {
                    dy[0] += a1 * dw[0];
                    dy[1] += a2 * dw[1];
                },
                2,
                &[0.0, u0],
                t_grid,
                rng,
                dt,
            )?;
            Ok(out.map(|y| y[0]))
        }
    }
}

/// Ensemble displacement statistics; trajectory `k` uses stream `k` of `cfg.seed`.
pub fn simulate_langevin(
    model: &LangevinModel,
    t_grid: &[f64],
    cfg: &LangevinConfig,
) -> Result<TimeSeries<SampleMoments>> {
    let paths = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|k| langevin_path(model, t_grid, cfg.dt, &mut RngStream::new(cfg.seed, k).rng()))
        .collect::<Result<Vec<_>>>()?;
    ensemble_stats(&paths)
}

/// Ensemble of `cos θ(t) cos θ(0)` for the active Brownian orientation.
pub fn abp_orientation_correlation(
    p: &AbpParams,
    t_grid: &[f64],
    cfg: &LangevinConfig,
) -> Result<TimeSeries<SampleMoments>> {
    let a2 = (2.0 * p.d2).sqrt();
    let paths = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(cfg.seed, k).rng();
            let theta0 = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let out = integrate_sde_em(
                |_, _, a: &mut [f64]| a[0] = 0.0,
                |_, _, dw: &[f64], dy: &mut [f64]| dy[0] += a2 * dw[0],
                1,
                &[theta0],
                t_grid,
                &mut rng,
                cfg.dt,
            )?;
            Ok(out.map(|y| y[0].cos() * theta0.cos()))
        })
        .collect::<Result<Vec<_>>>()?;
    ensemble_stats(&paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rtd_diffusion_values() {
        assert_eq!(rtd_diffusion(&RtdParams::new(1.0, 0.0, 0.5, 0.5).unwrap()), 1.0);
        assert_eq!(rtd_diffusion(&RtdParams::new(3.0, 0.2, 1.0, 0.0).unwrap()), 0.2);
        assert_eq!(rtd_diffusion(&RtdParams::new(3.0, 0.2, 0.0, 2.0).unwrap()), 0.2);
        assert_eq!(rtd_diffusion(&RtdParams::new(2.0, 0.5, 2.0, 2.0).unwrap()), 1.5);
    }

    #[test]
    fn abp_values() {
        let p = AbpParams::new(1.0, 0.0, 0.5).unwrap();
        assert_eq!(abp_variance(0.0, &p), 0.0);
        assert_eq!(abp_diffusion(&p), 1.0);
        let t = 1e-4;
        let q = AbpParams::new(1.3, 0.2, 0.7).unwrap();
        let taylor = 2.0 * 0.2 * t + 1.69 * t * t / 2.0;
        assert!((abp_variance(t, &q) - taylor).abs() < 1e-12);
        let (t, h) = (200.0, 1e-2);
        let slope = (abp_variance(t + h, &p) - abp_variance(t - h, &p)) / (2.0 * h);
        assert!((slope - 2.0).abs() < 1e-9);
    }

    #[test]
    fn aoup_values() {
        let p = AoupParams::new(0.3, 1.2, 2.0).unwrap();
        assert_eq!(aoup_variance(0.0, &p), 0.0);
        let (t, h) = (400.0, 1e-2);
        let slope = (aoup_variance(t + h, &p) - aoup_variance(t - h, &p)) / (2.0 * h);
        assert!((slope - 2.0 * aoup_diffusion(&p)).abs() < 1e-9);
    }

    #[test]
    fn telegraph_fixed_start_and_absorbing_state() {
        let tel = Telegraph::new(0.0, 1.0).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let path = tel
            .path(TelegraphStart::Fixed(1.0), &[0.0, 100.0, 200.0], &mut rng)
            .unwrap();
        assert_eq!(path.values, vec![1.0, -1.0, -1.0]);
        assert_eq!(path.switches.len(), 1);
        let s = path.switches[0];
        assert!((path.integrals[0] - (s - (100.0 - s))).abs() < 1e-12);
        assert!(tel
            .path(TelegraphStart::Fixed(0.5), &[0.0, 1.0], &mut rng)
            .is_err());
    }

    #[test]
    fn rtd_ensemble_matches_long_time_law() {
        let model = LangevinModel::Rtd(RtdParams::new(1.0, 0.0, 0.5, 0.5).unwrap());
        let cfg = LangevinConfig::new(10_000, 4, 0.01).unwrap();
        let out = simulate_langevin(&model, &[0.0, 5.0, 20.0], &cfg).unwrap();
        let s = out.samples[2];
        let target = model.analytic_variance(20.0);
        assert!((target - (40.0 - 2.0 * (1.0 - (-20f64).exp()))).abs() < 1e-12);
        assert!((s.variance - target).abs() < 3.0 * s.se_variance, "{s:?} vs {target}");
    }
}
