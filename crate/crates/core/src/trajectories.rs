//! Stochastic unravelings of the spin-orbit model at infinite mass.
//!
//! Quantum-jump trajectories count the spin's up and down emissions; between
//! clicks the spin stays in a `σ_z` eigenstate, so `⟨σ_z⟩` is a telegraph
//! signal. Diffusive (homodyne) trajectories instead move the Bloch angle
//! `θ` continuously, with `⟨σ_z⟩ = cos θ`.
//!
//! The particle is carried along through its conditional moments
//! `X = ⟨x⟩`, `C = ⟨σ_z x⟩` and `Q = ⟨x²⟩`. Their drifts are the exact
//! linear moment equations; the measurement noise uses a factorised closure.
//! Because the noise has zero mean, the ensemble estimator
//! `E[Q] − E[X]²` recovers the unconditional position variance.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::classical::{Telegraph, TelegraphStart};
use crate::error::{check_positive, invalid, Error, Result};
use crate::numerics::{moments_of, pairwise_sum, RngStream, SampleMoments, StreamRng};
use crate::series::{check_grid, TimeSeries};
use crate::spin_orbit::{Mass, SpinOrbitParams};

/// Largest allowed `dt · max(rate)`.
pub const MAX_STEP_PROBABILITY: f64 = 0.05;

/// Floor on `sin θ` where the drift has a pole.
pub const POLE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnravelingKind {
    QuantumJump,
    StateDiffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpSampling {
    /// One Bernoulli trial with probability `rate · dt` per step.
    PerStep,
    /// Exponential holding times, no time discretisation.
    ExactWaitingTime,
}

/// Which dissipation channels are monitored. Unmonitored channels act
/// deterministically on the conditional state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonitoredChannels {
    pub spin_up: bool,
    pub spin_down: bool,
    pub momentum_diffusion: bool,
}

impl MonitoredChannels {
    pub const ALL: Self = Self {
        spin_up: true,
        spin_down: true,
        momentum_diffusion: true,
    };
}

impl Default for MonitoredChannels {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnravelingConfig {
    pub kind: UnravelingKind,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub channels: MonitoredChannels,
    pub jump_sampling: JumpSampling,
    /// Initial `⟨σ_z⟩`. Jump trajectories draw `±1` with matching odds;
    /// diffusive ones start at `θ = arccos s_z`.
    pub initial_polarization: f64,
    /// Amplitude of the position noise from the momentum channel; `None`
    /// means `√Γ_d`.
    pub position_noise: Option<f64>,
}

impl UnravelingConfig {
    pub fn new(kind: UnravelingKind, dt: f64, n_traj: usize, seed: u64) -> Self {
        Self {
            kind,
            dt,
            n_traj,
            seed,
            channels: MonitoredChannels::ALL,
            jump_sampling: JumpSampling::PerStep,
            initial_polarization: 0.0,
            position_noise: None,
        }
    }

    pub fn validate(&self, p: &SpinOrbitParams) -> Result<()> {
        check_positive("dt", self.dt)?;
        if self.n_traj == 0 {
            return Err(invalid("n_traj must be at least 1"));
        }
        let fastest = p.gamma_up().max(p.gamma_down()).max(p.gamma_d());
        if self.dt * fastest >= MAX_STEP_PROBABILITY {
            return Err(invalid(format!(
                "dt·max(rate) = {} must stay below {MAX_STEP_PROBABILITY}",
                self.dt * fastest
            )));
        }
        if !(-1.0..=1.0).contains(&self.initial_polarization) {
            return Err(invalid("initial polarisation must lie in [-1, 1]"));
        }
        if let Some(a) = self.position_noise {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid("position noise amplitude must be finite and >= 0"));
            }
        }
        if p.mass() != Mass::Infinite {
            return Err(Error::WrongRegime("the unravelings are implemented at infinite mass"));
        }
        if self.kind == UnravelingKind::QuantumJump
            && !(self.channels.spin_up && self.channels.spin_down)
        {
            return Err(invalid("quantum-jump trajectories need both spin channels monitored"));
        }
        Ok(())
    }

    fn position_amplitude(&self, p: &SpinOrbitParams) -> f64 {
        self.position_noise.unwrap_or_else(|| p.gamma_d().sqrt())
    }
}

/// Conditional expectation values carried by one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalSample {
    pub s_z: f64,
    pub x: f64,
    pub x2: f64,
}

/// Telegraph `⟨σ_z⟩` of a single quantum-jump trajectory.
pub fn qj_tls_trajectory(
    p: &SpinOrbitParams,
    t_grid: &[f64],
    rng: &mut StreamRng,
    cfg: &UnravelingConfig,
) -> Result<TimeSeries<f64>> {
    Ok(qj_particle_trajectory(p, t_grid, rng, cfg)?.map(|s| s.s_z))
}

/// Time to the first down-jump starting from spin up.
pub fn qj_waiting_time(
    p: &SpinOrbitParams,
    rng: &mut StreamRng,
    cfg: &UnravelingConfig,
) -> Result<f64> {
    cfg.validate(p)?;
    let tel = Telegraph::new(p.gamma_up(), p.gamma_down())?;
    match cfg.jump_sampling {
        JumpSampling::ExactWaitingTime => Ok(tel.holding_time(1.0, rng)),
        JumpSampling::PerStep => {
            if p.gamma_down() == 0.0 {
                return Ok(f64::INFINITY);
            }
            let prob = p.gamma_down() * cfg.dt;
            let mut steps = 1u64;
            while rng.random::<f64>() >= prob {
                steps += 1;
            }
            Ok(steps as f64 * cfg.dt)
        }
    }
}

/// Quantum-jump trajectory of spin and particle.
pub fn qj_particle_trajectory(
    p: &SpinOrbitParams,
    t_grid: &[f64],
    rng: &mut StreamRng,
    cfg: &UnravelingConfig,
) -> Result<TimeSeries<ConditionalSample>> {
    cfg.validate(p)?;
    check_grid(t_grid)?;
    let tel = Telegraph::new(p.gamma_up(), p.gamma_down())?;
    let lam = p.lambda();
    let amp = if cfg.channels.momentum_diffusion {
        cfg.position_amplitude(p)
    } else {
        0.0
    };
    // Conditional spread Q − X², which only grows if the momentum channel is unread.
    let spread_rate = if cfg.channels.momentum_diffusion {
        0.0
    } else {
        p.gamma_d()
    };
    let start = TelegraphStart::Mixed(cfg.initial_polarization);
    let mut samples = Vec::with_capacity(t_grid.len());
    match cfg.jump_sampling {
        JumpSampling::ExactWaitingTime => {
            let path = tel.path(start, t_grid, rng)?;
            let (mut x, mut spread) = (0.0, 0.0);
            samples.push(ConditionalSample {
                s_z: path.values[0],
                x,
                x2: 0.0,
            });
            for (k, w) in t_grid.windows(2).enumerate() {
                let gap = w[1] - w[0];
                let n: f64 = rng.sample(StandardNormal);
                x += lam * path.integrals[k] + amp * gap.sqrt() * n;
                spread += spread_rate * gap;
                samples.push(ConditionalSample {
                    s_z: path.values[k + 1],
                    x,
                    x2: x * x + spread,
                });
            }
        }
        JumpSampling::PerStep => {
            let mut z = tel.initial_state(start, rng)?;
            let (mut x, mut spread) = (0.0, 0.0);
            samples.push(ConditionalSample { s_z: z, x, x2: 0.0 });
            for w in t_grid.windows(2) {
                let (steps, h) = substeps(w[0], w[1], cfg.dt);
                let sqrt_h = h.sqrt();
                for _ in 0..steps {
                    let n: f64 = rng.sample(StandardNormal);
                    x += lam * z * h + amp * sqrt_h * n;
                    spread += spread_rate * h;
                    if rng.random::<f64>() < tel.exit_rate(z) * h {
                        z = -z;
                    }
                }
                samples.push(ConditionalSample {
                    s_z: z,
                    x,
                    x2: x * x + spread,
                });
            }
        }
    }
    TimeSeries::new(t_grid.to_vec(), samples)
}

fn substeps(t0: f64, t1: f64, dt: f64) -> (usize, f64) {
    let gap = t1 - t0;
    let n = ((gap / dt) * (1.0 - 1e-9)).ceil().max(1.0) as usize;
    (n, gap / n as f64)
}

/// One Euler–Maruyama step of the Bloch angle; returns the new angle and the
/// noise part of `d cos θ`.
fn bloch_step(
    theta: f64,
    p: &SpinOrbitParams,
    channels: &MonitoredChannels,
    h: f64,
    dw_up: f64,
    dw_down: f64,
) -> (f64, f64) {
    let (up, down) = (p.gamma_up(), p.gamma_down());
    let c = theta.cos();
    let s = theta.sin().max(POLE_GUARD);
    // Each monitored channel carries the Itô correction that keeps the mean
    // of cos θ on the rate equation; the combined drift is then regular.
    let drift_up = if channels.spin_up {
        -up * s * (1.0 - 0.5 * c)
    } else {
        -up * (1.0 - c) / s
    };
    let drift_down = if channels.spin_down {
        down * s * (1.0 + 0.5 * c)
    } else {
        down * (1.0 + c) / s
    };
    let noise_up = if channels.spin_up {
        -up.sqrt() * (1.0 - c) * dw_up
    } else {
        0.0
    };
    let noise_down = if channels.spin_down {
        down.sqrt() * (1.0 + c) * dw_down
    } else {
        0.0
    };
    let noise = noise_up + noise_down;
    let mut next = theta + (drift_up + drift_down) * h + noise;
    // Reflect into [0, π].
    if next < 0.0 {
        next = -next;
    }
    if next > std::f64::consts::PI {
        next = 2.0 * std::f64::consts::PI - next;
    }
    (next.clamp(0.0, std::f64::consts::PI), -s * noise)
}

/// Bloch angle of a single diffusive trajectory.
pub fn qsd_tls_trajectory(
    p: &SpinOrbitParams,
    t_grid: &[f64],
    rng: &mut StreamRng,
    cfg: &UnravelingConfig,
) -> Result<TimeSeries<f64>> {
    cfg.validate(p)?;
    check_grid(t_grid)?;
    let mut theta = cfg.initial_polarization.acos();
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(theta);
    for w in t_grid.windows(2) {
        let (steps, h) = substeps(w[0], w[1], cfg.dt);
        let sqrt_h = h.sqrt();
        for _ in 0..steps {
            let dw_up = sqrt_h * rng.sample::<f64, _>(StandardNormal);
            let dw_down = sqrt_h * rng.sample::<f64, _>(StandardNormal);
            theta = bloch_step(theta, p, &cfg.channels, h, dw_up, dw_down).0;
        }
        if !theta.is_finite() {
            return Err(Error::IntegrationDiverged { t: w[1] });
        }
        out.push(theta);
    }
    TimeSeries::new(t_grid.to_vec(), out)
}

/// Diffusive trajectory of spin and particle.
pub fn qsd_particle_trajectory(
    p: &SpinOrbitParams,
    t_grid: &[f64],
    rng: &mut StreamRng,
    cfg: &UnravelingConfig,
) -> Result<TimeSeries<ConditionalSample>> {
    cfg.validate(p)?;
    check_grid(t_grid)?;
    let (lam, gp, gm, gd) = (p.lambda(), p.gamma_plus(), p.gamma_minus(), p.gamma_d());
    let amp = if cfg.channels.momentum_diffusion {
        cfg.position_amplitude(p)
    } else {
        0.0
    };
    let mut theta = cfg.initial_polarization.acos();
    let (mut x, mut c, mut q) = (0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(ConditionalSample {
        s_z: theta.cos(),
        x,
        x2: q,
    });
    for w in t_grid.windows(2) {
        let (steps, h) = substeps(w[0], w[1], cfg.dt);
        let sqrt_h = h.sqrt();
        for _ in 0..steps {
            let dw_up = sqrt_h * rng.sample::<f64, _>(StandardNormal);
            let dw_down = sqrt_h * rng.sample::<f64, _>(StandardNormal);
            let dw_x = sqrt_h * rng.sample::<f64, _>(StandardNormal);
            let z = theta.cos();
            let (next, dz_noise) = bloch_step(theta, p, &cfg.channels, h, dw_up, dw_down);
            let dx = lam * z * h + amp * dw_x;
            let dc = (lam + gm * x - gp * c) * h + x * dz_noise + z * amp * dw_x;
            let dq = (2.0 * lam * c + gd) * h + 2.0 * x * amp * dw_x;
            theta = next;
            x += dx;
            c += dc;
            q += dq;
        }
        if !(theta.is_finite() && x.is_finite() && c.is_finite() && q.is_finite()) {
            return Err(Error::IntegrationDiverged { t: w[1] });
        }
        out.push(ConditionalSample {
            s_z: theta.cos(),
            x,
            x2: q,
        });
    }
    TimeSeries::new(t_grid.to_vec(), out)
}

/// Mean, unbiased variance and their standard errors across trajectories at
/// each grid time.
pub fn ensemble_stats(trajectories: &[TimeSeries<f64>]) -> Result<TimeSeries<SampleMoments>> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::Shape("no trajectories".into()))?;
    if trajectories.len() < 2 {
        return Err(Error::Shape("ensemble statistics need at least 2 trajectories".into()));
    }
    if trajectories.iter().any(|tr| tr.times != first.times) {
        return Err(Error::Shape("trajectories sampled on different grids".into()));
    }
    let stats = (0..first.len())
        .map(|k| {
            let column: Vec<f64> = trajectories.iter().map(|tr| tr.samples[k]).collect();
            moments_of(&column)
        })
        .collect();
    TimeSeries::new(first.times.clone(), stats)
}

/// Estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
}

/// `E[Q] − E[X]²` over trajectories, with a delta-method standard error.
pub fn conditional_variance(samples: &[ConditionalSample]) -> Estimate {
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
    let qs: Vec<f64> = samples.iter().map(|s| s.x2).collect();
    let mean_x = pairwise_sum(&xs) / n;
    let mean_q = pairwise_sum(&qs) / n;
    let influence: Vec<f64> = samples.iter().map(|s| s.x2 - 2.0 * mean_x * s.x).collect();
    Estimate {
        value: mean_q - mean_x * mean_x,
        standard_error: moments_of(&influence).se_mean,
    }
}

/// Ensemble averages of one unraveling, sampled on the common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UnravelingEnsemble {
    pub s_z: TimeSeries<SampleMoments>,
    pub var_x: TimeSeries<Estimate>,
}

/// Runs `cfg.n_traj` trajectories of `cfg.kind`; trajectory `k` draws from
/// stream `k` of `cfg.seed`.
pub fn run_ensemble(
    p: &SpinOrbitParams,
    t_grid: &[f64],
    cfg: &UnravelingConfig,
) -> Result<UnravelingEnsemble> {
    cfg.validate(p)?;
    if cfg.n_traj < 2 {
        return Err(invalid("an ensemble needs at least 2 trajectories"));
    }
    let runs = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(cfg.seed, k).rng();
            match cfg.kind {
                UnravelingKind::QuantumJump => qj_particle_trajectory(p, t_grid, &mut rng, cfg),
                UnravelingKind::StateDiffusion => qsd_particle_trajectory(p, t_grid, &mut rng, cfg),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let spins: Vec<TimeSeries<f64>> = runs.iter().map(|r| r.map(|s| s.s_z)).collect();
    let var = (0..t_grid.len())
        .map(|k| {
            let column: Vec<ConditionalSample> = runs.iter().map(|r| r.samples[k]).collect();
            conditional_variance(&column)
        })
        .collect();
    Ok(UnravelingEnsemble {
        s_z: ensemble_stats(&spins)?,
        var_x: TimeSeries::new(t_grid.to_vec(), var)?,
    })
}
