//! Fully dissipative spin-orbit coupling: each spin decay kicks the particle
//! momentum by `±p₀` (rates `Γ_L`, `Γ_R`), the spin is pumped up at `Γ_↑`,
//! and position monitoring at `Γ_p` diffuses the momentum.
//!
//! The moments `(⟨σ_z⟩, ⟨p⟩, ⟨p²⟩, ⟨σ_z p⟩)` close into an affine system.

use crate::error::{check_nonneg, check_positive, invalid, Error, Result};
use crate::numerics::{integrate_ode_observed, OdeStepperConfig};
use crate::series::TimeSeries;
use crate::spin_orbit::Mass;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickParams {
    mass: Mass,
    kick: f64,
    gamma_l: f64,
    gamma_r: f64,
    gamma_up: f64,
    gamma_p: f64,
}

impl KickParams {
    pub fn new(
        mass: Mass,
        kick: f64,
        gamma_l: f64,
        gamma_r: f64,
        gamma_up: f64,
        gamma_p: f64,
    ) -> Result<Self> {
        if !kick.is_finite() {
            return Err(invalid("kick magnitude must be finite"));
        }
        check_nonneg("gamma_l", gamma_l)?;
        check_nonneg("gamma_r", gamma_r)?;
        check_nonneg("gamma_up", gamma_up)?;
        check_nonneg("gamma_p", gamma_p)?;
        check_positive("gamma_up + gamma_l + gamma_r", gamma_up + gamma_l + gamma_r)?;
        Ok(Self {
            mass,
            kick,
            gamma_l,
            gamma_r,
            gamma_up,
            gamma_p,
        })
    }

    /// Equal kick rates `Γ_L = Γ_R = Γ`.
    pub fn symmetric(mass: Mass, kick: f64, gamma: f64, gamma_up: f64, gamma_p: f64) -> Result<Self> {
        Self::new(mass, kick, gamma, gamma, gamma_up, gamma_p)
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }
    pub fn kick(&self) -> f64 {
        self.kick
    }
    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }
    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }
    pub fn gamma_up(&self) -> f64 {
        self.gamma_up
    }
    pub fn gamma_p(&self) -> f64 {
        self.gamma_p
    }

    pub fn relaxation_rate(&self) -> f64 {
        self.gamma_up + self.gamma_l + self.gamma_r
    }

    pub fn stationary_polarization(&self) -> f64 {
        (self.gamma_up - self.gamma_l - self.gamma_r) / self.relaxation_rate()
    }

    fn is_symmetric(&self) -> bool {
        self.gamma_l == self.gamma_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KickMomentState {
    pub s_z: f64,
    pub p: f64,
    pub p2: f64,
    pub sz_p: f64,
}

impl KickMomentState {
    /// Product state with `p` sharply zero.
    pub fn at_rest(s_z: f64) -> Self {
        Self {
            s_z,
            ..Default::default()
        }
    }

    pub fn momentum_variance(&self) -> f64 {
        self.p2 - self.p * self.p
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s_z, self.p, self.p2, self.sz_p]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match *v {
            [s_z, p, p2, sz_p] => Ok(Self { s_z, p, p2, sz_p }),
            _ => Err(Error::Shape(format!("expected 4 moments, got {}", v.len()))),
        }
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if !self.to_array().iter().all(|v| v.is_finite()) {
            return Err(invalid("moments must be finite"));
        }
        if self.s_z.abs() > 1.0 + tol {
            return Err(invalid(format!("|s_z| = {} exceeds 1", self.s_z.abs())));
        }
        if self.momentum_variance() < -tol {
            return Err(invalid("momentum variance is negative"));
        }
        Ok(())
    }
}

pub fn kick_moment_derivative(s: &KickMomentState, k: &KickParams) -> KickMomentState {
    let asym = k.gamma_l - k.gamma_r;
    let excited = 1.0 + s.s_z;
    KickMomentState {
        s_z: (k.gamma_up - k.gamma_l - k.gamma_r) - k.relaxation_rate() * s.s_z,
        p: 0.5 * k.kick * asym * excited,
        p2: 0.5 * k.kick * k.kick * (k.gamma_l + k.gamma_r) * excited
            + k.kick * asym * (s.p + s.sz_p)
            + k.gamma_p,
        sz_p: -0.5 * asym * k.kick * excited + k.gamma_up * (s.p - s.sz_p),
    }
}

/// Homogeneous part of the generator, i.e. the derivative minus its value at
/// the zero state.
fn linear_part(s: &KickMomentState, k: &KickParams) -> KickMomentState {
    let full = kick_moment_derivative(s, k).to_array();
    let offset = kick_moment_derivative(&KickMomentState::default(), k).to_array();
    KickMomentState::from_slice(&[
        full[0] - offset[0],
        full[1] - offset[1],
        full[2] - offset[2],
        full[3] - offset[3],
    ])
    .expect("four entries")
}

/// First and second time derivatives of `Var(p)` at the initial state, so
/// that `Var(p) ≈ Var₀ + slope·t + ½·curvature·t²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeExpansion {
    pub slope: f64,
    pub curvature: f64,
}

pub fn short_time_expansion(s0: &KickMomentState, k: &KickParams) -> ShortTimeExpansion {
    let d1 = kick_moment_derivative(s0, k);
    let d2 = linear_part(&d1, k);
    ShortTimeExpansion {
        slope: d1.p2 - 2.0 * s0.p * d1.p,
        curvature: d2.p2 - 2.0 * d1.p * d1.p - 2.0 * s0.p * d2.p,
    }
}

/// Exact `Var(p)` for equal kick rates, from integrating the affine system.
pub fn variance_symmetric(t: f64, s0: &KickMomentState, k: &KickParams) -> Result<f64> {
    if !k.is_symmetric() {
        return Err(Error::WrongRegime("closed form needs gamma_l == gamma_r"));
    }
    let rate = k.relaxation_rate();
    let s_inf = k.stationary_polarization();
    let scale = k.kick * k.kick * k.gamma_l;
    Ok(s0.momentum_variance()
        + (scale * (1.0 + s_inf) + k.gamma_p) * t
        + scale * (s0.s_z - s_inf) * (-(-rate * t).exp_m1()) / rate)
}

/// Slope of `Var(p)` once the spin has relaxed; symmetric kicks only.
pub fn long_time_slope(k: &KickParams) -> Result<f64> {
    if !k.is_symmetric() {
        return Err(Error::WrongRegime("the momentum drifts ballistically for gamma_l != gamma_r"));
    }
    Ok(k.kick * k.kick * k.gamma_l * (1.0 + k.stationary_polarization()) + k.gamma_p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickSample {
    pub state: KickMomentState,
    pub var_p: f64,
}

pub fn evolve_kick_moments(
    s0: &KickMomentState,
    k: &KickParams,
    t_grid: &[f64],
    cfg: &OdeStepperConfig,
) -> Result<TimeSeries<KickSample>> {
    s0.validate(1e-9)?;
    integrate_ode_observed(
        |_, y: &[f64], dy: &mut [f64]| {
            let s = KickMomentState::from_slice(y).expect("dimension fixed at 4");
            dy.copy_from_slice(&kick_moment_derivative(&s, k).to_array());
        },
        &s0.to_array(),
        t_grid,
        cfg,
        |_, y| {
            let state = KickMomentState::from_slice(y)?;
            Ok(KickSample {
                state,
                var_p: state.momentum_variance(),
            })
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::linear_grid;

    fn fig(gamma_up: f64) -> KickParams {
        KickParams::symmetric(Mass::Finite(1.0), 1e-2, 0.1, gamma_up, 0.0).unwrap()
    }

    #[test]
    fn symmetric_kicks_do_not_drift() {
        let d = kick_moment_derivative(&KickMomentState::at_rest(0.3), &fig(0.1));
        assert_eq!(d.p, 0.0);
    }

    #[test]
    fn ground_state_without_pump_only_diffuses() {
        let k = KickParams::new(Mass::Infinite, 0.3, 0.2, 0.7, 0.0, 0.05).unwrap();
        let d = kick_moment_derivative(&KickMomentState::at_rest(-1.0), &k);
        assert_eq!(
            d,
            KickMomentState {
                p2: 0.05,
                ..Default::default()
            }
        );
    }

    #[test]
    fn equal_rates_polarize_to_minus_third() {
        assert!((fig(0.1).stationary_polarization() + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ode_matches_symmetric_closed_form() {
        let k = KickParams::symmetric(Mass::Infinite, 0.3, 0.1, 0.25, 0.02).unwrap();
        let s0 = KickMomentState {
            p2: 0.5,
            ..KickMomentState::at_rest(1.0)
        };
        let grid = linear_grid(0.0, 40.0, 21);
        let out = evolve_kick_moments(&s0, &k, &grid, &OdeStepperConfig::rk4(1e-2).unwrap()).unwrap();
        assert_eq!(out.samples[0].var_p, 0.5);
        for (t, s) in out.iter() {
            let exact = variance_symmetric(t, &s0, &k).unwrap();
            assert!((s.var_p - exact).abs() < 1e-12 * exact.max(1.0), "t={t}");
        }
    }

    #[test]
    fn expansion_matches_finite_differences() {
        let k = KickParams::new(Mass::Infinite, 0.4, 0.3, 0.1, 0.2, 0.01).unwrap();
        let s0 = KickMomentState {
            s_z: 0.5,
            p: 0.2,
            p2: 0.1,
            sz_p: 0.1,
        };
        let e = short_time_expansion(&s0, &k);
        let h = 1e-3;
        let grid = [0.0, h, 2.0 * h];
        let out = evolve_kick_moments(&s0, &k, &grid, &OdeStepperConfig::rk4(1e-5).unwrap()).unwrap();
        let v: Vec<f64> = out.samples.iter().map(|s| s.var_p).collect();
        // One-sided second-order stencils.
        let slope = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        let curvature = (v[0] - 2.0 * v[1] + v[2]) / (h * h);
        assert!((slope - e.slope).abs() < 1e-5 * e.slope.abs().max(1e-3), "{slope} {e:?}");
        assert!((curvature - e.curvature).abs() < 1e-2 * e.curvature.abs().max(1e-3), "{curvature} {e:?}");
    }

    #[test]
    fn printed_form_discrepancy_is_reported() {
        // The printed closed form misses Var₀ at t = 0 by its exponential term.
        let k = fig(0.1);
        let s0 = KickMomentState::at_rest(1.0);
        let s_inf = k.stationary_polarization();
        let total = 2.0 * 0.1;
        let printed = |t: f64| {
            2.0 * 0.1 * 1e-4 * (1.0 + s_inf) * t
                + 2.0 * 0.1 * 1e-4 * (s_inf - 1.0) / total * (-total * t).exp()
        };
        let at_zero = printed(0.0) - variance_symmetric(0.0, &s0, &k).unwrap();
        assert!(at_zero.abs() > 1e-5);
        let ratio = 2.0 * 0.1 * 1e-4 * (1.0 + s_inf) / long_time_slope(&k).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_slope_is_rejected() {
        let k = KickParams::new(Mass::Infinite, 0.4, 0.3, 0.1, 0.2, 0.0).unwrap();
        assert!(long_time_slope(&k).is_err());
        assert!(variance_symmetric(1.0, &KickMomentState::default(), &k).is_err());
    }
}
