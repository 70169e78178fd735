//! A particle with Hamiltonian `p²/2m + λpσ_z` whose spin is pumped up at
//! rate `Γ_↑` and relaxes down at rate `Γ_↓`, plus position noise from a
//! momentum-diffusion channel of rate `Γ_d`.
//!
//! The first and second moments form a closed linear system, integrated by
//! [`evolve_moments`] and solved exactly by [`analytic_moments`].

use crate::error::{check_nonneg, check_positive, invalid, Error, Result};
use crate::numerics::{integrate_ode_observed, OdeStepperConfig};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mass {
    Finite(f64),
    /// Drops every `1/m` term.
    Infinite,
}

impl Mass {
    pub fn new(m: f64) -> Result<Self> {
        if m == f64::INFINITY {
            return Ok(Self::Infinite);
        }
        check_positive("mass", m)?;
        Ok(Self::Finite(m))
    }

    pub fn inverse(self) -> f64 {
        match self {
            Self::Finite(m) => 1.0 / m,
            Self::Infinite => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOrbitParams {
    mass: Mass,
    lambda: f64,
    gamma_up: f64,
    gamma_down: f64,
    gamma_d: f64,
}

impl SpinOrbitParams {
    pub fn new(mass: Mass, lambda: f64, gamma_up: f64, gamma_down: f64, gamma_d: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(invalid("lambda must be finite"));
        }
        check_nonneg("gamma_up", gamma_up)?;
        check_nonneg("gamma_down", gamma_down)?;
        check_nonneg("gamma_d", gamma_d)?;
        check_positive("gamma_up + gamma_down", gamma_up + gamma_down)?;
        Ok(Self {
            mass,
            lambda,
            gamma_up,
            gamma_down,
            gamma_d,
        })
    }

    /// Parametrises the spin rates by `Γ₊` and `Γ₋`.
    pub fn from_sum_difference(
        mass: Mass,
        lambda: f64,
        gamma_plus: f64,
        gamma_minus: f64,
        gamma_d: f64,
    ) -> Result<Self> {
        if gamma_minus.abs() > gamma_plus {
            return Err(invalid(format!(
                "|gamma_minus| = {} exceeds gamma_plus = {gamma_plus}",
                gamma_minus.abs()
            )));
        }
        Self::new(
            mass,
            lambda,
            0.5 * (gamma_plus + gamma_minus),
            0.5 * (gamma_plus - gamma_minus),
            gamma_d,
        )
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn gamma_up(&self) -> f64 {
        self.gamma_up
    }
    pub fn gamma_down(&self) -> f64 {
        self.gamma_down
    }
    pub fn gamma_d(&self) -> f64 {
        self.gamma_d
    }
    pub fn gamma_plus(&self) -> f64 {
        self.gamma_up + self.gamma_down
    }
    pub fn gamma_minus(&self) -> f64 {
        self.gamma_up - self.gamma_down
    }
    /// Stationary spin polarisation `Γ₋/Γ₊`.
    pub fn stationary_polarization(&self) -> f64 {
        self.gamma_minus() / self.gamma_plus()
    }
}

/// First and second moments. `xp` is the symmetrised `⟨xp + px⟩/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentState {
    pub s_z: f64,
    pub x: f64,
    pub p: f64,
    pub x2: f64,
    pub sz_x: f64,
    pub xp: f64,
    pub sz_p: f64,
    pub p2: f64,
}

impl MomentState {
    /// Spin with polarisation `s_z`, particle at rest at the origin with no spread.
    pub fn factorized(s_z: f64) -> Self {
        Self {
            s_z,
            ..Self::default()
        }
    }

    pub fn to_array(self) -> [f64; 8] {
        [
            self.s_z, self.x, self.p, self.x2, self.sz_x, self.xp, self.sz_p, self.p2,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match *v {
            [s_z, x, p, x2, sz_x, xp, sz_p, p2] => Ok(Self {
                s_z,
                x,
                p,
                x2,
                sz_x,
                xp,
                sz_p,
                p2,
            }),
            _ => Err(Error::Shape(format!("moment state has 8 entries, got {}", v.len()))),
        }
    }

    pub fn decomposition(&self) -> VarianceDecomposition {
        VarianceDecomposition {
            var_x: self.x2 - self.x * self.x,
            cov_sz_x: self.sz_x - self.s_z * self.x,
            cov_x_p: self.xp - self.x * self.p,
        }
    }

    /// Checks `|s_z| ≤ 1` and non-negative variances, to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let d = self.decomposition();
        if self.s_z.abs() > 1.0 + tol {
            return Err(invalid(format!("|s_z| = {} exceeds 1", self.s_z.abs())));
        }
        if d.var_x < -tol || self.p2 - self.p * self.p < -tol {
            return Err(invalid("negative variance in moment state"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceDecomposition {
    pub var_x: f64,
    pub cov_sz_x: f64,
    pub cov_x_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSample {
    pub state: MomentState,
    pub decomposition: VarianceDecomposition,
}

pub fn moment_derivative(s: &MomentState, p: &SpinOrbitParams) -> MomentState {
    let (gp, gm, lam, im) = (p.gamma_plus(), p.gamma_minus(), p.lambda, p.mass.inverse());
    MomentState {
        s_z: gm - gp * s.s_z,
        x: lam * s.s_z + s.p * im,
        p: 0.0,
        x2: 2.0 * s.xp * im + 2.0 * lam * s.sz_x + p.gamma_d,
        sz_x: lam + s.sz_p * im + gm * s.x - gp * s.sz_x,
        xp: s.p2 * im + lam * s.sz_p,
        sz_p: gm * s.p - gp * s.sz_p,
        p2: 0.0,
    }
}

/// `∫₀ᵗ s^{k−1}/(k−1)! e^{−g(t−s)} ds` for k = 1, 2, 3, stable as `g t → 0`.
fn decay_integrals(g: f64, t: f64) -> [f64; 3] {
    let x = g * t;
    if x.abs() < 0.5 {
        // Σ_n (−x)^n t^k / (n + k)!
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let k = k + 1;
            let mut term = t.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
            let mut sum = term;
            for n in 1..40 {
                term *= -x / (n + k) as f64;
                sum += term;
                if term.abs() <= 1e-17 * sum.abs() {
                    break;
                }
            }
            *slot = sum;
        }
        out
    } else {
        let p1 = -(-x).exp_m1() / g;
        let p2 = (t - p1) / g;
        let p3 = (0.5 * t * t - p2) / g;
        [p1, p2, p3]
    }
}

/// `∫₀ᵗ s e^{−g s} ds`, stable as `g t → 0`.
fn weighted_decay(g: f64, t: f64) -> f64 {
    let x = g * t;
    if x.abs() < 0.5 {
        // t² Σ_n (−x)^n / (n! (n + 2))
        let mut fact = 1.0;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for n in 0..40 {
            if n > 0 {
                fact *= n as f64;
                pow *= -x;
            }
            let term = pow / (fact * (n + 2) as f64);
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        t * t * sum
    } else {
        let p1 = -(-x).exp_m1() / g;
        (p1 - t * (-x).exp()) / g
    }
}

/// Exact solution of the moment equations from an arbitrary initial state.
pub fn analytic_moments(t: f64, p: &SpinOrbitParams, s0: &MomentState) -> MomentState {
    let (g, gm, lam, im) = (p.gamma_plus(), p.gamma_minus(), p.lambda, p.mass.inverse());
    let m_inf = gm / g;
    let decay = (-g * t).exp();
    let [phi1, phi2, phi3] = decay_integrals(g, t);
    let k2 = weighted_decay(g, t);

    let p0 = s0.p;
    let p2 = s0.p2;
    let drive_p = p0 * m_inf;
    let excess_p = s0.sz_p - drive_p;
    let v = p0 * im + lam * m_inf;
    let b = lam * (s0.s_z - m_inf) / g;

    let s_z = m_inf + (s0.s_z - m_inf) * decay;
    let sz_p = drive_p + excess_p * decay;
    let x = s0.x + v * t + lam * (s0.s_z - m_inf) * phi1;
    let xp = s0.xp + p2 * im * t + lam * (drive_p * t + excess_p * phi1);

    // Source of sz_x: a0 + ae·e^{−Γ₊t} + gm·v·t.
    let a0 = lam + im * drive_p + gm * (s0.x + b);
    let ae = im * excess_p - gm * b;
    let sz_x = s0.sz_x * decay + a0 * phi1 + ae * t * decay + gm * v * phi2;

    let int_xp = s0.xp * t + 0.5 * p2 * im * t * t + lam * (0.5 * drive_p * t * t + excess_p * phi2);
    let int_sz_x = s0.sz_x * phi1 + a0 * phi2 + ae * k2 + gm * v * phi3;
    let x2 = s0.x2 + p.gamma_d * t + 2.0 * im * int_xp + 2.0 * lam * int_sz_x;

    MomentState {
        s_z,
        x,
        p: p0,
        x2,
        sz_x,
        xp,
        sz_p,
        p2,
    }
}

/// Position variance for balanced spin rates, starting from `x = p = 0`:
/// `Γ_d t + (2λ²/Γ₊)(t + (e^{−Γ₊t} − 1)/Γ₊) − (λ²/Γ₊²) s₀² (1 − e^{−Γ₊t})² + (⟨p²⟩₀/m²) t²`.
pub fn variance_symmetric(t: f64, p: &SpinOrbitParams, sz0: f64, p2_0: f64) -> Result<f64> {
    if p.gamma_minus() != 0.0 {
        return Err(Error::WrongRegime("the closed-form variance needs gamma_up = gamma_down"));
    }
    let g = p.gamma_plus();
    let lam2 = p.lambda * p.lambda;
    let em1 = (-g * t).exp_m1();
    let im = p.mass.inverse();
    Ok(p.gamma_d * t + 2.0 * lam2 / g * (t + em1 / g) - lam2 / (g * g) * sz0 * sz0 * em1 * em1
        + p2_0 * im * im * t * t)
}

/// Long-time diffusion constant at infinite mass, `Γ_d/2 + λ²(1 − m∞²)/Γ₊`.
pub fn active_diffusion(p: &SpinOrbitParams) -> f64 {
    let m = p.stationary_polarization();
    0.5 * p.gamma_d + p.lambda * p.lambda * (1.0 - m * m) / p.gamma_plus()
}

/// `√2 λ/√(Γ_d Γ₊)`.
pub fn peclet_number(p: &SpinOrbitParams) -> Result<f64> {
    if p.gamma_d == 0.0 {
        return Err(Error::DivisionByZero("gamma_d"));
    }
    Ok(2f64.sqrt() * p.lambda / (p.gamma_d * p.gamma_plus()).sqrt())
}

/// Long-time mean velocity `⟨p⟩₀/m + λΓ₋/Γ₊`.
pub fn drift_velocity(p: &SpinOrbitParams, p0: f64) -> f64 {
    p0 * p.mass.inverse() + p.lambda * p.stationary_polarization()
}

pub fn evolve_moments(
    s0: &MomentState,
    p: &SpinOrbitParams,
    t_grid: &[f64],
    cfg: &OdeStepperConfig,
) -> Result<TimeSeries<MomentSample>> {
    s0.validate(1e-9)?;
    integrate_ode_observed(
        |_, y: &[f64], dy: &mut [f64]| {
            let s = MomentState::from_slice(y).expect("dimension fixed at 8");
            dy.copy_from_slice(&moment_derivative(&s, p).to_array());
        },
        &s0.to_array(),
        t_grid,
        cfg,
        |_, y| {
            let state = MomentState::from_slice(y)?;
            Ok(MomentSample {
                state,
                decomposition: state.decomposition(),
            })
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_params(gamma_minus: f64) -> SpinOrbitParams {
        SpinOrbitParams::from_sum_difference(Mass::Infinite, 5.0, 1.0, gamma_minus, 0.1).unwrap()
    }

    #[test]
    fn passive_generator() {
        let p = SpinOrbitParams::new(Mass::Infinite, 0.0, 0.5, 0.5, 0.3).unwrap();
        let d = moment_derivative(&MomentState::default(), &p);
        assert_eq!(
            d,
            MomentState {
                x2: 0.3,
                ..Default::default()
            }
        );
    }

    #[test]
    fn covariance_source_is_lambda() {
        let p = SpinOrbitParams::new(Mass::Infinite, 2.5, 0.5, 0.5, 0.0).unwrap();
        let d = moment_derivative(&MomentState::default(), &p);
        assert_eq!(
            d,
            MomentState {
                sz_x: 2.5,
                ..Default::default()
            }
        );
    }

    #[test]
    fn analytic_initial_and_decay() {
        let p = fig_params(0.0);
        let s0 = MomentState {
            s_z: 1.0,
            x: 0.3,
            p: 0.0,
            x2: 0.5,
            sz_x: 0.1,
            xp: 0.0,
            sz_p: 0.0,
            p2: 0.0,
        };
        assert_eq!(analytic_moments(0.0, &p, &s0), s0);
        let s = analytic_moments(1.0, &p, &s0);
        assert!((s.s_z - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn analytic_long_time_velocity() {
        let p = SpinOrbitParams::new(Mass::Finite(2.0), 1.5, 0.8, 0.2, 0.1).unwrap();
        let s0 = MomentState {
            p: 0.4,
            p2: 0.25,
            ..MomentState::factorized(-0.5)
        };
        let (t, h) = (60.0, 1e-3);
        let v = (analytic_moments(t + h, &p, &s0).x - analytic_moments(t - h, &p, &s0).x) / (2.0 * h);
        assert!((v - drift_velocity(&p, 0.4)).abs() < 1e-9);
        assert!((v - (0.2 + 1.5 * 0.6)).abs() < 1e-9);
        assert!((analytic_moments(t, &p, &s0).s_z - 0.6).abs() < 1e-15);
    }

    #[test]
    fn symmetric_variance_values() {
        let p = fig_params(0.0);
        assert_eq!(variance_symmetric(0.0, &p, 0.3, 0.0).unwrap(), 0.0);
        let v = variance_symmetric(1.0, &p, 0.0, 0.0).unwrap();
        assert!((v - (0.1 + 50.0 * (-1f64).exp())).abs() < 1e-12);
        assert!((v - 18.494).abs() < 1e-3);
        assert!(variance_symmetric(1.0, &fig_params(0.5), 0.0, 0.0).is_err());
    }

    #[test]
    fn analytic_reduces_to_symmetric_formula() {
        let p = SpinOrbitParams::new(Mass::Finite(3.0), 2.0, 0.7, 0.7, 0.2).unwrap();
        let s0 = MomentState {
            p2: 0.5,
            ..MomentState::factorized(0.4)
        };
        for t in [1e-6, 0.1, 0.7, 3.0, 40.0] {
            let var = analytic_moments(t, &p, &s0).decomposition().var_x;
            let closed = variance_symmetric(t, &p, 0.4, 0.5).unwrap();
            assert!((var - closed).abs() <= 1e-12 * closed.abs().max(1e-12), "t={t}");
        }
    }

    #[test]
    fn diffusion_and_peclet() {
        let p = fig_params(0.0);
        assert!((active_diffusion(&p) - 25.05).abs() < 1e-12);
        let pe = peclet_number(&p).unwrap();
        assert!((active_diffusion(&p) / 0.05 - 1.0 - pe * pe).abs() < 1e-9);
        assert!((active_diffusion(&fig_params(1.0)) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn thermal_rates_give_no_drift() {
        let (m, lam, s_th) = (2.0, 0.9, -0.35);
        let gp = 1.3;
        let p = SpinOrbitParams::from_sum_difference(Mass::Finite(m), lam, gp, s_th * gp, 0.1).unwrap();
        assert!(drift_velocity(&p, -m * lam * s_th).abs() < 1e-10);
    }

    #[test]
    fn evolution_matches_closed_form() {
        let p = fig_params(0.0);
        let grid = crate::series::linear_grid(0.0, 10.0, 11);
        let cfg = OdeStepperConfig::rk4(1e-3).unwrap();
        let out = evolve_moments(&MomentState::factorized(0.0), &p, &grid, &cfg).unwrap();
        for (t, s) in out.iter() {
            let closed = variance_symmetric(t, &p, 0.0, 0.0).unwrap();
            assert!((s.decomposition.var_x - closed).abs() <= 1e-10 * closed.max(1e-300));
        }
    }

    #[test]
    fn stationary_covariance() {
        let p = fig_params(0.0);
        let s = analytic_moments(30.0, &p, &MomentState::factorized(0.0));
        assert!((s.decomposition().cov_sz_x - 5.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SpinOrbitParams::new(Mass::Infinite, 1.0, 0.0, 0.0, 0.1).is_err());
        assert!(SpinOrbitParams::from_sum_difference(Mass::Infinite, 1.0, 1.0, 1.5, 0.1).is_err());
        assert!(Mass::new(0.0).is_err());
        assert_eq!(Mass::new(f64::INFINITY).unwrap(), Mass::Infinite);
    }
}
