//! Overdamped particle in an Ohmic bath, additionally driven by classical
//! exponentially correlated (active) noise.
//!
//! The bath has spectral density `J(ω) = 4γω e^{−ω/ω_c}`; the active noise
//! has kernel `D_a/(1 + ω²τ²)`. The mean-squared displacement is the
//! steady-state frequency integral
//! `Δ²(t) = ∫ dω/2π (1 − cos ωt) [J(ω) coth(βω/2) + 4D_a/(1 + ω²τ²)] / (4γ²ω²)`.

use crate::error::{check_nonneg, check_positive, Error, Result};
use crate::numerics::{quad_msd_kernel_with_scales, solve_scalar, QuadratureConfig};

/// Below this value of `βω` the thermal factor uses its series expansion.
const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature {
    Finite(f64),
    /// Zero temperature, kept symbolic so nothing overflows.
    Infinite,
}

impl InverseTemperature {
    pub fn from_temperature(temperature: f64) -> Result<Self> {
        check_nonneg("temperature", temperature)?;
        Ok(if temperature == 0.0 {
            Self::Infinite
        } else {
            Self::Finite(1.0 / temperature)
        })
    }

    pub fn temperature(self) -> f64 {
        match self {
            Self::Finite(beta) => 1.0 / beta,
            Self::Infinite => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denominator {
    /// `4γ²ω²`, valid for `m/γ ≪ 1`.
    Overdamped,
    /// `(2mω²)² + 4γ²ω²`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    gamma: f64,
    omega_c: f64,
    beta: InverseTemperature,
    d_a: f64,
    tau: f64,
    mass: f64,
    denominator: Denominator,
}

impl BathSpec {
    /// An overdamped (massless) particle.
    pub fn new(
        gamma: f64,
        omega_c: f64,
        beta: InverseTemperature,
        d_a: f64,
        tau: f64,
    ) -> Result<Self> {
        check_positive("gamma", gamma)?;
        check_positive("omega_c", omega_c)?;
        if let InverseTemperature::Finite(b) = beta {
            check_positive("beta", b)?;
        }
        check_nonneg("D_a", d_a)?;
        check_positive("tau", tau)?;
        Ok(Self {
            gamma,
            omega_c,
            beta,
            d_a,
            tau,
            mass: 0.0,
            denominator: Denominator::Overdamped,
        })
    }

    /// Switches to the full response denominator with mass `mass`.
    pub fn with_mass(mut self, mass: f64) -> Result<Self> {
        check_nonneg("mass", mass)?;
        self.mass = mass;
        self.denominator = Denominator::Full;
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
    pub fn beta(&self) -> InverseTemperature {
        self.beta
    }
    pub fn temperature(&self) -> f64 {
        self.beta.temperature()
    }
    pub fn d_a(&self) -> f64 {
        self.d_a
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn denominator(&self) -> Denominator {
        self.denominator
    }

    /// Whether `m/γ` is small enough for the overdamped form.
    pub fn is_overdamped(&self) -> bool {
        self.mass / self.gamma < 1e-2
    }

    /// Thermal diffusion constant `T/2γ`.
    pub fn thermal_diffusion(&self) -> f64 {
        self.temperature() / (2.0 * self.gamma)
    }

    /// Active diffusion constant `D_a/4γ²`.
    pub fn active_diffusion(&self) -> f64 {
        self.d_a / (4.0 * self.gamma * self.gamma)
    }
}

/// One frequency's worth of kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub omega: f64,
    pub spectral: f64,
    pub keldysh: f64,
    pub active: f64,
}

pub fn kernel_sample(omega: f64, b: &BathSpec) -> KernelSample {
    KernelSample {
        omega,
        spectral: spectral_density(omega, b),
        keldysh: keldysh_noise(omega, b),
        active: active_kernel(omega, b),
    }
}

/// `J(ω) = 4γω e^{−ω/ω_c}`.
pub fn spectral_density(omega: f64, b: &BathSpec) -> f64 {
    4.0 * b.gamma * omega * (-omega / b.omega_c).exp()
}

/// `ω coth(βω/2)`, finite at `ω = 0` where it equals `2T`.
fn omega_coth(omega: f64, beta: InverseTemperature) -> f64 {
    match beta {
        InverseTemperature::Infinite => omega.abs(),
        InverseTemperature::Finite(beta) => {
            let x = beta * omega.abs();
            if x < SERIES_THRESHOLD {
                // (2/β)·y coth y with y = βω/2, expanded to second order.
                2.0 / beta + beta * omega * omega / 6.0
            } else {
                // coth(x/2) = 1 + 2/(eˣ − 1)
                omega.abs() * (1.0 + 2.0 / x.exp_m1())
            }
        }
    }
}

/// Imaginary part of the Keldysh self-energy, `J(ω) coth(βω/2)`.
pub fn keldysh_noise(omega: f64, b: &BathSpec) -> f64 {
    4.0 * b.gamma * (-omega / b.omega_c).exp() * omega_coth(omega, b.beta)
}

/// `D_a/(1 + ω²τ²)`.
pub fn active_kernel(omega: f64, b: &BathSpec) -> f64 {
    let wt = omega * b.tau;
    b.d_a / (1.0 + wt * wt)
}

fn response_denominator(omega: f64, b: &BathSpec) -> f64 {
    let friction = 4.0 * b.gamma * b.gamma * omega * omega;
    match b.denominator {
        Denominator::Overdamped => friction,
        Denominator::Full => {
            let inertia = 2.0 * b.mass * omega * omega;
            inertia * inertia + friction
        }
    }
}

/// Mean-squared displacement by quadrature of the frequency integral.
pub fn msd(t: f64, b: &BathSpec, q: &QuadratureConfig) -> Result<f64> {
    let integrand =
        |w: f64| (keldysh_noise(w, b) + 4.0 * active_kernel(w, b)) / response_denominator(w, b);
    let mut scales = vec![b.omega_c, 1.0 / b.tau];
    if let InverseTemperature::Finite(beta) = b.beta {
        scales.push(1.0 / beta);
    }
    if b.denominator == Denominator::Full && b.mass > 0.0 {
        scales.push(b.gamma / b.mass);
    }
    quad_msd_kernel_with_scales(integrand, t, &scales, q)
}

/// `2D̃_a(t + τ(e^{−t/τ} − 1))`, the active contribution shared by both closed forms.
fn active_msd(t: f64, b: &BathSpec) -> f64 {
    2.0 * b.active_diffusion() * (t + b.tau * (-t / b.tau).exp_m1())
}

/// `2D_T t + 2D̃_a(t + τ(e^{−t/τ} − 1))`, which treats the thermal noise as white.
pub fn msd_closed_finite_temperature(t: f64, b: &BathSpec) -> Result<f64> {
    if b.beta == InverseTemperature::Infinite {
        return Err(Error::WrongRegime(
            "the white-noise closed form needs a finite temperature",
        ));
    }
    Ok(2.0 * b.thermal_diffusion() * t + active_msd(t, b))
}

/// `(1/2πγ) ln(1 + ω_c²t²) + 2D̃_a(t + τ(e^{−t/τ} − 1))`.
pub fn msd_closed_zero_temperature(t: f64, b: &BathSpec) -> f64 {
    let wt = b.omega_c * t;
    (wt * wt).ln_1p() / (2.0 * std::f64::consts::PI * b.gamma) + active_msd(t, b)
}

/// `T + (D_a/2γ)/(1 + ω²τ²)`.
pub fn effective_temperature(omega: f64, b: &BathSpec) -> f64 {
    b.temperature() + active_kernel(omega, b) / (2.0 * b.gamma)
}

/// `F(ω) = coth(βω/2) + 4D(ω)/J(ω)`.
pub fn distribution_function(omega: f64, b: &BathSpec) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain("the distribution function has a pole at ω = 0"));
    }
    let coth = omega_coth(omega, b.beta) / omega;
    Ok(coth + 4.0 * active_kernel(omega, b) / spectral_density(omega, b))
}

/// Where the zero-temperature logarithmic spreading hands over to active motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    /// Larger root of `(1/γ) ln(ω_c t) = (D̃_a/2τ) t²`.
    pub time: f64,
    /// Leading asymptotic estimate `√((τ/γD̃_a) ln(ω_c²τ/γD̃_a))`.
    pub estimate: f64,
    /// `|lhs − rhs| / lhs` at `time`.
    pub residual: f64,
}

pub fn crossover_time(b: &BathSpec) -> Result<Crossover> {
    if b.beta != InverseTemperature::Infinite {
        return Err(Error::WrongRegime("the crossover scale is a zero-temperature quantity"));
    }
    if b.d_a == 0.0 {
        return Err(Error::NoCrossover("without active noise the logarithm never loses"));
    }
    let quantum = |t: f64| (b.omega_c * t).ln() / b.gamma;
    let curvature = b.active_diffusion() / (2.0 * b.tau);
    let gap = |t: f64| quantum(t) - curvature * t * t;
    // gap rises until the two slopes match, then falls for good.
    let peak = (b.tau / (b.gamma * b.active_diffusion())).sqrt();
    if !(gap(peak) > 0.0) {
        return Err(Error::NoCrossover("active spreading dominates from the start"));
    }
    let mut hi = 2.0 * peak;
    while gap(hi) > 0.0 {
        hi *= 2.0;
    }
    let time = solve_scalar(gap, (peak, hi), 1e-13 * hi)?;
    let residual = (gap(time) / quantum(time)).abs();
    let a = b.omega_c * b.omega_c * b.tau / (b.gamma * b.active_diffusion());
    let estimate = (b.tau / (b.gamma * b.active_diffusion()) * a.ln()).sqrt();
    Ok(Crossover {
        time,
        estimate,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_t(gamma: f64, omega_c: f64, d_a: f64, tau: f64) -> BathSpec {
        BathSpec::new(gamma, omega_c, InverseTemperature::Infinite, d_a, tau).unwrap()
    }

    fn hot() -> BathSpec {
        BathSpec::new(1e-5, 1e4, InverseTemperature::Finite(1e-4), 4e-1, 100.0).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        let b = zero_t(1e-3, 1e4, 1.0, 1.0);
        assert_eq!(spectral_density(0.0, &b), 0.0);
        let v = spectral_density(1e4, &b);
        assert!((v - 40.0 * (-1f64).exp()).abs() < 1e-12);
        assert!((v - 14.715).abs() < 1e-3);
        let h = 1.0;
        assert!(spectral_density(1e4 - h, &b) < v && spectral_density(1e4 + h, &b) < v);
    }

    #[test]
    fn keldysh_limits() {
        let b = hot();
        assert!((keldysh_noise(0.0, &b) - 0.8).abs() < 1e-15);
        assert!((keldysh_noise(1e-12, &b) - 0.8).abs() < 1e-12);
        // Continuity across the series threshold.
        let w = SERIES_THRESHOLD / 1e-4;
        let below = keldysh_noise(w * (1.0 - 1e-9), &b);
        let above = keldysh_noise(w * (1.0 + 1e-9), &b);
        assert!((below - above).abs() / above < 1e-9);
        let z = zero_t(1e-5, 1e4, 0.0, 1.0);
        for w in [0.5, 3.0, 2e4] {
            let (k, j) = (keldysh_noise(w, &z), spectral_density(w, &z));
            assert!((k - j).abs() <= 1e-15 * j);
        }
        let w = 40.0 / 1e-4;
        assert!((keldysh_noise(w, &b) / spectral_density(w, &b) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn active_kernel_values() {
        let b = zero_t(1e-3, 1e4, 2.0, 0.5);
        assert_eq!(active_kernel(0.0, &b), 2.0);
        assert_eq!(active_kernel(2.0, &b), 1.0);
        assert!((active_kernel(6.0, &b) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        let b = BathSpec::new(1e-5, 1e4, InverseTemperature::Finite(1e-4), 4e-1, 100.0).unwrap();
        assert!((b.thermal_diffusion() - 5e8).abs() < 1e-6);
        assert!((b.active_diffusion() - 1e9).abs() < 1e-3);
        assert_eq!(msd_closed_finite_temperature(0.0, &b).unwrap(), 0.0);
        let v = msd_closed_finite_temperature(1.0, &b).unwrap();
        assert!((v - 1.009_966_749_8e9).abs() < 1e3, "{v}");
        assert_eq!(
            msd_closed_finite_temperature(1.0, &zero_t(1.0, 1.0, 1.0, 1.0)),
            Err(Error::WrongRegime("the white-noise closed form needs a finite temperature"))
        );
        let z = zero_t(1e-3, 1e4, 0.0, 1.0);
        assert_eq!(msd_closed_zero_temperature(0.0, &z), 0.0);
        let t: f64 = 1e2;
        let approx = (1e4 * t).ln() / (std::f64::consts::PI * 1e-3);
        assert!((msd_closed_zero_temperature(t, &z) - approx).abs() / approx < 1e-10);
    }

    #[test]
    fn long_time_slope_is_total_diffusion() {
        let b = hot();
        let t = 100.0 * b.tau();
        let h = 1e-3 * t;
        let slope = (msd_closed_finite_temperature(t + h, &b).unwrap()
            - msd_closed_finite_temperature(t - h, &b).unwrap())
            / (2.0 * h);
        let target = 2.0 * (b.thermal_diffusion() + b.active_diffusion());
        assert!((slope - target).abs() / target < 5e-3);
    }

    #[test]
    fn effective_temperature_values() {
        let b = BathSpec::new(0.1, 10.0, InverseTemperature::Finite(0.5), 3.0, 2.0).unwrap();
        assert!((effective_temperature(0.0, &b) - (2.0 + 15.0)).abs() < 1e-12);
        assert!((effective_temperature(0.5, &b) - (2.0 + 7.5)).abs() < 1e-12);
        assert!((effective_temperature(1e9, &b) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_function_limits() {
        let passive = BathSpec::new(0.1, 10.0, InverseTemperature::Finite(0.5), 0.0, 2.0).unwrap();
        let w = 0.7;
        assert!((distribution_function(w, &passive).unwrap() - 1.0 / (0.25 * w).tanh()).abs() < 1e-12);
        assert_eq!(
            distribution_function(0.0, &passive),
            Err(Error::Domain("the distribution function has a pole at ω = 0"))
        );
        let b = BathSpec::new(0.1, 10.0, InverseTemperature::Finite(0.5), 3.0, 2.0).unwrap();
        let w = 1e-3 / b.tau();
        let ratio = w * distribution_function(w, &b).unwrap() / 2.0 / effective_temperature(w, &b);
        assert!((ratio - 1.0).abs() < 0.01);
        let z = zero_t(1e-3, 1e4, 1.0, 1.0);
        let w = 5e3;
        let expect = 1.0 + (w / 1e4f64).exp() / (1e-3 * w * (1.0 + w * w));
        let f = distribution_function(w, &z).unwrap();
        assert!((f - expect).abs() < 1e-15 && f > 1.0);
    }

    #[test]
    fn crossover_solves_its_condition() {
        // D̃_a/2τ = 0.5 means D_a = 4γ² at τ = 1.
        let b = zero_t(1e-3, 1e4, 4e-6, 1.0);
        let c = crossover_time(&b).unwrap();
        assert!((c.time - 169.365_886_5).abs() < 1e-6);
        assert!(c.residual < 1e-6);
        let doubled = zero_t(1e-3, 1e4, 8e-6, 1.0);
        assert!(crossover_time(&doubled).unwrap().time < c.time);
    }

    #[test]
    fn crossover_estimate_within_factor_two() {
        for k in 0..=8 {
            let dt = 10f64.powf(-2.0 + 0.5 * k as f64);
            let b = zero_t(1e-3, 1e4, dt * 4e-6, 1.0);
            let c = crossover_time(&b).unwrap();
            let r = c.estimate / c.time;
            assert!((0.5..=2.0).contains(&r), "D̃_a = {dt}: ratio {r}");
        }
    }

    #[test]
    fn crossover_needs_zero_temperature_and_activity() {
        assert!(crossover_time(&hot()).is_err());
        assert!(matches!(
            crossover_time(&zero_t(1e-3, 1e4, 0.0, 1.0)),
            Err(Error::NoCrossover(_))
        ));
        assert!(matches!(
            crossover_time(&zero_t(1.0, 1.0, 1e6, 1.0)),
            Err(Error::NoCrossover(_))
        ));
    }

    #[test]
    fn quadrature_matches_closed_form_at_high_temperature() {
        let b = hot();
        let q = QuadratureConfig::for_cutoff(b.omega_c()).unwrap();
        assert_eq!(msd(0.0, &b, &q).unwrap(), 0.0);
        for t in [30.0, 300.0, 3e3, 3e4] {
            let quad = msd(t, &b, &q).unwrap();
            let closed = msd_closed_finite_temperature(t, &b).unwrap();
            assert!((quad - closed).abs() / quad < 1e-4, "t={t}: {quad} vs {closed}");
        }
    }

    #[test]
    fn zero_temperature_quadrature_is_the_log_law() {
        let b = zero_t(1e-3, 1e4, 0.0, 1.0);
        let q = QuadratureConfig::for_cutoff(b.omega_c()).unwrap();
        for t in [1e-3, 1.0, 1e3] {
            let quad = msd(t, &b, &q).unwrap();
            let closed = msd_closed_zero_temperature(t, &b);
            assert!((quad - closed).abs() / closed < 1e-6, "t={t}: {quad} vs {closed}");
        }
    }
}
