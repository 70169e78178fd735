//! A single particle on a chain with coherent hopping `J` and
//! environment-assisted hopping: rightward hops at rate `Γ_L` (arrivals from
//! the left neighbour) and leftward hops at rate `Γ_R`.
//!
//! Sites are stored with 0-based indices; the position observable uses the
//! labels `1..=L`. With `Γ_L > Γ_R` the packet drifts towards larger labels
//! at speed `Γ₋ = Γ_L − Γ_R` and the open-chain steady state piles up at
//! site `L`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_nonneg, check_positive, invalid, Error, Result};
use crate::numerics::{integrate_ode_observed, linear_fit, OdeStepper, OdeStepperConfig};
use crate::series::TimeSeries;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Chains at least this long evaluate the derivative row-parallel.
const PARALLEL_SITES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoppingParams {
    j: f64,
    gamma_l: f64,
    gamma_r: f64,
    sites: usize,
    boundary: Boundary,
}

impl HoppingParams {
    pub fn new(j: f64, gamma_l: f64, gamma_r: f64, sites: usize, boundary: Boundary) -> Result<Self> {
        if !j.is_finite() {
            return Err(invalid("J must be finite"));
        }
        check_nonneg("gamma_L", gamma_l)?;
        check_nonneg("gamma_R", gamma_r)?;
        if sites < 3 {
            return Err(invalid(format!("chain needs at least 3 sites, got {sites}")));
        }
        Ok(Self {
            j,
            gamma_l,
            gamma_r,
            sites,
            boundary,
        })
    }

    /// Parametrises the incoherent rates by their sum and difference.
    pub fn from_sum_difference(
        j: f64,
        gamma_plus: f64,
        gamma_minus: f64,
        sites: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        Self::new(
            j,
            0.5 * (gamma_plus + gamma_minus),
            0.5 * (gamma_plus - gamma_minus),
            sites,
            boundary,
        )
    }

    pub fn j(&self) -> f64 {
        self.j
    }
    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }
    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }
    pub fn sites(&self) -> usize {
        self.sites
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn gamma_plus(&self) -> f64 {
        self.gamma_l + self.gamma_r
    }
    pub fn gamma_minus(&self) -> f64 {
        self.gamma_l - self.gamma_r
    }

    /// Default site of the initial wave packet, index `⌈L/2⌉ − 1`.
    pub fn middle_site(&self) -> usize {
        self.sites.div_ceil(2) - 1
    }

    /// A fixed RK4 step that resolves both the coherent band and the decay rates.
    pub fn suggested_step(&self) -> f64 {
        0.25 / (4.0 * self.j.abs() + 2.0 * self.gamma_plus()).max(1e-12)
    }
}

/// Single-particle density matrix in the site basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    sites: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zeros(sites: usize) -> Self {
        Self {
            sites,
            data: vec![Complex64::default(); sites * sites],
        }
    }

    /// The pure state `|site⟩⟨site|`.
    pub fn localized(sites: usize, site: usize) -> Result<Self> {
        if site >= sites {
            return Err(invalid(format!("site {site} outside a chain of {sites}")));
        }
        let mut rho = Self::zeros(sites);
        rho[(site, site)] = Complex64::new(1.0, 0.0);
        Ok(rho)
    }

    /// The maximally mixed state.
    pub fn uniform(sites: usize) -> Self {
        let mut rho = Self::zeros(sites);
        for k in 0..sites {
            rho[(k, k)] = Complex64::new(1.0 / sites as f64, 0.0);
        }
        rho
    }

    pub fn from_row_major(sites: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != sites * sites {
            return Err(Error::Shape(format!(
                "{} entries for a {sites}x{sites} matrix",
                data.len()
            )));
        }
        Ok(Self { sites, data })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.sites).map(|k| self[(k, k)]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.data, self.sites)
    }

    /// Checks Hermiticity, unit trace and diagonal range, all to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(invalid(format!("density matrix not Hermitian (off by {herm:e})")));
        }
        let tr = (self.trace() - 1.0).norm();
        if tr > tol {
            return Err(invalid(format!("density matrix trace off by {tr:e}")));
        }
        for k in 0..self.sites {
            let d = self[(k, k)];
            if d.im.abs() > tol || d.re < -tol || d.re > 1.0 + tol {
                return Err(invalid(format!("diagonal entry {k} is {d}")));
            }
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for DensityMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.sites + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DensityMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.sites + j]
    }
}

/// Observables recorded at each sample time of [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeObservables {
    pub mean_x: f64,
    pub var_x: f64,
    pub density: Vec<f64>,
    /// Probability on the two outermost sites.
    pub boundary_mass: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
}

/// `dρ/dt` for the chain.
pub fn rho_derivative(rho: &DensityMatrix, p: &HoppingParams) -> Result<DensityMatrix> {
    if rho.sites != p.sites {
        return Err(Error::Shape(format!(
            "matrix has {} sites, parameters {}",
            rho.sites, p.sites
        )));
    }
    let mut out = DensityMatrix::zeros(p.sites);
    lindblad_rhs(p, &rho.data, &mut out.data);
    Ok(out)
}

fn lindblad_rhs(p: &HoppingParams, rho: &[Complex64], out: &mut [Complex64]) {
    let n = p.sites;
    let row = |i: usize, out_row: &mut [Complex64]| match p.boundary {
        Boundary::Periodic => periodic_row(p, rho, i, out_row),
        Boundary::Open => open_row(p, rho, i, out_row),
    };
    if n >= PARALLEL_SITES {
        out.par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, r)| row(i, r));
    } else {
        out.chunks_mut(n).enumerate().for_each(|(i, r)| row(i, r));
    }
}

fn periodic_row(p: &HoppingParams, rho: &[Complex64], i: usize, out: &mut [Complex64]) {
    let n = p.sites;
    let at = |a: usize, b: usize| rho[a * n + b];
    let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
    let gp = p.gamma_plus();
    for j in 0..n {
        let (jp, jm) = ((j + 1) % n, (j + n - 1) % n);
        let hop = at(ip, j) + at(im, j) - at(i, jp) - at(i, jm);
        let mut d = -I * p.j * hop - gp * at(i, j);
        if i == j {
            d += p.gamma_l * at(im, im) + p.gamma_r * at(ip, ip);
        }
        out[j] = d;
    }
}

fn open_row(p: &HoppingParams, rho: &[Complex64], i: usize, out: &mut [Complex64]) {
    let n = p.sites;
    let last = n - 1;
    let at = |a: usize, b: usize| rho[a * n + b];
    // Half the escape rate out of site k: no rightward hop off the last site,
    // no leftward hop off the first.
    let half_loss = |k: usize| {
        0.5 * (if k != last { p.gamma_l } else { 0.0 } + if k != 0 { p.gamma_r } else { 0.0 })
    };
    let loss_i = half_loss(i);
    for j in 0..n {
        let mut hop = Complex64::default();
        if i < last {
            hop += at(i + 1, j);
        }
        if i > 0 {
            hop += at(i - 1, j);
        }
        if j < last {
            hop -= at(i, j + 1);
        }
        if j > 0 {
            hop -= at(i, j - 1);
        }
        let mut d = -I * p.j * hop - (loss_i + half_loss(j)) * at(i, j);
        if i == j {
            if i > 0 {
                d += p.gamma_l * at(i - 1, i - 1);
            }
            if i < last {
                d += p.gamma_r * at(i + 1, i + 1);
            }
        }
        out[j] = d;
    }
}

fn hermiticity_error(rho: &[Complex64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((rho[i * n + j] - rho[j * n + i].conj()).norm());
        }
    }
    worst
}

fn observe(rho: &[Complex64], n: usize) -> LatticeObservables {
    let density: Vec<f64> = (0..n).map(|k| rho[k * n + k].re).collect();
    let trace: Complex64 = (0..n).map(|k| rho[k * n + k]).sum();
    let mean_x: f64 = density
        .iter()
        .enumerate()
        .map(|(k, d)| (k + 1) as f64 * d)
        .sum();
    let var_x: f64 = density
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let dx = (k + 1) as f64 - mean_x;
            dx * dx * d
        })
        .sum();
    LatticeObservables {
        mean_x,
        var_x,
        boundary_mass: density[0] + density[n - 1],
        density,
        trace_error: (trace - 1.0).norm(),
        hermiticity_error: hermiticity_error(rho, n),
    }
}

/// Probability allowed on the outer sites before a periodic run stops
/// being a faithful stand-in for an infinite chain.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

/// Invariant violations beyond this abort [`evolve`].
pub const INVARIANT_LIMIT: f64 = 1e-6;

/// Integrates the master equation from `rho0` and samples observables on `t_grid`.
///
/// Periodic runs whose boundary mass reaches [`BOUNDARY_MASS_LIMIT`] carry a
/// warning on the returned series.
pub fn evolve(
    rho0: &DensityMatrix,
    p: &HoppingParams,
    t_grid: &[f64],
    cfg: &OdeStepperConfig,
) -> Result<TimeSeries<LatticeObservables>> {
    rho0.validate(1e-10)?;
    if rho0.sites != p.sites {
        return Err(Error::Shape(format!(
            "initial state has {} sites, parameters {}",
            rho0.sites, p.sites
        )));
    }
    let n = p.sites;
    let mut breach: Option<f64> = None;
    let mut series = integrate_ode_observed(
        |_, y: &[Complex64], dy: &mut [Complex64]| lindblad_rhs(p, y, dy),
        &rho0.data,
        t_grid,
        cfg,
        |t, y| {
            let obs = observe(y, n);
            let min_diag = obs.density.iter().copied().fold(f64::INFINITY, f64::min);
            for (quantity, deviation) in [
                ("trace", obs.trace_error),
                ("hermiticity", obs.hermiticity_error),
                ("diagonal positivity", (-min_diag).max(0.0)),
            ] {
                if deviation > INVARIANT_LIMIT {
                    return Err(Error::IntegrationUnstable {
                        t,
                        quantity,
                        deviation,
                    });
                }
            }
            if p.boundary == Boundary::Periodic
                && breach.is_none()
                && obs.boundary_mass >= BOUNDARY_MASS_LIMIT
            {
                breach = Some(t);
            }
            Ok(obs)
        },
    )?;
    if let Some(t) = breach {
        series.warnings.push(format!(
            "boundary mass reached {BOUNDARY_MASS_LIMIT:e} at t = {t}; the periodic chain no longer mimics an infinite one"
        ));
    }
    Ok(series)
}

/// Long-time diffusion coefficient `(Γ₊/2)(1 + 4J²/Γ₊²)`.
pub fn diffusion_coefficient(j: f64, gamma_plus: f64) -> Result<f64> {
    if gamma_plus == 0.0 {
        return Err(Error::DivisionByZero("gamma_plus"));
    }
    Ok(0.5 * gamma_plus * (1.0 + 4.0 * j * j / (gamma_plus * gamma_plus)))
}

/// Closed-form position variance on the infinite chain:
/// `Γ₊t + (4J²/Γ₊)t + (4J²/Γ₊²)(e^{−Γ₊t} − 1)`.
pub fn effective_variance(t: f64, j: f64, gamma_plus: f64) -> Result<f64> {
    if gamma_plus == 0.0 {
        return Err(Error::DivisionByZero("gamma_plus"));
    }
    let c = 4.0 * j * j / gamma_plus;
    Ok(gamma_plus * t + c * t + c / gamma_plus * (-gamma_plus * t).exp_m1())
}

/// Times where the short-time diffusive law meets the ballistic law
/// (`Γ₊t = 2J²t²`) and where the ballistic law meets the long-time
/// diffusive law (`2J²t² = 2Dt`).
pub fn crossover_times(j: f64, gamma_plus: f64) -> Result<(f64, f64)> {
    if j == 0.0 {
        return Err(Error::DivisionByZero("J"));
    }
    let d = diffusion_coefficient(j, gamma_plus)?;
    let j2 = j * j;
    Ok((gamma_plus / (2.0 * j2), d / j2))
}

/// Localization length of the open-chain steady state; `f64::INFINITY`
/// when the incoherent rates are balanced.
pub fn skin_length(j: f64, gamma_l: f64, gamma_r: f64) -> Result<f64> {
    check_nonneg("gamma_L", gamma_l)?;
    check_nonneg("gamma_R", gamma_r)?;
    let gp = gamma_l + gamma_r;
    check_positive("gamma_L + gamma_R", gp)?;
    let half_gap = 0.5 * (gamma_l - gamma_r).abs();
    let d = diffusion_coefficient(j, gp)?;
    // ln[(D − g)/(D + g)] = ln(1 − 2g/(D + g)).
    let log_ratio = (-2.0 * half_gap / (d + half_gap)).ln_1p();
    if log_ratio == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(-1.0 / log_ratio)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateConfig {
    /// Stop once the Frobenius norm of `dρ/dt` falls below this.
    pub tolerance: f64,
    /// Give up at this time; `None` uses `50·L/|Γ₋|`.
    pub t_max: Option<f64>,
    /// Fixed RK4 step; `None` uses [`HoppingParams::suggested_step`].
    pub dt: Option<f64>,
}

impl Default for SteadyStateConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            t_max: None,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkinProfile {
    pub density: Vec<f64>,
    pub residual: f64,
    /// Evolution time needed to reach `residual`.
    pub time: f64,
}

/// Relaxes an open chain to its steady state, starting from the mixed state.
pub fn steady_state_profile(p: &HoppingParams, cfg: &SteadyStateConfig) -> Result<SkinProfile> {
    if p.boundary != Boundary::Open {
        return Err(Error::WrongRegime("the skin profile needs open boundaries"));
    }
    if p.gamma_minus() == 0.0 {
        return Err(Error::NoSkinEffect);
    }
    check_positive("tolerance", cfg.tolerance)?;
    let n = p.sites;
    let t_max = cfg
        .t_max
        .unwrap_or(50.0 * n as f64 / p.gamma_minus().abs());
    let dt = cfg.dt.unwrap_or_else(|| p.suggested_step());
    let ode = OdeStepperConfig::rk4(dt)?;
    let mut stepper = OdeStepper::new(n * n, ode);
    let mut rho = DensityMatrix::uniform(n).data;
    let mut deriv = vec![Complex64::default(); n * n];
    let mut rhs = |_: f64, y: &[Complex64], dy: &mut [Complex64]| lindblad_rhs(p, y, dy);
    // Check the residual every `block` steps; one extra derivative per block.
    let block = 64.0 * dt;
    let mut t = 0.0;
    loop {
        lindblad_rhs(p, &rho, &mut deriv);
        let residual = deriv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if residual < cfg.tolerance {
            return Ok(SkinProfile {
                density: (0..n).map(|k| rho[k * n + k].re).collect(),
                residual,
                time: t,
            });
        }
        if t >= t_max {
            return Err(Error::SteadyStateNotReached { t, residual });
        }
        let next = (t + block).min(t_max);
        stepper.advance(&mut rhs, t, next, &mut rho)?;
        t = next;
    }
}

/// Fits `n_k ∝ e^{−d_k/ξ}`, `d_k` the distance from the accumulating edge.
///
/// Uses sites with `n_k / max n > 1e−8`, minus the two sites at each end of
/// the chain. Fails if the profile has no edge peak or too few usable sites.
pub fn fit_skin_length(density: &[f64]) -> Result<f64> {
    const EDGE: usize = 2;
    const FLOOR: f64 = 1e-8;
    let n = density.len();
    if n < 2 * EDGE + 2 {
        return Err(Error::Shape(format!("profile of {n} sites is too short to fit")));
    }
    let max = density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::Domain("profile has no positive density"));
    }
    let spread = max - density.iter().copied().fold(f64::INFINITY, f64::min);
    if spread <= 1e-12 * max {
        return Err(Error::NoSkinEffect);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = (EDGE..n - EDGE)
        .filter(|&k| density[k] / max > FLOOR)
        .map(|k| (k as f64, density[k].ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys)?;
    if fit.slope == 0.0 {
        return Err(Error::NoSkinEffect);
    }
    Ok(1.0 / fit.slope.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::linear_grid;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diffusion_coefficient_values() {
        assert_eq!(diffusion_coefficient(0.0, 1.0).unwrap(), 0.5);
        assert_eq!(diffusion_coefficient(4.0, 1.0).unwrap(), 32.5);
        assert_eq!(diffusion_coefficient(1.0, 2.0).unwrap(), 2.0);
        assert_eq!(
            diffusion_coefficient(1.0, 0.0),
            Err(Error::DivisionByZero("gamma_plus"))
        );
    }

    #[test]
    fn effective_variance_values() {
        assert_eq!(effective_variance(0.0, 4.0, 1.0).unwrap(), 0.0);
        // 65 + 64(e^{-1} - 1)
        let v = effective_variance(1.0, 4.0, 1.0).unwrap();
        assert!((v - 24.544_284_234_972_31).abs() < 1e-12, "{v}");
        let t = 1e-4;
        let small = effective_variance(t, 4.0, 1.0).unwrap() - (t + 32.0 * t * t);
        assert!(small.abs() < 1e-9);
    }

    #[test]
    fn skin_length_values() {
        assert_eq!(skin_length(1.0, 0.5, 0.5).unwrap(), f64::INFINITY);
        let hn = skin_length(0.0, 0.75, 0.25).unwrap();
        assert!((hn - 1.0 / 3f64.ln()).abs() < 1e-14);
        let x = skin_length(1.0, 0.75, 0.25).unwrap();
        assert!((x - 4.983_288_654_563_97).abs() < 1e-9, "{x}");
        assert_eq!(skin_length(1e200, 0.75, 0.25).unwrap(), f64::INFINITY);
    }

    #[test]
    fn crossovers() {
        let (t1, t2) = crossover_times(4.0, 1.0).unwrap();
        assert_eq!(t1, 1.0 / 32.0);
        assert!((t2 - 32.5 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn incoherent_generator_is_a_biased_walk() {
        let p = HoppingParams::new(0.0, 0.7, 0.2, 6, Boundary::Periodic).unwrap();
        let mut rho = DensityMatrix::zeros(6);
        let diag = [0.1, 0.3, 0.05, 0.25, 0.2, 0.1];
        for (k, d) in diag.iter().enumerate() {
            rho[(k, k)] = c(*d);
        }
        let d = rho_derivative(&rho, &p).unwrap();
        for k in 0..6 {
            let from_left = diag[(k + 5) % 6];
            let from_right = diag[(k + 1) % 6];
            let expect = 0.7 * (from_left - diag[k]) + 0.2 * (from_right - diag[k]);
            assert!((d[(k, k)] - c(expect)).norm() < 1e-15);
        }
    }

    #[test]
    fn pure_hopping_touches_four_coherences() {
        let p = HoppingParams::new(1.3, 0.0, 0.0, 7, Boundary::Open).unwrap();
        let rho = DensityMatrix::localized(7, 3).unwrap();
        let d = rho_derivative(&rho, &p).unwrap();
        for i in 0..7usize {
            for j in 0..7usize {
                let adjacent = i.abs_diff(3) + j.abs_diff(3) == 1;
                let mag = d[(i, j)].norm();
                if adjacent {
                    assert!((mag - 1.3).abs() < 1e-15);
                } else {
                    assert_eq!(mag, 0.0);
                }
            }
        }
    }

    #[test]
    fn uniform_state_is_stationary_on_a_ring() {
        let p = HoppingParams::new(2.0, 0.8, 0.3, 9, Boundary::Periodic).unwrap();
        let d = rho_derivative(&DensityMatrix::uniform(9), &p).unwrap();
        assert!(d.as_slice().iter().all(|z| z.norm() < 1e-16));
    }

    #[test]
    fn open_chain_conserves_trace() {
        let p = HoppingParams::new(0.9, 0.6, 0.2, 8, Boundary::Open).unwrap();
        let mut rho = DensityMatrix::zeros(8);
        for k in 0..8 {
            rho[(k, k)] = c(0.125);
        }
        rho[(0, 1)] = Complex64::new(0.02, 0.03);
        rho[(1, 0)] = Complex64::new(0.02, -0.03);
        let d = rho_derivative(&rho, &p).unwrap();
        assert!(d.trace().norm() < 1e-16);
        assert!(d.hermiticity_error() < 1e-16);
    }

    #[test]
    fn symmetric_incoherent_walk_variance() {
        let p = HoppingParams::new(0.0, 0.5, 0.5, 41, Boundary::Periodic).unwrap();
        let rho0 = DensityMatrix::localized(41, p.middle_site()).unwrap();
        let cfg = OdeStepperConfig::rk4(0.01).unwrap();
        let out = evolve(&rho0, &p, &[0.0, 2.0], &cfg).unwrap();
        let v = out.samples[1].var_x;
        assert!((v - 2.0).abs() < 0.02 * 2.0, "{v}");
    }

    #[test]
    fn biased_walk_drifts_right() {
        let p = HoppingParams::new(0.0, 0.75, 0.25, 61, Boundary::Periodic).unwrap();
        let x0 = (p.middle_site() + 1) as f64;
        let rho0 = DensityMatrix::localized(61, p.middle_site()).unwrap();
        let cfg = OdeStepperConfig::rk4(0.01).unwrap();
        let out = evolve(&rho0, &p, &linear_grid(0.0, 4.0, 5), &cfg).unwrap();
        let drift = out.samples[4].mean_x - x0;
        assert!((drift - 2.0).abs() < 0.01 * 2.0, "{drift}");
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn small_ring_raises_boundary_warning() {
        let p = HoppingParams::new(1.0, 0.5, 0.5, 9, Boundary::Periodic).unwrap();
        let rho0 = DensityMatrix::localized(9, 4).unwrap();
        let cfg = OdeStepperConfig::rk4(0.01).unwrap();
        let out = evolve(&rho0, &p, &[0.0, 1.0, 5.0], &cfg).unwrap();
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn invalid_start_rejected() {
        let p = HoppingParams::new(1.0, 0.5, 0.5, 5, Boundary::Open).unwrap();
        let cfg = OdeStepperConfig::rk4(0.01).unwrap();
        assert!(evolve(&DensityMatrix::zeros(5), &p, &[0.0, 1.0], &cfg).is_err());
        assert!(HoppingParams::new(1.0, -0.1, 0.5, 5, Boundary::Open).is_err());
        assert!(HoppingParams::new(1.0, 0.1, 0.5, 2, Boundary::Open).is_err());
    }

    #[test]
    fn balanced_rates_have_no_skin() {
        let p = HoppingParams::new(1.0, 0.5, 0.5, 20, Boundary::Open).unwrap();
        assert_eq!(
            steady_state_profile(&p, &SteadyStateConfig::default()),
            Err(Error::NoSkinEffect)
        );
        assert_eq!(fit_skin_length(&[0.1; 10]), Err(Error::NoSkinEffect));
    }

    #[test]
    fn hatano_nelson_profile() {
        let p = HoppingParams::new(0.0, 0.75, 0.25, 60, Boundary::Open).unwrap();
        let prof = steady_state_profile(&p, &SteadyStateConfig::default()).unwrap();
        assert!(prof.residual < 1e-10);
        assert!(prof.density[59] > prof.density[0]);
        let xi = fit_skin_length(&prof.density).unwrap();
        assert!((xi - 1.0 / 3f64.ln()).abs() < 0.1 * 0.9102, "{xi}");
    }
}
