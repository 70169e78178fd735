//! The experiment registry. Every experiment writes its simulated series next
//! to the matching analytic or oracle column.

use qactive::classical::{
    simulate_langevin, AbpParams, AoupParams, LangevinConfig, LangevinModel, RtdParams,
};
use qactive::lattice::{
    crossover_times, effective_variance, evolve, fit_skin_length, skin_length,
    steady_state_profile, Boundary, DensityMatrix, HoppingParams, SteadyStateConfig,
};
use qactive::momentum_kick::{
    evolve_kick_moments, long_time_slope, short_time_expansion, variance_symmetric as kick_variance,
    KickMomentState, KickParams,
};
use qactive::numerics::{OdeStepperConfig, QuadratureConfig};
use qactive::qaoup::{
    crossover_time, msd, msd_closed_finite_temperature, msd_closed_zero_temperature, BathSpec,
    InverseTemperature,
};
use qactive::spin_orbit::{
    active_diffusion, analytic_moments, evolve_moments, peclet_number, Mass, MomentState,
    SpinOrbitParams,
};
use qactive::trajectories::{
    run_ensemble, JumpSampling, MonitoredChannels, UnravelingConfig, UnravelingKind,
};

use crate::error::CliError;
use crate::output::Table;
use crate::params::{param, required, GridSpec, Invocation, ParamSet, ParamSpec};

pub struct Experiment {
    pub id: &'static str,
    pub summary: &'static str,
    pub units: &'static str,
    /// Config-file section holding the parameters.
    pub block: &'static str,
    pub params: &'static [ParamSpec],
    pub grid: Option<GridSpec>,
    pub columns: &'static [&'static str],
    run: fn(&Invocation, &[f64], &mut Table) -> Result<(), CliError>,
}

impl Experiment {
    pub fn run(&self, inv: &Invocation) -> Result<Table, CliError> {
        let grid = inv.grid.map(|g| g.points()).unwrap_or_default();
        let mut table = Table::new(self.columns);
        (self.run)(inv, &grid, &mut table)?;
        table.warnings.sort();
        table.warnings.dedup();
        Ok(table)
    }
}

/// Alphabetical by id.
pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        id: "classical-baselines",
        summary: "classical run-and-tumble, active Brownian and active OU ensembles against their variances",
        units: "v0 in length/time, diffusion constants in length²/time, rates in 1/time",
        block: "classical",
        params: &[
            required("model", "rtd, abp or aoup"),
            param("v0", "1", "self-propulsion speed"),
            param("d", "0", "translational diffusion (rtd, aoup)"),
            param("gamma-up", "0.5", "telegraph rate into +1 (rtd)"),
            param("gamma-down", "0.5", "telegraph rate into -1 (rtd)"),
            param("d1", "0.1", "translational diffusion (abp)"),
            param("d2", "0.5", "rotational diffusion (abp)"),
            param("d-u", "1", "active noise strength (aoup)"),
            param("tau", "1", "persistence time (aoup)"),
            param("n-traj", "2000", "ensemble size"),
            param("dt", "1e-3", "Euler-Maruyama step"),
        ],
        grid: Some(GridSpec::linear(0.0, 20.0, 21)),
        columns: &["t", "var_x", "var_x_se", "var_x_analytic"],
        run: classical_baselines,
    },
    Experiment {
        id: "kick-variance",
        summary: "momentum variance of the dissipative momentum-kick model, moments against the symmetric closed form",
        units: "rates in 1/time, momentum in units of the kick scale",
        block: "momentum_kick",
        params: &[
            param("gamma-l", "0.1", "rate of +p0 kicks"),
            param("gamma-r", "0.1", "rate of -p0 kicks"),
            param("gamma-up", "0.1", "spin pump rate"),
            param("gamma-p", "0", "momentum diffusion from position monitoring"),
            param("p0", "1e-2", "kick magnitude"),
            param("mass", "1", "particle mass"),
            param("sz0", "1", "initial spin polarisation"),
            param("dt", "1e-2", "RK4 step"),
        ],
        grid: Some(GridSpec::log(1e-2, 1e3, 100)),
        columns: &["t", "var_p", "var_p_analytic", "s_z"],
        run: kick_variance_run,
    },
    Experiment {
        id: "lattice-skin",
        summary: "steady-state skin profile of the open chain against the exponential with the predicted length",
        units: "rates in 1/time, lengths in lattice sites",
        block: "lattice",
        params: &[
            param("J", "1", "coherent hopping"),
            param("gamma-plus", "1", "total incoherent hopping rate"),
            param("gamma-minus", "0.5", "hopping asymmetry"),
            param("L", "80", "number of sites"),
            param("tolerance", "1e-10", "steady-state residual"),
        ],
        grid: None,
        columns: &["site", "density", "density_analytic"],
        run: lattice_skin,
    },
    Experiment {
        id: "lattice-variance",
        summary: "spreading of a localized walker on the ring, diffusive-ballistic-diffusive against the effective variance",
        units: "rates in 1/time, positions in lattice sites",
        block: "lattice",
        params: &[
            param("J", "4", "coherent hopping"),
            param("gamma-plus", "1", "total incoherent hopping rate"),
            param("gamma-minus", "0", "hopping asymmetry"),
            param("L", "401", "number of sites"),
            param("boundary", "periodic", "periodic or open"),
        ],
        grid: Some(GridSpec::log(1e-3, 20.0, 200)),
        columns: &["t", "var_x", "var_eff", "boundary_mass"],
        run: lattice_variance,
    },
    Experiment {
        id: "qaoup-msd",
        summary: "mean-squared displacement of the quantum active OU particle, quadrature against closed form",
        units: "hbar = k_B = 1; gamma is the friction, T the temperature, Da the active noise strength",
        block: "qaoup",
        params: &[
            required("regime", "finiteT or zeroT"),
            param("gamma", "1e-3", "friction"),
            param("omega-c", "1e4", "bath cutoff"),
            param("T", "1", "temperature (finiteT only)"),
            param("Da", "1", "active noise strength"),
            param("tau", "1", "active persistence time"),
            param("mass", "0", "particle mass; 0 keeps the overdamped response"),
            param("rel-tol", "1e-6", "quadrature tolerance"),
        ],
        grid: Some(GridSpec::log(1e-4, 1e2, 100)),
        columns: &["t", "msd_quad", "msd_closed"],
        run: qaoup_msd,
    },
    Experiment {
        id: "qrtd-variance",
        summary: "position variance of the spin-orbit run-and-tumble particle, moment ODEs against the exact solution",
        units: "rates in 1/time, lambda a velocity",
        block: "spin_orbit",
        params: &[
            param("lambda", "5", "spin-orbit velocity"),
            param("gamma-plus", "1", "total spin flip rate"),
            param("gamma-minus", "0", "spin flip asymmetry"),
            param("gamma-d", "0.1", "momentum diffusion rate"),
            param("mass", "inf", "particle mass"),
            param("sz0", "0", "initial spin polarisation"),
            param("dt", "1e-3", "RK4 step"),
        ],
        grid: Some(GridSpec::log(1e-2, 1e3, 100)),
        columns: &["t", "var_x", "var_x_analytic", "s_z"],
        run: qrtd_variance,
    },
    Experiment {
        id: "trajectories-check",
        summary: "quantum-jump or diffusive unraveling ensembles against the master-equation moments",
        units: "rates in 1/time, lambda a velocity",
        block: "trajectories",
        params: &[
            required("kind", "qj or qsd"),
            param("lambda", "5", "spin-orbit velocity"),
            param("gamma-up", "0.75", "spin pump rate"),
            param("gamma-down", "0.25", "spin decay rate"),
            param("gamma-d", "0.1", "momentum diffusion rate"),
            param("sz0", "1", "initial spin polarisation"),
            param("n-traj", "2000", "ensemble size"),
            param("dt", "1e-3", "time step"),
            param("sampling", "per-step", "jump sampling: per-step or exact"),
            param("monitor-up", "true", "record the pump channel"),
            param("monitor-down", "true", "record the decay channel"),
            param("monitor-momentum", "true", "record the momentum-diffusion channel"),
            param("noise-amplitude", "default", "position noise amplitude; default is sqrt(gamma-d)"),
        ],
        grid: Some(GridSpec::linear(0.0, 10.0, 21)),
        columns: &[
            "t",
            "sz_mean",
            "sz_se",
            "sz_lindblad",
            "var_x",
            "var_x_se",
            "var_x_lindblad",
        ],
        run: trajectories_check,
    },
];

pub fn find(id: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.id == id)
}

pub fn listing() -> String {
    let mut out = String::new();
    for e in EXPERIMENTS {
        out.push_str(&format!("{:<20} {}\n", e.id, e.summary));
        out.push_str(&format!("{:<20} units: {}\n", "", e.units));
        out.push_str(&format!("{:<20} columns: {}\n", "", e.columns.join(", ")));
    }
    out
}

/// Grid with `t = 0` in front when missing; returns how many leading samples
/// to drop again.
fn from_origin(grid: &[f64]) -> (Vec<f64>, usize) {
    if grid[0] > 0.0 {
        let mut g = Vec::with_capacity(grid.len() + 1);
        g.push(0.0);
        g.extend_from_slice(grid);
        (g, 1)
    } else {
        (grid.to_vec(), 0)
    }
}

fn model<T>(r: qactive::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from_params)
}

fn mass(p: &ParamSet, name: &str) -> Result<Mass, CliError> {
    model(Mass::new(p.f64(name)?))
}

fn lattice_variance(inv: &Invocation, grid: &[f64], table: &mut Table) -> Result<(), CliError> {
    let p = &inv.params;
    let boundary = match p.choice("boundary", &["periodic", "open"])? {
        "open" => Boundary::Open,
        _ => Boundary::Periodic,
    };
    let (j, gp) = (p.f64("J")?, p.f64("gamma-plus")?);
    let hp = model(HoppingParams::from_sum_difference(
        j,
        gp,
        p.f64("gamma-minus")?,
        p.count("L")?,
        boundary,
    ))?;
    let rho0 = model(DensityMatrix::localized(hp.sites(), hp.middle_site()))?;
    let cfg = model(OdeStepperConfig::rk4(hp.suggested_step()))?;
    let (full, skip) = from_origin(grid);
    let series = evolve(&rho0, &hp, &full, &cfg)?;
    for (t, o) in series.iter().skip(skip) {
        table.push(vec![t, o.var_x, effective_variance(t, j, gp)?, o.boundary_mass]);
    }
    if j != 0.0 {
        let (t1, t2) = crossover_times(j, gp)?;
        table.notes.push(("crossover_ballistic", t1));
        table.notes.push(("crossover_diffusive", t2));
    }
    table.warnings = series.warnings;
    Ok(())
}

fn lattice_skin(inv: &Invocation, _: &[f64], table: &mut Table) -> Result<(), CliError> {
    let p = &inv.params;
    let hp = model(HoppingParams::from_sum_difference(
        p.f64("J")?,
        p.f64("gamma-plus")?,
        p.f64("gamma-minus")?,
        p.count("L")?,
        Boundary::Open,
    ))?;
    let cfg = SteadyStateConfig {
        tolerance: p.f64("tolerance")?,
        ..SteadyStateConfig::default()
    };
    let profile = steady_state_profile(&hp, &cfg)?;
    let xi = skin_length(hp.j(), hp.gamma_l(), hp.gamma_r())?;
    let n = hp.sites();
    // Distance from the edge where the walker piles up.
    let distance = |k: usize| {
        if hp.gamma_minus() > 0.0 {
            (n - 1 - k) as f64
        } else {
            k as f64
        }
    };
    let weights: Vec<f64> = (0..n).map(|k| (-distance(k) / xi).exp()).collect();
    let norm: f64 = weights.iter().sum();
    for (k, (&d, w)) in profile.density.iter().zip(&weights).enumerate() {
        table.push(vec![(k + 1) as f64, d, w / norm]);
    }
    table.notes.push(("xi_fit", fit_skin_length(&profile.density)?));
    table.notes.push(("xi_analytic", xi));
    table.notes.push(("residual", profile.residual));
    table.notes.push(("relaxation_time", profile.time));
    Ok(())
}

fn qaoup_msd(inv: &Invocation, grid: &[f64], table: &mut Table) -> Result<(), CliError> {
    let p = &inv.params;
    let zero_t = p.choice("regime", &["finiteT", "zeroT"])? == "zeroT";
    let beta = if zero_t {
        InverseTemperature::Infinite
    } else {
        model(InverseTemperature::from_temperature(p.f64("T")?))?
    };
    let omega_c = p.f64("omega-c")?;
    let mut bath = model(BathSpec::new(
        p.f64("gamma")?,
        omega_c,
        beta,
        p.f64("Da")?,
        p.f64("tau")?,
    ))?;
    let m = p.f64("mass")?;
    if m != 0.0 {
        bath = model(bath.with_mass(m))?;
    }
    let quad = model(QuadratureConfig::new(p.f64("rel-tol")?, 50.0 * omega_c))?;
    for &t in grid {
        let closed = if zero_t {
            msd_closed_zero_temperature(t, &bath)
        } else {
            msd_closed_finite_temperature(t, &bath)?
        };
        table.push(vec![t, msd(t, &bath, &quad)?, closed]);
    }
    table.notes.push(("thermal_diffusion", bath.thermal_diffusion()));
    table.notes.push(("active_diffusion", bath.active_diffusion()));
    if zero_t && bath.d_a() > 0.0 {
        let c = crossover_time(&bath)?;
        table.notes.push(("crossover_time", c.time));
        table.notes.push(("crossover_estimate", c.estimate));
    }
    Ok(())
}

fn qrtd_variance(inv: &Invocation, grid: &[f64], table: &mut Table) -> Result<(), CliError> {
    let p = &inv.params;
    let so = model(SpinOrbitParams::from_sum_difference(
        mass(p, "mass")?,
        p.f64("lambda")?,
        p.f64("gamma-plus")?,
        p.f64("gamma-minus")?,
        p.f64("gamma-d")?,
    ))?;
    let s0 = MomentState::factorized(p.f64("sz0")?);
    model(s0.validate(1e-9))?;
    let cfg = model(OdeStepperConfig::rk4(p.f64("dt")?))?;
    let (full, skip) = from_origin(grid);
    let series = evolve_moments(&s0, &so, &full, &cfg)?;
    for (t, s) in series.iter().skip(skip) {
        let exact = analytic_moments(t, &so, &s0).decomposition().var_x;
        table.push(vec![t, s.decomposition.var_x, exact, s.state.s_z]);
    }
    if so.mass() == Mass::Infinite {
        table.notes.push(("diffusion_long_time", active_diffusion(&so)));
    }
    if so.gamma_d() > 0.0 {
        table.notes.push(("peclet", peclet_number(&so)?));
    }
    Ok(())
}

fn kick_variance_run(inv: &Invocation, grid: &[f64], table: &mut Table) -> Result<(), CliError> {
    let p = &inv.params;
    let k = model(KickParams::new(
        mass(p, "mass")?,
        p.f64("p0")?,
        p.f64("gamma-l")?,
        p.f64("gamma-r")?,
        p.f64("gamma-up")?,
        p.f64("gamma-p")?,
    ))?;
    let s0 = KickMomentState::at_rest(p.f64("sz0")?);
    model(s0.validate(1e-9))?;
    let cfg = model(OdeStepperConfig::rk4(p.f64("dt")?))?;
    let (full, skip) = from_origin(grid);
    let series = evolve_kick_moments(&s0, &k, &full, &cfg)?;
    let symmetric = k.gamma_l() == k.gamma_r();
    for (t, s) in series.iter().skip(skip) {
        let exact = if symmetric {
            kick_variance(t, &s0, &k)?
        } else {
            f64::NAN
        };
        table.push(vec![t, s.var_p, exact, s.state.s_z]);
    }
    let e = short_time_expansion(&s0, &k);
    table.notes.push(("slope_initial", e.slope));
    table.notes.push(("curvature_initial", e.curvature));
    table.notes.push(("s_z_stationary", k.stationary_polarization()));
    if symmetric {
        table.notes.push(("slope_long_time", long_time_slope(&k)?));
    }
    Ok(())
}

fn trajectories_check(inv: &Invocation, grid: &[f64], table: &mut Table) -> Result<(), CliError> {
    let p = &inv.params;
    let so = model(SpinOrbitParams::new(
        Mass::Infinite,
        p.f64("lambda")?,
        p.f64("gamma-up")?,
        p.f64("gamma-down")?,
        p.f64("gamma-d")?,
    ))?;
    let kind = match p.choice("kind", &["qj", "qsd"])? {
        "qj" => UnravelingKind::QuantumJump,
        _ => UnravelingKind::StateDiffusion,
    };
    let mut cfg = UnravelingConfig::new(kind, p.f64("dt")?, p.count("n-traj")?, inv.seed);
    cfg.jump_sampling = match p.choice("sampling", &["per-step", "exact"])? {
        "exact" => JumpSampling::ExactWaitingTime,
        _ => JumpSampling::PerStep,
    };
    cfg.channels = MonitoredChannels {
        spin_up: p.flag("monitor-up")?,
        spin_down: p.flag("monitor-down")?,
        momentum_diffusion: p.flag("monitor-momentum")?,
    };
    cfg.initial_polarization = p.f64("sz0")?;
    cfg.position_noise = match p.raw("noise-amplitude")? {
        "default" => None,
        _ => Some(p.f64("noise-amplitude")?),
    };
    model(cfg.validate(&so))?;
    let (full, skip) = from_origin(grid);
    let ens = run_ensemble(&so, &full, &cfg)?;
    let s0 = MomentState::factorized(cfg.initial_polarization);
    for k in skip..full.len() {
        let t = full[k];
        let exact = analytic_moments(t, &so, &s0);
        let (sz, var) = (ens.s_z.samples[k], ens.var_x.samples[k]);
        table.push(vec![
            t,
            sz.mean,
            sz.se_mean,
            exact.s_z,
            var.value,
            var.standard_error,
            exact.decomposition().var_x,
        ]);
    }
    Ok(())
}

fn classical_baselines(inv: &Invocation, grid: &[f64], table: &mut Table) -> Result<(), CliError> {
    let p = &inv.params;
    let m = match p.choice("model", &["rtd", "abp", "aoup"])? {
        "rtd" => LangevinModel::Rtd(model(RtdParams::new(
            p.f64("v0")?,
            p.f64("d")?,
            p.f64("gamma-up")?,
            p.f64("gamma-down")?,
        ))?),
        "abp" => LangevinModel::Abp(model(AbpParams::new(p.f64("v0")?, p.f64("d1")?, p.f64("d2")?))?),
        _ => LangevinModel::Aoup(model(AoupParams::new(p.f64("d")?, p.f64("d-u")?, p.f64("tau")?))?),
    };
    let cfg = model(LangevinConfig::new(p.count("n-traj")?, inv.seed, p.f64("dt")?))?;
    let (full, skip) = from_origin(grid);
    let stats = simulate_langevin(&m, &full, &cfg)?;
    for (t, s) in stats.iter().skip(skip) {
        table.push(vec![t, s.variance, s.se_variance, m.analytic_variance(t)]);
    }
    Ok(())
}
