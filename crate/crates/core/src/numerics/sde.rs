use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_positive, Error, Result};
use crate::numerics::StreamRng;
use crate::series::{check_grid, TimeSeries};

/// Euler–Maruyama path of `dy = a(t, y) dt + B(t, y) dW`, sampled on `t_grid`.
///
/// `drift(t, y, a)` fills `a`. `diffusion(t, y, dw, dy)` must *add* the noise
/// increment `B(t, y)·dw` into `dy`, where `dw` holds `noise_dim` independent
/// Wiener increments of variance `h`. Each grid interval is split into
/// `ceil(gap / dt)` equal steps.
pub fn integrate_sde_em<D, B>(
    mut drift: D,
    mut diffusion: B,
    noise_dim: usize,
    y0: &[f64],
    t_grid: &[f64],
    rng: &mut StreamRng,
    dt: f64,
) -> Result<TimeSeries<Vec<f64>>>
where
    D: FnMut(f64, &[f64], &mut [f64]),
    B: FnMut(f64, &[f64], &[f64], &mut [f64]),
{
    check_grid(t_grid)?;
    check_positive("dt", dt)?;
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut a = vec![0.0; n];
    let mut incr = vec![0.0; n];
    let mut dw = vec![0.0; noise_dim];
    let mut samples = Vec::with_capacity(t_grid.len());
    samples.push(y.clone());
    for w in t_grid.windows(2) {
        let gap = w[1] - w[0];
        let steps = ((gap / dt) * (1.0 - 1e-9)).ceil().max(1.0) as usize;
        let h = gap / steps as f64;
        let sqrt_h = h.sqrt();
        for k in 0..steps {
            let t = w[0] + h * k as f64;
            drift(t, &y, &mut a);
            for d in dw.iter_mut() {
                *d = sqrt_h * rng.sample::<f64, _>(StandardNormal);
            }
            incr.fill(0.0);
            diffusion(t, &y, &dw, &mut incr);
            for i in 0..n {
                y[i] += a[i] * h + incr[i];
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationDiverged { t: t + h });
            }
        }
        samples.push(y.clone());
    }
    TimeSeries::new(t_grid.to_vec(), samples)
}
