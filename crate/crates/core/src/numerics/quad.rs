use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{check_positive, invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Hard upper frequency limit.
    pub omega_max: f64,
    /// Number of oscillation periods `2π/t` integrated explicitly; beyond
    /// that the cosine part is replaced by its leading asymptotic term.
    pub periods: usize,
    /// Budget of panel bisections before giving up.
    pub max_subdivisions: usize,
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, omega_max: f64) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            omega_max,
            periods: 400,
            max_subdivisions: 200_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults for a kernel with exponential cutoff `omega_c`.
    pub fn for_cutoff(omega_c: f64) -> Result<Self> {
        Self::new(1e-6, 50.0 * omega_c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        check_positive("omega_max", self.omega_max)?;
        if self.periods == 0 || self.max_subdivisions == 0 {
            return Err(invalid("periods and max_subdivisions must be positive"));
        }
        Ok(())
    }
}

/// `(1/π) ∫₀^{ω_max} (1 − cos ωt) g(ω) dω`, the even-integrand form of
/// `∫ dω/2π (1 − cos ωt) g(|ω|)`.
///
/// `g` may blow up like `ω⁻²` at the origin.
pub fn quad_msd_kernel(g: impl Fn(f64) -> f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    quad_msd_kernel_with_scales(g, t, &[], cfg)
}

/// As [`quad_msd_kernel`], with extra panel breakpoints at the frequency
/// scales where `g` changes character (cutoffs, Lorentzian widths).
pub fn quad_msd_kernel_with_scales(
    g: impl Fn(f64) -> f64,
    t: f64,
    scales: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain("quadrature time must be finite and >= 0"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let period = 2.0 * PI / t;
    let span = cfg.periods as f64 * period;
    let (w, tail) = if span >= cfg.omega_max {
        (cfg.omega_max, false)
    } else {
        (span, true)
    };

    // Oscillatory part. 1 − cos x is written as 2 sin²(x/2) to avoid cancellation.
    let mut points = vec![0.0, w];
    let mut k = 1.0;
    while k * period < w {
        points.push(k * period);
        k += 1.0;
    }
    for j in 1..=12 {
        points.push(period.min(w) / f64::from(1u32 << j));
    }
    points.extend(scales.iter().copied().filter(|s| *s > 0.0 && *s < w));
    let osc = |omega: f64| {
        let s = (0.5 * omega * t).sin();
        2.0 * s * s * g(omega)
    };
    let mut value = adaptive(osc, &mut points, cfg.rel_tol, cfg.max_subdivisions)?;

    if tail {
        // Beyond w the cosine averages out: ∫ g cos(ωt) over [w, ∞) ≈ −g'(w)/t²
        // because w is a whole number of periods.
        let mut tail_points = vec![w, cfg.omega_max];
        let mut edge = 2.0 * w;
        while edge < cfg.omega_max {
            tail_points.push(edge);
            edge *= 2.0;
        }
        tail_points.extend(
            scales
                .iter()
                .copied()
                .filter(|s| *s > w && *s < cfg.omega_max),
        );
        let smooth = adaptive(&g, &mut tail_points, cfg.rel_tol, cfg.max_subdivisions)?;
        let h = 1e-4 * w;
        let slope = (g(w + h) - g(w - h)) / (2.0 * h);
        value += smooth + slope / (t * t);
    }
    Ok(value / PI)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate on `[a, b]` and its difference from the
/// embedded 7-point Gauss rule.
pub fn gauss_kronrod(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss–Kronrod over the panels delimited by `points`.
fn adaptive(
    f: impl Fn(f64) -> f64,
    points: &mut Vec<f64>,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<f64> {
    points.sort_by(f64::total_cmp);
    points.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * x.abs().max(y.abs()));
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    for w in points.windows(2) {
        let (value, error) = gauss_kronrod(&f, w[0], w[1]);
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let v: Vec<f64> = panels.iter().map(|p| p.value).collect();
        let e: Vec<f64> = panels.iter().map(|p| p.error).collect();
        (super::pairwise_sum(&v), super::pairwise_sum(&e))
    };
    let (mut value, mut error) = totals(&heap);
    let mut splits = 0;
    while error > rel_tol * value.abs() && error > 1e-300 {
        if splits >= max_subdivisions {
            return Err(Error::QuadratureFailed {
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailed {
                estimate: value,
                error,
            });
        }
        let (v1, e1) = gauss_kronrod(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        splits += 1;
        // Refresh the running sums now and then to stop drift.
        if splits % 256 == 0 {
            (value, error) = totals(&heap);
        }
    }
    let (value, error) = totals(&heap);
    if !value.is_finite() {
        return Err(Error::QuadratureFailed {
            estimate: value,
            error,
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_polynomials() {
        let (v, _) = gauss_kronrod(|x| x.powi(10) - 3.0 * x * x, -1.0, 2.0);
        let exact = (2f64.powi(11) + 1.0) / 11.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_exactly_zero() {
        let cfg = QuadratureConfig::new(1e-8, 1e3).unwrap();
        assert_eq!(quad_msd_kernel(|w| 1.0 / (w * w), 0.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn flat_noise_gives_linear_growth() {
        // g = 2T/(γω²) ↔ K = 8γT; exact (1/π)∫(1−cos ωt) g = T t/γ up to the
        // truncation 2T/(πγ ω_max).
        let (gamma, temp) = (0.5, 2.0);
        let cfg = QuadratureConfig::new(1e-10, 1e12).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let v = quad_msd_kernel(|w| 2.0 * temp / (gamma * w * w), t, &cfg).unwrap();
            let exact = temp * t / gamma - 2.0 * temp / (PI * gamma * cfg.omega_max);
            assert!((v - exact).abs() / exact < 1e-8, "t={t} v={v} exact={exact}");
        }
    }

    #[test]
    fn lorentzian_matches_persistent_closed_form() {
        let (gamma, da, tau) = (0.1, 3.0, 2.0);
        let dt = da / (4.0 * gamma * gamma);
        let g = |w: f64| 4.0 * da / (1.0 + w * w * tau * tau) / (4.0 * gamma * gamma * w * w);
        let cfg = QuadratureConfig::new(1e-10, 1e8).unwrap();
        for t in [0.01, 0.5, 2.0, 40.0, 1e3] {
            let v = quad_msd_kernel_with_scales(g, t, &[1.0 / tau], &cfg).unwrap();
            let exact = 2.0 * dt * (t + tau * (-t / tau).exp_m1());
            assert!((v - exact).abs() / exact < 1e-8, "t={t} v={v} exact={exact}");
        }
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-14,
            omega_max: 1e3,
            periods: 4,
            max_subdivisions: 3,
        };
        let err = quad_msd_kernel(|w| (1.0 / w).sin().abs() / w.sqrt(), 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailed { .. }));
    }
}
