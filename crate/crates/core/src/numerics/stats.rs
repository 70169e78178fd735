use crate::error::{Error, Result};

/// Sum by recursive halving. The split points depend only on the length, so
/// the result is reproducible and the rounding error grows like `log n`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let (lo, hi) = values.split_at(values.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// Sample mean and unbiased variance, with standard errors for both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// Standard error of `variance` from the spread of squared deviations.
    pub se_variance: f64,
}

pub fn moments_of(values: &[f64]) -> SampleMoments {
    let n = values.len();
    let nf = n as f64;
    let mean = pairwise_sum(values) / nf;
    if n < 2 {
        return SampleMoments {
            n,
            mean,
            variance: 0.0,
            se_mean: f64::NAN,
            se_variance: f64::NAN,
        };
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let ss = pairwise_sum(&sq);
    let variance = ss / (nf - 1.0);
    let biased = ss / nf;
    let q: Vec<f64> = sq.iter().map(|s| (s - biased) * (s - biased)).collect();
    let var_sq = pairwise_sum(&q) / (nf - 1.0);
    SampleMoments {
        n,
        mean,
        variance,
        se_mean: (variance / nf).sqrt(),
        se_variance: (var_sq / nf).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} x values, {} y values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Shape("a line needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let sxx: Vec<f64> = x.iter().map(|xi| (xi - mx) * (xi - mx)).collect();
    let sxy: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).collect();
    let sxx = pairwise_sum(&sxx);
    if sxx == 0.0 {
        return Err(Error::DivisionByZero("spread of x"));
    }
    let slope = pairwise_sum(&sxy) / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Slope of `ln y` against `ln t`.
pub fn loglog_slope(t: &[f64], y: &[f64]) -> Result<f64> {
    if t.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive data"));
    }
    let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lt, &ly)?.slope)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test of `samples` against a continuous `cdf`.
pub fn kolmogorov_smirnov(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome> {
    if samples.is_empty() {
        return Err(Error::Shape("no samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    Ok(KsOutcome {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    })
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_ints() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn two_point_moments() {
        let m = moments_of(&[0.0, 2.0]);
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.variance, 2.0);
    }

    #[test]
    fn constant_sample_has_zero_variance() {
        let m = moments_of(&[4.25; 10]);
        assert_eq!(m.variance, 0.0);
        assert_eq!(m.se_variance, 0.0);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
    }

    #[test]
    fn power_law_slope() {
        let t = [0.1, 1.0, 10.0];
        let y: Vec<f64> = t.iter().map(|v: &f64| 5.0 * v.powf(1.5)).collect();
        assert!((loglog_slope(&t, &y).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Reference values of the Kolmogorov survival function.
        assert!((kolmogorov_q(1.0) - 0.269_999_671_677_354_6).abs() < 1e-12);
        assert!((kolmogorov_q(1.627_623_611_518_95) - 0.01).abs() < 1e-9);
    }

    #[test]
    fn ks_accepts_uniform_grid_and_rejects_shift() {
        let n = 1000;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let ok = kolmogorov_smirnov(&u, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ok.p_value > 0.99);
        let shifted: Vec<f64> = u.iter().map(|x| x * 0.8).collect();
        let bad = kolmogorov_smirnov(&shifted, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(bad.p_value < 1e-6);
    }
}
