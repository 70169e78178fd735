use crate::error::{invalid, Error, Result};

/// Samples of some observable on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub times: Vec<f64>,
    pub samples: Vec<T>,
    /// Non-fatal conditions noticed during the run.
    pub warnings: Vec<String>,
}

impl<T> TimeSeries<T> {
    pub fn new(times: Vec<f64>, samples: Vec<T>) -> Result<Self> {
        if times.len() != samples.len() {
            return Err(Error::Shape(format!(
                "{} times but {} samples",
                times.len(),
                samples.len()
            )));
        }
        Ok(Self {
            times,
            samples,
            warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.times.iter().copied().zip(self.samples.iter())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> TimeSeries<U> {
        TimeSeries {
            times: self.times.clone(),
            samples: self.samples.iter().map(f).collect(),
            warnings: self.warnings.clone(),
        }
    }

    pub fn last(&self) -> Option<(f64, &T)> {
        self.times.last().copied().zip(self.samples.last())
    }
}

/// Validates a sampling grid: at least one point, finite, strictly increasing.
pub fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(invalid("time grid contains a non-finite value"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("time grid must be strictly increasing"));
    }
    Ok(())
}

/// `n` points evenly spaced on `[start, end]`.
pub fn linear_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            let mut grid: Vec<f64> = (0..n).map(|k| start + step * k as f64).collect();
            grid[n - 1] = end;
            grid
        }
    }
}

/// `n` points evenly spaced in `ln t` on `[start, end]`; both ends must be positive.
pub fn log_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    let (a, b) = (start.ln(), end.ln());
    let mut grid: Vec<f64> = linear_grid(a, b, n).into_iter().map(f64::exp).collect();
    if n >= 2 {
        grid[0] = start;
        grid[n - 1] = end;
    }
    grid
}
