use crate::error::{check_positive, Error, Result};

const MAX_BISECTIONS: usize = 400;

/// Root of `f` on `bracket` by bisection, to an absolute width of `tol`.
pub fn solve_scalar(mut f: impl FnMut(f64) -> f64, bracket: (f64, f64), tol: f64) -> Result<f64> {
    check_positive("tol", tol)?;
    let (mut a, mut b) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() * fb.signum() < 0.0) {
        return Err(Error::Bracketing { a, b });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
