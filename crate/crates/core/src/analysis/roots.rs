//! Bracketing root finders on a scalar function of the field.

use crate::Result;

/// Bisection on a sign-changing bracket `[lo, hi]` down to `tol` or until the
/// midpoint no longer moves in floating point.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Sub-intervals of a uniform `n`-step scan over `[lo, hi]` on which `f`
/// changes sign.
pub fn sign_changes(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(lo)?;
    for k in 1..=n {
        let x1 = lo + (hi - lo) * k as f64 / n as f64;
        let f1 = f(x1)?;
        if f0 == 0.0 || (f0 > 0.0) != (f1 > 0.0) && f1 != 0.0 {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn brackets_every_root() {
        let b = sign_changes(|x| Ok((x - 0.25) * (x - 0.5) * (x - 0.8)), 0.0, 1.0, 100).unwrap();
        assert_eq!(b.len(), 3);
    }
}
