//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64, func: &'static str) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket {
            func,
            reason: format!("no sign change on [{a}, {b}] (f = {fa:e}, {fb:e})"),
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::Bracket {
        func,
        reason: "iteration cap reached".into(),
    })
}

/// Scan `[lo, hi]` on a uniform grid for the first sign change and refine it.
pub fn first_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize, func: &'static str) -> Result<f64> {
    let step = (hi - lo) / samples as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for k in 1..=samples {
        let x1 = lo + step * k as f64;
        let f1 = f(x1);
        if f0 == 0.0 {
            return Ok(x0);
        }
        if f0.signum() != f1.signum() {
            return brent(&f, x0, x1, 1e-15 * x1.abs().max(1e-300), func);
        }
        x0 = x1;
        f0 = f1;
    }
    Err(Error::Bracket {
        func,
        reason: format!("no sign change found on [{lo}, {hi}]"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15, "cube").unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn reports_missing_bracket() {
        assert!(matches!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, "t"), Err(Error::Bracket { .. })));
    }

    #[test]
    fn first_root_picks_smallest() {
        let r = first_root(|x: f64| x.sin(), 0.5, 10.0, 100, "sin").unwrap();
        assert!((r - std::f64::consts::PI).abs() < 1e-13);
    }
}
