//! Kummer's confluent hypergeometric function `₁F₁(a; b; z)` for complex
//! arguments.
//!
//! Three evaluation routes, tried in order:
//! 1. the defining power series (compensated summation), accepted when the
//!    rounding estimate `ε·Σ|tₖ| / |Σ tₖ|` stays below the target;
//! 2. the large-`|z|` asymptotic expansion (both exponential branches),
//!    accepted when its smallest term is below the target;
//! 3. analytic continuation by integrating Kummer's equation along the ray
//!    from a point where the series is accurate.
//!
//! Route 3 covers the band `10 ≲ |z| ≲ 35` on the imaginary axis, where the
//! series loses too many digits to cancellation and the asymptotic series
//! has not yet converged far enough.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::ode::{self, OdeOptions};
use crate::numerics::special::gamma_c;

/// Relative accuracy requested from each route.
const TARGET: f64 = 1e-12;
/// Largest `|z|` for which the power series is attempted.
const TAYLOR_MAX: f64 = 30.0;
const SERIES_CAP: usize = 2_000;

/// Which route produced a value, for diagnostics and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KummerRoute {
    Series,
    Asymptotic,
    Continuation,
}

/// `₁F₁(a; b; z)`.
pub fn kummer_1f1(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    kummer_1f1_traced(a, b, z).map(|(v, _)| v)
}

/// `d/dz ₁F₁(a; b; z) = (a/b) ₁F₁(a+1; b+1; z)`.
pub fn kummer_1f1_deriv(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    Ok(a / b * kummer_1f1(a + 1.0, b + 1.0, z)?)
}

pub fn kummer_1f1_traced(a: Complex64, b: Complex64, z: Complex64) -> Result<(Complex64, KummerRoute)> {
    if b.im == 0.0 && b.re <= 0.0 && b.re.fract() == 0.0 {
        return Err(Error::domain("kummer_1f1", format!("b = {b} is a non-positive integer")));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok((Complex64::new(1.0, 0.0), KummerRoute::Series));
    }
    if z.norm() <= TAYLOR_MAX {
        if let Some((v, rel)) = series(a, b, z) {
            if rel <= TARGET {
                return Ok((v, KummerRoute::Series));
            }
        }
    }
    if let Some((v, rel)) = asymptotic(a, b, z) {
        if rel <= TARGET {
            return Ok((v, KummerRoute::Asymptotic));
        }
    }
    continuation(a, b, z).map(|v| (v, KummerRoute::Continuation))
}

/// Returns the series value and its relative rounding estimate.
fn series(a: Complex64, b: Complex64, z: Complex64) -> Option<(Complex64, f64)> {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut abs_sum = 1.0;
    for k in 0..SERIES_CAP {
        let kf = k as f64;
        term *= (a + kf) / ((b + kf) * (kf + 1.0)) * z;
        // Kahan–Babuška on each component
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        abs_sum += term.norm();
        if term.norm() <= 1e-17 * sum.norm() && kf > z.norm() {
            let rel = 4.0 * f64::EPSILON * abs_sum / sum.norm();
            return Some((sum, rel));
        }
        if term == Complex64::new(0.0, 0.0) {
            // a is a non-positive integer: polynomial
            let rel = 4.0 * f64::EPSILON * abs_sum / sum.norm();
            return Some((sum, rel));
        }
    }
    None
}

/// Sum one asymptotic series `Σ (p)_s (q)_s / s! · w^{-s}`; returns the sum and
/// the magnitude of the first omitted (smallest) term.
fn asymptotic_series(p: Complex64, q: Complex64, w: Complex64) -> (Complex64, f64) {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for s in 0..500 {
        let sf = s as f64;
        let next = term * (p + sf) * (q + sf) / ((sf + 1.0) * w);
        let mag = next.norm();
        if mag == 0.0 {
            return (sum, 0.0);
        }
        if mag >= prev {
            return (sum, prev);
        }
        if mag <= 1e-17 * sum.norm() {
            return (sum + next, mag);
        }
        sum += next;
        prev = mag;
        term = next;
    }
    (sum, prev)
}

/// Both-branch large-|z| expansion (normalised `M` times `Γ(b)`).
fn asymptotic(a: Complex64, b: Complex64, z: Complex64) -> Option<(Complex64, f64)> {
    if z.norm() < 8.0 {
        return None;
    }
    let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };
    let i = Complex64::new(0.0, 1.0);
    let gb = gamma_c(b);
    let (s1, e1) = asymptotic_series(a, a - b + 1.0, -z);
    let (s2, e2) = asymptotic_series(b - a, 1.0 - a, z);
    // 1/Γ vanishes at the poles; gamma_c returns ±inf there
    let inv_g_bma = recip_gamma(b - a);
    let inv_g_a = recip_gamma(a);
    let pre1 = (i * PI * a * sign).exp() * z.powc(-a) * inv_g_bma;
    let pre2 = z.exp() * z.powc(a - b) * inv_g_a;
    let value = gb * (pre1 * s1 + pre2 * s2);
    let err = gb.norm() * (pre1.norm() * e1 + pre2.norm() * e2);
    if !value.is_finite() || value.norm() == 0.0 {
        return None;
    }
    Some((value, err / value.norm()))
}

fn recip_gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        gamma_c(z).inv()
    }
}

/// Integrate `z w'' + (b − z) w' − a w = 0` along the ray `z = s·u`.
fn continuation(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    // Kummer's transformation keeps the integration on the growing branch.
    if z.re < 0.0 {
        let w = continuation(b - a, b, -z)?;
        return Ok(z.exp() * w);
    }
    let r = z.norm();
    let u = z / r;
    let mut r0 = r.min(6.0);
    let (w0, dw0) = loop {
        let z0 = u * r0;
        let w0 = series(a, b, z0);
        let dw0 = series(a + 1.0, b + 1.0, z0);
        match (w0, dw0) {
            (Some((w, e1)), Some((dw, e2))) if e1 < 1e-14 && e2 < 1e-14 => break (w, a / b * dw),
            _ if r0 > 0.5 => r0 *= 0.5,
            _ => {
                return Err(Error::Accuracy {
                    routine: "kummer_1f1",
                    reason: "no accurate starting point for continuation".into(),
                    estimate: f64::NAN,
                })
            }
        }
    };
    if r0 == r {
        return Ok(w0);
    }
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
        let zs = u * s;
        let w = Complex64::new(y[0], y[1]);
        let wp = Complex64::new(y[2], y[3]);
        let wpp = ((zs - b) * wp + a * w) / zs;
        let dw = u * wp;
        let dwp = u * wpp;
        dy[0] = dw.re;
        dy[1] = dw.im;
        dy[2] = dwp.re;
        dy[3] = dwp.im;
    };
    let opts = OdeOptions {
        rtol: 1e-14,
        atol: 1e-300,
        initial_step: 1e-3,
        max_steps: 2_000_000,
    };
    let out = ode::integrate(rhs, r0, &[w0.re, w0.im, dw0.re, dw0.im], &[r], opts)?;
    let y = &out[0];
    Ok(Complex64::new(y[0], y[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn zero_argument() {
        assert_eq!(kummer_1f1(c(0.3, -1.0), c(2.0, 0.0), c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn rejects_pole_in_b() {
        assert!(kummer_1f1(c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn elementary_case_all_routes() {
        // ₁F₁(1; 2; z) = (e^z − 1)/z
        for &y in &[0.5, 3.0, 12.0, 20.0, 29.0, 45.0, 200.0, 1e4] {
            let z = c(0.0, y);
            let exact = (z.exp() - 1.0) / z;
            let got = kummer_1f1(c(1.0, 0.0), c(2.0, 0.0), z).unwrap();
            assert!(rel(got, exact) < 1e-11, "y={y}: {got} vs {exact}");
        }
        let z = c(3.0, -4.0);
        let got = kummer_1f1(c(1.0, 0.0), c(2.0, 0.0), z).unwrap();
        assert!(rel(got, (z.exp() - 1.0) / z) < 1e-13);
    }

    #[test]
    fn kummer_transformation_identity() {
        // M(a,b,z) = e^z M(b−a,b,−z)
        let a = c(1.0, -0.3);
        let b = c(2.0, 0.0);
        for &y in &[5.0, 18.0, 33.0, 60.0] {
            let z = c(0.0, y);
            let lhs = kummer_1f1(a, b, z).unwrap();
            let rhs = z.exp() * kummer_1f1(b - a, b, -z).unwrap();
            assert!(rel(lhs, rhs) < 1e-10, "y={y}");
        }
    }

    #[test]
    fn routes_agree_at_their_seams() {
        let a = c(1.0, -0.25);
        let b = c(2.0, 0.0);
        let z = c(0.0, 9.0);
        let s = series(a, b, z).unwrap().0;
        let k = continuation(a, b, z).unwrap();
        assert!(rel(s, k) < 1e-11);
        let z = c(0.0, 40.0);
        let (asy, e) = asymptotic(a, b, z).unwrap();
        assert!(e < 1e-12);
        let k = continuation(a, b, z).unwrap();
        assert!(rel(asy, k) < 1e-10, "{asy} vs {k}");
    }

    #[test]
    fn contiguous_relation() {
        // b(b−1)M(a,b−1,z) + b(1−b−z)M(a,b,z) + z(b−a)M(a,b+1,z) = 0
        let a = c(1.0, -0.4);
        for &y in &[2.0, 15.0, 28.0, 70.0] {
            let z = c(0.0, y);
            let b = c(3.0, 0.0);
            let m0 = kummer_1f1(a, b - 1.0, z).unwrap();
            let m1 = kummer_1f1(a, b, z).unwrap();
            let m2 = kummer_1f1(a, b + 1.0, z).unwrap();
            let lhs = b * (b - 1.0) * m0 + b * (1.0 - b - z) * m1 + z * (b - a) * m2;
            let scale = (b * (b - 1.0) * m0).norm() + (b * (1.0 - b - z) * m1).norm();
            assert!(lhs.norm() < 1e-10 * scale, "y={y}: {}", lhs.norm() / scale);
        }
    }
}
