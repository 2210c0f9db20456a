//! Closed-form mode functions for vanishing separation constant.

use crate::error::{Error, Result};

/// `sin(κ t)/t` without loss of precision as `t → 0`.
fn sinc_scaled(kappa: f64, t: f64) -> f64 {
    let z = kappa * t;
    if z.abs() < 1e-4 {
        let z2 = z * z;
        kappa * (1.0 - z2 / 6.0 + z2 * z2 / 120.0)
    } else {
        z.sin() / t
    }
}

/// `G(κ, η) = sin[κ(1 − η)] / √(1 − η²)` for `η ∈ (−1, 1)`.
pub fn exact_g_alpha0(kappa: f64, eta: f64) -> Result<f64> {
    if !(eta > -1.0 && eta < 1.0) {
        return Err(Error::domain("exact_g_alpha0", format!("eta = {eta} outside (-1, 1)")));
    }
    let t = 1.0 - eta;
    Ok((kappa * t).sin() / (t * (1.0 + eta)).sqrt())
}

/// `F(κ, ξ) = sin[κ(ξ − 1)] / √(ξ² − 1)` for `ξ > 1`.
pub fn exact_f_alpha0(kappa: f64, xi: f64) -> Result<f64> {
    if !(xi > 1.0) {
        return Err(Error::domain("exact_f_alpha0", format!("xi = {xi} must exceed 1")));
    }
    let t = xi - 1.0;
    Ok((kappa * t).sin() / (t * (xi + 1.0)).sqrt())
}

/// `G/√(1 − η²)`, regular at `η = 1` where it equals `κ/2`.
pub fn reduced_g_alpha0(kappa: f64, eta: f64) -> Result<f64> {
    if !(eta > -1.0 && eta <= 1.0) {
        return Err(Error::domain("reduced_g_alpha0", format!("eta = {eta} outside (-1, 1]")));
    }
    let t = 1.0 - eta;
    Ok(sinc_scaled(kappa, t) / (1.0 + eta))
}

/// `F/√(ξ² − 1)`, regular at `ξ = 1` where it equals `κ/2`.
pub fn reduced_f_alpha0(kappa: f64, xi: f64) -> Result<f64> {
    if !(xi >= 1.0) {
        return Err(Error::domain("reduced_f_alpha0", format!("xi = {xi} below 1")));
    }
    let t = xi - 1.0;
    Ok(sinc_scaled(kappa, t) / (xi + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn centre_value() {
        for k in [0.3, PI, 17.0] {
            assert!((exact_g_alpha0(k, 0.0).unwrap() - k.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn focal_limits() {
        for k in [PI, 2.5, 50.0] {
            assert!((reduced_g_alpha0(k, 1.0).unwrap() - k / 2.0).abs() < 1e-14);
            assert!((reduced_f_alpha0(k, 1.0).unwrap() - k / 2.0).abs() < 1e-14);
            // approach from inside matches the limit
            let eta = 1.0 - 1e-7;
            let g = exact_g_alpha0(k, eta).unwrap() / ((1.0 - eta) * (1.0 + eta)).sqrt();
            assert!((g - k / 2.0).abs() < 1e-5 * k);
        }
    }

    #[test]
    fn near_antipodal_focus_is_finite() {
        let v = exact_g_alpha0(2.0 * PI, -1.0 + 1e-8).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn radial_zero_and_domain() {
        let k = 7.0;
        let xi = 1.0 + PI / k;
        assert!(exact_f_alpha0(k, xi).unwrap().abs() < 1e-15);
        assert!(exact_f_alpha0(k, 1.0).is_err());
        assert!(exact_g_alpha0(k, 1.0).is_err());
        assert!(exact_g_alpha0(k, -1.0).is_err());
    }

    #[test]
    fn asymptotic_envelope() {
        // ξF → cos[κξ − (n+1)π/2] with κ = nπ/2 + κ... use κ = 10π: sin(κξ − κ) = sin(κξ) = cos(κξ − π/2)
        let k = 10.0 * PI;
        for xi in [200.0, 500.3, 1000.7] {
            let lhs = xi * exact_f_alpha0(k, xi).unwrap();
            let rhs = (k * xi - PI / 2.0).cos();
            assert!((lhs - rhs).abs() < 1e-4, "xi={xi}");
        }
    }
}
