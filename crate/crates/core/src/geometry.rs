//! Dimensionless cavity parameters and prolate-ellipsoidal coordinates.
//!
//! Lengths are measured in units of the focal distance `d` (or `d/2` where
//! noted) and times in units of the focus-to-focus travel time
//! `τ = (2f + d)/c₀`.  With this choice the whole problem depends only on
//! the eccentricity `ε = d/(d + 2f)`, the resonant wavenumber
//! `κ_eg = ω_eg d/(2c₀)`, the product `Γτ` and two optical phases.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    pub eccentricity: f64,
    pub kappa_eg: f64,
    pub gamma_tau: f64,
    /// `ω_eg d / c₀` reduced to `[0, 2π)`.
    pub phase_d: f64,
    /// `2 ω_eg f / c₀` reduced to `[0, 2π)`.
    pub phase_f: f64,
}

impl CavityConfig {
    pub fn new(eccentricity: f64, kappa_eg: f64, gamma_tau: f64, phase_d: f64, phase_f: f64) -> Result<Self> {
        if !(eccentricity > 0.0 && eccentricity < 1.0) {
            return Err(Error::validation("eccentricity", format!("must lie in (0, 1), got {eccentricity}")));
        }
        if !(kappa_eg > 0.0 && kappa_eg.is_finite()) {
            return Err(Error::validation("kappa_eg", format!("must be positive and finite, got {kappa_eg}")));
        }
        if !(gamma_tau > 0.0 && gamma_tau.is_finite()) {
            return Err(Error::validation("gamma_tau", format!("must be positive and finite, got {gamma_tau}")));
        }
        if !phase_d.is_finite() {
            return Err(Error::validation("phase_d", "must be finite"));
        }
        if !phase_f.is_finite() {
            return Err(Error::validation("phase_f", "must be finite"));
        }
        Ok(Self {
            eccentricity,
            kappa_eg,
            gamma_tau,
            phase_d: reduce_phase(phase_d),
            phase_f: reduce_phase(phase_f),
        })
    }

    /// `f/d = (1 − ε)/(2ε)`.
    pub fn f_over_d(&self) -> f64 {
        (1.0 - self.eccentricity) / (2.0 * self.eccentricity)
    }

    /// Boundary coordinate `ξ_b = 2f/d + 1 = 1/ε`.
    pub fn xi_boundary(&self) -> f64 {
        1.0 / self.eccentricity
    }

    pub fn d_over_lambda(&self) -> f64 {
        self.kappa_eg / PI
    }

    pub fn f_over_lambda(&self) -> f64 {
        self.f_over_d() * self.d_over_lambda()
    }

    /// `2d/c₀` in units of τ.
    pub fn delay_per_n1(&self) -> f64 {
        2.0 * self.eccentricity
    }

    /// `2f/c₀` in units of τ.
    pub fn delay_per_n2(&self) -> f64 {
        1.0 - self.eccentricity
    }

    /// Delay of a hop with doubled index `two_n1 = 2N₁`, in units of τ.
    pub fn delay(&self, two_n1: u32, n2: u32) -> f64 {
        0.5 * two_n1 as f64 * self.delay_per_n1() + n2 as f64 * self.delay_per_n2()
    }

    /// Optical phase `ω_eg τ(N₁, N₂)` modulo 2π.
    pub fn hop_phase(&self, two_n1: u32, n2: u32) -> f64 {
        reduce_phase(two_n1 as f64 * self.phase_d + n2 as f64 * self.phase_f)
    }

    /// Semi-axes `(a, b)` of the mirror in units of `d`: `a` along the
    /// symmetry axis, `b` transverse.
    pub fn semi_axes(&self) -> (f64, f64) {
        let xb = self.xi_boundary();
        (0.5 * xb, 0.5 * (xb * xb - 1.0).sqrt())
    }
}

pub fn reduce_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prolate {
    pub phi: f64,
    pub eta: f64,
    pub xi: f64,
}

/// Prolate-ellipsoidal `(φ, η, ξ)` to Cartesian, foci at `z = ±d/2`.
pub fn prolate_to_cartesian(p: Prolate, d: f64) -> Result<[f64; 3]> {
    if !(0.0..TAU).contains(&p.phi) {
        return Err(Error::validation("phi", format!("must lie in [0, 2π), got {}", p.phi)));
    }
    if !(-1.0..=1.0).contains(&p.eta) {
        return Err(Error::validation("eta", format!("must lie in [-1, 1], got {}", p.eta)));
    }
    if !(p.xi >= 1.0) {
        return Err(Error::validation("xi", format!("must be >= 1, got {}", p.xi)));
    }
    if !(d > 0.0) {
        return Err(Error::validation("d", format!("must be positive, got {d}")));
    }
    let rho = ((1.0 - p.eta * p.eta) * (p.xi * p.xi - 1.0)).sqrt();
    let h = 0.5 * d;
    Ok([h * p.phi.cos() * rho, h * p.phi.sin() * rho, h * p.eta * p.xi])
}

/// Inverse of [`prolate_to_cartesian`]; `φ = 0` on the symmetry axis and
/// the centre maps to `η = 0, ξ = 1`.
pub fn cartesian_to_prolate(x: f64, y: f64, z: f64, d: f64) -> Result<Prolate> {
    if !(d > 0.0) {
        return Err(Error::validation("d", format!("must be positive, got {d}")));
    }
    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::validation("point", "coordinates must be finite"));
    }
    let h = 0.5 * d;
    let rho = x.hypot(y);
    let phi = if rho == 0.0 { 0.0 } else { reduce_phase(y.atan2(x)) };
    // Distances to the two foci give ξ = (r₊ + r₋)/d and η = (r₋ − r₊)/d.
    let r_plus = rho.hypot(z - h);
    let r_minus = rho.hypot(z + h);
    let xi = ((r_plus + r_minus) / d).max(1.0);
    // Recover η from z = h η ξ when it is well conditioned; near the axis
    // between the foci fall back to the focal-distance form.
    let eta = if xi > 1.0 + 1e-8 {
        (z / (h * xi)).clamp(-1.0, 1.0)
    } else {
        ((r_minus - r_plus) / d).clamp(-1.0, 1.0)
    };
    Ok(Prolate { phi, eta, xi })
}
