//! Linearised quantization functions, decay rates and photon-path weights.
//!
//! Everything here is evaluated at `α = 0` and `κ = κ_eg`, where the mode
//! functions are elementary.  The overlap integrals
//!
//! ```text
//!   I_G^p = 2 ∫₀¹ G(κ, η)² η^p dη        I_F^p = ∫₁^{ξ_b} F(κ, ξ)² ξ^p dξ
//! ```
//!
//! reduce to sine and cosine integrals; adaptive quadrature of the same
//! integrands is kept as an independent cross-check.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CavityConfig;
use crate::modes::exact::{exact_f_alpha0, exact_g_alpha0};
use crate::numerics::quadrature::{integrate_pieces, QuadOptions, QuadResult};
use crate::numerics::roots::brent;
use crate::numerics::special::{cin, si_ci};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntegralKind {
    F,
    G,
}

/// `∫_a^b cos(2κ(w − c))/w dw` for `0 < a < b`.
fn shifted_cos_integral(kappa: f64, a: f64, b: f64, c: f64) -> f64 {
    let (si_a, ci_a) = si_ci(2.0 * kappa * a);
    let (si_b, ci_b) = si_ci(2.0 * kappa * b);
    let ph = 2.0 * kappa * c;
    ph.cos() * (ci_b - ci_a) + ph.sin() * (si_b - si_a)
}

/// Closed-form overlap integral `I^p` for `p ∈ {0, 2}`.
pub fn compute_i(p: u32, kind: IntegralKind, kappa: f64, xi_b: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::validation("kappa", format!("must be positive, got {kappa}")));
    }
    if p != 0 && p != 2 {
        return Err(Error::validation("p", format!("only 0 and 2 are supported, got {p}")));
    }
    let k = kappa;
    match kind {
        IntegralKind::G => {
            // 1/(u(2−u)) = (1/u + 1/(2−u))/2 with u = 1 − η
            let near = 0.5 * cin(2.0 * k);
            let far = 0.5 * 2f64.ln() - 0.5 * shifted_cos_integral(k, 1.0, 2.0, 2.0);
            let i0 = near + far;
            Ok(if p == 0 { i0 } else { i0 - 2.0 * sg(k) })
        }
        IntegralKind::F => {
            if !(xi_b > 1.0 && xi_b.is_finite()) {
                return Err(Error::validation("xi_b", format!("must exceed 1, got {xi_b}")));
            }
            let v = xi_b - 1.0;
            let i0 = 0.25 * (cin(2.0 * k * v) - ((2.0 + v) / 2.0).ln() + shifted_cos_integral(k, 2.0, 2.0 + v, 2.0));
            Ok(if p == 0 { i0 } else { i0 + sf(k, v) })
        }
    }
}

/// `∫₀¹ sin²(κu) du`.
fn sg(k: f64) -> f64 {
    0.5 - (2.0 * k).sin() / (4.0 * k)
}

/// `∫₀^V sin²(κv) dv`.
fn sf(k: f64, v: f64) -> f64 {
    0.5 * v - (2.0 * k * v).sin() / (4.0 * k)
}

/// Integrand of `I^p` in its natural coordinate.
pub fn overlap_integrand(p: u32, kind: IntegralKind, kappa: f64, x: f64) -> f64 {
    match kind {
        IntegralKind::G => {
            if x >= 1.0 {
                // regular limit at the focus: (κ/2)² · 2(1 − η)… → 0 for the squared function
                return 0.0;
            }
            2.0 * exact_g_alpha0(kappa, x).map(|g| g * g).unwrap_or(0.0) * x.powi(p as i32)
        }
        IntegralKind::F => {
            if x <= 1.0 {
                return 0.0;
            }
            exact_f_alpha0(kappa, x).map(|f| f * f).unwrap_or(0.0) * x.powi(p as i32)
        }
    }
}

/// The same integrals by adaptive Gauss–Kronrod quadrature, split at the
/// zeros of the integrand.
pub fn compute_i_quadrature(p: u32, kind: IntegralKind, kappa: f64, xi_b: f64) -> Result<QuadResult> {
    let (a, b) = match kind {
        IntegralKind::G => (0.0, 1.0),
        IntegralKind::F => (1.0, xi_b),
    };
    let n = ((b - a) * kappa / PI).ceil() as usize;
    let mut bp: Vec<f64> = (0..=n).map(|j| (a + j as f64 * PI / kappa).min(b)).collect();
    bp.dedup();
    if *bp.last().unwrap() < b {
        bp.push(b);
    }
    integrate_pieces(|x| overlap_integrand(p, kind, kappa, x), &bp, QuadOptions::with_tol(1e-13, 1e-13))
}

/// `V(η) = 1/(4κ²) − (η − 1)(η² − 1 − α/κ)/(1 + η)`.
pub fn semiclassical_potential(eta: f64, kappa: f64, alpha: f64) -> f64 {
    1.0 / (4.0 * kappa * kappa) - (eta - 1.0) * (eta * eta - 1.0 - alpha / kappa) / (1.0 + eta)
}

/// Turning point of `V` in `[0, 1]`.
pub fn turning_point(kappa: f64, alpha: f64) -> Result<f64> {
    let v = |e: f64| semiclassical_potential(e, kappa, alpha);
    if !(v(0.0) < 0.0 && v(1.0) > 0.0) {
        return Err(Error::Bracket {
            func: "turning_point",
            reason: format!("V has no sign change on [0, 1] for kappa = {kappa}, alpha = {alpha}"),
        });
    }
    brent(v, 0.0, 1.0, 1e-15, "turning_point")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dn1Dalpha {
    /// `I_G^0/(π√(1 − 1/(4κ²)))`, the value used downstream.
    pub approx: f64,
    /// `(1/π)∫₀^{η_turn} dη/((1 + η)√−V)`.
    pub turning_integral: f64,
}

/// Both forms of `∂n₁/∂α` at `α = 0`.
pub fn dn1_dalpha(kappa: f64) -> Result<Dn1Dalpha> {
    if !(kappa > 0.5) {
        return Err(Error::domain("dn1_dalpha", format!("kappa = {kappa} must exceed 1/2")));
    }
    let ig0 = compute_i(0, IntegralKind::G, kappa, 2.0)?;
    let approx = ig0 / (PI * (1.0 - 0.25 / (kappa * kappa)).sqrt());
    // −V = (1 − η)² − w_t² with w_t = 1/(2κ); 1 − η = w_t cosh θ turns the
    // integral into ∫ dθ/(2 − w_t cosh θ) over [0, arccosh(2κ)]
    let wt = 0.5 / kappa;
    let th_max = (2.0 * kappa).acosh();
    let r = integrate_pieces(
        |th: f64| 1.0 / (2.0 - wt * th.cosh()),
        &[0.0, 0.5 * th_max, th_max],
        QuadOptions::with_tol(1e-13, 1e-13),
    )?;
    Ok(Dn1Dalpha { approx, turning_integral: r.value / PI })
}

/// `W(x) = 3(x coth x − 1)/sinh²x`.
pub fn w(x: f64) -> f64 {
    let x = x.abs();
    if x < 0.05 {
        let y = x * x;
        1.0 + y * (-2.0 / 5.0 + y * (2.0 / 21.0 - y * 4.0 / 225.0))
    } else {
        // sinh²x = e^{2x}(1 − e^{−2x})²/4, stable for all x > 0
        let e = (-2.0 * x).exp();
        let coth = (1.0 + e) / (1.0 - e);
        12.0 * (x * coth - 1.0) * e / ((1.0 - e) * (1.0 - e))
    }
}

/// Location and value of the maximum of `|W|`, found by sampling and
/// golden-section refinement.
pub fn w_sup() -> (f64, f64) {
    let (mut best_x, mut best) = (0.0, w(0.0).abs());
    for i in 1..=20_000 {
        let x = i as f64 * 0.005;
        if w(x).abs() > best {
            best = w(x).abs();
            best_x = x;
        }
    }
    let (mut a, mut b) = ((best_x - 0.005f64).max(0.0), best_x + 0.005);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if w(c).abs() >= w(d).abs() {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    if w(x).abs() > best {
        (x, w(x).abs())
    } else {
        (best_x, best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizationData {
    pub kappa_eg: f64,
    pub f_over_d: f64,
    pub i_f0: f64,
    pub i_f2: f64,
    pub i_g0: f64,
    pub i_g2: f64,
    pub dn1_dalpha: f64,
    pub dn1_dalpha_turning: f64,
    pub dn2_dalpha: f64,
    /// `Γ/Γ_free` from the semiclassical normalisation.
    pub gamma_ratio: f64,
}

impl QuantizationData {
    pub fn new(kappa_eg: f64, f_over_d: f64) -> Result<Self> {
        if !(f_over_d > 0.0 && f_over_d.is_finite()) {
            return Err(Error::validation("f_over_d", format!("must be positive, got {f_over_d}")));
        }
        let xi_b = 1.0 + 2.0 * f_over_d;
        let i_f0 = compute_i(0, IntegralKind::F, kappa_eg, xi_b)?;
        let i_f2 = compute_i(2, IntegralKind::F, kappa_eg, xi_b)?;
        let i_g0 = compute_i(0, IntegralKind::G, kappa_eg, xi_b)?;
        let i_g2 = compute_i(2, IntegralKind::G, kappa_eg, xi_b)?;
        let dn1 = dn1_dalpha(kappa_eg)?;
        // I_F²I_G⁰ − I_F⁰I_G² = S_F I_G⁰ + 2 S_G I_F⁰, free of cancellation
        let det = sf(kappa_eg, xi_b - 1.0) * i_g0 + 2.0 * sg(kappa_eg) * i_f0;
        let root = (1.0 - 0.25 / (kappa_eg * kappa_eg)).sqrt();
        let gamma_ratio = (i_f0 + i_g0 * f_over_d / root) / det;
        let qd = Self {
            kappa_eg,
            f_over_d,
            i_f0,
            i_f2,
            i_g0,
            i_g2,
            dn1_dalpha: dn1.approx,
            dn1_dalpha_turning: dn1.turning_integral,
            dn2_dalpha: -i_f0 / PI,
            gamma_ratio,
        };
        if !(i_f0 > 0.0 && i_f2 > 0.0 && i_g0 > 0.0 && i_g2 > 0.0 && det > 0.0) {
            return Err(Error::Conditioning(format!("overlap integrals lost positivity: {qd:?}")));
        }
        Ok(qd)
    }

    pub fn from_config(cfg: &CavityConfig) -> Result<Self> {
        Self::new(cfg.kappa_eg, cfg.f_over_d())
    }

    /// `I_F²I_G⁰ − I_F⁰I_G²`.
    pub fn normalization_determinant(&self) -> f64 {
        self.i_f2 * self.i_g0 - self.i_f0 * self.i_g2
    }

    /// `s_α(N₁, N₂)` with `two_n1 = 2N₁`.
    pub fn s_alpha(&self, two_n1: u32, n2: u32) -> f64 {
        let root = (1.0 - 0.25 / (self.kappa_eg * self.kappa_eg)).sqrt();
        0.5 * two_n1 as f64 * 4.0 * self.i_g0 / root - 4.0 * n2 as f64 * self.i_f0
    }
}

/// `n₁(α, κ) = 2κ/π + ∂_α n₁ · α`.
pub fn quantization_n1(alpha: f64, kappa: f64, qd: &QuantizationData) -> f64 {
    2.0 * kappa / PI + qd.dn1_dalpha * alpha
}

/// `n₂(α, κ) = 2κf/(πd) + 1/2 + ∂_α n₂ · α`.
pub fn quantization_n2(alpha: f64, kappa: f64, f_over_d: f64, qd: &QuantizationData) -> f64 {
    2.0 * kappa * f_over_d / PI + 0.5 + qd.dn2_dalpha * alpha
}

/// `(Γ_semiclassical, Γ_free)` for a given free-space rate.
pub fn gamma_rates(qd: &QuantizationData, gamma_free: f64) -> (f64, f64) {
    (qd.gamma_ratio * gamma_free, gamma_free)
}

/// Signed path weight `A_{N₁,N₂} = Γ(−1)^{N₂} W(s_α)`.  Even `two_n1`
/// are returns to the emitting atom, odd ones are transfers.
pub fn path_weight(two_n1: u32, n2: u32, gamma: f64, qd: &QuantizationData) -> Result<f64> {
    if two_n1 == 0 && n2 == 0 {
        return Err(Error::Index {
            n1: 0.0,
            n2: 0,
            reason: "the direct term is not a photon path".into(),
        });
    }
    let sign = if n2 % 2 == 0 { 1.0 } else { -1.0 };
    Ok(gamma * sign * w(qd.s_alpha(two_n1, n2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathWeight {
    pub two_n1: u32,
    pub n2: u32,
    pub s_alpha: f64,
    /// `A/Γ`, including the sign `(−1)^{N₂}`.
    pub weight_over_gamma: f64,
    /// Delay in units of τ.
    pub delay: f64,
}

impl PathWeight {
    pub fn n1(&self) -> f64 {
        0.5 * self.two_n1 as f64
    }

    /// True for hops that end on the other atom.
    pub fn is_transfer(&self) -> bool {
        self.two_n1 % 2 == 1
    }
}

/// All hops with delay up to a cutoff whose weight reaches a floor.
///
/// The same table serves both atoms: the weights are symmetric under
/// exchanging the emitter, so `1→1` equals `2→2` and `1→2` equals `2→1`.
#[derive(Debug, Clone, Serialize)]
pub struct PathWeightTable {
    pub entries: Vec<PathWeight>,
    pub delay_cutoff: f64,
    /// Floor on `|A|/Γ`.
    pub weight_floor: f64,
    /// `Σ |A|/Γ` over hops inside the delay cutoff that fell below the floor.
    pub dropped_weight: f64,
    pub min_delay: f64,
}

/// Largest `|s|` with `W(s) ≥ floor` (`W` is even and decreasing in `|s|`).
pub fn w_inverse(floor: f64) -> f64 {
    if floor <= 0.0 {
        return f64::INFINITY;
    }
    if floor >= 1.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while w(hi) >= floor {
        hi *= 2.0;
    }
    brent(|x| w(x) - floor, 0.0, hi, 1e-14 * hi, "w_inverse").unwrap_or(hi)
}

/// Every hop with `τ(N₁, N₂) ≤ delay_cutoff` (in units of τ) and
/// `|A|/Γ ≥ weight_floor`.
///
/// `s_α` is increasing in `N₁` at fixed `N₂` and `|W|` decreases with
/// `|s_α|`, so each `N₂` contributes one contiguous window of `N₁`; the
/// hops just outside the window are summed into `dropped_weight` until
/// their contribution is negligible.
pub fn build_weight_table(cfg: &CavityConfig, qd: &QuantizationData, delay_cutoff: f64, weight_floor: f64) -> Result<PathWeightTable> {
    if !(delay_cutoff > 0.0 && delay_cutoff.is_finite()) {
        return Err(Error::validation("delay_cutoff", format!("must be positive, got {delay_cutoff}")));
    }
    if !(weight_floor >= 0.0 && weight_floor.is_finite()) {
        return Err(Error::validation("weight_floor", format!("must be non-negative, got {weight_floor}")));
    }
    let d1 = cfg.delay_per_n1();
    let d2 = cfg.delay_per_n2();
    let slack = 1e-12 * delay_cutoff.max(1.0);
    let max_n2 = ((delay_cutoff + slack) / d2).floor() as u32;
    let s_max = w_inverse(weight_floor);
    // s = two_n1 · slope − n2 · offset
    let slope = qd.s_alpha(1, 0);
    let offset = -qd.s_alpha(0, 1);
    let mut entries = Vec::new();
    let mut dropped = 0.0;
    for n2 in 0..=max_n2 {
        let rest = delay_cutoff - n2 as f64 * d2;
        let top = (2.0 * (rest + slack) / d1).floor().max(0.0) as u32;
        let centre = n2 as f64 * offset / slope;
        let (lo, hi) = if s_max.is_finite() {
            let lo = (centre - s_max / slope).ceil().max(0.0);
            let hi = (centre + s_max / slope).floor().min(top as f64);
            (lo as i64, hi as i64)
        } else {
            (0, top as i64)
        };
        let mut push = |two_n1: u32| -> Result<()> {
            if two_n1 == 0 && n2 == 0 {
                return Ok(());
            }
            let delay = cfg.delay(two_n1, n2);
            if delay > delay_cutoff + slack {
                return Ok(());
            }
            let a = path_weight(two_n1, n2, 1.0, qd)?;
            if a.abs() >= weight_floor {
                entries.push(PathWeight {
                    two_n1,
                    n2,
                    s_alpha: qd.s_alpha(two_n1, n2),
                    weight_over_gamma: a,
                    delay,
                });
            } else {
                dropped += a.abs();
            }
            Ok(())
        };
        // one extra index on each side guards against rounding of the window edges
        let first = (lo - 1).max(0);
        let last = (hi + 1).min(top as i64);
        for two_n1 in first..=last {
            push(two_n1 as u32)?;
        }
        // outside the window: geometric decay, summed until negligible
        if s_max.is_finite() {
            for (start, step) in [(first - 1, -1i64), (last + 1, 1i64)] {
                let mut j = start;
                while j >= 0 && j <= top as i64 {
                    let a = w(qd.s_alpha(j as u32, n2));
                    if !(j == 0 && n2 == 0) {
                        dropped += a;
                    }
                    if a < 1e-6 * weight_floor.max(f64::MIN_POSITIVE) * f64::EPSILON {
                        break;
                    }
                    j += step;
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::Config(format!(
            "no photon path within delay {delay_cutoff} has |A|/Γ >= {weight_floor}"
        )));
    }
    entries.sort_by(|a, b| a.delay.total_cmp(&b.delay).then(a.two_n1.cmp(&b.two_n1)).then(a.n2.cmp(&b.n2)));
    let min_delay = entries[0].delay;
    Ok(PathWeightTable {
        entries,
        delay_cutoff,
        weight_floor,
        dropped_weight: dropped,
        min_delay,
    })
}

impl PathWeightTable {
    pub fn get(&self, two_n1: u32, n2: u32) -> Option<&PathWeight> {
        self.entries.iter().find(|e| e.two_n1 == two_n1 && e.n2 == n2)
    }

    /// CSV with columns `N1,N2,s_alpha,weight_over_gamma,delay_over_tau`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "N1,N2,s_alpha,weight_over_gamma,delay_over_tau")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e}",
                e.n1(),
                e.n2,
                e.s_alpha,
                e.weight_over_gamma,
                e.delay
            )?;
        }
        Ok(())
    }
}
