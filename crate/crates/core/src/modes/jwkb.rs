//! Uniform semiclassical approximation of the radial mode function.
//!
//! With `x = √(ξ² − 1)` the regular solution `f(x) = x F` is brought to the
//! canonical form `u'' + χ(x) u = 0` and mapped onto the comparison
//! equation `ũ'' + Π(σ) ũ = 0`, whose regular solution is a Kummer
//! function.  The map `σ(x)` is fixed by equal phase integrals measured
//! from the first turning points `x₀` (zero of χ) and `σ₀` (zero of Π):
//!
//! ```text
//!   ∫_{σ₀}^{σ} √Π  = ∫_{x₀}^{x} √χ        (x ≥ x₀)
//!   ∫_{σ}^{σ₀} √−Π = ∫_{x}^{x₀} √−χ       (x ≤ x₀)
//! ```
//!
//! which integrates `dσ/dx = √(χ/Π)` exactly without stepping through the
//! removable singularity at the turning point.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::kummer::{kummer_1f1, kummer_1f1_deriv};
use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, QuadOptions};
use crate::numerics::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpheroidalParams {
    pub kappa: f64,
    pub alpha: f64,
}

impl SpheroidalParams {
    pub fn new(kappa: f64, alpha: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::validation("kappa", format!("must be positive, got {kappa}")));
        }
        if !alpha.is_finite() {
            return Err(Error::validation("alpha", "must be finite"));
        }
        Ok(Self { kappa, alpha })
    }
}

/// Canonical-form potential of the radial equation.
pub fn chi(x: f64, p: SpheroidalParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("chi", format!("pole at x = {x}")));
    }
    let SpheroidalParams { kappa: k, alpha: a } = p;
    let x2 = x * x;
    let num = 2.0 * x2 * (2.0 * k * (x2 + 1.0) * (k * x2 - a) - 3.0) - 3.0;
    let den = 4.0 * (x * (x2 + 1.0)).powi(2);
    Ok(num / den)
}

/// Comparison potential `Π(σ) = κ²σ² − ακ − 3/(4σ²)`.
pub fn pi_cmp(sigma: f64, p: SpheroidalParams) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain("pi_cmp", format!("pole at sigma = {sigma}")));
    }
    let SpheroidalParams { kappa: k, alpha: a } = p;
    Ok(k * k * sigma * sigma - a * k - 0.75 / (sigma * sigma))
}

fn chi_prime(x: f64, p: SpheroidalParams) -> f64 {
    // d/dx of num/den, computed by a centred difference on the rational
    // form; only used for the turning-point limit of dσ/dx.
    let h = 1e-6 * x;
    (chi(x + h, p).unwrap() - chi(x - h, p).unwrap()) / (2.0 * h)
}

fn pi_prime(sigma: f64, p: SpheroidalParams) -> f64 {
    2.0 * p.kappa * p.kappa * sigma + 1.5 / sigma.powi(3)
}

/// First positive zero of Π, in closed form.
pub fn sigma_turning(p: SpheroidalParams) -> f64 {
    let SpheroidalParams { kappa: k, alpha: a } = p;
    let s = (a * k + (a * a * k * k + 3.0 * k * k).sqrt()) / (2.0 * k * k);
    s.sqrt()
}

/// First positive zero of χ.  In `s = x²` the numerator is the cubic
/// `4κ²s³ + 4κ(κ − α)s² − (4κα + 6)s − 3`, which has exactly one positive root.
pub fn x_turning(p: SpheroidalParams) -> Result<f64> {
    let SpheroidalParams { kappa: k, alpha: a } = p;
    let cubic = |s: f64| ((4.0 * k * k * s + 4.0 * k * (k - a)) * s - (4.0 * k * a + 6.0)) * s - 3.0;
    let mut hi = sigma_turning(p).powi(2).max(1e-12);
    let mut tries = 0;
    while cubic(hi) <= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Bracket {
                func: "x_turning",
                reason: "cubic never became positive".into(),
            });
        }
    }
    let s = brent(cubic, 0.0, hi, 1e-17 * hi, "x_turning")?;
    Ok(s.sqrt())
}

/// Antiderivatives of `√|R(s)|/s` with `R(s) = κ²s² − ακs − 3/4`, `s = σ²`.
struct ComparisonAction {
    a: f64,
    b: f64,
    c: f64,
    disc: f64,
    s0: f64,
}

impl ComparisonAction {
    fn new(p: SpheroidalParams) -> Self {
        let a = p.kappa * p.kappa;
        let b = -p.alpha * p.kappa;
        let c = -0.75;
        let disc = b * b - 4.0 * a * c;
        let s0 = sigma_turning(p).powi(2);
        Self { a, b, c, disc, s0 }
    }

    fn r(&self, s: f64) -> f64 {
        (self.a * s + self.b) * s + self.c
    }

    /// Primitive of `√R/s` on `R ≥ 0` (`s ≥ s₀`).
    fn allowed(&self, s: f64) -> f64 {
        let r = self.r(s).max(0.0);
        let sr = r.sqrt();
        let sa = self.a.sqrt();
        let log_term = (self.b / (2.0 * sa)) * (2.0 * sa * sr + 2.0 * self.a * s + self.b).ln();
        let arg = ((self.b * s + 2.0 * self.c) / (s * self.disc.sqrt())).clamp(-1.0, 1.0);
        let asin_term = -(-self.c).sqrt() * arg.asin();
        sr + log_term + asin_term
    }

    /// Primitive of `√(−R)/s` on `R ≤ 0` (`0 < s ≤ s₀`).
    fn forbidden(&self, s: f64) -> f64 {
        let (a, b, c) = (-self.a, -self.b, -self.c);
        let r = (-self.r(s)).max(0.0);
        let sr = r.sqrt();
        let arg = ((2.0 * a * s + b) / self.disc.sqrt()).clamp(-1.0, 1.0);
        let asin_term = (b / 2.0) * (-1.0 / (-a).sqrt()) * arg.asin();
        let log_term = -c.sqrt() * ((2.0 * (c * r).sqrt() + b * s + 2.0 * c) / s).ln();
        sr + asin_term + log_term
    }

    /// `∫_{σ₀}^{σ} √Π dσ` for `σ ≥ σ₀`.
    fn phase(&self, sigma: f64) -> f64 {
        0.5 * (self.allowed(sigma * sigma) - self.allowed(self.s0))
    }

    /// `∫_{σ}^{σ₀} √(−Π) dσ` for `σ ≤ σ₀`.
    fn barrier(&self, sigma: f64) -> f64 {
        0.5 * (self.forbidden(self.s0) - self.forbidden(sigma * sigma))
    }
}

/// The mapping `x ↦ σ(x)` between the canonical and comparison equations.
pub struct SigmaMap {
    params: SpheroidalParams,
    x0: f64,
    sigma0: f64,
    action: ComparisonAction,
}

impl SigmaMap {
    pub fn new(params: SpheroidalParams) -> Result<Self> {
        let x0 = x_turning(params)?;
        let sigma0 = sigma_turning(params);
        Ok(Self {
            params,
            x0,
            sigma0,
            action: ComparisonAction::new(params),
        })
    }

    pub fn params(&self) -> SpheroidalParams {
        self.params
    }

    pub fn turning_points(&self) -> (f64, f64) {
        (self.x0, self.sigma0)
    }

    /// `∫_{x₀}^{x} √χ` (x ≥ x₀) or `∫_{x}^{x₀} √−χ` (x < x₀).
    fn chi_action(&self, x: f64) -> Result<f64> {
        let p = self.params;
        let opts = QuadOptions::with_tol(1e-14, 1e-13);
        if x >= self.x0 {
            // √ behaviour at x₀: substitute x = x₀ + v².
            let v_max = (x - self.x0).sqrt();
            let r = integrate(
                |v| {
                    let xx = self.x0 + v * v;
                    2.0 * v * chi(xx, p).map(|c| c.max(0.0).sqrt()).unwrap_or(0.0)
                },
                0.0,
                v_max,
                opts,
            )?;
            Ok(r.value)
        } else {
            // split: logarithmic region near 0 in ln x, √ region near x₀
            let xm = 0.5 * (x + self.x0).max(x);
            let xm = xm.max(x);
            let v_max = (self.x0 - xm).sqrt();
            let near = integrate(
                |v| {
                    let xx = self.x0 - v * v;
                    2.0 * v * chi(xx, p).map(|c| (-c).max(0.0).sqrt()).unwrap_or(0.0)
                },
                0.0,
                v_max,
                opts,
            )?;
            let far = integrate(
                |u| {
                    let xx = u.exp();
                    xx * chi(xx, p).map(|c| (-c).max(0.0).sqrt()).unwrap_or(0.0)
                },
                x.ln(),
                xm.ln(),
                opts,
            )?;
            Ok(near.value + far.value)
        }
    }

    /// `σ(x)` for `x > 0`.
    pub fn sigma(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("sigma_map", format!("x = {x} must be positive")));
        }
        if x == self.x0 {
            return Ok(self.sigma0);
        }
        let target = self.chi_action(x)?;
        let k = self.params.kappa;
        if x > self.x0 {
            let mut hi = self.sigma0 + (2.0 * target / k).sqrt() + 1.0 / k.sqrt();
            let mut n = 0;
            while self.action.phase(hi) < target {
                hi *= 2.0;
                n += 1;
                if n > 100 {
                    return Err(Error::Bracket {
                        func: "sigma_map",
                        reason: "phase integral bracket failed".into(),
                    });
                }
            }
            brent(|s| self.action.phase(s) - target, self.sigma0, hi, 1e-15 * hi, "sigma_map")
        } else {
            let mut lo = x.min(self.sigma0) * 0.5;
            let mut n = 0;
            while self.action.barrier(lo) < target {
                lo *= 0.5;
                n += 1;
                if n > 200 {
                    return Err(Error::Bracket {
                        func: "sigma_map",
                        reason: "barrier integral bracket failed".into(),
                    });
                }
            }
            brent(|s| self.action.barrier(s) - target, lo, self.sigma0, 1e-15 * self.sigma0, "sigma_map")
        }
    }

    /// `(Π(σ)/χ(x))^{1/4} = (dσ/dx)^{-1/2}`, continuous through the turning point.
    pub fn amplitude_ratio(&self, x: f64, sigma: f64) -> Result<f64> {
        let p = self.params;
        let near = (x - self.x0).abs() <= 1e-6 * self.x0;
        let ratio = if near {
            // both potentials have simple zeros: σ'(x₀)³ = χ'(x₀)/Π'(σ₀)
            let d = (chi_prime(self.x0, p) / pi_prime(self.sigma0, p)).cbrt();
            1.0 / (d * d)
        } else {
            pi_cmp(sigma, p)? / chi(x, p)?
        };
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::Accuracy {
                routine: "jwkb amplitude",
                reason: format!("Π/χ not positive at x = {x} (σ = {sigma})"),
                estimate: ratio,
            });
        }
        Ok(ratio.powf(0.25))
    }
}

fn kummer_a(alpha: f64) -> Complex64 {
    Complex64::new(1.0, -alpha / 4.0)
}

/// Regular solution of `σ f̃'' − f̃' + κ²σ(σ² − α/κ) f̃ = 0`:
/// `f̃(σ) = e^{−iκσ²/2} κσ² ₁F₁(1 − iα/4; 2; iκσ²)` (real-valued).
pub fn comparison_solution(sigma: f64, p: SpheroidalParams) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::domain("comparison_solution", format!("sigma = {sigma} is negative")));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let y = p.kappa * sigma * sigma;
    let z = Complex64::new(0.0, y);
    let m = kummer_1f1(kummer_a(p.alpha), Complex64::new(2.0, 0.0), z)?;
    Ok((Complex64::new(0.0, -y / 2.0).exp() * y * m).re)
}

/// `(f̃, f̃', f̃'')` with derivatives from the contiguous-parameter identities.
pub fn comparison_solution_derivs(sigma: f64, p: SpheroidalParams) -> Result<(f64, f64, f64)> {
    let a = kummer_a(p.alpha);
    let b = Complex64::new(2.0, 0.0);
    let k = p.kappa;
    let y = k * sigma * sigma;
    let i = Complex64::new(0.0, 1.0);
    let z = i * y;
    let m0 = kummer_1f1(a, b, z)?;
    let m1 = kummer_1f1_deriv(a, b, z)?;
    let m2 = a * (a + 1.0) / (b * (b + 1.0)) * kummer_1f1(a + 2.0, b + 2.0, z)?;
    // g(y) = e^{−iy/2} y M(iy); f̃(σ) = g(κσ²)
    let e = (-i * y / 2.0).exp();
    let g0 = e * y * m0;
    let g1 = e * (m0 + y * i * m1 - i / 2.0 * y * m0);
    let dg1 = e * (-i / 2.0) * (m0 + y * i * m1 - i / 2.0 * y * m0)
        + e * (i * m1 + i * m1 + y * i * i * m2 - i / 2.0 * m0 - i / 2.0 * y * i * m1);
    let dy = 2.0 * k * sigma;
    let d2y = 2.0 * k;
    let f1 = g1 * dy;
    let f2 = dg1 * dy * dy + g1 * d2y;
    Ok((g0.re, f1.re, f2.re))
}

/// `√(πα/16 · csch(πα/4))`, continuous at `α = 0` where it equals 1/2.
fn coulomb_norm(alpha: f64) -> f64 {
    let x = PI * alpha / 4.0;
    let x_csch = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x / x.sinh() };
    (x_csch / 4.0).sqrt()
}

/// `ψ(σ) = e^{−πα/8} √(πα/(16σ) csch(πα/4)) f̃(σ)`.
pub fn psi(sigma: f64, p: SpheroidalParams) -> Result<f64> {
    let ft = comparison_solution(sigma, p)?;
    Ok((-PI * p.alpha / 8.0).exp() * coulomb_norm(p.alpha) / sigma.sqrt() * ft)
}

/// Uniform approximation of the radial function normalised to
/// `F → cos(…)/ξ` for large `κξ`.
pub fn jwkb_f(xi: f64, map: &SigmaMap) -> Result<f64> {
    if !(xi > 1.0) {
        return Err(Error::domain("jwkb_f", format!("xi = {xi} must exceed 1")));
    }
    let x = ((xi - 1.0) * (xi + 1.0)).sqrt();
    let sigma = map.sigma(x)?;
    let amp = map.amplitude_ratio(x, sigma)?;
    let pre = (xi * xi * x * x).powf(-0.25);
    Ok(pre * amp * psi(sigma, map.params())?)
}

/// Focal limit `lim_{ξ→1} F/√(ξ²−1)` of the uniform approximation:
/// `κ e^{−πα/8} √(πα/16 · csch(πα/4))`.
pub fn jwkb_focal_limit(p: SpheroidalParams) -> f64 {
    p.kappa * (-PI * p.alpha / 8.0).exp() * coulomb_norm(p.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: f64, a: f64) -> SpheroidalParams {
        SpheroidalParams::new(k, a).unwrap()
    }

    #[test]
    fn chi_matches_liouville_transform() {
        // f'' + P f' + Q f = 0 with P = −1/(x(1+x²)), Q = κ²(x² − α/κ)/(1+x²)
        // has canonical potential Q − P'/2 − P²/4.
        for &(k, a) in &[(3.0, 0.0), (50.0, 0.5), (7.5, -1.2)] {
            let p = params(k, a);
            for &x in &[0.05, 0.3, 1.0, 4.0] {
                let big_p = |x: f64| -1.0 / (x * (1.0 + x * x));
                let q = k * k * (x * x - a / k) / (1.0 + x * x);
                let h = 1e-5 * x;
                let dp = (big_p(x + h) - big_p(x - h)) / (2.0 * h);
                let expected = q - dp / 2.0 - big_p(x).powi(2) / 4.0;
                let got = chi(x, p).unwrap();
                assert!((got - expected).abs() < 1e-6 * expected.abs().max(1.0), "k={k} a={a} x={x}");
            }
        }
    }

    #[test]
    fn pi_turning_point_closed_form() {
        for &(k, a) in &[(1.0, 0.0), (50.0, 0.5), (20.0, -3.0)] {
            let p = params(k, a);
            let s0 = sigma_turning(p);
            assert!(pi_cmp(s0, p).unwrap().abs() < 1e-10 * k * k * s0 * s0);
        }
    }

    #[test]
    fn chi_tends_to_kappa_squared() {
        let p = params(5.0, 0.7);
        let v = chi(1e4, p).unwrap();
        assert!((v - 25.0).abs() < 1e-6);
    }

    #[test]
    fn poles_are_errors() {
        let p = params(5.0, 0.0);
        assert!(chi(0.0, p).is_err());
        assert!(pi_cmp(0.0, p).is_err());
    }

    #[test]
    fn turning_points_coalesce_for_large_kappa() {
        let mut last = f64::INFINITY;
        for k in [10.0, 100.0, 1000.0, 10000.0] {
            let p = params(k, 0.0);
            let x0 = x_turning(p).unwrap();
            let s0 = sigma_turning(p);
            let rel = (x0 / s0 - 1.0).abs();
            assert!(rel < last);
            last = rel;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn comparison_actions_match_quadrature() {
        let p = params(50.0, 0.5);
        let act = ComparisonAction::new(p);
        let s0 = sigma_turning(p);
        let opts = QuadOptions::with_tol(1e-13, 1e-13);
        for &sig in &[s0 * 1.001, s0 * 1.5, 1.0, 3.0] {
            let q = integrate(|v| 2.0 * v * pi_cmp(s0 + v * v, p).unwrap().max(0.0).sqrt(), 0.0, (sig - s0).sqrt(), opts)
                .unwrap();
            assert!((act.phase(sig) - q.value).abs() < 1e-10 * q.value.max(1.0), "sigma={sig}");
        }
        for &sig in &[s0 * 0.999, s0 * 0.5, s0 * 0.01] {
            let q = integrate(
                |v| 2.0 * v * (-pi_cmp(s0 - v * v, p).unwrap()).max(0.0).sqrt(),
                0.0,
                (s0 - sig).sqrt(),
                opts,
            )
            .unwrap();
            assert!((act.barrier(sig) - q.value).abs() < 1e-9 * q.value.max(1.0), "sigma={sig}");
        }
    }

    #[test]
    fn sigma_map_asymptotics() {
        for alpha in [0.0, 0.5] {
            let m = SigmaMap::new(params(50.0, alpha)).unwrap();
            let small = m.sigma(1e-3).unwrap() / 1e-3;
            assert!((small - 1.0).abs() < 0.01, "alpha={alpha}: σ/x = {small}");
            let large = m.sigma(1e3).unwrap() / (2e3f64).sqrt();
            assert!((large - 1.0).abs() < 0.01, "alpha={alpha}: σ/√(2x) = {large}");
            let (x0, s0) = m.turning_points();
            assert_eq!(m.sigma(x0).unwrap(), s0);
        }
    }

    #[test]
    fn sigma_map_is_monotone() {
        let m = SigmaMap::new(params(50.0, 0.5)).unwrap();
        let mut prev = 0.0;
        for k in 1..=1000 {
            let x = 3.0 * k as f64 / 1000.0;
            let s = m.sigma(x).unwrap();
            assert!(s > prev, "x={x}");
            prev = s;
        }
    }

    #[test]
    fn comparison_solution_elementary_case() {
        let p = params(12.0, 0.0);
        assert_eq!(comparison_solution(0.0, p).unwrap(), 0.0);
        for &s in &[0.1, 0.7, 1.3, 2.9] {
            let v = comparison_solution(s, p).unwrap();
            assert!((v - 2.0 * (12.0 * s * s / 2.0).sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn comparison_solution_residual() {
        for &(k, a) in &[(50.0, 0.5), (10.0, 1.0), (50.0, 0.0)] {
            let p = params(k, a);
            let mut s = 0.1;
            while s <= 10.0 {
                let (f, f1, f2) = comparison_solution_derivs(s, p).unwrap();
                let res = s * f2 - f1 + k * k * s * (s * s - a / k) * f;
                let scale = (s * f2).abs() + f1.abs() + (k * k * s * (s * s - a / k) * f).abs();
                assert!(res.abs() < 1e-8 * scale, "k={k} a={a} s={s}: {}", res.abs() / scale);
                s += 0.37;
            }
        }
    }

    #[test]
    fn prefactor_small_alpha_limit() {
        assert!((coulomb_norm(0.0) - 0.5).abs() < 1e-15);
        assert!((coulomb_norm(1e-6) - 0.5).abs() < 1e-12);
        let a: f64 = 0.8;
        let direct = (PI * a / 16.0 / (PI * a / 4.0).sinh()).sqrt();
        assert!((coulomb_norm(a) - direct).abs() < 1e-15);
    }

    #[test]
    fn jwkb_focal_limit_at_zero_alpha() {
        let p = params(50.0, 0.0);
        assert!((jwkb_focal_limit(p) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn kummer_matches_comparison_ode() {
        // integrate σ f'' − f' + κ²σ(σ² − α/κ) f = 0 from a series start out to κσ² = 100
        let p = params(1.0, 1.0);
        let s0 = 0.5;
        let (f0, d0, _) = comparison_solution_derivs(s0, p).unwrap();
        let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = (y[1] - s * (s * s - 1.0) * y[0]) / s;
        };
        let opts = crate::numerics::ode::OdeOptions { rtol: 1e-13, atol: 1e-15, ..Default::default() };
        let out = crate::numerics::ode::integrate(rhs, s0, &[f0, d0], &[10.0], opts).unwrap();
        let direct = comparison_solution(10.0, p).unwrap();
        let amp = (out[0][0].powi(2) + (out[0][1] / 10.0).powi(2)).sqrt();
        assert!((out[0][0] - direct).abs() < 1e-9 * amp, "{} vs {direct}", out[0][0]);
    }
}
