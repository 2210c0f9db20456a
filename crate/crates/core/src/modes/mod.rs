//! Separable mode functions of the ellipsoidal resonator.
//!
//! The field of the modes coupling to z-oriented dipoles at the foci
//! separates into an angular factor `G(κ, η)` and a radial factor
//! `F(κ, ξ)`.  Three ways of obtaining them are provided: closed forms for
//! vanishing separation constant, direct integration of the separated
//! equations, and a uniform semiclassical approximation of `F`.

pub mod exact;
pub mod jwkb;
pub mod kummer;
mod ode_oracle;

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
pub use jwkb::{chi, comparison_solution, jwkb_f, pi_cmp, SigmaMap, SpheroidalParams};
pub use kummer::{kummer_1f1, kummer_1f1_deriv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeKind {
    AngularG,
    RadialF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeMethod {
    ExactAlpha0,
    UniformJwkb,
    OdeOracle,
}

impl ModeMethod {
    pub fn label(self) -> &'static str {
        match self {
            ModeMethod::ExactAlpha0 => "exact",
            ModeMethod::UniformJwkb => "jwkb",
            ModeMethod::OdeOracle => "ode",
        }
    }
}

enum Evaluator {
    Exact,
    Jwkb(Box<SigmaMap>),
    Table(Box<ode_oracle::FocalTable>),
}

/// A mode function together with the method used to evaluate it.
///
/// Coordinates are `η ∈ (−1, 1)` for [`ModeKind::AngularG`] and `ξ > 1`
/// for [`ModeKind::RadialF`].
pub struct ModeFunction {
    params: SpheroidalParams,
    kind: ModeKind,
    method: ModeMethod,
    eval: Evaluator,
}

impl std::fmt::Debug for ModeFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModeFunction")
            .field("params", &self.params)
            .field("kind", &self.kind)
            .field("method", &self.method)
            .finish()
    }
}

fn focal_t(kind: ModeKind, coord: f64) -> f64 {
    match kind {
        ModeKind::RadialF => coord - 1.0,
        ModeKind::AngularG => 1.0 - coord,
    }
}

fn check_domain(kind: ModeKind, coord: f64) -> Result<()> {
    let ok = match kind {
        ModeKind::RadialF => coord > 1.0 && coord.is_finite(),
        ModeKind::AngularG => coord > -1.0 && coord < 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain("mode_function", format!("{coord} outside the open domain of {kind:?}")))
    }
}

/// `√(ξ² − 1)` or `√(1 − η²)` written in the focal variable.
fn metric_root(kind: ModeKind, t: f64) -> f64 {
    match kind {
        ModeKind::RadialF => (t * (2.0 + t)).sqrt(),
        ModeKind::AngularG => (t * (2.0 - t)).sqrt(),
    }
}

impl ModeFunction {
    /// Closed form, valid only for `α = 0`.
    pub fn exact(params: SpheroidalParams, kind: ModeKind) -> Result<Self> {
        if params.alpha != 0.0 {
            return Err(Error::validation("alpha", "closed-form modes need alpha = 0"));
        }
        Ok(Self { params, kind, method: ModeMethod::ExactAlpha0, eval: Evaluator::Exact })
    }

    /// Uniform approximation of the radial function.
    pub fn jwkb(params: SpheroidalParams) -> Result<Self> {
        let map = SigmaMap::new(params)?;
        Ok(Self {
            params,
            kind: ModeKind::RadialF,
            method: ModeMethod::UniformJwkb,
            eval: Evaluator::Jwkb(Box::new(map)),
        })
    }

    /// Numerical solution on `grid`, evaluated between grid points by
    /// Hermite interpolation.
    ///
    /// The radial function is scaled to unit amplitude of `ξF` far from the
    /// foci.  The angular function is scaled so that
    /// `G/√(1 − η²) → κ/2` at `η = 1`, as for the closed form.
    pub fn ode_oracle(params: SpheroidalParams, kind: ModeKind, grid: &[f64]) -> Result<Self> {
        for &c in grid {
            check_domain(kind, c)?;
        }
        let mut ts: Vec<f64> = grid.iter().map(|&c| focal_t(kind, c)).collect();
        let k = params.kappa;
        let table = match kind {
            ModeKind::AngularG => ode_oracle::integrate_focal(params, kind, k, &ts)?,
            ModeKind::RadialF => {
                let t_max = ts.iter().copied().fold(0.0, f64::max);
                let t_norm = t_max.max(9.0).max((1.0 + 100.0 * params.alpha.abs() / k).sqrt());
                ts.push(t_norm);
                let raw = ode_oracle::integrate_focal(params, kind, k, &ts)?;
                let (v, dv) = raw.eval(t_norm)?;
                let e = ode_oracle::wave_invariant(params, kind, t_norm, v, dv)?;
                let scale = (k / e).sqrt();
                ode_oracle::integrate_focal(params, kind, k * scale, &ts)?
            }
        };
        Ok(Self {
            params,
            kind,
            method: ModeMethod::OdeOracle,
            eval: Evaluator::Table(Box::new(table)),
        })
    }

    pub fn params(&self) -> SpheroidalParams {
        self.params
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn method(&self) -> ModeMethod {
        self.method
    }

    pub fn eval(&self, coord: f64) -> Result<f64> {
        check_domain(self.kind, coord)?;
        let k = self.params.kappa;
        match &self.eval {
            Evaluator::Exact => match self.kind {
                ModeKind::AngularG => exact::exact_g_alpha0(k, coord),
                ModeKind::RadialF => exact::exact_f_alpha0(k, coord),
            },
            Evaluator::Jwkb(map) => jwkb_f(coord, map),
            Evaluator::Table(tab) => {
                let t = focal_t(self.kind, coord);
                let (v, _) = tab.eval(t)?;
                Ok(v / metric_root(self.kind, t))
            }
        }
    }

    /// Limit of the mode function divided by `√(ξ² − 1)` (or `√(1 − η²)`)
    /// at the focus `ξ = 1` (or `η = 1`).
    pub fn focal_limit(&self) -> f64 {
        let k = self.params.kappa;
        match &self.eval {
            Evaluator::Exact => k / 2.0,
            Evaluator::Jwkb(map) => jwkb::jwkb_focal_limit(map.params()),
            Evaluator::Table(tab) => tab.series.eval_over_t(0.0) / 2.0,
        }
    }

    /// `(coordinate, value)` pairs.
    pub fn tabulate(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        grid.iter().map(|&c| Ok((c, self.eval(c)?))).collect()
    }

    /// CSV with columns `coordinate,value,method`.
    pub fn write_csv<W: Write>(&self, grid: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "coordinate,value,method")?;
        for (c, v) in self.tabulate(grid)? {
            writeln!(out, "{c:.16e},{v:.16e},{}", self.method.label())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of the nearest integer to `n`.
    pub fn of(n: f64) -> Self {
        if (n.round() as i64).rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// `α csch(πα/4)`, equal to `4/π` at `α = 0`.
pub fn alpha_csch(alpha: f64) -> f64 {
    let x = PI * alpha / 4.0;
    if x.abs() < 1e-4 {
        4.0 / PI * (1.0 - x * x / 6.0)
    } else {
        alpha / x.sinh()
    }
}

/// Dipole coupling at the two foci, up to the mode normalisation:
/// `g₁ = (κ²π/4) α csch(πα/4)` and `g₂ = (−1)ⁿ g₁`.
pub fn focal_coupling(kappa: f64, alpha: f64, parity: Parity) -> (f64, f64) {
    let g1 = kappa * kappa * PI / 4.0 * alpha_csch(alpha);
    let g2 = match parity {
        Parity::Even => g1,
        Parity::Odd => -g1,
    };
    (g1, g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(k: f64, a: f64) -> SpheroidalParams {
        SpheroidalParams::new(k, a).unwrap()
    }

    #[test]
    fn ode_oracle_reproduces_angular_closed_form() {
        let p = params(50.0, 0.0);
        let grid: Vec<f64> = (0..=1980).map(|i| -0.99 + i as f64 * 0.001).collect();
        let ode = ModeFunction::ode_oracle(p, ModeKind::AngularG, &grid).unwrap();
        let ex = ModeFunction::exact(p, ModeKind::AngularG).unwrap();
        let worst = grid
            .iter()
            .map(|&e| (ode.eval(e).unwrap() - ex.eval(e).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "sup error {worst:e}");
    }

    #[test]
    fn ode_oracle_reproduces_radial_closed_form() {
        let p = params(50.0, 0.0);
        let xb = 10.0;
        let grid: Vec<f64> = (0..=2000).map(|i| 1.01 + (xb - 1.01) * i as f64 / 2000.0).collect();
        let ode = ModeFunction::ode_oracle(p, ModeKind::RadialF, &grid).unwrap();
        let worst = grid
            .iter()
            .map(|&x| (ode.eval(x).unwrap() - exact::exact_f_alpha0(50.0, x).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "sup error {worst:e}");
        assert!((ode.focal_limit() - 25.0).abs() < 1e-7);
    }

    #[test]
    fn ode_oracle_is_smooth_in_alpha() {
        // central differences in α at two step sizes agree to O(h²)
        let grid = [1.3, 1.7, 2.2];
        let eval = |a: f64| {
            let m = ModeFunction::ode_oracle(params(20.0, a), ModeKind::RadialF, &grid).unwrap();
            grid.map(|x| m.eval(x).unwrap())
        };
        let a0 = 0.3;
        let h = 0.02;
        let (p1, m1) = (eval(a0 + h), eval(a0 - h));
        let (p2, m2) = (eval(a0 + h / 2.0), eval(a0 - h / 2.0));
        for i in 0..grid.len() {
            let d1 = (p1[i] - m1[i]) / (2.0 * h);
            let d2 = (p2[i] - m2[i]) / h;
            let rich = (4.0 * d2 - d1) / 3.0;
            assert!((d2 - rich).abs() < 1e-3 * rich.abs().max(1.0), "x={}: {d2} vs {rich}", grid[i]);
        }
    }

    #[test]
    fn exact_needs_zero_alpha() {
        assert!(ModeFunction::exact(params(3.0, 0.1), ModeKind::RadialF).is_err());
    }

    #[test]
    fn domain_checks() {
        let m = ModeFunction::exact(params(3.0, 0.0), ModeKind::AngularG).unwrap();
        assert!(m.eval(1.0).is_err());
        assert!(m.eval(-1.0).is_err());
        assert!(ModeFunction::ode_oracle(params(3.0, 0.0), ModeKind::RadialF, &[0.5]).is_err());
    }

    fn envelope_error(a: &ModeFunction, b: &ModeFunction, lo: f64, hi: f64) -> f64 {
        (0..=600)
            .map(|i| {
                let xi = lo + (hi - lo) * i as f64 / 600.0;
                let env = 1.0 / ((xi - 1.0) * (xi + 1.0)).sqrt();
                (a.eval(xi).unwrap() - b.eval(xi).unwrap()).abs() / env
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn jwkb_against_closed_form() {
        let p = params(50.0, 0.0);
        let j = ModeFunction::jwkb(p).unwrap();
        let e = ModeFunction::exact(p, ModeKind::RadialF).unwrap();
        let err = envelope_error(&j, &e, 1.05, 3.0);
        assert!(err < 1e-2, "{err:e}");
        assert!((j.focal_limit() - e.focal_limit()).abs() < 1e-12);
    }

    #[test]
    fn jwkb_against_ode_oracle() {
        let p = params(50.0, 0.5);
        let j = ModeFunction::jwkb(p).unwrap();
        let grid: Vec<f64> = (0..=600).map(|i| 1.05 + 1.95 * i as f64 / 600.0).collect();
        let o = ModeFunction::ode_oracle(p, ModeKind::RadialF, &grid).unwrap();
        let err = envelope_error(&j, &o, 1.05, 3.0);
        assert!(err < 2e-2, "{err:e}");
    }

    #[test]
    fn csv_dump() {
        let m = ModeFunction::exact(params(3.0, 0.0), ModeKind::RadialF).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&[1.5, 2.0], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "coordinate,value,method");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",exact"));
    }

    #[test]
    fn coupling_limits_and_parity() {
        let (g1, g2) = focal_coupling(7.0, 0.0, Parity::Even);
        assert!((g1 - 49.0).abs() < 1e-12 && g1 == g2);
        let (g1, g2) = focal_coupling(7.0, 1e-7, Parity::Odd);
        assert!((g1 - 49.0).abs() < 1e-9 && g2 == -g1);
        assert_eq!(Parity::of(3.9), Parity::Even);
        assert_eq!(Parity::of(-1.0), Parity::Odd);
    }

    #[test]
    fn coupling_matches_focal_limits_at_zero_alpha() {
        // lim F/√(ξ²−1) · lim G/√(1−η²) × 4 = κ²
        let k = 13.0;
        let f = ModeFunction::exact(params(k, 0.0), ModeKind::RadialF).unwrap().focal_limit();
        let g = ModeFunction::exact(params(k, 0.0), ModeKind::AngularG).unwrap().focal_limit();
        assert!((4.0 * f * g - focal_coupling(k, 0.0, Parity::Even).0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn coupling_even_and_decreasing(a in 0.0f64..40.0, da in 1e-3f64..5.0) {
            let (p, _) = focal_coupling(2.0, a, Parity::Even);
            let (m, _) = focal_coupling(2.0, -a, Parity::Even);
            prop_assert!((p - m).abs() <= 1e-15 * p.abs());
            prop_assert!(alpha_csch(a + da) < alpha_csch(a));
        }
    }
}
