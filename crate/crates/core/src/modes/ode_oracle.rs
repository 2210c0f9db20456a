//! Direct integration of the separated equations from the regular focus.
//!
//! Both equations are integrated for `v = √(ξ² − 1) F` (resp.
//! `v = √(1 − η²) G`) in the variable `t = ξ − 1` (resp. `t = 1 − η`):
//!
//! ```text
//!   F:  v'' + (κ² − ακ/(t(2 + t))) v = 0
//!   G:  v'' + (κ² + ακ/(t(2 − t))) v = 0
//! ```
//!
//! The regular branch `v ~ t` is started from its power series and
//! continued with the Dormand–Prince integrator.

use crate::error::{Error, Result};
use crate::numerics::ode::{self, OdeOptions};

use super::jwkb::SpheroidalParams;
use super::ModeKind;

/// Power series of the regular solution at `t = 0`.
#[derive(Debug, Clone)]
pub(crate) struct FocalSeries {
    coeffs: Vec<f64>,
}

impl FocalSeries {
    pub(crate) fn new(p: SpheroidalParams, kind: ModeKind, slope: f64, t_max: f64) -> Self {
        let k2 = p.kappa * p.kappa;
        let ak = p.alpha * p.kappa;
        let sgn = match kind {
            ModeKind::RadialF => 1.0,
            ModeKind::AngularG => -1.0,
        };
        let mut d = vec![0.0, slope];
        let mut k = 1usize;
        loop {
            let kf = k as f64;
            let dk = d[k];
            let dkm1 = d[k - 1];
            let dkm2 = if k >= 2 { d[k - 2] } else { 0.0 };
            let next = (sgn * (ak - kf * (kf - 1.0)) * dk - 2.0 * k2 * dkm1 - sgn * k2 * dkm2) / (2.0 * kf * (kf + 1.0));
            d.push(next);
            k += 1;
            let scale = d.iter().enumerate().map(|(j, c)| (c * t_max.powi(j as i32)).abs()).fold(0.0, f64::max);
            let tail = (d[k] * t_max.powi(k as i32)).abs() + (d[k - 1] * t_max.powi(k as i32 - 1)).abs();
            if (tail <= 1e-18 * scale && k > 4) || k > 400 {
                break;
            }
        }
        Self { coeffs: d }
    }

    /// `(v, dv/dt)` at `t`.
    pub(crate) fn eval(&self, t: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            v = v * t + c;
            if j > 0 {
                dv = dv * t + j as f64 * c;
            }
        }
        (v, dv)
    }

    /// `v/t` at `t`, finite at the focus.
    pub(crate) fn eval_over_t(&self, t: f64) -> f64 {
        self.coeffs.iter().skip(1).rev().fold(0.0, |acc, c| acc * t + c)
    }
}

fn potential(p: SpheroidalParams, kind: ModeKind, t: f64) -> f64 {
    let ak = p.alpha * p.kappa;
    match kind {
        ModeKind::RadialF => p.kappa * p.kappa - ak / (t * (2.0 + t)),
        ModeKind::AngularG => p.kappa * p.kappa + ak / (t * (2.0 - t)),
    }
}

/// Tabulated regular solution in the focal variable `t`.
#[derive(Debug, Clone)]
pub(crate) struct FocalTable {
    pub(crate) series: FocalSeries,
    pub(crate) t_start: f64,
    pub(crate) t: Vec<f64>,
    pub(crate) v: Vec<f64>,
    pub(crate) dv: Vec<f64>,
}

impl FocalTable {
    /// `(v, dv/dt)` by cubic Hermite interpolation on the table, or the
    /// series inside the starting interval.
    pub(crate) fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if t <= self.t_start {
            return Ok(self.series.eval(t));
        }
        let last = *self.t.last().unwrap_or(&self.t_start);
        if t > last * (1.0 + 1e-14) {
            return Err(Error::domain("mode table", format!("t = {t} beyond tabulated range {last}")));
        }
        let i = self.t.partition_point(|&x| x < t);
        if i < self.t.len() && self.t[i] == t {
            return Ok((self.v[i], self.dv[i]));
        }
        let (t0, v0, d0) = if i == 0 {
            let (v, d) = self.series.eval(self.t_start);
            (self.t_start, v, d)
        } else {
            (self.t[i - 1], self.v[i - 1], self.dv[i - 1])
        };
        let i1 = i.min(self.t.len() - 1);
        let (t1, v1, d1) = (self.t[i1], self.v[i1], self.dv[i1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let v = h00 * v0 + h10 * h * d0 + h01 * v1 + h11 * h * d1;
        let dh00 = 6.0 * s * (s - 1.0);
        let dh10 = (1.0 - s) * (1.0 - 3.0 * s);
        let dh01 = -dh00;
        let dh11 = s * (3.0 * s - 2.0);
        let dv = (dh00 * v0 + dh01 * v1) / h + dh10 * d0 + dh11 * d1;
        Ok((v, dv))
    }
}

/// Integrate the regular solution onto the abscissae `ts` (focal variable,
/// each `> 0`), with slope `v'(0) = slope`.
pub(crate) fn integrate_focal(p: SpheroidalParams, kind: ModeKind, slope: f64, ts: &[f64]) -> Result<FocalTable> {
    let t_start = (0.5 / p.kappa).min(0.1);
    let series = FocalSeries::new(p, kind, slope, t_start);
    let mut sorted: Vec<f64> = ts.iter().copied().filter(|&t| t > t_start).collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let (v0, d0) = series.eval(t_start);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -potential(p, kind, t) * y[0];
    };
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14 * slope.abs().max(1e-300),
        initial_step: 1e-3 / p.kappa.max(1.0),
        max_steps: 5_000_000,
    };
    let out = ode::integrate(rhs, t_start, &[v0, d0], &sorted, opts)?;
    let (v, dv) = out.iter().map(|y| (y[0], y[1])).unzip();
    Ok(FocalTable { series, t_start, t: sorted, v, dv })
}

/// `√Q v² + v'²/√Q`; equals `κ A²` for a large-`t` oscillation of amplitude `A`.
pub(crate) fn wave_invariant(p: SpheroidalParams, kind: ModeKind, t: f64, v: f64, dv: f64) -> Result<f64> {
    let q = potential(p, kind, t);
    if !(q > 0.0) {
        return Err(Error::Integration {
            at: t,
            reason: "normalisation point lies in the evanescent region".into(),
        });
    }
    let sq = q.sqrt();
    Ok(sq * v * v + dv * dv / sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_is_sine_at_zero_alpha() {
        let p = SpheroidalParams::new(7.0, 0.0).unwrap();
        for kind in [ModeKind::RadialF, ModeKind::AngularG] {
            let s = FocalSeries::new(p, kind, 7.0, 0.1);
            for &t in &[0.0, 0.03, 0.1] {
                let (v, dv) = s.eval(t);
                assert!((v - (7.0 * t).sin()).abs() < 1e-15);
                assert!((dv - 7.0 * (7.0 * t).cos()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn series_satisfies_equation() {
        let p = SpheroidalParams::new(5.0, 1.3).unwrap();
        for kind in [ModeKind::RadialF, ModeKind::AngularG] {
            let s = FocalSeries::new(p, kind, 1.0, 0.1);
            let t = 0.07;
            let h = 1e-4;
            let v = |x: f64| s.eval(x).0;
            let d2 = (v(t + h) - 2.0 * v(t) + v(t - h)) / (h * h);
            let res = d2 + potential(p, kind, t) * v(t);
            assert!(res.abs() < 1e-5, "{kind:?}: {res}");
        }
    }

    #[test]
    fn hermite_interpolation_is_accurate() {
        let p = SpheroidalParams::new(10.0, 0.0).unwrap();
        let ts: Vec<f64> = (1..=200).map(|i| i as f64 * 0.01).collect();
        let tab = integrate_focal(p, ModeKind::RadialF, 10.0, &ts).unwrap();
        for &t in &[0.0123, 0.5555, 1.9871] {
            let (v, _) = tab.eval(t).unwrap();
            assert!((v - (10.0 * t).sin()).abs() < 1e-6);
        }
        assert!(tab.eval(2.5).is_err());
    }
}
