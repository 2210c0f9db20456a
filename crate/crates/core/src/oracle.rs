//! Frequency-domain solution and numerical Laplace inversion.
//!
//! With `b̃(Λ) = ∫₀^∞ e^{iΛt} b(t) dt` the amplitudes obey the 2×2 system
//! `i b(0) = [Λ − ω_eg + i A(Λ)] b̃(Λ)`, where
//!
//! ```text
//!   A¹¹ = A²² = Γ/2 + Σ_{N₁∈ℕ₀} A_{N₁,N₂} e^{iτ(N₁,N₂)Λ}
//!   A¹² = A²¹ =       Σ_{N₁∈ℕ₀+½} A_{N₁,N₂} e^{iτ(N₁,N₂)Λ}
//! ```
//!
//! Everything is written in the detuning `δ = Λ − ω_eg`, so `ω_eg` enters
//! only through the optical phases of the hops.  The inversion runs along
//! `Im δ = C` with a trapezoid rule evaluated by FFT, after removing the
//! bare decay pole analytically.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CavityConfig;
use crate::numerics::ode::{self, OdeOptions};
use crate::pathsum::{AmplitudeState, Atom, TimeSeries};
use crate::quantization::{build_weight_table, PathWeightTable, QuantizationData};

#[derive(Debug, Clone, Copy)]
struct SpectralHop {
    delay: f64,
    /// `A e^{iΦ}` in units of 1/τ.
    coef: Complex64,
    transfer: bool,
    two_n1: usize,
    n2: usize,
}

/// `A^{a,b}(δ)` for a truncated hop table.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    gamma_tau: f64,
    hops: Vec<SpectralHop>,
    /// Delays of a unit step in `2N₁` and in `N₂`.
    unit_delays: (f64, f64),
    delay_cutoff: f64,
    dropped_weight: f64,
    min_hop: f64,
}

impl SpectralFunction {
    pub fn new(cfg: &CavityConfig, table: &PathWeightTable) -> Self {
        let g = cfg.gamma_tau;
        let hops = table
            .entries
            .iter()
            .map(|e| SpectralHop {
                delay: e.delay,
                coef: Complex64::from_polar(g * e.weight_over_gamma, cfg.hop_phase(e.two_n1, e.n2)),
                transfer: e.is_transfer(),
                two_n1: e.two_n1 as usize,
                n2: e.n2 as usize,
            })
            .collect();
        Self {
            gamma_tau: g,
            hops,
            unit_delays: (cfg.delay(1, 0), cfg.delay(0, 1)),
            delay_cutoff: table.delay_cutoff,
            dropped_weight: table.dropped_weight,
            min_hop: cfg.delay(1, 0).min(cfg.delay(0, 1)),
        }
    }

    pub fn from_config(cfg: &CavityConfig, delay_cutoff: f64, weight_floor: f64) -> Result<Self> {
        let qd = QuantizationData::from_config(cfg)?;
        let table = build_weight_table(cfg, &qd, delay_cutoff, weight_floor)?;
        Ok(Self::new(cfg, &table))
    }

    /// A spectral function with every delayed coupling removed.
    pub fn bare(gamma_tau: f64) -> Self {
        Self {
            gamma_tau,
            hops: Vec::new(),
            unit_delays: (0.0, 0.0),
            delay_cutoff: f64::INFINITY,
            dropped_weight: 0.0,
            min_hop: 1.0,
        }
    }

    pub fn gamma_tau(&self) -> f64 {
        self.gamma_tau
    }

    pub fn delay_cutoff(&self) -> f64 {
        self.delay_cutoff
    }

    fn check(delta: Complex64) -> Result<()> {
        if !(delta.im > 0.0) {
            return Err(Error::domain("spectral_a", format!("Im Λ = {} must be positive", delta.im)));
        }
        Ok(())
    }

    /// Delayed parts `(T¹¹, T¹²)` without the `Γ/2` term; no domain check.
    fn delayed(&self, delta: Complex64) -> (Complex64, Complex64) {
        let mut same = Complex64::new(0.0, 0.0);
        let mut cross = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let m1 = self.hops.iter().map(|h| h.two_n1).max().unwrap_or(0);
        let m2 = self.hops.iter().map(|h| h.n2).max().unwrap_or(0);
        // delays sit on a lattice; powers are cheaper than one exp per hop
        let lattice = m1 + m2 <= 4 * self.hops.len();
        let powers = |step: f64, m: usize| -> Vec<Complex64> {
            let z = (i * delta * step).exp();
            let mut p = Vec::with_capacity(m + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=m {
                p.push(acc);
                acc *= z;
            }
            p
        };
        let (p1, p2) = if lattice {
            (powers(self.unit_delays.0, m1), powers(self.unit_delays.1, m2))
        } else {
            (Vec::new(), Vec::new())
        };
        for h in &self.hops {
            let e = if lattice {
                p1[h.two_n1] * p2[h.n2]
            } else {
                (i * delta * h.delay).exp()
            };
            let v = h.coef * e;
            if h.transfer {
                cross += v;
            } else {
                same += v;
            }
        }
        (same, cross)
    }

    /// `(A¹¹, A¹²)` at detuning `δ`.
    pub fn matrix(&self, delta: Complex64) -> Result<(Complex64, Complex64)> {
        Self::check(delta)?;
        let (same, cross) = self.delayed(delta);
        Ok((same + 0.5 * self.gamma_tau, cross))
    }

    pub fn spectral_a(&self, delta: Complex64, a: Atom, b: Atom) -> Result<Complex64> {
        let (d, o) = self.matrix(delta)?;
        Ok(if a == b { d } else { o })
    }

    /// `Σ|A|` over the tabulated hops.
    pub fn delayed_mass(&self) -> f64 {
        self.hops.iter().map(|h| h.coef.norm()).sum()
    }

    /// Smallest `C` with `Σ|A| e^{−Cτ_h} ≤ C + Γ/2`.  Above that line the
    /// delayed terms cannot move a zero of `δ + iΓ/2`, so the truncated
    /// resolvent has no poles there.
    pub fn pole_free_height(&self) -> f64 {
        let excess = |c: f64| -> f64 {
            self.hops.iter().map(|h| h.coef.norm() * (-c * h.delay).exp()).sum::<f64>() - c - 0.5 * self.gamma_tau
        };
        if excess(0.0) <= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while excess(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Heuristic bound on the hops left out of the table at `Im δ`:
    /// below-floor hops plus everything beyond the delay cutoff with `|W| ≤ 1`.
    pub fn truncation_bound(&self, delta: Complex64) -> f64 {
        let y = delta.im;
        let q = (-y * self.min_hop).exp();
        let beyond = if self.delay_cutoff.is_finite() {
            (-y * self.delay_cutoff).exp() / ((1.0 - q) * (1.0 - q))
        } else {
            0.0
        };
        self.gamma_tau * (self.dropped_weight * q + beyond)
    }
}

fn solve(delta: Complex64, same: Complex64, cross: Complex64, init: AmplitudeState) -> Result<(Complex64, Complex64)> {
    let i = Complex64::new(0.0, 1.0);
    let dp = delta + i * (same + cross);
    let dm = delta + i * (same - cross);
    if !(dp.norm() > 1e-300 && dm.norm() > 1e-300) {
        return Err(Error::Conditioning(format!("resolvent singular at δ = {delta}")));
    }
    let sp = (init.b1 + init.b2) / dp;
    let sm = (init.b1 - init.b2) / dm;
    Ok((0.5 * i * (sp + sm), 0.5 * i * (sp - sm)))
}

/// `(b̃¹, b̃²)` at detuning `δ`, solved in the symmetric/antisymmetric basis.
pub fn resolvent(sf: &SpectralFunction, delta: Complex64, init: AmplitudeState) -> Result<(Complex64, Complex64)> {
    let (d, o) = sf.matrix(delta)?;
    solve(delta, d, o, init)
}

/// Partial sum `Σ_{n≤order} (−iT)ⁿ i b(0)/Dⁿ⁺¹` of the Neumann series with
/// `D = δ + iΓ/2`.
pub fn neumann_resolvent(sf: &SpectralFunction, delta: Complex64, init: AmplitudeState, order: usize) -> Result<(Complex64, Complex64)> {
    SpectralFunction::check(delta)?;
    let i = Complex64::new(0.0, 1.0);
    let (t11, t12) = sf.delayed(delta);
    let d = delta + i * 0.5 * sf.gamma_tau;
    let mut v = (i * init.b1 / d, i * init.b2 / d);
    let mut acc = v;
    for _ in 0..order {
        let w1 = -i * (t11 * v.0 + t12 * v.1) / d;
        let w2 = -i * (t12 * v.0 + t11 * v.1) / d;
        v = (w1, w2);
        acc.0 += v.0;
        acc.1 += v.1;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceOptions {
    /// Contour height `C`; defaults to `2/t_max` above the pole-free
    /// height of the truncated resolvent.
    pub contour: Option<f64>,
    /// Minimum half-width of the frequency window, in units of 1/τ;
    /// defaults to `max(400, 100 Γ, 2000 Σ|A|)`.  The slope jumps at the hop
    /// delays make the truncation error fall off like `Σ|A|/Ω`.
    pub window: Option<f64>,
    /// Period of the discrete transform in units of `1/(C − C₀)`, with
    /// `C₀` the pole-free height (or 0 if the contour lies below it).
    pub period_factor: f64,
    /// Acceptable change of `P` under window doubling and step halving.
    pub tolerance: f64,
    pub self_check: bool,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        Self {
            contour: None,
            window: None,
            period_factor: 16.0,
            tolerance: 1e-5,
            self_check: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LaplaceInfo {
    pub contour: f64,
    pub window: f64,
    pub frequency_step: f64,
    pub fft_size: usize,
    /// Largest change in `P₁`, `P₂` under window doubling or step halving.
    pub error_estimate: Option<f64>,
}

fn grid_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 || grid[0] != 0.0 {
        return Err(Error::validation("grid", "the Laplace inversion needs a uniform grid starting at t = 0"));
    }
    let h = grid[1] - grid[0];
    for (k, &t) in grid.iter().enumerate() {
        if !((t - k as f64 * h).abs() <= 1e-9 * h.max(t)) {
            return Err(Error::validation("grid", "the Laplace inversion needs a uniform grid"));
        }
    }
    if !(h > 0.0) {
        return Err(Error::validation("grid", "grid step must be positive"));
    }
    Ok(h)
}

/// One FFT pass; returns the amplitudes on the grid.
fn invert_once(
    sf: &SpectralFunction,
    init: AmplitudeState,
    grid_len: usize,
    h: f64,
    c: f64,
    omega_min: f64,
    period: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>, f64, f64, usize)> {
    // FFT time step divides the grid step so grid points are FFT nodes
    let m = (omega_min * h / std::f64::consts::PI).ceil().max(1.0) as usize;
    let dt = h / m as f64;
    let n = ((period / dt).ceil() as usize).next_power_of_two();
    if n > 1 << 26 {
        return Err(Error::Resource {
            reason: "Laplace inversion grid too large".into(),
            cap: 1 << 26,
            tail_bound: f64::NAN,
        });
    }
    let span = n as f64 * dt;
    let dw = std::f64::consts::TAU / span;
    let omega = std::f64::consts::PI / dt;
    let i = Complex64::new(0.0, 1.0);
    let bare = 0.5 * sf.gamma_tau;
    let samples: Vec<Result<(Complex64, Complex64)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let j = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            let delta = Complex64::new(j * dw, c);
            let (same, cross) = sf.delayed(delta);
            let (r1, r2) = solve(delta, same + bare, cross, init)?;
            let d = delta + i * bare;
            Ok((r1 - i * init.b1 / d, r2 - i * init.b2 / d))
        })
        .collect();
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    for s in samples {
        let (a, b) = s?;
        x1.push(a);
        x2.push(b);
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let fft: Arc<dyn rustfft::Fft<f64>> = fft;
    fft.process(&mut x1);
    fft.process(&mut x2);
    let mut b1 = Vec::with_capacity(grid_len);
    let mut b2 = Vec::with_capacity(grid_len);
    for k in 0..grid_len {
        let idx = k * m;
        if idx >= n {
            return Err(Error::Resource {
                reason: "grid extends beyond the transform period".into(),
                cap: n,
                tail_bound: f64::NAN,
            });
        }
        let t = k as f64 * h;
        let scale = (c * t).exp() * dw / std::f64::consts::TAU;
        let decay = (-bare * t).exp();
        b1.push(x1[idx] * scale + init.b1 * decay);
        b2.push(x2[idx] * scale + init.b2 * decay);
    }
    Ok((b1, b2, omega, dw, n))
}

/// Amplitudes on a uniform grid `t_k = k h` (units of τ) by Bromwich
/// inversion.
pub fn inverse_laplace(sf: &SpectralFunction, init: AmplitudeState, grid: &[f64], opts: LaplaceOptions) -> Result<(TimeSeries, LaplaceInfo)> {
    let h = grid_step(grid)?;
    let t_max = *grid.last().unwrap();
    if t_max > sf.delay_cutoff * (1.0 + 1e-12) {
        return Err(Error::Horizon { requested: t_max, horizon: sf.delay_cutoff });
    }
    let c0 = sf.pole_free_height();
    let c = opts.contour.unwrap_or(c0 + 2.0 / t_max);
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::validation("contour", format!("must be positive, got {c}")));
    }
    let omega_min = opts
        .window
        .unwrap_or_else(|| (100.0 * sf.gamma_tau).max(2e3 * sf.delayed_mass()).max(400.0));
    let gap = if c > c0 { c - c0 } else { c };
    let period = (opts.period_factor / gap).max(2.0 * t_max);
    let (b1, b2, omega, dw, n) = invert_once(sf, init, grid.len(), h, c, omega_min, period)?;
    let ts = TimeSeries::from_amplitudes("laplace", grid.to_vec(), b1, b2);
    let mut info = LaplaceInfo {
        contour: c,
        window: omega,
        frequency_step: dw,
        fft_size: n,
        error_estimate: None,
    };
    if opts.self_check {
        let (w1, w2, ..) = invert_once(sf, init, grid.len(), h, c, 2.0 * omega, period)?;
        let wide = TimeSeries::from_amplitudes("laplace", grid.to_vec(), w1, w2);
        let (f1, f2, ..) = invert_once(sf, init, grid.len(), h, c, omega, 2.0 * period)?;
        let fine = TimeSeries::from_amplitudes("laplace", grid.to_vec(), f1, f2);
        let est = ts.max_discrepancy(&wide)?.max(ts.max_discrepancy(&fine)?);
        info.error_estimate = Some(est);
        if !(est <= opts.tolerance) {
            return Err(Error::Accuracy {
                routine: "inverse_laplace",
                reason: format!("window/step refinement changed P by {est:e} (tolerance {:e})", opts.tolerance),
                estimate: est,
            });
        }
    }
    Ok((ts, info))
}

/// `Ω₀τ = √(2Γτ)`, the single-mode vacuum Rabi frequency in units of 1/τ.
pub fn rabi_frequency(gamma_tau: f64) -> f64 {
    (2.0 * gamma_tau).sqrt()
}

/// Two atoms resonantly coupled to one mode with coupling `Ω₀/2` each:
/// the symmetric combination exchanges its excitation with the photon at
/// frequency `Ω₀/√2`, the antisymmetric one is dark.  Returns `(P₁, P₂)`.
pub fn single_mode_reference(omega0: f64, t: f64, init: AmplitudeState) -> (f64, f64) {
    let s = std::f64::consts::SQRT_2;
    let bs = (init.b1 + init.b2) / s * (omega0 * t / s).cos();
    let ba = (init.b1 - init.b2) / s;
    (((bs + ba) / s).norm_sqr(), ((bs - ba) / s).norm_sqr())
}

/// The same model integrated numerically; returns `(P₁, P₂)` at each time.
pub fn single_mode_numerical(omega0: f64, times: &[f64], init: AmplitudeState) -> Result<Vec<(f64, f64)>> {
    let g = 0.5 * omega0;
    // state (b1, b2, c) as 6 reals; i ḃ_a = g c, i ċ = g (b1 + b2)
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let b1 = Complex64::new(y[0], y[1]);
        let b2 = Complex64::new(y[2], y[3]);
        let c = Complex64::new(y[4], y[5]);
        let mi = Complex64::new(0.0, -1.0);
        let d1 = mi * g * c;
        let d2 = mi * g * c;
        let dc = mi * g * (b1 + b2);
        dy.copy_from_slice(&[d1.re, d1.im, d2.re, d2.im, dc.re, dc.im]);
    };
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-15, initial_step: 1e-3, max_steps: 10_000_000 };
    let y0 = [init.b1.re, init.b1.im, init.b2.re, init.b2.im, 0.0, 0.0];
    let out = ode::integrate(rhs, 0.0, &y0, times, opts)?;
    Ok(out.iter().map(|y| (y[0] * y[0] + y[1] * y[1], y[2] * y[2] + y[3] * y[3])).collect())
}
