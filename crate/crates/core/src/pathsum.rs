//! Time-domain amplitudes as a sum over photon paths.
//!
//! Expanding the resolvent in powers of the delayed couplings gives, for a
//! path of `n` hops with total delay `τ_p`, signed weight product `∏A` and
//! optical phase `Φ_p`, the contribution
//!
//! ```text
//!   Θ(t − τ_p) (−1)ⁿ ∏A (t − τ_p)ⁿ/n! e^{−Γ(t − τ_p)/2} e^{iΦ_p}
//! ```
//!
//! (the carrier `e^{−iω_eg t}` is dropped).  Because delay and phase of a
//! path depend only on `n`, `ΣN₁` and `ΣN₂`, the ordered paths are summed
//! class by class: the class coefficients are the n-fold convolution of
//! the hop table.  [`enumerate_paths`] lists individual paths for
//! inspection and cross-checks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CavityConfig;
use crate::quantization::{build_weight_table, PathWeightTable, QuantizationData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Atom {
    One,
    Two,
}

impl Atom {
    pub fn other(self) -> Self {
        match self {
            Atom::One => Atom::Two,
            Atom::Two => Atom::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Hop {
    pub from: Atom,
    pub to: Atom,
    pub two_n1: u32,
    pub n2: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonPath {
    pub start: Atom,
    pub hops: Vec<Hop>,
    pub total_delay: f64,
    /// `∏ A/Γ`, signed.
    pub amplitude_factor: f64,
    /// `Σ (2N₁ φ_d + N₂ φ_f)`, not reduced.
    pub phase: f64,
}

impl PhotonPath {
    pub fn order(&self) -> usize {
        self.hops.len()
    }

    pub fn end_atom(&self) -> Atom {
        self.hops.last().map_or(self.start, |h| h.to)
    }
}

/// Initial amplitudes `(b¹(0), b²(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeState {
    pub b1: Complex64,
    pub b2: Complex64,
}

impl AmplitudeState {
    pub fn new(b1: Complex64, b2: Complex64) -> Result<Self> {
        let norm = b1.norm_sqr() + b2.norm_sqr();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::validation("initial", format!("|b1|² + |b2|² = {norm}, expected 1")));
        }
        Ok(Self { b1, b2 })
    }

    /// Scale to unit norm.
    pub fn normalized(b1: Complex64, b2: Complex64) -> Result<Self> {
        let norm = (b1.norm_sqr() + b2.norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::validation("initial", "amplitudes must not both vanish"));
        }
        Ok(Self { b1: b1 / norm, b2: b2 / norm })
    }

    pub fn excited(atom: Atom) -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        match atom {
            Atom::One => Self { b1: one, b2: zero },
            Atom::Two => Self { b1: zero, b2: one },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    /// Longest hop delay kept in the weight table, in units of τ.
    pub delay_cutoff: f64,
    /// Floor on `|A|/Γ` per hop and on the class weight `Σ|∏A/Γ|`.
    pub weight_floor: f64,
    /// Cap on the number of path classes (or explicit paths).
    pub max_classes: usize,
}

impl Truncation {
    pub fn for_horizon(t_max: f64) -> Self {
        Self {
            delay_cutoff: t_max,
            weight_floor: 1e-12,
            max_classes: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationInfo {
    pub delay_cutoff: f64,
    pub weight_floor: f64,
    pub table_entries: usize,
    pub path_classes: usize,
    /// Number of ordered photon paths represented by the classes.
    pub path_count: f64,
    pub max_order: usize,
    /// Heuristic estimate of the amplitude carried by discarded paths,
    /// first order in the discarded weight.
    pub tail_amplitude: f64,
    /// Heuristic estimate of the resulting change in `P₁` or `P₂`.
    pub tail_probability: f64,
    /// Worst `ε Σ|term|` over the grid.
    pub rounding_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeSeries {
    pub method: &'static str,
    /// Times in units of τ.
    pub t: Vec<f64>,
    pub b1: Vec<Complex64>,
    pub b2: Vec<Complex64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub truncation: Option<TruncationInfo>,
}

impl TimeSeries {
    pub fn from_amplitudes(method: &'static str, t: Vec<f64>, b1: Vec<Complex64>, b2: Vec<Complex64>) -> Self {
        let p1 = b1.iter().map(|b| b.norm_sqr()).collect();
        let p2 = b2.iter().map(|b| b.norm_sqr()).collect();
        Self { method, t, b1, b2, p1, p2, truncation: None }
    }

    /// CSV with columns `t_over_tau,P1,P2,reB1,imB1,reB2,imB2`; `header`
    /// lines are written first as `#` comments.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W, header: &[String]) -> Result<()> {
        for h in header {
            writeln!(out, "# {h}")?;
        }
        writeln!(out, "t_over_tau,P1,P2,reB1,imB1,reB2,imB2")?;
        for i in 0..self.t.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t[i], self.p1[i], self.p2[i], self.b1[i].re, self.b1[i].im, self.b2[i].re, self.b2[i].im
            )?;
        }
        Ok(())
    }

    /// `max_t max_a |P_a − P'_a|` against another series on the same grid.
    pub fn max_discrepancy(&self, other: &TimeSeries) -> Result<f64> {
        if self.t != other.t {
            return Err(Error::Config("time grids differ".into()));
        }
        Ok(self
            .p1
            .iter()
            .zip(&other.p1)
            .chain(self.p2.iter().zip(&other.p2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Uniform grid of `points` samples on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::validation("tmax", format!("must be positive, got {t_max}")));
    }
    if points < 2 {
        return Err(Error::validation("points", "need at least two samples"));
    }
    Ok((0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect())
}

fn check_gamma(cfg: &CavityConfig) -> Result<()> {
    if cfg.gamma_tau < 1e-6 {
        return Err(Error::validation("gamma_tau", format!("must be at least 1e-6, got {}", cfg.gamma_tau)));
    }
    Ok(())
}

/// Contribution of one path at time `t` (units of τ), for `Γτ = gamma_tau`.
pub fn path_term(t: f64, path: &PhotonPath, gamma_tau: f64) -> Complex64 {
    let u = t - path.total_delay;
    let n = path.order();
    if u < 0.0 || (u == 0.0 && n > 0) {
        return Complex64::new(0.0, 0.0);
    }
    let mut mag = (-0.5 * gamma_tau * u).exp();
    for k in 1..=n {
        mag *= gamma_tau * u / k as f64;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::from_polar(sign * path.amplitude_factor * mag, path.phase)
}

/// All hop sequences from `start` with total delay `≤ t_max` and
/// `|∏A/Γ| ≥ weight_floor`, in the order (delay, length, hops).
pub fn enumerate_paths(
    cfg: &CavityConfig,
    start: Atom,
    table: &PathWeightTable,
    t_max: f64,
    weight_floor: f64,
    cap: usize,
) -> Result<Vec<PhotonPath>> {
    if t_max > table.delay_cutoff * (1.0 + 1e-12) {
        return Err(Error::Horizon { requested: t_max, horizon: table.delay_cutoff });
    }
    let slack = 1e-12 * t_max.max(1.0);
    let mut out = Vec::new();
    let mut stack = vec![PhotonPath {
        start,
        hops: Vec::new(),
        total_delay: 0.0,
        amplitude_factor: 1.0,
        phase: 0.0,
    }];
    while let Some(p) = stack.pop() {
        let here = p.end_atom();
        for e in table.entries.iter().rev() {
            let delay = p.total_delay + e.delay;
            if delay > t_max + slack {
                continue;
            }
            let amp = p.amplitude_factor * e.weight_over_gamma;
            if amp.abs() < weight_floor {
                continue;
            }
            let to = if e.is_transfer() { here.other() } else { here };
            let mut hops = p.hops.clone();
            hops.push(Hop { from: here, to, two_n1: e.two_n1, n2: e.n2 });
            stack.push(PhotonPath {
                start,
                hops,
                total_delay: delay,
                amplitude_factor: amp,
                phase: p.phase + e.two_n1 as f64 * cfg.phase_d + e.n2 as f64 * cfg.phase_f,
            });
        }
        out.push(p);
        if out.len() > cap {
            return Err(Error::Resource {
                reason: format!("more than {cap} photon paths below t_max = {t_max}"),
                cap,
                tail_bound: f64::NAN,
            });
        }
    }
    out.sort_by(|a, b| {
        a.total_delay
            .total_cmp(&b.total_delay)
            .then(a.hops.len().cmp(&b.hops.len()))
            .then_with(|| a.hops.cmp(&b.hops))
    });
    Ok(out)
}

/// Sum of path terms at each grid time, split by end atom.
pub fn sum_paths(paths: &[PhotonPath], grid: &[f64], gamma_tau: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let eval = |t: f64, atom: Atom| -> Complex64 {
        paths.iter().filter(|p| p.end_atom() == atom).map(|p| path_term(t, p, gamma_tau)).sum()
    };
    let b1 = grid.iter().map(|&t| eval(t, Atom::One)).collect();
    let b2 = grid.iter().map(|&t| eval(t, Atom::Two)).collect();
    (b1, b2)
}

/// One group of paths sharing `(n, ΣN₁, ΣN₂)`.
#[derive(Debug, Clone, Copy)]
struct ClassTerm {
    n: u32,
    transfer: bool,
    delay: f64,
    phase: f64,
    /// `ln|C| + n ln Γτ − ln n!`
    ln_scale: f64,
    /// `sign(C) (−1)ⁿ`
    sign: f64,
}

/// Path classes out to a horizon, built by repeated convolution with the
/// hop table.
#[derive(Debug, Clone)]
pub struct PathClasses {
    terms: Vec<ClassTerm>,
    gamma_tau: f64,
    pub horizon: f64,
    pub path_count: f64,
    pub max_order: usize,
    pub tail_amplitude: f64,
}

#[derive(Clone, Copy, Default)]
struct Acc {
    coef: f64,
    majorant: f64,
    count: f64,
}

/// `max_{0≤u≤U} (Γu)ⁿ/n! e^{−Γu/2}` in logarithmic form.
fn ln_peak(n: usize, gamma: f64, u_max: f64, ln_fact: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let u = (2.0 * n as f64 / gamma).min(u_max);
    n as f64 * (gamma * u).ln() - ln_fact - 0.5 * gamma * u
}

impl PathClasses {
    pub fn build(cfg: &CavityConfig, table: &PathWeightTable, horizon: f64, weight_floor: f64, cap: usize) -> Result<Self> {
        check_gamma(cfg)?;
        if horizon > table.delay_cutoff * (1.0 + 1e-12) {
            return Err(Error::Horizon { requested: horizon, horizon: table.delay_cutoff });
        }
        let g = cfg.gamma_tau;
        let slack = 1e-12 * horizon.max(1.0);
        let hops: Vec<_> = table.entries.iter().filter(|e| e.delay <= horizon + slack).collect();
        let dropped_hops = table.dropped_weight;
        // shortest conceivable hop, whether or not it is in the table
        let min_hop = cfg.delay(1, 0).min(cfg.delay(0, 1));
        let n_cap = ((horizon + slack) / min_hop).floor() as usize;

        let mut terms = vec![ClassTerm { n: 0, transfer: false, delay: 0.0, phase: 0.0, ln_scale: 0.0, sign: 1.0 }];
        let mut layer: BTreeMap<(u32, u32), Acc> = BTreeMap::new();
        layer.insert((0, 0), Acc { coef: 1.0, majorant: 1.0, count: 1.0 });
        let mut path_count = 1.0;
        let mut ln_fact = 0.0;
        let mut n = 0usize;
        let mut tail = 0.0;
        let mut max_order = 0;
        while n < n_cap {
            n += 1;
            ln_fact += (n as f64).ln();
            let mut next: BTreeMap<(u32, u32), Acc> = BTreeMap::new();
            let mut kept_mass = 0.0;
            for (&(m1, m2), acc) in &layer {
                kept_mass += acc.majorant;
                for e in &hops {
                    let key = (m1 + e.two_n1, m2 + e.n2);
                    let delay = cfg.delay(key.0, key.1);
                    if delay > horizon + slack {
                        continue;
                    }
                    let slot = next.entry(key).or_default();
                    slot.coef += acc.coef * e.weight_over_gamma;
                    slot.majorant += acc.majorant * e.weight_over_gamma.abs();
                    slot.count += acc.count;
                }
            }
            let mut pruned = 0.0;
            next.retain(|_, acc| {
                if acc.majorant < weight_floor {
                    pruned += acc.majorant;
                    false
                } else {
                    true
                }
            });
            // first order in the discarded weight: each pruned class, and each
            // kept class extended by one below-floor hop, at its own peak
            let discarded = pruned + kept_mass * dropped_hops;
            if discarded > 0.0 {
                tail += (discarded.ln() + ln_peak(n, g, horizon, ln_fact)).exp();
            }
            if next.is_empty() {
                break;
            }
            max_order = n;
            for (&(m1, m2), acc) in &next {
                path_count += acc.count;
                if acc.coef == 0.0 {
                    continue;
                }
                terms.push(ClassTerm {
                    n: n as u32,
                    transfer: m1 % 2 == 1,
                    delay: cfg.delay(m1, m2),
                    phase: m1 as f64 * cfg.phase_d + m2 as f64 * cfg.phase_f,
                    ln_scale: acc.coef.abs().ln() + n as f64 * g.ln() - ln_fact,
                    sign: acc.coef.signum() * if n % 2 == 0 { 1.0 } else { -1.0 },
                });
            }
            if terms.len() > cap {
                return Err(Error::Resource {
                    reason: format!("more than {cap} path classes below horizon {horizon}"),
                    cap,
                    tail_bound: tail,
                });
            }
            layer = next;
        }
        terms.sort_by(|a, b| a.delay.total_cmp(&b.delay).then(a.n.cmp(&b.n)).then(a.phase.total_cmp(&b.phase)));
        Ok(Self {
            terms,
            gamma_tau: g,
            horizon,
            path_count,
            max_order,
            tail_amplitude: tail,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(same-atom sum, transfer sum, Σ|term|)` at time `t`.
    pub fn propagators(&self, t: f64) -> (Complex64, Complex64, f64) {
        let g = self.gamma_tau;
        let mut same = Complex64::new(0.0, 0.0);
        let mut cross = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for c in &self.terms {
            if c.delay > t {
                break;
            }
            let u = t - c.delay;
            let mag = if c.n == 0 {
                (-0.5 * g * u).exp()
            } else if u == 0.0 {
                0.0
            } else {
                (c.ln_scale + c.n as f64 * u.ln() - 0.5 * g * u).exp()
            };
            let term = Complex64::from_polar(c.sign * mag, c.phase);
            abs += mag;
            if c.transfer {
                cross += term;
            } else {
                same += term;
            }
        }
        (same, cross, abs)
    }
}

/// Amplitudes on `grid` (units of τ) by the class-summed path expansion.
pub fn simulate(cfg: &CavityConfig, initial: AmplitudeState, grid: &[f64], truncation: Truncation) -> Result<TimeSeries> {
    check_gamma(cfg)?;
    let t_max = grid.iter().copied().fold(0.0, f64::max);
    if grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::validation("grid", "times must be finite and non-negative"));
    }
    if t_max > truncation.delay_cutoff * (1.0 + 1e-12) {
        return Err(Error::Horizon { requested: t_max, horizon: truncation.delay_cutoff });
    }
    let qd = QuantizationData::from_config(cfg)?;
    let table = build_weight_table(cfg, &qd, truncation.delay_cutoff, truncation.weight_floor)?;
    let classes = PathClasses::build(cfg, &table, t_max.max(table.min_delay), truncation.weight_floor, truncation.max_classes)?;
    let vals: Vec<(Complex64, Complex64, f64)> = grid
        .par_iter()
        .map(|&t| {
            let (same, cross, abs) = classes.propagators(t);
            let b1 = same * initial.b1 + cross * initial.b2;
            let b2 = cross * initial.b1 + same * initial.b2;
            (b1, b2, abs * f64::EPSILON * 4.0)
        })
        .collect();
    let rounding = vals.iter().map(|v| v.2).fold(0.0, f64::max);
    let mut ts = TimeSeries::from_amplitudes(
        "pathsum",
        grid.to_vec(),
        vals.iter().map(|v| v.0).collect(),
        vals.iter().map(|v| v.1).collect(),
    );
    let tail = classes.tail_amplitude;
    ts.truncation = Some(TruncationInfo {
        delay_cutoff: truncation.delay_cutoff,
        weight_floor: truncation.weight_floor,
        table_entries: table.entries.len(),
        path_classes: classes.len(),
        path_count: classes.path_count,
        max_order: classes.max_order,
        tail_amplitude: tail,
        tail_probability: 2.0 * tail + tail * tail,
        rounding_estimate: rounding,
    });
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn fig2b() -> CavityConfig {
        CavityConfig::new(0.5, 1e4 * PI, 16.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn amplitude_state_normalisation() {
        assert!(AmplitudeState::new(c(1.0), c(1.0)).is_err());
        let s = AmplitudeState::normalized(c(1.0), c(-1.0)).unwrap();
        assert!((s.b1.norm_sqr() + s.b2.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(AmplitudeState::normalized(c(0.0), c(0.0)).is_err());
    }

    #[test]
    fn bare_path_is_exponential_decay() {
        let p = PhotonPath { start: Atom::One, hops: vec![], total_delay: 0.0, amplitude_factor: 1.0, phase: 0.0 };
        for t in [0.0, 0.3, 2.0] {
            let b = path_term(t, &p, 3.0);
            assert!((b.norm_sqr() - (-3.0 * t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn delayed_term_vanishes_at_onset() {
        let p = PhotonPath {
            start: Atom::One,
            hops: vec![Hop { from: Atom::One, to: Atom::Two, two_n1: 1, n2: 1 }],
            total_delay: 1.0,
            amplitude_factor: -0.4,
            phase: 0.7,
        };
        assert_eq!(path_term(1.0, &p, 2.0), Complex64::new(0.0, 0.0));
        assert_eq!(path_term(0.5, &p, 2.0), Complex64::new(0.0, 0.0));
        assert!(path_term(1.0 + 1e-9, &p, 2.0).norm() < 1e-8);
        // (−1)¹ · (−0.4) · Γu · e^{−Γu/2}
        let v = path_term(1.5, &p, 2.0);
        assert!((v - Complex64::from_polar(0.4 * 1.0 * (-0.5f64).exp(), 0.7)).norm() < 1e-15);
    }

    #[test]
    fn hand_enumeration_small_horizon() {
        let cfg = CavityConfig::new(0.5, 10.0, 16.0, 0.0, 0.0).unwrap();
        let qd = QuantizationData::from_config(&cfg).unwrap();
        let table = build_weight_table(&cfg, &qd, 1.1, 0.0).unwrap();
        let paths = enumerate_paths(&cfg, Atom::One, &table, 1.1, 0.0, 1000).unwrap();
        let cross: Vec<Vec<(u32, u32)>> = paths
            .iter()
            .filter(|p| p.end_atom() == Atom::Two)
            .map(|p| p.hops.iter().map(|h| (h.two_n1, h.n2)).collect())
            .collect();
        let expected: Vec<Vec<(u32, u32)>> = vec![vec![(1, 0)], vec![(1, 1)], vec![(0, 1), (1, 0)], vec![(1, 0), (0, 1)]];
        assert_eq!(cross, expected);
        // the identity path comes first
        assert_eq!(paths[0].order(), 0);
        for p in &paths {
            let odd = p.hops.iter().filter(|h| h.two_n1 % 2 == 1).count() % 2 == 1;
            assert_eq!(p.end_atom() == Atom::Two, odd);
            for w in p.hops.windows(2) {
                assert_eq!(w[0].to, w[1].from);
            }
        }
    }

    #[test]
    fn path_cap_is_enforced() {
        let cfg = CavityConfig::new(0.5, 10.0, 16.0, 0.0, 0.0).unwrap();
        let qd = QuantizationData::from_config(&cfg).unwrap();
        let table = build_weight_table(&cfg, &qd, 3.0, 0.0).unwrap();
        let err = enumerate_paths(&cfg, Atom::One, &table, 3.0, 0.0, 10).unwrap_err();
        assert!(matches!(err, Error::Resource { cap: 10, .. }));
    }

    #[test]
    fn classes_match_explicit_paths() {
        for (eps, phd, phf) in [(0.5, 0.0, 0.0), (0.3, 1.1, -0.4), (0.7, 2.0, 0.5)] {
            let cfg = CavityConfig::new(eps, 8.0, 5.0, phd, phf).unwrap();
            let qd = QuantizationData::from_config(&cfg).unwrap();
            let horizon = 2.2;
            let table = build_weight_table(&cfg, &qd, horizon, 0.0).unwrap();
            let paths = enumerate_paths(&cfg, Atom::One, &table, horizon, 0.0, 200_000).unwrap();
            let grid = uniform_grid(horizon, 45).unwrap();
            let (e1, e2) = sum_paths(&paths, &grid, cfg.gamma_tau);
            let classes = PathClasses::build(&cfg, &table, horizon, 0.0, 1_000_000).unwrap();
            assert_eq!(classes.path_count as usize, paths.len());
            for (i, &t) in grid.iter().enumerate() {
                let (same, cross, _) = classes.propagators(t);
                assert!((same - e1[i]).norm() < 1e-12, "eps={eps} t={t}");
                assert!((cross - e2[i]).norm() < 1e-12, "eps={eps} t={t}");
            }
        }
    }

    #[test]
    fn causality_is_exact() {
        let cfg = fig2b();
        let grid = uniform_grid(0.5, 101).unwrap();
        let ts = simulate(&cfg, AmplitudeState::excited(Atom::One), &grid, Truncation::for_horizon(3.0)).unwrap();
        for (t, p2) in ts.t.iter().zip(&ts.p2) {
            if *t < 0.5 {
                assert_eq!(*p2, 0.0, "t={t}");
            }
        }
    }

    #[test]
    fn horizon_is_enforced() {
        let cfg = fig2b();
        let grid = uniform_grid(4.0, 11).unwrap();
        let err = simulate(&cfg, AmplitudeState::excited(Atom::One), &grid, Truncation::for_horizon(3.0)).unwrap_err();
        assert!(matches!(err, Error::Horizon { .. }));
        let low = CavityConfig::new(0.5, 10.0, 1e-7, 0.0, 0.0).unwrap();
        assert!(simulate(&low, AmplitudeState::excited(Atom::One), &grid, Truncation::for_horizon(4.0)).is_err());
    }

    #[test]
    fn probabilities_bounded_and_continuous() {
        let cfg = CavityConfig::new(0.5, 20.0 * PI, 16.0, 0.0, 0.0).unwrap();
        let grid = uniform_grid(3.0, 3001).unwrap();
        let ts = simulate(&cfg, AmplitudeState::excited(Atom::One), &grid, Truncation::for_horizon(3.0)).unwrap();
        for i in 0..grid.len() {
            assert!(ts.p1[i] + ts.p2[i] <= 1.0 + 1e-9);
        }
        assert_eq!(ts.p1[0], 1.0);
        // no jumps at the path thresholds
        for i in 1..grid.len() {
            assert!((ts.b1[i] - ts.b1[i - 1]).norm() < 0.05);
            assert!((ts.b2[i] - ts.b2[i - 1]).norm() < 0.05);
        }
    }

    #[test]
    fn second_atom_peaks_near_round_trip() {
        let cfg = CavityConfig::new(0.1, 1e4 * PI, 16.0, 0.0, 0.0).unwrap();
        let grid = uniform_grid(1.5, 1501).unwrap();
        let ts = simulate(&cfg, AmplitudeState::excited(Atom::One), &grid, Truncation::for_horizon(1.5)).unwrap();
        let (imax, pmax) = ts.p2.iter().enumerate().filter(|(i, _)| grid[*i] >= 0.9).fold((0, 0.0), |b, (i, &p)| if p > b.1 { (i, p) } else { b });
        let background = ts.p2.iter().zip(&grid).filter(|(_, &t)| t < 0.9).map(|(p, _)| *p).fold(0.0, f64::max);
        assert!(grid[imax] > 1.0 && grid[imax] < 1.5);
        assert!(pmax > 10.0 * background.max(1e-300), "{pmax} vs {background}");
    }

    #[test]
    fn atom_exchange_symmetry() {
        let cfg = CavityConfig::new(0.3, 15.0, 4.0, 0.4, 1.3).unwrap();
        let grid = uniform_grid(2.0, 51).unwrap();
        let tr = Truncation::for_horizon(2.0);
        let a = simulate(&cfg, AmplitudeState::excited(Atom::One), &grid, tr).unwrap();
        let b = simulate(&cfg, AmplitudeState::excited(Atom::Two), &grid, tr).unwrap();
        assert_eq!(a.b1, b.b2);
        assert_eq!(a.b2, b.b1);
    }

    #[test]
    fn tighter_floor_stays_within_tail() {
        let cfg = CavityConfig::new(0.5, 20.0 * PI, 16.0, 0.0, 0.0).unwrap();
        let grid = uniform_grid(3.0, 301).unwrap();
        let mut tr = Truncation::for_horizon(3.0);
        tr.weight_floor = 1e-6;
        let coarse = simulate(&cfg, AmplitudeState::excited(Atom::One), &grid, tr).unwrap();
        tr.weight_floor = 1e-7;
        let fine = simulate(&cfg, AmplitudeState::excited(Atom::One), &grid, tr).unwrap();
        let diff = coarse.max_discrepancy(&fine).unwrap();
        let bound = coarse.truncation.unwrap().tail_probability;
        assert!(diff <= bound, "{diff:e} > {bound:e}");
    }

    #[test]
    fn csv_layout() {
        let ts = TimeSeries::from_amplitudes("pathsum", vec![0.0, 1.0], vec![c(1.0), c(0.5)], vec![c(0.0), c(0.25)]);
        let mut buf = Vec::new();
        ts.write_csv(&mut buf, &["ellipseqed test".into()]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "# ellipseqed test");
        assert_eq!(lines[1], "t_over_tau,P1,P2,reB1,imB1,reB2,imB2");
        assert!(lines[3].starts_with("1.0000000000000000e0,2.5000000000000000e-1,6.2500000000000000e-2,"));
    }
}
