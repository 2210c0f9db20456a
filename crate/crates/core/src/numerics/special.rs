//! Sine/cosine integrals and the complex gamma function.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Returns `(Si(x), Ci(x))` for `x > 0`.
///
/// Power series below `x = 2`, Lentz continued fraction for `E1(ix)` above.
pub fn si_ci(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "si_ci requires x > 0, got {x}");
    if x <= 2.0 {
        let x2 = x * x;
        let mut si = 0.0;
        let mut ci = 0.0;
        // term_k = (-1)^k x^(2k+1) / (2k+1)!  and  (-1)^k x^(2k) / (2k)!
        let mut odd = x;
        let mut even = 1.0;
        for k in 0..40 {
            let kf = k as f64;
            si += odd / (2.0 * kf + 1.0);
            if k > 0 {
                ci += even / (2.0 * kf);
            }
            even = -even * x2 / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
            odd = -odd * x2 / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
            if odd.abs() < 1e-18 * si.abs() && even.abs() < 1e-18 {
                break;
            }
        }
        (si, EULER_GAMMA + x.ln() + ci)
    } else {
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 2..100_000 {
            let a = -((i - 1) as f64).powi(2);
            b += 2.0;
            d = (d * a + b).inv();
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(x.cos(), -x.sin());
        (FRAC_PI_2 + h.im, -h.re)
    }
}

/// `Cin(x) = ∫₀ˣ (1 − cos t)/t dt`, computed without cancellation for small `x`.
pub fn cin(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x <= 2.0 {
        let x2 = x * x;
        let mut term = x2 / 2.0; // x^2/2!
        let mut sum = 0.0;
        for k in 1..40 {
            let kf = k as f64;
            sum += term / (2.0 * kf);
            term = -term * x2 / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        EULER_GAMMA + x.ln() - si_ci(x).1
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex gamma function via the Lanczos approximation with reflection.
pub fn gamma_c(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::from(PI) / (s * gamma_c(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::from(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// `ln n!` for moderate `n` by direct summation, cached by the caller when hot.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_ci_reference_values() {
        // Abramowitz & Stegun table 5.1
        let (si, ci) = si_ci(1.0);
        assert!((si - 0.946_083_070_367_183).abs() < 1e-14);
        assert!((ci - 0.337_403_922_900_968_1).abs() < 1e-14);
        let (si, ci) = si_ci(10.0);
        assert!((si - 1.658_347_594_218_874).abs() < 1e-13);
        assert!((ci + 0.045_456_433_004_455_37).abs() < 1e-13);
    }

    #[test]
    fn si_ci_continuous_at_switch() {
        let (s1, c1) = si_ci(2.0);
        let (s2, c2) = si_ci(2.0 + 1e-12);
        assert!((s1 - s2).abs() < 1e-11 && (c1 - c2).abs() < 1e-11);
    }

    #[test]
    fn cin_matches_definition() {
        for &x in &[0.3, 1.7, 2.5, 7.0] {
            let q = crate::numerics::quadrature::integrate(
                |t: f64| if t == 0.0 { 0.0 } else { (1.0 - t.cos()) / t },
                0.0,
                x,
                Default::default(),
            )
            .unwrap();
            assert!((cin(x) - q.value).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn gamma_values() {
        let g = gamma_c(Complex64::new(5.0, 0.0));
        assert!((g.re - 24.0).abs() < 1e-11 && g.im.abs() < 1e-12);
        // |Γ(1 + iy)|² = πy / sinh(πy)
        let y = 0.37;
        let g = gamma_c(Complex64::new(1.0, y));
        assert!((g.norm_sqr() - PI * y / (PI * y).sinh()).abs() < 1e-13);
        let g = gamma_c(Complex64::new(-0.5, 0.0));
        assert!((g.re + 2.0 * PI.sqrt()).abs() < 1e-12);
    }
}
