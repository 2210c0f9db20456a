//! Adaptive Dormand–Prince 5(4) integrator for real first-order systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            initial_step: 1e-4,
            max_steps: 5_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `dy/dt = rhs(t, y)` from `t0` and record the state at every
/// abscissa in `outputs` (monotone in the direction of integration).
pub fn integrate<F>(rhs: F, t0: f64, y0: &[f64], outputs: &[f64], opts: OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut results = Vec::with_capacity(outputs.len());
    let Some(&last) = outputs.last() else {
        return Ok(results);
    };
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    let mut h = opts.initial_step.abs() * dir;

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];

    rhs(t, &y, &mut k1);
    let mut steps = 0usize;
    for &target in outputs {
        if (target - t) * dir < 0.0 {
            return Err(Error::Integration {
                at: target,
                reason: "output abscissae are not monotone".into(),
            });
        }
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration {
                    at: t,
                    reason: format!("step budget {} exhausted", opts.max_steps),
                });
            }
            let natural = h;
            let mut hit = false;
            if (t + h - target) * dir >= 0.0 {
                h = target - t;
                hit = true;
            }

            for i in 0..dim {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            rhs(t + C2 * h, &tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(t + C3 * h, &tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(t + C4 * h, &tmp, &mut k4);
            for i in 0..dim {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(t + C5 * h, &tmp, &mut k5);
            for i in 0..dim {
                tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            rhs(t + h, &tmp, &mut k6);
            for i in 0..dim {
                y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            rhs(t + h, &y_new, &mut k7);

            let mut err = 0.0f64;
            for i in 0..dim {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                return Err(Error::Integration {
                    at: t,
                    reason: "non-finite state".into(),
                });
            }

            if err <= 1.0 {
                t = if hit { target } else { t + h };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = if hit { natural.abs().max(h.abs() * factor) * dir } else { h * factor };
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
            if h.abs() < 1e-15 * t.abs().max(1e-300) {
                return Err(Error::Integration {
                    at: t,
                    reason: "step size underflow (stiff or singular system)".into(),
                });
            }
        }
        results.push(y.clone());
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let ts: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let out = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[0.0, 1.0],
            &ts,
            OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in ts.iter().zip(&out) {
            assert!((y[0] - t.sin()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn backwards_in_time() {
        let out = integrate(|_, y, dy| dy[0] = y[0], 1.0, &[1.0], &[0.0], OdeOptions::default()).unwrap();
        assert!((out[0][0] - (-1.0f64).exp()).abs() < 1e-11);
    }
}
