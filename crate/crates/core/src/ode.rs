//! Dormand–Prince 5(4) integrator for a scalar complex ODE `y' = f(t, y)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Smallest step allowed before giving up.
    pub min_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            max_steps: 5_000_000,
            min_step: 1e-14,
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
// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates from `(t0, y0)` to `t1 ≥ t0`. `h0` seeds the first step.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: Complex64,
    t1: f64,
    h0: f64,
    opts: &OdeOptions,
) -> Result<Complex64>
where
    F: FnMut(f64, Complex64) -> Complex64,
{
    if !(t1 >= t0) {
        return Err(Error::Integration {
            reached: t0,
            reason: format!("end time {t1} precedes start time {t0}"),
        });
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }

    let mut t = t0;
    let mut y = y0;
    let mut h = h0.clamp(opts.min_step.min(span), span);
    let mut k1 = f(t, y);
    let mut steps = 0usize;

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::Integration {
                reached: t,
                reason: format!("step budget of {} exhausted", opts.max_steps),
            });
        }
        steps += 1;

        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        let k2 = f(t + C2 * h, y + h * (A21 * k1));
        let k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(
            t + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        );
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(t + h, y_new);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

        let scale = opts.abs_tol + opts.rel_tol * y.norm().max(y_new.norm());
        let ratio = ((err.re / scale).powi(2) + (err.im / scale).powi(2)) / 2.0;
        let ratio = ratio.sqrt();
        if !ratio.is_finite() {
            return Err(Error::Integration {
                reached: t,
                reason: "non-finite error estimate".into(),
            });
        }

        if ratio <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k7;
        }

        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= if ratio <= 1.0 { factor } else { factor.min(1.0) };
        if h < opts.min_step && t1 - t >= opts.min_step {
            return Err(Error::Integration {
                reached: t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_with_rotation() {
        let rate = Complex64::new(-0.3, 2.0);
        let y = integrate(
            |_, y| rate * y,
            0.0,
            Complex64::new(1.0, 0.0),
            5.0,
            0.01,
            &OdeOptions::default(),
        )
        .unwrap();
        let exact = (rate * 5.0).exp();
        assert!((y - exact).norm() < 1e-9);
    }

    #[test]
    fn zero_span_is_identity() {
        let y0 = Complex64::new(0.3, -0.2);
        let y = integrate(|_, y| y, 1.0, y0, 1.0, 0.1, &OdeOptions::default()).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn span_shorter_than_min_step() {
        let y0 = Complex64::new(1.0, 0.0);
        let y = integrate(|_, y| y, 1.0, y0, 1.0 + 1e-16, 0.1, &OdeOptions::default()).unwrap();
        assert!((y - y0).norm() < 1e-15);
    }

    #[test]
    fn reports_failure_time() {
        let opts = OdeOptions {
            max_steps: 10,
            ..Default::default()
        };
        let err = integrate(
            |_, y| Complex64::new(0.0, 1000.0) * y,
            0.0,
            Complex64::new(1.0, 0.0),
            100.0,
            1e-3,
            &opts,
        )
        .unwrap_err();
        match err {
            Error::Integration { reached, .. } => assert!(reached > 0.0 && reached < 100.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
