//! Dormand–Prince 5(4) with embedded error control, on complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible |step| relative to the interval length.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h_min_rel: 1e-12, max_steps: 200_000 }
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<Complex64>>,
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy(y: &[Complex64], h: f64, ks: &[Vec<Complex64>], coeffs: &[f64]) -> Vec<Complex64> {
    let mut out = y.to_vec();
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            for (o, v) in out.iter_mut().zip(k) {
                *o += v * (h * c);
            }
        }
    }
    out
}

fn rms_norm(v: &[Complex64], scale: &[f64]) -> f64 {
    let sum: f64 = v.iter().zip(scale).map(|(x, s)| (x.norm() / s).powi(2)).sum();
    (sum / v.len().max(1) as f64).sqrt()
}

/// Integrates y' = f(t, y) from t0 to t1 (either direction). Every accepted
/// step is recorded when `record` is set; the endpoints always are.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[Complex64], t1: f64, opts: &OdeOptions, record: bool) -> Result<OdeSolution>
where
    F: FnMut(f64, &[Complex64]) -> Result<Vec<Complex64>>,
{
    let mut sol = OdeSolution { t: vec![t0], y: vec![y0.to_vec()], accepted: 0, rejected: 0 };
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(sol);
    }
    let dir = span.signum();
    let fail = |t: f64, reason: String| Error::StepFailure { s_last_good: t, reason };
    let wrap = |t: f64, e: Error| fail(t, e.to_string());

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k0 = f(t, &y).map_err(|e| wrap(t, e))?;
    let scale0: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
    let (d0, d1) = (rms_norm(&y, &scale0), rms_norm(&k0, &scale0));
    let mut h = if d0 > 1e-5 && d1 > 1e-5 { 0.01 * d0 / d1 } else { 1e-6 };
    h = h.min(span.abs()) * dir;
    let h_min = opts.h_min_rel * span.abs();

    while (t1 - t) * dir > 0.0 {
        if sol.accepted + sol.rejected >= opts.max_steps {
            return Err(fail(t, format!("step budget of {} exhausted", opts.max_steps)));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut ks = vec![k0.clone()];
        for i in 1..7 {
            let yi = axpy(&y, h, &ks, &A[i][..i]);
            ks.push(f(t + C[i] * h, &yi).map_err(|e| wrap(t, e))?);
        }
        let y_new = axpy(&y, h, &ks[..6], &A[6]);
        let err_vec = axpy(&vec![Complex64::new(0.0, 0.0); y.len()], h, &ks, &E);
        let scale: Vec<f64> =
            y.iter().zip(&y_new).map(|(a, b)| opts.atol + opts.rtol * a.norm().max(b.norm())).collect();
        let err = rms_norm(&err_vec, &scale);
        if !err.is_finite() || y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            sol.rejected += 1;
            h *= 0.25;
        } else if err <= 1.0 {
            t += h;
            y = y_new;
            k0 = ks.swap_remove(6);
            sol.accepted += 1;
            if record || (t1 - t) * dir <= 0.0 {
                sol.t.push(t);
                sol.y.push(y.clone());
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            sol.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h.abs() < h_min && (t1 - t) * dir > h_min {
            return Err(fail(t, format!("step size underflow ({:.3e})", h.abs())));
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_rotation() {
        let y0 = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let sol = dopri5(
            |_, y| Ok(vec![y[0], y[1] * Complex64::new(0.0, 1.0)]),
            0.0,
            &y0,
            2.0,
            &OdeOptions::default(),
            false,
        )
        .unwrap();
        let y = sol.y.last().unwrap();
        assert!((y[0].re - 2f64.exp()).abs() < 1e-8);
        assert!((y[1] - Complex64::new(2f64.cos(), 2f64.sin())).norm() < 1e-9);
        assert_eq!(sol.t.len(), 2);
    }

    #[test]
    fn backwards_and_zero_length() {
        let y0 = [Complex64::new(1.0, 0.0)];
        let sol = dopri5(|t, _| Ok(vec![Complex64::new(2.0 * t, 0.0)]), 1.0, &y0, 0.0, &OdeOptions::default(), true).unwrap();
        assert!((sol.y.last().unwrap()[0].re - 0.0).abs() < 1e-10);
        let same = dopri5(|_, y| Ok(y.to_vec()), 1.0, &y0, 1.0, &OdeOptions::default(), true).unwrap();
        assert_eq!(same.t, vec![1.0]);
    }

    #[test]
    fn blow_up_reports_last_good_time() {
        // y' = y², y(0) = 1 has a pole at t = 1
        let y0 = [Complex64::new(1.0, 0.0)];
        let err = dopri5(|_, y| Ok(vec![y[0] * y[0]]), 0.0, &y0, 2.0, &OdeOptions::default(), false).unwrap_err();
        match err {
            Error::StepFailure { s_last_good, .. } => assert!(s_last_good > 0.9 && s_last_good < 1.0),
            other => panic!("unexpected {other}"),
        }
    }
}
