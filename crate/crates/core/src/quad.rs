//! Double-exponential quadrature on (0, ∞).
//!
//! The substitution x = exp((π/2)·sinh u) maps (0, ∞) onto ℝ; integrands that
//! decay like e^{−x} at infinity and like e^{−s/x} (or a positive power) at the
//! origin then decay double-exponentially in u, and the trapezoidal rule in u
//! converges exponentially. Levels halve the step and reuse previous nodes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Clone, Copy, Debug)]
pub struct DeOptions {
    /// Convergence threshold on `|S_h − S_{2h}|` relative to `∫|f|`, per component.
    pub tol: f64,
    pub min_level: usize,
    pub max_level: usize,
    /// Truncation of the u-range.
    pub u_max: f64,
    /// Nodes outside (x_min, x_max) contribute nothing.
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for DeOptions {
    fn default() -> Self {
        DeOptions { tol: 1e-14, min_level: 4, max_level: 10, u_max: 6.5, x_min: 1e-300, x_max: 5e3 }
    }
}

const H0: f64 = 0.5;

/// Integrates a vector-valued function over (0, ∞). `f(x, out)` writes
/// `len` components into `out`.
pub fn integrate_vec<F>(len: usize, opts: &DeOptions, mut f: F) -> Result<Vec<Complex64>>
where
    F: FnMut(f64, &mut [Complex64]),
{
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    let mut abs_sum = vec![0.0f64; len];
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut prev: Option<Vec<Complex64>> = None;

    let mut eval = |u: f64, sum: &mut [Complex64], abs_sum: &mut [f64], buf: &mut [Complex64]| {
        let t = std::f64::consts::FRAC_PI_2 * u.sinh();
        let x = t.exp();
        if !(x > opts.x_min && x < opts.x_max) {
            return true;
        }
        let w = x * std::f64::consts::FRAC_PI_2 * u.cosh();
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        f(x, buf);
        let mut finite = true;
        for i in 0..len {
            let v = buf[i] * w;
            finite &= v.re.is_finite() && v.im.is_finite();
            sum[i] += v;
            abs_sum[i] += v.norm();
        }
        finite
    };

    for level in 0..=opts.max_level {
        let h = H0 / (1u64 << level) as f64;
        let k_max = (opts.u_max / h).floor() as i64;
        let mut finite = true;
        if level == 0 {
            for k in -k_max..=k_max {
                finite &= eval(k as f64 * h, &mut sum, &mut abs_sum, &mut buf);
            }
        } else {
            // only the new odd nodes
            let mut k = -k_max + if k_max % 2 == 0 { 1 } else { 0 };
            while k <= k_max {
                finite &= eval(k as f64 * h, &mut sum, &mut abs_sum, &mut buf);
                k += 2;
            }
        }
        if !finite {
            return Err(Error::NonFinite("quadrature integrand".into()));
        }
        let current: Vec<Complex64> = sum.iter().map(|v| v * h).collect();
        if let Some(p) = &prev {
            if level >= opts.min_level {
                let converged = (0..len).all(|i| {
                    let scale = abs_sum[i] * h;
                    (current[i] - p[i]).norm() <= opts.tol * scale.max(f64::MIN_POSITIVE)
                });
                if converged {
                    return Ok(current);
                }
            }
        }
        prev = Some(current);
    }
    Err(Error::QuadratureFailure(format!("no convergence after {} levels", opts.max_level)))
}

/// Scalar convenience wrapper.
pub fn integrate<F>(opts: &DeOptions, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let v = integrate_vec(1, opts, |x, out| out[0] = Complex64::new(f(x), 0.0))?;
    Ok(v[0].re)
}

/// Integrates a list of matrix-valued functions sharing one evaluation.
pub fn integrate_matrices<F>(dim: usize, count: usize, opts: &DeOptions, mut f: F) -> Result<Vec<CMatrix>>
where
    F: FnMut(f64) -> Vec<CMatrix>,
{
    let nn = dim * dim;
    let flat = integrate_vec(count * nn, opts, |x, out| {
        let ms = f(x);
        for (k, m) in ms.iter().enumerate() {
            out[k * nn..(k + 1) * nn].copy_from_slice(&m.entries());
        }
    })?;
    Ok((0..count).map(|k| CMatrix::from_entries(dim, &flat[k * nn..(k + 1) * nn])).collect())
}
