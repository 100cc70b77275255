//! Scalar reduction: for N = 1, B = 0 the variable a_n(s) satisfies the
//! Painlevé III equation
//! ä = ȧ²/a − ȧ/s + (2n+α+1)a²/s² + a³/s² + α/s − 1/a.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lax::compute_lax;
use crate::mvop::MvopFamily;
use crate::weight::Weight;

use super::continuous::residual_p_system;

#[derive(Clone, Debug, Serialize)]
pub struct PiiiScan {
    pub n: usize,
    /// Interior grid points where the residuals are evaluated.
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    /// |ä − right-hand side| with derivatives from grid differences.
    pub piii: Vec<f64>,
    /// Relative residual of the first-order equation for s ȧ_n at each
    /// point, with a central difference of step `h_first`.
    pub first_order: Vec<f64>,
    pub max_piii: f64,
    pub max_first_order: f64,
}

/// Scans the Painlevé III residual over a uniform grid of s values. Second
/// and first derivatives come from central differences on the grid itself;
/// the first-order check uses its own step `h_first`.
pub fn scalar_piii_residual(weight: &Weight, n: usize, s_grid: &[f64], h_first: f64) -> Result<PiiiScan> {
    if weight.dim() != 1 || weight.b().fro() != 0.0 {
        return Err(Error::invalid("the Painlevé III reduction needs N = 1 and B = 0"));
    }
    if s_grid.len() < 3 {
        return Err(Error::invalid(format!("the s grid needs at least 3 points, got {}", s_grid.len())));
    }
    let ds = s_grid[1] - s_grid[0];
    let uniform = s_grid.windows(2).all(|w| ((w[1] - w[0]) - ds).abs() <= 1e-9 * ds.abs().max(1.0));
    if !(ds > 0.0) || !uniform || !(s_grid[0] > 0.0) {
        return Err(Error::invalid("the s grid must be positive, increasing and uniform"));
    }
    let a: Vec<f64> = s_grid
        .iter()
        .map(|&s| Ok(compute_lax(&MvopFamily::new(weight.at_s(s)?, n)?, n)?.a.get(0, 0).re))
        .collect::<Result<_>>()?;
    let (nf, al) = (n as f64, weight.alpha());
    let mut scan = PiiiScan {
        n,
        s: Vec::new(),
        a: Vec::new(),
        piii: Vec::new(),
        first_order: Vec::new(),
        max_piii: 0.0,
        max_first_order: 0.0,
    };
    for i in 1..s_grid.len() - 1 {
        let (s, ai) = (s_grid[i], a[i]);
        if ai == 0.0 {
            return Err(Error::invalid(format!("a_n vanishes at s = {s}")));
        }
        let ad = (a[i + 1] - a[i - 1]) / (2.0 * ds);
        let add = (a[i + 1] - 2.0 * ai + a[i - 1]) / (ds * ds);
        let rhs = ad * ad / ai - ad / s + (2.0 * nf + al + 1.0) * ai * ai / (s * s) + ai.powi(3) / (s * s) + al / s - 1.0 / ai;
        let res = (add - rhs).abs();
        let rep = residual_p_system(weight, n, s, h_first, f64::INFINITY)?;
        let first = rep.find("p3_a", n).map(|e| e.rel_residual).unwrap_or(f64::NAN);
        scan.s.push(s);
        scan.a.push(ai);
        scan.piii.push(res);
        scan.first_order.push(first);
        scan.max_piii = scan.max_piii.max(res);
        scan.max_first_order = scan.max_first_order.max(first);
    }
    Ok(scan)
}

/// Uniform grid from `s0` to `s1` (inclusive) with spacing close to `ds`.
pub fn uniform_grid(s0: f64, s1: f64, ds: f64) -> Result<Vec<f64>> {
    if !(s1 > s0) || !(ds > 0.0) {
        return Err(Error::invalid(format!("grid needs s1 > s0 and ds > 0, got {s0}, {s1}, {ds}")));
    }
    let k = ((s1 - s0) / ds).round().max(1.0) as usize;
    Ok((0..=k).map(|i| s0 + (s1 - s0) * i as f64 / k as f64).collect())
}
