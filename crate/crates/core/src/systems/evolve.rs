//! Forward evolution in s of (a_n, b_n, B_n, B̂_n) under the closed
//! first-order differential system.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lax::{compute_lax, LaxQuantities};
use crate::linalg::CMatrix;
use crate::mvop::MvopFamily;
use crate::weight::Weight;

use super::continuous::closed_flow;
use super::ode::{dopri5, OdeOptions};

/// The flow has 1/s and 1/s² coefficients; integration never starts closer
/// to the origin than this.
pub const MIN_START: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct EvolvedState {
    pub n: usize,
    pub s: f64,
    pub a: CMatrix,
    pub b: CMatrix,
    #[serde(rename = "B_n")]
    pub bn: CMatrix,
    #[serde(rename = "B_hat")]
    pub bhat: CMatrix,
}

impl EvolvedState {
    pub fn from_lax(lq: &LaxQuantities) -> Self {
        EvolvedState { n: lq.n, s: lq.s, a: lq.a.clone(), b: lq.b.clone(), bn: lq.bn.clone(), bhat: lq.bhat.clone() }
    }

    fn pack(&self) -> Vec<Complex64> {
        [&self.a, &self.b, &self.bn, &self.bhat].iter().flat_map(|m| m.entries()).collect()
    }

    fn unpack(n: usize, s: f64, dim: usize, v: &[Complex64]) -> Self {
        let block = dim * dim;
        let m = |k: usize| CMatrix::from_entries(dim, &v[k * block..(k + 1) * block]);
        EvolvedState { n, s, a: m(0), b: m(1), bn: m(2), bhat: m(3) }
    }

    /// Largest relative deviation of (a, b, B_n, B̂_n) from another state.
    pub fn max_rel_deviation(&self, other: &EvolvedState) -> f64 {
        [(&self.a, &other.a), (&self.b, &other.b), (&self.bn, &other.bn), (&self.bhat, &other.bhat)]
            .iter()
            .map(|(x, y)| (*x - *y).fro() / (1.0 + y.fro()))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub n: usize,
    pub alpha: f64,
    pub points: Vec<EvolvedState>,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> &EvolvedState {
        self.points.last().expect("trajectory has at least the initial point")
    }

    /// One row per point: s, then re/im of the row-major entries of
    /// a, b, B_n, B̂_n.
    pub fn to_csv(&self) -> String {
        let dim = self.points[0].a.dim();
        let mut header = vec!["s".to_string()];
        for name in ["a", "b", "Bn", "Bhat"] {
            for i in 0..dim {
                for j in 0..dim {
                    header.push(format!("{name}_{i}{j}_re"));
                    header.push(format!("{name}_{i}{j}_im"));
                }
            }
        }
        let mut out = header.join(",") + "\n";
        for p in &self.points {
            let mut row = vec![format!("{}", p.s)];
            for z in p.pack() {
                row.push(format!("{:.16e}", z.re));
                row.push(format!("{:.16e}", z.im));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Integrates the closed system from the state `init` (at s0 = init.s) to s1.
pub fn evolve_ode(init: &LaxQuantities, s1: f64, opts: &OdeOptions, record: bool) -> Result<Trajectory> {
    let s0 = init.s;
    if !(s0 >= MIN_START) || !(s1 >= MIN_START) || !s1.is_finite() {
        return Err(Error::invalid(format!("evolution needs s0, s1 ≥ {MIN_START}, got s0 = {s0}, s1 = {s1}")));
    }
    let (n, dim, alpha) = (init.n, init.dim(), init.alpha);
    let bc = init.b_const.clone();
    let y0 = EvolvedState::from_lax(init).pack();
    let sol = dopri5(
        |s, y| {
            let st = EvolvedState::unpack(n, s, dim, y);
            let rhs = closed_flow(n, alpha, s, &bc, &st.a, &st.b, &st.bn, &st.bhat)?;
            Ok(rhs.iter().flat_map(|m| (m * (1.0 / s)).entries()).collect())
        },
        s0,
        &y0,
        s1,
        opts,
        record,
    )?;
    let points = sol.t.iter().zip(&sol.y).map(|(&s, y)| EvolvedState::unpack(n, s, dim, y)).collect();
    Ok(Trajectory { n, alpha, points, accepted: sol.accepted, rejected: sol.rejected })
}

/// Initial data at s0 from the moment route, then [`evolve_ode`] to s1.
pub fn evolve_from_weight(weight: &Weight, n: usize, s0: f64, s1: f64, opts: &OdeOptions, record: bool) -> Result<Trajectory> {
    let fam = MvopFamily::new(weight.at_s(s0)?, n)?;
    evolve_ode(&compute_lax(&fam, n)?, s1, opts, record)
}
