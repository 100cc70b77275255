//! Degree recursion for (a_n, b_n, B_n, B̂_n) from a_0 alone, in the frame
//! where γ_0 = I.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lax::compute_lax;
use crate::linalg::CMatrix;
use crate::mvop::MvopFamily;
use crate::weight::Weight;

use super::inv;

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapStep {
    pub n: usize,
    pub a: CMatrix,
    pub b: CMatrix,
    #[serde(rename = "B_n")]
    pub bn: CMatrix,
    #[serde(rename = "B_hat")]
    pub bhat: CMatrix,
    pub alpha_rec: CMatrix,
    pub beta_rec: Option<CMatrix>,
    /// Largest relative deviation of (a, b, B_n, B̂_n) from the moment route.
    pub deviation: f64,
}

/// Deviation beyond which the recursion is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e-2;
const GAMMA0_TOL: f64 = 1e-10;

/// Runs the recursion up to degree `n_max`:
/// 1. b_{n+1} = a_n⁻¹[s a_n − (2n+α+1)a_n² − a_n³ − a_n(B + B_n*)a_n − b_n a_n],
/// 2. B̂_{n+1} = (s − b_{n+1}) a_n⁻¹ B̂_n a_n (s − b_{n+1})⁻¹,
/// 3. B_{n+1} = β_{n+1}^{−*} B_n β_{n+1}* with β_{n+1} from the telescoped sum,
/// 4. a_{n+1} = (b_{n+1}² − s b_{n+1}) a_n⁻¹ β_{n+1}⁻¹,
///
/// starting from b_0 = 0, B_0 = B̂_0 = B and a_0 (default s M_{−1} M_0⁻¹).
/// Each step is compared with the moment route; a deviation above
/// [`DIVERGENCE_GUARD`] stops the recursion with `IterationDiverged`.
pub fn bootstrap_discrete(weight: &Weight, a0: Option<CMatrix>, n_max: usize) -> Result<Vec<BootstrapStep>> {
    let dim = weight.dim();
    let id = CMatrix::identity(dim);
    let m0 = weight.moment(0)?;
    if (&m0 - &id).fro() > GAMMA0_TOL {
        return Err(Error::invalid("the bootstrap needs a weight normalized so that γ_0 = I (set normalize_gamma0)"));
    }
    let s = weight.s();
    let alpha = weight.alpha();
    let bc = weight.b().clone();
    let a0 = match a0 {
        Some(a) => a,
        None => weight.moment(-1)? * &m0.inverse_ctx("M_0")? * s,
    };
    let fam = MvopFamily::new(weight.clone(), n_max)?;

    let mut steps: Vec<BootstrapStep> = Vec::with_capacity(n_max + 1);
    let (mut a, mut b, mut bn, mut bhat) = (a0, CMatrix::zeros(dim), bc.clone(), bc.clone());
    let mut beta: Option<CMatrix> = None;
    // Σ_{k<n} (X_k + [B, X_k]) with X_k = a_k + B_k*
    let mut tele = CMatrix::zeros(dim);
    for n in 0..=n_max {
        let nf = n as f64;
        let alpha_rec = &id * (2.0 * nf + alpha + 1.0) + &a + &bc + bn.adjoint();
        let reference = compute_lax(&fam, n)?;
        let deviation = [(&a, &reference.a), (&b, &reference.b), (&bn, &reference.bn), (&bhat, &reference.bhat)]
            .iter()
            .map(|(x, y)| (*x - *y).fro() / (1.0 + y.fro()))
            .fold(0.0, f64::max);
        if !(deviation <= DIVERGENCE_GUARD) {
            return Err(Error::IterationDiverged { degree: n, deviation });
        }
        steps.push(BootstrapStep {
            n,
            a: a.clone(),
            b: b.clone(),
            bn: bn.clone(),
            bhat: bhat.clone(),
            alpha_rec,
            beta_rec: beta.clone(),
            deviation,
        });
        if n == n_max {
            break;
        }
        let ai = inv(&a, "a_n")?;
        let rhs = &a * s - &a * &a * (2.0 * nf + alpha + 1.0) - &a * &a * &a - &a * (&bc + bn.adjoint()) * &a - &b * &a;
        let b1 = &ai * rhs;
        let sb1 = &id * s - &b1;
        let bhat1 = sb1.rsolve_ctx(&(&sb1 * &ai * &bhat * &a), "s − b_{n+1}")?;
        let x = &a + bn.adjoint();
        tele += bc.commutator(&x) + x;
        let n1 = nf + 1.0;
        let beta1 = (&id * (n1 + alpha) + &bc) * n1 + &b1 + &tele;
        let bstar = beta1.adjoint();
        let bn1 = bstar.solve_ctx(&(&bn * &bstar), "β_{n+1}*")?;
        let a1 = beta1.rsolve_ctx(&((&b1 * &b1 - &b1 * s) * &ai), "β_{n+1}")?;
        if !a1.is_finite() || !b1.is_finite() {
            return Err(Error::NonFinite(format!("bootstrap step to degree {}", n + 1)));
        }
        (a, b, bn, bhat, beta) = (a1, b1, bn1, bhat1, Some(beta1));
    }
    Ok(steps)
}
