//! Lax-pair data at z = 0 and z = ∞: p_n, q_n, a_n, b_n, the conjugates
//! B_n, B̂_n, the coefficient matrices A_{−1}, A_{−2}, 𝒰, and the structural
//! identities linking them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{two_pi_i, BlockMatrix, CMatrix};
use crate::mvop::MvopFamily;
use crate::quad::DeOptions;
use crate::report::ResidualReport;

#[derive(Clone, Debug, Serialize)]
pub struct LaxQuantities {
    pub n: usize,
    pub s: f64,
    pub alpha: f64,
    /// B in the working frame.
    #[serde(rename = "B")]
    pub b_const: CMatrix,
    pub p: CMatrix,
    pub q: CMatrix,
    pub a: CMatrix,
    pub b: CMatrix,
    #[serde(rename = "B_n")]
    pub bn: CMatrix,
    #[serde(rename = "B_hat")]
    pub bhat: CMatrix,
    /// P̂_n(s;0).
    pub p0: CMatrix,
    /// a_{n,n−1}.
    pub an_coeff: CMatrix,
    pub gamma_n: CMatrix,
    pub gamma_inv_n: CMatrix,
    pub gamma_nm1: Option<CMatrix>,
    pub alpha_rec: CMatrix,
    pub beta_rec: Option<CMatrix>,
}

impl LaxQuantities {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

/// p_n = C(P̂_n W)(0) P̂_n*(0), q_n = 2πi γ_{n−1} P̂_{n−1}(0) P̂_n(0)⁻¹ (q_0 = 0),
/// a_n = 2πi s p_n γ_n, b_n = s p_n q_n, B_n = γ_n B γ_n⁻¹,
/// B̂_n = P̂_n(0) B P̂_n(0)⁻¹.
pub fn compute_lax(fam: &MvopFamily, n: usize) -> Result<LaxQuantities> {
    let dim = fam.dim();
    let s = fam.s();
    let tpi = two_pi_i();
    let bconst = fam.weight().b().clone();
    let p0 = fam.at_zero(n)?.clone();
    let gamma_n = fam.gamma(n)?.clone();
    let gamma_inv_n = fam.gamma_inv(n)?.clone();
    // the polynomial part of P̂_n* integrates to zero against P̂_n W / y
    let g_nn = fam.cauchy_left(n)? * &p0.adjoint();
    let p = &g_nn * (1.0 / tpi);
    let a = &g_nn * &gamma_n * s;
    let (q, gamma_nm1, beta_rec) = if n == 0 {
        (CMatrix::zeros(dim), None, None)
    } else {
        let gm = fam.gamma(n - 1)?.clone();
        let q = p0.rsolve_ctx(&(tpi * (&gm * fam.at_zero(n - 1)?)), "P̂_n(0)")?;
        (q, Some(gm), Some(fam.beta_rec(n)?))
    };
    let b = &p * &q * s;
    let bn = gamma_n.rsolve_ctx(&(&gamma_n * &bconst), "γ_n")?;
    let bhat = p0.rsolve_ctx(&(&p0 * &bconst), "P̂_n(0)")?;
    Ok(LaxQuantities {
        n,
        s,
        alpha: fam.weight().alpha(),
        b_const: bconst,
        p,
        q,
        a,
        b,
        bn,
        bhat,
        p0,
        an_coeff: fam.subleading(n)?,
        gamma_n,
        gamma_inv_n,
        gamma_nm1,
        alpha_rec: fam.alpha_rec(n)?,
        beta_rec,
    })
}

/// a_n and b_n through the integral representations
/// a_n = s(∫P̂_n W P̂_n*/y)γ_n and b_n = s(∫P̂_n W P̂_{n−1}*/y)γ_{n−1},
/// evaluated by quadrature of the x^B weight.
pub fn ab_by_quadrature(fam: &MvopFamily, n: usize) -> Result<(CMatrix, Option<CMatrix>)> {
    let s = fam.s();
    let opts = DeOptions { tol: 1e-12, ..DeOptions::default() };
    if n == 0 {
        let ints = fam.quadrature_products(&[(0, 0)], -1, &opts)?;
        return Ok((&ints[0] * fam.gamma(0)? * s, None));
    }
    let ints = fam.quadrature_products(&[(n, n), (n, n - 1)], -1, &opts)?;
    Ok((&ints[0] * fam.gamma(n)? * s, Some(&ints[1] * fam.gamma(n - 1)? * s)))
}

#[derive(Clone, Debug, Serialize)]
pub struct LaxMatrices {
    pub a_minus1: BlockMatrix,
    /// A_{−2} in terms of p_n, q_n.
    pub a_minus2: BlockMatrix,
    /// A_{−2} in terms of a_n, b_n; absent when a_n is singular.
    pub a_minus2_alt: Option<BlockMatrix>,
    /// 𝒰(z) = z·u1 + u0.
    pub u0: BlockMatrix,
    pub u1: BlockMatrix,
}

impl LaxMatrices {
    pub fn u_at(&self, z: Complex64) -> BlockMatrix {
        &self.u1.scale(z) + &self.u0
    }
}

pub fn assemble_lax_matrices(lq: &LaxQuantities) -> Result<LaxMatrices> {
    let dim = lq.dim();
    let id = CMatrix::identity(dim);
    let zero = CMatrix::zeros(dim);
    let tpi = two_pi_i();
    let s = lq.s;
    let shift = lq.n as f64 + lq.alpha / 2.0;
    // γ_{−1} := 0: the (2,1) block of Y_{−1} vanishes at n = 0
    let gm = lq.gamma_nm1.clone().unwrap_or_else(|| zero.clone());
    let a_minus1 = BlockMatrix::new(
        &id * shift + &lq.b_const,
        &lq.gamma_inv_n * (-1.0 / tpi),
        &gm * tpi,
        &id * (-shift) - lq.b_const.adjoint(),
    )?;
    let pq = &lq.p * &lq.q;
    let qp = &lq.q * &lq.p;
    let a_minus2 = BlockMatrix::new(
        (&id - &pq * 2.0) * (s / 2.0),
        &lq.p * (-s),
        &lq.q * (&id - &pq) * (-s),
        (&id - &qp * 2.0) * (-s / 2.0),
    )?;
    let a_minus2_alt = match lq.a.solve(&lq.b) {
        Ok(ainv_b) => Some(BlockMatrix::new(
            &id * (s / 2.0) - &lq.b,
            &lq.a * &lq.gamma_inv_n * (-1.0 / tpi),
            &lq.gamma_n * &ainv_b * (&id * s - &lq.b) * (-tpi),
            &id * (-s / 2.0) + lq.b.adjoint(),
        )?),
        Err(_) => None,
    };
    let u0 = BlockMatrix::new(-&lq.alpha_rec, &lq.gamma_inv_n * (1.0 / tpi), &lq.gamma_n * (-tpi), zero.clone())?;
    let u1 = BlockMatrix::new(id, zero.clone(), zero.clone(), zero)?;
    Ok(LaxMatrices { a_minus1, a_minus2, a_minus2_alt, u0, u1 })
}

/// Q^{(n)} = Y^{(n)}(0) and its inverse in the factored forms that use the
/// skew-Hermiticity of p_n, q_n.
pub fn q_matrices(lq: &LaxQuantities) -> Result<(BlockMatrix, BlockMatrix)> {
    let dim = lq.dim();
    let id = CMatrix::identity(dim);
    let p0_inv = lq.p0.inverse_ctx("P̂_n(0)")?;
    let left = BlockMatrix::new(id.clone(), lq.p.clone(), -&lq.q, &id - &lq.q * &lq.p)?;
    let q = &left * &BlockMatrix::diag(lq.p0.clone(), p0_inv.adjoint());
    let right = BlockMatrix::new(&id - &lq.p * &lq.q, -&lq.p, lq.q.clone(), id)?;
    let q_inv = &BlockMatrix::diag(p0_inv, lq.p0.adjoint()) * &right;
    Ok((q, q_inv))
}

/// Which sign of the relation between β_n − b_n and a_{n,n−1} is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaBSign {
    /// β_n − b_n = −(a_{n,n−1} + [B, a_{n,n−1}]); consistent with α_n = a_{n,n−1} − a_{n+1,n}.
    Negative,
    /// β_n − b_n = a_{n,n−1} + [B, a_{n,n−1}].
    Positive,
}

pub const STRUCTURAL_SUITE: &str = "structural";

/// Structural identities at one (n, s): Liouville–Ostrogradski at z = 0,
/// skew-Hermiticity of p_n, q_n, Hermiticity of γ_n, the conjugation identity
/// γ_n⁻¹b_n*γ_n = a_n⁻¹b_n a_n, the β_n − b_n relation, the dual a_n/b_n
/// routes, the two forms of A_{−2}, A_{−2} = (s/2)Qσ₃Q⁻¹, Q Q⁻¹ = I and the
/// z → ∞ coefficient Y_{−1}.
pub fn verify_structural(fam: &MvopFamily, lq: &LaxQuantities, tol: f64) -> Result<ResidualReport> {
    let mut r = ResidualReport::new(fam.weight().spec().digest());
    let suite = STRUCTURAL_SUITE;
    let (n, s) = (lq.n, lq.s);
    let dim = lq.dim();
    let id = CMatrix::identity(dim);
    let tpi = two_pi_i();

    r.check_zero(suite, n, s, "p_skew_hermitian", &(&lq.p + lq.p.adjoint()), lq.p.fro(), tol);
    r.check_zero(suite, n, s, "q_skew_hermitian", &(&lq.q + lq.q.adjoint()), lq.q.fro(), tol);
    r.check_zero(suite, n, s, "gamma_hermitian", &(&lq.gamma_n - lq.gamma_n.adjoint()), lq.gamma_n.fro(), tol);

    if n == 0 {
        r.skip(suite, n, s, "liouville_ostrogradski", "γ_{−1} undefined at n = 0");
    } else {
        let gm = lq.gamma_nm1.as_ref().expect("n ≥ 1");
        let c_right = fam.cauchy_right(n)? * (1.0 / tpi);
        let c_left = fam.cauchy_left(n - 1)? * (1.0 / tpi);
        let lhs = gm * (fam.at_zero(n - 1)? * &c_right - &c_left * lq.p0.adjoint()) * tpi;
        r.check(suite, n, s, "liouville_ostrogradski", &lhs, &id, tol);
    }

    match lq.a.solve(&lq.b) {
        Ok(ainv_b) => {
            let lhs = &lq.gamma_inv_n * lq.b.adjoint() * &lq.gamma_n;
            r.check(suite, n, s, "conjugate_b", &lhs, &(&ainv_b * &lq.a), tol);
        }
        Err(e) => r.skip(suite, n, s, "conjugate_b", &format!("a_n singular: {e}")),
    }

    if let Some(beta) = &lq.beta_rec {
        let lhs = beta - &lq.b;
        let rhs = beta_minus_b_rhs(lq, BetaBSign::Negative);
        r.check(suite, n, s, "beta_minus_b", &lhs, &rhs, tol);
        let alt = (&lhs - &beta_minus_b_rhs(lq, BetaBSign::Positive)).fro();
        r.note(format!(
            "β_n − b_n relation: using β_n − b_n = −(a_{{n,n−1}} + [B, a_{{n,n−1}}]); the opposite sign leaves residuals of order {:.1e}",
            alt / (1.0 + lhs.fro())
        ));
    } else {
        r.skip(suite, n, s, "beta_minus_b", "β_0 undefined");
    }

    let (a_quad, b_quad) = ab_by_quadrature(fam, n)?;
    r.check(suite, n, s, "dual_route_a", &lq.a, &a_quad, tol);
    match b_quad {
        Some(bq) => {
            r.check(suite, n, s, "dual_route_b", &lq.b, &bq, tol);
        }
        None => r.skip(suite, n, s, "dual_route_b", "b_0 = 0 by convention"),
    }

    let lm = assemble_lax_matrices(lq)?;
    match &lm.a_minus2_alt {
        Some(alt) => {
            let d = (&lm.a_minus2 - alt).fro();
            let reference = lm.a_minus2.fro().max(alt.fro());
            r.push(suite, n, s, "a_minus2_two_forms", d, d / (1.0 + reference), tol);
        }
        None => r.skip(suite, n, s, "a_minus2_two_forms", "a_n singular"),
    }
    let tr = lm.a_minus2.trace().norm();
    r.push(suite, n, s, "a_minus2_trace", tr, tr / (1.0 + lm.a_minus2.fro()), tol);
    let prod = &lm.a_minus2.b12 * &lm.a_minus2.b21;
    r.check(suite, n, s, "a_minus2_offdiag_product", &prod, &(&lq.b * (&id * s - &lq.b)), tol);

    match q_matrices(lq) {
        Ok((q, q_inv)) => {
            let qq = &q * &q_inv;
            let d = (&qq - &BlockMatrix::identity(dim)).fro();
            r.push(suite, n, s, "q_times_q_inverse", d, d / (1.0 + q.fro() * q_inv.fro()), tol);
            let conj = (&(&q * &BlockMatrix::sigma3(dim)) * &q_inv).scale(s / 2.0);
            let d = (&conj - &lm.a_minus2).fro();
            r.push(suite, n, s, "a_minus2_from_q", d, d / (1.0 + conj.fro().max(lm.a_minus2.fro())), tol);
        }
        Err(e) => {
            r.skip(suite, n, s, "q_times_q_inverse", &format!("P̂_n(0) singular: {e}"));
            r.skip(suite, n, s, "a_minus2_from_q", "P̂_n(0) singular");
        }
    }

    if n == 0 {
        r.skip(suite, n, s, "y_minus1_lower_right", "γ_{−1} undefined at n = 0");
    } else {
        // coefficient of 1/z in −2πi γ_{n−1} C(P̂_{n−1}W)(z) z^n at infinity
        let w = fam.weight();
        let mut int = CMatrix::zeros(dim);
        for (i, c) in fam.coeffs(n - 1)?.iter().enumerate() {
            int += c * &w.moment((i + n) as i64)?;
        }
        let lhs = lq.gamma_nm1.as_ref().expect("n ≥ 1") * &int;
        r.check(suite, n, s, "y_minus1_lower_right", &lhs, &(-lq.an_coeff.adjoint()), tol);
    }
    Ok(r)
}

pub fn beta_minus_b_rhs(lq: &LaxQuantities, sign: BetaBSign) -> CMatrix {
    let v = &lq.an_coeff + lq.b_const.commutator(&lq.an_coeff);
    match sign {
        BetaBSign::Negative => -v,
        BetaBSign::Positive => v,
    }
}
