//! The special pair (B, B0) with [B, B0] = B0 and B² + αB − B0 Hermitian,
//! built as B = Z J Z⁻¹, B0 = Z L Z⁻¹, and the extra relations its twisted
//! Lax matrix imposes on the MVOP data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lax::{assemble_lax_matrices, LaxQuantities};
use crate::linalg::{mat_power_log, two_pi_i, BlockMatrix, CMatrix, I};
use crate::report::ResidualReport;
use crate::systems::SStencil;
use crate::weight::Weight;

/// Parameters of the special family as they appear in a spec file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dg1Params {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(with = "crate::linalg::complex_pair_vec")]
    pub nu: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct Dg1Family {
    pub n: usize,
    pub alpha: f64,
    pub nu: Vec<Complex64>,
    pub j: CMatrix,
    pub l: CMatrix,
    pub z: CMatrix,
    pub b: CMatrix,
    pub b0: CMatrix,
    /// Diagonal of J² + αJ.
    pub c: Vec<f64>,
}

const INVARIANT_TOL: f64 = 1e-12;

pub fn build_dg1(nu: &[Complex64], alpha: f64, n: usize) -> Result<Dg1Family> {
    if n == 0 {
        return Err(Error::invalid("special family needs N ≥ 1"));
    }
    if nu.len() + 1 != n {
        return Err(Error::invalid(format!("special family of size {n} needs {} parameters, got {}", n - 1, nu.len())));
    }
    if nu.iter().any(|v| v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::DegenerateParameters("every ν_k must be finite and nonzero".into()));
    }
    let c: Vec<f64> = (0..n).map(|i| (n - 1 - i) as f64).map(|d| d * d + alpha * d).collect();
    for i in 0..n {
        for k in i + 1..n {
            if (c[i] - c[k]).abs() <= 1e-12 * (1.0 + c[i].abs()) {
                return Err(Error::DegenerateParameters(format!(
                    "J² + αJ has a repeated diagonal entry (α = {alpha})"
                )));
            }
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let j = CMatrix::from_fn(n, |r, col| if r == col { Complex64::new((n - 1 - r) as f64, 0.0) } else { zero });
    let l = CMatrix::from_fn(n, |r, col| if col == r + 1 { nu[r] } else { zero });
    let z = CMatrix::from_fn(n, |r, col| match r.cmp(&col) {
        std::cmp::Ordering::Greater => zero,
        std::cmp::Ordering::Equal => one,
        std::cmp::Ordering::Less => (1..=col - r).fold(one, |acc, k| acc * nu[r + k - 1] / (c[r + k] - c[r])),
    });
    let z_inv = z.inverse_ctx("special family Z")?;
    let b = &z * &j * &z_inv;
    let b0 = &z * &l * &z_inv;
    let fam = Dg1Family { n, alpha, nu: nu.to_vec(), j, l, z, b, b0, c };
    let (comm, herm) = fam.invariant_defects();
    if comm > INVARIANT_TOL * (1.0 + fam.b0.fro()) || herm > INVARIANT_TOL * (1.0 + fam.hermitian_exponent().fro()) {
        return Err(Error::DegenerateParameters(format!(
            "construction invariants violated: ‖[B,B0]−B0‖ = {comm:.3e}, Hermitian defect = {herm:.3e}"
        )));
    }
    Ok(fam)
}

impl Dg1Family {
    pub fn from_params(p: &Dg1Params, alpha: f64) -> Result<Self> {
        if let Some(a) = p.alpha {
            if a != alpha {
                return Err(Error::invalid(format!("special family α = {a} differs from weight α = {alpha}")));
            }
        }
        build_dg1(&p.nu, alpha, p.n)
    }

    /// B² + αB − B0, the (Hermitian) exponent of the unitary twist.
    pub fn hermitian_exponent(&self) -> CMatrix {
        &self.b * &self.b + self.alpha * &self.b - &self.b0
    }

    /// (‖[B,B0] − B0‖, Hermitian defect of B² + αB − B0).
    pub fn invariant_defects(&self) -> (f64, f64) {
        let comm = (self.b.commutator(&self.b0) - &self.b0).fro();
        (comm, self.hermitian_exponent().hermitian_defect())
    }

    /// Coefficients of x^B: T(x) = Σ_d x^d T_d with T_d = Z E_kk Z⁻¹ for the
    /// row k whose J-entry is d.
    pub fn t_coefficients(&self) -> Result<Vec<CMatrix>> {
        let z_inv = self.z.inverse()?;
        Ok((0..self.n)
            .map(|d| {
                let k = self.n - 1 - d;
                let e = CMatrix::from_fn(self.n, |r, c| {
                    if r == k && c == k {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                &self.z * &e * &z_inv
            })
            .collect())
    }

    /// Coefficients C_m of T(x)T*(x) = Σ_m C_m x^m.
    pub fn tt_poly(&self) -> Result<Vec<CMatrix>> {
        let t = self.t_coefficients()?;
        let deg = 2 * (self.n - 1);
        Ok((0..=deg)
            .map(|m| {
                let mut acc = CMatrix::zeros(self.n);
                for d in 0..self.n {
                    if m >= d && m - d < self.n {
                        acc += &t[d] * &t[m - d].adjoint();
                    }
                }
                acc
            })
            .collect())
    }

    /// H(z) = z^B χ(z) z^{−B} with χ(z) = i(B² + αB − B0)/z.
    pub fn h_conjugated(&self, z: f64) -> Result<CMatrix> {
        let zb = mat_power_log(&self.b, z)?;
        let zb_inv = mat_power_log(&(-&self.b), z)?;
        Ok(&zb * (I / z * self.hermitian_exponent()) * &zb_inv)
    }

    /// The closed form i((B² + αB)/z − B0).
    pub fn h_closed(&self, z: f64) -> CMatrix {
        I * ((&self.b * &self.b + self.alpha * &self.b) * (1.0 / z) - &self.b0)
    }
}

pub const SECTION_FINAL_SUITE: &str = "section-final";

/// Largest ‖H(z) − closed form‖ relative to ‖closed form‖ over `zs`.
pub fn h_function_defect(fam: &Dg1Family, zs: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in zs {
        let closed = fam.h_closed(z);
        let d = (fam.h_conjugated(z)? - &closed).fro() / (1.0 + closed.fro());
        worst = worst.max(d);
    }
    Ok(worst)
}

/// K = B² + αB + [B0, a_{n,n−1}].
fn k_matrix(lq: &LaxQuantities, b0: &CMatrix) -> CMatrix {
    let bc = &lq.b_const;
    bc * bc + bc * lq.alpha + b0.commutator(&lq.an_coeff)
}

/// L_n = γ_n B0 γ_n⁻¹.
fn l_matrix(lq: &LaxQuantities, b0: &CMatrix) -> CMatrix {
    &lq.gamma_n * b0 * &lq.gamma_inv_n
}

/// K̃_n = B_n² + αB_n + [L_n, γ_n a_{n,n−1} γ_n⁻¹].
fn k_tilde(lq: &LaxQuantities, b0: &CMatrix) -> CMatrix {
    let conj = &lq.gamma_n * &lq.an_coeff * &lq.gamma_inv_n;
    &lq.bn * &lq.bn + &lq.bn * lq.alpha + l_matrix(lq, b0).commutator(&conj)
}

/// H_0 = −i diag(B0, B0*).
pub fn h_zero(b0: &CMatrix) -> BlockMatrix {
    BlockMatrix::diag(b0 * -I, b0.adjoint() * -I)
}

/// H_{−1}^{(n)} of the twisted z-equation; γ_{−1} := 0 at n = 0.
pub fn h_minus1(chain: &[LaxQuantities], n: usize, b0: &CMatrix) -> Result<BlockMatrix> {
    let lq = &chain[n];
    let tpi = two_pi_i();
    let k = k_matrix(lq, b0);
    let b0s = b0.adjoint();
    let upper = &lq.gamma_inv_n * (&b0s - l_matrix(lq, b0)) * (1.0 / tpi);
    let lower = match n {
        0 => CMatrix::zeros(lq.dim()),
        _ => (&b0s - l_matrix(&chain[n - 1], b0)) * lq.gamma_nm1.as_ref().expect("n ≥ 1") * (-tpi),
    };
    BlockMatrix::new(&k * I, upper * I, lower * I, k.adjoint() * I)
}

/// The six relations and the B̂_n reduction imposed by the twist, and the
/// nilpotency of L_n. `b0` is B0 in the frame of the chain.
pub fn verify_section_final(chain: &[LaxQuantities], n: usize, b0: &CMatrix, digest: &str, tol: f64) -> Result<ResidualReport> {
    let mut r = ResidualReport::new(digest);
    let suite = SECTION_FINAL_SUITE;
    let lq = chain.get(n).ok_or(Error::IndexOutOfRange { index: n, max: chain.len().saturating_sub(1) })?;
    let s = lq.s;
    let id = CMatrix::identity(lq.dim());
    let (a, b) = (&lq.a, &lq.b);
    let ai = a.inverse_ctx("a_n")?;
    let aib = &ai * b;
    let sb = &id * s - b;
    let k = k_matrix(lq, b0);
    let kts = k_tilde(lq, b0).adjoint();
    let d = b0 - l_matrix(lq, b0).adjoint();

    let lhs = &sb * &d - &d * &aib * a;
    r.check(suite, n, s, "twisted_commutator_a", &lhs, &(&k * a - a * &kts), tol);
    let rhs = b0 * &lq.alpha_rec - &lq.alpha_rec * l_matrix(lq, b0).adjoint();
    r.check(suite, n, s, "twisted_shift_alpha", &(&k - &kts), &rhs, tol);
    let bh = &lq.bhat;
    let lhs = bh * bh + bh * lq.alpha;
    r.check(suite, n, s, "bhat_quadratic_reduction", &lhs, &(&k + &d * &aib), tol);
    let l = l_matrix(lq, b0);
    r.check_zero(suite, n, s, "l_nilpotent", &l.powi(lq.dim() as u32), l.fro().powi(lq.dim() as i32), tol);

    let (Some(beta), Some(m)) = (&lq.beta_rec, n.checked_sub(1)) else {
        for name in ["twisted_commutator_b", "twisted_shift_beta", "monodromy_twist_bhat", "monodromy_twist_zero"] {
            r.skip(suite, n, s, name, "β_0, L_{−1} undefined at n = 0");
        }
        return Ok(r);
    };
    let dm = b0 - l_matrix(&chain[m], b0).adjoint();
    let abd = a * beta * &dm;

    let lhs = &abd + &d * &aib * &sb;
    r.check(suite, n, s, "twisted_commutator_b", &lhs, &k.commutator(b), tol);

    match chain.get(n + 1) {
        Some(nx) => {
            let dp = b0 - l_matrix(nx, b0).adjoint();
            let beta1 = nx.beta_rec.as_ref().expect("β_{n+1} exists");
            let al = &lq.alpha_rec;
            let lhs = &dp * beta1 - beta * &dm;
            let rhs = k.commutator(al) + al.commutator(&(b0 * al));
            r.check(suite, n, s, "twisted_shift_beta", &lhs, &rhs, tol);
        }
        None => r.skip(suite, n, s, "twisted_shift_beta", "needs degree n + 1"),
    }

    let lhs = &abd - &sb * &d * &aib + (bh * bh + bh * lq.alpha) * s;
    r.check(suite, n, s, "monodromy_twist_bhat", &lhs, &(&sb * &k + a * &kts * &aib), tol);
    let lhs = &aib * &k - &kts * &aib + beta * &dm;
    r.check(suite, n, s, "monodromy_twist_zero", &lhs, &-(&aib * &d * &aib), tol);
    Ok(r)
}

/// z-independent parts of the twisted compatibility conditions:
/// [H_{−1}, A_{−2}] = 0 and 𝒰(z)(H_0 + H_{−1}/z) = (H_0 + H_{−1}^{(n+1)}/z)𝒰(z)
/// at z = 0.7 and z = 2.
pub fn verify_twisted_lax(chain: &[LaxQuantities], n: usize, b0: &CMatrix, digest: &str, tol: f64) -> Result<ResidualReport> {
    let suite = SECTION_FINAL_SUITE;
    let mut r = ResidualReport::new(digest);
    let lq = chain.get(n).ok_or(Error::IndexOutOfRange { index: n, max: chain.len().saturating_sub(1) })?;
    let s = lq.s;
    let hm = h_minus1(chain, n, b0)?;
    let lm = assemble_lax_matrices(lq)?;
    let c = hm.commutator(&lm.a_minus2);
    r.push(suite, n, s, "twisted_commutes_a_minus2", c.fro(), c.fro() / (1.0 + hm.fro() * lm.a_minus2.fro()), tol);
    let Some(_) = chain.get(n + 1) else {
        r.skip(suite, n, s, "twisted_intertwined_by_u", "needs degree n + 1");
        return Ok(r);
    };
    let hm1 = h_minus1(chain, n + 1, b0)?;
    let h0 = h_zero(b0);
    let mut worst: (f64, f64) = (0.0, 0.0);
    for z in [0.7, 2.0] {
        let u = lm.u_at(z.into());
        let left = &h0 + &hm.scale(1.0 / z);
        let right = &h0 + &hm1.scale(1.0 / z);
        let d = (&(&u * &left) - &(&right * &u)).fro();
        let rel = d / (1.0 + u.fro() * left.fro().max(right.fro()));
        if rel > worst.1 {
            worst = (d, rel);
        }
    }
    r.push(suite, n, s, "twisted_intertwined_by_u", worst.0, worst.1, tol);
    Ok(r)
}

/// s-part of the twisted compatibility condition, ∂_s H_{−1} = [H_0, A_{−2}]/s,
/// with a central difference of step h.
pub fn verify_twisted_flow(weight: &Weight, n: usize, s: f64, h: f64, tol: f64) -> Result<ResidualReport> {
    let b0 = weight.b0().ok_or_else(|| Error::invalid("twisted flow needs a special-family weight"))?;
    let st = SStencil::new(weight, n + 1, s, h)?;
    let mut r = ResidualReport::new(weight.spec().digest());
    let dh = (&h_minus1(&st.plus, n, &b0)? - &h_minus1(&st.minus, n, &b0)?).scale(0.5 / h);
    let lm = assemble_lax_matrices(&st.center[n])?;
    let rhs = h_zero(&b0).commutator(&lm.a_minus2).scale(1.0 / s);
    let d = (&dh - &rhs).fro();
    r.push(SECTION_FINAL_SUITE, n, s, "twisted_flow_h_minus1", d, d / (1.0 + dh.fro().max(rhs.fro())), tol);
    Ok(r)
}
