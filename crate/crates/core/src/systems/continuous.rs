//! Identities in s at fixed degree, checked with central differences of
//! families rebuilt at s ± h: the Painlevé-type system, the Toda equations,
//! the s-derivative of P̂_n(0), and the closed first- and second-order
//! differential systems.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lax::LaxQuantities;
use crate::linalg::CMatrix;
use crate::mvop::MvopFamily;
use crate::report::ResidualReport;
use crate::weight::Weight;

use super::{inv, lax_chain, CLOSED_SUITE, CONTINUOUS_SUITE};

/// Lax chains (degrees 0..=n_max) at s − h, s, s + h in a common frame.
#[derive(Clone, Debug)]
pub struct SStencil {
    pub s: f64,
    pub h: f64,
    pub minus: Vec<LaxQuantities>,
    pub center: Vec<LaxQuantities>,
    pub plus: Vec<LaxQuantities>,
}

impl SStencil {
    pub fn new(weight: &Weight, n_max: usize, s: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(s - h > 0.0) {
            return Err(Error::invalid(format!("stencil needs 0 < h < s, got s = {s}, h = {h}")));
        }
        let chain = |t: f64| -> Result<Vec<LaxQuantities>> { lax_chain(&MvopFamily::new(weight.at_s(t)?, n_max)?) };
        Ok(SStencil { s, h, minus: chain(s - h)?, center: chain(s)?, plus: chain(s + h)? })
    }

    /// Central first difference of a quantity read off the chains.
    pub fn d1(&self, f: impl Fn(&[LaxQuantities]) -> CMatrix) -> CMatrix {
        (f(&self.plus) - f(&self.minus)) * (0.5 / self.h)
    }

    /// Central second difference.
    pub fn d2(&self, f: impl Fn(&[LaxQuantities]) -> CMatrix) -> CMatrix {
        (f(&self.plus) - f(&self.center) * 2.0 + f(&self.minus)) * (1.0 / (self.h * self.h))
    }
}

fn digest(weight: &Weight) -> String {
    weight.spec().digest()
}

fn p_entries(st: &SStencil, n: usize, r: &mut ResidualReport, tol: f64) -> Result<()> {
    let suite = CONTINUOUS_SUITE;
    let s = st.s;
    let lq = &st.center[n];
    let nx = &st.center[n + 1];
    let id = CMatrix::identity(lq.dim());
    let bc = &lq.b_const;
    let (nf, al) = (n as f64, lq.alpha);
    let (a, b) = (&lq.a, &lq.b);
    let sb = &id * s - b;
    let ai = inv(a, "a_n")?;

    let g_dot = st.d1(|c| c[n].gamma_n.clone());
    r.check(suite, n, s, "p1_gamma", &(&g_dot * s), &(&lq.gamma_n * a), tol);

    let a_dot = st.d1(|c| c[n].a.clone());
    let rhs = a * (2.0 * nf + al + 1.0) + a * a + bc * a + a * lq.bn.adjoint() - &id * s + b
        + &lq.gamma_inv_n * b.adjoint() * &lq.gamma_n;
    r.check(suite, n, s, "p3_a", &(&a_dot * s), &rhs, tol);

    let al_dot = st.d1(|c| c[n].alpha_rec.clone());
    r.check(suite, n, s, "toda_alpha_b", &(&al_dot * s), &(b - &nx.b), tol);

    let p0_dot = st.d1(|c| c[n].p0.clone());
    let lhs = lq.p0.rsolve_ctx(&(&p0_dot * s), "P̂_n(0)")?;
    let rhs = &id * nf + bc - &lq.bhat + &ai * b;
    r.check(suite, n, s, "p0_log_derivative", &lhs, &rhs, tol);

    let Some(beta) = &lq.beta_rec else {
        for name in ["p2_gamma_prev", "p4_b", "toda_alpha_beta", "toda_beta"] {
            r.skip(suite, n, s, name, "γ_{−1}, β_0 undefined at n = 0");
        }
        return Ok(());
    };
    let prev = &st.center[n - 1];
    let beta1 = nx.beta_rec.as_ref().expect("β_{n+1} exists");

    let gm_dot = st.d1(|c| c[n - 1].gamma_n.clone());
    let rhs = -(&lq.gamma_n * &ai * b * &sb);
    r.check(suite, n, s, "p2_gamma_prev", &(&gm_dot * s), &rhs, tol);

    let b_dot = st.d1(|c| c[n].b.clone());
    let rhs = b + bc.commutator(b) - &ai * b * &sb - a * beta;
    r.check(suite, n, s, "p4_b", &(&b_dot * s), &rhs, tol);

    let rhs = &lq.alpha_rec - beta1 + beta + bc.commutator(&lq.alpha_rec);
    r.check(suite, n, s, "toda_alpha_beta", &(&al_dot * s), &rhs, tol);

    let beta_dot = st.d1(|c| c[n].beta_rec.clone().expect("n ≥ 1"));
    let rhs = beta * &prev.a - a * beta;
    r.check(suite, n, s, "toda_beta", &(&beta_dot * s), &rhs, tol);
    Ok(())
}

/// Right-hand sides of the closed first-order system for (a_n, b_n, B_n, B̂_n):
/// returns (s ȧ, s ḃ, s Ḃ_n, s dB̂_n/ds).
pub fn closed_flow(
    n: usize,
    alpha: f64,
    s: f64,
    bc: &CMatrix,
    a: &CMatrix,
    b: &CMatrix,
    bn: &CMatrix,
    bhat: &CMatrix,
) -> Result<[CMatrix; 4]> {
    let id = CMatrix::identity(a.dim());
    let ai = inv(a, "a_n")?;
    let aib = &ai * b;
    let k = 2.0 * n as f64 + alpha + 1.0;
    let bns = bn.adjoint();
    let fa = -(&id * s) + b + (&id * k + bc + a + &aib) * a + a * &bns;
    let fb = b * (&id * k + bc + &aib) - (&aib * 2.0 + &id * n as f64 + bc - bhat) * s + &aib * b + bc.commutator(b)
        + a * &bns * &aib;
    let fbn = a.adjoint().commutator(bn);
    let fbh = (&aib + bc).commutator(bhat);
    Ok([fa, fb, fbn, fbh])
}

fn first_order_flow_entries(st: &SStencil, n: usize, r: &mut ResidualReport, tol: f64) -> Result<()> {
    let suite = CLOSED_SUITE;
    let s = st.s;
    let lq = &st.center[n];
    let rhs = closed_flow(n, lq.alpha, s, &lq.b_const, &lq.a, &lq.b, &lq.bn, &lq.bhat)?;
    let dots = [
        st.d1(|c| c[n].a.clone()),
        st.d1(|c| c[n].b.clone()),
        st.d1(|c| c[n].bn.clone()),
        st.d1(|c| c[n].bhat.clone()),
    ];
    let names = ["closed_flow_a", "closed_flow_b", "closed_flow_bn", "closed_flow_bhat"];
    for ((name, dot), f) in names.iter().zip(dots.iter()).zip(rhs.iter()) {
        r.check(suite, n, s, name, &(dot * s), f, tol);
    }
    Ok(())
}

/// Painlevé-type system, Toda equations and the s-derivative of P̂_n(0) at
/// one (n, s), with first derivatives from a central difference of step h.
pub fn residual_p_system(weight: &Weight, n: usize, s: f64, h: f64, tol: f64) -> Result<ResidualReport> {
    let st = SStencil::new(weight, n + 1, s, h)?;
    let mut r = ResidualReport::new(digest(weight));
    p_entries(&st, n, &mut r, tol)?;
    Ok(r)
}

/// Closed differential systems at one (n, s): the four first-order flows and
/// the recovery of B_n*, B̂_n from a, b and their derivatives (step `h1`),
/// and the two second-order equations (step `h2`, tolerance `tol2`).
pub fn residual_closed_continuous(
    weight: &Weight,
    n: usize,
    s: f64,
    h1: f64,
    h2: f64,
    tol1: f64,
    tol2: f64,
) -> Result<ResidualReport> {
    let suite = CLOSED_SUITE;
    let mut r = ResidualReport::new(digest(weight));
    let st = SStencil::new(weight, n + 1, s, h1)?;
    first_order_flow_entries(&st, n, &mut r, tol1)?;

    let lq = &st.center[n];
    let id = CMatrix::identity(lq.dim());
    let bc = &lq.b_const;
    let (a, b) = (&lq.a, &lq.b);
    let ai = inv(a, "a_n")?;
    let aib = &ai * b;
    let k = 2.0 * n as f64 + lq.alpha + 1.0;
    let ad = st.d1(|c| c[n].a.clone());
    let bd = st.d1(|c| c[n].b.clone());
    let bns = &ai * (&ad * s + &id * s - b - (&id * k + bc + a + &aib) * a);
    r.check(suite, n, s, "recover_bn", &bns, &lq.bn.adjoint(), tol1);
    let bhat = &bd + &id * n as f64 + bc + &aib - &ad * &aib + a * b * (1.0 / s);
    r.check(suite, n, s, "recover_bhat", &bhat, &lq.bhat, tol1);

    let st2 = SStencil::new(weight, n + 1, s, h2)?;
    let lq = &st2.center[n];
    let (a, b) = (&lq.a, &lq.b);
    let ai = inv(a, "a_n")?;
    let aib = &ai * b;
    let ad = st2.d1(|c| c[n].a.clone());
    let bd = st2.d1(|c| c[n].b.clone());
    let add = st2.d2(|c| c[n].a.clone());
    let bdd = st2.d2(|c| c[n].b.clone());
    let (s2, si) = (1.0 / (s * s), 1.0 / s);
    let adai = &ad * &ai;

    let second_a = |inner: &CMatrix| -> CMatrix {
        &adai * &ad + &adai - (bc * a * a - a * bc * a + &aib * a * a - a * a * &aib) * s2
            + (&bd - &ad + &ai * &bd * a + &ad * a - inner * b * a + bc * &ad - &adai * bc * a + aib.commutator(&ad)
                - &id)
                * si
    };
    let rhs = second_a(&(&adai * &ai + &ai * &ad * &ai));
    r.check(suite, n, s, "second_order_flow_a", &add, &rhs, tol2);
    let printed = second_a(&(&adai * &ai + &ai * &ad));
    let d = (&add - &printed).fro() / (1.0 + add.fro().max(printed.fro()));
    r.annotate_last(format!("uses (ȧa⁻² + a⁻¹ȧa⁻¹)b a; with a⁻¹ȧ in place of a⁻¹ȧa⁻¹ the residual is {d:.1e}"));
    r.note("second-order equation for a_n: the coefficient of b_n a_n is (ȧa⁻² + a⁻¹ȧa⁻¹); the form with a⁻¹ȧ does not vanish");

    let rhs = (&adai + &ai * &ad) * &aib + &adai * &bd - &ai * &bd + a * (b + bc.commutator(b)) * s2
        - (a * &bd + bd.commutator(bc) + &adai * bc.commutator(b) - &ai * (&bd * b + b * &bd)
            + (&adai * &ai + &ai * &adai) * b * b
            + &adai * b
            + &aib)
            * si;
    r.check(suite, n, s, "second_order_flow_b", &bdd, &rhs, tol2);
    Ok(r)
}

/// Convergence order of the first-difference residuals: the P-system, Toda,
/// P̂_n(0) and closed first-order entries are evaluated at h, h/2, …, and
/// each consecutive ratio of residuals is recorded as an entry
/// `fd_order_<identity>` passing when it lies in [3.5, 4.5]. Pairs whose
/// finer residual is below `floor` are at the quadrature floor and skipped.
pub fn fd_halving(weight: &Weight, n: usize, s: f64, h0: f64, levels: usize, floor: f64) -> Result<ResidualReport> {
    let mut r = ResidualReport::new(digest(weight));
    let mut runs: Vec<BTreeMap<String, f64>> = Vec::new();
    for k in 0..levels {
        let h = h0 / f64::powi(2.0, k as i32);
        let st = SStencil::new(weight, n + 1, s, h)?;
        let mut rep = ResidualReport::new("");
        p_entries(&st, n, &mut rep, f64::INFINITY)?;
        first_order_flow_entries(&st, n, &mut rep, f64::INFINITY)?;
        runs.push(rep.entries.iter().filter(|e| !e.skipped).map(|e| (e.identity.clone(), e.rel_residual)).collect());
    }
    for k in 1..runs.len() {
        for (name, &coarse) in &runs[k - 1] {
            let fine = runs[k][name];
            let id = format!("fd_order_{name}");
            if fine < floor {
                r.skip(CONTINUOUS_SUITE, n, s, &id, &format!("at floor ({fine:.1e}) for h = {:.3e}", h0 / f64::powi(2.0, k as i32)));
                continue;
            }
            let ratio = coarse / fine;
            r.push(CONTINUOUS_SUITE, n, s, &id, ratio, (ratio - 4.0).abs(), 0.5);
            r.annotate_last(format!("ratio {ratio:.4} between h = {:.3e} and h/2", h0 / f64::powi(2.0, k as i32 - 1)));
        }
    }
    Ok(r)
}
