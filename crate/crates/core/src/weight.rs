//! The deformed Laguerre matrix weight W(s;x) = x^α e^{−x−s/x} T(x)T*(x) with
//! T(x) = x^B, and its matrix moments.
//!
//! A [`Weight`] is a validated [`WeightSpec`]. All downstream objects are built
//! from its moments. When γ_0 normalization is requested, the weight is
//! replaced by C W C* with C = L⁻¹ for the Cholesky factor L of the zeroth
//! moment at the base s; C is then frozen, so moving to another s does not
//! introduce any extra s-dependence. In the normalized frame T becomes
//! x^{CBC⁻¹}C, so every identity holds with B replaced by CBC⁻¹.

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, mat_power_log, min_hermitian_eigenvalue, CMatrix};
use crate::quad::{integrate_matrices, DeOptions};
use crate::special_family::{Dg1Family, Dg1Params};
use crate::specfun::scalar_moment;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub s: f64,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<CMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tt_poly: Option<Vec<CMatrix>>,
    #[serde(default)]
    pub normalize_gamma0: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dg1: Option<Dg1Params>,
}

impl WeightSpec {
    /// Scalar Laguerre weight x^α e^{−x−s/x}.
    pub fn scalar(alpha: f64, s: f64) -> Self {
        WeightSpec {
            n: 1,
            alpha,
            s,
            b: Some(CMatrix::zeros(1)),
            tt_poly: Some(vec![CMatrix::identity(1)]),
            normalize_gamma0: false,
            dg1: None,
        }
    }

    /// Special-family weight with real parameters ν_1..ν_{N−1}.
    pub fn dg1(nu: &[f64], alpha: f64, s: f64) -> Self {
        let n = nu.len() + 1;
        WeightSpec {
            n,
            alpha,
            s,
            b: None,
            tt_poly: None,
            normalize_gamma0: false,
            dg1: Some(Dg1Params { n, alpha: Some(alpha), nu: nu.iter().map(|&v| Complex64::new(v, 0.0)).collect() }),
        }
    }

    pub fn with_s(&self, s: f64) -> Self {
        WeightSpec { s, ..self.clone() }
    }

    pub fn normalized(mut self, on: bool) -> Self {
        self.normalize_gamma0 = on;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    /// Short hex digest of the canonical JSON form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

pub struct Weight {
    spec: WeightSpec,
    alpha: f64,
    s: f64,
    /// B in the raw frame.
    b_raw: CMatrix,
    /// B in the working (possibly normalized) frame.
    b: CMatrix,
    /// T T* coefficients in the raw frame, when T T* is polynomial.
    tt: Option<Vec<CMatrix>>,
    /// Congruence C with working weight C W C*.
    congruence: Option<CMatrix>,
    dg1: Option<Dg1Family>,
    cache: RwLock<HashMap<i64, CMatrix>>,
}

impl Clone for Weight {
    fn clone(&self) -> Self {
        Weight {
            spec: self.spec.clone(),
            alpha: self.alpha,
            s: self.s,
            b_raw: self.b_raw.clone(),
            b: self.b.clone(),
            tt: self.tt.clone(),
            congruence: self.congruence.clone(),
            dg1: self.dg1.clone(),
            cache: RwLock::new(self.cache.read().expect("moment cache").clone()),
        }
    }
}

impl std::fmt::Debug for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Weight").field("spec", &self.spec).field("s", &self.s).finish()
    }
}

const TT_CONSISTENCY_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;

impl Weight {
    pub fn new(spec: &WeightSpec) -> Result<Self> {
        if spec.n == 0 {
            return Err(Error::invalid("dimension N must be positive"));
        }
        if !(spec.alpha > 0.0) || !spec.alpha.is_finite() {
            return Err(Error::invalid(format!("α must be positive, got {}", spec.alpha)));
        }
        if !(spec.s >= 0.0) || !spec.s.is_finite() {
            return Err(Error::invalid(format!("s must be ≥ 0, got {}", spec.s)));
        }
        let dg1 = match &spec.dg1 {
            Some(p) => {
                if p.n != spec.n {
                    return Err(Error::invalid(format!("special family has N = {}, weight has N = {}", p.n, spec.n)));
                }
                Some(Dg1Family::from_params(p, spec.alpha)?)
            }
            None => None,
        };
        let (b_raw, tt) = match &dg1 {
            // the special-family block takes precedence over an explicit B
            Some(fam) => (fam.b.clone(), Some(fam.tt_poly()?)),
            None => {
                let b = spec.b.clone().ok_or_else(|| Error::invalid("spec needs either B or a dg1 block"))?;
                let tt = match &spec.tt_poly {
                    Some(tt) => Some(tt.clone()),
                    None if b.fro() == 0.0 => Some(vec![CMatrix::identity(spec.n)]),
                    None => None,
                };
                (b, tt)
            }
        };
        if b_raw.dim() != spec.n {
            return Err(Error::invalid(format!("B is {}×{}, expected N = {}", b_raw.dim(), b_raw.dim(), spec.n)));
        }
        if !b_raw.is_finite() {
            return Err(Error::NonFinite("B".into()));
        }
        if let Some(tt) = &tt {
            validate_tt(tt, &b_raw, spec.n)?;
        }
        let mut w = Weight {
            spec: spec.clone(),
            alpha: spec.alpha,
            s: spec.s,
            b: b_raw.clone(),
            b_raw,
            tt,
            congruence: None,
            dg1,
            cache: RwLock::new(HashMap::new()),
        };
        if spec.normalize_gamma0 {
            let m0 = w.moment(0)?;
            let c = cholesky_lower(&m0)?.inverse_ctx("γ_0 normalization")?;
            w.b = &c * &w.b_raw * &c.inverse()?;
            w.congruence = Some(c);
            w.cache.write().expect("moment cache").clear();
        }
        Ok(w)
    }

    /// Same weight (same frame) at another deformation parameter.
    pub fn at_s(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("s must be ≥ 0, got {s}")));
        }
        let mut w = self.clone();
        w.s = s;
        w.spec.s = s;
        w.cache = RwLock::new(HashMap::new());
        Ok(w)
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// B in the working frame.
    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn dg1(&self) -> Option<&Dg1Family> {
        self.dg1.as_ref()
    }

    pub fn congruence(&self) -> Option<&CMatrix> {
        self.congruence.as_ref()
    }

    pub fn has_closed_moments(&self) -> bool {
        self.tt.is_some()
    }

    /// B0 of the special family in the working frame.
    pub fn b0(&self) -> Option<CMatrix> {
        let fam = self.dg1.as_ref()?;
        Some(match &self.congruence {
            Some(c) => c * &fam.b0 * &c.inverse().ok()?,
            None => fam.b0.clone(),
        })
    }

    fn scalar_factor(&self, x: f64) -> f64 {
        (self.alpha * x.ln() - x - self.s / x).exp()
    }

    fn to_frame(&self, m: CMatrix) -> CMatrix {
        match &self.congruence {
            Some(c) => c * &m * &c.adjoint(),
            None => m,
        }
    }

    /// W(s;x), from the polynomial T T* when available, else from x^B.
    pub fn eval(&self, x: f64) -> Result<CMatrix> {
        check_x(x)?;
        let tt = match &self.tt {
            Some(c) => eval_poly_real(c, x),
            None => power_tt(&self.b_raw, x)?,
        };
        Ok(self.to_frame(tt * self.scalar_factor(x)))
    }

    /// W(s;x) always through the matrix power x^B; the independent route used
    /// by quadrature oracles.
    pub fn eval_power(&self, x: f64) -> Result<CMatrix> {
        check_x(x)?;
        Ok(self.to_frame(power_tt(&self.b_raw, x)? * self.scalar_factor(x)))
    }

    /// ∫ x^k W(s;x) dx, cached.
    pub fn moment(&self, k: i64) -> Result<CMatrix> {
        if let Some(m) = self.cache.read().expect("moment cache").get(&k) {
            return Ok(m.clone());
        }
        let m = match &self.tt {
            Some(_) => self.moment_closed(k)?,
            None => self.moment_quadrature(k, &DeOptions::default())?,
        };
        self.cache.write().expect("moment cache").insert(k, m.clone());
        Ok(m)
    }

    /// Σ_j C_j · scalar_moment(α+k+j+1, s).
    pub fn moment_closed(&self, k: i64) -> Result<CMatrix> {
        let tt = self.tt.as_ref().ok_or_else(|| Error::invalid("closed-form moments need a polynomial T T*"))?;
        if k < -1 {
            return Err(Error::invalid(format!("moment order must be ≥ −1, got {k}")));
        }
        let mut acc = CMatrix::zeros(self.dim());
        for (j, c) in tt.iter().enumerate() {
            if c.fro() == 0.0 {
                continue;
            }
            let sigma = self.alpha + k as f64 + j as f64 + 1.0;
            if self.s == 0.0 && sigma <= 0.0 {
                return Err(Error::DivergentMoment { k, s: self.s });
            }
            acc += c * scalar_moment(sigma, self.s)?;
        }
        Ok(self.to_frame(acc))
    }

    /// ∫ x^k W(s;x) dx by double-exponential quadrature of the x^B route.
    pub fn moment_quadrature(&self, k: i64, opts: &DeOptions) -> Result<CMatrix> {
        if k < -1 {
            return Err(Error::invalid(format!("moment order must be ≥ −1, got {k}")));
        }
        if self.s == 0.0 {
            let lam = min_real_eigenvalue(&self.b_raw);
            if self.alpha + k as f64 + 1.0 + 2.0 * lam <= 0.0 {
                return Err(Error::DivergentMoment { k, s: self.s });
            }
        }
        let n = self.dim();
        let mut err = None;
        let out = integrate_matrices(n, 1, opts, |x| match power_tt(&self.b_raw, x) {
            Ok(tt) => vec![tt * (self.scalar_factor(x) * x.powi(k as i32))],
            Err(e) => {
                err.get_or_insert(e);
                vec![CMatrix::zeros(n)]
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(self.to_frame(out.into_iter().next().expect("one integral")))
    }
}

/// Convenience: W(s;x) for a spec.
pub fn eval_weight(spec: &WeightSpec, x: f64) -> Result<CMatrix> {
    Weight::new(spec)?.eval(x)
}

/// Convenience: the k-th matrix moment for a spec.
pub fn matrix_moment(spec: &WeightSpec, k: i64) -> Result<CMatrix> {
    Weight::new(spec)?.moment(k)
}

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::NonFinite("weight abscissa".into()));
    }
    if x <= 0.0 {
        return Err(Error::invalid(format!("weight is defined for x > 0, got {x}")));
    }
    Ok(())
}

fn power_tt(b: &CMatrix, x: f64) -> Result<CMatrix> {
    let t = mat_power_log(b, x)?;
    Ok(&t * &t.adjoint())
}

fn eval_poly_real(c: &[CMatrix], x: f64) -> CMatrix {
    let n = c[0].dim();
    c.iter().rev().fold(CMatrix::zeros(n), |acc, ck| acc * x + ck)
}

fn min_real_eigenvalue(b: &CMatrix) -> f64 {
    // complex Schur form is upper triangular; eigenvalues sit on its diagonal
    let (_, t) = b.as_nalgebra().clone().schur().unpack();
    t.diagonal().iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
}

fn validate_tt(tt: &[CMatrix], b: &CMatrix, n: usize) -> Result<()> {
    if tt.is_empty() {
        return Err(Error::invalid("tt_poly must have at least one coefficient"));
    }
    for (k, c) in tt.iter().enumerate() {
        if c.dim() != n {
            return Err(Error::invalid(format!("tt_poly[{k}] has the wrong dimension")));
        }
        if !c.is_finite() {
            return Err(Error::NonFinite(format!("tt_poly[{k}]")));
        }
        if c.hermitian_defect() > HERMITIAN_TOL * (1.0 + c.fro()) {
            return Err(Error::invalid(format!("tt_poly[{k}] is not Hermitian")));
        }
    }
    for e in -3..=3 {
        let x = 10f64.powf(e as f64 * 0.5);
        let poly = eval_poly_real(tt, x);
        if !(min_hermitian_eigenvalue(&poly) > 0.0) {
            return Err(Error::invalid(format!("T T* is not positive definite at x = {x}")));
        }
        let direct = power_tt(b, x)?;
        if (&poly - &direct).fro() > TT_CONSISTENCY_TOL * (1.0 + direct.fro()) {
            return Err(Error::invalid(format!("tt_poly does not match x^B (x^B)* at x = {x}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_weight_at_one() {
        let w = Weight::new(&WeightSpec::scalar(1.0, 0.0)).unwrap();
        assert!((w.eval(1.0).unwrap().get(0, 0).re - (-1.0f64).exp()).abs() < 1e-16);
        assert!(w.eval(0.0).is_err());
    }

    #[test]
    fn scalar_moments_reduce() {
        let w = Weight::new(&WeightSpec::scalar(1.5, 0.7)).unwrap();
        for k in -1..5 {
            let m = w.moment(k).unwrap().get(0, 0).re;
            assert_eq!(m, scalar_moment(1.5 + k as f64 + 1.0, 0.7).unwrap());
        }
    }

    #[test]
    fn normalized_frame_has_unit_zeroth_moment() {
        let w = Weight::new(&WeightSpec::dg1(&[1.0], 1.0, 1.0).normalized(true)).unwrap();
        let m0 = w.moment(0).unwrap();
        assert!((m0 - CMatrix::identity(2)).fro() < 1e-14);
        // the frame is kept when moving in s
        let w2 = w.at_s(1.5).unwrap();
        assert_eq!(w2.congruence(), w.congruence());
        assert!((w2.moment(0).unwrap() - CMatrix::identity(2)).fro() > 1e-3);
    }

    #[test]
    fn inconsistent_tt_rejected() {
        let mut spec = WeightSpec::scalar(1.0, 1.0);
        spec.b = Some(CMatrix::from_real(1, &[0.5]));
        assert!(Weight::new(&spec).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = WeightSpec::dg1(&[1.0], 1.0, 0.5);
        let back = WeightSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);
        assert_eq!(spec.digest(), back.digest());
        assert_ne!(spec.digest(), spec.with_s(0.6).digest());
    }
}
