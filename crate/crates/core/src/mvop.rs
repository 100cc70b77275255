//! Monic matrix-valued orthogonal polynomials from the block-Hankel moment
//! system, their norms γ_n and recursion coefficients α_n, β_n.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{solve_equilibrated, CMatrix};
use crate::quad::{integrate_matrices, DeOptions};
use crate::report::ResidualReport;
use crate::weight::{Weight, WeightSpec};

/// Polynomials of degree 0..=n_max+1 (one extra degree so that α_n is
/// available for every n ≤ n_max).
#[derive(Clone, Debug)]
pub struct MvopFamily {
    weight: Weight,
    n_max: usize,
    /// coeffs[n][j] is the coefficient of x^j in P̂_n; coeffs[n][n] = I.
    coeffs: Vec<Vec<CMatrix>>,
    gamma: Vec<CMatrix>,
    gamma_inv: Vec<CMatrix>,
}

pub fn build_family(spec: &WeightSpec, n_max: usize) -> Result<MvopFamily> {
    MvopFamily::new(Weight::new(spec)?, n_max)
}

impl MvopFamily {
    pub fn new(weight: Weight, n_max: usize) -> Result<Self> {
        let dim = weight.dim();
        let top = n_max + 1;
        let moments: Vec<CMatrix> = (0..=2 * top).map(|k| weight.moment(k as i64)).collect::<Result<_>>()?;
        let mut coeffs = Vec::with_capacity(top + 1);
        let mut gamma = Vec::with_capacity(top + 1);
        let mut gamma_inv = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let mut c = if n == 0 { Vec::new() } else { solve_degree(&moments, n, dim)? };
            c.push(CMatrix::identity(dim));
            // γ_n⁻¹ = ∫ P̂_n W x^n = Σ_i c_i M_{i+n}
            let mut gi = CMatrix::zeros(dim);
            for (i, ci) in c.iter().enumerate() {
                gi += ci * &moments[i + n];
            }
            let g = gi.inverse().map_err(|e| match e {
                Error::SingularMatrix { cond, .. } => Error::SingularMoment { degree: n, cond },
                other => other,
            })?;
            coeffs.push(c);
            gamma.push(g);
            gamma_inv.push(gi);
        }
        Ok(MvopFamily { weight, n_max, coeffs, gamma, gamma_inv })
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.weight.dim()
    }

    pub fn s(&self) -> f64 {
        self.weight.s()
    }

    fn check_degree(&self, n: usize, max: usize) -> Result<()> {
        if n > max {
            return Err(Error::IndexOutOfRange { index: n, max });
        }
        Ok(())
    }

    /// Coefficients of P̂_n in ascending powers, leading identity included.
    /// Degrees up to n_max + 1 are available.
    pub fn coeffs(&self, n: usize) -> Result<&[CMatrix]> {
        self.check_degree(n, self.n_max + 1)?;
        Ok(&self.coeffs[n])
    }

    pub fn gamma(&self, n: usize) -> Result<&CMatrix> {
        self.check_degree(n, self.n_max + 1)?;
        Ok(&self.gamma[n])
    }

    pub fn gamma_inv(&self, n: usize) -> Result<&CMatrix> {
        self.check_degree(n, self.n_max + 1)?;
        Ok(&self.gamma_inv[n])
    }

    /// a_{n,n−1}, zero for n = 0.
    pub fn subleading(&self, n: usize) -> Result<CMatrix> {
        self.check_degree(n, self.n_max + 1)?;
        Ok(if n == 0 { CMatrix::zeros(self.dim()) } else { self.coeffs[n][n - 1].clone() })
    }

    /// P̂_n(0) = a_{n,0}.
    pub fn at_zero(&self, n: usize) -> Result<&CMatrix> {
        self.check_degree(n, self.n_max + 1)?;
        Ok(&self.coeffs[n][0])
    }

    /// α_n = a_{n,n−1} − a_{n+1,n}, for n ≤ n_max.
    pub fn alpha_rec(&self, n: usize) -> Result<CMatrix> {
        self.check_degree(n, self.n_max)?;
        Ok(self.subleading(n)? - self.subleading(n + 1)?)
    }

    /// β_n = γ_n⁻¹ γ_{n−1}, for 1 ≤ n ≤ n_max + 1.
    pub fn beta_rec(&self, n: usize) -> Result<CMatrix> {
        if n == 0 {
            return Err(Error::invalid("β_0 is undefined"));
        }
        self.check_degree(n, self.n_max + 1)?;
        Ok(&self.gamma_inv[n] * &self.gamma[n - 1])
    }

    /// P̂_n(x) by Horner's rule; degrees up to n_max + 1.
    pub fn eval_poly(&self, n: usize, x: Complex64) -> Result<CMatrix> {
        let c = self.coeffs(n)?;
        Ok(c.iter().rev().fold(CMatrix::zeros(self.dim()), |acc, ck| acc * x + ck))
    }

    /// ∫ P̂_n W / y, from the moments.
    pub fn cauchy_left(&self, n: usize) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(self.dim());
        for (i, c) in self.coeffs(n)?.iter().enumerate() {
            acc += c * &self.weight.moment(i as i64 - 1)?;
        }
        Ok(acc)
    }

    /// ∫ W P̂_n* / y, from the moments.
    pub fn cauchy_right(&self, n: usize) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(self.dim());
        for (i, c) in self.coeffs(n)?.iter().enumerate() {
            acc += &self.weight.moment(i as i64 - 1)? * &c.adjoint();
        }
        Ok(acc)
    }

    /// Quadrature of ∫ P̂_n W P̂_m* y^k dy through the x^B route for every
    /// (n, m) pair listed.
    pub fn quadrature_products(&self, pairs: &[(usize, usize)], k: i32, opts: &DeOptions) -> Result<Vec<CMatrix>> {
        let top = pairs.iter().map(|&(n, m)| n.max(m)).max().unwrap_or(0);
        self.check_degree(top, self.n_max + 1)?;
        let dim = self.dim();
        let mut err = None;
        let out = integrate_matrices(dim, pairs.len(), opts, |x| {
            let w = match self.weight.eval_power(x) {
                Ok(w) => w * x.powi(k),
                Err(e) => {
                    err.get_or_insert(e);
                    CMatrix::zeros(dim)
                }
            };
            let xc = Complex64::new(x, 0.0);
            let polys: Vec<CMatrix> =
                (0..=top).map(|n| self.eval_poly(n, xc).expect("degree checked")).collect();
            pairs.iter().map(|&(n, m)| &polys[n] * &w * &polys[m].adjoint()).collect()
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(out)
    }

    /// Orthogonality defect of ∫P̂_n W P̂_m* against δ_{nm}γ_n⁻¹ for all
    /// n, m ≤ n_max, by quadrature independent of the moments. The relative
    /// residual is measured in the orthonormal frame: with γ_n⁻¹ = L_n L_n*,
    /// rel = ‖L_n⁻¹ (∫P̂_n W P̂_m* − δ_{nm}γ_n⁻¹) L_m⁻*‖.
    pub fn orthogonality_residual(&self, tol: f64) -> Result<ResidualReport> {
        let mut report = ResidualReport::new(self.weight.spec().digest());
        let pairs: Vec<(usize, usize)> =
            (0..=self.n_max).flat_map(|n| (0..=self.n_max).map(move |m| (n, m))).collect();
        let opts = DeOptions { tol: 1e-12, ..DeOptions::default() };
        let ints = self.quadrature_products(&pairs, 0, &opts)?;
        let chol_inv: Vec<CMatrix> = (0..=self.n_max)
            .map(|n| crate::linalg::cholesky_lower(&self.gamma_inv[n])?.inverse())
            .collect::<Result<_>>()?;
        for (&(n, m), int) in pairs.iter().zip(&ints) {
            let target = if n == m { self.gamma_inv[n].clone() } else { CMatrix::zeros(self.dim()) };
            let diff = int - &target;
            let rel = (&chol_inv[n] * &diff * &chol_inv[m].adjoint()).fro();
            report.push("orthogonality", n.max(m), self.s(), &format!("orthogonality[{n},{m}]"), diff.fro(), rel, tol);
        }
        Ok(report)
    }

    /// Family data for serialization.
    pub fn dump(&self) -> FamilyDump {
        FamilyDump {
            spec: self.weight.spec().clone(),
            n_max: self.n_max,
            b: self.weight.b().clone(),
            coeffs: (0..=self.n_max).map(|n| self.coeffs[n][..n].to_vec()).collect(),
            gamma: self.gamma[..=self.n_max].to_vec(),
            gamma_inv: self.gamma_inv[..=self.n_max].to_vec(),
            alpha_rec: (0..=self.n_max).map(|n| self.alpha_rec(n).expect("in range")).collect(),
            beta_rec: (1..=self.n_max).map(|n| self.beta_rec(n).expect("in range")).collect(),
        }
    }
}

/// Serialized family: `coeffs[n]` lists a_{n,0..n−1} (leading identity
/// implicit); `beta_rec[k]` is β_{k+1}.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyDump {
    pub spec: WeightSpec,
    pub n_max: usize,
    #[serde(rename = "B")]
    pub b: CMatrix,
    pub coeffs: Vec<Vec<CMatrix>>,
    pub gamma: Vec<CMatrix>,
    pub gamma_inv: Vec<CMatrix>,
    pub alpha_rec: Vec<CMatrix>,
    pub beta_rec: Vec<CMatrix>,
}

/// Solves [c_0 … c_{n−1}] H_n = −[M_n … M_{2n−1}] for the non-leading
/// coefficients of P̂_n. H_n is Hermitian, so the system is solved in the
/// adjoint form H_n X* = −R*.
fn solve_degree(moments: &[CMatrix], n: usize, dim: usize) -> Result<Vec<CMatrix>> {
    let size = n * dim;
    let h = DMatrix::from_fn(size, size, |r, c| moments[r / dim + c / dim].get(r % dim, c % dim));
    // rhs = −R*, block i = −M_{n+i}*
    let rhs = DMatrix::from_fn(size, dim, |r, c| -moments[n + r / dim].get(c, r % dim).conj());
    let y = solve_equilibrated(&h, &rhs).map_err(|cond| Error::SingularMoment { degree: n, cond })?;
    Ok((0..n)
        .map(|i| CMatrix::from_fn(dim, |r, c| y[(i * dim + c, r)].conj()))
        .collect())
}
