//! Small dense complex matrices.
//!
//! Every boldface N×N object (B, γ_n, p_n, a_n, …) is a [`CMatrix`]; the
//! 2N×2N Lax coefficients are [`BlockMatrix`] values built from four of them.
//! Norms are Frobenius throughout and relative residuals are taken as
//! `abs / (1 + ‖reference‖)`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Condition-number ceiling above which a linear solve is refused.
pub const SINGULAR_COND: f64 = 1e12;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// 2πi, the normalisation constant of the Cauchy transform.
pub fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

/// Relative residual `abs / (1 + reference)`.
pub fn relative(abs: f64, reference: f64) -> f64 {
    abs / (1.0 + reference)
}

#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn scalar(n: usize, c: impl Into<Complex64>) -> Self {
        Self::identity(n) * c.into()
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        CMatrix(DMatrix::from_fn(n, n, f))
    }

    /// Real matrix from row-major entries.
    pub fn from_real(n: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), n * n, "from_real: expected {} entries", n * n);
        Self::from_fn(n, |i, j| Complex64::new(entries[i * n + j], 0.0))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::invalid(format!("matrix must be square and nonempty, got {}x{}", m.nrows(), m.ncols())));
        }
        Ok(CMatrix(m))
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.0[(i, j)] = v;
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn fro(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest imaginary part of any entry, relative to the matrix norm.
    pub fn imag_defect(&self) -> f64 {
        self.0.iter().map(|z| z.im * z.im).sum::<f64>().sqrt()
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(self)
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        self * other - other * self
    }

    pub fn powi(&self, k: u32) -> CMatrix {
        let mut out = CMatrix::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// 1-norm condition number, computed from an explicit inverse.
    pub fn cond1(&self) -> f64 {
        match self.0.clone().try_inverse() {
            Some(inv) => norm1(&self.0) * norm1(&inv),
            None => f64::INFINITY,
        }
    }

    /// `self⁻¹·rhs`.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        solve(self, rhs)
    }

    /// `lhs·self⁻¹`, computed as `(self*⁻¹ lhs*)*`.
    pub fn rsolve(&self, lhs: &CMatrix) -> Result<CMatrix> {
        Ok(solve(&self.adjoint(), &lhs.adjoint())?.adjoint())
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        solve(self, &CMatrix::identity(self.dim()))
    }

    /// Same as [`CMatrix::solve`], with `context` named in a singularity error.
    pub fn solve_ctx(&self, rhs: &CMatrix, context: &str) -> Result<CMatrix> {
        solve(self, rhs).map_err(|e| with_context(e, context))
    }

    pub fn rsolve_ctx(&self, lhs: &CMatrix, context: &str) -> Result<CMatrix> {
        self.rsolve(lhs).map_err(|e| with_context(e, context))
    }

    pub fn inverse_ctx(&self, context: &str) -> Result<CMatrix> {
        self.inverse().map_err(|e| with_context(e, context))
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<Complex64> {
        let n = self.dim();
        (0..n * n).map(|k| self.0[(k / n, k % n)]).collect()
    }

    pub fn from_entries(n: usize, entries: &[Complex64]) -> Self {
        Self::from_fn(n, |i, j| entries[i * n + j])
    }

    /// Conjugate each entry (no transpose).
    pub fn conj(&self) -> CMatrix {
        CMatrix(self.0.map(|z| z.conj()))
    }

    /// Hermitian part `(M + M*)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        (self + &self.adjoint()) * 0.5
    }
}

fn with_context(e: Error, context: &str) -> Error {
    match e {
        Error::SingularMatrix { cond, .. } => Error::SingularMatrix { context: context.to_string(), cond },
        other => other,
    }
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `‖M − M*‖_F`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - &m.adjoint()).fro()
}

/// Solves `m·X = rhs` by partial-pivot LU. Refuses matrices whose 1-norm
/// condition estimate exceeds [`SINGULAR_COND`].
pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    if !m.is_finite() || !rhs.is_finite() {
        return Err(Error::NonFinite("solve".into()));
    }
    let lu = m.0.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::SingularMatrix { context: "solve".into(), cond: f64::INFINITY })?;
    let cond = norm1(&m.0) * norm1(&inv);
    if !(cond <= SINGULAR_COND) {
        return Err(Error::SingularMatrix { context: "solve".into(), cond });
    }
    let x = lu.solve(&rhs.0).ok_or(Error::SingularMatrix { context: "solve".into(), cond })?;
    Ok(CMatrix(x))
}

/// Solves a general (possibly rectangular right-hand side) system
/// `m·X = rhs` after symmetric diagonal equilibration of `m`; the condition
/// threshold applies to the equilibrated matrix. Used for block-Hankel
/// systems whose raw entries span many orders of magnitude.
pub fn solve_equilibrated(m: &DMatrix<Complex64>, rhs: &DMatrix<Complex64>) -> std::result::Result<DMatrix<Complex64>, f64> {
    let n = m.nrows();
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let v = m[(i, i)].norm();
            if v > 0.0 {
                1.0 / v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * d[i] * d[j]);
    let inv = match scaled.clone().try_inverse() {
        Some(inv) => inv,
        None => return Err(f64::INFINITY),
    };
    let cond = norm1(&scaled) * norm1(&inv);
    if !(cond <= SINGULAR_COND) {
        return Err(cond);
    }
    let scaled_rhs = DMatrix::from_fn(n, rhs.ncols(), |i, j| rhs[(i, j)] * d[i]);
    let y = scaled.lu().solve(&scaled_rhs).ok_or(cond)?;
    Ok(DMatrix::from_fn(n, rhs.ncols(), |i, j| y[(i, j)] * d[i]))
}

/// `x^B = exp(B log x)`, via Padé scaling-and-squaring.
pub fn mat_power_log(b: &CMatrix, x: f64) -> Result<CMatrix> {
    if !x.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("mat_power_log".into()));
    }
    if x <= 0.0 {
        return Err(Error::invalid(format!("mat_power_log requires x > 0, got {x}")));
    }
    let scaled = &b.0 * Complex64::new(x.ln(), 0.0);
    Ok(CMatrix(scaled.exp()))
}

/// Hermitian square root of a Hermitian positive-definite matrix and its
/// inverse, via the Hermitian eigendecomposition.
pub fn hermitian_sqrt_pair(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let herm = m.hermitian_part();
    let eig = herm.0.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::invalid("matrix is not positive definite"));
    }
    let q = &eig.eigenvectors;
    let sq = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.sqrt(), 0.0)));
    let isq = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)));
    Ok((CMatrix(q * sq * q.adjoint()), CMatrix(q * isq * q.adjoint())))
}

/// Lower-triangular Cholesky factor L with `m = L·L*`.
pub fn cholesky_lower(m: &CMatrix) -> Result<CMatrix> {
    let chol = nalgebra::Cholesky::new(m.hermitian_part().0)
        .ok_or_else(|| Error::invalid("matrix is not positive definite"))?;
    Ok(CMatrix(chol.l()))
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    m.hermitian_part().0.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        write!(f, "[")?;
        for i in 0..n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..n {
                let z = self.get(i, j);
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:.6e}{:+.6e}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

// Arithmetic. All four owned/borrowed combinations for the binary ops, and
// scalar multiplication by f64 and Complex64.

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(&self.0 $op rhs.0)
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(self.0 $op &rhs.0)
            }
        }
        impl $tr<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(self.0 $op rhs.0)
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);
impl_binop!(Mul, mul, *);

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: CMatrix) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        self.0 -= &rhs.0;
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-self.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

macro_rules! impl_scalar {
    ($t:ty, $conv:expr) => {
        impl Mul<$t> for CMatrix {
            type Output = CMatrix;
            fn mul(self, c: $t) -> CMatrix {
                let c: Complex64 = $conv(c);
                CMatrix(self.0 * c)
            }
        }
        impl Mul<$t> for &CMatrix {
            type Output = CMatrix;
            fn mul(self, c: $t) -> CMatrix {
                let c: Complex64 = $conv(c);
                CMatrix(&self.0 * c)
            }
        }
        impl Mul<CMatrix> for $t {
            type Output = CMatrix;
            fn mul(self, m: CMatrix) -> CMatrix {
                m * self
            }
        }
        impl Mul<&CMatrix> for $t {
            type Output = CMatrix;
            fn mul(self, m: &CMatrix) -> CMatrix {
                m * self
            }
        }
    };
}

impl_scalar!(f64, |c: f64| Complex64::new(c, 0.0));
impl_scalar!(Complex64, |c: Complex64| c);

// Complex numbers serialize as [re, im]; matrices as row-major nested lists.

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let rows: Vec<Vec<[f64; 2]>> =
            (0..n).map(|i| (0..n).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect()).collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<ComplexRepr>> = Vec::deserialize(de)?;
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("matrix must be square and nonempty"));
        }
        Ok(CMatrix::from_fn(n, |i, j| rows[i][j].0))
    }
}

/// Accepts either `[re, im]` or a bare real number.
struct ComplexRepr(Complex64);

impl<'de> Deserialize<'de> for ComplexRepr {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Real(f64),
        }
        Ok(match Repr::deserialize(de)? {
            Repr::Pair([re, im]) => ComplexRepr(Complex64::new(re, im)),
            Repr::Real(re) => ComplexRepr(Complex64::new(re, 0.0)),
        })
    }
}

pub mod complex_pair {
    //! serde adapter for a single complex number as `[re, im]`.
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, ser: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(de)?;
        Ok(Complex64::new(re, im))
    }
}

pub mod complex_pair_vec {
    //! serde adapter for `Vec<Complex64>` as a list of `[re, im]` pairs.
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], ser: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Complex64>, D::Error> {
        let v = Vec::<super::ComplexRepr>::deserialize(de)?;
        Ok(v.into_iter().map(|z| z.0).collect())
    }
}

/// A 2×2 grid of equal-size [`CMatrix`] blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrix {
    pub b11: CMatrix,
    pub b12: CMatrix,
    pub b21: CMatrix,
    pub b22: CMatrix,
}

impl BlockMatrix {
    pub fn new(b11: CMatrix, b12: CMatrix, b21: CMatrix, b22: CMatrix) -> Result<Self> {
        let n = b11.dim();
        if b12.dim() != n || b21.dim() != n || b22.dim() != n {
            return Err(Error::invalid("block matrix blocks must share a dimension"));
        }
        Ok(BlockMatrix { b11, b12, b21, b22 })
    }

    pub fn block_dim(&self) -> usize {
        self.b11.dim()
    }

    pub fn identity(n: usize) -> Self {
        BlockMatrix { b11: CMatrix::identity(n), b12: CMatrix::zeros(n), b21: CMatrix::zeros(n), b22: CMatrix::identity(n) }
    }

    pub fn diag(d1: CMatrix, d2: CMatrix) -> Self {
        let n = d1.dim();
        BlockMatrix { b11: d1, b12: CMatrix::zeros(n), b21: CMatrix::zeros(n), b22: d2 }
    }

    /// σ₃ = diag(I, −I).
    pub fn sigma3(n: usize) -> Self {
        Self::diag(CMatrix::identity(n), -CMatrix::identity(n))
    }

    pub fn fro(&self) -> f64 {
        (self.b11.fro().powi(2) + self.b12.fro().powi(2) + self.b21.fro().powi(2) + self.b22.fro().powi(2)).sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.b11.trace() + self.b22.trace()
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        BlockMatrix { b11: &self.b11 * c, b12: &self.b12 * c, b21: &self.b21 * c, b22: &self.b22 * c }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.block_dim();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let blk = match (i < n, j < n) {
                (true, true) => &self.b11,
                (true, false) => &self.b12,
                (false, true) => &self.b21,
                (false, false) => &self.b22,
            };
            blk.get(i % n, j % n)
        })
    }

    pub fn commutator(&self, other: &BlockMatrix) -> BlockMatrix {
        &(self * other) - &(other * self)
    }
}

impl Mul<&BlockMatrix> for &BlockMatrix {
    type Output = BlockMatrix;
    fn mul(self, r: &BlockMatrix) -> BlockMatrix {
        BlockMatrix {
            b11: &self.b11 * &r.b11 + &self.b12 * &r.b21,
            b12: &self.b11 * &r.b12 + &self.b12 * &r.b22,
            b21: &self.b21 * &r.b11 + &self.b22 * &r.b21,
            b22: &self.b21 * &r.b12 + &self.b22 * &r.b22,
        }
    }
}

impl Add<&BlockMatrix> for &BlockMatrix {
    type Output = BlockMatrix;
    fn add(self, r: &BlockMatrix) -> BlockMatrix {
        BlockMatrix { b11: &self.b11 + &r.b11, b12: &self.b12 + &r.b12, b21: &self.b21 + &r.b21, b22: &self.b22 + &r.b22 }
    }
}

impl Sub<&BlockMatrix> for &BlockMatrix {
    type Output = BlockMatrix;
    fn sub(self, r: &BlockMatrix) -> BlockMatrix {
        BlockMatrix { b11: &self.b11 - &r.b11, b12: &self.b12 - &r.b12, b21: &self.b21 - &r.b21, b22: &self.b22 - &r.b22 }
    }
}
