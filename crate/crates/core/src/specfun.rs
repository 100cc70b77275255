//! Scalar special functions: the modified Bessel function K_ν, Gamma,
//! Pochhammer symbols, monic Laguerre polynomials and their weighted overlaps.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Taylor coefficients of 1/Γ(1+x) = Σ_k R[k] x^k.
#[allow(clippy::excessive_precision)]
const RGAMMA: [f64; 27] = [
    1.0,
    0.577_215_664_901_532_86,
    -0.655_878_071_520_253_88,
    -0.042_002_635_034_095_236,
    0.166_538_611_382_291_49,
    -0.042_197_734_555_544_337,
    -0.009_621_971_527_876_973_6,
    0.007_218_943_246_663_099_5,
    -0.001_165_167_591_859_065_1,
    -0.000_215_241_674_114_950_97,
    0.000_128_050_282_388_116_19,
    -0.000_020_134_854_780_788_239,
    -0.000_001_250_493_482_142_670_7,
    0.000_001_133_027_231_981_695_9,
    -2.056_338_416_977_607_1e-7,
    6.116_095_104_481_415_8e-9,
    5.002_007_644_469_222_9e-9,
    -1.181_274_570_487_020_1e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071_3e-12,
    -3.696_805_618_642_205_7e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_506_8e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_260_8e-15,
    -1.181_259_301_697_458_8e-16,
    1.186_692_254_751_600_3e-18,
];

/// Returns (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ 1/2, where
/// gam1 = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ) and gam2 = (1/Γ(1−μ) + 1/Γ(1+μ))/2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let mut p = 1.0;
    // odd powers of 1/Γ(1+x) feed gam1, even powers feed gam2
    for pair in RGAMMA.chunks(2) {
        gam2 += pair[0] * p;
        if pair.len() > 1 {
            gam1 -= pair[1] * p;
        }
        p *= mu2;
    }
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

/// Modified Bessel function of the second kind K_ν(z) for real ν and z > 0.
///
/// Temme's series for z ≤ 2, Steed's continued fraction above, then upward
/// recurrence in the order.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    if !nu.is_finite() || !z.is_finite() {
        return Err(Error::NonFinite("bessel_k argument".into()));
    }
    if z <= 0.0 {
        return Err(Error::invalid(format!("bessel_k requires z > 0, got {z}")));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / z;
    let xi2 = 2.0 * xi;

    let (mut k_mu, mut k_mu1) = if z <= 2.0 {
        let x2 = 0.5 * z;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonFinite(format!("bessel_k series at z = {z}")));
        }
        (sum, sum1 * xi2)
    } else {
        let mut b = 2.0 * (1.0 + z);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonFinite(format!("bessel_k continued fraction at z = {z}")));
        }
        h *= a1;
        let k = (PI / (2.0 * z)).sqrt() * (-z).exp() / s;
        (k, k * (mu + z + 0.5 - h) * xi)
    };
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    if !k_mu.is_finite() {
        return Err(Error::NonFinite(format!("bessel_k({nu}, {z})")));
    }
    Ok(k_mu)
}

/// Large-argument asymptotic expansion of K_ν(z), truncated at the smallest
/// term. Only used as an independent cross-check for large z.
pub fn bessel_k_asymptotic(nu: f64, z: f64) -> f64 {
    let m = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (m - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
    }
    (PI / (2.0 * z)).sqrt() * (-z).exp() * sum
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Rising factorial (a)_k.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// ∫_0^∞ x^{σ−1} e^{−x−s/x} dx = 2 s^{σ/2} K_σ(2√s), or Γ(σ) at s = 0.
pub fn scalar_moment(sigma: f64, s: f64) -> Result<f64> {
    if !sigma.is_finite() || !s.is_finite() {
        return Err(Error::NonFinite("scalar_moment argument".into()));
    }
    if s < 0.0 {
        return Err(Error::invalid(format!("deformation s must be ≥ 0, got {s}")));
    }
    if s == 0.0 {
        if sigma <= 0.0 {
            return Err(Error::invalid(format!("scalar_moment requires σ > 0 at s = 0, got {sigma}")));
        }
        return Ok(gamma(sigma));
    }
    let r = s.sqrt();
    Ok(2.0 * r.powf(sigma) * bessel_k(sigma, 2.0 * r)?)
}

/// Coefficients (ascending powers) of the monic Laguerre polynomial of degree n
/// with parameter a.
pub fn monic_laguerre(n: usize, a: f64) -> Vec<f64> {
    // (−1)^{n−j} (a+j+1)_{n−j} C(n,j)
    (0..=n)
        .map(|j| {
            let sign = if (n - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * pochhammer(a + j as f64 + 1.0, n - j) * binomial(n, j)
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// ∫_0^∞ L̂_n^{(a1)}(x) L̂_m^{(a2)}(x) x^{σ−1} e^{−x} dx via the Pochhammer
/// double sum
/// (−1)^{n+m} Γ(σ)(a1+1)_n(a2+1)_m Σ_{k,l} (−n)_k(−m)_l(σ)_{k+l} / ((a1+1)_k(a2+1)_l k! l!).
pub fn laguerre_overlap(n: usize, m: usize, a1: f64, a2: f64, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::invalid(format!("laguerre_overlap requires σ > 0, got {sigma}")));
    }
    let mut sum = 0.0;
    for k in 0..=n {
        let tk = pochhammer(-(n as f64), k) / (pochhammer(a1 + 1.0, k) * pochhammer(1.0, k));
        for l in 0..=m {
            let tl = pochhammer(-(m as f64), l) / (pochhammer(a2 + 1.0, l) * pochhammer(1.0, l));
            sum += tk * tl * pochhammer(sigma, k + l);
        }
    }
    let sign = if (n + m).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * gamma(sigma) * pochhammer(a1 + 1.0, n) * pochhammer(a2 + 1.0, m) * sum)
}

/// Evaluates ascending-power coefficients at x.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
