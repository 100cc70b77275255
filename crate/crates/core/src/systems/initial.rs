//! ȧ_n(0), ḃ_n(0): the initial slopes of the second-order system, from the
//! undeformed (s = 0) family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::mvop::MvopFamily;
use crate::quad::DeOptions;
use crate::specfun::laguerre_overlap;
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InitialRoute {
    /// Closed-form overlap integrals of monic Laguerre polynomials; scalar
    /// weight with B = 0 only.
    Overlap,
    /// Quadrature of P̂_n W P̂_m* / y and P̂_n W P̂_n* at s = 0.
    Quadrature,
}

#[derive(Clone, Debug, Serialize)]
pub struct InitialDerivatives {
    pub n: usize,
    pub route: InitialRoute,
    pub adot: CMatrix,
    /// Undefined at n = 0.
    pub bdot: Option<CMatrix>,
}

fn is_scalar_laguerre(weight: &Weight) -> bool {
    weight.dim() == 1 && weight.b().fro() == 0.0 && weight.has_closed_moments()
}

/// ȧ_n(0) = (∫P̂_nWP̂_n*/y)(∫P̂_nWP̂_n*)⁻¹ and
/// ḃ_n(0) = (∫P̂_nWP̂_{n−1}*/y)(∫P̂_{n−1}WP̂_{n−1}*)⁻¹ at s = 0, by the overlap
/// route when the weight is scalar Laguerre and by quadrature otherwise.
pub fn initial_derivatives(weight: &Weight, n: usize) -> Result<InitialDerivatives> {
    let route = if is_scalar_laguerre(weight) { InitialRoute::Overlap } else { InitialRoute::Quadrature };
    initial_derivatives_by(weight, n, route)
}

pub fn initial_derivatives_by(weight: &Weight, n: usize, route: InitialRoute) -> Result<InitialDerivatives> {
    match route {
        InitialRoute::Overlap => {
            if !is_scalar_laguerre(weight) {
                return Err(Error::invalid("the overlap route needs the scalar Laguerre weight (N = 1, B = 0)"));
            }
            let al = weight.alpha();
            let adot = laguerre_overlap(n, n, al, al, al)? / laguerre_overlap(n, n, al, al, al + 1.0)?;
            let bdot = match n {
                0 => None,
                _ => Some(laguerre_overlap(n, n - 1, al, al, al)? / laguerre_overlap(n - 1, n - 1, al, al, al + 1.0)?),
            };
            Ok(InitialDerivatives {
                n,
                route,
                adot: CMatrix::from_real(1, &[adot]),
                bdot: bdot.map(|v| CMatrix::from_real(1, &[v])),
            })
        }
        InitialRoute::Quadrature => {
            let fam = MvopFamily::new(weight.at_s(0.0)?, n)?;
            let opts = DeOptions { tol: 1e-12, ..DeOptions::default() };
            let mut pairs = vec![(n, n)];
            if n > 0 {
                pairs.push((n, n - 1));
                pairs.push((n - 1, n - 1));
            }
            let inv_y = fam.quadrature_products(&pairs, -1, &opts)?;
            let plain = fam.quadrature_products(&pairs, 0, &opts)?;
            let adot = plain[0].rsolve_ctx(&inv_y[0], "∫P̂_nWP̂_n*")?;
            let bdot = match n {
                0 => None,
                _ => Some(plain[2].rsolve_ctx(&inv_y[1], "∫P̂_{n−1}WP̂_{n−1}*")?),
            };
            Ok(InitialDerivatives { n, route, adot, bdot })
        }
    }
}
