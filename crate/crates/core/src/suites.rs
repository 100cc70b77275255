//! Named verification suites over a grid of s values, with the tolerances
//! and finite-difference steps each suite runs at.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lax::{compute_lax, verify_structural};
use crate::mvop::MvopFamily;
use crate::report::ResidualReport;
use crate::special_family::{h_function_defect, verify_section_final, verify_twisted_flow, verify_twisted_lax, SECTION_FINAL_SUITE};
use crate::systems::{fd_halving, lax_chain, residual_closed_continuous, residual_closed_discrete, residual_dp_system, residual_p_system};
use crate::weight::{Weight, WeightSpec};

pub const STRUCTURAL_TOL: f64 = 1e-7;
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
pub const DISCRETE_TOL: f64 = 1e-6;
pub const FIRST_ORDER_H: f64 = 1e-4;
pub const FIRST_ORDER_TOL: f64 = 1e-5;
pub const SECOND_ORDER_H: f64 = 1e-3;
pub const SECOND_ORDER_TOL: f64 = 1e-3;
/// Halving runs at h, h/2, h/4 from this step.
pub const HALVING_H0: f64 = 0.04;
pub const HALVING_LEVELS: usize = 3;
/// Residuals below this are at the moment-route floor and carry no order.
pub const HALVING_FLOOR: f64 = 1e-9;
pub const SECTION_FINAL_TOL: f64 = 1e-6;
pub const INVARIANT_TOL: f64 = 1e-12;
pub const H_FUNCTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Structural,
    Discrete,
    Continuous,
    Closed,
    SectionFinal,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Structural, Suite::Discrete, Suite::Continuous, Suite::Closed, Suite::SectionFinal];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Structural => "structural",
            Suite::Discrete => "discrete",
            Suite::Continuous => "continuous",
            Suite::Closed => "closed",
            Suite::SectionFinal => "section-final",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

/// Runs `suite` for degrees 0..=n_max at every s in `s_list`. Rows come back
/// sorted. `All` skips the special-family suite for weights outside that
/// family; asking for it explicitly on such a weight is an error.
pub fn run_suite(spec: &WeightSpec, suite: Suite, n_max: usize, s_list: &[f64]) -> Result<ResidualReport> {
    let mut report = ResidualReport::new(spec.digest());
    for &s in s_list {
        let weight = Weight::new(&spec.with_s(s))?;
        let suites: Vec<Suite> = match suite {
            Suite::All => Suite::ALL.to_vec(),
            one => vec![one],
        };
        for one in suites {
            if one == Suite::SectionFinal && weight.dg1().is_none() {
                if suite == Suite::All {
                    report.note("section-final suite skipped: the weight is not in the special family");
                    continue;
                }
                return Err(Error::InvalidArgument("the section-final suite needs a weight with a dg1 block".into()));
            }
            report.merge(run_one(&weight, one, n_max)?);
        }
    }
    report.sort();
    Ok(report)
}

fn run_one(weight: &Weight, suite: Suite, n_max: usize) -> Result<ResidualReport> {
    let digest = weight.spec().digest();
    let s = weight.s();
    let mut r = ResidualReport::new(digest.clone());
    match suite {
        Suite::Structural => {
            let fam = MvopFamily::new(weight.clone(), n_max)?;
            for n in 0..=n_max {
                r.merge(verify_structural(&fam, &compute_lax(&fam, n)?, STRUCTURAL_TOL)?);
            }
            r.merge(fam.orthogonality_residual(ORTHOGONALITY_TOL)?);
        }
        Suite::Discrete => {
            let chain = lax_chain(&MvopFamily::new(weight.clone(), n_max + 1)?)?;
            for n in 0..=n_max {
                r.merge(residual_dp_system(&chain, n, &digest, DISCRETE_TOL)?);
            }
        }
        Suite::Continuous => {
            for n in 0..=n_max {
                r.merge(residual_p_system(weight, n, s, FIRST_ORDER_H, FIRST_ORDER_TOL)?);
                r.merge(fd_halving(weight, n, s, HALVING_H0, HALVING_LEVELS, HALVING_FLOOR)?);
            }
        }
        Suite::Closed => {
            let chain = lax_chain(&MvopFamily::new(weight.clone(), n_max)?)?;
            for n in 0..=n_max {
                r.merge(residual_closed_discrete(&chain, n, &digest, DISCRETE_TOL, None)?);
                r.merge(residual_closed_continuous(
                    weight,
                    n,
                    s,
                    FIRST_ORDER_H,
                    SECOND_ORDER_H,
                    FIRST_ORDER_TOL,
                    SECOND_ORDER_TOL,
                )?);
            }
        }
        Suite::SectionFinal => {
            let fam = weight.dg1().ok_or_else(|| Error::InvalidArgument("not a special-family weight".into()))?;
            let b0 = weight.b0().expect("special-family weight has B0");
            let (comm, herm) = fam.invariant_defects();
            let suite = SECTION_FINAL_SUITE;
            r.push(suite, 0, s, "construction_commutator", comm, comm / (1.0 + fam.b0.fro()), INVARIANT_TOL);
            let he = fam.hermitian_exponent().fro();
            r.push(suite, 0, s, "construction_hermitian", herm, herm / (1.0 + he), INVARIANT_TOL);
            let zs: Vec<f64> = (1..=10).map(|k| k as f64).collect();
            let hd = h_function_defect(fam, &zs)?;
            r.push(suite, 0, s, "h_function_conjugation", hd, hd, H_FUNCTION_TOL);
            let chain = lax_chain(&MvopFamily::new(weight.clone(), n_max + 1)?)?;
            for n in 0..=n_max {
                r.merge(verify_section_final(&chain, n, &b0, &digest, SECTION_FINAL_TOL)?);
                r.merge(verify_twisted_lax(&chain, n, &b0, &digest, SECTION_FINAL_TOL)?);
                r.merge(verify_twisted_flow(weight, n, s, FIRST_ORDER_H, FIRST_ORDER_TOL)?);
            }
        }
        Suite::All => unreachable!("expanded by run_suite"),
    }
    Ok(r)
}
