//! Residual reports: one row per (identity, n, s) with an absolute residual,
//! a relative residual and a tolerance verdict.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;

/// Tolerance multiplier from the `MVOP_TOL_SCALE` environment variable
/// (default 1). Values that do not parse as a positive number are ignored.
pub fn tol_scale() -> f64 {
    static SCALE: OnceLock<f64> = OnceLock::new();
    *SCALE.get_or_init(|| {
        std::env::var("MVOP_TOL_SCALE")
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0 && v.is_finite())
            .unwrap_or(1.0)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub suite: String,
    pub n: usize,
    pub s: f64,
    pub identity: String,
    #[serde(deserialize_with = "nan_if_null")]
    pub abs_residual: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub rel_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default)]
    pub skipped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

// JSON has no NaN; serde_json writes it as null
fn nan_if_null<'de, D: serde::Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(de)?.unwrap_or(f64::NAN))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub spec_digest: String,
    pub entries: Vec<ResidualEntry>,
    /// Free-form remarks, e.g. which reading of an ambiguous formula was used
    /// and what the alternatives gave.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ResidualReport {
    pub fn new(spec_digest: impl Into<String>) -> Self {
        ResidualReport { spec_digest: spec_digest.into(), entries: Vec::new(), notes: Vec::new() }
    }

    /// Records `lhs − rhs`; relative residual is `abs / (1 + max(‖lhs‖, ‖rhs‖))`.
    pub fn check(&mut self, suite: &str, n: usize, s: f64, identity: &str, lhs: &CMatrix, rhs: &CMatrix, tol: f64) -> f64 {
        let abs = (lhs - rhs).fro();
        let reference = lhs.fro().max(rhs.fro());
        self.push(suite, n, s, identity, abs, abs / (1.0 + reference), tol)
    }

    /// Records a residual matrix that should vanish, against a reference scale.
    pub fn check_zero(&mut self, suite: &str, n: usize, s: f64, identity: &str, residual: &CMatrix, reference: f64, tol: f64) -> f64 {
        let abs = residual.fro();
        self.push(suite, n, s, identity, abs, abs / (1.0 + reference), tol)
    }

    pub fn push(&mut self, suite: &str, n: usize, s: f64, identity: &str, abs: f64, rel: f64, tol: f64) -> f64 {
        let tolerance = tol * tol_scale();
        // NaN never passes
        let pass = rel <= tolerance;
        self.entries.push(ResidualEntry {
            suite: suite.into(),
            n,
            s,
            identity: identity.into(),
            abs_residual: abs,
            rel_residual: rel,
            tolerance,
            pass,
            skipped: false,
            note: None,
        });
        rel
    }

    /// A boundary case where the identity is not defined; recorded as passing.
    pub fn skip(&mut self, suite: &str, n: usize, s: f64, identity: &str, reason: &str) {
        self.entries.push(ResidualEntry {
            suite: suite.into(),
            n,
            s,
            identity: identity.into(),
            abs_residual: 0.0,
            rel_residual: 0.0,
            tolerance: 0.0,
            pass: true,
            skipped: true,
            note: Some(reason.into()),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        let text = text.into();
        if !self.notes.contains(&text) {
            self.notes.push(text);
        }
    }

    pub fn annotate_last(&mut self, text: impl Into<String>) {
        if let Some(e) = self.entries.last_mut() {
            e.note = Some(text.into());
        }
    }

    pub fn merge(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
        for n in other.notes {
            self.note(n);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Largest relative residual among non-skipped entries whose identity
    /// name starts with `prefix`.
    pub fn max_rel(&self, prefix: &str) -> f64 {
        self.entries
            .iter()
            .filter(|e| !e.skipped && e.identity.starts_with(prefix))
            .map(|e| e.rel_residual)
            .fold(0.0, f64::max)
    }

    pub fn find(&self, identity: &str, n: usize) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.identity == identity && e.n == n)
    }

    /// Deterministic row order: (suite, n, identity, s).
    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            (a.suite.as_str(), a.n, a.identity.as_str())
                .cmp(&(b.suite.as_str(), b.n, b.identity.as_str()))
                .then(a.s.total_cmp(&b.s))
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,n,s,identity,abs_residual,rel_residual,tolerance,pass\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{:.6e},{:.6e},{:.3e},{}\n",
                e.suite, e.n, e.s, e.identity, e.abs_residual, e.rel_residual, e.tolerance, e.pass
            ));
        }
        out
    }
}
