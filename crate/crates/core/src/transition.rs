//! Post-selection scaling for photon-added coherent inputs.
//!
//! With `n` equal amplitudes and `a = |α|²`, the chance of detecting `i`
//! photons after counter-displacement is `C(n, i) aⁿ⁻ⁱ / (1 + a)ⁿ`. The
//! regime labels below encode the thresholds `a ≤ 1/n` (the all-photon
//! outcome keeps a non-vanishing share) and `a ≥ n²` (the vacuum dominates).
//! They are labels, not complexity proofs.

use std::fmt;

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// `C(n, i) aⁿ⁻ⁱ / (1 + a)ⁿ`, evaluated in log space.
pub fn postselection_probability(n: u64, alpha_sq: f64, i: u64) -> Result<f64> {
    if i > n {
        return Err(Error::InvalidInput(format!("sector {i} exceeds n = {n}")));
    }
    if !(alpha_sq >= 0.0) || !alpha_sq.is_finite() {
        return Err(Error::InvalidInput(format!(
            "|α|² must be finite and non-negative, got {alpha_sq}"
        )));
    }
    let k = n - i;
    if alpha_sq == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let (nf, kf) = (n as f64, k as f64);
    Ok((ln_binomial(n, i) + kf * alpha_sq.ln() - nf * alpha_sq.ln_1p()).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regime {
    AaHardLike,
    Intermediate,
    ClassicallyTrivial,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AaHardLike => "AA-hard-like",
            Self::Intermediate => "intermediate",
            Self::ClassicallyTrivial => "classically-trivial",
        })
    }
}

pub fn classify_regime(n: u64, alpha_sq: f64) -> Result<Regime> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let nf = n as f64;
    Ok(if alpha_sq <= 1.0 / nf {
        Regime::AaHardLike
    } else if alpha_sq >= nf * nf {
        Regime::ClassicallyTrivial
    } else {
        Regime::Intermediate
    })
}

/// How `|α|²` scales with `n` in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingRule {
    InverseN,
    InverseNSquared,
    NSquared,
}

impl ScalingRule {
    pub fn alpha_sq(self, n: u64) -> f64 {
        let nf = n as f64;
        match self {
            Self::InverseN => 1.0 / nf,
            Self::InverseNSquared => 1.0 / (nf * nf),
            Self::NSquared => nf * nf,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::InverseN => "inv-n",
            Self::InverseNSquared => "inv-n2",
            Self::NSquared => "n2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeReport {
    pub n: u64,
    pub alpha_sq: f64,
    pub p_n: f64,
    pub p_0: f64,
    pub regime: Regime,
}

pub fn regime_report(n: u64, alpha_sq: f64) -> Result<RegimeReport> {
    Ok(RegimeReport {
        n,
        alpha_sq,
        p_n: postselection_probability(n, alpha_sq, n)?,
        p_0: postselection_probability(n, alpha_sq, 0)?,
        regime: classify_regime(n, alpha_sq)?,
    })
}

pub fn limit_sweep(rule: ScalingRule, n_values: &[u64]) -> Result<Vec<RegimeReport>> {
    n_values
        .iter()
        .map(|&n| regime_report(n, rule.alpha_sq(n)))
        .collect()
}

/// Columns `n, alpha_sq, p_n, p_0, regime`.
pub fn sweep_csv(reports: &[RegimeReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "alpha_sq", "p_n", "p_0", "regime"])
        .expect("in-memory write");
    for r in reports {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.alpha_sq),
            fmt_f64(r.p_n),
            fmt_f64(r.p_0),
            r.regime.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
