//! Registry of numerical checks. Each check draws seeded random instances,
//! evaluates one inequality or identity per instance and reports the worst
//! signed violation.

mod distance;
mod embedding;
mod information;
pub(crate) mod protocols;

use std::time::Instant;

use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{CheckReport, SampleRecord};

pub use embedding::restricted_sqic;
pub use information::{shearer_sides, ShearerInstance};

type Sampler = fn(&ExperimentConfig, usize, &mut ChaCha20Rng) -> Result<SampleRecord>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slack {
    /// Inequalities and numerically evaluated identities.
    Check,
    /// Identities computed from exact enumeration.
    Exact,
}

pub struct CheckSpec {
    pub id: &'static str,
    pub statement: &'static str,
    pub default_samples: usize,
    pub slack: Slack,
    sampler: Sampler,
}

macro_rules! check {
    ($id:literal, $stmt:literal, $n:expr, $slack:ident, $f:path) => {
        CheckSpec {
            id: $id,
            statement: $stmt,
            default_samples: $n,
            slack: Slack::$slack,
            sampler: $f,
        }
    };
}

/// All registered checks, sorted by id.
pub static REGISTRY: &[CheckSpec] = &[
    check!(
        "AVG_ENC",
        "Σ p(x) B²(ρ^x, ρ) ≤ I(X:A)",
        1000,
        Check,
        information::avg_enc
    ),
    check!(
        "BURES_AVG",
        "B²(θ, θ') = E_x B²(θ^x, θ'^x) for equal classical marginals",
        1000,
        Check,
        distance::bures_avg
    ),
    check!(
        "BURES_TRIANGLE",
        "B(ρ, σ) ≤ B(ρ, τ) + B(τ, σ)",
        1000,
        Check,
        distance::bures_triangle
    ),
    check!(
        "BURES_WEAK",
        "B²(ρ¹, ρ^{t+1}) ≤ t Σ B²(ρ^i, ρ^{i+1})",
        1000,
        Check,
        distance::bures_weak
    ),
    check!(
        "CUT_PASTE_C",
        "B(Π(x,y), Π(x',y')) = B(Π(x,y'), Π(x',y))",
        1000,
        Exact,
        protocols::cut_paste_classical
    ),
    check!(
        "DIST_MONO",
        "Δ and B shrink under partial trace, unchanged under unitaries",
        1000,
        Check,
        distance::dist_mono
    ),
    check!(
        "EMBED_ERR",
        "err(Π') ≤ err(Π) + (m-1)/2^(m-2)",
        200,
        Check,
        embedding::embed_err
    ),
    check!(
        "EMBED_IC",
        "IC(Π', ν) ≤ (2/m) IC(Π, μ)",
        200,
        Check,
        embedding::embed_ic
    ),
    check!(
        "EMBED_SQIC",
        "SQIC(Π_E) ≤ (2/m) SQIC(Π) and err(Π_E) ≤ err(Π) + (m-1)/2^(m-2)",
        12,
        Check,
        embedding::embed_sqic
    ),
    check!(
        "ERR_DIST",
        "Δ(Θ^{x,y}, Θ^{x,y'}) ≥ 1 - 2 err when f(x,y) ≠ f(x,y')",
        1000,
        Check,
        protocols::err_dist
    ),
    check!("FVDG", "B² ≤ Δ ≤ √2 B", 1000, Check, distance::fvdg),
    check!(
        "INVARIANCE",
        "invariant permutations and local unitaries leave μ, I and SQIC unchanged",
        100,
        Check,
        embedding::invariance
    ),
    check!(
        "MI_AVG",
        "I(A:B|X) = E_x I(A:B)_{ρ^x} for classical X",
        1000,
        Check,
        information::mi_avg
    ),
    check!(
        "MI_CHAIN",
        "I(A:BC) = I(A:C) + I(A:B|C) = I(A:B) + I(A:C|B)",
        1000,
        Check,
        information::mi_chain
    ),
    check!(
        "MI_MONO",
        "I(A:B) ≤ I(A:BC), unchanged under unitaries on B",
        1000,
        Check,
        information::mi_mono
    ),
    check!(
        "MI_NONNEG",
        "I(A:B) ≥ 0, I(A:B|C) ≥ 0, I = 0 on product states",
        1000,
        Check,
        information::mi_nonneg
    ),
    check!(
        "PIHAT_SQIC",
        "SQIC(Π̂) = E_S SQIC(Π_S) ≤ SQIC(Π)/k",
        30,
        Check,
        embedding::pihat_sqic
    ),
    check!(
        "PIS_SQIC",
        "Π_S(σ) = Π(σ ⊗ ρ_μ) and SQIC(Π_S) = Σ I(X_S : Y R_Y B_i C_i)",
        100,
        Check,
        embedding::pis_sqic
    ),
    check!(
        "PRODUCT_MI",
        "I(X:B_iC_i|Y) = I(X:YB_iC_i) ≤ I(X:YR_YB_iC_i) for product μ",
        1000,
        Check,
        protocols::product_mi
    ),
    check!(
        "PYTHAG",
        "B²(Π(x,y'),Π(x',y')) + B²(Π(x,y),Π(x',y)) ≤ 2 B²(Π(x',y'),Π(x,y))",
        1000,
        Check,
        protocols::pythagorean
    ),
    check!(
        "QIC_CHAIN",
        "2 QCC ≥ QIC ≥ SQIC/t ≥ HQIC/t ≥ QIC/2t",
        1000,
        Check,
        protocols::qic_chain
    ),
    check!(
        "Q_CUT_PASTE",
        "B(Ψ_r^{u',v}, Ψ_r^{u',v'}) ≤ 2 Σ h_k",
        1000,
        Check,
        protocols::quantum_cut_paste
    ),
    check!(
        "SHEARER",
        "I(U_S:V|S) ≤ I(U:V)/k",
        1000,
        Check,
        information::shearer
    ),
];

pub fn check_ids() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|c| c.id)
}

pub fn lookup(id: &str) -> Result<&'static CheckSpec> {
    REGISTRY
        .iter()
        .find(|c| c.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| HarnessError::UnknownCheck(id.to_string()))
}

/// Stable 32-bit tag of a check id (FNV-1a), used to separate random streams.
fn tag(id: &str) -> u64 {
    let mut h: u32 = 0x811c_9dc5;
    for b in id.bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h as u64
}

pub fn run_check(check_id: &str, config: &ExperimentConfig) -> Result<CheckReport> {
    config.validate()?;
    let spec = lookup(check_id)?;
    let n = config.samples_or(spec.default_samples);
    let start = Instant::now();
    let details = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = qicost::random::rng(config.seed, (tag(spec.id) << 32) | i as u64);
            (spec.sampler)(config, i, &mut r)
        })
        .collect::<Result<Vec<_>>>()?;
    let slack = match spec.slack {
        Slack::Check => config.tolerances.check_slack,
        Slack::Exact => config.tolerances.exact_tol,
    };
    let ms = start.elapsed().as_millis() as u64;
    Ok(CheckReport::new(spec.id, config.seed, slack, details, ms))
}

/// Runs the given checks (all when empty) and returns reports sorted by id.
pub fn run_checks(ids: &[String], config: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let ids: Vec<&str> = if ids.is_empty() {
        check_ids().collect()
    } else {
        ids.iter()
            .map(|i| lookup(i).map(|c| c.id))
            .collect::<Result<_>>()?
    };
    let mut reports = ids
        .par_iter()
        .map(|id| run_check(id, config))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_sorted_and_unique() {
        let ids: Vec<&str> = check_ids().collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(ids, sorted);
        assert_eq!(ids.len(), 23);
    }

    #[test]
    fn unknown_check_is_an_error() {
        let e = run_check("NOPE", &ExperimentConfig::default()).unwrap_err();
        assert!(matches!(e, HarnessError::UnknownCheck(_)));
    }

    #[test]
    fn lookup_ignores_case() {
        assert_eq!(lookup("fvdg").unwrap().id, "FVDG");
    }
}
