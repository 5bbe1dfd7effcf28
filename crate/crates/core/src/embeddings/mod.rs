//! Embedding a small problem into `t` of the `n` coordinates of a larger one.
//!
//! An embedding spec is a distribution over `t`-subsets `S` of the
//! coordinates, with a permutation of the `t`-bit strings for each party and
//! each set. The embedded inputs occupy the coordinates of `S` in increasing
//! order; the remaining coordinates are sampled privately from the per-coordinate
//! distribution.

mod classical;
mod quantum;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{z_string, EdgeIndexing};
use crate::inputs::InputDistribution;
use crate::qkernel::linalg::neumaier_sum;
use crate::qkernel::Tolerances;

pub use classical::classical_embed;
pub use quantum::{quantum_embed_averaged, quantum_embed_fixed_set, EMBEDDING_LABELS};

/// Permutation of `t`-bit strings.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StringPermutation {
    #[default]
    Identity,
    Xor {
        mask: u64,
    },
    /// `v ↦ perm[v]`.
    Table {
        perm: Vec<u32>,
    },
}

impl StringPermutation {
    pub fn apply(&self, v: u64) -> u64 {
        match self {
            StringPermutation::Identity => v,
            StringPermutation::Xor { mask } => v ^ mask,
            StringPermutation::Table { perm } => perm[v as usize] as u64,
        }
    }

    pub fn inverse(&self) -> StringPermutation {
        match self {
            StringPermutation::Table { perm } => {
                let mut inv = vec![0u32; perm.len()];
                for (i, &v) in perm.iter().enumerate() {
                    inv[v as usize] = i as u32;
                }
                StringPermutation::Table { perm: inv }
            }
            other => other.clone(),
        }
    }

    fn validate(&self, t: usize) -> Result<()> {
        match self {
            StringPermutation::Identity => Ok(()),
            StringPermutation::Xor { mask } => {
                if mask >> t != 0 {
                    return Err(Error::OutOfRange(format!("mask {mask:#b} on {t} bits")));
                }
                Ok(())
            }
            StringPermutation::Table { perm } => {
                if perm.len() != 1 << t {
                    return Err(Error::DimensionMismatch {
                        expected: 1 << t,
                        got: perm.len(),
                    });
                }
                let mut seen = vec![false; perm.len()];
                for &v in perm {
                    if v as usize >= perm.len() || std::mem::replace(&mut seen[v as usize], true) {
                        return Err(Error::InvalidProtocol(format!(
                            "{perm:?} is not a permutation"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// One support point of the set distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedSet {
    /// Coordinates in `0..n`, strictly increasing.
    pub coords: Vec<usize>,
    pub prob: f64,
    #[serde(default)]
    pub perm_a: StringPermutation,
    #[serde(default)]
    pub perm_b: StringPermutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    n: usize,
    t: usize,
    k_bound: f64,
    sets: Vec<WeightedSet>,
}

/// Validated embedding spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct EmbeddingSpec {
    n: usize,
    t: usize,
    k_bound: f64,
    sets: Vec<WeightedSet>,
}

impl TryFrom<RawSpec> for EmbeddingSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        EmbeddingSpec::new(r.n, r.t, r.k_bound, r.sets)
    }
}

impl From<EmbeddingSpec> for RawSpec {
    fn from(s: EmbeddingSpec) -> RawSpec {
        RawSpec {
            n: s.n,
            t: s.t,
            k_bound: s.k_bound,
            sets: s.sets,
        }
    }
}

impl EmbeddingSpec {
    pub fn new(n: usize, t: usize, k_bound: f64, sets: Vec<WeightedSet>) -> Result<Self> {
        if t == 0 || t > n || n > 62 {
            return Err(Error::OutOfRange(format!(
                "embedding of {t} into {n} coordinates"
            )));
        }
        if sets.is_empty() {
            return Err(Error::InvalidDistribution("no sets".into()));
        }
        for s in &sets {
            if s.coords.len() != t
                || s.coords.windows(2).any(|w| w[0] >= w[1])
                || s.coords.iter().any(|&c| c >= n)
            {
                return Err(Error::InvalidProtocol(format!(
                    "set {:?} is not an increasing {t}-subset of 0..{n}",
                    s.coords
                )));
            }
            if !(s.prob >= 0.0) || !s.prob.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "probability {}",
                    s.prob
                )));
            }
            s.perm_a.validate(t)?;
            s.perm_b.validate(t)?;
        }
        let total = neumaier_sum(sets.iter().map(|s| s.prob));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "set probabilities sum to {total}"
            )));
        }
        if !(k_bound > 0.0) {
            return Err(Error::OutOfRange(format!("k_bound {k_bound}")));
        }
        let spec = Self {
            n,
            t,
            k_bound,
            sets,
        };
        let worst = spec.max_coverage();
        if worst > 1.0 / k_bound + Tolerances::default().check_slack {
            return Err(Error::Precondition(format!(
                "a coordinate is covered with probability {worst} > 1/{k_bound}"
            )));
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    pub fn sets(&self) -> &[WeightedSet] {
        &self.sets
    }

    /// `Pr_S[i ∈ S]` for each coordinate.
    pub fn coverage(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                neumaier_sum(
                    self.sets
                        .iter()
                        .filter(|s| s.coords.contains(&i))
                        .map(|s| s.prob),
                )
            })
            .collect()
    }

    pub fn max_coverage(&self) -> f64 {
        self.coverage().into_iter().fold(0.0, f64::max)
    }

    /// Bits needed to index the sets.
    pub fn index_bits(&self) -> usize {
        (usize::BITS - (self.sets.len() - 1).leading_zeros()).max(1) as usize
    }

    /// Same spec with one set carrying all the weight and identity permutations.
    pub fn point(n: usize, coords: Vec<usize>) -> Result<Self> {
        let t = coords.len();
        Self::new(
            n,
            t,
            1.0,
            vec![WeightedSet {
                coords,
                prob: 1.0,
                perm_a: StringPermutation::Identity,
                perm_b: StringPermutation::Identity,
            }],
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Spec reducing `Eq` on `m − 1` bits to `sink(x ⊕ y)` on `m` vertices:
/// `S = E_{v_i}` for uniform `i`, Alice XORs `z_{v_i}`, Bob does nothing.
pub fn sink_embedding_spec(m: usize) -> Result<EmbeddingSpec> {
    let e = EdgeIndexing::new(m)?;
    let sets = (1..=m)
        .map(|i| {
            Ok(WeightedSet {
                coords: e.incident(i)?,
                prob: 1.0 / m as f64,
                perm_a: StringPermutation::Xor {
                    mask: z_string(m, i)?,
                },
                perm_b: StringPermutation::Identity,
            })
        })
        .collect::<Result<_>>()?;
    EmbeddingSpec::new(e.len(), m - 1, m as f64 / 2.0, sets)
}

/// Marginals of a single-coordinate product distribution on one bit per party.
pub fn coordinate_marginals(mu1: &InputDistribution) -> Result<(Vec<f64>, Vec<f64>)> {
    if mu1.x_size() != 2 || mu1.y_size() != 2 {
        return Err(Error::DomainMismatch(format!(
            "coordinate distribution must be on 1 + 1 bits, got {}x{}",
            mu1.x_size(),
            mu1.y_size()
        )));
    }
    mu1.require_product(Tolerances::default().exact_tol)?;
    Ok((mu1.x_marginal(), mu1.y_marginal()))
}

/// Largest change of `μ^{⊗t}` under `P_A^S ⊗ P_B^S` over all sets. Errors with
/// [`Error::InvarianceViolated`] when it exceeds the exact tolerance.
pub fn verify_invariance(spec: &EmbeddingSpec, mu1: &InputDistribution) -> Result<f64> {
    if mu1.x_size() != 2 || mu1.y_size() != 2 {
        return Err(Error::DomainMismatch(
            "coordinate distribution must be 2x2".into(),
        ));
    }
    let t = spec.t();
    let q = |x: u64, y: u64| -> f64 {
        (0..t)
            .map(|j| mu1.prob((x >> (t - 1 - j)) & 1, (y >> (t - 1 - j)) & 1))
            .product()
    };
    let mut worst = 0.0f64;
    for s in spec.sets() {
        let (ia, ib) = (s.perm_a.inverse(), s.perm_b.inverse());
        for x in 0..1u64 << t {
            for y in 0..1u64 << t {
                worst = worst.max((q(ia.apply(x), ib.apply(y)) - q(x, y)).abs());
            }
        }
    }
    if worst > Tolerances::default().exact_tol {
        return Err(Error::InvarianceViolated(worst));
    }
    Ok(worst)
}

/// Places the `t` bits of `inside` on `coords` and the `n − t` bits of
/// `outside` on the remaining coordinates, both in increasing order.
pub fn embed_bits(n: usize, coords: &[usize], inside: u64, outside: u64) -> u64 {
    let t = coords.len();
    let (mut ii, mut oi) = (0usize, 0usize);
    let mut w = 0u64;
    for j in 0..n {
        let b = if ii < t && coords[ii] == j {
            ii += 1;
            (inside >> (t - ii)) & 1
        } else {
            oi += 1;
            (outside >> (n - t - oi)) & 1
        };
        w = (w << 1) | b;
    }
    w
}

/// Product distribution of `bits` independent coordinates with marginal `m`.
pub(crate) fn power_probs(m: &[f64], bits: usize) -> Vec<f64> {
    (0..1u64 << bits)
        .map(|v| {
            (0..bits)
                .map(|j| m[((v >> (bits - 1 - j)) & 1) as usize])
                .product()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{project, sink};

    #[test]
    fn sink_spec_shape() {
        for m in 3..=5 {
            let s = sink_embedding_spec(m).unwrap();
            assert_eq!(s.t(), m - 1);
            assert_eq!(s.n(), m * (m - 1) / 2);
            assert!((s.max_coverage() - 2.0 / m as f64).abs() < 1e-15);
            let u = InputDistribution::uniform(2, 2);
            assert!(verify_invariance(&s, &u).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn embedding_reduces_eq_to_sink() {
        let m = 4;
        let s = sink_embedding_spec(m).unwrap();
        let n = s.n();
        for (i, set) in s.sets().iter().enumerate() {
            for c in 0..1u64 << (m - 1) {
                for out in 0..1u64 << (n - s.t()) {
                    let x = embed_bits(n, &set.coords, set.perm_a.apply(c), out);
                    let y = embed_bits(n, &set.coords, c, 0);
                    assert_eq!(
                        project(m, x ^ y, i + 1).unwrap(),
                        z_string(m, i + 1).unwrap()
                    );
                    assert!(sink(m, x ^ y).unwrap());
                }
            }
        }
    }

    #[test]
    fn embed_bits_places_coordinates() {
        assert_eq!(embed_bits(4, &[1, 3], 0b11, 0b00), 0b0101);
        assert_eq!(embed_bits(4, &[1, 3], 0b10, 0b01), 0b0110);
        assert_eq!(embed_bits(3, &[0, 1, 2], 0b101, 0), 0b101);
    }

    #[test]
    fn invariance_detects_bias() {
        let s = sink_embedding_spec(3).unwrap();
        let biased = InputDistribution::product(&[0.3, 0.7], &[0.5, 0.5]).unwrap();
        assert!(matches!(
            verify_invariance(&s, &biased),
            Err(Error::InvarianceViolated(_))
        ));
    }

    #[test]
    fn spec_validation_and_json() {
        let s = sink_embedding_spec(3).unwrap();
        let back = EmbeddingSpec::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
        let bad = WeightedSet {
            coords: vec![0, 1],
            prob: 1.0,
            perm_a: StringPermutation::Identity,
            perm_b: StringPermutation::Identity,
        };
        assert!(EmbeddingSpec::new(3, 2, 2.0, vec![bad.clone()]).is_err());
        assert!(EmbeddingSpec::new(3, 2, 1.0, vec![bad]).is_ok());
        let perm = StringPermutation::Table {
            perm: vec![2, 0, 3, 1],
        };
        assert_eq!(perm.inverse().apply(perm.apply(3)), 3);
    }
}
