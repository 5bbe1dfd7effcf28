//! Classical distributions viewed as diagonal states.
//!
//! A diagonal density matrix has its probabilities as spectrum, so its von
//! Neumann entropy is the Shannon entropy; the tables here evaluate exactly the
//! same quantities as the dense kernel without materializing the diagonal.

use super::linalg::{entropy_bits, neumaier_sum};
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Finite distribution over `u64`-labelled outcomes, sorted by label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassicalDistribution {
    support: Vec<(u64, f64)>,
}

impl ClassicalDistribution {
    /// Distribution over `0..probs.len()`.
    pub fn from_dense(probs: &[f64]) -> Result<Self> {
        Self::from_pairs(probs.iter().enumerate().map(|(i, &p)| (i as u64, p)))
    }

    /// Merges duplicate labels; zero-probability outcomes are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (u64, f64)>>(pairs: I) -> Result<Self> {
        let d = Self::from_pairs_unchecked(pairs);
        for &(k, p) in &d.support {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} for outcome {k}"
                )));
            }
        }
        let total = d.total();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(d)
    }

    pub(crate) fn from_pairs_unchecked<I: IntoIterator<Item = (u64, f64)>>(pairs: I) -> Self {
        let mut v: Vec<(u64, f64)> = pairs.into_iter().collect();
        v.sort_by_key(|(k, _)| *k);
        let mut support: Vec<(u64, f64)> = Vec::with_capacity(v.len());
        for (k, p) in v {
            match support.last_mut() {
                Some((lk, lp)) if *lk == k => *lp += p,
                _ => support.push((k, p)),
            }
        }
        support.retain(|(_, p)| *p != 0.0);
        Self { support }
    }

    pub fn uniform(n: usize) -> Self {
        let p = 1.0 / n as f64;
        Self {
            support: (0..n as u64).map(|k| (k, p)).collect(),
        }
    }

    pub fn point(k: u64) -> Self {
        Self {
            support: vec![(k, 1.0)],
        }
    }

    pub fn prob(&self, k: u64) -> f64 {
        self.support
            .binary_search_by_key(&k, |(l, _)| *l)
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.support.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(self.support.iter().map(|(_, p)| *p))
    }

    /// Image distribution under `f`.
    pub fn map<F: Fn(u64) -> u64>(&self, f: F) -> Self {
        Self::from_pairs_unchecked(self.support.iter().map(|&(k, p)| (f(k), p)))
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(self.support.iter().map(|(_, p)| *p))
    }
}

/// `Σ √(p q)`: the fidelity of the two diagonal states.
pub fn classical_fidelity(p: &ClassicalDistribution, q: &ClassicalDistribution) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut terms = Vec::new();
    while i < p.support.len() && j < q.support.len() {
        let (kp, vp) = p.support[i];
        let (kq, vq) = q.support[j];
        match kp.cmp(&kq) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                terms.push((vp * vq).sqrt());
                i += 1;
                j += 1;
            }
        }
    }
    neumaier_sum(terms).clamp(0.0, 1.0)
}

pub fn classical_bures(p: &ClassicalDistribution, q: &ClassicalDistribution) -> f64 {
    (1.0 - classical_fidelity(p, q)).max(0.0).sqrt()
}

pub fn classical_bures_sq(p: &ClassicalDistribution, q: &ClassicalDistribution) -> f64 {
    (1.0 - classical_fidelity(p, q)).max(0.0)
}

/// Total variation distance, the trace distance of the diagonal states.
pub fn classical_trace_distance(p: &ClassicalDistribution, q: &ClassicalDistribution) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut terms = Vec::new();
    while i < p.support.len() || j < q.support.len() {
        let kp = p.support.get(i).map(|x| x.0);
        let kq = q.support.get(j).map(|x| x.0);
        match (kp, kq) {
            (Some(a), Some(b)) if a == b => {
                terms.push((p.support[i].1 - q.support[j].1).abs());
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a < b => {
                terms.push(p.support[i].1);
                i += 1;
            }
            (Some(_), None) => {
                terms.push(p.support[i].1);
                i += 1;
            }
            _ => {
                terms.push(q.support[j].1);
                j += 1;
            }
        }
    }
    (0.5 * neumaier_sum(terms)).clamp(0.0, 1.0)
}

/// Joint distribution of named discrete variables, one packed row per atom.
///
/// Each variable has a fixed bit width; a row stores all values in one `u128`.
#[derive(Debug, Clone)]
pub struct JointTable {
    names: Vec<String>,
    widths: Vec<u32>,
    shifts: Vec<u32>,
    keys: Vec<u128>,
    probs: Vec<f64>,
}

impl JointTable {
    /// Variables with the bit widths needed for their largest value.
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = (S, u32)>) -> Result<Self> {
        let mut names = Vec::new();
        let mut widths = Vec::new();
        for (n, w) in vars {
            let n = n.into();
            if names.contains(&n) {
                return Err(Error::LabelCollision(n));
            }
            names.push(n);
            widths.push(w);
        }
        let total: u32 = widths.iter().sum();
        if total > 128 {
            return Err(Error::CapExceeded(format!(
                "{total} key bits in a joint table"
            )));
        }
        // First variable in the most significant bits.
        let mut shifts = vec![0; widths.len()];
        let mut acc = 0;
        for i in (0..widths.len()).rev() {
            shifts[i] = acc;
            acc += widths[i];
        }
        Ok(Self {
            names,
            widths,
            shifts,
            keys: Vec::new(),
            probs: Vec::new(),
        })
    }

    /// Bits needed to store values in `0..size`.
    pub fn bits_for(size: u64) -> u32 {
        if size <= 1 {
            0
        } else {
            64 - (size - 1).leading_zeros()
        }
    }

    pub fn reserve(&mut self, n: usize) {
        self.keys.reserve(n);
        self.probs.reserve(n);
    }

    pub fn push(&mut self, values: &[u64], p: f64) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                got: values.len(),
            });
        }
        let mut key = 0u128;
        for ((&v, &w), &s) in values.iter().zip(&self.widths).zip(&self.shifts) {
            if w < 64 && v >> w != 0 {
                return Err(Error::OutOfRange(format!("value {v} in a {w}-bit column")));
            }
            key |= (v as u128) << s;
        }
        self.keys.push(key);
        self.probs.push(p);
        Ok(())
    }

    /// Appends all rows of `other`, which must have the same variables.
    pub fn extend(&mut self, other: JointTable) -> Result<()> {
        if other.names != self.names || other.widths != self.widths {
            return Err(Error::LayoutMismatch(
                "joint tables with different variables".into(),
            ));
        }
        self.keys.extend(other.keys);
        self.probs.extend(other.probs);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(self.probs.iter().copied())
    }

    fn var(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// Value of variable `name` in row `row`.
    pub fn value(&self, row: usize, name: &str) -> Result<u64> {
        let i = self.var(name)?;
        Ok(self.extract(self.keys[row], i) as u64)
    }

    #[inline]
    fn extract(&self, key: u128, i: usize) -> u128 {
        let w = self.widths[i];
        if w == 0 {
            0
        } else {
            (key >> self.shifts[i]) & ((1u128 << w) - 1)
        }
    }

    fn mask(&self, vars: &[&str]) -> Result<u128> {
        let mut mask = 0u128;
        for v in vars {
            let i = self.var(v)?;
            let w = self.widths[i];
            if w > 0 {
                mask |= ((1u128 << w) - 1) << self.shifts[i];
            }
        }
        Ok(mask)
    }

    /// Aggregated marginal on `vars` as (masked key, probability), sorted by key.
    fn marginal_keys(&self, vars: &[&str]) -> Result<Vec<(u128, f64)>> {
        let mask = self.mask(vars)?;
        let mut v: Vec<(u128, f64)> = self
            .keys
            .iter()
            .zip(&self.probs)
            .map(|(&k, &p)| (k & mask, p))
            .collect();
        v.sort_by_key(|(k, _)| *k);
        let mut out: Vec<(u128, f64)> = Vec::new();
        let mut run: Vec<f64> = Vec::new();
        let mut cur: Option<u128> = None;
        for (k, p) in v {
            if cur != Some(k) {
                if let Some(c) = cur {
                    out.push((c, neumaier_sum(run.drain(..))));
                }
                cur = Some(k);
            }
            run.push(p);
        }
        if let Some(c) = cur {
            out.push((c, neumaier_sum(run.drain(..))));
        }
        Ok(out)
    }

    /// Marginal distribution on `vars`; values packed with the first variable most significant.
    pub fn marginal(&self, vars: &[&str]) -> Result<ClassicalDistribution> {
        let idx: Vec<usize> = vars.iter().map(|v| self.var(v)).collect::<Result<_>>()?;
        let bits: u32 = idx.iter().map(|&i| self.widths[i]).sum();
        if bits > 64 {
            return Err(Error::CapExceeded(format!(
                "marginal on {vars:?} needs {bits} label bits"
            )));
        }
        let pairs = self.marginal_keys(vars)?.into_iter().map(|(k, p)| {
            let mut label = 0u128;
            for &i in &idx {
                label = (label << self.widths[i]) | self.extract(k, i);
            }
            (label as u64, p)
        });
        Ok(ClassicalDistribution::from_pairs_unchecked(pairs))
    }

    pub fn entropy(&self, vars: &[&str]) -> Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_bits(
            self.marginal_keys(vars)?.into_iter().map(|(_, p)| p),
        ))
    }

    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        check_disjoint(&[a, b])?;
        let ab: Vec<&str> = a.iter().chain(b).copied().collect();
        Ok(self.entropy(a)? + self.entropy(b)? - self.entropy(&ab)?)
    }

    /// `I(A:B|C) = I(A:BC) − I(A:C)`, matching the quantum definition.
    pub fn conditional_mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        c: &[&str],
    ) -> Result<f64> {
        check_disjoint(&[a, b, c])?;
        let bc: Vec<&str> = b.iter().chain(c).copied().collect();
        Ok(self.mutual_information(a, &bc)? - self.mutual_information(a, c)?)
    }
}

fn check_disjoint(sets: &[&[&str]]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for s in sets {
        for v in s.iter() {
            if !seen.insert(*v) {
                return Err(Error::OverlappingSets(v.to_string()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::layout::RegisterLayout;
    use crate::qkernel::measures::{conditional_mutual_information, fidelity, trace_distance};
    use crate::qkernel::state::DensityMatrix;

    #[test]
    fn rejects_bad_sums() {
        assert!(ClassicalDistribution::from_dense(&[0.5, 0.4]).is_err());
        assert!(ClassicalDistribution::from_dense(&[1.5, -0.5]).is_err());
        let d = ClassicalDistribution::from_pairs([(3, 0.25), (1, 0.5), (3, 0.25)]).unwrap();
        assert_eq!(d.prob(3), 0.5);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn distances_agree_with_diagonal_states() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.4, 0.0, 0.5, 0.1];
        let l = RegisterLayout::new([("A", 2)]).unwrap();
        let rp = DensityMatrix::diagonal(l.clone(), &p).unwrap();
        let rq = DensityMatrix::diagonal(l, &q).unwrap();
        let dp = ClassicalDistribution::from_dense(&p).unwrap();
        let dq = ClassicalDistribution::from_dense(&q).unwrap();
        assert!((classical_fidelity(&dp, &dq) - fidelity(&rp, &rq).unwrap()).abs() < 1e-9);
        assert!(
            (classical_trace_distance(&dp, &dq) - trace_distance(&rp, &rq).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn joint_cmi_matches_diagonal_state() {
        // X, Y uniform bits, Z = X xor Y with prob 0.8
        let mut t = JointTable::new([("X", 1), ("Y", 1), ("Z", 1)]).unwrap();
        let mut probs = vec![0.0; 8];
        for x in 0..2u64 {
            for y in 0..2u64 {
                for z in 0..2u64 {
                    let p = 0.25 * if z == x ^ y { 0.8 } else { 0.2 };
                    t.push(&[x, y, z], p).unwrap();
                    probs[(x * 4 + y * 2 + z) as usize] = p;
                }
            }
        }
        let l = RegisterLayout::new([("X", 1), ("Y", 1), ("Z", 1)]).unwrap();
        let rho = DensityMatrix::diagonal(l, &probs).unwrap();
        let c1 = t
            .conditional_mutual_information(&["X"], &["Z"], &["Y"])
            .unwrap();
        let c2 = conditional_mutual_information(&rho, &["X"], &["Z"], &["Y"]).unwrap();
        assert!((c1 - c2).abs() < 1e-12);
        assert!(t.mutual_information(&["X"], &["Y"]).unwrap().abs() < 1e-12);
        let m = t.marginal(&["Z", "Y", "X"]).unwrap();
        // z = 1, y = 0, x = 0 breaks z = x xor y
        assert!((m.prob(0b100) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn packing_rejects_overflow() {
        let mut t = JointTable::new([("A", 2), ("B", 0)]).unwrap();
        assert!(t.push(&[4, 0], 1.0).is_err());
        assert!(t.push(&[3, 1], 1.0).is_err());
        t.push(&[3, 0], 1.0).unwrap();
        assert_eq!(t.value(0, "A").unwrap(), 3);
        assert_eq!(JointTable::bits_for(1), 0);
        assert_eq!(JointTable::bits_for(5), 3);
        assert_eq!(JointTable::bits_for(8), 3);
    }
}
