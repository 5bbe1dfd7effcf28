use std::collections::{HashMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named block of two-level subsystems.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub label: String,
    pub width: usize,
}

/// Ordered registers forming the tensor-product coordinate system of a state.
///
/// Qubit positions are global: the first declared register occupies the most
/// significant positions, and inside a register the first qubit is the most
/// significant bit of the register value. Position `p` in an `n`-qubit layout
/// is bit `n - 1 - p` of a basis index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    offsets: Vec<usize>,
    total: usize,
}

impl RegisterLayout {
    pub fn new<I, S>(registers: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut regs = Vec::new();
        let mut offsets = Vec::new();
        let mut total = 0;
        for (label, width) in registers {
            let label = label.into();
            if width == 0 {
                return Err(Error::ZeroWidth(label));
            }
            if !seen.insert(label.clone()) {
                return Err(Error::LabelCollision(label));
            }
            offsets.push(total);
            total += width;
            regs.push(Register { label, width });
        }
        Ok(Self {
            registers: regs,
            offsets,
            total,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.label.as_str())
    }

    pub fn total_width(&self) -> usize {
        self.total
    }

    pub fn dim(&self) -> usize {
        1usize << self.total
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.label == label)
    }

    pub fn width(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .map(|i| self.registers[i].width)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Global qubit positions of one register.
    pub fn qubits(&self, label: &str) -> Result<Range<usize>> {
        let i = self
            .index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let start = self.offsets[i];
        Ok(start..start + self.registers[i].width)
    }

    /// Global position of bit `bit` (0 = most significant) of register `label`.
    pub fn qubit(&self, label: &str, bit: usize) -> Result<usize> {
        let range = self.qubits(label)?;
        if bit >= range.len() {
            return Err(Error::OutOfRange(format!(
                "bit {bit} of register `{label}` (width {})",
                range.len()
            )));
        }
        Ok(range.start + bit)
    }

    /// Sorted global qubit positions covered by a set of registers.
    pub fn qubits_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for l in labels {
            out.extend(self.qubits(l.as_ref())?);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Concatenation; `other`'s registers follow `self`'s.
    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        Self::new(
            self.registers
                .iter()
                .chain(other.registers.iter())
                .map(|r| (r.label.clone(), r.width)),
        )
    }

    /// Renames registers; labels absent from `map` are kept.
    pub fn relabel(&self, map: &HashMap<String, String>) -> Result<Self> {
        for from in map.keys() {
            if !self.contains(from) {
                return Err(Error::UnknownLabel(from.clone()));
            }
        }
        Self::new(self.registers.iter().map(|r| {
            let label = map
                .get(&r.label)
                .cloned()
                .unwrap_or_else(|| r.label.clone());
            (label, r.width)
        }))
    }

    /// Layout restricted to `labels`, kept in declaration order.
    pub fn restrict<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let wanted: HashSet<&str> = labels.iter().map(|l| l.as_ref()).collect();
        for l in &wanted {
            if !self.contains(l) {
                return Err(Error::UnknownLabel(l.to_string()));
            }
        }
        Self::new(
            self.registers
                .iter()
                .filter(|r| wanted.contains(r.label.as_str()))
                .map(|r| (r.label.clone(), r.width)),
        )
    }
}

/// Extracts the bits of `index` at `positions` (first position most significant).
#[inline]
pub(crate) fn gather_bits(index: usize, positions: &[usize], n: usize) -> usize {
    let mut v = 0usize;
    for &p in positions {
        v = (v << 1) | ((index >> (n - 1 - p)) & 1);
    }
    v
}

/// Inverse of [`gather_bits`]: places the bits of `value` at `positions`.
#[inline]
pub(crate) fn scatter_bits(value: usize, positions: &[usize], n: usize) -> usize {
    let k = positions.len();
    let mut out = 0usize;
    for (j, &p) in positions.iter().enumerate() {
        let bit = (value >> (k - 1 - j)) & 1;
        out |= bit << (n - 1 - p);
    }
    out
}

/// Positions in `0..n` not in `subset` (which need not be sorted).
pub(crate) fn complement(subset: &[usize], n: usize) -> Vec<usize> {
    let set: HashSet<usize> = subset.iter().copied().collect();
    (0..n).filter(|p| !set.contains(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declaration_order_fixes_positions() {
        let l = RegisterLayout::new([("X", 2), ("A", 1), ("B", 3)]).unwrap();
        assert_eq!(l.total_width(), 6);
        assert_eq!(l.qubits("A").unwrap(), 2..3);
        assert_eq!(l.qubit("B", 1).unwrap(), 4);
        assert_eq!(l.qubits_of(&["B", "X"]).unwrap(), vec![0, 1, 3, 4, 5]);
    }

    #[test]
    fn rejects_duplicates_and_zero_width() {
        assert!(matches!(
            RegisterLayout::new([("X", 1), ("X", 1)]),
            Err(Error::LabelCollision(_))
        ));
        assert!(matches!(
            RegisterLayout::new([("X", 0)]),
            Err(Error::ZeroWidth(_))
        ));
    }

    #[test]
    fn gather_scatter_roundtrip() {
        let pos = [4, 1, 2];
        for v in 0..8 {
            let idx = scatter_bits(v, &pos, 6);
            assert_eq!(gather_bits(idx, &pos, 6), v);
        }
        // position 0 is the most significant bit
        assert_eq!(scatter_bits(1, &[0], 3), 0b100);
    }

    #[test]
    fn relabel_checks_collisions() {
        let l = RegisterLayout::new([("B0", 1), ("C", 1)]).unwrap();
        let mut m = HashMap::new();
        m.insert("B0".to_string(), "C".to_string());
        assert!(matches!(l.relabel(&m), Err(Error::LabelCollision(_))));
        m.clear();
        m.insert("B0".to_string(), "B1".to_string());
        let r = l.relabel(&m).unwrap();
        assert_eq!(r.labels().collect::<Vec<_>>(), vec!["B1", "C"]);
    }
}
