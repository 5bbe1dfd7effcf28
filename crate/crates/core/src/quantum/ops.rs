//! Input-controlled local operations and two-outcome measurements.
//!
//! Every operation is a multiplexed block operator: the basis value of the
//! control qubits selects (through `table`) one block acting on the targets.
//! Operators of this form commute with every computational-basis projector on
//! their controls, so controlling on an input register never disturbs it.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkernel::linalg::{hermitian_eigenvalues, hermiticity_defect, unitarity_defect};
use crate::qkernel::{CMatrix, Tolerances};

/// One qubit of a named register.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QubitRef {
    pub reg: String,
    pub bit: usize,
}

impl QubitRef {
    pub fn new(reg: impl Into<String>, bit: usize) -> Self {
        Self {
            reg: reg.into(),
            bit,
        }
    }
}

/// All qubits of register `reg`, most significant first.
pub fn qubits(reg: &str, width: usize) -> Vec<QubitRef> {
    (0..width).map(|b| QubitRef::new(reg, b)).collect()
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.reg, self.bit)
    }
}

impl FromStr for QubitRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('[') {
            None => Ok(QubitRef::new(s, 0)),
            Some((reg, rest)) => {
                let idx = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse(format!("qubit `{s}`")))?;
                let bit = idx
                    .parse()
                    .map_err(|_| Error::Parse(format!("qubit index in `{s}`")))?;
                Ok(QubitRef::new(reg, bit))
            }
        }
    }
}

impl TryFrom<String> for QubitRef {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<QubitRef> for String {
    fn from(q: QubitRef) -> String {
        q.to_string()
    }
}

/// Operator applied to the targets for one control value.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Identity,
    /// Basis permutation: `|k⟩ ↦ |perm[k]⟩`.
    Permutation(Vec<u32>),
    Dense(CMatrix),
}

impl Block {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Block::Identity => Ok(()),
            Block::Permutation(p) => {
                if p.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: p.len(),
                    });
                }
                let mut seen = vec![false; dim];
                for &v in p {
                    if v as usize >= dim || seen[v as usize] {
                        return Err(Error::InvalidProtocol(format!(
                            "{p:?} is not a permutation"
                        )));
                    }
                    seen[v as usize] = true;
                }
                Ok(())
            }
            Block::Dense(u) => {
                if u.nrows() != dim || u.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: u.nrows(),
                    });
                }
                let d = unitarity_defect(u);
                if d > Tolerances::default().state_tol {
                    return Err(Error::NotUnitary(d));
                }
                Ok(())
            }
        }
    }

    /// Dense matrix of the block.
    pub fn matrix(&self, dim: usize) -> CMatrix {
        match self {
            Block::Identity => CMatrix::identity(dim, dim),
            Block::Permutation(p) => {
                let mut m = CMatrix::zeros(dim, dim);
                for (k, &v) in p.iter().enumerate() {
                    m[(v as usize, k)] = Complex64::new(1.0, 0.0);
                }
                m
            }
            Block::Dense(u) => u.clone(),
        }
    }
}

/// Multiplexed unitary `Σ_c |c⟩⟨c| ⊗ blocks[table[c]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Op {
    controls: Vec<QubitRef>,
    targets: Vec<QubitRef>,
    table: Vec<u32>,
    blocks: Vec<Block>,
}

fn check_distinct(qs: &[&QubitRef]) -> Result<()> {
    let mut v: Vec<&QubitRef> = qs.to_vec();
    v.sort();
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Err(Error::OverlappingSets(w[0].to_string()));
        }
    }
    Ok(())
}

impl Op {
    pub fn new(
        controls: Vec<QubitRef>,
        targets: Vec<QubitRef>,
        table: Vec<u32>,
        blocks: Vec<Block>,
    ) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidProtocol("operation without targets".into()));
        }
        if controls.len() > 24 || targets.len() > 12 {
            return Err(Error::CapExceeded("operation size".into()));
        }
        check_distinct(&controls.iter().chain(&targets).collect::<Vec<_>>())?;
        if table.len() != 1 << controls.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << controls.len(),
                got: table.len(),
            });
        }
        if let Some(&i) = table.iter().find(|&&i| i as usize >= blocks.len()) {
            return Err(Error::InvalidProtocol(format!(
                "block index {i} out of range"
            )));
        }
        let dim = 1 << targets.len();
        for b in &blocks {
            b.validate(dim)?;
        }
        Ok(Self {
            controls,
            targets,
            table,
            blocks,
        })
    }

    /// Uncontrolled unitary on `targets`.
    pub fn unitary(targets: Vec<QubitRef>, u: CMatrix) -> Result<Self> {
        Self::new(Vec::new(), targets, vec![0], vec![Block::Dense(u)])
    }

    /// One block per control value.
    pub fn controlled(
        controls: Vec<QubitRef>,
        targets: Vec<QubitRef>,
        blocks: Vec<Block>,
    ) -> Result<Self> {
        let table = (0..blocks.len() as u32).collect();
        Self::new(controls, targets, table, blocks)
    }

    pub fn h(target: QubitRef) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |v: f64| Complex64::new(v, 0.0);
        let u = CMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]);
        Self::unitary(vec![target], u).expect("Hadamard is unitary")
    }

    pub fn x(target: QubitRef) -> Self {
        Self::new(
            Vec::new(),
            vec![target],
            vec![0],
            vec![Block::Permutation(vec![1, 0])],
        )
        .expect("valid")
    }

    pub fn z(target: QubitRef) -> Self {
        let c = |v: f64| Complex64::new(v, 0.0);
        let u = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        Self::unitary(vec![target], u).expect("Z is unitary")
    }

    pub fn cnot(control: QubitRef, target: QubitRef) -> Result<Self> {
        Self::new(
            vec![control],
            vec![target],
            vec![0, 1],
            vec![Block::Identity, Block::Permutation(vec![1, 0])],
        )
    }

    /// `target ⊕= f(value of controls)` for a one-qubit target.
    pub fn compute<F: Fn(u64) -> bool>(
        controls: Vec<QubitRef>,
        target: QubitRef,
        f: F,
    ) -> Result<Self> {
        let table = (0..1u64 << controls.len()).map(|c| f(c) as u32).collect();
        Self::new(
            controls,
            vec![target],
            table,
            vec![Block::Identity, Block::Permutation(vec![1, 0])],
        )
    }

    pub fn controls(&self) -> &[QubitRef] {
        &self.controls
    }

    pub fn targets(&self) -> &[QubitRef] {
        &self.targets
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Registers touched by the operation.
    pub fn registers(&self) -> impl Iterator<Item = &str> {
        self.controls
            .iter()
            .chain(&self.targets)
            .map(|q| q.reg.as_str())
    }

    /// Rewrites every qubit reference; the table and blocks are kept.
    pub fn map_qubits<F: Fn(&QubitRef) -> QubitRef>(&self, f: F) -> Result<Self> {
        Self::new(
            self.controls.iter().map(&f).collect(),
            self.targets.iter().map(&f).collect(),
            self.table.clone(),
            self.blocks.clone(),
        )
    }
}

/// Effect (POVM element for outcome 1) applied to the targets for one control value.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    /// Diagonal in the computational basis of the targets.
    Diagonal(Vec<f64>),
    Dense(CMatrix),
}

impl Effect {
    fn validate(&self, dim: usize) -> Result<()> {
        let tol = Tolerances::default().state_tol;
        match self {
            Effect::Diagonal(d) => {
                if d.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: d.len(),
                    });
                }
                if let Some(v) = d.iter().find(|&&v| !(-tol..=1.0 + tol).contains(&v)) {
                    return Err(Error::InvalidProtocol(format!("effect eigenvalue {v}")));
                }
                Ok(())
            }
            Effect::Dense(m) => {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: m.nrows(),
                    });
                }
                let h = hermiticity_defect(m);
                if h > tol {
                    return Err(Error::NotHermitian(h));
                }
                let vals = hermitian_eigenvalues(m);
                if vals.first().is_some_and(|&v| v < -tol)
                    || vals.last().is_some_and(|&v| v > 1.0 + tol)
                {
                    return Err(Error::InvalidProtocol(format!(
                        "effect spectrum {vals:?} outside [0, 1]"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Two-outcome measurement `{M, I − M}` with `M = Σ_c |c⟩⟨c| ⊗ effects[table[c]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    controls: Vec<QubitRef>,
    targets: Vec<QubitRef>,
    table: Vec<u32>,
    effects: Vec<Effect>,
}

impl Measurement {
    pub fn new(
        controls: Vec<QubitRef>,
        targets: Vec<QubitRef>,
        table: Vec<u32>,
        effects: Vec<Effect>,
    ) -> Result<Self> {
        if controls.len() > 24 || targets.len() > 12 {
            return Err(Error::CapExceeded("measurement size".into()));
        }
        check_distinct(&controls.iter().chain(&targets).collect::<Vec<_>>())?;
        if table.len() != 1 << controls.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << controls.len(),
                got: table.len(),
            });
        }
        if let Some(&i) = table.iter().find(|&&i| i as usize >= effects.len()) {
            return Err(Error::InvalidProtocol(format!(
                "effect index {i} out of range"
            )));
        }
        let dim = 1 << targets.len();
        for e in &effects {
            e.validate(dim)?;
        }
        Ok(Self {
            controls,
            targets,
            table,
            effects,
        })
    }

    /// Accepts iff `accept(value of qubits)`.
    pub fn projective<F: Fn(u64) -> bool>(qubits: Vec<QubitRef>, accept: F) -> Result<Self> {
        let table = (0..1u64 << qubits.len())
            .map(|v| accept(v) as u32)
            .collect();
        Self::new(
            qubits,
            Vec::new(),
            table,
            vec![Effect::Diagonal(vec![0.0]), Effect::Diagonal(vec![1.0])],
        )
    }

    /// Never accepts.
    pub fn reject_all() -> Self {
        Self::new(
            Vec::new(),
            Vec::new(),
            vec![0],
            vec![Effect::Diagonal(vec![0.0])],
        )
        .expect("valid")
    }

    pub fn controls(&self) -> &[QubitRef] {
        &self.controls
    }

    pub fn targets(&self) -> &[QubitRef] {
        &self.targets
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn registers(&self) -> impl Iterator<Item = &str> {
        self.controls
            .iter()
            .chain(&self.targets)
            .map(|q| q.reg.as_str())
    }

    pub fn map_qubits<F: Fn(&QubitRef) -> QubitRef>(&self, f: F) -> Result<Self> {
        Self::new(
            self.controls.iter().map(&f).collect(),
            self.targets.iter().map(&f).collect(),
            self.table.clone(),
            self.effects.clone(),
        )
    }

    /// Same effects with the control table re-indexed by `remap(new control value)`.
    pub(crate) fn with_controls(&self, controls: Vec<QubitRef>, table: Vec<u32>) -> Result<Self> {
        Self::new(controls, self.targets.clone(), table, self.effects.clone())
    }
}

impl Op {
    pub(crate) fn with_controls(&self, controls: Vec<QubitRef>, table: Vec<u32>) -> Result<Self> {
        Self::new(controls, self.targets.clone(), table, self.blocks.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_refs_parse() {
        assert_eq!("C1[2]".parse::<QubitRef>().unwrap(), QubitRef::new("C1", 2));
        assert_eq!("A".parse::<QubitRef>().unwrap(), QubitRef::new("A", 0));
        assert!("A[x]".parse::<QubitRef>().is_err());
        assert_eq!(QubitRef::new("B", 1).to_string(), "B[1]");
    }

    #[test]
    fn op_validation() {
        let q = QubitRef::new("A", 0);
        assert!(Op::cnot(q.clone(), q.clone()).is_err());
        let not_unitary = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(
            Op::unitary(vec![q.clone()], not_unitary),
            Err(Error::NotUnitary(_))
        ));
        assert!(Op::new(
            vec![],
            vec![q.clone()],
            vec![0],
            vec![Block::Permutation(vec![0, 0])]
        )
        .is_err());
        assert!(Op::new(vec![], vec![q], vec![1], vec![Block::Identity]).is_err());
    }

    #[test]
    fn effect_validation() {
        let q = QubitRef::new("A", 0);
        let too_big = Effect::Diagonal(vec![0.0, 1.5]);
        assert!(Measurement::new(vec![], vec![q.clone()], vec![0], vec![too_big]).is_err());
        let ok = Effect::Dense(CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0));
        assert!(Measurement::new(vec![], vec![q], vec![0], vec![ok]).is_ok());
    }

    #[test]
    fn permutation_block_matrix() {
        let m = Block::Permutation(vec![1, 0]).matrix(2);
        assert_eq!(m[(1, 0)].re, 1.0);
        assert_eq!(m[(0, 0)].re, 0.0);
    }
}
