//! Distances and information quantities. All logarithms are base 2.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use super::linalg::{
    clip_spectrum, entropy_bits, hermitian_eigenvalues, psd_sqrt, singular_values, CMatrix,
};
use super::state::{DensityMatrix, QuantumState};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(singular_values(m).iter().sum())
}

fn same_layout(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.layout() != sigma.layout() {
        return Err(Error::LayoutMismatch(
            "states live on different register layouts".into(),
        ));
    }
    Ok(())
}

/// `F(ρ, σ) = ‖√ρ √σ‖₁`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_layout(rho, sigma)?;
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

pub fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let tol = Tolerances::default().state_tol;
    let a = psd_sqrt(rho, tol)?;
    let b = psd_sqrt(sigma, tol)?;
    Ok(trace_norm(&(a * b))?.clamp(0.0, 1.0))
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_layout(rho, sigma)?;
    trace_distance_matrices(rho.matrix(), sigma.matrix())
}

pub fn trace_distance_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    // ρ - σ is Hermitian: its trace norm is the sum of |eigenvalues|.
    let vals = hermitian_eigenvalues(&(rho - sigma));
    Ok((0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

/// Bures metric `√(1 − F)`.
pub fn bures(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok((1.0 - fidelity(rho, sigma)?).max(0.0).sqrt())
}

pub fn bures_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    Ok((1.0 - fidelity_matrices(rho, sigma)?).max(0.0).sqrt())
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut vals = hermitian_eigenvalues(rho.matrix());
    clip_spectrum(&mut vals, Tolerances::default().state_tol)?;
    Ok(entropy_bits(vals))
}

/// Entropy, mutual information and conditional mutual information of
/// subsystems of one state, with entropies memoized by qubit set.
pub struct InfoCalculator<'a, T: QuantumState> {
    state: &'a T,
    tol: f64,
    cache: RefCell<HashMap<Vec<usize>, f64>>,
}

impl<'a, T: QuantumState> InfoCalculator<'a, T> {
    pub fn new(state: &'a T) -> Self {
        Self {
            state,
            tol: Tolerances::default().state_tol,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn state(&self) -> &T {
        self.state
    }

    /// Sorted qubit positions of a register set.
    pub fn qubits<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        self.state.layout().qubits_of(labels)
    }

    pub fn entropy_qubits(&self, qubits: &[usize]) -> Result<f64> {
        let mut key = qubits.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let spectrum = self.state.spectrum_on_qubits(&key, self.tol)?;
        let h = entropy_bits(spectrum);
        self.cache.borrow_mut().insert(key, h);
        Ok(h)
    }

    pub fn mutual_information_qubits(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        disjoint_qubits(&[a, b])?;
        let ab = union(&[a, b]);
        Ok(self.entropy_qubits(a)? + self.entropy_qubits(b)? - self.entropy_qubits(&ab)?)
    }

    /// `I(A:B|C) = I(A:BC) − I(A:C)`.
    pub fn conditional_mutual_information_qubits(
        &self,
        a: &[usize],
        b: &[usize],
        c: &[usize],
    ) -> Result<f64> {
        disjoint_qubits(&[a, b, c])?;
        let bc = union(&[b, c]);
        Ok(self.mutual_information_qubits(a, &bc)? - self.mutual_information_qubits(a, c)?)
    }

    pub fn entropy<S: AsRef<str>>(&self, labels: &[S]) -> Result<f64> {
        self.entropy_qubits(&self.qubits(labels)?)
    }

    pub fn mutual_information<S: AsRef<str>>(&self, a: &[S], b: &[S]) -> Result<f64> {
        disjoint_labels(&[a, b])?;
        self.mutual_information_qubits(&self.qubits(a)?, &self.qubits(b)?)
    }

    pub fn conditional_mutual_information<S: AsRef<str>>(
        &self,
        a: &[S],
        b: &[S],
        c: &[S],
    ) -> Result<f64> {
        disjoint_labels(&[a, b, c])?;
        self.conditional_mutual_information_qubits(
            &self.qubits(a)?,
            &self.qubits(b)?,
            &self.qubits(c)?,
        )
    }
}

fn union(sets: &[&[usize]]) -> Vec<usize> {
    let mut out: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn disjoint_qubits(sets: &[&[usize]]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in sets {
        for q in s.iter() {
            if !seen.insert(*q) {
                return Err(Error::OverlappingSets(format!("qubit {q}")));
            }
        }
    }
    Ok(())
}

fn disjoint_labels<S: AsRef<str>>(sets: &[&[S]]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in sets {
        for l in s.iter() {
            if !seen.insert(l.as_ref()) {
                return Err(Error::OverlappingSets(l.as_ref().to_string()));
            }
        }
    }
    Ok(())
}

/// Entropy of the registers `labels` of `state`.
pub fn subsystem_entropy<T: QuantumState, S: AsRef<str>>(state: &T, labels: &[S]) -> Result<f64> {
    InfoCalculator::new(state).entropy(labels)
}

/// `I(A:B) = S(A) + S(B) − S(AB)`; registers outside `A ∪ B` are traced out.
pub fn mutual_information<T: QuantumState, S: AsRef<str>>(
    state: &T,
    a: &[S],
    b: &[S],
) -> Result<f64> {
    InfoCalculator::new(state).mutual_information(a, b)
}

/// `I(A:B|C) = I(A:BC) − I(A:C)`.
pub fn conditional_mutual_information<T: QuantumState, S: AsRef<str>>(
    state: &T,
    a: &[S],
    b: &[S],
    c: &[S],
) -> Result<f64> {
    InfoCalculator::new(state).conditional_mutual_information(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::layout::RegisterLayout;
    use crate::qkernel::state::PureState;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one_qubit(label: &str) -> RegisterLayout {
        RegisterLayout::new([(label, 1)]).unwrap()
    }

    #[test]
    fn trace_norm_examples() {
        let id = CMatrix::identity(2, 2);
        assert!((trace_norm(&id).unwrap() - 2.0).abs() < 1e-14);
        let z = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        assert!((trace_norm(&z).unwrap() - 2.0).abs() < 1e-14);
        let rho = DensityMatrix::diagonal(one_qubit("A"), &[0.3, 0.7]).unwrap();
        assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            trace_norm(&CMatrix::zeros(2, 3)),
            Err(Error::NotSquare(2, 3))
        ));
    }

    #[test]
    fn orthogonal_and_identical_states() {
        let zero = PureState::basis(one_qubit("A"), 0).unwrap().to_density();
        let one = PureState::basis(one_qubit("A"), 1).unwrap().to_density();
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((bures(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-12);
        assert!(bures(&zero, &zero).unwrap().abs() < 1e-6);
    }

    #[test]
    fn layout_mismatch_is_an_error() {
        let a = DensityMatrix::maximally_mixed(one_qubit("A"));
        let b = DensityMatrix::maximally_mixed(one_qubit("B"));
        assert!(matches!(fidelity(&a, &b), Err(Error::LayoutMismatch(_))));
        assert!(trace_distance(&a, &b).is_err());
    }

    #[test]
    fn entropy_closed_forms() {
        let mixed = DensityMatrix::maximally_mixed(one_qubit("A"));
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let d = DensityMatrix::diagonal(one_qubit("A"), &[0.75, 0.25]).unwrap();
        let expect = 2.0 - 0.75 * 3f64.log2();
        assert!((von_neumann_entropy(&d).unwrap() - expect).abs() < 1e-12);
        let pure = PureState::basis(one_qubit("A"), 1).unwrap().to_density();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let s = DensityMatrix::maximally_mixed(RegisterLayout::new([("A", 1), ("B", 1)]).unwrap());
        assert!(matches!(
            mutual_information(&s, &["A"], &["A", "B"]),
            Err(Error::OverlappingSets(_))
        ));
    }

    #[test]
    fn classical_copy_carries_one_bit() {
        let l = RegisterLayout::new([("X", 1), ("C", 1)]).unwrap();
        let rho = DensityMatrix::diagonal(l, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&rho, &["X"], &["C"]).unwrap() - 1.0).abs() < 1e-12);
    }
}
