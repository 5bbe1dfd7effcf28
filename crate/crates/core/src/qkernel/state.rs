use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::{complement, gather_bits, scatter_bits, RegisterLayout};
use super::linalg::{clip_spectrum, hermitian_eigenvalues, hermiticity_defect, CMatrix};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// Largest subsystem (in qubits) whose reduced state is diagonalized.
pub const MAX_REDUCED_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Normalized state vector over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

/// Hermitian, PSD, unit-trace matrix over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    matrix: CMatrix,
}

/// Common access to pure and mixed states for partial traces and entropies.
pub trait QuantumState {
    fn layout(&self) -> &RegisterLayout;

    /// Reduced density matrix on `keep` (global qubit positions, in the given order).
    fn reduced_on_qubits(&self, keep: &[usize]) -> CMatrix;

    /// Spectrum of the reduced state on `keep`, negative round-off clipped.
    fn spectrum_on_qubits(&self, keep: &[usize], tol: f64) -> Result<Vec<f64>>;
}

impl PureState {
    pub fn new(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: amps.len(),
            });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Tolerances::default().state_tol {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { layout, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(layout: RegisterLayout, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Self::new(layout, amps)
    }

    /// Computational basis state with the given global index.
    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        if index >= layout.dim() {
            return Err(Error::OutOfRange(format!(
                "basis index {index} in dimension {}",
                layout.dim()
            )));
        }
        let mut amps = vec![ZERO; layout.dim()];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    /// Computational basis state with each register holding the listed value.
    pub fn basis_values(layout: RegisterLayout, values: &[(&str, usize)]) -> Result<Self> {
        let n = layout.total_width();
        let mut index = 0usize;
        for (label, v) in values {
            let q: Vec<usize> = layout.qubits(label)?.collect();
            if *v >= 1 << q.len() {
                return Err(Error::OutOfRange(format!("value {v} for `{label}`")));
            }
            index |= scatter_bits(*v, &q, n);
        }
        Self::basis(layout, index)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_parts(self) -> (RegisterLayout, Vec<Complex64>) {
        (self.layout, self.amps)
    }

    /// Unchecked constructor for amplitudes produced by unitary evolution.
    pub(crate) fn from_parts_unchecked(layout: RegisterLayout, amps: Vec<Complex64>) -> Self {
        Self { layout, amps }
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("inner product".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let layout = self.layout.concat(&other.layout)?;
        let mut amps = Vec::with_capacity(layout.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState { layout, amps })
    }

    /// Renames registers without touching amplitudes.
    pub fn relabel(&self, map: &HashMap<String, String>) -> Result<PureState> {
        Ok(PureState {
            layout: self.layout.relabel(map)?,
            amps: self.amps.clone(),
        })
    }

    /// Reorders registers to `order`, which must list every label once.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<PureState> {
        let (layout, src) = reorder_plan(&self.layout, order)?;
        let n = layout.total_width();
        let mut amps = vec![ZERO; layout.dim()];
        for (new_idx, a) in amps.iter_mut().enumerate() {
            let old = permute_index(new_idx, &src, n);
            *a = self.amps[old];
        }
        Ok(PureState { layout, amps })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix {
            layout: self.layout.clone(),
            matrix: &v * v.adjoint(),
        }
    }

    /// Amplitudes arranged as a (keep × rest) matrix.
    fn amplitude_matrix(&self, keep: &[usize]) -> CMatrix {
        let n = self.layout.total_width();
        let rest = complement(keep, n);
        let mut m = CMatrix::zeros(1 << keep.len(), 1 << rest.len());
        for (g, a) in self.amps.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            m[(gather_bits(g, keep, n), gather_bits(g, &rest, n))] = *a;
        }
        m
    }
}

impl QuantumState for PureState {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    /// Index grouping over amplitudes; the full density matrix is never formed.
    fn reduced_on_qubits(&self, keep: &[usize]) -> CMatrix {
        let m = self.amplitude_matrix(keep);
        &m * m.adjoint()
    }

    fn spectrum_on_qubits(&self, keep: &[usize], tol: f64) -> Result<Vec<f64>> {
        let n = self.layout.total_width();
        let smaller = keep.len().min(n - keep.len());
        if smaller > MAX_REDUCED_QUBITS {
            return Err(Error::CapExceeded(format!(
                "reduced state on {smaller} qubits (cap {MAX_REDUCED_QUBITS})"
            )));
        }
        if keep.is_empty() || keep.len() == n {
            return Ok(vec![1.0]);
        }
        // The two marginals of a pure state share their nonzero spectrum.
        let m = self.amplitude_matrix(keep);
        let gram = if keep.len() <= n - keep.len() {
            &m * m.adjoint()
        } else {
            m.adjoint() * &m
        };
        let mut vals = hermitian_eigenvalues(&gram);
        clip_spectrum(&mut vals, tol)?;
        Ok(vals)
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity at the default state tolerance.
    pub fn new(layout: RegisterLayout, matrix: CMatrix) -> Result<Self> {
        Self::new_with_tol(layout, matrix, Tolerances::default().state_tol)
    }

    pub fn new_with_tol(layout: RegisterLayout, matrix: CMatrix, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare(matrix.nrows(), matrix.ncols()));
        }
        if matrix.nrows() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: matrix.nrows(),
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = hermitian_eigenvalues(&matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -tol {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { layout, matrix })
    }

    pub(crate) fn from_parts_unchecked(layout: RegisterLayout, matrix: CMatrix) -> Self {
        Self { layout, matrix }
    }

    /// Diagonal (classical) state with the given probabilities.
    pub fn diagonal(layout: RegisterLayout, probs: &[f64]) -> Result<Self> {
        if probs.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: probs.len(),
            });
        }
        let d = nalgebra::DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| Complex64::new(p, 0.0)),
        );
        Self::new(layout, CMatrix::from_diagonal(&d))
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        let matrix = CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Self { layout, matrix }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(DensityMatrix {
            layout,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    pub fn relabel(&self, map: &HashMap<String, String>) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            layout: self.layout.relabel(map)?,
            matrix: self.matrix.clone(),
        })
    }

    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<DensityMatrix> {
        let (layout, src) = reorder_plan(&self.layout, order)?;
        let n = layout.total_width();
        let d = layout.dim();
        let map: Vec<usize> = (0..d).map(|i| permute_index(i, &src, n)).collect();
        let matrix = DMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(DensityMatrix { layout, matrix })
    }

    /// Probabilities on the computational basis.
    pub fn diagonal_probs(&self) -> Vec<f64> {
        (0..self.matrix.nrows())
            .map(|i| self.matrix[(i, i)].re)
            .collect()
    }
}

impl QuantumState for DensityMatrix {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn reduced_on_qubits(&self, keep: &[usize]) -> CMatrix {
        let n = self.layout.total_width();
        let rest = complement(keep, n);
        let k_off: Vec<usize> = (0..1usize << keep.len())
            .map(|v| scatter_bits(v, keep, n))
            .collect();
        let r_off: Vec<usize> = (0..1usize << rest.len())
            .map(|v| scatter_bits(v, &rest, n))
            .collect();
        let dk = k_off.len();
        let mut out = CMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = ZERO;
                for &r in &r_off {
                    acc += self.matrix[(k_off[i] | r, k_off[j] | r)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    fn spectrum_on_qubits(&self, keep: &[usize], tol: f64) -> Result<Vec<f64>> {
        let reduced = self.reduced_on_qubits(keep);
        let mut vals = hermitian_eigenvalues(&reduced);
        clip_spectrum(&mut vals, tol)?;
        Ok(vals)
    }
}

/// Builds the reordered layout and, for each new qubit position, its old position.
fn reorder_plan<S: AsRef<str>>(
    layout: &RegisterLayout,
    order: &[S],
) -> Result<(RegisterLayout, Vec<usize>)> {
    if order.len() != layout.registers().len() {
        return Err(Error::LayoutMismatch(format!(
            "reorder lists {} registers, layout has {}",
            order.len(),
            layout.registers().len()
        )));
    }
    let mut regs = Vec::new();
    let mut src = Vec::new();
    for l in order {
        let l = l.as_ref();
        let w = layout.width(l)?;
        regs.push((l.to_string(), w));
        src.extend(layout.qubits(l)?);
    }
    Ok((RegisterLayout::new(regs)?, src))
}

/// Old index whose qubit `src[p]` carries new qubit `p`.
#[inline]
fn permute_index(new_idx: usize, src: &[usize], n: usize) -> usize {
    let mut old = 0usize;
    for (p, &s) in src.iter().enumerate() {
        let bit = (new_idx >> (n - 1 - p)) & 1;
        old |= bit << (n - 1 - s);
    }
    old
}

/// Reduced state of `state` on the registers in `keep`, in declaration order.
pub fn partial_trace<T: QuantumState, S: AsRef<str>>(
    state: &T,
    keep: &[S],
) -> Result<DensityMatrix> {
    let layout = state.layout().restrict(keep)?;
    let qubits = state.layout().qubits_of(keep)?;
    if qubits.len() > MAX_REDUCED_QUBITS {
        return Err(Error::CapExceeded(format!(
            "materializing a {}-qubit reduced state",
            qubits.len()
        )));
    }
    Ok(DensityMatrix::from_parts_unchecked(
        layout,
        state.reduced_on_qubits(&qubits),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::linalg::CMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> PureState {
        let l = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(l, vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]).unwrap()
    }

    #[test]
    fn basis_concatenation() {
        let a = PureState::basis(RegisterLayout::new([("A", 1)]).unwrap(), 0).unwrap();
        let b = PureState::basis(RegisterLayout::new([("B", 1)]).unwrap(), 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.amplitudes()[0b01], c(1.0, 0.0));
        assert!(a.tensor(&a).is_err());
    }

    #[test]
    fn mixed_tensor() {
        let a = DensityMatrix::maximally_mixed(RegisterLayout::new([("A", 1)]).unwrap());
        let b = DensityMatrix::maximally_mixed(RegisterLayout::new([("B", 1)]).unwrap());
        let ab = a.tensor(&b).unwrap();
        let expect = CMatrix::identity(4, 4) * c(0.25, 0.0);
        assert!((ab.matrix() - expect).norm() < 1e-15);
        assert!((ab.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = partial_trace(&bell(), &["A"]).unwrap();
        let expect = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!((rho.matrix() - expect).norm() < 1e-15);
    }

    #[test]
    fn product_marginal_recovers_factor() {
        let l = RegisterLayout::new([("A", 1)]).unwrap();
        let rho = DensityMatrix::diagonal(l, &[0.75, 0.25]).unwrap();
        let sigma = DensityMatrix::maximally_mixed(RegisterLayout::new([("B", 1)]).unwrap());
        let back = partial_trace(&rho.tensor(&sigma).unwrap(), &["A"]).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let l = RegisterLayout::new([("A", 1)]).unwrap();
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), ZERO]);
        assert!(matches!(
            DensityMatrix::new(l.clone(), bad),
            Err(Error::NotHermitian(_))
        ));
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(l, neg), Err(Error::NotPsd(_))));
    }

    #[test]
    fn reorder_swaps_registers() {
        let l = RegisterLayout::new([("A", 1), ("B", 2)]).unwrap();
        let s = PureState::basis_values(l, &[("A", 1), ("B", 2)]).unwrap();
        let r = s.reorder(&["B", "A"]).unwrap();
        // B=10, A=1 -> 101
        assert_eq!(r.amplitudes()[0b101], c(1.0, 0.0));
        let back = r.reorder(&["A", "B"]).unwrap();
        assert_eq!(back, s);
        let rho = s.to_density().reorder(&["B", "A"]).unwrap();
        assert!((rho.matrix()[(0b101, 0b101)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn relabel_keeps_amplitudes() {
        let s = bell();
        let mut m = HashMap::new();
        m.insert("B".to_string(), "B1".to_string());
        let r = s.relabel(&m).unwrap();
        assert_eq!(r.amplitudes(), s.amplitudes());
        let mut inv = HashMap::new();
        inv.insert("B1".to_string(), "B".to_string());
        assert_eq!(r.relabel(&inv).unwrap(), s);
    }
}
