//! Seeded random states, unitaries and distributions.
//!
//! Every generator takes an explicit [`ChaCha20Rng`]; [`rng`] derives one from a
//! seed and a stream number so that independent jobs never share a sequence.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::qkernel::{CMatrix, DensityMatrix, PureState, RegisterLayout};

pub fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // Column-major fill order is part of the reproducibility contract.
    CMatrix::from_iterator(rows, cols, (0..rows * cols).map(|_| complex_gaussian(rng)))
}

/// Haar-distributed unitary: Gram-Schmidt on a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut q = ginibre(dim, dim, rng);
    for j in 0..dim {
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..dim).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
                for i in 0..dim {
                    let v = q[(i, k)];
                    q[(i, j)] -= proj * v;
                }
            }
        }
        let norm = (0..dim).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..dim {
            q[(i, j)] /= norm;
        }
    }
    q
}

pub fn random_pure_state<R: Rng + ?Sized>(layout: RegisterLayout, rng: &mut R) -> PureState {
    let amps: Vec<Complex64> = (0..layout.dim()).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(layout, amps).expect("Gaussian vector is nonzero")
}

/// Random mixed state `G G† / Tr(G G†)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(
    layout: RegisterLayout,
    rank: usize,
    rng: &mut R,
) -> DensityMatrix {
    let d = layout.dim();
    let g = ginibre(d, rank.max(1), rng);
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= Complex64::new(tr, 0.0);
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::from_parts_unchecked(layout, m)
}

/// Random diagonal (classical) state.
pub fn random_diagonal<R: Rng + ?Sized>(layout: RegisterLayout, rng: &mut R) -> DensityMatrix {
    let p = random_probabilities(layout.dim(), rng);
    let d = DVector::from_iterator(p.len(), p.iter().map(|&x| Complex64::new(x, 0.0)));
    DensityMatrix::from_parts_unchecked(layout, CMatrix::from_diagonal(&d))
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn random_probabilities<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| -rng.random_range(f64::MIN_POSITIVE..1.0).ln())
        .collect();
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    v
}

/// Random PSD operator with `0 ⪯ M ⪯ I`.
pub fn random_effect<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(dim, rng);
    let mut out = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let lam: f64 = rng.random();
        let col = u.column(j);
        out += col * col.adjoint() * Complex64::new(lam, 0.0);
    }
    (&out + out.adjoint()) * Complex64::new(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::linalg::unitarity_defect;

    #[test]
    fn haar_is_unitary_and_reproducible() {
        let u = haar_unitary(8, &mut rng(7, 0));
        assert!(unitarity_defect(&u) < 1e-12);
        let v = haar_unitary(8, &mut rng(7, 0));
        assert_eq!(u, v);
        let w = haar_unitary(8, &mut rng(7, 1));
        assert_ne!(u, w);
    }

    #[test]
    fn random_density_is_valid() {
        let l = RegisterLayout::new([("A", 2)]).unwrap();
        let rho = random_density(l.clone(), 2, &mut rng(3, 0));
        DensityMatrix::new(l, rho.matrix().clone()).unwrap();
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = random_probabilities(10, &mut rng(1, 2));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x > 0.0));
    }
}
