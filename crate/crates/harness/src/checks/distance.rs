use qicost::qkernel::{
    bures_matrices, fidelity_matrices, trace_distance_matrices, CMatrix, QuantumState,
    RegisterLayout,
};
use qicost::random::{haar_unitary, random_density, random_probabilities};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::gen::{conjugate, cq_matrix, random_state, random_state_on};
use crate::report::SampleRecord;

fn random_matrices(count: usize, rng: &mut ChaCha20Rng) -> Vec<CMatrix> {
    let q = rng.random_range(1..=3);
    (0..count)
        .map(|_| random_state("A", q, rng).matrix().clone())
        .collect()
}

fn bsq(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    Ok((1.0 - fidelity_matrices(a, b)?).max(0.0))
}

pub(super) fn fvdg(_: &ExperimentConfig, i: usize, rng: &mut ChaCha20Rng) -> Result<SampleRecord> {
    let s = random_matrices(2, rng);
    let b = bures_matrices(&s[0], &s[1])?;
    let d = trace_distance_matrices(&s[0], &s[1])?;
    Ok(SampleRecord::worst([
        SampleRecord::le(i, b * b, d),
        SampleRecord::le(i, d, std::f64::consts::SQRT_2 * b),
    ]))
}

pub(super) fn bures_triangle(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let s = random_matrices(3, rng);
    let direct = bures_matrices(&s[0], &s[2])?;
    let via = bures_matrices(&s[0], &s[1])? + bures_matrices(&s[1], &s[2])?;
    Ok(SampleRecord::le(i, direct, via))
}

pub(super) fn bures_weak(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let t = rng.random_range(2..=4);
    let s = random_matrices(t + 1, rng);
    let mut sum = 0.0;
    for w in s.windows(2) {
        sum += bsq(&w[0], &w[1])?;
    }
    Ok(SampleRecord::le(i, bsq(&s[0], &s[t])?, t as f64 * sum))
}

pub(super) fn bures_avg(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let xs = 1usize << rng.random_range(1..=2);
    let q = rng.random_range(1..=2);
    let p = random_probabilities(xs, rng);
    let a = random_matrices_fixed(xs, q, rng);
    let b = random_matrices_fixed(xs, q, rng);
    let whole = bsq(&cq_matrix(&p, &a), &cq_matrix(&p, &b))?;
    let mut avg = 0.0;
    for x in 0..xs {
        avg += p[x] * bsq(&a[x], &b[x])?;
    }
    Ok(SampleRecord::eq(i, whole, avg))
}

fn random_matrices_fixed(count: usize, q: usize, rng: &mut ChaCha20Rng) -> Vec<CMatrix> {
    (0..count)
        .map(|_| random_state("B", q, rng).matrix().clone())
        .collect()
}

pub(super) fn dist_mono(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let (a, b) = (rng.random_range(1..=2), rng.random_range(1..=2));
    let layout = RegisterLayout::new([("A", a), ("B", b)])?;
    let rho = random_state_on(layout.clone(), rng);
    let sigma = random_density(layout.clone(), rng.random_range(1..=layout.dim()), rng);
    let keep: Vec<usize> = (0..a).collect();
    let (ra, sa) = (rho.reduced_on_qubits(&keep), sigma.reduced_on_qubits(&keep));
    let (r, s) = (rho.matrix(), sigma.matrix());
    let u = haar_unitary(layout.dim(), rng);
    let (ur, us) = (conjugate(&u, r), conjugate(&u, s));
    Ok(SampleRecord::worst([
        SampleRecord::le(
            i,
            trace_distance_matrices(&ra, &sa)?,
            trace_distance_matrices(r, s)?,
        ),
        SampleRecord::le(i, bures_matrices(&ra, &sa)?, bures_matrices(r, s)?),
        SampleRecord::eq(
            i,
            trace_distance_matrices(&ur, &us)?,
            trace_distance_matrices(r, s)?,
        ),
        SampleRecord::eq(i, bsq(&ur, &us)?, bsq(r, s)?),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qicost::random::rng;

    #[test]
    fn samples_are_reproducible() {
        let c = ExperimentConfig::default();
        let a = fvdg(&c, 0, &mut rng(7, 1)).unwrap();
        let b = fvdg(&c, 0, &mut rng(7, 1)).unwrap();
        assert_eq!(a, b);
        assert!(a.violation <= 1e-7);
    }

    #[test]
    fn classical_averaging_is_exact_on_diagonal_blocks() {
        let c = ExperimentConfig::default();
        for s in 0..20 {
            assert!(bures_avg(&c, s, &mut rng(3, s as u64)).unwrap().violation < 1e-8);
        }
    }
}
