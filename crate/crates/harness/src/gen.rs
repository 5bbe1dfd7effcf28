//! Seeded random instances for the checks.

use std::sync::Arc;

use num_complex::Complex64;
use qicost::classical::{ClassicalProtocol, MessageArgs, MessageFn, OutputFn, Randomness, Round};
use qicost::embeddings::{EmbeddingSpec, StringPermutation, WeightedSet};
use qicost::functions::FunctionRef;
use qicost::qkernel::{CMatrix, DensityMatrix, RegisterLayout};
use qicost::quantum::RandomProtocolConfig;
use qicost::random::{random_density, random_probabilities};
use qicost::InputDistribution;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;

/// Random mixed state of random rank on a single register `label`.
pub fn random_state<R: Rng + ?Sized>(label: &str, qubits: usize, rng: &mut R) -> DensityMatrix {
    let layout = RegisterLayout::new([(label, qubits)]).expect("valid layout");
    let rank = rng.random_range(1..=1usize << qubits);
    random_density(layout, rank, rng)
}

/// Random mixed state on `layout`.
pub fn random_state_on<R: Rng + ?Sized>(layout: RegisterLayout, rng: &mut R) -> DensityMatrix {
    let rank = rng.random_range(1..=layout.dim());
    random_density(layout, rank, rng)
}

/// Random protocol with lookup-table messages and output on the given domain.
pub fn random_classical_protocol<R: Rng + ?Sized>(
    x_size: u64,
    y_size: u64,
    rng: &mut R,
) -> Result<ClassicalProtocol> {
    let public = Randomness::new(random_probabilities(rng.random_range(1..=3), rng))?;
    let alice = Randomness::new(random_probabilities(rng.random_range(1..=2), rng))?;
    let bob = Randomness::new(random_probabilities(rng.random_range(1..=2), rng))?;
    let num_rounds = rng.random_range(1..=3);
    let mut rounds = Vec::new();
    let mut prefix_bits = 0;
    for i in 0..num_rounds {
        let width = rng.random_range(1..=2usize);
        let (own, private) = if i % 2 == 0 {
            (x_size, alice.size())
        } else {
            (y_size, bob.size())
        };
        let len = (own * private * public.size()) << prefix_bits;
        let table = (0..len)
            .map(|_| rng.random_range(0..1u64 << width))
            .collect();
        rounds.push(Round {
            width,
            message: MessageFn::Table(table),
        });
        prefix_bits += width;
    }
    let output = (0..1u64 << prefix_bits).map(|_| rng.random()).collect();
    Ok(ClassicalProtocol::new(
        x_size,
        y_size,
        public,
        alice,
        bob,
        rounds,
        OutputFn::Table(output),
    )?)
}

/// Both parties send their inputs and the output `f(x, y)` is flipped with
/// probability `q`, drawn from Bob's private randomness.
pub fn noisy_full_protocol(f: FunctionRef, q: f64) -> Result<ClassicalProtocol> {
    let (xb, yb) = (f.x_bits(), f.y_bits());
    let ymask = (1u64 << yb) - 1;
    Ok(ClassicalProtocol::new(
        1 << xb,
        1 << yb,
        Randomness::none(),
        Randomness::none(),
        Randomness::new(vec![1.0 - q, q])?,
        vec![
            Round {
                width: xb,
                message: MessageFn::Func(Arc::new(|a: MessageArgs| a.input)),
            },
            Round {
                width: yb + 1,
                message: MessageFn::Func(Arc::new(|a: MessageArgs| (a.input << 1) | a.private)),
            },
        ],
        OutputFn::Func(Arc::new(move |t| {
            let (x, y, flip) = (t >> (yb + 1), (t >> 1) & ymask, t & 1);
            f.eval(x, y) ^ (flip == 1)
        })),
    )?)
}

/// Shape of a random quantum protocol: at most `max_rounds` rounds, `max_bits`
/// input bits per party, 1–2 qubits of memory and message.
pub fn random_quantum_config<R: Rng + ?Sized>(
    max_rounds: usize,
    max_bits: usize,
    rng: &mut R,
) -> RandomProtocolConfig {
    RandomProtocolConfig {
        x_bits: rng.random_range(1..=max_bits),
        y_bits: rng.random_range(1..=max_bits),
        rounds: rng.random_range(1..=max_rounds),
        alice_memory: rng.random_range(1..=2),
        bob_memory: rng.random_range(1..=2),
        message_qubits: rng.random_range(1..=2),
        entangled: rng.random(),
    }
}

/// Random product distribution on `x_bits + y_bits` bits.
pub fn random_product<R: Rng + ?Sized>(
    x_bits: usize,
    y_bits: usize,
    rng: &mut R,
) -> Result<InputDistribution> {
    let px = random_probabilities(1 << x_bits, rng);
    let py = random_probabilities(1 << y_bits, rng);
    Ok(InputDistribution::product(&px, &py)?)
}

/// Random strictly increasing subset of `0..n` of size `t`.
pub fn random_coords<R: Rng + ?Sized>(n: usize, t: usize, rng: &mut R) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let mut c = all[..t].to_vec();
    c.sort_unstable();
    c
}

/// Random spec with `1..=max_sets` sets of size `t`. With `permute` the sets
/// carry random string permutations (valid for uniform coordinates only).
pub fn random_spec<R: Rng + ?Sized>(
    n: usize,
    t: usize,
    max_sets: usize,
    permute: bool,
    rng: &mut R,
) -> Result<EmbeddingSpec> {
    let count = rng.random_range(1..=max_sets);
    let probs = random_probabilities(count, rng);
    let perm = |rng: &mut R| {
        if !permute {
            return StringPermutation::Identity;
        }
        let mut p: Vec<u32> = (0..1u32 << t).collect();
        p.shuffle(rng);
        StringPermutation::Table { perm: p }
    };
    let sets: Vec<WeightedSet> = probs
        .into_iter()
        .map(|prob| WeightedSet {
            coords: random_coords(n, t, rng),
            prob,
            perm_a: perm(rng),
            perm_b: perm(rng),
        })
        .collect();
    let cover = (0..n)
        .map(|j| {
            sets.iter()
                .filter(|s| s.coords.contains(&j))
                .map(|s| s.prob)
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok(EmbeddingSpec::new(n, t, 1.0 / cover, sets)?)
}

/// Conjugation `U ρ U†` of a raw matrix.
pub fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

/// `⊗` of square matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Block-diagonal classical-quantum state `Σ p(x) |x⟩⟨x| ⊗ ρ^x`.
pub fn cq_matrix(probs: &[f64], blocks: &[CMatrix]) -> CMatrix {
    let d = blocks[0].nrows();
    let mut m = CMatrix::zeros(d * probs.len(), d * probs.len());
    for (x, (p, b)) in probs.iter().zip(blocks).enumerate() {
        m.view_mut((x * d, x * d), (d, d))
            .copy_from(&(b * Complex64::new(*p, 0.0)));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use qicost::classical::worst_case_error;
    use qicost::random::rng;

    #[test]
    fn noisy_protocol_has_the_requested_error() {
        let f = FunctionRef::SinkXor(3);
        let p = noisy_full_protocol(f, 0.125).unwrap();
        let e = worst_case_error(&p, &f.build().unwrap()).unwrap();
        assert!((e - 0.125).abs() < 1e-12);
    }

    #[test]
    fn random_specs_are_valid() {
        let mut r = rng(1, 0);
        for _ in 0..20 {
            let s = random_spec(3, 2, 3, true, &mut r).unwrap();
            assert!(s.max_coverage() <= 1.0 / s.k_bound() + 1e-12);
        }
    }

    #[test]
    fn random_classical_protocols_validate() {
        let mut r = rng(2, 0);
        for _ in 0..20 {
            let p = random_classical_protocol(3, 4, &mut r).unwrap();
            assert!(p.cc() <= 6);
        }
    }
}
