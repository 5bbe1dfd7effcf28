//! Channel identity between `Π_S` on a state of the embedded coordinates and
//! `Π` on that state padded with independent samples of the other coordinates.

use num_complex::Complex64;
use qicost::embeddings::quantum_embed_fixed_set;
use qicost::qkernel::{
    trace_distance_matrices, CMatrix, DensityMatrix, QuantumState, RegisterLayout,
};
use qicost::quantum::{run_channel, QuantumProtocol};
use qicost::InputDistribution;

use crate::error::{HarnessError, Result};

/// Bits of the `n`-bit value `v` at `coords`, first coordinate most significant.
fn gather(v: usize, n: usize, coords: &[usize]) -> usize {
    coords
        .iter()
        .fold(0, |acc, &j| (acc << 1) | ((v >> (n - 1 - j)) & 1))
}

/// `σ ⊗ ρ_μ^{⊗(n-t)}` on `[X n, Y n]`, with `σ` placed on `coords`.
fn padded_input(
    sigma: &DensityMatrix,
    n: usize,
    coords: &[usize],
    mu1: &InputDistribution,
) -> Result<DensityMatrix> {
    let t = coords.len();
    let out: Vec<usize> = (0..n).filter(|j| !coords.contains(j)).collect();
    let d = 1usize << (2 * n);
    let split = |i: usize| {
        let (x, y) = (i >> n, i & ((1 << n) - 1));
        let inner = (gather(x, n, coords) << t) | gather(y, n, coords);
        (inner, gather(x, n, &out), gather(y, n, &out))
    };
    let weight = |xo: usize, yo: usize| {
        let k = out.len();
        (0..k)
            .map(|b| {
                mu1.prob(
                    ((xo >> (k - 1 - b)) & 1) as u64,
                    ((yo >> (k - 1 - b)) & 1) as u64,
                )
            })
            .product::<f64>()
    };
    let s = sigma.matrix();
    let m = CMatrix::from_fn(d, d, |i, j| {
        let (si, xi, yi) = split(i);
        let (sj, xj, yj) = split(j);
        if xi != xj || yi != yj {
            return Complex64::new(0.0, 0.0);
        }
        s[(si, sj)] * weight(xi, yi)
    });
    let layout = RegisterLayout::new([("X", n), ("Y", n)])?;
    Ok(DensityMatrix::new(layout, m)?)
}

/// Trace distance between `Π_S(σ)` and `Π(σ ⊗ ρ_μ^{⊗(n-t)})` on the inputs
/// and all protocol registers, with qubits matched coordinate by coordinate.
pub fn channel_identity_gap(
    p: &QuantumProtocol,
    coords: &[usize],
    mu1: &InputDistribution,
    sigma: &DensityMatrix,
) -> Result<f64> {
    let n = p.x_bits();
    let t = coords.len();
    if t == 0 || t >= n {
        return Err(HarnessError::Precondition(format!(
            "need 0 < |S| < n, got {t} of {n}"
        )));
    }
    let ps = quantum_embed_fixed_set(p, coords, mu1)?;
    let embedded = run_channel(&ps, sigma)?;
    let direct = run_channel(p, &padded_input(sigma, n, coords, mu1)?)?;

    let (le, ld) = (embedded.layout(), direct.layout());
    let mut keep_e = Vec::new();
    let mut keep_d = Vec::new();
    for (inner, outer) in [("X", "XO"), ("Y", "YO")] {
        let (mut a, mut b) = (0, 0);
        for j in 0..n {
            if coords.contains(&j) {
                keep_e.push(le.qubit(inner, a)?);
                a += 1;
            } else {
                keep_e.push(le.qubit(outer, b)?);
                b += 1;
            }
            keep_d.push(ld.qubit(inner, j)?);
        }
    }
    for r in p.registers() {
        keep_e.extend(le.qubits(&r.label)?);
        keep_d.extend(ld.qubits(&r.label)?);
    }
    let a = embedded.reduced_on_qubits(&keep_e);
    let b = direct.reduced_on_qubits(&keep_d);
    Ok(trace_distance_matrices(&a, &b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::random_state_on;
    use qicost::functions::sink_xor;
    use qicost::quantum::alice_sends_input;
    use qicost::random::rng;

    #[test]
    fn gather_reads_most_significant_first() {
        assert_eq!(gather(0b101, 3, &[0, 1]), 0b10);
        assert_eq!(gather(0b101, 3, &[2]), 1);
    }

    #[test]
    fn identity_holds_for_a_sending_protocol() {
        let p = alice_sends_input(&sink_xor(3).unwrap()).unwrap();
        let mut r = rng(3, 0);
        let mu1 = crate::gen::random_product(1, 1, &mut r).unwrap();
        let layout = RegisterLayout::new([("X", 1), ("Y", 1)]).unwrap();
        let sigma = random_state_on(layout, &mut r);
        let gap = channel_identity_gap(&p, &[1], &mu1, &sigma).unwrap();
        assert!(gap < 1e-9, "{gap}");
    }
}
