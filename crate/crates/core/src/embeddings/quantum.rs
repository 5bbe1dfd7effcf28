use num_complex::Complex64;

use super::{
    coordinate_marginals, embed_bits, verify_invariance, EmbeddingSpec, StringPermutation,
};
use crate::error::{Error, Result};
use crate::inputs::InputDistribution;
use crate::qkernel::{CMatrix, Register};
use crate::quantum::{qubits, InitialState, Op, QuantumProtocol, QuantumRound, QubitRef};

/// Registers added by the embeddings: the set index copies and the privately
/// sampled outside coordinates with their purifications.
pub const EMBEDDING_LABELS: [&str; 6] = ["SA", "SB", "XO", "RXO", "YO", "RYO"];

fn reg(label: &str, width: usize) -> Register {
    Register {
        label: label.into(),
        width,
    }
}

/// Unitary whose first column is `u` (a real unit vector), by a Householder reflection.
fn unitary_with_first_column(u: &[f64]) -> CMatrix {
    let d = u.len();
    let mut v: Vec<f64> = u.iter().map(|x| -x).collect();
    v[0] += 1.0;
    let nv: f64 = v.iter().map(|x| x * x).sum();
    CMatrix::from_fn(d, d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        let h = if nv < 1e-30 {
            id
        } else {
            id - 2.0 * v[i] * v[j] / nv
        };
        Complex64::new(h, 0.0)
    })
}

/// `Σ_b √m(b) |b⟩|b⟩` on each pair `(reg[i], rreg[i])`.
fn sampling_ops(reg: &str, rreg: &str, count: usize, marginal: &[f64]) -> Result<Vec<Op>> {
    let amps: Vec<f64> = marginal.iter().map(|p| p.sqrt()).collect();
    let u = unitary_with_first_column(&amps);
    let mut ops = Vec::new();
    for i in 0..count {
        ops.push(Op::unitary(vec![QubitRef::new(reg, i)], u.clone())?);
        ops.push(Op::cnot(QubitRef::new(reg, i), QubitRef::new(rreg, i))?);
    }
    Ok(ops)
}

fn check_shape(p: &QuantumProtocol, n: usize) -> Result<()> {
    if p.x_bits() != n || p.y_bits() != n {
        return Err(Error::DomainMismatch(format!(
            "protocol inputs {}+{} bits, embedding needs {n}+{n}",
            p.x_bits(),
            p.y_bits()
        )));
    }
    Ok(())
}

fn outside(n: usize, coords: &[usize]) -> Vec<usize> {
    (0..n).filter(|j| !coords.contains(j)).collect()
}

/// `Π_S`: `p` with the coordinates of `coords` as inputs and the others
/// sampled privately from `mu1` before the first round.
pub fn quantum_embed_fixed_set(
    p: &QuantumProtocol,
    coords: &[usize],
    mu1: &InputDistribution,
) -> Result<QuantumProtocol> {
    let n = p.x_bits();
    check_shape(p, n)?;
    let spec = EmbeddingSpec::point(n, coords.to_vec())?;
    let (mx, my) = coordinate_marginals(mu1)?;
    let t = spec.t();
    if t == n {
        return Ok(p.clone());
    }
    let out = outside(n, coords);
    let rename = |q: &QubitRef| -> QubitRef {
        let (own, other) = match q.reg.as_str() {
            "X" => ("X", "XO"),
            "Y" => ("Y", "YO"),
            _ => return q.clone(),
        };
        match coords.iter().position(|&c| c == q.bit) {
            Some(pos) => QubitRef::new(own, pos),
            None => QubitRef::new(
                other,
                out.iter().position(|&c| c == q.bit).expect("outside"),
            ),
        }
    };
    let mut initial_ops = sampling_ops("XO", "RXO", n - t, &mx)?;
    initial_ops.extend(sampling_ops("YO", "RYO", n - t, &my)?);
    initial_ops.extend(p.initial().ops.iter().cloned());
    let rounds = p
        .rounds()
        .iter()
        .map(|r| {
            Ok(QuantumRound {
                ops: r
                    .ops
                    .iter()
                    .map(|o| o.map_qubits(rename))
                    .collect::<Result<_>>()?,
                message: r.message.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let mut alice = vec![reg("XO", n - t), reg("RXO", n - t)];
    alice.extend(p.alice_registers().iter().cloned());
    let mut bob = vec![reg("YO", n - t), reg("RYO", n - t)];
    bob.extend(p.bob_registers().iter().cloned());
    QuantumProtocol::new(
        t,
        t,
        alice,
        bob,
        InitialState {
            amplitudes: p.initial().amplitudes.clone(),
            ops: initial_ops,
        },
        rounds,
        p.measurement().map_qubits(rename)?,
    )
}

/// Rewrites a control table of `p` that reads the input `input` so that it reads
/// the set index `index`, the embedded input and the outside coordinates instead.
struct Multiplexer<'a> {
    spec: &'a EmbeddingSpec,
    input: &'static str,
    index: &'static str,
    outside: &'static str,
    alice: bool,
}

impl Multiplexer<'_> {
    fn rewrite(&self, controls: &[QubitRef], table: &[u32]) -> Option<(Vec<QubitRef>, Vec<u32>)> {
        if !controls.iter().any(|q| q.reg == self.input) {
            return None;
        }
        let (n, t) = (self.spec.n(), self.spec.t());
        let w = self.spec.index_bits();
        let others: Vec<&QubitRef> = controls.iter().filter(|q| q.reg != self.input).collect();
        let mut new_controls = qubits(self.index, w);
        new_controls.extend(qubits(self.input, t));
        new_controls.extend(qubits(self.outside, n - t));
        new_controls.extend(others.iter().map(|q| (*q).clone()));
        let len = new_controls.len();
        let r = others.len();
        let new_table = (0..1u64 << len)
            .map(|v| {
                let s = (v >> (len - w)) as usize;
                let set = &self.spec.sets()[if s < self.spec.sets().len() { s } else { 0 }];
                let perm = if self.alice { &set.perm_a } else { &set.perm_b };
                let inside = (v >> (len - w - t)) & ((1 << t) - 1);
                let out = (v >> r) & ((1 << (n - t)) - 1);
                let x = embed_bits(n, &set.coords, perm.apply(inside), out);
                let mut rest_pos = 0;
                let mut c = 0u64;
                for q in controls {
                    let b = if q.reg == self.input {
                        (x >> (n - 1 - q.bit)) & 1
                    } else {
                        rest_pos += 1;
                        (v >> (r - rest_pos)) & 1
                    };
                    c = (c << 1) | b;
                }
                table[c as usize]
            })
            .collect();
        Some((new_controls, new_table))
    }
}

/// `Π̂`: the set index is shared as `Σ_S √p(S) |S⟩_SA |S⟩_SB`, each party
/// samples its outside coordinates, and every use of an input is routed
/// through the permutation and embedding selected by the set index.
pub fn quantum_embed_averaged(
    p: &QuantumProtocol,
    spec: &EmbeddingSpec,
    mu1: &InputDistribution,
) -> Result<QuantumProtocol> {
    let (n, t) = (spec.n(), spec.t());
    check_shape(p, n)?;
    verify_invariance(spec, mu1)?;
    if let [only] = spec.sets() {
        if t == n
            && only.perm_a == StringPermutation::Identity
            && only.perm_b == StringPermutation::Identity
        {
            return Ok(p.clone());
        }
    }
    let (mx, my) = coordinate_marginals(mu1)?;
    let w = spec.index_bits();
    let mut amps = vec![0.0; 1 << w];
    for (i, s) in spec.sets().iter().enumerate() {
        amps[i] = s.prob.sqrt();
    }
    let mut initial_ops = vec![Op::unitary(
        qubits("SA", w),
        unitary_with_first_column(&amps),
    )?];
    for b in 0..w {
        initial_ops.push(Op::cnot(QubitRef::new("SA", b), QubitRef::new("SB", b))?);
    }
    initial_ops.extend(sampling_ops("XO", "RXO", n - t, &mx)?);
    initial_ops.extend(sampling_ops("YO", "RYO", n - t, &my)?);
    initial_ops.extend(p.initial().ops.iter().cloned());

    let alice_mux = Multiplexer {
        spec,
        input: "X",
        index: "SA",
        outside: "XO",
        alice: true,
    };
    let bob_mux = Multiplexer {
        spec,
        input: "Y",
        index: "SB",
        outside: "YO",
        alice: false,
    };
    let rewrite_op = |o: &Op| -> Result<Op> {
        match alice_mux
            .rewrite(o.controls(), o.table())
            .or_else(|| bob_mux.rewrite(o.controls(), o.table()))
        {
            Some((c, t)) => o.with_controls(c, t),
            None => Ok(o.clone()),
        }
    };
    let rounds = p
        .rounds()
        .iter()
        .map(|r| {
            Ok(QuantumRound {
                ops: r.ops.iter().map(rewrite_op).collect::<Result<_>>()?,
                message: r.message.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let m = p.measurement();
    let measurement = match alice_mux
        .rewrite(m.controls(), m.table())
        .or_else(|| bob_mux.rewrite(m.controls(), m.table()))
    {
        Some((c, t)) => m.with_controls(c, t)?,
        None => m.clone(),
    };
    let mut alice = vec![reg("SA", w)];
    let mut bob = vec![reg("SB", w)];
    if n > t {
        alice.extend([reg("XO", n - t), reg("RXO", n - t)]);
        bob.extend([reg("YO", n - t), reg("RYO", n - t)]);
    }
    alice.extend(p.alice_registers().iter().cloned());
    bob.extend(p.bob_registers().iter().cloned());
    QuantumProtocol::new(
        t,
        t,
        alice,
        bob,
        InitialState {
            amplitudes: p.initial().amplitudes.clone(),
            ops: initial_ops,
        },
        rounds,
        measurement,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::sink_embedding_spec;
    use crate::functions::{eq, sink_xor};
    use crate::quantum::{acceptance_probability, quantum_worst_case_error, sink_xor_relay};

    #[test]
    fn householder_column() {
        let u = unitary_with_first_column(&[0.6, 0.8, 0.0, 0.0]);
        assert!((u[(0, 0)].re - 0.6).abs() < 1e-15 && (u[(1, 0)].re - 0.8).abs() < 1e-15);
        assert!(crate::qkernel::linalg::unitarity_defect(&u) < 1e-14);
        let id = unitary_with_first_column(&[1.0, 0.0]);
        assert!((id[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn full_set_is_identity_embedding() {
        let p = sink_xor_relay(3).unwrap();
        let u = InputDistribution::uniform(2, 2);
        let q = quantum_embed_fixed_set(&p, &[0, 1, 2], &u).unwrap();
        assert_eq!(p, q);
        let spec = EmbeddingSpec::point(3, vec![0, 1, 2]).unwrap();
        assert_eq!(quantum_embed_averaged(&p, &spec, &u).unwrap(), p);
    }

    #[test]
    fn averaged_embedding_computes_eq_with_bounded_error() {
        let p = sink_xor_relay(3).unwrap();
        assert!(quantum_worst_case_error(&p, &sink_xor(3).unwrap()).unwrap() < 1e-12);
        let spec = sink_embedding_spec(3).unwrap();
        let u = InputDistribution::uniform(2, 2);
        let e = quantum_embed_averaged(&p, &spec, &u).unwrap();
        assert!(quantum_worst_case_error(&e, &eq(2).unwrap()).unwrap() <= 1.0 + 1e-12);
        for c in 0..4 {
            assert!((acceptance_probability(&e, c, c).unwrap() - 1.0).abs() < 1e-9);
        }
        // c ⊕ d = 11 makes v_i a source, so one of the other vertices is a sink.
        assert!((acceptance_probability(&e, 0, 3).unwrap() - 1.0).abs() < 1e-9);
        // Otherwise the outside edge decides whether a sink appears.
        assert!((acceptance_probability(&e, 0, 1).unwrap() - 0.5).abs() < 1e-9);
    }
}
