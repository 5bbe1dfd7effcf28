//! Ready-made quantum protocols.

use rand::Rng;

use super::ops::{qubits, Block, Effect, Measurement, Op};
use super::{InitialAmplitudes, InitialState, QuantumProtocol, QuantumRound};
use crate::error::{Error, Result};
use crate::functions::{num_edges, BooleanFunction, FunctionRef};
use crate::qkernel::{Register, RegisterLayout};
use crate::random::{haar_unitary, random_effect, random_pure_state};

fn reg(label: &str, width: usize) -> Register {
    Register {
        label: label.into(),
        width,
    }
}

/// One round: Alice copies `X` into `C1` and sends it; Bob accepts iff `f(C1, Y) = 1`.
pub fn alice_sends_input(f: &BooleanFunction) -> Result<QuantumProtocol> {
    let (k, l) = (f.x_bits(), f.y_bits());
    let ops = (0..k)
        .map(|j| Op::cnot(super::QubitRef::new("X", j), super::QubitRef::new("C1", j)))
        .collect::<Result<_>>()?;
    let mut readout = qubits("C1", k);
    readout.extend(qubits("Y", l));
    let f2 = f.clone();
    let measurement = Measurement::projective(readout, move |v| {
        f2.evaluate(v >> l, v & ((1 << l) - 1)).unwrap_or(false)
    })?;
    QuantumProtocol::new(
        k,
        l,
        vec![reg("C1", k)],
        vec![],
        InitialState::default(),
        vec![QuantumRound {
            ops,
            message: vec!["C1".into()],
        }],
        measurement,
    )
}

/// Two rounds computing `sink(x ⊕ y)`: Alice sends a copy of `x`, Bob
/// answers with the one-qubit value, Alice reads it out.
pub fn sink_xor_relay(m: usize) -> Result<QuantumProtocol> {
    let f = FunctionRef::SinkXor(m);
    f.build()?;
    let e = num_edges(m);
    let copy = (0..e)
        .map(|j| Op::cnot(super::QubitRef::new("X", j), super::QubitRef::new("C1", j)))
        .collect::<Result<_>>()?;
    let mut controls = qubits("C1", e);
    controls.extend(qubits("Y", e));
    let answer = Op::compute(controls, super::QubitRef::new("C2", 0), move |v| {
        f.eval(v >> e, v & ((1 << e) - 1))
    })?;
    QuantumProtocol::new(
        e,
        e,
        vec![reg("C1", e)],
        vec![reg("C2", 1)],
        InitialState::default(),
        vec![
            QuantumRound {
                ops: copy,
                message: vec!["C1".into()],
            },
            QuantumRound {
                ops: vec![answer],
                message: vec!["C2".into()],
            },
        ],
        Measurement::projective(qubits("C2", 1), |v| v == 1)?,
    )
}

/// Shape of a random protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomProtocolConfig {
    pub x_bits: usize,
    pub y_bits: usize,
    pub rounds: usize,
    pub alice_memory: usize,
    pub bob_memory: usize,
    pub message_qubits: usize,
    /// Start from a random entangled state of the memories.
    pub entangled: bool,
}

impl Default for RandomProtocolConfig {
    fn default() -> Self {
        Self {
            x_bits: 1,
            y_bits: 1,
            rounds: 2,
            alice_memory: 1,
            bob_memory: 1,
            message_qubits: 1,
            entangled: true,
        }
    }
}

/// Random protocol: in each round the sender applies a Haar-random unitary,
/// chosen by its input value, to its memory and the message register `C`,
/// then passes `C` on. The output party measures a random effect.
pub fn random_protocol<R: Rng + ?Sized>(
    cfg: &RandomProtocolConfig,
    rng: &mut R,
) -> Result<QuantumProtocol> {
    if cfg.alice_memory == 0 || cfg.bob_memory == 0 || cfg.message_qubits == 0 {
        return Err(Error::InvalidProtocol(
            "random protocols need nonempty registers".into(),
        ));
    }
    let initial = if cfg.entangled {
        let layout = RegisterLayout::new([("A", cfg.alice_memory), ("B", cfg.bob_memory)])?;
        let psi = random_pure_state(layout, rng);
        InitialState {
            amplitudes: Some(InitialAmplitudes {
                registers: vec!["A".into(), "B".into()],
                values: psi.amplitudes().to_vec(),
            }),
            ops: Vec::new(),
        }
    } else {
        InitialState::default()
    };
    let mut rounds = Vec::new();
    for i in 0..cfg.rounds {
        let (input, bits, mem, width) = if i % 2 == 0 {
            ("X", cfg.x_bits, "A", cfg.alice_memory)
        } else {
            ("Y", cfg.y_bits, "B", cfg.bob_memory)
        };
        let mut targets = qubits(mem, width);
        targets.extend(qubits("C", cfg.message_qubits));
        let dim = 1 << targets.len();
        let blocks = (0..1 << bits)
            .map(|_| Block::Dense(haar_unitary(dim, rng)))
            .collect();
        rounds.push(QuantumRound {
            ops: vec![Op::controlled(qubits(input, bits), targets, blocks)?],
            message: vec!["C".into()],
        });
    }
    let alice_outputs = cfg.rounds.is_multiple_of(2);
    let (input, bits, mem, width) = if alice_outputs {
        ("X", cfg.x_bits, "A", cfg.alice_memory)
    } else {
        ("Y", cfg.y_bits, "B", cfg.bob_memory)
    };
    let mut targets = qubits(mem, width);
    if cfg.rounds > 0 {
        targets.extend(qubits("C", cfg.message_qubits));
    }
    let dim = 1 << targets.len();
    let effects: Vec<Effect> = (0..1 << bits)
        .map(|_| Effect::Dense(random_effect(dim, rng)))
        .collect();
    let table = (0..effects.len() as u32).collect();
    let measurement = Measurement::new(qubits(input, bits), targets, table, effects)?;
    let mut alice = vec![reg("A", cfg.alice_memory)];
    if cfg.rounds > 0 {
        alice.push(reg("C", cfg.message_qubits));
    }
    QuantumProtocol::new(
        cfg.x_bits,
        cfg.y_bits,
        alice,
        vec![reg("B", cfg.bob_memory)],
        initial,
        rounds,
        measurement,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{eq, sink_xor};
    use crate::inputs::InputDistribution;
    use crate::quantum::{qcc, quantum_costs, quantum_worst_case_error};

    #[test]
    fn sending_one_bit_costs_one_bit() {
        let p = alice_sends_input(&eq(1).unwrap()).unwrap();
        let c = quantum_costs(&p, &InputDistribution::uniform(2, 2)).unwrap();
        assert!((c.qic - 1.0).abs() < 1e-9, "{c:?}");
        assert!((c.hqic - 1.0).abs() < 1e-9);
        assert!((c.sqic.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(c.qcc, 1);
        assert_eq!(quantum_worst_case_error(&p, &eq(1).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn sink_relay_is_exact() {
        let p = sink_xor_relay(3).unwrap();
        assert_eq!(qcc(&p), 4);
        assert!(quantum_worst_case_error(&p, &sink_xor(3).unwrap()).unwrap() < 1e-12);
        assert_eq!(p.output_party(), crate::classical::Party::Alice);
    }

    #[test]
    fn random_protocols_are_valid() {
        let mut rng = crate::random::rng(11, 0);
        for rounds in 1..=3 {
            let cfg = RandomProtocolConfig {
                rounds,
                ..Default::default()
            };
            let p = random_protocol(&cfg, &mut rng).unwrap();
            let c = quantum_costs(&p, &InputDistribution::uniform(2, 2)).unwrap();
            assert!(c.qic >= -1e-9 && c.qic <= 2.0 * c.qcc as f64 + 1e-9);
            assert!(c.hqic <= c.sqic.unwrap() + 1e-9);
        }
    }
}
