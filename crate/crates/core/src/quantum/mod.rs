//! Two-party quantum protocols with read-only classical inputs.
//!
//! Alice holds input register `X`, Bob holds `Y`. Every other register is
//! declared with an initial owner; sending a message moves its registers to
//! the other party. Rounds alternate starting with Alice and the party that
//! receives the last message performs the final two-outcome measurement.

mod cost;
mod format;
mod library;
mod ops;
mod sim;

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;

use crate::classical::Party;
use crate::error::{Error, Result};
use crate::functions::FunctionRef;
use crate::qkernel::{PureState, Register, RegisterLayout};

pub use cost::{
    acceptance_probability, costs_from_trace, hqic, qcc, qic, quantum_costs,
    quantum_worst_case_error, sqic, QuantumCosts,
};
pub use format::{
    AmplitudesFile, BlockFile, EffectFile, InitialFile, MatrixFile, MeasurementFile, OpFile,
    QuantumProtocolFile, RoundSpecFile,
};
pub use library::{alice_sends_input, random_protocol, sink_xor_relay, RandomProtocolConfig};
pub use ops::{qubits, Block, Effect, Measurement, Op, QubitRef};
pub use sim::{
    final_output_state, output_registers, run_channel, run_on_input, run_rounds,
    run_trace_on_input, RoundState, RoundTrace, MAX_SIMULATED_QUBITS,
};

/// Labels used by the simulator for inputs, their purifications and channel references.
pub const RESERVED_LABELS: [&str; 5] = ["X", "Y", "RX", "RY", "P"];

/// Amplitudes of the shared initial state over a subset of the protocol registers.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialAmplitudes {
    pub registers: Vec<String>,
    pub values: Vec<Complex64>,
}

/// Shared state prepared before the inputs are given: optional amplitudes on
/// some registers (the rest start in `|0⟩`), followed by arbitrary unitaries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialState {
    pub amplitudes: Option<InitialAmplitudes>,
    pub ops: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRound {
    pub ops: Vec<Op>,
    /// Registers handed to the other party at the end of the round.
    pub message: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumProtocol {
    x_bits: usize,
    y_bits: usize,
    alice_registers: Vec<Register>,
    bob_registers: Vec<Register>,
    initial: InitialState,
    rounds: Vec<QuantumRound>,
    measurement: Measurement,
    /// `Θ_0` over `alice_registers ++ bob_registers`.
    theta0: PureState,
}

/// Registers held by each party, inputs excluded.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Holdings {
    pub alice: Vec<String>,
    pub bob: Vec<String>,
}

impl Holdings {
    pub fn of(&self, party: Party) -> &[String] {
        match party {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        }
    }

    fn of_mut(&mut self, party: Party) -> &mut Vec<String> {
        match party {
            Party::Alice => &mut self.alice,
            Party::Bob => &mut self.bob,
        }
    }
}

pub fn input_register(party: Party) -> &'static str {
    match party {
        Party::Alice => "X",
        Party::Bob => "Y",
    }
}

impl QuantumProtocol {
    pub fn new(
        x_bits: usize,
        y_bits: usize,
        alice_registers: Vec<Register>,
        bob_registers: Vec<Register>,
        initial: InitialState,
        rounds: Vec<QuantumRound>,
        measurement: Measurement,
    ) -> Result<Self> {
        if x_bits == 0 || y_bits == 0 {
            return Err(Error::InvalidProtocol(
                "inputs need at least one bit".into(),
            ));
        }
        for r in alice_registers.iter().chain(&bob_registers) {
            if RESERVED_LABELS.contains(&r.label.as_str()) {
                return Err(Error::LabelCollision(r.label.clone()));
            }
        }
        let layout = RegisterLayout::new(
            alice_registers
                .iter()
                .chain(&bob_registers)
                .map(|r| (r.label.clone(), r.width)),
        )?;
        if layout.total_width() + 2 * (x_bits + y_bits) > sim::MAX_SIMULATED_QUBITS {
            return Err(Error::CapExceeded(format!(
                "{} protocol qubits plus inputs and purifications exceed {}",
                layout.total_width(),
                sim::MAX_SIMULATED_QUBITS
            )));
        }
        let mut p = Self {
            x_bits,
            y_bits,
            alice_registers,
            bob_registers,
            initial,
            rounds,
            measurement,
            theta0: PureState::basis(layout, 0)?,
        };
        p.validate_structure()?;
        p.theta0 = sim::prepare_theta0(&p)?;
        Ok(p)
    }

    fn widths(&self) -> HashMap<&str, usize> {
        let mut w: HashMap<&str, usize> = self
            .alice_registers
            .iter()
            .chain(&self.bob_registers)
            .map(|r| (r.label.as_str(), r.width))
            .collect();
        w.insert("X", self.x_bits);
        w.insert("Y", self.y_bits);
        w
    }

    fn check_bits(&self, qs: &[QubitRef], widths: &HashMap<&str, usize>) -> Result<()> {
        for q in qs {
            match widths.get(q.reg.as_str()) {
                None => return Err(Error::UnknownLabel(q.reg.clone())),
                Some(&w) if q.bit >= w => {
                    return Err(Error::OutOfRange(format!(
                        "qubit {q} of a {w}-qubit register"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn validate_structure(&self) -> Result<()> {
        let widths = self.widths();
        for op in &self.initial.ops {
            self.check_bits(op.controls(), &widths)?;
            self.check_bits(op.targets(), &widths)?;
            if let Some(r) = op.registers().find(|r| *r == "X" || *r == "Y") {
                return Err(Error::InvalidProtocol(format!(
                    "initial state preparation touches input {r}"
                )));
            }
        }
        if let Some(a) = &self.initial.amplitudes {
            let mut dim = 1usize;
            for r in &a.registers {
                match widths.get(r.as_str()) {
                    Some(&w) if r != "X" && r != "Y" => dim <<= w,
                    _ => return Err(Error::UnknownLabel(r.clone())),
                }
            }
            if a.values.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.values.len(),
                });
            }
        }
        let mut hold = self.initial_holdings();
        for (i, round) in self.rounds.iter().enumerate() {
            let sender = Party::of_round(i);
            let own = hold.of(sender);
            let input = input_register(sender);
            for op in &round.ops {
                self.check_bits(op.controls(), &widths)?;
                self.check_bits(op.targets(), &widths)?;
                for q in op.targets() {
                    if !own.contains(&q.reg) {
                        return Err(Error::InvalidProtocol(format!(
                            "round {}: {sender:?} cannot act on {}",
                            i + 1,
                            q.reg
                        )));
                    }
                }
                for q in op.controls() {
                    if q.reg != input && !own.contains(&q.reg) {
                        return Err(Error::InvalidProtocol(format!(
                            "round {}: {sender:?} cannot read {}",
                            i + 1,
                            q.reg
                        )));
                    }
                }
            }
            let mut seen = BTreeSet::new();
            for r in &round.message {
                if !own.contains(r) || !seen.insert(r) {
                    return Err(Error::InvalidProtocol(format!(
                        "round {}: {sender:?} cannot send {r}",
                        i + 1
                    )));
                }
            }
            hold = Self::transfer(hold, sender, &round.message);
        }
        let out = self.output_party();
        let own = hold.of(out);
        self.check_bits(self.measurement.controls(), &widths)?;
        self.check_bits(self.measurement.targets(), &widths)?;
        for q in self.measurement.targets() {
            if !own.contains(&q.reg) {
                return Err(Error::InvalidProtocol(format!(
                    "{out:?} cannot measure {}",
                    q.reg
                )));
            }
        }
        for q in self.measurement.controls() {
            if q.reg != input_register(out) && !own.contains(&q.reg) {
                return Err(Error::InvalidProtocol(format!(
                    "{out:?} cannot read {} in the final measurement",
                    q.reg
                )));
            }
        }
        Ok(())
    }

    fn transfer(mut hold: Holdings, sender: Party, message: &[String]) -> Holdings {
        hold.of_mut(sender).retain(|r| !message.contains(r));
        hold.of_mut(sender.other()).extend(message.iter().cloned());
        hold
    }

    pub fn initial_holdings(&self) -> Holdings {
        Holdings {
            alice: self
                .alice_registers
                .iter()
                .map(|r| r.label.clone())
                .collect(),
            bob: self.bob_registers.iter().map(|r| r.label.clone()).collect(),
        }
    }

    /// Holdings after rounds `1..=r` have been delivered.
    pub fn holdings_after(&self, r: usize) -> Holdings {
        let mut hold = self.initial_holdings();
        for (i, round) in self.rounds.iter().take(r).enumerate() {
            hold = Self::transfer(hold, Party::of_round(i), &round.message);
        }
        hold
    }

    /// The receiver of the last message; Alice when there are no rounds.
    pub fn output_party(&self) -> Party {
        match self.rounds.len() {
            0 => Party::Alice,
            t => Party::of_round(t - 1).other(),
        }
    }

    pub fn x_bits(&self) -> usize {
        self.x_bits
    }

    pub fn y_bits(&self) -> usize {
        self.y_bits
    }

    pub fn alice_registers(&self) -> &[Register] {
        &self.alice_registers
    }

    pub fn bob_registers(&self) -> &[Register] {
        &self.bob_registers
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    pub fn rounds(&self) -> &[QuantumRound] {
        &self.rounds
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn measurement(&self) -> &Measurement {
        &self.measurement
    }

    /// Shared state before the inputs arrive.
    pub fn theta0(&self) -> &PureState {
        &self.theta0
    }

    /// Width of a register, inputs included.
    pub fn width(&self, label: &str) -> Result<usize> {
        self.widths()
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Protocol registers (inputs excluded) in declaration order.
    pub fn registers(&self) -> impl Iterator<Item = &Register> {
        self.alice_registers.iter().chain(&self.bob_registers)
    }

    /// Number of qubits in message `r` (1-based).
    pub fn message_width(&self, r: usize) -> usize {
        self.rounds[r - 1]
            .message
            .iter()
            .map(|l| self.width(l).unwrap_or(0))
            .sum()
    }

    /// Tags the protocol with the function it is meant to compute.
    pub fn describe(&self, f: Option<&FunctionRef>) -> String {
        format!(
            "{} rounds, {} + {} input bits, {} qubits of memory{}",
            self.rounds.len(),
            self.x_bits,
            self.y_bits,
            self.registers().map(|r| r.width).sum::<usize>(),
            f.map(|f| format!(", computing {f}")).unwrap_or_default()
        )
    }
}
