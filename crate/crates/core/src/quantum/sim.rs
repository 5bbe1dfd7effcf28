//! State-vector simulation of quantum protocols.
//!
//! Layouts: `[X, RX, Y, RY, regs..]` for runs on a distribution (the `R`
//! registers purify the inputs), `[X, Y, regs..]` for fixed inputs and
//! `[X, Y, P, regs..]` for a quantum input state purified by `P`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::ops::{Block, Effect, Measurement, Op, QubitRef};
use super::{Holdings, QuantumProtocol};
use crate::classical::Party;
use crate::error::{Error, Result};
use crate::inputs::InputDistribution;
use crate::qkernel::layout::{gather_bits, scatter_bits};
use crate::qkernel::linalg::hermitian_eigen;
use crate::qkernel::{partial_trace, DensityMatrix, PureState, RegisterLayout};

/// Largest global state simulated, in qubits.
pub const MAX_SIMULATED_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const PAR_MIN_QUBITS: usize = 14;

fn resolve(layout: &RegisterLayout, qs: &[QubitRef]) -> Result<Vec<usize>> {
    qs.iter().map(|q| layout.qubit(&q.reg, q.bit)).collect()
}

/// Applies `op` in place to a state over `layout`.
pub(crate) fn apply_op(amps: &mut [Complex64], layout: &RegisterLayout, op: &Op) -> Result<()> {
    let n = layout.total_width();
    let controls = resolve(layout, op.controls())?;
    let targets = resolve(layout, op.targets())?;
    let k = targets.len();
    let t_off: Vec<usize> = (0..1usize << k)
        .map(|v| scatter_bits(v, &targets, n))
        .collect();
    let tmask = *t_off.last().expect("nonempty");
    let table = op.table();
    let blocks = op.blocks();
    // Indices agreeing above the first target are independent of the rest.
    let top = *targets.iter().min().expect("nonempty");
    let chunk = 1usize << (n - top);
    let run = |base0: usize, part: &mut [Complex64]| {
        let mut buf = vec![ZERO; t_off.len()];
        for local in 0..part.len() {
            if local & tmask != 0 {
                continue;
            }
            let c = gather_bits(base0 | local, &controls, n);
            match &blocks[table[c] as usize] {
                Block::Identity => {}
                Block::Permutation(perm) => {
                    for (j, &o) in t_off.iter().enumerate() {
                        buf[perm[j] as usize] = part[local | o];
                    }
                    for (j, &o) in t_off.iter().enumerate() {
                        part[local | o] = buf[j];
                    }
                }
                Block::Dense(u) => {
                    for j in 0..t_off.len() {
                        let mut acc = ZERO;
                        for (l, &o2) in t_off.iter().enumerate() {
                            acc += u[(j, l)] * part[local | o2];
                        }
                        buf[j] = acc;
                    }
                    for (j, &o) in t_off.iter().enumerate() {
                        part[local | o] = buf[j];
                    }
                }
            }
        }
    };
    if n >= PAR_MIN_QUBITS && chunk < amps.len() {
        amps.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, part)| run(i * chunk, part));
    } else {
        run(0, amps);
    }
    Ok(())
}

/// `⟨ψ|M|ψ⟩` for the outcome-1 effect of `m`.
pub(crate) fn expectation(state: &PureState, m: &Measurement) -> Result<f64> {
    let layout = state.layout();
    let amps = state.amplitudes();
    let n = layout.total_width();
    let controls = resolve(layout, m.controls())?;
    let targets = resolve(layout, m.targets())?;
    let t_off: Vec<usize> = (0..1usize << targets.len())
        .map(|v| scatter_bits(v, &targets, n))
        .collect();
    let tmask = *t_off.last().expect("nonempty");
    let total: f64 = (0..amps.len())
        .into_par_iter()
        .with_min_len(1 << 12)
        .filter(|&g| g & tmask == 0)
        .map(|g| {
            let c = gather_bits(g, &controls, n);
            match &m.effects()[m.table()[c] as usize] {
                Effect::Diagonal(d) => t_off
                    .iter()
                    .zip(d)
                    .map(|(&o, &w)| w * amps[g | o].norm_sqr())
                    .sum::<f64>(),
                Effect::Dense(e) => {
                    let mut acc = ZERO;
                    for (j, &oj) in t_off.iter().enumerate() {
                        for (l, &ol) in t_off.iter().enumerate() {
                            acc += amps[g | oj].conj() * e[(j, l)] * amps[g | ol];
                        }
                    }
                    acc.re
                }
            }
        })
        .sum();
    Ok(total.clamp(0.0, 1.0))
}

pub(crate) fn prepare_theta0(p: &QuantumProtocol) -> Result<PureState> {
    let layout = RegisterLayout::new(p.registers().map(|r| (r.label.clone(), r.width)))?;
    let order: Vec<String> = layout.labels().map(str::to_string).collect();
    let mut state = match &p.initial().amplitudes {
        None => PureState::basis(layout.clone(), 0)?,
        Some(a) => {
            let regs: Vec<(String, usize)> = a
                .registers
                .iter()
                .map(|r| Ok((r.clone(), layout.width(r)?)))
                .collect::<Result<_>>()?;
            let given = PureState::new(RegisterLayout::new(regs)?, a.values.clone())?;
            let rest: Vec<(String, usize)> = p
                .registers()
                .filter(|r| !a.registers.contains(&r.label))
                .map(|r| (r.label.clone(), r.width))
                .collect();
            let zeros = PureState::basis(RegisterLayout::new(rest)?, 0)?;
            given.tensor(&zeros)?.reorder(&order)?
        }
    };
    let (layout, mut amps) = state.into_parts();
    for op in &p.initial().ops {
        apply_op(&mut amps, &layout, op)?;
    }
    state = PureState::new(layout, amps)?;
    Ok(state)
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_SIMULATED_QUBITS {
        return Err(Error::CapExceeded(format!(
            "simulating {n} qubits (cap {MAX_SIMULATED_QUBITS})"
        )));
    }
    Ok(())
}

/// State of the protocol after a round, before the message is delivered.
#[derive(Debug, Clone)]
pub struct RoundState {
    /// 0 for the initial state.
    pub round: usize,
    pub state: PureState,
    /// Holdings of each party with the message in transit removed.
    pub holdings: Holdings,
    /// Registers in transit; empty for round 0.
    pub message: Vec<String>,
    /// Sender of this round; `None` for round 0.
    pub sender: Option<Party>,
}

impl RoundState {
    /// Memory of the receiver before absorbing the message.
    pub fn receiver_registers(&self) -> &[String] {
        match self.sender {
            Some(s) => self.holdings.of(s.other()),
            None => &[],
        }
    }

    /// Receiver memory together with the message.
    pub fn receiver_view(&self) -> Vec<String> {
        let mut v = self.receiver_registers().to_vec();
        v.extend(self.message.iter().cloned());
        v
    }
}

#[derive(Debug, Clone)]
pub struct RoundTrace {
    pub states: Vec<RoundState>,
}

impl RoundTrace {
    pub fn num_rounds(&self) -> usize {
        self.states.len() - 1
    }

    pub fn round(&self, r: usize) -> &RoundState {
        &self.states[r]
    }

    pub fn final_state(&self) -> &PureState {
        &self.states.last().expect("round 0 present").state
    }
}

fn execute(p: &QuantumProtocol, input: PureState, record: bool) -> Result<RoundTrace> {
    let global = input.tensor(p.theta0())?;
    check_size(global.layout().total_width())?;
    let (layout, mut amps) = global.into_parts();
    let mut hold = p.initial_holdings();
    let mut states = Vec::new();
    if record {
        states.push(RoundState {
            round: 0,
            state: PureState::from_parts_unchecked(layout.clone(), amps.clone()),
            holdings: hold.clone(),
            message: Vec::new(),
            sender: None,
        });
    }
    for (i, round) in p.rounds().iter().enumerate() {
        for op in &round.ops {
            apply_op(&mut amps, &layout, op)?;
        }
        let sender = Party::of_round(i);
        let mut in_transit = hold.clone();
        match sender {
            Party::Alice => in_transit.alice.retain(|r| !round.message.contains(r)),
            Party::Bob => in_transit.bob.retain(|r| !round.message.contains(r)),
        }
        if record || i + 1 == p.num_rounds() {
            states.push(RoundState {
                round: i + 1,
                state: PureState::from_parts_unchecked(layout.clone(), amps.clone()),
                holdings: in_transit.clone(),
                message: round.message.clone(),
                sender: Some(sender),
            });
        }
        hold = in_transit;
        match sender {
            Party::Alice => hold.bob.extend(round.message.iter().cloned()),
            Party::Bob => hold.alice.extend(round.message.iter().cloned()),
        }
    }
    if states.is_empty() {
        states.push(RoundState {
            round: 0,
            state: PureState::from_parts_unchecked(layout, amps),
            holdings: hold,
            message: Vec::new(),
            sender: None,
        });
    }
    Ok(RoundTrace { states })
}

fn mu_input(p: &QuantumProtocol, mu: &InputDistribution) -> Result<PureState> {
    let (xb, yb) = (p.x_bits(), p.y_bits());
    if mu.x_size() != 1 << xb || mu.y_size() != 1 << yb {
        return Err(Error::DomainMismatch(format!(
            "protocol inputs {xb}+{yb} bits, distribution {}x{}",
            mu.x_size(),
            mu.y_size()
        )));
    }
    let layout = RegisterLayout::new([("X", xb), ("RX", xb), ("Y", yb), ("RY", yb)])?;
    let mut amps = vec![ZERO; layout.dim()];
    for (x, y, q) in mu.support() {
        let (x, y) = (x as usize, y as usize);
        let idx = (((x << xb) | x) << (2 * yb)) | (y << yb) | y;
        amps[idx] = Complex64::new(q.sqrt(), 0.0);
    }
    PureState::normalized(layout, amps)
}

fn point_input(p: &QuantumProtocol, x: u64, y: u64) -> Result<PureState> {
    if x >> p.x_bits() != 0 || y >> p.y_bits() != 0 {
        return Err(Error::DomainMismatch(format!("input ({x}, {y})")));
    }
    let layout = RegisterLayout::new([("X", p.x_bits()), ("Y", p.y_bits())])?;
    PureState::basis(layout, ((x << p.y_bits()) | y) as usize)
}

fn channel_input(p: &QuantumProtocol, sigma: &DensityMatrix) -> Result<PureState> {
    let expected = RegisterLayout::new([("X", p.x_bits()), ("Y", p.y_bits())])?;
    if sigma.layout() != &expected {
        return Err(Error::LayoutMismatch(
            "channel input must be a state on [X, Y]".into(),
        ));
    }
    let w = p.x_bits() + p.y_bits();
    let layout = RegisterLayout::new([("X", p.x_bits()), ("Y", p.y_bits()), ("P", w)])?;
    let (vals, vecs) = hermitian_eigen(sigma.matrix());
    let mut amps = vec![ZERO; layout.dim()];
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let s = lam.sqrt();
        for i in 0..1usize << w {
            amps[(i << w) | k] = vecs[(i, k)] * s;
        }
    }
    PureState::normalized(layout, amps)
}

/// Runs on inputs drawn from `mu`, recording `Ψ_0 .. Ψ_t` over `[X, RX, Y, RY, regs..]`.
pub fn run_rounds(p: &QuantumProtocol, mu: &InputDistribution) -> Result<RoundTrace> {
    execute(p, mu_input(p, mu)?, true)
}

/// Runs on fixed inputs, recording every round over `[X, Y, regs..]`.
pub fn run_trace_on_input(p: &QuantumProtocol, x: u64, y: u64) -> Result<RoundTrace> {
    execute(p, point_input(p, x, y)?, true)
}

/// Final state on fixed inputs over `[X, Y, regs..]`.
pub fn run_on_input(p: &QuantumProtocol, x: u64, y: u64) -> Result<PureState> {
    let t = execute(p, point_input(p, x, y)?, false)?;
    Ok(t.states.into_iter().last().expect("final state").state)
}

/// Final state on the input state `sigma` over `[X, Y]`, purified by `P`:
/// the returned state lives on `[X, Y, P, regs..]`.
pub fn run_channel(p: &QuantumProtocol, sigma: &DensityMatrix) -> Result<PureState> {
    let t = execute(p, channel_input(p, sigma)?, false)?;
    Ok(t.states.into_iter().last().expect("final state").state)
}

/// Registers held by the output party at the end, input excluded.
pub fn output_registers(p: &QuantumProtocol) -> Vec<String> {
    p.holdings_after(p.num_rounds())
        .of(p.output_party())
        .to_vec()
}

/// Reduced state of the output party's registers on fixed inputs.
pub fn final_output_state(p: &QuantumProtocol, x: u64, y: u64) -> Result<DensityMatrix> {
    let state = run_on_input(p, x, y)?;
    partial_trace(&state, &output_registers(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::layout::RegisterLayout;
    use crate::qkernel::QuantumState;

    fn bell_layout() -> RegisterLayout {
        RegisterLayout::new([("A", 1), ("B", 1)]).unwrap()
    }

    #[test]
    fn hadamard_then_cnot_gives_bell_pair() {
        let layout = bell_layout();
        let mut amps = PureState::basis(layout.clone(), 0).unwrap().into_parts().1;
        apply_op(&mut amps, &layout, &Op::h(QubitRef::new("A", 0))).unwrap();
        apply_op(
            &mut amps,
            &layout,
            &Op::cnot(QubitRef::new("A", 0), QubitRef::new("B", 0)).unwrap(),
        )
        .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((amps[0].re - s).abs() < 1e-15 && (amps[3].re - s).abs() < 1e-15);
        assert!(amps[1].norm() < 1e-15 && amps[2].norm() < 1e-15);
    }

    #[test]
    fn parallel_and_serial_paths_agree() {
        let labels: Vec<(String, usize)> = (0..16).map(|i| (format!("q{i}"), 1)).collect();
        let layout = RegisterLayout::new(labels).unwrap();
        let mut rng = crate::random::rng(3, 0);
        let psi = crate::random::random_pure_state(layout.clone(), &mut rng);
        let u = crate::random::haar_unitary(4, &mut rng);
        let op = Op::new(
            vec![QubitRef::new("q0", 0)],
            vec![QubitRef::new("q9", 0), QubitRef::new("q3", 0)],
            vec![1, 0],
            vec![Block::Identity, Block::Dense(u)],
        )
        .unwrap();
        let mut a = psi.amplitudes().to_vec();
        apply_op(&mut a, &layout, &op).unwrap();
        // Reference: explicit matrix on the two targets for control value 0.
        let n = 16;
        let (c, t1, t2) = (0usize, 9usize, 3usize);
        let dense = match &op.blocks()[1] {
            Block::Dense(u) => u.clone(),
            _ => unreachable!(),
        };
        let mut b = psi.amplitudes().to_vec();
        for g in 0..b.len() {
            if (g >> (n - 1 - c)) & 1 == 1
                || (g >> (n - 1 - t1)) & 1 == 1
                || (g >> (n - 1 - t2)) & 1 == 1
            {
                continue;
            }
            let idx = |j: usize| g | (((j >> 1) & 1) << (n - 1 - t1)) | ((j & 1) << (n - 1 - t2));
            let v: Vec<Complex64> = (0..4).map(|j| psi.amplitudes()[idx(j)]).collect();
            for j in 0..4 {
                b[idx(j)] = (0..4).map(|l| dense[(j, l)] * v[l]).sum();
            }
        }
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
        let st = PureState::new(layout, a).unwrap();
        assert!(st.reduced_on_qubits(&[0]).trace().re > 0.999);
    }
}
