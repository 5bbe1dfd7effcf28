//! Information and communication costs of quantum protocols.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sim::{expectation, run_on_input, run_rounds, RoundTrace};
use super::QuantumProtocol;
use crate::classical::Party;
use crate::error::{Error, Result};
use crate::functions::BooleanFunction;
use crate::inputs::InputDistribution;
use crate::qkernel::{InfoCalculator, Tolerances};

/// Per-round terms and totals of QIC, HQIC and SQIC on one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCosts {
    pub qic: f64,
    pub hqic: f64,
    /// `None` unless the distribution is a product.
    pub sqic: Option<f64>,
    pub qcc: usize,
    pub qic_terms: Vec<f64>,
    pub hqic_terms: Vec<f64>,
    pub sqic_terms: Vec<f64>,
}

fn names(sender: Party) -> (&'static str, &'static str, &'static str, &'static str) {
    match sender {
        Party::Alice => ("X", "RX", "Y", "RY"),
        Party::Bob => ("Y", "RY", "X", "RX"),
    }
}

/// Evaluates every term on a recorded run.
pub fn costs_from_trace(
    p: &QuantumProtocol,
    trace: &RoundTrace,
    product: bool,
) -> Result<QuantumCosts> {
    let mut qic_terms = Vec::new();
    let mut hqic_terms = Vec::new();
    let mut sqic_terms = Vec::new();
    for rs in &trace.states[1..] {
        let sender = rs.sender.expect("rounds have senders");
        let (in_s, _, in_r, r_r) = names(sender);
        let calc = InfoCalculator::new(&rs.state);
        let recv: Vec<&str> = rs.receiver_registers().iter().map(String::as_str).collect();
        let msg: Vec<&str> = rs.message.iter().map(String::as_str).collect();
        let mut cond = vec![in_r];
        cond.extend(&recv);
        let mut view = recv.clone();
        view.extend(&msg);
        qic_terms.push(calc.conditional_mutual_information(&["RX", "RY"], &msg, &cond)?);
        hqic_terms.push(calc.conditional_mutual_information(&[in_s], &view, &[in_r])?);
        if product {
            let mut other = vec![in_r, r_r];
            other.extend(&view);
            sqic_terms.push(calc.mutual_information(&[in_s], &other)?);
        }
    }
    let sum = |v: &[f64]| crate::qkernel::linalg::neumaier_sum(v.iter().copied());
    Ok(QuantumCosts {
        qic: sum(&qic_terms),
        hqic: sum(&hqic_terms),
        sqic: product.then(|| sum(&sqic_terms)),
        qcc: qcc(p),
        qic_terms,
        hqic_terms,
        sqic_terms,
    })
}

/// All costs on `mu`; SQIC only when `mu` is a product distribution.
pub fn quantum_costs(p: &QuantumProtocol, mu: &InputDistribution) -> Result<QuantumCosts> {
    let trace = run_rounds(p, mu)?;
    costs_from_trace(p, &trace, mu.is_product(Tolerances::default().exact_tol))
}

/// `QIC(Π, μ) = Σ_odd I(R_X R_Y : C_i | Y B_i) + Σ_even I(R_X R_Y : C_i | X A_i)`.
pub fn qic(p: &QuantumProtocol, mu: &InputDistribution) -> Result<f64> {
    Ok(quantum_costs(p, mu)?.qic)
}

/// `HQIC(Π, μ) = Σ_odd I(X : B_i C_i | Y) + Σ_even I(Y : A_i C_i | X)`.
pub fn hqic(p: &QuantumProtocol, mu: &InputDistribution) -> Result<f64> {
    Ok(quantum_costs(p, mu)?.hqic)
}

/// `SQIC(Π, μ) = Σ_odd I(X : Y R_Y B_i C_i) + Σ_even I(Y : X R_X A_i C_i)` for product `μ`.
pub fn sqic(p: &QuantumProtocol, mu: &InputDistribution) -> Result<f64> {
    mu.require_product(Tolerances::default().exact_tol)?;
    let trace = run_rounds(p, mu)?;
    Ok(costs_from_trace(p, &trace, true)?.sqic.expect("product"))
}

/// Total number of qubits sent.
pub fn qcc(p: &QuantumProtocol) -> usize {
    (1..=p.num_rounds()).map(|r| p.message_width(r)).sum()
}

/// Probability that the final measurement accepts on `(x, y)`.
pub fn acceptance_probability(p: &QuantumProtocol, x: u64, y: u64) -> Result<f64> {
    expectation(&run_on_input(p, x, y)?, p.measurement())
}

/// Largest error probability over all inputs.
pub fn quantum_worst_case_error(p: &QuantumProtocol, f: &BooleanFunction) -> Result<f64> {
    if f.x_bits() != p.x_bits() || f.y_bits() != p.y_bits() {
        return Err(Error::DomainMismatch(format!(
            "protocol inputs {}+{} bits, function {}",
            p.x_bits(),
            p.y_bits(),
            f.name()
        )));
    }
    let pairs: Vec<(u64, u64)> = (0..f.x_size())
        .flat_map(|x| (0..f.y_size()).map(move |y| (x, y)))
        .collect();
    let errs: Vec<f64> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let acc = acceptance_probability(p, x, y)?;
            Ok(if f.evaluate(x, y)? { 1.0 - acc } else { acc })
        })
        .collect::<Result<_>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}
