use rayon::prelude::*;

use super::ClassicalProtocol;
use crate::error::{Error, Result};
use crate::functions::BooleanFunction;
use crate::inputs::InputDistribution;
use crate::qkernel::classical::{ClassicalDistribution, JointTable};
use crate::qkernel::linalg::neumaier_sum;

/// Largest joint support `|supp μ| · |R| · |R_A| · |R_B|` that is enumerated.
pub const ENUMERATION_CAP: u64 = 1 << 24;

/// Exact joint distribution of inputs, randomness, transcript and output.
///
/// Variables: `X`, `Y`, `R`, `RA`, `RB`, `T` (transcript) and `O` (output bit).
#[derive(Debug, Clone)]
pub struct TranscriptTable {
    table: JointTable,
}

impl TranscriptTable {
    pub fn table(&self) -> &JointTable {
        &self.table
    }

    /// `I(X:T|Y R R_B) + I(Y:T|X R R_A)`.
    pub fn information_cost(&self) -> Result<f64> {
        let t = &self.table;
        Ok(
            t.conditional_mutual_information(&["X"], &["T"], &["Y", "R", "RB"])?
                + t.conditional_mutual_information(&["Y"], &["T"], &["X", "R", "RA"])?,
        )
    }
}

fn check_domain(p: &ClassicalProtocol, x_size: u64, y_size: u64) -> Result<()> {
    if p.x_size() != x_size || p.y_size() != y_size {
        return Err(Error::DomainMismatch(format!(
            "protocol inputs {}x{}, got {x_size}x{y_size}",
            p.x_size(),
            p.y_size()
        )));
    }
    Ok(())
}

fn randomness_cells(p: &ClassicalProtocol) -> Vec<(u64, u64, u64, f64)> {
    let mut cells = Vec::new();
    for r in 0..p.public().size() {
        for ra in 0..p.alice_private().size() {
            for rb in 0..p.bob_private().size() {
                let w = p.public().prob(r) * p.alice_private().prob(ra) * p.bob_private().prob(rb);
                if w > 0.0 {
                    cells.push((r, ra, rb, w));
                }
            }
        }
    }
    cells
}

/// Exact joint distribution of a protocol run on inputs drawn from `mu`.
pub fn enumerate_joint(p: &ClassicalProtocol, mu: &InputDistribution) -> Result<TranscriptTable> {
    check_domain(p, mu.x_size(), mu.y_size())?;
    let cells = randomness_cells(p);
    let inputs: Vec<(u64, u64, f64)> = mu.support().collect();
    let size = (inputs.len() as u64).saturating_mul(cells.len() as u64);
    if size > ENUMERATION_CAP {
        return Err(Error::CapExceeded(format!(
            "joint support {size} exceeds {ENUMERATION_CAP}"
        )));
    }
    let vars = [
        ("X", JointTable::bits_for(p.x_size())),
        ("Y", JointTable::bits_for(p.y_size())),
        ("R", JointTable::bits_for(p.public().size())),
        ("RA", JointTable::bits_for(p.alice_private().size())),
        ("RB", JointTable::bits_for(p.bob_private().size())),
        ("T", p.cc() as u32),
        ("O", 1),
    ];
    let parts: Vec<JointTable> = inputs
        .par_iter()
        .map(|&(x, y, q)| {
            let mut part = JointTable::new(vars)?;
            part.reserve(cells.len());
            for &(r, ra, rb, w) in &cells {
                let t = p.transcript(x, y, r, ra, rb)?;
                part.push(&[x, y, r, ra, rb, t, p.output(t) as u64], q * w)?;
            }
            Ok(part)
        })
        .collect::<Result<_>>()?;
    let mut table = JointTable::new(vars)?;
    table.reserve(size as usize);
    for part in parts {
        table.extend(part)?;
    }
    Ok(TranscriptTable { table })
}

/// `IC(Π, μ) = I(X:Π|Y R R_B) + I(Y:Π|X R R_A)`.
pub fn classical_ic(p: &ClassicalProtocol, mu: &InputDistribution) -> Result<f64> {
    enumerate_joint(p, mu)?.information_cost()
}

/// Distribution of the view `(R, transcript)` on fixed inputs, packed as
/// `r · 2^cc + transcript`. The output is a function of the transcript.
pub fn transcript_distribution(
    p: &ClassicalProtocol,
    x: u64,
    y: u64,
) -> Result<ClassicalDistribution> {
    if x >= p.x_size() || y >= p.y_size() {
        return Err(Error::DomainMismatch(format!("input ({x}, {y})")));
    }
    let cc = p.cc();
    let mut pairs = Vec::new();
    for (r, ra, rb, w) in randomness_cells(p) {
        let t = p.transcript(x, y, r, ra, rb)?;
        pairs.push(((r << cc) | t, w));
    }
    Ok(ClassicalDistribution::from_pairs_unchecked(pairs))
}

/// Probability of output 1 on `(x, y)`.
pub fn acceptance_probability(p: &ClassicalProtocol, x: u64, y: u64) -> Result<f64> {
    let mut terms = Vec::new();
    for (r, ra, rb, w) in randomness_cells(p) {
        if p.output(p.transcript(x, y, r, ra, rb)?) {
            terms.push(w);
        }
    }
    Ok(neumaier_sum(terms))
}

/// Largest error probability over all inputs.
pub fn worst_case_error(p: &ClassicalProtocol, f: &BooleanFunction) -> Result<f64> {
    check_domain(p, f.x_size(), f.y_size())?;
    let errs: Vec<f64> = (0..p.x_size())
        .into_par_iter()
        .map(|x| {
            let mut worst = 0.0f64;
            for y in 0..p.y_size() {
                let acc = acceptance_probability(p, x, y)?;
                let e = if f.evaluate(x, y)? { 1.0 - acc } else { acc };
                worst = worst.max(e);
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{
        alice_sends_input, both_send_inputs, constant_protocol, public_hash_eq,
    };
    use crate::functions::eq;
    use crate::qkernel::classical::classical_bures;

    #[test]
    fn constant_protocol_reveals_nothing() {
        let p = constant_protocol(4, 4, true);
        let mu = InputDistribution::uniform(4, 4);
        assert!(classical_ic(&p, &mu).unwrap().abs() < 1e-12);
        assert_eq!(p.cc(), 0);
        let t = enumerate_joint(&p, &mu).unwrap();
        let m = t.table().marginal(&["X", "Y"]).unwrap();
        for (k, q) in m.iter() {
            assert!((q - mu.prob(k >> 2, k & 3)).abs() < 1e-15);
        }
    }

    #[test]
    fn alice_sends_one_bit() {
        let p = alice_sends_input(1, 2, |x| x == 1).unwrap();
        let mu = InputDistribution::uniform(2, 2);
        assert!((classical_ic(&p, &mu).unwrap() - 1.0).abs() < 1e-12);
        let t = enumerate_joint(&p, &mu).unwrap();
        let m = t.table().marginal(&["T"]).unwrap();
        assert!((m.prob(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn both_send_one_bit_each() {
        let p = both_send_inputs(1, 1, |x, y| x == y).unwrap();
        let mu = InputDistribution::uniform(2, 2);
        assert!((classical_ic(&p, &mu).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(worst_case_error(&p, &eq(1).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn single_hash_errs_half() {
        let p = public_hash_eq(2, 1).unwrap();
        let e = worst_case_error(&p, &eq(2).unwrap()).unwrap();
        assert!((e - 0.5).abs() < 1e-12);
        let p2 = public_hash_eq(2, 2).unwrap();
        let e2 = worst_case_error(&p2, &eq(2).unwrap()).unwrap();
        assert!((e2 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn coin_flip_errs_half() {
        let p = ClassicalProtocol::new(
            2,
            2,
            crate::classical::Randomness::uniform(2),
            crate::classical::Randomness::none(),
            crate::classical::Randomness::none(),
            vec![crate::classical::Round {
                width: 1,
                message: crate::classical::MessageFn::Func(std::sync::Arc::new(|a| a.public)),
            }],
            crate::classical::OutputFn::Table(vec![false, true]),
        )
        .unwrap();
        assert!((worst_case_error(&p, &eq(1).unwrap()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cut_and_paste_on_hash_protocol() {
        let p = public_hash_eq(2, 1).unwrap();
        let d = |x, y| transcript_distribution(&p, x, y).unwrap();
        let lhs = classical_bures(&d(0, 1), &d(2, 3));
        let rhs = classical_bures(&d(0, 3), &d(2, 1));
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn domain_mismatch() {
        let p = constant_protocol(2, 2, false);
        assert!(matches!(
            classical_ic(&p, &InputDistribution::uniform(4, 2)),
            Err(Error::DomainMismatch(_))
        ));
        assert!(worst_case_error(&p, &eq(2).unwrap()).is_err());
    }
}
