use qicost::classical::{transcript_distribution, ClassicalProtocol, Party};
use qicost::qkernel::{
    bures, classical_bures, classical_bures_sq, partial_trace, trace_distance, DensityMatrix,
    InfoCalculator,
};
use qicost::quantum::{
    acceptance_probability, final_output_state, quantum_costs, random_protocol, run_rounds,
    run_trace_on_input, QuantumProtocol, RoundTrace,
};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::gen::{random_classical_protocol, random_product, random_quantum_config};
use crate::report::SampleRecord;

fn classical_instance(rng: &mut ChaCha20Rng) -> Result<(ClassicalProtocol, [u64; 4])> {
    let (xs, ys) = (rng.random_range(2..=4), rng.random_range(2..=4));
    let p = random_classical_protocol(xs, ys, rng)?;
    let inputs = [
        rng.random_range(0..xs),
        rng.random_range(0..ys),
        rng.random_range(0..xs),
        rng.random_range(0..ys),
    ];
    Ok((p, inputs))
}

pub(super) fn cut_paste_classical(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let (p, [x, y, x2, y2]) = classical_instance(rng)?;
    let d = |a, b| transcript_distribution(&p, a, b);
    let lhs = classical_bures(&d(x, y)?, &d(x2, y2)?);
    let rhs = classical_bures(&d(x, y2)?, &d(x2, y)?);
    Ok(SampleRecord::eq(i, lhs, rhs))
}

pub(super) fn pythagorean(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let (p, [x, y, x2, y2]) = classical_instance(rng)?;
    let d = |a, b| transcript_distribution(&p, a, b);
    let (xy, x2y2, xy2, x2y) = (d(x, y)?, d(x2, y2)?, d(x, y2)?, d(x2, y)?);
    let rhs = 2.0 * classical_bures_sq(&x2y2, &xy);
    Ok(SampleRecord::worst([
        SampleRecord::le(
            i,
            classical_bures_sq(&xy2, &x2y2) + classical_bures_sq(&xy, &x2y),
            rhs,
        ),
        // Same statement with the parties' roles exchanged.
        SampleRecord::le(
            i,
            classical_bures_sq(&x2y, &x2y2) + classical_bures_sq(&xy, &xy2),
            rhs,
        ),
    ]))
}

fn random_quantum(config: &ExperimentConfig, rng: &mut ChaCha20Rng) -> Result<QuantumProtocol> {
    let cfg = random_quantum_config(config.rounds, config.k, rng);
    Ok(random_protocol(&cfg, rng)?)
}

fn distinct_pair(size: u64, rng: &mut ChaCha20Rng) -> (u64, u64) {
    let a = rng.random_range(0..size);
    (a, (a + rng.random_range(1..size)) % size)
}

/// Reduced state of `party` right after message `r` is delivered.
pub(crate) fn view(
    p: &QuantumProtocol,
    trace: &RoundTrace,
    r: usize,
    party: Party,
) -> Result<DensityMatrix> {
    Ok(partial_trace(
        &trace.round(r).state,
        p.holdings_after(r).of(party),
    )?)
}

pub(super) fn quantum_cut_paste(
    config: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let p = random_quantum(config, rng)?;
    let (u, u2) = distinct_pair(1 << p.x_bits(), rng);
    let (v, v2) = distinct_pair(1 << p.y_bits(), rng);
    let uv = run_trace_on_input(&p, u, v)?;
    let u2v = run_trace_on_input(&p, u2, v)?;
    let uv2 = run_trace_on_input(&p, u, v2)?;
    let u2v2 = run_trace_on_input(&p, u2, v2)?;
    let mut h = 0.0;
    let mut records = Vec::new();
    for r in 1..=p.num_rounds() {
        h += match Party::of_round(r - 1) {
            Party::Alice => bures(
                &view(&p, &uv, r, Party::Bob)?,
                &view(&p, &u2v, r, Party::Bob)?,
            )?,
            Party::Bob => bures(
                &view(&p, &uv, r, Party::Alice)?,
                &view(&p, &uv2, r, Party::Alice)?,
            )?,
        };
        let alice = bures(
            &view(&p, &u2v, r, Party::Alice)?,
            &view(&p, &u2v2, r, Party::Alice)?,
        )?;
        let bob = bures(
            &view(&p, &uv2, r, Party::Bob)?,
            &view(&p, &u2v2, r, Party::Bob)?,
        )?;
        records.push(SampleRecord::le(i, alice, 2.0 * h));
        records.push(SampleRecord::le(i, bob, 2.0 * h));
    }
    Ok(SampleRecord::worst(records))
}

pub(super) fn err_dist(
    config: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let p = random_quantum(config, rng)?;
    let (xs, ys) = (1u64 << p.x_bits(), 1u64 << p.y_bits());
    let acc: Vec<Vec<f64>> = (0..xs)
        .map(|x| (0..ys).map(|y| acceptance_probability(&p, x, y)).collect())
        .collect::<qicost::Result<_>>()?;
    let alice_outputs = p.output_party() == Party::Alice;
    // (fixed input of the output party, varying input of the other) -> (x, y)
    let at = |own: u64, other: u64| {
        if alice_outputs {
            (own, other)
        } else {
            (other, own)
        }
    };
    let (own_size, other_size) = if alice_outputs { (xs, ys) } else { (ys, xs) };
    // The function thresholds acceptance at the midpoint of the widest gap,
    // so that it is non-constant along the varying input.
    let mut best = (0u64, 0u64, 1u64, -1.0f64);
    for own in 0..own_size {
        for a in 0..other_size {
            for b in 0..other_size {
                let (xa, ya) = at(own, a);
                let (xb, yb) = at(own, b);
                let gap = acc[xa as usize][ya as usize] - acc[xb as usize][yb as usize];
                if gap > best.3 {
                    best = (own, a, b, gap);
                }
            }
        }
    }
    let (o, a, b, _) = best;
    let thr = {
        let (xa, ya) = at(o, a);
        let (xb, yb) = at(o, b);
        0.5 * (acc[xa as usize][ya as usize] + acc[xb as usize][yb as usize])
    };
    let f = |x: u64, y: u64| acc[x as usize][y as usize] > thr;
    let err = (0..xs)
        .flat_map(|x| (0..ys).map(move |y| (x, y)))
        .map(|(x, y)| {
            let q = acc[x as usize][y as usize];
            if f(x, y) {
                1.0 - q
            } else {
                q
            }
        })
        .fold(0.0, f64::max);
    let finals: Vec<Vec<DensityMatrix>> = (0..xs)
        .map(|x| (0..ys).map(|y| final_output_state(&p, x, y)).collect())
        .collect::<qicost::Result<_>>()?;
    let mut records = Vec::new();
    for own in 0..own_size {
        for a in 0..other_size {
            for b in a + 1..other_size {
                let (xa, ya) = at(own, a);
                let (xb, yb) = at(own, b);
                if f(xa, ya) != f(xb, yb) {
                    let d = trace_distance(
                        &finals[xa as usize][ya as usize],
                        &finals[xb as usize][yb as usize],
                    )?;
                    records.push(SampleRecord::le(i, 1.0 - 2.0 * err, d));
                }
            }
        }
    }
    Ok(SampleRecord::worst(records))
}

pub(super) fn qic_chain(
    config: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let p = random_quantum(config, rng)?;
    let mu = random_product(p.x_bits(), p.y_bits(), rng)?;
    let c = quantum_costs(&p, &mu)?;
    let t = p.num_rounds() as f64;
    let sqic = c.sqic.expect("product distribution");
    Ok(SampleRecord::worst([
        SampleRecord::le(i, c.qic, 2.0 * c.qcc as f64),
        SampleRecord::le(i, sqic / t, c.qic),
        SampleRecord::le(i, c.hqic / t, sqic / t),
        SampleRecord::le(i, c.qic / (2.0 * t), c.hqic / t),
    ]))
}

pub(super) fn product_mi(
    config: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let p = random_quantum(config, rng)?;
    let mu = random_product(p.x_bits(), p.y_bits(), rng)?;
    let trace = run_rounds(&p, &mu)?;
    let mut records = Vec::new();
    for rs in &trace.states[1..] {
        let (in_s, in_r, r_r) = match rs.sender.expect("sent round") {
            Party::Alice => ("X", "Y", "RY"),
            Party::Bob => ("Y", "X", "RX"),
        };
        let view = rs.receiver_view();
        let mut with_input: Vec<&str> = vec![in_r];
        with_input.extend(view.iter().map(String::as_str));
        let mut with_purif = with_input.clone();
        with_purif.push(r_r);
        let view: Vec<&str> = view.iter().map(String::as_str).collect();
        let c = InfoCalculator::new(&rs.state);
        let cond = c.conditional_mutual_information(&[in_s], &view, &[in_r])?;
        let joint = c.mutual_information(&[in_s], &with_input)?;
        let purified = c.mutual_information(&[in_s], &with_purif)?;
        records.push(SampleRecord::eq(i, cond, joint));
        records.push(SampleRecord::le(i, joint, purified));
    }
    Ok(SampleRecord::worst(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qicost::random::rng;

    #[test]
    fn quantum_cut_paste_holds_on_a_few_protocols() {
        let c = ExperimentConfig::default();
        for s in 0..10 {
            let r = quantum_cut_paste(&c, s, &mut rng(11, s as u64)).unwrap();
            assert!(r.violation <= 1e-7, "{r:?}");
        }
    }

    #[test]
    fn classical_cut_and_paste_is_an_identity() {
        let c = ExperimentConfig::default();
        for s in 0..50 {
            let r = cut_paste_classical(&c, s, &mut rng(12, s as u64)).unwrap();
            assert!(r.violation <= 1e-12, "{r:?}");
        }
    }
}
