//! Numerical replays of the two Equality lower-bound arguments and of the
//! main chain for Sink∘Xor. Every step is evaluated on the given protocol
//! and reported with both sides of its inequality.

use std::collections::BTreeMap;
use std::sync::Arc;

use qicost::classical::{
    both_send_inputs, enumerate_joint, public_hash_eq, transcript_distribution, worst_case_error,
    ClassicalProtocol, MessageArgs, MessageFn, OutputFn, Party, Randomness, Round,
};
use qicost::embeddings::{quantum_embed_averaged, sink_embedding_spec};
use qicost::functions::{eq, num_edges, sink_xor};
use qicost::qkernel::{
    bures, classical_bures_sq, classical_trace_distance, trace_distance, ClassicalDistribution,
    DensityMatrix, Tolerances,
};
use qicost::quantum::{
    quantum_costs, quantum_worst_case_error, run_trace_on_input, QuantumProtocol, RoundTrace,
};
use qicost::InputDistribution;
use serde::Serialize;

use crate::checks::protocols::view;
use crate::error::{HarnessError, Result};

/// One link `lhs ≤ rhs` of a replayed chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub name: String,
    /// The cost the chain bounds from below.
    pub measured: f64,
    pub floor: f64,
    /// Inputs and shifts exhibited by the existence steps.
    pub witness: BTreeMap<String, u64>,
    pub steps: Vec<ChainStep>,
    pub pass: bool,
}

impl ReplayReport {
    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self
            .steps
            .iter()
            .filter(|s| !s.holds)
            .map(|s| s.name.as_str())
            .collect();
        let status = if self.pass { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{status} {}: measured {:.6} vs floor {:.3e}, {} steps",
            self.name,
            self.measured,
            self.floor,
            self.steps.len()
        );
        if !failed.is_empty() {
            line.push_str(&format!(", failing: {}", failed.join(", ")));
        }
        line
    }
}

struct Steps {
    slack: f64,
    steps: Vec<ChainStep>,
}

impl Steps {
    fn new(tol: &Tolerances) -> Self {
        Self {
            slack: tol.check_slack,
            steps: Vec::new(),
        }
    }

    fn le(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.steps.push(ChainStep {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs <= rhs + self.slack,
        });
    }

    fn eq(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.steps.push(ChainStep {
            name: name.into(),
            lhs,
            rhs,
            holds: (lhs - rhs).abs() <= self.slack,
        });
    }

    fn finish(
        self,
        name: &str,
        measured: f64,
        floor: f64,
        witness: BTreeMap<String, u64>,
    ) -> ReplayReport {
        let pass = self.steps.iter().all(|s| s.holds);
        ReplayReport {
            name: name.into(),
            measured,
            floor,
            witness,
            steps: self.steps,
            pass,
        }
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    s / n as f64
}

/// Uniform mixture of distributions.
fn mixture<'a>(
    ds: impl IntoIterator<Item = &'a ClassicalDistribution>,
) -> Result<ClassicalDistribution> {
    let ds: Vec<_> = ds.into_iter().collect();
    let w = 1.0 / ds.len() as f64;
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for d in &ds {
        for (k, p) in d.iter() {
            *acc.entry(k).or_insert(0.0) += w * p;
        }
    }
    Ok(ClassicalDistribution::from_pairs(acc)?)
}

fn eq_bits(x_size: u64, y_size: u64) -> Result<usize> {
    if x_size != y_size || !x_size.is_power_of_two() {
        return Err(HarnessError::Precondition(format!(
            "Equality needs equal power-of-two domains, got {x_size}x{y_size}"
        )));
    }
    Ok(x_size.trailing_zeros() as usize)
}

/// Replays the cut-and-paste lower bound `IC(Π, ν) ≥ 1/432` for an Equality
/// protocol on uniform inputs. Needs `k ≥ 2` so that a shift `t ≠ 0` with
/// `E_x B²(Π^{x,x⊕t}, Π) ≤ 3 IC` is guaranteed.
pub fn derive_eq_ic_floor(p: &ClassicalProtocol, tol: &Tolerances) -> Result<ReplayReport> {
    let k = eq_bits(p.x_size(), p.y_size())?;
    if k < 2 {
        return Err(HarnessError::Precondition(
            "the shift step needs k >= 2".into(),
        ));
    }
    let err = worst_case_error(p, &eq(k)?)?;
    if err > 1.0 / 3.0 {
        return Err(HarnessError::Precondition(format!(
            "worst-case error {err} exceeds 1/3"
        )));
    }
    let size = 1u64 << k;
    let nu = InputDistribution::uniform(size, size);
    let joint = enumerate_joint(p, &nu)?;
    let table = joint.table();
    let i_alice = table.conditional_mutual_information(&["X"], &["T"], &["Y", "R", "RB"])?;
    let i_bob = table.conditional_mutual_information(&["Y"], &["T"], &["X", "R", "RA"])?;
    let ic = i_alice + i_bob;

    // Views (R, transcript) on every input pair and their averages.
    let views: Vec<Vec<ClassicalDistribution>> = (0..size)
        .map(|x| {
            (0..size)
                .map(|y| transcript_distribution(p, x, y))
                .collect()
        })
        .collect::<qicost::Result<_>>()?;
    let v = |x: u64, y: u64| &views[x as usize][y as usize];
    let given_y: Vec<ClassicalDistribution> = (0..size)
        .map(|y| mixture((0..size).map(|x| v(x, y))))
        .collect::<Result<_>>()?;
    let all = mixture(views.iter().flatten())?;
    let pairs = || (0..size).flat_map(|x| (0..size).map(move |y| (x, y)));

    let mut s = Steps::new(tol);
    let enc_a = mean(pairs().map(|(x, y)| classical_bures_sq(v(x, y), &given_y[y as usize])));
    let enc_b = mean((0..size).map(|y| classical_bures_sq(&given_y[y as usize], &all)));
    s.le("average encoding, Alice's input", enc_a, i_alice);
    s.le("average encoding, Bob's input", enc_b, i_bob);

    let to_all = mean(pairs().map(|(x, y)| classical_bures_sq(v(x, y), &all)));
    s.le("weak triangle", to_all, 2.0 * (enc_a + enc_b));
    s.le("weak triangle vs IC", 2.0 * (enc_a + enc_b), 2.0 * ic);

    let by_shift: Vec<f64> = (0..size)
        .map(|t| mean((0..size).map(|x| classical_bures_sq(v(x, x ^ t), &all))))
        .collect();
    s.eq(
        "shift decomposition",
        mean(by_shift.iter().copied()),
        to_all,
    );
    let (t, g) =
        (1..size)
            .map(|t| (t, by_shift[t as usize]))
            .fold(
                (0, f64::INFINITY),
                |best, c| if c.1 < best.1 { c } else { best },
            );
    s.le("shift t != 0 via Markov", g, 3.0 * ic);

    let relabeled = mean((0..size).map(|x| classical_bures_sq(v(x ^ t, x), &all)));
    s.eq("relabeling x -> x xor t", relabeled, g);

    let swapped: Vec<f64> = (0..size)
        .map(|x| classical_bures_sq(v(x ^ t, x), v(x, x ^ t)))
        .collect();
    let swapped_mean = mean(swapped.iter().copied());
    s.le(
        "weak triangle through Π",
        swapped_mean,
        2.0 * (relabeled + g),
    );
    s.le("swapped inputs vs IC", swapped_mean, 12.0 * ic);

    let diag: Vec<f64> = (0..size)
        .map(|x| classical_bures_sq(v(x, x), v(x, x ^ t)))
        .collect();
    for x in 0..size as usize {
        s.le(&format!("pythagorean at x={x}"), diag[x], 2.0 * swapped[x]);
    }
    let diag_mean = mean(diag.iter().copied());
    s.le("pythagorean vs IC", diag_mean, 24.0 * ic);

    let x = (0..size)
        .min_by(|&a, &b| diag[a as usize].total_cmp(&diag[b as usize]))
        .expect("nonempty");
    let b2 = diag[x as usize];
    s.le("choice of x", b2, diag_mean);
    let delta = classical_trace_distance(v(x, x), v(x, x ^ t));
    s.le("B² ≥ Δ²/2", delta * delta / 2.0, b2);
    s.le("Δ ≥ 1 - 2 err", 1.0 - 2.0 * err, delta);
    s.le(
        "(1 - 2 err)²/2 ≥ 1/18",
        1.0 / 18.0,
        (1.0 - 2.0 * err).powi(2) / 2.0,
    );
    s.le("IC ≥ 1/432", 1.0 / 432.0, ic);
    for (name, value, factor) in [
        ("IC bounds average encoding", enc_a + enc_b, 1.0),
        ("IC bounds weak triangle", to_all, 2.0),
        ("IC bounds shift", g, 3.0),
        ("IC bounds swapped inputs", swapped_mean, 12.0),
        ("IC bounds diagonal", b2, 24.0),
    ] {
        s.le(name, value / factor, ic);
    }
    let witness = BTreeMap::from([("t".to_string(), t), ("x".to_string(), x)]);
    Ok(s.finish("eq_ic_floor", ic, 1.0 / 432.0, witness))
}

/// The Equality protocols the floor is replayed on: Alice sends `x` and Bob
/// announces the answer, both parties send their inputs, and two public
/// inner-product hashes (error 1/4).
pub fn eq_protocol_suite(k: usize) -> Result<Vec<(&'static str, ClassicalProtocol)>> {
    let send = ClassicalProtocol::new(
        1 << k,
        1 << k,
        Randomness::none(),
        Randomness::none(),
        Randomness::none(),
        vec![
            Round {
                width: k,
                message: MessageFn::Func(Arc::new(|a: MessageArgs| a.input)),
            },
            Round {
                width: 1,
                message: MessageFn::Func(Arc::new(|a: MessageArgs| (a.prefix == a.input) as u64)),
            },
        ],
        OutputFn::Func(Arc::new(|t| t & 1 == 1)),
    )?;
    Ok(vec![
        ("alice_sends_input", send),
        ("both_send_inputs", both_send_inputs(k, k, |x, y| x == y)?),
        ("public_hash_eq", public_hash_eq(k, 2)?),
    ])
}

/// Bures terms `b_r(x, y)` of the averaged-encoding bound: the receiver's
/// view on `(x, y)` against its average over the sender's input.
struct QuantumViews {
    t: usize,
    size: u64,
    /// `[x][y][r-1]`: receiver's view after round `r`.
    recv: Vec<Vec<Vec<DensityMatrix>>>,
    traces: Vec<Vec<RoundTrace>>,
}

impl QuantumViews {
    fn new(p: &QuantumProtocol, size: u64) -> Result<Self> {
        let t = p.num_rounds();
        let traces: Vec<Vec<RoundTrace>> = (0..size)
            .map(|x| (0..size).map(|y| run_trace_on_input(p, x, y)).collect())
            .collect::<qicost::Result<_>>()?;
        let mut recv = Vec::new();
        for row in &traces {
            let mut r_row = Vec::new();
            for tr in row {
                let vs = (1..=t)
                    .map(|r| view(p, tr, r, Party::of_round(r - 1).other()))
                    .collect::<Result<Vec<_>>>()?;
                r_row.push(vs);
            }
            recv.push(r_row);
        }
        Ok(Self {
            t,
            size,
            recv,
            traces,
        })
    }

    fn get(&self, x: u64, y: u64, r: usize) -> &DensityMatrix {
        &self.recv[x as usize][y as usize][r - 1]
    }

    /// `b_r(x, y)` for every pair and round.
    fn encoding_terms(&self) -> Result<Vec<Vec<Vec<f64>>>> {
        let n = self.size;
        let mut avg = Vec::new();
        for r in 1..=self.t {
            let alice_sent = Party::of_round(r - 1) == Party::Alice;
            // Average over the sender's input for every value of the receiver's.
            let per_own: Vec<DensityMatrix> = (0..n)
                .map(|own| {
                    let states: Vec<&DensityMatrix> = (0..n)
                        .map(|other| {
                            if alice_sent {
                                self.get(other, own, r)
                            } else {
                                self.get(own, other, r)
                            }
                        })
                        .collect();
                    let m = states
                        .iter()
                        .map(|s| s.matrix().clone())
                        .reduce(|a, b| a + b)
                        .expect("nonempty")
                        / num_complex::Complex64::new(n as f64, 0.0);
                    Ok(DensityMatrix::new(states[0].layout().clone(), m)?)
                })
                .collect::<Result<_>>()?;
            avg.push(per_own);
        }
        let mut out = Vec::new();
        for x in 0..n {
            let mut row = Vec::new();
            for y in 0..n {
                let mut terms = Vec::new();
                for r in 1..=self.t {
                    let own = if Party::of_round(r - 1) == Party::Alice {
                        y
                    } else {
                        x
                    };
                    terms.push(bures(self.get(x, y, r), &avg[r - 1][own as usize])?);
                }
                row.push(terms);
            }
            out.push(row);
        }
        Ok(out)
    }
}

/// Replays the quantum cut-and-paste lower bound `HQIC(Π, μ^{⊗k}) ≥ 1/(40000 t)`
/// for an Equality protocol on uniform inputs. The final step compares the
/// output party's views, whichever party that is.
pub fn derive_eq_hqic_floor(p: &QuantumProtocol, tol: &Tolerances) -> Result<ReplayReport> {
    let k = eq_bits(1 << p.x_bits(), 1 << p.y_bits())?;
    let err = quantum_worst_case_error(p, &eq(k)?)?;
    if err > 1.0 / 3.0 {
        return Err(HarnessError::Precondition(format!(
            "worst-case error {err} exceeds 1/3"
        )));
    }
    let size = 1u64 << k;
    let t = p.num_rounds();
    let tf = t as f64;
    let mu = InputDistribution::uniform(size, size);
    let hqic = quantum_costs(p, &mu)?.hqic;
    let root = (tf * hqic).sqrt();
    let views = QuantumViews::new(p, size)?;
    let b = views.encoding_terms()?;
    let d = |x: u64, y: u64| b[x as usize][y as usize].iter().sum::<f64>();
    let pairs = || (0..size).flat_map(|x| (0..size).map(move |y| (x, y)));

    let mut s = Steps::new(tol);
    let sq =
        mean(pairs().map(|(x, y)| b[x as usize][y as usize].iter().map(|v| v * v).sum::<f64>()));
    s.le("average encoding per round", sq, hqic);
    let lin = mean(pairs().map(|(x, y)| d(x, y)));
    s.le("Cauchy-Schwarz over rounds", lin * lin / tf, sq);
    s.le("E_{x1,y2} D ≤ √(t HQIC)", lin, root);
    let off = mean(pairs().filter(|(x, y)| x != y).map(|(x, y)| d(x, y)));
    if size > 1 {
        let p_ne = 1.0 - 1.0 / size as f64;
        s.le("conditioned on x ≠ y", off, root / p_ne);
    }

    // Triple (x1, x2, y2) with y1 = x1. With k = 1 the three non-equality
    // conditions cannot hold together; only the one the last step uses is kept.
    let bob_outputs = p.output_party() == Party::Bob;
    let mut best: Option<(u64, u64, u64, f64)> = None;
    for x1 in 0..size {
        for x2 in 0..size {
            for y2 in 0..size {
                let feasible = if k >= 2 {
                    x1 != y2 && x2 != x1 && x2 != y2
                } else if bob_outputs {
                    x2 != x1
                } else {
                    y2 != x1
                };
                if !feasible {
                    continue;
                }
                let worst = d(x1, y2).max(d(x2, x1)).max(d(x2, y2));
                if best.is_none_or(|b| worst < b.3) {
                    best = Some((x1, x2, y2, worst));
                }
            }
        }
    }
    let (x1, x2, y2, _) =
        best.ok_or_else(|| HarnessError::Precondition("no admissible input triple".into()))?;
    let y1 = x1;
    s.le("Markov: D(x1,y2) ≤ 5√(t HQIC)", d(x1, y2), 5.0 * root);
    s.le("Markov: D(x2,y1) ≤ 5√(t HQIC)", d(x2, y1), 5.0 * root);
    s.le("Markov: D(x2,y2) ≤ 5√(t HQIC)", d(x2, y2), 5.0 * root);

    let odd = |r: &usize| Party::of_round(r - 1) == Party::Alice;
    let bob_side: f64 = (1..=t)
        .filter(odd)
        .map(|r| bures(views.get(x1, y2, r), views.get(x2, y2, r)))
        .sum::<qicost::Result<f64>>()?;
    let alice_side: f64 = (1..=t)
        .filter(|r| !odd(r))
        .map(|r| bures(views.get(x2, y1, r), views.get(x2, y2, r)))
        .sum::<qicost::Result<f64>>()?;
    let sum_terms = |x: u64, y: u64, alice_rounds: bool| -> f64 {
        (1..=t)
            .filter(|r| odd(r) == alice_rounds)
            .map(|r| b[x as usize][y as usize][r - 1])
            .sum()
    };
    s.le(
        "triangle, Bob's views",
        bob_side,
        sum_terms(x1, y2, true) + sum_terms(x2, y2, true),
    );
    s.le(
        "triangle, Alice's views",
        alice_side,
        sum_terms(x2, y1, false) + sum_terms(x2, y2, false),
    );
    s.le("triangle, Bob's views ≤ 10√(t HQIC)", bob_side, 10.0 * root);
    s.le(
        "triangle, Alice's views ≤ 10√(t HQIC)",
        alice_side,
        10.0 * root,
    );

    // Cut-and-paste with u = x2, u' = x1, v = y2, v' = y1.
    let h = 2.0 * (bob_side + alice_side);
    let tr = |x: u64, y: u64| &views.traces[x as usize][y as usize];
    let alice_view = bures(
        &view(p, tr(x1, y2), t, Party::Alice)?,
        &view(p, tr(x1, y1), t, Party::Alice)?,
    )?;
    let bob_view = bures(
        &view(p, tr(x2, y1), t, Party::Bob)?,
        &view(p, tr(x1, y1), t, Party::Bob)?,
    )?;
    s.le("cut-and-paste, Alice's view", alice_view, h);
    s.le("cut-and-paste, Bob's view", bob_view, h);
    s.le("cut-and-paste ≤ 40√(t HQIC)", h, 40.0 * root);

    let (out_b, a, c) = if bob_outputs {
        (bob_view, tr(x2, y1), tr(x1, y1))
    } else {
        (alice_view, tr(x1, y2), tr(x1, y1))
    };
    let party = p.output_party();
    let delta = trace_distance(&view(p, a, t, party)?, &view(p, c, t, party)?)?;
    s.le("error vs distance", 1.0 - 2.0 * err, delta);
    s.le("Δ ≤ √2 B", delta, std::f64::consts::SQRT_2 * out_b);
    s.le("HQIC ≥ 1/(40000 t)", 1.0 / (40000.0 * tf), hqic);
    let witness = BTreeMap::from([
        ("x1".to_string(), x1),
        ("x2".to_string(), x2),
        ("y1".to_string(), y1),
        ("y2".to_string(), y2),
    ]);
    Ok(s.finish("eq_hqic_floor", hqic, 1.0 / (40000.0 * tf), witness))
}

/// Measures every link of `(2t/m) QIC ≥ (2/m) SQIC ≥ SQIC(Π_E) ≥ HQIC(Π_E) ≥ 1/(40000 t)`
/// for a Sink∘Xor protocol at `m = 3`, with `Π_E` the averaged sink embedding.
pub fn main_theorem_demo(p: &QuantumProtocol, m: usize, tol: &Tolerances) -> Result<ReplayReport> {
    if m != 3 {
        return Err(HarnessError::Config(format!(
            "the quantum embedding is simulated at m = 3 only, got {m}"
        )));
    }
    let n = num_edges(m);
    if p.x_bits() != n || p.y_bits() != n {
        return Err(HarnessError::Precondition(format!(
            "protocol must take {n}+{n} input bits"
        )));
    }
    let err = quantum_worst_case_error(p, &sink_xor(m)?)?;
    if err > 0.2 {
        return Err(HarnessError::Precondition(format!(
            "worst-case error {err} exceeds 1/5"
        )));
    }
    let nu = InputDistribution::uniform(2, 2);
    let e = quantum_embed_averaged(p, &sink_embedding_spec(m)?, &nu)?;
    let cp = quantum_costs(p, &nu.tensor_power(n)?)?;
    let ce = quantum_costs(&e, &nu.tensor_power(m - 1)?)?;
    let err_e = quantum_worst_case_error(&e, &eq(m - 1)?)?;
    let t = p.num_rounds() as f64;
    let mf = m as f64;
    let (sq_p, sq_e) = (cp.sqic.expect("product"), ce.sqic.expect("product"));

    let mut s = Steps::new(tol);
    s.eq("rounds of Π_E", e.num_rounds() as f64, t);
    s.le(
        "(2/m) SQIC ≤ (2t/m) QIC",
        2.0 / mf * sq_p,
        2.0 * t / mf * cp.qic,
    );
    s.le("SQIC(Π_E) ≤ (2/m) SQIC", sq_e, 2.0 / mf * sq_p);
    s.le("HQIC(Π_E) ≤ SQIC(Π_E)", ce.hqic, sq_e);
    s.le("1/(40000 t) ≤ HQIC(Π_E)", 1.0 / (40000.0 * t), ce.hqic);
    s.le(
        "err(Π_E) ≤ err + (m-1)/2^(m-2)",
        err_e,
        err + (m - 1) as f64 / (1u64 << (m - 2)) as f64,
    );
    s.le("QIC ≥ m/(80000 t²)", mf / (80000.0 * t * t), cp.qic);
    let witness = BTreeMap::from([
        ("m".to_string(), m as u64),
        ("rounds".to_string(), p.num_rounds() as u64),
    ]);
    Ok(s.finish("main_theorem_demo", cp.qic, mf / (80000.0 * t * t), witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qicost::classical::constant_protocol;
    use qicost::quantum;

    #[test]
    fn suite_replays_at_k_2() {
        for (name, p) in eq_protocol_suite(2).unwrap() {
            let r = derive_eq_ic_floor(&p, &Tolerances::default()).unwrap();
            assert!(r.pass, "{name}: {r:#?}");
        }
    }

    #[test]
    fn sending_protocol_has_the_expected_ic() {
        // I(X:T|Y) = 2 and I(Y:T|X) = h(1/4).
        let (_, p) = eq_protocol_suite(2).unwrap().remove(0);
        let r = derive_eq_ic_floor(&p, &Tolerances::default()).unwrap();
        let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((r.measured - (2.0 + h)).abs() < 1e-9, "{}", r.measured);
    }

    #[test]
    fn single_bit_equality_is_rejected() {
        let (_, p) = eq_protocol_suite(1).unwrap().remove(0);
        assert!(matches!(
            derive_eq_ic_floor(&p, &Tolerances::default()),
            Err(HarnessError::Precondition(_))
        ));
    }

    #[test]
    fn coin_flip_fails_the_precondition() {
        let p = constant_protocol(4, 4, false);
        assert!(matches!(
            derive_eq_ic_floor(&p, &Tolerances::default()),
            Err(HarnessError::Precondition(_))
        ));
    }

    #[test]
    fn sending_protocol_replays_the_quantum_chain() {
        let p = quantum::alice_sends_input(&eq(1).unwrap()).unwrap();
        let r = derive_eq_hqic_floor(&p, &Tolerances::default()).unwrap();
        assert!(r.pass, "{r:#?}");
        assert!((r.measured - 1.0).abs() < 1e-9);
    }
}
