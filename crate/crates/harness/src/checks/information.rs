use num_complex::Complex64;
use qicost::qkernel::{bures_matrices, DensityMatrix, InfoCalculator, PureState, RegisterLayout};
use qicost::random::{haar_unitary, random_probabilities, random_pure_state};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::gen::{cq_matrix, identity, kron, random_state, random_state_on};
use crate::report::SampleRecord;

fn abc(rng: &mut ChaCha20Rng) -> Result<DensityMatrix> {
    let layout = RegisterLayout::new([
        ("A", rng.random_range(1..=2)),
        ("B", rng.random_range(1..=2)),
        ("C", rng.random_range(1..=2)),
    ])?;
    Ok(random_state_on(layout, rng))
}

pub(super) fn mi_chain(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let rho = abc(rng)?;
    let c = InfoCalculator::new(&rho);
    let whole = c.mutual_information(&["A"], &["B", "C"])?;
    let via_c = c.mutual_information(&["A"], &["C"])?
        + c.conditional_mutual_information(&["A"], &["B"], &["C"])?;
    let via_b = c.mutual_information(&["A"], &["B"])?
        + c.conditional_mutual_information(&["A"], &["C"], &["B"])?;
    Ok(SampleRecord::worst([
        SampleRecord::eq(i, whole, via_c),
        SampleRecord::eq(i, whole, via_b),
    ]))
}

pub(super) fn mi_nonneg(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let rho = abc(rng)?;
    let c = InfoCalculator::new(&rho);
    let a = random_state("A", rng.random_range(1..=2), rng);
    let b = random_state("B", rng.random_range(1..=2), rng);
    let prod = a.tensor(&b)?;
    let pc = InfoCalculator::new(&prod);
    Ok(SampleRecord::worst([
        SampleRecord::le(i, -c.mutual_information(&["A"], &["B"])?, 0.0),
        SampleRecord::le(
            i,
            -c.conditional_mutual_information(&["A"], &["B"], &["C"])?,
            0.0,
        ),
        SampleRecord::eq(i, pc.mutual_information(&["A"], &["B"])?, 0.0),
    ]))
}

pub(super) fn mi_mono(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let rho = abc(rng)?;
    let l = rho.layout().clone();
    let c = InfoCalculator::new(&rho);
    let ab = c.mutual_information(&["A"], &["B"])?;
    let abc = c.mutual_information(&["A"], &["B", "C"])?;
    let u = kron(
        &kron(
            &identity(1 << l.width("A")?),
            &haar_unitary(1 << l.width("B")?, rng),
        ),
        &identity(1 << l.width("C")?),
    );
    let rotated = DensityMatrix::new(l, &u * rho.matrix() * u.adjoint())?;
    let after = InfoCalculator::new(&rotated).mutual_information(&["A"], &["B"])?;
    Ok(SampleRecord::worst([
        SampleRecord::le(i, ab, abc),
        SampleRecord::eq(i, after, ab),
    ]))
}

/// Random cq state `Σ p(x) |x⟩⟨x| ⊗ ρ^x` on `[X, regs..]`.
fn cq_state(
    regs: &[(&str, usize)],
    rng: &mut ChaCha20Rng,
) -> Result<(DensityMatrix, Vec<f64>, Vec<DensityMatrix>)> {
    let xb = rng.random_range(1..=2);
    let p = random_probabilities(1 << xb, rng);
    let inner = RegisterLayout::new(regs.iter().copied())?;
    let blocks: Vec<DensityMatrix> = (0..1 << xb)
        .map(|_| random_state_on(inner.clone(), rng))
        .collect();
    let mats: Vec<_> = blocks.iter().map(|b| b.matrix().clone()).collect();
    let mut all = vec![("X", xb)];
    all.extend(regs.iter().copied());
    let state = DensityMatrix::new(RegisterLayout::new(all)?, cq_matrix(&p, &mats))?;
    Ok((state, p, blocks))
}

pub(super) fn mi_avg(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let (a, b) = (rng.random_range(1..=2), rng.random_range(1..=2));
    let (state, p, blocks) = cq_state(&[("A", a), ("B", b)], rng)?;
    let cond =
        InfoCalculator::new(&state).conditional_mutual_information(&["A"], &["B"], &["X"])?;
    let mut avg = 0.0;
    for (px, bx) in p.iter().zip(&blocks) {
        avg += px * InfoCalculator::new(bx).mutual_information(&["A"], &["B"])?;
    }
    Ok(SampleRecord::eq(i, cond, avg))
}

pub(super) fn avg_enc(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let a = rng.random_range(1..=3);
    let (state, p, blocks) = cq_state(&[("A", a)], rng)?;
    let info = InfoCalculator::new(&state).mutual_information(&["X"], &["A"])?;
    let avg_state = blocks
        .iter()
        .zip(&p)
        .map(|(b, px)| b.matrix() * Complex64::new(*px, 0.0))
        .reduce(|x, y| x + y)
        .expect("nonempty");
    let mut lhs = 0.0;
    for (px, bx) in p.iter().zip(&blocks) {
        let b = bures_matrices(bx.matrix(), &avg_state)?;
        lhs += px * b * b;
    }
    Ok(SampleRecord::le(i, lhs, info))
}

/// A state on `U_1 .. U_m, V` together with a distribution over subsets of `[m]`.
#[derive(Debug, Clone)]
pub struct ShearerInstance {
    pub state: PureState,
    pub u: Vec<String>,
    pub v: Vec<String>,
    /// `(indices into u, probability)`.
    pub sets: Vec<(Vec<usize>, f64)>,
}

impl ShearerInstance {
    /// Two Bell pairs `U_i V_i`, `S` uniform over the singletons.
    pub fn bell_witness() -> Result<Self> {
        let layout = RegisterLayout::new([("U1", 1), ("U2", 1), ("V1", 1), ("V2", 1)])?;
        let h = Complex64::new(0.5, 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        for u1 in 0..2 {
            for u2 in 0..2 {
                amps[(u1 << 3) | (u2 << 2) | (u1 << 1) | u2] = h;
            }
        }
        Ok(Self {
            state: PureState::new(layout, amps)?,
            u: vec!["U1".into(), "U2".into()],
            v: vec!["V1".into(), "V2".into()],
            sets: vec![(vec![0], 0.5), (vec![1], 0.5)],
        })
    }

    /// `⊗_i |ψ_i⟩_{U_i P_i}` with random two-qubit `ψ_i`. With `scramble`, a
    /// Haar unitary acts on `P` and only part of it is kept as `V`.
    pub fn random(m: usize, scramble: bool, rng: &mut ChaCha20Rng) -> Result<Self> {
        let pair = RegisterLayout::new([("U", 1), ("P", 1)])?;
        let psis: Vec<PureState> = (0..m)
            .map(|_| random_pure_state(pair.clone(), rng))
            .collect();
        let d = 1usize << m;
        let mut mat = qicost::qkernel::CMatrix::zeros(d, d);
        for u in 0..d {
            for p in 0..d {
                let mut a = Complex64::new(1.0, 0.0);
                for (j, psi) in psis.iter().enumerate() {
                    let shift = m - 1 - j;
                    a *= psi.amplitudes()[(((u >> shift) & 1) << 1) | ((p >> shift) & 1)];
                }
                mat[(u, p)] = a;
            }
        }
        let vw = if scramble { rng.random_range(1..m) } else { m };
        if scramble {
            mat = &mat * haar_unitary(d, rng).transpose();
        }
        let mut regs: Vec<(String, usize)> = (1..=m).map(|j| (format!("U{j}"), 1)).collect();
        regs.push(("V".into(), vw));
        if vw < m {
            regs.push(("W".into(), m - vw));
        }
        let amps = (0..d * d).map(|i| mat[(i / d, i % d)]).collect();
        let state = PureState::normalized(RegisterLayout::new(regs)?, amps)?;
        let count = rng.random_range(1..=4);
        let probs = random_probabilities(count, rng);
        let sets = probs
            .into_iter()
            .map(|p| {
                let size = rng.random_range(1..=m);
                (crate::gen::random_coords(m, size, rng), p)
            })
            .collect();
        Ok(Self {
            state,
            u: (1..=m).map(|j| format!("U{j}")).collect(),
            v: vec!["V".into()],
            sets,
        })
    }

    /// Largest `Pr[i ∈ S]`, i.e. `1/k` for the tightest `k`.
    pub fn max_coverage(&self) -> f64 {
        (0..self.u.len())
            .map(|j| {
                self.sets
                    .iter()
                    .filter(|(s, _)| s.contains(&j))
                    .map(|(_, p)| p)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// `(I(U_S:V|S), I(U:V)/k)` with `1/k` the largest coverage.
pub fn shearer_sides(inst: &ShearerInstance) -> Result<(f64, f64)> {
    let c = InfoCalculator::new(&inst.state);
    let v: Vec<&str> = inst.v.iter().map(String::as_str).collect();
    let mut lhs = 0.0;
    for (s, p) in &inst.sets {
        let us: Vec<&str> = s.iter().map(|&j| inst.u[j].as_str()).collect();
        lhs += p * c.mutual_information(&us, &v)?;
    }
    let whole = c.mutual_information(&inst.u, &inst.v)?;
    Ok((lhs, whole * inst.max_coverage()))
}

pub(super) fn shearer(
    _: &ExperimentConfig,
    i: usize,
    rng: &mut ChaCha20Rng,
) -> Result<SampleRecord> {
    let inst = if i == 0 {
        ShearerInstance::bell_witness()?
    } else {
        let m = rng.random_range(2..=3);
        ShearerInstance::random(m, i % 2 == 1, rng)?
    };
    let (lhs, rhs) = shearer_sides(&inst)?;
    Ok(SampleRecord::le(i, lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qicost::random::rng;

    #[test]
    fn bell_witness_is_tight() {
        let (lhs, rhs) = shearer_sides(&ShearerInstance::bell_witness().unwrap()).unwrap();
        assert!((lhs - 2.0).abs() < 1e-9 && (rhs - 2.0).abs() < 1e-9);
    }

    #[test]
    fn random_instances_have_product_u_marginals() {
        let mut r = rng(5, 0);
        let inst = ShearerInstance::random(3, true, &mut r).unwrap();
        let c = InfoCalculator::new(&inst.state);
        let total = c.entropy(&["U1", "U2", "U3"]).unwrap();
        let parts: f64 = ["U1", "U2", "U3"]
            .iter()
            .map(|u| c.entropy(&[*u]).unwrap())
            .sum();
        assert!((total - parts).abs() < 1e-9);
    }
}
