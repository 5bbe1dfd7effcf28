//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line and
//! then asserts. Tests hold a shared lock so that their runtimes are measured
//! without interference.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qicost::classical::{both_send_inputs, classical_ic, worst_case_error};
use qicost::embeddings::{classical_embed, quantum_embed_averaged, sink_embedding_spec};
use qicost::functions::{eq, num_edges, sink_xor};
use qicost::qkernel::{
    fidelity, von_neumann_entropy, DensityMatrix, InfoCalculator, PureState, QuantumState,
    RegisterLayout, Tolerances,
};
use qicost::quantum::{alice_sends_input, quantum_worst_case_error, sink_xor_relay, sqic};
use qicost::random::{random_pure_state, rng};
use qicost::InputDistribution;
use qicost_harness::checks::{shearer_sides, ShearerInstance};
use qicost_harness::gen::random_state_on;
use qicost_harness::replay::eq_protocol_suite;
use qicost_harness::report::{reports_to_csv, reports_to_json};
use qicost_harness::{
    channel_identity_gap, derive_eq_hqic_floor, derive_eq_ic_floor, main_theorem_demo, run_check,
    run_checks, ExperimentConfig,
};
use rand::Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn report(n: usize, ok: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let in_time = elapsed <= limit;
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {n}: {status} ({:.1} s of {} s) {detail}",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {n} failed: {detail}");
    assert!(in_time, "criterion {n} exceeded its runtime limit");
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Partial trace of `|ψ⟩⟨ψ|` by direct summation over the traced indices.
fn dense_partial_trace(psi: &PureState, keep: &[usize]) -> Vec<Vec<Complex64>> {
    let n = psi.layout().total_width();
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let compose = |k: usize, r: usize| {
        let mut g = 0usize;
        for (i, &q) in keep.iter().enumerate() {
            g |= ((k >> (keep.len() - 1 - i)) & 1) << (n - 1 - q);
        }
        for (i, &q) in rest.iter().enumerate() {
            g |= ((r >> (rest.len() - 1 - i)) & 1) << (n - 1 - q);
        }
        g
    };
    let a = psi.amplitudes();
    let dk = 1 << keep.len();
    let mut out = vec![vec![c(0.0); dk]; dk];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            for r in 0..1 << rest.len() {
                *v += a[compose(i, r)] * a[compose(j, r)].conj();
            }
        }
    }
    out
}

#[test]
fn criterion_1_kernel_closed_forms() {
    let _g = lock();
    let start = Instant::now();
    let one = RegisterLayout::new([("A", 1)]).unwrap();
    let rho = DensityMatrix::diagonal(one, &[0.75, 0.25]).unwrap();
    let h = von_neumann_entropy(&rho).unwrap();
    let h_err = (h - (2.0 - 0.75 * 3f64.log2())).abs();

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = PureState::new(
        RegisterLayout::new([("A", 1), ("B", 1)]).unwrap(),
        vec![c(s), c(0.0), c(0.0), c(s)],
    )
    .unwrap();
    let mi = InfoCalculator::new(&bell)
        .mutual_information(&["A"], &["B"])
        .unwrap();
    let mi_err = (mi - 2.0).abs();

    let mut ghz_amps = vec![c(0.0); 8];
    ghz_amps[0] = c(s);
    ghz_amps[7] = c(s);
    let ghz = PureState::new(
        RegisterLayout::new([("A", 1), ("B", 1), ("C", 1)]).unwrap(),
        ghz_amps,
    )
    .unwrap();
    let cmi = InfoCalculator::new(&ghz)
        .conditional_mutual_information(&["A"], &["B"], &["C"])
        .unwrap();
    let cmi_err = (cmi - 1.0).abs();

    let mut r = rng(1, 0);
    let mut fid_err = 0.0f64;
    for _ in 0..1000 {
        let q = r.random_range(1..=3);
        let layout = RegisterLayout::new([("A", q)]).unwrap();
        let a = random_pure_state(layout.clone(), &mut r);
        let b = random_pure_state(layout, &mut r);
        let f = fidelity(&a.to_density(), &b.to_density()).unwrap();
        fid_err = fid_err.max((f - a.inner(&b).unwrap().norm()).abs());
    }
    let worst = h_err.max(mi_err).max(cmi_err).max(fid_err);
    report(
        1,
        worst <= 1e-9,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("entropy {h_err:.1e}, Bell MI {mi_err:.1e}, GHZ CMI {cmi_err:.1e}, fidelity {fid_err:.1e}"),
    );
}

#[test]
fn criterion_2_exact_identities() {
    let _g = lock();
    let start = Instant::now();
    let cfg = ExperimentConfig {
        samples: Some(1000),
        ..ExperimentConfig::with_seed(2)
    };
    let cut = run_check("CUT_PASTE_C", &cfg).unwrap();

    let mut r = rng(2, 1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = r.random_range(3..=5);
        let layout = RegisterLayout::new([("Q", n)]).unwrap();
        let psi = random_pure_state(layout, &mut r);
        let size = r.random_range(1..n);
        let mut keep: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(keep.as_mut_slice(), &mut r);
        keep.truncate(size);
        let fast = psi.reduced_on_qubits(&keep);
        let oracle = dense_partial_trace(&psi, &keep);
        for (i, row) in oracle.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((fast[(i, j)] - v).norm());
            }
        }
    }
    report(
        2,
        cut.max_violation <= 1e-12 && worst <= 1e-12,
        start.elapsed(),
        Duration::from_secs(60),
        &format!(
            "cut-and-paste {:.1e}, partial trace {worst:.1e}",
            cut.max_violation
        ),
    );
}

#[test]
fn criterion_3_inequality_suites() {
    let _g = lock();
    let start = Instant::now();
    let ids: Vec<String> = [
        "AVG_ENC",
        "BURES_AVG",
        "BURES_TRIANGLE",
        "BURES_WEAK",
        "DIST_MONO",
        "ERR_DIST",
        "FVDG",
        "MI_AVG",
        "MI_CHAIN",
        "MI_MONO",
        "MI_NONNEG",
        "PRODUCT_MI",
        "PYTHAG",
        "QIC_CHAIN",
        "Q_CUT_PASTE",
        "SHEARER",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let cfg = ExperimentConfig {
        samples: Some(1000),
        ..ExperimentConfig::with_seed(3)
    };
    let reports = run_checks(&ids, &cfg).unwrap();
    for r in &reports {
        println!("  {}", r.summary());
    }
    let (lhs, rhs) = shearer_sides(&ShearerInstance::bell_witness().unwrap()).unwrap();
    let witness = (lhs - 2.0).abs().max((rhs - 2.0).abs());
    let all = reports.iter().all(|r| r.pass && r.samples >= 1000);
    report(
        3,
        all && witness <= 1e-9,
        start.elapsed(),
        Duration::from_secs(300),
        &format!(
            "{} suites, Shearer witness {lhs:.12} = {rhs:.12}",
            reports.len()
        ),
    );
}

#[test]
fn criterion_4_classical_embedding() {
    let _g = lock();
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for m in [4, 5] {
        let n = num_edges(m);
        let f = sink_xor(m).unwrap();
        let g = f.clone();
        let p = both_send_inputs(n, n, move |x, y| g.evaluate(x, y).unwrap()).unwrap();
        let nu = InputDistribution::uniform(2, 2);
        let e = classical_embed(&p, &sink_embedding_spec(m).unwrap(), &nu).unwrap();
        let ic_p = classical_ic(&p, &nu.tensor_power(n).unwrap()).unwrap();
        let ic_e = classical_ic(&e, &nu.tensor_power(m - 1).unwrap()).unwrap();
        let err_p = worst_case_error(&p, &f).unwrap();
        let err_e = worst_case_error(&e, &eq(m - 1).unwrap()).unwrap();
        let bound = (m - 1) as f64 / (1u64 << (m - 2)) as f64;
        ok &= ic_e <= 2.0 / m as f64 * ic_p + 1e-9 && err_p == 0.0 && err_e <= bound;
        detail.push(format!(
            "m={m}: IC' {ic_e:.6} <= {:.6}, err' {err_e:.6} <= {bound}",
            2.0 / m as f64 * ic_p
        ));
    }
    report(
        4,
        ok,
        start.elapsed(),
        Duration::from_secs(120),
        &detail.join("; "),
    );
}

#[test]
fn criterion_5_eq_ic_floor() {
    let _g = lock();
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, p) in eq_protocol_suite(2).unwrap() {
        let r = derive_eq_ic_floor(&p, &tol).unwrap();
        println!("  {name}: {}", r.summary());
        ok &= r.pass && r.measured >= 1.0 / 432.0;
        detail.push(format!("{name} IC {:.4}", r.measured));
    }
    report(
        5,
        ok,
        start.elapsed(),
        Duration::from_secs(60),
        &detail.join(", "),
    );
}

#[test]
fn criterion_6_quantum_embedding() {
    let _g = lock();
    let start = Instant::now();
    let p = sink_xor_relay(3).unwrap();
    assert_eq!(p.num_rounds(), 2);
    let nu = InputDistribution::uniform(2, 2);
    let spec = sink_embedding_spec(3).unwrap();
    let mut r = rng(6, 0);
    let mut gap = 0.0f64;
    for i in 0..20 {
        let coords = &spec.sets()[i % spec.sets().len()].coords;
        let t = coords.len();
        let sigma = random_state_on(RegisterLayout::new([("X", t), ("Y", t)]).unwrap(), &mut r);
        gap = gap.max(channel_identity_gap(&p, coords, &nu, &sigma).unwrap());
    }
    let e = quantum_embed_averaged(&p, &spec, &nu).unwrap();
    let sq_p = sqic(&p, &nu.tensor_power(3).unwrap()).unwrap();
    let sq_e = sqic(&e, &nu.tensor_power(2).unwrap()).unwrap();
    let err_p = quantum_worst_case_error(&p, &sink_xor(3).unwrap()).unwrap();
    let err_e = quantum_worst_case_error(&e, &eq(2).unwrap()).unwrap();
    let k_bound = 1.5;
    let ok = gap <= 1e-9 && sq_e <= sq_p / k_bound + 1e-6 && err_e <= err_p + 1.0 + 1e-7;
    report(
        6,
        ok,
        start.elapsed(),
        Duration::from_secs(600),
        &format!(
            "channel gap {gap:.1e}, SQIC(Π̂) {sq_e:.6} <= {:.6}, err(Π_E) {err_e:.6} <= {:.6}",
            sq_p / k_bound,
            err_p + 1.0
        ),
    );
}

#[test]
fn criterion_7_eq_hqic_floor_and_main_chain() {
    let _g = lock();
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [1, 2] {
        let p = alice_sends_input(&eq(k).unwrap()).unwrap();
        let r = derive_eq_hqic_floor(&p, &tol).unwrap();
        println!("  k={k}: {}", r.summary());
        ok &= r.pass;
        detail.push(format!("k={k} HQIC {:.4}", r.measured));
    }
    let p = alice_sends_input(&sink_xor(3).unwrap()).unwrap();
    let demo = main_theorem_demo(&p, 3, &tol).unwrap();
    println!("  {}", demo.summary());
    let t = p.num_rounds() as f64;
    ok &= demo.pass && demo.measured >= 3.0 / (80000.0 * t * t);
    detail.push(format!("demo QIC {:.4}", demo.measured));
    report(
        7,
        ok,
        start.elapsed(),
        Duration::from_secs(300),
        &detail.join(", "),
    );
}

#[test]
fn criterion_8_determinism() {
    let _g = lock();
    let start = Instant::now();
    let ids: Vec<String> = [
        "CUT_PASTE_C",
        "FVDG",
        "MI_CHAIN",
        "QIC_CHAIN",
        "Q_CUT_PASTE",
        "SHEARER",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let cfg = ExperimentConfig {
        samples: Some(100),
        ..ExperimentConfig::with_seed(8)
    };
    let a = run_checks(&ids, &cfg).unwrap();
    let b = run_checks(&ids, &cfg).unwrap();
    let same_json = reports_to_json(&a).unwrap() == reports_to_json(&b).unwrap();
    let same_csv = reports_to_csv(&a).unwrap() == reports_to_csv(&b).unwrap();
    report(
        8,
        same_json && same_csv,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("JSON identical: {same_json}, CSV identical: {same_csv}"),
    );
}
