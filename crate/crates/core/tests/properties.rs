//! Property tests over random states and protocols drawn from proptest seeds.

use proptest::prelude::*;
use qicost::classical::{classical_ic, ClassicalProtocolFile};
use qicost::functions::{eq, FunctionRef};
use qicost::qkernel::{von_neumann_entropy, InfoCalculator, RegisterLayout};
use qicost::quantum::{
    acceptance_probability, alice_sends_input, quantum_costs, random_protocol, QuantumProtocolFile,
    RandomProtocolConfig,
};
use qicost::random::{random_density, random_pure_state, rng};
use qicost::InputDistribution;

const TOL: f64 = 1e-9;

fn layout(a: usize, b: usize, c: usize) -> RegisterLayout {
    RegisterLayout::new([("A", a), ("B", b), ("C", c)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_lies_between_zero_and_width(seed in any::<u64>(), a in 1usize..3, b in 1usize..3, rank in 1usize..5) {
        let rho = random_density(layout(a, b, 1), rank, &mut rng(seed, 0));
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s >= -TOL && s <= (a + b + 1) as f64 + TOL, "{s}");
        prop_assert!(s <= (rank as f64).log2() + TOL, "{s} above log rank");
    }

    #[test]
    fn pure_states_have_zero_entropy_and_balanced_marginals(seed in any::<u64>(), a in 1usize..3, b in 1usize..3) {
        let psi = random_pure_state(layout(a, b, 1), &mut rng(seed, 1));
        let info = InfoCalculator::new(&psi);
        prop_assert!(info.entropy(&["A", "B", "C"]).unwrap().abs() < TOL);
        let left = info.entropy(&["A"]).unwrap();
        let right = info.entropy(&["B", "C"]).unwrap();
        prop_assert!((left - right).abs() < TOL);
    }

    #[test]
    fn mutual_information_is_nonnegative_and_bounded(seed in any::<u64>(), a in 1usize..3, b in 1usize..3) {
        let rho = random_density(layout(a, b, 1), 3, &mut rng(seed, 2));
        let info = InfoCalculator::new(&rho);
        let mi = info.mutual_information(&["A"], &["B"]).unwrap();
        prop_assert!(mi >= -TOL && mi <= 2.0 * a.min(b) as f64 + TOL, "{mi}");
        let cmi = info.conditional_mutual_information(&["A"], &["B"], &["C"]).unwrap();
        prop_assert!(cmi >= -TOL, "{cmi}");
    }

    #[test]
    fn random_quantum_protocols_round_trip_through_json(seed in any::<u64>(), rounds in 1usize..4) {
        let cfg = RandomProtocolConfig {
            x_bits: 1,
            y_bits: 1,
            rounds,
            alice_memory: 1,
            bob_memory: 1,
            message_qubits: 1,
            entangled: seed % 2 == 0,
        };
        let p = random_protocol(&cfg, &mut rng(seed, 3)).unwrap();
        let file = QuantumProtocolFile::from_protocol(&p, None);
        let back = QuantumProtocolFile::from_json(&file.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &file);
        let q = back.to_protocol().unwrap();
        let mu = InputDistribution::uniform(2, 2);
        let (c1, c2) = (quantum_costs(&p, &mu).unwrap(), quantum_costs(&q, &mu).unwrap());
        prop_assert!((c1.qic - c2.qic).abs() < TOL);
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let d = acceptance_probability(&p, x, y).unwrap() - acceptance_probability(&q, x, y).unwrap();
            prop_assert!(d.abs() < TOL);
        }
    }
}

#[test]
fn classical_protocol_round_trips_through_json() {
    let p = qicost::classical::public_hash_eq(2, 2).unwrap();
    let file = ClassicalProtocolFile::from_protocol(&p, Some(FunctionRef::Eq(2))).unwrap();
    let back = ClassicalProtocolFile::from_json(&file.to_json().unwrap()).unwrap();
    assert_eq!(back, file);
    let mu = InputDistribution::uniform(4, 4);
    let a = classical_ic(&p, &mu).unwrap();
    let b = classical_ic(&back.to_protocol().unwrap(), &mu).unwrap();
    assert!((a - b).abs() < TOL);
}

#[test]
fn sending_protocol_is_exact_on_equality() {
    let f = eq(2).unwrap();
    let p = alice_sends_input(&f).unwrap();
    for x in 0..4 {
        for y in 0..4 {
            let acc = acceptance_probability(&p, x, y).unwrap();
            let want = if f.evaluate(x, y).unwrap() { 1.0 } else { 0.0 };
            assert!((acc - want).abs() < TOL);
        }
    }
}
