use mhs_core::circuit::{parse_qasm, rewrite_for_graph, to_qasm, Circuit, CouplingGraph, GateOp};
use mhs_core::dense::DenseOp;
use mhs_core::f2linear::{BitMatrix4, CosetTable, Permutation, TransvectionWord};
use mhs_core::hyperdet::{delta4, delta4_unnormalized};
use mhs_core::pauli::PauliWord;
use mhs_core::qstate::{ParamMatrix, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::LazyLock;

static COSETS: LazyLock<CosetTable> = LazyLock::new(|| CosetTable::partition(&mhs_core::f2linear::enumerate_group()));

fn state() -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.0f64..1.0, 32)
        .prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let amps: [Complex64; 16] = std::array::from_fn(|i| Complex64::new(v[2 * i], v[2 * i + 1]));
            StateVector::from_amps_unchecked(amps).normalized()
        })
}

fn params() -> impl Strategy<Value = ParamMatrix> {
    prop::array::uniform12(-7.0f64..7.0).prop_map(|f| ParamMatrix::from_flat(&f))
}

fn word() -> impl Strategy<Value = TransvectionWord> {
    prop::collection::vec((0usize..4, 1usize..4), 0..20)
        .prop_map(|v| TransvectionWord(v.into_iter().map(|(i, d)| (i, (i + d) % 4)).collect()))
}

fn permutation() -> impl Strategy<Value = Permutation> {
    (0usize..24).prop_map(|n| Permutation::all()[n])
}

fn gate() -> impl Strategy<Value = GateOp> {
    let q = 0usize..4;
    prop_oneof![
        q.clone().prop_map(GateOp::H),
        q.clone().prop_map(GateOp::T),
        q.clone().prop_map(GateOp::P),
        q.clone().prop_map(GateOp::Pdg),
        (q.clone(), -7.0f64..7.0).prop_map(|(q, a)| GateOp::Rz(q, a)),
        (q.clone(), -7.0f64..7.0).prop_map(|(q, a)| GateOp::Ry(q, a)),
        (q.clone(), 1usize..4).prop_map(|(t, d)| GateOp::cnot(t, (t + d) % 4)),
        (q, 1usize..4).prop_map(|(a, d)| GateOp::Swap(a, (a + d) % 4)),
    ]
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-9 * scale.max(a.norm()).max(b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta4_is_invariant_under_local_rotations(s in state(), p in params()) {
        let d = delta4(&s).unwrap();
        let moved = p.operator().apply(&s);
        prop_assert!(close(delta4(&moved).unwrap(), d, 1e-12));
    }

    #[test]
    fn delta4_is_invariant_under_qubit_permutations(s in state(), sigma in permutation()) {
        let d = delta4(&s).unwrap();
        prop_assert!(close(delta4(&s.apply_permutation(sigma.map())).unwrap(), d, 1e-12));
    }

    #[test]
    fn contraction_qubit_does_not_matter(s in state()) {
        let d = delta4_unnormalized(&s, 0).unwrap();
        for q in 1..4 {
            prop_assert!(close(delta4_unnormalized(&s, q).unwrap(), d, 1e-12));
        }
    }

    #[test]
    fn delta4_has_degree_24(s in state(), r in 0.5f64..2.0, phi in -3.2f64..3.2) {
        let c = Complex64::from_polar(r, phi);
        let lhs = delta4_unnormalized(&s.scale(c), 3).unwrap();
        let rhs = delta4_unnormalized(&s, 3).unwrap() * c.powu(24);
        prop_assert!(close(lhs, rhs, 1e-12 * r.powi(24)));
    }

    #[test]
    fn inverse_and_inverse_transpose(w in word()) {
        let a = BitMatrix4::from_word(&w).unwrap();
        let inv = a.inverse().unwrap();
        prop_assert_eq!(a.mul(&inv), BitMatrix4::identity());
        prop_assert_eq!(a.inv_transpose().unwrap(), inv.transpose());
    }

    #[test]
    fn word_matrix_matches_circuit(w in word(), x in 0u8..16) {
        let factors: Vec<GateOp> = w.0.iter().map(|&(i, j)| GateOp::cnot(i, j)).collect();
        let c = Circuit::from_product(&factors).unwrap();
        let a = BitMatrix4::from_word(&w).unwrap();
        prop_assert_eq!(c.simulate_from(&StateVector::basis_from_bits(x)).unwrap(), StateVector::basis_from_bits(a.mul_vec(x)));
    }

    #[test]
    fn cosets_absorb_left_permutations(w in word(), sigma in permutation()) {
        let a = BitMatrix4::from_word(&w).unwrap();
        let c = COSETS.coset_of(&a).unwrap();
        prop_assert_eq!(COSETS.coset_of(&sigma.matrix().mul(&a)), Some(c));
    }

    #[test]
    fn pauli_product_matches_dense(p in (0u8..4, 0u8..16, 0u8..16), q in (0u8..4, 0u8..16, 0u8..16)) {
        let a = PauliWord::new(p.0, p.1, p.2);
        let b = PauliWord::new(q.0, q.1, q.2);
        let lhs = a.mul(&b).dense();
        let rhs = &a.dense() * &b.dense();
        prop_assert!(lhs.max_deviation(&rhs) < 1e-15);
    }

    #[test]
    fn pauli_conjugation_by_cnot_circuits(w in word(), u in 0u8..16, v in 0u8..16) {
        let a = BitMatrix4::from_word(&w).unwrap();
        let xa = DenseOp::from_columns(|s| s.apply_linear(&a));
        let p = PauliWord::new(0, u, v);
        let lhs = &(&xa * &p.dense()) * &xa.dagger();
        prop_assert!(lhs.max_deviation(&p.conjugate_by_cnot(&a).unwrap().dense()) < 1e-15);
    }

    #[test]
    fn qasm_round_trip(ops in prop::collection::vec(gate(), 0..30)) {
        let c = Circuit::from_ops(ops).unwrap();
        let back = parse_qasm(&to_qasm(&c)).unwrap();
        prop_assert!(back.operator().unwrap().max_deviation(&c.operator().unwrap()) < 1e-12);
    }

    #[test]
    fn routing_preserves_the_operator(ops in prop::collection::vec(gate(), 0..20)) {
        let c = Circuit::from_ops(ops).unwrap();
        let want = c.operator().unwrap();
        for g in [CouplingGraph::quito(), CouplingGraph::new(&[[0, 1], [1, 2], [2, 3]]).unwrap()] {
            let routed = rewrite_for_graph(&c, &g).unwrap();
            prop_assert!(routed.operator().unwrap().max_deviation(&want) < 1e-12);
            for op in routed.ops() {
                if let GateOp::Cnot { target, control } = op {
                    prop_assert!(g.has_edge(*target, *control));
                }
            }
        }
    }

    #[test]
    fn state_files_round_trip(s in state()) {
        let mut buf = Vec::new();
        s.write_to(&mut buf, Some("x")).unwrap();
        let back = StateVector::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back, s);
    }
}
