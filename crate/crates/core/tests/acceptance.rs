//! Acceptance suite. Runs without the libtest harness so the PASS/FAIL
//! lines always reach the terminal; exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mhs_core::catalog::{self, GenTarget};
use mhs_core::circuit::{parse_qasm, rewrite_for_graph, to_qasm, Circuit, CouplingGraph, GateOp};
use mhs_core::dense::DenseOp;
use mhs_core::f2linear::{enumerate_group, BitMatrix4, CosetTable, Permutation, TransvectionWord};
use mhs_core::hyperdet::{delta4, MAX_ABS_DELTA4};
use mhs_core::pauli::{param_op, push_through, LemmaOp, PauliWord};
use mhs_core::qstate::{ParamMatrix, SingleQubitGate, StateVector};
use mhs_core::search::{
    lu_residual, maximize_delta4, screen_cosets, ScreenConfig, WalkConfig, EXPECTED_SURVIVORS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 128;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, n: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut o = f();
        let took = start.elapsed();
        if let Some(b) = budget {
            if took > b {
                o.passed = false;
                o.detail.push_str(&format!("; over the {:.0?} budget", b));
            }
        }
        if !o.passed {
            self.failures += 1;
        }
        println!(
            "{} {n:>2} {name}: {} [{:.2?}]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            took
        );
    }
}

fn phase_dev(a: &StateVector, b: &StateVector) -> f64 {
    let ip = b.inner(a);
    if ip.norm() == 0.0 {
        return f64::INFINITY;
    }
    a.max_deviation(&b.scale(ip / ip.norm()))
}

fn random_params(rng: &mut ChaCha8Rng, full: bool) -> ParamMatrix {
    let mut flat = [0.0; 12];
    for (n, x) in flat.iter_mut().enumerate() {
        *x = if n % 3 == 2 && !full { 0.0 } else { rng.random_range(-PI..PI) };
    }
    ParamMatrix::from_flat(&flat)
}

fn random_word(rng: &mut ChaCha8Rng) -> TransvectionWord {
    let len = rng.random_range(1..=24);
    TransvectionWord(
        (0..len)
            .map(|_| {
                let i = rng.random_range(0..4);
                (i, (i + rng.random_range(1..4)) % 4)
            })
            .collect(),
    )
}

fn word_circuit(w: &TransvectionWord) -> Circuit {
    let factors: Vec<GateOp> = w.0.iter().map(|&(i, j)| GateOp::cnot(i, j)).collect();
    Circuit::from_product(&factors).unwrap()
}

fn perm_op(sigma: &Permutation) -> DenseOp {
    DenseOp::from_columns(|b| b.apply_permutation(sigma.map()))
}

fn product_dense(ops: &[GateOp]) -> DenseOp {
    Circuit::from_ops(ops.to_vec()).unwrap().operator().unwrap()
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    // largest |Δ4| seen by any search in this run
    let mut peak: f64 = 0.0;

    suite.run(1, "group and coset counts", Some(Duration::from_secs(5)), || {
        let group = enumerate_group();
        let table = CosetTable::partition(&group);
        outcome(
            group.len() == 20160 && table.len() == 840,
            format!("|GL(4,2)| = {}, cosets = {}", group.len(), table.len()),
        )
    });

    let table = CosetTable::partition(&enumerate_group());
    suite.run(2, "screening survivors", Some(Duration::from_secs(120)), || {
        let report = screen_cosets(&table, &ScreenConfig::default());
        peak = report.peaks.iter().copied().fold(peak, f64::max);
        match report.check_expected(EXPECTED_SURVIVORS) {
            Ok(()) => outcome(true, format!("{} survivors", report.survivors.len())),
            Err(e) => outcome(false, e.to_string()),
        }
    });

    suite.run(3, "maximum on the twelve (i,j) cosets", Some(Duration::from_secs(15 * 60)), || {
        let cfg = WalkConfig::maximize();
        let mut worst = f64::INFINITY;
        let mut detail = Vec::new();
        for (i, j) in catalog::maximizer_pairs() {
            let a = catalog::build_m(i, j, catalog::default_k(i, j)).unwrap().1;
            match maximize_delta4(&a, &cfg) {
                Ok(r) => {
                    worst = worst.min(r.objective);
                    peak = peak.max(r.peak.unwrap_or(r.objective));
                    if r.objective < MAX_ABS_DELTA4 - 1e-9 {
                        detail.push(format!("({i},{j}) reached {:e}", r.objective));
                    }
                }
                Err(e) => detail.push(format!("({i},{j}): {e}")),
            }
        }
        let passed = detail.is_empty();
        detail.push(format!("smallest best {worst:.12e}, gap {:.2e}", MAX_ABS_DELTA4 - worst));
        outcome(passed, detail.join("; "))
    });

    suite.run(4, "ceiling over all evaluations", None, || {
        outcome(
            peak <= MAX_ABS_DELTA4 + 1e-9,
            format!("peak {peak:.15e}, excess {:.2e}", peak - MAX_ABS_DELTA4),
        )
    });

    suite.run(5, "psi_max and psi_max_prime", None, || {
        let psi = catalog::psi_max();
        let psi_p = catalog::psi_max_prime();
        let d = delta4(&psi).unwrap();
        let dp = delta4(&psi_p).unwrap();
        let dev_d = (d + MAX_ABS_DELTA4).norm().max((dp + MAX_ABS_DELTA4).norm());
        let dev_w = psi
            .max_deviation(&catalog::psi_max_expansion())
            .max(psi_p.max_deviation(&catalog::psi_max_prime_expansion()));
        outcome(
            dev_d < 1e-12 && dev_w < 1e-12,
            format!("Delta4 deviation {dev_d:.2e}, expansion deviation {dev_w:.2e}"),
        )
    });

    suite.run(6, "known-state values", None, || {
        let max_dev = GenTarget::ALL
            .iter()
            .map(|t| (delta4(&t.state()).unwrap().norm() - MAX_ABS_DELTA4).abs())
            .fold(0.0, f64::max);
        let mut zero_dev = delta4(&StateVector::zero())
            .unwrap()
            .norm()
            .max(delta4(&catalog::ghz4()).unwrap().norm());
        for _ in 0..SAMPLES {
            zero_dev = zero_dev.max(delta4(&random_params(&mut rng, true).state()).unwrap().norm());
        }
        outcome(
            max_dev < 1e-12 && zero_dev < 1e-15,
            format!("max |Delta4| deviation {max_dev:.2e}, largest vanishing value {zero_dev:.2e}"),
        )
    });

    suite.run(7, "local-unitary reconstructions from psi_max", None, || {
        let psi = catalog::psi_max();
        let rows: Vec<(&str, ParamMatrix, f64, StateVector)> = vec![
            ("L", catalog::p_psi_to_l(), catalog::PHI_PSI_TO_L, catalog::l_state()),
            ("Phi5", catalog::p_psi_to_phi5(), catalog::PHI_PSI_TO_PHI5, catalog::phi5()),
            ("M2222", catalog::p_psi_to_m2222(), catalog::PHI_PSI_TO_M2222, catalog::m2222()),
        ];
        let mut passed = true;
        let parts: Vec<String> = rows
            .iter()
            .map(|(name, p, phi, target)| {
                let r = lu_residual(&psi, target, p, *phi);
                passed &= r < 1e-10;
                format!("{name} {r:.2e}")
            })
            .collect();
        outcome(passed, format!("residuals {}", parts.join(", ")))
    });

    suite.run(8, "Pauli parameter operations and push-through", None, || {
        let a2 = catalog::build_m(0, 1, 2).unwrap().1;
        let mut lemma: f64 = 0.0;
        let mut pushed: f64 = 0.0;
        let mut conj: f64 = 0.0;
        let mut kept: f64 = 0.0;
        for n in 0..SAMPLES {
            let p = random_params(&mut rng, false);
            let img = param_op(&p, rng.random_range(0..4), LemmaOp::ALL[n % 3]).unwrap();
            lemma = lemma.max(img.params.state().max_deviation(&img.word.apply(&p.state())));

            // a random chain, pushed through a random CNOT circuit
            let mut q = p;
            for _ in 0..rng.random_range(1..6) {
                q = param_op(&q, rng.random_range(0..4), LemmaOp::ALL[rng.random_range(0..3)]).unwrap().params;
            }
            let a = BitMatrix4::from_word(&random_word(&mut rng)).unwrap();
            pushed = pushed.max(match push_through(&a, &p, &q).unwrap() {
                Some(w) => q.state().apply_linear(&a).max_deviation(&w.apply(&p.state().apply_linear(&a))),
                None => f64::INFINITY,
            });

            // the same chain from a maximizer keeps |Delta4| maximal
            let base = if n % 2 == 0 { catalog::p_max() } else { catalog::p_max_prime() };
            let mut b = base;
            for _ in 0..rng.random_range(1..6) {
                b = param_op(&b, rng.random_range(0..4), LemmaOp::ALL[rng.random_range(0..3)]).unwrap().params;
            }
            kept = kept.max((delta4(&b.state().apply_linear(&a2)).unwrap().norm() - MAX_ABS_DELTA4).abs());

            let w = random_word(&mut rng);
            let xa = word_circuit(&w).operator().unwrap();
            let word = PauliWord::new(0, rng.random_range(0..16u8), rng.random_range(0..16u8));
            let lhs = &(&xa * &word.dense()) * &xa.dagger();
            let rhs = word.conjugate_by_cnot(&BitMatrix4::from_word(&w).unwrap()).unwrap().dense();
            conj = conj.max(lhs.max_deviation(&rhs));
        }

        // the worked example: three operations on P_max, pushed through M_2
        let mut chain = catalog::p_max();
        for (k, op) in [(0, LemmaOp::AlphaPlusPi), (2, LemmaOp::NegBeta), (3, LemmaOp::NegAlphaBetaPlusPi)] {
            chain = param_op(&chain, k, op).unwrap().params;
        }
        let example_params = chain
            .flat()
            .iter()
            .zip(catalog::p_example().flat())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let w = push_through(&a2, &catalog::p_max(), &chain).unwrap();
        let word_ok = w.is_some_and(|w| w.x == 0b1110 && w.z == 0b0010);
        let m2 = catalog::build_m(0, 1, 2).unwrap().0;
        let example = phase_dev(
            &m2.simulate_from(&chain.state()).unwrap(),
            &PauliWord::new(0, 0b1110, 0b0010).apply(&catalog::psi_max()),
        );

        let worst = lemma.max(pushed).max(conj).max(kept).max(example).max(example_params);
        outcome(
            worst < 1e-10 && word_ok,
            format!(
                "{SAMPLES} instances each: operations {lemma:.1e}, push-through {pushed:.1e}, \
                 conjugation {conj:.1e}, |Delta4| kept {kept:.1e}; example chain {example:.1e}, word X1X2X3Z1 {}",
                if word_ok { "found" } else { "NOT found" }
            ),
        )
    });

    suite.run(9, "operator identities", None, || {
        // rotations by multiples of π/4 and π/2 in the discrete gate set
        let mut rot: f64 = 0.0;
        for k in -8i32..=8 {
            let a = k as f64 * FRAC_PI_4;
            let rz = catalog::rz_universal(1, a).map(|ops| product_dense(&ops));
            rot = rot.max(rz.map_or(f64::INFINITY, |d| d.phase_deviation(&DenseOp::single(&SingleQubitGate::rz(a), 1))));
            let b = k as f64 * FRAC_PI_2;
            let ry = catalog::ry_universal(2, b).map(|ops| product_dense(&ops));
            rot = rot.max(ry.map_or(f64::INFINITY, |d| d.phase_deviation(&DenseOp::single(&SingleQubitGate::ry(b), 2))));
        }

        // SWAP conjugation, all σ and all i ≠ j
        let mut swap: f64 = 0.0;
        let g = random_params(&mut rng, true).operator().0[0];
        let p = random_params(&mut rng, true);
        for sigma in Permutation::all() {
            let s = perm_op(&sigma);
            let s_inv = perm_op(&sigma.inverse());
            for i in 0..4 {
                for j in (0..4).filter(|&j| j != i) {
                    let lhs = &(&s * &DenseOp::cnot(i, j)) * &s_inv;
                    swap = swap.max(lhs.max_deviation(&DenseOp::cnot(sigma.apply(i), sigma.apply(j))));
                }
                let lhs = &(&s * &DenseOp::single(&g, i)) * &s_inv;
                swap = swap.max(lhs.max_deviation(&DenseOp::single(&g, sigma.apply(i))));
            }
            let u = DenseOp::from_columns(|b| p.operator().apply(b));
            let moved = ParamMatrix::permute_rows(&p, sigma.map());
            let lhs = &(&s * &u) * &s_inv;
            swap = swap.max(lhs.max_deviation(&DenseOp::from_columns(|b| moved.operator().apply(b))));
        }

        // X_A|x⟩ = |Ax⟩
        let mut linear = true;
        for _ in 0..100 {
            let w = random_word(&mut rng);
            let a = BitMatrix4::from_word(&w).unwrap();
            let c = word_circuit(&w);
            for x in 0..16u8 {
                linear &= c.simulate_from(&StateVector::basis_from_bits(x)).unwrap() == StateVector::basis_from_bits(a.mul_vec(x));
            }
        }
        outcome(
            rot < 1e-12 && swap < 1e-12 && linear,
            format!(
                "rotations {rot:.1e}, swap conjugations {swap:.1e}, X_A|x> = |Ax> {}",
                if linear { "exact" } else { "BROKEN" }
            ),
        )
    });

    suite.run(10, "circuits", None, || {
        let mut worst: f64 = 0.0;
        let mut roundtrip: f64 = 0.0;
        for t in GenTarget::ALL {
            let raw = catalog::generation_circuit(t);
            for c in [raw.clone(), catalog::to_universal(&raw)] {
                worst = worst.max(phase_dev(&c.simulate().unwrap(), &t.state()));
                let back = parse_qasm(&to_qasm(&c)).unwrap();
                roundtrip = roundtrip.max(back.operator().unwrap().max_deviation(&c.operator().unwrap()));
            }
        }
        let m2 = catalog::build_m(0, 1, 2).unwrap().0;
        let routed = rewrite_for_graph(&m2, &CouplingGraph::quito()).unwrap();
        let routed_dev = routed.operator().unwrap().max_deviation(&m2.operator().unwrap());
        let count = routed.cnot_count();
        outcome(
            worst < 1e-10 && roundtrip < 1e-12 && count == 11 && routed_dev < 1e-12,
            format!(
                "state deviation {worst:.1e}, quito rewrite {count} CNOTs with operator deviation {routed_dev:.1e}, \
                 QASM round trip {roundtrip:.1e}"
            ),
        )
    });

    suite.run(11, "excluded and exploratory items", None, || {
        let pair = (0, 1);
        let a = catalog::build_m(pair.0, pair.1, 2).unwrap().1;
        let cfg = WalkConfig::maximize();
        let found = mhs_core::search::maximize_delta4_restarts(&a, &cfg, None).unwrap();
        let mut explained = 0;
        let mut total = 0;
        for r in found.iter().filter(|r| r.converged) {
            total += 1;
            let polished = mhs_core::search::polish(&a, &r.params, r.restart as u64).unwrap();
            if catalog::explain_maximizer(pair.0, pair.1, &polished.params, 1e-10).unwrap().is_some() {
                explained += 1;
            }
        }
        outcome(
            true,
            format!(
                "not checked: 1e-22 screening accuracy (double precision, 1e-9 used), hardware histogram; \
                 orbit check on (0,1) explored, not asserted: {explained}/{total} maximizers explained"
            ),
        )
    });

    if suite.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", suite.failures);
        ExitCode::FAILURE
    }
}
