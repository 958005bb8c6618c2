//! Named states, parameter matrices and CNOT operators, with a one-call
//! check of every identity relating them.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::LazyLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{parse_qasm, rewrite_for_graph, to_qasm, Circuit, CouplingGraph, GateOp};
use crate::dense::DenseOp;
use crate::error::{Error, Result};
use crate::f2linear::{canonical_key, enumerate_group, BitMatrix4, CosetTable, Permutation, TransvectionWord};
use crate::hyperdet::{delta4, delta4_unnormalized, MAX_ABS_DELTA4};
use crate::pauli::{find_pauli_relation, param_op, push_through, LemmaOp, PauliWord};
use crate::qstate::{LocalOperator, ParamMatrix, SingleQubitGate, StateVector, NUM_QUBITS};

/// `θ = arccos(√3/3)`, evaluated once.
pub static THETA: LazyLock<f64> = LazyLock::new(|| (3f64.sqrt() / 3.0).acos());

pub fn theta() -> f64 {
    *THETA
}

/// Published global phases of the generation circuits (`e^{iφ}|T⟩`).
/// Reference only: they depend on how each rotation was decomposed and
/// are not checked.
pub const REPORTED_CIRCUIT_PHASES: [(&str, f64); 3] =
    [("L", -7.0 * PI / 12.0), ("Phi5", -PI / 6.0), ("M2222", -13.0 * PI / 24.0)];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cis(a: f64) -> Complex64 {
    Complex64::from_polar(1.0, a)
}

/// Sum of `coeff |bits⟩` with `bits` written qubit 0 first.
fn ket(terms: &[(&str, Complex64)]) -> StateVector {
    let mut amps = [Complex64::new(0.0, 0.0); 16];
    for (bits, coeff) in terms {
        amps[usize::from_str_radix(bits, 2).expect("binary label")] += coeff;
    }
    StateVector::from_amps_unchecked(amps)
}

fn real(re: f64) -> Complex64 {
    c(re, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

/// Two-qubit amplitudes in the order `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn bell(which: Bell) -> [Complex64; 4] {
    let h = real(FRAC_1_SQRT_2);
    let z = real(0.0);
    match which {
        Bell::PhiPlus => [h, z, z, h],
        Bell::PhiMinus => [h, z, z, -h],
        Bell::PsiPlus => [z, h, h, z],
        Bell::PsiMinus => [z, h, -h, z],
    }
}

/// `|a⟩ ⊗ |b⟩` with `a` on qubits 0, 1.
pub fn bell_product(a: Bell, b: Bell) -> StateVector {
    let (a, b) = (bell(a), bell(b));
    StateVector::from_amps_unchecked(std::array::from_fn(|i| a[i >> 2] * b[i & 3]))
}

pub fn u0() -> StateVector {
    ket(&[("0000", real(0.5)), ("0011", real(0.5)), ("1100", real(0.5)), ("1111", real(0.5))])
}

pub fn u1() -> StateVector {
    ket(&[("0000", real(0.5)), ("0011", real(-0.5)), ("1100", real(-0.5)), ("1111", real(0.5))])
}

pub fn u2() -> StateVector {
    ket(&[("0101", real(0.5)), ("0110", real(0.5)), ("1001", real(0.5)), ("1010", real(0.5))])
}

/// `(u₀ + ω u₁ + ω* u₂)/√3`, `ω = e^{iπ/3}`.
pub fn l_state() -> StateVector {
    let w = cis(PI / 3.0);
    u0().add(&u1().scale(w))
        .add(&u2().scale(w.conj()))
        .scale(real(1.0 / 3f64.sqrt()))
}

pub fn phi5() -> StateVector {
    let a = real(1.0 / 6f64.sqrt());
    ket(&[
        ("0001", a),
        ("0010", a),
        ("0100", a),
        ("1000", a),
        ("1111", a * 2f64.sqrt()),
    ])
}

pub fn v1() -> StateVector {
    let a = 1.0 / 6f64.sqrt();
    ket(&[
        ("0000", real(a)),
        ("0101", real(a)),
        ("0110", real(-a)),
        ("1001", real(-a)),
        ("1010", real(a)),
        ("1111", real(a)),
    ])
}

pub fn v2() -> StateVector {
    ket(&[("0011", real(FRAC_1_SQRT_2)), ("1100", real(FRAC_1_SQRT_2))])
}

pub fn v3() -> StateVector {
    let a = 1.0 / 8f64.sqrt();
    ket(&[
        ("0001", real(-a)),
        ("0010", real(a)),
        ("0100", real(-a)),
        ("0111", real(a)),
        ("1000", real(a)),
        ("1011", real(-a)),
        ("1101", real(a)),
        ("1110", real(-a)),
    ])
}

pub fn m2222() -> StateVector {
    v1().scale(real(1.0 / 8f64.sqrt()))
        .add(&v2().scale(real(6f64.sqrt() / 4.0)))
        .add(&v3().scale(real(FRAC_1_SQRT_2)))
}

pub fn w1() -> StateVector {
    let a = 1.0 / 8f64.sqrt();
    ket(&[
        ("0001", c(a, 0.0)),
        ("0011", c(0.0, a)),
        ("0101", c(a, 0.0)),
        ("0111", c(0.0, -a)),
        ("1000", c(a, 0.0)),
        ("1010", c(0.0, a)),
        ("1100", c(a, 0.0)),
        ("1110", c(0.0, -a)),
    ])
}

pub fn w2() -> StateVector {
    ket(&[("0000", c(-0.5, 0.0)), ("0110", c(0.0, -0.5)), ("1011", c(0.0, -0.5)), ("1101", c(0.5, 0.0))])
}

pub fn w3() -> StateVector {
    ket(&[("0010", c(0.5, 0.0)), ("0100", c(0.0, 0.5)), ("1001", c(0.0, -0.5)), ("1111", c(0.5, 0.0))])
}

pub fn ghz4() -> StateVector {
    ket(&[("0000", real(FRAC_1_SQRT_2)), ("1111", real(FRAC_1_SQRT_2))])
}

/// `√3/3 w₁ + (3+√3)/6 e^{iφ₂} w₂ + (3−√3)/6 e^{iφ₃} w₃`.
fn w_combination(phi2: f64, phi3: f64) -> StateVector {
    let r3 = 3f64.sqrt();
    w1().scale(real(r3 / 3.0))
        .add(&w2().scale(cis(phi2) * ((3.0 + r3) / 6.0)))
        .add(&w3().scale(cis(phi3) * ((3.0 - r3) / 6.0)))
}

/// Closed form of `ψ_max` in the `w` basis.
pub fn psi_max_expansion() -> StateVector {
    w_combination(FRAC_PI_4, FRAC_PI_4)
}

/// Closed form of `ψ'_max` in the `w` basis.
pub fn psi_max_prime_expansion() -> StateVector {
    w_combination(-FRAC_PI_4, 3.0 * FRAC_PI_4)
}

pub fn p_max() -> ParamMatrix {
    let t = theta();
    ParamMatrix::new([[FRAC_PI_2, FRAC_PI_2, 0.0], [FRAC_PI_2, FRAC_PI_2, 0.0], [FRAC_PI_4, t, 0.0], [FRAC_PI_4, t, 0.0]])
}

pub fn p_max_prime() -> ParamMatrix {
    let t = theta();
    ParamMatrix::new([
        [FRAC_PI_2, FRAC_PI_2, 0.0],
        [FRAC_PI_2, FRAC_PI_2, 0.0],
        [3.0 * FRAC_PI_4, t, 0.0],
        [3.0 * FRAC_PI_4, t, 0.0],
    ])
}

/// `P_max` after `α₀ += π`, `β₂ = −β₂`, `α₃ = −α₃`, `β₃ += π`.
pub fn p_example() -> ParamMatrix {
    let t = theta();
    ParamMatrix::new([
        [3.0 * FRAC_PI_2, FRAC_PI_2, 0.0],
        [FRAC_PI_2, FRAC_PI_2, 0.0],
        [FRAC_PI_4, -t, 0.0],
        [-FRAC_PI_4, t + PI, 0.0],
    ])
}

pub fn p_psi_to_psi_prime() -> ParamMatrix {
    ParamMatrix::new([
        [-FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2],
        [FRAC_PI_2, PI, PI],
        [0.0, FRAC_PI_2, PI],
        [-FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2],
    ])
}

pub fn p_psi_to_l() -> ParamMatrix {
    ParamMatrix::new([[PI, FRAC_PI_2, -FRAC_PI_2], [FRAC_PI_2, -FRAC_PI_2, PI], [0.0, PI, PI], [0.0, -FRAC_PI_2, FRAC_PI_2]])
}

pub fn p_psi_to_phi5() -> ParamMatrix {
    let t = theta();
    ParamMatrix::new([
        [-PI / 3.0, t - PI, -3.0 * FRAC_PI_4],
        [PI / 3.0, t, 3.0 * FRAC_PI_4],
        [PI, t, 3.0 * FRAC_PI_4],
        [2.0 * PI / 3.0, PI - t, FRAC_PI_4],
    ])
}

pub fn p_psi_to_m2222() -> ParamMatrix {
    ParamMatrix::new([
        [FRAC_PI_2, FRAC_PI_4, 0.0],
        [-FRAC_PI_2, -FRAC_PI_4, FRAC_PI_2],
        [0.0, -FRAC_PI_2, FRAC_PI_4],
        [FRAC_PI_2, 3.0 * FRAC_PI_4, PI],
    ])
}

/// Phases `φ` with `|T⟩ = e^{iφ} U(P_{ψ→T}) |ψ_max⟩`.
pub const PHI_PSI_TO_PSI_PRIME: f64 = -PI / 3.0;
pub const PHI_PSI_TO_L: f64 = -11.0 * PI / 12.0;
pub const PHI_PSI_TO_PHI5: f64 = -7.0 * PI / 12.0;
pub const PHI_PSI_TO_M2222: f64 = 5.0 * PI / 12.0;

/// `M_k^{(i,j)} = X_[ij] X_[jk] X_[ki] X_[iℓ] X_[ℓj]` and its bit matrix
/// `[ij][jk][ki][iℓ][ℓj]`. The circuit lists the gates in time order, so
/// `X_[ℓj]` comes first.
pub fn build_m(i: usize, j: usize, k: usize) -> Result<(Circuit, BitMatrix4)> {
    let idx = [i, j, k];
    if let Some(&q) = idx.iter().find(|&&q| q >= NUM_QUBITS) {
        return Err(Error::QubitOutOfRange(q));
    }
    if i == j || j == k || i == k {
        return Err(Error::IndicesNotDistinct(idx.to_vec()));
    }
    let l = (0..NUM_QUBITS).find(|q| !idx.contains(q)).expect("one index left");
    let word = [(i, j), (j, k), (k, i), (i, l), (l, j)];
    let factors: Vec<GateOp> = word.iter().map(|&(t, ctl)| GateOp::cnot(t, ctl)).collect();
    let matrix = BitMatrix4::from_word(&TransvectionWord(word.to_vec()))?;
    Ok((Circuit::from_product(&factors)?, matrix))
}

/// The twelve ordered pairs `(i, j)`, `i ≠ j`, in lexicographic order.
pub fn maximizer_pairs() -> Vec<(usize, usize)> {
    (0..NUM_QUBITS)
        .flat_map(|i| (0..NUM_QUBITS).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// The smaller index outside `{i, j}`.
pub fn default_k(i: usize, j: usize) -> usize {
    (0..NUM_QUBITS).find(|&q| q != i && q != j).expect("four qubits")
}

/// The permutation `0→i, 1→j, 2→k, 3→ℓ` with `k < ℓ`.
pub fn pair_permutation(i: usize, j: usize) -> Result<Permutation> {
    let k = default_k(i, j);
    let l = (0..NUM_QUBITS).find(|&q| q != i && q != j && q != k).expect("four qubits");
    Permutation::new([i, j, k, l])
}

pub fn psi_max() -> StateVector {
    let (m, _) = build_m(0, 1, 2).expect("valid indices");
    m.simulate_from(&p_max().state()).expect("valid circuit")
}

pub fn psi_max_prime() -> StateVector {
    let (m, _) = build_m(0, 1, 2).expect("valid indices");
    m.simulate_from(&p_max_prime().state()).expect("valid circuit")
}

/// `PHP† ⊗ PX ⊗ H ⊗ PHP†`, mapping `ψ_max` to `ψ'_max` up to phase.
pub fn psi_to_psi_prime_operator() -> LocalOperator {
    let (p, h, x) = (SingleQubitGate::p(), SingleQubitGate::h(), SingleQubitGate::x());
    let php = p * h * SingleQubitGate::pdg();
    LocalOperator([php, p * x, h, php])
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedState {
    pub name: &'static str,
    pub state: StateVector,
    pub definition: &'static str,
}

pub const STATE_NAMES: [&str; 16] = [
    "L", "Phi5", "M2222", "psi_max", "psi_max_prime", "GHZ4", "zero", "u0", "u1", "u2", "v1", "v2", "v3", "w1", "w2", "w3",
];

pub fn named_state(name: &str) -> Result<NamedState> {
    let (name, state, definition): (&'static str, StateVector, &'static str) = match name {
        "L" => ("L", l_state(), "(u0 + w u1 + w* u2)/sqrt3, w = e^{i pi/3}"),
        "Phi5" => ("Phi5", phi5(), "(|0001> + |0010> + |0100> + |1000> + sqrt2 |1111>)/sqrt6"),
        "M2222" => ("M2222", m2222(), "v1/sqrt8 + sqrt6/4 v2 + v3/sqrt2"),
        "psi_max" => ("psi_max", psi_max(), "M_2^(0,1) |P_max>"),
        "psi_max_prime" => ("psi_max_prime", psi_max_prime(), "M_2^(0,1) |P'_max>"),
        "GHZ4" => ("GHZ4", ghz4(), "(|0000> + |1111>)/sqrt2"),
        "zero" => ("zero", StateVector::zero(), "|0000>"),
        "u0" => ("u0", u0(), "Phi+ Phi+"),
        "u1" => ("u1", u1(), "Phi- Phi-"),
        "u2" => ("u2", u2(), "Psi+ Psi+"),
        "v1" => ("v1", v1(), "(|0000> + |0101> - |0110> - |1001> + |1010> + |1111>)/sqrt6"),
        "v2" => ("v2", v2(), "(|0011> + |1100>)/sqrt2"),
        "v3" => ("v3", v3(), "(-|0001> + |0010> - |0100> + |0111> + |1000> - |1011> + |1101> - |1110>)/sqrt8"),
        "w1" => ("w1", w1(), "(|0001> + i|0011> + |0101> - i|0111> + |1000> + i|1010> + |1100> - i|1110>)/sqrt8"),
        "w2" => ("w2", w2(), "(-|0000> - i|0110> - i|1011> + |1101>)/2"),
        "w3" => ("w3", w3(), "(|0010> + i|0100> - i|1001> + |1111>)/2"),
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok(NamedState { name, state, definition })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedParams {
    pub name: &'static str,
    pub params: ParamMatrix,
    pub phase: Option<f64>,
}

pub const PARAM_NAMES: [&str; 7] =
    ["P_max", "P_max_prime", "P_example", "P_psi_to_psi_prime", "P_psi_to_L", "P_psi_to_Phi5", "P_psi_to_M2222"];

pub fn named_params(name: &str) -> Result<NamedParams> {
    let (name, params, phase): (&'static str, ParamMatrix, Option<f64>) = match name {
        "P_max" => ("P_max", p_max(), None),
        "P_max_prime" => ("P_max_prime", p_max_prime(), None),
        "P_example" => ("P_example", p_example(), None),
        "P_psi_to_psi_prime" => ("P_psi_to_psi_prime", p_psi_to_psi_prime(), Some(PHI_PSI_TO_PSI_PRIME)),
        "P_psi_to_L" => ("P_psi_to_L", p_psi_to_l(), Some(PHI_PSI_TO_L)),
        "P_psi_to_Phi5" => ("P_psi_to_Phi5", p_psi_to_phi5(), Some(PHI_PSI_TO_PHI5)),
        "P_psi_to_M2222" => ("P_psi_to_M2222", p_psi_to_m2222(), Some(PHI_PSI_TO_M2222)),
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok(NamedParams { name, params, phase })
}

/// States reachable from `ψ_max` by a known local unitary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GenTarget {
    L,
    Phi5,
    M2222,
}

impl GenTarget {
    pub const ALL: [GenTarget; 3] = [GenTarget::L, GenTarget::Phi5, GenTarget::M2222];

    pub fn name(&self) -> &'static str {
        match self {
            GenTarget::L => "L",
            GenTarget::Phi5 => "Phi5",
            GenTarget::M2222 => "M2222",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn state(&self) -> StateVector {
        match self {
            GenTarget::L => l_state(),
            GenTarget::Phi5 => phi5(),
            GenTarget::M2222 => m2222(),
        }
    }

    /// `(P_{ψ→T}, φ)`.
    pub fn lu_params(&self) -> (ParamMatrix, f64) {
        match self {
            GenTarget::L => (p_psi_to_l(), PHI_PSI_TO_L),
            GenTarget::Phi5 => (p_psi_to_phi5(), PHI_PSI_TO_PHI5),
            GenTarget::M2222 => (p_psi_to_m2222(), PHI_PSI_TO_M2222),
        }
    }
}

/// Gates preparing `|P⟩` from `|0000⟩`: `R_y(β_k)` then `R_z(α_k)` per qubit.
pub fn prep_circuit(p: &ParamMatrix) -> Circuit {
    let mut ops = Vec::with_capacity(2 * NUM_QUBITS);
    for k in 0..NUM_QUBITS {
        ops.push(GateOp::Ry(k, p.beta(k)));
        ops.push(GateOp::Rz(k, p.alpha(k)));
    }
    Circuit::from_ops(ops).expect("valid qubits")
}

/// Gates for `U(P)`: `R_z(α'_k)`, `R_y(β_k)`, `R_z(α_k)` per qubit.
pub fn local_circuit(p: &ParamMatrix) -> Circuit {
    let mut ops = Vec::with_capacity(3 * NUM_QUBITS);
    for k in 0..NUM_QUBITS {
        ops.push(GateOp::Rz(k, p.alpha_prime(k)));
        ops.push(GateOp::Ry(k, p.beta(k)));
        ops.push(GateOp::Rz(k, p.alpha(k)));
    }
    Circuit::from_ops(ops).expect("valid qubits")
}

/// `U(P_{ψ→T}) M_2^{(0,1)} |P_max⟩`, in rotation gates. The output equals
/// `e^{-iφ}|T⟩`.
pub fn generation_circuit(target: GenTarget) -> Circuit {
    let mut c = prep_circuit(&p_max());
    c.extend(&build_m(0, 1, 2).expect("valid indices").0);
    c.extend(&local_circuit(&target.lu_params().0));
    c
}

fn quarter_turns(angle: f64, unit: f64) -> Option<i64> {
    let m = angle / unit;
    let r = m.round();
    ((m - r).abs() < 1e-12).then_some(r as i64)
}

/// `R_z(θ)` in `T, P, Z, P†` when `θ` is a multiple of `π/4` (up to phase).
pub fn rz_universal(q: usize, angle: f64) -> Option<Vec<GateOp>> {
    let m = quarter_turns(angle, FRAC_PI_4)?.rem_euclid(8);
    Some(match m {
        0 => vec![],
        1 => vec![GateOp::T(q)],
        2 => vec![GateOp::P(q)],
        3 => vec![GateOp::P(q), GateOp::T(q)],
        4 => vec![GateOp::Z(q)],
        5 => vec![GateOp::Z(q), GateOp::T(q)],
        6 => vec![GateOp::Pdg(q)],
        _ => vec![GateOp::Pdg(q), GateOp::T(q)],
    })
}

/// `R_y(θ)` in `H, Z, Y` when `θ` is a multiple of `π/2` (up to phase).
/// `R_y(π/2) = HZ` runs `Z` first; `R_y(−π/2) = ZH` runs `H` first.
pub fn ry_universal(q: usize, angle: f64) -> Option<Vec<GateOp>> {
    let m = quarter_turns(angle, FRAC_PI_2)?.rem_euclid(4);
    Some(match m {
        0 => vec![],
        1 => vec![GateOp::Z(q), GateOp::H(q)],
        2 => vec![GateOp::Y(q)],
        _ => vec![GateOp::H(q), GateOp::Z(q)],
    })
}

/// Replaces every rotation with a Clifford+T equivalent where one exists.
/// The operator is preserved up to global phase.
pub fn to_universal(c: &Circuit) -> Circuit {
    let mut ops = Vec::with_capacity(c.len());
    for op in c.ops() {
        let rewritten = match *op {
            GateOp::Rz(q, a) => rz_universal(q, a),
            GateOp::Ry(q, a) => ry_universal(q, a),
            _ => None,
        };
        match rewritten {
            Some(seq) => ops.extend(seq),
            None => ops.push(*op),
        }
    }
    Circuit::from_ops(ops).expect("qubits unchanged")
}

/// Which reference matrix explains a maximizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reference {
    PMax,
    PMaxPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitMatch {
    pub reference: Reference,
    /// `|P⟩ ≃ word |σ·reference⟩`.
    pub word: PauliWord,
}

/// Looks for a Pauli word relating `p` to `σ P_max` or `σ P'_max`, where
/// `σ` sends `0, 1` to `i, j`.
pub fn explain_maximizer(i: usize, j: usize, p: &ParamMatrix, tol: f64) -> Result<Option<OrbitMatch>> {
    let sigma = pair_permutation(i, j)?;
    for (reference, base) in [(Reference::PMax, p_max()), (Reference::PMaxPrime, p_max_prime())] {
        let moved = base.permute_rows(sigma.map());
        if let Some(word) = find_pauli_relation(&moved, p, tol) {
            return Ok(Some(OrbitMatch { reference, word }));
        }
    }
    Ok(None)
}

/// The `(i, j)` whose coset contains `a`, if any.
pub fn pair_of(a: &BitMatrix4) -> Option<(usize, usize)> {
    let perms: Vec<BitMatrix4> = Permutation::all().iter().map(|s| s.matrix()).collect();
    let key = canonical_key(a, &perms);
    maximizer_pairs().into_iter().find(|&(i, j)| {
        let (_, m) = build_m(i, j, default_k(i, j)).expect("valid indices");
        canonical_key(&m, &perms) == key
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyItem {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub items: Vec<VerifyItem>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyItem> {
        self.items.iter().filter(|i| !i.passed)
    }

    fn check(&mut self, name: impl Into<String>, deviation: f64, tolerance: f64) {
        self.items.push(VerifyItem {
            name: name.into(),
            passed: deviation <= tolerance,
            max_deviation: deviation,
            tolerance,
            note: None,
        });
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.check(name, if ok { 0.0 } else { f64::INFINITY }, 0.0);
    }

    fn note(&mut self, note: String) {
        if let Some(last) = self.items.last_mut() {
            last.note = Some(note);
        }
    }
}

/// Seed for the random instances drawn by [`verify_all`].
pub const VERIFY_SEED: u64 = 0x5eed_0f4d;
/// Random instances per property.
pub const VERIFY_SAMPLES: usize = 128;

fn random_params(rng: &mut ChaCha8Rng, full: bool) -> ParamMatrix {
    let mut flat = [0.0; 12];
    for (n, x) in flat.iter_mut().enumerate() {
        *x = if n % 3 == 2 && !full { 0.0 } else { rng.random_range(-PI..PI) };
    }
    ParamMatrix::from_flat(&flat)
}

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> TransvectionWord {
    let len = rng.random_range(1..=max_len);
    TransvectionWord(
        (0..len)
            .map(|_| {
                let i = rng.random_range(0..NUM_QUBITS);
                let j = (i + rng.random_range(1..NUM_QUBITS)) % NUM_QUBITS;
                (i, j)
            })
            .collect(),
    )
}

fn word_circuit(w: &TransvectionWord) -> Circuit {
    let factors: Vec<GateOp> = w.0.iter().map(|&(i, j)| GateOp::cnot(i, j)).collect();
    Circuit::from_product(&factors).expect("valid word")
}

fn perm_op(sigma: &Permutation) -> DenseOp {
    DenseOp::from_columns(|b| b.apply_permutation(sigma.map()))
}

fn phase_dev(a: &StateVector, b: &StateVector) -> f64 {
    let ip = b.inner(a);
    if ip.norm() == 0.0 {
        return f64::INFINITY;
    }
    a.max_deviation(&b.scale(ip / ip.norm()))
}

fn abs_delta_dev(s: &StateVector) -> f64 {
    delta4(s).map(|d| (d.norm() - MAX_ABS_DELTA4).abs()).unwrap_or(f64::INFINITY)
}

/// Checks every identity in this module; failures are report entries.
pub fn verify_all() -> VerifyReport {
    let mut r = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let (m2, a2) = build_m(0, 1, 2).expect("valid indices");
    let psi = psi_max();
    let psi_p = psi_max_prime();

    // named states
    for name in STATE_NAMES {
        let s = named_state(name).expect("registered").state;
        r.check(format!("norm of {name}"), (s.norm_sqr().sqrt() - 1.0).abs(), 1e-14);
    }
    let gram = |vs: &[StateVector]| {
        let mut dev: f64 = 0.0;
        for (a, x) in vs.iter().enumerate() {
            for (b, y) in vs.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((x.inner(y) - want).norm());
            }
        }
        dev
    };
    r.check("u0, u1, u2 orthonormal", gram(&[u0(), u1(), u2()]), 1e-14);
    r.check("v1, v2, v3 orthonormal", gram(&[v1(), v2(), v3()]), 1e-14);
    r.check("w1, w2, w3 orthonormal", gram(&[w1(), w2(), w3()]), 1e-14);
    let bell_dev = u0()
        .max_deviation(&bell_product(Bell::PhiPlus, Bell::PhiPlus))
        .max(u1().max_deviation(&bell_product(Bell::PhiMinus, Bell::PhiMinus)))
        .max(u2().max_deviation(&bell_product(Bell::PsiPlus, Bell::PsiPlus)));
    r.check("u0, u1, u2 are Bell-pair products", bell_dev, 1e-15);
    let l = l_state();
    let sq3 = 3f64.sqrt() / 6.0;
    let mut l_dev = (l[0b0000] - cis(PI / 6.0) * 0.5).norm().max((l[0b1111] - cis(PI / 6.0) * 0.5).norm());
    for b in [0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100] {
        l_dev = l_dev.max((l[b] - cis(-PI / 3.0) * sq3).norm());
    }
    for b in [0b0001, 0b0010, 0b0100, 0b1000, 0b0111, 0b1011, 0b1101, 0b1110] {
        l_dev = l_dev.max(l[b].norm());
    }
    r.check("L in the computational basis", l_dev, 1e-15);

    // ψ_max and ψ'_max
    r.check("psi_max w-expansion", psi.max_deviation(&psi_max_expansion()), 1e-12);
    r.check("psi_max_prime w-expansion", psi_p.max_deviation(&psi_max_prime_expansion()), 1e-12);
    for (name, s) in [("psi_max", &psi), ("psi_max_prime", &psi_p)] {
        let d = delta4(s).unwrap_or(c(f64::NAN, f64::NAN));
        r.check(format!("Delta4({name}) = -1/5038848"), (d - c(-MAX_ABS_DELTA4, 0.0)).norm(), 1e-12);
    }
    for t in GenTarget::ALL {
        let s = t.state();
        r.check(format!("|Delta4({})| = 1/5038848", t.name()), abs_delta_dev(&s), 1e-12);
        if let Ok(d) = delta4(&s) {
            r.note(format!("Delta4 = {:.6e} {:+.3e}i", d.re, d.im));
        }
    }
    let mut zero_dev = [StateVector::zero(), ghz4()]
        .iter()
        .map(|s| delta4(s).map(|d| d.norm()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    for _ in 0..VERIFY_SAMPLES {
        let s = random_params(&mut rng, true).operator().apply(&StateVector::zero());
        zero_dev = zero_dev.max(delta4(&s).map(|d| d.norm()).unwrap_or(f64::INFINITY));
    }
    r.check("Delta4 = 0 on |0000>, GHZ4 and product states", zero_dev, 1e-15);

    // local-unitary links out of ψ_max
    let lu = |p: &ParamMatrix, phi: f64, t: &StateVector| t.l1_distance(&p.operator().apply(&psi).scale(cis(phi)));
    r.check("psi_max -> psi_max_prime residual", lu(&p_psi_to_psi_prime(), PHI_PSI_TO_PSI_PRIME, &psi_p), 1e-12);
    for t in GenTarget::ALL {
        let (p, phi) = t.lu_params();
        r.check(format!("psi_max -> {} residual", t.name()), lu(&p, phi, &t.state()), 1e-10);
    }
    r.check(
        "psi_max_prime ~ (PHP+ x PX x H x PHP+) psi_max",
        phase_dev(&psi_to_psi_prime_operator().apply(&psi), &psi_p),
        1e-12,
    );

    // rotation rewrites
    let (rz, ry) = (SingleQubitGate::rz, SingleQubitGate::ry);
    let (h, z, x, y) = (SingleQubitGate::h(), SingleQubitGate::z(), SingleQubitGate::x(), SingleQubitGate::y());
    let rot_dev = [
        rz(PI).phase_deviation(&z),
        rz(FRAC_PI_2).phase_deviation(&SingleQubitGate::p()),
        rz(-FRAC_PI_2).phase_deviation(&SingleQubitGate::pdg()),
        rz(FRAC_PI_4).phase_deviation(&SingleQubitGate::t()),
        ry(PI).phase_deviation(&y),
        ry(FRAC_PI_2).max_deviation(&(h * z)),
        ry(FRAC_PI_2).max_deviation(&(x * h)),
        ry(-FRAC_PI_2).max_deviation(&(z * h)),
        ry(-FRAC_PI_2).max_deviation(&(h * x)),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    r.check("rotation gates in H, P, T, X, Y, Z", rot_dev, 1e-15);

    // SWAP conjugation
    let perms = Permutation::all();
    let mut cnot_dev: f64 = 0.0;
    let mut local_dev: f64 = 0.0;
    let g = random_params(&mut rng, true).operator().0[0];
    for sigma in &perms {
        let s = perm_op(sigma);
        let s_inv = perm_op(&sigma.inverse());
        for i in 0..NUM_QUBITS {
            for j in (0..NUM_QUBITS).filter(|&j| j != i) {
                let lhs = &(&s * &DenseOp::cnot(i, j)) * &s_inv;
                cnot_dev = cnot_dev.max(lhs.max_deviation(&DenseOp::cnot(sigma.apply(i), sigma.apply(j))));
            }
            let lhs = &(&s * &DenseOp::single(&g, i)) * &s_inv;
            local_dev = local_dev.max(lhs.max_deviation(&DenseOp::single(&g, sigma.apply(i))));
        }
        for v in 0..16u8 {
            let uv = DenseOp::from_columns(|b| b.apply_masked(&g, v));
            let sv = sigma.matrix().mul_vec(v);
            let usv = DenseOp::from_columns(|b| b.apply_masked(&g, sv));
            local_dev = local_dev.max((&(&s * &uv) * &s_inv).max_deviation(&usv));
        }
    }
    r.check("S_s X_[ij] S_s^-1 = X_[s(i)s(j)]", cnot_dev, 1e-12);
    r.check("S_s U_i S_s^-1 = U_s(i) and S_s U_v S_s^-1 = U_sv", local_dev, 1e-12);

    // CNOT circuits act linearly on labels
    let mut lin_ok = true;
    let mut pauli_dev: f64 = 0.0;
    for _ in 0..VERIFY_SAMPLES {
        let w = random_word(&mut rng, 24);
        let a = BitMatrix4::from_word(&w).expect("valid word");
        let circ = word_circuit(&w);
        for xb in 0..16u8 {
            let out = circ.simulate_from(&StateVector::basis_from_bits(xb)).expect("valid");
            lin_ok &= out == StateVector::basis_from_bits(a.mul_vec(xb));
        }
        let (u, v) = (rng.random_range(0..16u8), rng.random_range(0..16u8));
        let xa = circ.operator().expect("valid");
        let lhs = &(&xa * &PauliWord::new(0, u, v).dense()) * &xa.dagger();
        let rhs = PauliWord::new(0, u, v).conjugate_by_cnot(&a).map(|p| p.dense());
        pauli_dev = pauli_dev.max(rhs.map(|d| lhs.max_deviation(&d)).unwrap_or(f64::INFINITY));
    }
    r.flag("X_A|x> = |Ax> on random words", lin_ok);
    r.check("X_A X_u Z_v X_A^-1 = X_Au Z_(A^-t v)", pauli_dev, 1e-12);

    // parameter operations
    let mut lemma_dev: f64 = 0.0;
    let mut cor_dev: f64 = 0.0;
    for n in 0..VERIFY_SAMPLES {
        let p = random_params(&mut rng, false);
        let k = rng.random_range(0..NUM_QUBITS);
        let op = LemmaOp::ALL[n % 3];
        match param_op(&p, k, op) {
            Ok(img) => lemma_dev = lemma_dev.max(img.params.state().max_deviation(&img.word.apply(&p.state()))),
            Err(_) => lemma_dev = f64::INFINITY,
        }
        // random chains applied to the two maximizers
        let base = if n % 2 == 0 { p_max() } else { p_max_prime() };
        let mut q = base;
        for _ in 0..rng.random_range(1..6) {
            let k = rng.random_range(0..NUM_QUBITS);
            q = param_op(&q, k, LemmaOp::ALL[rng.random_range(0..3)]).expect("valid").params;
        }
        let s_base = base.state().apply_linear(&a2);
        let s_q = q.state().apply_linear(&a2);
        cor_dev = cor_dev.max(abs_delta_dev(&s_q));
        match push_through(&a2, &base, &q) {
            Ok(Some(w)) => cor_dev = cor_dev.max(phase_dev(&s_q, &w.apply(&s_base))),
            _ => cor_dev = f64::INFINITY,
        }
    }
    r.check("parameter operations act as -iZ, Z, -iY", lemma_dev, 1e-14);
    r.check("parameter operations keep |Delta4| maximal", cor_dev, 1e-12);

    // worked example
    let mut chain = p_max();
    for (k, op) in [(0, LemmaOp::AlphaPlusPi), (2, LemmaOp::NegBeta), (3, LemmaOp::NegAlphaBetaPlusPi)] {
        chain = param_op(&chain, k, op).expect("valid").params;
    }
    let pe = p_example();
    r.check("example matrix from P_max", max_param_dev(&chain, &pe), 1e-15);
    let x3z023 = PauliWord::new(0, 0b1000, 0b1101);
    r.check("|P_example> ~ X3 Z0 Z2 Z3 |P_max>", phase_dev(&pe.state(), &x3z023.apply(&p_max().state())), 1e-14);
    let pushed = push_through(&a2, &p_max(), &pe).ok().flatten();
    r.flag(
        "example pushed through A_2 gives u = 0111, v = 0100",
        pushed.is_some_and(|w| w.x == 0b1110 && w.z == 0b0010),
    );
    let m_pe = m2.simulate_from(&pe.state()).expect("valid");
    let x123z1 = PauliWord::new(0, 0b1110, 0b0010);
    r.check("M_2 |P_example> ~ X1 X2 X3 Z1 psi_max", phase_dev(&m_pe, &x123z1.apply(&psi)), 1e-14);
    r.flag(
        "P_max and P'_max are not Pauli-related",
        find_pauli_relation(&p_max(), &p_max_prime(), 1e-8).is_none(),
    );

    // cosets of the M operators
    let a3 = build_m(0, 1, 3).expect("valid indices").1;
    let c023 = Permutation::from_cycles(&[&[0, 2, 3]]).expect("valid cycle");
    r.check("A_2 matrix", if a2.hex() == "6bf5" { 0.0 } else { f64::INFINITY }, 0.0);
    r.flag("A_3 = (023) A_2", a3 == c023.matrix().mul(&a2));
    let mut same_dev: f64 = 0.0;
    let perm_mats: Vec<BitMatrix4> = perms.iter().map(|s| s.matrix()).collect();
    let mut keys = Vec::new();
    let mut same_coset = true;
    for (i, j) in maximizer_pairs() {
        let others: Vec<usize> = (0..NUM_QUBITS).filter(|&q| q != i && q != j).collect();
        let (k, l) = (others[0], others[1]);
        let (mk, ak) = build_m(i, j, k).expect("valid");
        let (ml, al) = build_m(i, j, l).expect("valid");
        let cyc = Permutation::from_cycles(&[&[i, k, l]]).expect("valid cycle");
        let lhs = ml.operator().expect("valid");
        let rhs = &perm_op(&cyc) * &mk.operator().expect("valid");
        same_dev = same_dev.max(lhs.max_deviation(&rhs));
        let key = canonical_key(&ak, &perm_mats);
        same_coset &= key == canonical_key(&al, &perm_mats);
        keys.push(key);
    }
    r.check("M_l^(i,j) = S_(ikl) M_k^(i,j)", same_dev, 1e-15);
    r.flag("M_k^(i,j) and M_l^(i,j) share a coset", same_coset);
    let mut distinct = keys.clone();
    distinct.sort_unstable();
    distinct.dedup();
    r.flag("the twelve (i,j) cosets are distinct", distinct.len() == 12);
    let mut conj_ok = true;
    for sigma in &perms {
        let s = sigma.matrix();
        let s_inv = sigma.inverse().matrix();
        for (n, &(i, j)) in maximizer_pairs().iter().enumerate() {
            let (_, a) = build_m(i, j, default_k(i, j)).expect("valid");
            let conj = canonical_key(&s.mul(&a).mul(&s_inv), &perm_mats);
            let target = maximizer_pairs().iter().position(|&p| p == (sigma.apply(i), sigma.apply(j)));
            conj_ok &= target.is_some_and(|t| keys[t] == conj);
            let _ = n;
        }
    }
    r.flag("S_s (i,j) S_s^-1 = (s(i),s(j))", conj_ok);
    let mut sig_dev: f64 = 0.0;
    for (i, j) in maximizer_pairs() {
        let sigma = pair_permutation(i, j).expect("valid");
        let (m, _) = build_m(i, j, sigma.apply(2)).expect("valid");
        for base in [p_max(), p_max_prime()] {
            let s = m.simulate_from(&base.permute_rows(sigma.map()).state()).expect("valid");
            sig_dev = sig_dev.max(abs_delta_dev(&s));
        }
    }
    r.check("M_s(2)^(i,j) |s P_max> maximizes |Delta4|", sig_dev, 1e-12);
    let s013 = Permutation::from_cycles(&[&[0, 1, 3]]).expect("valid cycle");
    let moved = p_max().permute_rows(s013.map());
    let t = theta();
    let want = ParamMatrix::new([[FRAC_PI_4, t, 0.0], [FRAC_PI_2, FRAC_PI_2, 0.0], [FRAC_PI_4, t, 0.0], [FRAC_PI_2, FRAC_PI_2, 0.0]]);
    let (m13, _) = build_m(1, 3, 2).expect("valid");
    let ex_dev = max_param_dev(&moved, &want).max(
        m13.simulate_from(&moved.state())
            .expect("valid")
            .max_deviation(&psi.apply_permutation(s013.map())),
    );
    r.check("(013): M_2^(1,3) |s P_max> = S_s psi_max", ex_dev, 1e-14);

    // circuits
    let quito = CouplingGraph::quito();
    for t in GenTarget::ALL {
        let circ = generation_circuit(t);
        let out = circ.simulate().expect("valid");
        let want = t.state();
        r.check(format!("circuit generates {}", t.name()), phase_dev(&out, &want), 1e-10);
        let uni = to_universal(&circ);
        let out_u = uni.simulate().expect("valid");
        r.check(format!("H/P/T circuit generates {}", t.name()), phase_dev(&out_u, &want), 1e-10);
        let routed = rewrite_for_graph(&uni, &quito).expect("connected");
        let out_r = routed.simulate().expect("valid");
        r.check(format!("quito circuit generates {}", t.name()), phase_dev(&out_r, &want), 1e-10);
        let native = routed.ops().iter().all(|op| match *op {
            GateOp::Cnot { target, control } => quito.has_edge(target, control),
            GateOp::Swap(..) => false,
            _ => true,
        });
        r.flag(format!("quito circuit for {} uses native CNOTs only", t.name()), native);
        let phase = want.inner(&out_u).arg();
        let reported = REPORTED_CIRCUIT_PHASES.iter().find(|(n, _)| *n == t.name()).map(|p| p.1);
        r.note(format!(
            "output = e^{{i({phase:+.6})}}|{}>; reported phase {:+.6} (not checked)",
            t.name(),
            reported.unwrap_or(f64::NAN)
        ));
    }
    let routed = rewrite_for_graph(&m2, &quito).expect("connected");
    r.flag("quito rewrite of M_2^(0,1) uses 11 CNOTs", routed.cnot_count() == 11);
    let op_dev = routed
        .operator()
        .and_then(|a| Ok(a.max_deviation(&m2.operator()?)))
        .unwrap_or(f64::INFINITY);
    r.check("quito rewrite of M_2^(0,1) keeps the operator", op_dev, 1e-12);
    let mut qasm_dev: f64 = 0.0;
    let mut circuits = vec![m2.clone(), routed];
    for t in GenTarget::ALL {
        circuits.push(generation_circuit(t));
        circuits.push(to_universal(&generation_circuit(t)));
    }
    for circ in &circuits {
        let back = parse_qasm(&to_qasm(circ));
        qasm_dev = qasm_dev.max(
            back.and_then(|b| Ok(b.operator()?.max_deviation(&circ.operator()?)))
                .unwrap_or(f64::INFINITY),
        );
    }
    r.check("QASM round trip", qasm_dev, 1e-12);

    // group enumeration
    let group = enumerate_group();
    let table = CosetTable::partition(&group);
    r.flag("|GL(4,2)| = 20160", group.len() == 20160);
    r.flag("840 cosets", table.len() == 840);

    // unnormalized entry point sanity
    let s = psi.scale(c(2.0, 0.0));
    let scaled = delta4_unnormalized(&s, 3).map(|d| (d / 2f64.powi(24) - delta4_unnormalized(&psi, 3).unwrap_or_default()).norm());
    r.check("Delta4 homogeneity", scaled.unwrap_or(f64::INFINITY), 1e-12);

    r
}

fn max_param_dev(a: &ParamMatrix, b: &ParamMatrix) -> f64 {
    a.flat().iter().zip(b.flat().iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
