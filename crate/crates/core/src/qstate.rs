//! Dense 4-qubit statevectors.
//!
//! Amplitudes are indexed by the basis label `i0 i1 i2 i3` at position
//! `8*i0 + 4*i1 + 2*i2 + i3`. Qubit `q` therefore sits at bit `3 - q` of the
//! index. GF(2) vectors that label qubits (masks, Pauli supports, basis
//! columns) are stored as `u8` with component `q` at bit `q`; use
//! [`basis_index`] and [`basis_bits`] to move between the two layouts.
//!
//! Gates are applied by index arithmetic; nothing in here builds a 16×16
//! matrix. See [`crate::dense`] for the reference path.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Index, Mul};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2linear::BitMatrix4;

pub const NUM_QUBITS: usize = 4;
pub const DIM: usize = 1 << NUM_QUBITS;

/// Default per-amplitude comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Slack on `‖s‖² = 1` accepted from callers.
pub const NORM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn check_qubit(q: usize) -> Result<()> {
    if q < NUM_QUBITS {
        Ok(())
    } else {
        Err(Error::QubitOutOfRange(q))
    }
}

#[inline]
fn qubit_mask(q: usize) -> usize {
    1 << (NUM_QUBITS - 1 - q)
}

/// Statevector index of the basis state `|x0 x1 x2 x3⟩`, where `bits` holds
/// `x_q` at bit `q`.
pub fn basis_index(bits: u8) -> usize {
    (0..NUM_QUBITS)
        .filter(|&q| bits >> q & 1 == 1)
        .map(qubit_mask)
        .sum()
}

/// Inverse of [`basis_index`].
pub fn basis_bits(index: usize) -> u8 {
    (0..NUM_QUBITS)
        .filter(|&q| index & qubit_mask(q) != 0)
        .fold(0u8, |acc, q| acc | 1 << q)
}

/// A 2×2 complex matrix acting on one qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitGate(pub [[Complex64; 2]; 2]);

impl SingleQubitGate {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn x() -> Self {
        Self([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> Self {
        Self([[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> Self {
        Self([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn h() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self([[s, s], [s, -s]])
    }

    /// Phase gate `diag(1, i)`.
    pub fn p() -> Self {
        Self([[ONE, ZERO], [ZERO, I]])
    }

    pub fn pdg() -> Self {
        Self([[ONE, ZERO], [ZERO, -I]])
    }

    pub fn t() -> Self {
        Self([[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]])
    }

    /// `exp(-iθX/2)`.
    pub fn rx(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let ms = Complex64::new(0.0, -s);
        Self([[c, ms], [ms, c]])
    }

    /// `exp(-iθY/2)`.
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self([
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ])
    }

    /// `exp(-iθZ/2)`.
    pub fn rz(theta: f64) -> Self {
        Self([
            [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
            [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
        ])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let m = self.0;
        Self([[c * m[0][0], c * m[0][1]], [c * m[1][0], c * m[1][1]]])
    }

    pub fn dagger(&self) -> Self {
        let m = self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// Largest entry-wise deviation from `other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (*self * self.dagger()).max_deviation(&Self::identity()) <= tol
    }

    /// Distance to `other` after removing the best global phase.
    pub fn phase_deviation(&self, other: &Self) -> f64 {
        // ⟨other, self⟩_F / |.| is the optimal phase for unitary pairs
        let mut ip = ZERO;
        for r in 0..2 {
            for c in 0..2 {
                ip += other.0[r][c].conj() * self.0[r][c];
            }
        }
        if ip.norm() == 0.0 {
            return f64::INFINITY;
        }
        let phase = ip / ip.norm();
        self.max_deviation(&other.scale(phase))
    }
}

impl Mul for SingleQubitGate {
    type Output = SingleQubitGate;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        let mut m = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self(m)
    }
}

/// Pure state of four qubits.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amps: [Complex64; DIM],
}

pub type StateVector16 = StateVector;

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > 1e-15 {
                list.entry(&format_args!("|{:04b}⟩", i), a);
            }
        }
        list.finish()
    }
}

impl Index<usize> for StateVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.amps[i]
    }
}

impl StateVector {
    /// `|0000⟩`.
    pub fn zero() -> Self {
        Self::basis(0)
    }

    /// Computational basis state with the given statevector index.
    pub fn basis(index: usize) -> Self {
        let mut amps = [ZERO; DIM];
        amps[index] = ONE;
        Self { amps }
    }

    /// Basis state `|x⟩` for the bit column `x` (component `q` at bit `q`).
    pub fn basis_from_bits(bits: u8) -> Self {
        Self::basis(basis_index(bits))
    }

    /// Wraps amplitudes without normalization checks. Used for intermediate
    /// vectors (superposition terms, homogeneity tests).
    pub fn from_amps_unchecked(amps: [Complex64; DIM]) -> Self {
        Self { amps }
    }

    /// Wraps amplitudes, rejecting vectors that are not unit norm.
    pub fn from_amps(amps: [Complex64; DIM]) -> Result<Self> {
        let s = Self { amps };
        s.check_normalized()?;
        Ok(s)
    }

    pub fn amps(&self) -> &[Complex64; DIM] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() <= NORM_TOL {
            Ok(())
        } else {
            Err(Error::NotNormalized(n))
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        self.scale(Complex64::new(1.0 / n, 0.0))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut amps = self.amps;
        for a in amps.iter_mut() {
            *a *= c;
        }
        Self { amps }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut amps = self.amps;
        for (a, b) in amps.iter_mut().zip(other.amps.iter()) {
            *a += b;
        }
        Self { amps }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Largest amplitude-wise deviation from `other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Sum of the moduli of the amplitudes of `self - other`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .sum()
    }

    /// `U_q s` with `U_q = I^{⊗q} ⊗ g ⊗ I^{⊗(3-q)}`.
    pub fn apply_single(&self, g: &SingleQubitGate, q: usize) -> Result<Self> {
        check_qubit(q)?;
        Ok(self.apply_single_unchecked(g, q))
    }

    fn apply_single_unchecked(&self, g: &SingleQubitGate, q: usize) -> Self {
        let m = qubit_mask(q);
        let mut amps = self.amps;
        let [[g00, g01], [g10, g11]] = g.0;
        for i0 in (0..DIM).filter(|i| i & m == 0) {
            let i1 = i0 | m;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            amps[i0] = g00 * a0 + g01 * a1;
            amps[i1] = g10 * a0 + g11 * a1;
        }
        Self { amps }
    }

    /// `U_v s = Π_q U_q^{v_q}`: applies `g` on every qubit `q` with bit `q`
    /// of `mask` set.
    pub fn apply_masked(&self, g: &SingleQubitGate, mask: u8) -> Self {
        (0..NUM_QUBITS)
            .filter(|&q| mask >> q & 1 == 1)
            .fold(*self, |s, q| s.apply_single_unchecked(g, q))
    }

    /// Applies one single-qubit gate per qubit, i.e. `g0 ⊗ g1 ⊗ g2 ⊗ g3`.
    pub fn apply_local(&self, op: &LocalOperator) -> Self {
        op.0.iter()
            .enumerate()
            .fold(*self, |s, (q, g)| s.apply_single_unchecked(g, q))
    }

    /// CNOT `X_[target control]`: `|x⟩ ↦ |x'⟩` with `x'_target = x_target ⊕ x_control`.
    pub fn apply_cnot(&self, target: usize, control: usize) -> Result<Self> {
        check_qubit(target)?;
        check_qubit(control)?;
        if target == control {
            return Err(Error::SameQubit(target));
        }
        let (mt, mc) = (qubit_mask(target), qubit_mask(control));
        let mut amps = self.amps;
        for i in (0..DIM).filter(|i| i & mc != 0 && i & mt == 0) {
            amps.swap(i, i | mt);
        }
        Ok(Self { amps })
    }

    /// SWAP `S_(ab)`.
    pub fn apply_swap(&self, a: usize, b: usize) -> Result<Self> {
        check_qubit(a)?;
        check_qubit(b)?;
        if a == b {
            return Err(Error::SameQubit(a));
        }
        let (ma, mb) = (qubit_mask(a), qubit_mask(b));
        let mut amps = self.amps;
        for i in (0..DIM).filter(|i| i & ma != 0 && i & mb == 0) {
            amps.swap(i, i ^ ma ^ mb);
        }
        Ok(Self { amps })
    }

    /// CNOT circuit `X_A`: moves the amplitude of `|x⟩` to `|Ax⟩`.
    pub fn apply_linear(&self, a: &BitMatrix4) -> Self {
        let mut amps = [ZERO; DIM];
        for (i, &amp) in self.amps.iter().enumerate() {
            let y = a.mul_vec(basis_bits(i));
            amps[basis_index(y)] = amp;
        }
        Self { amps }
    }

    /// Qubit permutation `S_σ`: the content of qubit `q` moves to qubit `σ(q)`.
    pub fn apply_permutation(&self, sigma: &[usize; NUM_QUBITS]) -> Self {
        let mut amps = [ZERO; DIM];
        for (i, &amp) in self.amps.iter().enumerate() {
            let x = basis_bits(i);
            let y = (0..NUM_QUBITS)
                .filter(|&q| x >> q & 1 == 1)
                .fold(0u8, |acc, q| acc | 1 << sigma[q]);
            amps[basis_index(y)] = amp;
        }
        Self { amps }
    }

    /// Writes the 16-line `re im` state file.
    pub fn write_to<W: Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        writeln!(w, "# 4-qubit state, 16 lines of `re im`")?;
        writeln!(w, "# line k holds the amplitude of |i0 i1 i2 i3> with k = 8*i0 + 4*i1 + 2*i2 + i3")?;
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        for a in &self.amps {
            writeln!(w, "{:e} {:e}", a.re, a.im)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f), comment)
    }

    /// Parses the state file format. The vector must be unit norm.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut amps = Vec::with_capacity(DIM);
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: n + 1, msg };
            let mut it = t.split_whitespace();
            let (re, im) = match (it.next(), it.next(), it.next()) {
                (Some(re), Some(im), None) => (re, im),
                _ => return Err(parse_err(format!("expected `re im`, got `{t}`"))),
            };
            let re: f64 = re.parse().map_err(|e| parse_err(format!("{e}")))?;
            let im: f64 = im.parse().map_err(|e| parse_err(format!("{e}")))?;
            if amps.len() == DIM {
                return Err(parse_err("more than 16 amplitudes".into()));
            }
            amps.push(Complex64::new(re, im));
        }
        if amps.len() != DIM {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected 16 amplitudes, found {}", amps.len()),
            });
        }
        let mut arr = [ZERO; DIM];
        arr.copy_from_slice(&amps);
        Self::from_amps(arr)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// `|⟨s|t⟩| ≥ 1 - tol`, i.e. `s ≃ t` up to a global phase.
pub fn phase_equal(s: &StateVector, t: &StateVector, tol: f64) -> Result<bool> {
    s.check_normalized()?;
    t.check_normalized()?;
    Ok(s.inner(t).norm() >= 1.0 - tol)
}

/// Tensor product of four single-qubit gates, `ops[0] ⊗ ops[1] ⊗ ops[2] ⊗ ops[3]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalOperator(pub [SingleQubitGate; NUM_QUBITS]);

impl LocalOperator {
    pub fn identity() -> Self {
        Self([SingleQubitGate::identity(); NUM_QUBITS])
    }

    pub fn apply(&self, s: &StateVector) -> StateVector {
        s.apply_local(self)
    }
}

/// Angles `(α_k, β_k, α'_k)` for each qubit `k`, in radians.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamMatrix {
    pub rows: [[f64; 3]; NUM_QUBITS],
}

impl ParamMatrix {
    pub const fn new(rows: [[f64; 3]; NUM_QUBITS]) -> Self {
        Self { rows }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Matrix with zero third column from the 8 live angles
    /// `[α0, β0, α1, β1, α2, β2, α3, β3]`.
    pub fn from_live(live: &[f64; 8]) -> Self {
        let mut rows = [[0.0; 3]; NUM_QUBITS];
        for (k, row) in rows.iter_mut().enumerate() {
            row[0] = live[2 * k];
            row[1] = live[2 * k + 1];
        }
        Self { rows }
    }

    pub fn live(&self) -> [f64; 8] {
        let mut v = [0.0; 8];
        for k in 0..NUM_QUBITS {
            v[2 * k] = self.rows[k][0];
            v[2 * k + 1] = self.rows[k][1];
        }
        v
    }

    pub fn from_flat(flat: &[f64; 12]) -> Self {
        let mut rows = [[0.0; 3]; NUM_QUBITS];
        for (k, row) in rows.iter_mut().enumerate() {
            row.copy_from_slice(&flat[3 * k..3 * k + 3]);
        }
        Self { rows }
    }

    pub fn flat(&self) -> [f64; 12] {
        let mut v = [0.0; 12];
        for k in 0..NUM_QUBITS {
            v[3 * k..3 * k + 3].copy_from_slice(&self.rows[k]);
        }
        v
    }

    pub fn alpha(&self, k: usize) -> f64 {
        self.rows[k][0]
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.rows[k][1]
    }

    pub fn alpha_prime(&self, k: usize) -> f64 {
        self.rows[k][2]
    }

    pub fn has_zero_third_column(&self) -> bool {
        self.rows.iter().all(|r| r[2] == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_finite())
    }

    /// `σ·P`: row `k` of `P` becomes row `σ(k)` of the result, matching
    /// `S_σ |P⟩ = |σP⟩`.
    pub fn permute_rows(&self, sigma: &[usize; NUM_QUBITS]) -> Self {
        let mut rows = [[0.0; 3]; NUM_QUBITS];
        for k in 0..NUM_QUBITS {
            rows[sigma[k]] = self.rows[k];
        }
        Self { rows }
    }

    /// Single-qubit amplitudes `(e^{-iα/2} cos(β/2), e^{iα/2} sin(β/2))` of qubit `k`.
    pub fn qubit_amplitudes(&self, k: usize) -> [Complex64; 2] {
        let (a, b) = (self.alpha(k), self.beta(k));
        let (s, c) = (b / 2.0).sin_cos();
        [
            Complex64::from_polar(c, -a / 2.0),
            Complex64::from_polar(s, a / 2.0),
        ]
    }

    /// Product state `|P⟩ = ⊗_k R_z(α_k) R_y(β_k) |0⟩`, with the exact global
    /// phase. The third column is ignored.
    pub fn state(&self) -> StateVector {
        let f: [[Complex64; 2]; NUM_QUBITS] = std::array::from_fn(|k| self.qubit_amplitudes(k));
        let amps = std::array::from_fn(|i| {
            let x = basis_bits(i);
            (0..NUM_QUBITS).fold(ONE, |acc, q| acc * f[q][(x >> q & 1) as usize])
        });
        StateVector { amps }
    }

    /// `U(P) = ⊗_k R_z(α_k) R_y(β_k) R_z(α'_k)`.
    pub fn operator(&self) -> LocalOperator {
        LocalOperator(std::array::from_fn(|k| {
            let [a, b, c] = self.rows[k];
            SingleQubitGate::rz(a) * SingleQubitGate::ry(b) * SingleQubitGate::rz(c)
        }))
    }
}

/// Free-function form of [`ParamMatrix::state`].
pub fn param_state(p: &ParamMatrix) -> StateVector {
    p.state()
}

/// Free-function form of [`ParamMatrix::operator`].
pub fn param_operator(p: &ParamMatrix) -> LocalOperator {
    p.operator()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn idx(s: &str) -> usize {
        usize::from_str_radix(s, 2).unwrap()
    }

    #[test]
    fn hadamard_on_qubit_zero() {
        let s = StateVector::zero().apply_single(&SingleQubitGate::h(), 0).unwrap();
        assert!((s[idx("0000")] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s[idx("1000")] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn z_fixes_zero_and_x_flips() {
        let z = StateVector::zero().apply_single(&SingleQubitGate::z(), 2).unwrap();
        assert_eq!(z, StateVector::zero());
        let x = StateVector::zero().apply_single(&SingleQubitGate::x(), 3).unwrap();
        assert_eq!(x, StateVector::basis(idx("0001")));
    }

    #[test]
    fn single_rejects_bad_index() {
        assert!(matches!(
            StateVector::zero().apply_single(&SingleQubitGate::x(), 4),
            Err(Error::QubitOutOfRange(4))
        ));
    }

    #[test]
    fn masked_application() {
        let x = SingleQubitGate::x();
        assert_eq!(StateVector::zero().apply_masked(&x, 0b1111), StateVector::basis(15));
        let s = ParamMatrix::from_live(&[0.3, 1.1, 0.2, 0.4, 2.0, 0.1, 0.5, 0.9]).state();
        assert_eq!(s.apply_masked(&x, 0), s);
        // v = [1,0,1,0]: qubits 0 and 2
        let b = StateVector::basis(idx("1010"));
        assert_eq!(b.apply_masked(&SingleQubitGate::z(), 0b0101), b);
    }

    #[test]
    fn cnot_moves_amplitude() {
        let s = StateVector::basis(idx("0100"));
        assert_eq!(s.apply_cnot(0, 1).unwrap(), StateVector::basis(idx("1100")));
        let r = ParamMatrix::from_live(&[0.3, 1.1, 0.2, 0.4, 2.0, 0.1, 0.5, 0.9]).state();
        assert_eq!(r.apply_cnot(0, 1).unwrap().apply_cnot(0, 1).unwrap(), r);
        assert!(matches!(r.apply_cnot(2, 2), Err(Error::SameQubit(2))));
    }

    #[test]
    fn swap_matches_three_cnots() {
        assert_eq!(
            StateVector::basis(idx("0100")).apply_swap(0, 1).unwrap(),
            StateVector::basis(idx("1000"))
        );
        for i in 0..DIM {
            let b = StateVector::basis(i);
            let three = b.apply_cnot(0, 1).unwrap().apply_cnot(1, 0).unwrap().apply_cnot(0, 1).unwrap();
            assert_eq!(b.apply_swap(0, 1).unwrap(), three);
            assert_eq!(b.apply_swap(2, 3).unwrap().apply_swap(2, 3).unwrap(), b);
        }
    }

    #[test]
    fn param_state_examples() {
        assert_eq!(ParamMatrix::zero().state(), StateVector::zero());
        let mut p = ParamMatrix::zero();
        p.rows[1] = [0.0, PI, 0.0];
        let s = p.state();
        assert!((s[idx("0100")] - ONE).norm() < 1e-15);
        assert!(s[idx("0000")].norm() < 1e-15);

        let theta = (3f64.sqrt() / 3.0).acos();
        let mut p = ParamMatrix::zero();
        p.rows[2] = [FRAC_PI_4, theta, 0.0];
        let [a0, a1] = p.qubit_amplitudes(2);
        assert!((a0 - Complex64::from_polar((theta / 2.0).cos(), -PI / 8.0)).norm() < 1e-15);
        assert!((a1 - Complex64::from_polar((theta / 2.0).sin(), PI / 8.0)).norm() < 1e-15);
        let s = p.state();
        assert!((s[idx("0000")] - a0).norm() < 1e-15);
        assert!((s[idx("0010")] - a1).norm() < 1e-15);
    }

    #[test]
    fn operator_on_zero_reproduces_state() {
        let p = ParamMatrix::from_live(&[0.3, 1.1, -0.2, 0.4, 2.0, 0.1, 0.5, 5.9]);
        let u = p.operator().apply(&StateVector::zero());
        assert!(u.max_deviation(&p.state()) < 1e-15);
        let id = ParamMatrix::zero().operator();
        for (g, e) in id.0.iter().zip(LocalOperator::identity().0.iter()) {
            assert!(g.max_deviation(e) < 1e-15);
        }
    }

    #[test]
    fn phase_equal_examples() {
        let s = ParamMatrix::from_live(&[0.3, 1.1, -0.2, 0.4, 2.0, 0.1, 0.5, 5.9]).state();
        let t = s.scale(Complex64::from_polar(1.0, 1.234));
        assert!(phase_equal(&s, &t, DEFAULT_TOL).unwrap());
        assert!(phase_equal(&t, &s, DEFAULT_TOL).unwrap());
        assert!(!phase_equal(&StateVector::zero(), &StateVector::basis(1), DEFAULT_TOL).unwrap());
        let bad = StateVector::zero().scale(c(2.0, 0.0));
        assert!(matches!(phase_equal(&bad, &s, DEFAULT_TOL), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn basis_layout_round_trip() {
        for i in 0..DIM {
            assert_eq!(basis_index(basis_bits(i)), i);
        }
        // qubit 0 is the most significant bit
        assert_eq!(basis_index(0b0001), 8);
        assert_eq!(basis_index(0b1000), 1);
    }

    #[test]
    fn permutation_moves_qubits() {
        // S_(01) as a permutation
        let s = StateVector::basis(idx("0100")).apply_permutation(&[1, 0, 2, 3]);
        assert_eq!(s, StateVector::basis(idx("1000")));
        // content of qubit 0 goes to qubit 2 under (023)
        let s = StateVector::basis(idx("1000")).apply_permutation(&[2, 1, 3, 0]);
        assert_eq!(s, StateVector::basis(idx("0010")));
    }

    #[test]
    fn permuted_params_follow_swap() {
        let p = ParamMatrix::from_live(&[0.3, 1.1, -0.2, 0.4, 2.0, 0.1, 0.5, 5.9]);
        let sigma = [3, 0, 1, 2];
        let lhs = p.state().apply_permutation(&sigma);
        let rhs = p.permute_rows(&sigma).state();
        assert!(lhs.max_deviation(&rhs) < 1e-15);
    }

    #[test]
    fn state_file_round_trip() {
        let s = ParamMatrix::from_live(&[0.3, 1.1, -0.2, 0.4, 2.0, 0.1, 0.5, 5.9]).state();
        let mut buf = Vec::new();
        s.write_to(&mut buf, Some("test")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 16);
        let back = StateVector::read_from(text.as_bytes()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn state_file_rejects_bad_input() {
        let short = "1 0\n0 0\n";
        assert!(matches!(StateVector::read_from(short.as_bytes()), Err(Error::Parse { .. })));
        let mut unnorm = String::new();
        for _ in 0..16 {
            unnorm.push_str("1 0\n");
        }
        assert!(matches!(
            StateVector::read_from(unnorm.as_bytes()),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(StateVector::read_from("1 x\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }
}
