//! Pauli group in normal form `i^λ X_u Z_v`.
//!
//! `Y = iXZ` and `XZ = -ZX` make the normal form unique; phases stay exact
//! as `λ mod 4`. Conjugation by a CNOT circuit is linear on the supports:
//! `X_A X_u Z_v X_A⁻¹ = X_{Au} Z_{A^{-t}v}`.
//!
//! The second half of the module covers the three operations on parameter
//! matrices that act on `|P⟩` as Pauli gates:
//!
//! | operation              | effect on `|P⟩` |
//! |------------------------|-----------------|
//! | `α_k ← α_k + π`        | `-i Z_k`        |
//! | `β_k ← -β_k`           | `Z_k`           |
//! | `α_k ← -α_k, β_k ← β_k + π` | `-i Y_k`   |

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::DenseOp;
use crate::error::{Error, Result};
use crate::f2linear::BitMatrix;
use crate::qstate::{phase_equal, ParamMatrix, SingleQubitGate, StateVector, NUM_QUBITS};

/// Tolerance used by [`push_through`].
pub const PUSH_THROUGH_TOL: f64 = 1e-10;

/// `i^λ X_u Z_v` on `N` qubits; `u`, `v` carry component `q` at bit `q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliWord<const N: usize = 4> {
    pub phase: u8,
    pub x: u8,
    pub z: u8,
}

impl<const N: usize> fmt::Debug for PauliWord<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<const N: usize> fmt::Display for PauliWord<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = ["", "i·", "-", "-i·"][self.phase as usize];
        write!(f, "{phase}")?;
        let mut any = false;
        for q in (0..N).filter(|q| self.x >> q & 1 == 1) {
            write!(f, "X{q}")?;
            any = true;
        }
        for q in (0..N).filter(|q| self.z >> q & 1 == 1) {
            write!(f, "Z{q}")?;
            any = true;
        }
        if !any {
            write!(f, "I")?;
        }
        Ok(())
    }
}

fn dot(a: u8, b: u8) -> u8 {
    ((a & b).count_ones() & 1) as u8
}

impl<const N: usize> PauliWord<N> {
    pub fn new(phase: u8, x: u8, z: u8) -> Self {
        let mask = if N >= 8 { u8::MAX } else { (1u8 << N) - 1 };
        Self {
            phase: phase % 4,
            x: x & mask,
            z: z & mask,
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn x(q: usize) -> Self {
        Self::new(0, 1 << q, 0)
    }

    pub fn z(q: usize) -> Self {
        Self::new(0, 0, 1 << q)
    }

    /// `Y_q = i X_q Z_q`.
    pub fn y(q: usize) -> Self {
        Self::new(1, 1 << q, 1 << q)
    }

    pub fn with_phase(self, phase: u8) -> Self {
        Self::new(phase, self.x, self.z)
    }

    /// `i^λ` as a complex number.
    pub fn phase_factor(&self) -> Complex64 {
        [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][self.phase as usize]
    }

    /// `self · other`; moving `Z_{v_p}` past `X_{u_q}` costs `(-1)^{v_p·u_q}`.
    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.phase + other.phase + 2 * dot(self.z, other.x),
            self.x ^ other.x,
            self.z ^ other.z,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::new(4 - self.phase + 2 * dot(self.x, self.z), self.x, self.z)
    }

    /// `X_A (i^λ X_u Z_v) X_A⁻¹ = i^λ X_{Au} Z_{A^{-t} v}`.
    pub fn conjugate_by_cnot(&self, a: &BitMatrix<N>) -> Result<Self> {
        let it = a.inv_transpose()?;
        Ok(Self::new(self.phase, a.mul_vec(self.x), it.mul_vec(self.z)))
    }
}

/// Free-function form of [`PauliWord::mul`].
pub fn pauli_mul(p: &PauliWord, q: &PauliWord) -> PauliWord {
    p.mul(q)
}

/// Free-function form of [`PauliWord::conjugate_by_cnot`].
pub fn conjugate_by_cnot(a: &BitMatrix<4>, p: &PauliWord) -> Result<PauliWord> {
    p.conjugate_by_cnot(a)
}

impl PauliWord<4> {
    /// Applies the operator to a statevector.
    pub fn apply(&self, s: &StateVector) -> StateVector {
        s.apply_masked(&SingleQubitGate::z(), self.z)
            .apply_masked(&SingleQubitGate::x(), self.x)
            .scale(self.phase_factor())
    }

    /// Dense 16×16 matrix `i^λ (⊗ X^{u_q}) (⊗ Z^{v_q})`.
    pub fn dense(&self) -> DenseOp {
        let pick = |bits: u8, g: SingleQubitGate| {
            std::array::from_fn(|q| if bits >> q & 1 == 1 { g } else { SingleQubitGate::identity() })
        };
        let xs = DenseOp::kron4(&pick(self.x, SingleQubitGate::x()));
        let zs = DenseOp::kron4(&pick(self.z, SingleQubitGate::z()));
        (&xs * &zs).scale(self.phase_factor())
    }
}

/// The three Pauli-realizing operations on a parameter matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaOp {
    /// `α_k ← α_k + π`, acting as `-i Z_k`.
    AlphaPlusPi,
    /// `β_k ← -β_k`, acting as `Z_k`.
    NegBeta,
    /// `α_k ← -α_k, β_k ← β_k + π`, acting as `-i Y_k`.
    NegAlphaBetaPlusPi,
}

impl LemmaOp {
    pub const ALL: [LemmaOp; 3] = [LemmaOp::AlphaPlusPi, LemmaOp::NegBeta, LemmaOp::NegAlphaBetaPlusPi];
}

/// A transformed parameter matrix together with the exact Pauli operator
/// (phase included) relating the two product states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaImage {
    pub params: ParamMatrix,
    pub word: PauliWord,
}

/// Applies `op` to row `k` of `p`; `|image.params⟩ = image.word |p⟩` exactly.
pub fn param_op(p: &ParamMatrix, k: usize, op: LemmaOp) -> Result<LemmaImage> {
    if k >= NUM_QUBITS {
        return Err(Error::QubitOutOfRange(k));
    }
    if !p.has_zero_third_column() {
        return Err(Error::NonZeroThirdColumn);
    }
    let mut params = *p;
    let row = &mut params.rows[k];
    let word = match op {
        LemmaOp::AlphaPlusPi => {
            row[0] += PI;
            PauliWord::z(k).with_phase(3)
        }
        LemmaOp::NegBeta => {
            row[1] = -row[1];
            PauliWord::z(k)
        }
        LemmaOp::NegAlphaBetaPlusPi => {
            row[0] = -row[0];
            row[1] += PI;
            // -i Y = -i · i X Z = X Z
            PauliWord::new(0, 1 << k, 1 << k)
        }
    };
    Ok(LemmaImage { params, word })
}

/// Finds `X_u Z_v` with `|p2⟩ ≃ X_u Z_v |p1⟩`, scanning all 256 `(u, v)`
/// pairs in order, `u` outer. The returned phase is the quarter turn
/// nearest to the observed overlap phase.
pub fn find_pauli_relation(p1: &ParamMatrix, p2: &ParamMatrix, tol: f64) -> Option<PauliWord> {
    let s1 = p1.state();
    let s2 = p2.state();
    for u in 0..16u8 {
        for v in 0..16u8 {
            let w = PauliWord::new(0, u, v);
            let cand = w.apply(&s1);
            if phase_equal(&cand, &s2, tol).unwrap_or(false) {
                let overlap = cand.inner(&s2);
                let quarter = (overlap.arg() / FRAC_PI_2).round().rem_euclid(4.0) as u8;
                return Some(w.with_phase(quarter));
            }
        }
    }
    None
}

/// If `|p2⟩ ≃ X_u Z_v |p1⟩`, returns the word pushed through the CNOT
/// circuit, `X_{Au} Z_{A^{-t}v}`, so that `X_A|p2⟩ ≃ X_{Au} Z_{A^{-t}v} X_A|p1⟩`.
pub fn push_through(a: &BitMatrix<4>, p1: &ParamMatrix, p2: &ParamMatrix) -> Result<Option<PauliWord>> {
    push_through_with_tol(a, p1, p2, PUSH_THROUGH_TOL)
}

pub fn push_through_with_tol(
    a: &BitMatrix<4>,
    p1: &ParamMatrix,
    p2: &ParamMatrix,
    tol: f64,
) -> Result<Option<PauliWord>> {
    let a_it = a.inv_transpose()?;
    Ok(find_pauli_relation(p1, p2, tol).map(|w| PauliWord::new(w.phase, a.mul_vec(w.x), a_it.mul_vec(w.z))))
}
