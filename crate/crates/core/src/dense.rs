//! Slow 16×16 reference operators.
//!
//! Every operator here is assembled from Kronecker products of 2×2 blocks,
//! never from the index arithmetic in [`crate::qstate`], so the two paths
//! can check each other.

use std::ops::Mul;

use num_complex::Complex64;

use crate::qstate::{SingleQubitGate, StateVector, DIM, NUM_QUBITS};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 16×16 complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOp {
    m: Vec<Complex64>,
}

impl DenseOp {
    pub fn identity() -> Self {
        let mut m = vec![ZERO; DIM * DIM];
        for i in 0..DIM {
            m[i * DIM + i] = ONE;
        }
        Self { m }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.m[r * DIM + c]
    }

    /// `f[0] ⊗ f[1] ⊗ f[2] ⊗ f[3]`.
    pub fn kron4(f: &[SingleQubitGate; NUM_QUBITS]) -> Self {
        let mut cur: Vec<Complex64> = vec![ONE];
        let mut n = 1;
        for g in f {
            let mut next = vec![ZERO; 4 * n * n];
            let w = 2 * n;
            for r in 0..n {
                for c in 0..n {
                    let a = cur[r * n + c];
                    for gr in 0..2 {
                        for gc in 0..2 {
                            next[(2 * r + gr) * w + 2 * c + gc] = a * g.0[gr][gc];
                        }
                    }
                }
            }
            cur = next;
            n = w;
        }
        Self { m: cur }
    }

    /// `I^{⊗q} ⊗ g ⊗ I^{⊗(3-q)}`.
    pub fn single(g: &SingleQubitGate, q: usize) -> Self {
        let mut f = [SingleQubitGate::identity(); NUM_QUBITS];
        f[q] = *g;
        Self::kron4(&f)
    }

    /// `X_[target control] = |0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t`.
    pub fn cnot(target: usize, control: usize) -> Self {
        let p0 = SingleQubitGate::new([[ONE, ZERO], [ZERO, ZERO]]);
        let p1 = SingleQubitGate::new([[ZERO, ZERO], [ZERO, ONE]]);
        let mut a = [SingleQubitGate::identity(); NUM_QUBITS];
        a[control] = p0;
        let mut b = [SingleQubitGate::identity(); NUM_QUBITS];
        b[control] = p1;
        b[target] = SingleQubitGate::x();
        Self::kron4(&a).add(&Self::kron4(&b))
    }

    /// `S_(ab) = X_[ab] X_[ba] X_[ab]`.
    pub fn swap(a: usize, b: usize) -> Self {
        &(&Self::cnot(a, b) * &Self::cnot(b, a)) * &Self::cnot(a, b)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: self.m.iter().zip(other.m.iter()).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            m: self.m.iter().map(|a| a * c).collect(),
        }
    }

    pub fn dagger(&self) -> Self {
        let mut m = vec![ZERO; DIM * DIM];
        for r in 0..DIM {
            for c in 0..DIM {
                m[c * DIM + r] = self.m[r * DIM + c].conj();
            }
        }
        Self { m }
    }

    /// Matrix whose column `c` is `f(|c⟩)`.
    pub fn from_columns(f: impl Fn(&StateVector) -> StateVector) -> Self {
        let mut m = vec![ZERO; DIM * DIM];
        for c in 0..DIM {
            let col = f(&StateVector::basis(c));
            for r in 0..DIM {
                m[r * DIM + c] = col[r];
            }
        }
        Self { m }
    }

    pub fn apply(&self, s: &StateVector) -> StateVector {
        let amps = std::array::from_fn(|r| (0..DIM).map(|c| self.m[r * DIM + c] * s[c]).sum());
        StateVector::from_amps_unchecked(amps)
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from `other` after removing the best global phase.
    pub fn phase_deviation(&self, other: &Self) -> f64 {
        let ip: Complex64 = self.m.iter().zip(other.m.iter()).map(|(a, b)| b.conj() * a).sum();
        if ip.norm() == 0.0 {
            return f64::INFINITY;
        }
        self.max_deviation(&other.scale(ip / ip.norm()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self * &self.dagger()).max_deviation(&Self::identity()) <= tol
    }
}

impl Mul for &DenseOp {
    type Output = DenseOp;

    fn mul(self, rhs: &DenseOp) -> DenseOp {
        let mut m = vec![ZERO; DIM * DIM];
        for r in 0..DIM {
            for k in 0..DIM {
                let a = self.m[r * DIM + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..DIM {
                    m[r * DIM + c] += a * rhs.m[k * DIM + c];
                }
            }
        }
        DenseOp { m }
    }
}
