//! Four-qubit hyperdeterminant `Δ4` by Schläfli's construction.
//!
//! Slicing the state along one qubit gives a pencil of 2×2×2 tensors
//! `A(x, y) = x·A₀ + y·A₁`. Cayley's 2×2×2 hyperdeterminant of the pencil is
//! a binary quartic in `(x, y)`, and the discriminant of that quartic is
//! proportional to `Δ4`. The proportionality constant [`DELTA4_SCALE`] is
//! fixed so that `Δ4(ψ_max) = -1/(2⁸·3⁹)`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{StateVector, NUM_QUBITS};

/// `κ` in `Δ4 = κ · disc(contract(s, 3))`.
///
/// Calibrated once against `ψ_max` (uncalibrated discriminant
/// `-256/(2⁸·3⁹)`); the calibration test in this module recomputes it.
pub const DELTA4_SCALE: f64 = 1.0 / 256.0;

/// `1/(2⁸·3⁹)`, the largest possible `|Δ4|` on unit vectors.
pub const MAX_ABS_DELTA4: f64 = 1.0 / 5_038_848.0;

/// Qubit contracted by [`delta4`].
pub const DEFAULT_CONTRACTION_QUBIT: usize = 3;

/// Ring operations needed to evaluate Cayley's formula.
pub trait CayleyRing: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn scale(self, k: f64) -> Self;
}

impl CayleyRing for Complex64 {
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// Homogeneous binary form `Σ_p c_p x^{d-p} y^p` of degree `d ≤ 4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryForm {
    degree: usize,
    coeffs: [Complex64; 5],
}

impl BinaryForm {
    /// `a·x + b·y`.
    pub fn linear(a: Complex64, b: Complex64) -> Self {
        let mut coeffs = [Complex64::new(0.0, 0.0); 5];
        coeffs[0] = a;
        coeffs[1] = b;
        Self { degree: 1, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64; 5] {
        &self.coeffs
    }
}

impl Add for BinaryForm {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.degree, rhs.degree);
        let mut coeffs = self.coeffs;
        for (c, r) in coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *c += r;
        }
        Self { degree: self.degree, coeffs }
    }
}

impl Sub for BinaryForm {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

impl Mul for BinaryForm {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let degree = self.degree + rhs.degree;
        assert!(degree <= 4, "binary form degree exceeds 4");
        let mut coeffs = [Complex64::new(0.0, 0.0); 5];
        for i in 0..=self.degree {
            for j in 0..=rhs.degree {
                coeffs[i + j] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        Self { degree, coeffs }
    }
}

impl CayleyRing for BinaryForm {
    fn scale(self, k: f64) -> Self {
        let mut coeffs = self.coeffs;
        for c in coeffs.iter_mut() {
            *c *= k;
        }
        Self { degree: self.degree, coeffs }
    }
}

/// 2×2×2 tensor `a[i][j][k]` with entries in a [`CayleyRing`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor222<T>(pub [[[T; 2]; 2]; 2]);

/// Cayley's hyperdeterminant of format 2×2×2.
pub fn det222<T: CayleyRing>(t: &Tensor222<T>) -> T {
    let a = |i: usize, j: usize, k: usize| t.0[i][j][k];
    let squares = a(0, 0, 0) * a(0, 0, 0) * a(1, 1, 1) * a(1, 1, 1)
        + a(0, 0, 1) * a(0, 0, 1) * a(1, 1, 0) * a(1, 1, 0)
        + a(0, 1, 0) * a(0, 1, 0) * a(1, 0, 1) * a(1, 0, 1)
        + a(1, 0, 0) * a(1, 0, 0) * a(0, 1, 1) * a(0, 1, 1);
    let pairs = a(0, 0, 0) * a(0, 0, 1) * a(1, 1, 0) * a(1, 1, 1)
        + a(0, 0, 0) * a(0, 1, 0) * a(1, 0, 1) * a(1, 1, 1)
        + a(0, 0, 0) * a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 1)
        + a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 1) * a(1, 1, 0)
        + a(0, 0, 1) * a(0, 1, 1) * a(1, 1, 0) * a(1, 0, 0)
        + a(0, 1, 0) * a(0, 1, 1) * a(1, 0, 1) * a(1, 0, 0);
    let cross = a(0, 0, 0) * a(0, 1, 1) * a(1, 0, 1) * a(1, 1, 0) + a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 0) * a(1, 1, 1);
    squares - pairs.scale(2.0) + cross.scale(4.0)
}

/// `q(x, y) = b₀x⁴ + b₁x³y + b₂x²y² + b₃xy³ + b₄y⁴`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryQuartic(pub [Complex64; 5]);

impl BinaryQuartic {
    pub fn invariants(&self) -> (Complex64, Complex64) {
        quartic_invariants(self)
    }

    /// `(4I³ - J²)/27`.
    pub fn discriminant(&self) -> Complex64 {
        let (i, j) = self.invariants();
        (i * i * i * 4.0 - j * j) / 27.0
    }
}

/// Pencil along qubit `q`: entry `(i, j, k)` over the remaining qubits (in
/// increasing order) is `a_{..0..} x + a_{..1..} y`. Returns the quartic
/// `det222(A(x, y))`.
pub fn contract(s: &StateVector, q: usize) -> Result<BinaryQuartic> {
    if q >= NUM_QUBITS {
        return Err(Error::QubitOutOfRange(q));
    }
    let amps = s.amps();
    let others: Vec<usize> = (0..NUM_QUBITS).filter(|&r| r != q).collect();
    let bit = |qubit: usize| 1usize << (NUM_QUBITS - 1 - qubit);
    let entry = |i: usize, j: usize, k: usize| {
        let base = [i, j, k]
            .iter()
            .zip(others.iter())
            .filter(|(v, _)| **v == 1)
            .map(|(_, &o)| bit(o))
            .sum::<usize>();
        BinaryForm::linear(amps[base], amps[base | bit(q)])
    };
    let t = Tensor222(std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| entry(i, j, k)))
    }));
    let f = det222(&t);
    Ok(BinaryQuartic(f.coeffs))
}

/// `(I, J)` with `I = 12b₀b₄ - 3b₁b₃ + b₂²` and
/// `J = 72b₀b₂b₄ - 27b₀b₃² - 27b₁²b₄ + 9b₁b₂b₃ - 2b₂³`.
pub fn quartic_invariants(b: &BinaryQuartic) -> (Complex64, Complex64) {
    let [b0, b1, b2, b3, b4] = b.0;
    let i = b0 * b4 * 12.0 - b1 * b3 * 3.0 + b2 * b2;
    let j = b0 * b2 * b4 * 72.0 - b0 * b3 * b3 * 27.0 - b1 * b1 * b4 * 27.0 + b1 * b2 * b3 * 9.0
        - b2 * b2 * b2 * 2.0;
    (i, j)
}

/// `κ · disc(contract(s, q))` with no normalization check; homogeneous of
/// degree 24 in the amplitudes.
pub fn delta4_unnormalized(s: &StateVector, q: usize) -> Result<Complex64> {
    Ok(contract(s, q)?.discriminant() * DELTA4_SCALE)
}

/// `Δ4(s)` for a unit vector.
pub fn delta4(s: &StateVector) -> Result<Complex64> {
    s.check_normalized()?;
    delta4_unnormalized(s, DEFAULT_CONTRACTION_QUBIT)
}

/// `|Δ4(s)|` without the normalization check, for hot loops whose inputs
/// are unit vectors by construction.
pub fn abs_delta4_fast(s: &StateVector) -> f64 {
    contract(s, DEFAULT_CONTRACTION_QUBIT)
        .expect("default qubit is in range")
        .discriminant()
        .norm()
        * DELTA4_SCALE
}
