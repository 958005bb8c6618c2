//! Linear algebra over GF(2) and the CNOT group.
//!
//! A CNOT circuit `X_A` on `n` qubits acts on basis states by `|x⟩ ↦ |Ax⟩`
//! for an invertible bit matrix `A`, and `X_[ij] ↦ [ij] = I + E_ij` is a
//! group isomorphism onto GL(n, F2). Qubit permutations form the subgroup
//! of permutation matrices; its right cosets `{σA}` are the classes of CNOT
//! circuits that agree up to relabeling the output qubits.
//!
//! Everything is written for `N ≤ 8` with `N = 4` as the default.
//!
//! Vectors of GF(2)^N are `u8` with component `i` at bit `i`. Row `i` of a
//! [`BitMatrix`] stores entry `(i, j)` at bit `j`.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Invertible-or-not N×N matrix over GF(2).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMatrix<const N: usize = 4> {
    rows: [u8; N],
}

pub type BitMatrix4 = BitMatrix<4>;

impl<const N: usize> fmt::Debug for BitMatrix<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..N).map(|i| self.row_string(i)).collect();
        write!(f, "[{}]", rows.join(" "))
    }
}

impl<const N: usize> fmt::Display for BitMatrix<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..N {
            writeln!(f, "{}", self.row_string(i))?;
        }
        Ok(())
    }
}

impl<const N: usize> BitMatrix<N> {
    pub fn identity() -> Self {
        Self {
            rows: std::array::from_fn(|i| 1 << i),
        }
    }

    pub fn zero() -> Self {
        Self { rows: [0; N] }
    }

    /// Raw rows, entry `(i, j)` at bit `j` of `rows[i]`.
    pub fn from_raw_rows(rows: [u8; N]) -> Self {
        let mask = Self::row_mask();
        Self {
            rows: rows.map(|r| r & mask),
        }
    }

    pub fn raw_rows(&self) -> [u8; N] {
        self.rows
    }

    /// Rows written as in print, e.g. `["0110", "1011", "1111", "0101"]`.
    pub fn from_row_strings(rows: [&str; N]) -> Result<Self> {
        let mut out = [0u8; N];
        for (i, s) in rows.iter().enumerate() {
            if s.len() != N || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("bad matrix row `{s}`"),
                });
            }
            for (j, ch) in s.chars().enumerate() {
                if ch == '1' {
                    out[i] |= 1 << j;
                }
            }
        }
        Ok(Self { rows: out })
    }

    pub fn row_string(&self, i: usize) -> String {
        (0..N)
            .map(|j| if self.get(i, j) { '1' } else { '0' })
            .collect()
    }

    fn row_mask() -> u8 {
        if N >= 8 {
            u8::MAX
        } else {
            (1u8 << N) - 1
        }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    /// Transvection `[ij] = I + E_ij`; left multiplication adds row `j` to row `i`.
    pub fn transvection(i: usize, j: usize) -> Result<Self> {
        if i >= N {
            return Err(Error::QubitOutOfRange(i));
        }
        if j >= N {
            return Err(Error::QubitOutOfRange(j));
        }
        if i == j {
            return Err(Error::SameQubit(i));
        }
        let mut m = Self::identity();
        m.rows[i] |= 1 << j;
        Ok(m)
    }

    /// `A v`.
    pub fn mul_vec(&self, v: u8) -> u8 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, r)| acc | (((r & v).count_ones() & 1) as u8) << i)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let rows = std::array::from_fn(|i| {
            (0..N)
                .filter(|&k| self.get(i, k))
                .fold(0u8, |acc, k| acc ^ other.rows[k])
        });
        Self { rows }
    }

    pub fn transpose(&self) -> Self {
        let rows = std::array::from_fn(|i| {
            (0..N)
                .filter(|&j| self.get(j, i))
                .fold(0u8, |acc, j| acc | 1 << j)
        });
        Self { rows }
    }

    /// Gauss-Jordan inverse over GF(2).
    pub fn inverse(&self) -> Result<Self> {
        let mut a = self.rows;
        let mut inv = Self::identity().rows;
        for col in 0..N {
            let pivot = (col..N).find(|&r| a[r] >> col & 1 == 1).ok_or(Error::Singular)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..N {
                if r != col && a[r] >> col & 1 == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Ok(Self { rows: inv })
    }

    /// `A^{-t} = (A^{-1})^t`.
    pub fn inv_transpose(&self) -> Result<Self> {
        Ok(self.inverse()?.transpose())
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse().is_ok()
    }

    /// Row-major encoding: row 0 in the most significant `N` bits, column 0
    /// the most significant bit of each row (so the hex form reads like the
    /// printed matrix).
    pub fn encode(&self) -> u64 {
        (0..N).fold(0u64, |acc, i| {
            let row = (0..N).fold(0u64, |r, j| r << 1 | self.get(i, j) as u64);
            acc << N | row
        })
    }

    pub fn hex(&self) -> String {
        let digits = (N * N).div_ceil(4);
        format!("{:0width$x}", self.encode(), width = digits)
    }

    /// Permutation matrix: `a_ij = 1` iff `i = σ(j)`.
    pub fn permutation(sigma: &Permutation<N>) -> Self {
        let mut rows = [0u8; N];
        for j in 0..N {
            rows[sigma.apply(j)] |= 1 << j;
        }
        Self { rows }
    }

    /// Evaluates `[i1 j1][i2 j2]···[ip jp]`.
    pub fn from_word(word: &TransvectionWord) -> Result<Self> {
        word.0.iter().try_fold(Self::identity(), |acc, &(i, j)| {
            Ok(acc.mul(&Self::transvection(i, j)?))
        })
    }
}

/// Free-function form of [`BitMatrix::transvection`].
pub fn transvection(i: usize, j: usize) -> Result<BitMatrix4> {
    BitMatrix4::transvection(i, j)
}

/// Free-function form of [`BitMatrix::permutation`].
pub fn permutation_matrix(sigma: &Permutation) -> BitMatrix4 {
    BitMatrix4::permutation(sigma)
}

/// Bijection of `{0, .., N-1}`; `map[i] = σ(i)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Permutation<const N: usize = 4> {
    map: [usize; N],
}

impl<const N: usize> Permutation<N> {
    pub fn identity() -> Self {
        Self {
            map: std::array::from_fn(|i| i),
        }
    }

    pub fn new(map: [usize; N]) -> Result<Self> {
        let mut seen = [false; N];
        for &m in &map {
            if m >= N || seen[m] {
                return Err(Error::NotAPermutation(map.to_vec()));
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    /// Product of cycles, rightmost applied first; `&[&[0, 2, 3]]` is `(023)`.
    pub fn from_cycles(cycles: &[&[usize]]) -> Result<Self> {
        let mut out = Self::identity();
        for cycle in cycles.iter().rev() {
            let mut map: [usize; N] = std::array::from_fn(|i| i);
            let mut seen = [false; N];
            for (k, &a) in cycle.iter().enumerate() {
                if a >= N || seen[a] {
                    return Err(Error::NotAPermutation(cycle.to_vec()));
                }
                seen[a] = true;
                map[a] = cycle[(k + 1) % cycle.len()];
            }
            out = Self { map }.compose(&out);
        }
        Ok(out)
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn map(&self) -> &[usize; N] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut map = [0; N];
        for (i, &m) in self.map.iter().enumerate() {
            map[m] = i;
        }
        Self { map }
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            map: std::array::from_fn(|i| self.map[other.map[i]]),
        }
    }

    /// All `N!` permutations in lexicographic order of their image lists.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: [usize; N] = std::array::from_fn(|i| i);
        loop {
            out.push(Self { map: cur });
            // next lexicographic permutation
            let Some(i) = (0..N.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                break;
            };
            let j = (i + 1..N).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }

    pub fn matrix(&self) -> BitMatrix<N> {
        BitMatrix::permutation(self)
    }
}

/// Ordered transvections `[(i1, j1), .., (ip, jp)]`, each `[ij]` = CNOT with
/// target `i` and control `j`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
pub struct TransvectionWord(pub Vec<(usize, usize)>);

impl TransvectionWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Minimal length first, then lexicographic in generator order.
    fn shortlex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

/// The generators `[ij]`, ordered `(0,1), (0,2), .., (N-1, N-2)`.
pub fn generators<const N: usize>() -> Vec<(usize, usize)> {
    (0..N)
        .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// Every element of GL(N, F2) with its shortlex-minimal transvection word.
#[derive(Clone, Debug)]
pub struct GroupTable<const N: usize = 4> {
    elements: Vec<(BitMatrix<N>, TransvectionWord)>,
    index: HashMap<BitMatrix<N>, usize>,
}

impl<const N: usize> GroupTable<N> {
    /// Breadth-first search from `I`, extending words on the right in
    /// generator order. Discovery order within a layer follows the shortlex
    /// order of words, so the first word found for each element is the
    /// lexicographically smallest among its minimal-length words.
    pub fn enumerate() -> Self {
        let gens: Vec<((usize, usize), BitMatrix<N>)> = generators::<N>()
            .into_iter()
            .map(|g| (g, BitMatrix::transvection(g.0, g.1).expect("valid generator")))
            .collect();
        let id = BitMatrix::identity();
        let mut elements = vec![(id, TransvectionWord::default())];
        let mut index = HashMap::from([(id, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            let (a, word) = elements[k].clone();
            for (g, t) in &gens {
                let b = a.mul(t);
                if index.contains_key(&b) {
                    continue;
                }
                let mut w = word.clone();
                w.0.push(*g);
                index.insert(b, elements.len());
                queue.push_back(elements.len());
                elements.push((b, w));
            }
        }
        Self { elements, index }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn word(&self, a: &BitMatrix<N>) -> Option<&TransvectionWord> {
        self.index.get(a).map(|&k| &self.elements[k].1)
    }

    pub fn contains(&self, a: &BitMatrix<N>) -> bool {
        self.index.contains_key(a)
    }

    /// Elements in BFS order.
    pub fn iter(&self) -> impl Iterator<Item = &(BitMatrix<N>, TransvectionWord)> {
        self.elements.iter()
    }
}

/// Free-function form of [`GroupTable::enumerate`] for GL(4, F2).
pub fn enumerate_group() -> GroupTable<4> {
    GroupTable::enumerate()
}

/// Order of GL(n, F2): `2^{n(n-1)/2} Π_{i=1..n} (2^i - 1)`.
pub fn gl_order(n: u32) -> u64 {
    (1..=n).fold(1u64 << (n * (n - 1) / 2), |acc, i| acc * ((1u64 << i) - 1))
}

/// Canonical key of the right coset `{σA}`: the smallest [`BitMatrix::encode`]
/// over all permutation matrices `σ`.
pub fn canonical_key<const N: usize>(a: &BitMatrix<N>, perms: &[BitMatrix<N>]) -> u64 {
    perms.iter().map(|s| s.mul(a).encode()).min().expect("non-empty")
}

/// One right coset of the permutation subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetRecord<const N: usize = 4> {
    pub index: usize,
    pub key: u64,
    pub word: TransvectionWord,
    pub matrix: BitMatrix<N>,
    pub survivor: bool,
    pub maximizer: bool,
}

impl<const N: usize> CosetRecord<N> {
    pub fn key_hex(&self) -> String {
        let digits = (N * N).div_ceil(4);
        format!("{:0width$x}", self.key, width = digits)
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CosetRecordJson {
    pub key: String,
    pub word: Vec<[usize; 2]>,
    pub length: usize,
    pub survivor: bool,
    pub maximizer: bool,
}

/// The partition of GL(N, F2) into right cosets `{σA}`.
///
/// Records are ordered by their representative word (shortlex), so the
/// identity coset has index 0.
#[derive(Clone, Debug)]
pub struct CosetTable<const N: usize = 4> {
    records: Vec<CosetRecord<N>>,
    by_key: HashMap<u64, usize>,
    perms: Vec<BitMatrix<N>>,
}

impl<const N: usize> CosetTable<N> {
    pub fn partition(group: &GroupTable<N>) -> Self {
        let perms: Vec<BitMatrix<N>> = Permutation::<N>::all().iter().map(|p| p.matrix()).collect();
        let mut best: HashMap<u64, (TransvectionWord, BitMatrix<N>)> = HashMap::new();
        for (a, w) in group.iter() {
            let key = canonical_key(a, &perms);
            match best.get(&key) {
                Some((bw, _)) if bw.shortlex_cmp(w).is_le() => {}
                _ => {
                    best.insert(key, (w.clone(), *a));
                }
            }
        }
        let mut records: Vec<CosetRecord<N>> = best
            .into_iter()
            .map(|(key, (word, matrix))| CosetRecord {
                index: 0,
                key,
                word,
                matrix,
                survivor: false,
                maximizer: false,
            })
            .collect();
        records.sort_by(|a, b| a.word.shortlex_cmp(&b.word).then(a.key.cmp(&b.key)));
        let mut by_key = HashMap::with_capacity(records.len());
        for (i, r) in records.iter_mut().enumerate() {
            r.index = i;
            by_key.insert(r.key, i);
        }
        Self { records, by_key, perms }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CosetRecord<N>] {
        &self.records
    }

    pub fn record(&self, index: usize) -> Option<&CosetRecord<N>> {
        self.records.get(index)
    }

    pub fn set_survivor(&mut self, index: usize, flag: bool) {
        self.records[index].survivor = flag;
    }

    pub fn set_maximizer(&mut self, index: usize, flag: bool) {
        self.records[index].maximizer = flag;
    }

    pub fn key_of(&self, a: &BitMatrix<N>) -> u64 {
        canonical_key(a, &self.perms)
    }

    /// Index of the coset containing `a`, if `a` is invertible.
    pub fn coset_of(&self, a: &BitMatrix<N>) -> Option<usize> {
        self.by_key.get(&self.key_of(a)).copied()
    }

    /// The `N!` members `σA` of a coset.
    pub fn members(&self, index: usize) -> Vec<BitMatrix<N>> {
        let a = self.records[index].matrix;
        self.perms.iter().map(|s| s.mul(&a)).collect()
    }

    /// Coset containing `σAσ⁻¹` for any member `A` of coset `index`.
    pub fn conjugate(&self, index: usize, sigma: &Permutation<N>) -> usize {
        let s = sigma.matrix();
        let s_inv = sigma.inverse().matrix();
        let c = s.mul(&self.records[index].matrix).mul(&s_inv);
        self.coset_of(&c).expect("conjugate of an invertible matrix is invertible")
    }

    pub fn to_json_records(&self) -> Vec<CosetRecordJson> {
        self.records
            .iter()
            .map(|r| CosetRecordJson {
                key: r.key_hex(),
                word: r.word.0.iter().map(|&(i, j)| [i, j]).collect(),
                length: r.word.len(),
                survivor: r.survivor,
                maximizer: r.maximizer,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_json_records())?)
    }
}

/// Free-function form of [`CosetTable::partition`].
pub fn coset_partition(group: &GroupTable<4>) -> CosetTable<4> {
    CosetTable::partition(group)
}

/// Free-function form of [`CosetTable::conjugate`].
pub fn coset_conjugate(table: &CosetTable<4>, index: usize, sigma: &Permutation) -> usize {
    table.conjugate(index, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> BitMatrix4 {
        BitMatrix4::from_row_strings(["0110", "1011", "1111", "0101"]).unwrap()
    }

    #[test]
    fn transvection_layout() {
        let t = transvection(0, 1).unwrap();
        assert_eq!(t, BitMatrix4::from_row_strings(["1100", "0100", "0010", "0001"]).unwrap());
        assert_eq!(t.mul(&t), BitMatrix4::identity());
        assert!(matches!(transvection(2, 2), Err(Error::SameQubit(2))));
        assert!(matches!(transvection(0, 4), Err(Error::QubitOutOfRange(4))));
    }

    #[test]
    fn transvection_adds_rows() {
        let m = a2();
        let r = transvection(2, 0).unwrap().mul(&m);
        assert_eq!(r.raw_rows()[2], m.raw_rows()[2] ^ m.raw_rows()[0]);
        assert_eq!(r.raw_rows()[0], m.raw_rows()[0]);
    }

    #[test]
    fn worked_example_word() {
        let w = TransvectionWord(vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 1)]);
        assert_eq!(BitMatrix4::from_word(&w).unwrap(), a2());
    }

    #[test]
    fn inverse_and_inv_transpose() {
        assert_eq!(BitMatrix4::identity().inverse().unwrap(), BitMatrix4::identity());
        let expect = BitMatrix4::from_row_strings(["1010", "1111", "0111", "1001"]).unwrap();
        assert_eq!(a2().inv_transpose().unwrap(), expect);
        assert_eq!(a2().mul(&a2().inverse().unwrap()), BitMatrix4::identity());
        let singular = BitMatrix4::from_row_strings(["1100", "1100", "0010", "0001"]).unwrap();
        assert!(matches!(singular.inverse(), Err(Error::Singular)));
        for p in Permutation::<4>::all() {
            assert_eq!(p.matrix().inverse().unwrap(), p.matrix().transpose());
        }
    }

    #[test]
    fn mul_vec_example() {
        // A u with u = [0,0,0,1]^t is [0,1,1,1]^t
        assert_eq!(a2().mul_vec(0b1000), 0b1110);
        // A^{-t} v with v = [1,0,1,1]^t is [0,1,0,0]^t
        assert_eq!(a2().inv_transpose().unwrap().mul_vec(0b1101), 0b0010);
    }

    #[test]
    fn permutation_matrices() {
        assert_eq!(Permutation::<4>::identity().matrix(), BitMatrix4::identity());
        let c = Permutation::from_cycles(&[&[0, 2, 3]]).unwrap();
        assert_eq!(c.map(), &[2, 1, 3, 0]);
        let a3 = BitMatrix4::from_row_strings(["0101", "1011", "0110", "1111"]).unwrap();
        assert_eq!(c.matrix().mul(&a2()), a3);
        let t = Permutation::<4>::from_cycles(&[&[0, 1]]).unwrap().matrix();
        assert_eq!(t.mul(&t), BitMatrix4::identity());
        assert!(Permutation::<4>::new([0, 0, 1, 2]).is_err());
        assert!(Permutation::<4>::new([0, 1, 2, 4]).is_err());
        assert_eq!(Permutation::<4>::all().len(), 24);
    }

    #[test]
    fn permutation_replaces_rows() {
        // row i of σA is row σ^{-1}(i) of A
        let s = Permutation::<4>::new([1, 3, 0, 2]).unwrap();
        let b = s.matrix().mul(&a2());
        for i in 0..4 {
            assert_eq!(b.raw_rows()[i], a2().raw_rows()[s.inverse().apply(i)]);
        }
    }

    #[test]
    fn hex_reads_like_print() {
        assert_eq!(a2().hex(), "6bf5");
        assert_eq!(BitMatrix4::identity().hex(), "8421");
    }

    #[test]
    fn gl_orders() {
        assert_eq!(gl_order(2), 6);
        assert_eq!(gl_order(3), 168);
        assert_eq!(gl_order(4), 20160);
    }

    #[test]
    fn small_groups_enumerate() {
        assert_eq!(GroupTable::<2>::enumerate().len(), 6);
        let g3 = GroupTable::<3>::enumerate();
        assert_eq!(g3.len(), 168);
        assert_eq!(CosetTable::partition(&g3).len(), 168 / 6);
    }
}
