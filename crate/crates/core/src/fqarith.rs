//! Arithmetic over the prime field F_q for odd prime q.
//!
//! Residues are always stored as canonical representatives in `[0, q)`.
//! Phase-space vectors use the interleaved layout `(m_1, n_1, ..., m_N, n_N)`.

use crate::error::{Error, Result};

/// The prime field F_q. Cheap to copy and freely shareable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
    inv2: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    /// Largest modulus accepted; keeps every product of residues inside `u64`.
    pub const MAX_MODULUS: u64 = 1 << 31;

    pub fn new(q: u64) -> Result<Self> {
        if q < 3 || q > Self::MAX_MODULUS || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(PrimeField {
            q,
            inv2: (q + 1) / 2,
        })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    /// The inverse of two, `(q + 1) / 2`.
    #[inline]
    pub fn inv2(&self) -> u64 {
        self.inv2
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }

    #[inline]
    pub fn reduce_signed(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b) % self.q
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.q
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a % self.q) % self.q
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.q;
        if a == 0 {
            return Err(Error::NonInvertible(a));
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// Dot product of two residue slices.
    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| (acc + x * y) % self.q)
    }

    /// Number of vectors in F_q^len, or `None` on overflow.
    pub fn count(&self, len: usize) -> Option<u128> {
        (self.q as u128).checked_pow(len as u32)
    }

    /// Digits of `index` in base q, most significant first, padded to `len`.
    pub fn digits(&self, mut index: usize, len: usize) -> Vec<u64> {
        let q = self.q as usize;
        let mut out = vec![0u64; len];
        for slot in out.iter_mut().rev() {
            *slot = (index % q) as u64;
            index /= q;
        }
        out
    }

    /// Inverse of [`PrimeField::digits`].
    pub fn index_of(&self, digits: &[u64]) -> usize {
        digits
            .iter()
            .fold(0usize, |acc, &d| acc * self.q as usize + d as usize)
    }
}

/// A vector over F_q with canonical entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FVector {
    entries: Vec<u64>,
}

impl FVector {
    pub fn new(field: &PrimeField, entries: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&e| e >= field.q()) {
            return Err(Error::Validation(format!(
                "entry {bad} is not a residue mod {}",
                field.q()
            )));
        }
        Ok(FVector { entries })
    }

    /// Builds a vector by reducing arbitrary signed integers.
    pub fn from_signed(field: &PrimeField, entries: &[i64]) -> Self {
        FVector {
            entries: entries.iter().map(|&e| field.reduce_signed(e)).collect(),
        }
    }

    pub fn zeros(len: usize) -> Self {
        FVector {
            entries: vec![0; len],
        }
    }

    /// The all-ones vector.
    pub fn ones(len: usize) -> Self {
        FVector {
            entries: vec![1; len],
        }
    }

    pub fn from_index(field: &PrimeField, len: usize, index: usize) -> Self {
        FVector {
            entries: field.digits(index, len),
        }
    }

    pub fn index(&self, field: &PrimeField) -> usize {
        field.index_of(&self.entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn add(&self, field: &PrimeField, other: &FVector) -> FVector {
        FVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| field.add(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, field: &PrimeField, c: u64) -> FVector {
        FVector {
            entries: self.entries.iter().map(|&a| field.mul(a, c)).collect(),
        }
    }

    pub fn neg(&self, field: &PrimeField) -> FVector {
        FVector {
            entries: self.entries.iter().map(|&a| field.neg(a)).collect(),
        }
    }

    pub fn dot(&self, field: &PrimeField, other: &FVector) -> u64 {
        field.dot(&self.entries, &other.entries)
    }
}

/// Symplectic form `[u, v] = sum_i (u_{2i} v_{2i+1} - u_{2i+1} v_{2i})` on
/// interleaved coordinates.
pub fn symplectic_form(field: &PrimeField, u: &FVector, v: &FVector) -> Result<u64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if u.len() % 2 != 0 {
        return Err(Error::Validation(format!(
            "phase-space vectors need even length, got {}",
            u.len()
        )));
    }
    Ok(symplectic_raw(field, u.entries(), v.entries()))
}

/// Unchecked symplectic form on raw slices of equal even length.
pub fn symplectic_raw(field: &PrimeField, u: &[u64], v: &[u64]) -> u64 {
    let q = field.q();
    let mut acc = 0u64;
    for (a, b) in u.chunks_exact(2).zip(v.chunks_exact(2)) {
        acc = (acc + a[0] * b[1] + (q - a[1]) * b[0]) % q;
    }
    acc
}

/// Dense matrix over F_q, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: &PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend(r.iter().map(|&e| field.reduce(e)));
        }
        Ok(FMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_signed_rows(field: &PrimeField, rows: &[Vec<i64>]) -> Result<Self> {
        let rows: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| r.iter().map(|&e| field.reduce_signed(e)).collect())
            .collect();
        Self::from_rows(field, &rows)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[FVector]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &e) in c.entries().iter().enumerate() {
                m.set(i, j, e);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> FVector {
        FVector {
            entries: (0..self.rows).map(|i| self.get(i, j)).collect(),
        }
    }

    pub fn row_vectors(&self) -> Vec<FVector> {
        (0..self.rows)
            .map(|i| FVector {
                entries: self.row(i).to_vec(),
            })
            .collect()
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, field: &PrimeField, other: &FMatrix) -> Result<FMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = field.add(out.get(i, j), field.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, field: &PrimeField, v: &FVector) -> Result<FVector> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(FVector {
            entries: (0..self.rows)
                .map(|i| field.dot(self.row(i), v.entries()))
                .collect(),
        })
    }

    /// Brings the matrix to reduced row echelon form in place, drops zero rows,
    /// and returns the pivot columns.
    pub fn row_reduce(&mut self, field: &PrimeField) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = field.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = field.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                let f = self.get(i, c);
                if i != r && f != 0 {
                    for j in 0..self.cols {
                        let v = field.sub(self.get(i, j), field.mul(f, self.get(r, j)));
                        self.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        self.data.truncate(r * self.cols);
        self.rows = r;
        pivots
    }

    pub fn rank(&self, field: &PrimeField) -> usize {
        self.clone().row_reduce(field).len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

/// Gram matrix of the symplectic form on `modes` qudits, interleaved layout:
/// `J[2i][2i+1] = 1`, `J[2i+1][2i] = -1`.
pub fn symplectic_gram(field: &PrimeField, modes: usize) -> FMatrix {
    let mut j = FMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        j.set(2 * i, 2 * i + 1, 1);
        j.set(2 * i + 1, 2 * i, field.neg(1));
    }
    j
}

/// Upper bound on `q^dim_ambient` accepted by [`enumerate_subspaces`].
pub const SUBSPACE_GUARD: u128 = 10_000_000;

/// Every `dim_sub`-dimensional subspace of F_q^`dim_ambient`, each exactly once
/// as its reduced row echelon basis (rows), in lexicographic pivot order.
pub fn enumerate_subspaces(
    field: &PrimeField,
    dim_ambient: usize,
    dim_sub: usize,
) -> Result<Vec<FMatrix>> {
    if dim_sub > dim_ambient {
        return Err(Error::Validation(format!(
            "subspace dimension {dim_sub} exceeds ambient dimension {dim_ambient}"
        )));
    }
    let total = field.count(dim_ambient).unwrap_or(u128::MAX);
    Error::guard("q^dim_ambient for subspace enumeration", total, SUBSPACE_GUARD)?;

    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(dim_sub);
    for_each_combination(dim_ambient, dim_sub, 0, &mut pivots, &mut |piv| {
        // Free slots: positions right of each pivot that are not pivot columns.
        let free: Vec<(usize, usize)> = piv
            .iter()
            .enumerate()
            .flat_map(|(r, &p)| {
                ((p + 1)..dim_ambient)
                    .filter(|c| !piv.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let combos = field.q().pow(free.len() as u32) as usize;
        for k in 0..combos {
            let mut m = FMatrix::zeros(dim_sub, dim_ambient);
            for (r, &p) in piv.iter().enumerate() {
                m.set(r, p, 1);
            }
            for (&(r, c), &v) in free.iter().zip(field.digits(k, free.len()).iter()) {
                m.set(r, c, v);
            }
            out.push(m);
        }
    });
    Ok(out)
}

fn for_each_combination(
    n: usize,
    k: usize,
    start: usize,
    acc: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if acc.len() == k {
        f(acc);
        return;
    }
    for i in start..n {
        if n - i < k - acc.len() {
            break;
        }
        acc.push(i);
        for_each_combination(n, k, i + 1, acc, f);
        acc.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_primes() {
        for q in [0, 1, 2, 4, 9, 15, 21] {
            assert_eq!(PrimeField::new(q), Err(Error::InvalidModulus(q)));
        }
        assert!(PrimeField::new(13).is_ok());
    }

    #[test]
    fn small_field_facts() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.inv2(), 4);
        assert_eq!(f7.mul(2, f7.inv2()), 1);
        let f3 = PrimeField::new(3).unwrap();
        assert_eq!(f3.inv(2).unwrap(), 2);
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f5.neg(3), 2);
        assert_eq!(f5.inv(0), Err(Error::NonInvertible(0)));
    }

    #[test]
    fn symplectic_examples() {
        let f3 = PrimeField::new(3).unwrap();
        let e1 = FVector::new(&f3, vec![1, 0]).unwrap();
        let e2 = FVector::new(&f3, vec![0, 1]).unwrap();
        assert_eq!(symplectic_form(&f3, &e1, &e2).unwrap(), 1);
        let f5 = PrimeField::new(5).unwrap();
        let u = FVector::new(&f5, vec![2, 3]).unwrap();
        let v = FVector::new(&f5, vec![1, 4]).unwrap();
        // 2*4 - 3*1 = 5
        assert_eq!(symplectic_form(&f5, &u, &v).unwrap(), 0);
        assert!(symplectic_form(&f5, &u, &FVector::zeros(4)).is_err());
    }

    #[test]
    fn symplectic_form_matches_gram() {
        let f = PrimeField::new(5).unwrap();
        let j = symplectic_gram(&f, 2);
        for a in 0..625 {
            let u = FVector::from_index(&f, 4, a);
            let ju = j.mul_vec(&f, &FVector::from_index(&f, 4, (a * 37) % 625)).unwrap();
            assert_eq!(
                u.dot(&f, &ju),
                symplectic_form(&f, &u, &FVector::from_index(&f, 4, (a * 37) % 625)).unwrap()
            );
        }
    }

    #[test]
    fn nondegenerate_exhaustive() {
        for q in [3u64, 5, 7] {
            let f = PrimeField::new(q).unwrap();
            for n in 1..=2 {
                let size = (q as usize).pow(2 * n as u32);
                for a in 1..size {
                    let u = FVector::from_index(&f, 2 * n, a);
                    let witnessed = (0..size).any(|b| {
                        symplectic_raw(&f, u.entries(), f.digits(b, 2 * n).as_slice()) != 0
                    });
                    assert!(witnessed, "q={q} u={u:?} is in the radical");
                }
            }
        }
    }

    #[test]
    fn row_reduce_known_case() {
        let f = PrimeField::new(5).unwrap();
        let mut m = FMatrix::from_rows(&f, &[vec![2, 4, 1], vec![1, 2, 3], vec![0, 1, 1]]).unwrap();
        let piv = m.row_reduce(&f);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(m.rows(), 2);
    }

    #[test]
    fn trivial_subspace_counts() {
        let f = PrimeField::new(3).unwrap();
        let zero = enumerate_subspaces(&f, 3, 0).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].rows(), 0);
        let full = enumerate_subspaces(&f, 3, 3).unwrap();
        assert_eq!(full, vec![FMatrix::identity(3)]);
        assert_eq!(enumerate_subspaces(&f, 2, 1).unwrap().len(), 4);
        assert!(matches!(
            enumerate_subspaces(&f, 15, 2),
            Err(Error::Guard { .. })
        ));
    }
}
