//! Stochastic Lagrangian subspaces, the stochastic orthogonal group, and the
//! generalized Weingarten functions of the Clifford commutant.
//!
//! Vectors of `F_q^{2t}` use the layout `(x | y)` with `x, y ∈ F_q^t`, and
//! `r(T) = Σ_{(x,y) ∈ T} |x⟩⟨y|`.

use std::collections::{BTreeSet, HashSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fqarith::{FMatrix, FVector, PrimeField};
use crate::operator::DenseOperator;
use crate::phasespace::PhaseSpace;

/// Guard on `q^t` for enumerating Σ_t(q).
pub const SIGMA_GUARD: u128 = 100_000;
/// Guard on the `q^{2t}` vector scan used while enumerating.
pub const SCAN_GUARD: u128 = 20_000_000;
/// Guard on the dense size `q^t` of `r(T)`.
pub const R_OPERATOR_GUARD: u128 = 4000;
/// Guard on `|Σ_t(q)|` for Weingarten inversion.
pub const WEINGARTEN_GUARD: usize = 500;
/// Residual allowed in `G · Wg = I`.
pub const GRAM_RESIDUAL: f64 = 1e-10;

/// Difference form `B((x|y),(x'|y')) = x·x' - y·y'`.
fn diff_form(field: &PrimeField, t: usize, a: &[u64], b: &[u64]) -> u64 {
    field.sub(field.dot(&a[..t], &b[..t]), field.dot(&a[t..], &b[t..]))
}

/// A `t`-dimensional subspace `T ⊆ F_q^{2t}` stored by its reduced row
/// echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StochasticLagrangian {
    t: usize,
    basis: FMatrix,
}

impl StochasticLagrangian {
    /// Canonicalizes `rows` and checks the three defining conditions.
    pub fn new(field: &PrimeField, t: usize, rows: FMatrix) -> Result<Self> {
        let s = Self::from_basis_unchecked(field, t, rows)?;
        if !s.satisfies_definition(field) {
            return Err(Error::Validation(
                "subspace is not stochastic Lagrangian".into(),
            ));
        }
        Ok(s)
    }

    /// Canonicalizes `rows` without checking isotropy or the all-ones
    /// condition. Used for negative controls.
    pub fn from_basis_unchecked(field: &PrimeField, t: usize, mut rows: FMatrix) -> Result<Self> {
        if rows.cols() != 2 * t {
            return Err(Error::DimensionMismatch {
                expected: 2 * t,
                got: rows.cols(),
            });
        }
        rows.row_reduce(field);
        Ok(StochasticLagrangian { t, basis: rows })
    }

    /// The graph `T_O = {(Oy | y)}` of a stochastic orthogonal matrix.
    pub fn from_orthogonal(field: &PrimeField, o: &StochasticOrthogonal) -> Self {
        let t = o.size();
        let mut rows = FMatrix::zeros(t, 2 * t);
        for i in 0..t {
            for k in 0..t {
                rows.set(i, k, o.matrix().get(k, i));
            }
            rows.set(i, t + i, 1);
        }
        rows.row_reduce(field);
        StochasticLagrangian { t, basis: rows }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &FMatrix {
        &self.basis
    }

    /// All `q^dim` elements.
    pub fn elements(&self, field: &PrimeField) -> Vec<FVector> {
        let k = self.dim();
        let count = (field.q() as usize).pow(k as u32);
        (0..count)
            .map(|c| {
                let coeffs = field.digits(c, k);
                let mut v = vec![0u64; 2 * self.t];
                for (r, &a) in coeffs.iter().enumerate() {
                    if a != 0 {
                        for (slot, &b) in v.iter_mut().zip(self.basis.row(r)) {
                            *slot = field.add(*slot, field.mul(a, b));
                        }
                    }
                }
                FVector::new(field, v).expect("residues")
            })
            .collect()
    }

    pub fn contains(&self, field: &PrimeField, v: &FVector) -> bool {
        let mut m = self.basis.clone();
        let mut rows: Vec<Vec<u64>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
        rows.push(v.entries().to_vec());
        m = FMatrix::from_rows(field, &rows).expect("same width");
        m.rank(field) == self.dim()
    }

    /// Dimension `t`, `x·x = y·y` on every element, and `(1|1) ∈ T`.
    pub fn satisfies_definition(&self, field: &PrimeField) -> bool {
        let t = self.t;
        self.dim() == t
            && self
                .elements(field)
                .iter()
                .all(|v| diff_form(field, t, v.entries(), v.entries()) == 0)
            && self.contains(field, &FVector::ones(2 * t))
    }

    /// `Some(O)` when `T = T_O` for an invertible `O`, i.e. `T` is the graph of
    /// a bijection.
    pub fn as_orthogonal(&self, field: &PrimeField) -> Option<StochasticOrthogonal> {
        let t = self.t;
        if self.dim() != t {
            return None;
        }
        // Reorder to (y | x) and reduce; a graph over y has pivots 0..t.
        let rows: Vec<Vec<u64>> = (0..t)
            .map(|i| {
                let r = self.basis.row(i);
                r[t..].iter().chain(&r[..t]).copied().collect()
            })
            .collect();
        let mut m = FMatrix::from_rows(field, &rows).ok()?;
        let piv = m.row_reduce(field);
        if piv != (0..t).collect::<Vec<_>>() {
            return None;
        }
        let mut o = FMatrix::zeros(t, t);
        for i in 0..t {
            for k in 0..t {
                o.set(k, i, m.get(i, t + k));
            }
        }
        if o.rank(field) != t {
            return None;
        }
        StochasticOrthogonal::new(field, o).ok()
    }

    /// Nonzero entries `(row, col)` of `r(T)`, each equal to one.
    pub fn r_sparse(&self, field: &PrimeField) -> Vec<(usize, usize)> {
        let t = self.t;
        self.elements(field)
            .iter()
            .map(|v| {
                let e = v.entries();
                (field.index_of(&e[..t]), field.index_of(&e[t..]))
            })
            .collect()
    }

    /// `r(T)` as a dense operator on `t` qudits.
    pub fn r_operator(&self, ps: &PhaseSpace) -> Result<DenseOperator> {
        let field = ps.field();
        let needed = field.count(self.t).unwrap_or(u128::MAX);
        Error::guard("r(T) dimension q^t", needed, R_OPERATOR_GUARD)?;
        let d = needed as usize;
        let mut mat = DMatrix::<Complex64>::zeros(d, d);
        for (r, c) in self.r_sparse(field) {
            mat[(r, c)] += Complex64::new(1.0, 0.0);
        }
        DenseOperator::new(field.q(), self.t, mat)
    }
}

/// A `t x t` matrix with `OᵀO = I` and `O·1 = 1` over F_q.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StochasticOrthogonal {
    o: FMatrix,
}

impl StochasticOrthogonal {
    pub fn new(field: &PrimeField, o: FMatrix) -> Result<Self> {
        let t = o.rows();
        if o.cols() != t {
            return Err(Error::DimensionMismatch {
                expected: t,
                got: o.cols(),
            });
        }
        let oto = o.transpose().mul(field, &o)?;
        let ones = FVector::ones(t);
        if oto != FMatrix::identity(t) || o.mul_vec(field, &ones)? != ones {
            return Err(Error::Validation(
                "matrix is not stochastic orthogonal".into(),
            ));
        }
        Ok(StochasticOrthogonal { o })
    }

    pub fn matrix(&self) -> &FMatrix {
        &self.o
    }

    pub fn size(&self) -> usize {
        self.o.rows()
    }

    /// Permutation matrix with `P e_i = e_{images[i]}`.
    pub fn permutation(field: &PrimeField, images: &[usize]) -> Result<Self> {
        let t = images.len();
        let mut o = FMatrix::zeros(t, t);
        for (i, &j) in images.iter().enumerate() {
            if j >= t {
                return Err(Error::Validation(format!("image {j} out of range")));
            }
            o.set(j, i, 1);
        }
        Self::new(field, o)
    }

    /// Anti-identity `Ī = n^{-1} J - I` on `2n` replicas (`J` all ones).
    pub fn anti_identity(field: &PrimeField, n: usize) -> Result<Self> {
        let ninv = field.inv(n as u64)?;
        let t = 2 * n;
        let mut o = FMatrix::zeros(t, t);
        for i in 0..t {
            for j in 0..t {
                let v = if i == j { field.sub(ninv, 1) } else { ninv };
                o.set(i, j, v);
            }
        }
        Self::new(field, o)
    }

    /// `S = I - n^{-1} s sᵀ` with `s = (1^n, (-1)^n)`.
    pub fn sre_spin(field: &PrimeField, n: usize) -> Result<Self> {
        let ninv = field.inv(n as u64)?;
        let t = 2 * n;
        let sign = |i: usize| if i < n { 1 } else { field.neg(1) };
        let mut o = FMatrix::identity(t);
        for i in 0..t {
            for j in 0..t {
                let v = field.sub(o.get(i, j), field.mul(ninv, field.mul(sign(i), sign(j))));
                o.set(i, j, v);
            }
        }
        Self::new(field, o)
    }
}

/// Every element of O_t(q), by row-wise backtracking.
pub fn enumerate_orthogonal(field: &PrimeField, t: usize) -> Result<Vec<StochasticOrthogonal>> {
    let needed = field.count(t).unwrap_or(u128::MAX);
    Error::guard("q^t for orthogonal enumeration", needed, SIGMA_GUARD)?;
    let candidates: Vec<Vec<u64>> = (0..needed as usize)
        .map(|i| field.digits(i, t))
        .filter(|r| field.dot(r, r) == 1 && r.iter().fold(0, |a, &b| field.add(a, b)) == 1)
        .collect();
    let mut out = Vec::new();
    let mut rows: Vec<usize> = Vec::with_capacity(t);
    fn extend(
        field: &PrimeField,
        t: usize,
        cand: &[Vec<u64>],
        rows: &mut Vec<usize>,
        out: &mut Vec<StochasticOrthogonal>,
    ) {
        if rows.len() == t {
            let data: Vec<Vec<u64>> = rows.iter().map(|&i| cand[i].clone()).collect();
            let o = FMatrix::from_rows(field, &data).expect("square");
            out.push(StochasticOrthogonal::new(field, o).expect("rows orthonormal"));
            return;
        }
        for (i, c) in cand.iter().enumerate() {
            if rows.iter().all(|&r| field.dot(&cand[r], c) == 0) {
                rows.push(i);
                extend(field, t, cand, rows, out);
                rows.pop();
            }
        }
    }
    extend(field, t, &candidates, &mut rows, &mut out);
    out.sort();
    Ok(out)
}

/// Every stochastic Lagrangian subspace of `F_q^{2t}`, sorted by canonical
/// basis. Totally isotropic flags are grown from `span{(1|1)}` one
/// isotropic vector at a time.
pub fn enumerate_sigma(field: &PrimeField, t: usize) -> Result<Vec<StochasticLagrangian>> {
    if t == 0 {
        return Err(Error::Validation("replica count t must be positive".into()));
    }
    let qt = field.count(t).unwrap_or(u128::MAX);
    Error::guard("q^t for Lagrangian enumeration", qt, SIGMA_GUARD)?;
    let q2t = field.count(2 * t).unwrap_or(u128::MAX);
    Error::guard("q^{2t} vector scan", q2t, SCAN_GUARD)?;

    let ones = vec![1u64; 2 * t];
    // Isotropic vectors orthogonal to (1|1), normalized to leading entry 1.
    let isotropic: Vec<Vec<u64>> = (1..q2t as usize)
        .map(|i| field.digits(i, 2 * t))
        .filter(|v| v.iter().find(|&&e| e != 0) == Some(&1))
        .filter(|v| diff_form(field, t, v, v) == 0 && diff_form(field, t, v, &ones) == 0)
        .collect();

    let start = FMatrix::from_rows(field, &[ones.clone()])?;
    let mut level: BTreeSet<FMatrix> = BTreeSet::from([start]);
    for _ in 1..t {
        let next: HashSet<FMatrix> = level
            .iter()
            .flat_map(|w| extensions(field, t, w, &isotropic))
            .collect();
        level = next.into_iter().collect();
    }
    Ok(level
        .into_iter()
        .map(|basis| StochasticLagrangian { t, basis })
        .collect())
}

/// Canonical bases of `W + span{v}` for isotropic `v ⊥ W`, `v ∉ W`.
fn extensions(field: &PrimeField, t: usize, w: &FMatrix, isotropic: &[Vec<u64>]) -> Vec<FMatrix> {
    let mut w_rows: Vec<Vec<u64>> = (0..w.rows()).map(|i| w.row(i).to_vec()).collect();
    let pivots: Vec<usize> = w_rows
        .iter()
        .map(|r| r.iter().position(|&e| e != 0).expect("reduced rows are nonzero"))
        .collect();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::new();
    for v in isotropic {
        if w_rows.iter().any(|r| diff_form(field, t, r, v) != 0) {
            continue;
        }
        // Reduce v modulo W, then normalize the leading entry.
        let mut red = v.clone();
        for (r, &p) in w_rows.iter().zip(&pivots) {
            let c = red[p];
            if c != 0 {
                for (x, &y) in red.iter_mut().zip(r) {
                    *x = field.sub(*x, field.mul(c, y));
                }
            }
        }
        let Some(lead) = red.iter().position(|&e| e != 0) else {
            continue;
        };
        let inv = field.inv(red[lead]).expect("nonzero");
        for x in red.iter_mut() {
            *x = field.mul(*x, inv);
        }
        if seen.insert(red.clone()) {
            w_rows.push(red);
            let mut m = FMatrix::from_rows(field, &w_rows).expect("same width");
            w_rows.pop();
            m.row_reduce(field);
            out.push(m);
        }
    }
    out
}

/// `|T_a, T_b| = t - dim(T_a ∩ T_b)`, read off from
/// `Tr[r(T_a)^† r(T_b)] = |T_a ∩ T_b| = q^{t - |T_a,T_b|}`.
pub fn gram_distance(
    field: &PrimeField,
    a: &StochasticLagrangian,
    b: &StochasticLagrangian,
) -> Result<usize> {
    if a.t != b.t {
        return Err(Error::DimensionMismatch {
            expected: a.t,
            got: b.t,
        });
    }
    let overlap = a
        .elements(field)
        .iter()
        .filter(|v| b.contains(field, v))
        .count() as u128;
    Ok(a.t - exponent_of(field, overlap, a.t)?)
}

/// Pairwise distances over a list of subspaces.
pub fn distance_matrix(
    field: &PrimeField,
    sigma: &[StochasticLagrangian],
) -> Result<Vec<Vec<usize>>> {
    let t = sigma.first().map_or(0, |s| s.t);
    let sets: Vec<HashSet<usize>> = sigma
        .par_iter()
        .map(|s| s.elements(field).iter().map(|v| v.index(field)).collect())
        .collect();
    sets.par_iter()
        .map(|a| {
            sets.iter()
                .map(|b| exponent_of(field, a.intersection(b).count() as u128, t).map(|k| t - k))
                .collect()
        })
        .collect()
}

/// `k` with `q^k = count`, `k ≤ t`.
fn exponent_of(field: &PrimeField, count: u128, t: usize) -> Result<usize> {
    let mut k = 0usize;
    let mut p = 1u128;
    while p < count {
        p *= field.q() as u128;
        k += 1;
    }
    if p != count || k > t {
        return Err(Error::Numerical(format!(
            "overlap {count} of r-operators is not a power of q={}",
            field.q()
        )));
    }
    Ok(k)
}

/// Inverts a Gram matrix and checks `G · Wg = I` to [`GRAM_RESIDUAL`].
pub fn invert_gram(gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = gram.nrows();
    let inv = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("Gram matrix is singular".into()))?;
    let resid = (gram * &inv - DMatrix::<f64>::identity(n, n)).abs().max();
    if !resid.is_finite() || resid > GRAM_RESIDUAL {
        return Err(Error::Numerical(format!(
            "Gram inverse residual {resid:.3e} exceeds {GRAM_RESIDUAL:.0e}"
        )));
    }
    Ok(inv)
}

/// Gram matrix `Q^{t - |a,b|}` with `Q = q^copies` from a distance table.
/// A two-qudit gate has `copies = 2`.
pub fn clifford_gram(q: u64, copies: u32, t: usize, distances: &[Vec<usize>]) -> DMatrix<f64> {
    let big_q = (q as f64).powi(copies as i32);
    let n = distances.len();
    DMatrix::from_fn(n, n, |i, j| big_q.powi((t - distances[i][j]) as i32))
}

fn weingarten_gram(
    field: &PrimeField,
    sigma: &[StochasticLagrangian],
    copies: u32,
) -> Result<DMatrix<f64>> {
    if sigma.len() > WEINGARTEN_GUARD {
        return Err(Error::Guard {
            what: "|Σ_t(q)| for Weingarten inversion",
            needed: sigma.len() as u128,
            limit: WEINGARTEN_GUARD as u128,
        });
    }
    let t = sigma.first().map_or(0, |s| s.t);
    let dist = distance_matrix(field, sigma)?;
    Ok(clifford_gram(field.q(), copies, t, &dist))
}

/// Generalized Weingarten matrix indexed like `sigma`, for the Clifford group
/// on `copies` qudits. The operators `r(T)^{⊗copies}` are linearly dependent
/// when `copies < t - 1`; the Gram matrix is then singular and this returns
/// a numerical error.
pub fn clifford_weingarten(
    field: &PrimeField,
    sigma: &[StochasticLagrangian],
    copies: u32,
) -> Result<DMatrix<f64>> {
    invert_gram(&weingarten_gram(field, sigma, copies)?)
}

/// Moore-Penrose inverse of the Gram matrix. It yields the same twirl as
/// the true inverse whenever the latter exists, and stays valid for
/// dependent spanning sets.
pub fn clifford_weingarten_pinv(
    field: &PrimeField,
    sigma: &[StochasticLagrangian],
    copies: u32,
) -> Result<DMatrix<f64>> {
    let g = weingarten_gram(field, sigma, copies)?;
    let scale = g.abs().max();
    let pinv = g
        .clone()
        .pseudo_inverse(scale * 1e-12)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let resid = (&g * &pinv * &g - &g).abs().max() / scale;
    if resid > GRAM_RESIDUAL {
        return Err(Error::Numerical(format!(
            "pseudo-inverse residual {resid:.3e} exceeds {GRAM_RESIDUAL:.0e}"
        )));
    }
    Ok(pinv)
}

/// Outcome of [`verify_commutant`].
#[derive(Debug, Clone, PartialEq)]
pub struct CommutantReport {
    /// Largest entry of `r(T) V^{⊗t} - V^{⊗t} r(T)` over the samples.
    pub max_defect: f64,
    /// Index of the sample attaining it.
    pub worst_sample: Option<usize>,
    pub passed: bool,
}

/// Checks that `r(T)` commutes with `V^{⊗t}` for each single-qudit `V`.
pub fn verify_commutant(
    ps: &PhaseSpace,
    subspace: &StochasticLagrangian,
    samples: &[DenseOperator],
    tol: f64,
) -> Result<CommutantReport> {
    if subspace.t > 4 {
        return Err(Error::Guard {
            what: "replica count for commutant verification",
            needed: subspace.t as u128,
            limit: 4,
        });
    }
    let r = subspace.r_operator(ps)?;
    let defects: Vec<f64> = samples
        .par_iter()
        .map(|v| -> Result<f64> {
            if v.n_sites() != 1 || v.q() != ps.q() {
                return Err(Error::Validation("expected a single-qudit operator".into()));
            }
            let mut vt = v.clone();
            for _ in 1..subspace.t {
                vt = vt.kron(v)?;
            }
            let lhs = r.mul(&vt)?;
            let rhs = vt.mul(&r)?;
            lhs.max_abs_diff(&rhs)
        })
        .collect::<Result<_>>()?;
    let (worst_sample, max_defect) = defects
        .iter()
        .copied()
        .enumerate()
        .fold((None, 0.0f64), |(wi, wv), (i, d)| if d > wv { (Some(i), d) } else { (wi, wv) });
    Ok(CommutantReport {
        max_defect,
        worst_sample,
        passed: max_defect < tol,
    })
}
