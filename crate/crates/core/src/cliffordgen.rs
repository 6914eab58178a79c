//! Uniform sampling of qudit Clifford unitaries.
//!
//! A Clifford element is a symplectic matrix `F` over F_q together with a
//! Pauli shift `s`. Its unitary satisfies `U T_u U^† = w^{[s,Fu]} T_{Fu}`; the
//! global phase is left unfixed.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::densesim::DenseState;
use crate::error::{Error, Result};
use crate::fqarith::{symplectic_gram, symplectic_raw, FMatrix, FVector, PrimeField};
use crate::operator::{dimension, DenseOperator};
use crate::phasespace::{displacement_monomial, displacement_op, PhasePoint, PhaseSpace};

/// A `2m x 2m` matrix over F_q with `Fᵀ J F = J`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymplecticMatrix {
    f: FMatrix,
}

pub fn is_symplectic(field: &PrimeField, f: &FMatrix) -> bool {
    if f.rows() != f.cols() || f.rows() % 2 != 0 {
        return false;
    }
    let j = symplectic_gram(field, f.rows() / 2);
    let ftjf = f
        .transpose()
        .mul(field, &j)
        .and_then(|x| x.mul(field, f))
        .expect("square shapes agree");
    ftjf == j
}

impl SymplecticMatrix {
    pub fn new(field: &PrimeField, f: FMatrix) -> Result<Self> {
        if !is_symplectic(field, &f) {
            return Err(Error::Validation("matrix is not symplectic".into()));
        }
        Ok(SymplecticMatrix { f })
    }

    pub fn identity(modes: usize) -> Self {
        SymplecticMatrix {
            f: FMatrix::identity(2 * modes),
        }
    }

    pub fn matrix(&self) -> &FMatrix {
        &self.f
    }

    pub fn modes(&self) -> usize {
        self.f.rows() / 2
    }

    pub fn apply(&self, field: &PrimeField, u: &FVector) -> FVector {
        self.f.mul_vec(field, u).expect("length checked by caller")
    }

    pub fn compose(&self, field: &PrimeField, other: &SymplecticMatrix) -> Result<Self> {
        Ok(SymplecticMatrix {
            f: self.f.mul(field, &other.f)?,
        })
    }
}

/// `x ↦ x + c [x, h] h`.
#[derive(Debug, Clone)]
struct Transvection {
    c: u64,
    h: Vec<u64>,
}

impl Transvection {
    fn apply(&self, field: &PrimeField, x: &mut [u64]) {
        let k = field.mul(self.c, symplectic_raw(field, x, &self.h));
        if k != 0 {
            for (xi, &hi) in x.iter_mut().zip(&self.h) {
                *xi = field.add(*xi, field.mul(k, hi));
            }
        }
    }
}

fn sub(field: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| field.sub(x, y)).collect()
}

/// Transvections (at most two) taking nonzero `x` to nonzero `y`.
fn transvections_between(field: &PrimeField, x: &[u64], y: &[u64]) -> Vec<Transvection> {
    if x == y {
        return Vec::new();
    }
    let direct = |x: &[u64], y: &[u64]| {
        let w = symplectic_raw(field, x, y);
        Transvection {
            c: field.inv(w).expect("caller ensures [x,y] != 0"),
            h: sub(field, y, x),
        }
    };
    if symplectic_raw(field, x, y) != 0 {
        return vec![direct(x, y)];
    }
    // Route through z with [x,z] != 0 and [z,y] != 0.
    let len = x.len();
    let total = (field.q() as usize).pow(len as u32);
    for idx in 1..total {
        let z = field.digits(idx, len);
        if symplectic_raw(field, x, &z) != 0 && symplectic_raw(field, &z, y) != 0 {
            return vec![direct(x, &z), direct(&z, y)];
        }
    }
    unreachable!("a bridging vector always exists for nonzero x, y")
}

fn random_vector<R: Rng + ?Sized>(field: &PrimeField, len: usize, rng: &mut R) -> Vec<u64> {
    (0..len).map(|_| rng.random_range(0..field.q())).collect()
}

/// Columns of a uniform element of Sp(2m, q), built recursively.
fn random_symplectic_columns<R: Rng + ?Sized>(
    field: &PrimeField,
    modes: usize,
    rng: &mut R,
) -> Vec<Vec<u64>> {
    if modes == 0 {
        return Vec::new();
    }
    let dim = 2 * modes;
    let f1 = loop {
        let v = random_vector(field, dim, rng);
        if v.iter().any(|&e| e != 0) {
            break v;
        }
    };
    let f2 = loop {
        let v = random_vector(field, dim, rng);
        if symplectic_raw(field, &f1, &v) == 1 {
            break v;
        }
    };
    let mut e1 = vec![0; dim];
    e1[0] = 1;
    let mut e2 = vec![0; dim];
    e2[1] = 1;

    let mut chain = transvections_between(field, &e1, &f1);
    let mut e2p = e2.clone();
    for t in &chain {
        t.apply(field, &mut e2p);
    }
    // Map e2' to f2 with transvections whose direction is orthogonal to f1.
    if e2p != f2 {
        if symplectic_raw(field, &e2p, &f2) != 0 {
            chain.extend(transvections_between(field, &e2p, &f2));
        } else {
            let z: Vec<u64> = e2p.iter().zip(&f1).map(|(&a, &b)| field.add(a, b)).collect();
            chain.extend(transvections_between(field, &e2p, &z));
            chain.extend(transvections_between(field, &z, &f2));
        }
    }

    let sub_cols = random_symplectic_columns(field, modes - 1, rng);
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = vec![0u64; dim];
        if j < 2 {
            v[j] = 1;
        } else {
            v[2..].copy_from_slice(&sub_cols[j - 2]);
        }
        for t in &chain {
            t.apply(field, &mut v);
        }
        cols.push(v);
    }
    debug_assert_eq!(cols[0], f1);
    debug_assert_eq!(cols[1], f2);
    cols
}

/// Uniform sample from Sp(2m, q).
pub fn random_symplectic<R: Rng + ?Sized>(
    field: &PrimeField,
    modes: usize,
    rng: &mut R,
) -> SymplecticMatrix {
    let cols: Vec<FVector> = random_symplectic_columns(field, modes, rng)
        .into_iter()
        .map(|c| FVector::new(field, c).expect("residues"))
        .collect();
    let f = FMatrix::from_columns(&cols);
    debug_assert!(is_symplectic(field, &f));
    SymplecticMatrix { f }
}

/// Every element of Sp(2, q) = SL(2, q), by brute force.
pub fn enumerate_sp2(field: &PrimeField) -> Vec<SymplecticMatrix> {
    let q = field.q();
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if field.sub(field.mul(a, d), field.mul(b, c)) == 1 {
                        let f = FMatrix::from_rows(field, &[vec![a, b], vec![c, d]]).unwrap();
                        out.push(SymplecticMatrix { f });
                    }
                }
            }
        }
    }
    out
}

/// Image of basis state `x` under `T_u`: returns (target index, phase exponent).
fn displace_basis(field: &PrimeField, u: &[u64], x: &[u64]) -> (usize, u64) {
    let mut ph = 0;
    let mut y = 0usize;
    for (i, &xi) in x.iter().enumerate() {
        let (m, n) = (u[2 * i], u[2 * i + 1]);
        let s = field.add(xi, n);
        ph = field.add(ph, field.sub(field.mul(m, s), field.mul(field.inv2(), field.mul(m, n))));
        y = y * field.q() as usize + s as usize;
    }
    (y, ph)
}

/// Unitary `U` with `U T_u U^† = T_{Fu}` exactly, up to global phase.
///
/// `Φ(X) = Σ_v T_{Fv} X T_v^†` intertwines `T_v` with `T_{Fv}`, so it is a
/// multiple of the wanted unitary for any `X` with nonzero image. For
/// `X = |0⟩⟨b|` every term is a single matrix entry.
fn metaplectic(ps: &PhaseSpace, f: &SymplecticMatrix) -> Result<DMatrix<Complex64>> {
    let field = *ps.field();
    let m = f.modes();
    let d = dimension(field.q(), m)?;
    let n_points = d * d;
    let images: Vec<(Vec<u64>, Vec<u64>)> = (0..n_points)
        .map(|idx| {
            let v = FVector::from_index(&field, 2 * m, idx);
            let fv = f.apply(&field, &v);
            (v.entries().to_vec(), fv.entries().to_vec())
        })
        .collect();
    let zero = vec![0u64; m];
    let mut best: Option<(f64, DMatrix<Complex64>)> = None;
    for b in 0..d {
        let bd = field.digits(b, m);
        let mut phi = DMatrix::<Complex64>::zeros(d, d);
        for (v, fv) in &images {
            let (row, pa) = displace_basis(&field, fv, &zero);
            let (col, pb) = displace_basis(&field, v, &bd);
            phi[(row, col)] += ps.omega(field.sub(pa, pb));
        }
        let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // |U_{0b}| ≥ 1/√d for some b, giving norm ≥ d; stop at the first such b.
        if norm >= d as f64 - 1e-9 {
            best = Some((norm, phi));
            break;
        }
        if best.as_ref().is_none_or(|(n, _)| norm > *n) {
            best = Some((norm, phi));
        }
    }
    let (norm, phi) = best.expect("d >= 1");
    assert!(norm > 1e-6, "intertwiner vanished for every seed column");
    Ok(phi * Complex64::new((d as f64).sqrt() / norm, 0.0))
}

/// Unitary of the Clifford element `(F, shift)`: `U = T_shift μ(F)`.
pub fn symplectic_to_unitary(
    ps: &PhaseSpace,
    f: &SymplecticMatrix,
    shift: &PhasePoint,
) -> Result<DenseOperator> {
    if shift.n_sites() != f.modes() {
        return Err(Error::DimensionMismatch {
            expected: 2 * f.modes(),
            got: shift.entries().len(),
        });
    }
    let mu = metaplectic(ps, f)?;
    let t = displacement_monomial(ps, shift)?;
    let mut u = DMatrix::<Complex64>::zeros(mu.nrows(), mu.ncols());
    for x in 0..mu.nrows() {
        let w = ps.omega(t.phase[x]);
        for c in 0..mu.ncols() {
            u[(t.target[x], c)] = w * mu[(x, c)];
        }
    }
    DenseOperator::new(ps.q(), f.modes(), u)
}

/// A Clifford group element with lazily materialized unitary.
#[derive(Debug, Clone)]
pub struct CliffordElement {
    ps: PhaseSpace,
    symplectic: SymplecticMatrix,
    shift: PhasePoint,
    unitary: OnceLock<DenseOperator>,
}

impl CliffordElement {
    pub fn new(ps: &PhaseSpace, symplectic: SymplecticMatrix, shift: PhasePoint) -> Result<Self> {
        if shift.n_sites() != symplectic.modes() {
            return Err(Error::DimensionMismatch {
                expected: 2 * symplectic.modes(),
                got: shift.entries().len(),
            });
        }
        Ok(CliffordElement {
            ps: ps.clone(),
            symplectic,
            shift,
            unitary: OnceLock::new(),
        })
    }

    pub fn symplectic(&self) -> &SymplecticMatrix {
        &self.symplectic
    }

    pub fn shift(&self) -> &PhasePoint {
        &self.shift
    }

    pub fn modes(&self) -> usize {
        self.symplectic.modes()
    }

    pub fn unitary(&self) -> &DenseOperator {
        self.unitary.get_or_init(|| {
            symplectic_to_unitary(&self.ps, &self.symplectic, &self.shift)
                .expect("shapes validated at construction")
        })
    }

    /// Affine action on phase space: `u ↦ F u + shift`, under which
    /// `U A_u U^† = A_{Fu + shift}`.
    pub fn act_on_point(&self, u: &PhasePoint) -> PhasePoint {
        let field = self.ps.field();
        let fu = self.symplectic.apply(field, u.vector());
        PhasePoint::from_vector(fu.add(field, self.shift.vector())).expect("even length")
    }

    /// `self ∘ other`: symplectic part `F_1 F_2`, shift `s_1 + F_1 s_2`.
    pub fn compose(&self, other: &CliffordElement) -> Result<CliffordElement> {
        let field = self.ps.field();
        let f = self.symplectic.compose(field, &other.symplectic)?;
        let shift = PhasePoint::from_vector(
            self.symplectic
                .apply(field, other.shift.vector())
                .add(field, self.shift.vector()),
        )?;
        let composed = CliffordElement::new(&self.ps, f, shift)?;
        let product = self.unitary().mul(other.unitary())?;
        let _ = composed.unitary.set(product);
        Ok(composed)
    }
}

/// Uniform Clifford element on `m` qudits: uniform symplectic part and uniform
/// Pauli shift.
pub fn random_clifford<R: Rng + ?Sized>(ps: &PhaseSpace, modes: usize, rng: &mut R) -> CliffordElement {
    let field = ps.field();
    let f = random_symplectic(field, modes, rng);
    let shift = PhasePoint::new(field, random_vector(field, 2 * modes, rng)).expect("residues");
    CliffordElement::new(ps, f, shift).expect("matching modes")
}

/// Largest deviation of `U T_u U^†` from a unit phase times `T_{Fu}` over the
/// given points.
pub fn covariance_defect(
    ps: &PhaseSpace,
    element: &CliffordElement,
    points: &[PhasePoint],
) -> Result<f64> {
    let u = element.unitary();
    let d = u.dim() as f64;
    let mut worst = 0.0f64;
    for p in points {
        let t = displacement_op(ps, p)?;
        let conj = u.mul(&t)?.mul(&u.adjoint())?;
        let fp = PhasePoint::from_vector(element.symplectic.apply(ps.field(), p.vector()))?;
        let target = displacement_op(ps, &fp)?;
        // Overlap Tr(T_{Fu}^† U T_u U^†) / d is the phase when covariance holds.
        let phase = target.adjoint().mul(&conj)?.trace() / d;
        worst = worst.max((phase.norm() - 1.0).abs());
        let scaled = DenseOperator::new(ps.q(), target.n_sites(), target.matrix() * phase)?;
        worst = worst.max(conj.max_abs_diff(&scaled)?);
    }
    Ok(worst)
}

/// The single-qudit stabilizer states: the Clifford orbit of `|0⟩`, one
/// representative per ray.
pub fn stabilizer_orbit(ps: &PhaseSpace) -> Result<Vec<DenseState>> {
    let field = *ps.field();
    let q = field.q();
    if q > 7 {
        return Err(Error::Guard {
            what: "stabilizer orbit modulus",
            needed: q as u128,
            limit: 7,
        });
    }
    let mut states: Vec<DenseState> = Vec::new();
    for f in enumerate_sp2(&field) {
        let mu = metaplectic(ps, &f)?;
        let col: Vec<Complex64> = mu.column(0).iter().copied().collect();
        for s in 0..(q * q) as usize {
            let shift = PhasePoint::from_index(&field, 1, s);
            let t = displacement_monomial(ps, &shift)?;
            let mut amps = vec![Complex64::new(0.0, 0.0); q as usize];
            for (x, &a) in col.iter().enumerate() {
                amps[t.target[x]] = ps.omega(t.phase[x]) * a;
            }
            let st = DenseState::from_amplitudes(q, 1, amps)?;
            if !states.iter().any(|o| o.inner(&st).norm() > 1.0 - 1e-9) {
                states.push(st);
            }
        }
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sp2_orders() {
        for q in [3u64, 5, 7] {
            let f = PrimeField::new(q).unwrap();
            assert_eq!(enumerate_sp2(&f).len() as u64, q * (q * q - 1));
        }
    }

    #[test]
    fn sampled_matrices_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in [3u64, 5, 7] {
            let f = PrimeField::new(q).unwrap();
            for m in 1..=3 {
                for _ in 0..20 {
                    let s = random_symplectic(&f, m, &mut rng);
                    assert!(is_symplectic(&f, s.matrix()));
                }
            }
        }
        let f = PrimeField::new(5).unwrap();
        assert!(is_symplectic(&f, SymplecticMatrix::identity(2).matrix()));
    }

    #[test]
    fn j_matrix_gives_fourier() {
        let ps = PhaseSpace::new(5).unwrap();
        let f = *ps.field();
        // F = J sends Z to X^{-1} and X to Z.
        let j = SymplecticMatrix::new(&f, symplectic_gram(&f, 1)).unwrap();
        let u = symplectic_to_unitary(&ps, &j, &PhasePoint::origin(1)).unwrap();
        let phase = u.get(0, 0) * 5f64.sqrt();
        for a in 0..5 {
            for b in 0..5 {
                let dft = ps.omega((a * b) as u64) / 5f64.sqrt();
                assert!((u.get(a, b) - phase * dft).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_with_shift_is_displacement() {
        let ps = PhaseSpace::new(3).unwrap();
        let f = *ps.field();
        let s = PhasePoint::new(&f, vec![2, 1]).unwrap();
        let u = symplectic_to_unitary(&ps, &SymplecticMatrix::identity(1), &s).unwrap();
        let t = displacement_op(&ps, &s).unwrap();
        let phase = t.adjoint().mul(&u).unwrap().trace() / 3.0;
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        let scaled = DenseOperator::new(3, 1, t.matrix() * phase).unwrap();
        assert!(u.max_abs_diff(&scaled).unwrap() < 1e-12);
    }

    #[test]
    fn orbit_sizes() {
        for q in [3u64, 5, 7] {
            let ps = PhaseSpace::new(q).unwrap();
            let orbit = stabilizer_orbit(&ps).unwrap();
            assert_eq!(orbit.len() as u64, q * (q + 1));
            for k in 0..q {
                let basis = DenseState::product(q, &[k]).unwrap();
                assert!(orbit.iter().any(|s| (s.inner(&basis).norm() - 1.0).abs() < 1e-9));
            }
        }
    }
}
