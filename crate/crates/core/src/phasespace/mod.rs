//! Displacement and phase-point operators, Wigner and Weyl functions, and the
//! magic measures built on them.

mod moments;
mod wigner;

pub use moments::{moment_operator, MomentKind, MOMENT_GUARD};
pub use wigner::{
    magic_measures, sre_m2, weyl_function, weyl_table, wigner_function, wigner_table,
    MagicMeasures, WeylTable, WignerTable,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fqarith::{FVector, PrimeField};
use crate::operator::{dimension, DenseOperator};

/// A prime field together with its cached roots of unity `w^k = exp(2πik/q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpace {
    field: PrimeField,
    roots: Vec<Complex64>,
}

impl PhaseSpace {
    pub fn new(q: u64) -> Result<Self> {
        Ok(Self::from_field(PrimeField::new(q)?))
    }

    pub fn from_field(field: PrimeField) -> Self {
        let q = field.q();
        let roots = (0..q)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / q as f64))
            .collect();
        PhaseSpace { field, roots }
    }

    #[inline]
    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.field.q()
    }

    /// `w^k` for any exponent; the exponent is reduced mod q.
    #[inline]
    pub fn omega(&self, k: u64) -> Complex64 {
        self.roots[(k % self.field.q()) as usize]
    }
}

/// A point `u = (m_1, n_1, ..., m_N, n_N)` of the discrete phase space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasePoint {
    u: FVector,
}

impl PhasePoint {
    pub fn new(field: &PrimeField, entries: Vec<u64>) -> Result<Self> {
        if entries.len() % 2 != 0 {
            return Err(Error::Validation(format!(
                "phase point needs an even number of entries, got {}",
                entries.len()
            )));
        }
        Ok(PhasePoint {
            u: FVector::new(field, entries)?,
        })
    }

    pub fn from_vector(u: FVector) -> Result<Self> {
        if u.len() % 2 != 0 {
            return Err(Error::Validation(format!(
                "phase point needs an even number of entries, got {}",
                u.len()
            )));
        }
        Ok(PhasePoint { u })
    }

    pub fn origin(n_sites: usize) -> Self {
        PhasePoint {
            u: FVector::zeros(2 * n_sites),
        }
    }

    /// The point with interleaved index `index` (first entry most significant).
    pub fn from_index(field: &PrimeField, n_sites: usize, index: usize) -> Self {
        PhasePoint {
            u: FVector::from_index(field, 2 * n_sites, index),
        }
    }

    pub fn index(&self, field: &PrimeField) -> usize {
        self.u.index(field)
    }

    /// All `q^{2N}` points in index order.
    pub fn all(field: &PrimeField, n_sites: usize) -> impl Iterator<Item = PhasePoint> + '_ {
        let total = (field.q() as usize).pow(2 * n_sites as u32);
        (0..total).map(move |i| PhasePoint::from_index(field, n_sites, i))
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.u.len() / 2
    }

    #[inline]
    pub fn m(&self, site: usize) -> u64 {
        self.u.entries()[2 * site]
    }

    #[inline]
    pub fn n(&self, site: usize) -> u64 {
        self.u.entries()[2 * site + 1]
    }

    pub fn vector(&self) -> &FVector {
        &self.u
    }

    pub fn entries(&self) -> &[u64] {
        self.u.entries()
    }
}

/// An operator with one nonzero entry per column: `|x⟩ ↦ w^{phase[x]} |target[x]⟩`.
#[derive(Debug, Clone)]
pub(crate) struct Monomial {
    pub target: Vec<usize>,
    pub phase: Vec<u64>,
}

impl Monomial {
    pub fn to_dense(&self, ps: &PhaseSpace, n_sites: usize) -> Result<DenseOperator> {
        let dim = self.target.len();
        let mut mat = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            mat[(self.target[x], x)] = ps.omega(self.phase[x]);
        }
        DenseOperator::new(ps.q(), n_sites, mat)
    }
}

fn check_point_sites(pp: &PhasePoint) -> Result<usize> {
    let n = pp.n_sites();
    if n == 0 {
        return Err(Error::Validation("phase point has no sites".into()));
    }
    Ok(n)
}

/// `T_u` as a monomial: `T_(m,n)|x⟩ = w^{-mn/2 + m(x+n)} |x+n⟩` per site.
pub(crate) fn displacement_monomial(ps: &PhaseSpace, pp: &PhasePoint) -> Result<Monomial> {
    let n_sites = check_point_sites(pp)?;
    let f = ps.field();
    let dim = dimension(f.q(), n_sites)?;
    let mut target = Vec::with_capacity(dim);
    let mut phase = Vec::with_capacity(dim);
    let base: u64 = (0..n_sites)
        .map(|i| f.neg(f.mul(f.inv2(), f.mul(pp.m(i), pp.n(i)))))
        .fold(0, |a, b| f.add(a, b));
    for x in 0..dim {
        let xd = f.digits(x, n_sites);
        let mut ph = base;
        let mut y = 0usize;
        for i in 0..n_sites {
            let shifted = f.add(xd[i], pp.n(i));
            ph = f.add(ph, f.mul(pp.m(i), shifted));
            y = y * f.q() as usize + shifted as usize;
        }
        target.push(y);
        phase.push(ph);
    }
    Ok(Monomial { target, phase })
}

/// `A_u` as a monomial: `A_(m,n)|x⟩ = w^{2m(n-x)} |2n-x⟩` per site.
pub(crate) fn phase_point_monomial(ps: &PhaseSpace, pp: &PhasePoint) -> Result<Monomial> {
    let n_sites = check_point_sites(pp)?;
    let f = ps.field();
    let dim = dimension(f.q(), n_sites)?;
    let mut target = Vec::with_capacity(dim);
    let mut phase = Vec::with_capacity(dim);
    for x in 0..dim {
        let xd = f.digits(x, n_sites);
        let mut ph = 0;
        let mut y = 0usize;
        for i in 0..n_sites {
            let reflected = f.sub(f.mul(2, pp.n(i)), xd[i]);
            ph = f.add(ph, f.mul(f.mul(2, pp.m(i)), f.sub(pp.n(i), xd[i])));
            y = y * f.q() as usize + reflected as usize;
        }
        target.push(y);
        phase.push(ph);
    }
    Ok(Monomial { target, phase })
}

/// Displacement (Heisenberg-Weyl) operator `T_u = w^{-mn/2} Z^m X^n`, tensored
/// over the sites of `pp`.
pub fn displacement_op(ps: &PhaseSpace, pp: &PhasePoint) -> Result<DenseOperator> {
    displacement_monomial(ps, pp)?.to_dense(ps, pp.n_sites())
}

/// Phase-point operator `A_u = T_u A_0 T_u^†`, where `A_0|x⟩ = |-x⟩` is parity.
pub fn phase_point_op(ps: &PhaseSpace, pp: &PhasePoint) -> Result<DenseOperator> {
    phase_point_monomial(ps, pp)?.to_dense(ps, pp.n_sites())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqarith::symplectic_form;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn displacement_examples() {
        let ps = PhaseSpace::new(3).unwrap();
        let f = *ps.field();
        let id = displacement_op(&ps, &PhasePoint::origin(1)).unwrap();
        assert!(id.max_abs_diff(&DenseOperator::identity(3, 1).unwrap()).unwrap() < 1e-15);
        let z = displacement_op(&ps, &PhasePoint::new(&f, vec![1, 0]).unwrap()).unwrap();
        for j in 0..3 {
            assert!(close(z.get(j, j), ps.omega(j as u64)));
        }
        let x = displacement_op(&ps, &PhasePoint::new(&f, vec![0, 1]).unwrap()).unwrap();
        let zx = z.mul(&x).unwrap();
        let xz = x.mul(&z).unwrap();
        // Z X = w X Z
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(zx.get(i, j), ps.omega(1) * xz.get(i, j)));
            }
        }
    }

    #[test]
    fn commutation_phase_is_symplectic() {
        let ps = PhaseSpace::new(5).unwrap();
        let f = *ps.field();
        for a in [3usize, 17, 101, 444] {
            for b in [1usize, 58, 230, 600] {
                let u = PhasePoint::from_index(&f, 2, a);
                let v = PhasePoint::from_index(&f, 2, b);
                let tu = displacement_op(&ps, &u).unwrap();
                let tv = displacement_op(&ps, &v).unwrap();
                let phase = ps.omega(symplectic_form(&f, u.vector(), v.vector()).unwrap());
                let lhs = tu.mul(&tv).unwrap();
                let rhs = tv.mul(&tu).unwrap();
                for i in 0..25 {
                    for j in 0..25 {
                        assert!(close(lhs.get(i, j), phase * rhs.get(i, j)));
                    }
                }
            }
        }
    }

    #[test]
    fn parity_operator() {
        let ps = PhaseSpace::new(3).unwrap();
        let a0 = phase_point_op(&ps, &PhasePoint::origin(1)).unwrap();
        for j in 0..3 {
            assert!(close(a0.get((3 - j) % 3, j), Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn phase_point_is_conjugated_parity() {
        let ps = PhaseSpace::new(7).unwrap();
        let f = *ps.field();
        let a0 = phase_point_op(&ps, &PhasePoint::origin(1)).unwrap();
        for idx in 0..49 {
            let u = PhasePoint::from_index(&f, 1, idx);
            let t = displacement_op(&ps, &u).unwrap();
            let conj = t.mul(&a0).unwrap().mul(&t.adjoint()).unwrap();
            let direct = phase_point_op(&ps, &u).unwrap();
            assert!(conj.max_abs_diff(&direct).unwrap() < 1e-12);
        }
    }
}
