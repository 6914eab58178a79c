use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PhaseSpace;
use crate::error::{Error, Result};
use crate::operator::{dimension, DenseOperator};

/// Which replicated single-qudit sum to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    /// `A^(2n) = Σ_u A_u^{⊗2n}`.
    PhasePoint,
    /// `T^(2n) = Σ_u T_u^{⊗n} ⊗ T_u^{†⊗n}`.
    Displacement,
}

/// Largest matrix dimension `q^{2n}` accepted by [`moment_operator`].
pub const MOMENT_GUARD: u128 = 4000;

/// Builds the single-qudit moment operator on `2n` replicas. Every summand is a
/// monomial, so the build is `O(q^{2n+2})`.
pub fn moment_operator(ps: &PhaseSpace, kind: MomentKind, n: usize) -> Result<DenseOperator> {
    if n == 0 {
        return Err(Error::Validation("replica index n must be at least 1".into()));
    }
    let f = *ps.field();
    let q = f.q();
    let reps = 2 * n;
    let dim_needed = f.count(reps).unwrap_or(u128::MAX);
    Error::guard("q^{2n} moment operator rows", dim_needed, MOMENT_GUARD)?;
    let dim = dimension(q, reps)?;
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for m in 0..q {
        for nn in 0..q {
            let base = f.neg(f.mul(f.inv2(), f.mul(m, nn)));
            for x in 0..dim {
                let xd = f.digits(x, reps);
                let mut ph = 0u64;
                let mut y = 0usize;
                for (r, &xr) in xd.iter().enumerate() {
                    let (img, p) = match kind {
                        MomentKind::PhasePoint => (
                            f.sub(f.mul(2, nn), xr),
                            f.mul(f.mul(2, m), f.sub(nn, xr)),
                        ),
                        MomentKind::Displacement => {
                            // Replicas n..2n carry T_u^† = T_{-u}.
                            let (mm, sh) = if r < n { (m, nn) } else { (f.neg(m), f.neg(nn)) };
                            let img = f.add(xr, sh);
                            (img, f.add(base, f.mul(mm, img)))
                        }
                    };
                    ph = f.add(ph, p);
                    y = y * q as usize + img as usize;
                }
                mat[(y, x)] += ps.omega(ph);
            }
        }
    }
    DenseOperator::new(q, reps, mat)
}
