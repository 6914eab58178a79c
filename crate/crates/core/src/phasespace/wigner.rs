use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{PhasePoint, PhaseSpace};
use crate::error::{Error, Result};
use crate::fqarith::PrimeField;
use crate::operator::DenseOperator;

/// Wigner function values for every phase point, indexed by
/// [`PhasePoint::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct WignerTable {
    q: u64,
    n_sites: usize,
    values: Vec<f64>,
}

impl WignerTable {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, field: &PrimeField, pp: &PhasePoint) -> f64 {
        self.values[pp.index(field)]
    }

    pub fn one_norm(&self) -> f64 {
        self.values.iter().map(|w| w.abs()).sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ_u |W(u)|^{2n}`.
    pub fn renyi_moment(&self, n: f64) -> f64 {
        self.values.iter().map(|w| w.abs().powf(2.0 * n)).sum()
    }

    pub fn measures(&self) -> MagicMeasures {
        let one_norm = self.one_norm();
        MagicMeasures {
            one_norm,
            sum_negativity: (one_norm - 1.0) / 2.0,
            mana: one_norm.ln(),
        }
    }
}

/// Weyl (characteristic) function `χ(u) = Tr(T_u ρ)` for every phase point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylTable {
    q: u64,
    n_sites: usize,
    values: Vec<Complex64>,
}

impl WeylTable {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, field: &PrimeField, pp: &PhasePoint) -> Complex64 {
        self.values[pp.index(field)]
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

/// Wigner one-norm, sum negativity and mana (natural log).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagicMeasures {
    pub one_norm: f64,
    pub sum_negativity: f64,
    pub mana: f64,
}

fn check_field(ps: &PhaseSpace, rho: &DenseOperator) -> Result<()> {
    if ps.q() != rho.q() {
        return Err(Error::Validation(format!(
            "operator over q={} used with phase space over q={}",
            rho.q(),
            ps.q()
        )));
    }
    Ok(())
}

fn check_point(rho: &DenseOperator, pp: &PhasePoint) -> Result<()> {
    if pp.n_sites() != rho.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: 2 * rho.n_sites(),
            got: pp.entries().len(),
        });
    }
    Ok(())
}

/// `W_ρ(u) = q^{-N} Tr[A_u ρ]` at a single point.
pub fn wigner_function(ps: &PhaseSpace, rho: &DenseOperator, pp: &PhasePoint) -> Result<f64> {
    check_field(ps, rho)?;
    check_point(rho, pp)?;
    rho.validate_density()?;
    let f = ps.field();
    let n = rho.n_sites();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..rho.dim() {
        let xd = f.digits(x, n);
        let mut ph = 0;
        let mut y = 0usize;
        for i in 0..n {
            ph = f.add(ph, f.mul(f.mul(2, pp.m(i)), f.sub(pp.n(i), xd[i])));
            y = y * f.q() as usize + f.sub(f.mul(2, pp.n(i)), xd[i]) as usize;
        }
        // (A_u)_{y,x} ρ_{x,y}
        acc += ps.omega(ph) * rho.get(x, y);
    }
    real_part(acc / rho.dim() as f64, rho.tol())
}

/// `χ_ρ(u) = Tr(T_u ρ)` at a single point.
pub fn weyl_function(ps: &PhaseSpace, rho: &DenseOperator, pp: &PhasePoint) -> Result<Complex64> {
    check_field(ps, rho)?;
    check_point(rho, pp)?;
    rho.validate_density()?;
    let f = ps.field();
    let n = rho.n_sites();
    let base: u64 = (0..n)
        .map(|i| f.neg(f.mul(f.inv2(), f.mul(pp.m(i), pp.n(i)))))
        .fold(0, |a, b| f.add(a, b));
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..rho.dim() {
        let xd = f.digits(x, n);
        let mut ph = base;
        let mut y = 0usize;
        for i in 0..n {
            let s = f.add(xd[i], pp.n(i));
            ph = f.add(ph, f.mul(pp.m(i), s));
            y = y * f.q() as usize + s as usize;
        }
        acc += ps.omega(ph) * rho.get(x, y);
    }
    Ok(acc)
}

fn real_part(z: Complex64, tol: f64) -> Result<f64> {
    if z.im.abs() > tol {
        return Err(Error::Numerical(format!(
            "Wigner value has imaginary residue {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// In-place transform `g(m) = Σ_y w^{m·y} f(y)` over `F_q^N`, one axis at a time.
fn dft_all_axes(ps: &PhaseSpace, buf: &mut [Complex64], n_sites: usize) {
    let q = ps.q() as usize;
    let mut fiber = vec![Complex64::new(0.0, 0.0); q];
    for axis in 0..n_sites {
        let stride = q.pow((n_sites - 1 - axis) as u32);
        let block = stride * q;
        for start in (0..buf.len()).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (j, slot) in fiber.iter_mut().enumerate() {
                    *slot = buf[base + j * stride];
                }
                for m in 0..q {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, v) in fiber.iter().enumerate() {
                        acc += ps.omega((m * j) as u64) * v;
                    }
                    buf[base + m * stride] = acc;
                }
            }
        }
    }
}

/// Interleaved phase-point index from separate `m` and `n` digit vectors.
fn interleave(q: usize, md: &[u64], nd: &[u64]) -> usize {
    md.iter()
        .zip(nd)
        .fold(0usize, |acc, (&m, &n)| (acc * q + m as usize) * q + n as usize)
}

/// For each `n`, transforms the slice `y ↦ ρ[c(n) - a·y][c(n) + a·y]` over `y`,
/// where `c` and `a` fix which diagonal band is read. Returns values in
/// interleaved index order.
fn banded_transform(
    ps: &PhaseSpace,
    rho: &DenseOperator,
    centre_is_n: bool,
) -> Vec<Complex64> {
    let f = *ps.field();
    let q = f.q() as usize;
    let n_sites = rho.n_sites();
    let d = rho.dim();
    let per_n: Vec<Vec<Complex64>> = (0..d)
        .into_par_iter()
        .map(|nidx| {
            let nd = f.digits(nidx, n_sites);
            let mut buf = vec![Complex64::new(0.0, 0.0); d];
            for (yidx, slot) in buf.iter_mut().enumerate() {
                let yd = f.digits(yidx, n_sites);
                let (mut row, mut col) = (0usize, 0usize);
                for i in 0..n_sites {
                    // Wigner: centre n, offset y/2. Weyl: centre z=y, offset n/2.
                    let (c, o) = if centre_is_n {
                        (nd[i], f.mul(f.inv2(), yd[i]))
                    } else {
                        (yd[i], f.mul(f.inv2(), nd[i]))
                    };
                    row = row * q + f.sub(c, o) as usize;
                    col = col * q + f.add(c, o) as usize;
                }
                *slot = rho.get(row, col);
            }
            dft_all_axes(ps, &mut buf, n_sites);
            buf
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for (nidx, col) in per_n.iter().enumerate() {
        let nd = f.digits(nidx, n_sites);
        for (midx, &v) in col.iter().enumerate() {
            let md = f.digits(midx, n_sites);
            out[interleave(q, &md, &nd)] = v;
        }
    }
    out
}

/// The full Wigner table in `O(N q^{2N+1})` without materializing any `A_u`.
pub fn wigner_table(ps: &PhaseSpace, rho: &DenseOperator) -> Result<WignerTable> {
    check_field(ps, rho)?;
    rho.validate_density()?;
    let d = rho.dim() as f64;
    let values = banded_transform(ps, rho, true)
        .into_iter()
        .map(|z| real_part(z / d, rho.tol()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(WignerTable {
        q: ps.q(),
        n_sites: rho.n_sites(),
        values,
    })
}

/// The full Weyl table `χ_ρ(u) = Tr(T_u ρ)`.
pub fn weyl_table(ps: &PhaseSpace, rho: &DenseOperator) -> Result<WeylTable> {
    check_field(ps, rho)?;
    rho.validate_density()?;
    Ok(WeylTable {
        q: ps.q(),
        n_sites: rho.n_sites(),
        values: banded_transform(ps, rho, false),
    })
}

pub fn magic_measures(ps: &PhaseSpace, rho: &DenseOperator) -> Result<MagicMeasures> {
    Ok(wigner_table(ps, rho)?.measures())
}

/// Stabilizer 2-Rényi entropy `M_2 = -ln(Σ_u |χ(u)|^4 / (d Tr ρ²))`.
pub fn sre_m2(ps: &PhaseSpace, rho: &DenseOperator) -> Result<f64> {
    let chi = weyl_table(ps, rho)?;
    let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
    let fourth: f64 = chi.values.iter().map(|z| z.norm_sqr().powi(2)).sum();
    Ok(-(fourth / (rho.dim() as f64 * purity)).ln())
}
