//! Exact pure-state simulation of brickwork circuits on N qudits.
//!
//! States are full amplitude vectors; density matrices are only ever formed
//! for subsystems.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{dimension, DenseOperator, DEFAULT_TOL};

/// Largest number of amplitudes a [`DenseState`] may hold.
pub const MEMORY_GUARD: u128 = 3_000_000;
/// Largest reduced density matrix dimension `q^{|A|}`.
pub const REGION_GUARD: u128 = 4096;
/// Largest number of outcomes enumerated by [`measure_region`].
pub const ENUMERATE_GUARD: u128 = 2187;

fn check_memory(q: u64, n_sites: usize) -> Result<usize> {
    let needed = (q as u128).checked_pow(n_sites as u32).unwrap_or(u128::MAX);
    Error::guard("state amplitudes q^N", needed, MEMORY_GUARD)?;
    dimension(q, n_sites)
}

/// Pure state on `n_sites` qudits; site 0 is the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    q: u64,
    n_sites: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// Computational basis product state `|x_0 x_1 ... x_{N-1}⟩`.
    pub fn product(q: u64, digits: &[u64]) -> Result<Self> {
        let dim = check_memory(q, digits.len())?;
        if let Some(&bad) = digits.iter().find(|&&d| d >= q) {
            return Err(Error::Validation(format!("basis digit {bad} out of range for q={q}")));
        }
        let idx = digits.iter().fold(0usize, |a, &d| a * q as usize + d as usize);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(DenseState {
            q,
            n_sites: digits.len(),
            amps,
        })
    }

    pub fn zero(q: u64, n_sites: usize) -> Result<Self> {
        Self::product(q, &vec![0; n_sites])
    }

    /// Wraps explicit amplitudes; they must already be normalized.
    pub fn from_amplitudes(q: u64, n_sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        let dim = check_memory(q, n_sites)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amps.len(),
            });
        }
        let state = DenseState { q, n_sites, amps };
        let err = (state.norm() - 1.0).abs();
        if err > DEFAULT_TOL {
            return Err(Error::Validation(format!("state norm differs from 1 by {err:.3e}")));
        }
        Ok(state)
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn density(&self) -> Result<DenseOperator> {
        DenseOperator::from_pure(self.q, self.n_sites, &self.amps)
    }

    #[inline]
    fn stride(&self, site: usize) -> usize {
        (self.q as usize).pow((self.n_sites - 1 - site) as u32)
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        for (k, &s) in sites.iter().enumerate() {
            if s >= self.n_sites {
                return Err(Error::Validation(format!(
                    "site {s} out of range for {} sites",
                    self.n_sites
                )));
            }
            if sites[..k].contains(&s) {
                return Err(Error::Validation(format!("site {s} appears twice")));
            }
        }
        Ok(())
    }

    /// Applies a unitary acting on `sites` (in the given order, first site most
    /// significant in the gate's basis). Checks unitarity and site validity.
    pub fn apply_gate(&mut self, gate: &DenseOperator, sites: &[usize]) -> Result<()> {
        self.check_sites(sites)?;
        if gate.q() != self.q || gate.n_sites() != sites.len() {
            return Err(Error::DimensionMismatch {
                expected: sites.len(),
                got: gate.n_sites(),
            });
        }
        let defect = gate.unitarity_defect();
        if defect > gate.tol() {
            return Err(Error::Validation(format!(
                "gate is not unitary (defect {defect:.3e})"
            )));
        }
        self.apply_gate_unchecked(gate.matrix(), sites);
        Ok(())
    }

    /// Applies a two-qudit unitary on `(i, j)`.
    pub fn apply_two_qudit_gate(&mut self, gate: &DenseOperator, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::Validation(format!("site collision at {i}")));
        }
        self.apply_gate(gate, &[i, j])
    }

    /// Gate application without validation, for gates produced by trusted
    /// samplers. Panics if `sites` are out of range.
    pub fn apply_gate_unchecked(&mut self, gate: &DMatrix<Complex64>, sites: &[usize]) {
        let q = self.q as usize;
        let k = sites.len();
        let gdim = q.pow(k as u32);
        debug_assert_eq!(gate.nrows(), gdim);
        let strides: Vec<usize> = sites.iter().map(|&s| self.stride(s)).collect();
        // Offsets of each local basis state relative to a base index.
        let offsets: Vec<usize> = (0..gdim)
            .map(|l| {
                let mut rem = l;
                let mut off = 0;
                for t in (0..k).rev() {
                    off += (rem % q) * strides[t];
                    rem /= q;
                }
                off
            })
            .collect();
        let mut local = vec![Complex64::new(0.0, 0.0); gdim];
        let mut out = vec![Complex64::new(0.0, 0.0); gdim];
        for base in 0..self.amps.len() {
            if strides.iter().any(|&s| (base / s) % q != 0) {
                continue;
            }
            for (l, &off) in offsets.iter().enumerate() {
                local[l] = self.amps[base + off];
            }
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, v) in local.iter().enumerate() {
                    acc += gate[(r, c)] * v;
                }
                *o = acc;
            }
            for (l, &off) in offsets.iter().enumerate() {
                self.amps[base + off] = out[l];
            }
        }
    }

    /// Appends `|M|` reference qudits (after the existing sites) and replaces
    /// each site of `region` with half of a maximally entangled pair
    /// `Σ_k |k⟩_M |k⟩_R / √q`. The sites of `region` must be in `|0⟩`.
    pub fn attach_reference(&self, region: &Region) -> Result<DenseState> {
        region.check(self.n_sites)?;
        let m = region.len();
        let new_n = self.n_sites + m;
        let dim = check_memory(self.q, new_n)?;
        let q = self.q as usize;
        let strides: Vec<usize> = region.sites().iter().map(|&s| self.stride(s)).collect();
        let leaked: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(x, _)| strides.iter().any(|&s| (x / s) % q != 0))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if leaked > DEFAULT_TOL {
            return Err(Error::Validation(
                "reference attachment needs the region in |0⟩".into(),
            ));
        }
        let rdim = q.pow(m as u32);
        let scale = 1.0 / (rdim as f64).sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (x, &a) in self.amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) || strides.iter().any(|&s| (x / s) % q != 0) {
                continue;
            }
            for k in 0..rdim {
                let mut rem = k;
                let mut sys = x;
                for t in (0..m).rev() {
                    sys += (rem % q) * strides[t];
                    rem /= q;
                }
                amps[sys * rdim + k] = a * scale;
            }
        }
        Ok(DenseState {
            q: self.q,
            n_sites: new_n,
            amps,
        })
    }

    /// Reduced density matrix on `region`, with sites taken in sorted order.
    pub fn reduced_density(&self, region: &Region) -> Result<DenseOperator> {
        region.check(self.n_sites)?;
        let k = region.len();
        let needed = (self.q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        Error::guard("reduced density dimension q^|A|", needed, REGION_GUARD)?;
        let q = self.q as usize;
        let da = q.pow(k as u32);
        let db = self.dim() / da;
        let a_sites = region.sites();
        let b_sites: Vec<usize> = (0..self.n_sites).filter(|s| !a_sites.contains(s)).collect();
        let a_strides: Vec<usize> = a_sites.iter().map(|&s| self.stride(s)).collect();
        let b_strides: Vec<usize> = b_sites.iter().map(|&s| self.stride(s)).collect();
        let a_off = offsets(q, &a_strides);
        let b_off = offsets(q, &b_strides);
        let psi = DMatrix::from_fn(da, db, |i, j| self.amps[a_off[i] + b_off[j]]);
        let rho = &psi * psi.adjoint();
        DenseOperator::new(self.q, k, rho)
    }
}

/// Linear offsets of every digit assignment for sites with the given strides.
fn offsets(q: usize, strides: &[usize]) -> Vec<usize> {
    let k = strides.len();
    (0..q.pow(k as u32))
        .map(|l| {
            let mut rem = l;
            let mut off = 0;
            for t in (0..k).rev() {
                off += (rem % q) * strides[t];
                rem /= q;
            }
            off
        })
        .collect()
}

/// A set of distinct site indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    pub fn new(sites: &[usize]) -> Result<Self> {
        let mut s = sites.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("region {sites:?} repeats a site")));
        }
        Ok(Region { sites: s })
    }

    pub fn empty() -> Self {
        Region::default()
    }

    pub fn range(start: usize, end: usize) -> Self {
        Region {
            sites: (start..end).collect(),
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut s = self.sites.clone();
        s.extend(other.sites.iter().filter(|x| !self.contains(**x)));
        s.sort_unstable();
        Region { sites: s }
    }

    pub fn complement(&self, n_sites: usize) -> Region {
        Region {
            sites: (0..n_sites).filter(|s| !self.contains(*s)).collect(),
        }
    }

    pub fn check(&self, n_sites: usize) -> Result<()> {
        match self.sites.last() {
            Some(&s) if s >= n_sites => Err(Error::Validation(format!(
                "region site {s} out of range for {n_sites} sites"
            ))),
            _ => Ok(()),
        }
    }
}

/// Gate positions of one brickwork layer with open boundaries: even layers
/// couple (0,1),(2,3),..., odd layers couple (1,2),(3,4),....
pub fn brickwork_pairs(n_sites: usize, layer: usize) -> Vec<(usize, usize)> {
    (layer % 2..n_sites.saturating_sub(1))
        .step_by(2)
        .map(|i| (i, i + 1))
        .collect()
}

/// Applies one brickwork layer, drawing each gate from `supplier(i, j)`.
pub fn brickwork_layer<F>(state: &mut DenseState, layer: usize, mut supplier: F) -> Result<()>
where
    F: FnMut(usize, usize) -> DenseOperator,
{
    if state.n_sites() < 2 {
        return Err(Error::Validation("brickwork needs at least two sites".into()));
    }
    for (i, j) in brickwork_pairs(state.n_sites(), layer) {
        let gate = supplier(i, j);
        state.apply_two_qudit_gate(&gate, i, j)?;
    }
    Ok(())
}

/// Von Neumann and Rényi entropies from the spectrum of a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn of(rho: &DenseOperator) -> Self {
        let eig = rho.matrix().clone().symmetric_eigenvalues();
        Spectrum {
            eigenvalues: eig.iter().map(|&e| e.max(0.0)).collect(),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `-Σ λ ln λ` with `0 ln 0 = 0`.
    pub fn von_neumann(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum()
    }

    /// `S^(n) = ln(Tr ρ^n) / (1 - n)`; `n = 1` gives the von Neumann entropy.
    pub fn renyi(&self, n: f64) -> f64 {
        if (n - 1.0).abs() < 1e-12 {
            return self.von_neumann();
        }
        let tr: f64 = self.eigenvalues.iter().map(|&l| l.powf(n)).sum();
        tr.ln() / (1.0 - n)
    }
}

pub fn von_neumann_entropy(rho: &DenseOperator) -> f64 {
    Spectrum::of(rho).von_neumann()
}

/// Haar-random unitary of size `dim` via QR of a complex Gaussian matrix with
/// the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random unitary on `n_sites` qudits as a [`DenseOperator`].
pub fn haar_operator<R: Rng + ?Sized>(rng: &mut R, q: u64, n_sites: usize) -> Result<DenseOperator> {
    let dim = dimension(q, n_sites)?;
    DenseOperator::new(q, n_sites, haar_unitary(rng, dim))
}

/// How to resolve measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    /// Every outcome with nonzero Born probability.
    Enumerate,
    /// One outcome drawn from the Born distribution.
    Sample,
}

/// Measurement basis per site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureBasis {
    Computational,
    /// An independent single-qudit Haar unitary on each site, then the
    /// computational-basis projection.
    HaarRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    pub digits: Vec<u64>,
    /// Normalized post-measurement state on all sites.
    pub post_state: DenseState,
}

/// Probabilities below this are dropped from enumerations.
const NEGLIGIBLE_PROBABILITY: f64 = 1e-15;

/// Projectively measures `region`.
pub fn measure_region<R: Rng + ?Sized>(
    state: &DenseState,
    region: &Region,
    mode: MeasureMode,
    basis: MeasureBasis,
    rng: &mut R,
) -> Result<Vec<Outcome>> {
    region.check(state.n_sites())?;
    let q = state.q() as usize;
    let k = region.len();
    let mut work = state.clone();
    if basis == MeasureBasis::HaarRandom {
        for &s in region.sites() {
            let u = haar_unitary(rng, q);
            work.apply_gate_unchecked(&u, &[s]);
        }
    }
    let strides: Vec<usize> = region.sites().iter().map(|&s| work.stride(s)).collect();
    match mode {
        MeasureMode::Enumerate => {
            let needed = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
            if needed > ENUMERATE_GUARD {
                return Err(Error::Guard {
                    what: "measurement outcomes q^|R| (use sample mode)",
                    needed,
                    limit: ENUMERATE_GUARD,
                });
            }
            let outcomes = q.pow(k as u32);
            let mut probs = vec![0.0; outcomes];
            for (x, a) in work.amps.iter().enumerate() {
                probs[outcome_index(x, q, &strides)] += a.norm_sqr();
            }
            let mut out = Vec::new();
            for (o, &p) in probs.iter().enumerate() {
                if p <= NEGLIGIBLE_PROBABILITY {
                    continue;
                }
                out.push(project(&work, o, p, q, &strides));
            }
            Ok(out)
        }
        MeasureMode::Sample => {
            // Site by site from the conditional Born distribution.
            let mut current = work;
            let mut total = 1.0;
            let mut digits = Vec::with_capacity(k);
            for t in 0..k {
                let stride = strides[t];
                let mut probs = vec![0.0; q];
                for (x, a) in current.amps.iter().enumerate() {
                    probs[(x / stride) % q] += a.norm_sqr();
                }
                let r: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
                let mut acc = 0.0;
                let mut pick = q - 1;
                for (v, &p) in probs.iter().enumerate() {
                    acc += p;
                    if r < acc && p > 0.0 {
                        pick = v;
                        break;
                    }
                }
                let p = probs[pick];
                let o = project(&current, pick, p, q, &[stride]);
                current = o.post_state;
                total *= p;
                digits.push(pick as u64);
            }
            Ok(vec![Outcome {
                probability: total,
                digits,
                post_state: current,
            }])
        }
    }
}

fn outcome_index(x: usize, q: usize, strides: &[usize]) -> usize {
    strides.iter().fold(0, |acc, &s| acc * q + (x / s) % q)
}

fn project(state: &DenseState, outcome: usize, p: f64, q: usize, strides: &[usize]) -> Outcome {
    let scale = 1.0 / p.sqrt();
    let amps: Vec<Complex64> = state
        .amps
        .iter()
        .enumerate()
        .map(|(x, &a)| {
            if outcome_index(x, q, strides) == outcome {
                a * scale
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut digits = Vec::with_capacity(strides.len());
    let mut rem = outcome;
    for _ in strides {
        digits.push((rem % q) as u64);
        rem /= q;
    }
    digits.reverse();
    Outcome {
        probability: p,
        digits,
        post_state: DenseState {
            q: state.q,
            n_sites: state.n_sites,
            amps,
        },
    }
}
