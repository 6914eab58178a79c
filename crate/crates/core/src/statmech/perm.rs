use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::commutant::{
    clifford_weingarten_pinv, distance_matrix, enumerate_sigma, invert_gram, StochasticLagrangian,
};
use crate::error::{Error, Result};
use crate::fqarith::PrimeField;

/// Largest `t!` accepted when enumerating `S_t`.
pub const PERMUTATION_GUARD: usize = 5040;

/// A permutation of `{0, …, k-1}` stored by its images.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Validation(format!("{images:?} is not a bijection")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(k: usize) -> Self {
        Permutation {
            images: (0..k).collect(),
        }
    }

    /// `X = (0 1)(2 3)…` on `2n` replicas.
    pub fn multi_swap(n: usize) -> Self {
        Permutation {
            images: (0..2 * n).map(|i| i ^ 1).collect(),
        }
    }

    /// The cycle `i ↦ i + 1 mod k`.
    pub fn cyclic(k: usize) -> Self {
        Permutation {
            images: (0..k).map(|i| (i + 1) % k).collect(),
        }
    }

    /// All of `S_k` in lexicographic order.
    pub fn all(k: usize) -> Result<Vec<Self>> {
        let count = (1..=k).try_fold(1usize, |a, b| a.checked_mul(b));
        match count {
            Some(c) if c <= PERMUTATION_GUARD => {}
            _ => {
                return Err(Error::Guard {
                    what: "t! permutations",
                    needed: count.map_or(u128::MAX, |c| c as u128),
                    limit: PERMUTATION_GUARD as u128,
                })
            }
        }
        Ok((0..k)
            .permutations(k)
            .map(|images| Permutation { images })
            .collect())
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        self.check_len(other)?;
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    /// Number of cycles, fixed points included.
    pub fn cycles(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if !seen[start] {
                count += 1;
                let mut i = start;
                while !seen[i] {
                    seen[i] = true;
                    i = self.images[i];
                }
            }
        }
        count
    }

    /// `|σ, τ| = k - #(σ τ⁻¹)`.
    pub fn distance(&self, other: &Permutation) -> Result<usize> {
        Ok(self.len() - self.compose(&other.inverse())?.cycles())
    }

    fn check_len(&self, other: &Permutation) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }
}

/// Haar Weingarten matrix on `S_t` in dimension `d`, the inverse of
/// `G(σ, τ) = d^{#(σ τ⁻¹)}`. Rows and columns follow [`Permutation::all`].
#[derive(Debug, Clone)]
pub struct HaarWeingarten {
    pub perms: Vec<Permutation>,
    pub gram: DMatrix<f64>,
    pub wg: DMatrix<f64>,
}

pub fn weingarten_matrix(t: usize, d: u64) -> Result<HaarWeingarten> {
    let perms = Permutation::all(t)?;
    let df = d as f64;
    let n = perms.len();
    let mut gram = DMatrix::zeros(n, n);
    for (i, s) in perms.iter().enumerate() {
        for (j, p) in perms.iter().enumerate() {
            gram[(i, j)] = df.powi(s.compose(&p.inverse())?.cycles() as i32);
        }
    }
    let wg = invert_gram(&gram)?;
    Ok(HaarWeingarten { perms, gram, wg })
}

/// Which gate ensemble the replica spins average over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Haar,
    Clifford,
}

/// Three-body weights of a two-qudit gate,
/// `J(a, b; c) = Σ_d Wg(c, d) q^{2t - |d,a| - |d,b|}`.
///
/// Haar spins are permutations of `S_t`; Clifford spins are the elements of
/// Σ_t(q). The Clifford Gram matrix for a two-qudit gate is singular at
/// `t ≥ 4`, so the Clifford model uses its Moore-Penrose inverse, which
/// picks the minimum-norm coefficients.
#[derive(Debug, Clone)]
pub struct WeightModel {
    q: u64,
    t: usize,
    mode: WeightMode,
    dist: Vec<Vec<usize>>,
    wg: DMatrix<f64>,
    perms: Vec<Permutation>,
    lagrangians: Vec<StochasticLagrangian>,
}

impl WeightModel {
    pub fn haar(q: u64, t: usize) -> Result<Self> {
        PrimeField::new(q)?;
        let hw = weingarten_matrix(t, q * q)?;
        let dist = hw
            .perms
            .iter()
            .map(|a| hw.perms.iter().map(|b| a.distance(b)).collect())
            .collect::<Result<_>>()?;
        Ok(WeightModel {
            q,
            t,
            mode: WeightMode::Haar,
            dist,
            wg: hw.wg,
            perms: hw.perms,
            lagrangians: Vec::new(),
        })
    }

    pub fn clifford(q: u64, t: usize) -> Result<Self> {
        let field = PrimeField::new(q)?;
        let sigma = enumerate_sigma(&field, t)?;
        let dist = distance_matrix(&field, &sigma)?;
        let wg = clifford_weingarten_pinv(&field, &sigma, 2)?;
        Ok(WeightModel {
            q,
            t,
            mode: WeightMode::Clifford,
            dist,
            wg,
            perms: Vec::new(),
            lagrangians: sigma,
        })
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of spin values.
    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.dist[a][b]
    }

    /// Spin index of a permutation in Haar mode.
    pub fn perm_index(&self, p: &Permutation) -> Option<usize> {
        self.perms.iter().position(|x| x == p)
    }

    /// Spin index of a subspace in Clifford mode.
    pub fn lagrangian_index(&self, s: &StochasticLagrangian) -> Option<usize> {
        self.lagrangians.iter().position(|x| x == s)
    }

    /// The weight summed numerically, with no shortcut for aligned spins.
    pub fn three_body_sum(&self, a: usize, b: usize, c: usize) -> f64 {
        let q = self.q as f64;
        let two_t = 2 * self.t;
        (0..self.len())
            .map(|d| self.wg[(c, d)] * q.powi((two_t - self.dist[d][a] - self.dist[d][b]) as i32))
            .sum()
    }

    /// `J(a, b; c)`. Aligned upper spins give `δ_{ac}` exactly: the
    /// operator `r(a)^{⊗2}` already lies in the commutant, so the twirl
    /// leaves it unchanged.
    pub fn three_body_weight(&self, a: usize, b: usize, c: usize) -> f64 {
        if a == b {
            return if a == c { 1.0 } else { 0.0 };
        }
        self.three_body_sum(a, b, c)
    }
}
