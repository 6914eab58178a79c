use serde::{Deserialize, Serialize};

use crate::densesim::{brickwork_pairs, Region};
use crate::error::{Error, Result};

/// Circuit protocol whose replica boundary conditions a prediction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Haar brickwork on a product state; A against its complement.
    HaarSubsystem,
    /// Single-qudit Haar gates on the initial sites M, then Clifford
    /// brickwork.
    SingleQuditInjection,
    /// One Haar unitary on all of M, then Clifford brickwork.
    MultiQuditInjection,
    /// Single-qudit injection on M, Clifford brickwork, and B measured in
    /// the computational basis.
    Concentration,
    /// Clifford brickwork on a product state; M measured in Haar-random
    /// bases and B in the computational basis at the end.
    Teleportation,
    /// The initial sites M are maximally entangled with a reference; the
    /// coherent information of the channel onto A.
    CoherentInfo,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::HaarSubsystem,
        Scenario::SingleQuditInjection,
        Scenario::MultiQuditInjection,
        Scenario::Concentration,
        Scenario::Teleportation,
        Scenario::CoherentInfo,
    ];

    /// Whether M lives on the final slice instead of the initial one.
    pub fn m_on_top(self) -> bool {
        self == Scenario::Teleportation
    }

    pub fn is_haar(self) -> bool {
        self == Scenario::HaarSubsystem
    }
}

/// Brickwork geometry: `n_sites` qudits, `depth` layers, the output region
/// A and the magic or measured region M.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    pub n_sites: usize,
    pub depth: usize,
    pub region_a: Vec<usize>,
    #[serde(default)]
    pub region_m: Vec<usize>,
}

impl Geometry {
    pub fn new(n_sites: usize, depth: usize, region_a: &[usize], region_m: &[usize]) -> Result<Self> {
        let g = Geometry {
            n_sites,
            depth,
            region_a: Region::new(region_a)?.sites().to_vec(),
            region_m: Region::new(region_m)?.sites().to_vec(),
        };
        g.a()?.check(n_sites)?;
        g.m()?.check(n_sites)?;
        Ok(g)
    }

    pub fn a(&self) -> Result<Region> {
        Region::new(&self.region_a)
    }

    pub fn m(&self) -> Result<Region> {
        Region::new(&self.region_m)
    }

    /// The final-slice sites that are neither A nor, on top, M.
    pub fn b(&self, scenario: Scenario) -> Result<Region> {
        let mut taken = self.a()?;
        if scenario.m_on_top() {
            taken = taken.union(&self.m()?);
        }
        Ok(taken.complement(self.n_sites))
    }

    /// Checks the assumptions of `scenario`, naming the one that fails.
    pub fn validate(&self, scenario: Scenario) -> Result<()> {
        let a = self.a()?;
        let m = self.m()?;
        a.check(self.n_sites)?;
        m.check(self.n_sites)?;
        if a.is_empty() {
            return Err(Error::Validation("region A must be nonempty".into()));
        }
        if scenario == Scenario::HaarSubsystem && !m.is_empty() {
            return Err(Error::Validation(
                "the Haar subsystem scenario has no magic region M".into(),
            ));
        }
        if scenario.m_on_top() && a.sites().iter().any(|&s| m.contains(s)) {
            return Err(Error::Validation(
                "measured region M must be disjoint from A on the final slice".into(),
            ));
        }
        Ok(())
    }
}

/// Sites reachable from `region` after `depth` brickwork layers.
pub fn future_cone(n_sites: usize, depth: usize, region: &Region) -> Region {
    spread(n_sites, (0..depth).collect::<Vec<_>>(), region)
}

/// Sites of the initial slice that can influence `region` at the end of a
/// depth-`depth` circuit.
pub fn past_cone(n_sites: usize, depth: usize, region: &Region) -> Region {
    spread(n_sites, (0..depth).rev().collect::<Vec<_>>(), region)
}

fn spread(n_sites: usize, layers: Vec<usize>, region: &Region) -> Region {
    let mut inside = vec![false; n_sites];
    for &s in region.sites() {
        inside[s] = true;
    }
    for layer in layers {
        for (i, j) in brickwork_pairs(n_sites, layer) {
            if inside[i] || inside[j] {
                inside[i] = true;
                inside[j] = true;
            }
        }
    }
    let sites: Vec<usize> = (0..n_sites).filter(|&s| inside[s]).collect();
    Region::new(&sites).expect("sorted and distinct")
}
