use serde::{Deserialize, Serialize};

use super::geometry::{past_cone, Geometry, Scenario};
use super::mincut::{min_cut, three_label_cut, BrickworkGraph, Side, Spin, SpinSet, ThreeLabelCut};
use crate::densesim::Region;
use crate::error::{Error, Result};

/// Large-q prediction for one geometry. All quantities are in units of
/// `log q`.
///
/// Rényi moments refer to `Z_n = d_A^{2n-1} Σ_u |W(u)|^{2n}`, the
/// normalization in which a pure stabilizer state has `Z_n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub scenario: Scenario,
    /// Wall lengths `(l1, l2)` for each joint boundary choice.
    pub options: Vec<(usize, usize)>,
    /// Index into `options` selected by the replica limit.
    pub selected: usize,
    /// Optimal walls of the selected choice, with witness legs.
    pub walls: ThreeLabelCut,
    pub mana: f64,
    /// Entanglement entropy `S(A)` where it is defined.
    pub entropy_a: Option<f64>,
    pub coherent_info: Option<f64>,
    pub sre: Option<f64>,
}

impl Prediction {
    /// `log_q Z_n = -min (n-1)·l1 + n·l2` over all boundary choices.
    pub fn log_moment(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Validation("replica index n must be at least 1".into()));
        }
        let best = self
            .options
            .iter()
            .map(|&(l1, l2)| (n - 1) * l1 + n * l2)
            .min()
            .expect("at least one option");
        Ok(-(best as f64))
    }
}

/// Replica limit for competing boundary choices with costs
/// `l2 + (n-1)(l1 + l2)`: the choice that dominates as `n → 1⁺` has the
/// smallest `l2`, ties broken by `l1`. Mana is then `(l1 - l2)/2`.
pub fn replica_limit(options: &[(usize, usize)]) -> usize {
    (0..options.len())
        .min_by_key(|&i| (options[i].1, options[i].0, i))
        .expect("at least one option")
}

fn half(x: i64) -> f64 {
    x as f64 / 2.0
}

/// Asserts the units discipline: an integer or half-integer.
fn checked_half_integer(x: f64) -> Result<f64> {
    if (2.0 * x - (2.0 * x).round()).abs() > 1e-12 {
        return Err(Error::Numerical(format!("{x} is not a half-integer multiple of log q")));
    }
    Ok(x)
}

struct Boundaries {
    graph: BrickworkGraph,
    a: Region,
    b: Region,
    m: Region,
}

impl Boundaries {
    fn new(g: &Geometry, scenario: Scenario) -> Result<Self> {
        g.validate(scenario)?;
        Ok(Boundaries {
            graph: BrickworkGraph::new(g.n_sites, g.depth)?,
            a: g.a()?,
            b: g.b(scenario)?,
            m: g.m()?,
        })
    }

    fn spins(&self, bulk: SpinSet) -> Vec<SpinSet> {
        (0..self.graph.nodes().len())
            .map(|i| if self.graph.is_gate(i) { bulk } else { SpinSet::ANY })
            .collect()
    }

    fn set_top(&self, v: &mut [SpinSet], region: &Region, s: SpinSet) {
        for &site in region.sites() {
            v[self.graph.top(site)] = s;
        }
    }

    fn set_bottom(&self, v: &mut [SpinSet], region: &Region, s: SpinSet) {
        for &site in region.sites() {
            v[self.graph.bottom(site)] = s;
        }
    }

    /// Two-sided cut with `src` tops and `src_bottom` bottoms on the source
    /// side, `sink` tops and `sink_bottom` bottoms on the sink side, and
    /// gates either free or forced to the sink.
    fn wall(
        &self,
        src: &Region,
        src_bottom: &Region,
        sink: &Region,
        sink_bottom: &Region,
        gates_sink: bool,
    ) -> Result<usize> {
        let g = &self.graph;
        let mut sides: Vec<Side> = (0..g.nodes().len())
            .map(|i| if gates_sink && g.is_gate(i) { Side::Sink } else { Side::Free })
            .collect();
        for &s in src.sites() {
            sides[g.top(s)] = Side::Source;
        }
        for &s in src_bottom.sites() {
            sides[g.bottom(s)] = Side::Source;
        }
        for &s in sink.sites() {
            sides[g.top(s)] = Side::Sink;
        }
        for &s in sink_bottom.sites() {
            sides[g.bottom(s)] = Side::Sink;
        }
        Ok(min_cut(g, &sides)?.value)
    }
}

/// Evaluates the large-q prediction of `scenario` on `g`.
pub fn predict(g: &Geometry, scenario: Scenario) -> Result<Prediction> {
    let bd = Boundaries::new(g, scenario)?;
    let none = Region::empty();
    let anti = SpinSet::only(Spin::AntiIdentity);
    let ident = SpinSet::only(Spin::Identity);
    let bulk = if scenario.is_haar() { SpinSet::PERMUTATION } else { SpinSet::ANY };

    let mut base = bd.spins(bulk);
    bd.set_top(&mut base, &bd.a, anti);
    let mut choices: Vec<Vec<SpinSet>> = Vec::new();
    match scenario {
        Scenario::HaarSubsystem => {
            bd.set_top(&mut base, &bd.b, ident);
            choices.push(base);
        }
        Scenario::SingleQuditInjection => {
            bd.set_top(&mut base, &bd.b, ident);
            bd.set_bottom(&mut base, &bd.m, SpinSet::PERMUTATION);
            choices.push(base);
        }
        Scenario::MultiQuditInjection | Scenario::CoherentInfo => {
            bd.set_top(&mut base, &bd.b, ident);
            for s in [Spin::MultiSwap, Spin::Identity] {
                let mut v = base.clone();
                bd.set_bottom(&mut v, &bd.m, SpinSet::only(s));
                choices.push(v);
            }
        }
        Scenario::Concentration => {
            bd.set_bottom(&mut base, &bd.m, SpinSet::PERMUTATION);
            choices.push(base);
        }
        Scenario::Teleportation => {
            bd.set_top(&mut base, &bd.m, SpinSet::PERMUTATION);
            choices.push(base);
        }
    }
    let cuts = choices
        .iter()
        .map(|c| three_label_cut(&bd.graph, c))
        .collect::<Result<Vec<_>>>()?;
    let options: Vec<(usize, usize)> = cuts.iter().map(|c| (c.l1, c.l2)).collect();
    let selected = replica_limit(&options);
    let (l1, l2) = options[selected];
    let mana = checked_half_integer(half(l1 as i64 - l2 as i64))?;

    let product_state = !matches!(scenario, Scenario::CoherentInfo);
    let unmeasured = matches!(
        scenario,
        Scenario::HaarSubsystem
            | Scenario::SingleQuditInjection
            | Scenario::MultiQuditInjection
            | Scenario::CoherentInfo
    );
    let entropy_a = if unmeasured && product_state {
        Some(bd.wall(&bd.a, &none, &bd.b, &none, false)? as f64)
    } else {
        None
    };
    let coherent_info = if matches!(scenario, Scenario::MultiQuditInjection | Scenario::CoherentInfo) {
        let a_bm = bd.wall(&bd.a, &none, &bd.b, &bd.m, false)?;
        let am_b = bd.wall(&bd.a, &bd.m, &bd.b, &none, false)?;
        Some(a_bm as f64 - am_b as f64)
    } else {
        None
    };
    let sre = match scenario {
        Scenario::HaarSubsystem => {
            let wall = bd.wall(&bd.a, &none, &bd.b, &none, true)?;
            Some(wall as f64 - entropy_a.expect("set above"))
        }
        Scenario::SingleQuditInjection | Scenario::MultiQuditInjection => {
            let wall = bd.wall(&bd.a, &none, &bd.b, &bd.m, false)?;
            Some(wall as f64 - entropy_a.expect("set above"))
        }
        _ => None,
    };
    for x in [entropy_a, coherent_info, sre].into_iter().flatten() {
        checked_half_integer(x)?;
    }
    Ok(Prediction {
        scenario,
        options,
        selected,
        walls: cuts.into_iter().nth(selected).expect("selected"),
        mana,
        entropy_a,
        coherent_info,
        sre,
    })
}

/// Minimal wall `l_{A|B}` for a product initial state.
pub fn entanglement_cut(g: &Geometry) -> Result<usize> {
    let g = Geometry {
        region_m: Vec::new(),
        ..g.clone()
    };
    let bd = Boundaries::new(&g, Scenario::HaarSubsystem)?;
    bd.wall(&bd.a, &Region::empty(), &bd.b, &Region::empty(), false)
}

/// `|J⁻(A) ∩ M|` for the geometry.
pub fn past_cone_overlap(g: &Geometry) -> Result<usize> {
    let cone = past_cone(g.n_sites, g.depth, &g.a()?);
    Ok(g.m()?.sites().iter().filter(|&&s| cone.contains(s)).count())
}

/// Effective length of a vertical wall on the bond between sites `bond` and
/// `bond + 1` after `depth` layers. The top layer crosses the bond only
/// when its parity matches, otherwise the wall can slip under it.
pub fn vertical_wall(depth: usize, bond: usize) -> usize {
    if depth >= 1 && (depth - 1) % 2 == bond % 2 {
        depth
    } else {
        depth.saturating_sub(1)
    }
}

/// Closed form `min{t_v, |A|, |B|}` for a contiguous A touching one end of
/// the chain, with `t_v` from [`vertical_wall`].
pub fn contiguous_entanglement(n_sites: usize, depth: usize, a_len: usize, at_left: bool) -> usize {
    let b_len = n_sites - a_len;
    let bond = if at_left { a_len - 1 } else { b_len - 1 };
    vertical_wall(depth, bond).min(a_len).min(b_len)
}

/// Haar mana `½(|A| - l_{A|B})`.
pub fn haar_mana(a_len: usize, cut: usize) -> f64 {
    half(a_len as i64 - cut as i64)
}

/// Late-time mana after single- or multi-qudit injection,
/// `½ max{0, min(|M|, |A| - |B|)}`.
pub fn late_time_injection_mana(a_len: usize, b_len: usize, m_len: usize) -> f64 {
    half((a_len as i64 - b_len as i64).min(m_len as i64).max(0))
}

/// Early-time single-qudit injection mana: `½|J⁻(A) ∩ M|` while the
/// vertical walls are cheaper than cutting B, `½|M|` after.
pub fn early_time_injection_mana(cone_overlap: usize, m_len: usize, depth: usize, b_len: usize) -> f64 {
    if depth <= b_len {
        half(cone_overlap as i64)
    } else {
        half(m_len as i64)
    }
}

/// Early-time Rényi cost `min{(n-1)|J⁻(A)∩M| + (2n-1)t, (n-1)|M| + (2n-1)|B|}`
/// for single-qudit injection, so that `log_q Z_n` is its negative.
pub fn early_time_injection_cost(n: usize, cone_overlap: usize, m_len: usize, depth: usize, b_len: usize) -> usize {
    let a = (n - 1) * cone_overlap + (2 * n - 1) * depth;
    let b = (n - 1) * m_len + (2 * n - 1) * b_len;
    a.min(b)
}

/// Concentration and teleportation mana `½ min{t, |M|, |A|}`.
pub fn concentration_mana(depth: usize, m_len: usize, a_len: usize) -> f64 {
    half(depth.min(m_len).min(a_len) as i64)
}

/// Haar Rényi moment `log_q Z_n = -[(n-1)|A| + n·l]`.
pub fn haar_log_moment(n: usize, a_len: usize, cut: usize) -> f64 {
    -(((n - 1) * a_len + n * cut) as f64)
}
