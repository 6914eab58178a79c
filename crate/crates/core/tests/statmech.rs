mod common;

use common::{exhaustive_three_label, exhaustive_two_label};
use nalgebra::DMatrix;
use proptest::prelude::*;
use qudit_magic::densesim::{brickwork_pairs, haar_operator, DenseState, Region};
use qudit_magic::statmech::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn region_from_mask(n: usize, mask: u32) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

fn random_geometry(rng: &mut ChaCha8Rng, max_n: usize, max_t: usize) -> Geometry {
    let n = rng.random_range(2..=max_n);
    let t = rng.random_range(0..=max_t);
    let a_mask = rng.random_range(1..(1u32 << n));
    let m_mask = rng.random_range(0..(1u32 << n));
    Geometry::new(n, t, &region_from_mask(n, a_mask), &region_from_mask(n, m_mask)).unwrap()
}

#[test]
fn permutation_examples() {
    let id = Permutation::identity(4);
    let x = Permutation::multi_swap(2);
    assert_eq!(id.cycles(), 4);
    assert_eq!(x.distance(&id).unwrap(), 2);
    for k in 2..=6 {
        let c = Permutation::cyclic(k);
        assert_eq!(c.distance(&Permutation::identity(k)).unwrap(), k - 1);
    }
}

#[test]
fn permutation_distance_is_a_metric_on_s4() {
    let all = Permutation::all(4).unwrap();
    assert_eq!(all.len(), 24);
    for a in &all {
        assert_eq!(a.distance(a).unwrap(), 0);
        for b in &all {
            let ab = a.distance(b).unwrap();
            assert_eq!(ab, b.distance(a).unwrap());
            assert_eq!(ab == 0, a == b);
            for c in &all {
                assert!(ab <= a.distance(c).unwrap() + c.distance(b).unwrap());
            }
        }
    }
}

#[test]
fn permutation_guard() {
    assert!(matches!(
        Permutation::all(8),
        Err(qudit_magic::Error::Guard { .. })
    ));
}

#[test]
fn two_by_two_haar_weingarten() {
    let hw = weingarten_matrix(2, 3).unwrap();
    // Gram [[d², d], [d, d²]] with d = 3, inverted by hand.
    let det = 81.0 - 9.0;
    assert!((hw.wg[(0, 0)] - 9.0 / det).abs() < 1e-15);
    assert!((hw.wg[(0, 1)] + 3.0 / det).abs() < 1e-15);
}

#[test]
fn haar_weingarten_identity() {
    for t in 1..=4usize {
        for d in t as u64..=9 {
            let hw = weingarten_matrix(t, d).unwrap();
            let n = hw.perms.len();
            let resid = (&hw.gram * &hw.wg - DMatrix::<f64>::identity(n, n)).abs().max();
            assert!(resid < 1e-12, "t={t} d={d}: {resid}");
        }
    }
    // d < t makes the permutation operators dependent.
    assert!(weingarten_matrix(4, 2).is_err());
}

#[test]
fn haar_weingarten_leading_scaling() {
    let mut prev = f64::INFINITY;
    for d in [9u64, 25, 49, 121] {
        let hw = weingarten_matrix(4, d).unwrap();
        let dev = (hw.wg[(0, 0)] * (d as f64).powi(4) - 1.0).abs();
        assert!(dev < prev);
        prev = dev;
    }
    assert!(prev < 1e-3);
}

#[test]
fn aligned_three_body_weights_are_exact() {
    for t in [2usize, 4] {
        for q in [3u64, 5, 7] {
            let wm = WeightModel::haar(q, t).unwrap();
            for a in 0..wm.len() {
                for c in 0..wm.len() {
                    let want = if a == c { 1.0 } else { 0.0 };
                    assert_eq!(wm.three_body_weight(a, a, c), want);
                    assert!((wm.three_body_sum(a, a, c) - want).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn vertical_wall_weights_scale_as_inverse_distance() {
    for t in [2usize, 4] {
        for q in [3u64, 5, 7] {
            let wm = WeightModel::haar(q, t).unwrap();
            let qf = q as f64;
            for s in 0..wm.len() {
                for p in 0..wm.len() {
                    if s == p {
                        continue;
                    }
                    let r = wm.three_body_weight(s, p, s) * qf.powi(wm.distance(s, p) as i32);
                    assert!((r - 1.0).abs() <= 3.0 / qf, "t={t} q={q}: {r}");
                }
            }
        }
    }
    // Two replicas at q = 3: J(I, X; I) is within 1/q of 1/q.
    let wm = WeightModel::haar(3, 2).unwrap();
    let id = wm.perm_index(&Permutation::identity(2)).unwrap();
    let x = wm.perm_index(&Permutation::multi_swap(1)).unwrap();
    let j = wm.three_body_weight(id, x, id);
    assert!(((j - 1.0 / 3.0) / (1.0 / 3.0)).abs() < 1.0 / 3.0);
}

#[test]
fn clifford_weights_match_haar_at_two_replicas() {
    use qudit_magic::commutant::{StochasticLagrangian, StochasticOrthogonal};
    use qudit_magic::fqarith::PrimeField;
    let q = 3;
    let f = PrimeField::new(q).unwrap();
    let haar = WeightModel::haar(q, 2).unwrap();
    let cliff = WeightModel::clifford(q, 2).unwrap();
    let map = |p: &Permutation| {
        let o = StochasticOrthogonal::permutation(&f, p.images()).unwrap();
        cliff
            .lagrangian_index(&StochasticLagrangian::from_orthogonal(&f, &o))
            .unwrap()
    };
    let perms = Permutation::all(2).unwrap();
    for a in &perms {
        for b in &perms {
            for c in &perms {
                let h = haar.three_body_weight(
                    haar.perm_index(a).unwrap(),
                    haar.perm_index(b).unwrap(),
                    haar.perm_index(c).unwrap(),
                );
                let k = cliff.three_body_weight(map(a), map(b), map(c));
                assert!((h - k).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn clifford_aligned_weights_at_four_replicas() {
    let wm = WeightModel::clifford(3, 4).unwrap();
    for a in (0..wm.len()).step_by(7) {
        assert_eq!(wm.three_body_weight(a, a, a), 1.0);
    }
}

#[test]
fn lightcones_match_operator_spreading() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q = 3;
    for (n, t, site) in [(5usize, 2usize, 2usize), (6, 3, 0), (6, 2, 5), (4, 3, 1)] {
        let m = Region::new(&[site]).unwrap();
        let cone = future_cone(n, t, &m);
        let gates: Vec<Vec<_>> = (0..t)
            .map(|l| {
                brickwork_pairs(n, l)
                    .iter()
                    .map(|_| haar_operator(&mut rng, q, 2).unwrap())
                    .collect()
            })
            .collect();
        let digits: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
        let mut a = DenseState::product(q, &digits).unwrap();
        let mut b = a.clone();
        let kick = haar_operator(&mut rng, q, 1).unwrap();
        b.apply_gate(&kick, &[site]).unwrap();
        for (l, layer) in gates.iter().enumerate() {
            for ((i, j), g) in brickwork_pairs(n, l).into_iter().zip(layer) {
                a.apply_two_qudit_gate(g, i, j).unwrap();
                b.apply_two_qudit_gate(g, i, j).unwrap();
            }
        }
        for s in 0..n {
            let r = Region::new(&[s]).unwrap();
            let diff = a
                .reduced_density(&r)
                .unwrap()
                .max_abs_diff(&b.reduced_density(&r).unwrap())
                .unwrap();
            if cone.contains(s) {
                assert!(diff > 1e-6, "n={n} t={t} site {s} inside the cone is untouched");
            } else {
                assert!(diff < 1e-12, "n={n} t={t} site {s} outside the cone changed");
            }
        }
        // The past cone is the time reverse of the future cone.
        for s in 0..n {
            let back = past_cone(n, t, &Region::new(&[s]).unwrap());
            assert_eq!(back.contains(site), cone.contains(s));
        }
    }
}

#[test]
fn min_cut_matches_exhaustive_on_random_geometries() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let g = random_geometry(&mut rng, 6, 4);
        let graph = BrickworkGraph::new(g.n_sites, g.depth).unwrap();
        let a = g.a().unwrap();
        let mut sides: Vec<Side> = (0..graph.nodes().len())
            .map(|_| if rng.random_bool(0.1) { Side::Sink } else { Side::Free })
            .collect();
        for s in 0..g.n_sites {
            sides[graph.top(s)] = if a.contains(s) { Side::Source } else { Side::Sink };
            sides[graph.bottom(s)] = [Side::Free, Side::Sink, Side::Source][rng.random_range(0..3)];
        }
        let cut = min_cut(&graph, &sides).unwrap();
        assert_eq!(cut.value, exhaustive_two_label(&graph, &sides), "{g:?}");
        assert_eq!(cut.legs.len(), cut.value);
    }
}

#[test]
fn three_label_solver_matches_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sets = [
        SpinSet::ANY,
        SpinSet::PERMUTATION,
        SpinSet::only(Spin::AntiIdentity),
        SpinSet::only(Spin::MultiSwap),
        SpinSet::only(Spin::Identity),
        SpinSet::interval(Spin::AntiIdentity, Spin::MultiSwap).unwrap(),
    ];
    for _ in 0..120 {
        let n = rng.random_range(2..=5);
        let t = rng.random_range(0..=4);
        let graph = BrickworkGraph::new(n, t).unwrap();
        let haar_bulk = rng.random_bool(0.3);
        let allowed: Vec<SpinSet> = (0..graph.nodes().len())
            .map(|i| {
                if graph.is_gate(i) {
                    if haar_bulk {
                        SpinSet::PERMUTATION
                    } else {
                        SpinSet::ANY
                    }
                } else {
                    sets[rng.random_range(0..sets.len())]
                }
            })
            .collect();
        let cut = three_label_cut(&graph, &allowed).unwrap();
        for (node, label) in cut.labels.iter().enumerate() {
            assert!(allowed[node].contains(*label));
        }
        for reps in 1..=3 {
            let witness: usize = graph
                .legs()
                .iter()
                .map(|l| cut.labels[l.ends.0].distance(cut.labels[l.ends.1], reps))
                .sum();
            assert_eq!(witness, cut.cost(reps));
            assert_eq!(cut.cost(reps), exhaustive_three_label(&graph, &allowed, reps));
        }
    }
}

#[test]
fn contiguous_entanglement_closed_form() {
    for n in 2..=9 {
        for t in 0..=9 {
            for a in 1..n {
                for at_left in [true, false] {
                    let sites: Vec<usize> = if at_left { (0..a).collect() } else { (n - a..n).collect() };
                    let g = Geometry::new(n, t, &sites, &[]).unwrap();
                    let cut = entanglement_cut(&g).unwrap();
                    assert_eq!(cut, contiguous_entanglement(n, t, a, at_left), "n={n} t={t} A={sites:?}");
                    let bond = if at_left { a - 1 } else { n - a - 1 };
                    if vertical_wall(t, bond) == t {
                        assert_eq!(cut, t.min(a).min(n - a));
                    }
                }
            }
        }
    }
    let g = Geometry::new(8, 10, &[0, 1, 2], &[]).unwrap();
    assert_eq!(entanglement_cut(&g).unwrap(), 3);
}

#[test]
fn haar_subsystem_prediction() {
    // |A| = 4 with a two-leg wall: mana = (4 - 2)/2.
    let g = Geometry::new(8, 2, &[0, 1, 2, 3], &[]).unwrap();
    let p = predict(&g, Scenario::HaarSubsystem).unwrap();
    assert_eq!(p.entropy_a, Some(2.0));
    assert_eq!(p.mana, 1.0);
    assert_eq!(p.mana, haar_mana(4, 2));
    for n in 1..=4 {
        assert_eq!(p.log_moment(n).unwrap(), haar_log_moment(n, 4, 2));
    }
    assert_eq!(p.sre, Some(2.0 * p.mana));
}

#[test]
fn late_time_injection_examples() {
    assert_eq!(late_time_injection_mana(5, 3, 1), 0.5);
    assert_eq!(late_time_injection_mana(3, 5, 1), 0.0);
    assert_eq!(late_time_injection_mana(4, 2, 4), 1.0);
    // Deep circuits reproduce the closed form for every M.
    for n in 3..=8usize {
        for a in 1..n {
            let sites: Vec<usize> = (0..a).collect();
            for mask in 0u32..(1 << n) {
                let m = region_from_mask(n, mask);
                let g = Geometry::new(n, 4 * n, &sites, &m).unwrap();
                let want = late_time_injection_mana(a, n - a, m.len());
                for sc in [Scenario::SingleQuditInjection, Scenario::MultiQuditInjection] {
                    assert_eq!(predict(&g, sc).unwrap().mana, want, "{sc:?} {g:?}");
                }
            }
        }
    }
}

#[test]
fn early_time_helpers() {
    assert_eq!(early_time_injection_mana(2, 5, 3, 4), 1.0);
    assert_eq!(early_time_injection_mana(2, 5, 5, 4), 2.5);
    assert_eq!(early_time_injection_cost(2, 2, 5, 3, 4), 2 + 9);
    // Magic deep inside a wide A stays there while the vertical wall is
    // cheaper than cutting B.
    let g = Geometry::new(10, 2, &[0, 1, 2, 3, 4, 5, 6], &[1, 2]).unwrap();
    let p = predict(&g, Scenario::SingleQuditInjection).unwrap();
    let overlap = past_cone_overlap(&g).unwrap();
    assert_eq!(overlap, 2);
    // The top layer misses bond 6, so the wall is one leg shorter.
    let tv = vertical_wall(2, 6);
    assert_eq!(tv, 1);
    assert_eq!(p.mana, early_time_injection_mana(overlap, 2, tv, 3));
    for n in 2..=4 {
        assert_eq!(
            p.log_moment(n).unwrap(),
            -(early_time_injection_cost(n, overlap, 2, tv, 3) as f64)
        );
    }
}

#[test]
fn concentration_examples_and_invariants() {
    assert_eq!(concentration_mana(2, 4, 3), 1.0);
    for n in 3..=7usize {
        for a in 1..n {
            let sites: Vec<usize> = (0..a).collect();
            for mask in 1u32..(1 << n) {
                let m = region_from_mask(n, mask);
                let mut prev = -1.0;
                for t in 0..=2 * n + 2 {
                    let g = Geometry::new(n, t, &sites, &m).unwrap();
                    let p = predict(&g, Scenario::Concentration).unwrap();
                    assert!(p.mana >= prev, "{g:?}");
                    assert!(p.mana <= 0.5 * m.len().min(a) as f64);
                    prev = p.mana;
                }
                assert_eq!(prev, 0.5 * m.len().min(a) as f64);
            }
        }
    }
}

#[test]
fn teleportation_matches_closed_form() {
    for n in 2..=9usize {
        for t in 0..=10 {
            for a in 1..n {
                let sites: Vec<usize> = (0..a).collect();
                let m: Vec<usize> = (a..n).collect();
                let g = Geometry::new(n, t, &sites, &m).unwrap();
                let p = predict(&g, Scenario::Teleportation).unwrap();
                let tv = vertical_wall(t, a - 1);
                assert_eq!(p.mana, concentration_mana(tv, m.len(), a));
                // Twice the mana is the pre-measurement entanglement.
                assert_eq!(2.0 * p.mana, entanglement_cut(&g).unwrap() as f64);
            }
        }
    }
}

#[test]
fn coherent_information_branch() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let g = random_geometry(&mut rng, 8, 8);
        let e = predict(&g, Scenario::CoherentInfo).unwrap();
        let f = predict(&g, Scenario::MultiQuditInjection).unwrap();
        let ic = e.coherent_info.unwrap();
        assert_eq!(e.mana, 0.5 * ic.max(0.0), "{g:?}");
        assert_eq!(e.mana, f.mana);
    }
}

#[test]
fn sre_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let g = random_geometry(&mut rng, 8, 8);
        let single = predict(&g, Scenario::SingleQuditInjection).unwrap();
        let multi = predict(&g, Scenario::MultiQuditInjection).unwrap();
        assert_eq!(single.sre, multi.sre);
        assert!(multi.sre.unwrap() >= multi.mana, "{g:?}");
        let haar = Geometry { region_m: vec![], ..g };
        let h = predict(&haar, Scenario::HaarSubsystem).unwrap();
        assert_eq!(h.sre.unwrap(), 2.0 * h.mana);
    }
}

#[test]
fn page_consistency_at_late_times() {
    for n in 4..=8usize {
        for a in 1..n.div_ceil(2) {
            let sites: Vec<usize> = (0..a).collect();
            let g = Geometry::new(n, 4 * n, &sites, &(0..n).collect::<Vec<_>>()).unwrap();
            assert_eq!(predict(&g, Scenario::SingleQuditInjection).unwrap().mana, 0.0);
        }
    }
}

#[test]
fn incompatible_geometry_is_rejected() {
    let g = Geometry::new(4, 2, &[0, 1], &[1]).unwrap();
    let err = predict(&g, Scenario::Teleportation).unwrap_err();
    assert!(err.to_string().contains("disjoint"));
    assert!(predict(&g, Scenario::HaarSubsystem).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn predictions_are_half_integers(n in 2usize..9, t in 0usize..9, a in 1u32..256, m in 0u32..256) {
        let a = region_from_mask(n, a % (1 << n));
        prop_assume!(!a.is_empty());
        let m = region_from_mask(n, m % (1 << n));
        let g = Geometry::new(n, t, &a, &m).unwrap();
        for sc in Scenario::ALL {
            if let Ok(p) = predict(&g, sc) {
                for x in [Some(p.mana), p.entropy_a, p.coherent_info, p.sre].into_iter().flatten() {
                    prop_assert!((2.0 * x - (2.0 * x).round()).abs() < 1e-12);
                }
                prop_assert!(p.mana >= 0.0);
                // Splitting the Ī|I wall never costs more than keeping it whole.
                let l1 = p.options.iter().map(|o| o.0).max().unwrap();
                for reps in 1..4 {
                    prop_assert!(-p.log_moment(reps).unwrap() <= ((2 * reps - 1) * l1) as f64);
                }
            }
        }
    }

    #[test]
    fn witness_legs_realize_the_cut(n in 2usize..8, t in 0usize..7, a in 1u32..128) {
        let a = region_from_mask(n, a % (1 << n));
        prop_assume!(!a.is_empty());
        let g = Geometry::new(n, t, &a, &[]).unwrap();
        let p = predict(&g, Scenario::HaarSubsystem).unwrap();
        prop_assert_eq!(p.walls.legs1.len(), p.walls.l1);
        prop_assert_eq!(p.walls.legs2.len(), p.walls.l2);
    }
}
