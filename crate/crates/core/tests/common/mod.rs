//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use qudit_magic::statmech::{BrickworkGraph, Side, Spin, SpinSet};

fn boundary_free(g: &BrickworkGraph, free: &[bool], node: usize) -> bool {
    !g.is_gate(node) && free[node]
}

/// Minimal two-sided cut by enumerating every gate assignment. Free
/// boundary nodes have one leg each and copy their neighbour at no cost.
pub fn exhaustive_two_label(g: &BrickworkGraph, sides: &[Side]) -> usize {
    let gates: Vec<usize> = (0..g.nodes().len())
        .filter(|&i| g.is_gate(i) && sides[i] == Side::Free)
        .collect();
    assert!(gates.len() <= 20, "oracle too large");
    let free: Vec<bool> = sides.iter().map(|s| *s == Side::Free).collect();
    let mut best = usize::MAX;
    for mask in 0u32..(1 << gates.len()) {
        let mut label: Vec<bool> = sides.iter().map(|s| *s == Side::Source).collect();
        for (k, &gi) in gates.iter().enumerate() {
            label[gi] = mask >> k & 1 == 1;
        }
        let cost = g
            .legs()
            .iter()
            .filter(|l| {
                let (a, b) = l.ends;
                !boundary_free(g, &free, a) && !boundary_free(g, &free, b) && label[a] != label[b]
            })
            .count();
        best = best.min(cost);
    }
    best
}

/// Minimal total replica distance for `2n` copies over all spin
/// assignments drawn from `allowed`.
pub fn exhaustive_three_label(g: &BrickworkGraph, allowed: &[SpinSet], n: usize) -> usize {
    let gates: Vec<usize> = (0..g.nodes().len()).filter(|&i| g.is_gate(i)).collect();
    let choices: Vec<Vec<Spin>> = gates.iter().map(|&i| allowed[i].spins().collect()).collect();
    let total: usize = choices.iter().map(|c| c.len()).product();
    assert!(total <= 2_000_000, "oracle too large");
    let mut label: Vec<Option<Spin>> = vec![None; g.nodes().len()];
    let mut best = usize::MAX;
    for mut code in 0..total {
        for (k, &gi) in gates.iter().enumerate() {
            let c = &choices[k];
            label[gi] = Some(c[code % c.len()]);
            code /= c.len();
        }
        let mut cost = 0;
        for leg in g.legs() {
            let (a, b) = leg.ends;
            let opts = |x: usize| -> Vec<Spin> {
                match label[x] {
                    Some(s) => vec![s],
                    None => allowed[x].spins().collect(),
                }
            };
            // Boundary nodes carry a single leg, so each picks its best spin.
            let (oa, ob) = (opts(a), opts(b));
            cost += oa
                .iter()
                .flat_map(|x| ob.iter().map(move |y| x.distance(*y, n)))
                .min()
                .unwrap();
        }
        best = best.min(cost);
    }
    best
}
