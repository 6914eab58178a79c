use proptest::prelude::*;
use qudit_magic::fqarith::*;
use qudit_magic::Error;

const PRIMES: [u64; 6] = [3, 5, 7, 11, 13, 101];

/// Number of `k`-dimensional subspaces of F_q^n: ordered bases of such a
/// subspace divided by `|GL_k(q)|`.
fn gaussian_binomial(q: u128, n: u32, k: u32) -> u128 {
    let ordered: u128 = (0..k).map(|i| q.pow(n) - q.pow(i)).product();
    let gl: u128 = (0..k).map(|i| q.pow(k) - q.pow(i)).product();
    ordered / gl
}

#[test]
fn inverse_and_fermat() {
    for q in PRIMES {
        let f = PrimeField::new(q).unwrap();
        for a in 1..q {
            let inv = f.inv(a).unwrap();
            assert_eq!(f.mul(a, inv), 1);
            assert_eq!(f.inv(inv).unwrap(), a);
            assert_eq!(f.pow(a, q - 1), 1);
        }
        assert_eq!(f.inv2(), (q + 1) / 2);
    }
}

#[test]
fn canonical_representatives() {
    let f = PrimeField::new(7).unwrap();
    assert_eq!(f.reduce_signed(-1), 6);
    assert_eq!(f.reduce_signed(-15), 6);
    assert_eq!(f.reduce(50), 1);
    assert_eq!(FVector::from_signed(&f, &[-1, 8, -7]).entries(), &[6, 1, 0]);
    assert!(FVector::new(&f, vec![7]).is_err());
}

#[test]
fn subspace_counts_match_gaussian_binomials() {
    for (q, n) in [(3u64, 2usize), (3, 3), (3, 4), (5, 2), (5, 3), (7, 3)] {
        let f = PrimeField::new(q).unwrap();
        for k in 0..=n {
            let subs = enumerate_subspaces(&f, n, k).unwrap();
            assert_eq!(
                subs.len() as u128,
                gaussian_binomial(q as u128, n as u32, k as u32),
                "q={q} n={n} k={k}"
            );
            for s in &subs {
                assert_eq!(s.rank(&f), k);
            }
            let mut sorted = subs.clone();
            sorted.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
            sorted.dedup();
            assert_eq!(sorted.len(), subs.len());
        }
    }
}

#[test]
fn enumerated_lines_cover_every_nonzero_vector_once() {
    let f = PrimeField::new(5).unwrap();
    let lines = enumerate_subspaces(&f, 3, 1).unwrap();
    let mut hits = vec![0; 125];
    for l in &lines {
        let v = l.row_vectors()[0].clone();
        for c in 1..5 {
            hits[v.scale(&f, c).index(&f)] += 1;
        }
    }
    assert_eq!(hits[0], 0);
    assert!(hits[1..].iter().all(|&h| h == 1));
}

#[test]
fn subspace_errors() {
    let f = PrimeField::new(3).unwrap();
    assert!(matches!(enumerate_subspaces(&f, 2, 3), Err(Error::Validation(_))));
    assert!(matches!(enumerate_subspaces(&f, 16, 1), Err(Error::Guard { .. })));
}

#[test]
fn gram_matrix_is_antisymmetric_and_invertible() {
    for q in [3u64, 5, 7] {
        let f = PrimeField::new(q).unwrap();
        for modes in 1..=3 {
            let j = symplectic_gram(&f, modes);
            let jt = j.transpose();
            for r in 0..2 * modes {
                for c in 0..2 * modes {
                    assert_eq!(j.get(r, c), f.neg(jt.get(r, c)));
                }
            }
            assert_eq!(j.rank(&f), 2 * modes);
        }
    }
}

fn field_strategy() -> impl Strategy<Value = PrimeField> {
    prop::sample::select(PRIMES.to_vec()).prop_map(|q| PrimeField::new(q).unwrap())
}

fn vec_pair(len: usize) -> impl Strategy<Value = (PrimeField, Vec<u64>, Vec<u64>, Vec<u64>)> {
    field_strategy().prop_flat_map(move |f| {
        let q = f.q();
        (
            Just(f),
            prop::collection::vec(0..q, len),
            prop::collection::vec(0..q, len),
            prop::collection::vec(0..q, len),
        )
    })
}

proptest! {
    #[test]
    fn field_axioms(f in field_strategy(), a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
        let (a, b, c) = (f.reduce(a), f.reduce(b), f.reduce(c));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        prop_assert_eq!(f.sub(a, b), f.add(a, f.neg(b)));
        prop_assert!(f.add(a, b) < f.q() && f.mul(a, b) < f.q());
    }

    #[test]
    fn symplectic_form_is_alternating_and_bilinear((f, u, v, w) in vec_pair(4), c in 0u64..101) {
        let c = f.reduce(c);
        let u = FVector::new(&f, u).unwrap();
        let v = FVector::new(&f, v).unwrap();
        let w = FVector::new(&f, w).unwrap();
        let form = |a: &FVector, b: &FVector| symplectic_form(&f, a, b).unwrap();
        prop_assert_eq!(form(&u, &u), 0);
        prop_assert_eq!(form(&u, &v), f.neg(form(&v, &u)));
        prop_assert_eq!(
            form(&u.scale(&f, c).add(&f, &w), &v),
            f.add(f.mul(c, form(&u, &v)), form(&w, &v))
        );
    }

    #[test]
    fn row_reduction_preserves_row_space(
        (f, a, b, c) in vec_pair(5),
    ) {
        let m = FMatrix::from_rows(&f, &[a.clone(), b.clone(), c.clone()]).unwrap();
        let mut r = m.clone();
        let pivots = r.row_reduce(&f);
        prop_assert_eq!(pivots.len(), m.rank(&f));
        // Stacking the reduced rows onto the original adds no rank.
        let mut rows = vec![a, b, c];
        rows.extend(r.row_vectors().iter().map(|v| v.entries().to_vec()));
        prop_assert_eq!(FMatrix::from_rows(&f, &rows).unwrap().rank(&f), pivots.len());
        for (i, &p) in pivots.iter().enumerate() {
            prop_assert_eq!(r.get(i, p), 1);
        }
    }

    #[test]
    fn digit_round_trip(f in field_strategy(), idx in 0usize..100_000) {
        let len = 6;
        let total = f.count(len).unwrap() as usize;
        let idx = idx % total;
        prop_assert_eq!(f.index_of(&f.digits(idx, len)), idx);
    }
}
