// Brute-force oracles checked against the library on small inputs.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;

use bruhat_codes::bruhat::BruhatInterval;
use bruhat_codes::chain::{kernel_basis, rank_gf2, BitMatrix};
use bruhat_codes::codes::{logical_count, CheckSide, CssCode};
use bruhat_codes::coxeter::parse_group_spec;
use bruhat_codes::distance::{exact_distance, low_weight_search, ris_upper_bound};
use bruhat_codes::rng::stream_rng;
use bruhat_codes::spheres::SphereCensus;

fn interval(group: &str, wt: &str) -> BruhatInterval {
    let sys = parse_group_spec(group).unwrap();
    BruhatInterval::from_word_text(&sys, "id", wt).unwrap()
}

/// One-line notation of a word in S_{n}, letters acting as adjacent swaps.
fn permutation(word: &[u8], n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for &i in word {
        p.swap(i as usize, i as usize + 1);
    }
    p
}

fn inversions(p: &[usize]) -> usize {
    (0..p.len()).map(|i| (i + 1..p.len()).filter(|&j| p[i] > p[j]).count()).sum()
}

/// Tableau criterion: sorted prefixes compare entrywise.
fn tableau_leq(u: &[usize], w: &[usize]) -> bool {
    (1..u.len()).all(|i| {
        let mut a = u[..i].to_vec();
        let mut b = w[..i].to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a.iter().zip(&b).all(|(x, y)| x <= y)
    })
}

fn perms_by_rank(iv: &BruhatInterval, n: usize) -> Vec<Vec<Vec<usize>>> {
    (0..=iv.length()).map(|r| iv.layer(r).iter().map(|e| permutation(e.word(), n)).collect()).collect()
}

fn check_type_a(rank: usize) {
    let n = rank + 1;
    let iv = interval(&format!("A{rank}"), "w0");
    let perms = perms_by_rank(&iv, n);
    let total: usize = (1..=n).product();
    assert_eq!(iv.len(), total);
    for (r, layer) in perms.iter().enumerate() {
        assert!(layer.iter().all(|p| inversions(p) == r));
        let mut sorted = layer.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), layer.len());
    }
    for r in 1..perms.len() {
        for (j, w) in perms[r].iter().enumerate() {
            let mut expect: Vec<u32> =
                (0..perms[r - 1].len()).filter(|&i| tableau_leq(&perms[r - 1][i], w)).map(|i| i as u32).collect();
            expect.sort_unstable();
            let mut got = iv.down(r, j).to_vec();
            got.sort_unstable();
            assert_eq!(got, expect, "covers of rank {r} element {j}");
        }
    }
    // Order relation across several ranks.
    for r in 0..perms.len() {
        for s in r..perms.len().min(r + 4) {
            for (x, u) in perms[r].iter().enumerate() {
                for (z, w) in perms[s].iter().enumerate() {
                    assert_eq!(iv.leq(r, x, s, z), tableau_leq(u, w));
                }
            }
        }
    }
}

#[test]
fn type_a3_bruhat_order_matches_tableau_criterion() {
    check_type_a(3);
}

#[test]
fn type_a4_bruhat_order_matches_tableau_criterion() {
    check_type_a(4);
}

#[test]
fn mahonian_layer_sizes() {
    assert_eq!(interval("A4", "w0").layer_sizes(), vec![1, 4, 9, 15, 20, 22, 20, 15, 9, 4, 1]);
    assert_eq!(interval("A5", "w0").layer_sizes().iter().sum::<usize>(), 720);
}

#[test]
fn boolean_lattice_is_subset_order() {
    let n = 6;
    let word: String = (1..=n).map(|i| format!("s{i}")).collect();
    let iv = interval(&format!("C2^{n}"), &word);
    let mask = |w: &[u8]| w.iter().fold(0u32, |m, &i| m | 1 << i);
    for r in 1..=n {
        assert_eq!(iv.layer(r).len(), (0..r).fold(1, |a, i| a * (n - i) / (i + 1)));
        for (j, e) in iv.layer(r).iter().enumerate() {
            let top = mask(e.word());
            let below: Vec<u32> = iv.down(r, j).iter().map(|&i| mask(iv.layer(r - 1)[i as usize].word())).collect();
            assert_eq!(below.len(), r);
            assert!(below.iter().all(|&b| b & top == b && b.count_ones() as usize == r - 1));
        }
    }
}

/// Sphere census of the five layers around `p` from the tableau criterion.
fn brute_census(rank: usize, p: usize) -> (usize, BTreeMap<usize, usize>, BTreeMap<usize, usize>, BTreeMap<String, usize>) {
    let n = rank + 1;
    let iv = interval(&format!("A{rank}"), "w0");
    let perms = perms_by_rank(&iv, n);
    let between = |b: &[usize], t: &[usize], r: usize| perms[r].iter().filter(|x| tableau_leq(b, x) && tableau_leq(x, t)).count();
    let mut diamonds = 0;
    for b in &perms[p - 1] {
        for t in &perms[p + 1] {
            if tableau_leq(b, t) {
                assert_eq!(between(b, t, p), 2);
                diamonds += 1;
            }
        }
    }
    let crowns = |lo: usize| {
        let mut h = BTreeMap::new();
        for b in &perms[lo] {
            for t in &perms[lo + 3] {
                if tableau_leq(b, t) {
                    let k = between(b, t, lo + 1);
                    assert_eq!(k, between(b, t, lo + 2));
                    *h.entry(k).or_insert(0) += 1;
                }
            }
        }
        h
    };
    let mut s2 = BTreeMap::new();
    for b in &perms[p - 2] {
        for t in &perms[p + 2] {
            if tableau_leq(b, t) {
                let key = format!("{},{},{}", between(b, t, p - 1), between(b, t, p), between(b, t, p + 1));
                *s2.entry(key).or_insert(0) += 1;
            }
        }
    }
    (diamonds, crowns(p - 2), crowns(p - 1), s2)
}

#[test]
fn a4_census_matches_brute_force() {
    let iv = interval("A4", "w0");
    for p in 2..=8 {
        let census = SphereCensus::of_subposet(&iv.layered_subposet(p, 2).unwrap()).unwrap();
        let (d, left, right, s2) = brute_census(4, p);
        assert_eq!(census.diamonds, d, "p = {p}");
        assert_eq!(census.left_crowns, left, "p = {p}");
        assert_eq!(census.right_crowns, right, "p = {p}");
        assert_eq!(census.s2, s2, "p = {p}");
    }
}

#[test]
fn a4_census_at_five_frozen() {
    let iv = interval("A4", "w0");
    let c = SphereCensus::of_subposet(&iv.layered_subposet(5, 2).unwrap()).unwrap();
    assert_eq!(c.diamonds, 176);
    let crowns: BTreeMap<usize, usize> = [(2, 26), (3, 172), (4, 10)].into();
    assert_eq!(c.left_crowns, crowns);
    assert_eq!(c.right_crowns, crowns);
    let s2: BTreeMap<String, usize> =
        [("3,4,3", 68), ("3,5,4", 14), ("4,5,3", 14), ("4,6,4", 85), ("5,8,5", 16)].map(|(k, v)| (k.to_string(), v)).into();
    assert_eq!(c.s2, s2);
}

fn naive_rank(rows: &[Vec<u8>], cols: usize) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][c] == 1) else { continue };
        rows.swap(rank, piv);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] == 1 {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

fn dense_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = (usize, Vec<Vec<u8>>)> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| (Just(c), prop::collection::vec(prop::collection::vec(0u8..=1, c), r)))
}

proptest! {
    #[test]
    fn rank_matches_naive_elimination((cols, rows) in dense_matrix(40, 150)) {
        let m = BitMatrix::from_dense(&rows);
        let r = rank_gf2(&m);
        prop_assert_eq!(r, naive_rank(&rows, cols));
        let k = kernel_basis(&m);
        prop_assert_eq!(k.rows(), cols - r);
        prop_assert!(m.mul_transpose(&k).is_zero());
        prop_assert_eq!(rank_gf2(&k), k.rows());
        prop_assert_eq!(rank_gf2(&m.transpose()), r);
    }
}

/// Every vector of length `n` as a bit mask.
fn brute_distance(hx: &[u32], hz: &[u32], n: usize) -> (Option<usize>, Option<usize>) {
    let span = |rows: &[u32]| {
        let mut s = vec![0u32];
        for &r in rows {
            let extra: Vec<u32> = s.iter().map(|v| v ^ r).collect();
            s.extend(extra);
        }
        s.sort_unstable();
        s.dedup();
        s
    };
    let (sx, sz) = (span(hx), span(hz));
    let best = |check: &[u32], modulo: &[u32]| {
        (1u32..1 << n)
            .filter(|v| check.iter().all(|r| (r & v).count_ones() % 2 == 0) && modulo.binary_search(v).is_err())
            .map(|v| v.count_ones() as usize)
            .min()
    };
    (best(hz, &sx), best(hx, &sz))
}

fn to_masks(m: &BitMatrix) -> Vec<u32> {
    (0..m.rows()).map(|r| m.row_support(r).iter().fold(0, |a, &c| a | 1 << c)).collect()
}

/// A random CSS code on `n ≤ 14` qubits: random X checks, Z checks drawn
/// from their orthogonal complement.
fn random_code(seed: u64, n: usize) -> CssCode {
    let mut rng = stream_rng(seed, 0);
    let rx = rng.random_range(1..=n / 2);
    let x: Vec<Vec<usize>> = (0..rx).map(|_| (0..n).filter(|_| rng.random_bool(0.4)).collect()).collect();
    let hx = BitMatrix::from_supports(n, &x);
    let xm = to_masks(&hx);
    let orth: Vec<u32> = (1u32..1 << n).filter(|v| xm.iter().all(|r| (r & v).count_ones() % 2 == 0)).collect();
    let rz = rng.random_range(1..=n / 2);
    let z: Vec<Vec<usize>> =
        (0..rz).map(|_| orth[rng.random_range(0..orth.len())]).map(|v| (0..n).filter(|&c| v >> c & 1 == 1).collect()).collect();
    CssCode::from_supports(n, &x, &z).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distances_match_enumeration(seed in any::<u64>(), n in 4usize..=14) {
        let code = random_code(seed, n);
        prop_assume!(logical_count(&code) > 0);
        let (bx, bz) = brute_distance(&to_masks(code.hx()), &to_masks(code.hz()), n);
        let (dx, dz) = (exact_distance(&code, CheckSide::X, 40).unwrap(), exact_distance(&code, CheckSide::Z, 40).unwrap());
        prop_assert_eq!(Some(dx), bx);
        prop_assert_eq!(Some(dz), bz);
        let ris = ris_upper_bound(&code, None, 3000, seed).unwrap();
        prop_assert_eq!(ris.d_x_upper, bx);
        prop_assert_eq!(ris.d_z_upper, bz);
        let lw = low_weight_search(&code, CheckSide::X, dx, u64::MAX).unwrap();
        prop_assert_eq!(lw.witness.map(|w| w.weight), Some(dx));
        if dx > 1 {
            let below = low_weight_search(&code, CheckSide::X, dx - 1, u64::MAX).unwrap();
            prop_assert!(below.witness.is_none() && below.exhausted);
        }
    }
}

#[test]
fn known_code_distances() {
    let shor = CssCode::from_supports(
        9,
        &[vec![0, 1, 2, 3, 4, 5], vec![3, 4, 5, 6, 7, 8]],
        &[vec![0, 1], vec![1, 2], vec![3, 4], vec![4, 5], vec![6, 7], vec![7, 8]],
    )
    .unwrap();
    let steane_rows = vec![vec![3, 4, 5, 6], vec![1, 2, 5, 6], vec![0, 2, 4, 6]];
    let steane = CssCode::from_supports(7, &steane_rows, &steane_rows).unwrap();
    let c422 = CssCode::from_supports(4, &[vec![0, 1, 2, 3]], &[vec![0, 1, 2, 3]]).unwrap();
    for (code, k, d) in [(shor, 1, 3), (steane, 1, 3), (c422, 2, 2)] {
        assert_eq!(logical_count(&code), k);
        let (bx, bz) = brute_distance(&to_masks(code.hx()), &to_masks(code.hz()), code.n());
        assert_eq!((bx, bz), (Some(d), Some(d)));
        assert_eq!(exact_distance(&code, CheckSide::X, 40).unwrap(), d);
        assert_eq!(exact_distance(&code, CheckSide::Z, 40).unwrap(), d);
    }
}
