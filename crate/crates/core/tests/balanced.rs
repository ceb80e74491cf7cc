mod support;

use proptest::prelude::*;
use rauzy_core::balanced::{
    common_points, decompose_minimal, intersection_morphism, minimal_cut_points, validate_pair,
    BalancedBlock, BlockMorphism, Caps, IntersectionStatus,
};
use rauzy_core::spectral::{perron_data, DEFAULT_TOLERANCE};
use rauzy_core::word::Word;
use rauzy_core::Error;

use support::*;

fn morphism(first: &str, second: &str) -> BlockMorphism {
    intersection_morphism(&load(first), &load(second), Caps::default())
        .unwrap()
        .morphism
        .unwrap()
}

#[test]
fn greedy_matches_subset_enumeration() {
    for (d, n) in [(2, 9), (3, 6)] {
        let report = sweep::sweep(d, n, move |t, b, cuts| {
            minimal_cut_points(t, b, d, cuts).unwrap();
            assert_eq!(all_decompositions(t, b), vec![cuts.clone()], "{t:?} / {b:?}");
        });
        assert_eq!(report.mismatches, 0);
    }
}

#[test]
fn sweep_counts_balanced_pairs() {
    // Σ over abelian classes of (class size)², for lengths 1..=n.
    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let two: u64 = (1..=10)
        .map(|n| (0..=n).map(|k| binom(n, k).pow(2)).sum::<u64>())
        .sum();
    let three: u64 = (1..=7)
        .map(|n| {
            (0..=n)
                .flat_map(|i| (0..=n - i).map(move |j| binom(n, i) * binom(n - i, j)))
                .map(|c| c * c)
                .sum::<u64>()
        })
        .sum();
    let noop = |_: &[u8], _: &[u8], c: &mut Vec<usize>| c.clear();
    assert_eq!(sweep::sweep(2, 10, noop).pairs, two);
    assert_eq!(sweep::sweep(3, 7, noop).pairs, three);
}

#[test]
fn sweep_catches_a_wrong_greedy() {
    let whole = |t: &[u8], _: &[u8], c: &mut Vec<usize>| {
        c.clear();
        c.push(t.len());
    };
    let report = sweep::sweep(2, 6, whole);
    assert!(report.mismatches > 0);
    let (t, b) = report.first_mismatch.unwrap();
    assert!(all_decompositions(&t, &b)[0].len() > 1);
}

#[test]
fn decompose_rejects_unbalanced() {
    let block = BalancedBlock {
        top: Word::from(vec![0, 1]),
        bottom: Word::from(vec![0, 0]),
    };
    assert!(matches!(decompose_minimal(&block, 2), Err(Error::Validation(_))));
    let mut cuts = vec![7];
    assert!(minimal_cut_points(&[0, 2], &[2, 0], 2, &mut cuts).is_err());
    assert!(cuts.is_empty());
}

#[test]
fn long_and_wide_pairs_use_the_general_path() {
    let d = 12;
    let top: Vec<u8> = (0..300).map(|k| (k % d) as u8).collect();
    let mut bottom = top.clone();
    bottom.swap(0, 11);
    let mut cuts = Vec::new();
    minimal_cut_points(&top, &bottom, d, &mut cuts).unwrap();
    assert_eq!(cuts[0], 12);
    assert_eq!(*cuts.last().unwrap(), 300);
    assert_eq!(cuts.len(), 300 - 11);
}

/// Every balanced length below `n` must be a block boundary of φᵏ(A) and
/// vice versa.
fn generates_all_common_vertices(first: &str, second: &str, r1: &Rules, r2: &Rules, n: usize) {
    let m = morphism(first, second);
    let (s1, s2) = (load(first), load(second));
    let a = s1.alphabet();
    let seed = |s: &rauzy_core::word::Substitution| {
        let u = s.periodic_point(s.default_periodic_cap()).unwrap();
        assert_eq!(u.power(), 1);
        a.symbol(u.seed())
    };
    let (u, v) = (fixed_point(r1, seed(&s1), n), fixed_point(r2, seed(&s2), n));
    let mut naive = vec![0];
    let (mut cu, mut cv) = (counts(""), counts(""));
    for (k, (x, y)) in u.chars().zip(v.chars()).enumerate() {
        *cu.entry(x).or_insert(0) += 1;
        *cv.entry(y).or_insert(0) += 1;
        cu.retain(|_, c| *c != 0);
        cv.retain(|_, c| *c != 0);
        if cu == cv && k + 1 < n {
            naive.push(k + 1);
        }
    }
    let mut w = vec![0u32];
    while m.flatten(&w).unwrap().len() < n {
        w = m.apply(&w).unwrap();
    }
    let mut generated = vec![0];
    let mut end = 0;
    for &x in &w {
        end += m.block(x).len();
        if end < n {
            generated.push(end);
        }
    }
    assert_eq!(generated, naive, "{first}/{second}");

    let pd = perron_data(&s1.incidence_matrix(), DEFAULT_TOLERANCE).unwrap();
    let cloud = common_points(&s1, &s2, n, &pd, Some(&m)).unwrap();
    assert_eq!(cloud.len(), naive.len());
    let labels: Vec<u32> = w.iter().copied().take(cloud.len()).collect();
    assert_eq!(cloud.labels(), &labels[..]);
}

#[test]
fn morphisms_generate_all_common_vertices() {
    let n = 100_000;
    generates_all_common_vertices("tau1", "tau2", &rules(&TAU1), &rules(&TAU2), n);
    generates_all_common_vertices("trib1", "trib2", &rules(&TRIB1), &rules(&TRIB2), n);
    let (d1, d2) = delta_rules(3);
    generates_all_common_vertices("delta3_1", "delta3_2", &d1, &d2, n);
}

#[test]
fn commutation_with_naive_substitutions() {
    let t = tribonacci_table();
    let (r1, r2, phi) = (rules(&TRIB1), rules(&TRIB2), t.phi_rules());
    for (x, top, bottom) in &t.pi {
        assert_eq!(
            t.flatten(&phi[&x.chars().next().unwrap()]),
            (apply(&r1, top), apply(&r2, bottom))
        );
    }
    for n in 0..=8 {
        assert_eq!(
            t.flatten(&iterate(&phi, "A", n)),
            (iterate(&r1, "a", n), iterate(&r2, "a", n))
        );
    }
}

#[test]
fn morphism_text_round_trips() {
    for (f, g) in [("tau1", "tau2"), ("trib1", "trib2"), ("delta4_1", "delta4_2")] {
        let m = morphism(f, g);
        let back = BlockMorphism::parse_text(&m.to_text(), m.alphabet()).unwrap();
        assert_eq!(back, m);
    }
}

#[test]
fn caps_are_reported() {
    let (s1, s2) = (load("trib1"), load("trib2"));
    let caps = Caps {
        block_count: 5,
        ..Caps::default()
    };
    let r = intersection_morphism(&s1, &s2, caps).unwrap();
    assert_eq!(r.status, IntersectionStatus::CapExceeded);
    assert!(r.morphism.is_none());
    assert!(r.message.contains("inner point"));
    let caps = Caps {
        block_len: 3,
        ..Caps::default()
    };
    let r = intersection_morphism(&load("delta3_1"), &load("delta3_2"), caps).unwrap();
    assert_eq!(r.status, IntersectionStatus::CapExceeded);
}

#[test]
fn empty_intersection_for_chi() {
    let r = intersection_morphism(&load("chi1"), &load("chi2"), Caps::default()).unwrap();
    assert_eq!(r.status, IntersectionStatus::EmptyIntersectionSuspected);
    assert_eq!(r.block_count, 0);
}

#[test]
fn pairs_must_share_a_matrix() {
    assert!(matches!(
        validate_pair(&load("trib1"), &load("delta3_1")),
        Err(Error::Validation(_))
    ));
    assert!(validate_pair(&load("tau1"), &load("trib1")).is_err());
}

proptest! {
    #[test]
    fn flatten_is_a_monoid_morphism(
        w1 in proptest::collection::vec(0u32..11, 0..40),
        w2 in proptest::collection::vec(0u32..11, 0..40),
    ) {
        let m = morphism("trib1", "trib2");
        let joined: Vec<u32> = w1.iter().chain(&w2).copied().collect();
        let (f1, f2, f) = (m.flatten(&w1).unwrap(), m.flatten(&w2).unwrap(), m.flatten(&joined).unwrap());
        prop_assert_eq!(f.len(), f1.len() + f2.len());
        prop_assert_eq!(&f.top[..f1.len()], &f1.top[..]);
        prop_assert_eq!(&f.bottom[f1.len()..], &f2.bottom[..]);
        let lengths: usize = joined.iter().map(|&x| m.block(x).len()).sum();
        prop_assert_eq!(f.len(), lengths);
        let pieces = decompose_minimal(&f, 3).unwrap();
        prop_assert_eq!(pieces.len(), joined.len());
    }
}
