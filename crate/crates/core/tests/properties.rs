use proptest::prelude::*;

use nodal_core::graph::{build_graph, counts_from_graph, graph_summary};
use nodal_core::modes::{enumerate_spectrum, gcd, reduce, SpectrumBlocks};
use nodal_core::stats::nodal_sequence;
use nodal_core::{nodal_count, ModePair};

fn any_mode(max: u64) -> impl Strategy<Value = ModePair> {
    (2..=max)
        .prop_flat_map(|m| (Just(m), 1..m))
        .prop_map(|(m, n)| ModePair::new(m, n).unwrap())
}

proptest! {
    #[test]
    fn reduction_lands_on_nontiling(md in any_mode(100_000)) {
        let r = reduce(md);
        prop_assert!(r.reduced.is_nontiling());
        prop_assert_eq!(gcd(r.reduced.m(), r.reduced.n()), 1);
        prop_assert_eq!((r.reduced.m() + r.reduced.n()) % 2, 1);
        let again = reduce(r.reduced);
        prop_assert_eq!(again.reduced, r.reduced);
        prop_assert_eq!(again.tiles, 1);
    }

    #[test]
    fn tiles_match_manual_two_step(md in any_mode(10_000)) {
        let d = gcd(md.m(), md.n());
        let (m1, n1) = (md.m() / d, md.n() / d);
        let (m2, n2, p) = if (m1 + n1) % 2 == 0 {
            ((m1 + n1) / 2, (m1 - n1) / 2, 2)
        } else {
            (m1, n1, 1)
        };
        let r = reduce(md);
        prop_assert_eq!((r.reduced.m(), r.reduced.n()), (m2, n2));
        prop_assert_eq!(r.tiles, d * d * p);
    }

    #[test]
    fn graph_and_recursion_agree_on_tiling_modes(md in any_mode(90)) {
        let r = nodal_count(md).unwrap();
        let g = graph_summary(md).unwrap();
        prop_assert_eq!((r.nu, r.eta, r.loops, r.tiles), (g.nu, g.eta, g.loops, g.tiles));
        prop_assert_eq!(r.recombined_nu(), r.nu);
    }

    #[test]
    fn graph_build_is_deterministic(md in any_mode(80)) {
        let red = reduce(md).reduced;
        let a = build_graph(red).unwrap();
        let b = build_graph(red).unwrap();
        prop_assert_eq!(&a, &b);
        let c = counts_from_graph(&a);
        prop_assert_eq!(c.loops + 1, c.component_count);
    }
}

#[test]
fn spectrum_size_matches_double_loop() {
    for cutoff in [5u64, 30, 65, 1000, 12_345] {
        let mut brute = Vec::new();
        for m in 2..=cutoff {
            for n in 1..m {
                if m * m + n * n <= cutoff {
                    brute.push((m * m + n * n, n, m));
                }
            }
        }
        brute.sort();
        let s = enumerate_spectrum(cutoff).unwrap();
        let got: Vec<(u64, u64, u64)> = s
            .entries
            .iter()
            .map(|e| (e.mode.lambda(), e.mode.n(), e.mode.m()))
            .collect();
        assert_eq!(got, brute, "cutoff {cutoff}");
        assert!(s.entries.iter().zip(1u64..).all(|(e, i)| e.index == i));
    }
}

#[test]
fn blocks_concatenate_to_spectrum() {
    let full = enumerate_spectrum(5000).unwrap();
    let mut joined = Vec::new();
    for (first, modes) in SpectrumBlocks::new(5000, 97).unwrap() {
        assert_eq!(first as usize, joined.len() + 1);
        joined.extend(modes);
    }
    let want: Vec<ModePair> = full.entries.iter().map(|e| e.mode).collect();
    assert_eq!(joined, want);
}

#[test]
fn courant_and_recombination_low_spectrum() {
    let s = nodal_sequence(50_000).unwrap();
    assert!(s.courant_violation().is_none());
    assert!(s
        .rows
        .iter()
        .all(|r| r.recombined_nu() == r.nu && r.xi <= 1.0 && r.xi > 0.0));
}
