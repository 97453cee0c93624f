mod common;

use std::collections::HashSet;
use std::io::Cursor;

use graphlens::graph::{self, Delimiter, EdgeListOptions};
use graphlens::Graph;
use proptest::prelude::*;

fn load(text: &str) -> graphlens::Result<Graph> {
    graph::load_edge_list(Cursor::new(text), EdgeListOptions::default())
}

#[test]
fn reverse_duplicate_collapses() {
    let g = load("0 1\n1 0\n").unwrap();
    assert_eq!((g.num_nodes(), g.num_edges()), (2, 1));
}

#[test]
fn self_loop_dropped_and_counted() {
    let g = load("a b\nb c\na a\n").unwrap();
    assert_eq!((g.num_nodes(), g.num_edges()), (3, 2));
    assert_eq!(g.self_loops_dropped(), 1);
}

#[test]
fn comments_and_line_numbers() {
    let g = load("# header\n\nx y\n").unwrap();
    assert_eq!(g.num_edges(), 1);
    let err = load("a b\n# c\nc d e\n").unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn comma_delimited() {
    let g = graph::load_edge_list(
        Cursor::new("1,2\n2,3\n"),
        EdgeListOptions { delimiter: Delimiter::Comma },
    )
    .unwrap();
    assert_eq!(g.num_edges(), 2);
    assert_eq!(g.ids(), ["1", "2", "3"]);
}

#[test]
fn stats_small_cases() {
    let single = Graph::from_named_edges(vec!["v".into()], vec![]).unwrap();
    let s = graph::graph_stats(&single);
    assert_eq!((s.density, s.components), (0.0, 1));
    let k4 = common::cliques(1, 4);
    assert_eq!(graph::graph_stats(&k4).density, 1.0);
    let empty = load("").unwrap();
    let s = graph::graph_stats(&empty);
    assert_eq!((s.nodes, s.edges, s.density, s.components), (0, 0, 0.0, 0));
}

#[test]
fn labels_file_examples() {
    let g = load("n1 n2\n").unwrap();
    let l = graph::load_labels(Cursor::new("n1\t2,2\n"), &g).unwrap();
    assert_eq!(l.groups_of(0).len(), 1);
    assert_eq!(l.group_sizes(), [1]);
    let none = graph::load_labels(Cursor::new(""), &g).unwrap();
    assert_eq!(none.num_groups(), 0);
    assert!(none.membership().iter().all(|m| m.is_empty()));
    let err = graph::load_labels(Cursor::new("zz\t1\nqq\t2\n"), &g).unwrap_err();
    assert!(err.to_string().contains("qq") && err.to_string().contains("zz"));
    assert!(graph::load_labels(Cursor::new("n1\t\n"), &g).is_err());
}

#[test]
fn non_edges_forced_and_impossible() {
    let k4 = common::cliques(1, 4);
    assert!(graph::sample_non_edges(&k4, 1, 0).is_err());
    let path = load("a b\nb c\n").unwrap();
    let s = graph::sample_non_edges(&path, 1, 9).unwrap();
    assert_eq!(s, vec![(0, 2)]);
}

#[test]
fn non_edges_match_brute_force() {
    let g = common::erdos_renyi(50, 0.1, 5);
    let edges: HashSet<(u32, u32)> = g.edges().collect();
    let a = graph::sample_non_edges(&g, 100, 42).unwrap();
    let b = graph::sample_non_edges(&g, 100, 42).unwrap();
    assert_eq!(a, b);
    let mut seen = HashSet::new();
    for &(u, v) in &a {
        assert_ne!(u, v);
        let key = (u.min(v), u.max(v));
        assert!(!edges.contains(&key));
        assert!(seen.insert(key), "duplicate pair {key:?}");
    }
    // dense enough that enumeration kicks in
    let dense = common::erdos_renyi(12, 0.8, 1);
    let all = graph::num_non_edges(&dense) as usize;
    let s = graph::sample_non_edges(&dense, all, 3).unwrap();
    assert_eq!(s.len(), all);
    assert!(graph::sample_non_edges(&dense, all + 1, 3).is_err());
}

#[test]
fn non_edge_sampling_is_roughly_uniform() {
    // path of 5 nodes has 6 non-edges
    let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let mut counts = std::collections::HashMap::new();
    for seed in 0..6000 {
        let s = graph::sample_non_edges(&g, 1, seed).unwrap()[0];
        *counts.entry((s.0.min(s.1), s.0.max(s.1))).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 6);
    for (&pair, &c) in &counts {
        assert!((800..1200).contains(&c), "{pair:?} drawn {c} times");
    }
}

fn density_oracle(g: &Graph) -> f64 {
    let n = g.num_nodes();
    let mut adjacent = 0u64;
    let mut pairs = 0u64;
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            pairs += 1;
            adjacent += g.neighbors(u).contains(&v) as u64;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        adjacent as f64 / pairs as f64
    }
}

#[test]
fn density_matches_pair_counting() {
    for (i, &(n, p)) in [(2, 0.5), (30, 0.2), (200, 0.05), (301, 0.01)].iter().enumerate() {
        let g = common::erdos_renyi(n, p, i as u64);
        let d = graph::graph_stats(&g).density;
        let o = density_oracle(&g);
        assert!(((d - o) / o.max(f64::MIN_POSITIVE)).abs() < 1e-12, "{d} vs {o}");
    }
}

#[test]
fn flickr_counts_density() {
    let d = graph::density(80_513, 5_899_882);
    assert!((d - 1.82e-3).abs() < 0.005e-3, "{d}");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn round_trip_and_degree_sum(edges in prop::collection::vec((0u32..25, 0u32..25), 0..120)) {
        let text: String = edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
        let g = load(&text).unwrap();
        let degree_sum: usize = (0..g.num_nodes() as u32).map(|u| g.degree(u)).sum();
        prop_assert_eq!(degree_sum, 2 * g.num_edges());

        for u in 0..g.num_nodes() as u32 {
            let ns = g.neighbors(u);
            prop_assert!(ns.windows(2).all(|w| w[0] < w[1]));
            for &v in ns {
                prop_assert!(v != u);
                prop_assert!(g.neighbors(v).contains(&u));
            }
        }

        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let h = load(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(h.num_nodes(), g.num_nodes());
        prop_assert_eq!(h.num_edges(), g.num_edges());
        for u in 0..g.num_nodes() as u32 {
            let hu = h.lookup(g.id(u)).unwrap();
            let mut a: Vec<&str> = g.neighbors(u).iter().map(|&v| g.id(v)).collect();
            let mut b: Vec<&str> = h.neighbors(hu).iter().map(|&v| h.id(v)).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn components_match_union_find(edges in prop::collection::vec((0u32..30, 0u32..30), 0..40)) {
        let g = Graph::from_edges(30, &edges).unwrap();
        let mut parent: Vec<usize> = (0..30).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x { let r = find(p, p[x]); p[x] = r; }
            p[x]
        }
        for &(u, v) in &edges {
            let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
            parent[a] = b;
        }
        let roots: HashSet<usize> = (0..30).map(|x| find(&mut parent, x)).collect();
        prop_assert_eq!(graph::graph_stats(&g).components, roots.len());
    }
}
