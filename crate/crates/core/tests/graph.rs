use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rcpp::graph::{
    build_mixing_pair, check_mixing_assumption, generate_digraph, Digraph, MixingPair,
};
use rcpp::linalg::Matrix;

/// Transitive closure by Floyd–Warshall over the boolean adjacency matrix.
fn closure(g: &Digraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut reach = vec![vec![false; n]; n];
    for (s, d) in g.edges() {
        reach[s][d] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    reach[i][j] = reach[i][j] || reach[k][j];
                }
            }
        }
    }
    reach
}

fn strongly_connected_oracle(g: &Digraph) -> bool {
    closure(g).iter().all(|row| row.iter().all(|&r| r))
}

#[test]
fn generated_graphs_are_strongly_connected_for_100_seeds() {
    for seed in 0..100 {
        let n = 2 + (seed as usize % 29);
        let g = generate_digraph(n, 0.1, seed).unwrap();
        assert!(strongly_connected_oracle(&g), "seed {seed}");
        assert!(g.is_strongly_connected());
        for i in 0..n {
            assert!(g.has_edge(i, i));
            assert!(g.has_edge(i, (i + 1) % n));
        }
    }
    let g = generate_digraph(30, 0.1, 3).unwrap();
    assert!(strongly_connected_oracle(&g));
}

#[test]
fn connectivity_check_agrees_with_closure_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.gen_range(1..8);
        let p: f64 = rng.gen_range(0.0..0.6);
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|_| rng.gen::<f64>() < p)
            .collect();
        let g = Digraph::from_edges(n, edges).unwrap();
        assert_eq!(g.is_strongly_connected(), strongly_connected_oracle(&g));
    }
}

/// Nodes that root a spanning tree of the graph with an edge `j -> i`
/// whenever `m[i][j] > 0`, found by enumerating every parent assignment.
fn spanning_tree_roots(m: &Matrix) -> Vec<usize> {
    let n = m.rows();
    let parents: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && m[(i, j)] > 0.0).collect())
        .collect();
    (0..n)
        .filter(|&root| {
            let others: Vec<usize> = (0..n).filter(|&i| i != root).collect();
            let mut choice = vec![0usize; others.len()];
            if others.iter().any(|&i| parents[i].is_empty()) {
                return false;
            }
            loop {
                let mut parent = vec![usize::MAX; n];
                for (slot, &i) in others.iter().enumerate() {
                    parent[i] = parents[i][choice[slot]];
                }
                let is_tree = others.iter().all(|&start| {
                    let mut v = start;
                    for _ in 0..n {
                        if v == root {
                            return true;
                        }
                        v = parent[v];
                    }
                    v == root
                });
                if is_tree {
                    return true;
                }
                // odometer over parent choices
                let mut slot = 0;
                loop {
                    if slot == others.len() {
                        return false;
                    }
                    choice[slot] += 1;
                    if choice[slot] < parents[others[slot]].len() {
                        break;
                    }
                    choice[slot] = 0;
                    slot += 1;
                }
            }
        })
        .collect()
}

fn check_roots(g: &Digraph) {
    let pair = build_mixing_pair(g).unwrap();
    let report = check_mixing_assumption(&pair);
    let roots_r = spanning_tree_roots(&pair.r);
    if !roots_r.is_empty() {
        assert_eq!(report.roots_r, roots_r, "{}", g.to_edge_list());
    }
    let roots_ct = spanning_tree_roots(&pair.c.transpose());
    if !roots_ct.is_empty() {
        assert_eq!(report.roots_ct, roots_ct, "{}", g.to_edge_list());
    }
}

#[test]
fn root_sets_match_spanning_tree_enumeration_exhaustively_up_to_four_nodes() {
    for n in 1..=4usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, e)| *e);
            check_roots(&Digraph::from_edges(n, edges).unwrap());
        }
    }
}

#[test]
fn root_sets_match_spanning_tree_enumeration_on_sampled_larger_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..400 {
        let n = rng.gen_range(5..=6);
        let p: f64 = rng.gen_range(0.1..0.5);
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .filter(|_| rng.gen::<f64>() < p)
            .collect();
        check_roots(&Digraph::from_edges(n, edges).unwrap());
    }
}

#[test]
fn two_node_pull_matrix_has_single_root() {
    // only node 0 transmits
    let g = Digraph::from_edges(2, [(0, 1)]).unwrap();
    let pair = build_mixing_pair(&g).unwrap();
    let row0 = pair.r.row(0).to_vec();
    let row1 = pair.r.row(1).to_vec();
    assert_eq!(row0, vec![1.0, 0.0]);
    assert_eq!(row1, vec![0.5, 0.5]);
    // uᵀR = uᵀ with u₀ + u₁ = 2 gives u₁ = u₁/2, so u = (2, 0)
    assert!((pair.u_r[0] - 2.0).abs() < 1e-10);
    assert!(pair.u_r[1].abs() < 1e-10);

    let c = pair.r.transpose();
    let reversed = MixingPair::from_matrices(pair.r.clone(), c).unwrap();
    let report = check_mixing_assumption(&reversed);
    let brute = spanning_tree_roots(&reversed.r)
        .iter()
        .any(|i| spanning_tree_roots(&reversed.c.transpose()).contains(i));
    assert_eq!(report.intersection_nonempty, brute);
    assert_eq!(report.roots_r, vec![0]);
}

#[test]
fn disjoint_root_supports_fail_the_check() {
    let r = Matrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.5, 0.5, 0.0],
        vec![0.5, 0.0, 0.5],
    ])
    .unwrap();
    let c = Matrix::from_rows(&[
        vec![0.5, 0.0, 0.0],
        vec![0.0, 0.5, 0.0],
        vec![0.5, 0.5, 1.0],
    ])
    .unwrap();
    let pair = MixingPair::from_matrices(r, c).unwrap();
    let report = check_mixing_assumption(&pair);
    assert_eq!(report.roots_r, vec![0]);
    assert_eq!(report.roots_ct, vec![2]);
    assert!(!report.intersection_nonempty);
    assert!(report.u_r_dot_u_c.abs() < 1e-9);
    assert!(!report.holds(1e-9));
}

#[test]
fn edge_list_and_matrix_csv_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate_digraph(7, 0.3, 9).unwrap();
    let path = dir.path().join("g.txt");
    g.write_edge_list(&path).unwrap();
    assert_eq!(Digraph::read_edge_list(&path).unwrap(), g);

    let pair = build_mixing_pair(&g).unwrap();
    let csv_path = dir.path().join("m.csv");
    pair.write_csv(&csv_path).unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text, pair.to_csv());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_pairs_are_stochastic_with_perron_vectors(
        n in 1usize..25,
        prob in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let g = generate_digraph(n, prob, seed).unwrap();
        let pair = build_mixing_pair(&g).unwrap();
        let report = check_mixing_assumption(&pair);
        prop_assert!(report.row_stochastic_residual <= 1e-12);
        prop_assert!(report.col_stochastic_residual <= 1e-12);
        prop_assert!(report.u_r_residual <= 1e-9);
        prop_assert!(report.u_c_residual <= 1e-9);
        prop_assert!((pair.u_r.iter().sum::<f64>() - n as f64).abs() < 1e-9);
        prop_assert!((pair.u_c.iter().sum::<f64>() - n as f64).abs() < 1e-9);
        prop_assert!(report.u_r_dot_u_c > 0.0);
        for i in 0..n {
            for j in 0..n {
                if pair.r[(i, j)] > 0.0 || pair.c[(i, j)] > 0.0 {
                    prop_assert!(g.has_edge(j, i));
                }
            }
        }
    }
}
