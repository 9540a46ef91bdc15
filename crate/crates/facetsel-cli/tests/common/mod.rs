//! Shared generators and independent oracles for the integration and
//! acceptance suites.
#![allow(dead_code)] // each test target uses a different subset

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;

use facetsel::{Chronicle, Facet};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    let path = fixture_path(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

pub fn facet_id(i: usize) -> String {
    format!("f{i:02}")
}

/// Random digraph with up to `max_edges` edges over `n` nodes.
pub fn random_digraph(rng: &mut impl Rng, n: usize, max_edges: usize) -> Vec<(usize, usize)> {
    let count = rng.random_range(0..=max_edges);
    (0..count)
        .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
        .collect()
}

pub fn chronicle_from(n: usize, edges: &[(usize, usize)]) -> Chronicle {
    let facets = (0..n)
        .map(|i| Facet::new(facet_id(i), "", 1.0 + (i % 3) as f64))
        .collect();
    let edge_ids = edges
        .iter()
        .map(|&(a, b)| (facet_id(a), facet_id(b)))
        .collect();
    Chronicle::new(facets, edge_ids).expect("valid generated chronicle")
}

/// Reflexive-transitive reachability by repeated relaxation; the independent
/// oracle for closure laws.
pub fn reach_matrix(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for v in 0..n {
        reach[v][v] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if reach[i][j] {
                    for k in 0..n {
                        if reach[j][k] && !reach[i][k] {
                            reach[i][k] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return reach;
        }
    }
}

pub fn oracle_closure(reach: &[Vec<bool>], seed: &[usize]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for &s in seed {
        for (t, &r) in reach[s].iter().enumerate() {
            if r {
                out.insert(t);
            }
        }
    }
    out
}
