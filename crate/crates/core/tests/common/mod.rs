//! Graph generators and brute-force reference checks shared by the
//! integration suites. Nothing here calls the library's own cut or path
//! search.

#![allow(dead_code)]

use qkdnet::graph::{Network, NodeId};
use rand::Rng;

/// Node labels in id order: `a`, `b`, then `c1..`. Labels sort the same
/// way as their indices for up to nine relays.
pub fn labels(n: usize) -> Vec<String> {
    let mut out = vec!["a".to_string(), "b".to_string()];
    out.extend((1..n.saturating_sub(1)).map(|i| format!("c{i}")));
    out.truncate(n);
    out
}

/// Unordered node pairs in a fixed order; bit `i` of an edge mask selects
/// `pairs(n)[i]`.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            out.push((u, v));
        }
    }
    out
}

pub fn build(n: usize, edges: &[(usize, usize)]) -> Network {
    let l = labels(n);
    let mut b = Network::builder().nodes(l.clone()).endpoints("a", "b");
    for (i, &(u, v)) in edges.iter().enumerate() {
        b = b.edge(format!("e{i}"), l[u].clone(), l[v].clone());
    }
    let g = b.build().expect("generated graphs are simple");
    debug_assert_eq!(g.node("a").unwrap(), NodeId(0));
    g
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    adj
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let adj = adjacency(n, edges);
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Whether `a` (node 0) reaches `b` (node 1) without touching `blocked`.
pub fn reaches(n: usize, edges: &[(usize, usize)], blocked: u32) -> bool {
    let adj = adjacency(n, edges);
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        if x == 1 {
            return true;
        }
        for &y in &adj[x] {
            if !seen[y] && blocked >> y & 1 == 0 {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

/// Edge lists of every graph on `n` labeled nodes, optionally only those
/// that are connected.
pub fn all_graphs(n: usize, connected_only: bool) -> Vec<Vec<(usize, usize)>> {
    let ps = pairs(n);
    (0u64..1 << ps.len())
        .map(|mask| {
            ps.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect::<Vec<_>>()
        })
        .filter(|edges| !connected_only || connected(n, edges))
        .collect()
}

/// A connected graph on `n` nodes: a random spanning tree plus each other
/// pair with probability `p`.
pub fn random_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (u, v) = (order[i].min(order[j]), order[i].max(order[j]));
        edges.push((u, v));
    }
    for (u, v) in pairs(n) {
        if !edges.contains(&(u, v)) && rng.gen_bool(p) {
            edges.push((u, v));
        }
    }
    edges
}

/// Every simple `a`-`b` path, by exhaustive depth-first search.
pub fn simple_paths(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    fn go(adj: &[Vec<usize>], path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let x = *path.last().unwrap();
        if x == 1 {
            out.push(path.clone());
            return;
        }
        for &y in &adj[x] {
            if !on[y] {
                on[y] = true;
                path.push(y);
                go(adj, path, on, out);
                path.pop();
                on[y] = false;
            }
        }
    }
    let adj = adjacency(n, edges);
    let mut on = vec![false; n];
    on[0] = true;
    let mut out = Vec::new();
    go(&adj, &mut vec![0], &mut on, &mut out);
    out
}

/// Smallest number of relays whose removal separates `a` from `b`, by
/// trying every subset; `None` with a direct link.
pub fn brute_min_cut(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    if edges.contains(&(0, 1)) {
        return None;
    }
    (0u32..1 << n)
        .filter(|m| m & 0b11 == 0)
        .filter(|&m| !reaches(n, edges, m))
        .map(|m| m.count_ones() as usize)
        .min()
}

/// Subsets of relays (`c*` nodes) as bit masks over node indices.
pub fn relay_subsets(n: usize) -> impl Iterator<Item = u32> {
    (0u32..1 << n).filter(|m| m & 0b11 == 0)
}

pub fn mask_nodes(mask: u32) -> impl Iterator<Item = NodeId> {
    (0..32).filter(move |i| mask >> i & 1 == 1).map(NodeId)
}
