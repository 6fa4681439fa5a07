//! Exhaustive corpora of small graphs: non-isomorphic trees and connected
//! graphs, each with a canonical port labeling or with every labeling.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{FamilyKind, PortGraph};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Largest tree size accepted by [`enumerate_trees`].
    pub tree_cap: usize,
    /// Largest size accepted by [`enumerate_connected_graphs`] with one labeling each.
    pub graph_cap: usize,
    /// Largest size for which every port labeling may be expanded.
    pub all_labelings_cap: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            tree_cap: 8,
            graph_cap: 6,
            all_labelings_cap: 5,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Labeling {
    /// Ports at each node ordered by neighbor id in a canonical relabeling.
    Canonical,
    /// Every assignment of ports at every node.
    All,
}

/// All non-isomorphic trees on `n` nodes.
pub fn enumerate_trees(
    n: usize,
    labeling: Labeling,
    limits: EnumerationLimits,
) -> Result<Vec<PortGraph>> {
    if n == 0 {
        return Err(Error::InvalidParameter("tree size must be positive".into()));
    }
    if n > limits.tree_cap {
        return Err(Error::ResourceLimit(format!(
            "tree enumeration capped at n={}, asked for {n}",
            limits.tree_cap
        )));
    }
    check_labeling_cap(n, labeling, limits)?;
    let mut out = Vec::new();
    for orders in unlabeled_trees(n) {
        expand(&orders, labeling, &mut |g| {
            out.push(g.with_family(FamilyKind::Tree, label_name(labeling)))
        })?;
    }
    Ok(out)
}

/// All non-isomorphic connected simple graphs on exactly `n` nodes.
pub fn enumerate_connected_graphs(
    n: usize,
    labeling: Labeling,
    limits: EnumerationLimits,
) -> Result<Vec<PortGraph>> {
    let mut out = Vec::new();
    for_each_connected_graph(n, labeling, limits, |g| out.push(g.clone()))?;
    Ok(out)
}

/// Streaming form of [`enumerate_connected_graphs`].
pub fn for_each_connected_graph(
    n: usize,
    labeling: Labeling,
    limits: EnumerationLimits,
    mut f: impl FnMut(&PortGraph),
) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "graph size must be positive".into(),
        ));
    }
    if n > limits.graph_cap {
        return Err(Error::ResourceLimit(format!(
            "graph enumeration capped at n={}, asked for {n}",
            limits.graph_cap
        )));
    }
    check_labeling_cap(n, labeling, limits)?;
    for edges in unlabeled_connected(n) {
        let orders = neighbor_lists(n, &edges);
        expand(&orders, labeling, &mut |g| f(&g))?;
    }
    Ok(())
}

/// Connected graphs of every size from 1 to `m`.
pub fn connected_graphs_up_to(
    m: usize,
    labeling: Labeling,
    limits: EnumerationLimits,
) -> Result<Vec<PortGraph>> {
    let mut out = Vec::new();
    for n in 1..=m {
        out.extend(enumerate_connected_graphs(n, labeling, limits)?);
    }
    Ok(out)
}

/// A random connected graph on `n` nodes with a random port labeling: a
/// uniform labeled spanning tree (Prüfer) plus each remaining pair with
/// probability `density`.
pub fn random_connected_graph<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> PortGraph {
    let mut orders: Vec<Vec<usize>> = vec![Vec::new(); n];
    if n >= 2 {
        let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
        let tree = prufer_decode(n, &seq);
        for (u, list) in tree.iter().enumerate() {
            orders[u].extend(list.iter().copied());
        }
        for (i, j) in edge_pairs(n) {
            if !orders[i].contains(&j) && rng.gen_bool(density.clamp(0.0, 1.0)) {
                orders[i].push(j);
                orders[j].push(i);
            }
        }
    }
    for list in &mut orders {
        list.shuffle(rng);
    }
    PortGraph::from_neighbor_orders(&orders).expect("random construction is valid")
}

fn check_labeling_cap(n: usize, labeling: Labeling, limits: EnumerationLimits) -> Result<()> {
    if labeling == Labeling::All && n > limits.all_labelings_cap {
        return Err(Error::ResourceLimit(format!(
            "all-labelings expansion capped at n={}, asked for {n}",
            limits.all_labelings_cap
        )));
    }
    Ok(())
}

fn label_name(labeling: Labeling) -> &'static str {
    match labeling {
        Labeling::Canonical => "canonical",
        Labeling::All => "enumerated",
    }
}

fn neighbor_lists(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); n];
    for &(u, v) in edges {
        lists[u].push(v);
        lists[v].push(u);
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    lists
}

fn expand(
    orders: &[Vec<usize>],
    labeling: Labeling,
    emit: &mut dyn FnMut(PortGraph),
) -> Result<()> {
    match labeling {
        Labeling::Canonical => emit(PortGraph::from_neighbor_orders(orders)?),
        Labeling::All => {
            let perms: Vec<Vec<Vec<usize>>> = (0..=orders.iter().map(Vec::len).max().unwrap_or(0))
                .map(permutations)
                .collect();
            let mut current = orders.to_vec();
            assign(orders, &perms, 0, &mut current, emit)?;
        }
    }
    Ok(())
}

fn assign(
    base: &[Vec<usize>],
    perms: &[Vec<Vec<usize>>],
    node: usize,
    current: &mut Vec<Vec<usize>>,
    emit: &mut dyn FnMut(PortGraph),
) -> Result<()> {
    if node == base.len() {
        emit(PortGraph::from_neighbor_orders(current)?);
        return Ok(());
    }
    for perm in &perms[base[node].len()] {
        current[node] = perm.iter().map(|&i| base[node][i]).collect();
        assign(base, perms, node + 1, current, emit)?;
    }
    Ok(())
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Canonical neighbor orders for every non-isomorphic tree on `n` nodes.
fn unlabeled_trees(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n == 1 {
        return vec![vec![vec![]]];
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let total = (n as u64).pow(n.saturating_sub(2) as u32);
    let mut seq = vec![0usize; n.saturating_sub(2)];
    for code in 0..total {
        let mut c = code;
        for s in seq.iter_mut() {
            *s = (c % n as u64) as usize;
            c /= n as u64;
        }
        let adj = prufer_decode(n, &seq);
        let (key, orders) = canonical_tree(&adj);
        if seen.insert(key) {
            out.push(orders);
        }
    }
    out
}

fn prufer_decode(n: usize, seq: &[usize]) -> Vec<Vec<usize>> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut adj = vec![Vec::new(); n];
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        adj[leaf].push(s);
        adj[s].push(leaf);
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    adj[rest[0]].push(rest[1]);
    adj[rest[1]].push(rest[0]);
    adj
}

fn rooted_code(adj: &[Vec<usize>], v: usize, parent: Option<usize>) -> String {
    let mut children: Vec<String> = adj[v]
        .iter()
        .filter(|&&w| Some(w) != parent)
        .map(|&w| rooted_code(adj, w, Some(v)))
        .collect();
    children.sort();
    format!("({})", children.concat())
}

fn centers(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        let mut next = Vec::new();
        for &v in &layer {
            removed[v] = true;
            remaining -= 1;
            for &w in &adj[v] {
                if !removed[w] {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    (0..n).filter(|&v| !removed[v]).collect()
}

/// Returns an isomorphism-invariant key and neighbor orders of a canonical
/// relabeling (preorder from the canonical root, children by code).
fn canonical_tree(adj: &[Vec<usize>]) -> (String, Vec<Vec<usize>>) {
    let (code, root) = centers(adj)
        .into_iter()
        .map(|c| (rooted_code(adj, c, None), c))
        .min()
        .unwrap();
    let n = adj.len();
    let mut new_id = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut next = 0usize;
    fn visit(
        adj: &[Vec<usize>],
        v: usize,
        parent: Option<usize>,
        new_id: &mut [usize],
        next: &mut usize,
        edges: &mut Vec<(usize, usize)>,
    ) {
        new_id[v] = *next;
        *next += 1;
        let mut kids: Vec<(String, usize)> = adj[v]
            .iter()
            .filter(|&&w| Some(w) != parent)
            .map(|&w| (rooted_code(adj, w, Some(v)), w))
            .collect();
        kids.sort();
        for (_, w) in kids {
            visit(adj, w, Some(v), new_id, next, edges);
            edges.push((new_id[v], new_id[w]));
        }
    }
    visit(adj, root, None, &mut new_id, &mut next, &mut edges);
    (code, neighbor_lists(n, &edges))
}

fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    pairs
}

fn mask_connected(n: usize, pairs: &[(usize, usize)], mask: u64) -> bool {
    let mut reach = 1u64;
    loop {
        let mut grown = reach;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                if reach >> i & 1 == 1 {
                    grown |= 1 << j;
                }
                if reach >> j & 1 == 1 {
                    grown |= 1 << i;
                }
            }
        }
        if grown == reach {
            break;
        }
        reach = grown;
    }
    reach == (1u64 << n) - 1
}

/// Edge lists of one representative per isomorphism class of connected
/// graphs on `n` nodes: the edge mask minimal over all vertex permutations.
fn unlabeled_connected(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 1 {
        return vec![vec![]];
    }
    let pairs = edge_pairs(n);
    let mut index = vec![vec![0usize; n]; n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        index[i][j] = k;
        index[j][i] = k;
    }
    let perms = permutations(n);
    // permuted edge index tables
    let maps: Vec<Vec<usize>> = perms
        .iter()
        .skip(1)
        .map(|p| pairs.iter().map(|&(i, j)| index[p[i]][p[j]]).collect())
        .collect();
    let mut out = Vec::new();
    'mask: for mask in 0u64..(1u64 << pairs.len()) {
        if (mask.count_ones() as usize) + 1 < n || !mask_connected(n, &pairs, mask) {
            continue;
        }
        for map in &maps {
            let mut image = 0u64;
            for (k, &t) in map.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    image |= 1 << t;
                }
            }
            if image < mask {
                continue 'mask;
            }
        }
        out.push(
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &e)| e)
                .collect(),
        );
    }
    out
}
