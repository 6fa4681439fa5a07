//! Anonymous port-labeled graphs.
//!
//! Node identifiers exist only as simulation handles. Agent programs never
//! see them: everything an agent learns comes through the degree of its
//! current node and the port by which it entered.

mod enumerate;
mod text;

pub use enumerate::{
    connected_graphs_up_to, enumerate_connected_graphs, enumerate_trees, for_each_connected_graph,
    random_connected_graph, EnumerationLimits, Labeling,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Local edge label at a node, in `0..degree`.
pub type Port = u32;

/// Internal handle of a node. Never exposed to agent programs.
#[derive(
    Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The far end of an edge as seen from one endpoint.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub to: NodeId,
    /// Port by which an agent enters `to` when it crosses this edge.
    pub entry: Port,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Ring,
    OrientedRing,
    HomogeneousRing,
    Tree,
    Arbitrary,
}

/// Which constructor produced a graph, kept for reporting.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GraphFamily {
    pub kind: FamilyKind,
    pub size: usize,
    pub labeling: String,
}

/// An undirected, connected, simple graph with local port numbers.
///
/// Immutable once built; every constructor checks port contiguity, edge
/// symmetry and connectivity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PortGraph {
    adj: Vec<Vec<HalfEdge>>,
    family: GraphFamily,
}

impl PortGraph {
    /// Builds a graph from per-node port tables: `adj[u][p] = (v, q)` means
    /// port `p` at `u` leads to `v`, entering it by port `q`.
    pub fn from_adjacency(adj: Vec<Vec<(usize, Port)>>) -> Result<Self> {
        let adj: Vec<Vec<HalfEdge>> = adj
            .into_iter()
            .map(|ports| {
                ports
                    .into_iter()
                    .map(|(to, entry)| HalfEdge {
                        to: NodeId::from(to),
                        entry,
                    })
                    .collect()
            })
            .collect();
        let n = adj.len();
        let g = PortGraph {
            adj,
            family: GraphFamily {
                kind: FamilyKind::Arbitrary,
                size: n,
                labeling: "explicit".into(),
            },
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph from an edge list. Ports at each node follow the order
    /// in which its edges appear in `edges`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("graph must have at least one node"));
        }
        let mut adj: Vec<Vec<(usize, Port)>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u},{v}) out of range for n={n}")));
            }
            let pu = adj[u].len() as Port;
            let pv = adj[v].len() as Port;
            adj[u].push((v, pv));
            adj[v].push((u, pu));
        }
        Self::from_adjacency(adj)
    }

    /// Ports at every node assigned by increasing neighbor id.
    pub fn canonical(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u},{v}) out of range for n={n}")));
            }
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Self::from_neighbor_orders(&neighbors)
    }

    /// `orders[u]` lists the neighbors of `u` by port number.
    pub(crate) fn from_neighbor_orders(orders: &[Vec<usize>]) -> Result<Self> {
        let mut adj: Vec<Vec<(usize, Port)>> = Vec::with_capacity(orders.len());
        for (u, list) in orders.iter().enumerate() {
            let mut row = Vec::with_capacity(list.len());
            for &v in list {
                let back = orders
                    .get(v)
                    .and_then(|l| l.iter().position(|&w| w == u))
                    .ok_or_else(|| invalid(format!("edge {u}-{v} is not symmetric")))?;
                row.push((v, back as Port));
            }
            adj.push(row);
        }
        Self::from_adjacency(adj)
    }

    /// Ring where port 0 leads clockwise and port 1 counterclockwise.
    pub fn oriented_ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("oriented ring needs n >= 3, got {n}")));
        }
        let adj = (0..n)
            .map(|i| vec![((i + 1) % n, 1), ((i + n - 1) % n, 0)])
            .collect();
        Self::from_adjacency(adj)
            .map(|g| g.with_family(FamilyKind::OrientedRing, "port 0 clockwise"))
    }

    /// Even ring where both endpoints of every edge carry the same port:
    /// edge `{i, i+1}` gets port `i mod 2` at both ends.
    pub fn homogeneous_ring(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(invalid(format!(
                "homogeneous ring needs an even n >= 4, got {n}"
            )));
        }
        let adj = (0..n)
            .map(|i| {
                let fwd = (i % 2) as Port;
                let back = 1 - fwd;
                let mut row = vec![(0usize, 0 as Port); 2];
                row[fwd as usize] = ((i + 1) % n, fwd);
                row[back as usize] = ((i + n - 1) % n, back);
                row
            })
            .collect();
        Self::from_adjacency(adj).map(|g| g.with_family(FamilyKind::HomogeneousRing, "homogeneous"))
    }

    /// Ring with ports assigned by increasing neighbor id.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("ring needs n >= 3, got {n}")));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::canonical(n, &edges).map(|g| g.with_family(FamilyKind::Ring, "canonical"))
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::canonical(n, &edges).map(|g| g.with_family(FamilyKind::Tree, "canonical"))
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Result<Self> {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Self::canonical(leaves + 1, &edges).map(|g| g.with_family(FamilyKind::Tree, "canonical"))
    }

    pub(crate) fn with_family(mut self, kind: FamilyKind, labeling: &str) -> Self {
        self.family = GraphFamily {
            kind,
            size: self.adj.len(),
            labeling: labeling.to_string(),
        };
        self
    }

    pub fn family(&self) -> &GraphFamily {
        &self.family
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn degree(&self, node: NodeId) -> usize {
        self.adj[node.index()].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.adj.len()).map(NodeId::from)
    }

    pub fn ports(&self, node: NodeId) -> &[HalfEdge] {
        &self.adj[node.index()]
    }

    /// Each undirected edge once, as `(u, port at u, v, port at v)` with `u < v`.
    pub fn edges(&self) -> Vec<(NodeId, Port, NodeId, Port)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, row) in self.adj.iter().enumerate() {
            for (p, h) in row.iter().enumerate() {
                if u < h.to.index() {
                    out.push((NodeId::from(u), p as Port, h.to, h.entry));
                }
            }
        }
        out
    }

    /// Crosses the edge at `port` of `node`, returning the neighbor and the
    /// port by which it is entered.
    pub fn traverse(&self, node: NodeId, port: Port) -> Result<(NodeId, Port)> {
        let row = self
            .adj
            .get(node.index())
            .ok_or_else(|| invalid(format!("node {node} out of range")))?;
        let h = row.get(port as usize).ok_or_else(|| {
            invalid(format!(
                "port {port} out of range at node {node} (degree {})",
                row.len()
            ))
        })?;
        Ok((h.to, h.entry))
    }

    /// Unchecked variant for hot simulation loops.
    #[inline]
    pub(crate) fn step(&self, node: NodeId, port: Port) -> HalfEdge {
        self.adj[node.index()][port as usize]
    }

    pub fn is_connected(&self) -> bool {
        let n = self.adj.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for h in &self.adj[u] {
                let v = h.to.index();
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edge_count() + 1 == self.node_count()
    }

    /// Shortest-path distance in edges.
    pub fn distance(&self, a: NodeId, b: NodeId) -> usize {
        let mut dist = vec![usize::MAX; self.adj.len()];
        let mut queue = std::collections::VecDeque::new();
        dist[a.index()] = 0;
        queue.push_back(a.index());
        while let Some(u) = queue.pop_front() {
            for h in &self.adj[u] {
                let v = h.to.index();
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist[b.index()]
    }

    /// True when every edge carries the same port number at both endpoints.
    pub fn is_homogeneous(&self) -> bool {
        self.edges().iter().all(|&(_, p, _, q)| p == q)
    }

    fn validate(&self) -> Result<()> {
        let n = self.adj.len();
        if n == 0 {
            return Err(invalid("graph must have at least one node"));
        }
        for (u, row) in self.adj.iter().enumerate() {
            let mut targets = Vec::with_capacity(row.len());
            for (p, h) in row.iter().enumerate() {
                let v = h.to.index();
                if v >= n {
                    return Err(invalid(format!(
                        "port {p} at node {u} leads to missing node {v}"
                    )));
                }
                if v == u {
                    return Err(invalid(format!("self-loop at node {u}")));
                }
                let back = self.adj[v].get(h.entry as usize).ok_or_else(|| {
                    invalid(format!(
                        "port {p} at node {u} enters node {v} by nonexistent port {}",
                        h.entry
                    ))
                })?;
                if back.to.index() != u || back.entry as usize != p {
                    return Err(invalid(format!(
                        "edge asymmetry: {u}:{p} -> {v}:{} but {v}:{} -> {}:{}",
                        h.entry, h.entry, back.to, back.entry
                    )));
                }
                targets.push(v);
            }
            targets.sort_unstable();
            if targets.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("parallel edges at node {u}")));
            }
        }
        if !self.is_connected() {
            return Err(invalid("graph is not connected"));
        }
        Ok(())
    }

    /// Ports of the basic walk from `start`: leave the start by port 0, and
    /// after entering a node of degree `d` by port `i` leave it by `(i+1) mod d`.
    /// Only defined on trees, where it crosses every edge once in each direction.
    pub fn basic_walk(&self, start: NodeId) -> Result<Vec<Port>> {
        if !self.is_tree() {
            return Err(invalid("basic walk requires a tree"));
        }
        if start.index() >= self.node_count() {
            return Err(invalid(format!("start node {start} out of range")));
        }
        let steps = 2 * (self.node_count() - 1);
        let mut out = Vec::with_capacity(steps);
        let mut at = start;
        let mut port: Port = 0;
        for _ in 0..steps {
            out.push(port);
            let h = self.step(at, port);
            at = h.to;
            port = (h.entry + 1) % self.degree(at) as Port;
        }
        Ok(out)
    }

    /// Follows `ports` from `start`, returning the visited nodes (start included).
    pub fn follow(&self, start: NodeId, ports: &[Port]) -> Result<Vec<NodeId>> {
        let mut at = start;
        let mut out = Vec::with_capacity(ports.len() + 1);
        out.push(at);
        for &p in ports {
            at = self.traverse(at, p)?.0;
            out.push(at);
        }
        Ok(out)
    }
}

impl fmt::Display for PortGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
