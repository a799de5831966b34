//! Undirected simple graphs and the connectivity algorithms used by the
//! security and scheduling layers.
//!
//! Node labels are sorted when a [`Network`] is built, so [`NodeId`] order is
//! label order and every traversal that visits neighbours by id is
//! lexicographic in labels.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::bits::BitString;
use crate::scheduler::LinkParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdgeId(String),
    #[error("edge {id:?} duplicates the link between {u:?} and {v:?}")]
    ParallelEdge { id: String, u: String, v: String },
    #[error("edge {0:?} is a self-loop")]
    SelfLoop(String),
    #[error("source and target are the same node {0:?}")]
    SameEndpoints(String),
    #[error("{0:?} and {1:?} share a direct link; no interior cut exists")]
    DirectLink(String, String),
    #[error("removed set contains endpoint {0:?}")]
    EndpointRemoved(String),
    #[error("network has no designated alice/bob endpoints")]
    MissingEndpoints,
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub label: String,
    pub u: NodeId,
    pub v: NodeId,
    pub key_bits: Option<BitString>,
    pub link: Option<LinkParams>,
}

impl Edge {
    pub fn touches(&self, n: NodeId) -> bool {
        self.u == n || self.v == n
    }

    pub fn other(&self, n: NodeId) -> Option<NodeId> {
        if self.u == n {
            Some(self.v)
        } else if self.v == n {
            Some(self.u)
        } else {
            None
        }
    }
}

/// Collects labels and edges before node ids are assigned.
/// `(id, u, v, key, link)` as given to the builder.
type PendingEdge = (
    String,
    String,
    String,
    Option<BitString>,
    Option<LinkParams>,
);

#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    nodes: Vec<String>,
    edges: Vec<PendingEdge>,
    alice: Option<String>,
    bob: Option<String>,
}

impl NetworkBuilder {
    pub fn node(mut self, label: impl Into<String>) -> Self {
        self.nodes.push(label.into());
        self
    }

    pub fn nodes<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.nodes.extend(labels.into_iter().map(Into::into));
        self
    }

    pub fn edge(self, id: impl Into<String>, u: impl Into<String>, v: impl Into<String>) -> Self {
        self.edge_with(id, u, v, None, None)
    }

    pub fn edge_with(
        mut self,
        id: impl Into<String>,
        u: impl Into<String>,
        v: impl Into<String>,
        key_bits: Option<BitString>,
        link: Option<LinkParams>,
    ) -> Self {
        self.edges
            .push((id.into(), u.into(), v.into(), key_bits, link));
        self
    }

    pub fn endpoints(mut self, alice: impl Into<String>, bob: impl Into<String>) -> Self {
        self.alice = Some(alice.into());
        self.bob = Some(bob.into());
        self
    }

    pub fn build(self) -> Result<Network, GraphError> {
        let mut labels = self.nodes;
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateNode(w[0].clone()));
        }
        let index: HashMap<String, NodeId> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), NodeId(i)))
            .collect();
        let lookup = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| GraphError::UnknownNode(l.to_string()))
        };

        let mut adjacency = vec![Vec::new(); labels.len()];
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut edge_index = HashMap::new();
        let mut pairs = HashMap::new();
        for (label, u, v, key_bits, link) in self.edges {
            let (un, vn) = (lookup(&u)?, lookup(&v)?);
            if un == vn {
                return Err(GraphError::SelfLoop(label));
            }
            let id = EdgeId(edges.len());
            if edge_index.insert(label.clone(), id).is_some() {
                return Err(GraphError::DuplicateEdgeId(label));
            }
            if pairs.insert((un.min(vn), un.max(vn)), id).is_some() {
                return Err(GraphError::ParallelEdge { id: label, u, v });
            }
            adjacency[un.0].push((vn, id));
            adjacency[vn.0].push((un, id));
            edges.push(Edge {
                label,
                u: un,
                v: vn,
                key_bits,
                link,
            });
        }
        for list in &mut adjacency {
            list.sort();
        }
        let alice = self.alice.as_deref().map(lookup).transpose()?;
        let bob = self.bob.as_deref().map(lookup).transpose()?;
        if let (Some(a), Some(b)) = (alice, bob) {
            if a == b {
                return Err(GraphError::SameEndpoints(labels[a.0].clone()));
            }
        }
        Ok(Network {
            labels,
            index,
            edges,
            edge_index,
            pairs,
            adjacency,
            alice,
            bob,
        })
    }
}

/// An undirected simple graph. Alice and Bob are optional at this layer.
#[derive(Debug, Clone)]
pub struct Network {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<Edge>,
    edge_index: HashMap<String, EdgeId>,
    pairs: HashMap<(NodeId, NodeId), EdgeId>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    alice: Option<NodeId>,
    bob: Option<NodeId>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.edges == other.edges
            && self.alice == other.alice
            && self.bob == other.bob
    }
}

impl Network {
    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::default()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len()).map(NodeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn node(&self, label: &str) -> Result<NodeId, GraphError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(label.to_string()))
    }

    pub fn edge_by_label(&self, label: &str) -> Result<EdgeId, GraphError> {
        self.edge_index
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownEdge(label.to_string()))
    }

    pub fn label(&self, n: NodeId) -> &str {
        &self.labels[n.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.0 < self.labels.len()
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.pairs.get(&(u.min(v), u.max(v))).copied()
    }

    /// Neighbours of `n` with the connecting edge, in id order.
    pub fn incident(&self, n: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[n.0]
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adjacency[n.0].len()
    }

    pub fn max_degree(&self) -> usize {
        self.nodes().map(|n| self.degree(n)).max().unwrap_or(0)
    }

    pub fn alice(&self) -> Result<NodeId, GraphError> {
        self.alice.ok_or(GraphError::MissingEndpoints)
    }

    pub fn bob(&self) -> Result<NodeId, GraphError> {
        self.bob.ok_or(GraphError::MissingEndpoints)
    }

    pub fn endpoints(&self) -> Result<(NodeId, NodeId), GraphError> {
        Ok((self.alice()?, self.bob()?))
    }

    pub fn has_direct_link(&self) -> bool {
        matches!(self.endpoints(), Ok((a, b)) if self.edge_between(a, b).is_some())
    }

    /// Attaches link parameters to an edge (scheduler mode).
    pub fn set_link(&mut self, id: EdgeId, link: LinkParams) {
        self.edges[id.0].link = Some(link);
    }

    pub fn set_key_bits(&mut self, id: EdgeId, bits: BitString) {
        self.edges[id.0].key_bits = Some(bits);
    }

    pub fn format_nodes<'a, I: IntoIterator<Item = &'a NodeId>>(&self, nodes: I) -> String {
        let parts: Vec<&str> = nodes.into_iter().map(|&n| self.label(n)).collect();
        format!("{{{}}}", parts.join(","))
    }

    fn check(&self, n: NodeId) -> Result<(), GraphError> {
        if self.contains(n) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(format!("#{}", n.0)))
        }
    }

    fn check_pair(&self, a: NodeId, b: NodeId) -> Result<(), GraphError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(GraphError::SameEndpoints(self.label(a).to_string()));
        }
        Ok(())
    }

    pub fn neighbors(&self, v: NodeId) -> Result<BTreeSet<NodeId>, GraphError> {
        self.check(v)?;
        Ok(self.adjacency[v.0].iter().map(|&(n, _)| n).collect())
    }

    /// Every simple `a`→`b` path with at most `max_len` edges, in
    /// lexicographic order of node sequences.
    pub fn enumerate_simple_paths(
        &self,
        a: NodeId,
        b: NodeId,
        max_len: usize,
    ) -> Result<Vec<Path>, GraphError> {
        self.check_pair(a, b)?;
        let mut out = Vec::new();
        let mut visited = vec![false; self.node_count()];
        let mut stack = vec![a];
        visited[a.0] = true;
        self.dfs_paths(b, max_len, &mut visited, &mut stack, &mut out);
        Ok(out)
    }

    fn dfs_paths(
        &self,
        target: NodeId,
        max_len: usize,
        visited: &mut [bool],
        stack: &mut Vec<NodeId>,
        out: &mut Vec<Path>,
    ) {
        let here = *stack.last().expect("non-empty stack");
        if here == target {
            out.push(Path {
                nodes: stack.clone(),
            });
            return;
        }
        if stack.len() > max_len {
            return;
        }
        for &(next, _) in &self.adjacency[here.0] {
            if !visited[next.0] {
                visited[next.0] = true;
                stack.push(next);
                self.dfs_paths(target, max_len, visited, stack, out);
                stack.pop();
                visited[next.0] = false;
            }
        }
    }

    /// Whether deleting `removed` leaves no `a`→`b` path.
    pub fn disconnects(
        &self,
        removed: &BTreeSet<NodeId>,
        a: NodeId,
        b: NodeId,
    ) -> Result<bool, GraphError> {
        self.check_pair(a, b)?;
        for &n in removed {
            self.check(n)?;
            if n == a || n == b {
                return Err(GraphError::EndpointRemoved(self.label(n).to_string()));
            }
        }
        let mut blocked = vec![false; self.node_count()];
        for n in removed {
            blocked[n.0] = true;
        }
        Ok(self.shortest_path_avoiding(a, b, &blocked).is_none())
    }

    /// Lexicographically least among the simple `a`→`b` paths that avoid
    /// `blocked` nodes. DFS over sorted neighbours reaches it first.
    pub fn least_path_avoiding(&self, a: NodeId, b: NodeId, blocked: &[bool]) -> Option<Path> {
        // Prune with reachability so the DFS never backtracks out of a dead
        // region more than once per node.
        let reach_b = self.reachable_from(b, blocked);
        if !reach_b[a.0] {
            return None;
        }
        let mut visited = blocked.to_vec();
        let mut stack = vec![a];
        visited[a.0] = true;
        if self.dfs_first(b, &mut visited, &mut stack) {
            Some(Path { nodes: stack })
        } else {
            None
        }
    }

    fn dfs_first(&self, target: NodeId, visited: &mut [bool], stack: &mut Vec<NodeId>) -> bool {
        let here = *stack.last().expect("non-empty stack");
        if here == target {
            return true;
        }
        for &(next, _) in &self.adjacency[here.0] {
            if !visited[next.0] {
                visited[next.0] = true;
                stack.push(next);
                if self.dfs_first(target, visited, stack) {
                    return true;
                }
                stack.pop();
            }
        }
        false
    }

    fn reachable_from(&self, start: NodeId, blocked: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([start]);
        seen[start.0] = true;
        while let Some(n) = queue.pop_front() {
            for &(m, _) in &self.adjacency[n.0] {
                if !seen[m.0] && !blocked[m.0] {
                    seen[m.0] = true;
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    fn shortest_path_avoiding(
        &self,
        a: NodeId,
        b: NodeId,
        blocked: &[bool],
    ) -> Option<Vec<NodeId>> {
        let mut prev = vec![None; self.node_count()];
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([a]);
        seen[a.0] = true;
        while let Some(n) = queue.pop_front() {
            if n == b {
                let mut path = vec![b];
                let mut cur = b;
                while let Some(p) = prev[cur.0] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &(m, _) in &self.adjacency[n.0] {
                if !seen[m.0] && !blocked[m.0] {
                    seen[m.0] = true;
                    prev[m.0] = Some(n);
                    queue.push_back(m);
                }
            }
        }
        None
    }

    /// Number of internally vertex-disjoint `a`→`b` paths once `removed`
    /// nodes are deleted, ignoring any direct `a`–`b` edge.
    fn interior_connectivity(&self, a: NodeId, b: NodeId, removed: &[bool]) -> usize {
        SplitFlow::new(self, a, b, removed).max_flow()
    }

    /// A minimum-cardinality interior vertex set separating `a` from `b`.
    /// Among all minimum cuts, the lexicographically smallest sorted set.
    pub fn min_vertex_cut(&self, a: NodeId, b: NodeId) -> Result<BTreeSet<NodeId>, GraphError> {
        self.check_pair(a, b)?;
        if self.edge_between(a, b).is_some() {
            return Err(GraphError::DirectLink(
                self.label(a).to_string(),
                self.label(b).to_string(),
            ));
        }
        let mut removed = vec![false; self.node_count()];
        let size = self.interior_connectivity(a, b, &removed);
        let mut cut = BTreeSet::new();
        // Greedy scan in label order: v joins the cut iff some minimum cut of
        // the reduced graph contains it. A node rejected earlier can never
        // enter a minimum cut of a later reduction.
        for v in self.nodes() {
            if cut.len() == size {
                break;
            }
            if v == a || v == b {
                continue;
            }
            removed[v.0] = true;
            if self.interior_connectivity(a, b, &removed) == size - cut.len() - 1 {
                cut.insert(v);
            } else {
                removed[v.0] = false;
            }
        }
        debug_assert_eq!(cut.len(), size);
        Ok(cut)
    }

    /// A maximum set of internally vertex-disjoint `a`→`b` paths. A direct
    /// `a`–`b` edge, if present, contributes the path `(a, b)`.
    pub fn max_disjoint_paths(&self, a: NodeId, b: NodeId) -> Result<Vec<Path>, GraphError> {
        self.check_pair(a, b)?;
        let removed = vec![false; self.node_count()];
        let mut flow = SplitFlow::new(self, a, b, &removed);
        flow.max_flow();
        let mut paths = flow.decompose();
        if self.edge_between(a, b).is_some() {
            paths.push(Path { nodes: vec![a, b] });
        }
        paths.sort();
        Ok(paths)
    }
}

/// A simple path, stored as its node sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    nodes: Vec<NodeId>,
}

impl Path {
    pub fn new(g: &Network, nodes: Vec<NodeId>) -> Result<Path, GraphError> {
        if nodes.len() < 2 {
            return Err(GraphError::InvalidPath(
                "a path needs at least two nodes".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for &n in &nodes {
            g.check(n)?;
            if !seen.insert(n) {
                return Err(GraphError::InvalidPath(format!(
                    "node {:?} repeats",
                    g.label(n)
                )));
            }
        }
        for w in nodes.windows(2) {
            if g.edge_between(w[0], w[1]).is_none() {
                return Err(GraphError::InvalidPath(format!(
                    "{:?} and {:?} are not adjacent",
                    g.label(w[0]),
                    g.label(w[1])
                )));
            }
        }
        Ok(Path { nodes })
    }

    pub fn from_labels(g: &Network, labels: &[&str]) -> Result<Path, GraphError> {
        let nodes = labels
            .iter()
            .map(|l| g.node(l))
            .collect::<Result<Vec<_>, _>>()?;
        Path::new(g, nodes)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn first(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn last(&self) -> NodeId {
        *self.nodes.last().expect("paths have at least two nodes")
    }

    /// Hop count.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interior(&self) -> &[NodeId] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }

    /// Edges along the path in travel order.
    pub fn edges(&self, g: &Network) -> Vec<EdgeId> {
        self.nodes
            .windows(2)
            .map(|w| {
                g.edge_between(w[0], w[1])
                    .expect("path invariant: consecutive nodes are adjacent")
            })
            .collect()
    }

    pub fn display<'a>(&'a self, g: &'a Network) -> PathDisplay<'a> {
        PathDisplay { path: self, g }
    }
}

pub struct PathDisplay<'a> {
    path: &'a Path,
    g: &'a Network,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.path.nodes.iter().map(|&n| self.g.label(n)).collect();
        write!(f, "({})", labels.join(","))
    }
}

/// Unit-capacity flow network with every interior node split into an
/// in/out pair joined by a capacity-one arc.
struct SplitFlow {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
    source: usize,
    sink: usize,
    n: usize,
}

impl SplitFlow {
    fn new(g: &Network, a: NodeId, b: NodeId, removed: &[bool]) -> SplitFlow {
        let n = g.node_count();
        let big = n as u32 + 1;
        let mut flow = SplitFlow {
            head: vec![Vec::new(); 2 * n],
            to: Vec::new(),
            cap: Vec::new(),
            source: 2 * a.0 + 1,
            sink: 2 * b.0,
            n,
        };
        for v in g.nodes() {
            let c = if v == a || v == b {
                big
            } else if removed[v.0] {
                0
            } else {
                1
            };
            flow.arc(2 * v.0, 2 * v.0 + 1, c);
        }
        for e in g.edges() {
            if (e.u == a && e.v == b) || (e.u == b && e.v == a) {
                continue;
            }
            // No arcs into alice or out of bob, so flow cannot cycle through
            // the uncapacitated endpoints.
            for (x, y) in [(e.u, e.v), (e.v, e.u)] {
                if y != a && x != b {
                    flow.arc(2 * x.0 + 1, 2 * y.0, big);
                }
            }
        }
        flow
    }

    fn arc(&mut self, u: usize, v: usize, c: u32) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self) -> usize {
        let mut total = 0;
        loop {
            let mut via = vec![usize::MAX; 2 * self.n];
            let mut queue = VecDeque::from([self.source]);
            let mut reached = false;
            while let Some(u) = queue.pop_front() {
                if u == self.sink {
                    reached = true;
                    break;
                }
                for &arc in &self.head[u] {
                    let v = self.to[arc];
                    if self.cap[arc] > 0 && via[v] == usize::MAX && v != self.source {
                        via[v] = arc;
                        queue.push_back(v);
                    }
                }
            }
            if !reached {
                return total;
            }
            let mut v = self.sink;
            while v != self.source {
                let arc = via[v];
                self.cap[arc] -= 1;
                self.cap[arc ^ 1] += 1;
                v = self.to[arc ^ 1];
            }
            total += 1;
        }
    }

    /// Reads node sequences off the saturated arcs after `max_flow`.
    fn decompose(&mut self) -> Vec<Path> {
        let mut paths = Vec::new();
        loop {
            let mut nodes = vec![NodeId(self.source / 2)];
            let mut u = self.source;
            let found = loop {
                if u == self.sink {
                    break true;
                }
                // Forward arcs sit at even indices; flow shows as reverse
                // capacity.
                let next = self.head[u]
                    .iter()
                    .copied()
                    .find(|&arc| arc % 2 == 0 && self.cap[arc ^ 1] > 0);
                let Some(arc) = next else { break false };
                self.cap[arc ^ 1] -= 1;
                let v = self.to[arc];
                if v / 2 != u / 2 {
                    nodes.push(NodeId(v / 2));
                }
                u = v;
            };
            if !found {
                break;
            }
            paths.push(Path { nodes });
        }
        paths
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn chain() -> Network {
        fixtures::chain()
    }

    #[test]
    fn neighbors_basic() {
        let g = fixtures::seven_node();
        let a = g.node("a").unwrap();
        let got: Vec<&str> = g
            .neighbors(a)
            .unwrap()
            .iter()
            .map(|&n| g.label(n))
            .collect();
        assert_eq!(got, ["c1", "c3"]);

        let tri = Network::builder()
            .nodes(["x", "y", "z", "w"])
            .edge("e1", "x", "y")
            .edge("e2", "y", "z")
            .edge("e3", "x", "z")
            .build()
            .unwrap();
        for v in ["x", "y", "z"] {
            assert_eq!(tri.neighbors(tri.node(v).unwrap()).unwrap().len(), 2);
        }
        assert!(tri.neighbors(tri.node("w").unwrap()).unwrap().is_empty());
        assert!(tri.neighbors(NodeId(99)).is_err());
        assert_eq!(tri.node("q"), Err(GraphError::UnknownNode("q".into())));
    }

    #[test]
    fn builder_rejects_non_simple_graphs() {
        let loops = Network::builder().nodes(["x"]).edge("e", "x", "x").build();
        assert_eq!(loops.unwrap_err(), GraphError::SelfLoop("e".into()));
        let parallel = Network::builder()
            .nodes(["x", "y"])
            .edge("e1", "x", "y")
            .edge("e2", "y", "x")
            .build();
        assert!(matches!(parallel, Err(GraphError::ParallelEdge { .. })));
        let dup = Network::builder()
            .nodes(["x", "y", "z"])
            .edge("e", "x", "y")
            .edge("e", "y", "z")
            .build();
        assert_eq!(dup.unwrap_err(), GraphError::DuplicateEdgeId("e".into()));
        let missing = Network::builder().nodes(["x"]).edge("e", "x", "q").build();
        assert_eq!(missing.unwrap_err(), GraphError::UnknownNode("q".into()));
    }

    #[test]
    fn paths_on_fixture_include_red_and_blue() {
        let g = fixtures::seven_node();
        let (a, b) = g.endpoints().unwrap();
        let paths = g.enumerate_simple_paths(a, b, 7).unwrap();
        let red = Path::from_labels(&g, &["a", "c1", "c2", "b"]).unwrap();
        let blue = Path::from_labels(&g, &["a", "c3", "c4", "c5", "b"]).unwrap();
        assert!(paths.contains(&red));
        assert!(paths.contains(&blue));
        assert!(paths.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(paths[0], red);
    }

    #[test]
    fn paths_trivial_cases() {
        let g = Network::builder()
            .nodes(["p", "q"])
            .edge("e", "p", "q")
            .build()
            .unwrap();
        let (p, q) = (g.node("p").unwrap(), g.node("q").unwrap());
        let paths = g.enumerate_simple_paths(p, q, 2).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].nodes(), &[p, q]);
        assert_eq!(
            g.enumerate_simple_paths(p, p, 2),
            Err(GraphError::SameEndpoints("p".into()))
        );

        let split = Network::builder().nodes(["p", "q"]).build().unwrap();
        assert!(split
            .enumerate_simple_paths(NodeId(0), NodeId(1), 2)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn max_len_limits_hops() {
        let g = fixtures::seven_node();
        let (a, b) = g.endpoints().unwrap();
        let short = g.enumerate_simple_paths(a, b, 3).unwrap();
        assert!(short.iter().all(|p| p.len() <= 3));
        assert!(!short.is_empty());
    }

    #[test]
    fn min_cut_examples() {
        let g = fixtures::seven_node();
        let (a, b) = g.endpoints().unwrap();
        let cut = g.min_vertex_cut(a, b).unwrap();
        assert_eq!(g.format_nodes(&cut), "{c1,c3}");

        let c = chain();
        let (a, b) = c.endpoints().unwrap();
        assert_eq!(c.format_nodes(&c.min_vertex_cut(a, b).unwrap()), "{c}");

        let direct = Network::builder()
            .nodes(["a", "b"])
            .edge("e", "a", "b")
            .endpoints("a", "b")
            .build()
            .unwrap();
        let (a, b) = direct.endpoints().unwrap();
        assert!(matches!(
            direct.min_vertex_cut(a, b),
            Err(GraphError::DirectLink(..))
        ));
    }

    #[test]
    fn min_cut_prefers_lexicographically_smallest() {
        // a - x1 - y1 - b and a - x2 - y2 - b: four minimum cuts of size 2.
        let g = Network::builder()
            .nodes(["a", "b", "x1", "x2", "y1", "y2"])
            .edge("1", "a", "x1")
            .edge("2", "x1", "y1")
            .edge("3", "y1", "b")
            .edge("4", "a", "x2")
            .edge("5", "x2", "y2")
            .edge("6", "y2", "b")
            .endpoints("a", "b")
            .build()
            .unwrap();
        let (a, b) = g.endpoints().unwrap();
        assert_eq!(g.format_nodes(&g.min_vertex_cut(a, b).unwrap()), "{x1,x2}");
    }

    #[test]
    fn disjoint_paths_examples() {
        let g = fixtures::seven_node();
        let (a, b) = g.endpoints().unwrap();
        let paths = g.max_disjoint_paths(a, b).unwrap();
        assert_eq!(paths.len(), 2);
        let mut interior = BTreeSet::new();
        for p in &paths {
            Path::new(&g, p.nodes().to_vec()).unwrap();
            assert_eq!((p.first(), p.last()), (a, b));
            for &n in p.interior() {
                assert!(interior.insert(n), "paths share {}", g.label(n));
            }
        }

        let c = chain();
        let (a, b) = c.endpoints().unwrap();
        assert_eq!(c.max_disjoint_paths(a, b).unwrap().len(), 1);

        let k4 = fixtures::k4();
        let (a, b) = k4.endpoints().unwrap();
        let paths = k4.max_disjoint_paths(a, b).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(paths.iter().any(|p| p.len() == 1));
    }

    #[test]
    fn disconnects_examples() {
        let g = fixtures::seven_node();
        let (a, b) = g.endpoints().unwrap();
        let ids = |ls: &[&str]| {
            ls.iter()
                .map(|l| g.node(l).unwrap())
                .collect::<BTreeSet<_>>()
        };
        assert!(g.disconnects(&ids(&["c1", "c3"]), a, b).unwrap());
        assert!(!g.disconnects(&BTreeSet::new(), a, b).unwrap());
        assert!(g
            .disconnects(&ids(&["c1", "c2", "c3", "c4", "c5"]), a, b)
            .unwrap());
        assert_eq!(
            g.disconnects(&ids(&["a"]), a, b),
            Err(GraphError::EndpointRemoved("a".into()))
        );
    }

    #[test]
    fn path_validation() {
        let g = fixtures::seven_node();
        assert!(Path::from_labels(&g, &["a", "c2"]).is_err());
        assert!(Path::from_labels(&g, &["a", "c1", "a"]).is_err());
        assert!(Path::from_labels(&g, &["a"]).is_err());
        let red = Path::from_labels(&g, &["a", "c1", "c2", "b"]).unwrap();
        assert_eq!(red.display(&g).to_string(), "(a,c1,c2,b)");
        let edges: Vec<&str> = red
            .edges(&g)
            .iter()
            .map(|&e| g.edge(e).label.as_str())
            .collect();
        assert_eq!(edges, ["k1", "k6", "k9"]);
    }
}
