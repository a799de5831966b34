//! Attack and scheme semantics for trusted-relay key exchange.
//!
//! An attack is a set of compromised relays; a scheme is a set of
//! alice→bob paths carrying XOR shares. A scheme stays secure while at
//! least one of its paths avoids every compromised node, and an attack
//! defeats every possible scheme exactly when it separates alice from bob.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::bits::BitsError;
use crate::graph::{EdgeId, GraphError, Network, NodeId, Path};

mod exchange;
mod oracle;

pub use exchange::{
    m0_exchange, multipath_exchange, Announcement, EveView, ExchangeTranscript, KeyAssignment,
    SchemeKindTag, TranscriptDoc,
};
pub use oracle::{security_oracle, SchemeKind, Verdict, ORACLE_MAX_NODES, ORACLE_MAX_VARIABLES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SecurityError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error("attack sets may not contain alice or bob (got {0:?})")]
    EndpointInAttack(String),
    #[error("a scheme needs at least one path")]
    EmptyScheme,
    #[error("scheme path {0} does not run from alice to bob")]
    PathEndpoints(String),
    #[error("no key bits for edge {0:?}")]
    MissingKey(String),
    #[error("key for edge {edge:?} has {got} bits, expected {expected}")]
    KeyLength {
        edge: String,
        expected: usize,
        got: usize,
    },
    #[error("edge {edge:?} carries {uses} shares of {message} bits but holds only {key} key bits")]
    KeyTooShort {
        edge: String,
        uses: usize,
        message: usize,
        key: usize,
    },
    #[error("alice and bob are not connected")]
    Disconnected,
    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),
}

/// Compromised relays. Never contains alice or bob.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AttackSet {
    nodes: BTreeSet<NodeId>,
}

impl AttackSet {
    pub fn new<I: IntoIterator<Item = NodeId>>(
        g: &Network,
        nodes: I,
    ) -> Result<Self, SecurityError> {
        let (a, b) = g.endpoints()?;
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        for &n in &nodes {
            if !g.contains(n) {
                return Err(GraphError::UnknownNode(format!("#{}", n.0)).into());
            }
            if n == a || n == b {
                return Err(SecurityError::EndpointInAttack(g.label(n).to_string()));
            }
        }
        Ok(AttackSet { nodes })
    }

    pub fn from_labels(g: &Network, labels: &[&str]) -> Result<Self, SecurityError> {
        let ids = labels
            .iter()
            .map(|l| g.node(l))
            .collect::<Result<Vec<_>, _>>()?;
        AttackSet::new(g, ids)
    }

    pub fn empty() -> Self {
        AttackSet::default()
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }

    pub fn hits(&self, path: &Path) -> bool {
        path.interior().iter().any(|n| self.nodes.contains(n))
    }

    pub fn display<'a>(&'a self, g: &'a Network) -> impl fmt::Display + 'a {
        g.format_nodes(&self.nodes)
    }
}

/// A set of alice→bob paths. Stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scheme {
    paths: Vec<Path>,
}

impl Scheme {
    pub fn new(g: &Network, paths: Vec<Path>) -> Result<Self, SecurityError> {
        let (a, b) = g.endpoints()?;
        if paths.is_empty() {
            return Err(SecurityError::EmptyScheme);
        }
        for p in &paths {
            // Re-validate in case the path came from another network.
            Path::new(g, p.nodes().to_vec())?;
            if p.first() != a || p.last() != b {
                return Err(SecurityError::PathEndpoints(p.display(g).to_string()));
            }
        }
        let mut paths = paths;
        paths.sort();
        paths.dedup();
        Ok(Scheme { paths })
    }

    pub fn from_labels(g: &Network, paths: &[&[&str]]) -> Result<Self, SecurityError> {
        let paths = paths
            .iter()
            .map(|p| Path::from_labels(g, p))
            .collect::<Result<Vec<_>, _>>()?;
        Scheme::new(g, paths)
    }

    /// The scheme using every simple alice→bob path.
    pub fn all_paths(g: &Network) -> Result<Self, SecurityError> {
        let (a, b) = g.endpoints()?;
        let paths = g.enumerate_simple_paths(a, b, g.node_count())?;
        if paths.is_empty() {
            return Err(SecurityError::Disconnected);
        }
        Scheme::new(g, paths)
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Minimum number of compromised nodes that breaks a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Threshold {
    Nodes(usize),
    /// Some path is a direct link with no relay to compromise.
    Unbreakable,
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Nodes(n) => write!(f, "{n}"),
            Threshold::Unbreakable => f.write_str("inf"),
        }
    }
}

/// Edges with at least one compromised endpoint.
pub fn insecure_edges(g: &Network, attack: &AttackSet) -> BTreeSet<EdgeId> {
    g.edge_ids()
        .filter(|&e| {
            let edge = g.edge(e);
            attack.contains(edge.u) || attack.contains(edge.v)
        })
        .collect()
}

/// Whether some path of the scheme avoids every compromised node.
pub fn sec(attack: &AttackSet, scheme: &Scheme) -> bool {
    scheme.paths.iter().any(|p| !attack.hits(p))
}

/// Whether the attack defeats every possible scheme, i.e. separates alice
/// from bob. Always false when alice and bob share a direct link.
pub fn is_strongest(g: &Network, attack: &AttackSet) -> Result<bool, SecurityError> {
    let (a, b) = g.endpoints()?;
    if g.has_direct_link() {
        return Ok(false);
    }
    Ok(g.disconnects(attack.nodes(), a, b)?)
}

/// The lexicographically least alice→bob path avoiding the attack, or
/// `None` when the attack is strongest.
pub fn find_secure_path(g: &Network, attack: &AttackSet) -> Result<Option<Path>, SecurityError> {
    let (a, b) = g.endpoints()?;
    let mut blocked = vec![false; g.node_count()];
    for n in attack.nodes() {
        blocked[n.0] = true;
    }
    Ok(g.least_path_avoiding(a, b, &blocked))
}

/// A strongest attack of minimum size (the lexicographically smallest one).
pub fn min_strongest_attack(g: &Network) -> Result<AttackSet, SecurityError> {
    let (a, b) = g.endpoints()?;
    let cut = g.min_vertex_cut(a, b)?;
    AttackSet::new(g, cut)
}

/// Every strongest attack of minimum size, by subset enumeration.
pub fn all_min_strongest_attacks(g: &Network) -> Result<Vec<AttackSet>, SecurityError> {
    let size = min_strongest_attack(g)?.len();
    let (a, b) = g.endpoints()?;
    let interior: Vec<NodeId> = g.nodes().filter(|&n| n != a && n != b).collect();
    let mut out = Vec::new();
    for combo in combinations(&interior, size) {
        let set: BTreeSet<NodeId> = combo.into_iter().collect();
        if g.disconnects(&set, a, b)? {
            out.push(AttackSet { nodes: set });
        }
    }
    Ok(out)
}

/// Minimum hitting set of the schemes' relay sets, by brute force.
pub fn scheme_threshold(scheme: &Scheme) -> Threshold {
    if scheme.paths.iter().any(|p| p.interior().is_empty()) {
        return Threshold::Unbreakable;
    }
    let universe: Vec<NodeId> = scheme
        .paths
        .iter()
        .flat_map(|p| p.interior().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for k in 1..=universe.len() {
        for combo in combinations(&universe, k) {
            let attack = AttackSet {
                nodes: combo.into_iter().collect(),
            };
            if !sec(&attack, scheme) {
                return Threshold::Nodes(k);
            }
        }
    }
    unreachable!("compromising every relay breaks any scheme without direct links")
}

/// All `k`-element subsets of `items`, in lexicographic order.
pub(crate) fn combinations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    fn rec<T: Copy>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}
