//! Reference networks used by tests, the CLI examples and the FFI layer.

use crate::graph::Network;

/// Edge table of the seven-node reference network: alice `a`, bob `b`,
/// relays `c1`..`c5`. Alice's only neighbours are `c1` and `c3`; `c1` and
/// `c2` both have degree three.
pub const SEVEN_NODE_EDGES: [(&str, &str, &str); 9] = [
    ("k1", "a", "c1"),
    ("k2", "a", "c3"),
    ("k3", "c3", "c4"),
    ("k4", "c1", "c4"),
    ("k5", "c4", "c5"),
    ("k6", "c1", "c2"),
    ("k7", "c2", "c5"),
    ("k8", "c5", "b"),
    ("k9", "c2", "b"),
];

pub const SEVEN_NODE_RED: [&str; 4] = ["a", "c1", "c2", "b"];
pub const SEVEN_NODE_BLUE: [&str; 5] = ["a", "c3", "c4", "c5", "b"];
pub const SEVEN_NODE_THIRD: [&str; 5] = ["a", "c1", "c4", "c5", "b"];

pub fn from_edges(nodes: &[&str], edges: &[(&str, &str, &str)], alice: &str, bob: &str) -> Network {
    edges
        .iter()
        .fold(
            Network::builder().nodes(nodes.iter().copied()),
            |b, &(id, u, v)| b.edge(id, u, v),
        )
        .endpoints(alice, bob)
        .build()
        .expect("fixture networks are valid")
}

pub fn seven_node() -> Network {
    from_edges(
        &["a", "b", "c1", "c2", "c3", "c4", "c5"],
        &SEVEN_NODE_EDGES,
        "a",
        "b",
    )
}

/// `a - c - b`.
pub fn chain() -> Network {
    from_edges(
        &["a", "b", "c"],
        &[("e1", "a", "c"), ("e2", "c", "b")],
        "a",
        "b",
    )
}

/// Complete graph on `{a, b, c1, c2}`, including the direct `a`–`b` link.
pub fn k4() -> Network {
    from_edges(
        &["a", "b", "c1", "c2"],
        &[
            ("e1", "a", "b"),
            ("e2", "a", "c1"),
            ("e3", "a", "c2"),
            ("e4", "b", "c1"),
            ("e5", "b", "c2"),
            ("e6", "c1", "c2"),
        ],
        "a",
        "b",
    )
}

/// `K4` without the direct `a`–`b` link.
pub fn k4_interior() -> Network {
    from_edges(
        &["a", "b", "c1", "c2"],
        &[
            ("e2", "a", "c1"),
            ("e3", "a", "c2"),
            ("e4", "b", "c1"),
            ("e5", "b", "c2"),
            ("e6", "c1", "c2"),
        ],
        "a",
        "b",
    )
}

/// Two disjoint two-hop routes `a - c1 - b` and `a - c2 - b`.
pub fn diamond() -> Network {
    from_edges(
        &["a", "b", "c1", "c2"],
        &[
            ("e1", "a", "c1"),
            ("e2", "a", "c2"),
            ("e3", "c1", "b"),
            ("e4", "c2", "b"),
        ],
        "a",
        "b",
    )
}

/// A single link `a - b`.
pub fn two_node() -> Network {
    from_edges(&["a", "b"], &[("e1", "a", "b")], "a", "b")
}
