//! Bit-exact simulation of the multi-path and parity-broadcast (M0) key
//! exchanges, and of what Eve observes during them.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AttackSet, Scheme, SecurityError};
use crate::bits::BitString;
use crate::graph::{EdgeId, Network, NodeId};

/// One key bit string per edge, all the same length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyAssignment {
    keys: Vec<BitString>,
    len: usize,
}

impl KeyAssignment {
    pub fn new(g: &Network, keys: BTreeMap<EdgeId, BitString>) -> Result<Self, SecurityError> {
        let mut out = Vec::with_capacity(g.edge_count());
        let mut len = None;
        for e in g.edge_ids() {
            let label = &g.edge(e).label;
            let bits = keys
                .get(&e)
                .cloned()
                .ok_or_else(|| SecurityError::MissingKey(label.clone()))?;
            let expected = *len.get_or_insert(bits.len());
            if bits.len() != expected {
                return Err(SecurityError::KeyLength {
                    edge: label.clone(),
                    expected,
                    got: bits.len(),
                });
            }
            out.push(bits);
        }
        Ok(KeyAssignment {
            keys: out,
            len: len.unwrap_or(0),
        })
    }

    /// Keys taken from the edges' `key_bits`.
    pub fn from_network(g: &Network) -> Result<Self, SecurityError> {
        let mut keys = BTreeMap::new();
        for e in g.edge_ids() {
            let edge = g.edge(e);
            let bits = edge
                .key_bits
                .clone()
                .ok_or_else(|| SecurityError::MissingKey(edge.label.clone()))?;
            keys.insert(e, bits);
        }
        KeyAssignment::new(g, keys)
    }

    pub fn random<R: Rng + ?Sized>(g: &Network, len: usize, rng: &mut R) -> Self {
        KeyAssignment {
            keys: g.edge_ids().map(|_| BitString::random(len, rng)).collect(),
            len,
        }
    }

    pub fn zeros(g: &Network, len: usize) -> Self {
        KeyAssignment {
            keys: g.edge_ids().map(|_| BitString::zeros(len)).collect(),
            len,
        }
    }

    pub fn key_len(&self) -> usize {
        self.len
    }

    pub fn get(&self, e: EdgeId) -> &BitString {
        &self.keys[e.0]
    }

    fn incident_xor(&self, g: &Network, n: NodeId) -> BitString {
        let mut acc = BitString::zeros(self.len);
        for &(_, e) in g.incident(n) {
            acc.xor_assign(&self.keys[e.0])
                .expect("key assignment lengths are uniform");
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKindTag {
    Multipath,
    M0,
}

/// A public message. Relay hops carry `to`, `edge` and `path`; parity
/// broadcasts carry none of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Announcement {
    pub from: NodeId,
    pub to: Option<NodeId>,
    pub edge: Option<EdgeId>,
    pub path: Option<usize>,
    pub bits: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeTranscript {
    pub scheme_kind: SchemeKindTag,
    pub announcements: Vec<Announcement>,
    pub alice_key: BitString,
    pub bob_key: BitString,
}

/// Everything Eve holds for a given attack: every announcement plus the
/// full key of each edge touching a compromised node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EveView {
    pub announcements: Vec<BitString>,
    pub compromised_keys: BTreeMap<EdgeId, BitString>,
}

impl ExchangeTranscript {
    pub fn agreed(&self) -> bool {
        self.alice_key == self.bob_key
    }

    pub fn eve_view(&self, g: &Network, keys: &KeyAssignment, attack: &AttackSet) -> EveView {
        EveView {
            announcements: self.announcements.iter().map(|a| a.bits.clone()).collect(),
            compromised_keys: super::insecure_edges(g, attack)
                .into_iter()
                .map(|e| (e, keys.get(e).clone()))
                .collect(),
        }
    }

    pub fn to_doc(&self, g: &Network) -> TranscriptDoc {
        TranscriptDoc {
            scheme: self.scheme_kind,
            alice_key: self.alice_key.to_hex(),
            bob_key: self.bob_key.to_hex(),
            key_bits: self.alice_key.len(),
            agreed: self.agreed(),
            announcements: self
                .announcements
                .iter()
                .map(|a| AnnouncementDoc {
                    from: g.label(a.from).to_string(),
                    to: a.to.map(|n| g.label(n).to_string()),
                    edge: a.edge.map(|e| g.edge(e).label.clone()),
                    path: a.path,
                    bits: a.bits.len(),
                    hex: a.bits.to_hex(),
                })
                .collect(),
        }
    }
}

/// Serializable transcript with labels and hex-encoded bit strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptDoc {
    pub scheme: SchemeKindTag,
    pub key_bits: usize,
    pub alice_key: String,
    pub bob_key: String,
    pub agreed: bool,
    pub announcements: Vec<AnnouncementDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnouncementDoc {
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<usize>,
    pub bits: usize,
    pub hex: String,
}

/// Splits `message` into one XOR share per path and relays each share hop
/// by hop under one-time-pad encryption.
///
/// Shares `y_2..y_m` are uniform and `y_1 = x ^ y_2 ^ ... ^ y_m`; share `i`
/// travels path `i` of the (sorted) scheme. The `k`-th time an edge is used
/// across the scheme it spends key bits `k*n..(k+1)*n`, so a key length of
/// `n` suffices whenever the paths are edge-disjoint.
pub fn multipath_exchange<R: Rng + ?Sized>(
    g: &Network,
    scheme: &Scheme,
    message: &BitString,
    keys: &KeyAssignment,
    rng: &mut R,
) -> Result<ExchangeTranscript, SecurityError> {
    let n = message.len();
    let mut uses: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for p in scheme.paths() {
        for e in p.edges(g) {
            *uses.entry(e).or_default() += 1;
        }
    }
    for (&e, &count) in &uses {
        if count * n > keys.key_len() {
            return Err(SecurityError::KeyTooShort {
                edge: g.edge(e).label.clone(),
                uses: count,
                message: n,
                key: keys.key_len(),
            });
        }
    }

    let mut shares: Vec<BitString> = (1..scheme.len())
        .map(|_| BitString::random(n, rng))
        .collect();
    let mut first = message.clone();
    for s in &shares {
        first.xor_assign(s)?;
    }
    shares.insert(0, first);

    let mut next_use: BTreeMap<EdgeId, usize> = BTreeMap::new();
    let mut announcements = Vec::new();
    let mut recovered = BitString::zeros(n);
    for (i, (path, share)) in scheme.paths().iter().zip(&shares).enumerate() {
        let mut carried = share.clone();
        for (hop, e) in path.nodes().windows(2).zip(path.edges(g)) {
            let k = next_use.entry(e).or_default();
            let pad = keys.get(e).segment(*k * n, n)?;
            *k += 1;
            let cipher = carried.xor(&pad)?;
            announcements.push(Announcement {
                from: hop[0],
                to: Some(hop[1]),
                edge: Some(e),
                path: Some(i),
                bits: cipher.clone(),
            });
            carried = cipher.xor(&pad)?;
        }
        recovered.xor_assign(&carried)?;
    }

    Ok(ExchangeTranscript {
        scheme_kind: SchemeKindTag::Multipath,
        announcements,
        alice_key: message.clone(),
        bob_key: recovered,
    })
}

/// Every relay broadcasts the XOR of its incident keys. Alice's key is the
/// XOR of her own incident keys; Bob recovers it from the broadcasts and his
/// incident keys, since every other edge appears twice.
pub fn m0_exchange(g: &Network, keys: &KeyAssignment) -> Result<ExchangeTranscript, SecurityError> {
    let (a, b) = g.endpoints()?;
    if g.disconnects(&BTreeSet::new(), a, b)? {
        return Err(SecurityError::Disconnected);
    }
    let announcements: Vec<Announcement> = g
        .nodes()
        .filter(|&n| n != a && n != b)
        .map(|n| Announcement {
            from: n,
            to: None,
            edge: None,
            path: None,
            bits: keys.incident_xor(g, n),
        })
        .collect();
    let alice_key = keys.incident_xor(g, a);
    let mut bob_key = keys.incident_xor(g, b);
    for ann in &announcements {
        bob_key.xor_assign(&ann.bits)?;
    }
    Ok(ExchangeTranscript {
        scheme_kind: SchemeKindTag::M0,
        announcements,
        alice_key,
        bob_key,
    })
}
