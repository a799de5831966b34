//! Exhaustive information-theoretic check of a key exchange against an
//! attack, with one-bit keys.
//!
//! Every secret bit (keys, Alice's message and share randomness) is
//! enumerated. Each value Eve sees is an XOR of some of those bits, so an
//! exchange compiles to a list of bit masks and one enumeration pass counts,
//! for every possible view, how often the secret is 0 and how often it is 1.
//! The exchange is perfectly secret iff those counts agree for every view.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{insecure_edges, AttackSet, Scheme, SecurityError};
use crate::graph::{EdgeId, Network};

pub const ORACLE_MAX_NODES: usize = 7;
/// Upper bound on enumerated secret bits (2^24 assignments).
pub const ORACLE_MAX_VARIABLES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeKind {
    M0,
    Multipath(Scheme),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PerfectlySecret,
    Broken,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PerfectlySecret => "perfectly_secret",
            Verdict::Broken => "broken",
        }
    }
}

/// Eve's observations and the shared secret as parities of secret bits.
#[derive(Debug, Clone)]
pub(crate) struct LinearModel {
    pub variables: usize,
    pub view: Vec<u64>,
    pub secret: u64,
}

#[cfg(test)]
fn parity(x: u64) -> u64 {
    u64::from(x.count_ones() & 1)
}

impl LinearModel {
    #[cfg(test)]
    pub fn observe(&self, assignment: u64) -> u64 {
        self.view
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &form)| acc | parity(assignment & form) << i)
    }

    /// Walks every assignment in Gray-code order, so each step flips one
    /// variable and updates the view and secret by a single XOR.
    fn verdict(&self) -> Verdict {
        let column: Vec<u64> = (0..self.variables)
            .map(|j| {
                self.view
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (i, &form)| acc | (form >> j & 1) << i)
            })
            .collect();
        let mut counts: HashMap<u64, [u64; 2]> = HashMap::new();
        let (mut view, mut secret) = (0u64, 0u64);
        counts.entry(0).or_default()[0] += 1;
        for step in 1..1u64 << self.variables {
            let j = step.trailing_zeros() as usize;
            view ^= column[j];
            secret ^= self.secret >> j & 1;
            counts.entry(view).or_default()[secret as usize] += 1;
        }
        if counts.values().all(|c| c[0] == c[1]) {
            Verdict::PerfectlySecret
        } else {
            Verdict::Broken
        }
    }
}

pub(crate) fn compile(
    g: &Network,
    kind: &SchemeKind,
    attack: &AttackSet,
) -> Result<LinearModel, SecurityError> {
    let (a, b) = g.endpoints()?;
    if g.node_count() > ORACLE_MAX_NODES {
        return Err(SecurityError::InstanceTooLarge(format!(
            "{} nodes exceeds the limit of {ORACLE_MAX_NODES}",
            g.node_count()
        )));
    }
    let compromised = insecure_edges(g, attack);
    let model = match kind {
        SchemeKind::M0 => {
            if g.disconnects(&BTreeSet::new(), a, b)? {
                return Err(SecurityError::Disconnected);
            }
            let incident = |n| {
                g.incident(n)
                    .iter()
                    .fold(0u64, |m, &(_, e): &(_, EdgeId)| m | 1 << e.0)
            };
            let mut view: Vec<u64> = g
                .nodes()
                .filter(|&n| n != a && n != b)
                .map(incident)
                .collect();
            view.extend(compromised.iter().map(|e| 1u64 << e.0));
            LinearModel {
                variables: g.edge_count(),
                view,
                secret: incident(a),
            }
        }
        SchemeKind::Multipath(scheme) => {
            // Variable 0 is the message, 1..m the shares y_2..y_m, then one
            // variable per (edge, use), then one per compromised edge that no
            // path uses. Keys of unused, uncompromised edges never reach Eve
            // and would only scale every count equally.
            let m = scheme.len();
            let mut next = m;
            let mut key_uses: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
            let mut view = Vec::new();
            for (i, path) in scheme.paths().iter().enumerate() {
                let share = if i == 0 { (1u64 << m) - 1 } else { 1u64 << i };
                for e in path.edges(g) {
                    key_uses.entry(e).or_default().push(next);
                    view.push(share ^ 1 << next);
                    next += 1;
                }
            }
            for e in &compromised {
                match key_uses.get(e) {
                    Some(vars) => view.extend(vars.iter().map(|&v| 1u64 << v)),
                    None => {
                        view.push(1u64 << next);
                        next += 1;
                    }
                }
            }
            LinearModel {
                variables: next,
                view,
                secret: 1,
            }
        }
    };
    if model.variables > ORACLE_MAX_VARIABLES || model.view.len() > 64 {
        return Err(SecurityError::InstanceTooLarge(format!(
            "{} secret bits and {} observed bits exceed the limits of {ORACLE_MAX_VARIABLES} and 64",
            model.variables,
            model.view.len()
        )));
    }
    Ok(model)
}

/// Whether the exchange leaks nothing about the shared secret to Eve under
/// `attack`, with one-bit keys and a uniform message.
pub fn security_oracle(
    g: &Network,
    kind: &SchemeKind,
    attack: &AttackSet,
) -> Result<Verdict, SecurityError> {
    Ok(compile(g, kind, attack)?.verdict())
}
