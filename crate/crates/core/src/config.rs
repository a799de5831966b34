//! The TOML configuration document read by the command-line tool.
//!
//! ```toml
//! [graph]
//! nodes = ["a", "b", "c"]
//! alice = "a"
//! bob = "b"
//! [[graph.edges]]
//! id = "e1"
//! u = "a"
//! v = "c"
//! key = "a5"                      # optional, hex, security mode
//! params = { K = 5, P_max = 5 }   # optional, schedule mode
//!
//! [security]                      # or [schedule], never both
//! scheme = "all"                  # or a list of node-label paths
//! attack = "enumerate"            # or a list of node labels
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::graph::{Network, NodeId, Path};
use crate::harness::{Scenario, DEFAULT_WINDOW};
use crate::scheduler::{Commodity, LinkParams, ScheduleConfig, TieBreak, UtilityFn};
use crate::security::{AttackSet, Scheme, SchemeKindTag};

/// Upper limit on interior nodes for `attack = "enumerate"`.
pub const MAX_ENUMERATED_INTERIOR: usize = 20;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

fn invalid(location: impl Into<String>, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        location: location.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub graph: GraphDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub security: Option<SecuritySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<String>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub u: String,
    pub v: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<LinkParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AllKeyword {
    #[serde(rename = "all")]
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnumerateKeyword {
    #[serde(rename = "enumerate")]
    Enumerate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeSpec {
    All(AllKeyword),
    Paths(Vec<Vec<String>>),
}

impl Default for SchemeSpec {
    fn default() -> Self {
        SchemeSpec::All(AllKeyword::All)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttackSpec {
    Enumerate(EnumerateKeyword),
    Nodes(Vec<String>),
}

impl Default for AttackSpec {
    fn default() -> Self {
        AttackSpec::Enumerate(EnumerateKeyword::Enumerate)
    }
}

fn default_key_bits() -> usize {
    32
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecuritySection {
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub attack: AttackSpec,
    /// Length of generated keys and messages; also the bit length of
    /// `graph.edges[].key` values.
    #[serde(default = "default_key_bits")]
    pub key_bits: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_kind")]
    pub kind: SchemeKindTag,
    /// Hex message for the multipath exchange; random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub oracle: bool,
    /// List every minimum strongest attack, not just one.
    #[serde(default, skip_serializing_if = "is_false")]
    pub all_minimal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
}

fn default_kind() -> SchemeKindTag {
    SchemeKindTag::Multipath
}

impl Default for SecuritySection {
    fn default() -> Self {
        SecuritySection {
            scheme: SchemeSpec::default(),
            attack: AttackSpec::default(),
            key_bits: default_key_bits(),
            seed: 0,
            kind: default_kind(),
            message: None,
            oracle: false,
            all_minimal: false,
            transcript: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommodityDoc {
    pub source: String,
    pub dest: String,
    pub utility: UtilityFn,
}

fn default_window() -> f64 {
    DEFAULT_WINDOW
}

fn is_default_tie(t: &TieBreak) -> bool {
    *t == TieBreak::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(rename = "V_list", default, skip_serializing_if = "Option::is_none")]
    pub v_list: Option<Vec<f64>>,
    #[serde(rename = "R_max")]
    pub r_max: f64,
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "is_default_tie")]
    pub tie_break: TieBreak,
    #[serde(default = "default_window")]
    pub window: f64,
    /// Link parameters for edges that carry none of their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_params: Option<LinkParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    pub commodities: Vec<CommodityDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Security,
    Schedule,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.mode()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config documents always serialize")
    }

    pub fn mode(&self) -> Result<Mode, ConfigError> {
        match (&self.security, &self.schedule) {
            (Some(_), None) => Ok(Mode::Security),
            (None, Some(_)) => Ok(Mode::Schedule),
            _ => Err(invalid(
                "document",
                "exactly one of [security] or [schedule] is required",
            )),
        }
    }

    pub fn security(&self) -> Result<&SecuritySection, ConfigError> {
        self.security
            .as_ref()
            .ok_or_else(|| invalid("document", "this command needs a [security] section"))
    }

    pub fn schedule(&self) -> Result<&ScheduleSection, ConfigError> {
        self.schedule
            .as_ref()
            .ok_or_else(|| invalid("document", "this command needs a [schedule] section"))
    }

    /// Builds the network. Edge keys are decoded with `security.key_bits`;
    /// edges without parameters take `schedule.default_params`.
    pub fn network(&self) -> Result<Network, ConfigError> {
        let g = &self.graph;
        let (alice, bob) = match (&g.alice, &g.bob) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(invalid("graph", "alice and bob must both be given")),
        };
        let known: BTreeSet<&str> = g.nodes.iter().map(String::as_str).collect();
        for (field, label) in [("graph.alice", alice), ("graph.bob", bob)] {
            if !known.contains(label.as_str()) {
                return Err(invalid(field, format!("unknown node {label:?}")));
            }
        }
        let key_bits = self.security.as_ref().map(|s| s.key_bits);
        let fallback = self.schedule.as_ref().and_then(|s| s.default_params);
        let mut builder = Network::builder()
            .nodes(g.nodes.iter().cloned())
            .endpoints(alice, bob);
        for (i, e) in g.edges.iter().enumerate() {
            let at = |f: &str| format!("graph.edges[{i}].{f}");
            for (f, label) in [("u", &e.u), ("v", &e.v)] {
                if !known.contains(label.as_str()) {
                    return Err(invalid(at(f), format!("unknown node {label:?}")));
                }
            }
            let key = match &e.key {
                None => None,
                Some(hex) => {
                    let len = key_bits.unwrap_or(4 * hex.len());
                    Some(BitString::from_hex(hex, len).map_err(|err| invalid(at("key"), err))?)
                }
            };
            let params = e.params.or(fallback);
            if let Some(lp) = &params {
                lp.validate().map_err(|err| invalid(at("params"), err))?;
            }
            builder = builder.edge_with(e.id.clone(), e.u.clone(), e.v.clone(), key, params);
        }
        builder.build().map_err(|err| invalid("graph", err))
    }

    pub fn scheme(&self, g: &Network) -> Result<Scheme, ConfigError> {
        let sec = self.security()?;
        match &sec.scheme {
            SchemeSpec::All(_) => Scheme::all_paths(g).map_err(|e| invalid("security.scheme", e)),
            SchemeSpec::Paths(paths) => {
                let mut out = Vec::with_capacity(paths.len());
                for (i, p) in paths.iter().enumerate() {
                    let labels: Vec<&str> = p.iter().map(String::as_str).collect();
                    let path = Path::from_labels(g, &labels)
                        .map_err(|e| invalid(format!("security.scheme[{i}]"), e))?;
                    out.push(path);
                }
                Scheme::new(g, out).map_err(|e| invalid("security.scheme", e))
            }
        }
    }

    /// The attacks to evaluate: the listed one, or every subset of interior
    /// nodes by increasing size.
    pub fn attacks(&self, g: &Network) -> Result<Vec<AttackSet>, ConfigError> {
        match &self.security()?.attack {
            AttackSpec::Nodes(labels) => {
                let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
                Ok(vec![AttackSet::from_labels(g, &labels)
                    .map_err(|e| invalid("security.attack", e))?])
            }
            AttackSpec::Enumerate(_) => enumerate_attacks(g),
        }
    }

    /// Edge keys from the document if every edge has one, else uniform keys
    /// of `security.key_bits` bits drawn from `rng`.
    pub fn keys<R: rand::Rng + ?Sized>(
        &self,
        g: &Network,
        rng: &mut R,
    ) -> Result<crate::security::KeyAssignment, ConfigError> {
        let sec = self.security()?;
        if g.edges().iter().all(|e| e.key_bits.is_some()) && g.edge_count() > 0 {
            crate::security::KeyAssignment::from_network(g).map_err(|e| invalid("graph.edges", e))
        } else if g.edges().iter().any(|e| e.key_bits.is_some()) {
            Err(invalid(
                "graph.edges",
                "either every edge has a key or none does",
            ))
        } else {
            Ok(crate::security::KeyAssignment::random(g, sec.key_bits, rng))
        }
    }

    pub fn message<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<BitString, ConfigError> {
        let sec = self.security()?;
        match &sec.message {
            Some(hex) => {
                BitString::from_hex(hex, sec.key_bits).map_err(|e| invalid("security.message", e))
            }
            None => Ok(BitString::random(sec.key_bits, rng)),
        }
    }

    /// The scheduling system with drift-penalty weight `v`.
    pub fn schedule_config(&self, v: f64) -> Result<ScheduleConfig, ConfigError> {
        let s = self.schedule()?;
        let g = self.network()?;
        for (i, e) in g.edges().iter().enumerate() {
            if e.link.is_none() {
                return Err(invalid(
                    format!("graph.edges[{i}].params ({})", e.label),
                    "missing link parameters and no schedule.default_params",
                ));
            }
        }
        let mut commodities = Vec::with_capacity(s.commodities.len());
        for (i, c) in s.commodities.iter().enumerate() {
            let at = |f: &str| format!("schedule.commodities[{i}].{f}");
            let source = g.node(&c.source).map_err(|e| invalid(at("source"), e))?;
            let dest = g.node(&c.dest).map_err(|e| invalid(at("dest"), e))?;
            commodities.push(Commodity {
                source,
                dest,
                utility: c.utility,
            });
        }
        ScheduleConfig::new(g, commodities, v, s.r_max, s.tie_break)
            .map_err(|e| invalid("schedule", e))
    }

    /// The V values to use: `V_list`, or `[V]`.
    pub fn v_values(&self) -> Result<Vec<f64>, ConfigError> {
        let s = self.schedule()?;
        match (&s.v_list, s.v) {
            (Some(list), _) if !list.is_empty() => Ok(list.clone()),
            (_, Some(v)) => Ok(vec![v]),
            _ => Err(invalid("schedule", "one of V or V_list is required")),
        }
    }

    pub fn scenario(&self, v: f64) -> Result<Scenario, ConfigError> {
        let s = self.schedule()?;
        let mut sc = Scenario::new(self.schedule_config(v)?, s.horizon, s.seed);
        sc.window = s.window;
        Ok(sc)
    }
}

fn enumerate_attacks(g: &Network) -> Result<Vec<AttackSet>, ConfigError> {
    let (a, b) = g.endpoints().map_err(|e| invalid("graph", e))?;
    let interior: Vec<NodeId> = g.nodes().filter(|&n| n != a && n != b).collect();
    if interior.len() > MAX_ENUMERATED_INTERIOR {
        return Err(invalid(
            "security.attack",
            format!(
                "{} interior nodes is too many to enumerate (limit {MAX_ENUMERATED_INTERIOR})",
                interior.len()
            ),
        ));
    }
    let mut out = Vec::new();
    for k in 0..=interior.len() {
        for combo in crate::security::combinations(&interior, k) {
            out.push(AttackSet::new(g, combo).map_err(|e| invalid("security.attack", e))?);
        }
    }
    Ok(out)
}
