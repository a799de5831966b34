//! Drift-plus-penalty key management and data scheduling.
//!
//! Every slot the controller decides, per edge, whether QKD runs (`S`) and
//! how much key to spend (`P`); per commodity, how much data to admit (`R`);
//! and which commodity each edge serves. Queues are kept per
//! (node, destination); keys are pooled per undirected edge.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, GraphError, Network, NodeId};

mod control;
mod engine;

pub use control::{
    admit, key_consumption, key_gen_decision, link_weights, lyapunov, schedule_commodity,
    DirectedWeight, LinkWeights,
};
pub use engine::{
    apply, decide, drift_audit, random_feasible_decision, step, step_with_decision, AuditRecord,
    DriftAudit, StepOutcome,
};

pub type Amount = f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedulerError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge {edge:?}: {reason}")]
    InvalidLink { edge: String, reason: String },
    #[error("edge {0:?} has no link parameters")]
    MissingLink(String),
    #[error("invalid commodity {0}")]
    InvalidCommodity(String),
    #[error("invalid control parameter: {0}")]
    InvalidParam(String),
    #[error("slot {slot}: {audit} audit: {quantity} = {value} violates bound {bound}")]
    InvariantViolation {
        slot: u64,
        audit: AuditKind,
        quantity: String,
        value: f64,
        bound: f64,
    },
}

/// The runtime audits a slot can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditKind {
    /// Queue and key pool bounds.
    Bounds,
    /// Keys spent never exceed keys stored.
    Availability,
    /// Per-slot drift-plus-penalty bound.
    Drift,
}

impl AuditKind {
    pub const ALL: [AuditKind; 3] = [AuditKind::Bounds, AuditKind::Availability, AuditKind::Drift];

    pub fn as_str(self) -> &'static str {
        match self {
            AuditKind::Bounds => "bounds",
            AuditKind::Availability => "availability",
            AuditKind::Drift => "drift",
        }
    }
}

impl std::fmt::Display for AuditKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Data rate as a function of key consumption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RateFn {
    /// One data bit per key bit.
    #[default]
    #[serde(rename = "otp")]
    OneTimePad,
    /// A fixed number of data bits per key bit.
    Proportional(f64),
}

impl RateFn {
    pub fn rate(self, key: Amount) -> Amount {
        match self {
            RateFn::OneTimePad => key,
            RateFn::Proportional(c) => c * key,
        }
    }

    /// Slope of the (linear) rate function.
    pub fn slope(self) -> f64 {
        match self {
            RateFn::OneTimePad => 1.0,
            RateFn::Proportional(c) => c,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn is_default_rate(r: &RateFn) -> bool {
    *r == RateFn::OneTimePad
}

/// Per-edge QKD and encryption parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Key bits generated in a slot with QKD active.
    #[serde(rename = "K")]
    pub key_rate: Amount,
    /// Maximum key bits spent in a slot.
    #[serde(rename = "P_max")]
    pub max_consumption: Amount,
    /// Encryption ratio: `rate(P) <= delta * P`.
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "is_default_rate")]
    pub rate: RateFn,
}

impl LinkParams {
    pub fn otp(key_rate: Amount, max_consumption: Amount) -> Self {
        LinkParams {
            key_rate,
            max_consumption,
            delta: 1.0,
            rate: RateFn::OneTimePad,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = [
            self.key_rate,
            self.max_consumption,
            self.delta,
            self.rate.slope(),
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err("parameters must be finite".into());
        }
        if self.key_rate < 0.0 {
            return Err("K must be non-negative".into());
        }
        if self.max_consumption <= 0.0 {
            return Err("P_max must be positive".into());
        }
        if self.delta < 1.0 {
            return Err("delta must be at least 1".into());
        }
        let slope = self.rate.slope();
        if slope <= 0.0 {
            return Err("rate slope must be positive".into());
        }
        if slope > self.delta {
            return Err(format!("rate slope {slope} exceeds delta {}", self.delta));
        }
        Ok(())
    }
}

/// Concave, nondecreasing utility with `value(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum UtilityFn {
    Linear {
        weight: f64,
    },
    /// `weight * ln(1 + R)`.
    Log1p {
        weight: f64,
    },
}

impl UtilityFn {
    pub fn value(&self, r: Amount) -> f64 {
        match *self {
            UtilityFn::Linear { weight } => weight * r,
            UtilityFn::Log1p { weight } => weight * r.ln_1p(),
        }
    }

    pub fn derivative_at_zero(&self) -> f64 {
        match *self {
            UtilityFn::Linear { weight } | UtilityFn::Log1p { weight } => weight,
        }
    }

    fn weight(&self) -> f64 {
        self.derivative_at_zero()
    }
}

/// A traffic class: data admitted at `source` for delivery to `dest`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commodity {
    pub source: NodeId,
    pub dest: NodeId,
    pub utility: UtilityFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// Seeded uniform choice among maximal weights.
    #[default]
    Random,
    /// Smallest (destination, sender) first.
    Lexicographic,
}

/// Control constants derived from the network, commodities, `V` and `R_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlParams {
    pub v: f64,
    pub r_max: Amount,
    /// Largest per-edge rate, `max rate(P_max)`.
    pub mu_max: Amount,
    pub d_max: usize,
    /// `R_max + d_max * mu_max`: the most one queue can grow in a slot.
    pub gamma: Amount,
    /// Largest utility derivative at zero.
    pub beta: f64,
    /// Per-edge key target `delta * beta * V + P_max`.
    pub theta: Vec<Amount>,
    pub k_max: Amount,
    pub p_max: Amount,
    pub nodes: usize,
    pub edges: usize,
    pub b: f64,
    pub b_tilde: f64,
    /// All inputs are integers and utilities linear, so every quantity the
    /// controller produces is an exactly representable integer.
    pub exact: bool,
}

impl ControlParams {
    pub fn derive(
        g: &Network,
        links: &[LinkParams],
        commodities: &[Commodity],
        v: f64,
        r_max: Amount,
    ) -> Self {
        let mu_max = links
            .iter()
            .map(|l| l.rate.rate(l.max_consumption))
            .fold(0.0, f64::max);
        let k_max = links.iter().map(|l| l.key_rate).fold(0.0, f64::max);
        let p_max = links.iter().map(|l| l.max_consumption).fold(0.0, f64::max);
        let beta = commodities
            .iter()
            .map(|c| c.utility.derivative_at_zero())
            .fold(0.0, f64::max);
        let d_max = g.max_degree();
        let d = d_max as f64;
        let n = g.node_count() as f64;
        let l = g.edge_count() as f64;
        let gamma = r_max + d * mu_max;
        let theta = links
            .iter()
            .map(|lp| lp.delta * beta * v + lp.max_consumption)
            .collect();
        let b = n * n * (1.5 * d * d * mu_max * mu_max + r_max * r_max)
            + l / 2.0 * (p_max + k_max).powi(2);
        let b_tilde = b + n * n * gamma * d * mu_max;
        let integral = |x: f64| x.fract() == 0.0 && x.abs() < 1e12;
        let exact = integral(v)
            && integral(r_max)
            && links.iter().all(|lp| {
                integral(lp.key_rate)
                    && integral(lp.max_consumption)
                    && integral(lp.delta)
                    && integral(lp.rate.slope())
            })
            && commodities
                .iter()
                .all(|c| matches!(c.utility, UtilityFn::Linear { weight } if integral(weight)));
        ControlParams {
            v,
            r_max,
            mu_max,
            d_max,
            gamma,
            beta,
            theta,
            k_max,
            p_max,
            nodes: g.node_count(),
            edges: g.edge_count(),
            b,
            b_tilde,
            exact,
        }
    }

    /// Upper bound on every data queue: `beta * V + R_max`.
    pub fn queue_bound(&self) -> Amount {
        self.beta * self.v + self.r_max
    }

    /// Upper bound on the key pool of edge `e`: `theta + K_max`.
    pub fn key_bound(&self, e: EdgeId) -> Amount {
        self.theta[e.0] + self.k_max
    }

    /// Aggregate backlog bound `N^2 (beta * V + R_max)`.
    pub fn backlog_bound(&self) -> Amount {
        (self.nodes * self.nodes) as f64 * self.queue_bound()
    }

    /// Utility gap guaranteed in the long run: `B~ / V`.
    pub fn utility_gap_bound(&self) -> f64 {
        self.b_tilde / self.v
    }
}

/// Everything the controller needs besides the evolving state.
#[derive(Debug, Clone)]
pub struct ScheduleConfig {
    pub network: Network,
    pub links: Vec<LinkParams>,
    pub commodities: Vec<Commodity>,
    /// Sorted distinct commodity destinations; queue index `d` holds type
    /// `dests[d]` data.
    pub dests: Vec<NodeId>,
    /// Destination index of each commodity.
    pub dest_of: Vec<usize>,
    pub params: ControlParams,
    pub tie_break: TieBreak,
}

impl ScheduleConfig {
    pub fn new(
        network: Network,
        commodities: Vec<Commodity>,
        v: f64,
        r_max: Amount,
        tie_break: TieBreak,
    ) -> Result<Self, SchedulerError> {
        if !(v.is_finite() && v > 0.0) {
            return Err(SchedulerError::InvalidParam(format!(
                "V must be positive, got {v}"
            )));
        }
        if !(r_max.is_finite() && r_max >= 0.0) {
            return Err(SchedulerError::InvalidParam(format!(
                "R_max must be non-negative, got {r_max}"
            )));
        }
        let mut links = Vec::with_capacity(network.edge_count());
        for e in network.edges() {
            let lp = e
                .link
                .ok_or_else(|| SchedulerError::MissingLink(e.label.clone()))?;
            lp.validate()
                .map_err(|reason| SchedulerError::InvalidLink {
                    edge: e.label.clone(),
                    reason,
                })?;
            links.push(lp);
        }
        for c in &commodities {
            let describe = || format!("{}->{}", network.label(c.source), network.label(c.dest));
            if !network.contains(c.source) || !network.contains(c.dest) {
                return Err(SchedulerError::InvalidCommodity("unknown endpoint".into()));
            }
            if c.source == c.dest {
                return Err(SchedulerError::InvalidCommodity(format!(
                    "{}: source equals destination",
                    describe()
                )));
            }
            let w = c.utility.weight();
            if !(w.is_finite() && w >= 0.0) {
                return Err(SchedulerError::InvalidCommodity(format!(
                    "{}: utility weight must be finite and non-negative",
                    describe()
                )));
            }
        }
        let mut dests: Vec<NodeId> = commodities.iter().map(|c| c.dest).collect();
        dests.sort();
        dests.dedup();
        let dest_of = commodities
            .iter()
            .map(|c| dests.binary_search(&c.dest).expect("destination listed"))
            .collect();
        let params = ControlParams::derive(&network, &links, &commodities, v, r_max);
        Ok(ScheduleConfig {
            network,
            links,
            commodities,
            dests,
            dest_of,
            params,
            tie_break,
        })
    }

    /// The same system with a different drift-penalty weight.
    pub fn with_v(&self, v: f64) -> Result<Self, SchedulerError> {
        ScheduleConfig::new(
            self.network.clone(),
            self.commodities.clone(),
            v,
            self.params.r_max,
            self.tie_break,
        )
    }

    pub fn dest_count(&self) -> usize {
        self.dests.len()
    }

    pub fn dest_index(&self, n: NodeId) -> Option<usize> {
        self.dests.binary_search(&n).ok()
    }
}

/// Queues and key pools at the start of slot `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub t: u64,
    /// `queues[node * D + d]`: type-`dests[d]` data waiting at `node`.
    pub queues: Vec<Amount>,
    /// Key bits stored per edge.
    pub keys: Vec<Amount>,
}

impl NetworkState {
    /// Empty queues and key pools.
    pub fn initial(cfg: &ScheduleConfig) -> Self {
        NetworkState {
            t: 0,
            queues: vec![0.0; cfg.network.node_count() * cfg.dest_count()],
            keys: vec![0.0; cfg.network.edge_count()],
        }
    }

    pub fn queue(&self, cfg: &ScheduleConfig, node: NodeId, d: usize) -> Amount {
        self.queues[node.0 * cfg.dest_count() + d]
    }

    pub fn set_queue(&mut self, cfg: &ScheduleConfig, node: NodeId, d: usize, value: Amount) {
        self.queues[node.0 * cfg.dest_count() + d] = value;
    }

    pub fn total_backlog(&self) -> Amount {
        self.queues.iter().sum()
    }
}

/// The transfer an edge performs in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Service {
    pub from: NodeId,
    pub to: NodeId,
    /// Destination index of the served commodity type.
    pub dest: usize,
    /// Nominal rate `rate(P)`; any shortfall is padded with dummy bits.
    pub rate: Amount,
    /// Real data moved, filled in when the decision is applied.
    pub actual: Amount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDecision {
    pub key_gen: Vec<bool>,
    pub admissions: Vec<Amount>,
    pub consumption: Vec<Amount>,
    /// Edge weight `W` the consumption decision saw (0 for injected actions).
    pub edge_weight: Vec<Amount>,
    pub service: Vec<Option<Service>>,
}
