use rand::Rng;

use super::{Amount, LinkParams, NetworkState, ScheduleConfig, Service, TieBreak, UtilityFn};
use crate::graph::NodeId;

/// `1/2 sum Q^2 + 1/2 sum (E - theta)^2`.
pub fn lyapunov(state: &NetworkState, cfg: &ScheduleConfig) -> f64 {
    let q: f64 = state.queues.iter().map(|q| q * q).sum();
    let e: f64 = state
        .keys
        .iter()
        .zip(&cfg.params.theta)
        .map(|(e, th)| (e - th) * (e - th))
        .sum();
    0.5 * q + 0.5 * e
}

/// Run QKD this slot iff the pool is below its target.
pub fn key_gen_decision(e: Amount, theta: Amount) -> bool {
    e < theta
}

/// Maximizer of `V U(R) - Q R` over `[0, R_max]`; ties go to 0.
pub fn admit(q: Amount, v: f64, u: &UtilityFn, r_max: Amount) -> Amount {
    match *u {
        UtilityFn::Linear { weight } => {
            if q < v * weight {
                r_max
            } else {
                0.0
            }
        }
        UtilityFn::Log1p { weight } => {
            if q <= 0.0 {
                if weight > 0.0 {
                    r_max
                } else {
                    0.0
                }
            } else {
                (v * weight / q - 1.0).clamp(0.0, r_max)
            }
        }
    }
}

/// Backpressure weight of type-`dest` data sent `from -> to` over `edge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedWeight {
    pub from: NodeId,
    pub to: NodeId,
    pub dest: usize,
    pub weight: Amount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkWeights {
    /// Per edge, every (direction, destination) weight, sorted by
    /// (destination, sender).
    pub per_edge: Vec<Vec<DirectedWeight>>,
    /// Per edge, the largest of those weights.
    pub max: Vec<Amount>,
}

/// `W^b = max(Q_a^b - Q_c^b - gamma, 0)` for both orientations of every edge.
pub fn link_weights(state: &NetworkState, cfg: &ScheduleConfig) -> LinkWeights {
    let gamma = cfg.params.gamma;
    let mut per_edge = Vec::with_capacity(cfg.network.edge_count());
    let mut max = Vec::with_capacity(cfg.network.edge_count());
    for edge in cfg.network.edges() {
        let (lo, hi) = if edge.u < edge.v {
            (edge.u, edge.v)
        } else {
            (edge.v, edge.u)
        };
        let mut ws = Vec::with_capacity(2 * cfg.dest_count());
        for d in 0..cfg.dest_count() {
            for (from, to) in [(lo, hi), (hi, lo)] {
                let diff = state.queue(cfg, from, d) - state.queue(cfg, to, d) - gamma;
                ws.push(DirectedWeight {
                    from,
                    to,
                    dest: d,
                    weight: diff.max(0.0),
                });
            }
        }
        max.push(ws.iter().map(|w| w.weight).fold(0.0, f64::max));
        per_edge.push(ws);
    }
    LinkWeights { per_edge, max }
}

/// Maximizer of `rate(P) W + (E - theta) P` over `[0, P_max]`; ties go to 0.
///
/// Rate functions are linear, so the objective is linear in `P` and the
/// optimum sits at an end of the interval.
pub fn key_consumption(w: Amount, e: Amount, theta: Amount, lp: &LinkParams) -> Amount {
    if lp.rate.slope() * w + e - theta > 0.0 {
        lp.max_consumption
    } else {
        0.0
    }
}

/// Gives the edge's whole rate to one maximal-weight (direction, type), or
/// nothing when every weight is zero.
pub fn schedule_commodity<R: Rng + ?Sized>(
    weights: &[DirectedWeight],
    rate: Amount,
    tie_break: TieBreak,
    rng: &mut R,
) -> Option<Service> {
    let best = weights.iter().map(|w| w.weight).fold(0.0, f64::max);
    if best <= 0.0 || rate <= 0.0 {
        return None;
    }
    let top: Vec<&DirectedWeight> = weights.iter().filter(|w| w.weight == best).collect();
    let pick = match tie_break {
        TieBreak::Lexicographic => top[0],
        TieBreak::Random if top.len() == 1 => top[0],
        TieBreak::Random => top[rng.gen_range(0..top.len())],
    };
    Some(Service {
        from: pick.from,
        to: pick.to,
        dest: pick.dest,
        rate,
        actual: 0.0,
    })
}
