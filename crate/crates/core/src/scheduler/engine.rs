use rand::Rng;

use super::control::{
    admit, key_consumption, key_gen_decision, link_weights, lyapunov, schedule_commodity,
};
use super::{
    Amount, AuditKind, NetworkState, ScheduleConfig, SchedulerError, Service, StepDecision,
};
use crate::graph::EdgeId;

/// The controller's actions for the slot starting in `state`. Actual
/// transfer amounts are left at zero until [`apply`].
pub fn decide<R: Rng + ?Sized>(
    state: &NetworkState,
    cfg: &ScheduleConfig,
    rng: &mut R,
) -> StepDecision {
    let p = &cfg.params;
    let key_gen = state
        .keys
        .iter()
        .zip(&p.theta)
        .map(|(&e, &th)| key_gen_decision(e, th))
        .collect();
    let admissions = cfg
        .commodities
        .iter()
        .zip(&cfg.dest_of)
        .map(|(c, &d)| admit(state.queue(cfg, c.source, d), p.v, &c.utility, p.r_max))
        .collect();
    let weights = link_weights(state, cfg);
    let consumption: Vec<Amount> = cfg
        .links
        .iter()
        .enumerate()
        .map(|(e, lp)| key_consumption(weights.max[e], state.keys[e], p.theta[e], lp))
        .collect();
    let service = weights
        .per_edge
        .iter()
        .zip(&consumption)
        .zip(&cfg.links)
        .map(|((ws, &pe), lp)| schedule_commodity(ws, lp.rate.rate(pe), cfg.tie_break, rng))
        .collect();
    StepDecision {
        key_gen,
        admissions,
        consumption,
        edge_weight: weights.max,
        service,
    }
}

/// Advances the dynamics by one slot. Fills each service's actual amount,
/// drawing from the sender's queue in edge order, and returns the new state
/// with the real data delivered to each destination.
pub fn apply(
    state: &NetworkState,
    cfg: &ScheduleConfig,
    decision: &mut StepDecision,
) -> (NetworkState, Vec<Amount>) {
    let dn = cfg.dest_count();
    let idx = |n: crate::graph::NodeId, d: usize| n.0 * dn + d;
    let mut remaining = state.queues.clone();
    let mut nominal_out = vec![0.0; state.queues.len()];
    let mut arrivals = vec![0.0; state.queues.len()];
    for s in decision.service.iter_mut().flatten() {
        let from = idx(s.from, s.dest);
        s.actual = s.rate.min(remaining[from]);
        remaining[from] -= s.actual;
        nominal_out[from] += s.rate;
        arrivals[idx(s.to, s.dest)] += s.actual;
    }
    let mut admitted = vec![0.0; state.queues.len()];
    for ((c, &d), &r) in cfg
        .commodities
        .iter()
        .zip(&cfg.dest_of)
        .zip(&decision.admissions)
    {
        admitted[idx(c.source, d)] += r;
    }
    let mut delivered = vec![0.0; dn];
    let mut queues = Vec::with_capacity(state.queues.len());
    for n in cfg.network.nodes() {
        for (d, got) in delivered.iter_mut().enumerate() {
            let i = idx(n, d);
            if cfg.dests[d] == n {
                *got = arrivals[i];
                queues.push(0.0);
            } else {
                queues
                    .push((state.queues[i] - nominal_out[i]).max(0.0) + arrivals[i] + admitted[i]);
            }
        }
    }
    let keys = state
        .keys
        .iter()
        .enumerate()
        .map(|(e, &k)| {
            let gen = if decision.key_gen[e] {
                cfg.links[e].key_rate
            } else {
                0.0
            };
            k - decision.consumption[e] + gen
        })
        .collect();
    (
        NetworkState {
            t: state.t + 1,
            queues,
            keys,
        },
        delivered,
    )
}

/// Both sides of the per-slot drift-plus-penalty bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftAudit {
    /// `L(t+1) - L(t) - V sum U(R)`.
    pub lhs: f64,
    /// `B` plus the action-dependent terms, evaluated at the nominal rates.
    pub rhs: f64,
    pub tolerance: f64,
}

impl DriftAudit {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.tolerance
    }
}

pub fn drift_audit(
    state: &NetworkState,
    new_state: &NetworkState,
    decision: &StepDecision,
    cfg: &ScheduleConfig,
) -> DriftAudit {
    let p = &cfg.params;
    let penalty: f64 = cfg
        .commodities
        .iter()
        .zip(&decision.admissions)
        .map(|(c, &r)| c.utility.value(r))
        .sum();
    let lhs = lyapunov(new_state, cfg) - lyapunov(state, cfg) - p.v * penalty;

    let mut rhs = p.b;
    for (e, lp) in cfg.links.iter().enumerate() {
        let gap = state.keys[e] - p.theta[e];
        let gen = if decision.key_gen[e] {
            lp.key_rate
        } else {
            0.0
        };
        rhs += gap * gen - gap * decision.consumption[e];
    }
    for ((c, &d), &r) in cfg
        .commodities
        .iter()
        .zip(&cfg.dest_of)
        .zip(&decision.admissions)
    {
        rhs -= p.v * c.utility.value(r) - state.queue(cfg, c.source, d) * r;
    }
    for s in decision.service.iter().flatten() {
        rhs -= s.rate * (state.queue(cfg, s.from, s.dest) - state.queue(cfg, s.to, s.dest));
    }
    let tolerance = if p.exact {
        0.0
    } else {
        1e-9 * (1.0 + lhs.abs() + rhs.abs())
    };
    DriftAudit {
        lhs,
        rhs,
        tolerance,
    }
}

/// Audit summary for one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRecord {
    pub slot: u64,
    pub lyapunov: f64,
    pub drift: DriftAudit,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: NetworkState,
    pub decision: StepDecision,
    pub audit: AuditRecord,
    /// Real data delivered per destination index.
    pub delivered: Vec<Amount>,
}

fn violation(
    slot: u64,
    audit: AuditKind,
    quantity: String,
    value: f64,
    bound: f64,
) -> SchedulerError {
    SchedulerError::InvariantViolation {
        slot,
        audit,
        quantity,
        value,
        bound,
    }
}

fn check_bounds(state: &NetworkState, cfg: &ScheduleConfig) -> Result<(), SchedulerError> {
    let p = &cfg.params;
    let dn = cfg.dest_count();
    for (i, &q) in state.queues.iter().enumerate() {
        let name = || {
            format!(
                "Q[{}][{}]",
                cfg.network.label(crate::graph::NodeId(i / dn)),
                cfg.network.label(cfg.dests[i % dn])
            )
        };
        if q < 0.0 {
            return Err(violation(state.t, AuditKind::Bounds, name(), q, 0.0));
        }
        if q > p.queue_bound() {
            return Err(violation(
                state.t,
                AuditKind::Bounds,
                name(),
                q,
                p.queue_bound(),
            ));
        }
    }
    for (e, &k) in state.keys.iter().enumerate() {
        let name = || format!("E[{}]", cfg.network.edge(EdgeId(e)).label);
        if k < 0.0 {
            return Err(violation(state.t, AuditKind::Bounds, name(), k, 0.0));
        }
        if k > p.key_bound(EdgeId(e)) {
            return Err(violation(
                state.t,
                AuditKind::Bounds,
                name(),
                k,
                p.key_bound(EdgeId(e)),
            ));
        }
    }
    Ok(())
}

/// Keys are spent only from a pool already above `theta - slope * W`, and
/// that threshold is itself at least `P_max`.
fn check_availability(
    state: &NetworkState,
    cfg: &ScheduleConfig,
    decision: &StepDecision,
) -> Result<(), SchedulerError> {
    for (e, lp) in cfg.links.iter().enumerate() {
        let pe = decision.consumption[e];
        if pe <= 0.0 {
            continue;
        }
        let label = &cfg.network.edge(EdgeId(e)).label;
        let floor = cfg.params.theta[e] - lp.rate.slope() * decision.edge_weight[e];
        if state.keys[e] < pe {
            return Err(violation(
                state.t,
                AuditKind::Availability,
                format!("P[{label}]"),
                pe,
                state.keys[e],
            ));
        }
        if state.keys[e] < floor {
            return Err(violation(
                state.t,
                AuditKind::Availability,
                format!("E[{label}]"),
                state.keys[e],
                floor,
            ));
        }
        if floor < lp.max_consumption {
            return Err(violation(
                state.t,
                AuditKind::Availability,
                format!("theta-W[{label}]"),
                floor,
                lp.max_consumption,
            ));
        }
    }
    Ok(())
}

/// Applies an externally chosen decision and audits only the drift bound,
/// which holds for every bounded action.
pub fn step_with_decision(
    state: &NetworkState,
    cfg: &ScheduleConfig,
    mut decision: StepDecision,
) -> Result<StepOutcome, SchedulerError> {
    let (next, delivered) = apply(state, cfg, &mut decision);
    let drift = drift_audit(state, &next, &decision, cfg);
    if !drift.holds() {
        return Err(violation(
            state.t,
            AuditKind::Drift,
            "drift-plus-penalty".into(),
            drift.lhs,
            drift.rhs,
        ));
    }
    let audit = AuditRecord {
        slot: state.t,
        lyapunov: lyapunov(&next, cfg),
        drift,
    };
    Ok(StepOutcome {
        state: next,
        decision,
        audit,
        delivered,
    })
}

/// One slot of the controller, with the queue and key bounds, key
/// availability and the drift bound all checked.
pub fn step<R: Rng + ?Sized>(
    state: &NetworkState,
    cfg: &ScheduleConfig,
    rng: &mut R,
) -> Result<StepOutcome, SchedulerError> {
    let decision = decide(state, cfg, rng);
    check_availability(state, cfg, &decision)?;
    let out = step_with_decision(state, cfg, decision)?;
    check_bounds(&out.state, cfg)?;
    Ok(out)
}

/// A uniformly drawn action within the per-slot limits: any `S`, `R` in
/// `[0, R_max]`, `P` in `[0, min(P_max, E)]`, and any direction and type on
/// each edge.
pub fn random_feasible_decision<R: Rng + ?Sized>(
    state: &NetworkState,
    cfg: &ScheduleConfig,
    rng: &mut R,
) -> StepDecision {
    let p = &cfg.params;
    let integral = |x: f64| if p.exact { x.floor() } else { x };
    let key_gen = (0..cfg.links.len()).map(|_| rng.gen_bool(0.5)).collect();
    let admissions = cfg
        .commodities
        .iter()
        .map(|_| integral(rng.gen_range(0.0..=p.r_max)))
        .collect();
    let consumption: Vec<Amount> = cfg
        .links
        .iter()
        .zip(&state.keys)
        .map(|(lp, &e)| integral(rng.gen_range(0.0..=lp.max_consumption.min(e))))
        .collect();
    let service = cfg
        .network
        .edges()
        .iter()
        .zip(&cfg.links)
        .zip(&consumption)
        .map(|((edge, lp), &pe)| {
            if cfg.dest_count() == 0 || pe <= 0.0 {
                return None;
            }
            let (from, to) = if rng.gen_bool(0.5) {
                (edge.u, edge.v)
            } else {
                (edge.v, edge.u)
            };
            Some(Service {
                from,
                to,
                dest: rng.gen_range(0..cfg.dest_count()),
                rate: lp.rate.rate(pe),
                actual: 0.0,
            })
        })
        .collect();
    StepDecision {
        key_gen,
        admissions,
        consumption,
        edge_weight: vec![0.0; cfg.links.len()],
        service,
    }
}
