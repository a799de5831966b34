//! Static benchmark for the long-run utility: the best rate vector that
//! some multi-commodity flow can carry within each edge's sustainable rate.

use num_traits::{ToPrimitive, Zero};

use super::lp::{rational, to_f64, LpOutcome, Program, RowKind, Q};
use super::HarnessError;
use crate::scheduler::{ScheduleConfig, UtilityFn};

pub const ORACLE_MAX_NODES: usize = 7;
pub const ORACLE_MAX_COMMODITIES: usize = 3;
/// Finest grid step for concave utilities, relative to `R_max`.
pub const GRID_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    /// Exact rational LP; the value is the optimum.
    Exact,
    /// Grid search; the value is attained, and `upper_bound` is a
    /// linearization certificate.
    Grid,
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub rates: Vec<Q>,
    pub utility: f64,
    /// Exact optimum for linear utilities.
    pub utility_exact: Option<Q>,
    pub upper_bound: f64,
    pub method: OracleMethod,
}

impl OracleSolution {
    pub fn rates_f64(&self) -> Vec<f64> {
        self.rates.iter().map(to_f64).collect()
    }
}

/// Sustainable data rate of each edge: `rate(min(K, P_max))`.
pub fn edge_capacities(cfg: &ScheduleConfig) -> Vec<Q> {
    cfg.links
        .iter()
        .map(|lp| rational(lp.rate.slope()) * rational(lp.key_rate.min(lp.max_consumption)))
        .collect()
}

struct FlowModel {
    program: Program,
    rate_var: Vec<usize>,
}

/// Variables: per (destination, directed arc) a flow, then one rate per
/// commodity. Relays conserve flow, sources inject their rates, each edge
/// carries at most its capacity across both directions and all types.
fn flow_model(cfg: &ScheduleConfig, fixed: &[Option<Q>]) -> FlowModel {
    let g = &cfg.network;
    let dn = cfg.dest_count();
    let arcs = 2 * g.edge_count();
    let flow = |d: usize, arc: usize| d * arcs + arc;
    let rate_var: Vec<usize> = (0..cfg.commodities.len()).map(|c| dn * arcs + c).collect();
    let mut p = Program::new(dn * arcs + cfg.commodities.len());
    let one = || Q::from_integer(1.into());
    let caps = edge_capacities(cfg);
    for (e, cap) in caps.iter().enumerate() {
        let coeffs = (0..dn)
            .flat_map(|d| [(flow(d, 2 * e), one()), (flow(d, 2 * e + 1), one())])
            .collect();
        p.add_row(coeffs, RowKind::Le, cap.clone());
    }
    for d in 0..dn {
        for n in g.nodes() {
            if n == cfg.dests[d] {
                continue;
            }
            let mut coeffs = Vec::new();
            for (e, edge) in g.edges().iter().enumerate() {
                // Arc 2e runs u -> v, arc 2e+1 runs v -> u.
                if edge.u == n {
                    coeffs.push((flow(d, 2 * e), one()));
                    coeffs.push((flow(d, 2 * e + 1), -one()));
                } else if edge.v == n {
                    coeffs.push((flow(d, 2 * e + 1), one()));
                    coeffs.push((flow(d, 2 * e), -one()));
                }
            }
            for (c, com) in cfg.commodities.iter().enumerate() {
                if cfg.dest_of[c] == d && com.source == n {
                    coeffs.push((rate_var[c], -one()));
                }
            }
            p.add_row(coeffs, RowKind::Eq, Q::zero());
        }
    }
    let r_max = rational(cfg.params.r_max);
    for (c, &v) in rate_var.iter().enumerate() {
        match &fixed[c] {
            Some(r) => p.add_row(vec![(v, one())], RowKind::Eq, r.clone()),
            None => p.add_row(vec![(v, one())], RowKind::Le, r_max.clone()),
        }
    }
    FlowModel {
        program: p,
        rate_var,
    }
}

fn maximize(model: &mut FlowModel, weights: &[Q]) -> Option<(Q, Vec<Q>)> {
    model.program.objective = model
        .rate_var
        .iter()
        .zip(weights)
        .filter(|(_, w)| !w.is_zero())
        .map(|(&v, w)| (v, w.clone()))
        .collect();
    match model.program.solve() {
        LpOutcome::Optimal { value, x } => {
            let rates = model.rate_var.iter().map(|&v| x[v].clone()).collect();
            Some((value, rates))
        }
        _ => None,
    }
}

fn total_utility(cfg: &ScheduleConfig, rates: &[f64]) -> f64 {
    cfg.commodities
        .iter()
        .zip(rates)
        .map(|(c, &r)| c.utility.value(r))
        .sum()
}

pub fn oracle_optimal(cfg: &ScheduleConfig) -> Result<OracleSolution, HarnessError> {
    if cfg.network.node_count() > ORACLE_MAX_NODES {
        return Err(HarnessError::OracleRefused(format!(
            "{} nodes exceeds the oracle limit of {ORACLE_MAX_NODES}",
            cfg.network.node_count()
        )));
    }
    if cfg.commodities.len() > ORACLE_MAX_COMMODITIES {
        return Err(HarnessError::OracleRefused(format!(
            "{} commodities exceeds the oracle limit of {ORACLE_MAX_COMMODITIES}",
            cfg.commodities.len()
        )));
    }
    let k = cfg.commodities.len();
    let linear = cfg
        .commodities
        .iter()
        .all(|c| matches!(c.utility, UtilityFn::Linear { .. }));
    if linear {
        let weights: Vec<Q> = cfg
            .commodities
            .iter()
            .map(|c| rational(c.utility.derivative_at_zero()))
            .collect();
        let mut model = flow_model(cfg, &vec![None; k]);
        let (value, rates) = maximize(&mut model, &weights).ok_or_else(infeasible)?;
        let utility = to_f64(&value);
        return Ok(OracleSolution {
            rates,
            utility,
            utility_exact: Some(value),
            upper_bound: utility,
            method: OracleMethod::Exact,
        });
    }
    grid_search(cfg)
}

fn infeasible() -> HarnessError {
    HarnessError::OracleRefused("flow program has no optimum".into())
}

/// Value of fixing every rate but the last and then sending as much of the
/// last commodity as fits. Utilities are nondecreasing, so that is the best
/// completion of the fixed prefix.
fn completion(cfg: &ScheduleConfig, prefix: &[f64]) -> Option<(f64, Vec<Q>)> {
    let k = cfg.commodities.len();
    let mut fixed: Vec<Option<Q>> = prefix.iter().map(|&r| Some(rational(r))).collect();
    fixed.push(None);
    let mut model = flow_model(cfg, &fixed);
    let mut weights = vec![Q::zero(); k];
    weights[k - 1] = Q::from_integer(1.into());
    let (_, rates) = maximize(&mut model, &weights)?;
    let value = total_utility(cfg, &rates.iter().map(to_f64).collect::<Vec<_>>());
    Some((value, rates))
}

fn grid_search(cfg: &ScheduleConfig) -> Result<OracleSolution, HarnessError> {
    let k = cfg.commodities.len();
    let r_max = cfg.params.r_max;
    let finest = GRID_RESOLUTION * r_max;
    let mut center = vec![0.0; k - 1];
    let mut best = completion(cfg, &center).ok_or_else(infeasible)?;
    let mut step = r_max / 10.0;
    let mut radius = 10i64;
    loop {
        let mut improved = best.clone();
        let mut improved_at = center.clone();
        let mut offsets = vec![-radius; k - 1];
        loop {
            let point: Option<Vec<f64>> = offsets
                .iter()
                .zip(&center)
                .map(|(&o, &c)| {
                    let r = c + o as f64 * step;
                    (r >= -1e-12 && r <= r_max + 1e-12).then(|| r.clamp(0.0, r_max))
                })
                .collect();
            if let Some(point) = point {
                if let Some(cand) = completion(cfg, &point) {
                    if cand.0 > improved.0 {
                        improved = cand;
                        improved_at = point;
                    }
                }
            }
            let mut i = 0;
            while i < offsets.len() && offsets[i] == radius {
                offsets[i] = -radius;
                i += 1;
            }
            if i == offsets.len() {
                break;
            }
            offsets[i] += 1;
        }
        best = improved;
        center = improved_at;
        if step <= finest * (1.0 + 1e-9) {
            break;
        }
        step /= 10.0;
        radius = 10;
    }
    let (utility, rates) = best;
    // Concavity: U(r) <= U(r^) + U'(r^)(r - r^), so maximizing the
    // linearization over the feasible set bounds the optimum from above.
    let r_hat: Vec<f64> = rates.iter().map(to_f64).collect();
    let slopes: Vec<f64> = cfg
        .commodities
        .iter()
        .zip(&r_hat)
        .map(|(c, &r)| match c.utility {
            UtilityFn::Linear { weight } => weight,
            UtilityFn::Log1p { weight } => weight / (1.0 + r),
        })
        .collect();
    let mut model = flow_model(cfg, &vec![None; k]);
    let weights: Vec<Q> = slopes.iter().map(|&s| rational(s)).collect();
    let (lin_max, _) = maximize(&mut model, &weights).ok_or_else(infeasible)?;
    let offset: f64 = slopes.iter().zip(&r_hat).map(|(s, r)| s * r).sum();
    let upper_bound = utility + to_f64(&lin_max) - offset;
    Ok(OracleSolution {
        rates,
        utility,
        utility_exact: None,
        upper_bound: upper_bound.max(utility),
        method: OracleMethod::Grid,
    })
}

/// Integer value of an exact rational, if it is one.
pub fn as_integer(q: &Q) -> Option<i64> {
    q.is_integer().then(|| q.to_integer().to_i64()).flatten()
}
