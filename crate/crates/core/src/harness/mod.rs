//! Scenario execution, metrics, the optimal-utility oracle and V sweeps.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::EdgeId;
use crate::scheduler::{
    self, decide, random_feasible_decision, step_with_decision, Amount, NetworkState,
    ScheduleConfig, SchedulerError, StepOutcome,
};

pub mod lp;
mod oracle;

pub use oracle::{
    as_integer, edge_capacities, oracle_optimal, OracleMethod, OracleSolution, GRID_RESOLUTION,
    ORACLE_MAX_COMMODITIES, ORACLE_MAX_NODES,
};

/// Share of the horizon, counted from the end, that time averages cover.
pub const DEFAULT_WINDOW: f64 = 0.8;
/// Shortfall below `U* - B~/V` tolerated at a finite horizon, as a share of `U*`.
pub const GAP_SLACK: f64 = 0.02;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScheduleConfig,
    pub horizon: u64,
    pub seed: u64,
    pub window: f64,
}

impl Scenario {
    pub fn new(config: ScheduleConfig, horizon: u64, seed: u64) -> Self {
        Scenario {
            config,
            horizon,
            seed,
            window: DEFAULT_WINDOW,
        }
    }

    /// First slot of the averaging window.
    pub fn window_start(&self) -> u64 {
        let len = (self.window * self.horizon as f64).floor() as u64;
        self.horizon - len.min(self.horizon)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if !(self.window > 0.0 && self.window <= 1.0) {
            return Err(HarnessError::InvalidScenario(format!(
                "window must lie in (0, 1], got {}",
                self.window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Metrics {
    pub horizon: u64,
    pub window_start: u64,
    /// Window time-average admission rate per commodity.
    pub rates: Vec<f64>,
    pub rates_full: Vec<f64>,
    /// `sum U(r)` at the window averages.
    pub utility: f64,
    pub utility_full: f64,
    /// Window time-average of real data delivered, per commodity destination.
    pub throughput: Vec<f64>,
    pub mean_backlog: f64,
    pub mean_backlog_full: f64,
    pub max_queue: Amount,
    pub max_key: Amount,
    /// Smallest `rhs - lhs` of the drift bound over the run.
    pub min_drift_slack: f64,
    pub audited_slots: u64,
    /// Total backlog at the start of each slot.
    #[serde(skip)]
    pub backlog_series: Vec<Amount>,
    /// `keys[e][t]`: key pool of edge `e` at the start of slot `t`.
    #[serde(skip)]
    pub keys: Vec<Vec<Amount>>,
}

struct Accumulator {
    start: u64,
    admitted: Vec<f64>,
    admitted_full: Vec<f64>,
    delivered: Vec<f64>,
    backlog: f64,
    backlog_full: f64,
    m: Metrics,
}

impl Accumulator {
    fn new(s: &Scenario) -> Self {
        let cfg = &s.config;
        Accumulator {
            start: s.window_start(),
            admitted: vec![0.0; cfg.commodities.len()],
            admitted_full: vec![0.0; cfg.commodities.len()],
            delivered: vec![0.0; cfg.dest_count()],
            backlog: 0.0,
            backlog_full: 0.0,
            m: Metrics {
                horizon: s.horizon,
                window_start: s.window_start(),
                min_drift_slack: f64::INFINITY,
                keys: vec![Vec::with_capacity(s.horizon as usize); cfg.network.edge_count()],
                backlog_series: Vec::with_capacity(s.horizon as usize),
                ..Default::default()
            },
        }
    }

    fn record(&mut self, before: &NetworkState, out: &StepOutcome) {
        let t = before.t;
        let backlog = before.total_backlog();
        self.m.backlog_series.push(backlog);
        for (e, &k) in before.keys.iter().enumerate() {
            self.m.keys[e].push(k);
            self.m.max_key = self.m.max_key.max(k);
        }
        for &q in &before.queues {
            self.m.max_queue = self.m.max_queue.max(q);
        }
        self.backlog_full += backlog;
        for (a, &r) in self.admitted_full.iter_mut().zip(&out.decision.admissions) {
            *a += r;
        }
        if t >= self.start {
            self.backlog += backlog;
            for (a, &r) in self.admitted.iter_mut().zip(&out.decision.admissions) {
                *a += r;
            }
            for (d, &x) in self.delivered.iter_mut().zip(&out.delivered) {
                *d += x;
            }
        }
        let d = &out.audit.drift;
        self.m.min_drift_slack = self.m.min_drift_slack.min(d.rhs - d.lhs);
        self.m.audited_slots += 1;
    }

    fn finish(mut self, cfg: &ScheduleConfig) -> Metrics {
        let win = (self.m.horizon - self.start) as f64;
        let full = self.m.horizon as f64;
        let avg = |x: f64, n: f64| if n > 0.0 { x / n } else { 0.0 };
        self.m.rates = self.admitted.iter().map(|&a| avg(a, win)).collect();
        self.m.rates_full = self.admitted_full.iter().map(|&a| avg(a, full)).collect();
        self.m.throughput = self.delivered.iter().map(|&a| avg(a, win)).collect();
        self.m.mean_backlog = avg(self.backlog, win);
        self.m.mean_backlog_full = avg(self.backlog_full, full);
        let utility = |rates: &[f64]| -> f64 {
            cfg.commodities
                .iter()
                .zip(rates)
                .map(|(c, &r)| c.utility.value(r))
                .sum()
        };
        self.m.utility = utility(&self.m.rates);
        self.m.utility_full = utility(&self.m.rates_full);
        if self.m.audited_slots == 0 {
            self.m.min_drift_slack = 0.0;
        }
        self.m
    }
}

/// Runs the controller for the scenario's horizon; every slot is audited.
pub fn run(s: &Scenario) -> Result<Metrics, HarnessError> {
    run_observed(s, |_, _| Ok(()))
}

/// As [`run`], calling `observe(state_before, outcome)` after every slot.
pub fn run_observed<F>(s: &Scenario, mut observe: F) -> Result<Metrics, HarnessError>
where
    F: FnMut(&NetworkState, &StepOutcome) -> Result<(), HarnessError>,
{
    s.validate()?;
    let cfg = &s.config;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut state = NetworkState::initial(cfg);
    let mut acc = Accumulator::new(s);
    for _ in 0..s.horizon {
        let out = scheduler::step(&state, cfg, &mut rng)?;
        acc.record(&state, &out);
        observe(&state, &out)?;
        state = out.state;
    }
    Ok(acc.finish(cfg))
}

/// Replaces the controller's decision by a random feasible one with
/// probability `p` each slot. Only the drift bound is audited, since the
/// queue and key bounds rely on the controller's own choices.
pub fn run_injected(s: &Scenario, p: f64) -> Result<Metrics, HarnessError> {
    s.validate()?;
    let cfg = &s.config;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut state = NetworkState::initial(cfg);
    let mut acc = Accumulator::new(s);
    for _ in 0..s.horizon {
        let decision = if rng.gen_bool(p) {
            random_feasible_decision(&state, cfg, &mut rng)
        } else {
            decide(&state, cfg, &mut rng)
        };
        let out = step_with_decision(&state, cfg, decision)?;
        acc.record(&state, &out);
        state = out.state;
    }
    Ok(acc.finish(cfg))
}

pub const CSV_HEADER: [&str; 10] = [
    "slot",
    "entity",
    "Q",
    "E",
    "S",
    "P",
    "R",
    "served_b",
    "served_rate",
    "actual",
];

/// Writes one row per slot per entity. Entities are `edge:<id>` (E, S, P
/// and the served transfer), `queue:<node>/<dest>` (Q) and
/// `commodity:<source>-><dest>` (R). State columns hold start-of-slot values.
pub struct CsvLog<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvLog<W> {
    pub fn new(inner: W) -> Result<Self, HarnessError> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(CSV_HEADER)?;
        Ok(CsvLog { writer })
    }

    pub fn record(
        &mut self,
        cfg: &ScheduleConfig,
        before: &NetworkState,
        out: &StepOutcome,
    ) -> Result<(), HarnessError> {
        let g = &cfg.network;
        let slot = before.t.to_string();
        let d = &out.decision;
        for e in 0..g.edge_count() {
            let (b, rate, actual) = match &d.service[e] {
                Some(s) => (
                    g.label(cfg.dests[s.dest]).to_string(),
                    num(s.rate),
                    num(s.actual),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            self.writer.write_record([
                slot.as_str(),
                &format!("edge:{}", g.edge(EdgeId(e)).label),
                "",
                &num(before.keys[e]),
                if d.key_gen[e] { "1" } else { "0" },
                &num(d.consumption[e]),
                "",
                &b,
                &rate,
                &actual,
            ])?;
        }
        for n in g.nodes() {
            for (di, &dest) in cfg.dests.iter().enumerate() {
                self.writer.write_record([
                    slot.as_str(),
                    &format!("queue:{}/{}", g.label(n), g.label(dest)),
                    &num(before.queue(cfg, n, di)),
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                ])?;
            }
        }
        for (c, &r) in cfg.commodities.iter().zip(&d.admissions) {
            self.writer.write_record([
                slot.as_str(),
                &format!("commodity:{}->{}", g.label(c.source), g.label(c.dest)),
                "",
                "",
                "",
                "",
                &num(r),
                "",
                "",
                "",
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, HarnessError> {
        self.writer.flush()?;
        self.writer
            .into_inner()
            .map_err(|e| HarnessError::Io(std::io::Error::other(e.to_string())))
    }
}

fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// One row of a V sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub v: f64,
    pub utility: f64,
    pub oracle_utility: f64,
    /// `B~ / V`.
    pub bound: f64,
    pub gap: f64,
    pub mean_backlog: f64,
    pub backlog_bound: f64,
    /// `utility >= U* - B~/V - slack * U*`.
    pub gap_bound: bool,
}

/// Runs the scenario once per `V` (same seed and horizon), in parallel, and
/// tabulates the utility gap against the oracle.
pub fn v_sweep(s: &Scenario, v_list: &[f64]) -> Result<Vec<SweepRow>, HarnessError> {
    let oracle = oracle_optimal(&s.config)?;
    let u_star = oracle.utility;
    v_list
        .par_iter()
        .map(|&v| {
            let config = s.config.with_v(v)?;
            let bound = config.params.utility_gap_bound();
            let backlog_bound = config.params.backlog_bound();
            let m = run(&Scenario {
                config,
                ..s.clone()
            })?;
            Ok(SweepRow {
                v,
                utility: m.utility,
                oracle_utility: u_star,
                bound,
                gap: u_star - m.utility,
                mean_backlog: m.mean_backlog,
                backlog_bound,
                gap_bound: m.utility >= u_star - bound - GAP_SLACK * u_star,
            })
        })
        .collect()
}
