//! Subcommand implementations behind the `qkdnet` binary.
//!
//! Each command reads one [`Config`], writes a human-readable report to the
//! given writer and any files the document (or an override) names, and
//! returns whether every audit passed.

use std::fs::File;
use std::io::{BufWriter, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::config::{AttackSpec, Config, ConfigError};
use crate::graph::GraphError;
use crate::harness::{
    self, as_integer, lp::to_f64, oracle_optimal, CsvLog, HarnessError, Metrics, OracleMethod,
    OracleSolution, Scenario, GAP_SLACK,
};
use crate::scheduler::{AuditKind, SchedulerError};
use crate::security::{
    all_min_strongest_attacks, find_secure_path, is_strongest, m0_exchange, min_strongest_attack,
    multipath_exchange, scheme_threshold, sec, security_oracle, SchemeKind, SchemeKindTag,
    SecurityError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Security(#[from] SecurityError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult = Result<bool, CliError>;

/// Command-line values that replace fields of the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub horizon: Option<u64>,
    pub v: Option<f64>,
    pub v_list: Option<Vec<f64>>,
    pub csv: Option<String>,
    pub summary: Option<String>,
    pub transcript: Option<String>,
    pub key_bits: Option<usize>,
    pub kind: Option<SchemeKindTag>,
    pub attack: Option<Vec<String>>,
    pub oracle: bool,
    pub all_minimal: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) {
        if let Some(s) = cfg.security.as_mut() {
            if let Some(seed) = self.seed {
                s.seed = seed;
            }
            if let Some(k) = self.key_bits {
                s.key_bits = k;
            }
            if let Some(kind) = self.kind {
                s.kind = kind;
            }
            if let Some(a) = &self.attack {
                s.attack = AttackSpec::Nodes(a.clone());
            }
            if let Some(t) = &self.transcript {
                s.transcript = Some(t.clone());
            }
            s.oracle |= self.oracle;
            s.all_minimal |= self.all_minimal;
        }
        if let Some(s) = cfg.schedule.as_mut() {
            if let Some(seed) = self.seed {
                s.seed = seed;
            }
            if let Some(t) = self.horizon {
                s.horizon = t;
            }
            if let Some(v) = self.v {
                s.v = Some(v);
                s.v_list = None;
            }
            if let Some(list) = &self.v_list {
                s.v_list = Some(list.clone());
            }
            if let Some(c) = &self.csv {
                s.csv = Some(c.clone());
            }
            if let Some(p) = &self.summary {
                s.summary = Some(p.clone());
            }
        }
    }
}

fn create(path: &str) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::File {
            path: path.to_string(),
            source,
        })
}

fn write_json(path: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Per-attack security verdicts, the least secure path, and the scheme's
/// breaking threshold.
pub fn cmd_assess(cfg: &Config, out: &mut dyn Write) -> CliResult {
    let g = cfg.network()?;
    let scheme = cfg.scheme(&g)?;
    for attack in cfg.attacks(&g)? {
        let verdict = u8::from(sec(&attack, &scheme));
        let tail = if is_strongest(&g, &attack)? {
            "strongest attack: communication impossible".to_string()
        } else {
            match find_secure_path(&g, &attack)? {
                Some(p) => format!("secure path: {}", p.display(&g)),
                None => "no secure path".to_string(),
            }
        };
        writeln!(out, "attack {}: sec={verdict}, {tail}", attack.display(&g))?;
    }
    writeln!(
        out,
        "scheme: {} paths, threshold {}",
        scheme.len(),
        scheme_threshold(&scheme)
    )?;
    Ok(true)
}

/// The fewest nodes Eve must compromise to cut Alice off from Bob.
pub fn cmd_attack(cfg: &Config, out: &mut dyn Write) -> CliResult {
    let g = cfg.network()?;
    let sec_cfg = cfg.security()?;
    match min_strongest_attack(&g) {
        Err(SecurityError::Graph(GraphError::DirectLink(..))) => {
            writeln!(
                out,
                "no strongest attack: alice and bob share a direct link"
            )?;
            return Ok(true);
        }
        Err(e) => return Err(e.into()),
        Ok(a) => writeln!(
            out,
            "minimum strongest attack: size {}, witness {}",
            a.len(),
            a.display(&g)
        )?,
    }
    if sec_cfg.all_minimal {
        let all = all_min_strongest_attacks(&g)?;
        writeln!(out, "all minimum strongest attacks: {}", all.len())?;
        for a in all {
            writeln!(out, "  {}", a.display(&g))?;
        }
    }
    Ok(true)
}

/// Simulates one key exchange and writes its transcript; optionally runs
/// the exhaustive secrecy oracle against the configured attacks.
pub fn cmd_exchange(cfg: &Config, out: &mut dyn Write) -> CliResult {
    let g = cfg.network()?;
    let s = cfg.security()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let keys = cfg.keys(&g, &mut rng)?;
    let (transcript, kind) = match s.kind {
        SchemeKindTag::M0 => (m0_exchange(&g, &keys)?, SchemeKind::M0),
        SchemeKindTag::Multipath => {
            let scheme = cfg.scheme(&g)?;
            let message = cfg.message(&mut rng)?;
            let t = multipath_exchange(&g, &scheme, &message, &keys, &mut rng)?;
            (t, SchemeKind::Multipath(scheme))
        }
    };
    let doc = transcript.to_doc(&g);
    let text = serde_json::to_string_pretty(&doc)?;
    match &s.transcript {
        Some(path) => {
            let mut f = create(path)?;
            writeln!(f, "{text}")?;
            f.flush()?;
            writeln!(out, "transcript: {path}")?;
        }
        None => writeln!(out, "{text}")?,
    }
    writeln!(
        out,
        "announcements: {}, agreed: {}",
        doc.announcements.len(),
        doc.agreed
    )?;
    if s.oracle {
        for attack in cfg.attacks(&g)? {
            let v = security_oracle(&g, &kind, &attack)?;
            writeln!(out, "oracle {}: {}", attack.display(&g), v.as_str())?;
        }
    }
    Ok(doc.agreed)
}

fn fmt_amount(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.6}")
    }
}

fn oracle_json(sol: &OracleSolution) -> serde_json::Value {
    json!({
        "U*": sol.utility,
        "rates": sol.rates_f64(),
        "exact": sol.utility_exact.as_ref().map(|q| q.to_string()),
        "upper_bound": sol.upper_bound,
        "method": match sol.method { OracleMethod::Exact => "lp", OracleMethod::Grid => "grid" },
    })
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn constants_json(sc: &Scenario) -> serde_json::Value {
    let p = &sc.config.params;
    json!({
        "V": p.v,
        "R_max": p.r_max,
        "mu_max": p.mu_max,
        "d_max": p.d_max,
        "gamma": p.gamma,
        "beta": p.beta,
        "theta": p.theta,
        "B": p.b,
        "B_tilde": p.b_tilde,
        "queue_bound": p.queue_bound(),
        "backlog_bound": p.backlog_bound(),
        "exact": p.exact,
    })
}

/// Runs one scenario, writing the slot CSV when asked. Audit failures are
/// reported rather than propagated.
fn simulate_one(
    sc: &Scenario,
    csv: Option<&str>,
) -> Result<(Option<Metrics>, Option<SchedulerError>), CliError> {
    let result = match csv {
        Some(path) => {
            let mut log = CsvLog::new(create(path)?)?;
            let r = harness::run_observed(sc, |before, o| log.record(&sc.config, before, o));
            log.finish()?.flush()?;
            r
        }
        None => harness::run(sc),
    };
    match result {
        Ok(m) => Ok((Some(m), None)),
        Err(HarnessError::Scheduler(e @ SchedulerError::InvariantViolation { .. })) => {
            Ok((None, Some(e)))
        }
        Err(e) => Err(e.into()),
    }
}

fn audit_lines(
    failure: Option<&SchedulerError>,
    out: &mut dyn Write,
) -> Result<serde_json::Value, CliError> {
    let failed = match failure {
        Some(SchedulerError::InvariantViolation { audit, .. }) => Some(*audit),
        _ => None,
    };
    let mut audits = serde_json::Map::new();
    for kind in AuditKind::ALL {
        let ok = failed != Some(kind);
        writeln!(out, "{kind}: {}", pass(ok))?;
        audits.insert(kind.as_str().into(), json!(pass(ok)));
    }
    if let Some(e) = failure {
        writeln!(out, "audit failure: {e}")?;
        audits.insert("failure".into(), json!(e.to_string()));
    }
    Ok(serde_json::Value::Object(audits))
}

/// Runs the controller at the first configured `V`.
pub fn cmd_simulate(cfg: &Config, out: &mut dyn Write) -> CliResult {
    let s = cfg.schedule()?;
    let v = cfg.v_values()?[0];
    let sc = cfg.scenario(v)?;
    let (metrics, failure) = simulate_one(&sc, s.csv.as_deref())?;
    let mut summary = json!({
        "command": "simulate",
        "T": sc.horizon,
        "seed": sc.seed,
        "window": sc.window,
        "constants": constants_json(&sc),
    });
    if let Some(m) = &metrics {
        writeln!(
            out,
            "slots={} utility={} mean_backlog={}",
            m.horizon,
            fmt_amount(m.utility),
            fmt_amount(m.mean_backlog)
        )?;
        for (d, &x) in sc.config.dests.iter().zip(&m.throughput) {
            writeln!(
                out,
                "throughput[{}]={}",
                sc.config.network.label(*d),
                fmt_amount(x)
            )?;
        }
        summary["metrics"] = serde_json::to_value(m)?;
    }
    summary["audits"] = audit_lines(failure.as_ref(), out)?;
    // The oracle only applies to small systems; larger ones simply omit it.
    if let (Some(m), Ok(sol)) = (&metrics, oracle_optimal(&sc.config)) {
        let bound = sc.config.params.utility_gap_bound();
        let ok = m.utility >= sol.utility - bound - GAP_SLACK * sol.utility;
        writeln!(out, "U*={}", fmt_amount(sol.utility))?;
        writeln!(out, "gap_bound: {} (B~/V={})", pass(ok), fmt_amount(bound))?;
        summary["oracle"] = oracle_json(&sol);
        summary["gap_bound"] = json!(pass(ok));
    }
    if let Some(path) = &s.summary {
        write_json(path, &summary)?;
    }
    Ok(failure.is_none())
}

/// Runs every `V` and tabulates the utility gap and backlog against the
/// oracle.
pub fn cmd_sweep(cfg: &Config, out: &mut dyn Write) -> CliResult {
    let s = cfg.schedule()?;
    let vs = cfg.v_values()?;
    let sc = cfg.scenario(vs[0])?;
    let rows = match harness::v_sweep(&sc, &vs) {
        Ok(rows) => rows,
        Err(HarnessError::Scheduler(e @ SchedulerError::InvariantViolation { .. })) => {
            audit_lines(Some(&e), out)?;
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    writeln!(
        out,
        "V,utility,U*,B~/V,gap,mean_backlog,backlog_bound,gap_bound"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_amount(r.v),
            fmt_amount(r.utility),
            fmt_amount(r.oracle_utility),
            fmt_amount(r.bound),
            fmt_amount(r.gap),
            fmt_amount(r.mean_backlog),
            fmt_amount(r.backlog_bound),
            pass(r.gap_bound)
        )?;
    }
    let all = rows.iter().all(|r| r.gap_bound);
    let audits = audit_lines(None, out)?;
    writeln!(out, "gap_bound: {}", pass(all))?;
    if let Some(path) = &s.summary {
        write_json(
            path,
            &json!({
                "command": "sweep",
                "T": sc.horizon,
                "seed": sc.seed,
                "rows": rows,
                "audits": audits,
                "gap_bound": pass(all),
            }),
        )?;
    }
    Ok(true)
}

/// Solves the static benchmark program.
pub fn cmd_oracle(cfg: &Config, out: &mut dyn Write) -> CliResult {
    let s = cfg.schedule()?;
    let sc = cfg.scenario(cfg.v_values()?[0])?;
    let sol = oracle_optimal(&sc.config)?;
    let g = &sc.config.network;
    match sol.utility_exact.as_ref() {
        Some(q) => match as_integer(q) {
            Some(n) => writeln!(out, "U*={n}")?,
            None => writeln!(out, "U*={} ({q})", fmt_amount(to_f64(q)))?,
        },
        None => writeln!(
            out,
            "U*={} (grid; upper bound {})",
            fmt_amount(sol.utility),
            fmt_amount(sol.upper_bound)
        )?,
    }
    for (c, r) in sc.config.commodities.iter().zip(&sol.rates) {
        let shown = match as_integer(r) {
            Some(n) => n.to_string(),
            None => fmt_amount(to_f64(r)),
        };
        writeln!(
            out,
            "r*[{}->{}]={shown}",
            g.label(c.source),
            g.label(c.dest)
        )?;
    }
    if let Some(path) = &s.summary {
        write_json(
            path,
            &json!({ "command": "oracle", "oracle": oracle_json(&sol) }),
        )?;
    }
    Ok(true)
}
