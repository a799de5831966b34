//! C ABI for `qkdnet`.
//!
//! Networks and scenarios are opaque heap handles created from TOML text
//! and released with their `_free` function. Every call returns a
//! [`QkdStatus`]; on failure [`qkd_last_error`] describes the cause for the
//! calling thread. Strings returned through out-parameters are owned by the
//! caller and must be released with [`qkd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qkdnet::config::Config;
use qkdnet::graph::{GraphError, Network};
use qkdnet::harness::{self, oracle_optimal, HarnessError, Scenario};
use qkdnet::scheduler::SchedulerError;
use qkdnet::security::{
    find_secure_path, is_strongest, m0_exchange, min_strongest_attack, AttackSet, KeyAssignment,
    SecurityError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    /// The query has no answer on this network (direct link, no path).
    NoSolution = 4,
    InvalidArgument = 5,
    /// A scheduler audit failed during a run.
    AuditFailed = 6,
    OracleRefused = 7,
    Internal = 8,
}

/// Opaque network handle.
pub struct QkdNetwork {
    net: Network,
}

/// Opaque scheduling scenario handle.
pub struct QkdScenario {
    scenario: Scenario,
}

/// Time-averaged results of a scenario run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QkdMetrics {
    pub slots: u64,
    pub utility: f64,
    pub mean_backlog: f64,
    /// Delivered data per slot, summed over destinations.
    pub throughput: f64,
    pub max_queue: f64,
    pub max_key: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: QkdStatus, msg: impl std::fmt::Display) -> QkdStatus {
    set_error(msg.to_string());
    status
}

/// Runs `f`, converting a panic into `Internal`.
fn guard(f: impl FnOnce() -> QkdStatus) -> QkdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == QkdStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(QkdStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, QkdStatus> {
    if p.is_null() {
        return Err(fail(QkdStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(QkdStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn out_string(s: String, out: *mut *mut c_char) -> QkdStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            QkdStatus::Ok
        }
        Err(_) => fail(QkdStatus::Internal, "string contains NUL"),
    }
}

fn security_status(e: SecurityError) -> QkdStatus {
    match e {
        SecurityError::Graph(GraphError::DirectLink(..)) => fail(QkdStatus::NoSolution, e),
        _ => fail(QkdStatus::InvalidArgument, e),
    }
}

fn harness_status(e: HarnessError) -> QkdStatus {
    match e {
        HarnessError::Scheduler(SchedulerError::InvariantViolation { .. }) => {
            fail(QkdStatus::AuditFailed, e)
        }
        HarnessError::OracleRefused(_) => fail(QkdStatus::OracleRefused, e),
        _ => fail(QkdStatus::InvalidArgument, e),
    }
}

fn parse_attack(net: &Network, csv: &str) -> Result<AttackSet, QkdStatus> {
    let labels: Vec<&str> = csv
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    AttackSet::from_labels(net, &labels).map_err(|e| fail(QkdStatus::InvalidArgument, e))
}

/// Builds a network from a configuration document.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qkd_network_from_toml(
    toml: *const c_char,
    out: *mut *mut QkdNetwork,
) -> QkdStatus {
    guard(|| {
        if out.is_null() {
            return fail(QkdStatus::NullPointer, "null out-pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Config::parse(text).and_then(|c| c.network()) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(QkdNetwork { net }));
                QkdStatus::Ok
            }
            Err(e) => fail(QkdStatus::InvalidConfig, e),
        }
    })
}

/// # Safety
/// `net` must be null or a handle from [`qkd_network_from_toml`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qkd_network_free(net: *mut QkdNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle; `nodes` and `edges` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn qkd_network_size(
    net: *const QkdNetwork,
    nodes: *mut usize,
    edges: *mut usize,
) -> QkdStatus {
    guard(|| {
        let Some(n) = net.as_ref() else {
            return fail(QkdStatus::NullPointer, "null network");
        };
        if !nodes.is_null() {
            *nodes = n.net.node_count();
        }
        if !edges.is_null() {
            *edges = n.net.edge_count();
        }
        QkdStatus::Ok
    })
}

/// Lexicographically least minimum vertex cut, as `{c1,c3}`, and its size.
///
/// # Safety
/// `net` must be a live handle; `size` and `labels` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qkd_min_attack(
    net: *const QkdNetwork,
    size: *mut usize,
    labels: *mut *mut c_char,
) -> QkdStatus {
    guard(|| {
        let Some(n) = net.as_ref() else {
            return fail(QkdStatus::NullPointer, "null network");
        };
        if size.is_null() || labels.is_null() {
            return fail(QkdStatus::NullPointer, "null out-pointer");
        }
        *labels = ptr::null_mut();
        match min_strongest_attack(&n.net) {
            Ok(a) => {
                *size = a.len();
                out_string(a.display(&n.net).to_string(), labels)
            }
            Err(e) => security_status(e),
        }
    })
}

/// Whether compromising the comma-separated nodes cuts Alice off from Bob.
///
/// # Safety
/// `net` must be a live handle, `attack` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qkd_is_strongest(
    net: *const QkdNetwork,
    attack: *const c_char,
    out: *mut bool,
) -> QkdStatus {
    guard(|| {
        let Some(n) = net.as_ref() else {
            return fail(QkdStatus::NullPointer, "null network");
        };
        if out.is_null() {
            return fail(QkdStatus::NullPointer, "null out-pointer");
        }
        let a = match read_str(attack).and_then(|s| parse_attack(&n.net, s)) {
            Ok(a) => a,
            Err(s) => return s,
        };
        match is_strongest(&n.net, &a) {
            Ok(b) => {
                *out = b;
                QkdStatus::Ok
            }
            Err(e) => security_status(e),
        }
    })
}

/// Lexicographically least Alice-Bob path avoiding the attack, as
/// `(a,c1,b)`. Returns `NoSolution` when the attack is a cut.
///
/// # Safety
/// As [`qkd_is_strongest`]; `path` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qkd_find_secure_path(
    net: *const QkdNetwork,
    attack: *const c_char,
    path: *mut *mut c_char,
) -> QkdStatus {
    guard(|| {
        let Some(n) = net.as_ref() else {
            return fail(QkdStatus::NullPointer, "null network");
        };
        if path.is_null() {
            return fail(QkdStatus::NullPointer, "null out-pointer");
        }
        *path = ptr::null_mut();
        let a = match read_str(attack).and_then(|s| parse_attack(&n.net, s)) {
            Ok(a) => a,
            Err(s) => return s,
        };
        match find_secure_path(&n.net, &a) {
            Ok(Some(p)) => out_string(p.display(&n.net).to_string(), path),
            Ok(None) => fail(QkdStatus::NoSolution, "every path meets the attack"),
            Err(e) => security_status(e),
        }
    })
}

/// Runs M0 with uniform `key_bits`-bit keys drawn from `seed` and reports
/// whether Alice and Bob agree.
///
/// # Safety
/// `net` must be a live handle and `agreed` writable.
#[no_mangle]
pub unsafe extern "C" fn qkd_m0_agree(
    net: *const QkdNetwork,
    key_bits: usize,
    seed: u64,
    agreed: *mut bool,
) -> QkdStatus {
    guard(|| {
        let Some(n) = net.as_ref() else {
            return fail(QkdStatus::NullPointer, "null network");
        };
        if agreed.is_null() {
            return fail(QkdStatus::NullPointer, "null out-pointer");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keys = KeyAssignment::random(&n.net, key_bits, &mut rng);
        match m0_exchange(&n.net, &keys) {
            Ok(t) => {
                *agreed = t.agreed();
                QkdStatus::Ok
            }
            Err(e) => security_status(e),
        }
    })
}

/// Builds a scheduling scenario from a document with a `[schedule]`
/// section, at its first `V`.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qkd_scenario_from_toml(
    toml: *const c_char,
    out: *mut *mut QkdScenario,
) -> QkdStatus {
    guard(|| {
        if out.is_null() {
            return fail(QkdStatus::NullPointer, "null out-pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let built = Config::parse(text).and_then(|c| {
            let v = c.v_values()?[0];
            c.scenario(v)
        });
        match built {
            Ok(scenario) => {
                *out = Box::into_raw(Box::new(QkdScenario { scenario }));
                QkdStatus::Ok
            }
            Err(e) => fail(QkdStatus::InvalidConfig, e),
        }
    })
}

/// # Safety
/// `sc` must be null or a handle from [`qkd_scenario_from_toml`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qkd_scenario_free(sc: *mut QkdScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Runs the scenario with every audit enabled.
///
/// # Safety
/// `sc` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qkd_scenario_run(
    sc: *const QkdScenario,
    out: *mut QkdMetrics,
) -> QkdStatus {
    guard(|| {
        let Some(s) = sc.as_ref() else {
            return fail(QkdStatus::NullPointer, "null scenario");
        };
        if out.is_null() {
            return fail(QkdStatus::NullPointer, "null out-pointer");
        }
        match harness::run(&s.scenario) {
            Ok(m) => {
                *out = QkdMetrics {
                    slots: m.horizon,
                    utility: m.utility,
                    mean_backlog: m.mean_backlog,
                    throughput: m.throughput.iter().sum(),
                    max_queue: m.max_queue,
                    max_key: m.max_key,
                };
                QkdStatus::Ok
            }
            Err(e) => harness_status(e),
        }
    })
}

/// Optimal long-run utility of the scenario's static benchmark.
///
/// # Safety
/// `sc` must be a live handle and `utility` writable.
#[no_mangle]
pub unsafe extern "C" fn qkd_scenario_oracle(
    sc: *const QkdScenario,
    utility: *mut f64,
) -> QkdStatus {
    guard(|| {
        let Some(s) = sc.as_ref() else {
            return fail(QkdStatus::NullPointer, "null scenario");
        };
        if utility.is_null() {
            return fail(QkdStatus::NullPointer, "null out-pointer");
        }
        match oracle_optimal(&s.scenario.config) {
            Ok(sol) => {
                *utility = sol.utility;
                QkdStatus::Ok
            }
            Err(e) => harness_status(e),
        }
    })
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qkd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qkd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
