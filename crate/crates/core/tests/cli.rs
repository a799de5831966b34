use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn qkdnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const CHAIN: &str = r#"
[graph]
nodes = ["a", "b", "c"]
alice = "a"
bob = "b"
edges = [{ id = "e1", u = "a", v = "c" }, { id = "e2", u = "c", v = "b" }]
[security]
"#;

const K4_INTERIOR: &str = r#"
[graph]
nodes = ["a", "b", "c1", "c2"]
alice = "a"
bob = "b"
edges = [
  { id = "e1", u = "a", v = "c1" },
  { id = "e2", u = "a", v = "c2" },
  { id = "e3", u = "c1", v = "c2" },
  { id = "e4", u = "c1", v = "b" },
  { id = "e5", u = "c2", v = "b" },
]
[security]
"#;

#[test]
fn assess_reports_verdicts_and_paths() {
    let o = qkdnet(&["assess", config("seven_node_assess.toml").to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("attack {}: sec=1, secure path: (a,c1,c2,b)"));
    assert!(out.contains("attack {c2,c3}: sec=0, secure path: (a,c1,c4,c5,b)"));
    assert!(out.contains("attack {c1,c3}: sec=0, strongest attack: communication impossible"));
    assert!(out.contains("scheme: 2 paths, threshold 2"));
}

#[test]
fn attack_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write_config(&dir, "chain.toml", CHAIN);
    let out = stdout(&qkdnet(&["attack", &chain]));
    assert!(
        out.contains("minimum strongest attack: size 1, witness {c}"),
        "{out}"
    );

    let k4 = write_config(&dir, "k4.toml", K4_INTERIOR);
    let out = stdout(&qkdnet(&["attack", &k4]));
    assert!(out.contains("size 2, witness {c1,c2}"), "{out}");

    let out = stdout(&qkdnet(&[
        "attack",
        config("seven_node_assess.toml").to_str().unwrap(),
        "--all",
    ]));
    assert!(out.contains("size 2, witness {c1,c3}"), "{out}");
    assert!(out.contains("{c2,c5}"));
}

#[test]
fn exchange_writes_a_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("t.json");
    let o = qkdnet(&[
        "exchange",
        config("seven_node_m0.toml").to_str().unwrap(),
        "--oracle",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("announcements: 5, agreed: true"), "{out}");
    assert!(out.contains("oracle {c2,c3}: perfectly_secret"), "{out}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["agreed"], true);
    assert_eq!(doc["key_bits"], 32);
    assert_eq!(doc["alice_key"], doc["bob_key"]);
    assert!(doc["announcements"]
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a["from"] == "c1"));
}

#[test]
fn strongest_attack_breaks_m0() {
    let o = qkdnet(&[
        "exchange",
        config("seven_node_m0.toml").to_str().unwrap(),
        "--oracle",
        "--attack",
        "c1,c3",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("oracle {c1,c3}: broken"));
}

#[test]
fn zero_key_transcript_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text = CHAIN.replace(
        "edges = [{ id = \"e1\", u = \"a\", v = \"c\" }, { id = \"e2\", u = \"c\", v = \"b\" }]",
        "edges = [{ id = \"e1\", u = \"a\", v = \"c\", key = \"0000\" }, { id = \"e2\", u = \"c\", v = \"b\", key = \"0000\" }]",
    )
    .replace("[security]", "[security]\nkind = \"m0\"\nkey_bits = 16");
    let path = write_config(&dir, "zero.toml", &text);
    let o = qkdnet(&["exchange", &path]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let json_end = out.rfind('}').unwrap();
    let doc: serde_json::Value = serde_json::from_str(&out[..=json_end]).unwrap();
    assert_eq!(doc["alice_key"], "0000");
    assert!(doc["announcements"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a["hex"] == "0000"));
}

#[test]
fn simulate_two_node_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.json");
    let o = qkdnet(&[
        "simulate",
        config("two_node.toml").to_str().unwrap(),
        "-T",
        "20000",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("utility=5 "), "{out}");
    assert!(out.contains("U*=5"));
    assert!(out.contains("bounds: PASS") && out.contains("drift: PASS"));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(doc["T"], 20000);
    assert_eq!(doc["metrics"]["audited_slots"], 20000);
    assert_eq!(doc["audits"]["drift"], "PASS");
}

#[test]
fn empty_horizon_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let o = qkdnet(&[
        "simulate",
        config("two_node.toml").to_str().unwrap(),
        "-T",
        "0",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        "slot,entity,Q,E,S,P,R,served_b,served_rate,actual\n"
    );
}

#[test]
fn csv_rows_per_slot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let o = qkdnet(&[
        "simulate",
        config("two_node.toml").to_str().unwrap(),
        "-T",
        "4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let slots: std::collections::BTreeSet<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(slots.len(), 4);
    assert!(rows.iter().any(|r| &r[1] == "edge:e1"));
    assert!(rows.iter().any(|r| r[1].starts_with("commodity:")));
}

#[test]
fn sweep_passes_the_gap_check() {
    let o = qkdnet(&[
        "sweep",
        config("diamond_sweep.toml").to_str().unwrap(),
        "-T",
        "20000",
        "--v-list",
        "100,500",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("gap_bound: PASS"), "{out}");
}

#[test]
fn oracle_solves_small_and_refuses_large() {
    let o = qkdnet(&["oracle", config("two_node.toml").to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("U*=5") && out.contains("r*[a->b]=5"), "{out}");

    let out = stdout(&qkdnet(&[
        "oracle",
        config("seven_node_schedule.toml").to_str().unwrap(),
    ]));
    assert!(out.contains("U*=6"), "{out}");

    let dir = tempfile::tempdir().unwrap();
    let nodes: Vec<String> = ["a", "b"]
        .into_iter()
        .map(String::from)
        .chain((1..=6).map(|i| format!("c{i}")))
        .collect();
    let edges: Vec<String> = nodes[2..]
        .iter()
        .chain(std::iter::once(&nodes[1]))
        .scan("a".to_string(), |prev, n| {
            let e = format!("{{ id = \"{prev}{n}\", u = \"{prev}\", v = \"{n}\" }}");
            *prev = n.clone();
            Some(e)
        })
        .collect();
    let text = format!(
        "[graph]\nnodes = {nodes:?}\nalice = \"a\"\nbob = \"b\"\nedges = [{}]\n\
         [schedule]\nV = 10\nR_max = 1\nT = 10\ndefault_params = {{ K = 1, P_max = 1 }}\n\
         commodities = [{{ source = \"a\", dest = \"b\", utility = {{ kind = \"linear\", weight = 1.0 }} }}]\n",
        edges.join(", ")
    );
    let big = write_config(&dir, "big.toml", &text);
    let o = qkdnet(&["oracle", &big]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle refused"));
}

#[test]
fn bad_input_exits_with_an_error() {
    let o = qkdnet(&["assess", "/nonexistent.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(
        &dir,
        "bad.toml",
        &CHAIN.replace("v = \"c\" }", "v = \"zz\" }"),
    );
    let o = qkdnet(&["assess", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zz"));
}

#[test]
fn fixture_sweep_reaches_the_two_route_optimum() {
    let o = qkdnet(&[
        "sweep",
        config("seven_node_sweep.toml").to_str().unwrap(),
        "-T",
        "20000",
        "--v-list",
        "100",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("gap_bound: PASS"), "{out}");
    let row = out.lines().find(|l| l.starts_with("100,")).unwrap();
    let utility: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((utility - 4.0).abs() < 1e-3, "{row}");
}
