use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn inputs(name: &str) -> &'static str {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("inputs").join(name);
    Box::leak(p.into_os_string().into_string().unwrap().into_boxed_str())
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_propinquity-lab")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not a report ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mk_dist_between_two_points_at_distance_one() {
    let out = lab(&["mk-dist", inputs("space2.json"), "--from", "p", "--to", "q"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "1");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["value"].as_f64(), Some(1.0));
    assert_eq!(r["result"]["mode"], "exact");
}

#[test]
fn mk_dist_between_named_matrix_states() {
    let out = lab(&["mk-dist", inputs("qubit.json"), "--from", "up", "--to", "down"]);
    assert_eq!(out.status.code(), Some(0));
    // ℓ = (1, −1, 0, 0) separates the two diagonal states by 2; the
    // off-diagonal rows give no constraint, so the sup is 2/2 = 1
    assert_eq!(report(&out)["result"]["value"].as_f64(), Some(1.0));
}

#[test]
fn unknown_state_is_an_input_error() {
    let out = lab(&["mk-dist", inputs("qubit.json"), "--from", "up", "--to", "left"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["status"], "error");
}

#[test]
fn reports_carry_version_seed_and_digests() {
    let out = lab(&["--seed", "7", "gh", inputs("space2.json"), inputs("point.json")]);
    let r = report(&out);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["seed"].as_u64(), Some(7));
    let inputs = r["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 2);
    for i in inputs {
        let digest = i["sha256"].as_str().unwrap();
        assert_eq!(digest.len(), 64);
        assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
    }
    assert_ne!(inputs[0]["sha256"], inputs[1]["sha256"]);
}

#[test]
fn gh_reproduces_half_exactly() {
    let out = lab(&["gh", inputs("space2.json"), inputs("point.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["exact"], "1/2");
    assert_eq!(r["result"]["value"].as_f64(), Some(0.5));

    let out = lab(&["gh", inputs("space2.json"), inputs("space2_far.json")]);
    assert_eq!(report(&out)["result"]["exact"], "1/2");
}

#[test]
fn gh_reads_csv_spaces() {
    // equilateral triangle of side 1 against two points at distance 1: the
    // two triangle points sharing a partner are at distance 1 but their
    // partner has distance 0, so every correspondence has distortion 1
    let out = lab(&["gh", inputs("triangle.csv"), inputs("space2.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["exact"], "1/2");
    assert_eq!(r["result"]["pair"][0], "triangle");
}

#[test]
fn gh_over_the_size_cap_exits_2() {
    let out = lab(&["gh", inputs("space13.json"), inputs("point.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    // raising the cap admits the pair
    let out = lab(&["--size-cap", "13", "gh", inputs("space13.json"), inputs("point.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["exact"], "1/2");
}

#[test]
fn malformed_json_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.json");
    std::fs::write(&file, "{\n  \"space\": {\n    \"points\": [\"p\" \"q\"]\n  }\n}\n").unwrap();
    let out = lab(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("broken.json:3:"), "{stderr}");
    let r = report(&out);
    assert_eq!(r["error"]["line"].as_u64(), Some(3));
    assert!(r["error"]["column"].as_u64().is_some());
    assert!(r.get("result").is_none());
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("extra.json");
    std::fs::write(&file, r#"{"spaces": {"points": ["p"], "dist": [[0]]}}"#).unwrap();
    assert_eq!(lab(&["validate", path(&file)]).status.code(), Some(2));
}

#[test]
fn invalid_epsilon_is_rejected_by_argument_parsing() {
    let out = lab(&["tunnel", inputs("space2.json"), inputs("space2_far.json"), "--epsilon", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_passes_metric_and_matrix_lipnorms() {
    for name in ["space2.json", "qubit.json"] {
        let out = lab(&["validate", inputs(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let r = report(&out);
        assert_eq!(r["result"]["lipnorm"]["axioms"]["passed"], true);
        assert_eq!(r["result"]["lipnorm"]["leibniz"]["passed"], true);
    }
    let r = report(&lab(&["validate", inputs("qubit.json")]));
    assert_eq!(r["result"]["states"]["plus"]["passed"], true);
}

#[test]
fn validate_fails_a_non_leibniz_lipnorm() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c3.json");
    std::fs::write(
        &file,
        r#"{"algebra": {"label": "C3", "blocks": [1, 1, 1]},
            "lipnorm": {"algebra": "C3", "functionals": [[1, -1, 0], [1, -2, 1]]}}"#,
    )
    .unwrap();
    let out = lab(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["result"]["lipnorm"]["axioms"]["passed"], true);
    assert_eq!(r["result"]["lipnorm"]["leibniz"]["passed"], false);
}

#[test]
fn invalid_state_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad_state.json");
    std::fs::write(
        &file,
        r#"{"algebra": {"label": "M2", "blocks": [2]},
            "state": {"algebra": "M2", "blocks": [[[2, 0], [0, -1]]]}}"#,
    )
    .unwrap();
    let out = lab(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["result"]["states"]["state"]["passed"], false);
}

#[test]
fn bridge_tunnel_and_its_failure() {
    let (a, b) = (inputs("space2.json"), inputs("space2_far.json"));
    let out = lab(&["tunnel", a, b, "--epsilon", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["quantities"]["extent"].as_f64(), Some(0.5));
    assert_eq!(r["result"]["link"], serde_json::json!([[0, 0], [1, 1]]));

    // matching p–u and q–v at ε = 1/8 cannot stretch 1 to 2
    let out = lab(&["tunnel", a, b, "--epsilon", "1/8", "--link", "0:0,1:1"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert!(r["result"]["violation"]["gap"].as_f64().unwrap() > 1e-7);
    assert!(r["result"]["violation"]["leg"].is_string());
}

#[test]
fn bad_link_is_an_input_error() {
    let out = lab(&["tunnel", inputs("space2.json"), inputs("qubit.json"), "--epsilon", "1", "--link", "0:0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compose_reads_tunnel_reports() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let x2 = inputs("space2.json");
    let y2 = inputs("space2_far.json");
    let tri = inputs("triangle.csv");
    let out = lab(&["--out", path(&first), "tunnel", x2, y2, "--epsilon", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let out = lab(&["--out", path(&second), "tunnel", y2, tri, "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(0));

    let out = lab(&["compose", path(&first), path(&second), "--epsilon", "1/4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    let bound = &r["result"]["extent_bound"];
    assert_eq!(bound["passed"], true);
    let e = r["result"]["quantities"]["extent"].as_f64().unwrap();
    let cap = bound["first"].as_f64().unwrap() + bound["second"].as_f64().unwrap() + 0.25;
    assert!(e <= cap + 1e-7);
    assert_eq!(r["result"]["validation"]["passed"], true);
    assert_eq!(r["result"]["tunnel"]["provenance"], "compose");

    // endpoints in the wrong order do not compose
    let out = lab(&["compose", path(&second), path(&first), "--epsilon", "1/4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn propinquity_bound_dominates_gh() {
    let out = lab(&["propinquity", inputs("space2.json"), inputs("point.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let bound = r["result"]["bound"].as_f64().unwrap();
    let gh = r["result"]["gh_lower_bound"]["value"].as_f64().unwrap();
    assert_eq!(gh, 0.5);
    assert!(bound >= gh - 1e-7);
    assert_eq!(r["result"]["pair"], serde_json::json!(["X2", "X1"]));
    assert!(r["result"]["witness"]["D"].is_object());
    assert!(r["result"]["mode"].is_string());
}

#[test]
fn propinquity_grid_flag_is_echoed() {
    let args = [
        "--epsilon-grid",
        "1,1/2",
        "--composition-depth",
        "1",
        "propinquity",
        inputs("space2.json"),
        inputs("space2_far.json"),
    ];
    let r = report(&lab(&args));
    assert_eq!(r["settings"]["epsilon_grid"], serde_json::json!([1.0, 0.5]));
    assert_eq!(r["result"]["family"]["epsilon_grid"], serde_json::json!([1.0, 0.5]));
    assert_eq!(r["result"]["bound"].as_f64(), Some(0.5));
}

#[test]
fn reports_are_byte_stable() {
    let args = ["propinquity", inputs("space2.json"), inputs("triangle.csv")];
    let one = lab(&args);
    let two = lab(&args);
    let mut serial = vec!["--workers", "1"];
    serial.extend(args);
    let three = lab(&serial);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn audit_solver_suite_passes() {
    let out = lab(&["audit", "--suite", "solver"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let criteria = r["result"]["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 1);
    assert_eq!(criteria[0]["id"].as_u64(), Some(9));
    assert_eq!(criteria[0]["passed"], true);
}

#[test]
fn audit_classical_suite_on_file_fixtures() {
    let fixtures = [inputs("point.json"), inputs("space2.json"), inputs("triangle.csv")];
    let list = fixtures.join(",");
    let out = lab(&["audit", "--suite", "classical", "--fixtures", &list]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["fixtures"], serde_json::json!(["X1", "X2", "triangle"]));
    assert_eq!(r["result"]["criteria"][0]["id"].as_u64(), Some(8));
    assert_eq!(r["inputs"].as_array().unwrap().len(), 3);
}
