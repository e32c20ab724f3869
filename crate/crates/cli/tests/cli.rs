//! End-to-end checks of the binary: output formats, determinism and the
//! exit-code contract (0 ok, 2 validation, 3 singular center, 4 oracle
//! ill-posed, 5 no feasible disc; compare exits 1 on failing gaps).

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plurienv"))
}

fn tmp_file(name: &str, content: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn smoke_scenario(name: &str, extra: &str) -> PathBuf {
    let json = format!(
        r#"{{
            "schema": "plurienv/1",
            "name": "{name}",
            "seed": 11,
            "domain": {{"kind": "ball", "center": [[0.0, 0.0]], "radius": 1.0}},
            "omega": {{"psi1": {{"op": "const", "value": 0.0}}, "psi2": {{"op": "const", "value": 0.0}}}},
            "weight": {{
                "phi1": {{"op": "sub", "left": {{"op": "const", "value": 1.0}}, "right": {{"op": "abs2"}}}},
                "phi2": {{"op": "const", "value": 0.0}}
            }},
            "points": [[[0.5, 0.0]]],
            "optimizer": {{
                "families": [{{"kind": "moebius", "degree": 1}}],
                "restarts": 2,
                "max_evals": 250,
                "definition_radius": 1.005,
                "boundary_nodes": 64
            }},
            "oracle": {{"resolution": 48, "tol": 1e-5, "max_iter": 600}}
            {extra}
        }}"#
    );
    tmp_file(&format!("{name}.json"), &json)
}

#[test]
fn envelope_is_deterministic_and_csv_shaped() {
    let scenario = smoke_scenario("det", "");
    let run = || {
        let out = bin()
            .args(["envelope", "--scenario"])
            .arg(&scenario)
            .arg("--quiet")
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        stdout(&out)
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "repeat runs must be byte-identical");
    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "z0_re,z0_im,value,feasibility_margin,starts_used,best_disc,status"
    );
    let row = lines.next().unwrap();
    assert!(row.ends_with(",ok"), "row: {row}");
    // value column is a 17-significant-digit float near 0
    let value: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((0.0..0.05).contains(&value), "envelope value {value}");
}

#[test]
fn envelope_seed_override_changes_search_but_not_validity() {
    let scenario = smoke_scenario("seeds", "");
    let with_seed = |seed: &str| {
        let out = bin()
            .args(["envelope", "--scenario"])
            .arg(&scenario)
            .args(["--quiet", "--seed", seed])
            .output()
            .unwrap();
        assert!(out.status.success());
        stdout(&out)
    };
    assert_eq!(with_seed("5"), with_seed("5"));
}

#[test]
fn malformed_scenario_exits_2_with_pointer() {
    let path = tmp_file("broken.json", r#"{"schema": "plurienv/1", "nome": "x"}"#);
    let out = bin().args(["envelope", "--scenario"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nome") || err.contains("missing field"), "stderr: {err}");
}

#[test]
fn functional_prints_reference_values() {
    // negative current, zero weight, inner automorphism through 0.5
    let scenario = smoke_scenario(
        "func",
        "",
    );
    // patch the scenario to carry the negative current
    let text = std::fs::read_to_string(&scenario).unwrap().replace(
        r#""psi2": {"op": "const", "value": 0.0}"#,
        r#""psi2": {"op": "abs2"}"#,
    );
    let text = text.replace(
        r#""phi1": {"op": "sub", "left": {"op": "const", "value": 1.0}, "right": {"op": "abs2"}}"#,
        r#""phi1": {"op": "const", "value": 0.0}"#,
    );
    let scenario = tmp_file("func2.json", &text);
    let disc = r#"{"kind": "moebius", "coefficients": [[[0.0, 0.0]], [[1.0, 0.0]]], "warp": [0.5, 0.0], "radius": 1.05}"#;
    let out = bin()
        .args(["functional", "--scenario"])
        .arg(&scenario)
        .args(["--disc", disc])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("poisson_functional = 0"), "{text}");
    assert!(text.contains("omega_functional   = -0.75"), "{text}");
    assert!(text.contains("riesz[psi1]"), "{text}");
    assert!(text.contains("riesz[psi2]"), "{text}");
}

#[test]
fn functional_with_malformed_disc_exits_2() {
    let scenario = smoke_scenario("funcbad", "");
    let out = bin()
        .args(["functional", "--scenario"])
        .arg(&scenario)
        .args(["--disc", r#"{"kind": "moebius", "coefficients": []}"#])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warp") || err.contains("disc"), "stderr: {err}");
}

#[test]
fn functional_on_singular_center_exits_3() {
    let scenario = smoke_scenario("sing", "");
    let text = std::fs::read_to_string(&scenario).unwrap().replace(
        r#""psi1": {"op": "const", "value": 0.0}"#,
        r#""psi1": {"op": "logabs", "affine": {"a": [[1.0, 0.0]], "b": [0.0, 0.0]}}"#,
    );
    let scenario = tmp_file("sing2.json", &text);
    // constant disc at the origin, exactly the pole of psi1
    let disc = r#"{"kind": "polynomial", "coefficients": [[[0.0, 0.0]]]}"#;
    let out = bin()
        .args(["functional", "--scenario"])
        .arg(&scenario)
        .args(["--disc", disc])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn compare_passes_then_fails_under_truncated_budget() {
    let scenario = smoke_scenario("cmp", "");
    let out = bin()
        .args(["compare", "--scenario"])
        .arg(&scenario)
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("all points pass"));

    // negative control: a budget too small to find anything beyond the
    // constant disc leaves a gap of about 0.75
    let text = std::fs::read_to_string(&scenario)
        .unwrap()
        .replace(r#""max_evals": 250"#, r#""max_evals": 1"#)
        .replace(r#""restarts": 2"#, r#""restarts": 1"#)
        .replace(r#""kind": "moebius", "degree": 1"#, r#""kind": "polynomial", "degree": 1"#);
    let truncated = tmp_file("cmp_trunc.json", &text);
    let out = bin()
        .args(["compare", "--scenario"])
        .arg(&truncated)
        .arg("--quiet")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"), "{}", stdout(&out));
}

#[test]
fn oracle_writes_grid_and_metadata() {
    let scenario = smoke_scenario("orc", "");
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("oracle_out");
    let out = bin()
        .args(["oracle", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_dir)
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("oracle.csv")).unwrap();
    assert!(csv.starts_with("z0_re,z0_im,value,frozen"));
    assert_eq!(csv.lines().count(), 1 + 48 * 48);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("oracle_meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["resolution"], 48);
    assert!(meta["residual"].as_f64().unwrap() >= 0.0);
}

#[test]
fn oracle_resume_reports_refinement_delta() {
    let scenario = smoke_scenario("orc_resume", "");
    let out = bin()
        .args(["oracle", "--scenario"])
        .arg(&scenario)
        .args(["--resume", "--quiet"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let meta: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(meta["resolution"], 96);
    let delta = meta["refinement_delta"].as_f64().unwrap();
    assert!((0.0..0.05).contains(&delta), "refinement delta {delta}");
}

#[test]
fn mollify_sweep_and_validation() {
    let scenario = smoke_scenario(
        "mol",
        r#", "mollifier": {"deltas": [0.2, 0.1], "n_quad": 9}"#,
    );
    let out = bin()
        .args(["mollify", "--scenario"])
        .arg(&scenario)
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "z0_re,z0_im,delta,value,base_value,gap_to_base,lower_bound_ok,ordering_ok,status"
    );
    assert_eq!(text.lines().count(), 1 + 2, "one row per delta");

    // empty delta list: header only
    let empty = smoke_scenario("mol_empty", r#", "mollifier": {"deltas": [], "n_quad": 9}"#);
    let out = bin().args(["mollify", "--scenario"]).arg(&empty).arg("--quiet").output().unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);

    // delta at the inradius: validation failure
    let bad = smoke_scenario("mol_bad", r#", "mollifier": {"deltas": [1.0], "n_quad": 9}"#);
    let out = bin().args(["mollify", "--scenario"]).arg(&bad).arg("--quiet").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn envelope_without_any_usable_disc_exits_5() {
    // phi2 = log|0 * z + 0| is -inf everywhere, so every boundary sample of
    // every disc is rejected: no candidate is ever eligible.
    let scenario = smoke_scenario("nofeas", "");
    let text = std::fs::read_to_string(&scenario).unwrap().replace(
        r#""phi2": {"op": "const", "value": 0.0}"#,
        r#""phi2": {"op": "logabs", "affine": {"a": [[0.0, 0.0]], "b": [0.0, 0.0]}}"#,
    );
    let scenario = tmp_file("nofeas2.json", &text);
    let out = bin()
        .args(["envelope", "--scenario"])
        .arg(&scenario)
        .arg("--quiet")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // the error row is still emitted before the exit code
    assert!(stdout(&out).lines().count() >= 2);
}

#[test]
fn oracle_on_everywhere_singular_weight_exits_4() {
    let scenario = smoke_scenario("ill", "");
    // phi1 = log|0 * z + 0| is -inf everywhere: the grid problem is ill-posed
    let text = std::fs::read_to_string(&scenario).unwrap().replace(
        r#""phi1": {"op": "sub", "left": {"op": "const", "value": 1.0}, "right": {"op": "abs2"}}"#,
        r#""phi1": {"op": "logabs", "affine": {"a": [[0.0, 0.0]], "b": [0.0, 0.0]}}"#,
    );
    let scenario = tmp_file("ill2.json", &text);
    let out = bin()
        .args(["oracle", "--scenario"])
        .arg(&scenario)
        .arg("--quiet")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn points_and_tolerance_overrides() {
    let scenario = smoke_scenario("ovr", "");
    let out = bin()
        .args(["envelope", "--scenario"])
        .arg(&scenario)
        .args(["--quiet", "--points", "[[[0.1, 0.0]], [[0.2, 0.0]]]"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1 + 2, "two override points");

    // an override point outside the domain is a validation failure
    let out = bin()
        .args(["envelope", "--scenario"])
        .arg(&scenario)
        .args(["--quiet", "--points", "[[[1.5, 0.0]]]"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // a hopeless tolerance makes compare fail
    let out = bin()
        .args(["compare", "--scenario"])
        .arg(&scenario)
        .args(["--quiet", "--tolerance", "1e-9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
