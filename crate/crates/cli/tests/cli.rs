use std::process::{Command, Output};

fn pucoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pucoh"))
        .args(args)
        .env_remove("PUCOH_FORMAT")
        .env_remove("PUCOH_MAX_DEGREE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn theta_values() {
    let o = pucoh(&["theta", "8", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("56*w^2"));

    let o = pucoh(&["theta", "8", "2,4"]);
    let text = stdout(&o);
    assert!(text.starts_with("-14*w*r7\n"), "{text}");
    assert!(text.contains("agrees: true"));
}

#[test]
fn exit_codes() {
    assert_eq!(pucoh(&["present", "1"]).status.code(), Some(2));
    assert_eq!(pucoh(&["theta", "8", "9"]).status.code(), Some(2));
    assert_eq!(pucoh(&["theta", "8", "x"]).status.code(), Some(2));
    assert_eq!(pucoh(&["groups"]).status.code(), Some(2));
    assert_eq!(
        pucoh(&["groups", "3", "--max-degree", "11"]).status.code(),
        Some(2)
    );
    assert_eq!(pucoh(&["groups", "40"]).status.code(), Some(3));
    assert_eq!(pucoh(&["verify", "9"]).status.code(), Some(3));
    assert_eq!(
        pucoh(&["verify", "8", "--max-degree", "17"]).status.code(),
        Some(3)
    );
    assert_eq!(pucoh(&["verify", "3"]).status.code(), Some(0));
}

#[test]
fn groups_of_pu3() {
    let o = pucoh(&["groups", "3"]);
    let text = stdout(&o);
    for line in [
        "H^2 = Z/3",
        "H^3 = Z",
        "H^5 = Z + Z/3",
        "H^8 = Z",
        "H^9 = 0",
        "H^10 = 0",
    ] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }

    let o = pucoh(&["groups", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let g = &v["groups"][2];
    assert_eq!(g["degree"], 2);
    assert_eq!(g["free_rank"], 0);
    assert_eq!(g["torsion"], serde_json::json!(["2"]));
}

#[test]
fn presentation_json_round_trips() {
    let o = pucoh(&["present", "6", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pres = pucoh::RingPresentation::from_json(&v).unwrap();
    assert_eq!(pres, pucoh::presentation::present(6).unwrap());
    assert_eq!(pres.to_json(), v);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["present", "12"][..],
        &["groups", "4", "--format", "json"],
        &["verify", "4", "--seed", "7"],
        &["present", "8", "--format", "latex"],
    ] {
        let a = pucoh(args);
        let b = pucoh(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn environment_overrides() {
    let o = Command::new(env!("CARGO_BIN_EXE_pucoh"))
        .args(["present", "2"])
        .env("PUCOH_FORMAT", "json")
        .output()
        .unwrap();
    assert!(serde_json::from_slice::<serde_json::Value>(&o.stdout).is_ok());
}
