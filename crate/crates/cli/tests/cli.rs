use assert_cmd::Command;
use predicates::prelude::*;

fn zpd() -> Command {
    Command::cargo_bin("zpd").unwrap()
}

#[test]
fn factorize_basis_pair_passes() {
    zpd()
        .args(["factorize", "--shape", "3", "--c", "e11", "--u", "e1xe2", "--v", "e3xe1"])
        .assert()
        .success()
        .stdout(predicate::str::contains("pass: true"));
}

#[test]
fn factorize_rejects_rank_hypothesis_violation() {
    zpd()
        .args(["factorize", "--shape", "2", "--c", "e11", "--u", "e1xe2", "--v", "e1xe1"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("rank hypothesis violated"));
}

#[test]
fn factorize_random_rank_cross_block() {
    zpd()
        .args(["factorize", "--shape", "3,3", "--c", "random-rank:1,1"])
        .assert()
        .success();
}

#[test]
fn zpd_check_m3_e11_is_determined_consistent() {
    zpd()
        .args(["zpd-check", "--shape", "3", "--c", "e11", "--samples", "1000"])
        .assert()
        .code(0)
        .stdout(predicate::str::contains("\"measured_rank\": 72"))
        .stdout(predicate::str::contains("determined-consistent"));
}

#[test]
fn zpd_check_m2_e11_yields_corner_certificate() {
    zpd()
        .args(["zpd-check", "--shape", "2", "--c", "e11", "--samples", "300"])
        .assert()
        .code(3)
        .stdout(predicate::str::contains("not-determined"))
        .stdout(predicate::str::contains("\"witness_value\": 4.0"));
}

#[test]
fn zpd_check_m2_identity_yields_transpose_certificate() {
    zpd()
        .args(["zpd-check", "--shape", "2", "--c", "identity", "--samples", "300"])
        .assert()
        .code(3)
        .stdout(predicate::str::contains("Transpose"));
}

#[test]
fn counterexample_corner_prints_value_4() {
    zpd()
        .args(["counterexample", "--shape", "2"])
        .assert()
        .success()
        .stdout(predicate::str::contains("witness_value_norm: 4.0"));
}

#[test]
fn counterexample_transpose_passes() {
    zpd()
        .args(["counterexample", "--shape", "3", "--construct", "transpose", "--samples", "2000"])
        .assert()
        .success()
        .stdout(predicate::str::contains("pass: true"));
}

#[test]
fn maps_pair_round_trip() {
    zpd()
        .args(["maps", "pair", "--shape", "2", "--construct", "inner", "--seed", "7"])
        .assert()
        .success()
        .stdout(predicate::str::contains("pass: true"));
}

#[test]
fn maps_single_weighted_round_trip() {
    zpd()
        .args(["maps", "single", "--shape", "3", "--construct", "weighted"])
        .assert()
        .success();
}

#[test]
fn maps_derivation_recovers_multiplier() {
    zpd()
        .args(["maps", "derivation", "--shape", "3,3", "--c", "e11x0"])
        .assert()
        .success()
        .stdout(predicate::str::contains("xi_c_residual: 0.0"));
}

#[test]
fn identical_config_gives_byte_identical_json() {
    let run = || {
        zpd()
            .args([
                "zpd-check", "--shape", "2,2", "--c", "zero", "--seed", "5", "--output", "json",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn c_from_file_round_trips() {
    let dir = std::env::temp_dir().join("zpd-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c.json");
    std::fs::write(
        &path,
        r#"{"shape":[3],"blocks":[[[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]]}"#,
    )
    .unwrap();
    zpd()
        .args(["factorize", "--shape", "3", "--c", &format!("file:{}", path.display())])
        .assert()
        .success();
}

#[test]
fn csv_output_has_header() {
    zpd()
        .args(["counterexample", "--shape", "2", "--samples", "500", "--output", "csv"])
        .assert()
        .success()
        .stdout(predicate::str::starts_with("key,value"));
}
