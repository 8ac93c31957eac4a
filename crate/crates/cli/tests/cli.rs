use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn invgen(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_invgen"))
        .args(args)
        .env_remove("INVGEN_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn invgen");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const E12_SYMMETRIC: &str = r#"{"space":{"field":{"kind":"prime","p":101},"n":2,"form":"symmetric"},
    "tuple":[[["0","1"],["0","0"]]]}"#;
const E12_SKEW: &str = r#"{"space":{"field":{"kind":"prime","p":101},"n":2,"form":"skew"},
    "tuple":[[["0","1"],["0","0"]]]}"#;

#[test]
fn check_symmetric_e12_generates() {
    let o = invgen(&["check"], Some(E12_SYMMETRIC));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["generates"], true);
    assert_eq!(v["closure_dim"], 4);
}

#[test]
fn check_skew_e12_does_not_generate() {
    let o = invgen(&["check"], Some(E12_SKEW));
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["generates"], false);
    assert_eq!(v["closure_dim"], 2);
}

#[test]
fn check_rejects_singular_gram() {
    let doc = r#"{"space":{"field":{"kind":"prime","p":101},"n":2,"form":"symmetric",
        "gram":[["1","1"],["1","1"]]},"tuple":[[["0","1"],["0","0"]]]}"#;
    let o = invgen(&["check"], Some(doc));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("gram: singular"), "{}", stderr(&o));
}

#[test]
fn check_rejects_malformed_documents() {
    assert_eq!(code(&invgen(&["check"], Some("{\"tuple\": 3}"))), 2);
    assert_eq!(code(&invgen(&["check"], Some(""))), 2);
    let wrong_shape = r#"{"space":{"field":{"kind":"prime","p":5},"n":2,"form":"symmetric"},
        "tuple":[[["1","0","0"],["0","1","0"]]]}"#;
    assert_eq!(code(&invgen(&["check"], Some(wrong_shape))), 2);
    let not_prime = r#"{"space":{"field":{"kind":"prime","p":9},"n":2,"form":"symmetric"},
        "tuple":[[["1","0"],["0","1"]]]}"#;
    assert_eq!(code(&invgen(&["check"], Some(not_prime))), 2);
}

#[test]
fn check_reads_a_file_and_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("t.json");
    let output = dir.path().join("r.json");
    std::fs::write(&input, E12_SKEW).unwrap();
    let o = invgen(
        &["check", input.to_str().unwrap(), "--output", output.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(v["closure_dim"], 2);
}

#[test]
fn witness_rejects_empty_stratum() {
    let o = invgen(&["witness", "--form", "skew", "--n", "4", "--d", "2", "--l", "1"], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("stratum is empty"), "{}", stderr(&o));
}

#[test]
fn witness_rejects_small_field() {
    let o = invgen(&["witness", "--n", "5", "--field", "p=3"], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("field too small"), "{}", stderr(&o));
}

#[test]
fn witness_over_f101_has_declared_profile() {
    let args = [
        "witness", "--form", "symmetric", "--n", "5", "--d", "2", "--l", "1", "--r", "3", "--field", "p=101",
    ];
    let o = invgen(&args, None);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["profile"]["d"], 2);
    assert_eq!(v["profile"]["l"], 1);
    assert_eq!(v["tuple"].as_array().unwrap().len(), 3);
    assert_eq!(v["w_basis"].as_array().unwrap().len(), 2);
    let c = invgen(&["check"], Some(&String::from_utf8_lossy(&o.stdout)));
    assert_eq!(code(&c), 1);
}

#[test]
fn witness_output_is_deterministic() {
    let args = ["--seed", "17", "witness", "--n", "4", "--d", "2", "--l", "1", "--r", "2", "--padding", "sampled"];
    let a = invgen(&args, None);
    let b = invgen(&args, None);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = invgen(&["--seed", "18", "witness", "--n", "4", "--d", "2", "--l", "1", "--r", "2", "--padding", "sampled"], None);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_is_read_from_environment() {
    let flag = invgen(&["--seed", "9", "witness", "--n", "3"], None);
    let out = Command::new(env!("CARGO_BIN_EXE_invgen"))
        .args(["witness", "--n", "3"])
        .env("INVGEN_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, out.stdout);
}

#[test]
fn witness_round_trips_through_check_with_search() {
    let cases: &[(&str, &str, &str, &str, &str)] = &[
        ("symmetric", "3", "1", "0", "p=7"),
        ("symmetric", "4", "2", "1", "p=7"),
        ("symmetric", "4", "2", "2", "p=11"),
        ("skew", "4", "1", "1", "p=7"),
        ("skew", "4", "2", "2", "p=7"),
        ("skew", "4", "2", "0", "p=11"),
    ];
    for &(form, n, d, l, field) in cases {
        for seed in ["0", "1", "2"] {
            let gram = if form == "symmetric" && l != "0" { "split" } else if form == "symmetric" { "identity" } else { "standard-skew" };
            let w = invgen(
                &["--seed", seed, "witness", "--form", form, "--n", n, "--d", d, "--l", l, "--field", field, "--gram", gram],
                None,
            );
            assert_eq!(code(&w), 0, "{form} n={n} d={d} l={l}: {}", stderr(&w));
            let c = invgen(&["check", "--search-witness"], Some(&String::from_utf8_lossy(&w.stdout)));
            assert_eq!(code(&c), 1, "{form} n={n} d={d} l={l}");
            let v = json(&c);
            assert_eq!(v["witness_search"], "complete");
            let found = v["witnesses"].as_array().unwrap().iter().any(|x| {
                x["d"].to_string() == d && x["l"].to_string() == l
            });
            assert!(found, "{form} n={n} d={d} l={l}: no witness at the declared profile");
        }
    }
}

#[test]
fn search_over_rationals_is_skipped_not_failed() {
    let doc = r#"{"space":{"field":{"kind":"rational"},"n":2,"form":"skew"},"tuple":[[["0","1"],["0","0"]]]}"#;
    let o = invgen(&["check", "--search-witness"], Some(doc));
    assert_eq!(code(&o), 1);
    assert!(json(&o)["witness_search"].as_str().unwrap().starts_with("skipped"));
}

#[test]
fn dims_symmetric_four_has_three_way_tie() {
    let o = invgen(&["dims", "--form", "symmetric", "--n", "4", "--r", "1", "--table"], None);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["extremal"]["max_dim"], 13);
    assert_eq!(v["extremal"]["argmax"].as_array().unwrap().len(), 3);
    assert!(!v["strata"].as_array().unwrap().is_empty());
}

#[test]
fn dims_skew_maxima() {
    let v = json(&invgen(&["dims", "--form", "skew", "--n", "6", "--r", "2"], None));
    assert_eq!(v["extremal"]["max_dim"], 60);
    let v = json(&invgen(&["dims", "--form", "skew", "--n", "10", "--r", "1"], None));
    assert_eq!(v["extremal"]["max_dim"], 92);
}

#[test]
fn dims_text_and_csv() {
    let o = invgen(&["dims", "--n", "4", "--table", "--format", "text"], None);
    assert!(String::from_utf8_lossy(&o.stdout).contains("max dim 13"));
    let o = invgen(&["dims", "--n", "4", "--format", "csv"], None);
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(text.starts_with("d,l,"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn dims_rejects_odd_skew() {
    assert_eq!(code(&invgen(&["dims", "--form", "skew", "--n", "5"], None)), 2);
}

#[test]
fn census_incidence_fits_degree_three() {
    let o = invgen(
        &["census", "--mode", "incidence", "--form", "symmetric", "--n", "2", "--r", "1", "--q", "3,5,7"],
        None,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let fit = v["fits"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["d"] == 1 && f["l"] == 0)
        .unwrap();
    assert_eq!(fit["degree"], 3);
    assert!(v["rows"][0]["count"].is_string());
}

#[test]
fn census_incidence_csv() {
    let o = invgen(&["census", "--n", "2", "--q", "3,5,7", "--format", "csv"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(text.starts_with("kind,n,r,d,l,q,count,degree,residual"));
}

#[test]
fn census_montecarlo_skew_rate_is_zero() {
    let o = invgen(&["census", "--mode", "montecarlo", "--form", "skew", "--n", "2", "--r", "1"], None);
    assert_eq!(code(&o), 0);
    for row in json(&o)["rows"].as_array().unwrap() {
        assert_eq!(row["rate"], 0.0);
    }
}

#[test]
fn census_montecarlo_is_deterministic() {
    let args = ["--seed", "4", "census", "--mode", "montecarlo", "--n", "2", "--q", "3", "--samples", "300"];
    assert_eq!(invgen(&args, None).stdout, invgen(&args, None).stdout);
}

#[test]
fn census_exhaustive_counts() {
    let o = invgen(&["census", "--mode", "exhaustive", "--n", "2", "--q", "3"], None);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["rows"][0]["nongenerating"], "33");
    assert_eq!(v["rows"][0]["total"], "81");
}

#[test]
fn census_exhaustive_too_large() {
    let o = invgen(&["census", "--mode", "exhaustive", "--n", "3", "--q", "101"], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("enumeration too large"), "{}", stderr(&o));
}

#[test]
fn census_rejects_non_prime() {
    assert_eq!(code(&invgen(&["census", "--n", "2", "--q", "3,9"], None)), 2);
}

#[test]
fn reduce_isotropic_line_gives_hyperbolic_gram() {
    let doc = r#"{"space":{"field":{"kind":"prime","p":5},"n":2,"form":"symmetric"},"subspace":[["1","2"]]}"#;
    let o = invgen(&["reduce"], Some(doc));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["gram"], serde_json::json!([["0", "1"], ["1", "0"]]));
    assert_eq!(v["d"], 1);
    assert_eq!(v["l"], 1);
    assert_eq!(v["weak"], false);
}

const NON_SQUARE_LINE: &str =
    r#"{"space":{"field":{"kind":"prime","p":3},"n":2,"form":"symmetric"},"subspace":[["1","1"]]}"#;

#[test]
fn reduce_strict_fails_on_non_square_norm() {
    let o = invgen(&["reduce"], Some(NON_SQUARE_LINE));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("square root"), "{}", stderr(&o));
}

#[test]
fn reduce_weak_keeps_norm() {
    let o = invgen(&["reduce", "--weak"], Some(NON_SQUARE_LINE));
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["weak"], true);
    assert_eq!(v["gram"][0][0], "2");
    assert_eq!(v["gram"][0][1], "0");
}
