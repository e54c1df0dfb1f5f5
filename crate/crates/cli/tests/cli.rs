use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;

use mcomp::gen::{random_expr, rng, ExprParams};
use mcomp_cli::dsl::{parse_expr, parse_gq};

fn mcomp(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mcomp")).args(args).output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = if stdout.trim().is_empty() { Value::Null } else { serde_json::from_str(&stdout).expect("JSON on stdout") };
    (out.status.code().expect("exit code"), json, String::from_utf8(out.stderr).unwrap())
}

fn in_process(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = mcomp_cli::run(std::iter::once("mcomp").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn complete_shift_pair_gives_one_pair() {
    let (code, v, _) = mcomp(&["complete", "--a", "ushift", "--b", "adj(ushift)", "--lambda", "0", "--target", "fli"]);
    assert_eq!(code, 0);
    assert_eq!(v["decision"], "yes");
    assert_eq!(v["certificate"]["pairs"].as_array().unwrap().len(), 1);
}

#[test]
fn holes_check_on_zero_corner_is_exact() {
    let (code, v, _) =
        mcomp(&["verify", "--check", "holes", "--a", "ushift", "--b", "adj(ushift)", "--c", "zero", "--target", "fli"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "exact");
    assert_eq!(v["schema"], "1");
}

#[test]
fn far_point_is_in_the_resolvent() {
    let (code, v, _) = mcomp(&["classify", "--op", "ushift", "--lambda", "5", "--kind", "fli"]);
    assert_eq!(code, 0);
    assert_eq!(v["resolvent"], true);
    assert_eq!(v["point_data"]["alpha"], "0");
}

#[test]
fn impossible_completion_exits_one() {
    // β(A) = 2 but α(B) = 1 at 0, so no invertible corner
    let (code, v, _) =
        mcomp(&["complete", "--a", "ushift (+) ushift", "--b", "adj(ushift)", "--lambda", "0", "--target", "inv"]);
    assert_eq!(code, 1);
    assert_eq!(v["decision"], "no");
    let (code, _, _) =
        mcomp(&["complete", "--a", "ushift (+) ushift", "--b", "adj(ushift)", "--lambda", "0", "--target", "fli"]);
    assert_eq!(code, 0);
}

#[test]
fn certificate_round_trips_through_verify() {
    let dir = std::env::temp_dir().join(format!("mcomp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cert = dir.join("cert.json");
    let c = cert.to_str().unwrap();
    let (code, _, _) = mcomp(&["complete", "--a", "ushift", "--b", "adj(ushift)", "--lambda", "0", "--cert", c]);
    assert_eq!(code, 0);
    let (code, v, _) = mcomp(&["verify", "--check", "harte", "--a", "ushift", "--b", "adj(ushift)", "--c", c]);
    assert_eq!((code, &v["verdict"]), (0, &Value::from("exact")));
    let (code, v, _) = mcomp(&[
        "verify", "--check", "sandwich", "--a", "ushift", "--b", "adj(ushift)", "--c", c, "--samples", "3", "--sizes",
        "32,64,128",
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["verdict"], "sampled_pass");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn expression_from_file_and_plot() {
    let dir = std::env::temp_dir().join(format!("mcomp-plot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("op.txt");
    std::fs::write(&src, "ushift(0, 2)\n(+) diag{1:2}\n").unwrap();
    let pgm = dir.join("s.pgm");
    let op = format!("@{}", src.display());
    let (code, v, err) =
        mcomp(&["spectrum", "--op", &op, "--kind", "spec", "--plot", pgm.to_str().unwrap(), "--res", "16"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(v["kind"], "spec");
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_reports_shift_data() {
    let (code, v, _) = mcomp(&["oracle", "--op", "ushift", "--lambda", "1/2", "--sizes", "32,64,128"]);
    assert_eq!(code, 0);
    assert_eq!((v["alpha_est"].as_u64(), v["beta_est"].as_u64()), (Some(0), Some(1)));
}

#[test]
fn errors_go_to_stderr_with_exit_two() {
    for args in [
        vec!["classify", "--op", "ushift (+)", "--lambda", "0"],
        vec!["classify", "--op", "ushift", "--lambda", "1/0"],
        vec!["classify", "--op", "ushift", "--lambda", "0", "--kind", "nope"],
        vec!["frobnicate"],
        vec!["verify", "--check", "harte", "--a", "ushift", "--b", "ushift"],
        vec!["classify", "--op", "@/nonexistent/file", "--lambda", "0"],
    ] {
        let (code, out, err) = in_process(&args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty() && !err.is_empty(), "{args:?}");
    }
    let (_, _, err) = in_process(&["classify", "--op", "ushift (+)\n  bshift(1, )", "--lambda", "0"]);
    assert!(err.contains("line 2, column 13"), "{err}");
}

#[test]
fn arrangement_refusal_exits_three() {
    let a: Vec<String> = (0..34).map(|k| format!("ushift({k}, 1)")).collect();
    let (code, out, err) = in_process(&["verify", "--check", "eta", "--a", &a.join(" (+) "), "--b", "ushift"]);
    assert_eq!(code, 3);
    assert!(out.is_empty() && err.contains("34 predicates"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let e = random_expr(&mut rng(seed), &ExprParams::default());
        let back = parse_expr(&e.to_string()).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(back.to_string(), e.to_string());
    }

    #[test]
    fn gaussian_literals_round_trip(re in -50i64..50, rd in 1i64..20, im in -50i64..50, id in 1i64..20) {
        let g = parse_gq(&format!("{re}/{rd}{im:+}/{id}i")).unwrap();
        prop_assert_eq!(parse_gq(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn arbitrary_text_parses_or_exits_two(src in "[ushiftadjbgq(){}:,+/0-9i\\-^ \n]{0,40}|\\PC{0,20}") {
        match parse_expr(&src) {
            Ok(e) => prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e),
            Err(_) => {
                let (code, out, err) = in_process(&["classify", "--op", &src, "--lambda", "0"]);
                prop_assert_eq!(code, 2);
                prop_assert!(out.is_empty() && err.starts_with("error: "));
            }
        }
    }

    #[test]
    fn raw_bytes_never_crash(bytes in proptest::collection::vec(any::<u8>(), 0..48)) {
        let src = String::from_utf8_lossy(&bytes);
        if parse_expr(&src).is_err() {
            prop_assert_eq!(in_process(&["classify", "--op", &src, "--lambda", "0"]).0, 2);
        }
    }
}
