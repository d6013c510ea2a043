use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};
use witt_core::{Family, MPoly, Ring, TruncationSet, WittRing, WittVector};

fn witt(args: &[&str], stdin: Option<&str>) -> Output {
    let cache = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_witt"))
        .args(args)
        .env("WITT_CACHE", cache.path())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.unwrap_or("").as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn ok_json(args: &[&str], stdin: Option<&str>) -> Value {
    let out = witt(args, stdin);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(args: &[&str], stdin: Option<&str>) -> i32 {
    let out = witt(args, stdin);
    assert!(out.stdout.is_empty() || serde_json::from_slice::<Value>(&out.stdout).is_ok());
    out.status.code().unwrap()
}

fn p(s: &str) -> MPoly {
    s.parse().unwrap()
}

#[test]
fn polys_classical_sum() {
    let v = ok_json(
        &[
            "polys",
            "--family",
            "classical",
            "--set",
            "1,2",
            "--law",
            "add",
        ],
        None,
    );
    let s1: MPoly = serde_json::from_value(v["polys"]["1"].clone()).unwrap();
    let s2: MPoly = serde_json::from_value(v["polys"]["2"].clone()).unwrap();
    // from x1^2 + 2 x2 + y1^2 + 2 y2 = (x1 + y1)^2 + 2 s2
    assert_eq!(s1, p("x1+y1"));
    assert_eq!(s2, p("x2+y2-x1*y1"));
}

#[test]
fn polys_frobenius_is_indexed_by_quotient() {
    let v = ok_json(
        &[
            "polys",
            "--family",
            "classical",
            "--set",
            "1,2,4",
            "--law",
            "frob:2",
        ],
        None,
    );
    let keys: Vec<&String> = v["polys"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["1", "2"]);
    let f1: MPoly = serde_json::from_value(v["polys"]["1"].clone()).unwrap();
    assert_eq!(f1, p("x1^2+2*x2"));
}

#[test]
fn eval_qdef_product_matches_table() {
    let pair =
        json!([{"coords": {"1": "q", "2": "1"}}, {"coords": {"1": "2", "2": "q+1"}}]).to_string();
    let v = ok_json(
        &[
            "eval", "--family", "qdef", "--set", "1,2", "--ring", "zq", "--op", "mul",
        ],
        Some(&pair),
    );
    // Π_1 = q x1 y1, Π_2 = 2q x2 y2 + q^2 x1^2 y2 + q^2 x2 y1^2 at x = (q, 1), y = (2, q+1)
    let zq = Ring::zq();
    let e = |s: &str| zq.parse_elem(s).unwrap();
    let q = e("q");
    let (x1, x2, y1, y2) = (q.clone(), e("1"), e("2"), e("q+1"));
    let m = |a: &_, b: &_| zq.mul(a, b).unwrap();
    let pi1 = m(&q, &m(&x1, &y1));
    let q2 = m(&q, &q);
    let pi2 = zq
        .add(
            &zq.add(
                &zq.int_scale_i64(&m(&q, &m(&x2, &y2)), 2).unwrap(),
                &m(&q2, &m(&m(&x1, &x1), &y2)),
            )
            .unwrap(),
            &m(&q2, &m(&x2, &m(&y1, &y1))),
        )
        .unwrap();
    assert_eq!(v["coords"]["1"], zq.elem_to_json(&pi1));
    assert_eq!(v["coords"]["2"], zq.elem_to_json(&pi2));
}

#[test]
fn eval_output_round_trips() {
    let w = WittRing::natural(
        Family::QDef,
        TruncationSet::new(&[1, 2, 3, 6]).unwrap(),
        Ring::zq(),
    )
    .unwrap();
    let input = json!({"x": {"coords": {"1": "q", "2": "-1", "3": "2", "6": "q^2"}},
                       "y": {"coords": {"1": "3", "2": "q", "3": "0", "6": "1"}}});
    let v = ok_json(
        &[
            "eval", "--family", "qdef", "--set", "1,2,3,6", "--ring", "zq", "--op", "add",
        ],
        Some(&input.to_string()),
    );
    let back = WittVector::from_json(&w, &v).unwrap();
    let x = WittVector::from_json(&w, &input["x"]).unwrap();
    let y = WittVector::from_json(&w, &input["y"]).unwrap();
    assert_eq!(back, x.add(&y).unwrap());
    assert_eq!(back.to_json(), v);
}

#[test]
fn ghost_and_unghost() {
    let v = ok_json(
        &[
            "eval",
            "--family",
            "classical",
            "--set",
            "1,2",
            "--ring",
            "z",
            "--op",
            "unghost",
        ],
        Some(r#"{"1":"3","2":"5"}"#),
    );
    assert_eq!(v, json!({"coords": {"1": "3", "2": "-2"}}));
    let g = ok_json(
        &[
            "eval",
            "--family",
            "classical",
            "--set",
            "1,2",
            "--ring",
            "z",
            "--op",
            "ghost",
        ],
        Some(&v.to_string()),
    );
    assert_eq!(g, json!({"ghost": {"1": "3", "2": "5"}}));
    let args = [
        "eval",
        "--family",
        "classical",
        "--set",
        "1,2",
        "--ring",
        "z",
        "--op",
        "unghost",
    ];
    assert_eq!(code(&args, Some(r#"{"1":"3","2":"4"}"#)), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(
        code(
            &[
                "polys",
                "--family",
                "classical",
                "--set",
                "1,2",
                "--law",
                "add",
                "--bogus"
            ],
            None
        ),
        2
    );
    assert_eq!(
        code(
            &[
                "polys",
                "--family",
                "classical",
                "--set",
                "1,4",
                "--law",
                "spin"
            ],
            None
        ),
        2
    );
    assert_eq!(
        code(
            &["polys", "--family", "nope", "--set", "1,2", "--law", "add"],
            None
        ),
        2
    );
    assert_eq!(
        code(
            &["eval", "--family", "qdef", "--set", "1,2", "--ring", "z", "--op", "add"],
            Some("[]")
        ),
        2
    );
    assert_eq!(
        code(
            &[
                "eval",
                "--family",
                "classical",
                "--set",
                "1,2",
                "--ring",
                "z",
                "--op",
                "add",
                "--in",
                "/no/such/file"
            ],
            None
        ),
        2
    );
    // p = 3 divides q = 3
    let v = r#"{"coords":{"1":"1","3":"0"}}"#;
    assert_eq!(
        code(&["deform", "lenart-iso", "--p", "3", "--q", "3"], Some(v)),
        1
    );
}

#[test]
fn lenart_round_trip() {
    let a = r#"{"coords":{"1":"2","3":"5"}}"#;
    let b = ok_json(&["deform", "lenart-iso", "--p", "3", "--q", "2"], Some(a));
    // (q^{p-1} - 1)/p = 1, so a_3 picks up a_1^3 = 8
    assert_eq!(b, json!({"coords": {"1": "2", "3": "13"}}));
    let back = ok_json(
        &["deform", "lenart-iso", "--p", "3", "--q", "2", "--inverse"],
        Some(&b.to_string()),
    );
    assert_eq!(back, serde_json::from_str::<Value>(a).unwrap());
}

#[test]
fn certify_qbar() {
    let v = ok_json(
        &["deform", "certify-qbar", "--g", "q", "--set", "1,2"],
        None,
    );
    assert_eq!(v["report"]["passed"], true);
    assert_eq!(v["twists"].as_array().unwrap().len(), 2);
}

#[test]
fn ringlaw_commands() {
    let v = ok_json(
        &[
            "ringlaw", "classify", "--ring", "z", "--F", "x+y", "--G", "5*x*y",
        ],
        None,
    );
    assert_eq!(v["r"], "5");
    let args = [
        "ringlaw",
        "classify",
        "--ring",
        "dual",
        "--F",
        "x+y+eps*x*y",
        "--G",
        "3*eps*x*y",
    ];
    assert_eq!(code(&args, None), 1);
    let v = ok_json(
        &[
            "ringlaw",
            "verify",
            "--ring",
            "dual",
            "--F",
            "x+y+eps*x*y",
            "--G",
            "2*eps*x*y",
        ],
        None,
    );
    assert_eq!(v["mode"], "symbolic");
    assert_eq!(
        code(
            &["ringlaw", "verify", "--ring", "z", "--F", "x+y+x*y", "--G", "x*y"],
            None
        ),
        1
    );
    let v = ok_json(
        &[
            "ringlaw", "isos", "--ring", "zmod:6", "--r", "0", "--r2", "0",
        ],
        None,
    );
    assert_eq!(v["units"], json!(["1", "5"]));
}

#[test]
fn systems_commands() {
    let v = ok_json(
        &[
            "systems",
            "verify",
            "--instance",
            "witt:z:1,2,3,6",
            "--budget",
            "20",
        ],
        None,
    );
    assert_eq!(v["passed"], true);
    let v = ok_json(
        &[
            "systems",
            "verify",
            "--instance",
            "const:z:1,2",
            "--budget",
            "20",
        ],
        None,
    );
    assert_eq!(v["passed"], true);
    assert_eq!(
        code(&["systems", "verify", "--instance", "nope:1,2"], None),
        2
    );

    let a = json!({"coords": {"1": "1", "2": "2", "3": "3", "6": "4"}});
    let b = ok_json(
        &[
            "systems", "auer", "--t1", "1,2", "--t2", "1,3", "--ring", "z",
        ],
        Some(&a.to_string()),
    );
    let back = ok_json(
        &[
            "systems",
            "auer",
            "--t1",
            "1,2",
            "--t2",
            "1,3",
            "--ring",
            "z",
            "--inverse",
        ],
        Some(&b.to_string()),
    );
    assert_eq!(back, a);
}

#[test]
fn indwitt_commands() {
    let base = ["--system", "const:z", "--set", "1,2"];
    let run =
        |op: &str, input: &str| ok_json(&[&["indwitt", op][..], &base[..]].concat(), Some(input));
    let v = run("dwork-test", r#"{"1":"3","2":"5"}"#);
    assert_eq!(v["in_image"], true);
    assert_eq!(v["preimage"]["coords"], json!({"1": "3", "2": "-2"}));
    assert_eq!(run("dwork-test", r#"{"1":"3","2":"4"}"#)["in_image"], false);
    assert_eq!(run("lambda", "2")["coords"], json!({"1": "2", "2": "-1"}));
    let g = run("ghost", r#"{"coords":{"1":"3","2":"-2"}}"#);
    assert_eq!(g["ghost"], json!({"1": "3", "2": "5"}));

    let v = ok_json(
        &["indwitt", "frob:2", "--system", "qpow", "--set", "1,2,4"],
        Some(r#"{"1":"1","2":"q","4":"q+1"}"#),
    );
    assert_eq!(v["system"], "F_2(qpow)");
    assert_eq!(
        code(
            &["indwitt", "ghost", "--system", "bogus", "--set", "1,2"],
            Some("{}")
        ),
        2
    );
}

#[test]
fn verify_is_deterministic() {
    let args = [
        "verify", "--suite", "ringlaw", "--budget", "20", "--seed", "7",
    ];
    let a = witt(&args, None);
    let b = witt(&args, None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"][0]["suite"], "ringlaw");
    assert_eq!(code(&["verify", "--suite", "nope"], None), 2);
}

#[test]
fn cache_dir_flag_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    ok_json(
        &[
            "polys",
            "--family",
            "qdef",
            "--set",
            "1,2,3",
            "--law",
            "mul",
            "--cache-dir",
            path,
        ],
        None,
    );
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_some());
}
