use std::io::Write;
use std::process::{Command, Output, Stdio};

fn pragrate(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pragrate"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = pragrate(args, None);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const TABLE_EPS: &str = "0.00003,0.0001,0.00032,0.00093,0.00251,0.00626,0.01444";

#[test]
fn ladder_markdown_has_seven_rows() {
    let md = ok(&[
        "ladder", "--source", "0.2,0.8", "--n", "50", "--eps", TABLE_EPS, "--format", "markdown",
    ]);
    let rows: Vec<&str> = md.lines().skip(2).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[0].starts_with("| 50 | 0.00003 | 0.940 | 0.722 | 1.119 | 1.000 | 0.941 |"));
    assert!(rows[6].starts_with("| 50 | 0.01444 | 0.840 | 0.722 | 0.913 | 0.957 | 0.869 |"));
}

#[test]
fn ladder_json_round_trips() {
    let text = ok(&[
        "ladder",
        "--source",
        "0.2,0.8",
        "--n",
        "40..50:10",
        "--eps",
        "0.001",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let p = pragrate::SourcePmf::bernoulli(0.2).unwrap();
    for (row, n) in rows.iter().zip([40, 50]) {
        let want =
            pragrate::ladder_row(&p, n, 0.001, pragrate::CodeMode::OneToOne, None, true).unwrap();
        assert_eq!(row["n"], n);
        assert_eq!(row["exact"].as_f64(), want.exact);
        assert_eq!(row["strassen"].as_f64(), Some(want.strassen));
        assert_eq!(row["blahut"].as_f64(), want.blahut);
        assert_eq!(row["pragmatic"].as_f64(), want.pragmatic);
        assert_eq!(row["delta"].as_f64(), Some(want.delta));
    }
}

#[test]
fn uniform_ladder_marks_missing_cells() {
    let out = pragrate(
        &[
            "ladder", "--source", "0.5,0.5", "--n", "50", "--eps", "0.1", "--format", "markdown",
        ],
        None,
    );
    assert!(out.status.success());
    let md = String::from_utf8(out.stdout).unwrap();
    assert!(md.contains("| — | — |"));
    assert!(md.contains("delta out of range"));
}

#[test]
fn prefix_mode_adds_one_bit() {
    let a = ok(&[
        "limits", "--source", "0.2,0.8", "--n", "50", "--eps", "0.01",
    ]);
    let b = ok(&[
        "limits", "--source", "0.2,0.8", "--n", "50", "--eps", "0.01", "--mode", "prefix",
    ]);
    let rate = |s: &str| {
        s.lines()
            .nth(1)
            .unwrap()
            .rsplit(',')
            .next()
            .unwrap()
            .parse::<f64>()
            .unwrap()
    };
    assert!((rate(&b) - rate(&a) - 0.02).abs() < 1e-9);
    assert_eq!(a.lines().next(), Some("n,epsilon,L_star,rate"));
}

#[test]
fn constants_report() {
    let v: serde_json::Value = serde_json::from_str(&ok(&[
        "constants",
        "--source",
        "0.2,0.8",
        "--delta",
        "0.070304",
    ]))
    .unwrap();
    for key in ["p", "q", "r", "n0", "C"] {
        assert!(v["converse"][key].as_f64().unwrap().is_finite(), "{key}");
    }
    assert!(v["converse"]["n1"].as_u64().is_some());
    let near: serde_json::Value = serde_json::from_str(&ok(&[
        "constants",
        "--source",
        "0.5001,0.4999",
        "--delta",
        "1e-8",
    ]))
    .unwrap();
    assert!(near["converse"]["n0"].as_f64().unwrap() > 1e6);
    let out = pragrate(
        &[
            "constants",
            "--source",
            "0.25,0.25,0.25,0.25",
            "--delta",
            "0.1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta range is empty"));
}

#[test]
fn census_sweep_and_truncation() {
    let csv = ok(&["census", "--source", "0.2,0.8", "--n", "20..2000:20"]);
    let ratios: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 100);
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 10.0);

    let out = pragrate(
        &[
            "census",
            "--m",
            "3",
            "--h",
            "1.0",
            "--n",
            "10..100:30",
            "--cap-types",
            "1000",
        ],
        None,
    );
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));

    let json = ok(&[
        "census", "--m", "4", "--h", "1.5", "--n", "6", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v[0]["count"].is_string());
}

fn all_binary(n: usize) -> String {
    (0..1u32 << n)
        .map(|k| {
            (0..n)
                .map(|i| if k >> i & 1 == 1 { 'b' } else { 'a' })
                .collect::<String>()
                + "\n"
        })
        .collect()
}

#[test]
fn codec_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    let coded = dir.path().join("coded.txt");
    let strings = all_binary(8);
    std::fs::write(&input, &strings).unwrap();
    for mode in ["universal", "known-source"] {
        let enc = pragrate(
            &[
                "codec",
                "encode",
                "--mode",
                mode,
                "--source",
                "0.3,0.7",
                "--input",
                input.to_str().unwrap(),
                "--output",
                coded.to_str().unwrap(),
            ],
            None,
        );
        assert!(
            enc.status.success(),
            "{}",
            String::from_utf8_lossy(&enc.stderr)
        );
        let dec = ok(&["codec", "decode", "--input", coded.to_str().unwrap()]);
        assert_eq!(dec, strings, "{mode}");
    }
}

#[test]
fn universal_codec_ignores_source() {
    let strings = all_binary(6);
    let a = pragrate(&["codec", "encode", "--source", "0.9,0.1"], Some(&strings));
    let b = pragrate(&["codec", "encode", "--source", "0.2,0.8"], Some(&strings));
    let c = pragrate(&["codec", "encode", "--alphabet", "ab"], Some(&strings));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn codec_hand_example_and_audit() {
    let out = pragrate(
        &["codec", "encode", "--alphabet", "ab"],
        Some("bb\naa\nab\nba\n"),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "# pragrate-codec mode=universal m=2 n=2 alphabet=ab count=4\n\n0\n1\n00\n"
    );

    let audit = pragrate(
        &[
            "codec",
            "encode",
            "--mode",
            "known-source",
            "--source",
            "0.2,0.8",
            "--audit",
        ],
        Some("bb\nab\naa\n"),
    );
    let lines: Vec<String> = String::from_utf8(audit.stdout)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(
        lines[0],
        "string,index,length,empirical_entropy,neg_log2_ml_prob"
    );
    assert!(lines[1].starts_with("bb,1,0,"));
    assert!(lines[3].starts_with("aa,4,2,"));
}

#[test]
fn exit_codes() {
    let bad_header = pragrate(
        &["codec", "decode"],
        Some("# pragrate-codec mode=universal\n"),
    );
    assert_eq!(bad_header.status.code(), Some(2));
    let bad_symbol = pragrate(&["codec", "encode", "--alphabet", "ab"], Some("abc\n"));
    assert_eq!(bad_symbol.status.code(), Some(2));
    let too_big = pragrate(
        &["codec", "decode"],
        Some("# pragrate-codec mode=universal m=2 n=2 alphabet=ab count=1\n000\n"),
    );
    assert_eq!(too_big.status.code(), Some(2));
    let cap = pragrate(
        &[
            "limits",
            "--source",
            "0.3,0.3,0.4",
            "--n",
            "3000",
            "--eps",
            "0.1",
            "--cap-types",
            "1000",
        ],
        None,
    );
    assert_eq!(cap.status.code(), Some(3));
    let both = pragrate(
        &[
            "ladder", "--source", "0.2,0.8", "--n", "5", "--eps", "0.1", "--delta", "0.1",
        ],
        None,
    );
    assert_eq!(both.status.code(), Some(2));
    let bad_source = pragrate(
        &["ladder", "--source", "0.2,0.7", "--n", "5", "--eps", "0.1"],
        None,
    );
    assert_eq!(bad_source.status.code(), Some(2));
}

#[test]
fn config_file_and_source_file() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("p.json");
    std::fs::write(&src, "[0.2, 0.8]\n").unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"source": "{}", "n": 50, "eps": [0.01444], "format": "markdown"}}"#,
            src.display()
        ),
    )
    .unwrap();
    let md = ok(&["ladder", "--config", cfg.to_str().unwrap()]);
    assert!(md.contains("| 50 | 0.01444 | 0.840 |"));
    let overridden = ok(&[
        "ladder",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(overridden.starts_with("n,epsilon,delta,exact"));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "ladder",
        "--source",
        "0.5,0.3,0.2",
        "--n",
        "10..30:10",
        "--eps",
        "0.001,0.01",
        "--format",
        "json",
    ];
    assert_eq!(ok(&args), ok(&args));
    let args = ["census", "--m", "3", "--h", "1.2", "--n", "5..25:5"];
    assert_eq!(ok(&args), ok(&args));
}
