use std::path::Path;
use std::process::{Command, Output};

use oneway::io;
use oneway_core::bench::{benchmark, BenchmarkKind};
use oneway_core::rectangles::RectangleCertificate;
use oneway_core::{FunctionTable, JointDistribution};

fn oneway(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oneway"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixtures(dir: &Path) {
    let xor = FunctionTable::from_fn(2, 2, 2, |x, y| (x ^ y) as u32).unwrap();
    io::save_function(&dir.join("xor.json"), &xor).unwrap();
    io::save_distribution(&dir.join("uniform.json"), &JointDistribution::uniform(2, 2).unwrap()).unwrap();
    let mu = JointDistribution::from_weights(2, 3, vec![1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap();
    io::save_distribution(&dir.join("product.json"), &mu).unwrap();
}

#[test]
fn measure_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let o = oneway(d, &["bench", "gen", "--kind", "gt", "--n", "4", "--out", "gt4.json"]);
    assert!(o.status.success());
    let o = oneway(d, &["measure", "vc", "--fn", "gt4.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("vc=1\n"));
    let o = oneway(d, &["measure", "mi", "--dist", "product.json"]);
    assert_eq!(stdout(&o), "mi_bits=0.0\n");
    let o = oneway(
        d,
        &["measure", "rec", "--fn", "xor.json", "--dist", "uniform.json", "--eps", "0.1", "--exact"],
    );
    assert!(stdout(&o).starts_with("rec_bits=1.0\n"));
    let o = oneway(d, &["measure", "dopt", "--fn", "xor.json", "--dist", "uniform.json", "--eps", "0"]);
    assert!(stdout(&o).starts_with("dopt_bits=1\n"));
    let o = oneway(d, &["measure", "minentropy", "--dist", "uniform.json"]);
    assert_eq!(stdout(&o), "minentropy_bits=1.0\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    assert_eq!(oneway(d, &["--help"]).status.code(), Some(0));
    assert_eq!(oneway(d, &["measure", "frobnicate"]).status.code(), Some(1));
    assert_eq!(oneway(d, &["measure", "vc", "--fn", "missing.json"]).status.code(), Some(1));
    std::fs::write(d.join("bad.json"), r#"{"x_size":1,"y_size":2,"z_size":2,"partial":false,"values":[[0,7]]}"#).unwrap();
    let o = oneway(d, &["measure", "vc", "--fn", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(0, 1)"));
    let o = oneway(d, &["measure", "dopt", "--fn", "xor.json", "--dist", "uniform.json", "--eps", "-0.5"]);
    assert_eq!(o.status.code(), Some(1));

    // A 25-column table exceeds the VC search cap.
    let wide = FunctionTable::from_fn(2, 25, 2, |x, y| ((x + y) % 2) as u32).unwrap();
    io::save_function(&d.join("wide.json"), &wide).unwrap();
    let o = oneway(d, &["measure", "vc", "--fn", "wide.json", "--json", "err.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("err.json")).unwrap()).unwrap();
    assert_eq!(err["schema_version"], 1);
    assert_eq!(err["error"]["code"], 2);
    assert_eq!(err["error"]["kind"], "cap_exceeded");

    // XOR cannot be computed with error below 1/2 without communication,
    // and a 13-row table exceeds the partition search cap.
    let big = benchmark(BenchmarkKind::GreaterThan, 4).unwrap();
    io::save_function(&d.join("gt4.json"), &big).unwrap();
    io::save_distribution(&d.join("u16.json"), &JointDistribution::uniform(16, 16).unwrap()).unwrap();
    let o = oneway(d, &["measure", "dopt", "--fn", "gt4.json", "--dist", "u16.json", "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rec_certificate_revalidates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = benchmark(BenchmarkKind::InnerProduct, 2).unwrap();
    io::save_function(&d.join("ip.json"), &f).unwrap();
    let mu = JointDistribution::uniform(4, 4).unwrap();
    io::save_distribution(&d.join("u.json"), &mu).unwrap();
    for (flag, eps) in [("--exact", "0.25"), ("--greedy", "0.25"), ("--exact", "0.1")] {
        let o = oneway(
            d,
            &["measure", "rec", "--fn", "ip.json", "--dist", "u.json", "--eps", eps, flag, "--json", "r.json"],
        );
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("r.json")).unwrap()).unwrap();
        let row = &v["rows"][0];
        let list = |s: &serde_json::Value| -> Vec<usize> {
            s.as_str().unwrap().split(';').map(|t| t.parse().unwrap()).collect()
        };
        let cert = RectangleCertificate {
            rows: list(&row[4]),
            g: list(&row[5]).into_iter().map(|g| g as u32).collect(),
            error: row[3].as_f64().unwrap(),
            mass: row[2].as_f64().unwrap(),
            value: row[0].as_f64().unwrap(),
        };
        cert.verify(&f, &mu, eps.parse().unwrap()).unwrap();
    }
}

#[test]
fn protocol_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = oneway(
        d,
        &["bench", "gen", "--kind", "gt", "--n", "4", "--out", "gt4.json", "--dist-out", "u.json"],
    );
    assert!(o.status.success());
    let run = |csv: &str, json: &str, threads: &str| {
        let o = oneway(
            d,
            &[
                "protocol", "run", "--fn", "gt4.json", "--dist", "u.json", "--eps", "0.2", "--m", "5",
                "--trials", "500", "--seed", "11", "--truncate", "--threads", threads, "--csv", csv,
                "--json", json,
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let a = run("a.csv", "a.json", "1");
    let b = run("b.csv", "b.json", "3");
    assert_eq!(a, b);
    let read = |p: &str| std::fs::read(d.join(p)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.json"), read("b.json"));
    let csv = String::from_utf8(read("a.csv")).unwrap();
    assert!(csv.starts_with(
        "fn,dist,eps,m,mode,truncate,mean_m1_bits,max_m1_bits,m2_bits,error_rate,abort_rate,mi_bits,vc_or_pdim\n"
    ));
    assert!(csv.contains(",5,independent,true,"));
}

#[test]
fn nonboolean_and_calibrate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = FunctionTable::from_fn(8, 8, 4, |x, y| ((x + y) % 4) as u32).unwrap();
    io::save_function(&d.join("f.json"), &f).unwrap();
    io::save_distribution(&d.join("u.json"), &JointDistribution::uniform(8, 8).unwrap()).unwrap();
    let o = oneway(
        d,
        &[
            "protocol", "run", "--fn", "f.json", "--dist", "u.json", "--eps", "0.1", "--m", "7",
            "--nonboolean", "--trials", "200", "--csv", "n.csv",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("m2_bits=14\n"));
    let o = oneway(
        d,
        &[
            "protocol", "calibrate", "--fn", "f.json", "--dist", "u.json", "--eps", "0.1",
            "--nonboolean", "--trials", "300", "--seed", "5",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("target=0.30000000000000004\n"), "{out}");
}

#[test]
fn extractor_and_quantum_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = oneway(d, &["bench", "gen", "--kind", "ip", "--n", "3", "--out", "ip3.json"]);
    assert!(o.status.success());
    let o = oneway(
        d,
        &["extractor", "audit", "--fn", "ip3.json", "--eps", "0.2", "--rec", "--leak", "1", "--csv", "x.csv"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("implication_ok=true\n"));
    assert!(stdout(&o).contains("largerec_holds=true\n"));
    let csv = std::fs::read_to_string(d.join("x.csv")).unwrap();
    assert!(csv.starts_with("k,bias,is_strong,exact,rec_value,margin\n"));
    assert_eq!(csv.lines().count(), 5);

    let o = oneway(d, &["quantum", "check", "--suite", "fano", "--trials", "40", "--seed", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("violations=0\n"));
    assert_eq!(oneway(d, &["quantum", "check", "--suite", "nope"]).status.code(), Some(1));
}

#[test]
fn npm_bench_writes_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = oneway(
        d,
        &["bench", "gen", "--kind", "npm", "--n", "2", "--out", "npm.json", "--dist-out", "npm_mu.json"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = io::load_function(&d.join("npm.json")).unwrap();
    let mu = io::load_distribution(&d.join("npm_mu.json")).unwrap();
    assert_eq!((f.x_size(), f.y_size()), (mu.x_size(), mu.y_size()));
}
