use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gramlin::io::write_matrix;
use gramlin::{repair_compress, CsrvMatrix, DenseMatrix};

const EXAMPLE_CSV: &str = "1.2,3.4,5.6,0,2.3\n2.3,0,2.3,4.5,1.7\n1.2,3.4,2.3,4.5,0\n\
                           3.4,0,5.6,0,2.3\n2.3,0,2.3,4.5,0\n1.2,3.4,2.3,4.5,3.4\n";

fn gramlin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gramlin"))
        .args(args)
        .env_remove("GRAMLIN_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in:\n{text}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn example_matrix(dir: &Path) -> PathBuf {
    let path = dir.join("example.csv");
    fs::write(&path, EXAMPLE_CSV).unwrap();
    path
}

#[test]
fn example_re32_payload_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = example_matrix(dir.path());
    let out = dir.path().join("example.grlm");
    let o = gramlin(&[
        "compress",
        p(&csv),
        "-o",
        p(&out),
        "--variant",
        "re32",
        "--blocks",
        "1",
    ]);
    assert!(o.status.success(), "{o:?}");
    let info = stdout(&gramlin(&["info", p(&out)]));
    assert_eq!(value(&info, "variant"), "re32");
    // RePair on this matrix yields |R| = 5, |C| = 16.
    let m = gramlin::io::read_matrix(&csv, None).unwrap();
    let g = repair_compress(&CsrvMatrix::build(&m));
    let codes = g.final_string().len() + 2 * g.rules().len();
    assert_eq!(value(&info, "payload_codes"), codes.to_string());
    assert!(codes <= 30);
    assert_eq!(value(&info, "payload_bytes"), (48 + 4 * codes).to_string());
    for v in ["csrv", "re32", "reiv", "reans"] {
        assert!(info.contains(&format!("size.{v}=")));
    }
}

#[test]
fn binary_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("m.bin");
    let entries: Vec<f64> = (0..37 * 11)
        .map(|i| {
            if i % 3 == 0 {
                0.0
            } else {
                ((i * 7919) % 13) as f64 - 6.5
            }
        })
        .collect();
    write_matrix(&src, &DenseMatrix::new(37, 11, entries).unwrap(), None).unwrap();
    for variant in ["csrv", "re32", "reiv", "reans"] {
        let packed = dir.path().join(format!("m.{variant}.grlm"));
        let back = dir.path().join(format!("back.{variant}.bin"));
        let c = gramlin(&[
            "compress",
            p(&src),
            "-o",
            p(&packed),
            "--variant",
            variant,
            "--blocks",
            "3",
        ]);
        assert!(c.status.success(), "{c:?}");
        let d = gramlin(&["decompress", p(&packed), "-o", p(&back)]);
        assert!(d.status.success(), "{d:?}");
        assert_eq!(
            fs::read(&src).unwrap(),
            fs::read(&back).unwrap(),
            "{variant}"
        );
    }
}

#[test]
fn truncated_container_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let csv = example_matrix(dir.path());
    let out = dir.path().join("example.grlm");
    assert!(gramlin(&["compress", p(&csv), "-o", p(&out)])
        .status
        .success());
    let bytes = fs::read(&out).unwrap();
    let cut = dir.path().join("cut.grlm");
    fs::write(&cut, &bytes[..bytes.len() - 3]).unwrap();
    let o = gramlin(&["info", p(&cut)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(gramlin(&["compress", p(&missing)]).status.code(), Some(3));
    assert_eq!(
        gramlin(&["compress", "x.csv", "--variant", "zip"])
            .status
            .code(),
        Some(2)
    );
    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "1,2\n3\n").unwrap();
    assert_eq!(gramlin(&["compress", p(&ragged)]).status.code(), Some(5));
    let junk = dir.path().join("junk.csv");
    fs::write(&junk, "1,abc\n").unwrap();
    assert_eq!(gramlin(&["compress", p(&junk)]).status.code(), Some(4));
    let csv = example_matrix(dir.path());
    assert_eq!(
        gramlin(&["compress", p(&csv), "--blocks", "7"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn decompress_to_stdout_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let csv = example_matrix(dir.path());
    let out = dir.path().join("f.grlm");
    assert!(
        gramlin(&["compress", p(&csv), "-o", p(&out), "--variant", "reans"])
            .status
            .success()
    );
    let text = stdout(&gramlin(&["decompress", p(&out)]));
    assert_eq!(text, EXAMPLE_CSV);
    let mtx = stdout(&gramlin(&["decompress", p(&out), "--format", "mtx"]));
    assert!(mtx.starts_with("%%MatrixMarket"));
    // Re-reading the Matrix Market output gives the same matrix.
    let mtx_path = dir.path().join("f.mtx");
    fs::write(&mtx_path, mtx).unwrap();
    let again = dir.path().join("g.grlm");
    assert!(gramlin(&["compress", p(&mtx_path), "-o", p(&again)])
        .status
        .success());
    assert_eq!(stdout(&gramlin(&["decompress", p(&again)])), text);
}

#[test]
fn reorder_reports_every_block() {
    let dir = tempfile::tempdir().unwrap();
    let csv = example_matrix(dir.path());
    let out = dir.path().join("r.grlm");
    let o = gramlin(&[
        "reorder",
        p(&csv),
        "--blocks",
        "2",
        "--reorder",
        "best",
        "--prune",
        "full",
        "-o",
        p(&out),
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("block=")).count(), 2);
    for alg in ["none", "pathcover", "pathcover+", "mwm", "tsp"] {
        assert!(text.contains(&format!("bytes.{alg}=")), "{text}");
    }
    let identity: usize = value(&text, "identity_bytes").parse().unwrap();
    let chosen: usize = value(&text, "chosen_bytes").parse().unwrap();
    assert!(chosen <= identity);
    assert_eq!(stdout(&gramlin(&["decompress", p(&out)])), EXAMPLE_CSV);
}

#[test]
fn bench_key_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv = example_matrix(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_gramlin"))
        .args(["bench", p(&csv), "--iters", "20", "--variant", "reans"])
        .env("GRAMLIN_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.contains('=')));
    assert_eq!(value(&text, "workers"), "2");
    assert_eq!(value(&text, "blocks"), "2");
    assert_eq!(value(&text, "iterations_run"), "20");

    // A stored container is benchmarked as stored, and variants agree bitwise.
    let mut finals = Vec::new();
    for variant in ["csrv", "re32", "reiv", "reans"] {
        let out = dir.path().join(format!("{variant}.grlm"));
        let c = gramlin(&[
            "compress",
            p(&csv),
            "-o",
            p(&out),
            "--variant",
            variant,
            "--blocks",
            "1",
            "--workers",
            "1",
        ]);
        assert!(c.status.success());
        let b = stdout(&gramlin(&[
            "bench",
            p(&out),
            "--iters",
            "50",
            "--workers",
            "1",
        ]));
        assert_eq!(value(&b, "variant"), variant);
        finals.push(value(&b, "final_x").to_string());
    }
    // csrv sums rows term by term; the grammar variants share one grammar.
    assert!(finals[1..].iter().all(|f| *f == finals[1]), "{finals:?}");
}

#[test]
fn zero_matrix_bench_exits_early() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("z.csv");
    fs::write(&csv, "0,0\n0,0\n").unwrap();
    let text = stdout(&gramlin(&[
        "bench",
        p(&csv),
        "--iters",
        "3",
        "--workers",
        "1",
    ]));
    assert_eq!(
        value(&text, "early_exit"),
        "zero infinity norm at iteration 1"
    );
    assert_eq!(value(&text, "final_x"), "1e0,1e0");
}
