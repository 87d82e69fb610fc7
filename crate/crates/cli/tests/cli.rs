use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phz_core::io::{read_grid, write_grid};
use phz_core::metrics::rewrap_error;
use phz_core::phase::wrap_grid;
use phz_core::Grid2D;

fn phz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phz")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = phz(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_unwrap_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "sample-b", "--angle", "135", "--seed", "1", "--size", "48", "-o", p(d)]);
    for f in ["truth.phz", "wrapped.phz", "manifest.txt"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let psi = read_grid(d.join("wrapped.phz")).unwrap();
    for method in ["itoh", "ls", "goldstein", "irls"] {
        let out = d.join(format!("{method}.phz"));
        ok(&["unwrap", "--method", method, "-i", p(&d.join("wrapped.phz")), "-o", p(&out)]);
        assert!(rewrap_error(&read_grid(&out).unwrap(), &psi).unwrap() < 1e-10, "{method}");
        assert!(fs::read_to_string(format!("{}.log", p(&out))).unwrap().starts_with("# method="));
    }

    let truth = p(&d.join("truth.phz")).to_string();
    let csv = ok(&["evaluate", "-t", &truth, "-w", p(&d.join("wrapped.phz")), &truth, p(&d.join("ls.phz"))]);
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["estimate", "rsnr", "ssim", "rewrap_error"]);
    assert_eq!(rows[1][1], "inf");
    assert_eq!(rows[1][2], "1.000000");
    assert_ne!(rows[2][1], "inf");
}

#[test]
fn shifted_estimate_scores_infinite() {
    let dir = tempfile::tempdir().unwrap();
    let truth = Grid2D::from_fn(16, 16, |i, j| (i as f64 * 0.3).sin() * 4.0 + j as f64 * 0.2);
    write_grid(dir.path().join("t.phz"), &truth).unwrap();
    write_grid(dir.path().join("s.phz"), &truth.add_scalar(-7.25)).unwrap();
    let csv = ok(&["evaluate", "-t", p(&dir.path().join("t.phz")), p(&dir.path().join("s.phz"))]);
    assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(1), Some("inf"));

    // the 2x2 fixture from the metric tests
    let t = Grid2D::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    let e = Grid2D::from_rows(&[vec![1.1, 1.9], vec![3.1, 3.9]]).unwrap();
    write_grid(dir.path().join("t2.phz"), &t).unwrap();
    write_grid(dir.path().join("e2.phz"), &e).unwrap();
    let csv = ok(&["evaluate", "-t", p(&dir.path().join("t2.phz")), p(&dir.path().join("e2.phz"))]);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[1], row[2]), ("28.7506", "n/a"));
}

#[test]
fn simulate_generators() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let c = d.join("c");
    ok(&["simulate", "sample-c", "--max", "42", "--size", "64", "-o", p(&c)]);
    assert!((read_grid(c.join("truth.phz")).unwrap().max() - 42.0).abs() < 1e-12);

    let e = d.join("e");
    ok(&["simulate", "sample-e", "--snr-db", "15.7", "--size", "64", "--seed", "2", "-o", p(&e)]);
    let noisy = read_grid(e.join("truth.phz")).unwrap();
    let clean = read_grid({
        ok(&["simulate", "sample-b", "--angle", "135", "--size", "64", "-o", p(&d.join("b"))]);
        d.join("b/truth.phz")
    })
    .unwrap();
    let snr = phz_core::datagen::snr_db(&clean, &noisy).unwrap();
    assert!((snr - 15.7).abs() < 0.01, "{snr}");
    assert_eq!(read_grid(e.join("wrapped.phz")).unwrap(), wrap_grid(&noisy).unwrap());

    for gen in ["sample-d", "phantom"] {
        let out = d.join(gen);
        ok(&["simulate", gen, "--size", "32", "--csv", "-o", p(&out)]);
        assert!(out.join("truth.csv").exists());
    }

    let ds = d.join("ds");
    ok(&["simulate", "phasenet-data", "--count", "3", "--size", "32", "--seed", "5", "-o", p(&ds)]);
    let manifest = fs::read_to_string(ds.join("manifest.tsv")).unwrap();
    assert_eq!(manifest.lines().count(), 4);
    let counts = read_grid(ds.join("00002_count.phz")).unwrap();
    assert!(counts.data().iter().all(|&k| k.fract() == 0.0 && (0.0..=20.0).contains(&k)));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // usage errors
    assert_eq!(phz(&["simulate", "sample-q", "-o", p(d)]).status.code(), Some(2));
    assert_eq!(phz(&["unwrap", "--method", "puma", "-i", "x", "-o", "y"]).status.code(), Some(2));
    assert_eq!(phz(&["simulate", "sample-b", "--angle", "400", "-o", p(d)]).status.code(), Some(2));
    let bad_bounds = phz(&[
        "unwrap", "--method", "pudip", "--eps-min", "5", "--eps-max", "1", "-i", "missing.phz", "-o", "y",
    ]);
    assert_eq!(bad_bounds.status.code(), Some(3), "missing input is reported first");

    // data errors
    assert_eq!(phz(&["unwrap", "--method", "ls", "-i", p(&d.join("nope.phz")), "-o", "y"]).status.code(), Some(3));
    fs::write(d.join("junk.phz"), b"JUNKJUNKJUNK").unwrap();
    assert_eq!(phz(&["unwrap", "--method", "ls", "-i", p(&d.join("junk.phz")), "-o", "y"]).status.code(), Some(3));
    let mut nan = b"PHZ1".to_vec();
    nan.extend_from_slice(&1u32.to_le_bytes());
    nan.extend_from_slice(&2u32.to_le_bytes());
    nan.extend_from_slice(&f64::NAN.to_le_bytes());
    nan.extend_from_slice(&0.0f64.to_le_bytes());
    fs::write(d.join("nan.phz"), nan).unwrap();
    let out = phz(&["unwrap", "--method", "ls", "-i", p(&d.join("nan.phz")), "-o", p(&d.join("o.phz"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
    write_grid(d.join("a.phz"), &Grid2D::zeros(3, 3).add_scalar(1.0)).unwrap();
    write_grid(d.join("b.phz"), &Grid2D::zeros(3, 4)).unwrap();
    assert_eq!(phz(&["evaluate", "-t", p(&d.join("a.phz")), p(&d.join("b.phz"))]).status.code(), Some(3));

    // numerical failure: a learning rate that overflows the loss
    write_grid(d.join("w.phz"), &wrap_grid(&Grid2D::from_fn(8, 8, |i, j| (i * j) as f64 * 0.4)).unwrap()).unwrap();
    let out = phz(&[
        "unwrap", "--method", "pudip", "--stages", "1", "--channels", "4", "--input-channels", "2", "--iters", "30",
        "--lr", "1e300", "-i", p(&d.join("w.phz")), "-o", p(&d.join("p.phz")),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pudip_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "sample-b", "--angle", "90", "--size", "16", "-o", p(d)]);
    let run = |seed: &str, name: &str| {
        let out = d.join(name);
        ok(&[
            "unwrap", "--method", "pudip", "--seed", seed, "--iters", "15", "--stages", "2", "--channels", "8",
            "--input-channels", "4", "-i", p(&d.join("wrapped.phz")), "-o", p(&out),
        ]);
        (fs::read(&out).unwrap(), fs::read_to_string(format!("{}.log", p(&out))).unwrap())
    };
    let (a, log_a) = run("3", "a.phz");
    let (b, log_b) = run("3", "b.phz");
    let (c, _) = run("4", "c.phz");
    assert_eq!(a, b);
    assert_eq!(log_a, log_b);
    assert_ne!(a, c);
    assert!(log_a.contains("# seed=3\n"));
    assert_eq!(log_a.lines().filter(|l| !l.starts_with('#')).count(), 15);
    let psi = read_grid(d.join("wrapped.phz")).unwrap();
    let est = read_grid(d.join("a.phz")).unwrap();
    assert!(wrap_grid(&est).unwrap().max_abs_diff(&psi).unwrap() < 1e-9);
}

#[test]
fn bench_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("sweep.txt");
    fs::write(
        &scenario,
        "name = crops\ngenerator = sample-b\nsize = 32\nsweep = angle: 0, 90, 180\nmethods = ls, irls, pudip\n\
         seeds = 1, 2, 3\niters = 10\nstages = 2\nchannels = 8\ninput_channels = 4\n",
    )
    .unwrap();
    let out = dir.path().join("table.csv");
    let csv = ok(&["bench", p(&scenario), "-o", p(&out)]);
    assert_eq!(fs::read_to_string(&out).unwrap(), csv);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10, "header plus 9 rows");
    assert!(lines[1].starts_with("crops,0,ls,inf,"));
    let pudip: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(&pudip[..3], ["crops", "0", "pudip"]);
    assert_eq!(pudip[6].split(';').count(), 3);

    // identical flags give identical tables, whatever the worker count
    let again = Command::new(env!("CARGO_BIN_EXE_phz"))
        .args(["bench", p(&scenario)])
        .env("PHZ_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(again.stdout).unwrap(), csv);

    let timed = ok(&["bench", p(&scenario), "--timing"]);
    assert!(timed.lines().next().unwrap().ends_with(",wall_ms"));

    let bad = Command::new(env!("CARGO_BIN_EXE_phz"))
        .args(["bench", p(&scenario)])
        .env("PHZ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bench_strict_mode() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.txt");
    fs::write(&scenario, "generator = sample-b\nsize = 16\nangle = 360\nmethods = ls\nseeds = 1\n").unwrap();
    let lenient = phz(&["bench", p(&scenario)]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stdout).contains("error"));
    assert_eq!(phz(&["bench", p(&scenario), "--strict"]).status.code(), Some(4));
}
