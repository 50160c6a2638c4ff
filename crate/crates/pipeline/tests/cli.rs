use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use polariton_pipeline::Manifest;
use tempfile::TempDir;

fn polariton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polariton"))
        .args(args)
        .env_remove("POLARITON_WORKERS")
        .output()
        .unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = polariton(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

fn p(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn two_spectrum_has_one_row_per_pair() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "two-spectrum",
        "--n",
        "9",
        "--phi",
        "0.3",
        "--out",
        p(tmp.path()),
    ]);
    assert_eq!(rows(&tmp.path().join("energies.csv")), 36);
    let m = Manifest::read(tmp.path()).unwrap();
    let names: Vec<_> = m.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, ["energies.csv", "plot.py"]);
    assert_eq!(m.files[0].rows, Some(36));
    assert!(m.failures.is_empty());
    assert_eq!(m.config[0]["n"], 9);
    assert!(m.wall_seconds >= 0.0 && m.finished_unix >= m.started_unix);
}

#[test]
fn manifest_checksums_match_files() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "analyze",
        "--n",
        "12",
        "--phi",
        "0.2",
        "--out",
        p(tmp.path()),
    ]);
    let m = Manifest::read(tmp.path()).unwrap();
    for f in &m.files {
        let bytes = fs::read(tmp.path().join(&f.path)).unwrap();
        assert_eq!(
            polariton_pipeline::output::sha256_hex(&bytes),
            f.sha256,
            "{}",
            f.path
        );
    }
    let header = fs::read_to_string(tmp.path().join("analysis.csv")).unwrap();
    assert!(header.starts_with("state_id,j,k_max,parity,entropy,ipr_loc,is_edge,confidence\n"));
}

#[test]
fn identical_config_gives_identical_checksums() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        run_ok(&[
            "entanglement-map",
            "--n",
            "14",
            "--phi",
            "0.1",
            "--workers",
            workers,
            "--out",
            p(dir.path()),
        ]);
    }
    let (ma, mb) = (
        Manifest::read(a.path()).unwrap(),
        Manifest::read(b.path()).unwrap(),
    );
    assert_eq!(ma.files, mb.files);
    assert_eq!(rows(&a.path().join("entanglement.csv")), 91);
}

#[test]
fn harper_grid_size() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "butterfly-harper",
        "--n",
        "20",
        "--alpha-step",
        "0.05",
        "--out",
        p(tmp.path()),
    ]);
    assert_eq!(rows(&tmp.path().join("hofstadter.csv")), 20 * 21);
}

#[test]
fn flags_override_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "n = 20\nphi = 0.25\nworkers = 2\n").unwrap();
    let out = tmp.path().join("o");
    run_ok(&[
        "single-spectrum",
        "-c",
        cfg.to_str().unwrap(),
        "--n",
        "11",
        "--out",
        p(&out),
    ]);
    let m = Manifest::read(&out).unwrap();
    assert_eq!(
        (m.config[0]["n"].as_u64(), m.config[0]["phi"].as_f64()),
        (Some(11), Some(0.25))
    );
    assert_eq!(m.workers, 2);
    assert_eq!(rows(&out.join("energies.csv")), 11);
}

#[test]
fn worker_count_from_environment() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polariton"))
        .args(["single-spectrum", "--n", "6", "--out", p(tmp.path())])
        .env("POLARITON_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(Manifest::read(tmp.path()).unwrap().workers, 3);
}

#[test]
fn compare_table_and_summary() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "compare-fig3a",
        "--n",
        "30",
        "--phi",
        "0.02",
        "--j",
        "3",
        "--out",
        p(tmp.path()),
    ]);
    let m = Manifest::read(tmp.path()).unwrap();
    let s = &m.items[0].summary;
    let count = s["levels_compared"].as_u64().unwrap() as usize;
    assert!(count > 0);
    assert_eq!(rows(&tmp.path().join("compare.csv")), count);
    assert!(s["max_rel_dev"].as_f64().unwrap().is_finite());
}

#[test]
fn butterfly_aah_sweep_matches_serial_and_whole_run() {
    let tmp = TempDir::new().unwrap();
    let sweep = tmp.path().join("sweep.toml");
    fs::write(
        &sweep,
        "n = 24\nphi = 0.02\n[[item]]\ntask = \"butterfly-aah\"\nj_range = [1, 23]\n",
    )
    .unwrap();
    let (serial, parallel, whole) = (
        tmp.path().join("s"),
        tmp.path().join("p"),
        tmp.path().join("w"),
    );
    run_ok(&[
        "sweep",
        sweep.to_str().unwrap(),
        "--workers",
        "1",
        "--out",
        p(&serial),
    ]);
    run_ok(&[
        "sweep",
        sweep.to_str().unwrap(),
        "--workers",
        "4",
        "--out",
        p(&parallel),
    ]);
    run_ok(&[
        "butterfly-aah",
        "--n",
        "24",
        "--phi",
        "0.02",
        "--out",
        p(&whole),
    ]);
    let read = |d: &Path| fs::read(d.join("butterfly_aah.csv")).unwrap();
    assert_eq!(read(&serial), read(&parallel));
    assert_eq!(read(&serial), read(&whole));
    assert_eq!(Manifest::read(&serial).unwrap().items.len(), 23);
}

#[test]
fn failing_item_does_not_stop_the_sweep() {
    let tmp = TempDir::new().unwrap();
    let sweep = tmp.path().join("sweep.toml");
    fs::write(
        &sweep,
        "phi = 0.2\n\
         [[item]]\ntask = \"two-spectrum\"\nn = 8\n\
         [[item]]\ntask = \"two-spectrum\"\nn = 300\nbudget_mib = 1\n\
         [[item]]\ntask = \"single-spectrum\"\nn = 5\n",
    )
    .unwrap();
    let out = tmp.path().join("o");
    let res = polariton(&["sweep", sweep.to_str().unwrap(), "--out", p(&out)]);
    assert_eq!(res.status.code(), Some(6));
    let m = Manifest::read(&out).unwrap();
    assert_eq!(m.failures.len(), 1);
    assert_eq!(m.failures[0].item, 1);
    assert_eq!(m.failures[0].category, "memory-budget");
    assert_eq!(m.failures[0].exit_code, 3);
    // 28 two-excitation rows from n = 8 and 5 single-excitation rows.
    assert_eq!(rows(&out.join("energies.csv")), 28 + 5);
}

#[test]
fn empty_sweep_is_a_clean_no_op() {
    let tmp = TempDir::new().unwrap();
    let sweep = tmp.path().join("empty.toml");
    fs::write(&sweep, "").unwrap();
    let out = tmp.path().join("o");
    run_ok(&["sweep", sweep.to_str().unwrap(), "--out", p(&out)]);
    let m = Manifest::read(&out).unwrap();
    assert!(m.files.is_empty() && m.items.is_empty() && m.failures.is_empty());
}

#[test]
fn exit_codes_by_category() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let code = |args: &[&str]| polariton(args).status.code();
    assert_eq!(code(&["two-spectrum", "--bogus"]), Some(2));
    assert_eq!(
        code(&["two-spectrum", "--phi", "7", "--out", p(&out)]),
        Some(2)
    );
    assert_eq!(code(&["sweep", "/nonexistent/sweep.toml"]), Some(2));
    assert_eq!(
        code(&[
            "two-spectrum",
            "--n",
            "300",
            "--budget-mib",
            "1",
            "--out",
            p(&out)
        ]),
        Some(3)
    );
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    assert_eq!(
        code(&[
            "single-spectrum",
            "--n",
            "5",
            "--out",
            p(&blocker.join("x"))
        ]),
        Some(5)
    );
    // The failed run still leaves a manifest describing the failure.
    let m = Manifest::read(&out).unwrap();
    assert_eq!(m.failures[0].category, "memory-budget");
}
