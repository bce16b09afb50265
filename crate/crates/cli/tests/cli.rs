use std::path::Path;
use std::process::{Command, Output};

use fluor_core::scenarios::DataTable;

fn sim(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sim"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("sim runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn dynamics_writes_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = sim(
        &["dynamics", "--set", "time_span=200 ns", "--set", "dt=1 ns", "--out", out.to_str().unwrap()],
        &[("SIM_THREADS", "2")],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = DataTable::parse(&read(&out, "dynamics.dat")).unwrap();
    assert_eq!(data.rows.len(), 201);
    assert_eq!(data.columns[0], "t");
    DataTable::parse(&read(&out, "dynamics.peaks.dat")).unwrap();
    let manifest = read(&out, "manifest.txt");
    assert!(manifest.starts_with("timestamp_unix = "));
    assert!(manifest.contains("config.time_span = 0.2 us"));
    assert!(manifest.contains("cavity_levels_used = 12"));
}

#[test]
fn identical_configs_give_identical_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# short Rabi run\nrabi = 20 MHz\ntime_span = 100 ns\ndt = 2 ns\n").unwrap();
    let mut texts = Vec::new();
    for (k, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("r{k}"));
        let o = sim(
            &["dynamics", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            &[("SIM_THREADS", threads)],
        );
        assert!(o.status.success());
        texts.push((read(&out, "dynamics.dat"), read(&out, "dynamics.peaks.dat")));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["dynamics", "--set", "kapa=1 MHz", "--out", out],
        vec!["dynamics", "--set", "rabi=37", "--out", out],
        vec!["nonsense", "--out", out],
        vec!["fit", "--out", out],
        vec!["dynamics", "--config", "/nonexistent/cfg", "--out", out],
    ] {
        let o = sim(&args, &[]);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = sim(&["dynamics", "--out", out], &[("SIM_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // a resonant port drive has no displaced frame
    let dir = tempfile::tempdir().unwrap();
    let o = sim(
        &["spectrum", "--port-drive", "--set", "port_drive=10 MHz", "--set", "omega_d=6777 MHz", "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("drive"));
}

#[test]
fn fit_scenario_reads_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = DataTable::new(&[("x", "MHz"), ("y", "arb")]);
    for k in 0..201 {
        let x = -10.0 + 0.1 * k as f64;
        t.push(vec![x, 2.0 / (1.0 + ((x - 1.5) / 0.75).powi(2)) + 0.1]);
    }
    let input = dir.path().join("line.dat");
    t.write(&input).unwrap();
    let out = dir.path().join("fit");
    let o = sim(
        &["fit", "--set", "fit_kind=lorentzian", "--set", &format!("fit_input={}", input.display()), "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = DataTable::parse(&read(&out, "fit.params.dat")).unwrap();
    let v = p.column("value").unwrap();
    assert!((v[0] - 1.5).abs() < 1e-6);
    assert!((v[1] - 1.5).abs() < 1e-6);
}
