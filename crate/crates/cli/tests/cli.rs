use std::process::{Command, Output};

fn cpless(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpless"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const CONFIG: &str = r#"
schemes = ["scfde-cp", "scfde-nocp", "mlse", "flat"]
profile = "two-path"
n = 64
d_list = [0, 8]
snr_db = [5, 15]
frames = 8
frames_per_realization = 3
min_errors = 0
seed = 3
"#;

#[test]
fn simulate_writes_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("ser.csv");
    let run = |threads: &str| {
        let res = cpless(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        std::fs::read_to_string(&out).unwrap()
    };
    let first = run("1");
    assert!(first.starts_with("scheme,snr_db,D,trials,errors,ser,seed\n"));
    assert_eq!(first.lines().count(), 1 + 2 * 5);
    assert_eq!(run("3"), first);
    let plot = std::fs::read_to_string(dir.path().join("ser.dat")).unwrap();
    assert!(plot.starts_with("# symbol error rate"));
    assert_eq!(plot.matches("# index").count(), 5);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("ser.csv");
    let res = cpless(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(res.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",99")));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "n = 64\nframe_size = 12\n").unwrap();
    let out = dir.path().join("ser.csv");
    let res = cpless(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("frame_size"));
    assert!(!out.exists());
}

#[test]
fn poles_table_is_reciprocal() {
    let res = cpless(&[
        "analyze",
        "poles",
        "--h0",
        "1,0",
        "--h1",
        "0.5,-0.25",
        "--d",
        "2",
        "--k",
        "0.1",
    ]);
    assert!(res.status.success());
    let text = stdout(&res);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,re,im,magnitude,pair_index"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let partner: usize = row[4].parse().unwrap();
        let m: f64 = row[3].parse().unwrap();
        let pm: f64 = rows[partner][3].parse().unwrap();
        assert!((m * pm - 1.0).abs() < 1e-9);
    }
}

#[test]
fn poles_accept_negative_components() {
    let res = cpless(&[
        "analyze", "poles", "--h0", "-0.3,-1", "--h1", "1,-0.2", "--d", "1", "--k", "0",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(
        cpless(&["analyze", "poles", "--h0", "1", "--h1", "1,0", "--d", "1", "--k", "0"])
            .status
            .code()
            != Some(0)
    );
}

#[test]
fn gamma_prints_decay_and_samples() {
    let res = cpless(&[
        "analyze",
        "gamma",
        "--profile",
        "two-path",
        "--n",
        "64",
        "--mode",
        "mmse",
        "--n0",
        "0.1",
    ]);
    assert!(res.status.success());
    let text = stdout(&res);
    assert!(text.contains("# decay rate head"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 64);
    assert!(!cpless(&[
        "analyze",
        "gamma",
        "--profile",
        "rician",
        "--n",
        "64",
        "--mode",
        "mmse",
        "--n0",
        "0.1"
    ])
    .status
    .success());
}

#[test]
fn selftest_passes() {
    let res = cpless(&["selftest"]);
    assert!(res.status.success());
    let text = stdout(&res);
    assert!(text.lines().count() >= 8);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
