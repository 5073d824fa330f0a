use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = "\
seed = 11
[scenario]
layout = square
half_side_m = 1000
c_sigma_t_m = 1.8
t_d_s = 100
[grid]
x_min = -100
x_max = 100
y_min = -100
y_max = 100
nx = 3
ny = 3
[ellipse]
points = 0,0; 250,-400
[sweep]
offsets_drms = 0, 0.5, 1, 2, 4, 20
trials = 400
[session]
message_hex = c0ffee
clock_s = 150
[pingpong]
message_hex = 5a
";

const COMMANDS: [&str; 5] = ["crb-surface", "ellipse", "spoof-sweep", "session", "pingpong-demo"];

fn run_with(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoqrypt")).args(args).env("GEOQRYPT_THREADS", threads).output().unwrap()
}

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join(format!("{command}.conf"));
    std::fs::write(&path, config).unwrap();
    let mut args = vec![command, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run_with(&args, "0")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn crb_surface_rows_and_center_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&run(dir.path(), "crb-surface", CONFIG, &[]));
    assert!(out.starts_with("x_m,y_m,drms_m,sigma_x_m,sigma_y_m,rho\n"));
    assert!(!out.contains('\r'));
    let rows = rows(&out);
    assert_eq!(rows.len(), 9);
    let center = &rows[4];
    assert_eq!((center[0].as_str(), center[1].as_str()), ("0.00000000", "0.00000000"));
    let drms: f64 = center[2].parse().unwrap();
    assert!((drms - 2.08).abs() < 0.01, "{drms}");
    for r in &rows {
        for v in &r[2..] {
            let digits = v.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
            assert_eq!(digits.trim_start_matches('0').len(), 9, "{v}");
        }
    }
}

#[test]
fn crb_surface_singular_points_are_nan() {
    let dir = tempfile::tempdir().unwrap();
    let config = CONFIG.replace("x_min = -100", "x_min = 1000").replace("x_max = 100", "x_max = 1000")
        .replace("y_min = -100", "y_min = 1000").replace("y_max = 100", "y_max = 1000")
        .replace("nx = 3", "nx = 1").replace("ny = 3", "ny = 1");
    let out = stdout(&run(dir.path(), "crb-surface", &config, &[]));
    assert_eq!(out.lines().nth(1).unwrap(), "1000.00000,1000.00000,nan,nan,nan,nan");
}

#[test]
fn ellipse_coverage_and_orientation() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&run(dir.path(), "ellipse", CONFIG, &[]));
    for r in rows(&out) {
        let coverage: f64 = r[6].parse().unwrap();
        assert_eq!(format!("{coverage:.6}"), "0.988891");
        let theta: f64 = r[4].parse().unwrap();
        assert!((0.0..std::f64::consts::PI).contains(&theta));
    }
    let unit = CONFIG.replace("points = 0,0; 250,-400", "points = 5,5\nscale = 1\ncovariance = 1, 0, 1");
    let out = stdout(&run(dir.path(), "ellipse", &unit, &[]));
    let r = &rows(&out)[0];
    assert_eq!(&r[2..4], ["1.00000000", "1.00000000"]);
}

#[test]
fn spoof_sweep_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&run(dir.path(), "spoof-sweep", CONFIG, &[]));
    assert!(out.starts_with("offset_m,pass_rate,trials,seed\n"));
    let rows = rows(&out);
    let rates: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((rates[0] - 0.99).abs() < 0.02, "{rates:?}");
    let sigma = (0.25f64 / 400.0).sqrt();
    for w in rates.windows(2) {
        assert!(w[1] <= w[0] + 2.0 * sigma, "{rates:?}");
    }
    assert_eq!(*rates.last().unwrap(), 0.0);
    assert!(rows.iter().all(|r| r[2] == "400" && r[3] == "11"));
}

#[test]
fn session_result_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&run(dir.path(), "session", CONFIG, &[]));
    assert_eq!(out.lines().last().unwrap(), "accept,,c0ffee,150");
    let locked = CONFIG.replace("clock_s = 150", "clock_s = 50");
    let out = stdout(&run(dir.path(), "session", &locked, &[]));
    assert_eq!(out.lines().last().unwrap(), "reject,time_locked,,50");
    let moved = CONFIG.replace("clock_s = 150", "clock_s = 150\ndevice = relocated\ndisplacement_m = 42, 0");
    let out = stdout(&run(dir.path(), "session", &moved, &[]));
    assert_eq!(out.lines().last().unwrap(), "reject,qlv_failed,,150");
    let missing = CONFIG.replace("clock_s = 150", "clock_s = 150\ndevice = missing_share\nmissing_rs = 2");
    let out = stdout(&run(dir.path(), "session", &missing, &[]));
    assert_eq!(out.lines().last().unwrap(), "reject,instruction_incomplete,,150");
}

#[test]
fn pingpong_demo_decodes_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&run(dir.path(), "pingpong-demo", CONFIG, &[]));
    let msg: String = rows(&out).iter().filter(|r| r[1] == "message").map(|r| r[3].clone()).collect();
    assert_eq!(msg, "01011010");
    assert!(rows(&out).iter().filter(|r| r[1] == "control").all(|r| r[6] == "pass"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = stdout(&run(dir.path(), "spoof-sweep", CONFIG, &["--seed", "11"]));
    let b = stdout(&run(dir.path(), "spoof-sweep", &CONFIG.replace("seed = 11", "seed = 3"), &["--seed", "11"]));
    assert_eq!(a, b);
    let c = stdout(&run(dir.path(), "spoof-sweep", CONFIG, &["--seed", "12"]));
    assert_ne!(a, c);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("surface.csv");
    let o = run(dir.path(), "crb-surface", CONFIG, &["--out", target.to_str().unwrap()]);
    assert!(stdout(&o).is_empty());
    let expected = stdout(&run(dir.path(), "crb-surface", CONFIG, &[]));
    assert_eq!(std::fs::read_to_string(&target).unwrap(), expected);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        CONFIG.replace("nx = 3", "nx = three"),
        CONFIG.replace("nx = 3", "nx = 0"),
        CONFIG.replace("[grid]", "[gird]"),
        CONFIG.replace("nx = 3", "nx = 3\nbogus = 1"),
        CONFIG.replace("layout = square\n", ""),
        CONFIG.replace("c_sigma_t_m = 1.8", "sigma_t_s = 1e-9\nc_sigma_t_m = 1.8"),
        "[scenario\n".to_string(),
    ];
    for config in &cases {
        let o = run(dir.path(), "crb-surface", config, &[]);
        assert_eq!(o.status.code(), Some(2), "{config}");
        assert!(o.stdout.is_empty());
    }
    let o = run(dir.path(), "session", &CONFIG.replace("message_hex = c0ffee", "message_hex = c0f"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), "spoof-sweep", &CONFIG.replace("trials = 400", "trials = 10"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_with(&["crb-surface", "--config", "/nonexistent/geoqrypt.conf"], "0");
    assert_eq!(o.status.code(), Some(2));
    let path = dir.path().join("ok.conf");
    std::fs::write(&path, CONFIG).unwrap();
    let o = run_with(&["crb-surface", "--config", path.to_str().unwrap()], "many");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let collinear = CONFIG.replace(
        "layout = square\nhalf_side_m = 1000",
        "stations = 10,0; 20,0; -15,0; 40,0",
    );
    let o = run(dir.path(), "ellipse", &collinear, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(dir.path(), "crb-surface", CONFIG, &["--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

/// Every command is byte-identical across reruns and across 1 and 8 threads.
#[test]
fn byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("all.conf");
    std::fs::write(&path, CONFIG).unwrap();
    for command in COMMANDS {
        let args = [command, "--config", path.to_str().unwrap()];
        let outputs: Vec<Vec<u8>> = ["1", "1", "8", "8"]
            .iter()
            .map(|t| {
                let o = run_with(&args, t);
                assert!(o.status.success(), "{command}");
                o.stdout
            })
            .collect();
        assert!(!outputs[0].is_empty());
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{command} output varies");
    }
}
