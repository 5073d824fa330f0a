//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::{Command, ExitCode};
use std::time::Instant;

use geoqrypt::localization::{
    coverage_probability, crb_grid, error_ellipse, fisher_matrix, ml_estimate, position_covariance, sample_tdoa,
    GridSpec, Scenario,
};
use geoqrypt::orchestrator::{run_session, DeviceModel, RelocationPlan, SessionConfig};
use geoqrypt::qdc::{pingpong_scheduled, pingpong_send, AttackModel, QdcResources, RoundKind};
use geoqrypt::qlv::{spoof_sweep, SweepDirection, VerifyMethod};
use geoqrypt::quantum::{
    apply_gate, fidelity, make_bell_pair, sample_haar_unitary, symplectic_spectrum_pt, teleport, tmsv_covariance,
    Basis, BellOutcome, PureState,
};
use geoqrypt::{rng, Point, SPEED_OF_LIGHT};
use nalgebra::Matrix2;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn square() -> Scenario {
    Scenario::centered_square(1000.0, 1.8).unwrap()
}

fn center_drms(s: &Scenario) -> f64 {
    position_covariance(&fisher_matrix(&s.claim, s).unwrap()).unwrap().drms()
}

fn criterion_1() -> Outcome {
    let s = square();
    let central = GridSpec { x_min: -100.0, x_max: 100.0, y_min: -100.0, y_max: 100.0, nx: 41, ny: 41 };
    let grid = crb_grid(&central, &s).map_err(|e| e.to_string())?;
    let values: Vec<f64> = grid.drms_values().collect();
    if values.len() != 41 * 41 {
        return Err("singular points in the central region".into());
    }
    let (lo, hi) = values.iter().fold((f64::MAX, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let center = center_drms(&s);
    let started = Instant::now();
    let big = GridSpec { nx: 100, ny: 100, ..central };
    crb_grid(&big, &s).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed().as_secs_f64();
    let scaled = 3.0 * center;
    check(
        hi / lo < 1.05 && (center - 2.08).abs() <= 0.05 && scaled >= 7.0 / 1.5 && scaled <= 7.0 * 1.5 && elapsed < 5.0,
        format!("drms {center:.4} m, max/min {:.5}, 3×drms {scaled:.2} m, 100×100 grid in {elapsed:.3} s", hi / lo),
    )
}

fn criterion_2() -> Outcome {
    let analytic = coverage_probability(3.0);
    let s = square();
    let cov = position_covariance(&fisher_matrix(&s.claim, &s).unwrap()).unwrap();
    let ellipse = error_ellipse(&cov, s.claim, 3.0).unwrap();
    let mut r = rng::named(2, "acceptance.ellipse");
    let n = 10_000;
    let inside = (0..n)
        .filter(|_| {
            let obs = sample_tdoa(&s.claim, &s, &mut r).unwrap();
            ml_estimate(&obs, &s, &s.claim).map(|e| ellipse.contains(&e)).unwrap_or(false)
        })
        .count() as f64
        / n as f64;
    check(
        (analytic - (1.0 - (-4.5f64).exp())).abs() < 1e-12 && (analytic - 0.98889).abs() <= 1e-5 && (inside - 0.989).abs() <= 0.004,
        format!("analytic {analytic:.6}, empirical {inside:.4} over {n} estimates"),
    )
}

fn criterion_3() -> Outcome {
    let mut errors = 0;
    for rep in 0..100 {
        let mut r = rng::substream(3, "acceptance.qdc", rep);
        let msg: Vec<bool> = (0..4096).map(|_| r.random_bool(0.5)).collect();
        let res = QdcResources::fresh(4096, 4096, 0.0).unwrap();
        let t = pingpong_send(&msg, &res, AttackModel::None, &mut r).unwrap();
        errors += t.decoded_bits.iter().zip(&msg).filter(|(a, b)| a != b).count();
    }
    let schedule = vec![RoundKind::Control; 10_000];
    let res = QdcResources::fresh(10_000, 10_000, 0.5).unwrap();
    let mut r = rng::named(3, "acceptance.intercept");
    let t = pingpong_scheduled(&[], &schedule, &res, AttackModel::InterceptResend(Basis::Z), &mut r).unwrap();
    let rate = t.control_failures() as f64 / 10_000.0;
    check(errors == 0 && (rate - 0.5).abs() <= 0.02, format!("{errors} bit errors in 100×4096 bits, detection rate {rate:.4}"))
}

fn criterion_4() -> Outcome {
    let mut r = rng::named(4, "acceptance.teleport");
    let zero = PureState::basis(1, 0).unwrap();
    let mut worst: f64 = 0.0;
    let mut counts = [0f64; 4];
    for i in 0..10_000 {
        let payload = apply_gate(&zero, &sample_haar_unitary(&mut r), 0).unwrap();
        let t = teleport(&payload, &make_bell_pair(BellOutcome::PsiPlus), &mut r).unwrap();
        if i < 100 {
            worst = worst.max((1.0 - fidelity(&t.received, &payload).unwrap()).abs());
        }
        counts[t.correction.bits() as usize] += 1.0;
    }
    let stat: f64 = counts.iter().map(|o| (o - 2500.0).powi(2) / 2500.0).sum();
    let p = 1.0 - ChiSquared::new(3.0).unwrap().cdf(stat);
    check(worst < 1e-10 && p > 0.001, format!("max |1 − F| {worst:.2e} over 100 payloads, correction χ² p = {p:.3}"))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.25, 0.5, 1.0] {
        let (_, minus) = symplectic_spectrum_pt(&tmsv_covariance(r).unwrap()).unwrap();
        worst = worst.max((minus - (-2.0 * r).exp()).abs());
    }
    check(worst < 1e-10, format!("max |ν₋ − e^(−2r)| {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut r = rng::named(6, "acceptance.fisher");
    let h = 1e-2;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 20 {
        let n = r.random_range(4..=6);
        let rs: Vec<Point> =
            (0..n).map(|_| Point::new(r.random_range(-2000.0..2000.0), r.random_range(-2000.0..2000.0))).collect();
        let claim = Point::new(r.random_range(-500.0..500.0), r.random_range(-500.0..500.0));
        let Ok(s) = Scenario::new(rs, claim, r.random_range(1.0..5.0) / SPEED_OF_LIGHT) else { continue };
        let Ok(f) = fisher_matrix(&claim, &s) else { continue };
        if f.singular {
            continue;
        }
        // Expected cost under the noise model, written out independently.
        let mu = |p: Point| -> Vec<f64> {
            let d: Vec<f64> = s.rs_positions.iter().map(|q| (q - p).norm()).collect();
            d[1..].iter().map(|dn| dn - d[0]).collect()
        };
        let truth = mu(claim);
        let var = 2.0 * (SPEED_OF_LIGHT * s.sigma_t).powi(2);
        let e = |dx: f64, dy: f64| -> f64 {
            truth.iter().zip(mu(claim + Point::new(dx, dy))).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * var)
        };
        let hxx = (e(h, 0.0) - 2.0 * e(0.0, 0.0) + e(-h, 0.0)) / (h * h);
        let hyy = (e(0.0, h) - 2.0 * e(0.0, 0.0) + e(0.0, -h)) / (h * h);
        let hxy = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
        let rel = (Matrix2::new(hxx, hxy, hxy, hyy) - f.j).norm() / f.j.norm();
        worst = worst.max(rel);
        done += 1;
    }
    check(worst < 1e-3, format!("max relative error {worst:.2e} over 20 geometries"))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for p_c in [0.9, 0.99] {
        let mut s = square();
        s.p_c = p_c;
        let c = spoof_sweep(&s, &[0.0], SweepDirection::Compass, 10_000, 71, VerifyMethod::Region).unwrap();
        ok &= (c.pass_rate[0] - p_c).abs() <= 0.015;
        notes.push(format!("accept {:.4} at P_c {p_c}", c.pass_rate[0]));
    }
    let s = square();
    let unit = center_drms(&s);
    let far = spoof_sweep(&s, &[20.0 * unit], SweepDirection::Compass, 10_000, 72, VerifyMethod::Region).unwrap();
    ok &= far.pass_rate[0] == 0.0;
    notes.push(format!("pass rate {} at 20·drms", far.pass_rate[0]));
    let offsets: Vec<f64> = (0..=20).map(|k| k as f64 * 0.25 * unit).collect();
    let trials = 10_000;
    let curve = spoof_sweep(&s, &offsets, SweepDirection::Compass, trials, 73, VerifyMethod::Region).unwrap();
    let monotone = curve.pass_rate.windows(2).all(|w| {
        let p = w[0].max(w[1]);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt().max(1.0 / trials as f64);
        w[1] <= w[0] + 2.0 * sigma
    });
    ok &= monotone;
    notes.push(format!("curve over 0..5·drms {}", if monotone { "monotone" } else { "NOT monotone" }));
    check(ok, notes.join(", "))
}

fn criterion_8() -> Outcome {
    let mut base = square();
    base.t_d = 1000.0;
    let unit = center_drms(&base);
    let mut r = rng::named(8, "acceptance.fuzz");
    let mut mismatches = 0;
    let mut accepted = 0;
    for _ in 0..1000 {
        let mut config = SessionConfig::new(base.clone());
        config.n_qlv = r.random_range(1..=6);
        config.control_fraction = r.random_range(0.0..0.5);
        let clock = base.t_d + r.random_range(-20.0..20.0);
        let angle = r.random_range(0.0..std::f64::consts::TAU);
        let displacement = Point::new(angle.cos(), angle.sin()) * r.random_range(0.0..8.0) * unit;
        let device = match r.random_range(0..7) {
            0 | 1 => DeviceModel::Honest,
            2 => DeviceModel::Relocated { displacement },
            3 => DeviceModel::Intercepted(if r.random_bool(0.5) { Basis::Z } else { Basis::X }),
            4 => DeviceModel::ForgedTokens,
            5 => DeviceModel::MissingShare(r.random_range(0..config.n_rs_shares)),
            _ => DeviceModel::PartialRelocation { plan: RelocationPlan::RandomCount(r.random_range(0..=config.n_qlv + config.n_decoy)), displacement },
        };
        let len = r.random_range(0..48);
        let message: Vec<bool> = (0..len).map(|_| r.random_bool(0.5)).collect();
        let res = run_session(&config, &message, &device, clock, &mut r).map_err(|e| e.to_string())?;
        let qlv_accepted = res.qlv_verdict.is_some_and(|v| v.accepted)
            && !res.challenges.is_empty()
            && res.challenges.iter().all(|c| c.verdict.accepted);
        let no_tamper = res.transcript.as_ref().is_some_and(|t| t.is_clean()) && res.challenges.iter().all(|c| c.matched);
        let expected = clock >= base.t_d && qlv_accepted && no_tamper;
        let exclusive = res.decrypted.is_some() != res.refusal.is_some();
        let correct = res.decrypted.as_ref().is_none_or(|d| *d == message);
        let gate = clock >= base.t_d || res.shares_released() == 0;
        if res.decrypted.is_some() != expected || !exclusive || !correct || !gate {
            mismatches += 1;
        }
        accepted += res.decrypted.is_some() as usize;
    }
    check(mismatches == 0, format!("{mismatches} violations in 1000 sessions ({accepted} decrypted)"))
}

const CLI_CONFIG: &str = "\
seed = 2024
[scenario]
layout = square
half_side_m = 1000
c_sigma_t_m = 1.8
t_d_s = 60
[grid]
x_min = -150
x_max = 150
y_min = -150
y_max = 150
nx = 31
ny = 31
[ellipse]
points = 0,0; 200,150; -400,300
[sweep]
offsets_drms = 0, 0.5, 1, 1.5, 2, 3, 5, 10, 20
trials = 2000
[session]
message_hex = 0123456789abcdef
clock_s = 75
[pingpong]
message_hex = deadbeef
attack = intercept_x
";

fn criterion_9() -> Outcome {
    let dir = std::env::temp_dir().join(format!("geoqrypt-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("acceptance.conf");
    std::fs::write(&path, CLI_CONFIG).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    let mut ok = true;
    for command in ["crb-surface", "ellipse", "spoof-sweep", "session", "pingpong-demo"] {
        let outputs: Vec<Vec<u8>> = ["1", "1", "8", "8"]
            .iter()
            .map(|threads| {
                let o = Command::new(env!("CARGO_BIN_EXE_geoqrypt"))
                    .args([command, "--config", path.to_str().unwrap()])
                    .env("GEOQRYPT_THREADS", threads)
                    .output()
                    .expect("binary runs");
                if o.status.success() {
                    o.stdout
                } else {
                    Vec::new()
                }
            })
            .collect();
        let same = !outputs[0].is_empty() && outputs.windows(2).all(|w| w[0] == w[1]);
        ok &= same;
        notes.push(format!("{command} {}", if same { "identical" } else { "DIFFERS" }));
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(ok, notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("CRB surface flat at 2.08 m for the 1 km square", criterion_1),
        ("scale-3 ellipse coverage", criterion_2),
        ("ping-pong correctness and intercept detection", criterion_3),
        ("teleportation fidelity and correction statistics", criterion_4),
        ("TMSV partially transposed spectrum", criterion_5),
        ("Fisher matrix equals expected NLL Hessian", criterion_6),
        ("verification coverage and spoof rejection", criterion_7),
        ("session release gates", criterion_8),
        ("CLI byte-identical across runs and thread counts", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
