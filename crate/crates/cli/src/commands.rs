//! Command schemas and execution.

use std::fmt::Write as _;

use geoqrypt::localization::{
    coverage_probability, crb_grid, error_ellipse, fisher_matrix, position_covariance, GridSpec, LocalizationError,
    PositionCovariance, Scenario,
};
use geoqrypt::orchestrator::{run_session, DeviceModel, RelocationPlan, SessionConfig, SessionError, SessionEvent};
use geoqrypt::qdc::{draw_schedule, pingpong_scheduled, AttackModel, ControlResult, QdcResources, RoundKind};
use geoqrypt::qlv::{spoof_sweep, SweepDirection, VerifyMethod};
use geoqrypt::quantum::Basis;
use geoqrypt::{bits, rng, Point, SPEED_OF_LIGHT};
use nalgebra::Matrix2;

use crate::config::{Config, Section};
use crate::format::{hex, parse_hex, sig9};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    CrbSurface,
    Ellipse,
    SpoofSweep,
    Session,
    PingpongDemo,
}

const SECTIONS: [&str; 7] = ["", "scenario", "grid", "ellipse", "sweep", "session", "pingpong"];
const ROOT_KEYS: [&str; 1] = ["seed"];
const SCENARIO_KEYS: [&str; 10] = [
    "layout",
    "half_side_m",
    "stations",
    "claim",
    "c_sigma_t_m",
    "sigma_t_s",
    "p_c",
    "t_d_s",
    "processing_delay_s",
    "sigma_inflation",
];
const GRID_KEYS: [&str; 6] = ["x_min", "x_max", "y_min", "y_max", "nx", "ny"];
const ELLIPSE_KEYS: [&str; 3] = ["points", "scale", "covariance"];
const SWEEP_KEYS: [&str; 5] = ["offsets_m", "offsets_drms", "trials", "direction", "method"];
const SESSION_KEYS: [&str; 14] = [
    "message_hex",
    "clock_s",
    "device",
    "intercept_basis",
    "displacement_m",
    "missing_rs",
    "move_count",
    "n_qlv",
    "n_decoy",
    "control_fraction",
    "intertwine_k",
    "block_size",
    "n_rs_shares",
    "method",
];
const PINGPONG_KEYS: [&str; 3] = ["message_hex", "control_fraction", "attack"];

/// A validated configuration for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    CrbSurface { scenario: Scenario, grid: GridSpec },
    Ellipse { scenario: Scenario, points: Vec<Point>, scale: f64, covariance: Option<PositionCovariance> },
    SpoofSweep { scenario: Scenario, offsets: Offsets, trials: usize, direction: SweepDirection, method: VerifyMethod },
    Session { config: Box<SessionConfig>, message: Vec<u8>, clock: f64, device: DeviceModel },
    Pingpong { message: Vec<u8>, control_fraction: f64, attack: AttackModel },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Offsets {
    Metres(Vec<f64>),
    /// Multiples of drms at the claim.
    Drms(Vec<f64>),
}

impl RunConfig {
    /// Validates `config` against the schema of `command`. `seed` overrides
    /// the file's root `seed`.
    pub fn from_config(config: &Config, command: Command, seed: Option<u64>) -> Result<Self, CliError> {
        for name in config.section_names() {
            if !SECTIONS.contains(&name) {
                return Err(CliError::config(format!("unknown section [{name}]")));
            }
        }
        let schemas: [(&str, &[&str]); 7] = [
            ("", &ROOT_KEYS),
            ("scenario", &SCENARIO_KEYS),
            ("grid", &GRID_KEYS),
            ("ellipse", &ELLIPSE_KEYS),
            ("sweep", &SWEEP_KEYS),
            ("session", &SESSION_KEYS),
            ("pingpong", &PINGPONG_KEYS),
        ];
        for (name, keys) in schemas {
            if let Some(section) = config.section(name) {
                section.check_keys(keys)?;
            }
        }
        let seed = match seed {
            Some(s) => s,
            None => config.root().get_or("seed", 0u64)?,
        };
        let params = match command {
            Command::CrbSurface => {
                let g = required(config, "grid")?;
                let grid = GridSpec {
                    x_min: g.require("x_min")?,
                    x_max: g.require("x_max")?,
                    y_min: g.require("y_min")?,
                    y_max: g.require("y_max")?,
                    nx: g.require("nx")?,
                    ny: g.require("ny")?,
                };
                grid.validate().map_err(|e| CliError::config(e.to_string()))?;
                Params::CrbSurface { scenario: scenario(config)?, grid }
            }
            Command::Ellipse => {
                let e = required(config, "ellipse")?;
                let points = e
                    .points("points")?
                    .ok_or_else(|| CliError::config("missing `ellipse.points`"))?
                    .into_iter()
                    .map(|(x, y)| Point::new(x, y))
                    .collect();
                let scale: f64 = e.get_or("scale", 3.0)?;
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(CliError::config("`ellipse.scale` must be positive"));
                }
                let covariance = match e.list("covariance")? {
                    None => None,
                    Some(v) if v.len() == 3 => Some(
                        PositionCovariance::from_matrix(&Matrix2::new(v[0], v[1], v[1], v[2]))
                            .map_err(|err| CliError::config(format!("`ellipse.covariance`: {err}")))?,
                    ),
                    Some(_) => return Err(CliError::config("`ellipse.covariance` takes `sxx, sxy, syy`")),
                };
                Params::Ellipse { scenario: scenario(config)?, points, scale, covariance }
            }
            Command::SpoofSweep => {
                let s = required(config, "sweep")?;
                let offsets = match (s.list("offsets_m")?, s.list("offsets_drms")?) {
                    (Some(m), None) => Offsets::Metres(m),
                    (None, Some(d)) => Offsets::Drms(d),
                    _ => return Err(CliError::config("give exactly one of `sweep.offsets_m` and `sweep.offsets_drms`")),
                };
                let values = match &offsets {
                    Offsets::Metres(v) | Offsets::Drms(v) => v,
                };
                if values.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
                    return Err(CliError::config("sweep offsets must be finite and non-negative"));
                }
                let trials = s.get_or("trials", 1000usize)?;
                if trials < geoqrypt::qlv::MIN_TRIALS {
                    return Err(CliError::config(format!(
                        "`sweep.trials` must be at least {}",
                        geoqrypt::qlv::MIN_TRIALS
                    )));
                }
                let direction = match s.raw("direction").unwrap_or("compass") {
                    "compass" => SweepDirection::Compass,
                    _ => {
                        let (x, y) = s.points("direction")?.and_then(|p| p.first().copied()).unwrap_or((0.0, 0.0));
                        let d = Point::new(x, y);
                        if !(d.norm() > 0.0 && d.norm().is_finite()) {
                            return Err(CliError::config("`sweep.direction` must be `compass` or a non-zero `x, y`"));
                        }
                        SweepDirection::Fixed(d)
                    }
                };
                let scenario = scenario(config)?;
                scenario.validate_for_verification().map_err(|e| CliError::config(e.to_string()))?;
                Params::SpoofSweep { scenario, offsets, trials, direction, method: method(s)? }
            }
            Command::Session => session(config)?,
            Command::PingpongDemo => {
                let p = required(config, "pingpong")?;
                let message = message(p)?;
                let control_fraction = p.get_or("control_fraction", 0.25)?;
                if !(0.0..1.0).contains(&control_fraction) {
                    return Err(CliError::config("`pingpong.control_fraction` must lie in [0, 1)"));
                }
                let attack = match p.raw("attack").unwrap_or("none") {
                    "none" => AttackModel::None,
                    "intercept_z" => AttackModel::InterceptResend(Basis::Z),
                    "intercept_x" => AttackModel::InterceptResend(Basis::X),
                    other => {
                        return Err(CliError::config(format!(
                            "`pingpong.attack` must be none, intercept_z or intercept_x, got `{other}`"
                        )))
                    }
                };
                Params::Pingpong { message, control_fraction, attack }
            }
        };
        Ok(Self { seed, params })
    }
}

fn required<'a>(config: &'a Config, name: &str) -> Result<&'a Section, CliError> {
    config.section(name).ok_or_else(|| CliError::config(format!("missing section [{name}]")))
}

fn scenario(config: &Config) -> Result<Scenario, CliError> {
    let s = required(config, "scenario")?;
    let sigma_t = match (s.get::<f64>("c_sigma_t_m")?, s.get::<f64>("sigma_t_s")?) {
        (Some(m), None) => m / SPEED_OF_LIGHT,
        (None, Some(t)) => t,
        _ => return Err(CliError::config("give exactly one of `scenario.c_sigma_t_m` and `scenario.sigma_t_s`")),
    };
    let stations: Vec<Point> = match (s.raw("layout"), s.points("stations")?) {
        (Some("square"), None) => {
            let l: f64 = s.require("half_side_m")?;
            vec![Point::new(l, l), Point::new(-l, l), Point::new(-l, -l), Point::new(l, -l)]
        }
        (None, Some(p)) => {
            if s.raw("half_side_m").is_some() {
                return Err(CliError::config("`scenario.half_side_m` only applies to `layout = square`"));
            }
            p.into_iter().map(|(x, y)| Point::new(x, y)).collect()
        }
        (Some(other), None) => return Err(CliError::config(format!("unknown `scenario.layout` `{other}`"))),
        _ => return Err(CliError::config("give exactly one of `scenario.layout` and `scenario.stations`")),
    };
    let claim = match s.points("claim")? {
        None => Point::zeros(),
        Some(p) if p.len() == 1 => Point::new(p[0].0, p[0].1),
        Some(_) => return Err(CliError::config("`scenario.claim` is a single `x, y` pair")),
    };
    let mut scenario = Scenario::new(stations, claim, sigma_t).map_err(|e| CliError::config(e.to_string()))?;
    scenario.p_c = s.get_or("p_c", scenario.p_c)?;
    scenario.t_d = s.get_or("t_d_s", scenario.t_d)?;
    scenario.processing_delay_s = s.get_or("processing_delay_s", scenario.processing_delay_s)?;
    scenario.sigma_inflation = s.get_or("sigma_inflation", scenario.sigma_inflation)?;
    scenario.validate().map_err(|e| CliError::config(e.to_string()))?;
    if !(scenario.p_c > 0.0 && scenario.p_c < 1.0) {
        return Err(CliError::config("`scenario.p_c` must lie in (0, 1)"));
    }
    if !scenario.t_d.is_finite() {
        return Err(CliError::config("`scenario.t_d_s` must be finite"));
    }
    Ok(scenario)
}

fn method(s: &Section) -> Result<VerifyMethod, CliError> {
    match s.raw("method").unwrap_or("region") {
        "region" => Ok(VerifyMethod::Region),
        "residual" => Ok(VerifyMethod::Residual),
        other => Err(CliError::config(format!("verification method must be region or residual, got `{other}`"))),
    }
}

fn message(s: &Section) -> Result<Vec<u8>, CliError> {
    let raw = s.raw("message_hex").ok_or_else(|| CliError::config("missing `message_hex`"))?;
    parse_hex(raw).ok_or_else(|| CliError::config("`message_hex` must be an even number of hex digits"))
}

fn session(config: &Config) -> Result<Params, CliError> {
    let s = required(config, "session")?;
    let mut sc = SessionConfig::new(scenario(config)?);
    sc.n_qlv = s.get_or("n_qlv", sc.n_qlv)?;
    sc.n_decoy = s.get_or("n_decoy", sc.n_decoy)?;
    sc.control_fraction = s.get_or("control_fraction", sc.control_fraction)?;
    sc.intertwine_k = s.get_or("intertwine_k", sc.intertwine_k)?;
    sc.block_size = s.get_or("block_size", sc.block_size)?;
    sc.n_rs_shares = s.get_or("n_rs_shares", sc.n_rs_shares)?;
    sc.method = method(s)?;
    sc.validate().map_err(|e| CliError::config(e.to_string()))?;
    let clock: f64 = s.require("clock_s")?;
    if !clock.is_finite() {
        return Err(CliError::config("`session.clock_s` must be finite"));
    }
    let displacement = || -> Result<Point, CliError> {
        match s.points("displacement_m")? {
            Some(p) if p.len() == 1 && p[0].0.is_finite() && p[0].1.is_finite() => Ok(Point::new(p[0].0, p[0].1)),
            _ => Err(CliError::config("this device needs `session.displacement_m = x, y`")),
        }
    };
    let device = match s.raw("device").unwrap_or("honest") {
        "honest" => DeviceModel::Honest,
        "relocated" => DeviceModel::Relocated { displacement: displacement()? },
        "intercepted" => DeviceModel::Intercepted(match s.raw("intercept_basis").unwrap_or("z") {
            "z" => Basis::Z,
            "x" => Basis::X,
            other => return Err(CliError::config(format!("`session.intercept_basis` must be z or x, got `{other}`"))),
        }),
        "forged_tokens" => DeviceModel::ForgedTokens,
        "missing_share" => {
            let rs: usize = s.require("missing_rs")?;
            if rs >= sc.n_rs_shares {
                return Err(CliError::config(format!("`session.missing_rs` must be below {}", sc.n_rs_shares)));
            }
            DeviceModel::MissingShare(rs)
        }
        "partial_relocation" => DeviceModel::PartialRelocation {
            plan: RelocationPlan::RandomCount(s.require("move_count")?),
            displacement: displacement()?,
        },
        other => return Err(CliError::config(format!("unknown `session.device` `{other}`"))),
    };
    Ok(Params::Session { config: Box::new(sc), message: message(s)?, clock, device })
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Runs a validated command and returns its complete output.
pub fn execute(run: &RunConfig) -> Result<String, CliError> {
    match &run.params {
        Params::CrbSurface { scenario, grid } => crb_surface(scenario, grid),
        Params::Ellipse { scenario, points, scale, covariance } => ellipse(scenario, points, *scale, covariance),
        Params::SpoofSweep { scenario, offsets, trials, direction, method } => {
            let metres = match offsets {
                Offsets::Metres(m) => m.clone(),
                Offsets::Drms(k) => {
                    let drms = fisher_matrix(&scenario.claim, scenario)
                        .and_then(|f| position_covariance(&f))
                        .map_err(runtime)?
                        .drms();
                    k.iter().map(|k| k * drms).collect()
                }
            };
            let curve = spoof_sweep(scenario, &metres, *direction, *trials, run.seed, *method).map_err(runtime)?;
            let mut out = String::from("offset_m,pass_rate,trials,seed\n");
            for (d, p) in curve.offsets.iter().zip(&curve.pass_rate) {
                writeln!(out, "{},{},{},{}", sig9(*d), sig9(*p), curve.trials, curve.seed).unwrap();
            }
            Ok(out)
        }
        Params::Session { config, message, clock, device } => session_transcript(run.seed, config, message, *clock, device),
        Params::Pingpong { message, control_fraction, attack } => {
            pingpong(run.seed, message, *control_fraction, *attack)
        }
    }
}

fn crb_surface(scenario: &Scenario, grid: &GridSpec) -> Result<String, CliError> {
    let surface = crb_grid(grid, scenario).map_err(runtime)?;
    let mut out = String::from("x_m,y_m,drms_m,sigma_x_m,sigma_y_m,rho\n");
    for p in &surface.points {
        let v = p.value.map(|v| [v.drms, v.sigma_x, v.sigma_y, v.rho]).unwrap_or([f64::NAN; 4]);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            sig9(p.position.x),
            sig9(p.position.y),
            sig9(v[0]),
            sig9(v[1]),
            sig9(v[2]),
            sig9(v[3])
        )
        .unwrap();
    }
    Ok(out)
}

fn ellipse(
    scenario: &Scenario,
    points: &[Point],
    scale: f64,
    covariance: &Option<PositionCovariance>,
) -> Result<String, CliError> {
    let coverage = coverage_probability(scale);
    let mut out = String::from("x_m,y_m,semi_major_m,semi_minor_m,orientation_rad,scale,coverage\n");
    for p in points {
        let cov = match covariance {
            Some(c) => *c,
            None => fisher_matrix(p, scenario).and_then(|f| position_covariance(&f)).map_err(|e| match e {
                LocalizationError::DegenerateGeometry | LocalizationError::NotPositiveDefinite => {
                    CliError::Runtime(format!("degenerate geometry at ({}, {})", p.x, p.y))
                }
                other => runtime(other),
            })?,
        };
        let e = error_ellipse(&cov, *p, scale).map_err(runtime)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig9(e.center.x),
            sig9(e.center.y),
            sig9(e.semi_major),
            sig9(e.semi_minor),
            sig9(e.orientation_rad),
            sig9(scale),
            sig9(coverage)
        )
        .unwrap();
    }
    Ok(out)
}

fn session_transcript(
    seed: u64,
    config: &SessionConfig,
    message: &[u8],
    clock: f64,
    device: &DeviceModel,
) -> Result<String, CliError> {
    let mut r = rng::named(seed, "orchestrator.session");
    let result = run_session(config, &bits::from_bytes(message), device, clock, &mut r).map_err(|e| match e {
        SessionError::Config(m) => CliError::Config(m),
        other => runtime(other),
    })?;
    let mut out = String::new();
    writeln!(out, "# session seed={seed} device={device:?}").unwrap();
    for event in &result.events {
        let line = match event {
            SessionEvent::TimeLockChecked { clock_s, t_d, open } => {
                format!("time lock: clock {clock_s} s, t_d {t_d} s, {}", if *open { "open" } else { "closed" })
            }
            SessionEvent::ShareReleased { rs_id, bytes } => format!("station {rs_id}: released {bytes}-byte share"),
            SessionEvent::ShareWithheld { rs_id } => format!("station {rs_id}: share withheld"),
            SessionEvent::InstructionsReconstructed { entries } => format!("instructions: {entries} slot entries"),
            SessionEvent::SlotsRelocated { slot_ids } => format!("relocated slots: {slot_ids:?}"),
            SessionEvent::QdcFinished { rounds, control_failures, tampered_bits } => format!(
                "ping-pong: {rounds} rounds, {control_failures} control failures, {tampered_bits} tampered bits"
            ),
        };
        writeln!(out, "# {line}").unwrap();
    }
    for c in &result.challenges {
        writeln!(
            out,
            "# token slot {}: basis {:?}{}{}, answer {}, statistic {} / {}, {}",
            c.slot_id,
            c.basis,
            if c.embedded { " (in stream)" } else { "" },
            if c.relocated { ", relocated" } else { "" },
            if c.matched { "consistent" } else { "inconsistent" },
            sig9(c.verdict.mahalanobis),
            sig9(c.verdict.threshold),
            if c.verdict.accepted { "accepted" } else { "rejected" }
        )
        .unwrap();
    }
    let (verdict, refusal, decrypted) = match (&result.decrypted, result.refusal) {
        (Some(bits), _) => ("accept", "", hex(&bits::to_bytes(bits))),
        (None, Some(r)) => ("reject", r.as_str(), String::new()),
        (None, None) => unreachable!("a session either decrypts or refuses"),
    };
    writeln!(out, "{verdict},{refusal},{decrypted},{clock}").unwrap();
    Ok(out)
}

fn pingpong(seed: u64, message: &[u8], control_fraction: f64, attack: AttackModel) -> Result<String, CliError> {
    let mut r = rng::named(seed, "qdc.pingpong");
    let msg = bits::from_bytes(message);
    let schedule = draw_schedule(msg.len(), control_fraction, &mut r);
    let resources = QdcResources::fresh(schedule.len(), schedule.len(), control_fraction).map_err(runtime)?;
    let transcript = pingpong_scheduled(&msg, &schedule, &resources, attack, &mut r).map_err(runtime)?;
    let mut out = String::from("round,kind,bit,decoded,correction_x,correction_z,control\n");
    let (mut m, mut c) = (0, 0);
    for (round, kind) in transcript.rounds.iter().enumerate() {
        let corr = transcript.teleport_corrections[round];
        let (label, bit, decoded, control) = match kind {
            RoundKind::Message => {
                let decoded = if transcript.tampered_bits.contains(&m) {
                    "x".to_string()
                } else {
                    (transcript.decoded_bits[m] as u8).to_string()
                };
                let row = ("message", (transcript.sent_bits[m] as u8).to_string(), decoded, String::new());
                m += 1;
                row
            }
            RoundKind::Control => {
                let res = match transcript.control_results[c] {
                    ControlResult::Pass => "pass",
                    ControlResult::Fail => "fail",
                };
                c += 1;
                ("control", String::new(), String::new(), res.to_string())
            }
        };
        writeln!(out, "{round},{label},{bit},{decoded},{},{},{control}", corr.x as u8, corr.z as u8).unwrap();
    }
    Ok(out)
}
