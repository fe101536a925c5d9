//! Runs a command at each refinement level and writes its reports.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mptherm_core::config::parse_scenario;
use mptherm_core::dynamics::{detect_front, run_simulation, second_sound_speed, History, Scenario};
use mptherm_core::energetics::energy_report;
use mptherm_core::reciprocity::{default_check_times, reciprocity_defect, transform_identity_defect};
use mptherm_core::report;
use mptherm_core::variational::variational_report;
use mptherm_core::{Error, Result};
use serde::Serialize;

use crate::{missing, Args, Command};

const TRANSFORM_S: [f64; 3] = [1.0, 2.0, 5.0];
const VARIATIONS: u64 = 5;

#[derive(Debug, Serialize)]
struct CheckEntry {
    check: String,
    level: u32,
    defect: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    schema: u32,
    command: &'a str,
    levels: u32,
    pass: bool,
    checks: Vec<CheckEntry>,
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Simulate => "simulate",
        Command::CheckReciprocity => "check-reciprocity",
        Command::CheckVariational => "check-variational",
        Command::CheckEnergy => "check-energy",
        Command::CheckFront => "check-front",
        Command::CheckTransform => "check-transform",
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation {
            path: name.into(),
            message: format!("must be positive (got {x})"),
        })
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// `name.csv` at level 1, `name_L<k>.csv` above.
fn level_file(name: &str, level: u32) -> String {
    if level == 1 {
        format!("{name}.csv")
    } else {
        format!("{name}_L{level}.csv")
    }
}

fn run_pair(a: &Scenario, b: &Scenario) -> Result<(History, History)> {
    std::thread::scope(|s| {
        let hb = s.spawn(|| run_simulation(b));
        let ha = run_simulation(a)?;
        let hb = hb.join().expect("simulation thread panicked")?;
        Ok((ha, hb))
    })
}

pub fn dispatch(command: Command, args: &Args) -> Result<bool> {
    if args.levels < 1 {
        return Err(Error::Validation {
            path: "levels".into(),
            message: "must be at least 1".into(),
        });
    }
    for (n, x) in [
        ("tol-reciprocity", args.tol_reciprocity),
        ("tol-transform", args.tol_transform),
        ("tol-variational", args.tol_variational),
        ("tol-energy", args.tol_energy),
        ("tol-front", args.tol_front),
        ("front-threshold", args.front_threshold),
    ] {
        positive(n, x)?;
    }
    let out: PathBuf = args.out.clone().ok_or_else(|| missing("out"))?;
    let base = parse_scenario(args.scenario.as_deref().ok_or_else(|| missing("scenario"))?)?;
    let pair = matches!(command, Command::CheckReciprocity | Command::CheckTransform);
    let base_b = if pair {
        Some(parse_scenario(args.scenario_b.as_deref().ok_or_else(|| missing("scenario-b"))?)?)
    } else {
        None
    };
    std::fs::create_dir_all(&out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;

    let mut checks = Vec::new();
    let mut entry = |check: &str, level: u32, defect: f64, tolerance: f64| {
        checks.push(CheckEntry {
            check: check.into(),
            level,
            defect,
            tolerance,
            pass: defect.is_finite() && defect <= tolerance,
        })
    };
    for level in 1..=args.levels {
        let sc = base.refined(level);
        match command {
            Command::Simulate => {
                let h = run_simulation(&sc)?;
                report::write_history(&h, create(&out, &level_file("history", level))?)?;
                report::write_boundary(&h, create(&out, &level_file("boundary", level))?)?;
            }
            Command::CheckReciprocity | Command::CheckTransform => {
                let sb = base_b.as_ref().expect("pair parsed").refined(level);
                let (ha, hb) = run_pair(&sc, &sb)?;
                if command == Command::CheckReciprocity {
                    let rows = reciprocity_defect(&ha, &hb, &sc, &sb, &default_check_times(&ha))?;
                    let worst = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
                    entry("reciprocity", level, worst, args.tol_reciprocity);
                    report::write_reciprocity(&rows, &[], create(&out, &level_file("reciprocity", level))?)?;
                } else {
                    let rows = transform_identity_defect(&ha, &hb, &sc, &sb, &TRANSFORM_S)?;
                    let worst = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
                    entry("transform", level, worst, args.tol_transform);
                    report::write_reciprocity(&[], &rows, create(&out, &level_file("transform", level))?)?;
                }
            }
            Command::CheckVariational => {
                let h = run_simulation(&sc)?;
                let seeds: Vec<u64> = (0..VARIATIONS).map(|i| args.seed + i).collect();
                let rows = variational_report(&h, &sc, &seeds)?;
                for name in ["EL_mech", "EL_thermal", "biot_deltaH"] {
                    let worst = rows.iter().filter(|r| r.check == name).map(|r| r.defect).fold(0.0, f64::max);
                    entry(name, level, worst, args.tol_variational);
                }
                report::write_variational(&rows, create(&out, &level_file("variational", level))?)?;
            }
            Command::CheckEnergy => {
                let h = run_simulation(&sc)?;
                let r = energy_report(&h, &sc)?;
                entry("energy", level, r.max_drift, args.tol_energy);
                report::write_energy(&r, create(&out, &level_file("energy", level))?)?;
            }
            Command::CheckFront => {
                let expected = second_sound_speed(&sc.material).ok_or(Error::Validation {
                    path: "material.tau".into(),
                    message: "front speed needs a positive relaxation time".into(),
                })?;
                let h = run_simulation(&sc)?;
                let v = detect_front(&h, args.front_threshold)?;
                entry("front", level, (v - expected).abs() / expected, args.tol_front);
            }
        }
    }

    let pass = checks.iter().filter(|c| c.level == args.levels).all(|c| c.pass);
    let summary = Summary {
        schema: 1,
        command: command_name(command),
        levels: args.levels,
        pass,
        checks,
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(out.join("summary.json"), text + "\n").map_err(|e| Error::Io(e.to_string()))?;
    Ok(pass)
}
