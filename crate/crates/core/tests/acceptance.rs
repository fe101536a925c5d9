//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::sync::OnceLock;
use std::time::Instant;

use common::*;
use mptherm_core::constitutive::ConstitutiveLaw;
use mptherm_core::dynamics::*;
use mptherm_core::energetics::mechanical_energy_drift;
use mptherm_core::loads::Loads;
use mptherm_core::material::*;
use mptherm_core::reciprocity::*;
use mptherm_core::tensor::{delta, mat_mul};
use mptherm_core::variational::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sci(xs: &[f64]) -> String {
    let v: Vec<String> = xs.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", v.join(", "))
}

fn pair(level: u32, t_end: f64, dt_only: bool) -> (Scenario, Scenario, History, History) {
    let mk = |n: &str| {
        let base = Scenario { t_end, ..scenario_file(n) };
        if dt_only {
            Scenario { dt: base.dt / f64::from(1u32 << (level - 1)), ..base }
        } else {
            base.refined(level)
        }
    };
    let (sa, sb) = (mk("reciprocity_a.toml"), mk("reciprocity_b.toml"));
    let (ha, hb) = std::thread::scope(|s| {
        let b = s.spawn(|| run_simulation(&sb).unwrap());
        (run_simulation(&sa).unwrap(), b.join().unwrap())
    });
    (sa, sb, ha, hb)
}

fn reciprocity() -> Outcome {
    let times = [0.5, 1.0];
    let defects: Vec<Vec<f64>> = (1..=2)
        .map(|l| {
            let (sa, sb, ha, hb) = pair(l, 1.0, false);
            reciprocity_defect(&ha, &hb, &sa, &sb, &times).unwrap().iter().map(|r| r.defect).collect()
        })
        .collect();
    let small = defects[0].iter().all(|&d| d <= 5e-3);
    let ratios: Vec<f64> = defects[0].iter().zip(&defects[1]).map(|(a, b)| a / b).collect();
    let pass = small && ratios.iter().all(|&r| r >= 3.0);
    outcome(pass, format!("defect L1 {} L2 {}, ratios {:.2?}", sci(&defects[0]), sci(&defects[1]), ratios))
}

fn transform() -> Outcome {
    let s = [1.0, 2.0, 5.0];
    let (sa, sb, ha, hb) = pair(1, 1.0, false);
    let base = transform_identity_defect(&ha, &hb, &sa, &sb, &s).unwrap();
    let (sa, sb, ha, hb) = pair(2, 2.0, true);
    let ext = transform_identity_defect(&ha, &hb, &sa, &sb, &s).unwrap();
    let small = base.iter().all(|r| r.defect <= 1e-2);
    let shrinks = base.iter().zip(&ext).all(|(a, b)| b.defect < a.defect);
    let within = base.iter().chain(&ext).all(|r| r.defect <= r.bound);
    let fmt = |rows: &[TransformRow]| rows.iter().map(|r| format!("{:.2e}/{:.1e}", r.defect, r.bound)).collect::<Vec<_>>();
    outcome(
        small && shrinks && within,
        format!("defect/bound L1 {:?}, dt/2 t_end 2 {:?}", fmt(&base), fmt(&ext)),
    )
}

struct VariationalRun {
    worst: [f64; 3],
    sensitivity: f64,
    catt: f64,
}

fn variational_level(level: u32) -> VariationalRun {
    let sc = scenario_file("variational.toml").refined(level);
    let h = run_simulation(&sc).unwrap();
    let seeds = [1, 2, 3, 4, 5];
    let rows = variational_report(&h, &sc, &seeds).unwrap();
    let worst = ["EL_mech", "EL_thermal", "biot_deltaH"]
        .map(|c| rows.iter().filter(|r| r.check == c).map(|r| r.defect).fold(0.0, f64::max));
    let mut bad_u = h.clone();
    bad_u.states.iter_mut().flat_map(|s| s.u.iter_mut()).flatten().for_each(|c| *c *= 1.1);
    let mut bad_t = h.clone();
    bad_t.states.iter_mut().flat_map(|s| s.theta.iter_mut()).for_each(|c| *c *= 1.1);
    let w = default_window(&h);
    let mut sensitivity = f64::INFINITY;
    for seed in seeds {
        let v = VariationField::random(seed, &h, &sc.boundary, Principle::Hamilton, w).unwrap();
        let m0 = euler_lagrange_residual_mech(&h, &sc, &v).unwrap().normalized();
        let m1 = euler_lagrange_residual_mech(&bad_u, &sc, &v).unwrap().normalized();
        let t0 = euler_lagrange_residual_thermal(&h, &sc, &v).unwrap().normalized();
        let t1 = euler_lagrange_residual_thermal(&bad_t, &sc, &v).unwrap().normalized();
        sensitivity = sensitivity.min(m1 / m0).min(t1 / t0);
    }
    let vb = VariationField::random(1, &h, &sc.boundary, Principle::Biot, w).unwrap();
    let catt = cattaneo_bracket_defect(&h, &sc, &vb.ds).unwrap();
    VariationalRun { worst, sensitivity, catt }
}

fn hamilton(r: &[VariationalRun; 2]) -> Outcome {
    let small = r[0].worst[0] <= 1e-2 && r[0].worst[1] <= 1e-2;
    let ratios = [r[0].worst[0] / r[1].worst[0], r[0].worst[1] / r[1].worst[1]];
    let pass = small && ratios.iter().all(|&x| x >= 3.0) && r[0].sensitivity >= 10.0;
    outcome(
        pass,
        format!(
            "EL_mech {:.2e} -> {:.2e}, EL_thermal {:.2e} -> {:.2e}, ratios {:.2?}, corruption x{:.0}",
            r[0].worst[0], r[1].worst[0], r[0].worst[1], r[1].worst[1], ratios, r[0].sensitivity
        ),
    )
}

fn biot(r: &[VariationalRun; 2]) -> Outcome {
    let ratio = r[0].worst[2] / r[1].worst[2];
    let d: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| manufactured_bracket_defect(dt)).collect();
    let orders: Vec<f64> = d.windows(2).map(|w| w[0] / w[1]).collect();
    let second = orders.iter().all(|&o| (3.5..4.5).contains(&o));
    let pass = r[0].worst[2] <= 1e-2 && ratio >= 3.0 && second;
    outcome(
        pass,
        format!(
            "deltaH {:.2e} -> {:.2e} (ratio {ratio:.1}), bracket on run {:.2e}, manufactured {} ratios {:.2?}",
            r[0].worst[2],
            r[1].worst[2],
            r[0].catt,
            sci(&d),
            orders
        ),
    )
}

fn energy() -> Outcome {
    let d: Vec<f64> = [(2e-3, 5), (1e-3, 10), (5e-4, 20)]
        .iter()
        .map(|&(dt, every)| {
            let sc = Scenario { dt, record_every: every, ..scenario_file("energy.toml") };
            mechanical_energy_drift(&run_simulation(&sc).unwrap(), &sc).unwrap()
        })
        .collect();
    let ratios: Vec<f64> = d.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = d[1] < 1e-5 && ratios.iter().all(|&r| r >= 12.0);
    outcome(pass, format!("drift {}, ratios {ratios:.1?}", sci(&d)))
}

fn front() -> Outcome {
    let sc = scenario_file("front.toml");
    let expected = second_sound_speed(&sc.material).unwrap();
    match detect_front(&run_simulation(&sc).unwrap(), 0.05) {
        Ok(v) => {
            let rel = (v - expected).abs() / expected;
            outcome(rel <= 0.1, format!("speed {v:.4} vs {expected:.4}, relative error {rel:.3}"))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn cattaneo() -> Outcome {
    let (e1, e2) = (cattaneo_error(0.1), cattaneo_error(0.05));
    let ratio = e1 / e2;
    outcome(e1 < 1e-4 && ratio > 12.0, format!("max error {e1:.2e} -> {e2:.2e}, ratio {ratio:.1}"))
}

fn oracles() -> Outcome {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_law = 0.0_f64;
    for seed in 0..50 {
        let mc = random_admissible_material(seed, 1.0);
        let k = random_kinematics(&mut rng);
        let (a, b) = (ConstitutiveLaw::new(&mc).respond(&k), oracle(&mc, &k));
        let mut d = (a.g - b.g).abs().max((a.rho_eta - b.rho_eta).abs());
        for i in 0..3 {
            d = d.max((a.h[i] - b.h[i]).abs());
            for j in 0..3 {
                d = d.max((a.stress[i][j] - b.stress[i][j]).abs()).max((a.couple[i][j] - b.couple[i][j]).abs());
            }
        }
        worst_law = worst_law.max(d);
    }
    let mut worst_inv = 0.0_f64;
    for seed in 0..100 {
        let mc = random_admissible_material(seed + rng.gen_range(0..1000), 0.1);
        let inv = invert_conductivity(&mc).unwrap();
        let o = cofactor_inverse(&mc.conductivity);
        let p = mat_mul(&mc.conductivity, &inv);
        for i in 0..3 {
            for j in 0..3 {
                worst_inv = worst_inv.max((inv[i][j] - o[i][j]).abs()).max((p[i][j] - delta(i, j)).abs());
            }
        }
    }
    outcome(
        worst_law <= 1e-12 && worst_inv <= 1e-12,
        format!("law {worst_law:.1e} on 50 pairs, inverse {worst_inv:.1e} on 100 materials"),
    )
}

fn null_history() -> Outcome {
    let mut worst = 0.0_f64;
    for seed in [1, 2, 3] {
        let sc = Scenario {
            material: random_admissible_material(seed, 0.3),
            loads: Loads::default(),
            ..scenario_file("zero.toml")
        };
        worst = worst.max(run_simulation(&sc).unwrap().max_norm());
    }
    let file = scenario_file("zero.toml");
    worst = worst.max(run_simulation(&file).unwrap().max_norm());
    outcome(worst <= 1e-14, format!("max norm {worst:e}"))
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |name, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "{} {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        results.push((name, o));
    };
    record("1 reciprocity", &reciprocity);
    record("2 transform identity", &transform);
    let var = OnceLock::new();
    let runs = || var.get_or_init(|| [variational_level(1), variational_level(2)]);
    record("3 hamilton residuals", &|| hamilton(runs()));
    record("4 biot residual", &|| biot(runs()));
    record("5 energy conservation", &energy);
    record("6 second sound speed", &front);
    record("7 cattaneo relaxation", &cattaneo);
    record("8 oracle equivalence", &oracles);
    record("9 null history", &null_history);
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
