#![allow(dead_code)]

use mptherm_core::constitutive::{Kinematics, Response};
use mptherm_core::dynamics::*;
use mptherm_core::field::{FieldState, Grid1D};
use mptherm_core::loads::*;
use mptherm_core::material::*;
use mptherm_core::tensor::Mat3;
use mptherm_core::variational::cattaneo_bracket_defect;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn scenario_file(name: &str) -> Scenario {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    mptherm_core::config::parse_scenario(&path).unwrap()
}

pub fn random_kinematics(rng: &mut ChaCha8Rng) -> Kinematics {
    let mut m = || -> Mat3 { std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))) };
    let (e, psi) = (m(), m());
    Kinematics {
        e,
        psi,
        varphi: rng.gen_range(-1.0..1.0),
        grad_varphi: std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
        theta: rng.gen_range(-1.0..1.0),
    }
}

/// Every constitutive relation summed index by index.
pub fn oracle(m: &MaterialConstants, k: &Kinematics) -> Response {
    let (e, p, vp, gp, th) = (&k.e, &k.psi, k.varphi, &k.grad_varphi, k.theta);
    let mut r = Response::default();
    for i in 0..3 {
        for j in 0..3 {
            let mut t = m.strain_porosity[i][j] * vp + m.thermal_stress[i][j] * th;
            let mut c = m.wryness_porosity[i][j] * vp + m.wryness_thermal[i][j] * th;
            for kk in 0..3 {
                t += m.strain_porosity_grad[i][j][kk] * gp[kk];
                c += m.wryness_porosity_grad[i][j][kk] * gp[kk];
                for l in 0..3 {
                    t += m.elastic[i][j][kk][l] * e[kk][l];
                    t += m.strain_wryness[i][j][kk][l] * p[l][kk];
                    c += m.strain_wryness[kk][l][i][j] * e[kk][l];
                    c += m.wryness[i][j][kk][l] * p[l][kk];
                }
            }
            r.stress[i][j] = t;
            r.couple[i][j] = c;
        }
    }
    let mut g = -m.porosity_stiffness * vp - m.porosity_thermal * th;
    let mut eta = -m.porosity_thermal * vp + m.heat_capacity * th;
    for i in 0..3 {
        g -= m.porosity_grad_coupling[i] * gp[i];
        eta -= m.porosity_grad_thermal[i] * gp[i];
        for j in 0..3 {
            g -= m.strain_porosity[i][j] * e[i][j] + m.wryness_porosity[i][j] * p[j][i];
            eta -= m.thermal_stress[i][j] * e[i][j] + m.wryness_thermal[i][j] * p[j][i];
        }
    }
    for i in 0..3 {
        let mut h = m.porosity_grad_coupling[i] * vp + m.porosity_grad_thermal[i] * th;
        for j in 0..3 {
            h += m.porosity_grad_stiffness[i][j] * gp[j];
            for kk in 0..3 {
                h += m.strain_porosity_grad[j][kk][i] * e[j][kk] + m.wryness_porosity_grad[j][kk][i] * p[kk][j];
            }
        }
        r.h[i] = h;
    }
    r.g = g;
    r.rho_eta = eta;
    r
}

pub fn cofactor_inverse(k: &Mat3) -> Mat3 {
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        k[r0][c0] * k[r1][c1] - k[r0][c1] * k[r1][c0]
    };
    let det = k[0][0] * c(0, 0) + k[0][1] * c(0, 1) + k[0][2] * c(0, 2);
    std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / det))
}

/// Linear temperature profile held by constant end values: the gradient is
/// uniform, so the flux relaxes as K₁₁g0(1 − e^{−t/τ}) everywhere.
pub fn cattaneo_error(dt: f64) -> f64 {
    let (tau, k0, g0, n, l) = (0.5, 1.5, 2.0, 9, 1.0);
    let mc = isotropic_preset(&IsotropicParams { tau, k0, ..Default::default() }).unwrap();
    let g = Grid1D::new(n, l).unwrap();
    let mut init = FieldState::zeros(n);
    for k in 0..n {
        init.theta[k] = g0 * g.x(k);
    }
    let mut right = EndSpec::all(Condition::Essential);
    right.data.push(BoundaryTerm { group: Group::Thermal, component: 0, amp: g0 * l, time: TimeProfile::Constant });
    let sc = Scenario {
        grid: g.clone(),
        material: mc,
        loads: Loads::default(),
        boundary: BoundarySpec { left: EndSpec::all(Condition::Essential), right },
        t_end: 2.0,
        dt,
        record_every: 1,
        initial: Some(init),
    };
    let h = run_simulation(&sc).unwrap();
    let mut worst = 0.0_f64;
    for (t, s) in h.times.iter().zip(&h.states) {
        let exact = k0 * g0 * (1.0 - (-t / tau).exp());
        for k in 0..n {
            worst = worst.max((s.q[k][0] - exact).abs());
            assert!((s.theta[k] - g0 * g.x(k)).abs() < 1e-12);
        }
    }
    worst
}

/// θ = X(x) sin t with quadratic X and a Cattaneo flux started from rest,
/// q = K X′ Q(t) with τQ̇ + Q = sin t. The bracket vanishes exactly, so
/// what remains is the central difference for q̇.
pub fn manufactured_bracket_defect(dt: f64) -> f64 {
    let (tau, k0, n, t_end) = (0.5, 1.5, 11, 2.0);
    let mc = isotropic_preset(&IsotropicParams { tau, k0, ..Default::default() }).unwrap();
    let grid = Grid1D::new(n, 1.0).unwrap();
    let x_of = |x: f64| 0.3 + x - 0.7 * x * x;
    let dx_of = |x: f64| 1.0 - 1.4 * x;
    let q_of = |t: f64| (t.sin() - tau * t.cos() + tau * (-t / tau).exp()) / (1.0 + tau * tau);
    let m = (t_end / dt).round() as usize + 1;
    let times: Vec<f64> = (0..m).map(|i| i as f64 * dt).collect();
    let states = times
        .iter()
        .map(|&t| {
            let mut s = FieldState::zeros(n);
            for k in 0..n {
                let x = grid.x(k);
                s.theta[k] = x_of(x) * t.sin();
                s.q[k] = [k0 * dx_of(x) * q_of(t), 0.0, 0.0];
            }
            s
        })
        .collect();
    let h = History {
        grid: grid.clone(),
        theta0: mc.reference_temperature,
        sample_dt: dt,
        times,
        states,
        traces: vec![Default::default(); m],
        s: vec![vec![[0.0; 3]; n]; m],
    };
    let sc = Scenario {
        grid,
        material: mc,
        loads: Loads::default(),
        boundary: BoundarySpec::clamped(),
        t_end,
        dt,
        record_every: 1,
        initial: None,
    };
    let ds: Vec<Vec<[f64; 3]>> =
        (0..m).map(|i| (0..n).map(|k| [1.0 + 0.1 * k as f64, 0.0, 0.0].map(|c| c * (i as f64 * dt).cos())).collect()).collect();
    cattaneo_bracket_defect(&h, &sc, &ds).unwrap()
}

