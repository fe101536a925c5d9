mod common;

use common::*;
use mptherm_core::dynamics::*;
use mptherm_core::field::{FieldState, Grid1D};
use mptherm_core::loads::*;
use mptherm_core::variational::*;
use mptherm_core::Error;
use proptest::prelude::*;

fn short_run(t_end: f64) -> (Scenario, History) {
    let sc = Scenario { t_end, ..scenario_file("variational.toml") };
    let h = run_simulation(&sc).unwrap();
    (sc, h)
}

#[test]
fn zero_variation_gives_zero_residuals() {
    let (sc, h) = short_run(0.2);
    let z = VariationField::zeros(h.len(), h.grid.n_nodes);
    let r = euler_lagrange_residual_mech(&h, &sc, &z).unwrap();
    assert_eq!((r.raw, r.normalized()), (0.0, 0.0));
    let r = euler_lagrange_residual_thermal(&h, &sc, &z).unwrap();
    assert_eq!((r.raw, r.normalized()), (0.0, 0.0));
    assert_eq!(biot_delta_h(&h, &sc, &z).unwrap(), 0.0);
}

fn plus(a: &VariationField, b: &VariationField) -> VariationField {
    let s3 = |x: &Vec<Vec<[f64; 3]>>, y: &Vec<Vec<[f64; 3]>>| -> Vec<Vec<[f64; 3]>> {
        x.iter()
            .zip(y)
            .map(|(r, q)| r.iter().zip(q).map(|(u, v)| std::array::from_fn(|i| u[i] + v[i])).collect())
            .collect()
    };
    let s1 = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        x.iter().zip(y).map(|(r, q)| r.iter().zip(q).map(|(u, v)| u + v).collect()).collect()
    };
    VariationField {
        du: s3(&a.du, &b.du),
        dphi: s3(&a.dphi, &b.dphi),
        dvarphi: s1(&a.dvarphi, &b.dvarphi),
        dtheta: s1(&a.dtheta, &b.dtheta),
        ds: s3(&a.ds, &b.ds),
    }
}

#[test]
fn raw_residuals_are_linear_in_the_variation() {
    let (sc, h) = short_run(0.2);
    let w = default_window(&h);
    let v1 = VariationField::random(1, &h, &sc.boundary, Principle::Hamilton, w).unwrap();
    let v2 = VariationField::random(2, &h, &sc.boundary, Principle::Hamilton, w).unwrap();
    let a = -2.3;
    let combo = plus(&v1.scaled(a), &v2);
    for f in [euler_lagrange_residual_mech, euler_lagrange_residual_thermal] {
        let (r1, r2, r) = (f(&h, &sc, &v1).unwrap(), f(&h, &sc, &v2).unwrap(), f(&h, &sc, &combo).unwrap());
        let expect = a * r1.raw + r2.raw;
        assert!((r.raw - expect).abs() <= 1e-12 * (r1.raw.abs() * a.abs() + r2.raw.abs()), "{} {expect}", r.raw);
        let scaled = f(&h, &sc, &v1.scaled(a)).unwrap();
        assert!((scaled.normalized() - r1.normalized()).abs() <= 1e-12 * r1.normalized());
    }
}

#[test]
fn variations_violating_constraints_are_rejected() {
    let (sc, h) = short_run(0.2);
    let w = default_window(&h);
    let mut v = VariationField::random(3, &h, &sc.boundary, Principle::Hamilton, w).unwrap();
    v.check(&h, &sc.boundary, Principle::Hamilton, w).unwrap();
    v.du[h.len() / 2][0][1] = 1e-3;
    assert!(matches!(euler_lagrange_residual_mech(&h, &sc, &v), Err(Error::ConstraintViolation(_))));

    let mut v = VariationField::random(3, &h, &sc.boundary, Principle::Hamilton, w).unwrap();
    v.dtheta[0][5] = 1.0;
    assert!(matches!(v.check(&h, &sc.boundary, Principle::Hamilton, w), Err(Error::ConstraintViolation(_))));

    let mut v = VariationField::random(4, &h, &sc.boundary, Principle::Biot, w).unwrap();
    let right = h.grid.n_nodes - 1;
    v.ds[h.len() / 2][right][0] = 0.5;
    assert!(matches!(biot_delta_h(&h, &sc, &v), Err(Error::ConstraintViolation(_))));
}

#[test]
fn natural_ends_are_free_in_random_variations() {
    let (sc, h) = short_run(0.2);
    let w = default_window(&h);
    let right = h.grid.n_nodes - 1;
    let m = h.len() / 2;
    let vh = VariationField::random(5, &h, &sc.boundary, Principle::Hamilton, w).unwrap();
    assert_eq!(vh.du[m][0], [0.0; 3]);
    assert!(vh.du[m][right].iter().any(|c| c.abs() > 0.0));
    assert!(vh.ds.iter().flatten().all(|s| *s == [0.0; 3]));
    let vb = VariationField::random(5, &h, &sc.boundary, Principle::Biot, w).unwrap();
    assert_eq!(vb.ds[m][right], [0.0; 3]);
    assert!(vb.ds[m][0].iter().any(|c| c.abs() > 0.0));
    assert!(vb.dtheta.iter().flatten().all(|t| *t == 0.0));
}

#[test]
fn computed_histories_satisfy_the_principles() {
    let (sc, h) = short_run(0.6);
    for row in variational_report(&h, &sc, &[1, 2, 3, 4, 5]).unwrap() {
        assert!(row.defect <= 1e-3, "{row:?}");
        assert_eq!(row.resolution_dt, sc.dt);
    }
    let w = default_window(&h);
    let v = VariationField::random(1, &h, &sc.boundary, Principle::Hamilton, w).unwrap();
    let base = euler_lagrange_residual_mech(&h, &sc, &v).unwrap().normalized();
    let mut bad = h.clone();
    bad.states.iter_mut().flat_map(|s| s.u.iter_mut()).flatten().for_each(|c| *c *= 1.1);
    let corrupt = euler_lagrange_residual_mech(&bad, &sc, &v).unwrap().normalized();
    assert!(corrupt >= 10.0 * base, "{base:e} {corrupt:e}");
}

#[test]
fn cattaneo_bracket_converges_second_order() {
    let d: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| manufactured_bracket_defect(dt)).collect();
    assert!(d[0] < 1e-3, "{d:?}");
    for w in d.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..4.5).contains(&r), "{d:?}");
    }
}

#[test]
fn actions_vanish_on_the_null_history() {
    let sc = scenario_file("zero.toml");
    let h = run_simulation(&sc).unwrap();
    let (t1, t2) = (h.times[0], h.t_end());
    assert_eq!(action_mechanical(&h, &sc, t1, t2).unwrap(), 0.0);
    // T = θ0 on a null history, so only the heat supply could contribute
    assert_eq!(action_thermal(&h, &sc, t1, t2).unwrap(), 0.0);
    let b = evaluate_biot_functionals(&h, &sc, h.times[1]).unwrap();
    assert_eq!(b, BiotFunctionals::default());
    assert_eq!(b.h(), 0.0);
}

#[test]
fn actions_settle_under_refinement() {
    let sc = Scenario { t_end: 0.2, ..scenario_file("variational.toml") };
    let vals: Vec<(f64, f64)> = (1..=3)
        .map(|l| {
            let s = sc.refined(l);
            let h = run_simulation(&s).unwrap();
            (action_mechanical(&h, &s, 0.05, 0.15).unwrap(), action_thermal(&h, &s, 0.05, 0.15).unwrap())
        })
        .collect();
    let (m1, m2) = ((vals[0].0 - vals[1].0).abs(), (vals[1].0 - vals[2].0).abs());
    let (t1, t2) = ((vals[0].1 - vals[1].1).abs(), (vals[1].1 - vals[2].1).abs());
    assert!(m2 < m1 && m2 <= 1e-2 * vals[2].0.abs(), "{vals:?}");
    assert!(t2 < t1 && t2 <= 1e-2 * vals[2].1.abs(), "{vals:?}");
}

#[test]
fn dissipation_functional_vanishes_without_heat_flow() {
    let mut sc = scenario_file("energy.toml");
    sc.t_end = 0.1;
    let h = run_simulation(&sc).unwrap();
    assert!(h.states.iter().all(|s| s.q.iter().all(|q| *q == [0.0; 3])));
    let b = evaluate_biot_functionals(&h, &sc, 0.05).unwrap();
    assert_eq!(b.d, 0.0);
    assert!(b.v > 0.0);
    assert_eq!(b.g, 0.0);
}

#[test]
fn out_of_range_times_are_rejected() {
    let (sc, h) = short_run(0.2);
    let range = |r: Result<f64, Error>| matches!(r, Err(Error::Range { .. }));
    assert!(range(action_mechanical(&h, &sc, 0.0, 0.3)));
    assert!(range(action_thermal(&h, &sc, 0.1, 0.05)));
    assert!(matches!(evaluate_biot_functionals(&h, &sc, 0.0), Err(Error::Range { .. })));
    assert!(matches!(evaluate_biot_functionals(&h, &sc, h.t_end()), Err(Error::Range { .. })));
    assert!(matches!(
        VariationField::random(1, &h, &sc.boundary, Principle::Hamilton, (0.0, h.t_end())),
        Err(Error::Range { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn random_variations_meet_their_constraints(seed in 0u64..10_000, left in 0usize..3, right in 0usize..3) {
        let cond = [Condition::Essential, Condition::Natural, Condition::Essential];
        let boundary = BoundarySpec { left: EndSpec::all(cond[left]), right: EndSpec::all(cond[right]) };
        let grid = Grid1D::new(9, 1.0).unwrap();
        let m = 21;
        let h = History {
            grid,
            theta0: 1.0,
            sample_dt: 0.05,
            times: (0..m).map(|i| i as f64 * 0.05).collect(),
            states: vec![FieldState::zeros(9); m],
            traces: vec![Default::default(); m],
            s: vec![vec![[0.0; 3]; 9]; m],
        };
        let w = default_window(&h);
        for p in [Principle::Hamilton, Principle::Biot] {
            let v = VariationField::random(seed, &h, &boundary, p, w).unwrap();
            prop_assert!(v.check(&h, &boundary, p, w).is_ok());
        }
    }
}
