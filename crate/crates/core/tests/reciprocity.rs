mod common;

use common::*;
use mptherm_core::dynamics::*;
use mptherm_core::loads::*;
use mptherm_core::reciprocity::*;
use mptherm_core::Error;
use proptest::prelude::*;

/// The shipped pair, shortened.
fn pair(t_end: f64) -> (Scenario, Scenario) {
    let f = |n| Scenario { t_end, ..scenario_file(n) };
    (f("reciprocity_a.toml"), f("reciprocity_b.toml"))
}

#[test]
fn convolution_examples() {
    let dt = 1e-3;
    let m = 1001;
    let ones = vec![1.0; m];
    let c = convolve(&ones, &ones, dt).unwrap();
    assert_eq!(c[0], 0.0);
    for (i, x) in c.iter().enumerate() {
        assert!((x - i as f64 * dt).abs() < 1e-12);
    }

    // e^{-t} * e^{-t} = t e^{-t}; the integrand is constant, so the rule is exact
    let e: Vec<f64> = (0..m).map(|i| (-(i as f64) * dt).exp()).collect();
    let at1 = convolve_at(&e, &e, dt, m - 1);
    assert!((at1 - (-1.0f64).exp()).abs() < 1e-12, "{at1}");

    // 1 * e^{-t} = 1 - e^{-t}, second order in dt
    let err = |dt: f64| {
        let n = (1.0 / dt).round() as usize + 1;
        let e: Vec<f64> = (0..n).map(|i| (-(i as f64) * dt).exp()).collect();
        (convolve_at(&vec![1.0; n], &e, dt, n - 1) - (1.0 - (-1.0f64).exp())).abs()
    };
    let (e1, e2) = (err(2e-3), err(1e-3));
    assert!(e2 < 1e-6, "{e2:e}");
    assert!((e1 / e2 - 4.0).abs() < 0.05, "{}", e1 / e2);
    let half: Vec<f64> = e.iter().step_by(2).copied().collect();
    assert!(matches!(convolve(&ones, &half, dt), Err(Error::SizeMismatch { .. })));
}

#[test]
fn laplace_examples() {
    let dt = 1e-3;
    let m = 20001;
    let ones = vec![1.0; m];
    let l = laplace_transform(&ones, 2.0, dt);
    let t_end = (m - 1) as f64 * dt;
    let exact = (1.0 - (-2.0 * t_end).exp()) / 2.0;
    assert!((l.value - exact).abs() < 1e-6);
    assert!((l.bound - (-2.0 * t_end).exp() / 2.0).abs() < 1e-15);
    assert!(l.value + l.bound >= 0.5 - 1e-6);

    let e: Vec<f64> = (0..m).map(|i| (-(i as f64) * dt).exp()).collect();
    let l = laplace_transform(&e, 1.0, dt);
    assert!((l.value - 0.5).abs() < 1e-6);

    assert_eq!(laplace_transform(&[], 1.0, dt).value, 0.0);
}

#[test]
fn identical_runs_are_trivially_reciprocal() {
    let (sa, _) = pair(0.2);
    let h = run_simulation(&sa).unwrap();
    for r in reciprocity_defect(&h, &h, &sa, &sa, &default_check_times(&h)).unwrap() {
        assert!(r.defect <= 1e-12);
        assert!(r.i_12.abs() > 0.0);
    }
    for r in transform_identity_defect(&h, &h, &sa, &sa, &[1.0, 3.0]).unwrap() {
        assert!(r.defect <= 1e-12);
    }
}

#[test]
fn null_partner_gives_zero_functionals() {
    let (sa, _) = pair(0.2);
    let sz = Scenario { loads: Loads::default(), ..sa.clone() };
    let (ha, hz) = (run_simulation(&sa).unwrap(), run_simulation(&sz).unwrap());
    for r in reciprocity_defect(&ha, &hz, &sa, &sz, &default_check_times(&ha)).unwrap() {
        assert_eq!(r.i_12, 0.0);
        assert_eq!(r.i_21, 0.0);
        assert_eq!(r.defect, 0.0);
    }
}

#[test]
fn swapping_runs_swaps_functionals() {
    let (sa, sb) = pair(0.3);
    let (ha, hb) = (run_simulation(&sa).unwrap(), run_simulation(&sb).unwrap());
    let t = default_check_times(&ha);
    let ab = reciprocity_defect(&ha, &hb, &sa, &sb, &t).unwrap();
    let ba = reciprocity_defect(&hb, &ha, &sb, &sa, &t).unwrap();
    for (x, y) in ab.iter().zip(&ba) {
        assert_eq!(x.i_12, y.i_21);
        assert_eq!(x.i_21, y.i_12);
    }
    let f = reciprocity_functional(&ha, &hb, &sa, &sb, t[1]).unwrap();
    assert_eq!(f, ab[1].i_12);
}

#[test]
fn functional_is_bilinear_in_the_sources() {
    let (sa, sb) = pair(0.3);
    let k = 2.5;
    let sk = Scenario { loads: sa.loads.scaled(k), ..sa.clone() };
    let (ha, hb, hk) = (run_simulation(&sa).unwrap(), run_simulation(&sb).unwrap(), run_simulation(&sk).unwrap());
    let t = 0.3;
    let base = reciprocity_functional(&ha, &hb, &sa, &sb, t).unwrap();
    let data = reciprocity_functional(&hk, &hb, &sk, &sb, t).unwrap();
    let resp = reciprocity_functional(&hb, &hk, &sb, &sk, t).unwrap();
    let resp0 = reciprocity_functional(&hb, &ha, &sb, &sa, t).unwrap();
    assert!((data - k * base).abs() <= 1e-10 * base.abs());
    assert!((resp - k * resp0).abs() <= 1e-10 * resp0.abs());
}

#[test]
fn pair_defects_are_small() {
    let (sa, sb) = pair(1.0);
    let (ha, hb) = (run_simulation(&sa).unwrap(), run_simulation(&sb).unwrap());
    for r in reciprocity_defect(&ha, &hb, &sa, &sb, &default_check_times(&ha)).unwrap() {
        assert!(r.defect <= 5e-3, "{r:?}");
    }
    for r in transform_identity_defect(&ha, &hb, &sa, &sb, &[1.0, 2.0, 5.0]).unwrap() {
        assert!(r.defect <= 1e-2, "{r:?}");
        assert!(r.bound.is_finite() && r.bound >= 0.0);
    }
}

#[test]
fn mismatched_pairs_are_rejected() {
    let (sa, sb) = pair(0.1);
    let (ha, hb) = (run_simulation(&sa).unwrap(), run_simulation(&sb).unwrap());
    let mut other = sb.clone();
    other.material.density *= 2.0;
    let e = reciprocity_defect(&ha, &hb, &sa, &other, &[0.1]);
    assert!(matches!(e, Err(Error::ScenarioMismatch(_))));

    let fine = sb.refined(2);
    let hf = run_simulation(&fine).unwrap();
    assert!(matches!(reciprocity_defect(&ha, &hf, &sa, &fine, &[0.1]), Err(Error::ScenarioMismatch(_))));

    let mut natural = sb.clone();
    natural.boundary.right = EndSpec::all(Condition::Natural);
    assert!(matches!(
        transform_identity_defect(&ha, &hb, &sa, &natural, &[1.0]),
        Err(Error::ScenarioMismatch(_))
    ));
    assert!(matches!(transform_identity_defect(&ha, &hb, &sa, &sb, &[0.0]), Err(Error::Validation { .. })));
    assert!(matches!(reciprocity_defect(&ha, &hb, &sa, &sb, &[0.5]), Err(Error::Range { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn convolution_commutes(a in proptest::collection::vec(-3.0..3.0f64, 2..40), seed in 0u64..1000) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, x)| (x * (seed as f64 + i as f64)).sin()).collect();
        let (ab, ba) = (convolve(&a, &b, 0.01).unwrap(), convolve(&b, &a, 0.01).unwrap());
        for (x, y) in ab.iter().zip(&ba) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn laplace_is_linear(a in proptest::collection::vec(-3.0..3.0f64, 1..60), k in -4.0..4.0f64, s in 0.1..10.0f64) {
        let b: Vec<f64> = a.iter().map(|x| x.cos()).collect();
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| k * x + y).collect();
        let (la, lb, lc) = (laplace_transform(&a, s, 0.05), laplace_transform(&b, s, 0.05), laplace_transform(&c, s, 0.05));
        prop_assert!((lc.value - (k * la.value + lb.value)).abs() <= 1e-12 * (1.0 + lc.value.abs()));
    }
}
