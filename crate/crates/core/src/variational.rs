//! Functionals of the Hamilton- and Biot-type principles and the residuals
//! of their first variations evaluated on a computed history.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::evaluate_constitutive;
use crate::dynamics::{History, Scenario};
use crate::energetics::{free_energy_density, kinetic_energy, nodal_kinematics};
use crate::error::{Error, Result};
use crate::field::{ddx, ddx3};
use crate::loads::{BoundarySpec, Condition, End, Group};
use crate::material::invert_conductivity;
use crate::tensor::*;

const EPS: f64 = 1e-30;
const CONSTRAINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Principle {
    /// Variations vanish at t₁, t₂ and on Σ1, Σ3, Σ5, Σ7.
    Hamilton,
    /// Variations vanish on Σ1, Σ3, Σ5 and δs on Σ8.
    Biot,
}

/// Variation fields sampled on the history's nodes and sample times,
/// indexed `[sample][node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationField {
    pub du: Vec<Vec<Vec3>>,
    pub dphi: Vec<Vec<Vec3>>,
    pub dvarphi: Vec<Vec<f64>>,
    pub dtheta: Vec<Vec<f64>>,
    pub ds: Vec<Vec<Vec3>>,
}

/// Which ends a field must vanish on, as (left, right).
fn clamps(b: &BoundarySpec, p: Principle) -> [(bool, bool); 5] {
    let ess = |g: Group| {
        (
            b.left.condition(g) == Condition::Essential,
            b.right.condition(g) == Condition::Essential,
        )
    };
    let nat = |g: Group| {
        (
            b.left.condition(g) == Condition::Natural,
            b.right.condition(g) == Condition::Natural,
        )
    };
    let theta = match p {
        Principle::Hamilton => ess(Group::Thermal),
        Principle::Biot => (false, false),
    };
    let s = match p {
        Principle::Hamilton => (false, false),
        Principle::Biot => nat(Group::Thermal),
    };
    [ess(Group::Displacement), ess(Group::Rotation), ess(Group::Porosity), theta, s]
}

fn window_factor(t: f64, t1: f64, t2: f64) -> f64 {
    if t <= t1 || t >= t2 {
        0.0
    } else {
        (std::f64::consts::PI * (t - t1) / (t2 - t1)).sin().powi(2)
    }
}

/// Interior sample window used by every residual: excludes the first and
/// last samples, where central time differences are unavailable.
pub fn default_window(h: &History) -> (f64, f64) {
    let m = h.len();
    (h.times[1.min(m - 1)], h.times[m.saturating_sub(2)])
}

fn check_window(h: &History, t1: f64, t2: f64) -> Result<(usize, usize)> {
    let err = Error::Range { t1, t2, t_end: h.t_end() };
    if h.len() < 3 || !(t1 < t2) {
        return Err(err);
    }
    match (h.index_of(t1), h.index_of(t2)) {
        (Some(a), Some(b)) if a >= 1 && b + 1 < h.len() => Ok((a, b)),
        _ => Err(err),
    }
}

impl VariationField {
    pub fn zeros(samples: usize, nodes: usize) -> Self {
        Self {
            du: vec![vec![ZERO3; nodes]; samples],
            dphi: vec![vec![ZERO3; nodes]; samples],
            dvarphi: vec![vec![0.0; nodes]; samples],
            dtheta: vec![vec![0.0; nodes]; samples],
            ds: vec![vec![ZERO3; nodes]; samples],
        }
    }

    /// Random cubic polynomials in x, multiplied by x and/or (L − x) on the
    /// constrained ends. For Hamilton variations the time factor is a sin²
    /// window on [t1, t2]; Biot variations get a slow cosine modulation.
    pub fn random(
        seed: u64,
        history: &History,
        boundary: &BoundarySpec,
        principle: Principle,
        window: (f64, f64),
    ) -> Result<Self> {
        let (t1, t2) = window;
        check_window(history, t1, t2)?;
        let g = &history.grid;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cl = clamps(boundary, principle);
        // 11 scalar channels: δu (3), δφ (3), δ(volume fraction), δθ, δs (3)
        let owner = [0, 0, 0, 1, 1, 1, 2, 3, 4, 4, 4];
        let coef: Vec<[f64; 4]> = (0..11)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect();
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let profile: Vec<Vec<f64>> = (0..11)
            .map(|c| {
                let (l, r) = cl[owner[c]];
                (0..g.n_nodes)
                    .map(|k| {
                        let xi = k as f64 / (g.n_nodes - 1) as f64;
                        let p = coef[c][0] + xi * (coef[c][1] + xi * (coef[c][2] + xi * coef[c][3]));
                        let mut v = p;
                        if l {
                            v *= xi;
                        }
                        if r {
                            v *= 1.0 - xi;
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        let mut out = Self::zeros(history.len(), g.n_nodes);
        let span = history.t_end().max(f64::MIN_POSITIVE);
        for (m, &t) in history.times.iter().enumerate() {
            let f = match principle {
                Principle::Hamilton => window_factor(t, t1, t2),
                Principle::Biot => {
                    if t < t1 || t > t2 {
                        0.0
                    } else {
                        1.0 + 0.5 * (2.0 * std::f64::consts::PI * t / span + phase).cos()
                    }
                }
            };
            for k in 0..g.n_nodes {
                for i in 0..3 {
                    out.du[m][k][i] = f * profile[i][k];
                    out.dphi[m][k][i] = f * profile[3 + i][k];
                    out.ds[m][k][i] = f * profile[8 + i][k];
                }
                out.dvarphi[m][k] = f * profile[6][k];
                out.dtheta[m][k] = f * profile[7][k];
            }
            if principle == Principle::Hamilton {
                out.ds[m].fill(ZERO3);
            } else {
                out.dtheta[m].fill(0.0);
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let s3 = |v: &Vec<Vec<Vec3>>| -> Vec<Vec<Vec3>> {
            v.iter().map(|r| r.iter().map(|x| x.map(|c| a * c)).collect()).collect()
        };
        let s1 = |v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> { v.iter().map(|r| r.iter().map(|x| a * x).collect()).collect() };
        Self {
            du: s3(&self.du),
            dphi: s3(&self.dphi),
            dvarphi: s1(&self.dvarphi),
            dtheta: s1(&self.dtheta),
            ds: s3(&self.ds),
        }
    }

    /// Verifies the endpoint and, for Hamilton variations, the window constraints.
    pub fn check(&self, history: &History, boundary: &BoundarySpec, principle: Principle, window: (f64, f64)) -> Result<()> {
        let n = history.grid.n_nodes;
        if self.du.len() != history.len() || self.du.iter().any(|r| r.len() != n) {
            return Err(Error::SizeMismatch { expected: history.len(), got: self.du.len() });
        }
        let cl = clamps(boundary, principle);
        let names = ["displacement", "rotation", "porosity", "temperature", "entropy flow"];
        for m in 0..history.len() {
            for (c, &(l, r)) in cl.iter().enumerate() {
                for (on, k, side) in [(l, 0, "left"), (r, n - 1, "right")] {
                    if on && self.magnitude(c, m, k) > CONSTRAINT_TOL {
                        return Err(Error::ConstraintViolation(format!(
                            "{} variation nonzero at the {side} end, t = {}",
                            names[c], history.times[m]
                        )));
                    }
                }
            }
        }
        let (t1, t2) = window;
        for (m, &t) in history.times.iter().enumerate() {
            // residual quadrature excludes the outer samples, so anything
            // nonzero there would be silently dropped
            let outside = m == 0 || m + 1 == history.len() || (principle == Principle::Hamilton && (t <= t1 || t >= t2));
            if outside && (0..n).any(|k| (0..5).any(|c| self.magnitude(c, m, k) > CONSTRAINT_TOL)) {
                return Err(Error::ConstraintViolation(format!("variation nonzero outside the window at t = {t}")));
            }
        }
        Ok(())
    }

    fn magnitude(&self, c: usize, m: usize, k: usize) -> f64 {
        match c {
            0 => norm_sq(&self.du[m][k]).sqrt(),
            1 => norm_sq(&self.dphi[m][k]).sqrt(),
            2 => self.dvarphi[m][k].abs(),
            3 => self.dtheta[m][k].abs(),
            _ => norm_sq(&self.ds[m][k]).sqrt(),
        }
    }
}

/// A residual integral with the norms used to normalize it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// Signed space-time integral; linear in the variation.
    pub raw: f64,
    pub norm_variation: f64,
    /// L2 norm of the individual terms of the equation.
    pub norm_terms: f64,
}

impl Residual {
    pub fn normalized(&self) -> f64 {
        self.raw.abs() / (self.norm_variation * self.norm_terms + EPS)
    }
}

/// Central difference in time of a per-sample scalar.
fn d_dt(f: impl Fn(usize) -> f64, m: usize, dt: f64) -> f64 {
    (f(m + 1) - f(m - 1)) / (2.0 * dt)
}

fn d2_dt2(f: impl Fn(usize) -> f64, m: usize, dt: f64) -> f64 {
    (f(m + 1) - 2.0 * f(m) + f(m - 1)) / (dt * dt)
}

/// Time derivative usable at every sample: central inside, second-order
/// one-sided at the first and last samples.
fn d_dt_any(f: impl Fn(usize) -> f64, m: usize, len: usize, dt: f64) -> f64 {
    if len < 3 {
        return 0.0;
    }
    if m == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * dt)
    } else if m + 1 == len {
        (3.0 * f(m) - 4.0 * f(m - 1) + f(m - 2)) / (2.0 * dt)
    } else {
        d_dt(f, m, dt)
    }
}

/// Residuals of the three mechanical balance laws at one sample, with the
/// squared magnitudes of their individual terms per node.
struct MechResidual {
    u: Vec<Vec3>,
    phi: Vec<Vec3>,
    varphi: Vec<f64>,
    terms_sq: Vec<f64>,
}

fn sq3(a: &Vec3) -> f64 {
    norm_sq(a)
}

fn mech_residual(h: &History, sc: &Scenario, m: usize) -> Result<MechResidual> {
    let g = &h.grid;
    let mc = &sc.material;
    let rho = mc.density;
    let dt = h.sample_dt;
    let s = &h.states[m];
    let t = h.times[m];
    let st = evaluate_constitutive(s, mc, g)?;
    let n = g.n_nodes;
    let mut t1: Vec<Vec3> = st.stress.iter().map(|x| x[0]).collect();
    let mut m1: Vec<Vec3> = st.couple.iter().map(|x| x[0]).collect();
    let mut h1: Vec<f64> = st.h.iter().map(|x| x[0]).collect();
    for e in End::BOTH {
        let spec = sc.boundary.end(e);
        let k = g.node(e);
        if spec.displacement == Condition::Natural {
            t1[k] = spec.datum_vec(Group::Displacement, t).map(|x| e.normal() * x);
        }
        if spec.rotation == Condition::Natural {
            m1[k] = spec.datum_vec(Group::Rotation, t).map(|x| e.normal() * x);
        }
        if spec.porosity == Condition::Natural {
            h1[k] = e.normal() * spec.datum_vec(Group::Porosity, t)[0];
        }
    }
    let div_t = ddx3(&t1, g)?;
    let div_m = ddx3(&m1, g)?;
    let div_h = ddx(&h1, g)?;
    let mut out = MechResidual {
        u: vec![ZERO3; n],
        phi: vec![ZERO3; n],
        varphi: vec![0.0; n],
        terms_sq: vec![0.0; n],
    };
    let (prev, next) = (&h.states[m - 1], &h.states[m + 1]);
    for k in 0..n {
        let x = g.x(k);
        let f = sc.loads.force(x, t).map(|c| rho * c);
        let l = sc.loads.couple(x, t).map(|c| rho * c);
        let le = rho * sc.loads.equilibrated(x, t);
        let acc: Vec3 = std::array::from_fn(|i| rho * (next.v[k][i] - prev.v[k][i]) / (2.0 * dt));
        let alpha: Vec3 = std::array::from_fn(|i| (next.omega[k][i] - prev.omega[k][i]) / (2.0 * dt));
        let j_alpha = mat_vec(&mc.micro_inertia, &alpha).map(|c| rho * c);
        let vpdd = rho * mc.equilibrated_inertia * (next.varphidot[k] - prev.varphidot[k]) / (2.0 * dt);
        let mut eps_t = ZERO3;
        for (i, e) in eps_t.iter_mut().enumerate() {
            for r in 0..3 {
                for q in 0..3 {
                    *e += levi_civita(i, r, q) * st.stress[k][r][q];
                }
            }
        }
        for i in 0..3 {
            out.u[k][i] = div_t[k][i] + f[i] - acc[i];
            out.phi[k][i] = div_m[k][i] + eps_t[i] + l[i] - j_alpha[i];
        }
        out.varphi[k] = div_h[k] + st.g[k] + le - vpdd;
        out.terms_sq[k] = sq3(&div_t[k])
            + sq3(&f)
            + sq3(&acc)
            + sq3(&div_m[k])
            + sq3(&eps_t)
            + sq3(&l)
            + sq3(&j_alpha)
            + div_h[k].powi(2)
            + st.g[k].powi(2)
            + le * le
            + vpdd * vpdd;
    }
    Ok(out)
}

/// Residual of the temperature equation K_ij θ,ij + ρ(1 + τ∂t)(r − θ0 η̇) at one sample.
fn thermal_residual(h: &History, sc: &Scenario, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = &h.grid;
    let mc = &sc.material;
    let rho = mc.density;
    let tau = mc.relaxation_time;
    let dt = h.sample_dt;
    let t = h.times[m];
    let eta: Vec<Vec<f64>> = (m - 1..=m + 1)
        .map(|j| evaluate_constitutive(&h.states[j], mc, g).map(|s| s.rho_eta))
        .collect::<Result<_>>()?;
    let mut grad = ddx(&h.states[m].theta, g)?;
    for e in End::BOTH {
        let spec = sc.boundary.end(e);
        if spec.thermal == Condition::Natural {
            let d = spec.datum(Group::Thermal, t)[0];
            grad[g.node(e)] = e.normal() * (d.value + tau * d.rate) / mc.conductivity[0][0];
        }
    }
    let lap = ddx(&grad, g)?;
    let n = g.n_nodes;
    let (mut res, mut sq) = (vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let r = sc.loads.heat_jet(g.x(k), t);
        let cond = mc.conductivity[0][0] * lap[k];
        let src = rho * r.value;
        let src_rate = tau * rho * r.rate;
        let e1 = mc.reference_temperature * d_dt(|j| eta[j + 1 - m][k], m, dt);
        let e2 = mc.reference_temperature * tau * d2_dt2(|j| eta[j + 1 - m][k], m, dt);
        res[k] = cond + src + src_rate - e1 - e2;
        sq[k] = cond * cond + src * src + src_rate * src_rate + e1 * e1 + e2 * e2;
    }
    Ok((res, sq))
}

fn time_weights(h: &History, a: usize, b: usize) -> Vec<(usize, f64)> {
    (a..=b)
        .map(|m| {
            let w = if m == a || m == b { 0.5 } else { 1.0 };
            (m, w * h.sample_dt)
        })
        .collect()
}

fn interior(h: &History) -> Result<(usize, usize)> {
    if h.len() < 3 {
        return Err(Error::Range { t1: 0.0, t2: h.t_end(), t_end: h.t_end() });
    }
    Ok((1, h.len() - 2))
}

fn check_shape(h: &History, v: &VariationField) -> Result<()> {
    if v.du.len() != h.len() {
        return Err(Error::SizeMismatch { expected: h.len(), got: v.du.len() });
    }
    Ok(())
}

/// ∫∫[(T_ji,j + ρf_i − ρü_i)δu_i + (M_ji,j + ε_irs T_rs + ρℓ_i − ρJ_ij φ̈_j)δφ_i
///    + (h_i,i + g + ρℓ − ρχ φ̈)δφ] dV dt.
pub fn euler_lagrange_residual_mech(h: &History, sc: &Scenario, v: &VariationField) -> Result<Residual> {
    check_shape(h, v)?;
    v.check(h, &sc.boundary, Principle::Hamilton, (h.times[0], h.t_end()))
        .or_else(|e| match e {
            // window position is not this function's concern, only endpoints
            Error::ConstraintViolation(ref m) if m.contains("outside the window") => Ok(()),
            e => Err(e),
        })?;
    let (a, b) = interior(h)?;
    let w = h.grid.weights();
    let (mut raw, mut nv, mut nt) = (0.0, 0.0, 0.0);
    for (m, wt) in time_weights(h, a, b) {
        let r = mech_residual(h, sc, m)?;
        for k in 0..h.grid.n_nodes {
            let wk = wt * w[k];
            raw += wk * (dot(&r.u[k], &v.du[m][k]) + dot(&r.phi[k], &v.dphi[m][k]) + r.varphi[k] * v.dvarphi[m][k]);
            nv += wk * (norm_sq(&v.du[m][k]) + norm_sq(&v.dphi[m][k]) + v.dvarphi[m][k].powi(2));
            nt += wk * r.terms_sq[k];
        }
    }
    Ok(Residual { raw, norm_variation: nv.sqrt(), norm_terms: nt.sqrt() })
}

/// ∫∫{K_ij θ,ij + ρ(1 + τp)(r − θ0 η̇)}δθ dV dt.
pub fn euler_lagrange_residual_thermal(h: &History, sc: &Scenario, v: &VariationField) -> Result<Residual> {
    check_shape(h, v)?;
    v.check(h, &sc.boundary, Principle::Hamilton, (h.times[0], h.t_end()))
        .or_else(|e| match e {
            Error::ConstraintViolation(ref m) if m.contains("outside the window") => Ok(()),
            e => Err(e),
        })?;
    let (a, b) = interior(h)?;
    let w = h.grid.weights();
    let (mut raw, mut nv, mut nt) = (0.0, 0.0, 0.0);
    for (m, wt) in time_weights(h, a, b) {
        let (r, sq) = thermal_residual(h, sc, m)?;
        for k in 0..h.grid.n_nodes {
            let wk = wt * w[k];
            raw += wk * r[k] * v.dtheta[m][k];
            nv += wk * v.dtheta[m][k].powi(2);
            nt += wk * sq[k];
        }
    }
    Ok(Residual { raw, norm_variation: nv.sqrt(), norm_terms: nt.sqrt() })
}

/// Biot variation at one sample, with its normalization.
fn biot_at(h: &History, sc: &Scenario, v: &VariationField, m: usize, k_inv: &Mat3) -> Result<Residual> {
    let g = &h.grid;
    let w = g.weights();
    let mech = mech_residual(h, sc, m)?;
    let (raw_c, sq_c) = cattaneo_bracket(h, sc, m, k_inv)?;
    let (mut raw, mut nv, mut nt) = (0.0, 0.0, 0.0);
    for k in 0..g.n_nodes {
        // δH carries the balance laws with the opposite sign
        raw += w[k]
            * (-dot(&mech.u[k], &v.du[m][k]) - dot(&mech.phi[k], &v.dphi[m][k]) - mech.varphi[k] * v.dvarphi[m][k]
                + dot(&raw_c[k], &v.ds[m][k]));
        nv += w[k]
            * (norm_sq(&v.du[m][k]) + norm_sq(&v.dphi[m][k]) + v.dvarphi[m][k].powi(2) + norm_sq(&v.ds[m][k]));
        nt += w[k] * (mech.terms_sq[k] + sq_c[k]);
    }
    Ok(Residual { raw, norm_variation: nv.sqrt(), norm_terms: nt.sqrt() })
}

/// θ0(1 + τp)K̃_ij ṡ_i − θ,j per node, with ṡ = q/θ0 and s̈ = q̇/θ0 from
/// central differences of q.
fn cattaneo_bracket(h: &History, sc: &Scenario, m: usize, k_inv: &Mat3) -> Result<(Vec<Vec3>, Vec<f64>)> {
    let g = &h.grid;
    let mc = &sc.material;
    let tau = mc.relaxation_time;
    let dt = h.sample_dt;
    let t = h.times[m];
    let mut grad = ddx(&h.states[m].theta, g)?;
    for e in End::BOTH {
        let spec = sc.boundary.end(e);
        if spec.thermal == Condition::Natural {
            let d = spec.datum(Group::Thermal, t)[0];
            grad[g.node(e)] = e.normal() * (d.value + tau * d.rate) / mc.conductivity[0][0];
        }
    }
    let n = g.n_nodes;
    let (mut res, mut sq) = (vec![ZERO3; n], vec![0.0; n]);
    for k in 0..n {
        let q = h.states[m].q[k];
        let qdot: Vec3 = std::array::from_fn(|i| d_dt(|j| h.states[j].q[k][i], m, dt));
        let a = mat_vec(k_inv, &q);
        let b = mat_vec(k_inv, &qdot).map(|x| tau * x);
        let gth = [grad[k], 0.0, 0.0];
        for i in 0..3 {
            res[k][i] = a[i] + b[i] - gth[i];
        }
        sq[k] = norm_sq(&a) + norm_sq(&b) + norm_sq(&gth);
    }
    Ok((res, sq))
}

/// Largest normalized Biot variation δH = δV + δG + δF + δD over the interior samples.
pub fn biot_delta_h(h: &History, sc: &Scenario, v: &VariationField) -> Result<f64> {
    Ok(max_over_time(&biot_delta_h_series(h, sc, v)?).normalized())
}

/// Worst sample, with the history norm taken as the largest term norm of
/// the run. Per-sample term norms would blow up the relative differencing
/// error near t = 0, where the response grows like a high power of t.
pub fn max_over_time(series: &[Residual]) -> Residual {
    let terms = series.iter().map(|r| r.norm_terms).fold(0.0, f64::max);
    series
        .iter()
        .map(|r| Residual { norm_terms: terms, ..*r })
        .max_by(|a, b| a.normalized().total_cmp(&b.normalized()))
        .unwrap_or(Residual { raw: 0.0, norm_variation: 0.0, norm_terms: 0.0 })
}

/// δH at every interior sample.
pub fn biot_delta_h_series(h: &History, sc: &Scenario, v: &VariationField) -> Result<Vec<Residual>> {
    check_shape(h, v)?;
    v.check(h, &sc.boundary, Principle::Biot, (h.times[0], h.t_end()))?;
    let (a, b) = interior(h)?;
    let k_inv = invert_conductivity(&sc.material)?;
    (a..=b).map(|m| biot_at(h, sc, v, m, &k_inv)).collect()
}

/// The fourth bracket of δH on its own: ∫[θ0(1+τp)K̃ ṡ − ∇θ]·δs dV,
/// normalized per sample and maximized over the interior samples.
pub fn cattaneo_bracket_defect(h: &History, sc: &Scenario, ds: &[Vec<Vec3>]) -> Result<f64> {
    if ds.len() != h.len() {
        return Err(Error::SizeMismatch { expected: h.len(), got: ds.len() });
    }
    let (a, b) = interior(h)?;
    let k_inv = invert_conductivity(&sc.material)?;
    let w = h.grid.weights();
    let mut series = Vec::new();
    for m in a..=b {
        let (r, sq) = cattaneo_bracket(h, sc, m, &k_inv)?;
        let (mut raw, mut nv, mut nt) = (0.0, 0.0, 0.0);
        for k in 0..h.grid.n_nodes {
            raw += w[k] * dot(&r[k], &ds[m][k]);
            nv += w[k] * norm_sq(&ds[m][k]);
            nt += w[k] * sq[k];
        }
        series.push(Residual { raw, norm_variation: nv.sqrt(), norm_terms: nt.sqrt() });
    }
    Ok(max_over_time(&series).normalized())
}

fn window_indices(h: &History, t1: f64, t2: f64) -> Result<(usize, usize)> {
    let err = Error::Range { t1, t2, t_end: h.t_end() };
    if !(t1 < t2) {
        return Err(err);
    }
    match (h.index_of(t1), h.index_of(t2)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(err),
    }
}

/// Space-time value of the bracketed mechanical functional, T = θ + θ0.
pub fn action_mechanical(h: &History, sc: &Scenario, t1: f64, t2: f64) -> Result<f64> {
    let (a, b) = window_indices(h, t1, t2)?;
    let g = &h.grid;
    let mc = &sc.material;
    let rho = mc.density;
    let w = g.weights();
    let mut total = 0.0;
    for (m, wt) in time_weights(h, a, b) {
        let s = &h.states[m];
        let t = h.times[m];
        let kin = nodal_kinematics(s, g)?;
        let stress = evaluate_constitutive(s, mc, g)?;
        let mut vol = kinetic_energy(s, mc, g);
        for k in 0..g.n_nodes {
            let x = g.x(k);
            let psi = free_energy_density(&kin[k], &s.q[k], mc).total();
            let eta_t = stress.rho_eta[k] * (s.theta[k] + mc.reference_temperature);
            let bq = 0.5 * bilinear(&mc.flux_energy, &s.q[k], &s.q[k]);
            let work = dot(&sc.loads.force(x, t), &s.u[k])
                + dot(&sc.loads.couple(x, t), &s.phi[k])
                + sc.loads.equilibrated(x, t) * s.varphi[k];
            vol += w[k] * (-psi - eta_t + bq + rho * work);
        }
        let mut surf = 0.0;
        for e in End::BOTH {
            let spec = sc.boundary.end(e);
            let k = g.node(e);
            if spec.displacement == Condition::Natural {
                surf += dot(&spec.datum_vec(Group::Displacement, t), &s.u[k]);
            }
            if spec.rotation == Condition::Natural {
                surf += dot(&spec.datum_vec(Group::Rotation, t), &s.phi[k]);
            }
            if spec.porosity == Condition::Natural {
                surf += spec.datum_vec(Group::Porosity, t)[0] * s.varphi[k];
            }
        }
        total += wt * (vol + surf);
    }
    Ok(total)
}

/// ∫∫ ½K_ij T,i T,j dV dt − ∫(1 + τp){∫ρ(ηṪ − r)T dV + ∫_{Σ8} q*T dσ} dt, T = θ + θ0.
pub fn action_thermal(h: &History, sc: &Scenario, t1: f64, t2: f64) -> Result<f64> {
    let (a, b) = window_indices(h, t1, t2)?;
    let g = &h.grid;
    let mc = &sc.material;
    let rho = mc.density;
    let theta0 = mc.reference_temperature;
    let w = g.weights();
    let len = h.len();
    // the braced term as a series, so that p acts on it literally
    let braced = |m: usize| -> Result<f64> {
        let s = &h.states[m];
        let t = h.times[m];
        let eta = evaluate_constitutive(s, mc, g)?.rho_eta;
        let mut v = 0.0;
        for k in 0..g.n_nodes {
            let tdot = d_dt_any(|j| h.states[j].theta[k], m, len, h.sample_dt);
            let temp = s.theta[k] + theta0;
            v += w[k] * (eta[k] * tdot - rho * sc.loads.heat(g.x(k), t)) * temp;
        }
        for e in End::BOTH {
            let spec = sc.boundary.end(e);
            if spec.thermal == Condition::Natural {
                v += spec.datum(Group::Thermal, t)[0].value * (s.theta[g.node(e)] + theta0);
            }
        }
        Ok(v)
    };
    let series: Vec<f64> = (0..len).map(braced).collect::<Result<_>>()?;
    let mut total = 0.0;
    for (m, wt) in time_weights(h, a, b) {
        let grad = ddx(&h.states[m].theta, g)?;
        let cond: f64 = (0..g.n_nodes)
            .map(|k| w[k] * 0.5 * mc.conductivity[0][0] * grad[k] * grad[k])
            .sum();
        let p = d_dt_any(|j| series[j], m, len, h.sample_dt);
        total += wt * (cond - series[m] - mc.relaxation_time * p);
    }
    Ok(total)
}

/// The four functionals of the Biot-type principle at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BiotFunctionals {
    pub v: f64,
    pub g: f64,
    pub f: f64,
    pub d: f64,
}

impl BiotFunctionals {
    pub fn h(&self) -> f64 {
        self.v + self.g + self.f + self.d
    }
}

/// V, G, F and D at sample time t; p acts on the first factor of each
/// p-bearing product by differencing the recorded series.
pub fn evaluate_biot_functionals(h: &History, sc: &Scenario, t: f64) -> Result<BiotFunctionals> {
    let m = h
        .index_of(t)
        .filter(|&m| m >= 1 && m + 1 < h.len())
        .ok_or(Error::Range { t1: t, t2: t, t_end: h.t_end() })?;
    let g = &h.grid;
    let mc = &sc.material;
    let rho = mc.density;
    let dt = h.sample_dt;
    let w = g.weights();
    let s = &h.states[m];
    let kin = nodal_kinematics(s, g)?;
    let stress = evaluate_constitutive(s, mc, g)?;
    let k_inv = invert_conductivity(mc)?;
    let (prev, next) = (&h.states[m - 1], &h.states[m + 1]);
    let mut out = BiotFunctionals::default();
    for k in 0..g.n_nodes {
        let x = g.x(k);
        let psi = free_energy_density(&kin[k], &s.q[k], mc).total();
        let bq = 0.5 * bilinear(&mc.flux_energy, &s.q[k], &s.q[k]);
        out.v += w[k] * (psi + stress.rho_eta[k] * s.theta[k] - bq);

        let acc: Vec3 = std::array::from_fn(|i| (next.v[k][i] - prev.v[k][i]) / (2.0 * dt));
        let alpha: Vec3 = std::array::from_fn(|i| (next.omega[k][i] - prev.omega[k][i]) / (2.0 * dt));
        let vpdd = (next.varphidot[k] - prev.varphidot[k]) / (2.0 * dt);
        let f = sc.loads.force(x, t);
        let l = sc.loads.couple(x, t);
        let le = sc.loads.equilibrated(x, t);
        let ja = mat_vec(&mc.micro_inertia, &alpha);
        let mut fv = 0.0;
        for i in 0..3 {
            fv += (0.5 * acc[i] - f[i]) * s.u[k][i] + (0.5 * ja[i] - l[i]) * s.phi[k][i];
        }
        fv += (0.5 * mc.equilibrated_inertia * vpdd - le) * s.varphi[k];
        out.f += w[k] * rho * fv;

        let qdot: Vec3 = std::array::from_fn(|i| (next.q[k][i] - prev.q[k][i]) / (2.0 * dt));
        let theta0 = mc.reference_temperature;
        // (p + τp²) s = (q + τq̇)/θ0
        let ps: Vec3 = std::array::from_fn(|i| (s.q[k][i] + mc.relaxation_time * qdot[i]) / theta0);
        out.d += w[k] * 0.5 * theta0 * bilinear(&k_inv, &ps, &h.s[m][k]);
    }
    for e in End::BOTH {
        let spec = sc.boundary.end(e);
        let k = g.node(e);
        if spec.displacement == Condition::Natural {
            out.g -= dot(&spec.datum_vec(Group::Displacement, t), &s.u[k]);
        }
        if spec.rotation == Condition::Natural {
            out.g -= dot(&spec.datum_vec(Group::Rotation, t), &s.phi[k]);
        }
        if spec.porosity == Condition::Natural {
            out.g -= spec.datum_vec(Group::Porosity, t)[0] * s.varphi[k];
        }
        if spec.thermal == Condition::Essential {
            out.g -= spec.datum_vec(Group::Thermal, t)[0] * h.s[m][k][0] * e.normal();
        }
    }
    Ok(out)
}

/// One line of the variational report.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalRow {
    pub check: String,
    pub defect: f64,
    pub norm_variation: f64,
    pub resolution_h: f64,
    pub resolution_dt: f64,
    pub seed: u64,
}

/// EL_mech, EL_thermal and biot_deltaH for each seed.
pub fn variational_report(h: &History, sc: &Scenario, seeds: &[u64]) -> Result<Vec<VariationalRow>> {
    let window = default_window(h);
    let mut rows = Vec::new();
    let row = |check: &str, defect: f64, nv: f64, seed: u64| VariationalRow {
        check: check.into(),
        defect,
        norm_variation: nv,
        resolution_h: h.grid.spacing(),
        resolution_dt: sc.dt,
        seed,
    };
    for &seed in seeds {
        let vh = VariationField::random(seed, h, &sc.boundary, Principle::Hamilton, window)?;
        let r = euler_lagrange_residual_mech(h, sc, &vh)?;
        rows.push(row("EL_mech", r.normalized(), r.norm_variation, seed));
        let r = euler_lagrange_residual_thermal(h, sc, &vh)?;
        rows.push(row("EL_thermal", r.normalized(), r.norm_variation, seed));
        let vb = VariationField::random(seed, h, &sc.boundary, Principle::Biot, window)?;
        let worst = max_over_time(&biot_delta_h_series(h, sc, &vb)?);
        rows.push(row("biot_deltaH", worst.normalized(), worst.norm_variation, seed));
    }
    Ok(rows)
}

