//! Convolution reciprocity in the time domain and its Laplace-domain form.

use crate::dynamics::{History, Scenario};
use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::loads::{Condition, End, Group, Jet};

const EPS: f64 = 1e-30;

/// Trapezoidal (a * b)(t_m) = ∫₀^{t_m} a(t_m − τ) b(τ) dτ.
pub fn convolve_at(a: &[f64], b: &[f64], dt: f64, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mut acc = 0.5 * (a[m] * b[0] + a[0] * b[m]);
    for j in 1..m {
        acc += a[m - j] * b[j];
    }
    acc * dt
}

/// Trapezoidal convolution at every sample; element 0 is 0.
pub fn convolve(a: &[f64], b: &[f64], dt: f64) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { expected: a.len(), got: b.len() });
    }
    Ok((0..a.len()).map(|m| convolve_at(a, b, dt, m)).collect())
}

/// Truncated transform and its tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceValue {
    pub value: f64,
    /// |a(t_end)| e^{−s t_end} / s.
    pub bound: f64,
}

/// ∫₀^{t_end} e^{−st} a(t) dt by the trapezoid rule on samples t_m = m·dt.
pub fn laplace_transform(series: &[f64], s: f64, dt: f64) -> LaplaceValue {
    if series.is_empty() {
        return LaplaceValue { value: 0.0, bound: 0.0 };
    }
    let n = series.len();
    let mut acc = 0.0;
    for (m, a) in series.iter().enumerate() {
        let w = if m == 0 || m == n - 1 { 0.5 } else { 1.0 };
        acc += w * (-s * m as f64 * dt).exp() * a;
    }
    let t_end = (n - 1) as f64 * dt;
    LaplaceValue {
        value: acc * dt,
        bound: series[n - 1].abs() * (-s * t_end).exp() / s,
    }
}

fn mismatch(m: &str) -> Error {
    Error::ScenarioMismatch(m.into())
}

fn check_pair(ha: &History, hb: &History, sa: &Scenario, sb: &Scenario) -> Result<()> {
    if sa.grid != sb.grid || ha.grid != sa.grid || hb.grid != sb.grid {
        return Err(mismatch("grids differ"));
    }
    if sa.material != sb.material {
        return Err(mismatch("materials differ"));
    }
    if sa.dt != sb.dt || sa.record_every != sb.record_every {
        return Err(mismatch("time steps differ"));
    }
    if !sa.boundary.same_partition(&sb.boundary) {
        return Err(mismatch("boundary partitions differ"));
    }
    if ha.times != hb.times || (ha.sample_dt - sa.sample_dt()).abs() > 1e-15 * sa.sample_dt() {
        return Err(mismatch("sample times differ"));
    }
    Ok(())
}

/// Nodal and endpoint time series of one run, as needed by both checks.
struct Series {
    /// Per node: [f (3), ℓ_i (3), ℓ, r] data of the run.
    data: Vec<[Vec<f64>; 8]>,
    /// Per node: [u (3), u̇ (3), φ (3), φ̇ (3), volume fraction, its rate, θ].
    resp: Vec<[Vec<f64>; 15]>,
}

fn series(h: &History, sc: &Scenario, upto: usize) -> Series {
    let n = h.grid.n_nodes;
    let mut data = Vec::with_capacity(n);
    let mut resp = Vec::with_capacity(n);
    for k in 0..n {
        let x = h.grid.x(k);
        let d: [Vec<f64>; 8] = std::array::from_fn(|c| {
            h.times[..=upto]
                .iter()
                .map(|&t| match c {
                    0..=2 => sc.loads.force(x, t)[c],
                    3..=5 => sc.loads.couple(x, t)[c - 3],
                    6 => sc.loads.equilibrated(x, t),
                    _ => sc.loads.heat(x, t),
                })
                .collect()
        });
        let r: [Vec<f64>; 15] = std::array::from_fn(|c| {
            h.states[..=upto]
                .iter()
                .map(|s| match c {
                    0..=2 => s.u[k][c],
                    3..=5 => s.v[k][c - 3],
                    6..=8 => s.phi[k][c - 6],
                    9..=11 => s.omega[k][c - 9],
                    12 => s.varphi[k],
                    13 => s.varphidot[k],
                    _ => s.theta[k],
                })
                .collect()
        });
        data.push(d);
        resp.push(r);
    }
    Series { data, resp }
}

/// Boundary datum jets of group `g` at the sample times.
fn datum_series(sc: &Scenario, e: End, g: Group, times: &[f64]) -> Vec<[Jet; 3]> {
    times.iter().map(|&t| sc.boundary.end(e).datum(g, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Prescribed u, φ or volume fraction against a traction trace; the datum enters through its rate.
    Field,
    /// Prescribed traction against the field at the endpoint; the field enters through its rate.
    Traction,
    /// Temperature or heat-flux datum; no time derivative involved.
    Thermal,
}

/// One boundary contribution: datum of run a paired with a response of run b.
struct EndTerm {
    end: End,
    group: Group,
    kind: Kind,
    sign: f64,
    datum: Vec<f64>,
    datum_rate: Vec<f64>,
    response: Vec<f64>,
    /// Rate of `response`; only for `Kind::Traction`.
    response_rate: Vec<f64>,
}

/// Σ-terms of the functional with data from `sa` and responses from `hb`.
fn end_terms(hb: &History, sa: &Scenario, upto: usize) -> Vec<EndTerm> {
    let times = &hb.times[..=upto];
    let states = &hb.states[..=upto];
    let traces = &hb.traces[..=upto];
    let theta0 = sa.material.reference_temperature;
    let mut out = Vec::new();
    for (ei, e) in End::BOTH.into_iter().enumerate() {
        let k = hb.grid.node(e);
        let spec = sa.boundary.end(e);
        for g in Group::ALL {
            let d = datum_series(sa, e, g, times);
            for c in 0..g.components() {
                let datum: Vec<f64> = d.iter().map(|j| j[c].value).collect();
                let datum_rate: Vec<f64> = d.iter().map(|j| j[c].rate).collect();
                let cond = spec.condition(g);
                let trace: Vec<f64> = traces
                    .iter()
                    .map(|t| match g {
                        Group::Displacement => t[ei].t_n[c],
                        Group::Rotation => t[ei].m_n[c],
                        Group::Porosity => t[ei].h_n,
                        Group::Thermal => t[ei].q_n,
                    })
                    .collect();
                let field = |f: &dyn Fn(&FieldState) -> f64| -> Vec<f64> { states.iter().map(f).collect() };
                let (kind, sign, response, response_rate) = match (g, cond) {
                    (Group::Thermal, Condition::Essential) => (Kind::Thermal, 1.0 / theta0, trace, Vec::new()),
                    (Group::Thermal, Condition::Natural) => {
                        (Kind::Thermal, -1.0 / theta0, field(&|s| s.theta[k]), Vec::new())
                    }
                    (_, Condition::Essential) => (Kind::Field, -1.0, trace, Vec::new()),
                    (Group::Displacement, Condition::Natural) => {
                        (Kind::Traction, 1.0, field(&|s| s.u[k][c]), field(&|s| s.v[k][c]))
                    }
                    (Group::Rotation, Condition::Natural) => {
                        (Kind::Traction, 1.0, field(&|s| s.phi[k][c]), field(&|s| s.omega[k][c]))
                    }
                    (Group::Porosity, Condition::Natural) => {
                        (Kind::Traction, 1.0, field(&|s| s.varphi[k]), field(&|s| s.varphidot[k]))
                    }
                };
                out.push(EndTerm {
                    end: e,
                    group: g,
                    kind,
                    sign,
                    datum,
                    datum_rate,
                    response,
                    response_rate,
                });
            }
        }
    }
    out
}

/// I_ab(t): data of run a convolved with the response of run b.
pub fn reciprocity_functional(ha: &History, hb: &History, sa: &Scenario, sb: &Scenario, t: f64) -> Result<f64> {
    check_pair(ha, hb, sa, sb)?;
    let m = ha.index_of(t).ok_or(Error::Range { t1: t, t2: t, t_end: ha.t_end() })?;
    Ok(functional_at(hb, sa, m))
}

fn functional_at(hb: &History, sa: &Scenario, m: usize) -> f64 {
    let dt = hb.sample_dt;
    let mc = &sa.material;
    let rho = mc.density;
    let theta0 = mc.reference_temperature;
    let a = series(hb, sa, m);
    let w = hb.grid.weights();
    let mut vol = 0.0;
    for k in 0..hb.grid.n_nodes {
        let (d, r) = (&a.data[k], &a.resp[k]);
        let mut acc = 0.0;
        for i in 0..3 {
            acc += convolve_at(&d[i], &r[3 + i], dt, m);
            acc += convolve_at(&d[3 + i], &r[9 + i], dt, m);
        }
        acc += convolve_at(&d[6], &r[13], dt, m);
        acc -= convolve_at(&d[7], &r[14], dt, m) / theta0;
        vol += w[k] * rho * acc;
    }
    let surf: f64 = end_terms(hb, sa, m)
        .iter()
        .map(|e| {
            let c = match e.kind {
                Kind::Field => convolve_at(&e.datum_rate, &e.response, dt, m),
                Kind::Traction => convolve_at(&e.datum, &e.response_rate, dt, m),
                Kind::Thermal => convolve_at(&e.datum, &e.response, dt, m),
            };
            e.sign * c
        })
        .sum();
    vol + surf
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocityRow {
    pub t: f64,
    pub i_12: f64,
    pub i_21: f64,
    pub defect: f64,
}

/// |I_12 − I_21| / max(|I_12|, |I_21|, ε) at each check time.
pub fn reciprocity_defect(
    ha: &History,
    hb: &History,
    sa: &Scenario,
    sb: &Scenario,
    check_times: &[f64],
) -> Result<Vec<ReciprocityRow>> {
    check_pair(ha, hb, sa, sb)?;
    check_times
        .iter()
        .map(|&t| {
            let m = ha.index_of(t).ok_or(Error::Range { t1: t, t2: t, t_end: ha.t_end() })?;
            let i_12 = functional_at(hb, sa, m);
            let i_21 = functional_at(ha, sb, m);
            Ok(ReciprocityRow {
                t,
                i_12,
                i_21,
                defect: (i_12 - i_21).abs() / i_12.abs().max(i_21.abs()).max(EPS),
            })
        })
        .collect()
}

/// Check times used when none are given: t_end/2 and t_end.
pub fn default_check_times(h: &History) -> Vec<f64> {
    let m = h.len() - 1;
    vec![h.times[m / 2], h.times[m]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformRow {
    pub s: f64,
    /// Sum of the integrals pairing data of run 1 with responses of run 2.
    pub p_12: f64,
    pub p_21: f64,
    /// |p_12 − p_21| over the largest single integral.
    pub defect: f64,
    /// Truncation estimate on the same scale as `defect`.
    pub bound: f64,
}

struct Products {
    terms: Vec<f64>,
    bounds: Vec<f64>,
}

/// Transform-domain products with data of run a and response of run b.
fn transform_products(hb: &History, sa: &Scenario, s: f64) -> Products {
    let dt = hb.sample_dt;
    let last = hb.len() - 1;
    let mc = &sa.material;
    let rho = mc.density;
    let theta0 = mc.reference_temperature;
    let a = series(hb, sa, last);
    let w = hb.grid.weights();
    let tail = (-s * hb.times[last]).exp() / s;
    let lt = |x: &[f64]| laplace_transform(x, s, dt).value;

    // one entry per integral of the display: four volume channels, then
    // one per endpoint and boundary pair
    let mut terms = vec![0.0; 4];
    let mut tails = vec![0.0; 4];
    for k in 0..hb.grid.n_nodes {
        let (d, r) = (&a.data[k], &a.resp[k]);
        let c = w[k] * rho;
        let mut add = |slot: usize, coef: f64, dc: usize, rc: usize| {
            let dv = coef * lt(&d[dc]);
            terms[slot] += dv * lt(&r[rc]);
            tails[slot] += dv * r[rc][last] * tail;
        };
        for i in 0..3 {
            add(0, c * s, i, i);
            add(1, c * s, 3 + i, 6 + i);
        }
        add(2, c * s, 6, 12);
        add(3, -c / theta0, 7, 14);
    }
    // a time derivative on either factor becomes a factor s
    let ends = end_terms(hb, sa, last);
    for chunk in ends.chunk_by(|x, y| x.group == y.group && x.end == y.end) {
        let (mut t, mut b) = (0.0, 0.0);
        for e in chunk {
            let coef = match e.kind {
                Kind::Field | Kind::Traction => e.sign * s,
                Kind::Thermal => e.sign,
            };
            let dv = coef * lt(&e.datum);
            t += dv * lt(&e.response);
            b += dv * e.response[last] * tail;
        }
        terms.push(t);
        tails.push(b);
    }
    Products {
        terms,
        bounds: tails.iter().map(|x| x.abs()).collect(),
    }
}

/// Defect of the transform-domain identity for each s.
pub fn transform_identity_defect(
    ha: &History,
    hb: &History,
    sa: &Scenario,
    sb: &Scenario,
    s_values: &[f64],
) -> Result<Vec<TransformRow>> {
    check_pair(ha, hb, sa, sb)?;
    s_values
        .iter()
        .map(|&s| {
            if !(s > 0.0) {
                return Err(Error::Validation {
                    path: "s".into(),
                    message: format!("must be positive (got {s})"),
                });
            }
            let ab = transform_products(hb, sa, s);
            let ba = transform_products(ha, sb, s);
            let p_12: f64 = ab.terms.iter().sum();
            let p_21: f64 = ba.terms.iter().sum();
            let scale = ab
                .terms
                .iter()
                .chain(&ba.terms)
                .fold(0.0_f64, |m, x| m.max(x.abs()))
                .max(EPS);
            let bound = ab.bounds.iter().chain(&ba.bounds).sum::<f64>() / scale;
            Ok(TransformRow {
                s,
                p_12,
                p_21,
                defect: (p_12 - p_21).abs() / scale,
                bound,
            })
        })
        .collect()
}
