//! Balance laws, boundary treatment and explicit RK4 time stepping.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constitutive::{slot, ReducedLaw, REDUCED_INPUTS};
use crate::error::{Error, Result};
use crate::field::{apply_dirichlet_in_place, ddx3_into, ddx_into, FieldRate, FieldState, Grid1D};
use crate::loads::{BoundarySpec, Condition, End, Group, Loads};
use crate::material::{invert3, MaterialConstants};
use crate::tensor::*;

/// A complete initial-boundary value problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub grid: Grid1D,
    pub material: MaterialConstants,
    pub loads: Loads,
    pub boundary: BoundarySpec,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    /// Nonzero starting state. Internal convergence tests only; every
    /// theorem check starts from rest.
    #[serde(skip)]
    pub initial: Option<FieldState>,
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        path: path.into(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Spacing of the recorded samples.
    pub fn sample_dt(&self) -> f64 {
        self.dt * self.record_every as f64
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.check().map_err(|m| invalid("grid", m))?;
        self.material.validate()?;
        let null_start = self.initial.is_none();
        self.loads
            .check(self.grid.length, null_start)
            .map_err(|m| invalid("sources", m))?;
        for e in End::BOTH {
            self.boundary
                .end(e)
                .check(e.name(), null_start)
                .map_err(|m| invalid(&format!("boundary.{}", e.name()), m))?;
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("run.dt", format!("must be positive (got {})", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(invalid("run.t_end", format!("must be at least dt (got {})", self.t_end)));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(invalid("run.t_end", "must be an integer multiple of run.dt"));
        }
        if self.record_every == 0 {
            return Err(invalid("run.record_every", "must be at least 1"));
        }
        if self.n_steps() % self.record_every != 0 {
            return Err(invalid("run.record_every", "must divide the number of steps"));
        }
        if let Some(s) = &self.initial {
            s.check_sizes(self.grid.n_nodes)?;
        }
        Ok(())
    }

    /// Same problem with h and dt halved `level − 1` times; the number of
    /// steps between samples is kept, so the sample spacing shrinks too.
    pub fn refined(&self, level: u32) -> Scenario {
        let f = (1usize << level.saturating_sub(1)) as f64;
        Scenario {
            grid: self.grid.refined(level),
            dt: self.dt / f,
            initial: None,
            ..self.clone()
        }
    }
}

/// Endpoint values of the normal tractions and fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryTrace {
    /// T_1i n₁.
    pub t_n: Vec3,
    /// M_1i n₁.
    pub m_n: Vec3,
    pub h_n: f64,
    pub q_n: f64,
    /// s_1 n₁.
    pub s_n: f64,
}

/// Recorded solution.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub grid: Grid1D,
    pub theta0: f64,
    pub sample_dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<FieldState>,
    /// Left and right traces per sample.
    pub traces: Vec<[BoundaryTrace; 2]>,
    /// Entropy flow s_i per sample and node.
    pub s: Vec<Vec<Vec3>>,
}

impl History {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Sample index of time t, if t lies on the sample lattice.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let m = (t / self.sample_dt).round();
        if m < 0.0 || (m * self.sample_dt - t).abs() > 1e-9 * self.sample_dt.max(t) {
            return None;
        }
        let m = m as usize;
        (m < self.len()).then_some(m)
    }

    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(FieldState::max_norm).fold(0.0, f64::max)
    }
}

/// Gradient slots solved at an endpoint carrying traction-type data.
#[derive(Debug, Clone)]
struct GradientSolve {
    rows: Vec<usize>,
    cols: Vec<usize>,
    inv: DMatrix<f64>,
}

fn natural_slots(g: Group) -> Option<(usize, usize, usize)> {
    // (output row, input column, width)
    match g {
        Group::Displacement => Some((slot::T1, slot::DU, 3)),
        Group::Rotation => Some((slot::M1, slot::DPHI, 3)),
        Group::Porosity => Some((slot::H1, slot::DVARPHI, 1)),
        Group::Thermal => None,
    }
}

impl GradientSolve {
    fn new(law: &ReducedLaw, bspec: &BoundarySpec, end: End) -> Result<Option<Self>> {
        let spec = bspec.end(end);
        let (mut rows, mut cols) = (Vec::new(), Vec::new());
        for g in [Group::Displacement, Group::Rotation, Group::Porosity] {
            if spec.condition(g) == Condition::Natural {
                let (r, c, w) = natural_slots(g).unwrap();
                rows.extend(r..r + w);
                cols.extend(c..c + w);
            }
        }
        if rows.is_empty() {
            return Ok(None);
        }
        let m = DMatrix::from_fn(rows.len(), cols.len(), |i, j| law.matrix[rows[i]][cols[j]]);
        let sv = m.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        if !(hi > 0.0) || lo < 1e-12 * hi {
            return Err(Error::GhostSolveSingular { end: end.name() });
        }
        let inv = m.try_inverse().ok_or(Error::GhostSolveSingular { end: end.name() })?;
        Ok(Some(Self { rows, cols, inv }))
    }

    /// Overwrites the solved slots of z so the constrained outputs equal `target`.
    fn solve(&self, law: &ReducedLaw, z: &mut [f64; REDUCED_INPUTS], target: &[f64]) {
        for &c in &self.cols {
            z[c] = 0.0;
        }
        let rhs: Vec<f64> = self
            .rows
            .iter()
            .zip(target)
            .map(|(&r, t)| t - law.row_dot(r, z))
            .collect();
        for (i, &c) in self.cols.iter().enumerate() {
            z[c] = (0..rhs.len()).map(|j| self.inv[(i, j)] * rhs[j]).sum();
        }
    }
}

/// Constitutive outputs needed by the balance laws at every node.
struct Fluxes {
    t1: Vec<Vec3>,
    m1: Vec<Vec3>,
    h1: Vec<f64>,
    g: Vec<f64>,
    eps_t: Vec<Vec3>,
    dtheta: Vec<f64>,
    q1: Vec<f64>,
}

/// Right-hand side evaluator with the material-dependent pieces precomputed.
pub struct Stepper<'a> {
    sc: &'a Scenario,
    law: ReducedLaw,
    j_inv: Mat3,
    solves: [Option<GradientSolve>; 2],
    xs: Vec<f64>,
    h: f64,
}

fn node_of(n: usize, e: End) -> usize {
    match e {
        End::Left => 0,
        End::Right => n - 1,
    }
}

fn end_index(e: End) -> usize {
    match e {
        End::Left => 0,
        End::Right => 1,
    }
}

impl<'a> Stepper<'a> {
    pub fn new(sc: &'a Scenario) -> Result<Self> {
        let law = ReducedLaw::new(&sc.material);
        let solves = [
            GradientSolve::new(&law, &sc.boundary, End::Left)?,
            GradientSolve::new(&law, &sc.boundary, End::Right)?,
        ];
        Ok(Self {
            sc,
            j_inv: invert3(&sc.material.micro_inertia)?,
            law,
            solves,
            xs: sc.grid.coords(),
            h: sc.grid.spacing(),
        })
    }

    fn mc(&self) -> &MaterialConstants {
        &self.sc.material
    }

    /// θ_,1 at an endpoint carrying heat-flux data.
    fn flux_gradient(&self, e: End, t: f64) -> f64 {
        let d = self.sc.boundary.end(e).datum(Group::Thermal, t)[0];
        let mc = self.mc();
        e.normal() * (d.value + mc.relaxation_time * d.rate) / mc.conductivity[0][0]
    }

    fn fluxes(&self, s: &FieldState, t: f64) -> Fluxes {
        let n = s.len();
        let h = self.h;
        let mut du = vec![ZERO3; n];
        let mut dphi = vec![ZERO3; n];
        let mut dvp = vec![0.0; n];
        let mut dth = vec![0.0; n];
        ddx3_into(&s.u, h, &mut du);
        ddx3_into(&s.phi, h, &mut dphi);
        ddx_into(&s.varphi, h, &mut dvp);
        ddx_into(&s.theta, h, &mut dth);
        for e in End::BOTH {
            if self.sc.boundary.end(e).thermal == Condition::Natural {
                dth[node_of(n, e)] = self.flux_gradient(e, t);
            }
        }

        let mut f = Fluxes {
            t1: vec![ZERO3; n],
            m1: vec![ZERO3; n],
            h1: vec![0.0; n],
            g: vec![0.0; n],
            eps_t: vec![ZERO3; n],
            dtheta: dth,
            q1: vec![0.0; n],
        };
        let mc = self.mc();
        for k in 0..n {
            let z = [
                du[k][0], du[k][1], du[k][2],
                s.phi[k][0], s.phi[k][1], s.phi[k][2],
                dphi[k][0], dphi[k][1], dphi[k][2],
                s.varphi[k], dvp[k], s.theta[k],
            ];
            self.store(&mut f, k, &z);
            f.q1[k] = if mc.relaxation_time > 0.0 {
                s.q[k][0]
            } else {
                mc.conductivity[0][0] * f.dtheta[k]
            };
        }

        for e in End::BOTH {
            let Some(solve) = &self.solves[end_index(e)] else {
                continue;
            };
            let k = node_of(n, e);
            let spec = self.sc.boundary.end(e);
            let mut z = [
                du[k][0], du[k][1], du[k][2],
                s.phi[k][0], s.phi[k][1], s.phi[k][2],
                dphi[k][0], dphi[k][1], dphi[k][2],
                s.varphi[k], dvp[k], s.theta[k],
            ];
            let mut target = Vec::with_capacity(7);
            for g in [Group::Displacement, Group::Rotation, Group::Porosity] {
                if spec.condition(g) == Condition::Natural {
                    let d = spec.datum(g, t);
                    target.extend(d.iter().take(g.components()).map(|j| e.normal() * j.value));
                }
            }
            solve.solve(&self.law, &mut z, &target);
            self.store(&mut f, k, &z);
            // pin the constrained outputs to the data exactly
            let mut it = target.iter();
            for &r in &solve.rows {
                let v = *it.next().unwrap();
                match r {
                    0..=2 => f.t1[k][r] = v,
                    3..=5 => f.m1[k][r - 3] = v,
                    _ => f.h1[k] = v,
                }
            }
        }
        f
    }

    fn store(&self, f: &mut Fluxes, k: usize, z: &[f64; REDUCED_INPUTS]) {
        let o = self.law.apply(z);
        f.t1[k] = [o[slot::T1], o[slot::T1 + 1], o[slot::T1 + 2]];
        f.m1[k] = [o[slot::M1], o[slot::M1 + 1], o[slot::M1 + 2]];
        f.h1[k] = o[slot::H1];
        f.g[k] = o[slot::G];
        f.eps_t[k] = [o[slot::EPS_T], o[slot::EPS_T + 1], o[slot::EPS_T + 2]];
    }

    /// Enforces prescribed fields, prescribed normal flux and, for τ = 0,
    /// the algebraic flux.
    pub fn impose(&self, s: &mut FieldState, t: f64) {
        apply_dirichlet_in_place(s, &self.sc.boundary, t);
        let n = s.len();
        let mc = self.mc();
        if mc.relaxation_time > 0.0 {
            for e in End::BOTH {
                let spec = self.sc.boundary.end(e);
                if spec.thermal == Condition::Natural {
                    s.q[node_of(n, e)][0] = e.normal() * spec.datum(Group::Thermal, t)[0].value;
                }
            }
        } else {
            let f = self.fluxes(s, t);
            for (q, g) in s.q.iter_mut().zip(&f.dtheta) {
                *q = mat_vec(&mc.conductivity, &[*g, 0.0, 0.0]);
            }
        }
        s.t = t;
    }

    pub fn rhs(&self, s: &FieldState, t: f64) -> Result<FieldRate> {
        if !s.is_finite() {
            return Err(Error::NonfiniteField { t });
        }
        let n = s.len();
        let h = self.h;
        let mc = self.mc();
        let rho = mc.density;
        let f = self.fluxes(s, t);
        let loads = &self.sc.loads;

        let mut div_t = vec![ZERO3; n];
        let mut div_m = vec![ZERO3; n];
        let mut div_h = vec![0.0; n];
        let mut div_q = vec![0.0; n];
        ddx3_into(&f.t1, h, &mut div_t);
        ddx3_into(&f.m1, h, &mut div_m);
        ddx_into(&f.h1, h, &mut div_h);
        ddx_into(&f.q1, h, &mut div_q);

        let mut dv = vec![ZERO3; n];
        let mut dom = vec![ZERO3; n];
        let mut dvpd = vec![0.0; n];
        ddx3_into(&s.v, h, &mut dv);
        ddx3_into(&s.omega, h, &mut dom);
        ddx_into(&s.varphidot, h, &mut dvpd);

        let mut r = FieldRate::zeros(n);
        r.u.clone_from(&s.v);
        r.phi.clone_from(&s.omega);
        r.varphi.clone_from(&s.varphidot);
        let tau = mc.relaxation_time;
        for k in 0..n {
            let x = self.xs[k];
            let body = loads.force(x, t);
            let couple = loads.couple(x, t);
            r.v[k] = [
                div_t[k][0] / rho + body[0],
                div_t[k][1] / rho + body[1],
                div_t[k][2] / rho + body[2],
            ];
            let torque = [
                (div_m[k][0] + f.eps_t[k][0]) / rho + couple[0],
                (div_m[k][1] + f.eps_t[k][1]) / rho + couple[1],
                (div_m[k][2] + f.eps_t[k][2]) / rho + couple[2],
            ];
            r.omega[k] = mat_vec(&self.j_inv, &torque);
            r.varphidot[k] = (div_h[k] + f.g[k]) / (rho * mc.equilibrated_inertia)
                + loads.equilibrated(x, t) / mc.equilibrated_inertia;

            let zr = [
                dv[k][0], dv[k][1], dv[k][2],
                s.omega[k][0], s.omega[k][1], s.omega[k][2],
                dom[k][0], dom[k][1], dom[k][2],
                s.varphidot[k], dvpd[k], 0.0,
            ];
            let coupling = self.law.row_dot(slot::RHO_ETA, &zr);
            r.theta[k] = ((div_q[k] + rho * loads.heat(x, t)) / mc.reference_temperature - coupling)
                / mc.heat_capacity;
            if tau > 0.0 {
                let kg = mat_vec(&mc.conductivity, &[f.dtheta[k], 0.0, 0.0]);
                for i in 0..3 {
                    r.q[k][i] = (kg[i] - s.q[k][i]) / tau;
                }
            }
        }

        for e in End::BOTH {
            let k = node_of(n, e);
            let spec = self.sc.boundary.end(e);
            if spec.displacement == Condition::Essential {
                let d = spec.datum(Group::Displacement, t);
                r.u[k] = [d[0].rate, d[1].rate, d[2].rate];
                r.v[k] = [d[0].accel, d[1].accel, d[2].accel];
            }
            if spec.rotation == Condition::Essential {
                let d = spec.datum(Group::Rotation, t);
                r.phi[k] = [d[0].rate, d[1].rate, d[2].rate];
                r.omega[k] = [d[0].accel, d[1].accel, d[2].accel];
            }
            if spec.porosity == Condition::Essential {
                let d = spec.datum(Group::Porosity, t)[0];
                r.varphi[k] = d.rate;
                r.varphidot[k] = d.accel;
            }
            match spec.thermal {
                Condition::Essential => r.theta[k] = spec.datum(Group::Thermal, t)[0].rate,
                Condition::Natural if tau > 0.0 => {
                    r.q[k][0] = e.normal() * spec.datum(Group::Thermal, t)[0].rate;
                }
                Condition::Natural => {}
            }
        }
        if !r.is_finite() {
            return Err(Error::NonfiniteField { t });
        }
        Ok(r)
    }

    pub fn step(&self, s: &FieldState, t: f64, dt: f64) -> Result<FieldState> {
        let k1 = self.rhs(s, t)?;
        let mut s2 = s.axpy(0.5 * dt, &k1);
        self.impose(&mut s2, t + 0.5 * dt);
        let k2 = self.rhs(&s2, t + 0.5 * dt)?;
        let mut s3 = s.axpy(0.5 * dt, &k2);
        self.impose(&mut s3, t + 0.5 * dt);
        let k3 = self.rhs(&s3, t + 0.5 * dt)?;
        let mut s4 = s.axpy(dt, &k3);
        self.impose(&mut s4, t + dt);
        let k4 = self.rhs(&s4, t + dt)?;

        let mut acc = k1;
        acc.accumulate(2.0, &k2);
        acc.accumulate(2.0, &k3);
        acc.accumulate(1.0, &k4);
        let mut out = s.axpy(dt / 6.0, &acc);
        self.impose(&mut out, t + dt);
        if !out.is_finite() {
            return Err(Error::NonfiniteField { t: t + dt });
        }
        Ok(out)
    }

    /// Normal tractions and fluxes at both endpoints; s_n is filled later.
    pub fn traces(&self, s: &FieldState, t: f64) -> [BoundaryTrace; 2] {
        let f = self.fluxes(s, t);
        let n = s.len();
        End::BOTH.map(|e| {
            let k = node_of(n, e);
            let sg = e.normal();
            BoundaryTrace {
                t_n: f.t1[k].map(|x| sg * x),
                m_n: f.m1[k].map(|x| sg * x),
                h_n: sg * f.h1[k],
                q_n: sg * f.q1[k],
                s_n: 0.0,
            }
        })
    }
}

/// Time derivative of every state slot at time t.
pub fn compute_rhs(state: &FieldState, scenario: &Scenario, t: f64) -> Result<FieldRate> {
    state.check_sizes(scenario.grid.n_nodes)?;
    Stepper::new(scenario)?.rhs(state, t)
}

/// One classical RK4 step from t to t + dt.
pub fn rk4_step(state: &FieldState, scenario: &Scenario, t: f64, dt: f64) -> Result<FieldState> {
    state.check_sizes(scenario.grid.n_nodes)?;
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    Stepper::new(scenario)?.step(state, t, dt)
}

/// Integrates from rest (or from `scenario.initial`) to t_end.
pub fn run_simulation(scenario: &Scenario) -> Result<History> {
    scenario.validate()?;
    let stepper = Stepper::new(scenario)?;
    let n = scenario.grid.n_nodes;
    let mut state = scenario.initial.clone().unwrap_or_else(|| FieldState::zeros(n));
    stepper.impose(&mut state, 0.0);

    let limit = 1e6 * (1.0 + scenario.loads.peak() + scenario.boundary.peak() + state.max_norm());
    let steps = scenario.n_steps();
    let every = scenario.record_every;
    let mut hist = History {
        grid: scenario.grid,
        theta0: scenario.material.reference_temperature,
        sample_dt: scenario.sample_dt(),
        times: Vec::with_capacity(steps / every + 1),
        states: Vec::with_capacity(steps / every + 1),
        traces: Vec::with_capacity(steps / every + 1),
        s: Vec::new(),
    };
    hist.times.push(0.0);
    hist.traces.push(stepper.traces(&state, 0.0));
    hist.states.push(state.clone());

    for step in 0..steps {
        let t = step as f64 * scenario.dt;
        let t_next = (step + 1) as f64 * scenario.dt;
        state = stepper.step(&state, t, scenario.dt)?;
        state.t = t_next;
        if state.max_norm() > limit {
            return Err(Error::NonfiniteField { t: t_next });
        }
        if (step + 1) % every == 0 {
            hist.times.push(t_next);
            hist.traces.push(stepper.traces(&state, t_next));
            hist.states.push(state.clone());
        }
    }

    hist.s = crate::energetics::entropy_flow_accumulate(&hist);
    for (tr, s) in hist.traces.iter_mut().zip(&hist.s) {
        tr[0].s_n = -s[0][0];
        tr[1].s_n = s[n - 1][0];
    }
    Ok(hist)
}

/// Speed of the outermost point where |θ| exceeds `threshold · max|θ|`.
///
/// The front position is taken at the rightmost such node. Samples are used
/// once the front has left the region it occupied when θ first appeared and
/// until it comes within two cells of the far end.
pub fn detect_front(history: &History, threshold: f64) -> Result<f64> {
    let g = &history.grid;
    let h = g.spacing();
    let mut support: Option<f64> = None;
    let (mut ts, mut xs) = (Vec::new(), Vec::new());
    for (t, s) in history.times.iter().zip(&history.states) {
        let peak = s.theta.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if peak == 0.0 {
            continue;
        }
        let Some(k) = s.theta.iter().rposition(|x| x.abs() > threshold * peak) else {
            continue;
        };
        let x = g.x(k);
        let x_s = *support.get_or_insert(x);
        if x > x_s + 2.0 * h && x < g.length - 2.0 * h {
            ts.push(*t);
            xs.push(x);
        }
    }
    if ts.len() < 3 {
        return Err(Error::NoFront);
    }
    let m = ts.len() as f64;
    let tb = ts.iter().sum::<f64>() / m;
    let xb = xs.iter().sum::<f64>() / m;
    let num: f64 = ts.iter().zip(&xs).map(|(t, x)| (t - tb) * (x - xb)).sum();
    let den: f64 = ts.iter().map(|t| (t - tb) * (t - tb)).sum();
    if den == 0.0 {
        return Err(Error::NoFront);
    }
    Ok(num / den)
}

/// Thermal wave speed of a rigid conductor along x₁, sqrt(K₁₁/(θ0 c τ)).
/// None for Fourier conduction (τ = 0), where signals are not finite-speed.
pub fn second_sound_speed(mc: &MaterialConstants) -> Option<f64> {
    (mc.relaxation_time > 0.0)
        .then(|| (mc.conductivity[0][0] / (mc.reference_temperature * mc.heat_capacity * mc.relaxation_time)).sqrt())
}
