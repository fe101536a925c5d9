//! Uniform 1-D grid along x₁, nodal field storage and finite differences.
//!
//! Fields depend on x₁ only but keep all three vector components, so every
//! component of the anisotropic constitutive tensors can participate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loads::{BoundarySpec, Condition, End, Group, Jet};
use crate::tensor::{Vec3, ZERO3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub n_nodes: usize,
    pub length: f64,
}

impl Grid1D {
    pub const MIN_NODES: usize = 5;

    pub fn new(n_nodes: usize, length: f64) -> Result<Self> {
        let g = Self { n_nodes, length };
        g.check().map_err(|m| Error::Validation {
            path: "grid".into(),
            message: m,
        })?;
        Ok(g)
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        if self.n_nodes < Self::MIN_NODES {
            return Err(format!("n_nodes must be >= {}", Self::MIN_NODES));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err("length must be positive".into());
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n_nodes - 1) as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|k| self.x(k)).collect()
    }

    pub fn node(&self, e: End) -> usize {
        match e {
            End::Left => 0,
            End::Right => self.n_nodes - 1,
        }
    }

    /// Grid with the spacing halved `level − 1` times.
    pub fn refined(&self, level: u32) -> Self {
        let f = 1usize << level.saturating_sub(1);
        Self {
            n_nodes: (self.n_nodes - 1) * f + 1,
            length: self.length,
        }
    }

    /// Trapezoidal quadrature weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n_nodes];
        w[0] = 0.5 * h;
        w[self.n_nodes - 1] = 0.5 * h;
        w
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        let h = self.spacing();
        let n = f.len();
        h * (f[1..n - 1].iter().sum::<f64>() + 0.5 * (f[0] + f[n - 1]))
    }
}

/// Nodal fields at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<Vec3>,
    /// u̇.
    pub v: Vec<Vec3>,
    /// Micro-rotation φ_i.
    pub phi: Vec<Vec3>,
    /// φ̇_i.
    pub omega: Vec<Vec3>,
    /// Change in volume fraction.
    pub varphi: Vec<f64>,
    pub varphidot: Vec<f64>,
    /// Temperature measured from θ0.
    pub theta: Vec<f64>,
    pub q: Vec<Vec3>,
}

/// Time derivative of every evolving slot of a [`FieldState`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRate {
    pub u: Vec<Vec3>,
    pub v: Vec<Vec3>,
    pub phi: Vec<Vec3>,
    pub omega: Vec<Vec3>,
    pub varphi: Vec<f64>,
    pub varphidot: Vec<f64>,
    pub theta: Vec<f64>,
    pub q: Vec<Vec3>,
}

fn axpy3(x: &[Vec3], a: f64, y: &[Vec3]) -> Vec<Vec3> {
    x.iter()
        .zip(y)
        .map(|(p, d)| [p[0] + a * d[0], p[1] + a * d[1], p[2] + a * d[2]])
        .collect()
}

fn axpy1(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(p, d)| p + a * d).collect()
}

fn acc3(x: &mut [Vec3], a: f64, y: &[Vec3]) {
    for (p, d) in x.iter_mut().zip(y) {
        for c in 0..3 {
            p[c] += a * d[c];
        }
    }
}

fn acc1(x: &mut [f64], a: f64, y: &[f64]) {
    for (p, d) in x.iter_mut().zip(y) {
        *p += a * d;
    }
}

impl FieldState {
    pub fn zeros(n: usize) -> Self {
        Self {
            t: 0.0,
            u: vec![ZERO3; n],
            v: vec![ZERO3; n],
            phi: vec![ZERO3; n],
            omega: vec![ZERO3; n],
            varphi: vec![0.0; n],
            varphidot: vec![0.0; n],
            theta: vec![0.0; n],
            q: vec![ZERO3; n],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    fn vectors(&self) -> [&Vec<Vec3>; 5] {
        [&self.u, &self.v, &self.phi, &self.omega, &self.q]
    }

    fn scalars(&self) -> [&Vec<f64>; 3] {
        [&self.varphi, &self.varphidot, &self.theta]
    }

    pub fn check_sizes(&self, n: usize) -> Result<()> {
        for len in self
            .vectors()
            .iter()
            .map(|v| v.len())
            .chain(self.scalars().iter().map(|v| v.len()))
        {
            if len != n {
                return Err(Error::SizeMismatch { expected: n, got: len });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.vectors()
            .iter()
            .all(|v| v.iter().flatten().all(|x| x.is_finite()))
            && self.scalars().iter().all(|v| v.iter().all(|x| x.is_finite()))
    }

    pub fn max_norm(&self) -> f64 {
        let a = self
            .vectors()
            .iter()
            .flat_map(|v| v.iter().flatten())
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        self.scalars()
            .iter()
            .flat_map(|v| v.iter())
            .fold(a, |m, x| m.max(x.abs()))
    }

    /// self + a·rate, with time advanced by a.
    pub fn axpy(&self, a: f64, r: &FieldRate) -> FieldState {
        FieldState {
            t: self.t + a,
            u: axpy3(&self.u, a, &r.u),
            v: axpy3(&self.v, a, &r.v),
            phi: axpy3(&self.phi, a, &r.phi),
            omega: axpy3(&self.omega, a, &r.omega),
            varphi: axpy1(&self.varphi, a, &r.varphi),
            varphidot: axpy1(&self.varphidot, a, &r.varphidot),
            theta: axpy1(&self.theta, a, &r.theta),
            q: axpy3(&self.q, a, &r.q),
        }
    }

    /// Linear combination a·self + b·other (time taken from self).
    pub fn combine(&self, a: f64, other: &FieldState, b: f64) -> FieldState {
        let c3 = |x: &[Vec3], y: &[Vec3]| -> Vec<Vec3> {
            x.iter()
                .zip(y)
                .map(|(p, q)| [a * p[0] + b * q[0], a * p[1] + b * q[1], a * p[2] + b * q[2]])
                .collect()
        };
        let c1 = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| a * p + b * q).collect() };
        FieldState {
            t: self.t,
            u: c3(&self.u, &other.u),
            v: c3(&self.v, &other.v),
            phi: c3(&self.phi, &other.phi),
            omega: c3(&self.omega, &other.omega),
            varphi: c1(&self.varphi, &other.varphi),
            varphidot: c1(&self.varphidot, &other.varphidot),
            theta: c1(&self.theta, &other.theta),
            q: c3(&self.q, &other.q),
        }
    }
}

impl FieldRate {
    pub fn zeros(n: usize) -> Self {
        Self {
            u: vec![ZERO3; n],
            v: vec![ZERO3; n],
            phi: vec![ZERO3; n],
            omega: vec![ZERO3; n],
            varphi: vec![0.0; n],
            varphidot: vec![0.0; n],
            theta: vec![0.0; n],
            q: vec![ZERO3; n],
        }
    }

    /// self += a·other.
    pub fn accumulate(&mut self, a: f64, o: &FieldRate) {
        acc3(&mut self.u, a, &o.u);
        acc3(&mut self.v, a, &o.v);
        acc3(&mut self.phi, a, &o.phi);
        acc3(&mut self.omega, a, &o.omega);
        acc1(&mut self.varphi, a, &o.varphi);
        acc1(&mut self.varphidot, a, &o.varphidot);
        acc1(&mut self.theta, a, &o.theta);
        acc3(&mut self.q, a, &o.q);
    }

    pub fn is_finite(&self) -> bool {
        [&self.u, &self.v, &self.phi, &self.omega, &self.q]
            .iter()
            .all(|v| v.iter().flatten().all(|x| x.is_finite()))
            && [&self.varphi, &self.varphidot, &self.theta]
                .iter()
                .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// ∂/∂x₁ with second-order stencils: central inside, one-sided at both ends.
pub fn ddx(series: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    if series.len() != grid.n_nodes {
        return Err(Error::SizeMismatch {
            expected: grid.n_nodes,
            got: series.len(),
        });
    }
    if grid.n_nodes < Grid1D::MIN_NODES {
        return Err(Error::SizeMismatch {
            expected: Grid1D::MIN_NODES,
            got: grid.n_nodes,
        });
    }
    let mut out = vec![0.0; series.len()];
    ddx_into(series, grid.spacing(), &mut out);
    Ok(out)
}

/// Unchecked [`ddx`] into a caller buffer.
pub(crate) fn ddx_into(s: &[f64], h: f64, out: &mut [f64]) {
    let n = s.len();
    let inv = 0.5 / h;
    out[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) * inv;
    for k in 1..n - 1 {
        out[k] = (s[k + 1] - s[k - 1]) * inv;
    }
    out[n - 1] = (3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) * inv;
}

/// Componentwise [`ddx`] of a nodal vector field.
pub(crate) fn ddx3_into(s: &[Vec3], h: f64, out: &mut [Vec3]) {
    let n = s.len();
    let inv = 0.5 / h;
    for c in 0..3 {
        out[0][c] = (-3.0 * s[0][c] + 4.0 * s[1][c] - s[2][c]) * inv;
        for k in 1..n - 1 {
            out[k][c] = (s[k + 1][c] - s[k - 1][c]) * inv;
        }
        out[n - 1][c] = (3.0 * s[n - 1][c] - 4.0 * s[n - 2][c] + s[n - 3][c]) * inv;
    }
}

pub fn ddx3(s: &[Vec3], grid: &Grid1D) -> Result<Vec<Vec3>> {
    if s.len() != grid.n_nodes {
        return Err(Error::SizeMismatch {
            expected: grid.n_nodes,
            got: s.len(),
        });
    }
    let mut out = vec![ZERO3; s.len()];
    ddx3_into(s, grid.spacing(), &mut out);
    Ok(out)
}

fn values(j: &[Jet; 3]) -> (Vec3, Vec3) {
    ([j[0].value, j[1].value, j[2].value], [j[0].rate, j[1].rate, j[2].rate])
}

/// Overwrites prescribed fields (Σ1, Σ3, Σ5, Σ7) and their rate slots at the endpoints.
pub fn apply_dirichlet(state: &FieldState, bspec: &BoundarySpec, t: f64) -> FieldState {
    let mut s = state.clone();
    apply_dirichlet_in_place(&mut s, bspec, t);
    s
}

pub(crate) fn apply_dirichlet_in_place(s: &mut FieldState, bspec: &BoundarySpec, t: f64) {
    let n = s.len();
    for (end, k) in [(End::Left, 0), (End::Right, n - 1)] {
        let spec = bspec.end(end);
        if spec.displacement == Condition::Essential {
            let (x, r) = values(&spec.datum(Group::Displacement, t));
            s.u[k] = x;
            s.v[k] = r;
        }
        if spec.rotation == Condition::Essential {
            let (x, r) = values(&spec.datum(Group::Rotation, t));
            s.phi[k] = x;
            s.omega[k] = r;
        }
        if spec.porosity == Condition::Essential {
            let d = spec.datum(Group::Porosity, t)[0];
            s.varphi[k] = d.value;
            s.varphidot[k] = d.rate;
        }
        if spec.thermal == Condition::Essential {
            s.theta[k] = spec.datum(Group::Thermal, t)[0].value;
        }
    }
}
