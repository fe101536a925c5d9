//! Kinematics and the linear constitutive law.
//!
//! The pointwise law maps (E_ij, Ψ_ij, φ, φ_,k, θ) to stress T_ij, couple
//! stress M_ij, intrinsic equilibrated force g, equilibrated stress h_i and
//! entropy density ρη. Index orders follow the constitutive equations
//! literally: T and M contract with Ψ_lk, g with Ψ_ji and h with Ψ_kj.

use crate::error::{Error, Result};
use crate::field::{ddx, ddx3, FieldState, Grid1D};
use crate::material::MaterialConstants;
use crate::tensor::*;

/// Pointwise kinematic state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Kinematics {
    pub e: Mat3,
    pub psi: Mat3,
    pub varphi: f64,
    pub grad_varphi: Vec3,
    pub theta: f64,
}

/// Pointwise constitutive response.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Response {
    pub stress: Mat3,
    pub couple: Mat3,
    pub g: f64,
    pub h: Vec3,
    pub rho_eta: f64,
}

/// Nodal kinematics and response over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StressState {
    pub e: Vec<Mat3>,
    pub psi: Vec<Mat3>,
    pub stress: Vec<Mat3>,
    pub couple: Vec<Mat3>,
    pub g: Vec<f64>,
    pub h: Vec<Vec3>,
    pub rho_eta: Vec<f64>,
    pub grad_varphi: Vec<Vec3>,
    pub grad_theta: Vec<Vec3>,
}

/// E_ij = u_j,i − ε_ijh φ_h where only ∂/∂x₁ survives.
pub fn strain_1d(du: &Vec3, phi: &Vec3) -> Mat3 {
    let mut e = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            let grad = if i == 0 { du[j] } else { 0.0 };
            e[i][j] = grad - (0..3).map(|h| levi_civita(i, j, h) * phi[h]).sum::<f64>();
        }
    }
    e
}

/// Ψ_ij = φ_i,j: only column j = 1 is populated.
pub fn wryness_1d(dphi: &Vec3) -> Mat3 {
    let mut psi = ZERO33;
    for i in 0..3 {
        psi[i][0] = dphi[i];
    }
    psi
}

pub fn compute_strain(u: &[Vec3], phi: &[Vec3], grid: &Grid1D) -> Result<Vec<Mat3>> {
    if phi.len() != u.len() {
        return Err(Error::SizeMismatch { expected: u.len(), got: phi.len() });
    }
    let du = ddx3(u, grid)?;
    Ok(du.iter().zip(phi).map(|(d, p)| strain_1d(d, p)).collect())
}

pub fn compute_wryness(phi: &[Vec3], grid: &Grid1D) -> Result<Vec<Mat3>> {
    Ok(ddx3(phi, grid)?.iter().map(wryness_1d).collect())
}

fn flat(m: &Mat3) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[i][j];
        }
    }
    out
}

fn transpose_flat(m: &Mat3) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[j][i];
        }
    }
    out
}

/// The constitutive law with its fourth-order tensors unfolded to 9×9 matrices.
#[derive(Debug, Clone)]
pub struct ConstitutiveLaw {
    c: [[f64; 9]; 9],
    gc: [[f64; 9]; 9],
    gam: [[f64; 9]; 9],
    mc: MaterialConstants,
}

impl ConstitutiveLaw {
    pub fn new(mc: &MaterialConstants) -> Self {
        Self {
            c: unfold4(&mc.elastic),
            gc: unfold4(&mc.strain_wryness),
            gam: unfold4(&mc.wryness),
            mc: mc.clone(),
        }
    }

    pub fn respond(&self, k: &Kinematics) -> Response {
        let m = &self.mc;
        let e = flat(&k.e);
        // slot (k,l) of psi_t holds Ψ_lk
        let psi_t = transpose_flat(&k.psi);
        let phi = k.varphi;
        let gp = &k.grad_varphi;
        let th = k.theta;

        let mut r = Response::default();
        for a in 0..9 {
            let (i, j) = (a / 3, a % 3);
            let mut t = 0.0;
            let mut mm = 0.0;
            for b in 0..9 {
                t += self.c[a][b] * e[b] + self.gc[a][b] * psi_t[b];
                // G_klij E_kl: transpose of the unfolded coupling
                mm += self.gc[b][a] * e[b] + self.gam[a][b] * psi_t[b];
            }
            t += m.strain_porosity[i][j] * phi + dot(&m.strain_porosity_grad[i][j], gp) + m.thermal_stress[i][j] * th;
            mm += m.wryness_porosity[i][j] * phi
                + dot(&m.wryness_porosity_grad[i][j], gp)
                + m.wryness_thermal[i][j] * th;
            r.stress[i][j] = t;
            r.couple[i][j] = mm;
        }

        let h2 = flat(&m.strain_porosity);
        let p2 = flat(&m.wryness_porosity);
        let a2 = flat(&m.thermal_stress);
        let g2 = flat(&m.wryness_thermal);
        // P_ij Ψ_ji and G_ij Ψ_ji pair slot (i,j) with Ψ_ji, i.e. psi_t
        let he: f64 = h2.iter().zip(&e).map(|(x, y)| x * y).sum();
        let pp: f64 = p2.iter().zip(&psi_t).map(|(x, y)| x * y).sum();
        let ae: f64 = a2.iter().zip(&e).map(|(x, y)| x * y).sum();
        let gpsi: f64 = g2.iter().zip(&psi_t).map(|(x, y)| x * y).sum();

        r.g = -he - pp - m.porosity_stiffness * phi - dot(&m.porosity_grad_coupling, gp) - m.porosity_thermal * th;
        for i in 0..3 {
            let mut hi = m.porosity_grad_coupling[i] * phi + m.porosity_grad_thermal[i] * th;
            hi += dot(&m.porosity_grad_stiffness[i], gp);
            for a in 0..9 {
                let (j, kk) = (a / 3, a % 3);
                // H_jki E_jk and P_jki Ψ_kj
                hi += m.strain_porosity_grad[j][kk][i] * e[a] + m.wryness_porosity_grad[j][kk][i] * psi_t[a];
            }
            r.h[i] = hi;
        }
        r.rho_eta = -ae - gpsi - m.porosity_thermal * phi - dot(&m.porosity_grad_thermal, gp)
            + m.heat_capacity * th;
        r
    }

    pub fn material(&self) -> &MaterialConstants {
        &self.mc
    }
}

/// Evaluates kinematics and the constitutive response at every node.
pub fn evaluate_constitutive(state: &FieldState, mc: &MaterialConstants, grid: &Grid1D) -> Result<StressState> {
    state.check_sizes(grid.n_nodes)?;
    if !state.is_finite() {
        return Err(Error::NonfiniteField { t: state.t });
    }
    let du = ddx3(&state.u, grid)?;
    let dphi = ddx3(&state.phi, grid)?;
    let dvarphi = ddx(&state.varphi, grid)?;
    let dtheta = ddx(&state.theta, grid)?;
    let law = ConstitutiveLaw::new(mc);
    let n = grid.n_nodes;
    let mut out = StressState {
        e: Vec::with_capacity(n),
        psi: Vec::with_capacity(n),
        stress: Vec::with_capacity(n),
        couple: Vec::with_capacity(n),
        g: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        rho_eta: Vec::with_capacity(n),
        grad_varphi: Vec::with_capacity(n),
        grad_theta: Vec::with_capacity(n),
    };
    for k in 0..n {
        let kin = Kinematics {
            e: strain_1d(&du[k], &state.phi[k]),
            psi: wryness_1d(&dphi[k]),
            varphi: state.varphi[k],
            grad_varphi: [dvarphi[k], 0.0, 0.0],
            theta: state.theta[k],
        };
        let r = law.respond(&kin);
        out.e.push(kin.e);
        out.psi.push(kin.psi);
        out.stress.push(r.stress);
        out.couple.push(r.couple);
        out.g.push(r.g);
        out.h.push(r.h);
        out.rho_eta.push(r.rho_eta);
        out.grad_varphi.push(kin.grad_varphi);
        out.grad_theta.push([dtheta[k], 0.0, 0.0]);
    }
    Ok(out)
}

/// Result of the relaxation law (1 + τ∂t) q_i = K_ij θ_,j.
#[derive(Debug, Clone, PartialEq)]
pub enum FluxUpdate {
    /// q̇ for τ > 0.
    Rate(Vec<Vec3>),
    /// q itself when τ = 0 (Fourier limit); substituted, not integrated.
    Algebraic(Vec<Vec3>),
}

pub fn flux_rate(q: &[Vec3], grad_theta: &[Vec3], mc: &MaterialConstants) -> FluxUpdate {
    let tau = mc.relaxation_time;
    let target = grad_theta.iter().map(|g| mat_vec(&mc.conductivity, g));
    if tau > 0.0 {
        FluxUpdate::Rate(
            target
                .zip(q)
                .map(|(kg, q)| [(kg[0] - q[0]) / tau, (kg[1] - q[1]) / tau, (kg[2] - q[2]) / tau])
                .collect(),
        )
    } else {
        FluxUpdate::Algebraic(target.collect())
    }
}

/// Number of inputs of the reduced 1-D law:
/// [u_,1 (3), φ (3), φ_,1 (3), volume fraction, its x-derivative, θ].
pub const REDUCED_INPUTS: usize = 12;
/// Outputs: [T_1i (3), M_1i (3), h_1, g, ε_irs T_rs (3), ρη].
pub const REDUCED_OUTPUTS: usize = 12;

pub mod slot {
    pub const DU: usize = 0;
    pub const PHI: usize = 3;
    pub const DPHI: usize = 6;
    pub const VARPHI: usize = 9;
    pub const DVARPHI: usize = 10;
    pub const THETA: usize = 11;

    pub const T1: usize = 0;
    pub const M1: usize = 3;
    pub const H1: usize = 6;
    pub const G: usize = 7;
    pub const EPS_T: usize = 8;
    pub const RHO_ETA: usize = 11;
}

/// The constitutive law restricted to the quantities the 1-D balance laws
/// need, as a dense matrix obtained by probing [`ConstitutiveLaw::respond`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLaw {
    pub matrix: [[f64; REDUCED_INPUTS]; REDUCED_OUTPUTS],
}

impl ReducedLaw {
    pub fn new(mc: &MaterialConstants) -> Self {
        let law = ConstitutiveLaw::new(mc);
        let mut matrix = [[0.0; REDUCED_INPUTS]; REDUCED_OUTPUTS];
        for col in 0..REDUCED_INPUTS {
            let mut z = [0.0; REDUCED_INPUTS];
            z[col] = 1.0;
            let out = Self::outputs(&law, &z);
            for (row, v) in out.iter().enumerate() {
                matrix[row][col] = *v;
            }
        }
        Self { matrix }
    }

    pub fn kinematics(z: &[f64; REDUCED_INPUTS]) -> Kinematics {
        let du = [z[0], z[1], z[2]];
        let phi = [z[3], z[4], z[5]];
        let dphi = [z[6], z[7], z[8]];
        Kinematics {
            e: strain_1d(&du, &phi),
            psi: wryness_1d(&dphi),
            varphi: z[slot::VARPHI],
            grad_varphi: [z[slot::DVARPHI], 0.0, 0.0],
            theta: z[slot::THETA],
        }
    }

    fn outputs(law: &ConstitutiveLaw, z: &[f64; REDUCED_INPUTS]) -> [f64; REDUCED_OUTPUTS] {
        let r = law.respond(&Self::kinematics(z));
        let mut out = [0.0; REDUCED_OUTPUTS];
        for i in 0..3 {
            out[slot::T1 + i] = r.stress[0][i];
            out[slot::M1 + i] = r.couple[0][i];
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += levi_civita(i, a, b) * r.stress[a][b];
                }
            }
            out[slot::EPS_T + i] = s;
        }
        out[slot::H1] = r.h[0];
        out[slot::G] = r.g;
        out[slot::RHO_ETA] = r.rho_eta;
        out
    }

    #[inline]
    pub fn apply(&self, z: &[f64; REDUCED_INPUTS]) -> [f64; REDUCED_OUTPUTS] {
        let mut out = [0.0; REDUCED_OUTPUTS];
        for (o, row) in out.iter_mut().zip(&self.matrix) {
            *o = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
        out
    }

    #[inline]
    pub fn row_dot(&self, row: usize, z: &[f64; REDUCED_INPUTS]) -> f64 {
        self.matrix[row].iter().zip(z).map(|(a, b)| a * b).sum()
    }
}
