//! Kinetic and free energy, entropy flow and the conservation diagnostic.

use crate::constitutive::{strain_1d, wryness_1d, Kinematics};
use crate::dynamics::{History, Scenario};
use crate::error::{Error, Result};
use crate::field::{ddx, ddx3, FieldState, Grid1D};
use crate::material::MaterialConstants;
use crate::tensor::*;

/// ∫ ½ρ(u̇·u̇ + J_ij φ̇_i φ̇_j + χ φ̇²) dx.
pub fn kinetic_energy(state: &FieldState, mc: &MaterialConstants, grid: &Grid1D) -> f64 {
    let density: Vec<f64> = (0..state.len())
        .map(|k| {
            let w = &state.omega[k];
            0.5 * mc.density
                * (norm_sq(&state.v[k])
                    + bilinear(&mc.micro_inertia, w, w)
                    + mc.equilibrated_inertia * state.varphidot[k] * state.varphidot[k])
        })
        .collect();
    grid.integrate(&density)
}

/// Pointwise free energy split into the part entering the mechanical
/// balance and the two purely thermal terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FreeEnergyDensity {
    /// Every term except −½cθ² and ½B_ij q_i q_j.
    pub mechanical: f64,
    /// −½cθ².
    pub thermal: f64,
    /// ½B_ij q_i q_j.
    pub flux: f64,
}

impl FreeEnergyDensity {
    pub fn total(&self) -> f64 {
        self.mechanical + self.thermal + self.flux
    }
}

/// ρψ term by term.
pub fn free_energy_density(k: &Kinematics, q: &Vec3, mc: &MaterialConstants) -> FreeEnergyDensity {
    let e = &k.e;
    let psi = &k.psi;
    let (vp, gp, th) = (k.varphi, &k.grad_varphi, k.theta);
    let mut w = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for kk in 0..3 {
                for l in 0..3 {
                    w += 0.5 * mc.elastic[i][j][kk][l] * e[i][j] * e[kk][l];
                    w += 0.5 * mc.wryness[i][j][kk][l] * psi[j][i] * psi[l][kk];
                    w += mc.strain_wryness[i][j][kk][l] * e[i][j] * psi[l][kk];
                }
                w += mc.strain_porosity_grad[i][j][kk] * e[i][j] * gp[kk];
                w += mc.wryness_porosity_grad[i][j][kk] * psi[j][i] * gp[kk];
            }
            w += mc.strain_porosity[i][j] * e[i][j] * vp;
            w += mc.thermal_stress[i][j] * e[i][j] * th;
            w += mc.wryness_porosity[i][j] * psi[j][i] * vp;
            w += mc.wryness_thermal[i][j] * psi[j][i] * th;
            w += 0.5 * mc.porosity_grad_stiffness[i][j] * gp[i] * gp[j];
        }
        w += mc.porosity_grad_coupling[i] * vp * gp[i];
        w += mc.porosity_grad_thermal[i] * gp[i] * th;
    }
    w += 0.5 * mc.porosity_stiffness * vp * vp + mc.porosity_thermal * vp * th;
    FreeEnergyDensity {
        mechanical: w,
        thermal: -0.5 * mc.heat_capacity * th * th,
        flux: 0.5 * bilinear(&mc.flux_energy, q, q),
    }
}

/// Nodal kinematics of a state.
pub fn nodal_kinematics(state: &FieldState, grid: &Grid1D) -> Result<Vec<Kinematics>> {
    state.check_sizes(grid.n_nodes)?;
    let du = ddx3(&state.u, grid)?;
    let dphi = ddx3(&state.phi, grid)?;
    let dvp = ddx(&state.varphi, grid)?;
    Ok((0..grid.n_nodes)
        .map(|k| Kinematics {
            e: strain_1d(&du[k], &state.phi[k]),
            psi: wryness_1d(&dphi[k]),
            varphi: state.varphi[k],
            grad_varphi: [dvp[k], 0.0, 0.0],
            theta: state.theta[k],
        })
        .collect())
}

/// Integrated free energy, split as in [`FreeEnergyDensity`].
pub fn free_energy_parts(state: &FieldState, mc: &MaterialConstants, grid: &Grid1D) -> Result<FreeEnergyDensity> {
    let kin = nodal_kinematics(state, grid)?;
    let dens: Vec<FreeEnergyDensity> = kin
        .iter()
        .zip(&state.q)
        .map(|(k, q)| free_energy_density(k, q, mc))
        .collect();
    let int = |f: fn(&FreeEnergyDensity) -> f64| grid.integrate(&dens.iter().map(f).collect::<Vec<_>>());
    Ok(FreeEnergyDensity {
        mechanical: int(|d| d.mechanical),
        thermal: int(|d| d.thermal),
        flux: int(|d| d.flux),
    })
}

/// ∫ρψ dx.
pub fn free_energy(state: &FieldState, mc: &MaterialConstants, grid: &Grid1D) -> Result<f64> {
    Ok(free_energy_parts(state, mc, grid)?.total())
}

/// s_i(t_m) = (1/θ0) ∫₀^{t_m} q_i dt by the trapezoid rule over the samples.
pub fn entropy_flow_accumulate(history: &History) -> Vec<Vec<Vec3>> {
    let n = history.grid.n_nodes;
    let half = 0.5 * history.sample_dt / history.theta0;
    let mut out = Vec::with_capacity(history.len());
    let mut s = vec![ZERO3; n];
    out.push(s.clone());
    for w in history.states.windows(2) {
        for k in 0..n {
            for i in 0..3 {
                s[k][i] += half * (w[0].q[k][i] + w[1].q[k][i]);
            }
        }
        out.push(s.clone());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub t: f64,
    pub kinetic: f64,
    pub free: f64,
    pub mechanical_total: f64,
    /// Relative change since the sources switched off; None before that.
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub t_on: f64,
    pub rows: Vec<EnergyRow>,
    /// max |E − E(t_on)| / E(t_on) over samples after t_on.
    pub max_drift: f64,
}

/// Energy history of a run whose sources and boundary data switch off.
pub fn energy_report(history: &History, scenario: &Scenario) -> Result<EnergyReport> {
    let t_on = match (scenario.loads.switch_off(), scenario.boundary.left.switch_off(), scenario.boundary.right.switch_off()) {
        (Some(a), Some(b), Some(c)) => a.max(b).max(c),
        _ => {
            return Err(Error::Validation {
                path: "sources".into(),
                message: "energy drift needs data that switch off".into(),
            })
        }
    };
    let mc = &scenario.material;
    let g = &history.grid;
    let mut rows = Vec::with_capacity(history.len());
    for (t, s) in history.times.iter().zip(&history.states) {
        let kinetic = kinetic_energy(s, mc, g);
        let parts = free_energy_parts(s, mc, g)?;
        rows.push(EnergyRow {
            t: *t,
            kinetic,
            free: parts.total(),
            mechanical_total: kinetic + parts.mechanical,
            drift: None,
        });
    }
    let on = history
        .times
        .iter()
        .position(|&t| t >= t_on - 1e-12)
        .ok_or(Error::Range { t1: t_on, t2: t_on, t_end: history.t_end() })?;
    let e0 = rows[on].mechanical_total;
    if e0.abs() < 1e-14 {
        return Err(Error::Degenerate(e0));
    }
    let mut max_drift = 0.0_f64;
    for r in rows.iter_mut().skip(on) {
        let d = (r.mechanical_total - e0).abs() / e0.abs();
        r.drift = Some(d);
        max_drift = max_drift.max(d);
    }
    Ok(EnergyReport { t_on, rows, max_drift })
}

/// Largest relative change of kinetic plus mechanical free energy after
/// every source has switched off.
pub fn mechanical_energy_drift(history: &History, scenario: &Scenario) -> Result<f64> {
    Ok(energy_report(history, scenario)?.max_drift)
}
