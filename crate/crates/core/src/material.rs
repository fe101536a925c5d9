//! Constitutive constants of a homogeneous micropolar porous thermoelastic body.
//!
//! All tensors are stored in full anisotropic form. Validation checks the
//! major symmetries of the elastic and wryness tensors, the symmetry of the
//! porosity-gradient stiffness, conductivity and micro-inertia, positivity of
//! the scalar moduli and definiteness of the conductivity and micro-inertia.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::*;

/// Absolute tolerance for stored-symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialConstants {
    /// ρ, bulk mass density.
    pub density: f64,
    /// θ0, reference absolute temperature.
    pub reference_temperature: f64,
    /// τ, heat-flux relaxation time.
    pub relaxation_time: f64,
    /// χ, equilibrated inertia.
    pub equilibrated_inertia: f64,
    /// J_ij.
    pub micro_inertia: Mat3,
    /// C_ijkl.
    pub elastic: Tensor4,
    /// G_ijkl, strain/wryness coupling.
    pub strain_wryness: Tensor4,
    /// Γ_ijkl.
    pub wryness: Tensor4,
    /// H_ij.
    pub strain_porosity: Mat3,
    /// H_ijk.
    pub strain_porosity_grad: Tensor3,
    /// A_ij.
    pub thermal_stress: Mat3,
    /// P_ij.
    pub wryness_porosity: Mat3,
    /// P_ijk.
    pub wryness_porosity_grad: Tensor3,
    /// G_ij, wryness/temperature coupling.
    pub wryness_thermal: Mat3,
    /// a.
    pub porosity_stiffness: f64,
    /// a_i.
    pub porosity_grad_coupling: Vec3,
    /// b.
    pub porosity_thermal: f64,
    /// γ_i.
    pub porosity_grad_thermal: Vec3,
    /// c.
    pub heat_capacity: f64,
    /// D_ij.
    pub porosity_grad_stiffness: Mat3,
    /// K_ij.
    pub conductivity: Mat3,
    /// B_ij, weight of the heat-flux contribution to the free energy.
    pub flux_energy: Mat3,
}

impl MaterialConstants {
    /// All moduli and couplings zero, unit scalars, identity inertia and conductivity.
    pub fn blank() -> Self {
        let mut m = Self {
            density: 1.0,
            reference_temperature: 1.0,
            relaxation_time: 0.0,
            equilibrated_inertia: 1.0,
            micro_inertia: identity3(),
            elastic: ZERO3333,
            strain_wryness: ZERO3333,
            wryness: ZERO3333,
            strain_porosity: ZERO33,
            strain_porosity_grad: ZERO333,
            thermal_stress: ZERO33,
            wryness_porosity: ZERO33,
            wryness_porosity_grad: ZERO333,
            wryness_thermal: ZERO33,
            porosity_stiffness: 0.0,
            porosity_grad_coupling: ZERO3,
            porosity_thermal: 0.0,
            porosity_grad_thermal: ZERO3,
            heat_capacity: 1.0,
            porosity_grad_stiffness: ZERO33,
            conductivity: identity3(),
            flux_energy: ZERO33,
        };
        m.reset_flux_energy();
        m
    }

    /// Sets B = (τ/θ0)·K̃, the default heat-flux energy weight.
    pub fn reset_flux_energy(&mut self) {
        self.flux_energy = match invert_conductivity(self) {
            Ok(inv) => {
                let s = self.relaxation_time / self.reference_temperature;
                let mut b = inv;
                b.iter_mut().flatten().for_each(|x| *x *= s);
                b
            }
            Err(_) => ZERO33,
        };
    }

    /// True when every thermomechanical coupling (A, G_ij, b, γ) vanishes.
    pub fn thermally_decoupled(&self) -> bool {
        self.thermal_stress.iter().flatten().all(|&x| x == 0.0)
            && self.wryness_thermal.iter().flatten().all(|&x| x == 0.0)
            && self.porosity_thermal == 0.0
            && self.porosity_grad_thermal.iter().all(|&x| x == 0.0)
    }

    /// Every violated admissibility condition, in a fixed order.
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let scalars: [(&'static str, f64); 4] = [
            ("rho", self.density),
            ("theta0", self.reference_temperature),
            ("chi", self.equilibrated_inertia),
            ("c", self.heat_capacity),
        ];
        for (name, value) in scalars {
            if !(value > 0.0) {
                out.push(Error::NonpositiveScalar { name, value });
            }
        }
        if !(self.relaxation_time >= 0.0) {
            out.push(Error::NonpositiveScalar {
                name: "tau",
                value: self.relaxation_time,
            });
        }
        for (name, t) in [("C", &self.elastic), ("Gamma", &self.wryness)] {
            if let Some(e) = major_symmetry_violation(name, t) {
                out.push(e);
            }
        }
        for (name, m) in [
            ("D", &self.porosity_grad_stiffness),
            ("K", &self.conductivity),
            ("J", &self.micro_inertia),
        ] {
            if let Some(e) = matrix_symmetry_violation(name, m) {
                out.push(e);
            }
        }
        // Definiteness of K and J is an added admissibility condition: the
        // theory itself only asks for an invertible conductivity.
        for (name, m) in [("K", &self.conductivity), ("J", &self.micro_inertia)] {
            let lmin = min_eigenvalue3(m);
            if !(lmin > 0.0) {
                out.push(Error::NotPositiveDefinite {
                    tensor: name,
                    min_eigenvalue: lmin,
                });
            }
        }
        if let Err(e) = invert_conductivity(self) {
            out.push(e);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidMaterial(v))
        }
    }

    /// Averages C, Γ with their major transposes and D, K, J with their transposes.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        out.elastic = symmetrize4(&self.elastic);
        out.wryness = symmetrize4(&self.wryness);
        out.porosity_grad_stiffness = symmetrize2(&self.porosity_grad_stiffness);
        out.conductivity = symmetrize2(&self.conductivity);
        out.micro_inertia = symmetrize2(&self.micro_inertia);
        out
    }

    /// Symmetric 22×22 matrix of the mechanical part of the free energy over
    /// z = (E_ij, Ψ_ji, φ, φ_,k), so that ρψ_mech = ½ zᵀQz.
    pub fn mechanical_form(&self) -> DMatrix<f64> {
        const E: usize = 0;
        const Y: usize = 9;
        const PHI: usize = 18;
        const GR: usize = 19;
        let mut q = DMatrix::<f64>::zeros(22, 22);
        let mut sym = |a: usize, b: usize, v: f64| {
            if a == b {
                q[(a, a)] += v;
            } else {
                q[(a, b)] += v;
                q[(b, a)] += v;
            }
        };
        for i in 0..3 {
            for j in 0..3 {
                let ij = 3 * i + j;
                for k in 0..3 {
                    for l in 0..3 {
                        let kl = 3 * k + l;
                        if ij <= kl {
                            sym(E + ij, E + kl, 0.5 * (self.elastic[i][j][k][l] + self.elastic[k][l][i][j]));
                            sym(Y + ij, Y + kl, 0.5 * (self.wryness[i][j][k][l] + self.wryness[k][l][i][j]));
                        }
                        // G_ijkl E_ij Ψ_lk, slot Y+kl holds Ψ_lk
                        sym(E + ij, Y + kl, self.strain_wryness[i][j][k][l]);
                    }
                    sym(E + ij, GR + k, self.strain_porosity_grad[i][j][k]);
                    sym(Y + ij, GR + k, self.wryness_porosity_grad[i][j][k]);
                }
                sym(E + ij, PHI, self.strain_porosity[i][j]);
                sym(Y + ij, PHI, self.wryness_porosity[i][j]);
            }
            sym(PHI, GR + i, self.porosity_grad_coupling[i]);
            for j in i..3 {
                sym(GR + i, GR + j, 0.5 * (self.porosity_grad_stiffness[i][j] + self.porosity_grad_stiffness[j][i]));
            }
        }
        sym(PHI, PHI, self.porosity_stiffness);
        q
    }
}

fn major_symmetry_violation(name: &'static str, t: &Tensor4) -> Option<Error> {
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let (a, b) = (t[i][j][k][l], t[k][l][i][j]);
                    if (a - b).abs() > SYMMETRY_TOL {
                        return Some(Error::SymmetryViolation {
                            tensor: name,
                            index: format!("[{i}][{j}][{k}][{l}]"),
                            lhs: a,
                            rhs: b,
                        });
                    }
                }
            }
        }
    }
    None
}

fn matrix_symmetry_violation(name: &'static str, m: &Mat3) -> Option<Error> {
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (m[i][j] - m[j][i]).abs() > SYMMETRY_TOL {
                return Some(Error::SymmetryViolation {
                    tensor: name,
                    index: format!("[{i}][{j}]"),
                    lhs: m[i][j],
                    rhs: m[j][i],
                });
            }
        }
    }
    None
}

fn symmetrize4(t: &Tensor4) -> Tensor4 {
    let mut out = *t;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[i][j][k][l] = 0.5 * (t[i][j][k][l] + t[k][l][i][j]);
                }
            }
        }
    }
    out
}

fn symmetrize2(m: &Mat3) -> Mat3 {
    let mut out = *m;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    out
}

fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    if m.iter().any(|x| !x.is_finite()) {
        return f64::NAN;
    }
    SymmetricEigen::new(m).eigenvalues.min()
}

fn min_eigenvalue3(m: &Mat3) -> f64 {
    let s = symmetrize2(m);
    min_eigenvalue(DMatrix::from_fn(3, 3, |i, j| s[i][j]))
}

/// K̃ = K⁻¹ by Gaussian elimination with partial pivoting.
pub fn invert_conductivity(mc: &MaterialConstants) -> Result<Mat3> {
    invert3(&mc.conductivity)
}

pub(crate) fn invert3(k: &Mat3) -> Result<Mat3> {
    let scale = k.iter().flatten().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let mut a = *k;
    let mut inv = identity3();
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap_or(col);
        let p = a[piv][col];
        if !(p.abs() >= 1e-14 * scale) || scale == 0.0 {
            return Err(Error::NoninvertibleConductivity { pivot: p });
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        for j in 0..3 {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for row in 0..3 {
            if row != col {
                let f = a[row][col];
                for j in 0..3 {
                    a[row][j] -= f * a[col][j];
                    inv[row][j] -= f * inv[col][j];
                }
            }
        }
    }
    // K symmetric implies K̃ symmetric; remove the rounding asymmetry
    Ok(if matrix_symmetry_violation("K", k).is_none() {
        symmetrize2(&inv)
    } else {
        inv
    })
}

/// Named scalars of the isotropic preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsotropicParams {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub theta0: f64,
    pub tau: f64,
    pub chi: f64,
    /// J = j·I.
    pub j: f64,
    /// Porosity stiffness a.
    pub a: f64,
    /// Porosity/temperature coupling b.
    pub b: f64,
    pub c: f64,
    /// H_ij = h0·δ_ij.
    pub h0: f64,
    /// A_ij = a0·δ_ij.
    pub a0: f64,
    /// D_ij = d0·δ_ij.
    pub d0: f64,
    /// K_ij = k0·δ_ij.
    pub k0: f64,
}

impl Default for IsotropicParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            mu: 1.0,
            kappa: 0.5,
            alpha: 0.1,
            beta: 0.1,
            gamma: 0.2,
            rho: 1.0,
            theta0: 1.0,
            tau: 0.05,
            chi: 1.0,
            j: 1.0,
            a: 1.0,
            b: 0.0,
            c: 1.0,
            h0: 0.0,
            a0: 0.0,
            d0: 1.0,
            k0: 1.0,
        }
    }
}

/// Conventional isotropic micropolar forms for C and Γ with diagonal couplings.
pub fn isotropic_preset(p: &IsotropicParams) -> Result<MaterialConstants> {
    let mut m = MaterialConstants::blank();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    m.elastic[i][j][k][l] = p.lambda * delta(i, j) * delta(k, l)
                        + (p.mu + p.kappa) * delta(i, k) * delta(j, l)
                        + p.mu * delta(i, l) * delta(j, k);
                    m.wryness[i][j][k][l] = p.alpha * delta(i, j) * delta(k, l)
                        + p.gamma * delta(i, k) * delta(j, l)
                        + p.beta * delta(i, l) * delta(j, k);
                }
            }
        }
    }
    m.density = p.rho;
    m.reference_temperature = p.theta0;
    m.relaxation_time = p.tau;
    m.equilibrated_inertia = p.chi;
    m.micro_inertia = scaled_identity(p.j);
    m.porosity_stiffness = p.a;
    m.porosity_thermal = p.b;
    m.heat_capacity = p.c;
    m.strain_porosity = scaled_identity(p.h0);
    m.thermal_stress = scaled_identity(p.a0);
    m.porosity_grad_stiffness = scaled_identity(p.d0);
    m.conductivity = scaled_identity(p.k0);
    m.reset_flux_energy();
    m.validate()?;
    Ok(m)
}

/// Smallest eigenvalue targeted for every definite block of a random material.
const RANDOM_MIN_EIGENVALUE: f64 = 0.5;

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let s = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&s + s.transpose()) * 0.5
}

fn shifted_definite(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let s = random_symmetric(rng, n);
    let shift = RANDOM_MIN_EIGENVALUE - min_eigenvalue(s.clone());
    &s + DMatrix::<f64>::identity(n, n) * shift
}

fn to_mat3(m: &DMatrix<f64>) -> Mat3 {
    let mut out = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[(i, j)];
        }
    }
    out
}

fn to_tensor4(m: &DMatrix<f64>) -> Tensor4 {
    let mut u = [[0.0; 9]; 9];
    for (a, row) in u.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            *x = m[(a, b)];
        }
    }
    fold4(&u)
}

/// Deterministic random anisotropic material whose mechanical free energy is
/// positive definite and whose conductivity and micro-inertia are definite.
pub fn random_admissible_material(seed: u64, coupling_scale: f64) -> MaterialConstants {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = MaterialConstants::blank();
    m.density = 1.0 + rng.gen::<f64>();
    m.reference_temperature = 1.0 + rng.gen::<f64>();
    m.equilibrated_inertia = 0.5 + rng.gen::<f64>();
    m.heat_capacity = 1.0 + rng.gen::<f64>();
    m.porosity_stiffness = 1.0 + rng.gen::<f64>();
    m.relaxation_time = 0.05;
    m.elastic = to_tensor4(&shifted_definite(&mut rng, 9));
    m.wryness = to_tensor4(&shifted_definite(&mut rng, 9));
    m.porosity_grad_stiffness = to_mat3(&shifted_definite(&mut rng, 3));
    m.conductivity = to_mat3(&shifted_definite(&mut rng, 3));
    m.micro_inertia = to_mat3(&shifted_definite(&mut rng, 3));

    let s = coupling_scale.abs();
    let mut u = || {
        if s == 0.0 {
            0.0
        } else {
            rng.gen_range(-s..s)
        }
    };
    for v in m.strain_wryness.iter_mut().flatten().flatten().flatten() {
        *v = u();
    }
    for t in [&mut m.strain_porosity_grad, &mut m.wryness_porosity_grad] {
        for v in t.iter_mut().flatten().flatten() {
            *v = u();
        }
    }
    for t in [
        &mut m.strain_porosity,
        &mut m.thermal_stress,
        &mut m.wryness_porosity,
        &mut m.wryness_thermal,
    ] {
        for v in t.iter_mut().flatten() {
            *v = u();
        }
    }
    for v in m.porosity_grad_coupling.iter_mut() {
        *v = u();
    }
    m.porosity_thermal = u();
    for v in m.porosity_grad_thermal.iter_mut() {
        *v = u();
    }

    // Couplings can make the full mechanical form indefinite even though each
    // block is definite; lift the stiffness blocks until it is not.
    let lmin = min_eigenvalue(m.mechanical_form());
    if lmin < RANDOM_MIN_EIGENVALUE {
        let d = RANDOM_MIN_EIGENVALUE - lmin;
        for i in 0..3 {
            for j in 0..3 {
                m.elastic[i][j][i][j] += d;
                m.wryness[i][j][i][j] += d;
            }
            m.porosity_grad_stiffness[i][i] += d;
        }
        m.porosity_stiffness += d;
    }
    m.reset_flux_energy();
    m
}

/// Smallest eigenvalue of the mechanical free-energy form.
pub fn mechanical_form_min_eigenvalue(mc: &MaterialConstants) -> f64 {
    min_eigenvalue(mc.mechanical_form())
}
