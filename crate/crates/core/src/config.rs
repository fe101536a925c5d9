//! Scenario files: TOML with [grid], [material], [sources],
//! [boundary.left], [boundary.right] and [run] sections.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::Scenario;
use crate::error::{Error, Result};
use crate::field::Grid1D;
use crate::loads::{random_sources, BoundarySpec, BoundaryTerm, Condition, EndSpec, Loads, SourceTerm, TimeProfile};
use crate::material::{isotropic_preset, random_admissible_material, IsotropicParams, MaterialConstants};
use crate::tensor::*;

/// Every key with its default, as printed by `--print-defaults`.
pub const DEFAULTS: &str = r#"# Units: any coherent system. Lengths in units of L, times in units of t.
# Keys marked (required) have no default.

[grid]
n_nodes = 33          # (required) number of nodes, >= 5
length = 1.0          # (required) L, domain is 0 <= x <= L

[material]
# preset = "isotropic" | "random" | "explicit"            (required)
preset = "isotropic"
# isotropic keys and defaults:
lambda = 1.0          # Lame constant
mu = 1.0              # shear modulus
kappa = 0.5           # micropolar coupling modulus
alpha = 0.1           # wryness moduli (alpha, beta, gamma)
beta = 0.1
gamma = 0.2
rho = 1.0             # mass density
theta0 = 1.0          # reference absolute temperature
tau = 0.05            # heat-flux relaxation time
chi = 1.0             # equilibrated inertia
j = 1.0               # micro-inertia J = j I
a = 1.0               # volume-fraction stiffness
b = 0.0               # volume-fraction / temperature coupling
c = 1.0               # heat capacity
h0 = 0.0              # strain / volume-fraction coupling, H = h0 I
a0 = 0.0              # thermal stress tensor, A = a0 I
d0 = 1.0              # volume-fraction gradient stiffness, D = d0 I
k0 = 1.0              # conductivity, K = k0 I
# flux_energy = [9 numbers, row-major]  # B; default (tau/theta0) K^-1
#
# preset = "random" keys:
#   seed = 0            (required)
#   coupling_scale = 0.1
#   flux_energy = [...] optional, as above
#
# preset = "explicit" keys (all required, tensors as flat row-major lists):
#   density, reference_temperature, relaxation_time, equilibrated_inertia,
#   micro_inertia [9], elastic [81], strain_wryness [81], wryness [81],
#   strain_porosity [9], strain_porosity_grad [27], thermal_stress [9],
#   wryness_porosity [9], wryness_porosity_grad [27], wryness_thermal [9],
#   porosity_stiffness, porosity_grad_coupling [3], porosity_thermal,
#   porosity_grad_thermal [3], heat_capacity, porosity_grad_stiffness [9],
#   conductivity [9], flux_energy [9]

[sources]
# Lists of terms amp * exp(-((x - x0)/width)^2) * time(t). Default: empty.
# force, couple: per unit mass, component = 0..2. equilibrated, heat: component = 0.
# time = { kind = "ramp", t0, t1 }            smooth rise from 0 to 1 over [t0, t1]
#      | { kind = "sine", omega, t0, t1 }     sin(omega (t - t0)) switched on over [t0, t1]
#      | { kind = "bump", t0, t1 }            sin^4 pulse supported on [t0, t1]
force = []
couple = []
equilibrated = []
heat = []
# random = { seed = 11, time = { kind = "bump", t0 = 0.0, t1 = 0.5 } }
#   adds one random Gaussian on every channel, replacing nothing

[boundary.left]       # (required section)
# each pair is "essential" (field prescribed) or "natural" (traction or flux prescribed)
displacement = "essential"
rotation = "essential"
porosity = "essential"
thermal = "essential"
# data = [{ group = "thermal", component = 0, amp = 1.0, time = { kind = "ramp", t0 = 0.0, t1 = 0.1 } }]
data = []

[boundary.right]      # (required section), same keys as boundary.left
displacement = "essential"
rotation = "essential"
porosity = "essential"
thermal = "essential"
data = []

[run]
t_end = 1.0           # (required) integer multiple of dt
dt = 2e-4             # (required) time step
record_every = 1      # steps between recorded samples, must divide t_end/dt
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    grid: Grid1D,
    #[serde(skip)]
    flux_energy: Option<Vec<f64>>,
    material: MaterialSection,
    #[serde(default)]
    sources: SourcesSection,
    boundary: BoundarySection,
    run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
enum MaterialSection {
    Isotropic(IsotropicParams),
    Random(RandomSection),
    Explicit(Box<ExplicitSection>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomSection {
    seed: u64,
    #[serde(default = "default_coupling")]
    coupling_scale: f64,
}

fn default_coupling() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitSection {
    density: f64,
    reference_temperature: f64,
    relaxation_time: f64,
    equilibrated_inertia: f64,
    micro_inertia: Vec<f64>,
    elastic: Vec<f64>,
    strain_wryness: Vec<f64>,
    wryness: Vec<f64>,
    strain_porosity: Vec<f64>,
    strain_porosity_grad: Vec<f64>,
    thermal_stress: Vec<f64>,
    wryness_porosity: Vec<f64>,
    wryness_porosity_grad: Vec<f64>,
    wryness_thermal: Vec<f64>,
    porosity_stiffness: f64,
    porosity_grad_coupling: Vec<f64>,
    porosity_thermal: f64,
    porosity_grad_thermal: Vec<f64>,
    heat_capacity: f64,
    porosity_grad_stiffness: Vec<f64>,
    conductivity: Vec<f64>,
    flux_energy: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SourcesSection {
    force: Vec<SourceTerm>,
    couple: Vec<SourceTerm>,
    equilibrated: Vec<SourceTerm>,
    heat: Vec<SourceTerm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    random: Option<RandomSources>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomSources {
    seed: u64,
    time: TimeProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundarySection {
    left: EndSection,
    right: EndSection,
}

fn essential() -> Condition {
    Condition::Essential
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndSection {
    #[serde(default = "essential")]
    displacement: Condition,
    #[serde(default = "essential")]
    rotation: Condition,
    #[serde(default = "essential")]
    porosity: Condition,
    #[serde(default = "essential")]
    thermal: Condition,
    #[serde(default)]
    data: Vec<BoundaryTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    t_end: f64,
    dt: f64,
    #[serde(default = "one")]
    record_every: usize,
}

fn one() -> usize {
    1
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        path: path.into(),
        message: message.into(),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Text between the first pair of backticks.
fn quoted(msg: &str) -> Option<&str> {
    let a = msg.find('`')?;
    let b = msg[a + 1..].find('`')?;
    Some(&msg[a + 1..a + 1 + b])
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() || path == "." {
        key.to_string()
    } else if path == key || path.ends_with(&format!(".{key}")) {
        path.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn map_de_error(e: serde_path_to_error::Error<toml::de::Error>) -> Error {
    let path = e.path().to_string();
    let msg = e.inner().message().to_string();
    if msg.starts_with("unknown field") {
        return Error::UnknownKey(join(&path, quoted(&msg).unwrap_or("?")));
    }
    if msg.starts_with("missing field") {
        return invalid(&join(&path, quoted(&msg).unwrap_or("?")), msg);
    }
    invalid(if path == "." { "" } else { &path }, msg)
}

fn sized<const N: usize>(v: &[f64], path: &str) -> Result<()> {
    if v.len() != N {
        return Err(invalid(path, format!("expected {N} numbers, got {}", v.len())));
    }
    Ok(())
}

fn mat3(v: &[f64], path: &str) -> Result<Mat3> {
    sized::<9>(v, path)?;
    Ok(mat3_from(v))
}

fn vec3(v: &[f64], path: &str) -> Result<Vec3> {
    sized::<3>(v, path)?;
    Ok([v[0], v[1], v[2]])
}

fn tensor3(v: &[f64], path: &str) -> Result<Tensor3> {
    sized::<27>(v, path)?;
    Ok(tensor3_from(v))
}

fn tensor4(v: &[f64], path: &str) -> Result<Tensor4> {
    sized::<81>(v, path)?;
    Ok(tensor4_from(v))
}

impl ExplicitSection {
    fn build(&self) -> Result<MaterialConstants> {
        let p = |k: &str| format!("material.{k}");
        Ok(MaterialConstants {
            density: self.density,
            reference_temperature: self.reference_temperature,
            relaxation_time: self.relaxation_time,
            equilibrated_inertia: self.equilibrated_inertia,
            micro_inertia: mat3(&self.micro_inertia, &p("micro_inertia"))?,
            elastic: tensor4(&self.elastic, &p("elastic"))?,
            strain_wryness: tensor4(&self.strain_wryness, &p("strain_wryness"))?,
            wryness: tensor4(&self.wryness, &p("wryness"))?,
            strain_porosity: mat3(&self.strain_porosity, &p("strain_porosity"))?,
            strain_porosity_grad: tensor3(&self.strain_porosity_grad, &p("strain_porosity_grad"))?,
            thermal_stress: mat3(&self.thermal_stress, &p("thermal_stress"))?,
            wryness_porosity: mat3(&self.wryness_porosity, &p("wryness_porosity"))?,
            wryness_porosity_grad: tensor3(&self.wryness_porosity_grad, &p("wryness_porosity_grad"))?,
            wryness_thermal: mat3(&self.wryness_thermal, &p("wryness_thermal"))?,
            porosity_stiffness: self.porosity_stiffness,
            porosity_grad_coupling: vec3(&self.porosity_grad_coupling, &p("porosity_grad_coupling"))?,
            porosity_thermal: self.porosity_thermal,
            porosity_grad_thermal: vec3(&self.porosity_grad_thermal, &p("porosity_grad_thermal"))?,
            heat_capacity: self.heat_capacity,
            porosity_grad_stiffness: mat3(&self.porosity_grad_stiffness, &p("porosity_grad_stiffness"))?,
            conductivity: mat3(&self.conductivity, &p("conductivity"))?,
            flux_energy: mat3(&self.flux_energy, &p("flux_energy"))?,
        })
    }

    fn from_material(m: &MaterialConstants) -> Self {
        Self {
            density: m.density,
            reference_temperature: m.reference_temperature,
            relaxation_time: m.relaxation_time,
            equilibrated_inertia: m.equilibrated_inertia,
            micro_inertia: flatten2(&m.micro_inertia),
            elastic: flatten4(&m.elastic),
            strain_wryness: flatten4(&m.strain_wryness),
            wryness: flatten4(&m.wryness),
            strain_porosity: flatten2(&m.strain_porosity),
            strain_porosity_grad: flatten3(&m.strain_porosity_grad),
            thermal_stress: flatten2(&m.thermal_stress),
            wryness_porosity: flatten2(&m.wryness_porosity),
            wryness_porosity_grad: flatten3(&m.wryness_porosity_grad),
            wryness_thermal: flatten2(&m.wryness_thermal),
            porosity_stiffness: m.porosity_stiffness,
            porosity_grad_coupling: m.porosity_grad_coupling.to_vec(),
            porosity_thermal: m.porosity_thermal,
            porosity_grad_thermal: m.porosity_grad_thermal.to_vec(),
            heat_capacity: m.heat_capacity,
            porosity_grad_stiffness: flatten2(&m.porosity_grad_stiffness),
            conductivity: flatten2(&m.conductivity),
            flux_energy: flatten2(&m.flux_energy),
        }
    }
}

impl MaterialSection {
    /// `b` overrides B for the preset families.
    fn build(&self, b: Option<&[f64]>) -> Result<MaterialConstants> {
        let wrap = |e: Error| match e {
            Error::Validation { .. } => e,
            e => invalid("material", e.to_string()),
        };
        let mut m = match self {
            MaterialSection::Isotropic(p) => isotropic_preset(p).map_err(wrap)?,
            MaterialSection::Random(s) => {
                if !(s.coupling_scale >= 0.0) {
                    return Err(invalid("material.coupling_scale", "must be non-negative"));
                }
                random_admissible_material(s.seed, s.coupling_scale)
            }
            MaterialSection::Explicit(s) => s.build()?,
        };
        if let Some(b) = b {
            m.flux_energy = mat3(b, "material.flux_energy")?;
        }
        m.validate().map_err(wrap)?;
        Ok(m)
    }
}

impl From<&EndSection> for EndSpec {
    fn from(e: &EndSection) -> Self {
        EndSpec {
            displacement: e.displacement,
            rotation: e.rotation,
            porosity: e.porosity,
            thermal: e.thermal,
            data: e.data.clone(),
        }
    }
}

impl From<&EndSpec> for EndSection {
    fn from(e: &EndSpec) -> Self {
        EndSection {
            displacement: e.displacement,
            rotation: e.rotation,
            porosity: e.porosity,
            thermal: e.thermal,
            data: e.data.clone(),
        }
    }
}

impl ScenarioFile {
    fn build(&self) -> Result<Scenario> {
        let material = self.material.build(self.flux_energy.as_deref())?;
        let s = &self.sources;
        let mut loads = Loads {
            force: s.force.clone(),
            couple: s.couple.clone(),
            equilibrated: s.equilibrated.clone(),
            heat: s.heat.clone(),
        };
        if let Some(r) = s.random {
            r.time.check().map_err(|m| invalid("sources.random.time", m))?;
            loads = loads.plus(&random_sources(r.seed, self.grid.length, r.time));
        }
        let sc = Scenario {
            grid: self.grid,
            material,
            loads,
            boundary: BoundarySpec {
                left: (&self.boundary.left).into(),
                right: (&self.boundary.right).into(),
            },
            t_end: self.run.t_end,
            dt: self.run.dt,
            record_every: self.run.record_every,
            initial: None,
        };
        sc.validate()?;
        Ok(sc)
    }

    fn from_scenario(sc: &Scenario) -> Self {
        ScenarioFile {
            grid: sc.grid,
            flux_energy: None,
            material: MaterialSection::Explicit(Box::new(ExplicitSection::from_material(&sc.material))),
            sources: SourcesSection {
                force: sc.loads.force.clone(),
                couple: sc.loads.couple.clone(),
                equilibrated: sc.loads.equilibrated.clone(),
                heat: sc.loads.heat.clone(),
                random: None,
            },
            boundary: BoundarySection {
                left: (&sc.boundary.left).into(),
                right: (&sc.boundary.right).into(),
            },
            run: RunSection {
                t_end: sc.t_end,
                dt: sc.dt,
                record_every: sc.record_every,
            },
        }
    }
}

/// Parses and validates scenario text.
pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    // B may override a preset; an explicit block lists it like every other tensor
    let mut b = None;
    if let Some(toml::Value::Table(m)) = table.get_mut("material") {
        if m.get("preset").and_then(|p| p.as_str()) != Some("explicit") {
            b = m.remove("flux_energy");
        }
    }
    let b = match b {
        None => None,
        Some(v) => Some(
            v.try_into::<Vec<f64>>()
                .map_err(|e| invalid("material.flux_energy", e.message()))?,
        ),
    };
    let mut file: ScenarioFile =
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(map_de_error)?;
    file.flux_energy = b;
    file.build()
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario_str(&text)
}

/// The scenario as a self-contained file with an explicit material block;
/// parsing the result gives back the same scenario.
pub fn scenario_to_toml(sc: &Scenario) -> String {
    toml::to_string(&ScenarioFile::from_scenario(sc)).expect("scenario serializes")
}
