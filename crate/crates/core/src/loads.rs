//! Body sources and boundary data as sums of analytic space/time families.

use serde::{Deserialize, Serialize};

use crate::tensor::Vec3;

/// Value, first and second time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub rate: f64,
    pub accel: f64,
}

impl Jet {
    fn scale(self, a: f64) -> Jet {
        Jet {
            value: a * self.value,
            rate: a * self.rate,
            accel: a * self.accel,
        }
    }

    fn add(&mut self, o: Jet) {
        self.value += o.value;
        self.rate += o.rate;
        self.accel += o.accel;
    }
}

/// Quintic smoothstep 6s⁵ − 15s⁴ + 10s³ on [0, 1] and its two derivatives in s.
fn smootherstep(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let s2 = s * s;
        (
            s2 * s * (10.0 - 15.0 * s + 6.0 * s2),
            30.0 * s2 * (1.0 - s) * (1.0 - s),
            60.0 * s * (1.0 - 3.0 * s + 2.0 * s2),
        )
    }
}

/// Time factor of a source or boundary datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeProfile {
    /// Smooth rise from 0 at t0 to 1 at t1, held afterwards.
    Ramp { t0: f64, t1: f64 },
    /// sin(ω(t − t0)) switched on smoothly over [t0, t1].
    Sine { omega: f64, t0: f64, t1: f64 },
    /// sin⁴ pulse supported on [t0, t1].
    Bump { t0: f64, t1: f64 },
    /// Unit constant. Violates null initial data; only for internal tests.
    Constant,
}

impl TimeProfile {
    pub fn jet(&self, t: f64) -> Jet {
        match *self {
            TimeProfile::Ramp { t0, t1 } => {
                let w = t1 - t0;
                let (f, d, dd) = smootherstep((t - t0) / w);
                Jet {
                    value: f,
                    rate: d / w,
                    accel: dd / (w * w),
                }
            }
            TimeProfile::Sine { omega, t0, t1 } => {
                if t <= t0 {
                    return Jet::default();
                }
                let w = t1 - t0;
                let (f, d, dd) = smootherstep((t - t0) / w);
                let (d, dd) = (d / w, dd / (w * w));
                let (sn, cs) = (omega * (t - t0)).sin_cos();
                Jet {
                    value: sn * f,
                    rate: omega * cs * f + sn * d,
                    accel: -omega * omega * sn * f + 2.0 * omega * cs * d + sn * dd,
                }
            }
            TimeProfile::Bump { t0, t1 } => {
                if t <= t0 || t >= t1 {
                    return Jet::default();
                }
                let w = t1 - t0;
                let k = std::f64::consts::PI / w;
                let (sn, cs) = (k * (t - t0)).sin_cos();
                let s2 = sn * sn;
                Jet {
                    value: s2 * s2,
                    rate: 4.0 * k * s2 * sn * cs,
                    accel: k * k * (12.0 * s2 * cs * cs - 4.0 * s2 * s2),
                }
            }
            TimeProfile::Constant => Jet {
                value: 1.0,
                rate: 0.0,
                accel: 0.0,
            },
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t).value
    }

    /// Time after which the profile is identically zero, if any.
    pub fn switch_off(&self) -> Option<f64> {
        match *self {
            TimeProfile::Bump { t1, .. } => Some(t1),
            _ => None,
        }
    }

    /// Vanishes together with its first derivative at t = 0.
    pub fn is_compatible(&self) -> bool {
        let j = self.jet(0.0);
        j.value.abs() < 1e-14 && j.rate.abs() < 1e-14
    }

    pub fn check(&self) -> Result<(), String> {
        self.check_shape()?;
        if !self.is_compatible() {
            return Err("profile must vanish with its first derivative at t = 0".into());
        }
        Ok(())
    }

    /// Parameter sanity without the null-initial-data requirement.
    pub fn check_shape(&self) -> Result<(), String> {
        match *self {
            TimeProfile::Ramp { t0, t1 }
            | TimeProfile::Sine { t0, t1, .. }
            | TimeProfile::Bump { t0, t1 } => {
                if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
                    return Err(format!("need t0 < t1 (got {t0}, {t1})"));
                }
            }
            TimeProfile::Constant => {}
        }
        Ok(())
    }
}

/// amp · exp(−((x − x0)/width)²) · time(t), acting on one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceTerm {
    #[serde(default)]
    pub component: usize,
    pub amp: f64,
    pub x0: f64,
    pub width: f64,
    pub time: TimeProfile,
}

impl SourceTerm {
    pub fn spatial(&self, x: f64) -> f64 {
        let z = (x - self.x0) / self.width;
        self.amp * (-z * z).exp()
    }

    pub fn jet(&self, x: f64, t: f64) -> Jet {
        self.time.jet(t).scale(self.spatial(x))
    }
}

/// Body force f_i, body couple ℓ_i, extrinsic equilibrated force ℓ and heat supply r.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Loads {
    pub force: Vec<SourceTerm>,
    pub couple: Vec<SourceTerm>,
    pub equilibrated: Vec<SourceTerm>,
    pub heat: Vec<SourceTerm>,
}

fn vector_sum(terms: &[SourceTerm], x: f64, t: f64) -> Vec3 {
    let mut out = [0.0; 3];
    for s in terms {
        out[s.component] += s.jet(x, t).value;
    }
    out
}

fn scalar_jet(terms: &[SourceTerm], x: f64, t: f64) -> Jet {
    let mut out = Jet::default();
    for s in terms {
        out.add(s.jet(x, t));
    }
    out
}

impl Loads {
    pub fn force(&self, x: f64, t: f64) -> Vec3 {
        vector_sum(&self.force, x, t)
    }

    pub fn couple(&self, x: f64, t: f64) -> Vec3 {
        vector_sum(&self.couple, x, t)
    }

    pub fn equilibrated(&self, x: f64, t: f64) -> f64 {
        scalar_jet(&self.equilibrated, x, t).value
    }

    pub fn heat(&self, x: f64, t: f64) -> f64 {
        scalar_jet(&self.heat, x, t).value
    }

    /// r and ṙ.
    pub fn heat_jet(&self, x: f64, t: f64) -> Jet {
        scalar_jet(&self.heat, x, t)
    }

    pub fn is_empty(&self) -> bool {
        self.all().next().is_none()
    }

    fn all(&self) -> impl Iterator<Item = &SourceTerm> {
        self.force
            .iter()
            .chain(&self.couple)
            .chain(&self.equilibrated)
            .chain(&self.heat)
    }

    /// Time after which every source vanishes identically.
    pub fn switch_off(&self) -> Option<f64> {
        self.all()
            .map(|s| s.time.switch_off())
            .try_fold(0.0_f64, |acc, v| v.map(|v| acc.max(v)))
    }

    /// Sum of |amp| over every term; a scale for blow-up detection.
    pub fn peak(&self) -> f64 {
        self.all().map(|s| s.amp.abs()).sum()
    }

    pub fn scaled(&self, a: f64) -> Loads {
        let sc = |v: &Vec<SourceTerm>| {
            v.iter()
                .map(|s| SourceTerm { amp: a * s.amp, ..*s })
                .collect()
        };
        Loads {
            force: sc(&self.force),
            couple: sc(&self.couple),
            equilibrated: sc(&self.equilibrated),
            heat: sc(&self.heat),
        }
    }

    /// Superposition of two load sets.
    pub fn plus(&self, other: &Loads) -> Loads {
        let cat = |a: &Vec<SourceTerm>, b: &Vec<SourceTerm>| a.iter().chain(b).copied().collect();
        Loads {
            force: cat(&self.force, &other.force),
            couple: cat(&self.couple, &other.couple),
            equilibrated: cat(&self.equilibrated, &other.equilibrated),
            heat: cat(&self.heat, &other.heat),
        }
    }

    /// `null_start` additionally demands compatibility with zero initial data.
    pub fn check(&self, length: f64, null_start: bool) -> Result<(), String> {
        for (name, terms, ncomp) in [
            ("force", &self.force, 3),
            ("couple", &self.couple, 3),
            ("equilibrated", &self.equilibrated, 1),
            ("heat", &self.heat, 1),
        ] {
            for (k, s) in terms.iter().enumerate() {
                let at = |m: String| format!("sources.{name}[{k}]: {m}");
                if s.component >= ncomp {
                    return Err(at(format!("component {} out of range", s.component)));
                }
                if !(s.width > 0.0) {
                    return Err(at("width must be positive".into()));
                }
                if !s.amp.is_finite() || !s.x0.is_finite() {
                    return Err(at("non-finite amplitude or centre".into()));
                }
                if !(0.0..=length).contains(&s.x0) {
                    return Err(at(format!("centre {} outside [0, {length}]", s.x0)));
                }
                if null_start { s.time.check() } else { s.time.check_shape() }.map_err(at)?;
            }
        }
        Ok(())
    }
}

/// One Gaussian term with random amplitude, centre and width on every
/// source channel, all sharing the time factor `time`.
pub fn random_sources(seed: u64, length: f64, time: TimeProfile) -> Loads {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut term = |component: usize| SourceTerm {
        component,
        amp: rng.gen_range(-1.0..1.0),
        x0: length * rng.gen_range(0.3..0.7),
        width: length * rng.gen_range(0.06..0.15),
        time,
    };
    Loads {
        force: (0..3).map(&mut term).collect(),
        couple: (0..3).map(&mut term).collect(),
        equilibrated: vec![term(0)],
        heat: vec![term(0)],
    }
}

/// The four complementary boundary pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    /// Σ1 (u*) / Σ2 (t*).
    Displacement,
    /// Σ3 (φ*) / Σ4 (m*).
    Rotation,
    /// Σ5 (volume fraction) / Σ6 (h*).
    Porosity,
    /// Σ7 (θ*) / Σ8 (q*).
    Thermal,
}

impl Group {
    pub const ALL: [Group; 4] = [
        Group::Displacement,
        Group::Rotation,
        Group::Porosity,
        Group::Thermal,
    ];

    pub fn components(self) -> usize {
        match self {
            Group::Displacement | Group::Rotation => 3,
            Group::Porosity | Group::Thermal => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::Displacement => "displacement",
            Group::Rotation => "rotation",
            Group::Porosity => "porosity",
            Group::Thermal => "thermal",
        }
    }
}

/// Which member of a pair is active at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Field prescribed (Σ1, Σ3, Σ5, Σ7).
    Essential,
    /// Traction or flux prescribed (Σ2, Σ4, Σ6, Σ8).
    Natural,
}

impl Condition {
    /// Index of the boundary subset Σ1…Σ8.
    pub fn sigma(self, g: Group) -> usize {
        let base = match g {
            Group::Displacement => 1,
            Group::Rotation => 3,
            Group::Porosity => 5,
            Group::Thermal => 7,
        };
        match self {
            Condition::Essential => base,
            Condition::Natural => base + 1,
        }
    }
}

/// One term of a boundary datum: amp · time(t) on one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryTerm {
    pub group: Group,
    #[serde(default)]
    pub component: usize,
    pub amp: f64,
    pub time: TimeProfile,
}

/// Conditions and data at one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndSpec {
    pub displacement: Condition,
    pub rotation: Condition,
    pub porosity: Condition,
    pub thermal: Condition,
    pub data: Vec<BoundaryTerm>,
}

impl EndSpec {
    pub fn all(c: Condition) -> Self {
        Self {
            displacement: c,
            rotation: c,
            porosity: c,
            thermal: c,
            data: Vec::new(),
        }
    }

    pub fn condition(&self, g: Group) -> Condition {
        match g {
            Group::Displacement => self.displacement,
            Group::Rotation => self.rotation,
            Group::Porosity => self.porosity,
            Group::Thermal => self.thermal,
        }
    }

    /// Datum of group `g` (u*, t*, φ*, …, whichever member is active) at time t.
    pub fn datum(&self, g: Group, t: f64) -> [Jet; 3] {
        let mut out = [Jet::default(); 3];
        for d in self.data.iter().filter(|d| d.group == g) {
            out[d.component].add(d.time.jet(t).scale(d.amp));
        }
        out
    }

    pub fn datum_vec(&self, g: Group, t: f64) -> Vec3 {
        let d = self.datum(g, t);
        [d[0].value, d[1].value, d[2].value]
    }

    pub fn has_data(&self) -> bool {
        self.data.iter().any(|d| d.amp != 0.0)
    }

    pub fn peak(&self) -> f64 {
        self.data.iter().map(|d| d.amp.abs()).sum()
    }

    pub fn switch_off(&self) -> Option<f64> {
        self.data
            .iter()
            .map(|d| d.time.switch_off())
            .try_fold(0.0_f64, |acc, v| v.map(|v| acc.max(v)))
    }

    pub fn check(&self, end: &str, null_start: bool) -> Result<(), String> {
        for (k, d) in self.data.iter().enumerate() {
            let at = |m: String| format!("boundary.{end}.data[{k}]: {m}");
            if d.component >= d.group.components() {
                return Err(at(format!("component {} out of range", d.component)));
            }
            if !d.amp.is_finite() {
                return Err(at("non-finite amplitude".into()));
            }
            if null_start { d.time.check() } else { d.time.check_shape() }.map_err(at)?;
        }
        Ok(())
    }
}

/// Endpoint index of the 1-D body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Left,
    Right,
}

impl End {
    pub const BOTH: [End; 2] = [End::Left, End::Right];

    /// x-component of the outward unit normal.
    pub fn normal(self) -> f64 {
        match self {
            End::Left => -1.0,
            End::Right => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            End::Left => "left",
            End::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub left: EndSpec,
    pub right: EndSpec,
}

impl BoundarySpec {
    /// Every field prescribed as zero at both ends.
    pub fn clamped() -> Self {
        Self {
            left: EndSpec::all(Condition::Essential),
            right: EndSpec::all(Condition::Essential),
        }
    }

    pub fn end(&self, e: End) -> &EndSpec {
        match e {
            End::Left => &self.left,
            End::Right => &self.right,
        }
    }

    /// Same active member of every pair at both ends.
    pub fn same_partition(&self, other: &BoundarySpec) -> bool {
        End::BOTH.iter().all(|&e| {
            Group::ALL
                .iter()
                .all(|&g| self.end(e).condition(g) == other.end(e).condition(g))
        })
    }

    pub fn peak(&self) -> f64 {
        self.left.peak() + self.right.peak()
    }
}
