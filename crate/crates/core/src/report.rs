//! CSV export of histories and check results.

use std::io::Write;

use crate::dynamics::History;
use crate::energetics::EnergyReport;
use crate::error::{Error, Result};
use crate::loads::End;
use crate::reciprocity::{ReciprocityRow, TransformRow};
use crate::variational::VariationalRow;

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io)?;
    Ok(w)
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub const HISTORY_HEADER: [&str; 20] = [
    "t", "x", "u1", "u2", "u3", "v1", "v2", "v3", "phi1", "phi2", "phi3", "omega1", "omega2", "omega3", "varphi",
    "varphidot", "theta", "q1", "q2", "q3",
];

/// One row per (sample, node).
pub fn write_history<W: Write>(h: &History, out: W) -> Result<()> {
    let mut w = writer(out, &HISTORY_HEADER)?;
    let xs = h.grid.coords();
    for (t, s) in h.times.iter().zip(&h.states) {
        for (k, x) in xs.iter().enumerate() {
            let mut row = vec![num(*t), num(*x)];
            for v in [&s.u[k], &s.v[k], &s.phi[k], &s.omega[k]] {
                row.extend(v.iter().map(|c| num(*c)));
            }
            row.extend([s.varphi[k], s.varphidot[k], s.theta[k]].map(num));
            row.extend(s.q[k].iter().map(|c| num(*c)));
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub const BOUNDARY_HEADER: [&str; 11] =
    ["t", "end", "T11n", "T12n", "T13n", "M11n", "M12n", "M13n", "h1n", "q1n", "s1n"];

/// One row per (sample, end).
pub fn write_boundary<W: Write>(h: &History, out: W) -> Result<()> {
    let mut w = writer(out, &BOUNDARY_HEADER)?;
    for (t, tr) in h.times.iter().zip(&h.traces) {
        for (e, b) in End::BOTH.iter().zip(tr) {
            let mut row = vec![num(*t), e.name().to_string()];
            row.extend(b.t_n.iter().chain(&b.m_n).map(|c| num(*c)));
            row.extend([b.h_n, b.q_n, b.s_n].map(num));
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn write_energy<W: Write>(r: &EnergyReport, out: W) -> Result<()> {
    let mut w = writer(out, &["t", "kinetic", "free", "mechanical_total", "drift"])?;
    for e in &r.rows {
        let drift = e.drift.map(num).unwrap_or_default();
        w.write_record([num(e.t), num(e.kinetic), num(e.free), num(e.mechanical_total), drift])
            .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Time-domain rows first (check = reciprocity), then transform rows
/// (check = transform). The time-domain rows carry no bound.
pub fn write_reciprocity<W: Write>(time: &[ReciprocityRow], transform: &[TransformRow], out: W) -> Result<()> {
    let mut w = writer(out, &["check", "t_or_s", "I_12", "I_21", "defect", "bound"])?;
    for r in time {
        w.write_record(["reciprocity".into(), num(r.t), num(r.i_12), num(r.i_21), num(r.defect), String::new()])
            .map_err(io)?;
    }
    for r in transform {
        w.write_record(["transform".into(), num(r.s), num(r.p_12), num(r.p_21), num(r.defect), num(r.bound)])
            .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_variational<W: Write>(rows: &[VariationalRow], out: W) -> Result<()> {
    let mut w = writer(out, &["check", "defect", "norm_variation", "resolution_h", "resolution_dt", "seed"])?;
    for r in rows {
        w.write_record([
            r.check.clone(),
            num(r.defect),
            num(r.norm_variation),
            num(r.resolution_h),
            num(r.resolution_dt),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
