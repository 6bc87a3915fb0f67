use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::ConvergenceReport;
use crate::error::{Result, VieError};
use crate::field::{BoundaryReport, FieldValue, RadiationReport};
use crate::vec3::{CVec3, Vec3};

/// Nine significant digits.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// `x` rounded to nine significant digits.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() {
        fmt9(x).parse().unwrap_or(x)
    } else {
        x
    }
}

fn round_value(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round9).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_value),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

pub(super) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut v = serde_json::to_value(value).map_err(|e| VieError::Io(e.to_string()))?;
    round_value(&mut v);
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| VieError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn push_complex3(line: &mut String, v: &CVec3) {
    for c in v {
        let _ = write!(line, ",{},{}", fmt9(c.re), fmt9(c.im));
    }
}

pub(super) fn write_far_field(path: &Path, rows: &[(f64, f64, CVec3)]) -> Result<()> {
    let mut out = String::from("theta,phi,re_ax,im_ax,re_ay,im_ay,re_az,im_az\n");
    for (t, p, a) in rows {
        let _ = write!(out, "{},{}", fmt9(*t), fmt9(*p));
        push_complex3(&mut out, a);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub(super) fn write_probes(path: &Path, pts: &[Vec3], values: &[FieldValue]) -> Result<()> {
    let mut out = String::from("x,y,z,interior,boundary_layer,re_ex,im_ex,re_ey,im_ey,re_ez,im_ez\n");
    for (x, v) in pts.iter().zip(values) {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            fmt9(x[0]),
            fmt9(x[1]),
            fmt9(x[2]),
            v.interior as u8,
            v.boundary_layer as u8
        );
        push_complex3(&mut out, &v.value);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub(super) fn write_boundary(path: &Path, rep: &BoundaryReport) -> Result<()> {
    let mut out = String::from("x,y,z,nx,ny,nz,tangential,normal\n");
    for r in &rep.rows {
        let cols: Vec<String> = r.point.iter().chain(&r.normal).chain([&r.tangential, &r.normal_jump]).map(|v| fmt9(*v)).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub(super) fn write_radiation(path: &Path, rep: &RadiationReport) -> Result<()> {
    let mut out = String::from("dx,dy,dz,r,scaled_residual\n");
    for r in &rep.rows {
        let cols: Vec<String> = r.direction.iter().chain([&r.radius, &r.scaled_residual]).map(|v| fmt9(*v)).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub(super) fn write_convergence(path: &Path, rep: &ConvergenceReport) -> Result<()> {
    let opt = |v: Option<f64>| v.map(fmt9).unwrap_or_default();
    let mut out = String::from("h,num_basis,sigma_scat,far_field_difference,empirical_order,mie_relative_error\n");
    for r in &rep.levels {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt9(r.h),
            r.num_basis,
            fmt9(r.sigma_scat),
            opt(r.far_field_difference),
            opt(r.empirical_order),
            opt(r.mie_relative_error)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}
