//! Plot-ready CSV output.
//!
//! Floats are written like C's `%.17g`, which round-trips every `f64`.

use std::io::{self, Write};

use crate::scalar::Scalar;
use crate::sim::TrajectoryRecord;

pub const TRAJECTORY_HEADER: &str = "t,q_p,p_p,q_o,p_o,yQ,yP,z_o";

/// Formats `x` as `printf("%.17g", x)` would.
pub fn fmt_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g<T: Scalar>(x: T) -> String {
    fmt_g17(x.to_f64_lossy())
}

fn write_rows<T: Scalar, W: Write>(out: &mut W, rec: &TrajectoryRecord<T>, prefix: Option<usize>) -> io::Result<()> {
    for i in 0..rec.len() {
        if let Some(id) = prefix {
            write!(out, "{id},")?;
        }
        let (xp, xo, y) = (rec.x_p[i], rec.x_o[i], rec.y_o[i]);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            g(rec.times[i]),
            g(xp[0]),
            g(xp[1]),
            g(xo[0]),
            g(xo[1]),
            g(y[0]),
            g(y[1]),
            g(rec.z_o[i])
        )?;
    }
    Ok(())
}

/// One trajectory per file, columns `t,q_p,p_p,q_o,p_o,yQ,yP,z_o`.
pub fn write_trajectory_csv<T: Scalar, W: Write>(out: &mut W, rec: &TrajectoryRecord<T>) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    write_rows(out, rec, None)
}

/// Long format over all trajectories with a leading `traj_id` column.
pub fn write_pooled_csv<T: Scalar, W: Write>(out: &mut W, records: &[TrajectoryRecord<T>]) -> io::Result<()> {
    writeln!(out, "traj_id,{TRAJECTORY_HEADER}")?;
    for rec in records {
        write_rows(out, rec, Some(rec.trajectory))?;
    }
    Ok(())
}

/// Two-column `theta,f` table.
pub fn write_curve_csv<T: Scalar, W: Write>(out: &mut W, rows: &[(T, T)]) -> io::Result<()> {
    writeln!(out, "theta,f")?;
    for &(theta, f) in rows {
        writeln!(out, "{},{}", g(theta), g(f))?;
    }
    Ok(())
}
