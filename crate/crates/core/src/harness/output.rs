use std::io::Write;

use super::sweep::{SweepResult, SweepRow};
use crate::error::Result;

pub const CSV_COLUMNS: [&str; 14] = [
    "scenario",
    "theta",
    "k",
    "g_ab_over_g",
    "c",
    "fidelity",
    "p_plus",
    "p_minus",
    "p_ref",
    "trace_deficit",
    "min_eig",
    "hermiticity_deficit",
    "wall_time_s",
    "error",
];

/// `x` with 12 significant digits, shortest form.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.11e}", x);
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn record(r: &SweepRow) -> Vec<String> {
    vec![
        r.scenario.clone(),
        format_sig(r.theta),
        format_sig(r.k),
        format_sig(r.g_ab_over_g),
        format_sig(r.c),
        opt(r.fidelity),
        opt(r.p_plus),
        opt(r.p_minus),
        opt(r.p_ref),
        opt(r.trace_deficit),
        opt(r.min_eig),
        opt(r.hermiticity_deficit),
        format!("{:.3}", r.wall_time),
        r.error.clone().unwrap_or_default(),
    ]
}

/// Metadata as `# key = value` lines, then a header and one row per record.
pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    for (k, v) in result.metadata.entries() {
        writeln!(out, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &result.rows {
        w.write_record(record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, result)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.974312345678912345), "0.974312345679");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(6.283185307179586), "6.28318530718");
        assert_eq!(format_sig(-1.25e-9), "-1.25e-9");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(100.0), "100");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
    }
}
