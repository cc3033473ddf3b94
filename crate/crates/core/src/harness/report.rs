//! CSV emission. Floats carry 9 significant digits; lines end with LF.

use std::io::Write;

use crate::analysis::RadiusStudyRecord;
use crate::error::Result;

use super::sweep::{DiagRow, MetricsRecord};

/// 9 significant digits in exponential form, e.g. `1.25000000e-2`.
pub fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_metrics_csv(w: &mut impl Write, records: &[MetricsRecord]) -> Result<()> {
    writeln!(w, "snr_db,ber,stderr_ber,avg_nodes,avg_flops,trials")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            format_float(r.snr_db),
            format_float(r.ber),
            format_float(r.stderr_ber),
            format_float(r.avg_nodes),
            format_float(r.avg_flops),
            r.trials
        )?;
    }
    Ok(())
}

pub fn write_radius_csv(w: &mut impl Write, records: &[RadiusStudyRecord]) -> Result<()> {
    writeln!(w, "k,mean_rk_sq,stderr,mean_re_sq,trace_sk,trials")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.k,
            format_float(r.mean_r_sq),
            format_float(r.stderr),
            format_float(r.mean_re_sq),
            format_float(r.trace_s_k),
            r.trials
        )?;
    }
    Ok(())
}

pub fn write_diag_csv(w: &mut impl Write, rows: &[DiagRow]) -> Result<()> {
    writeln!(w, "check,metric,value")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.check, r.metric, format_float(r.value))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_nine_significant_digits() {
        assert_eq!(format_float(0.8), "8.00000000e-1");
        assert_eq!(format_float(0.0), "0.00000000e0");
        assert_eq!(format_float(12345.6789), "1.23456789e4");
        assert_eq!(format_float(-1.5e-9), "-1.50000000e-9");
    }

    #[test]
    fn metrics_csv_layout() {
        let rec = MetricsRecord {
            snr_db: 10.0,
            ber: 0.125,
            stderr_ber: 0.001,
            avg_nodes: 42.5,
            avg_flops: 1000.0,
            trials: 16,
        };
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "snr_db,ber,stderr_ber,avg_nodes,avg_flops,trials");
        assert_eq!(
            lines.next().unwrap(),
            "1.00000000e1,1.25000000e-1,1.00000000e-3,4.25000000e1,1.00000000e3,16"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn radius_csv_header_only_for_empty_study() {
        let mut buf = Vec::new();
        write_radius_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,mean_rk_sq,stderr,mean_re_sq,trace_sk,trials\n");
    }
}
