//! File formats: spectrum CSV, range-sweep CSV, line-oriented config,
//! key-value reports and plain result tables.
//!
//! Every writer is byte-deterministic: numbers are rendered with six
//! significant digits in positional notation, `.` as decimal separator and
//! `\n` line endings.

mod config;
mod range;
mod spectrum;
mod synth;

pub use config::{parse_config, Config, CONFIG_KEYS};
pub use range::{parse_range, RangeFile, RANGE_HEADER};
pub use spectrum::{parse_spectrum, SpectrumFile, DEFAULT_NOISE_FLOOR_DBV, SPECTRUM_HEADER};
pub use synth::{synth_dataset, SynthDataset, SynthOptions};

use crate::error::{parse_err, Result};
use crate::link_budget::PathLossModel;

/// Six significant digits, positional notation, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x.is_infinite() {
            if x > 0.0 { "inf".into() } else { "-inf".into() }
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.5e}", x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let s = if exp >= 5 {
        let scale = 10f64.powi(exp - 5);
        format!("{:.0}", (x / scale).round() * scale)
    } else {
        let decimals = (5 - exp) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Parses one finite number, reporting `line` on failure.
pub(crate) fn parse_finite(field: &str, what: &str, line: usize) -> Result<f64> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => parse_err(line, format!("{what} must be finite, got {v}")),
        Err(_) => parse_err(line, format!("{what}: cannot parse '{}'", field.trim())),
    }
}

/// Splits `# key=value` comment lines; returns `None` for non-comments.
pub(crate) fn metadata_pair(line: &str) -> Option<Option<(String, String)>> {
    let body = line.strip_prefix('#')?;
    Some(
        body.split_once('=')
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string())),
    )
}

/// CSV table with a header row.
pub fn write_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `key = value` lines.
pub fn write_report(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Key-value report of a fitted path-loss model.
pub fn path_loss_report(model: &PathLossModel) -> String {
    let mut pairs = vec![
        ("model.segments".to_string(), model.segments.len().to_string()),
        ("model.noise_floor_dbv".to_string(), fmt_num(model.noise_floor)),
        ("model.rms_residual_db".to_string(), fmt_num(model.rms_residual_db)),
    ];
    for (i, s) in model.segments.iter().enumerate() {
        pairs.push((format!("segment{i}.r_min_m"), fmt_num(s.r_min)));
        pairs.push((format!("segment{i}.r_max_m"), fmt_num(s.r_max)));
        pairs.push((format!("segment{i}.exponent"), fmt_num(s.exponent)));
        pairs.push((format!("segment{i}.level_at_rmin_db"), fmt_num(s.level_at_rmin)));
    }
    write_report(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_num(7.592_706), "7.59271");
        assert_eq!(fmt_num(901_125.0), "901125");
        assert_eq!(fmt_num(1_755_000.0), "1755000");
        assert_eq!(fmt_num(1_234_567.0), "1234570");
        assert_eq!(fmt_num(34_629.26), "34629.3");
        assert_eq!(fmt_num(119.095_5), "119.096");
        assert_eq!(fmt_num(0.003_368_97), "0.00336897");
        assert_eq!(fmt_num(-91.0), "-91");
        assert_eq!(fmt_num(9.999_999), "10");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(2.5e-7), "0.00000025");
    }

    #[test]
    fn table_layout() {
        let t = write_table(&["a", "b"], &[vec![1.0, 2.5], vec![-3.0, 0.125]]);
        assert_eq!(t, "a,b\n1,2.5\n-3,0.125\n");
    }
}
