use crate::error::{parse_err, Result};
use crate::link_budget::{RangeFlag, RangeSample};

use super::{fmt_num, metadata_pair, parse_finite};

pub const RANGE_HEADER: &str = "distance_m,peak_snr_db,peak_frequency_hz,flag";

/// A range sweep as stored on disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RangeFile {
    pub metadata: Vec<(String, String)>,
    pub samples: Vec<RangeSample>,
}

impl RangeFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = RangeFile::default();
        let mut header_seen = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = metadata_pair(line) {
                if let Some(pair) = meta {
                    file.metadata.push(pair);
                }
                continue;
            }
            if !header_seen {
                if line != RANGE_HEADER {
                    return parse_err(line_no, format!("expected header '{RANGE_HEADER}', got '{line}'"));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return parse_err(line_no, format!("expected 4 fields, got {}", fields.len()));
            }
            let distance = parse_finite(fields[0], "distance_m", line_no)?;
            if distance <= 0.0 {
                return parse_err(line_no, format!("distance must be > 0, got {distance}"));
            }
            let peak_snr = parse_finite(fields[1], "peak_snr_db", line_no)?;
            let freq = parse_finite(fields[2], "peak_frequency_hz", line_no)?;
            let flag: RangeFlag = match fields[3].parse() {
                Ok(f) => f,
                Err(msg) => return parse_err(line_no, msg),
            };
            file.samples.push(RangeSample {
                distance,
                peak_snr,
                frequency_at_peak: freq,
                flag,
                label: String::new(),
            });
        }
        if !header_seen {
            return parse_err(text.lines().count().max(1), format!("missing header '{RANGE_HEADER}'"));
        }
        Ok(file)
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(RANGE_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_num(s.distance),
                fmt_num(s.peak_snr),
                fmt_num(s.frequency_at_peak),
                s.flag
            ));
        }
        out
    }

    /// `true` for every sample not flagged `ok`.
    pub fn flagged_mask(&self) -> Vec<bool> {
        self.samples.iter().map(|s| s.flag != RangeFlag::Ok).collect()
    }
}

pub fn parse_range(text: &str) -> Result<Vec<RangeSample>> {
    Ok(RangeFile::parse(text)?.samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn shift_flag_row() {
        let s = parse_range(&format!("{RANGE_HEADER}\n730,12.0,34629.26,noisefloor_shift\n")).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].distance, 730.0);
        assert_eq!(s[0].frequency_at_peak, 34629.26);
        assert_eq!(s[0].flag, RangeFlag::NoisefloorShift);
    }

    #[test]
    fn empty_body() {
        assert!(parse_range(&format!("# site=lake\n{RANGE_HEADER}\n")).unwrap().is_empty());
    }

    #[test]
    fn bad_flag_and_distance() {
        let e = parse_range(&format!("{RANGE_HEADER}\n10,3,35000,ok\n20,1,35000,maybe\n")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        assert!(parse_range(&format!("{RANGE_HEADER}\n0,3,35000,ok\n")).is_err());
        assert!(parse_range("10,3,35000,ok\n").is_err());
    }

    #[test]
    fn writes_rows() {
        let text = format!("# site=ocean\n{RANGE_HEADER}\n50,22.5,34629.3,ok\n80,37.5,34600,anomaly\n");
        let f = RangeFile::parse(&text).unwrap();
        assert_eq!(f.write(), text);
        assert_eq!(f.flagged_mask(), vec![false, true]);
    }
}
