use crate::capacity::SnrSpectrum;
use crate::error::{domain, parse_err, Result};

use super::{fmt_num, metadata_pair, parse_finite};

pub const SPECTRUM_HEADER: &str = "frequency_hz,level_dbv";

/// Noise floor assumed when a spectrum file does not carry one, dBV.
pub const DEFAULT_NOISE_FLOOR_DBV: f64 = -91.0;

/// A received-level spectrum as stored on disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumFile {
    /// `# key=value` lines in file order, unknown keys included.
    pub metadata: Vec<(String, String)>,
    /// `(frequency_hz, level_dbv)`, strictly increasing in frequency.
    pub rows: Vec<(f64, f64)>,
}

impl SpectrumFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = SpectrumFile::default();
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
                if line != SPECTRUM_HEADER {
                    return parse_err(line_no, format!("expected header '{SPECTRUM_HEADER}', got '{line}'"));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 {
                return parse_err(line_no, format!("expected 2 fields, got {}", fields.len()));
            }
            let f = parse_finite(fields[0], "frequency_hz", line_no)?;
            let level = parse_finite(fields[1], "level_dbv", line_no)?;
            if let Some(&(prev, _)) = file.rows.last() {
                if f <= prev {
                    return parse_err(line_no, format!("frequency {f} Hz does not increase (previous {prev} Hz)"));
                }
            }
            file.rows.push((f, level));
        }
        if !header_seen {
            return parse_err(text.lines().count().max(1), format!("missing header '{SPECTRUM_HEADER}'"));
        }
        Ok(file)
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(SPECTRUM_HEADER);
        out.push('\n');
        for &(f, l) in &self.rows {
            out.push_str(&format!("{},{}\n", fmt_num(f), fmt_num(l)));
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(pair) => pair.1 = value,
            None => self.metadata.push((key.to_string(), value)),
        }
    }

    fn numeric(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => domain(format!("metadata {key}='{v}' is not a finite number")),
            },
        }
    }

    pub fn distance_m(&self) -> Result<Option<f64>> {
        self.numeric("distance_m")
    }

    pub fn noise_floor_dbv(&self) -> Result<f64> {
        Ok(self.numeric("noise_floor_dbv")?.unwrap_or(DEFAULT_NOISE_FLOOR_DBV))
    }

    /// Uniform-grid SNR spectrum. Non-uniform grids are resampled to the
    /// coarsest spacing present by linear interpolation of the dB levels.
    pub fn to_spectrum(&self) -> Result<SnrSpectrum> {
        if self.rows.len() < 2 {
            return domain("a spectrum needs at least two rows");
        }
        let floor = self.noise_floor_dbv()?;
        let (first, last) = (self.rows[0].0, self.rows[self.rows.len() - 1].0);
        let steps: Vec<f64> = self.rows.windows(2).map(|w| w[1].0 - w[0].0).collect();
        let mean = (last - first) / steps.len() as f64;
        let uniform = steps.iter().all(|s| (s - mean).abs() <= 1e-6 * mean);
        if uniform {
            let levels: Vec<f64> = self.rows.iter().map(|r| r.1).collect();
            return SnrSpectrum::from_levels_dbv(first, mean, &levels, floor);
        }
        let df = steps.iter().copied().fold(0.0, f64::max);
        let n = ((last - first) / df + 1e-9).floor() as usize + 1;
        let mut j = 0;
        let levels: Vec<f64> = (0..n)
            .map(|i| {
                let f = first + i as f64 * df;
                while j + 2 < self.rows.len() && self.rows[j + 1].0 < f {
                    j += 1;
                }
                let (f0, l0) = self.rows[j];
                let (f1, l1) = self.rows[j + 1];
                let t = ((f - f0) / (f1 - f0)).clamp(0.0, 1.0);
                l0 + t * (l1 - l0)
            })
            .collect();
        SnrSpectrum::from_levels_dbv(first, df, &levels, floor)
    }
}

/// Parses a spectrum CSV straight into a uniform-grid [`SnrSpectrum`].
pub fn parse_spectrum(text: &str) -> Result<SnrSpectrum> {
    SpectrumFile::parse(text)?.to_spectrum()
}
