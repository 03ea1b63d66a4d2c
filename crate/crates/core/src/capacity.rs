//! Discretized Shannon-Hartley capacity over a measured SNR spectrum.
//!
//! Bin `n` sits at `start_frequency + n * delta_f` and covers
//! `[f_n, f_n + delta_f)`; its contribution is `log2(1 + S_n / N_n) * delta_f`.

use crate::error::{domain, Result};

/// Frequency-indexed signal and noise powers on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSpectrum {
    /// Hz
    pub start_frequency: f64,
    /// Hz
    pub delta_f: f64,
    /// Linear power per bin (V^2 when built from dBV levels).
    pub signal_power: Vec<f64>,
    /// Linear power per bin, same unit as `signal_power`.
    pub noise_power: Vec<f64>,
}

impl SnrSpectrum {
    pub fn new(start_frequency: f64, delta_f: f64, signal_power: Vec<f64>, noise_power: Vec<f64>) -> Result<Self> {
        let s = SnrSpectrum {
            start_frequency,
            delta_f,
            signal_power,
            noise_power,
        };
        s.validate()?;
        Ok(s)
    }

    /// Constant linear S/N with unit noise power.
    pub fn uniform(start_frequency: f64, delta_f: f64, n_bins: usize, snr: f64) -> Result<Self> {
        Self::new(start_frequency, delta_f, vec![snr; n_bins], vec![1.0; n_bins])
    }

    /// Builds a spectrum from received levels in dBV against a constant noise
    /// floor. Levels below the floor are treated as no signal (S/N = 0).
    pub fn from_levels_dbv(start_frequency: f64, delta_f: f64, levels_dbv: &[f64], noise_floor_dbv: f64) -> Result<Self> {
        let noise = dbv_to_power(noise_floor_dbv);
        let signal = levels_dbv
            .iter()
            .map(|&l| if l < noise_floor_dbv { 0.0 } else { dbv_to_power(l) })
            .collect();
        Self::new(start_frequency, delta_f, signal, vec![noise; levels_dbv.len()])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_f > 0.0 && self.delta_f.is_finite()) {
            return domain(format!("bin width must be > 0, got {}", self.delta_f));
        }
        if !self.start_frequency.is_finite() || self.start_frequency < 0.0 {
            return domain(format!("invalid start frequency {}", self.start_frequency));
        }
        if self.signal_power.len() != self.noise_power.len() {
            return domain("signal and noise bin counts differ");
        }
        if let Some(i) = self.signal_power.iter().position(|p| !(*p >= 0.0 && p.is_finite())) {
            return domain(format!("bin {i}: signal power must be finite and >= 0"));
        }
        if let Some(i) = self.noise_power.iter().position(|p| !(*p > 0.0 && p.is_finite())) {
            return domain(format!("bin {i}: noise power must be > 0"));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.signal_power.len()
    }

    /// `n_bins * delta_f`
    pub fn bandwidth(&self) -> f64 {
        self.n_bins() as f64 * self.delta_f
    }

    pub fn end_frequency(&self) -> f64 {
        self.start_frequency + self.bandwidth()
    }

    pub fn bin_frequency(&self, n: usize) -> f64 {
        self.start_frequency + n as f64 * self.delta_f
    }

    pub fn snr(&self, n: usize) -> f64 {
        self.signal_power[n] / self.noise_power[n]
    }

    /// Linear S/N at `frequency`, interpolated linearly between bin
    /// frequencies. Valid from the first to the last bin frequency.
    pub fn snr_at(&self, frequency: f64) -> Result<f64> {
        let n = self.n_bins();
        if n == 0 {
            return domain("empty spectrum");
        }
        let last = self.bin_frequency(n - 1);
        let tol = 1e-9 * self.delta_f;
        if frequency < self.start_frequency - tol || frequency > last + tol {
            return domain(format!(
                "{frequency} Hz lies outside the spectrum [{}, {last}] Hz",
                self.start_frequency
            ));
        }
        let pos = ((frequency - self.start_frequency) / self.delta_f).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n.saturating_sub(2));
        if n == 1 {
            return Ok(self.snr(0));
        }
        let t = pos - i as f64;
        Ok(self.snr(i) * (1.0 - t) + self.snr(i + 1) * t)
    }

    /// Bins `range` as a new spectrum.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.n_bins() || range.start > range.end {
            return domain("bin range out of bounds");
        }
        Self::new(
            self.bin_frequency(range.start),
            self.delta_f,
            self.signal_power[range.clone()].to_vec(),
            self.noise_power[range].to_vec(),
        )
    }
}

/// `10^(dBV / 10)`, i.e. V^2 relative to 1 V.
pub fn dbv_to_power(dbv: f64) -> f64 {
    10f64.powf(dbv / 10.0)
}

/// Power ratio of a signal level over a noise floor, both in dBV.
pub fn snr_from_levels(signal_dbv: f64, noise_floor_dbv: f64) -> f64 {
    10f64.powf((signal_dbv - noise_floor_dbv) / 10.0)
}

/// Running capacity sum. Each entry is `(bin frequency, capacity of all bins
/// up to and including this one)`; the last entry is the total over the band.
pub fn capacity_cumulative(spectrum: &SnrSpectrum) -> Result<Vec<(f64, f64)>> {
    spectrum.validate()?;
    let mut total = 0.0;
    Ok((0..spectrum.n_bins())
        .map(|n| {
            total += (1.0 + spectrum.snr(n)).log2() * spectrum.delta_f;
            (spectrum.bin_frequency(n), total)
        })
        .collect())
}

/// Total capacity over the whole band, bits/s.
pub fn capacity_total(spectrum: &SnrSpectrum) -> Result<f64> {
    Ok(capacity_cumulative(spectrum)?.last().map_or(0.0, |c| c.1))
}

/// Capacity of the bins lying inside `[f_lo, f_hi]`. Bounds that fall inside
/// a bin are snapped to the nearest interior bin edge.
pub fn capacity_band(spectrum: &SnrSpectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    spectrum.validate()?;
    if !(f_lo <= f_hi) {
        return domain(format!("band [{f_lo}, {f_hi}] is inverted"));
    }
    let tol = 1e-9;
    let (start, end) = (spectrum.start_frequency, spectrum.end_frequency());
    if f_lo < start - tol * spectrum.delta_f || f_hi > end + tol * spectrum.delta_f {
        return domain(format!("band [{f_lo}, {f_hi}] Hz outside spectrum [{start}, {end}] Hz"));
    }
    let lo_edge = ((f_lo - start) / spectrum.delta_f - tol).ceil().max(0.0) as usize;
    let hi_edge = (((f_hi - start) / spectrum.delta_f + tol).floor() as usize).min(spectrum.n_bins());
    if hi_edge <= lo_edge {
        return Ok(0.0);
    }
    let cum = capacity_cumulative(spectrum)?;
    let below = if lo_edge == 0 { 0.0 } else { cum[lo_edge - 1].1 };
    Ok(cum[hi_edge - 1].1 - below)
}
