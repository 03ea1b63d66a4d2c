//! Shared inputs for the criterion benchmarks.

use mecomm_core::modem::BfskConfig;
use mecomm_core::SnrSpectrum;

/// 16 samples per bit; the configuration the BER validation runs on.
pub fn short_config() -> BfskConfig {
    BfskConfig {
        center_frequency: 5_000.0,
        tone_spacing: 1_000.0,
        bit_rate: 1_000.0,
        sample_rate: 16_000.0,
        ..BfskConfig::default()
    }
}

/// A Lorentzian-shaped spectrum over 31-41 kHz at 1 Hz resolution.
pub fn resonant_spectrum() -> SnrSpectrum {
    let (f0, q) = (35_500.0, 200.0);
    let signal = (0..10_000)
        .map(|i| {
            let x = 2.0 * q * (31_000.0 + i as f64 - f0) / f0;
            1e4 / (1.0 + x * x)
        })
        .collect();
    SnrSpectrum::new(31_000.0, 1.0, signal, vec![1.0; 10_000]).expect("valid spectrum")
}
